"""Static and dual-granularity dynamic rewards for hypothesis/reference pairs.

The static signal is (1 - WER) gated by an anti-repetition check. The
dynamic signal blends a token-level refinement reward (correct tokens
discounted by soft/hard error counts) with a sentence-level
reconstruction reward (LCS backbone agreement plus a length term),
fused by a mirrored WER gate: below the threshold the refinement term
dominates, at or above it the reconstruction term does. The final reward
is a fixed convex combination of the static and dynamic parts.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = [
    "RewardConfig",
    "AlignmentResult",
    "RewardBreakdown",
    "normalize_text",
    "script_mode_for",
    "align",
    "compute_wer",
    "lcs_length",
    "r_rep",
    "token_similarity",
    "r_fine",
    "r_struc",
    "r_dynamic",
    "score",
]

SCRIPT_MODES = ("space_delimited", "character")


@dataclass(frozen=True)
class RewardConfig:
    tau: float = 0.3  # WER gate threshold
    alpha_s: float = 0.4  # soft-error discount
    alpha_dyn: float = 0.6  # dynamic weight in the final combination
    epsilon: float = 1e-8
    rep_ngram_max: int = 4
    rep_run_threshold: int = 4
    sim_threshold: float = 0.5


@dataclass(frozen=True)
class AlignmentResult:
    """Token-level edit alignment between hypothesis and reference."""

    n_correct: int
    substitutions: tuple  # (hyp_token, ref_token) pairs
    n_insertions: int
    n_deletions: int


@dataclass(frozen=True)
class RewardBreakdown:
    wer: float
    r_wer: float
    r_rep: float
    r_static: float
    r_fine: float
    r_struc: float
    r_dynamic: float
    r_total: float


def normalize_text(raw: str, script_mode: str = "space_delimited") -> tuple:
    """Lowercase, strip punctuation to spaces, and tokenize.

    space_delimited mode splits on whitespace; character mode makes each
    remaining non-space character its own token (Mandarin-style scoring).
    """
    if script_mode not in SCRIPT_MODES:
        raise ValueError(f"script_mode must be one of {SCRIPT_MODES}, got {script_mode!r}")
    cleaned = "".join(ch.lower() if ch.isalnum() else " " for ch in raw)
    if script_mode == "character":
        return tuple(ch for ch in cleaned if ch != " ")
    return tuple(cleaned.split())


_CJK_RANGES = ((0x4E00, 0x9FFF), (0x3400, 0x4DBF), (0xF900, 0xFAFF), (0x3000, 0x303F))


def _has_cjk(text: str) -> bool:
    return any(lo <= ord(ch) <= hi for ch in text for lo, hi in _CJK_RANGES)


def script_mode_for(language: str | None, reference: str) -> str:
    """Pick the scoring mode from a language tag and the reference text.

    Mandarin tags score per character; anything containing CJK characters
    falls back to character mode regardless of the tag.
    """
    if _has_cjk(reference):
        return "character"
    if language and language.lower().startswith("zh"):
        return "character"
    return "space_delimited"


def align(hyp, ref) -> AlignmentResult:
    """Unit-cost Levenshtein alignment with backtrace.

    Ties are broken preferring match > substitution > deletion >
    insertion, where deletions consume reference tokens and insertions
    consume hypothesis tokens.
    """
    n_hyp, n_ref = len(hyp), len(ref)
    dist = [[0] * (n_ref + 1) for _ in range(n_hyp + 1)]
    for i in range(1, n_hyp + 1):
        dist[i][0] = i
    for j in range(1, n_ref + 1):
        dist[0][j] = j
    for i in range(1, n_hyp + 1):
        row, prev = dist[i], dist[i - 1]
        token = hyp[i - 1]
        for j in range(1, n_ref + 1):
            sub = prev[j - 1] + (token != ref[j - 1])
            row[j] = min(sub, prev[j] + 1, row[j - 1] + 1)

    n_correct = n_ins = n_del = 0
    subs = []
    i, j = n_hyp, n_ref
    while i > 0 or j > 0:
        if i > 0 and j > 0 and hyp[i - 1] == ref[j - 1] and dist[i][j] == dist[i - 1][j - 1]:
            n_correct += 1
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and dist[i][j] == dist[i - 1][j - 1] + 1:
            subs.append((hyp[i - 1], ref[j - 1]))
            i, j = i - 1, j - 1
        elif j > 0 and dist[i][j] == dist[i][j - 1] + 1:
            n_del += 1
            j -= 1
        else:
            n_ins += 1
            i -= 1
    subs.reverse()
    return AlignmentResult(n_correct, tuple(subs), n_ins, n_del)


def compute_wer(a: AlignmentResult, ref_len: int) -> float:
    """(substitutions + insertions + deletions) / ref_len; may exceed 1."""
    if ref_len <= 0:
        raise ValueError("WER is undefined for an empty reference")
    return (len(a.substitutions) + a.n_insertions + a.n_deletions) / ref_len


def r_rep(hyp, cfg: RewardConfig = RewardConfig()) -> int:
    """Anti-repetition gate: 0 iff some short n-gram loops too long.

    Fires when any n-gram with n <= rep_ngram_max appears consecutively
    (back-to-back, non-overlapping) at least rep_run_threshold times.
    """
    n_tokens = len(hyp)
    for n in range(1, min(cfg.rep_ngram_max, n_tokens) + 1):
        for start in range(0, n_tokens - n + 1):
            repeats = 1
            j = start + n
            while j + n <= n_tokens and hyp[j : j + n] == hyp[j - n : j]:
                repeats += 1
                if repeats >= cfg.rep_run_threshold:
                    return 0
                j += n
    return 1


def _edit_distance(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ch_a in enumerate(a, start=1):
        curr = [i] + [0] * len(b)
        for j, ch_b in enumerate(b, start=1):
            curr[j] = min(prev[j - 1] + (ch_a != ch_b), prev[j] + 1, curr[j - 1] + 1)
        prev = curr
    return prev[-1]


def token_similarity(h: str, r: str) -> float:
    """1 - edit(h, r) / max(|h|, |r|) over characters, in [0, 1]."""
    longest = max(len(h), len(r))
    if longest == 0:
        raise ValueError("similarity of two empty tokens is undefined")
    return 1.0 - _edit_distance(h, r) / longest


def r_fine(a: AlignmentResult, cfg: RewardConfig = RewardConfig()) -> float:
    """Token-level refinement reward in [0, 1].

    Substitutions split into soft (similarity >= sim_threshold) and hard;
    insertions and deletions all count as hard. Returns
    n_C / (n_C + n_hard + alpha_s * n_soft + epsilon).
    """
    n_soft = sum(1 for h, r in a.substitutions if token_similarity(h, r) >= cfg.sim_threshold)
    n_hard = (len(a.substitutions) - n_soft) + a.n_insertions + a.n_deletions
    return a.n_correct / (a.n_correct + n_hard + cfg.alpha_s * n_soft + cfg.epsilon)


def lcs_length(hyp, ref) -> int:
    """Token-level longest common subsequence length."""
    if not hyp or not ref:
        return 0
    prev = [0] * (len(ref) + 1)
    for token in hyp:
        curr = [0] * (len(ref) + 1)
        for j, ref_token in enumerate(ref, start=1):
            if token == ref_token:
                curr[j] = prev[j - 1] + 1
            else:
                curr[j] = max(curr[j - 1], prev[j])
        prev = curr
    return prev[-1]


def r_struc(hyp, ref) -> float:
    """Sentence-level reconstruction reward in [0, 1].

    Half backbone agreement (LCS over reference length), half a length
    term penalizing truncation and runaway generation.
    """
    if len(ref) == 0:
        raise ValueError("reconstruction reward is undefined for an empty reference")
    backbone = lcs_length(hyp, ref) / len(ref)
    length_term = max(0.0, 1.0 - abs(len(hyp) - len(ref)) / len(ref))
    return 0.5 * backbone + 0.5 * length_term


def r_dynamic(fine: float, struc: float, wer: float, cfg: RewardConfig = RewardConfig()) -> float:
    """WER-gated mirrored fusion of the two granularities."""
    if wer < cfg.tau:
        return 0.75 * fine + 0.25 * struc
    return 0.25 * fine + 0.75 * struc


def score(
    hyp_raw: str,
    ref_raw: str,
    cfg: RewardConfig = RewardConfig(),
    script_mode: str = "space_delimited",
) -> RewardBreakdown:
    """Full reward breakdown for one raw hypothesis/reference pair.

    r_wer = 1 - WER may go negative and is propagated into r_static as-is
    unless the repetition gate zeroes it. The total is
    (1 - alpha_dyn) * r_static + alpha_dyn * r_dynamic.
    """
    hyp = normalize_text(hyp_raw, script_mode)
    ref = normalize_text(ref_raw, script_mode)
    if len(ref) == 0:
        raise ValueError("reference normalizes to zero tokens")
    a = align(hyp, ref)
    wer = compute_wer(a, len(ref))
    rep = r_rep(hyp, cfg)
    r_wer_value = 1.0 - wer
    static = rep * r_wer_value
    fine = r_fine(a, cfg)
    struc = r_struc(hyp, ref)
    dynamic = r_dynamic(fine, struc, wer, cfg)
    total = (1.0 - cfg.alpha_dyn) * static + cfg.alpha_dyn * dynamic
    return RewardBreakdown(wer, r_wer_value, float(rep), static, fine, struc, dynamic, total)
