"""End-to-end corpus synthesis, one-shot degradation, scoring and filtering.

``synthesize`` fans (clean clip, scenario, replica) tasks over a worker
pool: every task is keyed by a stable hash of that triple, so output
bytes are identical for any worker count. Clips are resampled to the
canonical 16 kHz rate on load; noise clips come deterministically from a
sorted listing of the noise directory. Structured progress/error events
go to stderr as JSON lines; data goes to files or stdout only.
"""

from __future__ import annotations

import dataclasses
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import effects
from .catalog import MergedChain, enumerate_scenarios, merge_chains, scenario_by_id
from .manifest import ManifestRecord
from .rewards import RewardConfig, score, script_mode_for
from .severity import (
    SeverityProfile,
    ResolvedChain,
    derive_key,
    instantiate_chain,
    map_severity,
    resolve_chain,
    substream,
)
from .waveform import Waveform, load_wav, resample_to, save_wav

__all__ = [
    "CANONICAL_RATE",
    "DEFAULT_PROMPT",
    "SynthesisJob",
    "SynthesisSummary",
    "NoisePool",
    "apply_resolved_chain",
    "synthesize",
    "degrade_one",
    "score_pairs",
    "filter_manifest",
    "log_event",
]

CANONICAL_RATE = 16000
DEFAULT_PROMPT = "Transcribe the given audio and output plain text only."


def log_event(**fields) -> None:
    """Emit one structured JSON log line on stderr."""
    print(json.dumps(fields, ensure_ascii=False, sort_keys=True), file=sys.stderr)


class NoisePool:
    """Sorted, deterministic view of a directory of noise WAVs."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._files = tuple(sorted(p for p in self.root.rglob("*.wav") if p.is_file()))
        if not self._files:
            raise ValueError(f"no .wav files under noise dir {self.root}")

    def files_for(self, category: str | None) -> tuple:
        """Files of one category subdirectory, or the whole pool."""
        if category:
            subdir = self.root / category
            if subdir.is_dir():
                subset = tuple(p for p in self._files if subdir in p.parents)
                if subset:
                    return subset
        return self._files

    def pick(self, rng: np.random.Generator, category: str | None, sample_rate: int) -> Waveform:
        files = self.files_for(category)
        path = files[int(rng.integers(0, len(files)))]
        return _load_resampled(str(path), sample_rate)


@lru_cache(maxsize=64)
def _load_resampled(path: str, sample_rate: int) -> Waveform:
    return resample_to(load_wav(path), sample_rate)


def _white_noise(rng: np.random.Generator, n: int, sample_rate: int) -> Waveform:
    return Waveform(rng.standard_normal(n) * 0.1, sample_rate)


def apply_resolved_chain(
    w: Waveform, resolved: ResolvedChain, noise_pool: NoisePool | None = None
) -> tuple[Waveform, dict]:
    """Run every effect of a resolved chain in order.

    Noise entries draw their source (a pool clip or generated white
    noise) from position-keyed substreams of the sample key, keeping the
    whole application deterministic. Returns the processed waveform and
    an info map (currently the clipped flag from loudness stages).
    """
    clipped = False
    for position, (name, params) in enumerate(resolved.chain):
        if name == "add_noise":
            if params.get("use_white_noise"):
                rng = substream(resolved.sample_key, "white_noise", position)
                noise = _white_noise(rng, len(w), w.sample_rate)
            else:
                if noise_pool is None:
                    raise ValueError("chain needs a noise clip but no noise pool was given")
                rng = substream(resolved.sample_key, "noise_pick", position)
                noise = noise_pool.pick(rng, params.get("noise_category"), w.sample_rate)
            w = effects.add_noise(
                w, effects.NoiseParams(noise, params["noise_db"], params.get("wet", 1.0))
            )
        elif name == "add_echo":
            w = effects.add_echo(
                w, effects.EchoParams(params["delay_seconds"], params["feedback"], params["mix"])
            )
        elif name == "add_reverb":
            w = effects.add_reverb(
                w,
                effects.ReverbParams(
                    params["room_size"], params["damping"], params["wet_level"], params["dry_level"]
                ),
            )
        elif name == "add_distortion":
            w = effects.add_distortion(
                w, effects.DistortionParams(params["drive_db"], params.get("wet", 1.0))
            )
        elif name == "add_resample":
            w = effects.add_resample(
                w,
                effects.ResampleParams(
                    params["target_sr"],
                    params.get("wet", 1.0),
                    params.get("prob", 1.0),
                    params.get("threshold", 0.4),
                ),
            )
        elif name == "apply_filter":
            w = effects.apply_filter(
                w,
                effects.FilterParams(
                    params["filter_type"],
                    params["cutoff_hz"],
                    params.get("repeat", 1),
                    params.get("wet", 1.0),
                ),
            )
        elif name in ("change_volume", "change_volume_distortion"):
            w, stage_clipped = effects.loudness_normalize(w, params["target_lufs"])
            clipped = clipped or stage_clipped
        elif name == "add_stutter_replace":
            rng = substream(resolved.sample_key, "stutter", position)
            w = effects.add_stutter_replace(
                w,
                effects.StutterParams(
                    params["frame_ms"],
                    params["stutter_prob"],
                    params["repeat_prob"],
                    params["max_repeats"],
                ),
                rng,
            )
        else:
            raise ValueError(f"no applier for primitive {name!r}")
    return w, {"clipped": clipped}


@dataclass(frozen=True)
class SynthesisJob:
    """One corpus-synthesis run over a clean manifest and a scenario set."""

    clean_manifest: str
    output_dir: str
    noise_dir: str | None = None
    scenario_ids: tuple | None = None  # None selects the full catalog
    arity: int | None = None
    profile: SeverityProfile = field(default_factory=SeverityProfile)
    samples_per_clip: int = 1
    worker_count: int = 1
    sample_rate: int = CANONICAL_RATE
    prompt: str = DEFAULT_PROMPT

    def __post_init__(self) -> None:
        if self.samples_per_clip < 1:
            raise ValueError("samples_per_clip must be >= 1")
        if self.worker_count < 1:
            raise ValueError("worker_count must be >= 1")

    def selected_scenarios(self) -> list:
        if self.scenario_ids is not None:
            return [scenario_by_id(sid) for sid in self.scenario_ids]
        scenarios = enumerate_scenarios()
        if self.arity is not None:
            scenarios = [s for s in scenarios if s.arity == self.arity]
        return scenarios


@dataclass
class SynthesisSummary:
    records_written: int
    per_scenario: dict
    skipped: int
    errors: list


def _chain_needs_noise_pool(merged: MergedChain) -> bool:
    return any(
        spec.primitive_name == "add_noise" and not spec.fixed_params.get("use_white_noise")
        for spec in merged.chain
    )


def _read_clean_manifest(path: str | Path) -> list:
    rows = []
    with open(path, encoding="utf-8") as handle:
        for index, line in enumerate(handle):
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            if "audio" not in row or "text" not in row:
                raise ValueError(f"clean manifest row {index}: needs 'audio' and 'text' fields")
            rows.append((row["audio"], row["text"], row.get("language", "en")))
    return rows


@dataclass(frozen=True)
class _Task:
    index: int
    clip_path: str  # as written in the clean manifest; keys the sample hash
    clip_abs: str  # resolved location for loading
    transcript: str
    language: str
    scenario_id: str
    replica: int
    wav_name: str
    output_dir: str
    noise_dir: str | None
    profile: SeverityProfile
    sample_rate: int
    prompt: str


@lru_cache(maxsize=4)
def _noise_pool_for(noise_dir: str) -> NoisePool:
    return NoisePool(noise_dir)


def _run_task(task: _Task) -> tuple:
    """Worker body: synthesize one sample. Returns (index, line|None, error|None)."""
    try:
        scenario = scenario_by_id(task.scenario_id)
        merged = merge_chains(scenario)
        sample_id = derive_key(0, "sample", task.clip_path, task.scenario_id, task.replica)
        resolved = instantiate_chain(merged, task.profile, sample_id)

        clip = _load_resampled(task.clip_abs, task.sample_rate)
        pool = _noise_pool_for(task.noise_dir) if task.noise_dir else None
        out, info = apply_resolved_chain(clip, resolved, pool)

        wav_path = Path(task.output_dir) / "wavs" / task.wav_name
        save_wav(out, wav_path)

        record = ManifestRecord(
            messages=({"role": "user", "content": task.prompt},),
            audios=(f"wavs/{task.wav_name}",),
            solution=task.transcript,
            meta={
                "scenario_id": task.scenario_id,
                "severity": resolved.severity,
                "latent": resolved.latent,
                "params": [[name, params] for name, params in resolved.chain],
                "seed": task.profile.seed,
                "language": task.language,
                "source_audio": task.clip_path,
                "replica": task.replica,
                "clipped": info["clipped"],
            },
        )
        return task.index, record.to_json(), None
    except Exception as exc:  # noqa: BLE001 - worker reports, parent decides
        return task.index, None, f"{type(exc).__name__}: {exc}"


def synthesize(job: SynthesisJob) -> SynthesisSummary:
    """Synthesize the full (clip x scenario x replica) grid of a job.

    Failed tasks are skipped with a structured stderr log; the manifest is
    assembled in deterministic task order after all workers finish.
    """
    clips = _read_clean_manifest(job.clean_manifest)
    scenarios = job.selected_scenarios()
    if not scenarios:
        raise ValueError("scenario selection is empty")

    needs_pool = any(_chain_needs_noise_pool(merge_chains(s)) for s in scenarios)
    if needs_pool:
        if job.noise_dir is None:
            raise ValueError("selected scenarios include additive noise; --noise-dir is required")
        NoisePool(job.noise_dir)  # validates non-empty

    output_dir = Path(job.output_dir)
    (output_dir / "wavs").mkdir(parents=True, exist_ok=True)
    manifest_dir = Path(job.clean_manifest).parent

    tasks = []
    for clip_index, (clip_path, transcript, language) in enumerate(clips):
        clip_abs = clip_path if Path(clip_path).is_absolute() else str(manifest_dir / clip_path)
        for scenario in scenarios:
            for replica in range(job.samples_per_clip):
                wav_name = f"{clip_index:05d}__{scenario.id}__{replica:02d}.wav"
                tasks.append(
                    _Task(
                        index=len(tasks),
                        clip_path=clip_path,
                        clip_abs=clip_abs,
                        transcript=transcript,
                        language=language,
                        scenario_id=scenario.id,
                        replica=replica,
                        wav_name=wav_name,
                        output_dir=str(output_dir),
                        noise_dir=job.noise_dir,
                        profile=job.profile,
                        sample_rate=job.sample_rate,
                        prompt=job.prompt,
                    )
                )

    if job.worker_count == 1:
        results = [_run_task(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=job.worker_count) as pool:
            results = list(pool.map(_run_task, tasks, chunksize=4))

    results.sort(key=lambda r: r[0])
    per_scenario: dict = {}
    errors = []
    lines = []
    for (index, line, error), task in zip(results, tasks):
        if error is not None:
            errors.append({"task": index, "clip": task.clip_path, "scenario": task.scenario_id, "error": error})
            log_event(event="task_failed", **errors[-1])
            continue
        lines.append(line)
        per_scenario[task.scenario_id] = per_scenario.get(task.scenario_id, 0) + 1

    manifest_path = output_dir / "manifest.jsonl"
    with open(manifest_path, "w", encoding="utf-8") as handle:
        for line in lines:
            handle.write(line + "\n")

    summary = SynthesisSummary(len(lines), per_scenario, len(errors), errors)
    log_event(
        event="synthesis_done",
        records=summary.records_written,
        skipped=summary.skipped,
        manifest=str(manifest_path),
    )
    return summary


def degrade_one(
    input_wav: str | Path,
    scenario_id: str,
    output_wav: str | Path,
    *,
    seed: int = 0,
    severity: float | None = None,
    latent: float | None = None,
    mapping: str = "linear",
    sigma: float = 0.25,
    noise_dir: str | None = None,
    sample_rate: int = CANONICAL_RATE,
) -> ResolvedChain:
    """One-shot degradation of a single file; returns the resolved chain.

    Severity comes from an explicit m, an explicit latent x, or the
    seeded stream, in that precedence order. Deterministic per invocation.
    """
    scenario = scenario_by_id(scenario_id)
    merged = merge_chains(scenario)
    profile = SeverityProfile(mapping=mapping, sigma=sigma, seed=seed)
    sample_id = derive_key(0, "degrade", scenario_id)
    if severity is not None:
        sample_key = derive_key(profile.seed, sample_id)
        resolved = resolve_chain(merged, severity, latent, sample_key)
    elif latent is not None:
        sample_key = derive_key(profile.seed, sample_id)
        resolved = resolve_chain(merged, map_severity(profile, latent), latent, sample_key)
    else:
        resolved = instantiate_chain(merged, profile, sample_id)

    clip = _load_resampled(str(input_wav), sample_rate)
    pool = NoisePool(noise_dir) if noise_dir else None
    out, _ = apply_resolved_chain(clip, resolved, pool)
    save_wav(out, output_wav)
    return resolved


def score_pairs(rows, cfg: RewardConfig, forced_mode: str | None = None) -> tuple:
    """Score {hypothesis, reference, language} rows.

    Returns (breakdown dicts in row order, row errors, aggregates).
    Failed rows are reported by index and skipped; aggregates cover the
    scored rows only.
    """
    outputs = []
    errors = []
    for index, row in enumerate(rows):
        try:
            hyp = row["hypothesis"]
            ref = row["reference"]
            mode = forced_mode or script_mode_for(row.get("language"), ref)
            breakdown = score(hyp, ref, cfg, mode)
            payload = dataclasses.asdict(breakdown)
            payload["script_mode"] = mode
            outputs.append(payload)
        except Exception as exc:  # noqa: BLE001 - keep scoring the rest
            errors.append({"row": index, "error": f"{type(exc).__name__}: {exc}"})
    if outputs:
        aggregates = {
            "rows_scored": len(outputs),
            "mean_wer": sum(o["wer"] for o in outputs) / len(outputs),
            "mean_r_total": sum(o["r_total"] for o in outputs) / len(outputs),
        }
    else:
        aggregates = {"rows_scored": 0, "mean_wer": None, "mean_r_total": None}
    return outputs, errors, aggregates


@dataclass
class FilterResult:
    kept: list  # raw lines, input order preserved
    dropped: int  # rows over the WER threshold
    rejected: list  # malformed rows, each {"row", "reason"}


def filter_manifest(path: str | Path, max_wer: float = 0.7) -> FilterResult:
    """Keep manifest rows whose base_wer <= max_wer ("above" is strict).

    Rows over the threshold are dropped; rows without base_wer or with
    unparsable JSON are rejected with a reason.
    """
    kept = []
    dropped = 0
    rejected = []
    with open(path, encoding="utf-8") as handle:
        for index, line in enumerate(handle):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as exc:
                rejected.append({"row": index, "reason": f"invalid JSON: {exc}"})
                continue
            base_wer = payload.get("base_wer")
            if base_wer is None:
                rejected.append({"row": index, "reason": "missing base_wer"})
                continue
            if base_wer <= max_wer:
                kept.append(line)
            else:
                dropped += 1
    return FilterResult(kept, dropped, rejected)
