"""Acceptance gate: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v`` (add ``-s`` to see the
CRITERION lines inline). Tolerances are pinned here and nowhere else.
"""

import json
import random
import time
from collections import Counter

import numpy as np
import pytest
from conftest import attenuation_db, make_sine, make_speech_like

from test_pipeline import build_corpus, tree_digest

from wildaudio.catalog import (
    ANCHORS,
    DUPLICATE_ALLOWED,
    atomic_chain,
    enumerate_scenarios,
    merge_chains,
    scenario_by_id,
)
from wildaudio.effects import (
    FilterParams,
    LoudnessParams,
    NoiseParams,
    ResampleParams,
    StutterParams,
    add_noise,
    add_resample,
    add_stutter_replace,
    apply_filter,
    change_volume,
)
from wildaudio.loudness import measure_integrated_loudness
from wildaudio.pipeline import SynthesisJob, filter_manifest, synthesize
from wildaudio.rewards import (
    AlignmentResult,
    RewardConfig,
    align,
    lcs_length,
    r_dynamic,
    r_fine,
    r_struc,
    score,
)
from wildaudio.severity import SeverityProfile, map_severity, resolve_param
from wildaudio.waveform import Waveform, measure_rms

from test_rewards import lcs_oracle, levenshtein_oracle


def report(number: int, name: str) -> None:
    print(f"CRITERION {number} PASS: {name}")


def test_criterion_1_scenario_catalog():
    start = time.perf_counter()
    scenarios = enumerate_scenarios()
    assert len(scenarios) == 54
    counts = Counter(s.group for s in scenarios)
    assert counts["single"] == 7
    assert counts["two_effect"] == 18
    assert counts["three_effect"] == 13
    assert counts["higher_order"] == 16
    for s in scenarios:
        assert sum(1 for a in s.atomic_effects if a in ANCHORS) <= 1
    assert time.perf_counter() - start < 1.0
    report(1, "54 scenarios, groups 7/18/13/16, no two-anchor scenario, < 1 s")


def test_criterion_2_chain_merging():
    start = time.perf_counter()

    def names(chain):
        return [spec.primitive_name for spec in chain]

    merged = merge_chains(scenario_by_id("far_field+recording"))
    assert names(merged.chain) == [
        "add_reverb",
        "apply_filter",
        "change_volume",
        "add_resample",
        "add_noise",
    ]
    assert merged.chain[1].fixed_params["filter_type"] == "lowpass"
    assert merged.chain[1].sampled_params["cutoff_hz"].low == 3500.0  # far-field params survive

    merged = merge_chains(scenario_by_id("electronic_distortion+noise"))
    assert names(merged.chain) == [
        "add_distortion",
        "apply_filter",
        "change_volume_distortion",
        "add_noise",
        "change_volume",
    ]

    merged = merge_chains(scenario_by_id("recording"))
    assert names(merged.chain).count("apply_filter") == 2

    # Exhaustive scan over all 54: duplicate-allowed and dedup invariants.
    for s in enumerate_scenarios():
        merged = merge_chains(s)
        merged_names = names(merged.chain)
        contributors = sum(
            1 for a in s.atomic_effects if "add_noise" in names(atomic_chain(a).chain)
        )
        assert merged_names.count("add_noise") == contributors, s.id
        for name, count in Counter(merged_names).items():
            if name in DUPLICATE_ALLOWED:
                continue
            max_single = max(names(atomic_chain(a).chain).count(name) for a in s.atomic_effects)
            assert count <= max_single, (s.id, name)
        if s.arity == 1:
            assert merged.chain == atomic_chain(s.atomic_effects[0]).chain

    assert time.perf_counter() - start < 1.0
    report(2, "documented hand-traces and exhaustive 54-scenario merge invariants, < 1 s")


def test_criterion_3_reward_arithmetic():
    cfg = RewardConfig()
    fine = r_fine(AlignmentResult(8, (("dog", "cat"), ("map", "mat"), ("tody", "today")), 0, 0), cfg)
    assert abs(fine - 8 / 9.8) <= 1e-9

    struc = r_struc(("the", "cat", "sat"), ("the", "cat", "sat", "on", "the", "mat"))
    assert abs(struc - 0.5) <= 1e-9

    assert abs(r_dynamic(0.8, 0.4, 0.2, cfg) - 0.7) <= 1e-9
    assert abs(r_dynamic(0.8, 0.4, cfg.tau, cfg) - 0.5) <= 1e-9
    assert abs(r_dynamic(0.8, 0.4, 0.5, cfg) - 0.5) <= 1e-9

    perfect = score("six little words in this sentence", "six little words in this sentence", cfg)
    assert abs(perfect.r_total - 1.0) <= 1e-9
    report(3, "worked reward examples reproduce to 1e-9; perfect hypothesis totals 1")


def test_criterion_4_alignment_oracles():
    start = time.perf_counter()
    rng = random.Random(20240807)

    for _ in range(1000):
        hyp = tuple(rng.choice("abcde") for _ in range(rng.randint(0, 8)))
        ref = tuple(rng.choice("abcde") for _ in range(rng.randint(0, 8)))
        a = align(hyp, ref)
        assert len(a.substitutions) + a.n_insertions + a.n_deletions == levenshtein_oracle(hyp, ref)
        assert a.n_correct + len(a.substitutions) + a.n_deletions == len(ref)
        assert a.n_correct + len(a.substitutions) + a.n_insertions == len(hyp)

    for _ in range(1000):
        hyp = tuple(rng.choice("abc") for _ in range(rng.randint(0, 10)))
        ref = tuple(rng.choice("abc") for _ in range(rng.randint(0, 10)))
        assert lcs_length(hyp, ref) == lcs_oracle(hyp, ref)

    assert time.perf_counter() - start < 30.0
    report(4, "align and LCS match brute-force oracles on 1000+1000 instances, < 30 s")


def test_criterion_5_dsp_measurements():
    speech = make_speech_like(3.0)

    for target in (-30.0, -23.0, -18.0):
        out = change_volume(speech, LoudnessParams(target))
        measured = measure_integrated_loudness(out)
        assert measured == pytest.approx(target, abs=0.5)

    noise = Waveform(np.random.default_rng(5).standard_normal(len(speech)) * 0.1, 16000)
    for snr_db in (-5.0, 0.0, 10.0):
        out = add_noise(speech, NoiseParams(noise, snr_db, wet=1.0))
        added = Waveform(out.samples - speech.samples, 16000)
        realized = 20 * np.log10(measure_rms(speech) / measure_rms(added))
        assert realized == pytest.approx(snr_db, abs=0.5)

    cutoff = 2000.0
    tone = make_sine(2 * cutoff, 1.0, 16000, amp=0.8)
    filtered = apply_filter(tone, FilterParams("lowpass", cutoff, repeat=1, wet=1.0))
    assert attenuation_db(tone, filtered, 2 * cutoff) <= -10.0

    supra = make_sine(6000.0, 1.0, 16000, amp=0.9)
    round_tripped = add_resample(supra, ResampleParams(8000, wet=1.0, prob=1.0))
    assert attenuation_db(supra, round_tripped, 6000.0) <= -40.0

    params = StutterParams(frame_ms=20.0, stutter_prob=0.0, repeat_prob=0.7, max_repeats=4)
    identity = add_stutter_replace(speech, params, np.random.default_rng(0))
    np.testing.assert_array_equal(identity.samples, speech.samples)
    active = StutterParams(frame_ms=20.0, stutter_prob=0.5, repeat_prob=0.7, max_repeats=4)
    stuttered = add_stutter_replace(speech, active, np.random.default_rng(1))
    assert len(stuttered) == len(speech)

    report(5, "loudness +/-0.5 LU, SNR +/-0.5 dB, lowpass >=10 dB, resample >=40 dB, stutter exact")


def test_criterion_6_severity_engine():
    grid = np.linspace(0.0, 1.0, 1001)
    for mapping in ("linear", "sqrt_forward", "sqrt_backward", "gaussian_mid"):
        profile = SeverityProfile(mapping=mapping)
        values = [map_severity(profile, float(x)) for x in grid]
        assert all(b >= a for a, b in zip(values, values[1:])), mapping
        assert all(0.0 <= v <= 1.0 for v in values), mapping
        if mapping != "gaussian_mid":
            assert values[0] == 0.0 and values[-1] == 1.0

    assert map_severity(SeverityProfile(mapping="gaussian_mid"), 0.5) == pytest.approx(0.5, abs=1e-12)

    rng = np.random.default_rng(0)
    for _ in range(500):
        a, b = sorted(rng.uniform(-50, 50, 2))
        assert resolve_param((a, b), "increasing", 0.0) == a
        assert resolve_param((a, b), "increasing", 1.0) == b
        assert resolve_param((a, b), "decreasing", 0.0) == b
        assert resolve_param((a, b), "decreasing", 1.0) == a

    x = np.random.default_rng(99).random(50_000)
    deciles = np.arange(0.1, 0.91, 0.1)
    q_forward = np.quantile(np.sqrt(x), deciles)
    q_linear = np.quantile(x, deciles)
    q_backward = np.quantile(x * x, deciles)
    assert np.all(q_forward > q_linear) and np.all(q_linear > q_backward)

    report(6, "mappings monotone, endpoints exact, gaussian_mid(0.5)=0.5, dominance at deciles")


def test_criterion_7_end_to_end_determinism(tmp_path):
    start = time.perf_counter()
    manifest, noise_dir = build_corpus(tmp_path, n_clips=20, duration=0.8)
    scenario_ids = (
        "noise",
        "far_field",
        "recording",
        "echo_reverb+transmission_dropout",
        "obstructed+electronic_distortion+noise",
    )

    def run(out_name, workers):
        job = SynthesisJob(
            clean_manifest=str(manifest),
            output_dir=str(tmp_path / out_name),
            noise_dir=str(noise_dir),
            scenario_ids=scenario_ids,
            profile=SeverityProfile(seed=2024),
            worker_count=workers,
        )
        summary = synthesize(job)
        assert summary.records_written == 100
        assert summary.skipped == 0
        return tree_digest(tmp_path / out_name)

    first = run("run_a", workers=1)
    second = run("run_b", workers=1)
    eight = run("run_c", workers=8)
    assert first == second == eight

    elapsed = time.perf_counter() - start
    assert elapsed < 120.0
    report(7, f"20x5 synthesis byte-identical across reruns and workers 1/8 ({elapsed:.1f} s)")


def test_criterion_8_learnability_filter(tmp_path):
    manifest = tmp_path / "m.jsonl"
    rows = [
        {"audios": ["a.wav"], "solution": "x", "prediction": "x", "base_wer": 0.70},
        {"audios": ["b.wav"], "solution": "y", "prediction": "y", "base_wer": 0.71},
    ]
    manifest.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    result = filter_manifest(manifest, 0.7)
    kept_wers = [json.loads(line)["base_wer"] for line in result.kept]
    assert kept_wers == [0.70]
    assert result.dropped == 1
    report(8, "base_wer 0.70 kept, 0.71 dropped (above-70% is strict)")
