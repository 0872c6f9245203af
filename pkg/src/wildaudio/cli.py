"""Command-line interface: synthesize, degrade, score, filter, enumerate-scenarios.

Exit codes: 0 on success, 1 when some rows or tasks failed, 2 for
invalid invocations. Structured logs go to stderr; data to stdout or the
requested output files.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .catalog import enumerate_scenarios
from .pipeline import (
    CANONICAL_RATE,
    DEFAULT_PROMPT,
    SynthesisJob,
    degrade_one,
    filter_manifest,
    log_event,
    score_pairs,
    synthesize as run_synthesis,
)
from .rewards import RewardConfig
from .severity import SeverityProfile

_MAPPING_FLAGS = {
    "linear": "linear",
    "sqrt-forward": "sqrt_forward",
    "sqrt-backward": "sqrt_backward",
    "gaussian-mid": "gaussian_mid",
}

_mapping_option = click.option(
    "--mapping",
    type=click.Choice(sorted(_MAPPING_FLAGS)),
    default="linear",
    show_default=True,
    help="Difficulty mapping from the uniform latent to severity.",
)
_sigma_option = click.option(
    "--sigma", type=float, default=0.25, show_default=True, help="gaussian-mid spread."
)


@click.group()
def main() -> None:
    """Compositional speech degradation synthesis and reward scoring."""


@main.command()
@click.option("--clean-manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--output-dir", required=True, type=click.Path(file_okay=False))
@click.option("--noise-dir", type=click.Path(exists=True, file_okay=False))
@click.option("--scenarios", default="all", show_default=True, help="'all' or comma-joined scenario ids.")
@click.option("--arity", type=click.IntRange(1, 5), help="Keep only scenarios of this arity.")
@click.option("--samples-per-clip", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@_mapping_option
@_sigma_option
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--prompt", default=DEFAULT_PROMPT, show_default=True)
@click.option("--rate", type=int, default=CANONICAL_RATE, show_default=True, help="Canonical processing rate.")
def synthesize(clean_manifest, output_dir, noise_dir, scenarios, arity, samples_per_clip, seed, mapping, sigma, workers, prompt, rate):
    """Synthesize degraded WAVs plus a JSONL manifest for a clean corpus."""
    scenario_ids = None
    if scenarios != "all":
        scenario_ids = tuple(s.strip() for s in scenarios.split(",") if s.strip())
    profile = SeverityProfile(mapping=_MAPPING_FLAGS[mapping], sigma=sigma, seed=seed)
    job = SynthesisJob(
        clean_manifest=clean_manifest,
        output_dir=output_dir,
        noise_dir=noise_dir,
        scenario_ids=scenario_ids,
        arity=arity,
        profile=profile,
        samples_per_clip=samples_per_clip,
        worker_count=workers,
        sample_rate=rate,
        prompt=prompt,
    )
    try:
        summary = run_synthesis(job)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    click.echo(
        json.dumps(
            {
                "records_written": summary.records_written,
                "skipped": summary.skipped,
                "per_scenario": summary.per_scenario,
            },
            sort_keys=True,
        )
    )
    if summary.skipped:
        sys.exit(1)


@main.command()
@click.argument("input_wav", type=click.Path(exists=True, dir_okay=False))
@click.option("--scenario", "scenario_id", required=True, help="Scenario id, e.g. far_field+noise.")
@click.option("--output", "-o", required=True, type=click.Path(dir_okay=False))
@click.option("--severity", type=click.FloatRange(0.0, 1.0), help="Override severity m directly.")
@click.option("--latent", type=click.FloatRange(0.0, 1.0), help="Override the latent x.")
@click.option("--seed", type=int, default=0, show_default=True)
@_mapping_option
@_sigma_option
@click.option("--noise-dir", type=click.Path(exists=True, file_okay=False))
@click.option("--rate", type=int, default=CANONICAL_RATE, show_default=True)
def degrade(input_wav, scenario_id, output, severity, latent, seed, mapping, sigma, noise_dir, rate):
    """Degrade one WAV with one scenario and print the resolved chain."""
    try:
        resolved = degrade_one(
            input_wav,
            scenario_id,
            output,
            seed=seed,
            severity=severity,
            latent=latent,
            mapping=_MAPPING_FLAGS[mapping],
            sigma=sigma,
            noise_dir=noise_dir,
            sample_rate=rate,
        )
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    click.echo(
        json.dumps(
            {
                "scenario_id": scenario_id,
                "severity": resolved.severity,
                "latent": resolved.latent,
                "chain": [[name, params] for name, params in resolved.chain],
                "output": output,
            },
            sort_keys=True,
        )
    )


@main.command()
@click.option("--pairs", required=True, type=click.Path(exists=True, dir_okay=False), help="JSONL of {hypothesis, reference, language}.")
@click.option("--output", "-o", type=click.Path(dir_okay=False), help="Breakdown JSONL; stdout when omitted.")
@click.option("--tau", type=float, default=0.3, show_default=True, help="WER gate threshold.")
@click.option("--alpha-s", type=float, default=0.4, show_default=True, help="Soft-error discount.")
@click.option("--alpha-dyn", type=float, default=0.6, show_default=True, help="Dynamic reward weight.")
@click.option(
    "--script-mode",
    type=click.Choice(["auto", "space-delimited", "character"]),
    default="auto",
    show_default=True,
)
def score(pairs, output, tau, alpha_s, alpha_dyn, script_mode):
    """Score hypothesis/reference pairs with the full reward breakdown."""
    rows = []
    with open(pairs, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    cfg = RewardConfig(tau=tau, alpha_s=alpha_s, alpha_dyn=alpha_dyn)
    forced = None if script_mode == "auto" else script_mode.replace("-", "_")
    outputs, errors, aggregates = score_pairs(rows, cfg, forced)
    lines = [json.dumps(o, ensure_ascii=False, sort_keys=True) for o in outputs]
    if output:
        Path(output).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    else:
        for line in lines:
            click.echo(line)
    for err in errors:
        log_event(event="score_row_failed", **err)
    log_event(event="score_done", **aggregates)
    if errors:
        sys.exit(1)


@main.command(name="filter")
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--max-wer", type=float, default=0.7, show_default=True, help="Keep rows with base_wer <= this.")
@click.option("--output", "-o", type=click.Path(dir_okay=False), help="Filtered JSONL; stdout when omitted.")
def filter_cmd(manifest, max_wer, output):
    """Learnability filter: drop rows whose base WER is above the bound."""
    result = filter_manifest(manifest, max_wer)
    if output:
        Path(output).write_text("".join(line + "\n" for line in result.kept), encoding="utf-8")
    else:
        for line in result.kept:
            click.echo(line)
    for rej in result.rejected:
        log_event(event="filter_row_rejected", **rej)
    log_event(event="filter_done", kept=len(result.kept), dropped=result.dropped, rejected=len(result.rejected))
    if result.rejected:
        sys.exit(1)


@main.command(name="enumerate-scenarios")
def enumerate_cmd():
    """Print the 54-scenario catalog as JSON lines."""
    for scenario in enumerate_scenarios():
        click.echo(
            json.dumps(
                {
                    "id": scenario.id,
                    "constituents": list(scenario.atomic_effects),
                    "arity": scenario.arity,
                    "group": scenario.group,
                },
                sort_keys=True,
            )
        )


if __name__ == "__main__":
    main()
