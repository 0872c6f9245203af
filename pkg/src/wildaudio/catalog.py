"""Atomic effect chains, the 54-scenario catalog, and chain merging.

Seven atomic acoustic conditions are each encoded as an ordered chain of
primitive effects with their parameter ranges. Three of them (far_field,
echo_reverb, obstructed) are scene-defining anchors that never co-occur;
the other four (recording, electronic_distortion, noise,
transmission_dropout) are portable modifiers. Compound scenarios compose
one optional anchor with modifiers; merging their chains drops
cross-scene duplicate primitives except additive noise, which may appear
once per contributing source.

The parameter tables live here as constant data on purpose: they define
the synthesized corpus, and loading them from editable files would let
the dataset drift silently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import NamedTuple

__all__ = [
    "ParamRange",
    "EffectSpec",
    "AtomicEffect",
    "ScenarioSpec",
    "MergedChain",
    "ANCHORS",
    "MODIFIERS",
    "ATOMIC_NAMES",
    "PRIMITIVE_NAMES",
    "INTEGER_PARAMS",
    "DUPLICATE_ALLOWED",
    "atomic_chain",
    "enumerate_scenarios",
    "scenario_by_id",
    "merge_chains",
]

PRIMITIVE_NAMES = frozenset(
    {
        "add_noise",
        "add_echo",
        "add_reverb",
        "add_distortion",
        "add_resample",
        "apply_filter",
        "change_volume",
        "change_volume_distortion",
        "add_stutter_replace",
    }
)

ANCHORS = ("far_field", "echo_reverb", "obstructed")
MODIFIERS = ("recording", "electronic_distortion", "noise", "transmission_dropout")
ATOMIC_NAMES = (
    "noise",
    "far_field",
    "obstructed",
    "echo_reverb",
    "recording",
    "electronic_distortion",
    "transmission_dropout",
)

# Parameters resolved to integers (rounded to nearest after severity mapping).
INTEGER_PARAMS = frozenset({"repeat", "max_repeats"})

# Primitives that survive cross-scene deduplication when chains merge.
DUPLICATE_ALLOWED = frozenset({"add_noise"})

INCREASING = "increasing"
DECREASING = "decreasing"


class ParamRange(NamedTuple):
    """Sampled range with the direction in which samples get harder."""

    low: float
    high: float
    harder: str


@dataclass(frozen=True)
class EffectSpec:
    """One primitive effect instance inside an atomic chain."""

    primitive_name: str
    fixed_params: dict = field(default_factory=dict)
    sampled_params: dict = field(default_factory=dict)
    choice_params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.primitive_name not in PRIMITIVE_NAMES:
            raise ValueError(f"unknown primitive {self.primitive_name!r}")
        overlap = set(self.fixed_params) & set(self.sampled_params)
        if overlap:
            raise ValueError(f"params both fixed and sampled: {sorted(overlap)}")
        for name, rng in self.sampled_params.items():
            if rng.low > rng.high:
                raise ValueError(f"{name}: low {rng.low} > high {rng.high}")
            if rng.harder not in (INCREASING, DECREASING):
                raise ValueError(f"{name}: bad direction {rng.harder!r}")


@dataclass(frozen=True)
class AtomicEffect:
    """A named ordered chain of primitives modelling one real condition."""

    name: str
    chain: tuple
    kind: str  # "anchor" or "modifier"


@dataclass(frozen=True)
class ScenarioSpec:
    """A compound scenario: up to one anchor plus distinct modifiers."""

    id: str
    atomic_effects: tuple
    arity: int
    group: str


@dataclass(frozen=True)
class MergedChain:
    """Ordered primitive chain after cross-scene deduplication."""

    chain: tuple


def _spec(name, fixed=None, sampled=None, choices=None) -> EffectSpec:
    return EffectSpec(name, dict(fixed or {}), dict(sampled or {}), dict(choices or {}))


_ATOMIC_CHAINS = {
    "noise": AtomicEffect(
        "noise",
        (
            _spec(
                "add_noise",
                fixed={"noise_category": "filtered_wavs", "wet": 1.0},
                sampled={"noise_db": ParamRange(-5.0, 10.0, DECREASING)},
            ),
            _spec("change_volume", fixed={"target_lufs": -23.0}),
        ),
        "modifier",
    ),
    "far_field": AtomicEffect(
        "far_field",
        (
            _spec(
                "add_reverb",
                fixed={"dry_level": 0.5},
                sampled={
                    "room_size": ParamRange(0.4, 0.6, INCREASING),
                    "damping": ParamRange(0.6, 0.8, INCREASING),
                    "wet_level": ParamRange(0.4, 0.5, INCREASING),
                },
            ),
            _spec(
                "apply_filter",
                fixed={"filter_type": "lowpass", "repeat": 3, "wet": 1.0},
                sampled={"cutoff_hz": ParamRange(3500.0, 4500.0, DECREASING)},
            ),
            _spec(
                "change_volume",
                sampled={"target_lufs": ParamRange(-38.0, -27.0, DECREASING)},
            ),
        ),
        "anchor",
    ),
    "obstructed": AtomicEffect(
        "obstructed",
        (
            _spec(
                "apply_filter",
                fixed={"filter_type": "lowpass", "wet": 0.9},
                sampled={
                    "cutoff_hz": ParamRange(1500.0, 2000.0, DECREASING),
                    "repeat": ParamRange(2, 4, INCREASING),
                },
            ),
            _spec(
                "add_reverb",
                fixed={"room_size": 0.4, "damping": 0.9, "dry_level": 0.4},
                sampled={"wet_level": ParamRange(0.5, 0.7, INCREASING)},
            ),
            _spec(
                "change_volume",
                sampled={"target_lufs": ParamRange(-25.0, -15.0, DECREASING)},
            ),
        ),
        "anchor",
    ),
    "echo_reverb": AtomicEffect(
        "echo_reverb",
        (
            _spec(
                "add_reverb",
                fixed={"damping": 0.5, "dry_level": 0.4},
                sampled={
                    "room_size": ParamRange(0.8, 0.95, INCREASING),
                    "wet_level": ParamRange(0.6, 0.8, INCREASING),
                },
            ),
            _spec(
                "apply_filter",
                fixed={"filter_type": "highpass", "repeat": 1, "wet": 1.0},
                sampled={"cutoff_hz": ParamRange(100.0, 300.0, INCREASING)},
            ),
            _spec(
                "add_echo",
                sampled={
                    "delay_seconds": ParamRange(0.1, 0.3, INCREASING),
                    "feedback": ParamRange(0.3, 0.5, INCREASING),
                    "mix": ParamRange(0.2, 0.3, INCREASING),
                },
            ),
            _spec(
                "change_volume",
                sampled={"target_lufs": ParamRange(-30.0, -23.0, DECREASING)},
            ),
        ),
        "anchor",
    ),
    "recording": AtomicEffect(
        "recording",
        (
            _spec(
                "add_resample",
                fixed={"target_sr": 8000, "wet": 1.0, "threshold": 0.4},
                sampled={"prob": ParamRange(0.0, 1.0, INCREASING)},
            ),
            _spec(
                "add_noise",
                fixed={"use_white_noise": True, "wet": 1.0},
                sampled={"noise_db": ParamRange(-5.0, 10.0, DECREASING)},
            ),
            _spec(
                "apply_filter",
                fixed={"filter_type": "highpass", "wet": 1.0},
                sampled={
                    "cutoff_hz": ParamRange(400.0, 600.0, INCREASING),
                    "repeat": ParamRange(4, 6, INCREASING),
                },
            ),
            _spec(
                "apply_filter",
                fixed={"filter_type": "lowpass", "wet": 1.0},
                sampled={
                    "cutoff_hz": ParamRange(3500.0, 4500.0, DECREASING),
                    "repeat": ParamRange(4, 6, INCREASING),
                },
            ),
            _spec("change_volume", fixed={"target_lufs": -23.0}),
        ),
        "modifier",
    ),
    "electronic_distortion": AtomicEffect(
        "electronic_distortion",
        (
            _spec(
                "add_distortion",
                fixed={"wet": 1.0},
                sampled={"drive_db": ParamRange(20.0, 60.0, INCREASING)},
            ),
            _spec(
                "apply_filter",
                fixed={"filter_type": "lowpass", "repeat": 1, "wet": 1.0},
                sampled={"cutoff_hz": ParamRange(2800.0, 6000.0, DECREASING)},
            ),
            _spec(
                "change_volume_distortion",
                sampled={"target_lufs": ParamRange(-38.0, -27.0, DECREASING)},
            ),
        ),
        "modifier",
    ),
    "transmission_dropout": AtomicEffect(
        "transmission_dropout",
        (
            _spec(
                "add_stutter_replace",
                fixed={"repeat_prob": 0.7, "frame_ms": 20},
                sampled={
                    "stutter_prob": ParamRange(0.05, 0.3, INCREASING),
                    "max_repeats": ParamRange(2, 4, INCREASING),
                },
            ),
            _spec("change_volume", fixed={"target_lufs": -23.0}),
        ),
        "modifier",
    ),
}

# Modifier pairs used for anchor-based three-effect scenarios: noise is the
# most pervasive co-occurring degradation, so each pair includes it.
SELECTED_MODIFIER_PAIRS = (
    ("noise", "recording"),
    ("noise", "electronic_distortion"),
    ("noise", "transmission_dropout"),
)


def atomic_chain(name: str) -> AtomicEffect:
    """Look up one atomic effect's ordered chain and parameter ranges."""
    try:
        return _ATOMIC_CHAINS[name]
    except KeyError:
        raise ValueError(f"unknown atomic effect {name!r}; valid: {ATOMIC_NAMES}") from None


def _make_scenario(constituents, group) -> ScenarioSpec:
    anchors = [c for c in constituents if c in ANCHORS]
    modifiers = sorted(c for c in constituents if c not in ANCHORS)
    ordered = tuple(anchors + modifiers)  # anchor first, modifiers sorted
    return ScenarioSpec("+".join(ordered), ordered, len(ordered), group)


def enumerate_scenarios() -> list:
    """The canonical 54 scenarios, grouped 7 / 18 / 13 / 16, stable order."""
    scenarios = []
    for name in ATOMIC_NAMES:
        scenarios.append(_make_scenario((name,), "single"))
    for anchor in ANCHORS:
        for mod in MODIFIERS:
            scenarios.append(_make_scenario((anchor, mod), "two_effect"))
    for pair in combinations(MODIFIERS, 2):
        scenarios.append(_make_scenario(pair, "two_effect"))
    for anchor in ANCHORS:
        for pair in SELECTED_MODIFIER_PAIRS:
            scenarios.append(_make_scenario((anchor,) + pair, "three_effect"))
    for triple in combinations(MODIFIERS, 3):
        scenarios.append(_make_scenario(triple, "three_effect"))
    for anchor in ANCHORS:
        for triple in combinations(MODIFIERS, 3):
            scenarios.append(_make_scenario((anchor,) + triple, "higher_order"))
    scenarios.append(_make_scenario(MODIFIERS, "higher_order"))
    for anchor in ANCHORS:
        scenarios.append(_make_scenario((anchor,) + MODIFIERS, "higher_order"))
    return scenarios


def scenario_by_id(scenario_id: str) -> ScenarioSpec:
    """Resolve a scenario id, raising with the full valid list otherwise."""
    catalog = {s.id: s for s in enumerate_scenarios()}
    try:
        return catalog[scenario_id]
    except KeyError:
        valid = ", ".join(sorted(catalog))
        raise ValueError(f"unknown scenario {scenario_id!r}; valid ids: {valid}") from None


def merge_chains(s: ScenarioSpec) -> MergedChain:
    """Merge the scenario's atomic chains into one primitive chain.

    Atomic effects are visited in the scenario's order. Within each, a
    primitive is appended if it is duplicate-allowed (add_noise) or if its
    name was not seen in any previous atomic effect; names seen within the
    current atomic effect do not block, which preserves within-scene
    repeats such as the recording chain's two filters. After each atomic
    effect its newly seen names join the seen-set.
    """
    merged = []
    seen_previous = set()
    for atomic_name in s.atomic_effects:
        chain = atomic_chain(atomic_name).chain
        seen_current = set()
        for effect in chain:
            if effect.primitive_name in DUPLICATE_ALLOWED:
                merged.append(effect)
            elif effect.primitive_name not in seen_previous:
                merged.append(effect)
                seen_current.add(effect.primitive_name)
            # else: cross-scene duplicate, dropped
        seen_previous |= seen_current
    return MergedChain(tuple(merged))
