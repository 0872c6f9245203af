"""Global severity sampling and parameter resolution.

Each synthesized sample draws one latent x ~ U(0,1) from a per-sample
hash substream, maps it to a severity m in [0,1] through one of four
difficulty mappings, and resolves every sampled parameter of the merged
chain from that single shared m. Sharing m keeps a hard sample hard
across all of its active effects instead of mixing arbitrary strengths.

Substreams are keyed by hashing (seed, sample_id, domain), so resolution
is a pure function of those values and independent of worker count or
call order.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .catalog import INTEGER_PARAMS, MergedChain

__all__ = [
    "MAPPING_NAMES",
    "SeverityProfile",
    "ResolvedChain",
    "map_severity",
    "resolve_param",
    "resolve_choice",
    "resolve_chain",
    "instantiate_chain",
    "derive_key",
    "substream",
]

MAPPING_NAMES = ("linear", "sqrt_forward", "sqrt_backward", "gaussian_mid")


@dataclass(frozen=True)
class SeverityProfile:
    """Difficulty mapping choice plus the corpus-level seed."""

    mapping: str = "linear"
    sigma: float = 0.25  # gaussian_mid spread; ~[0.09, 0.91] pre-clip
    seed: int = 0

    def __post_init__(self) -> None:
        if self.mapping not in MAPPING_NAMES:
            raise ValueError(f"mapping must be one of {MAPPING_NAMES}, got {self.mapping!r}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class ResolvedChain:
    """A merged chain with every parameter made concrete.

    ``sample_key`` is the per-sample hash key; effect application derives
    any further randomness (stutter events, noise clip choice) from it via
    :func:`substream` with a domain separator.
    """

    chain: tuple
    severity: float
    latent: float
    sample_key: int


def map_severity(profile: SeverityProfile, x: float) -> float:
    """Map a uniform latent x in [0,1] to the severity m in [0,1]."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"latent x must be in [0, 1], got {x}")
    if profile.mapping == "linear":
        return x
    if profile.mapping == "sqrt_forward":
        return math.sqrt(x)
    if profile.mapping == "sqrt_backward":
        return x * x
    # gaussian_mid: inverse normal CDF of 0.05 + 0.9x around 0.5, clipped.
    value = norm.ppf(0.05 + 0.9 * x, loc=0.5, scale=profile.sigma)
    return float(min(1.0, max(0.0, value)))


def resolve_param(bounds: tuple, direction: str, m: float, *, integer: bool = False):
    """Resolve a sampled range at severity m.

    increasing: a + (b-a)m (larger is harder); decreasing: b - (b-a)m.
    Endpoints m in {0, 1} hit the interval bounds exactly; integer-typed
    parameters are rounded to nearest afterwards.
    """
    a, b = bounds
    if a > b:
        raise ValueError(f"invalid range ({a}, {b})")
    if not 0.0 <= m <= 1.0:
        raise ValueError(f"severity m must be in [0, 1], got {m}")
    if direction == "increasing":
        value = b if m == 1.0 else a + (b - a) * m
    elif direction == "decreasing":
        value = a if m == 1.0 else b - (b - a) * m
    else:
        raise ValueError(f"unknown direction {direction!r}")
    if integer:
        return int(math.floor(value + 0.5))
    return value


def resolve_choice(options, m: float):
    """Pick from an easiest-to-hardest ordered list at severity m."""
    if len(options) == 0:
        raise ValueError("cannot choose from an empty option list")
    if not 0.0 <= m <= 1.0:
        raise ValueError(f"severity m must be in [0, 1], got {m}")
    index = min(int(math.floor(m * len(options))), len(options) - 1)
    return options[index]


def derive_key(seed: int, *parts) -> int:
    """Stable 64-bit key from a seed and arbitrary int/str parts."""
    h = hashlib.blake2b(digest_size=8)
    for part in (seed, *parts):
        h.update(str(part).encode("utf-8"))
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "little")


def substream(key: int, *parts) -> np.random.Generator:
    """Independent generator for one domain of a sample's randomness."""
    return np.random.default_rng(derive_key(key, *parts))


def resolve_chain(merged: MergedChain, m: float, latent, sample_key: int) -> ResolvedChain:
    """Resolve every sampled and choice parameter at one shared severity."""
    chain = []
    for effect in merged.chain:
        params = dict(effect.fixed_params)
        for name, prange in effect.sampled_params.items():
            params[name] = resolve_param(
                (prange.low, prange.high), prange.harder, m, integer=name in INTEGER_PARAMS
            )
        for name, options in effect.choice_params.items():
            params[name] = resolve_choice(options, m)
        chain.append((effect.primitive_name, params))
    return ResolvedChain(tuple(chain), m, latent, sample_key)


def instantiate_chain(merged: MergedChain, profile: SeverityProfile, sample_id: int) -> ResolvedChain:
    """Resolve every parameter of a merged chain for one sample.

    Draws the latent from the (seed, sample_id) substream, computes m
    once, and applies it to every sampled range and choice list in chain
    order. Pure function: identical inputs give identical output.
    """
    sample_key = derive_key(profile.seed, sample_id)
    x = float(substream(sample_key, "severity").random())
    m = map_severity(profile, x)
    return resolve_chain(merged, m, x, sample_key)
