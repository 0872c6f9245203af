"""wildaudio: compositional speech degradation synthesis and reward scoring.

Builds physically plausible compound acoustic scenarios out of primitive
DSP effects, renders them onto clean speech at a controllable global
severity, and scores ASR hypothesis/reference pairs with WER-gated
dual-granularity rewards.
"""

from .catalog import (
    ANCHORS,
    MODIFIERS,
    AtomicEffect,
    EffectSpec,
    MergedChain,
    ScenarioSpec,
    atomic_chain,
    enumerate_scenarios,
    merge_chains,
    scenario_by_id,
)
from .effects import (
    DistortionParams,
    EchoParams,
    FilterParams,
    LoudnessParams,
    NoiseParams,
    ResampleParams,
    ReverbParams,
    StutterParams,
    add_distortion,
    add_echo,
    add_noise,
    add_resample,
    add_reverb,
    add_stutter_replace,
    apply_filter,
    change_volume,
    change_volume_distortion,
)
from .loudness import measure_integrated_loudness
from .manifest import ManifestRecord, read_jsonl, write_jsonl
from .pipeline import (
    CANONICAL_RATE,
    NoisePool,
    SynthesisJob,
    apply_resolved_chain,
    degrade_one,
    filter_manifest,
    score_pairs,
    synthesize,
)
from .rewards import (
    AlignmentResult,
    RewardBreakdown,
    RewardConfig,
    align,
    compute_wer,
    normalize_text,
    r_dynamic,
    r_fine,
    r_rep,
    r_struc,
    score,
    token_similarity,
)
from .severity import (
    ResolvedChain,
    SeverityProfile,
    instantiate_chain,
    map_severity,
    resolve_choice,
    resolve_param,
)
from .waveform import Waveform, load_wav, measure_rms, resample_to, save_wav

__version__ = "0.1.0"
