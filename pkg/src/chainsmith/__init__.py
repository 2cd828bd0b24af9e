"""Parameter setting, decoding and sweep analysis for embedded Ising problems."""

from .annealer import BackendConfig, SampleSet, SaSchedule, exact_ground_states, sample, sample_sa
from .chimera import ChimeraSpec, build_chimera, greedy_embed
from .decode import decode_concert, decode_majority, decode_single, decode_weighted_majority
from .metrics import mpd
from .paramset import ParamConfig, StrategyKind, WeightTable, apply_srt, compute_weights, parameterize, srt_set
from .problem import (
    Embedding,
    HardwareGraph,
    LogicalProblem,
    PhysicalProblem,
    energy,
    rescale_to_hardware,
    validate_embedding,
)
from .sat import CnfFormula, count_solutions, emit_dimacs, generate_mixed_sat, parse_dimacs, sat_to_ising

__version__ = "0.1.0"

__all__ = [
    "BackendConfig",
    "CnfFormula",
    "ChimeraSpec",
    "Embedding",
    "HardwareGraph",
    "LogicalProblem",
    "ParamConfig",
    "PhysicalProblem",
    "SampleSet",
    "SaSchedule",
    "StrategyKind",
    "WeightTable",
    "apply_srt",
    "build_chimera",
    "compute_weights",
    "count_solutions",
    "decode_concert",
    "decode_majority",
    "decode_single",
    "decode_weighted_majority",
    "emit_dimacs",
    "energy",
    "exact_ground_states",
    "generate_mixed_sat",
    "greedy_embed",
    "mpd",
    "parameterize",
    "parse_dimacs",
    "rescale_to_hardware",
    "sample",
    "sample_sa",
    "sat_to_ising",
    "srt_set",
    "validate_embedding",
]
