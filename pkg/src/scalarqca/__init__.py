"""Homogeneous scalar cellular automata: operators, unitarity checks and the no-go classifier."""

from .errors import ConsistencyError, InputError
from .lattice import (
    LatticeShape,
    Stencil,
    box_stencil,
    coord_of,
    lex_index,
    triangular_stencil,
    wrap,
)
from .operators import (
    EvolutionOperator,
    FieldState,
    RuleWeights,
    apply,
    bandwidth_K,
    build_operator,
    measured_bandwidth,
    size_condition,
    translation_operator,
)
from .unitarity import aliasing_free, displacement_set, global_check, local_conditions
from .nogo import AllZero, TranslationPhase, Violation, classify, elimination_trace

__all__ = [
    "AllZero",
    "ConsistencyError",
    "EvolutionOperator",
    "FieldState",
    "InputError",
    "LatticeShape",
    "RuleWeights",
    "Stencil",
    "TranslationPhase",
    "Violation",
    "aliasing_free",
    "apply",
    "bandwidth_K",
    "box_stencil",
    "build_operator",
    "classify",
    "coord_of",
    "displacement_set",
    "elimination_trace",
    "global_check",
    "lex_index",
    "local_conditions",
    "measured_bandwidth",
    "size_condition",
    "translation_operator",
    "triangular_stencil",
    "wrap",
]
