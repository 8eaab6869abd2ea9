"""Zero-patterns of orthogonal, unitary and hyperunitary matrices.

Library for constructing, verifying and numerically probing zero-patterns
over the rationals, reals, complexes and quaternions: the rigid 7x7
quadratic-residue core, the gadget expansion that turns equal-magnitude
constraints into pure patterns, seed patterns with witnesses and exact
obstructions, and a multi-start solver for orthogonal representations.
"""

from .scalars import Field, RepMatrix, Scalar, inner_product
from .patterns import (
    ConstrainedZeroPattern,
    Democracy,
    ZeroPattern,
    bipartite_double,
    democracy_satisfied,
    democracy_spread,
    hermitian_double,
    matches_pattern,
    mutual_support,
    parse_pattern,
    pattern_of_matrix,
    serialize_pattern,
)
from .fano import (
    NormalizationTrace,
    canonical_matrix,
    column_democracies,
    fano_matrix,
    fano_pattern,
    normalize_to_canonical,
    rigidity_probe,
)
from .solver import (
    SolveOptions,
    SolveReport,
    VerifyTols,
    complete_to_square,
    find_representation,
    verify_witness,
)
from .gadget import (
    FixupMode,
    GadgetExpansion,
    GadgetPolicy,
    certify_expansion,
    completion_warm_start,
    expand,
    expand_one,
)
from .separators import (
    SeparationCase,
    TARGET_DIMENSIONS,
    build_separation,
    check_complex_obstruction,
    check_real_obstruction,
    rational_magnitude_note,
    seed_pattern,
    seed_witness,
)

__version__ = "0.1.0"

__all__ = [
    "Field",
    "RepMatrix",
    "Scalar",
    "inner_product",
    "ConstrainedZeroPattern",
    "Democracy",
    "ZeroPattern",
    "bipartite_double",
    "democracy_satisfied",
    "democracy_spread",
    "hermitian_double",
    "matches_pattern",
    "mutual_support",
    "parse_pattern",
    "pattern_of_matrix",
    "serialize_pattern",
    "NormalizationTrace",
    "canonical_matrix",
    "column_democracies",
    "fano_matrix",
    "fano_pattern",
    "normalize_to_canonical",
    "rigidity_probe",
    "SolveOptions",
    "SolveReport",
    "VerifyTols",
    "complete_to_square",
    "find_representation",
    "verify_witness",
    "FixupMode",
    "GadgetExpansion",
    "GadgetPolicy",
    "certify_expansion",
    "completion_warm_start",
    "expand",
    "expand_one",
    "SeparationCase",
    "TARGET_DIMENSIONS",
    "build_separation",
    "check_complex_obstruction",
    "check_real_obstruction",
    "rational_magnitude_note",
    "seed_pattern",
    "seed_witness",
    "__version__",
]
