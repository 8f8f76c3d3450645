"""Exact truncated power series, Milnor invariants and splitting-lemma normal forms."""

from .errors import (
    ContractViolation,
    CritforgeError,
    DegenerateForm,
    NonIsolatedError,
    NotRelativelyMorse,
    ResourceLimit,
)
from .expr import ParseError, parse_expr, parse_series, to_text
from .isotopy import (
    FamilyCoordChange,
    FamilySeries,
    MatrixFamily,
    TPoly,
    matrix_family_det,
    verify_isotopy,
)
from .linalg import JetBasis, RatMatrix, jet_span_dim, kernel, rank, rref, solve_linear
from .milnor import (
    LGPair,
    MilnorReport,
    behrend_value,
    euler_char_milnor_fiber,
    koszul_h0,
    milnor_number,
    tangent_complex_dims,
    tjurina_number,
)
from .morse import HessianData, SplitResult, hessian, minimal_model, relative_morse, split
from .quadform import (
    GWClass,
    QuadForm,
    diagonalize,
    direct_sum,
    gw_class,
    isotropic_split_check,
    orientation_twist,
)
from .series import (
    CoordChange,
    Series,
    add,
    compose,
    implicit_solve,
    invert_coordchange,
    mul,
    nth_root,
    partial,
)
from .stability import (
    StableInvariants,
    Verdict,
    stabilize,
    stable_compare,
    stable_invariants,
    ts_sum,
    verify_stable_witness,
)

__version__ = "0.1.0"
