"""Fisher-Rao geometry of multivariate normal distributions.

Geodesics, distances, midpoints, and dyadic interpolation computed through
a symmetric-space lift: normal distributions embed into SPD matrices via
their natural parameters, geodesics arise as exponentials of horizontal
generators two orders up, midpoints from an arithmetic-harmonic mean
iteration, and the same factorization yields an isospectral (Toda-type)
Lax flow.
"""

from .matcore import (
    BlockDiag3,
    BlockUnitLower,
    EigenError,
    NotSpdError,
    block_cholesky,
    check_special_symmetry,
    spd_inv,
    spd_log,
    spd_sqrt,
    sym,
    sym_eigen,
    sym_exp,
)
from .manifold import (
    AffineMap,
    GaussianPoint,
    NaturalPoint,
    Tangent,
    alt_embed_check,
    embed,
    fisher_numeric,
    from_natural,
    metric_at_identity,
    normalize_to_identity,
    tangent_norm,
    to_natural,
    unembed,
)
from .sympair import (
    HorizontalGenerator,
    LieAlgebraElement,
    PointM,
    block_exchange,
    decompose_km,
    horizontal_lift,
    horizontal_vertical_split,
    submersion_differential,
    submersion_project,
)
from .geodesic import (
    GeodesicTrajectory,
    ShootingError,
    distance,
    exp_map,
    exp_map_from,
    first_integrals,
    geodesic_residual,
    log_map,
    trajectory,
)
from .ahm import AhmPair, ahm_midpoint, ahm_step, direct_midpoint, interpolate, midpoint_N
from .laxflow import LaxMatrices, LaxState, integrate, lax_closed_form, verify_lax

__version__ = "0.1.0"

__all__ = [
    "AffineMap",
    "AhmPair",
    "BlockDiag3",
    "BlockUnitLower",
    "EigenError",
    "GaussianPoint",
    "GeodesicTrajectory",
    "HorizontalGenerator",
    "LaxMatrices",
    "LaxState",
    "LieAlgebraElement",
    "NaturalPoint",
    "NotSpdError",
    "PointM",
    "ShootingError",
    "Tangent",
    "ahm_midpoint",
    "ahm_step",
    "alt_embed_check",
    "block_cholesky",
    "block_exchange",
    "check_special_symmetry",
    "decompose_km",
    "direct_midpoint",
    "distance",
    "embed",
    "exp_map",
    "exp_map_from",
    "first_integrals",
    "fisher_numeric",
    "from_natural",
    "geodesic_residual",
    "horizontal_lift",
    "horizontal_vertical_split",
    "integrate",
    "interpolate",
    "lax_closed_form",
    "log_map",
    "metric_at_identity",
    "midpoint_N",
    "normalize_to_identity",
    "spd_inv",
    "spd_log",
    "spd_sqrt",
    "submersion_differential",
    "submersion_project",
    "sym",
    "sym_eigen",
    "sym_exp",
    "tangent_norm",
    "to_natural",
    "trajectory",
    "unembed",
    "verify_lax",
]
