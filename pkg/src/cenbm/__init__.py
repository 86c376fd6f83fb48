"""Centroid Banach-Mazur distance of planar convex polygons.

Inscribed affine-regular hexagons, the constructive 69/17 witness, numerical
certification of the bound, and upper-bound estimation of the distance.
"""

from .certify import BoundReport, certify_g_max_on_Q, g_value, maximize_f_on_domain
from .errors import (
    CertificationError,
    ConvergenceError,
    DegenerateInputError,
    DomainError,
    LemmaViolation,
    ProofViolation,
)
from .estimate import (
    EstimateResult,
    EstimatorConfig,
    estimate,
    estimate_cen,
    estimate_extended,
    pentagon_triangle_witness,
)
from .geometry import (
    AffineMap,
    ConvexPolygon,
    Segment,
    apply,
    area,
    boundary_distance,
    centroid,
    chord_at,
    compose,
    contains_point,
    contains_polygon,
    invert,
    radial_distance,
    random_convex_polygon,
    regular_polygon,
    scale_about,
)
from .hexagon import (
    AffineRegularHexagon,
    Star,
    check_centroid_lemma,
    inscribe_hexagon,
    inscribe_hexagon_report,
    star_over,
)
from .normalize import NormalizedBody, normalize, reduce_to_T, tau
from .witness import BOUND, ConstructionTrace, Witness, construct, f_ratio, tighten, trace_points, verify_witness

__version__ = "0.1.0"
