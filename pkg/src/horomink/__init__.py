"""Horospherically convex polytopes in hyperbolic space.

The package builds compact intersections of closed horoballs (horospherical
Wulff shapes), measures them (volume, facet areas, support numbers, Hausdorff
distance), and solves the even discrete horospherical p-Minkowski problem
with a residual certificate. A JSON/SVG command line front end lives in
horomink.cli.
"""

from .errors import (
    DegenerateBodyError,
    HoromkError,
    MismatchedDirectionsError,
    NotEvenError,
    PointInsideError,
    SpecError,
    UnreachableTargetError,
)
from .geometry import (
    BallPoint,
    Direction,
    HalfSpacePoint,
    HyperboloidPoint,
    Isometry,
    boost_to_origin,
    convert_model,
    geodesic_distance,
    minkowski_dot,
    origin,
    polar_point,
)
from .horoball import (
    HalfSpaceHoroballForm,
    Horoball,
    busemann_value,
    halfspace_form,
    horoball_contains,
    horoball_radial,
    horoball_transform,
)
from .polytope import (
    DiscreteMeasure,
    HConvexPolytope,
    PolytopeSpec,
    boundedness_bound,
    build_polytope,
    canonicalize,
    extremal_radii,
    facet_area,
    facet_area_fd,
    facet_areas,
    hausdorff_distance,
    outer_parallel_support,
    radial,
    separate,
    support,
    surface_measure_p,
    t_body_volume,
    t_body_volume_lower_bound,
    volume,
)
from .quadrature import (
    SphereQuadrature,
    build_quadrature,
    sinh_power_integral,
    sphere_area,
    unit_ball_volume,
)
from .solver import (
    SolverConfig,
    SolverResult,
    phi_p,
    rescale_to_constraint,
    residual,
    solve_even,
)

__all__ = [
    "BallPoint",
    "DegenerateBodyError",
    "Direction",
    "DiscreteMeasure",
    "HConvexPolytope",
    "HalfSpaceHoroballForm",
    "HalfSpacePoint",
    "Horoball",
    "HoromkError",
    "HyperboloidPoint",
    "Isometry",
    "MismatchedDirectionsError",
    "NotEvenError",
    "PointInsideError",
    "PolytopeSpec",
    "SolverConfig",
    "SolverResult",
    "SpecError",
    "SphereQuadrature",
    "UnreachableTargetError",
    "boost_to_origin",
    "boundedness_bound",
    "build_polytope",
    "build_quadrature",
    "busemann_value",
    "canonicalize",
    "convert_model",
    "extremal_radii",
    "facet_area",
    "facet_area_fd",
    "facet_areas",
    "geodesic_distance",
    "halfspace_form",
    "hausdorff_distance",
    "horoball_contains",
    "horoball_radial",
    "horoball_transform",
    "minkowski_dot",
    "origin",
    "outer_parallel_support",
    "phi_p",
    "polar_point",
    "radial",
    "rescale_to_constraint",
    "residual",
    "separate",
    "sinh_power_integral",
    "solve_even",
    "sphere_area",
    "support",
    "surface_measure_p",
    "t_body_volume",
    "t_body_volume_lower_bound",
    "unit_ball_volume",
    "volume",
]

__version__ = "0.1.0"
