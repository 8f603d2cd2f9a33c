"""Horospherically convex polytopes: intersections of closed horoballs.

A body is specified by directions e_i on the ideal sphere and scales
x_i >= 0; the polytope is the intersection of the closed horoballs
B(e_i, x_i). With at least two distinct directions and positive scales the
intersection is compact with the basepoint O interior, so it is star
shaped about O and fully described by its radial function. Everything
else (volume, support numbers, facet areas, Hausdorff distance,
separation) is built on that parameterization plus the half-space chart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import quad as _adaptive_quad
from scipy.optimize import minimize as _nm_minimize
from scipy.optimize import minimize_scalar as _scalar_minimize

from .errors import (
    DegenerateBodyError,
    NotEvenError,
    PointInsideError,
    SpecError,
)
from .geometry import (
    Direction,
    HyperboloidPoint,
    Isometry,
    boost_to_origin,
    minkowski_dot,
    polar_point,
    safe_acosh,
)
from .horoball import Horoball, busemann_value, halfspace_form, horoball_transform, radial_matrix
from .quadrature import SphereQuadrature, build_quadrature, sinh_power_integral, unit_ball_volume

# A listed direction supports the body when its scale matches the support
# number this closely.
FACET_TOL = 1e-7

# Pairwise direction separation below this counts as "the same direction".
DIRECTION_TOL = 1e-9

# Boundary maxima often sit at body vertices where the objective has a kink,
# so the value error of a refinement is first order in the bracket width.
_REFINE_XATOL = 1e-12


def _direction_rows(directions, n: int) -> np.ndarray:
    rows = np.array(directions, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] != n + 1 or rows.shape[0] == 0:
        raise SpecError(f"directions must form a nonempty (m, {n + 1}) array")
    norms = np.linalg.norm(rows, axis=1)
    if np.any(norms == 0.0) or not np.all(np.isfinite(rows)):
        raise SpecError("directions must be finite and nonzero")
    rows = rows / norms[:, None]
    rows.setflags(write=False)
    return rows


def _even_pairing(directions: np.ndarray, values: np.ndarray, what: str) -> list[tuple[int, int]]:
    """Match antipodal direction pairs carrying equal values; NotEven otherwise."""
    count = directions.shape[0]
    if count % 2 != 0:
        raise NotEvenError(f"{what}: odd number of entries cannot pair up")
    partner = np.full(count, -1)
    for i in range(count):
        if partner[i] >= 0:
            continue
        gaps = np.linalg.norm(directions + directions[i], axis=1)
        found = -1
        for j in np.argsort(gaps):
            if j != i and partner[j] < 0 and gaps[j] <= DIRECTION_TOL:
                found = int(j)
                break
        if found < 0:
            raise NotEvenError(f"{what}: no antipodal partner for entry {i}")
        if abs(values[i] - values[found]) > 1e-9 * max(1.0, abs(values[i])):
            raise NotEvenError(f"{what}: entries {i} and {found} pair with unequal values")
        partner[i], partner[found] = found, i
    return [(i, int(partner[i])) for i in range(count) if i < partner[i]]


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finite positive measure on S^n: atoms (direction, weight)."""

    n: int
    directions: np.ndarray
    weights: np.ndarray
    even: bool = False

    def __post_init__(self):
        rows = _direction_rows(self.directions, self.n)
        weights = np.array(self.weights, dtype=np.float64)
        if weights.shape != (rows.shape[0],):
            raise SpecError("weights must align with directions")
        if np.any(weights <= 0.0) or not np.all(np.isfinite(weights)):
            raise SpecError("atom weights must be positive and finite")
        gram = rows @ rows.T
        np.fill_diagonal(gram, -2.0)
        if np.max(gram) > 1.0 - DIRECTION_TOL:
            raise SpecError("measure atoms must have pairwise distinct directions")
        weights.setflags(write=False)
        object.__setattr__(self, "directions", rows)
        object.__setattr__(self, "weights", weights)
        if self.even:
            _even_pairing(rows, weights, "measure")

    @property
    def count(self) -> int:
        return self.directions.shape[0]

    def total_mass(self) -> float:
        return float(np.sum(self.weights))

    def reduced_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """One representative per antipodal pair (first occurrences, input order)."""
        if not self.even:
            raise NotEvenError("measure is not flagged even")
        pairs = _even_pairing(self.directions, self.weights, "measure")
        idx = [i for i, _ in pairs]
        return self.directions[idx], self.weights[idx]

    @classmethod
    def from_even_pairs(cls, directions, weights) -> "DiscreteMeasure":
        """Build the full even measure from one representative per pair."""
        rows = np.asarray(directions, dtype=np.float64)
        w = np.asarray(weights, dtype=np.float64)
        return cls(
            n=rows.shape[1] - 1,
            directions=np.vstack([rows, -rows]),
            weights=np.concatenate([w, w]),
            even=True,
        )


@dataclass(frozen=True, eq=False)
class PolytopeSpec:
    """Defining data of an intersection of closed horoballs."""

    n: int
    directions: np.ndarray
    x: np.ndarray
    even: bool = False

    def __post_init__(self):
        rows = _direction_rows(self.directions, self.n)
        x = np.array(self.x, dtype=np.float64)
        if x.shape != (rows.shape[0],):
            raise SpecError("scales x must align with directions")
        if rows.shape[0] < 2:
            raise SpecError("need at least two horoballs")
        if np.any(x < 0.0) or not np.all(np.isfinite(x)):
            raise SpecError("scales x must be nonnegative and finite")
        gram = rows @ rows.T
        np.fill_diagonal(gram, 2.0)
        if np.min(gram) > 1.0 - DIRECTION_TOL:
            # every off-diagonal pair nearly coincides: no two distinct directions
            raise SpecError("need at least two distinct directions")
        if np.any(x == 0.0) and not self.even:
            raise SpecError("zero scales are only representable for even specs")
        x.setflags(write=False)
        object.__setattr__(self, "directions", rows)
        object.__setattr__(self, "x", x)
        if self.even:
            _even_pairing(rows, x, "spec")

    @property
    def count(self) -> int:
        return self.directions.shape[0]

    def with_x(self, new_x, even: bool | None = None) -> "PolytopeSpec":
        return PolytopeSpec(
            n=self.n,
            directions=self.directions,
            x=new_x,
            even=self.even if even is None else even,
        )

    def horoballs(self) -> list[Horoball]:
        return [
            Horoball(Direction(self.directions[i]), float(self.x[i]))
            for i in range(self.count)
        ]


@dataclass(frozen=True, eq=False)
class HConvexPolytope:
    """A built body: spec plus support numbers and a scan grid for maximizations."""

    spec: PolytopeSpec
    canonical_support: np.ndarray
    facet_nonempty: np.ndarray
    scan: SphereQuadrature | None
    scan_radii: np.ndarray | None
    degenerate: bool = False

    @property
    def n(self) -> int:
        return self.spec.n

    @cached_property
    def _scan_cosh(self) -> np.ndarray:
        return np.cosh(self.scan_radii)

    @cached_property
    def _scan_sinh(self) -> np.ndarray:
        return np.sinh(self.scan_radii)


def _radial_rows(spec: PolytopeSpec, thetas: np.ndarray) -> np.ndarray:
    """Radial function of the body on the given unit rows."""
    per_ball = radial_matrix(spec.directions, spec.x, thetas)
    return np.min(per_ball, axis=1)


def _radial_single(spec: PolytopeSpec, theta: np.ndarray) -> float:
    return float(_radial_rows(spec, theta[None, :])[0])


def _require_interior(poly: HConvexPolytope, op: str):
    if poly.degenerate:
        raise DegenerateBodyError(f"{op} needs a body with interior, got the point body")


def _chart_basis(theta: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the tangent space at theta (rows)."""
    _, _, vt = np.linalg.svd(theta[None, :])
    return vt[1:]


def _refine_max_circle(objective, phi0: float, delta: float) -> float:
    # Optimize the offset from phi0, not the absolute angle: the bounded
    # minimizer's stopping rule carries a sqrt(eps)*|x| term, which for
    # |x| ~ pi floors the bracket near 5e-8 however small xatol is.
    res = _scalar_minimize(
        lambda a: -objective(phi0 + a),
        bounds=(-delta, delta),
        method="bounded",
        options={"xatol": _REFINE_XATOL},
    )
    return max(objective(phi0), -float(res.fun))


def _refine_max_sphere(objective, theta0: np.ndarray, step: float) -> float:
    basis = _chart_basis(theta0)
    k = basis.shape[0]

    def neg(v):
        vec = theta0 + basis.T @ v
        return -objective(vec / np.linalg.norm(vec))

    simplex = np.zeros((k + 1, k))
    simplex[1:] = np.eye(k) * step
    res = _nm_minimize(
        neg,
        np.zeros(k),
        method="Nelder-Mead",
        options={
            "xatol": _REFINE_XATOL,
            "fatol": 1e-13,
            "initial_simplex": simplex,
            "maxiter": 600,
        },
    )
    return max(objective(theta0), -float(res.fun))


def _refine_max_direction(objective_vec, theta0: np.ndarray, spacing: float) -> float:
    """Maximize a function of a unit vector near theta0."""
    if theta0.size == 2:
        phi0 = math.atan2(theta0[1], theta0[0])

        def obj(a):
            return objective_vec(np.array([math.cos(a), math.sin(a)]))

        return _refine_max_circle(obj, phi0, 1.1 * spacing)
    return _refine_max_sphere(objective_vec, theta0, spacing)


def _scan_spacing(scan: SphereQuadrature) -> float:
    if scan.kind == "uniform-grid":
        return 2.0 * math.pi / scan.count
    # mean angular spacing estimate for scattered node sets on S^n
    return (float(np.sum(scan.weights)) / scan.count) ** (1.0 / scan.n)


def _support_objective(spec: PolytopeSpec, e_vec: np.ndarray):
    def value(theta: np.ndarray) -> float:
        rho = _radial_single(spec, theta)
        c = float(np.dot(theta, e_vec))
        return math.log(math.cosh(rho) - math.sinh(rho) * c)

    return value


def build_polytope(
    spec: PolytopeSpec,
    scan: SphereQuadrature | None = None,
    allow_degenerate: bool = False,
) -> HConvexPolytope:
    """Intersect the spec's horoballs and precompute support data.

    The scan quadrature doubles as the default direction set for support
    and extremal maximizations and as the default volume rule. An even
    spec containing a zero-scale pair collapses to the single point O;
    that body is only representable with allow_degenerate=True and raises
    DegenerateBodyError otherwise.
    """
    if np.any(spec.x == 0.0):
        if not allow_degenerate:
            raise DegenerateBodyError(
                "an even pair with scale 0 pins the body to the basepoint"
            )
        m = spec.count
        return HConvexPolytope(
            spec=spec,
            canonical_support=np.zeros(m),
            facet_nonempty=np.zeros(m, dtype=bool),
            scan=None,
            scan_radii=None,
            degenerate=True,
        )
    if scan is None:
        scan = build_quadrature(spec.n)
    elif scan.n != spec.n:
        raise SpecError("scan quadrature dimension does not match the spec")
    radii = _radial_rows(spec, scan.nodes)
    if not np.all(np.isfinite(radii)):
        raise SpecError("body is unbounded along a scanned direction")

    # Coarse support values for all listed directions in one pass.
    a, b = np.cosh(radii), np.sinh(radii)
    cos = scan.nodes @ spec.directions.T
    coarse = np.log(a[:, None] - b[:, None] * cos)
    best = np.argmax(coarse, axis=0)
    spacing = _scan_spacing(scan)
    support_vals = np.empty(spec.count)
    for i in range(spec.count):
        refined = _refine_max_direction(
            _support_objective(spec, spec.directions[i]),
            scan.nodes[best[i]],
            spacing,
        )
        # Support of a listed direction never exceeds its own scale.
        support_vals[i] = min(refined, float(spec.x[i]))
    nonempty = (spec.x - support_vals) <= FACET_TOL
    return HConvexPolytope(
        spec=spec,
        canonical_support=support_vals,
        facet_nonempty=nonempty,
        scan=scan,
        scan_radii=radii,
    )


def radial(poly: HConvexPolytope, theta: Direction) -> float:
    """Distance from O to the boundary along theta."""
    _require_interior(poly, "radial")
    if theta.n != poly.n:
        raise SpecError("direction dimension mismatch")
    return _radial_single(poly.spec, theta.vector)


def support(poly: HConvexPolytope, e: Direction, refine: bool = True) -> float:
    """Horospherical support number: the largest Busemann value over the body."""
    _require_interior(poly, "support")
    if e.n != poly.n:
        raise SpecError("direction dimension mismatch")
    cos = poly.scan.nodes @ e.vector
    vals = np.log(poly._scan_cosh - poly._scan_sinh * cos)
    g = int(np.argmax(vals))
    coarse = float(vals[g])
    if not refine:
        return coarse
    refined = _refine_max_direction(
        _support_objective(poly.spec, e.vector), poly.scan.nodes[g], _scan_spacing(poly.scan)
    )
    return max(coarse, refined)


def _support_grid(poly: HConvexPolytope, dirs: np.ndarray, chunk: int = 512) -> np.ndarray:
    """Coarse support numbers for many directions (scan-grid maximization)."""
    out = np.empty(dirs.shape[0])
    a = poly._scan_cosh[:, None]
    b = poly._scan_sinh[:, None]
    for lo in range(0, dirs.shape[0], chunk):
        cos = poly.scan.nodes @ dirs[lo : lo + chunk].T
        out[lo : lo + chunk] = np.max(np.log(a - b * cos), axis=0)
    return out


def extremal_radii(poly: HConvexPolytope) -> tuple[float, float]:
    """(R, r): the circumscribed and inscribed geodesic ball radii about O."""
    _require_interior(poly, "extremal_radii")
    spec = poly.spec
    spacing = _scan_spacing(poly.scan)

    def rho(theta):
        return _radial_single(spec, theta)

    hi = _refine_max_direction(rho, poly.scan.nodes[int(np.argmax(poly.scan_radii))], spacing)
    lo = -_refine_max_direction(
        lambda t: -rho(t), poly.scan.nodes[int(np.argmin(poly.scan_radii))], spacing
    )
    return float(hi), float(lo)


def _horosphere_crossings(spec: PolytopeSpec) -> np.ndarray:
    """Angles (sorted, in [0, 2pi)) where two boundary horospheres meet.

    Works on the planar hyperboloid: each Busemann level set is a linear
    constraint there, so a pair leaves a line whose cut with the sheet is
    one quadratic. Returns every pairwise crossing, including ones buried
    inside other balls; spurious entries only split an arc in two.
    """
    dirs = spec.directions
    scales = np.exp(spec.x)
    found: list[float] = []
    for i in range(spec.count):
        for j in range(i + 1, spec.count):
            d = dirs[j] - dirs[i]
            dd = float(d @ d)
            if dd < 1e-24:
                continue
            p0 = ((scales[i] - scales[j]) / dd) * d
            q = np.array([-d[1], d[0]]) / math.sqrt(dd)
            w0 = scales[i] + float(dirs[i] @ p0)
            eq = float(dirs[i] @ q)
            # a > 0 always: e_i orthogonal to d would need e_i . d = 0,
            # but e_i . d = cos(gamma) - 1 < 0 for distinct directions.
            a = 1.0 - eq * eq
            b = float(p0 @ q) - w0 * eq
            c = float(p0 @ p0) - w0 * w0 + 1.0
            disc = b * b - a * c
            if disc < 0.0:
                continue
            root = math.sqrt(disc)
            for t in ((-b - root) / a, (-b + root) / a):
                p = p0 + t * q
                if float(p @ p) < 1e-24 or w0 + t * eq < 1.0 - 1e-9:
                    continue
                found.append(math.atan2(float(p[1]), float(p[0])))
    if not found:
        return np.empty(0)
    return np.sort(np.mod(np.asarray(found), 2.0 * math.pi))


def _arc_cosh_antiderivative(scale: float, alpha: float) -> float:
    """Antiderivative of cosh(rho(alpha)) - 1 along one horosphere arc.

    alpha in (0, 2pi) is the angle from the arc's ideal direction and
    scale is e^x. Eliminating rho from the Busemann level equation gives
    cosh(rho) = (E + cos(a) sqrt(E^2 - sin(a)^2)) / sin(a)^2, which
    integrates in elementary terms; the second branch rewrites the
    quotient to dodge cancellation where cos(a) < 0.
    """
    s, c = math.sin(alpha), math.cos(alpha)
    root = math.sqrt(max(scale * scale - s * s, 0.0))
    if c >= 0.0:
        g = (scale * c + root) / s
    else:
        g = s * (1.0 - scale * scale) / (scale * c - root)
    return -g - math.asin(s / scale) - alpha


def _volume_closed_plane(spec: PolytopeSpec) -> float:
    """Exact volume of a planar body, integrated arc by arc.

    Splitting the circle at the horosphere crossing angles keeps each arc
    on a single ball's smooth radial branch. Unlike a fixed angular grid,
    whose error moves first order with the kink positions, the closed
    form also differentiates cleanly in the scales x.
    """
    cross = _horosphere_crossings(spec)
    if cross.size < 2:
        raise SpecError("body is unbounded along a scanned direction")
    phis = np.arctan2(spec.directions[:, 1], spec.directions[:, 0])
    two_pi = 2.0 * math.pi
    total = 0.0
    for k in range(cross.size):
        lo = float(cross[k])
        hi = float(cross[k + 1]) if k + 1 < cross.size else float(cross[0]) + two_pi
        width = hi - lo
        if width < 1e-14:
            continue
        mid = 0.5 * (lo + hi)
        node = np.array([[math.cos(mid), math.sin(mid)]])
        i = int(np.argmin(radial_matrix(spec.directions, spec.x, node)[0]))
        # An active arc never reaches its own ideal direction (the radial
        # blows up there), so the alpha interval stays inside (0, 2pi).
        a_lo = (lo - float(phis[i])) % two_pi
        a_hi = a_lo + width
        if a_hi > two_pi + 1e-9:
            raise SpecError("body is unbounded along a scanned direction")
        a_lo = max(a_lo, 1e-14)
        a_hi = min(a_hi, two_pi - 1e-14)
        scale = math.exp(float(spec.x[i]))
        total += _arc_cosh_antiderivative(scale, a_hi) - _arc_cosh_antiderivative(scale, a_lo)
    return total


def volume(poly: HConvexPolytope, rule: SphereQuadrature | None = None) -> float:
    """Hyperbolic volume via the radial sinh-power integral.

    Planar bodies (n = 1) are integrated in closed form on each boundary
    arc, so the rule argument only picks the node set for n >= 2.
    """
    if poly.degenerate:
        return 0.0
    if rule is not None and rule.n != poly.n:
        raise SpecError("quadrature dimension mismatch")
    if poly.n == 1:
        return _volume_closed_plane(poly.spec)
    if rule is None:
        return poly.scan.integrate(sinh_power_integral(poly.n, poly.scan_radii))
    radii = _radial_rows(poly.spec, rule.nodes)
    return rule.integrate(sinh_power_integral(poly.n, radii))


def _volume_of_spec(spec: PolytopeSpec, rule: SphereQuadrature) -> float:
    if spec.n == 1:
        return _volume_closed_plane(spec)
    radii = _radial_rows(spec, rule.nodes)
    if not np.all(np.isfinite(radii)):
        raise SpecError("body is unbounded along a scanned direction")
    return rule.integrate(sinh_power_integral(spec.n, radii))


# ---------------------------------------------------------------------------
# facets
# ---------------------------------------------------------------------------

def _facet_shadow(poly: HConvexPolytope, i: int):
    """Half-space data for facet i: slice height and constraining floor disks.

    Rotates e_i to the chart's infinity direction; the facet then lives in
    the horizontal plane at height e^{-x_i} and each other horoball cuts a
    Euclidean disk out of it. Returns (height, centers, radii) or None
    when some constraint empties the slice.
    """
    spec = poly.spec
    k = spec.n + 1
    estar = Direction(np.append(np.zeros(spec.n), 1.0))
    rot = Isometry.rotation_between(Direction(spec.directions[i]), estar)
    h = math.exp(-float(spec.x[i]))
    centers, radii = [], []
    for j in range(spec.count):
        if j == i:
            continue
        form = halfspace_form(horoball_transform(Horoball(Direction(spec.directions[j]), float(spec.x[j])), rot))
        if form.kind == "plane":
            # Same ideal center as facet i: constrains all-or-nothing.
            if form.height > h * (1.0 + 1e-12):
                return None
            continue
        w_sq = h * (2.0 * form.radius - h)
        if w_sq <= 0.0:
            return None
        centers.append(form.contact)
        radii.append(math.sqrt(w_sq))
    if not centers:
        raise SpecError("facet shadow is unbounded; spec lacks distinct directions")
    return h, np.array(centers), np.array(radii)


def facet_area(
    poly: HConvexPolytope,
    i: int,
    mc_samples: int = 400_000,
    seed: int | None = None,
) -> float:
    """n-dimensional area of the facet carried by horoball i.

    Zero when the horoball does not support the body. The shadow of the
    facet on the chart floor is an intersection of disks; its Euclidean
    volume is exact for n = 1 (intervals) and Monte-Carlo estimated over
    the smallest disk's bounding box for n >= 2. The hyperbolic area is
    e^{n x_i} times the shadow volume.
    """
    _require_interior(poly, "facet_area")
    spec = poly.spec
    if not 0 <= i < spec.count:
        raise IndexError("facet index out of range")
    if not poly.facet_nonempty[i]:
        return 0.0
    shadow = _facet_shadow(poly, i)
    if shadow is None:
        return 0.0
    h, centers, radii = shadow
    scale = math.exp(spec.n * float(spec.x[i]))
    if spec.n == 1:
        lo = float(np.max(centers[:, 0] - radii))
        hi = float(np.min(centers[:, 0] + radii))
        return scale * max(0.0, hi - lo)
    smallest = int(np.argmin(radii))
    box_center = centers[smallest]
    half = float(radii[smallest])
    rng = np.random.Generator(np.random.Philox(770001 + i if seed is None else seed))
    pts = rng.uniform(-half, half, size=(mc_samples, spec.n)) + box_center[None, :]
    inside = np.ones(mc_samples, dtype=bool)
    for c, r in zip(centers, radii):
        d = pts - c[None, :]
        inside &= np.einsum("ij,ij->i", d, d) <= r * r
    box_volume = (2.0 * half) ** spec.n
    return scale * box_volume * float(np.count_nonzero(inside)) / mc_samples


def facet_areas(poly: HConvexPolytope, **kwargs) -> np.ndarray:
    """facet_area for every listed horoball."""
    return np.array([facet_area(poly, i, **kwargs) for i in range(poly.spec.count)])


def facet_area_fd(
    poly: HConvexPolytope,
    i: int,
    delta: float = 1e-4,
    rule: SphereQuadrature | None = None,
) -> float:
    """Facet area as the central difference of the volume in the scale x_i.

    Independent of the half-space shadow construction. For n = 1 both
    volumes come from the closed-form arc integration, so the difference
    tracks the true derivative; for n >= 2 the same quadrature rule is
    used on both sides so the node error largely cancels.
    """
    _require_interior(poly, "facet_area_fd")
    spec = poly.spec
    if not 0 <= i < spec.count:
        raise IndexError("facet index out of range")
    if rule is None:
        rule = poly.scan
    step = min(delta, float(spec.x[i]) / 2.0)
    up = np.array(spec.x)
    up[i] += step
    down = np.array(spec.x)
    down[i] -= step
    v_up = _volume_of_spec(spec.with_x(up, even=False), rule)
    v_down = _volume_of_spec(spec.with_x(down, even=False), rule)
    return (v_up - v_down) / (2.0 * step)


def surface_measure_p(poly: HConvexPolytope, p: float) -> DiscreteMeasure:
    """The p-weighted surface measure: atom e^{-p u_i} S_i at each facet direction."""
    _require_interior(poly, "surface_measure_p")
    spec = poly.spec
    dirs, weights = [], []
    for i in range(spec.count):
        area = facet_area(poly, i)
        if area <= 0.0:
            continue
        dirs.append(spec.directions[i])
        weights.append(math.exp(-p * float(poly.canonical_support[i])) * area)
    if not dirs:
        raise DegenerateBodyError("no supporting facets found")
    return DiscreteMeasure(
        n=spec.n,
        directions=np.array(dirs),
        weights=np.array(weights),
        even=bool(spec.even and len(dirs) == spec.count),
    )


# ---------------------------------------------------------------------------
# comparisons and constructions
# ---------------------------------------------------------------------------

def hausdorff_distance(
    k_body: HConvexPolytope,
    l_body: HConvexPolytope,
    rule: SphereQuadrature | None = None,
) -> float:
    """Uniform distance between horospherical support functions.

    Coarse maximization of |u_K - u_L| over the rule's directions, then
    local refinement with fully refined support evaluations.
    """
    _require_interior(k_body, "hausdorff_distance")
    _require_interior(l_body, "hausdorff_distance")
    if k_body.n != l_body.n:
        raise SpecError("bodies live in different dimensions")
    if rule is None:
        rule = build_quadrature(k_body.n, 1024 if k_body.n == 1 else 4096)
    dirs = rule.nodes
    diff = np.abs(_support_grid(k_body, dirs) - _support_grid(l_body, dirs))
    g = int(np.argmax(diff))

    def gap(vec):
        e = Direction(vec / np.linalg.norm(vec))
        return abs(support(k_body, e) - support(l_body, e))

    refined = _refine_max_direction(gap, dirs[g], _scan_spacing(rule))
    return max(float(diff[g]), refined)


def canonicalize(poly: HConvexPolytope) -> PolytopeSpec:
    """Spec with every scale replaced by its support number.

    The body is unchanged and every horoball of the new spec touches it,
    so rebuilding and canonicalizing again is a fixed point up to the
    support refinement tolerance. Even pairing is preserved exactly.
    """
    _require_interior(poly, "canonicalize")
    new_x = np.array(poly.canonical_support)
    if poly.spec.even:
        for i, j in _even_pairing(poly.spec.directions, poly.spec.x, "spec"):
            tied = min(new_x[i], new_x[j])
            new_x[i] = new_x[j] = tied
    return poly.spec.with_x(new_x)


def separate(poly: HConvexPolytope, point: HyperboloidPoint) -> Horoball:
    """Closed horoball containing the body but not the (strictly outside) point.

    Finds the boundary point nearest to the query, then returns the
    horoball tangent there to the geodesic sphere around the query,
    expressed in the original coordinates.
    """
    _require_interior(poly, "separate")
    spec = poly.spec
    if point.n != poly.n:
        raise SpecError("point dimension mismatch")
    gaps = [busemann_value(Direction(spec.directions[i]), point) - float(spec.x[i]) for i in range(spec.count)]
    if max(gaps) <= 0.0:
        raise PointInsideError("the point is not strictly outside the body")

    boundary = np.empty((poly.scan.count, spec.n + 2))
    boundary[:, :-1] = poly._scan_sinh[:, None] * poly.scan.nodes
    boundary[:, -1] = poly._scan_cosh
    dots = -minkowski_dot(boundary, point.coords[None, :])
    dists = safe_acosh(dots)
    g = int(np.argmin(dists))

    best = {"d": float(dists[g]), "theta": poly.scan.nodes[g]}

    def neg_dist(theta):
        x = polar_point(_radial_single(spec, theta), Direction(theta))
        d = float(safe_acosh(-minkowski_dot(x.coords, point.coords)))
        if d < best["d"]:
            best["d"], best["theta"] = d, theta
        return -d

    _refine_max_direction(neg_dist, poly.scan.nodes[g], _scan_spacing(poly.scan))

    theta_star = best["theta"] / np.linalg.norm(best["theta"])
    nearest = polar_point(_radial_single(spec, theta_star), Direction(theta_star))
    to_origin = boost_to_origin(point)
    moved = to_origin.apply(nearest)
    dist = float(safe_acosh(moved.coords[-1]))
    center = Direction.from_vector(moved.coords[:-1])
    return horoball_transform(Horoball(center, -dist), to_origin.inverse())


def outer_parallel_support(
    poly: HConvexPolytope,
    eps: float,
    dirs: SphereQuadrature | np.ndarray | None = None,
) -> PolytopeSpec:
    """Spec of the grid outer approximation of the eps-parallel body.

    Each grid direction contributes the horoball with scale u(K, e) + eps;
    the resulting body contains the true parallel body and matches its
    support numbers exactly at the grid directions.
    """
    _require_interior(poly, "outer_parallel_support")
    if eps <= 0.0:
        raise ValueError("needs eps > 0")
    if dirs is None:
        rows = poly.scan.nodes
    elif isinstance(dirs, SphereQuadrature):
        rows = dirs.nodes
    else:
        rows = _direction_rows(dirs, poly.n)
    values = np.empty(rows.shape[0])
    for g in range(rows.shape[0]):
        values[g] = support(poly, Direction(rows[g])) + eps
    return PolytopeSpec(n=poly.n, directions=rows, x=values)


# ---------------------------------------------------------------------------
# tube bodies and the volume-based support bound
# ---------------------------------------------------------------------------

def t_body_volume(r: float, n: int) -> float:
    """Volume of the tube body T(r): the smallest h-convex set joining O to
    the point at distance r, computed by an adaptive 1-D integral in the
    half-space chart."""
    if r <= 0.0:
        raise ValueError("needs r > 0")
    if n < 1:
        raise ValueError("needs n >= 1")
    er = math.exp(r)
    a = er + 1.0
    half = math.exp(r / 2.0)

    def integrand(y: float) -> float:
        width = math.sqrt(max(a * y - y * y, 0.0)) - half
        if width <= 0.0:
            return 0.0
        return width**n / y ** (n + 1)

    value, _ = _adaptive_quad(integrand, 1.0, er, epsabs=1e-12, epsrel=1e-10, limit=200)
    return unit_ball_volume(n) * value


def t_body_volume_lower_bound(r: float, n: int) -> float:
    """Closed-form lower bound for t_body_volume with the same (r, n)."""
    if r <= 0.0:
        raise ValueError("needs r > 0")
    if n < 1:
        raise ValueError("needs n >= 1")
    a = (math.exp(r) + 1.0) / 2.0
    shrink = (math.exp(r / 2.0) - 1.0) / (math.exp(r / 2.0) + 1.0)
    series = math.log(a)
    for k in range(n):
        series += ((-1.0) ** (n - k)) * math.comb(n, k) / (n - k) * (1.0 - a ** (k - n))
    return unit_ball_volume(n) * shrink**n * series


def boundedness_bound(max_volume: float, n: int, tol: float = 1e-6) -> float:
    """Smallest r (within tol) with t_body_volume(r, n) > max_volume.

    Any body of volume at most max_volume has every support number below
    this bound: a support number of size r forces the body to contain a
    congruent copy of T(r).
    """
    if max_volume <= 0.0:
        raise ValueError("needs max_volume > 0")
    lo, hi = 0.0, 1.0
    while t_body_volume(hi, n) <= max_volume:
        lo = hi
        hi *= 2.0
        if hi > 256.0:
            raise ValueError("max_volume too large to bracket")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if t_body_volume(mid, n) > max_volume:
            hi = mid
        else:
            lo = mid
    return hi
