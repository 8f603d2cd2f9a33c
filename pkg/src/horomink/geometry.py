"""Point models of hyperbolic (n+1)-space and the isometries used elsewhere.

Points live on the upper sheet of the unit hyperboloid in Minkowski space
R^{n+1,1} with the bilinear form x_1 y_1 + ... + x_{n+1} y_{n+1} - x_{n+2} y_{n+2}.
The Poincare ball and upper half-space charts are kept alongside because
horoball bookkeeping and rendering are simplest there; all conversions are
exact closed forms.

Conventions fixed once for the whole package:

* the hyperboloid origin is O = (0, ..., 0, 1);
* the half-space chart sends the distinguished boundary direction
  e* = (0, ..., 0, 1) of the ball to infinity and O to (0, ..., 0, 1);
* half-space coordinates are (y_1, ..., y_n, height) with height > 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

UNIT_TOL = 1e-12
SHEET_TOL = 1e-10
LORENTZ_TOL = 1e-10


def _as_readonly(vec) -> np.ndarray:
    arr = np.array(vec, dtype=np.float64)
    arr.setflags(write=False)
    return arr


def minkowski_dot(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Lorentz inner product along the last axis (signature +...+-)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return np.sum(x[..., :-1] * y[..., :-1], axis=-1) - x[..., -1] * y[..., -1]


def safe_acosh(x):
    """arccosh with the argument clamped up to 1 to absorb roundoff."""
    return np.arccosh(np.maximum(x, 1.0))


@dataclass(frozen=True, eq=False)
class Direction:
    """Unit vector in R^{n+1}, i.e. a point of the ideal boundary sphere S^n."""

    vector: np.ndarray

    def __post_init__(self):
        vec = _as_readonly(self.vector)
        if vec.ndim != 1 or vec.size < 2:
            raise ValueError("direction must be a vector in R^{n+1} with n >= 1")
        if not np.all(np.isfinite(vec)):
            raise ValueError("direction has non-finite entries")
        norm = float(np.linalg.norm(vec))
        if abs(norm - 1.0) > UNIT_TOL:
            raise ValueError(f"direction must be unit length, got |v| = {norm!r}")
        object.__setattr__(self, "vector", vec)

    @classmethod
    def from_vector(cls, vec) -> "Direction":
        """Normalize an arbitrary nonzero vector into a Direction."""
        arr = np.asarray(vec, dtype=np.float64)
        norm = float(np.linalg.norm(arr))
        if not np.isfinite(norm) or norm == 0.0:
            raise ValueError("cannot normalize a zero or non-finite vector")
        return cls(arr / norm)

    @property
    def n(self) -> int:
        return self.vector.size - 1


@dataclass(frozen=True, eq=False)
class HyperboloidPoint:
    """Point on the upper sheet: coords in R^{n+2}, <X, X> = -1, last coord > 0."""

    coords: np.ndarray

    def __post_init__(self):
        arr = _as_readonly(self.coords)
        if arr.ndim != 1 or arr.size < 3:
            raise ValueError("hyperboloid point needs at least 3 coordinates")
        q = float(minkowski_dot(arr, arr))
        # The form's conditioning degrades like cosh^2 of the radius, so the
        # defect tolerance scales with the point's magnitude.
        if abs(q + 1.0) > SHEET_TOL * (1.0 + arr[-1] * arr[-1]):
            raise ValueError(f"point is off the unit hyperboloid: <X,X> = {q!r}")
        if arr[-1] <= 0.0:
            raise ValueError("point lies on the lower sheet")
        object.__setattr__(self, "coords", arr)

    @property
    def n(self) -> int:
        return self.coords.size - 2


@dataclass(frozen=True, eq=False)
class BallPoint:
    """Point of the Poincare ball model: vector in R^{n+1} with |Y| < 1."""

    coords: np.ndarray

    def __post_init__(self):
        arr = _as_readonly(self.coords)
        if arr.ndim != 1 or arr.size < 2:
            raise ValueError("ball point needs at least 2 coordinates")
        if float(np.linalg.norm(arr)) >= 1.0:
            raise ValueError("ball point must have norm < 1")
        object.__setattr__(self, "coords", arr)

    @property
    def n(self) -> int:
        return self.coords.size - 1


@dataclass(frozen=True, eq=False)
class HalfSpacePoint:
    """Point of the upper half-space model: (y_1, ..., y_n, height), height > 0."""

    coords: np.ndarray

    def __post_init__(self):
        arr = _as_readonly(self.coords)
        if arr.ndim != 1 or arr.size < 2:
            raise ValueError("half-space point needs at least 2 coordinates")
        if arr[-1] <= 0.0:
            raise ValueError("half-space point must have positive height")
        object.__setattr__(self, "coords", arr)

    @property
    def n(self) -> int:
        return self.coords.size - 1


def origin(n: int) -> HyperboloidPoint:
    """The hyperboloid basepoint O = (0, ..., 0, 1) in H^{n+1}."""
    coords = np.zeros(n + 2)
    coords[-1] = 1.0
    return HyperboloidPoint(coords)


def polar_point(r: float, theta: Direction) -> HyperboloidPoint:
    """Point at geodesic distance r from O in boundary direction theta.

    Coordinates are (sinh(r) * theta, cosh(r)); r = 0 gives O for any theta.
    """
    if r < 0.0:
        raise ValueError("polar radius must be nonnegative")
    coords = np.append(np.sinh(r) * theta.vector, np.cosh(r))
    return HyperboloidPoint(coords)


def radial_decomposition(point: HyperboloidPoint) -> tuple[float, Direction]:
    """Inverse of polar_point. At O the direction defaults to the first axis."""
    r = float(safe_acosh(point.coords[-1]))
    spatial = point.coords[:-1]
    norm = float(np.linalg.norm(spatial))
    if norm == 0.0:
        vec = np.zeros(point.n + 1)
        vec[0] = 1.0
        return 0.0, Direction(vec)
    return r, Direction(spatial / norm)


def geodesic_distance(x: HyperboloidPoint, y: HyperboloidPoint) -> float:
    """Hyperbolic distance d(X, Y) = arccosh(-<X, Y>)."""
    if x.n != y.n:
        raise ValueError("points live in different dimensions")
    return float(safe_acosh(-minkowski_dot(x.coords, y.coords)))


def ball_distance(a: BallPoint, b: BallPoint) -> float:
    """Distance in the Poincare ball chart."""
    da = 1.0 - float(np.dot(a.coords, a.coords))
    db = 1.0 - float(np.dot(b.coords, b.coords))
    diff = a.coords - b.coords
    return float(safe_acosh(1.0 + 2.0 * float(np.dot(diff, diff)) / (da * db)))


def halfspace_distance(a: HalfSpacePoint, b: HalfSpacePoint) -> float:
    """Distance in the upper half-space chart."""
    diff = a.coords - b.coords
    return float(
        safe_acosh(1.0 + float(np.dot(diff, diff)) / (2.0 * a.coords[-1] * b.coords[-1]))
    )


# ---------------------------------------------------------------------------
# model conversions
# ---------------------------------------------------------------------------

def _hyperboloid_to_ball(x: np.ndarray) -> np.ndarray:
    return x[:-1] / (1.0 + x[-1])


def _ball_to_hyperboloid(y: np.ndarray) -> np.ndarray:
    s = 1.0 - float(np.dot(y, y))
    return np.append(2.0 * y / s, (2.0 - s) / s)


def _estar(dim: int) -> np.ndarray:
    e = np.zeros(dim)
    e[-1] = 1.0
    return e


def _invert_at_estar(y: np.ndarray) -> np.ndarray:
    # Inversion centered at e* with radius sqrt(2); it swaps the unit ball
    # and the half-space {last coord < 0} and fixes their common boundary.
    w = y - _estar(y.size)
    return _estar(y.size) + 2.0 * w / float(np.dot(w, w))


def _ball_to_halfspace(y: np.ndarray) -> np.ndarray:
    z = _invert_at_estar(y)
    out = z.copy()
    out[-1] = -z[-1]
    return out


def _halfspace_to_ball(w: np.ndarray) -> np.ndarray:
    z = w.copy()
    z[-1] = -w[-1]
    return _invert_at_estar(z)


def boundary_to_halfspace(e: Direction) -> np.ndarray:
    """Contact point on the half-space floor R^n for an ideal direction e != e*.

    The chart sends e* to infinity; every other boundary direction lands at
    e_horizontal / (1 - e_last).
    """
    vec = e.vector
    denom = 1.0 - vec[-1]
    if denom <= UNIT_TOL:
        raise ValueError("the distinguished direction e* maps to infinity")
    return vec[:-1] / denom


def boundary_from_halfspace(p: np.ndarray) -> Direction:
    """Inverse of boundary_to_halfspace: floor point p in R^n to a direction."""
    p = np.asarray(p, dtype=np.float64)
    s = float(np.dot(p, p))
    return Direction(np.append(2.0 * p, s - 1.0) / (s + 1.0))


_MODEL_TYPES = {
    "hyperboloid": HyperboloidPoint,
    "ball": BallPoint,
    "halfspace": HalfSpacePoint,
}


def convert_model(point, target: str):
    """Convert a point between the hyperboloid, ball, and half-space models.

    target is one of "hyperboloid", "ball", "halfspace". Conversion is exact
    up to roundoff; converting to the model the point is already in returns
    an equal point.
    """
    if target not in _MODEL_TYPES:
        raise ValueError(f"unknown model {target!r}")
    if isinstance(point, HyperboloidPoint):
        if target == "hyperboloid":
            return point
        ball = _hyperboloid_to_ball(point.coords)
        if target == "ball":
            return BallPoint(ball)
        return HalfSpacePoint(_ball_to_halfspace(ball))
    if isinstance(point, BallPoint):
        if target == "ball":
            return point
        if target == "hyperboloid":
            return HyperboloidPoint(_ball_to_hyperboloid(point.coords))
        return HalfSpacePoint(_ball_to_halfspace(point.coords))
    if isinstance(point, HalfSpacePoint):
        if target == "halfspace":
            return point
        ball = _halfspace_to_ball(point.coords)
        if target == "ball":
            return BallPoint(ball)
        return HyperboloidPoint(_ball_to_hyperboloid(ball))
    raise TypeError(f"not a model point: {type(point).__name__}")


# ---------------------------------------------------------------------------
# isometries
# ---------------------------------------------------------------------------

def _lorentz_form(dim: int) -> np.ndarray:
    eta = np.eye(dim)
    eta[-1, -1] = -1.0
    return eta


@dataclass(frozen=True, eq=False)
class Isometry:
    """Orientation-agnostic isometry of H^{n+1}: a Lorentz matrix M.

    M preserves the bilinear form (M^T eta M = eta) and the upper sheet
    (lower-right entry positive).
    """

    matrix: np.ndarray

    def __post_init__(self):
        mat = _as_readonly(self.matrix)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] < 3:
            raise ValueError("isometry matrix must be square, size >= 3")
        eta = _lorentz_form(mat.shape[0])
        defect = float(np.max(np.abs(mat.T @ eta @ mat - eta)))
        if defect > LORENTZ_TOL:
            raise ValueError(f"matrix is not Lorentz: defect {defect!r}")
        if mat[-1, -1] <= 0.0:
            raise ValueError("matrix swaps the hyperboloid sheets")
        object.__setattr__(self, "matrix", mat)

    @property
    def n(self) -> int:
        return self.matrix.shape[0] - 2

    def apply(self, point: HyperboloidPoint) -> HyperboloidPoint:
        return HyperboloidPoint(self.matrix @ point.coords)

    def compose(self, other: "Isometry") -> "Isometry":
        """Composition self o other (other acts first)."""
        return Isometry(self.matrix @ other.matrix)

    def inverse(self) -> "Isometry":
        eta = _lorentz_form(self.matrix.shape[0])
        return Isometry(eta @ self.matrix.T @ eta)

    @classmethod
    def identity(cls, n: int) -> "Isometry":
        return cls(np.eye(n + 2))

    @classmethod
    def boost(cls, direction: Direction, distance: float) -> "Isometry":
        """Translation by `distance` along the geodesic from O toward `direction`.

        Maps O to polar_point(distance, direction); negative distance moves
        the other way.
        """
        u = direction.vector
        dim = u.size + 1
        mat = np.eye(dim)
        mat[:-1, :-1] += (np.cosh(distance) - 1.0) * np.outer(u, u)
        mat[:-1, -1] = np.sinh(distance) * u
        mat[-1, :-1] = np.sinh(distance) * u
        mat[-1, -1] = np.cosh(distance)
        return cls(mat)

    @classmethod
    def rotation_between(cls, a: Direction, b: Direction) -> "Isometry":
        """Rotation of the spatial factor R^{n+1} taking direction a to b."""
        av, bv = a.vector, b.vector
        if av.size != bv.size:
            raise ValueError("directions live in different dimensions")
        k = av.size
        dot = float(np.dot(av, bv))
        if dot > -1.0 + 1e-14:
            s = av + bv
            rot = np.eye(k) + 2.0 * np.outer(bv, av) - np.outer(s, s) / (1.0 + dot)
        else:
            # Antipodal pair: rotate by pi in a plane containing a.
            pick = 0 if abs(av[0]) < 0.9 else 1
            v = np.zeros(k)
            v[pick] = 1.0
            v -= float(np.dot(v, av)) * av
            v /= np.linalg.norm(v)
            rot = np.eye(k) - 2.0 * np.outer(av, av) - 2.0 * np.outer(v, v)
        mat = np.eye(k + 1)
        mat[:-1, :-1] = rot
        return cls(mat)


def boost_to_origin(point: HyperboloidPoint) -> Isometry:
    """Isometry mapping `point` to O (a pure boost along their common geodesic)."""
    r, theta = radial_decomposition(point)
    return Isometry.boost(theta, -r)
