"""Projected-gradient solver for the even discrete horospherical Minkowski problem.

Given an even measure with atoms (e_i, a_i) and an exponent p, the solver
finds scales z for the horoballs at the measure's directions so that each
facet area matches lambda * a_i * e^{p z_i} for a common multiplier
lambda. The variational formulations differ by the sign of p:

* p >= 0: maximize volume subject to Phi_p(z) = 1;
* p < 0: minimize Phi_p subject to volume = V0.

Each accepted iterate is canonicalized (scales replaced by support
numbers, which never changes the body) and rescaled back onto the active
constraint, so the objective trace is monotone. Convergence is certified
by the relative residual of the optimality system, never by iterate
distance.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    MismatchedDirectionsError,
    NotEvenError,
    SpecError,
    UnreachableTargetError,
)
from .polytope import (
    DiscreteMeasure,
    HConvexPolytope,
    PolytopeSpec,
    boundedness_bound,
    build_polytope,
    canonicalize,
    facet_area,
    facet_area_fd,
    volume,
    _volume_of_spec,
)
from .quadrature import SphereQuadrature, build_quadrature

logger = logging.getLogger(__name__)

_Z_FLOOR = 1e-9


def phi_p(x, weights, p: float) -> float:
    """Constraint functional: sum of a_i (e^{p x_i} - 1) / p, or its p = 0 limit.

    Evaluated with expm1 so tiny |p| stays close to the linear limit
    sum(a_i x_i). For p < 0 the value is bounded above by sum(a_i) / |p|.
    """
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    if x.shape != w.shape:
        raise SpecError("x and weights must align")
    if p == 0.0:
        return float(np.dot(w, x))
    return float(np.sum(w * np.expm1(p * x)) / p)


def rescale_to_constraint(
    x,
    weights,
    p: float,
    target: float,
    mode: str = "phi",
    spec: PolytopeSpec | None = None,
    rule: SphereQuadrature | None = None,
) -> float:
    """Multiplier t > 0 placing t * x on the constraint set.

    mode "phi" solves Phi_p(t x) = target by bisection (exactly for p = 0,
    where the functional is linear) to absolute accuracy 1e-8. mode
    "volume" solves V(P(t x)) = target to relative accuracy 1e-5, with the
    body built from spec's directions and the given quadrature rule.
    Raises UnreachableTargetError when the target exceeds the functional's
    supremum (possible only for p < 0 in phi mode).
    """
    x = np.asarray(x, dtype=np.float64)
    if np.any(x <= 0.0):
        raise SpecError("rescaling needs strictly positive scales")
    if target <= 0.0:
        raise UnreachableTargetError("constraint target must be positive")

    if mode == "phi":
        w = np.asarray(weights, dtype=np.float64)
        if p == 0.0:
            return target / phi_p(x, w, 0.0)
        if p < 0.0:
            supremum = float(np.sum(w)) / abs(p)
            if target >= supremum:
                raise UnreachableTargetError(
                    f"target {target} is not below the p<0 supremum {supremum}"
                )

        def value(t: float) -> float:
            return phi_p(t * x, w, p)

        stop = lambda v: abs(v - target) <= 1e-8  # noqa: E731
    elif mode == "volume":
        if spec is None or rule is None:
            raise SpecError("volume rescaling needs a spec template and a rule")

        def value(t: float) -> float:
            return _volume_of_spec(spec.with_x(t * x, even=False), rule)

        # contract is 1e-5 relative; iterate well past it so the solver's
        # objective comparisons are not polluted by rescaling noise
        stop = lambda v: abs(v - target) <= 1e-9 * target  # noqa: E731
    else:
        raise ValueError(f"unknown rescale mode {mode!r}")

    lo, hi = 1.0, 1.0
    if value(1.0) < target:
        while value(hi) < target:
            hi *= 2.0
            if hi > 1e9:
                raise UnreachableTargetError("failed to bracket the constraint target")
        lo = hi / 2.0
    else:
        while value(lo) > target:
            lo /= 2.0
            if lo < 1e-12:
                raise UnreachableTargetError("failed to bracket the constraint target")
        hi = lo * 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        v = value(mid)
        if stop(v):
            return mid
        if v < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    return 0.5 * (lo + hi)


def residual(poly: HConvexPolytope, measure: DiscreteMeasure, p: float) -> tuple[float, float]:
    """Multiplier and worst relative defect of the optimality system.

    Matches measure atoms to the polytope's directions (within 1e-9),
    computes lambda = (sum of facet areas) / (sum of a_i e^{p u_i}), and
    returns (lambda, max_i |e^{-p u_i} S_i - lambda a_i| / (lambda a_i)).
    The polytope need not be even: certifying that a perturbed body is
    NOT optimal for an even measure is a supported use.
    """
    if not measure.even:
        raise NotEvenError("residual is defined for even measures")

    dirs = poly.spec.directions
    idx = []
    for k in range(measure.count):
        gaps = np.linalg.norm(dirs - measure.directions[k][None, :], axis=1)
        j = int(np.argmin(gaps))
        if gaps[j] > 1e-9:
            raise MismatchedDirectionsError(
                f"measure atom {k} has no matching facet direction"
            )
        idx.append(j)
    if len(set(idx)) != len(idx):
        raise MismatchedDirectionsError("two atoms matched the same facet direction")
    areas = np.array([facet_area(poly, j) for j in idx])
    u = poly.canonical_support[idx]
    weights = measure.weights
    denom = float(np.sum(weights * np.exp(p * u)))
    lam = float(np.sum(areas)) / denom
    if lam <= 0.0:
        return 0.0, math.inf
    atoms = np.exp(-p * u) * areas
    rel = np.abs(atoms - lam * weights) / (lam * weights)
    return lam, float(np.max(rel))


@dataclass
class SolverConfig:
    """Knobs for solve_even; defaults suit small n = 1 instances."""

    p: float
    v0: float = 1.0
    tol: float = 1e-3
    max_iters: int = 200
    step: float = 0.25
    backtrack: float = 0.5
    min_step: float = 1e-12
    gradient_mode: str = "direct"
    fd_delta: float = 1e-4
    quad_count: int | None = None
    quad_kind: str | None = None
    seed: int = 0
    grad_check_every: int = 10

    def __post_init__(self):
        if self.gradient_mode not in ("direct", "fd"):
            raise ValueError("gradient_mode must be 'direct' or 'fd'")
        if self.tol <= 0 or self.max_iters < 0 or not (0 < self.backtrack < 1):
            raise ValueError("invalid solver configuration")
        if self.p < 0 and self.v0 <= 0:
            raise ValueError("p < 0 runs need a positive target volume")


@dataclass
class SolverResult:
    polytope: HConvexPolytope
    z: np.ndarray
    lam: float
    residual_max_rel: float
    objective_trace: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    gradient_check_max_rel: float = 0.0


class _Iterate:
    """Built body plus the quantities the loop needs, evaluated once."""

    __slots__ = ("z", "poly", "areas", "u", "lam", "res", "vol", "phi")

    def __init__(self, z, poly, areas, u, lam, res, vol, phi):
        self.z = z
        self.poly = poly
        self.areas = areas
        self.u = u
        self.lam = lam
        self.res = res
        self.vol = vol
        self.phi = phi


def solve_even(measure: DiscreteMeasure, config: SolverConfig) -> SolverResult:
    """Scales solving the even p-Minkowski system for the given measure.

    Returns the best iterate with converged=False when the residual never
    reaches config.tol; callers decide how to treat that (the command line
    front end exits with a dedicated code).
    """
    if not measure.even:
        raise NotEvenError("solve_even needs an even measure")
    reduced_dirs, reduced_w = measure.reduced_pairs()
    m = reduced_dirs.shape[0]
    if m < 2:
        raise SpecError("need at least two direction pairs to optimize")
    n = measure.n
    p = config.p
    rule = build_quadrature(n, config.quad_count, config.quad_kind, config.seed)
    full_dirs = np.vstack([reduced_dirs, -reduced_dirs])
    full_w = np.concatenate([reduced_w, reduced_w])
    spec_template = PolytopeSpec(
        n=n, directions=full_dirs, x=np.ones(2 * m), even=True
    )
    z_cap = boundedness_bound(config.v0, n) if p < 0.0 else math.inf
    maximizing = p >= 0.0

    def build(z: np.ndarray) -> HConvexPolytope:
        spec = PolytopeSpec(n=n, directions=full_dirs, x=np.concatenate([z, z]), even=True)
        return build_polytope(spec, scan=rule)

    def rescaled(z: np.ndarray) -> np.ndarray:
        if maximizing:
            t = rescale_to_constraint(np.concatenate([z, z]), full_w, p, 1.0, mode="phi")
        else:
            t = rescale_to_constraint(
                np.concatenate([z, z]), full_w, p, config.v0,
                mode="volume", spec=spec_template, rule=rule,
            )
        return z * t

    def canonical(z: np.ndarray) -> np.ndarray:
        fixed = canonicalize(build(z))
        return np.array(fixed.x[:m])

    def project(z: np.ndarray) -> np.ndarray:
        z = np.clip(z, _Z_FLOOR, z_cap)
        z = rescaled(z)
        z = canonical(z)
        return rescaled(z)

    def evaluate(z: np.ndarray) -> _Iterate:
        poly = build(z)
        areas = np.array([facet_area(poly, i) for i in range(m)])
        u = np.array(poly.canonical_support[:m])
        denom = float(np.sum(reduced_w * np.exp(p * u)))
        lam = float(np.sum(areas)) / denom
        if lam > 0.0:
            rel = np.abs(np.exp(-p * u) * areas - lam * reduced_w) / (lam * reduced_w)
            res = float(np.max(rel))
        else:
            res = math.inf
        vol = volume(poly)
        phi = phi_p(np.concatenate([z, z]), full_w, p)
        return _Iterate(z, poly, areas, u, lam, res, vol, phi)

    def objective(it: _Iterate) -> float:
        return it.vol if maximizing else it.phi

    def gradient(it: _Iterate) -> tuple[np.ndarray, np.ndarray]:
        """(objective gradient, constraint gradient) in the reduced scales."""
        phi_grad = 2.0 * reduced_w * np.exp(p * it.z)
        if config.gradient_mode == "direct":
            vol_grad = 2.0 * it.areas
        else:
            vol_grad = np.array(
                [
                    facet_area_fd(it.poly, i, delta=config.fd_delta)
                    + facet_area_fd(it.poly, m + i, delta=config.fd_delta)
                    for i in range(m)
                ]
            )
        return (vol_grad, phi_grad) if maximizing else (-phi_grad, vol_grad)

    current = evaluate(project(np.ones(m)))
    trace = [objective(current)]
    best = current
    step = config.step
    iterations = 0
    converged = False
    grad_check_worst = 0.0

    while True:
        if current.res <= config.tol:
            converged = True
            break
        if iterations >= config.max_iters:
            break
        g, h = gradient(current)
        hh = float(np.dot(h, h))
        d = g - (float(np.dot(g, h)) / hh) * h if hh > 0 else g
        norm = float(np.linalg.norm(d))
        if norm < 1e-15:
            break
        d /= norm
        accepted = None
        while step >= config.min_step:
            trial = evaluate(project(current.z + step * d))
            gain = objective(trial) - objective(current)
            if (gain > 1e-15) if maximizing else (gain < -1e-15):
                accepted = trial
                break
            step *= config.backtrack
        if accepted is None:
            break
        current = accepted
        iterations += 1
        trace.append(objective(current))
        if np.any(current.z <= 2.0 * _Z_FLOOR):
            logger.warning("an accepted iterate sits at the zero-scale boundary")
        if math.isfinite(z_cap) and np.any(current.z >= 0.999 * z_cap):
            logger.warning("support-bound safeguard is active on an accepted iterate")
        if current.res < best.res:
            best = current
        step = min(step / config.backtrack, 4.0 * config.step)
        if config.gradient_mode == "direct" and iterations % config.grad_check_every == 0:
            direct = 2.0 * current.areas
            fd = np.array(
                [
                    facet_area_fd(current.poly, i, delta=config.fd_delta)
                    + facet_area_fd(current.poly, m + i, delta=config.fd_delta)
                    for i in range(m)
                ]
            )
            scale = np.maximum(np.abs(direct), 1e-9)
            worst = float(np.max(np.abs(direct - fd) / scale))
            grad_check_worst = max(grad_check_worst, worst)
            if worst > 1e-3:
                logger.warning("direct and finite-difference gradients disagree: %.3g", worst)

    final = current if converged else best
    return SolverResult(
        polytope=final.poly,
        z=final.z,
        lam=final.lam,
        residual_max_rel=final.res,
        objective_trace=trace,
        iterations=iterations,
        converged=converged,
        gradient_check_max_rel=grad_check_worst,
    )
