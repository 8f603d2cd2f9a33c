"""Constraint functional, rescaling, optimality residual, and the
projected-gradient solver on small even instances."""

import math

import numpy as np
import pytest

from horomink import (
    DiscreteMeasure,
    MismatchedDirectionsError,
    NotEvenError,
    PolytopeSpec,
    SolverConfig,
    SpecError,
    UnreachableTargetError,
    boundedness_bound,
    build_polytope,
    canonicalize,
    facet_area,
    phi_p,
    rescale_to_constraint,
    residual,
    solve_even,
    volume,
)
from horomink.quadrature import build_quadrature

LOG2 = math.log(2.0)


def cross_measure() -> DiscreteMeasure:
    """Symmetric four-direction instance: +-(1,0), +-(0,1), unit weights."""
    return DiscreteMeasure.from_even_pairs(
        np.array([[1.0, 0.0], [0.0, 1.0]]), np.array([1.0, 1.0])
    )


def random_even_measure(rng, m: int) -> DiscreteMeasure:
    while True:
        ang = np.sort(rng.uniform(0.0, math.pi, size=m))
        if np.min(np.diff(np.concatenate([ang, [ang[0] + math.pi]]))) > 0.25:
            break
    dirs = np.column_stack([np.cos(ang), np.sin(ang)])
    return DiscreteMeasure.from_even_pairs(dirs, rng.uniform(0.4, 2.5, size=m))


def lens_polytope(x1: float, x2: float, even: bool = False):
    spec = PolytopeSpec(
        n=1,
        directions=np.array([[1.0, 0.0], [-1.0, 0.0]]),
        x=np.array([x1, x2]),
        even=even,
    )
    return build_polytope(spec)


# ----------------------------------------------------------- constraint value

def test_phi_p_paired_single_atom():
    x = np.array([3.0, 3.0])
    w = np.array([1.0, 1.0])
    assert phi_p(x, w, 0.0) == 6.0
    assert phi_p(x, w, 1.0) == pytest.approx(2.0 * (math.exp(3.0) - 1.0), rel=1e-14)


def test_phi_p_zero_and_monotone():
    w = np.array([0.5, 1.5, 0.5, 1.5])
    for p in (-2.0, -1.0, 0.0, 1.0, 3.0):
        assert phi_p(np.zeros(4), w, p) == 0.0
        x = np.array([0.3, 0.8, 0.3, 0.8])
        for k in range(4):
            bumped = x.copy()
            bumped[k] += 0.1
            assert phi_p(bumped, w, p) > phi_p(x, w, p)


def test_phi_p_negative_p_bounded():
    w = np.array([1.0, 1.0])
    assert phi_p(np.array([50.0, 50.0]), w, -1.0) == pytest.approx(2.0, abs=1e-8)
    assert phi_p(np.array([700.0, 700.0]), w, -1.0) <= 2.0


def test_phi_p_continuous_at_zero():
    x = np.array([0.3, 0.7, 0.3, 0.7])
    w = np.array([1.0, 2.0, 1.0, 2.0])
    at0 = phi_p(x, w, 0.0)
    p = 1e-6
    # one-sided gap obeys the first-order remainder bound
    remainder = 0.5 * p * float(np.sum(w * x * x * np.exp(p * x)))
    assert abs(phi_p(x, w, p) - at0) <= remainder * 1.001
    # symmetrized average kills the linear term
    sym = 0.5 * (phi_p(x, w, p) + phi_p(x, w, -p))
    assert abs(sym - at0) <= 1e-8


def test_phi_p_shape_mismatch():
    with pytest.raises(SpecError):
        phi_p(np.array([1.0, 2.0]), np.array([1.0]), 0.0)


# -------------------------------------------------------------------- rescale

def test_rescale_identity_on_target():
    x = np.array([0.4, 0.9, 0.4, 0.9])
    w = np.array([1.0, 2.0, 1.0, 2.0])
    target = phi_p(x, w, 1.0)
    t = rescale_to_constraint(x, w, 1.0, target)
    assert abs(t - 1.0) <= 1e-6
    assert abs(phi_p(t * x, w, 1.0) - target) <= 1e-8


def test_rescale_p0_linear_exact():
    x = np.array([0.4, 0.9])
    w = np.array([1.0, 2.0])
    t = rescale_to_constraint(x, w, 0.0, 1.0)
    assert t == 1.0 / phi_p(x, w, 0.0)
    assert phi_p(t * x, w, 0.0) == pytest.approx(1.0, abs=1e-15)


def test_rescale_negative_p_unreachable():
    x = np.array([1.0, 1.0])
    w = np.array([1.0, 1.0])
    # supremum of Phi_{-1} is sum(w) = 2
    with pytest.raises(UnreachableTargetError):
        rescale_to_constraint(x, w, -1.0, 2.0)
    with pytest.raises(UnreachableTargetError):
        rescale_to_constraint(x, w, -1.0, 5.0)
    t = rescale_to_constraint(x, w, -1.0, 1.9)
    assert abs(phi_p(t * x, w, -1.0) - 1.9) <= 1e-8


def test_rescale_volume_mode():
    spec = PolytopeSpec(
        n=1,
        directions=np.array([[1.0, 0.0], [-1.0, 0.0]]),
        x=np.array([1.0, 1.0]),
        even=True,
    )
    rule = build_quadrature(1)
    x = np.array([1.0, 1.0])
    t = rescale_to_constraint(x, None, 0.0, 1.0, mode="volume", spec=spec, rule=rule)
    scaled = build_polytope(spec.with_x(t * x), scan=rule)
    assert volume(scaled) == pytest.approx(1.0, rel=1e-5)


def test_rescale_rejects_bad_input():
    x = np.array([1.0, 1.0])
    w = np.array([1.0, 1.0])
    with pytest.raises(SpecError):
        rescale_to_constraint(np.array([1.0, 0.0]), w, 0.0, 1.0)
    with pytest.raises(UnreachableTargetError):
        rescale_to_constraint(x, w, 0.0, -1.0)
    with pytest.raises(ValueError):
        rescale_to_constraint(x, w, 0.0, 1.0, mode="bogus")
    with pytest.raises(SpecError):
        rescale_to_constraint(x, w, 0.0, 1.0, mode="volume")


# ------------------------------------------------------------------- residual

def test_residual_lens_is_exact():
    mu = DiscreteMeasure.from_even_pairs(np.array([[1.0, 0.0]]), np.array([0.7]))
    for p in (0.0, 1.3, -0.8):
        poly = lens_polytope(LOG2, LOG2, even=True)
        lam, rel = residual(poly, mu, p)
        assert lam > 0.0
        assert rel <= 1e-9


def test_residual_perturbed_lens_is_positive():
    mu = DiscreteMeasure.from_even_pairs(np.array([[1.0, 0.0]]), np.array([1.0]))
    lam, rel = residual(lens_polytope(0.6, 0.9), mu, 1.0)
    assert lam > 0.0
    assert rel > 1e-3


def test_residual_mismatched_directions():
    mu = DiscreteMeasure.from_even_pairs(np.array([[0.0, 1.0]]), np.array([1.0]))
    with pytest.raises(MismatchedDirectionsError):
        residual(lens_polytope(LOG2, LOG2, even=True), mu, 0.0)


def test_residual_needs_even_measure():
    mu = DiscreteMeasure(
        n=1,
        directions=np.array([[1.0, 0.0], [-1.0, 0.0]]),
        weights=np.array([1.0, 2.0]),
    )
    with pytest.raises(NotEvenError):
        residual(lens_polytope(LOG2, LOG2, even=True), mu, 0.0)


# ---------------------------------------------------------------------- solve

def test_solve_symmetric_p0():
    result = solve_even(cross_measure(), SolverConfig(p=0.0))
    assert result.converged
    assert result.residual_max_rel <= 1e-3
    assert np.allclose(result.z, 0.25, atol=1e-4)
    # symmetric instance is solved by the feasible symmetric start
    assert result.iterations == 0
    assert result.lam == pytest.approx(0.46341253694602275, rel=1e-9)
    full = np.concatenate([result.z, result.z])
    assert phi_p(full, np.ones(4), 0.0) == pytest.approx(1.0, abs=1e-8)


def test_solve_symmetric_p2():
    result = solve_even(cross_measure(), SolverConfig(p=2.0))
    assert result.converged
    assert abs(result.z[0] - result.z[1]) <= 1e-6
    full = np.concatenate([result.z, result.z])
    assert phi_p(full, np.ones(4), 2.0) == pytest.approx(1.0, abs=1e-8)
    # trace is non-decreasing for the maximizing branch
    trace = np.array(result.objective_trace)
    assert np.all(np.diff(trace) >= -1e-12)
    # evenness of the solution body: paired facets carry equal area
    poly = result.polytope
    for i in range(2):
        assert abs(facet_area(poly, i) - facet_area(poly, i + 2)) <= 1e-6
    # admissibility: canonicalize is a fixed point
    fixed = canonicalize(poly)
    assert np.allclose(fixed.x, poly.spec.x, atol=1e-7)


def test_solve_asymmetric_p0_matches_grid_oracle():
    from horomink.oracle import grid_search_even

    mu = DiscreteMeasure.from_even_pairs(
        np.array([[1.0, 0.0], [math.cos(1.1), math.sin(1.1)]]),
        np.array([1.0, 1.7]),
    )
    result = solve_even(mu, SolverConfig(p=0.0))
    assert result.converged
    z_grid = grid_search_even(mu, 0.0, resolution=400)
    assert np.max(np.abs(result.z - z_grid)) <= 0.01
    # solver's volume is at least the best grid volume, up to grid slack
    spec = PolytopeSpec(
        n=1,
        directions=np.vstack([mu.reduced_pairs()[0], -mu.reduced_pairs()[0]]),
        x=np.concatenate([z_grid, z_grid]),
        even=True,
    )
    v_grid = volume(build_polytope(spec))
    assert volume(result.polytope) >= v_grid - 1e-6


def test_solve_p_negative_random():
    rng = np.random.Generator(np.random.Philox(42))
    mu = random_even_measure(rng, 3)
    cfg = SolverConfig(p=-1.0, v0=1.0)
    result = solve_even(mu, cfg)
    assert result.converged
    assert result.residual_max_rel <= 1e-2
    assert volume(result.polytope) == pytest.approx(1.0, rel=1e-3)
    trace = np.array(result.objective_trace)
    assert np.all(np.diff(trace) <= 1e-12)
    assert float(np.max(result.z)) <= boundedness_bound(1.0 * 1.01, 1) + 1e-9
    # certificate ties the measure to the solution's surface atoms
    lam, rel = residual(result.polytope, mu, -1.0)
    assert rel <= 1e-2
    assert lam == pytest.approx(result.lam, rel=1e-9)


def test_solve_fd_gradient_mode():
    result = solve_even(cross_measure(), SolverConfig(p=2.0, gradient_mode="fd"))
    assert result.converged
    assert abs(result.z[0] - result.z[1]) <= 1e-6


def test_solve_rejections():
    with pytest.raises(NotEvenError):
        solve_even(
            DiscreteMeasure(
                n=1,
                directions=np.array([[1.0, 0.0], [0.0, 1.0]]),
                weights=np.array([1.0, 1.0]),
            ),
            SolverConfig(p=0.0),
        )
    single = DiscreteMeasure.from_even_pairs(np.array([[1.0, 0.0]]), np.array([1.0]))
    with pytest.raises(SpecError):
        solve_even(single, SolverConfig(p=0.0))


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(p=0.0, gradient_mode="bogus")
    with pytest.raises(ValueError):
        SolverConfig(p=0.0, tol=0.0)
    with pytest.raises(ValueError):
        SolverConfig(p=0.0, backtrack=1.0)
    with pytest.raises(ValueError):
        SolverConfig(p=-1.0, v0=0.0)


def test_solver_result_consistency():
    result = solve_even(cross_measure(), SolverConfig(p=2.0))
    assert np.allclose(result.polytope.spec.x[:2], result.z)
    assert len(result.objective_trace) == result.iterations + 1
