import math

import numpy as np
import pytest
from scipy.integrate import quad

from horomink.quadrature import (
    SphereQuadrature,
    build_quadrature,
    sinh_power_integral,
    sphere_area,
    unit_ball_volume,
)

# integral of sinh^3 from 0 to log 2, closed form (45/64 - 1/2) / 3
SINH3_AT_LOG2 = 13.0 / 192.0


def test_sphere_area_values():
    assert sphere_area(1) == pytest.approx(2.0 * math.pi, abs=1e-14)
    assert sphere_area(2) == pytest.approx(4.0 * math.pi, abs=1e-14)
    assert sphere_area(3) == pytest.approx(2.0 * math.pi**2, abs=1e-12)


def test_unit_ball_volume_values():
    assert unit_ball_volume(1) == pytest.approx(2.0, abs=1e-14)
    assert unit_ball_volume(2) == pytest.approx(math.pi, abs=1e-14)
    assert unit_ball_volume(3) == pytest.approx(4.0 * math.pi / 3.0, abs=1e-14)


def test_default_rules_per_dimension():
    assert build_quadrature(1).kind == "uniform-grid"
    assert build_quadrature(1).count == 4096
    assert build_quadrature(2).kind == "product-rule"
    assert build_quadrature(2).count == 16384
    assert build_quadrature(3).kind == "monte-carlo"


def test_weights_sum_to_sphere_area():
    for n, kind in ((1, "uniform-grid"), (2, "product-rule"), (2, "monte-carlo"), (4, "monte-carlo")):
        q = build_quadrature(n, 2000, kind)
        assert float(np.sum(q.weights)) == pytest.approx(sphere_area(n), abs=1e-8)
        assert np.all(q.weights > 0)


def test_nodes_are_unit():
    for n in (1, 2, 3):
        q = build_quadrature(n, 512)
        assert np.max(np.abs(np.linalg.norm(q.nodes, axis=1) - 1.0)) < 1e-12


def test_monte_carlo_weights_equal():
    q = build_quadrature(2, 1000, "monte-carlo", seed=5)
    assert np.all(q.weights == q.weights[0])
    assert q.weights[0] == pytest.approx(4.0 * math.pi / 1000.0, abs=1e-15)


def test_monte_carlo_deterministic_and_seed_sensitive():
    a = build_quadrature(3, 800, "monte-carlo", seed=11)
    b = build_quadrature(3, 800, "monte-carlo", seed=11)
    c = build_quadrature(3, 800, "monte-carlo", seed=12)
    assert np.array_equal(a.nodes, b.nodes)
    assert not np.array_equal(a.nodes, c.nodes)


def test_quadratic_moment_exact_for_structured_rules():
    for n in (1, 2):
        q = build_quadrature(n)
        est = q.integrate(q.nodes[:, 0] ** 2)
        assert est == pytest.approx(sphere_area(n) / (n + 1), abs=1e-10)


def test_kind_dimension_mismatch_rejected():
    with pytest.raises(ValueError):
        build_quadrature(2, 100, "uniform-grid")
    with pytest.raises(ValueError):
        build_quadrature(1, 100, "product-rule")
    with pytest.raises(ValueError):
        build_quadrature(1, 100, "lattice")
    with pytest.raises(ValueError):
        build_quadrature(0, 100)


def test_quadrature_field_validation():
    nodes = np.array([[1.0, 0.0], [0.0, 2.0]])
    with pytest.raises(ValueError):
        SphereQuadrature(1, nodes, np.array([math.pi, math.pi]), "uniform-grid")
    good = np.array([[1.0, 0.0], [-1.0, 0.0]])
    with pytest.raises(ValueError):
        SphereQuadrature(1, good, np.array([1.0, 1.0]), "uniform-grid")


def test_sinh_power_low_orders():
    rho = 1.3
    assert sinh_power_integral(0, rho) == pytest.approx(rho, abs=1e-15)
    assert sinh_power_integral(1, rho) == pytest.approx(math.cosh(rho) - 1.0, abs=1e-14)
    want2 = (math.sinh(rho) * math.cosh(rho) - rho) / 2.0
    assert sinh_power_integral(2, rho) == pytest.approx(want2, abs=1e-14)


def test_sinh_power_golden_third_order():
    assert sinh_power_integral(3, math.log(2.0)) == pytest.approx(SINH3_AT_LOG2, abs=1e-12)


def test_sinh_power_matches_adaptive_quadrature():
    for n in range(6):
        for rho in (0.25, 1.0, 2.3):
            want = quad(lambda r: math.sinh(r) ** n, 0.0, rho, epsabs=1e-13, epsrel=1e-13)[0]
            assert sinh_power_integral(n, rho) == pytest.approx(want, abs=1e-10)


def test_sinh_power_derivative_property():
    # d/drho I_n = sinh^n rho, checked by central differences.
    h = 1e-6
    for n in (1, 2, 3, 4):
        for rho in (0.5, 1.5):
            fd = (sinh_power_integral(n, rho + h) - sinh_power_integral(n, rho - h)) / (2 * h)
            assert fd == pytest.approx(math.sinh(rho) ** n, rel=1e-6)


def test_sinh_power_array_input_and_validation():
    out = sinh_power_integral(2, np.array([0.0, 1.0, 2.0]))
    assert out.shape == (3,) and out[0] == 0.0
    with pytest.raises(ValueError):
        sinh_power_integral(1, -0.5)
    with pytest.raises(ValueError):
        sinh_power_integral(-1, 0.5)


def test_geodesic_disc_area_golden():
    # Area of a hyperbolic disc of radius R in H^2: 2 pi (cosh R - 1).
    q = build_quadrature(1)
    for R in (0.7, 1.9):
        est = q.integrate(np.full(q.count, sinh_power_integral(1, R)))
        assert est == pytest.approx(2.0 * math.pi * (math.cosh(R) - 1.0), rel=1e-12)
