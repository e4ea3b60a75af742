import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from unischlesinger.errors import (
    DealiasingError,
    OnContourError,
    ResolutionError,
    ShapeError,
    SingularNodeError,
)
from unischlesinger.fourier_circle import (
    CauchySide,
    Loop,
    analyze,
    cauchy_eval,
    cauchy_project,
    constant,
    contour_integral,
    continuous_log,
    derivative,
    from_function,
    grid_nodes,
    grid_size,
    hilbert_transform,
    monomial,
    multiply,
    synthesize,
    winding_number,
)

SIGMA = np.array([[0, 1], [0, 0]], dtype=complex)


def random_loop(seed, N=2, M=6, decay=0.5):
    r = np.random.default_rng(seed)
    c = r.standard_normal((2 * M + 1, N, N)) + 1j * r.standard_normal((2 * M + 1, N, N))
    c *= decay ** np.abs(np.arange(-M, M + 1))[:, None, None]
    return Loop(c)


seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


# ---------------------------------------------------------------- grid, analyze, synthesize

def test_grid_size_is_power_of_two_above_twice_band():
    assert grid_size(16) == 128
    assert grid_size(1) == 8
    assert grid_size(0) == 2


def test_analyze_constant_and_pure_mode():
    K = 32
    f = analyze(np.tile(np.eye(2), (K, 1, 1)), 8)
    assert np.allclose(f.coeff(0), np.eye(2), atol=1e-15)
    assert np.max(np.abs(np.delete(f.coeffs, 8, axis=0))) < 1e-15

    g = analyze(grid_nodes(K) ** 2, 8)
    expected = np.zeros(17)
    expected[8 + 2] = 1
    assert np.allclose(g.coeffs[:, 0, 0], expected, atol=1e-15)


def test_exp_taylor_coefficients():
    beta = 0.3
    f = from_function(lambda x: np.exp(beta * x), 1, 16)
    for k in range(17):
        assert abs(f.coeff(k)[0, 0] - beta ** k / math.factorial(k)) < 1e-12
    assert np.max(np.abs(f.coeffs[:16])) < 1e-12


def test_analyze_reports_dropped_modes_as_residue():
    K = 32
    f = analyze(grid_nodes(K) ** 5, 3)
    assert f.residue == pytest.approx(1.0)
    assert np.max(np.abs(f.coeffs)) < 1e-15


def test_analyze_rejects_coarse_grid():
    with pytest.raises(ShapeError):
        analyze(np.ones(8), 4)


def test_synthesize_examples():
    assert np.allclose(synthesize(constant(np.eye(2)), np.array([0.3 + 2j])), np.eye(2))
    assert synthesize(monomial(1), np.array([1j]))[0, 0, 0] == pytest.approx(1j)


def test_round_trip_on_exponential():
    g = lambda x: np.exp(0.3 * x + 0.2 / x)
    f = from_function(g, 1, 24)
    xs = grid_nodes(f.K)
    assert np.max(np.abs(f.samples[:, 0, 0] - g(xs))) < 1e-12
    # direct summation route agrees off the grid
    ys = np.exp(1j * np.linspace(0, 6, 11))
    assert np.max(np.abs(f(ys)[:, 0, 0] - g(ys))) < 1e-12


def test_with_cutoff_moves_truncated_mass_to_residue():
    f = Loop(np.arange(1, 8, dtype=complex))
    g = f.with_cutoff(1)
    assert g.M == 1
    assert g.residue == pytest.approx(7.0)
    assert np.allclose(g.with_cutoff(3).coeffs[:, 0, 0], [0, 0, 3, 4, 5, 0, 0])


def test_loop_shape_validation():
    with pytest.raises(ShapeError):
        Loop(np.zeros((4, 2, 2)))
    with pytest.raises(ShapeError):
        Loop(np.zeros((3, 2, 3)))


# ---------------------------------------------------------------- derivative

def test_derivative_examples():
    assert np.max(np.abs(derivative(constant(np.eye(2), M=3)).coeffs)) == 0
    d = derivative(monomial(2, M=4))
    assert d.coeff(1)[0, 0] == 2
    beta = 0.3
    f = from_function(lambda x: np.exp(beta * x), 1, 24)
    xs = grid_nodes(f.K)
    assert np.max(np.abs(derivative(f).samples[:, 0, 0] - beta * np.exp(beta * xs))) < 1e-12


@given(seeds)
def test_contour_integral_of_derivative_vanishes(seed):
    f = random_loop(seed)
    assert np.max(np.abs(contour_integral(derivative(f)))) < 1e-12


# ---------------------------------------------------------------- multiply

def test_multiply_examples():
    f = random_loop(0)
    I = constant(np.eye(2), M=0)
    assert f.coefficient_error(multiply(f, I)) < 1e-14
    p = multiply(monomial(1, np.eye(2), M=1), monomial(-1, np.eye(2), M=1))
    assert p.coefficient_error(constant(np.eye(2), M=1)) < 1e-15

    a = Loop(np.stack([-SIGMA, np.eye(2), 0 * SIGMA]))
    b = Loop(np.stack([0 * SIGMA, np.eye(2), SIGMA]))
    expected = Loop(np.stack([-SIGMA, np.eye(2), SIGMA]))
    assert multiply(a, b).coefficient_error(expected) < 1e-15


def test_multiply_rejects_aliasing_grid():
    with pytest.raises(DealiasingError):
        multiply(random_loop(1, M=4), random_loop(2, M=4), K=16)


@given(seeds, seeds)
def test_product_rule(s1, s2):
    # pad by one mode so d/dxi loses nothing below the cutoff
    a, b = random_loop(s1, M=5).with_cutoff(6), random_loop(s2, M=5).with_cutoff(6)
    lhs = derivative(multiply(a, b, M=11))
    rhs = multiply(derivative(a), b, M=11) + multiply(a, derivative(b), M=11)
    assert lhs.coefficient_error(rhs) < 1e-11


# ---------------------------------------------------------------- Cauchy operators

def test_projector_examples():
    f = monomial(2, M=3)
    assert cauchy_project(f, CauchySide.PLUS).coefficient_error(f) == 0
    assert np.max(np.abs(cauchy_project(f, CauchySide.MINUS).coeffs)) == 0
    g = monomial(-3, M=3)
    assert np.max(np.abs(cauchy_project(g, CauchySide.PLUS).coeffs)) == 0
    assert cauchy_project(g, CauchySide.MINUS).coefficient_error(-g) == 0
    c = constant(np.eye(2) * 2.5, M=2)
    assert cauchy_project(c, CauchySide.PLUS).coefficient_error(c) == 0


@pytest.mark.parametrize("k", range(-5, 6))
def test_monomial_projector_table(k):
    # residue calculus: C+ xi^k = xi^k for k >= 0, C- xi^k = -xi^k for k < 0
    f = monomial(k, M=5)
    plus = cauchy_project(f, CauchySide.PLUS)
    minus = cauchy_project(f, CauchySide.MINUS)
    if k >= 0:
        assert plus.coefficient_error(f) == 0 and np.all(minus.coeffs == 0)
    else:
        assert minus.coefficient_error(-f) == 0 and np.all(plus.coeffs == 0)


@given(seeds)
def test_plemelj_jump_and_sum(seed):
    f = random_loop(seed)
    plus, minus = cauchy_project(f, CauchySide.PLUS), cauchy_project(f, CauchySide.MINUS)
    assert np.array_equal((plus - minus).coeffs, f.coeffs)
    assert np.array_equal((plus + minus).coeffs, hilbert_transform(f).coeffs)


def _pv_hilbert(g, u_theta):
    """``(1/i pi) PV int g(xi)/(xi - u) dxi`` by singularity subtraction and adaptive quadrature."""
    u = np.exp(1j * u_theta)
    gu = g(u)

    def integrand(t):
        xi = np.exp(1j * t)
        if abs(t - u_theta) < 1e-12:
            # limit of (g(xi) - g(u))/(xi - u) * i xi is i xi g'(u); g' by a tiny difference
            eps = 1e-7
            return 1j * xi * (g(u * np.exp(1j * eps)) - g(u * np.exp(-1j * eps))) / (u * (np.exp(1j * eps) - np.exp(-1j * eps)))
        return (g(xi) - gu) / (xi - u) * 1j * xi

    re = quad(lambda t: integrand(t).real, 0, 2 * np.pi, points=[u_theta], limit=200)[0]
    im = quad(lambda t: integrand(t).imag, 0, 2 * np.pi, points=[u_theta], limit=200)[0]
    # PV int dxi/(xi - u) = i pi
    return gu + (re + 1j * im) / (1j * np.pi)


def test_hilbert_transform_against_principal_value_quadrature():
    g = lambda x: np.exp(0.3 * x + 0.2 / x) + 0.5 / (x - 3)
    f = from_function(g, 1, 32)
    H = hilbert_transform(f)
    for th in (0.3, 1.7, 4.0):
        val = H(np.array([np.exp(1j * th)]))[0, 0, 0]
        assert abs(val - _pv_hilbert(g, th)) < 1e-8


# ---------------------------------------------------------------- Cauchy integral off the circle

def test_cauchy_eval_examples():
    f = monomial(-1, M=2)
    assert cauchy_eval(f, 0.5)[0, 0] == 0
    assert cauchy_eval(f, 2.0)[0, 0] == pytest.approx(-0.5)
    assert cauchy_eval(constant(1.0, M=2), 0)[0, 0] == 1
    assert cauchy_eval(monomial(2, M=2), 2.0)[0, 0] == 0
    assert np.all(cauchy_eval(f, np.inf) == 0)


def test_cauchy_eval_routes_agree():
    f = from_function(lambda x: np.exp(0.3 * x + 0.2 / x), 1, 32)
    for x in (0.0, 0.5, 0.3 + 0.4j, 2.0, -10.0):
        a = cauchy_eval(f, x, route="series")
        b = cauchy_eval(f, x, route="quadrature")
        assert np.max(np.abs(a - b)) < 1e-9


def test_cauchy_eval_rejects_contour_points():
    with pytest.raises(OnContourError):
        cauchy_eval(monomial(1), 1j)


# ---------------------------------------------------------------- contour integral, winding

def test_contour_integral_examples():
    assert contour_integral(monomial(-1))[0, 0] == pytest.approx(2j * np.pi)
    for n in (-3, 0, 2):
        assert contour_integral(monomial(n, M=3))[0, 0] == 0
    f = Loop(np.stack([SIGMA, 0 * SIGMA, SIGMA, 0 * SIGMA, 0 * SIGMA]))
    assert np.all(contour_integral(f) == 0)


def test_winding_number_examples():
    assert winding_number(constant(1.0, M=2)) == 0
    assert winding_number(monomial(1)) == 1
    assert winding_number(monomial(-2, M=2)) == -2
    g = from_function(lambda x: np.exp(0.3 * x + 0.2 / x), 1, 16)
    assert winding_number(g) == 0


def test_winding_number_errors():
    with pytest.raises(SingularNodeError):
        winding_number(np.zeros(8))
    with pytest.raises(ResolutionError):
        winding_number(grid_nodes(8) ** 3)


def test_continuous_log_is_continuous_for_zero_winding():
    g = np.exp(0.8 * np.sin(3 * np.linspace(0, 2 * np.pi, 64, endpoint=False)) * 1j) * 2
    lg = continuous_log(g)
    assert np.allclose(np.exp(lg), g)
    assert np.max(np.abs(np.diff(lg.imag))) < 0.5
