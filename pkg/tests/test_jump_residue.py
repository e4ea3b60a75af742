import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from unischlesinger.birkhoff import factorize
from unischlesinger.errors import IndexWindowError, OnContourError, ShapeError
from unischlesinger.families import (
    identity_loop,
    scalar_exponential,
    unipotent_factors,
    unipotent_loop,
)
from unischlesinger.fourier_circle import Loop, grid_nodes
from unischlesinger.jump_residue import (
    CoefficientTable,
    SlowConvergenceWarning,
    compute_jump_density,
    eval_field,
    eval_field_dx,
    eval_omega,
    eval_omega_dx,
    field_from_factor,
    fourier_coefficients_B,
)

SIGMA = np.array([[0, 1], [0, 0]], dtype=complex)
X = -SIGMA
ALPHA, BETA = 0.2, 0.3

# 40-digit oracle (scripts/oracle_values.py); every other |B_n| is below 1e-27
ORACLE_B1 = 0.1960937239114556 * SIGMA.T
ORACLE_Bm1 = -0.31214482560599366 * SIGMA


def manufactured_table(N_B=4):
    return CoefficientTable.from_dict({1: X, -1: X}, 2, N_B)


@pytest.fixture(scope="module")
def family_data(test_loop):
    pair = factorize(test_loop, 64)
    A = compute_jump_density(pair.Yminus, test_loop, 64)
    return pair, A, fourier_coefficients_B(A, 16)


# ---------------------------------------------------------------- density and coefficients

def test_density_examples():
    G = identity_loop(2, 4)
    assert np.max(np.abs(compute_jump_density(identity_loop(2, 4), G).coeffs)) == 0

    _, ym = unipotent_factors(4)
    A = compute_jump_density(ym, unipotent_loop(4))
    expected = Loop(np.stack([0 * X] * 2 + [SIGMA, 0 * X, SIGMA] + [0 * X] * 4))
    assert A.coefficient_error(expected) < 1e-15

    g = scalar_exponential(ALPHA, BETA, 16)
    pair = factorize(g)
    A = compute_jump_density(pair.Yminus, g)
    xs = grid_nodes(64)
    assert np.max(np.abs(A(xs)[:, 0, 0] - (BETA - ALPHA / xs ** 2))) < 1e-13


def test_density_shape_mismatch():
    with pytest.raises(ShapeError):
        compute_jump_density(identity_loop(1, 2), identity_loop(2, 2))


def test_coefficient_examples():
    zero = Loop(np.zeros((9, 2, 2)))
    assert np.all(fourier_coefficients_B(zero, 3).mats == 0)

    _, ym = unipotent_factors(8)
    t = fourier_coefficients_B(compute_jump_density(ym, unipotent_loop(8)), 4)
    for n in t.indices:
        expected = X if abs(n) == 1 else 0 * X
        assert np.max(np.abs(t[n] - expected)) < 1e-15

    g = scalar_exponential(ALPHA, BETA, 16)
    pair = factorize(g)
    t = fourier_coefficients_B(compute_jump_density(pair.Yminus, g), 6)
    assert t[1][0, 0] == pytest.approx(ALPHA, abs=1e-13)
    assert t[-1][0, 0] == pytest.approx(-BETA, abs=1e-13)
    assert max(abs(t[n][0, 0]) for n in t.indices if abs(n) != 1) < 1e-13


def test_test_family_matches_high_precision_oracle(family_data):
    _, _, t = family_data
    assert np.max(np.abs(t[1] - ORACLE_B1)) < 1e-13
    assert np.max(np.abs(t[-1] - ORACLE_Bm1)) < 1e-13
    others = [n for n in t.indices if abs(n) != 1]
    assert np.max(t.norms()[np.array(others) + t.N_B]) < 1e-13


def test_table_window_enforced():
    t = manufactured_table(4)
    with pytest.raises(IndexWindowError):
        t[5]
    with pytest.raises(IndexWindowError):
        fourier_coefficients_B(Loop(np.zeros((9, 1, 1))), 4)


# ---------------------------------------------------------------- fields

def test_field_examples():
    zero = CoefficientTable.zeros(2, 4)
    assert np.all(eval_field(2.0, zero) == 0)
    t = manufactured_table()
    assert np.allclose(eval_field(2.0, t), [[0, -0.25], [0, 0]], atol=1e-16)
    assert np.allclose(eval_field(0.0, t), [[0, 1], [0, 0]], atol=1e-16)
    assert np.all(eval_field(np.inf, t) == 0)


def test_field_matches_factor_log_derivative(family_data):
    pair, A, t = family_data
    for x in (0.0, 0.5, 0.4j, 2.0, -10.0, 3j):
        Y = pair.Yplus if abs(x) < 1 else pair.Yminus
        assert np.max(np.abs(eval_field(x, t) - field_from_factor(Y, x))) < 1e-12


def test_field_routes_agree(family_data):
    _, A, t = family_data
    for x in (0.0, 0.5, 2.0, 10.0):
        a = eval_field(x, t)
        b = eval_field(x, density=A, route="integral")
        assert np.max(np.abs(a - b)) < 1e-8


def test_additive_jump_near_circle(family_data):
    # calA(r u) - calA(u / r) -> A(u) as r -> 1
    _, A, t = family_data
    u = np.exp(1j * np.array([0.2, 2.0, 4.5]))
    r = 1 - 1e-6
    for ui, Ai in zip(u, A(u)):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SlowConvergenceWarning)
            jump = eval_field(r * ui, t) - eval_field(ui / r, t)
        assert np.max(np.abs(jump - Ai)) < 1e-5


def test_field_decays_like_inverse_square(family_data):
    _, _, t = family_data
    assert np.max(np.abs(t[0])) < 1e-9
    vals = [np.linalg.norm(x * x * eval_field(x, t), 2) for x in (10.0, 100.0, 1000.0)]
    assert max(vals) < 2 * np.linalg.norm(t[1], 2)
    assert abs(vals[-1] - np.linalg.norm(t[1], 2)) < 1e-3


def test_field_rejects_contour():
    with pytest.raises(OnContourError):
        eval_field(1.0, manufactured_table())


def test_field_derivative_by_differences(family_data):
    _, _, t = family_data
    for x in (0.3, 2.5):
        d = 1e-6
        fd = (eval_field(x + d, t) - eval_field(x - d, t)) / (2 * d)
        assert np.max(np.abs(eval_field_dx(x, t) - fd)) < 1e-8


def test_slow_convergence_warning():
    t = CoefficientTable(np.ones((9, 1, 1)))
    with pytest.warns(SlowConvergenceWarning):
        eval_field(0.9, t)


# ---------------------------------------------------------------- Omega

def test_omega_examples():
    zero = CoefficientTable.zeros(2, 4)
    for m in (-2, 0, 3):
        assert np.all(eval_omega(m, 2.0, zero) == 0)
    t = manufactured_table()
    assert np.allclose(eval_omega(-1, 2.0, t), [[0, 0.25], [0, 0]], atol=1e-16)
    assert np.allclose(eval_omega(0, 2.0, t), [[0, 0.5], [0, 0]], atol=1e-16)


def test_omega_minus_one_is_minus_field(family_data):
    _, A, t = family_data
    for x in (0.0, 0.5, 2.0, 10.0):
        assert np.max(np.abs(eval_omega(-1, x, t) + eval_field(x, t))) < 1e-15
        integral = eval_omega(-1, x, density=A, route="integral")
        assert np.max(np.abs(integral + eval_field(x, t))) < 1e-9


@pytest.mark.parametrize("m", [-3, -1, 0, 2, 4])
def test_omega_routes_agree(family_data, m):
    _, A, t = family_data
    for x in (0.0, 0.5, 2.0, 10.0):
        a = eval_omega(m, x, t)
        b = eval_omega(m, x, density=A, route="integral")
        assert np.max(np.abs(a - b)) < 1e-9


def test_omega_window():
    t = manufactured_table(4)
    with pytest.raises(IndexWindowError):
        eval_omega(4, 2.0, t)
    with pytest.raises(IndexWindowError):
        eval_omega(-5, 0.5, t)


@given(st.integers(-3, 3), st.sampled_from([0.3, 0.6, 1.8, 4.0]))
def test_omega_derivative_by_differences(m, x):
    r = np.random.default_rng(7)
    t = CoefficientTable(r.standard_normal((13, 2, 2)) * 0.3 ** np.abs(np.arange(-6, 7))[:, None, None])
    d = 1e-6
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SlowConvergenceWarning)
        fd = (eval_omega(m, x + d, t) - eval_omega(m, x - d, t)) / (2 * d)
        assert np.max(np.abs(eval_omega_dx(m, x, t) - fd)) < 1e-6
