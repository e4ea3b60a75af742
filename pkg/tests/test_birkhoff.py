import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from unischlesinger.birkhoff import (
    BirkhoffPair,
    DetFormula,
    factorize,
    jump_residual,
    sl_reduce,
)
from unischlesinger.errors import GlobalIndexError, SolvabilityError
from unischlesinger.families import (
    identity_loop,
    scalar_exponential,
    unipotent_factors,
    unipotent_loop,
)
from unischlesinger.fourier_circle import (
    CauchySide,
    Loop,
    constant,
    derivative,
    from_function,
    grid_nodes,
    monomial,
)
from unischlesinger.jump_residue import compute_jump_density

ALPHA, BETA = 0.2, 0.3


def test_identity_factorizes_trivially():
    G = identity_loop(2, 8)
    pair = factorize(G)
    I = identity_loop(2, 8)
    assert pair.Yplus.coefficient_error(I) == 0
    assert pair.Yminus.coefficient_error(I) == 0
    assert pair.jump_residual == 0


def test_manufactured_unipotent():
    pair = factorize(unipotent_loop(16), 16)
    yp, ym = unipotent_factors(16)
    assert pair.Yplus.coefficient_error(yp) < 1e-11
    assert pair.Yminus.coefficient_error(ym) < 1e-11
    assert pair.winding_of_det == 0
    assert pair.condition_estimate < 10


def test_scalar_exponential_splitting():
    pair = factorize(scalar_exponential(ALPHA, BETA, 32), 32)
    yp = from_function(lambda x: np.exp(BETA * x), 1, 32)
    ym = from_function(lambda x: np.exp(-ALPHA / x), 1, 32)
    assert pair.Yplus.coefficient_error(yp) < 1e-10
    assert pair.Yminus.coefficient_error(ym) < 1e-10


def test_factorization_independent_of_sampling_grid(test_loop):
    from unischlesinger.families import build_family

    a = factorize(test_loop, 64)
    b = factorize(build_family("matrix-exponential", {}, 2, 64, K=1024), 64)
    assert a.Yminus.coefficient_error(b.Yminus) < 1e-13
    assert a.Yplus.coefficient_error(b.Yplus) < 1e-13


def test_factors_are_one_sided_and_normalized(test_loop):
    pair = factorize(test_loop, 64)
    assert np.all(pair.Yplus.coeffs[pair.Yplus.modes < 0] == 0)
    assert np.all(pair.Yminus.coeffs[pair.Yminus.modes > 0] == 0)
    assert np.allclose(pair.Yminus.coeff(0), np.eye(2), atol=0)


def test_global_index_rejected():
    with pytest.raises(GlobalIndexError):
        factorize(monomial(1, M=4))
    G = Loop(np.stack([np.zeros((2, 2)), np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]))
    with pytest.raises(GlobalIndexError):
        factorize(G)


def test_unsolvable_loop_rejected():
    # det = 1 but partial indices (1, -1): the normalized problem has no solution
    G = Loop(np.stack([np.diag([0.0, 1.0]), np.zeros((2, 2)), np.diag([1.0, 0.0])]))
    with pytest.raises(SolvabilityError):
        factorize(G, 8)


def test_jump_residual_examples():
    G = unipotent_loop(4)
    yp, ym = unipotent_factors(4)
    assert jump_residual(BirkhoffPair(yp, ym, 0.0, 1.0, 0), G) < 1e-15
    eps = 1e-3
    perturbed = BirkhoffPair(yp + constant(eps * np.eye(2), M=4), ym, 0.0, 1.0, 0)
    assert jump_residual(perturbed, G) == pytest.approx(eps, rel=1e-12)


@given(st.floats(-0.4, 0.4), st.floats(-0.4, 0.4), st.floats(-0.4, 0.4))
def test_random_small_loops_factorize(a, b, c):
    Q = {1: np.array([[0, a], [b, 0]]), -1: np.array([[c, 0], [a, -c]])}
    from unischlesinger.families import matrix_exponential

    G = matrix_exponential(Q, 24)
    pair = factorize(G, 24)
    assert pair.jump_residual < 1e-10


# ---------------------------------------------------------------- determinant formula

def test_det_formula_examples():
    d = DetFormula(identity_loop(2, 4))
    for x in (0, 0.5, 3):
        assert d(x) == pytest.approx(1.0)
    d = DetFormula(unipotent_loop(4))
    for x in (0, 0.5, 3):
        assert abs(d(x) - 1) < 1e-14
    d = DetFormula(scalar_exponential(ALPHA, BETA, 32))
    for x in (0.0, 0.5, -0.3j):
        assert abs(d(x) - np.exp(BETA * x)) < 1e-10
    for x in (2.0, 10.0, 5j):
        assert abs(d(x) - np.exp(-ALPHA / x)) < 1e-10
    assert d(np.inf) == 1


@pytest.mark.parametrize("which", ["test", "scalar"])
def test_det_formula_matches_factor_determinants(test_loop, which):
    G = test_loop if which == "test" else scalar_exponential(ALPHA, BETA, 32)
    pair = factorize(G)
    d = DetFormula(G)
    K = d.log_det.K
    for side, Y in ((CauchySide.PLUS, pair.Yplus), (CauchySide.MINUS, pair.Yminus)):
        expected = np.linalg.det(Y.sample(K))
        assert np.max(np.abs(d.boundary(side, K) - expected)) < 1e-9


def test_det_ode_on_test_family(test_loop):
    # d(det G)/dxi = tr(A) det G
    pair = factorize(test_loop, 64)
    A = compute_jump_density(pair.Yminus, test_loop, 64)
    K = 512
    det_G = np.linalg.det(test_loop.sample(K))
    det_loop = from_function(lambda x: np.linalg.det(test_loop(x)), 1, 128)
    lhs = derivative(det_loop).sample(K)[:, 0, 0]
    rhs = np.trace(A.sample(K), axis1=1, axis2=2) * det_G
    assert np.max(np.abs(lhs - rhs)) < 1e-8


# ---------------------------------------------------------------- sl reduction

def test_sl_reduce_unipotent_is_already_trace_free():
    G = unipotent_loop(8)
    pair = factorize(G, 8)
    A = compute_jump_density(pair.Yminus, G, 8)
    red = sl_reduce(pair, A)
    assert red.B.coefficient_error(A) < 1e-15
    assert red.Phi_inner.coefficient_error(constant(1.0, M=8)) < 1e-14
    assert red.Phi_outer.coefficient_error(constant(1.0, M=8)) < 1e-14


def test_sl_reduce_scalar_case_removes_everything():
    G = scalar_exponential(ALPHA, BETA, 24)
    pair = factorize(G, 24)
    A = compute_jump_density(pair.Yminus, G, 24)
    red = sl_reduce(pair, A)
    assert np.max(np.abs(red.B.coeffs)) < 1e-15
    # Phi = 1/det Y on each side for N = 1
    xs = grid_nodes(64)
    assert np.max(np.abs(red.Phi_inner(xs)[:, 0, 0] - np.exp(-BETA * xs))) < 1e-12
    assert np.max(np.abs(red.Phi_outer(xs)[:, 0, 0] - np.exp(ALPHA / xs))) < 1e-12


def test_sl_reduce_gives_trace_free_density(test_loop):
    pair = factorize(test_loop, 64)
    A = compute_jump_density(pair.Yminus, test_loop, 64)
    red = sl_reduce(pair, A)
    assert np.max(np.abs(np.trace(red.B.coeffs, axis1=1, axis2=2))) < 1e-14
