"""Test loop families used by the experiment runner and the test-suite."""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from .fourier_circle import Loop, from_function, grid_size

SIGMA = np.array([[0, 1], [0, 0]], dtype=complex)

FAMILIES = ("identity", "manufactured-unipotent", "scalar-exponential", "matrix-exponential")


def identity_loop(N: int, M: int) -> Loop:
    c = np.zeros((2 * M + 1, N, N), dtype=complex)
    c[M] = np.eye(N)
    return Loop(c)


def unipotent_loop(M: int = 1) -> Loop:
    """``[[1, xi - 1/xi], [0, 1]]``, factorized by ``Y+ = [[1, xi], [0, 1]]``."""
    c = np.zeros((2 * M + 1, 2, 2), dtype=complex)
    c[M] = np.eye(2)
    c[M + 1] = SIGMA
    c[M - 1] = -SIGMA
    return Loop(c)


def unipotent_factors(M: int = 1) -> tuple[Loop, Loop]:
    """Exact ``(Y+, Y-)`` for :func:`unipotent_loop`."""
    yp = np.zeros((2 * M + 1, 2, 2), dtype=complex)
    ym = np.zeros_like(yp)
    yp[M] = ym[M] = np.eye(2)
    yp[M + 1] = SIGMA
    ym[M - 1] = SIGMA
    return Loop(yp), Loop(ym)


def scalar_exponential(alpha: float, beta: float, M: int, K: int | None = None) -> Loop:
    """``exp(beta xi + alpha / xi)``."""
    return from_function(lambda x: np.exp(beta * x + alpha / x), 1, M, K)


def matrix_exponential(modes: dict, M: int, K: int | None = None) -> Loop:
    """``expm(sum_k Q_k xi**k)`` sampled pointwise; ``modes`` maps k to ``Q_k``."""
    mats = {int(k): np.atleast_2d(np.asarray(v, dtype=complex)) for k, v in modes.items()}
    N = next(iter(mats.values())).shape[0]
    K = grid_size(M) if K is None else K

    def f(x):
        Q = sum(np.multiply.outer(x ** k, q) for k, q in mats.items())
        return sla.expm(Q)

    return from_function(f, N, M, K)


def test_family_modes(a: float = 0.3, b: float = 0.2) -> dict:
    """Coefficients of ``Q(xi) = a xi sigma + b xi^-1 sigma^T``."""
    return {1: a * SIGMA, -1: b * SIGMA.T}


def build_family(name: str, params: dict, N: int, M: int, K: int | None = None) -> Loop:
    """Base loop of a named family at cutoff ``M``."""
    params = params or {}
    if name == "identity":
        return identity_loop(N, M)
    if name == "manufactured-unipotent":
        if N != 2:
            raise ValueError("manufactured-unipotent family needs N = 2")
        return unipotent_loop(M)
    if name == "scalar-exponential":
        if N != 1:
            raise ValueError("scalar-exponential family needs N = 1")
        return scalar_exponential(float(params.get("alpha", 0.2)), float(params.get("beta", 0.3)), M, K)
    if name == "matrix-exponential":
        raw = params.get("modes")
        modes = test_family_modes() if raw is None else {int(k): _parse_matrix(v) for k, v in raw.items()}
        G = matrix_exponential(modes, M, K)
        if G.N != N:
            raise ValueError(f"family modes are {G.N}x{G.N} but N = {N}")
        return G
    raise ValueError(f"unknown family {name!r}; expected one of {FAMILIES}")


def _parse_matrix(v) -> np.ndarray:
    """Nested lists of numbers or ``[re, im]`` pairs."""
    a = np.asarray(v, dtype=float)
    if a.ndim == 3 and a.shape[-1] == 2:
        return a[..., 0] + 1j * a[..., 1]
    return a.astype(complex)
