"""Finite-pole limit: classical Schlesinger field and the Korotkin-Samtleben variables.

Everything here is exact algebra.  ``L~_m B_n`` is obtained by the chain rule
from the Schlesinger vector field, so no trajectory is ever integrated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .circle_diffeo import DEFAULT_STEP, Diffeo, lie_derivative
from .errors import ShapeError

__all__ = [
    "FuchsianData",
    "random_fuchsian_data",
    "schlesinger_vector_field",
    "ks_coefficients",
    "ks_derivative",
    "ks_identity_residual",
    "winning_convention",
    "tmap_check",
    "CONVENTIONS",
]

# exponent of t_i in B_n: "n" -> t_i**n, "n+1" -> t_i**(n+1)
CONVENTIONS = ("n", "n+1")


@dataclass(frozen=True, eq=False)
class FuchsianData:
    """Pole positions ``t`` and residues ``A`` with ``sum_i A_i = 0``."""

    t: np.ndarray
    A: np.ndarray

    def __post_init__(self):
        t = np.array(self.t, dtype=complex).ravel()
        A = np.array(self.A, dtype=complex)
        if A.ndim != 3 or A.shape[0] != t.size or A.shape[1] != A.shape[2]:
            raise ShapeError(f"residues must have shape (p, N, N) with p={t.size}")
        if np.linalg.norm(A.sum(axis=0)) >= 1e-12:
            raise ValueError("residues must sum to zero (normalization at infinity)")
        diff = np.abs(t[:, None] - t[None, :]) + np.eye(t.size)
        if np.min(diff) < 1e-12:
            raise ValueError("pole positions must be pairwise distinct")
        t.setflags(write=False)
        A.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "A", A)

    @property
    def p(self) -> int:
        return self.t.size

    @property
    def N(self) -> int:
        return self.A.shape[1]


def random_fuchsian_data(p: int, N: int, rng: np.random.Generator, t=None) -> FuchsianData:
    """Gaussian residues projected onto ``sum A_i = 0``."""
    A = rng.standard_normal((p, N, N)) + 1j * rng.standard_normal((p, N, N))
    A[-1] = -A[:-1].sum(axis=0)
    if t is None:
        t = np.exp(2j * np.pi * (np.arange(p) + rng.uniform(0, 0.5, p)) / p)
    return FuchsianData(np.asarray(t), A)


def _comm(X, Y):
    return X @ Y - Y @ X


def schlesinger_vector_field(data: FuchsianData) -> np.ndarray:
    """``D[i, j] = dA_i/dt_j``; off-diagonal ``[A_i, A_j]/(t_i - t_j)``, columns sum to 0."""
    p, N = data.p, data.N
    D = np.zeros((p, p, N, N), dtype=complex)
    for i in range(p):
        for j in range(p):
            if i != j:
                D[i, j] = _comm(data.A[i], data.A[j]) / (data.t[i] - data.t[j])
    for j in range(p):
        D[j, j] = -sum(D[i, j] for i in range(p) if i != j)
    return D


def _exponent(n: int, convention: str) -> int:
    if convention == "n":
        return n
    if convention == "n+1":
        return n + 1
    raise ValueError(f"unknown convention {convention!r}")


def ks_coefficients(data: FuchsianData, n: int, convention: str = "n") -> np.ndarray:
    """``B_n = sum_i t_i**e A_i`` with ``e`` fixed by the convention."""
    e = _exponent(n, convention)
    return np.tensordot(data.t ** e, data.A, axes=(0, 0))


def ks_derivative(data: FuchsianData, m: int, n: int, convention: str = "n",
                  field: np.ndarray | None = None) -> np.ndarray:
    """``L~_m B_n = sum_i t_i**(m+1) dB_n/dt_i`` along the Schlesinger flow."""
    D = schlesinger_vector_field(data) if field is None else field
    e = _exponent(n, convention)
    t = data.t
    out = np.zeros((data.N, data.N), dtype=complex)
    for i in range(data.p):
        dB = e * t[i] ** (e - 1) * data.A[i] + np.tensordot(t ** e, D[:, i], axes=(0, 0))
        out = out + t[i] ** (m + 1) * dB
    return out


def ks_identity_residual(data: FuchsianData, m: int, n: int, convention: str = "n",
                         field: np.ndarray | None = None, relative: bool = False) -> float:
    """``|| L~_m B_n - sum_{k=1}^{m} [B_k, B_{m+n-k}] - n B_{m+n} ||_2``.

    With ``relative=True`` the residual is divided by ``max(1, |lhs|, |rhs|)``.
    """
    if m < -1 or n < 0:
        raise ValueError("identity is stated for m >= -1, n >= 0")
    lhs = ks_derivative(data, m, n, convention, field)
    rhs = n * ks_coefficients(data, m + n, convention)
    for k in range(1, m + 1):
        rhs = rhs + _comm(ks_coefficients(data, k, convention),
                          ks_coefficients(data, m + n - k, convention))
    res = float(np.linalg.norm(lhs - rhs, ord=2))
    if relative:
        res /= max(1.0, float(np.linalg.norm(lhs, ord=2)), float(np.linalg.norm(rhs, ord=2)))
    return res


def winning_convention(data: FuchsianData, ms=range(-1, 5), ns=range(0, 5),
                       tol: float = 1e-12) -> tuple[str | None, dict]:
    """Which exponent convention closes the identity on the whole window.

    Returns the unique winner (``None`` if zero or two conventions pass) and
    the worst relative residual per convention.
    """
    field = schlesinger_vector_field(data)
    worst = {}
    for conv in CONVENTIONS:
        worst[conv] = max(ks_identity_residual(data, m, n, conv, field, relative=True)
                          for m in ms for n in ns)
    passing = [c for c in CONVENTIONS if worst[c] < tol]
    return (passing[0] if len(passing) == 1 else None), worst


def tmap_check(g: Callable[[np.ndarray], complex], grad_g: Callable[[np.ndarray], np.ndarray],
               taus, m: int, gamma: Diffeo, h: float = DEFAULT_STEP) -> tuple[complex, complex]:
    """Compare ``(L_m f)_gamma`` for ``f = g o T`` against ``(L~_m g)_{T(gamma)}``.

    ``T(gamma) = (gamma(tau_1), ..., gamma(tau_p))``.  Returns the
    finite-difference value and the exact one.
    """
    taus = np.asarray(taus, dtype=complex)

    def f(gm: Diffeo) -> complex:
        return g(gm(taus))

    fd = complex(lie_derivative(f, m, gamma, h))
    t = gamma(taus)
    exact = complex(np.sum(t ** (m + 1) * grad_g(t)))
    return fd, exact
