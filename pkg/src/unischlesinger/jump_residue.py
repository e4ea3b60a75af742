"""Jump density ``A``, its coefficients ``B_n``, and the fields ``calA`` and ``Omega_m``.

Both fields are available through two independent routes: the Laurent series
built from the coefficient table, and trapezoid quadrature of the Cauchy
integral of the density on the grid.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import IndexWindowError, OnContourError, ShapeError, SingularNodeError
from .fourier_circle import (
    CONTOUR_EXCLUSION,
    Loop,
    analyze,
    derivative,
    grid_nodes,
    grid_size,
)

__all__ = [
    "CoefficientTable",
    "SlowConvergenceWarning",
    "compute_jump_density",
    "fourier_coefficients_B",
    "eval_field",
    "eval_field_dx",
    "eval_omega",
    "eval_omega_dx",
    "field_from_factor",
]


class SlowConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class CoefficientTable:
    """Two-sided family ``{B_n : |n| <= N_B}`` of ``N x N`` matrices.

    ``mats[n + N_B]`` holds ``B_n``.  ``tail_estimate`` is the norm of the
    largest coefficient not represented in the table.
    """

    mats: np.ndarray
    tail_estimate: float = 0.0

    def __post_init__(self):
        m = np.array(self.mats, dtype=complex)
        if m.ndim != 3 or m.shape[1] != m.shape[2] or m.shape[0] % 2 != 1:
            raise ShapeError(f"table must have shape (2N_B+1, N, N), got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "mats", m)

    @property
    def N_B(self) -> int:
        return (self.mats.shape[0] - 1) // 2

    @property
    def N(self) -> int:
        return self.mats.shape[1]

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.N_B, self.N_B + 1)

    def __getitem__(self, n: int) -> np.ndarray:
        if abs(n) > self.N_B:
            raise IndexWindowError(f"B_{n} outside table range |n| <= {self.N_B}")
        return self.mats[n + self.N_B]

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.mats, ord=2, axis=(1, 2))

    @classmethod
    def zeros(cls, N: int, N_B: int) -> "CoefficientTable":
        return cls(np.zeros((2 * N_B + 1, N, N), dtype=complex))

    @classmethod
    def from_dict(cls, entries: dict, N: int, N_B: int) -> "CoefficientTable":
        m = np.zeros((2 * N_B + 1, N, N), dtype=complex)
        for n, val in entries.items():
            m[n + N_B] = val
        return cls(m)


def compute_jump_density(Yminus: Loop, G: Loop, M: int | None = None) -> Loop:
    """``A = Y- G' G^-1 (Y-)^-1`` sampled on the grid and analyzed at cutoff ``M``."""
    if Yminus.N != G.N:
        raise ShapeError("Yminus and G have different dimensions")
    M = max(Yminus.M, G.M) if M is None else M
    K = grid_size(max(M, Yminus.M, G.M))
    Ym = Yminus.sample(K)
    Gs = G.sample(K)
    dG = derivative(G).sample(K)
    for name, s in (("Yminus", Ym), ("G", Gs)):
        if np.min(np.abs(np.linalg.det(s))) < 1e-14:
            raise SingularNodeError(f"{name} is singular at a grid node")
    A = Ym @ dG @ np.linalg.inv(Gs) @ np.linalg.inv(Ym)
    return analyze(A, M)


def fourier_coefficients_B(A: Loop, N_B: int | None = None) -> CoefficientTable:
    """``B_m = -(1/2i pi) int xi**m A dxi = -A_{-m-1}`` for ``|m| <= N_B``."""
    N_B = A.M // 2 if N_B is None else N_B
    if N_B + 1 > A.M:
        raise IndexWindowError(f"N_B={N_B} exceeds resolved range of a cutoff-{A.M} density")
    m = np.arange(-N_B, N_B + 1)
    mats = -A.coeffs[-m - 1 + A.M]
    kept = np.zeros(2 * A.M + 1, dtype=bool)
    kept[-m - 1 + A.M] = True
    dropped = A.coeffs[~kept]
    tail = float(np.max(np.linalg.norm(dropped, ord=2, axis=(1, 2)))) if dropped.size else 0.0
    return CoefficientTable(mats, max(tail, A.residue))


def _point(x) -> complex:
    x = complex(x)
    if not (np.isinf(x.real) or np.isinf(x.imag)) and abs(abs(x) - 1) < CONTOUR_EXCLUSION:
        raise OnContourError(f"|x| = {abs(x)!r} is on the contour")
    return x


def _is_inf(x: complex) -> bool:
    return bool(np.isinf(x.real) or np.isinf(x.imag))


def _series_outside(table: CoefficientTable, first: int, x: complex, shift: int = 0) -> np.ndarray:
    """``sum_{j>=0} B_{first+j} x^-(j+1+shift)`` over the stored indices."""
    idx = np.arange(first, table.N_B + 1)
    if idx.size == 0:
        return np.zeros((table.N, table.N), dtype=complex)
    w = x ** (-(idx - first + 1 + shift))
    return np.tensordot(w, table.mats[idx + table.N_B], axes=(0, 0))


def _check_convergence(table: CoefficientTable, x: complex, tol: float) -> None:
    r = abs(x)
    q = r if r < 1 else 1 / r
    bound = (table.tail_estimate + np.max(table.norms()[[0, -1]])) * q ** table.N_B / (1 - q)
    if bound > tol:
        warnings.warn(
            f"series at |x|={r:.3g} has truncated tail bound {bound:.2e} > {tol:.1e}",
            SlowConvergenceWarning,
            stacklevel=3,
        )


def _quadrature(density: Loop, weight_power: int, x: complex) -> np.ndarray:
    """``(1/2i pi) int xi**p A(xi) / (xi - x) dxi`` by the trapezoid rule."""
    nodes = grid_nodes(density.K)
    w = nodes ** (weight_power + 1) / (nodes - x) / density.K
    return np.tensordot(w, density.samples, axes=(0, 0))


def eval_field(x, table: CoefficientTable | None = None, density: Loop | None = None,
               route: str = "series", tol: float = 1e-12) -> np.ndarray:
    """``calA(x) = (1/2i pi) int A(xi)/(xi - x) dxi``.

    Series route: ``sum_{m>=0} B_m / x**(m+1)`` for ``|x| > 1`` and
    ``-sum_{m>=1} B_{-m} x**(m-1)`` for ``|x| < 1``.  Integral route: trapezoid
    rule on the density's grid.
    """
    x = _point(x)
    if route == "series":
        if table is None:
            raise ValueError("series route needs a coefficient table")
        if _is_inf(x):
            return np.zeros((table.N, table.N), dtype=complex)
        _check_convergence(table, x, tol)
        if abs(x) > 1:
            return _series_outside(table, 0, x)
        idx = np.arange(1, table.N_B + 1)
        w = x ** (idx - 1)
        return -np.tensordot(w, table.mats[table.N_B - idx], axes=(0, 0))
    if route == "integral":
        if density is None:
            raise ValueError("integral route needs the jump density")
        if _is_inf(x):
            return np.zeros((density.N, density.N), dtype=complex)
        return _quadrature(density, 0, x)
    raise ValueError(f"unknown route {route!r}")


def eval_field_dx(x, table: CoefficientTable) -> np.ndarray:
    """Termwise x-derivative of the series for ``calA``."""
    x = _point(x)
    if _is_inf(x):
        return np.zeros((table.N, table.N), dtype=complex)
    if abs(x) > 1:
        idx = np.arange(0, table.N_B + 1)
        w = -(idx + 1) * x ** (-(idx + 2))
        return np.tensordot(w, table.mats[idx + table.N_B], axes=(0, 0))
    idx = np.arange(2, table.N_B + 1)
    w = (idx - 1) * x ** (idx - 2)
    return -np.tensordot(w, table.mats[table.N_B - idx], axes=(0, 0))


def _omega_range(table: CoefficientTable, m: int, x: complex) -> None:
    if abs(x) > 1 and m + 1 > table.N_B:
        raise IndexWindowError(f"Omega_{m} outside: B_{m + 1} not in table (N_B={table.N_B})")
    if abs(x) < 1 and m < -table.N_B:
        raise IndexWindowError(f"Omega_{m} inside: B_{m} not in table (N_B={table.N_B})")


def eval_omega(m: int, x, table: CoefficientTable | None = None, density: Loop | None = None,
               route: str = "series", tol: float = 1e-12) -> np.ndarray:
    """``Omega_m(x) = -(1/2i pi) int xi**(m+1) A(xi)/(xi - x) dxi``.

    Series: ``-sum_{n>=1} B_{m+n} / x**n`` outside, ``sum_{n>=0} B_{m-n} x**n``
    inside.
    """
    x = _point(x)
    if route == "series":
        if table is None:
            raise ValueError("series route needs a coefficient table")
        if _is_inf(x):
            return np.zeros((table.N, table.N), dtype=complex)
        _omega_range(table, m, x)
        _check_convergence(table, x, tol)
        if abs(x) > 1:
            return -_series_outside(table, m + 1, x)
        idx = np.arange(0, m + table.N_B + 1)
        w = x ** idx
        return np.tensordot(w, table.mats[m - idx + table.N_B], axes=(0, 0))
    if route == "integral":
        if density is None:
            raise ValueError("integral route needs the jump density")
        if _is_inf(x):
            return np.zeros((density.N, density.N), dtype=complex)
        return -_quadrature(density, m + 1, x)
    raise ValueError(f"unknown route {route!r}")


def eval_omega_dx(m: int, x, table: CoefficientTable) -> np.ndarray:
    """Termwise x-derivative of the series for ``Omega_m``."""
    x = _point(x)
    if _is_inf(x):
        return np.zeros((table.N, table.N), dtype=complex)
    _omega_range(table, m, x)
    if abs(x) > 1:
        idx = np.arange(m + 1, table.N_B + 1)
        n = idx - m
        w = n * x ** (-(n + 1))
        return np.tensordot(w, table.mats[idx + table.N_B], axes=(0, 0))
    n = np.arange(1, m + table.N_B + 1)
    w = n * x ** (n - 1)
    return np.tensordot(w, table.mats[m - n + table.N_B], axes=(0, 0))


def field_from_factor(Y: Loop, x) -> np.ndarray:
    """Logarithmic derivative ``Y'(x) Y(x)^-1`` of an analytic factor at ``x``.

    ``Y`` is the boundary loop of the factor analytic on the side containing
    ``x`` (inner factor for ``|x| < 1``, outer for ``|x| > 1``).
    """
    x = complex(x)
    k = Y.modes
    keep = k >= 0 if abs(x) < 1 else k <= 0
    k, c = k[keep], Y.coeffs[keep]
    val = np.tensordot(x ** k, c, axes=(0, 0))
    dk = np.where(k == 0, 0, k)
    dval = np.tensordot(dk * x ** np.where(k == 0, 0, k - 1), c, axes=(0, 0))
    return dval @ np.linalg.inv(val)
