"""Birkhoff factorization ``Y+ = Y- G`` on the unit circle with ``Y-(inf) = I``.

The outer factor is sought as ``Y-(xi) = I + sum_{k=1}^{M} c_k xi**-k``; the
coefficients ``c_k`` make the modes ``-M..-1`` of ``Y- G`` vanish.  This is a
block-Toeplitz linear system of size ``N*N*M`` solved by dense LU.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import BranchError, GlobalIndexError, SingularNodeError, SolvabilityError
from .fourier_circle import (
    CauchySide,
    Loop,
    analyze,
    cauchy_eval,
    cauchy_project,
    continuous_log,
    det_samples,
    grid_size,
    multiply,
    winding_number,
)

# operational boundary of the solvable neighborhood
COND_MAX = 1e10
JUMP_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class BirkhoffPair:
    """Boundary values of the normalized factorization and solver diagnostics."""

    Yplus: Loop
    Yminus: Loop
    jump_residual: float
    condition_estimate: float
    winding_of_det: int

    @property
    def N(self) -> int:
        return self.Yplus.N

    @property
    def M(self) -> int:
        return self.Yplus.M


@dataclass(frozen=True, eq=False)
class ScalarReduction:
    """Scalar gauge ``Phi = (det Y)^(-1/N)`` and the trace-free jump density."""

    Phi_inner: Loop
    Phi_outer: Loop
    B: Loop


def _toeplitz_system(G: Loop, M: int) -> tuple[np.ndarray, np.ndarray]:
    """``T[k, j] = G_{k-j}`` (block rows k, block cols j, 1-based) and rhs ``-G_{-j}``."""
    N = G.N
    Gp = G.with_cutoff(max(M, G.M))
    idx = np.arange(1, M + 1)
    T = Gp.coeffs[idx[:, None] - idx[None, :] + Gp.M].transpose(0, 2, 1, 3)
    R = -Gp.coeffs[Gp.M - idx].transpose(1, 0, 2)
    return T.reshape(M * N, M * N), R.reshape(N, M * N)


def jump_residual(pair: BirkhoffPair, G: Loop, K: int | None = None) -> float:
    """Max over grid nodes of ``||Y+(xi_j) - Y-(xi_j) G(xi_j)||_2``."""
    M = max(pair.Yplus.M, pair.Yminus.M, G.M)
    K = grid_size(M) if K is None else K
    d = pair.Yplus.sample(K) - pair.Yminus.sample(K) @ G.sample(K)
    return float(np.max(np.linalg.norm(d, ord=2, axis=(1, 2))))


def factorize(G: Loop, M: int | None = None, tol: float = JUMP_TOL,
              cond_max: float = COND_MAX) -> BirkhoffPair:
    """Normalized Birkhoff factorization of ``G`` with ``M`` outer unknowns.

    Raises
    ------
    GlobalIndexError
        if ``det G`` winds around the origin.
    SolvabilityError
        if the Galerkin matrix is too ill-conditioned or the jump relation is
        not met to ``tol``.
    """
    M = G.M if M is None else M
    N = G.N
    dets = det_samples(G)
    if np.min(np.abs(dets)) < 1e-12:
        raise SingularNodeError("G is not invertible on the grid")
    index = winding_number(dets)
    if index != 0:
        raise GlobalIndexError(f"global index of det G is {index}, expected 0")

    T, R = _toeplitz_system(G, M)
    # X T = R  <=>  T^T X^T = R^T
    with warnings.catch_warnings():
        # exact singularity is reported below as a SolvabilityError
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(T.T)
    if np.any(np.diag(lu) == 0):
        raise SolvabilityError("loop outside solvable neighborhood: Galerkin matrix is singular")
    X = sla.lu_solve((lu, piv), R.T).T
    anorm = np.linalg.norm(T.T, 1)
    rcond, _ = sla.lapack.zgecon(lu, anorm, norm="1")
    cond = float(np.inf) if rcond == 0 else float(1.0 / rcond)

    Mw = max(M, G.M)
    cm = np.zeros((2 * Mw + 1, N, N), dtype=complex)
    cm[Mw] = np.eye(N)
    C = X.reshape(N, M, N)
    for k in range(1, M + 1):
        cm[Mw - k] = C[:, k - 1, :]
    Yminus = Loop(cm)
    Yplus = cauchy_project(multiply(Yminus, G.with_cutoff(Mw), M=Mw), CauchySide.PLUS)

    pair = BirkhoffPair(Yplus, Yminus, 0.0, cond, index)
    res = jump_residual(pair, G)
    pair = BirkhoffPair(Yplus, Yminus, res, cond, index)
    if not np.isfinite(cond) or cond > cond_max:
        raise SolvabilityError(f"loop outside solvable neighborhood: condition estimate {cond:.3e}")
    if not res <= tol:
        raise SolvabilityError(f"loop outside solvable neighborhood: jump residual {res:.3e}")
    return pair


class DetFormula:
    """``det Y(x) = exp(F(x))`` with ``F`` the Cauchy integral of ``log det G``."""

    def __init__(self, G: Loop, K: int | None = None):
        K = grid_size(G.N * G.M) if K is None else K
        d = det_samples(G, K)
        index = winding_number(d)
        if index != 0:
            raise BranchError(f"log det G is multivalued: winding {index}")
        self.log_det = analyze(continuous_log(d), (K - 1) // 2)

    def __call__(self, x) -> complex:
        return complex(np.exp(cauchy_eval(self.log_det, x)[0, 0]))

    def boundary(self, side: CauchySide, K: int | None = None) -> np.ndarray:
        """Boundary values ``det Y+-`` at the grid nodes."""
        F = cauchy_project(self.log_det, side)
        return np.exp(F.sample(K or F.K)[:, 0, 0])

    def log_boundary(self, side: CauchySide) -> Loop:
        return cauchy_project(self.log_det, side)


def det_via_formula(G: Loop) -> DetFormula:
    return DetFormula(G)


def sl_reduce(pair: BirkhoffPair, A: Loop) -> ScalarReduction:
    """Reduce to a trace-free jump density via the scalar gauge ``Phi``.

    ``Phi = exp(-F/N)`` where ``det Y = exp(F)`` and ``F`` is the Cauchy
    integral of ``log det G``; this is the branch with ``Phi(inf) = 1`` and
    solves ``dPhi/dx = -(1/N) tr(calA) Phi``.
    """
    N = pair.N
    M = pair.M
    K = grid_size(N * M)
    for Y in (pair.Yplus, pair.Yminus):
        w = winding_number(det_samples(Y, K))
        if w != 0:
            raise BranchError(f"det of a factor winds {w} times; N-th root undefined")
    # det G = det(Y-)^-1 det(Y+) on the circle
    dG = det_samples(pair.Yplus, K) / det_samples(pair.Yminus, K)
    if winding_number(dG) != 0:
        raise BranchError("det G winds around the origin")
    log_det = analyze(continuous_log(dG), (K - 1) // 2)
    Phi_in = analyze(np.exp(-cauchy_project(log_det, CauchySide.PLUS).sample(K)[:, 0, 0] / N), M)
    Phi_out = analyze(np.exp(-cauchy_project(log_det, CauchySide.MINUS).sample(K)[:, 0, 0] / N), M)
    tr = np.trace(A.coeffs, axis1=1, axis2=2)
    B = Loop(A.coeffs - tr[:, None, None] * np.eye(N) / N, A.residue)
    return ScalarReduction(Phi_in, Phi_out, B)
