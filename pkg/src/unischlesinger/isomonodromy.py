"""Deformation of the factorization by circle diffeomorphisms and its residual checks.

The pipeline ``gamma -> G0 o gamma^-1 -> (Y+, Y-) -> A -> B(gamma)`` is
differentiated along the Virasoro directions by central differences.  All
Lie derivatives of the coefficient table at a given ``(gamma, h)`` come from
one set of flowed solves, held in a :class:`DeformationJet`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .birkhoff import factorize
from .circle_diffeo import (
    DEFAULT_STEP,
    Diffeo,
    RealField,
    VirasoroDirection,
    combine,
    directional_derivatives,
    identity,
    lie_derivative,
    pushforward_loop,
)
from .errors import IndexWindowError, SolvabilityError
from .fourier_circle import Loop, derivative, grid_nodes
from .jump_residue import (
    CoefficientTable,
    compute_jump_density,
    eval_field,
    eval_field_dx,
    eval_omega,
    eval_omega_dx,
    fourier_coefficients_B,
)

__all__ = [
    "DeformationContext",
    "DeformationJet",
    "deform_coefficients",
    "deformation_jet",
    "schlesinger_rhs",
    "schlesinger_residual",
    "isomonodromy_check",
    "integrability_residuals",
]

DEFAULT_PROBES = (0.0, 0.5, 2.0, 10.0)


class NeighborhoodError(SolvabilityError):
    """The deformed loop left the region where the factorization exists."""


@dataclass(frozen=True, eq=False)
class DeformationContext:
    """Base monodromy ``G0`` plus discretization parameters."""

    G0: Loop
    M: int = 64
    N_B: int = 16
    h: float = DEFAULT_STEP
    probes: tuple = DEFAULT_PROBES
    diffeo_cutoff: int = 32

    def __post_init__(self):
        object.__setattr__(self, "G0", self.G0.with_cutoff(self.M))
        object.__setattr__(self, "probes", tuple(complex(p) for p in self.probes))
        for p in self.probes:
            if 0.9 <= abs(p) <= 1.1:
                raise ValueError(f"probe {p} too close to the unit circle")
        if self.N_B + 1 > self.M:
            raise IndexWindowError(f"N_B={self.N_B} not resolved at M={self.M}")
        factorize(self.G0, self.M)

    @property
    def N(self) -> int:
        return self.G0.N

    def identity(self) -> Diffeo:
        return identity(self.diffeo_cutoff)


def deform_coefficients(ctx: DeformationContext, gamma: Diffeo) -> CoefficientTable:
    """``B(gamma)`` for the loop ``G0 o gamma^-1``."""
    G = pushforward_loop(ctx.G0, gamma, ctx.M)
    try:
        pair = factorize(G, ctx.M)
    except SolvabilityError as exc:
        raise NeighborhoodError(f"left neighborhood U: {exc}") from exc
    A = compute_jump_density(pair.Yminus, G, ctx.M)
    return fourier_coefficients_B(A, ctx.N_B)


class _TableFunctional:
    """Picklable ``gamma -> B(gamma).mats`` for parallel evaluation."""

    def __init__(self, ctx: DeformationContext):
        self.ctx = ctx

    def __call__(self, gamma: Diffeo) -> np.ndarray:
        return deform_coefficients(self.ctx, gamma).mats


def _fields_for(ms) -> list[RealField]:
    fields = []
    for m in ms:
        fields.extend(VirasoroDirection(m).fields)
    return list(dict.fromkeys(fields))


@dataclass(eq=False)
class DeformationJet:
    """``B(gamma)`` and the tables ``L_m . B(gamma)`` for a window of ``m``."""

    gamma: Diffeo
    h: float
    B: CoefficientTable
    LB: dict = field(default_factory=dict)

    def L(self, m: int) -> CoefficientTable:
        if m not in self.LB:
            raise IndexWindowError(f"L_{m} not computed in this jet (have {sorted(self.LB)})")
        return self.LB[m]


def deformation_jet(ctx: DeformationContext, gamma: Diffeo | None = None, h: float | None = None,
                    m_values=range(-3, 4), map_fn=map) -> DeformationJet:
    """Evaluate the table at ``gamma`` and along every real flow needed for ``m_values``."""
    gamma = ctx.identity() if gamma is None else gamma
    h = ctx.h if h is None else h
    F = _TableFunctional(ctx)
    B = deform_coefficients(ctx, gamma)
    derivs = directional_derivatives(F, _fields_for(m_values), gamma, h, map_fn)
    LB = {m: CoefficientTable(combine(m, derivs)) for m in m_values}
    return DeformationJet(gamma, h, B, LB)


def _comm(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return X @ Y - Y @ X


def _bracket_sum(B: CoefficientTable, lo: int, hi: int, total: int) -> np.ndarray:
    """``sum_{k=lo}^{hi} [B_k, B_{total-k}]``, zero when ``lo > hi``."""
    out = np.zeros((B.N, B.N), dtype=complex)
    for k in range(lo, hi + 1):
        out = out + _comm(B[k], B[total - k])
    return out


def schlesinger_rhs(B: CoefficientTable, m: int, n: int, form: str = "primary") -> np.ndarray:
    """Right-hand side of the universal Schlesinger system for ``L_m . B_n``, ``n != 0``.

    ``form="primary"``::

        n >= 1:  sum_{k=0}^{n-1} [B_k, B_{m+n-k}] + n B_{m+n}
        n <= -1: -sum_{k=n}^{-1} [B_k, B_{m+n-k}] + n B_{m+n}

    ``form="equivalent"`` sums over a window set by ``m`` instead::

        m >= 0:  sum_{k=0}^{m} [B_k, B_{m+n-k}] + n B_{m+n}
        m < 0:   -sum_{k=m+1}^{-1} [B_k, B_{m+n-k}] + n B_{m+n}
    """
    if n == 0:
        raise ValueError("the system is stated for n != 0; check L_m . B_0 = 0 separately")
    s = m + n
    if form == "primary":
        if n >= 1:
            brackets = _bracket_sum(B, 0, n - 1, s)
        else:
            brackets = -_bracket_sum(B, n, -1, s)
    elif form == "equivalent":
        if m >= 0:
            brackets = _bracket_sum(B, 0, m, s)
        else:
            brackets = -_bracket_sum(B, m + 1, -1, s)
    else:
        raise ValueError(f"unknown form {form!r}")
    return brackets + n * B[s]


def _opnorm(X: np.ndarray) -> float:
    return float(np.linalg.norm(X, ord=2))


def schlesinger_residual(ctx: DeformationContext, gamma: Diffeo | None = None, m: int = 1,
                         n: int = 1, jet: DeformationJet | None = None,
                         form: str = "primary") -> float:
    """``|| L_m . B_n - rhs(m, n) ||_2`` at ``gamma``."""
    if jet is None:
        jet = deformation_jet(ctx, gamma, m_values=[m])
    return _opnorm(jet.L(m)[n] - schlesinger_rhs(jet.B, m, n, form))


def isomonodromy_check(ctx: DeformationContext | Loop, gamma: Diffeo | None = None, m: int = 0,
                       nodes=None, h: float | None = None) -> float:
    """Sup over ``nodes`` of ``|| L_m . G(xi) + xi**(m+1) G'(xi) ||_2``.

    ``ctx`` may also be a bare loop ``G0``; no factorization is involved, so
    loops with nonzero index are allowed.
    """
    if isinstance(ctx, Loop):
        G0, M, gamma0, h0 = ctx, ctx.M, identity(), DEFAULT_STEP
    else:
        G0, M, gamma0, h0 = ctx.G0, ctx.M, ctx.identity(), ctx.h
    gamma = gamma0 if gamma is None else gamma
    h = h0 if h is None else h
    nodes = grid_nodes(16) if nodes is None else np.asarray(nodes, dtype=complex)

    def G_at_nodes(g: Diffeo) -> np.ndarray:
        return pushforward_loop(G0, g, M)(nodes)

    LG = lie_derivative(G_at_nodes, m, gamma, h)
    dG = derivative(pushforward_loop(G0, gamma, M))(nodes)
    res = LG + (nodes ** (m + 1))[:, None, None] * dG
    return float(np.max(np.linalg.norm(res, ord=2, axis=(1, 2))))


def integrability_residuals(ctx: DeformationContext, gamma: Diffeo | None = None, m: int = 1,
                            n: int = -1, probes=None,
                            jet: DeformationJet | None = None) -> tuple[float, float]:
    """Residuals of the two Pfaffian integrability conditions at the probe points.

    ``r1 = max_q || L_m.calA - dOmega_m/dx - [Omega_m, calA] ||``
    ``r2 = max_q || L_m.Omega_n - L_n.Omega_m - [Omega_m, Omega_n] - (n-m) Omega_{m+n} ||``

    Every field is summed from its Laurent series; ``L_m`` acts on the
    coefficient tables.
    """
    probes = ctx.probes if probes is None else tuple(complex(p) for p in probes)
    if jet is None:
        jet = deformation_jet(ctx, gamma, m_values=sorted({m, n}))
    B, LmB, LnB = jet.B, jet.L(m), jet.L(n)
    r1 = r2 = 0.0
    for x in probes:
        calA = eval_field(x, B)
        Om = eval_omega(m, x, B)
        On = eval_omega(n, x, B)
        e1 = eval_field(x, LmB) - eval_omega_dx(m, x, B) - _comm(Om, calA)
        e2 = (eval_omega(n, x, LmB) - eval_omega(m, x, LnB) - _comm(Om, On)
              - (n - m) * eval_omega(m + n, x, B))
        r1 = max(r1, _opnorm(e1))
        r2 = max(r2, _opnorm(e2))
    return r1, r2
