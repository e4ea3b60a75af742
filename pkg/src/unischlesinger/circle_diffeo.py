"""Orientation-preserving circle diffeomorphisms and Virasoro directions.

A diffeomorphism is stored through its lift ``g(theta) = theta + d(theta)``
with a real, 2pi-periodic displacement ``d`` kept as a truncated Fourier
series.  The complex generators ``L_m`` (velocity ``xi**(m+1)`` at a point
``xi`` of the circle) are realized as complex combinations of the real fields

    E^c_m = 2 cos(m theta) d/dtheta,   E^s_m = 2 sin(m theta) d/dtheta,   R = d/dtheta

namely ``L_m = (E^s_m - i E^c_m)/2``, ``L_-m = -(E^s_m + i E^c_m)/2`` for
``m >= 1`` and ``L_0 = -i R``.  Lie derivatives are central differences along
the real flows only, so every evaluation point is a genuine diffeomorphism.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import FlowError, NotADiffeomorphismError, ResolutionError, ShapeError
from .fourier_circle import Loop, analyze, grid_size

__all__ = [
    "Diffeo",
    "RealField",
    "VirasoroDirection",
    "make_diffeo",
    "identity",
    "rotation",
    "invert",
    "invert_lift",
    "compose",
    "pushforward_loop",
    "virasoro_flow",
    "directional_derivatives",
    "lie_derivative",
    "DEFAULT_CUTOFF",
    "DEFAULT_STEP",
]

DEFAULT_CUTOFF = 32
DEFAULT_STEP = 1e-4
INVERT_TOL = 1e-12
# displacement coefficients beyond the cutoff larger than this are an error
REFIT_TAIL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Diffeo:
    """Lift ``g(theta) = theta + sum_k dhat_k exp(i k theta)``, ``|k| <= M``."""

    dhat: np.ndarray
    tail: float = 0.0

    def __post_init__(self):
        d = np.array(self.dhat, dtype=complex)
        if d.ndim != 1 or d.size % 2 != 1:
            raise ShapeError("displacement coefficients must be a 1-D array of odd length")
        # enforce the reality condition dhat_{-k} = conj(dhat_k)
        d = 0.5 * (d + np.conj(d[::-1]))
        d.setflags(write=False)
        object.__setattr__(self, "dhat", d)

    @property
    def M(self) -> int:
        return (self.dhat.size - 1) // 2

    @property
    def K(self) -> int:
        return grid_size(self.M)

    @cached_property
    def theta(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.K) / self.K

    def displacement(self, theta) -> np.ndarray:
        t = np.asarray(theta, dtype=float)
        k = np.arange(-self.M, self.M + 1)
        return np.real(np.exp(1j * t[..., None] * k) @ self.dhat)

    def lift(self, theta) -> np.ndarray:
        return np.asarray(theta, dtype=float) + self.displacement(theta)

    def lift_derivative(self, theta) -> np.ndarray:
        t = np.asarray(theta, dtype=float)
        k = np.arange(-self.M, self.M + 1)
        return 1.0 + np.real(np.exp(1j * t[..., None] * k) @ (1j * k * self.dhat))

    @cached_property
    def samples(self) -> np.ndarray:
        """Lift values on the grid."""
        return self.lift(self.theta)

    @cached_property
    def derivative_samples(self) -> np.ndarray:
        return self.lift_derivative(self.theta)

    def __call__(self, xi) -> np.ndarray:
        """Action on points of the unit circle."""
        return np.exp(1j * self.lift(np.angle(np.asarray(xi, dtype=complex))))

    def sup_distance(self, other: "Diffeo") -> float:
        """Sup over a fine grid of the lift difference."""
        K = 4 * max(self.K, other.K)
        t = 2 * np.pi * np.arange(K) / K
        return float(np.max(np.abs(self.lift(t) - other.lift(t))))

    @classmethod
    def from_lift_samples(cls, lift_values, M: int, check: bool = True) -> "Diffeo":
        """Fit the displacement of equispaced lift samples at cutoff ``M``."""
        g = np.asarray(lift_values, dtype=float)
        K = g.size
        theta = 2 * np.pi * np.arange(K) / K
        loop = analyze(g - theta, M)
        dm = cls(loop.coeffs[:, 0, 0], loop.residue)
        if check:
            _check_monotone(dm)
        return dm


def _check_monotone(gamma: Diffeo) -> None:
    K = 4 * gamma.K
    t = 2 * np.pi * np.arange(K) / K
    dmin = float(np.min(gamma.lift_derivative(t)))
    if not dmin > 0:
        raise NotADiffeomorphismError(f"lift derivative reaches {dmin:.3e} <= 0")


def make_diffeo(cos=None, sin=None, const: float = 0.0, M: int = DEFAULT_CUTOFF) -> Diffeo:
    """Diffeo with displacement ``const + sum_k a_k cos(k theta) + b_k sin(k theta)``.

    ``cos`` and ``sin`` map harmonic number ``k >= 1`` to the real amplitude.
    """
    d = np.zeros(2 * M + 1, dtype=complex)
    d[M] = const
    for k, a in (cos or {}).items():
        k = int(k)
        if not 1 <= k <= M:
            raise ShapeError(f"harmonic {k} outside 1..{M}")
        d[M + k] += a / 2
        d[M - k] += a / 2
    for k, b in (sin or {}).items():
        k = int(k)
        if not 1 <= k <= M:
            raise ShapeError(f"harmonic {k} outside 1..{M}")
        d[M + k] += b / 2j
        d[M - k] -= b / 2j
    gamma = Diffeo(d)
    _check_monotone(gamma)
    return gamma


def identity(M: int = DEFAULT_CUTOFF) -> Diffeo:
    return Diffeo(np.zeros(2 * M + 1))


def rotation(alpha: float, M: int = DEFAULT_CUTOFF) -> Diffeo:
    return make_diffeo(const=alpha, M=M)


def invert_lift(gamma: Diffeo, y, tol: float = INVERT_TOL, maxiter: int = 100) -> np.ndarray:
    """Solve ``g(theta) = y`` per entry by Newton with bisection safeguard."""
    y = np.asarray(y, dtype=float)
    D = float(np.sum(np.abs(gamma.dhat))) + 1e-14
    lo, hi = y - D, y + D
    t = y - gamma.displacement(y)
    for _ in range(maxiter):
        f = gamma.lift(t) - y
        lo = np.where(f < 0, t, lo)
        hi = np.where(f > 0, t, hi)
        step = f / gamma.lift_derivative(t)
        tn = t - step
        outside = (tn <= lo) | (tn >= hi)
        tn = np.where(outside, 0.5 * (lo + hi), tn)
        done = np.abs(tn - t) < tol
        t = tn
        if np.all(done):
            # one more Newton step to polish below tol
            return t - (gamma.lift(t) - y) / gamma.lift_derivative(t)
    raise FlowError("lift inversion did not converge")


def invert(gamma: Diffeo) -> Diffeo:
    """Lift of the inverse diffeomorphism, refit at the same cutoff."""
    t = invert_lift(gamma, gamma.theta)
    inv = Diffeo.from_lift_samples(t, gamma.M)
    _check_tail(inv)
    return inv


def compose(a: Diffeo, b: Diffeo) -> Diffeo:
    """``a o b``, sampled on the finer of the two grids."""
    M = max(a.M, b.M)
    K = grid_size(M)
    theta = 2 * np.pi * np.arange(K) / K
    out = Diffeo.from_lift_samples(a.lift(b.lift(theta)), M)
    _check_tail(out)
    return out


def _check_tail(gamma: Diffeo) -> None:
    if gamma.tail > REFIT_TAIL_TOL:
        raise ResolutionError(f"diffeo refit lost {gamma.tail:.2e}; raise the cutoff")


def pushforward_loop(G0: Loop, gamma: Diffeo, M: int | None = None,
                     tail_tol: float = 1e-8) -> Loop:
    """``G0 o gamma^-1`` sampled at the grid and analyzed at cutoff ``M``."""
    M = G0.M if M is None else M
    K = grid_size(M)
    theta = 2 * np.pi * np.arange(K) / K
    pre = np.exp(1j * invert_lift(gamma, theta))
    out = analyze(G0(pre), M)
    if out.residue > tail_tol:
        raise ResolutionError(f"pushforward tail {out.residue:.2e} exceeds {tail_tol:.1e} at M={M}")
    return out


@dataclass(frozen=True)
class RealField:
    """Real tangent field ``V(theta) d/dtheta`` on the circle.

    ``kind`` is ``"cos"`` (2 cos(m theta)), ``"sin"`` (2 sin(m theta)) or
    ``"rot"`` (constant 1, ``m = 0``).
    """

    kind: str
    m: int = 0

    def __call__(self, theta):
        if self.kind == "cos":
            return 2 * np.cos(self.m * theta)
        if self.kind == "sin":
            return 2 * np.sin(self.m * theta)
        if self.kind == "rot":
            return np.ones_like(theta)
        raise ValueError(f"unknown field kind {self.kind!r}")

    @property
    def lipschitz(self) -> float:
        return 0.0 if self.kind == "rot" else 2.0 * self.m


@dataclass(frozen=True)
class VirasoroDirection:
    """``L_m`` as a complex combination of real fields."""

    m: int

    def combination(self) -> list[tuple[complex, RealField]]:
        m = self.m
        if m == 0:
            return [(-1j, RealField("rot"))]
        k = abs(m)
        c, s = RealField("cos", k), RealField("sin", k)
        if m > 0:
            return [(0.5, s), (-0.5j, c)]
        return [(-0.5, s), (-0.5j, c)]

    @property
    def fields(self) -> list[RealField]:
        return [f for _, f in self.combination()]


def _rk4_flow(field: RealField, t: float, theta0: np.ndarray) -> np.ndarray:
    """Integrate ``dtheta/dt = V(theta)`` for time ``t`` with classic RK4.

    The step count keeps ``|dt| * Lip(V)`` below 5e-3.
    """
    if t == 0:
        return np.array(theta0, dtype=float)
    n = max(1, int(np.ceil(abs(t) * field.lipschitz / 5e-3)))
    dt = t / n
    y = np.array(theta0, dtype=float)
    for _ in range(n):
        k1 = field(y)
        k2 = field(y + 0.5 * dt * k1)
        k3 = field(y + 0.5 * dt * k2)
        k4 = field(y + dt * k3)
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def virasoro_flow(field: RealField, t: float, gamma0: Diffeo) -> Diffeo:
    """``phi^t o gamma0`` where ``phi^t`` is the time-``t`` flow of a real field."""
    if t == 0:
        return gamma0
    lifted = _rk4_flow(field, t, gamma0.samples)
    try:
        out = Diffeo.from_lift_samples(lifted, gamma0.M)
    except NotADiffeomorphismError as exc:
        raise FlowError(f"flow for t={t} lost monotonicity; step too large") from exc
    _check_tail(out)
    return out


def directional_derivatives(F: Callable[[Diffeo], np.ndarray], fields, gamma: Diffeo,
                            h: float = DEFAULT_STEP, map_fn=map) -> dict:
    """Central differences ``[F(phi^h o g) - F(phi^-h o g)] / 2h`` per real field.

    ``map_fn`` evaluates ``F`` over the flowed points (pass an executor's
    ``map`` to run them in parallel); results are combined in a fixed order.
    """
    if h <= 0:
        raise ValueError("finite-difference step must be positive")
    fields = list(dict.fromkeys(fields))
    points = []
    for f in fields:
        points.append(virasoro_flow(f, h, gamma))
        points.append(virasoro_flow(f, -h, gamma))
    values = list(map_fn(F, points))
    out = {}
    for i, f in enumerate(fields):
        fp, fm = np.asarray(values[2 * i]), np.asarray(values[2 * i + 1])
        out[f] = (fp - fm) / (2 * h)
    return out


def combine(m: int, derivs: dict) -> np.ndarray:
    """Assemble ``L_m . F`` from real-field derivatives."""
    return sum(c * derivs[f] for c, f in VirasoroDirection(m).combination())


def lie_derivative(F: Callable[[Diffeo], np.ndarray], m: int, gamma: Diffeo,
                   h: float = DEFAULT_STEP, map_fn=map) -> np.ndarray:
    """``(L_m . F)_gamma`` by second-order central differences along real flows."""
    direction = VirasoroDirection(m)
    return combine(m, directional_derivatives(F, direction.fields, gamma, h, map_fn))
