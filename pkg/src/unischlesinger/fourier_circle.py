"""Matrix-valued loops on the unit circle in a dual grid / Fourier representation.

A :class:`Loop` stores the two-sided coefficient table ``f_k`` (``-M <= k <= M``)
of a band-limited function ``f(xi) = sum_k f_k xi**k`` with values in the
``N x N`` complex matrices.  Grid samples at ``xi_j = exp(2i pi j / K)`` are
derived on demand.  Every operation returns a new loop; nothing is mutated.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (
    DealiasingError,
    OnContourError,
    ResolutionError,
    ShapeError,
    SingularNodeError,
)

__all__ = [
    "Loop",
    "CauchySide",
    "grid_size",
    "grid_nodes",
    "analyze",
    "synthesize",
    "from_function",
    "constant",
    "monomial",
    "derivative",
    "multiply",
    "cauchy_project",
    "hilbert_transform",
    "cauchy_eval",
    "contour_integral",
    "winding_number",
    "continuous_log",
    "det_samples",
]

# |x| closer than this to the circle is rejected by cauchy_eval
CONTOUR_EXCLUSION = 1e-8


def grid_size(M: int) -> int:
    """Smallest power of two holding one dealiased product of two cutoff-``M`` loops."""
    need = 2 * (2 * M + 1)
    return 1 << (need - 1).bit_length()


def grid_nodes(K: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(K) / K)


class CauchySide(enum.Enum):
    PLUS = "plus"    # inner disk
    MINUS = "minus"  # exterior, containing infinity


@dataclass(frozen=True, eq=False)
class Loop:
    """Band-limited matrix loop.

    Parameters
    ----------
    coeffs : ndarray, shape (2M+1, N, N)
        ``coeffs[k + M]`` is the Fourier coefficient of ``xi**k``.
    residue : float
        Norm of the largest coefficient discarded when this loop was built
        (truncation / aliasing indicator).  Zero for exact constructions.
    """

    coeffs: np.ndarray
    residue: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim == 1:
            c = c[:, None, None]
        if c.ndim != 3 or c.shape[1] != c.shape[2] or c.shape[0] % 2 != 1:
            raise ShapeError(f"coefficient table must have shape (2M+1, N, N), got {c.shape}")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def M(self) -> int:
        return (self.coeffs.shape[0] - 1) // 2

    @property
    def N(self) -> int:
        return self.coeffs.shape[1]

    @property
    def K(self) -> int:
        return grid_size(self.M)

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.M, self.M + 1)

    def coeff(self, k: int) -> np.ndarray:
        if abs(k) > self.M:
            return np.zeros((self.N, self.N), dtype=complex)
        return self.coeffs[k + self.M]

    @cached_property
    def samples(self) -> np.ndarray:
        """Values at the ``K`` equispaced grid nodes, shape (K, N, N)."""
        return synthesize(self)

    def sample(self, K: int) -> np.ndarray:
        return synthesize(self, K=K)

    def __call__(self, xi) -> np.ndarray:
        return synthesize(self, xi)

    def with_cutoff(self, M: int) -> "Loop":
        """Zero-pad or truncate to cutoff ``M``; truncated mass goes to ``residue``."""
        if M == self.M:
            return self
        if M > self.M:
            c = np.zeros((2 * M + 1, self.N, self.N), dtype=complex)
            c[M - self.M:M + self.M + 1] = self.coeffs
            return Loop(c, self.residue)
        d = self.M - M
        dropped = np.concatenate([self.coeffs[:d], self.coeffs[-d:]])
        return Loop(self.coeffs[d:-d], max(self.residue, _max_norm(dropped)))

    def __add__(self, other: "Loop") -> "Loop":
        a, b = _common(self, other)
        return Loop(a.coeffs + b.coeffs, max(a.residue, b.residue))

    def __sub__(self, other: "Loop") -> "Loop":
        a, b = _common(self, other)
        return Loop(a.coeffs - b.coeffs, max(a.residue, b.residue))

    def __neg__(self) -> "Loop":
        return Loop(-self.coeffs, self.residue)

    def __mul__(self, scalar) -> "Loop":
        if isinstance(scalar, Loop):
            return multiply(self, scalar)
        return Loop(self.coeffs * scalar, self.residue * abs(scalar))

    __rmul__ = __mul__

    def __matmul__(self, other: "Loop") -> "Loop":
        return multiply(self, other)

    def coefficient_error(self, other: "Loop") -> float:
        """Max over modes of the 2-norm of the coefficient difference."""
        a, b = _common(self, other)
        return _max_norm(a.coeffs - b.coeffs)


def _common(a: Loop, b: Loop) -> tuple[Loop, Loop]:
    if a.N != b.N:
        raise ShapeError(f"dimension mismatch: {a.N} vs {b.N}")
    M = max(a.M, b.M)
    return a.with_cutoff(M), b.with_cutoff(M)


def _max_norm(mats: np.ndarray) -> float:
    if mats.size == 0:
        return 0.0
    return float(np.max(np.linalg.norm(mats, ord=2, axis=(-2, -1))))


def _as_matrix_samples(samples) -> np.ndarray:
    s = np.asarray(samples, dtype=complex)
    if s.ndim == 1:
        s = s[:, None, None]
    if s.ndim != 3 or s.shape[1] != s.shape[2]:
        raise ShapeError(f"samples must have shape (K, N, N) or (K,), got {s.shape}")
    return s


def analyze(samples, M: int) -> Loop:
    """Coefficients of the trigonometric interpolant of grid samples.

    ``samples[j]`` is the value at ``exp(2i pi j / K)``.  Modes with
    ``M < |k| <= K/2`` are dropped and their largest norm is stored as the
    loop's ``residue``.
    """
    s = _as_matrix_samples(samples)
    K = s.shape[0]
    if K < 2 * M + 1:
        raise ShapeError(f"{K} samples cannot resolve cutoff M={M} (need K >= {2 * M + 1})")
    F = np.fft.fft(s, axis=0) / K
    idx = np.arange(-M, M + 1) % K
    kept = np.zeros(K, dtype=bool)
    kept[idx] = True
    residue = _max_norm(F[~kept])
    return Loop(F[idx], residue)


def synthesize(loop: Loop, xi=None, K: int | None = None) -> np.ndarray:
    """Evaluate ``sum_k f_k xi**k``.

    With ``xi=None`` the loop is evaluated on the ``K``-point grid by FFT
    (``K`` defaults to ``loop.K``); otherwise by direct summation at the given
    points, returning an array of shape ``xi.shape + (N, N)``.
    """
    if xi is None:
        K = loop.K if K is None else K
        if K < 2 * loop.M + 1:
            raise ShapeError(f"grid of {K} nodes too coarse for cutoff {loop.M}")
        buf = np.zeros((K, loop.N, loop.N), dtype=complex)
        buf[loop.modes % K] = loop.coeffs
        return np.fft.ifft(buf, axis=0) * K
    x = np.asarray(xi, dtype=complex)
    powers = x[..., None] ** loop.modes
    return np.tensordot(powers, loop.coeffs, axes=([-1], [0]))


def from_function(func, N: int, M: int, K: int | None = None) -> Loop:
    """Sample ``func(xi) -> (K, N, N)`` on the grid and analyze at cutoff ``M``."""
    K = grid_size(M) if K is None else K
    vals = np.asarray(func(grid_nodes(K)), dtype=complex)
    if vals.ndim == 1:
        vals = vals[:, None, None]
    if vals.shape != (K, N, N):
        raise ShapeError(f"function returned shape {vals.shape}, expected {(K, N, N)}")
    return analyze(vals, M)


def constant(mat, M: int = 0) -> Loop:
    m = np.atleast_2d(np.asarray(mat, dtype=complex))
    c = np.zeros((2 * M + 1,) + m.shape, dtype=complex)
    c[M] = m
    return Loop(c)


def monomial(k: int, mat=1.0, M: int | None = None) -> Loop:
    """The loop ``mat * xi**k``."""
    M = abs(k) if M is None else M
    m = np.atleast_2d(np.asarray(mat, dtype=complex))
    c = np.zeros((2 * M + 1,) + m.shape, dtype=complex)
    c[k + M] = m
    return Loop(c)


def derivative(loop: Loop) -> Loop:
    """Complex derivative d/dxi, modewise: coefficient of xi**(k-1) is k f_k.

    The cutoff is kept; the single mode pushed below ``-M`` is reported in
    ``residue``.
    """
    M = loop.M
    k = loop.modes[:, None, None]
    scaled = k * loop.coeffs
    c = np.zeros_like(scaled)
    c[:-1] = scaled[1:]
    lost = _max_norm(scaled[:1])
    return Loop(c, max(loop.residue, lost))


def multiply(a: Loop, b: Loop, M: int | None = None, K: int | None = None) -> Loop:
    """Pointwise matrix product ``a(xi) @ b(xi)``.

    Computed on a zero-padded grid of ``K`` nodes (default: dealiased for the
    combined bandwidth) and truncated to cutoff ``M`` (default ``max(a.M, b.M)``);
    dropped modes are reported in ``residue``.
    """
    if a.N != b.N:
        raise ShapeError(f"dimension mismatch: {a.N} vs {b.N}")
    band = a.M + b.M
    M = max(a.M, b.M) if M is None else M
    if K is None:
        K = 1 << (2 * max(band, M)).bit_length()
    if K < 2 * band + 1:
        raise DealiasingError(
            f"grid of {K} nodes cannot hold a product of bandwidth {band} (need {2 * band + 1})"
        )
    prod = np.matmul(synthesize(a, K=K), synthesize(b, K=K))
    out = analyze(prod, min(M, (K - 1) // 2)).with_cutoff(M)
    return Loop(out.coeffs, max(out.residue, a.residue, b.residue))


def cauchy_project(loop: Loop, side: CauchySide) -> Loop:
    """Boundary values of the Cauchy integral from the given side.

    ``C+`` keeps modes ``k >= 0``; ``C-`` is minus the modes ``k < 0``.
    """
    c = np.array(loop.coeffs)
    neg = loop.modes < 0
    if side is CauchySide.PLUS:
        c[neg] = 0
    else:
        c[~neg] = 0
        c = -c
    return Loop(c, loop.residue)


def hilbert_transform(loop: Loop) -> Loop:
    """Principal-value transform ``H f(u) = PV (1/i pi) int f(xi)/(xi-u) dxi``.

    Modewise ``H(xi**k) = xi**k`` for ``k >= 0`` and ``-xi**k`` for ``k < 0``,
    so that ``C+ + C- = H``.
    """
    sign = np.where(loop.modes >= 0, 1.0, -1.0)[:, None, None]
    return Loop(sign * loop.coeffs, loop.residue)


def cauchy_eval(loop: Loop, x, route: str = "series") -> np.ndarray:
    """Cauchy integral ``F(x) = (1/2i pi) int f(xi)/(xi - x) dxi`` off the circle.

    ``route="series"`` uses the mode rule, ``route="quadrature"`` the
    trapezoid rule on the loop's grid.  ``x`` may be ``inf`` (value 0).
    """
    x = complex(x)
    if np.isinf(x.real) or np.isinf(x.imag):
        return np.zeros((loop.N, loop.N), dtype=complex)
    r = abs(x)
    if abs(r - 1.0) < CONTOUR_EXCLUSION:
        raise OnContourError(f"|x| = {r!r} is on the contour; use cauchy_project for limits")
    if route == "series":
        if r < 1:
            k = np.arange(0, loop.M + 1)
            return np.tensordot(x ** k, loop.coeffs[loop.M:], axes=(0, 0))
        k = np.arange(-loop.M, 0)
        return -np.tensordot(x ** k, loop.coeffs[:loop.M], axes=(0, 0))
    if route == "quadrature":
        nodes = grid_nodes(loop.K)
        w = nodes / (nodes - x) / loop.K
        return np.tensordot(w, loop.samples, axes=(0, 0))
    raise ValueError(f"unknown route {route!r}")


def contour_integral(loop: Loop) -> np.ndarray:
    """``int_{S^1} f(xi) dxi = 2 i pi f_{-1}``."""
    return 2j * np.pi * loop.coeff(-1)


def _phase_steps(s: np.ndarray) -> np.ndarray:
    return np.angle(np.roll(s, -1) / s)


# per-step phase increments above this are treated as under-resolved
_MAX_PHASE_STEP = np.pi / 2


def _scalar_samples(f, refine: int) -> np.ndarray:
    if isinstance(f, Loop):
        if f.N != 1:
            raise ShapeError("winding number needs a scalar loop")
        return f.sample(f.K * refine)[:, 0, 0]
    s = np.asarray(f, dtype=complex)
    if s.ndim != 1:
        raise ShapeError("scalar samples must be one-dimensional")
    return s


def winding_number(f, zero_tol: float = 1e-10) -> int:
    """Winding number of a scalar loop (or 1-D grid samples) about the origin.

    Uses continuous phase unwrapping.  Loops are resampled on a 4x finer grid
    when a phase step is too large; raw samples are rejected instead.
    """
    for refine in (1, 4):
        s = _scalar_samples(f, refine)
        if np.min(np.abs(s)) < zero_tol:
            raise SingularNodeError("loop vanishes (numerically) on the circle")
        steps = _phase_steps(s)
        if np.max(np.abs(steps)) < _MAX_PHASE_STEP:
            return int(round(steps.sum() / (2 * np.pi)))
        if not isinstance(f, Loop):
            break
    raise ResolutionError("phase increments between nodes too large; loop under-resolved")


def continuous_log(samples) -> np.ndarray:
    """Logarithm of nonvanishing grid samples, continuous along the grid.

    The branch at node 0 is principal.  Closing up (zero winding) is the
    caller's responsibility.
    """
    s = np.asarray(samples, dtype=complex)
    steps = _phase_steps(s)
    if np.max(np.abs(steps)) >= _MAX_PHASE_STEP:
        raise ResolutionError("phase increments between nodes too large; loop under-resolved")
    phase = np.angle(s[0]) + np.concatenate([[0.0], np.cumsum(steps[:-1])])
    return np.log(np.abs(s)) + 1j * phase


def det_samples(loop: Loop, K: int | None = None) -> np.ndarray:
    """``det f(xi_j)`` on a ``K``-point grid (default: resolves the N-fold bandwidth)."""
    K = grid_size(loop.N * loop.M) if K is None else K
    return np.linalg.det(loop.sample(K))
