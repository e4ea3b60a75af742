"""Residual suites behind the experiment runner.

Each suite appends flat records to a :class:`Recorder`.  A record is gated
(``pass``/``fail``) when it is judged against a tolerance and ``info`` when it
only documents a value, e.g. finite-difference residuals at the coarser steps
of an ``h`` list.  Exceptions from the numerical modules become ``fail``
records carrying the original message.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import families
from .birkhoff import DetFormula, factorize, jump_residual
from .circle_diffeo import Diffeo, identity, lie_derivative, make_diffeo
from .config import ExperimentConfig
from .errors import LoopError
from .fourier_circle import Loop, analyze, derivative, det_samples, from_function, grid_size
from .fuchsian_bridge import (
    CONVENTIONS,
    FuchsianData,
    ks_coefficients,
    ks_identity_residual,
    random_fuchsian_data,
    schlesinger_vector_field,
    tmap_check,
    winning_convention,
)
from .isomonodromy import (
    DeformationContext,
    deformation_jet,
    integrability_residuals,
    isomonodromy_check,
    schlesinger_rhs,
)
from .jump_residue import (
    compute_jump_density,
    eval_field,
    eval_omega,
    field_from_factor,
    SlowConvergenceWarning,
    fourier_coefficients_B,
)

RECORD_KEYS = ("suite", "check", "gamma", "m", "n", "h", "M", "residual", "tolerance", "status", "detail")

# fixed data for the bridge suite
TMAP_TAUS = np.exp(1j * np.array([0.3, 2.1, 4.0]))
MONOMIAL_POINT = np.exp(0.7j)
MONOMIAL_POWERS = (1, 2, 3)
DECAY_POINTS = (10.0, 100.0, 1000.0)


def _opnorm(X) -> float:
    return float(np.linalg.norm(X, ord=2))


@dataclass
class Recorder:
    """Collects records; ``scale`` multiplies every residual tolerance."""

    config: ExperimentConfig
    scale: float = 1.0
    records: list = field(default_factory=list)
    timing: dict = field(default_factory=dict)

    def tol(self, key: str) -> float:
        return self.config.tolerance(key, self.scale)

    def add(self, suite, check, residual, tol_key=None, *, gamma=None, m=None, n=None, h=None,
            M=None, gated=True, detail="") -> dict:
        tol = self.tol(tol_key) if tol_key else None
        if residual is None or not np.isfinite(residual):
            status = "fail"
        elif not gated or tol is None:
            status = "info"
        else:
            status = "pass" if residual <= tol else "fail"
        rec = dict(suite=suite, check=check, gamma=gamma, m=m, n=n, h=h, M=M,
                   residual=None if residual is None else float(residual),
                   tolerance=tol if gated else None, status=status, detail=detail)
        self.records.append(rec)
        return rec

    def fail(self, suite, check, exc: Exception, **idx) -> dict:
        return self.add(suite, check, None, None, detail=f"{type(exc).__name__}: {exc}", **idx)


def fitted_order(hs, rs, floor: float):
    """Least-squares slope of ``log r`` against ``log h`` over points above ``floor``.

    Returns ``None`` when fewer than two points clear the floor.
    """
    pts = [(h, r) for h, r in zip(hs, rs) if r is not None and r > floor]
    if len(pts) < 2:
        return None
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    return float(np.polyfit(x, y, 1)[0])


def add_order_records(rec: Recorder, suite: str, check: str, series: dict, M=None) -> None:
    """One order record per key of ``series``, a map ``(gamma, m, n) -> [(h, r), ...]``."""
    floor = rec.tol("floor")
    target = 2.0
    for (gamma, m, n), pts in sorted(series.items(), key=lambda kv: str(kv[0])):
        pts = sorted(pts, reverse=True)
        if len(pts) < 2:
            continue
        hs, rs = zip(*pts)
        order = fitted_order(hs, rs, floor)
        if order is None:
            worst = max(r for r in rs if r is not None) if any(r is not None for r in rs) else None
            ok = worst is not None and worst <= 10 * floor
            rec.records.append(dict(
                suite=suite, check=f"order:{check}", gamma=gamma, m=m, n=n, h=None, M=M,
                residual=None, tolerance=rec.tol("order"), status="pass" if ok else "fail",
                detail=f"rounding floor: max residual {worst:.2e} over h, order undefined"
                if worst is not None else "no residuals"))
            continue
        err = abs(order - target)
        rec.records.append(dict(
            suite=suite, check=f"order:{check}", gamma=gamma, m=m, n=n, h=None, M=M,
            residual=order, tolerance=rec.tol("order"),
            status="pass" if err <= rec.tol("order") else "fail",
            detail=f"fitted order {order:.3f}, target {target}"))


def build_gammas(cfg: ExperimentConfig, cutoff: int = 32) -> dict:
    """``{"e": identity}`` plus the configured displacement, if any."""
    out = {"e": identity(cutoff)}
    if cfg.diffeo:
        d = cfg.diffeo
        out["diffeo"] = make_diffeo(cos=d.get("cos"), sin=d.get("sin"), const=float(d.get("const", 0.0)),
                                    M=int(d.get("cutoff", cutoff)))
    return out


def _eval_side(Y: Loop, x: complex) -> np.ndarray:
    """Evaluate the analytic continuation of a one-sided factor at ``x``."""
    k = Y.modes
    keep = k >= 0 if abs(x) < 1 else k <= 0
    return np.tensordot(complex(x) ** k[keep], Y.coeffs[keep], axes=(0, 0))


def _log_derivative_samples(Y: Loop, K: int) -> np.ndarray:
    return derivative(Y).sample(K) @ np.linalg.inv(Y.sample(K))


# ---------------------------------------------------------------- factorization

def _family_oracle(cfg: ExperimentConfig, M: int, pair, table) -> tuple[float, str] | None:
    name, p = cfg.family, cfg.family_params
    if name == "identity":
        I = families.identity_loop(cfg.N, M)
        err = max(pair.Yplus.coefficient_error(I), pair.Yminus.coefficient_error(I),
                  float(np.max(table.norms())))
        return err, "Y+ = Y- = I and B = 0"
    if name == "manufactured-unipotent":
        yp, ym = families.unipotent_factors(M)
        return (max(pair.Yplus.coefficient_error(yp), pair.Yminus.coefficient_error(ym)),
                "Y+ = [[1, xi], [0, 1]], Y- = [[1, 1/xi], [0, 1]]")
    if name == "scalar-exponential":
        a, b = float(p.get("alpha", 0.2)), float(p.get("beta", 0.3))
        yp = from_function(lambda x: np.exp(b * x), 1, M)
        ym = from_function(lambda x: np.exp(-a / x), 1, M)
        expected = {1: a, -1: -b}
        berr = max(abs(table[k][0, 0] - expected.get(k, 0.0)) for k in table.indices)
        return (max(pair.Yplus.coefficient_error(yp), pair.Yminus.coefficient_error(ym), berr),
                f"Y+ = exp({b} xi), Y- = exp(-{a}/xi), B_1 = {a}, B_-1 = {-b}")
    return None


def factorization_suite(rec: Recorder, M: int) -> None:
    cfg, S = rec.config, "factorization"
    try:
        G = families.build_family(cfg.family, cfg.family_params, cfg.N, M)
        pair = factorize(G, M)
    except LoopError as exc:
        rec.fail(S, "factorize", exc, M=M)
        return
    rec.add(S, "jump", pair.jump_residual, "jump", M=M,
            detail=f"condition estimate {pair.condition_estimate:.3e}")

    try:
        G2 = families.build_family(cfg.family, cfg.family_params, cfg.N, M, K=2 * grid_size(M))
        pair2 = factorize(G2, M)
        err = max(pair.Yplus.coefficient_error(pair2.Yplus), pair.Yminus.coefficient_error(pair2.Yminus))
        rec.add(S, "uniqueness", err, "uniqueness", M=M, detail="same M, grid K vs 2K")
    except LoopError as exc:
        rec.fail(S, "uniqueness", exc, M=M)

    A = compute_jump_density(pair.Yminus, G, M)
    table = fourier_coefficients_B(A, cfg.N_B)

    oracle = _family_oracle(cfg, M, pair, table)
    if oracle is not None:
        rec.add(S, "oracle", oracle[0], "oracle", M=M, detail=oracle[1])

    try:
        fmla = DetFormula(G)
        worst = 0.0
        for x in cfg.probes:
            Y = pair.Yplus if abs(x) < 1 else pair.Yminus
            d = np.linalg.det(_eval_side(Y, x))
            worst = max(worst, abs(fmla(x) - d) / max(1.0, abs(d)))
        rec.add(S, "det_formula", worst, "det_formula", M=M, detail="det Y(x) vs exp(Cauchy integral of log det G)")
    except LoopError as exc:
        rec.fail(S, "det_formula", exc, M=M)

    # d(det G)/dxi = tr(A) det G on a grid resolving the N-fold bandwidth
    K = grid_size(cfg.N * M)
    det_loop = analyze(det_samples(G, K), (K - 1) // 2)
    lhs = derivative(det_loop).sample(K)[:, 0, 0]
    rhs = np.trace(A.sample(K), axis1=1, axis2=2) * det_loop.sample(K)[:, 0, 0]
    rec.add(S, "det_ode", float(np.max(np.abs(lhs - rhs)) / max(1.0, np.max(np.abs(lhs)))), "det_ode", M=M)

    K = grid_size(M)
    jump = _log_derivative_samples(pair.Yplus, K) - _log_derivative_samples(pair.Yminus, K) - A.sample(K)
    rec.add(S, "additive_jump", float(np.max(np.linalg.norm(jump, ord=2, axis=(1, 2)))), "additive_jump",
            M=M, detail="Y+'/Y+ - Y-'/Y- - A on the grid")

    rec.add(S, "B0", _opnorm(table[0]), "B0", M=M)

    worst_f = worst_r = worst_o = 0.0
    for x in cfg.probes:
        Y = pair.Yplus if abs(x) < 1 else pair.Yminus
        series = eval_field(x, table)
        worst_f = max(worst_f, _opnorm(series - field_from_factor(Y, x)))
        worst_r = max(worst_r, _opnorm(series - eval_field(x, density=A, route="integral")))
        worst_o = max(worst_o, _opnorm(eval_omega(-1, x, density=A, route="integral") + series))
    rec.add(S, "field_vs_factor", worst_f, "routes", M=M, detail="series calA vs Y'Y^-1 at probes")
    rec.add(S, "field_routes", worst_r, "routes", M=M, detail="series vs quadrature at probes")
    rec.add(S, "omega_minus_one", worst_o, "omega_field", M=M, detail="Omega_-1 + calA at probes")

    B1 = max(1.0, _opnorm(table[1]))
    decay = max(_opnorm(x * x * eval_field(x, table) - table[1]) for x in DECAY_POINTS) / B1
    rec.add(S, "decay", decay, "decay", M=M, detail="max_x |x^2 calA(x) - B_1| at x in 10, 100, 1000")


# ---------------------------------------------------------------- deformation

@dataclass
class JetCache:
    """Deformation jets keyed by ``(gamma label, h)``, shared by the deformation suites."""

    ctx: DeformationContext
    gammas: dict
    m_values: tuple
    map_fn: object = map
    jets: dict = field(default_factory=dict)

    def get(self, label: str, h: float):
        key = (label, h)
        if key not in self.jets:
            try:
                self.jets[key] = deformation_jet(self.ctx, self.gammas[label], h, self.m_values, self.map_fn)
            except LoopError as exc:
                self.jets[key] = exc
        return self.jets[key]


def make_context(cfg: ExperimentConfig, M: int) -> DeformationContext:
    G0 = families.build_family(cfg.family, cfg.family_params, cfg.N, M)
    h0 = min(cfg.h)
    return DeformationContext(G0, M=M, N_B=cfg.N_B, h=h0, probes=cfg.probes)


def schlesinger_suite(rec: Recorder, cache: JetCache, M: int) -> None:
    cfg, S = rec.config, "schlesinger"
    hmin = min(cfg.h)
    ms = range(-cfg.m_max, cfg.m_max + 1)
    ns = [n for n in range(-cfg.n_max, cfg.n_max + 1) if n != 0]
    series, iso_series = {}, {}
    for label in cache.gammas:
        for h in sorted(cfg.h, reverse=True):
            gated = h == hmin
            jet = cache.get(label, h)
            if isinstance(jet, Exception):
                rec.fail(S, "deformation_jet", jet, gamma=label, h=h, M=M)
                continue
            for m in ms:
                for n in ns:
                    r = _opnorm(jet.L(m)[n] - schlesinger_rhs(jet.B, m, n))
                    rec.add(S, "universal_schlesinger", r, "schlesinger", gamma=label, m=m, n=n, h=h,
                            M=M, gated=gated)
                    series.setdefault((label, m, n), []).append((h, r))
                rec.add(S, "L_B0", _opnorm(jet.L(m)[0]), "schlesinger", gamma=label, m=m, n=0, h=h,
                        M=M, gated=gated)
            if gated:
                worst = max(_opnorm(schlesinger_rhs(jet.B, m, n) - schlesinger_rhs(jet.B, m, n, "equivalent"))
                            for m in ms for n in ns)
                rec.add(S, "rhs_forms", worst, "schlesinger", gamma=label, h=h, M=M,
                        detail="n-window vs m-window bracket sums")
            for m in ms:
                try:
                    r = isomonodromy_check(cache.ctx, cache.gammas[label], m, h=h)
                except LoopError as exc:
                    rec.fail(S, "isomonodromy", exc, gamma=label, m=m, h=h, M=M)
                    continue
                rec.add(S, "isomonodromy", r, "isomonodromy", gamma=label, m=m, h=h, M=M, gated=gated)
                iso_series.setdefault((label, m, None), []).append((h, r))
    add_order_records(rec, S, "universal_schlesinger", series, M)
    add_order_records(rec, S, "isomonodromy", iso_series, M)


def integrability_suite(rec: Recorder, cache: JetCache, M: int) -> None:
    cfg, S = rec.config, "integrability"
    hmin = min(cfg.h)
    for label in cache.gammas:
        jet = cache.get(label, hmin)
        if isinstance(jet, Exception):
            rec.fail(S, "deformation_jet", jet, gamma=label, h=hmin, M=M)
            continue
        r1s = {}
        for m in range(-cfg.m_max, cfg.m_max + 1):
            for n in range(-cfg.n_max, cfg.n_max + 1):
                if n == m:
                    continue
                r1, r2 = integrability_residuals(cache.ctx, cache.gammas[label], m, n, jet=jet)
                r1s[m] = r1
                rec.add(S, "pfaffian_2", r2, "integrability", gamma=label, m=m, n=n, h=hmin, M=M)
        for m in sorted(r1s):
            rec.add(S, "pfaffian_1", r1s[m], "integrability", gamma=label, m=m, h=hmin, M=M)


# ---------------------------------------------------------------- bridge

def _tmap_g(t):
    return t[0] ** 2 * t[1] + 3 * t[2] - t[0] * t[2]


def _tmap_grad(t):
    return np.array([2 * t[0] * t[1] - t[2], t[0] ** 2, 3 - t[0]])


def virasoro_bracket_residual(m: int, n: int, k: int, gamma: Diffeo, h: float,
                              tau: complex = MONOMIAL_POINT) -> float:
    """``|[L_m, L_n] F - (n - m) L_{m+n} F|`` for ``F(g) = g(tau)**k`` by nested differences."""
    def F(g):
        return g(np.array([tau]))[0] ** k

    def LnF(g):
        return lie_derivative(F, n, g, h)

    def LmF(g):
        return lie_derivative(F, m, g, h)

    lhs = lie_derivative(LnF, m, gamma, h) - lie_derivative(LmF, n, gamma, h)
    rhs = (n - m) * lie_derivative(F, m + n, gamma, h)
    return float(abs(lhs - rhs))


def monomial_lie_residual(m: int, k: int, gamma: Diffeo, h: float, tau: complex = MONOMIAL_POINT) -> float:
    """``|L_m F - k g(tau)**(k+m)|`` for ``F(g) = g(tau)**k``; at the identity ``k tau**(k+m)``."""
    def F(g):
        return g(np.array([tau]))[0] ** k

    fd = lie_derivative(F, m, gamma, h)
    return float(abs(fd - k * gamma(np.array([tau]))[0] ** (k + m)))


def commuting_discriminator(X: np.ndarray, ns=range(0, 5), ms=range(-1, 5)) -> dict:
    """Hand values for ``A = (X, -X)`` at ``t = (1, 2)``.

    ``B_n = (1 - 2**e) X``; the identity closes for ``e = n`` and misses by
    ``|B_{m+n}|`` for ``e = n + 1``.
    """
    data = FuchsianData(np.array([1.0, 2.0]), np.stack([X, -X]))
    field_ = schlesinger_vector_field(data)
    coef_err = miss_err = res_n = 0.0
    for n in ns:
        for conv, e in (("n", n), ("n+1", n + 1)):
            coef_err = max(coef_err, _opnorm(ks_coefficients(data, n, conv) - (1 - 2.0 ** e) * X))
    for m in ms:
        for n in ns:
            res_n = max(res_n, ks_identity_residual(data, m, n, "n", field_))
            miss = ks_identity_residual(data, m, n, "n+1", field_)
            miss_err = max(miss_err, abs(miss - _opnorm(ks_coefficients(data, m + n, "n+1"))))
    return {"coefficients": coef_err, "residual_n": res_n, "residual_n+1_vs_norm": miss_err}


def bridge_suite(rec: Recorder, gammas: dict) -> None:
    cfg, S = rec.config, "bridge"
    rng = np.random.default_rng(cfg.seed)
    Nf = max(cfg.N, 2)
    data = random_fuchsian_data(3, Nf, rng)
    winner, worst = winning_convention(data, tol=rec.tol("ks"))
    for conv in CONVENTIONS:
        rec.add(S, f"ks_convention[{conv}]", worst[conv], None,
                detail="worst relative residual over m in -1..4, n in 0..4")
    if winner is None:
        rec.add(S, "ks_winner", None, None, detail=f"no unique convention closes the identity: {worst}")
    else:
        rec.add(S, "ks_winner", 0.0, "ks", detail=f"unique closing convention e = {winner}")
        field_ = schlesinger_vector_field(data)
        for m in range(-1, 5):
            for n in range(0, 5):
                rec.add(S, "ks_identity", ks_identity_residual(data, m, n, winner, field_), "ks", m=m, n=n,
                        detail=f"convention e = {winner}")
    X = rng.standard_normal((Nf, Nf)) + 1j * rng.standard_normal((Nf, Nf))
    for key, val in commuting_discriminator(X).items():
        rec.add(S, f"commuting[{key}]", val, "ks")

    hmin = min(cfg.h)
    ms = range(-cfg.m_max, cfg.m_max + 1)
    tmap, mono = {}, {}
    for label, gamma in gammas.items():
        for h in sorted(cfg.h, reverse=True):
            gated = h == hmin
            for m in ms:
                try:
                    fd, exact = tmap_check(_tmap_g, _tmap_grad, TMAP_TAUS, m, gamma, h)
                    r = abs(fd - exact)
                    rec.add(S, "tmap", r, "tmap", gamma=label, m=m, h=h, gated=gated)
                    tmap.setdefault((label, m, None), []).append((h, r))
                    r = max(monomial_lie_residual(m, k, gamma, h) for k in MONOMIAL_POWERS)
                    rec.add(S, "monomial_lie", r, "virasoro", gamma=label, m=m, h=h, gated=gated)
                    mono.setdefault((label, m, None), []).append((h, r))
                except LoopError as exc:
                    rec.fail(S, "tmap", exc, gamma=label, m=m, h=h)
    add_order_records(rec, S, "tmap", tmap)
    add_order_records(rec, S, "monomial_lie", mono)

    w = min(cfg.m_max, 2)
    for m in range(-w, w + 1):
        for n in range(-w, w + 1):
            if m < n:
                r = max(virasoro_bracket_residual(m, n, k, gammas["e"], hmin) for k in MONOMIAL_POWERS)
                rec.add(S, "virasoro_bracket", r, "virasoro", gamma="e", m=m, n=n, h=hmin)


# ---------------------------------------------------------------- driver

def run_suites(cfg: ExperimentConfig, M: int, scale: float = 1.0, map_fn=map) -> Recorder:
    """Execute the selected suites at cutoff ``M`` in dependency order."""
    with warnings.catch_warnings():
        # truncation shows up in the recorded residuals themselves
        warnings.simplefilter("ignore", SlowConvergenceWarning)
        return _run_suites(cfg, M, scale, map_fn)


def _run_suites(cfg: ExperimentConfig, M: int, scale: float, map_fn) -> Recorder:
    rec = Recorder(cfg, scale)
    gammas = build_gammas(cfg)
    cache = None
    for suite in cfg.ordered_suites:
        t0 = time.perf_counter()
        if suite == "factorization":
            factorization_suite(rec, M)
        elif suite in ("schlesinger", "integrability"):
            if cache is None:
                try:
                    ctx = make_context(cfg, M)
                except LoopError as exc:
                    rec.fail(suite, "context", exc, M=M)
                    continue
                w = max(cfg.m_max, cfg.n_max)
                cache = JetCache(ctx, gammas, tuple(range(-w, w + 1)), map_fn)
            if suite == "schlesinger":
                schlesinger_suite(rec, cache, M)
            else:
                integrability_suite(rec, cache, M)
        elif suite == "bridge":
            bridge_suite(rec, gammas)
        rec.timing[f"{suite}@M={M}"] = time.perf_counter() - t0
    return rec
