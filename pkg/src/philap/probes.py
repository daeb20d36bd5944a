"""Sampled falsifiers for the hypotheses of the existence theorems.

Every probe returns a :class:`ProbeResult`.  "pass" means no counterexample
was found at the declared sample scale; a "fail" always carries a witness
that can be re-evaluated directly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize

from .clarke import Potential
from .gfunc import (GFunction, conjugate, conjugate_function, delta2_report, order_llcurly,
                    sample_directions)

Array = np.ndarray

PASS, FAIL, NOT_PROBED = "pass", "fail", "not-probed"
SCALE_NOTE = "no counterexample found at the declared sample scale"

THEOREMS = {
    "theorem1": ("H1", "H2", "H3", "H4", "H5"),
    "theorem2": ("H1", "H2", "H3", "H6", "H7", "H8"),
    "theorem3": ("H1", "H2", "H3", "H8", "nfunction", "H9"),
}
HYPOTHESES = ("H1", "H2", "H3", "H4", "H5", "H6", "H7", "H8", "H9",
              "pasca1", "pasca2", "pasca3", "nfunction")


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (np.floating, float)):
        f = float(v)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


@dataclass
class ProbeResult:
    status: str
    witness: dict | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status == FAIL and not self.witness:
            raise ValueError("a failing probe must carry a witness")

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_dict(self) -> dict:
        out = {"status": self.status, "witness": _jsonable(self.witness),
               "metadata": _jsonable(self.metadata)}
        if self.status == PASS:
            out["note"] = SCALE_NOTE
        return out


@dataclass
class HypothesisReport:
    results: dict

    def status(self, name: str) -> str:
        r = self.results.get(name)
        return NOT_PROBED if r is None else r.status

    @property
    def theorem_verdict(self) -> dict:
        return {thm: all(self.status(h) == PASS for h in hyps) for thm, hyps in THEOREMS.items()}

    def to_dict(self) -> dict:
        res = {h: (self.results[h].to_dict() if h in self.results else {"status": NOT_PROBED})
               for h in HYPOTHESES}
        return {"results": res, "theorem_verdict": self.theorem_verdict,
                "theorems_passing": [k for k, v in self.theorem_verdict.items() if v]}


# ---------------------------------------------------------------------------
# sampling helpers


def ball_samples(n: int, radius: float, per_direction: int = 16, seed: int = 0) -> Array:
    """Origin plus log-spaced radii in ``[radius*1e-3, radius]`` along deterministic directions."""
    dirs = sample_directions(n, seed=seed)
    radii = np.geomspace(radius * 1e-3, radius, per_direction)
    pts = (radii[:, None, None] * dirs[None, :, :]).reshape(-1, n)
    return np.vstack([np.zeros((1, n)), pts])


def time_grid(period: float, samples: int = 257, decades: int = 12) -> Array:
    """Uniform interior grid plus points log-clustered toward both endpoints (endpoints excluded)."""
    uni = np.linspace(0.0, period, samples)[1:-1]
    near = period * np.geomspace(10.0 ** -(decades + 1), 0.1, 5 * decades + 1)
    return np.unique(np.concatenate([uni, near, period - near]))


def endpoint_decay(fn: Callable[[Array], Array], period: float, decades: int = 12) -> dict:
    """Per-decade integrals of ``fn`` approaching each endpoint and an integrability verdict.

    Near an endpoint, ``fn ~ s^-a`` contributes ``~10^{-k(1-a)}`` on the k-th
    decade; integrability is declared when the last four decades shrink by at
    least ``10^-0.2`` (i.e. an estimated exponent below 0.95).
    """
    out: dict = {"integrable": True}
    for side in ("left", "right"):
        contrib = []
        for k in range(1, decades + 1):
            s = period * np.geomspace(10.0 ** -(k + 1), 10.0 ** -k, 9)
            t = s if side == "left" else period - s
            vals = np.asarray(fn(t), dtype=float)
            if not np.all(np.isfinite(vals)):
                contrib.append(math.inf)
                continue
            ls = np.log(s)
            contrib.append(float(integrate.trapezoid(np.abs(vals) * s, ls)))
        out[side] = contrib
        c = np.array(contrib)
        if not np.all(np.isfinite(c)):
            out["integrable"] = False
        elif c[-5] > 0 and c[-1] >= 10 ** -0.2 * c[-5]:
            out["integrable"] = False
    return out


def _fn_or_const(b, default=None):
    if b is None:
        return default
    if callable(b):
        return b
    return lambda t: np.full(np.shape(t), float(b))


# ---------------------------------------------------------------------------
# individual probes


def probe_h1(phi: GFunction, radius: float = 100.0, samples: int = 2000) -> ProbeResult:
    """Strict convexity (declared by the family) and Delta_2 for phi and phi*."""
    meta: dict = {"strictly_convex": phi.strictly_convex}
    if not phi.strictly_convex:
        return ProbeResult(FAIL, {"reason": "phi is not strictly convex",
                                  "descriptor": phi.descriptor}, meta)
    rep = delta2_report(phi, radius, samples)
    meta["delta2_phi"] = rep.to_dict()
    if not rep.delta2:
        return ProbeResult(FAIL, {"reason": "phi fails Delta_2", "point": rep.witness}, meta)
    if phi.structure == "general":
        meta["delta2_conjugate"] = "not computed for general structure"
        return ProbeResult(NOT_PROBED, None, meta)
    rep2 = delta2_report(conjugate_function(phi), radius, samples)
    meta["delta2_conjugate"] = rep2.to_dict()
    if not rep2.delta2:
        return ProbeResult(FAIL, {"reason": "phi* fails Delta_2", "point": rep2.witness}, meta)
    return ProbeResult(PASS, None, meta)


def probe_h2(F: Potential) -> ProbeResult:
    """Regularity and local Lipschitz continuity hold by construction of the term kinds."""
    kinds = sorted({term.spatial.name for term in F.terms})
    return ProbeResult(PASS, None, {"by_construction": True, "kinds": kinds})


def _envelope(F: Potential, t: Array, X: Array) -> tuple[Array, Array]:
    # |F| + max |xi| for every (t, x) pair; shape (len(t), len(X))
    tt = np.broadcast_to(t[:, None], (t.size, X.shape[0]))
    XX = np.broadcast_to(X[None, :, :], (t.size,) + X.shape)
    with np.errstate(all="ignore"):
        lhs = np.abs(np.asarray(F.value(tt, XX))) + F.max_subgradient_norm(tt, XX)
    return lhs, XX


def probe_h3(F: Potential, b=None, radii: Sequence[float] = (1.0, 10.0, 100.0, 1000.0),
             t_samples: int = 257, per_direction: int = 16, seed: int = 0) -> ProbeResult:
    """Sampled envelope ``E_R(t) = sup_{|x|<=R} |F| + |xi|`` and its time integrability.

    With ``b`` given, the implied ``c(R) = sup E_R/b`` is tabulated; otherwise
    the table is the integral of ``E_R`` over the period.  Both must be finite
    and grow monotonically in R (bounded on bounded sets), and ``E_R`` (or
    ``b``) must be integrable near the endpoints.
    """
    T = F.period
    t = time_grid(T, t_samples)
    bfn = _fn_or_const(b)
    table, decay_info = [], {}
    for R in radii:
        X = ball_samples(F.dimension, R, per_direction, seed)
        lhs, XX = _envelope(F, t, X)
        env = lhs.max(axis=1)

        def env_fn(ts, X=X):
            return _envelope(F, np.atleast_1d(ts), X)[0].max(axis=1)

        check_fn = env_fn if bfn is None else bfn
        decay = endpoint_decay(check_fn, T)
        decay_info[str(R)] = decay
        if not np.all(np.isfinite(env)) or not decay["integrable"]:
            if not np.all(np.isfinite(env)):
                i = int(np.nonzero(~np.isfinite(env))[0][0])
            else:
                side = "left" if not _side_ok(decay["left"]) else "right"
                i = int(np.argmin(t)) if side == "left" else int(np.argmax(t))
            j = int(np.argmax(np.where(np.isfinite(lhs[i]), lhs[i], np.inf)))
            return ProbeResult(FAIL, {"reason": "envelope not integrable in t (b not in L1)",
                                      "t": float(t[i]), "x": XX[i, j].tolist(),
                                      "lhs": float(lhs[i, j]), "radius": R,
                                      "decade_integrals": decay},
                               {"radii": list(radii), "t_samples": int(t.size)})
        if bfn is None:
            good = np.isfinite(env)
            c_R = float(integrate.trapezoid(env, t))
        else:
            bt = np.asarray(bfn(t), dtype=float)
            pos = bt > 0
            if np.any(~pos & (env > 1e-12)):
                i = int(np.nonzero(~pos & (env > 1e-12))[0][0])
                j = int(np.argmax(lhs[i]))
                return ProbeResult(FAIL, {"reason": "b(t) vanishes where |F|+|xi| > 0",
                                          "t": float(t[i]), "x": XX[i, j].tolist(),
                                          "lhs": float(lhs[i, j]), "b": float(bt[i])}, {})
            c_R = float(np.max(np.where(pos, env / np.where(pos, bt, 1.0), 0.0)))
        table.append(c_R)
    meta = {"radii": list(radii), "c_table": table, "t_samples": int(t.size),
            "points_per_radius": int(ball_samples(F.dimension, 1.0, per_direction, seed).shape[0]),
            "decade_integrals": decay_info}
    return ProbeResult(PASS, None, meta)


def _side_ok(contrib: list) -> bool:
    c = np.array(contrib)
    return bool(np.all(np.isfinite(c)) and not (c[-5] > 0 and c[-1] >= 10 ** -0.2 * c[-5]))


def probe_h4(F: Potential, phi: GFunction, phi0: GFunction, d, radius: float = 1e6,
             t_samples: int = 65, per_direction: int = 24, seed: int = 0,
             directions: int = 4) -> ProbeResult:
    """Sampled check of ``phi*(xi/d(t)) <= phi0(x) + 1`` over extreme subgradients.

    Also probes ``phi0 << phi``; a failure of the ordering is reported as a
    failure of the hypothesis.
    """
    dfn = _fn_or_const(d)
    order = order_llcurly(phi0, phi)
    meta = {"radius": radius, "t_samples": t_samples, "order": order.to_dict()}
    if not order.holds:
        k, x = order.witness
        return ProbeResult(FAIL, {"reason": "phi0 << phi violated", "k": k, "x": x,
                                  "phi0": float(phi0(np.array(x))),
                                  "phi_kx": float(phi(k * np.array(x)))}, meta)
    t = np.linspace(0.0, F.period, t_samples + 1)[:-1]
    X = ball_samples(F.dimension, radius, per_direction, seed)
    X = X[np.linalg.norm(X, axis=1) >= 0]
    tt = np.broadcast_to(t[:, None], (t.size, X.shape[0]))
    XX = np.broadcast_to(X[None], (t.size,) + X.shape)
    with np.errstate(all="ignore"):
        xi = F.extreme_subgradients(tt, XX, directions)
        dt = np.asarray(dfn(t), dtype=float)[:, None, None, None]
        scaled = xi / dt
        lhs = np.asarray(conjugate(phi, scaled.reshape(-1, F.dimension)), dtype=float)
    lhs = lhs.reshape(xi.shape[:-1])
    rhs = np.asarray(phi0(XX), dtype=float)[..., None] + 1.0
    excess = lhs - rhs * (1 + 1e-9)
    meta["max_ratio"] = float(np.max(lhs / rhs))
    if np.any(excess > 0) or not np.all(np.isfinite(lhs)):
        flat = np.where(np.isfinite(excess), excess, np.inf)
        i, j, k = np.unravel_index(int(np.argmax(flat)), flat.shape)
        return ProbeResult(FAIL, {"t": float(t[i]), "x": X[j].tolist(), "xi": xi[i, j, k].tolist(),
                                  "d": float(dt[i, 0, 0, 0]), "phi_star": float(lhs[i, j, k]),
                                  "phi0_plus_one": float(rhs[i, j, 0])}, meta)
    return ProbeResult(PASS, None, meta)


def time_mean_ratio(F: Potential, denominator: Callable[[Array], Array] | None,
                    radii: Sequence[float], directions: Array) -> Array:
    """``(1/w(x)) int_0^T F(t, x) dt`` for ``x = R*dir``; shape (len(radii), len(dirs)).

    Terms are products ``a_j(t) s_j(x)``, so the time integral is
    ``sum_j (int a_j) s_j(x)`` with each coefficient integrated adaptively
    (tolerance 1e-8).
    """
    radii = np.asarray(radii, dtype=float)
    X = (radii[:, None, None] * directions[None]).reshape(-1, F.dimension)
    with np.errstate(all="ignore"):
        denom = np.ones(X.shape[0]) if denominator is None else np.asarray(denominator(X), dtype=float)
        total = np.zeros(X.shape[0])
        for term in F.terms:
            A = time_integral(term.coefficient, F.period)
            if A != 0.0:
                total = total + A * np.asarray(term.spatial.value(X), dtype=float)
        out = total / denom
    return out.reshape(radii.size, directions.shape[0])


def time_integral(a: Callable, period: float) -> float:
    """Adaptive quadrature of a coefficient; ``nan`` when it does not converge (e.g. 1/t)."""
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, _ = integrate.quad(lambda t: float(a(t)), 0.0, period, epsabs=1e-8, epsrel=1e-8,
                                    limit=200)
        except integrate.IntegrationWarning:
            return math.nan
    return float(val)


def trend_verdict(radii: Sequence[float], m: Sequence[float], decades: float = 4.0) -> dict:
    """Longest increasing run of ``m(R)``; pass needs >= ``decades`` decades and 10x final growth."""
    radii = np.asarray(radii, dtype=float)
    m = np.asarray(m, dtype=float)
    best, start = (0, 0), 0
    for i in range(1, m.size + 1):
        if i == m.size or not (np.isfinite(m[i]) and np.isfinite(m[i - 1]) and m[i] > m[i - 1]):
            if i - 1 - start > best[1] - best[0]:
                best = (start, i - 1)
            start = i
    span = float(np.log10(radii[best[1]] / radii[best[0]])) if best[1] > best[0] else 0.0
    m0, mf = m[0], m[-1]
    grew = bool(np.isfinite(mf) and np.isfinite(m0) and mf > m0 + 9 * abs(m0) and mf > 0)
    ends_in_run = best[1] == m.size - 1
    return {"increasing_decades": span, "run": [int(best[0]), int(best[1])],
            "final_over_initial": float(mf / m0) if m0 != 0 else math.inf,
            "passed": bool(span >= decades and grew and ends_in_run)}


def _trend_probe(F: Potential, denominator, radii, ndirs: int, seed: int) -> ProbeResult:
    dirs = sample_directions(F.dimension, count=ndirs, seed=seed)
    table = time_mean_ratio(F, denominator, radii, dirs)
    m = table.min(axis=1)
    arg = table.argmin(axis=1)
    verdict = trend_verdict(radii, m)
    meta = {"radii": [float(r) for r in radii], "m": m.tolist(), "directions": int(dirs.shape[0]),
            **verdict}
    if verdict["passed"]:
        return ProbeResult(PASS, None, meta)
    i = len(radii) - 1
    return ProbeResult(FAIL, {"reason": "time-mean ratio does not grow without bound on the sample",
                              "x": (radii[i] * dirs[arg[i]]).tolist(), "radius": float(radii[i]),
                              "m": float(m[i]), "m_initial": float(m[0])}, meta)


DEFAULT_TREND_RADII = tuple(float(r) for r in np.logspace(-2, 100, 52))


def probe_h5(F: Potential, phi0: GFunction, radii: Sequence[float] = DEFAULT_TREND_RADII,
             directions: int = 16, seed: int = 0) -> ProbeResult:
    """Coercivity trend ``m(R) = min_dir (1/phi0(2x)) int F(t, x) dt`` at ``|x| = R``."""
    return _trend_probe(F, lambda X: phi0(2.0 * X), radii, directions, seed)


def probe_h8(F: Potential, radii: Sequence[float] = DEFAULT_TREND_RADII,
             directions: int = 16, seed: int = 0) -> ProbeResult:
    """Coercivity trend of ``min_dir int F(t, x) dt`` (the h5 machinery with phi0 = 1)."""
    return _trend_probe(F, None, radii, directions, seed)


def _pair_samples(n: int, radius: float, count: int, rng) -> tuple[Array, Array]:
    def draw():
        d = rng.standard_normal((count, n))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        r = radius * rng.uniform(0, 1, (count, 1)) ** (1.0 / n)
        return d * r
    return draw(), draw()


def probe_h6(F: Potential, lam: float, mu: float, radius: float = 50.0, pairs: int = 20000,
             t_samples: int = 9, seed: int = 0) -> ProbeResult:
    """Sampled quasi-subadditivity ``F(t, lam(x+y)) <= mu (F(t,x) + F(t,y))``."""
    rng = np.random.default_rng(seed)
    meta = {"lambda": lam, "mu": mu, "radius": radius, "pairs": pairs, "t_samples": t_samples}
    for t in np.linspace(0.0, F.period, t_samples + 2)[1:-1]:
        for scale in (radius * 1e-2, radius * 1e-1, radius):
            x, y = _pair_samples(F.dimension, scale, pairs, rng)
            x = np.vstack([x, x])
            y = np.vstack([y, x[:pairs]])  # include diagonal pairs y = x
            with np.errstate(all="ignore"):
                lhs = np.asarray(F.value(t, lam * (x + y)), dtype=float)
                rhs = mu * (np.asarray(F.value(t, x)) + np.asarray(F.value(t, y)))
            excess = lhs - rhs - 1e-12 * (1 + np.abs(rhs))
            if np.any(excess > 0):
                i = int(np.argmax(np.where(np.isfinite(excess), excess, np.inf)))
                return ProbeResult(FAIL, {"t": float(t), "x": x[i].tolist(), "y": y[i].tolist(),
                                          "lhs": float(lhs[i]), "rhs": float(rhs[i])}, meta)
    return ProbeResult(PASS, None, meta)


def probe_h7(F: Potential, phi0: GFunction, b=None, radius: float = 1e4, t_samples: int = 257,
             per_direction: int = 24, seed: int = 0) -> ProbeResult:
    """Sampled ``F(t,x) <= b(t)(phi0(x) + 1)``.

    Without ``b`` the smallest sampled ``b(t)`` is used; it must stabilise as
    the sample radius grows tenfold (within 10%) and be integrable near the
    endpoints.  ``phi0 << phi`` is checked separately by the caller.
    """
    t = time_grid(F.period, t_samples)
    X = ball_samples(F.dimension, radius, per_direction, seed)
    norms = np.linalg.norm(X, axis=1)
    tt = np.broadcast_to(t[:, None], (t.size, X.shape[0]))
    XX = np.broadcast_to(X[None], (t.size,) + X.shape)
    with np.errstate(all="ignore"):
        ratio = np.asarray(F.value(tt, XX), dtype=float) / (np.asarray(phi0(XX), dtype=float) + 1.0)
    meta = {"radius": radius, "t_samples": int(t.size)}
    bfn = _fn_or_const(b)
    if bfn is not None:
        bt = np.asarray(bfn(t), dtype=float)
        excess = ratio - bt[:, None] * (1 + 1e-9)
        if np.any(excess > 0) or not np.all(np.isfinite(ratio)):
            i, j = np.unravel_index(int(np.argmax(np.where(np.isfinite(excess), excess, np.inf))),
                                    excess.shape)
            return ProbeResult(FAIL, {"t": float(t[i]), "x": X[j].tolist(),
                                      "F": float(ratio[i, j] * (phi0(X[j]) + 1.0)), "b": float(bt[i]),
                                      "phi0": float(phi0(X[j]))}, meta)
        decay = endpoint_decay(bfn, F.period)
        meta["decade_integrals"] = decay
        if not decay["integrable"]:
            return ProbeResult(FAIL, {"reason": "b not integrable", "decade_integrals": decay}, meta)
        return ProbeResult(PASS, None, meta)
    inner = ratio[:, norms <= radius / 10].max(axis=1)
    outer = ratio.max(axis=1)
    meta["b_inner_max"] = float(np.max(inner))
    meta["b_outer_max"] = float(np.max(outer))
    growth = outer > 1.1 * np.maximum(inner, 0.0) + 1e-12
    if np.any(growth) or not np.all(np.isfinite(outer)):
        i = int(np.argmax(np.where(np.isfinite(outer - inner), outer - inner, np.inf)))
        j = int(np.argmax(np.where(np.isfinite(ratio[i]), ratio[i], np.inf)))
        return ProbeResult(FAIL, {"reason": "F / (phi0 + 1) keeps growing with the sample radius",
                                  "t": float(t[i]), "x": X[j].tolist(), "ratio": float(ratio[i, j]),
                                  "inner_sup": float(inner[i])}, meta)

    def b_hat(ts):
        ts = np.atleast_1d(ts)
        tt2 = np.broadcast_to(ts[:, None], (ts.size, X.shape[0]))
        XX2 = np.broadcast_to(X[None], (ts.size,) + X.shape)
        with np.errstate(all="ignore"):
            r = np.asarray(F.value(tt2, XX2), dtype=float) / (np.asarray(phi0(XX2)) + 1.0)
        return np.maximum(r.max(axis=1), 0.0)

    decay = endpoint_decay(b_hat, F.period)
    meta["decade_integrals"] = decay
    if not decay["integrable"]:
        return ProbeResult(FAIL, {"reason": "sampled b not integrable",
                                  "t": float(t[0]), "b": float(b_hat(t[:1])[0]),
                                  "decade_integrals": decay}, meta)
    return ProbeResult(PASS, None, meta)


def bo_seminorm(F: Potential, t: float, radius: float, pairs: int, rng) -> tuple[float, Array, Array]:
    """Sampled ``sup |F(t,x)-F(t,y)| / (1 + |x-y|)`` over pairs in the ball, with the maximising pair."""
    x, y = _pair_samples(F.dimension, radius, pairs, rng)
    # antipodal companions reach the largest separations
    y[: pairs // 4] = -x[: pairs // 4]
    with np.errstate(all="ignore"):
        q = np.abs(np.asarray(F.value(t, x)) - np.asarray(F.value(t, y))) / (1 + np.linalg.norm(x - y, axis=1))
    i = int(np.argmax(np.where(np.isfinite(q), q, np.inf)))
    return float(q[i]), x[i], y[i]


def probe_h9(F: Potential, b=None, radius: float = 100.0, pairs: int = 100_000,
             t_samples: int = 9, seed: int = 0) -> ProbeResult:
    """Pair-sampled BO seminorm per time sample, at ``radius`` and ``10*radius``.

    Fails if the estimate grows by more than 10% under the tenfold radius
    (the seminorm is then unbounded), or exceeds a supplied ``b(t)``.
    """
    rng = np.random.default_rng(seed)
    ts = np.linspace(0.0, F.period, t_samples + 2)[1:-1]
    bfn = _fn_or_const(b)
    est, meta = [], {"radius": radius, "pairs": pairs, "t_samples": t_samples}
    for t in ts:
        s1, _, _ = bo_seminorm(F, t, radius, pairs, rng)
        s2, x, y = bo_seminorm(F, t, 10 * radius, pairs, rng)
        est.append([s1, s2])
        if not math.isfinite(s2) or s2 > 1.1 * s1 + 1e-12:
            return ProbeResult(FAIL, {"reason": "BO seminorm estimate grows with the sample radius",
                                      "t": float(t), "x": x.tolist(), "y": y.tolist(),
                                      "quotient": s2, "quotient_smaller_ball": s1}, meta)
        if bfn is not None and s2 > float(bfn(t)) * (1 + 1e-9):
            return ProbeResult(FAIL, {"reason": "BO seminorm exceeds b(t)", "t": float(t),
                                      "x": x.tolist(), "y": y.tolist(), "quotient": s2,
                                      "b": float(bfn(t))}, meta)
    meta["estimates"] = est
    if bfn is not None:
        decay = endpoint_decay(bfn, F.period)
        meta["decade_integrals"] = decay
        if not decay["integrable"]:
            return ProbeResult(FAIL, {"reason": "b not integrable", "decade_integrals": decay}, meta)
    return ProbeResult(PASS, None, meta)


# ---------------------------------------------------------------------------
# prior-work growth conditions for block (p, q) problems


def fit_power_bound(r: Array, z: Array, alpha: float) -> tuple[float, float]:
    """Smallest ``(c1, c2) >= 0`` with ``z <= c1 r^alpha + c2`` (LP minimising c1 + c2)."""
    A = -np.stack([r ** alpha, np.ones_like(r)], axis=1)
    res = optimize.linprog(c=[1.0, 1.0], A_ub=A, b_ub=-z, bounds=[(0, None), (0, None)],
                           method="highs")
    if not res.success:
        return math.inf, math.inf
    return float(res.x[0]), float(res.x[1])


def _block_component_norm(F: Potential, t: float, X: Array, block: Sequence[int]) -> Array:
    xi = F.extreme_subgradients(t, X)
    return np.linalg.norm(xi[..., list(block)], axis=-1).max(axis=-1)


def probe_pasca_bound(F: Potential, block: Sequence[int], other: Sequence[int], alpha: float,
                      radius: float = 10.0, sweep: Sequence[float] = tuple(np.logspace(1, 6, 11)),
                      samples: int = 64, t_samples: int = 5) -> ProbeResult:
    """Check ``|zeta_B| <= c1 |x_B|^alpha + c2`` for the partial subgradients of block B.

    Constants are fitted by LP on samples with the other block small
    (``|x_other| <= 1``); violations are then searched with ``|x_other|``
    swept to large values at fixed ``x_B``.  Unbounded growth at fixed
    ``x_B`` is a witness that no constants exist.
    """
    n = F.dimension
    ts = np.linspace(0.0, F.period, t_samples + 2)[1:-1]
    rB = np.concatenate([[0.0], np.geomspace(1e-2, radius, samples - 1)])
    meta: dict = {"alpha": alpha, "radius": radius}
    for t in ts:
        pts, rr = [], []
        for s_other in (0.0, 0.5, 1.0):
            for sgn in (1.0, -1.0):
                X = np.zeros((samples, n))
                X[:, block[0]] = sgn * rB
                X[:, other[0]] = s_other
                pts.append(X)
                rr.append(rB)
        X = np.vstack(pts)
        r = np.concatenate(rr)
        z = _block_component_norm(F, t, X, block)
        c1, c2 = fit_power_bound(r, z, alpha)
        meta.setdefault("fitted", []).append({"t": float(t), "c1": c1, "c2": c2})
        for xB in (0.0, 1.0, radius):
            Y = np.zeros((len(sweep), n))
            Y[:, block[0]] = xB
            Y[:, other[0]] = np.asarray(sweep)
            zs = _block_component_norm(F, t, Y, block)
            bound = c1 * abs(xB) ** alpha + c2
            viol = zs > bound * (1 + 1e-9) + 1e-12
            unbounded = bool(zs[-1] > 10 * max(zs[0], 1e-300) and np.all(np.diff(zs) > 0))
            if np.any(viol) and unbounded:
                i = int(np.argmax(viol))
                return ProbeResult(FAIL, {
                    "t": float(t), "x": Y[i].tolist(), "zeta_norm": float(zs[i]),
                    "fitted_c1": c1, "fitted_c2": c2, "bound": float(bound),
                    "fixed_block_value": xB, "sweep": list(map(float, sweep)),
                    "zeta_along_sweep": zs.tolist()}, meta)
    return ProbeResult(PASS, None, meta)


def probe_pasca(F: Potential, p: float, q: float, alphas: tuple[float, float] | None = None,
                radius: float = 10.0, blocks: tuple = ((0,), (1,)),
                trend_radii: Sequence[float] = DEFAULT_TREND_RADII) -> dict[str, ProbeResult]:
    """The two partial-gradient growth bounds and the matching coercivity ratio."""
    if alphas is None:
        alphas = (0.5 * (p - 1), 0.5 * (q - 1))
    a1, a2 = alphas
    if not (0 <= a1 < p - 1 and 0 <= a2 < q - 1):
        raise ValueError("need alpha_1 in [0, p-1) and alpha_2 in [0, q-1)")
    out = {
        "pasca1": probe_pasca_bound(F, blocks[0], blocks[1], a1, radius),
        "pasca2": probe_pasca_bound(F, blocks[1], blocks[0], a2, radius),
    }
    pp, qq = p / (p - 1), q / (q - 1)
    e1, e2 = pp * a1, qq * a2
    b1, b2 = list(blocks[0]), list(blocks[1])

    def denominator(X):
        return np.linalg.norm(X[..., b1], axis=-1) ** e1 + np.linalg.norm(X[..., b2], axis=-1) ** e2

    res = _trend_probe(F, denominator, trend_radii, 16, 0)
    res.metadata["exponents"] = [e1, e2]
    out["pasca3"] = res
    return out


# ---------------------------------------------------------------------------


def run_all(F: Potential, phi: GFunction, *, phi0: GFunction | None = None, d=None, b=None,
            lam: float | None = None, mu: float | None = None, pasca: dict | None = None,
            trend_radii: Sequence[float] = DEFAULT_TREND_RADII, seed: int = 0,
            h9_pairs: int = 100_000) -> HypothesisReport:
    """Run every probe whose parameters are available."""
    if phi.dimension != F.dimension:
        raise ValueError("phi and F dimensions differ")
    res: dict = {
        "H1": probe_h1(phi),
        "H2": probe_h2(F),
        "H3": probe_h3(F, b, seed=seed),
        "H8": probe_h8(F, trend_radii, seed=seed),
        "H9": probe_h9(F, b, pairs=h9_pairs, seed=seed),
    }
    res["nfunction"] = (ProbeResult(PASS, None, {"declared": True}) if phi.n_function else
                        ProbeResult(FAIL, {"reason": "phi is not an N-function",
                                           "descriptor": phi.descriptor}))
    if phi0 is not None:
        if d is not None:
            res["H4"] = probe_h4(F, phi, phi0, d, seed=seed)
        res["H5"] = probe_h5(F, phi0, trend_radii, seed=seed)
        h7 = probe_h7(F, phi0, b, seed=seed)
        order = order_llcurly(phi0, phi)
        if h7.passed and not order.holds:
            k, x = order.witness
            h7 = ProbeResult(FAIL, {"reason": "phi0 << phi violated", "k": k, "x": x}, h7.metadata)
        res["H7"] = h7
    if lam is not None and mu is not None:
        res["H6"] = probe_h6(F, lam, mu, seed=seed)
    if pasca is not None:
        res.update(probe_pasca(F, pasca["p"], pasca["q"], pasca.get("alphas"),
                               trend_radii=trend_radii))
    return HypothesisReport(res)
