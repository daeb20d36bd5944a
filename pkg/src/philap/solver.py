"""Discrete action, Euler-Lagrange residuals and a multi-start minimizer.

The action is ``h * sum_i [phi(u'_i) + F(t_i, u_i)]`` with forward
differences ``u'_i = (u_{i+1} - u_i)/h`` and periodic indices, so the
stationarity condition of the discrete action is exactly the discrete
inclusion ``(w_i - w_{i-1})/h in dF(t_i, u_i)`` with ``w = grad phi(u')``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from .clarke import AbsNorm, Potential
from .gfunc import GFunction
from .orlicz import Trajectory

Array = np.ndarray


@dataclass(frozen=True)
class SolverOptions:
    max_iter: int = 200_000            # objective evaluations per start
    starts: int = 8
    start_radius: float = 1.0
    seed: int = 0
    tol_r: float = 1e-3
    tol_m: float = 1e-6
    tol_a: float = 1e-9                # relative: tol_a * (1 + |action|)
    patience: int = 50
    mu0: float = 1.0                   # initial smoothing of kink terms
    mu_min: float = 1e-8
    polish_iters: int = 2000
    step_a: float = 1.0
    step_b: float = 100.0
    snap: bool = True

    def __post_init__(self):
        if self.max_iter < 1 or self.starts < 1:
            raise ValueError("max_iter and starts must be positive")
        if not (self.tol_r > 0 and self.tol_m > 0 and self.tol_a > 0):
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class DiscreteProblem:
    phi: GFunction
    F: Potential
    period: float
    nodes: int
    options: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        if self.phi.dimension != self.F.dimension:
            raise ValueError(f"phi acts on R^{self.phi.dimension} but F on R^{self.F.dimension}")
        if self.nodes < 4:
            raise ValueError(f"need at least 4 nodes, got {self.nodes}")
        if not self.period > 0:
            raise ValueError("period must be positive")
        if abs(self.F.period - self.period) > 1e-12 * self.period:
            raise ValueError(f"potential period {self.F.period} differs from problem period {self.period}")

    @property
    def dimension(self) -> int:
        return self.phi.dimension

    @property
    def step(self) -> float:
        return self.period / self.nodes

    @property
    def times(self) -> Array:
        return np.arange(self.nodes) * self.step

    def with_nodes(self, nodes: int) -> "DiscreteProblem":
        return replace(self, nodes=nodes)

    def trajectory(self, values: Array) -> Trajectory:
        return Trajectory(self.period, np.asarray(values, dtype=float).reshape(self.nodes, self.dimension))


def _values(problem: DiscreteProblem, u) -> Array:
    U = u.values if isinstance(u, Trajectory) else np.asarray(u, dtype=float)
    U = U.reshape(problem.nodes, -1)
    if U.shape[1] != problem.dimension:
        raise ValueError(f"trajectory in R^{U.shape[1]}, problem in R^{problem.dimension}")
    return U


def _derivative(U: Array, h: float) -> Array:
    return (np.roll(U, -1, axis=0) - U) / h


def action(problem: DiscreteProblem, u) -> float:
    """``h * sum_i [phi(u'_i) + F(t_i, u_i)]``."""
    U = _values(problem, u)
    h = problem.step
    kin = np.asarray(problem.phi.evaluate(_derivative(U, h)), dtype=float)
    pot = np.asarray(problem.F.value(problem.times, U), dtype=float)
    return float(h * np.sum(kin + pot))


def _w(problem: DiscreteProblem, U: Array) -> Array:
    return problem.phi.gradient(_derivative(U, problem.step))


def action_subgradient(problem: DiscreteProblem, u) -> Array:
    """``g_i = -(w_i - w_{i-1}) + h xi_i`` with ``xi`` the min-norm Clarke selection."""
    U = _values(problem, u)
    w = _w(problem, U)
    xi = problem.F.min_norm_selection(problem.times, U)
    return -(w - np.roll(w, 1, axis=0)) + problem.step * xi


@dataclass
class ELResidual:
    per_node: Array
    max: float
    mean: float
    mean_condition: float
    periodicity_gap: float
    selection: Array

    def to_dict(self, per_node: bool = True) -> dict:
        out = {"max": self.max, "mean": self.mean, "mean_condition": self.mean_condition,
               "periodicity_gap": self.periodicity_gap}
        if per_node:
            out["per_node"] = self.per_node.tolist()
        return out


def el_residual(problem: DiscreteProblem, u) -> ELResidual:
    """Distances of ``r_i = (w_i - w_{i-1})/h`` to the Clarke sets along ``u``.

    ``mean_condition`` is ``|h sum_i xi*_i|`` for the projections ``xi*_i``
    of ``r_i``; ``periodicity_gap`` is ``|h sum_i r_i|``, the closure of the
    chain ``w_i = w_{i-1} + h r_i`` around the period.
    """
    U = _values(problem, u)
    h = problem.step
    w = _w(problem, U)
    r = (w - np.roll(w, 1, axis=0)) / h
    proj = problem.F.project_batch(problem.times, U, r)
    res = np.linalg.norm(r - proj, axis=1)
    return ELResidual(res, float(res.max()), float(res.mean()),
                      float(np.linalg.norm(h * proj.sum(axis=0))),
                      float(np.linalg.norm(h * r.sum(axis=0))), proj)


@dataclass
class Verification:
    verified: bool
    max_residual: float
    mean_condition: float
    strictly_convex: bool
    tol_r: float
    tol_m: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def verify_solution(problem: DiscreteProblem, u, tol_r: float | None = None,
                    tol_m: float | None = None) -> Verification:
    """Residual and mean-condition tolerances plus strict convexity of phi.

    Strict convexity makes ``grad phi`` injective, which turns the wraparound
    of ``w`` into matching derivatives at both ends of the period.
    """
    tol_r = problem.options.tol_r if tol_r is None else tol_r
    tol_m = problem.options.tol_m if tol_m is None else tol_m
    el = el_residual(problem, u)
    ok = el.max <= tol_r and el.mean_condition <= tol_m and problem.phi.strictly_convex
    return Verification(bool(ok), el.max, el.mean_condition, problem.phi.strictly_convex, tol_r, tol_m)


# ---------------------------------------------------------------------------
# minimisation


class _Preconditioner:
    """Circulant ``(kappa/h) L + h m I`` applied through the real FFT along time."""

    def __init__(self, nodes: int, h: float, kappa: float, m: float):
        k = np.arange(nodes // 2 + 1)
        lap = 2.0 - 2.0 * np.cos(2.0 * np.pi * k / nodes)
        self.eig = (kappa / h) * lap + h * m
        self.nodes = nodes

    def _apply(self, V: Array, power: float) -> Array:
        return np.fft.irfft(np.fft.rfft(V, axis=0) * (self.eig ** power)[:, None], n=self.nodes, axis=0)

    def inv_sqrt(self, V: Array) -> Array:
        return self._apply(V, -0.5)

    def inv(self, V: Array) -> Array:
        return self._apply(V, -1.0)


def _kinetic_curvature(phi: GFunction, Y: Array) -> float:
    # median second derivative of phi along the slopes, floored by its value at unit slope
    n = phi.dimension
    e = np.zeros(n)
    e[0] = 1.0
    eps = 1e-4

    def curv(y):
        ny = np.linalg.norm(y, axis=-1, keepdims=True)
        d = np.where(ny > 0, y / np.where(ny > 0, ny, 1.0), e)
        base = np.where(ny > 0, y, e)
        step = eps * np.maximum(np.linalg.norm(base, axis=-1, keepdims=True), 1e-8)
        gp = phi.gradient(base + step * d)
        gm = phi.gradient(base - step * d)
        return np.sum((gp - gm) * d, axis=-1) / (2 * step[..., 0])

    floor = float(curv(e[None, :])[0])
    ny = np.linalg.norm(Y, axis=1)
    moving = Y[ny > 1e-12]
    med = float(np.median(curv(moving))) if moving.size else 0.0
    return max(med, floor, 1e-12)


@dataclass
class _Run:
    U: Array
    action: float
    history: list
    evaluations: int
    stalled: bool


class _Counter:
    def __init__(self, budget: int):
        self.budget = budget
        self.used = 0

    @property
    def left(self) -> int:
        return max(self.budget - self.used, 0)


def _smoothed_objective(problem: DiscreteProblem, mu: float):
    h, t = problem.step, problem.times

    def f(U):
        Y = _derivative(U, h)
        kin = np.asarray(problem.phi.evaluate(Y), dtype=float)
        w = problem.phi.gradient(Y)
        val, grad = problem.F.smoothed(t, U, mu)
        total = h * float(np.sum(kin) + np.sum(val))
        g = np.roll(w, 1, axis=0) - w + h * grad
        return total, g

    return f


def _lbfgs_stage(problem: DiscreteProblem, U0: Array, mu: float, counter: _Counter,
                 history: list) -> Array:
    """Preconditioned L-BFGS on the smoothed action, rebuilding the preconditioner between passes."""
    opts = problem.options
    h, N = problem.step, problem.nodes
    f = _smoothed_objective(problem, mu)
    U = U0.copy()
    for _ in range(20):
        if counter.left <= 0:
            break
        kappa = _kinetic_curvature(problem.phi, _derivative(U, h))
        m = max(problem.F.curvature_scale(problem.times, U), 1.0 / problem.period)
        pre = _Preconditioner(N, h, kappa, m)
        base = U.copy()

        def obj(v):
            Uv = base + pre.inv_sqrt(v.reshape(N, -1))
            val, g = f(Uv)
            if not np.isfinite(val):
                return np.inf, np.zeros_like(v)
            return val, pre.inv_sqrt(g).ravel()

        def cb(v):
            history.append(obj(v)[0])

        res = optimize.minimize(obj, np.zeros(U.size), jac=True, method="L-BFGS-B", callback=cb,
                                options={"maxiter": counter.left, "maxfun": counter.left,
                                         "maxcor": 30, "ftol": 1e-16, "gtol": 1e-14})
        counter.used += int(res.nfev)
        Unew = base + pre.inv_sqrt(res.x.reshape(N, -1))
        if not np.all(np.isfinite(Unew)):
            break
        gain = f(U)[0] - f(Unew)[0]
        U = Unew
        scale = 1.0 + abs(f(U)[0])
        if gain <= opts.tol_a * scale or res.nit <= 2:
            break
    return U


def _abs_blocks(F: Potential) -> list[tuple]:
    return sorted({tuple(term.spatial.block) for term in F.terms if isinstance(term.spatial, AbsNorm)})


def snap_kinks(problem: DiscreteProblem, U: Array, radius: float) -> Array:
    """Set ``x_B = 0`` at nodes where an abs-norm block is within ``radius`` of its kink."""
    out = U.copy()
    for idx in _abs_blocks(problem.F):
        sub = out[:, list(idx)]
        near = np.linalg.norm(sub, axis=1) <= radius
        sub[near] = 0.0
        out[:, list(idx)] = sub
    return out


def _polish(problem: DiscreteProblem, U: Array, counter: _Counter, history: list) -> Array:
    """Unsmoothed subgradient steps ``a/(1+k/b)`` (preconditioned) with kink snapping."""
    opts = problem.options
    h = problem.step
    snap_r = max(10 * opts.mu_min, 1e-12)
    best = snap_kinks(problem, U, snap_r) if opts.snap else U
    best_key = (el_residual(problem, best).max, action(problem, best))
    if best_key[0] <= 0.1 * opts.tol_r or not _abs_blocks(problem.F):
        return best if best_key[1] <= action(problem, U) + opts.tol_a * (1 + abs(best_key[1])) else U
    kappa = _kinetic_curvature(problem.phi, _derivative(U, h))
    m = max(problem.F.curvature_scale(problem.times, U), 1.0 / problem.period)
    pre = _Preconditioner(problem.nodes, h, kappa, m)
    cur = best.copy()
    for k in range(opts.polish_iters):
        if counter.left <= 0:
            break
        g = action_subgradient(problem, cur)
        counter.used += 1
        step = opts.step_a / (1.0 + k / opts.step_b)
        cur = cur - step * pre.inv(g)
        if opts.snap:
            cur = snap_kinks(problem, cur, snap_r)
        key = (el_residual(problem, cur).max, action(problem, cur))
        history.append(key[1])
        if key < best_key:
            best, best_key = cur.copy(), key
        if best_key[0] <= 0.1 * opts.tol_r:
            break
    return best


def _descend(problem: DiscreteProblem, U0: Array) -> _Run:
    opts = problem.options
    counter = _Counter(opts.max_iter)
    history: list = [action(problem, U0)]
    U = U0.copy()
    if problem.F.is_smooth:
        U = _lbfgs_stage(problem, U, 0.0, counter, history)
    else:
        mu = opts.mu0
        while counter.left > 0:
            U = _lbfgs_stage(problem, U, mu, counter, history)
            if mu <= opts.mu_min:
                break
            mu = max(mu / 2.0, opts.mu_min)
        U = _polish(problem, U, counter, history)
    val = action(problem, U)
    history.append(val)
    tol = opts.tol_a * (1.0 + abs(val))
    window = history[-opts.patience:] if len(history) > opts.patience else history
    tail = history[-2:] if len(history) >= 2 else history
    stalled = (counter.left > 0) and (max(window) - min(window) < tol or tail[0] - tail[-1] < tol)
    return _Run(U, val, history, counter.used, stalled)


def initial_guesses(problem: DiscreteProblem) -> list[tuple[str, Array]]:
    """Constants ``0, +-r0 e_k`` then seeded random low-mode trajectories, up to ``starts``."""
    opts = problem.options
    n, N = problem.dimension, problem.nodes
    r0 = opts.start_radius
    out: list[tuple[str, Array]] = [("zero", np.zeros((N, n)))]
    for k in range(n):
        for sgn in (1.0, -1.0):
            c = np.zeros(n)
            c[k] = sgn * r0
            out.append((f"{'+' if sgn > 0 else '-'}e{k + 1}", np.tile(c, (N, 1))))
    s = np.arange(N) * 2 * np.pi / N
    j = 0
    while len(out) < opts.starts:
        rng = np.random.default_rng([opts.seed, j])
        U = np.zeros((N, n))
        U += r0 * rng.standard_normal(n)
        for mode in (1, 2, 3):
            a, b = rng.standard_normal((2, n)) * r0 / mode
            U += np.cos(mode * s)[:, None] * a + np.sin(mode * s)[:, None] * b
        out.append((f"random{j}", U))
        j += 1
    return out[: opts.starts]


@dataclass
class SolveResult:
    trajectory: Trajectory
    action: float
    residual: ELResidual
    iterations: int
    restarts: int
    converged: bool
    budget_exhausted: bool
    verified: bool
    start_label: str
    start_actions: list

    def to_dict(self, per_node: bool = False) -> dict:
        return {
            "action": self.action,
            "el_residual": self.residual.to_dict(per_node=per_node),
            "iterations": self.iterations,
            "restarts": self.restarts,
            "converged": self.converged,
            "budget_exhausted": self.budget_exhausted,
            "verified": self.verified,
            "best_start": self.start_label,
            "start_actions": self.start_actions,
        }


def start_radius_from_trend(report) -> float | None:
    """Radius where the h5 (else h8) trend table starts its increasing run, if recorded."""
    for name in ("H5", "H8"):
        res = report.results.get(name) if report is not None else None
        if res is not None and "run" in res.metadata:
            return float(res.metadata["radii"][res.metadata["run"][0]])
    return None


def minimize(problem: DiscreteProblem, init="auto", report=None) -> SolveResult:
    """Multi-start smoothed/polished descent; returns the best start by action.

    ``init`` is ``"auto"`` (the default start set), a :class:`Trajectory` or a
    list of them.  Each start owns its state and budget; ties in action are
    broken by start order, so the result is deterministic.  A hypothesis
    ``report`` sets the start radius from its coercivity trend table.
    """
    r0 = start_radius_from_trend(report)
    if r0 is not None:
        problem = replace(problem, options=replace(problem.options, start_radius=r0))
    opts = problem.options
    if isinstance(init, str):
        if init != "auto":
            raise ValueError(f"unknown init {init!r}")
        starts = initial_guesses(problem)
    elif isinstance(init, Trajectory):
        starts = [("given", _values(problem, init))]
    else:
        starts = [(f"given{k}", _values(problem, u)) for k, u in enumerate(init)]
    runs = []
    for order, (label, U0) in enumerate(starts):
        run = _descend(problem, U0)
        key = run.action if math.isfinite(run.action) else math.inf
        runs.append((key, order, label, run))
    runs.sort(key=lambda r: (r[0], r[1]))
    _, _, label, best = runs[0]
    el = el_residual(problem, best.U)
    converged = bool(best.stalled and el.max < opts.tol_r)
    exhausted = best.evaluations >= opts.max_iter
    ver = verify_solution(problem, best.U)
    return SolveResult(
        trajectory=problem.trajectory(best.U), action=best.action, residual=el,
        iterations=int(sum(r[3].evaluations for r in runs)), restarts=len(runs),
        converged=converged, budget_exhausted=bool(exhausted), verified=ver.verified,
        start_label=label,
        start_actions=[[r[2], r[0]] for r in sorted(runs, key=lambda r: r[1])],
    )
