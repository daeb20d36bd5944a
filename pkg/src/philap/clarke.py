"""Time-dependent potentials F(t, x) with exact Clarke-subdifferential sets.

A potential is a sum of terms ``a_j(t) * s_j(x)``.  Spatial parts are smooth
(singleton gradient), Euclidean norms of a coordinate block (unit ball at the
kink) or maxima of smooth functions (convex hull of active gradients).  All
three are regular, so with ``a_j >= 0`` on the nonsmooth terms the Clarke set
of the sum is the Minkowski sum of the scaled term sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .expr import TimeExpr
from .gfunc import GFunction, as_points

Array = np.ndarray

ACTIVITY_TOL = 1e-9


class ProjectionError(RuntimeError):
    """Projected-gradient distance computation did not converge."""


# ---------------------------------------------------------------------------
# subdifferential sets


def project_simplex(w: Array) -> Array:
    """Euclidean projection onto the probability simplex (sort-based)."""
    u = np.sort(w)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, w.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    return np.maximum(w - css[rho] / (rho + 1.0), 0.0)


@dataclass(frozen=True)
class SubdiffSet:
    """``base + sum_j radius_j * B(block_j) + conv(vertices)``.

    ``balls`` holds ``(coordinate indices, radius)`` pairs; each ball lives in
    the subspace of its block.  ``vertices`` is ``None`` for an empty hull
    part (equivalently ``conv{0}``).
    """

    base: Array
    balls: tuple = ()
    vertices: Array | None = None

    @property
    def dimension(self) -> int:
        return self.base.size

    @property
    def is_singleton(self) -> bool:
        return not any(r > 0 for _, r in self.balls) and (
            self.vertices is None or len(self.vertices) == 1)

    def _merged_balls(self) -> list[tuple[tuple, float]]:
        merged: dict[tuple, float] = {}
        for idx, r in self.balls:
            if r > 0:
                key = tuple(sorted(idx))
                merged[key] = merged.get(key, 0.0) + float(r)
        return list(merged.items())

    def _disjoint(self) -> bool:
        seen: set = set()
        for idx, _ in self._merged_balls():
            if seen & set(idx):
                return False
            seen |= set(idx)
        return True

    def support(self, v) -> float:
        """Support function ``max_{xi in set} <xi, v>``."""
        v = np.asarray(v, dtype=float)
        val = float(self.base @ v)
        for idx, r in self.balls:
            val += r * float(np.linalg.norm(v[list(idx)]))
        if self.vertices is not None:
            val += float(np.max(self.vertices @ v))
        return val

    def max_norm(self) -> float:
        """Largest norm of an element (exact for disjoint ball blocks)."""
        centres = [self.base] if self.vertices is None else [self.base + v for v in self.vertices]
        balls = self._merged_balls()
        best = 0.0
        for c in centres:
            sq = float(c @ c)
            for idx, r in balls:
                cb = float(np.linalg.norm(c[list(idx)]))
                sq += (cb + r) ** 2 - cb ** 2
            best = max(best, math.sqrt(max(sq, 0.0)))
        return best

    def extreme_points(self, directions: int = 8) -> Array:
        """A finite set of extreme points: hull vertices pushed to ball boundaries."""
        centres = [self.base] if self.vertices is None else [self.base + v for v in self.vertices]
        balls = self._merged_balls()
        if not balls:
            return np.array(centres)
        n = self.dimension
        pts = []
        for c in centres:
            for k in range(directions):
                p = c.copy()
                for idx, r in balls:
                    cb = c[list(idx)]
                    d = len(idx)
                    if k == 0 and np.linalg.norm(cb) > 0:
                        u = cb / np.linalg.norm(cb)
                    else:
                        ang = 2 * math.pi * k / directions
                        u = np.zeros(d)
                        u[0] = math.cos(ang)
                        if d > 1:
                            u[1] = math.sin(ang)
                        elif k % 2:
                            u[0] = -1.0
                        u /= np.linalg.norm(u)
                    p[list(idx)] += r * u
                pts.append(p)
        return np.array(pts).reshape(-1, n)

    def project(self, r, tol: float = 1e-10, max_iter: int = 10_000) -> Array:
        """Closest point of the set to ``r``."""
        r = np.asarray(r, dtype=float)
        d = r - self.base
        balls = self._merged_balls()
        if self.vertices is None and self._disjoint():
            out = self.base.copy()
            for idx, rad in balls:
                db = d[list(idx)]
                nb = np.linalg.norm(db)
                out[list(idx)] += db if nb <= rad else rad * db / nb
            return out
        return self.base + self._project_general(d, balls, tol, max_iter)

    def _project_general(self, d: Array, balls, tol: float, max_iter: int) -> Array:
        # minimise 0.5|d - V^T w - sum_j b_j|^2 over w in simplex, |b_j| <= r_j (block-supported)
        n = d.size
        V = self.vertices if self.vertices is not None else np.zeros((1, n))
        m = V.shape[0]
        lip = float(np.linalg.norm(V, 2) ** 2) + len(balls)
        step = 1.0 / max(lip, 1e-12)
        w = np.full(m, 1.0 / m)
        bs = [np.zeros(len(idx)) for idx, _ in balls]

        def point(w, bs):
            p = w @ V
            for (idx, _), b in zip(balls, bs):
                p[list(idx)] += b
            return p

        def project_feasible(w, bs):
            w = project_simplex(w)
            out = []
            for (idx, rad), b in zip(balls, bs):
                nb = np.linalg.norm(b)
                out.append(b if nb <= rad else rad * b / nb)
            return w, out

        yw, ybs = w.copy(), [b.copy() for b in bs]
        theta = 1.0
        scale = max(1.0, float(d @ d))
        gap = math.inf
        for it in range(max_iter):
            res = point(yw, ybs) - d
            gw = V @ res
            gbs = [res[list(idx)] for idx, _ in balls]
            nw, nbs = project_feasible(yw - step * gw, [b - step * g for b, g in zip(ybs, gbs)])
            # Frank-Wolfe gap at the new iterate bounds suboptimality of 0.5*dist^2
            res_n = point(nw, nbs) - d
            g_n = V @ res_n
            gap = float(g_n @ nw - g_n.min())
            for (idx, rad), b in zip(balls, nbs):
                gb = res_n[list(idx)]
                gap += float(gb @ b) + rad * float(np.linalg.norm(gb))
            if gap <= tol * scale:
                return point(nw, nbs)
            theta_n = 0.5 * (1 + math.sqrt(1 + 4 * theta * theta))
            mom = (theta - 1) / theta_n
            if float(res_n @ res_n) > float(res @ res) + 1e-300:
                mom = 0.0  # adaptive restart
                theta_n = 1.0
            yw = nw + mom * (nw - w)
            ybs = [b + mom * (b - b0) for b, b0 in zip(nbs, bs)]
            w, bs, theta = nw, nbs, theta_n
        raise ProjectionError(f"projection did not converge in {max_iter} iterations (gap {gap:.3e})")

    def distance(self, r, **kw) -> float:
        r = np.asarray(r, dtype=float)
        if self.vertices is None and self._disjoint():
            d = r - self.base
            sq = float(d @ d)
            for idx, rad in self._merged_balls():
                nb = float(np.linalg.norm(d[list(idx)]))
                sq += max(0.0, nb - rad) ** 2 - nb ** 2
            return math.sqrt(max(sq, 0.0))
        return float(np.linalg.norm(r - self.project(r, **kw)))

    def min_norm_element(self) -> Array:
        return self.project(np.zeros(self.dimension))

    def contains(self, r, tol: float = 1e-9) -> bool:
        return self.distance(r) <= tol

    def to_dict(self) -> dict:
        return {"base": self.base.tolist(),
                "balls": [[list(idx), r] for idx, r in self.balls],
                "vertices": None if self.vertices is None else self.vertices.tolist()}


def minkowski_sum(sets: Sequence[SubdiffSet]) -> SubdiffSet:
    n = sets[0].dimension
    base = np.zeros(n)
    balls: list = []
    verts = None
    for s in sets:
        base = base + s.base
        balls.extend(s.balls)
        if s.vertices is not None:
            verts = s.vertices if verts is None else (verts[:, None, :] + s.vertices[None, :, :]).reshape(-1, n)
    return SubdiffSet(base, tuple(balls), verts)


# ---------------------------------------------------------------------------
# spatial parts


@dataclass(frozen=True)
class Smooth:
    """Continuously differentiable spatial part with vectorized value/gradient."""

    f: Callable[[Array], Array]
    grad: Callable[[Array], Array]
    name: str = "smooth"
    params: dict = field(default_factory=dict)
    smooth = True

    def value(self, X: Array) -> Array:
        return np.asarray(self.f(X), dtype=float)

    def gradient(self, X: Array) -> Array:
        return np.asarray(self.grad(X), dtype=float)


@dataclass(frozen=True)
class AbsNorm:
    """``|x_B|`` for a coordinate block ``B``."""

    block: tuple
    name: str = "abs_norm"
    smooth = False

    @property
    def params(self) -> dict:
        return {"block": list(self.block)}

    def value(self, X: Array) -> Array:
        return np.linalg.norm(X[..., list(self.block)], axis=-1)

    def local_set(self, x: Array) -> SubdiffSet:
        n = x.size
        xb = x[list(self.block)]
        nb = float(np.linalg.norm(xb))
        base = np.zeros(n)
        if nb > 0:
            base[list(self.block)] = xb / nb
            return SubdiffSet(base)
        return SubdiffSet(base, ((tuple(self.block), 1.0),))

    def smoothed(self, X: Array, mu: float) -> tuple[Array, Array]:
        xb = X[..., list(self.block)]
        nb = np.linalg.norm(xb, axis=-1)
        val = np.where(nb >= mu, nb - 0.5 * mu, nb * nb / (2 * mu))
        g = np.zeros_like(X)
        g[..., list(self.block)] = xb / np.maximum(nb, mu)[..., None]
        return val, g


@dataclass(frozen=True)
class MaxOfSmooth:
    """``max_k f_k(x)`` over smooth pieces ``(f_k, grad_k)``."""

    pieces: tuple
    name: str = "max_of_smooth"
    params: dict = field(default_factory=dict)
    smooth = False

    def _values(self, X: Array) -> Array:
        return np.stack([np.asarray(f(X), dtype=float) for f, _ in self.pieces], axis=-1)

    def value(self, X: Array) -> Array:
        return np.max(self._values(X), axis=-1)

    def local_set(self, x: Array) -> SubdiffSet:
        vals = self._values(x[None, :])[0]
        top = float(vals.max())
        active = [k for k, v in enumerate(vals) if v >= top - ACTIVITY_TOL * max(1.0, abs(top))]
        grads = np.array([np.asarray(self.pieces[k][1](x[None, :]), dtype=float)[0] for k in active])
        if len(active) == 1:
            return SubdiffSet(grads[0])
        return SubdiffSet(np.zeros(x.size), (), grads)

    def smoothed(self, X: Array, mu: float) -> tuple[Array, Array]:
        # entropic smoothing mu*log(sum exp(f_k/mu)) shifted so it never exceeds max + 0
        vals = self._values(X)
        top = vals.max(axis=-1, keepdims=True)
        ex = np.exp((vals - top) / mu)
        tot = ex.sum(axis=-1, keepdims=True)
        val = top[..., 0] + mu * np.log(tot[..., 0]) - mu * math.log(len(self.pieces))
        wts = ex / tot
        grads = np.stack([np.asarray(g(X), dtype=float) for _, g in self.pieces], axis=-2)
        return val, np.sum(wts[..., None] * grads, axis=-2)


# --- builders for the named spatial kinds used by configs


def quadratic(n: int) -> Smooth:
    return Smooth(lambda X: 0.5 * np.sum(X * X, axis=-1), lambda X: np.array(X, dtype=float),
                  "quadratic", {})


def linear(vector: Sequence[float]) -> Smooth:
    c = np.asarray(vector, dtype=float)
    return Smooth(lambda X: X @ c, lambda X: np.broadcast_to(c, np.shape(X)).copy(),
                  "linear", {"vector": c.tolist()})


def gfunc_term(phi: GFunction) -> Smooth:
    return Smooth(lambda X: np.asarray(phi.evaluate(X), dtype=float), phi.gradient,
                  "gfunc", dict(phi.descriptor))


def power_coord(index: int, exponent: float, n: int) -> Smooth:
    """``|x_index|^exponent`` (exponent > 1 keeps it C^1)."""
    a = float(exponent)
    if a <= 1:
        raise ValueError("power_coord exponent must exceed 1")

    def f(X):
        return np.abs(X[..., index]) ** a

    def g(X):
        out = np.zeros_like(X, dtype=float)
        xi = X[..., index]
        out[..., index] = a * np.abs(xi) ** (a - 1) * np.sign(xi)
        return out

    return Smooth(f, g, "power_coord", {"index": int(index), "exponent": a})


def product(i: int, j: int, n: int) -> Smooth:
    def g(X):
        out = np.zeros_like(X, dtype=float)
        out[..., i] += X[..., j]
        out[..., j] += X[..., i]
        return out

    return Smooth(lambda X: X[..., i] * X[..., j], g, "product", {"i": int(i), "j": int(j)})


@dataclass(frozen=True)
class ExpNorm:
    """``exp(|x|)``; smooth away from 0, with the unit ball as Clarke set at 0."""

    name: str = "exp_norm"
    smooth = False

    @property
    def params(self) -> dict:
        return {}

    def value(self, X: Array) -> Array:
        return np.exp(np.linalg.norm(X, axis=-1))

    def local_set(self, x: Array) -> SubdiffSet:
        nx = float(np.linalg.norm(x))
        if nx > 0:
            return SubdiffSet(math.exp(nx) * x / nx)
        return SubdiffSet(np.zeros(x.size), ((tuple(range(x.size)), 1.0),))

    def smoothed(self, X: Array, mu: float) -> tuple[Array, Array]:
        # exp of the Huber-smoothed norm, so exp(|x| - mu/2) <= value <= exp(|x|)
        nx = np.linalg.norm(X, axis=-1)
        val = np.exp(np.where(nx >= mu, nx - 0.5 * mu, nx * nx / (2 * mu)))
        return val, val[..., None] * X / np.maximum(nx, mu)[..., None]


def exp_norm(n: int) -> ExpNorm:
    return ExpNorm()


def constant_one(n: int) -> Smooth:
    return Smooth(lambda X: np.ones(np.shape(X)[:-1]), lambda X: np.zeros_like(X, dtype=float),
                  "constant", {})


def max_affine(slopes: Sequence[Sequence[float]], offsets: Sequence[float] | None = None) -> MaxOfSmooth:
    A = np.atleast_2d(np.asarray(slopes, dtype=float))
    b = np.zeros(A.shape[0]) if offsets is None else np.asarray(offsets, dtype=float)
    pieces = tuple((lambda X, a=a, c=c: X @ a + c,
                    lambda X, a=a: np.broadcast_to(a, np.shape(X)).copy()) for a, c in zip(A, b))
    return MaxOfSmooth(pieces, "max_affine", {"slopes": A.tolist(), "offsets": b.tolist()})


# ---------------------------------------------------------------------------
# potentials


def _coef(c) -> Callable:
    if isinstance(c, (int, float)):
        return TimeExpr(repr(float(c)))
    if isinstance(c, str):
        return TimeExpr(c)
    return c


@dataclass(frozen=True)
class Term:
    coefficient: Callable
    spatial: object

    def __post_init__(self):
        object.__setattr__(self, "coefficient", _coef(self.coefficient))

    def coef(self, t) -> Array:
        return np.asarray(self.coefficient(np.asarray(t, dtype=float)), dtype=float)


@dataclass(frozen=True)
class Potential:
    """``F(t, x) = sum_j a_j(t) s_j(x)`` on ``[0, period] x R^n``.

    Nonsmooth terms must have nonnegative coefficients; this is checked on a
    uniform grid of the period at construction.
    """

    dimension: int
    terms: tuple
    period: float = 2 * math.pi

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        grid = np.linspace(0.0, self.period, 2049)
        for j, term in enumerate(self.terms):
            if not term.spatial.smooth:
                a = term.coef(grid)
                if np.any(a < 0):
                    k = int(np.argmin(a))
                    raise ValueError(f"term {j} ({term.spatial.name}) has negative coefficient "
                                     f"{a[k]:.4g} at t={grid[k]:.4g}; nonsmooth terms need a(t) >= 0")

    # -- algebra (sum of potentials)

    def __add__(self, other: "Potential") -> "Potential":
        if other.dimension != self.dimension:
            raise ValueError("cannot add potentials of different dimension")
        return Potential(self.dimension, self.terms + other.terms, self.period)

    def scaled(self, c: float) -> "Potential":
        if c < 0:
            raise ValueError("scaling factor must be nonnegative")
        terms = tuple(Term(lambda t, a=term.coefficient, c=c: c * np.asarray(a(t)), term.spatial)
                      for term in self.terms)
        return Potential(self.dimension, terms, self.period)

    @property
    def is_smooth(self) -> bool:
        return all(term.spatial.smooth for term in self.terms)

    # -- evaluation

    def _prep(self, t, X):
        X = as_points(X, self.dimension)
        t = np.broadcast_to(np.asarray(t, dtype=float), X.shape[:-1])
        return t, X

    def value(self, t, X) -> Array | float:
        t, X = self._prep(t, X)
        out = np.zeros(X.shape[:-1])
        with np.errstate(divide="ignore", invalid="ignore"):
            for term in self.terms:
                a = term.coef(t)
                out = out + np.where(a == 0, 0.0, a * term.spatial.value(X))
        return float(out) if out.ndim == 0 else out

    __call__ = value

    def smooth_gradient(self, t, X) -> Array:
        """Sum of ``a_j(t) grad s_j(x)`` over smooth terms only."""
        t, X = self._prep(t, X)
        out = np.zeros_like(X)
        for term in self.terms:
            if term.spatial.smooth:
                a = term.coef(t)
                out = out + np.where(a == 0, 0.0, a)[..., None] * term.spatial.gradient(X)
        return out

    def gradient(self, t, X) -> Array:
        if not self.is_smooth:
            raise ValueError("potential has nonsmooth terms; use subdiff")
        return self.smooth_gradient(t, X)

    def subdiff(self, t: float, x) -> SubdiffSet:
        """Clarke generalized gradient at ``(t, x)`` as an exact set."""
        x = as_points(x, self.dimension).reshape(-1)
        t = float(t)
        base = self.smooth_gradient(t, x)
        sets = [SubdiffSet(base)]
        for term in self.terms:
            if term.spatial.smooth:
                continue
            a = float(term.coef(t))
            if a == 0:
                continue
            s = term.spatial.local_set(x)
            sets.append(SubdiffSet(a * s.base, tuple((idx, a * r) for idx, r in s.balls),
                                   None if s.vertices is None else a * s.vertices))
        return minkowski_sum(sets)

    # -- batched operations for the solver

    def _fast_blocks(self) -> list[tuple] | None:
        blocks: list[tuple] = []
        for term in self.terms:
            if term.spatial.smooth:
                continue
            if not isinstance(term.spatial, AbsNorm):
                return None
            b = tuple(sorted(term.spatial.block))
            if b not in blocks:
                if any(set(b) & set(o) for o in blocks):
                    return None
                blocks.append(b)
        return blocks

    def _batch_sets(self, t: Array, X: Array):
        # base (N, n) and per-block ball radii (N, k) when only disjoint abs_norm kinks occur
        blocks = self._fast_blocks()
        base = self.smooth_gradient(t, X)
        radii = np.zeros(X.shape[:-1] + (len(blocks),))
        for term in self.terms:
            if term.spatial.smooth:
                continue
            a = term.coef(t)
            k = blocks.index(tuple(sorted(term.spatial.block)))
            xb = X[..., list(term.spatial.block)]
            nb = np.linalg.norm(xb, axis=-1)
            kink = nb == 0
            unit = np.where(kink[..., None], 0.0, xb / np.where(kink, 1.0, nb)[..., None])
            base[..., list(term.spatial.block)] += a[..., None] * unit
            radii[..., k] += np.where(kink, a, 0.0)
        return blocks, base, radii

    def project_batch(self, t, X, R) -> Array:
        """Per-node projection of ``R[i]`` onto ``subdiff(t[i], X[i])``."""
        t, X = self._prep(t, X)
        R = np.asarray(R, dtype=float)
        if self.is_smooth:
            return self.smooth_gradient(t, X)
        if self._fast_blocks() is not None:
            blocks, base, radii = self._batch_sets(t, X)
            out = base.copy()
            D = R - base
            for k, idx in enumerate(blocks):
                db = D[..., list(idx)]
                nb = np.linalg.norm(db, axis=-1)
                rad = radii[..., k]
                shrink = np.where(nb <= rad, 1.0, rad / np.where(nb > 0, nb, 1.0))
                out[..., list(idx)] += shrink[..., None] * db
            return out
        flatX = X.reshape(-1, self.dimension)
        flatR = R.reshape(-1, self.dimension)
        flatt = t.reshape(-1)
        out = np.array([self.subdiff(ti, xi).project(ri) for ti, xi, ri in zip(flatt, flatX, flatR)])
        return out.reshape(X.shape)

    def extreme_subgradients(self, t, X, directions: int = 4) -> Array:
        """Extreme points of each Clarke set, shape ``X.shape[:-1] + (K, n)``.

        The first point pushes every kink ball along the base direction, so it
        attains the largest norm of the set when ball blocks are disjoint.
        """
        t, X = self._prep(t, X)
        if self.is_smooth:
            return self.smooth_gradient(t, X)[..., None, :]
        blocks = self._fast_blocks()
        if blocks is None:
            flatX = X.reshape(-1, self.dimension)
            flatt = t.reshape(-1)
            sets = [self.subdiff(ti, xi).extreme_points(directions) for ti, xi in zip(flatt, flatX)]
            k = max(len(s) for s in sets)
            out = np.array([np.vstack([s, np.repeat(s[:1], k - len(s), axis=0)]) for s in sets])
            return out.reshape(X.shape[:-1] + (k, self.dimension))
        _, base, radii = self._batch_sets(t, X)
        pts = np.repeat(base[..., None, :], directions, axis=-2)
        for j, idx in enumerate(blocks):
            d = len(idx)
            bb = base[..., list(idx)]
            nb = np.linalg.norm(bb, axis=-1, keepdims=True)
            first = np.zeros(d)
            first[0] = 1.0
            aligned = np.where(nb > 0, bb / np.where(nb > 0, nb, 1.0), first)
            for k in range(directions):
                if k == 0:
                    u = aligned
                else:
                    ang = 2 * math.pi * k / directions
                    v = np.zeros(d)
                    v[0] = math.cos(ang)
                    if d > 1:
                        v[1] = math.sin(ang)
                    else:
                        v[0] = -1.0 if k % 2 else 1.0
                    u = np.broadcast_to(v / np.linalg.norm(v), aligned.shape)
                pts[..., k, list(idx)] += radii[..., j, None] * u
        return pts

    def max_subgradient_norm(self, t, X) -> Array:
        if self.is_smooth or self._fast_blocks() is not None:
            return np.linalg.norm(self.extreme_subgradients(t, X, 1)[..., 0, :], axis=-1)
        t, X = self._prep(t, X)
        flat = [self.subdiff(ti, xi).max_norm()
                for ti, xi in zip(t.reshape(-1), X.reshape(-1, self.dimension))]
        return np.array(flat).reshape(X.shape[:-1])

    def distance_batch(self, t, X, R) -> Array:
        R = np.asarray(R, dtype=float)
        return np.linalg.norm(R - self.project_batch(t, X, R), axis=-1)

    def min_norm_selection(self, t, X) -> Array:
        t, X = self._prep(t, X)
        return self.project_batch(t, X, np.zeros_like(X))

    def smoothed(self, t, X, mu: float) -> tuple[Array, Array]:
        """Value and gradient with nonsmooth terms replaced by Huber / entropic smoothing."""
        t, X = self._prep(t, X)
        val = np.zeros(X.shape[:-1])
        grad = np.zeros_like(X)
        with np.errstate(divide="ignore", invalid="ignore"):
            for term in self.terms:
                a = term.coef(t)
                if term.spatial.smooth:
                    val = val + np.where(a == 0, 0.0, a * term.spatial.value(X))
                    grad = grad + np.where(a == 0, 0.0, a)[..., None] * term.spatial.gradient(X)
                else:
                    v, g = term.spatial.smoothed(X, mu)
                    val = val + a * v
                    grad = grad + a[..., None] * g
        return val, grad

    def curvature_scale(self, t, X, eps: float = 1e-4) -> float:
        """Mean absolute second difference of the smooth part along the iterate (preconditioner hint)."""
        t, X = self._prep(t, X)
        if not any(term.spatial.smooth for term in self.terms):
            return 0.0
        rng = np.random.default_rng(0)
        d = rng.standard_normal(X.shape)
        d /= np.linalg.norm(d, axis=-1, keepdims=True)
        g1 = self.smooth_gradient(t, X + eps * d)
        g0 = self.smooth_gradient(t, X - eps * d)
        return float(np.mean(np.abs(np.sum((g1 - g0) * d, axis=-1)) / (2 * eps)))


def clarke_dirderiv(F: Potential, t: float, x, v) -> float:
    """Generalized directional derivative ``F^0(x; v)`` = support of the Clarke set at ``v``."""
    return F.subdiff(t, x).support(np.asarray(v, dtype=float).reshape(-1))


def subdiff(F: Potential, t: float, x) -> SubdiffSet:
    return F.subdiff(t, x)


def subdiff_distance(F: Potential, t: float, x, r) -> float:
    return F.subdiff(t, x).distance(np.asarray(r, dtype=float).reshape(-1))


def sampled_dirderiv(F: Potential, t: float, x, v, radius: float = 1e-3,
                     lambdas: Sequence[float] = (1e-3, 1e-4, 1e-5, 1e-6),
                     samples: int = 200, seed: int = 0) -> float:
    """Sampled limsup of ``(F(y + lam v) - F(y))/lam`` over y near x (test oracle)."""
    rng = np.random.default_rng(seed)
    x = as_points(x, F.dimension).reshape(-1)
    v = np.asarray(v, dtype=float).reshape(-1)
    ys = x + radius * rng.uniform(-1, 1, (samples, F.dimension)) * rng.uniform(0, 1, (samples, 1)) ** 3
    ys = np.vstack([x[None, :], ys])
    best = -math.inf
    for lam in lambdas:
        q = (np.asarray(F.value(t, ys + lam * v)) - np.asarray(F.value(t, ys))) / lam
        best = max(best, float(np.max(q)))
    return best
