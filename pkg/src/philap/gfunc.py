"""G-function families: evaluation, gradients, Fenchel conjugation and growth probes.

Every function in this module treats points as arrays whose last axis is the
space dimension ``n``; leading axes are batch axes.  For ``n == 1`` a bare
scalar is accepted as a single point.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Sequence

import numpy as np
from scipy import integrate, special

Array = np.ndarray

_E = math.e
_SEED = 20240611


def as_points(x: Any, dimension: int) -> Array:
    """Coerce ``x`` to a float array with trailing axis ``dimension``."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        if dimension != 1:
            raise ValueError(f"scalar input needs dimension 1, got {dimension}")
        arr = arr[None]
    if arr.shape[-1] != dimension:
        raise ValueError(f"expected trailing dimension {dimension}, got shape {arr.shape}")
    return arr


def _scalar_or_array(v: Array) -> Any:
    return float(v) if np.ndim(v) == 0 else v


def log_sq_e(r: Array) -> Array:
    """``log(r**2 + e)`` without overflowing for huge ``r``."""
    r = np.abs(np.asarray(r, dtype=float))
    big = r > 1e100
    safe = np.where(big, 1.0, r)
    out = np.log(safe * safe + _E)
    if np.any(big):
        rb = np.where(big, r, 1.0)
        out = np.where(big, 2.0 * np.log(rb) + np.log1p(_E / (rb * rb)), out)
    return out


# ---------------------------------------------------------------------------
# radial profiles


@dataclass(frozen=True)
class RadialProfile:
    """Nondecreasing convex profile ``psi`` on ``[0, inf)`` with ``psi(0) = 0``.

    ``inverse_derivative`` and ``conjugate`` are optional closed forms; when
    absent they are computed numerically from ``derivative``.
    """

    value: Callable[[Array], Array]
    derivative: Callable[[Array], Array]
    inverse_derivative: Callable[[Array], Array] | None = None
    conjugate: Callable[[Array], Array] | None = None


def _power_profile(p: float) -> RadialProfile:
    q = p / (p - 1.0)
    return RadialProfile(
        value=lambda r: np.power(r, p) / p,
        derivative=lambda r: np.power(r, p - 1.0),
        inverse_derivative=lambda s: np.power(s, 1.0 / (p - 1.0)),
        conjugate=lambda s: np.power(s, q) / q,
    )


def scale_profile(profile: RadialProfile, c: float) -> RadialProfile:
    """Profile of ``c * psi``; the conjugate becomes ``c * psi*(s / c)``."""
    if c == 1.0:
        return profile
    inv, conj = profile.inverse_derivative, profile.conjugate
    return RadialProfile(
        value=lambda r: c * profile.value(r),
        derivative=lambda r: c * profile.derivative(r),
        inverse_derivative=None if inv is None else (lambda s: inv(np.asarray(s) / c)),
        conjugate=None if conj is None else (lambda s: c * conj(np.asarray(s) / c)),
    )


def solve_derivative(derivative: Callable[[Array], Array], s: Array,
                     max_doublings: int = 200) -> Array:
    """Vectorized root of ``derivative(r) = s`` for a nondecreasing ``derivative``.

    Returns ``inf`` where the derivative never reaches ``s`` (the conjugate is
    then infinite).  The bracket is found by doubling/halving and then refined
    by 64 bisection steps, which resolves the root to relative machine
    precision.
    """
    s = np.asarray(s, dtype=float)
    flat = s.reshape(-1)
    out = np.zeros_like(flat)
    active = flat > 0
    if not np.any(active):
        return out.reshape(s.shape)
    target = flat[active]
    hi = np.ones_like(target)
    for _ in range(max_doublings):
        low = derivative(hi) < target
        if not np.any(low):
            break
        hi = np.where(low, hi * 2.0, hi)
    unbounded = derivative(hi) < target
    lo = hi.copy()
    for _ in range(1100):
        high = (derivative(lo) >= target) & (lo > 0)
        if not np.any(high):
            break
        lo = np.where(high, lo * 0.5, lo)
    hi = np.minimum(hi, np.where(lo > 0, 2.0 * lo, hi))
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        below = derivative(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    root = 0.5 * (lo + hi)
    root[unbounded] = np.inf
    out[active] = root
    return out.reshape(s.shape)


def profile_conjugate(profile: RadialProfile, s: Array) -> Array:
    """``sup_r r*s - psi(r)`` for ``s >= 0``."""
    s = np.asarray(s, dtype=float)
    if profile.conjugate is not None:
        return profile.conjugate(s)
    r = profile_inverse_derivative(profile, s)
    finite = np.isfinite(r)
    rs = np.where(finite, r, 0.0)
    val = s * rs - profile.value(rs)
    return np.where(finite, np.maximum(val, 0.0), np.inf)


def profile_inverse_derivative(profile: RadialProfile, s: Array) -> Array:
    if profile.inverse_derivative is not None:
        return profile.inverse_derivative(np.asarray(s, dtype=float))
    return solve_derivative(profile.derivative, s)


def conjugate_profile(profile: RadialProfile, numeric: bool = True) -> RadialProfile:
    """Profile of the conjugate ``psi*``; its derivative is ``(psi')^{-1}``.

    With ``numeric=True`` the conjugate never uses closed forms, so the result
    is an independent route to ``psi*``.
    """
    if numeric:
        base = RadialProfile(profile.value, profile.derivative)
    else:
        base = profile
    return RadialProfile(
        value=lambda s: profile_conjugate(base, s),
        derivative=lambda s: profile_inverse_derivative(base, s),
        inverse_derivative=None if numeric else (
            (lambda r: profile.derivative(np.asarray(r, dtype=float)))),
        conjugate=None if numeric else profile.value,
    )


# --- log-tempered profile: psi(r) = int_0^r s^(p-1) / log(s^2 + e) ds

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def _log_tempered_integrand(s: Array, p: float) -> Array:
    return np.power(s, p - 1.0) / log_sq_e(s)


class _LogTemperedTable:
    """Cumulative table of the log-tempered integral.

    Knots are geometric with ratio about 1.08, so a 24-point Gauss-Legendre
    rule per segment is exact to rounding; evaluation adds the same rule on
    the partial segment, and a Gauss-Jacobi rule absorbs the ``s^(p-1)``
    factor near 0.
    """

    r_min = 1e-3
    r_max = 1e8

    def __init__(self, p: float):
        self.p = p
        self.knots = np.geomspace(self.r_min, self.r_max, 321)
        xj, wj = special.roots_jacobi(40, 0.0, p - 1.0)
        self._jacobi = (xj, wj)
        head = self._small(np.array([self.r_min]))
        incs = self._segment(self.knots[:-1], self.knots[1:])
        self.cum = np.concatenate([head, head[0] + np.cumsum(incs)])

    def _small(self, r: Array) -> Array:
        # int_0^r s^(p-1) g(s) ds with s = r(1+x)/2 and Jacobi weight (1+x)^(p-1)
        xj, wj = self._jacobi
        s = 0.5 * r[:, None] * (1.0 + xj[None, :])
        g = 1.0 / log_sq_e(s)
        return np.power(0.5 * r, self.p) * (g @ wj)

    def _segment(self, a: Array, b: Array) -> Array:
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        s = mid[:, None] + half[:, None] * _GL_NODES[None, :]
        return half * (_log_tempered_integrand(s, self.p) @ _GL_WEIGHTS)

    def _huge(self, r: float) -> float:
        p = self.p
        f = lambda u: math.exp(p * u) / float(log_sq_e(math.exp(u)))
        lo, hi = math.log(self.r_max), math.log(r)
        val, _ = integrate.quad(f, lo, hi, epsabs=1e-10, epsrel=1e-12, limit=500)
        return float(self.cum[-1]) + val

    def __call__(self, r: Array) -> Array:
        r = np.abs(np.asarray(r, dtype=float))
        flat = r.reshape(-1)
        out = np.zeros_like(flat)
        small = (flat > 0) & (flat <= self.r_min)
        if np.any(small):
            out[small] = self._small(flat[small])
        mid = (flat > self.r_min) & (flat <= self.r_max)
        if np.any(mid):
            rm = flat[mid]
            k = np.clip(np.searchsorted(self.knots, rm, side="right") - 1, 0, self.knots.size - 1)
            out[mid] = self.cum[k] + self._segment(self.knots[k], rm)
        huge = np.nonzero(flat > self.r_max)[0]
        for i in huge:
            out[i] = self._huge(float(flat[i])) if np.isfinite(flat[i]) else np.inf
        return out.reshape(r.shape)


@functools.lru_cache(maxsize=32)
def _log_tempered_table(p: float) -> _LogTemperedTable:
    return _LogTemperedTable(p)


def log_tempered_profile(p: float) -> RadialProfile:
    table = _log_tempered_table(float(p))
    return RadialProfile(
        value=table,
        derivative=lambda r: _log_tempered_integrand(np.abs(np.asarray(r, dtype=float)), p),
    )


# --- companion of the log-tempered function: |x|^p / (q log(|x|^2+e)^q) for large |x|


def _damped_raw(p: float) -> tuple[Callable, Callable]:
    q = p / (p - 1.0)

    def f(r):
        r = np.asarray(r, dtype=float)
        return np.power(r, p) / (q * np.power(log_sq_e(r), q))

    def df(r):
        r = np.asarray(r, dtype=float)
        lg = log_sq_e(r)
        # d/dr log(r^2+e) = 2/(r + e/r), finite for huge r
        pos = r > 0
        dlog = np.where(pos, 2.0 / (r + _E / np.where(pos, r, 1.0)), 0.0)
        return (p * np.power(r, p - 1.0) * np.power(lg, -q)
                - q * np.power(r, p) * np.power(lg, -q - 1.0) * dlog) / q

    return f, df


@functools.lru_cache(maxsize=32)
def damped_convexity_threshold(p: float) -> float:
    """Smallest ``x0`` beyond which the companion formula is convex and increasing.

    Returns 0 when the formula is convex on the whole half-line.
    """
    _, df = _damped_raw(p)
    r = np.geomspace(1e-6, 1e12, 400001)
    eps = 1e-6
    d2 = (df(r * (1 + eps)) - df(r * (1 - eps))) / (2 * eps * r)
    bad = (d2 < 0) | (df(r) <= 0)
    if not np.any(bad):
        return 0.0
    last = int(np.nonzero(bad)[0][-1])
    if last >= r.size - 1000:
        raise ValueError(f"log_damped_companion({p}): formula not convex on the probed range")
    return float(r[last + 1])


def log_damped_profile(p: float) -> RadialProfile:
    f, df = _damped_raw(p)
    x0 = damped_convexity_threshold(p)
    if x0 == 0.0:
        return RadialProfile(value=f, derivative=df)
    a = float(df(x0)) / (2.0 * x0)
    c = float(f(x0)) - a * x0 * x0

    def value(r):
        r = np.asarray(r, dtype=float)
        rr = np.where(r < x0, x0, r)
        return np.where(r < x0, a * r * r, f(rr) - c)

    def deriv(r):
        r = np.asarray(r, dtype=float)
        rr = np.where(r < x0, x0, r)
        return np.where(r < x0, 2.0 * a * r, df(rr))

    return RadialProfile(value=value, derivative=deriv)


# ---------------------------------------------------------------------------
# GFunction


@dataclass(frozen=True)
class GFunction:
    """Convex even integrand ``phi`` on R^n with gradient and optional closed-form conjugate.

    ``blocks`` is a tuple of ``(coordinate indices, RadialProfile)``; a radial
    function is a single block covering every coordinate.  ``evaluate`` and
    ``gradient`` are only used directly for ``structure == "general"``.
    """

    dimension: int
    structure: str
    strictly_convex: bool
    n_function: bool
    descriptor: dict = field(default_factory=dict)
    blocks: tuple = ()
    evaluate_fn: Callable[[Array], Array] | None = None
    gradient_fn: Callable[[Array], Array] | None = None
    conjugate_fn: Callable[[Array], Array] | None = None

    def __call__(self, x: Any) -> Any:
        return self.evaluate(x)

    def evaluate(self, x: Any) -> Any:
        pts = as_points(x, self.dimension)
        if self.structure == "general":
            return _scalar_or_array(_apply_pointwise(self.evaluate_fn, pts))
        out = np.zeros(pts.shape[:-1])
        for idx, prof in self.blocks:
            out = out + prof.value(np.linalg.norm(pts[..., list(idx)], axis=-1))
        return _scalar_or_array(out)

    def gradient(self, x: Any) -> Array:
        pts = as_points(x, self.dimension)
        if self.structure == "general":
            return _apply_pointwise(self.gradient_fn, pts, vector=True)
        out = np.zeros_like(pts)
        for idx, prof in self.blocks:
            sub = pts[..., list(idx)]
            r = np.linalg.norm(sub, axis=-1)
            scale = np.where(r > 0, prof.derivative(r) / np.where(r > 0, r, 1.0), 0.0)
            out[..., list(idx)] = scale[..., None] * sub
        return out

    @property
    def conjugate_analytic(self) -> Callable[[Array], Array] | None:
        if self.conjugate_fn is not None:
            return self.conjugate_fn
        if self.blocks and all(prof.conjugate is not None for _, prof in self.blocks):
            return lambda xi: _block_conjugate(self, as_points(xi, self.dimension), numeric=False)
        return None


def _apply_pointwise(fn, pts: Array, vector: bool = False) -> Array:
    flat = pts.reshape(-1, pts.shape[-1])
    vals = [np.asarray(fn(p), dtype=float) for p in flat]
    if vector:
        return np.asarray(vals).reshape(pts.shape)
    return np.asarray(vals, dtype=float).reshape(pts.shape[:-1])


def _block_conjugate(phi: GFunction, xi: Array, numeric: bool) -> Array:
    out = np.zeros(xi.shape[:-1])
    for idx, prof in phi.blocks:
        s = np.linalg.norm(xi[..., list(idx)], axis=-1)
        if numeric:
            prof = RadialProfile(prof.value, prof.derivative)
        out = out + profile_conjugate(prof, s)
    return out


def _radial(profile: RadialProfile, n: int, **kw) -> GFunction:
    return GFunction(dimension=n, structure="radial", blocks=((tuple(range(n)), profile),), **kw)


def _check_p(p: float, what: str) -> float:
    p = float(p)
    if not p > 1.0:
        raise ValueError(f"{what}: exponent p={p} must exceed 1 (otherwise not an N-function)")
    return p


def make_family(family: dict | str, **params: Any) -> GFunction:
    """Build a GFunction from a family descriptor.

    ``family`` is either a dict with key ``family`` plus parameters, or a family
    name with parameters as keyword arguments::

        make_family("power", p=2, n=2)
        make_family({"family": "block", "ps": [2, 4], "dims": [1, 1]})

    Radial and block families accept ``scale`` (a positive factor on phi).
    """
    desc = dict(family) if isinstance(family, dict) else {"family": family}
    desc.update(params)
    scale = float(desc.pop("scale", 1.0))
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale}")
    phi = _make_family(desc)
    if scale == 1.0:
        return phi
    if phi.structure == "general":
        raise ValueError("scale is only supported for radial and block families")
    blocks = tuple((idx, scale_profile(prof, scale)) for idx, prof in phi.blocks)
    return replace(phi, blocks=blocks, descriptor={**phi.descriptor, "scale": scale})


def _make_family(desc: dict) -> GFunction:
    family = desc.get("family")
    if family == "power":
        p = _check_p(desc["p"], "power")
        n = int(desc.get("n", 1))
        return _radial(_power_profile(p), n, strictly_convex=True, n_function=True,
                       descriptor={"family": "power", "p": p, "n": n})
    if family == "block":
        ps = [_check_p(p, "block") for p in desc["ps"]]
        dims = [int(d) for d in desc.get("dims", [1] * len(ps))]
        if len(ps) != len(dims) or min(dims) < 1:
            raise ValueError("block: need one positive dimension per exponent")
        blocks, start = [], 0
        for p, d in zip(ps, dims):
            blocks.append((tuple(range(start, start + d)), _power_profile(p)))
            start += d
        return GFunction(dimension=start, structure="block", strictly_convex=True, n_function=True,
                         blocks=tuple(blocks),
                         descriptor={"family": "block", "ps": ps, "dims": dims})
    if family == "log_tempered":
        p = _check_p(desc["p"], "log_tempered")
        n = int(desc.get("n", 1))
        return _radial(log_tempered_profile(p), n, strictly_convex=True, n_function=True,
                       descriptor={"family": "log_tempered", "p": p, "n": n})
    if family == "log_damped_companion":
        p = _check_p(desc["p"], "log_damped_companion")
        n = int(desc.get("n", 1))
        return _radial(log_damped_profile(p), n, strictly_convex=True, n_function=True,
                       descriptor={"family": "log_damped_companion", "p": p, "n": n})
    if family == "custom":
        return make_custom(desc["evaluate"], desc["gradient"], int(desc.get("n", 1)),
                           strictly_convex=bool(desc.get("strictly_convex", False)),
                           n_function=bool(desc.get("n_function", False)))
    raise ValueError(f"unknown G-function family {family!r}")


def make_custom(evaluate: Callable, gradient: Callable, n: int = 1, *,
                strictly_convex: bool = False, n_function: bool = False,
                samples: int = 400, seed: int = _SEED) -> GFunction:
    """Wrap user callables (single point in, scalar/vector out) after sampling checks.

    Rejects with ``ValueError`` naming the witness point when ``phi(0) != 0``,
    symmetry fails, or midpoint convexity fails on the sample.
    """
    rng = np.random.default_rng(seed)
    f0 = float(evaluate(np.zeros(n)))
    if abs(f0) > 1e-12:
        raise ValueError(f"custom G-function: phi(0) = {f0} != 0")
    radii = np.geomspace(1e-3, 10.0, samples)
    xs = rng.standard_normal((samples, n))
    xs *= (radii / np.linalg.norm(xs, axis=1))[:, None]
    ys = rng.standard_normal((samples, n)) * radii[::-1, None]
    for x, y in zip(xs, ys):
        fx, fmx = float(evaluate(x)), float(evaluate(-x))
        tol = 1e-10 * max(1.0, abs(fx))
        if abs(fx - fmx) > tol:
            raise ValueError(f"custom G-function not even: witness x={x.tolist()}")
        fy, fm = float(evaluate(y)), float(evaluate(0.5 * (x + y)))
        if fm > 0.5 * (fx + fy) + 1e-10 * max(1.0, abs(fx) + abs(fy)):
            raise ValueError(f"custom G-function not convex: witness x={x.tolist()}, y={y.tolist()}")
        if fx < -1e-12:
            raise ValueError(f"custom G-function negative: witness x={x.tolist()}")
    return GFunction(dimension=n, structure="general", strictly_convex=strictly_convex,
                     n_function=n_function, evaluate_fn=evaluate, gradient_fn=gradient,
                     descriptor={"family": "custom", "n": n})


# ---------------------------------------------------------------------------
# conjugation


def _general_conjugate_point(phi: GFunction, xi: Array, max_iter: int = 500) -> float:
    # gradient ascent on <xi, x> - phi(x) from 0 with Armijo backtracking
    x = np.zeros(phi.dimension)
    val = 0.0
    step = 1.0
    for _ in range(max_iter):
        g = xi - phi.gradient_fn(x)
        gn = float(g @ g)
        if gn < 1e-26:
            break
        while step > 1e-16:
            x_new = x + step * g
            v_new = float(xi @ x_new - phi.evaluate_fn(x_new))
            if v_new >= val + 0.25 * step * gn:
                break
            step *= 0.5
        else:
            break
        x, val = x_new, v_new
        step *= 2.0
        if np.linalg.norm(x) > 1e12:
            return math.inf
    return max(val, 0.0)


def conjugate(phi: GFunction, xi: Any, numeric: bool = False) -> Any:
    """Fenchel conjugate ``phi*(xi) = sup_x <xi, x> - phi(x)``.

    Uses the closed form when the family has one (unless ``numeric``).
    Radial and block families reduce to one-dimensional problems per block;
    general families use gradient ascent.  Divergent suprema give ``inf``.
    """
    pts = as_points(xi, phi.dimension)
    if phi.structure == "general":
        if phi.conjugate_fn is not None and not numeric:
            return _scalar_or_array(_apply_pointwise(phi.conjugate_fn, pts))
        flat = pts.reshape(-1, phi.dimension)
        vals = np.array([_general_conjugate_point(phi, p) for p in flat])
        return _scalar_or_array(vals.reshape(pts.shape[:-1]))
    return _scalar_or_array(_block_conjugate(phi, pts, numeric=numeric))


def conjugate_function(phi: GFunction, numeric: bool = False) -> GFunction:
    """The conjugate ``phi*`` as a GFunction (radial/block families only)."""
    if phi.structure == "general":
        raise ValueError("conjugate_function needs radial or block structure")
    blocks = tuple((idx, conjugate_profile(prof, numeric=numeric or prof.conjugate is None))
                   for idx, prof in phi.blocks)
    desc = {"family": "conjugate", "of": phi.descriptor, "numeric": bool(numeric)}
    return GFunction(dimension=phi.dimension, structure=phi.structure,
                     strictly_convex=phi.strictly_convex, n_function=phi.n_function,
                     blocks=blocks, descriptor=desc)


def fenchel_young_gap(phi: GFunction, x: Any, xi: Any, numeric: bool = False) -> Any:
    """``phi(x) + phi*(xi) - <xi, x>``; nonnegative by the Fenchel-Young inequality."""
    xs = as_points(x, phi.dimension)
    xis = as_points(xi, phi.dimension)
    cj = np.asarray(conjugate(phi, xis, numeric=numeric))
    gap = np.asarray(phi.evaluate(xs)) + cj - np.sum(xs * xis, axis=-1)
    return _scalar_or_array(np.where(np.isinf(cj), np.inf, gap))


def gradient_conjugate_bound_check(phi: GFunction, x: Any, numeric: bool = False) -> tuple[float, float]:
    """Gaps of ``phi*(grad phi(x)) <= <grad phi(x), x> <= phi(2x)``.

    Returns ``(phi(2x) - <g, x>, <g, x> - phi*(g))``; both are nonnegative.
    """
    xs = as_points(x, phi.dimension)
    if xs.ndim != 1:
        raise ValueError("gradient_conjugate_bound_check takes a single point")
    g = phi.gradient(xs)
    pair = float(g @ xs)
    upper = float(phi.evaluate(2.0 * xs)) - pair
    lower = pair - float(conjugate(phi, g, numeric=numeric))
    return upper, lower


# ---------------------------------------------------------------------------
# growth conditions


def sample_directions(n: int, count: int = 16, seed: int = _SEED) -> Array:
    """Deterministic unit directions: coordinate axes (both signs) plus seeded normals."""
    eye = np.eye(n)
    dirs = [eye, -eye]
    if n > 1:
        extra = np.random.default_rng(seed).standard_normal((max(count - 2 * n, 0), n))
        extra /= np.linalg.norm(extra, axis=1, keepdims=True)
        dirs.append(extra)
        diag = np.ones(n) / math.sqrt(n)
        dirs.append(np.stack([diag, -diag]))
    return np.concatenate(dirs, axis=0)


def sample_points(n: int, radius: float, samples: int, seed: int = _SEED,
                  r_min: float | None = None) -> Array:
    """Points with log-spaced radii up to ``radius`` along deterministic directions."""
    dirs = sample_directions(n, seed=seed)
    r_min = radius * 1e-4 if r_min is None else r_min
    per = max(samples // dirs.shape[0], 8)
    radii = np.geomspace(r_min, radius, per)
    return (radii[:, None, None] * dirs[None, :, :]).reshape(-1, n)


@dataclass
class GrowthReport:
    delta2_constant: float | str
    nabla2_pair: tuple[float, float] | None
    sample_radius: float
    witness: list[float]
    shell_ratios: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "delta2": self.delta2,
            "delta2_constant": self.delta2_constant,
            "nabla2_pair": list(self.nabla2_pair) if self.nabla2_pair else None,
            "sample_radius": self.sample_radius,
            "witness": self.witness,
            "shell_ratios": self.shell_ratios,
        }

    @property
    def delta2(self) -> bool:
        return self.delta2_constant != "unbounded"


def delta2_report(phi: GFunction, radius: float = 100.0, samples: int = 2000,
                  seed: int = _SEED) -> GrowthReport:
    """Sampled Delta_2 constant (``phi(2x) <= C phi(x) + 1``) and nabla_2 pair for r = 1/2.

    "unbounded" is reported when the plain doubling ratio ``phi(2x)/phi(x)``
    keeps growing over the three outermost radius shells.
    """
    if samples < 100:
        raise ValueError("delta2_report needs at least 100 samples")
    pts = sample_points(phi.dimension, radius, samples, seed)
    norms = np.linalg.norm(pts, axis=1)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        f1 = np.asarray(phi.evaluate(pts), dtype=float)
        f2 = np.asarray(phi.evaluate(2.0 * pts), dtype=float)
        ok = f1 > 0
        plus_one = np.where(ok, (f2 - 1.0) / np.where(ok, f1, 1.0), -np.inf)
        plain = np.where(ok, f2 / np.where(ok, f1, 1.0), np.nan)
    shells = [radius / 4, radius / 2, radius]
    shell_max = []
    for lo, hi in zip([0.0] + shells[:-1], shells):
        m = (norms > lo * 0.999) & (norms <= hi * 1.001) & ok
        vals = plain[m]
        shell_max.append(float(np.nanmax(vals)) if vals.size else float("nan"))
    growing = (not np.all(np.isfinite(shell_max))
               or (shell_max[2] > shell_max[1] * 1.1 and shell_max[1] > shell_max[0] * 1.1))
    i = int(np.nanargmax(np.where(np.isfinite(plus_one), plus_one, np.inf)))
    witness = pts[i].tolist()
    if growing or not np.isfinite(plus_one[i]):
        constant: float | str = "unbounded"
    else:
        constant = max(1.0, float(plus_one[i]))
    return GrowthReport(constant, _nabla2_pair(phi, pts, norms, radius), float(radius), witness,
                        [float(v) for v in shell_max])


def _nabla2_pair(phi: GFunction, pts: Array, norms: Array, radius: float,
                 r: float = 0.5) -> tuple[float, float] | None:
    # smallest l = 2^k with phi(x) <= (r/l) phi(l x) on the outer half of the sample
    f1 = np.asarray(phi.evaluate(pts), dtype=float)
    outer = norms > radius / 2
    for k in range(1, 31):
        l = 2.0 ** k
        with np.errstate(over="ignore", invalid="ignore"):
            fl = np.asarray(phi.evaluate(l * pts), dtype=float)
        slack = f1 - (r / l) * fl
        if np.all(slack[outer] <= 1e-12 * np.maximum(1.0, f1[outer])):
            return l, float(max(0.0, np.nanmax(slack)))
    return None


@dataclass
class OrderResult:
    holds: bool
    thresholds: dict
    witness: tuple[float, list[float]] | None

    def __bool__(self) -> bool:
        return self.holds

    def to_dict(self) -> dict:
        return {"holds": self.holds, "thresholds": {str(k): v for k, v in self.thresholds.items()},
                "witness": list(self.witness) if self.witness else None}


def order_llcurly(phi0: GFunction, phi1: GFunction, k_grid: Sequence[float] = (1.0, 0.5, 0.25),
                  radius: float = 1e50, samples: int = 4000, seed: int = _SEED) -> OrderResult:
    """Probe ``phi0 << phi1``: for every k some R with ``phi0(x) <= phi1(k x)`` for |x| > R.

    For each k the threshold R_k is the largest sampled violating radius.  The
    ordering is accepted for k when R_k stays three decades below ``radius``.
    """
    if phi0.dimension != phi1.dimension:
        raise ValueError("order_llcurly: dimensions differ")
    pts = sample_points(phi0.dimension, radius, samples, seed, r_min=1e-3)
    norms = np.linalg.norm(pts, axis=1)
    with np.errstate(over="ignore", invalid="ignore"):
        f0 = np.asarray(phi0.evaluate(pts), dtype=float)
    thresholds: dict = {}
    witness = None
    holds = True
    for k in k_grid:
        with np.errstate(over="ignore", invalid="ignore"):
            f1 = np.asarray(phi1.evaluate(k * pts), dtype=float)
        bad = f0 > f1 * (1 + 1e-12)
        r_k = float(norms[bad].max()) if np.any(bad) else 0.0
        thresholds[float(k)] = r_k
        if r_k > radius * 1e-3:
            holds = False
            if witness is None:
                j = int(np.nonzero(bad & (norms == r_k))[0][0])
                witness = (float(k), pts[j].tolist())
    return OrderResult(holds, thresholds, witness)


# ---------------------------------------------------------------------------
# Matuszewska-Orlicz indices


@dataclass
class IndexEstimate:
    alpha: float
    beta: float
    lambda_grid: list[float]
    fit_residual: float
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "lambda_grid": self.lambda_grid,
                "fit_residual": self.fit_residual, "degenerate": self.degenerate}


def dilation_sup(phi: GFunction, lam: float, us: Array) -> float:
    """``M(lam) = max_u phi(lam u)/phi(u)`` over the sample ``us``."""
    num = np.asarray(phi.evaluate(lam * us), dtype=float)
    den = np.asarray(phi.evaluate(us), dtype=float)
    ok = den > 0
    return float(np.max(num[ok] / den[ok]))


def matuszewska_indices(phi: GFunction, seed: int = _SEED) -> IndexEstimate:
    """Estimate the lower/upper Matuszewska-Orlicz indices from log-slopes of M(lam).

    u ranges over radii log-spaced in [1e-3, 1e3] along deterministic
    directions; alpha is the least-squares slope of ``ln M`` against
    ``ln lam`` for lam in [1e-6, 1e-3], beta for lam in [1e3, 1e6].
    """
    if not phi.n_function:
        raise ValueError("indices are defined for N-functions")
    dirs = sample_directions(phi.dimension, seed=seed)
    radii = np.geomspace(1e-3, 1e3, 61)
    us = (radii[:, None, None] * dirs[None, :, :]).reshape(-1, phi.dimension)
    small = np.geomspace(1e-6, 1e-3, 7)
    large = np.geomspace(1e3, 1e6, 7)
    slopes, resid = [], []
    for grid in (small, large):
        ln_m = np.log([dilation_sup(phi, lam, us) for lam in grid])
        ln_l = np.log(grid)
        coef = np.polyfit(ln_l, ln_m, 1)
        slopes.append(float(coef[0]))
        resid.append(float(np.sqrt(np.mean((np.polyval(coef, ln_l) - ln_m) ** 2))))
    fit = max(resid)
    return IndexEstimate(slopes[0], slopes[1], [float(v) for v in np.concatenate([small, large])],
                         fit, degenerate=fit > 0.1)


@dataclass
class GrowthTrend:
    ratios: list[float]
    norms: list[float]
    passed: bool

    def to_dict(self) -> dict:
        return {"ratios": self.ratios, "norms": self.norms, "passed": self.passed}


def modular_growth_probe(phi: GFunction, mu: float, trajectories=None, alpha: float | None = None,
                         period: float = 1.0, nodes: int = 64) -> GrowthTrend:
    """Track ``rho(u) / ||u||^mu`` along trajectories with growing Luxemburg norm.

    Passes when the ratio increases monotonically over at least four steps.
    Without explicit trajectories a fixed shape is rescaled so the norm grows
    tenfold per step (norms 1 .. 1e4).
    """
    from .orlicz import Trajectory, luxemburg_norm, modular

    if alpha is None:
        alpha = matuszewska_indices(phi).alpha
    if not mu < alpha:
        raise ValueError(f"precondition violated: mu={mu} must be below alpha={alpha:.4g}")
    if trajectories is None:
        t = np.arange(nodes) * period / nodes
        shape = np.stack([1.0 + np.sin(2 * np.pi * t / period)] * phi.dimension, axis=1)
        base = Trajectory(period, shape)
        base = base.scaled(1.0 / luxemburg_norm(phi, base))
        trajectories = [base.scaled(10.0 ** k) for k in range(5)]
    norms = [luxemburg_norm(phi, u) for u in trajectories]
    ratios = [modular(phi, u) / nrm ** mu for u, nrm in zip(trajectories, norms)]
    steps = len(ratios) - 1
    passed = steps >= 4 and all(b > a for a, b in zip(ratios, ratios[1:]))
    return GrowthTrend([float(r) for r in ratios], [float(v) for v in norms], passed)
