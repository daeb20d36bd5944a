"""Discrete Orlicz-space numerics on periodic grid functions.

Integrals are left-endpoint sums ``h * sum_i f(u_i)`` and derivatives are
forward differences with periodic wraparound; the pair makes discrete
integration by parts exact.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import optimize

from .gfunc import GFunction, conjugate_function

Array = np.ndarray


@dataclass(frozen=True)
class Trajectory:
    """Periodic grid function: ``values[i]`` is ``u(i*T/N)`` in R^n, with ``u_N = u_0``."""

    period: float
    values: Array

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.ndim != 2:
            raise ValueError("trajectory values must have shape (N, n)")
        if vals.shape[0] < 4:
            raise ValueError(f"trajectory needs at least 4 nodes, got {vals.shape[0]}")
        if not self.period > 0:
            raise ValueError("period must be positive")
        if not np.all(np.isfinite(vals)):
            raise ValueError("trajectory values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, f, period: float, nodes: int) -> "Trajectory":
        t = np.arange(nodes) * (period / nodes)
        return cls(period, np.asarray(f(t), dtype=float).reshape(nodes, -1))

    @classmethod
    def constant(cls, c, period: float, nodes: int) -> "Trajectory":
        c = np.atleast_1d(np.asarray(c, dtype=float))
        return cls(period, np.tile(c, (nodes, 1)))

    @property
    def nodes(self) -> int:
        return self.values.shape[0]

    @property
    def dimension(self) -> int:
        return self.values.shape[1]

    @property
    def step(self) -> float:
        return self.period / self.nodes

    @property
    def times(self) -> Array:
        return np.arange(self.nodes) * self.step

    def derivative(self) -> Array:
        """Forward differences ``(u_{i+1} - u_i)/h`` with ``u_N = u_0``."""
        return (np.roll(self.values, -1, axis=0) - self.values) / self.step

    def derivative_trajectory(self) -> "Trajectory":
        return Trajectory(self.period, self.derivative())

    def scaled(self, c: float) -> "Trajectory":
        return Trajectory(self.period, c * self.values)

    def with_values(self, values: Array) -> "Trajectory":
        return Trajectory(self.period, values)

    def __add__(self, other: "Trajectory") -> "Trajectory":
        return Trajectory(self.period, self.values + other.values)

    # CSV: header t,u1..un; one row per node, node 0 first

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"u{k + 1}" for k in range(self.dimension)])
        for t, row in zip(self.times, self.values):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in row])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path, period: float | None = None) -> "Trajectory":
        return cls.parse_csv(Path(path).read_text(), period)

    @classmethod
    def parse_csv(cls, text: str, period: float | None = None) -> "Trajectory":
        """Parse the trajectory CSV; ``period`` defaults to ``N * (t_1 - t_0)``."""
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], [r for r in rows[1:] if r]
        if header[0].strip() != "t" or len(header) < 2:
            raise ValueError("trajectory CSV header must be t,u1..un")
        data = np.array([[float(v) for v in r] for r in body])
        t, vals = data[:, 0], data[:, 1:]
        n = len(t)
        h = t[1] - t[0] if period is None else period / n
        period = n * h if period is None else period
        if abs(t[0]) > 1e-9 * period or np.max(np.abs(t - np.arange(n) * h)) > 1e-9 * period:
            raise ValueError("trajectory CSV time grid is not uniform starting at 0")
        return cls(period, vals)


@dataclass(frozen=True)
class Decomposition:
    mean: Array
    oscillation: Trajectory


def _pointwise(phi: GFunction, values: Array) -> Array:
    if values.shape[-1] != phi.dimension:
        raise ValueError(f"dimension mismatch: phi on R^{phi.dimension}, values in R^{values.shape[-1]}")
    return np.asarray(phi.evaluate(values), dtype=float).reshape(values.shape[:-1])


def modular(phi: GFunction, u: Trajectory) -> float:
    """Left-endpoint sum of ``phi(u_i)``."""
    return float(u.step * np.sum(_pointwise(phi, u.values)))


def luxemburg_norm(phi: GFunction, u: Trajectory, rtol: float = 1e-10, max_steps: int = 60) -> float:
    """``inf{lam > 0 : modular(u/lam) <= 1}`` by bracketing then Brent's method.

    Returns 0 for the zero trajectory, and ``inf`` (bracket exhausted) when
    the modular stays above 1 after ``max_steps`` doublings.
    """
    vals, h = u.values, u.step
    if not np.any(vals):
        return 0.0

    def rho(lam):
        with np.errstate(over="ignore", invalid="ignore"):
            return h * np.sum(_pointwise(phi, vals / lam))

    lo = hi = 1.0
    if rho(1.0) > 1.0:
        for _ in range(max_steps):
            hi *= 2.0
            if rho(hi) <= 1.0:
                break
        else:
            return math.inf
        lo = hi / 2.0
    else:
        for _ in range(max_steps):
            lo /= 2.0
            if rho(lo) > 1.0:
                break
        else:
            return 0.0
        hi = lo * 2.0
    return float(optimize.brentq(lambda lam: rho(lam) - 1.0, lo, hi, xtol=1e-300, rtol=rtol))


def amemiya_bound_gap(phi: GFunction, u: Trajectory) -> float:
    """``modular(u) + 1 - ||u||``; nonnegative since ``||u|| <= rho(u) + 1``."""
    return modular(phi, u) + 1.0 - luxemburg_norm(phi, u)


def decompose(u: Trajectory) -> Decomposition:
    mean = u.step / u.period * np.sum(u.values, axis=0)
    return Decomposition(mean, Trajectory(u.period, u.values - mean))


def pairing(u: Trajectory, v: Trajectory) -> float:
    """``h * sum_i <v_i, u_i>``."""
    return float(u.step * np.sum(u.values * v.values))


def holder_gap(phi: GFunction, u: Trajectory, v: Trajectory, phi_conj: GFunction | None = None) -> float:
    """``2 ||u||_phi ||v||_phi* - pairing(u, v)``.

    The conjugate norm integrates the numeric conjugate unless ``phi_conj`` is
    given.  Returns ``inf`` when the conjugate norm is infinite.
    """
    if phi_conj is None:
        phi_conj = conjugate_function(phi, numeric=True)
    nu = luxemburg_norm(phi, u)
    nv = luxemburg_norm(phi_conj, v)
    if math.isinf(nv) or math.isinf(nu):
        return math.inf
    return 2.0 * nu * nv - pairing(u, v)


@dataclass(frozen=True)
class WirtingerResult:
    gap: float
    slack: float
    rhs: float


def wirtinger_gap(phi: GFunction, u: Trajectory) -> WirtingerResult:
    """Minimum over nodes of ``(1/T) h sum_r phi(T u'_r) - phi(u~_i)``.

    ``slack`` is the largest change of ``phi(u~)`` across one grid cell, the
    discretization allowance reported alongside the gap.
    """
    T = u.period
    rhs = u.step / T * float(np.sum(_pointwise(phi, T * u.derivative())))
    osc = decompose(u).oscillation.values
    lhs = _pointwise(phi, osc)
    slack = float(np.max(np.abs(np.roll(lhs, -1) - lhs)))
    return WirtingerResult(float(rhs - np.max(lhs)), slack, rhs)


@dataclass(frozen=True)
class SobolevNorms:
    standard: float
    equivalent: float

    @property
    def ratio(self) -> float:
        return self.standard / self.equivalent if self.equivalent > 0 else math.nan


def sobolev_norms(phi: GFunction, u: Trajectory) -> SobolevNorms:
    """``||u|| + ||u'||`` and the equivalent ``|mean u| + ||u'||``."""
    du = luxemburg_norm(phi, u.derivative_trajectory())
    mean = decompose(u).mean
    return SobolevNorms(luxemburg_norm(phi, u) + du, float(np.linalg.norm(mean)) + du)


def in_pi_space(phi: GFunction, u: Trajectory, r: float) -> bool:
    """Membership in ``{u : dist(u, L^inf) < r}``; every grid function is bounded."""
    return True
