"""Brute-force ground truth on small instances.

Everything here evaluates the quadratics directly on a tensor grid and never
calls the dual solver or the certificate checks, so it can be used to test them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np
from scipy.optimize import minimize

from .errors import DimensionError, GridTooLarge
from .model import Problem, ScalarQuadratic

FEASIBILITY_SLACK = 1e-9
REFUTE_THRESHOLD = 1e-12
MAX_GRID_POINTS = 10**8
CHUNK = 1 << 18
REFINE_HALVINGS = 20
MAX_SWEEPS = 50


@dataclass(frozen=True)
class GridSpec:
    box: tuple
    points_per_axis: int

    def __post_init__(self):
        box = tuple((float(lo), float(hi)) for lo, hi in self.box)
        object.__setattr__(self, "box", box)
        if not box:
            raise DimensionError("grid needs at least one axis")
        if self.points_per_axis < 2:
            raise ValueError("need at least two points per axis")
        for lo, hi in box:
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise ValueError(f"invalid interval [{lo}, {hi}]")
        if self.size > MAX_GRID_POINTS:
            raise GridTooLarge(f"grid has {self.size} points, limit is {MAX_GRID_POINTS}")

    @classmethod
    def cube(cls, n: int, half_width: float, points_per_axis: int) -> "GridSpec":
        return cls(((-half_width, half_width),) * n, points_per_axis)

    @property
    def n(self) -> int:
        return len(self.box)

    @property
    def size(self) -> int:
        return self.points_per_axis ** len(self.box)

    @property
    def spacing(self) -> np.ndarray:
        return np.array([(hi - lo) / (self.points_per_axis - 1) for lo, hi in self.box])

    def axes(self):
        return [np.linspace(lo, hi, self.points_per_axis) for lo, hi in self.box]

    def chunks(self) -> Iterator[np.ndarray]:
        """Grid points in lexicographic index order, a block at a time."""
        axes = self.axes()
        shape = (self.points_per_axis,) * self.n
        for start in range(0, self.size, CHUNK):
            idx = np.unravel_index(np.arange(start, min(start + CHUNK, self.size)), shape)
            yield np.column_stack([ax[i] for ax, i in zip(axes, idx)])


@dataclass(frozen=True)
class GridOptimum:
    point: np.ndarray
    value: float
    raw_point: np.ndarray
    raw_value: float


def _values(fs, X):
    sq = np.einsum("ij,ij->i", X, X)
    a = np.array([f.a for f in fs])
    B = np.vstack([f.b for f in fs])
    c = np.array([f.c for f in fs])
    return sq[:, None] * a[None, :] + 2.0 * X @ B.T + c[None, :]


def _value(f, x):
    return f.a * float(x @ x) + 2.0 * float(f.b @ x) + f.c


def _check(p: Problem, g: GridSpec):
    if g.n != p.n:
        raise DimensionError(f"grid has {g.n} axes, problem has dimension {p.n}")


class _Refiner:
    def __init__(self, p: Problem, anchor: np.ndarray):
        self.p = p
        self.anchor = anchor

    def feasible(self, x) -> bool:
        return all(_value(f, x) <= FEASIBILITY_SLACK for f in self.p.constraints)

    def project(self, x, y):
        """Feasible stand-ins for the trial point y reached from feasible x."""
        if self.feasible(y):
            return [y]
        out = []
        t = 0.5
        for _ in range(30):
            z = x + t * (y - x)
            if self.feasible(z):
                out.append(z)
                break
            t *= 0.5
        if self.anchor is not None:
            lo, hi = 0.0, 1.0
            d = y - self.anchor
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if self.feasible(self.anchor + mid * d):
                    lo = mid
                else:
                    hi = mid
            z = self.anchor + lo * d
            if self.feasible(z):
                out.append(z)
        return out

    def run(self, x, h):
        J = self.p.objective
        v = _value(J, x)
        h = h.copy()
        for _ in range(REFINE_HALVINGS):
            for _ in range(MAX_SWEEPS):
                improved = False
                for i in range(x.shape[0]):
                    for sign in (1.0, -1.0):
                        y = x.copy()
                        y[i] += sign * h[i]
                        for z in self.project(x, y):
                            vz = _value(J, z)
                            if vz < v:
                                x, v, improved = z, vz, True
                if not improved:
                    break
            h *= 0.5
        return x, v


def _nlp_polish(p: Problem, refiner: _Refiner, x, v):
    """Local SLSQP run from the refined grid point; kept only if it is feasible and lower."""
    J = p.objective

    def cons(z):
        return np.array([-_value(f, z) for f in p.constraints])

    def cons_jac(z):
        return np.array([-(2.0 * f.a * z + 2.0 * f.b) for f in p.constraints])

    with np.errstate(all="ignore"):
        return _nlp_polish_inner(p, refiner, x, v, J, cons, cons_jac)


def _nlp_polish_inner(p, refiner, x, v, J, cons, cons_jac):
    res = minimize(
        lambda z: _value(J, z),
        x,
        jac=lambda z: 2.0 * J.a * z + 2.0 * J.b,
        constraints=[{"type": "ineq", "fun": cons, "jac": cons_jac}],
        method="SLSQP",
        options={"maxiter": 200, "ftol": 1e-15},
    )
    z = np.asarray(res.x, dtype=float)
    if not np.all(np.isfinite(z)) or not np.isfinite(_value(J, z)):
        return x, v
    candidates = refiner.project(x, z) if not refiner.feasible(z) else [z]
    for c in candidates:
        vc = _value(J, c)
        if vc < v:
            x, v = c, vc
    return x, v


def grid_minimize(p: Problem, g: GridSpec) -> Optional[GridOptimum]:
    """Best feasible grid point (constraints <= 1e-9) followed by local refinement.

    Refinement is coordinate descent with halving steps, a local SLSQP run, and
    a final short coordinate pass; each stage keeps only feasible improvements.

    Returns None when no grid point is feasible.  Ties go to the lowest grid index.
    """
    _check(p, g)
    best_v, best_x = np.inf, None
    anchor_v, anchor_x = np.inf, None
    for X in g.chunks():
        F = _values(p.constraints, X)
        worst = F.max(axis=1)
        k = int(np.argmin(worst))
        if worst[k] < anchor_v:
            anchor_v, anchor_x = float(worst[k]), X[k].copy()
        feas = worst <= FEASIBILITY_SLACK
        if not feas.any():
            continue
        J = _values([p.objective], X)[:, 0]
        J = np.where(feas, J, np.inf)
        k = int(np.argmin(J))
        if J[k] < best_v:
            best_v, best_x = float(J[k]), X[k].copy()
    if best_x is None:
        return None
    anchor = anchor_x if anchor_v <= FEASIBILITY_SLACK else None
    refiner = _Refiner(p, anchor)
    x, v = refiner.run(best_x.copy(), g.spacing)
    x, v = _nlp_polish(p, refiner, x, v)
    x, v = refiner.run(x, g.spacing * 2.0 ** -REFINE_HALVINGS)
    return GridOptimum(x, v, best_x, best_v)


def grid_refute_nonneg(q: ScalarQuadratic, g: GridSpec) -> Optional[np.ndarray]:
    """Grid point of smallest value if that value is below -1e-12, else None."""
    if g.n != q.n:
        raise DimensionError(f"grid has {g.n} axes, quadratic has dimension {q.n}")
    best_v, best_x = np.inf, None
    for X in g.chunks():
        v = _values([q], X)[:, 0]
        k = int(np.argmin(v))
        if v[k] < best_v:
            best_v, best_x = float(v[k]), X[k].copy()
    if best_v < -REFUTE_THRESHOLD:
        return best_x
    return None
