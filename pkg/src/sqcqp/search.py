"""Global search for a point making every functional strictly negative.

Minimizes phi(x) = max_k f_k(x) with scrambled Sobol sampling over a box and
SLSQP polishing of the epigraph form from the best samples.  Absence of a
result is not a proof that no such point exists.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import optimize
from scipy.stats import qmc

from .errors import DimensionError


@dataclass(frozen=True)
class SearchConfig:
    box: float = 10.0
    samples: int = 256
    starts: int = 8
    seed: int = 0
    # strict points must satisfy max_k f_k <= -strict_margin
    strict_margin: float = 1e-12
    max_local_iter: int = 200
    # simplex resolution for multiplier search; None picks 200 for up to 3 functionals
    grid: Optional[int] = None
    refine_rounds: int = 400


@dataclass(frozen=True)
class SearchOutcome:
    point: np.ndarray
    value: float
    samples: int
    local_runs: int


class QuadraticStack:
    """Vectorized evaluation of a family of quadratics sharing dimension n.

    Members are ``ScalarQuadratic`` (attribute ``a``) or anything exposing a
    symmetric matrix ``A`` together with ``b`` and ``c``.
    """

    def __init__(self, fs: Sequence, n: int):
        if not fs:
            raise DimensionError("empty family of functionals")
        self.n = n
        self.b = np.vstack([np.asarray(f.b, dtype=float) for f in fs])
        if self.b.shape[1] != n:
            raise DimensionError(f"functionals have dimension {self.b.shape[1]}, expected {n}")
        self.c = np.array([float(f.c) for f in fs])
        if all(hasattr(f, "A") for f in fs):
            self.A = np.stack([np.asarray(f.A, dtype=float) for f in fs])
            self.a = None
        else:
            self.a = np.array([float(f.a) for f in fs])
            self.A = None

    def values(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        if self.a is not None:
            sq = np.einsum("ij,ij->i", X, X)
            return sq[:, None] * self.a[None, :] + 2.0 * X @ self.b.T + self.c[None, :]
        quad = np.einsum("ni,kij,nj->nk", X, self.A, X)
        return quad + 2.0 * X @ self.b.T + self.c[None, :]

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        if self.a is not None:
            return 2.0 * self.a[:, None] * x[None, :] + 2.0 * self.b
        return 2.0 * np.einsum("kij,j->ki", self.A, x) + 2.0 * self.b

    def seeds(self) -> np.ndarray:
        """Unconstrained minimizers of the strictly convex members, plus the origin."""
        pts = [np.zeros(self.n)]
        if self.a is not None:
            for a, b in zip(self.a, self.b):
                if a > 0:
                    pts.append(-b / a)
        return np.vstack(pts)


def _local_descent(stack: QuadraticStack, x0: np.ndarray, bound: float, maxiter: int):
    n = stack.n

    def objective(z):
        return z[n]

    def objective_jac(z):
        g = np.zeros(n + 1)
        g[n] = 1.0
        return g

    def cons(z):
        return z[n] - stack.values(z[:n])[0]

    def cons_jac(z):
        jac = stack.jacobian(z[:n])
        return np.hstack([-jac, np.ones((jac.shape[0], 1))])

    t0 = float(stack.values(x0).max())
    res = optimize.minimize(
        objective,
        np.append(x0, t0),
        jac=objective_jac,
        method="SLSQP",
        bounds=[(-bound, bound)] * n + [(None, None)],
        constraints=[{"type": "ineq", "fun": cons, "jac": cons_jac}],
        options={"maxiter": maxiter, "ftol": 1e-15},
    )
    x = np.clip(res.x[:n], -bound, bound)
    return x, float(stack.values(x).max())


def minimize_max(fs: Sequence, n: int, cfg: SearchConfig = SearchConfig()) -> SearchOutcome:
    """Best point found for max_k f_k, with the value there."""
    stack = QuadraticStack(fs, n)
    seeds = stack.seeds()
    bound = max(cfg.box, 2.0 * float(np.abs(seeds).max(initial=0.0)))
    sampler = qmc.Sobol(d=n, scramble=True, seed=cfg.seed)
    samples = qmc.scale(sampler.random(cfg.samples), [-cfg.box] * n, [cfg.box] * n)
    X = np.vstack([seeds, samples])
    phi = stack.values(X).max(axis=1)
    order = np.argsort(phi, kind="stable")

    best_x, best_phi = X[order[0]], float(phi[order[0]])
    runs = 0
    n_starts = 1 if best_phi <= -cfg.strict_margin else cfg.starts
    for idx in order[:n_starts]:
        x, val = _local_descent(stack, X[idx], bound, cfg.max_local_iter)
        runs += 1
        if val < best_phi:
            best_x, best_phi = x, val
    return SearchOutcome(np.array(best_x), best_phi, X.shape[0], runs)


def find_strict_point(fs: Sequence, n: int, cfg: SearchConfig = SearchConfig()) -> Optional[np.ndarray]:
    """A point with every f_k <= -strict_margin, or None once the budget is spent."""
    out = minimize_max(fs, n, cfg)
    if out.value <= -cfg.strict_margin:
        return out.point
    return None
