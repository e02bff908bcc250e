"""Theorem of the alternative for families of scalar quadratics.

For f_0, ..., f_m either some x makes every f_k strictly negative, or some
nonzero gamma >= 0 makes sum gamma_k f_k nonnegative everywhere.  For scalar
quadratics the second statement has an exact closed-form test, so a found
multiplier is a proof; a found strict point is a proof by evaluation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import optimize

from .errors import AllZeroMultipliers, DimensionError, InternalContradiction, NegativeMultiplier
from .gis import linear_rank
from .model import Multipliers, ScalarQuadratic, combine, evaluate, infimum
from .search import SearchConfig, minimize_max

MAX_GRID_POINTS = 50_000


class Outcome(str, enum.Enum):
    STRICT_POINT_FOUND = "StrictPointFound"
    MULTIPLIER_FOUND = "MultiplierFound"
    UNDECIDED = "Undecided"


@dataclass(frozen=True)
class AlternativeVerdict:
    outcome: Outcome
    strict_point: Optional[np.ndarray] = None
    multiplier: Optional[Multipliers] = None
    budget_used: dict = field(default_factory=dict)
    rank_condition: bool = True
    # max_k f_k at the best point found, and the certified margin if any
    best_max_value: float = math.inf
    margin: Optional[float] = None


def _stack(fs):
    a = np.array([f.a for f in fs])
    B = np.vstack([f.b for f in fs])
    c = np.array([f.c for f in fs])
    return a, B, c


def nonnegativity_certificate(fs: Sequence[ScalarQuadratic], gamma, tol: float = 0.0) -> bool:
    """True iff sum gamma_k f_k(x) >= -tol for every x (exact for scalar quadratics)."""
    gamma = np.asarray(gamma, dtype=float)
    if gamma.shape != (len(fs),):
        raise DimensionError(f"{gamma.size} weights for {len(fs)} functionals")
    if np.any(gamma < 0):
        raise NegativeMultiplier(f"negative weight in {gamma.tolist()}")
    if not np.any(gamma > 0):
        raise AllZeroMultipliers("all weights are zero")
    return infimum(combine(fs, gamma)) >= -tol


def margins(a, B, c, G: np.ndarray) -> np.ndarray:
    """Exact infimum of sum_k G[i, k] f_k for every row of G."""
    aa = G @ a
    bb = G @ B
    cc = G @ c
    bsq = np.einsum("ij,ij->i", bb, bb)
    out = np.full(G.shape[0], -np.inf)
    pos = aa > 0
    out[pos] = cc[pos] - bsq[pos] / aa[pos]
    flat = (aa == 0) & ~np.any(bb != 0, axis=1)
    out[flat] = cc[flat]
    return out


def simplex_grid(k: int, resolution: int) -> np.ndarray:
    """All points of the unit simplex in R^k with coordinates in multiples of 1/resolution."""
    def compositions(parts, total):
        if parts == 1:
            return np.array([[total]])
        blocks = []
        for first in range(total, -1, -1):
            rest = compositions(parts - 1, total - first)
            blocks.append(np.hstack([np.full((rest.shape[0], 1), first), rest]))
        return np.vstack(blocks)

    return compositions(k, resolution).astype(float) / resolution


def _default_resolution(k: int) -> int:
    if k <= 3:
        return 200
    res = 200
    while res > 2 and math.comb(res + k - 1, k - 1) > MAX_GRID_POINTS:
        res -= 1
    return res


def flat_combination(a, B, c, a0=0.0, b0=None, c0=0.0, simplex=True) -> Optional[np.ndarray]:
    """Weights gamma >= 0 maximizing c0 + c.gamma subject to a0 + a.gamma = 0 and b0 + B^T gamma = 0.

    On that set the combined quadratic is the constant c0 + c.gamma.  With
    ``simplex`` the weights also sum to one.  Returns None when the set is empty;
    raises ``OverflowError`` when the linear program is unbounded.
    """
    a = np.asarray(a, dtype=float)
    B = np.asarray(B, dtype=float)
    k, n = B.shape
    b0 = np.zeros(n) if b0 is None else np.asarray(b0, dtype=float)
    A_eq = np.vstack([a[None, :], B.T])
    b_eq = -np.concatenate([[a0], b0])
    if simplex:
        A_eq = np.vstack([A_eq, np.ones((1, k))])
        b_eq = np.append(b_eq, 1.0)
    res = optimize.linprog(-np.asarray(c, dtype=float), A_eq=A_eq, b_eq=b_eq,
                           bounds=[(0, None)] * k, method="highs")
    if res.status == 3:
        raise OverflowError("flat combination value is unbounded")
    if res.status != 0:
        return None
    gamma = np.maximum(res.x, 0.0)
    # re-solve the equalities on the support to strip solver tolerance
    support = gamma > 1e-12 * max(1.0, gamma.max())
    if support.any():
        sol, *_ = np.linalg.lstsq(A_eq[:, support], b_eq, rcond=None)
        if np.all(sol >= 0):
            gamma = np.zeros(k)
            gamma[support] = sol
    scale = max(1.0, float(np.abs(A_eq).max()), float(np.abs(b_eq).max()))
    if np.abs(A_eq @ gamma - b_eq).max() > 1e-12 * scale * max(1.0, gamma.sum()):
        return None
    return gamma


def _refine(a, B, c, gamma, best, step, rounds):
    k = gamma.shape[0]
    pairs = [(i, j) for i in range(k) for j in range(k) if i != j]
    used = 0
    for _ in range(rounds):
        if not pairs or step < 1e-16:
            break
        used += 1
        trials = []
        for i, j in pairs:
            move = min(step, gamma[j])
            if move <= 0:
                continue
            t = gamma.copy()
            t[i] += move
            t[j] -= move
            trials.append(t)
        if not trials:
            break
        trials = np.array(trials)
        vals = margins(a, B, c, trials)
        idx = int(np.argmax(vals))
        if vals[idx] > best:
            gamma, best = trials[idx], float(vals[idx])
        else:
            step /= 2.0
    return gamma, best, used


def best_margin(fs: Sequence[ScalarQuadratic], cfg: SearchConfig = SearchConfig()):
    """Maximize the exact nonnegativity margin over the unit simplex.

    Returns ``(gamma, margin, budget)``; gamma is None when every tried weight
    vector gives margin -inf.
    """
    a, B, c = _stack(fs)
    k = len(fs)
    res = cfg.grid or _default_resolution(k)
    G = simplex_grid(k, res)
    vals = margins(a, B, c, G)
    budget = {"grid_points": int(G.shape[0]), "refine_rounds": 0}

    candidates = []
    try:
        flat = flat_combination(a, B, c)
    except OverflowError:
        flat = None
    if flat is not None:
        candidates.append((float(margins(a, B, c, flat[None])[0]), flat))

    order = np.argsort(-vals, kind="stable")
    for idx in order[:5]:
        if not np.isfinite(vals[idx]):
            break
        g, m, used = _refine(a, B, c, G[idx].copy(), float(vals[idx]), 1.0 / res, cfg.refine_rounds)
        budget["refine_rounds"] += used
        candidates.append((m, g))
    if not candidates:
        return None, -math.inf, budget
    # stable max: earliest candidate wins ties
    m, g = max(candidates, key=lambda t: t[0])
    if not np.isfinite(m):
        return None, -math.inf, budget
    return g, m, budget


def search_multiplier(fs: Sequence[ScalarQuadratic], cfg: SearchConfig = SearchConfig()) -> Optional[Multipliers]:
    """Weights certifying sum gamma_k f_k >= 0 everywhere, in Fritz-John form, or None."""
    gamma, _, _ = best_margin(fs, cfg)
    if gamma is None or not nonnegativity_certificate(fs, gamma):
        return None
    return Multipliers(gamma[1:], gamma0=gamma[0])


def find_strict_point(fs: Sequence[ScalarQuadratic], cfg: SearchConfig = SearchConfig()) -> Optional[np.ndarray]:
    """A point where every f_k is strictly negative (verified by evaluation), or None."""
    out = minimize_max(fs, fs[0].n, cfg)
    if out.value <= -cfg.strict_margin and max(evaluate(f, out.point) for f in fs) < 0:
        return out.point
    return None


def alternative(fs: Sequence[ScalarQuadratic], cfg: SearchConfig = SearchConfig()) -> AlternativeVerdict:
    """Run both searches and report which statement of the alternative holds."""
    n = fs[0].n
    out = minimize_max(fs, n, cfg)
    strict = None
    if out.value <= -cfg.strict_margin and max(evaluate(f, out.point) for f in fs) < 0:
        strict = out.point
    gamma, margin, budget = best_margin(fs, cfg)
    mult = None
    if gamma is not None and nonnegativity_certificate(fs, gamma):
        mult = Multipliers(gamma[1:], gamma0=gamma[0])
    budget.update(samples=out.samples, local_runs=out.local_runs)
    rank_ok = linear_rank([f.b for f in fs], n) < n

    if strict is not None and mult is not None:
        raise InternalContradiction(
            f"strict point {strict.tolist()} and multiplier {gamma.tolist()} both verified "
            f"(rank condition {'holds' if rank_ok else 'fails'})",
            strict_point=strict,
            multiplier=mult,
        )
    if strict is not None:
        return AlternativeVerdict(Outcome.STRICT_POINT_FOUND, strict_point=strict, budget_used=budget,
                                  rank_condition=rank_ok, best_max_value=out.value)
    if mult is not None:
        return AlternativeVerdict(Outcome.MULTIPLIER_FOUND, multiplier=mult, budget_used=budget,
                                  rank_condition=rank_ok, best_max_value=out.value, margin=margin)
    return AlternativeVerdict(Outcome.UNDECIDED, budget_used=budget, rank_condition=rank_ok,
                              best_max_value=out.value)
