"""Global solver for scalar QCQP through its Lagrangian dual.

For fixed gamma >= 0 the Lagrangian is the scalar quadratic
a(gamma)|x|^2 + 2<b(gamma), x> + c(gamma), so the dual function has the closed
form c - |b|^2/a when a > 0.  ``solve`` maximizes it by projected supergradient
ascent from several starts, polishes the best iterates with a projected Newton
method, adds the exact maximizer over the flat set a = 0, b = 0, recovers a
primal point and certifies it with the KKT check.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import DualDivergence, NoConvergence
from .kkt import CheckReport, check_kkt
from .model import (
    Certificate,
    Multipliers,
    Problem,
    ToleranceSet,
    Verdict,
    aggregate,
    evaluate,
)
from .search import SearchConfig
from .search import find_strict_point as _find_strict_point
from .slemma import best_margin, flat_combination


class DualStatus(str, enum.Enum):
    ATTAINED = "Attained"
    UNBOUNDED_BELOW = "UnboundedBelow"
    FLAT_ATTAINED = "FlatAttained"


@dataclass(frozen=True)
class DualEvaluation:
    value: float
    minimizer: Optional[np.ndarray]
    status: DualStatus


def dual_value(p: Problem, gamma) -> DualEvaluation:
    """Infimum over x of the Lagrangian at ``gamma``, with the minimizer when it is unique."""
    m = gamma if isinstance(gamma, Multipliers) else Multipliers(gamma)
    if m.fritz_john:
        raise ValueError("dual_value takes multipliers without gamma0")
    agg = aggregate(p, m)
    if agg.a > 0:
        return DualEvaluation(agg.c - float(agg.b @ agg.b) / agg.a, -agg.b / agg.a, DualStatus.ATTAINED)
    if agg.a == 0 and not np.any(agg.b):
        return DualEvaluation(agg.c, np.zeros(p.n), DualStatus.FLAT_ATTAINED)
    return DualEvaluation(-math.inf, None, DualStatus.UNBOUNDED_BELOW)


@dataclass(frozen=True)
class SolveConfig:
    gap: float = 1e-6
    restarts: int = 10
    iterations: int = 5000
    step: float = 1.0
    seed: int = 0
    box: float = 10.0
    tolerances: ToleranceSet = ToleranceSet()
    newton_iterations: int = 200
    recovery_attempts: int = 64
    gamma_limit: float = 1e8


@dataclass(frozen=True)
class Solution:
    multipliers: Multipliers
    point: np.ndarray
    certificate: Certificate
    value: float
    dual_value: float
    status: DualStatus
    slater_point: Optional[np.ndarray] = None

    def __iter__(self):
        return iter((self.multipliers, self.point, self.certificate))


def find_slater_point(p: Problem, cfg: SearchConfig = SearchConfig()) -> Optional[np.ndarray]:
    """A point with every constraint strictly negative, or None after the search budget."""
    x0 = _find_strict_point(p.constraints, p.n, cfg)
    if x0 is not None and max(evaluate(f, x0) for f in p.constraints) < 0:
        return x0
    return None


class _BatchDual:
    """Dual values and supergradients for many gamma vectors at once."""

    def __init__(self, p: Problem):
        self.aJ = p.objective.a
        self.bJ = p.objective.b
        self.cJ = p.objective.c
        self.alpha = p.curvatures
        self.B = p.linear_terms
        self.cv = p.constants

    def coefficients(self, G):
        return self.aJ + G @ self.alpha, self.bJ + G @ self.B, self.cJ + G @ self.cv

    def value(self, gamma) -> float:
        a, b, c = self.coefficients(gamma[None, :])
        return float(self._values(a, b, c)[0])

    @staticmethod
    def _values(a, b, c):
        bsq = np.einsum("ij,ij->i", b, b)
        out = np.full(a.shape, -np.inf)
        pos = a > 0
        out[pos] = c[pos] - bsq[pos] / a[pos]
        flat = (a == 0) & ~np.any(b != 0, axis=1)
        out[flat] = c[flat]
        return out

    def constraint_values(self, X):
        sq = np.einsum("ij,ij->i", X, X)
        return sq[:, None] * self.alpha[None, :] + 2.0 * X @ self.B.T + self.cv[None, :]

    def step(self, G):
        """Dual values at the rows of G and one supergradient-like direction per row."""
        a = self.aJ + G @ self.alpha
        b = self.bJ + G @ self.B
        c = self.cJ + G @ self.cv
        bsq = np.einsum("ij,ij->i", b, b)
        pos = a > 0
        flat = (a == 0) & (bsq == 0)
        inv = np.where(pos, 1.0 / np.where(pos, a, 1.0), 0.0)
        vals = np.where(pos, c - bsq * inv, np.where(flat, c, -np.inf))
        # f_k(x(gamma)) with x(gamma) = -b/a; flat rows (inv = 0) get exactly cv
        S = np.outer(bsq * inv * inv, self.alpha) - 2.0 * inv[:, None] * (b @ self.B.T) + self.cv
        bad = ~(pos | flat)
        if bad.any():
            # outside the dual domain: head back towards a(gamma) > 0
            if np.any(self.alpha != 0):
                S[bad] = self.alpha
            else:
                S[bad] = -(b[bad] @ self.B.T)
        return vals, S


STAGNATION_WINDOW = 500


def _ascent(dual: _BatchDual, m: int, cfg: SolveConfig):
    rng = np.random.default_rng(cfg.seed)
    G = rng.uniform(0.0, 2.0, size=(cfg.restarts, m))
    G[0] = 0.0
    best_val = np.full(cfg.restarts, -np.inf)
    best_G = G.copy()
    checkpoint = best_val.copy()
    for t in range(1, cfg.iterations + 1):
        vals, S = dual.step(G)
        better = vals > best_val
        best_val[better] = vals[better]
        best_G[better] = G[better]
        if t % STAGNATION_WINDOW == 0:
            # stop once no restart improved noticeably; the Newton polish finishes the job
            finite = np.isfinite(best_val)
            gain = np.full_like(best_val, np.inf)
            seen = np.isfinite(checkpoint)
            gain[seen] = best_val[seen] - checkpoint[seen]
            if finite.any() and np.all(gain[finite] <= 1e-9 * (1.0 + np.abs(best_val[finite]))):
                break
            checkpoint = best_val.copy()
        norms = np.sqrt(np.einsum("ij,ij->i", S, S))
        scale = np.where(norms > 0, (cfg.step / math.sqrt(t)) / np.where(norms > 0, norms, 1.0), 0.0)
        G = np.maximum(0.0, G + scale[:, None] * S)
    return best_val, best_G


def _projected_gradient(dual: _BatchDual, gamma: np.ndarray) -> float:
    a, b, _ = dual.coefficients(gamma[None, :])
    if a[0] <= 0:
        return math.inf
    grad = dual.constraint_values((-b[0] / a[0])[None, :])[0]
    return float(np.max(np.abs(np.where(gamma > 0, grad, np.maximum(grad, 0.0))), initial=0.0))


def _polish(dual: _BatchDual, gamma: np.ndarray, cfg: SolveConfig):
    """Projected Newton ascent on the smooth part of the dual.

    Close to the maximum the value stops changing in floating point, so a step
    that leaves the value flat to roundoff but shrinks the projected gradient
    is accepted as well.
    """
    gamma = gamma.copy()
    val = dual.value(gamma)
    if not np.isfinite(val):
        return gamma, val
    pg = _projected_gradient(dual, gamma)
    for _ in range(cfg.newton_iterations):
        a, b, _ = dual.coefficients(gamma[None, :])
        a, b = float(a[0]), b[0]
        if a <= 0:
            break
        x = -b / a
        grad = dual.constraint_values(x[None, :])[0]
        rows = dual.B + dual.alpha[:, None] * x[None, :]
        H = -(2.0 / a) * rows @ rows.T
        free = (gamma > 0) | (grad > 0)
        if not free.any() or pg == 0.0:
            break
        direction = np.zeros_like(gamma)
        sol, *_ = np.linalg.lstsq(-H[np.ix_(free, free)], grad[free], rcond=None)
        direction[free] = sol
        if not np.all(np.isfinite(direction)) or direction @ grad <= 0:
            direction = np.where(free, grad, 0.0)
        flat_tol = 4.0 * np.finfo(float).eps * (1.0 + abs(val))
        accepted = False
        for d in (direction, np.where(free, grad, 0.0)):
            s = 1.0
            for _ in range(60):
                trial = np.maximum(0.0, gamma + s * d)
                tv = dual.value(trial)
                if tv > val or (tv >= val - flat_tol and _projected_gradient(dual, trial) < pg):
                    gamma, val, accepted = trial, max(val, tv), True
                    break
                s *= 0.5
            if accepted:
                break
        if not accepted:
            break
        pg = _projected_gradient(dual, gamma)
        if np.abs(gamma).max() > cfg.gamma_limit:
            raise DualDivergence(
                f"multipliers exceed {cfg.gamma_limit:g} while the dual keeps increasing; "
                "the constraints look infeasible"
            )
    return gamma, dual.value(gamma)


def _quadratic_roots(A: float, half_B: float, C: float):
    """Real roots of A t^2 + 2 half_B t + C = 0 (cancellation-free)."""
    if A == 0:
        return [] if half_B == 0 else [-C / (2.0 * half_B)]
    disc = half_B * half_B - A * C
    if disc < 0:
        return []
    q = -(half_B + math.copysign(math.sqrt(disc), half_B))
    if q == 0:
        return [0.0]
    return [q / A, C / q]


def _gauss_newton(fs, x, iterations=50):
    for _ in range(iterations):
        F = np.array([evaluate(f, x) for f in fs])
        if np.max(np.abs(F)) <= 1e-15 * (1.0 + float(x @ x)):
            break
        J = np.array([2.0 * f.a * x + 2.0 * f.b for f in fs])
        dx, *_ = np.linalg.lstsq(J, -F, rcond=None)
        x = x + dx
    return x


def _recover_flat(p: Problem, gamma: np.ndarray, base: Optional[np.ndarray], cfg: SolveConfig):
    """Feasible x with f_k(x) = 0 wherever gamma_k > 0, by root-finding along random rays."""
    tol = cfg.tolerances
    active = [k for k in range(p.m) if gamma[k] > 0]
    x0 = np.zeros(p.n) if base is None else np.asarray(base, dtype=float)

    def acceptable(x):
        fv = np.array([evaluate(f, x) for f in p.constraints])
        return np.max(fv) <= tol.feasibility and np.max(np.abs(gamma * fv)) <= tol.complementarity

    if not active:
        return x0 if acceptable(x0) else None
    rng = np.random.default_rng(cfg.seed)
    fs = [p.constraints[k] for k in active]
    for _ in range(cfg.recovery_attempts):
        d = rng.standard_normal(p.n)
        d /= np.linalg.norm(d)
        hits = []
        for f in fs:
            roots = _quadratic_roots(f.a, f.a * float(x0 @ d) + float(f.b @ d), evaluate(f, x0))
            hits.extend(t for t in roots if t > 0)
        if not hits:
            continue
        x = x0 + min(hits) * d
        if len(fs) > 1:
            x = _gauss_newton(fs, x)
        if acceptable(x):
            return x
    return None


def _certificate(report: CheckReport, x, mult, tol, notes=()) -> Certificate:
    return Certificate(
        point=np.asarray(x),
        multipliers=mult,
        stationarity_residual=report.stationarity_residual,
        complementarity_residual=report.complementarity_residual,
        feasibility_residual=report.feasibility_residual,
        aggregated_curvature=report.curvature_margin,
        verdict=report.verdict,
        tolerances=tol,
        notes=report.notes + tuple(notes),
    )


def solve(p: Problem, cfg: SolveConfig = SolveConfig()) -> Solution:
    """Globally solve a scalar QCQP and certify the answer.

    Raises ``DualDivergence`` when no gamma >= 0 gives nonnegative aggregated
    curvature or the problem is detected infeasible, and ``NoConvergence``
    (carrying the best candidate) when no candidate passes the certificate.
    """
    if p.objective.a < 0 and not np.any(p.curvatures > 0):
        raise DualDivergence(
            "no gamma >= 0 makes the aggregated curvature nonnegative; the dual is -inf everywhere"
        )
    gamma_pos, margin, _ = best_margin(p.constraints, SearchConfig(seed=cfg.seed))
    if gamma_pos is not None and margin > 0:
        raise DualDivergence(
            f"the combination {gamma_pos.tolist()} of constraints is bounded below by {margin!r} > 0; "
            "the feasible set is empty and the dual is unbounded above"
        )

    dual = _BatchDual(p)
    search = SearchConfig(box=cfg.box, seed=cfg.seed)
    slater = find_slater_point(p, search)

    candidates = []
    best_val, best_G = _ascent(dual, p.m, cfg)
    for r in np.argsort(-best_val, kind="stable"):
        if np.isfinite(best_val[r]):
            g, v = _polish(dual, best_G[r], cfg)
            candidates.append((v, g))
    try:
        flat = flat_combination(dual.alpha, dual.B, dual.cv, dual.aJ, dual.bJ, dual.cJ, simplex=False)
    except OverflowError:
        raise DualDivergence("the dual is unbounded above along its flat set; the problem is infeasible")
    if flat is not None:
        candidates.append((dual.cJ + float(dual.cv @ flat), flat))
    candidates.sort(key=lambda t: -t[0])

    tol = cfg.tolerances
    best_failure = None
    for value, gamma in candidates:
        if not np.isfinite(value):
            continue
        mult = Multipliers(gamma)
        agg = aggregate(p, mult)
        scale = 1.0 + abs(dual.aJ) + float(gamma @ np.abs(dual.alpha)) + float(np.abs(agg.b).max(initial=0.0))
        if abs(agg.a) <= 1e-12 * scale and np.max(np.abs(agg.b)) <= 1e-12 * scale:
            status = DualStatus.FLAT_ATTAINED
            x = _recover_flat(p, gamma, slater, cfg)
            if x is None:
                continue
        elif agg.a > 0:
            status = DualStatus.ATTAINED
            x = -agg.b / agg.a
        else:
            continue
        report = check_kkt(p, x, mult, tol, slater_point=slater, discover=False)
        primal = evaluate(p.objective, x)
        gap = abs(primal - value)
        notes = (f"duality gap {gap!r}",)
        cert = _certificate(report, x, mult, tol, notes)
        sol = Solution(mult, np.asarray(x), cert, primal, value, status, slater)
        if report.verdict in (Verdict.GLOBALLY_OPTIMAL, Verdict.CONDITIONALLY_OPTIMAL) and gap <= cfg.gap:
            return sol
        if best_failure is None:
            best_failure = replace(sol, certificate=replace(cert, verdict=Verdict.REJECTED))
    if not any(np.isfinite(v) for v, _ in candidates):
        raise NoConvergence("the dual stayed at -inf on every restart; the objective may be unbounded below "
                            "on the feasible set")
    raise NoConvergence(
        f"no dual candidate produced a certified primal point within gap {cfg.gap:g}",
        best=best_failure,
    )
