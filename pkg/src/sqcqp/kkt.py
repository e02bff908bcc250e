"""KKT and Fritz-John certificate checks for candidate global minimizers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionError, NonFiniteEntry
from .model import (
    Multipliers,
    Problem,
    ToleranceSet,
    Verdict,
    aggregate,
    as_vector,
    evaluate,
    gradient,
)
from .search import SearchConfig, find_strict_point

MATRIX_NOTE = "convexity of the generalized image set assumed, not verified"
NO_SLATER_NOTE = "no Slater point supplied or found; sufficiency is conditional on one existing"


@dataclass(frozen=True, eq=False)
class MatrixQuadratic:
    """f(x) = <x, A x> + 2<b, x> + c with A symmetrized on construction."""

    A: np.ndarray
    b: np.ndarray
    c: float

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        b = np.array(self.b, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DimensionError(f"A must be square, got shape {A.shape}")
        if b.shape != (A.shape[0],):
            raise DimensionError(f"b has shape {b.shape}, expected ({A.shape[0]},)")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.isfinite(self.c)):
            raise NonFiniteEntry("matrix quadratic has non-finite entries")
        A = 0.5 * (A + A.T)
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", float(self.c))

    @property
    def n(self) -> int:
        return self.b.shape[0]

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(x @ self.A @ x + 2.0 * (self.b @ x) + self.c)

    def gradient(self, x) -> np.ndarray:
        return 2.0 * self.A @ np.asarray(x, dtype=float) + 2.0 * self.b


@dataclass(frozen=True)
class CheckReport:
    stationarity_residual: float
    complementarity_residual: float
    feasibility_residual: float
    curvature_margin: float
    verdict: Verdict
    slater_point: Optional[np.ndarray] = None
    notes: tuple = ()

    def passes(self, tol: ToleranceSet) -> bool:
        return (
            self.stationarity_residual <= tol.stationarity
            and self.complementarity_residual <= tol.complementarity
            and self.feasibility_residual <= tol.feasibility
            and self.curvature_margin >= -tol.curvature
        )


def _residuals(grad, fvals, gamma):
    stationarity = float(np.max(np.abs(grad), initial=0.0))
    complementarity = float(np.max(np.abs(gamma * fvals), initial=0.0))
    feasibility = float(np.max(np.maximum(fvals, 0.0), initial=0.0))
    return stationarity, complementarity, feasibility


def _slater(constraints, n, slater_point, search, discover):
    if slater_point is not None:
        x0 = as_vector(slater_point, n, "slater_point")
        if max(f(x0) for f in constraints) < 0:
            return x0
        return None
    if not discover:
        return None
    return find_strict_point(constraints, n, search)


def _finish(stationarity, complementarity, feasibility, curvature, tol, constraints, n,
            slater_point, search, discover=True, notes=()):
    report = CheckReport(stationarity, complementarity, feasibility, curvature, Verdict.REJECTED, None, tuple(notes))
    if not report.passes(tol):
        return report
    x0 = _slater(constraints, n, slater_point, search, discover)
    if x0 is None:
        return CheckReport(stationarity, complementarity, feasibility, curvature,
                           Verdict.CONDITIONALLY_OPTIMAL, None, tuple(notes) + (NO_SLATER_NOTE,))
    return CheckReport(stationarity, complementarity, feasibility, curvature,
                       Verdict.GLOBALLY_OPTIMAL, x0, tuple(notes))


def check_kkt(
    p: Problem,
    x,
    m: Multipliers,
    tol: ToleranceSet = ToleranceSet(),
    slater_point=None,
    search: SearchConfig = SearchConfig(),
    discover: bool = True,
) -> CheckReport:
    """Check stationarity, complementarity, feasibility and aggregated curvature at ``x``.

    A passing check is a global-optimality certificate once a Slater point is
    known; without one the verdict is ``ConditionallyOptimal``.  When no
    ``slater_point`` is given one is searched for unless ``discover`` is False.
    """
    if m.fritz_john:
        raise ValueError("check_kkt takes multipliers without gamma0; use check_fritz_john")
    x = as_vector(x, p.n)
    agg = aggregate(p, m)
    fvals = np.array([evaluate(f, x) for f in p.constraints])
    stat, comp, feas = _residuals(gradient(agg, x), fvals, m.gamma)
    return _finish(stat, comp, feas, agg.a, tol, p.constraints, p.n, slater_point, search, discover)


def check_fritz_john(
    p: Problem,
    x,
    m: Multipliers,
    tol: ToleranceSet = ToleranceSet(),
    slater_point=None,
    search: SearchConfig = SearchConfig(),
) -> CheckReport:
    """Fritz-John check.  With gamma0 > 0 the multipliers are rescaled to gamma0 = 1
    and the KKT check decides; with gamma0 = 0 a passing check is ``FritzJohnOnly``."""
    if not m.fritz_john:
        raise ValueError("check_fritz_john needs gamma0")
    if m.gamma0 > 0:
        report = check_kkt(p, x, Multipliers(m.gamma / m.gamma0), tol, slater_point, search)
        return CheckReport(
            report.stationarity_residual,
            report.complementarity_residual,
            report.feasibility_residual,
            report.curvature_margin,
            report.verdict,
            report.slater_point,
            report.notes + (f"multipliers rescaled by 1/gamma0 = {1.0 / m.gamma0!r}",),
        )
    x = as_vector(x, p.n)
    agg = aggregate(p, m)
    fvals = np.array([evaluate(f, x) for f in p.constraints])
    stat, comp, feas = _residuals(gradient(agg, x), fvals, m.gamma)
    report = CheckReport(stat, comp, feas, agg.a, Verdict.REJECTED)
    if report.passes(tol):
        return CheckReport(stat, comp, feas, agg.a, Verdict.FRITZ_JOHN_ONLY,
                           notes=("gamma0 = 0: the certificate does not involve the objective",))
    return report


def check_kkt_general(
    A_J,
    b_J,
    c_J: float,
    constraints: Sequence,
    x,
    m: Multipliers,
    tol: ToleranceSet = ToleranceSet(),
    slater_point=None,
    search: SearchConfig = SearchConfig(),
) -> CheckReport:
    """KKT check with dense symmetric matrices; curvature is the smallest eigenvalue of A(gamma).

    ``constraints`` holds ``(A_k, b_k, c_k)`` triples or ``MatrixQuadratic`` objects.
    """
    objective = MatrixQuadratic(A_J, b_J, c_J)
    cons = [f if isinstance(f, MatrixQuadratic) else MatrixQuadratic(*f) for f in constraints]
    n = objective.n
    for k, f in enumerate(cons):
        if f.n != n:
            raise DimensionError(f"constraint {k} has dimension {f.n}, expected {n}")
    if m.gamma.shape[0] != len(cons):
        raise DimensionError(f"{m.gamma.shape[0]} multipliers for {len(cons)} constraints")
    x = as_vector(x, n)
    w = m.weight
    A = w * objective.A + sum((g * f.A for g, f in zip(m.gamma, cons)), np.zeros((n, n)))
    b = w * objective.b + sum((g * f.b for g, f in zip(m.gamma, cons)), np.zeros(n))
    fvals = np.array([f(x) for f in cons])
    stat, comp, feas = _residuals(2.0 * A @ x + 2.0 * b, fvals, m.gamma)
    curvature = float(np.linalg.eigvalsh(A)[0])
    return _finish(stat, comp, feas, curvature, tol, cons, n, slater_point, search, notes=(MATRIX_NOTE,))
