"""Core types for scalar QCQP: quadratics a*|x|^2 + 2<b, x> + c and their aggregates."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .errors import (
    AllZeroMultipliers,
    DimensionError,
    NegativeMultiplier,
    NonFiniteEntry,
)


def as_vector(x, n: Optional[int] = None, name: str = "x") -> np.ndarray:
    """Return a read-only float64 copy of ``x`` after shape and finiteness checks."""
    arr = np.array(x, dtype=float)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise DimensionError(f"{name} has length {arr.shape[0]}, expected {n}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteEntry(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


def _finite_scalar(value, name: str) -> float:
    value = float(value)
    if not np.isfinite(value):
        raise NonFiniteEntry(f"{name} is not finite")
    return value


@dataclass(frozen=True, eq=False)
class ScalarQuadratic:
    """The functional f(x) = a*|x|^2 + 2<b, x> + c."""

    a: float
    b: np.ndarray
    c: float

    def __post_init__(self):
        object.__setattr__(self, "a", _finite_scalar(self.a, "a"))
        object.__setattr__(self, "c", _finite_scalar(self.c, "c"))
        object.__setattr__(self, "b", as_vector(self.b, name="b"))

    @property
    def n(self) -> int:
        return self.b.shape[0]

    def __call__(self, x) -> float:
        return evaluate(self, x)

    def __eq__(self, other):
        if not isinstance(other, ScalarQuadratic):
            return NotImplemented
        return self.a == other.a and self.c == other.c and np.array_equal(self.b, other.b)

    def __hash__(self):
        return hash((self.a, self.c, self.b.tobytes()))

    def __repr__(self):
        return f"ScalarQuadratic(a={self.a!r}, b={self.b.tolist()!r}, c={self.c!r})"


@dataclass(frozen=True)
class Problem:
    """Minimize ``objective`` subject to ``constraint(x) <= 0`` for every constraint."""

    n: int
    objective: ScalarQuadratic
    constraints: tuple

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if int(self.n) != self.n or self.n < 1:
            raise DimensionError(f"dimension must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if not self.constraints:
            raise DimensionError("a problem needs at least one constraint")
        if self.objective.n != self.n:
            raise DimensionError(f"objective b has length {self.objective.n}, expected {self.n}")
        for k, f in enumerate(self.constraints):
            if f.n != self.n:
                raise DimensionError(f"constraint {k} b has length {f.n}, expected {self.n}")

    @property
    def m(self) -> int:
        return len(self.constraints)

    @property
    def functionals(self) -> tuple:
        """Objective followed by the constraints."""
        return (self.objective,) + self.constraints

    # Stacked constraint data for vectorized dual evaluation.
    @cached_property
    def curvatures(self) -> np.ndarray:
        return np.array([f.a for f in self.constraints])

    @cached_property
    def linear_terms(self) -> np.ndarray:
        return np.vstack([f.b for f in self.constraints])

    @cached_property
    def constants(self) -> np.ndarray:
        return np.array([f.c for f in self.constraints])


@dataclass(frozen=True, eq=False)
class Multipliers:
    """Nonnegative weights on the constraints, plus ``gamma0`` on the objective in Fritz-John form."""

    gamma: np.ndarray
    gamma0: Optional[float] = None

    def __post_init__(self):
        gamma = np.array(self.gamma, dtype=float, copy=True).reshape(-1)
        if not np.all(np.isfinite(gamma)):
            raise NonFiniteEntry("multipliers must be finite")
        if np.any(gamma < 0):
            raise NegativeMultiplier(f"negative multiplier in {gamma.tolist()}")
        gamma.setflags(write=False)
        object.__setattr__(self, "gamma", gamma)
        if self.gamma0 is not None:
            g0 = _finite_scalar(self.gamma0, "gamma0")
            if g0 < 0:
                raise NegativeMultiplier(f"gamma0 = {g0} is negative")
            if g0 == 0 and not np.any(gamma > 0):
                raise AllZeroMultipliers("Fritz-John multipliers are all zero")
            object.__setattr__(self, "gamma0", g0)

    @property
    def fritz_john(self) -> bool:
        return self.gamma0 is not None

    @property
    def weight(self) -> float:
        """Weight on the objective: gamma0 in Fritz-John form, else 1."""
        return 1.0 if self.gamma0 is None else self.gamma0

    def __eq__(self, other):
        if not isinstance(other, Multipliers):
            return NotImplemented
        return self.gamma0 == other.gamma0 and np.array_equal(self.gamma, other.gamma)

    def __hash__(self):
        return hash((self.gamma0, self.gamma.tobytes()))

    def __repr__(self):
        if self.gamma0 is None:
            return f"Multipliers(gamma={self.gamma.tolist()!r})"
        return f"Multipliers(gamma={self.gamma.tolist()!r}, gamma0={self.gamma0!r})"


class Verdict(str, enum.Enum):
    GLOBALLY_OPTIMAL = "GloballyOptimal"
    CONDITIONALLY_OPTIMAL = "ConditionallyOptimal"
    FRITZ_JOHN_ONLY = "FritzJohnOnly"
    REJECTED = "Rejected"


@dataclass(frozen=True)
class ToleranceSet:
    stationarity: float = 1e-8
    complementarity: float = 1e-8
    feasibility: float = 1e-8
    curvature: float = 1e-10

    @classmethod
    def uniform(cls, tol: float) -> "ToleranceSet":
        return cls(tol, tol, tol, tol)


@dataclass(frozen=True)
class Certificate:
    point: np.ndarray
    multipliers: Multipliers
    stationarity_residual: float
    complementarity_residual: float
    feasibility_residual: float
    aggregated_curvature: float
    verdict: Verdict
    tolerances: ToleranceSet = field(default_factory=ToleranceSet)
    notes: tuple = ()


def _check_dim(q: ScalarQuadratic, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != q.b.shape:
        raise DimensionError(f"point has shape {x.shape}, quadratic expects {q.b.shape}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteEntry("point contains non-finite entries")
    return x


def evaluate(q: ScalarQuadratic, x) -> float:
    """Value of ``a*|x|^2 + 2<b, x> + c`` at ``x``."""
    x = _check_dim(q, x)
    return float(q.a * (x @ x) + 2.0 * (q.b @ x) + q.c)


def gradient(q: ScalarQuadratic, x) -> np.ndarray:
    x = _check_dim(q, x)
    return 2.0 * q.a * x + 2.0 * q.b


def combine(fs: Sequence[ScalarQuadratic], weights) -> ScalarQuadratic:
    """Weighted sum of quadratics, coefficient by coefficient."""
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (len(fs),):
        raise DimensionError(f"{weights.shape[0] if weights.ndim else 0} weights for {len(fs)} functionals")
    a = float(sum(w * f.a for w, f in zip(weights, fs)))
    b = np.sum([w * f.b for w, f in zip(weights, fs)], axis=0)
    c = float(sum(w * f.c for w, f in zip(weights, fs)))
    return ScalarQuadratic(a, b, c)


def aggregate(p: Problem, m: Multipliers) -> ScalarQuadratic:
    """Lagrangian coefficients: objective weighted by gamma0 (1 if absent) plus sum of gamma_k f_k."""
    if m.gamma.shape[0] != p.m:
        raise DimensionError(f"{m.gamma.shape[0]} multipliers for {p.m} constraints")
    w = m.weight
    a = w * p.objective.a + float(m.gamma @ p.curvatures)
    b = w * p.objective.b + m.gamma @ p.linear_terms
    c = w * p.objective.c + float(m.gamma @ p.constants)
    return ScalarQuadratic(a, b, c)


def shift_objective(p: Problem, optimal_value: float) -> ScalarQuadratic:
    """The objective minus ``optimal_value``; only the constant term changes."""
    q = p.objective
    return ScalarQuadratic(q.a, q.b, q.c - optimal_value)


def infimum(q: ScalarQuadratic) -> float:
    """Exact infimum of ``q`` over the whole space (may be ``-inf``)."""
    if q.a > 0:
        return q.c - float(q.b @ q.b) / q.a
    if q.a == 0 and not np.any(q.b):
        return q.c
    return -np.inf
