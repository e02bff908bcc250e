"""JSON problem files and deterministic JSON/CSV output.

A problem file looks like::

    {"version": 1, "n": 2,
     "objective": {"a": 1, "b": [-2, 0], "c": 4},
     "constraints": [{"a": 1, "b": [0, 0], "c": -1}],
     "candidate": {"x": [1, 0], "gamma": [1]}}

With ``"matrix_mode": true`` every quadratic carries an n-by-n ``"A"`` instead of ``"a"``.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import ParseError, ValidationError
from .kkt import MatrixQuadratic
from .model import Problem, ScalarQuadratic

SCHEMA_VERSION = 1
SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class Candidate:
    x: np.ndarray
    gamma: np.ndarray
    gamma0: Optional[float] = None


@dataclass(frozen=True)
class MatrixProblem:
    n: int
    objective: MatrixQuadratic
    constraints: tuple

    @property
    def m(self) -> int:
        return len(self.constraints)


@dataclass(frozen=True)
class ProblemFile:
    problem: Union[Problem, MatrixProblem]
    candidate: Optional[Candidate] = None

    @property
    def matrix_mode(self) -> bool:
        return isinstance(self.problem, MatrixProblem)


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


class _Validator:
    def __init__(self):
        self.problems = []

    def number(self, obj, key, where):
        if key not in obj:
            self.problems.append(f"{where}: missing field {key!r}")
            return None
        v = obj[key]
        if not _is_number(v) or not math.isfinite(v):
            self.problems.append(f"{where}.{key}: expected a finite number, got {v!r}")
            return None
        return float(v)

    def vector(self, obj, key, n, where):
        if key not in obj:
            self.problems.append(f"{where}: missing field {key!r}")
            return None
        v = obj[key]
        if not isinstance(v, list):
            self.problems.append(f"{where}.{key}: expected an array, got {v!r}")
            return None
        ok = True
        if n is not None and len(v) != n:
            self.problems.append(f"{where}.{key}: length {len(v)} does not match n = {n}")
            ok = False
        bad = [i for i, e in enumerate(v) if not _is_number(e) or not math.isfinite(e)]
        if bad:
            self.problems.append(f"{where}.{key}: non-finite or non-numeric entries at {bad}")
            ok = False
        return np.array(v, dtype=float) if ok else None

    def matrix(self, obj, key, n, where):
        if key not in obj:
            self.problems.append(f"{where}: missing field {key!r}")
            return None
        rows = obj[key]
        if not isinstance(rows, list) or len(rows) != n or not all(isinstance(r, list) and len(r) == n for r in rows):
            self.problems.append(f"{where}.{key}: expected an {n}x{n} array")
            return None
        if not all(_is_number(e) and math.isfinite(e) for r in rows for e in r):
            self.problems.append(f"{where}.{key}: non-finite or non-numeric entries")
            return None
        A = np.array(rows, dtype=float)
        asym = float(np.abs(A - A.T).max())
        if asym > SYMMETRY_TOL:
            self.problems.append(f"{where}.{key}: not symmetric (max asymmetry {asym:g})")
            return None
        return A

    def quadratic(self, obj, n, where, matrix_mode):
        if not isinstance(obj, dict):
            self.problems.append(f"{where}: expected an object")
            return None
        curv = self.matrix(obj, "A", n, where) if matrix_mode else self.number(obj, "a", where)
        b = self.vector(obj, "b", n, where)
        c = self.number(obj, "c", where)
        if curv is None or b is None or c is None:
            return None
        return MatrixQuadratic(curv, b, c) if matrix_mode else ScalarQuadratic(curv, b, c)


def parse_problem(text: str) -> ProblemFile:
    """Parse and validate a problem file; every violated invariant is reported at once."""
    try:
        data = json.loads(text, parse_constant=lambda name: {"NaN": math.nan}.get(name, math.inf))
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from None
    if not isinstance(data, dict):
        raise ParseError("top level must be a JSON object", line=1, column=1)

    v = _Validator()
    if data.get("version") != SCHEMA_VERSION:
        v.problems.append(f"version: expected {SCHEMA_VERSION}, got {data.get('version')!r}")
    n = data.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        v.problems.append(f"n: expected a positive integer, got {n!r}")
        n = None
    matrix_mode = data.get("matrix_mode", False)
    if not isinstance(matrix_mode, bool):
        v.problems.append(f"matrix_mode: expected true or false, got {matrix_mode!r}")
        matrix_mode = False
    if n is None:
        raise ValidationError(v.problems)

    objective = v.quadratic(data.get("objective"), n, "objective", matrix_mode)
    raw = data.get("constraints")
    constraints = []
    if not isinstance(raw, list) or not raw:
        v.problems.append("constraints: expected a non-empty array")
    else:
        for k, item in enumerate(raw):
            constraints.append(v.quadratic(item, n, f"constraints[{k}]", matrix_mode))

    candidate = None
    if "candidate" in data:
        cand = data["candidate"]
        if not isinstance(cand, dict):
            v.problems.append("candidate: expected an object")
        else:
            x = v.vector(cand, "x", n, "candidate")
            gamma = v.vector(cand, "gamma", len(constraints) or None, "candidate")
            if gamma is not None and np.any(gamma < 0):
                v.problems.append("candidate.gamma: multipliers must be nonnegative")
                gamma = None
            gamma0 = None
            if "gamma0" in cand:
                gamma0 = v.number(cand, "gamma0", "candidate")
                if gamma0 is not None and gamma0 < 0:
                    v.problems.append("candidate.gamma0: must be nonnegative")
            if x is not None and gamma is not None:
                candidate = Candidate(x, gamma, gamma0)

    if v.problems:
        raise ValidationError(v.problems)
    if matrix_mode:
        problem = MatrixProblem(n, objective, tuple(constraints))
    else:
        problem = Problem(n, objective, constraints)
    return ProblemFile(problem, candidate)


def _quadratic_dict(f):
    if isinstance(f, MatrixQuadratic):
        return {"A": f.A.tolist(), "b": f.b.tolist(), "c": f.c}
    return {"a": f.a, "b": f.b.tolist(), "c": f.c}


def problem_to_dict(pf) -> dict:
    if isinstance(pf, (Problem, MatrixProblem)):
        pf = ProblemFile(pf)
    p = pf.problem
    out = {"version": SCHEMA_VERSION, "n": p.n}
    if pf.matrix_mode:
        out["matrix_mode"] = True
    out["objective"] = _quadratic_dict(p.objective)
    out["constraints"] = [_quadratic_dict(f) for f in p.constraints]
    if pf.candidate is not None:
        cand = {"x": pf.candidate.x.tolist(), "gamma": pf.candidate.gamma.tolist()}
        if pf.candidate.gamma0 is not None:
            cand["gamma0"] = pf.candidate.gamma0
        out["candidate"] = cand
    return out


def format_float(v: float) -> str:
    """17 significant digits; non-finite values become null."""
    v = float(v)
    if not math.isfinite(v):
        return "null"
    s = format(v + 0.0, ".17g")
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float printed at 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, enum.Enum):
        return dumps(obj.value, indent, _level)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(e, (dict, list, tuple, np.ndarray)) for e in obj):
            return "[" + ", ".join(dumps(e, indent, _level + 1) for e in obj) + "]"
        items = [pad + dumps(e, indent, _level + 1) for e in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dump_problem(pf) -> str:
    return dumps(problem_to_dict(pf)) + "\n"


def write_csv(path, rows: np.ndarray) -> None:
    """Point cloud as CSV with header f0,...,fm."""
    rows = np.atleast_2d(rows)
    header = ",".join(f"f{k}" for k in range(rows.shape[1]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(format(float(v) + 0.0, ".17g") for v in row) + "\n")
