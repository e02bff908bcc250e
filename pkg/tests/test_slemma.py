import numpy as np
import pytest
from hypothesis import given, strategies as st

from sqcqp import (
    AllZeroMultipliers,
    GridSpec,
    InternalContradiction,
    NegativeMultiplier,
    Outcome,
    ScalarQuadratic,
    SearchConfig,
    alternative,
    combine,
    evaluate,
    grid_refute_nonneg,
    nonnegativity_certificate,
    shift_objective,
    solve,
)
from sqcqp.slemma import find_strict_point, search_multiplier, simplex_grid

from _gen import quadratics, random_family, trust_region

SQ = ScalarQuadratic(1, [0, 0], 0)
NEG = ScalarQuadratic(-1, [0, 0], 0)


def test_certificate_examples():
    assert nonnegativity_certificate([SQ, ScalarQuadratic(-3, [1, 2], 5)], [1, 0])
    assert nonnegativity_certificate([ScalarQuadratic(1, [-1, 0], 1)], [1])
    q = ScalarQuadratic(1, [-1, 0], 0.5)
    assert not nonnegativity_certificate([q], [1])
    assert q([1, 0]) == -0.5


def test_certificate_input_errors():
    with pytest.raises(AllZeroMultipliers):
        nonnegativity_certificate([SQ], [0])
    with pytest.raises(NegativeMultiplier):
        nonnegativity_certificate([SQ, NEG], [1, -1])


def test_strict_point_examples():
    fs = [ScalarQuadratic(1, [0, 0], -1), ScalarQuadratic(0, [1, 0], -1)]
    x = find_strict_point(fs)
    assert x is not None and max(f(x) for f in fs) < 0
    assert find_strict_point([SQ]) is None
    annulus = [ScalarQuadratic(1, [0, 0], -1), ScalarQuadratic(-1, [0, 0], 0.25)]
    x = find_strict_point(annulus)
    assert x is not None and 0.5 < np.linalg.norm(x) < 1
    xr = np.array([0.75, 0.0])
    np.testing.assert_allclose([f(xr) for f in annulus], [-0.4375, -0.3125])


def test_multiplier_examples():
    m = search_multiplier([SQ, NEG])
    assert m is not None and nonnegativity_certificate([SQ, NEG], np.r_[m.gamma0, m.gamma])
    assert search_multiplier([ScalarQuadratic(1, [0, 0], -1)]) is None
    p = trust_region()
    jstar = solve(p).value
    fs = [shift_objective(p, jstar), p.constraints[0]]
    m = search_multiplier(fs)
    assert m is not None
    assert abs(m.gamma0 - m.gamma[0]) <= 1e-6
    assert nonnegativity_certificate(fs, np.r_[m.gamma0, m.gamma])


def test_alternative_examples():
    v = alternative([ScalarQuadratic(1, [0, 0], -1), ScalarQuadratic(0, [1, 0], -1)])
    assert v.outcome == Outcome.STRICT_POINT_FOUND and v.multiplier is None
    v = alternative([SQ, NEG])
    assert v.outcome == Outcome.MULTIPLIER_FOUND and v.strict_point is None
    assert v.rank_condition


def test_alternative_reports_rank_condition():
    fs = [ScalarQuadratic(1, [1, 0], 0), ScalarQuadratic(1, [0, 1], 0)]
    assert not alternative(fs).rank_condition


def test_contradiction_is_loud(monkeypatch):
    import sqcqp.slemma as mod

    monkeypatch.setattr(mod, "nonnegativity_certificate", lambda fs, g, tol=0.0: True)
    with pytest.raises(InternalContradiction):
        mod.alternative([ScalarQuadratic(1, [0, 0], -1)])


def test_simplex_grid_is_exhaustive():
    G = simplex_grid(3, 4)
    assert G.shape == (15, 3)
    np.testing.assert_allclose(G.sum(axis=1), 1.0)
    assert np.all(G >= 0)


def test_exclusivity_on_random_families():
    rng = np.random.default_rng(31)
    outcomes = set()
    for _ in range(20):
        n = int(rng.integers(2, 4))
        k = int(rng.integers(2, 4))
        fs = random_family(rng, n, k, n - 1)
        v = alternative(fs, SearchConfig(seed=1))
        outcomes.add(v.outcome)
        assert v.rank_condition
        if v.strict_point is not None:
            assert max(evaluate(f, v.strict_point) for f in fs) < 0
        if v.multiplier is not None:
            gamma = np.r_[v.multiplier.gamma0, v.multiplier.gamma]
            assert nonnegativity_certificate(fs, gamma)
    assert Outcome.UNDECIDED not in outcomes


@st.composite
def families(draw):
    n = draw(st.integers(1, 3))
    k = draw(st.integers(1, 3))
    fs = [draw(quadratics(n)) for _ in range(k)]
    gamma = np.array(draw(st.lists(st.floats(0, 3), min_size=k, max_size=k)))
    if not np.any(gamma > 0):
        gamma[0] = 1.0
    return fs, gamma


@given(families())
def test_certificate_matches_grid(args):
    fs, gamma = args
    q = combine(fs, gamma)
    if nonnegativity_certificate(fs, gamma):
        grid = GridSpec.cube(q.n, 5.0, {1: 101, 2: 101, 3: 41}[q.n])
        vals = []
        for X in grid.chunks():
            vals.append(q.a * np.einsum("ij,ij->i", X, X) + 2 * X @ q.b + q.c)
        scale = 1.0 + abs(q.a) * 75 + np.abs(q.b).sum() * 10 + abs(q.c)
        assert np.concatenate(vals).min() >= -1e-9 * scale
    elif q.a > 0:
        x = -q.b / q.a
        if np.max(np.abs(x)) < 1e50:
            assert q(x) < 0


@given(families())
def test_certificate_scale_invariance(args):
    fs, gamma = args
    base = nonnegativity_certificate(fs, gamma)
    for t in (0.1, 10.0):
        q = combine(fs, gamma)
        # outcome only flips when the margin sits within rounding of zero
        if q.a > 0 and abs(q.c - q.b @ q.b / q.a) <= 1e-12 * (1 + abs(q.c)):
            continue
        if q.a == 0 and not np.any(q.b) and abs(q.c) <= 1e-12:
            continue
        assert nonnegativity_certificate(fs, t * gamma) == base


def test_grid_never_refutes_found_multipliers():
    rng = np.random.default_rng(41)
    for _ in range(10):
        fs = random_family(rng, 2, 3, 1)
        m = search_multiplier(fs)
        if m is None:
            continue
        q = combine(fs, np.r_[m.gamma0, m.gamma])
        assert grid_refute_nonneg(q, GridSpec.cube(2, 5.0, 101)) is None
