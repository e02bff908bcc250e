"""Random instance generators and hypothesis strategies shared by the tests."""

import numpy as np
from hypothesis import strategies as st

from sqcqp import Problem, ScalarQuadratic

FIXTURES = __import__("pathlib").Path(__file__).resolve().parent.parent / "docs" / "fixtures"


def ball(center, radius) -> ScalarQuadratic:
    """||x - center||^2 - radius^2 <= 0."""
    center = np.asarray(center, dtype=float)
    return ScalarQuadratic(1.0, -center, float(center @ center) - radius * radius)


def trust_region() -> Problem:
    return Problem(2, ScalarQuadratic(1.0, [-2.0, 0.0], 4.0), [ball([0, 0], 1.0)])


def nonconvex_sphere() -> Problem:
    return Problem(2, ScalarQuadratic(-1.0, [0.0, 0.0], 0.0), [ball([0, 0], 1.0)])


def convex_qp() -> Problem:
    return Problem(2, ScalarQuadratic(1.0, [0.0, 0.0], 0.0), [ScalarQuadratic(0.0, [1.0, 0.0], 2.0)])


def subspace_vectors(rng, n, count, dim):
    """``count`` Gaussian vectors in a random ``dim``-dimensional subspace of R^n."""
    if dim == 0:
        return [np.zeros(n) for _ in range(count)]
    basis = np.linalg.qr(rng.standard_normal((n, dim)))[0]
    return [basis @ rng.standard_normal(dim) for _ in range(count)]


def solvable_instance(rng, max_m=2):
    """Random scalar instance with a strictly feasible ball centre, bounded feasible set,
    nonnegative curvature for large gamma_1, and (for m >= 2) linear terms of rank < n."""
    n = int(rng.integers(1, 4))
    m = 1 if n == 1 else int(rng.integers(1, max_m + 1))
    radius = rng.uniform(0.5, 1.5)
    if m == 1:
        center = rng.uniform(-1.0, 1.0, n)
        J = ScalarQuadratic(rng.uniform(-1.0, 1.0), rng.standard_normal(n), rng.uniform(-1.0, 1.0))
        return Problem(n, J, [ball(center, radius)])
    # objective and constraint linear terms share an (n-1)-dimensional subspace
    bJ, b1, *rest = subspace_vectors(rng, n, m + 1, n - 1)
    b1 = b1 / max(1.0, float(np.abs(b1).max()))  # keep the centre inside [-1, 1]^n
    x0 = -b1  # centre of the ball, strictly feasible
    cons = [ScalarQuadratic(1.0, b1, float(b1 @ b1) - radius * radius)]
    for b in rest:
        a = rng.uniform(-1.0, 1.0)
        c = -(a * float(x0 @ x0) + 2.0 * float(b @ x0)) - rng.uniform(0.1, 1.0)
        cons.append(ScalarQuadratic(a, b, c))
    J = ScalarQuadratic(rng.uniform(-1.0, 1.0), bJ, rng.uniform(-1.0, 1.0))
    return Problem(n, J, cons)


def random_family(rng, n, k, rank):
    bs = subspace_vectors(rng, n, k, rank)
    return [ScalarQuadratic(rng.uniform(-1.0, 1.0), b, rng.uniform(-1.0, 1.0)) for b in bs]


finite = st.floats(min_value=-5.0, max_value=5.0, allow_nan=False, allow_infinity=False, allow_subnormal=False)


@st.composite
def quadratics(draw, n):
    return ScalarQuadratic(draw(finite), draw(st.lists(finite, min_size=n, max_size=n)), draw(finite))


@st.composite
def vectors(draw, n, lo=-3.0, hi=3.0):
    return np.array(draw(st.lists(st.floats(lo, hi, allow_nan=False), min_size=n, max_size=n)))


@st.composite
def problems(draw, max_n=3, max_m=3):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(1, max_m))
    return Problem(n, draw(quadratics(n)), [draw(quadratics(n)) for _ in range(m)])
