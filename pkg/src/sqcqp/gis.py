"""Image-set convexity witness for scalar quadratic families.

Given two points x_v, x_w and lambda in (0, 1), ``convexity_witness`` builds a
point x~ whose image under every f_k equals the convex combination
lambda*f_k(x_v) + (1 - lambda)*f_k(x_w).  The point is taken on the sphere
|x|^2 = lambda*|x_v|^2 + (1 - lambda)*|x_w|^2, displaced from the segment
point lambda*x_v + (1 - lambda)*x_w along a direction orthogonal to every b_k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateInput, DimensionError, FullRank
from .model import ScalarQuadratic, as_vector

RANK_RTOL = 1e-10
JITTER_FLOOR = 1e-12


def linear_rank(bs: Sequence, n: int) -> int:
    """Numerical rank of the vectors ``bs`` (relative singular-value cutoff)."""
    if len(bs) == 0:
        return 0
    M = np.vstack([as_vector(b, n, "b") for b in bs])
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > RANK_RTOL * s[0]))


def kernel_vector(bs: Sequence, n: int) -> np.ndarray:
    """Unit vector orthogonal to every vector in ``bs``.

    Raises ``FullRank`` when the vectors span the whole space.
    """
    if len(bs) == 0:
        return np.eye(n)[0]
    M = np.vstack([as_vector(b, n, "b") for b in bs])
    _, s, vt = np.linalg.svd(M, full_matrices=True)
    if s[0] == 0:
        return np.eye(n)[0]
    rank = int(np.sum(s > RANK_RTOL * s[0]))
    if rank >= n:
        raise FullRank(rank, n)
    y = vt[rank]
    # fix the sign so the largest-magnitude entry is positive
    j = int(np.argmax(np.abs(y)))
    if y[j] < 0:
        y = -y
    return y / np.linalg.norm(y)


def sphere_alpha(y_v, x_v, x_w, lam: float):
    """Roots of alpha^2 |y|^2 + 2 alpha <y, mid> - lam(1-lam)|x_v - x_w|^2 = 0.

    ``mid`` is lam*x_v + (1-lam)*x_w.  Returns ``((alpha_big, alpha_small), delta)``
    where delta = <y, mid>^2 + lam(1-lam)|y|^2 |x_v - x_w|^2 is the reduced
    discriminant and alpha_big is the root of larger magnitude.
    """
    y_v = np.asarray(y_v, dtype=float)
    x_v = np.asarray(x_v, dtype=float)
    x_w = np.asarray(x_w, dtype=float)
    if not 0.0 < lam < 1.0:
        raise ValueError(f"lambda must lie in (0, 1), got {lam}")
    yy = float(y_v @ y_v)
    diff = x_v - x_w
    dd = float(diff @ diff)
    if yy == 0.0:
        raise DegenerateInput("direction vector has zero norm")
    if dd == 0.0:
        raise DegenerateInput("x_v and x_w coincide")
    half_b = float(y_v @ (lam * x_v + (1.0 - lam) * x_w))
    const = lam * (1.0 - lam) * dd
    delta = half_b * half_b + yy * const
    # larger root first, the other from the product of roots -const/yy;
    # a symmetric pair (half_b == 0) puts the positive root first
    s = math.sqrt(delta)
    q = -(half_b + s) if half_b > 0 else s - half_b
    return (q / yy, -const / q), delta


@dataclass(frozen=True)
class WitnessResult:
    x_tilde: np.ndarray
    alpha_roots: tuple
    chosen_alpha: float
    discriminant: float
    kernel_vector: Optional[np.ndarray]
    slacks: np.ndarray
    lam: float

    def sphere_residual(self, x_v, x_w) -> float:
        """|x~|^2 minus the target squared radius."""
        x_v = np.asarray(x_v, dtype=float)
        x_w = np.asarray(x_w, dtype=float)
        target = self.lam * (x_v @ x_v) + (1.0 - self.lam) * (x_w @ x_w)
        return float(self.x_tilde @ self.x_tilde - target)

    def orthogonality_residual(self, fs: Sequence[ScalarQuadratic], x_v, x_w) -> float:
        mid = self.lam * np.asarray(x_v, dtype=float) + (1.0 - self.lam) * np.asarray(x_w, dtype=float)
        d = self.x_tilde - mid
        return float(max(abs(f.b @ d) for f in fs))


def _images(fs, x):
    return np.array([f(x) for f in fs])


def convexity_witness(
    fs: Sequence[ScalarQuadratic],
    x_v,
    x_w,
    lam: float,
    other_root: bool = False,
) -> WitnessResult:
    """Point x~ with f_k(x~) = lam*f_k(x_v) + (1-lam)*f_k(x_w) for every k.

    ``other_root`` builds the witness from the smaller-magnitude root instead.
    Raises ``FullRank`` when the b_k leave no kernel direction.
    """
    if not fs:
        raise DimensionError("empty family of functionals")
    n = fs[0].n
    for k, f in enumerate(fs):
        if f.n != n:
            raise DimensionError(f"functional {k} has dimension {f.n}, expected {n}")
    x_v = as_vector(x_v, n, "x_v")
    x_w = as_vector(x_w, n, "x_w")
    if not 0.0 < lam < 1.0:
        raise ValueError(f"lambda must lie in (0, 1), got {lam}")

    target = lam * _images(fs, x_v) + (1.0 - lam) * _images(fs, x_w)
    if np.array_equal(x_v, x_w):
        try:
            y = kernel_vector([f.b for f in fs], n)
        except FullRank:
            y = None
        x = x_v.copy()
        return WitnessResult(x, (0.0, 0.0), 0.0, 0.0, y, target - _images(fs, x), lam)

    y = kernel_vector([f.b for f in fs], n)
    roots, delta = sphere_alpha(y, x_v, x_w, lam)
    alpha = roots[1] if other_root else roots[0]
    x = alpha * y + lam * x_v + (1.0 - lam) * x_w
    return WitnessResult(x, roots, alpha, delta, y, target - _images(fs, x), lam)


@dataclass(frozen=True)
class SampleConfig:
    count: int = 1000
    box: float = 1.0
    shift: float = 0.0
    seed: int = 0


def sample_image(fs: Sequence[ScalarQuadratic], cfg: SampleConfig = SampleConfig()) -> np.ndarray:
    """``cfg.count`` rows (f_0(x), ..., f_m(x)) for x uniform in [-box, box]^n.

    With ``shift > 0`` each row is pushed up by a jitter uniform on
    (1e-12, shift] per coordinate, a sample from the open-orthant Minkowski sum.
    """
    if cfg.count <= 0:
        raise ValueError("count must be positive")
    if not cfg.box > 0:
        raise ValueError("box half-width must be positive")
    if cfg.shift < 0:
        raise ValueError("shift must be nonnegative")
    n = fs[0].n
    rng = np.random.default_rng(cfg.seed)
    X = rng.uniform(-cfg.box, cfg.box, size=(cfg.count, n))
    a = np.array([f.a for f in fs])
    B = np.vstack([f.b for f in fs])
    c = np.array([f.c for f in fs])
    sq = np.einsum("ij,ij->i", X, X)
    vals = sq[:, None] * a[None, :] + 2.0 * X @ B.T + c[None, :]
    if cfg.shift > 0:
        floor = min(JITTER_FLOOR, cfg.shift)
        # shift - U[0, shift - floor) lies in (floor, shift]
        vals = vals + (cfg.shift - rng.uniform(0.0, cfg.shift - floor, size=vals.shape))
    return vals
