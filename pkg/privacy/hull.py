#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@File    :   privacy/hull.py
@Time    :   2026/10/19
@Desc    :   Planar convex bodies: monotone-chain hull, sensitivity hull, isotropic position, Minkowski norm
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from utils.errors import DegenerateHull, DegenerateInput

# padding squares are half a cell wide
PAD = 0.25
AREA_TOLERANCE = 1e-12
DEFAULT_ISOTROPIC_SAMPLES = 4096


@dataclass(frozen=True)
class ConvexHull:
    """Counter-clockwise vertex list of a strictly convex polygon"""
    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float).reshape(-1, 2)
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def area(self) -> float:
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))

    @property
    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def edges(self) -> Tuple[np.ndarray, np.ndarray]:
        """(edge start points, edge vectors), ccw"""
        return self.vertices, np.roll(self.vertices, -1, axis=0) - self.vertices

    def contains(self, points: np.ndarray, tol: float = 1e-12) -> np.ndarray:
        """Boolean mask of points inside or on the boundary"""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        starts, vecs = self.edges()
        rel = pts[:, None, :] - starts[None, :, :]
        cross = vecs[None, :, 0] * rel[:, :, 1] - vecs[None, :, 1] * rel[:, :, 0]
        return np.all(cross >= -tol, axis=1)

    def facets(self) -> Tuple[np.ndarray, np.ndarray]:
        """Outward normals a_i and offsets b_i with a_i . x <= b_i on the body"""
        starts, vecs = self.edges()
        normals = np.column_stack([vecs[:, 1], -vecs[:, 0]])
        offsets = np.einsum("ij,ij->i", normals, starts)
        return normals, offsets

    def transform(self, t: np.ndarray) -> "ConvexHull":
        """Image under a linear map; orientation restored for negative determinants"""
        v = self.vertices @ np.asarray(t, dtype=float).T
        if np.linalg.det(t) < 0:
            v = v[::-1]
        return ConvexHull(v)


def _cross(o: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _monotone_chain(points: np.ndarray) -> np.ndarray:
    pts = np.unique(points, axis=0)  # lexicographic (x, y) order
    if len(pts) <= 2:
        return pts
    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in pts[::-1]:
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def convex_hull(points) -> ConvexHull:
    """Hull of a 2-D point set; zero-area inputs are padded by a half-cell square"""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise DegenerateInput("convex hull of an empty point set")
    if not np.all(np.isfinite(pts)):
        raise DegenerateInput("convex hull input has non-finite coordinates")
    vertices = _monotone_chain(pts)
    hull = ConvexHull(vertices) if len(vertices) >= 3 else None
    if hull is None or hull.area <= AREA_TOLERANCE:
        corners = np.array([[-PAD, -PAD], [PAD, -PAD], [PAD, PAD], [-PAD, PAD]])
        padded = (pts[:, None, :] + corners[None, :, :]).reshape(-1, 2)
        hull = ConvexHull(_monotone_chain(padded))
    return hull


def sensitivity_hull(k_prime: ConvexHull) -> ConvexHull:
    """Hull of all pairwise vertex differences (origin-symmetric)"""
    v = k_prime.vertices
    diffs = (v[:, None, :] - v[None, :, :]).reshape(-1, 2)
    return convex_hull(diffs)


def sample_uniform(k: ConvexHull, count: int, rng: np.random.Generator) -> np.ndarray:
    """count points uniform on k by rejection from its bounding box"""
    lo, hi = k.bounds
    fill = k.area / float(np.prod(hi - lo))
    out = []
    have = 0
    while have < count:
        batch = int((count - have) / max(fill, 0.05) * 1.2) + 16
        cand = rng.uniform(lo, hi, size=(batch, 2))
        cand = cand[k.contains(cand)]
        out.append(cand)
        have += len(cand)
    return np.concatenate(out)[:count]


def isotropic_transform(
    k: ConvexHull,
    sample_count: int = DEFAULT_ISOTROPIC_SAMPLES,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[np.ndarray, ConvexHull]:
    """Whitening T = Sigma^(-1/2) of the uniform distribution on k, and T(k)"""
    if k.area <= AREA_TOLERANCE:
        raise DegenerateHull(f"hull area {k.area:.3e} is below tolerance")
    rng = rng if rng is not None else np.random.default_rng(0)
    samples = sample_uniform(k, sample_count, rng)
    sigma = np.cov(samples, rowvar=False)
    w, v = np.linalg.eigh(sigma)
    if w.min() <= AREA_TOLERANCE:
        raise DegenerateHull(f"covariance of the hull is singular (eigenvalues {w})")
    t = v @ np.diag(1.0 / np.sqrt(w)) @ v.T
    return t, k.transform(t)


def minkowski_norm(k: ConvexHull, z: np.ndarray) -> np.ndarray:
    """Gauge of k at each row of z; k must contain the origin in its interior"""
    normals, offsets = k.facets()
    if offsets.min() <= 0:
        raise DegenerateHull("Minkowski norm needs a body with the origin in its interior")
    z = np.atleast_2d(np.asarray(z, dtype=float))
    return np.max(z @ normals.T / offsets, axis=1).clip(min=0.0)


def knorm_sample(k_i: ConvexHull, center, epsilon: float, rng: np.random.Generator) -> np.ndarray:
    """center + r * u with u uniform on k_i and r ~ Gamma(3, 1 / epsilon)"""
    if epsilon <= 0:
        raise DegenerateInput(f"epsilon must be positive, got {epsilon}")
    u = sample_uniform(k_i, 1, rng)[0]
    r = rng.gamma(shape=3.0, scale=1.0 / epsilon)
    return np.asarray(center, dtype=float) + r * u

