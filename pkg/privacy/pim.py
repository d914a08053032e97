#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@File    :   privacy/pim.py
@Time    :   2026/10/19
@Desc    :   Planar isotropic mechanism: per-timestamp epsilon-DP release with belief tracking
"""

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import logsumexp

from mobility.corr import MarkovModel
from mobility.geo import Dataset, Grid, Role, Trajectory, neighbor_indices, require_role
from privacy.hull import (
    DEFAULT_ISOTROPIC_SAMPLES,
    ConvexHull,
    convex_hull,
    isotropic_transform,
    knorm_sample,
    minkowski_norm,
    sensitivity_hull,
)
from utils.errors import AllZeroLikelihood, DataError
from utils.logs import logger
from utils.seeding import child_rng

NORMALIZATION_TOLERANCE = 1e-9


class PimParams(BaseModel):
    """Event-level budget: epsilon is spent at every timestamp, no composition across the trajectory"""
    model_config = ConfigDict(frozen=True)

    epsilon: float = Field(1.7, gt=0)
    delta: float = Field(0.01, gt=0, lt=1)
    isotropic_samples: int = Field(DEFAULT_ISOTROPIC_SAMPLES, ge=16)


def _normalized(v: np.ndarray, what: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if np.any(v < 0) or abs(v.sum() - 1.0) > NORMALIZATION_TOLERANCE:
        raise DataError(f"{what} must be a probability vector (sum {v.sum():.12f})")
    return v


@dataclass
class BeliefState:
    prior: np.ndarray
    posterior: np.ndarray

    def __post_init__(self):
        self.prior = _normalized(self.prior, "prior")
        self.posterior = _normalized(self.posterior, "posterior")

    @classmethod
    def point_mass(cls, size: int, index: int) -> "BeliefState":
        v = np.zeros(size)
        v[index] = 1.0
        return cls(v.copy(), v)


def prior_update(b: BeliefState, m: MarkovModel) -> np.ndarray:
    prior = np.asarray(m.step(b.posterior)).ravel()
    return prior / prior.sum()


def delta_location_set(prior: np.ndarray, delta: float) -> np.ndarray:
    """Flat cell indices, in greedy order, of the smallest prefix holding mass >= 1 - delta.

    Cells are taken by descending prior; equal priors go by ascending index,
    which is ascending (ix, iy).
    """
    prior = np.asarray(prior, dtype=float)
    order = np.argsort(-prior, kind="stable")
    mass = np.cumsum(prior[order])
    count = int(np.searchsorted(mass, 1.0 - delta - 1e-12, side="left")) + 1
    return order[: min(count, order.size)]


def posterior_update(
    prior: np.ndarray,
    z: np.ndarray,
    k_i: ConvexHull,
    t: np.ndarray,
    epsilon: float,
    grid: Grid,
) -> np.ndarray:
    """Bayes update with the k-norm likelihood exp(-epsilon * ||T (z - s_i)||_{K_I})"""
    prior = np.asarray(prior, dtype=float)
    support = np.flatnonzero(prior > 0)
    diffs = (np.asarray(z, dtype=float)[None, :] - grid.centers()[support]) @ np.asarray(t).T
    log_post = np.log(prior[support]) - epsilon * minkowski_norm(k_i, diffs)
    total = logsumexp(log_post)
    if not np.isfinite(total):
        raise AllZeroLikelihood("every candidate has zero likelihood for the released point")
    posterior = np.zeros_like(prior)
    posterior[support] = np.exp(log_post - total)
    return posterior / posterior.sum()


def snap(z: np.ndarray, grid: Grid) -> int:
    """Flat index of the cell whose center is nearest to z (cell units)"""
    ix = int(np.clip(np.floor(z[0]), 0, grid.n - 1))
    iy = int(np.clip(np.floor(z[1]), 0, grid.n - 1))
    return ix * grid.n + iy


class _HullCache:
    """Transforms keyed by the translated shape of the location set; sensitivity hulls are translation invariant"""

    def __init__(self, grid: Grid, sample_count: int, rng: np.random.Generator):
        self.grid = grid
        self.sample_count = sample_count
        self.rng = rng
        self._cache: Dict[Tuple[Tuple[int, int], ...], Tuple[np.ndarray, ConvexHull]] = {}

    def get(self, members: np.ndarray) -> Tuple[np.ndarray, ConvexHull]:
        ix, iy = np.divmod(np.sort(members), self.grid.n)
        key = tuple(zip((ix - ix.min()).tolist(), (iy - iy.min()).tolist()))
        hit = self._cache.get(key)
        if hit is None:
            k_prime = convex_hull(self.grid.centers()[members])
            hit = isotropic_transform(sensitivity_hull(k_prime), self.sample_count, self.rng)
            self._cache[key] = hit
        return hit


def pim_release(traj: Trajectory, m: MarkovModel, params: PimParams, rng: np.random.Generator) -> Trajectory:
    """Release every position of one trajectory; reads nothing but the trajectory and the public model"""
    require_role(traj, (Role.RAW,), "pim_release")
    grid = m.grid
    centers = grid.centers()
    true_idx = traj.indices(grid)
    hulls = _HullCache(grid, params.isotropic_samples, rng)

    released = np.empty(true_idx.size, dtype=np.int64)
    belief: Optional[BeliefState] = None
    for j, x in enumerate(true_idx):
        if belief is None:
            members = np.asarray(neighbor_indices(grid, int(x), include_self=True))
            prior = np.zeros(grid.size)
            prior[members] = 1.0 / members.size
        else:
            prior = prior_update(belief, m)
            members = delta_location_set(prior, params.delta)

        t, k_i = hulls.get(members)
        z_image = knorm_sample(k_i, t @ centers[x], params.epsilon, rng)
        z = np.linalg.solve(t, z_image)
        released[j] = snap(z, grid)
        if j == 0:
            # the start is known exactly; the next location set comes from row(x1)
            belief = BeliefState(prior, BeliefState.point_mass(grid.size, int(x)).posterior)
        else:
            posterior = posterior_update(prior, centers[released[j]], k_i, t, params.epsilon, grid)
            belief = BeliefState(prior, posterior)

    out = Trajectory.from_indices(traj.id, Role.NOISY, released, grid)
    logger.debug(f"PIM released {traj.id} (eps={params.epsilon}): {int(np.sum(released != true_idx))}/{released.size} cells moved")
    return out


def protect_dataset(d: Dataset, m: MarkovModel, params: PimParams, seed: int) -> Dataset:
    """pim_release on every trajectory; trajectory k draws from child_rng(seed, k)"""
    noisy = [pim_release(traj, m, params, child_rng(seed, k)) for k, traj in enumerate(d)]
    logger.info(f"Protected {len(noisy)} trajectories with PIM (eps={params.epsilon}, delta={params.delta})")
    return d.with_trajectories(noisy)
