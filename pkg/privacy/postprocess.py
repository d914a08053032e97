#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@File    :   privacy/postprocess.py
@Time    :   2026/10/19
@Desc    :   Correlation-restoring post-processing of noisy trajectories (public model only)
"""

import numpy as np

from mobility.corr import MarkovModel
from mobility.geo import Dataset, Grid, Role, Trajectory, require_role
from utils.logs import logger


def closest_member(grid: Grid, members: np.ndarray, probs: np.ndarray, target: int) -> int:
    """Member nearest to target; ties by higher probability, then ascending index"""
    n = grid.n
    tx, ty = divmod(int(target), n)
    mx, my = np.divmod(members, n)
    dist2 = (mx - tx) ** 2 + (my - ty) ** 2
    # lexsort: last key is primary
    order = np.lexsort((members, -probs, dist2))
    return int(members[order[0]])


def post_process(noisy: Trajectory, m: MarkovModel, tau: float) -> Trajectory:
    require_role(noisy, (Role.NOISY,), "post_process")
    grid = m.grid
    n = grid.n
    x_hat = noisy.indices(grid)
    out = x_hat.copy()
    escapes = 0
    for j in range(1, x_hat.size):
        prev, cur = int(out[j - 1]), int(x_hat[j])
        members, probs = m.probable(prev, tau)
        if members.size == 0 or np.any(members == cur):
            out[j] = cur
            continue
        x_closest = closest_member(grid, members, probs, cur)
        px, py = divmod(prev, n)
        cx, cy = divmod(cur, n)
        kx, ky = divmod(x_closest, n)
        # pit: the best candidate is the previous output itself, or no closer to it than the noisy point
        if x_closest == prev or (px - cx) ** 2 + (py - cy) ** 2 <= (px - kx) ** 2 + (py - ky) ** 2:
            out[j] = cur
            escapes += 1
        else:
            out[j] = x_closest
    logger.debug(f"Post-processed {noisy.id}: {int(np.sum(out != x_hat))} cells replaced, {escapes} pit escapes")
    return Trajectory.from_indices(noisy.id, Role.POST_PROCESSED, out, grid)


def post_process_dataset(d: Dataset, m: MarkovModel, tau: float) -> Dataset:
    out = d.with_trajectories([post_process(t, m, tau) for t in d])
    logger.info(f"Post-processed {len(out)} noisy trajectories (tau={tau})")
    return out
