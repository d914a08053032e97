#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@File    :   workflow/pfs.py
@Time    :   2026/10/19
@Desc    :   Probabilistic fingerprinting baseline: transition-probability filter, no direction awareness
"""

import numpy as np

from mobility.corr import MarkovModel, draw_index, emission_weights
from mobility.geo import Role, Trajectory
from workflow.base import FingerprintConfig, FingerprintWorkflow
from workflow.dsfs import sample_around


class ProbabilisticFingerprint(FingerprintWorkflow):
    accepted_roles = (Role.RAW, Role.NOISY, Role.POST_PROCESSED, Role.FINGERPRINTED)

    def __init__(self, model: MarkovModel, cfg: FingerprintConfig) -> None:
        super().__init__("pfs", model, cfg)

    def __call__(self, traj: Trajectory, rng: np.random.Generator) -> Trajectory:
        self.check(traj)
        m, grid = self.model, self.model.grid
        p, sigma = self.cfg.p, self.cfg.pfs_sigma
        x_star = traj.indices(grid)
        out = np.empty_like(x_star)

        nbrs, probs = emission_weights(m, int(x_star[0]))
        out[0] = sample_around(int(x_star[0]), nbrs, probs, p, rng)
        for j in range(1, x_star.size):
            x = int(x_star[j])
            survivors, weights = m.probable(int(out[j - 1]), sigma)
            if survivors.size == 0:
                out[j] = x
            elif np.any(survivors == x):
                out[j] = sample_around(x, survivors, weights, p, rng)
            else:
                # the original was filtered out; wander among the survivors
                out[j] = survivors[draw_index(weights, rng)]
        return Trajectory.from_indices(traj.id, Role.FINGERPRINTED, out, grid)


def pfs_fingerprint(x_star: Trajectory, m: MarkovModel, p: float, sigma: float, rng: np.random.Generator) -> Trajectory:
    return ProbabilisticFingerprint(m, FingerprintConfig(p=p, sigma=sigma))(x_star, rng)
