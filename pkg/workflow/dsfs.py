#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@File    :   workflow/dsfs.py
@Time    :   2026/10/19
@Desc    :   Direction-sensitive fingerprinting with ratio balancing
"""

from dataclasses import dataclass
from enum import IntEnum
from typing import List, Optional, Tuple

import numpy as np

from mobility.corr import MarkovModel, closer_mask, draw_index, emission_weights
from mobility.geo import Role, Trajectory
from privacy.postprocess import closest_member
from workflow.base import FingerprintConfig, FingerprintWorkflow


class Case(IntEnum):
    FIRST = 0
    CLOSER = 1
    PROBABLE = 2
    ISOLATED = 3
    SURROGATE = 4


@dataclass(frozen=True)
class StepTrace:
    """What happened at one position; candidates is empty when nothing was sampled"""
    position: int
    case: Case
    temporary: int
    candidates: Tuple[int, ...]
    output: int
    p_current: float


def balanced_ratio(cfg: FingerprintConfig, fp_count: int, position: int) -> float:
    """p(1 - theta) when ahead of p * position, p(1 + theta) when behind, p otherwise"""
    target = cfg.p * position
    if fp_count > target:
        return cfg.p * (1.0 - cfg.theta)
    if fp_count < target:
        return min(1.0, cfg.p * (1.0 + cfg.theta))
    return cfg.p


def sample_around(
    temporary: int,
    members: np.ndarray,
    weights: np.ndarray,
    p_current: float,
    rng: np.random.Generator,
) -> int:
    """Keep the temporary original w.p. 1 - p_current, else draw from the rest proportionally"""
    if rng.random() >= p_current:
        return temporary
    others = members != temporary
    rest, w = members[others], weights[others]
    if rest.size == 0 or w.sum() <= 0:
        return temporary
    return int(rest[draw_index(w, rng)])


class DirectionSensitiveFingerprint(FingerprintWorkflow):
    accepted_roles = (Role.RAW, Role.NOISY, Role.POST_PROCESSED, Role.FINGERPRINTED)

    def __init__(self, model: MarkovModel, cfg: FingerprintConfig) -> None:
        super().__init__("dsfs", model, cfg)

    def first_position(self, x: int, p_current: float, rng: np.random.Generator) -> int:
        nbrs, probs = emission_weights(self.model, x)
        if probs[nbrs != x].sum() <= 0:
            probs = np.ones(nbrs.size)
        return sample_around(x, nbrs, probs, p_current, rng)

    def __call__(
        self,
        traj: Trajectory,
        rng: np.random.Generator,
        trace: Optional[List[StepTrace]] = None,
    ) -> Trajectory:
        self.check(traj)
        m, cfg, grid = self.model, self.cfg, self.model.grid
        x_star = traj.indices(grid)
        out = np.empty_like(x_star)
        interval = cfg.check_interval
        p_current = cfg.p
        fp_count = 0

        for j, x in enumerate(x_star):
            x = int(x)
            candidates: Tuple[int, ...] = ()
            if j == 0:
                case, temporary = Case.FIRST, x
                out[0] = self.first_position(x, p_current, rng)
                candidates = tuple(int(k) for k in emission_weights(m, x)[0])
            else:
                prev = int(out[j - 1])
                members, probs = m.probable(prev, cfg.tau)
                closer = closer_mask(grid, members, prev, x)
                in_probable = bool(np.any(members == x))
                temporary = x
                if in_probable and int(closer.sum()) > 1:
                    # x is always in the closer set when it is probable
                    case, pool, weights = Case.CLOSER, members[closer], probs[closer]
                elif in_probable:
                    case, pool, weights = Case.PROBABLE, members, probs
                elif members.size <= 1:
                    case, pool, weights = Case.ISOLATED, None, None
                else:
                    case = Case.SURROGATE
                    surrogate = closest_member(grid, members, probs, x)
                    if surrogate == prev:
                        pool, weights = None, None
                    else:
                        temporary, pool, weights = surrogate, members, probs
                if pool is None:
                    out[j] = x
                else:
                    out[j] = sample_around(temporary, pool, weights, p_current, rng)
                    candidates = tuple(int(k) for k in pool)

            if out[j] != temporary:
                fp_count += 1
            if trace is not None:
                trace.append(StepTrace(j + 1, case, temporary, candidates, int(out[j]), p_current))
            if (j + 1) % interval == 0:
                p_current = balanced_ratio(cfg, fp_count, j + 1)

        return Trajectory.from_indices(traj.id, Role.FINGERPRINTED, out, grid)


def dsfs_fingerprint(
    x_star: Trajectory,
    m: MarkovModel,
    cfg: FingerprintConfig,
    rng: np.random.Generator,
    trace: Optional[List[StepTrace]] = None,
) -> Trajectory:
    return DirectionSensitiveFingerprint(m, cfg)(x_star, rng, trace)
