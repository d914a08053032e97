#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@File    :   utils/seeding.py
@Time    :   2026/10/19
@Desc    :   Hierarchical seed derivation: master -> trial -> stream -> analyzer -> trajectory
"""

from enum import IntEnum

import numpy as np


class Stream(IntEnum):
    """Independent random streams inside one trial"""
    DATASET = 0
    DP = 1
    FINGERPRINT = 2
    ATTACK = 3
    LEAK = 4
    MARKS = 5
    CODEBOOK = 6
    WORKLOAD = 7
    MODEL = 8


def child_seed(master_seed: int, *path: int) -> np.random.SeedSequence:
    """SeedSequence addressed by a spawn path below master_seed.

    The same (master_seed, path) always yields the same stream, and streams for
    different paths are independent, so adding sweep points or analyzers never
    perturbs existing ones.
    """
    return np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(p) for p in path))


def child_rng(master_seed: int, *path: int) -> np.random.Generator:
    return np.random.default_rng(child_seed(master_seed, *path))


def seed_int(master_seed: int, *path: int) -> int:
    """Integer seed for a path, stored in manifests so a copy can be regenerated"""
    return int(child_seed(master_seed, *path).generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
