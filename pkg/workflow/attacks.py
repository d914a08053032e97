#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@File    :   workflow/attacks.py
@Time    :   2026/10/19
@Desc    :   Attacks on received copies: flipping, collusion and re-fingerprinting
"""

from enum import Enum
from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import logsumexp

from mobility.corr import MarkovModel, draw_index
from mobility.geo import Grid, Role, Trajectory, neighbor_indices, require_role
from utils.errors import DegenerateInput, LengthMismatch
from utils.logs import logger
from workflow.base import FingerprintConfig
from workflow.dsfs import dsfs_fingerprint

RECEIVED = (Role.FINGERPRINTED, Role.LEAKED)


class Attack(str, Enum):
    NONE = "none"
    RANDOM_FLIP = "random_flip"
    CORRELATION_FLIP = "correlation_flip"
    MAJORITY_COLLUSION = "majority_collusion"
    PROBABILISTIC_COLLUSION = "probabilistic_collusion"
    REFINGERPRINT = "refingerprint"

    @property
    def is_collusion(self) -> bool:
        return self in (Attack.MAJORITY_COLLUSION, Attack.PROBABILISTIC_COLLUSION)


class AttackConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    p_r: float = Field(0.8, ge=0, le=1)
    p_c: float = Field(0.8, ge=0, le=1)
    tau_attack: float = Field(0.005, ge=0, le=1)
    p_e: float = Field(0.4, ge=0, le=1)
    c: int = Field(3, ge=2)
    p_a: float = Field(0.4, ge=0, lt=1)
    refingerprint_tau: float = Field(0.005, ge=0, le=1)
    refingerprint_theta: float = Field(0.5, ge=0, le=1)


def _leaked(copy: Trajectory, indices, grid: Grid) -> Trajectory:
    return Trajectory.from_indices(copy.id, Role.LEAKED, indices, grid)


def random_flip(copy: Trajectory, p_r: float, rng: np.random.Generator, grid: Grid) -> Trajectory:
    require_role(copy, RECEIVED, "random_flip")
    idx = copy.indices(grid)
    out = idx.copy()
    flips = rng.random(idx.size) < p_r
    for j in np.flatnonzero(flips):
        nbrs = neighbor_indices(grid, int(idx[j]), include_self=False)
        out[j] = nbrs[int(rng.integers(len(nbrs)))]
    return _leaked(copy, out, grid)


def correlation_flip(copy: Trajectory, m: MarkovModel, tau_attack: float, p_c: float, rng: np.random.Generator) -> Trajectory:
    """Resample positions whose transition from the attack output so far is below tau_attack"""
    require_role(copy, RECEIVED, "correlation_flip")
    grid = m.grid
    idx = copy.indices(grid)
    out = idx.copy()
    for j in range(1, idx.size):
        prev = int(out[j - 1])
        if m.prob(prev, int(idx[j])) >= tau_attack or rng.random() >= p_c:
            continue
        members, probs = m.probable(prev, tau_attack)
        if members.size:
            out[j] = members[draw_index(probs, rng)]
    return _leaked(copy, out, grid)


def _stack(copies: Sequence[Trajectory], grid: Grid) -> np.ndarray:
    if len(copies) < 2:
        raise DegenerateInput(f"collusion needs at least two copies, got {len(copies)}")
    for c in copies:
        require_role(c, RECEIVED, "collusion")
    lengths = {len(c) for c in copies}
    if len(lengths) != 1:
        raise LengthMismatch(f"colluding copies have different lengths {sorted(lengths)}")
    return np.stack([c.indices(grid) for c in copies])


def majority_collusion(copies: Sequence[Trajectory], rng: np.random.Generator, grid: Grid) -> Trajectory:
    """Per position the modal cell; ties broken uniformly at random"""
    stacked = _stack(copies, grid)
    out = np.empty(stacked.shape[1], dtype=np.int64)
    ties = 0
    for j in range(stacked.shape[1]):
        values, counts = np.unique(stacked[:, j], return_counts=True)
        best = values[counts == counts.max()]
        if best.size > 1:
            ties += 1
            out[j] = best[int(rng.integers(best.size))]
        else:
            out[j] = best[0]
    if ties:
        logger.debug(f"majority collusion broke {ties} ties at random")
    return _leaked(copies[0], out, grid)


def collusion_log_weights(
    counts: np.ndarray,
    n_colluders: int,
    alphabet_size: int,
    p_e: float,
    transition: Optional[np.ndarray] = None,
) -> np.ndarray:
    """log of (1 - p_e)^c_k * (p_e / (|G_j| - 1))^(n - c_k) * Pr(g_k | y_{j-1})"""
    with np.errstate(divide="ignore"):
        log_keep = np.log1p(-p_e) if p_e < 1 else -np.inf
        log_alt = np.log(p_e / (alphabet_size - 1)) if p_e > 0 else -np.inf
        kept = np.where(counts > 0, counts * log_keep, 0.0)
        altered = np.where(n_colluders - counts > 0, (n_colluders - counts) * log_alt, 0.0)
        w = kept + altered
        if transition is not None:
            w = w + np.log(transition)
    return w


def probabilistic_collusion(
    copies: Sequence[Trajectory],
    m: MarkovModel,
    p_e: float,
    tau_attack: float,
    rng: np.random.Generator,
) -> Trajectory:
    grid = m.grid
    stacked = _stack(copies, grid)
    n = stacked.shape[0]
    out = np.empty(stacked.shape[1], dtype=np.int64)
    for j in range(stacked.shape[1]):
        values, counts = np.unique(stacked[:, j], return_counts=True)
        alphabet_size = values.size
        if alphabet_size == 1:
            out[j] = values[0]
            continue
        transition = None
        if j > 0:
            prev = int(out[j - 1])
            transition = np.array([m.prob(prev, int(g)) for g in values])
            keep = transition >= tau_attack
            if keep.any():
                values, counts, transition = values[keep], counts[keep], transition[keep]
        if values.size == 1:
            out[j] = values[0]
            continue
        w = collusion_log_weights(counts, n, alphabet_size, p_e, transition)
        if not np.isfinite(w.max()):
            # every candidate has zero weight; fall back to uniform
            w = np.zeros(values.size)
        probs = np.exp(w - logsumexp(w))
        out[j] = values[draw_index(probs, rng)]
    return _leaked(copies[0], out, grid)


def refingerprint(copy: Trajectory, m: MarkovModel, p_a: float, tau: float, theta: float, rng: np.random.Generator) -> Trajectory:
    """The attacker's own DSFS pass over the received copy"""
    require_role(copy, RECEIVED, "refingerprint")
    if p_a <= 0:
        return copy.evolve(copy.cells, Role.LEAKED)
    # a Leaked copy is re-fingerprinted as if fingerprinted
    source = copy if copy.role == Role.FINGERPRINTED else copy.evolve(copy.cells, Role.FINGERPRINTED)
    out = dsfs_fingerprint(source, m, FingerprintConfig(p=p_a, tau=tau, theta=theta), rng)
    return out.evolve(out.cells, Role.LEAKED)


def apply_attack(
    attack: Attack,
    copies: Sequence[Trajectory],
    m: MarkovModel,
    cfg: AttackConfig,
    rng: np.random.Generator,
) -> Trajectory:
    """Run an attack on the attacker's copies of one trajectory (first copy for single-copy attacks)"""
    grid = m.grid
    first = copies[0]
    if attack == Attack.NONE:
        require_role(first, RECEIVED, "leak")
        return first.evolve(first.cells, Role.LEAKED)
    if attack == Attack.RANDOM_FLIP:
        return random_flip(first, cfg.p_r, rng, grid)
    if attack == Attack.CORRELATION_FLIP:
        return correlation_flip(first, m, cfg.tau_attack, cfg.p_c, rng)
    if attack == Attack.MAJORITY_COLLUSION:
        return majority_collusion(copies, rng, grid)
    if attack == Attack.PROBABILISTIC_COLLUSION:
        return probabilistic_collusion(copies, m, cfg.p_e, cfg.tau_attack, rng)
    if attack == Attack.REFINGERPRINT:
        return refingerprint(first, m, cfg.p_a, cfg.refingerprint_tau, cfg.refingerprint_theta, rng)
    raise DegenerateInput(f"unknown attack {attack}")


def attack_dataset(
    attack: Attack,
    copies_per_colluder: List[List[Trajectory]],
    m: MarkovModel,
    cfg: AttackConfig,
    rng: np.random.Generator,
) -> List[Trajectory]:
    """copies_per_colluder[i][k] is colluder i's copy of trajectory k"""
    return [apply_attack(attack, list(column), m, cfg, rng) for column in zip(*copies_per_colluder)]
