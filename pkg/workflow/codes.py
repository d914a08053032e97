#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@File    :   workflow/codes.py
@Time    :   2026/10/19
@Desc    :   Boneh-Shaw and Tardos binary fingerprinting codes, and their embedding into trajectories
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional

import numpy as np

from mobility.geo import Grid, Role, Trajectory, neighbor_indices, require_role
from utils.errors import DegenerateInput, LengthMismatch
from workflow.base import FingerprintConfig, FingerprintWorkflow


class CodeKind(str, Enum):
    BONEH_SHAW = "boneh_shaw"
    TARDOS = "tardos"


@dataclass(frozen=True)
class BinaryCodebook:
    """n_users x length bit matrix; row u is the codeword of analyzer u (0-based)"""
    kind: CodeKind
    codewords: np.ndarray
    bias: Optional[np.ndarray] = None
    params: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        words = np.asarray(self.codewords, dtype=np.uint8)
        if words.ndim != 2 or not np.all(words <= 1):
            raise DegenerateInput("codewords must be a 2-D 0/1 matrix")
        object.__setattr__(self, "codewords", words)
        if self.bias is not None:
            object.__setattr__(self, "bias", np.asarray(self.bias, dtype=float))

    @property
    def n_users(self) -> int:
        return self.codewords.shape[0]

    @property
    def length(self) -> int:
        return self.codewords.shape[1]


@dataclass(frozen=True)
class TardosScore:
    scores: np.ndarray
    accused: int
    tie_flag: bool
    threshold: float


def bs_generate(n_users: int, d: int) -> BinaryCodebook:
    """Gamma(n, d): (n - 1) blocks of d bits; user u (1-based) has (u - 1) * d zeros, then ones.

    User 1 is all ones and user n all zeros.
    """
    if n_users < 2 or d < 1:
        raise DegenerateInput(f"Boneh-Shaw needs n_users >= 2 and d >= 1, got {n_users}, {d}")
    length = (n_users - 1) * d
    cols = np.arange(length)
    words = (cols[None, :] >= (np.arange(n_users)[:, None] * d)).astype(np.uint8)
    return BinaryCodebook(CodeKind.BONEH_SHAW, words, params={"n": n_users, "d": d})


def bs_detect(leaked_bits, codebook: BinaryCodebook) -> int:
    """0-based analyzer owning the first block with strictly more ones than zeros (last analyzer if none)"""
    bits = np.asarray(leaked_bits, dtype=np.int64)
    if bits.size != codebook.length:
        raise LengthMismatch(f"leaked word has {bits.size} bits, code length is {codebook.length}")
    d = int(codebook.params["d"])
    ones = bits.reshape(-1, d).sum(axis=1)
    majority = np.flatnonzero(2 * ones > d)
    return int(majority[0]) if majority.size else codebook.n_users - 1


def tardos_length(c: int, omega: float) -> int:
    k = math.ceil(math.log2(1.0 / omega))
    return 100 * c * c * k


def tardos_generate(
    n_users: int,
    c: int,
    omega: float,
    rng: np.random.Generator,
    length: Optional[int] = None,
) -> BinaryCodebook:
    """Bias p_i = sin^2(r_i), r_i ~ U[t', pi/2 - t'], bits ~ Bernoulli(p_i); length defaults to 100 c^2 k"""
    if c < 2 or not 0 < omega < 1:
        raise DegenerateInput(f"Tardos needs c >= 2 and 0 < omega < 1, got {c}, {omega}")
    k = math.ceil(math.log2(1.0 / omega))
    m = length or tardos_length(c, omega)
    t = 1.0 / (300 * c)
    t_prime = math.asin(math.sqrt(t))
    r = rng.uniform(t_prime, math.pi / 2 - t_prime, size=m)
    bias = np.sin(r) ** 2
    words = (rng.random((n_users, m)) < bias[None, :]).astype(np.uint8)
    return BinaryCodebook(CodeKind.TARDOS, words, bias=bias, params={"c": c, "omega": omega, "k": k, "t": t})


def tardos_score(leaked_bits, codebook: BinaryCodebook) -> TardosScore:
    y = np.asarray(leaked_bits, dtype=float)
    if y.size != codebook.length:
        raise LengthMismatch(f"leaked word has {y.size} bits, code length is {codebook.length}")
    p = codebook.bias
    u = np.where(codebook.codewords == 1, np.sqrt((1 - p) / p)[None, :], -np.sqrt(p / (1 - p))[None, :])
    scores = u @ y
    best = scores.max()
    winners = np.flatnonzero(scores == best)
    c, k = codebook.params["c"], codebook.params["k"]
    return TardosScore(scores, int(winners[0]), winners.size > 1, 20.0 * c * k)


def make_mark_map(traj: Trajectory, grid: Grid, rng: np.random.Generator) -> np.ndarray:
    """Per position, a random Moore neighbor different from the original cell"""
    idx = traj.indices(grid)
    marks = np.empty_like(idx)
    for j, x in enumerate(idx):
        nbrs = neighbor_indices(grid, int(x), include_self=False)
        marks[j] = nbrs[int(rng.integers(len(nbrs)))]
    return marks


def fit_bits(bits, length: int, truncate: bool) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size == length:
        return bits
    if not truncate:
        raise LengthMismatch(f"codeword has {bits.size} bits, trajectory has {length} positions")
    if bits.size > length:
        return bits[:length]
    return np.concatenate([bits, np.zeros(length - bits.size, dtype=np.uint8)])


def code_embed(x_star: Trajectory, codeword_bits, mark_map: np.ndarray, grid: Grid, truncate: bool = True) -> Trajectory:
    """Marked cell where the bit is 1, original cell elsewhere"""
    require_role(x_star, (Role.RAW, Role.NOISY, Role.POST_PROCESSED), "code_embed")
    idx = x_star.indices(grid)
    if len(mark_map) != idx.size:
        raise LengthMismatch(f"mark map covers {len(mark_map)} positions, trajectory has {idx.size}")
    bits = fit_bits(codeword_bits, idx.size, truncate)
    out = np.where(bits == 1, np.asarray(mark_map), idx)
    return Trajectory.from_indices(x_star.id, Role.FINGERPRINTED, out, grid)


def read_bits(leaked: Trajectory, original: Trajectory, mark_map: np.ndarray, grid: Grid) -> np.ndarray:
    """Bit j is 1 iff the leaked cell is strictly closer to the mark than to the original"""
    if len(leaked) != len(original) or len(mark_map) != len(original):
        raise LengthMismatch(f"cannot read bits: lengths {len(leaked)}, {len(original)}, {len(mark_map)}")
    n = grid.n
    lx, ly = np.divmod(leaked.indices(grid), n)
    ox, oy = np.divmod(original.indices(grid), n)
    mx, my = np.divmod(np.asarray(mark_map), n)
    to_mark = (lx - mx) ** 2 + (ly - my) ** 2
    to_orig = (lx - ox) ** 2 + (ly - oy) ** 2
    return (to_mark < to_orig).astype(np.uint8)


def codeword_for_trajectory(codebook: BinaryCodebook, analyzer: int, length: int) -> np.ndarray:
    return fit_bits(codebook.codewords[analyzer], length, truncate=True)


def accuse_from_bits(bits: np.ndarray, codebook: BinaryCodebook) -> TardosScore:
    """Accusation on a (possibly truncated or padded) bit read-back"""
    if codebook.kind == CodeKind.BONEH_SHAW:
        word = fit_bits(bits, codebook.length, truncate=True)
        accused = bs_detect(word, codebook)
        return TardosScore(np.zeros(codebook.n_users), accused, False, float("nan"))
    truncated = BinaryCodebook(
        codebook.kind,
        codebook.codewords[:, : bits.size],
        bias=codebook.bias[: bits.size],
        params=codebook.params,
    )
    return tardos_score(fit_bits(bits, truncated.length, truncate=True), truncated)


class CodeEmbedding(FingerprintWorkflow):
    """Embeds an analyzer's codeword through a dataset-wide mark map"""

    def __init__(self, model, cfg: FingerprintConfig, codebook: BinaryCodebook) -> None:
        super().__init__(codebook.kind.value, model, cfg)
        self.codebook = codebook

    def embed(self, traj: Trajectory, analyzer: int, mark_map: np.ndarray) -> Trajectory:
        self.check(traj)
        bits = codeword_for_trajectory(self.codebook, analyzer, len(traj))
        return code_embed(traj, bits, mark_map, self.model.grid)
