#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@File    :   benchmarks/timing.py
@Time    :   2026/10/19
@Desc    :   Wall-clock cost of generating one fingerprinted dataset
"""

import time
from typing import Optional, Sequence

import pandas as pd

from mobility.corr import build_model
from mobility.synth import random_mobility_model, synth_generate
from utils.config import ExperimentConfig
from utils.logs import logger
from utils.seeding import Stream, child_rng
from workflow.base import Scheme
from workflow.distribute import distribute


def timing_benchmark(
    count: int,
    lengths: Sequence[int],
    cfg: Optional[ExperimentConfig] = None,
    scheme: Scheme = Scheme.DSFS,
) -> pd.DataFrame:
    """Seconds to fingerprint ``count`` trajectories once, per trajectory length.

    Model construction and data generation are not timed.
    """
    cfg = cfg or ExperimentConfig()
    generating = random_mobility_model(cfg.grid, child_rng(cfg.master_seed, Stream.MODEL, 0), support=cfg.model_support)
    rows = []
    for k, length in enumerate(lengths):
        corpus = synth_generate(generating, max(1, cfg.model_corpus_size), length, child_rng(cfg.master_seed, Stream.MODEL, 1, k))
        public = build_model(corpus)
        dataset = synth_generate(generating, count, length, child_rng(cfg.master_seed, Stream.DATASET, k))
        n_analyzers = max(2, cfg.n_analyzers) if scheme.is_code else 1

        start = time.perf_counter()
        if len(dataset):
            distribute(dataset, n_analyzers, scheme, cfg.fingerprint, cfg.master_seed, public, analyzers=[0])
        seconds = time.perf_counter() - start

        logger.info(f"{scheme.value}: {count} trajectories of length {length} in {seconds:.3f}s")
        rows.append({"scheme": scheme.value, "count": count, "length": length, "seconds": seconds})
    return pd.DataFrame(rows, columns=["scheme", "count", "length", "seconds"])
