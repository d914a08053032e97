#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@File    :   benchmarks/utility_eval.py
@Time    :   2026/10/19
@Desc    :   Utility table: DP protection, post-processing and fingerprinting compared with the raw data
"""

from typing import Any, Dict, List, Optional, Tuple

import pandas as pd

from benchmarks.benchmark import BaseBenchmark, TrialTask, build_world, trial_dataset
from benchmarks.utility import UtilityReport, evaluate_utility, random_region_queries, top_patterns
from mobility.geo import Dataset
from privacy.pim import protect_dataset
from privacy.postprocess import post_process_dataset
from utils.config import ExperimentConfig
from utils.logs import logger
from utils.seeding import Stream, child_rng, seed_int
from workflow.base import Scheme
from workflow.distribute import distribute

METRICS = list(UtilityReport.model_fields)


def fingerprinted_copy(cfg: ExperimentConfig, protected: Dataset, scheme: Scheme, model, trial: int) -> Dataset:
    """Analyzer 0's copy; code schemes keep the configured analyzer count for their codebook"""
    n_analyzers = max(cfg.n_analyzers, 2) if scheme.is_code else cfg.n_analyzers
    records = distribute(protected, n_analyzers, scheme, cfg.fingerprint, cfg.master_seed, model,
                         base_path=(trial,), analyzers=[0])
    return records[0].copies


class UtilityBenchmark(BaseBenchmark):
    key_columns = ["epsilon", "scheme", "trial"]

    def __init__(self, cfg: ExperimentConfig, log_path: Optional[str] = None):
        super().__init__("utility", cfg, log_path)

    def tasks(self) -> List[TrialTask]:
        return [TrialTask(eps, trial, self.cfg) for eps in self.cfg.epsilons for trial in range(self.cfg.trials)]

    def get_result_columns(self) -> List[str]:
        return ["epsilon", "scheme", "trial"] + METRICS

    def evaluate_trial(self, task: TrialTask) -> List[Tuple[Any, ...]]:
        cfg, trial, epsilon = task.cfg, task.trial, task.sweep_value
        world = build_world(cfg)
        raw = trial_dataset(cfg, world, trial)
        # common random numbers across epsilon: the DP stream depends on the trial only
        noisy = protect_dataset(raw, world.public, cfg.pim_params(epsilon), seed_int(cfg.master_seed, trial, Stream.DP))
        smoothed = post_process_dataset(noisy, world.public, cfg.tau) if cfg.post_process else noisy

        queries = random_region_queries(cfg.grid, cfg.query_count, child_rng(cfg.master_seed, trial, Stream.WORKLOAD))
        patterns = top_patterns(raw, cfg.pattern_count)

        rows = []
        for scheme in cfg.schemes:
            source = smoothed if scheme == Scheme.DSFS else noisy
            copy = fingerprinted_copy(cfg, source, scheme, world.public, trial)
            report = evaluate_utility(raw, copy, queries, patterns)
            rows.append((epsilon, scheme.value, trial, *(getattr(report, k) for k in METRICS)))
        return rows

    def summarize(self, df: pd.DataFrame) -> pd.DataFrame:
        grouped = df.groupby(["epsilon", "scheme"], sort=True)[METRICS]
        summary = grouped.mean().add_suffix("_mean").join(grouped.std(ddof=0).add_suffix("_std")).reset_index()
        summary.insert(2, "trials", grouped.size().to_numpy())
        for row in summary.itertuples(index=False):
            logger.info(
                f"utility eps={row.epsilon} {row.scheme}: diameter {row.diameter_error_jsd_mean:.4f}, "
                f"trip {row.trip_error_jsd_mean:.4f}, dtw {row.dtw_mean_mean:.3f}"
            )
        return summary


def run_utility(cfg: ExperimentConfig, save: bool = False) -> List[Dict[str, Any]]:
    """Mean and standard deviation of every utility metric per (epsilon, scheme)"""
    summary = UtilityBenchmark(cfg).run(save=save)
    return summary.to_dict(orient="records")
