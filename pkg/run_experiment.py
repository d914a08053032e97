#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@File    :   run_experiment.py
@Time    :   2026/10/19
@Desc    :   Command line entry: data preparation, DP release, fingerprinting, attacks, detection and experiments
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd

from benchmarks.benchmark import build_world
from benchmarks.detection import detect_codes, detect_dataset
from benchmarks.robustness import RobustnessBenchmark
from benchmarks.timing import timing_benchmark
from benchmarks.utility import evaluate_utility, random_region_queries, top_patterns
from benchmarks.utility_eval import UtilityBenchmark
from benchmarks.utils import (
    read_cells_csv,
    read_code_context,
    read_copy_records,
    read_model_csv,
    read_points_csv,
    run_manifest,
    write_cells_csv,
    write_code_context,
    write_copy_records,
    write_detection_report,
    write_json_file,
    write_model_csv,
)
from mobility.corr import build_model
from mobility.geo import Dataset, Role, preprocess_points
from mobility.synth import synth_generate
from privacy.pim import protect_dataset
from privacy.postprocess import post_process_dataset
from utils.config import ExperimentConfig, build_config, parse_key_values
from utils.errors import ConfigError, DataError, TrajectoryFingerprintError
from utils.logs import logger
from utils.seeding import Stream, child_rng, seed_int
from workflow.attacks import apply_attack
from workflow.distribute import build_code_context, distribute

ROLES = [r.value for r in Role]


def _split_ints(text: Optional[str]) -> Optional[List[int]]:
    if not text:
        return None
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise ConfigError(f"expected a comma-separated list of integers, got {text!r}") from e


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    values: Dict[str, Any] = {}
    for item in args.set or []:
        values.update(parse_key_values(item))
    shortcuts = {
        "trials": args.trials,
        "master_seed": args.master_seed,
        "scheme": args.scheme,
        "attack": args.attack,
        "epsilon": args.epsilon,
        "max_workers": args.max_workers,
        "log_level": args.log_level,
    }
    values.update({k: v for k, v in shortcuts.items() if v is not None})
    return values


# -- subcommands ------------------------------------------------------------

def cmd_preprocess(cfg: ExperimentConfig, args: argparse.Namespace) -> None:
    grid = cfg.grid
    trajectories = []
    for traj_id, points in read_points_csv(args.input).items():
        trajectories.extend(preprocess_points(traj_id, points, grid, interval=args.interval, min_length=args.min_length))
    write_cells_csv(Dataset(grid, trajectories), args.output)
    logger.info(f"Preprocessed {len(trajectories)} trajectories into {args.output}")


def cmd_build_model(cfg: ExperimentConfig, args: argparse.Namespace) -> None:
    corpus = read_cells_csv(args.input, cfg.grid, Role.RAW)
    paths = write_model_csv(build_model(corpus), args.output)
    logger.info(f"Model written to {', '.join(map(str, paths))}")


def cmd_synth(cfg: ExperimentConfig, args: argparse.Namespace) -> None:
    world = build_world(cfg)
    count = args.count or cfg.trajectory_count
    length = args.length or cfg.trajectory_length
    dataset = synth_generate(world.generating, count, length, child_rng(cfg.master_seed, Stream.DATASET))
    write_cells_csv(dataset, args.output)
    if args.model_output:
        write_model_csv(world.public, args.model_output)
    logger.info(f"Generated {count} trajectories of length {length} into {args.output}")


def cmd_protect(cfg: ExperimentConfig, args: argparse.Namespace) -> None:
    model = read_model_csv(args.model, cfg.grid)
    raw = read_cells_csv(args.input, cfg.grid, Role.RAW)
    noisy = protect_dataset(raw, model, cfg.pim_params(), seed_int(cfg.master_seed, Stream.DP))
    write_cells_csv(noisy, args.output)
    write_json_file(Path(args.output).with_suffix(".json"),
                    run_manifest(cfg.config_hash(), cfg.master_seed, role=Role.NOISY.value, epsilon=cfg.epsilon))


def cmd_postprocess(cfg: ExperimentConfig, args: argparse.Namespace) -> None:
    model = read_model_csv(args.model, cfg.grid)
    noisy = read_cells_csv(args.input, cfg.grid, Role.NOISY)
    write_cells_csv(post_process_dataset(noisy, model, cfg.tau), args.output)


def cmd_fingerprint(cfg: ExperimentConfig, args: argparse.Namespace) -> None:
    model = read_model_csv(args.model, cfg.grid)
    source = read_cells_csv(args.input, cfg.grid, Role(args.role))
    context = None
    if cfg.scheme.is_code:
        context = build_code_context(source, cfg.scheme, cfg.n_analyzers, cfg.fingerprint, cfg.master_seed)
        write_code_context(context, args.out_dir)
    records = distribute(source, cfg.n_analyzers, cfg.scheme, cfg.fingerprint, cfg.master_seed, model,
                         analyzers=_split_ints(args.analyzers), code_context=context)
    manifest = write_copy_records(records, args.out_dir, cfg.config_hash(), cfg.master_seed)
    logger.info(f"{len(records)} {cfg.scheme.value} copies listed in {manifest}")


def cmd_attack(cfg: ExperimentConfig, args: argparse.Namespace) -> None:
    model = read_model_csv(args.model, cfg.grid)
    records = {r.analyzer_id: r for r in read_copy_records(args.manifest, cfg.grid)}
    attackers = _split_ints(args.attackers)
    if attackers is None:
        rng = child_rng(cfg.master_seed, Stream.LEAK)
        ids = sorted(records)
        picked = rng.choice(len(ids), size=min(cfg.colluders, len(ids)), replace=False)
        attackers = sorted(ids[int(k)] for k in picked)
    missing = [a for a in attackers if a not in records]
    if missing:
        raise ConfigError(f"analyzers {missing} are not in {args.manifest}")
    lookups = [records[a].by_id() for a in attackers]
    first = records[attackers[0]].copies
    leaked = []
    for k, traj in enumerate(first):
        rng = child_rng(cfg.master_seed, Stream.ATTACK, k)
        leaked.append(apply_attack(cfg.attack, [lookup[traj.id] for lookup in lookups], model, cfg.attack_config, rng))
    write_cells_csv(first.with_trajectories(leaked), args.output)
    logger.info(f"{cfg.attack.value} by analyzers {attackers} written to {args.output}")


def cmd_detect(cfg: ExperimentConfig, args: argparse.Namespace) -> None:
    leaked = read_cells_csv(args.leaked, cfg.grid, Role.LEAKED)
    records = read_copy_records(args.manifest, cfg.grid)
    if records and records[0].scheme.is_code:
        if not args.originals:
            raise ConfigError("code-based detection needs --originals (the fingerprinted input)")
        originals = read_cells_csv(args.originals, cfg.grid, Role(args.role))
        report = detect_codes(leaked, originals, read_code_context(Path(args.manifest).parent))
    else:
        report = detect_dataset(leaked, records)
    write_detection_report(report, args.output, extra={"config_hash": cfg.config_hash()})
    logger.info(f"Accused analyzer {report.final_accused} (votes {report.vote_counts}, tie {report.tie_flag})")


def cmd_utility(cfg: ExperimentConfig, args: argparse.Namespace) -> None:
    if args.original and args.transformed:
        original = read_cells_csv(args.original, cfg.grid, Role.RAW)
        transformed = read_cells_csv(args.transformed, cfg.grid, Role.FINGERPRINTED)
        queries = random_region_queries(cfg.grid, cfg.query_count, child_rng(cfg.master_seed, Stream.WORKLOAD))
        report = evaluate_utility(original, transformed, queries, top_patterns(original, cfg.pattern_count))
        frame = pd.DataFrame([report.model_dump()])
        if args.output:
            frame.to_csv(args.output, index=False)
        logger.info(f"Utility: {report.model_dump()}")
        return
    UtilityBenchmark(cfg).run(save=True)


def cmd_experiment(cfg: ExperimentConfig, args: argparse.Namespace) -> None:
    RobustnessBenchmark(cfg).run(save=True)


def cmd_bench(cfg: ExperimentConfig, args: argparse.Namespace) -> None:
    table = timing_benchmark(args.count, _split_ints(args.lengths) or [100, 200, 300, 400, 500], cfg)
    out = Path(cfg.output_dir) / "timing.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(out, index=False)
    logger.info(f"Timing table written to {out}")


COMMANDS = {
    "preprocess": cmd_preprocess,
    "build-model": cmd_build_model,
    "synth": cmd_synth,
    "protect": cmd_protect,
    "postprocess": cmd_postprocess,
    "fingerprint": cmd_fingerprint,
    "attack": cmd_attack,
    "detect": cmd_detect,
    "utility": cmd_utility,
    "experiment": cmd_experiment,
    "bench": cmd_bench,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(description="Trajectory fingerprinting under differential privacy")
    ap.add_argument("--config", help="YAML or key=value config file (default: config/experiment.yaml if present)")
    ap.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config value; repeatable")
    ap.add_argument("--trials", type=int)
    ap.add_argument("--master-seed", type=int)
    ap.add_argument("--scheme")
    ap.add_argument("--attack")
    ap.add_argument("--epsilon", type=float)
    ap.add_argument("--max-workers", type=int)
    ap.add_argument("--log-level")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="points CSV -> cell CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--interval", type=float, default=60.0, help="resampling interval in seconds; 0 disables")
    p.add_argument("--min-length", type=int, default=2)

    p = sub.add_parser("build-model", help="cell CSV -> model CSVs")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True, help="output prefix")

    p = sub.add_parser("synth", help="synthetic raw trajectories")
    p.add_argument("--output", required=True)
    p.add_argument("--count", type=int)
    p.add_argument("--length", type=int)
    p.add_argument("--model-output", help="also write the public model under this prefix")

    for name, role_help in (("protect", "raw cell CSV"), ("postprocess", "noisy cell CSV")):
        p = sub.add_parser(name, help=f"{role_help} -> {'noisy' if name == 'protect' else 'post-processed'} cell CSV")
        p.add_argument("--input", required=True)
        p.add_argument("--model", required=True, help="model prefix")
        p.add_argument("--output", required=True)

    p = sub.add_parser("fingerprint", help="one fingerprinted copy per analyzer")
    p.add_argument("--input", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--role", choices=ROLES, default=Role.RAW.value)
    p.add_argument("--analyzers", help="comma-separated analyzer ids (default: all)")

    p = sub.add_parser("attack", help="leak an attacked copy")
    p.add_argument("--manifest", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--attackers", help="comma-separated analyzer ids (default: drawn from the seed)")

    p = sub.add_parser("detect", help="accuse an analyzer")
    p.add_argument("--leaked", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--originals", help="the fingerprinted input; needed for code schemes")
    p.add_argument("--role", choices=ROLES, default=Role.RAW.value)

    p = sub.add_parser("utility", help="utility table, or the metrics of one dataset pair")
    p.add_argument("--original")
    p.add_argument("--transformed")
    p.add_argument("--output")

    sub.add_parser("experiment", help="robustness sweep")

    p = sub.add_parser("bench", help="fingerprinting time per trajectory length")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--lengths", help="comma-separated lengths (default: 100,200,300,400,500)")
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = build_config(args.config, _overrides(args))
        logger.configure(level=cfg.log_level, log_dir=cfg.log_dir)
        COMMANDS[args.command](cfg, args)
    except TrajectoryFingerprintError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except FileNotFoundError as e:
        logger.error(f"missing input: {e}")
        return DataError.exit_code
    except (ValueError, KeyError) as e:
        # unparsable files or fields that no reader translated
        logger.error(f"malformed input: {type(e).__name__}: {e}")
        return DataError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
