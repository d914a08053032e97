"""Desk-scale reproductions on synthetic data. Run with ``pytest -m slow``."""

import numpy as np
import pytest

from benchmarks.benchmark import build_world, trial_dataset
from benchmarks.detection import majority, majority_vote_accuracy
from benchmarks.robustness import run_robustness
from benchmarks.timing import timing_benchmark
from benchmarks.utility_eval import run_utility
from mobility.corr import MarkovModel
from mobility.geo import Grid
from mobility.synth import straight_line
from privacy.pim import protect_dataset
from privacy.postprocess import post_process_dataset
from utils.config import ExperimentConfig
from workflow.attacks import Attack
from workflow.base import FingerprintConfig, Scheme
from workflow.codes import tardos_generate, tardos_score
from workflow.dsfs import dsfs_fingerprint
from workflow.pfs import pfs_fingerprint

pytestmark = pytest.mark.slow

DESK = ExperimentConfig(trials=200)


def test_tardos_traces_a_majority_coalition():
    rng = np.random.default_rng(2)
    hits = 0
    for _ in range(200):
        book = tardos_generate(20, 3, 0.01, rng)
        coalition = rng.choice(20, size=3, replace=False)
        leaked = (book.codewords[coalition].sum(axis=0) >= 2).astype(np.uint8)
        hits += tardos_score(leaked, book).accused in coalition
    assert hits / 200 >= 0.9


def test_tardos_traces_a_lone_leaker():
    rng = np.random.default_rng(12)
    hits = 0
    for _ in range(200):
        book = tardos_generate(20, 3, 0.01, rng)
        assert book.length == 6300
        leaker = int(rng.integers(20))
        hits += tardos_score(book.codewords[leaker].copy(), book).accused == leaker
    assert hits / 200 >= 0.99


def test_random_flipping_is_survived():
    (result,) = run_robustness(DESK.with_updates(attack=Attack.RANDOM_FLIP, p_r=0.4))
    assert result.detection_accuracy >= 0.95


def test_probabilistic_collusion_ordering():
    cfg = DESK.with_updates(attack=Attack.PROBABILISTIC_COLLUSION, c=3)
    accuracy = {s: run_robustness(cfg.with_updates(scheme=s))[0].detection_accuracy
                for s in (Scheme.DSFS, Scheme.TARDOS, Scheme.BONEH_SHAW)}
    assert accuracy[Scheme.DSFS] >= 0.9
    assert accuracy[Scheme.DSFS] - accuracy[Scheme.TARDOS] >= 0.1
    assert accuracy[Scheme.TARDOS] - accuracy[Scheme.BONEH_SHAW] >= 0.1


def test_post_processing_restores_correlations():
    world = build_world(DESK)
    raw = trial_dataset(DESK.with_updates(trajectory_count=30), world, 0)
    noisy = protect_dataset(raw, world.public, DESK.pim_params(0.9), 3)
    smoothed = post_process_dataset(noisy, world.public, DESK.tau)

    def consistent(d):
        pairs = [world.public.prob(int(a), int(b)) >= DESK.tau
                 for t in d for a, b in zip(t.indices(d.grid)[:-1], t.indices(d.grid)[1:])]
        return np.mean(pairs)

    assert consistent(smoothed) >= 2 * consistent(noisy)


def test_forced_deviation_contrast():
    grid = Grid(n=140, x_max=140.0, y_max=140.0)
    m = MarkovModel.isotropic(grid)
    line = straight_line(grid, 100, start=(20, 70))
    truth = np.asarray(line.cells)
    rng = np.random.default_rng(9)
    good = 0
    for _ in range(100):
        dsfs = np.asarray(dsfs_fingerprint(line, m, FingerprintConfig(), rng).cells)
        pfs = np.asarray(pfs_fingerprint(line, m, 0.4, 0.005, rng).cells)
        good += np.hypot(*(dsfs - truth).T).max() < 5 and np.hypot(*(pfs - truth).T).max() > 20
    assert good >= 80


def test_majority_vote_lifts_per_trajectory_accuracy():
    rng = np.random.default_rng(4)
    q, k, analyzers = 0.9, 11, 100
    wins = 0
    for _ in range(20_000):
        right = rng.random(k) < q
        wins += majority(np.where(right, 0, rng.integers(1, analyzers, size=k)))[0] == 0
    predicted = majority_vote_accuracy(q, k)
    assert predicted >= 0.99
    assert abs(wins / 20_000 - predicted) < 0.01


def test_fingerprinting_time_scales_with_length():
    table = timing_benchmark(100, [100, 400, 500], DESK)
    seconds = dict(zip(table["length"], table["seconds"]))
    assert seconds[500] < 30
    assert 2.5 <= seconds[400] / seconds[100] <= 6


@pytest.mark.parametrize(
    "attack, updates",
    [
        (Attack.RANDOM_FLIP, {"p_r": 0.8}),
        (Attack.MAJORITY_COLLUSION, {"c": 6}),
        (Attack.PROBABILISTIC_COLLUSION, {"c": 6}),
    ],
)
def test_dsfs_survives_attacks_on_protected_data(attack, updates):
    cfg = DESK.with_updates(epsilon=1.7, scheme=Scheme.DSFS, attack=attack, **updates)
    (result,) = run_robustness(cfg)
    assert result.detection_accuracy >= 0.95


def test_correlation_flip_knee():
    cfg = DESK.with_updates(attack=Attack.CORRELATION_FLIP, sweep_variable="p_c", sweep_values=[0.2, 0.4, 0.6, 0.8])
    accuracy = {r.sweep_value: r.detection_accuracy for r in run_robustness(cfg)}
    assert min(accuracy[0.2], accuracy[0.4], accuracy[0.6]) >= 0.9
    assert accuracy[0.8] < accuracy[0.6]


def test_dsfs_keeps_the_most_utility():
    rows = run_utility(DESK.with_updates(trials=20))
    means = {(row["epsilon"], row["scheme"]): row for row in rows}
    metrics = ["diameter_error_jsd_mean", "trip_error_jsd_mean", "dtw_mean_mean"]
    for eps in DESK.epsilons:
        ours = means[(eps, Scheme.DSFS.value)]
        for other in (Scheme.PFS, Scheme.BONEH_SHAW, Scheme.TARDOS):
            theirs = means[(eps, other.value)]
            assert all(ours[m] < theirs[m] for m in metrics), (eps, other)
    for m in metrics:
        series = [means[(eps, Scheme.DSFS.value)][m] for eps in sorted(DESK.epsilons)]
        assert all(a > b for a, b in zip(series, series[1:])), m
