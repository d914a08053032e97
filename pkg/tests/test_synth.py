import numpy as np
import pytest
from scipy import sparse

from mobility.corr import MarkovModel
from mobility.geo import Cell, Grid, Role
from mobility.synth import random_mobility_model, straight_line, synth_generate, synth_walk
from utils.errors import DegenerateInput


def test_generated_transitions_are_supported_by_the_model(generating10, dataset10, grid10):
    for t in dataset10:
        idx = t.indices(grid10)
        for a, b in zip(idx[:-1], idx[1:]):
            assert generating10.prob(int(a), int(b)) > 0


def test_shape_and_roles(dataset10):
    assert len(dataset10) == 12
    assert all(len(t) == 30 and t.role == Role.RAW for t in dataset10)
    assert dataset10.ids()[0] == "t0000"


def test_same_seed_same_data(generating10):
    a = synth_generate(generating10, 5, 20, np.random.default_rng(3))
    b = synth_generate(generating10, 5, 20, np.random.default_rng(3))
    assert a.trajectories == b.trajectories


def test_deterministic_chain_gives_deterministic_walk():
    grid = Grid(n=3, x_max=3.0, y_max=3.0)
    # every cell moves to the next flat index, the last wraps to 0
    size = grid.size
    matrix = sparse.csr_matrix((np.ones(size), (np.arange(size), (np.arange(size) + 1) % size)), shape=(size, size))
    m = MarkovModel(grid, matrix, np.ones(size))
    walk = synth_walk(m, 4, 7, np.random.default_rng(0))
    assert walk.tolist() == [4, 5, 6, 7, 8, 0, 1]


def test_support_limits_outgoing_moves(grid10):
    m = random_mobility_model(grid10, np.random.default_rng(1), support=2)
    counts = np.diff(m.transition.indptr)
    assert counts.max() <= 2 and counts.min() >= 1


def test_empirical_frequencies_converge(generating10):
    rng = np.random.default_rng(11)
    start = 45
    walk = synth_walk(generating10, start, 100_000, rng)
    src, dst = walk[:-1], walk[1:]
    busiest = np.bincount(src).argmax()
    mask = src == busiest
    total = int(mask.sum())
    cols, probs = generating10.row(int(busiest))
    for c, p in zip(cols, probs):
        freq = np.mean(dst[mask] == c)
        sigma = np.sqrt(p * (1 - p) / total)
        assert abs(freq - p) <= 4 * sigma + 1e-12


def test_straight_line(grid30):
    line = straight_line(grid30, 30)
    assert line.cells[0] == Cell(0, 15) and line.cells[-1] == Cell(29, 15)
    with pytest.raises(DegenerateInput):
        straight_line(grid30, 31)
