import pickle

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import sparse

from conftest import ORACLE_EXAMPLES, dataset, traj
from mobility.corr import (
    PROBABLE_CACHE_SIZE,
    MarkovModel,
    build_model,
    draw_index,
    emission_distribution,
    emission_weights,
    tau_closer_set,
    tau_probable_set,
)
from mobility.geo import Cell, Grid, Role, neighbors
from utils.errors import DataError, EmptyCorpus


def test_build_model_counts_pairs(grid10):
    d = dataset(grid10, [traj([(0, 0), (0, 1), (0, 0), (0, 1)]), traj([(0, 0), (1, 1)], traj_id="u")])
    m = build_model(d)
    a = grid10.index(Cell(0, 0))
    assert m.prob(a, grid10.index(Cell(0, 1))) == pytest.approx(2 / 3)
    assert m.prob(a, grid10.index(Cell(1, 1))) == pytest.approx(1 / 3)
    assert m.visits[a] == 3


def test_single_pair_corpus(grid10):
    m = build_model(dataset(grid10, [traj([(0, 0), (0, 1)])]))
    assert m.prob(0, 1) == 1.0


def test_empty_corpus_raises(grid10):
    with pytest.raises(EmptyCorpus):
        build_model(dataset(grid10, []))


def test_unvisited_rows_fall_back_to_moore(grid10):
    m = build_model(dataset(grid10, [traj([(0, 0), (0, 1)])]))
    k = grid10.index(Cell(5, 5))
    cols, probs = m.row(k)
    assert set(grid10.cell(c) for c in cols) == neighbors(Cell(5, 5), grid10, include_self=False)
    assert probs == pytest.approx(np.full(8, 1 / 8))


def test_rows_are_stochastic(public10):
    sums = np.asarray(public10.transition.sum(axis=1)).ravel()
    assert np.allclose(sums, 1.0, atol=1e-9)


def test_non_stochastic_matrix_rejected(grid10):
    bad = sparse.csr_matrix(([0.5], ([0], [1])), shape=(grid10.size, grid10.size))
    with pytest.raises(DataError):
        MarkovModel(grid10, bad, np.zeros(grid10.size))


def test_tau_probable_set_threshold(grid10):
    m = build_model(dataset(grid10, [traj([(0, 0), (0, 1), (0, 0), (0, 1), (0, 0), (1, 1)])]))
    everything = tau_probable_set(m, Cell(0, 0), 0.0)
    assert everything.members == frozenset({Cell(0, 1), Cell(1, 1)})
    assert tau_probable_set(m, Cell(0, 0), 0.5).members == frozenset({Cell(0, 1)})
    assert len(tau_probable_set(m, Cell(0, 0), 1.0)) == 0


@given(st.integers(0, 99), st.floats(0, 1), st.floats(0, 1))
def test_tau_probable_sets_shrink_as_tau_grows(k, t1, t2):
    m = MarkovModel.uniform_moore(Grid(n=10, x_max=10.0, y_max=10.0))
    lo, hi = sorted((t1, t2))
    a = set(m.probable(k, lo)[0].tolist())
    b = set(m.probable(k, hi)[0].tolist())
    assert b <= a


def test_tau_closer_set_matches_brute_force(moore10, grid10):
    rng = np.random.default_rng(0)
    for _ in range(300):
        prev = Cell(*rng.integers(0, 10, size=2))
        target = Cell(*rng.integers(0, 10, size=2))
        got = tau_closer_set(moore10, prev, target, 0.0).members
        probable = tau_probable_set(moore10, prev, 0.0).members
        d0 = (prev.ix - target.ix) ** 2 + (prev.iy - target.iy) ** 2
        want = {c for c in probable if (c.ix - target.ix) ** 2 + (c.iy - target.iy) ** 2 <= d0}
        assert got == frozenset(want)


GRID4 = Grid(n=4, x_max=4.0, y_max=4.0)
all_cells = st.tuples(st.integers(0, 3), st.integers(0, 3))


@settings(max_examples=ORACLE_EXAMPLES)
@given(st.integers(0, 2**32 - 1), all_cells, all_cells, st.sampled_from([0.0, 0.05, 0.1, 0.2, 0.25, 0.5, 1.0]))
def test_tau_sets_match_exhaustive_enumeration(seed, prev, target, tau):
    counts = np.random.default_rng(seed).integers(0, 3, size=(16, 16))
    m = MarkovModel.from_counts(GRID4, sparse.csr_matrix(counts), np.ones(16))
    prev, target = Cell(*prev), Cell(*target)
    a = GRID4.index(prev)
    everything = [Cell(ix, iy) for ix in range(4) for iy in range(4)]
    probable = {c for c in everything if 0 < m.prob(a, GRID4.index(c)) and m.prob(a, GRID4.index(c)) >= tau}
    assert tau_probable_set(m, prev, tau).members == frozenset(probable)

    def d2(c):
        return (c.ix - target.ix) ** 2 + (c.iy - target.iy) ** 2

    assert tau_closer_set(m, prev, target, tau).members == frozenset(c for c in probable if d2(c) <= d2(prev))


def test_tau_closer_set_contains_target_when_probable(moore10):
    prev, target = Cell(4, 4), Cell(5, 5)
    assert target in tau_closer_set(moore10, prev, target, 0.0)


def test_emission_weights_follow_visits(grid10):
    m = build_model(dataset(grid10, [traj([(0, 0), (0, 1), (0, 1), (0, 1)])]))
    dist = emission_distribution(m, Cell(0, 0))
    assert dist[Cell(0, 1)] == pytest.approx(3 / 4)
    assert dist[Cell(0, 0)] == pytest.approx(1 / 4)
    assert dist[Cell(1, 0)] == 0.0


def test_emission_weights_uniform_without_visits(moore10):
    nbrs, probs = emission_weights(moore10, 55)
    assert nbrs.size == 9
    assert probs == pytest.approx(np.full(9, 1 / 9))


def test_probable_cache_does_not_survive_pickling(moore10):
    moore10.probable(0, 0.1)
    clone = pickle.loads(pickle.dumps(moore10))
    assert clone._probable.cache_info().currsize == 0
    assert np.array_equal(clone.probable(0, 0.1)[0], moore10.probable(0, 0.1)[0])


def test_step_propagates_distribution(grid10):
    m = build_model(dataset(grid10, [traj([(0, 0), (0, 1)], role=Role.RAW)]))
    start = np.zeros(grid10.size)
    start[0] = 1.0
    after = m.step(start)
    assert after[1] == pytest.approx(1.0)


def test_sample_next_stays_in_the_row(public10, rng):
    for k in (0, 17, 55):
        cols, _ = public10.row(k)
        assert all(public10.sample_next(k, rng) in cols for _ in range(20))


def test_probable_cache_is_bounded(grid10):
    m = MarkovModel.uniform_moore(grid10)
    assert m._probable.cache_info().maxsize == PROBABLE_CACHE_SIZE
    for k in range(grid10.size):
        m.probable(k, 0.1)
        m.probable(k, 0.1)
    info = m._probable.cache_info()
    assert info.currsize == grid10.size and info.hits == grid10.size


def test_isotropic_model_reaches_two_cells():
    grid = Grid(n=9, x_max=9.0, y_max=9.0)
    m = MarkovModel.isotropic(grid)
    center = grid.index(Cell(4, 4))
    cols, probs = m.row(center)
    offsets = {(k // 9 - 4, k % 9 - 4) for k in cols.tolist()}
    # distance at most sqrt(5): the 5x5 box without its corners and centre
    assert len(offsets) == 20 and (0, 0) not in offsets and (2, 2) not in offsets
    assert m.prob(center, grid.index(Cell(6, 4))) == pytest.approx(
        np.exp(-2.0) / (4 * np.exp(-0.5) + 4 * np.exp(-1.0) + 4 * np.exp(-2.0) + 8 * np.exp(-2.5))
    )
    assert probs.min() >= 0.005
    corner_cols, corner_probs = m.row(0)
    assert corner_cols.size == 7 and corner_probs.sum() == pytest.approx(1.0)
    with pytest.raises(DataError):
        MarkovModel.isotropic(grid, radius=0.5)


def test_draw_index_is_proportional(rng):
    weights = np.array([0.0, 1.0, 3.0])
    draws = np.array([draw_index(weights, rng) for _ in range(4000)])
    assert not np.any(draws == 0)
    assert np.mean(draws == 2) == pytest.approx(0.75, abs=0.03)
