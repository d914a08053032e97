import numpy as np
import pytest

from mobility.geo import Role
from utils.errors import DegenerateInput, UnknownTrajectory
from utils.seeding import Stream, seed_int
from workflow.base import FingerprintConfig, Scheme
from workflow.codes import CodeKind, read_bits
from workflow.distribute import build_code_context, distribute

CFG = FingerprintConfig()


@pytest.mark.parametrize("scheme", [Scheme.DSFS, Scheme.PFS])
def test_one_fingerprinted_copy_per_analyzer(dataset10, public10, scheme):
    records = distribute(dataset10, 4, scheme, CFG, 11, public10)
    assert [r.analyzer_id for r in records] == [0, 1, 2, 3]
    for r in records:
        assert r.scheme == scheme and r.seed == seed_int(11, Stream.FINGERPRINT, r.analyzer_id)
        assert r.copies.ids() == dataset10.ids()
        assert r.copies.roles == {Role.FINGERPRINTED}
        assert [len(t) for t in r.copies] == [len(t) for t in dataset10]


def test_copies_differ_between_analyzers(dataset10, public10):
    a, b = distribute(dataset10, 2, Scheme.DSFS, CFG, 11, public10)
    assert any(x.cells != y.cells for x, y in zip(a.copies, b.copies))


def test_distribution_is_reproducible(dataset10, public10):
    first = distribute(dataset10, 3, Scheme.DSFS, CFG, 11, public10)
    again = distribute(dataset10, 3, Scheme.DSFS, CFG, 11, public10)
    assert [r.copies.trajectories for r in first] == [r.copies.trajectories for r in again]
    other = distribute(dataset10, 3, Scheme.DSFS, CFG, 12, public10)
    assert [r.copies.trajectories for r in first] != [r.copies.trajectories for r in other]


def test_subsets_match_the_full_distribution(dataset10, public10):
    full = distribute(dataset10, 4, Scheme.DSFS, CFG, 11, public10)
    wanted = dataset10.ids()[3:6]
    part = distribute(dataset10, 4, Scheme.DSFS, CFG, 11, public10, trajectory_ids=wanted, analyzers=[2])
    assert len(part) == 1 and part[0].analyzer_id == 2
    expected = full[2].by_id()
    assert [t for t in part[0].copies] == [expected[tid] for tid in wanted]


def test_trajectory_index_pins_the_streams(dataset10, public10):
    full = distribute(dataset10, 2, Scheme.DSFS, CFG, 11, public10)
    index = {t.id: k for k, t in enumerate(dataset10)}
    sub = dataset10.with_trajectories(dataset10.trajectories[5:8])
    moved = distribute(sub, 2, Scheme.DSFS, CFG, 11, public10, trajectory_index=index)
    for a in range(2):
        expected = full[a].by_id()
        assert all(t == expected[t.id] for t in moved[a].copies)


def test_distribute_errors(dataset10, public10):
    with pytest.raises(DegenerateInput):
        distribute(dataset10, 0, Scheme.DSFS, CFG, 11, public10)
    with pytest.raises(DegenerateInput):
        distribute(dataset10, 1, Scheme.TARDOS, CFG, 11, public10)
    with pytest.raises(UnknownTrajectory):
        distribute(dataset10, 2, Scheme.DSFS, CFG, 11, public10, trajectory_ids=["nope"])


def test_boneh_shaw_distribution_embeds_codewords(dataset10, public10):
    context = build_code_context(dataset10, Scheme.BONEH_SHAW, 4, CFG, 11)
    assert context.codebook.kind == CodeKind.BONEH_SHAW
    # block length defaults to trajectory length // (n - 1)
    assert context.codebook.params["d"] == 30 // 3
    records = distribute(dataset10, 4, Scheme.BONEH_SHAW, CFG, 11, public10, code_context=context)
    for r in records:
        t = r.copies.trajectories[0]
        original = dataset10.trajectories[0]
        bits = read_bits(t, original, context.mark_maps[t.id], dataset10.grid)
        assert np.array_equal(bits, context.codebook.codewords[r.analyzer_id, : len(t)])


def test_tardos_context_is_seeded(dataset10):
    a = build_code_context(dataset10, Scheme.TARDOS, 5, CFG, 11)
    b = build_code_context(dataset10, Scheme.TARDOS, 5, CFG, 11)
    assert np.array_equal(a.codebook.codewords, b.codebook.codewords)
    assert a.codebook.length == 30
    assert all(np.array_equal(a.mark_maps[k], b.mark_maps[k]) for k in a.mark_maps)
