import numpy as np
import pytest

from conftest import dataset, traj
from mobility.corr import build_model
from mobility.geo import Cell, Role
from privacy.postprocess import closest_member, post_process, post_process_dataset
from utils.errors import RoleError


def test_consistent_points_are_kept(moore10):
    noisy = traj([(5, 5), (5, 6), (6, 7)], role=Role.NOISY)
    out = post_process(noisy, moore10, 0.1)
    assert out.cells == noisy.cells
    assert out.role == Role.POST_PROCESSED


def test_far_jump_is_pulled_toward_the_noisy_point(moore10):
    noisy = traj([(5, 5), (5, 9)], role=Role.NOISY)
    out = post_process(noisy, moore10, 0.1)
    assert out.cells == (Cell(5, 5), Cell(5, 6))


def test_replacement_chains_through_the_output(moore10):
    noisy = traj([(5, 5), (5, 9), (5, 9)], role=Role.NOISY)
    out = post_process(noisy, moore10, 0.1)
    # the third point is judged against the replaced second one
    assert out.cells == (Cell(5, 5), Cell(5, 6), Cell(5, 7))


def test_pit_when_best_candidate_is_previous(grid10):
    m = build_model(dataset(grid10, [traj([(5, 5), (5, 5), (5, 5), (4, 4)])]))
    noisy = traj([(5, 5), (8, 8)], role=Role.NOISY)
    assert post_process(noisy, m, 0.1).cells == (Cell(5, 5), Cell(8, 8))


def test_pit_when_noisy_point_is_nearer_than_candidates(grid10):
    m = build_model(dataset(grid10, [traj([(5, 5), (7, 5)])]))
    noisy = traj([(5, 5), (5, 4)], role=Role.NOISY)
    assert post_process(noisy, m, 0.1).cells == (Cell(5, 5), Cell(5, 4))


def test_first_point_untouched(moore10):
    noisy = traj([(9, 9), (0, 0)], role=Role.NOISY)
    assert post_process(noisy, moore10, 0.1).cells[0] == Cell(9, 9)


def test_empty_probable_set_keeps_noisy_point(moore10):
    noisy = traj([(5, 5), (0, 0)], role=Role.NOISY)
    # tau above every row entry empties the set
    assert post_process(noisy, moore10, 0.9).cells == noisy.cells


def test_closest_member_ties(grid10):
    members = np.array([grid10.index(Cell(4, 6)), grid10.index(Cell(6, 6))])
    target = grid10.index(Cell(5, 9))
    assert closest_member(grid10, members, np.array([0.2, 0.7]), target) == members[1]
    assert closest_member(grid10, members, np.array([0.5, 0.5]), target) == members[0]


def test_only_noisy_input_is_accepted(moore10):
    for role in (Role.RAW, Role.FINGERPRINTED, Role.POST_PROCESSED):
        with pytest.raises(RoleError):
            post_process(traj([(1, 1), (2, 2)], role=role), moore10, 0.1)


def test_dataset_version(moore10, grid10):
    d = dataset(grid10, [traj([(5, 5), (5, 9)], role=Role.NOISY, traj_id=f"n{k}") for k in range(3)])
    out = post_process_dataset(d, moore10, 0.1)
    assert out.roles == {Role.POST_PROCESSED}
    assert all(t.cells[1] == Cell(5, 6) for t in out)
