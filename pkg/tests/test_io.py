from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from benchmarks.detection import detect_codes, detect_dataset
from benchmarks.utils import (
    read_cells_csv,
    read_code_context,
    read_copy_records,
    read_json_file,
    read_model_csv,
    read_points_csv,
    write_cells_csv,
    write_code_context,
    write_copy_records,
    write_detection_report,
    write_model_csv,
    write_points_csv,
)
from mobility.geo import GeoPoint, Role
from utils.errors import DataError, OutOfBounds
from workflow.base import FingerprintConfig, Scheme
from workflow.distribute import build_code_context, distribute

SAMPLE = Path(__file__).resolve().parents[1] / "data" / "sample_points.csv"


def test_sample_points_are_grouped_in_seq_order():
    points = read_points_csv(SAMPLE)
    assert sorted(points) == ["a", "b", "c"]
    assert all(p.t is not None for p in points["a"])
    df = pd.read_csv(SAMPLE, dtype={"traj_id": str})
    first = df[df.traj_id == "a"].sort_values("seq").iloc[0]
    assert (points["a"][0].x, points["a"][0].y) == (first.x, first.y)


def test_missing_columns_are_data_errors(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("traj_id,x,y\na,1,2\n", encoding="utf-8")
    with pytest.raises(DataError):
        read_points_csv(path)


def test_cells_outside_the_grid_are_rejected(tmp_path, grid10):
    path = tmp_path / "cells.csv"
    path.write_text("traj_id,seq,ix,iy\na,0,1,1\na,1,10,1\n", encoding="utf-8")
    with pytest.raises(OutOfBounds):
        read_cells_csv(path, grid10, Role.RAW)


def test_model_csv_keeps_exact_probabilities(tmp_path, public10):
    write_model_csv(public10, tmp_path / "public")
    back = read_model_csv(tmp_path / "public", public10.grid)
    assert (back.transition != public10.transition).nnz == 0
    assert np.array_equal(back.visits, public10.visits)


def test_model_csv_rejects_non_stochastic_rows(tmp_path, moore10):
    write_model_csv(moore10, tmp_path / "m")
    trans = pd.read_csv(tmp_path / "m_transitions.csv")
    trans.loc[0, "prob"] = 0.9
    trans.to_csv(tmp_path / "m_transitions.csv", index=False)
    with pytest.raises(DataError):
        read_model_csv(tmp_path / "m", moore10.grid)


def test_copy_manifest_drives_detection(tmp_path, dataset10, public10):
    records = distribute(dataset10, 3, Scheme.PFS, FingerprintConfig(), 2, public10)
    manifest = write_copy_records(records, tmp_path / "copies", "abc", 2)
    meta = read_json_file(manifest)
    assert meta["config_hash"] == "abc" and meta["seed"] == 2 and len(meta["copies"]) == 3
    back = read_copy_records(manifest, dataset10.grid)
    assert [r.analyzer_id for r in back] == [0, 1, 2]
    assert all(b.copies.trajectories == r.copies.trajectories for b, r in zip(back, records))

    leaked = records[1].copies.with_trajectories([t.evolve(t.cells, Role.LEAKED) for t in records[1].copies])
    report = detect_dataset(leaked, back)
    write_detection_report(report, tmp_path / "detection.csv", {"scheme": "pfs"})
    summary = read_json_file(tmp_path / "detection.json")
    assert summary["final_accused"] == 1 and summary["scheme"] == "pfs"
    rows = pd.read_csv(tmp_path / "detection.csv")
    assert rows.iloc[-1].traj_id == "__final__" and len(rows) == len(dataset10) * 3 + 1


def test_stored_code_context_still_accuses(tmp_path, dataset10, public10):
    cfg = FingerprintConfig()
    context = build_code_context(dataset10, Scheme.TARDOS, 4, cfg, 8)
    write_code_context(context, tmp_path)
    back = read_code_context(tmp_path)
    assert back.codebook.kind == context.codebook.kind
    assert np.allclose(back.codebook.bias, context.codebook.bias)
    records = distribute(dataset10, 4, Scheme.TARDOS, cfg, 8, public10, code_context=context)
    write_cells_csv(records[3].copies, tmp_path / "leak.csv")
    leaked = read_cells_csv(tmp_path / "leak.csv", dataset10.grid, Role.LEAKED)
    assert detect_codes(leaked, dataset10, back).final_accused == 3


def test_points_csv_drops_an_empty_time_column(tmp_path):
    path = tmp_path / "points.csv"
    write_points_csv({"b": [GeoPoint(1.0, 2.0), GeoPoint(1.5, 2.5)], "a": [GeoPoint(0.0, 0.0)]}, path)
    df = pd.read_csv(path)
    assert list(df.columns) == ["traj_id", "seq", "x", "y"]
    assert df["traj_id"].tolist() == ["a", "b", "b"]
    assert read_points_csv(path)["b"][1] == GeoPoint(1.5, 2.5)


def test_malformed_files_are_data_errors(tmp_path, grid10):
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("traj_id,seq,ix,iy\na,0,1,1\na,1,2,2,9,9\n", encoding="utf-8")
    words = tmp_path / "words.csv"
    words.write_text("traj_id,seq,ix,iy\na,0,one,1\n", encoding="utf-8")
    for path in (ragged, words):
        with pytest.raises(DataError):
            read_cells_csv(path, grid10, Role.RAW)

    broken = tmp_path / "manifest.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(DataError):
        read_json_file(broken)
    unknown = tmp_path / "unknown.json"
    unknown.write_text('{"copies": [{"analyzer_id": 0, "seed": 1, "scheme": "zebra", "file": "a.csv"}]}', encoding="utf-8")
    with pytest.raises(DataError):
        read_copy_records(unknown, grid10)
    with pytest.raises(DataError):
        read_copy_records(tmp_path / "ragged.csv", grid10)
