#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
@File    :   benchmarks/utils.py
@Time    :   2026/10/19
@Desc    :   File formats: point / cell CSVs, model CSVs, codebooks, copy manifests, detection reports
"""

import functools
import json
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd
from pydantic_core import to_jsonable_python
from scipy import sparse

from mobility.corr import MarkovModel
from mobility.geo import Dataset, GeoPoint, Grid, Role, Trajectory
from utils.errors import DataError
from workflow.base import Scheme
from workflow.codes import BinaryCodebook, CodeKind
from workflow.distribute import CodeContext, CopyRecord

PathLike = Union[str, Path]

POINT_COLUMNS = ["traj_id", "seq", "x", "y"]
CELL_COLUMNS = ["traj_id", "seq", "ix", "iy"]
TRANSITION_COLUMNS = ["from_ix", "from_iy", "to_ix", "to_iy", "prob"]
VISIT_COLUMNS = ["ix", "iy", "visits"]


def read_json_file(json_file: PathLike, encoding="utf-8") -> Any:
    if not Path(json_file).exists():
        raise FileNotFoundError(f"json_file: {json_file} not exist")

    with open(json_file, "r", encoding=encoding) as fin:
        try:
            data = json.load(fin)
        except ValueError as e:
            raise DataError(f"read json file: {json_file} failed: {e}") from e
    return data


def write_json_file(json_file: PathLike, data: Any, encoding: str = "utf-8", indent: int = 4):
    folder_path = Path(json_file).parent
    if not folder_path.exists():
        folder_path.mkdir(parents=True, exist_ok=True)

    with open(json_file, "w", encoding=encoding) as fout:
        json.dump(data, fout, ensure_ascii=False, indent=indent, default=to_jsonable_python)


def _input_reader(func):
    """Parser and conversion failures of a reader surface as DataError"""

    @functools.wraps(func)
    def wrapper(path, *args, **kwargs):
        try:
            return func(path, *args, **kwargs)
        except (ValueError, KeyError) as e:
            raise DataError(f"malformed input {path}: {type(e).__name__}: {e}") from e

    return wrapper


def _require_columns(df: pd.DataFrame, columns: List[str], path: PathLike) -> None:
    missing = [c for c in columns if c not in df.columns]
    if missing:
        raise DataError(f"{path} is missing columns {missing}")


def _ensure_parent(path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


@_input_reader
def read_points_csv(path: PathLike) -> Dict[str, List[GeoPoint]]:
    """traj_id,seq,x,y[,t] -> points per trajectory in seq order"""
    df = pd.read_csv(path, dtype={"traj_id": str})
    _require_columns(df, POINT_COLUMNS, path)
    has_t = "t" in df.columns
    out: Dict[str, List[GeoPoint]] = {}
    for traj_id, group in df.sort_values(["traj_id", "seq"]).groupby("traj_id", sort=True):
        ts = group["t"].tolist() if has_t else [None] * len(group)
        out[str(traj_id)] = [GeoPoint(float(x), float(y), None if t is None or pd.isna(t) else float(t))
                             for x, y, t in zip(group["x"], group["y"], ts)]
    return out


def write_points_csv(points: Dict[str, List[GeoPoint]], path: PathLike) -> None:
    rows = [(tid, seq, p.x, p.y, p.t) for tid, pts in sorted(points.items()) for seq, p in enumerate(pts)]
    df = pd.DataFrame(rows, columns=POINT_COLUMNS + ["t"])
    if df["t"].isna().all():
        df = df.drop(columns="t")
    df.to_csv(_ensure_parent(path), index=False)


def write_cells_csv(d: Dataset, path: PathLike) -> None:
    rows = [(t.id, seq, c.ix, c.iy) for t in sorted(d, key=lambda t: t.id) for seq, c in enumerate(t.cells)]
    pd.DataFrame(rows, columns=CELL_COLUMNS).to_csv(_ensure_parent(path), index=False)


@_input_reader
def read_cells_csv(path: PathLike, grid: Grid, role: Role) -> Dataset:
    """Cell CSV -> Dataset; out-of-grid cells raise OutOfBounds"""
    df = pd.read_csv(path, dtype={"traj_id": str})
    _require_columns(df, CELL_COLUMNS, path)
    trajectories = []
    for traj_id, group in df.sort_values(["traj_id", "seq"]).groupby("traj_id", sort=True):
        cells = tuple(zip(group["ix"].astype(int), group["iy"].astype(int)))
        trajectories.append(Trajectory(str(traj_id), role, cells))
    return Dataset(grid, trajectories)


def write_model_csv(m: MarkovModel, prefix: PathLike) -> List[Path]:
    """{prefix}_transitions.csv and {prefix}_visits.csv"""
    grid = m.grid
    coo = m.transition.tocoo()
    fx, fy = np.divmod(coo.row, grid.n)
    tx, ty = np.divmod(coo.col, grid.n)
    trans_path = _ensure_parent(f"{prefix}_transitions.csv")
    visit_path = _ensure_parent(f"{prefix}_visits.csv")
    pd.DataFrame({"from_ix": fx, "from_iy": fy, "to_ix": tx, "to_iy": ty, "prob": coo.data}).sort_values(
        TRANSITION_COLUMNS[:4]
    ).to_csv(trans_path, index=False, float_format="%.17g")
    vx, vy = np.divmod(np.arange(grid.size), grid.n)
    pd.DataFrame({"ix": vx, "iy": vy, "visits": m.visits}).to_csv(visit_path, index=False, float_format="%.17g")
    return [trans_path, visit_path]


@_input_reader
def read_model_csv(prefix: PathLike, grid: Grid) -> MarkovModel:
    """Inverse of write_model_csv; the model constructor re-checks that rows are stochastic"""
    trans = pd.read_csv(f"{prefix}_transitions.csv", float_precision="round_trip")
    visits = pd.read_csv(f"{prefix}_visits.csv", float_precision="round_trip")
    _require_columns(trans, TRANSITION_COLUMNS, f"{prefix}_transitions.csv")
    _require_columns(visits, VISIT_COLUMNS, f"{prefix}_visits.csv")
    for frame, cols in ((trans, ["from_ix", "from_iy", "to_ix", "to_iy"]), (visits, ["ix", "iy"])):
        values = frame[cols].to_numpy()
        if values.size and (values.min() < 0 or values.max() >= grid.n):
            raise DataError(f"model cells fall outside the {grid.n}x{grid.n} grid")
    rows = trans["from_ix"].to_numpy() * grid.n + trans["from_iy"].to_numpy()
    cols = trans["to_ix"].to_numpy() * grid.n + trans["to_iy"].to_numpy()
    matrix = sparse.csr_matrix((trans["prob"].to_numpy(dtype=float), (rows, cols)), shape=(grid.size, grid.size))
    v = np.zeros(grid.size)
    v[visits["ix"].to_numpy() * grid.n + visits["iy"].to_numpy()] = visits["visits"].to_numpy(dtype=float)
    return MarkovModel(grid, matrix, v)


def write_codebook_csv(codebook: BinaryCodebook, path: PathLike) -> None:
    """user,bit_0..bit_{m-1}; Tardos books carry an extra 'bias' row"""
    columns = [f"bit_{i}" for i in range(codebook.length)]
    df = pd.DataFrame(codebook.codewords, columns=columns)
    df.insert(0, "user", [str(u) for u in range(codebook.n_users)])
    if codebook.bias is not None:
        bias = pd.DataFrame([codebook.bias], columns=columns)
        bias.insert(0, "user", "bias")
        df = pd.concat([df, bias], ignore_index=True)
    df.to_csv(_ensure_parent(path), index=False, float_format="%.17g")
    write_json_file(Path(path).with_suffix(".json"), {"kind": codebook.kind.value, "params": codebook.params})


@_input_reader
def read_codebook_csv(path: PathLike) -> BinaryCodebook:
    meta = read_json_file(Path(path).with_suffix(".json"))
    df = pd.read_csv(path, dtype={"user": str}, float_precision="round_trip")
    bias_rows = df["user"] == "bias"
    bits = df.loc[~bias_rows].drop(columns="user").to_numpy()
    bias = df.loc[bias_rows].drop(columns="user").to_numpy(dtype=float)[0] if bias_rows.any() else None
    return BinaryCodebook(CodeKind(meta["kind"]), bits.astype(np.uint8), bias=bias, params=meta["params"])


def run_manifest(config_hash: str, seed: int, **extra: Any) -> Dict[str, Any]:
    return {
        "config_hash": config_hash,
        "seed": seed,
        "created": datetime.now().strftime("%Y-%m-%d %H:%M:%S"),
        **extra,
    }


def write_copy_records(records: List[CopyRecord], out_dir: PathLike, config_hash: str, master_seed: int) -> Path:
    """One cell CSV per analyzer plus manifest.json"""
    out_dir = Path(out_dir)
    entries = []
    for r in records:
        name = f"analyzer_{r.analyzer_id:04d}.csv"
        write_cells_csv(r.copies, out_dir / name)
        entries.append({"analyzer_id": r.analyzer_id, "scheme": r.scheme.value, "seed": r.seed, "file": name})
    manifest = out_dir / "manifest.json"
    write_json_file(manifest, run_manifest(config_hash, master_seed, role=Role.FINGERPRINTED.value, copies=entries))
    return manifest


@_input_reader
def read_copy_records(manifest_path: PathLike, grid: Grid) -> List[CopyRecord]:
    """Copy records listed in a manifest written by write_copy_records"""
    manifest = read_json_file(manifest_path)
    base = Path(manifest_path).parent
    return [
        CopyRecord(e["analyzer_id"], e["seed"], Scheme(e["scheme"]), read_cells_csv(base / e["file"], grid, Role.FINGERPRINTED))
        for e in manifest["copies"]
    ]


def write_detection_report(report, path: PathLike, extra: Optional[Dict[str, Any]] = None) -> None:
    """traj_id,analyzer,score rows, a summary row, and an aggregate JSON next to the CSV"""
    rows = [(r.traj_id, a, float(s)) for r in report.per_trajectory for a, s in enumerate(r.scores)]
    rows.append(("__final__", report.final_accused, float(report.vote_counts.get(report.final_accused, 0))))
    pd.DataFrame(rows, columns=["traj_id", "analyzer", "score"]).to_csv(_ensure_parent(path), index=False)
    summary = {
        "final_accused": report.final_accused,
        "tie_flag": report.tie_flag,
        "vote_counts": report.vote_counts,
        "per_trajectory": [
            {"traj_id": r.traj_id, "accused": r.accused, "tie_flag": r.tie_flag} for r in report.per_trajectory
        ],
        **(extra or {}),
    }
    write_json_file(Path(path).with_suffix(".json"), summary)


def write_code_context(context: CodeContext, out_dir: PathLike) -> Path:
    """codebook.csv (+ .json) and marks.json, the secrets detection needs for code schemes"""
    out_dir = Path(out_dir)
    write_codebook_csv(context.codebook, out_dir / "codebook.csv")
    marks = out_dir / "marks.json"
    write_json_file(marks, {tid: m.tolist() for tid, m in sorted(context.mark_maps.items())})
    return marks


@_input_reader
def read_code_context(out_dir: PathLike) -> CodeContext:
    out_dir = Path(out_dir)
    codebook = read_codebook_csv(out_dir / "codebook.csv")
    marks = read_json_file(out_dir / "marks.json")
    return CodeContext(codebook, {tid: np.asarray(m, dtype=np.int64) for tid, m in marks.items()})
