"""File formats: point/matrix CSVs, query CSVs, and the fitted-model file.

The model file is versioned human-readable text so fitted models diff
cleanly; parsing an unknown version is refused outright.
"""

from __future__ import annotations

import csv
import datetime
import io
import math

import numpy as np

from .bounds import RiskReport
from .errors import DataError
from .metric import Dataset
from .srm import Hypothesis

MODEL_FORMAT = "lipreg-model/1"


def load_points_csv(path) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Read a point file: header ``id,x1..xd,label``; returns (coords, labels, ids)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0].strip() != "id" or header[-1].strip() != "label":
            raise DataError("point file needs a header starting with id and ending with label")
        dim = len(header) - 2
        if dim < 1:
            raise DataError("point file has no coordinate columns")
        ids, coords, labels = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != dim + 2:
                raise DataError(f"row {lineno}: expected {dim + 2} columns, got {len(row)}")
            try:
                coords.append([float(v) for v in row[1:-1]])
                label = float(row[-1])
            except ValueError as exc:
                raise DataError(f"row {lineno}: {exc}") from exc
            if not (0 <= label <= 1) or not math.isfinite(label):
                raise DataError(f"row {lineno}: label {row[-1]} outside [0,1]")
            ids.append(row[0].strip())
            labels.append(label)
    if not ids:
        raise DataError("point file has no data rows")
    return np.asarray(coords), np.asarray(labels), ids


def load_matrix_csv(matrix_path, labels_path) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Read an explicit distance matrix plus its ``id,label`` companion file."""
    with open(labels_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or [h.strip() for h in header[:2]] != ["id", "label"]:
            raise DataError("label file needs an id,label header")
        ids, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                label = float(row[1])
            except (ValueError, IndexError) as exc:
                raise DataError(f"label row {lineno}: {exc}") from exc
            if not (0 <= label <= 1) or not math.isfinite(label):
                raise DataError(f"label row {lineno}: label outside [0,1]")
            ids.append(row[0].strip())
            labels.append(label)
    try:
        dm = np.loadtxt(matrix_path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise DataError(f"bad distance matrix: {exc}") from exc
    if dm.shape != (len(ids), len(ids)):
        raise DataError("distance matrix shape does not match the label file")
    return dm, np.asarray(labels), ids


def load_queries_csv(path, matrix_mode: bool, n: int | None = None):
    """Read query rows: ``id,x1..xd`` or, in matrix mode, ``id,d1..dn``."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0].strip() != "id":
            raise DataError("query file needs a header starting with id")
        ids, rows = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                vec = [float(v) for v in row[1:]]
            except ValueError as exc:
                raise DataError(f"query row {lineno}: {exc}") from exc
            if matrix_mode and n is not None and len(vec) != n:
                raise DataError(f"query row {lineno}: need {n} distances")
            ids.append(row[0].strip())
            rows.append(vec)
    return ids, np.asarray(rows)


def serialize_model(h: Hypothesis, d: Dataset, ids: list[str], delta_conf: float,
                    spanner_delta: float, timestamp: str | None = None) -> str:
    rep = h.risk_report
    out = io.StringIO()
    out.write(f"format: {MODEL_FORMAT}\n")
    ts = timestamp or datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    out.write(f"fitted: {ts}\n")
    out.write(f"q: {h.q}\n")
    out.write(f"eta: {h.eta!r}\n")
    out.write(f"delta: {delta_conf!r}\n")
    out.write(f"lipschitz: {h.lipschitz_budget!r}\n")
    out.write(f"penalty_eps: {(rep.penalty_eps if rep else 1.0)!r}\n")
    out.write(f"stratum: {rep.stratum_k if rep else 1}\n")
    out.write(f"spanner_delta: {spanner_delta!r}\n")
    out.write(f"metric: {d.metric_name}\n")
    out.write(f"scale: {d.scale!r}\n")
    out.write(f"points: {d.n}\n")
    coords = d.points if d.metric_name != "matrix" else None
    for i, pid in enumerate(ids):
        parts = [pid, repr(float(h.values[i]))]
        if coords is not None:
            parts.extend(repr(float(c)) for c in coords[i])
        out.write(" ".join(parts) + "\n")
    return out.getvalue()


def parse_model(text: str):
    """Inverse of serialize_model; returns (hypothesis, dataset, ids, meta)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("format:"):
        raise DataError("not a model file")
    version = lines[0].split(":", 1)[1].strip()
    if version != MODEL_FORMAT:
        raise DataError(f"unsupported model format {version!r}")
    meta: dict[str, str] = {}
    body_at = None
    for k, ln in enumerate(lines[1:], start=1):
        key, _, value = ln.partition(":")
        if _ == "":
            body_at = k
            break
        meta[key.strip()] = value.strip()
        if key.strip() == "points":
            body_at = k + 1
            break
    n = int(meta["points"])
    rows = lines[body_at : body_at + n]
    if len(rows) != n:
        raise DataError("model file truncated")
    ids, values, coords = [], [], []
    for ln in rows:
        parts = ln.split()
        ids.append(parts[0])
        values.append(float(parts[1]))
        if len(parts) > 2:
            coords.append([float(v) for v in parts[2:]])
    metric = meta["metric"]
    values = np.asarray(values)
    if metric == "matrix":
        d = Dataset(labels=values, dmatrix=np.zeros((n, n)), metric_name="matrix",
                    scale=float(meta["scale"]))
    else:
        pts = np.asarray(coords)
        d = Dataset.from_points(pts, np.clip(values, 0, 1), metric=metric)
        d.scale = float(meta["scale"])
    h = Hypothesis(values=values, lipschitz_budget=float(meta["lipschitz"]),
                   eta=float(meta["eta"]), q=int(meta["q"]))
    return h, d, ids, meta


def format_report(rep: RiskReport, fmt: str = "text") -> str:
    rows = rep.rows()
    if fmt == "csv":
        head = ",".join(name for name, _ in rows)
        vals = ",".join(_fmt(v) for _, v in rows)
        return f"{head}\n{vals}\n"
    width = max(len(name) for name, _ in rows)
    return "".join(f"{name:<{width}}  {_fmt(v)}\n" for name, v in rows)


def _fmt(v) -> str:
    return str(v) if isinstance(v, int) else f"{v:.9g}"
