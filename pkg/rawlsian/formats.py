"""Readers and writers for the dataset CSV and the JSON documents.

Dataset CSV::

    z,y,f1,f2          (or z,y,score for one-dimensional scores)
    1,0,0.13,-2.71

``z`` is the 1-based protected group, ``y`` the label in {0, 1}. JSON numbers
are written in shortest round-trip form (Python's ``repr``), so the same
inputs always produce byte-identical files.
"""

from __future__ import annotations

import json
import logging
import math
import re
from io import StringIO
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from rawlsian import __version__
from rawlsian.core.models import MODEL_METHODS, Guarantee, LinearThresholdModel, ScoreThresholdModel, ThresholdClassifier
from rawlsian.core.types import EvaluationReport, LabeledDataset, MomentTable, Moments, SubPopId
from rawlsian.errors import InvalidInput, OutputError, ParseError
from rawlsian.oracle.distribution import FiniteDistribution

logger = logging.getLogger(__name__)

_FEATURE = re.compile(r"^f(\d+)$")


# ---------------------------------------------------------------------------
# File plumbing
# ---------------------------------------------------------------------------

def _read_text(path: str | Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _write_text(path: str | Path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    logger.debug("wrote %s (%d bytes)", path, len(text))


def _dump(doc: dict) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _load_json(path: str | Path) -> dict:
    try:
        doc = json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc.msg}", line=exc.lineno) from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be a JSON object")
    return doc


def _require(doc: dict, key: str, where: str) -> Any:
    if key not in doc:
        raise ParseError(f"{where}: missing field {key!r}")
    return doc[key]


def _subpop_key(s: SubPopId) -> str:
    return f"{s.label},{s.group}"


# ---------------------------------------------------------------------------
# Dataset CSV
# ---------------------------------------------------------------------------

def _feature_columns(header: list[str]) -> list[str]:
    if header[:2] != ["z", "y"]:
        raise ParseError(f"header must start with z,y; got {','.join(header[:2])}", line=1)
    rest = header[2:]
    if rest == ["score"]:
        return rest
    if not rest:
        raise ParseError("header has no feature columns", line=1)
    for k, name in enumerate(rest, start=1):
        m = _FEATURE.match(name)
        if not m or int(m.group(1)) != k:
            raise ParseError(f"expected column f{k}, got {name!r}", line=1)
    return rest


def parse_dataset(text: str, p: int | None = None) -> LabeledDataset:
    """Parse dataset CSV text; ``p`` defaults to the largest group index present."""
    try:
        frame = pd.read_csv(StringIO(text), dtype=str, keep_default_na=False, skipinitialspace=True, index_col=False)
    except pd.errors.EmptyDataError:
        raise ParseError("empty file", line=1) from None
    except pd.errors.ParserError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ParseError(f"malformed row: {exc}", line=int(m.group(1)) if m else None) from exc
    header = [str(c).strip() for c in frame.columns]
    frame.columns = header
    features = _feature_columns(header)

    numeric = frame.apply(pd.to_numeric, errors="coerce")
    bad = numeric.isna().any(axis=1)
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        column = next(c for c in header if pd.isna(numeric.iloc[row][c]))
        raise ParseError(f"column {column}: not a number: {frame.iloc[row][column]!r}", line=row + 2)

    y = numeric["y"].to_numpy()
    z = numeric["z"].to_numpy()
    for name, col in (("y", y), ("z", z)):
        off = np.flatnonzero(col != np.round(col))
        if len(off):
            raise ParseError(f"{name} must be an integer, got {frame.iloc[off[0]][name]!r}", line=int(off[0]) + 2)
    off = np.flatnonzero(~np.isin(y, (0, 1)))
    if len(off):
        raise ParseError(f"y must be 0 or 1, got {frame.iloc[off[0]]['y']!r}", line=int(off[0]) + 2)
    off = np.flatnonzero(z < 1)
    if len(off):
        raise ParseError(f"z must be >= 1, got {frame.iloc[off[0]]['z']!r}", line=int(off[0]) + 2)

    x = numeric[features].to_numpy(dtype=float)
    if not np.isfinite(x).all():
        row = int(np.flatnonzero(~np.isfinite(x).all(axis=1))[0])
        raise ParseError("feature values must be finite", line=row + 2)
    groups = int(z.max()) if len(z) else 1
    if p is None:
        p = groups
    elif groups > p:
        row = int(np.flatnonzero(z > p)[0])
        raise ParseError(f"unknown group index {int(z[row])} (p={p})", line=row + 2)
    return LabeledDataset(p=p, features=x, y=y.astype(np.int64), z=z.astype(np.int64))


def read_dataset(path: str | Path, p: int | None = None) -> LabeledDataset:
    return parse_dataset(_read_text(path), p)


def format_dataset(data: LabeledDataset, score: bool = False) -> str:
    names = ["score"] if score else [f"f{k}" for k in range(1, data.d + 1)]
    if score and data.d != 1:
        raise InvalidInput(f"a score column needs d = 1, got d = {data.d}")
    frame = pd.DataFrame(data.features, columns=names)
    frame.insert(0, "y", data.y)
    frame.insert(0, "z", data.z)
    return frame.to_csv(index=False, lineterminator="\n")


def write_dataset(data: LabeledDataset, path: str | Path) -> None:
    _write_text(path, format_dataset(data))


# ---------------------------------------------------------------------------
# Stats file
# ---------------------------------------------------------------------------

def stats_to_dict(table: MomentTable) -> dict:
    return {
        "p": table.p,
        "d": table.d,
        "subpops": [
            {
                "y": s.label,
                "z": s.group,
                "count": m.count,
                "mean": [float(v) for v in m.mean],
                "cov": [[float(v) for v in row] for row in m.cov],
            }
            for s, m in table.entries.items()
        ],
    }


def stats_from_dict(doc: dict) -> MomentTable:
    p = int(_require(doc, "p", "stats"))
    d = int(_require(doc, "d", "stats"))
    entries: dict[SubPopId, Moments] = {}
    for k, item in enumerate(_require(doc, "subpops", "stats")):
        where = f"stats.subpops[{k}]"
        try:
            s = SubPopId(int(_require(item, "y", where)), int(_require(item, "z", where)))
            entries[s] = Moments(
                count=int(item.get("count", 0)),
                mean=_require(item, "mean", where),
                cov=_require(item, "cov", where),
            )
        except ParseError:
            raise
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{where}: {exc}") from exc
    table = MomentTable(p=p, d=d, entries=entries)
    table.require_valid()
    return table


def read_stats(path: str | Path) -> MomentTable:
    return stats_from_dict(_load_json(path))


def write_stats(table: MomentTable, path: str | Path) -> None:
    _write_text(path, _dump(stats_to_dict(table)))


# ---------------------------------------------------------------------------
# Model file
# ---------------------------------------------------------------------------

def model_to_dict(model: ThresholdClassifier) -> dict:
    g = model.guarantee
    doc: dict[str, Any] = {"type": "linear" if isinstance(model, LinearThresholdModel) else "threshold"}
    if isinstance(model, LinearThresholdModel):
        doc["w"] = [float(v) for v in model.w]
    doc.update({
        "b": float(model.b),
        "r_star": g.r_star if g else None,
        "j_star": g.j_star if g else None,
        "method": model.method,
    })
    return doc


def model_from_dict(doc: dict) -> ThresholdClassifier:
    kind = _require(doc, "type", "model")
    method = doc.get("method", "external")
    if method not in MODEL_METHODS:
        raise ParseError(f"model: unknown method {method!r}")
    r_star, j_star = doc.get("r_star"), doc.get("j_star")
    guarantee = Guarantee(float(r_star), int(j_star)) if r_star is not None and j_star is not None else None
    b = float(_require(doc, "b", "model"))
    if kind == "threshold":
        return ScoreThresholdModel(b=b, guarantee=guarantee, method=method)
    if kind == "linear":
        return LinearThresholdModel(w=_require(doc, "w", "model"), b=b, guarantee=guarantee, method=method)
    raise ParseError(f"model: type must be 'threshold' or 'linear', got {kind!r}")


def read_model(path: str | Path) -> ThresholdClassifier:
    return model_from_dict(_load_json(path))


def write_model(model: ThresholdClassifier, path: str | Path) -> None:
    _write_text(path, _dump(model_to_dict(model)))


# ---------------------------------------------------------------------------
# Finite distribution
# ---------------------------------------------------------------------------

def distribution_from_dict(doc: dict) -> FiniteDistribution:
    points = [str(x) for x in _require(doc, "points", "distribution")]
    p = int(_require(doc, "p", "distribution"))
    records = []
    for k, item in enumerate(_require(doc, "mass", "distribution")):
        where = f"distribution.mass[{k}]"
        records.append((
            str(_require(item, "x", where)),
            int(_require(item, "y", where)),
            int(_require(item, "z", where)),
            float(_require(item, "prob", where)),
        ))
    return FiniteDistribution.from_records(points, p, records)


def read_distribution(path: str | Path) -> FiniteDistribution:
    return distribution_from_dict(_load_json(path))


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def _finite_pair(pair: tuple[float, float]) -> list[float | None]:
    return [None if math.isnan(v) else v for v in pair]


def report_to_dict(report: EvaluationReport) -> dict:
    return {
        "tool_version": __version__,
        "per_subpop_error": {_subpop_key(s): e for s, e in report.per_subpop_error.items()},
        "counts": {_subpop_key(s): n for s, n in report.counts.items()},
        "misclassified": {_subpop_key(s): n for s, n in report.misclassified.items()},
        "max_error": report.max_error,
        "argmax_set": [_subpop_key(s) for s in sorted(report.argmax_set)],
        "fpr_range": _finite_pair(report.fpr_range),
        "fnr_range": _finite_pair(report.fnr_range),
        "accuracy": report.accuracy,
        "empty_subpops": [_subpop_key(s) for s in report.empty_subpops],
    }


def write_report(doc: dict, path: str | Path) -> None:
    """Write any report document, stamping ``tool_version`` first."""
    _write_text(path, _dump({"tool_version": __version__, **doc}))


def write_grid(grid: pd.DataFrame, path: str | Path) -> None:
    _write_text(path, grid[["x", "y", "label"]].to_csv(index=False, lineterminator="\n"))
