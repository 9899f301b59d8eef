"""File formats: binary feature/label payloads, corruption-matrix CSV,
curve CSV, and softmax CSV.

Binary features: magic "LNF1", little-endian u32 N, u32 D, then N*D
little-endian float32, row-major.  Binary labels: magic "LNL1", u32 N,
then N little-endian u32.  CSV alternatives are auto-detected by the
absence of the magic bytes.
"""
from __future__ import annotations

import io as _io
from pathlib import Path
from typing import Mapping, Optional

import numpy as np

from .curves import AccuracyCurve
from .plurality import CorruptionMatrix

FEATURE_MAGIC = b"LNF1"
LABEL_MAGIC = b"LNL1"


def write_features(path: str | Path, features: np.ndarray) -> None:
    f = np.ascontiguousarray(features, dtype="<f4")
    if f.ndim != 2:
        raise ValueError("features must be a 2-D matrix")
    with open(path, "wb") as fh:
        fh.write(FEATURE_MAGIC)
        fh.write(np.array(f.shape, dtype="<u4").tobytes())
        fh.write(f.tobytes())


def read_features(path: str | Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:4] == FEATURE_MAGIC:
        n, d = np.frombuffer(raw, dtype="<u4", count=2, offset=4)
        expect = 12 + 4 * int(n) * int(d)
        if len(raw) != expect:
            raise ValueError(f"{path}: truncated feature payload")
        return (
            np.frombuffer(raw, dtype="<f4", offset=12)
            .reshape(int(n), int(d))
            .astype(np.float64)
        )
    try:
        arr = np.loadtxt(_io.BytesIO(raw), delimiter=",", ndmin=2, dtype=np.float64)
    except ValueError as exc:
        raise ValueError(f"{path}: not a feature file (bad magic and not CSV)") from exc
    return arr


def write_labels(path: str | Path, labels: np.ndarray) -> None:
    y = np.ascontiguousarray(labels, dtype="<u4")
    if y.ndim != 1:
        raise ValueError("labels must be a 1-D vector")
    with open(path, "wb") as fh:
        fh.write(LABEL_MAGIC)
        fh.write(np.array([y.size], dtype="<u4").tobytes())
        fh.write(y.tobytes())


def read_labels(path: str | Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:4] == LABEL_MAGIC:
        (n,) = np.frombuffer(raw, dtype="<u4", count=1, offset=4)
        if len(raw) != 8 + 4 * int(n):
            raise ValueError(f"{path}: truncated label payload")
        return np.frombuffer(raw, dtype="<u4", offset=8).astype(np.int64)
    try:
        arr = np.loadtxt(_io.BytesIO(raw), delimiter=",", ndmin=1, dtype=np.int64)
    except ValueError as exc:
        raise ValueError(f"{path}: not a label file (bad magic and not CSV)") from exc
    return arr


def read_matrix_csv(path: str | Path) -> CorruptionMatrix:
    """L rows of L comma-separated decimals; row-level validation errors
    name the offending row."""
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                rows.append([float(x) for x in line.split(",")])
            except ValueError as exc:
                raise ValueError(f"{path}: row {lineno} is not numeric") from exc
    if not rows:
        raise ValueError(f"{path}: empty matrix")
    m = np.array(rows)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{path}: matrix must be square, got shape {m.shape}")
    sums = m.sum(axis=1)
    bad = np.nonzero(np.abs(sums - 1.0) > 1e-9)[0]
    if bad.size:
        raise ValueError(f"{path}: row {bad[0]} sums to {sums[bad[0]]}, expected 1")
    if np.any(m < 0):
        r = int(np.nonzero((m < 0).any(axis=1))[0][0])
        raise ValueError(f"{path}: row {r} has a negative entry")
    return CorruptionMatrix(m)


def read_softmax_csv(path: str | Path) -> np.ndarray:
    """One row of L probabilities per test sample."""
    arr = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
    return arr


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def write_curve_csv(
    path: str | Path,
    curve: AccuracyCurve,
    config: Optional[Mapping[str, object]] = None,
) -> None:
    """Curve CSV: '#' config header lines, then gamma,accuracy[,std]."""
    lines = []
    for key, value in (config or {}).items():
        lines.append(f"# {key}={value}")
    has_std = curve.stds is not None
    lines.append("gamma,accuracy,std" if has_std else "gamma,accuracy")
    for i in range(curve.gammas.size):
        row = [_fmt(curve.gammas[i]), _fmt(curve.accuracies[i])]
        if has_std:
            row.append(_fmt(curve.stds[i]))
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_curve_csv(path: str | Path) -> tuple[np.ndarray, dict[str, str]]:
    """Numeric rows plus the parsed header config; columns in file order."""
    config: dict[str, str] = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    config[key.strip()] = value.strip()
                continue
            if line[0].isalpha() or line.startswith("gamma"):
                continue
            rows.append([float(x) for x in line.split(",")])
    return np.array(rows), config
