"""Dataset container, delimited-text ingestion and seeded synthetic blobs."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

NOISE_LABEL = "NOISE"


class DatasetError(ValueError):
    """Raised for malformed input data; carries the offending position."""

    def __init__(self, message, row=None, column=None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.row = row
        self.column = column


@dataclass(frozen=True)
class Dataset:
    """n objects with m numeric features and optional ground-truth labels."""

    points: np.ndarray
    labels: Optional[tuple] = None
    names: Optional[tuple] = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[1] < 1:
            raise DatasetError("points must be an n x m array with m >= 1")
        if pts.shape[0] < 2:
            raise DatasetError(f"need at least 2 objects, got {pts.shape[0]}")
        if not np.all(np.isfinite(pts)):
            bad = np.argwhere(~np.isfinite(pts))[0]
            raise DatasetError("non-finite value", row=int(bad[0]), column=int(bad[1]))
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != pts.shape[0]:
                raise DatasetError(
                    f"expected {pts.shape[0]} labels, got {len(labels)}"
                )
            object.__setattr__(self, "labels", labels)
        if self.names is not None:
            names = tuple(str(s) for s in self.names)
            if len(names) != pts.shape[1]:
                raise DatasetError(
                    f"expected {pts.shape[1]} feature names, got {len(names)}"
                )
            object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def m(self) -> int:
        return self.points.shape[1]


def _split_rows(text: str):
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        return []
    if "," in lines[0]:
        return [[c.strip() for c in row] for row in csv.reader(lines)]
    return [ln.split() for ln in lines]


def load_dataset(
    path: Union[str, Path],
    label_column: Union[str, int, None] = None,
    has_header: bool = False,
) -> Dataset:
    """Read a comma- or whitespace-delimited numeric table.

    Parameters
    ----------
    path : str or Path
        Input file, one object per row.
    label_column : str or int, optional
        Column holding ground-truth labels. A string is matched against the
        header; an integer is a 0-based column position (negative counts
        from the end).
    has_header : bool
        Whether the first row holds column names. A string ``label_column``
        implies a header.

    Returns
    -------
    Dataset
        Features in file row order, label column excluded.

    Raises
    ------
    OSError
        If the file cannot be read.
    DatasetError
        On non-numeric cells, ragged rows, unknown label column or n < 2.
        Row and column numbers in messages are 1-based as in the file.
    """
    text = Path(path).read_text(encoding="utf-8")
    rows = _split_rows(text)
    if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
        has_header = True
    elif isinstance(label_column, str):
        label_column = int(label_column)

    header = None
    first_row = 1
    if has_header:
        if not rows:
            raise DatasetError("empty file")
        header, rows = rows[0], rows[1:]
        first_row = 2
    if not rows:
        raise DatasetError("no data rows")

    width = len(header) if header is not None else len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise DatasetError(
                f"ragged row: expected {width} cells, found {len(row)}",
                row=i + first_row,
            )

    label_idx = None
    if isinstance(label_column, str):
        if label_column not in header:
            raise DatasetError(f"label column {label_column!r} not in header")
        label_idx = header.index(label_column)
    elif label_column is not None:
        label_idx = label_column if label_column >= 0 else width + label_column
        if not 0 <= label_idx < width:
            raise DatasetError(f"label column {label_column} out of range for width {width}")

    feature_cols = [j for j in range(width) if j != label_idx]
    if not feature_cols:
        raise DatasetError("no feature columns")
    values = np.empty((len(rows), len(feature_cols)))
    for i, row in enumerate(rows):
        for jj, j in enumerate(feature_cols):
            try:
                v = float(row[j])
            except ValueError:
                raise DatasetError(
                    f"non-numeric cell {row[j]!r}", row=i + first_row, column=j + 1
                ) from None
            if not math.isfinite(v):
                raise DatasetError(
                    f"non-finite cell {row[j]!r}", row=i + first_row, column=j + 1
                )
            values[i, jj] = v
    if len(rows) < 2:
        raise DatasetError(f"need at least 2 objects, got {len(rows)}")

    labels = None if label_idx is None else [row[label_idx] for row in rows]
    names = None if header is None else [header[j] for j in feature_cols]
    return Dataset(values, labels, names)


def save_dataset(dataset: Dataset, path: Union[str, Path]) -> None:
    """Write a dataset as CSV with a header and, if present, a trailing label column."""
    names = list(dataset.names or (f"x{j}" for j in range(dataset.m)))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names + (["label"] if dataset.labels is not None else []))
        for i, row in enumerate(dataset.points):
            cells = [repr(float(v)) for v in row]
            if dataset.labels is not None:
                cells.append(str(dataset.labels[i]))
            writer.writerow(cells)


@dataclass(frozen=True)
class BlobSpec:
    """Gaussian clusters plus uniform background noise.

    ``clusters`` holds ``(center, stddev, count)`` triples; ``stddev`` is a
    scalar or one value per axis. ``noise_box`` is ``(low, high)`` corners.
    """

    clusters: tuple
    noise_count: int = 0
    noise_box: Optional[tuple] = None
    seed: int = 0

    def __post_init__(self):
        clusters = []
        dim = None
        for c in self.clusters:
            if isinstance(c, dict):
                center, std, count = c["center"], c["stddev"], c["count"]
            else:
                center, std, count = c
            center = tuple(float(x) for x in center)
            if dim is None:
                dim = len(center)
            if len(center) != dim or dim < 1:
                raise ValueError("all cluster centers must share one dimension >= 1")
            std = (float(std),) * dim if np.isscalar(std) else tuple(float(s) for s in std)
            if len(std) != dim or any(not s > 0 for s in std):
                raise ValueError("stddev must be positive, one per axis")
            count = int(count)
            if count < 1:
                raise ValueError("cluster count must be positive")
            clusters.append((center, std, count))
        if self.noise_count < 0:
            raise ValueError("noise_count must be non-negative")
        total = sum(c[2] for c in clusters) + self.noise_count
        if total < 2:
            raise ValueError("total point count must be >= 2")
        box = None
        if self.noise_box is not None:
            lo, hi = self.noise_box
            box = (tuple(float(x) for x in lo), tuple(float(x) for x in hi))
        if self.noise_count > 0:
            if box is None:
                raise ValueError("noise_box required when noise_count > 0")
            if dim is None:
                dim = len(box[0])
            if len(box[0]) != dim or len(box[1]) != dim:
                raise ValueError("noise_box corners must match cluster dimension")
            if any(not h > l for l, h in zip(*box)):
                raise ValueError("noise_box must have positive volume")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "clusters", tuple(clusters))
        object.__setattr__(self, "noise_box", box)
        object.__setattr__(self, "seed", int(self.seed))

    @classmethod
    def from_json(cls, source: Union[str, Path, dict]) -> "BlobSpec":
        if isinstance(source, dict):
            doc = source
        else:
            doc = json.loads(Path(source).read_text(encoding="utf-8"))
        return cls(
            clusters=tuple(doc["clusters"]),
            noise_count=doc.get("noise_count", 0),
            noise_box=doc.get("noise_box"),
            seed=doc.get("seed", 0),
        )

    def to_json(self) -> dict:
        return {
            "clusters": [
                {"center": list(c), "stddev": list(s), "count": k}
                for c, s, k in self.clusters
            ],
            "noise_count": self.noise_count,
            "noise_box": None if self.noise_box is None else [list(x) for x in self.noise_box],
            "seed": self.seed,
        }


def generate_blobs(spec: BlobSpec) -> Dataset:
    """Sample a labelled dataset from ``spec``.

    Uses numpy's PCG64 bit generator seeded with ``spec.seed``. Clusters are
    sampled in order (labels ``"0"``, ``"1"``, ...), followed by the noise
    points labelled ``NOISE_LABEL``.
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    parts, labels = [], []
    for i, (center, std, count) in enumerate(spec.clusters):
        parts.append(rng.normal(loc=center, scale=std, size=(count, len(center))))
        labels.extend([str(i)] * count)
    if spec.noise_count:
        lo, hi = spec.noise_box
        parts.append(rng.uniform(lo, hi, size=(spec.noise_count, len(lo))))
        labels.extend([NOISE_LABEL] * spec.noise_count)
    return Dataset(np.vstack(parts), labels)


def minmax_normalize(dataset: Dataset) -> Dataset:
    """Map every feature affinely onto [0, 1]; constant features become 0."""
    x = dataset.points
    lo = x.min(axis=0)
    span = x.max(axis=0) - lo
    safe = np.where(span > 0, span, 1.0)
    out = np.where(span > 0, (x - lo) / safe, 0.0)
    return Dataset(np.clip(out, 0.0, 1.0), dataset.labels, dataset.names)


def iris_path() -> Path:
    """Path to the bundled Iris table (header row, ``species`` label column)."""
    return Path(__file__).with_name("data") / "iris.csv"


def load_iris() -> Dataset:
    return load_dataset(iris_path(), label_column="species")
