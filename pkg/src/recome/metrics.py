"""External clustering quality: NMI and B-cubed precision / recall / F."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np


@dataclass(frozen=True)
class MetricReport:
    nmi: float
    pb: float
    rb: float
    f: float

    def as_dict(self) -> dict:
        return asdict(self)


def _contingency(pred, truth):
    pred = list(pred)
    truth = list(truth)
    if len(pred) != len(truth):
        raise ValueError(f"label vectors differ in length: {len(pred)} vs {len(truth)}")
    if not pred:
        raise ValueError("label vectors are empty")
    _, p = np.unique(np.array(pred, dtype=object).astype(str), return_inverse=True)
    _, t = np.unique(np.array(truth, dtype=object).astype(str), return_inverse=True)
    p, t = p.reshape(-1), t.reshape(-1)
    table = np.zeros((p.max() + 1, t.max() + 1), dtype=np.int64)
    np.add.at(table, (p, t), 1)
    return table, p, t


def _entropy(counts):
    q = counts[counts > 0] / counts.sum()
    return float(-(q * np.log(q)).sum())


def nmi(pred, truth) -> float:
    """Mutual information over the geometric mean of the two entropies.

    Two single-cluster labelings score 1; if only one of them has zero
    entropy the score is 0.
    """
    table, _, _ = _contingency(pred, truth)
    n = table.sum()
    hp = _entropy(table.sum(axis=1))
    ht = _entropy(table.sum(axis=0))
    if hp == 0.0 and ht == 0.0:
        return 1.0
    if hp == 0.0 or ht == 0.0:
        return 0.0
    joint = table / n
    outer = np.outer(table.sum(axis=1), table.sum(axis=0)) / (n * n)
    nz = joint > 0
    mi = float((joint[nz] * np.log(joint[nz] / outer[nz])).sum())
    return float(min(1.0, max(0.0, mi / np.sqrt(hp * ht))))


def bcubed(pred, truth):
    """B-cubed precision, recall and their harmonic mean.

    Peers exclude the object itself; an object with no peers (a singleton
    cluster or class) scores 1 for that side.
    """
    table, p, t = _contingency(pred, truth)
    same = table[p, t] - 1
    csize = table.sum(axis=1)[p] - 1
    lsize = table.sum(axis=0)[t] - 1
    prec = np.where(csize > 0, same / np.maximum(csize, 1), 1.0)
    rec = np.where(lsize > 0, same / np.maximum(lsize, 1), 1.0)
    pb = float(prec.mean())
    rb = float(rec.mean())
    f = 0.0 if pb + rb == 0 else 2 * pb * rb / (pb + rb)
    return pb, rb, f


def evaluate(pred, truth) -> MetricReport:
    pb, rb, f = bcubed(pred, truth)
    return MetricReport(nmi(pred, truth), pb, rb, f)
