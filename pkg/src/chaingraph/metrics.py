"""Edge-recovery metrics between an estimated and a true chain graph.

Undirected counts live on the p*(p-1)/2 unordered pairs, directed counts
on the p*(p-1) ordered pairs.  A directed edge with the wrong orientation
is both a false negative (the true edge is missed) and a false positive
(a non-edge is reported).
"""

from __future__ import annotations

import dataclasses
import math


def _check_same_p(est, truth):
    if est.p != truth.p:
        raise ValueError(f"graphs disagree on p: {est.p} vs {truth.p}")
    return est.p


def confusion_undirected(est, truth):
    """(tp, fp, fn, tn) over unordered pairs."""
    p = _check_same_p(est, truth)
    tp = len(est.undirected & truth.undirected)
    fp = len(est.undirected - truth.undirected)
    fn = len(truth.undirected - est.undirected)
    tn = p * (p - 1) // 2 - tp - fp - fn
    return tp, fp, fn, tn


def confusion_directed(est, truth):
    """(tp, fp, fn, tn) over ordered pairs; orientation counts."""
    p = _check_same_p(est, truth)
    tp = len(est.directed & truth.directed)
    fp = len(est.directed - truth.directed)
    fn = len(truth.directed - est.directed)
    tn = p * (p - 1) - tp - fp - fn
    return tp, fp, fn, tn


def mcc(tp, fp, fn, tn):
    """Matthews correlation; 0.0 when any marginal is empty."""
    for v in (tp, fp, fn, tn):
        if v < 0:
            raise ValueError("counts must be nonnegative")
    den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if den == 0:
        return 0.0
    return (tp * tn - fp * fn) / math.sqrt(den)


def _ratio(num, den):
    return num / den if den else math.nan


@dataclasses.dataclass(frozen=True)
class EdgeMetrics:
    """Recall/precision/MCC per edge type plus the structural distance."""

    recall_undirected: float
    precision_undirected: float
    mcc_undirected: float
    recall_directed: float
    precision_directed: float
    mcc_directed: float
    shd: int


def edge_metrics(est, truth):
    tu, fu, nu, du = confusion_undirected(est, truth)
    td, fd, nd, dd = confusion_directed(est, truth)
    return EdgeMetrics(
        recall_undirected=_ratio(tu, tu + nu),
        precision_undirected=_ratio(tu, tu + fu),
        mcc_undirected=mcc(tu, fu, nu, du),
        recall_directed=_ratio(td, td + nd),
        precision_directed=_ratio(td, td + fd),
        mcc_directed=mcc(td, fd, nd, dd),
        shd=shd(est, truth),
    )


def _pair_state(graph, i, j):
    if (i, j) in graph.undirected:
        return "undirected"
    if (i, j) in graph.directed:
        return "forward"
    if (j, i) in graph.directed:
        return "backward"
    return "absent"


def shd(est, truth):
    """Number of unordered pairs whose state differs.

    Each pair is in one of four states: absent, undirected, or directed in
    either orientation.  Any mismatch costs one.
    """
    p = _check_same_p(est, truth)
    total = 0
    for i in range(p):
        for j in range(i + 1, p):
            if _pair_state(est, i, j) != _pair_state(truth, i, j):
                total += 1
    return total
