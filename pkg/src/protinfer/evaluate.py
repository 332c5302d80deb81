"""Protein grouping, TP/FP labelling and q-value curves.

Proteins with identical identified-peptide sets are indistinguishable and are
reported together under one group score.  Proteins are then ranked by score
and, for each distinct score threshold, the FDR ``F/(F+T)`` is computed; the
q-value of a threshold is the smallest FDR at that threshold or any less
stringent one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Mapping, Sequence, TextIO

import numpy as np

from .graph import TripartiteGraph
from .ingest import ReferenceSet

LOGGER = logging.getLogger(__name__)

Q_GRID = (0.0, 0.01, 0.05, 0.1)


@dataclass(frozen=True)
class ProteinGroup:
    group_id: int
    members: tuple[str, ...]
    peptides: tuple[str, ...]
    score: float
    mixed_scores: bool = False


@dataclass(frozen=True)
class CurvePoint:
    score: float
    true_positives: int
    false_positives: int
    fdr: float
    q_value: float


@dataclass(frozen=True)
class EvaluationCurve:
    points: tuple[CurvePoint, ...]

    def __len__(self) -> int:
        return len(self.points)

    def map_scores(self, fn: Callable[[float], float]) -> "EvaluationCurve":
        return EvaluationCurve(tuple(replace(p, score=float(fn(p.score))) for p in self.points))

    def tp_at(self, q: float) -> int:
        """Most true positives reported at a q-value no larger than ``q``."""
        return max((p.true_positives for p in self.points if p.q_value <= q), default=0)


def _score_lookup(graph: TripartiteGraph, scores) -> np.ndarray:
    if isinstance(scores, Mapping):
        return np.array([scores[a] for a in graph.proteins], dtype=float)
    arr = np.asarray(scores, dtype=float)
    if arr.shape != (graph.n_proteins,):
        raise ValueError(f"expected {graph.n_proteins} protein scores, got {arr.shape}")
    return arr


def group_proteins(graph: TripartiteGraph, scores) -> list[ProteinGroup]:
    """Group proteins sharing exactly the same identified peptides.

    Groups are numbered from 1 in order of their first member accession.  If
    members disagree on score (possible for LP distributions), the group gets
    the maximum and is flagged ``mixed_scores``.
    """
    s = _score_lookup(graph, scores)
    by_set: dict[tuple[int, ...], list[int]] = {}
    for k, peps in enumerate(graph.protein_peptides()):
        by_set.setdefault(peps, []).append(k)
    groups = []
    for gid, (peps, ks) in enumerate(sorted(by_set.items(), key=lambda kv: kv[1][0]), start=1):
        member_scores = s[ks]
        mixed = bool(member_scores.min() != member_scores.max())
        if mixed:
            LOGGER.warning("group %d members have differing scores %s; using the maximum",
                           gid, member_scores.tolist())
        groups.append(ProteinGroup(
            group_id=gid,
            members=tuple(graph.proteins[k] for k in ks),
            peptides=tuple(graph.peptides[j] for j in peps),
            score=float(member_scores.max()),
            mixed_scores=mixed,
        ))
    return groups


def label(groups: Iterable[ProteinGroup], reference: ReferenceSet) -> dict[str, bool]:
    """TP (True) / FP (False) for every member of every group, individually."""
    return {acc: reference.is_true(acc) for g in groups for acc in g.members}


def member_scores(groups: Iterable[ProteinGroup]) -> dict[str, float]:
    return {acc: g.score for g in groups for acc in g.members}


def q_value_curve(scores: Sequence[float], labels: Sequence[bool]) -> EvaluationCurve:
    """One point per distinct score, highest first; tied scores enter together."""
    s = np.asarray(scores, dtype=float)
    lab = np.asarray(labels, dtype=bool)
    if s.shape != lab.shape:
        raise ValueError("scores and labels differ in length")
    if s.size == 0:
        raise ValueError("need at least one labelled protein")
    if np.isnan(s).any():
        raise ValueError("scores contain NaN")
    thresholds, inverse = np.unique(-s, return_inverse=True)
    tp = np.cumsum(np.bincount(inverse, weights=lab, minlength=len(thresholds))).astype(np.int64)
    fp = np.cumsum(np.bincount(inverse, weights=~lab, minlength=len(thresholds))).astype(np.int64)
    fdr = fp / (tp + fp)
    q = np.minimum.accumulate(fdr[::-1])[::-1]
    return EvaluationCurve(tuple(
        CurvePoint(float(-t), int(a), int(b), float(f), float(v))
        for t, a, b, f, v in zip(thresholds, tp, fp, fdr, q)))


def curve_from_groups(groups: Sequence[ProteinGroup], reference: ReferenceSet) -> EvaluationCurve:
    labels = label(groups, reference)
    scores = member_scores(groups)
    accs = sorted(labels)
    return q_value_curve([scores[a] for a in accs], [labels[a] for a in accs])


def emit_curve(curve: EvaluationCurve, sink: TextIO) -> None:
    """Write ``q_value,true_positives,score_threshold`` rows."""
    sink.write("q_value,true_positives,score_threshold\n")
    for p in curve.points:
        sink.write(f"{p.q_value:.6f},{p.true_positives},{p.score:.6f}\n")


def write_curve(curve: EvaluationCurve, path) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            emit_curve(curve, fh)
    except OSError as exc:
        raise OSError(f"cannot write curve to {path}: {exc.strerror or exc}") from exc


def write_group_report(groups: Iterable[ProteinGroup], labels: Mapping[str, bool],
                       sink: TextIO) -> None:
    sink.write("accession\tgroup_id\tscore\tlabel\n")
    for g in groups:
        for acc in g.members:
            sink.write(f"{acc}\t{g.group_id}\t{g.score:.12g}\t{'TP' if labels[acc] else 'FP'}\n")
