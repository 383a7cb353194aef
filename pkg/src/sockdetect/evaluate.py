"""Pairwise precision/recall against (possibly partial) ground truth,
plus the parameter sweep."""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Iterable

from .errors import InputError
from .lsh import CandidatePair

if TYPE_CHECKING:
    from .ingest import InteractionGraph


@dataclass
class GroundTruth:
    """Disjoint clusters of user ids, each cluster one real person."""

    clusters: list[set[str]]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for members in self.clusters:
            if not members:
                raise InputError("empty truth cluster")
            overlap = seen & members
            if overlap:
                raise InputError(
                    f"overlapping truth clusters: {sorted(overlap)[0]!r}"
                    " appears in more than one cluster"
                )
            seen |= members

    @property
    def labeled(self) -> set[str]:
        return set().union(*self.clusters) if self.clusters else set()

    def positive_pairs(self) -> set[tuple[str, str]]:
        pairs: set[tuple[str, str]] = set()
        for members in self.clusters:
            ordered = sorted(members)
            for i, u in enumerate(ordered):
                for v in ordered[i + 1 :]:
                    pairs.add((u, v))
        return pairs


@dataclass(frozen=True)
class EvalReport:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "EvalReport":
        # vacuous conventions keep sweeps free of zero divisions
        precision = 1.0 if tp + fp == 0 else tp / (tp + fp)
        recall = 1.0 if tp + fn == 0 else tp / (tp + fn)
        f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
        return cls(tp=tp, fp=fp, fn=fn, precision=precision, recall=recall, f1=f1)

    def to_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


def pairwise_metrics(
    predicted: Iterable[CandidatePair], truth: GroundTruth
) -> EvalReport:
    """Score predicted pairs over unordered labeled pairs.

    Predictions touching unlabeled users are discarded before counting:
    with a partial oracle they are neither right nor wrong.
    """
    labeled = truth.labeled
    positives = truth.positive_pairs()
    predicted_pairs = {
        (p.a, p.b) for p in predicted if p.a in labeled and p.b in labeled
    }
    tp = len(predicted_pairs & positives)
    fp = len(predicted_pairs - positives)
    fn = len(positives - predicted_pairs)
    return EvalReport.from_counts(tp, fp, fn)


def read_truth(path: str | Path) -> GroundTruth:
    """One cluster per line, comma-separated user ids; blank lines skipped."""
    clusters: list[set[str]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            members = {part.strip() for part in line.split(",")}
            members.discard("")
            if not members:
                raise InputError(f"truth line {lineno}: no user ids")
            clusters.append(members)
    return GroundTruth(clusters=clusters)


def write_truth(truth: GroundTruth, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for members in sorted(truth.clusters, key=lambda m: sorted(m)):
            fh.write(",".join(sorted(members)) + "\n")


@dataclass
class SweepGrid:
    """Value lists for every tunable; the product is swept in field order."""

    bits: list[int] = field(default_factory=lambda: [128])
    max_distances: list[int] = field(default_factory=lambda: [20])
    thetas: list[float] = field(default_factory=lambda: [0.5])
    directions: list[str] = field(default_factory=lambda: ["out"])
    modes: list[str] = field(default_factory=lambda: ["max"])
    weightings: list[str] = field(default_factory=lambda: ["weighted"])


@dataclass
class SweepRow:
    bits: int
    max_distance: int
    theta: float
    direction: str
    mode: str
    weighting: str
    seed: int
    status: str  # "ok" or "failed"
    error: str = ""
    candidates: int = 0
    report: EvalReport | None = None
    seconds: float = 0.0


SWEEP_COLUMNS = (
    "b,d,theta,direction,mode,weighting,seed,status,candidates,"
    "tp,fp,fn,precision,recall,f1,seconds,error"
)


def sweep_rows_to_csv(rows: list[SweepRow], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(SWEEP_COLUMNS + "\n")
        for r in rows:
            if r.report is not None:
                metrics = (
                    f"{r.report.tp},{r.report.fp},{r.report.fn},"
                    f"{r.report.precision:.6f},{r.report.recall:.6f},{r.report.f1:.6f}"
                )
            else:
                metrics = ",,,,,"
            fh.write(
                f"{r.bits},{r.max_distance},{r.theta!r},{r.direction},{r.mode},"
                f"{r.weighting},{r.seed},{r.status},{r.candidates},{metrics},"
                f"{r.seconds:.3f},{r.error}\n"
            )


def sweep(
    graph: "InteractionGraph",
    truth: GroundTruth,
    grid: SweepGrid,
    seed: int = 0,
) -> list[SweepRow]:
    """Run detection once per grid point and score it; failures become rows.

    Rows come back in grid order regardless of individual outcomes.
    """
    from .pipeline import RunConfig, run_detection  # cycle: pipeline imports eval types

    rows: list[SweepRow] = []
    for b, d, theta, direction, mode, weighting in itertools.product(
        grid.bits,
        grid.max_distances,
        grid.thetas,
        grid.directions,
        grid.modes,
        grid.weightings,
    ):
        row = SweepRow(
            bits=b,
            max_distance=d,
            theta=theta,
            direction=direction,
            mode=mode,
            weighting=weighting,
            seed=seed,
            status="ok",
        )
        started = time.perf_counter()
        try:
            cfg = RunConfig(
                bits=b,
                max_distance=d,
                theta=theta,
                mode=mode,
                direction=direction,
                weighting=weighting,
                seed=seed,
            )
            result = run_detection(graph, cfg)
            row.candidates = len(result.candidates)
            row.report = pairwise_metrics(result.candidates, truth)
        except ValueError as exc:
            row.status = "failed"
            row.error = str(exc)
        row.seconds = time.perf_counter() - started
        rows.append(row)
    return rows
