"""End-to-end detection run: features -> fingerprints -> index -> report.

The default configuration is the operating point the whole artifact is
tuned around: 128-bit fingerprints, Hamming radius 20, weight threshold 0.5,
max-normalization over outgoing neighbors.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .detect import MatchReport, build_match_report
from .errors import ConfigError, InputError
from .features import DIRECTIONS, MODES, binarize, build_feature_maps
from .ingest import InteractionGraph
from .lsh import CandidatePair, build_index, candidate_pairs, iter_sorted_pairs
from .simhash import Fingerprint, HashConfig, SUPPORTED_WIDTHS, fingerprint_population

WEIGHTINGS = ("weighted", "binary")


@dataclass(frozen=True)
class RunConfig:
    bits: int = 128
    max_distance: int = 20
    theta: float = 0.5
    mode: str = "max"
    direction: str = "out"
    weighting: str = "weighted"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.bits not in SUPPORTED_WIDTHS:
            raise ConfigError(f"bits must be one of {SUPPORTED_WIDTHS}, got {self.bits}")
        if self.max_distance < 0:
            raise ConfigError("max distance must be >= 0")
        if self.max_distance >= self.bits:
            raise ConfigError(
                f"max distance {self.max_distance} must be smaller than bits {self.bits}"
            )
        if not 0.0 <= self.theta <= 1.0:
            raise ConfigError(f"threshold must lie in [0, 1], got {self.theta}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.direction not in DIRECTIONS:
            raise ConfigError(
                f"direction must be one of {DIRECTIONS}, got {self.direction!r}"
            )
        if self.weighting not in WEIGHTINGS:
            raise ConfigError(
                f"weighting must be one of {WEIGHTINGS}, got {self.weighting!r}"
            )
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 unsigned bits")

    def header_line(self) -> str:
        return (
            f"# b={self.bits} d={self.max_distance} theta={self.theta} "
            f"mode={self.mode} direction={self.direction} "
            f"weighting={self.weighting} seed={self.seed}"
        )

    def to_dict(self) -> dict:
        return {
            "b": self.bits,
            "d": self.max_distance,
            "theta": self.theta,
            "mode": self.mode,
            "direction": self.direction,
            "weighting": self.weighting,
            "seed": self.seed,
        }


@dataclass
class DetectionResult:
    config: RunConfig
    candidates: set[CandidatePair]
    report: MatchReport
    fingerprints: dict[str, Fingerprint]
    unfingerprintable: list[str]
    feature_maps: dict = field(default_factory=dict, repr=False)
    stats: dict = field(default_factory=dict)


def run_detection(graph: InteractionGraph, cfg: RunConfig) -> DetectionResult:
    """Run the full pipeline on an interaction graph.

    Timings for each stage land in ``result.stats``; the candidate
    generation time covers index construction plus pair retrieval, the part
    the blocking scheme is supposed to keep from growing quadratically.
    """
    t0 = time.perf_counter()
    fmaps = build_feature_maps(graph, mode=cfg.mode, theta=cfg.theta, direction=cfg.direction)
    if cfg.weighting == "binary":
        fmaps = {owner: binarize(fmap) for owner, fmap in fmaps.items()}
    t1 = time.perf_counter()
    fingerprints, skipped = fingerprint_population(
        fmaps, HashConfig(b=cfg.bits, seed=cfg.seed)
    )
    t2 = time.perf_counter()
    index = build_index(fingerprints, cfg.max_distance)
    t3 = time.perf_counter()
    lsh_stats: dict = {}
    candidates = candidate_pairs(index, stats=lsh_stats)
    t4 = time.perf_counter()
    report = build_match_report(candidates)
    t5 = time.perf_counter()

    stats = {
        "nodes": graph.node_count,
        "edges": graph.edge_count,
        "fingerprinted": len(fingerprints),
        "unfingerprintable": len(skipped),
        "tables": index.plan.m,
        "bucket_memberships": index.bucket_memberships(),
        "largest_bucket": lsh_stats.get("largest_bucket", 0),
        "pairs_verified": lsh_stats.get("pairs_verified", 0),
        "candidates": len(candidates),
        "clusters": len(report.clusters),
        "mutual_matches": len(report.mutual),
        "seconds": {
            "features": t1 - t0,
            "fingerprint": t2 - t1,
            "index_build": t3 - t2,
            "candidate_pairs": t4 - t3,
            "candidate_generation": t4 - t2,
            "report": t5 - t4,
            "total": t5 - t0,
        },
    }
    return DetectionResult(
        config=cfg,
        candidates=candidates,
        report=report,
        fingerprints=fingerprints,
        unfingerprintable=skipped,
        feature_maps=fmaps,
        stats=stats,
    )


def write_candidates_tsv(
    candidates: Iterable[CandidatePair], cfg: RunConfig, path: str | Path
) -> None:
    """Write ``a<TAB>b<TAB>distance`` rows sorted by (distance, a, b) after a
    header line echoing the run configuration."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(cfg.header_line() + "\n")
        for pair in iter_sorted_pairs(set(candidates)):
            fh.write(f"{pair.a}\t{pair.b}\t{pair.distance}\n")


def read_candidates_tsv(path: str | Path) -> set[CandidatePair]:
    pairs: set[CandidatePair] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise InputError(
                    f"candidates line {lineno}: expected 3 tab-separated fields"
                )
            a, b, distance_s = parts
            try:
                distance = int(distance_s)
            except ValueError:
                raise InputError(f"candidates line {lineno}: bad distance {distance_s!r}")
            if distance < 0:
                raise InputError(f"candidates line {lineno}: negative distance")
            try:
                pairs.add(CandidatePair.ordered(a, b, distance))
            except ValueError as exc:
                raise InputError(f"candidates line {lineno}: {exc}")
    return pairs
