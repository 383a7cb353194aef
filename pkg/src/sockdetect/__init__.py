"""Sockpuppet candidate detection over chat reply graphs.

Users are fingerprinted by the neighbors they interact with (weighted
SimHash), and all account pairs within a Hamming radius are retrieved
losslessly through pigeonhole block tables, then clustered and scored.
"""

__version__ = "0.1.0"

from .detect import MatchCluster, MatchReport, MutualMatch, build_match_report, cluster, mutual_matches
from .errors import ConfigError, InputError, UnfingerprintableError
from .evaluate import EvalReport, GroundTruth, SweepGrid, pairwise_metrics, read_truth, sweep, write_truth
from .features import (
    DirectionalWeights,
    FeatureMap,
    FeatureToken,
    build_feature_maps,
    extract_features,
    filter_edges,
    normalize_weights,
)
from .ingest import (
    InteractionGraph,
    MessageRecord,
    build_interaction_graph,
    convert_telegram_export,
    parse_messages,
    read_edges_tsv,
    write_edges_tsv,
)
from .lsh import (
    BlockPlan,
    CandidatePair,
    LshIndex,
    brute_force_pairs,
    build_index,
    candidate_pairs,
    plan_blocks,
    query,
)
from .pipeline import DetectionResult, RunConfig, run_detection, write_candidates_tsv
from .simhash import Fingerprint, HashConfig, hamming, hash_token, simhash
from .synth import SynthConfig, generate

__all__ = [
    "BlockPlan",
    "CandidatePair",
    "ConfigError",
    "DetectionResult",
    "DirectionalWeights",
    "EvalReport",
    "FeatureMap",
    "FeatureToken",
    "Fingerprint",
    "GroundTruth",
    "HashConfig",
    "InputError",
    "InteractionGraph",
    "LshIndex",
    "MatchCluster",
    "MatchReport",
    "MessageRecord",
    "MutualMatch",
    "RunConfig",
    "SweepGrid",
    "SynthConfig",
    "UnfingerprintableError",
    "brute_force_pairs",
    "build_feature_maps",
    "build_index",
    "build_interaction_graph",
    "build_match_report",
    "candidate_pairs",
    "cluster",
    "convert_telegram_export",
    "extract_features",
    "filter_edges",
    "generate",
    "hamming",
    "hash_token",
    "mutual_matches",
    "normalize_weights",
    "pairwise_metrics",
    "parse_messages",
    "plan_blocks",
    "query",
    "read_edges_tsv",
    "read_truth",
    "run_detection",
    "simhash",
    "sweep",
    "write_candidates_tsv",
    "write_edges_tsv",
    "write_truth",
]
