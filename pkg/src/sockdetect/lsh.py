"""Lossless Hamming-radius retrieval via pigeonhole blocking.

A b-bit fingerprint is split into m = d+1 disjoint blocks.  Two fingerprints
within Hamming distance d differ in at most d positions, so they must agree
exactly on at least one block: keying m hash tables by exact block bits
therefore co-buckets every true pair at least once.  Verification with exact
Hamming distance then removes every false bucket collision, so retrieval is
lossless and ``candidate_pairs`` equals the all-pairs scan by construction.

Within a bucket the same guarantee holds recursively on the remaining bit
positions (the bucket members already agree on the block bits), which keeps
dense buckets from degenerating into an all-pairs scan: large buckets are
re-partitioned instead of enumerated, and only the final small segments are
verified pairwise, in batched vectorized popcounts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np

from .errors import ConfigError
from .simhash import Fingerprint

# Buckets up to this size are verified pairwise; larger ones are recursively
# re-partitioned.  Crossover between C(k,2) vectorized popcounts and the cost
# of another round of block keying sits around k ~ 100.
LEAF_SIZE = 96
_FLUSH_PAIRS = 1 << 22

_POW2 = (np.int64(1) << np.arange(63, dtype=np.int64))


@dataclass(frozen=True)
class BlockPlan:
    """m = d+1 contiguous disjoint bit ranges covering [0, b), widest first."""

    m: int
    ranges: list[tuple[int, int]]  # (start, width)


@dataclass(frozen=True, order=True)
class CandidatePair:
    """A verified near-pair; ``a < b`` in canonical id order."""

    a: str
    b: str
    distance: int

    def __post_init__(self) -> None:
        if not self.a < self.b:
            raise ValueError(f"pair endpoints must be ordered, got {self.a!r}, {self.b!r}")

    @classmethod
    def ordered(cls, u: str, v: str, distance: int) -> "CandidatePair":
        return cls(u, v, distance) if u < v else cls(v, u, distance)


@dataclass
class LshIndex:
    plan: BlockPlan
    tables: list[dict[int, list[str]]]
    fingerprints: dict[str, Fingerprint]
    width: int
    max_distance: int

    def largest_bucket(self) -> int:
        sizes = [len(bucket) for table in self.tables for bucket in table.values()]
        return max(sizes, default=0)

    def bucket_memberships(self) -> int:
        return sum(len(bucket) for table in self.tables for bucket in table.values())


def plan_blocks(b: int, d: int) -> BlockPlan:
    """Partition [0, b) into d+1 ranges whose sizes differ by at most one."""
    if d < 0:
        raise ConfigError(f"max distance must be >= 0, got {d}")
    if d >= b:
        raise ConfigError(
            f"max distance {d} >= width {b}: every pair would be a candidate,"
            " use the brute-force scan instead"
        )
    m = d + 1
    q, r = divmod(b, m)
    ranges: list[tuple[int, int]] = []
    start = 0
    for i in range(m):
        width = q + 1 if i < r else q
        ranges.append((start, width))
        start += width
    return BlockPlan(m=m, ranges=ranges)


def build_index(fps: Mapping[str, Fingerprint], d: int) -> LshIndex:
    """Insert every fingerprint into one bucket per block table (O(n*m))."""
    if not fps:
        return LshIndex(
            plan=BlockPlan(m=d + 1, ranges=[]),
            tables=[],
            fingerprints={},
            width=0,
            max_distance=d,
        )
    widths = {fp.width for fp in fps.values()}
    if len(widths) != 1:
        raise ValueError(f"fingerprint width mismatch: {sorted(widths)}")
    b = widths.pop()
    plan = plan_blocks(b, d)
    tables: list[dict[int, list[str]]] = [{} for _ in plan.ranges]
    fingerprints = {uid: fps[uid] for uid in sorted(fps)}
    for uid, fp in fingerprints.items():
        for (start, width), table in zip(plan.ranges, tables):
            key = (fp.bits >> start) & ((1 << width) - 1)
            table.setdefault(key, []).append(uid)
    return LshIndex(
        plan=plan, tables=tables, fingerprints=fingerprints, width=b, max_distance=d
    )


def _word_matrix(fingerprints: Mapping[str, Fingerprint], users: list[str], b: int) -> np.ndarray:
    nwords = (b + 63) // 64
    words = np.zeros((len(users), nwords), dtype=np.uint64)
    for i, uid in enumerate(users):
        bits = fingerprints[uid].bits
        for j in range(nwords):
            words[i, j] = (bits >> (64 * j)) & 0xFFFFFFFFFFFFFFFF
    return words


def _bit_matrix(fingerprints: Mapping[str, Fingerprint], users: list[str], b: int) -> np.ndarray:
    raw = np.zeros((len(users), b // 8), dtype=np.uint8)
    for i, uid in enumerate(users):
        raw[i] = np.frombuffer(
            fingerprints[uid].bits.to_bytes(b // 8, "little"), dtype=np.uint8
        )
    return np.unpackbits(raw, axis=1, bitorder="little")


def _split_even(positions: np.ndarray, m: int) -> list[np.ndarray]:
    q, r = divmod(len(positions), m)
    chunks: list[np.ndarray] = []
    start = 0
    for i in range(m):
        width = q + 1 if i < r else q
        if width == 0:
            break
        chunks.append(positions[start : start + width])
        start += width
    return chunks


class _PairCollector:
    """Buffers candidate row pairs and verifies them in large batches."""

    def __init__(self, words: np.ndarray, d: int):
        self._words = words
        self._d = d
        self._bufI: list[np.ndarray] = []
        self._bufJ: list[np.ndarray] = []
        self._buffered = 0
        self._triu: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        self.survivors: dict[tuple[int, int], int] = {}
        self.pairs_verified = 0

    def _triu_for(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        cached = self._triu.get(k)
        if cached is None:
            cached = np.triu_indices(k, 1)
            if k <= LEAF_SIZE:  # keep the cache small
                self._triu[k] = cached
        return cached

    def add_clique(self, members: np.ndarray) -> None:
        k = len(members)
        if k < 2:
            return
        if k > 2048:
            # degenerate giant bucket: emit row by row to bound memory
            for i in range(k - 1):
                tail = members[i + 1 :]
                self._push(np.full(len(tail), members[i], dtype=np.int64), tail)
            return
        ti, tj = self._triu_for(k)
        self._push(members[ti], members[tj])

    def add_cliques(self, blocks: np.ndarray) -> None:
        """blocks: [g, s] matrix, each row an independent clique of size s."""
        s = blocks.shape[1]
        if s < 2:
            return
        ti, tj = self._triu_for(s)
        self._push(blocks[:, ti].ravel(), blocks[:, tj].ravel())

    def _push(self, I: np.ndarray, J: np.ndarray) -> None:
        self._bufI.append(I)
        self._bufJ.append(J)
        self._buffered += len(I)
        if self._buffered >= _FLUSH_PAIRS:
            self.flush()

    def flush(self) -> None:
        if not self._bufI:
            return
        I = np.concatenate(self._bufI)
        J = np.concatenate(self._bufJ)
        self._bufI.clear()
        self._bufJ.clear()
        self._buffered = 0
        self.pairs_verified += len(I)
        xor = self._words[I] ^ self._words[J]
        dist = np.bitwise_count(xor).sum(axis=1, dtype=np.int64)
        ok = dist <= self._d
        for i, j, dd in zip(I[ok].tolist(), J[ok].tolist(), dist[ok].tolist()):
            key = (i, j) if i < j else (j, i)
            self.survivors[key] = dd


def _chunk_keys(sub_bits: np.ndarray, chunk: np.ndarray) -> np.ndarray:
    cols = sub_bits[:, chunk]
    if len(chunk) <= 63:
        return cols.astype(np.int64) @ _POW2[: len(chunk)]
    packed = np.packbits(cols, axis=1)
    _, inverse = np.unique(packed, axis=0, return_inverse=True)
    return inverse.astype(np.int64)


def _refine(
    members: np.ndarray,
    avail: np.ndarray,
    bits: np.ndarray,
    d: int,
    collector: _PairCollector,
    leaf_size: int,
) -> None:
    """Emit a superset of all within-distance pairs among ``members``.

    Invariant: every pair of members agrees on all bit positions outside
    ``avail``, so differing positions lie inside it and the d+1-way split
    guarantees at least one chunk of exact agreement per true pair.
    """
    k = len(members)
    if k <= leaf_size or len(avail) <= d:
        collector.add_clique(members)
        return
    sub = bits[members]
    chunks = _split_even(avail, d + 1)
    splitting: list[np.ndarray] = []
    for chunk in chunks:
        keys = _chunk_keys(sub, chunk)
        order = np.argsort(keys, kind="stable")
        sorted_keys = keys[order]
        cuts = np.flatnonzero(sorted_keys[1:] != sorted_keys[:-1]) + 1
        if cuts.size == 0:
            continue  # all members agree on this chunk; collapse branch covers it
        splitting.append(chunk)
        rest = [c for c in chunks if c is not chunk]
        remaining = np.concatenate(rest) if rest else avail[:0]
        starts = np.concatenate(([0], cuts))
        sizes = np.diff(np.concatenate((starts, [k])))
        for size in np.unique(sizes):
            if size < 2:
                continue
            seg_starts = starts[sizes == size]
            rows = members[order[seg_starts[:, None] + np.arange(size)[None, :]]]
            if size <= leaf_size:
                collector.add_cliques(rows)
            else:
                for row in rows:
                    _refine(row, remaining, bits, d, collector, leaf_size)
    if len(splitting) < len(chunks):
        if not splitting:
            # members are identical on every available position, hence on the
            # whole fingerprint: all pairs are true candidates
            collector.add_clique(members)
        else:
            _refine(members, np.concatenate(splitting), bits, d, collector, leaf_size)


def candidate_pairs(
    index: LshIndex,
    stats: dict | None = None,
    leaf_size: int = LEAF_SIZE,
) -> set[CandidatePair]:
    """All pairs of indexed users within the index's Hamming radius.

    Equals ``brute_force_pairs`` on the same fingerprints: the block tables
    co-bucket every true pair at least once, refinement never separates two
    members that agree on a chunk, and every emitted pair is verified with
    the exact distance.
    """
    users = list(index.fingerprints)
    n = len(users)
    if n < 2:
        if stats is not None:
            stats.update(pairs_verified=0, largest_bucket=index.largest_bucket())
        return set()
    words = _word_matrix(index.fingerprints, users, index.width)
    bits = _bit_matrix(index.fingerprints, users, index.width)
    row_of = {uid: i for i, uid in enumerate(users)}
    d = index.max_distance
    collector = _PairCollector(words, d)
    all_positions = np.arange(index.width, dtype=np.int64)

    for (start, width), table in zip(index.plan.ranges, index.tables):
        in_block = (all_positions >= start) & (all_positions < start + width)
        remaining = all_positions[~in_block]
        for bucket in table.values():
            if len(bucket) < 2:
                continue
            members = np.fromiter(
                (row_of[uid] for uid in bucket), dtype=np.int64, count=len(bucket)
            )
            _refine(members, remaining, bits, d, collector, leaf_size)
    collector.flush()

    if stats is not None:
        stats.update(
            pairs_verified=collector.pairs_verified,
            largest_bucket=index.largest_bucket(),
        )
    return {
        CandidatePair(users[i], users[j], dd)
        for (i, j), dd in collector.survivors.items()
    }


def query(index: LshIndex, fp: Fingerprint) -> list[tuple[str, int]]:
    """All indexed users within the radius of ``fp``, sorted by (distance, id).

    The owner of ``fp`` is excluded if indexed.
    """
    if not index.fingerprints:
        return []
    if fp.width != index.width:
        raise ValueError(f"width mismatch: query {fp.width} vs index {index.width}")
    results: list[tuple[int, str]] = []
    seen: set[str] = set()
    for (start, width), table in zip(index.plan.ranges, index.tables):
        key = (fp.bits >> start) & ((1 << width) - 1)
        for uid in table.get(key, ()):
            if uid == fp.owner or uid in seen:
                continue
            seen.add(uid)
            dd = (fp.bits ^ index.fingerprints[uid].bits).bit_count()
            if dd <= index.max_distance:
                results.append((dd, uid))
    return [(uid, dd) for dd, uid in sorted(results)]


def brute_force_pairs(fps: Mapping[str, Fingerprint], d: int) -> set[CandidatePair]:
    """All-pairs exact Hamming filter; the O(n^2) oracle the index replaces."""
    users = sorted(fps)
    n = len(users)
    if n < 2:
        return set()
    widths = {fps[uid].width for uid in users}
    if len(widths) != 1:
        raise ValueError(f"fingerprint width mismatch: {sorted(widths)}")
    b = widths.pop()
    words = _word_matrix(fps, users, b)
    nwords = words.shape[1]
    pairs: set[CandidatePair] = set()
    rows_per_chunk = max(1, (1 << 22) // (n * nwords))
    for i0 in range(0, n, rows_per_chunk):
        i1 = min(i0 + rows_per_chunk, n)
        xor = words[i0:i1, None, :] ^ words[None, :, :]
        dist = np.bitwise_count(xor).sum(axis=2, dtype=np.int64)
        hit_r, hit_c = np.nonzero(dist <= d)
        for r, c in zip(hit_r.tolist(), hit_c.tolist()):
            gi = i0 + r
            if c > gi:
                pairs.add(CandidatePair(users[gi], users[c], int(dist[r, c])))
    return pairs


def iter_sorted_pairs(pairs: set[CandidatePair]) -> Iterator[CandidatePair]:
    """Canonical report order: by (distance, a, b)."""
    return iter(sorted(pairs, key=lambda p: (p.distance, p.a, p.b)))
