"""Corpus-level token-pair attention frequency counts and per-input lookup.

Every (query, key) position pair whose attention weight exceeds the
threshold bumps the count of its (query-token-id, key-token-id) pair by one.
The attention source is whatever the caller supplies.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from ._io import parse_header, split_fields
from .errors import FormatError

DEFAULT_THRESHOLD = 0.1


@dataclass
class FrequencyMatrix:
    vocab_size: int
    threshold: float = DEFAULT_THRESHOLD
    counts: Counter = field(default_factory=Counter)
    samples_seen: int = 0

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ValueError(f"threshold must be in (0, 1), got {self.threshold}")

    @property
    def nnz(self) -> int:
        return len(self.counts)

    def total(self) -> int:
        return sum(self.counts.values())

    def to_csr(self) -> sparse.csr_matrix:
        v = self.vocab_size
        if not self.counts:
            return sparse.csr_matrix((v, v), dtype=np.int64)
        keys = np.array(list(self.counts.keys()), dtype=np.int64)
        vals = np.fromiter(self.counts.values(), dtype=np.int64, count=len(self.counts))
        return sparse.csr_matrix((vals, (keys[:, 0], keys[:, 1])), shape=(v, v))

    def merge(self, other: "FrequencyMatrix") -> "FrequencyMatrix":
        """Combine counts from two shards; commutative and associative."""
        if other.vocab_size != self.vocab_size or other.threshold != self.threshold:
            raise ValueError("cannot merge frequency matrices with different |V| or threshold")
        return FrequencyMatrix(
            self.vocab_size,
            self.threshold,
            self.counts + other.counts,
            self.samples_seen + other.samples_seen,
        )

    def dumps(self) -> str:
        lines = [f"|V|={self.vocab_size} samples={self.samples_seen} threshold={self.threshold!r}"]
        lines += [f"{i}\t{j}\t{c}" for (i, j), c in sorted(self.counts.items())]
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def loads(cls, text: str) -> "FrequencyMatrix":
        lines = text.splitlines()
        if not lines:
            raise FormatError("frequency file is empty")
        header = parse_header(lines[0], ("|V|", "samples", "threshold"))
        fm = cls(int(header["|V|"]), float(header["threshold"]), samples_seen=int(header["samples"]))
        for lineno, line in enumerate(lines[1:], 2):
            i, j, c = map(int, split_fields(line, 3, "frequency", lineno))
            if not (0 <= i < fm.vocab_size and 0 <= j < fm.vocab_size) or c < 1:
                raise FormatError(f"frequency line {lineno}: bad entry ({i}, {j}, {c})")
            fm.counts[(i, j)] = c
        return fm

    @classmethod
    def load(cls, path: str | Path) -> "FrequencyMatrix":
        return cls.loads(Path(path).read_text(encoding="utf-8"))


def _check_ids(ids, vocab_size: int) -> np.ndarray:
    ids = np.asarray(ids, dtype=np.int64)
    if ids.ndim != 1:
        raise ValueError("ids must be a 1-D sequence")
    if ids.size and (ids.min() < 0 or ids.max() >= vocab_size):
        raise ValueError(f"token id out of range for |V|={vocab_size}")
    return ids


def aggregate_attention(attn, reduce: str = "mean") -> np.ndarray:
    """Collapse stacked (..., n, n) attention maps to one n x n map.

    ``mean`` averages over every leading axis (heads, layers); ``max`` takes
    the elementwise maximum, so a pair counts if any single head exceeds
    the threshold.
    """
    attn = np.asarray(attn, dtype=np.float64)
    if attn.ndim < 2 or attn.shape[-1] != attn.shape[-2]:
        raise ValueError(f"attention maps must be (..., n, n), got {attn.shape}")
    if attn.ndim == 2:
        return attn
    stacked = attn.reshape(-1, *attn.shape[-2:])
    if reduce == "mean":
        return stacked.mean(axis=0)
    if reduce == "max":
        return stacked.max(axis=0)
    raise ValueError(f"unknown reduction {reduce!r}")


def accumulate_frequency(
    fm: FrequencyMatrix,
    ids: Sequence[int],
    attn,
    threshold: float | None = None,
    reduce: str = "mean",
) -> FrequencyMatrix:
    """Add one sample's above-threshold pairs to ``fm`` in place and return it.

    ``attn`` is an n x n row-stochastic map, or a stack of them that is first
    reduced with :func:`aggregate_attention`.
    """
    threshold = fm.threshold if threshold is None else threshold
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    ids = _check_ids(ids, fm.vocab_size)
    attn = np.asarray(attn, dtype=np.float64)
    n = ids.size
    if attn.shape[-2:] != (n, n):
        raise ValueError(f"attention shape {attn.shape} does not match {n} ids")
    if n and not np.allclose(attn.sum(axis=-1), 1.0, rtol=0.0, atol=1e-6):
        raise ValueError("attention rows must sum to 1")
    agg = aggregate_attention(attn, reduce)

    rows, cols = np.nonzero(agg > threshold)
    keys = ids[rows] * fm.vocab_size + ids[cols]
    uniq, hits = np.unique(keys, return_counts=True)
    for key, hit in zip(uniq.tolist(), hits.tolist()):
        fm.counts[divmod(key, fm.vocab_size)] += hit
    fm.samples_seen += 1
    return fm


def build_frequency(
    samples: Iterable[tuple[Sequence[int], np.ndarray]],
    vocab_size: int,
    threshold: float = DEFAULT_THRESHOLD,
    reduce: str = "mean",
) -> FrequencyMatrix:
    fm = FrequencyMatrix(vocab_size, threshold)
    for ids, attn in samples:
        accumulate_frequency(fm, ids, attn, reduce=reduce)
    return fm


@dataclass(frozen=True, eq=False)
class PairScoreMatrix:
    """Per-input n x n lookup of corpus counts (sparse, integer)."""

    n: int
    values: sparse.csr_matrix

    def dense(self) -> np.ndarray:
        return self.values.toarray()

    @classmethod
    def zeros(cls, n: int) -> "PairScoreMatrix":
        return cls(n, sparse.csr_matrix((n, n), dtype=np.int64))


def lookup_pair_scores(fm: FrequencyMatrix, ids: Sequence[int]) -> PairScoreMatrix:
    ids = _check_ids(ids, fm.vocab_size)
    sub = fm.to_csr()[ids][:, ids]
    sub.eliminate_zeros()
    return PairScoreMatrix(ids.size, sub.tocsr())
