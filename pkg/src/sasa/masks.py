"""Block-level attention patterns and their union into a :class:`BlockMask`.

Patterns are boolean ``(num_blocks, num_blocks)`` matrices indexed
``[query_block, key_block]``:

* local   -- ``|i - j| <= w // 2``
* global  -- ``i in g or j in g``
* top-k   -- per query block, the ``k`` key blocks with the largest summed
  corpus frequency
* AST     -- same selection rule applied to summed structural adjacency
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._io import parse_header, split_fields
from .errors import FormatError
from .frequency import PairScoreMatrix
from .numeric import block_reduce_sum, num_blocks
from .syntax import TokenAdjacency


class Pattern(enum.IntFlag):
    LOCAL = 1
    GLOBAL = 2
    TOPK = 4
    AST = 8


_LETTERS = ((Pattern.LOCAL, "L"), (Pattern.GLOBAL, "G"), (Pattern.TOPK, "T"), (Pattern.AST, "A"))
ALL_PATTERNS = Pattern.LOCAL | Pattern.GLOBAL | Pattern.TOPK | Pattern.AST


def provenance_string(bits: int) -> str:
    return "".join(ch if bits & flag else "-" for flag, ch in _LETTERS)


def parse_provenance(text: str) -> Pattern:
    if len(text) != 4:
        raise FormatError(f"provenance {text!r} must have 4 characters")
    bits = Pattern(0)
    for (flag, ch), got in zip(_LETTERS, text):
        if got == ch:
            bits |= flag
        elif got != "-":
            raise FormatError(f"provenance {text!r}: unexpected {got!r}")
    return bits


def default_globals(n: int, b: int, count: int = 2) -> tuple[int, ...]:
    """The first ``count`` blocks, clipped to the blocks that exist."""
    return tuple(range(min(count, num_blocks(n, b))))


@dataclass(frozen=True)
class AttentionConfig:
    n: int = 1024
    b: int = 32
    w: int = 3
    g: tuple[int, ...] = (0, 1)
    k: int = 3
    d_model: int = 64
    heads: int = 4
    k_ast: int | None = None  # AST budget; None means reuse k

    def __post_init__(self):
        object.__setattr__(self, "g", tuple(sorted(set(int(x) for x in self.g))))
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.b < 1:
            raise ValueError("block size must be >= 1")
        if self.w < 1 or self.w % 2 == 0:
            raise ValueError(f"window w must be odd and >= 1, got {self.w}")
        if self.k < 0 or (self.k_ast is not None and self.k_ast < 0):
            raise ValueError("top-k budgets must be >= 0")
        bad = [x for x in self.g if not 0 <= x < self.num_blocks]
        if bad:
            raise ValueError(f"global blocks {bad} outside [0, {self.num_blocks})")
        if self.heads < 1 or self.d_model % self.heads:
            raise ValueError("d_model must be a positive multiple of heads")

    @property
    def num_blocks(self) -> int:
        return num_blocks(self.n, self.b)

    @property
    def ast_budget(self) -> int:
        return self.k if self.k_ast is None else self.k_ast

    @property
    def d_head(self) -> int:
        return self.d_model // self.heads

    @classmethod
    def standard(cls, n: int = 1024, **overrides) -> "AttentionConfig":
        """w=3, two global blocks, k=3, b=32."""
        b = overrides.pop("b", 32)
        g = overrides.pop("g", default_globals(n, b, 2))
        return cls(n=n, b=b, w=3, g=g, k=3, **overrides)


def local_pattern(cfg: AttentionConfig) -> np.ndarray:
    idx = np.arange(cfg.num_blocks)
    return np.abs(idx[:, None] - idx[None, :]) <= cfg.w // 2


def global_pattern(cfg: AttentionConfig) -> np.ndarray:
    nb = cfg.num_blocks
    is_global = np.zeros(nb, dtype=bool)
    is_global[list(cfg.g)] = True
    return is_global[:, None] | is_global[None, :]


def topk_pattern(block_scores, k: int) -> np.ndarray:
    """Per row, the ``k`` highest-scoring columns among those with score > 0.

    Equal scores go to the smaller column index.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    scores = np.asarray(block_scores)
    out = np.zeros(scores.shape, dtype=bool)
    if k == 0 or scores.size == 0:
        return out
    order = np.argsort(-scores, axis=1, kind="stable")[:, :k]
    rows = np.arange(scores.shape[0])[:, None]
    out[rows, order] = True
    out &= scores > 0
    return out


@dataclass(frozen=True, eq=False)
class BlockMask:
    n: int
    b: int
    w: int
    g: tuple[int, ...]
    k: int
    bits: np.ndarray = field(repr=False)  # (num_blocks, num_blocks) uint8 of Pattern flags

    @property
    def num_blocks(self) -> int:
        return self.bits.shape[0]

    @property
    def selected(self) -> list[np.ndarray]:
        return [np.flatnonzero(row) for row in self.bits]

    def pairs(self) -> np.ndarray:
        """Selected (query_block, key_block) pairs in row-major order, shape (S, 2)."""
        return np.argwhere(self.bits)

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.bits))

    def provenance(self, i: int, j: int) -> Pattern:
        return Pattern(int(self.bits[i, j]))

    def __contains__(self, pair) -> bool:
        i, j = pair
        return bool(self.bits[i, j])

    def __eq__(self, other) -> bool:
        if not isinstance(other, BlockMask):
            return NotImplemented
        return (self.n, self.b, self.w, self.g, self.k) == (
            other.n, other.b, other.w, other.g, other.k
        ) and np.array_equal(self.bits, other.bits)

    def restrict(self, keep: Pattern) -> "BlockMask":
        """Drop provenance outside ``keep``; pairs left with no provenance disappear."""
        bits = (self.bits & np.uint8(int(keep))).astype(np.uint8)
        return BlockMask(self.n, self.b, self.w, self.g, self.k, bits)

    def position_mask(self) -> np.ndarray:
        """Expand to an n x n boolean mask over token positions."""
        b = self.b
        dense = np.repeat(np.repeat(self.bits.astype(bool), b, axis=0), b, axis=1)
        return dense[: self.n, : self.n]

    def dumps(self) -> str:
        g = ",".join(str(x) for x in self.g)
        lines = [f"n={self.n} b={self.b} w={self.w} g={g} k={self.k}"]
        lines += [
            f"{i}\t{j}\t{provenance_string(int(self.bits[i, j]))}" for i, j in self.pairs()
        ]
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def loads(cls, text: str) -> "BlockMask":
        lines = text.splitlines()
        if not lines:
            raise FormatError("mask file is empty")
        h = parse_header(lines[0], ("n", "b", "w", "g", "k"))
        n, b = int(h["n"]), int(h["b"])
        g = tuple(int(x) for x in h["g"].split(",") if x)
        nb = num_blocks(n, b)
        bits = np.zeros((nb, nb), dtype=np.uint8)
        for lineno, line in enumerate(lines[1:], 2):
            i, j, prov = split_fields(line, 3, "mask", lineno)
            i, j = int(i), int(j)
            if not (0 <= i < nb and 0 <= j < nb):
                raise FormatError(f"mask line {lineno}: block ({i}, {j}) out of range")
            bits[i, j] = int(parse_provenance(prov))
            if not bits[i, j]:
                raise FormatError(f"mask line {lineno}: empty provenance")
        return cls(n, b, int(h["w"]), g, int(h["k"]), bits)

    @classmethod
    def load(cls, path: str | Path) -> "BlockMask":
        return cls.loads(Path(path).read_text(encoding="utf-8"))

    @classmethod
    def dense(cls, cfg: AttentionConfig) -> "BlockMask":
        """Every block pair selected, tagged LOCAL."""
        nb = cfg.num_blocks
        bits = np.full((nb, nb), int(Pattern.LOCAL), dtype=np.uint8)
        return cls(cfg.n, cfg.b, cfg.w, cfg.g, cfg.k, bits)


def build_mask(
    cfg: AttentionConfig,
    pair_scores: PairScoreMatrix | None = None,
    adjacency: TokenAdjacency | None = None,
    *,
    use_topk: bool = True,
    use_ast: bool = True,
) -> BlockMask:
    """Union of the local, global, top-k and AST patterns, with provenance.

    Missing ``pair_scores`` / ``adjacency`` count as all-zero inputs.
    """
    for name, obj in (("pair_scores", pair_scores), ("adjacency", adjacency)):
        if obj is not None and obj.n != cfg.n:
            raise ValueError(f"{name} has n={obj.n}, config has n={cfg.n}")

    bits = np.zeros((cfg.num_blocks, cfg.num_blocks), dtype=np.uint8)
    bits[local_pattern(cfg)] |= np.uint8(Pattern.LOCAL)
    bits[global_pattern(cfg)] |= np.uint8(Pattern.GLOBAL)
    if use_topk and pair_scores is not None:
        freq_blocks = block_reduce_sum(pair_scores.values, cfg.b)
        bits[topk_pattern(freq_blocks, cfg.k)] |= np.uint8(Pattern.TOPK)
    if use_ast and adjacency is not None:
        ast_blocks = block_reduce_sum(adjacency.to_sparse(), cfg.b)
        bits[topk_pattern(ast_blocks, cfg.ast_budget)] |= np.uint8(Pattern.AST)
    return BlockMask(cfg.n, cfg.b, cfg.w, cfg.g, cfg.k, bits)
