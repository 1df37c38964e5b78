"""Whitespace/punctuation tokenizer with byte-span alignment.

Word runs (``\\w+``) are one token each; every other non-space character is
its own token. Spans are byte offsets into the UTF-8 encoding of the source
so they line up with parser node ranges.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import FormatError

PAD, CLS, SEP, UNK = 0, 1, 2, 3
RESERVED = ("[PAD]", "[CLS]", "[SEP]", "[UNK]")
SPECIAL_IDS = frozenset({PAD, CLS, SEP})
DEFAULT_MAX_LEN = 1024

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")

Span = tuple[int, int]


def split_tokens(source: str) -> list[tuple[str, int, int]]:
    """Surface tokens of ``source`` as ``(text, start_byte, end_byte)``."""
    if source.isascii():
        return [(m.group(), m.start(), m.end()) for m in _TOKEN_RE.finditer(source)]
    widths = np.fromiter((len(ch.encode("utf-8")) for ch in source), dtype=np.int64, count=len(source))
    offsets = np.concatenate(([0], np.cumsum(widths)))
    return [
        (m.group(), int(offsets[m.start()]), int(offsets[m.end()]))
        for m in _TOKEN_RE.finditer(source)
    ]


@dataclass(frozen=True)
class Vocabulary:
    tokens: tuple[str, ...]

    def __post_init__(self):
        if self.tokens[:4] != RESERVED:
            raise ValueError("vocabulary must start with the reserved tokens")
        if len(set(self.tokens)) != len(self.tokens):
            raise ValueError("vocabulary tokens must be distinct")
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.tokens)})

    @property
    def size(self) -> int:
        return len(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def lookup(self, token: str) -> int:
        return self._index.get(token, UNK)

    def save(self, path: str | Path) -> None:
        Path(path).write_text("".join(t + "\n" for t in self.tokens), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        lines = Path(path).read_text(encoding="utf-8").split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if tuple(lines[:4]) != RESERVED:
            raise FormatError(f"{path}: first four lines must be {RESERVED}")
        return cls(tuple(lines))


def build_vocabulary(corpus: Iterable[str], max_size: int = 50_000) -> Vocabulary:
    """Frequency-ranked vocabulary; ties break lexicographically."""
    if max_size <= 4:
        raise ValueError("max_size must exceed the 4 reserved ids")
    counts: Counter[str] = Counter()
    seen_any = False
    for source in corpus:
        seen_any = True
        counts.update(text for text, _, _ in split_tokens(source))
    if not seen_any:
        raise ValueError("corpus is empty")
    ranked = sorted(counts, key=lambda t: (-counts[t], t))
    return Vocabulary(RESERVED + tuple(ranked[: max_size - 4]))


@dataclass(frozen=True)
class TokenizedCode:
    """Token ids for one source, with a byte span per non-special token.

    ``spans[i]`` is None for CLS/SEP.
    """

    ids: tuple[int, ...]
    spans: tuple[Span | None, ...]
    source: str

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def n(self) -> int:
        return len(self.ids)

    def ids_array(self) -> np.ndarray:
        return np.asarray(self.ids, dtype=np.int64)

    def is_special(self, i: int) -> bool:
        return self.spans[i] is None

    def surface(self, i: int) -> str | None:
        span = self.spans[i]
        if span is None:
            return None
        return self.source.encode("utf-8")[span[0] : span[1]].decode("utf-8")

    def dump(self, vocab: Vocabulary) -> str:
        """One ``id<TAB>start<TAB>end<TAB>surface`` line per token."""
        lines = []
        for i, tid in enumerate(self.ids):
            span = self.spans[i]
            if span is None:
                lines.append(f"{tid}\t-1\t-1\t{vocab.tokens[tid]}")
            else:
                lines.append(f"{tid}\t{span[0]}\t{span[1]}\t{self.surface(i)}")
        return "\n".join(lines) + "\n"


def tokenize(source: str, vocab: Vocabulary, max_len: int = DEFAULT_MAX_LEN) -> TokenizedCode:
    """Tokenize with head truncation so the result fits ``max_len`` incl. CLS/SEP."""
    if max_len < 3:
        raise ValueError("max_len must leave room for CLS, SEP and one token")
    pieces = split_tokens(source)[: max_len - 2]
    ids = [CLS] + [vocab.lookup(text) for text, _, _ in pieces] + [SEP]
    spans: list[Span | None] = [None] + [(s, e) for _, s, e in pieces] + [None]
    return TokenizedCode(tuple(ids), tuple(spans), source)


def load_token_dump(text: str) -> list[tuple[int, Span | None, str]]:
    """Parse a token dump back into ``(id, span, surface)`` rows."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split("\t")
        if len(parts) != 4:
            raise FormatError(f"token dump line {lineno}: expected 4 fields")
        tid, start, end = int(parts[0]), int(parts[1]), int(parts[2])
        rows.append((tid, None if start < 0 else (start, end), parts[3]))
    return rows


def pad_ids(ids: Sequence[int], n: int) -> np.ndarray:
    out = np.full(n, PAD, dtype=np.int64)
    out[: len(ids)] = ids[:n]
    return out
