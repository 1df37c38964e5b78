"""Syntax trees from tree-sitter grammars and token-level structural adjacency.

Two tokens are structurally connected when the tree nodes they align to are
at most ``D`` edges apart. Tokens align to the deepest node whose byte range
covers their span; CLS/SEP carry no structure.
"""

from __future__ import annotations

import importlib
from bisect import bisect_right
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import sparse

from ._io import parse_header, split_fields
from .errors import AlignmentError, FormatError, UnsupportedLanguageError
from .tokenizer import TokenizedCode

DEFAULT_DISTANCE = 2

_GRAMMARS = {
    "java": "tree_sitter_java",
    "c": "tree_sitter_c",
}


@dataclass(eq=False)
class SyntaxNode:
    kind: str
    start: int
    end: int
    index: int
    depth: int
    parent: SyntaxNode | None = None
    children: list[SyntaxNode] = field(default_factory=list)

    @property
    def is_error(self) -> bool:
        return self.kind == "ERROR"

    def __repr__(self) -> str:
        return f"SyntaxNode({self.kind!r}, {self.start}, {self.end}, #{self.index})"


@dataclass(eq=False)
class SyntaxTree:
    root: SyntaxNode
    nodes: list[SyntaxNode]  # preorder; nodes[i].index == i
    language: str

    def find(self, kind: str) -> list[SyntaxNode]:
        return [node for node in self.nodes if node.kind == kind]

    def text(self, source: str, node: SyntaxNode) -> str:
        return source.encode("utf-8")[node.start : node.end].decode("utf-8")

    def sexp(self) -> str:
        def walk(node: SyntaxNode) -> str:
            if not node.children:
                return node.kind
            return f"({node.kind} " + " ".join(walk(c) for c in node.children) + ")"

        return walk(self.root)


def supported_languages() -> tuple[str, ...]:
    return tuple(sorted(_GRAMMARS))


@lru_cache(maxsize=None)
def _parser(language: str):
    import tree_sitter

    module_name = _GRAMMARS.get(language)
    if module_name is None:
        raise UnsupportedLanguageError(
            f"no grammar for {language!r}; available: {', '.join(supported_languages())}"
        )
    try:
        grammar = importlib.import_module(module_name)
    except ImportError as exc:
        raise UnsupportedLanguageError(f"grammar package {module_name} is not installed") from exc
    return tree_sitter.Parser(tree_sitter.Language(grammar.language()))


def parse_to_tree(source: str, language: str = "java") -> SyntaxTree:
    """Parse ``source``; syntax errors become ``ERROR`` nodes.

    The root range is widened to the whole source so leading/trailing
    whitespace and comments are covered.
    """
    data = source.encode("utf-8")
    ts_root = _parser(language).parse(data).root_node

    root = SyntaxNode(ts_root.type, 0, len(data), 0, 0)
    nodes = [root]
    # explicit stack: generated sources can nest deeper than the recursion limit
    stack = [(c, root) for c in reversed(ts_root.children)]
    while stack:
        ts_node, parent = stack.pop()
        node = SyntaxNode(
            ts_node.type, ts_node.start_byte, ts_node.end_byte, len(nodes), parent.depth + 1, parent
        )
        nodes.append(node)
        parent.children.append(node)
        stack.extend((c, node) for c in reversed(ts_node.children))
    return SyntaxTree(root, nodes, language)


def _covering_child(node: SyntaxNode, start: int, end: int) -> SyntaxNode | None:
    kids = node.children
    pos = bisect_right([c.start for c in kids], start) - 1
    while pos >= 0:
        child = kids[pos]
        if child.end > child.start:  # zero-width (MISSING) nodes never cover
            return child if end <= child.end else None
        pos -= 1
    return None


def align_tokens(tree: SyntaxTree, toks: TokenizedCode) -> list[SyntaxNode | None]:
    """Deepest covering node per token; None for special tokens."""
    out: list[SyntaxNode | None] = []
    lo, hi = tree.root.start, tree.root.end
    for i, span in enumerate(toks.spans):
        if span is None:
            out.append(None)
            continue
        start, end = span
        if start < lo or end > hi or start >= end:
            raise AlignmentError(i, f"span {span} outside parsed range [{lo}, {hi})")
        node = tree.root
        while (child := _covering_child(node, start, end)) is not None:
            node = child
        out.append(node)
    return out


@dataclass(frozen=True)
class TokenAdjacency:
    """Symmetric token-pair connection set, stored as ``(i, j)`` with i <= j."""

    n: int
    distance_cap: int
    pairs: frozenset[tuple[int, int]]

    def __contains__(self, pair) -> bool:
        i, j = pair
        return (min(i, j), max(i, j)) in self.pairs

    def connected(self, i: int, j: int) -> bool:
        return (i, j) in self

    @property
    def nnz(self) -> int:
        """Entries of the full symmetric matrix."""
        return sum(1 if i == j else 2 for i, j in self.pairs)

    def to_sparse(self) -> sparse.csr_matrix:
        if not self.pairs:
            return sparse.csr_matrix((self.n, self.n), dtype=np.int64)
        ij = np.array(sorted(self.pairs), dtype=np.int64)
        off = ij[:, 0] != ij[:, 1]
        rows = np.concatenate([ij[:, 0], ij[off, 1]])
        cols = np.concatenate([ij[:, 1], ij[off, 0]])
        data = np.ones(rows.size, dtype=np.int64)
        return sparse.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))

    def dumps(self) -> str:
        lines = [f"n={self.n} D={self.distance_cap}"]
        lines += [f"{i}\t{j}" for i, j in sorted(self.pairs)]
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def loads(cls, text: str) -> "TokenAdjacency":
        lines = text.splitlines()
        if not lines:
            raise FormatError("adjacency file is empty")
        header = parse_header(lines[0], ("n", "D"))
        n, cap = int(header["n"]), int(header["D"])
        pairs = set()
        for lineno, line in enumerate(lines[1:], 2):
            i, j = map(int, split_fields(line, 2, "adjacency", lineno))
            if not (0 <= i <= j < n):
                raise FormatError(f"adjacency line {lineno}: bad pair ({i}, {j}) for n={n}")
            pairs.add((i, j))
        return cls(n, cap, frozenset(pairs))

    @classmethod
    def load(cls, path: str | Path) -> "TokenAdjacency":
        return cls.loads(Path(path).read_text(encoding="utf-8"))

    @classmethod
    def empty(cls, n: int, distance_cap: int = DEFAULT_DISTANCE) -> "TokenAdjacency":
        return cls(n, distance_cap, frozenset())


def _neighbourhood(node: SyntaxNode, radius: int) -> list[SyntaxNode]:
    seen = {node.index}
    out = [node]
    frontier = deque([(node, 0)])
    while frontier:
        cur, dist = frontier.popleft()
        if dist == radius:
            continue
        nbrs = list(cur.children)
        if cur.parent is not None:
            nbrs.append(cur.parent)
        for nxt in nbrs:
            if nxt.index not in seen:
                seen.add(nxt.index)
                out.append(nxt)
                frontier.append((nxt, dist + 1))
    return out


def build_token_adjacency(
    tree: SyntaxTree, toks: TokenizedCode, distance_cap: int = DEFAULT_DISTANCE
) -> TokenAdjacency:
    if distance_cap < 1:
        raise ValueError("distance cap must be >= 1")
    aligned = align_tokens(tree, toks)
    by_node: dict[int, list[int]] = {}
    for i, node in enumerate(aligned):
        if node is not None:
            by_node.setdefault(node.index, []).append(i)

    pairs: set[tuple[int, int]] = set()
    for idx, here in by_node.items():
        for other in _neighbourhood(tree.nodes[idx], distance_cap):
            there = by_node.get(other.index)
            if not there:
                continue
            for i in here:
                for j in there:
                    if i <= j:
                        pairs.add((i, j))
    return TokenAdjacency(toks.n, distance_cap, frozenset(pairs))
