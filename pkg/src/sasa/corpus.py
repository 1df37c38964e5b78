"""Deterministic synthetic Java sources for fixtures and benchmarks."""

from __future__ import annotations

import random
from pathlib import Path
from typing import Iterator

from .tokenizer import split_tokens

_NOUNS = [
    "count", "total", "index", "buffer", "node", "value", "result", "items", "left",
    "right", "offset", "limit", "cache", "queue", "name", "score", "width", "height",
]
_TYPES = ["int", "long", "double", "boolean"]
_ARRAYS = ["data", "keys", "values", "weights", "tokens", "edges"]
_CALLS = ["update", "flush", "reset", "push", "visit", "emit", "check", "merge"]


class _Writer:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.lines: list[str] = []
        self.depth = 0

    def emit(self, text: str) -> None:
        self.lines.append("    " * self.depth + text)

    def var(self) -> str:
        return self.rng.choice(_NOUNS)

    def arr(self) -> str:
        return self.rng.choice(_ARRAYS)

    def expr(self, depth: int = 0) -> str:
        r = self.rng.random()
        if depth > 1 or r < 0.3:
            return self.rng.choice([self.var(), str(self.rng.randint(0, 99))])
        if r < 0.5:
            return f"{self.arr()}.length"
        if r < 0.65:
            return f"{self.arr()}[{self.var()}]"
        if r < 0.8:
            return f"{self.rng.choice(_CALLS)}({self.expr(depth + 1)})"
        op = self.rng.choice(["+", "-", "*", "%"])
        return f"{self.expr(depth + 1)} {op} {self.expr(depth + 1)}"

    def cond(self) -> str:
        op = self.rng.choice(["<", ">", "<=", "!=", "=="])
        return f"{self.var()} {op} {self.expr(1)}"

    def statement(self, depth: int) -> None:
        r = self.rng.random()
        if depth >= 3 or r < 0.45:
            kind = self.rng.random()
            if kind < 0.5:
                self.emit(f"{self.var()} = {self.expr()};")
            elif kind < 0.7:
                self.emit(f"{self.rng.choice(_CALLS)}({self.expr()}, {self.var()});")
            elif kind < 0.85:
                self.emit(f"{self.rng.choice(_TYPES)} {self.var()}{self.rng.randint(0, 9)} = {self.expr()};")
            else:
                self.emit(f"// {self.rng.choice(_CALLS)} the {self.var()}")
            return
        if r < 0.6:
            self.emit(f"while ({self.var()} < {self.arr()}.length) {{")
        elif r < 0.8:
            i = self.var()
            self.emit(f"for (int {i} = 0; {i} < {self.arr()}.length; {i}++) {{")
        else:
            self.emit(f"if ({self.cond()}) {{")
        self.depth += 1
        for _ in range(self.rng.randint(1, 4)):
            self.statement(depth + 1)
        self.depth -= 1
        if r >= 0.8 and self.rng.random() < 0.4:
            self.emit("} else {")
            self.depth += 1
            self.statement(depth + 1)
            self.depth -= 1
        self.emit("}")

    def method(self, name: str) -> None:
        params = ", ".join(f"{self.rng.choice(_TYPES)} {v}" for v in self.rng.sample(_NOUNS, self.rng.randint(0, 3)))
        self.emit(f"public {self.rng.choice(_TYPES)} {name}({params}) {{")
        self.depth += 1
        for _ in range(self.rng.randint(2, 6)):
            self.statement(0)
        self.emit(f"return {self.expr()};")
        self.depth -= 1
        self.emit("}")


def synthetic_java(seed: int, min_tokens: int = 200) -> str:
    """A compilable-looking Java class with at least ``min_tokens`` tokens."""
    rng = random.Random(seed)
    w = _Writer(rng)
    w.emit(f"public class Sample{seed} {{")
    w.depth += 1
    for arr in _ARRAYS:
        w.emit(f"private int[] {arr} = new int[{rng.randint(4, 64)}];")
    count = 0
    while True:
        w.method(f"{rng.choice(_CALLS)}{rng.choice(_NOUNS).title()}{count}")
        count += 1
        if len(split_tokens("\n".join(w.lines))) + 1 >= min_tokens:
            break
    w.depth -= 1
    w.emit("}")
    return "\n".join(w.lines) + "\n"


def synthetic_corpus(seed: int, count: int, min_tokens: int = 200) -> Iterator[str]:
    for i in range(count):
        yield synthetic_java(seed * 100_003 + i, min_tokens)


def read_sources(paths) -> list[tuple[str, str]]:
    """``(name, text)`` for every file, expanding directories (sorted)."""
    out = []
    for p in map(Path, paths):
        files = sorted(x for x in p.rglob("*") if x.is_file()) if p.is_dir() else [p]
        out.extend((str(f), f.read_text(encoding="utf-8")) for f in files)
    return out
