"""Analytic block-count model and a measured scaling / score-memory benchmark."""

from __future__ import annotations

import json
import statistics
import time
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from .attention import AttentionStats, AttentionTensors, sparse_attention_forward
from .frequency import FrequencyMatrix
from .masks import AttentionConfig, global_pattern, local_pattern
from .pipeline import mask_for_input, prepare_input
from .tokenizer import Vocabulary


def analytic_block_bound(cfg: AttentionConfig) -> int:
    """Blocks selected if every query block attends to w + |g| + 2k key blocks."""
    nb = cfg.num_blocks
    per_row = cfg.w + len(cfg.g) + cfg.k + cfg.ast_budget
    return nb * min(nb, per_row)


def worst_case_blocks(cfg: AttentionConfig) -> int:
    """Largest union any top-k / AST scores can produce.

    Global query blocks attend to every key block, so this can exceed
    :func:`analytic_block_bound` once ``num_blocks > w + |g| + 2k``.
    """
    nb = cfg.num_blocks
    fixed = np.count_nonzero(local_pattern(cfg) | global_pattern(cfg), axis=1)
    return int(np.minimum(nb, fixed + cfg.k + cfg.ast_budget).sum())


@dataclass
class CostReport:
    fixture: str
    n: int
    b: int
    w: int
    g: int
    k: int
    selected_blocks: int
    dense_blocks: int
    analytic_bound: int
    score_cells_sparse: int
    score_cells_dense: int
    ratio: float
    wall_time: float
    peak_score_bytes: int

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def _time_forward(t: AttentionTensors, repeats: int) -> tuple[float, AttentionStats]:
    stats = AttentionStats()
    sparse_attention_forward(t, stats)  # warm-up
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        sparse_attention_forward(t)
        times.append(time.perf_counter() - start)
    return statistics.median(times), stats


def measure_scaling(
    configs: Sequence[AttentionConfig],
    fixtures: Iterable[tuple[str, str]],
    vocab: Vocabulary,
    fm: FrequencyMatrix | None,
    *,
    language: str = "java",
    distance_cap: int = 2,
    repeats: int = 5,
    seed: int = 0,
    errors: list[str] | None = None,
) -> list[CostReport]:
    """One report per (config, fixture).

    Sources are tokenized to each config's ``n`` and padded. Failing fixtures
    are recorded in ``errors`` (if given) and skipped.
    """
    fixtures = list(fixtures)
    reports = []
    for cfg in configs:
        rng = np.random.default_rng([seed, cfg.n])
        q, k, v = (rng.standard_normal((cfg.heads, cfg.n, cfg.d_head)) for _ in range(3))
        for name, source in fixtures:
            try:
                prepared = prepare_input(source, vocab, cfg.n, language, distance_cap)
                mask = mask_for_input(prepared, fm, cfg)
            except Exception as exc:  # per-file failure must not stop the sweep
                if errors is not None:
                    errors.append(f"{name} (n={cfg.n}): {type(exc).__name__}: {exc}")
                continue
            wall, stats = _time_forward(AttentionTensors(q, k, v, mask), repeats)
            sparse_cells = mask.count * cfg.b**2
            dense_cells = cfg.n**2
            reports.append(
                CostReport(
                    fixture=name,
                    n=cfg.n,
                    b=cfg.b,
                    w=cfg.w,
                    g=len(cfg.g),
                    k=cfg.k,
                    selected_blocks=mask.count,
                    dense_blocks=cfg.num_blocks**2,
                    analytic_bound=analytic_block_bound(cfg),
                    score_cells_sparse=sparse_cells,
                    score_cells_dense=dense_cells,
                    ratio=sparse_cells / dense_cells,
                    wall_time=wall,
                    peak_score_bytes=stats.score_bytes // cfg.heads,
                )
            )
    return reports


def fit_r2(x, y, degree: int) -> float:
    """Coefficient of determination of a least-squares polynomial fit."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    coeffs = np.polyfit(x, y, degree)
    resid = y - np.polyval(coeffs, x)
    total = np.sum((y - y.mean()) ** 2)
    if total == 0:
        return 1.0
    return float(1.0 - np.sum(resid**2) / total)


def mean_by_n(reports: Sequence[CostReport], field: str) -> tuple[np.ndarray, np.ndarray]:
    ns = sorted({r.n for r in reports})
    ys = [np.mean([getattr(r, field) for r in reports if r.n == n]) for n in ns]
    return np.array(ns, dtype=np.float64), np.array(ys)


def format_table(reports: Sequence[CostReport]) -> str:
    header = f"{'fixture':<28} {'n':>5} {'blocks':>7} {'bound':>6} {'ratio':>7} {'score KiB':>10} {'ms':>8}"
    rows = [header, "-" * len(header)]
    for r in reports:
        name = r.fixture if len(r.fixture) <= 28 else "..." + r.fixture[-25:]
        rows.append(
            f"{name:<28} {r.n:>5} {r.selected_blocks:>7} {r.analytic_bound:>6} "
            f"{r.ratio:>7.4f} {r.peak_score_bytes / 1024:>10.1f} {r.wall_time * 1e3:>8.2f}"
        )
    return "\n".join(rows) + "\n"
