"""Randomized checks of the sparse kernel against the dense oracle and finite differences."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .attention import AttentionTensors, attention_backward, dense_oracle, sparse_attention_forward
from .frequency import PairScoreMatrix
from .masks import AttentionConfig, build_mask
from .numeric import finite_diff_gradient
from .syntax import TokenAdjacency


def random_pair_scores(rng: np.random.Generator, n: int, density: float = 0.02) -> PairScoreMatrix:
    m = sparse.random(n, n, density=density, random_state=rng, data_rvs=lambda s: rng.integers(1, 10, s))
    return PairScoreMatrix(n, m.astype(np.int64).tocsr())


def random_adjacency(rng: np.random.Generator, n: int, density: float = 0.02) -> TokenAdjacency:
    upper = sparse.triu(sparse.random(n, n, density=density, random_state=rng)).tocoo()
    pairs = {(int(i), int(j)) for i, j in zip(upper.row, upper.col)}
    pairs |= {(i, i) for i in range(n)}
    return TokenAdjacency(n, 2, frozenset(pairs))


def random_config(rng: np.random.Generator, n: int | None = None, b: int | None = None) -> AttentionConfig:
    n = int(rng.choice([17, 64, 128, 256])) if n is None else n
    b = int(rng.choice([4, 8, 16])) if b is None else b
    nb = -(-n // b)
    g_count = min(int(rng.integers(0, 3)), nb)
    g = tuple(sorted(rng.choice(nb, size=g_count, replace=False).tolist()))
    return AttentionConfig(
        n=n, b=b, w=int(rng.choice([1, 3])), g=g, k=int(rng.choice([0, 2, 3])), d_model=8, heads=2
    )


def random_instance(
    rng: np.random.Generator, cfg: AttentionConfig, d_head: int | None = None
) -> AttentionTensors:
    """Random Q/K/V plus a mask built from random sparse frequency and adjacency."""
    mask = build_mask(cfg, random_pair_scores(rng, cfg.n), random_adjacency(rng, cfg.n))
    d_head = cfg.d_head if d_head is None else d_head
    q, k, v = (rng.standard_normal((cfg.heads, cfg.n, d_head)) for _ in range(3))
    return AttentionTensors(q, k, v, mask)


def oracle_deviation(t: AttentionTensors) -> float:
    return float(np.max(np.abs(sparse_attention_forward(t) - dense_oracle(t))))


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """``||a - n|| / max(||a||, ||n||)`` with Frobenius norms; 0 when both vanish."""
    denom = max(np.linalg.norm(analytic), np.linalg.norm(numeric))
    if denom == 0:
        return 0.0
    return float(np.linalg.norm(analytic - numeric) / denom)


@dataclass(frozen=True)
class GradientCheck:
    dq: float
    dk: float
    dv: float

    @property
    def worst(self) -> float:
        return max(self.dq, self.dk, self.dv)


def gradient_check(t: AttentionTensors, rng: np.random.Generator, eps: float = 1e-5) -> GradientCheck:
    """Compare the analytic backward with central differences of ``sum(out * R)``."""
    readout = rng.standard_normal(t.q.shape[:-1] + (t.v.shape[-1],))
    grads = attention_backward(t, readout)

    def objective(which: str):
        def f(x):
            parts = {"q": t.q, "k": t.k, "v": t.v, which: x}
            out = sparse_attention_forward(AttentionTensors(parts["q"], parts["k"], parts["v"], t.mask, t.scale))
            return float(np.sum(out * readout))

        return f

    return GradientCheck(
        relative_error(grads.dq, finite_diff_gradient(objective("q"), t.q, eps)),
        relative_error(grads.dk, finite_diff_gradient(objective("k"), t.k, eps)),
        relative_error(grads.dv, finite_diff_gradient(objective("v"), t.v, eps)),
    )
