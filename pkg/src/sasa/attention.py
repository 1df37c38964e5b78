"""Block-sparse multi-head attention over a :class:`BlockMask`.

Scores are stored only for selected blocks: one ``(S, b, b)`` buffer per head
where ``S`` is the number of selected (query block, key block) pairs, laid
out row-major so each query block's pairs are contiguous. Softmax runs once
per query position over the union of its selected key positions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
from scipy.special import erf

from .errors import ContractViolation, FormatError
from .masks import AttentionConfig, BlockMask
from .numeric import num_blocks, read_matrix, write_matrix


@dataclass(frozen=True, eq=False)
class AttentionTensors:
    """Per-head Q, K, V of shape (heads, n, d_head), or (n, d_head) for one head."""

    q: np.ndarray
    k: np.ndarray
    v: np.ndarray
    mask: BlockMask
    scale: float | None = None

    def __post_init__(self):
        q, k, v = (np.asarray(x, dtype=np.float64) for x in (self.q, self.k, self.v))
        if not (q.shape == k.shape and q.shape[:-1] == v.shape[:-1]):
            raise ValueError(f"shape mismatch: q{q.shape} k{k.shape} v{v.shape}")
        if q.ndim not in (2, 3):
            raise ValueError("tensors must be (n, d) or (heads, n, d)")
        n = q.shape[-2]
        if n != self.mask.n:
            raise ValueError(f"mask built for n={self.mask.n}, tensors have n={n}")
        for name, arr in (("q", q), ("k", k), ("v", v)):
            object.__setattr__(self, name, arr)

    @property
    def single_head(self) -> bool:
        return self.q.ndim == 2

    @property
    def n(self) -> int:
        return self.q.shape[-2]

    @property
    def d_head(self) -> int:
        return self.q.shape[-1]

    @property
    def softmax_scale(self) -> float:
        return 1.0 / math.sqrt(self.d_head) if self.scale is None else self.scale

    def heads(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if self.single_head:
            return self.q[None], self.k[None], self.v[None]
        return self.q, self.k, self.v


@dataclass
class AttentionStats:
    score_cells: int = 0
    score_bytes: int = 0
    selected_blocks: int = 0


@dataclass(frozen=True)
class AttentionGrads:
    dq: np.ndarray
    dk: np.ndarray
    dv: np.ndarray


def _to_blocks(x: np.ndarray, b: int) -> np.ndarray:
    h, n, d = x.shape
    nb = num_blocks(n, b)
    out = np.zeros((h, nb * b, d), dtype=np.float64)
    out[:, :n] = x
    return out.reshape(h, nb, b, d)


def _from_blocks(xb: np.ndarray, n: int) -> np.ndarray:
    h, nb, b, d = xb.shape
    return xb.reshape(h, nb * b, d)[:, :n]


@dataclass
class _Forward:
    qi: np.ndarray
    kj: np.ndarray
    starts: np.ndarray
    qb: np.ndarray
    kb: np.ndarray
    vb: np.ndarray
    probs: np.ndarray  # (h, S, b, b)
    out_blocks: np.ndarray  # (h, nb, b, d)
    pad: np.ndarray  # (nb, b) True on padded positions


def _forward(t: AttentionTensors, stats: AttentionStats | None = None) -> _Forward:
    mask = t.mask
    b, nb = mask.b, mask.num_blocks
    pairs = mask.pairs()
    qi, kj = pairs[:, 0], pairs[:, 1]
    row_len = np.bincount(qi, minlength=nb)
    if np.any(row_len == 0):
        empty = int(np.flatnonzero(row_len == 0)[0])
        raise ContractViolation(f"mask row {empty} selects no key blocks")
    starts = np.concatenate(([0], np.cumsum(row_len)[:-1]))

    q, k, v = t.heads()
    qb, kb, vb = _to_blocks(q, b), _to_blocks(k, b), _to_blocks(v, b)
    pad = (np.arange(nb * b) >= t.n).reshape(nb, b)

    scores = np.einsum("hpsd,hptd->hpst", qb[:, qi], kb[:, kj])
    scores *= t.softmax_scale
    if stats is not None:
        stats.score_cells = scores.size
        stats.score_bytes = scores.nbytes
        stats.selected_blocks = len(pairs)
    scores = np.where(pad[kj][None, :, None, :], -np.inf, scores)

    row_max = np.maximum.reduceat(scores.max(axis=-1), starts, axis=1)
    probs = np.exp(scores - row_max[:, qi, :, None])
    denom = np.add.reduceat(probs.sum(axis=-1), starts, axis=1)
    probs /= denom[:, qi, :, None]

    out_blocks = np.add.reduceat(np.einsum("hpst,hptd->hpsd", probs, vb[:, kj]), starts, axis=1)
    out_blocks[:, pad] = 0.0
    return _Forward(qi, kj, starts, qb, kb, vb, probs, out_blocks, pad)


def sparse_attention_forward(
    t: AttentionTensors, stats: AttentionStats | None = None
) -> np.ndarray:
    """Scaled dot-product attention restricted to the mask's selected blocks.

    If ``stats`` is given it receives the size of the score buffer.
    """
    fwd = _forward(t, stats)
    out = _from_blocks(fwd.out_blocks, t.n)
    return out[0] if t.single_head else out


def dense_oracle(t: AttentionTensors, return_probs: bool = False):
    """Full n x n attention with ``-inf`` outside the expanded block mask."""
    q, k, v = t.heads()
    allowed = t.mask.position_mask()
    scores = np.matmul(q, k.transpose(0, 2, 1)) * t.softmax_scale
    scores = np.where(allowed[None], scores, -np.inf)
    scores -= scores.max(axis=-1, keepdims=True)
    probs = np.exp(scores)
    probs /= probs.sum(axis=-1, keepdims=True)
    out = np.matmul(probs, v)
    if t.single_head:
        out, probs = out[0], probs[0]
    return (out, probs) if return_probs else out


def attention_backward(t: AttentionTensors, upstream) -> AttentionGrads:
    """Exact gradients of :func:`sparse_attention_forward` w.r.t. Q, K, V."""
    fwd = _forward(t)
    scale = t.softmax_scale
    qi, kj, starts, probs = fwd.qi, fwd.kj, fwd.starts, fwd.probs
    upstream = np.asarray(upstream, dtype=np.float64)
    if t.single_head:
        upstream = upstream[None]
    if upstream.shape != (fwd.qb.shape[0], t.n, t.v.shape[-1]):
        raise ValueError(f"upstream gradient has shape {upstream.shape}")
    b = t.mask.b
    dob = _to_blocks(upstream, b)
    dob[:, fwd.pad] = 0.0

    dvb = np.zeros_like(fwd.vb)
    np.add.at(
        dvb.transpose(1, 0, 2, 3), kj, np.einsum("hpst,hpsd->phtd", probs, dob[:, qi])
    )
    dp = np.einsum("hpsd,hptd->hpst", dob[:, qi], fwd.vb[:, kj])
    delta = np.sum(dob * fwd.out_blocks, axis=-1)  # (h, nb, b)
    ds = probs * (dp - delta[:, qi, :, None])
    ds *= scale

    dqb = np.add.reduceat(np.einsum("hpst,hptd->hpsd", ds, fwd.kb[:, kj]), starts, axis=1)
    dkb = np.zeros_like(fwd.kb)
    np.add.at(dkb.transpose(1, 0, 2, 3), kj, np.einsum("hpst,hpsd->phtd", ds, fwd.qb[:, qi]))

    grads = [_from_blocks(x, t.n) for x in (dqb, dkb, dvb)]
    if t.single_head:
        grads = [g[0] for g in grads]
    return AttentionGrads(*grads)


def gelu(x: np.ndarray) -> np.ndarray:
    return 0.5 * x * (1.0 + erf(x / math.sqrt(2.0)))


def layer_norm(x: np.ndarray, gamma: np.ndarray, beta: np.ndarray, eps: float = 1e-5) -> np.ndarray:
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    return (x - mu) / np.sqrt(var + eps) * gamma + beta


_MATRICES = frozenset({"wq", "wk", "wv", "wo", "w1", "w2"})


@dataclass(eq=False)
class EncoderLayerParams:
    """Post-norm transformer encoder layer weights; matrices map row vectors (x @ W)."""

    wq: np.ndarray
    bq: np.ndarray
    wk: np.ndarray
    bk: np.ndarray
    wv: np.ndarray
    bv: np.ndarray
    wo: np.ndarray
    bo: np.ndarray
    ln1_gamma: np.ndarray
    ln1_beta: np.ndarray
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    ln2_gamma: np.ndarray
    ln2_beta: np.ndarray

    def __post_init__(self):
        for f in fields(self):
            arr = np.asarray(getattr(self, f.name), dtype=np.float64)
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"parameter {f.name} has non-finite entries")
            setattr(self, f.name, arr)
        d = self.d_model
        d_ff = self.w1.shape[1]
        expected = {
            "wq": (d, d), "wk": (d, d), "wv": (d, d), "wo": (d, d),
            "bq": (d,), "bk": (d,), "bv": (d,), "bo": (d,),
            "ln1_gamma": (d,), "ln1_beta": (d,), "ln2_gamma": (d,), "ln2_beta": (d,),
            "w1": (d, d_ff), "b1": (d_ff,), "w2": (d_ff, d), "b2": (d,),
        }
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise ValueError(f"{name} has shape {getattr(self, name).shape}, expected {shape}")

    @property
    def d_model(self) -> int:
        return self.wq.shape[0]

    @property
    def d_ff(self) -> int:
        return self.w1.shape[1]

    @classmethod
    def init(
        cls,
        d_model: int,
        rng: np.random.Generator,
        d_ff: int | None = None,
        std: float = 0.02,
        bias: bool = True,
    ) -> "EncoderLayerParams":
        d_ff = 4 * d_model if d_ff is None else d_ff

        def mat(r, c):
            return rng.normal(0.0, std, size=(r, c))

        def vec(m):
            return rng.normal(0.0, std, size=m) if bias else np.zeros(m)

        return cls(
            wq=mat(d_model, d_model), bq=vec(d_model),
            wk=mat(d_model, d_model), bk=vec(d_model),
            wv=mat(d_model, d_model), bv=vec(d_model),
            wo=mat(d_model, d_model), bo=vec(d_model),
            ln1_gamma=np.ones(d_model), ln1_beta=np.zeros(d_model),
            w1=mat(d_model, d_ff), b1=vec(d_ff),
            w2=mat(d_ff, d_model), b2=vec(d_model),
            ln2_gamma=np.ones(d_model), ln2_beta=np.zeros(d_model),
        )

    def save(self, directory: str | Path, heads: int) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        lines = [f"d_model={self.d_model} d_ff={self.d_ff} heads={heads}"]
        for f in fields(self):
            arr = getattr(self, f.name)
            write_matrix(directory / f"{f.name}.mat", arr if arr.ndim == 2 else arr[None])
            lines.append(f.name)
        (directory / "manifest.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, directory: str | Path) -> tuple["EncoderLayerParams", int]:
        """Load parameters and the head count recorded in the manifest."""
        directory = Path(directory)
        lines = (directory / "manifest.txt").read_text(encoding="utf-8").splitlines()
        if not lines:
            raise FormatError(f"{directory}: empty manifest")
        header = dict(part.split("=", 1) for part in lines[0].split())
        names = {f.name for f in fields(cls)}
        if set(lines[1:]) != names:
            raise FormatError(f"{directory}: manifest does not list exactly the layer parameters")
        values = {}
        for f in fields(cls):
            arr = read_matrix(directory / f"{f.name}.mat")
            values[f.name] = arr if f.name in _MATRICES else arr[0]
        return cls(**values), int(header["heads"])


def _split_heads(x: np.ndarray, heads: int) -> np.ndarray:
    n, d = x.shape
    return x.reshape(n, heads, d // heads).transpose(1, 0, 2)


def _merge_heads(x: np.ndarray) -> np.ndarray:
    h, n, dh = x.shape
    return x.transpose(1, 0, 2).reshape(n, h * dh)


def _encoder_layer(x, params: EncoderLayerParams, heads: int, attend):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != params.d_model:
        raise ValueError(f"input shape {x.shape} does not match d_model={params.d_model}")
    if params.d_model % heads:
        raise ValueError(f"d_model={params.d_model} not divisible by heads={heads}")
    q = _split_heads(x @ params.wq + params.bq, heads)
    k = _split_heads(x @ params.wk + params.bk, heads)
    v = _split_heads(x @ params.wv + params.bv, heads)
    attn, extra = attend(q, k, v)
    attn = _merge_heads(attn) @ params.wo + params.bo
    h1 = layer_norm(x + attn, params.ln1_gamma, params.ln1_beta)
    ff = gelu(h1 @ params.w1 + params.b1) @ params.w2 + params.b2
    return layer_norm(h1 + ff, params.ln2_gamma, params.ln2_beta), extra


def encoder_layer_forward(
    x,
    params: EncoderLayerParams,
    mask: BlockMask,
    heads: int,
    stats: AttentionStats | None = None,
) -> np.ndarray:
    """One encoder layer whose heads all share ``mask``."""

    def attend(q, k, v):
        return sparse_attention_forward(AttentionTensors(q, k, v, mask), stats), None

    out, _ = _encoder_layer(x, params, heads, attend)
    return out


def sinusoidal_positions(n: int, d: int) -> np.ndarray:
    pos = np.arange(n)[:, None]
    rate = np.exp(-math.log(10000.0) * (np.arange(0, d, 2) / d))
    table = np.zeros((n, d))
    table[:, 0::2] = np.sin(pos * rate)
    table[:, 1::2] = np.cos(pos * rate[: d // 2])
    return table


@dataclass(eq=False)
class ToyEncoder:
    """A small randomly initialised encoder used as a stand-in attention source.

    It runs dense attention and exposes its per-layer, per-head attention
    maps for frequency accumulation.
    """

    embedding: np.ndarray
    layers: list[EncoderLayerParams]
    heads: int
    positions: np.ndarray = field(repr=False)

    @classmethod
    def create(
        cls,
        vocab_size: int,
        d_model: int = 64,
        heads: int = 4,
        num_layers: int = 2,
        seed: int = 0,
        max_len: int = 4096,
        std: float = 0.35,
    ) -> "ToyEncoder":
        # std well above the usual 0.02 so attention is peaked rather than uniform
        rng = np.random.default_rng(seed)
        embedding = rng.normal(0.0, 1.0, size=(vocab_size, d_model))
        layers = [EncoderLayerParams.init(d_model, rng, std=std) for _ in range(num_layers)]
        return cls(embedding, layers, heads, sinusoidal_positions(max_len, d_model))

    def attention_maps(self, ids) -> np.ndarray:
        """Dense attention probabilities, shape (layers, heads, n, n)."""
        ids = np.asarray(ids, dtype=np.int64)
        n = ids.size
        if n > self.positions.shape[0]:
            raise ValueError(f"sequence of {n} tokens exceeds max_len {self.positions.shape[0]}")
        cfg = AttentionConfig(n=n, b=n, w=1, g=(), k=0, d_model=self.embedding.shape[1], heads=self.heads)
        mask = BlockMask.dense(cfg)

        def attend(q, k, v):
            return dense_oracle(AttentionTensors(q, k, v, mask), return_probs=True)

        x = self.embedding[ids] + self.positions[:n]
        maps = []
        for params in self.layers:
            x, probs = _encoder_layer(x, params, self.heads, attend)
            maps.append(probs)
        return np.stack(maps)
