"""Dense and block-view tensor primitives, plus a finite-difference harness.

Matrices are plain 2-D ``float64`` numpy arrays; :func:`as_matrix` is the
single gate that enforces shape and finiteness.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import sparse

from .errors import ContractViolation, FormatError, NumericError

MATRIX_MAGIC = b"SASA"
MATRIX_VERSION = 1
_HEADER = struct.Struct("<4sIII")


def as_matrix(data, *, name: str = "matrix") -> np.ndarray:
    """Validate ``data`` as a finite 2-D float64 matrix and return it."""
    m = np.asarray(data, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


@dataclass(frozen=True)
class BlockView:
    """A matrix viewed as ``num_blocks`` row blocks of ``block_size`` rows.

    Trailing rows past ``base.shape[0]`` are zero padding.
    """

    base: np.ndarray
    block_size: int
    num_blocks: int
    pad_len: int
    blocks: np.ndarray  # (num_blocks, block_size, cols)

    @property
    def n(self) -> int:
        return self.base.shape[0]

    def pad_mask(self) -> np.ndarray:
        """Boolean (num_blocks, block_size), True on padded rows."""
        flat = np.arange(self.num_blocks * self.block_size) >= self.n
        return flat.reshape(self.num_blocks, self.block_size)

    def unblock(self) -> np.ndarray:
        return self.blocks.reshape(-1, self.blocks.shape[-1])[: self.n]


def num_blocks(n: int, b: int) -> int:
    return -(-n // b)


def block_reshape(m, b: int) -> BlockView:
    if b < 1:
        raise ValueError(f"block size must be >= 1, got {b}")
    m = as_matrix(m)
    n, d = m.shape
    nb = num_blocks(n, b)
    padded = np.zeros((nb * b, d), dtype=np.float64)
    padded[:n] = m
    return BlockView(m, b, nb, nb * b - n, padded.reshape(nb, b, d))


def block_score(qv: BlockView, kv: BlockView, i: int, j: int) -> np.ndarray:
    """Score tile ``Q'[i] @ K'[j]^T`` of shape (b, b)."""
    if qv.block_size != kv.block_size:
        raise ValueError("query and key views use different block sizes")
    if qv.blocks.shape[-1] != kv.blocks.shape[-1]:
        raise ValueError("query and key views differ in feature width")
    if not (0 <= i < qv.num_blocks):
        raise ValueError(f"query block {i} out of range [0, {qv.num_blocks})")
    if not (0 <= j < kv.num_blocks):
        raise ValueError(f"key block {j} out of range [0, {kv.num_blocks})")
    return qv.blocks[i] @ kv.blocks[j].T


def masked_row_softmax(scores, allowed, scale: float = 1.0) -> np.ndarray:
    scores = np.asarray(scores, dtype=np.float64)
    allowed = np.asarray(allowed, dtype=bool)
    if scores.shape != allowed.shape:
        raise ValueError("scores and allowed differ in shape")
    if not allowed.any():
        raise ContractViolation("softmax row has no allowed entries")
    z = scale * scores[allowed]
    e = np.exp(z - z.max())
    out = np.zeros_like(scores)
    out[allowed] = e / e.sum()
    return out


def finite_diff_gradient(
    f: Callable[[np.ndarray], float], x, eps: float = 1e-5
) -> np.ndarray:
    """Central-difference gradient of scalar ``f`` at ``x``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    x = np.array(x, dtype=np.float64)
    grad = np.empty_like(x)
    flat, gflat = x.reshape(-1), grad.reshape(-1)
    for idx in range(flat.size):
        orig = flat[idx]
        flat[idx] = orig + eps
        fp = float(f(x))
        flat[idx] = orig - eps
        fm = float(f(x))
        flat[idx] = orig
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise NumericError(f"non-finite objective at entry {idx}")
        gflat[idx] = (fp - fm) / (2.0 * eps)
    return grad


def write_matrix(path: str | Path, m) -> None:
    m = as_matrix(m)
    rows, cols = m.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MATRIX_MAGIC, MATRIX_VERSION, rows, cols))
        fh.write(m.astype("<f8").tobytes(order="C"))


def read_matrix(path: str | Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: truncated matrix header")
    magic, version, rows, cols = _HEADER.unpack_from(raw)
    if magic != MATRIX_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != MATRIX_VERSION:
        raise FormatError(f"{path}: unsupported matrix version {version}")
    body = raw[_HEADER.size :]
    if len(body) != rows * cols * 8:
        raise FormatError(f"{path}: expected {rows}x{cols} floats, got {len(body)} bytes")
    m = np.frombuffer(body, dtype="<f8").astype(np.float64).reshape(rows, cols)
    return as_matrix(m, name=str(path))


def block_reduce_sum(entries, b: int) -> np.ndarray:
    """Sum an n x n matrix (dense or scipy sparse) over b x b tiles.

    Integer inputs stay integer, so counts are exact.
    """
    if b < 1:
        raise ValueError(f"block size must be >= 1, got {b}")
    coo = sparse.coo_matrix(entries)
    n_rows, n_cols = coo.shape
    dtype = np.int64 if np.issubdtype(coo.dtype, np.integer) or coo.dtype == bool else np.float64
    out = np.zeros((num_blocks(n_rows, b), num_blocks(n_cols, b)), dtype=dtype)
    np.add.at(out, (coo.row // b, coo.col // b), coo.data.astype(dtype))
    return out
