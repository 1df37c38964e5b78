"""End-to-end helpers: source text -> padded ids, adjacency, frequency, mask."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .attention import ToyEncoder
from .frequency import DEFAULT_THRESHOLD, FrequencyMatrix, PairScoreMatrix, accumulate_frequency, lookup_pair_scores
from .masks import AttentionConfig, BlockMask, build_mask
from .syntax import DEFAULT_DISTANCE, TokenAdjacency, build_token_adjacency, parse_to_tree
from .tokenizer import TokenizedCode, Vocabulary, pad_ids, tokenize


@dataclass(frozen=True, eq=False)
class PreparedInput:
    toks: TokenizedCode
    ids: np.ndarray  # padded with PAD to the model length
    adjacency: TokenAdjacency


def prepare_input(
    source: str,
    vocab: Vocabulary,
    n: int,
    language: str = "java",
    distance_cap: int = DEFAULT_DISTANCE,
) -> PreparedInput:
    """Tokenize to at most ``n`` ids, pad with PAD to exactly ``n``, build adjacency.

    The whole source is parsed; adjacency only covers tokens kept in the window.
    """
    toks = tokenize(source, vocab, max_len=n)
    ids = pad_ids(toks.ids, n)
    adj = build_token_adjacency(parse_to_tree(source, language), toks, distance_cap)
    return PreparedInput(toks, ids, TokenAdjacency(n, adj.distance_cap, adj.pairs))


def frequency_from_encoder(
    sources: Iterable[str],
    vocab: Vocabulary,
    encoder: ToyEncoder,
    max_len: int = 512,
    threshold: float = DEFAULT_THRESHOLD,
    reduce: str = "mean",
) -> FrequencyMatrix:
    fm = FrequencyMatrix(vocab.size, threshold)
    for source in sources:
        toks = tokenize(source, vocab, max_len=max_len)
        accumulate_frequency(fm, toks.ids, encoder.attention_maps(toks.ids), reduce=reduce)
    return fm


def mask_for_input(
    prepared: PreparedInput,
    fm: FrequencyMatrix | None,
    cfg: AttentionConfig,
    *,
    use_topk: bool = True,
    use_ast: bool = True,
) -> BlockMask:
    if prepared.ids.size != cfg.n:
        raise ValueError(f"prepared input has n={prepared.ids.size}, config has n={cfg.n}")
    scores = lookup_pair_scores(fm, prepared.ids) if fm is not None else PairScoreMatrix.zeros(cfg.n)
    return build_mask(cfg, scores, prepared.adjacency, use_topk=use_topk, use_ast=use_ast)
