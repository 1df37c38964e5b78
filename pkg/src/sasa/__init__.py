"""Structure-aware block-sparse attention for long source code."""

from .attention import (
    AttentionStats,
    AttentionTensors,
    EncoderLayerParams,
    ToyEncoder,
    attention_backward,
    dense_oracle,
    encoder_layer_forward,
    sparse_attention_forward,
)
from .bench import CostReport, analytic_block_bound, measure_scaling, worst_case_blocks
from .frequency import FrequencyMatrix, PairScoreMatrix, accumulate_frequency, lookup_pair_scores
from .masks import AttentionConfig, BlockMask, Pattern, build_mask, global_pattern, local_pattern, topk_pattern
from .numeric import block_reduce_sum, block_reshape, block_score, finite_diff_gradient, masked_row_softmax
from .syntax import SyntaxTree, TokenAdjacency, align_tokens, build_token_adjacency, parse_to_tree
from .tokenizer import TokenizedCode, Vocabulary, build_vocabulary, tokenize

__version__ = "0.1.0"

__all__ = [
    "AttentionConfig",
    "AttentionStats",
    "AttentionTensors",
    "BlockMask",
    "CostReport",
    "EncoderLayerParams",
    "FrequencyMatrix",
    "PairScoreMatrix",
    "Pattern",
    "SyntaxTree",
    "TokenAdjacency",
    "TokenizedCode",
    "ToyEncoder",
    "Vocabulary",
    "accumulate_frequency",
    "align_tokens",
    "analytic_block_bound",
    "attention_backward",
    "block_reduce_sum",
    "block_reshape",
    "block_score",
    "build_mask",
    "build_token_adjacency",
    "build_vocabulary",
    "dense_oracle",
    "encoder_layer_forward",
    "finite_diff_gradient",
    "global_pattern",
    "local_pattern",
    "lookup_pair_scores",
    "masked_row_softmax",
    "measure_scaling",
    "parse_to_tree",
    "sparse_attention_forward",
    "tokenize",
    "topk_pattern",
    "worst_case_blocks",
]
