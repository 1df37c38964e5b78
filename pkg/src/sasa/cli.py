"""Command-line entry point: ``sasa <command> [options]``.

Commands run one pipeline stage each and write that stage's file format:

    build-vocab  sources -> vocab.txt
    build-freq   sources + vocab -> frequency file (toy encoder or supplied attention)
    build-adj    source + vocab -> adjacency file (+ optional token dump)
    build-mask   frequency + adjacency + tokens -> mask file
    attn         Q/K/V matrix files + mask -> output matrix file
    verify       sparse kernel vs dense oracle, analytic vs finite-difference gradients
    bench        block-count / score-memory scaling report

All randomness comes from ``--seed`` via ``numpy.random.default_rng``.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from .attention import AttentionTensors, ToyEncoder, dense_oracle, sparse_attention_forward
from .corpus import read_sources, synthetic_corpus
from .frequency import DEFAULT_THRESHOLD, FrequencyMatrix, accumulate_frequency, lookup_pair_scores
from .masks import AttentionConfig, BlockMask, build_mask, default_globals
from .numeric import read_matrix, write_matrix
from .pipeline import frequency_from_encoder, prepare_input
from .syntax import DEFAULT_DISTANCE, TokenAdjacency
from .tokenizer import Vocabulary, build_vocabulary, load_token_dump, pad_ids, tokenize
from .verify import gradient_check, oracle_deviation, random_config, random_instance

ORACLE_TOL = 1e-10
GRAD_TOL = 1e-4


class StageError(Exception):
    def __init__(self, stage: str, message: str):
        super().__init__(message)
        self.stage = stage


def _csv_ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _add_cfg_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=1024, help="sequence length (tokens)")
    p.add_argument("--b", type=int, default=32, help="block size")
    p.add_argument("--w", type=int, default=3, help="sliding window (blocks, odd)")
    p.add_argument("--g", type=str, default=None, help="global block indices, csv (default: first two)")
    p.add_argument("--k", type=int, default=3, help="top-k budget (blocks)")
    p.add_argument("--k-ast", type=int, default=None, help="AST budget (default: --k)")
    p.add_argument("--heads", type=int, default=4)
    p.add_argument("--d-model", type=int, default=64)


def _cfg(args, n: int | None = None) -> AttentionConfig:
    n = args.n if n is None else n
    g = default_globals(n, args.b, 2) if args.g is None else tuple(_csv_ints(args.g))
    return AttentionConfig(
        n=n, b=args.b, w=args.w, g=g, k=args.k, d_model=args.d_model, heads=args.heads, k_ast=args.k_ast
    )


def _sources(paths) -> list[tuple[str, str]]:
    sources = read_sources(paths)
    if not sources:
        raise StageError("input", "no source files found")
    return sources


def cmd_build_vocab(args) -> None:
    sources = _sources(args.sources)
    vocab = build_vocabulary((text for _, text in sources), args.max_size)
    vocab.save(args.out)
    print(f"vocabulary: {vocab.size} tokens from {len(sources)} files -> {args.out}")


def cmd_build_freq(args) -> None:
    vocab = Vocabulary.load(args.vocab)
    sources = _sources(args.sources)
    if args.attn_dir:
        fm = FrequencyMatrix(vocab.size, args.threshold)
        for name, text in sources:
            toks = tokenize(text, vocab, max_len=args.n)
            attn_path = Path(args.attn_dir) / (Path(name).stem + ".mat")
            accumulate_frequency(fm, toks.ids, read_matrix(attn_path), reduce=args.reduce)
    else:
        encoder = ToyEncoder.create(
            vocab.size, d_model=args.d_model, heads=args.heads, num_layers=args.layers, seed=args.seed,
            max_len=max(args.n, 8),
        )
        fm = frequency_from_encoder(
            (text for _, text in sources), vocab, encoder, args.n, args.threshold, args.reduce
        )
    fm.save(args.out)
    print(f"frequency: {fm.nnz} pairs, {fm.total()} hits over {fm.samples_seen} samples -> {args.out}")


def cmd_build_adj(args) -> None:
    vocab = Vocabulary.load(args.vocab)
    source = Path(args.source).read_text(encoding="utf-8")
    prepared = prepare_input(source, vocab, args.n, args.lang, args.D)
    prepared.adjacency.save(args.out)
    if args.tokens_out:
        Path(args.tokens_out).write_text(prepared.toks.dump(vocab), encoding="utf-8")
    print(f"adjacency: n={args.n} D={args.D} {len(prepared.adjacency.pairs)} pairs -> {args.out}")


def _input_ids(args, n: int) -> np.ndarray:
    if args.tokens:
        ids = [tid for tid, _, _ in load_token_dump(Path(args.tokens).read_text(encoding="utf-8"))]
    elif args.source and args.vocab:
        vocab = Vocabulary.load(args.vocab)
        ids = list(tokenize(Path(args.source).read_text(encoding="utf-8"), vocab, max_len=n).ids)
    else:
        raise StageError("input", "--freq needs token ids: pass --tokens or --source with --vocab")
    if len(ids) > n:
        raise StageError("input", f"{len(ids)} tokens exceed --n {n}")
    return pad_ids(ids, n)


def cmd_build_mask(args) -> None:
    cfg = _cfg(args)
    adjacency = TokenAdjacency.load(args.adj) if args.adj else None
    scores = None
    if args.freq:
        fm = FrequencyMatrix.load(args.freq)
        scores = lookup_pair_scores(fm, _input_ids(args, cfg.n))
    try:
        mask = build_mask(cfg, scores, adjacency, use_topk=not args.no_topk, use_ast=not args.no_ast)
    except ValueError as exc:
        raise StageError("build-mask", str(exc)) from exc
    mask.save(args.out)
    print(f"mask: {mask.count}/{mask.num_blocks ** 2} blocks -> {args.out}")


def cmd_attn(args) -> None:
    mask = BlockMask.load(args.mask)
    q, k, v = (read_matrix(p) for p in (args.q, args.k, args.v))
    if q.shape[1] % args.heads or v.shape[1] % args.heads:
        raise StageError("attn", f"matrix widths not divisible by --heads {args.heads}")

    def split(m):
        return m.reshape(m.shape[0], args.heads, -1).transpose(1, 0, 2)

    try:
        t = AttentionTensors(split(q), split(k), split(v), mask)
    except ValueError as exc:
        raise StageError("attn", str(exc)) from exc
    out = dense_oracle(t) if args.oracle else sparse_attention_forward(t)
    write_matrix(args.out, out.transpose(1, 0, 2).reshape(t.n, -1))
    print(f"attention output {t.n}x{out.shape[0] * out.shape[2]} -> {args.out}")


def cmd_verify(args) -> int:
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for _ in range(args.cases):
        cfg = random_config(rng, args.n, args.b)
        worst = max(worst, oracle_deviation(random_instance(rng, cfg)))
    print(f"oracle: {args.cases} cases at n={args.n} b={args.b}, max deviation {worst:.3e} (tol {ORACLE_TOL:g})")
    grad_worst = 0.0
    for _ in range(args.grad_cases):
        cfg = random_config(rng, min(args.n, 24), min(args.b, 4))
        cfg = replace(cfg, heads=1, d_model=4)
        grad_worst = max(grad_worst, gradient_check(random_instance(rng, cfg), rng).worst)
    print(f"gradient: {args.grad_cases} cases, max relative error {grad_worst:.3e} (tol {GRAD_TOL:g})")
    ok = worst < ORACLE_TOL and grad_worst <= GRAD_TOL
    print("verify:", "PASS" if ok else "FAIL")
    return 0 if ok else 1


def cmd_bench(args) -> None:
    ns = _csv_ints(args.sweep)
    if args.fixtures:
        fixtures = _sources(args.fixtures)
    else:
        texts = synthetic_corpus(args.seed, args.synthetic_count, max(ns) + 64)
        fixtures = [(f"synthetic-{i}", t) for i, t in enumerate(texts)]
    if args.vocab:
        vocab = Vocabulary.load(args.vocab)
    else:
        vocab = build_vocabulary(t for _, t in fixtures)
    if args.freq:
        fm = FrequencyMatrix.load(args.freq)
    else:
        encoder = ToyEncoder.create(vocab.size, d_model=args.d_model, heads=args.heads, seed=args.seed)
        fm = frequency_from_encoder((t for _, t in fixtures), vocab, encoder, args.freq_len, args.threshold)

    configs = [_cfg(args, n) for n in ns]
    errors: list[str] = []
    reports = bench_mod.measure_scaling(
        configs, fixtures, vocab, fm, language=args.lang, distance_cap=args.D,
        repeats=args.repeats, seed=args.seed, errors=errors,
    )
    for line in errors:
        print(f"warning [bench]: {line}", file=sys.stderr)
    if args.out:
        Path(args.out).write_text("".join(r.to_json() + "\n" for r in reports), encoding="utf-8")
    table = bench_mod.format_table(reports)
    if args.table:
        Path(args.table).write_text(table, encoding="utf-8")
    print(table, end="")
    if len(ns) >= 2:
        x, y = bench_mod.mean_by_n(reports, "selected_blocks")
        _, dense = bench_mod.mean_by_n(reports, "score_cells_dense")
        if len(x) >= 2:
            print(f"selected blocks vs n: linear R^2 = {bench_mod.fit_r2(x, y, 1):.6f}")
            print(f"dense score cells vs n: linear R^2 = {bench_mod.fit_r2(x, dense, 1):.6f}, "
                  f"quadratic R^2 = {bench_mod.fit_r2(x, dense, 2):.6f}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sasa", description="Structure-aware block-sparse attention tools.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-vocab", help="build a vocabulary from source files")
    p.add_argument("sources", nargs="+")
    p.add_argument("--max-size", type=int, default=50_000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_vocab)

    p = sub.add_parser("build-freq", help="accumulate the token-pair attention frequency matrix")
    p.add_argument("sources", nargs="+")
    p.add_argument("--vocab", required=True)
    p.add_argument("--n", type=int, default=512, help="max tokens per sample")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.add_argument("--reduce", choices=["mean", "max"], default="mean", help="head/layer aggregation")
    p.add_argument("--attn-dir", help="directory of <stem>.mat attention matrices (skips the toy encoder)")
    p.add_argument("--heads", type=int, default=4)
    p.add_argument("--d-model", type=int, default=64)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_freq)

    p = sub.add_parser("build-adj", help="build the token structural adjacency for one source")
    p.add_argument("source")
    p.add_argument("--vocab", required=True)
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--D", type=int, default=DEFAULT_DISTANCE, help="tree-distance cap")
    p.add_argument("--lang", default="java")
    p.add_argument("--tokens-out", help="also write the token dump")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_adj)

    p = sub.add_parser("build-mask", help="union local/global/top-k/AST block patterns")
    _add_cfg_flags(p)
    p.add_argument("--freq", help="frequency file")
    p.add_argument("--adj", help="adjacency file")
    p.add_argument("--tokens", help="token dump giving the input ids")
    p.add_argument("--source", help="source file (with --vocab) giving the input ids")
    p.add_argument("--vocab")
    p.add_argument("--no-topk", action="store_true", help="ablate the frequency top-k pattern")
    p.add_argument("--no-ast", action="store_true", help="ablate the AST pattern")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_mask)

    p = sub.add_parser("attn", help="block-sparse attention over matrix files")
    p.add_argument("--q", required=True)
    p.add_argument("--k", required=True)
    p.add_argument("--v", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--heads", type=int, default=1)
    p.add_argument("--oracle", action="store_true", help="use the dense masked oracle")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_attn)

    p = sub.add_parser("verify", help="oracle-equivalence and gradient checks")
    p.add_argument("--n", type=int, default=128)
    p.add_argument("--b", type=int, default=8)
    p.add_argument("--cases", type=int, default=20)
    p.add_argument("--grad-cases", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="measured block counts and score memory over a length sweep")
    _add_cfg_flags(p)
    p.add_argument("fixtures", nargs="*", help="source files/dirs (default: synthetic corpus)")
    p.add_argument("--sweep", default="256,512,1024,2048")
    p.add_argument("--vocab")
    p.add_argument("--freq")
    p.add_argument("--freq-len", type=int, default=512)
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.add_argument("--D", type=int, default=DEFAULT_DISTANCE)
    p.add_argument("--lang", default="java")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--synthetic-count", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="JSON-lines report")
    p.add_argument("--table", help="plain-text table")
    p.set_defaults(func=cmd_bench)
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        status = args.func(args)
    except StageError as exc:
        print(f"error [{exc.stage}]: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error [{args.command}]: {exc}", file=sys.stderr)
        return 2
    return status or 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
