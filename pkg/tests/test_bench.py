import json

import numpy as np
import pytest

from conftest import corpus_files
from sasa.attention import ToyEncoder
from sasa.bench import (
    CostReport,
    analytic_block_bound,
    fit_r2,
    format_table,
    mean_by_n,
    measure_scaling,
    worst_case_blocks,
)
from sasa.masks import AttentionConfig
from sasa.pipeline import frequency_from_encoder
from sasa.tokenizer import build_vocabulary

SWEEP = (256, 512, 1024, 2048)


@pytest.fixture(scope="module")
def long_setup():
    fixtures = [(p.name, p.read_text(encoding="utf-8")) for p in corpus_files()[:3]]
    vocab = build_vocabulary(text for _, text in fixtures)
    encoder = ToyEncoder.create(vocab.size, d_model=32, heads=4, seed=0)
    fm = frequency_from_encoder((text for _, text in fixtures), vocab, encoder, max_len=256)
    return fixtures, vocab, fm


def test_bound_at_default_config():
    assert analytic_block_bound(AttentionConfig()) == 32 * 11 == 352


def test_bound_saturates_to_dense():
    cfg = AttentionConfig(n=128, b=32, w=3, g=(0, 1), k=3)
    assert analytic_block_bound(cfg) == cfg.num_blocks**2 == 16


def test_bound_linear_in_blocks():
    bounds = [analytic_block_bound(AttentionConfig.standard(n)) for n in SWEEP]
    assert bounds == [8 * 8, 16 * 11, 32 * 11, 64 * 11]
    tail = [analytic_block_bound(AttentionConfig.standard(n)) for n in (512, 1024, 2048, 4096)]
    assert np.all(np.diff(tail) / np.diff([16, 32, 64, 128]) == 11)


def test_separate_ast_budget():
    assert analytic_block_bound(AttentionConfig(k_ast=1)) == 32 * 9


def test_worst_case_exceeds_row_bound():
    # global query blocks see every key block, which the per-row count ignores
    cfg = AttentionConfig()
    # rows 0-1 full, rows 2 and 31 share a local block with the globals
    assert worst_case_blocks(cfg) == 2 * 32 + 10 + 28 * 11 + 10 == 392
    assert worst_case_blocks(cfg) > analytic_block_bound(cfg)
    assert worst_case_blocks(AttentionConfig(g=())) <= analytic_block_bound(AttentionConfig(g=()))


def test_diagonal_only_ratio(long_setup):
    fixtures, vocab, _ = long_setup
    cfg = AttentionConfig(n=512, b=32, w=1, g=(), k=0)
    (report,) = measure_scaling([cfg], fixtures[:1], vocab, None, repeats=1)
    assert report.selected_blocks == 16
    assert report.ratio == 1 / 16


def test_measured_scaling(long_setup):
    fixtures, vocab, fm = long_setup
    configs = [AttentionConfig.standard(n) for n in SWEEP]
    reports = measure_scaling(configs, fixtures, vocab, fm, repeats=1)
    assert len(reports) == len(SWEEP) * len(fixtures)
    for r in reports:
        assert 0 < r.ratio <= 1
        assert r.selected_blocks <= r.analytic_bound
        assert r.score_cells_sparse == r.selected_blocks * 32 * 32
        assert r.peak_score_bytes == r.score_cells_sparse * 8
        assert r.dense_blocks == (r.n // 32) ** 2
    at_1024 = [r for r in reports if r.n == 1024]
    assert all(r.ratio <= 352 / 1024 for r in at_1024)
    x, y = mean_by_n(reports, "selected_blocks")
    assert fit_r2(x, y, 1) >= 0.999
    _, dense = mean_by_n(reports, "score_cells_dense")
    assert fit_r2(x, dense, 2) == pytest.approx(1.0)
    assert fit_r2(x, dense, 1) < 0.99


def test_reports_reproducible(long_setup):
    fixtures, vocab, fm = long_setup
    cfg = [AttentionConfig.standard(512)]

    def strip(rs):
        return [{**json.loads(r.to_json()), "wall_time": 0} for r in rs]

    a = measure_scaling(cfg, fixtures[:2], vocab, fm, repeats=1, seed=3)
    b = measure_scaling(cfg, fixtures[:2], vocab, fm, repeats=1, seed=3)
    assert strip(a) == strip(b)


def test_fixture_failures_reported(long_setup):
    fixtures, vocab, fm = long_setup
    errors = []
    reports = measure_scaling(
        [AttentionConfig.standard(256)], fixtures[:1] + [("bad.x", "int x;")], vocab, fm,
        language="pascal", repeats=1, errors=errors,
    )
    assert reports == []
    assert len(errors) == 2 and all("UnsupportedLanguageError" in e for e in errors)

    errors = []
    reports = measure_scaling([AttentionConfig.standard(256)], fixtures[:1], vocab, fm, repeats=1, errors=errors)
    assert len(reports) == 1 and errors == []


def test_fit_r2_exact_and_constant():
    x = np.array([1.0, 2, 3, 4])
    assert fit_r2(x, 3 * x + 1, 1) == pytest.approx(1.0)
    assert fit_r2(x, np.ones(4), 1) == 1.0
    assert fit_r2(x, x**2, 1) < 1.0


def test_report_json_and_table():
    r = CostReport("a.java", 256, 32, 3, 2, 3, 40, 64, 64, 40 * 1024, 65536, 0.625, 0.001, 327680)
    record = json.loads(r.to_json())
    assert record["selected_blocks"] == 40 and set(record) >= {"n", "ratio", "wall_time", "peak_score_bytes"}
    table = format_table([r])
    assert "a.java" in table and "0.6250" in table
