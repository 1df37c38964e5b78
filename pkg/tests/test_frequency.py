from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import attention_samples
from oracles import scan_counts
from sasa.errors import FormatError
from sasa.frequency import (
    FrequencyMatrix,
    PairScoreMatrix,
    accumulate_frequency,
    aggregate_attention,
    build_frequency,
    lookup_pair_scores,
)


def random_stochastic(rng, n, heads=None, temp=3.0):
    shape = (n, n) if heads is None else (heads, n, n)
    logits = rng.standard_normal(shape) * temp
    e = np.exp(logits - logits.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def test_all_entries_above_threshold():
    fm = FrequencyMatrix(10)
    attn = np.array([[0.5, 0.3, 0.2]] * 3)
    accumulate_frequency(fm, [4, 5, 6], attn)
    assert fm.counts == Counter({(r, c): 1 for r in (4, 5, 6) for c in (4, 5, 6)})
    assert fm.samples_seen == 1


def test_uniform_attention_counts_nothing():
    fm = FrequencyMatrix(30)
    accumulate_frequency(fm, list(range(4, 24)), np.full((20, 20), 0.05))
    assert fm.nnz == 0 and fm.samples_seen == 1


def test_threshold_is_strict():
    fm = FrequencyMatrix(8)
    attn = np.array([[0.1, 0.9], [0.5, 0.5]])
    accumulate_frequency(fm, [4, 5], attn)
    assert (4, 4) not in fm.counts and fm.counts[(4, 5)] == 1


def test_repeated_ids_count_per_position_pair():
    fm = FrequencyMatrix(8)
    accumulate_frequency(fm, [4, 4], np.full((2, 2), 0.5))
    assert fm.counts == Counter({(4, 4): 4})


def test_fixture_matches_dense_scan():
    vocab, samples = attention_samples()
    fm = build_frequency(samples, vocab.size)
    assert fm.counts == scan_counts(samples)
    assert fm.samples_seen == 10 and fm.total() > 0


def test_shard_merge_equals_whole():
    vocab, samples = attention_samples()
    whole = build_frequency(samples, vocab.size)
    left = build_frequency(samples[:4], vocab.size)
    right = build_frequency(samples[4:], vocab.size)
    assert left.merge(right).dumps() == whole.dumps()
    assert right.merge(left).dumps() == whole.dumps()


def test_order_insensitive(rng):
    vocab, samples = attention_samples()
    whole = build_frequency(samples, vocab.size).dumps()
    for _ in range(3):
        order = rng.permutation(len(samples))
        assert build_frequency([samples[i] for i in order], vocab.size).dumps() == whole


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 12), st.integers(1, 4))
def test_accumulate_matches_scan_random(seed, n, n_samples):
    rng = np.random.default_rng(seed)
    samples = [(rng.integers(0, 6, n).tolist(), random_stochastic(rng, n)) for _ in range(n_samples)]
    fm = build_frequency(samples, 6, threshold=0.2)
    assert fm.counts == scan_counts(samples, 0.2)


def test_mean_and_max_reduction(rng):
    stack = random_stochastic(rng, 9, heads=4)
    assert np.allclose(aggregate_attention(stack), stack.mean(axis=0))
    assert np.array_equal(aggregate_attention(stack, "max"), stack.max(axis=0))
    ids = rng.integers(0, 5, 9)
    mean_fm = accumulate_frequency(FrequencyMatrix(5), ids, stack)
    max_fm = accumulate_frequency(FrequencyMatrix(5), ids, stack, reduce="max")
    assert mean_fm.total() <= max_fm.total()
    with pytest.raises(ValueError):
        aggregate_attention(stack, "median")


def test_accumulate_rejects_bad_input():
    fm = FrequencyMatrix(5)
    with pytest.raises(ValueError):
        accumulate_frequency(fm, [1, 2], np.full((2, 2), 0.4))
    with pytest.raises(ValueError):
        accumulate_frequency(fm, [1, 2, 3], np.full((2, 2), 0.5))
    with pytest.raises(ValueError):
        accumulate_frequency(fm, [1, 9], np.full((2, 2), 0.5))
    with pytest.raises(ValueError):
        accumulate_frequency(fm, [1, 2], np.full((2, 2), 0.5), threshold=1.0)
    with pytest.raises(ValueError):
        FrequencyMatrix(5, threshold=0.0)
    assert fm.samples_seen == 0


def test_merge_rejects_mismatch():
    with pytest.raises(ValueError):
        FrequencyMatrix(5).merge(FrequencyMatrix(6))
    with pytest.raises(ValueError):
        FrequencyMatrix(5, 0.1).merge(FrequencyMatrix(5, 0.2))


def test_lookup_empty_matrix():
    ps = lookup_pair_scores(FrequencyMatrix(10), [4, 5, 6])
    assert ps.n == 3 and not ps.dense().any()
    assert not PairScoreMatrix.zeros(3).dense().any()


def test_lookup_definition_example():
    fm = FrequencyMatrix(10, counts=Counter({(4, 5): 7}))
    assert lookup_pair_scores(fm, [4, 5]).dense().tolist() == [[0, 7], [0, 0]]


def test_lookup_matches_cell_oracle():
    vocab, samples = attention_samples()
    fm = build_frequency(samples, vocab.size)
    ids = samples[3][0][:64]
    got = lookup_pair_scores(fm, ids).dense()
    want = [[fm.counts.get((a, b), 0) for b in ids] for a in ids]
    assert got.tolist() == want


def test_lookup_mass_bound():
    vocab, samples = attention_samples()
    fm = build_frequency(samples, vocab.size)
    ids = np.array(samples[0][0])
    values = lookup_pair_scores(fm, ids).dense()
    mult = Counter(ids.tolist())
    bound = sum(c * mult[a] * mult[b] for (a, b), c in fm.counts.items())
    assert values.sum() == bound


def test_lookup_id_out_of_range():
    with pytest.raises(ValueError):
        lookup_pair_scores(FrequencyMatrix(4), [1, 4])


def test_file_round_trip(tmp_path):
    vocab, samples = attention_samples()
    fm = build_frequency(samples, vocab.size)
    fm.save(tmp_path / "f.txt")
    text = (tmp_path / "f.txt").read_text()
    assert text.splitlines()[0] == f"|V|={vocab.size} samples=10 threshold=0.1"
    back = FrequencyMatrix.load(tmp_path / "f.txt")
    assert back == fm and back.dumps() == text


@pytest.mark.parametrize("text", ["", "|V|=3 samples=0\n", "|V|=3 samples=0 threshold=0.1\n0\t5\t1\n",
                                  "|V|=3 samples=0 threshold=0.1\n0\t1\t0\n", "|V|=3 samples=0 threshold=0.1\n0\t1\n"])
def test_file_errors(text):
    with pytest.raises(FormatError):
        FrequencyMatrix.loads(text)
