from pathlib import Path

import numpy as np
import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


def corpus_files() -> list[Path]:
    return sorted((FIXTURES / "corpus").glob("*.java"))


def handwritten(name: str) -> str:
    return (FIXTURES / "handwritten" / name).read_text(encoding="utf-8")


def attention_samples():
    """(ids, attention) pairs from the checked-in 10-sample fixture."""
    from sasa.numeric import read_matrix
    from sasa.tokenizer import Vocabulary, tokenize

    root = FIXTURES / "attention"
    vocab = Vocabulary.load(root / "vocab.txt")
    out = []
    for i in range(10):
        attn = read_matrix(root / f"s{i}.mat")
        toks = tokenize((root / f"s{i}.java").read_text(encoding="utf-8"), vocab, max_len=attn.shape[0])
        out.append((toks.ids, attn))
    return vocab, out
