import pytest

from textfuse.harness.config import load_corpus
from textfuse.tokenizers import load_tokenizer


@pytest.fixture(scope="session")
def word_tok():
    return load_tokenizer("pkg:vocab_word.json")


@pytest.fixture(scope="session")
def bpe_tok():
    return load_tokenizer("pkg:vocab_bpe.json")


@pytest.fixture(scope="session")
def byte_tok():
    return load_tokenizer("pkg:vocab_byte.json")


@pytest.fixture(scope="session")
def prefix_tok():
    return load_tokenizer("pkg:vocab_prefix_space.json")


@pytest.fixture(scope="session")
def all_tokenizers(word_tok, bpe_tok, byte_tok, prefix_tok):
    return [word_tok, bpe_tok, byte_tok, prefix_tok]


@pytest.fixture(scope="session")
def demo_corpus():
    return load_corpus("pkg:corpus_demo.txt", None)


@pytest.fixture(scope="session")
def left_corpus():
    return load_corpus("pkg:corpus_left.txt", None)


@pytest.fixture(scope="session")
def right_corpus():
    return load_corpus("pkg:corpus_right.txt", None)
