import pytest

from guidedgen.fsm import compile_regex
from guidedgen.index import build_index
from guidedgen.vocab import Vocabulary

FLOAT_PATTERN = r"([0-9]*)?\.?[0-9]*"
NAME_PATTERN = r"[^\W\d]\w*"


@pytest.fixture(scope="session")
def float_fsm():
    return compile_regex(FLOAT_PATTERN)


@pytest.fixture(scope="session")
def name_fsm():
    return compile_regex(NAME_PATTERN)


@pytest.fixture(scope="session")
def float_vocab():
    """The five-token walkthrough vocabulary plus an explicit EOS."""
    return Vocabulary(tokens=("A", ".", "42", ".2", "1", "<eos>"), eos_id=5)


@pytest.fixture(scope="session")
def float_index(float_fsm, float_vocab):
    return build_index(float_fsm, float_vocab)
