import json

import pytest

from guidedgen.errors import VocabularyError
from guidedgen.vocab import Vocabulary, load_vocabulary, save_vocabulary


def test_file_round_trip(tmp_path):
    vocab = Vocabulary(tokens=("a", "bb", "", "c"), eos_id=2)
    path = tmp_path / "vocab.json"
    save_vocabulary(vocab, path)
    assert load_vocabulary(path) == vocab


def test_mapping_round_trip(float_vocab):
    again = Vocabulary.from_mapping(float_vocab.to_mapping(), float_vocab.eos_id)
    assert again == float_vocab


def test_ids_must_be_dense():
    with pytest.raises(VocabularyError):
        Vocabulary.from_mapping({"a": 0, "b": 2}, eos_id=0)


def test_duplicate_ids_rejected(tmp_path):
    path = tmp_path / "vocab.json"
    path.write_text(json.dumps({"eos_id": 0, "tokens": {"a": 0, "b": 0}}))
    with pytest.raises(VocabularyError):
        load_vocabulary(path)


def test_eos_id_must_be_in_range():
    with pytest.raises(VocabularyError):
        Vocabulary(tokens=("a",), eos_id=3)


def test_non_eos_tokens_must_be_non_empty():
    with pytest.raises(VocabularyError):
        Vocabulary(tokens=("a", ""), eos_id=0)


def test_duplicate_strings_rejected():
    with pytest.raises(VocabularyError):
        Vocabulary(tokens=("a", "a"), eos_id=0)


def test_malformed_json_rejected(tmp_path):
    path = tmp_path / "vocab.json"
    path.write_text("{not json")
    with pytest.raises(VocabularyError):
        load_vocabulary(path)


def test_wrong_schema_rejected(tmp_path):
    path = tmp_path / "vocab.json"
    path.write_text(json.dumps({"eos": 0, "tokens": {}}))
    with pytest.raises(VocabularyError):
        load_vocabulary(path)


def test_digest_tracks_content():
    a = Vocabulary(tokens=("x", "y"), eos_id=0)
    b = Vocabulary(tokens=("x", "y"), eos_id=0)
    c = Vocabulary(tokens=("x", "y"), eos_id=1)
    d = Vocabulary(tokens=("x", "z"), eos_id=0)
    assert a.digest == b.digest
    assert a.digest != c.digest
    assert a.digest != d.digest
    assert len(a.digest) == 32
