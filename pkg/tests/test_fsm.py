"""FSM compilation against a reference regex engine."""

import random
import re
import zlib

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from guidedgen.errors import RegexParseError, UnsupportedConstructError
from guidedgen.fsm import Fsm, TransitionTable, compile_regex, live_states

from conftest import FLOAT_PATTERN, NAME_PATTERN

# Patterns for agreement testing, with an alphabet that exercises both the
# matching and the rejecting side of each.
PATTERN_POOL = [
    FLOAT_PATTERN,
    NAME_PATTERN,
    r"[0-9]",
    r"\s*19[0-9]{2}",
    r"no|yes",
    r"\s*([Yy]es|[Nn]o|[Nn]ever|[Aa]lways)",
    r"((25[0-5]|2[0-4]\d|[01]?\d\d?)\.){3}(25[0-5]|2[0-4]\d|[01]?\d\d?)",
    r"(ab|a)*c?",
    r"[a-f]{2,4}_?[0-9]+",
    r"-?(0|[1-9][0-9]*)(\.[0-9]+)?",
]

SAMPLE_ALPHABET = "0123456789abcdefxyzABC_. -|()é\n"


def random_strings(seed: int, count: int = 1000, max_len: int = 8) -> list[str]:
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        n = rng.randrange(max_len + 1)
        out.append("".join(rng.choice(SAMPLE_ALPHABET) for _ in range(n)))
    return out


# ---------------------------------------------------------------------------
# compile_regex
# ---------------------------------------------------------------------------


def test_single_class_minimal_dfa():
    fsm = compile_regex(r"[0-9]")
    assert fsm.n_states == 2
    assert fsm.start == 0
    assert fsm.finals == frozenset({1})
    assert fsm.transition_count() == 10
    assert all(fsm.step(0, d) == 1 for d in "0123456789")


def test_float_pattern_acceptance(float_fsm):
    assert float_fsm.accepts("1")
    assert float_fsm.accepts(".2")
    assert float_fsm.accepts("1.2")
    assert float_fsm.accepts("")
    assert not float_fsm.accepts("A")
    assert not float_fsm.accepts("1.2.3")


def test_identifier_pattern_acceptance(name_fsm):
    assert name_fsm.accepts("f")
    assert name_fsm.accepts("foo")
    assert not name_fsm.accepts("1f")
    assert not name_fsm.accepts("")


@pytest.mark.parametrize("pattern", PATTERN_POOL)
def test_agreement_with_reference_engine(pattern):
    fsm = compile_regex(pattern)
    ref = re.compile(pattern, re.ASCII)
    for s in random_strings(seed=zlib.crc32(pattern.encode())):
        assert fsm.accepts(s) == bool(ref.fullmatch(s)), (pattern, s)


@pytest.mark.parametrize("pattern", PATTERN_POOL)
def test_minimized_agreement(pattern):
    plain = compile_regex(pattern)
    small = compile_regex(pattern, minimize=True)
    assert small.n_states <= plain.n_states
    for s in random_strings(seed=zlib.crc32(pattern.encode()) ^ 1, count=300):
        assert plain.accepts(s) == small.accepts(s), (pattern, s)


@given(st.text(alphabet=SAMPLE_ALPHABET, max_size=10))
@settings(max_examples=300, deadline=None)
def test_float_agreement_property(s):
    fsm = compile_regex(FLOAT_PATTERN)
    assert fsm.accepts(s) == bool(re.fullmatch(FLOAT_PATTERN, s, re.ASCII))


def test_compile_determinism():
    a = compile_regex(FLOAT_PATTERN)
    b = compile_regex(FLOAT_PATTERN)
    assert a == b
    assert a.digest == b.digest
    assert a.transitions == b.transitions


def test_empty_pattern_accepts_only_empty():
    fsm = compile_regex("")
    assert fsm.accepts("")
    assert not fsm.accepts("a")


# ---------------------------------------------------------------------------
# errors
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "pattern, construct",
    [
        (r"a\1", "backreference"),
        (r"(?=a)b", "lookahead"),
        (r"(?!a)b", "lookahead"),
        (r"(?<=a)b", "lookbehind"),
        (r"a*?", "lazy"),
        (r"a+?", "lazy"),
        (r"^ab", "anchor"),
        (r"ab$", "anchor"),
        (r"\bword", "anchor"),
        (r"(?P<g>a)", "named group"),
    ],
)
def test_unsupported_constructs_named(pattern, construct):
    with pytest.raises(UnsupportedConstructError) as exc:
        compile_regex(pattern)
    assert construct in str(exc.value)


@pytest.mark.parametrize(
    "pattern", [r"(a", r"a)", r"[a", r"a{3,1}", r"a**", r"*a", r"a{99999}", r"[]"]
)
def test_malformed_patterns_report_position(pattern):
    with pytest.raises(RegexParseError) as exc:
        compile_regex(pattern)
    assert exc.value.position >= 0
    assert "position" in str(exc.value)


def test_group_without_capture_semantics():
    # (?:...) and (...) are both plain grouping
    a = compile_regex(r"(?:ab)+")
    b = compile_regex(r"(ab)+")
    assert a == b


# ---------------------------------------------------------------------------
# step / states_reading / walk
# ---------------------------------------------------------------------------


def test_step_double_dot_dies(float_fsm):
    mid = float_fsm.step(float_fsm.start, ".")
    assert mid is not None
    assert float_fsm.step(mid, ".") is None
    # oracle: no two-character string starting ".." matches
    assert not re.fullmatch(FLOAT_PATTERN, "..")


def test_step_outside_alphabet_is_undefined(float_fsm, name_fsm):
    for fsm in (float_fsm, name_fsm):
        for state in range(fsm.n_states):
            assert fsm.step(state, "☃") is None


def test_step_rejects_bad_state(float_fsm):
    with pytest.raises(ValueError):
        float_fsm.step(float_fsm.n_states, "1")


def test_name_fsm_is_the_three_state_automaton(name_fsm):
    assert name_fsm.n_states == 3
    assert name_fsm.finals == frozenset({1, 2})
    assert name_fsm.step(1, "o") == 2
    assert name_fsm.step(2, "o") == 2


def test_states_reading_goldens(float_fsm, name_fsm):
    digit = compile_regex(r"[0-9]")
    assert digit.states_reading("5") == frozenset({0})
    assert name_fsm.states_reading("f") == frozenset({0, 1, 2})
    assert float_fsm.states_reading("☃") == frozenset()


@pytest.mark.parametrize("pattern", PATTERN_POOL)
def test_states_reading_equals_step_scan(pattern):
    fsm = compile_regex(pattern)
    for ch in SAMPLE_ALPHABET:
        expected = frozenset(
            s for s in range(fsm.n_states) if fsm.step(s, ch) is not None
        )
        assert fsm.states_reading(ch) == expected


# ---------------------------------------------------------------------------
# TransitionTable
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("pattern", PATTERN_POOL)
def test_transition_table_matches_fsm(pattern):
    fsm = compile_regex(pattern)
    table = TransitionTable(fsm)
    for ch in SAMPLE_ALPHABET:
        assert set(table.states_reading(ch)) == set(fsm.states_reading(ch))
        for s in range(fsm.n_states):
            assert table.step(s, ch) == fsm.step(s, ch)


def test_transition_table_inverse_is_preimage(name_fsm):
    table = TransitionTable(name_fsm)
    for idx, states in table.inverse.items():
        lo, _hi = table.intervals[idx]
        ch = chr(lo)
        assert set(states) == {
            s for s in range(name_fsm.n_states) if name_fsm.step(s, ch) is not None
        }


# ---------------------------------------------------------------------------
# live states
# ---------------------------------------------------------------------------


def test_live_states_drops_dead_branch():
    # hand-built: 0 -a-> 1 (final), 0 -b-> 2, 2 -b-> 2 (dead loop)
    fsm = Fsm(
        n_states=3,
        transitions=(
            ((97, 97, 1), (98, 98, 2)),
            (),
            ((98, 98, 2),),
        ),
        finals=frozenset({1}),
    )
    assert live_states(fsm) == frozenset({0, 1})


def test_compiled_fsms_are_trim():
    for pattern in PATTERN_POOL:
        fsm = compile_regex(pattern)
        assert live_states(fsm) == fsm.states
