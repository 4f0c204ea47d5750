"""Vocabulary indexing: precompute, per FSM state, the tokens readable there.

For every token string and every state that reads its first character, the
full traversal is walked once at build time. The resulting map from state to
(token id, end state) pairs makes the per-step mask of guided sampling an
average O(1) lookup instead of a vocabulary scan.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .fsm import Fsm, TransitionTable, live_states
from .vocab import Vocabulary

# Per-state allowed entries: token id -> end state. A token walked from a
# given state always ends in a unique state, so a mapping is lossless.
Entries = dict[int, dict[int, int]]


def find_sub_sequences(fsm: Fsm, token: str) -> list[tuple[int, ...]]:
    """All complete state traversals of the FSM reading token.

    For each state r that reads token[0], returns (r, s1, ..., sk) where each
    si follows a defined transition, iff the whole token is readable from r.
    Partial walks contribute nothing. Traversals are ordered by start state.

    Args:
        fsm: Automaton to walk.
        token: Non-empty token string.

    Returns:
        List of state tuples, each of length len(token) + 1.
    """
    if not token:
        raise ValueError("token must be non-empty")
    table = TransitionTable(fsm)
    return _sub_sequences(fsm, table, token)


def _sub_sequences(
    fsm: Fsm, table: TransitionTable, token: str
) -> list[tuple[int, ...]]:
    result = []
    for r in table.states_reading(token[0]):
        path = [r]
        state: int | None = r
        for ch in token:
            state = fsm.step(state, ch)
            if state is None:
                break
            path.append(state)
        else:
            result.append(tuple(path))
    return result


@dataclass(frozen=True)
class StateVocabIndex:
    """Map from FSM state to the (token id, end state) pairs readable there.

    Attributes:
        entries: state -> {token id: end state}. States with no readable
            token have no key.
        fsm_digest: Content hash of the source FSM.
        vocab_digest: Content hash of the source vocabulary.
    """

    entries: dict[int, dict[int, int]]
    fsm_digest: bytes
    vocab_digest: bytes

    def states(self) -> frozenset[int]:
        return frozenset(self.entries)

    def entry_count(self) -> int:
        return sum(len(v) for v in self.entries.values())


def allowed(index: StateVocabIndex, state: int) -> frozenset[tuple[int, int]]:
    """(token id, end state) pairs allowed at state; empty set for absent keys."""
    row = index.entries.get(state)
    if row is None:
        return frozenset()
    return frozenset(row.items())


def _index_chunk(
    fsm: Fsm, tokens: list[tuple[int, str]], live: frozenset[int]
) -> list[tuple[int, int, int]]:
    """Triples (state, token id, end state) for one slice of the vocabulary."""
    table = TransitionTable(fsm)
    triples: list[tuple[int, int, int]] = []
    for tid, tok in tokens:
        for path in _sub_sequences(fsm, table, tok):
            if path[0] in live and path[-1] in live:
                triples.append((path[0], tid, path[-1]))
    return triples


def build_index(
    fsm: Fsm,
    vocab: Vocabulary,
    *,
    prune_dead: bool = True,
    workers: int | None = None,
) -> StateVocabIndex:
    """Index a vocabulary against an FSM.

    Every non-EOS token is walked from every state that reads its first
    character; complete traversals become (start state -> (token, end state))
    entries. With prune_dead (the default), states from which no final state
    is reachable are dropped so the index never offers a token that strands
    generation.

    Args:
        fsm: Compiled automaton.
        vocab: Valid vocabulary; the EOS token contributes no entries.
        prune_dead: Restrict entries to live states.
        workers: Parallelize over vocabulary slices with this many processes.
            The result is identical to a sequential build.
    """
    live = live_states(fsm) if prune_dead else fsm.states
    items = [
        (tid, tok) for tid, tok in enumerate(vocab.tokens) if tid != vocab.eos_id
    ]
    if workers is not None and workers > 1 and len(items) > workers:
        chunk = (len(items) + workers - 1) // workers
        slices = [items[i : i + chunk] for i in range(0, len(items), chunk)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_index_chunk, [fsm] * len(slices), slices, [live] * len(slices)))
        triples = [t for part in parts for t in part]
    else:
        triples = _index_chunk(fsm, items, live)

    entries: Entries = {}
    for state, tid, end in triples:
        entries.setdefault(state, {})[tid] = end
    return StateVocabIndex(
        entries=entries, fsm_digest=fsm.digest, vocab_digest=vocab.digest
    )
