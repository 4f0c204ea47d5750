"""Mask-construction benchmark: precomputed index vs naive vocabulary rescan.

The naive baseline re-tests, at every step and for every vocabulary token,
whether (emitted text + token) partial-matches the pattern from the string
start, so its per-step cost grows with both the vocabulary size and the
length already emitted. The indexed method looks up a premade mask for the
current automaton state. Both run inside one sampling loop on identical
sequences, and their masks are compared at every step; recorded timings
cover only mask construction.

Runs use a synthetic seeded provider with EOS suppressed, so every run
performs exactly max_tokens steps and the measured quantity is isolated
from model and termination effects.
"""

from __future__ import annotations

import csv
import random
import statistics
import time
from dataclasses import dataclass

import numpy as np

from .engine import SamplingConfig, _pick
from .fsm import Fsm, live_states
from .index import StateVocabIndex, build_index
from .vocab import Vocabulary

CSV_COLUMNS = ("method", "max_tokens", "vocab_size", "wall_time", "per_step_mask_time")

# Synthetic vocabularies always contain these, so digit-heavy patterns can
# always continue and runs never dead-end before max_tokens.
_CORE_TOKENS = tuple("0123456789.") + ("e", "x", " ")
_TOKEN_ALPHABET = "0123456789.abcxyz _-"


@dataclass(frozen=True)
class BenchRecord:
    method: str  # "indexed" or "naive-rescan"
    max_tokens: int
    vocab_size: int
    wall_time: float
    per_step_mask_time: float


def synth_vocab(size: int, seed: int) -> Vocabulary:
    """Deterministic synthetic vocabulary of `size` tokens including EOS."""
    if size < len(_CORE_TOKENS) + 1:
        raise ValueError(f"vocab size must be at least {len(_CORE_TOKENS) + 1}")
    rng = random.Random(seed)
    tokens: list[str] = list(_CORE_TOKENS)
    seen = set(tokens)
    while len(tokens) < size - 1:
        n = rng.randint(1, 4)
        tok = "".join(rng.choice(_TOKEN_ALPHABET) for _ in range(n))
        if tok not in seen:
            seen.add(tok)
            tokens.append(tok)
    tokens.append("<eos>")
    return Vocabulary(tokens=tuple(tokens), eos_id=len(tokens) - 1)


class IndexedMasker:
    """Per-state masks materialized once from the index; O(1) per step."""

    def __init__(self, fsm: Fsm, index: StateVocabIndex, vocab: Vocabulary) -> None:
        self.index = index
        self._masks: dict[int, np.ndarray] = {}
        for state in range(fsm.n_states):
            mask = np.zeros(len(vocab), dtype=bool)
            row = index.entries.get(state)
            if row:
                mask[list(row.keys())] = True
            if state in fsm.finals:
                mask[vocab.eos_id] = True
            self._masks[state] = mask

    def mask(self, state: int) -> np.ndarray:
        return self._masks[state]


class NaiveRescanMasker:
    """The O(N * t) baseline, vectorized over the vocabulary lanes.

    Every call walks the whole emitted prefix from the automaton start once
    per vocabulary token (as one N-lane gather per character), then walks
    each token's own characters; a token is allowed iff the combined walk
    stays inside live states.
    """

    def __init__(self, fsm: Fsm, vocab: Vocabulary) -> None:
        boundaries = sorted(
            {lo for row in fsm.transitions for lo, _hi, _t in row}
            | {hi + 1 for row in fsm.transitions for _lo, hi, _t in row}
        )
        self._bounds = np.array(boundaries, dtype=np.int64)
        n_intervals = len(boundaries)  # interval i = [b[i], b[i+1]); last is overflow
        sink = fsm.n_states
        trans = np.full((fsm.n_states + 1, n_intervals + 2), sink, dtype=np.int32)
        pad_col = n_intervals + 1
        trans[:, pad_col] = np.arange(fsm.n_states + 1)
        for s, row in enumerate(fsm.transitions):
            for lo, hi, t in row:
                a = int(np.searchsorted(self._bounds, lo, side="right")) - 1
                b = int(np.searchsorted(self._bounds, hi, side="right")) - 1
                for i in range(a, b + 1):
                    trans[s, i + 1] = t
        self._trans = trans
        self._pad_col = pad_col
        self._sink = sink
        self._start = fsm.start
        live = live_states(fsm)
        self._live = np.array(
            [s in live for s in range(fsm.n_states)] + [False], dtype=bool
        )
        self._final = np.array(
            [s in fsm.finals for s in range(fsm.n_states)] + [False], dtype=bool
        )
        self._eos_id = vocab.eos_id
        self._n = len(vocab)
        max_len = max(len(t) for t in vocab.tokens)
        token_cols = np.full((self._n, max_len), pad_col, dtype=np.int32)
        for tid, tok in enumerate(vocab.tokens):
            if tid == vocab.eos_id:
                token_cols[tid, :] = 0  # EOS handled by the finals bit
                continue
            for j, ch in enumerate(tok):
                token_cols[tid, j] = self._interval(ch)
        self._token_cols = token_cols

    def _interval(self, ch: str) -> int:
        # column 0 means "outside every boundary": always the sink
        i = int(np.searchsorted(self._bounds, ord(ch), side="right"))
        return i if 0 < i < len(self._bounds) else 0

    def mask(self, emitted: str) -> np.ndarray:
        states = np.full(self._n, self._start, dtype=np.int32)
        for ch in emitted:
            states = self._trans[states, self._interval(ch)]
        prefix_state = int(states[0])
        for j in range(self._token_cols.shape[1]):
            states = self._trans[states, self._token_cols[:, j]]
        allowed = self._live[states]
        allowed[self._eos_id] = self._final[prefix_state]
        return allowed


def run_bench(
    pattern: str,
    vocab_sizes: list[int],
    max_tokens_list: list[int],
    seed: int = 0,
    reps: int = 5,
    compile_regex=None,
) -> list[BenchRecord]:
    """Time both mask methods over a grid of vocabulary sizes and run lengths.

    One record per (method, max_tokens, vocab_size) cell; wall_time and the
    per-step mean are medians over `reps` repetitions. Masks from the two
    methods are asserted identical at every step.
    """
    from .fsm import compile_regex as _compile

    compile_fn = compile_regex or _compile
    fsm = compile_fn(pattern)
    records: list[BenchRecord] = []
    for vocab_size in vocab_sizes:
        vocab = synth_vocab(vocab_size, seed)
        index = build_index(fsm, vocab)
        indexed = IndexedMasker(fsm, index, vocab)
        naive = NaiveRescanMasker(fsm, vocab)
        for max_tokens in max_tokens_list:
            # Recording pass: fix the token sequence and check that both
            # methods produce identical masks at every step.
            rng = np.random.default_rng((seed, max_tokens, vocab_size))
            cfg = SamplingConfig(max_tokens=max_tokens, seed=seed)
            scores = np.zeros(len(vocab))
            scores[vocab.eos_id] = -np.inf  # force full-length runs
            state = fsm.start
            emitted = ""
            states_seq: list[int] = []
            prefixes: list[str] = []
            for step in range(max_tokens):
                states_seq.append(state)
                prefixes.append(emitted)
                mask_i = indexed.mask(state)
                mask_n = naive.mask(emitted)
                if not np.array_equal(mask_i, mask_n):
                    raise AssertionError(
                        f"mask divergence at step {step} (N={vocab_size})"
                    )
                token = _pick(rng, scores, mask_i, cfg)
                emitted += vocab[token]
                state = index.entries[state][token]

            # Timed replays, one tight pass per method per repetition.
            walls = {"indexed": [], "naive-rescan": []}
            for _rep in range(reps):
                mask_of = indexed.mask
                t0 = time.perf_counter_ns()
                for s in states_seq:
                    mask_of(s)
                t1 = time.perf_counter_ns()
                walls["indexed"].append((t1 - t0) / 1e9)
                rescan = naive.mask
                t0 = time.perf_counter_ns()
                for prefix in prefixes:
                    rescan(prefix)
                t1 = time.perf_counter_ns()
                walls["naive-rescan"].append((t1 - t0) / 1e9)
            for method, times in walls.items():
                wall = statistics.median(times)
                records.append(
                    BenchRecord(
                        method=method,
                        max_tokens=max_tokens,
                        vocab_size=vocab_size,
                        wall_time=wall,
                        per_step_mask_time=wall / max_tokens,
                    )
                )
    return records


def write_csv(records: list[BenchRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow(
                [r.method, r.max_tokens, r.vocab_size, f"{r.wall_time:.12f}", f"{r.per_step_mask_time:.12f}"]
            )


def read_csv(path) -> list[BenchRecord]:
    records = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV columns {reader.fieldnames}")
        for row in reader:
            records.append(
                BenchRecord(
                    method=row["method"],
                    max_tokens=int(row["max_tokens"]),
                    vocab_size=int(row["vocab_size"]),
                    wall_time=float(row["wall_time"]),
                    per_step_mask_time=float(row["per_step_mask_time"]),
                )
            )
    return records
