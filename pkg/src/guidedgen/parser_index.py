"""Trie-keyed vocabulary index for grammar-guided generation.

A parser configuration is (parser state, scanner state, candidate terminal
set, bounded stack suffix). For every configuration and vocabulary string,
the scanner and parser are simulated at build time over a partially known
stack: whenever a reduce has to look below what is known, the simulation
forks over every stack symbol the tables allow there, and the symbols it
had to assume become the trie key of the resulting entry. Queries walk the
trie along the configuration's stack suffix and collect entries at every
matching depth.

Reduce chains that would need to see deeper than the depth bound are
recorded as unindexable markers; queries hitting one fall back to direct
simulation (or raise, when fallback is disabled).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .engine import GenerationStatus, LogitsProvider, SamplingConfig, _pick, _provider_logits
from .errors import (
    BindingMismatchError,
    DisallowedTokenError,
    SessionFinishedError,
    UnindexableConfigError,
)
from .grammar import Grammar
from .lalr import END, LalrTables, Pda, build_lalr_tables, tables_to_pda
from .scanner import CombinedFsm, combine_fsms
from .vocab import Vocabulary


class GrammarGuide:
    """Grammar machinery bundle: tables, terminal automata, per-state unions."""

    def __init__(self, grammar: Grammar) -> None:
        self.grammar = grammar
        self.tables: LalrTables = build_lalr_tables(grammar)
        self.preds = self.tables.predecessors()
        self._scanner_cache: dict[int, CombinedFsm] = {}
        self._combined_cache: dict[int, CombinedFsm] = {}

    def pda(self) -> Pda:
        return tables_to_pda(self.tables)

    def combined_fsm(self, parse_state: int) -> CombinedFsm:
        """Union FSM of the terminals the parser can act on in parse_state."""
        if parse_state not in self._combined_cache:
            names = self.tables.allowed_terminals(parse_state)
            self._combined_cache[parse_state] = combine_fsms(
                [(n, self.grammar.terminal_fsm(n)) for n in names]
            )
        return self._combined_cache[parse_state]

    def scanner_fsm(self, parse_state: int) -> CombinedFsm:
        """Like combined_fsm but with skip terminals unioned in; drives scanning."""
        if parse_state not in self._scanner_cache:
            names = list(self.tables.allowed_terminals(parse_state))
            for t in self.grammar.terminal_names:
                if t in self.grammar.skip_names and t not in names:
                    names.append(t)
            ordered = [t for t in self.grammar.terminal_names if t in names]
            self._scanner_cache[parse_state] = combine_fsms(
                [(n, self.grammar.terminal_fsm(n)) for n in ordered],
                skip=self.grammar.skip_names,
            )
        return self._scanner_cache[parse_state]


@dataclass(frozen=True)
class ParserConfig:
    """Key of a parser-index query.

    Attributes:
        pda_state: Current LR parser state.
        scanner_state: State in the scanner union FSM of pda_state; the
            union's start state means no lexeme is in flight.
        candidate_terminals: Terminals the in-flight lexeme can still become.
        stack_suffix: Known stack below the current state, top first, at
            most the index depth bound long.
        complete: True when stack_suffix is the entire stack below; False
            when deeper symbols exist but are unknown.
    """

    pda_state: int
    scanner_state: int
    candidate_terminals: frozenset[str]
    stack_suffix: tuple[int, ...]
    complete: bool = True


# Entry payload: how a token transforms a matching configuration. The new
# below-stack is below_known + old_suffix[consumed:].
@dataclass(frozen=True)
class _Delta:
    pda_state: int
    scanner_state: int
    candidates: frozenset[str]
    consumed: int
    below_known: tuple[int, ...]


@dataclass
class TrieNode:
    children: dict[int, "TrieNode"] = field(default_factory=dict)
    entries: dict[tuple[int, int], dict[int, _Delta]] = field(default_factory=dict)
    markers: set[tuple[int, int, int]] = field(default_factory=set)

    def descend(self, symbols: tuple[int, ...], create: bool = False) -> "TrieNode | None":
        node = self
        for sym in symbols:
            nxt = node.children.get(sym)
            if nxt is None:
                if not create:
                    return None
                nxt = TrieNode()
                node.children[sym] = nxt
            node = nxt
        return node


@dataclass
class ParserIndex:
    """Trie over stack suffixes mapping configurations to allowed tokens."""

    root: TrieNode
    depth_bound: int
    grammar_digest: bytes
    vocab_digest: bytes

    def __post_init__(self) -> None:
        self._guide: GrammarGuide | None = None
        self._vocab: Vocabulary | None = None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ParserIndex):
            return NotImplemented
        return (
            self.root == other.root
            and self.depth_bound == other.depth_bound
            and self.grammar_digest == other.grammar_digest
            and self.vocab_digest == other.vocab_digest
        )

    def bind(self, guide: GrammarGuide, vocab: Vocabulary) -> "ParserIndex":
        """Attach the live machinery a deserialized index needs for queries."""
        if guide.grammar.digest != self.grammar_digest:
            raise BindingMismatchError("index was not built from this grammar")
        if vocab.digest != self.vocab_digest:
            raise BindingMismatchError("index was not built from this vocabulary")
        self._guide = guide
        self._vocab = vocab
        return self

    def entry_count(self) -> int:
        total = 0
        stack = [self.root]
        while stack:
            node = stack.pop()
            total += sum(len(tokens) for tokens in node.entries.values())
            stack.extend(node.children.values())
        return total


# ---------------------------------------------------------------------------
# Scanner+parser simulation over a partially known stack
# ---------------------------------------------------------------------------


class _Overflow(list):
    """Collects assumption prefixes that exceeded the depth bound."""


@dataclass
class _Sim:
    """One simulation branch.

    known holds the known top segment of the LR stack, bottom first, with
    known[-1] the current state. assumed lists the symbols this branch had
    to guess below the original segment, in the order they were guessed
    (top first); they extend known at the front as they are made.
    """

    guide: GrammarGuide
    known: list[int]
    scanner_state: int
    can_assume: bool
    assumed: list[int] = field(default_factory=list)

    def clone(self) -> "_Sim":
        return _Sim(
            guide=self.guide,
            known=list(self.known),
            scanner_state=self.scanner_state,
            can_assume=self.can_assume,
            assumed=list(self.assumed),
        )

    @property
    def cur(self) -> int:
        return self.known[-1]

    def scanner(self) -> CombinedFsm:
        return self.guide.scanner_fsm(self.cur)

    def pending(self) -> bool:
        # union starts are never re-entered, so the start state means
        # "no lexeme in flight"
        return self.scanner_state != self.scanner().fsm.start


def _ensure_known(
    sim: _Sim, depth: int, bound: int, overflows: _Overflow
) -> list[_Sim]:
    """Branch until the sim knows at least `depth` stack symbols."""
    if len(sim.known) >= depth:
        return [sim]
    if not sim.can_assume:
        return []  # true bottom reached: deeper pops are impossible
    if len(sim.assumed) >= bound:
        overflows.append(tuple(sim.assumed))
        return []
    out: list[_Sim] = []
    for g in sorted(sim.guide.preds[sim.known[0]]):
        branch = sim.clone()
        branch.known.insert(0, g)
        branch.assumed.append(g)
        out.extend(_ensure_known(branch, depth, bound, overflows))
    return out


def _parser_feed(
    sim: _Sim, terminal: str, bound: int, overflows: _Overflow
) -> list[_Sim]:
    """Run the reduce chain for `terminal` and shift it. Dead branches drop."""
    tables = sim.guide.tables
    work = [sim]
    done: list[_Sim] = []
    while work:
        s = work.pop()
        act = tables.action[s.cur].get(terminal)
        if act is None:
            continue
        if act[0] == "shift":
            s.known.append(act[1])
            done.append(s)
            continue
        if act[0] == "accept":
            continue  # END is handled by _accepts_end
        pidx = act[1]
        prod = tables.productions[pidx]
        k = len(prod.rhs)
        for b in _ensure_known(s, k + 1, bound, overflows):
            if k:
                del b.known[-k:]
            target = tables.goto[b.known[-1]].get(prod.lhs)
            if target is None:
                continue  # assumed context admits no goto: infeasible
            b.known.append(target)
            work.append(b)
    return done


def _emit(sim: _Sim, bound: int, overflows: _Overflow) -> list[_Sim]:
    """Emit the completed terminal at the scanner state; reset the scanner."""
    combined = sim.scanner()
    tag = combined.emit_choice(sim.scanner_state)
    if tag is None:
        return []
    if tag in combined.skip:
        sim.scanner_state = combined.fsm.start
        return [sim]
    branches = _parser_feed(sim, tag, bound, overflows)
    for b in branches:
        b.scanner_state = b.scanner().fsm.start
    return branches


def _settle(sim: _Sim, bound: int, overflows: _Overflow) -> list[_Sim]:
    """Emit eagerly while nothing could extend the in-flight lexeme."""
    combined = sim.scanner()
    if not combined.exhausted(sim.scanner_state):
        return [sim]
    out: list[_Sim] = []
    for b in _emit(sim, bound, overflows):
        out.extend(_settle(b, bound, overflows))
    return out


def _feed_char(sim: _Sim, ch: str, bound: int, overflows: _Overflow) -> list[_Sim]:
    combined = sim.scanner()
    nxt = combined.fsm.step(sim.scanner_state, ch)
    if nxt is not None:
        sim.scanner_state = nxt
        return _settle(sim, bound, overflows)
    # longest match ends here: emit, then re-read ch in the new context
    if combined.emit_choice(sim.scanner_state) is None:
        return []
    out: list[_Sim] = []
    for b in _emit(sim, bound, overflows):
        fresh = b.scanner()
        nxt2 = fresh.fsm.step(fresh.fsm.start, ch)
        if nxt2 is None:
            continue
        b.scanner_state = nxt2
        out.extend(_settle(b, bound, overflows))
    return out


def _feed_text(sims: list[_Sim], text: str, bound: int, overflows: _Overflow) -> list[_Sim]:
    for ch in text:
        nxt: list[_Sim] = []
        for s in sims:
            nxt.extend(_feed_char(s, ch, bound, overflows))
        sims = nxt
        if not sims:
            break
    return sims


def _accepts_end(sim: _Sim, bound: int, overflows: _Overflow) -> set[bool]:
    """Outcomes of flushing the lexeme and reducing to accept on end of input.

    Returns the set of outcomes over feasible branches; ambiguity is only
    possible when the stack is partially known.
    """
    tables = sim.guide.tables
    start = sim.clone()
    if start.pending():
        branches = _emit(start, bound, overflows)
        if not branches:
            return {False}
    else:
        branches = [start]
    outcomes: set[bool] = set()
    work = list(branches)
    while work:
        s = work.pop()
        act = tables.action[s.cur].get(END)
        if act is None:
            outcomes.add(False)
            continue
        if act[0] == "accept":
            outcomes.add(True)
            continue
        pidx = act[1]
        prod = tables.productions[pidx]
        k = len(prod.rhs)
        for b in _ensure_known(s, k + 1, bound, overflows):
            if k:
                del b.known[-k:]
            target = tables.goto[b.known[-1]].get(prod.lhs)
            if target is None:
                continue
            b.known.append(target)
            work.append(b)
    return outcomes


def _sim_config(sim: _Sim, depth_bound: int) -> ParserConfig:
    combined = sim.scanner()
    below = tuple(reversed(sim.known[:-1]))
    return ParserConfig(
        pda_state=sim.cur,
        scanner_state=sim.scanner_state,
        candidate_terminals=combined.reachable[sim.scanner_state],
        stack_suffix=below[:depth_bound],
        complete=not sim.can_assume and len(below) <= depth_bound,
    )


def _sim_from_config(guide: GrammarGuide, config: ParserConfig) -> _Sim:
    return _Sim(
        guide=guide,
        known=[*reversed(config.stack_suffix), config.pda_state],
        scanner_state=config.scanner_state,
        can_assume=not config.complete,
    )


# ---------------------------------------------------------------------------
# Index construction and queries
# ---------------------------------------------------------------------------


def build_parser_index(
    guide: GrammarGuide, vocab: Vocabulary, depth_bound: int = 8
) -> ParserIndex:
    """Index every vocabulary string against every parser configuration.

    An entry is recorded iff simulating the scanner and parser over the
    string completes without error; the trie key is the stack context the
    simulation had to assume. Only parse states a real parse can enter are
    enumerated. Construction is deterministic.
    """
    if depth_bound < 1:
        raise ValueError("depth_bound must be >= 1")
    root = TrieNode()
    for q in sorted(guide.tables.reachable_states()):
        combined = guide.scanner_fsm(q)
        for s in range(combined.fsm.n_states):
            for tid, tok in enumerate(vocab.tokens):
                if tid == vocab.eos_id:
                    continue
                overflows = _Overflow()
                start = _Sim(guide=guide, known=[q], scanner_state=s, can_assume=True)
                ends = _feed_text([start], tok, depth_bound, overflows)
                for end in ends:
                    node = root.descend(tuple(end.assumed), create=True)
                    delta = _Delta(
                        pda_state=end.cur,
                        scanner_state=end.scanner_state,
                        candidates=end.scanner().reachable[end.scanner_state],
                        consumed=len(end.assumed),
                        below_known=tuple(reversed(end.known[:-1])),
                    )
                    per_key = node.entries.setdefault((q, s), {})
                    assert tid not in per_key, "assumption branches must be prefix-free"
                    per_key[tid] = delta
                for prefix in overflows:
                    node = root.descend(prefix[:depth_bound], create=True)
                    node.markers.add((q, s, tid))
    index = ParserIndex(
        root=root,
        depth_bound=depth_bound,
        grammar_digest=guide.grammar.digest,
        vocab_digest=vocab.digest,
    )
    return index.bind(guide, vocab)


def _apply_delta(config: ParserConfig, delta: _Delta, depth_bound: int) -> ParserConfig:
    below = delta.below_known + config.stack_suffix[delta.consumed :]
    return ParserConfig(
        pda_state=delta.pda_state,
        scanner_state=delta.scanner_state,
        candidate_terminals=delta.candidates,
        stack_suffix=below[:depth_bound],
        complete=config.complete and len(below) <= depth_bound,
    )


def _simulate_token(
    guide: GrammarGuide, config: ParserConfig, token: str, depth_bound: int
) -> tuple[ParserConfig | None, bool]:
    """Direct simulation of one token from a configuration.

    Returns (successor or None, overflowed). Ambiguous outcomes only arise
    past the configuration's knowledge horizon and count as overflow.
    """
    overflows = _Overflow()
    ends = _feed_text([_sim_from_config(guide, config)], token, depth_bound, overflows)
    if overflows:
        return None, True
    if not ends:
        return None, False
    configs = {_sim_config(e, depth_bound) for e in ends}
    if len(configs) > 1:
        return None, True
    succ = configs.pop()
    if config.complete:
        succ = ParserConfig(
            pda_state=succ.pda_state,
            scanner_state=succ.scanner_state,
            candidate_terminals=succ.candidate_terminals,
            stack_suffix=succ.stack_suffix,
            complete=True,
        )
    return succ, False


def oracle_allowed(
    guide: GrammarGuide, config: ParserConfig, vocab: Vocabulary, depth_bound: int = 8
) -> frozenset[tuple[int, ParserConfig | None]]:
    """Brute-force allowed set: simulate every token from the configuration.

    The independent reference for parser_allowed; it never touches the trie.
    """
    out: set[tuple[int, ParserConfig | None]] = set()
    for tid, tok in enumerate(vocab.tokens):
        if tid == vocab.eos_id:
            continue
        succ, overflowed = _simulate_token(guide, config, tok, depth_bound)
        if overflowed:
            raise UnindexableConfigError(
                f"token {tid} needs stack context deeper than {depth_bound}"
            )
        if succ is not None:
            out.add((tid, succ))
    overflows = _Overflow()
    outcomes = _accepts_end(_sim_from_config(guide, config), depth_bound, overflows)
    if overflows or len(outcomes) > 1:
        raise UnindexableConfigError("end-of-input outcome exceeds the depth bound")
    if outcomes == {True}:
        out.add((vocab.eos_id, None))
    return frozenset(out)


def parser_allowed(
    index: ParserIndex,
    config: ParserConfig,
    *,
    fallback: bool = True,
) -> frozenset[tuple[int, ParserConfig | None]]:
    """Allowed (token id, successor configuration) pairs for a configuration.

    Trie lookup keyed by the stack suffix, then (parser state, scanner
    state). EOS appears with a None successor when the configuration can
    flush and accept. Tokens marked unindexable are resolved by direct
    simulation when fallback is enabled.

    Raises:
        UnindexableConfigError: unindexable token or undecidable EOS with
            fallback disabled.
        BindingMismatchError: the index is not bound to its grammar/vocab.
    """
    if index._guide is None or index._vocab is None:
        raise BindingMismatchError("index must be bound to a grammar and vocabulary")
    guide, vocab = index._guide, index._vocab
    key = (config.pda_state, config.scanner_state)
    out: dict[int, ParserConfig | None] = {}
    pending_markers: set[int] = set()
    node: TrieNode | None = index.root
    depth = 0
    while node is not None:
        row = node.entries.get(key)
        if row is not None:
            for tid, delta in row.items():
                out[tid] = _apply_delta(config, delta, index.depth_bound)
        for q, s, tid in node.markers:
            if (q, s) == key:
                pending_markers.add(tid)
        if depth >= len(config.stack_suffix):
            break
        node = node.children.get(config.stack_suffix[depth])
        depth += 1

    for tid in pending_markers:
        if not fallback:
            raise UnindexableConfigError(
                f"token {tid} is unindexable at this configuration"
            )
        succ, overflowed = _simulate_token(guide, config, vocab[tid], index.depth_bound)
        if overflowed:
            raise UnindexableConfigError(
                f"token {tid} outcome depends on stack context beyond the "
                f"depth bound {index.depth_bound}"
            )
        if succ is not None:
            out[tid] = succ

    overflows = _Overflow()
    outcomes = _accepts_end(
        _sim_from_config(guide, config), index.depth_bound, overflows
    )
    if overflows or len(outcomes) > 1:
        # no deeper information exists at configuration level, with or
        # without fallback; callers holding the full stack resolve this
        raise UnindexableConfigError(
            "end-of-input outcome depends on stack context beyond the depth bound"
        )
    if outcomes == {True}:
        out[vocab.eos_id] = None
    return frozenset(out.items())


# ---------------------------------------------------------------------------
# Grammar-guided generation sessions
# ---------------------------------------------------------------------------


class GrammarSession:
    """Concrete scanner+parser cursor over the full stack, for generation."""

    def __init__(self, guide: GrammarGuide, index: ParserIndex, vocab: Vocabulary) -> None:
        if index.grammar_digest != guide.grammar.digest:
            raise BindingMismatchError("index was not built from this grammar")
        if index.vocab_digest != vocab.digest:
            raise BindingMismatchError("index was not built from this vocabulary")
        self.guide = guide
        self.index = index
        self.vocab = vocab
        self.sim = _Sim(
            guide=guide,
            known=[0],
            scanner_state=guide.scanner_fsm(0).fsm.start,
            can_assume=False,
        )
        self.emitted: list[int] = []
        self.status = GenerationStatus.ACTIVE

    def config(self) -> ParserConfig:
        return _sim_config(self.sim, self.index.depth_bound)

    def text(self) -> str:
        return "".join(self.vocab[t] for t in self.emitted)

    def allowed_entries(self) -> frozenset[tuple[int, ParserConfig | None]]:
        try:
            return parser_allowed(self.index, self.config())
        except UnindexableConfigError:
            # the bounded suffix cannot decide; the full stack always can
            out: dict[int, ParserConfig | None] = {}
            for tid in range(len(self.vocab)):
                if tid == self.vocab.eos_id:
                    continue
                ends = _feed_text(
                    [self.sim.clone()],
                    self.vocab[tid],
                    self.index.depth_bound,
                    _Overflow(),
                )
                if ends:
                    out[tid] = _sim_config(ends[0], self.index.depth_bound)
            if self.accepts_end():
                out[self.vocab.eos_id] = None
            return frozenset(out.items())

    def mask(self) -> np.ndarray:
        bits = np.zeros(len(self.vocab), dtype=bool)
        for tid, _succ in self.allowed_entries():
            bits[tid] = True
        return bits

    def accepts_end(self) -> bool:
        outcomes = _accepts_end(self.sim, self.index.depth_bound, _Overflow())
        return outcomes == {True}

    def advance(self, token_id: int) -> "GrammarSession":
        if self.status is not GenerationStatus.ACTIVE:
            raise SessionFinishedError(f"session already {self.status.value}")
        if token_id == self.vocab.eos_id:
            if not self.accepts_end():
                raise DisallowedTokenError(self.config(), token_id)
            self.status = GenerationStatus.FINISHED_EOS
            return self
        overflows = _Overflow()
        ends = _feed_text(
            [self.sim.clone()], self.vocab[token_id], self.index.depth_bound, overflows
        )
        if not ends:
            raise DisallowedTokenError(self.config(), token_id)
        assert len(ends) == 1, "full-knowledge simulation cannot fork"
        self.sim = ends[0]
        self.emitted.append(token_id)
        return self


def guided_sample_tokens_grammar(
    provider: LogitsProvider,
    index: ParserIndex,
    guide: GrammarGuide,
    cfg: SamplingConfig,
) -> GrammarSession:
    """Grammar analog of the guided sampling loop."""
    vocab = provider.vocab
    session = GrammarSession(guide, index, vocab)
    rng = np.random.default_rng(cfg.seed)
    for step in range(cfg.max_tokens):
        mask = session.mask()
        if not mask.any():
            session.status = GenerationStatus.DEAD_END
            return session
        scores = _provider_logits(provider, session.emitted, step)
        token = _pick(rng, scores, mask, cfg)
        if token == vocab.eos_id:
            session.status = GenerationStatus.FINISHED_EOS
            return session
        session.advance(token)
    session.status = GenerationStatus.FINISHED_MAX_TOKENS
    return session


def batch_parses(guide: GrammarGuide, text: str) -> bool:
    """Scan and parse a complete string from scratch; True iff it accepts."""
    sim = _Sim(
        guide=guide,
        known=[0],
        scanner_state=guide.scanner_fsm(0).fsm.start,
        can_assume=False,
    )
    ends = _feed_text([sim], text, 1, _Overflow())
    if not ends:
        return False
    return _accepts_end(ends[0], 1, _Overflow()) == {True}
