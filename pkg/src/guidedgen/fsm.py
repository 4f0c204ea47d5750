"""Regex compilation to deterministic finite automata over codepoint ranges.

Patterns are compiled with whole-string semantics: the automaton accepts a
string iff the entire string matches the pattern. The supported subset
(see docs/regex_subset.md) covers literals, escapes, character classes,
``.``, grouping, alternation and the quantifiers ``*`` ``+`` ``?``
``{m}`` ``{m,}`` ``{m,n}``. Shorthand classes use ASCII semantics:
``\\d`` = ``[0-9]``, ``\\w`` = ``[0-9A-Za-z_]``, ``\\s`` = ``[ \\t\\n\\r\\f\\v]``.

Compilation pipeline: pattern -> AST -> Thompson NFA -> subset construction
over a disjoint interval partition of the codepoints used by the pattern ->
optional Hopcroft minimization -> breadth-first canonical renumbering with
start state 0. The same pattern always compiles to a structurally identical
automaton.

Transitions are stored per state as sorted, disjoint, inclusive codepoint
ranges; characters never mentioned by the pattern have no transition.
"""

from __future__ import annotations

import hashlib
import struct
from bisect import bisect_right
from collections import deque
from dataclasses import dataclass, field

from .errors import RegexParseError, UnsupportedConstructError

MAX_CODEPOINT = 0x10FFFF

# Inclusive (lo, hi) codepoint ranges, sorted and pairwise disjoint.
Ranges = tuple[tuple[int, int], ...]


# ---------------------------------------------------------------------------
# Codepoint range algebra
# ---------------------------------------------------------------------------


def normalize_ranges(pairs: list[tuple[int, int]]) -> Ranges:
    """Sort, drop empty ranges, and merge overlapping/adjacent ones."""
    pairs = sorted((lo, hi) for lo, hi in pairs if lo <= hi)
    merged: list[tuple[int, int]] = []
    for lo, hi in pairs:
        if merged and lo <= merged[-1][1] + 1:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return tuple(merged)


def complement_ranges(ranges: Ranges) -> Ranges:
    """Complement within [0, MAX_CODEPOINT]."""
    out: list[tuple[int, int]] = []
    cursor = 0
    for lo, hi in ranges:
        if cursor < lo:
            out.append((cursor, lo - 1))
        cursor = hi + 1
    if cursor <= MAX_CODEPOINT:
        out.append((cursor, MAX_CODEPOINT))
    return tuple(out)


def ranges_contain(ranges: Ranges, cp: int) -> bool:
    """Membership test via binary search on range starts."""
    i = bisect_right(ranges, (cp, MAX_CODEPOINT + 1)) - 1
    return i >= 0 and ranges[i][0] <= cp <= ranges[i][1]


def _chars(s: str) -> Ranges:
    return normalize_ranges([(ord(c), ord(c)) for c in s])


DIGIT_RANGES = _chars("0123456789")
WORD_RANGES = normalize_ranges([(48, 57), (65, 90), (95, 95), (97, 122)])
SPACE_RANGES = _chars(" \t\n\r\f\v")
DOT_RANGES = complement_ranges(_chars("\n"))


# ---------------------------------------------------------------------------
# Pattern AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CharSet:
    ranges: Ranges


@dataclass(frozen=True)
class Concat:
    parts: tuple


@dataclass(frozen=True)
class Alternation:
    options: tuple


@dataclass(frozen=True)
class Repeat:
    item: object
    min_count: int
    max_count: int | None  # None means unbounded


@dataclass(frozen=True)
class Epsilon:
    pass


# Bounded repetition is expanded structurally; cap it to keep automata sane.
_MAX_BOUNDED_REPEAT = 1000

_CLASS_SHORTHAND = {
    "d": DIGIT_RANGES,
    "D": complement_ranges(DIGIT_RANGES),
    "w": WORD_RANGES,
    "W": complement_ranges(WORD_RANGES),
    "s": SPACE_RANGES,
    "S": complement_ranges(SPACE_RANGES),
}

_CHAR_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "f": "\f", "v": "\v", "0": "\0"}


class _Parser:
    """Recursive descent parser for the supported regex subset."""

    def __init__(self, pattern: str) -> None:
        self.pattern = pattern
        self.pos = 0

    def error(self, message: str) -> RegexParseError:
        return RegexParseError(message, self.pattern, self.pos)

    def unsupported(self, construct: str, pos: int | None = None) -> UnsupportedConstructError:
        return UnsupportedConstructError(
            construct, self.pattern, self.pos if pos is None else pos
        )

    def peek(self) -> str | None:
        return self.pattern[self.pos] if self.pos < len(self.pattern) else None

    def take(self) -> str:
        if self.pos >= len(self.pattern):
            raise self.error("unexpected end of pattern")
        ch = self.pattern[self.pos]
        self.pos += 1
        return ch

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            raise self.error(f"expected {ch!r}")
        self.pos += 1

    def parse(self) -> object:
        ast = self._alternation()
        if self.pos < len(self.pattern):
            raise self.error(f"unexpected {self.pattern[self.pos]!r}")
        return ast

    def _alternation(self) -> object:
        options = [self._concat()]
        while self.peek() == "|":
            self.take()
            options.append(self._concat())
        if len(options) == 1:
            return options[0]
        return Alternation(tuple(options))

    def _concat(self) -> object:
        parts: list[object] = []
        while self.peek() is not None and self.peek() not in ("|", ")"):
            parts.append(self._repeatable())
        if not parts:
            return Epsilon()
        if len(parts) == 1:
            return parts[0]
        return Concat(tuple(parts))

    def _repeatable(self) -> object:
        atom = self._atom()
        quantified = False
        while True:
            quant = self._quantifier()
            if quant is None:
                return atom
            if quantified:
                # a** and friends; quantifying a group is fine
                raise self.error("multiple repeat")
            if self.peek() in ("?", "+"):
                kind = "lazy" if self.peek() == "?" else "possessive"
                raise self.unsupported(f"{kind} quantifier")
            atom = Repeat(atom, quant[0], quant[1])
            quantified = True

    def _quantifier(self) -> tuple[int, int | None] | None:
        ch = self.peek()
        if ch == "*":
            self.take()
            return (0, None)
        if ch == "+":
            self.take()
            return (1, None)
        if ch == "?":
            self.take()
            return (0, 1)
        if ch == "{":
            start = self.pos
            self.take()
            m = self._integer()
            n: int | None
            if self.peek() == ",":
                self.take()
                n = None if self.peek() == "}" else self._integer()
            else:
                n = m
            self.expect("}")
            if n is not None and n < m:
                self.pos = start
                raise self.error(f"bad repeat interval {{{m},{n}}}")
            bound = m if n is None else n
            if bound > _MAX_BOUNDED_REPEAT:
                self.pos = start
                raise self.error(
                    f"repetition bound exceeds {_MAX_BOUNDED_REPEAT}"
                )
            return (m, n)
        return None

    def _integer(self) -> int:
        digits = ""
        while (ch := self.peek()) is not None and ch.isdigit():
            digits += self.take()
        if not digits:
            raise self.error("expected integer")
        return int(digits)

    def _atom(self) -> object:
        ch = self.peek()
        if ch == "(":
            return self._group()
        if ch == "[":
            return self._char_class()
        if ch == ".":
            self.take()
            return CharSet(DOT_RANGES)
        if ch == "\\":
            return self._escape()
        if ch in ("^", "$"):
            raise self.unsupported(f"anchor {ch!r}")
        if ch in ("*", "+", "?"):
            raise self.error("nothing to repeat")
        if ch in ("{", "}"):
            raise self.error(f"unescaped {ch!r}")
        if ch in (")", None):
            raise self.error("unexpected end of group" if ch else "unexpected end of pattern")
        self.take()
        return CharSet(_chars(ch))

    def _group(self) -> object:
        open_pos = self.pos
        self.expect("(")
        if self.peek() == "?":
            self.take()
            nxt = self.peek()
            if nxt == ":":
                self.take()
            elif nxt in ("=", "!"):
                raise self.unsupported("lookahead assertion", open_pos)
            elif nxt == "<":
                if self.pos + 1 < len(self.pattern) and self.pattern[self.pos + 1] in ("=", "!"):
                    raise self.unsupported("lookbehind assertion", open_pos)
                raise self.unsupported("named group", open_pos)
            elif nxt == "P":
                raise self.unsupported("named group", open_pos)
            elif nxt == "#":
                raise self.unsupported("inline comment", open_pos)
            elif nxt is None:
                raise self.error("unexpected end of pattern")
            else:
                raise self.unsupported("inline flags", open_pos)
        inner = self._alternation()
        if self.peek() != ")":
            self.pos = open_pos
            raise self.error("unbalanced parenthesis")
        self.take()
        return inner

    def _escape(self) -> object:
        backslash = self.pos
        self.expect("\\")
        if self.peek() is None:
            raise self.error("trailing backslash")
        ch = self.take()
        if ch in _CLASS_SHORTHAND:
            return CharSet(_CLASS_SHORTHAND[ch])
        if ch in _CHAR_ESCAPES:
            return CharSet(_chars(_CHAR_ESCAPES[ch]))
        if ch.isdigit():
            raise self.unsupported(f"backreference \\{ch}", backslash)
        if ch in ("b", "B", "A", "Z"):
            raise self.unsupported(f"anchor \\{ch}", backslash)
        if ch.isalpha():
            raise self.unsupported(f"escape \\{ch}", backslash)
        return CharSet(_chars(ch))

    def _class_escape(self) -> Ranges | str:
        """Escape inside []: returns ranges for shorthands, a char otherwise."""
        backslash = self.pos
        self.expect("\\")
        if self.peek() is None:
            raise self.error("trailing backslash")
        ch = self.take()
        if ch in _CLASS_SHORTHAND:
            return _CLASS_SHORTHAND[ch]
        if ch in _CHAR_ESCAPES:
            return _CHAR_ESCAPES[ch]
        if ch.isdigit():
            raise self.unsupported(f"backreference \\{ch}", backslash)
        if ch.isalpha() and ch != "b":
            raise self.unsupported(f"escape \\{ch}", backslash)
        if ch == "b":
            return "\b"
        return ch

    def _char_class(self) -> CharSet:
        open_pos = self.pos
        self.expect("[")
        negated = False
        if self.peek() == "^":
            self.take()
            negated = True
        items: list[tuple[int, int]] = []
        first = True
        while True:
            ch = self.peek()
            if ch is None:
                self.pos = open_pos
                raise self.error("unterminated character class")
            if ch == "]" and not first:
                self.take()
                break
            first = False
            if ch == "\\":
                esc = self._class_escape()
                if isinstance(esc, tuple):
                    items.extend(esc)
                    continue
                lo = ord(esc)
            else:
                lo = ord(self.take())
            # range like a-z; '-' before ']' is a literal
            if self.peek() == "-" and self.pos + 1 < len(self.pattern) and self.pattern[self.pos + 1] != "]":
                self.take()
                if self.peek() == "\\":
                    esc = self._class_escape()
                    if isinstance(esc, tuple):
                        raise self.error("bad character range")
                    hi = ord(esc)
                else:
                    hi = ord(self.take())
                if hi < lo:
                    raise self.error("bad character range")
                items.append((lo, hi))
            else:
                items.append((lo, lo))
        ranges = normalize_ranges(items)
        if negated:
            ranges = complement_ranges(ranges)
        if not ranges:
            self.pos = open_pos
            raise self.error("empty character class")
        return CharSet(ranges)


# ---------------------------------------------------------------------------
# Thompson NFA
# ---------------------------------------------------------------------------


class _Nfa:
    """Epsilon-NFA with range-labelled transitions, built fragment by fragment."""

    def __init__(self) -> None:
        self.transitions: list[list[tuple[Ranges, int]]] = []
        self.epsilon: list[list[int]] = []

    def new_state(self) -> int:
        self.transitions.append([])
        self.epsilon.append([])
        return len(self.transitions) - 1

    def add(self, src: int, ranges: Ranges, dst: int) -> None:
        self.transitions[src].append((ranges, dst))

    def link(self, src: int, dst: int) -> None:
        self.epsilon[src].append(dst)

    def fragment(self, node: object) -> tuple[int, int]:
        """Compile an AST node to a (start, accept) fragment with fresh states."""
        if isinstance(node, CharSet):
            start, accept = self.new_state(), self.new_state()
            self.add(start, node.ranges, accept)
            return start, accept
        if isinstance(node, Epsilon):
            start, accept = self.new_state(), self.new_state()
            self.link(start, accept)
            return start, accept
        if isinstance(node, Concat):
            start, accept = self.fragment(node.parts[0])
            for part in node.parts[1:]:
                nxt_start, nxt_accept = self.fragment(part)
                self.link(accept, nxt_start)
                accept = nxt_accept
            return start, accept
        if isinstance(node, Alternation):
            start, accept = self.new_state(), self.new_state()
            for option in node.options:
                o_start, o_accept = self.fragment(option)
                self.link(start, o_start)
                self.link(o_accept, accept)
            return start, accept
        if isinstance(node, Repeat):
            return self._repeat(node)
        raise TypeError(f"unknown AST node {node!r}")

    def _repeat(self, node: Repeat) -> tuple[int, int]:
        start = self.new_state()
        accept = start
        for _ in range(node.min_count):
            f_start, f_accept = self.fragment(node.item)
            self.link(accept, f_start)
            accept = f_accept
        if node.max_count is None:
            f_start, f_accept = self.fragment(node.item)
            self.link(accept, f_start)
            self.link(f_accept, f_start)
            out = self.new_state()
            self.link(accept, out)
            self.link(f_accept, out)
            return start, out
        tails = [accept]
        for _ in range(node.max_count - node.min_count):
            f_start, f_accept = self.fragment(node.item)
            self.link(accept, f_start)
            accept = f_accept
            tails.append(accept)
        out = self.new_state()
        for tail in tails:
            self.link(tail, out)
        return start, out


# ---------------------------------------------------------------------------
# Determinization, minimization, canonical numbering
# ---------------------------------------------------------------------------


def _interval_partition(range_sets: list[Ranges]) -> list[tuple[int, int]]:
    """Disjoint intervals refining every range in range_sets."""
    points: set[int] = set()
    for ranges in range_sets:
        for lo, hi in ranges:
            points.add(lo)
            points.add(hi + 1)
    bounds = sorted(points)
    intervals: list[tuple[int, int]] = []
    for lo, nxt in zip(bounds, bounds[1:]):
        intervals.append((lo, nxt - 1))
    covered = normalize_ranges([r for ranges in range_sets for r in ranges])
    return [iv for iv in intervals if ranges_contain(covered, iv[0])]


def _epsilon_closure(nfa: _Nfa, states: frozenset[int]) -> frozenset[int]:
    stack = list(states)
    closure = set(states)
    while stack:
        s = stack.pop()
        for t in nfa.epsilon[s]:
            if t not in closure:
                closure.add(t)
                stack.append(t)
    return frozenset(closure)


def _determinize(
    nfa: _Nfa, start: int, accept: int
) -> tuple[list[dict[int, int]], set[int], list[tuple[int, int]]]:
    """Subset construction. Returns per-state interval->target maps and finals."""
    intervals = _interval_partition([r for row in nfa.transitions for r, _ in row])
    # Precompute, per NFA state, the interval ids each transition covers.
    by_interval: list[dict[int, list[int]]] = []
    for row in nfa.transitions:
        cover: dict[int, list[int]] = {}
        for ranges, dst in row:
            for idx, (lo, _hi) in enumerate(intervals):
                if ranges_contain(ranges, lo):
                    cover.setdefault(idx, []).append(dst)
        by_interval.append(cover)

    initial = _epsilon_closure(nfa, frozenset([start]))
    ids: dict[frozenset[int], int] = {initial: 0}
    table: list[dict[int, int]] = [{}]
    finals: set[int] = set()
    if accept in initial:
        finals.add(0)
    queue = deque([initial])
    while queue:
        subset = queue.popleft()
        sid = ids[subset]
        moves: dict[int, set[int]] = {}
        for s in subset:
            for idx, dsts in by_interval[s].items():
                moves.setdefault(idx, set()).update(dsts)
        for idx in sorted(moves):
            closure = _epsilon_closure(nfa, frozenset(moves[idx]))
            if closure not in ids:
                ids[closure] = len(table)
                table.append({})
                if accept in closure:
                    finals.add(ids[closure])
                queue.append(closure)
            table[sid][idx] = ids[closure]
    return table, finals, intervals


def _hopcroft(
    table: list[dict[int, int]], finals: set[int], n_intervals: int, start: int
) -> tuple[list[dict[int, int]], set[int], int]:
    """Partition refinement with an implicit sink for missing transitions."""
    n = len(table)
    sink = n  # virtual dead state, total on every interval
    preimage: list[dict[int, set[int]]] = [dict() for _ in range(n + 1)]
    for s, row in enumerate(table):
        for idx in range(n_intervals):
            t = row.get(idx, sink)
            preimage[t].setdefault(idx, set()).add(s)
    for idx in range(n_intervals):
        preimage[sink].setdefault(idx, set()).add(sink)

    non_finals = (set(range(n)) - finals) | {sink}
    partition: list[set[int]] = [set(finals), non_finals]
    partition = [p for p in partition if p]
    work = list(range(len(partition)))
    while work:
        a = partition[work.pop()]
        for idx in range(n_intervals):
            x = set()
            for t in a:
                x |= preimage[t].get(idx, set())
            if not x:
                continue
            for i in range(len(partition)):
                block = partition[i]
                inter = block & x
                if not inter or inter == block:
                    continue
                diff = block - x
                partition[i] = inter
                partition.append(diff)
                if i in work:
                    work.append(len(partition) - 1)
                else:
                    work.append(i if len(inter) <= len(diff) else len(partition) - 1)

    block_of = {}
    for i, block in enumerate(partition):
        for s in block:
            block_of[s] = i
    sink_block = block_of[sink]
    new_table: list[dict[int, int]] = [{} for _ in partition]
    new_finals: set[int] = set()
    rep_done: set[int] = set()
    for s, row in enumerate(table):
        b = block_of[s]
        if b in rep_done:
            continue
        rep_done.add(b)
        for idx, t in row.items():
            if block_of[t] != sink_block:
                new_table[b][idx] = block_of[t]
        if s in finals:
            new_finals.add(b)
    # The sink block is dropped implicitly: nothing transitions into it and
    # the canonical pass only keeps states reachable from the start block.
    return new_table, new_finals, block_of[start]


def _canonical_fsm(
    table: list[dict[int, int]],
    finals: set[int],
    start: int,
    intervals: list[tuple[int, int]],
    pattern: str | None,
) -> "Fsm":
    """Renumber states breadth-first from start, exploring intervals in order."""
    order: dict[int, int] = {start: 0}
    queue = deque([start])
    while queue:
        s = queue.popleft()
        for idx in sorted(table[s]):
            t = table[s][idx]
            if t not in order:
                order[t] = len(order)
                queue.append(t)
    transitions: list[tuple[tuple[int, int, int], ...]] = [()] * len(order)
    for s, sid in order.items():
        row: list[tuple[int, int, int]] = []
        for idx, t in table[s].items():
            if t in order:
                lo, hi = intervals[idx]
                row.append((lo, hi, order[t]))
        # merge adjacent intervals that share a target
        row.sort()
        merged: list[tuple[int, int, int]] = []
        for lo, hi, t in row:
            if merged and merged[-1][2] == t and merged[-1][1] + 1 == lo:
                merged[-1] = (merged[-1][0], hi, t)
            else:
                merged.append((lo, hi, t))
        transitions[sid] = tuple(merged)
    new_finals = frozenset(order[s] for s in finals if s in order)
    return Fsm(
        n_states=len(order),
        transitions=tuple(transitions),
        finals=new_finals,
        pattern=pattern,
    )


# ---------------------------------------------------------------------------
# Public FSM type and operations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Fsm:
    """Deterministic finite automaton over codepoint ranges.

    Attributes:
        n_states: Number of states; states are the integers 0..n_states-1.
        transitions: Per-state tuple of (lo, hi, target) entries, sorted and
            disjoint. Characters outside every range have no transition.
        finals: Accepting states.
        start: Start state, always 0 for compiled automata.
        pattern: Source pattern when compiled from a regex; ignored by
            equality and digests.
    """

    n_states: int
    transitions: tuple[tuple[tuple[int, int, int], ...], ...]
    finals: frozenset[int]
    start: int = 0
    pattern: str | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if not (0 <= self.start < self.n_states):
            raise ValueError("start state out of range")
        if any(s < 0 or s >= self.n_states for s in self.finals):
            raise ValueError("final state out of range")
        for row in self.transitions:
            prev_hi = -1
            for lo, hi, t in row:
                if lo > hi or lo <= prev_hi:
                    raise ValueError("transition ranges must be sorted and disjoint")
                if not (0 <= t < self.n_states):
                    raise ValueError("transition target out of range")
                prev_hi = hi

    @property
    def states(self) -> frozenset[int]:
        return frozenset(range(self.n_states))

    @property
    def alphabet(self) -> Ranges:
        """Union of all transition ranges."""
        return normalize_ranges(
            [(lo, hi) for row in self.transitions for lo, hi, _ in row]
        )

    def step(self, state: int, ch: str) -> int | None:
        """Transition target from state on character ch, or None if undefined."""
        if not (0 <= state < self.n_states):
            raise ValueError(f"state {state} out of range for {self.n_states}-state FSM")
        cp = ord(ch)
        row = self.transitions[state]
        i = bisect_right(row, (cp, MAX_CODEPOINT + 1, self.n_states)) - 1
        if i >= 0 and row[i][0] <= cp <= row[i][1]:
            return row[i][2]
        return None

    def states_reading(self, ch: str) -> frozenset[int]:
        """All states with a transition defined on ch."""
        cp = ord(ch)
        out = []
        for s, row in enumerate(self.transitions):
            i = bisect_right(row, (cp, MAX_CODEPOINT + 1, self.n_states)) - 1
            if i >= 0 and row[i][0] <= cp <= row[i][1]:
                out.append(s)
        return frozenset(out)

    def walk(self, state: int, text: str) -> int | None:
        """Walk text from state; None as soon as a transition is undefined."""
        cur: int | None = state
        for ch in text:
            cur = self.step(cur, ch)
            if cur is None:
                return None
        return cur

    def accepts(self, text: str) -> bool:
        """Whole-string acceptance from the start state."""
        end = self.walk(self.start, text)
        return end is not None and end in self.finals

    def transition_count(self) -> int:
        """Number of (state, character) pairs with a defined transition."""
        return sum(hi - lo + 1 for row in self.transitions for lo, hi, _ in row)

    @property
    def digest(self) -> bytes:
        """32-byte content hash of the automaton structure."""
        cached = self.__dict__.get("_digest")
        if cached is None:
            h = hashlib.sha256()
            h.update(b"FSM\x01")
            h.update(struct.pack("<III", self.n_states, self.start, len(self.finals)))
            for s in sorted(self.finals):
                h.update(struct.pack("<I", s))
            for row in self.transitions:
                h.update(struct.pack("<I", len(row)))
                for lo, hi, t in row:
                    h.update(struct.pack("<III", lo, hi, t))
            cached = h.digest()
            object.__setattr__(self, "_digest", cached)
        return cached


class TransitionTable:
    """Interval-partitioned view of an FSM with an inverse adjacency.

    The forward map mirrors the FSM's transitions keyed by interval id; the
    inverse map answers "which states read this character" without scanning
    all states.
    """

    def __init__(self, fsm: Fsm) -> None:
        self.fsm = fsm
        range_sets = [tuple((lo, hi) for lo, hi, _ in row) for row in fsm.transitions]
        self.intervals = _interval_partition([r for r in range_sets if r])
        self._starts = [lo for lo, _ in self.intervals]
        self.forward: list[dict[int, int]] = []
        inverse: dict[int, list[int]] = {}
        for s, row in enumerate(fsm.transitions):
            fwd: dict[int, int] = {}
            for lo, hi, t in row:
                for idx, (ilo, _ihi) in enumerate(self.intervals):
                    if lo <= ilo <= hi:
                        fwd[idx] = t
                        inverse.setdefault(idx, []).append(s)
            self.forward.append(fwd)
        self.inverse: dict[int, tuple[int, ...]] = {
            idx: tuple(sorted(set(states))) for idx, states in inverse.items()
        }

    def interval_of(self, ch: str) -> int | None:
        cp = ord(ch)
        i = bisect_right(self._starts, cp) - 1
        if i >= 0 and self.intervals[i][0] <= cp <= self.intervals[i][1]:
            return i
        return None

    def step(self, state: int, ch: str) -> int | None:
        idx = self.interval_of(ch)
        if idx is None:
            return None
        return self.forward[state].get(idx)

    def states_reading(self, ch: str) -> tuple[int, ...]:
        idx = self.interval_of(ch)
        if idx is None:
            return ()
        return self.inverse.get(idx, ())


def compile_regex(pattern: str, *, minimize: bool = False) -> Fsm:
    """Compile a regex to a DFA with whole-string match semantics.

    Args:
        pattern: Pattern in the supported subset (docs/regex_subset.md).
        minimize: Apply Hopcroft minimization. Off by default so automata
            keep the per-subpattern states that vocabulary indexing and the
            guided-generation walkthroughs reason about.

    Returns:
        A trim, deterministic, canonically numbered Fsm.

    Raises:
        RegexParseError: Malformed pattern, with position.
        UnsupportedConstructError: Pattern uses a construct outside the subset.
    """
    ast = _Parser(pattern).parse()
    nfa = _Nfa()
    start, accept = nfa.fragment(ast)
    table, finals, intervals = _determinize(nfa, start, accept)
    dfa_start = 0
    if minimize:
        table, finals, dfa_start = _hopcroft(table, finals, len(intervals), dfa_start)
    return _canonical_fsm(table, finals, dfa_start, intervals, pattern)


def live_states(fsm: Fsm) -> frozenset[int]:
    """States from which some final state is reachable (dead-end pruning set)."""
    reverse: dict[int, set[int]] = {s: set() for s in range(fsm.n_states)}
    for s, row in enumerate(fsm.transitions):
        for _lo, _hi, t in row:
            reverse[t].add(s)
    live = set(fsm.finals)
    queue = deque(live)
    while queue:
        s = queue.popleft()
        for p in reverse[s]:
            if p not in live:
                live.add(p)
                queue.append(p)
    return frozenset(live)
