"""LALR(1) table construction and the pushdown-automaton view of the parser.

Tables are built as the canonical LR(1) collection with same-core states
merged (LALR-by-merging); conflicts are detected after the merge and
reported with their dotted items. The resulting action/goto tables drive
both the concrete parser used at generation time and a formal 6-tuple PDA
whose transition map is keyed by (state, input terminal, stack top).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Hashable, Mapping

from .errors import GrammarConflictError
from .grammar import Grammar, Production

END = "$end"
AUGMENTED_START = "$accept"

# action entries: ("shift", state) | ("reduce", production index) | ("accept",)
Action = tuple


@dataclass(frozen=True)
class LalrTables:
    """Action/goto tables over merged LALR(1) states.

    Attributes:
        grammar: Source grammar.
        productions: Augmented production list; index 0 is
            ``$accept -> start``.
        action: Per state, terminal name -> action tuple.
        goto: Per state, nonterminal name -> successor state.
    """

    grammar: Grammar
    productions: tuple[Production, ...]
    action: tuple[dict[str, Action], ...]
    goto: tuple[dict[str, int], ...]

    @property
    def n_states(self) -> int:
        return len(self.action)

    def allowed_terminals(self, state: int) -> tuple[str, ...]:
        """Terminals with any action in state, in declaration order, sans END."""
        row = self.action[state]
        return tuple(t for t in self.grammar.terminal_names if t in row)

    def predecessors(self) -> dict[int, frozenset[int]]:
        """For each state, the states with a shift or goto edge into it."""
        preds: dict[int, set[int]] = {s: set() for s in range(self.n_states)}
        for s, row in enumerate(self.action):
            for act in row.values():
                if act[0] == "shift":
                    preds[act[1]].add(s)
        for s, row in enumerate(self.goto):
            for t in row.values():
                preds[t].add(s)
        return {s: frozenset(v) for s, v in preds.items()}

    def productive_nonterminals(self) -> frozenset[str]:
        """Nonterminals that derive at least one terminal string."""
        terminals = set(self.grammar.terminal_names)
        productive: set[str] = set()
        changed = True
        while changed:
            changed = False
            for p in self.productions[1:]:
                if p.lhs in productive:
                    continue
                if all(sym in terminals or sym in productive for sym in p.rhs):
                    productive.add(p.lhs)
                    changed = True
        return frozenset(productive)

    def reachable_states(self) -> frozenset[int]:
        """States a real parse can enter: shift edges plus gotos on
        productive nonterminals, from state 0."""
        productive = self.productive_nonterminals()
        seen = {0}
        queue = [0]
        while queue:
            s = queue.pop()
            targets = [act[1] for act in self.action[s].values() if act[0] == "shift"]
            targets += [t for nt, t in self.goto[s].items() if nt in productive]
            for t in targets:
                if t not in seen:
                    seen.add(t)
                    queue.append(t)
        return frozenset(seen)


def _first_sets(
    grammar: Grammar, productions: tuple[Production, ...]
) -> dict[str, set[str | None]]:
    """FIRST for every symbol; None stands for epsilon."""
    first: dict[str, set[str | None]] = {t: {t} for t in grammar.terminal_names}
    first[END] = {END}
    for p in productions:
        first.setdefault(p.lhs, set())
    changed = True
    while changed:
        changed = False
        for p in productions:
            target = first[p.lhs]
            before = len(target)
            nullable = True
            for sym in p.rhs:
                target |= first[sym] - {None}
                if None not in first[sym]:
                    nullable = False
                    break
            if nullable:
                target.add(None)
            changed = changed or len(target) != before
    return first


def _first_of_sequence(
    seq: tuple[str, ...], lookahead: str, first: dict[str, set[str | None]]
) -> set[str]:
    out: set[str] = set()
    for sym in seq:
        out |= first[sym] - {None}
        if None not in first[sym]:
            return out
    out.add(lookahead)
    return out


# An LR(1) item: (production index, dot position, lookahead terminal).
Item = tuple[int, int, str]


def _closure(
    items: frozenset[Item],
    productions: tuple[Production, ...],
    by_lhs: dict[str, list[int]],
    first: dict[str, set[str | None]],
) -> frozenset[Item]:
    result = set(items)
    queue = deque(items)
    while queue:
        pidx, dot, la = queue.popleft()
        rhs = productions[pidx].rhs
        if dot >= len(rhs):
            continue
        sym = rhs[dot]
        if sym not in by_lhs:
            continue
        lookaheads = _first_of_sequence(rhs[dot + 1 :], la, first)
        for sub in by_lhs[sym]:
            for la2 in sorted(lookaheads):
                item = (sub, 0, la2)
                if item not in result:
                    result.add(item)
                    queue.append(item)
    return frozenset(result)


def _goto_set(
    items: frozenset[Item],
    symbol: str,
    productions: tuple[Production, ...],
    by_lhs: dict[str, list[int]],
    first: dict[str, set[str | None]],
) -> frozenset[Item]:
    moved = frozenset(
        (pidx, dot + 1, la)
        for pidx, dot, la in items
        if dot < len(productions[pidx].rhs) and productions[pidx].rhs[dot] == symbol
    )
    if not moved:
        return frozenset()
    return _closure(moved, productions, by_lhs, first)


def _dotted(prod: Production, dot: int) -> str:
    parts = [*prod.rhs[:dot], ".", *prod.rhs[dot:]]
    return f"{prod.lhs} -> {' '.join(parts)}"


def build_lalr_tables(grammar: Grammar) -> LalrTables:
    """Construct LALR(1) tables, rejecting grammars with conflicts.

    Raises:
        GrammarConflictError: shift/reduce or reduce/reduce conflict, with
            the conflicting dotted items listed.
    """
    productions = (
        Production(lhs=AUGMENTED_START, rhs=(grammar.start,)),
        *grammar.productions,
    )
    by_lhs: dict[str, list[int]] = {}
    for i, p in enumerate(productions):
        by_lhs.setdefault(p.lhs, []).append(i)
    first = _first_sets(grammar, productions)

    initial = _closure(frozenset({(0, 0, END)}), productions, by_lhs, first)
    canonical: dict[frozenset[Item], int] = {initial: 0}
    transitions: list[dict[str, int]] = [{}]
    queue = deque([initial])
    symbols = [*grammar.terminal_names, *grammar.nonterminals]
    while queue:
        items = queue.popleft()
        sid = canonical[items]
        for sym in symbols:
            target = _goto_set(items, sym, productions, by_lhs, first)
            if not target:
                continue
            if target not in canonical:
                canonical[target] = len(canonical)
                transitions.append({})
                queue.append(target)
            transitions[sid][sym] = canonical[target]

    # Merge same-core LR(1) states into LALR states, numbered by first
    # appearance so the result is deterministic.
    cores: dict[frozenset[tuple[int, int]], int] = {}
    merged_of: dict[int, int] = {}
    merged_items: list[set[Item]] = []
    ordered_sets = sorted(canonical.items(), key=lambda kv: kv[1])
    for items, sid in ordered_sets:
        core = frozenset((p, d) for p, d, _ in items)
        if core not in cores:
            cores[core] = len(merged_items)
            merged_items.append(set())
        merged_of[sid] = cores[core]
        merged_items[cores[core]] |= items

    n = len(merged_items)
    action: list[dict[str, Action]] = [{} for _ in range(n)]
    goto: list[dict[str, int]] = [{} for _ in range(n)]
    conflicts: list[str] = []
    nonterminals = set(grammar.nonterminals) | {AUGMENTED_START}

    for sid, row in enumerate(transitions):
        m = merged_of[sid]
        for sym, tgt in row.items():
            if sym in nonterminals:
                goto[m][sym] = merged_of[tgt]
            else:
                action[m][sym] = ("shift", merged_of[tgt])

    def put(state: int, terminal: str, act: Action, item: str) -> None:
        existing = action[state].get(terminal)
        if existing is None or existing == act:
            action[state][terminal] = act
            return
        kind = "shift/reduce" if "shift" in (existing[0], act[0]) else "reduce/reduce"
        conflicts.append(
            f"{kind} conflict in state {state} on {terminal!r}: "
            f"{_describe(existing, productions)} vs {item}"
        )

    for m, items in enumerate(merged_items):
        for pidx, dot, la in sorted(items):
            prod = productions[pidx]
            if dot < len(prod.rhs):
                continue
            dotted = _dotted(prod, dot)
            if pidx == 0:
                action[m][END] = ("accept",)
            else:
                put(m, la, ("reduce", pidx), f"reduce [{dotted}, {la!r}]")

    if conflicts:
        raise GrammarConflictError(sorted(set(conflicts)))
    return LalrTables(
        grammar=grammar,
        productions=productions,
        action=tuple(action),
        goto=tuple(goto),
    )


def _describe(act: Action, productions: tuple[Production, ...]) -> str:
    if act[0] == "shift":
        return f"shift to state {act[1]}"
    if act[0] == "reduce":
        return f"reduce [{_dotted(productions[act[1]], len(productions[act[1]].rhs))}]"
    return "accept"


# ---------------------------------------------------------------------------
# Pushdown automaton view
# ---------------------------------------------------------------------------

#: epsilon marker for PDA input and stack positions
EPS = None


@dataclass(frozen=True)
class Pda:
    """6-tuple pushdown automaton with one-pop/one-push moves.

    ``delta`` maps (state, terminal-or-None, stack-top-or-None) to a set of
    (successor state, pushed-symbol-or-None); None plays epsilon on both the
    input and the stack sides.
    """

    states: frozenset
    input_symbols: frozenset[str]
    stack_symbols: frozenset
    delta: Mapping[tuple, frozenset]
    start: Hashable
    finals: frozenset

    def moves(self, state, terminal, stack_top) -> frozenset:
        return self.delta.get((state, terminal, stack_top), frozenset())


def pda_preimage(pda: Pda, state, terminals: frozenset[str] | set[str]) -> frozenset:
    """Stack values (epsilon included) that let `state` read any of `terminals`.

    Computes { g : exists v in terminals with delta(state, v, g) nonempty },
    g drawn from the stack alphabet plus epsilon (None).
    """
    out = set()
    for (q, v, g), targets in pda.delta.items():
        if q == state and v is not None and v in terminals and targets:
            out.add(g)
    return frozenset(out)


def tables_to_pda(tables: LalrTables) -> Pda:
    """Derive the PDA of the LALR tables.

    The LR state stack, minus the current state, lives on the PDA stack; the
    current state plus any in-flight reduce bookkeeping lives in the PDA
    state. Reading terminal v from parser state q consumes v up front and
    replays the shift/reduce chain as epsilon moves:

      ("lr", q)           parser in state q, no pending input
      ("rpop", p, i, v)   reducing production p, i stack symbols left to pop,
                          pending input v
      ("la", q, v)        parser reached state q with v still pending
      ("accept",)         input accepted

    A shift pushes the state it leaves; a reduce pop inspects every stack
    symbol it can legally expose.
    """
    delta: dict[tuple, set] = {}
    lr_states = range(tables.n_states)
    stack_symbols = frozenset(lr_states)

    def add(key: tuple, value: tuple) -> None:
        delta.setdefault(key, set()).add(value)

    goto_sources: dict[str, list[int]] = {}
    for s in lr_states:
        for nt in tables.goto[s]:
            goto_sources.setdefault(nt, []).append(s)

    states: set = {("lr", q) for q in lr_states} | {("accept",)}
    queue: deque[tuple] = deque()

    def enter_pending(q: int, v: str) -> tuple:
        state = ("la", q, v)
        if state not in states:
            states.add(state)
            queue.append(state)
        return state

    # Entry moves from every parser state on every actionable terminal.
    for q in lr_states:
        src = ("lr", q)
        for v, act in tables.action[q].items():
            if act[0] == "shift":
                add((src, v, EPS), (("lr", act[1]), q))
            elif act[0] == "accept":
                add((src, v, EPS), (("accept",), EPS))
            else:
                pidx = act[1]
                k = len(tables.productions[pidx].rhs)
                if k == 0:
                    nt = tables.productions[pidx].lhs
                    target = tables.goto[q].get(nt)
                    if target is not None:
                        add((src, v, EPS), (enter_pending(target, v), q))
                else:
                    chain = ("rpop", pidx, k - 1, v)
                    if chain not in states:
                        states.add(chain)
                        queue.append(chain)
                    add((src, v, EPS), (chain, EPS))

    while queue:
        state = queue.popleft()
        if state[0] == "rpop":
            _tag, pidx, i, v = state
            if i > 0:
                nxt = ("rpop", pidx, i - 1, v)
                if nxt not in states:
                    states.add(nxt)
                    queue.append(nxt)
                for g in sorted(stack_symbols):
                    add((state, EPS, g), (nxt, EPS))
            else:
                nt = tables.productions[pidx].lhs
                for t in sorted(goto_sources.get(nt, [])):
                    target = tables.goto[t][nt]
                    add((state, EPS, t), (enter_pending(target, v), t))
        elif state[0] == "la":
            _tag, q, v = state
            act = tables.action[q].get(v)
            if act is None:
                continue  # dead parse path
            if act[0] == "shift":
                add((state, EPS, EPS), (("lr", act[1]), q))
            elif act[0] == "accept":
                add((state, EPS, EPS), (("accept",), EPS))
            else:
                pidx = act[1]
                k = len(tables.productions[pidx].rhs)
                if k == 0:
                    nt = tables.productions[pidx].lhs
                    target = tables.goto[q].get(nt)
                    if target is not None:
                        add((state, EPS, EPS), (enter_pending(target, v), q))
                else:
                    chain = ("rpop", pidx, k - 1, v)
                    if chain not in states:
                        states.add(chain)
                        queue.append(chain)
                    add((state, EPS, EPS), (chain, EPS))

    return Pda(
        states=frozenset(states),
        input_symbols=frozenset([*tables.grammar.terminal_names, END]),
        stack_symbols=stack_symbols,
        delta={k: frozenset(v) for k, v in delta.items()},
        start=("lr", 0),
        finals=frozenset({("accept",)}),
    )
