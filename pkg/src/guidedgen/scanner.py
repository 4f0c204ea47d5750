"""Union automata over terminal regexes and incremental candidate tracking.

A parse state admits a set of terminals; their individual automata are
determinized into one combined FSM whose final states are tagged with the
terminal(s) they complete. Scanning a lexeme character by character narrows
the candidate terminal set V; a symbol is emitted only when the next
character is unreadable (longest match) or when nothing could extend the
lexeme any further.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .fsm import Fsm, _interval_partition


@dataclass(frozen=True)
class CombinedFsm:
    """Determinized union of named terminal automata.

    Attributes:
        fsm: The union automaton (canonical numbering, start 0).
        members: Terminal names in priority order (declaration order).
        completed: Per state, the terminals whose automaton accepts exactly
            the characters read so far.
        reachable: Per state, the terminals that completed here or can still
            complete with more characters; the candidate set V of a lexeme
            parked at this state.
        skip: Members that are scanned and discarded.
    """

    fsm: Fsm
    members: tuple[str, ...]
    completed: tuple[frozenset[str], ...]
    reachable: tuple[frozenset[str], ...]
    skip: frozenset[str]

    def emit_choice(self, state: int) -> str | None:
        """Highest-priority terminal completed at state, None when none has."""
        done = self.completed[state]
        if not done:
            return None
        return min(done, key=self.members.index)

    def exhausted(self, state: int) -> bool:
        """True when no character can extend the lexeme at state."""
        return not self.fsm.transitions[state]


def combine_fsms(
    named: list[tuple[str, Fsm]], skip: frozenset[str] = frozenset()
) -> CombinedFsm:
    """Determinize the union of named automata, tagging finals by member.

    Subset construction over (member, state) pairs; the union starts in
    every member's start state. State numbering is breadth-first and
    deterministic for a given member order.
    """
    members = tuple(name for name, _ in named)
    fsms = {name: fsm for name, fsm in named}
    range_sets = [
        tuple((lo, hi) for lo, hi, _ in row)
        for _, fsm in named
        for row in fsm.transitions
    ]
    intervals = _interval_partition([r for r in range_sets if r])

    def move(subset: frozenset[tuple[str, int]], interval: tuple[int, int]):
        out = set()
        for name, state in subset:
            for lo, hi, t in fsms[name].transitions[state]:
                if lo <= interval[0] <= hi:
                    out.add((name, t))
        return frozenset(out)

    initial = frozenset((name, fsms[name].start) for name in members)
    ids: dict[frozenset, int] = {initial: 0}
    subsets = [initial]
    table: list[list[tuple[int, int, int]]] = [[]]
    queue = deque([initial])
    while queue:
        subset = queue.popleft()
        sid = ids[subset]
        row: list[tuple[int, int, int]] = []
        for interval in intervals:
            target = move(subset, interval)
            if not target:
                continue
            if target not in ids:
                ids[target] = len(subsets)
                subsets.append(target)
                table.append([])
                queue.append(target)
            row.append((interval[0], interval[1], ids[target]))
        merged: list[tuple[int, int, int]] = []
        for lo, hi, t in sorted(row):
            if merged and merged[-1][2] == t and merged[-1][1] + 1 == lo:
                merged[-1] = (merged[-1][0], hi, t)
            else:
                merged.append((lo, hi, t))
        table[sid] = merged

    completed = tuple(
        frozenset(name for name, s in subset if s in fsms[name].finals)
        for subset in subsets
    )
    finals = frozenset(i for i, tags in enumerate(completed) if tags)
    fsm = Fsm(
        n_states=len(subsets),
        transitions=tuple(tuple(row) for row in table),
        finals=finals,
    )

    # reachable[s]: tags completable from s, via reverse reachability per tag
    reverse: dict[int, set[int]] = {s: set() for s in range(fsm.n_states)}
    for s, row in enumerate(fsm.transitions):
        for _lo, _hi, t in row:
            reverse[t].add(s)
    reach: list[set[str]] = [set(tags) for tags in completed]
    for name in members:
        tagged = [s for s, tags in enumerate(completed) if name in tags]
        seen = set(tagged)
        queue2 = deque(tagged)
        while queue2:
            s = queue2.popleft()
            for p in reverse[s]:
                if p not in seen:
                    seen.add(p)
                    queue2.append(p)
        for s in seen:
            reach[s].add(name)

    return CombinedFsm(
        fsm=fsm,
        members=members,
        completed=completed,
        reachable=tuple(frozenset(r) for r in reach),
        skip=skip & frozenset(members),
    )


def scan_candidates(combined: CombinedFsm, lexeme: str) -> frozenset[str]:
    """Candidate set for the first non-skip terminal of lexeme.

    While the first lexeme is in flight its candidate set is the terminals
    still completable from the current state; once the deterministic
    longest-match scanner is forced to emit, the set collapses to that one
    terminal. Leading skip terminals leave the set unconstrained. Returns
    the empty set when the scanner gets stuck before resolving.
    """
    all_non_skip = frozenset(combined.members) - combined.skip
    state = combined.fsm.start
    pending = False
    for ch in lexeme:
        nxt = combined.fsm.step(state, ch)
        if nxt is None:
            # longest match ends here; the completed terminal is the answer
            choice = combined.emit_choice(state)
            if choice is None:
                return frozenset()
            if choice not in combined.skip:
                return frozenset({choice})
            nxt = combined.fsm.step(combined.fsm.start, ch)
            if nxt is None:
                return frozenset()
        state = nxt
        pending = True
        if combined.exhausted(state):
            choice = combined.emit_choice(state)
            if choice is None:
                return frozenset()
            if choice not in combined.skip:
                return frozenset({choice})
            state = combined.fsm.start
            pending = False
    if not pending or combined.reachable[state] & combined.skip:
        # nothing read yet, or the lexeme in flight may still be a skip:
        # the first real terminal is unconstrained
        return all_non_skip
    return combined.reachable[state]
