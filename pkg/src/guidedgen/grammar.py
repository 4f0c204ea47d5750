"""Context-free grammars with regex-bound terminals.

Text format (see docs/grammar_format.md)::

    %token DEF /def/
    %skip  WS  /[ \\t]+/
    %start stmt
    stmt: funcdef | NAME ;
    funcdef: DEF NAME LPAR RPAR COLON body ;

Terminal declaration order doubles as lexer priority: when a lexeme
completes several terminals at once (e.g. a keyword that is also a valid
identifier), the earliest declared terminal wins. ``%skip`` terminals are
scanned and discarded instead of being fed to the parser.
"""

from __future__ import annotations

import hashlib
import re as _re
from dataclasses import dataclass
from pathlib import Path

from .errors import GrammarError, GrammarFormatError
from .fsm import Fsm, compile_regex


@dataclass(frozen=True)
class TerminalDecl:
    name: str
    pattern: str
    skip: bool = False


@dataclass(frozen=True)
class Production:
    lhs: str
    rhs: tuple[str, ...]

    def __str__(self) -> str:
        rhs = " ".join(self.rhs) if self.rhs else "<empty>"
        return f"{self.lhs} -> {rhs}"


@dataclass(frozen=True)
class Grammar:
    """Validated grammar: terminals bound to regexes, productions, start symbol."""

    terminals: tuple[TerminalDecl, ...]
    productions: tuple[Production, ...]
    start: str

    def __post_init__(self) -> None:
        names = [t.name for t in self.terminals]
        if len(set(names)) != len(names):
            raise GrammarError("duplicate terminal declarations")
        nonterminals = {p.lhs for p in self.productions}
        overlap = nonterminals & set(names)
        if overlap:
            raise GrammarError(f"symbols declared as both kinds: {sorted(overlap)}")
        if self.start not in nonterminals:
            raise GrammarError(f"start symbol {self.start!r} has no production")
        declared = nonterminals | set(names)
        for prod in self.productions:
            for sym in prod.rhs:
                if sym not in declared:
                    raise GrammarError(f"undeclared symbol {sym!r} in {prod}")

    @property
    def nonterminals(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for p in self.productions:
            seen.setdefault(p.lhs, None)
        return tuple(seen)

    @property
    def terminal_names(self) -> tuple[str, ...]:
        return tuple(t.name for t in self.terminals)

    @property
    def skip_names(self) -> frozenset[str]:
        return frozenset(t.name for t in self.terminals if t.skip)

    def priority(self, name: str) -> int:
        """Lexer priority; lower wins on simultaneous completion."""
        return self.terminal_names.index(name)

    def terminal_fsm(self, name: str) -> Fsm:
        cache = self.__dict__.setdefault("_fsm_cache", {})
        if name not in cache:
            decl = next(t for t in self.terminals if t.name == name)
            fsm = compile_regex(decl.pattern)
            if fsm.start in fsm.finals:
                raise GrammarError(
                    f"terminal {name} matches the empty string; lexing would never progress"
                )
            cache[name] = fsm
        return cache[name]

    @property
    def digest(self) -> bytes:
        h = hashlib.sha256()
        h.update(b"GRM\x01")
        for t in self.terminals:
            h.update(f"{'skip' if t.skip else 'token'} {t.name} {t.pattern}\n".encode())
        h.update(f"start {self.start}\n".encode())
        for p in self.productions:
            h.update(f"{p.lhs}: {' '.join(p.rhs)}\n".encode())
        return h.digest()


_DECL_RE = _re.compile(r"^%(token|skip)\s+([A-Z][A-Z0-9_]*)\s+/(.*)/\s*$")
_START_RE = _re.compile(r"^%start\s+([a-z][a-z0-9_]*)\s*$")
_NAME_RE = _re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")


def parse_grammar(text: str) -> Grammar:
    """Parse the grammar text format.

    Terminal names are upper-case, nonterminals lower-case. Productions
    span lines until ``;`` and use ``|`` for alternatives; an empty
    alternative is an epsilon production.
    """
    terminals: list[TerminalDecl] = []
    productions: list[Production] = []
    start: str | None = None

    rule_buf: list[str] = []
    rule_line = 0

    def flush_rule() -> None:
        nonlocal rule_buf
        body = " ".join(rule_buf).strip()
        rule_buf = []
        if not body:
            return
        if ":" not in body:
            raise GrammarFormatError(f"production {body!r} lacks ':'", rule_line)
        lhs, _, rest = body.partition(":")
        lhs = lhs.strip()
        rest = rest.strip()
        if rest.endswith(";"):
            rest = rest[:-1]
        if not _NAME_RE.match(lhs) or not lhs[0].islower():
            raise GrammarFormatError(f"bad nonterminal name {lhs!r}", rule_line)
        for alt in rest.split("|"):
            symbols = tuple(alt.split())
            for sym in symbols:
                if not _NAME_RE.match(sym):
                    raise GrammarFormatError(f"bad symbol {sym!r}", rule_line)
            productions.append(Production(lhs=lhs, rhs=symbols))

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if line.lstrip().startswith("%"):
            stripped = line.strip()
            if m := _DECL_RE.match(stripped):
                kind, name, pattern = m.groups()
                terminals.append(
                    TerminalDecl(name=name, pattern=pattern, skip=kind == "skip")
                )
            elif m := _START_RE.match(stripped):
                if start is not None:
                    raise GrammarFormatError("duplicate %start", lineno)
                start = m.group(1)
            else:
                raise GrammarFormatError(f"bad directive {stripped!r}", lineno)
            continue
        if not rule_buf:
            rule_line = lineno
        rule_buf.append(line.strip())
        if line.rstrip().endswith(";"):
            flush_rule()
    if rule_buf:
        raise GrammarFormatError("unterminated production (missing ';')", rule_line)
    if start is None:
        raise GrammarFormatError("missing %start directive")
    if not terminals:
        raise GrammarFormatError("no terminal declarations")
    return Grammar(
        terminals=tuple(terminals), productions=tuple(productions), start=start
    )


def load_grammar(path: str | Path) -> Grammar:
    return parse_grammar(Path(path).read_text(encoding="utf-8"))
