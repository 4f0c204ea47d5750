import pytest

from guidedgen.errors import GrammarError, GrammarFormatError
from guidedgen.grammar import Grammar, Production, TerminalDecl, parse_grammar

MINI_GRAMMAR = """
# Python-like mini grammar
%token DEF /def/
%token PASS /pass/
%token NAME /[^\\W\\d]\\w*/
%token LPAR /\\(/
%token RPAR /\\)/
%token COLON /:/
%skip WS /[ \\t]+/
%start stmt

stmt: funcdef | NAME ;
funcdef: DEF NAME LPAR RPAR COLON body ;
body: PASS ;
"""


def test_parse_mini_grammar():
    g = parse_grammar(MINI_GRAMMAR)
    assert g.terminal_names == ("DEF", "PASS", "NAME", "LPAR", "RPAR", "COLON", "WS")
    assert g.skip_names == frozenset({"WS"})
    assert g.start == "stmt"
    assert Production(lhs="funcdef", rhs=("DEF", "NAME", "LPAR", "RPAR", "COLON", "body")) in g.productions


def test_keyword_priority_is_declaration_order():
    g = parse_grammar(MINI_GRAMMAR)
    assert g.priority("DEF") < g.priority("NAME")
    assert g.priority("PASS") < g.priority("NAME")


def test_multiline_production_and_comments():
    g = parse_grammar(
        "%token A /a/\n%start s\n"
        "s: A  # trailing comment\n"
        " | A A ;\n"
    )
    assert len(g.productions) == 2


def test_epsilon_alternative():
    g = parse_grammar("%token A /a/\n%start s\ns: A s | ;\n")
    assert Production(lhs="s", rhs=()) in g.productions


def test_missing_start_rejected():
    with pytest.raises(GrammarFormatError):
        parse_grammar("%token A /a/\ns: A ;\n")


def test_unterminated_production_names_line():
    with pytest.raises(GrammarFormatError) as exc:
        parse_grammar("%token A /a/\n%start s\ns: A\n")
    assert exc.value.line == 3


def test_undeclared_symbol_rejected():
    with pytest.raises(GrammarError, match="undeclared"):
        parse_grammar("%token A /a/\n%start s\ns: A missing ;\n")


def test_duplicate_terminal_rejected():
    with pytest.raises(GrammarError):
        parse_grammar("%token A /a/\n%token A /b/\n%start s\ns: A ;\n")


def test_empty_matching_terminal_rejected():
    g = parse_grammar("%token A /a*/\n%start s\ns: A ;\n")
    with pytest.raises(GrammarError, match="empty string"):
        g.terminal_fsm("A")


def test_digest_tracks_content():
    g1 = parse_grammar(MINI_GRAMMAR)
    g2 = parse_grammar(MINI_GRAMMAR)
    g3 = parse_grammar(MINI_GRAMMAR.replace("/def/", "/fn/"))
    assert g1.digest == g2.digest
    assert g1.digest != g3.digest


def test_direct_construction_validation():
    with pytest.raises(GrammarError):
        Grammar(
            terminals=(TerminalDecl("A", "a"),),
            productions=(Production("s", ("A",)),),
            start="missing",
        )
