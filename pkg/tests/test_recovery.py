import random

import pytest

from gramconv.grammar import (
    Grammar,
    choice,
    n,
    opt,
    p,
    plus,
    sepplus,
    seq,
    star,
    t,
    vocabulary,
)
from gramconv.notation import parse_spec, spec
from gramconv.recovery import RecoveryError, UnparseError, recover, unparse

from gen import random_expressible

BASIC = spec({"defining": "::=", "terminator": ";", "definition-separator": "|",
              "plus-postfix": "+", "star-postfix": "*", "option-postfix": "?",
              "group-start": "(", "group-end": ")"})


def reference_spec(data_dir):
    return parse_spec((data_dir / "reference.edd").read_text(encoding="utf-8"))


def test_recover_single_rule():
    report = recover("program ::= function+ ;", BASIC)
    assert report.grammar == Grammar(("program",), (p("program", plus(n("function"))),))


def test_recover_empty_input_warns():
    report = recover("", BASIC)
    assert report.grammar == Grammar((), ())
    assert report.warnings


def test_recover_grouping_and_precedence():
    report = recover("a ::= ( b | c ) d ;", BASIC)
    assert report.grammar.productions[0].rhs == seq(choice(n("b"), n("c")), n("d"))


def test_precedence_postfix_over_concat_over_alternation():
    report = recover("a ::= b c+ | d ;", BASIC)
    assert report.grammar.productions[0].rhs == choice(seq(n("b"), plus(n("c"))), n("d"))


def test_reserved_value_names():
    report = recover("a ::= str int b ;", BASIC)
    rhs = report.grammar.productions[0].rhs
    from gramconv.grammar import VALUE_INT, VALUE_STR
    assert rhs == seq(VALUE_STR, VALUE_INT, n("b"))


def test_recover_fl_master(fl_master, data_dir):
    text = (data_dir / "fl_master.ebnf").read_text(encoding="utf-8")
    edd = parse_spec((data_dir / "factorial.edd").read_text(encoding="utf-8"))
    report = recover(text, edd)
    assert report.grammar == fl_master
    assert {prod.lhs for prod in report.grammar.productions} == \
        vocabulary(report.grammar).defined


def test_defined_names_equal_lhs_set_in_text(data_dir):
    text = "a ::= b ; b ::= c d ; b ::= e ;"
    report = recover(text, BASIC)
    assert vocabulary(report.grammar).defined == {"a", "b"}


def test_vertical_redefinition_heuristic():
    report = recover("a ::= b ; a ::= c ;", BASIC)
    assert len(report.grammar.productions) == 2
    assert any(e.name == "vertical-redefinition" for e in report.heuristics)


def test_undefined_nonterminal_heuristic_keeps_name():
    report = recover("a ::= mystery ;", BASIC)
    assert report.grammar.productions[0].rhs == n("mystery")
    assert any(e.name == "undefined-nonterminal" for e in report.heuristics)
    assert any("mystery" in message for _, message in report.warnings)


def test_stray_terminator_heuristic():
    report = recover("; a ::= b ;; ", BASIC)
    assert len(report.grammar.productions) == 1
    assert any(e.name == "stray-terminator" for e in report.heuristics)


def test_unbalanced_group_reports_line():
    with pytest.raises(RecoveryError) as err:
        recover("a ::= b ;\nq ::= ( c ;", BASIC)
    assert err.value.line == 2


def test_dangling_defining_symbol():
    with pytest.raises(RecoveryError):
        recover("::= b ;", BASIC)


def test_newline_terminated_rules_without_terminator():
    colon = spec({"defining": ":"})
    report = recover("a : b c\nd : e\n", colon)
    assert [prod.lhs for prod in report.grammar.productions] == ["a", "d"]
    assert report.grammar.productions[0].rhs == seq(n("b"), n("c"))


def test_rule_may_span_lines_without_terminator():
    colon = spec({"defining": ":"})
    report = recover("a : b\n  c d\ne : f\n", colon)
    assert report.grammar.productions[0].rhs == seq(n("b"), n("c"), n("d"))
    assert len(report.grammar.productions) == 2


def test_comments_and_nonterminal_brackets():
    bnf = spec({"defining": "::=", "nonterminal-start": "<", "nonterminal-end": ">",
                "line-comment-start": "//"})
    report = recover("// intro\n<a> ::= <b> <c>\n", bnf)
    assert report.grammar.productions[0] == p("a", seq(n("b"), n("c")))


def test_concatenation_lexeme_is_honored():
    iso = spec({"defining": "=", "terminator": ";", "concatenation": ","})
    report = recover("a = b , c ;", iso)
    assert report.grammar.productions[0].rhs == seq(n("b"), n("c"))


def test_recovery_total_on_unknown_words():
    text = "a ::= frobnicate quux99 zz-top ;"
    report = recover(text, BASIC)
    assert len(report.grammar.productions) == 1


def test_recovery_total_on_wordy_well_bracketed_fuzz():
    # arbitrary word soup with balanced brackets never aborts; only
    # structural defects do
    rng = random.Random(71)
    words = ["alpha", "beta9", "x-y", "str", "int", "zz_1"]
    for _ in range(120):
        pieces = []
        for _ in range(rng.randint(1, 12)):
            roll = rng.random()
            if roll < 0.7:
                pieces.append(rng.choice(words))
            elif roll < 0.8:
                pieces.append(rng.choice(words) + rng.choice("+*?"))
            elif roll < 0.9:
                pieces.append("( " + " ".join(rng.choices(words, k=2)) + " )")
            else:
                pieces.append("|")
        text = f"{rng.choice(words)} ::= {' '.join(pieces)} ;"
        report = recover(text, BASIC)
        assert report.grammar.productions


def test_recovery_roots_are_tops():
    report = recover("a ::= b ; b ::= c ; d ::= b ;", BASIC)
    assert report.grammar.roots == ("a", "d")


def test_unparse_fl_master_roundtrips(fl_master, data_dir):
    edd = parse_spec((data_dir / "factorial.edd").read_text(encoding="utf-8"))
    text = unparse(fl_master, edd)
    assert len(text.strip().splitlines()) == 10
    assert recover(text, edd).grammar == fl_master


def test_unparse_empty_grammar():
    assert unparse(Grammar((), ()), BASIC) == ""


def test_unparse_missing_role_listed():
    g = Grammar((), (p("a", sepplus(n("b"), t(","))),))
    with pytest.raises(UnparseError) as err:
        unparse(g, BASIC)
    assert "seplist-plus" in err.value.missing
    assert "terminal-start-quote" in err.value.missing


def test_unparse_inserts_grouping():
    g = Grammar(("a",), (p("a", star(seq(n("b"), n("c")))),))
    text = unparse(g, BASIC)
    assert "(" in text
    assert recover(text, BASIC).grammar == g


def test_unparse_option_postfix_and_brackets(data_dir):
    g = Grammar(("a",), (p("a", seq(n("b"), opt(n("c")))),))
    ref = reference_spec(data_dir)
    assert recover(unparse(g, ref), ref).grammar == g
    brackets = spec({"defining": "::=", "terminator": ";",
                     "option-start": "[", "option-end": "]"})
    text = unparse(g, brackets)
    assert "[" in text
    assert recover(text, brackets).grammar == g


def test_roundtrip_random_sample(data_dir):
    ref = reference_spec(data_dir)
    rng = random.Random(41)
    for _ in range(100):
        g = random_expressible(rng)
        assert recover(unparse(g, ref), ref).grammar == g
