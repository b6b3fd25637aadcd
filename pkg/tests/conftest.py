"""Shared fixtures: the factorial-language master grammar, the object-model
grammar a data-binding tool derives from its XML schema, and the expected
normalized form of the latter."""

from __future__ import annotations

from pathlib import Path

import pytest

from gramconv.grammar import (
    VALUE_INT,
    VALUE_STR,
    Grammar,
    choice,
    n,
    p,
    plus,
    sel,
    seq,
    star,
)
from gramconv.transform import rename_nonterminal

DATA = Path(__file__).parent / "data"


def fl_master_grammar() -> Grammar:
    """Hand-written master grammar of the factorial language, ten rules."""
    return Grammar(("program",), (
        p("program", plus(n("function"))),
        p("function", seq(VALUE_STR, plus(VALUE_STR), n("expr"))),
        p("expr", VALUE_STR),
        p("expr", VALUE_INT),
        p("expr", n("apply")),
        p("expr", n("binary")),
        p("expr", n("cond")),
        p("apply", seq(VALUE_STR, plus(n("expr")))),
        p("binary", seq(n("expr"), n("operator"), n("expr"))),
        p("cond", seq(n("expr"), n("expr"), n("expr"))),
    ))


def fl_master_abstract_grammar() -> Grammar:
    """The same master with spelled-out nonterminal names, as used when
    converging against the object-model grammar."""
    g = fl_master_grammar()
    g = rename_nonterminal(g, "expr", "expression")
    return rename_nonterminal(g, "cond", "conditional")


def jaxb_model_grammar() -> Grammar:
    """Object model generated from the factorial-language XML schema by a
    data-binding framework, read as a grammar: one class per complex type
    (alphabetical), field names as selectors, repeated fields as stars, the
    expression alternatives inlined as anonymous structures, and the operator
    enumeration left opaque."""
    return Grammar(("Program",), (
        p("Expr", choice(
            sel("apply", seq(sel("name", VALUE_STR), sel("arg", star(n("Expr"))))),
            sel("argument", VALUE_STR),
            sel("binary", seq(sel("ops", n("Ops")), sel("left", n("Expr")),
                              sel("right", n("Expr")))),
            sel("cond", seq(sel("ifExpr", n("Expr")), sel("thenExpr", n("Expr")),
                            sel("elseExpr", n("Expr")))),
            sel("literal", VALUE_INT),
        )),
        p("Function", seq(sel("name", VALUE_STR), sel("arg", star(VALUE_STR)),
                          sel("rhs", n("Expr")))),
        p("Program", sel("function", star(n("Function")))),
    ))


def jaxb_anf_grammar() -> Grammar:
    """The normalized form of the object-model grammar, ten rules."""
    return Grammar(("Program",), (
        p("Expr", n("Expr_1")),
        p("Expr", VALUE_STR),
        p("Expr", n("Expr_2")),
        p("Expr", n("Expr_3")),
        p("Expr", VALUE_INT),
        p("Function", seq(VALUE_STR, star(VALUE_STR), n("Expr"))),
        p("Program", star(n("Function"))),
        p("Expr_1", seq(VALUE_STR, star(n("Expr")))),
        p("Expr_2", seq(n("Ops"), n("Expr"), n("Expr"))),
        p("Expr_3", seq(n("Expr"), n("Expr"), n("Expr"))),
    ))


#: The expected name correspondence between the two grammars.
FL_MAPPING = {
    "Expr_2": "binary",
    "Expr_3": "conditional",
    "int": "int",
    "Function": "function",
    "str": "str",
    "Program": "program",
    "Expr": "expression",
    "Expr_1": "apply",
    "Ops": "operator",
}


@pytest.fixture
def fl_master() -> Grammar:
    return fl_master_grammar()


@pytest.fixture
def fl_master_abstract() -> Grammar:
    return fl_master_abstract_grammar()


@pytest.fixture
def jaxb_model() -> Grammar:
    return jaxb_model_grammar()


@pytest.fixture
def jaxb_anf() -> Grammar:
    return jaxb_anf_grammar()


@pytest.fixture
def data_dir() -> Path:
    return DATA
