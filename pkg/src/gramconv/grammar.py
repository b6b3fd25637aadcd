"""Core grammar model: an expression algebra over terminals, nonterminals and
built-in values, plus the grammar container and its basic analyses.

A grammar is an ordered list of production rules over ordered roots.  Several
rules may share a left-hand side (vertical style); a horizontal definition is
a single rule whose right-hand side is a Choice.  All values are immutable and
hashable; every operation in this package is a pure function over them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


class GrammarError(ValueError):
    """Raised when a grammar value would violate a structural invariant."""


# --------------------------------------------------------------------------
# Expression variants


class Expr:
    """Base class of all grammar expressions."""

    __slots__ = ()


@dataclass(frozen=True)
class Epsilon(Expr):
    """The empty string."""


@dataclass(frozen=True)
class Empty(Expr):
    """The empty language (no derivation at all)."""


@dataclass(frozen=True)
class Anything(Expr):
    """A wildcard standing for an arbitrary, unconstrained subtree."""


@dataclass(frozen=True)
class ValueStr(Expr):
    """Built-in string value; participates in signatures under the name 'str'."""


@dataclass(frozen=True)
class ValueInt(Expr):
    """Built-in integer value; participates in signatures under the name 'int'."""


@dataclass(frozen=True)
class Terminal(Expr):
    text: str

    def __post_init__(self) -> None:
        if not self.text:
            raise GrammarError("terminal text must be non-empty")


@dataclass(frozen=True)
class Nonterminal(Expr):
    name: str

    def __post_init__(self) -> None:
        if not self.name:
            raise GrammarError("nonterminal name must be non-empty")


@dataclass(frozen=True)
class Selectable(Expr):
    """A named subexpression (a selector attached to a body)."""

    selector: str
    body: Expr


@dataclass(frozen=True)
class Sequence(Expr):
    parts: tuple[Expr, ...]

    def __post_init__(self) -> None:
        if len(self.parts) < 2:
            raise GrammarError("a Sequence needs at least 2 parts; use seq()")
        if any(isinstance(p, Sequence) for p in self.parts):
            raise GrammarError("nested Sequence must be flattened; use seq()")


@dataclass(frozen=True)
class Choice(Expr):
    alternatives: tuple[Expr, ...]

    def __post_init__(self) -> None:
        if len(self.alternatives) < 2:
            raise GrammarError("a Choice needs at least 2 alternatives; use choice()")
        if any(isinstance(a, Choice) for a in self.alternatives):
            raise GrammarError("nested Choice must be flattened; use choice()")


@dataclass(frozen=True)
class Optional(Expr):
    body: Expr


@dataclass(frozen=True)
class Star(Expr):
    body: Expr


@dataclass(frozen=True)
class Plus(Expr):
    body: Expr


@dataclass(frozen=True)
class SepListStar(Expr):
    """Possibly empty separator list: items separated by a separator."""

    item: Expr
    separator: Expr


@dataclass(frozen=True)
class SepListPlus(Expr):
    """Non-empty separator list: one or more items separated by a separator."""

    item: Expr
    separator: Expr


EPSILON = Epsilon()
EMPTY = Empty()
ANYTHING = Anything()
VALUE_STR = ValueStr()
VALUE_INT = ValueInt()

#: Reserved names under which built-in values take part in recovery,
#: signatures and nominal mappings.
VALUE_NAMES = {"str": VALUE_STR, "int": VALUE_INT}


# --------------------------------------------------------------------------
# Smart constructors.  These produce the canonical form of an expression:
# sequences and choices are flattened, unit elements are dropped, and
# degenerate arities collapse (0-ary sequence is epsilon, 0-ary choice is the
# empty language, 1-ary either is the child itself).  Canonical forms make
# structural equality meaningful.


def t(text: str) -> Terminal:
    return Terminal(text)


def n(name: str) -> Nonterminal:
    return Nonterminal(name)


def seq(*parts: Expr) -> Expr:
    flat: list[Expr] = []
    for part in parts:
        if isinstance(part, Sequence):
            flat.extend(part.parts)
        elif isinstance(part, Epsilon):
            continue  # epsilon is the unit of concatenation
        else:
            flat.append(part)
    if not flat:
        return EPSILON
    if len(flat) == 1:
        return flat[0]
    return Sequence(tuple(flat))


def choice(*alternatives: Expr) -> Expr:
    flat: list[Expr] = []
    for alt in alternatives:
        if isinstance(alt, Choice):
            flat.extend(alt.alternatives)
        elif isinstance(alt, Empty):
            continue  # the empty language is the unit of alternation
        else:
            flat.append(alt)
    if not flat:
        return EMPTY
    if len(flat) == 1:
        return flat[0]
    return Choice(tuple(flat))


def opt(body: Expr) -> Optional:
    return Optional(body)


def star(body: Expr) -> Star:
    return Star(body)


def plus(body: Expr) -> Plus:
    return Plus(body)


def sel(selector: str, body: Expr) -> Selectable:
    return Selectable(selector, body)


def sepstar(item: Expr, separator: Expr) -> SepListStar:
    return SepListStar(item, separator)


def sepplus(item: Expr, separator: Expr) -> SepListPlus:
    return SepListPlus(item, separator)


# --------------------------------------------------------------------------
# Productions and grammars


@dataclass(frozen=True)
class Production:
    lhs: str
    rhs: Expr
    label: str | None = None

    def __post_init__(self) -> None:
        if not self.lhs:
            raise GrammarError("production left-hand side must be non-empty")


def p(lhs: str, rhs: Expr, label: str | None = None) -> Production:
    return Production(lhs, rhs, label)


@dataclass(frozen=True)
class Grammar:
    roots: tuple[str, ...] = ()
    productions: tuple[Production, ...] = ()

    def __post_init__(self) -> None:
        voc = vocabulary(self)
        known = voc.defined | voc.used
        for root in self.roots:
            if root not in known:
                raise GrammarError(f"declared root {root!r} is neither defined nor used")

    def rules_of(self, name: str) -> tuple[Production, ...]:
        return tuple(prod for prod in self.productions if prod.lhs == name)


def grammar(roots, productions) -> Grammar:
    return Grammar(tuple(roots), tuple(productions))


@dataclass(frozen=True)
class Vocabulary:
    defined: frozenset[str]
    used: frozenset[str]
    terminals: frozenset[str]


# --------------------------------------------------------------------------
# Tree walks


def subterms(expr: Expr):
    """Yield expr and all its subexpressions, pre-order."""
    yield expr
    if isinstance(expr, Selectable):
        yield from subterms(expr.body)
    elif isinstance(expr, Sequence):
        for part in expr.parts:
            yield from subterms(part)
    elif isinstance(expr, Choice):
        for alt in expr.alternatives:
            yield from subterms(alt)
    elif isinstance(expr, (Optional, Star, Plus)):
        yield from subterms(expr.body)
    elif isinstance(expr, (SepListStar, SepListPlus)):
        yield from subterms(expr.item)
        yield from subterms(expr.separator)


def rebuild(expr: Expr, fn) -> Expr:
    """Rebuild expr bottom-up, applying fn to every node after its children
    have been rebuilt.  Composite nodes are reassembled with the smart
    constructors, so fn may return epsilon/empty to delete a node and the
    surrounding structure renormalizes."""
    if isinstance(expr, Selectable):
        out: Expr = sel(expr.selector, rebuild(expr.body, fn))
    elif isinstance(expr, Sequence):
        out = seq(*(rebuild(part, fn) for part in expr.parts))
    elif isinstance(expr, Choice):
        out = choice(*(rebuild(alt, fn) for alt in expr.alternatives))
    elif isinstance(expr, Optional):
        out = opt(rebuild(expr.body, fn))
    elif isinstance(expr, Star):
        out = star(rebuild(expr.body, fn))
    elif isinstance(expr, Plus):
        out = plus(rebuild(expr.body, fn))
    elif isinstance(expr, SepListStar):
        out = sepstar(rebuild(expr.item, fn), rebuild(expr.separator, fn))
    elif isinstance(expr, SepListPlus):
        out = sepplus(rebuild(expr.item, fn), rebuild(expr.separator, fn))
    else:
        out = expr
    return fn(out)


def replace_subterm(expr: Expr, old: Expr, new: Expr) -> Expr:
    """Replace every occurrence of the whole subterm `old` with `new`,
    top-down (matched nodes are not descended into)."""
    if expr == old:
        return new
    if isinstance(expr, Selectable):
        return sel(expr.selector, replace_subterm(expr.body, old, new))
    if isinstance(expr, Sequence):
        return seq(*(replace_subterm(part, old, new) for part in expr.parts))
    if isinstance(expr, Choice):
        return choice(*(replace_subterm(alt, old, new) for alt in expr.alternatives))
    if isinstance(expr, Optional):
        return opt(replace_subterm(expr.body, old, new))
    if isinstance(expr, Star):
        return star(replace_subterm(expr.body, old, new))
    if isinstance(expr, Plus):
        return plus(replace_subterm(expr.body, old, new))
    if isinstance(expr, SepListStar):
        return sepstar(replace_subterm(expr.item, old, new),
                       replace_subterm(expr.separator, old, new))
    if isinstance(expr, SepListPlus):
        return sepplus(replace_subterm(expr.item, old, new),
                       replace_subterm(expr.separator, old, new))
    return expr


def rename_expr(expr: Expr, mapping: dict[str, str]) -> Expr:
    """Rename nonterminal occurrences according to mapping (values untouched)."""
    def step(node: Expr) -> Expr:
        if isinstance(node, Nonterminal) and node.name in mapping:
            return Nonterminal(mapping[node.name])
        return node
    return rebuild(expr, step)


def expr_names(expr: Expr) -> list[str]:
    """Nonterminal names occurring in expr, in first-occurrence order."""
    seen: dict[str, None] = {}
    for sub in subterms(expr):
        if isinstance(sub, Nonterminal) and sub.name not in seen:
            seen[sub.name] = None
    return list(seen)


# --------------------------------------------------------------------------
# Analyses


def vocabulary(g: Grammar) -> Vocabulary:
    defined = []
    used: dict[str, None] = {}
    terminals: dict[str, None] = {}
    for prod in g.productions:
        defined.append(prod.lhs)
        for sub in subterms(prod.rhs):
            if isinstance(sub, Nonterminal):
                used.setdefault(sub.name)
            elif isinstance(sub, Terminal):
                terminals.setdefault(sub.text)
    return Vocabulary(frozenset(defined), frozenset(used), frozenset(terminals))


def tops(g: Grammar) -> set[str]:
    """Nonterminals defined in the grammar but never used: root candidates."""
    voc = vocabulary(g)
    return set(voc.defined - voc.used)


def reachable(g: Grammar, from_names) -> set[str]:
    """Transitive closure of the nonterminal-use relation, including the
    starting names themselves."""
    result: set[str] = set()
    work = list(from_names)
    rules: dict[str, list[Production]] = {}
    for prod in g.productions:
        rules.setdefault(prod.lhs, []).append(prod)
    while work:
        name = work.pop()
        if name in result:
            continue
        result.add(name)
        for prod in rules.get(name, ()):
            for ref in expr_names(prod.rhs):
                if ref not in result:
                    work.append(ref)
    return result


# --------------------------------------------------------------------------
# Rendering.  Two styles are used throughout the package: a compact EBNF-ish
# infix style for diagnostics, and a prefix term style for reports that lay
# one production against another.

_BARE_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_-]*$")


def render_expr(expr: Expr) -> str:
    """Compact infix rendering (diagnostics only; see recovery.unparse for
    notation-faithful output)."""
    return _render(expr, 0)


def _render(expr: Expr, prec: int) -> str:
    # prec levels: 0 choice, 1 sequence, 2 postfix operand
    if isinstance(expr, Epsilon):
        return "ε"
    if isinstance(expr, Empty):
        return "φ"
    if isinstance(expr, Anything):
        return "α"
    if isinstance(expr, ValueStr):
        return "str"
    if isinstance(expr, ValueInt):
        return "int"
    if isinstance(expr, Terminal):
        return f'"{expr.text}"'
    if isinstance(expr, Nonterminal):
        return expr.name
    if isinstance(expr, Selectable):
        return f"{expr.selector}::{_render(expr.body, 2)}"
    if isinstance(expr, Sequence):
        body = " ".join(_render(part, 2) for part in expr.parts)
        return f"({body})" if prec > 1 else body
    if isinstance(expr, Choice):
        body = " | ".join(_render(alt, 1) for alt in expr.alternatives)
        return f"({body})" if prec > 0 else body
    if isinstance(expr, Optional):
        return _render(expr.body, 2) + "?"
    if isinstance(expr, Star):
        return _render(expr.body, 2) + "*"
    if isinstance(expr, Plus):
        return _render(expr.body, 2) + "+"
    if isinstance(expr, SepListStar):
        return "{" + _render(expr.item, 2) + " " + _render(expr.separator, 2) + "}*"
    if isinstance(expr, SepListPlus):
        return "{" + _render(expr.item, 2) + " " + _render(expr.separator, 2) + "}+"
    raise TypeError(f"not an expression: {expr!r}")


def render_term(expr: Expr) -> str:
    """Prefix term rendering, used by match reports."""
    if isinstance(expr, Epsilon):
        return "epsilon"
    if isinstance(expr, Empty):
        return "empty"
    if isinstance(expr, Anything):
        return "any"
    if isinstance(expr, ValueStr):
        return "str"
    if isinstance(expr, ValueInt):
        return "int"
    if isinstance(expr, Terminal):
        return f'"{expr.text}"'
    if isinstance(expr, Nonterminal):
        return expr.name
    if isinstance(expr, Selectable):
        return f"sel({expr.selector}, {render_term(expr.body)})"
    if isinstance(expr, Sequence):
        return "seq([" + ", ".join(render_term(part) for part in expr.parts) + "])"
    if isinstance(expr, Choice):
        return "choice([" + ", ".join(render_term(a) for a in expr.alternatives) + "])"
    if isinstance(expr, Optional):
        return f"?({render_term(expr.body)})"
    if isinstance(expr, Star):
        return f"*({render_term(expr.body)})"
    if isinstance(expr, Plus):
        return f"+({render_term(expr.body)})"
    if isinstance(expr, SepListStar):
        return f"sepstar({render_term(expr.item)}, {render_term(expr.separator)})"
    if isinstance(expr, SepListPlus):
        return f"sepplus({render_term(expr.item)}, {render_term(expr.separator)})"
    raise TypeError(f"not an expression: {expr!r}")


def render_production(prod: Production) -> str:
    label = prod.label or ""
    return f"p('{label}', {prod.lhs}, {render_term(prod.rhs)})"
