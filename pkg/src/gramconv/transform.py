"""Programmable grammar transformation operators and their bidirectional
pairing.

The public operator suite: rename / extract / inline / chain / unchain /
vertical / horizontal / factor / distribute / deyaccify / yaccify.  Every
operator is a pure function Grammar -> Grammar that raises TransformError
when its applicability precondition fails.

A transformation script is a list of TransformStep records applied left to
right; on the first violated precondition the whole script fails atomically
(the error carries the untouched input grammar).  Scripts serialize to JSON
as [{"op": name, "args": {...}}, ...] with embedded expressions in the
grammar interchange encoding.

`bidirectionalize` pairs a step with its inverse.  Steps whose inverse
depends on the grammar (inline, unchain, distribute, deyaccify, and the
low-level editing steps) carry recorded operands — the body, style or
previous value captured when the step was built; without the recording such
a step cannot be inverted.  The inverse laws hold on each operator's
bidirectional domain: rule blocks of one nonterminal are adjacent; an
inlined definition is unlabeled, used at least once, and its body neither
occurs literally elsewhere nor fuses into the surrounding node (a sequence
spliced into a sequence, an epsilon vanishing from one); rules merged by
horizontal are unlabeled unless their label came from a selector; a choice
split by vertical carries no label of its own.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .grammar import (
    EPSILON,
    Choice,
    Epsilon,
    Expr,
    Grammar,
    GrammarError,
    Nonterminal,
    Optional,
    Plus,
    Production,
    Selectable,
    SepListPlus,
    SepListStar,
    Sequence,
    Star,
    choice,
    expr_names,
    opt,
    plus,
    render_expr,
    rename_expr,
    replace_subterm,
    sel,
    sepplus,
    sepstar,
    seq,
    star,
    subterms,
    vocabulary,
)
from .interchange import expr_from_json, expr_to_json


class TransformError(ValueError):
    pass


@dataclass
class TransformStep:
    op: str
    args: dict = field(default_factory=dict)


@dataclass
class BidirectionalStep:
    forward: TransformStep
    backward: TransformStep


class ScriptError(TransformError):
    """A script step failed; the input grammar is carried along unmodified."""

    def __init__(self, index: int, step: TransformStep, reason: str, grammar: Grammar):
        super().__init__(f"step {index} ({step.op}): {reason}")
        self.index = index
        self.step = step
        self.reason = reason
        self.grammar = grammar


# --------------------------------------------------------------------------
# helpers


def _names(g: Grammar) -> set[str]:
    voc = vocabulary(g)
    return set(voc.defined | voc.used)


def _rule_positions(g: Grammar, name: str) -> list[int]:
    return [i for i, prod in enumerate(g.productions) if prod.lhs == name]


def _with_productions(g: Grammar, productions) -> Grammar:
    try:
        return Grammar(g.roots, tuple(productions))
    except GrammarError as exc:
        raise TransformError(str(exc)) from exc


def fresh_name(base: str, taken: set[str]) -> str:
    """base + '_k' with the smallest k >= 1 that avoids a collision."""
    k = 1
    while f"{base}_{k}" in taken:
        k += 1
    return f"{base}_{k}"


# --------------------------------------------------------------------------
# renaming


def rename_nonterminal(g: Grammar, x: str, y: str) -> Grammar:
    """Replace every occurrence of nonterminal x (defining and applied) by y;
    roots follow."""
    names = _names(g)
    if x not in names:
        raise TransformError(f"rename: nonterminal {x!r} does not occur")
    if y in names:
        raise TransformError(f"rename: nonterminal {y!r} is already present")
    roots = tuple(y if r == x else r for r in g.roots)
    prods = tuple(
        Production(y if prod.lhs == x else prod.lhs,
                   rename_expr(prod.rhs, {x: y}), prod.label)
        for prod in g.productions)
    return Grammar(roots, prods)


# --------------------------------------------------------------------------
# extract / inline


def extract(g: Grammar, name: str, expr: Expr, scope: str | None = None,
            index: int | None = None) -> Grammar:
    """Fold every occurrence of expr to the fresh nonterminal `name`, adding
    the defining rule name -> expr.  With `scope`, only rules of that
    nonterminal are rewritten.  Occurrences are whole-node structural matches.
    """
    if name in _names(g):
        raise TransformError(f"extract: {name!r} is not fresh")
    hit = False
    out: list[Production] = []
    for prod in g.productions:
        if scope is not None and prod.lhs != scope:
            out.append(prod)
            continue
        if any(sub == expr for sub in subterms(prod.rhs)):
            hit = True
            out.append(Production(prod.lhs,
                                  replace_subterm(prod.rhs, expr, Nonterminal(name)),
                                  prod.label))
        else:
            out.append(prod)
    if not hit:
        where = f" in rules of {scope!r}" if scope else ""
        raise TransformError(f"extract: {render_expr(expr)} does not occur{where}")
    at = len(out) if index is None else index
    out.insert(at, Production(name, expr))
    return _with_productions(g, out)


def inline(g: Grammar, name: str) -> Grammar:
    """Substitute the sole definition of `name` for each of its uses and drop
    the defining rule."""
    positions = _rule_positions(g, name)
    if len(positions) != 1:
        raise TransformError(
            f"inline: {name!r} must be defined by exactly one rule, has {len(positions)}")
    if name in g.roots:
        raise TransformError(f"inline: {name!r} is a root")
    body = g.productions[positions[0]].rhs
    if name in expr_names(body):
        raise TransformError(f"inline: {name!r} is self-referential")
    out = [
        Production(prod.lhs,
                   replace_subterm(prod.rhs, Nonterminal(name), body),
                   prod.label)
        for i, prod in enumerate(g.productions) if i != positions[0]
    ]
    return _with_productions(g, out)


# --------------------------------------------------------------------------
# chain / unchain


def chain(g: Grammar, production: Production, target: Expr | None = None,
          index: int | None = None) -> Grammar:
    """Given production a -> f with fresh nonterminal f, replace an existing
    rule a -> e by a -> f and add f -> e.  When a has several rules, `target`
    selects e explicitly."""
    if not isinstance(production.rhs, Nonterminal):
        raise TransformError("chain: the introduced rhs must be a bare nonterminal")
    fresh = production.rhs.name
    if fresh in _names(g):
        raise TransformError(f"chain: {fresh!r} is not fresh")
    lhs = production.lhs
    positions = _rule_positions(g, lhs)
    if not positions:
        raise TransformError(f"chain: {lhs!r} is not defined")
    if target is None:
        if len(positions) != 1:
            raise TransformError(
                f"chain: {lhs!r} has {len(positions)} rules; pass the target rhs")
        at = positions[0]
    else:
        hits = [i for i in positions if g.productions[i].rhs == target]
        if not hits:
            raise TransformError(f"chain: no rule {lhs} -> {render_expr(target)}")
        at = hits[0]
    old = g.productions[at]
    out = list(g.productions)
    out[at] = Production(lhs, Nonterminal(fresh), old.label)
    out.insert(at + 1 if index is None else index, Production(fresh, old.rhs))
    return _with_productions(g, out)


def unchain(g: Grammar, name: str) -> Grammar:
    """Reverse a chain: `name` is defined once, used exactly once, and that
    use is the entire rhs of some rule."""
    positions = _rule_positions(g, name)
    if len(positions) != 1:
        raise TransformError(
            f"unchain: {name!r} must be defined by exactly one rule, has {len(positions)}")
    if name in g.roots:
        raise TransformError(f"unchain: {name!r} is a root")
    body = g.productions[positions[0]].rhs
    if name in expr_names(body):
        raise TransformError(f"unchain: {name!r} is self-referential")
    uses = []
    for i, prod in enumerate(g.productions):
        if i == positions[0]:
            continue
        uses.extend((i, sub) for sub in subterms(prod.rhs)
                    if sub == Nonterminal(name))
    if len(uses) != 1:
        raise TransformError(f"unchain: {name!r} is used {len(uses)} times, not once")
    use_at = uses[0][0]
    if g.productions[use_at].rhs != Nonterminal(name):
        raise TransformError(f"unchain: the use of {name!r} is not a whole rule body")
    out = []
    for i, prod in enumerate(g.productions):
        if i == positions[0]:
            continue
        if i == use_at:
            out.append(Production(prod.lhs, body, prod.label))
        else:
            out.append(prod)
    return _with_productions(g, out)


# --------------------------------------------------------------------------
# vertical / horizontal

# Labels and top-level selectors trade places across this pair: a labeled
# alternative p(l, a, e) becomes the selectable branch l::e of the merged
# choice, and vertical turns such branches back into labels.


def vertical(g: Grammar, name: str) -> Grammar:
    positions = _rule_positions(g, name)
    if len(positions) != 1:
        raise TransformError(f"vertical: {name!r} must be defined by exactly one rule")
    at = positions[0]
    rhs = g.productions[at].rhs
    if not isinstance(rhs, Choice):
        raise TransformError(f"vertical: rhs of {name!r} is not a choice")
    pieces = []
    for alt in rhs.alternatives:
        if isinstance(alt, Selectable):
            pieces.append(Production(name, alt.body, alt.selector))
        else:
            pieces.append(Production(name, alt))
    out = list(g.productions)
    out[at:at + 1] = pieces
    return _with_productions(g, out)


def horizontal(g: Grammar, name: str) -> Grammar:
    positions = _rule_positions(g, name)
    if len(positions) < 2:
        raise TransformError(f"horizontal: {name!r} must be defined by at least two rules")
    alts = []
    for i in positions:
        prod = g.productions[i]
        alts.append(sel(prod.label, prod.rhs) if prod.label else prod.rhs)
    merged = choice(*alts)
    out = [prod for i, prod in enumerate(g.productions) if i not in positions[1:]]
    out[positions[0]] = Production(name, merged)
    return _with_productions(g, out)


# --------------------------------------------------------------------------
# factor / distribute


def dnf(expr: Expr, _cap: int = 4096) -> Expr:
    """Fully distribute sequences over choices, everywhere in the tree."""
    if isinstance(expr, Selectable):
        return sel(expr.selector, dnf(expr.body))
    if isinstance(expr, Optional):
        return opt(dnf(expr.body))
    if isinstance(expr, Star):
        return star(dnf(expr.body))
    if isinstance(expr, Plus):
        return plus(dnf(expr.body))
    if isinstance(expr, SepListStar):
        return sepstar(dnf(expr.item), dnf(expr.separator))
    if isinstance(expr, SepListPlus):
        return sepplus(dnf(expr.item), dnf(expr.separator))
    if isinstance(expr, Choice):
        return choice(*(dnf(alt) for alt in expr.alternatives))
    if isinstance(expr, Sequence):
        factors = []
        total = 1
        for part in expr.parts:
            normal = dnf(part)
            alts = list(normal.alternatives) if isinstance(normal, Choice) else [normal]
            total *= len(alts)
            if total > _cap:
                raise TransformError("distribute: expansion is too large")
            factors.append(alts)
        combos = [seq(*combo) for combo in itertools.product(*factors)]
        return choice(*combos)
    return expr


def factor(g: Grammar, name: str, from_expr: Expr, to_expr: Expr) -> Grammar:
    """Rewrite from_expr to to_expr inside the rules of `name`; the operands
    must be equivalent under distribution of sequence over choice."""
    if dnf(from_expr) != dnf(to_expr):
        raise TransformError("factor: operands are not equivalent by distribution")
    positions = _rule_positions(g, name)
    if not positions:
        raise TransformError(f"factor: {name!r} is not defined")
    out = list(g.productions)
    hit = False
    for i in positions:
        prod = out[i]
        if any(sub == from_expr for sub in subterms(prod.rhs)):
            hit = True
            out[i] = Production(prod.lhs,
                                replace_subterm(prod.rhs, from_expr, to_expr),
                                prod.label)
    if not hit:
        raise TransformError(
            f"factor: {render_expr(from_expr)} does not occur in rules of {name!r}")
    return _with_productions(g, out)


def distribute(g: Grammar, name: str) -> Grammar:
    """Surface the inner choices of `name`'s rules into top-level choices of
    choice-free sequences (pure distribution; choices under repetition stay)."""
    positions = _rule_positions(g, name)
    if not positions:
        raise TransformError(f"distribute: {name!r} is not defined")
    out = list(g.productions)
    hit = False
    for i in positions:
        prod = out[i]
        expanded = dnf(prod.rhs)
        if expanded != prod.rhs:
            hit = True
            out[i] = Production(prod.lhs, expanded, prod.label)
    if not hit:
        raise TransformError(f"distribute: no inner choice to surface in {name!r}")
    return _with_productions(g, out)


# --------------------------------------------------------------------------
# deyaccify / yaccify


def detect_yaccified(g: Grammar, name: str):
    """Return (style, base, step) when `name` is defined by a recursive
    base/step rule pair, else None.  style is 'left' or 'right' by the side
    the recursion sits on."""
    positions = _rule_positions(g, name)
    if len(positions) != 2:
        return None
    me = Nonterminal(name)
    for base_at, rec_at in ((0, 1), (1, 0)):
        base = g.productions[positions[base_at]].rhs
        rec = g.productions[positions[rec_at]].rhs
        if name in expr_names(base) or not isinstance(rec, Sequence):
            continue
        if sum(1 for sub in subterms(rec) if sub == me) != 1:
            continue
        if rec.parts[0] == me:
            return "left", base, seq(*rec.parts[1:])
        if rec.parts[-1] == me:
            return "right", base, seq(*rec.parts[:-1])
    return None


def deyaccify(g: Grammar, name: str, style: str | None = None) -> Grammar:
    """Replace an explicitly recursive base/step rule pair by iteration:
    {A -> B; A -> A B} becomes A -> B+, and with step C != B the pair becomes
    A -> B C* (left) or A -> C* B (right)."""
    found = detect_yaccified(g, name)
    if found is None:
        raise TransformError(f"deyaccify: {name!r} is not yaccified")
    detected, base, step = found
    if style is not None and style != detected:
        raise TransformError(
            f"deyaccify: {name!r} is {detected}-recursive, not {style}-recursive")
    if step == base:
        rhs: Expr = plus(base)
    elif detected == "left":
        rhs = seq(base, star(step))
    else:
        rhs = seq(star(step), base)
    positions = _rule_positions(g, name)
    out = [prod for i, prod in enumerate(g.productions) if i != positions[1]]
    out[positions[0]] = Production(name, rhs)
    return _with_productions(g, out)


def yaccify(g: Grammar, name: str, style: str) -> Grammar:
    """Inverse of deyaccify: re-encode iteration as a recursive rule pair of
    the requested recursion style."""
    if style not in ("left", "right"):
        raise TransformError(f"yaccify: unknown style {style!r}")
    positions = _rule_positions(g, name)
    if len(positions) != 1:
        raise TransformError(f"yaccify: {name!r} must be defined by exactly one rule")
    rhs = g.productions[positions[0]].rhs
    if name in expr_names(rhs):
        raise TransformError(f"yaccify: {name!r} is already recursive")
    if isinstance(rhs, Plus):
        base: Expr = rhs.body
        step: Expr = rhs.body
    elif isinstance(rhs, Star):
        base = EPSILON
        step = rhs.body
    elif isinstance(rhs, Sequence) and style == "left" and isinstance(rhs.parts[-1], Star):
        base = seq(*rhs.parts[:-1])
        step = rhs.parts[-1].body
    elif isinstance(rhs, Sequence) and style == "right" and isinstance(rhs.parts[0], Star):
        base = seq(*rhs.parts[1:])
        step = rhs.parts[0].body
    else:
        raise TransformError(
            f"yaccify: rhs of {name!r} is not an iteration of the {style} shape")
    if isinstance(step, Epsilon):
        raise TransformError(f"yaccify: the repeated unit of {name!r} is empty")
    me = Nonterminal(name)
    rec = seq(me, step) if style == "left" else seq(step, me)
    out = list(g.productions)
    out[positions[0]:positions[0] + 1] = [Production(name, base), Production(name, rec)]
    return _with_productions(g, out)


# --------------------------------------------------------------------------
# low-level editing steps (used by mutations and match traces)

_CHILD_CTORS = {
    Selectable: lambda node, kids: sel(node.selector, kids[0]),
    Optional: lambda node, kids: opt(kids[0]),
    Star: lambda node, kids: star(kids[0]),
    Plus: lambda node, kids: plus(kids[0]),
    Sequence: lambda node, kids: seq(*kids),
    Choice: lambda node, kids: choice(*kids),
    SepListStar: lambda node, kids: sepstar(kids[0], kids[1]),
    SepListPlus: lambda node, kids: sepplus(kids[0], kids[1]),
}


def _children(node: Expr) -> list[Expr]:
    if isinstance(node, Selectable):
        return [node.body]
    if isinstance(node, (Optional, Star, Plus)):
        return [node.body]
    if isinstance(node, Sequence):
        return list(node.parts)
    if isinstance(node, Choice):
        return list(node.alternatives)
    if isinstance(node, (SepListStar, SepListPlus)):
        return [node.item, node.separator]
    return []


def _replace_at_path(node: Expr, path: list[int], new: Expr) -> Expr:
    if not path:
        return new
    kids = _children(node)
    head = path[0]
    if not kids or head >= len(kids):
        raise TransformError(f"set-node: path step {head} out of range")
    kids[head] = _replace_at_path(kids[head], path[1:], new)
    return _CHILD_CTORS[type(node)](node, kids)


def _locate(g: Grammar, lhs: str, pos: int) -> int:
    positions = _rule_positions(g, lhs)
    if pos >= len(positions):
        raise TransformError(f"{lhs!r} has no rule #{pos}")
    return positions[pos]


def set_node(g: Grammar, lhs: str, pos: int, path: list[int], expr: Expr) -> Grammar:
    """Replace the subtree at `path` within rule `pos` of `lhs` (path [] is
    the whole rhs)."""
    at = _locate(g, lhs, pos)
    prod = g.productions[at]
    out = list(g.productions)
    out[at] = Production(lhs, _replace_at_path(prod.rhs, list(path), expr), prod.label)
    return _with_productions(g, out)


def set_label(g: Grammar, lhs: str, pos: int, label: str | None) -> Grammar:
    at = _locate(g, lhs, pos)
    prod = g.productions[at]
    out = list(g.productions)
    out[at] = Production(lhs, prod.rhs, label)
    return _with_productions(g, out)


def set_roots(g: Grammar, roots) -> Grammar:
    try:
        return Grammar(tuple(roots), g.productions)
    except GrammarError as exc:
        raise TransformError(str(exc)) from exc


def define(g: Grammar, name: str, rhs: Expr) -> Grammar:
    return _with_productions(g, list(g.productions) + [Production(name, rhs)])


def eliminate(g: Grammar, name: str) -> Grammar:
    """Drop every rule of `name` (used for unreachable definitions)."""
    positions = _rule_positions(g, name)
    if not positions:
        raise TransformError(f"eliminate: {name!r} is not defined")
    out = [prod for prod in g.productions if prod.lhs != name]
    return _with_productions(g, out)


def insert_rule(g: Grammar, lhs: str, pos: int, rhs: Expr,
                label: str | None = None) -> Grammar:
    """Insert a rule into the rule block of `lhs` at local position `pos`
    (appended to the block when pos equals the block size)."""
    positions = _rule_positions(g, lhs)
    if pos > len(positions):
        raise TransformError(f"insert-rule: {lhs!r} has no slot #{pos}")
    if positions:
        at = positions[pos] if pos < len(positions) else positions[-1] + 1
    else:
        at = len(g.productions)
    out = list(g.productions)
    out.insert(at, Production(lhs, rhs, label))
    return _with_productions(g, out)


def remove_rule(g: Grammar, lhs: str, pos: int, rhs: Expr | None = None) -> Grammar:
    """Remove the rule at local position `pos` of `lhs`; when `rhs` is given
    the removed rule must match it."""
    at = _locate(g, lhs, pos)
    if rhs is not None and g.productions[at].rhs != rhs:
        raise TransformError(f"remove-rule: rule #{pos} of {lhs!r} does not match")
    out = [prod for i, prod in enumerate(g.productions) if i != at]
    return _with_productions(g, out)


def permute(g: Grammar, lhs: str, pos: int, order: list[int]) -> Grammar:
    """Reorder the sequence parts of a rule rhs; order[i] is the 1-based
    target position of part i."""
    at = _locate(g, lhs, pos)
    prod = g.productions[at]
    if not isinstance(prod.rhs, Sequence):
        raise TransformError(f"permute: rhs of {lhs!r} rule #{pos} is not a sequence")
    parts = prod.rhs.parts
    if sorted(order) != list(range(1, len(parts) + 1)):
        raise TransformError(f"permute: {order!r} is not a permutation of 1..{len(parts)}")
    new_parts: list[Expr | None] = [None] * len(parts)
    for i, target in enumerate(order):
        new_parts[target - 1] = parts[i]
    out = list(g.productions)
    out[at] = Production(lhs, seq(*new_parts), prod.label)
    return _with_productions(g, out)


# --------------------------------------------------------------------------
# step records, scripts, bidirectionalization


def _arg(step: TransformStep, key: str, required: bool = True):
    if key in step.args:
        return step.args[key]
    if required:
        raise TransformError(f"{step.op}: missing argument {key!r}")
    return None


def apply_step(g: Grammar, step: TransformStep) -> Grammar:
    op = step.op
    if op == "rename":
        return rename_nonterminal(g, _arg(step, "from"), _arg(step, "to"))
    if op == "extract":
        return extract(g, _arg(step, "name"), _arg(step, "expr"),
                       scope=_arg(step, "scope", required=False),
                       index=_arg(step, "index", required=False))
    if op == "inline":
        return inline(g, _arg(step, "name"))
    if op == "chain":
        production = Production(_arg(step, "lhs"), Nonterminal(_arg(step, "name")),
                                _arg(step, "label", required=False))
        return chain(g, production, target=_arg(step, "target", required=False),
                     index=_arg(step, "index", required=False))
    if op == "unchain":
        return unchain(g, _arg(step, "name"))
    if op == "vertical":
        return vertical(g, _arg(step, "name"))
    if op == "horizontal":
        return horizontal(g, _arg(step, "name"))
    if op == "factor":
        return factor(g, _arg(step, "name"), _arg(step, "from"), _arg(step, "to"))
    if op == "distribute":
        return distribute(g, _arg(step, "name"))
    if op == "deyaccify":
        return deyaccify(g, _arg(step, "name"), style=_arg(step, "style", required=False))
    if op == "yaccify":
        return yaccify(g, _arg(step, "name"), _arg(step, "style"))
    if op == "set-node":
        return set_node(g, _arg(step, "lhs"), _arg(step, "pos"),
                        _arg(step, "path"), _arg(step, "expr"))
    if op == "set-label":
        return set_label(g, _arg(step, "lhs"), _arg(step, "pos"),
                         _arg(step, "label", required=False))
    if op == "set-roots":
        return set_roots(g, _arg(step, "roots"))
    if op == "define":
        return define(g, _arg(step, "name"), _arg(step, "rhs"))
    if op == "eliminate":
        return eliminate(g, _arg(step, "name"))
    if op == "insert-rule":
        return insert_rule(g, _arg(step, "lhs"), _arg(step, "pos"),
                           _arg(step, "rhs"), _arg(step, "label", required=False))
    if op == "remove-rule":
        return remove_rule(g, _arg(step, "lhs"), _arg(step, "pos"),
                           _arg(step, "rhs", required=False))
    if op == "permute":
        return permute(g, _arg(step, "lhs"), _arg(step, "pos"), _arg(step, "order"))
    raise TransformError(f"unsupported operator {op!r}")


def apply_script(g: Grammar, steps) -> Grammar:
    """Left-to-right composition; fails atomically on the first violated
    precondition, reporting the 0-based step index."""
    current = g
    for index, step in enumerate(steps):
        try:
            current = apply_step(current, step)
        except ScriptError:
            raise
        except TransformError as exc:
            raise ScriptError(index, step, str(exc), g) from exc
    return current


def bidirectionalize(step: TransformStep) -> BidirectionalStep:
    """Pair a step with its inverse.  Grammar-dependent inverses need the
    recorded operands described in the module docstring."""
    op = step.op
    if op == "rename":
        back = TransformStep("rename", {"from": _arg(step, "to"),
                                        "to": _arg(step, "from")})
    elif op == "extract":
        back = TransformStep("inline", {"name": _arg(step, "name")})
    elif op == "inline":
        body = _arg(step, "body", required=False)
        if body is None:
            raise TransformError("cannot invert inline without the recorded body")
        args = {"name": _arg(step, "name"), "expr": body}
        if "index" in step.args:
            args["index"] = step.args["index"]
        back = TransformStep("extract", args)
    elif op == "chain":
        back = TransformStep("unchain", {"name": _arg(step, "name")})
    elif op == "unchain":
        lhs = _arg(step, "lhs", required=False)
        body = _arg(step, "body", required=False)
        if lhs is None or body is None:
            raise TransformError(
                "cannot invert unchain without the recorded rule and body")
        args = {"lhs": lhs, "name": _arg(step, "name"), "target": body}
        if "index" in step.args:
            args["index"] = step.args["index"]
        back = TransformStep("chain", args)
    elif op == "vertical":
        back = TransformStep("horizontal", {"name": _arg(step, "name")})
    elif op == "horizontal":
        back = TransformStep("vertical", {"name": _arg(step, "name")})
    elif op == "factor":
        back = TransformStep("factor", {"name": _arg(step, "name"),
                                        "from": _arg(step, "to"),
                                        "to": _arg(step, "from")})
    elif op == "distribute":
        before = _arg(step, "before", required=False)
        if before is None:
            raise TransformError(
                "cannot invert distribute without the recorded original rhs")
        back = TransformStep("factor", {"name": _arg(step, "name"),
                                        "from": dnf(before), "to": before})
    elif op == "deyaccify":
        style = _arg(step, "style", required=False)
        if style is None:
            raise TransformError(
                "cannot invert deyaccify without the recorded recursion style")
        back = TransformStep("yaccify", {"name": _arg(step, "name"), "style": style})
    elif op == "yaccify":
        back = TransformStep("deyaccify", {"name": _arg(step, "name"),
                                           "style": _arg(step, "style")})
    elif op in ("set-node", "set-label", "set-roots"):
        key = {"set-node": "expr", "set-label": "label", "set-roots": "roots"}[op]
        if "previous" not in step.args:
            raise TransformError(f"cannot invert {op} without the recorded previous value")
        args = dict(step.args)
        args[key], args["previous"] = args["previous"], args.get(key)
        back = TransformStep(op, args)
    elif op == "define":
        back = TransformStep("eliminate", {"name": _arg(step, "name")})
    elif op == "insert-rule":
        back = TransformStep("remove-rule", {"lhs": _arg(step, "lhs"),
                                             "pos": _arg(step, "pos"),
                                             "rhs": _arg(step, "rhs")})
    elif op == "remove-rule":
        rhs = _arg(step, "rhs", required=False)
        if rhs is None:
            raise TransformError(
                "cannot invert remove-rule without the recorded rule body")
        args = {"lhs": _arg(step, "lhs"), "pos": _arg(step, "pos"), "rhs": rhs}
        if step.args.get("label") is not None:
            args["label"] = step.args["label"]
        back = TransformStep("insert-rule", args)
    elif op == "permute":
        order = _arg(step, "order")
        inverse = [0] * len(order)
        for i, target in enumerate(order):
            inverse[target - 1] = i + 1
        back = TransformStep("permute", {"lhs": _arg(step, "lhs"),
                                         "pos": _arg(step, "pos"),
                                         "order": inverse})
    else:
        raise TransformError(f"unsupported operator {op!r}")
    return BidirectionalStep(step, back)


# --------------------------------------------------------------------------
# script (de)serialization

_EXPR_ARGS = {"expr", "body", "target", "from", "to", "before", "rhs", "previous"}


def step_to_json(step: TransformStep) -> dict:
    args = {}
    for key, value in step.args.items():
        if isinstance(value, Expr):
            args[key] = expr_to_json(value)
        else:
            args[key] = value
    return {"op": step.op, "args": args}


def step_from_json(doc: dict) -> TransformStep:
    if not isinstance(doc, dict) or "op" not in doc:
        raise TransformError("script step must be an object with an 'op' field")
    raw_args = doc.get("args", {})
    if not isinstance(raw_args, dict):
        raise TransformError("step 'args' must be an object")
    args = {}
    for key, value in raw_args.items():
        if key in _EXPR_ARGS and isinstance(value, dict):
            args[key] = expr_from_json(value, f"args.{key}")
        else:
            args[key] = value
    return TransformStep(doc["op"], args)


def script_to_json(steps) -> list:
    return [step_to_json(step) for step in steps]


def script_from_json(doc) -> list[TransformStep]:
    if not isinstance(doc, list):
        raise TransformError("a script is a JSON list of steps")
    return [step_from_json(item) for item in doc]
