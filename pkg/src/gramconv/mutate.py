"""Grammar mutations: bulk changes whose effect depends on the grammar rather
than on operands, each returning a replayable trace of transformation steps.

Sixteen kinds are provided, from bulk removals (terminals, selectors, labels)
through naming and rooting discipline to the abstract-normal-form pipeline.
Replaying `MutationResult.trace` on the input grammar (transform.apply_script)
reproduces the output grammar exactly.  Kinds that drop information are marked
non-invertible; for the others, replaying the bidirectionalized trace in
reverse restores the input.

Abstract normal form (ANF) is the nine-condition shape consumed by the
convergence pipeline: no production labels, no selectors, no terminals, no
choice nested under another constructor, no horizontal rules, no separator
lists, no trivially defined nonterminals, no mixing of chain and non-chain
rules per nonterminal, and a call graph connected from the declared roots,
which are exactly the top (defined-but-unused) nonterminals.  For condition 8
a rule counts as a chain when its whole rhs is an atomic leaf: a nonterminal,
a built-in value, or one of epsilon/empty/any.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .grammar import (
    EPSILON,
    Anything,
    Choice,
    Empty,
    Epsilon,
    Expr,
    Grammar,
    Nonterminal,
    Optional,
    Plus,
    Production,
    Selectable,
    SepListPlus,
    SepListStar,
    Sequence,
    Star,
    Terminal,
    ValueInt,
    ValueStr,
    expr_names,
    opt,
    reachable,
    rebuild,
    render_expr,
    seq,
    star,
    subterms,
    tops,
    vocabulary,
)
from .transform import (
    TransformStep,
    apply_step,
    detect_yaccified,
    dnf,
    fresh_name,
)


class MutationError(ValueError):
    pass


MUTATION_KINDS = (
    "remove-terminals",
    "remove-selectors",
    "remove-labels",
    "disciplined-rename",
    "reroot-to-top",
    "eliminate-top",
    "extract-subgrammar",
    "all-vertical",
    "all-horizontal",
    "distribute-all",
    "potentially-horizontal-to-vertical",
    "deyaccify-all",
    "remove-lazy",
    "normalize-anf",
    "fold-groups",
    "encode-seplists",
)

# kinds that discard information their trace cannot restore
_LOSSY_KINDS = frozenset((
    "remove-terminals",
    "remove-selectors",
    "remove-labels",
    "eliminate-top",
    "extract-subgrammar",
    "remove-lazy",
    "normalize-anf",
))

NAMING_CONVENTIONS = ("UPPER", "lower", "CamelCase", "dash-lower")


@dataclass
class Mutation:
    kind: str
    params: dict = field(default_factory=dict)


@dataclass
class MutationResult:
    grammar: Grammar
    trace: list[TransformStep]
    changed_count: int
    invertible: bool


class _Recorder:
    """Applies steps through the transform engine so the recorded trace is
    replayable by construction."""

    def __init__(self, g: Grammar) -> None:
        self.grammar = g
        self.trace: list[TransformStep] = []

    def do(self, op: str, **args) -> None:
        step = TransformStep(op, args)
        self.grammar = apply_step(self.grammar, step)
        self.trace.append(step)


def _defined_order(g: Grammar) -> list[str]:
    seen: dict[str, None] = {}
    for prod in g.productions:
        seen.setdefault(prod.lhs)
    return list(seen)


def _all_names_order(g: Grammar) -> list[str]:
    seen: dict[str, None] = {}
    for prod in g.productions:
        seen.setdefault(prod.lhs)
        for name in expr_names(prod.rhs):
            seen.setdefault(name)
    return list(seen)


def _local_rules(g: Grammar, name: str) -> list[tuple[int, Production]]:
    return [(pos, prod)
            for pos, prod in enumerate(p for p in g.productions if p.lhs == name)]


def _is_chain_rhs(rhs: Expr) -> bool:
    return isinstance(rhs, (Nonterminal, ValueStr, ValueInt, Epsilon, Empty, Anything))


def _is_trivial_rhs(rhs: Expr) -> bool:
    return isinstance(rhs, (Epsilon, Empty, Anything))


# --------------------------------------------------------------------------
# per-kind implementations


def _rewrite_rules(rec: _Recorder, fn) -> None:
    """Rewrite every rule rhs with fn (a rebuild node function), one recorded
    step per changed rule."""
    for name in _defined_order(rec.grammar):
        for pos, prod in _local_rules(rec.grammar, name):
            new = rebuild(prod.rhs, fn)
            if new != prod.rhs:
                rec.do("set-node", lhs=name, pos=pos, path=[], expr=new,
                       previous=prod.rhs)


def _remove_terminals(rec: _Recorder, params: dict) -> None:
    _rewrite_rules(rec, lambda node: EPSILON if isinstance(node, Terminal) else node)


def _remove_selectors(rec: _Recorder, params: dict) -> None:
    _rewrite_rules(rec, lambda node: node.body if isinstance(node, Selectable) else node)


def _remove_labels(rec: _Recorder, params: dict) -> None:
    for name in _defined_order(rec.grammar):
        for pos, prod in _local_rules(rec.grammar, name):
            if prod.label is not None:
                rec.do("set-label", lhs=name, pos=pos, label=None, previous=prod.label)


_WORD = re.compile(r"[A-Z]+(?=[A-Z][a-z0-9])|[A-Z]?[a-z0-9]+|[A-Z]+")


def _words(name: str) -> list[str]:
    chunks = re.split(r"[-_]+", name)
    words: list[str] = []
    for chunk in chunks:
        words.extend(_WORD.findall(chunk))
    return words or [name]


def apply_convention(convention: str, name: str) -> str:
    if convention == "UPPER":
        return name.upper()
    if convention == "lower":
        return name.lower()
    if convention == "CamelCase":
        return "".join(word.capitalize() for word in _words(name))
    if convention == "dash-lower":
        return "-".join(word.lower() for word in _words(name))
    raise MutationError(f"unknown naming convention {convention!r}")


def _disciplined_rename(rec: _Recorder, params: dict) -> None:
    convention = params["convention"]
    names = _all_names_order(rec.grammar)
    taken = set(names)
    targets = {name: apply_convention(convention, name) for name in names}
    by_target: dict[str, list[str]] = {}
    for name, target in targets.items():
        by_target.setdefault(target, []).append(name)
    for target, sources in by_target.items():
        if len(sources) > 1:
            raise MutationError(
                f"convention collision: {', '.join(sorted(sources))} all map to {target!r}")
        source = sources[0]
        if target != source and target in taken:
            raise MutationError(
                f"convention collision: {source!r} maps to existing name {target!r}")
    for name in names:
        if targets[name] != name:
            rec.do("rename", **{"from": name, "to": targets[name]})


def _non_leaf_tops(g: Grammar) -> list[str]:
    top_set = tops(g)
    result = []
    for name in _defined_order(g):
        if name not in top_set:
            continue
        if any(expr_names(prod.rhs) for prod in g.rules_of(name)):
            result.append(name)
    return result


def _reroot_to_top(rec: _Recorder, params: dict) -> None:
    roots = _non_leaf_tops(rec.grammar)
    if tuple(roots) != rec.grammar.roots:
        rec.do("set-roots", roots=roots, previous=list(rec.grammar.roots))


def _eliminate_unreachable(rec: _Recorder) -> None:
    g = rec.grammar
    keep = reachable(g, g.roots)
    for name in _defined_order(g):
        if name not in keep:
            rec.do("eliminate", name=name)


def _eliminate_top(rec: _Recorder, params: dict) -> None:
    _eliminate_unreachable(rec)


def _extract_subgrammar(rec: _Recorder, params: dict) -> None:
    roots = list(params["roots"])
    voc = vocabulary(rec.grammar)
    missing = [name for name in roots if name not in voc.defined]
    if missing:
        raise MutationError(
            f"extract-subgrammar: undefined nonterminal(s) {', '.join(missing)}")
    if tuple(roots) != rec.grammar.roots:
        rec.do("set-roots", roots=roots, previous=list(rec.grammar.roots))
    _eliminate_unreachable(rec)


def _hoist_top_selectors(rec: _Recorder, name: str) -> None:
    # an unlabeled rule whose whole rhs is a selectable is the same rule with
    # the selector as its label; putting it in that form keeps the
    # horizontal/vertical round trips exact
    for pos, prod in _local_rules(rec.grammar, name):
        if prod.label is None and isinstance(prod.rhs, Selectable):
            rec.do("set-label", lhs=name, pos=pos, label=prod.rhs.selector,
                   previous=None)
            rec.do("set-node", lhs=name, pos=pos, path=[], expr=prod.rhs.body,
                   previous=prod.rhs)


def _all_vertical(rec: _Recorder, params: dict) -> None:
    # labels cannot survive the split of their choice across several rules,
    # and an alternative wrapped in a selectable resurfaces as a label, so
    # iterate until no choice-shaped rhs is left
    for _ in range(64):
        before = len(rec.trace)
        for name in _defined_order(rec.grammar):
            rules = rec.grammar.rules_of(name)
            if len(rules) == 1 and isinstance(rules[0].rhs, Choice):
                if rules[0].label is not None:
                    rec.do("set-label", lhs=name, pos=0, label=None,
                           previous=rules[0].label)
                rec.do("vertical", name=name)
            elif len(rules) > 1 and any(isinstance(r.rhs, Choice) for r in rules):
                # several rules: split each choice rule in place, keeping the
                # other rule boundaries (and hence the trace invertible)
                _split_choice_rules(rec, name)
        if len(rec.trace) == before:
            return
    raise MutationError("all-vertical did not converge")


def _split_choice_rules(rec: _Recorder, name: str) -> None:
    """Replace each choice-shaped rule of `name` by one rule per alternative,
    in place (labels are stripped first: they cannot survive the split)."""
    while True:
        target = None
        for pos, prod in _local_rules(rec.grammar, name):
            if isinstance(prod.rhs, Choice):
                target = (pos, prod)
                break
        if target is None:
            return
        pos, prod = target
        if prod.label is not None:
            rec.do("set-label", lhs=name, pos=pos, label=None, previous=prod.label)
        alternatives = prod.rhs.alternatives
        rec.do("set-node", lhs=name, pos=pos, path=[], expr=alternatives[0],
               previous=prod.rhs)
        for offset, alt in enumerate(alternatives[1:], start=1):
            rec.do("insert-rule", lhs=name, pos=pos + offset, rhs=alt)


def _all_horizontal(rec: _Recorder, params: dict) -> None:
    for name in _defined_order(rec.grammar):
        if len(rec.grammar.rules_of(name)) <= 1:
            continue
        # nested choice rules would flatten into the merged one, and a bare
        # top-level selectable would resurface as a label, so normalize both
        # away first (splitting can expose new selectable rules, hence the
        # small fixpoint)
        for _ in range(32):
            before = len(rec.trace)
            _hoist_top_selectors(rec, name)
            _split_choice_rules(rec, name)
            if len(rec.trace) == before:
                break
        # an empty-language alternative would silently vanish in the merged
        # choice; dropping it as a recorded step keeps the trace invertible
        while True:
            locs = _local_rules(rec.grammar, name)
            if len(locs) <= 1:
                break
            victim = next(((pos, prod) for pos, prod in locs
                           if isinstance(prod.rhs, Empty)), None)
            if victim is None:
                break
            pos, prod = victim
            rec.do("remove-rule", lhs=name, pos=pos, rhs=prod.rhs, label=prod.label)
        if len(rec.grammar.rules_of(name)) > 1:
            rec.do("horizontal", name=name)


def _nested_choice_offender(rhs: Expr):
    """Deepest-first (choice, path) nested under a non-sequence constructor;
    sequence-over-choice nesting is handled by distribution instead."""
    def walk(node: Expr, path: tuple[int, ...]):
        kids: list[tuple[int, Expr]] = []
        if isinstance(node, Selectable):
            kids = [(0, node.body)]
        elif isinstance(node, (Optional, Star, Plus)):
            kids = [(0, node.body)]
        elif isinstance(node, (SepListStar, SepListPlus)):
            kids = [(0, node.item), (1, node.separator)]
        elif isinstance(node, Sequence):
            kids = list(enumerate(node.parts))
        elif isinstance(node, Choice):
            kids = list(enumerate(node.alternatives))
        for i, kid in kids:
            deeper = walk(kid, path + (i,))
            if deeper is not None:
                return deeper
        if isinstance(node, (Selectable, Optional, Star, Plus, SepListStar, SepListPlus)):
            for i, kid in kids:
                if isinstance(kid, Choice):
                    return kid
        return None
    return walk(rhs, ())


def _distribute_all(rec: _Recorder, params: dict) -> None:
    # surface what distribution can surface, then fold the choices that sit
    # under repetitions (which no amount of distribution can reach)
    for _ in range(64):
        changed = False
        for name in _defined_order(rec.grammar):
            for pos, prod in _local_rules(rec.grammar, name):
                expanded = dnf(prod.rhs)
                if expanded != prod.rhs:
                    rec.do("set-node", lhs=name, pos=pos, path=[], expr=expanded,
                           previous=prod.rhs)
                    changed = True
        for name in _defined_order(rec.grammar):
            for pos, prod in _local_rules(rec.grammar, name):
                offender = _nested_choice_offender(prod.rhs)
                if offender is not None:
                    voc = vocabulary(rec.grammar)
                    fresh = fresh_name(name, set(voc.defined | voc.used))
                    rec.do("extract", name=fresh, expr=offender)
                    changed = True
        if not changed:
            return
    raise MutationError("distribute-all did not converge")


def _potentially_horizontal_to_vertical(rec: _Recorder, params: dict) -> None:
    _distribute_all(rec, params)
    _all_vertical(rec, params)


def _deyaccify_all(rec: _Recorder, params: dict) -> None:
    for name in _defined_order(rec.grammar):
        found = detect_yaccified(rec.grammar, name)
        if found is not None:
            rec.do("deyaccify", name=name, style=found[0])


def _inline_target(rec: _Recorder, name: str) -> dict | None:
    """Recorded-operand args for inlining `name`, or None when not eligible."""
    g = rec.grammar
    if name in g.roots:
        return None
    positions = [i for i, prod in enumerate(g.productions) if prod.lhs == name]
    if len(positions) != 1:
        return None
    body = g.productions[positions[0]].rhs
    if name in expr_names(body):
        return None
    return {"name": name, "body": body, "index": positions[0]}


def _remove_lazy(rec: _Recorder, params: dict) -> None:
    while True:
        g = rec.grammar
        acted = False
        for name in _defined_order(g):
            args = _inline_target(rec, name)
            if args is None:
                continue
            me = Nonterminal(name)
            uses = []
            for i, prod in enumerate(g.productions):
                if prod.lhs == name:
                    continue
                uses.extend((i, prod) for sub in subterms(prod.rhs) if sub == me)
            chain_use = [(i, prod) for i, prod in uses if prod.rhs == me]
            if len(uses) == 1 and chain_use:
                host_at, host = chain_use[0]
                rec.do("unchain", name=name, lhs=host.lhs, body=args["body"],
                       index=args["index"])
                acted = True
                break
            if len(uses) == 1 or (uses and chain_use):
                rec.do("inline", **args)
                acted = True
                break
        if not acted:
            return


def _encode_seplists(rec: _Recorder, params: dict) -> None:
    def desugar(node: Expr) -> Expr:
        if isinstance(node, SepListPlus):
            return seq(node.item, star(seq(node.separator, node.item)))
        if isinstance(node, SepListStar):
            return opt(seq(node.item, star(seq(node.separator, node.item))))
        return node
    _rewrite_rules(rec, desugar)


_GROUPY = (Sequence, Choice, SepListStar, SepListPlus)


def _grouped_offender(rhs: Expr):
    """Deepest-first composite subexpression that a bracket-free postfix
    notation could not write without group brackets."""
    def walk(node: Expr):
        kids: list[Expr] = []
        if isinstance(node, Selectable):
            kids = [node.body]
        elif isinstance(node, (Optional, Star, Plus)):
            kids = [node.body]
        elif isinstance(node, (SepListStar, SepListPlus)):
            kids = [node.item, node.separator]
        elif isinstance(node, Sequence):
            kids = list(node.parts)
        elif isinstance(node, Choice):
            kids = list(node.alternatives)
        for kid in kids:
            deeper = walk(kid)
            if deeper is not None:
                return deeper
        if isinstance(node, (Optional, Star, Plus)) and isinstance(node.body, _GROUPY):
            return node.body
        if isinstance(node, (SepListStar, SepListPlus)):
            for part in (node.item, node.separator):
                if isinstance(part, _GROUPY):
                    return part
        if isinstance(node, Sequence):
            for part in node.parts:
                if isinstance(part, Choice):
                    return part
        return None
    return walk(rhs)


def _fold_groups(rec: _Recorder, params: dict) -> None:
    for _ in range(1024):
        found = None
        for name in _defined_order(rec.grammar):
            for _pos, prod in _local_rules(rec.grammar, name):
                offender = _grouped_offender(prod.rhs)
                if offender is not None:
                    found = (name, offender)
                    break
            if found:
                break
        if found is None:
            return
        host, offender = found
        voc = vocabulary(rec.grammar)
        fresh = fresh_name(host, set(voc.defined | voc.used))
        rec.do("extract", name=fresh, expr=offender)
    raise MutationError("fold-groups did not converge")


def _inline_trivial(rec: _Recorder) -> None:
    while True:
        acted = False
        for name in _defined_order(rec.grammar):
            rules = rec.grammar.rules_of(name)
            if len(rules) == 1 and _is_trivial_rhs(rules[0].rhs):
                args = _inline_target(rec, name)
                if args is not None:
                    rec.do("inline", **args)
                    acted = True
                    break
        if not acted:
            return


def _fix_chain_mixing(rec: _Recorder) -> None:
    while True:
        acted = False
        for name in _defined_order(rec.grammar):
            rules = rec.grammar.rules_of(name)
            if len(rules) < 2:
                continue
            flags = [_is_chain_rhs(prod.rhs) for prod in rules]
            if all(flags) or not any(flags):
                continue
            body = next(prod.rhs for prod in rules if not _is_chain_rhs(prod.rhs))
            voc = vocabulary(rec.grammar)
            fresh = fresh_name(name, set(voc.defined | voc.used))
            rec.do("extract", name=fresh, expr=body, scope=name)
            acted = True
            break
        if not acted:
            return


def _normalize_anf(rec: _Recorder, params: dict) -> None:
    _remove_labels(rec, params)
    _remove_selectors(rec, params)
    _remove_terminals(rec, params)
    _encode_seplists(rec, params)
    _distribute_all(rec, params)
    _all_vertical(rec, params)
    # the closing phases can expose one another's work (inlining a trivial
    # definition may create a chain rule; dropping a leafy root may orphan
    # rules), so run them to a fixpoint
    for _ in range(16):
        before = rec.grammar
        _inline_trivial(rec)
        _fix_chain_mixing(rec)
        _reroot_to_top(rec, params)
        _eliminate_unreachable(rec)
        if rec.grammar == before:
            return
    raise MutationError("normalize-anf did not converge")


_KIND_IMPL = {
    "remove-terminals": _remove_terminals,
    "remove-selectors": _remove_selectors,
    "remove-labels": _remove_labels,
    "disciplined-rename": _disciplined_rename,
    "reroot-to-top": _reroot_to_top,
    "eliminate-top": _eliminate_top,
    "extract-subgrammar": _extract_subgrammar,
    "all-vertical": _all_vertical,
    "all-horizontal": _all_horizontal,
    "distribute-all": _distribute_all,
    "potentially-horizontal-to-vertical": _potentially_horizontal_to_vertical,
    "deyaccify-all": _deyaccify_all,
    "remove-lazy": _remove_lazy,
    "normalize-anf": _normalize_anf,
    "fold-groups": _fold_groups,
    "encode-seplists": _encode_seplists,
}

_PARAM_KEYS = {
    "disciplined-rename": ("convention",),
    "extract-subgrammar": ("roots",),
}


def mutate(g: Grammar, m: Mutation) -> MutationResult:
    if m.kind not in MUTATION_KINDS:
        raise MutationError(f"unknown mutation kind {m.kind!r}")
    wanted = _PARAM_KEYS.get(m.kind, ())
    for key in wanted:
        if key not in m.params:
            raise MutationError(f"mutation {m.kind!r} requires parameter {key!r}")
    for key in m.params:
        if key not in wanted:
            raise MutationError(f"mutation {m.kind!r} takes no parameter {key!r}")
    if m.kind == "disciplined-rename" and m.params["convention"] not in NAMING_CONVENTIONS:
        raise MutationError(
            f"unknown naming convention {m.params['convention']!r}; "
            f"choose one of {', '.join(NAMING_CONVENTIONS)}")
    rec = _Recorder(g)
    _KIND_IMPL[m.kind](rec, dict(m.params))
    return MutationResult(rec.grammar, rec.trace, len(rec.trace),
                          m.kind not in _LOSSY_KINDS)


# --------------------------------------------------------------------------
# the ANF checker


@dataclass(frozen=True)
class AnfViolation:
    condition: int
    detail: str

    def __str__(self) -> str:
        return f"condition {self.condition}: {self.detail}"


def anf_check(g: Grammar) -> list[AnfViolation]:
    """All violated abstract-normal-form conditions (empty list means ANF)."""
    out: list[AnfViolation] = []
    for prod in g.productions:
        if prod.label is not None:
            out.append(AnfViolation(1, f"rule {prod.lhs} carries label {prod.label!r}"))
    for prod in g.productions:
        for sub in subterms(prod.rhs):
            if isinstance(sub, Selectable):
                out.append(AnfViolation(
                    2, f"rule {prod.lhs} names a subexpression {sub.selector!r}"))
    for prod in g.productions:
        for sub in subterms(prod.rhs):
            if isinstance(sub, Terminal):
                out.append(AnfViolation(
                    3, f"rule {prod.lhs} contains terminal {sub.text!r}"))
    for prod in g.productions:
        for sub in subterms(prod.rhs):
            for kid in _kids(sub):
                if isinstance(kid, Choice):
                    out.append(AnfViolation(
                        4, f"rule {prod.lhs} nests a choice under "
                           f"{type(sub).__name__.lower()}"))
    for prod in g.productions:
        if isinstance(prod.rhs, Choice):
            out.append(AnfViolation(5, f"rule {prod.lhs} is horizontal"))
    for prod in g.productions:
        for sub in subterms(prod.rhs):
            if isinstance(sub, (SepListStar, SepListPlus)):
                out.append(AnfViolation(
                    6, f"rule {prod.lhs} contains a separator list"))
    for name in _defined_order(g):
        rules = g.rules_of(name)
        if len(rules) == 1 and _is_trivial_rhs(rules[0].rhs):
            out.append(AnfViolation(
                7, f"{name} is trivially defined as {render_expr(rules[0].rhs)}"))
    for name in _defined_order(g):
        rules = g.rules_of(name)
        if len(rules) < 2:
            continue
        flags = [_is_chain_rhs(prod.rhs) for prod in rules]
        if any(flags) and not all(flags):
            out.append(AnfViolation(8, f"{name} mixes chain and non-chain rules"))
    top_set = tops(g)
    if top_set != set(g.roots):
        out.append(AnfViolation(
            9, f"top nonterminals {sorted(top_set)} differ from roots {sorted(g.roots)}"))
    else:
        voc = vocabulary(g)
        loose = sorted((voc.defined | voc.used) - reachable(g, g.roots))
        if loose:
            out.append(AnfViolation(
                9, f"unreachable from the roots: {', '.join(loose)}"))
    return out


def _kids(node: Expr) -> tuple[Expr, ...]:
    if isinstance(node, Selectable):
        return (node.body,)
    if isinstance(node, (Optional, Star, Plus)):
        return (node.body,)
    if isinstance(node, Sequence):
        return node.parts
    if isinstance(node, Choice):
        return node.alternatives
    if isinstance(node, (SepListStar, SepListPlus)):
        return (node.item, node.separator)
    return ()
