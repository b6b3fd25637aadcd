"""Guided grammar convergence.

Matching two grammars of the same intended language proceeds in four phases:
grammar-design mutation (deyaccification), normalization to abstract normal
form, nominal resolution of the two nonterminal vocabularies, and structural
matching of the production rules under the resolved name mapping.

Nominal resolution is driven by production signatures.  The footprint of a
name in an expression is the multiset of occurrence markers (1, ?, +, *) it
carries there; a production signature collects the non-empty footprints of
all names in a rule's right-hand side.  Two rules are strongly
prodsig-equivalent when their signatures admit a unique equal-footprint
bijection, and weakly so when uniqueness is dropped and + is conflated
with *.  Built-in values take part under the names "str" and "int" and are
only ever matched to values of the same kind.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .grammar import (
    Choice,
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
    render_production,
)
from .mutate import Mutation, anf_check, mutate
from .transform import TransformStep, apply_script

VALUE_NAME_SET = frozenset(("str", "int"))

_MARKER_ORDER = {"1": 0, "?": 1, "+": 2, "*": 3}


class ResolutionError(ValueError):
    pass


class ResolutionConflict(ResolutionError):
    """Conflicting name bindings were forced; carries the bindings."""

    def __init__(self, bindings) -> None:
        shown = ", ".join(f"{a} -> {b}" for a, b in bindings)
        super().__init__(f"conflicting bindings: {shown}")
        self.bindings = tuple(bindings)


class ResolutionAmbiguity(ResolutionError):
    """Several maximal consistent mappings exist; carries the candidates."""

    def __init__(self, candidates) -> None:
        self.candidates = tuple(candidates)
        shown = "; ".join(
            "{" + ", ".join(f"{a} -> {b}" for a, b in sorted(cand.items())) + "}"
            for cand in self.candidates)
        super().__init__(f"ambiguous nominal resolution, candidates: {shown}")


class MatchError(ValueError):
    pass


# --------------------------------------------------------------------------
# footprints and signatures


@dataclass(frozen=True)
class Footprint:
    markers: tuple[str, ...]

    @staticmethod
    def of(markers) -> "Footprint":
        return Footprint(tuple(sorted(markers, key=_MARKER_ORDER.__getitem__)))

    def union(self, other: "Footprint") -> "Footprint":
        return Footprint.of(self.markers + other.markers)

    def weak(self) -> "Footprint":
        return Footprint.of("*" if m == "+" else m for m in self.markers)

    def __bool__(self) -> bool:
        return bool(self.markers)

    def render(self) -> str:
        return "".join(self.markers)


_EMPTY_FP = Footprint(())


def _leaf_name(expr: Expr) -> str | None:
    if isinstance(expr, Nonterminal):
        return expr.name
    if isinstance(expr, ValueStr):
        return "str"
    if isinstance(expr, ValueInt):
        return "int"
    return None


def _unwrapped_leaf(expr: Expr) -> str | None:
    # peel unary wrappers; the outermost marker is the one that counts
    while isinstance(expr, (Optional, Star, Plus, Selectable)):
        expr = expr.body
    return _leaf_name(expr)


def footprint(name: str, expr: Expr) -> Footprint:
    """Multiset of occurrence markers of `name` in `expr`: 1 for a bare
    occurrence, ?/+/* under the respective operator, unioned across sequence
    parts; occurrences under a choice do not count."""
    if _leaf_name(expr) == name:
        return Footprint(("1",))
    if isinstance(expr, Optional) and _unwrapped_leaf(expr.body) == name:
        return Footprint(("?",))
    if isinstance(expr, Star) and _unwrapped_leaf(expr.body) == name:
        return Footprint(("*",))
    if isinstance(expr, Plus) and _unwrapped_leaf(expr.body) == name:
        return Footprint(("+",))
    if isinstance(expr, Selectable):
        return footprint(name, expr.body)
    if isinstance(expr, (SepListStar, SepListPlus)):
        return footprint(name, expr.item)
    if isinstance(expr, Sequence):
        result = _EMPTY_FP
        for part in expr.parts:
            result = result.union(footprint(name, part))
        return result
    return _EMPTY_FP


def _signature_names(expr: Expr) -> list[str]:
    seen: dict[str, None] = {}

    def walk(node: Expr) -> None:
        name = _leaf_name(node)
        if name is not None:
            seen.setdefault(name)
            return
        if isinstance(node, Selectable):
            walk(node.body)
        elif isinstance(node, (Optional, Star, Plus)):
            walk(node.body)
        elif isinstance(node, Sequence):
            for part in node.parts:
                walk(part)
        elif isinstance(node, Choice):
            for alt in node.alternatives:
                walk(alt)
        elif isinstance(node, (SepListStar, SepListPlus)):
            walk(node.item)
            walk(node.separator)

    walk(expr)
    return list(seen)


def prodsig(prod: Production) -> dict[str, Footprint]:
    """Production signature: name -> footprint, one entry per name with a
    non-empty footprint in the rule's rhs, in first-occurrence order."""
    sig: dict[str, Footprint] = {}
    for name in _signature_names(prod.rhs):
        fp = footprint(name, prod.rhs)
        if fp:
            sig[name] = fp
    return sig


def render_prodsig(sig: dict[str, Footprint]) -> str:
    entries = ", ".join(f"<{name}, {sig[name].render()}>" for name in sorted(sig))
    return "{" + entries + "}"


def strong_equiv(p: Production, q: Production) -> bool:
    """Unique equal-footprint bijection between the two signatures."""
    sp, sq = prodsig(p), prodsig(q)
    fps_p = list(sp.values())
    fps_q = list(sq.values())
    if len(set(fps_p)) != len(fps_p) or len(set(fps_q)) != len(fps_q):
        return False
    return set(fps_p) == set(fps_q)


def weak_equiv(p: Production, q: Production) -> bool:
    """Every signature entry has a counterpart with an equivalent footprint
    (+ conflated with *), in both directions."""
    fps_p = {fp.weak() for fp in prodsig(p).values()}
    fps_q = {fp.weak() for fp in prodsig(q).values()}
    return fps_p == fps_q


# --------------------------------------------------------------------------
# nominal resolution


@dataclass(frozen=True)
class NominalMapping:
    """Relation between two nonterminal vocabularies; None stands for the
    unmatched marker (rendered as "omega")."""

    pairs: frozenset[tuple[str | None, str | None]]

    def as_dict(self) -> dict[str, str]:
        return {a: b for a, b in self.pairs if a is not None and b is not None}

    def bound(self) -> frozenset[tuple[str, str]]:
        return frozenset((a, b) for a, b in self.pairs
                         if a is not None and b is not None)


def _is_value_name(name: str) -> bool:
    return name in VALUE_NAME_SET


def pair_resolution(p: Production, q: Production, strength: str) -> list[NominalMapping]:
    """Candidate name relations induced by one production pair.  Strong
    pairs induce a single relation (signature composed with the inverse
    signature over equal footprints); weak pairs induce every maximal
    relation pairing names with equivalent footprints one-to-one, with
    unmatched names related to the omega marker."""
    if strength == "strong":
        if not strong_equiv(p, q):
            raise ResolutionError("productions are not strongly prodsig-equivalent")
        sp, sq = prodsig(p), prodsig(q)
        inverse = {fp: name for name, fp in sq.items()}
        return [NominalMapping(frozenset(
            (name, inverse[fp]) for name, fp in sp.items()))]
    if strength != "weak":
        raise ResolutionError(f"unknown equivalence strength {strength!r}")
    if not weak_equiv(p, q):
        raise ResolutionError("productions are not weakly prodsig-equivalent")
    sp, sq = prodsig(p), prodsig(q)
    classes: dict[Footprint, tuple[list[str], list[str]]] = {}
    for name, fp in sp.items():
        classes.setdefault(fp.weak(), ([], []))[0].append(name)
    for name, fp in sq.items():
        classes.setdefault(fp.weak(), ([], []))[1].append(name)
    per_class: list[list[list[tuple[str | None, str | None]]]] = []
    for fp, (left, right) in classes.items():
        options: list[list[tuple[str | None, str | None]]] = []
        if len(left) <= len(right):
            for image in itertools.permutations(right, len(left)):
                pairs = list(zip(left, image))
                pairs += [(None, r) for r in right if r not in image]
                options.append(pairs)
        else:
            for domain in itertools.permutations(left, len(right)):
                pairs = list(zip(domain, right))
                pairs += [(l, None) for l in left if l not in domain]
                options.append(pairs)
        per_class.append(options)
    candidates = []
    for combo in itertools.product(*per_class):
        pairs = [pair for chunk in combo for pair in chunk]
        candidates.append(NominalMapping(frozenset(pairs)))
    return candidates


def _grammar_names(g: Grammar) -> list[str]:
    """All names taking part in signatures: defined and used nonterminals
    plus the value names that occur, in first-appearance order."""
    seen: dict[str, None] = {}
    for prod in g.productions:
        seen.setdefault(prod.lhs)
        for name in _signature_names(prod.rhs):
            seen.setdefault(name)
    return list(seen)


class _Binding:
    def __init__(self) -> None:
        self.fwd: dict[str, str] = {}
        self.rev: dict[str, str] = {}

    def compatible(self, a: str, b: str) -> bool:
        if _is_value_name(a) != _is_value_name(b):
            return False
        if _is_value_name(a) and a != b:
            return False
        return self.fwd.get(a, b) == b and self.rev.get(b, a) == a

    def bind(self, a: str, b: str) -> None:
        if not self.compatible(a, b):
            raise ResolutionConflict([(a, self.fwd.get(a, b)), (a, b)])
        self.fwd[a] = b
        self.rev[b] = a

    def copy(self) -> "_Binding":
        clone = _Binding()
        clone.fwd = dict(self.fwd)
        clone.rev = dict(self.rev)
        return clone


def _consistent_relations(sprod: Production, mprod: Production, strength: str,
                          binding: _Binding) -> list[list[tuple[str, str]]]:
    """Relations for the pair that extend the current binding without
    conflict; each returned relation includes the lhs pair and drops omega
    entries."""
    out = []
    for candidate in pair_resolution(sprod, mprod, strength):
        pairs = [(sprod.lhs, mprod.lhs)]
        pairs += [(a, b) for a, b in sorted(candidate.pairs,
                                            key=lambda ab: (ab[0] is None, ab))
                  if a is not None and b is not None]
        probe = binding.copy()
        ok = True
        for a, b in pairs:
            if not probe.compatible(a, b):
                ok = False
                break
            probe.bind(a, b)
        if ok:
            out.append(pairs)
    return out


def _equiv_at(sprod: Production, mprod: Production, strength: str) -> bool:
    return strong_equiv(sprod, mprod) if strength == "strong" \
        else weak_equiv(sprod, mprod)


def nominal_resolution(master: Grammar, servant: Grammar) -> NominalMapping:
    """Infer the servant-to-master name mapping by pairing prodsig-equivalent
    productions.

    Seeded with the root-to-root pair, rounds of a greedy fixpoint commit
    every production pair that is the unique consistent choice at its
    strength (strong first, then weak), binding the paired left-hand sides
    and the unambiguous part of the induced relation; matched pairs are
    re-narrowed as the binding grows.

    A greedy commitment of a spuriously exact relation can poison the rest
    of the run (a swapped pair of repetition markers makes the wrong
    bijection look footprint-perfect), so the result is adjudicated against
    the complete consistent matchings reachable from the seed: among the
    distinct full bindings, those with the most exactly-matching productions
    win.  A single winner is adopted, several raise ResolutionAmbiguity,
    none (structurally alien grammars) keeps the greedy partial result with
    omega for the unresolved names.
    """
    for label, g in (("master", master), ("servant", servant)):
        violations = anf_check(g)
        if violations:
            shown = "; ".join(str(v) for v in violations)
            raise ResolutionError(f"{label} grammar is not in abstract normal form: {shown}")

    seed = _Binding()
    for rs, rm in zip(servant.roots, master.roots):
        seed.bind(rs, rm)

    binding = _greedy_fixpoint(master, servant, seed.copy())

    candidates, capped = _complete_matchings(master, servant, seed)
    if capped:
        open_names = [name for name in _grammar_names(servant)
                      if name not in binding.fwd]
        if open_names:
            raise ResolutionAmbiguity(candidates or [dict(binding.fwd)])
    elif candidates:
        best = _best_bindings(master, servant, candidates)
        if len(best) == 1:
            binding = _Binding()
            for a, b in sorted(best[0].items()):
                binding.bind(a, b)
        else:
            raise ResolutionAmbiguity(best)

    pairs: list[tuple[str | None, str | None]] = []
    for name in _grammar_names(servant):
        pairs.append((name, binding.fwd.get(name)))
    mapped = {b for _, b in pairs if b is not None}
    for name in _grammar_names(master):
        if name not in mapped:
            pairs.append((None, name))
    return NominalMapping(frozenset(pairs))


def _greedy_fixpoint(master: Grammar, servant: Grammar,
                     binding: _Binding) -> _Binding:
    unmatched_s = list(range(len(servant.productions)))
    unmatched_m = list(range(len(master.productions)))
    matched: list[tuple[int, int, str]] = []

    def narrow() -> bool:
        moved = False
        for si, mi, strength in matched:
            relations = _consistent_relations(
                servant.productions[si], master.productions[mi], strength, binding)
            if not relations:
                continue
            shared = set(relations[0])
            for rel in relations[1:]:
                shared &= set(rel)
            for a, b in sorted(shared):
                if binding.fwd.get(a) != b:
                    binding.bind(a, b)
                    moved = True
        return moved

    progress = True
    while progress:
        progress = False
        for strength in ("strong", "weak"):
            for si in list(unmatched_s):
                options = []
                for mi in unmatched_m:
                    sprod = servant.productions[si]
                    mprod = master.productions[mi]
                    if not _equiv_at(sprod, mprod, strength):
                        continue
                    relations = _consistent_relations(sprod, mprod, strength, binding)
                    if relations:
                        options.append((mi, relations))
                if len(options) == 1:
                    mi, relations = options[0]
                    shared = set(relations[0])
                    for rel in relations[1:]:
                        shared &= set(rel)
                    for a, b in sorted(shared):
                        binding.bind(a, b)
                    unmatched_s.remove(si)
                    unmatched_m.remove(mi)
                    matched.append((si, mi, strength))
                    progress = True
            if progress:
                break
        if not progress:
            progress = narrow()
    return binding


def _complete_matchings(master: Grammar, servant: Grammar, seed: _Binding,
                        cap: int = 30000) -> tuple[list[dict[str, str]], bool]:
    """Distinct full bindings reachable by pairing every servant production
    injectively with a weakly equivalent master production, consistently
    with the seed.  Returns (bindings, budget-exhausted)."""
    total = len(servant.productions)
    results: list[dict[str, str]] = []
    seen: set[tuple] = set()
    budget = [cap]

    def dfs(current: _Binding, open_s: list[int], used_m: set[int]) -> None:
        if budget[0] <= 0 or len(results) > 6:
            return
        budget[0] -= 1
        if not open_s:
            key = tuple(sorted(current.fwd.items()))
            if key not in seen:
                seen.add(key)
                results.append(dict(current.fwd))
            return
        # fail-first: expand the production with the fewest consistent options
        scored = []
        for si in open_s:
            sprod = servant.productions[si]
            options = []
            for mi in range(len(master.productions)):
                if mi in used_m:
                    continue
                mprod = master.productions[mi]
                if not weak_equiv(sprod, mprod):
                    continue
                relations = _consistent_relations(sprod, mprod, "weak", current)
                for rel in relations:
                    options.append((mi, rel))
            if not options:
                return  # dead branch
            scored.append((len(options), si, options))
        count, si, options = min(scored, key=lambda item: (item[0], item[1]))
        rest = [x for x in open_s if x != si]
        for mi, rel in options:
            branch = current.copy()
            for a, b in rel:
                branch.bind(a, b)
            dfs(branch, rest, used_m | {mi})

    dfs(seed.copy(), list(range(total)), set())
    return results, budget[0] <= 0


def _exact_score(master: Grammar, servant: Grammar, fwd: dict[str, str]) -> int:
    """How many servant productions map exactly (lhs and footprint-equal
    signature) onto some master production under the binding."""
    targets = {(prod.lhs, frozenset(prodsig(prod).items()))
               for prod in master.productions}
    score = 0
    for prod in servant.productions:
        mapped = (fwd.get(prod.lhs),
                  frozenset((fwd.get(name, name), fp)
                            for name, fp in prodsig(prod).items()))
        if mapped in targets:
            score += 1
    return score


def _best_bindings(master: Grammar, servant: Grammar,
                   candidates: list[dict[str, str]]) -> list[dict[str, str]]:
    scored = [(_exact_score(master, servant, fwd), fwd) for fwd in candidates]
    best = max(score for score, _ in scored)
    return [fwd for score, fwd in scored if score == best]


# --------------------------------------------------------------------------
# structural matching


@dataclass
class PairMatch:
    left: Production   # servant rule
    right: Production  # master rule
    strength: str      # "strong" | "weak"


@dataclass
class Residue:
    side: str          # "servant" | "master"
    production: Production


@dataclass
class MatchReport:
    pairs: list[PairMatch]
    mapping: NominalMapping
    residue: list[Residue]
    structural_trace: list[TransformStep]
    normalization_trace: list[TransformStep] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def _value_kind(expr: Expr) -> str | None:
    if isinstance(expr, ValueStr):
        return "str"
    if isinstance(expr, ValueInt):
        return "int"
    return None


class _Aligner:
    """Alignment of one servant rhs onto one master rhs under a name mapping.

    Records the steps that rewrite the servant side into the master's shape:
    sequence permutations, repetition widenings (+ against *), and bindings
    of servant nonterminals against built-in master values.  Paths address
    the servant tree as it stands when the step applies (parent adjustments
    are emitted before descending)."""

    def __init__(self, mapping: dict[str, str], lhs: str, pos: int) -> None:
        self.mapping = mapping
        self.lhs = lhs
        self.pos = pos
        self.steps: list[TransformStep] = []

    def align(self, s_rhs: Expr, m_rhs: Expr) -> bool:
        return self._walk(s_rhs, m_rhs, (), emit=True)

    def _walk(self, s: Expr, m: Expr, path: tuple[int, ...], emit: bool) -> bool:
        s_name = s.name if isinstance(s, Nonterminal) else None
        if s_name is not None:
            if isinstance(m, Nonterminal):
                return self.mapping.get(s_name) == m.name
            kind = _value_kind(m)
            if kind is not None:
                # a nonterminal standing where the master has a built-in value
                if emit:
                    self._emit_set(path, m, s)
                return True
            return False
        s_kind = _value_kind(s)
        if s_kind is not None:
            return _value_kind(m) == s_kind
        if isinstance(s, Terminal):
            return isinstance(m, Terminal) and s.text == m.text
        if type(s) is type(m) and isinstance(s, (Optional, Star, Plus)):
            return self._walk(s.body, m.body, path + (0,), emit)
        if isinstance(s, (Star, Plus)) and isinstance(m, (Star, Plus)):
            # + against *: widen the servant side onto the master's kind
            if not self._walk(s.body, m.body, path + (0,), emit=False):
                return False
            if emit:
                rewrapped = Star(s.body) if isinstance(m, Star) else Plus(s.body)
                self._emit_set(path, m, s, replacement=rewrapped)
                self._walk(s.body, m.body, path + (0,), emit=True)
            return True
        if isinstance(s, Sequence) and isinstance(m, Sequence):
            if len(s.parts) != len(m.parts):
                return False
            order = self._sequence_order(s.parts, m.parts)
            if order is None:
                return False
            if emit:
                if order != tuple(range(1, len(s.parts) + 1)):
                    if path:
                        return False  # permutations are recorded at rule level only
                    self.steps.append(TransformStep(
                        "permute", {"lhs": self.lhs, "pos": self.pos,
                                    "order": list(order)}))
                for i, target in enumerate(order):
                    self._walk(s.parts[i], m.parts[target - 1],
                               path + (target - 1,), emit=True)
            return True
        if type(s) is type(m) and isinstance(s, (SepListStar, SepListPlus)):
            return (self._walk(s.item, m.item, path + (0,), emit)
                    and self._walk(s.separator, m.separator, path + (1,), emit))
        if type(s) is type(m) and isinstance(s, Selectable):
            return (s.selector == m.selector
                    and self._walk(s.body, m.body, path + (0,), emit))
        return type(s) is type(m)  # epsilon / empty / any

    def _sequence_order(self, s_parts, m_parts) -> tuple[int, ...] | None:
        k = len(s_parts)
        identity = tuple(range(1, k + 1))
        if all(self._walk(s_parts[i], m_parts[i], (), emit=False) for i in range(k)):
            return identity
        if k > 8:
            return None
        for perm in itertools.permutations(range(1, k + 1)):
            if all(self._walk(s_parts[i], m_parts[perm[i] - 1], (), emit=False)
                   for i in range(k)):
                return perm
        return None

    def _emit_set(self, path: tuple[int, ...], m: Expr, s: Expr,
                  replacement: Expr | None = None) -> None:
        self.steps.append(TransformStep(
            "set-node", {"lhs": self.lhs, "pos": self.pos, "path": list(path),
                         "expr": replacement if replacement is not None else m,
                         "previous": s}))


def structural_match(master: Grammar, servant: Grammar,
                     mapping: NominalMapping) -> MatchReport:
    """Match the servant productions against the master productions under a
    total name mapping; the recorded trace rewrites the servant rules onto
    the master shapes (modulo renaming)."""
    name_map = mapping.as_dict()
    servant_names = set(_grammar_names(servant))
    covered = {a for a, _ in mapping.pairs if a is not None}
    missing = sorted(servant_names - covered - VALUE_NAME_SET)
    if missing:
        raise MatchError(f"mapping does not cover servant names: {', '.join(missing)}")

    master_rules: dict[str, list[int]] = {}
    for i, prod in enumerate(master.productions):
        master_rules.setdefault(prod.lhs, []).append(i)

    matched_master: set[int] = set()
    rows: list[tuple[int, PairMatch]] = []
    residue: list[tuple[int, Residue]] = []
    trace: list[TransformStep] = []

    by_lhs: dict[str, list[int]] = {}
    for i, prod in enumerate(servant.productions):
        by_lhs.setdefault(prod.lhs, []).append(i)

    for s_nt, rule_indices in by_lhs.items():
        m_nt = name_map.get(s_nt)
        candidates = master_rules.get(m_nt, []) if m_nt is not None else []
        for pos, si in enumerate(rule_indices):
            sprod = servant.productions[si]
            best: tuple[int, list[TransformStep]] | None = None
            for mi in candidates:
                if mi in matched_master:
                    continue
                aligner = _Aligner(name_map, s_nt, pos)
                if aligner.align(sprod.rhs, master.productions[mi].rhs):
                    if best is None or len(aligner.steps) < len(best[1]):
                        best = (mi, aligner.steps)
                        if not aligner.steps:
                            break
            if best is None:
                residue.append((si, Residue("servant", sprod)))
                continue
            mi, steps = best
            matched_master.add(mi)
            mprod = master.productions[mi]
            if not steps and strong_equiv(sprod, mprod):
                strength = "strong"
            else:
                strength = "weak"
            trace.extend(steps)
            rows.append((si, PairMatch(sprod, mprod, strength)))

    for mi, mprod in enumerate(master.productions):
        if mi not in matched_master:
            residue.append((len(servant.productions) + mi, Residue("master", mprod)))

    rows.sort(key=lambda item: item[0])
    residue.sort(key=lambda item: item[0])
    return MatchReport([row for _, row in rows], mapping,
                       [entry for _, entry in residue], trace)


# --------------------------------------------------------------------------
# the pipeline


def guided_converge(master: Grammar, servant_raw: Grammar,
                    observer=None) -> MatchReport:
    """Run the full convergence pipeline: deyaccify the servant, normalize
    both grammars to abstract normal form (the master is expected to be
    abstract already; normalizing it produces a warning), resolve the name
    mapping and match the structures.  `observer(phase, grammar)` receives
    each intermediate grammar."""
    warnings: list[str] = []

    def note(phase: str, g: Grammar) -> None:
        if observer is not None:
            observer(phase, g)

    master_anf = master
    if anf_check(master):
        master_anf = mutate(master, Mutation("normalize-anf")).grammar
        warnings.append("master grammar was not in abstract normal form; normalized")
    note("master-anf", master_anf)

    design = mutate(servant_raw, Mutation("deyaccify-all"))
    note("servant-deyaccified", design.grammar)
    normal = mutate(design.grammar, Mutation("normalize-anf"))
    note("servant-anf", normal.grammar)

    mapping = nominal_resolution(master_anf, normal.grammar)
    report = structural_match(master_anf, normal.grammar, mapping)
    report.normalization_trace = design.trace + normal.trace
    report.warnings = warnings + report.warnings
    return report


def replay_convergence(servant_raw: Grammar, report: MatchReport) -> Grammar:
    """Replay the recorded normalization and structural traces on the raw
    servant grammar (the result agrees with the master structurally, up to
    the nominal mapping)."""
    return apply_script(servant_raw,
                        list(report.normalization_trace) + list(report.structural_trace))


# --------------------------------------------------------------------------
# signature metrics


@dataclass
class SigMetrics:
    productions: int
    distinct_footprints: int
    footprint_histogram: dict[str, int]
    signature_sizes: list[tuple[str, int]]


def sig_metrics(g: Grammar) -> SigMetrics:
    histogram: dict[str, int] = {}
    sizes: list[tuple[str, int]] = []
    distinct: set[Footprint] = set()
    for prod in g.productions:
        sig = prodsig(prod)
        sizes.append((prod.lhs, len(sig)))
        for fp in sig.values():
            distinct.add(fp)
            histogram[fp.render()] = histogram.get(fp.render(), 0) + 1
    ordered = dict(sorted(histogram.items()))
    return SigMetrics(len(g.productions), len(distinct), ordered, sizes)


# --------------------------------------------------------------------------
# renderings


def report_to_json(report: MatchReport) -> dict:
    from .interchange import expr_to_json
    from .transform import step_to_json

    def prod_json(prod: Production) -> dict:
        return {"label": prod.label, "lhs": prod.lhs, "rhs": expr_to_json(prod.rhs)}

    def show(name: str | None) -> str:
        return "omega" if name is None else name

    mapping = sorted(([show(a), show(b)] for a, b in report.mapping.pairs),
                     key=lambda ab: (ab[0] == "omega", ab[0], ab[1]))
    return {
        "mapping": mapping,
        "pairs": [{"left": prod_json(pair.left), "right": prod_json(pair.right),
                   "strength": pair.strength} for pair in report.pairs],
        "residue": [{"side": entry.side, "production": prod_json(entry.production)}
                    for entry in report.residue],
        "normalization_trace": [step_to_json(step)
                                for step in report.normalization_trace],
        "structural_trace": [step_to_json(step) for step in report.structural_trace],
        "warnings": list(report.warnings),
    }


def render_prodsig_table(g: Grammar) -> str:
    """Two-column table: production rules against their signatures."""
    from .grammar import render_expr

    left = [f"p{i + 1} = {prod.lhs} -> {render_expr(prod.rhs)}"
            for i, prod in enumerate(g.productions)]
    width = max((len(item) for item in left), default=0)
    lines = []
    for item, prod in zip(left, g.productions):
        lines.append(f"{item.ljust(width)}   {render_prodsig(prodsig(prod))}")
    return "\n".join(lines)


def render_mapping(mapping: NominalMapping) -> str:
    def show(name: str | None) -> str:
        return "omega" if name is None else name

    entries = sorted(mapping.pairs, key=lambda ab: (ab[0] is None, ab[0] or "", ab[1] or ""))
    return "\n".join(f"  <{show(a)}, {show(b)}>" for a, b in entries)


def render_match_report(report: MatchReport) -> str:
    lines = []
    left = [render_production(pair.left) for pair in report.pairs]
    width = max((len(item) for item in left), default=0)
    for shown, pair in zip(left, report.pairs):
        symbol = "=~=" if pair.strength == "strong" else "~w~"
        lines.append(f"{shown.ljust(width)} {symbol} {render_production(pair.right)}")
    lines.append("")
    lines.append("mapping:")
    lines.append(render_mapping(report.mapping))
    if report.residue:
        lines.append("")
        lines.append("residue:")
        for entry in report.residue:
            lines.append(f"  [{entry.side}] {render_production(entry.production)}")
    return "\n".join(lines) + "\n"
