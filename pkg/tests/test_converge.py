import random

import pytest

from gramconv.converge import (
    Footprint,
    MatchError,
    NominalMapping,
    ResolutionAmbiguity,
    ResolutionError,
    footprint,
    guided_converge,
    nominal_resolution,
    pair_resolution,
    prodsig,
    render_match_report,
    render_prodsig_table,
    sig_metrics,
    strong_equiv,
    structural_match,
    weak_equiv,
)
from gramconv.grammar import (
    VALUE_INT,
    VALUE_STR,
    Grammar,
    n,
    opt,
    p,
    plus,
    seq,
    star,
    t,
)
from gramconv.transform import apply_script, rename_nonterminal
from conftest import FL_MAPPING

from gen import random_anf
from oracles import resolution_oracle


def fp(*markers):
    return Footprint.of(markers)


# -- footprints ----------------------------------------------------------------


def test_footprint_plus():
    assert footprint("function", plus(n("function"))) == fp("+")


def test_footprint_sequence_union():
    rhs = seq(n("expr"), n("operator"), n("expr"))
    assert footprint("expr", rhs) == fp("1", "1")
    assert footprint("operator", rhs) == fp("1")


def test_footprint_absent_name_is_empty():
    assert footprint("zz", seq(n("a"), star(n("b")))) == fp()


def test_footprint_ignores_choice_occurrences():
    from gramconv.grammar import choice
    assert footprint("a", choice(n("a"), n("b"))) == fp()
    assert footprint("a", seq(n("a"), choice(n("a"), n("b")))) == fp("1")


def test_footprint_markers():
    assert footprint("a", opt(n("a"))) == fp("?")
    assert footprint("a", star(n("a"))) == fp("*")
    assert footprint("a", seq(n("a"), plus(n("a")))) == fp("1", "+")


def test_footprint_outermost_marker_wins():
    assert footprint("a", star(plus(n("a")))) == fp("*")
    assert footprint("a", opt(star(n("a")))) == fp("?")


def test_footprint_values_participate():
    assert footprint("str", seq(VALUE_STR, plus(VALUE_STR))) == fp("1", "+")
    assert footprint("int", VALUE_INT) == fp("1")


def test_footprint_is_a_multiset_homomorphism_over_sequences():
    from gen import NAMES, random_expr
    from gramconv.grammar import Sequence
    rng = random.Random(29)
    for _ in range(200):
        parts = [random_expr(rng, NAMES[:4], 2) for _ in range(rng.randint(2, 4))]
        whole = seq(*parts)
        if not isinstance(whole, Sequence):
            continue
        for name in NAMES[:4]:
            combined = fp()
            for part in whole.parts:
                combined = combined.union(footprint(name, part))
            assert footprint(name, whole) == combined


# -- prodsigs -------------------------------------------------------------------


def test_prodsig_fl_function_rule(fl_master):
    sig = prodsig(fl_master.productions[1])
    assert sig == {"str": fp("1", "+"), "expr": fp("1")}


def test_prodsig_terminal_only_rhs_is_empty():
    assert prodsig(p("a", t("x"))) == {}


def test_prodsig_star_rule(jaxb_anf):
    sig = prodsig(jaxb_anf.rules_of("Program")[0])
    assert sig == {"Function": fp("*")}


def test_prodsig_full_master_table(fl_master):
    rendered = [{name: f.render() for name, f in prodsig(prod).items()}
                for prod in fl_master.productions]
    assert rendered == [
        {"function": "+"},
        {"str": "1+", "expr": "1"},
        {"str": "1"},
        {"int": "1"},
        {"apply": "1"},
        {"binary": "1"},
        {"cond": "1"},
        {"str": "1", "expr": "+"},
        {"expr": "11", "operator": "1"},
        {"expr": "111"},
    ]


# -- equivalences ----------------------------------------------------------------


def test_strong_equiv_chain_rules(jaxb_anf, fl_master_abstract):
    left = jaxb_anf.productions[0]            # Expr -> Expr_1
    right = fl_master_abstract.productions[4]  # expression -> apply
    assert strong_equiv(left, right)


def test_strong_equiv_reflexive(fl_master):
    for prod in fl_master.productions:
        assert strong_equiv(prod, prod)


def test_star_vs_plus_is_weak_not_strong(jaxb_anf, fl_master_abstract):
    left = jaxb_anf.rules_of("Program")[0]
    right = fl_master_abstract.rules_of("program")[0]
    assert not strong_equiv(left, right)
    assert weak_equiv(left, right)


def test_weak_equiv_function_rules(jaxb_anf, fl_master_abstract):
    assert weak_equiv(jaxb_anf.rules_of("Function")[0],
                      fl_master_abstract.rules_of("function")[0])


def test_disjoint_signatures_not_weak(fl_master):
    assert not weak_equiv(fl_master.productions[0], fl_master.productions[8])


def test_strong_implies_weak_and_symmetry():
    rng = random.Random(13)
    rules = []
    for _ in range(40):
        g = random_anf(rng, vocab=rng.randint(2, 5))
        rules.extend(g.productions)
    sample = rng.sample(rules, min(len(rules), 30))
    for a in sample:
        for b in sample:
            if strong_equiv(a, b):
                assert weak_equiv(a, b)
            assert strong_equiv(a, b) == strong_equiv(b, a)
            assert weak_equiv(a, b) == weak_equiv(b, a)


# -- pair resolution --------------------------------------------------------------


def test_pair_resolution_strong_composition(jaxb_anf, fl_master_abstract):
    left = jaxb_anf.rules_of("Expr_2")[0]
    right = fl_master_abstract.rules_of("binary")[0]
    candidates = pair_resolution(left, right, "strong")
    assert len(candidates) == 1
    assert candidates[0].as_dict() == {"Ops": "operator", "Expr": "expression"}


def test_pair_resolution_identity(fl_master):
    prod = fl_master.productions[1]
    candidates = pair_resolution(prod, prod, "strong")
    assert candidates[0].as_dict() == {"str": "str", "expr": "expr"}


def test_pair_resolution_weak_enumerates_bijections():
    left = p("a", seq(n("x"), n("y")))
    right = p("b", seq(n("u"), n("v")))
    candidates = pair_resolution(left, right, "weak")
    assert len(candidates) == 2
    dicts = sorted(cand.as_dict().items() for cand in candidates)
    assert dicts == sorted([
        dict(x="u", y="v").items(), dict(x="v", y="u").items()])


def test_pair_resolution_rejects_nonequivalent(fl_master):
    with pytest.raises(ResolutionError):
        pair_resolution(fl_master.productions[0], fl_master.productions[8], "strong")


def test_pair_resolution_omega_for_leftovers():
    # weak equivalence compares footprint sets, so the duplicate {1} entries
    # collapse and the rules still correspond; the extra name pairs with omega
    left = p("a", seq(n("x"), n("y")))
    right = p("b", n("u"))
    assert weak_equiv(left, right)
    candidates = pair_resolution(left, right, "weak")
    assert len(candidates) == 2
    for cand in candidates:
        omegas = [a for a, b in cand.pairs if b is None]
        assert len(omegas) == 1
        assert len(cand.as_dict()) == 1


# -- nominal resolution -------------------------------------------------------------


def test_nominal_resolution_reproduces_case_study_mapping(fl_master_abstract, jaxb_anf):
    mapping = nominal_resolution(fl_master_abstract, jaxb_anf)
    assert mapping.as_dict() == FL_MAPPING
    assert len(mapping.pairs) == 9


def test_nominal_resolution_identity(fl_master_abstract, jaxb_anf):
    for g in (fl_master_abstract, jaxb_anf):
        mapping = nominal_resolution(g, g)
        assert all(a == b for a, b in mapping.pairs)


def test_nominal_resolution_self_is_identity_or_truly_symmetric():
    # on a corpus of normalized grammars, resolving a grammar against itself
    # yields the identity unless the grammar has interchangeable names, in
    # which case the ambiguity must be confirmed by the oracle
    rng = random.Random(59)
    identities = 0
    for _ in range(40):
        g = random_anf(rng, vocab=rng.randint(2, 5))
        try:
            mapping = nominal_resolution(g, g)
        except ResolutionAmbiguity:
            assert len(resolution_oracle(g, g)) > 1
            continue
        assert all(a == b for a, b in mapping.pairs)
        identities += 1
    assert identities >= 30


def test_nominal_resolution_requires_anf(fl_master, jaxb_model):
    with pytest.raises(ResolutionError):
        nominal_resolution(fl_master, jaxb_model)


def test_nominal_resolution_reports_ambiguity():
    master = Grammar(("r",), (p("r", seq(n("x"), n("y"), VALUE_STR)),
                              p("x", seq(VALUE_INT, VALUE_INT)),
                              p("y", seq(VALUE_INT, VALUE_INT))))
    servant = rename_nonterminal(rename_nonterminal(rename_nonterminal(
        master, "r", "R"), "x", "A"), "y", "B")
    assert resolution_oracle(master, servant) and len(resolution_oracle(master, servant)) == 2
    with pytest.raises(ResolutionAmbiguity):
        nominal_resolution(master, servant)


def test_nominal_resolution_agrees_with_oracle():
    rng = random.Random(77)
    unique_cases = 0
    for _ in range(60):
        master = random_anf(rng, vocab=rng.randint(3, 5))
        names = sorted({prod.lhs for prod in master.productions}
                       | {name for prod in master.productions
                          for name in _names_of(prod)})
        image = [f"s{i}" for i in range(len(names))]
        rng.shuffle(image)
        phi = dict(zip(names, image))
        servant = _apply_bijection(master, phi)
        solutions = resolution_oracle(master, servant)
        try:
            mapping = nominal_resolution(master, servant)
        except ResolutionAmbiguity:
            assert len(solutions) != 1
            continue
        if len(solutions) == 1:
            unique_cases += 1
            got = {a: b for a, b in mapping.pairs if a is not None and b is not None}
            want = {v: k for k, v in phi.items()}
            for value in ("str", "int"):
                want.setdefault(value, value)
            assert {k: got[k] for k in want if k in got} == \
                {k: want[k] for k in want if k in got}
    assert unique_cases >= 20


def _names_of(prod):
    from gramconv.grammar import expr_names
    return expr_names(prod.rhs)


def _apply_bijection(g, phi):
    from gramconv.grammar import Production, rename_expr
    return Grammar(tuple(phi.get(r, r) for r in g.roots),
                   tuple(Production(phi.get(prod.lhs, prod.lhs),
                                    rename_expr(prod.rhs, phi), prod.label)
                         for prod in g.productions))


# -- structural matching ---------------------------------------------------------


def test_structural_match_case_study_table(fl_master_abstract, jaxb_anf):
    mapping = nominal_resolution(fl_master_abstract, jaxb_anf)
    report = structural_match(fl_master_abstract, jaxb_anf, mapping)
    assert len(report.pairs) == 10
    strengths = [pair.strength for pair in report.pairs]
    assert strengths.count("strong") == 6
    assert strengths.count("weak") == 4
    assert report.residue == []
    # row order follows the servant's production order
    assert [pair.left.lhs for pair in report.pairs] == [
        "Expr", "Expr", "Expr", "Expr", "Expr",
        "Function", "Program", "Expr_1", "Expr_2", "Expr_3"]
    assert [pair.right.lhs for pair in report.pairs] == [
        "expression", "expression", "expression", "expression", "expression",
        "function", "program", "apply", "binary", "conditional"]


def test_structural_match_identity_has_empty_trace(jaxb_anf):
    mapping = nominal_resolution(jaxb_anf, jaxb_anf)
    report = structural_match(jaxb_anf, jaxb_anf, mapping)
    assert report.structural_trace == []
    assert all(pair.strength == "strong" for pair in report.pairs)
    assert report.residue == []


def test_structural_match_records_permutation():
    master = Grammar(("m",), (p("m", seq(n("a"), n("b"), n("c"))),
                              p("a", seq(VALUE_STR, VALUE_STR)),
                              p("b", seq(VALUE_INT, VALUE_INT)),
                              p("c", seq(VALUE_STR, VALUE_INT))))
    servant = Grammar(("m2",), (p("m2", seq(n("c2"), n("a2"), n("b2"))),
                                p("a2", seq(VALUE_STR, VALUE_STR)),
                                p("b2", seq(VALUE_INT, VALUE_INT)),
                                p("c2", seq(VALUE_STR, VALUE_INT))))
    mapping = NominalMapping(frozenset(
        [("m2", "m"), ("a2", "a"), ("b2", "b"), ("c2", "c"),
         ("str", "str"), ("int", "int")]))
    report = structural_match(master, servant, mapping)
    permutes = [step for step in report.structural_trace if step.op == "permute"]
    assert len(permutes) == 1
    assert permutes[0].args["order"] == [3, 1, 2]
    replayed = apply_script(servant, report.structural_trace)
    assert replayed.rules_of("m2")[0].rhs == seq(n("a2"), n("b2"), n("c2"))


def test_structural_match_permutation_under_identity_naming():
    shared = (p("a", seq(VALUE_STR, VALUE_STR)),
              p("b", seq(VALUE_INT, VALUE_INT)),
              p("c", seq(VALUE_STR, VALUE_INT)))
    master = Grammar(("m",), (p("m", seq(n("a"), n("b"), n("c"))),) + shared)
    servant = Grammar(("m",), (p("m", seq(n("c"), n("a"), n("b"))),) + shared)
    mapping = NominalMapping(frozenset(
        [("m", "m"), ("a", "a"), ("b", "b"), ("c", "c"),
         ("str", "str"), ("int", "int")]))
    report = structural_match(master, servant, mapping)
    permutes = [step for step in report.structural_trace if step.op == "permute"]
    assert [step.args["order"] for step in permutes] == [[3, 1, 2]]


def test_structural_match_requires_total_mapping(fl_master_abstract, jaxb_anf):
    with pytest.raises(MatchError):
        structural_match(fl_master_abstract, jaxb_anf,
                         NominalMapping(frozenset([("Expr", "expression")])))


def test_structural_match_unmatchable_goes_to_residue():
    master = Grammar(("m",), (p("m", seq(n("a"), n("a"))), p("a", seq(VALUE_STR, VALUE_STR))))
    servant = Grammar(("s",), (p("s", plus(n("b"))), p("b", seq(VALUE_STR, VALUE_STR))))
    mapping = NominalMapping(frozenset([("s", "m"), ("b", "a"), ("str", "str")]))
    report = structural_match(master, servant, mapping)
    sides = {entry.side for entry in report.residue}
    assert sides == {"servant", "master"}


# -- the pipeline ------------------------------------------------------------------


def test_guided_converge_reproduces_case_study_mapping(fl_master_abstract, jaxb_model):
    report = guided_converge(fl_master_abstract, jaxb_model)
    assert report.mapping.as_dict() == FL_MAPPING
    assert report.residue == []
    assert report.warnings == []
    assert len(report.normalization_trace) > 0


def test_guided_converge_trivial(jaxb_anf):
    report = guided_converge(jaxb_anf, jaxb_anf)
    assert report.residue == []
    assert report.structural_trace == []
    assert all(a == b for a, b in report.mapping.pairs)


def test_guided_converge_deyaccifies_before_normalizing(fl_master_abstract, jaxb_model):
    # encode the Program repetition through explicit recursion, as an old
    # parser generator would force
    yaccified = Grammar(("Program",), (
        p("Program", n("Function")),
        p("Program", seq(n("Program"), n("Function"))),
    ) + jaxb_model.productions[:2])
    report = guided_converge(fl_master_abstract, yaccified)
    steps = [step.op for step in report.normalization_trace]
    assert steps[0] == "deyaccify"
    assert {a: b for a, b in report.mapping.pairs}["Program"] == "program"


def test_guided_converge_normalizes_unnormalized_master(jaxb_model):
    report = guided_converge(jaxb_model, jaxb_model)
    assert report.warnings
    assert report.residue == []


def test_replay_convergence_reaches_master_shape(fl_master_abstract, jaxb_model):
    from gramconv.converge import replay_convergence
    from gramconv.grammar import rename_expr
    report = guided_converge(fl_master_abstract, jaxb_model)
    replayed = replay_convergence(jaxb_model, report)
    mapping = report.mapping.as_dict()
    got = sorted(((mapping.get(prod.lhs, prod.lhs), rename_expr(prod.rhs, mapping))
                  for prod in replayed.productions), key=repr)
    want = sorted(((prod.lhs, prod.rhs) for prod in fl_master_abstract.productions),
                  key=repr)
    assert got == want


# -- metrics and rendering -----------------------------------------------------------


def test_sig_metrics_fl_master(fl_master):
    metrics = sig_metrics(fl_master)
    assert metrics.productions == 10
    assert metrics.footprint_histogram["1"] == 8
    assert metrics.signature_sizes[0] == ("program", 1)
    assert metrics.signature_sizes[1] == ("function", 2)


def test_sig_metrics_empty():
    metrics = sig_metrics(Grammar((), ()))
    assert metrics.productions == 0
    assert metrics.distinct_footprints == 0
    assert metrics.footprint_histogram == {}


def test_sig_metrics_normalized_servant(jaxb_anf):
    metrics = sig_metrics(jaxb_anf)
    # hand tally over the ten signatures: 1, 11, 111, 1*, *
    assert metrics.distinct_footprints == 5
    assert metrics.footprint_histogram == {"1": 8, "11": 1, "111": 1, "1*": 1, "*": 2}


def test_prodsig_table_rendering(fl_master):
    table = render_prodsig_table(fl_master)
    lines = table.splitlines()
    assert len(lines) == 10
    assert lines[0].startswith("p1 = program -> function+")
    assert "{<function, +>}" in lines[0]
    assert "{<expr, 1>, <str, 1+>}" in lines[1]


def test_match_report_rendering(fl_master_abstract, jaxb_model):
    report = guided_converge(fl_master_abstract, jaxb_model)
    text = render_match_report(report)
    assert text.count("=~=") == 6
    assert text.count("~w~") == 4
    assert "<Ops, operator>" in text


# -- renaming invariance --------------------------------------------------------------


def test_mapping_invariant_under_servant_rename(fl_master_abstract, jaxb_model):
    renamed = rename_nonterminal(jaxb_model, "Function", "Fn")
    report = guided_converge(fl_master_abstract, renamed)
    expected = dict(FL_MAPPING)
    expected["Fn"] = expected.pop("Function")
    assert report.mapping.as_dict() == expected
