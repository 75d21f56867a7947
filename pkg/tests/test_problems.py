import random
from itertools import permutations

import pytest
from hypothesis import given, settings, strategies as st

from relim.errors import ArityError, ParseError, SizeError, UnsupportedVariantError
from relim.diagram import at_least_as_strong, compute_diagram, gen_closure
from relim.labels import parse_label_token as lab
from relim.problems import (
    CondensedConfiguration,
    Problem,
    config_matches,
    expand_configurations,
    expand_constraint,
    format_problem,
    parse_problem,
    problems_equal,
)
from relim.relax import is_relaxation, relaxes_to
from relim.zeroround import PortConstraint, zero_round_check

from conftest import MIS_TEXT, random_problem


# ---------------------------------------------------------------------------
# parsing and printing


def test_parse_mis_compact(mis):
    assert {l.token for l in mis.labels} == {"M", "P", "U"}
    assert mis.delta_n == 3 and mis.delta_e == 2
    assert len(mis.node_constraint) == 2
    assert len(mis.edge_constraint) == 2


def test_parse_format_roundtrip(mis):
    text = format_problem(mis)
    again = parse_problem(text)
    assert again == mis
    assert format_problem(again) == text


def test_parse_accepts_unreferenced_node_labels():
    p = parse_problem("nodes: A^2 ; edges: A B")
    assert {l.token for l in p.labels} == {"A", "B"}


def test_parse_arity_mismatch_against_header():
    with pytest.raises(ArityError):
        parse_problem("delta 3 2\nnodes:\nA^2\nedges:\nA B\n")


def test_parse_empty_sections_legal_with_header():
    p = parse_problem("delta 3 2\nnodes:\nedges:\n")
    assert not p.node_constraint and not p.edge_constraint
    assert zero_round_check(p).solvable is False


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as err:
        parse_problem("nodes:\nA [B\nedges:\nA A\n")
    assert err.value.line == 2


def test_parse_rejects_zero_repetition():
    with pytest.raises(ParseError):
        parse_problem("nodes: A^0 B^3 ; edges: A A")


def test_comments_and_blank_lines_ignored():
    p = parse_problem("# hi\nnodes: # inline\nA^3\n\nedges:\nA A\n")
    assert len(p.node_constraint) == 1


def test_set_label_and_color_tokens_roundtrip():
    text = "delta 2 2\nnodes:\n<U1,X> <X>\nedges:\nL{0.1,1.2} P2\n"
    p = parse_problem(text)
    assert format_problem(p) == text
    tokens = {l.token for l in p.labels}
    assert "<U1,X>" in tokens and "L{0.1,1.2}" in tokens


@st.composite
def problems(draw):
    rng = random.Random(draw(st.integers(0, 10**6)))
    return random_problem(rng, delta=draw(st.integers(2, 4)), num_labels=draw(st.integers(1, 4)))


@given(problems())
@settings(max_examples=60, deadline=None)
def test_canonicalization_roundtrip_property(p):
    assert parse_problem(format_problem(p)) == p


# ---------------------------------------------------------------------------
# expansion


def test_expand_disjunction():
    p = parse_problem("nodes: W [X_ Y] Z ; edges: W W")
    (cfg,) = [c for c in p.node_constraint]
    concrete = {tuple(l.token for l in t) for t in cfg.expand()}
    assert concrete == {("W", "X_", "Z"), ("W", "Y", "Z")}


def test_expand_no_disjunction_single():
    cfg = CondensedConfiguration.of_labels([lab("A")] * 3)
    assert len(cfg.expand()) == 1


def test_expand_multiset_dedup():
    p = parse_problem("nodes: [A B]^2 ; edges: A A")
    (cfg,) = list(p.node_constraint)
    concrete = {tuple(l.token for l in t) for t in cfg.expand()}
    assert concrete == {("A", "A"), ("A", "B"), ("B", "B")}


def test_expand_cap():
    labels = [lab(f"A{i}") for i in range(10)]
    cfg = CondensedConfiguration.make([frozenset(labels)] * 8)
    with pytest.raises(SizeError):
        expand_configurations({cfg}, cap=10**4)


def test_config_matches_permutation():
    p = parse_problem("nodes: A [B C] D ; edges: A A")
    (cfg,) = list(p.node_constraint)
    assert config_matches(cfg, tuple(sorted([lab("D"), lab("C"), lab("A")])))
    assert not config_matches(cfg, tuple(sorted([lab("D"), lab("D"), lab("A")])))


# ---------------------------------------------------------------------------
# diagrams and closures


def test_mis_edge_diagram(mis):
    d = compute_diagram(mis, "edge")
    assert d.edges == frozenset({(lab("P"), lab("U"))})
    assert all(len(c) == 1 for c in d.classes)


def test_family_edge_diagram_matches_stated_relations():
    # the family member for z=[1,2,1]: relations per the stated edge order
    from relim.family import build_family_problem, family_edge_gen

    p = build_family_problem(5, [1, 2, 1])
    d = compute_diagram(p, "edge")
    for weak in p.labels:
        assert d.successors(weak) == family_edge_gen([weak], [1, 2, 1])


def test_singleton_constraint_no_edges():
    p = parse_problem("delta 2 2\nnodes:\nA A\nedges:\nA A\n")
    d = compute_diagram(p, "edge")
    assert d.edges == frozenset()


def test_empty_constraint_all_equal_strength():
    p = parse_problem("delta 2 2\nnodes:\nA B\nedges:\n")
    d = compute_diagram(p, "edge")
    assert len(d.classes) == 1 and len(d.classes[0]) == 2


def test_gen_closure_examples():
    from relim.family import build_family_problem

    p = build_family_problem(3, [1, 1])
    d = compute_diagram(p, "edge")
    # the wildcard is maximal: gen of X is X alone
    assert gen_closure([lab("X")], d) == frozenset({lab("X")})
    # gen of the level-1 singleton color: itself, U_1, X
    got = gen_closure([lab("L{1.1}")], d)
    assert got == frozenset({lab("L{1.1}"), lab("U1"), lab("X")})
    assert gen_closure([], d) == frozenset()


def test_gen_closure_unknown_label(mis):
    d = compute_diagram(mis, "edge")
    with pytest.raises(Exception):
        gen_closure([lab("Zq")], d)


def test_gen_closure_right_closed_and_minimal():
    from relim.family import build_family_problem

    p = build_family_problem(3, [2])
    d = compute_diagram(p, "edge")
    for start in p.labels:
        closed = gen_closure([start], d)
        assert gen_closure(closed, d) == closed
        for drop in closed - {start}:
            smaller = closed - {drop}
            assert gen_closure(smaller, d) != smaller


def test_diagram_soundness_brute_force():
    # every diagram edge is backed by the replacement property on expansions
    rng = random.Random(5)
    for _ in range(25):
        p = random_problem(rng, delta=rng.randint(2, 4), num_labels=rng.randint(2, 4))
        for side, constraint in (("node", p.node_constraint), ("edge", p.edge_constraint)):
            d = compute_diagram(p, side)
            expanded = expand_constraint(constraint)
            for weak, strong in d.edges:
                for t in expanded:
                    if weak not in t:
                        continue
                    count = t.count(weak)
                    rest = [l for l in t if l != weak]
                    for k in range(1, count + 1):
                        swapped = tuple(sorted(rest + [weak] * (count - k) + [strong] * k))
                        assert swapped in expanded


# ---------------------------------------------------------------------------
# relaxation


def test_relaxation_slotwise_superset():
    a = CondensedConfiguration.of_labels([lab("<A>"), lab("<B>")])
    b = CondensedConfiguration.of_labels([lab("<A,C>"), lab("<B>")])
    assert relaxes_to(a, b).ok


def test_relaxation_reflexive(mis):
    for cfg in mis.node_constraint | mis.edge_constraint:
        assert relaxes_to(cfg, cfg).ok


def test_relaxation_needs_permutation_witness():
    a = CondensedConfiguration.of_labels([lab("<A,B>"), lab("<C>")])
    b = CondensedConfiguration.of_labels([lab("<A>"), lab("<B,C>")])
    assert not relaxes_to(a, b).ok


def test_relaxation_arity_mismatch():
    a = CondensedConfiguration.of_labels([lab("A")])
    b = CondensedConfiguration.of_labels([lab("A"), lab("A")])
    with pytest.raises(ArityError):
        relaxes_to(a, b)


def test_relaxation_transitive_on_random_set_labels():
    rng = random.Random(11)
    base = [lab(c) for c in "ABCDE"]
    def random_cfg():
        return CondensedConfiguration.of_labels(
            [lab("<" + ",".join(sorted({l.token for l in rng.sample(base, rng.randint(1, 3))})) + ">")
             for _ in range(3)]
        )
    cfgs = [random_cfg() for _ in range(60)]
    for a in cfgs[:20]:
        for b in cfgs[20:40]:
            if not relaxes_to(a, b).ok:
                continue
            for c in cfgs[40:]:
                if relaxes_to(b, c).ok:
                    assert relaxes_to(a, c).ok


# ---------------------------------------------------------------------------
# zero-round solvability


def test_zero_round_mis_unsolvable(mis):
    res = zero_round_check(mis)
    assert not res.solvable
    assert res.failing_pair is not None


def test_zero_round_trivial_solvable():
    p = parse_problem("delta 3 2\nnodes:\nA^3\nedges:\nA A\n")
    res = zero_round_check(p)
    assert res.solvable
    assert tuple(l.token for l in res.witness) == ("A", "A", "A")


def test_zero_round_rejects_constrained_ports(mis):
    with pytest.raises(UnsupportedVariantError):
        zero_round_check(mis, PortConstraint(unconstrained=False))


def test_zero_round_rejects_hypergraph():
    p = parse_problem("delta 3 3\nnodes:\nA^3\nedges:\nA^3\n")
    with pytest.raises(UnsupportedVariantError):
        zero_round_check(p)


def _star_oracle(p: Problem) -> bool:
    """Enumerate every (configuration, port assignment) on two adjacent
    full-degree centers; the adversary picks which ports share the edge."""
    delta = p.delta_n
    edge_pairs = expand_constraint(p.edge_constraint)
    for config in expand_constraint(p.node_constraint):
        for sigma in permutations(range(delta)):
            ok = True
            for pu in range(delta):
                for pv in range(delta):
                    pair = tuple(sorted((config[sigma[pu]], config[sigma[pv]])))
                    if pair not in edge_pairs:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                return True
    return False


def test_zero_round_agrees_with_star_oracle():
    rng = random.Random(2024)
    for _ in range(100):
        p = random_problem(rng, delta=3, num_labels=rng.randint(1, 4))
        assert zero_round_check(p).solvable == _star_oracle(p)


# ---------------------------------------------------------------------------
# equality helpers


def test_problems_equal_across_condensed_forms():
    a = parse_problem("nodes: A [A B] ; edges: A [A B] | B B")
    b = parse_problem("nodes: A A | A B ; edges: A A | [A B] B | A B")
    assert problems_equal(a, b)
    assert a != b  # structural forms differ, expanded sets agree
