import math
import random
from itertools import product

import pytest

from relim.errors import DomainError, InternalInconsistencyError
from relim.labels import ColorId, parse_label_token as lab
from relim.problems import (
    expand_constraint,
    format_problem,
    parse_problem,
    problems_equal,
)
from relim.family import (
    ArbdefectVector,
    FamilyIntermediates,
    FamilyVector,
    build_family_problem,
    build_fixedpoint_variant,
    expected_intermediate,
    family_colors,
    family_step,
    lower_bound_length,
    prefix_iter,
    prefix_vector,
    project_labeling,
    ruling_set_lower_bound,
)


# ---------------------------------------------------------------------------
# generators


def test_family_delta3_full_vector_is_the_listed_table():
    p = build_family_problem(3, [3])
    assert len(p.labels) == 8
    assert len(p.node_constraint) == 7
    assert len(p.edge_constraint) == 8
    # color configurations pad with exactly |C|-1 wildcards
    rows = {c.render() for c in p.node_constraint}
    assert "L{0.1}^3" in rows
    assert "L{0.1,0.2}^2 X" in rows
    assert "L{0.1,0.2,0.3} X^2" in rows


def test_family_small_vector_by_hand():
    p = build_family_problem(3, [1])
    assert {l.token for l in p.labels} == {"L{0.1}", "X"}
    assert {c.render() for c in p.node_constraint} == {"L{0.1}^3"}
    assert expand_constraint(p.edge_constraint) == {
        (lab("L{0.1}"), lab("X")),
        (lab("X"), lab("X")),
    }


def test_family_rejects_oversized_vector():
    with pytest.raises(DomainError):
        build_family_problem(3, [4])


def test_family_edge_constraint_definition():
    # brute-force the stated edge compatibility over all label pairs
    z = [1, 2]
    p = build_family_problem(4, z)
    expanded = expand_constraint(p.edge_constraint)
    colors = family_colors(FamilyVector.make(z))

    def level(cs):
        return max((c.level for c in cs), default=-1)

    def compatible(a, b):
        if a.token == "X" or b.token == "X":
            return True
        if a.pointer and b.pointer:
            (ka, ia), (kb, ib) = a.pointer, b.pointer
            if ka == kb == "U":
                return True
            if {ka, kb} == {"P", "U"}:
                (pi, ui) = (ia, ib) if ka == "P" else (ib, ia)
                return ui < pi
            return False
        if a.pointer or b.pointer:
            ptr, col = (a, b) if a.pointer else (b, a)
            kind, i = ptr.pointer
            return kind == "U" or level(col.colors) < i
        return not (a.colors & b.colors)

    for a in p.labels:
        for b in p.labels:
            assert (tuple(sorted((a, b))) in expanded) == compatible(a, b)


def test_family_edge_constraint_closed_under_color_subsets():
    # shrinking either color set (wildcard = empty) keeps an edge pair allowed
    for delta, z in [(3, [2, 1]), (4, [2, 2])]:
        p = build_family_problem(delta, z)
        expanded = expand_constraint(p.edge_constraint)
        color_labels = [l for l in p.labels if l.colors is not None]
        for pair in list(expanded):
            for i, l in enumerate(pair):
                if l.colors is None or not l.colors:
                    continue
                for smaller in color_labels:
                    if smaller.colors < l.colors:
                        shrunk = tuple(sorted((pair[1 - i], smaller)))
                        assert shrunk in expanded


def test_variant_contains_family_configurations_and_supersets():
    delta = 3
    var = build_fixedpoint_variant(delta)
    base = build_family_problem(delta, [delta])
    assert expand_constraint(base.node_constraint) <= expand_constraint(var.node_constraint)
    assert expand_constraint(base.edge_constraint) == expand_constraint(var.edge_constraint)
    # slotwise color-superset closure on the node side
    expanded = expand_constraint(var.node_constraint)
    for cfg in list(expanded)[:40]:
        for i, l in enumerate(cfg):
            for other in var.labels:
                if other.colors is not None and other.colors >= l.colors:
                    grown = tuple(sorted(cfg[:i] + (other,) + cfg[i + 1 :]))
                    assert grown in expanded


def test_variant_matches_intersection_condition_enumeration():
    delta = 3
    var = build_fixedpoint_variant(delta)
    expanded = expand_constraint(var.node_constraint)
    labels = sorted(var.labels)

    def admits(cfg):
        sets = [l.colors for l in cfg]
        for k in range(1, delta + 1):
            from itertools import combinations

            for idx in combinations(range(delta), k):
                inter = frozenset.intersection(*(sets[i] for i in idx))
                if len(inter) >= delta - k + 1:
                    return True
        return False

    from itertools import combinations_with_replacement

    for cfg in combinations_with_replacement(labels, delta):
        assert (tuple(sorted(cfg)) in expanded) == admits(cfg)


# ---------------------------------------------------------------------------
# prefix dynamics and lower-bound lengths


def test_prefix_examples():
    assert prefix_vector([1, 0, 0]).entries == (1, 1, 1)
    assert prefix_vector([3]).entries == (3,)
    assert prefix_iter([1, 0], 3).entries == (1, 3)


def test_prefix_binomial_closed_form():
    for beta in range(1, 9):
        z = [1] + [0] * beta
        for j in range(1, 12):
            v = prefix_iter(z, j)
            for k in range(beta + 1):
                assert v.entries[k] == math.comb(j + k - 1, k)


def test_lower_bound_length_examples():
    assert lower_bound_length(3, [3]).infinite
    assert lower_bound_length(10, [1, 1]).t == 7
    assert lower_bound_length(3, [0, 0, 2]).infinite  # stabilizes below delta
    assert lower_bound_length(3, [1, 1]).t == 0
    assert lower_bound_length(3, [2, 1]).t is None  # already at the threshold


def test_lower_bound_length_firstnonzero_closed_form():
    # with z = [k,0,...,0] the threshold is the largest t with k*C(t+beta,beta) < delta
    for delta in (5, 9, 16, 33):
        for k in (1, 2, 3):
            for beta in (1, 2, 3):
                z = [k] + [0] * beta
                got = lower_bound_length(delta, z)
                want = -1
                t = 0
                while k * math.comb(t + beta, beta) < delta:
                    want = t
                    t += 1
                assert not got.infinite
                assert (got.t if got.t is not None else -1) == want


def test_ruling_set_lower_bound_examples():
    assert ruling_set_lower_bound(16, 0, 1, 2).t == 4
    for delta in (5, 12, 40):
        assert ruling_set_lower_bound(delta, 0, 1, 1).t == delta - 2
    res = ruling_set_lower_bound(16, 0, 1, 2)
    assert res.reduced == res.t - 2


def test_ruling_set_bound_respects_larget_floor():
    e = math.e
    for beta in range(1, 7):
        for delta in (2**10, 2**16, 2**20):
            x = delta
            if beta > math.log(x) / (2 * e):
                continue
            t0 = math.floor((beta / (2 * e)) * x ** (1 / beta))
            assert ruling_set_lower_bound(delta, 0, 1, beta).t >= t0


# ---------------------------------------------------------------------------
# intermediate oracles


def test_re_edge_oracle_single_color():
    oracle = expected_intermediate(3, [1], "re-edge")
    rows = {c.render() for c in oracle.constraint}
    assert rows == {"<L{0.1},X> <X>"}


def test_oracle_precondition():
    with pytest.raises(DomainError):
        expected_intermediate(3, [1, 2], "re-edge")  # |z| = 3 > delta - 1


def test_keytec_oracle_contains_pointer_rows():
    oracle = expected_intermediate(3, [1, 1], "keytec-node")
    arities = {c.arity for c in oracle.constraint}
    assert arities == {3}
    interm = FamilyIntermediates(3, [1, 1])
    pointer_rows = [
        row for row, meta in interm.star_node_rows if meta["kind"] == "pointer"
    ]
    assert pointer_rows == [[("GP", 1), ("GU", 1), ("GU", 1)]]


def test_estar_oracle_pairs_wildcard_with_everything():
    interm = FamilyIntermediates(3, [1, 1])
    x = interm.star_label[("X",)]
    pairs = expand_constraint(interm.star_edge_constraint)
    for l in interm.star_label.values():
        assert tuple(sorted((x, l))) in pairs


def test_gg_closures_are_member_superset_closures():
    interm = FamilyIntermediates(3, [1, 1])
    for desc, members in interm.star_descriptor.items():
        for t in members:
            assert t in interm.sigma_re
        # closure: any sigma_re element containing a member's base stays inside
        for other in interm.sigma_re:
            if any(other.members >= m.members for m in members):
                assert other in members


def test_engine_matches_oracles_small():
    from relim.roundelim import apply_re, apply_rere
    from relim.relax import is_relaxation

    for delta, z in [(3, [1]), (3, [1, 0]), (3, [2]), (3, [1, 1])]:
        base = build_family_problem(delta, z)
        interm = FamilyIntermediates(delta, z)
        eng = apply_re(base)
        assert problems_equal(eng, interm.re_problem)
        rere = apply_rere(eng)
        assert is_relaxation(rere, interm.star_problem).ok


# ---------------------------------------------------------------------------
# projection


def test_projection_color_counts():
    interm = FamilyIntermediates(3, [1, 1])
    assert interm.projected_vector().entries == (1, 2)
    table = interm._pair_table()
    assert len(table) == 3  # (c01,0), (c01,1), (c11,1)
    assert table[(ColorId(0, 1), 0)] == ColorId(0, 1)


def test_projection_rules_on_labelings():
    interm = FamilyIntermediates(3, [1, 1])
    gp, gu = interm.star_label[("GP", 1)], interm.star_label[("GU", 1)]
    x = interm.star_label[("X",)]
    # wildcard-only node
    out = project_labeling({0: {1: x, 2: x, 3: x}}, interm)
    assert {l.token for l in out[0].values()} == {"X"}
    # pointer configuration maps to pointer labels
    out = project_labeling({0: {1: gp, 2: gu, 3: gu}}, interm)
    assert out[0][1].token == "P1" and out[0][2].token == "U1"


def test_projection_pads_when_levels_differ():
    interm = FamilyIntermediates(3, [1, 0])
    # the i=j+1 form: C={c01}, j=0, i=1 has one wildcard already and gains one
    desc = ("K", frozenset({ColorId(0, 1)}), 1, 0)
    k = interm.star_label[desc]
    x = interm.star_label[("X",)]
    out = project_labeling({0: {1: k, 2: k, 3: x}}, interm)
    tokens = sorted(l.token for l in out[0].values())
    assert tokens.count("X") == 1
    colored = [t for t in tokens if t.startswith("L")]
    assert colored and all(t == "L{0.1,1.1}" for t in colored)


def test_projection_problem_image_is_valid():
    for delta, z in [(3, [1, 0]), (3, [1, 1]), (4, [1, 1]), (4, [1, 0, 0])]:
        interm = FamilyIntermediates(delta, z)
        target = interm.project_problem()  # raises on any invalid image
        assert problems_equal(target, build_family_problem(delta, interm.projected_vector()))


# ---------------------------------------------------------------------------
# one verified step


def test_family_step_label_bound_and_target():
    trace = family_step(3, [1, 0])
    assert trace.stats["label_bound_ok"]
    assert problems_equal(trace.output, build_family_problem(3, [1, 1]))


def test_arbdefect_vector_capacity():
    v = ArbdefectVector.make([0, 1, 2])
    assert v.capacity == 6
    assert v.is_relaxed(1, 5) and not v.is_relaxed(1, 6)
