import random

import pytest

from relim.caps import EngineCaps
from relim.diagram import compute_diagram, gen_closure
from relim.errors import ArityError, CapExceededError, StrengthenError
from relim.labels import parse_label_token as lab, set_label
from relim.problems import (
    CondensedConfiguration,
    expand_constraint,
    format_problem,
    parse_problem,
    problems_equal,
)
from relim.relax import is_relaxation
from relim.roundelim import (
    RenamingPolicy,
    apply_re,
    apply_relaxations,
    apply_rere,
    detect_fixed_point,
    rename_labels,
    run_sequence,
    step,
    universal_maximal,
)

from conftest import random_problem, sinkless_text

POLS = (RenamingPolicy.union(), RenamingPolicy.intersection())


def _sinkless_renaming(out):
    W, B = lab("W"), lab("B")
    return rename_labels(
        out, RenamingPolicy.explicit({set_label([W]): W, set_label([W, B]): B})
    )


@pytest.mark.parametrize("delta", [3, 4, 5])
def test_sinkless_orientation_step(delta):
    p = parse_problem(sinkless_text(delta))
    renamed = _sinkless_renaming(apply_re(p))
    want = parse_problem(
        f"delta {delta} {delta}\nnodes:\nB [B W]^{delta - 1}\nedges:\nB^{delta - 1} W\n"
    )
    assert problems_equal(renamed, want)


def test_re_requires_edge_rank_at_most_degree():
    p = parse_problem("delta 2 3\nnodes:\nA A\nedges:\nA^3\n")
    with pytest.raises(ArityError):
        apply_re(p)


def test_re_empty_edge_constraint_yields_empty_problem():
    p = parse_problem("delta 3 2\nnodes:\nA^3\nedges:\n")
    out = apply_re(p)
    assert not out.labels and not out.edge_constraint and not out.node_constraint


def test_re_cap_exceeded():
    p = parse_problem("delta 7 7\nnodes:\nA^7\nedges:\nA^7\n")
    with pytest.raises(CapExceededError):
        apply_re(p)


def test_rere_on_unconstrained_nodes_gives_full_edge_relaxation():
    # every node tuple allowed: the single maximal node set carries all labels
    p = parse_problem("delta 2 2\nnodes:\n[A B]^2\nedges:\nA B\n")
    out = apply_rere(p)
    (cfg,) = list(out.node_constraint)
    assert all(len(s) == 1 for s in cfg.slots)
    (label,) = {next(iter(s)) for s in cfg.slots}
    assert label.members == frozenset({lab("A"), lab("B")})
    # the existential edge side pairs every containing set
    assert len(expand_constraint(out.edge_constraint)) == 1


# ---------------------------------------------------------------------------
# quantifier invariants


def _universal_output_checks(p, side):
    constraint = p.edge_constraint if side == "edge" else p.node_constraint
    arity = p.delta_e if side == "edge" else p.delta_n
    if not constraint:
        return
    expanded = expand_constraint(constraint)
    labels = sorted({l for t in expanded for l in t})
    tuples = universal_maximal(constraint, arity, EngineCaps())

    from itertools import product

    for t in tuples:
        # soundness: every choice lies in the expansion
        for choice in product(*t):
            assert tuple(sorted(choice)) in expanded
        # maximality: enlarging any slot by any absent label breaks soundness
        for i, slot in enumerate(t):
            for extra in labels:
                if extra in slot:
                    continue
                grown = list(t)
                grown[i] = slot | {extra}
                violated = any(
                    tuple(sorted(choice)) not in expanded for choice in product(*grown)
                )
                assert violated, f"slot {i} of {t} tolerates {extra.token}"
    # completeness against brute force on small instances
    if len(labels) <= 4 and arity <= 3:
        from itertools import combinations_with_replacement, chain, combinations

        def all_sets():
            return [
                frozenset(c)
                for r in range(1, len(labels) + 1)
                for c in combinations(labels, r)
            ]

        valid = []
        for combo in combinations_with_replacement(all_sets(), arity):
            if all(tuple(sorted(ch)) in expanded for ch in product(*combo)):
                valid.append(tuple(sorted(combo, key=lambda s: sorted(l.token for l in s))))
        maximal = set()
        from relim.roundelim import _dominates

        for cand in set(valid):
            if not any(c != cand and _dominates(c, cand) for c in set(valid)):
                maximal.add(cand)
        assert set(tuples) == maximal


def test_universal_quantifier_invariants_random():
    rng = random.Random(99)
    for _ in range(20):
        p = random_problem(rng, delta=rng.randint(2, 3), num_labels=rng.randint(2, 4))
        _universal_output_checks(p, "edge")
        _universal_output_checks(p, "node")


def test_set_labels_right_closed_after_re():
    # labels of the re output are right-closed w.r.t. the input edge order
    from relim.family import build_family_problem

    for delta, z in [(3, [2]), (3, [1, 1])]:
        p = build_family_problem(delta, z)
        d = compute_diagram(p, "edge")
        out = apply_re(p)
        for l in out.labels:
            members = l.members
            assert gen_closure(members, d) == members


def test_set_labels_right_closed_after_rere():
    # rere output labels are right-closed w.r.t. the intermediate node order
    from relim.family import build_family_problem

    p = build_family_problem(3, [1, 1])
    intermediate = apply_re(p)
    d = compute_diagram(intermediate, "node")
    out = apply_rere(intermediate)
    for l in out.labels:
        assert gen_closure(l.members, d) == l.members


def test_subsetarrow_on_re_output():
    # subset set-labels are at least as weak in the re node order
    from relim.family import build_family_problem

    p = build_family_problem(3, [1, 1])
    out = apply_re(p)
    d = compute_diagram(out, "node")
    for a in out.labels:
        for b in out.labels:
            if a.members < b.members:
                assert d.stronger_or_equal(a, b)


def test_abc123_on_family_instances():
    # strength order on re-output labels coincides with member inclusion
    from relim.family import build_family_problem

    for delta, z in [(3, [1, 1]), (3, [2]), (4, [1, 1])]:
        p = build_family_problem(delta, z)
        out = apply_re(p)
        d = compute_diagram(out, "node")
        for a in out.labels:
            for b in out.labels:
                if d.stronger_or_equal(a, b):
                    assert a.members <= b.members


# ---------------------------------------------------------------------------
# renaming


def test_union_and_intersection_renaming():
    la, lab_ab = lab("L{0.1}"), lab("L{0.1,0.2}")
    s = set_label([la, lab_ab])
    p = parse_problem("delta 2 2\nnodes:\n<L{0.1},L{0.1,0.2}>^2\nedges:\n<L{0.1},L{0.1,0.2}>^2\n")
    assert s in p.labels
    union = rename_labels(p, RenamingPolicy.union())
    assert {l.token for l in union.labels} == {"L{0.1,0.2}"}
    inter = rename_labels(p, RenamingPolicy.intersection())
    assert {l.token for l in inter.labels} == {"L{0.1}"}


def test_identity_explicit_map(mis):
    assert rename_labels(mis, RenamingPolicy.explicit({})) == mis


def test_step_trace_records_intermediate(mis):
    trace = step(mis)
    assert trace.intermediate is not None and trace.output is not None
    assert trace.stats["input"]["labels"] == 3


# ---------------------------------------------------------------------------
# fixed points


def test_mis_is_not_a_fixed_point(mis):
    result = detect_fixed_point(mis, (RenamingPolicy.none(), RenamingPolicy("search-bijection")))
    assert not result.is_fixed_point


def test_self_reproducing_trivial_problem():
    p = parse_problem("delta 3 2\nnodes:\nA^3\nedges:\nA A\n")
    result = detect_fixed_point(p, (RenamingPolicy.none(), RenamingPolicy("search-bijection")))
    assert result.is_fixed_point


def test_family_fixed_point_delta3():
    from relim.family import build_family_problem

    result = detect_fixed_point(build_family_problem(3, [3]), POLS)
    assert result.is_fixed_point


# ---------------------------------------------------------------------------
# relaxation actions


def test_add_edge_configuration_is_relaxation(mis):
    cfg = CondensedConfiguration.of_labels([lab("M"), lab("M")])
    out = apply_relaxations(mis, [{"kind": "add_configuration", "side": "edge", "configuration": cfg}])
    assert is_relaxation(mis, out).ok
    assert len(out.edge_constraint) == 3


def test_strengthening_map_rejected():
    p = parse_problem("delta 2 2\nnodes:\n<A,B> <A>\nedges:\n<A> <A>\n")
    with pytest.raises(StrengthenError):
        apply_relaxations(
            p, [{"kind": "map_to_superset", "mapping": {lab("<A,B>"): lab("<A>")}}]
        )


def test_relax_constraint_to_requires_relaxation(mis):
    harder = parse_problem("nodes: M^3 ; edges: M M")
    with pytest.raises(StrengthenError):
        apply_relaxations(mis, [{"kind": "relax_constraint_to", "problem": harder}])


def test_no_deletion_action_exists(mis):
    from relim.errors import PolicyError

    cfg = next(iter(mis.node_constraint))
    with pytest.raises(PolicyError):
        apply_relaxations(
            mis, [{"kind": "delete_configuration", "side": "node", "configuration": cfg}]
        )


# ---------------------------------------------------------------------------
# sequences


def test_run_sequence_rejects_zero_steps(mis):
    with pytest.raises(ArityError):
        run_sequence(mis, 0)


def test_fixed_point_sequence_is_constant():
    from relim.family import build_family_problem

    p = build_family_problem(3, [3])
    traces = run_sequence(p, 3, rename_re=POLS[0], rename_rere=POLS[1])
    assert len(traces) == 3
    for t in traces:
        assert problems_equal(t.output, p)
    assert traces[0].output == traces[1].input


def test_family_sequence_matches_generator():
    from relim.family import build_family_problem, run_family_sequence

    traces = run_family_sequence(3, [1, 0], 2)
    assert problems_equal(traces[0].output, build_family_problem(3, [1, 1]))
    assert problems_equal(traces[1].output, build_family_problem(3, [1, 2]))
