"""Relaxation checks between configurations, constraints, and problems.

A configuration relaxes to another when some slot permutation makes every
slot a subset of its image.  Set-labels are compared by their member sets;
any other label acts as the singleton containing itself.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ArityError
from .labels import Label
from .problems import CondensedConfiguration, Problem


def label_covers(a: Label, b: Label) -> bool:
    return a.member_set() <= b.member_set()


def slot_covers(a: frozenset[Label], b: frozenset[Label]) -> bool:
    return all(any(label_covers(x, y) for y in b) for x in a)


@dataclass(frozen=True)
class RelaxationWitness:
    ok: bool
    permutation: tuple[int, ...] | None = None
    mapping: dict | None = None
    offending: CondensedConfiguration | None = None


def relaxes_to(a: CondensedConfiguration, b: CondensedConfiguration) -> RelaxationWitness:
    """Check a single configuration against another; returns a permutation."""
    if a.arity != b.arity:
        raise ArityError(f"arity mismatch {a.arity} vs {b.arity}")
    d = a.arity
    masks = []
    for slot in a.slots:
        m = 0
        for j, target in enumerate(b.slots):
            if slot_covers(slot, target):
                m |= 1 << j
        if m == 0:
            return RelaxationWitness(False, offending=a)
        masks.append(m)
    perm = _find_matching(masks, d)
    if perm is None:
        return RelaxationWitness(False, offending=a)
    return RelaxationWitness(True, permutation=tuple(perm))


def _find_matching(masks: list[int], d: int) -> list[int] | None:
    match_of_target = [-1] * d

    def try_assign(i, visited):
        m = masks[i]
        while m:
            bit = m & -m
            j = bit.bit_length() - 1
            m ^= bit
            if j in visited:
                continue
            visited.add(j)
            if match_of_target[j] < 0 or try_assign(match_of_target[j], visited):
                match_of_target[j] = i
                return True
        return False

    for i in range(len(masks)):
        if not try_assign(i, set()):
            return None
    perm = [0] * d
    for j, i in enumerate(match_of_target):
        perm[i] = j
    return perm


def constraint_relaxes_to(source, target) -> RelaxationWitness:
    """Every configuration of `source` must relax to one of `target`."""
    mapping = {}
    for cfg in source:
        hit = None
        for cand in target:
            if cand.arity != cfg.arity:
                continue
            w = relaxes_to(cfg, cand)
            if w.ok:
                hit = cand
                break
        if hit is None:
            return RelaxationWitness(False, offending=cfg)
        mapping[cfg] = hit
    return RelaxationWitness(True, mapping=mapping)


def is_relaxation(a, b) -> RelaxationWitness:
    """Dispatch on configuration vs constraint vs problem arguments."""
    if isinstance(a, CondensedConfiguration) and isinstance(b, CondensedConfiguration):
        return relaxes_to(a, b)
    if isinstance(a, Problem) and isinstance(b, Problem):
        if a.delta_n != b.delta_n or a.delta_e != b.delta_e:
            raise ArityError("problems have different arities")
        nodes = constraint_relaxes_to(a.node_constraint, b.node_constraint)
        if not nodes.ok:
            return nodes
        edges = constraint_relaxes_to(a.edge_constraint, b.edge_constraint)
        if not edges.ok:
            return edges
        return RelaxationWitness(True, mapping={**(nodes.mapping or {}), **(edges.mapping or {})})
    return constraint_relaxes_to(a, b)
