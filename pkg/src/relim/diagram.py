"""Label-strength diagrams.

Label X is at least as strong as Y w.r.t. a constraint when replacing any
number of Y occurrences by X in any allowed configuration keeps it allowed.
The diagram keeps equal-strength labels in explicit classes and stores the
transitive reduction of the order between classes, so a pair of mutually
strong labels is reported as an equality rather than a cycle.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import SizeError, UnknownLabelError
from .labels import Label
from .problems import (
    DEFAULT_EXPANSION_CAP,
    Problem,
    constraint_member,
    expand_constraint,
)


def at_least_as_strong(constraint, x: Label, y: Label, cap: int = DEFAULT_EXPANSION_CAP) -> bool:
    """True iff x is at least as strong as y according to the constraint."""
    if x == y:
        return True
    try:
        expanded = expand_constraint(constraint, cap)
        member = expanded.__contains__
    except SizeError:
        member = lambda t: constraint_member(constraint, t)  # noqa: E731
    for cfg in constraint:
        for concrete in cfg.expand(cap):
            count = concrete.count(y)
            if count == 0:
                continue
            rest = [l for l in concrete if l != y]
            for k in range(1, count + 1):
                cand = tuple(sorted(rest + [y] * (count - k) + [x] * k))
                if not member(cand):
                    return False
    return True


@dataclass(frozen=True)
class Diagram:
    side: str
    labels: tuple[Label, ...]
    geq: dict  # label -> frozenset of labels at least as strong (reflexive)
    classes: tuple[frozenset[Label], ...]
    edges: frozenset[tuple[Label, Label]]  # weaker rep -> stronger rep, reduced

    def successors(self, label: Label) -> frozenset[Label]:
        if label not in self.geq:
            raise UnknownLabelError(f"label {label.token} not in diagram")
        return self.geq[label]

    def stronger_or_equal(self, weaker: Label, stronger: Label) -> bool:
        return stronger in self.successors(weaker)

    def equal_strength_pairs(self) -> list[tuple[Label, Label]]:
        out = []
        for cls in self.classes:
            members = sorted(cls)
            out.extend((a, b) for i, a in enumerate(members) for b in members[i + 1 :])
        return out

    def to_json(self) -> dict:
        return {
            "side": self.side,
            "labels": [l.token for l in self.labels],
            "classes": [sorted(l.token for l in c) for c in self.classes],
            "edges": sorted([a.token, b.token] for a, b in self.edges),
        }


def compute_diagram(p: Problem, side: str, cap: int = DEFAULT_EXPANSION_CAP) -> Diagram:
    if side not in ("node", "edge"):
        raise UnknownLabelError(f"side must be node or edge, got {side!r}")
    constraint = p.node_constraint if side == "node" else p.edge_constraint
    labels = sorted(p.labels)
    geq_pairs = {
        (y, x)
        for y in labels
        for x in labels
        if at_least_as_strong(constraint, x, y, cap)
    }
    geq = {
        y: frozenset(x for x in labels if (y, x) in geq_pairs) for y in labels
    }

    # Equal-strength classes, then a reduced DAG between class representatives.
    assigned: dict[Label, Label] = {}
    classes = []
    for l in labels:
        if l in assigned:
            continue
        cls = frozenset(m for m in labels if (l, m) in geq_pairs and (m, l) in geq_pairs)
        classes.append(cls)
        for m in cls:
            assigned[m] = min(cls)
    reps = sorted({min(c) for c in classes})

    def strictly(a, b):
        return (a, b) in geq_pairs and (b, a) not in geq_pairs

    edges = set()
    for a in reps:
        for b in reps:
            if not strictly(a, b):
                continue
            if any(strictly(a, c) and strictly(c, b) for c in reps if c not in (a, b)):
                continue
            edges.add((a, b))
    return Diagram(side, tuple(labels), geq, tuple(classes), frozenset(edges))


def gen_closure(labels, diagram: Diagram) -> frozenset[Label]:
    """gen of the given labels: themselves plus all stronger labels."""
    out: set[Label] = set()
    for l in labels:
        out.update(diagram.successors(l))
    return frozenset(out)
