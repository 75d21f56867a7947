"""Reductions from combinatorial solutions to family-problem labelings.

An arbdefective coloring with capacity at most delta labels each color class
with a dedicated group of family colors, marking monochromatic out-edges
with the wildcard and padding to the exact wildcard count.  A colored ruling
set additionally encodes distances: a node at distance i points at a nearest
set node with P_i and fills the rest with U_i.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import DomainError
from ..family import ArbdefectVector, build_family_problem
from ..labels import ColorId, Label, WILDCARD, color_label, pointer_label
from ..problems import Problem
from .instance import Instance
from .verify import verify


@dataclass
class FamilyLabeling:
    labeling: dict[tuple[int, int], Label]
    problem: Problem
    z: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "kind": "labeling",
            "z": list(self.z),
            "labeling": {f"{v},{p}": lab.token for (v, p), lab in sorted(self.labeling.items())},
        }


def _color_groups(sizes: list[int]) -> list[frozenset[ColorId]]:
    groups, offset = [], 0
    for size in sizes:
        groups.append(frozenset(ColorId(0, offset + j) for j in range(1, size + 1)))
        offset += size
    return groups


def _label_colored_node(inst, v, group, mono_out_ports, want_x, labeling):
    """Label node v with its group's color set, wildcards on monochromatic
    out-ports, padded to exactly want_x wildcards on full-degree nodes."""
    ports = sorted(inst.port_map(v))
    x_ports = set(mono_out_ports)
    if inst.degree(v) == inst.delta:
        extra = want_x - len(x_ports)
        if extra < 0:
            raise DomainError(f"node {v} has more monochromatic out-edges than allowed")
        for p in ports:
            if extra == 0:
                break
            if p not in x_ports:
                x_ports.add(p)
                extra -= 1
    lab = color_label(group)
    for p in ports:
        labeling[(v, p)] = WILDCARD if p in x_ports else lab


def _mono_out_ports(inst: Instance, colors, oriented, members=None) -> dict[int, set[int]]:
    heads = {frozenset(p): p for p in oriented}
    out: dict[int, set[int]] = {v: set() for v in range(inst.n)}
    for e in inst.edges:
        key = frozenset((e.u, e.v))
        if key not in heads:
            continue
        tail, head = heads[key]
        if members is not None and (tail not in members or head not in members):
            continue
        if colors[tail] == colors[head]:
            out[tail].add(e.port_of(tail))
    return out


def reduce_arbdefective(inst: Instance, solution: dict, defects) -> FamilyLabeling:
    """d-arbdefective coloring with capacity <= delta into the single-level
    family member with delta colors."""
    vec = ArbdefectVector.make(defects)
    if vec.capacity > inst.delta:
        raise DomainError(
            f"capacity {vec.capacity} exceeds delta {inst.delta}; no family target exists"
        )
    check = verify("arbdefective", inst, {**solution, "defects": list(vec.defects)})
    if not check.ok:
        raise DomainError(f"input solution invalid: {check.violations[:3]}")
    z = (inst.delta,)
    problem = build_family_problem(inst.delta, z)
    groups = _color_groups([d + 1 for d in vec.defects])
    colors = list(solution["colors"])
    mono = _mono_out_ports(inst, colors, [tuple(p) for p in solution["oriented"]])
    labeling: dict[tuple[int, int], Label] = {}
    for v in range(inst.n):
        i = colors[v] - 1
        _label_colored_node(inst, v, groups[i], mono[v], vec.defects[i], labeling)
    return FamilyLabeling(labeling, problem, z)


def reduce_ruling(inst: Instance, solution: dict, alpha: int, c: int, beta: int) -> FamilyLabeling:
    """Colored ruling set into the family member with c(1+alpha) level-0
    colors and beta pointer levels."""
    if c * (1 + alpha) > inst.delta:
        raise DomainError("c(1+alpha) exceeds delta; no family target exists")
    check = verify("ruling", inst, {**solution, "alpha": alpha, "c": c, "beta": beta})
    if not check.ok:
        raise DomainError(f"input solution invalid: {check.violations[:3]}")
    z = tuple([c * (1 + alpha)] + [0] * beta)
    problem = build_family_problem(inst.delta, z)
    members = set(solution["set"])
    set_colors = {int(v): x for v, x in dict(solution["colors"]).items()}
    groups = _color_groups([1 + alpha] * c)
    mono = _mono_out_ports(
        inst,
        {v: set_colors.get(v) for v in range(inst.n)},
        [tuple(p) for p in solution["oriented"]],
        members,
    )
    labeling: dict[tuple[int, int], Label] = {}

    # distances and deterministic parents via BFS from the set
    dist = {v: 0 for v in members}
    frontier = sorted(members)
    parent_port: dict[int, int] = {}
    while frontier:
        v = frontier.pop(0)
        for port, edge in sorted(inst.port_map(v).items()):
            u = edge.other(v)
            if u not in dist:
                dist[u] = dist[v] + 1
                parent_port[u] = edge.port_of(u)
                frontier.append(u)

    for v in range(inst.n):
        if v in members:
            x = set_colors[v]
            _label_colored_node(inst, v, groups[x - 1], mono[v], alpha, labeling)
        else:
            if v not in dist or dist[v] > beta:
                raise DomainError(f"node {v} is too far from the set")
            i = dist[v]
            for port in inst.port_map(v):
                labeling[(v, port)] = (
                    pointer_label("P", i) if port == parent_port[v] else pointer_label("U", i)
                )
    return FamilyLabeling(labeling, problem, z)


def reduce_solution_to_family(kind: str, solution: dict, inst: Instance, **params) -> FamilyLabeling:
    if kind == "arbdefective":
        return reduce_arbdefective(inst, solution, params["defects"])
    if kind == "ruling":
        return reduce_ruling(
            inst, solution, int(params["alpha"]), int(params["c"]), int(params["beta"])
        )
    raise DomainError(f"unknown reduction kind {kind!r}")
