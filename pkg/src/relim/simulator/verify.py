"""Validity checkers for every output kind the toolkit produces.

Labelings are checked against a problem: nodes of full degree must match a
node configuration up to permutation and every edge must match an edge
configuration; lower-degree nodes are unconstrained.  Arbdefective colorings
and colored ruling sets are checked against their combinatorial definitions.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import DomainError
from ..labels import Label, parse_label_token
from ..problems import Problem, constraint_member
from .instance import Instance


@dataclass
class VerifyResult:
    ok: bool
    violations: list[str]

    def to_json(self) -> dict:
        return {"ok": self.ok, "violations": self.violations}


def _labeling_violations(inst: Instance, problem: Problem, labeling) -> list[str]:
    out = []
    table: dict[tuple[int, int], Label] = {}
    for key, value in labeling.items():
        if isinstance(key, str):
            node_s, port_s = key.split(",")
            key = (int(node_s), int(port_s))
        table[key] = value if isinstance(value, Label) else parse_label_token(value)
    for v in range(inst.n):
        ports = sorted(inst.port_map(v))
        missing = [p for p in ports if (v, p) not in table]
        if missing:
            out.append(f"node {v}: unlabeled ports {missing}")
            continue
        if inst.degree(v) != problem.delta_n:
            continue
        labels = tuple(sorted(table[(v, p)] for p in ports))
        if not constraint_member(problem.node_constraint, labels):
            out.append(
                f"node {v}: configuration {' '.join(l.token for l in labels)} not allowed"
            )
    for e in inst.edges:
        a = table.get((e.u, e.port_u))
        b = table.get((e.v, e.port_v))
        if a is None or b is None:
            continue  # reported above
        pair = tuple(sorted((a, b)))
        if not constraint_member(problem.edge_constraint, pair):
            out.append(
                f"edge {e.u}-{e.v}: pair {pair[0].token} {pair[1].token} not allowed"
            )
    return out


def _orientation_table(inst: Instance, oriented, edges=None) -> dict | None:
    want = {frozenset((e.u, e.v)) for e in (edges if edges is not None else inst.edges)}
    table = {}
    for tail, head in oriented:
        key = frozenset((tail, head))
        if key not in want:
            return None
        table[key] = (tail, head)
    if set(table) != want:
        return None
    return table


def _arbdefective_violations(inst: Instance, solution) -> list[str]:
    out = []
    colors = list(solution["colors"])
    defects = solution.get("defects")
    if len(colors) != inst.n:
        return [f"coloring has {len(colors)} entries for {inst.n} nodes"]
    num_colors = len(defects) if defects is not None else max(colors)
    if defects is None:
        raise DomainError("arbdefective verification needs the defect vector")
    if any(not (1 <= x <= num_colors) for x in colors):
        out.append(f"colors outside 1..{num_colors}")
        return out
    table = _orientation_table(inst, [tuple(p) for p in solution["oriented"]])
    if table is None:
        out.append("orientation does not cover every edge exactly once")
        return out
    out_mono = [0] * inst.n
    for e in inst.edges:
        tail, head = table[frozenset((e.u, e.v))]
        if colors[tail] == colors[head]:
            out_mono[tail] += 1
    for v in range(inst.n):
        allowed = defects[colors[v] - 1]
        if out_mono[v] > allowed:
            out.append(
                f"node {v} (color {colors[v]}) has {out_mono[v]} > {allowed} "
                "monochromatic out-neighbors"
            )
    return out


def _bfs_distances(inst: Instance, sources: set[int]) -> list[float]:
    dist = [float("inf")] * inst.n
    queue = sorted(sources)
    for s in queue:
        dist[s] = 0
    while queue:
        v = queue.pop(0)
        for u in inst.neighbors(v):
            if dist[u] == float("inf"):
                dist[u] = dist[v] + 1
                queue.append(u)
    return dist


def _ruling_violations(inst: Instance, solution, alpha: int, c: int, beta: int) -> list[str]:
    out = []
    members = set(solution["set"])
    colors = {int(v): x for v, x in dict(solution["colors"]).items()}
    if set(colors) != members:
        out.append("set and coloring domain differ")
        return out
    if any(not (1 <= x <= c) for x in colors.values()):
        out.append(f"set colors outside 1..{c}")
    intra = [
        e for e in inst.edges if e.u in members and e.v in members
    ]
    table = _orientation_table(inst, [tuple(p) for p in solution["oriented"]], intra)
    if table is None:
        out.append("orientation does not cover the induced edges exactly once")
        return out
    out_mono: dict[int, int] = {v: 0 for v in members}
    for e in intra:
        tail, head = table[frozenset((e.u, e.v))]
        if colors[tail] == colors[head]:
            out_mono[tail] += 1
    for v in members:
        if out_mono[v] > alpha:
            out.append(f"set node {v} has arbdefect {out_mono[v]} > {alpha}")
    if beta == 0 and members != set(range(inst.n)):
        out.append("beta = 0 requires every node in the set")
    dist = _bfs_distances(inst, members) if members else [float("inf")] * inst.n
    far = [v for v in range(inst.n) if dist[v] > beta]
    if far:
        out.append(f"nodes {far[:10]} are farther than {beta} from the set")
    return out


def verify(kind, inst: Instance, solution, problem: Problem | None = None) -> VerifyResult:
    """kind: "labeling" (needs problem), "arbdefective", or "ruling"."""
    if kind == "labeling":
        if problem is None:
            raise DomainError("labeling verification needs the problem")
        violations = _labeling_violations(inst, problem, solution)
    elif kind == "arbdefective":
        violations = _arbdefective_violations(inst, solution)
    elif kind == "ruling":
        violations = _ruling_violations(
            inst, solution, int(solution["alpha"]), int(solution["c"]), int(solution["beta"])
        )
    else:
        raise DomainError(f"unknown verification kind {kind!r}")
    return VerifyResult(ok=not violations, violations=violations)
