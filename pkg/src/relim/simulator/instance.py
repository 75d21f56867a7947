"""Finite port-numbered instances and their generators.

An instance is a graph with a port number on each half-edge (distinct per
node; a permutation of 1..deg except for edge-coloring ports, which reuse
the color as the port on both endpoints).  Input colorings are generated
centrally and validated; everything is deterministic given the seed.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

from ..errors import DomainError, ParseError


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    port_u: int
    port_v: int

    def other(self, node: int) -> int:
        return self.v if node == self.u else self.u

    def port_of(self, node: int) -> int:
        return self.port_u if node == self.u else self.port_v


@dataclass(frozen=True)
class ArbdefectiveInput:
    colors: tuple[int, ...]
    oriented: tuple[tuple[int, int], ...]  # (tail, head) covering every edge


@dataclass(frozen=True)
class Instance:
    n: int
    delta: int
    edges: tuple[Edge, ...]
    seed: int = 0
    coloring: tuple[int, ...] | None = None
    arbdefective: ArbdefectiveInput | None = None

    def __post_init__(self):
        ports: dict[int, set[int]] = {}
        for e in self.edges:
            for node, port in ((e.u, e.port_u), (e.v, e.port_v)):
                used = ports.setdefault(node, set())
                if port in used:
                    raise DomainError(f"node {node} reuses port {port}")
                used.add(port)

    def degree(self, node: int) -> int:
        return len(self.incident(node))

    def incident(self, node: int) -> list[Edge]:
        return self._incidence().get(node, [])

    def _incidence(self):
        cached = getattr(self, "_inc", None)
        if cached is None:
            inc: dict[int, list[Edge]] = {i: [] for i in range(self.n)}
            for e in self.edges:
                inc[e.u].append(e)
                inc[e.v].append(e)
            object.__setattr__(self, "_inc", inc)
            cached = inc
        return cached

    def neighbors(self, node: int) -> list[int]:
        return [e.other(node) for e in self.incident(node)]

    def port_map(self, node: int) -> dict[int, Edge]:
        return {e.port_of(node): e for e in self.incident(node)}

    def full_degree_nodes(self) -> list[int]:
        return [v for v in range(self.n) if self.degree(v) == self.delta]

    def to_json(self) -> dict:
        out = {
            "nodes": self.n,
            "delta": self.delta,
            "edges": [
                {"u": e.u, "v": e.v, "portU": e.port_u, "portV": e.port_v}
                for e in self.edges
            ],
            "seed": self.seed,
        }
        if self.coloring is not None:
            out["coloring"] = list(self.coloring)
        if self.arbdefective is not None:
            out["arbdefective"] = {
                "colors": list(self.arbdefective.colors),
                "orientedEdges": [list(p) for p in self.arbdefective.oriented],
            }
        return out

    @staticmethod
    def from_json(data: dict) -> "Instance":
        edges = tuple(
            Edge(e["u"], e["v"], e["portU"], e["portV"]) for e in data["edges"]
        )
        arb = None
        if data.get("arbdefective"):
            arb = ArbdefectiveInput(
                tuple(data["arbdefective"]["colors"]),
                tuple(tuple(p) for p in data["arbdefective"]["orientedEdges"]),
            )
        return Instance(
            n=data["nodes"],
            delta=data["delta"],
            edges=edges,
            seed=data.get("seed", 0),
            coloring=tuple(data["coloring"]) if data.get("coloring") else None,
            arbdefective=arb,
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1)

    @staticmethod
    def loads(text: str) -> "Instance":
        return Instance.from_json(json.loads(text))


# ---------------------------------------------------------------------------
# Generators


def _regular_tree_edges(delta: int, depth: int) -> list[tuple[int, int]]:
    edges = []
    next_id = 1
    frontier = [0]
    for level in range(depth):
        new_frontier = []
        for node in frontier:
            want = delta if node == 0 else delta - 1
            for _ in range(want):
                edges.append((node, next_id))
                new_frontier.append(next_id)
                next_id += 1
        frontier = new_frontier
    return edges


def _random_tree_edges(n: int, delta: int, rng: random.Random) -> list[tuple[int, int]]:
    if n < 2:
        return []
    degree = [0] * n
    edges = []
    for v in range(1, n):
        candidates = [u for u in range(v) if degree[u] < delta]
        if not candidates:
            raise DomainError(f"cannot fit {n} nodes with max degree {delta}")
        u = rng.choice(candidates)
        edges.append((u, v))
        degree[u] += 1
        degree[v] += 1
    return edges


def _assign_ports(pairs, n, kind, delta, rng: random.Random) -> list[Edge]:
    incident: dict[int, list[int]] = {v: [] for v in range(n)}
    for i, (u, v) in enumerate(pairs):
        incident[u].append(i)
        incident[v].append(i)
    if kind == "random":
        port_of: list[dict[int, int]] = [dict() for _ in pairs]
        for v, eids in incident.items():
            ports = list(range(1, len(eids) + 1))
            rng.shuffle(ports)
            for eid, port in zip(eids, ports):
                port_of[eid][v] = port
        return [
            Edge(u, v, port_of[i][u], port_of[i][v]) for i, (u, v) in enumerate(pairs)
        ]
    if kind == "edge-coloring":
        # proper edge coloring with delta colors, greedy over a tree/forest;
        # both endpoints reuse the color as their port
        color: list[int | None] = [None] * len(pairs)
        used: dict[int, set[int]] = {v: set() for v in range(n)}
        for i, (u, v) in enumerate(pairs):
            free = [c for c in range(1, delta + 1) if c not in used[u] and c not in used[v]]
            if not free:
                raise DomainError("edge-coloring ports need more colors than delta")
            color[i] = free[0]
            used[u].add(free[0])
            used[v].add(free[0])
        return [Edge(u, v, color[i], color[i]) for i, (u, v) in enumerate(pairs)]
    raise DomainError(f"unknown port kind {kind!r}")


def _proper_coloring(pairs, n, m, rng: random.Random) -> list[int]:
    if m < 2 and any(True for _ in pairs):
        raise DomainError("a proper coloring of an edge needs at least 2 colors")
    adj: dict[int, list[int]] = {v: [] for v in range(n)}
    for u, v in pairs:
        adj[u].append(v)
        adj[v].append(u)
    colors = [0] * n
    order = _bfs_order(adj, n)
    for v in order:
        taken = {colors[u] for u in adj[v] if colors[u]}
        free = [c for c in range(1, m + 1) if c not in taken]
        if not free:
            raise DomainError(f"could not properly color node {v} with {m} colors")
        colors[v] = rng.choice(free)
    return colors


def _bfs_order(adj, n) -> list[int]:
    seen, order = set(), []
    for start in range(n):
        if start in seen:
            continue
        queue = [start]
        seen.add(start)
        while queue:
            v = queue.pop(0)
            order.append(v)
            for u in adj[v]:
                if u not in seen:
                    seen.add(u)
                    queue.append(u)
    return order


def _arbdefective_input(pairs, n, alpha, num_colors, rng: random.Random):
    if alpha == 0:
        colors = _proper_coloring(pairs, n, num_colors, rng)
    else:
        colors = [rng.randint(1, num_colors) for _ in range(n)]
    # orient every edge; child -> parent keeps monochromatic out-degree <= 1
    oriented = []
    for u, v in pairs:
        tail, head = (v, u) if u < v else (u, v)
        oriented.append((tail, head))
    if alpha == 0:
        return ArbdefectiveInput(tuple(colors), tuple(oriented))
    out_mono = [0] * n
    fixed = []
    for tail, head in oriented:
        if colors[tail] == colors[head] and out_mono[tail] >= alpha:
            tail, head = head, tail
        if colors[tail] == colors[head]:
            out_mono[tail] += 1
            if out_mono[tail] > alpha:
                raise DomainError("could not orient within the requested arbdefect")
        fixed.append((tail, head))
    return ArbdefectiveInput(tuple(colors), tuple(fixed))


def build_instance(spec: dict) -> Instance:
    """Build an instance from a JSON-ish spec.

    spec keys: kind (regular-tree | random-tree | arbitrary), delta,
    depth | n | edges, ports (random | edge-coloring | explicit),
    coloring (none | {"proper": m} | {"arbdefective": [alpha, C]}), seed.
    """
    seed = int(spec.get("seed", 0))
    rng = random.Random(seed)
    delta = int(spec["delta"])
    kind = spec.get("kind", "regular-tree")
    if kind == "regular-tree":
        pairs = _regular_tree_edges(delta, int(spec["depth"]))
        n = max((max(p) for p in pairs), default=0) + 1
    elif kind == "random-tree":
        n = int(spec["n"])
        pairs = _random_tree_edges(n, delta, rng)
    elif kind == "arbitrary":
        pairs = [
            (e["u"], e["v"]) if isinstance(e, dict) else tuple(e) for e in spec["edges"]
        ]
        n = int(spec.get("n", max((max(p) for p in pairs), default=0) + 1))
    else:
        raise DomainError(f"unknown instance kind {kind!r}")

    ports_kind = spec.get("ports", "random")
    if ports_kind == "explicit":
        edges = tuple(
            Edge(e["u"], e["v"], e["portU"], e["portV"]) for e in spec["edges"]
        )
    else:
        edges = tuple(_assign_ports(pairs, n, ports_kind, delta, rng))

    coloring = None
    arb = None
    col_spec = spec.get("coloring", "none")
    if isinstance(col_spec, dict) and "proper" in col_spec:
        coloring = tuple(_proper_coloring(pairs, n, int(col_spec["proper"]), rng))
    elif isinstance(col_spec, dict) and "arbdefective" in col_spec:
        alpha, num_colors = col_spec["arbdefective"]
        arb = _arbdefective_input(pairs, n, int(alpha), int(num_colors), rng)
    elif col_spec not in ("none", None):
        raise ParseError(f"unknown coloring spec {col_spec!r}")

    return Instance(
        n=n, delta=delta, edges=edges, seed=seed, coloring=coloring, arbdefective=arb
    )
