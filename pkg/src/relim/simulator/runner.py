"""Synchronous execution of node programs on an instance.

All round-r messages are computed from round-(r-1) states before any state
updates; message size is unbounded; each node halts individually with a
local output.  The reported round count is the latest round at which any
node was still running (a node that halts in init costs zero rounds).
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import CapExceededError
from .instance import Instance


@dataclass
class Halt:
    output: object


@dataclass(frozen=True)
class NodeView:
    node: int
    degree: int
    ports: tuple[int, ...]
    delta: int
    n: int
    color: int | None
    arb_color: int | None
    out_ports: tuple[int, ...]  # ports whose edge is oriented away, if any


@dataclass
class RunResult:
    outputs: dict
    rounds: int


class Program:
    """Base class; subclasses override init / message / update."""

    def init(self, view: NodeView):
        raise NotImplementedError

    def message(self, state, rnd: int, port: int):
        return None

    def update(self, state, rnd: int, inbox: dict):
        raise NotImplementedError


def _views(inst: Instance) -> dict[int, NodeView]:
    oriented_away: dict[int, set[int]] = {v: set() for v in range(inst.n)}
    if inst.arbdefective is not None:
        heads = {}
        for tail, head in inst.arbdefective.oriented:
            heads[frozenset((tail, head))] = (tail, head)
        for e in inst.edges:
            tail, head = heads[frozenset((e.u, e.v))]
            oriented_away[tail].add(e.port_of(tail))
    views = {}
    for v in range(inst.n):
        ports = tuple(sorted(inst.port_map(v)))
        views[v] = NodeView(
            node=v,
            degree=inst.degree(v),
            ports=ports,
            delta=inst.delta,
            n=inst.n,
            color=inst.coloring[v] if inst.coloring else None,
            arb_color=inst.arbdefective.colors[v] if inst.arbdefective else None,
            out_ports=tuple(sorted(oriented_away[v])),
        )
    return views


def run_algorithm(inst: Instance, program: Program, max_rounds: int = 10_000) -> RunResult:
    views = _views(inst)
    states: dict[int, object] = {}
    outputs: dict[int, object] = {}
    for v in range(inst.n):
        first = program.init(views[v])
        if isinstance(first, Halt):
            outputs[v] = first.output
        else:
            states[v] = first

    rounds = 0
    while states:
        rounds += 1
        if rounds > max_rounds:
            raise CapExceededError(f"program exceeded {max_rounds} rounds")
        # message phase: everyone still running sends from the old state;
        # halted nodes stay silent
        inboxes: dict[int, dict[int, object]] = {v: {} for v in states}
        for v in list(states):
            port_map = inst.port_map(v)
            for port, edge in port_map.items():
                msg = program.message(states[v], rounds, port)
                if msg is None:
                    continue
                other = edge.other(v)
                if other in states:
                    inboxes[other][edge.port_of(other)] = msg
        for v in list(states):
            result = program.update(states[v], rounds, inboxes[v])
            if isinstance(result, Halt):
                outputs[v] = result.output
                del states[v]
            else:
                states[v] = result
    return RunResult(outputs=outputs, rounds=rounds)


# ---------------------------------------------------------------------------
# Small reference programs (used by tests and the CLI)


class ConstantOutput(Program):
    def __init__(self, value):
        self.value = value

    def init(self, view):
        return Halt(self.value)


class CollectBall(Program):
    """Gather the radius-r ball; output is a canonical nested view."""

    def __init__(self, radius: int):
        self.radius = radius

    def init(self, view):
        if self.radius == 0:
            return Halt(("node", view.node))
        return {"view": view, "ball": {view.node: ()}, "left": self.radius}

    def message(self, state, rnd, port):
        return dict(state["ball"])

    def update(self, state, rnd, inbox):
        merged = dict(state["ball"])
        for chunk in inbox.values():
            for node, _ in chunk.items():
                merged.setdefault(node, ())
        state = {"view": state["view"], "ball": merged, "left": state["left"] - 1}
        if state["left"] == 0:
            return Halt(tuple(sorted(state["ball"])))
        return state


class Flood(Program):
    """Flood a token from a source; output the round it was first seen."""

    def __init__(self, source: int):
        self.source = source

    def init(self, view):
        return {"seen_at": 0 if view.node == self.source else None}

    def message(self, state, rnd, port):
        return "token" if state["seen_at"] is not None else None

    def update(self, state, rnd, inbox):
        if state["seen_at"] is not None:
            return Halt(state["seen_at"])  # token forwarded this round
        if inbox:
            return {"seen_at": rnd}
        return state
