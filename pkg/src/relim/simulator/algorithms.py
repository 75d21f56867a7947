"""Distributed algorithms run on the synchronous simulator.

greedy_arbdefective implements the m-phase greedy coloring over a proper
input coloring, with edges oriented toward smaller input colors.  The sweep
ruling-set routine runs in levels: level i splits the current color space
into blocks of at most q_i colors and sweeps them one rank per round, a
candidate joining unless a same-block neighbor joined earlier; survivors are
recolored by block index.  After the last level (a single block) survivors
form an independent set and every node is within one hop per level of a
survivor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import DomainError
from ..family import ArbdefectVector
from .instance import Instance
from .runner import Halt, Program, run_algorithm


def _check_proper(colors, pairs, context: str):
    for u, v in pairs:
        if colors[u] == colors[v]:
            raise DomainError(f"{context}: nodes {u},{v} share color {colors[u]}")


# ---------------------------------------------------------------------------
# Greedy generalized arbdefective coloring


@dataclass
class GreedyResult:
    colors: list[int]
    oriented: list[tuple[int, int]]
    rounds: int

    def to_json(self) -> dict:
        return {
            "kind": "arbdefective",
            "colors": self.colors,
            "oriented": [list(p) for p in self.oriented],
            "rounds": self.rounds,
        }


class _GreedyProgram(Program):
    def __init__(self, defects: tuple[int, ...], phases: int):
        self.defects = defects
        self.phases = phases

    def init(self, view):
        return {
            "gamma": view.color,
            "picked": None,
            "fresh": False,
            "heard": {},
            "ports": view.ports,
        }

    def message(self, state, rnd, port):
        if state["fresh"]:
            return ("picked", state["picked"], state["gamma"])
        return None

    def update(self, state, rnd, inbox):
        if state["fresh"]:
            return Halt((state["picked"], state["gamma"]))
        for port, msg in inbox.items():
            state["heard"][port] = msg
        if state["gamma"] == rnd:
            out_colors = [
                color
                for (_, color, gamma) in state["heard"].values()
                if gamma < state["gamma"]
            ]
            for x in range(1, len(self.defects) + 1):
                if out_colors.count(x) <= self.defects[x - 1]:
                    state["picked"] = x
                    break
            if state["picked"] is None:
                raise DomainError("greedy could not pick a color; vector not 1-relaxed?")
            if rnd == self.phases:
                return Halt((state["picked"], state["gamma"]))
            state["fresh"] = True
        return state


def greedy_arbdefective(inst: Instance, defects) -> GreedyResult:
    """Greedy d-arbdefective coloring over the instance's proper coloring."""
    vec = ArbdefectVector.make(defects)
    if vec.capacity <= inst.delta:
        raise DomainError(
            f"vector has capacity {vec.capacity} <= delta {inst.delta}; "
            "the greedy regime needs a 1-relaxed vector"
        )
    if inst.coloring is None:
        raise DomainError("greedy needs an instance with a proper input coloring")
    pairs = [(e.u, e.v) for e in inst.edges]
    _check_proper(inst.coloring, pairs, "greedy input")
    phases = max(inst.coloring)
    result = run_algorithm(inst, _GreedyProgram(vec.defects, phases), max_rounds=phases + 1)
    colors = [result.outputs[v][0] for v in range(inst.n)]
    oriented = [
        (u, v) if inst.coloring[u] > inst.coloring[v] else (v, u) for u, v in pairs
    ]
    return GreedyResult(colors=colors, oriented=oriented, rounds=result.rounds)


# ---------------------------------------------------------------------------
# Block-sweep ruling sets


@dataclass
class SweepResult:
    ruling_set: set[int]
    rounds: int
    schedule: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "kind": "ruling-set",
            "set": sorted(self.ruling_set),
            "rounds": self.rounds,
            "schedule": list(self.schedule),
        }


def _default_schedule(c: int, beta: int) -> tuple[int, ...]:
    q = 1
    while q**beta < c:
        q += 1
    return (q,) * beta


class _SweepProgram(Program):
    """Runs the level/block sweep; `mask_same_init` ignores neighbors with the
    same initial color (used to run on the subgraph without intra-group edges)."""

    def __init__(self, c: int, schedule: tuple[int, ...], mask_same_init: bool):
        self.schedule = schedule
        self.c = c
        self.mask = mask_same_init
        self.starts = []
        acc = 0
        for q in schedule:
            self.starts.append(acc)
            acc += q
        self.total = acc

    def init(self, view):
        return {
            "init_color": view.color,
            "color": view.color,
            "level": 0,
            "blocked": False,
        }

    def _geometry(self, state, rnd):
        level = state["level"]
        q = self.schedule[level]
        local = rnd - self.starts[level]
        block = (state["color"] - 1) // q
        rank = (state["color"] - 1) % q + 1
        return q, local, block, rank

    def message(self, state, rnd, port):
        if state.get("announce"):
            return ("joined", state["init_color"], state["level"], state["color"])
        return None

    def update(self, state, rnd, inbox):
        state = dict(state)
        state["announce"] = False
        q, local, block, rank = self._geometry(state, rnd)
        for msg in inbox.values():
            _, init_color, level, color = msg
            if self.mask and init_color == state["init_color"]:
                continue
            if level == state["level"] and (color - 1) // q == block:
                state["blocked"] = True
        if local == rank:
            if state["blocked"]:
                return Halt(("out",))
            state["joined"] = True
            if rank < q:
                state["announce"] = True  # later ranks of this block must hear it
        if local == q:
            if not state.get("joined"):
                return Halt(("out",))
            if state["level"] + 1 >= len(self.schedule):
                return Halt(("in",))
            state["level"] += 1
            state["color"] = block + 1
            state["blocked"] = False
            state["joined"] = False
        return state


def sweep_ruling_set(inst: Instance, beta: int, schedule=None, _mask=False, _colors=None) -> SweepResult:
    """Compute a ruling set from a proper coloring by block sweeps."""
    if beta < 1:
        raise DomainError("sweep needs beta >= 1")
    colors = _colors if _colors is not None else inst.coloring
    if colors is None:
        raise DomainError("sweep needs a proper input coloring")
    c = max(colors)
    schedule = tuple(schedule) if schedule else _default_schedule(c, beta)
    if len(schedule) != beta:
        raise DomainError(f"schedule must have {beta} entries")
    if math.prod(schedule) < c:
        raise DomainError(f"schedule product {math.prod(schedule)} < {c} colors")
    if not _mask:
        _check_proper(colors, [(e.u, e.v) for e in inst.edges], "sweep input")
    run_inst = inst if _colors is None else _with_colors(inst, _colors)
    program = _SweepProgram(c, schedule, mask_same_init=_mask)
    result = run_algorithm(run_inst, program, max_rounds=program.total + 1)
    ruling = {v for v, out in result.outputs.items() if out[0] == "in"}
    return SweepResult(ruling_set=ruling, rounds=result.rounds, schedule=schedule)


def _with_colors(inst: Instance, colors) -> Instance:
    return Instance(
        n=inst.n,
        delta=inst.delta,
        edges=inst.edges,
        seed=inst.seed,
        coloring=tuple(colors),
        arbdefective=inst.arbdefective,
    )


# ---------------------------------------------------------------------------
# Arbdefective colored ruling sets


@dataclass
class RulingSetOutput:
    ruling_set: set[int]
    colors: dict[int, int]
    oriented: list[tuple[int, int]]
    alpha: int
    c: int
    beta: int
    rounds: int

    def to_json(self) -> dict:
        return {
            "kind": "ruling",
            "set": sorted(self.ruling_set),
            "colors": {str(v): x for v, x in sorted(self.colors.items())},
            "oriented": [list(p) for p in self.oriented],
            "alpha": self.alpha,
            "c": self.c,
            "beta": self.beta,
            "rounds": self.rounds,
        }


def arb_colored_ruling_set(inst: Instance, alpha: int, c: int, beta: int) -> RulingSetOutput:
    """Group the input arbdefective coloring into ceil(C/c) classes, drop
    intra-group edges, and sweep the group coloring down to a ruling set."""
    from .verify import verify

    if inst.arbdefective is None:
        raise DomainError("needs an instance with an arbdefective input coloring")
    arb = inst.arbdefective
    big_c = max(arb.colors)
    if big_c < c:
        raise DomainError(f"input coloring has {big_c} < c = {c} colors")
    check = verify("arbdefective", inst, {
        "colors": list(arb.colors),
        "oriented": [list(p) for p in arb.oriented],
        "defects": [alpha] * big_c,
    })
    if not check.ok:
        raise DomainError(f"invalid input arbdefective coloring: {check.violations[:3]}")

    def group(x: int) -> int:
        return (x - 1) // c + 1

    def rank(x: int) -> int:
        return (x - 1) % c + 1

    if beta == 0:
        if big_c > c:
            raise DomainError("beta = 0 requires the input coloring to fit in c colors")
        members = set(range(inst.n))
        return RulingSetOutput(
            ruling_set=members,
            colors={v: rank(arb.colors[v]) for v in members},
            oriented=list(arb.oriented),
            alpha=alpha, c=c, beta=beta, rounds=0,
        )

    groups = [group(arb.colors[v]) for v in range(inst.n)]
    sweep = sweep_ruling_set(inst, beta, _mask=True, _colors=groups)
    members = sweep.ruling_set
    intra = [
        (t, h) for t, h in arb.oriented if t in members and h in members
    ]
    return RulingSetOutput(
        ruling_set=members,
        colors={v: rank(arb.colors[v]) for v in members},
        oriented=intra,
        alpha=alpha,
        c=c,
        beta=beta,
        rounds=sweep.rounds,
    )
