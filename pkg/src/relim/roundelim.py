"""The round-elimination engine: re, rere, renaming, fixed points, relaxation.

The hard step is the universal quantifier: find all maximal tuples
(S_1, ..., S_d) of nonempty label sets such that every choice of one label
per set is an allowed configuration, maximality taken slotwise under
permutations.  The search walks slots one at a time.  Its state is the set
of residual configurations compatible with the sets picked so far; for a
state R and label l, quot(R, l) removes one occurrence of l, and a slot set
S leads to the state that is the meet of quot(R, l) over l in S.  In a
maximal tuple every slot is the largest set producing its meet, so it is
enough to branch over the meet-closure of the label quotients.  States are
memoized and dominated results pruned.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .caps import Deadline, EngineCaps
from .errors import (
    ArityError,
    CapExceededError,
    PolicyError,
    StrengthenError,
    UnknownLabelError,
)
from .labels import Label, color_label, set_label
from .problems import (
    CondensedConfiguration,
    Problem,
    expand_configurations,
    format_problem,
    problems_equal,
)
from .relax import is_relaxation, label_covers


# ---------------------------------------------------------------------------
# Universal quantifier


def _canon(slots) -> tuple[frozenset[Label], ...]:
    return tuple(sorted(slots, key=lambda s: tuple(sorted(l.token for l in s))))


def _dominates(a, b) -> bool:
    """True iff b can be injected into a with slotwise supersets (a covers b)."""
    d = len(a)
    masks = []
    for slot in b:
        m = 0
        for j, big in enumerate(a):
            if slot <= big:
                m |= 1 << j
        if m == 0:
            return False
        masks.append(m)
    reachable = {0}
    for m in masks:
        nxt = set()
        for state in reachable:
            free = m & ~state
            while free:
                bit = free & -free
                nxt.add(state | bit)
                free ^= bit
        if not nxt:
            return False
        reachable = nxt
    return (1 << d) - 1 in reachable


def _tuple_key(t):
    return tuple(tuple(sorted(l.token for l in s)) for s in t)


def _matchable(masks: list[int], d: int) -> bool:
    reachable = {0}
    for m in masks:
        nxt = set()
        for state in reachable:
            free = m & ~state
            while free:
                bit = free & -free
                nxt.add(state | bit)
                free ^= bit
        if not nxt:
            return False
        reachable = nxt
    return (1 << d) - 1 in reachable


def _prune_dominated(tuples):
    """Drop tuples that inject slotwise into another one.

    Slots are interned so the O(n^2) pass runs on integer masks; since a
    strict dominator is strictly larger, comparing against already-kept
    (larger) tuples is complete.
    """
    items = sorted(set(tuples), key=lambda t: (-sum(len(s) for s in t), _tuple_key(t)))
    if len(items) <= 1:
        return items
    slot_ids: dict[frozenset, int] = {}
    for t in items:
        for s in t:
            if s not in slot_ids:
                slot_ids[s] = len(slot_ids)
    slots = list(slot_ids)
    contained_in = [0] * len(slots)
    for i, si in enumerate(slots):
        mask = 0
        for j, sj in enumerate(slots):
            if si <= sj:
                mask |= 1 << j
        contained_in[i] = mask
    ids = [tuple(slot_ids[s] for s in t) for t in items]

    kept = []
    kept_ids = []
    for idx, cand in enumerate(items):
        d = len(cand)
        cand_ids = ids[idx]
        dominated = False
        for other_ids in kept_ids:
            masks = []
            ok = True
            for bid in cand_ids:
                cont = contained_in[bid]
                m = 0
                for j, aid in enumerate(other_ids):
                    if (cont >> aid) & 1:
                        m |= 1 << j
                if m == 0:
                    ok = False
                    break
                masks.append(m)
            if ok and _matchable(masks, d):
                dominated = True
                break
        if not dominated:
            kept.append(cand)
            kept_ids.append(cand_ids)
    return kept


def _iter_bits(mask: int):
    """Indices of set bits; linear in the mask width via byte chunking."""
    if not mask:
        return
    data = mask.to_bytes((mask.bit_length() + 7) // 8, "little")
    for byte_index, byte in enumerate(data):
        while byte:
            low = byte & -byte
            yield byte_index * 8 + low.bit_length() - 1
            byte ^= low


class _UniversalSearch:
    """States are sets of residual configurations, interned globally as
    integers; within one expansion step they are encoded as bitmasks over a
    locally indexed suffix universe, so the meet-closure of the label
    quotients runs on machine integers."""

    def __init__(self, members, arity, caps: EngineCaps, deadline: Deadline):
        self.arity = arity
        self.caps = caps
        self.deadline = deadline
        self.memo: dict = {}
        self._ids: dict[tuple, int] = {}
        self._tuples: list[tuple] = []
        self._decomp: list = []  # id -> tuple of (label, suffix id)

    def _intern(self, t: tuple) -> int:
        i = self._ids.get(t)
        if i is None:
            i = len(self._tuples)
            self._ids[t] = i
            self._tuples.append(t)
            self._decomp.append(None)
        return i

    def _decompose(self, mid: int):
        cached = self._decomp[mid]
        if cached is None:
            m = self._tuples[mid]
            out = []
            seen = set()
            for i, l in enumerate(m):
                if l in seen:
                    continue
                seen.add(l)
                out.append((l, self._intern(m[:i] + m[i + 1 :])))
            cached = tuple(out)
            self._decomp[mid] = cached
        return cached

    def run_on(self, members):
        state = frozenset(self._intern(t) for t in members)
        return self._complete(state, self.arity)

    def _complete(self, state: frozenset, k: int):
        key = (state, k)
        if key in self.memo:
            return self.memo[key]
        self.deadline.check("universal quantifier")
        if len(self.memo) > self.caps.max_states:
            raise CapExceededError(
                "universal quantifier state cap exceeded",
                stats={"states": len(self.memo)},
            )
        if k == 1:
            last = frozenset(self._tuples[mid][0] for mid in state)
            self.memo[key] = ((last,),) if last else ()
            return self.memo[key]

        # label quotients as bitmasks over the local suffix universe
        local: dict[int, int] = {}
        local_ids: list[int] = []
        quot: dict[Label, int] = {}
        for mid in state:
            for l, sid in self._decompose(mid):
                j = local.get(sid)
                if j is None:
                    j = len(local_ids)
                    local[sid] = j
                    local_ids.append(sid)
                quot[l] = quot.get(l, 0) | (1 << j)

        groups: dict[int, list[Label]] = {}
        for l, q in quot.items():
            groups.setdefault(q, []).append(l)
        meets = set(groups)
        frontier = list(groups)
        while frontier:
            self.deadline.check("universal quantifier")
            nxt = []
            for m in frontier:
                for q in groups:
                    mq = m & q
                    if mq and mq not in meets:
                        meets.add(mq)
                        nxt.append(mq)
            if len(meets) > self.caps.max_states:
                raise CapExceededError(
                    "universal quantifier meet cap exceeded",
                    stats={"meets": len(meets)},
                )
            frontier = nxt

        # one canonical state per distinct slot: the full intersection over
        # the slot's labels (smaller meets only yield dominated tuples)
        chosen: dict[frozenset, int] = {}
        for meet in meets:
            slot_labels = [
                l for q, labs in groups.items() if q & meet == meet for l in labs
            ]
            slot = frozenset(slot_labels)
            if slot not in chosen:
                mask = -1
                for l in slot_labels:
                    mask &= quot[l]
                chosen[slot] = mask

        by_rest: dict[tuple, list[frozenset]] = {}
        for slot, mask in chosen.items():
            sub_state = frozenset(local_ids[j] for j in _iter_bits(mask))
            for rest in self._complete(sub_state, k - 1):
                by_rest.setdefault(rest, []).append(slot)
        found = set()
        for rest, slots in by_rest.items():
            for slot in slots:
                if any(slot < other for other in slots):
                    continue  # same completion with a larger slot exists
                found.add(_canon((slot,) + rest))
        result = tuple(_prune_dominated(found))
        self.memo[key] = result
        return result


def universal_maximal(constraint, arity: int, caps: EngineCaps, deadline: Deadline | None = None):
    """All maximal tuples of label sets whose every choice satisfies `constraint`."""
    deadline = deadline or Deadline(caps.deadline_seconds)
    members = {
        tuple(sorted(t)) for t in expand_configurations(constraint, caps.max_expansion)
    }
    if not members:
        return []
    search = _UniversalSearch(members, arity, caps, deadline)
    return list(search.run_on(members))


# ---------------------------------------------------------------------------
# re / rere


def _existential_condensed(constraint, new_labels: dict[Label, frozenset[Label]]):
    """Rewrite a constraint over old labels into disjunctions of the new
    set-labels that contain each old label (the condensed emission)."""
    containing: dict[Label, set[Label]] = {}
    for new, members in new_labels.items():
        for old in members:
            containing.setdefault(old, set()).add(new)
    out = []
    for cfg in constraint:
        slots = []
        for slot in cfg.slots:
            ds: set[Label] = set()
            for old in slot:
                ds.update(containing.get(old, ()))
            if not ds:
                break
            slots.append(frozenset(ds))
        else:
            out.append(CondensedConfiguration.make(slots))
    return out


def _empty_like(p: Problem) -> Problem:
    return Problem(frozenset(), p.delta_n, p.delta_e, frozenset(), frozenset())


def _half_step(p: Problem, universal_side: str, caps: EngineCaps, deadline: Deadline) -> Problem:
    if universal_side == "edge":
        uni_constraint, exi_constraint = p.edge_constraint, p.node_constraint
        uni_arity = p.delta_e
    else:
        uni_constraint, exi_constraint = p.node_constraint, p.edge_constraint
        uni_arity = p.delta_n
    if not uni_constraint:
        return _empty_like(p)
    tuples = universal_maximal(uni_constraint, uni_arity, caps, deadline)
    new_labels: dict[Label, frozenset[Label]] = {}
    uni_cfgs = []
    for t in tuples:
        labs = []
        for s in t:
            lab = set_label(s)
            new_labels[lab] = frozenset(s)
            labs.append(lab)
        uni_cfgs.append(CondensedConfiguration.of_labels(labs))
    if len(new_labels) > caps.max_labels:
        raise CapExceededError(
            "label cap exceeded after quantifier step",
            stats={"labels": len(new_labels)},
        )
    exi_cfgs = _existential_condensed(exi_constraint, new_labels)
    if universal_side == "edge":
        node_cfgs, edge_cfgs = exi_cfgs, uni_cfgs
    else:
        node_cfgs, edge_cfgs = uni_cfgs, exi_cfgs
    return Problem.make(
        node_cfgs, edge_cfgs, delta_n=p.delta_n, delta_e=p.delta_e,
        labels=frozenset(new_labels),
    )


def apply_re(p: Problem, caps: EngineCaps | None = None, deadline: Deadline | None = None) -> Problem:
    """One re step: universal quantifier on the edge constraint, existential
    on the node constraint, producing set-labels over the input labels."""
    caps = caps or EngineCaps()
    deadline = deadline or Deadline(caps.deadline_seconds)
    if p.delta_e > p.delta_n:
        raise ArityError("re requires edge rank at most node degree")
    if p.delta_n > caps.max_delta_re:
        raise CapExceededError(f"re capped at delta <= {caps.max_delta_re}")
    return _half_step(p, "edge", caps, deadline)


def apply_rere(p: Problem, caps: EngineCaps | None = None, deadline: Deadline | None = None) -> Problem:
    """One rere step: the roles of the constraints are reversed."""
    caps = caps or EngineCaps()
    deadline = deadline or Deadline(caps.deadline_seconds)
    if p.delta_n > caps.max_delta_rere:
        raise CapExceededError(f"rere capped at delta <= {caps.max_delta_rere}")
    return _half_step(p, "node", caps, deadline)


# ---------------------------------------------------------------------------
# Renaming


@dataclass(frozen=True)
class RenamingPolicy:
    kind: str  # union | intersection | explicit | none | search-bijection
    mapping: tuple[tuple[Label, Label], ...] = ()
    partial: bool = False  # partial explicit maps default to the identity

    @staticmethod
    def union() -> "RenamingPolicy":
        return RenamingPolicy("union")

    @staticmethod
    def intersection() -> "RenamingPolicy":
        return RenamingPolicy("intersection")

    @staticmethod
    def explicit(mapping: dict[Label, Label], partial: bool = False) -> "RenamingPolicy":
        return RenamingPolicy("explicit", tuple(sorted(mapping.items())), partial)

    @staticmethod
    def none() -> "RenamingPolicy":
        return RenamingPolicy("none")


def _color_fold(label: Label, kind: str) -> Label:
    if not label.is_set:
        raise PolicyError(f"{kind} renaming needs set-labels, got {label.token}")
    color_sets = []
    for member in label.members:
        if member.colors is None:
            raise PolicyError(
                f"{kind} renaming needs color-set members, got {member.token}"
            )
        color_sets.append(member.colors)
    if kind == "union":
        out = frozenset().union(*color_sets)
    else:
        out = frozenset.intersection(*color_sets)
    return color_label(out)


def rename_labels(p: Problem, policy: RenamingPolicy) -> Problem:
    if policy.kind == "none":
        return p
    if policy.kind in ("union", "intersection"):
        table = {l: _color_fold(l, policy.kind) for l in p.labels}
    elif policy.kind == "explicit":
        table = dict(policy.mapping)
        for l in p.labels:
            if l in table:
                continue
            if l.is_set and not policy.partial:
                raise PolicyError(f"explicit map misses set-label {l.token}")
            table[l] = l
    else:
        raise PolicyError(f"cannot apply renaming policy {policy.kind!r}")

    def rewrite(constraint):
        out = set()
        for cfg in constraint:
            out.add(
                CondensedConfiguration.make(
                    [frozenset(table[l] for l in slot) for slot in cfg.slots]
                )
            )
        return out

    return Problem.make(
        rewrite(p.node_constraint),
        rewrite(p.edge_constraint),
        delta_n=p.delta_n,
        delta_e=p.delta_e,
        labels=frozenset(table[l] for l in p.labels),
    )


# ---------------------------------------------------------------------------
# Step traces, fixed points, relaxation actions, sequences


@dataclass
class StepTrace:
    input: Problem
    intermediate: Problem | None = None
    output: Problem | None = None
    relaxations: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "input": format_problem(self.input),
            "intermediate": format_problem(self.intermediate) if self.intermediate else None,
            "output": format_problem(self.output) if self.output else None,
            "relaxations": list(self.relaxations),
            "stats": self.stats,
        }


@dataclass
class FixedPointResult:
    is_fixed_point: bool
    trace: StepTrace

    def to_json(self) -> dict:
        return {"is_fixed_point": self.is_fixed_point, "trace": self.trace.to_json()}


def step(
    p: Problem,
    rename_re: RenamingPolicy | None = None,
    rename_rere: RenamingPolicy | None = None,
    caps: EngineCaps | None = None,
    deadline: Deadline | None = None,
) -> StepTrace:
    """Full round-elimination step rere(re(p)) with optional renamings."""
    caps = caps or EngineCaps()
    deadline = deadline or Deadline(caps.deadline_seconds)
    started = time.monotonic()
    intermediate = apply_re(p, caps, deadline)
    if rename_re is not None:
        intermediate = rename_labels(intermediate, rename_re)
    output = apply_rere(intermediate, caps, deadline)
    if rename_rere is not None:
        output = rename_labels(output, rename_rere)
    trace = StepTrace(input=p, intermediate=intermediate, output=output)
    trace.stats = {
        "elapsed_seconds": time.monotonic() - started,
        "input": p.stats(),
        "intermediate": intermediate.stats(),
        "output": output.stats(),
    }
    return trace


def detect_fixed_point(
    p: Problem,
    policies: tuple[RenamingPolicy, RenamingPolicy],
    caps: EngineCaps | None = None,
    deadline: Deadline | None = None,
) -> FixedPointResult:
    """True iff one renamed rere(re(.)) step reproduces the problem exactly."""
    first, second = policies
    search = second.kind == "search-bijection"
    trace = step(
        p,
        rename_re=first,
        rename_rere=None if search else second,
        caps=caps,
        deadline=deadline,
    )
    out = trace.output
    if search:
        equal = _isomorphic(out, p)
    else:
        equal = problems_equal(out, p)
    trace.stats["fixed_point"] = equal
    return FixedPointResult(equal, trace)


def _isomorphic(a: Problem, b: Problem, factorial_cap: int = 40320) -> bool:
    from itertools import permutations
    from math import factorial

    if (a.delta_n, a.delta_e) != (b.delta_n, b.delta_e):
        return False
    if len(a.labels) != len(b.labels):
        return False
    n = len(a.labels)
    if factorial(n) > factorial_cap:
        raise CapExceededError(f"bijection search capped, {n}! permutations")
    source = sorted(a.labels)
    for target in permutations(sorted(b.labels)):
        table = dict(zip(source, target))
        renamed = rename_labels(a, RenamingPolicy("explicit", tuple(table.items())))
        if problems_equal(renamed, b):
            return True
    return False


def apply_relaxations(p: Problem, actions: list[dict], caps: EngineCaps | None = None) -> Problem:
    """Apply relaxation actions; the result must relax the input.

    Supported actions:
      {"kind": "add_configuration", "side": "node"|"edge", "configuration": cfg}
      {"kind": "merge_labels", "labels": [...], "into": label}
      {"kind": "map_to_superset", "mapping": {label: target}}
      {"kind": "relax_constraint_to", "problem": Problem}   # wholesale, verified
    """
    current = p
    for action in actions:
        kind = action["kind"]
        if kind == "add_configuration":
            cfg = action["configuration"]
            unknown = cfg.labels() - current.labels
            if unknown:
                raise UnknownLabelError(
                    "configuration uses unknown labels: "
                    + ", ".join(sorted(l.token for l in unknown))
                )
            if action["side"] == "node":
                current = Problem.make(
                    current.node_constraint | {cfg}, current.edge_constraint,
                    delta_n=current.delta_n, delta_e=current.delta_e,
                    labels=current.labels,
                )
            else:
                current = Problem.make(
                    current.node_constraint, current.edge_constraint | {cfg},
                    delta_n=current.delta_n, delta_e=current.delta_e,
                    labels=current.labels,
                )
        elif kind == "merge_labels":
            table = {l: action["into"] for l in action["labels"]}
            current = rename_labels(
                current, RenamingPolicy.explicit(table, partial=True)
            )
        elif kind == "map_to_superset":
            mapping = action["mapping"]
            for src, dst in mapping.items():
                if not label_covers(src, dst):
                    raise StrengthenError(
                        f"mapping {src.token} -> {dst.token} is not a superset"
                    )
            current = rename_labels(
                current, RenamingPolicy.explicit(dict(mapping), partial=True)
            )
        elif kind == "relax_constraint_to":
            target = action["problem"]
            witness = is_relaxation(current, target)
            if not witness.ok:
                raise StrengthenError(
                    "target does not relax the current problem",
                    offending=witness.offending.render() if witness.offending else None,
                )
            current = target
        else:
            raise PolicyError(f"unknown relaxation action {kind!r}")
    witness = is_relaxation(p, current)
    if not witness.ok:
        raise StrengthenError(
            "actions would strengthen the problem",
            offending=witness.offending.render() if witness.offending else None,
        )
    return current


def run_sequence(
    p0: Problem,
    steps: int,
    policy=None,
    rename_re: RenamingPolicy | None = None,
    rename_rere: RenamingPolicy | None = None,
    caps: EngineCaps | None = None,
) -> list[StepTrace]:
    """Chain `steps` round-elimination steps; `policy(i, trace)` may replace
    each trace's output with a relaxation before it becomes the next input."""
    if steps < 1:
        raise ArityError("run_sequence needs at least one step")
    caps = caps or EngineCaps()
    deadline = Deadline(caps.deadline_seconds)
    traces: list[StepTrace] = []
    current = p0
    for i in range(steps):
        try:
            trace = step(current, rename_re, rename_rere, caps, deadline)
            if policy is not None:
                relaxed = policy(i, trace)
                if relaxed is not None:
                    trace.output = relaxed
        except CapExceededError as e:
            e.details["completed_steps"] = len(traces)
            e.details["partial"] = [t.to_json() for t in traces]
            raise
        traces.append(trace)
        current = trace.output
    return traces
