"""The parameterized problem family and its analytic oracles.

A family member is built from a vector z of per-level color counts: colored
nodes output a nonempty color set C (with exactly |C|-1 wildcard ports) and
uncolored nodes output pointer chains P_i/U_i of bounded level.  One round
elimination step maps the member for z to (a relaxation reaching) the member
for the inclusive prefix sum of z, which drives all lower-bound lengths.

This module materializes, independently of the engine:
  * the edge constraint and label set of the intermediate problem after one
    re step (gen-closure forms over the family edge order),
  * the relaxed node constraint the rere output embeds into and the matching
    edge constraint of the relaxed intermediate problem,
  * the label projection that turns the relaxed problem into the family
    member for prefix(z),
plus the exact integer calculators for lower-bound lengths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import chain, combinations

from .caps import Deadline, EngineCaps
from .errors import (
    ArityError,
    DomainError,
    InternalInconsistencyError,
    PolicyError,
    UnknownLabelError,
)
from .labels import ColorId, Label, WILDCARD, color_label, pointer_label, set_label
from .problems import CondensedConfiguration, Problem, constraint_member, problems_equal
from .relax import is_relaxation
from .roundelim import StepTrace, apply_re, apply_rere, apply_relaxations


# ---------------------------------------------------------------------------
# Vectors


@dataclass(frozen=True)
class FamilyVector:
    entries: tuple[int, ...]

    @staticmethod
    def make(entries) -> "FamilyVector":
        if isinstance(entries, FamilyVector):
            return entries
        t = tuple(int(e) for e in entries)
        if not t:
            raise DomainError("family vector must be nonempty")
        if any(e < 0 for e in t):
            raise DomainError("family vector entries must be nonnegative")
        if sum(t) < 1:
            raise DomainError("family vector must have at least one color")
        return FamilyVector(t)

    @property
    def beta(self) -> int:
        return len(self.entries) - 1

    @property
    def total(self) -> int:
        return sum(self.entries)

    def prefix(self) -> "FamilyVector":
        out, acc = [], 0
        for e in self.entries:
            acc += e
            out.append(acc)
        return FamilyVector(tuple(out))

    def __str__(self) -> str:
        return "[" + ",".join(str(e) for e in self.entries) + "]"


def prefix_vector(z) -> FamilyVector:
    return FamilyVector.make(z).prefix()


def prefix_iter(z, times: int) -> FamilyVector:
    v = FamilyVector.make(z)
    for _ in range(times):
        v = v.prefix()
    return v


def family_colors(z: FamilyVector) -> list[ColorId]:
    return [
        ColorId(level, index)
        for level, count in enumerate(z.entries)
        for index in range(1, count + 1)
    ]


def color_level(colors: frozenset[ColorId]) -> int:
    return max((c.level for c in colors), default=-1)


def _nonempty_subsets(colors):
    items = sorted(colors)
    return (
        frozenset(c)
        for c in chain.from_iterable(
            combinations(items, r) for r in range(1, len(items) + 1)
        )
    )


# ---------------------------------------------------------------------------
# Family problems


def build_family_problem(delta: int, z, beta_cap: int = 16) -> Problem:
    """The family member for degree `delta` and color vector z."""
    zv = FamilyVector.make(z)
    if zv.total > delta:
        raise DomainError(f"family needs |z| <= delta, got {zv.total} > {delta}")
    if zv.beta > beta_cap:
        raise DomainError(f"vector length {zv.beta} exceeds cap {beta_cap}")
    if delta < 2:
        raise ArityError("family problems need delta >= 2")
    colors = family_colors(zv)
    beta = zv.beta

    color_labels = {cs: color_label(cs) for cs in _nonempty_subsets(colors)}
    pointers = {
        (kind, i): pointer_label(kind, i) for i in range(1, beta + 1) for kind in "PU"
    }
    sigma = frozenset(color_labels.values()) | frozenset(pointers.values()) | {WILDCARD}

    node_cfgs = []
    for cs, lab in color_labels.items():
        x = len(cs) - 1
        node_cfgs.append(
            CondensedConfiguration.make(
                [frozenset([lab])] * (delta - x) + [frozenset([WILDCARD])] * x
            )
        )
    for i in range(1, beta + 1):
        node_cfgs.append(
            CondensedConfiguration.make(
                [frozenset([pointers[("P", i)]])]
                + [frozenset([pointers[("U", i)]])] * (delta - 1)
            )
        )

    def compatible(lab: Label) -> frozenset[Label]:
        out = {WILDCARD}
        if lab is WILDCARD:
            return frozenset(sigma)
        if lab.pointer is not None:
            kind, i = lab.pointer
            if kind == "U":
                out.update(pointers.values())
                out.difference_update(
                    pointers[("P", j)] for j in range(1, i + 1)
                )
                out.update(color_labels.values())
            else:  # P_i
                out.update(pointers[("U", j)] for j in range(1, i))
                out.update(
                    l for cs, l in color_labels.items() if color_level(cs) < i
                )
        else:
            cs = lab.colors
            out.update(l for ds, l in color_labels.items() if not (ds & cs))
            out.update(pointers[("U", j)] for j in range(1, beta + 1))
            out.update(
                pointers[("P", j)]
                for j in range(1, beta + 1)
                if color_level(cs) < j
            )
        return frozenset(out)

    edge_cfgs = [
        CondensedConfiguration.make([frozenset([lab]), compatible(lab)])
        for lab in sorted(sigma)
    ]
    return Problem.make(node_cfgs, edge_cfgs, delta_n=delta, delta_e=2, labels=sigma)


def build_fixedpoint_variant(delta: int) -> Problem:
    """The fixed-point form of the relaxed coloring problem: same labels and
    edge constraint as the single-level family member with delta colors, but
    the node constraint is closed under slotwise color-set supersets."""
    if delta < 2:
        raise ArityError("variant needs delta >= 2")
    base = build_family_problem(delta, [delta])
    colors = frozenset(family_colors(FamilyVector.make([delta])))
    up = {}
    for cs in _nonempty_subsets(colors):
        up[cs] = frozenset(
            color_label(ds) for ds in _nonempty_subsets(colors) if ds >= cs
        )
    everything = frozenset(base.labels)
    node_cfgs = []
    for cs in _nonempty_subsets(colors):
        x = len(cs) - 1
        node_cfgs.append(
            CondensedConfiguration.make([up[cs]] * (delta - x) + [everything] * x)
        )
    return Problem.make(
        node_cfgs, base.edge_constraint, delta_n=delta, delta_e=2, labels=base.labels
    )


# ---------------------------------------------------------------------------
# Edge-order closures (the family edge diagram, stated directly)


def _edge_successors(lab: Label, colors: frozenset[ColorId], beta: int, members) -> set[Label]:
    """Successors of a family label under the family edge order."""
    out = {lab, WILDCARD}
    if lab is WILDCARD or lab == WILDCARD:
        return {WILDCARD}
    if lab.pointer is not None:
        kind, i = lab.pointer
        if kind == "U":
            out.update(pointer_label("U", j) for j in range(1, i))
        else:
            out.update(pointer_label("P", j) for j in range(i + 1, beta + 1))
            out.update(pointer_label("U", j) for j in range(1, beta + 1))
            out.update(
                color_label(cs)
                for cs in members
                if all(c.level >= i for c in cs)
            )
    else:
        cs = lab.colors
        out.update(color_label(ds) for ds in members if ds and ds < cs)
        out.update(
            pointer_label("U", j)
            for j in range(1, beta + 1)
            if color_level(cs) >= j
        )
    return out


def family_edge_gen(bases, z) -> frozenset[Label]:
    """gen of base labels w.r.t. the family edge constraint."""
    zv = FamilyVector.make(z)
    colors = frozenset(family_colors(zv))
    members = list(_nonempty_subsets(colors))
    out: set[Label] = set()
    for b in bases:
        out.update(_edge_successors(b, colors, zv.beta, members))
    return frozenset(out)


# ---------------------------------------------------------------------------
# Intermediate problem oracles


@dataclass(frozen=True)
class OracleConstraint:
    constraint: frozenset
    labels: frozenset[Label]


class FamilyIntermediates:
    """Materializes the paper-characterized intermediates for one (delta, z).

    Descriptors identify the structured labels:
      re level:   ("U", i, colorset) and ("P", i, colorset)
      star level: ("X",), ("GU", i), ("GP", i), ("K", colorset, i, j)
    """

    def __init__(self, delta: int, z):
        self.delta = delta
        self.z = FamilyVector.make(z)
        beta = self.z.beta
        if self.z.beta == 0:
            if self.z.total > delta:
                raise DomainError("oracle needs |z| <= delta when len(z) = 0")
        elif self.z.total > delta - 1:
            raise DomainError("oracle needs |z| <= delta - 1 when len(z) > 0")
        self.colors = frozenset(family_colors(self.z))
        self.beta = beta
        self._build_sigma_re()
        self._build_re_constraints()
        self._build_star()

    # -- re level

    def _u_base(self, i: int, cs: frozenset[ColorId]) -> frozenset[Label]:
        base = [color_label(cs)] if cs else [WILDCARD]
        if i >= 1:
            base.append(pointer_label("U", i))
        return family_edge_gen(base, self.z)

    def _p_base(self, i: int, cs: frozenset[ColorId]) -> frozenset[Label]:
        base = [pointer_label("P", i)]
        if cs:
            base.append(color_label(cs))
        return family_edge_gen(base, self.z)

    def _build_sigma_re(self):
        subsets = [frozenset()] + list(_nonempty_subsets(self.colors))
        self.re_descriptor: dict[tuple, frozenset[Label]] = {}
        for i in range(0, self.beta + 1):
            for cs in subsets:
                if color_level(cs) <= i:
                    self.re_descriptor[("U", i, cs)] = self._u_base(i, cs)
        for i in range(1, self.beta + 1):
            for cs in subsets:
                if color_level(self.colors - cs) <= i - 1:
                    self.re_descriptor[("P", i, cs)] = self._p_base(i, cs)
        self.re_label = {
            desc: set_label(members) for desc, members in self.re_descriptor.items()
        }
        self.sigma_re = frozenset(self.re_label.values())

    def _build_re_constraints(self):
        cfgs = set()
        for i in range(1, self.beta + 1):
            for cs in [frozenset()] + list(_nonempty_subsets(self.colors)):
                rest = self.colors - cs
                if color_level(rest) <= i - 1:
                    cfgs.add(
                        CondensedConfiguration.of_labels(
                            [self.re_label[("P", i, cs)], self.re_label[("U", i - 1, rest)]]
                        )
                    )
        for cs in [frozenset()] + list(_nonempty_subsets(self.colors)):
            cfgs.add(
                CondensedConfiguration.of_labels(
                    [
                        self.re_label[("U", self.beta, cs)],
                        self.re_label[("U", self.beta, self.colors - cs)],
                    ]
                )
            )
        self.re_edge_constraint = frozenset(cfgs)

        base = build_family_problem(self.delta, self.z)
        containing: dict[Label, set[Label]] = {}
        for desc, lab in self.re_label.items():
            for member in self.re_descriptor[desc]:
                containing.setdefault(member, set()).add(lab)
        node_cfgs = []
        for cfg in base.node_constraint:
            slots = []
            for slot in cfg.slots:
                ds: set[Label] = set()
                for old in slot:
                    ds.update(containing.get(old, ()))
                slots.append(frozenset(ds))
            node_cfgs.append(CondensedConfiguration.make(slots))
        self.re_node_constraint = frozenset(node_cfgs)
        self.re_problem = Problem.make(
            self.re_node_constraint,
            self.re_edge_constraint,
            delta_n=self.delta,
            delta_e=2,
            labels=self.sigma_re,
        )

    # -- star level (relaxed rere)

    def _gg(self, *bases: tuple) -> frozenset[Label]:
        """Upward closure inside sigma_re, where stronger means superset."""
        base_sets = [self.re_descriptor[b] for b in bases]
        return frozenset(
            self.re_label[d]
            for d, members in self.re_descriptor.items()
            if any(members >= b for b in base_sets)
        )

    def _h(self, i: int) -> frozenset[ColorId]:
        return frozenset(c for c in self.colors if c.level >= i)

    def _build_star(self):
        delta, beta = self.delta, self.beta
        star_descriptor: dict[tuple, frozenset[Label]] = {}
        star_descriptor[("X",)] = self._gg(("U", 0, frozenset()))
        for i in range(1, beta + 1):
            star_descriptor[("GU", i)] = self._gg(("U", i, frozenset()))
            star_descriptor[("GP", i)] = self._gg(("P", i, self._h(i)))

        node_rows = []  # (descriptor tuple list, metadata)
        self.star_node_meta: list[dict] = []
        for i in range(1, beta + 1):
            node_rows.append(
                ([("GP", i)] + [("GU", i)] * (delta - 1), {"kind": "pointer", "i": i})
            )
        for cs in _nonempty_subsets(self.colors):
            for j in range(0, beta + 1):
                if color_level(cs) > j:
                    continue
                for i in (j, j + 1):
                    if i > beta:
                        continue
                    x = len(cs) + i - j - 1
                    if x < 0 or delta - x < 1:
                        continue
                    desc = ("K", cs, i, j)
                    if desc not in star_descriptor:
                        bases = [("U", i, cs)]
                        if j >= 1:
                            bases.append(("P", j, self._h(j)))
                        star_descriptor[desc] = self._gg(*bases)
                    row = [desc] * (delta - x) + [("X",)] * x
                    node_rows.append(
                        (row, {"kind": "color", "colors": cs, "i": i, "j": j, "x": x})
                    )

        used = {d for row, _ in node_rows for d in row}
        self.star_descriptor = {d: m for d, m in star_descriptor.items() if d in used}
        self.star_label = {
            d: set_label(m) for d, m in self.star_descriptor.items()
        }
        self.star_node_constraint = frozenset(
            CondensedConfiguration.of_labels([self.star_label[d] for d in row])
            for row, _ in node_rows
        )
        self.star_node_rows = node_rows

        self.star_edge_constraint = frozenset(
            CondensedConfiguration.of_labels(
                [self.star_label[a], self.star_label[b]]
            )
            for a in self.star_descriptor
            for b in self.star_descriptor
            if self._star_edge_ok(a, b)
        )
        self.star_problem = Problem.make(
            self.star_node_constraint,
            self.star_edge_constraint,
            delta_n=delta,
            delta_e=2,
            labels=frozenset(self.star_label.values()),
        )

    @staticmethod
    def _star_edge_ok(a: tuple, b: tuple) -> bool:
        if a[0] == "X" or b[0] == "X":
            return True
        if a[0] == "K" and b[0] == "K":
            _, cs, i, j = a
            _, cs2, i2, j2 = b
            return (not (cs & cs2)) or i < j2 or i2 < j
        if a[0] == "GU" and b[0] == "GU":
            return True
        if a[0] == "K" or b[0] == "K":
            k, other = (a, b) if a[0] == "K" else (b, a)
            if other[0] == "GU":
                return True
            if other[0] == "GP":
                return k[2] < other[1]
            return False
        if {a[0], b[0]} == {"GU", "GP"}:
            u, pp = (a, b) if a[0] == "GU" else (b, a)
            return u[1] < pp[1]
        return False  # GP with GP

    # -- projection onto the next family member

    def projected_vector(self) -> FamilyVector:
        return self.z.prefix()

    def _pair_table(self) -> dict[tuple[ColorId, int], ColorId]:
        pairs = [
            (c, lvl)
            for c in sorted(self.colors)
            for lvl in range(c.level, self.beta + 1)
        ]
        table = {}
        for level in range(0, self.beta + 1):
            at_level = sorted(
                (p for p in pairs if p[1] == level),
                key=lambda p: (p[0].level, p[0].index),
            )
            for rank, p in enumerate(at_level, start=1):
                table[p] = ColorId(level, rank)
        return table

    def projection_map(self) -> dict[Label, Label]:
        table = self._pair_table()
        out = {}
        for desc, lab in self.star_label.items():
            if desc[0] == "X":
                out[lab] = WILDCARD
            elif desc[0] == "GU":
                out[lab] = pointer_label("U", desc[1])
            elif desc[0] == "GP":
                out[lab] = pointer_label("P", desc[1])
            else:
                _, cs, i, j = desc
                new_colors = frozenset(
                    table[(c, lvl)] for c in cs for lvl in (i, j)
                )
                out[lab] = color_label(new_colors)
        return out

    def project_problem(self) -> Problem:
        """Map the relaxed intermediate problem onto the member for prefix(z),
        checking every produced configuration against the target."""
        target = build_family_problem(self.delta, self.projected_vector())
        mapping = self.projection_map()
        node_cfgs = set()
        for row, meta in self.star_node_rows:
            labs = [mapping[self.star_label[d]] for d in row]
            if meta["kind"] == "color":
                new_colors = labs[0].colors if labs[0].colors else frozenset()
                want_x = len(new_colors) - 1
                have_x = meta["x"]
                pad = want_x - have_x
                if pad < 0:
                    raise InternalInconsistencyError(
                        f"negative wildcard padding for {meta}"
                    )
                labs = (
                    [l for l in labs if l != WILDCARD][: self.delta - want_x]
                    + [WILDCARD] * want_x
                )
            cfg = CondensedConfiguration.of_labels(labs)
            if not constraint_member(target.node_constraint, tuple(sorted(labs))):
                raise InternalInconsistencyError(
                    f"projected node configuration not allowed: {cfg.render()}"
                )
            node_cfgs.add(cfg)
        for cfg in self.star_edge_constraint:
            labs = [mapping[next(iter(s))] for s in cfg.slots]
            if not constraint_member(target.edge_constraint, tuple(sorted(labs))):
                raise InternalInconsistencyError(
                    f"projected edge configuration not allowed: {cfg.render()}"
                )
        return target


def expected_intermediate(delta: int, z, which: str) -> OracleConstraint:
    oracle = FamilyIntermediates(delta, z)
    if which == "re-edge":
        return OracleConstraint(oracle.re_edge_constraint, oracle.sigma_re)
    if which == "keytec-node":
        return OracleConstraint(
            oracle.star_node_constraint, frozenset(oracle.star_label.values())
        )
    if which == "estar-edge":
        return OracleConstraint(
            oracle.star_edge_constraint, frozenset(oracle.star_label.values())
        )
    raise DomainError(f"unknown intermediate {which!r}")


# ---------------------------------------------------------------------------
# Labeling projection (the algorithmic replacement rules)


def project_labeling(
    port_labels: dict[int, dict[int, Label]], oracle: FamilyIntermediates
) -> dict[int, dict[int, Label]]:
    """Apply the label replacement rules to a per-node, per-port labeling in
    star-label form, including the final wildcard padding step."""
    mapping = oracle.projection_map()
    out: dict[int, dict[int, Label]] = {}
    for node, ports in port_labels.items():
        new_ports = {}
        for port, lab in sorted(ports.items()):
            if lab not in mapping:
                raise UnknownLabelError(f"label {lab.token} is not a star label")
            new_ports[port] = mapping[lab]
        colorish = {p: l for p, l in new_ports.items() if l.is_colors and l != WILDCARD}
        if colorish:
            sets = {l.colors for l in colorish.values()}
            if len(sets) != 1:
                raise InternalInconsistencyError(
                    f"node {node} mixes distinct projected color sets"
                )
            cs = sets.pop()
            have_x = sum(1 for l in new_ports.values() if l == WILDCARD)
            pad = len(cs) - 1 - have_x
            if pad < 0:
                raise InternalInconsistencyError(
                    f"node {node} has more wildcards than its color set allows"
                )
            for port in sorted(colorish)[:pad]:
                new_ports[port] = WILDCARD
        out[node] = new_ports
    return out


# ---------------------------------------------------------------------------
# One verified family step and sequences


def family_step(
    delta: int, z, caps: EngineCaps | None = None, deadline: Deadline | None = None
) -> StepTrace:
    """Run rere(re(.)) on the family member for z and relax/project the result
    to the member for prefix(z), verifying every claim along the way."""
    caps = caps or EngineCaps()
    zv = FamilyVector.make(z)
    if zv.prefix().total > delta:
        raise DomainError(
            f"one step from z={zv} reaches |prefix(z)|={zv.prefix().total} > delta={delta}; "
            "no family target exists"
        )
    base = build_family_problem(delta, zv)
    oracle = FamilyIntermediates(delta, zv)

    re_out = apply_re(base, caps, deadline)
    if not problems_equal(re_out, oracle.re_problem):
        raise InternalInconsistencyError(
            f"engine re output disagrees with the analytic form at z={zv}"
        )
    rere_out = apply_rere(re_out, caps, deadline)
    witness = is_relaxation(rere_out, oracle.star_problem)
    if not witness.ok:
        bad = witness.offending.render() if witness.offending else "?"
        raise InternalInconsistencyError(
            f"rere output does not embed into the relaxed form at z={zv}: {bad}"
        )
    relaxed = apply_relaxations(
        rere_out, [{"kind": "relax_constraint_to", "problem": oracle.star_problem}]
    )
    target = oracle.project_problem()

    bound = (2**delta) * (1 + zv.beta)
    counts = {
        "input": len(base.labels),
        "re": len(re_out.labels),
        "relaxed": len(relaxed.labels),
        "bound": bound,
    }
    trace = StepTrace(input=base, intermediate=re_out, output=target)
    trace.relaxations = [
        {"kind": "relax_constraint_to", "target": "star"},
        {"kind": "project", "vector": str(zv.prefix())},
    ]
    trace.stats = {
        "z": str(zv),
        "z_next": str(zv.prefix()),
        "label_counts": counts,
        "label_bound_ok": max(counts["input"], counts["re"], counts["relaxed"]) <= bound,
    }
    return trace


def run_family_sequence(delta: int, z, steps: int, caps: EngineCaps | None = None) -> list[StepTrace]:
    if steps < 1:
        raise ArityError("sequence needs at least one step")
    zv = FamilyVector.make(z)
    traces = []
    for _ in range(steps):
        trace = family_step(delta, zv, caps)
        traces.append(trace)
        zv = zv.prefix()
    return traces


# ---------------------------------------------------------------------------
# Calculators


@dataclass(frozen=True)
class LowerBoundLength:
    t: int | None
    infinite: bool = False
    cap_hit: bool = False

    def __str__(self) -> str:
        if self.infinite:
            return "inf"
        if self.cap_hit:
            return f">={self.t} (cap hit)"
        return str(self.t if self.t is not None else -1)

    def to_json(self) -> dict:
        return {"t": self.t, "infinite": self.infinite, "cap_hit": self.cap_hit}


def lower_bound_length(delta: int, z, iteration_cap: int = 10**6) -> LowerBoundLength:
    """Largest t with |prefix^t(z)| below the threshold; infinite when the
    prefix dynamics stabilize under it."""
    zv = FamilyVector.make(z)
    if zv.beta > 2**delta:
        import warnings

        warnings.warn("vector length exceeds 2^delta; label counts grow accordingly")

    def within(v: FamilyVector) -> bool:
        if zv.beta == 0:
            return v.total <= delta
        return v.total < delta

    current, t = zv, 0
    if not within(current):
        return LowerBoundLength(None)
    while t < iteration_cap:
        nxt = current.prefix()
        if nxt == current:
            return LowerBoundLength(None, infinite=True)
        if not within(nxt):
            return LowerBoundLength(t)
        current = nxt
        t += 1
    return LowerBoundLength(t, cap_hit=True)


@dataclass(frozen=True)
class RulingSetBound:
    t: int
    reduced: int

    def to_json(self) -> dict:
        return {"t": self.t, "reduced": self.reduced}


def ruling_set_lower_bound(delta: int, alpha: int, c: int, beta: int) -> RulingSetBound:
    """Largest t with binom(t+beta, beta) * c * (alpha+1) < delta, exactly."""
    if delta < 1 or alpha < 0 or c < 1 or beta < 1:
        raise DomainError("parameters must be positive (alpha may be zero)")
    factor = c * (alpha + 1)
    t = -1
    while math.comb(t + 1 + beta, beta) * factor < delta:
        t += 1
    return RulingSetBound(t, t - beta)


@dataclass(frozen=True)
class ArbdefectVector:
    defects: tuple[int, ...]

    @staticmethod
    def make(defects) -> "ArbdefectVector":
        t = tuple(int(d) for d in defects)
        if not t:
            raise DomainError("arbdefect vector needs at least one color")
        if any(d < 0 for d in t):
            raise DomainError("arbdefects must be nonnegative")
        return ArbdefectVector(t)

    @property
    def num_colors(self) -> int:
        return len(self.defects)

    @property
    def capacity(self) -> int:
        return sum(d + 1 for d in self.defects)

    def is_relaxed(self, sigma: float, delta: int) -> bool:
        return self.capacity > sigma * delta
