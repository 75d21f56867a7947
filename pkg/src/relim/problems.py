"""Problems in the black-white formalism: parsing, printing, expansion.

A problem is a triple (labels, node constraint, edge constraint) where both
constraints are sets of condensed configurations: multisets of disjunctions,
each disjunction a nonempty set of labels.  Everything is canonicalized on
construction so that equality is structural and permutation-insensitive.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import chain, combinations_with_replacement, product
from math import comb

from .errors import ArityError, ParseError, SizeError
from .labels import Label, parse_label_token

DEFAULT_EXPANSION_CAP = 10**6


def _slot_key(slot: frozenset[Label]) -> tuple[str, ...]:
    return tuple(sorted(l.token for l in slot))


@dataclass(frozen=True)
class CondensedConfiguration:
    """A multiset of disjunction slots, stored in canonical order."""

    slots: tuple[frozenset[Label], ...]

    @staticmethod
    def make(slots) -> "CondensedConfiguration":
        frozen = [frozenset(s) for s in slots]
        if not frozen:
            raise ArityError("configuration must have at least one slot")
        if any(not s for s in frozen):
            raise ParseError("empty disjunction in configuration")
        frozen.sort(key=_slot_key)
        return CondensedConfiguration(tuple(frozen))

    @staticmethod
    def of_labels(labels) -> "CondensedConfiguration":
        return CondensedConfiguration.make([frozenset([l]) for l in labels])

    @property
    def arity(self) -> int:
        return len(self.slots)

    def labels(self) -> frozenset[Label]:
        out: set[Label] = set()
        for s in self.slots:
            out.update(s)
        return frozenset(out)

    def _slot_groups(self) -> list[tuple[frozenset[Label], int]]:
        groups: list[tuple[frozenset[Label], int]] = []
        for slot in self.slots:  # canonical order keeps equal slots adjacent
            if groups and groups[-1][0] == slot:
                groups[-1] = (slot, groups[-1][1] + 1)
            else:
                groups.append((slot, 1))
        return groups

    def expansion_size(self) -> int:
        """Upper bound on distinct concrete configurations."""
        n = 1
        for slot, k in self._slot_groups():
            n *= comb(len(slot) + k - 1, k)
        return n

    def expand(self, cap: int = DEFAULT_EXPANSION_CAP) -> set[tuple[Label, ...]]:
        """All concrete configurations (sorted label tuples) contained here.

        Repeated slots are enumerated as multisets, so permutation duplicates
        are never materialized.
        """
        if self.expansion_size() > cap:
            raise SizeError(
                f"expansion of configuration exceeds cap ({self.expansion_size()} > {cap})"
            )
        parts = [
            list(combinations_with_replacement(sorted(slot), k))
            for slot, k in self._slot_groups()
        ]
        out = set()
        for combo in product(*parts):
            out.add(tuple(sorted(chain.from_iterable(combo))))
        return out

    def render(self) -> str:
        parts = []
        run: tuple[frozenset[Label], int] | None = None
        for slot in self.slots + (None,):  # type: ignore[operator]
            if run is not None and slot == run[0]:
                run = (run[0], run[1] + 1)
                continue
            if run is not None:
                parts.append(_render_slot(run[0], run[1]))
            run = (slot, 1) if slot is not None else None
        return " ".join(parts)


def _render_slot(slot: frozenset[Label], count: int) -> str:
    if len(slot) == 1:
        body = next(iter(slot)).token
    else:
        body = "[" + " ".join(sorted(l.token for l in slot)) + "]"
    return body if count == 1 else f"{body}^{count}"


Constraint = frozenset  # of CondensedConfiguration


@dataclass(frozen=True)
class Problem:
    labels: frozenset[Label]
    delta_n: int
    delta_e: int
    node_constraint: frozenset[CondensedConfiguration]
    edge_constraint: frozenset[CondensedConfiguration]

    @staticmethod
    def make(node_configs, edge_configs, delta_n=None, delta_e=None, labels=None) -> "Problem":
        nodes = frozenset(node_configs)
        edges = frozenset(edge_configs)
        dn = _constraint_arity(nodes, delta_n, "node")
        de = _constraint_arity(edges, delta_e, "edge")
        used: set[Label] = set()
        for cfg in nodes | edges:
            used.update(cfg.labels())
        if labels is None:
            all_labels = frozenset(used)
        else:
            all_labels = frozenset(labels)
            missing = used - all_labels
            if missing:
                raise ParseError(
                    "labels used but not declared: " + ", ".join(sorted(l.token for l in missing))
                )
        return Problem(all_labels, dn, de, nodes, edges)

    def node_arity(self) -> int:
        return self.delta_n

    def edge_arity(self) -> int:
        return self.delta_e

    def stats(self) -> dict:
        return {
            "labels": len(self.labels),
            "node_configurations": len(self.node_constraint),
            "edge_configurations": len(self.edge_constraint),
        }


def _constraint_arity(configs, declared, side):
    arities = {c.arity for c in configs}
    if len(arities) > 1:
        raise ArityError(f"{side} configurations have mixed arities {sorted(arities)}")
    if declared is not None:
        if arities and arities != {declared}:
            raise ArityError(
                f"{side} configurations have arity {arities.pop()} but delta declares {declared}"
            )
        if declared < 2:
            raise ArityError(f"{side} arity must be at least 2, got {declared}")
        return declared
    if not arities:
        raise ArityError(f"cannot infer {side} arity from an empty section; add a delta header")
    a = arities.pop()
    if a < 2:
        raise ArityError(f"{side} arity must be at least 2, got {a}")
    return a


# ---------------------------------------------------------------------------
# Parsing


def _tokenize(text: str):
    """Yield (token, line, column) triples; NEWLINE tokens separate lines."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        i, n = 0, len(line)
        emitted = False
        while i < n:
            ch = line[i]
            if ch.isspace():
                i += 1
                continue
            col = i + 1
            if ch == "<":
                depth, j = 0, i
                while j < n:
                    if line[j] == "<":
                        depth += 1
                    elif line[j] == ">":
                        depth -= 1
                        if depth == 0:
                            break
                    j += 1
                if depth != 0:
                    raise ParseError("unbalanced '<' in set-label", lineno, col)
                yield line[i : j + 1], lineno, col
                i = j + 1
            elif line.startswith("L{", i):
                j = line.find("}", i)
                if j < 0:
                    raise ParseError("unclosed 'L{' label", lineno, col)
                yield line[i : j + 1], lineno, col
                i = j + 1
            elif ch.isalnum() or ch == "_":
                j = i
                while j < n and (line[j].isalnum() or line[j] in "._"):
                    j += 1
                yield line[i:j], lineno, col
                i = j
            elif ch in "[]^|;:":
                yield ch, lineno, col
                i += 1
            else:
                raise ParseError(f"unexpected character {ch!r}", lineno, col)
            emitted = True
        if emitted:
            yield "\n", lineno, n + 1


def parse_problem(text: str) -> Problem:
    """Parse the problem file format (or its compact one-line variant)."""
    tokens = list(_tokenize(text))
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else (None, -1, -1)

    def take():
        nonlocal pos
        tok = peek()
        pos += 1
        return tok

    delta_n = delta_e = None
    sections: dict[str, list[CondensedConfiguration]] = {"nodes": [], "edges": []}
    seen_sections: set[str] = set()
    section: str | None = None
    current: list[frozenset[Label]] = []

    def flush_config(line):
        nonlocal current
        if not current:
            return
        if section is None:
            raise ParseError("configuration outside of a nodes:/edges: section", line)
        sections[section].append(CondensedConfiguration.make(current))
        current = []

    while True:
        tok, line, col = peek()
        if tok is None:
            flush_config(line)
            break
        if tok == "\n":
            take()
            flush_config(line)
            continue
        if tok == "|":
            take()
            flush_config(line)
            continue
        if tok == ";":
            take()
            flush_config(line)
            section = None
            continue
        if tok == "delta" and section is None and not current:
            take()
            nums = []
            for _ in range(2):
                t, l, c = take()
                if t is None or not t.isdigit():
                    raise ParseError("delta header needs two integers", l, c)
                nums.append(int(t))
            delta_n, delta_e = nums
            continue
        if tok in ("nodes", "edges"):
            nxt = tokens[pos + 1] if pos + 1 < len(tokens) else (None, -1, -1)
            if nxt[0] == ":":
                flush_config(line)
                take()
                take()
                section = tok
                if section in seen_sections:
                    raise ParseError(f"duplicate section {section}:", line, col)
                seen_sections.add(section)
                continue
        # configuration content
        if tok == "[":
            take()
            members: list[Label] = []
            while True:
                t, l, c = take()
                if t is None or t == "\n":
                    raise ParseError("unclosed '[' disjunction", l, c)
                if t == "]":
                    break
                members.append(_label(t, l, c))
            if not members:
                raise ParseError("empty disjunction", line, col)
            slot = frozenset(members)
        else:
            take()
            slot = frozenset([_label(tok, line, col)])
        reps = 1
        if peek()[0] == "^":
            take()
            t, l, c = take()
            if t is None or not t.isdigit() or int(t) < 1:
                raise ParseError("repetition needs a positive integer", l, c)
            reps = int(t)
        current.extend([slot] * reps)

    if not seen_sections:
        raise ParseError("no nodes:/edges: sections found", 1, 1)
    return Problem.make(
        sections["nodes"], sections["edges"], delta_n=delta_n, delta_e=delta_e
    )


def _label(token: str, line: int, col: int) -> Label:
    try:
        return parse_label_token(token)
    except ParseError as e:
        raise ParseError(e.message, line, col) from None


# ---------------------------------------------------------------------------
# Printing


def format_problem(p: Problem, expanded: bool = False) -> str:
    """Canonical text form; round-trips through parse_problem.

    With expanded=True the constraints are printed as concrete configurations,
    which is independent of how they were condensed.
    """
    lines = [f"delta {p.delta_n} {p.delta_e}"]
    for name, constraint in (("nodes", p.node_constraint), ("edges", p.edge_constraint)):
        lines.append(f"{name}:")
        if expanded:
            rows = sorted(
                CondensedConfiguration.of_labels(t).render()
                for t in expand_constraint(constraint)
            )
        else:
            rows = sorted(c.render() for c in constraint)
        lines.extend(rows)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Expansion and membership


def expand_configurations(configs, cap: int = DEFAULT_EXPANSION_CAP) -> set[tuple[Label, ...]]:
    """Every concrete configuration contained in any of the condensed ones."""
    out: set[tuple[Label, ...]] = set()
    total = 0
    for cfg in configs:
        total += cfg.expansion_size()
        if total > cap:
            raise SizeError(f"expansion exceeds cap of {cap} concrete configurations")
        out.update(cfg.expand(cap))
    return out


@lru_cache(maxsize=512)
def expand_constraint(constraint: frozenset, cap: int = DEFAULT_EXPANSION_CAP) -> frozenset:
    return frozenset(expand_configurations(constraint, cap))


def config_matches(cfg: CondensedConfiguration, labels: tuple[Label, ...]) -> bool:
    """True iff some choice per slot yields `labels` up to permutation."""
    d = cfg.arity
    if len(labels) != d:
        return False
    masks = []
    for lab in labels:
        m = 0
        for i, slot in enumerate(cfg.slots):
            if lab in slot:
                m |= 1 << i
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


def constraint_member(constraint, labels: tuple[Label, ...]) -> bool:
    return any(config_matches(cfg, labels) for cfg in constraint)


def collect_labels(*constraints) -> frozenset[Label]:
    out: set[Label] = set()
    for constraint in constraints:
        for cfg in constraint:
            out.update(cfg.labels())
    return frozenset(out)


def canonical_key(p: Problem):
    """Representation-independent identity of a problem."""
    return (
        p.delta_n,
        p.delta_e,
        frozenset(l.token for l in p.labels),
        expand_constraint(p.node_constraint),
        expand_constraint(p.edge_constraint),
    )


def problems_equal(a: Problem, b: Problem) -> bool:
    if (a.delta_n, a.delta_e) != (b.delta_n, b.delta_e):
        return False
    if frozenset(l.token for l in a.labels) != frozenset(l.token for l in b.labels):
        return False
    if a.node_constraint == b.node_constraint and a.edge_constraint == b.edge_constraint:
        return True  # structurally identical; no expansion needed
    return canonical_key(a) == canonical_key(b)
