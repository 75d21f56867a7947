"""Zero-round solvability on graphs with unconstrained port numberings.

With no communication every degree-full node must commit to the same
configuration, and an adversarial port numbering can place any two of its
slots (including the same slot twice, on two adjacent nodes) across one
edge.  A problem is therefore 0-round solvable iff some node configuration
is self compatible: every pair of labels occurring in it, repetition
allowed, is an allowed edge configuration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement

from .errors import UnsupportedVariantError
from .labels import Label
from .problems import DEFAULT_EXPANSION_CAP, Problem, expand_constraint


@dataclass(frozen=True)
class PortConstraint:
    unconstrained: bool = True
    node_ports: frozenset = field(default_factory=frozenset)
    edge_ports: frozenset = field(default_factory=frozenset)


UNCONSTRAINED = PortConstraint()


@dataclass(frozen=True)
class ZeroRoundResult:
    solvable: bool
    witness: tuple[Label, ...] | None = None
    failing_pair: tuple[Label, Label] | None = None

    def to_json(self) -> dict:
        return {
            "solvable": self.solvable,
            "witness": [l.token for l in self.witness] if self.witness else None,
            "failing_pair": [l.token for l in self.failing_pair] if self.failing_pair else None,
        }


def zero_round_check(
    p: Problem,
    pc: PortConstraint = UNCONSTRAINED,
    cap: int = DEFAULT_EXPANSION_CAP,
) -> ZeroRoundResult:
    if p.delta_e != 2:
        raise UnsupportedVariantError("zero-round check is implemented for the graph case only")
    if not pc.unconstrained:
        raise UnsupportedVariantError("constrained port numberings are not supported")
    edge_pairs = expand_constraint(p.edge_constraint, cap)
    first_failure: tuple[Label, Label] | None = None
    for config in sorted(expand_constraint(p.node_constraint, cap)):
        bad = None
        for a, b in combinations_with_replacement(sorted(set(config)), 2):
            if tuple(sorted((a, b))) not in edge_pairs:
                bad = (a, b)
                break
        if bad is None:
            return ZeroRoundResult(True, witness=config)
        if first_failure is None:
            first_failure = bad
    return ZeroRoundResult(False, failing_pair=first_failure)
