from __future__ import annotations

import random

import pytest

from relim.labels import parse_label_token
from relim.problems import CondensedConfiguration, Problem, parse_problem

MIS_TEXT = "nodes: M^3 | P U^2 ; edges: M [U P] | U U"


def sinkless_text(delta: int) -> str:
    return (
        f"delta {delta} {delta}\n"
        "nodes:\n"
        f"B [B W]^{delta - 1}\n"
        "edges:\n"
        f"W [B W]^{delta - 1}\n"
    )


@pytest.fixture
def mis() -> Problem:
    return parse_problem(MIS_TEXT)


def random_problem(rng: random.Random, delta: int = 3, num_labels: int = 3) -> Problem:
    """A random problem over plain labels with concrete configurations."""
    labels = [parse_label_token(chr(ord("A") + i)) for i in range(num_labels)]
    def random_constraint(arity, count):
        out = set()
        for _ in range(count):
            out.add(CondensedConfiguration.of_labels(rng.choices(labels, k=arity)))
        return out
    nodes = random_constraint(delta, rng.randint(1, 4))
    edges = random_constraint(2, rng.randint(1, 4))
    return Problem.make(nodes, edges, delta_n=delta, delta_e=2)
