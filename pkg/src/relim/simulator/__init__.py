from .instance import Instance, build_instance
from .runner import run_algorithm
from .algorithms import greedy_arbdefective, sweep_ruling_set, arb_colored_ruling_set
from .reductions import reduce_solution_to_family
from .verify import verify

__all__ = [
    "Instance",
    "build_instance",
    "run_algorithm",
    "greedy_arbdefective",
    "sweep_ruling_set",
    "arb_colored_ruling_set",
    "reduce_solution_to_family",
    "verify",
]
