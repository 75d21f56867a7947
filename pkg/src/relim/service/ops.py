"""Operation dispatch shared by the HTTP service and the CLI.

Every operation takes JSON-ish params plus an optional current problem text
and returns (snapshot, summary): the new canonical problem text (None for
read-only operations) and a JSON-able result.  Using one dispatcher keeps
CLI output and service responses identical byte for byte.
"""

from __future__ import annotations

import json

from ..caps import Deadline, EngineCaps
from ..diagram import compute_diagram
from ..errors import (
    DomainError,
    PolicyError,
    StrengthenError,
    UnknownLabelError,
)
from ..family import (
    FamilyVector,
    build_family_problem,
    build_fixedpoint_variant,
    lower_bound_length,
    prefix_iter,
    ruling_set_lower_bound,
    run_family_sequence,
)
from ..labels import parse_label_token
from ..lifting import LiftingParams, lifting_bound
from ..problems import (
    CondensedConfiguration,
    Problem,
    format_problem,
    parse_problem,
    problems_equal,
)
from ..roundelim import (
    RenamingPolicy,
    apply_re,
    apply_relaxations,
    apply_rere,
    detect_fixed_point,
    rename_labels,
    run_sequence,
    step,
)
from ..simulator import (
    Instance,
    arb_colored_ruling_set,
    build_instance,
    greedy_arbdefective,
    sweep_ruling_set,
    verify,
)
from ..zeroround import zero_round_check

OPS = (
    "parse",
    "re",
    "rere",
    "step",
    "rename",
    "relax",
    "fixed-point-check",
    "family-build",
    "sequence",
    "diagram",
    "zero-round",
    "calculate",
    "simulate",
    "verify",
)


def dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def _policy(name: str | None, mapping: dict | None = None) -> RenamingPolicy | None:
    if name in (None, "none"):
        return None
    if name == "union":
        return RenamingPolicy.union()
    if name == "intersection":
        return RenamingPolicy.intersection()
    if name == "search-bijection":
        return RenamingPolicy("search-bijection")
    if name == "explicit":
        table = {
            parse_label_token(k): parse_label_token(v) for k, v in (mapping or {}).items()
        }
        return RenamingPolicy.explicit(table)
    raise PolicyError(f"unknown renaming policy {name!r}")


def _need_problem(problem_text: str | None) -> Problem:
    if not problem_text:
        raise DomainError("this operation needs a problem; create or parse one first")
    return parse_problem(problem_text)


def _parse_configuration(text: str, side_arity: int) -> CondensedConfiguration:
    shim = parse_problem(f"delta {side_arity} {side_arity}\nnodes:\n{text}\nedges:\n{text}\n")
    return next(iter(shim.node_constraint))


def _relax_actions(p: Problem, raw_actions: list[dict]) -> list[dict]:
    actions = []
    for raw in raw_actions:
        kind = raw["kind"]
        if kind == "add_configuration":
            arity = p.delta_n if raw["side"] == "node" else p.delta_e
            actions.append(
                {
                    "kind": kind,
                    "side": raw["side"],
                    "configuration": _parse_configuration(raw["configuration"], arity),
                }
            )
        elif kind == "merge_labels":
            actions.append(
                {
                    "kind": kind,
                    "labels": [parse_label_token(t) for t in raw["labels"]],
                    "into": parse_label_token(raw["into"]),
                }
            )
        elif kind == "map_to_superset":
            actions.append(
                {
                    "kind": kind,
                    "mapping": {
                        parse_label_token(k): parse_label_token(v)
                        for k, v in raw["mapping"].items()
                    },
                }
            )
        else:
            raise PolicyError(f"unknown relaxation action {kind!r}")
    return actions


def _instance_from(params) -> Instance:
    data = params["instance"]
    if isinstance(data, str):
        data = json.loads(data)
    if "edges" in data and data["edges"] and isinstance(data["edges"][0], dict) and "portU" in data["edges"][0]:
        return Instance.from_json(data)
    return build_instance(data)


def _family_vector(z) -> FamilyVector:
    if isinstance(z, str):
        z = [int(x) for x in z.strip("[]").replace(" ", "").split(",") if x != ""]
    return FamilyVector.make(z)


def _calculate(params: dict) -> dict:
    which = params["which"]
    if which == "prefix":
        v = _family_vector(params["z"])
        times = int(params.get("iterations", 1))
        return {"which": "prefix", "z": list(v.entries), "iterations": times,
                "result": list(prefix_iter(v, times).entries)}
    if which == "lower-bound-length":
        v = _family_vector(params["z"])
        res = lower_bound_length(int(params["delta"]), v)
        return {"which": which, "delta": int(params["delta"]), "z": list(v.entries),
                **res.to_json()}
    if which == "ruling-set-bound":
        res = ruling_set_lower_bound(
            int(params["delta"]), int(params["alpha"]), int(params["c"]), int(params["beta"])
        )
        return {"which": which, **res.to_json()}
    lifting = LiftingParams(
        delta=int(params["delta"]),
        f_delta=float(params["f_delta"]) if params.get("f_delta") is not None else None,
        p=float(params["p"]) if params.get("p") is not None else None,
        j=int(params["j"]) if params.get("j") is not None else None,
        t=float(params["t"]) if params.get("t") is not None else None,
        n=float(params["n"]) if params.get("n") is not None else None,
    )
    return lifting_bound(lifting, which).to_json()


def _simulate(params: dict, caps: EngineCaps) -> dict:
    inst = _instance_from(params)
    algorithm = params["algorithm"]
    if algorithm == "greedy":
        res = greedy_arbdefective(inst, params["defects"])
        solution = res.to_json()
        report = verify(
            "arbdefective", inst, {**solution, "defects": list(params["defects"])}
        )
    elif algorithm == "sweep":
        res = sweep_ruling_set(inst, int(params["beta"]), params.get("schedule"))
        solution = res.to_json()
        report = verify(
            "ruling",
            inst,
            {
                "set": solution["set"],
                "colors": {v: 1 for v in solution["set"]},
                "oriented": [],
                "alpha": 0,
                "c": 1,
                "beta": int(params["beta"]),
            },
        )
    elif algorithm == "arbruling":
        res = arb_colored_ruling_set(
            inst, int(params["alpha"]), int(params["c"]), int(params["beta"])
        )
        solution = res.to_json()
        report = verify("ruling", inst, {**solution, "colors": res.colors})
    else:
        raise DomainError(f"unknown algorithm {algorithm!r}")
    return {"instance": inst.to_json(), "solution": solution, "verify": report.to_json()}


def _verify_op(params: dict, problem_text: str | None) -> dict:
    inst = _instance_from(params)
    kind = params["kind"]
    solution = params["solution"]
    if isinstance(solution, str):
        solution = json.loads(solution)
    problem = None
    if kind == "labeling":
        text = params.get("problem") or problem_text
        problem = _need_problem(text)
        solution = solution.get("labeling", solution)
    return verify(kind, inst, solution, problem=problem).to_json()


def execute_op(
    op: str,
    params: dict,
    problem_text: str | None = None,
    caps: EngineCaps | None = None,
) -> tuple[str | None, dict]:
    """Returns (new snapshot text or None, summary)."""
    caps = caps or EngineCaps()
    deadline = Deadline(caps.deadline_seconds)
    params = params or {}

    if op == "parse":
        p = parse_problem(params["text"])
        return format_problem(p), {"stats": p.stats()}

    if op == "family-build":
        if params.get("variant"):
            p = build_fixedpoint_variant(int(params["delta"]))
        else:
            p = build_family_problem(int(params["delta"]), _family_vector(params["z"]))
        return format_problem(p), {"stats": p.stats()}

    if op in ("re", "rere"):
        p = _need_problem(problem_text)
        out = (apply_re if op == "re" else apply_rere)(p, caps, deadline)
        return format_problem(out), {"stats": out.stats()}

    if op == "step":
        p = _need_problem(problem_text)
        trace = step(
            p,
            rename_re=_policy(params.get("rename_re"), params.get("mapping_re")),
            rename_rere=_policy(params.get("rename_rere"), params.get("mapping_rere")),
            caps=caps,
            deadline=deadline,
        )
        fixed = problems_equal(trace.output, p)
        # a fixed point keeps its representation so the snapshot is unchanged
        snapshot = problem_text if fixed else format_problem(trace.output)
        return snapshot, {
            "fixed_point": fixed,
            "stats": trace.stats,
        }

    if op == "rename":
        p = _need_problem(problem_text)
        policy = _policy(params.get("policy"), params.get("mapping"))
        if policy is None:
            raise PolicyError("rename needs a policy")
        out = rename_labels(p, policy)
        return format_problem(out), {"stats": out.stats()}

    if op == "relax":
        p = _need_problem(problem_text)
        if params.get("check_only"):
            try:
                out = apply_relaxations(p, _relax_actions(p, params["actions"]), caps)
            except (StrengthenError, UnknownLabelError, PolicyError) as e:
                return None, {"valid": False, "reason": e.message}
            return None, {"valid": True, "stats": out.stats()}
        out = apply_relaxations(p, _relax_actions(p, params["actions"]), caps)
        return format_problem(out), {"stats": out.stats()}

    if op == "fixed-point-check":
        p = _need_problem(problem_text)
        names = params.get("policies", ["union", "intersection"])
        result = detect_fixed_point(
            p, (_policy(names[0]) or RenamingPolicy.none(),
                _policy(names[1]) or RenamingPolicy.none()),
            caps, deadline,
        )
        return None, {
            "fixed_point": result.is_fixed_point,
            "stats": result.trace.stats,
            "output": format_problem(result.trace.output),
            "intermediate": format_problem(result.trace.intermediate),
        }

    if op == "sequence":
        steps = int(params["steps"])
        if params.get("policy") == "family":
            traces = run_family_sequence(
                int(params["delta"]), _family_vector(params["z"]), steps, caps
            )
        else:
            p = _need_problem(problem_text)
            traces = run_sequence(p, steps, caps=caps)
        return format_problem(traces[-1].output), {
            "steps": [t.stats for t in traces],
            "problems": [format_problem(t.output) for t in traces],
        }

    if op == "diagram":
        p = _need_problem(problem_text)
        side = params.get("side", "edge")
        return None, {"diagram": compute_diagram(p, side).to_json()}

    if op == "zero-round":
        p = _need_problem(problem_text)
        return None, {"zero_round": zero_round_check(p).to_json()}

    if op == "calculate":
        return None, {"result": _calculate(params)}

    if op == "simulate":
        return None, _simulate(params, caps)

    if op == "verify":
        return None, {"verify": _verify_op(params, problem_text)}

    raise DomainError(f"unknown operation {op!r}; options: {', '.join(OPS)}")
