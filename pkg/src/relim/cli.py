"""Command-line front door mirroring the service.

Every subcommand routes through the same operation dispatcher as the HTTP
endpoints, so outputs agree byte for byte; --server sends the operation to a
running service instead of executing in process.
"""

from __future__ import annotations

import argparse
import json
import sys

from .caps import caps_from_env
from .errors import CapExceededError, RelimError
from .family import FamilyIntermediates, expected_intermediate
from .labels import parse_label_token
from .problems import format_problem
from .service.ops import dump_json, execute_op

EXIT_USAGE = 2
EXIT_CAP = 3


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(path: str | None, text: str):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _vector(text: str) -> list[int]:
    return [int(x) for x in text.strip("[]").replace(" ", ",").split(",") if x != ""]


def _run_op(args, op: str, params: dict, problem_text: str | None = None):
    if getattr(args, "server", None):
        return _run_remote(args.server, op, params, problem_text)
    caps = caps_from_env()
    return execute_op(op, params, problem_text, caps)


def _run_remote(server: str, op: str, params: dict, problem_text: str | None):
    import urllib.request

    def post(path, payload):
        req = urllib.request.Request(
            server.rstrip("/") + path,
            data=json.dumps(payload).encode(),
            headers={"content-type": "application/json"},
            method="POST",
        )
        with urllib.request.urlopen(req) as resp:
            return json.loads(resp.read())

    if op == "parse":
        created = post("/sessions", {"text": params["text"]})
        return created["snapshot"], created["history"][0]["summary"]
    if op == "family-build":
        created = post("/sessions", {"family": params})
        return created["snapshot"], created["history"][0]["summary"]
    created = post("/sessions", {"text": problem_text or "delta 2 2\nnodes:\nA A\nedges:\nA A\n"})
    result = post(f"/sessions/{created['id']}/actions", {"op": op, "params": params})
    snapshot = result["snapshot"] if result["snapshot"] != created["snapshot"] else None
    return snapshot, result["summary"]


def _emit(args, snapshot: str | None, summary: dict, text_line: str | None = None):
    if getattr(args, "json", False):
        payload = {"summary": summary}
        if snapshot is not None:
            payload["problem"] = snapshot
        _write(getattr(args, "out", None), dump_json(payload))
    elif snapshot is not None:
        _write(getattr(args, "out", None), snapshot)
        if text_line:
            print(text_line)
    elif text_line is not None:
        _write(getattr(args, "out", None), text_line + "\n")
    else:
        _write(getattr(args, "out", None), dump_json(summary))


# ---------------------------------------------------------------------------
# subcommand handlers


def cmd_parse(args):
    snapshot, summary = _run_op(args, "parse", {"text": _read(args.file)})
    _emit(args, snapshot, summary)


def cmd_diagram(args):
    _, summary = _run_op(args, "diagram", {"side": args.side}, _read(args.file))
    if args.json:
        _emit(args, None, summary)
        return
    d = summary["diagram"]
    lines = [f"# {args.side} diagram"]
    for cls in d["classes"]:
        if len(cls) > 1:
            lines.append("equal: " + " ".join(cls))
    lines.extend(f"{a} -> {b}" for a, b in d["edges"])
    _write(args.out, "\n".join(lines) + "\n")


def cmd_engine(args):
    params = {}
    if args.command == "step":
        params = {"rename_re": args.rename_re, "rename_rere": args.rename_rere}
    snapshot, summary = _run_op(args, args.command, params, _read(args.file))
    _emit(args, snapshot, summary)


def cmd_fixedpoint(args):
    if args.family:
        delta, z = args.family
        text, _ = _run_op(args, "family-build", {"delta": int(delta), "z": _vector(z)})
    elif args.variant is not None:
        text, _ = _run_op(args, "family-build", {"delta": args.variant, "variant": True, "z": []})
    else:
        text = _read(args.file)
    policies = args.policies.split(",")
    _, summary = _run_op(args, "fixed-point-check", {"policies": policies}, text)
    if args.json:
        _emit(args, None, summary)
    else:
        print("fixed point: " + ("yes" if summary["fixed_point"] else "no"))
    if not summary["fixed_point"] and args.strict:
        sys.exit(1)


def cmd_relax(args):
    actions = json.loads(_read(args.actions))
    snapshot, summary = _run_op(args, "relax", {"actions": actions}, _read(args.file))
    _emit(args, snapshot, summary)


def cmd_family_build(args):
    params = {"delta": args.delta, "z": _vector(args.z) if args.z else [], "variant": args.variant}
    snapshot, summary = _run_op(args, "family-build", params)
    _emit(args, snapshot, summary)


def cmd_family_prefix(args):
    _, summary = _run_op(
        args, "calculate",
        {"which": "prefix", "z": _vector(args.z), "iterations": args.iterations},
    )
    result = summary["result"]
    if args.json:
        _emit(args, None, summary)
    else:
        print("[" + ",".join(str(x) for x in result["result"]) + "]")


def cmd_family_lowerbound(args):
    _, summary = _run_op(
        args, "calculate", {"which": "lower-bound-length", "delta": args.delta, "z": _vector(args.z)}
    )
    result = summary["result"]
    if args.json:
        _emit(args, None, summary)
    elif result["infinite"]:
        print("inf")
    else:
        print(result["t"] if result["t"] is not None else -1)


def cmd_family_rulingbound(args):
    _, summary = _run_op(
        args, "calculate",
        {"which": "ruling-set-bound", "delta": args.delta, "alpha": args.alpha,
         "c": args.c, "beta": args.beta},
    )
    result = summary["result"]
    if args.json:
        _emit(args, None, summary)
    else:
        print(f"t={result['t']} reduced={result['reduced']}")


def cmd_family_oracle(args):
    oracle = expected_intermediate(args.delta, _vector(args.z), args.which)
    rows = sorted(c.render() for c in oracle.constraint)
    if args.json:
        _write(args.out, dump_json({"which": args.which, "rows": rows,
                                    "labels": sorted(l.token for l in oracle.labels)}))
    else:
        _write(args.out, "\n".join(rows) + "\n")


def cmd_family_project(args):
    oracle = FamilyIntermediates(args.delta, _vector(args.z))
    from .family import project_labeling

    data = json.loads(_read(args.labeling))
    per_node: dict[int, dict[int, object]] = {}
    for key, token in data["labeling"].items():
        node_s, port_s = key.split(",")
        per_node.setdefault(int(node_s), {})[int(port_s)] = parse_label_token(token)
    projected = project_labeling(per_node, oracle)
    out = {
        "z": list(oracle.projected_vector().entries),
        "labeling": {
            f"{v},{p}": lab.token
            for v, ports in sorted(projected.items())
            for p, lab in sorted(ports.items())
        },
    }
    _write(args.out, dump_json(out))


def cmd_calc_lifting(args):
    params = {"which": args.which, "delta": args.delta, "f_delta": args.f,
              "p": args.p, "j": args.j, "t": args.t, "n": args.n}
    _, summary = _run_op(args, "calculate", params)
    if args.json:
        _emit(args, None, summary)
    else:
        result = summary["result"]
        print(result["value"])


def cmd_sim_build(args):
    from .simulator import build_instance

    inst = build_instance(json.loads(_read(args.spec)))
    _write(args.out, inst.dumps() + "\n")


def cmd_sim_run(args):
    params: dict = {"instance": json.loads(_read(args.instance)), "algorithm": args.algorithm}
    if args.algorithm == "greedy":
        params["defects"] = _vector(args.defects)
    elif args.algorithm == "sweep":
        params["beta"] = args.beta
        if args.schedule:
            params["schedule"] = _vector(args.schedule)
    elif args.algorithm == "arbruling":
        params.update({"alpha": args.alpha, "c": args.c, "beta": args.beta})
    _, summary = _run_op(args, "simulate", params)
    _write(args.out, dump_json(summary))
    if not summary["verify"]["ok"]:
        sys.exit(1)


def cmd_sim_verify(args):
    params = {
        "kind": args.kind,
        "instance": json.loads(_read(args.instance)),
        "solution": json.loads(_read(args.solution)),
    }
    problem_text = _read(args.problem) if args.problem else None
    if args.kind == "labeling" and problem_text is None:
        print("labeling verification needs --problem", file=sys.stderr)
        sys.exit(EXIT_USAGE)
    params["problem"] = problem_text
    _, summary = _run_op(args, "verify", params)
    _write(args.out, dump_json(summary))
    if not summary["verify"]["ok"]:
        sys.exit(1)


def cmd_sim_reduce(args):
    from .simulator import Instance, reduce_solution_to_family

    inst = Instance.loads(_read(args.instance))
    solution = json.loads(_read(args.solution))
    if args.kind == "arbdefective":
        result = reduce_solution_to_family(
            "arbdefective", solution, inst, defects=_vector(args.defects)
        )
    else:
        result = reduce_solution_to_family(
            "ruling", solution, inst, alpha=args.alpha, c=args.c, beta=args.beta
        )
    payload = result.to_json()
    payload["problem"] = format_problem(result.problem)
    _write(args.out, dump_json(payload))


def cmd_serve(args):
    import uvicorn

    from .service.app import create_app

    app = create_app(store_path=args.store, deadline_seconds=args.deadline)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="relim", description=__doc__)
    ap.add_argument("--server", help="route operations through a running service URL")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, with_out=True):
        p.add_argument("--json", action="store_true")
        if with_out:
            p.add_argument("--out")

    p = sub.add_parser("parse", help="parse and canonicalize a problem file")
    p.add_argument("file")
    common(p)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("diagram", help="label strength diagram")
    p.add_argument("file")
    p.add_argument("--side", choices=["node", "edge"], default="edge")
    common(p)
    p.set_defaults(func=cmd_diagram)

    for name in ("re", "rere", "step"):
        p = sub.add_parser(name, help=f"apply {name}")
        p.add_argument("file")
        if name == "step":
            p.add_argument("--rename-re", dest="rename_re", default=None)
            p.add_argument("--rename-rere", dest="rename_rere", default=None)
        common(p)
        p.set_defaults(func=cmd_engine)

    p = sub.add_parser("fixedpoint", help="check a problem for the fixed-point property")
    p.add_argument("file", nargs="?")
    p.add_argument("--family", nargs=2, metavar=("DELTA", "Z"))
    p.add_argument("--variant", type=int, metavar="DELTA")
    p.add_argument("--policies", default="union,intersection")
    p.add_argument("--strict", action="store_true", help="exit 1 when not a fixed point")
    common(p)
    p.set_defaults(func=cmd_fixedpoint)

    p = sub.add_parser("relax", help="apply relaxation actions from a JSON file")
    p.add_argument("file")
    p.add_argument("--actions", required=True)
    common(p)
    p.set_defaults(func=cmd_relax)

    fam = sub.add_parser("family", help="family generators and calculators")
    fsub = fam.add_subparsers(dest="family_command", required=True)

    p = fsub.add_parser("build")
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--z")
    p.add_argument("--variant", action="store_true")
    common(p)
    p.set_defaults(func=cmd_family_build)

    p = fsub.add_parser("prefix")
    p.add_argument("--z", required=True)
    p.add_argument("--iterations", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_family_prefix)

    p = fsub.add_parser("lowerbound")
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--z", required=True)
    common(p)
    p.set_defaults(func=cmd_family_lowerbound)

    p = fsub.add_parser("rulingbound")
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--alpha", type=int, default=0)
    p.add_argument("--c", type=int, default=1)
    p.add_argument("--beta", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_family_rulingbound)

    p = fsub.add_parser("oracle")
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--z", required=True)
    p.add_argument("--which", choices=["re-edge", "keytec-node", "estar-edge"], required=True)
    common(p)
    p.set_defaults(func=cmd_family_oracle)

    p = fsub.add_parser("project")
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--z", required=True)
    p.add_argument("--labeling", required=True)
    common(p)
    p.set_defaults(func=cmd_family_project)

    calc = sub.add_parser("calc", help="closed-form calculators")
    csub = calc.add_subparsers(dest="calc_command", required=True)
    p = csub.add_parser("lifting")
    p.add_argument("--which", required=True)
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--f", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--j", type=int)
    p.add_argument("--t", type=float)
    p.add_argument("--n", type=float)
    common(p)
    p.set_defaults(func=cmd_calc_lifting)

    sim = sub.add_parser("sim", help="simulator")
    ssub = sim.add_subparsers(dest="sim_command", required=True)

    p = ssub.add_parser("build")
    p.add_argument("--spec", required=True)
    common(p)
    p.set_defaults(func=cmd_sim_build)

    p = ssub.add_parser("run")
    p.add_argument("--instance", required=True)
    p.add_argument("--algorithm", choices=["greedy", "sweep", "arbruling"], required=True)
    p.add_argument("--defects")
    p.add_argument("--schedule")
    p.add_argument("--alpha", type=int, default=0)
    p.add_argument("--c", type=int, default=1)
    p.add_argument("--beta", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_sim_run)

    p = ssub.add_parser("verify")
    p.add_argument("--kind", choices=["labeling", "arbdefective", "ruling"], required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--solution", required=True)
    p.add_argument("--problem")
    common(p)
    p.set_defaults(func=cmd_sim_verify)

    p = ssub.add_parser("reduce")
    p.add_argument("--kind", choices=["arbdefective", "ruling"], required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--solution", required=True)
    p.add_argument("--defects")
    p.add_argument("--alpha", type=int, default=0)
    p.add_argument("--c", type=int, default=1)
    p.add_argument("--beta", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_sim_reduce)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--store")
    p.add_argument("--deadline", type=float, default=60.0)
    p.set_defaults(func=cmd_serve)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except CapExceededError as e:
        print(dump_json(e.to_json()), file=sys.stderr)
        return EXIT_CAP
    except RelimError as e:
        print(dump_json(e.to_json()), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
