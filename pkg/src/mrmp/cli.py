"""Command-line interface.

Subcommands: gen, solve, bench, tune, verify, render, report. The MRMP_SEED
environment variable overrides --seed everywhere for reproducible CI runs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .bench.generate import gen_instance
from .bench.render import render
from .bench.runner import ALL_SOLVERS, read_jsonl, run_suite, summarize
from .bench.tuning import TuneSpec, tune
from .bench.verify import verify
from .instance import Instance, canonical_json
from .solution import Solution


def _seed(args) -> int:
    env = os.environ.get("MRMP_SEED")
    return int(env) if env else args.seed


def _cmd_gen(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = json.loads(Path(args.config).read_text()) if args.config else None
    base = _seed(args)
    for k in range(args.count):
        inst = gen_instance(args.scenario, args.n, seed=base + k,
                            profile=args.profile, config=config)
        path = out / f"{inst.id}.json"
        inst.save(path)
        print(path)
    return 0


def _cmd_solve(args) -> int:
    import random

    from .bench.runner import _metric_seed, dispatch_solver
    from .postprocess import total_traveling_time

    instance = Instance.load(args.instance)
    seed = _seed(args)
    overrides = json.loads(Path(args.params).read_text()) if args.params else {}
    result = dispatch_solver(instance, args.solver, args.time_limit, seed, overrides)
    tail = ""
    if result.solved:
        solution = result.solution
        rng = random.Random(_metric_seed(instance.id, args.solver, seed))
        raw, norm, _ = total_traveling_time(solution, instance.models,
                                            instance.obstacles, rng)
        solution.metrics["total_travel_time"] = raw
        solution.metrics["total_travel_time_normalized"] = norm
        if not args.no_verify:
            tail += f" verified={not verify(instance, solution)}"
        text = solution.to_json()
        if args.out:
            Path(args.out).write_text(text + "\n")
        else:
            print(text)
        if args.dump_roadmaps and result.roadmaps is not None:
            data = [rm.to_json_dict() for rm in result.roadmaps]
            Path(args.dump_roadmaps).write_text(canonical_json(data) + "\n")
        tail = f" T={solution.T}" + tail
    print(f"{result.outcome} wall_time={result.wall_time:.3f}s{tail}",
          file=sys.stderr)
    return 0 if result.solved else 2


def _cmd_bench(args) -> int:
    from .instance import INSTANCE_SCHEMA

    instances = []
    for p in sorted(Path(args.instances).glob("*.json")):
        data = json.loads(p.read_text())
        if data.get("schema") == INSTANCE_SCHEMA:
            instances.append(Instance.from_json_dict(data))
    if not instances:
        raise SystemExit(f"no instance files under {args.instances}")
    solvers = args.solvers.split(",")
    for s in solvers:
        if s not in ALL_SOLVERS:
            raise SystemExit(f"unknown solver {s!r} (choose from {ALL_SOLVERS})")
    overrides = json.loads(Path(args.params).read_text()) if args.params else None

    def progress(row):
        print(f"[{row.solver}] {row.instance_id}: {row.outcome} "
              f"({row.wall_time:.2f}s)", file=sys.stderr)

    results = run_suite(instances, solvers, args.time_limit,
                        workers=args.workers, seed=_seed(args),
                        out_path=args.out, overrides=overrides,
                        progress=progress if args.verbose else None)
    summary = summarize(results)
    summary_path = Path(args.out).with_suffix(".summary.json")
    summary_path.write_text(canonical_json(summary) + "\n")
    for solver, row in summary["per_solver"].items():
        print(f"{solver}: {row['solved']}/{row['total']} solved")
    print(summary_path)
    return 0


def _cmd_tune(args) -> int:
    spec = TuneSpec(solver=args.solver, scenario=args.scenario,
                    trials=args.trials, n_instances=args.instances,
                    per_run_limit=args.limit, seed=_seed(args),
                    profile=args.profile, n_robots=args.n)
    report = tune(spec, workers=args.workers, out_path=args.out)
    best = report["best"]
    print(f"best: solved {best['solved']}/{spec.n_instances} "
          f"params={best['params']}")
    print(args.out)
    return 0


def _cmd_verify(args) -> int:
    instance = Instance.load(args.instance)
    solution = Solution.load(args.solution)
    violations = verify(instance, solution)
    if not violations:
        print("OK")
        return 0
    for v in violations:
        loc = f"robot={v.robot}" + (f" other={v.other}" if v.other >= 0 else "")
        print(f"VIOLATION {v.kind} {loc} step={v.step} {v.detail}")
    return 1


def _cmd_render(args) -> int:
    instance = Instance.load(args.instance)
    solution = Solution.load(args.solution) if args.solution else None
    roadmaps = None
    if args.roadmaps:
        roadmaps = json.loads(Path(args.roadmaps).read_text())
    svg = render(instance, solution, roadmaps, size=args.size)
    Path(args.out).write_text(svg)
    print(args.out)
    return 0


def _cmd_report(args) -> int:
    results = read_jsonl(args.results)
    summary = summarize(results)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.json").write_text(canonical_json(summary) + "\n")
    for solver, row in summary["per_solver"].items():
        lines = ["wall_time_s,solved_count"]
        lines += [f"{t:.6f},{k}" for t, k in row["solved_vs_time"]]
        (out / f"solved_curve_{solver}.csv").write_text("\n".join(lines) + "\n")
    lines = ["solver,mean_travel_time_normalized,ci95_lo,ci95_hi,n"]
    for solver, row in summary["travel_time_normalized"].items():
        lines.append(f"{solver},{row['mean']:.6f},{row['ci95'][0]:.6f},"
                     f"{row['ci95'][1]:.6f},{row['n']}")
    (out / "travel_time.csv").write_text("\n".join(lines) + "\n")
    print(out / "summary.json")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mrmp",
                                description="Multi-robot motion planning toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate benchmark instances")
    g.add_argument("--scenario", required=True)
    g.add_argument("--n", type=int, default=None,
                   help="robot count (default: uniform 2..8 per instance)")
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--profile", default="standard")
    g.add_argument("--config", default=None, help="JSON config overrides")
    g.add_argument("--out", required=True)
    g.set_defaults(func=_cmd_gen)

    s = sub.add_parser("solve", help="solve one instance")
    s.add_argument("--instance", required=True)
    s.add_argument("--solver", default="sssp",
                   choices=list(ALL_SOLVERS))
    s.add_argument("--time-limit", type=float, default=60.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--params", default=None, help="JSON parameter overrides")
    s.add_argument("--out", default=None)
    s.add_argument("--dump-roadmaps", default=None)
    s.add_argument("--no-verify", action="store_true")
    s.set_defaults(func=_cmd_solve)

    b = sub.add_parser("bench", help="run a benchmark suite")
    b.add_argument("--instances", required=True, help="directory of instance JSONs")
    b.add_argument("--solvers", default="sssp")
    b.add_argument("--time-limit", type=float, default=300.0)
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--params", default=None, help="JSON {solver: overrides}")
    b.add_argument("--out", required=True, help="results JSONL path")
    b.add_argument("--verbose", action="store_true")
    b.set_defaults(func=_cmd_bench)

    t = sub.add_parser("tune", help="hyperparameter random search")
    t.add_argument("--solver", required=True)
    t.add_argument("--scenario", required=True)
    t.add_argument("--trials", type=int, default=100)
    t.add_argument("--instances", type=int, default=50)
    t.add_argument("--limit", type=float, default=30.0)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--profile", default="standard")
    t.add_argument("--n", type=int, default=None)
    t.add_argument("--workers", type=int, default=1)
    t.add_argument("--out", required=True)
    t.set_defaults(func=_cmd_tune)

    v = sub.add_parser("verify", help="verify a solution against an instance")
    v.add_argument("--instance", required=True)
    v.add_argument("--solution", required=True)
    v.set_defaults(func=_cmd_verify)

    r = sub.add_parser("render", help="render instance/solution/roadmaps to SVG")
    r.add_argument("--instance", required=True)
    r.add_argument("--solution", default=None)
    r.add_argument("--roadmaps", default=None)
    r.add_argument("--size", type=int, default=512)
    r.add_argument("--out", required=True)
    r.set_defaults(func=_cmd_render)

    rep = sub.add_parser("report", help="summary tables from results JSONL")
    rep.add_argument("--results", required=True)
    rep.add_argument("--out", required=True)
    rep.set_defaults(func=_cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
