"""Command-line runner: one scenario, one or many seeds."""
from __future__ import annotations

import argparse
import logging
import os
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

from .executive import BUDGET_EXHAUSTED, PLANNING_FAILURE, SUCCESS, Outcome, run
from .planner.domain import RuleParams
from .scenario import Scenario, ScenarioError, bundled_names, load_rules, load_scenario
from .sim import Simulator
from .trace import emit_trace

EXIT_CODES = {SUCCESS: 0, PLANNING_FAILURE: 2, BUDGET_EXHAUSTED: 3}
EX_USAGE = 64
EX_DATAERR = 65
EX_NOINPUT = 66

log = logging.getLogger("owgp")


def exit_code(status: str) -> int:
    return EXIT_CODES[status]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def parse_seeds(text: str) -> list[int]:
    """``a..b`` (inclusive), ``a,b,c`` or a single integer."""
    m = re.fullmatch(r"\s*(\d+)\s*\.\.\s*(\d+)\s*", text)
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
        if hi < lo:
            raise argparse.ArgumentTypeError(f"empty seed range {text!r}")
        return list(range(lo, hi + 1))
    try:
        return [int(s) for s in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from None


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative: {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="owgp", description="Run an open-world manipulation scenario in simulation.")
    p.add_argument("--scenario", help="scenario file, or the name of a bundled scenario")
    seeds = p.add_mutually_exclusive_group()
    seeds.add_argument("--seed", type=_positive, help="single simulator seed (default 0)")
    seeds.add_argument("--seeds", type=parse_seeds, help="seed range a..b (inclusive) or list a,b,c")
    p.add_argument("--trace", help="JSON-lines trace path; with several seeds, '{seed}' in the "
                                   "path is replaced, otherwise the seed is appended to the stem")
    p.add_argument("--summary", action="store_true", help="print a per-seed status table")
    p.add_argument("--max-primitives", type=_positive, help="override the primitive budget")
    p.add_argument("--max-replans", type=_positive, help="override the replan budget")
    p.add_argument("--rules", help="YAML file of rule-library parameters")
    p.add_argument("--report", metavar="DIR", help="write summary.csv and figures to DIR")
    p.add_argument("--jobs", type=_positive, default=1, help="parallel worker processes")
    p.add_argument("--list", action="store_true", help="list bundled scenarios and exit")
    return p


@dataclass
class RunResult:
    seed: int
    status: str
    primitives: int
    replans: int
    seconds: float
    diagnostic: str
    trace_path: Optional[str] = None


def trace_path_for(template: str, seed: int, many: bool) -> str:
    if "{seed}" in template:
        return template.replace("{seed}", str(seed))
    if not many:
        return template
    p = Path(template)
    return str(p.with_name(f"{p.stem}.seed{seed}{p.suffix}"))


def configure(scn: Scenario, rules: Optional[dict], max_primitives: Optional[int],
              max_replans: Optional[int]) -> Scenario:
    params = scn.params
    if rules:
        merged = params.as_dict()
        merged.update(rules)
        params = RuleParams.from_dict(merged)
    limits = scn.limits
    if max_primitives is not None:
        limits = replace(limits, max_primitives=max_primitives)
    if max_replans is not None:
        limits = replace(limits, max_replans=max_replans)
    return replace(scn, params=params, limits=limits)


def run_one(scn: Scenario, seed: int) -> Outcome:
    sim = Simulator(scn.world, seed)
    return run(scn.belief, scn.goal, sim, scn.limits, seed, scn.params, noise=scn.noise, gate=scn.gate)


def _job(args) -> tuple[RunResult, Optional[Outcome]]:
    scenario, rules, max_prim, max_rep, seed, trace_path, keep = args
    scn = configure(load_scenario(scenario), rules, max_prim, max_rep)
    t0 = time.perf_counter()
    out = run_one(scn, seed)
    dt = time.perf_counter() - t0
    if trace_path:
        emit_trace(out.trace, trace_path)
    res = RunResult(seed, out.status, out.steps_used, out.replans, dt, out.diagnostic, trace_path)
    return res, (out if keep else None)


def format_summary(results: Sequence[RunResult]) -> str:
    lines = [f"{'seed':>6}  {'status':<17} {'primitives':>10} {'replans':>7} {'seconds':>8}"]
    for r in results:
        lines.append(f"{r.seed:>6}  {r.status:<17} {r.primitives:>10} {r.replans:>7} {r.seconds:>8.2f}")
    ok = sum(r.status == SUCCESS for r in results)
    lines.append(f"success {ok}/{len(results)} ({100.0 * ok / max(1, len(results)):.1f}%)")
    return "\n".join(lines)


def main(argv: Optional[Sequence[str]] = None) -> int:
    level = os.environ.get("OWGP_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list:
        print("\n".join(bundled_names()))
        return 0
    if not args.scenario:
        parser.error("--scenario is required")
    seeds = args.seeds if args.seeds is not None else [args.seed if args.seed is not None else 0]

    try:
        rules = load_rules(args.rules) if args.rules else None
        scn = configure(load_scenario(args.scenario), rules, args.max_primitives, args.max_replans)
    except ScenarioError as exc:
        print(f"owgp: {exc}", file=sys.stderr)
        return EX_NOINPUT if "not found" in str(exc) else EX_DATAERR
    except (TypeError, ValueError) as exc:
        print(f"owgp: {exc}", file=sys.stderr)
        return EX_DATAERR
    log.info("scenario %s, %d seed(s)", scn.name, len(seeds))

    many = len(seeds) > 1
    keep = args.report is not None
    jobs = [(args.scenario, rules, args.max_primitives, args.max_replans, s,
             trace_path_for(args.trace, s, many) if args.trace else None, keep and s == seeds[0])
            for s in seeds]
    if args.jobs > 1 and many:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            pairs = list(pool.map(_job, jobs))
    else:
        pairs = [_job(j) for j in jobs]
    results = [r for r, _ in pairs]

    for r in results:
        log.info("seed %d: %s (%d primitives, %d replans) %s", r.seed, r.status, r.primitives,
                 r.replans, r.diagnostic)
    if args.summary:
        print(format_summary(results))
    elif not many:
        r = results[0]
        print(f"{r.status}: {r.primitives} primitives, {r.replans} replans"
              + (f" ({r.diagnostic})" if r.diagnostic else ""))
    if args.report:
        from .report import write_report

        write_report(args.report, scn, results, [o for _, o in pairs])
    return max(exit_code(r.status) for r in results)


if __name__ == "__main__":
    sys.exit(main())
