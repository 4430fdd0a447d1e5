"""Structure-constraint guided fuzzing of simulated native methods.

    scfuzz run TARGET [flags]        fuzz a target program, write a report
    scfuzz trace TARGET INPUTS       print the API-call trace of one execution
    scfuzz render SC_JSON            generate and print inputs for an SC
    scfuzz bench SUITE               pycing vs random-baseline explored SCs

Exit status: 0 on success, 1 when a run finds leaks or crashes, 2 on
usage, parse or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from .constraints import StructureConstraint
from .dsl import parse_program
from .engine import CampaignConfig, MODES, run_campaign, summary_text
from .errors import ScfuzzError
from .generator import ValueSet, generate
from .interp import execute
from .lattice import load_lattice
from .render import parse_listing, render_value, split_blocks
from .trace import encode_record
from .values import ValueFactory

FIXTURES = Path(__file__).parent / "fixtures"

# suite name -> fixture file; fig7 is the handcrafted benchmark's other name
SUITES = {
    "handcrafted": "handcrafted.nlib",
    "fig7": "handcrafted.nlib",
    "power": "power.nlib",
    "nested": "nested.nlib",
    "identity": "identity.nlib",
}
BENCH_BUDGET = 1000

EXIT_OK, EXIT_FINDINGS, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _positive(text):
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {n}")
    return n


def _read(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror or e}") from None


def _load_program(path):
    return parse_program(_read(path))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    common.add_argument("--lattice", help="type lattice override file")

    campaign = argparse.ArgumentParser(add_help=False)
    campaign.add_argument("--sc-cap", type=_positive, default=800,
                          help="reversed SCs kept per loop (default 800)")
    campaign.add_argument("--max-loops", type=_positive, default=40,
                          help="loop limit (default 40)")
    campaign.add_argument("--corpus", help="seed values: listing blocks separated by blank lines")

    p = argparse.ArgumentParser(prog="scfuzz", description=__doc__.split("\n\n")[0],
                                epilog=__doc__.split("\n\n")[-1].strip())
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common, campaign], help="run a campaign")
    run.add_argument("target")
    run.add_argument("--mode", choices=MODES, default="pycing")
    run.add_argument("--out", default="scfuzz-out", help="report directory (default scfuzz-out)")
    run.add_argument("--budget", type=_positive, help="execution budget")

    tr = sub.add_parser("trace", parents=[common], help="trace one execution")
    tr.add_argument("target")
    tr.add_argument("inputs", help="listing blocks, one per parameter, or a generate directive")

    rd = sub.add_parser("render", parents=[common], help="render generated inputs for an SC")
    rd.add_argument("sc", help="SC JSON file")

    bench = sub.add_parser("bench", parents=[common, campaign], help="compare against the baseline")
    bench.add_argument("suite", help=f"one of {', '.join(SUITES)}")
    return p


def _generated(sc_text, params, lattice, seed):
    try:
        sc = StructureConstraint.from_json(json.loads(sc_text))
    except (json.JSONDecodeError, TypeError, KeyError, ValueError) as e:
        raise UsageError(f"bad SC JSON: {e}") from None
    made = generate(sc, ValueSet.with_defaults(), random.Random(seed), lattice)
    if params is None:
        return [made[r] for r in sorted(made)]
    missing = [p for p in params if p not in made]
    if missing:
        raise UsageError(f"SC has no root for parameter(s) {', '.join(missing)}")
    return [made[p] for p in params]


def read_inputs(text, params, lattice, seed):
    """Input values from an inputs file: listing blocks or ``generate`` + SC JSON."""
    head, _, rest = text.lstrip().partition("\n")
    if head.strip() == "generate":
        return _generated(rest, params, lattice, seed)
    factory = ValueFactory(lattice)
    values = [parse_listing(b, factory) for b in split_blocks(text)]
    if len(values) != len(params):
        raise UsageError(f"expected {len(params)} input block(s), found {len(values)}")
    return values


def cmd_run(args, lattice, out):
    program = _load_program(args.target)
    config = CampaignConfig(sc_cap_per_loop=args.sc_cap, max_loops=args.max_loops,
                            rng_seed=args.seed, mode=args.mode, corpus_path=args.corpus,
                            exec_budget=args.budget, out_dir=args.out)
    report = run_campaign(program, config, lattice)
    out.write(summary_text(report))
    out.write(f"report: {Path(args.out) / 'report.json'}\n")
    if report.error:
        return EXIT_USAGE
    return EXIT_FINDINGS if report.has_bugs else EXIT_OK


def cmd_trace(args, lattice, out):
    program = _load_program(args.target)
    inputs = read_inputs(_read(args.inputs), program.params, lattice, args.seed)
    result = execute(program, inputs, lattice)
    for r in result.trace:
        out.write(encode_record(r) + "\n")
    return EXIT_OK


def cmd_render(args, lattice, out):
    values = _generated(_read(args.sc), None, lattice, args.seed)
    out.write("\n\n".join(render_value(v) for v in values) + "\n")
    return EXIT_OK


def bench_counts(program, lattice, seed=0, sc_cap=800, max_loops=40, corpus=None):
    counts = {}
    for mode in MODES:
        config = CampaignConfig(sc_cap_per_loop=sc_cap, max_loops=max_loops, rng_seed=seed,
                                mode=mode, corpus_path=corpus, exec_budget=BENCH_BUDGET)
        report = run_campaign(program, config, lattice)
        counts[mode] = (len(report.explored_keys), report.executions)
    return counts


def cmd_bench(args, lattice, out):
    if args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}")
    program = parse_program((FIXTURES / SUITES[args.suite]).read_text(encoding="utf-8"))
    counts = bench_counts(program, lattice, args.seed, args.sc_cap, args.max_loops, args.corpus)
    out.write(f"suite {args.suite} ({program.path_count()} paths), "
              f"budget {BENCH_BUDGET} executions, seed {args.seed}\n")
    out.write(f"{'mode':<16} {'explored SCs':>12} {'executions':>10}\n")
    for mode, (n, runs) in counts.items():
        out.write(f"{mode:<16} {n:>12} {runs:>10}\n")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "trace": cmd_trace, "render": cmd_render, "bench": cmd_bench}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    try:
        lattice = load_lattice(args.lattice)
        return COMMANDS[args.command](args, lattice, out)
    except (UsageError, ScfuzzError) as e:
        print(f"scfuzz: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
