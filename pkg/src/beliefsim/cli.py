"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import logging
import os
import shlex
import sys
from pathlib import Path

from . import kernels
from .assistance import ExternalReasoner, load_relevance_map, select_notify, unaware_objects
from .belief import load_belief
from .errors import BeliefSimError
from .runner import (
    RunConfig,
    ablate,
    format_ablation,
    load_grid_file,
    mean_inference_error,
    run_episode,
)
from .scenario import load_scenario, with_config
from .smcc import DEFAULT_PENALTY, format_report, smcc

OUT_ENV = "BELIEFSIM_OUT"

log = logging.getLogger("beliefsim")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with 2 by default
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="beliefsim", description="Robot belief and inferred human belief simulator.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    run = sub.add_parser("run", help="simulate an episode and write metrics")
    run.add_argument("scenario", help="scenario file or bundled scenario name")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--out", type=Path, default=None, help=f"output directory (default ${OUT_ENV} or ./runs)")
    run.add_argument("--plot", action="store_true", help="also write smcc.svg")
    run.add_argument("--jsonl", action="store_true", help="also write metrics.jsonl")
    run.add_argument("--dump-frames", action="store_true", help="write belief dumps for every frame")

    diff = sub.add_parser("diff", help="SMCC between two belief dumps")
    diff.add_argument("belief_a", type=Path)
    diff.add_argument("belief_b", type=Path)
    diff.add_argument("--per-class", action="store_true")
    diff.add_argument("--penalty", type=float, default=None,
                      help=f"allow unequal class counts, charging this many meters per unmatched object (e.g. {DEFAULT_PENALTY})")

    assist = sub.add_parser("assist", help="objects to notify the person about")
    assist.add_argument("scenario")
    assist.add_argument("--activity", required=True)
    assist.add_argument("--at", type=float, required=True, help="episode time in seconds")
    assist.add_argument("--tau", type=float, default=None)
    assist.add_argument("--seed", type=int, default=None)
    assist.add_argument("--relevance", type=Path, default=None, help="activity -> classes JSON file")
    assist.add_argument("--reasoner", default=None, help="command of an external reasoner process")

    abl = sub.add_parser("ablate", help="mean inference error over a grid of noise settings")
    abl.add_argument("scenario")
    abl.add_argument("--grid", type=Path, required=True)
    abl.add_argument("--jobs", type=int, default=1)
    return parser


def _cmd_run(args) -> int:
    doc = load_scenario(args.scenario)
    stem = Path(args.scenario).stem
    out = args.out or Path(os.environ.get(OUT_ENV, "runs")) / stem
    formats = ("csv",) + (("jsonl",) if args.jsonl else ()) + (("svg",) if args.plot else ())
    cfg = RunConfig(seed=args.seed, out_dir=out, formats=formats, dump_frames=args.dump_frames)
    result = run_episode(doc, cfg)
    last = result.rows[-1]
    print(f"frames\t{len(result.rows)}")
    print(f"mean_inference_error\t{mean_inference_error(result.rows):.6f}")
    print(f"final_inferred_vs_human\t{last.inferred_vs_human:.6f}")
    print(f"final_human_vs_true\t{last.human_vs_true:.6f}")
    print(f"final_robot_vs_true\t{last.robot_vs_true:.6f}")
    print(f"output\t{out}")
    return 0


def _cmd_diff(args) -> int:
    a = load_belief(args.belief_a.read_text("utf-8"))
    b = load_belief(args.belief_b.read_text("utf-8"))
    if args.penalty is None:
        report = smcc(a, b)
    else:
        report = smcc(a, b, strict=False, penalty=args.penalty)
    sys.stdout.write(format_report(report, per_class=args.per_class))
    return 0


def _cmd_assist(args) -> int:
    doc = load_scenario(args.scenario)
    if args.at <= 0:
        raise UsageError("--at must be positive")
    tau = doc.config.tau if args.tau is None else args.tau
    if tau <= 0:
        raise UsageError("--tau must be positive")
    doc = with_config(doc, duration=args.at, assist_at=())
    relevance = load_relevance_map(args.relevance)
    reasoner = ExternalReasoner(shlex.split(args.reasoner)) if args.reasoner else None
    result = run_episode(doc, RunConfig(seed=args.seed))
    unaware = unaware_objects(result.beliefs["robot"], result.beliefs["inferred"], tau)
    notify = select_notify(unaware, args.activity, relevance, reasoner)
    print(f"activity\t{notify.activity}")
    print(f"t\t{result.rows[-1].t:.6f}")
    print(f"unaware\t{len(unaware.objects)}")
    print(f"notify\t{len(notify.objects)}")
    for o in notify.objects:
        x, y, z = o.position
        print(f"{o.id}\t{o.cls}\t{x:.6f}\t{y:.6f}\t{z:.6f}")
    return 0


def _cmd_ablate(args) -> int:
    doc = load_scenario(args.scenario)
    knobs, seeds = load_grid_file(args.grid)
    rows = ablate(doc, knobs, seeds, jobs=max(1, args.jobs))
    sys.stdout.write(format_ablation(rows))
    return 0


COMMANDS = {"run": _cmd_run, "diff": _cmd_diff, "assist": _cmd_assist, "ablate": _cmd_ablate}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage() + "beliefsim: error: a subcommand is required")
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    log.debug("kernel backend: %s", kernels.BACKEND)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (BeliefSimError, OSError, ValueError, KeyError) as exc:
        print(f"beliefsim {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
