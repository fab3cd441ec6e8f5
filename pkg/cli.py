#!/usr/bin/env python3
"""
Fair Cover Solver - Command Line Interface

Solve colorful vertex cover, colorful edge cover, budgeted and tropical
matching and their geometric variants from instance files, or generate
reproducible random instances.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from faircover.core.config import settings
from faircover.core.exceptions import InputError
from faircover.models import GeneratorConfig, RunReport
from faircover.services.instance_service import instance_service
from faircover.services.runner_service import ALGORITHMS, EXIT_INPUT_ERROR, EXIT_OK, runner_service

KINDS = list(ALGORITHMS)
ALGORITHM_CHOICES = ["cvc-additive", "cvc-eps", "cvc-greedy", "cec-exact", "bm-exact", "tm-exact", "oracle"]


def configure_logging(verbose: bool) -> None:
    level = logging.DEBUG if verbose or settings.debug else getattr(logging, settings.log_level.upper(), logging.INFO)
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
        force=True,
    )


def print_summary(report: RunReport) -> None:
    """Human-readable summary on standard error"""
    name = report.source or report.problem or "instance"
    if report.error:
        print(f"❌ {name}: {report.error} (exit {report.exit_code})", file=sys.stderr)
        return
    if not report.feasible:
        print(f"⚠️  {name}: {report.problem} instance is infeasible ({report.algorithm})", file=sys.stderr)
    else:
        print(f"✅ {name}: {report.algorithm} found a solution of size {report.solution_size}", file=sys.stderr)
        print(f"   Selected: {report.selected}", file=sys.stderr)
        if report.requirements:
            print(f"   Coverage: {report.coverage} (required {report.requirements})", file=sys.stderr)
    if report.oracle_status:
        print(f"   Oracle: {report.oracle_status}, optimum {report.oracle_optimum}", file=sys.stderr)
    if report.guarantee:
        mark = "✅" if report.guarantee_ok else "❌"
        print(f"   {mark} Guarantee: {report.guarantee}", file=sys.stderr)
    if report.wall_time_ms is not None:
        print(f"   Time: {report.wall_time_ms} ms", file=sys.stderr)


def generator_config(args: argparse.Namespace) -> GeneratorConfig:
    try:
        return GeneratorConfig(
            seed=args.seed,
            min_vertices=args.min_vertices,
            max_vertices=args.max_vertices,
            density=args.density,
            num_colors=args.colors,
            policy=args.policy,
            max_edges=args.max_edges,
            pendant_rate=args.pendant_rate,
            grid_size=args.grid_size,
        )
    except ValidationError as e:
        raise InputError(f"invalid generator settings: {e.errors()[0]['msg']}") from e


def cmd_solve(args: argparse.Namespace) -> int:
    options = dict(
        algorithm=args.algo,
        epsilon=args.epsilon,
        verify=args.verify == "oracle",
        timing=not args.no_timing,
        dump_dir=args.dump_lp,
    )

    if args.input_dir:
        reports = runner_service.run_directory(Path(args.input_dir), **options)
    elif args.input:
        reports = [runner_service.run_file(Path(args.input), **options)]
    else:
        if args.kind is None:
            raise InputError("--seed needs --kind")
        inst = runner_service.generate(args.kind, generator_config(args))
        reports = [runner_service.run_instance(inst, source=f"seed:{args.seed}", **options)]

    for report in reports:
        print_summary(report)
    if args.format == "json":
        payload = [r.model_dump(mode="json") for r in reports]
        document = payload if args.input_dir else payload[0]
        print(json.dumps(document, indent=2))
    return max((r.exit_code for r in reports), default=EXIT_OK)


def cmd_gen(args: argparse.Namespace) -> int:
    inst = runner_service.generate(args.kind, generator_config(args))
    text = instance_service.serialize_instance(inst)
    header = f"# generated: kind={args.kind} seed={args.seed}\n"
    if args.output:
        Path(args.output).write_text(header + text)
        print(f"✅ Wrote {args.kind} instance to {args.output}", file=sys.stderr)
    else:
        sys.stdout.write(header + text)
    return EXIT_OK


def add_generator_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--kind", choices=KINDS, help="Problem kind to generate")
    parser.add_argument("--min-vertices", type=int, default=4, help="Smallest vertex (or line) count")
    parser.add_argument("--max-vertices", type=int, default=8, help="Largest vertex (or line) count")
    parser.add_argument("--density", type=float, default=0.4, help="Edge or point probability")
    parser.add_argument("--colors", type=int, default=2, help="Number of colors")
    parser.add_argument("--policy", choices=["random-feasible", "random-any", "tight"], default="random-feasible",
                        help="How requirements are drawn")
    parser.add_argument("--max-edges", type=int, help="Cap on edges (or points)")
    parser.add_argument("--pendant-rate", type=float, default=0.0,
                        help="Chance of a pendant edge per vertex (CVC) or a repeated point (cover-points)")
    parser.add_argument("--grid-size", type=int, default=4, help="Grid side for geometric instances")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description=f"{settings.app_name} CLI")
    parser.add_argument("--version", action="version", version=f"{settings.app_name} {settings.app_version}")
    parser.add_argument("--verbose", action="store_true", help="Debug logging on standard error")
    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    # Solve command
    solve_parser = subparsers.add_parser("solve", help="Solve an instance and print a JSON report")
    source = solve_parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--input", help="Instance file")
    source.add_argument("--input-dir", help="Directory of *.txt / *.inst instance files")
    source.add_argument("--seed", type=int, help="Solve a generated instance (needs --kind)")
    solve_parser.add_argument("--algo", choices=ALGORITHM_CHOICES, help="Solver (default depends on the problem)")
    solve_parser.add_argument("--epsilon", help="Rational ε for cvc-eps, e.g. 1/2")
    solve_parser.add_argument("--verify", choices=["oracle"], help="Compare against the brute-force optimum")
    solve_parser.add_argument("--format", choices=["json", "summary"], default="json", help="Output format")
    solve_parser.add_argument("--dump-lp", help="Write the LPs of the vertex cover pipeline to this directory")
    solve_parser.add_argument("--no-timing", action="store_true", help="Leave wall_time_ms out of the report")
    add_generator_options(solve_parser)

    # Gen command
    gen_parser = subparsers.add_parser("gen", help="Write a reproducible random instance")
    gen_parser.add_argument("--seed", type=int, required=True, help="Random seed (unsigned 64-bit)")
    gen_parser.add_argument("--output", help="Target file (default: standard output)")
    add_generator_options(gen_parser)

    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, execute the command and return the process exit code"""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)

    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_INPUT_ERROR
    try:
        if args.command == "solve":
            return cmd_solve(args)
        if args.kind is None:
            raise InputError("gen needs --kind")
        return cmd_gen(args)
    except InputError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR


def main():
    """Main CLI entry point"""
    sys.exit(run())


if __name__ == "__main__":
    main()
