"""Command-line interface for agnostic-rl"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from rich.logging import RichHandler

from .. import __version__
from ..baselines import GenerativeOracle, importance_sampling, trajectory_tree
from ..capacity import coverability_profile, spanning_capacity
from ..core.config import load_config
from ..core.errors import AgnosticRLError, GuardExceeded, ValidationError
from ..core.seeding import derive_rng
from ..harness import emit_report, enforce_acceptance, load_class, run_experiment
from ..lowerbound import (
    build_hard_mdp,
    build_pi_ell,
    build_reference_mdp,
    sample_blockfree_matrix,
    sample_decoder,
    write_decoder,
    write_matrix,
)
from ..mdp.formats import read_mdp, write_mdp
from ..policies.formats import write_class
from ..popler import popler
from ..sunflower import build_cert, read_cert, verify_cert, write_cert
from ..ui.display import (
    console,
    error_panel,
    format_command_help,
    info_panel,
    mapping_table,
    results_table,
    success_panel,
    warning_panel,
)

logger = logging.getLogger(__name__)

COMMANDS = [
    ("capacity", "Exact spanning capacity of a policy class"),
    ("coverability", "Coverability coefficient of a class on a given MDP"),
    ("sunflower-check", "Verify a (K, D)-sunflower certificate"),
    ("popler", "Learn with POPLER from online episodes"),
    ("is-baseline", "Uniform-exploration importance sampling"),
    ("trajtree", "Trajectory trees under a generative model"),
    ("lowerbound-gen", "Generate a block-free hard instance"),
    ("run", "Run a config-driven experiment recipe"),
]


def get_examples_text() -> str:
    return """Examples:

  # Capacity of the singleton class with 4 states per layer, horizon 4 (JSON)
  agnostic-rl capacity --class singleton:K=4,H=4

  # Same as a table, keeping the witness MDP
  agnostic-rl capacity --class singleton:K=4,H=4 --pretty --witness witness.mdp

  # Check the constructive certificate of the 2-ton class
  agnostic-rl sunflower-check --class lton:K=2,H=3,ell=2

  # POPLER on an MDP file with fixed sample sizes
  agnostic-rl popler --mdp env.mdp --class singleton:K=3,H=2 --eps 0.1 --n1 20000 --n2 20000 --seed 7

  # Config-driven recipe; exits 3 if an acceptance threshold is missed
  agnostic-rl run experiments/popler.toml
"""


def setup_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=console, show_path=False)],
        force=True,
    )


def _add_class_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("Policy Class")
    source = group.add_mutually_exclusive_group(required=True)
    source.add_argument("--class", dest="class_spec", help="Structured class, e.g. 'singleton:K=3,H=4'")
    source.add_argument("--class-file", type=Path, help="Policy class file")


def _add_seed_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, required=True, help="Master seed (required; never implicit)")


def _class_from(args: argparse.Namespace):
    if args.class_file is not None:
        return load_class({"class_file": str(args.class_file)})
    return load_class({"class": args.class_spec})


def _write_json(data: dict, path: Optional[Path]) -> None:
    text = json.dumps(data, indent=2)
    if path is None:
        print(text)
    else:
        path.write_text(text + "\n")
        info_panel(f"Wrote {path}")


def cmd_capacity(args: argparse.Namespace) -> int:
    pclass = _class_from(args)
    result = spanning_capacity(pclass, args.budget, witness=args.witness is not None)
    if args.witness is not None:
        if result.witness is None:
            raise GuardExceeded(f"search budget of {args.budget} exhausted before a witness could be rebuilt")
        write_mdp(result.witness.mdp, args.witness)
    if not args.pretty:
        _write_json(result.to_dict(), None)
        return 0
    mapping_table({"class": pclass.describe(), **result.to_dict()}, title="Spanning capacity")
    if not result.exact:
        warning_panel("Search budget exhausted: the value is a lower bound")
    if args.witness is not None:
        info_panel(f"Witness MDP (layer {result.witness.layer}) written to {args.witness}")
    return 0


def cmd_coverability(args: argparse.Namespace) -> int:
    pclass = _class_from(args)
    mdp = read_mdp(args.mdp)
    profile = coverability_profile(pclass, mdp)
    data = {"coverability": float(profile.max()), "per_layer": [float(x) for x in profile]}
    if args.json:
        _write_json(data, None)
    else:
        mapping_table({"class": pclass.describe(), **data}, title="Coverability")
    return 0


def cmd_sunflower_check(args: argparse.Namespace) -> int:
    pclass = _class_from(args)
    cert = read_cert(args.cert) if args.cert is not None else build_cert(pclass)
    cert.require_covers(pclass)
    max_span = args.max_span if args.max_span is not None else pclass.horizon
    verdict = verify_cert(pclass, cert, max_span)
    if args.write_cert is not None:
        write_cert(cert, args.write_cert)
    if verdict.ok:
        success_panel(f"({cert.K}, {cert.D})-sunflower certificate holds for {len(pclass)} members")
        return 0
    lines = [f"member {m}: " + " ".join(f"({s},{a})" for s, a in seq) for m, seq in sorted(verdict.violations.items())]
    error_panel("\n".join(lines[:20]), title="❌  Petal violations")
    return ValidationError.exit_code


def cmd_popler(args: argparse.Namespace) -> int:
    pclass = _class_from(args)
    mdp = read_mdp(args.mdp)
    cert = read_cert(args.cert) if args.cert is not None else build_cert(pclass)
    best, report = popler(mdp, pclass, cert, args.eps, args.delta, derive_rng(args.seed), n1=args.n1, n2=args.n2)
    results_table(
        [{"member": m, "estimate": v} for m, v in enumerate(report.values)], ["member", "estimate"], title="Estimated values"
    )
    success_panel(
        f"Returned member {best}\n{report.insertions} states identified over {report.iterations} passes, "
        f"{report.violations} coverage violations"
    )
    if args.out is not None:
        _write_json(report.to_dict(), args.out)
    return 0


def cmd_is_baseline(args: argparse.Namespace) -> int:
    pclass = _class_from(args)
    mdp = read_mdp(args.mdp)
    best, values = importance_sampling(mdp, pclass, args.n, derive_rng(args.seed))
    results_table([{"member": m, "estimate": float(v)} for m, v in enumerate(values)], ["member", "estimate"])
    success_panel(f"Returned member {best} after {args.n} uniformly random episodes")
    if args.out is not None:
        _write_json({"best_index": best, "episodes": args.n, "values": [float(v) for v in values]}, args.out)
    return 0


def cmd_trajtree(args: argparse.Namespace) -> int:
    pclass = _class_from(args)
    oracle = GenerativeOracle(read_mdp(args.mdp))
    best, report = trajectory_tree(oracle, pclass, args.n, derive_rng(args.seed))
    results_table([{"member": m, "estimate": float(v)} for m, v in enumerate(report.values)], ["member", "estimate"])
    success_panel(f"Returned member {best} using {report.query_count} generative queries")
    if args.out is not None:
        _write_json(report.to_dict(), args.out)
    return 0


def cmd_lowerbound_gen(args: argparse.Namespace) -> int:
    rng = derive_rng(args.seed)
    matrix = sample_blockfree_matrix(args.eps, args.ell, args.J, rng, args.max_retries, strict=not args.allow_unverified)
    props = matrix.properties()
    if not props.ok:
        warning_panel(f"Matrix fails: {', '.join(props.failed())}; continuing without the guarantees")
    pclass = build_pi_ell(matrix, args.H, args.J)
    pistar = int(rng.integers(len(pclass))) if args.pistar is None else args.pistar
    instance = build_hard_mdp(pclass, pistar, sample_decoder(args.J, args.H, rng), args.J, args.H)
    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    write_matrix(matrix, out / "matrix.txt")
    write_class(pclass, out / "class.pclass", explicit=True)
    write_decoder(instance.phi, pistar, out / "decoder.txt")
    write_mdp(instance.mdp, out / "hard.mdp")
    write_mdp(build_reference_mdp(args.J, args.H), out / "reference.mdp")
    success_panel(
        f"{matrix.shape[0]}x{matrix.shape[1]} matrix, {len(pclass)} policies, pi* = {pistar} "
        f"with {len(instance.relevant)} relevant locks\nFiles written to {out}"
    )
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    if args.workers is not None:
        config.workers = args.workers
    if args.format is not None:
        config.format = args.format
    report = run_experiment(config)
    output = args.output or Path(config.output_dir) / f"{config.recipe}.{config.format}"
    emit_report(report, output, config.format)
    results_table(report.records, report.columns, title=config.recipe)
    mapping_table(report.aggregate, title="Aggregate")
    if report.timings:
        console.print(f"[dim]wall time {sum(report.timings):.3f}s over {len(report.timings)} replications[/dim]")
    info_panel(f"Report written to {output}")
    enforce_acceptance(report)
    success_panel("All acceptance thresholds met")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="agnostic-rl",
        description="Agnostic policy-based RL: spanning capacity, sunflowers, POPLER and baselines.\n\n"
        + format_command_help(COMMANDS)
        + "\n\nUse --help-examples to see usage examples",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--verbose", "-v", action="store_true", help="Show debug logging")
    parser.add_argument("--help-examples", action="store_true", help="Show usage examples")
    sub = parser.add_subparsers(dest="command", metavar="<command>")

    p = sub.add_parser("capacity", help="Exact spanning capacity of a policy class")
    _add_class_args(p)
    p.add_argument("--budget", type=int, default=10**7, help="Memo entries before the search degrades (default: 10^7)")
    p.add_argument("--witness", type=Path, help="Write the witness MDP to this file")
    p.add_argument("--pretty", action="store_true", help="Show a table instead of JSON")
    p.set_defaults(handler=cmd_capacity)

    p = sub.add_parser("coverability", help="Coverability coefficient of a class on a given MDP")
    _add_class_args(p)
    p.add_argument("--mdp", type=Path, required=True, help="MDP file")
    p.add_argument("--json", action="store_true", help="Print JSON instead of a table")
    p.set_defaults(handler=cmd_coverability)

    p = sub.add_parser("sunflower-check", help="Verify a (K, D)-sunflower certificate")
    _add_class_args(p)
    p.add_argument("--cert", type=Path, help="Certificate file (default: the constructive certificate)")
    p.add_argument("--max-span", type=int, help="Longest partial trajectory checked (default: H)")
    p.add_argument("--write-cert", type=Path, help="Write the certificate used to this file")
    p.set_defaults(handler=cmd_sunflower_check)

    p = sub.add_parser("popler", help="Learn with POPLER from online episodes")
    _add_class_args(p)
    p.add_argument("--mdp", type=Path, required=True, help="MDP file")
    p.add_argument("--cert", type=Path, help="Certificate file (default: the constructive certificate)")
    p.add_argument("--eps", type=float, default=0.1, help="Target accuracy (default: 0.1)")
    p.add_argument("--delta", type=float, default=0.1, help="Failure probability (default: 0.1)")
    p.add_argument("--n1", type=int, help="Episodes from the start (default: sample-size formula)")
    p.add_argument("--n2", type=int, help="Attempts per identified state (default: sample-size formula)")
    p.add_argument("--out", type=Path, help="Write the run report as JSON")
    _add_seed_arg(p)
    p.set_defaults(handler=cmd_popler)

    for name, handler, what in (
        ("is-baseline", cmd_is_baseline, "Uniform-exploration importance sampling"),
        ("trajtree", cmd_trajtree, "Trajectory trees under a generative model"),
    ):
        p = sub.add_parser(name, help=what)
        _add_class_args(p)
        p.add_argument("--mdp", type=Path, required=True, help="MDP file")
        p.add_argument("--n", type=int, required=True, help="Episodes or trees to sample")
        p.add_argument("--out", type=Path, help="Write the estimates as JSON")
        _add_seed_arg(p)
        p.set_defaults(handler=handler)

    p = sub.add_parser("lowerbound-gen", help="Generate a block-free hard instance")
    p.add_argument("--eps", type=float, default=0.25, help="Matrix density (default: 0.25)")
    p.add_argument("--ell", type=int, default=2, help="Block width (default: 2)")
    p.add_argument("--H", type=int, default=6, help="Horizon (default: 6)")
    p.add_argument("--J", "--locks", type=int, default=64, help="Number of locks (default: 64)")
    p.add_argument("--pistar", type=int, help="Planted member index (default: drawn from the seed)")
    p.add_argument("--max-retries", type=int, default=100, help="Matrix draws before giving up (default: 100)")
    p.add_argument("--allow-unverified", action="store_true", help="Keep the last matrix even if it fails a property")
    p.add_argument("--out-dir", "--out", type=Path, required=True, help="Directory for the generated files")
    _add_seed_arg(p)
    p.set_defaults(handler=cmd_lowerbound_gen)

    p = sub.add_parser("run", help="Run a config-driven experiment recipe")
    p.add_argument("config", type=Path, help="Experiment TOML file")
    p.add_argument("--workers", type=int, help="Override [experiment] workers")
    p.add_argument("--format", choices=("json", "csv"), help="Override [experiment] format")
    p.add_argument("--output", type=Path, help="Report path (default: <output_dir>/<recipe>.<format>)")
    p.set_defaults(handler=cmd_run)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point"""
    argv = sys.argv[1:] if argv is None else argv
    if "--help-examples" in argv:
        print(get_examples_text())
        return 0
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)
    logger.debug("agnostic-rl %s: %s", __version__, args.command)
    if args.command is None:
        parser.print_help()
        return 0
    try:
        return args.handler(args)
    except AgnosticRLError as e:
        error_panel(str(e))
        return e.exit_code
    except KeyboardInterrupt:
        console.print("\n👋 Interrupted")
        return 130


if __name__ == "__main__":
    sys.exit(main())
