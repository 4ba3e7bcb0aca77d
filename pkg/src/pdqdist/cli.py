"""
Command-line interface for pdqdist.
"""

import argparse
import io
import json
import logging
import math
import os
import sys
from typing import Callable, Dict, List, Optional

from .config import Limits, RunConfig, Subcommand
from .diagrams import DiagramFormat, PersistenceDiagram, read_diagram_file, save_diagram
from .display import Mode, enumerate_rows, histogram_csv, make_renderer
from .errors import ParameterError, PdqError
from .exact import enumerate_feasible, exact_distance
from .filtration import (
    load_cloud,
    reference_clouds,
    reference_diagrams,
    save_cloud,
    vietoris_rips_persistence,
)
from .matchgraph import FeasibilityMode, MatchingGraph, Variant, VariantKind, build_graph
from .qaoa import Strategy, estimate_distance
from .qsim import ClauseKind, clause_value, mixer_levels, mixer_order
from .runtime import emit, ensure_dir, write_atomic, write_text
from .verify import run_property_checks

logger = logging.getLogger("pdqdist")

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"

# Running example: one point against two, used by gen-example.
E1_D1 = PersistenceDiagram.from_pairs([(0.0, 1.0)], label="e1-d1")
E1_D2 = PersistenceDiagram.from_pairs([(0.0, 1.0), (0.0, 3.0)], label="e1-d2")


def _parse_q(text: str) -> float:
    """Accept a number >= 1 or the literal 'inf'."""
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'inf', got {text!r}") from None


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="pd-qdist",
        description="Distances between persistence diagrams: exact assignment and a simulated QAOA",
        add_help=True,
    )
    p.add_argument(
        "subcommand",
        nargs="?",
        choices=[s.value for s in Subcommand],
        default=None,
        help="What to compute",
    )
    p.add_argument("--d1", metavar="PATH", help="First diagram (CSV or JSON)")
    p.add_argument("--d2", metavar="PATH", help="Second diagram (CSV or JSON)")
    p.add_argument(
        "--variant",
        choices=[v.value for v in VariantKind],
        default=VariantKind.WASSERSTEIN.value,
        help="Distance to compute",
    )
    p.add_argument("-p", type=float, default=2.0, dest="p", metavar="REAL", help="Outer exponent p >= 1")
    p.add_argument(
        "-q", type=_parse_q, default=math.inf, dest="q", metavar="REAL|inf", help="Point norm q >= 1 or inf"
    )
    p.add_argument("-c", type=float, default=None, dest="c", metavar="REAL", help="Penalty c for dcp")
    p.add_argument("--layers", type=int, default=1, metavar="COUNT", help="QAOA layers after the initial mixer")
    p.add_argument("--shots", type=int, default=10000, metavar="COUNT", help="Measurement shots")
    p.add_argument("--seed", type=int, default=0, help="Sampling seed")
    p.add_argument("--grid", type=int, default=16, metavar="COUNT", help="Grid points per angle")
    p.add_argument(
        "--strategy",
        choices=[s.value for s in Strategy],
        default=Strategy.GRID.value,
        help="Angle search",
    )
    p.add_argument("--out", metavar="PATH", help="Output file (directory for rips/gen-example)")
    p.add_argument("--histogram", metavar="PATH", help="Write the qaoa histogram CSV here")
    p.add_argument("--trace", metavar="PATH", help="Write the qaoa gate trace here")
    p.add_argument("--with-exact", action="store_true", dest="with_exact", help="Add the exact distance to qaoa reports")
    p.add_argument("--strict-only", action="store_true", dest="strict_only", help="enumerate: strict states only")
    p.add_argument(
        "--clause",
        choices=[k.value for k in ClauseKind],
        default=ClauseKind.SYMMETRIC.value,
        help="enumerate: clause used to list movable edges",
    )
    p.add_argument("--beta", type=float, default=0.7, help="tree: mixer angle")
    p.add_argument("--cloud", metavar="PATH", help="rips: point cloud CSV")
    p.add_argument("--max-dim", type=int, default=1, dest="max_dim", help="rips: highest dimension (0 or 1)")
    p.add_argument("--max-scale", type=float, default=4.0, dest="max_scale", help="rips: largest scale")
    p.add_argument(
        "--min-persistence", type=float, default=0.0, dest="min_persistence", help="rips: floor for H1 points"
    )
    p.add_argument("--format", choices=("json", "csv", "text"), default=None, help="Output format")
    p.add_argument(
        "--log-level",
        choices=("DEBUG", "INFO", "WARNING", "ERROR"),
        default="WARNING",
        dest="log_level",
        help="Log verbosity on stderr",
    )
    p.add_argument("--version", "-v", action="store_true", help="Show version and exit")

    p.epilog = """
Examples:
  pd-qdist exact --d1 a.csv --d2 b.csv --variant dcp -c 0.2
  pd-qdist qaoa --d1 a.csv --d2 b.csv --shots 10000 --histogram hist.csv
  pd-qdist enumerate --d1 a.csv --d2 b.csv --format text
  pd-qdist verify --d1 a.csv --d2 b.csv --variant dcp -c 0.2
  pd-qdist gen-example --out examples/
    """
    return p


def parse_args(argv: Optional[List[str]] = None) -> RunConfig:
    """
    Parse and validate command line arguments.

    Args:
        argv: List of command line arguments (defaults to sys.argv[1:])

    Returns:
        RunConfig: Validated run configuration

    Raises:
        SystemExit: On --help, --version or a usage error (status 2)
    """
    p = _build_parser()
    args = p.parse_args(argv)

    if args.version:
        from . import __version__

        print(__version__)
        sys.exit(0)

    if args.subcommand is None:
        p.error("a subcommand is required")

    try:
        config = RunConfig(
            subcommand=Subcommand(args.subcommand),
            d1=args.d1,
            d2=args.d2,
            variant=args.variant,
            p=args.p,
            q=args.q,
            c=args.c,
            layers=args.layers,
            shots=args.shots,
            seed=args.seed,
            grid=args.grid,
            strategy=args.strategy,
            out=args.out,
            histogram=args.histogram,
            trace=args.trace,
            with_exact=args.with_exact,
            strict_only=args.strict_only,
            clause=args.clause,
            beta=args.beta,
            cloud=args.cloud,
            max_dim=args.max_dim,
            max_scale=args.max_scale,
            min_persistence=args.min_persistence,
            format=args.format,
            log_level=args.log_level,
            limits=Limits.from_env(),
        )
        config.validate()
    except ParameterError as e:
        p.error(str(e))
    return config


def _variant(config: RunConfig) -> Variant:
    if config.variant == VariantKind.DCP.value:
        return Variant.dcp(config.c, config.p, config.q)
    return Variant.wasserstein(config.p, config.q)


def _load_pair(config: RunConfig):
    return read_diagram_file(config.d1), read_diagram_file(config.d2)


def _graph(config: RunConfig) -> MatchingGraph:
    d1, d2 = _load_pair(config)
    return build_graph(d1, d2, _variant(config), config.limits)


def _renderer(config: RunConfig, default: Mode = Mode.JSON):
    return make_renderer(Mode(config.format) if config.format else default)


# ---- subcommands ----


def cmd_exact(config: RunConfig) -> int:
    d1, d2 = _load_pair(config)
    result = exact_distance(d1, d2, _variant(config))
    emit(_renderer(config).exact(result), config.out)
    return 0


def cmd_qaoa(config: RunConfig) -> int:
    d1, d2 = _load_pair(config)
    report = estimate_distance(
        d1,
        d2,
        _variant(config),
        num_layers=config.layers,
        shots=config.shots,
        seed=config.seed,
        with_exact=config.with_exact,
        strategy=Strategy(config.strategy),
        grid_resolution=config.grid,
        record_trace=bool(config.trace),
        limits=config.limits,
    )
    emit(_renderer(config).report(report), config.out)
    if config.histogram:
        write_text(config.histogram, histogram_csv(report))
    if config.trace:
        write_text(config.trace, "\n".join(report.gate_trace) + "\n")
    return 0


def cmd_graph(config: RunConfig) -> int:
    emit(_renderer(config).graph(_graph(config)), config.out)
    return 0


def cmd_enumerate(config: RunConfig) -> int:
    g = _graph(config)
    mode = FeasibilityMode.STRICT if config.strict_only else FeasibilityMode.RELAXED
    states = enumerate_feasible(g, mode, config.limits)
    kind = ClauseKind(config.clause)
    order = mixer_order(g)
    movable = {s: [e.label for e in order if clause_value(g, e, s, kind)] for s in states}
    emit(_renderer(config).enumerate(g, enumerate_rows(g, states, movable)), config.out)
    return 0


def cmd_verify(config: RunConfig) -> int:
    g = _graph(config)
    results = run_property_checks(g, limits=config.limits)
    emit(_renderer(config).verify(results), config.out)
    return 0 if all(r.passed for r in results) else 1


def cmd_tree(config: RunConfig) -> int:
    g = _graph(config)
    emit(_renderer(config, Mode.TEXT).tree(g, mixer_levels(g, config.beta, config.limits)), config.out)
    return 0


def _diagram_bytes(diagram: PersistenceDiagram, fmt: DiagramFormat) -> bytes:
    buf = io.BytesIO()
    save_diagram(diagram, buf, fmt)
    return buf.getvalue()


def _cloud_bytes(cloud) -> bytes:
    buf = io.BytesIO()
    save_cloud(cloud, buf)
    return buf.getvalue()


def cmd_rips(config: RunConfig) -> int:
    fmt = DiagramFormat(config.format or "csv")
    with open(config.cloud, "rb") as f:
        cloud = load_cloud(f)
    diagrams = vietoris_rips_persistence(
        cloud,
        max_dim=config.max_dim,
        max_scale=config.max_scale,
        min_persistence=config.min_persistence,
        limits=config.limits,
    )
    out = ensure_dir(config.out)
    for dim, diagram in diagrams.items():
        write_atomic(os.path.join(out, f"H{dim}.{fmt.value}"), _diagram_bytes(diagram, fmt))
    return 0


def cmd_gen_example(config: RunConfig) -> int:
    fmt = DiagramFormat(config.format or "csv")
    out = ensure_dir(config.out)
    for name, cloud in reference_clouds().items():
        write_atomic(os.path.join(out, f"{name}.cloud.csv"), _cloud_bytes(cloud))
    for name, diagram in reference_diagrams(config.limits).items():
        write_atomic(os.path.join(out, f"{name}.{fmt.value}"), _diagram_bytes(diagram, fmt))
    for diagram in (E1_D1, E1_D2):
        write_atomic(os.path.join(out, f"{diagram.label}.{fmt.value}"), _diagram_bytes(diagram, fmt))
    return 0


COMMANDS: Dict[Subcommand, Callable[[RunConfig], int]] = {
    Subcommand.EXACT: cmd_exact,
    Subcommand.QAOA: cmd_qaoa,
    Subcommand.GRAPH: cmd_graph,
    Subcommand.ENUMERATE: cmd_enumerate,
    Subcommand.VERIFY: cmd_verify,
    Subcommand.RIPS: cmd_rips,
    Subcommand.GEN_EXAMPLE: cmd_gen_example,
    Subcommand.TREE: cmd_tree,
}


def _report_error(payload: Dict) -> None:
    print(json.dumps(payload), file=sys.stderr)


def main(argv: Optional[List[str]] = None) -> int:
    """
    CLI entry point. Returns an int exit code.
    """
    return _main_impl(argv)


def _main_impl(argv: Optional[List[str]] = None) -> int:
    """
    Main implementation that can take argv parameter for testing.
    """
    config = parse_args(argv)
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, config.log_level), format=LOG_FORMAT)
    try:
        return COMMANDS[config.subcommand](config)
    except PdqError as e:
        logger.debug("command failed", exc_info=True)
        _report_error(e.to_dict())
        return 1
    except OSError as e:
        _report_error({"error": type(e).__name__, "message": str(e)})
        return 1
    except KeyboardInterrupt:
        print("\nAborted.", file=sys.stderr)
        return 1
