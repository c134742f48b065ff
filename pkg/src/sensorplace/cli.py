"""Command-line front end: ``pod``, ``select``, ``reconstruct``, ``benchmark``.

Exit statuses are stable: 0 ok, 1 I/O failure, 2 file/config parse error,
3 dimension or constraint violation, 4 missing required option, 5 numerical
singularity or non-convergence.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import fileio, linalg
from .evaluate import build_model, reconstruct, reconstruction_error
from .experiments import ExperimentConfig, run_random_benchmark
from .pod import SnapshotMatrix, compute_pod
from .selection import (
    ExhaustionError,
    SensorSelection,
    select_convex,
    select_random,
    select_scalar_greedy,
    select_vector_greedy,
)

EXIT_OK = 0
EXIT_IO = 1
EXIT_PARSE = 2
EXIT_DIMENSION = 3
EXIT_MISSING_OPTION = 4
EXIT_NUMERICAL = 5

_CONFIG_KEYS = {
    "n_per_component",
    "components",
    "r_values",
    "trials",
    "base_seed",
    "methods",
    "noise_sigma",
}


class ConfigError(ValueError):
    pass


class MissingOptionError(ValueError):
    pass


def _fail(message: str) -> None:
    print(f"sensorplace: error: {message}", file=sys.stderr)


def _cmd_pod(args) -> int:
    data = fileio.read_matrix(args.snapshots, header=args.header)
    snapshots = SnapshotMatrix(data, components=args.components)
    basis = compute_pod(snapshots, args.rank, center=not args.no_center)
    fileio.write_matrix(args.out_modes, basis.modes)
    fileio.write_matrix(args.out_sigma, basis.singular_values.reshape(-1, 1))
    return EXIT_OK


def _cmd_select(args) -> int:
    modes = fileio.read_matrix(args.modes, header=args.header)
    s = args.components
    if args.method == "vector-greedy":
        sel = select_vector_greedy(modes, args.count, components=s)
    elif args.method == "scalar-greedy":
        sel = select_scalar_greedy(modes, args.count)
    elif args.method == "random":
        if args.seed is None:
            raise MissingOptionError("--seed is required for the random method")
        if modes.shape[0] % s != 0:
            raise ValueError(f"{modes.shape[0]} rows not divisible by {s} components")
        sel = select_random(modes.shape[0] // s, args.count, seed=args.seed, components=s)
    elif args.method == "convex":
        sel = select_convex(modes, args.count, components=s)
    else:  # argparse choices make this unreachable
        raise ValueError(f"unknown method {args.method!r}")
    fileio.write_selection(args.out, sel)
    return EXIT_OK


def _selection_from_entries(entries, n_rows: int) -> SensorSelection:
    components = len(entries[0][1])
    dof = n_rows // components
    if n_rows % components != 0:
        raise ValueError(
            f"{n_rows} mode rows not divisible by {components} components"
        )
    for location, rows in entries:
        expected = [location + dof * j for j in range(components)]
        if rows != expected:
            raise ValueError(
                f"row indices {rows} for location {location} do not follow the "
                f"stacked layout with {dof} locations per component"
            )
        if any(not 0 <= row < n_rows for row in rows):
            raise ValueError(f"row index out of range in {rows}")
    return SensorSelection(
        locations=tuple(loc for loc, _ in entries),
        components=components,
        dof_per_component=dof,
        method="file",
    )


def _cmd_reconstruct(args) -> int:
    modes = fileio.read_matrix(args.modes, header=args.header)
    entries = fileio.read_selection(args.selection)
    observations = fileio.read_matrix(args.observations, header=args.header)
    selection = _selection_from_entries(entries, modes.shape[0])
    model = build_model(modes, selection)
    result = reconstruct(model, observations)
    if model.c.shape[0] == model.c.shape[1] and result.rank_deficient:
        _fail(
            "square measurement matrix is singular "
            f"(condition number {np.linalg.cond(model.c):.3e})"
        )
        return EXIT_NUMERICAL
    fileio.write_matrix(args.out_amplitudes, result.amplitudes)
    if args.true_amplitudes is not None:
        truth = fileio.read_matrix(args.true_amplitudes, header=args.header)
        print(f"{reconstruction_error(truth, result.amplitudes):.17g}")
    return EXIT_OK


def _parse_benchmark_config(path) -> ExperimentConfig:
    raw: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            if "=" not in text:
                raise ConfigError(f"expected 'key = value' on line {lineno}")
            key, _, value = text.partition("=")
            key = key.strip()
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"unknown config key {key!r}")
            raw[key] = value.strip()
    if "base_seed" not in raw:
        raise MissingOptionError("config must set base_seed")
    if "r_values" not in raw:
        raise ConfigError("config must set r_values")
    try:
        kwargs = {
            "r_values": tuple(int(tok) for tok in raw["r_values"].split(",")),
            "base_seed": int(raw["base_seed"]),
        }
        if "n_per_component" in raw:
            kwargs["n_per_component"] = int(raw["n_per_component"])
        if "components" in raw:
            kwargs["components"] = int(raw["components"])
        if "trials" in raw:
            kwargs["trials"] = int(raw["trials"])
        if "noise_sigma" in raw:
            kwargs["noise_sigma"] = float(raw["noise_sigma"])
        if "methods" in raw:
            kwargs["methods"] = tuple(tok.strip() for tok in raw["methods"].split(","))
    except ValueError as exc:
        raise ConfigError(f"bad config value: {exc}") from None
    try:
        return ExperimentConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _cmd_benchmark(args) -> int:
    cfg = _parse_benchmark_config(args.config)
    report = run_random_benchmark(cfg)
    report.write_json(f"{args.out}.json")
    report.write_csv(f"{args.out}.csv")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sensorplace",
        description="Sparse sensor placement over mode bases and least-squares "
        "state reconstruction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_pod = sub.add_parser("pod", help="compute a truncated mode basis from snapshots")
    p_pod.add_argument("snapshots", help="CSV snapshot matrix (rows: dof, cols: time)")
    p_pod.add_argument("out_modes", help="output CSV for the n x r mode matrix")
    p_pod.add_argument("out_sigma", help="output CSV for the r singular values")
    p_pod.add_argument("-s", "--components", type=int, default=1,
                       help="number of stacked vector components (default 1)")
    p_pod.add_argument("-r", "--rank", type=int, required=True,
                       help="number of modes to keep")
    p_pod.add_argument("--no-center", action="store_true",
                       help="skip temporal mean subtraction")
    p_pod.add_argument("--header", action="store_true",
                       help="input files carry one header line to skip")
    p_pod.set_defaults(func=_cmd_pod)

    p_sel = sub.add_parser("select", help="select sensor locations from a mode matrix")
    p_sel.add_argument("modes", help="CSV mode / candidate matrix (n x r)")
    p_sel.add_argument("out", help="output selection CSV")
    p_sel.add_argument("-m", "--method", required=True,
                       choices=["vector-greedy", "scalar-greedy", "random", "convex"],
                       help="selection strategy (scalar-greedy picks individual "
                       "rows and ignores --components)")
    p_sel.add_argument("-p", "--count", type=int, required=True,
                       help="number of sensors to place")
    p_sel.add_argument("-s", "--components", type=int, default=1,
                       help="number of stacked vector components (default 1)")
    p_sel.add_argument("--seed", type=int, default=None,
                       help="RNG seed (required for the random method)")
    p_sel.add_argument("--header", action="store_true",
                       help="input files carry one header line to skip")
    p_sel.set_defaults(func=_cmd_select)

    p_rec = sub.add_parser("reconstruct",
                           help="recover mode amplitudes from sparse observations")
    p_rec.add_argument("modes", help="CSV mode matrix (n x r)")
    p_rec.add_argument("selection", help="selection CSV from 'select'")
    p_rec.add_argument("observations", help="CSV observation matrix (s*p x N)")
    p_rec.add_argument("out_amplitudes", help="output CSV for the r x N amplitudes")
    p_rec.add_argument("--true-amplitudes", default=None,
                       help="CSV of true amplitudes; prints the relative error")
    p_rec.add_argument("--header", action="store_true",
                       help="input files carry one header line to skip")
    p_rec.set_defaults(func=_cmd_reconstruct)

    p_bench = sub.add_parser("benchmark",
                             help="run the random-candidate selection benchmark")
    p_bench.add_argument("config", help="key = value config file")
    p_bench.add_argument("-o", "--out", required=True,
                         help="output path prefix; writes <out>.json and <out>.csv")
    p_bench.set_defaults(func=_cmd_benchmark)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "seed", None) is not None and args.seed < 0:
        _fail("--seed must be a non-negative 64-bit integer")
        return EXIT_PARSE
    try:
        return args.func(args)
    except (fileio.MatrixParseError, fileio.SelectionParseError, ConfigError) as exc:
        _fail(str(exc))
        return EXIT_PARSE
    except MissingOptionError as exc:
        _fail(str(exc))
        return EXIT_MISSING_OPTION
    except linalg.SingularMatrixError as exc:
        _fail(str(exc))
        return EXIT_NUMERICAL
    except linalg.NonConvergenceError as exc:
        _fail(str(exc))
        return EXIT_NUMERICAL
    except (ExhaustionError, ValueError) as exc:
        _fail(str(exc))
        return EXIT_DIMENSION
    except OSError as exc:
        _fail(str(exc))
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
