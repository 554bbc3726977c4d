"""Command-line front end.

Subcommands wrap the library: `mesh` and `synth` produce inputs,
`factorize` runs the full pipeline, `compare-extrapolation` and
`benchmark` reproduce the convergence and timing experiments, `export`
converts between the CSV and ICOD matrix formats. Exit codes: 0 success,
1 runtime/numerical failure, 2 usage or validation error. All randomness
flows from --seed.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import matio
from .design import design_to_csv
from .errors import ConfigError, DataShapeError, IcofactError
from .icosphere import (
    DEFAULT_MAX_LEVEL,
    build_hierarchy,
    counts,
    face_centers_csv,
    mesh_to_obj,
)
from .pipeline import (
    SchemeConfig,
    benchmark_iteration_time,
    extrapolation_comparison,
    run,
    synth_data,
)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

# config-file key -> (SchemeConfig attribute, parser)
CONFIG_KEYS = {
    "scheme": ("kind", str),
    "level": ("data_level", int),
    "lambda": ("lam", float),
    "extrapolation": ("extrapolation", str),
    "warmup": ("warmup", int),
    "nd": ("n_d", int),
    "multistarts": ("multistart_count", int),
    "iters": ("multistart_iters", int),
    "refine_rounds": ("refine_rounds", int),
    "faces_per_round": ("faces_per_round", int),
    "iters_per_round": ("iters_per_round", int),
    "seed": ("seed", int),
    "sigma0": ("sigma0", float),
    "tau": ("tau", float),
}

# CLI flag dest -> SchemeConfig attribute (flags override file keys)
FLAG_FIELDS = {
    "scheme": "kind",
    "level": "data_level",
    "lam": "lam",
    "extrapolation": "extrapolation",
    "warmup": "warmup",
    "nd": "n_d",
    "multistarts": "multistart_count",
    "iters": "multistart_iters",
    "refine_rounds": "refine_rounds",
    "faces_per_round": "faces_per_round",
    "iters_per_round": "iters_per_round",
    "seed": "seed",
}


def parse_config_file(path):
    """key=value lines; blank lines and # comments ignored."""
    values = {}
    for line_no, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{line_no}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{line_no}: unknown key {key!r}")
        field, parser = CONFIG_KEYS[key]
        try:
            values[field] = parser(value.strip())
        except ValueError:
            raise ConfigError(f"{path}:{line_no}: bad value for {key}: {value.strip()!r}")
    return values


def build_config(args, require_scheme=True):
    """Merge config file and flags (flags win) into a SchemeConfig."""
    values = {}
    if getattr(args, "config", None):
        values.update(parse_config_file(args.config))
    for dest, field in FLAG_FIELDS.items():
        flag_value = getattr(args, dest, None)
        if flag_value is not None:
            values[field] = flag_value
    if "kind" not in values:
        if require_scheme:
            raise ConfigError("no scheme given: pass --scheme or a config file")
        values["kind"] = "pnnmf"  # placeholder; comparison loops over all schemes
    if "data_level" not in values:
        raise ConfigError("no mesh level given: pass --level or a config file")
    values.setdefault("n_d", 10)
    return SchemeConfig(**values)


def _load_data(path):
    try:
        return matio.load_matrix_auto(path)
    except FileNotFoundError:
        raise ConfigError(f"data file not found: {path}")


def _out_dir(path):
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_mesh(args):
    if args.level < 0 or args.level > DEFAULT_MAX_LEVEL:
        raise ConfigError(
            f"--level must be in 0..{DEFAULT_MAX_LEVEL}, got {args.level}"
        )
    hier = build_hierarchy(args.level)
    mesh = hier.mesh(args.level)
    out = _out_dir(args.out)
    (out / f"mesh_level{args.level}.obj").write_text(mesh_to_obj(mesh))
    (out / f"face_centers_level{args.level}.csv").write_text(face_centers_csv(mesh))
    n_faces, n_edges, n_nodes = counts(args.level)
    print(f"faces={n_faces} edges={n_edges} nodes={n_nodes}")
    return EXIT_OK


def cmd_synth(args):
    if args.level < 0 or args.level > DEFAULT_MAX_LEVEL:
        raise ConfigError(
            f"--level must be in 0..{DEFAULT_MAX_LEVEL}, got {args.level}"
        )
    hier = build_hierarchy(args.level)
    X, F, C_star = synth_data(
        hier, args.level, args.ns, args.sources, args.noise, args.seed
    )
    out = _out_dir(args.out)
    matio.save_data_csv(out / "data.csv", X)
    matio.save_icod(out / "planted_maps.icod", F)
    matio.save_icod(out / "planted_loadings.icod", C_star)
    print(f"data={X.shape[0]}x{X.shape[1]} sources={args.sources} noise={args.noise}")
    return EXIT_OK


def cmd_factorize(args):
    config = build_config(args)
    X = _load_data(args.data)
    hier = build_hierarchy(config.data_level)
    result = run(config, X, hier)
    out = _out_dir(args.out)
    matio.save_icod(out / "B.icod", result.factors.B)
    matio.save_matrix_csv(out / "B.csv", result.factors.B)
    if result.factors.C is not None:
        matio.save_icod(out / "C.icod", result.factors.C)
        matio.save_matrix_csv(out / "C.csv", result.factors.C)
    (out / "design.csv").write_text(design_to_csv(result.design))
    matio.save_icod(out / "design.icod", result.design.values)
    (out / "report.json").write_text(
        json.dumps(result.to_json_dict(), indent=2) + "\n"
    )
    print(
        f"scheme={config.kind.value} n_k={result.design.n_k} "
        f"objective={result.final_objective:.6g}"
    )
    return EXIT_OK


def cmd_compare_extrapolation(args):
    config = build_config(args, require_scheme=False)
    X = _load_data(args.data)
    hier = build_hierarchy(config.data_level)
    results = extrapolation_comparison(config, X, hier, reps=args.reps)
    out = Path(args.out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    labels = list(results)
    with open(out, "w") as fh:
        fh.write("iteration," + ",".join(labels) + "\n")
        for t in range(config.multistart_iters):
            row = ",".join(f"{results[label][t]:.17g}" for label in labels)
            fh.write(f"{t + 1},{row}\n")
    print(f"methods={len(labels)} iterations={config.multistart_iters} out={out}")
    return EXIT_OK


def cmd_benchmark(args):
    config = build_config(args)
    X = _load_data(args.data)
    hier = build_hierarchy(config.data_level)
    coarse, fine, speedup = benchmark_iteration_time(
        config, X, hier, fine_iters=args.fine_iters
    )
    out = _out_dir(args.out)
    payload = {
        "scheme": config.kind.value,
        "data_level": config.data_level,
        "n_faces": X.shape[0],
        "coarse_seconds_per_iter": coarse,
        "fine_seconds_per_iter": fine,
        "speedup": speedup,
    }
    (out / "benchmark.json").write_text(json.dumps(payload, indent=2) + "\n")
    print(f"coarse={coarse:.3e}s fine={fine:.3e}s speedup={speedup:.3e}")
    return EXIT_OK


def cmd_export(args):
    matrix = matio.load_matrix_auto(args.input)
    out = Path(args.out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    if args.to == "icod":
        matio.save_icod(out, matrix)
    elif args.to == "csv":
        matio.save_matrix_csv(out, matrix)
    else:
        matio.save_data_csv(out, matrix)
    print(f"wrote {out} ({matrix.shape[0]}x{matrix.shape[1]})")
    return EXIT_OK


def _add_run_flags(p):
    p.add_argument("--scheme", choices=["dl", "pnnmf", "spnnmf", "ppnmf"])
    p.add_argument("--level", type=int)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--extrapolation", choices=["none", "standard", "log"])
    p.add_argument("--warmup", type=int)
    p.add_argument("--nd", type=int)
    p.add_argument("--multistarts", type=int)
    p.add_argument("--iters", type=int)
    p.add_argument("--refine-rounds", dest="refine_rounds", type=int)
    p.add_argument("--faces-per-round", dest="faces_per_round", type=int)
    p.add_argument("--iters-per-round", dest="iters_per_round", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--config", help="key=value config file; flags override it")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="icofact",
        description="Hierarchical matrix factorization on icosphere meshes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mesh", help="write an icosphere mesh as OBJ + centers CSV")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mesh)

    p = sub.add_parser("synth", help="generate planted synthetic surface data")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--ns", type=int, default=20, help="number of subjects")
    p.add_argument("--sources", type=int, default=5)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("factorize", help="run the full factorization pipeline")
    _add_run_flags(p)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_factorize)

    p = sub.add_parser(
        "compare-extrapolation",
        help="median objective traces for every scheme x extrapolation",
    )
    _add_run_flags(p)
    p.add_argument("--data", required=True)
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_compare_extrapolation)

    p = sub.add_parser("benchmark", help="coarse vs identity-design iteration time")
    _add_run_flags(p)
    p.add_argument("--data", required=True)
    p.add_argument("--fine-iters", dest="fine_iters", type=int, default=3)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("export", help="convert a matrix between CSV and ICOD")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.add_argument("--to", choices=["csv", "icod", "datacsv"], required=True)
    p.set_defaults(func=cmd_export)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DataShapeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except IcofactError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
