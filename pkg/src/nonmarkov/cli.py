"""Command-line front end: dataset generation, model training, evaluation,
cross-validation, size sweeps, and scatter reports.

Every command is a pure function of (config, input files, seed): identical
inputs produce byte-identical outputs. Files are written atomically
(temp-then-rename). Exit codes: 0 success, 1 usage/config error, 2 I/O
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__, figures, learn
from .linalg import InfiniteDivergenceError, JacobiConvergenceError
from .simulate import (
    DatasetRow,
    GenerationPlan,
    NoiseConfig,
    ProbeConfig,
    STANDARD_QR_PAIRS,
    feature_names,
    generate_dataset,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_NUMERIC = 3

META_COLUMNS = ("id", "q", "R", "pair_index", "pmf_index", "seed")
LABEL_COLUMNS = ("label", "exact_label")

MEASUREMENT_SETS = {"XYZ": (1, 2, 3), "IXY": (0, 1, 2)}

PLAN_KEYS = {
    "pairs", "pmfs_per_pair", "samples_per_pmf", "noise_eps", "shots",
    "measurements", "alpha", "beta", "gamma", "base_seed",
}


class ConfigError(Exception):
    """Bad configuration: unknown keys, unparsable values, invalid plans."""


class DataFormatError(Exception):
    """Malformed dataset, model, or report file."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; this CLI reserves 2 for I/O.
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def atomic_write_text(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=False)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def config_hash(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


# ---------------------------------------------------------------- dataset IO

def write_dataset_csv(path: str, rows: list[DatasetRow], names: list[str]):
    header = list(META_COLUMNS) + list(names) + list(LABEL_COLUMNS)
    lines = [",".join(header)]
    for idx, row in enumerate(rows):
        fields = [str(idx), _fmt(row.q), _fmt(row.r), str(row.pair_index),
                  str(row.pmf_index), str(row.seed)]
        fields.extend(_fmt(v) for v in row.features)
        fields.append(_fmt(row.label))
        fields.append(_fmt(row.exact_label))
        lines.append(",".join(fields))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_dataset_csv(path: str) -> tuple[list[DatasetRow], list[str]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file") from None
        expected_meta = list(META_COLUMNS)
        if header[:6] != expected_meta or header[-2:] != list(LABEL_COLUMNS):
            raise DataFormatError(
                f"{path}: header row 1 does not match the dataset schema")
        names = header[6:-2]
        if not names or any(not n.startswith("s_k") for n in names):
            raise DataFormatError(f"{path}: header row 1 has no feature columns")

        rows = []
        for line_no, record in enumerate(reader, start=2):
            if len(record) != len(header):
                raise DataFormatError(
                    f"{path}: row {line_no}: expected {len(header)} fields, "
                    f"got {len(record)}")
            try:
                rows.append(DatasetRow(
                    features=tuple(float(v) for v in record[6:-2]),
                    label=float(record[-2]),
                    exact_label=float(record[-1]),
                    q=float(record[1]),
                    r=float(record[2]),
                    pair_index=int(record[3]),
                    pmf_index=int(record[4]),
                    seed=int(record[5]),
                ))
            except ValueError as exc:
                raise DataFormatError(f"{path}: row {line_no}: {exc}") from None
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    return rows, names


def rows_to_dataset(rows: list[DatasetRow], names: list[str]) -> learn.Dataset:
    return learn.make_dataset(
        np.array([row.features for row in rows]),
        np.array([row.label for row in rows]),
        tuple(names),
    )


# ------------------------------------------------------------- plan handling

def parse_pairs(text: str) -> tuple[tuple[float, float], ...]:
    pairs = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        q, sep, r = chunk.partition(":")
        if not sep:
            raise ConfigError(f"bad (q:R) pair {chunk!r}; expected e.g. 0.8:1")
        try:
            pairs.append((float(q), float(r)))
        except ValueError:
            raise ConfigError(f"bad (q:R) pair {chunk!r}") from None
    if not pairs:
        raise ConfigError("no (q:R) pairs given")
    return tuple(pairs)


def parse_shots(value) -> int | None:
    if value is None:
        return None
    if isinstance(value, str):
        if value.lower() == "exact":
            return None
        try:
            return int(value)
        except ValueError:
            raise ConfigError(f"shots must be an integer or 'exact', got {value!r}") \
                from None
    return int(value)


def default_gen_config() -> dict:
    return {
        "pairs": [list(p) for p in STANDARD_QR_PAIRS],
        "pmfs_per_pair": 100,
        "samples_per_pmf": 50,
        "noise_eps": 0.0,
        "shots": 5000,
        "measurements": "XYZ",
        "alpha": math.pi / 8.0,
        "beta": math.pi / 8.0,
        "gamma": math.pi / 8.0,
        "base_seed": 0,
    }


def load_plan_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: plan file must hold a JSON object")
    unknown = set(raw) - PLAN_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown plan keys: {sorted(unknown)}")
    if "pairs" in raw:
        try:
            raw["pairs"] = [[float(q), float(r)] for q, r in raw["pairs"]]
        except (TypeError, ValueError):
            raise ConfigError(f"{path}: 'pairs' must be a list of [q, R] pairs") \
                from None
    return raw


def resolve_gen_config(args) -> dict:
    config = default_gen_config()
    if args.plan:
        config.update(load_plan_file(args.plan))
    if args.pairs is not None:
        config["pairs"] = [list(p) for p in parse_pairs(args.pairs)]
    if args.pmfs is not None:
        config["pmfs_per_pair"] = args.pmfs
    if args.samples_per_pmf is not None:
        config["samples_per_pmf"] = args.samples_per_pmf
    if args.exact_pmf:
        config["samples_per_pmf"] = None
    if args.noise_eps is not None:
        config["noise_eps"] = args.noise_eps
    if args.shots is not None:
        config["shots"] = args.shots
    if args.measurements is not None:
        config["measurements"] = args.measurements
    if args.seed is not None:
        config["base_seed"] = args.seed
    config["shots"] = parse_shots(config["shots"])
    if config["measurements"] not in MEASUREMENT_SETS:
        raise ConfigError(
            f"measurements must be one of {sorted(MEASUREMENT_SETS)}, "
            f"got {config['measurements']!r}")
    return config


def plan_from_config(config: dict) -> GenerationPlan:
    try:
        plan = GenerationPlan(
            qr_pairs=tuple((float(q), float(r)) for q, r in config["pairs"]),
            pmfs_per_pair=int(config["pmfs_per_pair"]),
            samples_per_pmf=(None if config["samples_per_pmf"] is None
                             else int(config["samples_per_pmf"])),
            probe=ProbeConfig(config["alpha"], config["beta"], config["gamma"]),
            noise=NoiseConfig(white_noise_eps=float(config["noise_eps"]),
                              shots=config["shots"]),
            base_seed=int(config["base_seed"]),
            measurement_indices=MEASUREMENT_SETS[config["measurements"]],
        )
        plan.validate()
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return plan


# ------------------------------------------------------------------- reports

def write_report(base: str, title: str, lines: list[str], payload: dict):
    """Human-readable text at <base>.txt and its machine twin at <base>.json."""
    text = "\n".join([title, "=" * len(title), ""] + lines) + "\n"
    atomic_write_text(base + ".txt", text)
    atomic_write_text(base + ".json",
                      json.dumps(payload, indent=2, sort_keys=True) + "\n")


def provenance(config: dict) -> dict:
    return {"config": config, "config_hash": config_hash(config),
            "version": __version__}


def provenance_lines(config: dict) -> list[str]:
    return [f"config-hash: {config_hash(config)}",
            f"version: {__version__}"]


# ------------------------------------------------------------------ commands

def cmd_gen(args) -> int:
    config = resolve_gen_config(args)
    plan = plan_from_config(config)
    rows = generate_dataset(plan)
    names = feature_names(plan.measurement_indices)
    write_dataset_csv(args.out, rows, names)
    meta = provenance(config)
    meta.update({"rows": len(rows), "feature_names": names, "label_log_base": 2})
    atomic_write_text(args.out + ".meta.json",
                      json.dumps(meta, indent=2, sort_keys=True) + "\n")
    print(f"wrote {len(rows)} rows -> {args.out}")
    return EXIT_OK


def _split_from_args(rows, names, args):
    ds = rows_to_dataset(rows, names)
    groups = np.array([row.pair_index for row in rows]) if args.stratify else None
    return learn.train_test_split(ds, args.train_fraction, args.seed, groups)


def cmd_train(args) -> int:
    rows, names = read_dataset_csv(args.data)
    train_ds, test_ds = _split_from_args(rows, names, args)
    model = learn.fit_poly(train_ds, args.degree, args.ridge)
    train_m = learn.MetricsReport(
        learn.r_squared(train_ds.labels, learn.predict_batch(model, train_ds.features)),
        learn.mae(train_ds.labels, learn.predict_batch(model, train_ds.features)),
        len(train_ds))
    test_m = learn.MetricsReport(
        learn.r_squared(test_ds.labels, learn.predict_batch(model, test_ds.features)),
        learn.mae(test_ds.labels, learn.predict_batch(model, test_ds.features)),
        len(test_ds))

    config = {"command": "train", "data": os.path.basename(args.data),
              "degree": args.degree, "train_fraction": args.train_fraction,
              "seed": args.seed, "ridge": args.ridge,
              "stratify": bool(args.stratify)}
    learn.save_model(args.out + ".model.txt", model)
    lines = provenance_lines(config) + [
        f"degree: {args.degree}   seed: {args.seed}   "
        f"train-fraction: {args.train_fraction}",
        f"train: n={train_m.n} r2={train_m.r_squared:.6f} mae={train_m.mae:.6f}",
        f"test:  n={test_m.n} r2={test_m.r_squared:.6f} mae={test_m.mae:.6f}",
    ]
    payload = provenance(config)
    payload["metrics"] = {
        "train": {"n": train_m.n, "r2": train_m.r_squared, "mae": train_m.mae},
        "test": {"n": test_m.n, "r2": test_m.r_squared, "mae": test_m.mae},
    }
    write_report(args.out + ".metrics", "fit report", lines, payload)
    print(f"test r2={test_m.r_squared:.4f} mae={test_m.mae:.4f} "
          f"-> {args.out}.model.txt")
    return EXIT_OK


def cmd_crossval(args) -> int:
    rows, names = read_dataset_csv(args.data)
    ds = rows_to_dataset(rows, names)
    degrees = [int(d) for d in args.degrees.split(",") if d.strip()]
    if not degrees:
        raise ConfigError("no degrees requested")

    config = {"command": "crossval", "data": os.path.basename(args.data),
              "degrees": degrees, "k": args.kfold, "seed": args.seed,
              "ridge": args.ridge}
    reports = [learn.k_fold_cv(ds, args.kfold, degree, args.seed, args.ridge)
               for degree in degrees]
    lines = provenance_lines(config) + [
        f"k: {args.kfold}   seed: {args.seed}", "",
        f"{'degree':>6}  {'R2':>16}  {'MAE':>18}",
    ]
    for rep in reports:
        lines.append(f"{rep.degree:>6}  {rep.r2_mean:.4f} +/- {rep.r2_std:.4f}"
                     f"  {rep.mae_mean:.5f} +/- {rep.mae_std:.5f}")
    payload = provenance(config)
    payload["results"] = [
        {"degree": rep.degree, "r2_mean": rep.r2_mean, "r2_std": rep.r2_std,
         "mae_mean": rep.mae_mean, "mae_std": rep.mae_std,
         "folds": [{"n": m.n, "r2": m.r_squared, "mae": m.mae}
                   for m in rep.fold_metrics]}
        for rep in reports
    ]
    write_report(args.out, "k-fold cross-validation", lines, payload)
    figures.save_crossval(args.out + ".png", [rep.degree for rep in reports],
                          [rep.r2_mean for rep in reports],
                          [rep.r2_std for rep in reports])
    print(f"wrote cross-validation report -> {args.out}.txt")
    return EXIT_OK


def cmd_sweep(args) -> int:
    rows, names = read_dataset_csv(args.data)
    ds = rows_to_dataset(rows, names)
    sizes = parse_sizes(args.sizes)

    config = {"command": "sweep", "data": os.path.basename(args.data),
              "degree": args.degree, "test_size": args.test_size,
              "sizes": list(sizes), "seed": args.seed, "ridge": args.ridge}
    report = learn.size_sweep(ds, args.test_size, sizes, args.degree,
                              args.seed, args.ridge)
    lines = provenance_lines(config) + [
        f"degree: {args.degree}   test-size: {args.test_size}   seed: {args.seed}",
        "",
        f"{'size':>6}  {'train R2':>9}  {'train MAE':>10}  "
        f"{'test R2':>9}  {'test MAE':>10}",
    ]
    for e in report.entries:
        lines.append(f"{e.train_size:>6}  {e.train.r_squared:>9.4f}  "
                     f"{e.train.mae:>10.5f}  {e.test.r_squared:>9.4f}  "
                     f"{e.test.mae:>10.5f}")
    payload = provenance(config)
    payload["results"] = [
        {"train_size": e.train_size,
         "train": {"r2": e.train.r_squared, "mae": e.train.mae},
         "test": {"r2": e.test.r_squared, "mae": e.test.mae}}
        for e in report.entries
    ]
    write_report(args.out, "training-size sweep", lines, payload)
    figures.save_sweep(args.out + ".png",
                       [e.train_size for e in report.entries],
                       [e.train.r_squared for e in report.entries],
                       [e.test.r_squared for e in report.entries])
    print(f"wrote size sweep -> {args.out}.txt")
    return EXIT_OK


def parse_sizes(text: str) -> tuple[int, ...]:
    start, _, rest = text.partition(":")
    stop, _, step = rest.partition(":")
    try:
        lo, hi, inc = int(start), int(stop), int(step or 1)
    except ValueError:
        raise ConfigError(f"bad sizes spec {text!r}; expected start:stop:step") \
            from None
    if inc < 1 or hi < lo:
        raise ConfigError(f"bad sizes spec {text!r}")
    return tuple(range(lo, hi + 1, inc))


def cmd_scatter(args) -> int:
    model = learn.load_model(args.model)
    rows, names = read_dataset_csv(args.data)
    _, test_ds = _split_from_args(rows, names, args)
    if test_ds.features.shape[1] != model.n_inputs:
        raise ConfigError(
            f"model expects {model.n_inputs} features, dataset has "
            f"{test_ds.features.shape[1]}")
    actual = test_ds.labels
    predicted = learn.predict_batch(model, test_ds.features)

    var_a = float(np.var(actual))
    var_p = float(np.var(predicted))
    degenerate = var_a < 1e-18 or var_p < 1e-18
    if var_a < 1e-18:
        slope, intercept = 0.0, float(np.mean(predicted))
    else:
        slope = float(np.cov(actual, predicted, bias=True)[0, 1] / var_a)
        intercept = float(np.mean(predicted) - slope * np.mean(actual))

    lines = ["actual,predicted"]
    lines.extend(f"{_fmt(a)},{_fmt(p)}" for a, p in zip(actual, predicted))
    atomic_write_text(args.out + ".csv", "\n".join(lines) + "\n")

    config = {"command": "scatter", "data": os.path.basename(args.data),
              "model": os.path.basename(args.model),
              "train_fraction": args.train_fraction, "seed": args.seed,
              "stratify": bool(args.stratify)}
    payload = provenance(config)
    payload["line"] = {"slope": slope, "intercept": intercept,
                       "method": "ordinary-least-squares",
                       "degenerate": degenerate, "n": int(actual.size)}
    metrics = {}
    if not degenerate:
        metrics = {"r2": learn.r_squared(actual, predicted),
                   "mae": learn.mae(actual, predicted)}
        payload["metrics"] = metrics
    text_lines = provenance_lines(config) + [
        f"points: {actual.size}",
        f"best-fit line (ordinary least squares): slope={slope:.6f} "
        f"intercept={intercept:.6f}" + ("  [degenerate]" if degenerate else ""),
    ]
    if metrics:
        text_lines.append(f"r2={metrics['r2']:.6f} mae={metrics['mae']:.6f}")
    write_report(args.out, "prediction scatter", text_lines, payload)

    note = f"r2={metrics['r2']:.3f}, mae={metrics['mae']:.3f}" if metrics else ""
    figures.save_scatter(args.out + ".png", actual.tolist(), predicted.tolist(),
                         slope, intercept, note)
    print(f"wrote scatter data -> {args.out}.csv")
    return EXIT_OK


# -------------------------------------------------------------------- driver

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nonmarkov",
                     description="Simulate correlated-noise quantum processes, "
                                 "generate labeled Stokes datasets, and fit "
                                 "models that predict the non-Markovianity "
                                 "measure.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a labeled dataset CSV")
    gen.add_argument("--out", required=True, help="output CSV path")
    gen.add_argument("--plan", help="JSON plan file (flags override it)")
    gen.add_argument("--pairs", help="comma-separated q:R pairs, e.g. '0.8:1,0.9:1.25'")
    gen.add_argument("--pmfs", type=int, help="pmfs per (q, R) pair")
    gen.add_argument("--samples-per-pmf", "--samples", dest="samples_per_pmf",
                     type=int, help="draws per pmf for the realized process")
    gen.add_argument("--exact-pmf", action="store_true",
                     help="skip finite sampling; use exact pmfs")
    gen.add_argument("--noise-eps", type=float, help="white-noise mixing weight")
    gen.add_argument("--shots", help="counts per Stokes setting, or 'exact'")
    gen.add_argument("--measurements", choices=sorted(MEASUREMENT_SETS),
                     help="measured Pauli set (default XYZ)")
    gen.add_argument("--seed", type=int, help="base seed of the plan")
    gen.set_defaults(func=cmd_gen)

    def eval_args(p, with_degree=True):
        p.add_argument("--data", required=True, help="dataset CSV")
        p.add_argument("--out", required=True, help="output path prefix")
        p.add_argument("--seed", type=int, default=0)
        if with_degree:
            p.add_argument("--degree", type=int, default=2)
        p.add_argument("--ridge", type=float, default=0.0)

    train = sub.add_parser("train", help="fit a polynomial model on a 7:3 split")
    eval_args(train)
    train.add_argument("--train-fraction", type=float, default=0.7)
    train.add_argument("--stratify", action="store_true",
                       help="split within each (q, R) group")
    train.set_defaults(func=cmd_train)

    cval = sub.add_parser("crossval", help="k-fold cross-validation report")
    eval_args(cval, with_degree=False)
    cval.add_argument("--degrees", default="1,2,3",
                      help="comma-separated degrees (default 1,2,3)")
    cval.add_argument("--kfold", type=int, default=10)
    cval.set_defaults(func=cmd_crossval)

    sweep = sub.add_parser("sweep", help="training-size sweep report")
    eval_args(sweep)
    sweep.add_argument("--test-size", type=int, default=300)
    sweep.add_argument("--sizes", default="70:700:70",
                       help="train sizes as start:stop:step (default 70:700:70)")
    sweep.set_defaults(func=cmd_sweep)

    scatter = sub.add_parser("scatter",
                             help="actual-vs-predicted pairs for a saved model")
    scatter.add_argument("--model", required=True, help="model file from train")
    scatter.add_argument("--data", required=True, help="dataset CSV")
    scatter.add_argument("--out", required=True, help="output path prefix")
    scatter.add_argument("--seed", type=int, default=0)
    scatter.add_argument("--train-fraction", type=float, default=0.7)
    scatter.add_argument("--stratify", action="store_true")
    scatter.set_defaults(func=cmd_scatter)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ArithmeticError, JacobiConvergenceError, InfiniteDivergenceError,
            np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
