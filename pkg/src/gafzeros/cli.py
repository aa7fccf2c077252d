"""Command-line harness: sample zero sets, run batches, evaluate checks.

Subcommands:
  sample    draw one section, find its zeros, emit them
  extremes  many-trial near-pair experiment -> config copy, CSV, summary
  rho       k-point correlation at explicit chart points -> JSON
  verify    named acceptance suite -> verdict table

Exit codes: 0 success / all verdicts pass, 1 a verdict failed, 2 usage
error, 3 numerical hard error.

Every trial is replayable from (master_seed, trial_index) alone; batch
outputs are aggregated in trial-index order, so integer outputs are
identical for any worker count and float aggregates are bitwise stable.
JSON floats use 17-significant-digit rendering; the emitted config copy is
the exact text whose SHA-256 the summary records.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__, kacrice, stats, verify
from .ensembles import EnsembleSpec, Model, NonFiniteKernel, sample_section
from .extremes import REGIONS, TrialConfig
from .geometry import Chart, SurfacePoint
from .kacrice import KernelConditionError, QuadratureError
from .rng import trial_stream
from .rootfind import RootFindError, compute_zeros
from .verify import TrialFailure, run_trials

CSV_SCHEMA = "gafzeros.trials.v1"
SUMMARY_SCHEMA = "gafzeros.summary.v1"

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of a batch experiment; round-trips through text."""

    model: str
    n: int | None = None
    radius: float | None = None
    trials: int = 1
    master_seed: int = 0
    thresholds: tuple[float, ...] = (1.0,)
    kmax: int = 3
    regions: tuple[str, ...] = ("all",)
    workers: int = 1
    out_dir: str = "gafzeros-out"
    fmt: str = "csv"

    def __post_init__(self):
        if self.model not in ("su2", "torus", "gef"):
            raise UsageError(f"unknown model {self.model!r}")
        if self.model == "gef":
            if self.radius is None or self.radius <= 0:
                raise UsageError("gef needs --radius > 0")
        elif self.n is None or self.n < 2:
            raise UsageError(f"{self.model} needs --n >= 2")
        if self.trials < 1:
            raise UsageError("trials must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise UsageError("master_seed must fit in an unsigned 64-bit int")
        if not self.thresholds or any(a <= 0 for a in self.thresholds):
            raise UsageError("thresholds must be positive")
        if self.kmax < 1:
            raise UsageError("kmax must be >= 1")
        for name in self.regions:
            if name not in REGIONS:
                raise UsageError(f"unknown region {name!r}; "
                                 f"have {sorted(REGIONS)}")
            reg = REGIONS[name]
            if Model(self.model) not in reg.models:
                raise UsageError(f"region {name!r} is not defined for "
                                 f"model {self.model}")
            if not 0.0 < reg.fraction <= 1.0:
                raise UsageError(f"region {name!r} has no volume")
        if self.workers < 1:
            raise UsageError("workers must be >= 1")
        if self.fmt not in ("csv", "json"):
            raise UsageError("format must be csv or json")

    def spec(self) -> EnsembleSpec:
        if self.model == "su2":
            return EnsembleSpec.su2(self.n)
        if self.model == "torus":
            return EnsembleSpec.torus(self.n)
        return EnsembleSpec.gef(self.radius)

    def trial_config(self) -> TrialConfig:
        return TrialConfig(thresholds=self.thresholds, kmax=self.kmax,
                           regions=self.regions)

    def to_text(self) -> str:
        """Canonical flat key-value form; this exact text gets hashed."""
        lines = [
            f"model = {self.model}",
            f"n = {'' if self.n is None else self.n}",
            f"radius = {'' if self.radius is None else ffloat(self.radius)}",
            f"trials = {self.trials}",
            f"master_seed = {self.master_seed}",
            f"thresholds = {', '.join(ffloat(a) for a in self.thresholds)}",
            f"kmax = {self.kmax}",
            f"regions = {', '.join(self.regions)}",
            f"workers = {self.workers}",
            f"out_dir = {self.out_dir}",
            f"format = {self.fmt}",
        ]
        return "\n".join(lines) + "\n"

    def sha256(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()


def ffloat(v: float) -> str:
    """Decimal rendering with 17 significant digits (round-trip exact)."""
    return format(float(v), ".17g")


def parse_config_text(text: str) -> dict:
    """Parse flat `key = value` lines; '#' starts a comment, blanks skip."""
    fields: dict[str, object] = {}
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {ln}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key in ("model", "out_dir"):
            fields[key] = val
        elif key == "format":
            fields["fmt"] = val
        elif key in ("n", "trials", "master_seed", "kmax", "workers"):
            if val:
                fields[key] = int(val)
        elif key == "radius":
            if val:
                fields[key] = float(val)
        elif key == "thresholds":
            fields[key] = tuple(float(s) for s in val.split(",") if s.strip())
        elif key == "regions":
            fields[key] = tuple(s.strip() for s in val.split(",") if s.strip())
        else:
            raise UsageError(f"config line {ln}: unknown key {key!r}")
    return fields


def render_json(obj, indent: int = 0) -> str:
    """JSON with every float at 17 significant digits, keys in given order."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = (f'{inner}{json.dumps(str(k))}: {render_json(v, indent + 1)}'
                 for k, v in obj.items())
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = (f"{inner}{render_json(v, indent + 1)}" for v in obj)
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not np.isfinite(v):
            return json.dumps(None)
        return ffloat(v)
    return json.dumps(obj)


def _count_columns(config: ExperimentConfig, has_isolated: bool) -> list[str]:
    cols = [f"count_a{fshort(a)}_{r}" for a in config.thresholds
            for r in config.regions]
    if has_isolated:
        cols += [f"isolated_a{fshort(a)}" for a in config.thresholds]
    return cols


def fshort(a: float) -> str:
    return format(float(a), "g")


def write_trials_csv(fh, config: ExperimentConfig, records: list) -> None:
    """One row per (trial, k); counts repeat on each of a trial's rows."""
    has_isolated = bool(records and records[0].isolated)
    cols = ["trial", "model", "k", "sigma_rescaled", "mark_chart",
            "mark_re", "mark_im"] + _count_columns(config, has_isolated)
    fh.write(f"# schema={CSV_SCHEMA}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(cols)
    for idx, rec in enumerate(records):
        tail = [rec.counts[(a, r)] for a in config.thresholds
                for r in config.regions]
        if has_isolated:
            tail += [rec.isolated[a] for a in config.thresholds]
        for k in range(len(rec.sigma)):
            mark = rec.marks[k]
            w.writerow([idx, config.model, k + 1, ffloat(rec.sigma[k]),
                        mark.chart.value, ffloat(mark.coord.real),
                        ffloat(mark.coord.imag)] + tail)


def build_report(config: ExperimentConfig, records: list) -> stats.GofReport:
    """Goodness-of-fit aggregates for a finished batch.

    KS statistics compare each k-th rescaled distance against its limit
    law. Flag thresholds never drop below the sampling noise floor of the
    run at hand (ks_bound for KS, 3 sqrt(2/m) for the dispersion ratio),
    so underpowered pilots stay informative; at the canonical 2e4-trial
    sizes they reduce to the documented tolerances.
    """
    t = len(records)
    ks_stats: dict[str, float] = {}
    flags: dict[str, bool] = {}
    for k in range(1, config.kmax + 1):
        col = np.sort(np.array([r.sigma[k - 1] for r in records
                                if len(r.sigma) >= k]))
        if col.size < 2:
            continue
        ks = stats.ks_stat(col, lambda x, k=k: 1.0 - kacrice.limit_survival(k, x))
        ks_stats[f"k{k}"] = ks
        base = 0.02 if (k == 1 and config.model != "gef") else 0.03
        tol = max(base, stats.ks_bound(col.size))
        flags[f"ks_k{k}<={fshort(tol)}"] = ks <= tol
    dispersion: dict[str, float] = {}
    for a in config.thresholds:
        counts = np.array([r.counts[(a, config.regions[0])] for r in records])
        if counts.mean() > 0:
            d = stats.dispersion(counts)
            dispersion[fshort(a)] = d
            half = max(0.05, 3.0 * np.sqrt(2.0 / t))
            flags[f"dispersion_a{fshort(a)}_within_{fshort(half)}"] = bool(
                abs(d - 1.0) <= half)
    chi: tuple[float, int] | None = None
    marks = [r.marks[0] for r in records if r.marks]
    if len(marks) >= 80:
        chi = stats.chi_square_uniform(marks, config.spec(), 8)
        flags[f"chi2_marks<=q999({chi[1]})"] = chi[0] <= stats.CHI2_Q999[chi[1]]
    mean_counts: dict[str, tuple[float, float]] = {}
    for a in config.thresholds:
        for r in config.regions:
            mean_counts[f"a{fshort(a)}_{r}"] = stats.empirical_intensity(
                records, a, r)
        target = kacrice.intensity(a, 1.0)
        mean, se = mean_counts[f"a{fshort(a)}_{config.regions[0]}"]
        flags[f"mean_a{fshort(a)}_within_3se"] = abs(mean - target) <= max(
            3.0 * se, 1e-12)
    return stats.GofReport(trials=t, ks_stats=ks_stats, dispersion=dispersion,
                           chi_square=chi, mean_counts=mean_counts,
                           flags=flags)


@dataclass(frozen=True)
class AggregateOutput:
    """What a finished batch wrote and where."""

    report: stats.GofReport
    config_path: str
    csv_path: str
    summary_path: str
    config_sha256: str
    wall_time_s: float
    version: str


def summary_dict(config: ExperimentConfig, report: stats.GofReport,
                 records: list, wall: float) -> dict:
    iso = {}
    if records and records[0].isolated:
        for a in config.thresholds:
            mismatch = np.array(
                [r.isolated[a] != r.counts[(a, config.regions[0])]
                 for r in records])
            iso[fshort(a)] = float(mismatch.mean())
    return {
        "schema": SUMMARY_SCHEMA,
        "version": __version__,
        "config_sha256": config.sha256(),
        "wall_time_s": wall,
        "model": config.model,
        "trials": report.trials,
        "ks": report.ks_stats,
        "dispersion": report.dispersion,
        "chi_square": (None if report.chi_square is None else
                       {"stat": report.chi_square[0],
                        "dof": report.chi_square[1],
                        "q999": stats.CHI2_Q999[report.chi_square[1]]}),
        "mean_counts": {k: {"mean": v[0], "stderr": v[1]}
                        for k, v in report.mean_counts.items()},
        "isolated_mismatch": iso,
        "flags": report.flags,
    }


def run_extremes(config: ExperimentConfig, progress=None) -> AggregateOutput:
    """Run the batch and write config copy, trials table, and summary."""
    start = time.monotonic()
    records = run_trials(config.spec(), config.trial_config(), config.trials,
                         config.master_seed, workers=config.workers,
                         progress=progress)
    wall = time.monotonic() - start
    os.makedirs(config.out_dir, exist_ok=True)
    config_path = os.path.join(config.out_dir, "config.txt")
    with open(config_path, "w") as fh:
        fh.write(config.to_text())
    csv_path = os.path.join(config.out_dir, "trials.csv")
    if config.fmt == "csv":
        with open(csv_path, "w") as fh:
            write_trials_csv(fh, config, records)
    else:
        csv_path = os.path.join(config.out_dir, "trials.json")
        rows = [{"trial": i, "k": k + 1, "sigma_rescaled": float(r.sigma[k]),
                 "mark_chart": r.marks[k].chart.value,
                 "mark_re": r.marks[k].coord.real,
                 "mark_im": r.marks[k].coord.imag,
                 "counts": {f"a{fshort(a)}_{reg}": r.counts[(a, reg)]
                            for a in config.thresholds
                            for reg in config.regions},
                 "isolated": {fshort(a): v for a, v in r.isolated.items()}}
                for i, r in enumerate(records) for k in range(len(r.sigma))]
        with open(csv_path, "w") as fh:
            fh.write(render_json({"schema": CSV_SCHEMA, "rows": rows}) + "\n")
    report = build_report(config, records)
    summary_path = os.path.join(config.out_dir, "summary.json")
    with open(summary_path, "w") as fh:
        fh.write(render_json(summary_dict(config, report, records, wall)))
        fh.write("\n")
    return AggregateOutput(report=report, config_path=config_path,
                           csv_path=csv_path, summary_path=summary_path,
                           config_sha256=config.sha256(), wall_time_s=wall,
                           version=__version__)


def parse_point(text: str) -> complex:
    """Chart coordinate from 're,im' or a Python complex literal."""
    s = text.strip()
    try:
        if "," in s:
            re_s, im_s = s.split(",", 1)
            return complex(float(re_s), float(im_s))
        return complex(s.replace(" ", ""))
    except ValueError as exc:
        raise UsageError(f"bad point {text!r}: use re,im or a complex "
                         "literal like 1+0.5j") from exc


_BASE = {"su2": Chart.SPHERE_0, "torus": Chart.TORUS, "gef": Chart.PLANE}


def run_rho(model: str, n: int | None, radius: float | None,
            points: list[complex]) -> dict:
    """k-point correlation at base-chart points -> JSON-ready record."""
    cfg = ExperimentConfig(model=model, n=n, radius=radius)  # reuse validation
    spec = cfg.spec()
    pts = [SurfacePoint(_BASE[model], p) for p in points]
    res = kacrice.rho_k(spec, pts)
    return {
        "model": model,
        "n": spec.n,
        "radius": spec.radius,
        "k": len(points),
        "points": [{"re": p.real, "im": p.imag} for p in points],
        "value": res.value,
        "condition_number": res.cond,
        "normalization": res.normalization,
    }


def _cmd_sample(args) -> int:
    cfg = ExperimentConfig(model=args.model, n=args.n, radius=args.radius,
                           master_seed=args.seed, fmt=args.format,
                           out_dir=args.out_dir or "gafzeros-out")
    stream = trial_stream(cfg.master_seed, args.trial_index)
    zeros = compute_zeros(sample_section(cfg.spec(), stream))
    rows = [(zeros.point(i).chart.value, zeros.coord[i].real,
             zeros.coord[i].imag, float(zeros.residuals[i]))
            for i in range(len(zeros))]
    if args.format == "json":
        out = render_json({
            "model": cfg.model, "n": cfg.n, "radius": cfg.radius,
            "master_seed": cfg.master_seed, "trial_index": args.trial_index,
            "zeros": [{"chart": c, "re": x, "im": y, "residual": r}
                      for c, x, y, r in rows]}) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["chart", "re", "im", "residual"])
        for c, x, y, r in rows:
            w.writerow([c, ffloat(x), ffloat(y), ffloat(r)])
        out = buf.getvalue()
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        name = "zeros.json" if args.format == "json" else "zeros.csv"
        path = os.path.join(args.out_dir, name)
        with open(path, "w") as fh:
            fh.write(out)
        print(path)
    else:
        sys.stdout.write(out)
    return EXIT_OK


def _cmd_extremes(args) -> int:
    fields = {}
    if args.config:
        with open(args.config) as fh:
            fields = parse_config_text(fh.read())
    overrides = dict(
        model=args.model, n=args.n, radius=args.radius, trials=args.trials,
        master_seed=args.seed, kmax=args.kmax, workers=args.workers,
        out_dir=args.out_dir, fmt=args.format,
        thresholds=tuple(args.a) if args.a else None,
        regions=tuple(args.region) if args.region else None)
    for key, val in overrides.items():
        if val is not None:
            fields[key] = val
    if "model" not in fields:
        raise UsageError("--model is required (or provide it in --config)")
    config = ExperimentConfig(**fields)

    def progress(done, total):
        print(f"  {done}/{total} trials", file=sys.stderr, flush=True)

    out = run_extremes(config, progress=progress if args.verbose else None)
    print(f"wrote {out.config_path}, {out.csv_path}, {out.summary_path}")
    print(f"config sha256 {out.config_sha256}")
    print(f"{out.report.trials} trials in {out.wall_time_s:.1f}s")
    for name, ok in out.report.flags.items():
        print(f"  {name}: {'pass' if ok else 'FAIL'}")
    return EXIT_OK if all(out.report.flags.values()) else EXIT_VERDICT


def _cmd_rho(args) -> int:
    points = [parse_point(s) for s in args.points]
    try:
        rec = run_rho(args.model, args.n, args.radius, points)
    except ValueError as exc:
        # bad configuration (coincident points, out-of-chart anchor, ...)
        print(render_json({"error": type(exc).__name__,
                           "detail": str(exc)}), file=sys.stderr)
        return EXIT_USAGE
    print(render_json(rec))
    return EXIT_OK


def _cmd_verify(args) -> int:
    try:
        rows = verify.run_suite(args.suite, cache_dir=args.cache_dir,
                                workers=args.workers)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from exc
    print(verify.format_table(rows))
    return EXIT_OK if all(r.passed for r in rows) else EXIT_VERDICT


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="gafzeros",
        description="Zeros of Gaussian analytic functions: sampling, "
                    "smallest-distance statistics, correlation functions.")
    sub = p.add_subparsers(dest="command", required=True)

    def model_flags(sp, seed_default=0):
        sp.add_argument("--model", choices=("su2", "torus", "gef"))
        sp.add_argument("--n", type=int, help="degree (su2, torus)")
        sp.add_argument("--radius", type=float, help="disk radius (gef)")
        sp.add_argument("--seed", type=int, default=seed_default,
                        help="master seed (unsigned 64-bit)")

    sp = sub.add_parser("sample", help="draw one section and emit its zeros")
    model_flags(sp)
    sp.add_argument("--trial-index", type=int, default=0)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--out-dir", help="write file here instead of stdout")

    sp = sub.add_parser("extremes", help="many-trial near-pair experiment")
    model_flags(sp, seed_default=None)
    sp.add_argument("--config", help="flat key=value config file; flags "
                                     "override file values")
    sp.add_argument("--trials", type=int)
    sp.add_argument("--a", type=float, action="append",
                    help="threshold, repeatable")
    sp.add_argument("--kmax", type=int)
    sp.add_argument("--region", action="append",
                    help=f"mark region, repeatable; one of {sorted(REGIONS)}")
    sp.add_argument("--workers", type=int)
    sp.add_argument("--out-dir")
    sp.add_argument("--format", choices=("csv", "json"))
    sp.add_argument("--verbose", action="store_true")

    sp = sub.add_parser("rho", help="k-point correlation at chart points")
    model_flags(sp)
    sp.add_argument("points", nargs="+",
                    help="base-chart points, 're,im' or complex literals")

    sp = sub.add_parser("verify", help="run a named acceptance suite")
    sp.add_argument("suite", help=f"one of {sorted(verify.SUITES)}")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--cache-dir", help="experiment cache directory")
    return p


_COMMANDS = {"sample": _cmd_sample, "extremes": _cmd_extremes,
             "rho": _cmd_rho, "verify": _cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TrialFailure, RootFindError, NonFiniteKernel,
            KernelConditionError, QuadratureError) as exc:
        print(render_json({"error": type(exc).__name__, "detail": str(exc)}),
              file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
