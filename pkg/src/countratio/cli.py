"""Command-line front end.

Subcommands::

    estimate   fit a ratio (and optionally a quantity-of-interest) posterior
    synth      generate demonstration count data and ground truth
    score      CRPS / MAE / coverage report of a results file against truth
    bench      walltime of the full ratio pipeline across problem sizes

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .betaprime import GenBetaPrime, bp_pdf, bp_quantile
from .exceptions import DataError, DomainError, NumericalError, ParameterError
from .io import (
    format_float,
    read_counts_csv,
    read_kernel_csv,
    read_table_csv,
    write_counts_csv,
    write_table_csv,
)
from .kernels import KernelMatrix, wendland_kernel
from .ratio import QoiModel, qoi_from_ratio, ratio_estimation_permproc, zbetaprime
from .synthetic import toy_qoi_problem, toy_ratio_problem
from .uq import GriddedDensity, crps, hpd_set

__all__ = ["main", "entry_point", "RunConfig"]

RESULT_COLUMNS_HELP = (
    "results columns (fixed order): bin_center, map_ratio, alpha_num, "
    "alpha_denom, p, q, hpd_lower, hpd_upper, warning "
    "[, qoi_map, qoi_shift, qoi_p, qoi_q, qoi_hpd_lower, qoi_hpd_upper]; "
    "warning is 0 (none), 1 (fit not converged) or 2 (no data in bin); "
    "floats are printed with 9 significant digits"
)

#: Quantile range and size of the grids used for per-bin HPD sets and CRPS.
LAW_GRID_TAIL = 1e-6
LAW_GRID_SIZE = 2001


class UsageError(Exception):
    """Bad flags or flag combinations; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    """Resolved estimation settings (defaults, config file, then flags)."""

    estimator: str = "permanental"
    kernel: str = "wendland"
    support_width: float = 0.75
    variance: float = 1.0
    kernel_file: str | None = None
    c1: float = 1.0
    c2: float = 1.0
    g1: float = 1.0
    g2: float = 1.0
    a1: float = 1.0
    b1: float = 0.0
    a2: float = 1.0
    b2: float = 0.0
    maxiter: int = 300
    qoi_m: float | None = None
    qoi_z0: float | None = None
    qoi_p: float | None = None
    alpha: float = 0.95
    seed: int = 0
    trials: int = 5

    def validate(self) -> "RunConfig":
        if self.estimator not in ("permanental", "pointwise"):
            raise UsageError(f"unknown estimator {self.estimator!r}")
        if self.kernel not in ("wendland", "file"):
            raise UsageError(f"unknown kernel {self.kernel!r}")
        if self.kernel == "file" and not self.kernel_file:
            raise UsageError("kernel 'file' requires --kernel-file")
        if not 0.0 < self.alpha < 1.0:
            raise UsageError(f"alpha must lie in (0, 1), got {self.alpha}")
        for name in ("support_width", "variance", "c1", "c2", "g1", "g2", "a1", "a2"):
            if getattr(self, name) <= 0.0:
                raise UsageError(f"{name} must be positive")
        if self.b1 < 0.0 or self.b2 < 0.0:
            raise UsageError("prior rates b1, b2 must be non-negative")
        if self.maxiter < 1:
            raise UsageError("maxiter must be at least 1")
        if self.trials < 1:
            raise UsageError("trials must be at least 1")
        given = [v is not None for v in (self.qoi_m, self.qoi_z0, self.qoi_p)]
        if any(given) and not all(given):
            raise UsageError("--qoi-m, --qoi-z0 and --qoi-p must be given together")
        return self

    @property
    def qoi_model(self) -> QoiModel | None:
        if self.qoi_m is None:
            return None
        try:
            return QoiModel(m=self.qoi_m, z0=self.qoi_z0, p=self.qoi_p)
        except ParameterError as exc:
            raise UsageError(str(exc)) from exc


_CONFIG_TYPES = {f.name: f.type for f in fields(RunConfig)}
_INT_KEYS = {"maxiter", "seed", "trials"}
_STR_KEYS = {"estimator", "kernel", "kernel_file"}


def _read_config_file(path) -> dict:
    values = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise DataError(f"could not read config {path}: {exc}") from exc
    for line_no, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"{path}, line {line_no}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_TYPES:
            raise DataError(f"{path}, line {line_no}: unknown config key {key!r}")
        try:
            if key in _STR_KEYS:
                values[key] = value
            elif key in _INT_KEYS:
                values[key] = int(value)
            else:
                values[key] = float(value)
        except ValueError:
            raise DataError(f"{path}, line {line_no}: bad value for {key}: {value!r}") from None
    return values


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig()
    if getattr(args, "config", None):
        config = replace(config, **_read_config_file(args.config))
    overrides = {
        name: getattr(args, name)
        for name in _CONFIG_TYPES
        if getattr(args, name, None) is not None
    }
    return replace(config, **overrides).validate()


def _add_config_flags(parser: argparse.ArgumentParser, *, priors: bool = True) -> None:
    parser.add_argument("--config", help="key=value config file; explicit flags win")
    parser.add_argument("--estimator", choices=["permanental", "pointwise"], default=None)
    parser.add_argument("--kernel", choices=["wendland", "file"], default=None)
    parser.add_argument("--support-width", dest="support_width", type=float, default=None,
                        help="Wendland support width (default 0.75)")
    parser.add_argument("--variance", type=float, default=None,
                        help="Wendland kernel variance (default 1)")
    parser.add_argument("--kernel-file", dest="kernel_file", default=None,
                        help="headerless d x d CSV kernel matrix")
    parser.add_argument("--c1", type=float, default=None, help="intensity scaling, numerator (default 1)")
    parser.add_argument("--c2", type=float, default=None, help="intensity scaling, denominator (default 1)")
    parser.add_argument("--g1", type=float, default=None, help="marginal precision, numerator (default 1)")
    parser.add_argument("--g2", type=float, default=None, help="marginal precision, denominator (default 1)")
    if priors:
        parser.add_argument("--a1", type=float, default=None, help="Gamma prior shape, numerator (default 1)")
        parser.add_argument("--b1", type=float, default=None, help="Gamma prior rate, numerator (default 0)")
        parser.add_argument("--a2", type=float, default=None, help="Gamma prior shape, denominator (default 1)")
        parser.add_argument("--b2", type=float, default=None, help="Gamma prior rate, denominator (default 0)")
    parser.add_argument("--maxiter", type=int, default=None, help="optimizer iteration cap (default 300)")
    parser.add_argument("--alpha", type=float, default=None, help="HPD coverage level (default 0.95)")
    parser.add_argument("--seed", type=int, default=None)


def build_parser() -> _Parser:
    parser = _Parser(prog="countratio", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="fit a ratio posterior from two count files",
                         epilog=RESULT_COLUMNS_HELP)
    est.add_argument("counts_num", help="numerator count CSV")
    est.add_argument("counts_denom", help="denominator count CSV")
    est.add_argument("-o", "--out", required=True, help="output results CSV")
    _add_config_flags(est)
    est.add_argument("--qoi-m", dest="qoi_m", type=float, default=None,
                     help="forward model slope m in Z=(m*T+z0)^p")
    est.add_argument("--qoi-z0", dest="qoi_z0", type=float, default=None,
                     help="forward model offset z0")
    est.add_argument("--qoi-p", dest="qoi_p", type=float, default=None,
                     help="forward model power p")

    syn = sub.add_parser("synth", help="generate demonstration counts and ground truth")
    syn.add_argument("--problem", choices=["ratio", "qoi"], default="ratio")
    syn.add_argument("--n-bins", dest="n_bins", type=int, default=50)
    syn.add_argument("--seed", type=int, default=0)
    syn.add_argument("--out-prefix", dest="out_prefix", required=True)

    sco = sub.add_parser("score", help="score a results file against ground truth")
    sco.add_argument("results", help="results CSV from 'estimate'")
    sco.add_argument("truth", help="truth CSV from 'synth'")
    sco.add_argument("--out", default=None, help="optional per-bin score CSV")

    ben = sub.add_parser("bench", help="time the ratio pipeline across problem sizes")
    ben.add_argument("--bins", default=None,
                     help="comma-separated bin counts (default log-spaced 10..1000)")
    ben.add_argument("--trials", type=int, default=None, help="trials per size (default 5)")
    ben.add_argument("--out", default=None, help="optional timing CSV")
    _add_config_flags(ben, priors=False)
    return parser


def _law_grid(law: GenBetaPrime, shift: float = 0.0) -> np.ndarray:
    lo = float(bp_quantile(LAW_GRID_TAIL, law))
    hi = float(bp_quantile(1.0 - LAW_GRID_TAIL, law))
    return shift + np.linspace(lo, hi, LAW_GRID_SIZE)


def _law_hpd(law: GenBetaPrime, alpha: float, shift: float = 0.0):
    grid = _law_grid(law, shift)
    density = GriddedDensity.from_pdf(grid, bp_pdf(grid - shift, law))
    return hpd_set(density, alpha)


def _law_crps(law: GenBetaPrime, xhat: float, shift: float = 0.0) -> float:
    grid = _law_grid(law, shift)
    density = GriddedDensity.from_pdf(grid, bp_pdf(grid - shift, law))
    return crps(density, xhat)


def _fit_posterior(config: RunConfig, centers: np.ndarray, counts_num, counts_denom):
    if config.estimator == "pointwise":
        return zbetaprime(
            counts_num, counts_denom, a1=config.a1, b1=config.b1, a2=config.a2, b2=config.b2
        )
    if config.kernel == "file":
        matrix = read_kernel_csv(config.kernel_file)
        if matrix.shape[0] != centers.size:
            raise DataError(
                f"kernel is {matrix.shape[0]} x {matrix.shape[0]} but data has {centers.size} bins"
            )
        km = KernelMatrix.from_matrix(matrix)
    else:
        km = wendland_kernel(centers, config.support_width, config.variance)
    return ratio_estimation_permproc(
        counts_num,
        counts_denom,
        km,
        c1=config.c1,
        c2=config.c2,
        g1=config.g1,
        g2=config.g2,
        maxiter=config.maxiter,
    )


def cmd_estimate(args) -> int:
    config = _resolve_config(args)
    centers_num, counts_num = read_counts_csv(args.counts_num)
    centers_den, counts_den = read_counts_csv(args.counts_denom)
    if centers_num.size != centers_den.size or not np.allclose(
        centers_num, centers_den, rtol=0.0, atol=1e-9
    ):
        raise DataError("numerator and denominator files disagree on bin centers")

    posterior = _fit_posterior(config, centers_num, counts_num, counts_den)
    n = posterior.n_bins
    warning = np.zeros(n)
    if not posterior.converged:
        warning[:] = 1.0
    warning[~posterior.valid] = 2.0

    hpd_lo = np.full(n, np.nan)
    hpd_hi = np.full(n, np.nan)
    for i in range(n):
        if posterior.valid[i]:
            box = _law_hpd(posterior.bin_law(i), config.alpha)
            hpd_lo[i], hpd_hi[i] = box.lower, box.upper

    columns = {
        "bin_center": centers_num,
        "map_ratio": posterior.map_estimate,
        "alpha_num": np.asarray(posterior.law.alpha, dtype=float),
        "alpha_denom": np.asarray(posterior.law.beta, dtype=float),
        "p": np.full(n, float(np.asarray(posterior.law.p))),
        "q": np.asarray(posterior.law.q, dtype=float),
        "hpd_lower": hpd_lo,
        "hpd_upper": hpd_hi,
        "warning": warning,
    }

    model = config.qoi_model
    if model is not None:
        qoi = qoi_from_ratio(posterior, model)
        q_lo = np.full(n, np.nan)
        q_hi = np.full(n, np.nan)
        for i in range(n):
            if posterior.valid[i]:
                box = _law_hpd(qoi.bin_law(i), config.alpha, shift=qoi.shift)
                q_lo[i], q_hi[i] = box.lower, box.upper
        columns.update(
            {
                "qoi_map": qoi.map_estimate,
                "qoi_shift": np.full(n, qoi.shift),
                "qoi_p": np.full(n, float(np.asarray(qoi.law.p))),
                "qoi_q": np.asarray(qoi.law.q, dtype=float),
                "qoi_hpd_lower": q_lo,
                "qoi_hpd_upper": q_hi,
            }
        )

    write_table_csv(args.out, columns)
    flagged = int(np.count_nonzero(warning))
    note = "" if flagged == 0 else f" ({flagged} bins flagged, see 'warning' column)"
    print(f"wrote {n} bins to {args.out}{note}")
    return 0


def cmd_synth(args) -> int:
    if args.n_bins < 2:
        raise UsageError("--n-bins must be at least 2")
    prefix = args.out_prefix
    if args.problem == "qoi":
        problem = toy_qoi_problem(args.n_bins, seed=args.seed)
        truth = {
            "bin_center": problem.grid.centers,
            "true_z": problem.true_ratio,
            "true_t": problem.true_qoi,
        }
    else:
        problem = toy_ratio_problem(args.n_bins, seed=args.seed)
        truth = {"bin_center": problem.grid.centers, "true_z": problem.true_ratio}
    write_counts_csv(f"{prefix}_num.csv", problem.grid.centers, problem.counts_num)
    write_counts_csv(f"{prefix}_denom.csv", problem.grid.centers, problem.counts_denom)
    write_table_csv(f"{prefix}_truth.csv", truth)
    print(f"wrote {prefix}_num.csv, {prefix}_denom.csv, {prefix}_truth.csv")
    return 0


def _score_block(results, truth_values, prefix=""):
    """Per-bin CRPS, relative error, and HPD hits for one target column."""
    n = truth_values.size
    laws = GenBetaPrime(
        alpha=results["alpha_num"],
        beta=results["alpha_denom"],
        p=float(results[f"{prefix}p"][0]),
        q=results[f"{prefix}q"],
    )
    shift = float(results[f"{prefix}shift"][0]) if f"{prefix}shift" in results else 0.0
    map_col = results[f"{prefix}map_ratio" if not prefix else f"{prefix}map"]
    crps_vals = np.empty(n)
    for i in range(n):
        law_i = GenBetaPrime(
            alpha=float(np.asarray(laws.alpha)[i]),
            beta=float(np.asarray(laws.beta)[i]),
            p=float(np.asarray(laws.p)),
            q=float(np.asarray(laws.q)[i]),
        )
        crps_vals[i] = _law_crps(law_i, float(truth_values[i]), shift=shift)
    rel_err = np.abs(map_col - truth_values) / np.abs(truth_values)
    lo = results[f"{prefix}hpd_lower"]
    hi = results[f"{prefix}hpd_upper"]
    covered = (truth_values >= lo) & (truth_values <= hi)
    return crps_vals, rel_err, covered


def cmd_score(args) -> int:
    results = read_table_csv(args.results)
    truth = read_table_csv(args.truth)
    required = {"bin_center", "map_ratio", "alpha_num", "alpha_denom", "p", "q",
                "hpd_lower", "hpd_upper"}
    missing = required - results.keys()
    if missing:
        raise DataError(f"{args.results}: missing columns {sorted(missing)}")
    if "true_z" not in truth:
        raise DataError(f"{args.truth}: missing column 'true_z'")
    if results["bin_center"].size != truth["bin_center"].size or not np.allclose(
        results["bin_center"], truth["bin_center"], rtol=0.0, atol=1e-9
    ):
        raise DataError("results and truth disagree on bin centers")

    crps_z, rel_z, cover_z = _score_block(results, truth["true_z"])
    print(f"ratio: mean CRPS            {np.mean(crps_z):.6g}")
    print(f"ratio: relative MAE of MAP  {np.mean(rel_z):.6g}")
    print(f"ratio: empirical HPD coverage {np.mean(cover_z):.6g}")
    per_bin = {
        "bin_center": results["bin_center"],
        "crps": crps_z,
        "rel_error": rel_z,
        "covered": cover_z.astype(float),
    }

    if "qoi_map" in results and "true_t" in truth:
        crps_t, rel_t, cover_t = _score_block(results, truth["true_t"], prefix="qoi_")
        print(f"qoi:   mean CRPS            {np.mean(crps_t):.6g}")
        print(f"qoi:   relative MAE of MAP  {np.mean(rel_t):.6g}")
        print(f"qoi:   empirical HPD coverage {np.mean(cover_t):.6g}")
        per_bin.update(
            {"qoi_crps": crps_t, "qoi_rel_error": rel_t, "qoi_covered": cover_t.astype(float)}
        )

    if args.out:
        write_table_csv(args.out, per_bin)
        print(f"wrote per-bin scores to {args.out}")
    return 0


def _parse_bins(text: str | None) -> list[int]:
    if text is None:
        return [10, 22, 46, 100, 215, 464, 1000]
    try:
        bins = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"--bins expects comma-separated integers, got {text!r}") from None
    if not bins or any(b < 2 for b in bins):
        raise UsageError("--bins entries must be integers >= 2")
    return bins


def cmd_bench(args) -> int:
    config = _resolve_config(args)
    bins = _parse_bins(args.bins)
    rows = {"n_bins": [], "trials": [], "mean_seconds": [], "min_seconds": [], "max_seconds": []}
    print(f"{'n_bins':>8} {'trials':>7} {'mean_s':>10} {'min_s':>10} {'max_s':>10}")
    for n in bins:
        times = []
        for trial in range(config.trials):
            problem = toy_ratio_problem(n, seed=config.seed + trial)
            km = wendland_kernel(problem.grid.centers, config.support_width, config.variance)
            start = time.perf_counter()
            ratio_estimation_permproc(
                problem.counts_num,
                problem.counts_denom,
                km,
                c1=config.c1,
                c2=config.c2,
                g1=config.g1,
                g2=config.g2,
                maxiter=config.maxiter,
            )
            times.append(time.perf_counter() - start)
        rows["n_bins"].append(float(n))
        rows["trials"].append(float(config.trials))
        rows["mean_seconds"].append(float(np.mean(times)))
        rows["min_seconds"].append(float(np.min(times)))
        rows["max_seconds"].append(float(np.max(times)))
        print(
            f"{n:>8d} {config.trials:>7d} {np.mean(times):>10.4f} "
            f"{np.min(times):>10.4f} {np.max(times):>10.4f}"
        )
    if args.out:
        write_table_csv(args.out, {k: np.asarray(v) for k, v in rows.items()})
        print(f"wrote timing table to {args.out}")
    return 0


_COMMANDS = {
    "estimate": cmd_estimate,
    "synth": cmd_synth,
    "score": cmd_score,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (DataError, DomainError, ParameterError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
