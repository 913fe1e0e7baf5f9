"""Command-line surface over the distribution and regression layers.

Five subcommands: ``dist`` evaluates continuous count distributions and
the quantile-to-parameter mapping, ``fit`` estimates a quantile model
from a CSV file, ``crossing-experiment`` measures how often fitted
quantile curves cross for the model-based and jittered methods,
``risk-map`` produces a tabular per-area exceedance report, and
``verify`` re-checks the library's mathematical guarantees with printed
margins.

Outputs are plain CSV/JSON so external tools can plot them.  Every
command is deterministic given its seed flags; the MBQR_SEED environment
variable supplies the default seed.  Exit codes: 0 success, 2 usage
error, 3 data error, 4 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Context, Decimal

import numpy as np

from .countdist import (
    Binomial,
    BinomialShape,
    CountFamily,
    FamilyShape,
    NegBinomial,
    NegBinomialShape,
    Poisson,
    PoissonShape,
    continuous_cdf,
    continuous_quantile,
    discrete_pmf,
    map_quantile_to_param,
    verify_limit_relations,
)
from .jitterqr import JitterSettings, fit_jittered, jittered_curve
from .mbqr import (
    Dataset,
    FitError,
    QuantileModelSpec,
    count_crossings,
    exceedance,
    fit,
    parametric_bootstrap,
    quantile_curve,
)
from .specfun import DomainError

__all__ = [
    "ExperimentConfig",
    "load_experiment_config",
    "run_crossing_experiment",
    "main",
]


class UsageError(Exception):
    """Bad flag values or flag combinations; exit code 2."""


class DataError(Exception):
    """Unreadable or invalid input files; exit code 3."""


class ConvergenceError(Exception):
    """The optimizer did not converge; exit code 4."""


# ---------------------------------------------------------------------------
# small shared helpers

_SIG12 = Context(prec=12, rounding=ROUND_HALF_EVEN)


def format_sig12(x: float) -> str:
    """Round to 12 significant digits, decimal semantics.

    A carry that lands on a trailing zero keeps it (it is significant);
    a value already exact in fewer digits stays short.
    """
    x = float(x)
    if not math.isfinite(x):
        return str(x)
    return str(_SIG12.plus(Decimal(x)))


def _default_seed() -> int:
    raw = os.environ.get("MBQR_SEED", "").strip()
    if not raw:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"MBQR_SEED must be an integer, got {raw!r}") from None


def _resolve_seed(args) -> int:
    return args.seed if args.seed is not None else _default_seed()


def _check_alpha(alpha: float, flag: str = "--alpha") -> None:
    if not 0.0 < alpha < 1.0:
        raise UsageError(f"{flag} must lie strictly in (0, 1), got {alpha:g}")


def _open_out(path):
    if path is None:
        return sys.stdout, False
    try:
        return open(path, "w", encoding="utf-8", newline=""), True
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc.strerror or exc}") from None


# ---------------------------------------------------------------------------
# CSV ingestion


def _read_table(path):
    """Header and rows as string lists, plus the physical line of each row."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file, expected a header row") from None
        if len(set(header)) != len(header):
            raise DataError(f"{path}: duplicate column names in header")
        rows, lines = [], []
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataError(f"{path} line {reader.line_num}: expected "
                                f"{len(header)} fields, found {len(row)}")
            rows.append([c.strip() for c in row])
            lines.append(reader.line_num)
    if not rows:
        raise DataError(f"{path}: no data rows")
    return header, rows, lines


def _require_columns(path, header, needed) -> None:
    missing = [c for c in needed if c not in header]
    if missing:
        raise DataError(f"{path}: missing required column(s): "
                        + ", ".join(missing))


def _float_column(path, header, rows, lines, name, positive=False):
    idx = header.index(name)
    out = np.empty(len(rows))
    for i, row in enumerate(rows):
        try:
            v = float(row[idx])
        except ValueError:
            raise DataError(f"{path} line {lines[i]}: column {name!r} is not "
                            f"numeric: {row[idx]!r}") from None
        if not math.isfinite(v):
            raise DataError(f"{path} line {lines[i]}: column {name!r} must be "
                            f"finite, got {row[idx]!r}")
        if positive and v <= 0.0:
            raise DataError(f"{path} line {lines[i]}: column {name!r} must be "
                            f"positive, got {row[idx]!r}")
        out[i] = v
    return out


def _count_column(path, header, rows, lines, name="y"):
    vals = _float_column(path, header, rows, lines, name)
    for i, v in enumerate(vals):
        if v < 0.0 or v != math.floor(v):
            raise DataError(f"{path} line {lines[i]}: column {name!r} must be "
                            f"a nonnegative integer count, got {vals[i]:g}")
    return vals


_RESERVED_COLUMNS = ("y", "E", "area_id")


def _covariate_names(raw, header, path):
    if raw is None:
        return [c for c in header if c not in _RESERVED_COLUMNS]
    names = [tok.strip() for tok in raw.split(",") if tok.strip()]
    missing = [c for c in names if c not in header]
    if missing:
        raise DataError(f"{path}: covariate column(s) not in header: "
                        + ", ".join(missing))
    return names


def _design_from_csv(path, header, rows, lines, names):
    if not names:
        return np.empty((len(rows), 0))
    cols = [_float_column(path, header, rows, lines, c) for c in names]
    return np.column_stack(cols)


# ---------------------------------------------------------------------------
# dist


def _shape_from_args(args) -> FamilyShape:
    if args.family == "poisson":
        return PoissonShape()
    if args.family == "binomial":
        if args.n is None:
            raise UsageError("--family binomial needs --n")
        return BinomialShape(args.n)
    if args.r is None:
        raise UsageError("--family negbinomial needs --r")
    return NegBinomialShape(args.r)


def _family_from_args(args) -> CountFamily:
    if args.family == "poisson":
        if args.lam is None:
            raise UsageError("--family poisson needs --lambda")
        return Poisson(args.lam)
    if args.family == "binomial":
        if args.n is None or args.p is None:
            raise UsageError("--family binomial needs --n and --p")
        return Binomial(args.n, args.p)
    if args.r is None or args.p is None:
        raise UsageError("--family negbinomial needs --r and --p")
    return NegBinomial(args.r, args.p)


def _cmd_dist(args) -> int:
    queries = [q for q in ("cdf", "quantile", "map_q")
               if getattr(args, q) is not None]
    if len(queries) != 1:
        raise UsageError("exactly one of --cdf, --quantile, --map-q is required")
    query = queries[0]
    if query == "map_q":
        if args.alpha is None:
            raise UsageError("--map-q needs --alpha")
        _check_alpha(args.alpha)
        value = map_quantile_to_param(_shape_from_args(args), args.map_q,
                                      args.alpha)
    elif query == "cdf":
        value = continuous_cdf(_family_from_args(args), args.cdf)
    else:
        _check_alpha(args.quantile, "--quantile")
        value = continuous_quantile(_family_from_args(args), args.quantile)
    print(format_sig12(value))
    if args.json:
        print(json.dumps({"family": args.family, "query": query,
                          "value": value}))
    return 0


# ---------------------------------------------------------------------------
# fit


def _fit_spec_from_args(args, cov_names) -> QuantileModelSpec:
    return QuantileModelSpec(alpha=args.alpha,
                             family_shape=_shape_from_args(args),
                             exposure_mode=args.exposure_mode,
                             covariate_names=tuple(cov_names),
                             intercept=not args.no_intercept)


def _print_fit_table(result) -> None:
    names = result.coef_names
    ses = result.standard_errors()
    width = max([11] + [len(n) for n in names])
    print(f"{'coefficient':<{width}}  {'estimate':>14}  {'std_error':>14}")
    for name, b, s in zip(names, result.beta_hat, ses):
        print(f"{name:<{width}}  {b:>14.6g}  {s:>14.6g}")
    print(f"loglik {result.loglik:.6f}  converged {result.converged}  "
          f"iterations {result.n_iter}")


def _cmd_fit(args) -> int:
    _check_alpha(args.alpha)
    if args.bootstrap is not None and args.bootstrap < 2:
        raise UsageError("--bootstrap needs at least 2 resamples")
    header, rows, lines = _read_table(args.csv)
    _require_columns(args.csv, header, ["y"])
    cov_names = _covariate_names(args.covariates, header, args.csv)
    y = _count_column(args.csv, header, rows, lines)
    X = _design_from_csv(args.csv, header, rows, lines, cov_names)
    E = None
    if args.exposure_mode != "none":
        _require_columns(args.csv, header, ["E"])
        E = _float_column(args.csv, header, rows, lines, "E", positive=True)
    spec = _fit_spec_from_args(args, cov_names)
    try:
        dataset = Dataset(X=X, y=y, E=E)
        result = fit(spec, dataset)
    except (DomainError, FitError) as exc:
        raise DataError(f"{args.csv}: {exc}") from None

    payload = {
        "alpha": args.alpha,
        "family": args.family,
        "exposure_mode": args.exposure_mode,
        "n_obs": dataset.n_obs,
        "coefficients": list(result.coef_names),
        "beta_hat": [float(b) for b in result.beta_hat],
        "standard_errors": [float(s) for s in result.standard_errors()],
        "loglik": float(result.loglik),
        "converged": bool(result.converged),
        "n_iter": int(result.n_iter),
    }
    if args.bootstrap is not None and result.converged:
        cov = parametric_bootstrap(spec, dataset, result,
                                   n_boot=args.bootstrap,
                                   seed=_resolve_seed(args))
        payload["bootstrap_standard_errors"] = [
            float(s) for s in np.sqrt(np.clip(np.diag(cov), 0.0, None))]
    _print_fit_table(result)
    print(json.dumps(payload))
    if not result.converged:
        raise ConvergenceError(
            f"fit did not converge after {result.n_iter} iterations; "
            "estimates above are provisional")
    return 0


# ---------------------------------------------------------------------------
# crossing experiment


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings for the crossing-frequency experiment.

    The covariate is |Normal(0, covariate_sd)| and responses are Poisson
    with rate exp(x); both methods fit a single-covariate log-linear
    quantile model with no intercept over the alpha grid.
    """

    n_replicates: int = 300
    sample_sizes: tuple[int, ...] = (25, 50, 100, 200, 400)
    alpha_grid: tuple[float, ...] = tuple(i / 20 for i in range(1, 20))
    base_seed: int = 0
    covariate_sd: float = 1.5
    jitter_m: int = 50

    def __post_init__(self) -> None:
        object.__setattr__(self, "sample_sizes", tuple(self.sample_sizes))
        object.__setattr__(self, "alpha_grid", tuple(self.alpha_grid))
        if self.n_replicates < 1:
            raise DomainError("n_replicates must be >= 1")
        if not self.sample_sizes or any(s < 2 for s in self.sample_sizes):
            raise DomainError("sample_sizes must be nonempty, each >= 2")
        if list(self.sample_sizes) != sorted(set(self.sample_sizes)):
            raise DomainError("sample_sizes must be strictly increasing")
        if not self.alpha_grid or any(not 0.0 < a < 1.0
                                      for a in self.alpha_grid):
            raise DomainError("alpha_grid values must lie in (0, 1)")
        if list(self.alpha_grid) != sorted(set(self.alpha_grid)):
            raise DomainError("alpha_grid must be strictly increasing")
        if self.covariate_sd <= 0.0:
            raise DomainError("covariate_sd must be positive")
        if self.jitter_m < 1:
            raise DomainError("jitter_m must be >= 1")


_CONFIG_PARSERS = {
    "n_replicates": int,
    "sample_sizes": lambda raw: tuple(int(t) for t in raw.split(",") if t.strip()),
    "alpha_grid": lambda raw: tuple(float(t) for t in raw.split(",") if t.strip()),
    "base_seed": int,
    "covariate_sd": float,
    "jitter_m": int,
}


def load_experiment_config(path=None, **overrides) -> ExperimentConfig:
    """Read a key=value config file; non-None overrides win."""
    values = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise DataError(f"cannot read {path}: {exc.strerror or exc}") from None
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            key, eq, raw = stripped.partition("=")
            key, raw = key.strip(), raw.strip()
            if not eq:
                raise DataError(f"{path} line {lineno}: expected key=value")
            if key not in _CONFIG_PARSERS:
                raise DataError(f"{path} line {lineno}: unknown key {key!r}")
            try:
                values[key] = _CONFIG_PARSERS[key](raw)
            except ValueError:
                raise DataError(f"{path} line {lineno}: cannot parse "
                                f"{key}={raw!r}") from None
    values.update({k: v for k, v in overrides.items() if v is not None})
    # flag > config file > MBQR_SEED > 0
    values.setdefault("base_seed", _default_seed())
    try:
        return ExperimentConfig(**values)
    except DomainError as exc:
        raise DataError(f"invalid experiment configuration: {exc}") from None


def _crossing_task(task):
    """One replicate at one sample size; returns any-crossing flags."""
    size, rep, base_seed, alphas, covariate_sd, jitter_m = task
    rng = np.random.default_rng([base_seed, size, rep])
    x = np.abs(rng.normal(0.0, covariate_sd, size))
    y = rng.poisson(np.exp(x))
    X = x[:, None]
    dataset = Dataset(X=X, y=y)
    curves = np.empty((len(alphas), size))
    init = None
    for j, a in enumerate(alphas):
        res = fit(QuantileModelSpec(alpha=a, intercept=False), dataset,
                  init=init)
        init = res.beta_hat
        curves[j] = quantile_curve(res, X)
    model_cross = count_crossings(curves, alphas).any_crossing
    for j, a in enumerate(alphas):
        seed = int(np.random.SeedSequence(
            (base_seed, size, rep, j)).generate_state(1)[0])
        beta = fit_jittered(X, y, a,
                            JitterSettings(m_replicates=jitter_m, seed=seed))
        curves[j] = jittered_curve(X, beta, a)
    jitter_cross = count_crossings(curves, alphas).any_crossing
    return size, rep, model_cross, jitter_cross


def run_crossing_experiment(config: ExperimentConfig, jobs=None):
    """Rows (sample_size, method, crossing_frequency) for both methods.

    Replicates fan out across processes; aggregation is keyed by
    (size, replicate), so the result is independent of completion order.
    """
    tasks = [(size, rep, config.base_seed, config.alpha_grid,
              config.covariate_sd, config.jitter_m)
             for size in config.sample_sizes
             for rep in range(config.n_replicates)]
    jobs = jobs if jobs is not None else (os.cpu_count() or 1)
    if jobs < 1:
        raise UsageError("--jobs must be >= 1")
    hits = {(size, m): 0 for size in config.sample_sizes
            for m in ("model_based", "jittered")}
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = pool.map(_crossing_task, tasks, chunksize=4)
            for size, _, mc, jc in outcomes:
                hits[(size, "model_based")] += mc
                hits[(size, "jittered")] += jc
    else:
        for task in tasks:
            size, _, mc, jc = _crossing_task(task)
            hits[(size, "model_based")] += mc
            hits[(size, "jittered")] += jc
    rows = []
    for size in config.sample_sizes:
        for method in ("model_based", "jittered"):
            rows.append((size, method, hits[(size, method)] / config.n_replicates))
    return rows


def _cmd_crossing(args) -> int:
    config = load_experiment_config(
        args.config,
        n_replicates=args.replicates,
        sample_sizes=args.sizes,
        alpha_grid=args.alphas,
        base_seed=args.seed,
        jitter_m=args.jitter_m,
    )
    rows = run_crossing_experiment(config, jobs=args.jobs)
    out, close = _open_out(args.out)
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["sample_size", "method", "crossing_frequency"])
        for size, method, freq in rows:
            writer.writerow([size, method, repr(freq)])
    finally:
        if close:
            out.close()
    return 0


# ---------------------------------------------------------------------------
# risk map


def _cmd_risk_map(args) -> int:
    _check_alpha(args.alpha)
    if not 0.0 <= args.threshold <= 1.0:
        raise UsageError(f"--threshold must lie in [0, 1], got {args.threshold:g}")
    if args.draws < 1:
        raise UsageError("--draws must be >= 1")
    header, rows, lines = _read_table(args.csv)
    _require_columns(args.csv, header, ["area_id", "y", "E"])
    cov_names = _covariate_names(args.covariates, header, args.csv)
    y = _count_column(args.csv, header, rows, lines)
    E = _float_column(args.csv, header, rows, lines, "E", positive=True)
    X = _design_from_csv(args.csv, header, rows, lines, cov_names)
    area_ids = tuple(row[header.index("area_id")] for row in rows)
    spec = QuantileModelSpec(alpha=args.alpha,
                             exposure_mode=args.exposure_mode,
                             covariate_names=tuple(cov_names))
    try:
        dataset = Dataset(X=X, y=y, E=E, area_ids=area_ids)
        result = fit(spec, dataset)
    except (DomainError, FitError) as exc:
        raise DataError(f"{args.csv}: {exc}") from None
    if not result.converged:
        raise ConvergenceError(
            f"fit did not converge after {result.n_iter} iterations")
    report = exceedance(result, dataset, n_draws=args.draws,
                        seed=_resolve_seed(args), threshold=args.threshold)
    out, close = _open_out(args.out)
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["area_id", "theta_alpha", "exceedance", "high_risk"])
        for i, area in enumerate(report.area_ids):
            writer.writerow([area, repr(float(report.theta_alpha[i])),
                             repr(float(report.exceedance[i])),
                             int(report.high_risk[i])])
    finally:
        if close:
            out.close()
    flagged = int(np.sum(report.high_risk))
    print(f"flagged {flagged} of {dataset.n_obs} areas at "
          f"threshold {args.threshold:g} (alpha {args.alpha:g})",
          file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# verify


def _interpolation_gap(family, k_max):
    """Max |continuous_cdf(k) - sum of pmf up to k| over k = 0..k_max.

    The pmf sum goes through log-gamma terms, the continuous CDF through
    the incomplete gamma/beta functions, so the two paths are
    independent and the gap is a real accuracy margin.
    """
    total = 0.0
    gap = 0.0
    for k in range(k_max + 1):
        total += discrete_pmf(family, k)
        gap = max(gap, abs(continuous_cdf(family, k) - min(total, 1.0)))
    return gap


def _suite_lemma1():
    """Continuous CDFs must hit the discrete CDFs at the integers."""
    bound = 1e-10
    checks = []
    for lam in (0.5, 1.0, 2.0, 5.0, 10.0, 50.0):
        gap = _interpolation_gap(Poisson(lam), 60)
        checks.append((f"poisson lam={lam:g} k=0..60", gap))
    for n in (3, 10, 40):
        for p in (0.1, 0.5, 0.9):
            gap = _interpolation_gap(Binomial(n, p), n)
            checks.append((f"binomial n={n} p={p:g} k=0..{n}", gap))
    for r in (1.5, 4.0, 20.0):
        for p in (0.1, 0.5, 0.9):
            gap = _interpolation_gap(NegBinomial(r, p), 60)
            checks.append((f"negbinomial r={r:g} p={p:g} k=0..60", gap))
    ok = True
    for label, gap in checks:
        ok = ok and gap < bound
        print(f"  {label}: max gap {gap:.3e}")
    return ok, f"all interpolation gaps < {bound:g}"


def _suite_theorem1():
    """Limit relations tying the three families together."""
    report = verify_limit_relations()
    print(f"  identity max gap: {report.identity_max_gap:.3e} "
          f"(bound 1e-10)")
    for lam, gaps in sorted(report.binomial_gaps.items()):
        seq = " -> ".join(f"{g:.3e}" for g in gaps)
        print(f"  binomial sup gap lam={lam:g}: {seq}")
    for lam, gaps in sorted(report.negbin_gaps.items()):
        seq = " -> ".join(f"{g:.3e}" for g in gaps)
        print(f"  negbinomial sup gap lam={lam:g}: {seq}")
    print(f"  gaps strictly decreasing: binomial={report.binomial_decreasing} "
          f"negbinomial={report.negbin_decreasing}")
    print(f"  final gap bound met: {report.final_gap_bound_met}")
    return report.passed, "identity exact and sup gaps shrinking"


def _lemma2_replicate(rep, base_seed, n_obs, alphas):
    rng = np.random.default_rng([base_seed, rep])
    x = np.abs(rng.normal(0.0, 1.5, n_obs))
    y = rng.poisson(np.exp(x))
    dataset = Dataset(X=x[:, None], y=y)
    betas = []
    init = None
    for a in alphas:
        res = fit(QuantileModelSpec(alpha=a, intercept=False), dataset,
                  init=init)
        init = res.beta_hat
        betas.append(float(res.beta_hat[0]))
    diffs = np.diff(betas)
    return float(np.min(diffs))


def _suite_lemma2(n_replicates, base_seed):
    """Slope estimates must be nondecreasing in the quantile level."""
    tol = 1e-6
    alphas = tuple(i / 20 for i in range(1, 20))
    worst = math.inf
    ok = True
    for rep in range(n_replicates):
        min_diff = _lemma2_replicate(rep, base_seed, 200, alphas)
        worst = min(worst, min_diff)
        if min_diff < -tol:
            ok = False
            print(f"  replicate {rep}: VIOLATION, adjacent decrease "
                  f"{min_diff:.3e}")
    print(f"  replicates: {n_replicates}, n_obs: 200, worst adjacent "
          f"slope difference: {worst:.3e} (tolerance -{tol:g})")
    return ok, "slope nondecreasing in alpha for every replicate"


def _cmd_verify(args) -> int:
    print(f"suite {args.suite}:")
    if args.suite == "lemma1":
        ok, blurb = _suite_lemma1()
    elif args.suite == "theorem1":
        ok, blurb = _suite_theorem1()
    else:
        if args.replicates is not None and args.replicates < 1:
            raise UsageError("--replicates must be >= 1")
        ok, blurb = _suite_lemma2(args.replicates or 50, _resolve_seed(args))
    print(f"{args.suite}: {'PASS' if ok else 'FAIL'} ({blurb})")
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# argument parsing


def _int_list(raw):
    try:
        return tuple(int(t) for t in raw.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, "
                                         f"got {raw!r}") from None


def _float_list(raw):
    try:
        return tuple(float(t) for t in raw.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, "
                                         f"got {raw!r}") from None


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="countqr",
        description="Quantile regression for count data: distribution "
                    "utilities, model fitting, and experiment drivers.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dist", help="evaluate continuous count distributions")
    p.add_argument("--family", required=True,
                   choices=["poisson", "binomial", "negbinomial"])
    p.add_argument("--lambda", dest="lam", type=float, help="Poisson rate")
    p.add_argument("--n", type=int, help="binomial trial count")
    p.add_argument("--p", type=float, help="binomial/negbinomial probability")
    p.add_argument("--r", type=float, help="negbinomial size")
    p.add_argument("--cdf", type=float, metavar="X",
                   help="continuous CDF at X")
    p.add_argument("--quantile", type=float, metavar="ALPHA",
                   help="continuous quantile at level ALPHA")
    p.add_argument("--map-q", dest="map_q", type=float, metavar="Q",
                   help="parameter whose alpha-quantile equals Q")
    p.add_argument("--alpha", type=float, help="quantile level for --map-q")
    p.add_argument("--json", action="store_true",
                   help="also print a JSON record")
    p.set_defaults(handler=_cmd_dist)

    p = sub.add_parser("fit", help="fit a quantile model to CSV data")
    p.add_argument("csv", help="input CSV with a y column")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--family", default="poisson",
                   choices=["poisson", "binomial", "negbinomial"])
    p.add_argument("--n", type=int, help="binomial trial count")
    p.add_argument("--r", type=float, help="negbinomial size")
    p.add_argument("--exposure-mode", default="none",
                   choices=["none", "quantile_level", "parameter_level"])
    p.add_argument("--covariates",
                   help="comma-separated column names (default: all but "
                        "y, E, area_id)")
    p.add_argument("--no-intercept", action="store_true")
    p.add_argument("--bootstrap", type=int, nargs="?", const=200,
                   metavar="N", help="add bootstrap standard errors")
    p.add_argument("--seed", type=int)
    p.set_defaults(handler=_cmd_fit)

    p = sub.add_parser("crossing-experiment",
                       help="crossing frequency of fitted quantile curves")
    p.add_argument("config", nargs="?",
                   help="key=value config file (flags override)")
    p.add_argument("--replicates", type=int)
    p.add_argument("--sizes", type=_int_list)
    p.add_argument("--alphas", type=_float_list)
    p.add_argument("--jitter-m", dest="jitter_m", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int,
                   help="worker processes (default: logical processors)")
    p.add_argument("--out", help="write CSV here instead of stdout")
    p.set_defaults(handler=_cmd_crossing)

    p = sub.add_parser("risk-map", help="per-area exceedance report")
    p.add_argument("csv", help="input CSV with area_id, y, E columns")
    p.add_argument("--alpha", type=float, default=0.25)
    p.add_argument("--threshold", type=float, default=0.95)
    p.add_argument("--draws", type=int, default=10_000)
    p.add_argument("--exposure-mode", default="quantile_level",
                   choices=["quantile_level", "parameter_level"])
    p.add_argument("--covariates")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="write CSV here instead of stdout")
    p.set_defaults(handler=_cmd_risk_map)

    p = sub.add_parser("verify", help="re-check mathematical guarantees")
    p.add_argument("--suite", required=True,
                   choices=["lemma1", "lemma2", "theorem1"])
    p.add_argument("--replicates", type=int, help="lemma2 replicate count")
    p.add_argument("--seed", type=int)
    p.set_defaults(handler=_cmd_verify)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except DomainError as exc:
        # invalid parameter values caught by the library layer
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
