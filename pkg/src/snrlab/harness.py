"""Experiment orchestration: SNR sweeps, aggregation, persistence.

A sweep fixes (n, p, k, tau) and walks an inverse-SNR grid (sigma = tau
* inv_snr), running ``trials`` independent datasets per grid point and
recording the scaled error ||bhat - beta||^2 / ||beta||^2 of every
enabled estimator.  Hyperparameters come either from the closed-form
defaults (``PaperFormula``) or from oracle grid search on a pilot batch
of datasets whose random streams are disjoint from the evaluation
trials (``OracleGrid``), so tuning never sees evaluation noise.

Everything is reproducible byte-for-byte from (config, master_seed):
trials live on stream ids derived from their grid index and trial
index, aggregation is a fixed-order pairwise reduction regardless of
the worker count, and the CSV serialization is canonical.
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from ._validation import check_count, check_positive
from .datamodel import Dataset, ParamSpace
from .estimators import Certificate
from .rng import RngStream
from .theory import risk_curves
from .tuning import (Family, Provenance, RegimeMismatchError, Tuning,
                     default_grid, enet_default_tuning, estimator_for,
                     lasso_default_lambda, oracle_tune, ridge_default_lambda,
                     scaled_error)

__all__ = [
    "ConfigError",
    "CsvSchemaError",
    "SweepConfig",
    "TrialRecord",
    "CellStats",
    "SweepResult",
    "config_to_toml",
    "config_from_toml",
    "load_config",
    "run_trial",
    "run_sweep",
    "aggregate",
    "compare_theory",
    "TheoryComparison",
    "write_csv",
    "read_csv",
    "CSV_HEADER",
]

# Stream id layout: child(purpose, grid_index, trial_index).
_EVAL_STREAM = 0
_PILOT_STREAM = 1

CSV_HEADER = "estimator,inv_snr,mean_scaled_mse,se_scaled_mse,trials,master_seed"

_FEASIBLE_EXHAUSTIVE = 10**6


class ConfigError(ValueError):
    """Sweep configuration failed validation."""


@dataclass(frozen=True)
class SweepConfig:
    n: int
    p: int
    k: int
    tau: float
    inv_snr_grid: tuple = ()
    trials: int = 50
    estimators: tuple = (Family.RIDGE.value, Family.LASSO.value,
                         Family.ELASTIC_NET.value)
    tuning_mode: str = "OracleGrid"          # or "PaperFormula"
    master_seed: int = 0
    pilot_fraction: float = 0.25
    grid_size: int = 40
    # explicit oracle grids; empty tuples fall back to the log-spaced
    # defaults centered on the closed-form tunings
    ridge_grid: tuple = ()
    lasso_grid: tuple = ()
    enet_lam_grid: tuple = ()
    enet_gamma_grid: tuple = ()
    lasso_tol: float = 1e-7
    lasso_max_iter: int = 100_000
    pilot_lasso_tol: float = 1e-4
    bss_budget: int = 1_000_000

    def __post_init__(self):
        object.__setattr__(self, "inv_snr_grid",
                           tuple(float(v) for v in self.inv_snr_grid))
        object.__setattr__(self, "estimators",
                           tuple(str(e) for e in self.estimators))
        for name in ("ridge_grid", "lasso_grid", "enet_lam_grid",
                     "enet_gamma_grid"):
            object.__setattr__(self, name,
                               tuple(float(v) for v in getattr(self, name)))

    def validate(self) -> "SweepConfig":
        try:
            check_count("n", self.n)
            check_count("p", self.p)
            check_count("k", self.k)
            check_positive("tau", self.tau)
            check_count("trials", self.trials)
            check_count("grid_size", self.grid_size)
            check_count("bss_budget", self.bss_budget)
            check_positive("lasso_tol", self.lasso_tol)
            check_positive("pilot_lasso_tol", self.pilot_lasso_tol)
            check_count("lasso_max_iter", self.lasso_max_iter)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.k >= self.p:
            raise ConfigError(f"need k < p, got k={self.k}, p={self.p}")
        if not self.inv_snr_grid:
            raise ConfigError("inv_snr_grid must be nonempty")
        if any(v <= 0 for v in self.inv_snr_grid):
            raise ConfigError("inv_snr grid values must be positive")
        if list(self.inv_snr_grid) != sorted(self.inv_snr_grid) \
                or len(set(self.inv_snr_grid)) != len(self.inv_snr_grid):
            raise ConfigError("inv_snr_grid must be strictly ascending")
        if not self.estimators:
            raise ConfigError("estimator set must be nonempty")
        known = {f.value for f in Family}
        unknown = set(self.estimators) - known
        if unknown:
            raise ConfigError(f"unknown estimators {sorted(unknown)}; "
                              f"choose from {sorted(known)}")
        if self.tuning_mode not in ("PaperFormula", "OracleGrid"):
            raise ConfigError(f"unknown tuning_mode {self.tuning_mode!r}")
        if not 0.0 < self.pilot_fraction <= 1.0:
            raise ConfigError("pilot_fraction must be in (0, 1]")
        if not 0 <= int(self.master_seed) <= 2**64 - 1:
            raise ConfigError("master_seed must fit in 64 unsigned bits")
        if any(v < 0 for v in self.ridge_grid + self.lasso_grid
               + self.enet_lam_grid):
            raise ConfigError("penalty grids must be nonnegative")
        if any(1.0 + v <= 0 for v in self.enet_gamma_grid):
            raise ConfigError("enet gamma grid needs 1 + gamma > 0")
        if Family.BEST_SUBSET.value in self.estimators:
            if self.k > min(self.n, self.p):
                raise ConfigError("best-subset needs k <= min(n, p)")
            worst_nodes = sum(math.comb(self.p, t) for t in range(1, self.k))
            if math.comb(self.p, self.k) > _FEASIBLE_EXHAUSTIVE \
                    and worst_nodes > self.bss_budget:
                raise ConfigError(
                    f"best-subset infeasible: C({self.p},{self.k}) > "
                    f"{_FEASIBLE_EXHAUSTIVE} and worst-case search needs "
                    f"{worst_nodes} nodes > budget {self.bss_budget}")
        return self

    @property
    def pilot_trials(self) -> int:
        return max(2, math.ceil(self.pilot_fraction * self.trials))


# -- flat key = value config files (TOML-compatible subset) ------------------

def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, str):
        return '"%s"' % v.replace("\\", "\\\\").replace('"', '\\"')
    if isinstance(v, tuple):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise TypeError(f"unsupported config value {v!r}")


def config_to_toml(config: SweepConfig) -> str:
    """Serialize to a flat key = value file; parse(serialize(c)) == c."""
    lines = [f"{f.name} = {_toml_value(getattr(config, f.name))}"
             for f in fields(config)]
    return "\n".join(lines) + "\n"


def config_from_toml(text: str) -> SweepConfig:
    try:
        import tomllib  # Python >= 3.11
    except ModuleNotFoundError:
        import tomli as tomllib
    try:
        data = tomllib.loads(text)
    except Exception as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    names = {f.name for f in fields(SweepConfig)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    for key in ("inv_snr_grid", "estimators"):
        if key in data:
            data[key] = tuple(data[key])
    try:
        return SweepConfig(**data).validate()
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> SweepConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_toml(fh.read())


@dataclass(frozen=True)
class TrialRecord:
    estimator: str
    inv_snr: float
    trial_id: int
    scaled_mse: float
    unscaled_mse: float
    tuning: Tuning | None
    wall_time: float
    status: str = "ok"


@dataclass(frozen=True)
class CellStats:
    estimator: str
    inv_snr: float
    mean_scaled_mse: float
    se_scaled_mse: float
    trials: int
    se_defined: bool


@dataclass(frozen=True)
class SweepResult:
    config: SweepConfig
    cells: tuple
    records: tuple
    tunings: dict = field(default_factory=dict)
    curves: tuple = ()


def _make_dataset(config: SweepConfig, sigma: float, stream: RngStream) -> Dataset:
    space = ParamSpace(k=config.k, tau=config.tau,
                       sigma=sigma if sigma > 0 else 1.0)
    return Dataset.generate(config.n, config.p, space, stream, sigma=sigma)


def _formula_tuning(config: SweepConfig, family: Family, sigma: float) -> Tuning:
    if family is Family.BEST_SUBSET:
        return Tuning(Family.BEST_SUBSET, k=config.k,
                      provenance=Provenance.PAPER_FORMULA)
    if family is Family.ZERO:
        return Tuning(Family.ZERO, provenance=Provenance.PAPER_FORMULA)
    space = ParamSpace(k=config.k, tau=config.tau, sigma=sigma)
    if family is Family.RIDGE:
        return ridge_default_lambda(config.p, space)
    if family is Family.LASSO:
        return lasso_default_lambda(config.p, config.k, sigma)
    return enet_default_tuning(config.p, space)


def _family_grid(config: SweepConfig, family: Family, sigma: float) -> list:
    """Explicit per-family grid from the config, or the centered default."""
    og = Provenance.ORACLE_GRID
    if family is Family.RIDGE and config.ridge_grid:
        return [Tuning(family, lam=v, provenance=og) for v in config.ridge_grid]
    if family is Family.LASSO and config.lasso_grid:
        return [Tuning(family, lam=v, provenance=og) for v in config.lasso_grid]
    if family is Family.ELASTIC_NET and (config.enet_lam_grid
                                         or config.enet_gamma_grid):
        lams = config.enet_lam_grid or tuple(
            t.lam for t in default_grid(family, config.p, config.k,
                                        config.tau, sigma))
        gammas = config.enet_gamma_grid or tuple(
            sorted({t.gamma for t in default_grid(family, config.p, config.k,
                                                  config.tau, sigma)}))
        return [Tuning(family, lam=l, gamma=gm, provenance=og)
                for l in sorted(set(lams)) for gm in gammas]
    return default_grid(family, config.p, config.k, config.tau, sigma,
                        size=config.grid_size)


def _grid_index(config: SweepConfig, inv_snr: float) -> int:
    for i, v in enumerate(config.inv_snr_grid):
        if v == inv_snr:
            return i
    raise ConfigError(f"inv_snr={inv_snr} is not on the configured grid")


def run_trial(config: SweepConfig, inv_snr: float, trial_id: int,
              tunings: dict | None = None) -> list:
    """Fit every enabled estimator on one fresh dataset.

    The dataset comes from the evaluation stream keyed by (grid index of
    ``inv_snr``, ``trial_id``); reruns are bit-identical.  Estimator
    failures (for example a closed-form tuning outside its regime) are
    recorded in the ``status`` field instead of aborting.
    """
    g = _grid_index(config, inv_snr)
    sigma = config.tau * float(inv_snr)
    root = RngStream(config.master_seed)
    ds = _make_dataset(config, sigma, root.child(_EVAL_STREAM, g, trial_id))
    beta = ds.beta.to_dense()
    records = []
    for name in config.estimators:
        family = Family(name)
        tuning = None
        status = "ok"
        try:
            if tunings is not None and name in tunings:
                tuning = tunings[name]
                if tuning is None:
                    raise RegimeMismatchError("no valid tuning for this grid point")
            else:
                # standalone calls fall back to the closed-form tunings
                tuning = _formula_tuning(config, family, sigma)
            est = estimator_for(tuning, lasso_tol=config.lasso_tol,
                                lasso_max_iter=config.lasso_max_iter,
                                bss_budget=config.bss_budget)
            t0 = time.perf_counter()
            est.fit(ds.X, ds.y)
            wall = time.perf_counter() - t0
            estimate = est.estimate_
            if estimate.certificate is Certificate.HEURISTIC_ONLY:
                status = "uncertified"
            d = est.coef_ - beta
            unscaled = float(d @ d)
            scaled = scaled_error(est.coef_, beta)
        except Exception as exc:  # recorded, never fatal to the sweep
            records.append(TrialRecord(name, float(inv_snr), trial_id,
                                       math.nan, math.nan, tuning, 0.0,
                                       status=f"error: {exc}"))
            continue
        records.append(TrialRecord(name, float(inv_snr), trial_id,
                                   scaled, unscaled, tuning, wall, status=status))
    return records


def _resolve_tunings(config: SweepConfig) -> dict:
    """Per (grid index, family) tunings; None marks an unavailable point."""
    root = RngStream(config.master_seed)
    out = {}
    for g, inv_snr in enumerate(config.inv_snr_grid):
        sigma = config.tau * inv_snr
        per_family = {}
        pilot = None
        for name in config.estimators:
            family = Family(name)
            if config.tuning_mode == "PaperFormula" \
                    or family in (Family.BEST_SUBSET, Family.ZERO):
                try:
                    per_family[name] = _formula_tuning(config, family, sigma)
                except RegimeMismatchError:
                    per_family[name] = None
                continue
            if pilot is None:
                pilot = [_make_dataset(config, sigma,
                                       root.child(_PILOT_STREAM, g, t))
                         for t in range(config.pilot_trials)]
            grid = _family_grid(config, family, sigma)
            # pilot risk estimates are insensitive to the solver tolerance
            # at this level, and the loose tolerance keeps full paths cheap
            per_family[name] = oracle_tune(
                family, pilot, grid,
                lasso_tol=max(config.lasso_tol, config.pilot_lasso_tol),
                lasso_max_iter=config.lasso_max_iter,
                bss_budget=config.bss_budget)
        out[g] = per_family
    return out


def run_sweep(config: SweepConfig, threads: int = 1) -> SweepResult:
    """Run the full sweep; deterministic for any ``threads`` >= 1.

    Oracle tuning is fit on pilot datasets drawn from streams disjoint
    from the evaluation streams; the evaluation records are aggregated
    in (estimator, inv_snr, trial) order with a pairwise reduction, so
    the result is invariant to worker scheduling.
    """
    config = config.validate()
    threads = max(1, int(threads))
    # Pilot and evaluation stream ids differ in their first component.
    assert _EVAL_STREAM != _PILOT_STREAM
    tunings = _resolve_tunings(config)

    tasks = [(g, inv, t) for g, inv in enumerate(config.inv_snr_grid)
             for t in range(config.trials)]

    def _work(task):
        g, inv, t = task
        return run_trial(config, inv, t, tunings=tunings[g])

    if threads == 1:
        chunks = [_work(task) for task in tasks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(_work, tasks))

    records = tuple(rec for chunk in chunks for rec in chunk)
    cells = aggregate(records)
    curves = tuple(risk_curves(config.p, config.k, config.tau,
                               config.inv_snr_grid))
    return SweepResult(config=config, cells=cells, records=records,
                       tunings=tunings, curves=curves)


def aggregate(records) -> tuple:
    """Per-cell mean and standard error over the usable records.

    Records are sorted by (estimator, inv_snr, trial) first, so the
    pairwise numpy reduction gives one canonical floating-point answer
    independent of production order.
    """
    by_cell: dict = {}
    for rec in sorted(records, key=lambda r: (r.estimator, r.inv_snr, r.trial_id)):
        if rec.status in ("ok",) and math.isfinite(rec.scaled_mse):
            by_cell.setdefault((rec.estimator, rec.inv_snr), []).append(rec.scaled_mse)
        else:
            by_cell.setdefault((rec.estimator, rec.inv_snr), [])
    cells = []
    for (name, inv), vals in sorted(by_cell.items()):
        count = len(vals)
        arr = np.asarray(vals)
        if count == 0:
            cells.append(CellStats(name, inv, math.nan, 0.0, 0, False))
        elif count == 1:
            cells.append(CellStats(name, inv, float(arr[0]), 0.0, 1, False))
        else:
            mean = float(np.mean(arr))
            se = float(np.std(arr, ddof=1) / math.sqrt(count))
            cells.append(CellStats(name, inv, mean, se, count, True))
    return tuple(cells)


def _fmt17(x: float) -> str:
    if not math.isfinite(x):
        return "nan"
    return np.format_float_positional(x, precision=17, unique=False,
                                      fractional=False)


def write_csv(result: SweepResult, path) -> None:
    """Canonical CSV: fixed header, rows sorted by (estimator, inv_snr),
    17-significant-digit floats, LF newlines; byte-identical across runs."""
    lines = [CSV_HEADER]
    for cell in sorted(result.cells, key=lambda c: (c.estimator, c.inv_snr)):
        se_txt = _fmt17(cell.se_scaled_mse) if cell.se_defined else "0"
        lines.append(",".join([
            cell.estimator,
            repr(float(cell.inv_snr)),
            _fmt17(cell.mean_scaled_mse),
            se_txt,
            str(cell.trials),
            str(int(result.config.master_seed)),
        ]))
    data = ("\n".join(lines) + "\n").encode("ascii")
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


class CsvSchemaError(ValueError):
    """A CSV file does not follow the sweep-result schema."""

    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = path
        self.line_no = line_no


def read_csv(path):
    """Rows of a sweep CSV as dicts; raises CsvSchemaError with the
    offending line number on any mismatch."""
    try:
        fh = open(path, "r", encoding="ascii", newline="")
    except OSError as exc:
        raise OSError(f"cannot read CSV from {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvSchemaError(path, 1, "empty file") from None
        if header != CSV_HEADER.split(","):
            raise CsvSchemaError(path, 1, f"bad header {header!r}")
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != 6:
                raise CsvSchemaError(path, line_no, f"expected 6 fields, got {len(row)}")
            try:
                rows.append({
                    "estimator": row[0],
                    "inv_snr": float(row[1]),
                    "mean_scaled_mse": float(row[2]),
                    "se_scaled_mse": float(row[3]),
                    "trials": int(row[4]),
                    "master_seed": int(row[5]),
                })
            except ValueError as exc:
                raise CsvSchemaError(path, line_no, str(exc)) from None
    return rows


@dataclass(frozen=True)
class TheoryComparison:
    rows: tuple

    def to_text(self) -> str:
        header = (f"{'estimator':>12} {'1/snr':>8} {'empirical':>12} "
                  f"{'first-order':>12} {'family-theory':>14} {'ratio':>8}")
        lines = [header, "-" * len(header)]
        for r in self.rows:
            lines.append(
                f"{r['estimator']:>12} {r['inv_snr']:>8.3g} "
                f"{r['empirical']:>12.5g} {r['first_order']:>12.5g} "
                f"{r['family_theory']:>14.5g} {r['ratio']:>8.4g}")
        return "\n".join(lines)


def compare_theory(result: SweepResult) -> TheoryComparison:
    """Empirical scaled errors against the theory curves, with ratios.

    All values are normalized by k tau^2 (the scaled error already is,
    because the simulated signals sit exactly on ||beta||^2 = k tau^2).
    The family-theory column holds the curve specific to the estimator:
    the second-order ridge risk, the elastic-net upper bound, and the
    regime-matched first-order risk otherwise.
    """
    from .datamodel import classify_regime
    from .theory import (enet_second_order_bounds, minimax_first_order,
                         ridge_second_order_risk)
    import warnings as _warnings
    from .theory import AsymptoticValidityWarning

    config = result.config
    rows = []
    for cell in sorted(result.cells, key=lambda c: (c.estimator, c.inv_snr)):
        sigma = config.tau * cell.inv_snr
        space = ParamSpace(k=config.k, tau=config.tau, sigma=sigma)
        scale = config.k * config.tau**2
        regime = classify_regime(config.p, space)
        first = minimax_first_order(config.p, space, regime) / scale
        family_theory = first
        with _warnings.catch_warnings():
            _warnings.simplefilter("error", AsymptoticValidityWarning)
            try:
                if cell.estimator == Family.RIDGE.value:
                    family_theory = ridge_second_order_risk(config.p, space) / scale
                elif cell.estimator == Family.ELASTIC_NET.value:
                    family_theory = enet_second_order_bounds(config.p, space)[1] / scale
                elif cell.estimator == Family.ZERO.value:
                    family_theory = 1.0
            except AsymptoticValidityWarning:
                family_theory = first
        ratio = cell.mean_scaled_mse / family_theory if family_theory else math.nan
        rows.append({
            "estimator": cell.estimator,
            "inv_snr": cell.inv_snr,
            "empirical": cell.mean_scaled_mse,
            "se": cell.se_scaled_mse,
            "first_order": first,
            "family_theory": family_theory,
            "ratio": ratio,
        })
    return TheoryComparison(rows=tuple(rows))
