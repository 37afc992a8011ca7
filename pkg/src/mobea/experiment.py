"""Scenario configuration files and the Monte Carlo driver.

A configuration is flat UTF-8 text, one ``key = value`` per line, ``#``
starting a comment. Lists (``doas``) are comma separated.
"""

import csv
import dataclasses
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .array import ArrayConfig, Grid, Scenario, synthesize
from .exceptions import ConfigurationError, MobeaError
from .metrics import avg_source_number, compute_rmse
from .noise import gmm_from_snr, sample_gmm, sample_sas, sas_from_gsnr
from .solver import REFINEMENTS, SolverConfig, run

__all__ = [
    "NOISE_MODELS",
    "SWEEP_PARAMS",
    "CSV_HEADER",
    "ExperimentConfig",
    "TrialRecord",
    "MonteCarloReport",
    "parse_config",
    "load_config",
    "apply_sweep",
    "trial_seeds",
    "build_snapshots",
    "run_trial",
    "run_monte_carlo",
    "run_sweep",
    "sweep_csv",
    "report_json",
    "ablation_modes",
]

NOISE_MODELS = ("none", "gmm", "sas")
SWEEP_PARAMS = ("snr_db", "gsnr_db", "grid_interval", "snapshots", "separation")
CSV_HEADER = ("sweep_param", "value", "rmse", "admitted", "avg_k", "mean_runtime_s")

_SOLVER_KEYS = {f.name for f in dataclasses.fields(SolverConfig)}


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one Monte Carlo point needs besides its seed."""

    num_sensors: int = 8
    spacing: float = 0.5
    grid_interval: float = 2.0
    doas: tuple = (-2.0, 6.0, 20.0)
    snapshots: int = 20
    source_power: float = 1.0
    noise: str = "none"
    snr_db: float = 10.0
    outlier_prob: float = 0.1
    gsnr_db: float = 10.0
    alpha: float = 1.5
    isotropic: bool = False
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.noise not in NOISE_MODELS:
            raise ConfigurationError(
                f"noise must be one of {', '.join(NOISE_MODELS)}, got {self.noise!r}"
            )
        self.scenario()     # validates geometry and sources
        self.noise_model()

    def array(self):
        return ArrayConfig(self.num_sensors, self.spacing)

    def grid(self):
        return Grid.from_interval(self.grid_interval)

    def scenario(self):
        return Scenario(self.array(), self.grid(), tuple(self.doas), self.snapshots,
                        self.source_power)

    def noise_model(self):
        if self.noise == "gmm":
            return gmm_from_snr(self.snr_db, self.source_power, self.outlier_prob)
        if self.noise == "sas":
            return sas_from_gsnr(self.gsnr_db, self.source_power, self.alpha, self.isotropic)
        return None

    def describe(self):
        """Plain dictionary of every setting, solver included."""
        out = {f.name: getattr(self, f.name) for f in dataclasses.fields(self) if f.name != "solver"}
        out["doas"] = list(self.doas)
        out.update(dataclasses.asdict(self.solver))
        return out


def _to_bool(text):
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional(cast):
    def convert(text):
        return None if text.lower() in ("none", "auto", "") else cast(text)
    return convert


_CASTS = {
    "num_sensors": int,
    "spacing": float,
    "grid_interval": float,
    "doas": lambda t: tuple(float(v) for v in t.split(",") if v.strip()),
    "snapshots": int,
    "source_power": float,
    "noise": str.lower,
    "snr_db": float,
    "outlier_prob": float,
    "gsnr_db": float,
    "alpha": float,
    "isotropic": _to_bool,
    "population_size": int,
    "crossover_prob": float,
    "mutation_prob": _optional(float),
    "inner_max": int,
    "inner_patience": int,
    "forward_max": int,
    "step": _optional(float),
    "max_generations": int,
    "tol": float,
    "window": int,
    "refinement": str.lower,
}


def parse_config(text):
    """Build an :class:`ExperimentConfig` from ``key = value`` text.

    Raises
    ------
    ConfigurationError
        On malformed lines, unknown or repeated keys, unparsable values, or
        settings that fail validation.
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip().lower(), value.strip()
        if not sep or not key:
            raise ConfigurationError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if key not in _CASTS:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigurationError(f"line {lineno}: key {key!r} given twice")
        try:
            values[key] = _CASTS[key](value)
        except ValueError as exc:
            raise ConfigurationError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    solver = {k: values.pop(k) for k in list(values) if k in _SOLVER_KEYS}
    try:
        return ExperimentConfig(**values, solver=SolverConfig(**solver))
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(str(exc)) from None


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None


def apply_sweep(config, param, value):
    """Copy of ``config`` with one sweep parameter set.

    ``separation`` keeps the first configured direction and places a second
    source ``value`` degrees above it.
    """
    if param not in SWEEP_PARAMS:
        raise ConfigurationError(
            f"cannot sweep {param!r}; choose from {', '.join(SWEEP_PARAMS)}"
        )
    try:
        if param == "separation":
            d0 = float(config.doas[0])
            return dataclasses.replace(config, doas=(d0, d0 + float(value)))
        if param == "snapshots":
            if float(value) != int(float(value)):
                raise ConfigurationError(f"snapshots must be an integer, got {value}")
            return dataclasses.replace(config, snapshots=int(float(value)))
        return dataclasses.replace(config, **{param: float(value)})
    except ConfigurationError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigurationError(str(exc)) from None


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of one Monte Carlo trial.

    ``estimated_doas`` is ``None`` and ``n_sources`` is 0 when the estimation
    failed; ``error`` then holds the reason.
    """

    index: int
    seed: tuple
    estimated_doas: tuple
    n_sources: int
    runtime_seconds: float
    converged: bool
    generations: int
    failed: bool = False
    error: str = ""

    def to_dict(self):
        out = dataclasses.asdict(self)
        out["seed"] = list(self.seed)
        out["estimated_doas"] = None if self.estimated_doas is None else list(self.estimated_doas)
        return out


@dataclass(frozen=True)
class MonteCarloReport:
    scenario: dict
    trials: tuple
    rmse: float
    avg_source_number: float
    rmse_trial_count: int

    @property
    def mean_runtime(self):
        return float(np.mean([t.runtime_seconds for t in self.trials]))

    def to_dict(self):
        return {
            "scenario": self.scenario,
            "rmse": None if math.isnan(self.rmse) else self.rmse,
            "avg_source_number": self.avg_source_number,
            "rmse_trial_count": self.rmse_trial_count,
            "trials": [t.to_dict() for t in self.trials],
        }


def trial_seeds(base_seed, index):
    """Independent signal, noise and solver seeds for trial ``index``."""
    return np.random.SeedSequence([int(base_seed), int(index)]).spawn(3)


def build_snapshots(config, signal_seed, noise_seed):
    """Noisy snapshot matrix for one trial."""
    scenario = config.scenario()
    Y, _ = synthesize(scenario, signal_seed)
    model = config.noise_model()
    M, T = Y.shape
    if config.noise == "gmm":
        Y = Y + sample_gmm(model, M, T, noise_seed)
    elif config.noise == "sas":
        Y = Y + sample_sas(model, M, T, noise_seed)
    return Y


def run_trial(config, base_seed, index):
    """Run one seeded trial; estimation failures are recorded, not raised."""
    signal_seed, noise_seed, solver_seed = trial_seeds(base_seed, index)
    start = time.perf_counter()
    try:
        Y = build_snapshots(config, signal_seed, noise_seed)
        result = run(Y, config.grid(), config.array(), config.solver, solver_seed)
    except MobeaError as exc:
        return TrialRecord(index, (int(base_seed), int(index)), None, 0,
                           time.perf_counter() - start, False, 0, True, str(exc))
    return TrialRecord(
        index=index,
        seed=(int(base_seed), int(index)),
        estimated_doas=tuple(float(d) for d in result.doas),
        n_sources=int(result.n_sources),
        runtime_seconds=time.perf_counter() - start,
        converged=bool(result.converged),
        generations=int(result.generations),
    )


def _run_trial_args(args):
    return run_trial(*args)


def run_monte_carlo(config, trials, base_seed, workers=1):
    """Run ``trials`` independent trials and aggregate them.

    Parameters
    ----------
    config : ExperimentConfig
    trials : int
    base_seed : int
    workers : int
        Size of the process pool; 1 runs in the calling process. Results do
        not depend on it.

    Returns
    -------
    MonteCarloReport
    """
    trials = int(trials)
    if trials < 1:
        raise ConfigurationError("at least one trial is required")
    if int(workers) < 1:
        raise ConfigurationError("workers must be at least 1")
    jobs = [(config, base_seed, i) for i in range(trials)]
    if workers == 1:
        records = [run_trial(*job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=int(workers)) as pool:
            records = list(pool.map(_run_trial_args, jobs, chunksize=max(1, trials // (4 * workers))))
    records.sort(key=lambda r: r.index)
    ok = [r for r in records if not r.failed]
    rmse, admitted = compute_rmse(ok, config.doas)
    return MonteCarloReport(
        scenario=config.describe(),
        trials=tuple(records),
        rmse=rmse,
        avg_source_number=avg_source_number(records),
        rmse_trial_count=admitted,
    )


def run_sweep(config, param, values, trials, base_seed, workers=1):
    """One report per sweep value, in the given order."""
    return [(param, v, run_monte_carlo(apply_sweep(config, param, v), trials, base_seed, workers))
            for v in values]


def _fmt(x):
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return repr(float(x)) if isinstance(x, float) else str(x)


def sweep_csv(rows, timing=False, mode=None):
    """CSV text for sweep results.

    Parameters
    ----------
    rows : sequence of (param, value, MonteCarloReport)
        With ``mode`` given, each row is ``(mode, param, value, report)``.
    timing : bool
        Fill the runtime column. Off by default so that identical runs give
        identical bytes.
    mode : bool
        Rows carry a leading mode, written to a ``mode`` column.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow((("mode",) if mode else ()) + CSV_HEADER)
    for row in rows:
        lead, (param, value, report) = (row[:1], row[1:]) if mode else ((), row)
        writer.writerow(lead + (
            param,
            _fmt(float(value)),
            _fmt(report.rmse),
            report.rmse_trial_count,
            _fmt(report.avg_source_number),
            _fmt(report.mean_runtime) if timing else "",
        ))
    return buf.getvalue()


def report_json(rows, mode=False):
    """JSON text with every per-trial record of a sweep."""
    out = []
    for row in rows:
        lead, (param, value, report) = (row[0], row[1:]) if mode else (None, row)
        item = {"sweep_param": param, "value": value, **report.to_dict()}
        if mode:
            item = {"mode": lead, **item}
        out.append(item)
    return json.dumps(out, indent=2, sort_keys=True)


def ablation_modes(names):
    """Map short mode names (``forward``, ``on-grid``, ``taylor``) to refinements."""
    aliases = {"forward": "forward-search", "on-grid": "on-grid-only"}
    out = []
    for name in names:
        name = name.strip().lower()
        mode = aliases.get(name, name)
        if mode not in REFINEMENTS:
            raise ConfigurationError(f"unknown refinement mode {name!r}")
        out.append(mode)
    if not out:
        raise ConfigurationError("no refinement modes given")
    return out
