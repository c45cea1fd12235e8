"""Monte Carlo studies: level and power, MSE of the test statistic, rates, normality.

Every replicate draws from its own stream ``(seed, study tag, i, rep)``, so a
report depends only on the configuration, never on scheduling. CSV output has
one row per replicate; the JSON summary embeds the resolved configuration.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field, fields, replace
from functools import partial
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import stats

from .adversarial import PerturbationFamily, PerturbedLaw, sample_theta
from .errors import ConfigError, DeconvError, UnsupportedRegimeError
from .functional import (EstimationSetup, estimate_d, omega_sq, select_estimation_bandwidth,
                         squared_norm)
from .gof import TestSetup, calibrate, decide, l2_distance_sq, select_test_params, test_statistic
from .models import (DensityModel, NoiseModel, Sample, SmoothnessClass, density_from_dict,
                     noise_from_dict, replicate_rng)
from .parallel import run_indexed
from .spectral import DEFAULT_GRID_COUNT, DEFAULT_KERNEL, canonical_kernel

__all__ = [
    "STUDIES",
    "PRESETS",
    "ExperimentConfig",
    "ExperimentReport",
    "preset",
    "load_config",
    "resolve_density",
    "run_experiment",
    "run_level_power",
    "run_mse_study",
    "run_rate_study",
    "run_normality_check",
    "wilson_interval",
    "count_inversions",
]

STUDIES = ("level_power", "mse", "rate", "normality")

# stream tags keep calibration, replicates and bootstrap draws independent
_TAG_CALIBRATION = 0xCA1
_TAG_REPLICATE = 1
_TAG_BOOTSTRAP = 2

CSV_COLUMNS = ("scenario", "study", "i", "n", "rep", "stream", "statistic", "target",
               "threshold", "decision")


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a study needs; JSON round-trips exactly.

    ``null`` and ``alternatives`` drive the testing studies (alternative ``i``
    is ``alternatives[i - 1]``); ``signal`` drives the estimation studies.
    Model entries are descriptor dicts as accepted by
    :func:`resolve_density` and :func:`~deconvgof.models.noise_from_dict`.
    """

    scenario: str
    study: str
    noise: dict
    seed: Optional[int] = None
    null: Optional[dict] = None
    alternatives: tuple = ()
    signal: Optional[dict] = None
    smoothness: Optional[dict] = None
    n: int = 500
    n_ladder: tuple = ()
    N: int = 100
    kernel: str = DEFAULT_KERNEL
    level: float = 0.05
    B: int = 500
    h: Optional[float] = None
    t_n: Optional[float] = None
    grid_count: int = DEFAULT_GRID_COUNT
    n_boot: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "alternatives", tuple(self.alternatives))
        object.__setattr__(self, "n_ladder", tuple(int(n) for n in self.n_ladder))
        if self.study not in STUDIES:
            raise ConfigError(f"field 'study' must be one of {STUDIES} (got {self.study!r})")
        if self.seed is None:
            raise ConfigError("field 'seed' is required: experiments never seed from the clock")
        if self.N < 10:
            raise ConfigError(f"field 'N' must be ≥ 10 (got {self.N})")
        if not 0.0 < self.level < 1.0:
            raise ConfigError(f"field 'level' must be in (0, 1) (got {self.level})")
        canonical_kernel(self.kernel)
        if self.study in ("level_power", "mse"):
            if self.null is None or not self.alternatives:
                raise ConfigError("fields 'null' and 'alternatives' are required for testing studies")
            if self.n < 2:
                raise ConfigError(f"field 'n': n ≥ 2 required (got n = {self.n})")
        else:
            if self.signal is None:
                raise ConfigError("field 'signal' is required for estimation studies")
        if self.study == "rate":
            _check_ladder(self.n_ladder)
        elif self.study == "normality" and self.n < 2:
            raise ConfigError(f"field 'n': n ≥ 2 required (got n = {self.n})")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["alternatives"] = list(self.alternatives)
        d["n_ladder"] = list(self.n_ladder)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config field(s): {', '.join(unknown)}")
        missing = [k for k in ("scenario", "study", "noise") if k not in d]
        if missing:
            raise ConfigError(f"config is missing field {missing[0]!r}")
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def with_overrides(self, **kwargs) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})


def _check_ladder(ladder):
    if len(ladder) < 4:
        raise ConfigError(f"field 'n_ladder' needs ≥ 4 rungs (got {len(ladder)})")
    if min(ladder) < 2:
        raise ConfigError("field 'n_ladder': n ≥ 2 required on every rung")
    ratios = np.diff(np.log(ladder))
    if np.any(ratios <= 0) or np.ptp(ratios) > 1e-9 * max(1.0, float(ratios.mean())):
        raise ConfigError("field 'n_ladder' must be increasing with geometric spacing")


def load_config(text_or_path: str, **overrides) -> ExperimentConfig:
    """Config from inline JSON or a JSON file.

    A summary written by :meth:`ExperimentReport.write_json` is accepted too;
    its embedded ``config`` is used, so any report can be rerun as is.
    Keyword ``overrides`` that are not None replace file fields before
    validation, so a file may leave out e.g. the seed.
    """
    text = text_or_path.strip()
    if not text.startswith("{"):
        try:
            text = Path(text_or_path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {text_or_path!r}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    if "summary" in data and isinstance(data.get("config"), dict):
        data = data["config"]
    data = {**data, **{k: v for k, v in overrides.items() if v is not None}}
    if "preset" in data:
        name = data.pop("preset")
        return preset(name, **data)
    return ExperimentConfig.from_dict(data)


# --------------------------------------------------------------------------
# presets
# --------------------------------------------------------------------------

def _gauss(loc, scale):
    return {"kind": "gaussian", "loc": loc, "scale": scale}


def _lap(k, scale, loc=0.0):
    return {"kind": "laplace_k", "k": k, "scale": scale, "loc": loc}


_SOBOLEV2 = {"tag": "sobolev", "beta": 2.0, "L": 1.0}
_STEPS = [(i - 1) * 0.25 for i in range(1, 9)]


def _presets() -> dict:
    p = {
        "gauss-scale-laplace1": dict(
            null=_gauss(1.0, 1.0), alternatives=[_gauss(1.0, 1.0 + s) for s in _STEPS],
            noise=_lap(1, 1.0), smoothness=_SOBOLEV2),
        "gauss-scale-laplace3": dict(
            null=_gauss(1.0, 1.0), alternatives=[_gauss(1.0, 1.0 + s) for s in _STEPS],
            noise=_lap(3, 1.0), smoothness=_SOBOLEV2),
        "laplace10-scale": dict(
            null=_lap(10, 2.0), alternatives=[_lap(10, 2.0 + s) for s in _STEPS],
            noise=_lap(1, math.sqrt(0.5)), smoothness=_SOBOLEV2),
        "gauss-shift": dict(
            null=_gauss(1.0, 1.0), alternatives=[_gauss(1.0 + s, 1.0) for s in _STEPS],
            noise=_lap(1, math.sqrt(0.5)), smoothness=_SOBOLEV2),
        # one mode against two equal modes drifting apart
        "mixture": dict(
            null=_gauss(1.0, 1.0),
            alternatives=[{"kind": "gaussian_mixture", "weights": [0.5, 0.5],
                           "locs": [1.0 - s, 1.0 + s], "scales": [1.0, 1.0]} for s in _STEPS],
            noise=_lap(1, math.sqrt(0.5)), smoothness=_SOBOLEV2),
        # growing contamination by a wide component: heavier tails, same centre
        "heavy-tail": dict(
            null=_gauss(1.0, 1.0),
            alternatives=[{"kind": "gaussian_mixture", "weights": [1.0 - e, e],
                           "locs": [1.0, 1.0], "scales": [1.0, 3.0]} if e > 0 else _gauss(1.0, 1.0)
                          for e in [0.05 * (i - 1) for i in range(1, 9)]],
            noise=_lap(1, math.sqrt(0.5)), smoothness=_SOBOLEV2),
        # signed bump alternatives around a wide Gaussian
        "perturbation": dict(
            null=_gauss(0.5, 1.0),
            alternatives=[_gauss(0.5, 1.0)] + [
                {"kind": "perturbed", "base": _gauss(0.5, 1.0), "beta": 2.0, "sigma": 2.0,
                 "h": h, "theta_seed": 11} for h in (0.07, 0.08, 0.09, 0.1)],
            noise=_lap(1, 0.5), smoothness=_SOBOLEV2),
        "rate-sobolev": dict(
            study="rate", signal=dict(_lap(10, 2.0), smoothness=_SOBOLEV2), noise=_lap(3, 2.5),
            n_ladder=[500, 1000, 2000, 4000, 8000, 16000], N=200),
        "rate-parametric": dict(
            study="rate", signal=_gauss(0.0, 1.0), noise=_lap(1, 0.5),
            n_ladder=[500, 1000, 2000, 4000, 8000, 16000], N=200),
        "normality": dict(
            study="normality", signal=_gauss(0.0, 1.0), noise=_lap(1, 0.5), n=2000, N=500),
    }
    for key in ("gauss-scale-laplace1", "gauss-scale-laplace3", "laplace10-scale", "gauss-shift",
                "mixture", "heavy-tail", "perturbation"):
        p[key].setdefault("study", "level_power")
    return p


PRESETS = tuple(_presets())
SECTION2_PRESETS = ("gauss-scale-laplace1", "gauss-scale-laplace3", "laplace10-scale", "gauss-shift")


def preset(name: str, **overrides) -> ExperimentConfig:
    """Named scenario; keyword arguments override any field (``seed`` is required)."""
    table = _presets()
    if name not in table:
        raise ConfigError(f"field 'scenario': unknown preset {name!r}; known: {', '.join(table)}")
    spec = dict(table[name])
    spec.update({k: v for k, v in overrides.items() if v is not None})
    spec["scenario"] = overrides.get("scenario") or name
    return ExperimentConfig.from_dict(spec)


# --------------------------------------------------------------------------
# model resolution
# --------------------------------------------------------------------------

def resolve_density(spec: dict, noise: NoiseModel) -> DensityModel:
    """Descriptor to model; ``kind = "perturbed"`` builds a bump-perturbed density."""
    if spec.get("kind") != "perturbed":
        return density_from_dict(spec)
    try:
        base = density_from_dict(spec["base"])
        fam = PerturbationFamily(base, noise, float(spec["beta"]), float(spec["sigma"]),
                                 float(spec["h"]))
        theta = sample_theta(fam.M, int(spec["theta_seed"]))
    except KeyError as exc:
        raise ConfigError(f"perturbed density is missing field {exc.args[0]!r}") from None
    return fam.member(theta)


def _test_setup(cfg: ExperimentConfig, noise: NoiseModel) -> TestSetup:
    f0 = density_from_dict(cfg.null)
    cls = SmoothnessClass.from_dict(cfg.smoothness) if cfg.smoothness else f0.smoothness_class()
    return TestSetup(f0, noise, cls, cfg.level)


def _estimation_setup(cfg: ExperimentConfig, signal: DensityModel, noise: NoiseModel):
    cls = SmoothnessClass.from_dict(cfg.smoothness) if cfg.smoothness else signal.smoothness_class()
    return EstimationSetup(cls, noise.smoothness)


# --------------------------------------------------------------------------
# reports
# --------------------------------------------------------------------------

def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _plain(obj):
    """Convert numpy scalars and tuples so that ``json`` output is canonical."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    return obj


@dataclass
class ExperimentReport:
    """Per-replicate records, aggregates with their uncertainty, runtime."""

    config: ExperimentConfig
    records: list
    summary: dict
    notes: list = field(default_factory=list)
    runtime: float = 0.0

    def csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for rec in self.records:
            writer.writerow([_fmt(rec.get(c)) for c in CSV_COLUMNS])
        return buf.getvalue()

    def write_csv(self, path) -> None:
        Path(path).write_text(self.csv_text(), encoding="utf-8")

    def to_dict(self, include_runtime: bool = True) -> dict:
        d = {"notes": list(self.notes), "config": self.config.to_dict(), "summary": self.summary}
        if include_runtime:
            d["runtime_seconds"] = self.runtime
        return _plain(d)

    def json_text(self, include_runtime: bool = True) -> str:
        return json.dumps(self.to_dict(include_runtime), indent=2, sort_keys=True) + "\n"

    def write_json(self, path) -> None:
        Path(path).write_text(self.json_text(), encoding="utf-8")


def wilson_interval(k: int, n: int, confidence: float = 0.95) -> tuple:
    ci = stats.binomtest(int(k), int(n)).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def count_inversions(values) -> int:
    """Number of adjacent strict decreases."""
    v = np.asarray(values, dtype=float)
    return int(np.sum(np.diff(v) < 0))


def _stream(seed, *index) -> str:
    return ":".join(str(int(x)) for x in (seed,) + index)


# --------------------------------------------------------------------------
# testing studies
# --------------------------------------------------------------------------

def _t_replicate(task, *, alternatives, f0, noise, n, kernel, h, count, seed):
    i, rep = task
    rng = replicate_rng(seed, _TAG_REPLICATE, i, rep)
    f = alternatives[i - 1]
    y = f.sample(n, rng) + noise.sample(n, rng)
    return test_statistic(Sample(y), f0, noise, kernel, h, count)


def _statistic_table(cfg: ExperimentConfig, jobs=None):
    noise = noise_from_dict(cfg.noise)
    setup = _test_setup(cfg, noise)
    alts = [resolve_density(a, noise) for a in cfg.alternatives]
    h0, t0 = select_test_params(setup, cfg.n)
    h = cfg.h if cfg.h is not None else h0
    t_n = cfg.t_n if cfg.t_n is not None else t0
    fn = partial(_t_replicate, alternatives=alts, f0=setup.f0, noise=noise, n=cfg.n,
                 kernel=cfg.kernel, h=h, count=cfg.grid_count, seed=cfg.seed)
    tasks = [(i, rep) for i in range(1, len(alts) + 1) for rep in range(cfg.N)]
    values = np.asarray(run_indexed(fn, tasks, jobs)).reshape(len(alts), cfg.N)
    truths = [_distance_sq(f, setup.f0) for f in alts]
    return setup, alts, h, t_n, values, truths


def _distance_sq(f: DensityModel, f0: DensityModel) -> float:
    law = f.law
    if isinstance(law, PerturbedLaw) and law.base.law == f0.law:
        # oscillatory cf: the lattice form is much cheaper than adaptive quadrature
        return law.separation_sq()
    return l2_distance_sq(f, f0)


def _notes(cfg: ExperimentConfig) -> list:
    return [
        f"level xi = {cfg.level} is a design choice; the threshold constant C* is the "
        f"(1 - xi/2) quantile of |T|/t_n^2 over B = {cfg.B} bootstrap samples from f0 * g",
        "confidence intervals: Wilson 95% for rates, normal 95% for means and MSE, "
        "percentile bootstrap 95% for slopes",
    ]


def run_level_power(cfg: ExperimentConfig, jobs: Optional[int] = None) -> ExperimentReport:
    """Rejection rate of the calibrated test for every alternative; ``i = 1`` is the null."""
    start = time.perf_counter()
    setup, alts, h, t_n, values, truths = _statistic_table(cfg, jobs)
    cal_seed = _calibration_seed(cfg.seed)
    cal = calibrate(setup, cfg.n, cfg.B, cal_seed, cfg.kernel, h, t_n, cfg.grid_count, jobs)
    records, rows = [], []
    for i, row in enumerate(values, start=1):
        decisions = [decide(T, cal.c_star, t_n) for T in row]
        for rep, (T, dec) in enumerate(zip(row, decisions)):
            records.append(dict(scenario=cfg.scenario, study=cfg.study, i=i, n=cfg.n, rep=rep,
                                stream=_stream(cfg.seed, _TAG_REPLICATE, i, rep), statistic=T,
                                target=truths[i - 1], threshold=cal.c_star * t_n ** 2,
                                decision=dec))
        k = int(sum(decisions))
        lo, hi = wilson_interval(k, cfg.N)
        rows.append({"i": i, "distance_sq": truths[i - 1], "rejections": k, "rate": k / cfg.N,
                     "ci": [lo, hi]})
    rates = [r["rate"] for r in rows]
    xi, N = cfg.level, cfg.N
    null_rate = rates[0] if alts and truths[0] == 0.0 else None
    summary = {
        "h": h, "t_n": t_n, "c_star": cal.c_star, "threshold": cal.c_star * t_n ** 2,
        "calibration": {"B": cal.B, "seed": cal.seed, "quantile_level": cal.quantile_level},
        "cell": list(setup.estimation_setup.cell),
        "per_alternative": rows,
        "inversions": count_inversions(rates),
        "level": None if null_rate is None else {
            "rate": null_rate, "ci": rows[0]["ci"],
            "bound": xi + 2.0 * math.sqrt(xi * (1.0 - xi) / N),
            "within_bound": null_rate <= xi + 2.0 * math.sqrt(xi * (1.0 - xi) / N)},
    }
    return ExperimentReport(cfg, records, summary, _notes(cfg), time.perf_counter() - start)


def _calibration_seed(seed: int) -> int:
    return int(np.random.SeedSequence(int(seed), spawn_key=(_TAG_CALIBRATION,)).generate_state(1)[0])


def _mse_summary(T: np.ndarray, truth: float) -> dict:
    sq = (T - truth) ** 2
    mse = float(sq.mean())
    se = float(sq.std(ddof=1) / math.sqrt(sq.size))
    q = np.quantile(sq, [0.0, 0.25, 0.5, 0.75, 1.0])
    return {"distance_sq": truth, "mean_T": float(T.mean()), "mse": mse,
            "ci": [max(mse - 1.96 * se, 0.0), mse + 1.96 * se],
            "sq_error_quartiles": [float(v) for v in q]}


def run_mse_study(cfg: ExperimentConfig, jobs: Optional[int] = None) -> ExperimentReport:
    """MSE of ``T`` against the exact squared distance, per alternative."""
    start = time.perf_counter()
    setup, alts, h, t_n, values, truths = _statistic_table(cfg, jobs)
    records, rows = [], []
    for i, row in enumerate(values, start=1):
        for rep, T in enumerate(row):
            records.append(dict(scenario=cfg.scenario, study=cfg.study, i=i, n=cfg.n, rep=rep,
                                stream=_stream(cfg.seed, _TAG_REPLICATE, i, rep), statistic=T,
                                target=truths[i - 1]))
        rows.append(dict(i=i, **_mse_summary(row, truths[i - 1])))
    mses = [r["mse"] for r in rows]
    summary = {"h": h, "t_n": t_n, "cell": list(setup.estimation_setup.cell),
               "per_alternative": rows, "max_mse": max(mses), "min_mse": min(mses)}
    return ExperimentReport(cfg, records, summary, _notes(cfg)[1:], time.perf_counter() - start)


# --------------------------------------------------------------------------
# estimation studies
# --------------------------------------------------------------------------

def _d_replicate(task, *, signal, noise, kernel, count, seed, bandwidths):
    rung, n, rep = task
    rng = replicate_rng(seed, _TAG_REPLICATE, rung, rep)
    y = signal.sample(n, rng) + noise.sample(n, rng)
    return estimate_d(Sample(y), noise, kernel, h=bandwidths[rung], count=count).d_n


def _estimation_values(cfg, ladder, jobs):
    noise = noise_from_dict(cfg.noise)
    signal = resolve_density(cfg.signal, noise)
    setup = _estimation_setup(cfg, signal, noise)
    bandwidths = {}
    for rung, n in enumerate(ladder):
        try:
            bandwidths[rung] = cfg.h if cfg.h is not None else select_estimation_bandwidth(setup, n)
        except DeconvError as exc:
            raise type(exc)(f"rung {rung} (n = {n}): {exc}") from None
    fn = partial(_d_replicate, signal=signal, noise=noise, kernel=cfg.kernel,
                 count=cfg.grid_count, seed=cfg.seed, bandwidths=bandwidths)
    tasks = [(rung, n, rep) for rung, n in enumerate(ladder) for rep in range(cfg.N)]
    values = np.asarray(run_indexed(fn, tasks, jobs)).reshape(len(ladder), cfg.N)
    return signal, noise, setup, bandwidths, values


def _slope(log_n, log_m):
    return float(np.polyfit(log_n, log_m, 1)[0])


def run_rate_study(cfg: ExperimentConfig, jobs: Optional[int] = None) -> ExperimentReport:
    """Median ``|d_n - d|`` on a geometric ladder and its log-log slope."""
    start = time.perf_counter()
    ladder = list(cfg.n_ladder)
    signal, noise, setup, bandwidths, values = _estimation_values(cfg, ladder, jobs)
    d = squared_norm(signal)
    errors = np.abs(values - d)
    records = []
    for rung, n in enumerate(ladder):
        for rep in range(cfg.N):
            records.append(dict(scenario=cfg.scenario, study=cfg.study, i=rung, n=n, rep=rep,
                                stream=_stream(cfg.seed, _TAG_REPLICATE, rung, rep),
                                statistic=values[rung, rep], target=d))
    medians = np.median(errors, axis=1)
    log_n = np.log(ladder)
    slope = _slope(log_n, np.log(medians))
    rng = replicate_rng(cfg.seed, _TAG_BOOTSTRAP)
    idx = rng.integers(0, cfg.N, size=(cfg.n_boot, len(ladder), cfg.N))
    boot_medians = np.median(np.take_along_axis(errors[None, :, :], idx, axis=2), axis=2)
    boot_slopes = np.array([_slope(log_n, np.log(m)) for m in boot_medians])
    lo, hi = np.quantile(boot_slopes, [0.025, 0.975])
    med_ci = np.quantile(boot_medians, [0.025, 0.975], axis=0)
    if setup.regime == "parametric":
        target = -0.5
    else:
        target = setup.exponents.get("estimation")
    rungs = [{"n": n, "h": bandwidths[r], "median_abs_error": float(medians[r]),
              "ci": [float(med_ci[0, r]), float(med_ci[1, r])]} for r, n in enumerate(ladder)]
    summary = {"d": d, "regime": setup.regime, "cell": list(setup.cell), "rungs": rungs,
               "slope": slope, "slope_ci": [float(lo), float(hi)], "target_slope": target,
               "n_boot": cfg.n_boot}
    return ExperimentReport(cfg, records, summary, _notes(cfg)[1:], time.perf_counter() - start)


def run_normality_check(cfg: ExperimentConfig, jobs: Optional[int] = None) -> ExperimentReport:
    """Standardized ``sqrt(n) (d_n - d) / (2 Omega)`` against ``N(0, 1)``."""
    start = time.perf_counter()
    signal, noise, setup, bandwidths, values = _estimation_values(cfg, [cfg.n], jobs)
    if setup.regime != "parametric":
        raise UnsupportedRegimeError(f"normality check needs a parametric cell (got {setup.cell})")
    d = squared_norm(signal)
    omega = math.sqrt(omega_sq(signal, noise))
    z = math.sqrt(cfg.n) * (values[0] - d) / (2.0 * omega)
    records = [dict(scenario=cfg.scenario, study=cfg.study, i=0, n=cfg.n, rep=rep,
                    stream=_stream(cfg.seed, _TAG_REPLICATE, 0, rep), statistic=values[0, rep],
                    target=d) for rep in range(cfg.N)]
    ks = stats.kstest(z, "norm")
    N = z.size
    mean, var = float(z.mean()), float(z.var(ddof=1))
    half = 1.96 * math.sqrt(var / N)
    var_ci = [(N - 1) * var / stats.chi2.ppf(0.975, N - 1), (N - 1) * var / stats.chi2.ppf(0.025, N - 1)]
    summary = {"d": d, "omega_sq": omega ** 2, "h": bandwidths[0], "cell": list(setup.cell),
               "ks_distance": float(ks.statistic), "ks_pvalue": float(ks.pvalue),
               "mean": mean, "mean_ci": [mean - half, mean + half],
               "variance": var, "variance_ci": [float(v) for v in var_ci]}
    return ExperimentReport(cfg, records, summary, _notes(cfg)[1:], time.perf_counter() - start)


_RUNNERS = {"level_power": run_level_power, "mse": run_mse_study, "rate": run_rate_study,
            "normality": run_normality_check}


def run_experiment(cfg: ExperimentConfig, jobs: Optional[int] = None) -> ExperimentReport:
    return _RUNNERS[cfg.study](cfg, jobs)
