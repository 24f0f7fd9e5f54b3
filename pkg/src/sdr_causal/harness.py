"""Monte Carlo experiment suites.

``concentration`` and ``identifiability`` work in analytic mode: SDRs come
from the exact cause PSD and the drawn filter, with no estimation noise.
``decimation`` and ``whitening`` run the full data pipeline (sample, filter,
estimate PSDs with Welch's method).

Trial ``t`` of repetition ``r`` uses seed ``base_seed + r * trials + t`` for
every ``m`` and ``D``, so sweeps are paired across those axes.
"""

import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from ._validation import check_floor, check_positive_int, next_power_of_two
from .exceptions import ConfigError
from .filters import CoefficientSampler, apply_filter, sample_fir, squared_frequency_response
from .gen_model import CauseSpec, analytic_psd, sample_cause, trial_streams
from .invariance import apply_whitener, fit_whitener
from .resampling import DEFAULT_TRIM_FRACTION, band_constant, decimated_sdr_experiment
from .sdr import (
    Decision,
    decide,
    effect_spectrum,
    forward_backward_bound,
    report_from_spectra,
    sdr_from_spectra,
)
from .spectral import DEFAULT_FLOOR_REL, WelchConfig, estimate_psd_welch

EXPERIMENTS = ("concentration", "identifiability", "fb_product", "decimation", "whitening")

ROW_FIELDS = (
    "experiment", "m", "D", "rep", "trial", "seed", "variant",
    "rho_fwd", "rho_bwd", "product", "cv", "decision_correct", "mode",
)

THREADS_ENV = "SDR_CAUSAL_THREADS"


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    m_values: tuple = (4, 16, 64, 256)
    trials: int = 100
    cause: CauseSpec = CauseSpec.ar1(0.9)
    sampler: CoefficientSampler = CoefficientSampler()
    N: int = 2**16
    D_values: tuple = (1,)
    base_seed: int = 0
    welch: WelchConfig = WelchConfig()
    floor_rel: float = DEFAULT_FLOOR_REL
    grid_size: int = 8192
    repetitions: int = 1
    exponent_spread: float = 0.5
    trim_fraction: float = DEFAULT_TRIM_FRACTION
    confidence: float = 0.95

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        m_values = tuple(int(m) for m in self.m_values)
        if not m_values:
            raise ConfigError("m_values must not be empty")
        for m in m_values:
            check_positive_int(m, "m")
        if list(m_values) != sorted(set(m_values)):
            raise ConfigError(f"m_values must be strictly ascending, got {m_values}")
        D_values = tuple(int(d) for d in self.D_values)
        if not D_values:
            raise ConfigError("D_values must not be empty")
        for d in D_values:
            check_positive_int(d, "D")
        check_positive_int(self.trials, "trials")
        check_positive_int(self.N, "N", minimum=2)
        check_positive_int(self.grid_size, "grid_size", minimum=2)
        check_positive_int(self.repetitions, "repetitions")
        check_floor(self.floor_rel)
        if not 0 < self.confidence < 1:
            raise ConfigError(f"confidence must lie in (0, 1), got {self.confidence}")
        if self.exponent_spread < 0:
            raise ConfigError("exponent_spread must be non-negative")
        if self.experiment in ("decimation", "whitening") and max(m_values) >= self.N:
            raise ConfigError(f"N={self.N} must exceed every filter length")
        object.__setattr__(self, "m_values", m_values)
        object.__setattr__(self, "D_values", D_values)

    def to_json(self):
        return {
            "experiment": self.experiment,
            "m_values": list(self.m_values),
            "trials": self.trials,
            "cause": self.cause.label(),
            "sampler": self.sampler.label,
            "N": self.N,
            "D_values": list(self.D_values),
            "base_seed": self.base_seed,
            "welch": self.welch.to_json(),
            "floor_rel": self.floor_rel,
            "grid_size": self.grid_size,
            "repetitions": self.repetitions,
            "exponent_spread": self.exponent_spread,
            "trim_fraction": self.trim_fraction,
            "confidence": self.confidence,
        }


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    @property
    def summary(self):
        return summarize(self.rows)

    def rows_csv(self):
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=ROW_FIELDS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({k: _fmt(row[k]) for k in ROW_FIELDS})
        return buf.getvalue()

    def summary_json(self):
        return {"config": self.config.to_json(), "groups": self.summary, **self.extras}

    def column(self, name, **where):
        return np.array([r[name] for r in self.select(**where)])

    def select(self, **where):
        return [r for r in self.rows if all(r[k] == v for k, v in where.items())]


def _fmt(value):
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, float):
        return repr(value)
    return value


def thread_count():
    """Worker threads from ``SDR_CAUSAL_THREADS`` (unset or 0 means all cores)."""
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 0:
        raise ConfigError(f"{THREADS_ENV} must be >= 0, got {n}")
    return n or (os.cpu_count() or 1)


def _map(fn, items, n_jobs=None):
    n_jobs = thread_count() if n_jobs is None else n_jobs
    if n_jobs <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, items))


def trial_seed(cfg, trial, rep=0):
    return cfg.base_seed + rep * cfg.trials + trial


def analytic_grid(cfg, m):
    return max(cfg.grid_size, next_power_of_two(16 * m))


@lru_cache(maxsize=64)
def _memo_psd(cause, M):
    return analytic_psd(cause, M)


def _cached_psd(cause, M):
    if cause.kind == "analytic_table":
        return analytic_psd(cause, M)
    return _memo_psd(cause, M)


def _row(cfg, m, D, rep, trial, seed, variant, rho_f, rho_b, cv, mode, decision):
    return {
        "experiment": cfg.experiment,
        "m": m,
        "D": D,
        "rep": rep,
        "trial": trial,
        "seed": seed,
        "variant": variant,
        "rho_fwd": float(rho_f),
        "rho_bwd": float(rho_b),
        "product": float(rho_f * rho_b),
        "cv": float(cv),
        "decision_correct": decision == Decision.X_TO_Y,
        "mode": mode,
    }


def _analytic_trial(cfg, m, trial):
    seed = trial_seed(cfg, trial)
    f = sample_fir(m, cfg.sampler, trial_streams(seed)[1])
    M = analytic_grid(cfg, m)
    S_xx = _cached_psd(cfg.cause, M)
    S_yy = effect_spectrum(S_xx, f)
    rho_f = sdr_from_spectra(S_xx, S_yy, cfg.floor_rel)
    rho_b = sdr_from_spectra(S_yy, S_xx, cfg.floor_rel)
    h2 = squared_frequency_response(f, M).values
    cv = h2.std() / h2.mean()
    return _row(cfg, m, 1, 0, trial, seed, "analytic", rho_f, rho_b, cv, "analytic",
                decide(rho_f, rho_b))


def _run_analytic(cfg, n_jobs):
    jobs = [(m, t) for m in cfg.m_values for t in range(cfg.trials)]
    return _map(lambda job: _analytic_trial(cfg, *job), jobs, n_jobs)


def concentration_bound(cfg, m):
    """Concentration bound on ``|rho - 1|`` at the requested confidence.

    ``eps`` solves ``2 exp(-m^3 eps^2) = 1 - confidence``; the bound is
    ``8 eps max(S_xx) / <S_xx>``.
    """
    S = _cached_psd(cfg.cause, analytic_grid(cfg, m)).values
    eps = float(np.sqrt(np.log(2.0 / (1.0 - cfg.confidence)) / m**3))
    return eps, float(8.0 * eps * S.max() / S.mean())


def run_concentration(cfg, n_jobs=None):
    """Forward SDR spread around one as the filter length grows."""
    _expect(cfg, "concentration")
    result = ExperimentResult(cfg, _run_analytic(cfg, n_jobs))
    bounds = {}
    for m in cfg.m_values:
        eps, bound = concentration_bound(cfg, m)
        bounds[str(m)] = {"eps": eps, "bound": bound}
    result.extras["concentration_bound"] = bounds
    return result


def run_identifiability(cfg, n_jobs=None):
    """Accuracy of the SIC rule and the forward-backward product versus m."""
    _expect(cfg, "identifiability")
    return ExperimentResult(cfg, _run_analytic(cfg, n_jobs))


def run_fb_product(cfg, n_jobs=None):
    """Forward-backward product against its bound for random filters."""
    _expect(cfg, "fb_product")

    def one(job):
        m, t = job
        row = _analytic_trial(cfg, m, t)
        f = sample_fir(m, cfg.sampler, trial_streams(row["seed"])[1])
        return row, forward_backward_bound(f, analytic_grid(cfg, m), cfg.floor_rel).bound

    jobs = [(m, t) for m in cfg.m_values for t in range(cfg.trials)]
    pairs = _map(one, jobs, n_jobs)
    result = ExperimentResult(cfg, [row for row, _ in pairs])
    result.extras["bound_violations"] = int(
        sum(row["product"] > bound + 1e-10 for row, bound in pairs)
    )
    return result


def _decimation_trial(cfg, m, D, trial):
    seed = trial_seed(cfg, trial)
    f = sample_fir(m, cfg.sampler, trial_streams(seed)[1])
    out = decimated_sdr_experiment(cfg.cause, f, D, cfg.N, seed, cfg.welch,
                                   cfg.floor_rel, cfg.trim_fraction)
    rep = out.report
    return _row(cfg, m, D, 0, trial, seed, "decimated", rep.rho_forward, rep.rho_backward,
                out.cv_decimated, "estimated", rep.decision)


def run_decimation(cfg, n_jobs=None):
    """Full estimated pipeline after ideal low-pass and decimation by each D."""
    _expect(cfg, "decimation")
    jobs = [(m, D, t) for m in cfg.m_values for D in cfg.D_values for t in range(cfg.trials)]
    rows = _map(lambda job: _decimation_trial(cfg, *job), jobs, n_jobs)
    result = ExperimentResult(cfg, rows)
    M = max(cfg.grid_size, 16 * max(cfg.D_values))
    M = next_power_of_two(M)
    S = analytic_psd(cfg.cause, M)
    result.extras["K"] = {str(D): band_constant(S, D) for D in cfg.D_values}
    return result


def _whitening_cause(cfg, seed):
    if cfg.cause.kind != "powerlaw":
        return cfg.cause
    rng = np.random.default_rng(trial_streams(seed)[2])
    spread = cfg.exponent_spread
    exponent = cfg.cause.exponent + (rng.uniform(-spread, spread) if spread else 0.0)
    return replace(cfg.cause, exponent=float(exponent))


def _whitening_spectra(cfg, m, rep, trial):
    seed = trial_seed(cfg, trial, rep)
    cause_seed, filter_seed, _ = trial_streams(seed)
    cause = _whitening_cause(cfg, seed)
    f = sample_fir(m, cfg.sampler, filter_seed)
    x_full = sample_cause(cause, cfg.N + m - 1, cause_seed)
    y = apply_filter(f, x_full)
    x = x_full[m - 1:]
    h2 = squared_frequency_response(f, cfg.welch.M).values
    return seed, estimate_psd_welch(x, cfg.welch), estimate_psd_welch(y, cfg.welch), h2.std() / h2.mean()


def run_whitening(cfg, n_jobs=None):
    """SDRs before and after a dataset-wide whitener, paired per seed.

    Each repetition fits one whitener on the x and y spectra of all its
    trials, then re-scores every pair with both spectra whitened.
    """
    _expect(cfg, "whitening")
    rows = []
    for m in cfg.m_values:
        for rep in range(cfg.repetitions):
            spectra = _map(lambda t: _whitening_spectra(cfg, m, rep, t), list(range(cfg.trials)), n_jobs)
            wh = fit_whitener([s for _, sx, sy, _ in spectra for s in (sx, sy)], cfg.floor_rel)
            for variant in ("raw", "whitened"):
                for t, (seed, S_xx, S_yy, cv) in enumerate(spectra):
                    if variant == "whitened":
                        S_xx, S_yy = apply_whitener(wh, S_xx), apply_whitener(wh, S_yy)
                    rep_ = report_from_spectra(S_xx, S_yy, cfg.floor_rel)
                    rows.append(_row(cfg, m, 1, rep, t, seed, variant, rep_.rho_forward,
                                     rep_.rho_backward, cv, "estimated", rep_.decision))
    return ExperimentResult(cfg, rows)


RUNNERS = {
    "concentration": run_concentration,
    "identifiability": run_identifiability,
    "fb_product": run_fb_product,
    "decimation": run_decimation,
    "whitening": run_whitening,
}


def run_experiment(cfg, n_jobs=None):
    return RUNNERS[cfg.experiment](cfg, n_jobs)


def _expect(cfg, name):
    if cfg.experiment != name:
        raise ConfigError(f"config is for {cfg.experiment!r}, not {name!r}")


def _quantiles(values):
    q = np.quantile(values, [0.05, 0.25, 0.5, 0.75, 0.95])
    return dict(zip(("q05", "q25", "median", "q75", "q95"), (float(v) for v in q)))


def summarize(rows):
    """Per-(m, D, variant) statistics, recomputable from the rows alone."""
    groups = {}
    for r in rows:
        groups.setdefault((r["m"], r["D"], r["variant"]), []).append(r)
    out = []
    for (m, D, variant), rs in groups.items():
        rho_f = np.array([r["rho_fwd"] for r in rs])
        product = np.array([r["product"] for r in rs])
        correct = np.array([r["decision_correct"] for r in rs])
        reps = sorted({r["rep"] for r in rs})
        acc_by_rep = [float(np.mean([r["decision_correct"] for r in rs if r["rep"] == k])) for k in reps]
        rho_q = _quantiles(rho_f)
        out.append({
            "m": m,
            "D": D,
            "variant": variant,
            "n": len(rs),
            "accuracy": float(correct.mean()),
            "accuracy_by_rep": acc_by_rep,
            "rho_fwd": rho_q,
            "rho_fwd_iqr": rho_q["q75"] - rho_q["q25"],
            "abs_dev": _quantiles(np.abs(rho_f - 1.0)),
            "product": _quantiles(product),
        })
    return out


def summary_line(group):
    return (
        f"m={group['m']:<4d} D={group['D']:<2d} {group['variant']:<9s} n={group['n']:<5d} "
        f"acc={group['accuracy']:.3f} median|rho-1|={group['abs_dev']['median']:.3g} "
        f"median product={group['product']['median']:.3g}"
    )
