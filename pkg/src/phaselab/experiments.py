"""Monte Carlo campaigns: single-point uncertainty runs, convergence
traces, scaling studies with power-law fits, and bound-comparison tables.

Each trial owns a counter-based random stream addressed by
(campaign_seed, trial_index), so campaigns are bit-reproducible under any
scheduling; aggregation uses exactly-rounded summation (math.fsum) and is
therefore independent of chunking as well.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .homodyne import DEFAULT_GRID, GridConfig, Mode, _check_mode, tabulated_density
from .mle import default_scan_step, default_window, estimate_batch
from .probe import ProbeSpec, build_probe
from .sampler import SeedSpec, sample

DEFAULT_TRIALS = 100_000
DEFAULT_SEED = 0xA1B2C3D4

BOUNDARY_RELIABLE_MAX = 0.05


@dataclass(frozen=True)
class NuRule:
    """How the squeezed weight depends on the photon budget: either a
    constant nu, or nu = c / nbar ("reciprocal")."""

    kind: Literal["constant", "reciprocal"]
    value: float

    def __post_init__(self) -> None:
        if self.kind not in ("constant", "reciprocal"):
            raise ValueError(f"unknown nu rule {self.kind!r}")
        if self.value <= 0.0:
            raise ValueError(f"nu rule constant must be > 0, got {self.value}")

    def nu_for(self, nbar: float) -> float:
        return self.value if self.kind == "constant" else self.value / nbar


@dataclass(frozen=True)
class CampaignConfig:
    nbar: float
    nu_rule: NuRule
    m: int = 1
    phi_true: float = 0.0
    trials: int = DEFAULT_TRIALS
    mode: Mode = "first_order"
    campaign_seed: int = DEFAULT_SEED
    window: float | None = None
    scan_step: float | None = None
    grid: GridConfig = field(default_factory=GridConfig)
    workers: int = 1

    def __post_init__(self) -> None:
        _check_mode(self.mode)
        if self.trials < 10:
            raise ValueError(f"trials must be >= 10, got {self.trials}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.nbar <= 0.0:
            raise ValueError(f"nbar must be > 0, got {self.nbar}")

    def build_probe(self) -> ProbeSpec:
        return build_probe(self.nbar, self.nu_rule.nu_for(self.nbar))


@dataclass(frozen=True)
class CampaignResult:
    """Aggregates of one campaign.  mse/rmse are centered on the sample
    mean; the phi_true-centered variants are also reported.  heisenberg is
    1/(2 m nbar), cr_bound the analytic floor nu/(2 sqrt(m) nbar)."""

    config: CampaignConfig
    nu: float
    mean_estimate: float
    mse: float
    rmse: float
    std_error_of_rmse: float
    mse_about_true: float
    rmse_about_true: float
    heisenberg: float
    cr_bound: float
    boundary_fraction: float
    phi_hats: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        self.phi_hats.setflags(write=False)

    @property
    def reliable(self) -> bool:
        return self.boundary_fraction <= BOUNDARY_RELIABLE_MAX

    @property
    def mean_std_error(self) -> float:
        return math.sqrt(self.mse / self.phi_hats.size)


def _draw_outcomes(config: CampaignConfig, spec: ProbeSpec) -> np.ndarray:
    density = tabulated_density(spec, config.phi_true, config.mode, config.grid)
    out = np.empty((config.trials, config.m))
    for t in range(config.trials):
        out[t] = sample(density, SeedSpec(config.campaign_seed, t, 0), config.m)
    return out


def _estimate_chunk(args) -> np.ndarray:
    outcomes, spec, mode, window, scan_step = args
    phi_hats, flags = estimate_batch(outcomes, spec, mode=mode, window=window, scan_step=scan_step)
    return np.stack([phi_hats, flags.astype(float)])


def _run_trials(config: CampaignConfig, spec: ProbeSpec) -> tuple[np.ndarray, np.ndarray]:
    outcomes = _draw_outcomes(config, spec)
    window = config.window if config.window is not None else default_window(spec, config.grid.half_width)
    scan_step = config.scan_step if config.scan_step is not None else default_scan_step(spec)
    if config.workers <= 1:
        phi_hats, flags = estimate_batch(
            outcomes, spec, mode=config.mode, window=window, scan_step=scan_step
        )
        return phi_hats, flags
    n_chunks = min(config.workers * 4, config.trials)
    bounds = np.linspace(0, config.trials, n_chunks + 1).astype(int)
    jobs = [
        (outcomes[lo:hi], spec, config.mode, window, scan_step)
        for lo, hi in zip(bounds[:-1], bounds[1:])
        if hi > lo
    ]
    with ProcessPoolExecutor(max_workers=config.workers) as pool:
        parts = list(pool.map(_estimate_chunk, jobs))
    stacked = np.concatenate(parts, axis=1)
    return stacked[0], stacked[1].astype(bool)


def _mse_about(values: np.ndarray, center: float) -> float:
    return math.fsum(((values - center) ** 2).tolist()) / values.size


def jackknife_rmse_stderr(phi_hats: np.ndarray) -> float:
    """Delete-one jackknife standard error of the mean-centered rmse."""
    n = phi_hats.size
    if n < 2:
        return float("nan")
    mean = math.fsum(phi_hats.tolist()) / n
    dev2 = (phi_hats - mean) ** 2
    ss = math.fsum(dev2.tolist())
    # sum of squared deviations about the delete-one mean, in closed form
    ss_i = ss - dev2 * n / (n - 1.0)
    rmse_i = np.sqrt(np.maximum(ss_i, 0.0) / (n - 1.0))
    rbar = rmse_i.mean()
    return float(math.sqrt((n - 1.0) / n * math.fsum(((rmse_i - rbar) ** 2).tolist())))


def run_campaign(config: CampaignConfig) -> CampaignResult:
    """Run `trials` independent trials (sample m outcomes, ML-estimate) and
    aggregate.  Deterministic given config.campaign_seed."""
    spec = config.build_probe()
    phi_hats, flags = _run_trials(config, spec)
    n = phi_hats.size
    mean = math.fsum(phi_hats.tolist()) / n
    mse = _mse_about(phi_hats, mean)
    mse_true = _mse_about(phi_hats, config.phi_true)
    return CampaignResult(
        config=config,
        nu=spec.nu,
        mean_estimate=mean,
        mse=mse,
        rmse=math.sqrt(mse),
        std_error_of_rmse=jackknife_rmse_stderr(phi_hats),
        mse_about_true=mse_true,
        rmse_about_true=math.sqrt(mse_true),
        heisenberg=1.0 / (2.0 * config.m * config.nbar),
        cr_bound=spec.nu / (2.0 * math.sqrt(config.m) * config.nbar),
        boundary_fraction=float(np.mean(flags)),
        phi_hats=phi_hats,
    )


def convergence_trace(
    config: CampaignConfig, checkpoints: Sequence[int], result: CampaignResult | None = None
) -> list[tuple[int, float]]:
    """Mean-centered rmse on growing prefixes of the trial stream.

    Checkpoints must be increasing and end at config.trials, so the last
    entry reproduces run_campaign's rmse.  Pass a precomputed result to
    reuse its trial stream.
    """
    checkpoints = list(checkpoints)
    if any(b <= a for a, b in zip(checkpoints, checkpoints[1:])):
        raise ValueError("checkpoints must be strictly increasing")
    if not checkpoints or checkpoints[-1] != config.trials:
        raise ValueError("the last checkpoint must equal config.trials")
    if any(c < 2 for c in checkpoints):
        raise ValueError("checkpoints must be >= 2")
    if result is None:
        result = run_campaign(config)
    cum = np.cumsum(result.phi_hats)
    cum2 = np.cumsum(result.phi_hats**2)
    out = []
    for c in checkpoints:
        mean = cum[c - 1] / c
        out.append((c, math.sqrt(max(cum2[c - 1] / c - mean * mean, 0.0))))
    return out


def trace_flatness(trace: Sequence[tuple[int, float]]) -> float:
    """Max relative deviation from the final rmse over the last decade of
    trials (the Fig.-2-style statistical-saturation check)."""
    n_final, rmse_final = trace[-1]
    lo = n_final / 10.0
    devs = [abs(r - rmse_final) / rmse_final for n, r in trace if n >= lo]
    return max(devs) if devs else 0.0


@dataclass(frozen=True)
class ScalingFit:
    """Power-law fit rmse = prefactor / NT^exponent on log-log axes.

    The primary fit is unweighted least squares (parameter errors from the
    regression covariance); a variance-weighted fit is reported alongside.
    """

    prefactor: float
    prefactor_error: float
    exponent: float
    exponent_error: float
    points: tuple[tuple[float, float, float], ...]  # (nbar, rmse, rmse_stderr)
    m: int
    weighted_prefactor: float
    weighted_exponent: float


def _loglog_fit(nt: np.ndarray, rmse: np.ndarray, weights: np.ndarray | None):
    x = np.log(nt)
    y = np.log(rmse)
    w = np.ones_like(x) if weights is None else weights
    design = np.vstack([np.ones_like(x), x]).T
    wd = design * w[:, None]
    coef, *_ = np.linalg.lstsq(wd, y * w, rcond=None)
    resid = y - design @ coef
    dof = max(1, x.size - 2)
    sigma2 = float(np.sum(w * w * resid * resid)) / dof
    cov = sigma2 * np.linalg.inv(wd.T @ wd)
    return coef, np.sqrt(np.diag(cov))


def scaling_study(
    nbars: Sequence[float],
    c: float,
    m: int = 1,
    trials: int = DEFAULT_TRIALS,
    mode: Mode = "first_order",
    campaign_seed: int = DEFAULT_SEED,
    nu_rule_kind: Literal["constant", "reciprocal"] = "reciprocal",
    grid: GridConfig = DEFAULT_GRID,
    workers: int = 1,
) -> ScalingFit:
    """Campaigns over nbar with nu = c/nbar (or constant c), followed by a
    least-squares fit of log rmse against log NT, NT = m nbar."""
    nbars = [float(v) for v in nbars]
    if len(nbars) < 3:
        raise ValueError(f"need at least 3 photon budgets for a fit, got {len(nbars)}")
    if any(v < 1.0 for v in nbars):
        raise ValueError("scaling studies require nbar >= 1")
    rule = NuRule(nu_rule_kind, c)
    points = []
    for i, nbar in enumerate(nbars):
        config = CampaignConfig(
            nbar=nbar,
            nu_rule=rule,
            m=m,
            trials=trials,
            mode=mode,
            campaign_seed=campaign_seed + i,
            grid=grid,
            workers=workers,
        )
        res = run_campaign(config)
        points.append((nbar, res.rmse, res.std_error_of_rmse))

    nt = np.array([m * p[0] for p in points])
    rmse = np.array([p[1] for p in points])
    stderr = np.array([p[2] for p in points])
    coef, err = _loglog_fit(nt, rmse, None)
    # log-space weights: sigma_logy = stderr / rmse
    wcoef, _ = _loglog_fit(nt, rmse, rmse / np.maximum(stderr, 1e-300))
    return ScalingFit(
        prefactor=float(math.exp(coef[0])),
        prefactor_error=float(math.exp(coef[0]) * err[0]),
        exponent=float(-coef[1]),
        exponent_error=float(err[1]),
        points=tuple(points),
        m=m,
        weighted_prefactor=float(math.exp(wcoef[0])),
        weighted_exponent=float(-wcoef[1]),
    )


def bound_table(
    nbars: Sequence[float] = (1.0, 2.0, 3.0, 4.0, 5.0),
    nu: float = 0.05,
    m: int = 1,
    trials: int = DEFAULT_TRIALS,
    mode: Mode = "first_order",
    campaign_seed: int = DEFAULT_SEED,
    grid: GridConfig = DEFAULT_GRID,
    workers: int = 1,
) -> list[CampaignResult]:
    """One campaign per photon budget at fixed nu; rows mirror the
    uncertainty-vs-bounds table (mean, rmse, Heisenberg 1/(2 m nbar), and
    the analytic Cramer-Rao floor)."""
    rule = NuRule("constant", nu)
    results = []
    for i, nbar in enumerate(nbars):
        config = CampaignConfig(
            nbar=float(nbar),
            nu_rule=rule,
            m=m,
            trials=trials,
            mode=mode,
            campaign_seed=campaign_seed + i,
            grid=grid,
            workers=workers,
        )
        results.append(run_campaign(config))
    return results


# ---------------------------------------------------------------------------
# structured outputs


def _open_csv(path, timestamp: bool):
    fh = open(path, "w", encoding="utf-8")
    if timestamp:
        import datetime

        stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
        fh.write(f"# generated {stamp}\n")
    return fh


def write_table_csv(path, rows: Sequence[CampaignResult], timestamp: bool = False) -> None:
    with _open_csv(path, timestamp) as fh:
        fh.write("nbar,mean_estimate,rmse,rmse_stderr,heisenberg,cr_bound\n")
        for r in rows:
            fh.write(
                f"{r.config.nbar:.17g},{r.mean_estimate:.17g},{r.rmse:.17g},"
                f"{r.std_error_of_rmse:.17g},{r.heisenberg:.17g},{r.cr_bound:.17g}\n"
            )


def write_scaling_csv(path, fit: ScalingFit, timestamp: bool = False) -> None:
    with _open_csv(path, timestamp) as fh:
        fh.write("nbar,NT,rmse,stderr\n")
        for nbar, rmse, stderr in fit.points:
            fh.write(f"{nbar:.17g},{fit.m * nbar:.17g},{rmse:.17g},{stderr:.17g}\n")


def write_scaling_fit_json(path, fit: ScalingFit) -> None:
    record = {
        "prefactor": fit.prefactor,
        "prefactor_error": fit.prefactor_error,
        "exponent": fit.exponent,
        "exponent_error": fit.exponent_error,
        "weighted_prefactor": fit.weighted_prefactor,
        "weighted_exponent": fit.weighted_exponent,
        "points": [
            {"nbar": nbar, "NT": fit.m * nbar, "rmse": rmse, "stderr": stderr}
            for nbar, rmse, stderr in fit.points
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_convergence_csv(path, trace: Sequence[tuple[int, float]], timestamp: bool = False) -> None:
    with _open_csv(path, timestamp) as fh:
        fh.write("trials,rmse\n")
        for n, rmse in trace:
            fh.write(f"{n},{rmse:.17g}\n")
