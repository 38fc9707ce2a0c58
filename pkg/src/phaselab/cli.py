"""Command-line front end.

Subcommands map one-to-one to the experiment drivers; every run is a pure
function of its configuration (including the seed), so re-running a
command overwrites byte-identical outputs once the timestamp header is
suppressed with --no-timestamp.

Configuration can come from a flat key-value file (one `key = value` per
line, `#` comments) via --config; command-line flags win over file values.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import experiments, fock_oracle
from .homodyne import (
    GridConfig,
    cramer_rao_bound,
    fisher_information,
    g_peak,
    peak_mass_estimate,
    tabulated_density,
)
from .mle import default_window
from .probe import build_probe, quantum_fisher
from .sampler import SeedSpec, sample

_MODES = {"first-order": "first_order", "first_order": "first_order", "exact": "exact"}

_CONFIG_KEYS = {
    "seed": int,
    "trials": int,
    "nbar": str,  # comma-separated list
    "nu": float,
    "nu_rule": str,
    "m": int,
    "mode": str,
    "phi": float,
    "out": str,
    "workers": int,
    "window": float,
    "grid_half_width": float,
    "grid_step": float,
    "count": int,
    "no_timestamp": lambda v: v.lower() in ("1", "true", "yes"),
}


def parse_config_file(path: str) -> dict:
    """Flat `key = value` pairs; unknown keys are rejected up front."""
    values: dict = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in _CONFIG_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = _CONFIG_KEYS[key](value.strip())
    return values


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key-value configuration file")
    p.add_argument("--seed", type=int, default=None, help="campaign seed (u64)")
    p.add_argument("--trials", type=int, default=None, help="trials per campaign point")
    p.add_argument("--nbar", action="append", type=float, default=None,
                   help="mean photon number; repeat the flag for several values")
    p.add_argument("--nu", type=float, default=None, help="squeezed-component weight")
    p.add_argument("--nu-rule", choices=["constant", "reciprocal"], default=None,
                   help="constant nu, or nu = c/nbar with c from --nu")
    p.add_argument("--m", type=int, default=None, help="measurement repetitions per trial")
    p.add_argument("--mode", choices=sorted(_MODES), default=None, help="density family")
    p.add_argument("--phi", type=float, default=None, help="true phase of the run")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--workers", type=int, default=None, help="concurrent trial workers")
    p.add_argument("--window", type=float, default=None, help="ML search half-width override")
    p.add_argument("--grid-half-width", type=float, default=None)
    p.add_argument("--grid-step", type=float, default=None)
    p.add_argument("--count", type=int, default=None, help="draw count for `sample`")
    p.add_argument("--no-timestamp", action="store_true", default=None,
                   help="omit the timestamp header line from CSV outputs")


class RunConfig:
    """Merged file + flag configuration with validated defaults."""

    def __init__(self, args: argparse.Namespace):
        file_values = parse_config_file(args.config) if args.config else {}

        def pick(name, default):
            flag = getattr(args, name, None)
            if flag is not None:
                return flag
            return file_values.get(name, default)

        self.seed = int(pick("seed", experiments.DEFAULT_SEED))
        self.trials = int(pick("trials", experiments.DEFAULT_TRIALS))
        nbar = pick("nbar", None)
        if isinstance(nbar, str):
            nbar = [float(v) for v in nbar.split(",") if v.strip()]
        self.nbars = [float(v) for v in nbar] if nbar else [1.0, 2.0, 3.0, 4.0, 5.0]
        self.nu = float(pick("nu", 0.05))
        # command-specific default: bound tables use a fixed nu, scaling
        # studies the reciprocal rule
        rule = pick("nu_rule", None)
        self.nu_rule = str(rule) if rule is not None else None
        self.m = int(pick("m", 1))
        mode = str(pick("mode", "first-order"))
        if mode not in _MODES:
            raise ValueError(f"unknown mode {mode!r}")
        self.mode = _MODES[mode]
        self.phi = float(pick("phi", 0.0))
        self.out = Path(pick("out", "."))
        self.workers = int(pick("workers", 1))
        self.window = pick("window", None)
        self.timestamp = not bool(pick("no_timestamp", False))
        self.count = int(pick("count", 10_000))
        half = pick("grid_half_width", None)
        step = pick("grid_step", None)
        grid = GridConfig()
        if half is not None:
            grid = GridConfig(half_width=float(half), max_step=grid.max_step,
                              peak_oversample=grid.peak_oversample)
        if step is not None:
            grid = GridConfig(half_width=grid.half_width, max_step=float(step),
                              peak_oversample=grid.peak_oversample)
        self.grid = grid
        if self.trials < 10:
            raise ValueError("trials must be >= 10")
        if not 0.0 < self.nu <= 1.0:
            raise ValueError("nu must lie in (0, 1]")
        if any(v <= 0 for v in self.nbars):
            raise ValueError("nbar values must be > 0")

    def out_path(self, name: str) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        return self.out / name


def _campaign_config(cfg: RunConfig, nbar: float, seed_offset: int = 0) -> experiments.CampaignConfig:
    return experiments.CampaignConfig(
        nbar=nbar,
        nu_rule=experiments.NuRule(cfg.nu_rule or "constant", cfg.nu),
        m=cfg.m,
        phi_true=cfg.phi,
        trials=cfg.trials,
        mode=cfg.mode,
        campaign_seed=cfg.seed + seed_offset,
        window=cfg.window,
        grid=cfg.grid,
        workers=cfg.workers,
    )


def cmd_table1(cfg: RunConfig) -> int:
    rows = [experiments.run_campaign(_campaign_config(cfg, nbar, i)) for i, nbar in enumerate(cfg.nbars)]
    experiments.write_table_csv(cfg.out_path("table1.csv"), rows, timestamp=cfg.timestamp)
    print(f"{'nbar':>6} {'nu':>8} {'mean':>12} {'rmse':>10} {'stderr':>10} "
          f"{'1/(2NT)':>10} {'CR bound':>10} {'bnd%':>6}")
    ok = True
    for r in rows:
        print(f"{r.config.nbar:6.2f} {r.nu:8.4g} {r.mean_estimate:+12.3e} {r.rmse:10.5f} "
              f"{r.std_error_of_rmse:10.2e} {r.heisenberg:10.4f} {r.cr_bound:10.4f} "
              f"{100 * r.boundary_fraction:6.2f}")
        if not r.reliable:
            print(f"  !! campaign at nbar={r.config.nbar} unreliable: "
                  f"{100 * r.boundary_fraction:.1f}% of trials at the window boundary")
            ok = False
        if r.rmse >= r.heisenberg:
            ok = False
    print(f"wrote {cfg.out_path('table1.csv')}")
    return 0 if ok else 1


def cmd_scaling(cfg: RunConfig) -> int:
    if len(cfg.nbars) < 3:
        print("error: scaling needs at least 3 --nbar values", file=sys.stderr)
        return 2
    rule = cfg.nu_rule or "reciprocal"
    fit = experiments.scaling_study(
        cfg.nbars, cfg.nu, m=cfg.m, trials=cfg.trials, mode=cfg.mode,
        campaign_seed=cfg.seed, nu_rule_kind=rule, grid=cfg.grid, workers=cfg.workers,
    )
    experiments.write_scaling_csv(cfg.out_path("scaling.csv"), fit, timestamp=cfg.timestamp)
    experiments.write_scaling_fit_json(cfg.out_path("scaling_fit.json"), fit)
    print(f"rmse = ({fit.prefactor:.4f} +- {fit.prefactor_error:.4f}) / "
          f"NT^({fit.exponent:.4f} +- {fit.exponent_error:.4f})   [{rule} nu rule]")
    print(f"weighted fit: prefactor {fit.weighted_prefactor:.4f}, exponent {fit.weighted_exponent:.4f}")
    print(f"wrote {cfg.out_path('scaling.csv')} and {cfg.out_path('scaling_fit.json')}")
    return 0


def cmd_convergence(cfg: RunConfig) -> int:
    nbar = cfg.nbars[0]
    config = _campaign_config(cfg, nbar)
    result = experiments.run_campaign(config)
    points = np.unique(np.geomspace(10, cfg.trials, 25).astype(int))
    checkpoints = [int(c) for c in points if c < cfg.trials] + [cfg.trials]
    trace = experiments.convergence_trace(config, checkpoints, result=result)
    experiments.write_convergence_csv(cfg.out_path("convergence.csv"), trace, timestamp=cfg.timestamp)
    flatness = experiments.trace_flatness(trace)
    print(f"final rmse {trace[-1][1]:.5f}; last-decade flatness {100 * flatness:.2f}%")
    print(f"wrote {cfg.out_path('convergence.csv')}")
    return 0


def cmd_density(cfg: RunConfig) -> int:
    nbar = cfg.nbars[0] if len(cfg.nbars) == 1 else 25.0
    spec = build_probe(nbar, cfg.nu)
    density = tabulated_density(spec, cfg.phi, cfg.mode, cfg.grid)
    density.write_csv(
        cfg.out_path("density.csv"),
        header_comment=None if not cfg.timestamp else
        f"quadrature density nbar={nbar} nu={cfg.nu} phi={cfg.phi} mode={cfg.mode}",
    )
    peak = density.mass_between(-3 * math.sqrt(spec.squeezed.dx2), 3 * math.sqrt(spec.squeezed.dx2))
    print(f"nbar={nbar} nu={cfg.nu} phi={cfg.phi} mode={cfg.mode}")
    print(f"central peak mass (|x| < 3 dX): {peak:.4f}; rough estimate nu/sqrt(nbar) = "
          f"{peak_mass_estimate(spec):.4f}")
    print(f"wrote {cfg.out_path('density.csv')}")
    return 0


def cmd_fisher(cfg: RunConfig) -> int:
    nbar = cfg.nbars[0]
    spec = build_probe(nbar, cfg.nu)
    try:
        fisher = fisher_information(spec, cfg.phi, mode=cfg.mode)
    except Exception as exc:  # quadrature failure carries diagnostics
        print(f"error: {exc}", file=sys.stderr)
        return 1
    squeezed_ref = spec.squeezed.ybar**2 / spec.squeezed.dx2
    leading = 4.0 * nbar**2 / cfg.nu**2
    qfi = quantum_fisher(spec)
    print(f"nbar={nbar} nu={cfg.nu} phi={cfg.phi} mode={cfg.mode}")
    print(f"F (quadrature)          = {fisher:.6g}")
    print(f"ybar^2/dX^2 (nu=1 ref)  = {squeezed_ref:.6g}")
    print(f"4 nbar^2/nu^2 (leading) = {leading:.6g}")
    print(f"quantum Fisher info     = {qfi:.6g}")
    print(f"Cramer-Rao (m={cfg.m})      = {cramer_rao_bound(fisher, cfg.m):.6g}")
    print(f"g(0) = {g_peak(spec):.6g}, default window = {default_window(spec):.6g}")
    return 0


def cmd_sample(cfg: RunConfig) -> int:
    nbar = cfg.nbars[0]
    spec = build_probe(nbar, cfg.nu)
    density = tabulated_density(spec, cfg.phi, cfg.mode, cfg.grid)
    xs = sample(density, SeedSpec(cfg.seed, 0, 0), cfg.count)
    path = cfg.out_path("samples.csv")
    with open(path, "w", encoding="utf-8") as fh:
        if cfg.timestamp:
            import datetime

            stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
            fh.write(f"# generated {stamp}\n")
        fh.write("x\n")
        for v in xs:
            fh.write(f"{v:.17g}\n")
    print(f"{cfg.count} draws: mean {xs.mean():+.5f}, var {xs.var():.5f}")
    print(f"wrote {path}")
    return 0


def cmd_validate(cfg: RunConfig) -> int:
    print("number-basis oracle cross-checks:")
    results = fock_oracle.run_validation_battery(verbose=True)
    failed = [name for name, ok, _ in results if not ok]
    if failed:
        print(f"FAILED: {', '.join(failed)}")
        return 1
    print(f"all {len(results)} checks passed")
    return 0


_COMMANDS = {
    "table1": cmd_table1,
    "scaling": cmd_scaling,
    "convergence": cmd_convergence,
    "density": cmd_density,
    "fisher": cmd_fisher,
    "sample": cmd_sample,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phaselab",
        description="Monte Carlo laboratory for single-shot homodyne phase estimation",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "table1": "uncertainty-vs-bounds table over photon budgets",
        "scaling": "power-law fit of rmse against the total photon number",
        "convergence": "rmse as a function of the number of Monte Carlo trials",
        "density": "tabulate the quadrature distribution (density.csv)",
        "fisher": "Fisher information at the working point vs analytic references",
        "sample": "draw homodyne outcomes (samples.csv)",
        "validate": "run the number-basis oracle cross-check battery",
    }
    for name, fn in _COMMANDS.items():
        p = sub.add_parser(name, help=helps[name])
        _add_common(p)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(args)
    except (ValueError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](cfg)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
