"""Quadrature-X measurement statistics of the phase-shifted probe.

Two density families share one analytic evaluator layer:

* ``first_order`` -- the small-signal model: the vacuum background plus the
  vacuum/squeezed interference term with kernel g(x), truncated at first
  order in the squeezed weight nu.  It can dip below zero in interference
  troughs; tabulations clamp at zero and renormalize, recording both
  corrections.
* ``exact`` -- |mu <x|0> + nu <x|e^{-i phi n}|xi>|^2 built from the exact
  complex-Gaussian amplitude.  Its normalization is exactly one for every
  phi (the vacuum cross term is phase invariant), so it serves as the
  validation reference for the small-signal model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from .gaussian import SqueezedParams, exact_amplitude
from .probe import ProbeSpec

Mode = Literal["first_order", "exact"]

_SQRT_2PI = math.sqrt(2.0 * math.pi)

MODES = ("first_order", "exact")


class DensityGridError(ValueError):
    """Grid support or resolution cannot represent the requested density."""


class QuadratureConvergenceError(RuntimeError):
    """Fisher quadrature failed its refinement checks."""


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def wrap_phase(phi):
    """Reduce phi to (-pi, pi]; the shift exp(-i phi a^dag a) is 2pi-periodic."""
    w = np.mod(np.asarray(phi, dtype=float) + math.pi, 2.0 * math.pi)
    w = np.where(w == 0.0, 2.0 * math.pi, w) - math.pi
    return float(w) if np.ndim(phi) == 0 else w


@dataclass(frozen=True)
class GridConfig:
    """Uniform symmetric quadrature grid.

    The step is min(max_step, dX/peak_oversample) so the narrow central
    feature of width dX = e^{-r} is always resolved.
    """

    half_width: float = 8.0
    max_step: float = 1e-3
    peak_oversample: float = 10.0

    def step_for(self, params: SqueezedParams) -> float:
        return min(self.max_step, math.sqrt(params.dx2) / self.peak_oversample)

    def make(self, params: SqueezedParams) -> np.ndarray:
        step = self.step_for(params)
        n = int(math.ceil(self.half_width / step))
        return np.linspace(-n * step, n * step, 2 * n + 1)


DEFAULT_GRID = GridConfig()


@dataclass(frozen=True)
class TabulatedDensity:
    """Grid-tabulated p(x|phi) with its CDF.

    clamped_mass is the (pre-normalization) probability removed by clamping
    negative small-signal values; norm_correction is the factor the raw
    tabulation was divided by.
    """

    grid: np.ndarray
    pdf: np.ndarray
    cdf: np.ndarray
    phi: float
    mode: str
    probe: ProbeSpec
    clamped_mass: float = 0.0
    norm_correction: float = 1.0

    def __post_init__(self) -> None:
        for arr in (self.grid, self.pdf, self.cdf):
            arr.setflags(write=False)

    @property
    def step(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def mass_between(self, lo: float, hi: float) -> float:
        """Probability of [lo, hi] from the tabulated CDF."""
        clo, chi = np.interp([lo, hi], self.grid, self.cdf)
        return float(chi - clo)

    def write_csv(self, path, header_comment: str | None = None) -> None:
        """Two-column CSV (x, pdf); optional leading comment line."""
        with open(path, "w", encoding="utf-8") as fh:
            if header_comment:
                fh.write(f"# {header_comment}\n")
            fh.write("x,pdf\n")
            for xv, pv in zip(self.grid, self.pdf):
                fh.write(f"{xv:.17g},{pv:.17g}\n")


def g_kernel(spec: ProbeSpec, x: np.ndarray | float) -> np.ndarray | float:
    """Quadratic phase kernel of the interference term,
    g(x) = (x^2 - 2 + 2/dX^2 + ybar^2 - x^2/dX^4)/4; even in x."""
    p = spec.squeezed
    x2 = np.square(x)
    return 0.25 * (x2 - 2.0 + 2.0 / p.dx2 + p.ybar**2 - x2 / p.dx2**2)


def g_peak(spec: ProbeSpec) -> float:
    """g(0), the phase-sensitivity scale at the peak center."""
    return float(g_kernel(spec, 0.0))


# ---------------------------------------------------------------------------
# analytic evaluators (shared with the likelihood layer)


def first_order_values(spec: ProbeSpec, x, phi):
    """Small-signal model density, broadcast over x and phi.

    mu^2 e^{-x^2/2}/sqrt(2pi) plus the interference term
    (2 mu nu / sqrt(dX)) cos[ybar x/2 - phi g(x)]
    exp[-x^2/4 - (x - ybar phi)^2/(4 dX^2)] / sqrt(2pi).
    May be negative in troughs; callers clamp as appropriate.
    """
    p = spec.squeezed
    x = np.asarray(x, dtype=float)
    phi = np.asarray(phi, dtype=float)
    s2 = p.dx2
    background = spec.mu**2 * np.exp(-0.5 * x * x)
    interference = (
        (2.0 * spec.mu * spec.nu / s2**0.25)
        * np.cos(0.5 * p.ybar * x - phi * g_kernel(spec, x))
        * np.exp(-0.25 * x * x - np.square(x - p.ybar * phi) / (4.0 * s2))
    )
    return (background + interference) / _SQRT_2PI


def exact_coefficient_arrays(params: SqueezedParams, phi: np.ndarray):
    """Complex-Gaussian coefficients of the shifted amplitude, vectorized
    over an array of (already wrapped) phase values."""
    phi = np.asarray(phi, dtype=float)
    s2 = params.dx2
    c, s = np.cos(phi), np.sin(phi)
    w = s2 * c + 1j * s
    a2 = -(c + 1j * s2 * s) / (4.0 * w)
    a1 = 1j * params.ybar * s2 / (2.0 * w)
    a0 = (
        -0.25 * math.log(2.0 * math.pi)
        + 0.25 * math.log(s2)
        + 0.5j * phi
        - 0.5 * np.log(w)
        - 1j * params.ybar**2 * s2 * s / (4.0 * w)
    )
    return a2, a1, a0


def exact_values(spec: ProbeSpec, x, phi):
    """Exact density |mu <x|0> + nu <x|e^{-i phi n}|xi>|^2, broadcast over
    x and phi; normalized to one on the real line for every phi."""
    x = np.asarray(x, dtype=float)
    a2, a1, a0 = exact_coefficient_arrays(spec.squeezed, np.asarray(wrap_phase(phi), dtype=float))
    vac = (2.0 * math.pi) ** (-0.25) * np.exp(-0.25 * x * x)
    amp = spec.mu * vac + spec.nu * np.exp(a2 * x * x + a1 * x + a0)
    return np.abs(amp) ** 2


def density_values(spec: ProbeSpec, x, phi, mode: Mode):
    """Dispatch to the chosen analytic family (first_order is clamped at 0)."""
    _check_mode(mode)
    if mode == "first_order":
        return np.maximum(first_order_values(spec, x, phi), 0.0)
    return exact_values(spec, x, phi)


# ---------------------------------------------------------------------------
# tabulation


def _tabulate(spec: ProbeSpec, phi: float, grid_config: GridConfig, mode: Mode) -> TabulatedDensity:
    x = grid_config.make(spec.squeezed)
    step = float(x[1] - x[0])
    if mode == "first_order":
        raw = first_order_values(spec, x, phi)
        pdf = np.maximum(raw, 0.0)
        clamped = float(np.trapezoid(np.maximum(-raw, 0.0), dx=step))
        peak_center = spec.squeezed.ybar * phi
        reach = abs(peak_center) + 10.0 * math.sqrt(spec.squeezed.dx2)
        if reach > grid_config.half_width:
            raise DensityGridError(
                f"peak at ybar*phi = {peak_center:.3g} not contained in "
                f"[-{grid_config.half_width}, {grid_config.half_width}]"
            )
        # Mills-ratio estimate of the unit-variance background tail mass
        outside = 2.0 * float(pdf[0] + pdf[-1]) / grid_config.half_width
        if outside > 1e-6:
            raise DensityGridError(
                f"estimated mass outside the grid is {outside:.3e} (> 1e-6); widen the grid"
            )
    else:
        pdf = exact_values(spec, x, phi)
        clamped = 0.0
        outside = 1.0 - float(np.trapezoid(pdf, dx=step))
        if outside > 1e-6:
            raise DensityGridError(
                f"estimated mass outside the grid is {outside:.3e} (> 1e-6); widen the grid"
            )
    increments = 0.5 * step * (pdf[1:] + pdf[:-1])
    cdf = np.concatenate([[0.0], np.cumsum(increments)])
    z = float(cdf[-1])
    if z <= 0.0:
        raise DensityGridError("tabulated density has no mass on the grid")
    return TabulatedDensity(
        grid=x,
        pdf=pdf / z,
        cdf=cdf / z,
        phi=phi,
        mode=mode,
        probe=spec,
        clamped_mass=clamped,
        norm_correction=z,
    )


def first_order_density(
    spec: ProbeSpec, phi: float, grid_config: GridConfig = DEFAULT_GRID
) -> TabulatedDensity:
    """Tabulate the small-signal density (valid for |phi| <= 0.1, nu <= 0.2),
    clamped at zero and renormalized."""
    if abs(phi) > 0.1:
        raise ValueError(f"first_order density requires |phi| <= 0.1, got {phi}")
    if spec.nu > 0.2:
        raise ValueError(f"first_order density requires nu <= 0.2, got {spec.nu}")
    return _tabulate(spec, phi, grid_config, "first_order")


def exact_density(
    spec: ProbeSpec, phi: float, grid_config: GridConfig = DEFAULT_GRID
) -> TabulatedDensity:
    """Tabulate the exact density at any phi (reduced mod 2pi)."""
    return _tabulate(spec, wrap_phase(phi), grid_config, "exact")


def tabulated_density(
    spec: ProbeSpec, phi: float, mode: Mode, grid_config: GridConfig = DEFAULT_GRID
) -> TabulatedDensity:
    _check_mode(mode)
    if mode == "first_order":
        return first_order_density(spec, phi, grid_config)
    return exact_density(spec, phi, grid_config)


# ---------------------------------------------------------------------------
# Fisher information


@dataclass(frozen=True)
class QuadratureConfig:
    """Controls for the Fisher integral: finite-difference phase step
    (None picks min(1e-5, 0.1/g(0), dX^2/50); the dX^2 term keeps the
    central difference inside the linear regime of the exact density,
    whose peak width turns over on the phase scale dX^2), the relative
    density floor below which the integrand is dropped, refinement
    tolerances, and the grid."""

    phi_step: float | None = None
    floor: float = 1e-12
    refine_tol: float = 0.01
    grid: GridConfig = field(default_factory=GridConfig)


DEFAULT_QUADRATURE = QuadratureConfig()


def _normalized_pdf(spec: ProbeSpec, x: np.ndarray, phi: float, mode: Mode) -> np.ndarray:
    pdf = density_values(spec, x, phi, mode)
    return pdf / np.trapezoid(pdf, x)


def _fisher_on_grid(spec: ProbeSpec, x: np.ndarray, phi: float, delta: float, mode: Mode, floor: float):
    p0 = _normalized_pdf(spec, x, phi, mode)
    dp = (_normalized_pdf(spec, x, phi + delta, mode) - _normalized_pdf(spec, x, phi - delta, mode)) / (
        2.0 * delta
    )
    mask = p0 > floor * p0.max()
    integrand = np.zeros_like(p0)
    integrand[mask] = dp[mask] ** 2 / p0[mask]
    value = math.fsum((0.5 * (integrand[1:] + integrand[:-1]) * np.diff(x)).tolist())
    excluded_mass = float(np.trapezoid(np.where(mask, 0.0, p0), x))
    return value, excluded_mass


def fisher_information(
    spec: ProbeSpec,
    phi: float,
    mode: Mode = "exact",
    quad: QuadratureConfig = DEFAULT_QUADRATURE,
    full_output: bool = False,
):
    """Numerical quadrature of F = int dx [dp/dphi]^2 / p at the working
    point, with dp/dphi by symmetric finite differences.

    Convergence is certified by halving both the grid step and the phase
    step; a relative change above quad.refine_tol raises
    QuadratureConvergenceError with diagnostics.
    """
    _check_mode(mode)
    delta = quad.phi_step
    if delta is None:
        delta = min(1e-5, 0.1 / g_peak(spec), spec.squeezed.dx2 / 50.0)
    x_coarse = quad.grid.make(spec.squeezed)
    fine_cfg = replace(quad.grid, max_step=quad.grid.max_step / 2.0,
                       peak_oversample=quad.grid.peak_oversample * 2.0)
    x_fine = fine_cfg.make(spec.squeezed)

    f_coarse, _ = _fisher_on_grid(spec, x_coarse, phi, delta, mode, quad.floor)
    f_fine, excluded = _fisher_on_grid(spec, x_fine, phi, delta, mode, quad.floor)
    f_half_delta, _ = _fisher_on_grid(spec, x_fine, phi, delta / 2.0, mode, quad.floor)

    grid_change = abs(f_fine - f_coarse) / abs(f_fine) if f_fine else 0.0
    step_change = abs(f_half_delta - f_fine) / abs(f_fine) if f_fine else 0.0
    diagnostics = {
        "value_coarse_grid": f_coarse,
        "value_fine_grid": f_fine,
        "value_half_phi_step": f_half_delta,
        "grid_refinement_change": grid_change,
        "phi_step_refinement_change": step_change,
        "phi_step": delta,
        "excluded_mass": excluded,
    }
    if grid_change > quad.refine_tol or step_change > quad.refine_tol:
        raise QuadratureConvergenceError(
            f"Fisher quadrature not converged: grid change {grid_change:.3e}, "
            f"phi-step change {step_change:.3e} (tol {quad.refine_tol}); {diagnostics}"
        )
    if full_output:
        return f_half_delta, diagnostics
    return f_half_delta


def cramer_rao_bound(fisher: float, m: int) -> float:
    """Uncertainty floor 1/sqrt(m F) for m repetitions."""
    if fisher <= 0.0:
        raise ValueError(f"Fisher information must be > 0, got {fisher}")
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    return 1.0 / math.sqrt(m * fisher)


def peak_mass_estimate(spec: ProbeSpec) -> float:
    """Back-of-envelope probability under the narrow central peak,
    nu / sqrt(nbar); diagnostic only, valid for nu << 1."""
    return spec.nu / math.sqrt(spec.nbar)
