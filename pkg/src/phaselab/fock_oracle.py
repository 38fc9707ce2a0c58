"""Truncated number-basis representation used as independent ground truth.

Everything here is built from operator algebra in the Fock basis (a
three-term recurrence for the state, exact phase factors, index moments,
harmonic-oscillator eigenfunctions for position amplitudes).  None of it
reuses the closed-form Gaussian expressions it is meant to certify, so the
test suite can play the two against each other.  Not used on the Monte
Carlo hot path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gaussian import SqueezedParams

DEFICIT_TARGET = 1e-12
_MAX_CUTOFF = 2_000_000


class TruncationError(ValueError):
    """Requested cutoff leaves too much probability beyond the basis."""


@dataclass(frozen=True)
class FockVector:
    """Number-basis coefficients c_n, n = 0..cutoff, plus the estimated
    probability mass lost to truncation."""

    coefficients: np.ndarray
    norm_deficit: float

    def __post_init__(self) -> None:
        self.coefficients.setflags(write=False)

    @property
    def cutoff(self) -> int:
        return self.coefficients.size - 1


def _raw_recurrence(params: SqueezedParams, cutoff: int) -> np.ndarray:
    # (a cosh r + a^dag sinh r)|psi> = (alpha cosh r + alpha* sinh r)|psi>
    # for |psi> = D(alpha)S(r)|0>, alpha = i ybar / 2, gives
    #   cosh r sqrt(n+1) c_{n+1} = (i ybar/2) e^{-r} c_n - sinh r sqrt(n) c_{n-1}
    # Both solutions of the recurrence contract at the same asymptotic rate
    # (growth-factor product = tanh r < 1), so upward iteration is stable.
    c = np.zeros(cutoff + 1, dtype=complex)
    c[0] = 1.0
    ch = math.cosh(params.r)
    sh = math.sinh(params.r)
    drive = 0.5j * params.ybar * math.exp(-params.r)
    sq = np.sqrt(np.arange(cutoff + 1, dtype=float))
    for n in range(cutoff):
        prev = c[n - 1] if n >= 1 else 0.0
        c[n + 1] = (drive * c[n] - sh * sq[n] * prev) / (ch * sq[n + 1])
    return c


def _tail_estimate(prob: np.ndarray) -> float:
    # geometric extrapolation of |c_n|^2 over the last stretch of the basis
    window = max(8, prob.size // 50)
    head = prob[-2 * window : -window].sum()
    tail = prob[-window:].sum()
    if head <= 0.0:
        return float(tail)
    rho = min(tail / head, 0.999999)
    return float(tail * rho / (1.0 - rho) + tail)


def squeezed_coherent_fock(params: SqueezedParams, cutoff: int | None = None) -> FockVector:
    """Number-basis expansion of D(ybar) S(r) |0>, normalized on the
    truncated basis; c_0 is real positive.

    With cutoff=None the basis grows until the estimated truncated mass
    falls below DEFICIT_TARGET.  An explicit cutoff must satisfy the
    10*nxi + 50 floor and is rejected if it leaves more than 1e-6 outside.
    """
    floor = int(10.0 * params.nxi + 50.0)
    if cutoff is not None:
        if cutoff < floor:
            raise TruncationError(f"cutoff {cutoff} below the {floor} floor for nxi={params.nxi:g}")
        sizes = [cutoff]
    else:
        n = max(floor, 64)
        sizes = []
        while n <= _MAX_CUTOFF:
            sizes.append(n)
            n *= 2

    for n in sizes:
        raw = _raw_recurrence(params, n)
        total = float(np.vdot(raw, raw).real)
        prob = np.abs(raw) ** 2 / total
        deficit = _tail_estimate(prob)
        good = deficit < (DEFICIT_TARGET if cutoff is None else 1e-6)
        if good:
            return FockVector(coefficients=raw / math.sqrt(total), norm_deficit=deficit)
    raise TruncationError(
        f"could not reach norm deficit < {DEFICIT_TARGET:g} for nxi={params.nxi:g} "
        f"(last cutoff {sizes[-1]}, deficit {deficit:.3e})"
    )


def phase_shift_fock(state: FockVector, phi: float) -> FockVector:
    """Apply exp(-i phi a^dag a): c_n -> exp(-i phi n) c_n."""
    n = np.arange(state.coefficients.size)
    return FockVector(
        coefficients=state.coefficients * np.exp(-1j * phi * n),
        norm_deficit=state.norm_deficit,
    )


def fock_moments(state: FockVector) -> tuple[float, float]:
    """Mean and variance of the photon-number distribution |c_n|^2."""
    p = np.abs(state.coefficients) ** 2
    p = p / p.sum()
    n = np.arange(p.size, dtype=float)
    mean = float(p @ n)
    var = float(p @ (n * n)) - mean * mean
    return mean, var


def fock_overlap(a: FockVector, b: FockVector) -> complex:
    """<a|b> on the common truncated basis."""
    n = min(a.coefficients.size, b.coefficients.size)
    return complex(np.vdot(a.coefficients[:n], b.coefficients[:n]))


def hermite_functions(x: np.ndarray, nmax: int) -> np.ndarray:
    """<x|n> for n = 0..nmax in the X = a^dag + a convention, shape
    (nmax+1, len(x)).  Normalized-eigenfunction recurrence; values stay
    O(1) so there is no overflow at large n.
    """
    x = np.asarray(x, dtype=float)
    u = x / math.sqrt(2.0)
    out = np.empty((nmax + 1, x.size))
    out[0] = (2.0 * math.pi) ** (-0.25) * np.exp(-0.25 * x * x)
    if nmax >= 1:
        out[1] = math.sqrt(2.0) * u * out[0]
    for n in range(1, nmax):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * u * out[n] - math.sqrt(n / (n + 1.0)) * out[n - 1]
    return out


def position_amplitudes(state: FockVector, x: np.ndarray) -> np.ndarray:
    """psi(x) = sum_n c_n <x|n> evaluated by accumulation (memory-light)."""
    x = np.asarray(x, dtype=float)
    u = x / math.sqrt(2.0)
    h_prev = (2.0 * math.pi) ** (-0.25) * np.exp(-0.25 * x * x)
    c = state.coefficients
    acc = c[0] * h_prev.astype(complex)
    if c.size == 1:
        return acc
    h = math.sqrt(2.0) * u * h_prev
    acc += c[1] * h
    for n in range(1, c.size - 1):
        h_prev, h = h, math.sqrt(2.0 / (n + 1)) * u * h - math.sqrt(n / (n + 1.0)) * h_prev
        acc += c[n + 1] * h
    return acc


def superpose_with_vacuum(state: FockVector, mu: float, nu: float) -> FockVector:
    """Coefficients of mu|0> + nu|state> (no renormalization applied)."""
    c = nu * state.coefficients.copy()
    c[0] += mu
    return FockVector(coefficients=c, norm_deficit=state.norm_deficit)


# ---------------------------------------------------------------------------
# validation battery (backs the `validate` CLI subcommand)


def run_validation_battery(verbose: bool = True) -> list[tuple[str, bool, str]]:
    """Cross-check the closed-form Gaussian layer against this oracle.

    Returns (name, passed, detail) triples; prints one line per check when
    verbose.  Covers the overlap formula, photon-number moments, exact
    position amplitudes under phase shifts, and probe normalization.
    """
    from .gaussian import exact_amplitude, from_mean_photons, number_moments
    from .probe import build_probe, probe_number_variance, vacuum_overlap

    results: list[tuple[str, bool, str]] = []

    def record(name: str, passed: bool, detail: str) -> None:
        results.append((name, passed, detail))
        if verbose:
            print(f"  [{'PASS' if passed else 'FAIL'}] {name}: {detail}")

    nxi_grid = [1.0, 2.0, 5.0, 10.0, 25.0, 50.0]
    states = {}
    for nxi in nxi_grid:
        params = from_mean_photons(nxi)
        states[nxi] = (params, squeezed_coherent_fock(params))

    worst = 0.0
    for nxi, (params, st) in states.items():
        err = abs(vacuum_overlap(params) - st.coefficients[0].real) / vacuum_overlap(params)
        worst = max(worst, err)
    record("vacuum overlap vs Fock c0 (rel)", worst < 1e-8, f"max rel err {worst:.2e}")

    worst_m = worst_v = 0.0
    for nxi, (params, st) in states.items():
        mean_cf, var_cf = number_moments(params)
        mean_f, var_f = fock_moments(st)
        worst_m = max(worst_m, abs(mean_f - mean_cf) / mean_cf)
        worst_v = max(worst_v, abs(var_f - var_cf) / var_cf)
    record("photon mean vs Fock (rel)", worst_m < 1e-8, f"max rel err {worst_m:.2e}")
    record("photon variance vs Fock (rel)", worst_v < 1e-8, f"max rel err {worst_v:.2e}")

    worst = 0.0
    x = np.arange(-14.0, 14.0, 0.005)
    for nxi, (params, st) in states.items():
        for phi in (0.0, 0.05, -0.1):
            psi_f = position_amplitudes(phase_shift_fock(st, phi), x)
            psi_cf = exact_amplitude(params, phi)(x)
            num = np.trapezoid(np.conj(psi_f) * psi_cf, x)
            den = math.sqrt(
                float(np.trapezoid(np.abs(psi_f) ** 2, x))
                * float(np.trapezoid(np.abs(psi_cf) ** 2, x))
            )
            worst = max(worst, abs(1.0 - abs(num) / den))
    record("shifted amplitude L2 overlap deficit", worst < 1e-6, f"max deficit {worst:.2e}")

    worst = 0.0
    for nxi, (params, st) in states.items():
        shifted = phase_shift_fock(st, 0.3)
        worst = max(
            worst,
            float(np.max(np.abs(np.abs(shifted.coefficients) - np.abs(st.coefficients)))),
        )
    record("phase shift preserves |c_n|", worst < 1e-14, f"max change {worst:.2e}")

    worst_n = worst_var = 0.0
    for nbar, nu in ((0.5, 0.1), (1.0, 0.2), (0.25, 0.5)):
        spec = build_probe(nbar, nu)
        st = squeezed_coherent_fock(spec.squeezed)
        psi = superpose_with_vacuum(st, spec.mu, spec.nu)
        norm = float(np.vdot(psi.coefficients, psi.coefficients).real)
        worst_n = max(worst_n, abs(norm - 1.0))
        _, var_f = fock_moments(psi)
        var_cf = probe_number_variance(spec)
        worst_var = max(worst_var, abs(var_f - var_cf) / var_cf)
    record("probe normalization in Fock", worst_n < 1e-8, f"max |norm-1| {worst_n:.2e}")
    record("probe number variance vs Fock (rel)", worst_var < 1e-6, f"max rel err {worst_var:.2e}")

    return results
