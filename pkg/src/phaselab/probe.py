"""The vacuum/squeezed superposition probe mu|0> + nu|xi>.

The displaced squeezed component |xi> carries nxi = nbar/nu^2 photons so
that the superposition's mean photon number equals the budget nbar.  mu is
solved from exact normalization including the real overlap <0|xi>; because
a|0> = 0 the vacuum cross terms drop out of all number moments, so the
exact mean of the normalized state equals nbar identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .gaussian import SqueezedParams, from_mean_photons, number_moments


@dataclass(frozen=True)
class ProbeSpec:
    """Superposition amplitudes, photon budget, and the squeezed component."""

    mu: float
    nu: float
    nbar: float
    squeezed: SqueezedParams
    overlap: float = field(repr=False)

    @property
    def exact_mean_photons(self) -> float:
        """Mean photons of the normalized state; coincides with nbar because
        <0|a^dag a|xi> = 0 exactly."""
        return self.nu**2 * self.squeezed.nxi


def vacuum_overlap(params: SqueezedParams) -> float:
    """Exact inner product <0|xi> = sqrt(sech r) exp[-(ybar^2/8)(1 - tanh r)].

    For strong squeezing this reduces to the asymptotic form
    sqrt(2 dX) exp(-ybar^2 dX^2 / 4) with dX = e^{-r}, and it equals 1 at
    ybar = r = 0.  Scales as nxi^(-1/4) under equal photon splitting.
    """
    sech = 1.0 / math.cosh(params.r)
    return math.sqrt(sech) * math.exp(-0.125 * params.ybar**2 * (1.0 - math.tanh(params.r)))


def build_probe(nbar: float, nu: float) -> ProbeSpec:
    """Construct the probe at photon budget nbar with squeezed weight nu.

    mu > 0 solves mu^2 + nu^2 + 2 mu nu <0|xi> = 1 exactly; nu = 1 gives the
    pure squeezed state (mu = 0).
    """
    if nbar <= 0.0:
        raise ValueError(f"nbar must be > 0, got {nbar}")
    if not 0.0 < nu <= 1.0:
        raise ValueError(f"nu must lie in (0, 1], got {nu}")
    squeezed = from_mean_photons(nbar / nu**2)
    kappa = vacuum_overlap(squeezed)
    disc = nu * nu * kappa * kappa + 1.0 - nu * nu
    if disc < 0.0:
        raise ValueError(f"no positive mu root for nbar={nbar}, nu={nu}")
    mu = -nu * kappa + math.sqrt(disc)
    return ProbeSpec(mu=mu, nu=nu, nbar=nbar, squeezed=squeezed, overlap=kappa)


def probe_number_variance(spec: ProbeSpec) -> float:
    """Exact variance of a^dag a in the normalized superposition.

    Vacuum cross terms vanish, leaving
    nu^2 (Var_xi + nxi^2) - nu^4 nxi^2; for nu << 1 and nxi >> 1 this
    approaches (5/2) nbar^2 / nu^2.
    """
    nxi = spec.squeezed.nxi
    _, var_xi = number_moments(spec.squeezed)
    return spec.nu**2 * (var_xi + nxi * nxi) - spec.nu**4 * nxi * nxi


def quantum_fisher(spec: ProbeSpec) -> float:
    """Quantum Fisher information for the phase generator a^dag a: four
    times the probe photon-number variance (pure state)."""
    return 4.0 * probe_number_variance(spec)
