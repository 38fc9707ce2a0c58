"""Single-mode Gaussian-state algebra for a displaced squeezed vacuum.

Conventions (used everywhere in this package): quadratures X = a^dag + a and
Y = i(a^dag - a) with [X, Y] = 2i, so the vacuum has <X^2> = 1 and position
wavefunction <x|0> = (2pi)^(-1/4) exp(-x^2/4).  The state handled here is
D(ybar) S(r) |0> with D(ybar) = exp(i ybar X / 2) (displacement of Y by ybar)
and S(r) = exp[i r (XY + YX)/4] (squeezing of X by e^{-r}).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class SqueezedParams:
    """Displacement and squeezing of the squeezed-coherent probe component.

    ybar -- quadrature displacement, <Y> = ybar (>= 0)
    r    -- squeezing parameter (>= 0)

    Derived: dx2 = exp(-2r) is the X-quadrature variance, nxi the mean
    photon number ybar^2/4 + sinh^2 r.
    """

    ybar: float
    r: float
    dx2: float = field(init=False, repr=False)
    nxi: float = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.ybar < 0.0:
            raise ValueError(f"ybar must be >= 0, got {self.ybar}")
        if self.r < 0.0:
            raise ValueError(f"r must be >= 0, got {self.r}")
        object.__setattr__(self, "dx2", math.exp(-2.0 * self.r))
        object.__setattr__(self, "nxi", 0.25 * self.ybar**2 + math.sinh(self.r) ** 2)


def from_mean_photons(nxi: float) -> SqueezedParams:
    """Build parameters with the photon budget split equally between the
    displacement and the squeezing: ybar^2/4 = sinh^2 r = nxi/2.
    """
    if nxi <= 0.0:
        raise ValueError(f"nxi must be > 0, got {nxi}")
    return SqueezedParams(ybar=math.sqrt(2.0 * nxi), r=math.asinh(math.sqrt(0.5 * nxi)))


@dataclass(frozen=True)
class ComplexGaussianAmplitude:
    """Position amplitude psi(x) = exp(a2 x^2 + a1 x + a0) with Re(a2) < 0."""

    a2: complex
    a1: complex
    a0: complex

    def __post_init__(self) -> None:
        if not self.a2.real < 0.0:
            raise ValueError(f"non-normalizable amplitude: Re(a2) = {self.a2.real}")
        norm = self.squared_norm()
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"amplitude not normalized: |psi|^2 integrates to {norm}")

    def __call__(self, x: np.ndarray | float) -> np.ndarray | complex:
        x = np.asarray(x, dtype=float)
        return np.exp(self.a2 * x * x + self.a1 * x + self.a0)

    def squared_norm(self) -> float:
        """Closed-form integral of |psi(x)|^2 over the real line."""
        p = -2.0 * self.a2.real
        q = 2.0 * self.a1.real
        c = 2.0 * self.a0.real
        return math.sqrt(math.pi / p) * math.exp(c + q * q / (4.0 * p))

    def modulus_moments(self) -> tuple[float, float]:
        """Mean and variance of the |psi(x)|^2 Gaussian."""
        var = -0.25 / self.a2.real
        mean = 2.0 * self.a1.real * var
        return mean, var


def exact_amplitude(params: SqueezedParams, phi: float) -> ComplexGaussianAmplitude:
    """Exact position amplitude <x| exp(-i phi a^dag a) D(ybar) S(r) |0>.

    Obtained by propagating the Gaussian through the harmonic-oscillator
    (Mehler) kernel of exp(-i phi a^dag a); no small-phi expansion.  With
    s2 = exp(-2r) and w = s2 cos(phi) + i sin(phi) the coefficients are

        a2 = -(cos(phi) + i s2 sin(phi)) / (4 w)
        a1 = i ybar s2 / (2 w)
        a0 = a0(0) + i phi/2 + [log(s2) - Log(w)]/2 - i ybar^2 s2 sin(phi)/(4 w)

    where a0(0) = log[(2pi)^(-1/4) s^(-1/2)].  The principal branch of
    Log(w) is continuous for phi in (-pi, pi] because Im(w) = sin(phi)
    changes sign exactly where phi does; the formula carries the full
    global phase, which matters for interference with the vacuum.
    """
    if not (-math.pi < phi <= math.pi):
        raise ValueError(f"phi must lie in (-pi, pi], got {phi}")
    s2 = params.dx2
    ybar = params.ybar
    c, s = math.cos(phi), math.sin(phi)
    w = complex(s2 * c, s)
    a2 = -complex(c, s2 * s) / (4.0 * w)
    a1 = 1j * ybar * s2 / (2.0 * w)
    a0_in = -0.25 * _LOG_2PI - 0.25 * math.log(s2)
    a0 = (
        a0_in
        + 0.5j * phi
        + 0.5 * (math.log(s2) - cmath.log(w))
        - 1j * ybar**2 * s2 * s / (4.0 * w)
    )
    return ComplexGaussianAmplitude(a2=a2, a1=a1, a0=a0)


def first_order_amplitude_coefficients(
    params: SqueezedParams, phi: float
) -> tuple[complex, complex, complex]:
    """Coefficients of the small-signal approximation of the shifted amplitude.

    This is the hybrid small-phi form with amplitude
    (2pi)^(-1/4) s^(-1/2) exp{i [ybar x / 2 - g(x) phi] - (x - ybar sin
    phi)^2 / (4 s^2)}; returned as (a2, a1, a0) of the same complex-Gaussian
    shape so it can be compared pointwise with the exact amplitude.
    """
    s2 = params.dx2
    ybar = params.ybar
    xbar = ybar * math.sin(phi)
    # g(x) = (x^2 - 2 + 2/s2 + ybar^2 - x^2/s2^2)/4, entering as exp(-i g(x) phi)
    g0 = 0.25 * (-2.0 + 2.0 / s2 + ybar**2)
    g2 = 0.25 * (1.0 - 1.0 / s2**2)
    a2 = complex(-0.25 / s2, -phi * g2)
    a1 = complex(xbar / (2.0 * s2), 0.5 * ybar)
    a0 = complex(
        -0.25 * _LOG_2PI - 0.25 * math.log(s2) - xbar**2 / (4.0 * s2),
        -phi * g0,
    )
    return a2, a1, a0


def number_moments(params: SqueezedParams) -> tuple[float, float]:
    """Mean and variance of a^dag a in the displaced squeezed vacuum.

    The variance follows from Wick contractions of the Bogoliubov-transformed
    mode: Var(n) = (ybar^2/4) e^{2r} + 2 sinh^2 r cosh^2 r.  It is certified
    against the number-basis oracle in the test suite.
    """
    sh = math.sinh(params.r)
    ch = math.cosh(params.r)
    variance = 0.25 * params.ybar**2 * math.exp(2.0 * params.r) + 2.0 * sh * sh * ch * ch
    return params.nxi, variance
