"""Deterministic inverse-CDF sampling of homodyne outcomes.

Streams come from the counter-based Philox generator: the tuple
(campaign_seed, trial_index, draw_index) selects the key and the starting
counter block, so every stream is a pure function of its SeedSpec --
identical across runs, platforms, and any scheduling of trials.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .homodyne import TabulatedDensity

# second key word, fixed so that campaign seeds of small integers still
# produce well-mixed Philox keys
_KEY_SALT = 0x9E3779B97F4A7C15

_U64 = 1 << 64


@dataclass(frozen=True)
class SeedSpec:
    """Addresses one random stream: campaign, trial within the campaign,
    and a block offset for independent draws inside one trial."""

    campaign_seed: int
    trial_index: int = 0
    draw_index: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.campaign_seed < _U64:
            raise ValueError(f"campaign_seed must be a u64, got {self.campaign_seed}")
        if self.trial_index < 0 or self.draw_index < 0:
            raise ValueError("trial_index and draw_index must be >= 0")


def generator(seed: SeedSpec) -> np.random.Generator:
    """Philox generator positioned at the stream for this SeedSpec."""
    bit_gen = np.random.Philox(
        key=np.array([seed.campaign_seed, _KEY_SALT], dtype=np.uint64),
        counter=np.array([0, seed.draw_index, seed.trial_index, 0], dtype=np.uint64),
    )
    return np.random.Generator(bit_gen)


def uniforms(seed: SeedSpec, count: int) -> np.ndarray:
    """`count` uniform variates from the stream of this SeedSpec."""
    return generator(seed).random(count)


def sample(density: TabulatedDensity, seed: SeedSpec, count: int) -> np.ndarray:
    """Draw homodyne outcomes by inverse-CDF transform.

    Uniform variates are mapped through the tabulated CDF with linear
    interpolation inside each bin; every outcome lies in the grid support.
    """
    u = uniforms(seed, count)
    return np.interp(u, density.cdf, density.grid)
