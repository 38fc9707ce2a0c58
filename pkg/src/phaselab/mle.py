"""Maximum-likelihood phase estimation from homodyne outcomes.

The likelihood is evaluated analytically in the chosen density family (the
same family the sampler drew from, unless deliberately mismatched).  The
global maximizer over the search window combines a dense scan with
structure-aware candidates and golden-section refinement:

* dense scan with step pi/(20 g(0)), resolving the interference
  oscillation at the peak-center scale;
* per-outcome candidates at the peak-matching pullback phi = x/ybar (its
  arcsine for the exact family) and at the cos-aligned points of the
  interference phase ybar x/2 - g(x) phi nearest the pullback -- for
  background outcomes the oscillation runs at |g(x)| >> g(0), far below the
  scan resolution, and these candidates are where the true maximum lives;
* vectorized golden-section refinement around the winner, keeping whichever
  of (refined, candidate) scores higher.

Near-ties (within 1e-12 relative) resolve toward smaller |phi|, so a
phase-insensitive likelihood yields 0 rather than an arbitrary grid point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .homodyne import Mode, _check_mode, density_values, g_kernel, g_peak
from .probe import ProbeSpec

_P_FLOOR = 1e-300
_TIE_REL = 1e-12
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class LikelihoodProblem:
    """One estimation task: m outcomes, the probe, the density family, and
    the half-width of the search window [-window, +window]."""

    outcomes: np.ndarray
    probe: ProbeSpec
    mode: Mode = "first_order"
    window: float | None = None

    def __post_init__(self) -> None:
        _check_mode(self.mode)
        outcomes = np.atleast_1d(np.asarray(self.outcomes, dtype=float))
        if outcomes.ndim != 1 or outcomes.size < 1:
            raise ValueError("outcomes must be a non-empty 1-d sequence")
        object.__setattr__(self, "outcomes", outcomes)
        if self.window is None:
            object.__setattr__(self, "window", default_window(self.probe))
        if self.window <= 0.0:
            raise ValueError(f"window must be > 0, got {self.window}")


@dataclass(frozen=True)
class EstimateDiagnostics:
    boundary_hit: bool
    local_maxima: int
    scan_points: int
    window: float
    scan_step: float


def default_window(spec: ProbeSpec, half_width: float = 8.0) -> float:
    """Search half-width covering the peak-matching pullback of every
    outcome in the sampling grid: asin(half_width / ybar), capped at pi/2."""
    z = min(1.0, half_width / spec.squeezed.ybar)
    return min(0.5 * math.pi, math.asin(z))


def default_scan_step(spec: ProbeSpec) -> float:
    return math.pi / (20.0 * g_peak(spec))


def log_likelihood(problem: LikelihoodProblem, phi: float) -> float:
    """Sum of log p(x_i|phi) in the chosen family, p floored at 1e-300."""
    if abs(phi) > problem.window:
        raise ValueError(f"|phi| = {abs(phi)} exceeds the window {problem.window}")
    p = density_values(problem.probe, problem.outcomes, phi, problem.mode)
    return float(np.sum(np.log(np.maximum(p, _P_FLOOR))))


def _scores(spec: ProbeSpec, mode: Mode, outcomes: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Score to maximize at each phi: the density itself for m = 1 (same
    argmax, no log needed), the summed log density otherwise.
    outcomes: (N, m); phi: (N, J) or (J,); returns (N, J) or (N,)."""
    m = outcomes.shape[1]
    if m == 1:
        return density_values(spec, outcomes[:, 0:1], phi, mode)
    total = None
    for k in range(m):
        p = density_values(spec, outcomes[:, k : k + 1], phi, mode)
        term = np.log(np.maximum(p, _P_FLOOR))
        total = term if total is None else total + term
    return total


def _pick_with_ties(phi_grid: np.ndarray, scores: np.ndarray) -> np.ndarray:
    """Row-wise argmax of scores; near-ties resolve to the smallest |phi|.
    phi_grid: (J,) or (N, J); scores: (N, J)."""
    best = scores.max(axis=1, keepdims=True)
    tol = _TIE_REL * np.abs(best) + _P_FLOOR
    tied = scores >= best - tol
    abs_phi = np.abs(phi_grid) if phi_grid.ndim > 1 else np.abs(phi_grid)[None, :]
    masked = np.where(tied, abs_phi, np.inf)
    idx = masked.argmin(axis=1)
    rows = np.arange(scores.shape[0])
    if phi_grid.ndim > 1:
        return phi_grid[rows, idx]
    return phi_grid[idx]


def _candidate_matrix(
    spec: ProbeSpec, mode: Mode, outcomes: np.ndarray, scan_best: np.ndarray, window: float
) -> np.ndarray:
    """Per-trial candidate phases: scan winner, zero, and per outcome the
    peak pullback plus nearby cos-aligned points of the interference phase."""
    n, m = outcomes.shape
    ybar = spec.squeezed.ybar
    cols = [scan_best[:, None], np.zeros((n, 1))]
    for k in range(m):
        x = outcomes[:, k]
        z = np.clip(x / ybar, -1.0, 1.0)
        pull = np.arcsin(z) if mode == "exact" else x / ybar
        pull = np.clip(pull, -window, window)
        cols.append(pull[:, None])
        g = np.asarray(g_kernel(spec, x), dtype=float)
        theta0 = 0.5 * ybar * x
        safe = np.abs(g) > 1e-9 * max(1.0, g_peak(spec))
        g_safe = np.where(safe, g, 1.0)
        kstar = np.round((theta0 - g_safe * pull) / (2.0 * math.pi))
        for dk in (-2.0, -1.0, 0.0, 1.0, 2.0):
            node = (theta0 - 2.0 * math.pi * (kstar + dk)) / g_safe
            node = np.where(safe, node, pull)
            cols.append(np.clip(node, -window, window)[:, None])
    return np.concatenate(cols, axis=1)


def _golden_refine(
    spec: ProbeSpec,
    mode: Mode,
    outcomes: np.ndarray,
    center: np.ndarray,
    half: np.ndarray,
    window: float,
    iters: int,
) -> np.ndarray:
    """Vectorized golden-section ascent on [center-half, center+half]."""
    a = np.clip(center - half, -window, window)
    b = np.clip(center + half, -window, window)
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1 = _scores(spec, mode, outcomes, x1[:, None])[:, 0]
    f2 = _scores(spec, mode, outcomes, x2[:, None])[:, 0]
    for _ in range(iters):
        take_left = f1 >= f2
        b = np.where(take_left, x2, b)
        a = np.where(take_left, a, x1)
        x2_new = np.where(take_left, x1, a + _GOLDEN * (b - a))
        x1_new = np.where(take_left, b - _GOLDEN * (b - a), x2)
        f2_new = np.where(take_left, f1, np.nan)
        f1_new = np.where(take_left, np.nan, f2)
        probe_x = np.where(take_left, x1_new, x2_new)
        probe_f = _scores(spec, mode, outcomes, probe_x[:, None])[:, 0]
        f1 = np.where(take_left, probe_f, f1_new)
        f2 = np.where(take_left, f2_new, probe_f)
        x1, x2 = x1_new, x2_new
    return 0.5 * (a + b)


def estimate_batch(
    outcomes: np.ndarray,
    spec: ProbeSpec,
    mode: Mode = "first_order",
    window: float | None = None,
    scan_step: float | None = None,
    chunk_elements: int = 6_000_000,
    refine_iters: int = 48,
    count_local_maxima: bool = False,
):
    """ML estimates for a batch of trials.

    outcomes: (N,) or (N, m) array.  Returns (phi_hats, boundary_flags) or,
    with count_local_maxima, (phi_hats, boundary_flags, local_max_counts).
    """
    _check_mode(mode)
    outcomes = np.asarray(outcomes, dtype=float)
    if outcomes.ndim == 1:
        outcomes = outcomes[:, None]
    n, m = outcomes.shape
    if window is None:
        window = default_window(spec)
    if scan_step is None:
        scan_step = default_scan_step(spec)
    half_pts = max(1, int(math.ceil(window / scan_step)))
    phis = np.linspace(-window, window, 2 * half_pts + 1)
    step_eff = phis[1] - phis[0]

    phi_hats = np.empty(n)
    boundary = np.zeros(n, dtype=bool)
    local_counts = np.zeros(n, dtype=int)
    chunk = max(1, int(chunk_elements // max(1, phis.size)))
    g0 = g_peak(spec)

    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        xc = outcomes[lo:hi]
        scan_scores = _scores(spec, mode, xc, phis)
        if count_local_maxima:
            interior = (scan_scores[:, 1:-1] > scan_scores[:, :-2]) & (
                scan_scores[:, 1:-1] > scan_scores[:, 2:]
            )
            local_counts[lo:hi] = interior.sum(axis=1)
        scan_best = _pick_with_ties(phis, scan_scores)

        cands = _candidate_matrix(spec, mode, xc, scan_best, window)
        cand_scores = _scores(spec, mode, xc, cands)
        best = _pick_with_ties(cands, cand_scores)
        best_score = cand_scores.max(axis=1)

        # two refinement brackets: the width of the local oscillation lobe
        # (polishes cos-aligned candidates) and the scan step (recovers the
        # scan quantization where the likelihood is smooth on that scale);
        # the best of all stages wins, so refinement never loses ground
        g_abs = np.abs(np.asarray(g_kernel(spec, xc), dtype=float)).max(axis=1)
        lobe_half = np.minimum(step_eff, math.pi / 2.0 / np.maximum(g_abs, g0))
        final = best
        final_score = best_score
        for half in (lobe_half, np.full(xc.shape[0], step_eff)):
            refined = _golden_refine(spec, mode, xc, final, half, window, refine_iters)
            ref_score = _scores(spec, mode, xc, refined[:, None])[:, 0]
            use_ref = ref_score > final_score
            final = np.where(use_ref, refined, final)
            final_score = np.where(use_ref, ref_score, final_score)

        phi_hats[lo:hi] = final
        boundary[lo:hi] = window - np.abs(final) <= 2.0 * step_eff

    if count_local_maxima:
        return phi_hats, boundary, local_counts
    return phi_hats, boundary


def estimate(problem: LikelihoodProblem) -> tuple[float, EstimateDiagnostics]:
    """Global ML estimate over [-window, window] with diagnostics.

    A maximizer at the window boundary is flagged, not raised; the caller
    decides whether to widen the window.
    """
    scan_step = default_scan_step(problem.probe)
    phi_hats, flags, counts = estimate_batch(
        problem.outcomes[None, :],
        problem.probe,
        mode=problem.mode,
        window=problem.window,
        scan_step=scan_step,
        count_local_maxima=True,
    )
    half_pts = max(1, int(math.ceil(problem.window / scan_step)))
    diag = EstimateDiagnostics(
        boundary_hit=bool(flags[0]),
        local_maxima=int(counts[0]),
        scan_points=2 * half_pts + 1,
        window=problem.window,
        scan_step=scan_step,
    )
    return float(phi_hats[0]), diag
