"""Shared helpers: random parameter draws and synthetic grouped samples."""
from __future__ import annotations

import math

import numpy as np

from betaf import BetaFDistribution, BetaShapes, KernelFamily
from betaf.grouped import GroupedSample

# Quantile levels for informative (tail-weighted) 12-bin grids.
TAIL_PS = (0.01, 0.03, 0.08, 0.15, 0.25, 0.40, 0.55, 0.70, 0.82, 0.91, 0.97)

# Well-identified reference parameters per family, used by recovery-style
# tests: (alpha, beta, *theta_f). GB2 carries the 2003 income-fit values.
REFERENCE_PARAMS = {
    KernelFamily.GB1_POWER: (0.5, 3.0, 3.0, 10.0),
    KernelFamily.GB2_BURR: (0.490, 1.111, 2.724, 8.297),
    KernelFamily.NORMAL: (0.4, 0.4, 5.0, 2.0),
    KernelFamily.SCALED_T2: (3.0, 1.0),
    KernelFamily.LOGISTIC4: (2.0, 0.5, 1.0, 1.0),
    KernelFamily.EXPONENTIAL: (1.5, 0.8, 0.3),
    KernelFamily.WEIBULL: (0.3, 0.25, 1.0, 1.5),
}

GB2_2003 = BetaFDistribution(BetaShapes(0.490, 1.111), KernelFamily.GB2_BURR, (2.724, 8.297))


def make_distribution(family: KernelFamily, theta) -> BetaFDistribution:
    return BetaFDistribution(BetaShapes(theta[0], theta[1]), family, tuple(theta[2:]))


def draw_params(rng: np.random.Generator, family: KernelFamily) -> tuple[float, ...]:
    """Random valid parameters in moderate, well-conditioned ranges."""
    if family is KernelFamily.GB1_POWER:
        return (rng.uniform(0.3, 4), rng.uniform(0.3, 4), rng.uniform(0.3, 4), rng.uniform(0.5, 20))
    if family is KernelFamily.GB2_BURR:
        a = rng.uniform(0.8, 4)
        return (rng.uniform(0.3, 4), 1.0 / a + rng.uniform(0.5, 3), a, rng.uniform(0.5, 15))
    if family is KernelFamily.NORMAL:
        return (rng.uniform(0.4, 3), rng.uniform(0.4, 3), rng.uniform(-2, 5), rng.uniform(0.5, 3))
    if family is KernelFamily.SCALED_T2:
        return (rng.uniform(0.8, 6), rng.uniform(0.8, 6))
    if family is KernelFamily.LOGISTIC4:
        return (rng.uniform(0.4, 3), rng.uniform(0.4, 3), rng.uniform(-2, 4), rng.uniform(0.4, 2))
    if family is KernelFamily.EXPONENTIAL:
        return (rng.uniform(0.3, 5), rng.uniform(0.3, 5), rng.uniform(0.1, 3))
    return (rng.uniform(0.3, 4), rng.uniform(0.3, 3), rng.uniform(0.1, 2), rng.uniform(0.4, 3))


def quantile_edges(d: BetaFDistribution, ps=TAIL_PS) -> tuple[float, ...]:
    """Bin edges at model quantiles, extended to the support ends."""
    lo = d.support[0]
    first = lo if math.isfinite(lo) else -math.inf
    return (first, *(d.quantile(p) for p in ps), math.inf)


def bin_draws(edges, draws) -> tuple[int, ...]:
    interior = np.asarray(edges[1:-1])
    idx = np.searchsorted(interior, draws, side="right")
    return tuple(np.bincount(idx, minlength=len(edges) - 1).tolist())


def simulate_grouped(d: BetaFDistribution, n: int, seed: int, ps=TAIL_PS,
                     with_means: bool = False) -> GroupedSample:
    """Draw n samples and bin them at the model's own quantiles."""
    draws = d.sample(n, seed)
    edges = quantile_edges(d, ps)
    counts = bin_draws(edges, draws)
    means = None
    if with_means:
        interior = np.asarray(edges[1:-1])
        idx = np.searchsorted(interior, draws, side="right")
        means = tuple(
            float(draws[idx == i].mean()) if counts[i] else math.nan
            for i in range(len(counts))
        )
    return GroupedSample(edges=edges, counts=counts, group_means=means)


def random_grouped(rng: np.random.Generator, d: BetaFDistribution, n_bins: int = 8,
                   total: int = 500) -> GroupedSample:
    """Multinomial counts on a quantile grid, for gradient-style checks."""
    ps = np.linspace(0.08, 0.92, n_bins - 1)
    edges = quantile_edges(d, ps)
    probs = rng.dirichlet(np.full(n_bins, 2.0))
    counts = rng.multinomial(total, probs)
    counts = tuple(int(c) + 1 for c in counts)
    return GroupedSample(edges=edges, counts=counts)


def fd_loglik_grad(d: BetaFDistribution, s: GroupedSample, h_rel: float = 1e-5) -> np.ndarray:
    """Central finite differences of the log-likelihood, the gradient oracle.

    The bounded-support scale of the power kernel sits a finite distance
    above the largest bin edge; the likelihood has a log-singularity there,
    so that coordinate's step shrinks with the remaining margin to keep the
    stencil inside the smooth region.
    """
    from betaf.grouped import log_likelihood

    theta = [d.shapes.alpha, d.shapes.beta, *d.theta_f]
    out = np.empty(len(theta))
    for j in range(len(theta)):
        h = h_rel * max(1.0, abs(theta[j]))
        if d.family is KernelFamily.GB1_POWER and j == 3:
            margin = theta[3] - max(e for e in s.edges if math.isfinite(e))
            h = min(h, 1e-3 * margin)
        hi = list(theta)
        lo = list(theta)
        hi[j] += h
        lo[j] -= h
        d_hi = make_distribution(d.family, hi)
        d_lo = make_distribution(d.family, lo)
        out[j] = (log_likelihood(d_hi, s) - log_likelihood(d_lo, s)) / (2.0 * h)
    return out
