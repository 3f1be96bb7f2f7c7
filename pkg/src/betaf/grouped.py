"""Grouped samples, cell probabilities, and the multinomial log-likelihood.

Cell probabilities are differences of the beta CDF evaluated at the kernel
CDF of the bin edges. The extreme edges are treated as the support ends: the
kernel CDF is pinned to 0 at the first lower edge and 1 at the last upper
edge, so the cell probabilities always sum to one and the extreme edges
contribute nothing to the parameter gradient.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from . import kernels
from .errors import DomainError, NumericError
from .family import BetaFDistribution, BetaShapes
from .kernels import KernelFamily
from .specfun import beta_pdf, digamma, log_beta, reg_inc_beta

logger = logging.getLogger(__name__)

# Cell probabilities below this are treated as underflowed when logged.
PROB_CLAMP = 1e-300

_GRAD_QUAD_RTOL = 1e-12


@dataclass(frozen=True)
class GroupedSample:
    """Ordered bins with frequencies and optional per-bin means.

    Edges and group means are stored in working units (raw values divided by
    ``unit_scale`` at ingestion). The first edge may be -inf (or the support
    origin) and the last is typically +inf for the open-ended top bin. Group
    means for empty bins may be NaN.
    """

    edges: tuple[float, ...]
    counts: tuple[int, ...]
    group_means: tuple[float, ...] | None = None
    unit_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(float(e) for e in self.edges))
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        if self.group_means is not None:
            object.__setattr__(
                self, "group_means", tuple(float(m) for m in self.group_means)
            )
        edges, counts = self.edges, self.counts
        r = len(counts)
        if r < 2:
            raise DomainError(f"need at least 2 bins, got {r}")
        if len(edges) != r + 1:
            raise DomainError(f"{r} counts require {r + 1} edges, got {len(edges)}")
        for lo, hi in zip(edges, edges[1:]):
            if not lo < hi:
                raise DomainError(f"edges must be strictly increasing, got {lo} >= {hi}")
        for e in edges[1:-1]:
            if not math.isfinite(e):
                raise DomainError(f"interior edges must be finite, got {e}")
        if any(c < 0 for c in counts):
            raise DomainError("counts must be nonnegative")
        if sum(counts) <= 0:
            raise DomainError("total count must be positive")
        if not (self.unit_scale > 0.0):
            raise DomainError(f"unit_scale must be positive, got {self.unit_scale}")
        if self.group_means is not None:
            if len(self.group_means) != r:
                raise DomainError("group_means length must match counts")
            for i, m in enumerate(self.group_means):
                if math.isnan(m):
                    if counts[i] > 0:
                        raise DomainError(f"bin {i} has counts but no group mean")
                    continue
                if m < edges[i] or (i < r - 1 and m > edges[i + 1]):
                    raise DomainError(
                        f"group mean {m} of bin {i} lies outside [{edges[i]}, {edges[i + 1]}]"
                    )

    @property
    def n_bins(self) -> int:
        return len(self.counts)

    @property
    def total(self) -> int:
        return sum(self.counts)


def empirical_mean(s: GroupedSample) -> float:
    """Count-weighted average of the group means, in working units."""
    if s.group_means is None:
        raise DomainError("sample has no group means")
    num = math.fsum(
        n * m for n, m in zip(s.counts, s.group_means) if n > 0
    )
    return num / s.total


def _kernel_scale_edges(d: BetaFDistribution, s: GroupedSample) -> list[float]:
    """Kernel CDF values at the bin edges, with the extremes pinned to 0/1."""
    return [0.0, *(d.kernel_cdf(x) for x in s.edges[1:-1]), 1.0]


def cell_probs(d: BetaFDistribution, s: GroupedSample) -> np.ndarray:
    """Model probability of each bin; sums to 1 under the edge convention."""
    a, b = d.shapes.alpha, d.shapes.beta
    c = [reg_inc_beta(f, a, b) for f in _kernel_scale_edges(d, s)]
    return np.array([max(hi - lo, 0.0) for lo, hi in zip(c, c[1:])])


def log_likelihood(d: BetaFDistribution, s: GroupedSample) -> float:
    """Multinomial log-likelihood sum(n_i ln P_i), constant term omitted.

    An occupied cell whose probability underflows the clamp makes the result
    -inf; the offending cell is logged.
    """
    probs = cell_probs(d, s)
    for i, (n, p) in enumerate(zip(s.counts, probs)):
        if n > 0 and p < PROB_CLAMP:
            logger.debug(
                "cell %d has %d observations but probability %.3e; log-likelihood is -inf",
                i, n, p,
            )
            return -math.inf
    return math.fsum(n * math.log(p) for n, p in zip(s.counts, probs) if n > 0)


def _fd_loglik_grad(d: BetaFDistribution, s: GroupedSample, coords: list[int]) -> dict[int, float]:
    """Central finite differences of the log-likelihood for selected
    coordinates of (alpha, beta, *theta_f)."""
    theta = [d.shapes.alpha, d.shapes.beta, *d.theta_f]

    def loglik_at(vec: list[float]) -> float:
        dist = BetaFDistribution(
            BetaShapes(vec[0], vec[1]), d.family, tuple(vec[2:])
        )
        return log_likelihood(dist, s)

    out: dict[int, float] = {}
    for j in coords:
        h = 1e-6 * max(1.0, abs(theta[j]))
        hi_vec = list(theta)
        lo_vec = list(theta)
        hi_vec[j] += h
        lo_vec[j] -= h
        out[j] = (loglik_at(hi_vec) - loglik_at(lo_vec)) / (2.0 * h)
    return out


def _shape_grad_integral(a: float, b: float, lnb: float, lo: float, hi: float, wrt_alpha: bool) -> float:
    """integral of g(t) ln t dt (or g(t) ln(1-t) dt) over [lo, hi]."""
    if hi <= lo:
        return 0.0

    if wrt_alpha:
        def f(t: float) -> float:
            if t <= 0.0 or t >= 1.0:
                return 0.0
            return math.exp((a - 1.0) * math.log(t) + (b - 1.0) * math.log1p(-t) - lnb) * math.log(t)
    else:
        def f(t: float) -> float:
            if t <= 0.0 or t >= 1.0:
                return 0.0
            return math.exp((a - 1.0) * math.log(t) + (b - 1.0) * math.log1p(-t) - lnb) * math.log1p(-t)

    val, abserr, *_ = quad(
        f, lo, hi, epsabs=1e-16, epsrel=_GRAD_QUAD_RTOL, limit=200, full_output=1
    )
    if not math.isfinite(val) or abserr > 1e-6 * max(abs(val), 1.0):
        raise NumericError(f"shape-gradient quadrature failed on [{lo}, {hi}]")
    return val


def log_likelihood_grad(d: BetaFDistribution, s: GroupedSample) -> np.ndarray:
    """Gradient of the log-likelihood in (alpha, beta, *theta_f) order.

    The kernel-parameter block is analytic: each interior edge contributes
    the beta density at the kernel CDF value times dF/dtheta_f, with the
    extreme edges contributing nothing. The shape block integrates the
    derivative of the beta density over each cell by adaptive quadrature,
    falling back to finite differences if a quadrature fails. The scaled-t
    family (whose kernel constants are the shapes themselves) is handled
    entirely by finite differences.
    """
    npar = 2 + kernels.arity(d.family)
    if d.family is KernelFamily.SCALED_T2:
        fd = _fd_loglik_grad(d, s, [0, 1])
        return np.array([fd[0], fd[1]])

    a, b = d.shapes.alpha, d.shapes.beta
    f_edges = _kernel_scale_edges(d, s)
    c = [reg_inc_beta(f, a, b) for f in f_edges]
    probs = [max(hi - lo, 0.0) for lo, hi in zip(c, c[1:])]
    r = s.n_bins
    ratios = []
    for i, (n, p) in enumerate(zip(s.counts, probs)):
        if n == 0:
            ratios.append(0.0)
            continue
        if p < PROB_CLAMP:
            raise NumericError(f"cell {i} probability underflowed; gradient undefined")
        ratios.append(n / p)

    grad = np.zeros(npar)

    # Shape block: dP_i/dalpha = int g ln t - dlogB/dalpha * P_i over the cell.
    lnb = log_beta(a, b)
    dlogb_da = digamma(a) - digamma(a + b)
    dlogb_db = digamma(b) - digamma(a + b)
    try:
        for i in range(r):
            if ratios[i] == 0.0:
                continue
            int_lnt = _shape_grad_integral(a, b, lnb, f_edges[i], f_edges[i + 1], True)
            int_ln1mt = _shape_grad_integral(a, b, lnb, f_edges[i], f_edges[i + 1], False)
            grad[0] += ratios[i] * (int_lnt - dlogb_da * probs[i])
            grad[1] += ratios[i] * (int_ln1mt - dlogb_db * probs[i])
    except NumericError:
        fd = _fd_loglik_grad(d, s, [0, 1])
        grad[0], grad[1] = fd[0], fd[1]

    # Kernel block: edge weights g(c_j) dF(x_j)/dtheta_f, zero at the extremes.
    # Where F is locally constant in theta_f (dF = 0, e.g. an edge beyond a
    # bounded support), the weight is 0 even if the beta density diverges.
    karity = kernels.arity(d.family)
    w = np.zeros((r + 1, karity))
    for j in range(1, r):
        x = s.edges[j]
        g = beta_pdf(f_edges[j], a, b)
        dF = kernels.kernel_cdf_grad(d.family, d.theta_f, d.shapes, x)
        for k in range(karity):
            w[j, k] = 0.0 if dF[k] == 0.0 else g * dF[k]
        if not np.all(np.isfinite(w[j])):
            raise NumericError(f"gradient overflow at edge {j} (x={x})")
    for i in range(r):
        if ratios[i] == 0.0:
            continue
        for k in range(karity):
            grad[2 + k] += ratios[i] * (w[i + 1, k] - w[i, k])
    return grad
