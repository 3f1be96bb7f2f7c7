"""Maximum-likelihood fitting of beta-F families to grouped data.

Parameters are optimized on an unconstrained scale (log for positive
coordinates, identity for locations, and a shifted-exponential map keeping
the bounded-support scale above the largest finite bin edge). Ascent runs a
BFGS-accumulated quasi-Newton loop with backtracking Armijo line search from
several deterministic starts; a finite-difference Newton mode is available
for diagnostics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .errors import DomainError, FitError, NumericError
from .family import BetaFDistribution, BetaShapes
from .grouped import GroupedSample, log_likelihood, log_likelihood_grad
from .kernels import KernelFamily
from .metrics import FitMetrics

# Transformed coordinates are clamped to this box; hitting it is flagged.
U_CAP = 30.0

_ARMIJO_C1 = 1e-4
_MIN_STEP_FRACTION = 1e-14


@dataclass(frozen=True)
class OptimizerConfig:
    """Tolerances, iteration caps, and start strategy for fit_family.

    grad_tol applies to the infinity norm of the transformed-scale gradient.
    starts is either "auto" or an explicit list of (alpha, beta, *theta_f)
    vectors.
    """

    grad_tol: float = 1e-6
    step_tol: float = 1e-10
    max_iter: int = 500
    starts: object = "auto"
    hessian_mode: str = "bfgs_accumulated"

    def __post_init__(self):
        if not (self.grad_tol > 0.0 and self.step_tol > 0.0):
            raise DomainError("tolerances must be positive")
        if self.max_iter < 1:
            raise DomainError("max_iter must be at least 1")
        if self.hessian_mode not in ("bfgs_accumulated", "finite_difference"):
            raise DomainError(f"unknown hessian_mode {self.hessian_mode!r}")


@dataclass(frozen=True)
class FitResult:
    family: KernelFamily
    shapes: BetaShapes
    theta_f: tuple[float, ...]
    loglik: float
    converged: bool
    iterations: int
    grad_norm: float
    start_index: int
    cap_hits: tuple[str, ...] = ()
    metrics: FitMetrics | None = None

    def distribution(self) -> BetaFDistribution:
        return BetaFDistribution(self.shapes, self.family, self.theta_f)

    def params(self) -> np.ndarray:
        return np.array([self.shapes.alpha, self.shapes.beta, *self.theta_f])

    def with_metrics(self, metrics: FitMetrics) -> "FitResult":
        return replace(self, metrics=metrics)


class ParamTransform:
    """Bijection between (alpha, beta, *theta_f) and unconstrained coordinates."""

    def __init__(self, family: KernelFamily, x_max_finite: float | None = None):
        self.family = family
        self.names = ("alpha", "beta") + tuple(
            f"theta_f.{n}" for n in kernels.PARAM_NAMES[family]
        )
        kinds = ["log", "log"]
        if family in (KernelFamily.GB2_BURR, KernelFamily.WEIBULL):
            kinds += ["log", "log"]
        elif family is KernelFamily.GB1_POWER:
            kinds += ["log", "gb1_scale"]
        elif family in (KernelFamily.NORMAL, KernelFamily.LOGISTIC4):
            kinds += ["identity", "log"]
        elif family is KernelFamily.EXPONENTIAL:
            kinds += ["log"]
        self.kinds = tuple(kinds)
        if "gb1_scale" in kinds:
            if x_max_finite is None or not math.isfinite(x_max_finite) or x_max_finite <= 0:
                raise DomainError("gb1 transform needs the largest finite bin edge")
        self.x_max = x_max_finite

    @property
    def size(self) -> int:
        return len(self.kinds)

    def transform(self, theta) -> np.ndarray:
        """Natural parameters to unconstrained coordinates."""
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.size,):
            raise DomainError(f"expected {self.size} parameters, got {theta.shape}")
        u = np.empty(self.size)
        for j, kind in enumerate(self.kinds):
            v = theta[j]
            if kind == "log":
                if v <= 0.0:
                    raise DomainError(f"{self.names[j]} must be positive, got {v}")
                u[j] = math.log(v)
            elif kind == "identity":
                u[j] = v
            else:  # gb1_scale: b = x_max * (1 + e^u)
                if v < self.x_max:
                    raise DomainError(
                        f"{self.names[j]} must be >= largest finite edge {self.x_max}, got {v}"
                    )
                ratio = v / self.x_max - 1.0
                u[j] = math.log(ratio) if ratio > 0.0 else -math.inf
        return u

    def untransform(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        theta = np.empty(self.size)
        for j, kind in enumerate(self.kinds):
            if kind == "log":
                theta[j] = math.exp(u[j])
            elif kind == "identity":
                theta[j] = u[j]
            else:
                theta[j] = self.x_max * (1.0 + math.exp(u[j]))
        return theta

    def dtheta_du(self, u, theta) -> np.ndarray:
        """Diagonal Jacobian of untransform."""
        out = np.empty(self.size)
        for j, kind in enumerate(self.kinds):
            if kind == "log":
                out[j] = theta[j]
            elif kind == "identity":
                out[j] = 1.0
            else:
                out[j] = theta[j] - self.x_max
        return out


def _largest_finite_edge(s: GroupedSample) -> float:
    finite = [e for e in s.edges if math.isfinite(e)]
    return max(finite)


def _bin_midpoints(s: GroupedSample) -> np.ndarray:
    """Representative midpoints; open-ended bins extend half the width of
    their finite neighbour."""
    edges = s.edges
    mids = np.empty(s.n_bins)
    for i in range(s.n_bins):
        lo, hi = edges[i], edges[i + 1]
        if math.isfinite(lo) and math.isfinite(hi):
            mids[i] = 0.5 * (lo + hi)
        elif not math.isfinite(hi):
            width = edges[i] - edges[i - 1]
            mids[i] = lo + 0.5 * width
        else:
            width = edges[i + 2] - edges[i + 1]
            mids[i] = hi - 0.5 * width
    return mids


def auto_starts(family: KernelFamily, s: GroupedSample) -> list[np.ndarray]:
    """Deterministic starting vectors: a moment-matched base with alpha =
    beta = 1, plus each coordinate halved and doubled."""
    mids = _bin_midpoints(s)
    counts = np.array(s.counts, dtype=float)
    total = counts.sum()
    m = float(counts @ mids / total)
    spread = float(math.sqrt(counts @ (mids - m) ** 2 / total))
    spread = max(spread, 0.05 * max(abs(m), 1.0))
    m_pos = max(m, 1e-6)

    if family is KernelFamily.GB1_POWER:
        b0 = 1.5 * _largest_finite_edge(s)
        a0 = m_pos / (b0 - m_pos) if b0 > m_pos else 1.0
        kernel = [a0, b0]
    elif family is KernelFamily.GB2_BURR:
        kernel = [2.0, m_pos]
    elif family is KernelFamily.NORMAL:
        kernel = [m, spread]
    elif family is KernelFamily.SCALED_T2:
        kernel = []
    elif family is KernelFamily.LOGISTIC4:
        kernel = [m, spread * math.sqrt(3.0) / math.pi]
    elif family is KernelFamily.EXPONENTIAL:
        kernel = [1.0 / m_pos]
    else:
        kernel = [1.0 / m_pos, 1.0]

    base = np.array([1.0, 1.0, *kernel])
    starts = [base]
    for j in range(base.size):
        for factor in (0.5, 2.0):
            pert = base.copy()
            pert[j] *= factor
            starts.append(pert)
    if family is KernelFamily.GB1_POWER:
        floor = 1.05 * _largest_finite_edge(s)
        for vec in starts:
            vec[3] = max(vec[3], floor)
    return starts


def _make_objective(family: KernelFamily, s: GroupedSample, tr: ParamTransform):
    def to_distribution(u: np.ndarray) -> BetaFDistribution:
        theta = tr.untransform(u)
        shapes = BetaShapes(theta[0], theta[1])
        return BetaFDistribution(shapes, family, tuple(theta[2:]))

    def fun(u: np.ndarray) -> float:
        try:
            value = log_likelihood(to_distribution(u), s)
        except (DomainError, NumericError, OverflowError):
            return math.inf
        return -value if math.isfinite(value) else math.inf

    def grad(u: np.ndarray) -> np.ndarray:
        theta = tr.untransform(u)
        try:
            g_theta = log_likelihood_grad(to_distribution(u), s)
            g_u = -g_theta * tr.dtheta_du(u, theta)
            if np.all(np.isfinite(g_u)):
                return g_u
        except (DomainError, NumericError, OverflowError):
            pass
        return _fd_grad(fun, u)

    return fun, grad


def _fd_grad(fun, u: np.ndarray, h: float = 1e-6) -> np.ndarray:
    g = np.empty(u.size)
    for j in range(u.size):
        step = h * max(1.0, abs(u[j]))
        up = u.copy()
        dn = u.copy()
        up[j] += step
        dn[j] -= step
        g[j] = (fun(up) - fun(dn)) / (2.0 * step)
    return g


def _fd_hessian(grad, u: np.ndarray, h: float = 1e-5) -> np.ndarray:
    n = u.size
    H = np.empty((n, n))
    g0 = grad(u)
    for j in range(n):
        step = h * max(1.0, abs(u[j]))
        up = u.copy()
        up[j] += step
        H[:, j] = (grad(up) - g0) / step
    return 0.5 * (H + H.T)


def _newton_direction(H: np.ndarray, g: np.ndarray) -> np.ndarray:
    n = g.size
    ridge = 0.0
    scale = max(np.abs(np.diag(H)).max(), 1.0)
    for _ in range(20):
        try:
            L = np.linalg.cholesky(H + ridge * np.eye(n))
            return -np.linalg.solve(L.T, np.linalg.solve(L, g))
        except np.linalg.LinAlgError:
            ridge = max(2.0 * ridge, 1e-8 * scale)
    return -g


@dataclass
class _RunState:
    u: np.ndarray
    fval: float
    grad: np.ndarray
    iterations: int = 0
    converged: bool = False
    cap_hits: set = field(default_factory=set)


def _minimize(fun, grad, u0: np.ndarray, cfg: OptimizerConfig) -> _RunState | None:
    """Monotone quasi-Newton descent of -loglik inside the |u| <= U_CAP box."""
    u = np.clip(u0, -U_CAP, U_CAP)
    fval = fun(u)
    if not math.isfinite(fval):
        return None
    g = grad(u)
    if not np.all(np.isfinite(g)):
        return None
    state = _RunState(u=u, fval=fval, grad=g)
    n = u.size
    H = np.eye(n)

    for _ in range(cfg.max_iter):
        if np.abs(state.grad).max() <= cfg.grad_tol:
            state.converged = True
            break

        if cfg.hessian_mode == "finite_difference":
            p = _newton_direction(_fd_hessian(grad, state.u), state.grad)
        else:
            p = -H @ state.grad
        if state.grad @ p >= 0.0:
            p = -state.grad
            H = np.eye(n)

        t = 1.0
        accepted = False
        while t >= _MIN_STEP_FRACTION:
            cand = np.clip(state.u + t * p, -U_CAP, U_CAP)
            delta = cand - state.u
            slope = state.grad @ delta
            if not np.any(delta != 0.0) or slope >= 0.0:
                t *= 0.5
                continue
            f_cand = fun(cand)
            if f_cand <= state.fval + _ARMIJO_C1 * slope:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break

        g_new = grad(cand)
        if not np.all(np.isfinite(g_new)):
            break
        s_vec = cand - state.u
        y_vec = g_new - state.grad
        state.u, state.fval, state.grad = cand, f_cand, g_new
        state.iterations += 1
        for j in range(n):
            if abs(cand[j]) >= U_CAP:
                state.cap_hits.add(j)

        if np.abs(s_vec).max() <= cfg.step_tol:
            if np.abs(state.grad).max() <= cfg.grad_tol:
                state.converged = True
            break

        sy = float(s_vec @ y_vec)
        if cfg.hessian_mode == "bfgs_accumulated" and sy > 1e-10 * (
            np.linalg.norm(s_vec) * np.linalg.norm(y_vec)
        ):
            rho = 1.0 / sy
            I = np.eye(n)
            V = I - rho * np.outer(s_vec, y_vec)
            H = V @ H @ V.T + rho * np.outer(s_vec, s_vec)
    else:
        if np.abs(state.grad).max() <= cfg.grad_tol:
            state.converged = True
    return state


def fit_family(
    family: KernelFamily, s: GroupedSample, cfg: OptimizerConfig = OptimizerConfig()
) -> FitResult:
    """Best maximum-likelihood fit across starts.

    Converged runs (transformed gradient within grad_tol) are preferred;
    otherwise the best non-converged run is returned flagged converged=False.
    Ties in log-likelihood keep the lowest start index. Raises FitError when
    no start yields a finite likelihood.
    """
    if cfg.starts == "auto":
        starts = auto_starts(family, s)
    else:
        starts = [np.asarray(v, dtype=float) for v in cfg.starts]
    if not starts:
        raise FitError("no starting values supplied")

    x_max = _largest_finite_edge(s)
    tr = ParamTransform(family, x_max_finite=x_max)
    fun, grad = _make_objective(family, s, tr)

    best: tuple[int, _RunState] | None = None
    for idx, theta0 in enumerate(starts):
        try:
            u0 = tr.transform(theta0)
        except DomainError:
            continue
        state = _minimize(fun, grad, u0, cfg)
        if state is None:
            continue
        if best is None:
            best = (idx, state)
            continue
        _, cur = best
        if (state.converged, -state.fval) > (cur.converged, -cur.fval):
            best = (idx, state)

    if best is None:
        raise FitError(
            f"all {len(starts)} starts produced a non-finite likelihood for "
            f"{family.value}: {[list(np.round(v, 6)) for v in starts]}"
        )

    idx, state = best
    theta = tr.untransform(state.u)
    # A saturated likelihood (every occupied cell at probability ~1) means the
    # data are degenerate and the optimizer ran out along a ridge; the zero
    # gradient there is a floating-point artifact, not a stationary point.
    converged = state.converged and state.fval > 1e-6
    return FitResult(
        family=family,
        shapes=BetaShapes(theta[0], theta[1]),
        theta_f=tuple(theta[2:]),
        loglik=-state.fval,
        converged=converged,
        iterations=state.iterations,
        grad_norm=float(np.abs(state.grad).max()),
        start_index=idx,
        cap_hits=tuple(tr.names[j] for j in sorted(state.cap_hits)),
    )
