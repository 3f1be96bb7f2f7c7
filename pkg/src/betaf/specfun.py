"""Scalar special functions: log-beta, digamma, regularized incomplete beta
and its inverse, and the standard normal CDF/quantile.

The incomplete beta uses the modified Lentz continued fraction with the usual
symmetry switch at x > (a+1)/(a+b+2); the inverse uses bracketed Newton with
bisection fallback. Everything is plain-float and thread-safe.
"""
from __future__ import annotations

import math
import statistics
from dataclasses import dataclass

from .errors import DomainError, NumericError

_FPMIN = 1e-300
_CF_EPS = 1e-16
_CF_MAX_ITER = 1000

# Euler-Mascheroni constant
EULER_GAMMA = 0.5772156649015329


@dataclass(frozen=True)
class Accuracy:
    """Tolerance settings for the iterative routines."""

    rel_tol: float = 1e-12
    max_iter: int = 200

    def __post_init__(self):
        if not (0.0 < self.rel_tol <= 1e-6):
            raise DomainError(f"rel_tol must be in (0, 1e-6], got {self.rel_tol}")
        if self.max_iter < 50:
            raise DomainError(f"max_iter must be >= 50, got {self.max_iter}")


DEFAULT_ACCURACY = Accuracy()


def log_beta(alpha: float, beta: float) -> float:
    """ln B(alpha, beta) for alpha, beta > 0."""
    if alpha <= 0.0 or beta <= 0.0:
        raise DomainError(f"log_beta requires positive arguments, got ({alpha}, {beta})")
    return math.lgamma(alpha) + math.lgamma(beta) - math.lgamma(alpha + beta)


# Asymptotic tail coefficients B_{2n}/(2n): psi(x) ~ ln x - 1/(2x) - sum c_n / x^{2n}
_DIGAMMA_TAIL = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)


def digamma(x: float) -> float:
    """Psi(x) = d ln Gamma(x) / dx for x > 0.

    Upward recurrence onto x >= 10 followed by the asymptotic series; good to
    close to machine precision over the positive axis.
    """
    if x <= 0.0:
        raise DomainError(f"digamma requires a positive argument, got {x}")
    result = 0.0
    while x < 10.0:
        result -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    tail = 0.0
    power = inv2
    for c in _DIGAMMA_TAIL:
        tail += c * power
        power *= inv2
    return result + math.log(x) - 0.5 / x - tail


def _beta_cf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise NumericError(
        f"incomplete beta continued fraction did not converge for (a={a}, b={b}, x={x})",
        last_iterate=h,
    )


def reg_inc_beta(x: float, alpha: float, beta: float) -> float:
    """Regularized incomplete beta I_x(alpha, beta), the Beta CDF at x."""
    if alpha <= 0.0 or beta <= 0.0:
        raise DomainError(f"reg_inc_beta requires positive shapes, got ({alpha}, {beta})")
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"reg_inc_beta requires x in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        alpha * math.log(x)
        + beta * math.log1p(-x)
        - log_beta(alpha, beta)
    )
    front = math.exp(ln_front)
    if x < (alpha + 1.0) / (alpha + beta + 2.0):
        return front * _beta_cf(alpha, beta, x) / alpha
    return 1.0 - front * _beta_cf(beta, alpha, 1.0 - x) / beta


def beta_pdf(x: float, alpha: float, beta: float) -> float:
    """Density of Beta(alpha, beta) at x in (0, 1); 0 at/through the endpoints
    when the corresponding exponent is positive, +inf when it diverges."""
    if alpha <= 0.0 or beta <= 0.0:
        raise DomainError(f"beta_pdf requires positive shapes, got ({alpha}, {beta})")
    if x <= 0.0:
        if x < 0.0:
            return 0.0
        return 0.0 if alpha > 1.0 else (math.inf if alpha < 1.0 else beta)
    if x >= 1.0:
        if x > 1.0:
            return 0.0
        return 0.0 if beta > 1.0 else (math.inf if beta < 1.0 else alpha)
    return math.exp(
        (alpha - 1.0) * math.log(x)
        + (beta - 1.0) * math.log1p(-x)
        - log_beta(alpha, beta)
    )


def _inv_beta_initial_guess(p: float, a: float, b: float) -> float:
    # Abramowitz & Stegun 26.5.22; fall back to the mean for small shapes.
    if a > 1.0 and b > 1.0:
        y = std_normal_quantile(p)
        lam = (y * y - 3.0) / 6.0
        h = 2.0 / (1.0 / (2.0 * a - 1.0) + 1.0 / (2.0 * b - 1.0))
        w = (
            y * math.sqrt(lam + h) / h
            - (1.0 / (2.0 * b - 1.0) - 1.0 / (2.0 * a - 1.0))
            * (lam + 5.0 / 6.0 - 2.0 / (3.0 * h))
        )
        x = a / (a + b * math.exp(2.0 * w))
    else:
        x = a / (a + b)
    return min(max(x, 1e-12), 1.0 - 1e-12)


def reg_inc_beta_inv(
    p: float, alpha: float, beta: float, acc: Accuracy = DEFAULT_ACCURACY
) -> float:
    """x such that reg_inc_beta(x, alpha, beta) = p, by bracketed Newton.

    Endpoints map to endpoints. Raises NumericError (carrying the last
    iterate) if the bracket has not collapsed after acc.max_iter steps.
    """
    if alpha <= 0.0 or beta <= 0.0:
        raise DomainError(f"reg_inc_beta_inv requires positive shapes, got ({alpha}, {beta})")
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"reg_inc_beta_inv requires p in [0, 1], got {p}")
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0
    if alpha == 1.0 and beta == 1.0:
        return p
    if p > 0.5:
        # Solve the mirrored problem: roots near 0 resolve far better in
        # floating point than roots near 1.
        return 1.0 - reg_inc_beta_inv(1.0 - p, beta, alpha, acc)

    lo, hi = 0.0, 1.0
    x = _inv_beta_initial_guess(p, alpha, beta)
    for _ in range(acc.max_iter):
        err = reg_inc_beta(x, alpha, beta) - p
        if abs(err) <= acc.rel_tol * p:
            return x
        if err > 0.0:
            hi = x
        else:
            lo = x
        g = beta_pdf(x, alpha, beta)
        step_ok = math.isfinite(g) and g > 0.0
        if step_ok:
            x_new = x - err / g
            step_ok = lo < x_new < hi
        if not step_ok:
            x_new = 0.5 * (lo + hi)
        x = x_new
        # bracket collapsed to adjacent doubles: x is as good as it gets
        if hi - lo <= 4.5e-16 * max(hi, 1e-300):
            return x
    raise NumericError(
        f"reg_inc_beta_inv did not converge for (p={p}, alpha={alpha}, beta={beta})",
        last_iterate=x,
    )


_SQRT2 = math.sqrt(2.0)
_NORMAL = statistics.NormalDist()


def std_normal_cdf(z: float) -> float:
    """Standard normal CDF via the complementary error function."""
    return 0.5 * math.erfc(-z / _SQRT2)


def std_normal_pdf(z: float) -> float:
    return math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


def std_normal_quantile(p: float) -> float:
    """Inverse standard normal CDF for p in (0, 1)."""
    if not (0.0 < p < 1.0):
        raise DomainError(f"std_normal_quantile requires p in (0, 1), got {p}")
    return _NORMAL.inv_cdf(p)
