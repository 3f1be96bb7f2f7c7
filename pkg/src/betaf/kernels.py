"""Kernel distributions F(.; theta_f) that get composed with the beta layer.

Seven families: power on [0,b], Burr on [0,inf), normal, scaled Student-t on
2 df, four-parameter logistic, exponential, and Weibull in the rate form
F(x) = 1 - exp(-a x^b). Each provides the CDF, density, quantile, and the
gradient of the CDF with respect to its own parameters.

The scaled-t family carries no parameters of its own: its two constants are
tied to the beta shapes (alpha, beta), so its CDF takes them from theta_g and
its parameter gradient is empty.
"""
from __future__ import annotations

import enum
import math
from typing import TYPE_CHECKING

from .errors import DomainError
from .specfun import std_normal_cdf, std_normal_pdf, std_normal_quantile

if TYPE_CHECKING:
    from .family import BetaShapes

ThetaF = tuple[float, ...]


class KernelFamily(enum.Enum):
    """Tags for the supported kernel CDFs; values double as CLI names."""

    GB1_POWER = "gb1"
    GB2_BURR = "gb2"
    NORMAL = "bn"
    SCALED_T2 = "skewt"
    LOGISTIC4 = "logf"
    EXPONENTIAL = "be"
    WEIBULL = "bw"

    @classmethod
    def from_name(cls, name: str) -> "KernelFamily":
        try:
            return cls(name.lower())
        except ValueError:
            valid = ", ".join(f.value for f in cls)
            raise DomainError(f"unknown family {name!r}; valid names: {valid}") from None


# Per-family parameter names, in theta_f order.
PARAM_NAMES: dict[KernelFamily, tuple[str, ...]] = {
    KernelFamily.GB1_POWER: ("a", "b"),
    KernelFamily.GB2_BURR: ("a", "b"),
    KernelFamily.NORMAL: ("mu", "sigma"),
    KernelFamily.SCALED_T2: (),
    KernelFamily.LOGISTIC4: ("a", "b"),
    KernelFamily.EXPONENTIAL: ("a",),
    KernelFamily.WEIBULL: ("a", "b"),
}

# Which theta_f entries must be strictly positive (by index).
_POSITIVE: dict[KernelFamily, tuple[int, ...]] = {
    KernelFamily.GB1_POWER: (0, 1),
    KernelFamily.GB2_BURR: (0, 1),
    KernelFamily.NORMAL: (1,),
    KernelFamily.SCALED_T2: (),
    KernelFamily.LOGISTIC4: (1,),
    KernelFamily.EXPONENTIAL: (0,),
    KernelFamily.WEIBULL: (0, 1),
}


def arity(family: KernelFamily) -> int:
    return len(PARAM_NAMES[family])


def validate_theta(family: KernelFamily, theta_f: ThetaF) -> None:
    """Raise DomainError unless theta_f is a valid parameter vector."""
    names = PARAM_NAMES[family]
    if len(theta_f) != len(names):
        raise DomainError(
            f"{family.value} takes {len(names)} kernel parameters "
            f"({', '.join(names) or 'none'}), got {len(theta_f)}"
        )
    for idx in _POSITIVE[family]:
        v = theta_f[idx]
        if not (v > 0.0) or not math.isfinite(v):
            raise DomainError(f"{family.value} parameter {names[idx]} must be positive, got {v}")
    for name, v in zip(names, theta_f):
        if not math.isfinite(v):
            raise DomainError(f"{family.value} parameter {name} must be finite, got {v}")


def support(family: KernelFamily, theta_f: ThetaF) -> tuple[float, float]:
    """Closed support (lower, upper) of the kernel; ends may be infinite."""
    if family is KernelFamily.GB1_POWER:
        return 0.0, theta_f[1]
    if family in (KernelFamily.GB2_BURR, KernelFamily.EXPONENTIAL, KernelFamily.WEIBULL):
        return 0.0, math.inf
    return -math.inf, math.inf


def _t2_scale(theta_g: "BetaShapes") -> float:
    # skew-t constants a, b are the beta shapes themselves
    return theta_g.alpha + theta_g.beta


def kernel_cdf(family: KernelFamily, theta_f: ThetaF, theta_g: "BetaShapes", x: float) -> float:
    """F(x); values below the support map to 0, above to 1."""
    validate_theta(family, theta_f)
    lo, hi = support(family, theta_f)
    if x <= lo:
        return 0.0
    if x >= hi:
        return 1.0

    if family is KernelFamily.GB1_POWER:
        a, b = theta_f
        return (x / b) ** a
    if family is KernelFamily.GB2_BURR:
        a, b = theta_f
        u = (x / b) ** a
        return u / (1.0 + u)
    if family is KernelFamily.NORMAL:
        mu, sigma = theta_f
        return std_normal_cdf((x - mu) / sigma)
    if family is KernelFamily.SCALED_T2:
        c = _t2_scale(theta_g)
        return 0.5 * (1.0 + x / math.sqrt(c + x * x))
    if family is KernelFamily.LOGISTIC4:
        a, b = theta_f
        z = (x - a) / b
        if z >= 0.0:
            return 1.0 / (1.0 + math.exp(-z))
        ez = math.exp(z)
        return ez / (1.0 + ez)
    if family is KernelFamily.EXPONENTIAL:
        (a,) = theta_f
        return -math.expm1(-a * x)
    if family is KernelFamily.WEIBULL:
        a, b = theta_f
        return -math.expm1(-a * x**b)
    raise AssertionError(family)


def kernel_sf(family: KernelFamily, theta_f: ThetaF, theta_g: "BetaShapes", x: float) -> float:
    """Survival function 1 - F(x), computed without cancellation in the
    upper tail (where 1 - kernel_cdf would round to 0 long before the mass
    actually vanishes)."""
    validate_theta(family, theta_f)
    lo, hi = support(family, theta_f)
    if x <= lo:
        return 1.0
    if x >= hi:
        return 0.0

    if family is KernelFamily.GB1_POWER:
        a, b = theta_f
        return -math.expm1(a * math.log(x / b))
    if family is KernelFamily.GB2_BURR:
        a, b = theta_f
        return 1.0 / (1.0 + (x / b) ** a)
    if family is KernelFamily.NORMAL:
        mu, sigma = theta_f
        return std_normal_cdf(-(x - mu) / sigma)
    if family is KernelFamily.SCALED_T2:
        c = _t2_scale(theta_g)
        root = math.sqrt(c + x * x)
        return 0.5 * c / (root * (root + x)) if x >= 0.0 else 1.0 - kernel_cdf(family, theta_f, theta_g, x)
    if family is KernelFamily.LOGISTIC4:
        a, b = theta_f
        z = (x - a) / b
        if z <= 0.0:
            return 1.0 / (1.0 + math.exp(z))
        ez = math.exp(-z)
        return ez / (1.0 + ez)
    if family is KernelFamily.EXPONENTIAL:
        (a,) = theta_f
        return math.exp(-a * x)
    if family is KernelFamily.WEIBULL:
        a, b = theta_f
        return math.exp(-a * x**b)
    raise AssertionError(family)


def kernel_pdf(family: KernelFamily, theta_f: ThetaF, theta_g: "BetaShapes", x: float) -> float:
    """f(x) = dF/dx; 0 outside the support."""
    validate_theta(family, theta_f)
    lo, hi = support(family, theta_f)
    if x < lo or x > hi:
        return 0.0

    if family is KernelFamily.GB1_POWER:
        a, b = theta_f
        if x == 0.0:
            return a / b if a == 1.0 else (math.inf if a < 1.0 else 0.0)
        return a * x ** (a - 1.0) / b**a
    if family is KernelFamily.GB2_BURR:
        a, b = theta_f
        if x == 0.0:
            return a / b if a == 1.0 else (math.inf if a < 1.0 else 0.0)
        u = (x / b) ** a
        return a * u / (x * (1.0 + u) ** 2)
    if family is KernelFamily.NORMAL:
        mu, sigma = theta_f
        return std_normal_pdf((x - mu) / sigma) / sigma
    if family is KernelFamily.SCALED_T2:
        c = _t2_scale(theta_g)
        return 0.5 * c / (c + x * x) ** 1.5
    if family is KernelFamily.LOGISTIC4:
        a, b = theta_f
        z = abs(x - a) / b
        ez = math.exp(-z)
        return ez / (b * (1.0 + ez) ** 2)
    if family is KernelFamily.EXPONENTIAL:
        (a,) = theta_f
        return a * math.exp(-a * x)
    if family is KernelFamily.WEIBULL:
        a, b = theta_f
        if x == 0.0:
            return a if b == 1.0 else (math.inf if b < 1.0 else 0.0)
        return a * b * x ** (b - 1.0) * math.exp(-a * x**b)
    raise AssertionError(family)


def kernel_quantile(family: KernelFamily, theta_f: ThetaF, theta_g: "BetaShapes", p: float) -> float:
    """F^{-1}(p) for p in (0, 1); p in {0, 1} returns a finite support end
    when one exists and raises DomainError otherwise."""
    validate_theta(family, theta_f)
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"kernel_quantile requires p in [0, 1], got {p}")
    if p == 0.0 or p == 1.0:
        lo, hi = support(family, theta_f)
        end = lo if p == 0.0 else hi
        if math.isfinite(end):
            return end
        raise DomainError(f"quantile at p={p} is infinite for {family.value}")

    if family is KernelFamily.GB1_POWER:
        a, b = theta_f
        return b * p ** (1.0 / a)
    if family is KernelFamily.GB2_BURR:
        a, b = theta_f
        return b * (p / (1.0 - p)) ** (1.0 / a)
    if family is KernelFamily.NORMAL:
        mu, sigma = theta_f
        return mu + sigma * std_normal_quantile(p)
    if family is KernelFamily.SCALED_T2:
        c = _t2_scale(theta_g)
        s = 2.0 * p - 1.0
        return s * math.sqrt(c / (1.0 - s * s))
    if family is KernelFamily.LOGISTIC4:
        a, b = theta_f
        return a + b * math.log(p / (1.0 - p))
    if family is KernelFamily.EXPONENTIAL:
        (a,) = theta_f
        return -math.log1p(-p) / a
    if family is KernelFamily.WEIBULL:
        a, b = theta_f
        return (-math.log1p(-p) / a) ** (1.0 / b)
    raise AssertionError(family)


def kernel_quantile_upper(family: KernelFamily, theta_f: ThetaF, theta_g: "BetaShapes", q: float) -> float:
    """F^{-1}(1 - q) computed stably from the upper-tail probability q.

    Equivalent to kernel_quantile at p = 1 - q but keeps full precision when
    q underflows the spacing of doubles near 1.
    """
    validate_theta(family, theta_f)
    if not (0.0 <= q <= 1.0):
        raise DomainError(f"kernel_quantile_upper requires q in [0, 1], got {q}")
    if q == 0.0 or q == 1.0:
        lo, hi = support(family, theta_f)
        end = hi if q == 0.0 else lo
        if math.isfinite(end):
            return end
        raise DomainError(f"upper quantile at q={q} is infinite for {family.value}")

    if family is KernelFamily.GB1_POWER:
        a, b = theta_f
        return b * (1.0 - q) ** (1.0 / a)
    if family is KernelFamily.GB2_BURR:
        a, b = theta_f
        return b * ((1.0 - q) / q) ** (1.0 / a)
    if family is KernelFamily.NORMAL:
        mu, sigma = theta_f
        return mu - sigma * std_normal_quantile(q)
    if family is KernelFamily.SCALED_T2:
        c = _t2_scale(theta_g)
        s = 1.0 - 2.0 * q
        return s * math.sqrt(c / (4.0 * q * (1.0 - q)))
    if family is KernelFamily.LOGISTIC4:
        a, b = theta_f
        return a + b * math.log((1.0 - q) / q)
    if family is KernelFamily.EXPONENTIAL:
        (a,) = theta_f
        return -math.log(q) / a
    if family is KernelFamily.WEIBULL:
        a, b = theta_f
        return (-math.log(q) / a) ** (1.0 / b)
    raise AssertionError(family)


def kernel_cdf_grad(family: KernelFamily, theta_f: ThetaF, theta_g: "BetaShapes", x: float) -> tuple[float, ...]:
    """dF(x)/d theta_f, one entry per kernel parameter.

    Zero outside the open support interior, where F is constant in theta_f.
    """
    validate_theta(family, theta_f)
    n = arity(family)
    lo, hi = support(family, theta_f)
    if x <= lo or x >= hi:
        return (0.0,) * n

    if family is KernelFamily.GB1_POWER:
        a, b = theta_f
        u = (x / b) ** a
        return (u * math.log(x / b), -a * u / b)
    if family is KernelFamily.GB2_BURR:
        a, b = theta_f
        u = (x / b) ** a
        denom = (1.0 + u) ** 2
        return (u * math.log(x / b) / denom, -a * u / (b * denom))
    if family is KernelFamily.NORMAL:
        mu, sigma = theta_f
        z = (x - mu) / sigma
        phi = std_normal_pdf(z)
        return (-phi / sigma, -z * phi / sigma)
    if family is KernelFamily.SCALED_T2:
        return ()
    if family is KernelFamily.LOGISTIC4:
        a, b = theta_f
        f = kernel_pdf(family, theta_f, theta_g, x)
        return (-f, -(x - a) / b * f)
    if family is KernelFamily.EXPONENTIAL:
        (a,) = theta_f
        return (x * math.exp(-a * x),)
    if family is KernelFamily.WEIBULL:
        a, b = theta_f
        xb = x**b
        e = math.exp(-a * xb)
        return (xb * e, a * xb * math.log(x) * e)
    raise AssertionError(family)
