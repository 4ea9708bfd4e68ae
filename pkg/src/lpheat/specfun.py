r"""Special functions used by the heat kernels.

Everything here works on real scalars and is written to avoid overflow in
the regimes the kernels hit: the modified Bessel function is only ever
returned with its exponential growth removed, :math:`e^{-z} I_\nu(z)`, and
its logarithm is available directly so that callers can stay in log-space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

from .exceptions import DomainError, NonConvergenceError

__all__ = [
    "SpecFunConfig",
    "DEFAULT_CONFIG",
    "log_gamma",
    "bessel_i_scaled",
    "log_bessel_i_scaled",
    "bessel_i_series_scaled",
    "hyp1f1",
    "log_hyp1f1",
    "laguerre_poly_normalized",
    "log_abs_laguerre_poly_normalized",
    "prud_integral_rhs",
    "log_prud_integral_rhs",
    "prud_integral_check",
]

_LN_2PI = math.log(2.0 * math.pi)
# Rescaling thresholds for recurrences that would otherwise overflow.
_BIG = 2.0 ** 500
_BIG_LOG = 500.0 * math.log(2.0)


@dataclass(frozen=True)
class SpecFunConfig:
    """Tolerances shared by the series evaluations.

    ``asymptotic_switch_z=None`` means the order-dependent default
    ``30 * max(1, nu**2)``.
    """

    series_tol: float = 1e-14
    max_terms: int = 10000
    asymptotic_switch_z: Optional[float] = None

    def __post_init__(self):
        if not (0.0 < self.series_tol < 1e-6):
            raise DomainError("series_tol must lie in (0, 1e-6)")
        if self.max_terms < 100:
            raise DomainError("max_terms must be at least 100")
        if self.asymptotic_switch_z is not None and not self.asymptotic_switch_z > 0:
            raise DomainError("asymptotic_switch_z must be positive")

    def switch_for(self, nu: float) -> float:
        if self.asymptotic_switch_z is not None:
            return self.asymptotic_switch_z
        return 30.0 * max(1.0, nu * nu)


DEFAULT_CONFIG = SpecFunConfig()


def log_gamma(x: float) -> float:
    """Natural logarithm of the gamma function for ``x > 0``."""
    if not x > 0:
        raise DomainError(f"log_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


# ---------------------------------------------------------------------------
# modified Bessel function of the first kind

def _stirling_tail(x: float) -> float:
    # lgamma(x) - [(x - 1/2) ln x - x + ln(2 pi)/2], valid for x >= 20
    x2 = x * x
    return (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * x2)) / x2) / x2) / x


def _log_series_term(nu: float, k: int, z: float) -> float:
    """ln of (z/2)^(nu+2k) / (k! Gamma(nu+k+1)) * e^{-z}."""
    m = k + 1.0
    n = k + nu + 1.0
    if m >= 20.0 and n >= 20.0:
        # Stirling form: the O(z) pieces cancel analytically instead of in
        # floating point.
        return ((m - 0.5) * math.log1p((z - 2.0 * m) / (2.0 * m))
                + (n - 0.5) * math.log1p((z - 2.0 * n) / (2.0 * n))
                - math.log(0.5 * z)
                + ((2.0 * k + 2.0 - z) + nu)
                - _LN_2PI - _stirling_tail(m) - _stirling_tail(n))
    return ((nu + 2.0 * k) * math.log(0.5 * z) - math.lgamma(m)
            - math.lgamma(n) - z)


def _log_bessel_series(nu: float, z: float, config: SpecFunConfig) -> float:
    q = 0.25 * z * z
    # the largest term sits where (k+1)(k+nu+1) ~ z^2/4
    kpeak = 0.5 * (math.sqrt(nu * nu + z * z) - (nu + 2.0))
    k0 = max(0, int(round(kpeak)))
    log_t0 = _log_series_term(nu, k0, z)
    tol = config.series_tol
    total = 1.0
    term = 1.0
    k = k0
    count = 0
    while True:
        term *= q / ((k + 1.0) * (k + nu + 1.0))
        k += 1
        total += term
        count += 1
        if term < tol * total:
            break
        if count > config.max_terms:
            raise NonConvergenceError(f"Bessel series did not converge (nu={nu}, z={z})")
    term = 1.0
    k = k0
    while k > 0:
        term *= (k * (k + nu)) / q
        k -= 1
        total += term
        count += 1
        if term < tol * total:
            break
        if count > config.max_terms:
            raise NonConvergenceError(f"Bessel series did not converge (nu={nu}, z={z})")
    return log_t0 + math.log(total)


def _log_bessel_hankel(nu: float, z: float, config: SpecFunConfig) -> float:
    mu = 4.0 * nu * nu
    total = 1.0
    term = 1.0
    prev = math.inf
    for k in range(1, config.max_terms):
        term *= -(mu - (2 * k - 1) ** 2) / (8.0 * k * z)
        a = abs(term)
        if a == 0.0:
            break
        if a > prev:
            # asymptotic series started to diverge; stop at its smallest term
            break
        total += term
        if a < config.series_tol * abs(total):
            break
        prev = a
    else:
        raise NonConvergenceError(f"Hankel expansion did not converge (nu={nu}, z={z})")
    return math.log(total) - 0.5 * math.log(2.0 * math.pi * z)


def log_bessel_i_scaled(nu: float, z: float, config: SpecFunConfig = DEFAULT_CONFIG) -> float:
    r"""Logarithm of :math:`e^{-z} I_\nu(z)`.

    Uses the power series (summed outward from its largest term) below the
    switch point and the Hankel large-argument expansion above it.
    Returns ``-inf``/``inf`` at ``z == 0`` for positive/negative order.
    """
    if not nu > -1.0:
        raise DomainError(f"Bessel order must exceed -1, got {nu!r}")
    if not z >= 0.0:
        raise DomainError(f"Bessel argument must be nonnegative, got {z!r}")
    if z == 0.0:
        if nu == 0.0:
            return 0.0
        return -math.inf if nu > 0 else math.inf
    if math.isinf(z):
        return -math.inf
    if z >= config.switch_for(nu):
        return _log_bessel_hankel(nu, z, config)
    return _log_bessel_series(nu, z, config)


def bessel_i_scaled(nu: float, z: float, config: SpecFunConfig = DEFAULT_CONFIG) -> float:
    r"""Exponentially scaled modified Bessel function :math:`e^{-z} I_\nu(z)`.

    Parameters
    ----------
    nu : float
        Order, ``nu > -1``.
    z : float
        Argument, ``z >= 0``. At ``z = 0`` the value is 1 for ``nu = 0``,
        0 for ``nu > 0`` and ``inf`` for ``-1 < nu < 0``.
    config : SpecFunConfig, optional

    Returns
    -------
    float
    """
    return math.exp(log_bessel_i_scaled(nu, z, config))


def bessel_i_series_scaled(nu: float, z: float, tol: float = 1e-16,
                           max_terms: int = 200000) -> float:
    """Plain power series for e^{-z} I_nu(z), summed from k = 0.

    Kept as an independent reference path for moderate ``z``; it makes no
    attempt to be fast or to cope with ``z`` in the thousands.
    """
    if not nu > -1.0 or not z > 0.0:
        raise DomainError("bessel_i_series_scaled needs nu > -1 and z > 0")
    log_t = nu * math.log(0.5 * z) - math.lgamma(nu + 1.0) - z
    # accumulate with a running shift so that large z does not overflow
    shift = log_t
    total = 0.0
    q = 0.25 * z * z
    term_log = log_t
    for k in range(max_terms):
        rel = math.exp(term_log - shift)
        if rel > 1e200:
            total *= math.exp(shift - term_log)
            shift = term_log
            rel = 1.0
        total += rel
        if k > 0.5 * z and rel < tol * total:
            return math.exp(shift + math.log(total))
        term_log += math.log(q / ((k + 1.0) * (k + nu + 1.0)))
    raise NonConvergenceError("reference Bessel series did not converge")


# ---------------------------------------------------------------------------
# confluent hypergeometric function

def _is_nonpositive_integer(b: float) -> bool:
    return b <= 0 and b == math.floor(b)


def _hyp1f1_series_log(a: float, b: float, z: float, config: SpecFunConfig) -> Tuple[float, float]:
    """(ln|S|, sign S) for the Kummer series S = sum (a)_k/(b)_k z^k/k!."""
    scale = 0.0
    total = 1.0
    term = 1.0
    for k in range(config.max_terms):
        term *= (a + k) * z / ((b + k) * (k + 1.0))
        total += term
        if abs(total) > _BIG:
            total /= _BIG
            term /= _BIG
            scale += _BIG_LOG
        if term == 0.0:
            break
        # only trust the stopping test once the terms are decreasing
        ratio = abs((a + k + 1.0) * z / ((b + k + 1.0) * (k + 2.0)))
        if ratio < 1.0 and abs(term) <= config.series_tol * abs(total):
            break
    else:
        raise NonConvergenceError(f"1F1 series did not converge (a={a}, b={b}, z={z})")
    if total == 0.0:
        return -math.inf, 0.0
    return scale + math.log(abs(total)), math.copysign(1.0, total)


def log_hyp1f1(a: float, b: float, z: float, config: SpecFunConfig = DEFAULT_CONFIG) -> Tuple[float, float]:
    """Return ``(ln|1F1(a;b;z)|, sign)``.

    Negative arguments go through Kummer's transformation
    ``1F1(a;b;z) = e^z 1F1(b-a;b;-z)`` so the series is always summed at a
    nonnegative argument.
    """
    if _is_nonpositive_integer(b):
        raise DomainError(f"1F1 is undefined for b = {b!r}")
    if z == 0.0:
        return 0.0, 1.0
    if z < 0.0:
        log_abs, sign = _hyp1f1_series_log(b - a, b, -z, config)
        return log_abs + z, sign
    return _hyp1f1_series_log(a, b, z, config)


def hyp1f1(a: float, b: float, z: float, config: SpecFunConfig = DEFAULT_CONFIG) -> float:
    """Confluent hypergeometric (Kummer) function 1F1(a; b; z).

    Returns ``inf`` (with the appropriate sign) if the value overflows.
    """
    log_abs, sign = log_hyp1f1(a, b, z, config)
    if log_abs > 709.78:
        return sign * math.inf
    return sign * math.exp(log_abs)


# ---------------------------------------------------------------------------
# Laguerre polynomials

def log_abs_laguerre_poly_normalized(k: int, alpha: float, x: float) -> Tuple[float, float]:
    """(ln|l_k^alpha(x)|, sign) for the normalized Laguerre polynomial.

    The three-term recurrence runs with a tracked power-of-two scale, so
    intermediate values never overflow even when the polynomial itself is
    far outside double range.
    """
    if not alpha > -1.0:
        raise DomainError(f"Laguerre order must exceed -1, got {alpha!r}")
    if k < 0 or int(k) != k:
        raise DomainError(f"degree must be a nonnegative integer, got {k!r}")
    k = int(k)
    log_norm = 0.5 * (math.lgamma(k + 1.0) - math.lgamma(k + alpha + 1.0))
    prev, cur = 0.0, 1.0
    scale = 0.0
    for n in range(k):
        prev, cur = cur, ((2 * n + alpha + 1.0 - x) * cur - (n + alpha) * prev) / (n + 1.0)
        if abs(cur) > _BIG:
            cur /= _BIG
            prev /= _BIG
            scale += _BIG_LOG
    if cur == 0.0:
        return -math.inf, 0.0
    return log_norm + scale + math.log(abs(cur)), math.copysign(1.0, cur)


def laguerre_poly_normalized(k: int, alpha: float, x: float) -> float:
    r"""Normalized Laguerre polynomial
    :math:`\sqrt{k!/\Gamma(k+\alpha+1)}\,L_k^\alpha(x)`.
    """
    log_abs, sign = log_abs_laguerre_poly_normalized(k, alpha, x)
    if log_abs > 709.78:
        return sign * math.inf
    return sign * math.exp(log_abs)


# ---------------------------------------------------------------------------
# Gaussian-Bessel integral

def _check_prud(p, q, beta, nu):
    if not (p > 0 and q > 0):
        raise DomainError("p and q must be positive")
    if not nu > -1.0:
        raise DomainError("nu must exceed -1")
    if not beta + nu > 0:
        raise DomainError("beta + nu must be positive")


def log_prud_integral_rhs(p: float, q: float, beta: float, nu: float,
                          config: SpecFunConfig = DEFAULT_CONFIG) -> float:
    """Logarithm of :func:`prud_integral_rhs` (the integral is positive)."""
    _check_prud(p, q, beta, nu)
    s = 0.5 * (beta + nu)
    log_f, _ = log_hyp1f1(s, nu + 1.0, q * q / (4.0 * p), config)
    return (nu * math.log(q) - (nu + 1.0) * math.log(2.0) - s * math.log(p)
            + math.lgamma(s) - math.lgamma(nu + 1.0) + log_f)


def prud_integral_rhs(p: float, q: float, beta: float, nu: float,
                      config: SpecFunConfig = DEFAULT_CONFIG) -> float:
    r"""Closed form of :math:`\int_0^\infty y^{\beta-1} e^{-py^2} I_\nu(qy)\,dy`.

    .. math::
        \frac{q^\nu}{2^{\nu+1} p^{(\beta+\nu)/2}}
        \frac{\Gamma((\beta+\nu)/2)}{\Gamma(\nu+1)}
        {}_1F_1\Big(\frac{\beta+\nu}{2}; \nu+1; \frac{q^2}{4p}\Big)
    """
    log_val = log_prud_integral_rhs(p, q, beta, nu, config)
    return math.inf if log_val > 709.78 else math.exp(log_val)


def prud_integral_check(p: float, q: float, beta: float, nu: float, quad=None,
                        config: SpecFunConfig = DEFAULT_CONFIG) -> float:
    """Relative residual between quadrature and closed form of the
    Gaussian-Bessel integral, ``|lhs - rhs| / max(1, |rhs|)``.

    Both sides are compared through their logarithms, so values beyond
    double range are handled. ``quad`` is a
    :class:`~lpheat.quadrature.QuadratureRule`; the default rule is used
    when omitted.
    """
    from .quadrature import QuadratureRule, log_integrate

    _check_prud(p, q, beta, nu)
    if quad is None:
        quad = QuadratureRule()

    def log_integrand(y):
        return ((beta - 1.0) * math.log(y) - p * y * y + q * y
                + log_bessel_i_scaled(nu, q * y, config))

    scale = max(q / (2.0 * p), 1.0 / math.sqrt(p))
    log_lhs = log_integrate(log_integrand, quad, scale=scale)
    log_rhs = log_prud_integral_rhs(p, q, beta, nu, config)
    # |lhs - rhs| / max(1, rhs) = |expm1(log_lhs - log_rhs)| * min(rhs, 1)
    return abs(math.expm1(log_lhs - log_rhs)) * math.exp(min(log_rhs, 0.0))
