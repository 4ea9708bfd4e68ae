r"""The contractivity gauge

.. math::
    H_{\eta,\gamma}(u) = \frac{\Gamma(\eta)}{\Gamma(\gamma)} u^{\gamma-\eta}
        e^{-u}\, {}_1F_1(\eta; \gamma; u), \qquad \gamma \ge \eta > 0,

which is the one-dimensional value of ``T_t 1`` for most of the semigroups
up to elementary factors. Whether its supremum is 1 or exceeds 1 decides
contractivity.

For ``eta < gamma`` the function is evaluated through

.. math::
    H(u) = \frac{1}{\Gamma(\gamma-\eta)} \int_0^u s^{\gamma-\eta-1} e^{-s}
        (1 - s/u)^{\eta-1}\, ds,

which has no cancellation for any ``u``; both endpoint singularities are
absorbed by a tanh-sinh rule whose node distances to each endpoint are
computed directly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple, Union

import numpy as np

from .exceptions import DomainError, InconsistencyError
from .specfun import DEFAULT_CONFIG, log_hyp1f1

__all__ = [
    "AT_INFINITY",
    "HParams",
    "HClassification",
    "h_eval",
    "h_eval_hyp1f1",
    "h_log_deficit",
    "h_sup",
    "h_classify",
]

AT_INFINITY = "at infinity"

_N_NODES = 400
_T_EXTENT = 6.0
SUP_GRID = (1e-8, 1e8, 2000)
# excess over the tail limit that is attributed to rounding
_ROUNDING = 1e-12


@dataclass(frozen=True)
class HParams:
    """Parameters of the gauge, ``gamma >= eta > 0``."""

    eta: float
    gamma: float

    def __post_init__(self):
        if not (self.eta > 0 and self.gamma >= self.eta):
            raise DomainError(
                f"need gamma >= eta > 0, got eta={self.eta!r}, gamma={self.gamma!r}")
        if not (math.isfinite(self.eta) and math.isfinite(self.gamma)):
            raise DomainError("eta and gamma must be finite")

    @property
    def gap(self) -> float:
        return self.gamma - self.eta


@dataclass(frozen=True)
class HClassification:
    kind: str  # "Identity", "SupOne" or "Exceeds"
    sup_value: float
    argmax_u: Union[float, str]
    threshold_u0: Optional[float] = None


@lru_cache(maxsize=256)
def _nodes(t_left: float, t_right: float):
    """Tanh-sinh rule on (0, 1): (ln sigma, ln(1 - sigma), sigma, ln w)."""
    h = 2.0 * _T_EXTENT / _N_NODES
    tau = h * np.arange(-math.ceil(t_left / h), math.ceil(t_right / h) + 1, dtype=float)
    q = 0.5 * math.pi * np.sinh(tau)
    # sigma = 1 / (1 + e^{-2q}),  1 - sigma = 1 / (1 + e^{2q})
    log_sig = -np.logaddexp(0.0, -2.0 * q)
    log_comp = -np.logaddexp(0.0, 2.0 * q)
    aq = np.abs(q)
    log_cosh_q = aq + np.log1p(np.exp(-2.0 * aq)) - math.log(2.0)
    log_cosh_t = np.abs(tau) + np.log1p(np.exp(-2.0 * np.abs(tau))) - math.log(2.0)
    log_w = math.log(h * 0.25 * math.pi) + log_cosh_t - 2.0 * log_cosh_q
    return log_sig, log_comp, np.exp(log_sig), log_w


def _extent(power: float) -> float:
    # endpoint mass behaves like dist**power; reach dist with power*ln(dist) < -60
    if power >= 1.0:
        return _T_EXTENT
    need = 30.0 / (0.5 * math.pi * power)
    return max(_T_EXTENT, math.asinh(need) + 0.1)


def _cut(gap: float) -> float:
    # s^{gap-1} e^{-s} beyond this point is negligible against Gamma(gap)
    return 60.0 + 5.0 * gap


def _check_u(u):
    u_arr = np.asarray(u, dtype=float)
    if not np.all(u_arr > 0) or not np.all(np.isfinite(u_arr)):
        raise DomainError("H is evaluated at finite u > 0 only")
    return u_arr


def _log_integrand_terms(params: HParams, u_arr: np.ndarray):
    """Per-node quantities on the (possibly truncated) interval [0, L]."""
    a = params.gap
    cut = _cut(a)
    log_sig_n, log_comp_n, sig_n, log_w_n = _nodes(
        round(_extent(a), 3), round(_extent(min(params.eta, 1.0)), 3))
    full = u_arr <= 2.0 * cut
    length = np.where(full, u_arr, cut)[:, None]
    log_len = np.log(length)
    log_s = log_len + log_sig_n[None, :]
    s = length * sig_n[None, :]
    # ln(1 - s/u): exact complement on the full interval, log1p otherwise
    with np.errstate(divide="ignore"):
        log_one_minus = np.where(full[:, None], log_comp_n[None, :],
                                 np.log1p(-s / u_arr[:, None]))
    base = log_w_n[None, :] + log_len + (a - 1.0) * log_s - s
    return base, log_one_minus


def _rowwise_logsumexp(v: np.ndarray) -> np.ndarray:
    m = np.max(v, axis=1)
    m_safe = np.where(np.isfinite(m), m, 0.0)
    return m_safe + np.log(np.sum(np.exp(v - m_safe[:, None]), axis=1))


def h_eval(params: HParams, u):
    """H_{eta,gamma}(u) for scalar or array ``u > 0``.

    Exactly 1 when ``eta == gamma``.
    """
    u_arr = _check_u(u)
    if params.eta == params.gamma:
        out = np.ones_like(u_arr)
        return float(out) if out.ndim == 0 else out
    flat = np.atleast_1d(u_arr).ravel()
    base, log_one_minus = _log_integrand_terms(params, flat)
    terms = base + (params.eta - 1.0) * log_one_minus
    out = np.exp(_rowwise_logsumexp(terms) - math.lgamma(params.gap))
    if params.eta >= 1.0:
        # near 1, go through the deficit so that rounding cannot push H past 1
        near = out > 0.5
        if np.any(near):
            out[near] = -np.expm1(np.atleast_1d(h_log_deficit(params, flat[near])))
    out = out.reshape(u_arr.shape)
    return float(out) if out.ndim == 0 else out


def h_eval_hyp1f1(params: HParams, u: float, config=DEFAULT_CONFIG) -> float:
    """Same function through its 1F1 definition (independent path, for
    moderate ``u``)."""
    if not u > 0:
        raise DomainError("u must be positive")
    eta, gamma = params.eta, params.gamma
    log_f, sign = log_hyp1f1(eta, gamma, u, config)
    return sign * math.exp(math.lgamma(eta) - math.lgamma(gamma)
                           + (gamma - eta) * math.log(u) - u + log_f)


def _log_upper_gamma_q(a: float, x: float) -> float:
    """ln Q(a, x), the regularized upper incomplete gamma function."""
    lg = math.lgamma(a)
    if x < a + 1.0:
        # series for P, then Q = 1 - P (no severe cancellation here)
        term = 1.0 / a
        total = term
        n = a
        for _ in range(10000):
            n += 1.0
            term *= x / n
            total += term
            if abs(term) < abs(total) * 1e-17:
                break
        log_p = math.log(total) - x + a * math.log(x) - lg
        return math.log(-math.expm1(log_p))
    # modified Lentz continued fraction for Q
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.log(h) - x + a * math.log(x) - lg


def h_log_deficit(params: HParams, u) -> np.ndarray:
    """ln(1 - H(u)) for ``eta >= 1``, ``eta < gamma``.

    Computed without forming ``1 - H`` so that the strict inequality
    ``H < 1`` stays visible where ``H`` rounds to 1 in double precision.
    """
    if params.eta < 1.0 or params.eta == params.gamma:
        raise DomainError("the deficit form needs eta >= 1 and eta < gamma")
    u_arr = _check_u(u)
    flat = np.atleast_1d(u_arr).ravel()
    a = params.gap
    log_q = np.array([_log_upper_gamma_q(a, float(x)) for x in flat])
    if params.eta == 1.0:
        out = log_q
    else:
        base, log_one_minus = _log_integrand_terms(params, flat)
        with np.errstate(divide="ignore"):
            log_d = np.log(-np.expm1((params.eta - 1.0) * log_one_minus))
        log_a = _rowwise_logsumexp(base + log_d) - math.lgamma(a)
        out = np.logaddexp(log_a, log_q)
    out = out.reshape(u_arr.shape)
    return float(out) if out.ndim == 0 else out


def _golden_max(f, lo: float, hi: float, rel_width: float = 1e-10, max_iter: int = 300) -> float:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if (b - a) <= rel_width * abs(b):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _sup_grid():
    lo, hi, n = SUP_GRID
    return np.geomspace(lo, hi, n)


def h_sup(params: HParams) -> Tuple[float, Union[float, str]]:
    """Supremum of H over (0, inf) and where it is reached.

    A geometric grid is refined by golden-section search around its best
    point; the tail limit 1 (approached as u -> inf) competes with it.
    """
    if params.eta == params.gamma:
        return 1.0, AT_INFINITY
    grid = _sup_grid()
    vals = h_eval(params, grid)
    i = int(np.argmax(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    u_star = _golden_max(lambda v: h_eval(params, v), lo, hi)
    best = max(float(vals[i]), h_eval(params, u_star))
    if best <= 1.0 + _ROUNDING:
        return 1.0, AT_INFINITY
    if h_eval(params, u_star) < vals[i]:
        u_star = float(grid[i])
    return best, u_star


def h_classify(params: HParams, tol: float = 1e-6) -> HClassification:
    """Identity / SupOne / Exceeds, with numerical evidence for each.

    Raises
    ------
    InconsistencyError
        If the evidence does not match the class predicted from
        ``eta == gamma`` and ``eta >= 1``.
    """
    if not 0 < tol <= 1e-4:
        raise DomainError("tol must lie in (0, 1e-4]")
    if params.eta == params.gamma:
        return HClassification("Identity", 1.0, AT_INFINITY, None)
    grid = _sup_grid()
    vals = h_eval(params, grid)
    sup, arg = h_sup(params)
    if params.eta >= 1.0:
        tail = h_eval(params, grid[-1])
        if not (np.max(vals) <= 1.0 + tol and tail >= 1.0 - 1e-3):
            raise InconsistencyError(
                f"H{params} should have supremum 1: grid max {np.max(vals)!r}, "
                f"H(1e8) = {tail!r}")
        return HClassification("SupOne", sup, AT_INFINITY, None)
    above = vals > 1.0
    if not (sup >= 1.0 + tol and above[-1]):
        raise InconsistencyError(
            f"H{params} should exceed 1: sup {sup!r}, H(1e8) = {vals[-1]!r}")
    below = np.nonzero(~above)[0]
    i0 = int(below[-1]) + 1 if below.size else 0
    return HClassification("Exceeds", sup, arg, float(grid[i0]))
