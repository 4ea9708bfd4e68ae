"""Quadrature on the half-line for positive, log-evaluable integrands.

Two schemes are offered. ``gauss_laguerre_generalized`` is a plain
Gauss rule for the weight ``v**a * exp(-v)`` (nodes from the Golub-Welsch
eigenproblem). ``tanh_sinh_truncated`` locates the bulk of the integrand
first, splits the half-line at its peak and truncates the right tail where
the integrand has fallen below ``truncation_tol`` of its peak; each panel
is then integrated with a double-exponential rule. The latter is the
workhorse: heat kernels at small times are far too narrow for a global
Gauss rule.

Integrands are passed as ``log_g(y)`` returning ``ln g(y)`` so that
nothing has to be exponentiated before the weights are applied.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Optional, Tuple

import numpy as np

from .exceptions import DomainError, NonConvergenceError

__all__ = [
    "SCHEMES",
    "QuadratureRule",
    "gauss_laguerre_rule",
    "integrate_log",
    "log_integrate",
    "integrate_weighted",
    "plan_panels",
    "panel_nodes",
]

SCHEMES = ("tanh_sinh_truncated", "gauss_laguerre_generalized")

_HALF_PI = 0.5 * math.pi
# tau extent: a singular endpoint is approached to ~1e-300 relative distance,
# a regular one to ~1e-23 where the weights are already negligible
_T_SINGULAR = 6.0
_T_REGULAR = 3.5

LogIntegrand = Callable[[float], float]


@dataclass(frozen=True)
class QuadratureRule:
    """Settings for one-dimensional integrals over ``(0, inf)``.

    Attributes
    ----------
    scheme : str
        ``"tanh_sinh_truncated"`` or ``"gauss_laguerre_generalized"``.
    order : int
        Nodes per panel at the coarsest level (Gauss: number of nodes).
    truncation_radius : float or None
        Fixed right truncation point. ``None`` picks the point where the
        integrand has dropped below ``truncation_tol`` of its peak.
    truncation_tol : float
    rel_target : float
        Relative accuracy target; doubling the order must change the result
        by at most ``10 * rel_target``.
    weight_exponent : float
        Exponent ``a`` of the Gauss-Laguerre weight ``v**a e**-v``.
    """

    scheme: str = "tanh_sinh_truncated"
    order: int = 200
    truncation_radius: Optional[float] = None
    truncation_tol: float = 1e-18
    rel_target: float = 1e-8
    weight_exponent: float = 0.0
    per_coordinate: bool = True

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise DomainError(f"unknown quadrature scheme {self.scheme!r}")
        if self.order < 16:
            raise DomainError("quadrature order must be at least 16")
        if self.truncation_radius is not None and not (
                0 < self.truncation_radius < math.inf):
            raise DomainError("truncation_radius must be finite and positive")
        if not 0 < self.truncation_tol < 1:
            raise DomainError("truncation_tol must lie in (0, 1)")
        if not self.weight_exponent > -1:
            raise DomainError("Gauss-Laguerre weight exponent must exceed -1")
        if not self.per_coordinate:
            raise DomainError("only product (per-coordinate) rules are supported")


@lru_cache(maxsize=64)
def gauss_laguerre_rule(n: int, a: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and log-weights of the n-point rule for ``v**a e**-v`` on (0, inf).

    Nodes come from the Golub-Welsch eigenproblem. The weights use the
    closed form ``Gamma(n+a+1) x / (n! (n+1)^2 L_{n+1}^a(x)^2)`` in
    log-space; eigenvector components cannot resolve the tiny weights of
    the largest nodes.
    """
    from .specfun import log_abs_laguerre_poly_normalized

    if n < 1:
        raise DomainError("n must be positive")
    if not a > -1:
        raise DomainError("a must exceed -1")
    k = np.arange(n, dtype=float)
    diag = 2.0 * k + a + 1.0
    off = np.sqrt(k[1:] * (k[1:] + a))
    jac = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    nodes = np.linalg.eigvalsh(jac)
    # ln|L_{n+1}^a| from the normalized polynomial
    unnorm = 0.5 * (math.lgamma(n + a + 2.0) - math.lgamma(n + 2.0))
    log_l = np.array([log_abs_laguerre_poly_normalized(n + 1, a, float(x))[0] for x in nodes]) + unnorm
    log_w = (math.lgamma(n + a + 1.0) - math.lgamma(n + 1.0) - 2.0 * math.log(n + 1.0)
             + np.log(nodes) - 2.0 * log_l)
    nodes.setflags(write=False)
    log_w.setflags(write=False)
    return nodes, log_w


def _eval_log(log_g: LogIntegrand, ys: np.ndarray) -> np.ndarray:
    out = np.fromiter((log_g(float(y)) for y in ys), dtype=float, count=len(ys))
    if np.isnan(out).any():
        raise NonConvergenceError("integrand evaluated to NaN")
    return out


def _logsumexp(v: np.ndarray) -> float:
    if v.size == 0:
        return -math.inf
    m = float(np.max(v))
    if m == -math.inf:
        return -math.inf
    return m + math.log(float(np.sum(np.exp(v - m))))


# ---------------------------------------------------------------------------
# locating the bulk of the integrand

def _golden_max(f, lo: float, hi: float, tol: float = 1e-7, max_iter: int = 200) -> float:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol * max(1.0, abs(a) + abs(b)):
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


def plan_panels(log_g: LogIntegrand, rule: QuadratureRule,
                scale: float = 1.0) -> List[Tuple[float, float, float, float]]:
    """Split (0, inf) into panels ``(a, b, t_left, t_right)`` for the
    tanh-sinh scheme.

    The split points are the peak ``c`` of ``y * g(y)`` over ``ln y``, the
    point left of ``c`` where the integrand has dropped by the truncation
    factor (if any), and the right truncation point.
    """
    if not scale > 0:
        raise DomainError("scale must be positive")
    drop = math.log(1.0 / rule.truncation_tol)

    def phi_ln(s):
        y = math.exp(s)
        return s + log_g(y)

    lo, hi = math.log(scale) - 10.0 * math.log(10.0), math.log(scale) + 4.0 * math.log(10.0)
    step = math.log(10.0) / 10.0
    for _ in range(8):
        grid = np.arange(lo, hi + 0.5 * step, step)
        vals = np.fromiter((phi_ln(float(s)) for s in grid), dtype=float, count=len(grid))
        if np.isnan(vals).any():
            raise NonConvergenceError("integrand evaluated to NaN while locating its peak")
        i = int(np.argmax(vals))
        if not np.isfinite(vals[i]):
            raise NonConvergenceError("integrand has no finite values on the search grid")
        peak = vals[i]
        if i == len(grid) - 1:
            hi += 4.0 * math.log(10.0)
            continue
        if i == 0:
            lo -= 10.0 * math.log(10.0)
            continue
        right = np.nonzero(vals[i:] < peak - drop)[0]
        if rule.truncation_radius is None and right.size == 0:
            hi += 4.0 * math.log(10.0)
            continue
        break
    else:
        raise NonConvergenceError("could not bracket the bulk of the integrand")

    s_peak = _golden_max(phi_ln, float(grid[i - 1]), float(grid[i + 1]))
    c = math.exp(s_peak)
    if rule.truncation_radius is not None:
        r = rule.truncation_radius
        if r <= c:
            return [(0.0, r, _T_SINGULAR, _T_REGULAR)]
    else:
        r = math.exp(float(grid[i + int(right[0])]))
        r = max(r, c * (1.0 + 1e-6))
    left = np.nonzero(vals[:i] < peak - drop)[0]
    panels = []
    if left.size:
        cl = math.exp(float(grid[int(left[-1])]))
        panels.append((0.0, cl, _T_SINGULAR, _T_REGULAR))
        panels.append((cl, c, _T_REGULAR, _T_REGULAR))
    else:
        panels.append((0.0, c, _T_SINGULAR, _T_REGULAR))
    panels.append((c, r, _T_REGULAR, _T_REGULAR))
    return panels


def _tanh_sinh_taus(t_left: float, t_right: float, h: float, level: int) -> np.ndarray:
    """Abscissae in tau that are new at ``level`` (level 0 = all of them)."""
    if level == 0:
        k0 = math.ceil(t_left / h)
        k1 = math.ceil(t_right / h)
        return h * np.arange(-k0, k1 + 1, dtype=float)
    hl = h / 2 ** level
    k0 = math.ceil(t_left / hl)
    k1 = math.ceil(t_right / hl)
    k = np.arange(-k0, k1 + 1)
    return hl * k[k % 2 == 1].astype(float)


def _tanh_sinh_map(a: float, b: float, tau: np.ndarray):
    width = b - a
    q = _HALF_PI * np.sinh(tau)
    aq = np.abs(q)
    # distance to the nearer endpoint, computed without cancellation
    with np.errstate(over="ignore"):
        dist = width / (1.0 + np.exp(2.0 * aq))
    y = np.where(tau < 0, a + dist, b - dist)
    log_cosh_q = aq + np.log1p(np.exp(-2.0 * aq)) - math.log(2.0)
    log_cosh_t = np.abs(tau) + np.log1p(np.exp(-2.0 * np.abs(tau))) - math.log(2.0)
    log_w = math.log(0.5 * width * _HALF_PI) + log_cosh_t - 2.0 * log_cosh_q
    return y, log_w


def panel_nodes(panels, order: int, level: int, new_only: bool = False):
    """Nodes and log-weights of the tanh-sinh rule over ``panels``.

    The step at ``level`` is ``h / 2**level`` with ``h`` fixed by ``order``.
    With ``new_only`` only the abscissae added at this level are returned
    (weights still carry the level's step).
    """
    ys, lws = [], []
    for a, b, tl, tr in panels:
        if not b > a:
            continue
        h = (tl + tr) / order
        if new_only:
            taus = _tanh_sinh_taus(tl, tr, h, level)
        else:
            hl = h / 2 ** level
            taus = hl * np.arange(-math.ceil(tl / hl), math.ceil(tr / hl) + 1, dtype=float)
        y, lw = _tanh_sinh_map(a, b, taus)
        keep = y > 0.0
        ys.append(y[keep])
        lws.append(lw[keep] + math.log(h / 2 ** level))
    if not ys:
        return np.empty(0), np.empty(0)
    return np.concatenate(ys), np.concatenate(lws)


def _tanh_sinh_log_integrate(log_g: LogIntegrand, rule: QuadratureRule, scale: float) -> float:
    panels = plan_panels(log_g, rule, scale)
    y, lw = panel_nodes(panels, rule.order, 0)
    prev = _logsumexp(lw + _eval_log(log_g, y))
    for level in (1, 2):
        y, lw = panel_nodes(panels, rule.order, level, new_only=True)
        log_new = _logsumexp(lw + _eval_log(log_g, y))
        cur = float(np.logaddexp(prev - math.log(2.0), log_new))
        if cur == -math.inf or abs(math.expm1(prev - cur)) <= 10.0 * rule.rel_target:
            return cur
        prev = cur
    raise NonConvergenceError("tanh-sinh quadrature did not settle after two refinements")


def _gauss_laguerre_log_integrate(log_g: LogIntegrand, rule: QuadratureRule, scale: float) -> float:
    a = rule.weight_exponent
    results = []
    for n in (rule.order, 2 * rule.order):
        v, log_w = gauss_laguerre_rule(n, a)
        with np.errstate(divide="ignore"):
            terms = log_w + v - a * np.log(v) + _eval_log(log_g, scale * v)
        results.append(math.log(scale) + _logsumexp(terms))
    lo, hi = results
    change = abs(math.expm1(lo - hi)) if hi > -math.inf else 0.0
    if change > 10.0 * rule.rel_target:
        raise NonConvergenceError(
            f"Gauss-Laguerre quadrature changed by {change:.3g} "
            f"relative on doubling the order")
    return hi


def log_integrate(log_g: LogIntegrand, rule: Optional[QuadratureRule] = None,
                  scale: float = 1.0) -> float:
    """Logarithm of ``int exp(log_g(y)) dy`` over ``(0, inf)``.

    Same arguments as :func:`integrate_log`; usable when the integral
    itself is outside double range.
    """
    if rule is None:
        rule = QuadratureRule()
    if rule.scheme == "gauss_laguerre_generalized":
        return _gauss_laguerre_log_integrate(log_g, rule, scale)
    return _tanh_sinh_log_integrate(log_g, rule, scale)


def integrate_log(log_g: LogIntegrand, rule: Optional[QuadratureRule] = None,
                  scale: float = 1.0) -> float:
    """Integrate ``exp(log_g(y))`` over ``(0, inf)``.

    Parameters
    ----------
    log_g : callable
        ``y -> ln g(y)``; may return ``-inf`` where ``g`` vanishes.
    rule : QuadratureRule, optional
    scale : float
        Typical size of ``y`` in the bulk of the integrand; only used to
        position the search grid (tanh-sinh) or to scale the nodes (Gauss).

    Raises
    ------
    NonConvergenceError
        If refining the rule moves the result by more than ten times the
        rule's relative target.
    """
    try:
        return math.exp(log_integrate(log_g, rule, scale))
    except OverflowError:
        return math.inf


def _eval_values(f, ys: np.ndarray) -> np.ndarray:
    out = np.fromiter((f(float(y)) for y in ys), dtype=float, count=len(ys))
    if not np.all(np.isfinite(out)):
        raise NonConvergenceError("integrand factor is not finite at a node")
    return out


def integrate_weighted(log_w: LogIntegrand, f, rule: Optional[QuadratureRule] = None,
                       scale: float = 1.0) -> float:
    """Integrate ``exp(log_w(y)) * f(y)`` over ``(0, inf)`` for a real ``f``.

    The positive factor ``exp(log_w)`` decides the node placement; ``f`` may
    change sign. Convergence is judged against ``int exp(log_w) |f|`` so that
    a small result from cancellation does not stall the refinement.
    """
    if rule is None:
        rule = QuadratureRule()
    if rule.scheme == "gauss_laguerre_generalized":
        a = rule.weight_exponent
        results, norms = [], []
        for n in (rule.order, 2 * rule.order):
            v, lw = gauss_laguerre_rule(n, a)
            with np.errstate(divide="ignore"):
                terms = np.exp(lw + v - a * np.log(v) + _eval_log(log_w, scale * v))
            vals = _eval_values(f, scale * v)
            results.append(scale * float(np.sum(terms * vals)))
            norms.append(scale * float(np.sum(terms * np.abs(vals))))
        if abs(results[1] - results[0]) > 10.0 * rule.rel_target * norms[1]:
            raise NonConvergenceError("Gauss-Laguerre quadrature did not settle on doubling the order")
        return results[1]
    panels = plan_panels(log_w, rule, scale)
    y, lw = panel_nodes(panels, rule.order, 0)
    terms = np.exp(lw + _eval_log(log_w, y))
    vals = _eval_values(f, y)
    prev = float(np.sum(terms * vals))
    prev_norm = float(np.sum(terms * np.abs(vals)))
    for level in (1, 2):
        y, lw = panel_nodes(panels, rule.order, level, new_only=True)
        terms = np.exp(lw + _eval_log(log_w, y))
        vals = _eval_values(f, y)
        cur = 0.5 * prev + float(np.sum(terms * vals))
        cur_norm = 0.5 * prev_norm + float(np.sum(terms * np.abs(vals)))
        if abs(cur - prev) <= 10.0 * rule.rel_target * cur_norm:
            return cur
        prev, prev_norm = cur, cur_norm
    raise NonConvergenceError("tanh-sinh quadrature did not settle after two refinements")
