r"""Heat kernels of the Laguerre and Bessel semigroups on :math:`(0,\infty)^d`.

Every kernel is a product of one-dimensional factors, each of the shape

.. math::
    \text{prefactor}(t, x, y)\; e^{-E(t, x, y)}\; I_\nu(w(t, x, y)),

and is evaluated as ``ln prefactor - E + w + ln(e^{-w} I_nu(w))``. The
exponent ``-E + w`` is rewritten so that no large terms cancel, e.g.

.. math::
    -\tfrac12\coth\tau\,(x+y) + \frac{\sqrt{xy}}{\sinh\tau}
    = -\frac{(\sqrt x-\sqrt y)^2}{2\sinh\tau} - \tfrac12\tanh\tfrac\tau2\,(x+y).

All formulas are symmetric in ``x`` and ``y`` term by term, so swapping the
arguments returns a bit-identical result.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

from .exceptions import DomainError, NonConvergenceError
from .specfun import DEFAULT_CONFIG, laguerre_poly_normalized, log_bessel_i_scaled

__all__ = [
    "BASES",
    "LAGUERRE_BASES",
    "BESSEL_BASES",
    "T_MIN",
    "AlphaIndex",
    "FamilyId",
    "Point",
    "admissible",
    "require_admissible",
    "eigenvalue",
    "measure_log_density",
    "coordinate_log_measure",
    "coordinate_log_kernel",
    "kernel_log_eval",
    "kernel_series_oracle",
]

LAGUERRE_BASES = ("lag", "stdL", "hermL", "convL")
BESSEL_BASES = ("besselSmall", "besselBig")
BASES = LAGUERRE_BASES + BESSEL_BASES
# below this, sinh/coth of the time variable lose relative precision
T_MIN = 1e-6

_BASE_LOOKUP = {b.lower(): b for b in BASES}


# ---------------------------------------------------------------------------
# domain types

@dataclass(frozen=True)
class AlphaIndex:
    """Multi-index ``(alpha_1, ..., alpha_d)``.

    Only the loosest bound over all families (``alpha_i >= -3/2``) is
    enforced here; family-specific ranges are checked by :func:`admissible`.
    """

    values: Tuple[float, ...]

    def __init__(self, values):
        if isinstance(values, (int, float)):
            values = (values,)
        vals = tuple(float(v) for v in values)
        if not vals:
            raise DomainError("alpha needs at least one coordinate")
        for v in vals:
            if not math.isfinite(v) or v < -1.5:
                raise DomainError(f"alpha coordinates must be finite and >= -3/2, got {v!r}")
        object.__setattr__(self, "values", vals)

    @property
    def d(self) -> int:
        return len(self.values)

    @property
    def norm1(self) -> float:
        """``|alpha| = alpha_1 + ... + alpha_d``."""
        return math.fsum(self.values)

    def shifted(self, j: int) -> "AlphaIndex":
        """``alpha + e_j`` (``j`` is 1-based)."""
        vals = list(self.values)
        vals[j - 1] += 1.0
        return AlphaIndex(vals)

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]


@dataclass(frozen=True)
class Point:
    """A point of ``(0, inf)^d``."""

    coords: Tuple[float, ...]

    def __init__(self, coords):
        if isinstance(coords, (int, float)):
            coords = (coords,)
        c = tuple(float(v) for v in coords)
        if not c:
            raise DomainError("a point needs at least one coordinate")
        for v in c:
            if not (v > 0 and math.isfinite(v)):
                raise DomainError(f"coordinates must be finite and positive, got {v!r}")
        object.__setattr__(self, "coords", c)

    @property
    def d(self) -> int:
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __len__(self):
        return len(self.coords)

    def __getitem__(self, i):
        return self.coords[i]


@dataclass(frozen=True)
class FamilyId:
    """A semigroup family: one of :data:`BASES`, optionally the modified
    variant along coordinate ``modified_j`` (1-based, Laguerre bases only).
    """

    base: str
    modified_j: Optional[int] = None

    def __post_init__(self):
        if self.base not in BASES:
            raise DomainError(f"unknown family {self.base!r}; expected one of {BASES}")
        if self.modified_j is not None:
            if self.base not in LAGUERRE_BASES:
                raise DomainError("modified variants exist for the Laguerre families only")
            if int(self.modified_j) != self.modified_j or self.modified_j < 1:
                raise DomainError("modified_j must be a positive integer")

    @property
    def is_modified(self) -> bool:
        return self.modified_j is not None

    @classmethod
    def parse(cls, name: str, j: Optional[int] = None) -> "FamilyId":
        """Parse ``"hermL"``, ``"mod-hermL"``, ``"modified-hermL"`` or
        ``"mod-hermL:2"`` (coordinate after the colon)."""
        text = name.strip()
        if ":" in text:
            text, _, jtext = text.partition(":")
            try:
                j = int(jtext.lstrip("jJ="))
            except ValueError:
                raise DomainError(f"bad coordinate suffix in family {name!r}") from None
        modified = False
        low = text.lower()
        for prefix in ("modified-", "modified_", "mod-", "mod_"):
            if low.startswith(prefix):
                modified = True
                low = low[len(prefix):]
                break
        if low not in _BASE_LOOKUP:
            raise DomainError(f"unknown family {name!r}")
        base = _BASE_LOOKUP[low]
        if modified:
            return cls(base, 1 if j is None else j)
        if j is not None:
            raise DomainError("a coordinate index only applies to modified families")
        return cls(base)

    def __str__(self) -> str:
        if self.modified_j is None:
            return self.base
        if self.modified_j == 1:
            return f"mod-{self.base}"
        return f"mod-{self.base}:{self.modified_j}"


def _as_alpha(alpha) -> AlphaIndex:
    return alpha if isinstance(alpha, AlphaIndex) else AlphaIndex(alpha)


def _as_point(x) -> Point:
    return x if isinstance(x, Point) else Point(x)


def _as_family(family) -> FamilyId:
    return family if isinstance(family, FamilyId) else FamilyId.parse(str(family))


# ---------------------------------------------------------------------------
# admissibility

_RANGES = {
    # base: (lower bound, inclusive?, text)
    "lag": (-1.0, False, "(-1,inf)"),
    "stdL": (0.0, True, "[0,inf)"),
    "hermL": (-0.5, True, "[-1/2,inf)"),
    "convL": (-1.0, False, "(-1,inf)"),
    "besselSmall": (-0.5, True, "[-1/2,inf)"),
    "besselBig": (-1.0, False, "(-1,inf)"),
}


# range of the distinguished coordinate of a modified family
_MODIFIED_J_RANGES = {
    "lag": (-1.5, False, "(-3/2,inf)"),
    "stdL": (-1.0, True, "[-1,inf)"),
    "hermL": (-1.5, True, "[-3/2,inf)"),
    "convL": (-1.5, False, "(-3/2,inf)"),
}


def _in_range(v: float, lo: float, inclusive: bool) -> bool:
    return v >= lo if inclusive else v > lo


def admissible(family, alpha) -> Tuple[bool, str]:
    """Whether the semigroup is defined on every ``L^p`` for this ``alpha``.

    This is the well-definedness region, which is wider than the region of
    contractivity.

    Returns
    -------
    (bool, str)
        The verdict and a short reason (empty when admissible).
    """
    try:
        family = _as_family(family)
        alpha = _as_alpha(alpha)
    except DomainError as exc:
        return False, str(exc)
    lo, inc, text = _RANGES[family.base]
    if not family.is_modified:
        if all(_in_range(a, lo, inc) for a in alpha):
            return True, ""
        return False, f"alpha outside {text}^d"
    j = family.modified_j
    if j > alpha.d:
        return False, f"modified coordinate j={j} exceeds dimension d={alpha.d}"
    jlo, jinc, jtext = _MODIFIED_J_RANGES[family.base]
    if not _in_range(alpha[j - 1], jlo, jinc):
        return False, f"alpha_{j} outside {jtext}"
    for i, a in enumerate(alpha):
        if i != j - 1 and not _in_range(a, lo, inc):
            return False, f"alpha_{i + 1} outside {text}"
    return True, ""


def require_admissible(family, alpha) -> Tuple[FamilyId, AlphaIndex]:
    """Normalize the inputs and raise :class:`DomainError` if inadmissible."""
    family = _as_family(family)
    alpha = _as_alpha(alpha)
    ok, reason = admissible(family, alpha)
    if not ok:
        raise DomainError(f"{family}: {reason}")
    return family, alpha


def _check_t(t: float) -> float:
    t = float(t)
    if not math.isfinite(t) or t < T_MIN:
        raise DomainError(f"t must be finite and >= {T_MIN:g}, got {t!r}")
    return t


# ---------------------------------------------------------------------------
# one-dimensional building blocks

def _log_measure_1d(base: str, a: float, y: float) -> float:
    if base == "lag":
        return a * math.log(y) - y
    if base in ("convL", "besselBig"):
        return (2.0 * a + 1.0) * math.log(y)
    return 0.0


def _log_kernel_1d(base: str, nu: float, t: float, x: float, y: float,
                   config=DEFAULT_CONFIG) -> float:
    """ln of the one-dimensional kernel of ``base`` with order ``nu``."""
    if base in ("lag", "stdL"):
        tau = 0.5 * t
        sh = math.sinh(tau)
        sx, sy = math.sqrt(x), math.sqrt(y)
        w = sx * sy / sh
        expo = -(sx - sy) ** 2 / (2.0 * sh) - 0.5 * math.tanh(0.5 * tau) * (x + y)
        head = -math.log(2.0 * sh)
        if base == "lag":
            head += 0.5 * t * (nu + 1.0) - 0.5 * nu * math.log(x * y)
            expo += 0.5 * (x + y)
    elif base in ("hermL", "convL"):
        sh = math.sinh(2.0 * t)
        w = x * y / sh
        expo = -(x - y) ** 2 / (2.0 * sh) - 0.5 * math.tanh(t) * (x * x + y * y)
        head = -math.log(sh)
        if base == "hermL":
            head += 0.5 * math.log(x * y)
        else:
            head -= nu * math.log(x * y)
    else:
        w = x * y / (2.0 * t)
        expo = -(x - y) ** 2 / (4.0 * t)
        head = -math.log(2.0 * t)
        if base == "besselSmall":
            head += 0.5 * math.log(x * y)
        else:
            head -= nu * math.log(x * y)
    return head + expo + log_bessel_i_scaled(nu, w, config)


def _coordinate_spec(family: FamilyId, alpha: AlphaIndex, i: int):
    """(order, measure exponent, modified?) for 0-based coordinate ``i``."""
    a = alpha[i]
    if family.is_modified and i == family.modified_j - 1:
        return a + 1.0, a, True
    return a, a, False


def coordinate_log_measure(family, alpha, i: int, y: float) -> float:
    """ln density of the reference measure in coordinate ``i`` (0-based)."""
    family = _as_family(family)
    alpha = _as_alpha(alpha)
    return _log_measure_1d(family.base, alpha[i], y)


def coordinate_log_kernel(family, alpha, t: float, i: int, x: float, y: float,
                          config=DEFAULT_CONFIG) -> float:
    """ln of the ``i``-th (0-based) one-dimensional factor of the kernel.

    For a modified family the factor of coordinate ``j`` carries the
    exponential prefactor and the coordinate weight. Inputs are assumed
    validated.
    """
    nu, _, modified = _coordinate_spec(family, alpha, i)
    val = _log_kernel_1d(family.base, nu, t, x, y, config)
    if modified:
        base = family.base
        if base == "lag":
            val += -t + 0.5 * math.log(x * y)
        elif base == "stdL":
            val += -0.5 * t
        elif base == "hermL":
            val += -2.0 * t
        else:
            val += -2.0 * t + math.log(x * y)
    return val


# ---------------------------------------------------------------------------
# public evaluation

def measure_log_density(family, alpha, x) -> float:
    """ln of the reference measure's density with respect to Lebesgue measure.

    ``m_alpha`` (``prod y^alpha e^-y``) for lag, ``mu_alpha``
    (``prod y^(2 alpha + 1)``) for convL and besselBig, Lebesgue otherwise.
    Modified families use the measure of the unshifted ``alpha``.
    """
    family, alpha = require_admissible(family, alpha)
    x = _as_point(x)
    if x.d != alpha.d:
        raise DomainError("point and alpha have different dimensions")
    return math.fsum(_log_measure_1d(family.base, a, xi) for a, xi in zip(alpha, x))


def kernel_log_eval(family, alpha, t: float, x, y, config=DEFAULT_CONFIG) -> float:
    """ln G_t(x, y) for the given family.

    Parameters
    ----------
    family : FamilyId or str
    alpha : AlphaIndex or sequence of float
    t : float
        Time, at least :data:`T_MIN`.
    x, y : Point or sequence of float

    Returns
    -------
    float
        Sum of the per-coordinate log factors. Symmetric in ``x`` and ``y``.

    Raises
    ------
    DomainError
        If the family is not admissible for ``alpha``, ``t`` is too small, or
        the points are not in ``(0, inf)^d``.
    """
    family, alpha = require_admissible(family, alpha)
    t = _check_t(t)
    x, y = _as_point(x), _as_point(y)
    if not (x.d == y.d == alpha.d):
        raise DomainError("points and alpha must have the same dimension")
    total = 0.0
    for i in range(alpha.d):
        total += coordinate_log_kernel(family, alpha, t, i, x[i], y[i], config)
    if math.isnan(total) or total == math.inf:
        raise NonConvergenceError("kernel evaluation overflowed in log-space")
    return total


# ---------------------------------------------------------------------------
# eigenfunction expansion (d = 1)

def eigenvalue(base: str, alpha: float, k: int) -> float:
    """Eigenvalue of the ``k``-th eigenfunction in dimension one."""
    if base == "lag":
        return float(k)
    if base == "stdL":
        return k + 0.5 * (alpha + 1.0)
    if base in ("hermL", "convL"):
        return 4.0 * k + 2.0 * alpha + 2.0
    raise DomainError(f"no discrete spectrum for {base!r}")


def _eigenfunction(base: str, alpha: float, k: int, x: float) -> float:
    if base == "lag":
        return laguerre_poly_normalized(k, alpha, x)
    if base == "stdL":
        return laguerre_poly_normalized(k, alpha, x) * math.exp(0.5 * alpha * math.log(x) - 0.5 * x)
    xx = x * x
    val = math.sqrt(2.0) * laguerre_poly_normalized(k, alpha, xx) * math.exp(-0.5 * xx)
    if base == "hermL":
        val *= x ** (alpha + 0.5)
    return val


def kernel_series_oracle(family, alpha: float, t: float, x: float, y: float,
                         n_terms: int) -> float:
    """Truncated eigenfunction expansion ``sum_k e^{-t lambda_k} phi_k(x) phi_k(y)``.

    One-dimensional, non-modified Laguerre families only. Used as an
    independent reference for :func:`kernel_log_eval`.

    Raises
    ------
    NonConvergenceError
        If the first omitted term exceeds ``1e-12`` of the partial sum.
    """
    family = _as_family(family)
    if family.is_modified or family.base not in LAGUERRE_BASES:
        raise DomainError("the series oracle covers the four non-modified Laguerre families")
    alpha = float(alpha)
    ok, reason = admissible(family, (alpha,))
    if not ok:
        raise DomainError(f"{family}: {reason}")
    if not (isinstance(n_terms, int) and 1 <= n_terms <= 500):
        raise DomainError("n_terms must be an integer in [1, 500]")
    if not (t > 0 and x > 0 and y > 0):
        raise DomainError("t, x and y must be positive")
    base = family.base

    def term(k):
        return (math.exp(-t * eigenvalue(base, alpha, k))
                * _eigenfunction(base, alpha, k, x) * _eigenfunction(base, alpha, k, y))

    total = math.fsum(term(k) for k in range(n_terms))
    # truncation estimate from the first omitted terms (one may sit near a zero)
    tail = max(abs(term(n_terms)), abs(term(n_terms + 1)))
    if not tail <= 1e-12 * abs(total):
        raise NonConvergenceError(
            f"series not converged: omitted term {tail:.3g} vs partial sum {total:.3g}")
    return total

