import math
import random
import zlib

import pytest
from hypothesis import given, settings, strategies as st

from lpheat.exceptions import DomainError, NonConvergenceError
from lpheat.kernels import (
    BASES,
    LAGUERRE_BASES,
    AlphaIndex,
    FamilyId,
    Point,
    admissible,
    kernel_log_eval,
    kernel_series_oracle,
    measure_log_density,
)
from lpheat.specfun import bessel_i_scaled

MODIFIED = [FamilyId(b, 1) for b in LAGUERRE_BASES]
ALL_FAMILIES = [FamilyId(b) for b in BASES] + MODIFIED
# smallest coordinate value used in random draws, per family (1-d)
LOWEST = {"lag": -0.95, "stdL": 0.0, "hermL": -0.5, "convL": -0.95,
          "besselSmall": -0.5, "besselBig": -0.95,
          "mod-lag": -1.45, "mod-stdL": -1.0, "mod-hermL": -1.5, "mod-convL": -1.45}


# -- domain types -----------------------------------------------------------------

def test_alpha_index():
    a = AlphaIndex([0.5, -0.2])
    assert a.d == 2 and a.norm1 == pytest.approx(0.3)
    assert a.shifted(2).values == (0.5, 0.8)
    with pytest.raises(DomainError):
        AlphaIndex([])
    with pytest.raises(DomainError):
        AlphaIndex([-1.6])
    with pytest.raises(DomainError):
        AlphaIndex([math.nan])


def test_point():
    assert Point([1.0, 2.0]).d == 2
    for bad in ([0.0], [-1.0], [math.inf], []):
        with pytest.raises(DomainError):
            Point(bad)


def test_family_parsing():
    assert FamilyId.parse("hermL") == FamilyId("hermL")
    assert FamilyId.parse("mod-hermL") == FamilyId("hermL", 1)
    assert FamilyId.parse("modified-lag") == FamilyId("lag", 1)
    assert FamilyId.parse("mod-convL:2") == FamilyId("convL", 2)
    assert FamilyId.parse("besselsmall") == FamilyId("besselSmall")
    assert str(FamilyId("convL", 2)) == "mod-convL:2"
    with pytest.raises(DomainError):
        FamilyId("besselBig", 1)
    with pytest.raises(DomainError):
        FamilyId.parse("hermite")
    with pytest.raises(DomainError):
        FamilyId("lag", 0)


# -- admissibility --------------------------------------------------------------------

def test_admissible_examples():
    ok, reason = admissible("stdL", [-0.3])
    assert not ok and "[0,inf)^d" in reason
    assert admissible("hermL", [-0.5, 2.0])[0]
    assert admissible(FamilyId("lag", 1), [-1.4, 0.0])[0]


@pytest.mark.parametrize("family,alpha,expected", [
    ("lag", [-0.99], True), ("lag", [-1.0], False),
    ("stdL", [0.0], True), ("stdL", [-1e-9], False),
    ("hermL", [-0.5], True), ("hermL", [-0.51], False),
    ("convL", [-0.99], True), ("convL", [-1.0], False),
    ("besselSmall", [-0.5], True), ("besselSmall", [-0.6], False),
    ("besselBig", [-0.99], True), ("besselBig", [-1.0], False),
    ("mod-lag", [-1.49, -0.9], True), ("mod-lag", [-1.5], False), ("mod-lag", [0.0, -1.0], False),
    ("mod-stdL", [-1.0, 0.0], True), ("mod-stdL", [-1.01], False), ("mod-stdL", [0.0, -0.1], False),
    ("mod-hermL", [-1.5, -0.5], True), ("mod-hermL", [-1.5, -0.6], False),
    ("mod-convL", [-1.49], True), ("mod-convL", [-1.5], False),
    ("mod-lag:2", [-0.9, -1.4], True), ("mod-lag:3", [0.0, 0.0], False),
])
def test_admissible_ranges(family, alpha, expected):
    assert admissible(family, alpha)[0] is expected


def test_inadmissible_raises():
    with pytest.raises(DomainError):
        kernel_log_eval("stdL", [-0.3], 1.0, [1.0], [1.0])


# -- measures ---------------------------------------------------------------------------

def test_measure_examples():
    assert measure_log_density("lag", [0.0], [2.0]) == -2.0
    assert measure_log_density("stdL", [1.7], [3.3]) == 0.0
    assert measure_log_density("convL", [0.5], [3.0]) == pytest.approx(2 * math.log(3.0))
    assert measure_log_density("mod-lag", [-1.2], [2.0]) == pytest.approx(-1.2 * math.log(2) - 2)
    assert measure_log_density("besselBig", [1.0, 0.0], [2.0, 3.0]) == pytest.approx(
        3 * math.log(2) + math.log(3))


# -- kernel values ------------------------------------------------------------------------

def test_hermite_half_integer_collapse():
    t, x, y = 0.5, 1.0, 2.0
    s = math.sinh(1.0)
    ref = (math.log(math.sqrt(2 / (math.pi * s))) - 0.5 / math.tanh(1.0) * 5
           + math.log(math.cosh(2 / s)))
    assert kernel_log_eval("hermL", [-0.5], t, [x], [y]) == pytest.approx(ref, abs=1e-13)


def test_lag_against_oracle_example():
    v = math.exp(kernel_log_eval("lag", [0.5], 1.0, [1.0], [2.0]))
    assert v == pytest.approx(kernel_series_oracle("lag", 0.5, 1.0, 1.0, 2.0, 300), rel=1e-8)


def test_bessel_big_direct_substitution():
    v = math.exp(kernel_log_eval("besselBig", [1.0], 0.25, [1.0], [1.0]))
    ref = (1 / 0.5) * math.exp(-2.0) * bessel_i_scaled(1.0, 2.0) * math.exp(2.0)
    assert v == pytest.approx(ref, rel=1e-14)


@pytest.mark.parametrize("family,a,t,x,y", [("lag", 0.0, 1.0, 1.0, 1.0), ("stdL", 1.0, 2.0, 0.5, 1.5)])
def test_oracle_examples(family, a, t, x, y):
    v = math.exp(kernel_log_eval(family, [a], t, [x], [y]))
    assert v == pytest.approx(kernel_series_oracle(family, a, t, x, y, 200), rel=1e-8)


@pytest.mark.parametrize("family", LAGUERRE_BASES)
def test_oracle_single_term_dominates_at_large_t(family):
    a, t, x, y = 0.5, 40.0, 1.2, 0.7
    v = math.exp(kernel_log_eval(family, [a], t, [x], [y]))
    assert kernel_series_oracle(family, a, t, x, y, 1) / v == pytest.approx(1.0, rel=1e-9)


def test_oracle_errors():
    with pytest.raises(NonConvergenceError):
        kernel_series_oracle("lag", 0.0, 0.01, 1.0, 1.0, 10)
    with pytest.raises(DomainError):
        kernel_series_oracle("besselBig", 0.0, 1.0, 1.0, 1.0, 10)
    with pytest.raises(DomainError):
        kernel_series_oracle("lag", 0.0, 1.0, 1.0, 1.0, 501)


ORACLE_GRID = [(f, a, t) for f in LAGUERRE_BASES for a in (-0.5, 0.0, 0.5, 2.0)
               for t in (0.5, 1.0, 2.0) if admissible(f, [a])[0]]


@pytest.mark.parametrize("family,a,t", ORACLE_GRID)
def test_oracle_agreement_grid(family, a, t):
    rng = random.Random(zlib.crc32(repr((family, a, t)).encode()))
    for _ in range(10):
        x, y = rng.uniform(0.1, 5), rng.uniform(0.1, 5)
        v = math.exp(kernel_log_eval(family, [a], t, [x], [y]))
        s = kernel_series_oracle(family, a, t, x, y, 500 if t < 1 else 300)
        assert abs(v / s - 1) <= 1e-7


def test_small_t_floor():
    with pytest.raises(DomainError):
        kernel_log_eval("lag", [0.0], 1e-7, [1.0], [1.0])
    assert math.isfinite(kernel_log_eval("lag", [0.0], 1e-6, [1.0], [1.0]))


def test_dimension_mismatch():
    with pytest.raises(DomainError):
        kernel_log_eval("lag", [0.0, 0.0], 1.0, [1.0], [1.0, 2.0])


# -- properties --------------------------------------------------------------------

coord = st.floats(min_value=1e-3, max_value=50.0)
times = st.floats(min_value=1e-4, max_value=20.0)


def _alpha_for(fam, u):
    lo = LOWEST[str(fam)]
    return lo + u * (4.0 - lo)


@settings(max_examples=300, deadline=None)
@given(st.sampled_from(ALL_FAMILIES), st.floats(min_value=0.0, max_value=1.0), times, coord, coord)
def test_symmetry_and_positivity(fam, u, t, x, y):
    a = [_alpha_for(fam, u)]
    if not admissible(fam, a)[0]:
        return
    v1 = kernel_log_eval(fam, a, t, [x], [y])
    v2 = kernel_log_eval(fam, a, t, [y], [x])
    assert v1 == v2
    assert math.isfinite(v1)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(ALL_FAMILIES), st.floats(min_value=0.0, max_value=1.0),
       st.floats(min_value=0.0, max_value=1.0), times, coord, coord, coord, coord)
def test_tensorization(fam, u1, u2, t, x1, x2, y1, y2):
    a1, a2 = _alpha_for(fam, u1), max(_alpha_for(fam, u2), LOWEST[fam.base])
    if not admissible(fam, [a1, a2])[0]:
        return
    both = kernel_log_eval(fam, [a1, a2], t, [x1, x2], [y1, y2])
    first = kernel_log_eval(fam, [a1], t, [x1], [y1])
    base2 = FamilyId(fam.base)
    second = kernel_log_eval(base2, [a2], t, [x2], [y2])
    assert abs(both - first - second) <= 1e-12 * max(1.0, abs(both))


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=-0.95, max_value=4.0), times, coord, coord)
def test_relation_standard_functions(a, t, x, y):
    lhs = kernel_log_eval("stdL", [max(a, 0.0)], t, [x], [y])
    a = max(a, 0.0)
    rhs = (-t * (a + 1) / 2 + kernel_log_eval("lag", [a], t, [x], [y])
           - (x + y) / 2 + a / 2 * math.log(x * y))
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs), (x + y) / 2)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=-0.5, max_value=4.0), st.floats(min_value=1e-4, max_value=5.0),
       st.floats(min_value=1e-2, max_value=7.0), st.floats(min_value=1e-2, max_value=7.0))
def test_relation_hermite_functions(a, t, x, y):
    lhs = kernel_log_eval("hermL", [a], t, [x], [y])
    rhs = (math.log(2) - 2 * t * (a + 1) + kernel_log_eval("lag", [a], 4 * t, [x * x], [y * y])
           - (x * x + y * y) / 2 + (a + 0.5) * math.log(x * y))
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs), x * x + y * y)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=-0.95, max_value=4.0), st.floats(min_value=1e-4, max_value=5.0),
       st.floats(min_value=1e-2, max_value=7.0), st.floats(min_value=1e-2, max_value=7.0))
def test_relation_convolution_functions(a, t, x, y):
    lhs = kernel_log_eval("convL", [a], t, [x], [y])
    rhs = (math.log(2) - 2 * t * (a + 1) + kernel_log_eval("lag", [a], 4 * t, [x * x], [y * y])
           - (x * x + y * y) / 2)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs), x * x + y * y)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=-0.5, max_value=4.0), times, coord, coord)
def test_relation_bessel(a, t, x, y):
    big = kernel_log_eval("besselBig", [a], t, [x], [y])
    small = kernel_log_eval("besselSmall", [a], t, [x], [y])
    assert abs(big - (small - (a + 0.5) * math.log(x * y))) <= 1e-12 * max(1.0, abs(big))


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(LAGUERRE_BASES), st.floats(min_value=0.0, max_value=1.0), times, coord, coord)
def test_modified_prefactors(base, u, t, x, y):
    fam = FamilyId(base, 1)
    a = _alpha_for(fam, u)
    if not admissible(fam, [a])[0]:
        return
    shifted = kernel_log_eval(base, [a + 1], t, [x], [y])
    extra = {"lag": -t + 0.5 * math.log(x * y), "stdL": -t / 2, "hermL": -2 * t,
             "convL": -2 * t + math.log(x * y)}[base]
    assert kernel_log_eval(fam, [a], t, [x], [y]) == pytest.approx(shifted + extra, abs=1e-12)
