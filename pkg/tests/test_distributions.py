import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mechgap.distributions import (
    EqualRevenueTruncated,
    Instance,
    RootIrregular,
    Triangular,
    TriangularLimit,
    cdf,
    cdf_left,
    is_regular_numeric,
    quantile_sample,
    revenue_quantile,
    spec_from_dict,
    spec_to_dict,
    survival,
    virtual_value,
)
from mechgap.errors import DomainError, NotTriangularError

tri_params = st.tuples(st.floats(0.05, 50.0), st.floats(0.01, 1.0))
specs = st.one_of(
    tri_params.map(lambda t: Triangular(*t)),
    st.just(TriangularLimit()),
    st.floats(1.5, 1e6).map(EqualRevenueTruncated),
    st.integers(1, 6).map(RootIrregular),
)


def test_cdf_examples():
    assert cdf(TriangularLimit(), 1.0) == 0.5
    assert cdf(Triangular(1.0, 1.0), 0.5) == 0.0
    # (1-q)p / ((1-q)p + vq) with v = 3/2, q = 2/5, p = 1, in exact rationals
    v, q, p = Fraction(3, 2), Fraction(2, 5), Fraction(1)
    exact = (1 - q) * p / ((1 - q) * p + v * q)
    assert exact == Fraction(1, 2)
    assert cdf(Triangular(1.5, 0.4), 1.0) == pytest.approx(float(exact), abs=1e-15)


def test_survival_examples():
    assert survival(Triangular(2.0, 0.3), 2.0) == 0.3
    assert survival(Triangular(1.0, 1.0), 1.0) == 1.0
    assert survival(EqualRevenueTruncated(100.0), 10.0) == pytest.approx(0.1, abs=1e-15)


def test_equal_revenue_survival_by_sampling():
    rng = np.random.default_rng(3)
    x = quantile_sample(EqualRevenueTruncated(100.0), rng.uniform(size=200_000))
    freq = np.mean(x >= 10.0)
    assert freq == pytest.approx(0.1, abs=4 * math.sqrt(0.09 / 200_000))


def test_quantile_examples():
    assert quantile_sample(Triangular(1.0, 1.0), 0.7) == 1.0
    assert quantile_sample(TriangularLimit(), 0.5) == pytest.approx(1.0, abs=1e-15)
    x = quantile_sample(Triangular(2.0, 0.5), 0.25)
    assert x == pytest.approx(2.0 / 3.0, abs=1e-15)
    assert cdf(Triangular(2.0, 0.5), x) == pytest.approx(0.25, abs=1e-15)


def test_quantile_domain():
    with pytest.raises(DomainError):
        quantile_sample(TriangularLimit(), 1.0)
    with pytest.raises(DomainError):
        quantile_sample(TriangularLimit(), -0.1)


def test_revenue_quantile_examples():
    assert revenue_quantile(Triangular(2.0, 0.5), 0.5) == pytest.approx(1.0, abs=1e-15)
    assert revenue_quantile(EqualRevenueTruncated(1000.0), 0.3) == pytest.approx(1.0, abs=1e-14)
    assert revenue_quantile(RootIrregular(2), 0.5) == pytest.approx(float(Fraction(1, 2) / Fraction(3, 4)),
                                                                    abs=1e-15)
    with pytest.raises(DomainError):
        revenue_quantile(TriangularLimit(), 0.0)


def test_virtual_value_examples():
    assert virtual_value(Triangular(2.0, 0.5), 1.0) == pytest.approx(-2.0, abs=1e-15)
    assert virtual_value(Triangular(2.0, 0.5), 2.0) == 2.0
    assert virtual_value(EqualRevenueTruncated(100.0), 5.0) == pytest.approx(0.0, abs=1e-14)
    assert virtual_value(TriangularLimit(), 7.0) == pytest.approx(-1.0, abs=1e-15)


def test_regularity_examples():
    assert is_regular_numeric(Triangular(3.0, 0.2), 101)
    assert not is_regular_numeric(RootIrregular(2), 101)
    assert is_regular_numeric(RootIrregular(1), 101)
    assert is_regular_numeric(TriangularLimit(), 101)


@given(specs, st.floats(0.0, 2e6))
def test_survival_plus_left_cdf_is_one(d, p):
    assert survival(d, p) + cdf_left(d, p) == pytest.approx(1.0, abs=1e-15)


@given(specs, st.floats(0.0, 1e6), st.floats(0.0, 1e6))
def test_cdf_monotone_and_bounded(d, a, b):
    lo, hi = min(a, b), max(a, b)
    c_lo, c_hi = cdf(d, lo), cdf(d, hi)
    assert 0.0 <= c_lo <= c_hi + 1e-15 <= 1.0 + 1e-15


@given(specs, st.floats(0.0, 0.999))
def test_quantile_inverts_cdf(d, u):
    x = quantile_sample(d, u)
    assert cdf(d, x) >= u - 1e-9
    # nothing smaller reaches u
    assert cdf_left(d, x) <= u + 1e-9


@given(tri_params, st.floats(0.001, 1.0))
def test_triangular_revenue_quantile_is_tent(params, x):
    v, q = params
    r = revenue_quantile(Triangular(v, q), x)
    expected = v * x if x <= q else v * q * (1 - x) / (1 - q) if q < 1 else v * x
    assert r == pytest.approx(expected, rel=1e-9, abs=1e-12)


@given(tri_params)
def test_triangulars_are_regular(params):
    assert is_regular_numeric(Triangular(*params), 41)


def test_triangular_validation():
    for v, q in [(0.0, 0.5), (1.0, 0.0), (1.0, 1.5), (math.inf, 0.5)]:
        with pytest.raises(DomainError):
            Triangular(v, q)
    with pytest.raises(DomainError):
        RootIrregular(0)
    with pytest.raises(DomainError):
        EqualRevenueTruncated(1.0)


def test_tail_masses():
    assert TriangularLimit().tail_mass == 1.0
    assert RootIrregular(4).tail_mass == 0.25
    assert Triangular(2.0, 0.5).tail_mass == 0.0
    assert EqualRevenueTruncated(10.0).tail_mass == 0.0


# -- instances and JSON ------------------------------------------------------

@given(st.lists(specs, min_size=1, max_size=6))
def test_instance_json_roundtrip(buyers):
    inst = Instance(tuple(buyers))
    assert Instance.from_json(inst.to_json()) == inst
    for b in buyers:
        assert spec_from_dict(json.loads(json.dumps(spec_to_dict(b)))) == b


def test_instance_json_errors():
    for text in ["not json", "{}", '{"buyers": []}', '{"buyers": [{"type": "bogus"}]}',
                 '{"buyers": [{"type": "triangular", "v": 1}]}']:
        with pytest.raises(DomainError):
            Instance.from_json(text)


def test_triangular_view_order():
    inst = Instance.of(Triangular(1.0, 1.0), TriangularLimit(), Triangular(3.0, 0.2), Triangular(2.0, 0.4))
    assert [b.v for b in inst.triangular_view()] == [math.inf, 3.0, 2.0, 1.0]
    assert [b.v for b in inst.finite_triangular()] == [3.0, 2.0, 1.0]
    with pytest.raises(NotTriangularError):
        Instance.of(RootIrregular(2)).triangular_view()
