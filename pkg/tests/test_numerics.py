import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mechgap.errors import ConvergenceError, DomainError
from mechgap.numerics import (
    DEFAULT_TOL,
    ToleranceConfig,
    adaptive_simpson,
    bisect,
    golden_section_max,
    integrate_pieces,
    integrate_to_infinity,
    invert_decreasing,
)


def test_default_config_values():
    assert DEFAULT_TOL.to_dict() == {
        "series_tol": 1e-12,
        "quad_tol": 1e-9,
        "root_tol": 1e-10,
        "max_iter": 200,
        "grid_resolution": 1000,
    }


@pytest.mark.parametrize("kwargs", [{"quad_tol": 0.0}, {"series_tol": -1.0}, {"max_iter": 10},
                                    {"grid_resolution": 0}])
def test_config_rejects_bad_values(kwargs):
    with pytest.raises(DomainError):
        ToleranceConfig(**kwargs)


def test_simpson_polynomial_and_smooth():
    val, err = adaptive_simpson(lambda x: x ** 3, 0.0, 2.0, 1e-12)
    assert val == pytest.approx(4.0, abs=1e-12)
    val, _ = adaptive_simpson(math.sin, 0.0, math.pi, 1e-11)
    assert val == pytest.approx(2.0, abs=1e-10)
    assert err >= 0


def test_simpson_endpoint_overrides():
    # sin(x)/x has a removable singularity at 0
    f = lambda x: math.sin(x) / x  # noqa: E731
    val, _ = adaptive_simpson(f, 0.0, 1.0, 1e-12, fa=1.0)
    assert val == pytest.approx(0.9460830703671830, abs=1e-11)


def test_integrate_pieces_matches_exact():
    edges = np.array([0.0, 0.5, 1.0, 3.0])
    pieces, err = integrate_pieces(lambda x: np.exp(-x), edges, 1e-12)
    exact = np.exp(-edges[:-1]) - np.exp(-edges[1:])
    np.testing.assert_allclose(pieces, exact, atol=1e-13)
    assert err <= 1e-10


def test_integrate_to_infinity():
    val, _ = integrate_to_infinity(lambda x: 1.0 / (x * x), 2.0, 1e-12)
    assert val == pytest.approx(0.5, abs=1e-10)


def test_bisect_and_invert():
    assert bisect(lambda x: x * x - 2.0, 0.0, 2.0, 1e-13, 200) == pytest.approx(math.sqrt(2), abs=1e-12)
    x = invert_decreasing(lambda p: 1.0 / (p - 1.0), 0.25, 1.0, 1e-12, 200)
    assert x == pytest.approx(5.0, abs=1e-10)


def test_bisect_requires_sign_change():
    with pytest.raises((ConvergenceError, DomainError)):
        bisect(lambda x: x * x + 1.0, -1.0, 1.0, 1e-10, 200)


@given(st.floats(0.1, 0.9))
def test_golden_section_finds_parabola_peak(c):
    x, fx = golden_section_max(lambda t: -(t - c) ** 2, 0.0, 1.0, 1e-10, 200)
    assert x == pytest.approx(c, abs=1e-8)
    assert fx == pytest.approx(0.0, abs=1e-14)
