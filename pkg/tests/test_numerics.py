import math
import random

import pytest
from hypothesis import given, strategies as st

from hpcs_qkd.errors import DomainError, TruncationError
from hpcs_qkd.numerics import SeriesConfig, bessel_i0, binary_entropy, weighted_series_sum
from hpcs_qkd.sources import pcs_pn

from conftest import i0_horner


@pytest.mark.parametrize(
    "x, expected",
    [
        (0.0, 1.0),
        # direct series to 30 / 40 terms (mpmath agrees to 30 digits)
        (0.2, 1.0100250277951458),
        (2.0, 2.2795853023360673),
    ],
)
def test_bessel_i0_values(x, expected):
    assert bessel_i0(x) == pytest.approx(expected, rel=1e-14)


def test_bessel_i0_matches_horner_oracle_on_grid():
    for k in range(1001):
        x = 10.0 * k / 1000
        assert bessel_i0(x) == pytest.approx(i0_horner(x), rel=1e-12)


@given(st.floats(0.0, 10.0), st.floats(0.0, 10.0))
def test_bessel_i0_strictly_increasing(x1, x2):
    if x1 < x2:
        assert bessel_i0(x1) <= bessel_i0(x2)
        # I0(x2) - I0(x1) ~ (x2**2 - x1**2) / 4; strict only once that clears rounding
        if x2**2 - x1**2 > 1e-12:
            assert bessel_i0(x1) < bessel_i0(x2)
    assert bessel_i0(x1) >= 1.0


@pytest.mark.parametrize("x", [float("nan"), float("inf"), -0.5])
def test_bessel_i0_rejects_bad_input(x):
    with pytest.raises(DomainError):
        bessel_i0(x)


def test_binary_entropy_points():
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert binary_entropy(0.11) == pytest.approx(0.49991595816452800, rel=1e-13)


def test_binary_entropy_symmetric_and_bounded():
    rng = random.Random(7)
    for _ in range(1000):
        p = rng.random()
        h = binary_entropy(p)
        assert 0.0 <= h <= 1.0
        assert h == pytest.approx(binary_entropy(1.0 - p), abs=1e-12)


@pytest.mark.parametrize("p", [-1e-9, 1.0000001])
def test_binary_entropy_domain(p):
    with pytest.raises(DomainError):
        binary_entropy(p)


def test_series_sum_trivial_cases():
    assert weighted_series_sum(lambda n: 0.0) == 0.0
    assert weighted_series_sum(lambda n: 1.0 if n == 0 else 0.0) == 1.0


def test_series_sum_reproduces_i0():
    mu = 0.3
    total = weighted_series_sum(lambda n: mu ** (2 * n) / math.factorial(n) ** 2)
    assert total == pytest.approx(bessel_i0(0.6), rel=1e-14)


def test_series_sum_flags_truncation():
    with pytest.raises(TruncationError):
        weighted_series_sum(lambda n: 0.9**n, SeriesConfig(n_max=10))


@given(st.floats(1e-6, 1.0))
def test_pcs_normalization_through_series(mu):
    assert weighted_series_sum(lambda n: pcs_pn(mu, n)) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("kwargs", [dict(n_max=9), dict(tail_tol=0.0), dict(tail_tol=1e-9)])
def test_series_config_invariants(kwargs):
    with pytest.raises(DomainError):
        SeriesConfig(**kwargs)
