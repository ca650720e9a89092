"""Student-t primitives and random stream tests.

Closed forms exist for nu in {1, 2}; everything else is checked against
scipy.stats.t as an independent implementation and against internal
round-trip identities.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from ranksel.distributions import (
    RandomStream,
    sample_chi2,
    sample_normal,
    sample_t,
    t_cdf,
    t_logcdf,
    t_pdf,
    t_quantile,
)
from ranksel.quadrature import geometric_edges, panel_quadrature


def test_pdf_cauchy_closed_form():
    assert t_pdf(0.0, 1) == pytest.approx(1.0 / math.pi, abs=1e-14)


def test_pdf_nu2_closed_form():
    # g_2(1) = 1 / (3 * sqrt(3))
    assert t_pdf(1.0, 2) == pytest.approx(1.0 / (3.0 * math.sqrt(3.0)), abs=1e-14)


def test_cdf_zero_is_half():
    for nu in (1, 2, 7, 100):
        assert t_cdf(0.0, nu) == 0.5


def test_cdf_cauchy_closed_form():
    assert t_cdf(1.0, 1) == pytest.approx(0.75, abs=1e-13)
    assert t_cdf(-1.0, 1) == pytest.approx(0.25, abs=1e-13)


def test_cdf_nu2_closed_form():
    # G_2(x) = 1/2 + x / (2 * sqrt(2 + x^2))
    x = math.sqrt(2.0)
    assert t_cdf(x, 2) == pytest.approx(0.5 + x / (2.0 * math.sqrt(2.0 + x * x)), abs=1e-13)


def test_cdf_pdf_match_scipy():
    xs = np.concatenate([np.linspace(-80.0, 80.0, 321), np.linspace(-2.0, 2.0, 81)])
    for nu in (1, 2, 3, 5, 9, 30, 120, 500):
        assert np.abs(t_cdf(xs, nu) - stats.t.cdf(xs, nu)).max() < 1e-12
        assert np.abs(t_pdf(xs, nu) - stats.t.pdf(xs, nu)).max() < 1e-12


def test_logcdf_deep_tail():
    # direct log in the lower tail keeps precision where cdf underflows to 0
    val = t_logcdf(-500.0, 30)
    assert val == pytest.approx(stats.t.logcdf(-500.0, 30), rel=1e-10)
    assert t_logcdf(6.0, 7) == pytest.approx(math.log(t_cdf(6.0, 7)), abs=1e-13)


@given(st.floats(-60.0, 60.0), st.integers(1, 60))
@settings(max_examples=60)
def test_pdf_symmetry(x, nu):
    assert t_pdf(x, nu) == t_pdf(-x, nu)
    assert t_pdf(x, nu) > 0.0


@given(st.floats(-60.0, 60.0), st.integers(1, 60))
@settings(max_examples=60)
def test_cdf_reflection(x, nu):
    assert abs(t_cdf(x, nu) + t_cdf(-x, nu) - 1.0) < 1e-12


@given(st.floats(-40.0, 40.0), st.floats(-40.0, 40.0), st.integers(1, 60))
@settings(max_examples=60)
def test_cdf_monotone(x1, x2, nu):
    lo, hi = min(x1, x2), max(x1, x2)
    assert t_cdf(lo, nu) <= t_cdf(hi, nu)


def test_pdf_integrates_to_one():
    for nu in (1, 3, 30):
        T = t_quantile(1.0 - 1e-12, nu)
        edges = geometric_edges(-T, T, (0.0,))
        res = panel_quadrature(lambda x: t_pdf(x, nu), edges)
        assert res.value == pytest.approx(1.0, abs=1e-9)


def test_quantile_median_and_cauchy():
    assert t_quantile(0.5, 7) == 0.0
    assert t_quantile(0.75, 1) == pytest.approx(1.0, abs=1e-12)
    assert t_quantile(0.25, 1) == pytest.approx(-1.0, abs=1e-12)


def test_quantile_round_trip():
    for nu in (1, 2, 4, 30):
        for q in (1e-9, 0.01, 0.3, 0.9, 0.999, 1.0 - 1e-9):
            v = t_quantile(q, nu)
            assert abs(t_cdf(v, nu) - q) < 1e-10


def test_quantile_rejects_bad_q():
    for q in (0.0, 1.0, -0.5, 1.5):
        with pytest.raises(ValueError):
            t_quantile(q, 4)


def test_nu_validation():
    with pytest.raises(ValueError):
        t_cdf(0.0, 0)
    with pytest.raises(TypeError):
        t_cdf(0.0, 2.5)


def test_sample_t_ks():
    rng = RandomStream(1234)
    for nu in (2, 8):
        draws = sample_t(nu, rng.substream(nu), size=10**5)
        res = stats.kstest(draws, lambda x: stats.t.cdf(x, nu))
        assert res.pvalue > 0.001


def test_sample_chi2_moments():
    rng = RandomStream(77)
    draws = sample_chi2(1, rng.substream(1), size=10**6)
    # mean df, variance 2*df
    assert abs(draws.mean() - 1.0) < 3.0 * math.sqrt(2.0 / 10**6)
    draws = sample_chi2(5, rng.substream(5), size=10**6)
    se_var = math.sqrt((stats.chi2.moment(4, 5) - stats.chi2.var(5) ** 2) / 10**6)
    assert abs(draws.var(ddof=1) - 10.0) < 3.0 * se_var


def test_sample_normal_basic():
    rng = RandomStream(5)
    draws = sample_normal(3.0, 4.0, rng.substream(0), size=10**5)
    assert abs(draws.mean() - 3.0) < 3.0 * 2.0 / math.sqrt(10**5)
    with pytest.raises(ValueError):
        sample_normal(0.0, 0.0, rng)
    with pytest.raises(ValueError):
        sample_chi2(0, rng)


def test_stream_determinism():
    a = sample_t(4, RandomStream(9).substream(1, 2), size=16)
    b = sample_t(4, RandomStream(9).substream(1, 2), size=16)
    c = sample_t(4, RandomStream(9).substream(1, 3), size=16)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_substream_nesting_matches_flat_path():
    flat = RandomStream(11).substream(3, 1, 4)
    nested = RandomStream(11).substream(3).substream(1).substream(4)
    assert np.array_equal(
        flat.generator.standard_normal(8), nested.generator.standard_normal(8)
    )


def test_substream_id_validation():
    rng = RandomStream(1)
    with pytest.raises(ValueError):
        rng.substream(-1)
    with pytest.raises(ValueError):
        rng.substream(2**32)


def test_scalar_versus_array_returns():
    rng = RandomStream(2)
    assert isinstance(sample_t(3, rng), float)
    assert sample_t(3, rng, size=4).shape == (4,)
    assert isinstance(t_cdf(1.0, 3), float)
    assert t_cdf(np.array([0.0, 1.0]), 3).shape == (2,)
