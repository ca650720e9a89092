"""Critical-constant equation tests: closed identities, Monte Carlo
oracles independent of the quadrature path, and solver contracts."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ranksel.distributions import RandomStream
from ranksel.hconst import (
    DD,
    RINOTT,
    HEquationSpec,
    SolverError,
    dd_prob,
    h_table,
    mc_oracle,
    pairwise_prob,
    solve_h,
)

SEED = 20260814


def test_pairwise_prob_at_zero():
    for nu in (1, 2, 9, 40):
        assert pairwise_prob(0.0, nu) == pytest.approx(0.5, abs=1e-9)


def test_pairwise_prob_symmetry():
    for h in (0.5, 2.0, 7.5):
        total = pairwise_prob(h, 5) + pairwise_prob(-h, 5)
        assert total == pytest.approx(1.0, abs=1e-9)


def test_dd_prob_at_zero_is_uniform_best():
    # max of k t draws beats one more with probability k/(k+1)
    for k in (1, 2, 9, 99):
        assert dd_prob(0.0, k, 5) == pytest.approx(1.0 / (k + 1), abs=1e-9)


def test_dd_prob_k1_equals_pairwise():
    for h in (-2.0, 0.3, 4.0):
        for nu in (2, 17):
            assert dd_prob(h, 1, nu) == pytest.approx(pairwise_prob(h, nu), abs=1e-12)


def test_pairwise_prob_against_mc():
    # independent oracle: raw numpy paired draws, no shared code path
    gen = np.random.Generator(np.random.PCG64(SEED))
    draws = gen.standard_t(4, size=(10**7, 2))
    hits = np.mean(draws[:, 1] - draws[:, 0] <= 2.0)
    se = math.sqrt(hits * (1 - hits) / 10**7)
    assert abs(pairwise_prob(2.0, 4) - hits) < 3.0 * se


def test_dd_prob_against_mc():
    spec = HEquationSpec(50, 4, 0.9, DD)
    est = mc_oracle(spec, 3.0, 10**6, RandomStream(SEED).substream(1))
    assert abs(dd_prob(3.0, 50, 4) - est.value) < 3.0 * est.std_error


def test_dd_prob_large_k_stable():
    v = dd_prob(3.0, 10**5, 4)
    assert 0.0 < v < 1.0
    assert np.isfinite(v)


def test_dd_prob_monotone_in_h_and_k():
    probs = [dd_prob(h, 10, 6) for h in (0.0, 1.0, 2.0, 4.0)]
    assert all(a < b for a, b in zip(probs, probs[1:]))
    by_k = [dd_prob(2.0, k, 6) for k in (1, 5, 25)]
    assert all(a > b for a, b in zip(by_k, by_k[1:]))


def test_solve_symmetry_point():
    for variant in (DD, RINOTT):
        hc = solve_h(HEquationSpec(1, 4, 0.5, variant))
        assert abs(hc.value) < 1e-9
        assert hc.residual < 1e-8


def test_solve_k1_variants_coincide():
    for nu, p in ((4, 0.9), (1, 0.75), (30, 0.99)):
        a = solve_h(HEquationSpec(1, nu, p, DD))
        b = solve_h(HEquationSpec(1, nu, p, RINOTT))
        assert abs(a.value - b.value) < 1e-8


def test_solve_monotone_in_p_and_k():
    hs = [solve_h(HEquationSpec(5, 6, p, DD)).value for p in (0.6, 0.8, 0.95)]
    assert all(a < b for a, b in zip(hs, hs[1:]))
    hs = [solve_h(HEquationSpec(k, 6, 0.9, RINOTT)).value for k in (1, 4, 20)]
    assert all(a < b for a, b in zip(hs, hs[1:]))


def test_solve_jensen_ordering():
    for k in (2, 10, 50):
        for nu in (2, 9):
            dd = solve_h(HEquationSpec(k, nu, 0.9, DD))
            rin = solve_h(HEquationSpec(k, nu, 0.9, RINOTT))
            assert rin.value > dd.value


def test_solve_negative_h_regime():
    # p below the h=0 value 1/(k+1) forces a mirrored bracket
    hc = solve_h(HEquationSpec(1, 3, 0.2, DD))
    assert hc.value < 0.0
    assert hc.bracket[0] < 0.0
    assert dd_prob(hc.value, 1, 3) == pytest.approx(0.2, abs=1e-8)


def test_solve_diagnostics_contract():
    hc = solve_h(HEquationSpec(10, 9, 0.9, RINOTT))
    assert hc.residual < 1e-8
    assert hc.bracket[0] <= hc.value <= hc.bracket[1]
    assert hc.iterations > 0
    assert hc.quadrature_nodes > 0


def test_solve_rinott_matches_restated_equation():
    # pairwise_prob(h, nu) must equal p^(1/k) at the solution
    spec = HEquationSpec(100, 7, 0.95, RINOTT)
    hc = solve_h(spec)
    assert pairwise_prob(hc.value, 7) == pytest.approx(0.95 ** (1 / 100), abs=1e-10)


def test_solve_very_large_k():
    hc = solve_h(HEquationSpec(10**5, 4, 0.9, DD))
    assert hc.residual < 1e-8
    assert hc.value > 0.0


@given(
    st.integers(1, 20),
    st.integers(1, 30),
    st.floats(0.05, 0.99),
    st.sampled_from((DD, RINOTT)),
)
@settings(max_examples=15, deadline=None)
def test_solve_round_trip_property(k, nu, p, variant):
    hc = solve_h(HEquationSpec(k, nu, p, variant))
    if variant == DD:
        assert dd_prob(hc.value, k, nu) == pytest.approx(p, abs=1e-8)
    else:
        assert pairwise_prob(hc.value, nu) ** k == pytest.approx(p, abs=1e-7)


def test_spec_validation():
    with pytest.raises(ValueError):
        HEquationSpec(0, 4, 0.9, DD)
    with pytest.raises(ValueError):
        HEquationSpec(2, 4, 1.0, DD)
    with pytest.raises(ValueError):
        HEquationSpec(2, 4, 0.9, "median")
    with pytest.raises(ValueError):
        HEquationSpec(2, 0, 0.9, RINOTT)


def test_mc_oracle_trivial_cases():
    rng = RandomStream(SEED)
    est = mc_oracle(HEquationSpec(1, 1, 0.9, DD), 0.0, 10**6, rng.substream(0))
    assert abs(est.value - 0.5) < 3.0 * est.std_error
    est = mc_oracle(HEquationSpec(3, 2, 0.9, RINOTT), 1e6, 10**4, rng.substream(1))
    assert est.value == 1.0


def test_mc_oracle_determinism():
    spec = HEquationSpec(4, 5, 0.9, DD)
    a = mc_oracle(spec, 2.5, 10**4, RandomStream(3).substream(8))
    b = mc_oracle(spec, 2.5, 10**4, RandomStream(3).substream(8))
    assert a == b


def test_mc_oracle_solver_agreement():
    spec = HEquationSpec(10, 9, 0.9, DD)
    hc = solve_h(spec)
    est = mc_oracle(spec, hc.value, 10**6, RandomStream(SEED).substream(2))
    assert abs(est.value - 0.9) < 3.0 * est.std_error


def test_h_table_k1_ratio_is_one():
    rows = h_table([1], 6, 0.9)
    assert rows[0].ratio == pytest.approx(1.0, abs=1e-8)


def test_h_table_columns_increasing():
    rows = h_table([2, 5, 20, 100], 4, 0.9)
    dd_col = [r.dd.value for r in rows]
    rin_col = [r.rinott.value for r in rows]
    assert all(a < b for a, b in zip(dd_col, dd_col[1:]))
    assert all(a < b for a, b in zip(rin_col, rin_col[1:]))


def test_h_table_ratio_drifts_toward_limit():
    rows = h_table([10, 100, 1000], 4, 0.9)
    target = 2.0 ** (2.0 / 4.0)
    gaps = [abs(r.ratio**2 - target) for r in rows]
    assert gaps[0] > gaps[1] > gaps[2]


def test_h_table_thread_count_irrelevant():
    seq = h_table([1, 5, 25], 9, 0.95, threads=1)
    par = h_table([1, 5, 25], 9, 0.95, threads=3)
    assert [(r.dd.value, r.rinott.value) for r in seq] == [
        (r.dd.value, r.rinott.value) for r in par
    ]


def test_h_table_validation():
    with pytest.raises(ValueError):
        h_table([], 4, 0.9)
    with pytest.raises(ValueError):
        h_table([5, 5], 4, 0.9)
    with pytest.raises(ValueError):
        h_table([5, 2], 4, 0.9)


def test_h_table_nu_schedules():
    rows = h_table([2, 4], {2: 3, 4: 9}, 0.9)
    assert [r.nu for r in rows] == [3, 9]
    rows = h_table([2, 4], lambda k: k + 1, 0.9)
    assert [r.nu for r in rows] == [3, 5]
