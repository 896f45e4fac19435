from __future__ import annotations

import math

import numpy as np
import numpy.testing as nptest
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from legendre_diff.basis import eval_phi_deriv
from legendre_diff.errors import ValidationError
from legendre_diff.series import LegendreSeries, evaluate
from legendre_diff.truncation import DerivativePlan, apply, choose_N, coefficient_count


class TestChooseN:
    def test_quarter_exponent(self):
        assert choose_N(1e-4, 4, 2, 2, 1) == 10

    def test_sup_noise(self):
        assert choose_N(1e-2, 2.5, math.inf, 1, 1) == 4

    def test_scale_constant(self):
        assert choose_N(0.5, 4, 2, 2, 2) == 3

    @pytest.mark.parametrize("delta", [0.0, 1.0, 1.5])
    def test_rejects_delta(self, delta):
        with pytest.raises(ValidationError):
            choose_N(delta, 4, 2, 2)

    def test_rejects_nonpositive_denominator(self):
        # mu - 1/p + 1/s = 0.1 - 1 + 1/1e9 < 0
        with pytest.raises(ValidationError):
            choose_N(0.1, 0.1, 1, 1e9)

    @settings(max_examples=100, deadline=None)
    @given(
        mu=st.floats(0.5, 8),
        s=st.floats(1, 6),
        p=st.one_of(st.floats(1, 10), st.just(math.inf)),
        delta=st.floats(1e-12, 0.5),
    )
    def test_decade_scaling(self, mu, s, p, delta):
        denom = mu - (0 if math.isinf(p) else 1 / p) + 1 / s
        assume(denom > 0.05)
        small = delta / 10**denom
        assume(small > 1e-300)
        N = choose_N(delta, mu, p, s)
        assume(20 <= N <= 10**12)
        ratio = choose_N(small, mu, p, s) / N
        assert 10 * (1 - 1 / N) <= ratio <= 10 * (1 + 1 / N)


class TestPlan:
    def test_resolve_floor(self):
        plan = DerivativePlan(3, C_N=1.0).resolve(0.9, 4, 2, 2)
        assert plan.N == 4

    def test_resolve_rule(self):
        assert DerivativePlan(1, C_N=1.0).resolve(1e-4, 4, 2, 2).N == 10

    def test_from_json(self):
        assert DerivativePlan.from_json('{"r": 1, "N": 10}') == DerivativePlan(1, N=10)
        assert DerivativePlan.from_json('{"r": 1, "rule": {"C_N": 1.0}}') == DerivativePlan(1, C_N=1.0)

    def test_needs_exactly_one(self):
        with pytest.raises(ValidationError):
            DerivativePlan(1)
        with pytest.raises(ValidationError):
            DerivativePlan(1, N=3, C_N=1.0)

    def test_rejects_order(self):
        with pytest.raises(ValidationError):
            DerivativePlan(0, N=3)

    @pytest.mark.parametrize("r, N, expected", [(1, 10, 10), (3, 3, 1), (2, 1, 0)])
    def test_coefficient_count(self, r, N, expected):
        assert coefficient_count(DerivativePlan(r, N=N)) == expected


class TestApply:
    def test_first_derivative(self):
        out = apply(LegendreSeries.unit(2), DerivativePlan(1, N=2))
        nptest.assert_allclose(out.coeffs, [0.0, 3.872983346207417], atol=1e-15)

    def test_truncated_away(self):
        out = apply(LegendreSeries.unit(5), DerivativePlan(1, N=3))
        assert not np.any(out.coeffs)

    def test_second_derivative(self):
        out = apply(LegendreSeries.unit(2), DerivativePlan(2, N=5))
        assert out.coeffs[0] == pytest.approx(6.708203932499369, rel=1e-14)
        assert not np.any(out.coeffs[1:])

    def test_N_below_r_is_zero(self):
        out = apply(LegendreSeries([1.0, 2.0, 3.0]), DerivativePlan(3, N=2))
        assert not np.any(out.coeffs)

    def test_unresolved(self):
        with pytest.raises(ValidationError):
            apply(LegendreSeries.unit(2), DerivativePlan(1, C_N=1.0))

    @pytest.mark.parametrize("d", [1, 5, 12, 20])
    @pytest.mark.parametrize("r", [1, 2, 3])
    def test_noiseless_exactness(self, d, r):
        a = np.random.default_rng(d * 10 + r).normal(size=d + 1)
        t = np.linspace(-1, 1, 41)
        expected = sum(a[k] * eval_phi_deriv(k, r, t) for k in range(d + 1))
        got = evaluate(apply(LegendreSeries(a), DerivativePlan(r, N=d + 3)), t)
        assert np.max(np.abs(got - expected)) <= 1e-9 * max(1.0, np.abs(expected).max())

    def test_monotone_truncation(self):
        a = np.random.default_rng(1).normal(size=40)
        small = apply(LegendreSeries(a), DerivativePlan(2, N=15))
        big = apply(LegendreSeries(a[:16]), DerivativePlan(2, N=30))
        nptest.assert_allclose(big.padded(len(big))[: len(small)], small.coeffs, rtol=1e-13, atol=1e-12)

    def test_linearity(self):
        rng = np.random.default_rng(5)
        u, v = LegendreSeries(rng.normal(size=25)), LegendreSeries(rng.normal(size=25))
        plan = DerivativePlan(2, N=18)
        lhs = apply(2.5 * u - 0.75 * v, plan).coeffs
        rhs = (2.5 * apply(u, plan) - 0.75 * apply(v, plan)).coeffs
        nptest.assert_allclose(lhs, rhs, rtol=1e-13, atol=1e-13 * np.abs(lhs).max())
