from __future__ import annotations

import json
import math

import numpy as np
import numpy.testing as nptest
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from legendre_diff.errors import ValidationError
from legendre_diff.noise import NoiseSpec, lp_norm, perturb
from legendre_diff.series import LegendreSeries


@pytest.mark.parametrize(
    "seq, p, expected",
    [((3, 4), 2, 5.0), ((1, -2, 3), math.inf, 3.0), ((1, 1, 1), 1, 3.0), ((1, -2, 3), "inf", 3.0)],
)
def test_lp_norm(seq, p, expected):
    assert lp_norm(seq, p) == pytest.approx(expected, rel=1e-15)


def test_lp_norm_rejects_small_p():
    with pytest.raises(ValidationError):
        lp_norm([1.0], 0.5)


def test_lp_norm_large_p_no_overflow():
    assert lp_norm([1e200, 1e200], 4) == pytest.approx(1e200 * 2**0.25)


SERIES = LegendreSeries(np.linspace(1.0, 0.1, 12))


class TestAdversarial:
    def test_single_index(self):
        spec = NoiseSpec(2, 0.01, "adversarial", indices=(11,))
        _, xi = perturb(SERIES, spec)
        assert xi[11] == 0.01
        assert np.count_nonzero(xi) == 1

    def test_equal_l1_split(self):
        spec = NoiseSpec(1, 0.1, "adversarial", indices=(5, 6))
        _, xi = perturb(SERIES, spec)
        nptest.assert_allclose(xi[[5, 6]], [0.05, 0.05], rtol=1e-15)
        assert np.count_nonzero(xi) == 2

    def test_sup_budget_each_index(self):
        spec = NoiseSpec(math.inf, 0.2, "adversarial", indices=(0, 3, 7))
        _, xi = perturb(SERIES, spec)
        nptest.assert_array_equal(xi[[0, 3, 7]], [0.2, 0.2, 0.2])

    def test_index_beyond_series_extends(self):
        spec = NoiseSpec(2, 0.01, "adversarial", indices=(20,))
        noisy, xi = perturb(SERIES, spec)
        assert len(noisy) == len(xi) == 21
        assert noisy.coeffs[20] == -0.01

    def test_empty_indices_rejected(self):
        with pytest.raises(ValidationError):
            NoiseSpec(2, 0.01, "adversarial", indices=())

    def test_indices_beyond_support_rejected(self):
        with pytest.raises(ValidationError):
            NoiseSpec(2, 0.01, "adversarial", indices=(9,), support_max=5)


class TestRandom:
    def test_budget_saturated(self):
        _, xi = perturb(SERIES, NoiseSpec(2, 0.001, "random", seed=7))
        assert abs(lp_norm(xi, 2) - 0.001) <= 1e-12

    def test_deterministic(self):
        spec = NoiseSpec(1.5, 0.3, "random", seed=11)
        a, xa = perturb(SERIES, spec)
        b, xb = perturb(SERIES, spec)
        assert a.coeffs.tobytes() == b.coeffs.tobytes()
        assert xa.tobytes() == xb.tobytes()

    def test_streams_differ(self):
        spec = NoiseSpec(2, 0.3, "random", seed=11)
        _, xa = perturb(SERIES, spec, stream=(0,))
        _, xb = perturb(SERIES, spec, stream=(1,))
        assert not np.array_equal(xa, xb)

    def test_support_max(self):
        _, xi = perturb(SERIES, NoiseSpec(2, 0.3, "random", seed=1, support_max=4))
        assert np.all(xi[5:] == 0)
        assert np.all(xi[:5] != 0)

    @settings(max_examples=80, deadline=None)
    @given(
        p=st.one_of(st.floats(1, 50), st.just(math.inf)),
        delta=st.floats(1e-9, 0.999),
        seed=st.integers(0, 2**32 - 1),
    )
    def test_norm_and_reconstruction(self, p, delta, seed):
        noisy, xi = perturb(SERIES, NoiseSpec(p, delta, "random", seed=seed))
        assert abs(lp_norm(xi, p) - delta) <= 1e-12
        nptest.assert_allclose(noisy.coeffs + xi, SERIES.coeffs, rtol=1e-15, atol=1e-16)


@pytest.mark.parametrize("delta", [0.0, 1.0, -0.1, 2.0])
def test_delta_outside_unit_interval(delta):
    with pytest.raises(ValidationError):
        NoiseSpec(2, delta)


def test_from_json():
    spec = NoiseSpec.from_json(json.dumps({"p": "inf", "delta": 1e-4, "mode": "adversarial", "indices": [10]}))
    assert spec.p == math.inf
    assert spec.indices == (10,)
    spec = NoiseSpec.from_json('{"p": 2, "delta": 1e-4, "mode": "adversarial", "indices": [10]}')
    assert spec.p == 2.0


def test_from_json_rejects_unknown_field():
    with pytest.raises(ValidationError):
        NoiseSpec.from_dict({"p": 2, "delta": 0.1, "colour": "white"})
