import math
from dataclasses import replace

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lafbf import _backend, _pycore
from lafbf.bands import Band, plan_for
from lafbf.fbm_line import RandomStream, generate_fbm_line
from lafbf.orientation import OrientationField
from lafbf.synthesis import (
    SynthesisParams,
    alpha0_grid,
    band_sample,
    band_scale,
    gamma_factor,
    precompute,
    synthesize_elementary,
    synthesize_lafbf,
    synthesize_points,
)

from conftest import BACKENDS


def _mp_gamma(H):
    H = mpmath.mpf(H)
    return float(mpmath.pi / (H * mpmath.gamma(2 * H) * mpmath.sin(H * mpmath.pi)))


class TestGammaFactor:
    @pytest.mark.parametrize("H,expected", [(0.5, 6.283185), (0.25, 10.026513), (0.75, 6.684342)])
    def test_examples(self, H, expected):
        assert gamma_factor(H) == pytest.approx(expected, abs=6e-6)
        assert gamma_factor(H) == pytest.approx(_mp_gamma(str(H)), rel=1e-13)

    def test_rejects_bad_hurst(self):
        with pytest.raises(ValueError):
            gamma_factor(1.0)


class TestBandSample:
    @pytest.mark.parametrize("p,q,rng_", [(0, 1, (0, 3)), (1, 1, (0, 6)), (-1, 2, (-3, 6))])
    def test_line_ranges(self, p, q, rng_):
        assert Band(p, q, math.atan2(p, q)).line_range(3) == rng_

    def test_scale_diagonal(self):
        b = Band(1, 1, math.pi / 4)
        ref = float((mpmath.cos(mpmath.pi / 4) / 3) ** mpmath.mpf("0.2"))
        assert ref == pytest.approx(0.748984, abs=5e-7)
        assert band_scale(b, 0.2, 3) == pytest.approx(ref, rel=1e-14)
        assert band_scale(Band(1, 0, math.pi / 2), 0.5, 3) == pytest.approx(3 ** -0.5)

    def test_origin_is_zero(self):
        b = Band(0, 1, 0.0)
        line = generate_fbm_line(0.5, 0, 3, RandomStream(4))
        assert band_sample(line, b, 0, 2, 3) == 0.0
        assert band_sample(line, b, 2, 1, 3) == 3 ** -0.5 * line[2]

    def test_variance_matches_rescaled_fbm(self):
        b = Band(0, 1, 0.0)
        stream = RandomStream(8)
        vals = np.array([band_sample(generate_fbm_line(0.5, 0, 3, stream), b, 2, 0, 3)
                         for _ in range(10_000)])
        sq = vals**2
        se = sq.std(ddof=1) / math.sqrt(len(sq))
        assert abs(sq.mean() - 2 / 3) <= 3 * se

    def test_pixel_outside_asserts(self):
        b = Band(0, 1, 0.0)
        line = generate_fbm_line(0.5, 0, 3, RandomStream(4))
        with pytest.raises(AssertionError):
            band_sample(line, b, 4, 0, 3)


class TestParams:
    @pytest.mark.parametrize("kw", [{"grid_order": 10}, {"grid_order": 0}, {"hurst": 1.2},
                                    {"alpha": 0.0}, {"alpha": 2.0}, {"epsilon": 0.0},
                                    {"seed": -1}, {"seed": 2**64}, {"sigma": -0.1}])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            SynthesisParams(**kw)

    def test_defaults(self):
        p = SynthesisParams()
        assert (p.hurst, p.alpha, p.epsilon, p.size, p.sigma) == (0.2, 0.1, 0.01, 256, 0.1)

    def test_state_mismatch(self, small_params, small_state):
        with pytest.raises(ValueError):
            synthesize_elementary(replace(small_params, seed=12), 0.0, small_state)


class TestSynthesis:
    def test_pinned_origin(self, small_params, small_state):
        g = synthesize_lafbf(small_params, OrientationField.preset("v2"), small_state)
        assert g.values[0, 0] == 0.0
        assert g.values.shape == (16, 16)
        assert g.plan_digest == small_state.plan.digest()

    def test_constant_field_is_elementary(self, small_params, small_state, backend):
        a = synthesize_elementary(small_params, 0.7, small_state, backend=backend)
        b = synthesize_lafbf(small_params, OrientationField.constant(0.7), small_state, backend=backend)
        assert a.values.tobytes() == b.values.tobytes()

    def test_brute_force_sum(self, small_params, small_state):
        """Direct double loop over pixels and active bands."""
        p, st_ = small_params, small_state
        r = p.grid_order
        field = OrientationField.preset("v1")
        a0 = alpha0_grid(field, r)
        bw = st_.band_weights(p.hurst)
        ref = np.zeros((r + 1, r + 1))
        for k2 in range(r + 1):
            for k1 in range(r + 1):
                for i, b in enumerate(st_.plan.bands):
                    if _pycore.periodic_distance(b.theta, a0[k2, k1]) <= p.alpha:
                        ref[k2, k1] += bw[i] / st_.scales[i] * band_sample(st_.lines[i], b, k1, k2, r)
        got = synthesize_lafbf(p, field, st_).values
        np.testing.assert_allclose(got, ref, rtol=1e-12, atol=1e-13)

    @pytest.mark.parametrize("regularized", [False, True])
    def test_backends_agree(self, regularized):
        if len(BACKENDS) < 2:
            pytest.skip("compiled backend not built")
        p = SynthesisParams(hurst=0.4, alpha=0.3, epsilon=0.05, grid_order=31, seed=3,
                            regularized=regularized)
        st_ = precompute(p)
        field = OrientationField.preset("v3")
        a = synthesize_lafbf(p, field, st_, backend="python").values
        b = synthesize_lafbf(p, field, st_, backend="cython").values
        if regularized:
            # libm and numpy exp may differ in the last bit
            np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-14)
        else:
            assert a.tobytes() == b.tobytes()

    def test_thread_counts_identical(self, small_params):
        s1 = precompute(small_params, threads=1)
        s4 = precompute(small_params, threads=4)
        assert s1.flat.tobytes() == s4.flat.tobytes()
        f = OrientationField.preset("v2")
        a = synthesize_lafbf(small_params, f, s1, threads=1).values
        b = synthesize_lafbf(small_params, f, s4, threads=4).values
        assert a.tobytes() == b.tobytes()

    def test_points_equal_grid(self, small_params, small_state, backend, rng):
        f = OrientationField.preset("v3")
        g = synthesize_lafbf(small_params, f, small_state, backend=backend).values
        k1, k2 = rng.integers(0, 16, (2, 40))
        pts = synthesize_points(small_params, f, small_state, k1, k2, backend=backend)
        assert pts.tobytes() == g[k2, k1].tobytes()
        with pytest.raises(ValueError):
            synthesize_points(small_params, f, small_state, [16], [0])

    def test_seeds_give_different_fields(self, small_params):
        a = synthesize_elementary(small_params, 0.0, precompute(small_params)).values
        p2 = replace(small_params, seed=small_params.seed + 1)
        b = synthesize_elementary(p2, 0.0, precompute(p2)).values
        assert not np.array_equal(a, b)


class TestActiveRange:
    @given(eps=st.sampled_from([0.3, 0.1, 0.05, 0.02]),
           hw=st.floats(0.001, math.pi / 2),
           a0=st.lists(st.floats(-math.pi / 2, math.pi / 2, exclude_min=True), min_size=1, max_size=30))
    @settings(max_examples=150, deadline=None)
    def test_binary_search_equals_linear_scan(self, eps, hw, a0):
        th = plan_for(eps, 15).thetas
        a0 = np.array(a0)
        lin = _pycore.periodic_distance(th[None, :], a0[:, None]) <= hw
        for name in BACKENDS:
            assert np.array_equal(_backend.get(name).active_mask(th, a0, hw), lin)

    def test_band_exactly_on_edges(self):
        th = plan_for(0.1, 15).thetas
        for i in (0, 5, len(th) - 1):
            for a0 in (th[i], _pycore.reduce_angle(th[i] + 0.2), _pycore.reduce_angle(th[i] - 0.2)):
                lin = _pycore.periodic_distance(th, a0) <= 0.2
                for name in BACKENDS:
                    assert np.array_equal(_backend.get(name).active_mask(th, [a0], 0.2)[0], lin)
