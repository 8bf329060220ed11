"""Covariance propagation in the complex plane: polar pair -> phasor -> sum."""

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from risprop.channel import RisConfig, effective_channel, make_config
from risprop.geometry import DegenerateGeometryError, RisGeometry, Scenario, default_scenario
from risprop.lpu import AmpPhaseUncertainty, AngleUncertainty
from risprop.complexprop import (
    ChainStageError,
    Covariance2,
    UncertainComplex,
    apply_phase_shift,
    cascaded_covariance,
    coupled_covariance,
    propagate_full_chain,
    sum_effective,
)

from oracles import jacobian_fd

ZERO_UNC = AngleUncertainty(0.0, 0.0, 0.0)
TABLE_UNC = AngleUncertainty.from_std_degrees(0.49, 0.48, 0.18)
NOMINAL = (0.0, 0.0, 0.0)


def random_apu(rng) -> AmpPhaseUncertainty:
    va, vp = rng.uniform(1e-12, 1e-8), rng.uniform(1e-4, 1.0)
    cov = rng.uniform(-0.99, 0.99) * math.sqrt(va * vp)
    return AmpPhaseUncertainty(va, vp, cov)


class TestCovariance2:
    def test_mirrored_off_diagonal(self):
        c = Covariance2(2.0, 0.5, 1.0)
        assert c.u21 == c.u12 == 0.5

    def test_matrix_layout(self):
        c = Covariance2(2.0, 0.5, 1.0)
        assert np.array_equal(c.matrix(), [[2.0, 0.5], [0.5, 1.0]])

    def test_negative_trace_rejected(self):
        with pytest.raises(ValueError):
            Covariance2(-1.0, 0.0, -1.0)

    def test_indefinite_rejected(self):
        with pytest.raises(ValueError):
            Covariance2(1.0, 2.0, 1.0)

    def test_rounding_sized_negative_determinant_tolerated(self):
        c = Covariance2(1e-8, 1.00000001e-8, 1e-8)
        assert c.det() < 0.0
        assert c.det() >= -1e-15


class TestCascadedCovariance:
    def test_value_is_the_phasor(self):
        h = cascaded_covariance(2.0, math.pi / 3, AmpPhaseUncertainty(0.0, 0.0, 0.0))
        assert h.value == pytest.approx(2.0 * cmath.exp(1j * math.pi / 3))

    def test_pure_phase_uncertainty_is_tangential(self):
        amp, phase, vp = 1.5, 0.7, 1e-3
        h = cascaded_covariance(amp, phase, AmpPhaseUncertainty(0.0, vp, 0.0))
        s, c = math.sin(phase), math.cos(phase)
        want = amp * amp * vp * np.array([[s * s, -s * c], [-s * c, c * c]])
        assert np.allclose(h.cov.matrix(), want, rtol=1e-14, atol=0.0)
        # rank one: the radial direction carries nothing
        assert abs(h.cov.det()) <= 1e-15 * h.cov.trace() ** 2

    def test_pure_amplitude_uncertainty_on_real_axis_is_radial(self):
        h = cascaded_covariance(1.0, 0.0, AmpPhaseUncertainty(1e-6, 0.0, 0.0))
        assert np.array_equal(h.cov.matrix(), [[1e-6, 0.0], [0.0, 0.0]])

    def test_matches_matrix_product_oracle(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            amp = rng.uniform(0.1, 3.0)
            phase = rng.uniform(-10.0, 10.0)
            apu = random_apu(rng)
            got = cascaded_covariance(amp, phase, apu).cov.matrix()
            s, c = math.sin(phase), math.cos(phase)
            jac = np.array([[c, -amp * s], [s, amp * c]])
            want = jac @ apu.matrix() @ jac.T
            assert np.linalg.norm(got - want) <= 1e-14 * np.linalg.norm(want)

    def test_stays_psd_across_randomized_inputs(self):
        rng = np.random.default_rng(12)
        for _ in range(10_000):
            h = cascaded_covariance(rng.uniform(1e-6, 5.0), rng.uniform(-20, 20), random_apu(rng))
            assert h.cov.trace() >= 0.0
            assert h.cov.det() >= -1e-15


class TestApplyPhaseShift:
    def test_zero_shift_is_identity(self):
        h = UncertainComplex(1.0 + 2.0j, Covariance2(2.0, 0.3, 1.0))
        out = apply_phase_shift(h, 0.0)
        assert out.value == h.value
        assert out.cov == h.cov

    def test_quarter_turn_swaps_the_axes(self):
        h = UncertainComplex(1.0 + 0.0j, Covariance2(3.0, 0.0, 1.0))
        out = apply_phase_shift(h, math.pi / 2)
        assert out.cov.u11 == pytest.approx(1.0, rel=1e-14)
        assert out.cov.u22 == pytest.approx(3.0, rel=1e-14)
        assert out.cov.u12 == pytest.approx(0.0, abs=1e-15)

    def test_value_picks_up_the_phase(self):
        h = UncertainComplex(2.0 + 0.0j, Covariance2(1.0, 0.0, 1.0))
        out = apply_phase_shift(h, 1.2)
        assert out.value == pytest.approx(2.0 * cmath.exp(1.2j))

    @given(st.floats(-12.0, 12.0, allow_nan=False), st.integers(0, 2**32 - 1))
    @settings(max_examples=200)
    def test_trace_and_determinant_survive_the_rotation(self, phi, seed):
        rng = np.random.default_rng(seed)
        a = rng.standard_normal((2, 2))
        m = a @ a.T
        h = UncertainComplex(1.0 + 1.0j, Covariance2(m[0, 0], m[0, 1], m[1, 1]))
        out = apply_phase_shift(h, phi)
        assert out.cov.trace() == pytest.approx(h.cov.trace(), rel=1e-14, abs=1e-14)
        assert out.cov.det() == pytest.approx(h.cov.det(), rel=1e-13, abs=1e-13)

    def test_matches_rotation_conjugation_oracle(self):
        rng = np.random.default_rng(21)
        for _ in range(50):
            a = rng.standard_normal((2, 2))
            m = a @ a.T
            phi = rng.uniform(-7, 7)
            h = UncertainComplex(0.3 - 0.8j, Covariance2(m[0, 0], m[0, 1], m[1, 1]))
            rot = np.array([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])
            want = rot @ h.cov.matrix() @ rot.T
            got = apply_phase_shift(h, phi).cov.matrix()
            assert np.linalg.norm(got - want) <= 1e-14 * np.linalg.norm(want)


class TestSumEffective:
    def test_empty_input_rejected(self):
        with pytest.raises(ValueError):
            sum_effective([])

    def test_single_term_passes_through(self):
        h = UncertainComplex(1.0 - 1.0j, Covariance2(1.0, 0.1, 2.0))
        out = sum_effective([h])
        assert out.value == h.value and out.cov == h.cov

    def test_identical_terms_scale_linearly(self):
        h = UncertainComplex(0.5 + 0.5j, Covariance2(1.0, 0.25, 2.0))
        out = sum_effective([h] * 7)
        assert out.value == pytest.approx(7 * h.value)
        assert np.allclose(out.cov.matrix(), 7 * h.cov.matrix(), rtol=1e-14)

    def test_order_of_summation_is_immaterial(self):
        rng = np.random.default_rng(4)
        terms = []
        for _ in range(40):
            a = rng.standard_normal((2, 2))
            m = a @ a.T
            terms.append(
                UncertainComplex(complex(*rng.standard_normal(2)), Covariance2(m[0, 0], m[0, 1], m[1, 1]))
            )
        fwd = sum_effective(terms)
        rev = sum_effective(terms[::-1])
        perm = sum_effective([terms[i] for i in rng.permutation(40)])
        for other in (rev, perm):
            assert other.value == pytest.approx(fwd.value, rel=1e-12)
            assert np.allclose(other.cov.matrix(), fwd.cov.matrix(), rtol=1e-12)


class TestPropagateFullChain:
    def test_zero_uncertainty_collapses_to_the_plain_channel(self):
        sc = default_scenario()
        config = make_config("optimized", sc, NOMINAL)
        result = propagate_full_chain(sc, NOMINAL, ZERO_UNC, config)
        want = effective_channel(sc, NOMINAL, config).value
        assert result.total.value == pytest.approx(want, rel=1e-12)
        assert result.total.cov.trace() == pytest.approx(0.0, abs=1e-30)

    def test_gains_scale_the_value_but_not_the_covariance(self):
        base = default_scenario()
        gained = Scenario(
            p_tx=base.p_tx, p_rx=base.p_rx, p_c=base.p_c, ris=base.ris,
            frequency=base.frequency, gain_tx=4.0, gain_rx=9.0,
        )
        config = make_config("off", base, NOMINAL)
        plain = propagate_full_chain(base, NOMINAL, TABLE_UNC, config)
        scaled = propagate_full_chain(gained, NOMINAL, TABLE_UNC, config)
        assert scaled.total.value == pytest.approx(6.0 * plain.total.value, rel=1e-12)
        assert np.allclose(scaled.total.cov.matrix(), plain.total.cov.matrix(), rtol=1e-12)

    def test_per_element_intermediates_are_exposed(self):
        sc = default_scenario()
        config = make_config("random", sc, NOMINAL, seed=8)
        result = propagate_full_chain(sc, NOMINAL, TABLE_UNC, config)
        m_count = sc.ris.element_count
        assert len(result.cascaded) == m_count == len(result.effective)
        for m in (0, 59, 119):
            rotated = result.cascaded[m].value * cmath.exp(1j * config.phases[m])
            assert result.effective[m].value == pytest.approx(rotated, rel=1e-12)

    def test_rotation_preserves_every_per_element_trace(self):
        sc = default_scenario()
        for kind, seed in (("off", None), ("random", 5), ("optimized", None), ("quantized", None)):
            config = make_config(kind, sc, NOMINAL, seed=seed)
            result = propagate_full_chain(sc, NOMINAL, TABLE_UNC, config)
            for casc, eff in zip(result.cascaded, result.effective):
                assert eff.cov.trace() == pytest.approx(casc.cov.trace(), rel=1e-14)

    def test_off_and_random_share_traces_but_not_orientation(self):
        sc = default_scenario()
        off = propagate_full_chain(sc, NOMINAL, TABLE_UNC, make_config("off", sc, NOMINAL))
        rnd = propagate_full_chain(sc, NOMINAL, TABLE_UNC, make_config("random", sc, NOMINAL, seed=2))
        off_tr = [h.cov.trace() for h in off.effective]
        rnd_tr = [h.cov.trace() for h in rnd.effective]
        assert np.allclose(off_tr, rnd_tr, rtol=1e-13)
        off_xy = np.array([h.cov.u12 for h in off.effective])
        rnd_xy = np.array([h.cov.u12 for h in rnd.effective])
        assert np.max(np.abs(off_xy - rnd_xy)) > 0.0

    def test_scaling_angle_variances_scales_the_covariance(self):
        sc = default_scenario()
        config = make_config("optimized", sc, NOMINAL)
        alpha = 3.7
        base = propagate_full_chain(sc, NOMINAL, TABLE_UNC, config)
        bumped_unc = AngleUncertainty(*(alpha * TABLE_UNC.as_array()))
        bumped = propagate_full_chain(sc, NOMINAL, bumped_unc, config)
        assert np.allclose(bumped.total.cov.matrix(), alpha * base.total.cov.matrix(), rtol=1e-12)

    def test_wrong_config_length_names_the_failing_stage(self):
        sc = default_scenario()
        bad = RisConfig(kind="off", phases=np.zeros(3))
        with pytest.raises(ChainStageError) as err:
            propagate_full_chain(sc, NOMINAL, TABLE_UNC, bad)
        assert err.value.stage == "config"

    def test_degenerate_geometry_names_the_failing_stage(self):
        ris = RisGeometry.grid(1, 1, 0.03, [0.0, 0.0, -0.3])
        sc = Scenario(p_tx=[1.0, 1.0, 0.7], p_rx=[2, 0, 0.1], p_c=[1, 1, 1], ris=ris, frequency=5e9)
        config = RisConfig(kind="off", phases=np.zeros(1))
        with pytest.raises(ChainStageError) as err:
            propagate_full_chain(sc, NOMINAL, TABLE_UNC, config)
        assert err.value.stage == "geometry"
        assert isinstance(err.value.__cause__, DegenerateGeometryError)


class TestCoupledCovariance:
    """Diagnostic route keeping the cross-element correlation that the
    production sum deliberately drops."""

    def test_analytic_matches_finite_differences(self):
        sc = default_scenario()
        config = make_config("random", sc, NOMINAL, seed=3)
        got = coupled_covariance(sc, NOMINAL, TABLE_UNC, config).matrix()
        want = coupled_covariance(sc, NOMINAL, TABLE_UNC, config, method="finite_difference").matrix()
        assert np.linalg.norm(got - want) <= 1e-6 * np.linalg.norm(want)

    def test_zero_uncertainty_gives_zero(self):
        sc = default_scenario()
        config = make_config("off", sc, NOMINAL)
        assert coupled_covariance(sc, NOMINAL, ZERO_UNC, config).trace() == 0.0

    def test_unknown_method_rejected(self):
        sc = default_scenario()
        config = make_config("off", sc, NOMINAL)
        with pytest.raises(ValueError):
            coupled_covariance(sc, NOMINAL, TABLE_UNC, config, method="midpoint")

    def test_coupled_route_differs_from_independent_sum(self):
        # the two routes answer different questions; on this geometry the gap is large
        sc = default_scenario()
        config = make_config("off", sc, NOMINAL)
        indep = propagate_full_chain(sc, NOMINAL, TABLE_UNC, config).total.cov.matrix()
        coupled = coupled_covariance(sc, NOMINAL, TABLE_UNC, config).matrix()
        gap = np.linalg.norm(coupled - indep) / np.linalg.norm(coupled)
        assert gap > 0.05
