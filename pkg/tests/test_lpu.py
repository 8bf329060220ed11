"""First-order uncertainty propagation: angles -> distances -> amplitude/phase."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from risprop.geometry import RisGeometry, Scenario, default_scenario
from risprop.channel import amp_phase
from risprop.lpu import (
    AmpPhaseUncertainty,
    AngleUncertainty,
    DistanceUncertainty,
    NotPositiveSemidefiniteError,
    amp_phase_angle_jacobian,
    amp_phase_uncertainties,
    amp_phase_uncertainty,
    distance_uncertainties,
    distance_uncertainty,
    phase_variance_closed_form,
    propagate_lpu,
    propagate_lpu_correlated,
)

from oracles import distance_samples, jacobian_fd, quadratic_form

TABLE_STDS_DEG = (0.49, 0.48, 0.18)


def table_angle_unc() -> AngleUncertainty:
    return AngleUncertainty.from_std_degrees(*TABLE_STDS_DEG)


class TestPropagateLpu:
    def test_single_term_squares_the_sensitivity(self):
        assert propagate_lpu([(2.0, 1.0)]) == 4.0

    def test_independent_unit_terms_add(self):
        assert propagate_lpu([(1.0, 1.0), (1.0, 1.0)]) == 2.0

    @given(st.floats(-1e6, 1e6, allow_nan=False))
    def test_zero_variance_propagates_to_zero(self, c):
        assert propagate_lpu([(c, 0.0)]) == 0.0

    def test_negative_variance_rejected(self):
        with pytest.raises(ValueError):
            propagate_lpu([(1.0, -1e-9)])


class TestPropagateLpuCorrelated:
    def test_perfectly_correlated_difference_cancels(self):
        cov = [[1.0, 1.0], [1.0, 1.0]]
        assert propagate_lpu_correlated([1.0, -1.0], cov) == pytest.approx(0.0, abs=1e-15)

    def test_perfectly_correlated_sum_doubles_the_std(self):
        cov = [[1.0, 1.0], [1.0, 1.0]]
        assert propagate_lpu_correlated([1.0, 1.0], cov) == pytest.approx(4.0)

    def test_reduces_to_uncorrelated_on_diagonal_input(self):
        c = [0.3, -1.2, 2.5]
        var = [0.7, 0.01, 3.0]
        plain = propagate_lpu(list(zip(c, var)))
        assert propagate_lpu_correlated(c, np.diag(var)) == pytest.approx(plain, rel=1e-14)

    def test_matches_quadratic_form_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            a = rng.standard_normal((3, 3))
            sigma = a @ a.T
            c = rng.standard_normal(3)
            want = quadratic_form(c, sigma)
            got = propagate_lpu_correlated(c, sigma)
            assert abs(got - want) <= 1e-12 * max(1.0, abs(want))

    def test_non_psd_covariance_rejected(self):
        with pytest.raises(NotPositiveSemidefiniteError):
            propagate_lpu_correlated([1.0, 1.0], [[1.0, 2.0], [2.0, 1.0]])

    def test_asymmetric_covariance_rejected(self):
        with pytest.raises(NotPositiveSemidefiniteError):
            propagate_lpu_correlated([1.0, 1.0], [[1.0, 0.5], [0.1, 1.0]])


class TestAngleUncertainty:
    def test_degrees_enter_as_radians_squared(self):
        unc = AngleUncertainty.from_std_degrees(0.49, 0.48, 0.18)
        assert unc.var_roll == pytest.approx(math.radians(0.49) ** 2, rel=1e-15)
        assert unc.var_pitch == pytest.approx(math.radians(0.48) ** 2, rel=1e-15)
        assert unc.var_yaw == pytest.approx(math.radians(0.18) ** 2, rel=1e-15)

    def test_negative_variance_rejected(self):
        with pytest.raises(ValueError):
            AngleUncertainty(1e-4, -1e-4, 1e-4)

    def test_as_array_order_is_roll_pitch_yaw(self):
        unc = AngleUncertainty(1.0, 2.0, 3.0)
        assert np.array_equal(unc.as_array(), [1.0, 2.0, 3.0])


class TestDistanceUncertainty:
    def test_zero_angle_uncertainty_gives_zero(self):
        sc = default_scenario()
        d = distance_uncertainty(sc, (0.0, 0.0, 0.0), AngleUncertainty(0.0, 0.0, 0.0), 0)
        assert d.var_tx == 0.0 and d.var_rx == 0.0 and d.cov == 0.0

    def test_offset_free_element_carries_no_uncertainty(self):
        # a single element sitting exactly at the center of gravity cannot move
        ris = RisGeometry.grid(1, 1, 0.03, [0.0, 0.0, 0.0])
        sc = Scenario(p_tx=[0, 0, 0.1], p_rx=[2, 0, 0.1], p_c=[1, 1, 1], ris=ris, frequency=5e9)
        d = distance_uncertainty(sc, (0.0, 0.0, 0.0), table_angle_unc(), 0)
        assert d.var_tx == pytest.approx(0.0, abs=1e-30)
        assert d.var_rx == pytest.approx(0.0, abs=1e-30)
        assert d.cov == pytest.approx(0.0, abs=1e-30)

    def test_cauchy_schwarz_holds_across_the_grid(self):
        sc = default_scenario()
        var_tx, var_rx, cov = distance_uncertainties(sc, (0.0, 0.0, 0.0), table_angle_unc())
        assert np.all(var_tx >= 0) and np.all(var_rx >= 0)
        assert np.all(np.abs(cov) <= np.sqrt(var_tx * var_rx) * (1 + 1e-12))

    def test_cross_covariance_constructor_enforces_cauchy_schwarz(self):
        with pytest.raises(ValueError):
            DistanceUncertainty(1.0, 1.0, 1.5)

    def test_matches_monte_carlo_distance_spread(self):
        # linearized (co)variances against 1e5 sampled rigid-body draws
        sc = default_scenario()
        stds = np.radians(TABLE_STDS_DEG)
        var_tx, var_rx, cov = distance_uncertainties(sc, (0.0, 0.0, 0.0), table_angle_unc())
        for m in (0, 77):
            dh, dg = distance_samples(
                sc.p_tx, sc.p_rx, sc.p_c, sc.ris.element_offsets[m],
                (0.0, 0.0, 0.0), stds, 100_000, seed=11,
            )
            sample = np.cov(np.stack([dh, dg]))
            assert var_tx[m] == pytest.approx(sample[0, 0], rel=0.02)
            assert var_rx[m] == pytest.approx(sample[1, 1], rel=0.02)
            assert cov[m] == pytest.approx(sample[0, 1], rel=0.02)

    def test_scalar_and_batch_agree(self):
        sc = default_scenario()
        unc = table_angle_unc()
        var_tx, var_rx, cov = distance_uncertainties(sc, (0.0, 0.0, 0.0), unc)
        d = distance_uncertainty(sc, (0.0, 0.0, 0.0), unc, 42)
        assert d.var_tx == var_tx[42] and d.var_rx == var_rx[42] and d.cov == cov[42]


class TestAmpPhaseUncertainty:
    def test_zero_distance_uncertainty_gives_zero(self):
        sc = default_scenario()
        ap = amp_phase_uncertainty(sc, (0.0, 0.0, 0.0), DistanceUncertainty(0.0, 0.0, 0.0), 0)
        assert ap.var_amp == 0.0 and ap.var_phase == 0.0 and ap.cov == 0.0

    def test_fully_correlated_legs_quadruple_the_phase_variance(self):
        sc = default_scenario()
        sigma2 = 1e-8
        ap = amp_phase_uncertainty(sc, (0.0, 0.0, 0.0), DistanceUncertainty(sigma2, sigma2, sigma2), 0)
        want = (2.0 * np.pi / sc.wavelength) ** 2 * 4.0 * sigma2
        assert ap.var_phase == pytest.approx(want, rel=1e-12)

    def test_phase_variance_closed_form_identity(self):
        sc = default_scenario()
        rng = np.random.default_rng(5)
        for _ in range(20):
            v1, v2 = rng.uniform(0, 1e-6, 2)
            c = rng.uniform(-1, 1) * math.sqrt(v1 * v2)
            dunc = DistanceUncertainty(v1, v2, c)
            ap = amp_phase_uncertainty(sc, (0.0, 0.0, 0.0), dunc, 3)
            want = phase_variance_closed_form(sc, dunc)
            assert ap.var_phase == pytest.approx(want, rel=1e-12)

    def test_leg_correlation_is_not_silently_dropped(self):
        sc = default_scenario()
        unc = table_angle_unc()
        d = distance_uncertainty(sc, (0.0, 0.0, 0.0), unc, 0)
        assert d.cov != 0.0
        with_corr = amp_phase_uncertainty(sc, (0.0, 0.0, 0.0), d, 0)
        without = amp_phase_uncertainty(
            sc, (0.0, 0.0, 0.0), DistanceUncertainty(d.var_tx, d.var_rx, 0.0), 0
        )
        assert with_corr.var_phase != without.var_phase

    def test_cauchy_schwarz_on_the_cross_term(self):
        sc = default_scenario()
        var_tx, var_rx, cov = distance_uncertainties(sc, (0.0, 0.0, 0.0), table_angle_unc())
        va, vp, cap = amp_phase_uncertainties(sc, (0.0, 0.0, 0.0), (var_tx, var_rx, cov))
        assert np.all(va >= 0) and np.all(vp >= 0)
        assert np.all(np.abs(cap) <= np.sqrt(va * vp) * (1 + 1e-12))

    def test_constructor_rejects_negative_variance(self):
        with pytest.raises(ValueError):
            AmpPhaseUncertainty(-1e-20, 1.0, 0.0)


class TestStagedVersusDirect:
    """The module's primary oracle: the two-stage pipeline equals one composed Jacobian."""

    def test_staged_covariance_equals_direct_jacobian_push(self):
        sc = default_scenario()
        angles = (0.0, 0.0, 0.0)
        unc = table_angle_unc()
        diag = np.diag(unc.as_array())
        jac = amp_phase_angle_jacobian(sc, angles)
        var_tx, var_rx, cov = distance_uncertainties(sc, angles, unc)
        va, vp, cap = amp_phase_uncertainties(sc, angles, (var_tx, var_rx, cov))
        for m in range(sc.ris.element_count):
            direct = jac[m] @ diag @ jac[m].T
            staged = np.array([[va[m], cap[m]], [cap[m], vp[m]]])
            denom = max(np.linalg.norm(direct), 1e-300)
            assert np.linalg.norm(staged - direct) <= 1e-10 * denom

    def test_staged_covariance_equals_direct_off_nominal(self):
        sc = default_scenario()
        angles = (0.02, -0.03, 0.15)
        unc = table_angle_unc()
        diag = np.diag(unc.as_array())
        jac = amp_phase_angle_jacobian(sc, angles)
        var_tx, var_rx, cov = distance_uncertainties(sc, angles, unc)
        va, vp, cap = amp_phase_uncertainties(sc, angles, (var_tx, var_rx, cov))
        for m in (0, 13, 119):
            direct = jac[m] @ diag @ jac[m].T
            staged = np.array([[va[m], cap[m]], [cap[m], vp[m]]])
            assert np.linalg.norm(staged - direct) <= 1e-10 * np.linalg.norm(direct)

    def test_analytic_jacobian_matches_finite_differences(self):
        sc = default_scenario()
        angles = np.array([0.01, -0.02, 0.05])
        jac = amp_phase_angle_jacobian(sc, angles)
        for m in (0, 60, 119):
            def ap_of_angles(q, m=m):
                a, p = amp_phase(sc, q)
                return np.array([a[m], p[m]])

            fd = jacobian_fd(ap_of_angles, angles, step=1e-7)
            assert np.allclose(jac[m], fd, rtol=1e-5, atol=1e-12)
