import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qiranging.exceptions import DomainError
from qiranging.gaussian import (
    GaussianState,
    ThermalLossChannel,
    apply_thermal_loss,
    background_output_state,
    gaussian_fidelity,
    gaussian_log_fidelity,
    symplectic_eigenvalues,
    target_output_state,
    thermal_state,
    tmsv_state,
)

photons = st.floats(min_value=0.0, max_value=5.0, allow_nan=False)
transmissivity = st.floats(min_value=0.0, max_value=0.999, allow_nan=False)


def tmsv_moments_from_fock(n_s, cutoff=40):
    """Quadrature second moments of sum_k sqrt(n^k/(n+1)^(k+1)) |k,k> built in a truncated Fock space."""
    a = np.diag(np.sqrt(np.arange(1, cutoff)), 1)
    eye = np.eye(cutoff)
    a_s, a_i = np.kron(a, eye), np.kron(eye, a)
    psi = np.zeros(cutoff * cutoff)
    for k in range(cutoff):
        psi[k * cutoff + k] = math.sqrt(n_s**k / (n_s + 1) ** (k + 1))
    x_s, x_i = a_s + a_s.T, a_i + a_i.T
    p_s, p_i = -1j * (a_s - a_s.T), -1j * (a_i - a_i.T)
    ev = lambda op: float(np.real(psi @ op @ psi))
    return {"xs2": ev(x_s @ x_s), "ps2": ev(p_s @ p_s), "xsxi": ev(x_s @ x_i), "psps": ev(p_s @ p_i)}


class TestTmsv:
    def test_vacuum_limit(self):
        np.testing.assert_array_equal(tmsv_state(0.0).cov, np.eye(4))

    def test_one_photon_matches_fock_expansion(self):
        mom = tmsv_moments_from_fock(1.0)
        cov = tmsv_state(1.0).cov
        assert cov[0, 0] == pytest.approx(mom["xs2"], abs=1e-8)
        assert cov[1, 1] == pytest.approx(mom["ps2"], abs=1e-8)
        assert cov[0, 2] == pytest.approx(mom["xsxi"], abs=1e-8)
        assert cov[1, 3] == pytest.approx(mom["psps"], abs=1e-8)
        assert cov[0, 0] == pytest.approx(3.0)
        assert cov[0, 2] == pytest.approx(2.82843, abs=1e-5)
        assert cov[1, 3] == pytest.approx(-2.82843, abs=1e-5)

    def test_pure(self):
        np.testing.assert_allclose(tmsv_state(0.5).symplectic_eigenvalues(), [1.0, 1.0], atol=1e-12)

    @given(photons)
    def test_determinant_one(self, n):
        assert np.linalg.det(tmsv_state(n).cov) == pytest.approx(1.0, rel=1e-9)

    @pytest.mark.parametrize("bad", [-0.1, float("nan"), float("inf")])
    def test_rejects_bad_photons(self, bad):
        with pytest.raises(DomainError):
            tmsv_state(bad)


class TestGaussianState:
    def test_rejects_asymmetric(self):
        cov = np.eye(2)
        cov[0, 1] = 1e-6
        with pytest.raises(DomainError):
            GaussianState(cov)

    def test_rejects_unphysical(self):
        with pytest.raises(DomainError):
            GaussianState(0.5 * np.eye(2))

    def test_rejects_squeezed_below_vacuum_product(self):
        with pytest.raises(DomainError):
            GaussianState(np.diag([0.5, 1.5]))

    def test_mean_photons(self):
        np.testing.assert_allclose(background_output_state(1.0, 0.5).mean_photons(), [1.0, 0.5])


class TestThermalLoss:
    @given(photons, st.floats(0.0, 10.0))
    def test_identity_channel(self, n_s, n_th):
        s = tmsv_state(n_s)
        out = apply_thermal_loss(s, ThermalLossChannel(1.0, n_th), 0)
        np.testing.assert_array_equal(out.cov, s.cov)

    def test_full_loss(self):
        out = apply_thermal_loss(tmsv_state(0.3), ThermalLossChannel(0.0, 2.0), 0)
        np.testing.assert_allclose(out.cov[:2, :2], 5.0 * np.eye(2))
        np.testing.assert_array_equal(out.cov[:2, 2:], 0.0)

    def test_half_loss_on_vacuum(self):
        out = apply_thermal_loss(GaussianState(np.eye(2)), ThermalLossChannel(0.5, 1.0), 0)
        np.testing.assert_allclose(out.cov, 2.0 * np.eye(2))

    def test_output_noise(self):
        assert ThermalLossChannel(0.25, 4.0).output_noise == 3.0

    def test_bad_mode_and_mu(self):
        with pytest.raises(DomainError):
            apply_thermal_loss(tmsv_state(0.1), ThermalLossChannel(0.5, 0.0), 2)
        with pytest.raises(DomainError):
            ThermalLossChannel(1.2, 0.0)

    @given(photons, transmissivity, transmissivity)
    def test_pure_loss_semigroup(self, n_s, mu1, mu2):
        s = tmsv_state(n_s)
        twice = apply_thermal_loss(apply_thermal_loss(s, ThermalLossChannel(mu1, 0.0), 0), ThermalLossChannel(mu2, 0.0), 0)
        once = apply_thermal_loss(s, ThermalLossChannel(mu1 * mu2, 0.0), 0)
        np.testing.assert_allclose(twice.cov, once.cov, rtol=0, atol=1e-12)

    @given(photons, transmissivity, st.floats(0.0, 50.0), st.integers(0, 1))
    def test_output_physical(self, n_s, mu, n_th, mode):
        out = apply_thermal_loss(tmsv_state(n_s), ThermalLossChannel(mu, n_th), mode)
        assert symplectic_eigenvalues(out.cov).min() >= 1 - 1e-9


class TestChannelOutputs:
    def test_lossless_noiseless_target(self):
        np.testing.assert_array_equal(target_output_state(1.0, 0.0, 0.7).cov, tmsv_state(0.7).cov)

    def test_target_signal_variance(self):
        cov = target_output_state(0.01, 20.0, 0.001).cov
        assert cov[0, 0] == pytest.approx(1 + 2 * 0.01 * 0.001 + 2 * 20, rel=1e-12)
        assert cov[0, 0] == pytest.approx(41.00002, abs=1e-9)

    def test_target_cross_block(self):
        cov = target_output_state(0.5, 0.0, 1.0).cov
        assert cov[0, 2] == pytest.approx(2.0)
        assert cov[1, 3] == pytest.approx(-2.0)

    def test_target_divergent_environment(self):
        with pytest.raises(DomainError):
            target_output_state(1.0, 0.5, 0.1)
        with pytest.raises(DomainError):
            target_output_state(1.1, 0.0, 0.1)

    def test_background_blocks(self):
        np.testing.assert_array_equal(background_output_state(0.0, 0.0).cov, np.eye(4))
        np.testing.assert_allclose(background_output_state(1.0, 0.5).cov, np.diag([3.0, 3.0, 2.0, 2.0]))

    @given(photons, photons)
    def test_background_self_fidelity(self, n_b, n_s):
        s = background_output_state(n_b, n_s)
        assert gaussian_fidelity(s, s) == 1.0


class TestFidelity:
    def test_identical(self):
        s = target_output_state(0.3, 0.4, 0.2)
        assert gaussian_fidelity(s, s) == 1.0

    @pytest.mark.parametrize("n", [0.1, 1.0, 3.0])
    def test_vacuum_vs_thermal(self, n):
        # Fock overlap: sqrt(p_0) = 1/sqrt(1 + n)
        assert gaussian_fidelity(thermal_state(0.0), thermal_state(n)) == pytest.approx(1 / math.sqrt(1 + n), rel=1e-12)

    @pytest.mark.parametrize("n1,n2", [(0.5, 2.0), (1.0, 1.5), (4.0, 0.2)])
    def test_thermal_pair_against_photon_statistics(self, n1, n2):
        k = np.arange(4000)
        p = (n1 / (n1 + 1)) ** k / (n1 + 1)
        q = (n2 / (n2 + 1)) ** k / (n2 + 1)
        expected = np.sum(np.sqrt(p * q))
        assert gaussian_fidelity(thermal_state(n1), thermal_state(n2)) == pytest.approx(expected, rel=1e-12)

    def test_mode_mismatch(self):
        with pytest.raises(DomainError):
            gaussian_fidelity(thermal_state(1.0), tmsv_state(1.0))

    def test_nonzero_mean_rejected(self):
        with pytest.raises(DomainError):
            gaussian_fidelity(GaussianState(np.eye(2), [1.0, 0.0]), thermal_state(0.0))

    def test_distinct_states_below_one(self):
        a = thermal_state(1.0)
        b = GaussianState(np.diag([3.0 + 1e-3, 3.0]))
        assert gaussian_fidelity(a, b) < 1.0

    @settings(max_examples=60)
    @given(
        st.sampled_from(["target", "background", "tmsv"]),
        st.sampled_from(["target", "background", "tmsv"]),
        st.floats(0.01, 0.99),
        st.floats(0.0, 3.0),
        st.floats(0.0, 1.0),
        st.floats(0.01, 0.99),
        st.floats(0.0, 3.0),
        st.floats(0.0, 1.0),
    )
    def test_symmetric_and_bounded(self, k1, k2, e1, b1, s1, e2, b2, s2):
        make = {
            "target": lambda e, b, s: target_output_state(e, b, s),
            "background": lambda e, b, s: background_output_state(b, s),
            "tmsv": lambda e, b, s: tmsv_state(s),
        }
        x, y = make[k1](e1, b1, s1), make[k2](e2, b2, s2)
        fxy, fyx = gaussian_fidelity(x, y), gaussian_fidelity(y, x)
        assert abs(fxy - fyx) <= 1e-12
        assert 0.0 <= fxy <= 1.0

    def test_monotone_in_eta(self):
        n_b, n_s = 1.0, 0.1
        bg = background_output_state(n_b, n_s)
        etas = np.linspace(0.01, 0.5, 50)
        f = [gaussian_fidelity(target_output_state(e, n_b, n_s), bg) for e in etas]
        assert all(b <= a for a, b in zip(f, f[1:]))

    def test_small_exponent_matches_asymptote(self):
        # per-copy -2 ln F -> eta n_s / (n_b + 1) for n_s << 1
        eta, n_b, n_s = 0.01, 20.0, 1e-3
        lf = gaussian_log_fidelity(target_output_state(eta, n_b, n_s), background_output_state(n_b, n_s))
        assert -2 * lf == pytest.approx(eta * n_s / (n_b + 1), rel=2e-3)
        assert -2 * lf == pytest.approx(4.76e-7, rel=2e-3)

    def test_extended_precision_path_agrees_with_double(self):
        from qiranging import gaussian as g

        a = target_output_state(0.05, 0.5, 0.05)
        b = background_output_state(0.5, 0.05)
        v1, v2 = a.cov / 2, b.cov / 2
        vsum = v1 + v2
        double, _ = g._log_fidelity_mixed(v1, v2, vsum, np.linalg.slogdet(vsum)[1])
        extended = g._log_fidelity_mixed_mp(v1, v2)
        assert double == pytest.approx(extended, rel=1e-9)
