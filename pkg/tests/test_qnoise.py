import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polarmem.errors import UnsupportedModeError, ValidationError
from polarmem.qnoise import (
    DensityOperator,
    NoiseSpec,
    PauliNoiseParams,
    apply_erasure,
    apply_pauli,
    binary_entropy,
    holevo_chi_unital,
    induced_law,
    verify_induced,
    von_neumann_entropy,
)


class TestDensityOperator:
    def test_basis_states(self):
        rho0 = DensityOperator.basis(0)
        np.testing.assert_array_equal(rho0.matrix, [[1, 0], [0, 0]])
        assert DensityOperator.basis(1).matrix[1, 1] == 1.0

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValidationError, match="Hermitian"):
            DensityOperator(np.array([[0.5, 0.3], [0.0, 0.5]]))

    def test_rejects_bad_trace(self):
        with pytest.raises(ValidationError, match="trace"):
            DensityOperator(np.eye(2))

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(ValidationError, match="eigenvalue"):
            DensityOperator(np.array([[1.5, 0.0], [0.0, -0.5]]))

    def test_bloch_round_trip(self):
        r = np.array([0.3, -0.4, 0.5])
        rho = DensityOperator.from_bloch(r)
        np.testing.assert_allclose(rho.bloch_vector(), r, atol=1e-12)

    def test_bloch_norm_gate(self):
        with pytest.raises(ValidationError, match="norm"):
            DensityOperator.from_bloch([1.0, 0.5, 0.0])

    def test_maximally_mixed(self):
        rho = DensityOperator.maximally_mixed()
        np.testing.assert_allclose(rho.bloch_vector(), 0.0, atol=0)
        assert von_neumann_entropy(rho) == pytest.approx(1.0)


class TestPauliParams:
    def test_depolarizing_weights(self):
        params = PauliNoiseParams.depolarizing(0.2)
        np.testing.assert_allclose(params.as_array(), [0.85, 0.05, 0.05, 0.05])

    def test_depolarizing_scales_uniform(self):
        params = PauliNoiseParams.depolarizing(0.3)
        np.testing.assert_allclose(params.bloch_scales, 0.7, atol=1e-12)
        assert params.lambda_max == pytest.approx(0.7)

    def test_pure_z_dephasing(self):
        params = PauliNoiseParams(0.9, 0.0, 0.0, 0.1)
        np.testing.assert_allclose(params.bloch_scales, [0.8, 0.8, 1.0])
        assert params.best_axis == 2

    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValidationError, match="sum"):
            PauliNoiseParams(0.5, 0.1, 0.1, 0.1)


class TestNoiseMaps:
    def test_erasure_block_structure(self):
        out = apply_erasure(0.3, DensityOperator.basis(0))
        assert out.dimension == 3
        assert out.matrix[0, 0] == pytest.approx(0.7)
        assert out.matrix[2, 2] == pytest.approx(0.3)
        assert out.matrix[1, 1] == 0.0

    def test_erasure_identity_at_zero(self):
        rho = DensityOperator.from_bloch([0.2, 0.1, -0.3])
        out = apply_erasure(0.0, rho)
        np.testing.assert_allclose(out.matrix[:2, :2], rho.matrix, atol=1e-12)
        assert out.matrix[2, 2] == 0.0

    def test_pauli_identity_channel(self):
        rho = DensityOperator.from_bloch([0.1, 0.2, 0.3])
        out = apply_pauli(PauliNoiseParams.identity(), rho)
        np.testing.assert_allclose(out.matrix, rho.matrix, atol=1e-12)

    def test_pauli_is_unital(self):
        mixed = DensityOperator.maximally_mixed()
        for p in (0.1, 0.5, 1.0):
            out = apply_pauli(PauliNoiseParams.depolarizing(p), mixed)
            np.testing.assert_allclose(out.matrix, mixed.matrix, atol=1e-12)

    def test_full_depolarizing_kills_bloch_vector(self):
        rho = DensityOperator.from_bloch([0.0, 0.0, 1.0])
        out = apply_pauli(PauliNoiseParams.depolarizing(1.0), rho)
        np.testing.assert_allclose(out.bloch_vector(), 0.0, atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(
        p=st.floats(0.0, 1.0),
        rx=st.floats(-0.5, 0.5),
        rz=st.floats(-0.5, 0.5),
    )
    def test_depolarizing_contracts_bloch_uniformly(self, p, rx, rz):
        rho = DensityOperator.from_bloch([rx, 0.0, rz])
        out = apply_pauli(PauliNoiseParams.depolarizing(p), rho)
        np.testing.assert_allclose(out.bloch_vector(), (1 - p) * np.array([rx, 0.0, rz]), atol=1e-10)


class TestEntropies:
    def test_binary_entropy_endpoints(self):
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(1.0) == 0.0
        assert binary_entropy(0.5) == pytest.approx(1.0)

    def test_binary_entropy_known_value(self):
        # h(1/4) = 2 - (3/4) log2 3, by hand
        assert binary_entropy(0.25) == pytest.approx(2.0 - 0.75 * np.log2(3.0), abs=1e-14)

    def test_binary_entropy_vectorized(self):
        out = binary_entropy(np.array([0.0, 0.5, 1.0]))
        np.testing.assert_allclose(out, [0.0, 1.0, 0.0], atol=1e-14)

    def test_binary_entropy_domain(self):
        with pytest.raises(ValidationError):
            binary_entropy(1.2)

    def test_von_neumann_pure_state(self):
        assert von_neumann_entropy(DensityOperator.basis(0)) == 0.0

    def test_von_neumann_matches_binary_entropy_on_diagonal(self):
        rho = DensityOperator(np.diag([0.3, 0.7]).astype(complex))
        assert von_neumann_entropy(rho) == pytest.approx(binary_entropy(0.3), abs=1e-14)


class TestHolevo:
    def test_noiseless(self):
        assert holevo_chi_unital(PauliNoiseParams.identity()) == pytest.approx(1.0)

    def test_full_depolarizing(self):
        assert holevo_chi_unital(PauliNoiseParams.depolarizing(1.0)) == pytest.approx(0.0)

    def test_depolarizing_equals_one_minus_h_half_p(self):
        for p in (0.05, 0.2, 0.6):
            chi = holevo_chi_unital(PauliNoiseParams.depolarizing(p))
            assert chi == pytest.approx(1.0 - binary_entropy(p / 2.0), abs=1e-14)

    def test_dephasing_preserves_one_axis(self):
        # Z-dephasing leaves the z axis unscaled, so one noiseless bit survives
        assert holevo_chi_unital(PauliNoiseParams(0.7, 0.0, 0.0, 0.3)) == pytest.approx(1.0)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.0, 1.0))
    def test_chi_within_unit_interval(self, p):
        chi = holevo_chi_unital(PauliNoiseParams.depolarizing(p))
        assert 0.0 <= chi <= 1.0


class TestNoiseSpec:
    def test_tail_defaults_to_full_noise(self):
        spec = NoiseSpec.erasure([0.1, 0.2])
        assert spec.p(0) == 0.1
        assert spec.p(5) == 1.0

    def test_custom_tail(self):
        spec = NoiseSpec.depolarizing([0.1], tail=0.5)
        assert spec.p(3) == 0.5

    def test_pauli_table_shape_gate(self):
        with pytest.raises(ValidationError, match="shape"):
            NoiseSpec("pauli", np.array([[0.5, 0.5]]))

    def test_scalar_p_refused_for_pauli(self):
        spec = NoiseSpec("pauli", np.array([[0.7, 0.1, 0.1, 0.1]]),
                         tail=np.array([0.25, 0.25, 0.25, 0.25]))
        with pytest.raises(ValidationError):
            spec.p(0)
        assert spec.pauli_params(0).q_i == 0.7
        assert spec.pauli_params(9).q_i == 0.25


class TestInducedLaw:
    def test_erasure_law_values(self):
        law = induced_law(NoiseSpec.erasure([0.0, 0.3]), csi=False, n_states=2)
        assert law.mode == "erasure"
        np.testing.assert_allclose(law.table[0, 0], [1.0, 0.0, 0.0])
        np.testing.assert_allclose(law.table[1, 0], [0.7, 0.0, 0.3])
        np.testing.assert_allclose(law.table[1, 1], [0.0, 0.7, 0.3])

    def test_depolarizing_crossover_is_half_p(self):
        law = induced_law(NoiseSpec.depolarizing([0.2]), csi=True, n_states=1)
        assert law.mode == "unital"
        np.testing.assert_allclose(law.table[0, 0], [0.9, 0.1])
        np.testing.assert_allclose(law.table[0, 1], [0.1, 0.9])

    def test_unital_without_csi_refused(self):
        with pytest.raises(UnsupportedModeError, match="CSI"):
            induced_law(NoiseSpec.depolarizing([0.2]), csi=False, n_states=1)

    def test_best_axis_beats_z_for_dephasing(self):
        noise = NoiseSpec("pauli", np.array([[0.7, 0.3, 0.0, 0.0]]),
                          tail=np.array([0.25, 0.25, 0.25, 0.25]))
        z_law = induced_law(noise, csi=True, n_states=1, axis="z")
        best_law = induced_law(noise, csi=True, n_states=1, axis="best")
        # X-dephasing flips z-basis bits with probability q_x but leaves the
        # x axis untouched, so the best-axis encoding is noiseless
        assert z_law.table[0, 0, 1] == pytest.approx(0.3)
        assert best_law.table[0, 0, 1] == pytest.approx(0.0)

    def test_tail_states_use_tail_noise(self):
        law = induced_law(NoiseSpec.erasure([0.1]), csi=False, n_states=3)
        np.testing.assert_allclose(law.table[2, 0], [0.0, 0.0, 1.0])

    def test_law_symmetry_invariants_enforced(self):
        from polarmem.qnoise import InducedLaw

        bad = np.zeros((1, 2, 2))
        bad[0, 0] = (0.9, 0.1)
        bad[0, 1] = (0.2, 0.8)
        with pytest.raises(ValidationError, match="symmetric"):
            InducedLaw(bad, "unital", True)


class TestVerifyInduced:
    def test_erasure_verifies(self):
        noise = NoiseSpec.erasure([0.0, 0.3, 1.0])
        law = induced_law(noise, csi=False, n_states=3)
        report = verify_induced(noise, law, trials=20_000, seed=11)
        assert report.ok
        assert report.failures == ()
        assert len(report.cells) == 6

    def test_depolarizing_verifies(self):
        noise = NoiseSpec.depolarizing([0.0, 0.2, 1.0])
        law = induced_law(noise, csi=True, n_states=3)
        assert verify_induced(noise, law, trials=20_000, seed=13).ok

    def test_mismatched_law_flagged(self):
        noise = NoiseSpec.depolarizing([0.2])
        wrong = induced_law(NoiseSpec.depolarizing([0.6]), csi=True, n_states=1)
        report = verify_induced(noise, wrong, trials=20_000, seed=17)
        assert not report.ok
        assert (0, 0) in report.failures

    def test_trial_floor(self):
        noise = NoiseSpec.erasure([0.3])
        law = induced_law(noise, csi=False, n_states=1)
        with pytest.raises(ValidationError, match="1e4"):
            verify_induced(noise, law, trials=100, seed=1)
