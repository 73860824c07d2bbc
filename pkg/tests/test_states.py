import math

import numpy as np
import pytest
from hypothesis import given

from qtraj import linalg
from qtraj.errors import ValidationError
from qtraj.info import von_neumann_entropy
from qtraj.states import (DensityMatrix, PureState, density_from_pure, joint_state, maximally_mixed,
                          pure_from_amplitudes, reduced_states, schmidt_decompose)

from conftest import complex_vector


class TestPureState:
    def test_basis_state(self):
        s = pure_from_amplitudes(1, 0)
        np.testing.assert_array_equal(s.amplitudes, [1, 0])
        assert not s.renormalized

    def test_plus_state(self):
        s = pure_from_amplitudes(1 / math.sqrt(2), 1 / math.sqrt(2))
        np.testing.assert_allclose(s.amplitudes, [0.5 ** 0.5, 0.5 ** 0.5], atol=1e-15)
        assert not s.renormalized

    def test_renormalizes_and_flags(self):
        s = pure_from_amplitudes(3, 4)
        np.testing.assert_allclose(s.amplitudes, [0.6, 0.8], atol=1e-15)
        assert s.renormalized

    def test_zero_vector(self):
        with pytest.raises(ValidationError):
            pure_from_amplitudes(0, 0)

    def test_constructor_never_silently_rescales(self):
        with pytest.raises(ValidationError):
            PureState([3, 4])

    def test_immutable(self):
        s = pure_from_amplitudes(1, 0)
        with pytest.raises(ValueError):
            s.amplitudes[0] = 0

    def test_json_pairs(self):
        assert pure_from_amplitudes(0.6, 0.8j).to_json() == [[0.6, 0.0], [0.0, 0.8]]


class TestDensity:
    def test_from_basis(self):
        np.testing.assert_array_equal(density_from_pure(pure_from_amplitudes(1, 0)).matrix, np.diag([1, 0]))

    def test_from_plus(self):
        rho = density_from_pure(pure_from_amplitudes(1, 1)).matrix
        np.testing.assert_allclose(rho, np.full((2, 2), 0.5), atol=1e-15)

    @given(complex_vector(2))
    def test_projector_idempotent(self, v):
        rho = density_from_pure(PureState(v)).matrix
        assert linalg.max_abs(rho @ rho - rho) <= 1e-12
        assert von_neumann_entropy(rho) <= 1e-10

    def test_maximally_mixed(self):
        np.testing.assert_array_equal(maximally_mixed(2).matrix, np.diag([0.5, 0.5]))
        np.testing.assert_array_equal(maximally_mixed(4).matrix, np.eye(4) / 4)
        assert von_neumann_entropy(maximally_mixed(2)) == 1.0
        with pytest.raises(ValidationError):
            maximally_mixed(3)

    @pytest.mark.parametrize("m", [np.diag([1.2, -0.2]), np.array([[0.5, 0.1], [0.2, 0.5]]), np.diag([0.6, 0.6])])
    def test_rejects_invalid(self, m):
        with pytest.raises(ValidationError):
            DensityMatrix(m)


def _cos_sin(theta):
    return PureState([math.cos(theta), 0, 0, math.sin(theta)])


class TestSchmidt:
    def test_product_state(self):
        s = schmidt_decompose(joint_state(pure_from_amplitudes(0.6, 0.8j), pure_from_amplitudes(1, 1)))
        assert abs(s.p_plus - 1) <= 1e-10 and abs(s.p_minus) <= 1e-10

    def test_bell_state(self):
        s = schmidt_decompose(_cos_sin(math.pi / 4))
        assert abs(s.p_plus - 0.5) <= 1e-10 and abs(s.p_minus - 0.5) <= 1e-10

    def test_pi_over_six(self):
        s = schmidt_decompose(_cos_sin(math.pi / 6))
        assert abs(s.p_plus - 0.75) <= 1e-10 and abs(s.p_minus - 0.25) <= 1e-10

    def test_requires_joint(self):
        with pytest.raises(ValidationError):
            schmidt_decompose(pure_from_amplitudes(1, 0))

    @given(complex_vector(4))
    def test_reconstruction_and_bases(self, v):
        s = schmidt_decompose(PureState(v))
        assert s.p_plus >= s.p_minus
        assert abs(s.p_plus + s.p_minus - 1) <= 1e-10
        for basis in (s.system_basis, s.probe_basis):
            assert linalg.max_abs(basis.conj().T @ basis - np.eye(2)) <= 1e-10
        # system vectors carry the phase convention; probe phases follow from real coefficients
        for k in range(2):
            lead = next(x for x in s.system_basis[:, k] if abs(x) > 1e-12)
            assert lead.imag == 0 and lead.real > 0
        overlap = abs(np.vdot(s.reconstruct(), v))
        assert abs(overlap - 1) <= 1e-10

    @given(complex_vector(4))
    def test_coefficients_are_reduced_spectra(self, v):
        s = schmidt_decompose(PureState(v))
        rho_s, rho_p = reduced_states(v)
        for rho in (rho_s, rho_p):
            np.testing.assert_allclose(np.linalg.eigvalsh(rho)[::-1], [s.p_plus, s.p_minus], atol=1e-10)
        again = schmidt_decompose(PureState.normalized(s.reconstruct()))
        assert abs(again.p_plus - s.p_plus) <= 1e-10
