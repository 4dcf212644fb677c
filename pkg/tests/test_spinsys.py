import math

import numpy as np
import pytest

from fidlab import linalg, spinsys
from fidlab.errors import InputError

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

J_GRID = [0.5, 1.0, 1.5, 2.5, 7.5, 31.5]


class TestAngularMomentum:
    def test_spin_half_is_half_pauli(self):
        jx, jy, jz = spinsys.angular_momentum(0.5)
        np.testing.assert_allclose(jx, SIGMA_X / 2, atol=1e-15)
        np.testing.assert_allclose(jy, SIGMA_Y / 2, atol=1e-15)
        np.testing.assert_allclose(jz, SIGMA_Z / 2, atol=1e-15)

    def test_spin_one_jz(self):
        _, _, jz = spinsys.angular_momentum(1.0)
        np.testing.assert_allclose(jz, np.diag([1.0, 0.0, -1.0]))

    def test_spin_three_half_casimir(self):
        jx, jy, jz = spinsys.angular_momentum(1.5)
        casimir = jx @ jx + jy @ jy + jz @ jz
        np.testing.assert_allclose(casimir, 3.75 * np.eye(4), atol=1e-10)

    @pytest.mark.parametrize("j", J_GRID)
    def test_algebra(self, j):
        jx, jy, jz = spinsys.angular_momentum(j)
        comm = jx @ jy - jy @ jx
        assert np.linalg.norm(comm - 1j * jz) <= 1e-10 * np.linalg.norm(jz)
        casimir = jx @ jx + jy @ jy + jz @ jz
        assert np.linalg.norm(casimir - j * (j + 1) * np.eye(jz.shape[0])) <= 1e-8

    @pytest.mark.parametrize("j", J_GRID)
    def test_jz_descending(self, j):
        _, _, jz = spinsys.angular_momentum(j)
        diag = np.diag(jz).real
        np.testing.assert_allclose(diag, j - np.arange(len(diag)))

    @pytest.mark.parametrize("j", [0.3, -0.5, 0.0])
    def test_rejects_bad_spin(self, j):
        with pytest.raises(InputError):
            spinsys.angular_momentum(j)


class TestKickedTop:
    def test_kick_off_is_pure_rotation(self):
        top = spinsys.kicked_top(0.5, 0.0)
        u = spinsys.kicked_top_unitary(top)
        expected = linalg.expm_i_hermitian(SIGMA_Y, math.pi / 4)
        np.testing.assert_allclose(u, expected, atol=1e-12)

    @pytest.mark.parametrize("j", J_GRID)
    @pytest.mark.parametrize("k", [0.0, 1.0, 12.0])
    def test_unitarity(self, j, k):
        top = spinsys.kicked_top(j, k)
        u = spinsys.kicked_top_unitary(top)
        assert linalg.unitarity_defect(u) <= 1e-10 * math.sqrt(top.dim)

    def test_spin_one_kick_factor(self):
        top = spinsys.kicked_top(1.0, 1.0)
        u = spinsys.kicked_top_unitary(top)
        rotation = linalg.expm_i_hermitian(top.jy, math.pi / 2)
        kick = np.diag([np.exp(-1j), 1.0, np.exp(-1j)])
        np.testing.assert_allclose(u, rotation @ kick, atol=1e-12)

    def test_deterministic(self):
        u1 = spinsys.kicked_top_unitary(spinsys.kicked_top(7.5, 12.0))
        u2 = spinsys.kicked_top_unitary(spinsys.kicked_top(7.5, 12.0))
        np.testing.assert_array_equal(u1, u2)


class TestPerturbations:
    def test_zero_delta_is_identity(self):
        top = spinsys.kicked_top(1.0, 1.0)
        spec = spinsys.collective_rotation_perturbation(top, 0.0)
        np.testing.assert_allclose(spinsys.perturbation_unitary(spec),
                                   np.eye(3), atol=1e-12)

    def test_spin_half_diagonal(self):
        top = spinsys.kicked_top(0.5, 1.0)
        delta = 0.37
        p = spinsys.perturbation_unitary(
            spinsys.collective_rotation_perturbation(top, delta))
        expected = np.diag([np.exp(-1j * delta / 2), np.exp(1j * delta / 2)])
        np.testing.assert_allclose(p, expected, atol=1e-12)

    def test_commutes_with_jz(self):
        top = spinsys.kicked_top(2.5, 3.0)
        p = spinsys.perturbation_unitary(
            spinsys.collective_rotation_perturbation(top, 0.8))
        assert np.linalg.norm(p @ top.jz - top.jz @ p) <= 1e-12

    def test_register_generator_values(self):
        gen = spinsys.register_z_generator(8)
        np.testing.assert_allclose(
            np.diag(gen).real,
            [1.5, 0.5, 0.5, -0.5, 0.5, -0.5, -0.5, -1.5])

    def test_register_trace_product_form(self):
        # Tr exp(-i delta V) factorizes as (2 cos(delta/2))^K
        delta = 0.23
        for dim in (4, 16, 64):
            spec = spinsys.register_rotation_perturbation(dim, delta)
            p = spinsys.perturbation_unitary(spec)
            n_qubits = dim.bit_length() - 1
            expected = (2 * math.cos(delta / 2)) ** n_qubits
            assert abs(np.trace(p) - expected) < 1e-10 * dim

    def test_register_requires_power_of_two(self):
        with pytest.raises(InputError):
            spinsys.register_z_generator(6)

    def test_rejects_non_hermitian_generator(self):
        with pytest.raises(InputError):
            spinsys.PerturbationSpec(delta=0.1,
                                     generator_v=np.array([[0, 1], [0, 0]]))


class TestMapPair:
    def test_zero_delta_reproduces_map(self):
        top = spinsys.kicked_top(1.5, 2.0)
        u = spinsys.kicked_top_unitary(top)
        pair = spinsys.make_map_pair(
            u, spinsys.collective_rotation_perturbation(top, 0.0))
        np.testing.assert_allclose(pair.u_p, u, atol=1e-12)

    def test_scalar_exponentials(self):
        spec = spinsys.PerturbationSpec(delta=math.pi, generator_v=SIGMA_Z / 2)
        pair = spinsys.make_map_pair(np.eye(2), spec)
        np.testing.assert_allclose(pair.u_p, np.diag([-1j, 1j]), atol=1e-12)

    @pytest.mark.parametrize("j,k,delta", [(0.5, 1.0, 0.4), (7.5, 12.0, 0.1)])
    def test_unitarity(self, j, k, delta):
        top = spinsys.kicked_top(j, k)
        pair = spinsys.make_map_pair(
            spinsys.kicked_top_unitary(top),
            spinsys.collective_rotation_perturbation(top, delta))
        assert linalg.unitarity_defect(pair.u_p) <= 1e-10 * math.sqrt(pair.dim)

    def test_rejects_non_unitary(self):
        spec = spinsys.PerturbationSpec(delta=0.1, generator_v=SIGMA_Z)
        with pytest.raises(InputError):
            spinsys.make_map_pair(2 * np.eye(2), spec)

    def test_rejects_dimension_mismatch(self):
        spec = spinsys.PerturbationSpec(delta=0.1, generator_v=SIGMA_Z)
        with pytest.raises(InputError):
            spinsys.make_map_pair(np.eye(3), spec)
