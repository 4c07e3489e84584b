import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qflow.errors import ValidationError
from qflow.kinematics import (cofactor_matrix, hyper_cofactor, internal_energy,
                              jacobian, levi_civita, quantum_potential,
                              stress_eulerian, stress_lagrangian)
from qflow.pipeline import _chain_rule_stress, _gauss3, _synthetic_map
from qflow.model import PhysicsParams

PARAMS = PhysicsParams()

matrices = arrays(np.float64, (3, 3),
                  elements=st.floats(min_value=-2, max_value=2, width=64))


class TestJacobian:
    def test_identity(self):
        assert jacobian(np.eye(3)) == pytest.approx(1.0)

    def test_diagonal(self):
        assert jacobian(np.diag([2.0, 3.0, 4.0])) == pytest.approx(24.0)

    def test_singular(self):
        g = np.array([[1.0, 2.0, 3.0], [1.0, 2.0, 3.0], [0.0, 1.0, 0.5]])
        assert jacobian(g) == pytest.approx(0.0, abs=1e-14)

    @settings(max_examples=100, deadline=None)
    @given(matrices)
    def test_matches_determinant(self, g):
        assert jacobian(g) == pytest.approx(np.linalg.det(g), abs=1e-10)

    def test_levi_civita(self):
        eps = levi_civita()
        assert eps[0, 1, 2] == 1.0 and eps[1, 0, 2] == -1.0
        assert np.count_nonzero(eps) == 6


class TestCofactor:
    def test_identity(self):
        assert cofactor_matrix(np.eye(3)) == pytest.approx(np.eye(3))

    def test_diagonal(self):
        got = cofactor_matrix(np.diag([2.0, 3.0, 4.0]))
        assert got == pytest.approx(np.diag([12.0, 8.0, 6.0]))

    def test_identity_relation_over_seeded_draws(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            while True:
                g = rng.uniform(-1, 1, (3, 3))
                if abs(np.linalg.det(g)) >= 0.3:
                    break
            J = jacobian(g)
            C = cofactor_matrix(g)
            resid = np.einsum("kj,ki->ij", g, C) - J * np.eye(3)
            assert np.max(np.abs(resid)) <= 1e-12 * abs(J)

    def test_matches_adjugate(self):
        rng = np.random.default_rng(5)
        g = rng.uniform(-1, 1, (3, 3)) + 2 * np.eye(3)
        adj = np.linalg.det(g) * np.linalg.inv(g)
        assert cofactor_matrix(g) == pytest.approx(adj.T)


class TestHyperCofactor:
    def test_identity_gradient(self):
        H = hyper_cofactor(np.eye(3))
        eye = np.eye(3)
        expected = (np.einsum("jl,mn->jmln", eye, eye)
                    - np.einsum("jn,ml->jmln", eye, eye))
        assert H == pytest.approx(expected)

    def test_degree_one_homogeneity(self):
        rng = np.random.default_rng(2)
        g = rng.normal(size=(3, 3))
        assert hyper_cofactor(2 * g) == pytest.approx(2 * hyper_cofactor(g))

    def test_finite_difference_of_cofactor(self):
        rng = np.random.default_rng(9)
        g = rng.uniform(-1, 1, (3, 3)) + np.eye(3)
        H = hyper_cofactor(g)
        step = 1e-5
        for m in range(3):
            for n in range(3):
                gp = g.copy()
                gm = g.copy()
                gp[m, n] += step
                gm[m, n] -= step
                fd = (cofactor_matrix(gp) - cofactor_matrix(gm)) / (2 * step)
                assert np.max(np.abs(H[:, m, :, n] - fd)) <= 1e-8


def _gaussian_1d_derivs(x, sigma0=1.0):
    rho = (2 * np.pi * sigma0**2) ** -0.5 * np.exp(-x**2 / (2 * sigma0**2))
    d1 = rho * (-x / sigma0**2)
    d2 = rho * ((x / sigma0**2) ** 2 - 1 / sigma0**2)
    return rho, d1, d2


class TestStressEulerian:
    def test_uniform_density(self):
        sigma, valid = stress_eulerian(1.0, np.zeros(3), np.zeros((3, 3)), 1.0, 1.0)
        assert np.all(sigma == 0) and valid

    def test_gaussian_peak_value(self):
        rho, d1, d2 = _gaussian_1d_derivs(np.array([0.0]))
        grad = np.array([[d1[0], 0, 0]])
        hess = np.zeros((1, 3, 3))
        hess[0, 0, 0] = d2[0]
        sigma, valid = stress_eulerian(rho, grad, hess, 1.0, 1.0)
        assert sigma[0, 0, 0] == pytest.approx(0.0997356, abs=1e-7)
        assert valid[0]

    def test_symmetric_by_construction(self):
        rng = np.random.default_rng(4)
        grad = rng.normal(size=3)
        h = rng.normal(size=(3, 3))
        hess = h + h.T
        sigma, _ = stress_eulerian(0.7, grad, hess, 1.0, 1.0)
        assert np.max(np.abs(sigma - sigma.T)) == 0.0

    def test_floor_masks(self):
        rho = np.array([1.0, 1e-20])
        grad = np.zeros((2, 3))
        hess = np.zeros((2, 3, 3))
        _, valid = stress_eulerian(rho, grad, hess, 1.0, 1.0)
        assert valid[0] and not valid[1]


class TestStressLagrangian:
    def test_identity_map_uniform_density(self):
        sig = stress_lagrangian(np.eye(3), np.zeros((3, 3, 3)),
                                np.zeros((3, 3, 3, 3)), 1.0, np.zeros(3),
                                np.zeros((3, 3)), 1.0, 1.0)
        assert np.max(np.abs(sig)) == 0.0

    def test_identity_map_matches_eulerian(self):
        pt = np.array([0.4, -0.2, 0.8])
        rho0, dr, d2r = _gauss3(pt)
        sig_l = stress_lagrangian(np.eye(3), np.zeros((3, 3, 3)),
                                  np.zeros((3, 3, 3, 3)), rho0, dr, d2r, 1.0, 1.0)
        sig_e, _ = stress_eulerian(rho0, dr, d2r, 1.0, 1.0)
        assert np.max(np.abs(sig_l - sig_e)) <= 1e-12 * np.max(np.abs(sig_e))

    def test_chain_rule_oracle(self):
        for pt in ([0.3, -0.4, 0.2], [-0.6, 0.1, 0.5]):
            pt = np.array(pt)
            _, g, second, third = _synthetic_map(pt)
            rho0, dr, d2r = _gauss3(pt)
            sig = stress_lagrangian(g, second, third, rho0, dr, d2r, 1.0, 1.0)
            oracle = _chain_rule_stress(pt, PARAMS)
            rel = np.max(np.abs(sig - oracle)) / np.max(np.abs(oracle))
            assert rel <= 1e-6

    def test_symmetry_emerges(self):
        pt = np.array([0.5, 0.3, -0.7])
        _, g, second, third = _synthetic_map(pt)
        rho0, dr, d2r = _gauss3(pt)
        sig = stress_lagrangian(g, second, third, rho0, dr, d2r, 1.0, 1.0)
        assert np.max(np.abs(sig - sig.T)) <= 1e-12 * np.max(np.abs(sig))

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValidationError):
            stress_lagrangian(np.zeros((3, 3)), np.zeros((3, 3, 3)),
                              np.zeros((3, 3, 3, 3)), 1.0, np.zeros(3),
                              np.zeros((3, 3)), 1.0, 1.0)
        with pytest.raises(ValidationError):
            stress_lagrangian(np.eye(3), np.zeros((3, 3, 3)),
                              np.zeros((3, 3, 3, 3)), -1.0, np.zeros(3),
                              np.zeros((3, 3)), 1.0, 1.0)


class TestQuantumPotential:
    def test_uniform(self):
        vq, valid = quantum_potential(2.0, np.zeros(3), 0.0, 1.0, 1.0)
        assert vq == 0.0 and valid

    def test_gaussian_values(self):
        for x, expected in ((0.0, 0.25), (1.0, 0.125)):
            rho, d1, d2 = _gaussian_1d_derivs(np.array([x]))
            grad = np.array([[d1[0], 0, 0]])
            vq, _ = quantum_potential(rho, grad, np.array([d2[0]]), 1.0, 1.0)
            assert vq[0] == pytest.approx(expected, abs=1e-12)


class TestInternalEnergy:
    def test_uniform(self):
        u, valid = internal_energy(3.0, np.zeros(3), 1.0, 1.0)
        assert u == 0.0 and valid

    def test_gaussian_value(self):
        rho, d1, _ = _gaussian_1d_derivs(np.array([1.0]))
        u, _ = internal_energy(rho, np.array([[d1[0], 0, 0]]), 1.0, 1.0)
        assert u[0] == pytest.approx(0.125, abs=1e-12)

    def test_product_density_splits(self):
        # rho = rho1(x1) rho2(x2) rho3(x3): the log-gradient form sums the
        # three one-dimensional contributions
        rng = np.random.default_rng(6)
        pts = rng.uniform(-1, 1, (5, 3))
        sigmas = np.array([1.0, 0.7, 1.4])
        rho_i = (2 * np.pi * sigmas**2) ** -0.5 * np.exp(-pts**2 / (2 * sigmas**2))
        rho = np.prod(rho_i, axis=1)
        grad = rho[:, None] * (-pts / sigmas**2)
        total, _ = internal_energy(rho, grad, 1.0, 1.0)
        parts = np.zeros(len(pts))
        for k in range(3):
            gk = np.zeros((len(pts), 3))
            gk[:, k] = rho_i[:, k] * (-pts[:, k] / sigmas[k] ** 2)
            uk, _ = internal_energy(rho_i[:, k], gk, 1.0, 1.0)
            parts += uk
        assert np.max(np.abs(total - parts)) <= 1e-12


class TestDeformGradientType:
    def test_wraps_functions(self):
        from qflow.kinematics import DeformGradient
        dg = DeformGradient(np.diag([2.0, 3.0, 4.0]))
        assert jacobian(dg) == pytest.approx(24.0)
        assert dg.jacobian() == pytest.approx(24.0)
        assert cofactor_matrix(dg) == pytest.approx(np.diag([12.0, 8.0, 6.0]))

    def test_symmetry_validation(self):
        from qflow.kinematics import DeformGradient
        second = np.zeros((3, 3, 3))
        second[0, 1, 2] = 1.0  # not symmetric in (1, 2)
        with pytest.raises(ValidationError, match="symmetric"):
            DeformGradient(np.eye(3), second=second)

    def test_carries_derivatives_into_stress(self):
        from qflow.kinematics import DeformGradient
        pt = np.array([0.3, -0.4, 0.2])
        _, g, second, third = _synthetic_map(pt)
        rho0, dr, d2r = _gauss3(pt)
        dg = DeformGradient(g, second, third)
        a = stress_lagrangian(dg, rho0=rho0, drho0=dr, d2rho0=d2r)
        b = stress_lagrangian(g, second, third, rho0, dr, d2r, 1.0, 1.0)
        assert np.array_equal(a, b)
