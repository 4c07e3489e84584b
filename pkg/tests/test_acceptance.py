"""Acceptance gate: every release criterion at its stated tolerance.

The battery runs once through the command-line entry point (so the
acceptance artifact is exactly what a user would produce with
``qflow gaussian-accept`` and ``qflow tensor-check``); each criterion is
then asserted from the emitted report and printed as its own pass/fail
line.  Tolerances are pinned literally in this file.
"""

import json

import numpy as np
import pytest

from qflow.cli import main


@pytest.fixture(scope="session")
def acceptance_report(tmp_path_factory):
    out = tmp_path_factory.mktemp("acceptance")
    code = main(["gaussian-accept", "--out", str(out), "--quiet"])
    report = json.loads((out / "acceptance.json").read_text())
    report["exit_code"] = code
    return report


@pytest.fixture(scope="session")
def tensor_report(tmp_path_factory):
    out = tmp_path_factory.mktemp("tensor")
    code = main(["tensor-check", "--out", str(out), "--seed", "0", "--quiet"])
    report = json.loads((out / "tensor_check.json").read_text())
    report["exit_code"] = code
    return report


def _value(report, name):
    for check in report["checks"]:
        if check["name"] == name:
            return check["value"]
    raise KeyError(name)


def _line(criterion, name, value, tol, op="<="):
    ok = value <= tol if op == "<=" else value >= tol
    print(f"[acceptance] criterion {criterion}: {name} = {value:.3e} "
          f"({op} {tol:.1e}) {'PASS' if ok else 'FAIL'}")
    return ok


class TestCriterion1Trajectories:
    def test_max_relative_error(self, acceptance_report):
        v = _value(acceptance_report, "trajectory max relative error")
        assert _line(1, "trajectory max rel error", v, 1e-3)

    def test_runtime_budget(self, acceptance_report):
        v = _value(acceptance_report, "trajectory run wall seconds")
        assert _line(1, "trajectory wall seconds", v, 60.0)


class TestCriterion2Reconstruction:
    def test_phase_reduced_l2(self, acceptance_report):
        v = _value(acceptance_report, "psi phase-reduced L2 error")
        assert _line(2, "psi phase-reduced L2 (|x|<=6, t=2)", v, 1e-3)

    def test_density_norm(self, acceptance_report):
        v = _value(acceptance_report, "reconstructed density norm error")
        assert _line(2, "reconstructed rho norm error", v, 1e-4)

    def test_phase_value_at_unit_point(self, acceptance_report):
        # the validated closed form gives S(1, 2) = 1/8 - pi/8; the
        # trajectory-carried phase must land on it without any fitting
        got = acceptance_report["details"]["reconstructed_phase_at_x1"]
        expected = 0.125 - np.pi / 8
        err = abs(got - expected)
        assert _line(2, "S(1, 2) against validated closed form", err, 1e-3)


class TestCriterion3CrossSolver:
    def test_boosted_phase_reduced_l2(self, acceptance_report):
        v = _value(acceptance_report,
                   "boosted packet cross-solver phase-reduced L2")
        assert _line(3, "boosted cross-solver phase-reduced L2", v, 1e-2)


class TestCriterion4TensorIdentities:
    def test_cofactor_identity_100_draws(self, tensor_report):
        assert tensor_report["cofactor_identity_draws"] == 100
        v = tensor_report["cofactor_identity_rel_max"]
        assert _line(4, "cofactor identity residual (100 draws)", v, 1e-12)

    def test_cofactor_divergence_second_order(self, tensor_report):
        orders = tensor_report["cofactor_divergence_orders"]
        v = min(orders)
        assert _line(4, f"cofactor divergence decay order {orders}", v, 1.9,
                     op=">=")

    def test_stress_equivalence(self, tensor_report):
        v = tensor_report["stress_equivalence_rel_max"]
        assert _line(4, "label-variable vs chain-rule stress", v, 1e-6)

    def test_force_identity_second_order(self, tensor_report):
        v = tensor_report["force_identity_order"]
        assert _line(4, "force identity residual order", v, 1.9, op=">=")

    def test_suite_exit_code(self, tensor_report):
        assert tensor_report["exit_code"] == 0
        assert tensor_report["passed"] is True


class TestCriterion5DynamicsResiduals:
    def test_hamilton_jacobi(self, acceptance_report):
        v = _value(acceptance_report, "quantum Hamilton-Jacobi residual")
        assert _line(5, "phase-evolution residual (interior max)", v, 1e-3)

    def test_continuity(self, acceptance_report):
        v = _value(acceptance_report, "continuity residual")
        assert _line(5, "continuity residual", v, 1e-2)

    def test_euler(self, acceptance_report):
        v = _value(acceptance_report, "Euler residual")
        assert _line(5, "velocity-equation residual", v, 1e-2)


class TestCriterion6Conservation:
    def test_energy_drift(self, acceptance_report):
        v = _value(acceptance_report, "energy drift")
        assert _line(6, "trajectory energy drift", v, 1e-4)

    def test_reference_norm_drift(self, acceptance_report):
        v = _value(acceptance_report, "reference norm drift")
        assert _line(6, "spectral solver norm drift", v, 1e-10)


class TestCriterion7DualAcceleration:
    def test_paths_agree(self, acceptance_report):
        v = _value(acceptance_report, "acceleration path disagreement")
        assert _line(7, "conservation-form vs Newton-form acceleration",
                     v, 1e-4)


class TestCriterion8ParticleMethod:
    def test_endpoint(self, acceptance_report):
        v = _value(acceptance_report, "particle from x=1 endpoint error")
        assert _line(8, "particle from x=1 endpoint error", v, 5e-3)

    def test_pathwise_magnitude(self, acceptance_report):
        v = _value(acceptance_report, "path-wise |psi| vs reconstruction")
        assert _line(8, "path-wise |psi| vs reconstruction", v, 5e-2)


class TestCriterion9Moments:
    def test_two_picture_position(self, acceptance_report):
        v = _value(acceptance_report, "two-picture <x> agreement")
        assert _line(9, "<x> two-picture agreement", v, 1e-6)

    def test_two_picture_momentum(self, acceptance_report):
        v = _value(acceptance_report, "two-picture <p> agreement")
        assert _line(9, "<p> two-picture agreement", v, 1e-6)

    def test_boosted_momentum(self, acceptance_report):
        v = _value(acceptance_report, "boosted <p> against hbar*k")
        assert _line(9, "boosted <p> = hbar k", v, 1e-6)


class TestCriterion10Convergence:
    def test_spatial_order(self, acceptance_report):
        v = _value(acceptance_report, "spatial convergence order")
        ladder = acceptance_report["details"]["spatial_ladder"]
        assert _line(10, f"spatial order {ladder['orders']}", v, 3.5, op=">=")

    def test_temporal_order(self, acceptance_report):
        v = _value(acceptance_report, "temporal convergence order")
        ladder = acceptance_report["details"]["temporal_ladder"]
        assert _line(10, f"temporal order {ladder['orders']}", v, 3.5, op=">=")


class TestOverall:
    def test_cli_exit_code(self, acceptance_report):
        assert acceptance_report["exit_code"] == 0
        assert acceptance_report["passed"] is True

    def test_dual_phase_route_detail(self, acceptance_report):
        v = acceptance_report["details"]["dual_phase_deviation"]
        assert _line(2, "dual-route phase deviation", v, 1e-3)

    def test_qtm_density_routes_detail(self, acceptance_report):
        v = acceptance_report["details"]["qtm_density_route_deviation"]
        assert _line(8, "particle density route deviation", v, 1e-2)
