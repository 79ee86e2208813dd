import numpy as np
import pytest

from starqfi.io import load_cached_ut
from starqfi.qcore import collective_ancilla_op, embed_target, pauli
from starqfi.states import BlochAngles, StrConfig, bloch_vector, single_qubit_state, str_target_rotated
from starqfi.sweeps import TABLE_STATES, correlated_qst_fisher
from starqfi.tomography import (
    ConstraintSystem,
    IndeterminateStateError,
    OptimizerConfig,
    RankDeficientError,
    TomographyUnitary,
    ancilla_observables,
    angles_from_bloch,
    calibrate_noise,
    circuit_unitary,
    constraint_matrix,
    correlation,
    expected_angle_error,
    identity_unitary,
    measure_intensities,
    optimize_ut,
    quadrature_signal,
    single_qubit_qst,
    str_qst,
    summed_quadrature_observables,
)


def test_correlation_examples():
    assert correlation(pauli("x"), pauli("x")) == pytest.approx(1.0)
    assert correlation(pauli("x"), -pauli("x")) == pytest.approx(-1.0)
    assert correlation(pauli("x"), pauli("z")) == pytest.approx(0.0)
    assert correlation(pauli("x"), (pauli("x") + pauli("y")) / 2) == pytest.approx(1 / np.sqrt(2))
    with pytest.raises(ValueError):
        correlation(np.zeros((2, 2)), pauli("x"))


def test_angles_from_bloch():
    a = angles_from_bloch([0, 0, 2])
    assert (a.theta0, a.phi0) == (0.0, 0.0)
    a = angles_from_bloch([0, 1, 0])
    assert a.theta0 == pytest.approx(np.pi / 2) and a.phi0 == pytest.approx(np.pi / 2)
    a = angles_from_bloch([0, -1, 0])
    assert a.phi0 == pytest.approx(3 * np.pi / 2)
    with pytest.raises(IndeterminateStateError):
        angles_from_bloch([0, 0, 0])


@pytest.mark.parametrize("label,theta0,phi0", TABLE_STATES)
def test_single_qubit_qst_recovers_table_states(label, theta0, phi0):
    eps = 0.37
    rho = single_qubit_state(BlochAngles(theta0, phi0), eps)
    expected = bloch_vector(BlochAngles(theta0, phi0))
    res = single_qubit_qst(rho, expected)
    np.testing.assert_allclose(res.bloch, eps * expected, atol=1e-15)
    assert res.norm == pytest.approx(eps)
    assert res.correlation == pytest.approx(1.0, abs=1e-15)
    assert res.angles.theta0 == pytest.approx(theta0, abs=1e-12)
    if theta0 > 0:
        assert res.angles.phi0 == pytest.approx(phi0, abs=1e-12)


def test_single_qubit_qst_indeterminate():
    res = single_qubit_qst(np.eye(2) / 2)
    assert res.indeterminate and res.angles is None and res.correlation is None
    with pytest.raises(ValueError):
        single_qubit_qst(np.eye(4) / 4)


def test_circuit_unitary():
    np.testing.assert_allclose(circuit_unitary(3, np.zeros(10)), np.eye(8), atol=1e-15)
    rng = np.random.default_rng(1)
    u = circuit_unitary(4, rng.uniform(0, 6, 10))
    np.testing.assert_allclose(u @ u.conj().T, np.eye(16), atol=1e-12)
    # evolving for t = 1/J gives pi rotations about z, prod_j (-i Z_1 Z_j); for two ancillas that is -Z_2 Z_3
    v = circuit_unitary(3, [0, 0, 1.0, 0, 0] + [0] * 5)
    z = pauli("z")
    np.testing.assert_allclose(v, -np.kron(np.eye(2), np.kron(z, z)), atol=1e-14)
    with pytest.raises(ValueError):
        circuit_unitary(3, np.zeros(9))


def test_ancilla_observables_identity_unitary():
    obs = ancilla_observables(2, np.eye(4))
    p0 = np.diag([1, 0])
    np.testing.assert_allclose(obs[0], np.kron(p0, pauli("x") / 2))
    np.testing.assert_allclose(obs[3], np.kron(np.diag([0, 1]), pauli("y") / 2))
    mx, my = summed_quadrature_observables(2, np.eye(4))
    np.testing.assert_allclose(mx, np.kron(np.eye(2), pauli("x") / 2))
    np.testing.assert_allclose(my, np.kron(np.eye(2), pauli("y") / 2))
    with pytest.raises(ValueError):
        ancilla_observables(1, np.eye(2))


def test_constraint_matrix_identity_unitary_is_zero():
    # the antiphase order never shows up as transverse ancilla signal without evolution
    cs = constraint_matrix(StrConfig(4, 0.0, 0.1), identity_unitary(4))
    np.testing.assert_allclose(cs.matrix, 0.0, atol=1e-15)
    assert cs.rank == 0 and cs.condition_number == np.inf
    with pytest.raises(RankDeficientError):
        cs.solve(np.zeros(4))


def test_constraint_matrix_is_linear_model(ut4):
    cfg = StrConfig(4, 0.0, 2e-3)
    cs = constraint_matrix(cfg, ut4)
    rng = np.random.default_rng(2)
    obs = ancilla_observables(4, ut4)
    for _ in range(10):
        s = rng.normal(size=3)
        dev = cfg.eps_aN * embed_target(sum(c * pauli(a) for c, a in zip(s, "xyz")), 4) @ collective_ancilla_op(4, "z")
        rho = np.eye(16) / 16 + dev
        np.testing.assert_allclose(measure_intensities(rho, obs), cs.matrix @ s + cs.offsets, atol=1e-15)
    assert cs.rank == 3
    assert cs.matrix.shape == (4, 3)
    # scaling with purity
    np.testing.assert_allclose(constraint_matrix(StrConfig(4, 0.0, 4e-3), ut4).matrix, 2 * cs.matrix, atol=1e-17)


def test_constraint_system_solve_example():
    cs = ConstraintSystem(np.vstack([np.eye(3), np.ones((1, 3))]), np.zeros(4))
    s, res = cs.solve([1.0, 2.0, 3.0, 6.0])
    np.testing.assert_allclose(s, [1, 2, 3])
    assert res == pytest.approx(0.0, abs=1e-12)
    assert cs.condition_number == pytest.approx(2.0)


def test_str_qst_round_trip(cfg4, ut4):
    rng = np.random.default_rng(3)
    for _ in range(100):
        a = BlochAngles(np.arccos(rng.uniform(-1, 1)), rng.uniform(0, 2 * np.pi))
        expected = bloch_vector(a)
        res = str_qst(str_target_rotated(cfg4, a), ut4, cfg4, expected)
        assert res.correlation >= 1 - 1e-9
        assert np.linalg.norm(res.bloch - expected) <= 1e-9
        assert res.residual <= 1e-9


def test_str_qst_noise_is_deterministic_and_scales(cfg4, ut4):
    a = BlochAngles(np.pi / 4, np.pi / 2)
    rho = str_target_rotated(cfg4, a)
    r1 = str_qst(rho, ut4, cfg4, bloch_vector(a), 0.01, np.random.default_rng(5))
    r2 = str_qst(rho, ut4, cfg4, bloch_vector(a), 0.01, np.random.default_rng(5))
    np.testing.assert_array_equal(r1.bloch, r2.bloch)
    r3 = str_qst(rho, ut4, cfg4, bloch_vector(a), 0.02, np.random.default_rng(5))
    # same draws, doubled amplitude: the error vector doubles exactly (linear solve)
    np.testing.assert_allclose(r3.bloch - bloch_vector(a), 2 * (r1.bloch - bloch_vector(a)), rtol=1e-9, atol=1e-15)


def test_noise_calibration_matches_monte_carlo(cfg4, ut4):
    cs = constraint_matrix(cfg4, ut4)
    sigma = calibrate_noise(cs, 0.999)
    assert expected_angle_error(cs, sigma) == pytest.approx(1e-3)
    rng = np.random.default_rng(8)
    a = BlochAngles(np.pi / 2, 0.0)
    rho = str_target_rotated(cfg4, a)
    cs_values = [str_qst(rho, ut4, cfg4, bloch_vector(a), sigma, rng).correlation for _ in range(2000)]
    assert np.mean(cs_values) == pytest.approx(0.999, abs=2e-4)
    with pytest.raises(ValueError):
        calibrate_noise(cs, 1.0)


def test_tomography_unitary_roundtrip(cfg4, ut4):
    assert ut4.unitarity_error() < 1e-12
    clone = TomographyUnitary.from_dict(ut4.to_dict(), cfg4)
    np.testing.assert_array_equal(clone.matrix, ut4.matrix)
    assert clone.condition_number == pytest.approx(ut4.condition_number)
    assert ut4.condition_number < 1.1


def test_quadrature_signal_matches_generic_fisher(cfg4, ut4):
    theta = np.array([np.pi / 2, np.pi / 4, 1.0])
    phi = np.array([0.0, np.pi / 2, 2.5])
    fast = quadrature_signal(cfg4, ut4, (theta, phi))
    for t, p, f in zip(theta, phi, fast):
        assert f == pytest.approx(correlated_qst_fisher(cfg4, ut4, t, p) / cfg4.eps_a1**2, rel=1e-9)
    limit = quadrature_signal(cfg4, ut4, (theta, phi), small_purity_limit=True)
    # leading-order value; corrections are of relative order eps_aN
    np.testing.assert_allclose(limit, fast, rtol=1e-3)


def test_optimizer_threads_do_not_change_result(cfg4):
    opt = OptimizerConfig(population=16, generations=4, threads=1)
    serial = optimize_ut(cfg4, opt)
    parallel = optimize_ut(cfg4, OptimizerConfig(population=16, generations=4, threads=4))
    np.testing.assert_array_equal(serial.parameters, parallel.parameters)
    assert opt.digest() == OptimizerConfig(population=16, generations=4, threads=4).digest()
    assert opt.digest() != OptimizerConfig(population=16, generations=5).digest()


@pytest.mark.slow
def test_optimizer_reproduces_packaged_unitary(cfg4):
    cached = load_cached_ut(cfg4, OptimizerConfig())
    fresh = optimize_ut(cfg4, OptimizerConfig())
    np.testing.assert_allclose(fresh.parameters, cached.parameters, rtol=1e-12)


def test_readout_observables_traceless_and_blind_to_identity(ut4):
    obs = ancilla_observables(4, ut4)
    for m in obs:
        assert abs(np.trace(m)) < 1e-13
        np.testing.assert_allclose(m, m.conj().T, atol=1e-15)
    np.testing.assert_allclose(measure_intensities(np.eye(16) / 16, obs), 0.0, atol=1e-15)
    a = measure_intensities(np.eye(16) / 16, obs)
    np.testing.assert_array_equal(a, measure_intensities(np.eye(16) / 16, obs))
    for axis in ("x", "y"):
        i = 0 if axis == "x" else 1
        plain = ancilla_observables(4, np.eye(16))
        np.testing.assert_allclose(plain[i] + plain[i + 2], collective_ancilla_op(4, axis), atol=1e-15)


def test_intensities_of_rotated_states_follow_linear_model(cfg4, ut4):
    cs = constraint_matrix(cfg4, ut4)
    obs = ancilla_observables(4, ut4)
    rng = np.random.default_rng(4)
    for _ in range(50):
        a = BlochAngles(np.arccos(rng.uniform(-1, 1)), rng.uniform(0, 2 * np.pi))
        got = measure_intensities(str_target_rotated(cfg4, a), obs)
        np.testing.assert_allclose(got, cs.matrix @ bloch_vector(a) + cs.offsets, atol=1e-10 * cs.norm)
    # superposition in the deviation part
    d1 = str_target_rotated(cfg4, BlochAngles(0.3, 1.0)) - np.eye(16) / 16
    d2 = str_target_rotated(cfg4, BlochAngles(2.0, 4.0)) - np.eye(16) / 16
    lhs = measure_intensities(np.eye(16) / 16 + 0.3 * d1 + 0.7 * d2, obs)
    rhs = 0.3 * measure_intensities(d1, obs) + 0.7 * measure_intensities(d2, obs)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12 * cs.norm)


def test_reconstruction_error_scales_linearly_with_noise(cfg4, ut4):
    a = BlochAngles(np.pi / 2, 0.0)
    rho = str_target_rotated(cfg4, a)
    slopes = []
    for sigma in (1e-4, 1e-3, 1e-2):
        rng = np.random.default_rng(int(sigma * 1e6))
        err = [np.linalg.norm(str_qst(rho, ut4, cfg4, noise_sigma=sigma, rng=rng).bloch - bloch_vector(a)) for _ in range(400)]
        slopes.append(np.sqrt(np.mean(np.square(err))) / sigma)
    assert max(slopes) / min(slopes) < 1.2


def test_packaged_unitary_quality(ut4, cfg4):
    assert constraint_matrix(cfg4, ut4).rank == 3
    assert 1 <= ut4.condition_number <= 20
    assert ut4.unitarity_error() < 1e-10
