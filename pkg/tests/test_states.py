import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from starqfi.qcore import is_hermitian, partial_trace_ancilla, partial_trace_target, pauli, rotate_target
from starqfi.states import (
    BlochAngles,
    Family,
    StateFamily,
    StrConfig,
    bloch_deviation,
    purity_factors,
    single_qubit_state,
    state_derivative,
    str_correlated,
    str_target_rotated,
    str_thermal,
    str_uncorrelated,
)

angles_st = st.builds(BlochAngles, st.floats(0, np.pi), st.floats(0, 2 * np.pi, exclude_max=True))


def assert_density_matrix(rho, tol=1e-12):
    assert is_hermitian(rho, tol)
    assert abs(np.trace(rho) - 1) <= tol
    assert np.min(np.linalg.eigvalsh(rho)) >= -1e-10


def test_bloch_angles_wrap_and_validate():
    assert BlochAngles(1.0, 2 * np.pi + 0.5).phi0 == pytest.approx(0.5)
    assert BlochAngles(1.0, -0.5).phi0 == pytest.approx(2 * np.pi - 0.5)
    with pytest.raises(ValueError):
        BlochAngles(3.5, 0)
    with pytest.raises(ValueError):
        BlochAngles(np.nan, 0)


def test_str_config_validation():
    with pytest.raises(ValueError):
        StrConfig(1, 0.1, 0.1)
    with pytest.raises(ValueError):
        StrConfig(4, 1.5, 0.1)
    cfg = StrConfig(4, 0.2, 0.1)
    assert cfg.eps_aN == pytest.approx(0.1 / 8)
    assert cfg.eps_tN == pytest.approx(0.2 / 8)


def test_bloch_deviation_examples():
    np.testing.assert_allclose(bloch_deviation(BlochAngles(0, 1.3)), pauli("z"), atol=1e-15)
    np.testing.assert_allclose(bloch_deviation(BlochAngles(np.pi / 2, 0)), pauli("x"), atol=1e-15)
    np.testing.assert_allclose(bloch_deviation(BlochAngles(np.pi / 2, np.pi / 2)), pauli("y"), atol=1e-15)


@given(angles_st)
def test_bloch_deviation_is_unit_pauli(angles):
    s = bloch_deviation(angles)
    assert is_hermitian(s)
    assert abs(np.trace(s)) < 1e-15
    np.testing.assert_allclose(s @ s, np.eye(2), atol=1e-14)


def test_single_qubit_state_examples():
    np.testing.assert_allclose(single_qubit_state(BlochAngles(0, 0), 1.0), [[1, 0], [0, 0]])
    np.testing.assert_allclose(single_qubit_state(BlochAngles(1.2, 0.4), 0.0), np.eye(2) / 2)
    np.testing.assert_allclose(single_qubit_state(BlochAngles(np.pi / 2, 0), 0.3), [[0.5, 0.15], [0.15, 0.5]], atol=1e-15)
    with pytest.raises(ValueError):
        single_qubit_state(BlochAngles(0, 0), 1.2)


@given(angles_st, st.floats(0, 1))
def test_single_qubit_state_matches_explicit_matrix(angles, eps):
    t, p = angles.theta0, angles.phi0
    explicit = 0.5 * np.array(
        [[1 + eps * np.cos(t), eps * np.exp(-1j * p) * np.sin(t)], [eps * np.exp(1j * p) * np.sin(t), 1 - eps * np.cos(t)]]
    )
    rho = single_qubit_state(angles, eps)
    np.testing.assert_allclose(rho, explicit, atol=1e-15)
    assert_density_matrix(rho)


def test_str_thermal():
    np.testing.assert_allclose(str_thermal(StrConfig(2, 0.0, 0.0)), np.eye(4) / 4)
    assert np.trace(str_thermal(StrConfig(2, 0.3, 0.2))).real == pytest.approx(1.0)
    cfg = StrConfig(4, 0.1, 0.1)
    rho = str_thermal(cfg)
    # |0000>: target +1/2, three ancillas +1/2 each
    assert rho[0, 0].real == pytest.approx(1 / 16 + (cfg.eps_tN + 3 * cfg.eps_aN) / 2, abs=1e-15)
    np.testing.assert_array_equal(rho, np.diag(np.diag(rho)))


def test_str_correlated():
    cfg = StrConfig(2, 0.0, 0.4)
    dev = str_correlated(cfg) - np.eye(4) / 4
    np.testing.assert_allclose(dev, cfg.eps_aN * 2 * np.diag([0.25, -0.25, -0.25, 0.25]), atol=1e-15)
    cfg = StrConfig(4, 0.0, 0.3)
    rho = str_correlated(cfg)
    np.testing.assert_allclose(partial_trace_ancilla(rho), np.eye(2) / 2, atol=1e-15)
    assert abs(np.trace(rho - np.eye(16) / 16)) < 1e-15


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_str_correlated_positivity_boundary(n):
    # smallest diagonal entry is 1/2^N - eps_aN (N-1)/2; zero at eps_a1 = 1/(N-1)
    edge = 1 / (n - 1)
    assert np.min(np.diag(str_correlated(StrConfig(n, 0.0, edge))).real) == pytest.approx(0.0, abs=1e-15)
    assert np.min(np.diag(str_correlated(StrConfig(n, 0.0, 0.99 * edge))).real) > 0
    if edge * 1.01 <= 1:
        assert np.min(np.diag(str_correlated(StrConfig(n, 0.0, 1.01 * edge))).real) < 0


def test_str_target_rotated_consistency():
    cfg = StrConfig(4, 0.0, 0.2)
    np.testing.assert_array_equal(str_target_rotated(cfg, BlochAngles(0, 0)), str_correlated(cfg))
    rng = np.random.default_rng(0)
    purity = None
    for _ in range(20):
        a = BlochAngles(rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi))
        rho = str_target_rotated(cfg, a)
        rotated = rotate_target(str_correlated(cfg), a.theta0, a.phi0 + np.pi / 2)
        assert np.max(np.abs(rho - rotated)) <= 1e-12
        p = np.trace(rho @ rho).real
        purity = p if purity is None else purity
        assert p == pytest.approx(purity, abs=1e-14)
        np.testing.assert_allclose(partial_trace_target(rho), np.eye(8) / 8, atol=1e-15)


def test_str_uncorrelated():
    cfg = StrConfig(2, 0.3, 0.2)
    np.testing.assert_allclose(str_uncorrelated(cfg, BlochAngles(0, 0)), str_thermal(cfg), atol=1e-15)
    cfg = StrConfig(4, 0.3, 0.2)
    a = BlochAngles(1.0, 2.0)
    rho = str_uncorrelated(cfg, a)
    assert_density_matrix(rho)
    np.testing.assert_allclose(partial_trace_ancilla(rho), single_qubit_state(a, cfg.eps_t1), atol=1e-15)


FAMILIES = [Family.SINGLE_QUBIT, Family.STR_CORRELATED, Family.STR_UNCORRELATED]


def test_state_derivative_examples():
    fam = StateFamily.single(0, 0, 1.0)
    np.testing.assert_allclose(state_derivative(fam, "theta"), [[0, 0.5], [0.5, 0]], atol=1e-15)
    np.testing.assert_allclose(state_derivative(fam, "phi"), np.zeros((2, 2)), atol=1e-15)
    t, p, e = 0.8, 2.1, 0.6
    explicit = e / 2 * np.array([[-np.sin(t), np.exp(-1j * p) * np.cos(t)], [np.exp(1j * p) * np.cos(t), np.sin(t)]])
    np.testing.assert_allclose(state_derivative(StateFamily.single(t, p, e), "theta"), explicit, atol=1e-15)
    with pytest.raises(ValueError):
        state_derivative(fam, "psi")


def _central_difference(fam, param, h=1e-6):
    t, p = fam.angles.theta0, fam.angles.phi0
    dt, dp = (h, 0) if param == "theta" else (0, h)
    return (fam.evaluate(BlochAngles.unchecked(t + dt, p + dp)) - fam.evaluate(BlochAngles.unchecked(t - dt, p - dp))) / (2 * h)


@pytest.mark.parametrize("kind", FAMILIES)
def test_state_derivative_matches_finite_differences(kind):
    rng = np.random.default_rng(7)
    for _ in range(50):
        a = BlochAngles(rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi))
        eps_t, eps_a = rng.uniform(0, 1, 2)
        cfg = StrConfig(3, eps_t, eps_a * 0.5)
        fam = StateFamily(kind, a, cfg)
        for param in ("theta", "phi"):
            d = state_derivative(fam, param)
            assert is_hermitian(d)
            assert abs(np.trace(d)) < 1e-14
            assert np.max(np.abs(d - _central_difference(fam, param))) <= 1e-8


@pytest.mark.parametrize("kind", FAMILIES)
@settings(max_examples=30, deadline=None)
@given(angles=angles_st, eps=st.floats(0, 0.3))
def test_family_evaluations_are_states(kind, angles, eps):
    fam = StateFamily(kind, angles, StrConfig(3, eps, eps))
    assert_density_matrix(fam.evaluate())


def test_purity_factors():
    gamma_h = 267.522e6
    gamma_c = 67.2828e6
    et, ea = purity_factors(gamma_c, gamma_h, 11.74, 300.0, 1)
    # 1H at 11.74 T and 300 K: hbar gamma B0 / (2 k T) ~ 4.0e-5
    assert ea == pytest.approx(4.0e-5, rel=0.02)
    assert ea / et == pytest.approx(gamma_h / gamma_c)
    et4, ea4 = purity_factors(gamma_c, gamma_h, 11.74, 300.0, 4)
    assert ea4 < 1e-5 and et4 < 1e-5
    assert purity_factors(gamma_c, 2 * gamma_h, 11.74, 300.0, 1)[1] == pytest.approx(2 * ea)
    assert purity_factors(gamma_c, gamma_h, 11.74, 300.0, 2)[1] == pytest.approx(ea / 2)
    with pytest.raises(ValueError):
        purity_factors(gamma_c, gamma_h, -1, 300, 1)
