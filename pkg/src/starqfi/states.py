"""
State families for a single target qubit and for an N-qubit star-topology
register (one target, N-1 equivalent ancillas), with analytic derivatives
with respect to the polar and azimuthal Bloch angles.

Purities are configured per qubit (``eps_t1``, ``eps_a1``); the N-qubit
factors multiplying the deviation operators are ``eps_1 * 2 / 2**N``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import constants

from .qcore import collective_ancilla_op, embed_target, identity, pauli

__all__ = [
    "ACETONITRILE_GAMMA_RATIO",
    "BlochAngles",
    "StrConfig",
    "Family",
    "StateFamily",
    "bloch_vector",
    "bloch_deviation",
    "deviation_from_vector",
    "single_qubit_state",
    "str_thermal",
    "str_correlated",
    "str_target_rotated",
    "str_uncorrelated",
    "state_derivative",
    "purity_factors",
]

# gamma_a / gamma_t implied by the quoted polarization enhancement 6.93 for N = 4
ACETONITRILE_GAMMA_RATIO = 6.93 / np.sqrt(3.0)


@dataclass(frozen=True)
class BlochAngles:
    """Polar angle in [0, pi] and azimuth wrapped into [0, 2 pi)."""

    theta0: float
    phi0: float = 0.0

    def __post_init__(self):
        theta, phi = float(self.theta0), float(self.phi0)
        if not np.isfinite(theta) or not np.isfinite(phi):
            raise ValueError("Bloch angles must be finite")
        if not -1e-12 <= theta <= np.pi + 1e-12:
            raise ValueError(f"theta0={theta} outside [0, pi]")
        object.__setattr__(self, "theta0", min(max(theta, 0.0), np.pi))
        object.__setattr__(self, "phi0", float(np.mod(phi, 2 * np.pi)))

    @classmethod
    def unchecked(cls, theta0, phi0):
        # derivative oracles need theta slightly outside [0, pi]
        obj = object.__new__(cls)
        object.__setattr__(obj, "theta0", float(theta0))
        object.__setattr__(obj, "phi0", float(phi0))
        return obj


def _check_eps(name, value):
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name}={value} outside [0, 1]")


@dataclass(frozen=True)
class StrConfig:
    n_qubits: int = 4
    eps_t1: float = 1e-3 / ACETONITRILE_GAMMA_RATIO
    eps_a1: float = 1e-3

    def __post_init__(self):
        if int(self.n_qubits) != self.n_qubits or self.n_qubits < 2:
            raise ValueError(f"n_qubits must be an integer >= 2, got {self.n_qubits!r}")
        if self.n_qubits > 12:
            raise ValueError("n_qubits > 12 is outside the dense-matrix range")
        _check_eps("eps_t1", self.eps_t1)
        _check_eps("eps_a1", self.eps_a1)

    @classmethod
    def from_gamma_ratio(cls, n_qubits, eps_a1, gamma_ratio=ACETONITRILE_GAMMA_RATIO):
        return cls(n_qubits, eps_a1 / gamma_ratio, eps_a1)

    @property
    def dim(self):
        return 2**self.n_qubits

    @property
    def eps_tN(self):
        return self.eps_t1 * 2 / self.dim

    @property
    def eps_aN(self):
        return self.eps_a1 * 2 / self.dim


def bloch_vector(angles):
    t, p = angles.theta0, angles.phi0
    return np.array([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)])


def deviation_from_vector(v):
    """``v . sigma`` for a real 3-vector."""
    return v[0] * pauli("x") + v[1] * pauli("y") + v[2] * pauli("z")


def bloch_deviation(angles):
    """The unit-direction deviation ``n0 . sigma``."""
    return deviation_from_vector(bloch_vector(angles))


def _bloch_vector_derivative(angles, param):
    t, p = angles.theta0, angles.phi0
    if param == "theta":
        return np.array([np.cos(t) * np.cos(p), np.cos(t) * np.sin(p), -np.sin(t)])
    if param == "phi":
        return np.array([-np.sin(t) * np.sin(p), np.sin(t) * np.cos(p), 0.0])
    raise ValueError(f"unknown parameter {param!r}; expected 'theta' or 'phi'")


def single_qubit_state(angles, eps_t1):
    _check_eps("eps_t1", eps_t1)
    return identity(2) / 2 + eps_t1 * bloch_deviation(angles) / 2


def str_thermal(config):
    n = config.n_qubits
    return (
        identity(config.dim) / config.dim
        + config.eps_tN * embed_target(pauli("z") / 2, n)
        + config.eps_aN * collective_ancilla_op(n, "z")
    )


def _antiphase(config, target_op):
    # (target_op (x) 1) * sum_j I_jz ; the two factors commute
    return embed_target(target_op, config.n_qubits) @ collective_ancilla_op(config.n_qubits, "z")


def str_correlated(config):
    return identity(config.dim) / config.dim + config.eps_aN * _antiphase(config, pauli("z"))


def str_target_rotated(config, angles):
    return identity(config.dim) / config.dim + config.eps_aN * _antiphase(config, bloch_deviation(angles))


def str_uncorrelated(config, angles):
    n = config.n_qubits
    return (
        identity(config.dim) / config.dim
        + config.eps_tN * embed_target(bloch_deviation(angles), n) / 2
        + config.eps_aN * collective_ancilla_op(n, "z")
    )


class Family(enum.Enum):
    SINGLE_QUBIT = "single"
    STR_CORRELATED = "correlated"
    STR_UNCORRELATED = "uncorrelated"


@dataclass(frozen=True)
class StateFamily:
    """
    A one-qubit-parametrized family of states evaluated at ``angles``.

    For ``SINGLE_QUBIT`` only ``config.eps_t1`` is used.
    """

    kind: Family
    angles: BlochAngles
    config: StrConfig = field(default_factory=StrConfig)

    @classmethod
    def single(cls, theta0, phi0, eps_t1):
        # n_qubits is irrelevant for the single-qubit family
        return cls(Family.SINGLE_QUBIT, BlochAngles(theta0, phi0), StrConfig(2, eps_t1, 0.0))

    @property
    def dim(self):
        return 2 if self.kind is Family.SINGLE_QUBIT else self.config.dim

    def at(self, angles):
        return replace(self, angles=angles)

    def evaluate(self, angles=None):
        angles = self.angles if angles is None else angles
        if self.kind is Family.SINGLE_QUBIT:
            return single_qubit_state(angles, self.config.eps_t1)
        if self.kind is Family.STR_CORRELATED:
            return str_target_rotated(self.config, angles)
        return str_uncorrelated(self.config, angles)

    def derivative(self, param):
        return state_derivative(self, param)


def state_derivative(family, param):
    """
    Analytic derivative of the family's density matrix with respect to
    ``param`` ("theta" or "phi") at ``family.angles``.

    Every family is affine in ``n0 . sigma`` on the target, so the derivative
    replaces the Bloch direction by its angular derivative.
    """
    dsigma = deviation_from_vector(_bloch_vector_derivative(family.angles, param))
    cfg = family.config
    if family.kind is Family.SINGLE_QUBIT:
        return cfg.eps_t1 * dsigma / 2
    if family.kind is Family.STR_CORRELATED:
        return cfg.eps_aN * _antiphase(cfg, dsigma)
    return cfg.eps_tN * embed_target(dsigma, cfg.n_qubits) / 2


def purity_factors(gamma_t, gamma_a, b0, temp, n_qubits):
    """
    High-temperature purity factors ``hbar gamma B0 / (2**N k_B T)``.

    Returns
    -------
    (eps_tN, eps_aN)
    """
    for name, val in (("gamma_t", gamma_t), ("gamma_a", gamma_a), ("b0", b0), ("temp", temp)):
        if not val > 0:
            raise ValueError(f"{name} must be positive")
    if int(n_qubits) != n_qubits or n_qubits < 1:
        raise ValueError("n_qubits must be a positive integer")
    scale = constants.hbar * b0 / (2**n_qubits * constants.k * temp)
    return gamma_t * scale, gamma_a * scale
