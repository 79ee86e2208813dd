"""
Fisher information of observables on parametrized state families, the
symmetric logarithmic derivative (SLD), and the closed forms for biased
single-qubit observables.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .qcore import (
    DEFAULT_GROUPING_TOL,
    eigenvector_decomposition,
    hermitian_eig,
    is_hermitian,
    pauli,
)
from .states import BlochAngles

__all__ = [
    "PROB_TOL",
    "DPROB_TOL",
    "SLD_PAIR_TOL",
    "FD_STEP",
    "DivergentFisherError",
    "Observable",
    "FisherResult",
    "SldObservable",
    "outcome_distribution",
    "fisher_info",
    "sld",
    "qfi_max",
    "biased_observable_theta",
    "biased_observable_phi",
    "biased_qfi_theta",
    "biased_qfi_phi",
    "quadrature_fi",
    "dual_qfi",
    "cramer_rao_bound",
]

PROB_TOL = 1e-14
DPROB_TOL = 1e-12
SLD_PAIR_TOL = 1e-12
FD_STEP = 1e-6


class DivergentFisherError(ArithmeticError):
    """An outcome has zero probability but nonzero derivative."""


class Observable:
    """Hermitian measurement operator with lazily cached spectral decompositions."""

    def __init__(self, matrix, name=None, grouping_tol=DEFAULT_GROUPING_TOL):
        matrix = np.asarray(matrix, dtype=complex)
        if not is_hermitian(matrix):
            raise ValueError("observable must be Hermitian")
        self.matrix = matrix
        self.name = name
        self.grouping_tol = grouping_tol

    def __repr__(self):
        return f"Observable(name={self.name!r}, dim={self.dim})"

    @property
    def dim(self):
        return self.matrix.shape[0]

    @cached_property
    def grouped(self):
        return hermitian_eig(self.matrix, self.grouping_tol)

    @cached_property
    def per_eigenvector(self):
        return eigenvector_decomposition(self.matrix)

    def decomposition(self, mode="projector"):
        if mode == "projector":
            return self.grouped
        if mode == "eigenvector":
            return self.per_eigenvector
        raise ValueError(f"unknown grouping mode {mode!r}")

    def __add__(self, other):
        return Observable(self.matrix + _matrix(other))


def _matrix(m):
    return m.matrix if isinstance(m, Observable) else np.asarray(m, dtype=complex)


def _as_observable(m):
    return m if isinstance(m, Observable) else Observable(m)


@dataclass(frozen=True)
class FisherResult:
    value: float
    param: str
    grouping_mode: str = "projector"
    excluded_outcomes: int = 0
    observable: str | None = None

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class SldObservable:
    matrix: np.ndarray
    param: str

    def residual(self, rho, drho):
        """Max-abs violation of the flow equation drho = (L rho + rho L) / 2."""
        lr = self.matrix @ rho
        return float(np.max(np.abs(drho - (lr + lr.conj().T) / 2)))

    def bloch(self):
        """Pauli-vector components (2x2 case only)."""
        return np.array([np.trace(self.matrix @ pauli(a)).real / 2 for a in "xyz"])


def outcome_distribution(rho, observable, mode="projector"):
    """
    Probabilities ``Tr(rho P_m)`` for each outcome of ``observable``.

    Returns a list of ``(m, f)`` pairs; tiny negative values from roundoff
    are clamped to zero.
    """
    obs = _as_observable(observable)
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (obs.dim, obs.dim):
        raise ValueError(f"state dimension {rho.shape} does not match observable dimension {obs.dim}")
    out = []
    for m, p in obs.decomposition(mode):
        f = float(np.einsum("ij,ji->", rho, p).real)
        if f < 0 and f >= -1e-12:
            f = 0.0
        out.append((float(m), f))
    return out


def _param_derivative(family, param, derivative, step=FD_STEP):
    if derivative == "analytic":
        return family.derivative(param)
    if derivative == "fd":
        t, p = family.angles.theta0, family.angles.phi0
        dt, dp = (step, 0.0) if param == "theta" else (0.0, step)
        plus = family.evaluate(BlochAngles.unchecked(t + dt, p + dp))
        minus = family.evaluate(BlochAngles.unchecked(t - dt, p - dp))
        return (plus - minus) / (2 * step)
    raise ValueError(f"unknown derivative method {derivative!r}")


def _check_param(param):
    if param not in ("theta", "phi"):
        raise ValueError(f"unknown parameter {param!r}; expected 'theta' or 'phi'")


def fisher_info(family, param, observable, mode="projector", channel=None, derivative="analytic"):
    """
    Classical Fisher information of measuring ``observable`` on the family.

    Parameters
    ----------
    family : StateFamily
    param : {"theta", "phi"}
    observable : Observable or array_like
    mode : {"projector", "eigenvector"}
        Outcomes are eigenvalue groups (default) or individual eigenvectors.
    channel : callable, optional
        Linear, parameter-independent map applied to the state (and hence to
        its derivative) before measurement, e.g. dephasing plus a read pulse.
    derivative : {"analytic", "fd"}
        Source of the state derivative; "fd" uses central differences with
        step ``FD_STEP``.
    """
    _check_param(param)
    obs = _as_observable(observable)
    rho = family.evaluate()
    drho = _param_derivative(family, param, derivative)
    if channel is not None:
        rho, drho = channel(rho), channel(drho)
    if rho.shape != (obs.dim, obs.dim):
        raise ValueError(f"state dimension {rho.shape} does not match observable dimension {obs.dim}")
    total = 0.0
    excluded = 0
    for _, p in obs.decomposition(mode):
        f = float(np.einsum("ij,ji->", rho, p).real)
        df = float(np.einsum("ij,ji->", drho, p).real)
        if f < PROB_TOL:
            if abs(df) < DPROB_TOL:
                excluded += 1
                continue
            raise DivergentFisherError(f"outcome with probability {f:.3g} has derivative {df:.3g}")
        total += df * df / f
    return FisherResult(total, param, mode, excluded, obs.name)


def sld(family, param):
    """Symmetric logarithmic derivative at the family's angles."""
    _check_param(param)
    lam, vecs = np.linalg.eigh(family.evaluate())
    d = vecs.conj().T @ family.derivative(param) @ vecs
    denom = lam[:, None] + lam[None, :]
    keep = denom > SLD_PAIR_TOL
    coeff = np.where(keep, 2 * d / np.where(keep, denom, 1.0), 0.0)
    matrix = vecs @ coeff @ vecs.conj().T
    return SldObservable((matrix + matrix.conj().T) / 2, param)


def qfi_max(family, param):
    """
    Maximum (SLD) quantum Fisher information ``Tr[rho L^2]``.

    Cross-checked against the eigenbasis sum
    ``sum 4 |<i|drho|j>|^2 lambda_i / (lambda_i + lambda_j)^2``.
    """
    _check_param(param)
    rho = family.evaluate()
    lam, vecs = np.linalg.eigh(rho)
    d = vecs.conj().T @ family.derivative(param) @ vecs
    denom = lam[:, None] + lam[None, :]
    keep = denom > SLD_PAIR_TOL
    safe = np.where(keep, denom, 1.0)
    expansion = float(np.sum(np.where(keep, 4 * np.abs(d) ** 2 * lam[:, None] / safe**2, 0.0)))
    coeff = np.where(keep, 2 * d / safe, 0.0)
    L = vecs @ coeff @ vecs.conj().T
    value = float(np.trace(rho @ L @ L).real)
    if abs(value - expansion) > 1e-9 * abs(value) + 1e-18:
        raise ArithmeticError(f"QFI forms disagree: {value!r} vs {expansion!r}")
    return FisherResult(max(value, 0.0), param, "sld")


def biased_observable_theta(theta_b, phi_b, eps=1.0):
    """Polar-sensitive observable pointing along d n / d theta at (theta_b, phi_b)."""
    return eps * np.array(
        [
            [-np.sin(theta_b), np.exp(-1j * phi_b) * np.cos(theta_b)],
            [np.exp(1j * phi_b) * np.cos(theta_b), np.sin(theta_b)],
        ]
    )


def biased_observable_phi(theta_b, phi_b, eps=1.0):
    """Azimuth-sensitive observable pointing along d n / d phi at (theta_b, phi_b)."""
    return eps * np.sin(theta_b) * np.array([[0, -1j * np.exp(-1j * phi_b)], [1j * np.exp(1j * phi_b), 0]])


def _check_eps(eps):
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps={eps} outside [0, 1]")


def _closed_form(eps, num, den):
    # num is an O(1) trigonometric combination, so |num| below roundoff means an exact zero;
    # this also resolves the 0/0 of a pure state read along its own Bloch axis, which carries no information
    if abs(num) < 1e-15 or eps == 0:
        return 0.0
    return float(eps**2 * num**2 / (1 - eps**2 * den**2))


def biased_qfi_theta(theta0, phi0, dtheta0, dphi0, eps):
    """Closed-form polar FI of a single qubit measured with a biased observable."""
    _check_eps(eps)
    big_theta = theta0 + dtheta0
    num = np.cos(dphi0) * np.cos(theta0) * np.cos(big_theta) + np.sin(theta0) * np.sin(big_theta)
    den = np.cos(dphi0) * np.sin(theta0) * np.cos(big_theta) - np.cos(theta0) * np.sin(big_theta)
    return _closed_form(eps, num, den)


def biased_qfi_phi(theta0, phi0, dphi0, eps):
    """Closed-form azimuthal FI; independent of the polar offset."""
    _check_eps(eps)
    s = np.sin(theta0)
    return _closed_form(eps, np.cos(dphi0) * s, np.sin(dphi0) * s)


def quadrature_fi(family, param, mx, my, mode="projector", channel=None):
    """Equal-weight average of the FI of the two quadrature components."""
    fx = fisher_info(family, param, mx, mode, channel).value
    fy = fisher_info(family, param, my, mode, channel).value
    return 0.5 * fx + 0.5 * fy


def dual_qfi(f_theta, f_phi):
    """
    Effective two-parameter information from ``1/F = 1/F_theta + 1/F_phi``.

    The cross term of the full two-parameter Fisher matrix is ignored, as in
    the harmonic combination it implements. Returns 0 if either input is 0.
    """
    f_theta, f_phi = float(f_theta), float(f_phi)
    if f_theta < 0 or f_phi < 0:
        raise ValueError("Fisher information must be nonnegative")
    if f_theta == 0 or f_phi == 0:
        return 0.0
    return f_theta * f_phi / (f_theta + f_phi)


def cramer_rao_bound(f, k=1):
    """Variance lower bound ``1 / (k F)`` for k independent measurements."""
    if not f > 0:
        raise ValueError("Fisher information must be positive")
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")
    return 1.0 / (k * f)
