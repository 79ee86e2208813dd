"""
Target-qubit state tomography.

Without ancillas the Bloch vector is read in two experiments (a transverse
quadrature read-out, then a z read-out after dephasing and a read pulse).
With a precorrelated star register, a tomography unitary ``U_T`` maps the
antiphase order onto transverse ancilla magnetization, and the four
intensities ``Tr[rho M_qa]`` (q in {0, 1}, a in {x, y}) give a linear system
``A s = intensities`` for the target Bloch vector ``s``.
"""

from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from .qcore import (
    collective_ancilla_op,
    dephase_target,
    embed_target,
    hermitian_eig,
    pauli,
    rotate_target,
    rotation_unitary,
)
from .states import (
    BlochAngles,
    StrConfig,
    deviation_from_vector,
)

__all__ = [
    "RANK_TOL",
    "N_CIRCUIT_PARAMS",
    "IndeterminateStateError",
    "RankDeficientError",
    "OptimizerBudgetError",
    "TomographyUnitary",
    "ConstraintSystem",
    "QstResult",
    "OptimizerConfig",
    "correlation",
    "angles_from_bloch",
    "single_qubit_qst",
    "circuit_unitary",
    "identity_unitary",
    "ancilla_observables",
    "summed_quadrature_observables",
    "measure_intensities",
    "constraint_matrix",
    "probe_directions",
    "quadrature_signal",
    "optimize_ut",
    "str_qst",
    "expected_angle_error",
    "calibrate_noise",
]

RANK_TOL = 1e-8
N_CIRCUIT_PARAMS = 10
log = logging.getLogger(__name__)


class IndeterminateStateError(ValueError):
    pass


class RankDeficientError(ArithmeticError):
    pass


class OptimizerBudgetError(RuntimeError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


def correlation(sigma_exp, sigma_expected):
    """Normalized Hilbert-Schmidt overlap of two deviation matrices."""
    a = np.asarray(sigma_exp, dtype=complex)
    b = np.asarray(sigma_expected, dtype=complex)
    if a.shape != b.shape:
        raise ValueError("deviation matrices must have the same shape")
    na = np.trace(a @ a).real
    nb = np.trace(b @ b).real
    if na <= 0 or nb <= 0:
        raise ValueError("deviation matrices must be nonzero")
    c = np.trace(a @ b).real / np.sqrt(na * nb)
    return float(np.clip(c, -1.0, 1.0))


@dataclass(frozen=True)
class QstResult:
    bloch: np.ndarray
    angles: BlochAngles | None
    correlation: float | None
    residual: float
    norm: float
    indeterminate: bool = False

    def to_dict(self):
        return {
            "bloch": [float(x) for x in self.bloch],
            "theta0": None if self.angles is None else self.angles.theta0,
            "phi0": None if self.angles is None else self.angles.phi0,
            "correlation": self.correlation,
            "residual": self.residual,
            "norm": self.norm,
            "indeterminate": self.indeterminate,
        }


def angles_from_bloch(s, tol=1e-15):
    s = np.asarray(s, dtype=float)
    norm = float(np.linalg.norm(s))
    if norm <= tol:
        raise IndeterminateStateError("zero Bloch vector; direction undefined")
    theta = float(np.arccos(np.clip(s[2] / norm, -1.0, 1.0)))
    phi = float(np.arctan2(s[1], s[0]))
    return BlochAngles(theta, phi)


def _qst_result(s, expected, residual, scale):
    norm = float(np.linalg.norm(s))
    if norm <= 1e-12 * max(scale, 1e-300):
        return QstResult(np.asarray(s, dtype=float), None, None, residual, norm, indeterminate=True)
    angles = angles_from_bloch(s)
    c = None
    if expected is not None:
        c = correlation(deviation_from_vector(s), deviation_from_vector(expected))
    return QstResult(np.asarray(s, dtype=float), angles, c, residual, norm)


def single_qubit_qst(rho, expected=None):
    """
    Two-experiment tomography of a single qubit.

    Experiment (i) reads the transverse quadrature ``<I_x> + i<I_y>``;
    experiment (ii) dephases, applies a (pi/2)_y read pulse, and reads ``<I_x>``,
    which then carries the original z component.

    Parameters
    ----------
    rho : (2, 2) array
    expected : 3-vector, optional
        Expected Bloch direction, used only to report the correlation.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError("single_qubit_qst expects a 2x2 density matrix")
    ix, iy = pauli("x") / 2, pauli("y") / 2
    mx = np.trace(rho @ ix).real
    my = np.trace(rho @ iy).real
    read = rotate_target(dephase_target(rho), np.pi / 2, np.pi / 2)
    mz = np.trace(read @ ix).real
    # <I_a> = eps * n_a / 2, so 2 <I_a> is the deviation Bloch vector
    s = 2 * np.array([mx, my, mz])
    return _qst_result(s, expected, 0.0, 1.0)


def _ancilla_rotation(n_qubits, angle, phase):
    u1 = rotation_unitary(angle, phase)
    u = np.eye(1, dtype=complex)
    for _ in range(n_qubits - 1):
        u = np.kron(u, u1)
    return np.kron(np.eye(2), u)


def _coupling_evolution(n_qubits, duration):
    # exp(-i pi J t sum_j 2 I_1z I_jz) with duration t measured in units of 1/J
    h = 2 * np.diag(embed_target(pauli("z") / 2, n_qubits) @ collective_ancilla_op(n_qubits, "z")).real
    return np.diag(np.exp(-1j * np.pi * duration * h))


def circuit_unitary(n_qubits, params):
    """
    Tomography circuit for a star register.

    ``params`` holds two blocks of five numbers: collective ancilla rotation
    (angle, phase), a free-evolution duration under the target-ancilla
    coupling in units of 1/J, and a target rotation (angle, phase). Blocks
    are applied in order. The target rotation closes each block because a
    leading one would only relabel the unknown Bloch vector.
    """
    params = np.asarray(params, dtype=float)
    if params.shape != (N_CIRCUIT_PARAMS,):
        raise ValueError(f"expected {N_CIRCUIT_PARAMS} circuit parameters, got {params.shape}")
    u = np.eye(2**n_qubits, dtype=complex)
    for a_angle, a_phase, duration, t_angle, t_phase in params.reshape(2, 5):
        u = _ancilla_rotation(n_qubits, a_angle, a_phase) @ u
        u = _coupling_evolution(n_qubits, duration) @ u
        u = embed_target(rotation_unitary(t_angle, t_phase), n_qubits) @ u
    return u


@dataclass(frozen=True)
class TomographyUnitary:
    n_qubits: int
    parameters: np.ndarray | None
    matrix: np.ndarray
    constraint_norm: float = float("nan")
    condition_number: float = float("nan")

    @classmethod
    def from_parameters(cls, n_qubits, params, config=None):
        params = np.asarray(params, dtype=float)
        ut = cls(n_qubits, params, circuit_unitary(n_qubits, params))
        cs = constraint_matrix(config or StrConfig(n_qubits), ut)
        return cls(n_qubits, params, ut.matrix, cs.norm, cs.condition_number)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def unitarity_error(self):
        return float(np.max(np.abs(self.matrix @ self.matrix.conj().T - np.eye(self.dim))))

    def to_dict(self):
        return {
            "n_qubits": self.n_qubits,
            "parameters": None if self.parameters is None else [float(x) for x in self.parameters],
            "constraint_norm": self.constraint_norm,
            "condition_number": self.condition_number,
        }

    @classmethod
    def from_dict(cls, data, config=None):
        return cls.from_parameters(int(data["n_qubits"]), data["parameters"], config)


def identity_unitary(n_qubits):
    return TomographyUnitary(n_qubits, None, np.eye(2**n_qubits, dtype=complex))


def ancilla_observables(n_qubits, ut):
    """
    The four read-out observables ``M_qa = U^dag (|q><q| (x) 1) S_a U``.

    Returned in the order (0x, 0y, 1x, 1y), where ``S_a`` is the collective
    ancilla spin component.
    """
    if n_qubits < 2:
        raise ValueError("need at least one ancilla")
    u = ut.matrix if isinstance(ut, TomographyUnitary) else np.asarray(ut, dtype=complex)
    out = []
    for q in (0, 1):
        proj = np.zeros((2, 2), dtype=complex)
        proj[q, q] = 1
        pq = embed_target(proj, n_qubits)
        for axis in ("x", "y"):
            iq = pq @ collective_ancilla_op(n_qubits, axis)
            m = u.conj().T @ iq @ u
            out.append((m + m.conj().T) / 2)
    return out


def summed_quadrature_observables(n_qubits, ut):
    """``(sum_q M_qx, sum_q M_qy)``: the two quadrature channels of the read-out."""
    m = ancilla_observables(n_qubits, ut)
    return m[0] + m[2], m[1] + m[3]


def measure_intensities(rho, observables, noise_sigma=0.0, rng=None):
    """``Tr[rho M_i]`` for each observable, plus optional Gaussian noise."""
    rho = np.asarray(rho, dtype=complex)
    vals = []
    for m in observables:
        m = np.asarray(m)
        if m.shape != rho.shape:
            raise ValueError("observable and state dimensions differ")
        vals.append(np.einsum("ij,ji->", rho, m).real)
    vals = np.array(vals, dtype=float)
    if noise_sigma:
        if rng is None or isinstance(rng, (int, np.integer)):
            rng = np.random.default_rng(rng)
        vals = vals + rng.normal(0.0, noise_sigma, size=vals.shape)
    return vals


@dataclass(frozen=True)
class ConstraintSystem:
    """Linear measurement model ``intensities = matrix @ s + offsets``."""

    matrix: np.ndarray
    offsets: np.ndarray

    @property
    def singular_values(self):
        return np.linalg.svd(self.matrix, compute_uv=False)

    @property
    def rank(self):
        sv = self.singular_values
        if sv[0] == 0:
            return 0
        return int(np.sum(sv > RANK_TOL * sv[0]))

    @property
    def condition_number(self):
        sv = self.singular_values
        if self.rank < 3:
            return float("inf")
        return float(sv[0] / sv[-1])

    @property
    def norm(self):
        return float(np.linalg.norm(self.matrix))

    def solve(self, intensities):
        """Least squares via the normal equations; refuses rank-deficient systems."""
        if self.rank < 3:
            raise RankDeficientError(f"constraint matrix has rank {self.rank} < 3")
        a = self.matrix
        b = np.asarray(intensities, dtype=float) - self.offsets
        s = np.linalg.solve(a.T @ a, a.T @ b)
        return s, float(np.linalg.norm(a @ s - b))


def constraint_matrix(config, ut):
    """
    Columns are the intensities produced by the deviations ``sigma_x``,
    ``sigma_y``, ``sigma_z`` placed in the correlated register state.
    """
    n = config.n_qubits
    obs = ancilla_observables(n, ut)
    sz = collective_ancilla_op(n, "z")
    cols = []
    for axis in "xyz":
        dev = config.eps_aN * embed_target(pauli(axis), n) @ sz
        cols.append(measure_intensities(dev, obs))
    offsets = measure_intensities(np.eye(config.dim) / config.dim, obs)
    return ConstraintSystem(np.column_stack(cols), offsets)


@dataclass(frozen=True)
class OptimizerConfig:
    population: int = 64
    generations: int = 200
    tournament: int = 4
    elitism: int = 2
    mutation_sigma: float = 0.5
    mutation_decay: float = 0.98
    crossover_rate: float = 0.9
    seed: int = 20180301
    threads: int | None = None
    # fitness = (norm / cond) * signal ** signal_weight
    signal_weight: float = 2.0
    probe_directions: int = 32

    def digest(self):
        payload = {k: v for k, v in asdict(self).items() if k != "threads"}
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:12]


# angles live in [0, 2 pi), durations in units of 1/J in [0, 1)
_PERIODS = np.array([2 * np.pi, 2 * np.pi, 1.0, 2 * np.pi, 2 * np.pi] * 2)


@lru_cache(maxsize=16)
def _readout_model(n_qubits):
    """Fixed operators shared by every candidate circuit on ``n_qubits``."""
    sz = collective_ancilla_op(n_qubits, "z")
    deviations = np.array([embed_target(pauli(a), n_qubits) @ sz for a in "xyz"])
    readouts = np.array([m for m in ancilla_observables(n_qubits, np.eye(2**n_qubits))])
    channels = []
    for axis in ("x", "y"):
        dec = hermitian_eig(collective_ancilla_op(n_qubits, axis))
        channels.append((np.array(dec.projectors), dec.multiplicities.astype(float)))
    return deviations, readouts, channels


def probe_directions(count):
    """Near-uniform unit vectors on the sphere (Fibonacci lattice)."""
    k = np.arange(count) + 0.5
    theta = np.arccos(1 - 2 * k / count)
    phi = np.mod(np.pi * (1 + np.sqrt(5.0)) * k, 2 * np.pi)
    return theta, phi


def quadrature_signal(config, ut, directions=32, small_purity_limit=False):
    """
    Dual-parameter quadrature Fisher information of the correlated register,
    in units of ``eps_a1**2``, for each probe direction.

    The read-out channels are ``sum_q M_qx`` and ``sum_q M_qy``; outcome
    probabilities are affine in the Bloch vector, so each direction costs only
    a few dot products.

    Parameters
    ----------
    directions : int or (theta array, phi array)
    small_purity_limit : bool
        Drop the purity-dependent part of the outcome probabilities, giving
        the leading-order value, which does not depend on purity at all.
    """
    n = config.n_qubits
    u = ut.matrix if isinstance(ut, TomographyUnitary) else np.asarray(ut)
    theta, phi = probe_directions(directions) if np.isscalar(directions) else map(np.asarray, directions)
    nvec = np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=1)
    d_theta = np.stack([np.cos(theta) * np.cos(phi), np.cos(theta) * np.sin(phi), -np.sin(theta)], axis=1)
    d_phi = np.stack([-np.sin(theta) * np.sin(phi), np.sin(theta) * np.cos(phi), np.zeros_like(theta)], axis=1)
    deviations, _, channels = _readout_model(n)
    rotated = u @ deviations @ u.conj().T
    eps = config.eps_aN
    f_theta = np.zeros(len(nvec))
    f_phi = np.zeros(len(nvec))
    for projectors, mult in channels:
        t = np.einsum("kij,mji->km", rotated, projectors).real
        f = mult[None, :] / config.dim
        if not small_purity_limit:
            f = f + eps * nvec @ t
        f_theta += 0.5 * np.sum((eps * d_theta @ t) ** 2 / f, axis=1)
        f_phi += 0.5 * np.sum((eps * d_phi @ t) ** 2 / f, axis=1)
    total = f_theta + f_phi
    dual = np.divide(f_theta * f_phi, total, out=np.zeros_like(total), where=total > 0)
    return dual / config.eps_a1**2


def _constraint_fast(config, u):
    deviations, readouts, _ = _readout_model(config.n_qubits)
    rotated = u @ deviations @ u.conj().T
    a = config.eps_aN * np.einsum("kij,qji->qk", rotated, readouts).real
    return ConstraintSystem(a, np.zeros(len(readouts)))


def _fitness(config, params, opt):
    u = circuit_unitary(config.n_qubits, params)
    cs = _constraint_fast(config, u)
    if cs.rank < 3:
        return 0.0, cs
    # norm in units of eps_aN so the fitness does not depend on purity
    score = cs.norm / config.eps_aN / cs.condition_number
    if opt.signal_weight:
        score *= float(np.mean(quadrature_signal(config, u, opt.probe_directions, small_purity_limit=True))) ** opt.signal_weight
    return score, cs


def optimize_ut(config, opt=None):
    """
    Genetic search over circuit parameters for a well-conditioned,
    high-signal constraint matrix.

    Fitness is ``||A||_F / cond(A)`` (norm in units of ``eps_aN``) times the
    mean quadrature signal over probe directions raised to
    ``opt.signal_weight``. Tournament selection, uniform crossover, Gaussian
    mutation with a geometrically decaying width, and elitism. All random
    draws happen in the calling thread, so the result does not depend on the
    thread count.

    Raises
    ------
    OptimizerBudgetError
        If no candidate reaches rank 3.
    """
    opt = opt or OptimizerConfig()
    rng = np.random.default_rng(opt.seed)
    pop = rng.uniform(0, 1, size=(opt.population, N_CIRCUIT_PARAMS)) * _PERIODS

    def evaluate(population):
        if opt.threads == 1:
            return np.array([_fitness(config, p, opt)[0] for p in population])
        with ThreadPoolExecutor(max_workers=opt.threads) as pool:
            return np.array(list(pool.map(lambda p: _fitness(config, p, opt)[0], population)))

    fit = evaluate(pop)
    sigma = opt.mutation_sigma
    for gen in range(opt.generations):
        order = np.argsort(-fit, kind="stable")
        children = [pop[i].copy() for i in order[: opt.elitism]]
        while len(children) < opt.population:
            parents = []
            for _ in range(2):
                contenders = rng.choice(opt.population, size=opt.tournament, replace=False)
                parents.append(pop[contenders[np.argmax(fit[contenders])]])
            if rng.random() < opt.crossover_rate:
                mask = rng.random(N_CIRCUIT_PARAMS) < 0.5
                child = np.where(mask, parents[0], parents[1])
            else:
                child = parents[0].copy()
            child = child + rng.normal(0, sigma, N_CIRCUIT_PARAMS) * _PERIODS / (2 * np.pi)
            children.append(np.mod(child, _PERIODS))
        pop = np.array(children)
        fit = evaluate(pop)
        sigma *= opt.mutation_decay
        if gen % 50 == 0:
            log.debug("generation %d best fitness %.6g", gen, fit.max())
    best = pop[int(np.argmax(fit))]
    score, _ = _fitness(config, best, opt)
    if score <= 0:
        raise OptimizerBudgetError(f"no rank-3 constraint matrix after {opt.generations} generations", best=best)
    return TomographyUnitary.from_parameters(config.n_qubits, best, config)


def str_qst(rho, ut, config, expected=None, noise_sigma=0.0, rng=None):
    """
    Single-shot tomography of the target from the four ancilla intensities.

    ``noise_sigma`` is the standard deviation of additive Gaussian noise on
    each intensity, in units of the RMS entry of the constraint matrix.
    """
    cs = constraint_matrix(config, ut)
    if cs.rank < 3:
        raise RankDeficientError(f"constraint matrix has rank {cs.rank} < 3")
    scale = cs.norm / np.sqrt(cs.matrix.size)
    intensities = measure_intensities(rho, ancilla_observables(config.n_qubits, ut), noise_sigma * scale, rng)
    s, residual = cs.solve(intensities)
    return _qst_result(s, expected, residual / scale, 1.0)


def expected_angle_error(cs, noise_sigma):
    """Mean ``1 - C`` to leading order for relative intensity noise ``noise_sigma``."""
    scale = cs.norm / np.sqrt(cs.matrix.size)
    cov = np.linalg.inv(cs.matrix.T @ cs.matrix) * (noise_sigma * scale) ** 2
    # two of three error directions are transverse to a unit Bloch vector
    return float(np.trace(cov) / 3)


def calibrate_noise(cs, target_c):
    """Relative noise level whose expected correlation is ``target_c``."""
    if not 0 < target_c < 1:
        raise ValueError("target correlation must lie in (0, 1)")
    unit = expected_angle_error(cs, 1.0)
    return float(np.sqrt((1 - target_c) / unit))
