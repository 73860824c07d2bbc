"""Pure, mixed and joint q-bit states, plus Schmidt decomposition."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import ValidationError

NORM_TOL = 1e-10


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized state vector of the system (dim 2) or system+probe (dim 4).

    ``renormalized`` records that the constructor had to rescale the input
    because its norm was off by more than ``NORM_TOL``.
    """

    amplitudes: np.ndarray
    label: str | None = None
    renormalized: bool = False

    def __post_init__(self):
        amps = linalg.as_cvec(self.amplitudes, name="amplitudes")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValidationError(f"state norm is {norm!r}; use PureState.normalized() to rescale")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def normalized(cls, amplitudes, label=None) -> "PureState":
        """Build a state from any nonzero vector, flagging visible rescaling.

        Drift below ``NORM_TOL`` is removed silently.
        """
        amps = linalg.as_cvec(amplitudes, name="amplitudes")
        norm = float(np.linalg.norm(amps))
        if norm == 0.0:
            raise ValidationError("cannot normalize the zero vector")
        return cls(amps / norm, label=label, renormalized=abs(norm - 1.0) > NORM_TOL)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def to_json(self):
        return [[float(a.real), float(a.imag)] for a in self.amplitudes]


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix (dim 2 or 4)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = linalg.as_cmat(self.matrix, name="density matrix")
        if not linalg.is_hermitian(m, NORM_TOL):
            raise ValidationError("density matrix is not Hermitian")
        tr = np.trace(m)
        if abs(tr - 1.0) > NORM_TOL:
            raise ValidationError(f"density matrix trace is {tr!r}")
        if np.min(np.linalg.eigvalsh(m)) < -NORM_TOL:
            raise ValidationError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


@dataclass(frozen=True, eq=False)
class SchmidtForm:
    """sqrt(p_plus)|+>_s|+>_p + sqrt(p_minus)|->_s|->_p.

    Basis vectors are stored as columns: ``system_basis[:, 0]`` is |+>_s.
    """

    p_plus: float
    p_minus: float
    system_basis: np.ndarray = field(repr=False)
    probe_basis: np.ndarray = field(repr=False)

    def reconstruct(self) -> np.ndarray:
        s, p = self.system_basis, self.probe_basis
        return (np.sqrt(self.p_plus) * np.kron(s[:, 0], p[:, 0])
                + np.sqrt(self.p_minus) * np.kron(s[:, 1], p[:, 1]))


def pure_from_amplitudes(alpha, beta) -> PureState:
    """Single q-bit state alpha|0> + beta|1>, normalized if necessary."""
    return PureState.normalized([alpha, beta])


def joint_state(system, probe) -> PureState:
    """Product state system (x) probe."""
    return PureState(np.kron(as_vector(system), as_vector(probe)))


def as_vector(s) -> np.ndarray:
    return s.amplitudes if isinstance(s, PureState) else linalg.as_cvec(s)


def as_density(s) -> DensityMatrix:
    """Accept a PureState, DensityMatrix, vector or matrix and return a DensityMatrix."""
    if isinstance(s, DensityMatrix):
        return s
    if isinstance(s, PureState):
        return density_from_pure(s)
    a = np.asarray(s, dtype=complex)
    if a.ndim == 1:
        return density_from_pure(PureState(a))
    return DensityMatrix(a)


def density_from_pure(s: PureState) -> DensityMatrix:
    return DensityMatrix(s.projector())


def maximally_mixed(dim=2) -> DensityMatrix:
    if dim not in (2, 4):
        raise ValidationError(f"dim must be 2 or 4, got {dim}")
    return DensityMatrix(np.eye(dim, dtype=complex) / dim)


def reduced_states(joint) -> tuple[np.ndarray, np.ndarray]:
    """(rho_system, rho_probe) of a joint pure state."""
    proj = np.outer(as_vector(joint), as_vector(joint).conj())
    return linalg.partial_trace(proj, linalg.SYSTEM), linalg.partial_trace(proj, linalg.PROBE)


def schmidt_decompose(joint) -> SchmidtForm:
    """Schmidt form of a normalized joint pure state.

    The system basis is the eigenbasis of the reduced system state (descending,
    phase-fixed).  The first probe vector is the normalized projection of the
    joint state onto |+>_s; the second is its complement, phased so that the
    second coefficient is real and non-negative (phase-fixed if it vanishes).
    """
    psi = as_vector(joint)
    if psi.shape[0] != 4:
        raise ValidationError("schmidt_decompose needs a joint (dim 4) state")
    rho_s, _ = reduced_states(psi)
    vals, sys_vecs = linalg.eigh2(rho_s)
    vals = np.clip(vals, 0.0, 1.0)
    m = psi.reshape(2, 2)
    first = sys_vecs[:, 0].conj() @ m
    first = first / np.linalg.norm(first)
    second = linalg.complement(first)
    overlap = np.vdot(second, sys_vecs[:, 1].conj() @ m)
    if abs(overlap) > 1e-12:
        second = second * (overlap / abs(overlap))
    else:
        second = linalg.fix_phase(second)
    p_plus = float(vals[0] / vals.sum())
    return SchmidtForm(p_plus, 1.0 - p_plus, sys_vecs, np.column_stack([first, second]))
