"""Gates, projective measurements and probe-induced generalized measurements.

Randomness never comes from a hidden global generator: every sampling
function takes a uniform draw ``rand`` in [0, 1) and picks outcome ``+``
exactly when ``rand < p_plus``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import DegenerateOutcomeError, ValidationError
from .states import DensityMatrix, PureState, as_density, as_vector

PLUS = "+"
MINUS = "-"
MIN_BRANCH_PROB = 1e-14
AXIS_TOL = 1e-10
COMPLETENESS_TOL = 1e-10

X_AXIS = (1.0, 0.0, 0.0)
Y_AXIS = (0.0, 1.0, 0.0)
Z_AXIS = (0.0, 0.0, 1.0)


def gate_cnot() -> np.ndarray:
    """CNOT with the system (left factor) as control: |ij> -> |i, i xor j>."""
    u = np.zeros((4, 4), dtype=complex)
    for i in (0, 1):
        for j in (0, 1):
            u[2 * i + (i ^ j), 2 * i + j] = 1
    return u


def gate_swap() -> np.ndarray:
    """|ij> -> |ji>."""
    u = np.zeros((4, 4), dtype=complex)
    for i in (0, 1):
        for j in (0, 1):
            u[2 * j + i, 2 * i + j] = 1
    return u


def weak_unitary(h, epsilon) -> np.ndarray:
    """exp(-i epsilon h), computed exactly rather than by series truncation."""
    return linalg.expm_hermitian(linalg.as_cmat(h, dims=(4,), name="hamiltonian"), epsilon)


def check_axis(axis) -> np.ndarray:
    n = np.asarray(axis, dtype=float)
    if n.shape != (3,) or not np.all(np.isfinite(n)):
        raise ValidationError(f"axis must be a real 3-vector, got {axis!r}")
    if abs(np.linalg.norm(n) - 1.0) > AXIS_TOL:
        raise ValidationError(f"axis {axis!r} is not a unit vector")
    return n


def _check_sign(sign):
    if sign not in (PLUS, MINUS):
        raise ValidationError(f"sign must be '+' or '-', got {sign!r}")


@dataclass(frozen=True, eq=False)
class Projector:
    matrix: np.ndarray = field(repr=False)
    bloch_axis: np.ndarray
    sign: str


def projector_from_axis(axis, sign=PLUS) -> Projector:
    """(1 +/- n.sigma)/2 for a unit Bloch axis n."""
    n = check_axis(axis)
    _check_sign(sign)
    s = 1.0 if sign == PLUS else -1.0
    m = 0.5 * (linalg.IDENTITY + s * linalg.bloch_operator(n))
    return Projector(m, n, sign)


def axis_basis(axis) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvectors (|+>, |->) of n.sigma, phase-fixed so the first nonzero
    amplitude is real and non-negative."""
    _, vecs = linalg.eigh2(linalg.bloch_operator(check_axis(axis)))
    return vecs[:, 0], vecs[:, 1]


@dataclass(frozen=True, eq=False)
class MeasurementOutcome:
    sign: str
    probability: float
    post_state: PureState | DensityMatrix


@dataclass(frozen=True, eq=False)
class KrausPair:
    """Two-outcome Kraus operators with A+^dag A+ + A-^dag A- = 1.

    ``provenance`` is a free-form record of how the pair was derived (the
    joint unitary, probe preparation and probe axis), or None.
    """

    a_plus: np.ndarray = field(repr=False)
    a_minus: np.ndarray = field(repr=False)
    provenance: dict | None = field(default=None, repr=False)

    def __post_init__(self):
        ap = linalg.as_cmat(self.a_plus, dims=(2,), name="a_plus")
        am = linalg.as_cmat(self.a_minus, dims=(2,), name="a_minus")
        err = completeness_error(ap, am)
        if err > COMPLETENESS_TOL:
            raise ValidationError(f"Kraus pair violates completeness by {err:.3e}")
        for name, a in (("a_plus", ap), ("a_minus", am)):
            a = a.copy()
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @classmethod
    def identity(cls) -> "KrausPair":
        return cls(linalg.IDENTITY, np.zeros((2, 2), dtype=complex))

    def operator(self, sign) -> np.ndarray:
        _check_sign(sign)
        return self.a_plus if sign == PLUS else self.a_minus

    def p_plus(self, rho) -> float:
        """Born probability of outcome '+' for a density matrix or state vector."""
        a = self.a_plus
        if isinstance(rho, (PureState, DensityMatrix)):
            rho = rho.amplitudes if isinstance(rho, PureState) else rho.matrix
        if np.ndim(rho) == 1:
            v = a @ rho
            return float(np.real(np.vdot(v, v)))
        return float(np.real(np.trace(a @ rho @ linalg.dagger(a))))


def completeness_error(a_plus, a_minus) -> float:
    total = linalg.dagger(a_plus) @ a_plus + linalg.dagger(a_minus) @ a_minus
    return linalg.max_abs(total - linalg.IDENTITY)


def kraus_from_probe(u, probe_prep, probe_axis) -> KrausPair:
    """Kraus pair A_+/- = <+/-|_p U |phi0>_p induced by measuring the probe.

    ``probe_prep`` must be a pure state; a mixed probe would need more than two
    Kraus operators and is rejected.
    """
    u = linalg.as_cmat(u, dims=(4,), name="unitary")
    if not linalg.is_unitary(u):
        raise ValidationError("interaction matrix is not unitary")
    if isinstance(probe_prep, DensityMatrix):
        raise ValidationError("mixed probe preparations are not supported; pass a PureState")
    phi0 = as_vector(probe_prep)
    if phi0.shape != (2,) or abs(np.linalg.norm(phi0) - 1.0) > 1e-10:
        raise ValidationError("probe preparation must be a normalized single q-bit state")
    plus, minus = axis_basis(probe_axis)
    return KrausPair(
        linalg.probe_element(u, plus, phi0),
        linalg.probe_element(u, minus, phi0),
        provenance={"unitary": u, "probe_prep": phi0, "probe_axis": check_axis(probe_axis)},
    )


def _select(p_plus, rand):
    p_plus = min(max(p_plus, 0.0), 1.0)
    if rand < p_plus:
        return PLUS, p_plus
    return MINUS, 1.0 - p_plus


def _branch(state, op, prob):
    """Renormalized post-measurement state; pure in, pure out."""
    if prob < MIN_BRANCH_PROB:
        raise DegenerateOutcomeError(f"selected outcome has probability {prob:.3e}")
    if isinstance(state, PureState):
        return PureState.normalized(op @ state.amplitudes)
    rho = op @ state.matrix @ linalg.dagger(op)
    rho = 0.5 * (rho + linalg.dagger(rho))
    return DensityMatrix(rho / np.real(np.trace(rho)))


def projective_measure(state, axis, rand) -> MeasurementOutcome:
    """Projective measurement along a Bloch axis with a caller-supplied uniform draw."""
    plus = projector_from_axis(axis, PLUS)
    if not isinstance(state, PureState):
        state = as_density(state)
    rho = state.projector() if isinstance(state, PureState) else state.matrix
    sign, prob = _select(float(np.real(np.trace(plus.matrix @ rho))), rand)
    op = plus.matrix if sign == PLUS else linalg.IDENTITY - plus.matrix
    return MeasurementOutcome(sign, prob, _branch(state, op, prob))


def generalized_measure(state, kraus: KrausPair, rand) -> MeasurementOutcome:
    """Sample one outcome of a two-outcome generalized measurement.

    A ``PureState`` input takes the vector fast path and yields a
    ``PureState``; anything else is handled as a density matrix.
    """
    if not isinstance(state, PureState):
        state = as_density(state)
    raw = state.amplitudes if isinstance(state, PureState) else state.matrix
    sign, prob = _select(kraus.p_plus(raw), rand)
    return MeasurementOutcome(sign, prob, _branch(state, kraus.operator(sign), prob))


def outcome_probabilities(state, kraus: KrausPair) -> tuple[float, float]:
    raw = state.amplitudes if isinstance(state, PureState) else as_density(state).matrix
    p = kraus.p_plus(raw)
    return p, 1.0 - p


def probe_probabilities(joint, axis) -> tuple[float, float]:
    """Outcome probabilities for measuring only the probe of a joint pure state."""
    plus = projector_from_axis(axis, PLUS).matrix
    psi = as_vector(joint)
    v = np.kron(linalg.IDENTITY, plus) @ psi
    p = float(np.real(np.vdot(v, v)))
    return p, 1.0 - p
