"""Entropy and information bookkeeping, all in bits."""
from __future__ import annotations

import math
from dataclasses import astuple, dataclass, fields

import numpy as np

from . import linalg, seeding
from .errors import InvariantViolation, ValidationError
from .measure import MINUS, PLUS, X_AXIS, Z_AXIS, KrausPair, projective_measure, projector_from_axis
from .states import PureState, as_density, as_vector, reduced_states

EIG_CLAMP = 1e-10


@dataclass(frozen=True)
class InfoLedgerEntry:
    step: int
    shannon_bits: float
    info_gain_bits: float
    entanglement_bits: float
    vn_entropy_bits: float


LEDGER_COLUMNS = tuple(f.name for f in fields(InfoLedgerEntry))


def _h(p):
    return 0.0 if p <= 0.0 else -p * math.log2(p)


def shannon_entropy(p_plus) -> float:
    """Binary Shannon entropy with 0 log 0 = 0."""
    p = float(p_plus)
    if not (-1e-12 <= p <= 1.0 + 1e-12):
        raise ValidationError(f"probability {p!r} outside [0, 1]")
    p = min(max(p, 0.0), 1.0)
    return _h(p) + _h(1.0 - p)


def shannon_array(p_plus) -> np.ndarray:
    """Elementwise binary entropy of an array of probabilities."""
    p = np.clip(np.asarray(p_plus, dtype=float), 0.0, 1.0)
    out = np.zeros_like(p)
    for q in (p, 1.0 - p):
        pos = q > 0
        out[pos] -= q[pos] * np.log2(q[pos])
    return out


def eigenvalues(rho) -> np.ndarray:
    m = rho.matrix if hasattr(rho, "matrix") else linalg.as_cmat(rho)
    if m.shape[0] == 2:
        return linalg.eigh2(m)[0]
    return np.linalg.eigvalsh(m)[::-1]


def von_neumann_entropy(rho) -> float:
    """-Tr(rho log2 rho).  Eigenvalues in [-1e-10, 0] count as zero."""
    vals = eigenvalues(rho)
    if np.min(vals) < -EIG_CLAMP:
        raise InvariantViolation("positivity", f"eigenvalue {np.min(vals):.3e} below -{EIG_CLAMP}")
    return max(0.0, sum(_h(float(v)) for v in vals))


def entanglement_entropy(joint) -> float:
    """Entropy of entanglement of a joint pure state.

    Computed from both reduced states; a mismatch beyond 1e-10 means the
    input was not a pure joint state.
    """
    rho_s, rho_p = reduced_states(as_vector(joint))
    s_sys = von_neumann_entropy(rho_s)
    s_probe = von_neumann_entropy(rho_p)
    if abs(s_sys - s_probe) > 1e-10:
        raise InvariantViolation("entropy symmetry", f"S(rho_s)={s_sys} but S(rho_p)={s_probe}")
    return s_sys


def probe_entropy(state, u, probe_prep) -> float:
    """Entropy the probe carries away after interacting with ``state`` via ``u``.

    For a pure system state this is the entanglement entropy of U|psi>|phi0>.
    """
    rho = as_density(state).matrix
    phi0 = as_vector(probe_prep)
    joint = u @ np.kron(rho, np.outer(phi0, phi0.conj())) @ linalg.dagger(u)
    return von_neumann_entropy(linalg.partial_trace(joint, linalg.PROBE))


def info_gain(rho_before, kraus: KrausPair) -> float:
    """Average entropy decrease S(rho) - sum_k p_k S(rho_k) from one measurement."""
    rho = as_density(rho_before).matrix
    gain = von_neumann_entropy(rho)
    for a in (kraus.a_plus, kraus.a_minus):
        branch = a @ rho @ linalg.dagger(a)
        p = float(np.real(np.trace(branch)))
        if p >= 1e-14:
            gain -= p * von_neumann_entropy(branch / p)
    return gain


def projective_pair(axis) -> KrausPair:
    """The projectors P+/- of a Bloch axis viewed as a Kraus pair."""
    return KrausPair(projector_from_axis(axis, PLUS).matrix, projector_from_axis(axis, MINUS).matrix)


def iter_randomness_pump(n_steps, seed=0):
    """Yield ``(entry, outcome)`` for alternating z/x measurements on |+>.

    Each ``outcome`` is a MeasurementOutcome whose ``post_state`` is the pure
    state after that step.  Entanglement is recorded as zero: the
    measurements act directly on the q-bit, with no probe involved.
    """
    if n_steps < 1:
        raise ValidationError("n_steps must be >= 1")
    state = PureState(np.array([1.0, 1.0]) / math.sqrt(2.0), label="+")
    draws = seeding.stream(seed).random(n_steps)
    for step in range(n_steps):
        axis = Z_AXIS if step % 2 == 0 else X_AXIS
        out = projective_measure(state, axis, draws[step])
        p_plus = out.probability if out.sign == PLUS else 1.0 - out.probability
        entry = InfoLedgerEntry(
            step=step + 1,
            shannon_bits=shannon_entropy(p_plus),
            info_gain_bits=info_gain(state, projective_pair(axis)),
            entanglement_bits=0.0,
            vn_entropy_bits=von_neumann_entropy(as_density(out.post_state)),
        )
        yield entry, out
        state = out.post_state


def randomness_pump(n_steps, seed=0) -> list[InfoLedgerEntry]:
    """Ledger of ``n_steps`` alternating z/x measurements starting from |+>."""
    return [entry for entry, _ in iter_randomness_pump(n_steps, seed)]


def ledger_rows(entries):
    return [astuple(e) for e in entries]
