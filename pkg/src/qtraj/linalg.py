"""Dense complex linear algebra for one q-bit (dim 2) and a q-bit pair (dim 4).

Matrices and vectors are plain ``numpy`` complex arrays.  Joint operators use
the basis order |00>, |01>, |10>, |11> with the system as the left factor and
the probe as the right factor.
"""
from __future__ import annotations

import numpy as np

from .errors import ValidationError

HERMITIAN_TOL = 1e-12

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)

SYSTEM = "system"
PROBE = "probe"


def as_cmat(m, dims=(2, 4), name="matrix") -> np.ndarray:
    """Coerce ``m`` to a square complex array of an allowed dimension."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] not in dims:
        raise ValidationError(f"{name} must be square with dim in {dims}, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} has non-finite entries")
    return a


def as_cvec(v, dims=(2, 4), name="vector") -> np.ndarray:
    a = np.asarray(v, dtype=complex)
    if a.ndim != 1 or a.shape[0] not in dims:
        raise ValidationError(f"{name} must be a vector with dim in {dims}, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} has non-finite entries")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conjugate(np.swapaxes(m, -1, -2))


def max_abs(m) -> float:
    """Max-entry norm, used for every matrix tolerance in the package."""
    return float(np.max(np.abs(m))) if np.size(m) else 0.0


def is_hermitian(m, tol=HERMITIAN_TOL) -> bool:
    return max_abs(m - dagger(m)) <= tol


def is_unitary(m, tol=1e-10) -> bool:
    return max_abs(dagger(m) @ m - np.eye(m.shape[0])) <= tol


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product of two single q-bit operators (system first)."""
    a = as_cmat(a, dims=(2,), name="a")
    b = as_cmat(b, dims=(2,), name="b")
    return np.kron(a, b)


def tensor_vec(a, b) -> np.ndarray:
    """Kronecker product of two single q-bit state vectors."""
    return np.kron(as_cvec(a, dims=(2,)), as_cvec(b, dims=(2,)))


def partial_trace(m, keep=SYSTEM) -> np.ndarray:
    """Trace out one factor of a 4x4 operator.

    ``keep`` selects the surviving factor, ``"system"`` (left) or ``"probe"``.
    """
    m = as_cmat(m, dims=(4,))
    t = m.reshape(2, 2, 2, 2)
    if keep == SYSTEM:
        return np.einsum("ijkj->ik", t)
    if keep == PROBE:
        return np.einsum("ijil->jl", t)
    raise ValidationError(f"keep must be 'system' or 'probe', got {keep!r}")


def probe_element(h, bra, ket) -> np.ndarray:
    """Partial matrix element <bra|_p h |ket>_p, a 2x2 operator on the system.

    With ``h`` a joint operator this gives sum_jk bra_j^* h[(i,j),(l,k)] ket_k.
    """
    t = as_cmat(h, dims=(4,)).reshape(2, 2, 2, 2)
    bra = as_cvec(bra, dims=(2,))
    ket = as_cvec(ket, dims=(2,))
    return np.einsum("j,ijlk,k->il", bra.conj(), t, ket)


def fix_phase(v, tol=1e-12) -> np.ndarray:
    """Rotate the global phase so the first nonzero amplitude is real and >= 0."""
    v = np.asarray(v, dtype=complex)
    for i, x in enumerate(v):
        if abs(x) > tol:
            out = v * (abs(x) / x)
            out[i] = abs(x)
            return out
    return v.copy()


def complement(v) -> np.ndarray:
    """Orthogonal complement of a single q-bit vector (a, b) -> (-b*, a*)."""
    a, b = as_cvec(v, dims=(2,))
    return np.array([-np.conj(b), np.conj(a)])


def eigh2(h) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form eigendecomposition of a 2x2 Hermitian matrix.

    Returns ``(values, vectors)`` with eigenvalues in descending order and
    eigenvectors as columns, each phase-fixed by :func:`fix_phase`.  A
    multiple of the identity returns the computational basis.
    """
    h = as_cmat(h, dims=(2,))
    a, d = h[0, 0].real, h[1, 1].real
    b = h[0, 1]
    mean = 0.5 * (a + d)
    half = 0.5 * (a - d)
    r = float(np.hypot(half, abs(b)))
    if r <= 1e-290:  # exact or subnormal splitting: treat as degenerate
        return np.array([mean, mean]), np.eye(2, dtype=complex)
    # lam - d = r + half and lam - a = r - half; use the one without cancellation
    if half >= 0:
        v = np.array([r + half, np.conj(b)])
    else:
        v = np.array([b, r - half])
    v = v / float(np.max(np.abs(v)))  # rescale first so the norm cannot underflow
    v = v / np.linalg.norm(v)
    w = complement(v)
    vecs = np.column_stack([fix_phase(v), fix_phase(w)])
    return np.array([mean + r, mean - r]), vecs


def eigh(h) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian eigendecomposition, eigenvalues descending."""
    h = as_cmat(h)
    if h.shape[0] == 2:
        return eigh2(h)
    vals, vecs = np.linalg.eigh(h)
    return vals[::-1].copy(), vecs[:, ::-1].copy()


def expm_hermitian(h, theta) -> np.ndarray:
    """exp(-i * theta * h) for Hermitian ``h``, via its eigendecomposition."""
    h = as_cmat(h)
    if not is_hermitian(h):
        raise ValidationError("expm_hermitian requires a Hermitian matrix")
    # symmetrize so LAPACK sees an exactly Hermitian input
    vals, vecs = eigh(0.5 * (h + dagger(h)))
    phases = np.exp(-1j * float(theta) * vals)
    return (vecs * phases) @ dagger(vecs)


def bloch_operator(axis) -> np.ndarray:
    """n . sigma for a real 3-vector ``n``."""
    nx, ny, nz = (float(c) for c in axis)
    return nx * SIGMA_X + ny * SIGMA_Y + nz * SIGMA_Z


def bloch_vector(v) -> np.ndarray:
    """Bloch axis (unit 3-vector) of a normalized single q-bit state."""
    a, b = as_cvec(v, dims=(2,))
    ab = np.conj(a) * b
    return np.array([2 * ab.real, 2 * ab.imag, abs(a) ** 2 - abs(b) ** 2])
