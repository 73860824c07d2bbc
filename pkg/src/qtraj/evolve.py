"""Repeated-interaction dynamics of one q-bit.

Three views of the same process live here:

* the averaged channel rho -> sum_k A_k rho A_k^dag, iterated once per probe;
* its weak-coupling limit, a Lindblad master equation integrated with RK4;
* stochastic pure-state trajectories obtained by measuring every probe.

Trajectories use the exact per-step Kraus operators.  Under z-axis probe
readout of the sigma_z (x) sigma_x interaction this gives quantum jumps with
probability sin^2(eps) ~ eps^2 per step; under x-axis readout it gives the
diffusive kicks exp(-/+ i eps sigma_z), the discrete form of dW = +/- sqrt(dt).
Averaging either ensemble reproduces the channel with no time-step error.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import linalg, seeding
from .errors import DegenerateOutcomeError, InvariantViolation, ValidationError
from .info import InfoLedgerEntry, shannon_entropy, von_neumann_entropy
from .measure import (MIN_BRANCH_PROB, X_AXIS, Z_AXIS, KrausPair, kraus_from_probe,
                      weak_unitary)
from .states import DensityMatrix, PureState, as_density, as_vector

EXACT = "exact"
JUMP = "jump"
DIFFUSION = "diffusion"
UNRAVELINGS = (EXACT, JUMP, DIFFUSION)

STATE_NORM_TOL = 1e-8
TRACE_DRIFT_TOL = 1e-10
MAX_GENERATOR_STEP = 0.1


@dataclass(frozen=True, eq=False)
class InteractionSpec:
    """A stream of identical probes, each coupled once through exp(-i eps H).

    ``delta_t`` is the (deterministic) spacing between probe arrivals.
    """

    hamiltonian: np.ndarray = field(repr=False)
    epsilon: float
    delta_t: float = 1.0
    probe_prep: PureState = field(default_factory=lambda: PureState([1, 0]))

    def __post_init__(self):
        h = linalg.as_cmat(self.hamiltonian, dims=(4,), name="hamiltonian")
        if not linalg.is_hermitian(h):
            raise ValidationError("interaction hamiltonian is not Hermitian")
        if not self.epsilon >= 0:
            raise ValidationError(f"epsilon must be >= 0, got {self.epsilon!r}")
        if not self.delta_t > 0:
            raise ValidationError(f"delta_t must be > 0, got {self.delta_t!r}")
        if not isinstance(self.probe_prep, PureState):
            raise ValidationError("probe_prep must be a PureState; mixed probes are not supported")
        h = h.copy()
        h.setflags(write=False)
        object.__setattr__(self, "hamiltonian", h)

    def unitary(self) -> np.ndarray:
        return weak_unitary(self.hamiltonian, self.epsilon)

    def kraus(self, probe_axis) -> KrausPair:
        return kraus_from_probe(self.unitary(), self.probe_prep, probe_axis)


SIGMA_Z_X = np.kron(linalg.SIGMA_Z, linalg.SIGMA_X)


def dephasing_spec(epsilon, delta_t=1.0) -> InteractionSpec:
    """The sigma_z (x) sigma_x interaction with probes prepared in |0>."""
    return InteractionSpec(SIGMA_Z_X, epsilon, delta_t, PureState([1, 0]))


# -- averaged dynamics ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DensitySeries:
    """Density matrices ``rhos[k]`` at ``times[k]``.

    ``trace_drift`` is the largest trace error removed by renormalization
    (zero for the channel, which is never renormalized).
    """

    times: np.ndarray
    rhos: np.ndarray
    trace_drift: float = 0.0

    def __len__(self):
        return len(self.times)

    def __getitem__(self, k) -> DensityMatrix:
        return DensityMatrix(self.rhos[k])

    def entropies(self) -> np.ndarray:
        return np.array([von_neumann_entropy(r) for r in self.rhos])

    def purities(self) -> np.ndarray:
        return np.real(np.einsum("kij,kji->k", self.rhos, self.rhos))


def channel_step(rho, kraus: KrausPair) -> DensityMatrix:
    """One probe interaction with the outcome discarded."""
    return DensityMatrix(_apply_channel(as_density(rho).matrix, kraus))


def _apply_channel(m, kraus):
    ap, am = kraus.a_plus, kraus.a_minus
    out = ap @ m @ linalg.dagger(ap) + am @ m @ linalg.dagger(am)
    return 0.5 * (out + linalg.dagger(out))


def channel_evolve(rho0, kraus: KrausPair, steps: int, delta_t=1.0) -> DensitySeries:
    """Iterate the channel; the series holds ``steps + 1`` matrices."""
    if steps < 0:
        raise ValidationError("steps must be >= 0")
    m = as_density(rho0).matrix
    rhos = np.empty((steps + 1, 2, 2), dtype=complex)
    rhos[0] = m
    for k in range(steps):
        m = _apply_channel(m, kraus)
        rhos[k + 1] = m
    return DensitySeries(np.arange(steps + 1) * float(delta_t), rhos)


@dataclass(frozen=True, eq=False)
class LindbladParams:
    h_eff: np.ndarray
    lindblad_op: np.ndarray

    def __post_init__(self):
        h = linalg.as_cmat(self.h_eff, dims=(2,), name="h_eff")
        if not linalg.is_hermitian(h):
            raise ValidationError("h_eff is not Hermitian")
        linalg.as_cmat(self.lindblad_op, dims=(2,), name="lindblad_op")

    def generator(self) -> np.ndarray:
        """4x4 superoperator acting on row-major vec(rho)."""
        h, l = self.h_eff, self.lindblad_op
        one = linalg.IDENTITY
        ldl = linalg.dagger(l) @ l
        return (-1j * (np.kron(h, one) - np.kron(one, h.T))
                + np.kron(l, l.conj())
                - 0.5 * np.kron(ldl, one) - 0.5 * np.kron(one, ldl.T))

    def rhs(self, rho) -> np.ndarray:
        h, l = self.h_eff, self.lindblad_op
        ldl = linalg.dagger(l) @ l
        return (-1j * (h @ rho - rho @ h) + l @ rho @ linalg.dagger(l)
                - 0.5 * (ldl @ rho + rho @ ldl))


def derive_lindblad(spec: InteractionSpec) -> LindbladParams:
    """Weak-coupling generator of a probe stream.

    h_eff = (eps/dt) <phi0|H|phi0> and L = (eps/sqrt(dt)) <phi0_perp|H|phi0>,
    where phi0_perp = (-b*, a*) for phi0 = (a, b).  L is defined only up to a
    phase, which the master equation does not see.
    """
    phi0 = spec.probe_prep.amplitudes
    perp = linalg.complement(phi0)
    h0 = linalg.probe_element(spec.hamiltonian, phi0, phi0)
    h1 = linalg.probe_element(spec.hamiltonian, perp, phi0)
    eps, dt = spec.epsilon, spec.delta_t
    return LindbladParams(0.5 * (h0 + linalg.dagger(h0)) * (eps / dt), h1 * (eps / math.sqrt(dt)))


def lindblad_integrate(rho0, params: LindbladParams, dt, t_final, record_every=1) -> DensitySeries:
    """Fixed-step classic RK4 integration of the master equation.

    Requires ||generator|| * dt < 0.1.  Each step is renormalized in trace;
    a drift above 1e-10 in any single step raises InvariantViolation.
    """
    if not dt > 0 or not t_final >= 0:
        raise ValidationError("need dt > 0 and t_final >= 0")
    gnorm = float(np.linalg.norm(params.generator(), 2))
    if gnorm * dt >= MAX_GENERATOR_STEP:
        raise ValidationError(f"dt={dt} too large: ||generator||*dt = {gnorm * dt:.3g} >= {MAX_GENERATOR_STEP}")
    n = round(t_final / dt)
    if abs(n * dt - t_final) > 1e-9 * max(1.0, t_final):
        raise ValidationError(f"t_final={t_final} is not a whole number of steps of {dt}")
    record_every = int(record_every)
    if record_every < 1:
        raise ValidationError("record_every must be >= 1")

    f = params.rhs
    rho = as_density(rho0).matrix.copy()
    rhos, times = [rho.copy()], [0.0]
    drift = 0.0
    for k in range(1, n + 1):
        k1 = f(rho)
        k2 = f(rho + 0.5 * dt * k1)
        k3 = f(rho + 0.5 * dt * k2)
        k4 = f(rho + dt * k3)
        rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        rho = 0.5 * (rho + linalg.dagger(rho))
        tr = np.real(np.trace(rho))
        drift = max(drift, abs(tr - 1.0))
        if abs(tr - 1.0) > TRACE_DRIFT_TOL:
            raise InvariantViolation("trace preservation", f"trace drift {abs(tr - 1.0):.3e} at step {k}")
        rho = rho / tr
        if k % record_every == 0:
            rhos.append(rho.copy())
            times.append(k * dt)
    return DensitySeries(np.array(times), np.array(rhos), drift)


# -- trajectories -----------------------------------------------------------


@dataclass(eq=False)
class TrajectoryRecord:
    """One stochastic run.

    ``outcomes`` has one character per step: '+' or '-' for the probe result.
    For the jump unraveling '-' is a jump.  ``states``/``times`` hold the
    snapshots every ``stride`` steps, starting with the initial state.
    ``p_plus`` and ``entanglement`` are per step, evaluated on the state just
    before that probe was read out.
    """

    seed: int
    index: int
    unraveling: str
    outcomes: str
    states: np.ndarray
    times: np.ndarray
    p_plus: np.ndarray
    entanglement: np.ndarray
    stride: int = 1

    @property
    def steps(self) -> int:
        return len(self.outcomes)

    @property
    def jump_count(self) -> int:
        return self.outcomes.count("-")

    def state(self, k) -> PureState:
        return PureState.normalized(self.states[k])

    @property
    def ledger(self) -> list[InfoLedgerEntry]:
        # the conditional state stays pure, so entropy and info gain are zero
        return [
            InfoLedgerEntry(k + 1, shannon_entropy(p), 0.0, float(e), 0.0)
            for k, (p, e) in enumerate(zip(self.p_plus, self.entanglement))
        ]

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "outcomes": self.outcomes,
            "times": [float(t) for t in self.times],
            "snapshots": [[[float(a.real), float(a.imag)] for a in s] for s in self.states],
        }


def _entropy2(a, d, b):
    """Vectorized entropy (bits) of 2x2 Hermitian PSD matrices [[a, b], [b*, d]]."""
    r = np.sqrt(0.25 * (a - d) ** 2 + np.abs(b) ** 2)
    out = np.zeros_like(a)
    for lam in (0.5 * (a + d) + r, 0.5 * (a + d) - r):
        pos = lam > 0
        out[pos] -= lam[pos] * np.log2(lam[pos])
    return np.maximum(out, 0.0)


def _run_batch(psi0, kraus: KrausPair, draws, stride):
    """Advance ``len(draws)`` trajectories in lockstep.

    Everything is elementwise arithmetic, so row ``i`` is bit-identical to a
    batch of one run with the same draws.
    """
    n, steps = draws.shape
    ap, am = kraus.a_plus, kraus.a_minus
    x = np.full(n, psi0[0], dtype=complex)
    y = np.full(n, psi0[1], dtype=complex)
    n_snap = steps // stride + 1
    snaps = np.empty((n, n_snap, 2), dtype=complex)
    snaps[:, 0, 0], snaps[:, 0, 1] = x, y
    signs = np.empty((n, steps), dtype=bool)
    p_plus = np.empty((n, steps))
    ent = np.empty((n, steps))
    for k in range(steps):
        px = ap[0, 0] * x + ap[0, 1] * y
        py = ap[1, 0] * x + ap[1, 1] * y
        mx = am[0, 0] * x + am[0, 1] * y
        my = am[1, 0] * x + am[1, 1] * y
        pp = np.abs(px) ** 2 + np.abs(py) ** 2
        pm = np.abs(mx) ** 2 + np.abs(my) ** 2
        p_plus[:, k] = pp
        # the joint state is A+|psi>|+> + A-|psi>|->; its probe Gram matrix
        ent[:, k] = _entropy2(pp, pm, np.conj(mx) * px + np.conj(my) * py)
        plus = draws[:, k] < pp
        prob = np.where(plus, pp, pm)
        if np.any(prob < MIN_BRANCH_PROB):
            raise DegenerateOutcomeError("a trajectory selected a zero-probability outcome")
        x = np.where(plus, px, mx)
        y = np.where(plus, py, my)
        norm = np.sqrt(np.abs(x) ** 2 + np.abs(y) ** 2)
        x, y = x / norm, y / norm
        signs[:, k] = plus
        if (k + 1) % stride == 0:
            snaps[:, (k + 1) // stride, 0] = x
            snaps[:, (k + 1) // stride, 1] = y
    return snaps, signs, p_plus, ent


def _check_stride(stride):
    stride = int(stride)
    if stride < 1:
        raise ValidationError("snapshot stride must be >= 1")
    return stride


def _records(psi0, kraus, unraveling, steps, seed, start, count, delta_t, stride):
    draws = seeding.uniforms(seed, count, steps, start)
    snaps, signs, p_plus, ent = _run_batch(psi0, kraus, draws, stride)
    norms = np.abs(np.sum(np.abs(snaps) ** 2, axis=2) - 1.0)
    if norms.size and np.max(norms) > STATE_NORM_TOL:
        raise InvariantViolation("normalization", f"state norm drifted by {np.max(norms):.3e}")
    times = np.arange(0, steps + 1, stride) * float(delta_t)
    return [
        TrajectoryRecord(
            seed=int(seed), index=start + i, unraveling=unraveling,
            outcomes="".join("+" if s else "-" for s in signs[i]),
            states=snaps[i], times=times, p_plus=p_plus[i], entanglement=ent[i], stride=stride,
        )
        for i in range(count)
    ]


def trajectory_exact(psi0, kraus: KrausPair, steps: int, seed: int, index=0,
                     delta_t=1.0, stride=1, unraveling=EXACT) -> TrajectoryRecord:
    """Sequence of generalized measurements; trajectory ``index`` of ``seed``."""
    if steps < 0:
        raise ValidationError("steps must be >= 0")
    psi = as_vector(psi0)
    if psi.shape != (2,):
        raise ValidationError("trajectories need a single q-bit initial state")
    return _records(psi, kraus, unraveling, steps, seed, index, 1, delta_t, _check_stride(stride))[0]


def jump_kraus(spec: InteractionSpec) -> KrausPair:
    """Kraus pair for z-axis probe readout, checked for jump structure.

    The no-jump operator A+ must be a multiple of the identity up to
    O(eps^2 ||H||^2), otherwise the readout does not produce rare jumps.
    The coupling must also be weak, eps ||H|| < 1.
    """
    kraus = spec.kraus(Z_AXIS)
    ap = kraus.a_plus
    dev = linalg.max_abs(ap - 0.5 * np.trace(ap) * linalg.IDENTITY)
    hnorm = float(np.linalg.norm(spec.hamiltonian, 2))
    if spec.epsilon * hnorm >= 1.0:
        raise ValidationError(f"interaction has no jump structure: coupling eps*||H|| = {spec.epsilon * hnorm:.3g} is not weak")
    if dev > spec.epsilon ** 2 * max(1.0, hnorm ** 2) + 1e-12:
        raise ValidationError(f"interaction has no jump structure: A+ deviates from identity by {dev:.3g}")
    return kraus


def diffusion_kraus(spec: InteractionSpec) -> KrausPair:
    """Kraus pair for x-axis probe readout, checked to be two equiprobable unitaries."""
    kraus = spec.kraus(X_AXIS)
    for a in (kraus.a_plus, kraus.a_minus):
        if linalg.max_abs(2 * linalg.dagger(a) @ a - linalg.IDENTITY) > 1e-10:
            raise ValidationError("interaction has no diffusion structure: outcomes are not equiprobable unitaries")
    return kraus


def kraus_for(spec: InteractionSpec, unraveling, probe_axis=Z_AXIS) -> KrausPair:
    if unraveling == JUMP:
        return jump_kraus(spec)
    if unraveling == DIFFUSION:
        return diffusion_kraus(spec)
    if unraveling == EXACT:
        return spec.kraus(probe_axis)
    raise ValidationError(f"unknown unraveling {unraveling!r}")


def trajectory_jump(psi0, spec: InteractionSpec, steps, seed, index=0, stride=1) -> TrajectoryRecord:
    """Quantum-jump trajectory: '-' outcomes apply the normalized sigma_z kick."""
    return trajectory_exact(psi0, jump_kraus(spec), steps, seed, index, spec.delta_t, stride, JUMP)


def trajectory_diffusion(psi0, spec: InteractionSpec, steps, seed, index=0, stride=1) -> TrajectoryRecord:
    """Diffusive trajectory: each step applies exp(-i eps sigma_z) or its inverse."""
    return trajectory_exact(psi0, diffusion_kraus(spec), steps, seed, index, spec.delta_t, stride, DIFFUSION)


def run_trajectories(psi0, kraus: KrausPair, n: int, steps: int, seed: int, unraveling=EXACT,
                     delta_t=1.0, stride=1, workers=None, chunk=4096) -> list[TrajectoryRecord]:
    """Run trajectories ``0 .. n-1`` of ``seed``.

    Chunks are independent and may run on ``workers`` processes; the result
    is ordered by index and identical to running each trajectory alone.
    """
    if n < 1:
        raise ValidationError("ensemble size must be >= 1")
    if steps < 0:
        raise ValidationError("steps must be >= 0")
    psi = as_vector(psi0)
    stride = _check_stride(stride)
    jobs = [(psi, kraus, unraveling, steps, seed, s, min(chunk, n - s), delta_t, stride)
            for s in range(0, n, chunk)]
    if workers and workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_records_job, jobs))
    else:
        parts = [_records(*job) for job in jobs]
    return [r for part in parts for r in part]


def _records_job(job):
    return _records(*job)


@dataclass(frozen=True, eq=False)
class EnsembleResult:
    """Ensemble mean of |psi><psi| per snapshot.

    ``entry_stderr[k, i, j]`` is the standard error of the complex mean of
    entry (i, j); ``stderr[k]`` is its maximum over entries.
    """

    n_trajectories: int
    times: np.ndarray
    mean_rho: np.ndarray
    stderr: np.ndarray
    entry_stderr: np.ndarray

    def series(self) -> DensitySeries:
        return DensitySeries(self.times, self.mean_rho)


def ensemble_average(trajectories, chunk=1024) -> EnsembleResult:
    """Mean projector and its standard error, summed in trajectory order."""
    records = list(trajectories)
    if not records:
        raise ValidationError("no trajectories to average")
    first = records[0]
    for r in records:
        if (r.unraveling != first.unraveling or r.steps != first.steps
                or r.states.shape != first.states.shape or not np.array_equal(r.times, first.times)):
            raise ValidationError("trajectories differ in unraveling, step count or time grid")
    n = len(records)
    total = np.zeros((len(first.times), 2, 2), dtype=complex)
    total_sq = np.zeros((len(first.times), 2, 2))
    for s in range(0, n, chunk):
        psi = np.stack([r.states for r in records[s:s + chunk]])
        proj = np.einsum("nti,ntj->ntij", psi, psi.conj())
        total += proj.sum(axis=0)
        total_sq += (np.abs(proj) ** 2).sum(axis=0)
    mean = total / n
    mean = 0.5 * (mean + linalg.dagger(mean))
    if n > 1:
        var = np.maximum(total_sq / n - np.abs(mean) ** 2, 0.0) * n / (n - 1)
        entry_se = np.sqrt(var / n)
    else:
        entry_se = np.zeros_like(total_sq)
    return EnsembleResult(n, first.times.copy(), mean, entry_se.max(axis=(1, 2)), entry_se)
