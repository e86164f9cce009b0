"""Error reduction by repetition codes, classical and quantum.

Classical repetition of n bits can either correct by majority vote or
*reduce* errors by keeping only unanimous blocks. The quantum analogue
encodes a qubit into n blocks of n qubits,

    |0_L⟩ ∝ ⊗ⁿ (|0…0⟩ + |1…1⟩),   |1_L⟩ ∝ ⊗ⁿ (|0…0⟩ − |1…1⟩),

and projects the received state onto span{|0_L⟩, |1_L⟩}, discarding it on
failure.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .attacks import weak_measure
from .config import TOL

DEFAULT_LOGICAL = np.array([math.cos(math.pi / 8), math.sin(math.pi / 8)], dtype=complex)
MC_CHUNK = 4096


def _binom_pmf(n: int, p: float) -> list[float]:
    return [math.comb(n, l) * p**l * (1 - p) ** (n - l) for l in range(n + 1)]


def classical_correction_stats(n_rep: int, p: float) -> float:
    """Probability that majority voting over n_rep copies decodes wrongly."""
    if n_rep < 3 or n_rep % 2 == 0:
        raise ValueError("majority voting needs an odd n_rep >= 3")
    if not 0.0 <= p <= 0.5:
        raise ValueError("p must lie in [0, 1/2]")
    pmf = _binom_pmf(n_rep, p)
    return math.fsum(pmf[n_rep // 2 + 1 :])


def classical_reduction_stats(n_rep: int, p: float) -> tuple[float, float]:
    """Keep only unanimous blocks.

    Returns:
        (P, Q): error probability among kept blocks and the keep rate.
    """
    if n_rep < 2:
        raise ValueError("n_rep must be at least 2")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be a probability")
    q = (1 - p) ** n_rep + p**n_rep
    return p**n_rep / q, q


def classical_combined_stats(n_rep: int, p: float, t_prime: int) -> tuple[float, float]:
    """Correct up to t′ errors and discard blocks with more.

    t′ = 0 is pure reduction and t′ = (n_rep − 1)/2 pure correction.

    Returns:
        (P, Q) as in ``classical_reduction_stats``.
    """
    if not 0 <= 2 * t_prime < n_rep:
        raise ValueError("need 0 <= t' < n_rep/2")
    pmf = _binom_pmf(n_rep, p)
    good = math.fsum(pmf[: t_prime + 1])
    bad = math.fsum(pmf[n_rep - t_prime :])
    return bad / (good + bad), good + bad


@dataclass(frozen=True)
class ZenoStats:
    """Unanimity reduction repeated at M evenly spaced stations.

    Attributes:
        p_segment: Error probability per segment, p/M².
        P_eff: Error probability of the bit after all M segments.
        Q_eff: Probability that every station keeps the block.
        Q_leading: The leading-order keep rate (1 − p/M²)^{n·M}.
    """

    p_segment: float
    P_eff: float
    Q_eff: float
    Q_leading: float


def zeno_stats(n_rep: int, p: float, m: int) -> ZenoStats:
    if m < 1:
        raise ValueError("need at least one station")
    p_seg = p / m**2
    p_s, q_s = classical_reduction_stats(n_rep, p_seg)
    # an odd number of undetected flips over M segments leaves the bit wrong
    p_eff = 0.5 * (1.0 - (1.0 - 2.0 * p_s) ** m)
    return ZenoStats(p_seg, p_eff, q_s**m, (1.0 - p_seg) ** (n_rep * m))


@dataclass(frozen=True)
class RurCode:
    """Quantum repetition code on n blocks of n qubits (n ≤ 3)."""

    n: int

    def __post_init__(self) -> None:
        if not 2 <= self.n <= 3:
            raise ValueError("state-vector simulation supports n = 2 or 3")

    @property
    def num_qubits(self) -> int:
        return self.n**2

    @property
    def dim(self) -> int:
        return 2 ** self.num_qubits

    def _logical(self, sign: int) -> np.ndarray:
        m = 2**self.n
        block = np.zeros(m, dtype=complex)
        block[0], block[-1] = 1.0, float(sign)
        block /= math.sqrt(2.0)
        return reduce(np.kron, [block] * self.n)

    @property
    def zero(self) -> np.ndarray:
        return self._logical(+1)

    @property
    def one(self) -> np.ndarray:
        return self._logical(-1)

    @property
    def basis(self) -> np.ndarray:
        """2 × dim matrix whose rows are |0_L⟩ and |1_L⟩."""
        return np.vstack([self.zero, self.one])


def encode_rur(code: RurCode, logical: np.ndarray) -> np.ndarray:
    """α|0_L⟩ + β|1_L⟩ for a normalized logical state (α, β)."""
    logical = np.asarray(logical, dtype=complex)
    if logical.shape == (code.dim,):
        raise ValueError("input is already encoded")
    if logical.shape != (2,):
        raise ValueError("logical state must be a qubit")
    logical = logical / np.linalg.norm(logical)
    return logical @ code.basis


@dataclass(frozen=True)
class ProjectionResult:
    success: bool
    amplitudes: np.ndarray | None
    probability: float


def project_code_subspace(
    state: np.ndarray, code: RurCode, rng: np.random.Generator | None = None
) -> ProjectionResult:
    """Project onto the code space and decode to logical amplitudes.

    Without ``rng`` the outcome is reported as a success whenever the
    projection is nonzero; with ``rng`` the projective measurement is
    sampled. A failed projection returns ``amplitudes=None``.
    """
    state = np.asarray(state, dtype=complex)
    if state.shape != (code.dim,):
        raise ValueError("state dimension does not match the code")
    amps = code.basis.conj() @ state
    prob = float(np.vdot(amps, amps).real)
    ok = prob > TOL.algebraic if rng is None else bool(rng.random() < prob)
    if not ok:
        return ProjectionResult(False, None, prob)
    return ProjectionResult(True, amps / math.sqrt(prob), prob)


@dataclass(frozen=True)
class BoundedNoise:
    """Independent one-qubit unitaries with all three angles uniform in [−χ, χ].

    U = [[cos θ, sin θ e^{iφ}], [−sin θ e^{iη}, cos θ e^{i(φ+η)}]]
    """

    chi: float

    def __post_init__(self) -> None:
        if self.chi < 0:
            raise ValueError("chi must be non-negative")

    @staticmethod
    def unitary(theta: np.ndarray, phi: np.ndarray, eta: np.ndarray) -> np.ndarray:
        c, s = np.cos(theta), np.sin(theta)
        u = np.empty(np.shape(theta) + (2, 2), dtype=complex)
        u[..., 0, 0] = c
        u[..., 0, 1] = s * np.exp(1j * phi)
        u[..., 1, 0] = -s * np.exp(1j * eta)
        u[..., 1, 1] = c * np.exp(1j * (phi + eta))
        return u

    def sample(self, rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
        """Unitaries of the given leading shape, drawn as θ, φ, η in that order."""
        ang = self.chi * rng.uniform(-1.0, 1.0, size=(3,) + tuple(shape))
        return self.unitary(ang[0], ang[1], ang[2])


def apply_local_unitaries(states: np.ndarray, unitaries: np.ndarray) -> np.ndarray:
    """Apply per-sample single-qubit unitaries to a batch of state vectors.

    Args:
        states: Shape (B, 2^N).
        unitaries: Shape (B, N, 2, 2); entry [:, q] acts on qubit q.
    """
    b, dim = states.shape
    nq = unitaries.shape[1]
    psi = states.reshape((b,) + (2,) * nq)
    for q in range(nq):
        psi = np.moveaxis(psi, q + 1, -1)
        psi = np.einsum("b...j,bij->b...i", psi, unitaries[:, q])
        psi = np.moveaxis(psi, -1, q + 1)
    return psi.reshape(b, dim)


@dataclass(frozen=True)
class RemainderEstimate:
    chi: float
    trials: int
    P_hat: float
    Q_hat: float
    P_stderr: float
    Q_stderr: float


def _chunk_seed(seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=seed, spawn_key=(index,))


def _remainder_chunk(args: tuple) -> tuple[float, float, float, float, float, int]:
    n, chi, size, seed, index, logical = args
    code = RurCode(n)
    rng = np.random.Generator(np.random.PCG64(_chunk_seed(seed, index)))
    u = BoundedNoise(chi).sample(rng, (size, code.num_qubits))
    encoded = np.broadcast_to(encode_rur(code, logical), (size, code.dim))
    out = apply_local_unitaries(np.array(encoded), u)
    amps = out @ code.basis.conj().T
    q = np.sum(np.abs(amps) ** 2, axis=1)
    perp = np.array([-np.conj(logical[1]), np.conj(logical[0])])
    # q·ε is the weight of the wrong logical state; no division by q needed
    qe = np.abs(amps @ perp) ** 2
    return (float(q.sum()), float((q**2).sum()), float(qe.sum()),
            float((qe**2).sum()), float((q * qe).sum()), size)


def monte_carlo_remainder(
    code: RurCode,
    noise: BoundedNoise,
    trials: int,
    logical: np.ndarray | None = None,
    seed: int = 0,
    workers: int = 1,
) -> RemainderEstimate:
    """Estimate the keep rate Q and remainder error P under bounded noise.

    Each trial contributes its exact projection probability q and the
    probability q·ε of projecting onto the wrong logical state, so
    Q̂ = mean(q) and P̂ = Σ q·ε / Σ q. Trials are split in fixed chunks with
    their own derived seeds, making the result independent of ``workers``.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    logical = DEFAULT_LOGICAL if logical is None else np.asarray(logical, dtype=complex)
    logical = logical / np.linalg.norm(logical)
    jobs = []
    done, idx = 0, 0
    while done < trials:
        size = min(MC_CHUNK, trials - done)
        jobs.append((code.n, noise.chi, size, seed, idx, logical))
        done += size
        idx += 1
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_remainder_chunk, jobs))
    else:
        parts = [_remainder_chunk(j) for j in jobs]
    sq, sq2, se, se2, sqe, n = (math.fsum(p[i] for p in parts) for i in range(6))
    n = int(n)
    q_hat = sq / n
    p_hat = se / sq
    q_var = max(sq2 / n - q_hat**2, 0.0)
    # delta method for the ratio estimator Σ qε / Σ q
    r_var = max((se2 - 2 * p_hat * sqe + p_hat**2 * sq2) / n, 0.0)
    return RemainderEstimate(
        chi=noise.chi,
        trials=n,
        P_hat=p_hat,
        Q_hat=q_hat,
        P_stderr=math.sqrt(r_var / n) / q_hat,
        Q_stderr=math.sqrt(q_var / n),
    )


@dataclass(frozen=True)
class RemainderSweep:
    estimates: tuple[RemainderEstimate, ...]
    p_exponent: float
    q_exponent: float


def fit_exponent(x: list[float], y: list[float]) -> float:
    """Slope of log y against log x."""
    if len(x) < 2:
        raise ValueError("a fit needs at least two points")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def remainder_sweep(
    code: RurCode,
    chis: list[float],
    trials: int,
    logical: np.ndarray | None = None,
    seed: int = 0,
    workers: int = 1,
    min_trials: int = 10_000,
) -> RemainderSweep:
    """Monte Carlo over a χ grid plus power-law fits of P and 1 − Q."""
    if trials < min_trials:
        raise ValueError(f"power-law fits need at least {min_trials} trials per point")
    ests = tuple(
        monte_carlo_remainder(code, BoundedNoise(c), trials, logical, seed, workers) for c in chis
    )
    pts = [e for e in ests if e.chi > 0 and e.P_hat > 0 and e.Q_hat < 1]
    p_exp = fit_exponent([e.chi for e in pts], [e.P_hat for e in pts])
    q_exp = fit_exponent([e.chi for e in pts], [1 - e.Q_hat for e in pts])
    return RemainderSweep(ests, p_exp, q_exp)


def weak_coupling_rdm(rho: np.ndarray, gamma: float) -> np.ndarray:
    """Code-qubit state after the weak-measurement gate with a fresh environment.

    The environment qubit (1, 0) is the most significant qubit.
    """
    u = weak_measure(gamma).joint
    env = np.diag([1.0, 0.0]).astype(complex)
    joint = u @ np.kron(env, rho) @ u.conj().T
    return np.einsum("ajak->jk", joint.reshape(2, 2, 2, 2))


def sign_variant_average(rho: np.ndarray, gamma: float) -> np.ndarray:
    """Average of V±ρV±† for V± = [[c, ±s], [±s, c]]."""
    c, s = math.cos(gamma), math.sin(gamma)
    out = np.zeros((2, 2), dtype=complex)
    for sign in (1.0, -1.0):
        v = np.array([[c, sign * s], [sign * s, c]], dtype=complex)
        out += 0.5 * v @ rho @ v.conj().T
    return out
