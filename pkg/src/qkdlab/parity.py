"""Eve's information on the parity of n signal bits.

The two parity density matrices decompose into 2×2 blocks, one per pair of
complementary basis indices (j, 2ⁿ−1−j). A block whose index has Hamming
weight k carries weight q_k = c^{2(n−k)} s^{2k} + c^{2k} s^{2(n−k)} and is a
binary symmetric channel with bias (cs − r_mix)ⁿ / q_k. All block
quantities are evaluated in log space so that large n does not underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .binary_info import TwoStateSource, bsc_info_bias
from .config import TOL

DENSE_MAX_N = 12


def _xlog(a: float, log_x: float) -> float:
    """a·log x with the convention 0·log 0 = 0."""
    return 0.0 if a == 0 else a * log_x


def _log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def _logaddexp(a: float, b: float) -> float:
    if a == -math.inf:
        return b
    if b == -math.inf:
        return a
    m = max(a, b)
    return m + math.log1p(math.exp(-abs(a - b)))


def log_binom(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


@dataclass(frozen=True)
class ParityModel:
    """Parity of ``n`` bits, each sent as one of the two source states."""

    n: int
    source: TwoStateSource

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("n must be a positive integer")

    @classmethod
    def pure(cls, n: int, alpha: float) -> "ParityModel":
        return cls(n, TwoStateSource(alpha))


@dataclass(frozen=True)
class BlockRecord:
    """One class of 2×2 blocks.

    Attributes:
        k: Hamming weight of the lighter index in each block, 0..n//2.
        multiplicity: Number of blocks in the class.
        q: Weight of a single block.
        p: Optimal error probability inside the block.
        bias: 1/2 − p, kept separately for accuracy near p = 1/2.
        log_q: Natural log of q.
    """

    k: int
    multiplicity: float
    q: float
    p: float
    bias: float
    log_q: float

    @property
    def log_weight(self) -> float:
        return math.log(self.multiplicity) + self.log_q

    @property
    def weight(self) -> float:
        return math.exp(self.log_weight) if self.log_q > -math.inf else 0.0


@dataclass(frozen=True)
class BlockSpectrum:
    n: int
    records: tuple[BlockRecord, ...]

    @property
    def total_weight(self) -> float:
        return sum(r.weight for r in self.records)


def multiplicity(n: int, k: int) -> float:
    """Block count for weight class k (half the central binomial when 2k = n)."""
    m = math.comb(n, k)
    return m / 2 if 2 * k == n else float(m)


def block_spectrum(model: ParityModel) -> BlockSpectrum:
    n, src = model.n, model.source
    lc, ls = _log(src.c), _log(src.s)
    ld = _log(src.off_diagonal)
    records = []
    for k in range(n // 2 + 1):
        la = _xlog(2 * (n - k), lc) + _xlog(2 * k, ls)
        lb = _xlog(2 * k, lc) + _xlog(2 * (n - k), ls)
        log_q = _logaddexp(la, lb)
        if log_q == -math.inf:
            q, bias = 0.0, 0.0
        else:
            q = math.exp(log_q)
            bias = math.exp(_xlog(n, ld) - log_q) if ld > -math.inf else 0.0
        records.append(BlockRecord(k, multiplicity(n, k), q, 0.5 - bias, bias, log_q))
    return BlockSpectrum(n, tuple(records))


def coherent_info(model: ParityModel) -> float:
    """Optimal information from a joint measurement on all n signals."""
    total = 0.0
    for rec in block_spectrum(model).records:
        if rec.log_q > -math.inf:
            total += rec.weight * bsc_info_bias(rec.bias)
    return total


def individual_info(model: ParityModel) -> float:
    """Information on the parity when each bit is measured on its own."""
    bias = 0.5 * (2.0 * model.source.off_diagonal) ** model.n
    return bsc_info_bias(bias)


def deterministic_info(model: ParityModel) -> float:
    """Average information when every block is read out unambiguously.

    Each block contributes its weight times its conclusive probability,
    which simplifies to mult·2·c^{2k} s^{2(n−k)} for c ≥ s.
    """
    if not model.source.is_pure:
        raise ValueError("deterministic information is defined for pure sources only")
    n, src = model.n, model.source
    lc, ls = _log(src.c), _log(src.s)
    total = 0.0
    for k in range(n // 2 + 1):
        log_term = math.log(2.0 * multiplicity(n, k)) + _xlog(2 * k, lc) + _xlog(2 * (n - k), ls)
        total += math.exp(log_term) if log_term > -math.inf else 0.0
    return total


def asymptotic_bound(model: ParityModel) -> float:
    """Small-angle upper bound (2α)ⁿ / √(πn/2) on the coherent information."""
    n = model.n
    return (2.0 * model.source.alpha) ** n / math.sqrt(math.pi * n / 2.0)


def parity_densities(model: ParityModel) -> tuple[np.ndarray, np.ndarray]:
    """Dense parity-0 and parity-1 density matrices (real, n ≤ 12)."""
    n, src = model.n, model.source
    if n > DENSE_MAX_N or 2**n > TOL.max_dim:
        raise MemoryError(f"dense parity matrices capped at n = {DENSE_MAX_N}")
    rho1 = np.diag([src.c**2, src.s**2])
    delta1 = np.array([[0.0, src.off_diagonal], [src.off_diagonal, 0.0]])
    diag = reduce(np.kron, [rho1] * n)
    off = reduce(np.kron, [delta1] * n)
    return diag + off, diag - off


def block_permutation(n: int) -> np.ndarray:
    """Index map placing each index next to its complement.

    Entry 2j is j and entry 2j+1 is 2ⁿ−1−j, so ``rho[perm][:, perm]`` is
    block diagonal with 2×2 blocks.
    """
    half = np.arange(2 ** (n - 1))
    perm = np.empty(2**n, dtype=np.int64)
    perm[0::2] = half
    perm[1::2] = 2**n - 1 - half
    return perm


def dense_blocks(model: ParityModel) -> list[tuple[int, np.ndarray, np.ndarray]]:
    """Extract (j, B₀, B₁) for every block of the permuted dense matrices."""
    rho0, rho1 = parity_densities(model)
    perm = block_permutation(model.n)
    p0 = rho0[np.ix_(perm, perm)]
    p1 = rho1[np.ix_(perm, perm)]
    out = []
    for j in range(2 ** (model.n - 1)):
        sl = slice(2 * j, 2 * j + 2)
        out.append((j, p0[sl, sl].copy(), p1[sl, sl].copy()))
    return out
