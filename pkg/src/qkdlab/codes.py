"""Eve's information on a target parity after parity-check data is announced.

Bit strings are Python ints of a fixed length ``n`` whose most significant
bit is the first character of the written string and also qubit 0. With r
parity strings v₁..v_r announced together with their values, the density
matrix of the remaining target parity splits into 2^{n−r−1} blocks, one per
coset of the span of {v₁..v_r, v_d}. Each block is rank one for either
value of the target parity, so Eve faces a pure two-state problem per block.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .binary_info import bsc_info_bias
from .config import TOL
from .parity import ParityModel, coherent_info


def popcount(x: int) -> int:
    return int(x).bit_count()


def parity(x: int) -> int:
    return popcount(x) & 1


def to_bits(x: int, n: int) -> str:
    return format(x, f"0{n}b")


def from_bits(s: str) -> int:
    if not s or set(s) - {"0", "1"}:
        raise ValueError(f"not a bit string: {s!r}")
    return int(s, 2)


def gf2_echelon(vectors: Sequence[int]) -> list[int]:
    """Reduced basis with distinct leading bits, sorted by leading bit."""
    basis: list[int] = []
    for v in vectors:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
            basis.sort(reverse=True)
    # full reduction so every pivot bit appears in one basis vector only
    for i, b in enumerate(basis):
        top = 1 << (b.bit_length() - 1)
        for j in range(len(basis)):
            if j != i and basis[j] & top:
                basis[j] ^= b
    return sorted(basis, reverse=True)


def gf2_rank(vectors: Sequence[int]) -> int:
    return len(gf2_echelon(vectors))


@dataclass(frozen=True)
class ParityCode:
    """Announced parity strings plus the target string of the key bit.

    Attributes:
        n: String length.
        rows: Announced parity strings v₁..v_r.
        values: Announced parities p₁..p_r.
        target: Target string v_d whose parity is the key bit.
        target_parity: Hypothesized key bit value.
    """

    n: int
    rows: tuple[int, ...]
    values: tuple[int, ...] = field(default=())
    target: int = -1
    target_parity: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.target == -1:
            object.__setattr__(self, "target", (1 << self.n) - 1)
        if not self.values:
            object.__setattr__(self, "values", (0,) * len(self.rows))
        object.__setattr__(self, "rows", tuple(int(v) for v in self.rows))
        object.__setattr__(self, "values", tuple(int(v) & 1 for v in self.values))
        if len(self.values) != len(self.rows):
            raise ValueError("one announced value per row is required")
        for v in (*self.rows, self.target):
            if not 0 < v < (1 << self.n):
                raise ValueError("parity strings must be nonzero and fit in n bits")
        if len(self.rows) + 1 > self.n:
            raise ValueError("need r + 1 <= n")
        if gf2_rank([*self.rows, self.target]) != len(self.rows) + 1:
            raise ValueError("rows and target must be linearly independent over GF(2)")

    @property
    def r(self) -> int:
        return len(self.rows)

    @classmethod
    def from_strings(
        cls,
        rows: Sequence[str],
        target: str | None = None,
        values: Sequence[int] | None = None,
        target_parity: int = 0,
    ) -> "ParityCode":
        lengths = {len(s) for s in rows} | ({len(target)} if target else set())
        if len(lengths) != 1:
            raise ValueError("all bit strings must share one length")
        n = lengths.pop()
        return cls(
            n=n,
            rows=tuple(from_bits(s) for s in rows),
            values=tuple(values) if values is not None else (),
            target=from_bits(target) if target else -1,
            target_parity=target_parity,
        )

    def with_target_parity(self, p: int) -> "ParityCode":
        return replace(self, target_parity=int(p) & 1)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "rows": [to_bits(v, self.n) for v in self.rows],
            "values": list(self.values),
            "target": to_bits(self.target, self.n),
            "target_parity": self.target_parity,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ParityCode":
        code = cls.from_strings(
            d["rows"], d.get("target"), d.get("values"), int(d.get("target_parity", 0))
        )
        if "n" in d and int(d["n"]) != code.n:
            raise ValueError("declared n does not match the bit strings")
        return code

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "ParityCode":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _span(gens: Sequence[tuple[int, int]]) -> dict[int, int]:
    words = {0: 0}
    for g, pg in gens:
        words.update({w ^ g: p ^ pg for w, p in list(words.items())})
    return words


def span_closure(code: ParityCode, include_target: bool = True) -> dict[int, int]:
    """All GF(2) combinations of the code strings mapped to their induced parity.

    With ``include_target`` the target string and ``code.target_parity`` join
    the generators, giving 2^{r+1} words; otherwise only the r rows are used.
    """
    gens = list(zip(code.rows, code.values))
    if include_target:
        gens.append((code.target, code.target_parity))
    return _span(gens)


class ZeroPattern:
    """Closed-form entry rule for the code-conditioned density matrix.

    Entry (j, k) vanishes unless j ⊕ k lies in the span of rows and target;
    otherwise it equals the induced parity sign times
    c^{2n − n̂(j) − n̂(k)} s^{n̂(j) + n̂(k)}.
    """

    def __init__(self, code: ParityCode):
        self.code = code
        self._span = span_closure(code)

    def __call__(self, j: int, k: int) -> int:
        """Sign of entry (j, k), or 0 for a structural zero."""
        p = self._span.get(j ^ k)
        if p is None:
            return 0
        return -1 if p else 1

    def value(self, j: int, k: int, alpha: float) -> float:
        sign = self(j, k)
        if sign == 0:
            return 0.0
        n = self.code.n
        w = popcount(j) + popcount(k)
        return sign * math.cos(alpha) ** (2 * n - w) * math.sin(alpha) ** w

    def dense(self, alpha: float) -> np.ndarray:
        """Full matrix from the entry rule, for validation (n ≤ 10)."""
        n = self.code.n
        if n > 10:
            raise MemoryError("dense code matrices capped at n = 10")
        dim = 1 << n
        idx = np.arange(dim)
        weights = np.array([popcount(i) for i in idx])
        mag = np.cos(alpha) ** (n - weights) * np.sin(alpha) ** weights
        xor = idx[:, None] ^ idx[None, :]
        sign = np.zeros(dim, dtype=float)
        for w, p in self._span.items():
            sign[w] = -1.0 if p else 1.0
        return sign[xor] * np.outer(mag, mag)


def zero_pattern(code: ParityCode) -> ZeroPattern:
    return ZeroPattern(code)


@dataclass(frozen=True)
class CosetBlock:
    """One diagonal block of the code-conditioned density matrices.

    Attributes:
        representative: Coset index with zeros at the span pivot bits.
        coset: Basis indices of the block, ordered like the span words.
        weight: Trace of the block, the probability of landing in it.
        u0: Unit vector of the block for target parity 0.
        u1: Unit vector of the block for target parity 1.
        bias: sin 2β / 2, where cos 2β = |⟨u0|u1⟩|.
    """

    representative: int
    coset: np.ndarray
    weight: float
    u0: np.ndarray
    u1: np.ndarray
    bias: float
    matrices: tuple[np.ndarray, np.ndarray]

    @property
    def overlap(self) -> float:
        return float(abs(self.u0 @ self.u1))

    @property
    def error(self) -> float:
        return 0.5 - self.bias

    @property
    def info(self) -> float:
        return bsc_info_bias(self.bias)

    def second_eigenvalue(self, p: int) -> float:
        ev = np.linalg.eigvalsh(self.matrices[p])
        return float(ev[-2]) if ev.size > 1 else 0.0


def _unit_from_rank_one(block: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(block, axis=1)
    row = block[int(np.argmax(norms))]
    return row / np.linalg.norm(row)


def _coset_representatives(span_basis: list[int], n: int) -> list[int]:
    pivots = {b.bit_length() - 1 for b in span_basis}
    free = [bit for bit in range(n) if bit not in pivots]
    reps = []
    for m in range(1 << len(free)):
        x = 0
        for i, bit in enumerate(free):
            if m >> i & 1:
                x |= 1 << bit
        reps.append(x)
    return sorted(reps)


def iter_blocks(code: ParityCode, alpha: float) -> Iterator[CosetBlock]:
    """Yield the coset blocks in ascending representative order."""
    n, r = code.n, code.r
    n_blocks, size = 1 << (n - r - 1), 1 << (r + 1)
    if n_blocks > TOL.max_blocks or size > TOL.max_block_size:
        raise MemoryError("coset block count or size exceeds the configured caps")
    span0 = span_closure(code.with_target_parity(0))
    span1 = span_closure(code.with_target_parity(1))
    words = np.fromiter(span0.keys(), dtype=np.int64, count=size)
    pos = {int(w): i for i, w in enumerate(words)}
    pair_xor = words[:, None] ^ words[None, :]
    lookup = np.vectorize(pos.__getitem__)(pair_xor)
    sign0 = np.array([-1.0 if span0[int(w)] else 1.0 for w in words])[lookup]
    sign1 = np.array([-1.0 if span1[int(w)] else 1.0 for w in words])[lookup]
    c, s = math.cos(alpha), math.sin(alpha)
    basis = gf2_echelon([int(w) for w in words if w])
    for rep in _coset_representatives(basis, n):
        coset = words ^ rep
        wt = np.array([popcount(int(i)) for i in coset])
        mag = c ** (n - wt) * s**wt
        outer = np.outer(mag, mag)
        b0, b1 = sign0 * outer, sign1 * outer
        weight = float(np.trace(b0))
        if weight == 0.0:
            continue
        u0, u1 = _unit_from_rank_one(b0), _unit_from_rank_one(b1)
        if u0 @ u1 < 0:
            u1 = -u1
        # sin 2β = |u0 − u1|·|u0 + u1| / 2 avoids cancellation in 1 − o²
        sin2b = float(np.linalg.norm(u0 - u1) * np.linalg.norm(u0 + u1) / 2.0)
        yield CosetBlock(rep, coset, weight, u0, u1, 0.5 * min(sin2b, 1.0), (b0, b1))


def code_blocks(code: ParityCode, alpha: float) -> list[CosetBlock]:
    return list(iter_blocks(code, alpha))


def exact_total_info(code: ParityCode, alpha: float) -> float:
    """Σ_j a_j I₂(p_j) over coset blocks, summed in representative order."""
    total = 0.0
    for blk in iter_blocks(code, alpha):
        total += blk.weight * blk.info
    return total


def word_info_leading(d: int, alpha: float) -> float:
    """Leading small-angle parity information at distance d."""
    k = (d + 1) // 2
    coeff = 1.0 if d % 2 == 0 else 1.0 / math.log(2.0)
    return coeff * math.comb(2 * k, k) * alpha ** (2 * k)


def sum_bound(code: ParityCode, alpha: float, mode: str = "exact") -> float:
    """Conjectured bound Σ_v I(n̂(v ⊕ v_d)) over the 2^r words of the row span.

    Args:
        code: The announced code.
        alpha: Signal half-angle.
        mode: ``"exact"`` uses the coherent parity information for each
            distance; ``"leading"`` uses its small-angle leading term.
    """
    if mode not in ("exact", "leading"):
        raise ValueError("mode must be 'exact' or 'leading'")
    total = 0.0
    for w in span_closure(code, include_target=False):
        d = popcount(w ^ code.target)
        if mode == "leading":
            total += word_info_leading(d, alpha)
        else:
            total += coherent_info(ParityModel.pure(d, alpha))
    return total


def leading_exponent(code: ParityCode) -> int:
    """Power of α in the leading term of the sum bound."""
    dmin = min(popcount(w ^ code.target) for w in span_closure(code, include_target=False))
    return 2 * ((dmin + 1) // 2)


_TEXTBOOK_ROWS = {3: ("1110100", "1101010", "0111001")}


def hamming_code(r: int) -> ParityCode:
    """Hamming code with r parity checks, target = all-ones string.

    Data bits come first, then the r check bits. For r = 3 the classic
    textbook layout is used; otherwise data columns are the r-bit vectors of
    weight ≥ 2 in descending order.
    """
    if r < 2:
        raise ValueError("Hamming codes need r >= 2")
    if r in _TEXTBOOK_ROWS:
        return ParityCode.from_strings(_TEXTBOOK_ROWS[r])
    n = (1 << r) - 1
    cols = [v for v in range((1 << r) - 1, 0, -1) if popcount(v) >= 2]
    cols += [1 << (r - 1 - l) for l in range(r)]
    rows = []
    for l in range(r):
        bits = "".join("1" if col >> (r - 1 - l) & 1 else "0" for col in cols)
        rows.append(bits)
    code = ParityCode.from_strings(rows)
    assert code.n == n
    return code


def syndrome(word: int, code: ParityCode) -> tuple[int, ...]:
    """Parity of each row on ``word`` XOR the announced values."""
    return tuple(parity(word & v) ^ p for v, p in zip(code.rows, code.values))


def syndrome_decode(word: int, code: ParityCode) -> tuple[int, bool]:
    """Single-error correction against the announced parities.

    Returns:
        The corrected word and whether a bit was flipped.

    Raises:
        ValueError: If the syndrome matches no column (not a Hamming layout).
    """
    syn = syndrome(word, code)
    if not any(syn):
        return word, False
    n = code.n
    for pos in range(n):
        bit = 1 << (n - 1 - pos)
        if tuple(1 if v & bit else 0 for v in code.rows) == syn:
            return word ^ bit, True
    raise ValueError("syndrome matches no single-bit error")


def reliability_estimate(n: int, p_norm: float) -> float:
    """Leading-order probability of two or more errors among n bits."""
    if not 0.0 <= p_norm <= 1.0:
        raise ValueError("p_norm must be a probability")
    return n * (n - 1) / 2.0 * p_norm**2


def normalized_error_rate(p_e: float, theta: float, theta_prime: float) -> float:
    """Error rate among conclusive two-state results, p_e / (p_c + p_e).

    p_c = sin²(θ + θ′) is the correct conclusive probability for the same test.
    """
    p_c = math.sin(theta + theta_prime) ** 2
    return p_e / (p_c + p_e) if p_c + p_e > 0 else 0.0


def bound_constant(n: int) -> float:
    return math.sqrt(n + 1) * 2.0 / (math.log(2.0) * math.sqrt(math.pi))


def security_bound(n: int, alpha: float) -> float:
    """C(n)·(2α)^{(n+1)/2}, the small-angle bound for Hamming-type codes."""
    return bound_constant(n) * (2.0 * alpha) ** ((n + 1) / 2.0)


def security_bound_error(n: int, p_e: float, theta: float) -> float:
    """The same bound written through the translucent-attack error rate."""
    return bound_constant(n) * (16.0 * p_e * math.tan(2.0 * theta) ** 2) ** ((n + 1) / 8.0)


def random_code(rng: np.random.Generator, n_min: int = 2, n_max: int = 8) -> ParityCode:
    """Draw a code with random length, rows, values and target."""
    n = int(rng.integers(n_min, n_max + 1))
    r = int(rng.integers(0, n))
    while True:
        vecs = [int(v) for v in rng.integers(1, 1 << n, size=r + 1)]
        if gf2_rank(vecs) == r + 1:
            break
    values = tuple(int(v) for v in rng.integers(0, 2, size=r))
    return ParityCode(n=n, rows=tuple(vecs[:r]), values=values, target=vecs[r])


@dataclass(frozen=True)
class AuditRecord:
    code: ParityCode
    alpha: float
    total: float
    bound: float

    @property
    def violated(self) -> bool:
        return self.total > self.bound * (1.0 + TOL.algebraic) + TOL.algebraic**2


def conjecture_audit(
    n_codes: int = 100, seed: int = 0, n_max: int = 8, alpha_max: float = 0.2
) -> list[AuditRecord]:
    """Compare exact_total_info with the exact sum bound on random codes."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_codes):
        code = random_code(rng, n_max=n_max)
        alpha = float(rng.uniform(0.0, alpha_max))
        out.append(AuditRecord(code, alpha, exact_total_info(code, alpha),
                               sum_bound(code, alpha, "exact")))
    return out


def audit_report(records: Sequence[AuditRecord]) -> str:
    """Plain-text summary listing every violation found."""
    bad = [r for r in records if r.violated]
    lines = [f"conjecture audit: {len(records)} codes, {len(bad)} violations"]
    # r = 0 codes meet the bound with equality, so rank the others
    pool = [r for r in records if r.code.r > 0 and r.bound > 0] or list(records)
    worst = max(pool, key=lambda r: r.total / r.bound if r.bound > 0 else 0.0)
    if worst.bound > 0:
        lines.append(f"largest total/bound ratio: {worst.total / worst.bound:.6f} "
                     f"(n={worst.code.n}, r={worst.code.r}, alpha={worst.alpha:.4f})")
    for r in bad:
        lines.append(f"VIOLATION code={json.dumps(r.code.to_dict(), sort_keys=True)} "
                     f"alpha={r.alpha!r} total={r.total!r} bound={r.bound!r}")
    return "\n".join(lines)
