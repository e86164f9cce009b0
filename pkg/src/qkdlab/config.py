"""Numerical tolerances and sizing caps shared by every module."""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    """Tolerance record used for validation throughout the package.

    Attributes:
        algebraic: Bound for exact algebraic identities (unitarity, tensor
            associativity, closed-form agreement).
        physical: Bound for physicality checks (Hermiticity, unit trace,
            POVM completeness).
        eigen: Lower bound allowed for the smallest eigenvalue of a
            positive operator.
        max_dim: Largest dense Hilbert-space dimension we allocate.
        max_blocks: Largest coset-block count for code-conditioned sums.
        max_block_size: Largest coset-block size.
    """

    algebraic: float = 1e-12
    physical: float = 1e-10
    eigen: float = 1e-8
    max_dim: int = 2**14
    max_blocks: int = 2**20
    max_block_size: int = 2**10

    def with_overrides(self, **kwargs: float) -> "Tolerances":
        return replace(self, **kwargs)


TOL = Tolerances()
