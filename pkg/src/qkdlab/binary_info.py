"""Binary channel information and optimal discrimination of two states.

All entropies are in bits. The pair of signal states is parametrized by a
half-angle ``alpha``: u = (cos α, sin α) and v = (cos α, −sin α). An
equal-determinant mixed pair is obtained by shrinking the off-diagonal
element from cos α sin α to cos α sin α − r_mix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import TOL


def _check_prob(p: float, name: str = "p") -> float:
    p = float(p)
    if not (-TOL.physical <= p <= 1.0 + TOL.physical) or math.isnan(p):
        raise ValueError(f"{name}={p} is not a probability")
    return min(max(p, 0.0), 1.0)


def binary_entropy(p: float) -> float:
    """Shannon entropy of a biased coin, with 0·log 0 = 0."""
    p = _check_prob(p)
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def bsc_info_bias(eta: float) -> float:
    """Information 1 − H(1/2 − η) of a binary symmetric channel with bias η.

    Accurate to full relative precision for tiny η, where evaluating
    1 − H(p) directly would cancel catastrophically.
    """
    u = 2.0 * abs(float(eta))
    if u > 1.0 + TOL.physical or math.isnan(u):
        raise ValueError(f"bias {eta} outside [-1/2, 1/2]")
    u = min(u, 1.0)
    if u == 1.0:
        return 1.0
    if u < 0.5:
        # (1+u)ln(1+u) + (1-u)ln(1-u) = 2u·atanh(u) + ln(1-u²)
        val = 2.0 * u * math.atanh(u) + math.log1p(-u * u)
        return val / (2.0 * math.log(2.0))
    return 1.0 - binary_entropy(0.5 - 0.5 * u)


def bsc_info(p_e: float) -> float:
    """Mutual information 1 − H(p_e) of a binary symmetric channel."""
    p_e = _check_prob(p_e, "p_e")
    return bsc_info_bias(0.5 - p_e)


def bec_info(p_q: float) -> float:
    """Mutual information 1 − p_q of a binary erasure channel."""
    return 1.0 - _check_prob(p_q, "p_q")


@dataclass(frozen=True)
class TwoStateSource:
    """Symmetric pair of signal states.

    Attributes:
        alpha: Half-angle between each state and the z axis, 0 ≤ α ≤ π/4.
        r_mix: Reduction of the off-diagonal element; 0 for pure states.
    """

    alpha: float
    r_mix: float = 0.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.alpha <= math.pi / 4 + TOL.algebraic):
            raise ValueError(f"alpha={self.alpha} outside [0, pi/4]")
        if self.r_mix < 0.0:
            raise ValueError("r_mix must be non-negative")
        if self.r_mix > 0.0 and self.r_mix >= self.c * self.s:
            raise ValueError("r_mix must stay below cos(alpha)·sin(alpha)")

    @property
    def c(self) -> float:
        return math.cos(self.alpha)

    @property
    def s(self) -> float:
        return math.sin(self.alpha)

    @property
    def overlap(self) -> float:
        """cos 2α, the inner product of the pure pair."""
        return math.cos(2.0 * self.alpha)

    @property
    def off_diagonal(self) -> float:
        """cos α sin α − r_mix, which is also the optimal discrimination bias."""
        return self.c * self.s - self.r_mix

    @property
    def is_pure(self) -> bool:
        return self.r_mix == 0.0

    def densities(self) -> tuple[np.ndarray, np.ndarray]:
        """The two signal density matrices (value 0, value 1)."""
        c2, s2, d = self.c**2, self.s**2, self.off_diagonal
        rho0 = np.array([[c2, d], [d, s2]], dtype=complex)
        rho1 = np.array([[c2, -d], [-d, s2]], dtype=complex)
        return rho0, rho1


def optimal_pair_info(src: TwoStateSource) -> tuple[float, float]:
    """Error and information of the optimal standard measurement on the pair.

    For mixed pairs this assumes Levitin's claim that a standard measurement
    is optimal for two states of equal determinant.

    Returns:
        (error probability, information in bits)
    """
    bias = src.off_diagonal
    return 0.5 - bias, bsc_info_bias(bias)


def _primed(alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Vectors orthogonal to u and to v respectively."""
    c, s = math.cos(alpha), math.sin(alpha)
    return np.array([-s, c], dtype=complex), np.array([s, c], dtype=complex)


def conclusive_povm(alpha: float) -> tuple[tuple[np.ndarray, np.ndarray, np.ndarray], float]:
    """Optimal unambiguous discrimination of the pure pair.

    Returns:
        ((A_v, A_u, A_w), information) where A_v only fires on v, A_u only on
        u, A_w is the inconclusive element, and the information is 1 − cos 2α.
    """
    if not (0.0 < alpha <= math.pi / 4 + TOL.algebraic):
        raise ValueError("conclusive POVM needs 0 < alpha <= pi/4")
    big_c = math.cos(2.0 * alpha)
    u_perp, v_perp = _primed(alpha)
    a_v = np.outer(u_perp, u_perp.conj()) / (1.0 + big_c)
    a_u = np.outer(v_perp, v_perp.conj()) / (1.0 + big_c)
    a_w = np.diag([2.0 * big_c / (1.0 + big_c), 0.0]).astype(complex)
    return (a_v, a_u, a_w), bec_info(max(big_c, 0.0))


def simple_povm(alpha: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unambiguous POVM built from equal-weight halves of the two tests.

    Its inconclusive probability on either input is (1 + cos² 2α) / 2.

    Returns:
        (A_v, A_u, A_w) as in ``conclusive_povm``.
    """
    if not (0.0 < alpha <= math.pi / 4 + TOL.algebraic):
        raise ValueError("simple POVM needs 0 < alpha <= pi/4")
    c, s = math.cos(alpha), math.sin(alpha)
    u = np.array([c, s], dtype=complex)
    v = np.array([c, -s], dtype=complex)
    u_perp, v_perp = _primed(alpha)
    a_v = 0.5 * np.outer(u_perp, u_perp.conj())
    a_u = 0.5 * np.outer(v_perp, v_perp.conj())
    a_w = 0.5 * (np.outer(u, u.conj()) + np.outer(v, v.conj()))
    return a_v, a_u, a_w
