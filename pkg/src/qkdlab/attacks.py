"""Single-probe eavesdropping attacks and the bounds they imply.

Every attack is a 4×4 unitary on probe ⊗ signal, with the probe on the
most significant qubit and prepared in (1, 0). Eve keeps her probe until
all classical data is public and then measures it jointly with the others.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .binary_info import bsc_info_bias
from .codes import security_bound
from .config import TOL
from .hilbert import (
    check_density,
    check_unitary,
    conditioned_trace,
    density,
    partial_trace,
    to_bloch,
)

PROBE_ZERO = np.array([1.0, 0.0], dtype=complex)
SCHEMES = ("four-state", "two-state")


@dataclass(frozen=True)
class ProbeAttack:
    """A probe-signal interaction.

    Attributes:
        label: ``"ehpp"``, ``"weak-swap"`` or ``"weak-measure"``.
        joint: Unitary on probe ⊗ signal.
        params: Parameters that produced the unitary.
        probe_init: Initial probe state.
    """

    label: str
    joint: np.ndarray
    params: dict = field(default_factory=dict)
    probe_init: np.ndarray = field(default_factory=lambda: PROBE_ZERO.copy())

    def __post_init__(self) -> None:
        check_unitary(self.joint)

    def apply(self, signal: np.ndarray) -> np.ndarray:
        """Joint state after the interaction with a pure signal."""
        return self.joint @ np.kron(self.probe_init, np.asarray(signal, dtype=complex))

    def bob_state(self, signal: np.ndarray) -> np.ndarray:
        return partial_trace(density(self.apply(signal)), keep=[1])

    def eve_state(self, signal: np.ndarray) -> np.ndarray:
        return partial_trace(density(self.apply(signal)), keep=[0])


def ehpp_probe_angle(theta: float, theta_prime: float) -> float:
    """Probe half-angle α solving cos 2θ = cos 2θ′ cos 2α."""
    ratio = math.cos(2 * theta) / math.cos(2 * theta_prime)
    if ratio > 1.0 + TOL.algebraic:
        raise ValueError("no real probe angle for theta_prime > theta")
    return 0.5 * math.acos(min(ratio, 1.0))


def ehpp_attack(theta: float, theta_prime: float) -> ProbeAttack:
    """Translucent attack moving the pair (c_θ, ±s_θ) to (c_θ′, ±s_θ′).

    The probe ends in (cos α, ±sin α) correlated with the signal value.
    """
    if not (0.0 < theta_prime <= theta < math.pi / 4):
        raise ValueError("need 0 < theta_prime <= theta < pi/4")
    a = ehpp_probe_angle(theta, theta_prime)
    ca, sa = math.cos(a), math.sin(a)
    ct, st = math.cos(theta), math.sin(theta)
    cp, sp = math.cos(theta_prime), math.sin(theta_prime)
    u = np.array(
        [
            [ca * cp / ct, 0, 0, -sa * sp / ct],
            [0, ca * sp / st, -sa * cp / st, 0],
            [0, sa * cp / st, ca * sp / st, 0],
            [sa * sp / ct, 0, 0, ca * cp / ct],
        ],
        dtype=complex,
    )
    params = {"theta": theta, "theta_prime": theta_prime, "alpha": a}
    return ProbeAttack("ehpp", u, params)


def ehpp_from_error(theta: float, p_e: float) -> ProbeAttack:
    """Translucent attack producing test error rate p_e = sin²(θ − θ′)."""
    if not 0.0 < p_e < math.sin(theta) ** 2:
        raise ValueError("error rate out of the translucent attack's range")
    return ehpp_attack(theta, theta - math.asin(math.sqrt(p_e)))


def weak_swap(gamma: float) -> ProbeAttack:
    """Partial swap rotating |01⟩ and |10⟩ by γ; γ = π/2 is the full swap."""
    if not 0.0 <= gamma <= math.pi / 2 + TOL.algebraic:
        raise ValueError("gamma outside [0, pi/2]")
    c, s = math.cos(gamma), math.sin(gamma)
    u = np.array(
        [[1, 0, 0, 0], [0, c, -s, 0], [0, s, c, 0], [0, 0, 0, 1]], dtype=complex
    )
    return ProbeAttack("weak-swap", u, {"gamma": gamma})


_TO_Y = np.kron(np.eye(2), np.diag([1.0, 1.0j]))


def weak_measure(gamma: float, basis: str = "x") -> ProbeAttack:
    """Weak measurement of the signal in the x (or y) basis.

    γ = π/4 copies the x value onto the probe; the y variant is the x gate
    conjugated by diag(1, i) on the signal.
    """
    if not 0.0 <= gamma <= math.pi / 2 + TOL.algebraic:
        raise ValueError("gamma outside [0, pi/2]")
    if basis not in ("x", "y"):
        raise ValueError("basis must be 'x' or 'y'")
    c, s = math.cos(gamma), math.sin(gamma)
    u = np.array(
        [[c, 0, 0, -s], [0, c, -s, 0], [0, s, c, 0], [s, 0, 0, c]], dtype=complex
    )
    if basis == "y":
        u = _TO_Y @ u @ _TO_Y.conj().T
    return ProbeAttack("weak-measure", u, {"gamma": gamma, "basis": basis})


def four_state_signal(m: int) -> np.ndarray:
    """(1, i^m)/√2; m = 0, 2 span the x basis and m = 1, 3 the y basis."""
    return np.array([1.0, 1j**m], dtype=complex) / math.sqrt(2.0)


def two_state_signals(theta: float) -> tuple[np.ndarray, np.ndarray]:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([c, s], dtype=complex), np.array([c, -s], dtype=complex)


def two_state_tests(theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Vectors φ₀′ ⟂ φ₀ and φ₁′ ⟂ φ₁ whose detection is conclusive."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([s, -c], dtype=complex), np.array([s, c], dtype=complex)


def pair_bias(rho0: np.ndarray, rho1: np.ndarray) -> float:
    """Optimal standard-measurement bias |r₀ − r₁|/4 for an equal-radius pair."""
    r0, r1 = to_bloch(rho0).as_array(), to_bloch(rho1).as_array()
    return float(np.linalg.norm(r0 - r1) / 4.0)


@dataclass(frozen=True)
class PureBound:
    """Two pure-state pairs that dominate a symmetric mixed pair.

    Construction ``"mixed-anchor"`` writes ρ_p = mΦ_p + (1 − m)·I/2 and
    ``"down-anchor"`` writes ρ_p = mΦ_p + (1 − m)|1⟩⟨1|. Either pure pair
    (cos β, ±sin β) carries at least as much information as the mixed pair.
    """

    x: float
    z: float
    beta_a: float
    m_a: float
    beta_b: float
    m_b: float

    @property
    def valid_a(self) -> bool:
        return self.beta_a <= math.pi / 4 + TOL.algebraic

    @property
    def label(self) -> str:
        if self.valid_a and self.beta_a < self.beta_b:
            return "mixed-anchor"
        return "down-anchor"

    @property
    def beta(self) -> float:
        """Smallest valid half-angle."""
        return self.beta_a if self.label == "mixed-anchor" else self.beta_b

    def selected(self) -> tuple[str, float]:
        """Construction used for curves: mixed-anchor below π/8, else down-anchor."""
        if self.valid_a and self.beta_a < math.pi / 8:
            return "mixed-anchor", self.beta_a
        return "down-anchor", self.beta_b


def pure_bound(eve_states: tuple[np.ndarray, np.ndarray]) -> PureBound:
    """Bounding pure-state half-angle for a symmetric pair of Eve states.

    The pair must share its z coordinate and have opposite transverse
    components; a rotation about z aligns them with the x axis.
    """
    r0 = to_bloch(eve_states[0]).as_array()
    r1 = to_bloch(eve_states[1]).as_array()
    if abs(r0[2] - r1[2]) > TOL.physical or np.linalg.norm(r0[:2] + r1[:2]) > TOL.physical:
        raise ValueError("Eve states are not a symmetric pair")
    x = float(np.hypot(r0[0], r0[1]))
    z = float(r0[2])
    beta_a = 0.5 * math.atan2(x, z)
    m_a = float(np.hypot(x, z))
    beta_b = math.atan2(x, z + 1.0)
    m_b = (z + 1.0) / (1.0 + math.cos(2.0 * beta_b))
    return PureBound(x, z, beta_a, m_a, beta_b, m_b)


@dataclass(frozen=True)
class BasisAssessment:
    basis: str
    p_e: float
    eve_states: tuple[np.ndarray, np.ndarray]
    eve_info: float


@dataclass(frozen=True)
class AttackAssessment:
    """Error rate and Eve's side of one attack against one scheme.

    Attributes:
        scheme: ``"four-state"`` or ``"two-state"``.
        attack: Attack label.
        p_e: Average induced error rate per conclusive bit.
        eve_states: Eve's states for bit values 0 and 1 (the most informative
            basis for the four-state scheme).
        eve_info: Optimal single-probe information on one bit.
        bound: Bounding pure-state constructions.
        per_basis: Per-basis details (four-state only).
        verification_p_e: Error on a (1, 0) verification state, if requested.
    """

    scheme: str
    attack: str
    p_e: float
    eve_states: tuple[np.ndarray, np.ndarray]
    eve_info: float
    bound: PureBound
    per_basis: tuple[BasisAssessment, ...] = ()
    verification_p_e: float | None = None

    @property
    def beta(self) -> float:
        return self.bound.selected()[1]

    def bound_curve(self, ns: list[int]) -> dict[int, float]:
        return {n: security_bound(n, self.beta) for n in ns}


def _assess_four_state(attack: ProbeAttack) -> AttackAssessment:
    per_basis = []
    for basis, m0 in (("x", 0), ("y", 1)):
        errs, eve = [], []
        for m in (m0, m0 + 2):
            phi, wrong = four_state_signal(m), four_state_signal(m + 2)
            rho_b = attack.bob_state(phi)
            errs.append(float((wrong.conj() @ rho_b @ wrong).real))
            eve.append(check_density(attack.eve_state(phi)))
        pair = (eve[0], eve[1])
        per_basis.append(BasisAssessment(basis, float(np.mean(errs)), pair,
                                         bsc_info_bias(pair_bias(*pair))))
    best = max(per_basis, key=lambda b: b.eve_info)
    return AttackAssessment(
        scheme="four-state",
        attack=attack.label,
        p_e=float(np.mean([b.p_e for b in per_basis])),
        eve_states=best.eve_states,
        eve_info=best.eve_info,
        bound=pure_bound(best.eve_states),
        per_basis=tuple(per_basis),
    )


def _assess_two_state(attack: ProbeAttack, theta: float, verification: bool) -> AttackAssessment:
    signals = two_state_signals(theta)
    tests = two_state_tests(theta)
    announce = 0.5 * (density(tests[0]) + density(tests[1]))
    errs, eve = [], []
    for phi, test in zip(signals, tests):
        joint = density(attack.apply(phi))
        rho_b = partial_trace(joint, keep=[1])
        errs.append(float((test.conj() @ rho_b @ test).real))
        rho_e, w = conditioned_trace(joint, announce, keep=[0])
        eve.append(check_density(rho_e / w))
    pair = (eve[0], eve[1])
    ver = None
    if verification:
        ver = float(attack.bob_state(np.array([1.0, 0.0]))[1, 1].real)
    return AttackAssessment(
        scheme="two-state",
        attack=attack.label,
        p_e=float(np.mean(errs)),
        eve_states=pair,
        eve_info=bsc_info_bias(pair_bias(*pair)),
        bound=pure_bound(pair),
        verification_p_e=ver,
    )


def assess(
    attack: ProbeAttack,
    scheme: str,
    theta: float | None = None,
    verification: bool = False,
) -> AttackAssessment:
    """Error rate, Eve's states and bounding angle for an attack.

    Args:
        attack: The probe interaction.
        scheme: ``"four-state"`` (x/y bases) or ``"two-state"``.
        theta: Signal half-angle, required for the two-state scheme.
        verification: Also report the error seen on a (1, 0) test state
            (two-state only).
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    if scheme == "four-state":
        if attack.label == "ehpp":
            raise ValueError("the translucent attack targets the two-state scheme")
        if verification:
            raise ValueError("verification states belong to the two-state scheme")
        return _assess_four_state(attack)
    if theta is None or not 0.0 < theta < math.pi / 4:
        raise ValueError("two-state assessment needs 0 < theta < pi/4")
    if attack.label == "ehpp" and abs(attack.params["theta"] - theta) > TOL.algebraic:
        raise ValueError("translucent attack was built for a different theta")
    if attack.label == "weak-measure":
        raise ValueError("weak measurement is modeled for the four-state scheme only")
    return _assess_two_state(attack, theta, verification)


def _two_state_swap_error(gamma: float, theta: float) -> float:
    c, s = math.cos(theta), math.sin(theta)
    return s**2 * c**2 * (1 - math.cos(gamma)) ** 2 + s**4 * math.sin(gamma) ** 2


def attack_for_error(attack: str, scheme: str, p_e: float, theta: float | None = None) -> ProbeAttack:
    """Invert the error-rate map of an attack family.

    Raises:
        ValueError: If p_e is not reachable by the family.
    """
    if p_e < 0:
        raise ValueError("negative error rate")
    if attack == "weak-swap" and scheme == "four-state":
        if p_e > 0.5:
            raise ValueError("weak swap reaches p_e <= 1/2 only")
        return weak_swap(2.0 * math.asin(math.sqrt(p_e)))
    if attack == "weak-swap" and scheme == "two-state":
        if theta is None:
            raise ValueError("two-state curves need theta")
        top = _two_state_swap_error(math.pi / 2, theta)
        if p_e > top:
            raise ValueError("error rate beyond the weak swap's range")
        if p_e == 0:
            return weak_swap(0.0)
        g = brentq(lambda g: _two_state_swap_error(g, theta) - p_e, 0.0, math.pi / 2,
                   xtol=1e-15, rtol=1e-15)
        return weak_swap(g)
    if attack == "weak-measure" and scheme == "four-state":
        if p_e > 0.5:
            raise ValueError("weak measurement reaches p_e <= 1/2 only")
        return weak_measure(math.asin(math.sqrt(2.0 * p_e)))
    if attack == "ehpp" and scheme == "two-state":
        if theta is None:
            raise ValueError("two-state curves need theta")
        return ehpp_from_error(theta, p_e)
    raise ValueError(f"attack {attack!r} is not modeled for scheme {scheme!r}")


def bound_curve(
    attack: str,
    scheme: str,
    n: int,
    p_es: list[float],
    theta: float | None = None,
) -> dict[float, float]:
    """Bound on Eve's parity information as a function of the error rate.

    For the weak measurement, Eve learns nothing unless her basis matches on
    every one of the n bits, so the matched-basis bound is weighted by 2⁻ⁿ.
    """
    out = {}
    for p_e in p_es:
        att = attack_for_error(attack, scheme, p_e, theta)
        if p_e == 0:
            out[p_e] = 0.0
            continue
        res = assess(att, scheme, theta)
        if attack == "weak-measure":
            matched = next(b for b in res.per_basis if b.basis == att.params["basis"])
            beta = pure_bound(matched.eve_states).selected()[1]
            out[p_e] = 2.0**-n * security_bound(n, beta)
        else:
            out[p_e] = security_bound(n, res.beta)
    return out


def intercept_resend_stats(eta: float) -> tuple[float, float]:
    """Error rate η/4 and Eve's information η/2 when a fraction η is measured."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must be a probability")
    return eta / 4.0, eta / 2.0
