"""Monte Carlo sessions of prepare-and-measure and entanglement-based QKD.

A session samples every position, sifts, estimates the error rate on a
random subset, corrects the rest with the Hamming H₃ code in 7-bit groups
and keeps the parity of each corrected group as one final key bit. Every
position's record, plus the public syndromes, is kept in the transcript so
Eve's side information can be evaluated offline.

Per-position sampling is vectorized; each session consumes one seeded
generator in a fixed order, so a transcript depends only on its config.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .attacks import ProbeAttack, assess, pure_bound
from .codes import (
    ParityCode,
    exact_total_info,
    hamming_code,
    popcount,
    span_closure,
    syndrome,
    syndrome_decode,
)
from .error_reduction import BoundedNoise, RurCode, apply_local_unitaries, encode_rur
from .hilbert import BELL_LABELS, bell_probabilities, density

SCHEMES = ("bb84", "b92", "epr", "reversed-epr", "qec")
H3 = hamming_code(3)
GROUP = H3.n

_R2 = 1.0 / math.sqrt(2.0)
# index = 2·basis + bit; bit 0 is ↑ in z and ← in x
BASIS_STATES = {
    "zx": np.array([[1, 0], [0, 1], [_R2, -_R2], [_R2, _R2]], dtype=complex),
    "xy": np.array([[_R2, _R2], [_R2, -_R2], [_R2, 1j * _R2], [_R2, -1j * _R2]], dtype=complex),
}
BASIS_NAMES = {"zx": ("z", "x"), "xy": ("x", "y")}

EVE_NONE, EVE_PROBE, EVE_MEASURE = 0, 1, 2


class InsufficientDataError(ValueError):
    """Too few sifted positions to run the post-processing pipeline."""


@dataclass(frozen=True)
class InterceptResend:
    """Eve measures a fraction ``eta`` of the qubits in a random protocol basis."""

    eta: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must be a probability")


@dataclass(frozen=True)
class ProbeChannel:
    """Eve attaches a probe to every qubit with the given interaction."""

    attack: ProbeAttack


@dataclass(frozen=True)
class SessionConfig:
    """Parameters of one simulated session.

    Attributes:
        scheme: One of SCHEMES.
        qubits: Number of positions sent (signals or pairs).
        theta: Signal half-angle of the two-state scheme.
        eve: None, InterceptResend or ProbeChannel.
        noise: Depolarizing probability per traveling qubit.
        chi: Bound of random one-qubit unitaries per traveling qubit.
        estimation_fraction: Share of sifted positions spent on error estimation.
        seed: Seed of the session generator.
        bases: Basis pair of the four-state scheme, ``"zx"`` or ``"xy"``.
        mode: Center operation of the reversed scheme,
            ``"singlet_only"`` or ``"bell_operator"``.
        rur_n: Block length of the quantum repetition code (qec scheme).
    """

    scheme: str
    qubits: int
    theta: float | None = None
    eve: InterceptResend | ProbeChannel | None = None
    noise: float = 0.0
    chi: float = 0.0
    estimation_fraction: float = 0.25
    seed: int = 0
    bases: str = "zx"
    mode: str = "bell_operator"
    rur_n: int = 2

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.qubits < 8:
            raise ValueError("a session needs at least 8 positions")
        for name in ("noise", "estimation_fraction"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be a probability")
        if self.chi < 0:
            raise ValueError("chi must be non-negative")
        if self.bases not in BASIS_STATES:
            raise ValueError("bases must be 'zx' or 'xy'")
        if self.mode not in ("singlet_only", "bell_operator"):
            raise ValueError("mode must be 'singlet_only' or 'bell_operator'")

    def describe(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k != "eve"}
        d["eve"] = describe_eve(self.eve)
        return d


def describe_eve(eve: InterceptResend | ProbeChannel | None) -> dict | None:
    if eve is None:
        return None
    if isinstance(eve, InterceptResend):
        return {"model": "intercept_resend", "eta": eve.eta}
    return {"model": "probe_channel", "attack": eve.attack.label,
            **{k: v for k, v in eve.attack.params.items()}}


@dataclass
class SessionTranscript:
    """Full record of one session.

    Per-position arrays use −1 for "not applicable". ``bob_outcome`` holds
    Bob's raw measurement result (−1 for an inconclusive or discarded
    position); ``alice_key``/``bob_key`` are the bits each party would
    contribute to the raw key at that position.
    """

    config: SessionConfig
    alice_basis: np.ndarray
    alice_bit: np.ndarray
    eve_action: np.ndarray
    eve_basis: np.ndarray
    eve_bit: np.ndarray
    bob_basis: np.ndarray
    bob_outcome: np.ndarray
    alice_key: np.ndarray
    bob_key: np.ndarray
    sifted: np.ndarray
    estimation: np.ndarray
    group: np.ndarray
    group_positions: list[list[int]]
    syndromes: list[tuple[int, ...]]
    corrections: list[bool]
    key_material_alice: np.ndarray
    key_material_bob: np.ndarray
    final_key_alice: np.ndarray
    final_key_bob: np.ndarray
    n_ungrouped: int
    observed_error_rate: float
    sifted_error_rate: float
    eve_info_bound: float
    extra: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def n_sifted(self) -> int:
        return int(self.sifted.sum())

    @property
    def n_estimated(self) -> int:
        return int(self.estimation.sum())

    @property
    def final_key(self) -> np.ndarray:
        return self.final_key_alice

    def summary(self) -> dict:
        km = self.key_material_alice.size
        return {
            "scheme": self.config.scheme,
            "config": self.config.describe(),
            "positions": int(self.sifted.size),
            "sifted": self.n_sifted,
            "sift_fraction": self.n_sifted / self.sifted.size,
            "estimated": self.n_estimated,
            "groups": len(self.group_positions),
            "ungrouped": self.n_ungrouped,
            "key_material": km,
            "final_key_len": int(self.final_key_alice.size),
            "observed_error_rate": self.observed_error_rate,
            "sifted_error_rate": self.sifted_error_rate,
            "residual_errors": int((self.key_material_alice != self.key_material_bob).sum()),
            "final_key_mismatches": int((self.final_key_alice != self.final_key_bob).sum()),
            "eve_info_bound": self.eve_info_bound,
            "discarded": int(self.extra["discarded"].sum()) if "discarded" in self.extra else 0,
        }

    def records(self) -> Iterator[dict]:
        names = BASIS_NAMES.get(self.config.bases, ("0", "1"))
        eve_names = {EVE_NONE: "none", EVE_PROBE: "probe", EVE_MEASURE: "measure"}
        for i in range(self.sifted.size):
            rec = {
                "pos": i,
                "alice_basis": int(self.alice_basis[i]),
                "alice_bit": int(self.alice_bit[i]),
                "eve": eve_names[int(self.eve_action[i])],
                "bob_basis": int(self.bob_basis[i]),
                "bob_outcome": int(self.bob_outcome[i]),
                "sifted": bool(self.sifted[i]),
                "estimation": bool(self.estimation[i]),
                "group": int(self.group[i]),
            }
            if self.config.scheme in ("bb84", "qec"):
                rec["alice_basis_name"] = names[int(self.alice_basis[i])]
            if self.eve_action[i] == EVE_MEASURE:
                rec["eve_basis"] = int(self.eve_basis[i])
                rec["eve_bit"] = int(self.eve_bit[i])
            for k, arr in self.extra.items():
                v = arr[i]
                rec[k] = v.item() if hasattr(v, "item") else v
            yield rec

    def public_record(self) -> dict:
        """Classical data announced during the session (Eve's side information)."""
        return {
            "bases": {"alice": self.alice_basis.tolist(), "bob": self.bob_basis.tolist()},
            "sifted": np.flatnonzero(self.sifted).tolist(),
            "estimation": np.flatnonzero(self.estimation).tolist(),
            "groups": self.group_positions,
            "syndromes": [list(s) for s in self.syndromes],
            "masks": "one full-parity mask per group",
        }

    def write(self, directory: str | Path, stem: str = "session") -> tuple[Path, Path]:
        """Write ``<stem>.jsonl`` (one record per position) and ``<stem>.summary.json``."""
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        rec_path = d / f"{stem}.jsonl"
        with rec_path.open("w") as fh:
            for rec in self.records():
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
        summ_path = d / f"{stem}.summary.json"
        payload = {"summary": self.summary(), "public": self.public_record()}
        summ_path.write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")
        return rec_path, summ_path


def privacy_amplify(bits: Sequence[int], masks: Sequence[Sequence[int]]) -> np.ndarray:
    """Key bits as parities of the masked substrings.

    Args:
        bits: Reconciled string.
        masks: Each mask lists the positions whose parity gives one key bit.
    """
    arr = np.asarray(bits, dtype=np.int64)
    out = []
    for m in masks:
        idx = np.asarray(m, dtype=np.int64)
        if idx.size == 0:
            raise ValueError("empty privacy-amplification mask")
        if idx.min() < 0 or idx.max() >= arr.size:
            raise ValueError("mask position out of range")
        out.append(int(arr[idx].sum() & 1))
    return np.array(out, dtype=np.int8)


def intercept_parity_info(eta: float, code: ParityCode = H3) -> float:
    """Probability that intercept-resend Eve learns the target parity.

    Eve knows a sifted bit when she measured it in Alice's basis (rate η/2)
    and nothing about the others. Given the public syndromes she knows the
    target parity iff some row combination v satisfies supp(v ⊕ v_d) ⊆ known.
    """
    kappa = eta / 2.0
    n = code.n
    needed = [w ^ code.target for w in span_closure(code, include_target=False)]
    total = 0.0
    for known in range(1 << n):
        if any(w & ~known == 0 for w in needed):
            k = popcount(known)
            total += kappa**k * (1.0 - kappa) ** (n - k)
    return total


def _depolarize(p0: np.ndarray, noise: float) -> np.ndarray:
    return (1.0 - noise) * p0 + 0.5 * noise


def _rotate(rhos: np.ndarray, u: np.ndarray) -> np.ndarray:
    return u @ rhos @ np.conj(np.swapaxes(u, -1, -2))


def _born(vecs: np.ndarray, rhos: np.ndarray) -> np.ndarray:
    return np.einsum("li,lij,lj->l", vecs.conj(), rhos, vecs).real


def _eve_bound(config: SessionConfig) -> float:
    eve = config.eve
    if eve is None:
        return 0.0
    if isinstance(eve, InterceptResend):
        return intercept_parity_info(eve.eta)
    att = eve.attack
    scheme = "two-state" if config.scheme == "b92" else "four-state"
    if scheme == "four-state" and config.bases != "xy":
        return float("nan")
    res = assess(att, scheme, config.theta)
    if att.label == "weak-measure":
        matched = next(b for b in res.per_basis if b.basis == att.params["basis"])
        beta = pure_bound(matched.eve_states).selected()[1]
        return 2.0**-GROUP * exact_total_info(H3, beta)
    return exact_total_info(H3, res.beta)


def _postprocess(
    config: SessionConfig,
    rng: np.random.Generator,
    fields: dict[str, np.ndarray],
    extra: dict[str, np.ndarray] | None = None,
) -> SessionTranscript:
    sifted = fields["sifted"].astype(bool)
    a_key, b_key = fields["alice_key"], fields["bob_key"]
    n_pos = sifted.size
    s_idx = np.flatnonzero(sifted)
    n_est = int(round(config.estimation_fraction * s_idx.size))
    if s_idx.size - n_est < GROUP:
        raise InsufficientDataError(
            f"{s_idx.size} sifted positions leave no complete {GROUP}-bit group"
        )
    est_idx = np.sort(rng.choice(s_idx, size=n_est, replace=False)) if n_est else np.array([], int)
    estimation = np.zeros(n_pos, dtype=bool)
    estimation[est_idx] = True
    rest = s_idx[~estimation[s_idx]]
    order = rest[rng.permutation(rest.size)]
    n_groups = order.size // GROUP
    n_ungrouped = order.size - n_groups * GROUP
    group = np.full(n_pos, -1, dtype=np.int64)
    group_positions, syndromes, corrections = [], [], []
    km_a, km_b = [], []
    codes_by_syndrome: dict[tuple[int, ...], ParityCode] = {}
    for g in range(n_groups):
        pos = order[g * GROUP : (g + 1) * GROUP]
        group[pos] = g
        wa = int("".join(str(int(b)) for b in a_key[pos]), 2)
        wb = int("".join(str(int(b)) for b in b_key[pos]), 2)
        syn = syndrome(wa, H3)
        code = codes_by_syndrome.setdefault(
            syn, ParityCode(H3.n, H3.rows, syn, H3.target)
        )
        fixed, flipped = syndrome_decode(wb, code)
        group_positions.append(pos.tolist())
        syndromes.append(syn)
        corrections.append(flipped)
        km_a.extend(int(c) for c in format(wa, f"0{GROUP}b"))
        km_b.extend(int(c) for c in format(fixed, f"0{GROUP}b"))
    km_a_arr = np.array(km_a, dtype=np.int8)
    km_b_arr = np.array(km_b, dtype=np.int8)
    masks = [range(g * GROUP, (g + 1) * GROUP) for g in range(n_groups)]
    if n_groups * GROUP != s_idx.size - n_est - n_ungrouped:
        raise AssertionError("key material length does not match the pipeline arithmetic")
    errs = a_key[s_idx] != b_key[s_idx]
    return SessionTranscript(
        config=config,
        alice_basis=fields["alice_basis"],
        alice_bit=fields["alice_bit"],
        eve_action=fields.get("eve_action", np.zeros(n_pos, dtype=np.int8)),
        eve_basis=fields.get("eve_basis", np.full(n_pos, -1, dtype=np.int8)),
        eve_bit=fields.get("eve_bit", np.full(n_pos, -1, dtype=np.int8)),
        bob_basis=fields["bob_basis"],
        bob_outcome=fields["bob_outcome"],
        alice_key=a_key,
        bob_key=b_key,
        sifted=sifted,
        estimation=estimation,
        group=group,
        group_positions=group_positions,
        syndromes=syndromes,
        corrections=corrections,
        key_material_alice=km_a_arr,
        key_material_bob=km_b_arr,
        final_key_alice=privacy_amplify(km_a_arr, masks),
        final_key_bob=privacy_amplify(km_b_arr, masks),
        n_ungrouped=n_ungrouped,
        observed_error_rate=float(errs[np.searchsorted(s_idx, est_idx)].mean()) if n_est else 0.0,
        sifted_error_rate=float(errs.mean()) if s_idx.size else 0.0,
        eve_info_bound=_eve_bound(config),
        extra=extra or {},
    )


def _signal_noise(config: SessionConfig, rng: np.random.Generator, rhos: np.ndarray) -> np.ndarray:
    if config.chi > 0:
        rhos = _rotate(rhos, BoundedNoise(config.chi).sample(rng, (rhos.shape[0],)))
    return rhos


def run_bb84(config: SessionConfig) -> SessionTranscript:
    """Four-state scheme with optional Eve and channel noise."""
    if config.scheme != "bb84":
        raise ValueError("config is not a bb84 session")
    rng = np.random.default_rng(config.seed)
    n = config.qubits
    states = BASIS_STATES[config.bases]
    a_basis = rng.integers(0, 2, n, dtype=np.int8)
    a_bit = rng.integers(0, 2, n, dtype=np.int8)
    sent = 2 * a_basis + a_bit
    eve_action = np.zeros(n, dtype=np.int8)
    eve_basis = np.full(n, -1, dtype=np.int8)
    eve_bit = np.full(n, -1, dtype=np.int8)
    eve = config.eve
    if isinstance(eve, InterceptResend):
        attacked = rng.random(n) < eve.eta
        e_basis = rng.integers(0, 2, n, dtype=np.int8)
        e_vec = states[2 * e_basis]
        p0 = np.abs(np.einsum("li,li->l", e_vec.conj(), states[sent])) ** 2
        e_bit = (rng.random(n) >= p0).astype(np.int8)
        resent = np.where(attacked, 2 * e_basis + e_bit, sent)
        rhos = np.array([density(v) for v in states])[resent]
        eve_action[attacked] = EVE_MEASURE
        eve_basis[attacked] = e_basis[attacked]
        eve_bit[attacked] = e_bit[attacked]
    elif isinstance(eve, ProbeChannel):
        table = np.array([eve.attack.bob_state(v) for v in states])
        rhos = table[sent]
        eve_action[:] = EVE_PROBE
    else:
        rhos = np.array([density(v) for v in states])[sent]
    rhos = _signal_noise(config, rng, rhos)
    b_basis = rng.integers(0, 2, n, dtype=np.int8)
    p0 = _depolarize(_born(states[2 * b_basis], rhos), config.noise)
    b_bit = (rng.random(n) >= p0).astype(np.int8)
    fields = {
        "alice_basis": a_basis, "alice_bit": a_bit, "bob_basis": b_basis,
        "bob_outcome": b_bit, "alice_key": a_bit, "bob_key": b_bit,
        "sifted": a_basis == b_basis, "eve_action": eve_action,
        "eve_basis": eve_basis, "eve_bit": eve_bit,
    }
    return _postprocess(config, rng, fields)


def b92_states(theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Signals φ₀, φ₁ and the conclusive test vectors φ₀′, φ₁′."""
    c, s = math.cos(theta), math.sin(theta)
    signals = np.array([[c, s], [c, -s]], dtype=complex)
    tests = np.array([[s, -c], [s, c]], dtype=complex)
    return signals, tests


def b92_conclusive_probability(theta: float) -> float:
    """Honest conclusive rate per sent bit, averaged over Bob's two tests."""
    signals, tests = b92_states(theta)
    return 0.5 * sum(abs(np.vdot(tests[t], signals[0])) ** 2 for t in (0, 1))


def run_b92(config: SessionConfig) -> SessionTranscript:
    """Two-state scheme with Bob's two unambiguous tests.

    Test t projects on {φ_t, φ_t′}; detecting φ_t′ is a conclusive "not t",
    so Bob records bit 1 − t. Losses are not modeled separately.
    """
    if config.scheme != "b92":
        raise ValueError("config is not a b92 session")
    theta = config.theta
    if theta is None or not 0.0 < theta < math.pi / 4:
        raise ValueError("two-state sessions need 0 < theta < pi/4")
    if isinstance(config.eve, InterceptResend):
        raise ValueError("intercept-resend is modeled for bb84 only")
    rng = np.random.default_rng(config.seed)
    n = config.qubits
    signals, tests = b92_states(theta)
    a_bit = rng.integers(0, 2, n, dtype=np.int8)
    eve_action = np.zeros(n, dtype=np.int8)
    if isinstance(config.eve, ProbeChannel):
        table = np.array([config.eve.attack.bob_state(v) for v in signals])
        eve_action[:] = EVE_PROBE
    else:
        table = np.array([density(v) for v in signals])
    rhos = _signal_noise(config, rng, table[a_bit])
    test = rng.integers(0, 2, n, dtype=np.int8)
    p_conc = _depolarize(_born(tests[test], rhos), config.noise)
    conclusive = rng.random(n) < p_conc
    bob_key = (1 - test).astype(np.int8)
    fields = {
        "alice_basis": np.full(n, -1, dtype=np.int8), "alice_bit": a_bit,
        "bob_basis": test, "bob_outcome": np.where(conclusive, bob_key, -1).astype(np.int8),
        "alice_key": a_bit, "bob_key": bob_key, "sifted": conclusive,
        "eve_action": eve_action,
    }
    return _postprocess(config, rng, fields)


SINGLET = np.array([0, 1, -1, 0], dtype=complex) * _R2


def run_epr(config: SessionConfig) -> SessionTranscript:
    """Singlet source; both parties measure in random z/x bases.

    Noise acts on Bob's particle. Bob flips his result to match Alice.
    """
    if config.scheme != "epr":
        raise ValueError("config is not an epr session")
    if config.eve is not None:
        raise ValueError("eavesdroppers are not modeled for the epr scheme")
    rng = np.random.default_rng(config.seed)
    n = config.qubits
    states = BASIS_STATES["zx"]
    a_basis = rng.integers(0, 2, n, dtype=np.int8)
    b_basis = rng.integers(0, 2, n, dtype=np.int8)
    pairs = np.broadcast_to(SINGLET, (n, 4)).copy()
    if config.chi > 0:
        u = BoundedNoise(config.chi).sample(rng, (n,))
        eye = np.broadcast_to(np.eye(2, dtype=complex), (n, 2, 2))
        pairs = apply_local_unitaries(pairs, np.stack([eye, u], axis=1))
    probs = np.empty((n, 4))
    for x in (0, 1):
        for y in (0, 1):
            proj = np.einsum("li,lj->lij", states[2 * a_basis + x], states[2 * b_basis + y])
            amp = np.einsum("lij,lij->l", proj.reshape(n, 2, 2).conj(), pairs.reshape(n, 2, 2))
            probs[:, 2 * x + y] = np.abs(amp) ** 2
    probs = (1.0 - config.noise) * probs + 0.25 * config.noise
    outcome = (rng.random(n)[:, None] >= np.cumsum(probs, axis=1)[:, :3]).sum(axis=1)
    a_bit = (outcome // 2).astype(np.int8)
    b_bit = (outcome % 2).astype(np.int8)
    fields = {
        "alice_basis": a_basis, "alice_bit": a_bit, "bob_basis": b_basis,
        "bob_outcome": b_bit, "alice_key": a_bit, "bob_key": (1 - b_bit).astype(np.int8),
        "sifted": a_basis == b_basis,
    }
    return _postprocess(config, rng, fields)


def _depolarized_table(noise: float) -> np.ndarray:
    states = BASIS_STATES["zx"]
    return np.array([(1 - noise) * density(v) + 0.5 * noise * np.eye(2) for v in states])


def bell_correlation_rule() -> np.ndarray:
    """rule[outcome, basis] = 1 if the outcome means anticorrelated bits.

    Derived from the Bell-state amplitudes: an outcome is correlated in a
    basis when it can occur for two equal states of that basis.
    """
    states = BASIS_STATES["zx"]
    rule = np.zeros((4, 2), dtype=np.int8)
    for b in (0, 1):
        same = bell_probabilities(np.kron(states[2 * b], states[2 * b]))
        rule[:, b] = (same < 1e-12).astype(np.int8)
    return rule


def run_reversed_epr(config: SessionConfig, mode: str | None = None) -> SessionTranscript:
    """Alice and Bob send random four-state signals to a Bell-measuring center.

    In ``singlet_only`` mode only Ψ⁻ results are usable; in
    ``bell_operator`` mode every outcome is kept and the per-outcome
    correlation rule tells Bob whether to flip his bit.
    """
    mode = mode or config.mode
    if config.scheme != "reversed-epr":
        raise ValueError("config is not a reversed-epr session")
    if mode not in ("singlet_only", "bell_operator"):
        raise ValueError("mode must be 'singlet_only' or 'bell_operator'")
    if config.eve is not None or config.chi > 0:
        raise ValueError("only depolarizing noise is modeled for the reversed scheme")
    rng = np.random.default_rng(config.seed)
    n = config.qubits
    single = _depolarized_table(config.noise)
    table = np.array([[bell_probabilities(np.kron(single[i], single[j])) for j in range(4)]
                      for i in range(4)])
    a_basis = rng.integers(0, 2, n, dtype=np.int8)
    a_bit = rng.integers(0, 2, n, dtype=np.int8)
    b_basis = rng.integers(0, 2, n, dtype=np.int8)
    b_bit = rng.integers(0, 2, n, dtype=np.int8)
    probs = table[2 * a_basis + a_bit, 2 * b_basis + b_bit]
    outcome = (rng.random(n)[:, None] >= np.cumsum(probs, axis=1)[:, :3]).sum(axis=1)
    same = a_basis == b_basis
    usable = same & (outcome == 0) if mode == "singlet_only" else same
    anti = bell_correlation_rule()[outcome, a_basis]
    fields = {
        "alice_basis": a_basis, "alice_bit": a_bit, "bob_basis": b_basis,
        "bob_outcome": b_bit, "alice_key": a_bit,
        "bob_key": (b_bit ^ anti).astype(np.int8), "sifted": usable,
    }
    extra = {"bell": np.array([BELL_LABELS[o] for o in outcome], dtype=object)}
    return _postprocess(config, rng, fields, extra)


def qec_qpa_session(config: SessionConfig, rur_n: int | None = None,
                    batch: int = 2048) -> SessionTranscript:
    """Four-state session where every signal travels inside a repetition code.

    Each of the n² code qubits suffers an independent bounded unitary; Bob
    projects onto the code space, discards failures, and measures the
    decoded logical qubit.
    """
    rur_n = rur_n or config.rur_n
    code = RurCode(rur_n)
    if config.scheme != "qec":
        raise ValueError("config is not a qec session")
    if config.eve is not None or config.noise > 0:
        raise ValueError("the encoded session models bounded unitary noise only")
    rng = np.random.default_rng(config.seed)
    n = config.qubits
    states = BASIS_STATES[config.bases]
    a_basis = rng.integers(0, 2, n, dtype=np.int8)
    a_bit = rng.integers(0, 2, n, dtype=np.int8)
    b_basis = rng.integers(0, 2, n, dtype=np.int8)
    sent = 2 * a_basis + a_bit
    encoded = np.array([encode_rur(code, v) for v in states])
    noise = BoundedNoise(config.chi)
    amps = np.empty((n, 2), dtype=complex)
    for start in range(0, n, batch):
        stop = min(start + batch, n)
        psi = encoded[sent[start:stop]]
        if config.chi > 0:
            psi = apply_local_unitaries(psi, noise.sample(rng, (stop - start, code.num_qubits)))
        amps[start:stop] = psi @ code.basis.conj().T
    q = np.sum(np.abs(amps) ** 2, axis=1)
    kept = rng.random(n) < q
    logical = amps / np.sqrt(np.where(q > 0, q, 1.0))[:, None]
    bob_vec = states[2 * b_basis]
    p0 = np.abs(np.einsum("li,li->l", bob_vec.conj(), logical)) ** 2
    b_bit = (rng.random(n) >= p0).astype(np.int8)
    fields = {
        "alice_basis": a_basis, "alice_bit": a_bit, "bob_basis": b_basis,
        "bob_outcome": np.where(kept, b_bit, -1).astype(np.int8),
        "alice_key": a_bit, "bob_key": b_bit, "sifted": kept & (a_basis == b_basis),
    }
    return _postprocess(config, rng, fields, {"discarded": ~kept, "code_space_prob": q})


def run_session(config: SessionConfig) -> SessionTranscript:
    if config.scheme == "bb84":
        return run_bb84(config)
    if config.scheme == "b92":
        return run_b92(config)
    if config.scheme == "epr":
        return run_epr(config)
    if config.scheme == "reversed-epr":
        return run_reversed_epr(config)
    return qec_qpa_session(config)


def run_sessions(configs: Sequence[SessionConfig], workers: int = 1) -> list[SessionTranscript]:
    """Run independent sessions, possibly in parallel, in input order."""
    if workers > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(run_session, configs))
    return [run_session(c) for c in configs]
