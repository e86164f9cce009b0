"""Acceptance criteria, one test each, with a PASS/FAIL line per criterion.

The lines are collected in the pytest terminal summary. Running this file
directly with ``python tests/test_acceptance.py`` prints them as well.
"""

import itertools
import math
import time
from functools import reduce

import numpy as np

from qkdlab.attacks import assess, ehpp_attack, two_state_signals, weak_measure, weak_swap
from qkdlab.binary_info import TwoStateSource, bsc_info
from qkdlab.cli import main
from qkdlab.codes import (
    audit_report,
    conjecture_audit,
    parity,
    random_code,
    zero_pattern,
)
from qkdlab.error_reduction import (
    BoundedNoise,
    RurCode,
    classical_correction_stats,
    classical_reduction_stats,
    remainder_sweep,
)
from qkdlab.parity import (
    ParityModel,
    asymptotic_bound,
    coherent_info,
    deterministic_info,
    individual_info,
    parity_densities,
)
from qkdlab.protocol import InterceptResend, SessionConfig, run_session

from conftest import ACCEPTANCE_LINES


def report(num, name, ok, detail, seconds, limit):
    ok = ok and seconds < limit
    line = f"{'PASS' if ok else 'FAIL'} [{num:2d}] {name}: {detail} ({seconds:.2f}s, limit {limit:g}s)"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def five_sigma(x, mean, n):
    return abs(x - mean) <= 5 * math.sqrt(mean * (1 - mean) / n)


def cli_payload(capsys, argv):
    assert main(argv) == 0
    return capsys.readouterr().out


def test_01_hamming_coefficient(capsys):
    t0 = time.perf_counter()
    out = cli_payload(capsys, ["ecc-info", "--code", "hamming:3", "--alpha", "0.01"])
    dt = time.perf_counter() - t0
    lines = [l for l in out.splitlines() if not l.startswith("#")]
    row = dict(zip(lines[0].split(","), lines[1].split(",")))
    coeff = float(row["coefficient"])
    report(1, "H3 coefficient I_total/alpha^4", 60.0 <= coeff <= 61.2 and row["exponent"] == "4",
           f"{coeff:.4f} in [60.0, 61.2]", dt, 1.0)


def test_02_n2_closed_form():
    t0 = time.perf_counter()
    worst = 0.0
    for alpha in np.linspace(1e-3, math.pi / 4, 50):
        big_c, big_s = math.cos(2 * alpha), math.sin(2 * alpha)
        want = 0.5 * (1 + big_c**2) * bsc_info(big_c**2 / (1 + big_c**2)) + big_s**2 / 2
        worst = max(worst, abs(coherent_info(ParityModel.pure(2, alpha)) - want))
    dt = time.perf_counter() - t0
    report(2, "n=2 parity closed form", worst <= 1e-12, f"max |diff| = {worst:.2e}", dt, 1.0)


def _string_average(n, src):
    rho = [r.real for r in src.densities()]
    out = [np.zeros((2**n, 2**n)), np.zeros((2**n, 2**n))]
    for bits in itertools.product((0, 1), repeat=n):
        out[sum(bits) % 2] += reduce(np.kron, [rho[b] for b in bits])
    return out[0] / 2 ** (n - 1), out[1] / 2 ** (n - 1)


def _obeying_average(code, alpha):
    n = code.n
    rho = [r.real for r in TwoStateSource(alpha).densities()]
    acc, count = np.zeros((2**n, 2**n)), 0
    for x in range(2**n):
        if any(parity(x & v) != p for v, p in zip(code.rows, code.values)):
            continue
        if parity(x & code.target) != code.target_parity:
            continue
        acc += reduce(np.kron, [rho[(x >> (n - 1 - i)) & 1] for i in range(n)])
        count += 1
    return acc / count


def test_03_brute_force_equivalence():
    t0 = time.perf_counter()
    worst_parity = 0.0
    for n in range(1, 9):
        for alpha in (0.05, 0.3, 0.7):
            src = TwoStateSource(alpha)
            for got, want in zip(parity_densities(ParityModel(n, src)), _string_average(n, src)):
                worst_parity = max(worst_parity, float(np.abs(got - want).max()))
    rng = np.random.default_rng(2024)
    worst_code = 0.0
    for _ in range(50):
        code = random_code(rng, n_min=2, n_max=8)
        alpha = float(rng.uniform(0.01, 0.7))
        diff = np.abs(zero_pattern(code).dense(alpha) - _obeying_average(code, alpha)).max()
        worst_code = max(worst_code, float(diff))
    dt = time.perf_counter() - t0
    ok = worst_parity <= 1e-12 and worst_code <= 1e-12
    report(3, "brute-force densities and zero pattern", ok,
           f"parity max diff {worst_parity:.1e}, 50 codes max diff {worst_code:.1e}", dt, 120.0)


def test_04_ordering_and_bounds():
    t0 = time.perf_counter()
    failures = []
    for alpha in (0.02, 0.05, 0.1):
        for n in range(2, 13):
            m = ParityModel.pure(n, alpha)
            i_m, i_s, i_d = coherent_info(m), individual_info(m), deterministic_info(m)
            cap = min(1.0, asymptotic_bound(m))
            if not (i_s <= i_m <= cap and i_d <= i_m):
                failures.append((alpha, n))
    m = ParityModel.pure(10, 0.02)
    ratio = math.log(coherent_info(m)) / math.log(individual_info(m))
    dt = time.perf_counter() - t0
    ok = not failures and 0.45 <= ratio <= 0.6
    report(4, "I_S <= I_M <= bound, I_D <= I_M", ok,
           f"{33 - len(failures)}/33 grid points hold, log ratio {ratio:.4f} in [0.45, 0.6]", dt, 10.0)


def test_05_conjecture_audit():
    t0 = time.perf_counter()
    records = conjecture_audit(n_codes=100, seed=0, n_max=8, alpha_max=0.2)
    text = audit_report(records)
    dt = time.perf_counter() - t0
    for line in text.splitlines():
        ACCEPTANCE_LINES.append("     " + line)
    violations = sum(r.violated for r in records)
    report(5, "conjecture audit", len(records) == 100,
           f"report emitted, {violations} violations in 100 codes", dt, 300.0)


def test_06_attack_closed_forms():
    t0 = time.perf_counter()
    worst = 0.0
    for gamma in np.linspace(0, math.pi / 2, 21):
        worst = max(worst, abs(assess(weak_swap(gamma), "four-state").p_e - math.sin(gamma / 2) ** 2))
    for theta in (0.1, 0.3, 0.6):
        for theta_p in (0.05, 0.5 * theta, theta):
            att = ehpp_attack(theta, theta_p)
            worst = max(worst, float(np.abs(att.joint.conj().T @ att.joint - np.eye(4)).max()))
            u0, u1 = (att.apply(v) for v in two_state_signals(theta))
            p0, p1 = two_state_signals(theta)
            worst = max(worst, abs(np.vdot(u0, u1) - np.vdot(p0, p1)))
    theta, gamma = 0.5, 0.1
    c, s, cg, sg = math.cos(theta), math.sin(theta), math.cos(gamma), math.sin(gamma)
    res = assess(weak_swap(gamma), "two-state", theta)
    for sign, rho in zip((1, -1), res.eve_states):
        e = np.array([[s**2 * c**2 * (1 + cg**2), sign * c * s**3 * sg],
                      [sign * c * s**3 * sg, s**4 * sg**2]])
        worst = max(worst, float(np.abs(rho - e / np.trace(e)).max()))
    for g in np.linspace(0.05, math.pi / 2, 10):
        mism = {b.basis: b for b in assess(weak_measure(g, "x"), "four-state").per_basis}["y"]
        worst = max(worst, abs(mism.eve_info))
    dt = time.perf_counter() - t0
    report(6, "attack closed forms", worst <= 1e-12, f"max deviation {worst:.1e}", dt, 5.0)


def test_07_protocol_monte_carlo():
    t0 = time.perf_counter()
    notes, ok = [], True
    ir = run_session(SessionConfig("bb84", 200_000, eve=InterceptResend(1.0), seed=7))
    good = ir.n_sifted >= 100_000 and five_sigma(ir.sifted_error_rate, 0.25, ir.n_sifted)
    ok &= good
    notes.append(f"intercept p_e {ir.sifted_error_rate:.4f} over {ir.n_sifted} sifted")
    honest = [
        SessionConfig("bb84", 20_000, seed=1),
        SessionConfig("b92", 20_000, theta=0.3, seed=2),
        SessionConfig("epr", 20_000, seed=3),
        SessionConfig("reversed-epr", 20_000, seed=4),
    ]
    errors = sum(run_session(c).summary()["sifted_error_rate"] for c in honest)
    ok &= errors == 0.0
    notes.append(f"honest error total {errors}")
    n = 100_000
    for mode, frac in (("singlet_only", 1 / 8), ("bell_operator", 1 / 2)):
        tr = run_session(SessionConfig("reversed-epr", n, mode=mode, seed=9))
        ok &= five_sigma(tr.n_sifted / n, frac, n)
        notes.append(f"{mode} {tr.n_sifted / n:.4f}")
    dt = time.perf_counter() - t0
    report(7, "protocol Monte Carlo", ok, "; ".join(notes), dt, 60.0)


def test_08_rur_scaling():
    t0 = time.perf_counter()
    sweep = remainder_sweep(RurCode(2), [0.02, 0.04, 0.06, 0.08, 0.1], 100_000, seed=0)
    dt = time.perf_counter() - t0
    ok = abs(sweep.p_exponent - 4) <= 0.5 and abs(sweep.q_exponent - 2) <= 0.5
    report(8, "R2UR2 scaling fits", ok,
           f"P exponent {sweep.p_exponent:.3f}, 1-Q exponent {sweep.q_exponent:.3f}", dt, 300.0)


def test_09_classical_repetition():
    t0 = time.perf_counter()
    rng = np.random.default_rng(9)
    trials, ok, notes = 1_000_000, True, []
    for p in (0.01, 0.05, 0.1):
        flips = (rng.random((trials, 3)) < p).sum(axis=1)
        corr = classical_correction_stats(3, p)
        ok &= abs(corr - (3 * p**2 - 2 * p**3)) < 1e-15
        ok &= five_sigma((flips >= 2).mean(), corr, trials)
        big_p, q = classical_reduction_stats(3, p)
        ok &= abs(big_p - p**3 / (p**3 + (1 - p) ** 3)) < 1e-15
        kept = (flips == 0) | (flips == 3)
        ok &= five_sigma(kept.mean(), q, trials)
        ok &= five_sigma((flips[kept] == 3).mean(), big_p, int(kept.sum()))
        notes.append(f"p={p}")
    dt = time.perf_counter() - t0
    report(9, "classical repetition formulas vs Monte Carlo", ok, ", ".join(notes) + " within 5 sigma",
           dt, 30.0)


def test_10_determinism(tmp_path, capsys):
    t0 = time.perf_counter()
    runs = {
        "protocol-sim": ["protocol-sim", "--scheme", "bb84", "--qubits", "20000", "--sessions", "3",
                         "--eve", "intercept:0.5", "--seed", "42"],
        "qec-sim": ["qec-sim", "--chi", "0.05,0.1", "--trials", "20000", "--seed", "42"],
        "ecc-info": ["ecc-info", "--code", "hamming:3", "--alpha", "log:0.01:0.1:4"],
    }
    ok, checked = True, 0
    for name, argv in runs.items():
        payloads = []
        for i, workers in enumerate((1, 1, 2)):
            extra = ["--workers", str(workers)] if name != "ecc-info" else []
            if name == "protocol-sim":
                extra += ["--out-dir", str(tmp_path / f"run{i}")]
            payloads.append(cli_payload(capsys, argv + extra))
        ok &= len(set(payloads)) == 1
        checked += 1
    for f in sorted((tmp_path / "run0").iterdir()):
        ok &= all(f.read_bytes() == (tmp_path / f"run{i}" / f.name).read_bytes() for i in (1, 2))
    dt = time.perf_counter() - t0
    report(10, "determinism across reruns and worker counts", ok,
           f"{checked} subcommands and transcripts byte-identical", dt, 60.0)


if __name__ == "__main__":
    import sys

    import pytest

    sys.exit(pytest.main([__file__, "-q", "-s"]))
