import itertools
import json
import math
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qkdlab.binary_info import TwoStateSource, bsc_info
from qkdlab.codes import (
    ParityCode,
    audit_report,
    code_blocks,
    conjecture_audit,
    exact_total_info,
    from_bits,
    gf2_rank,
    hamming_code,
    leading_exponent,
    parity,
    popcount,
    random_code,
    reliability_estimate,
    security_bound,
    security_bound_error,
    span_closure,
    sum_bound,
    syndrome,
    syndrome_decode,
    to_bits,
    word_info_leading,
    zero_pattern,
)
from qkdlab.parity import ParityModel, coherent_info

H3 = hamming_code(3)


def obeying_average(code, alpha, target_parity):
    """Mean of the signal products over strings consistent with the code."""
    n = code.n
    rho = [r.real for r in TwoStateSource(alpha).densities()]
    acc, count = np.zeros((2**n, 2**n)), 0
    for x in range(2**n):
        if any(parity(x & v) != p for v, p in zip(code.rows, code.values)):
            continue
        if parity(x & code.target) != target_parity:
            continue
        bits = [(x >> (n - 1 - i)) & 1 for i in range(n)]
        acc += reduce(np.kron, [rho[b] for b in bits])
        count += 1
    assert count == 2 ** (n - code.r - 1)
    return acc / count


def structural_nonzero(mat):
    """Entries above rounding noise; true entries have |ρ_jk| = √(ρ_jj ρ_kk)."""
    d = np.sqrt(np.abs(np.diag(mat)))
    return np.abs(mat) > 1e-9 * np.outer(d, d)


def components(mask):
    """Index sets of the connected components of a boolean adjacency matrix."""
    dim = mask.shape[0]
    seen, out = set(), []
    for start in range(dim):
        if start in seen:
            continue
        stack, comp = [start], []
        seen.add(start)
        while stack:
            i = stack.pop()
            comp.append(i)
            for j in np.nonzero(mask[i])[0]:
                if j not in seen:
                    seen.add(int(j))
                    stack.append(int(j))
        out.append(sorted(comp))
    return out


def dense_total_info(code, alpha):
    r0 = obeying_average(code.with_target_parity(0), alpha, 0)
    r1 = obeying_average(code.with_target_parity(1), alpha, 1)
    total = 0.0
    for comp in components(structural_nonzero(r0)):
        ix = np.ix_(comp, comp)
        q = np.trace(r0[ix])
        if q <= 0:
            continue
        err = 0.5 - 0.25 * np.abs(np.linalg.eigvalsh((r0[ix] - r1[ix]) / q)).sum()
        total += q * bsc_info(min(max(err, 0.0), 1.0))
    return total


def test_bit_helpers():
    assert to_bits(5, 4) == "0101" and from_bits("0101") == 5
    assert popcount(0b1011) == 3 and parity(0b1011) == 1
    assert gf2_rank([0b110, 0b011, 0b101]) == 2


def test_code_validation():
    with pytest.raises(ValueError):
        ParityCode.from_strings(["11000", "11000"])
    with pytest.raises(ValueError):
        ParityCode.from_strings(["110", "011"], target="101")
    with pytest.raises(ValueError):
        ParityCode.from_strings(["1100", "011"])
    with pytest.raises(ValueError):
        ParityCode(n=3, rows=(0b100, 0b010, 0b001))


def test_json_round_trip(tmp_path):
    code = ParityCode.from_strings(["11000", "01100"], values=[1, 0], target="11111")
    path = tmp_path / "code.json"
    code.dump(path)
    assert json.loads(path.read_text())["rows"] == ["11000", "01100"]
    assert ParityCode.load(path) == code


def test_span_examples():
    code = ParityCode.from_strings(["11000", "01100"])
    words = {to_bits(w, 5) for w in span_closure(code, include_target=False)}
    assert words == {"00000", "11000", "01100", "10100"}
    r0 = ParityCode(n=5, rows=())
    assert {to_bits(w, 5) for w in span_closure(r0)} == {"00000", "11111"}
    full = span_closure(H3)
    assert len(full) == 16 and from_bits("0011110") in full


def test_span_parities_are_linear():
    code = ParityCode.from_strings(["11000", "01100"], values=[1, 1])
    span = span_closure(code, include_target=False)
    assert span[from_bits("10100")] == 0
    assert span[from_bits("11000")] == 1


@pytest.mark.parametrize("seed", range(50))
def test_zero_pattern_matches_dense_average(seed):
    rng = np.random.default_rng(seed)
    code = random_code(rng, n_min=2, n_max=8 if seed < 10 else 6)
    alpha = float(rng.uniform(0.01, 0.7))
    pattern = zero_pattern(code)
    dense = obeying_average(code, alpha, code.target_parity)
    assert np.abs(pattern.dense(alpha) - dense).max() < 1e-12
    nonzero = structural_nonzero(dense)
    for j in range(min(2**code.n, 16)):
        assert pattern(j, j) == 1
        k = int(rng.integers(0, 2**code.n))
        assert (pattern(j, k) != 0) == nonzero[j, k]
        assert abs(pattern.value(j, k, alpha) - dense[j, k]) < 1e-12


def test_h3_block_structure():
    blocks = code_blocks(H3, 0.1)
    assert len(blocks) == 8
    assert all(b.coset.size == 16 for b in blocks)
    cover = np.sort(np.concatenate([b.coset for b in blocks]))
    assert np.array_equal(cover, np.arange(128))
    for b in blocks:
        assert b.second_eigenvalue(0) < 1e-10 and b.second_eigenvalue(1) < 1e-10
        assert abs(np.trace(b.matrices[0]) - np.trace(b.matrices[1])) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 0.7))
def test_block_weights_sum_to_one(seed, alpha):
    code = random_code(np.random.default_rng(seed), n_max=10)
    assert abs(sum(b.weight for b in code_blocks(code, alpha)) - 1) < 1e-12


@pytest.mark.parametrize("n", range(1, 9))
def test_r0_reduces_to_parity_analysis(n):
    code = ParityCode(n=n, rows=())
    for alpha in (0.05, 0.3):
        assert abs(exact_total_info(code, alpha) - coherent_info(ParityModel.pure(n, alpha))) < 1e-10
        sb = sum_bound(code, alpha)
        assert abs(sb - coherent_info(ParityModel.pure(n, alpha))) < 1e-12


@pytest.mark.parametrize("seed", range(20))
def test_total_info_matches_dense_oracle(seed):
    rng = np.random.default_rng(1000 + seed)
    code = random_code(rng, n_min=3, n_max=7)
    alpha = float(rng.uniform(0.02, 0.6))
    assert abs(exact_total_info(code, alpha) - dense_total_info(code, alpha)) < 1e-10


def test_h3_coefficient_and_leading_sum():
    alpha = 0.01
    coeff = exact_total_info(H3, alpha) / alpha**4
    assert abs(coeff - 60.6) / 60.6 < 0.01
    assert leading_exponent(H3) == 4
    lead = sum_bound(H3, alpha, "leading") / alpha**4
    # seven words at distance 3 plus the zero word at distance 7
    assert abs(lead - (7 * 6 + 70 * alpha**4) / math.log(2)) < 1e-9
    assert abs(word_info_leading(3, 1.0) - 6 / math.log(2)) < 1e-12


def test_h3_word_distances():
    span = span_closure(H3, include_target=False)
    dists = sorted(popcount(w ^ H3.target) for w in span)
    assert dists == [3] * 7 + [7]
    codewords = [x for x in range(128) if not any(syndrome(x, H3))]
    assert len(codewords) == 16
    assert min(popcount(a ^ b) for a, b in itertools.combinations(codewords, 2)) == 3


def test_h3_textbook_rows():
    assert [to_bits(v, 7) for v in H3.rows] == ["1110100", "1101010", "0111001"]


@pytest.mark.parametrize("r", [2, 3, 4, 5])
def test_hamming_corrects_every_single_error(r):
    code = hamming_code(r)
    n = code.n
    assert n == 2**r - 1
    rng = np.random.default_rng(r)
    codewords = [x for x in rng.integers(0, 2**n, size=400) if not any(syndrome(int(x), code))]
    codewords = [0] + [int(c) for c in codewords][:20]
    for w in codewords:
        assert syndrome_decode(w, code) == (w, False)
        for pos in range(n):
            got, flipped = syndrome_decode(w ^ (1 << pos), code)
            assert got == w and flipped


def test_h3_coset_table_examples():
    assert syndrome(from_bits("0000001"), H3) == (0, 0, 1)
    assert syndrome(from_bits("0000010"), H3) == (0, 1, 0)
    assert syndrome_decode(from_bits("0001011"), H3) == (from_bits("0001011"), False)
    assert syndrome_decode(from_bits("0001000"), H3) == (0, True)


def test_reliability_estimate():
    assert reliability_estimate(7, 0.0) == 0.0
    assert abs(reliability_estimate(7, 0.01) - 21e-4) < 1e-15
    rng = np.random.default_rng(7)
    p = 0.01
    errs = (rng.random((400_000, 7)) < p).sum(axis=1)
    freq = (errs >= 2).mean()
    assert abs(freq / reliability_estimate(7, p) - 1) < 0.1


def test_security_bound_values():
    alpha = 0.05
    c = math.sqrt(8) * 2 / (math.log(2) * math.sqrt(math.pi))
    assert abs(security_bound(7, alpha) - c * 0.1**4) < 1e-15
    assert security_bound(7, 0.0) == 0.0
    for a in np.linspace(0.005, 0.05, 10):
        assert exact_total_info(H3, a) <= security_bound(7, a)


def test_security_bound_in_error_form():
    # with p_e = α⁴ / tan²2θ the two forms agree
    theta, alpha = 0.3, 0.02
    p_e = alpha**4 / math.tan(2 * theta) ** 2
    assert abs(security_bound_error(7, p_e, theta) / security_bound(7, alpha) - 1) < 1e-12


def test_conjecture_audit_small():
    records = conjecture_audit(n_codes=20, seed=3)
    assert not any(r.violated for r in records)
    assert "0 violations" in audit_report(records)
