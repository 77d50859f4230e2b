import itertools
import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vlcmimo.codebook import (
    CodebookSpec,
    Method,
    code_rate,
    codebook_matrices,
    complement,
    decode,
    decode_batch,
    digits_from_positions,
    dim_contract,
    dim_expand,
    dimming_weight_table,
    encode,
    encode_batch,
    enumerate_codebook,
    format_codebook_json,
    format_codebook_text,
    lehmer_digits,
    max_nt_for_flicker,
    max_run_length,
    message_length,
    min_euclidean_distance,
    min_hamming_distance,
    parse_codebook_text,
    parse_gamma,
    scan_max_run_length,
    validate,
)
from vlcmimo.errors import CapacityExceeded, InvalidMessage, InvalidParameter, NotACodeword
from vlcmimo.fixtures import REFERENCE_CODEBOOKS, reference_matrices


# --- independent oracles ------------------------------------------------------


def lexicographic_oracle(n, m):
    """m-th permutation of right-to-left positions in lexicographic order."""
    positions = next(itertools.islice(itertools.permutations(range(n)), m, None))
    x = np.zeros((n, n), dtype=np.uint8)
    for row, p in enumerate(positions):
        x[row, n - 1 - p] = 1
    return x


def increment_oracle_positions(n, m):
    """Row positions by the iterative skip-over-occupied rule."""
    residue = m
    taken = []
    for i in range(1, n + 1):
        base = math.factorial(n - i)
        p = residue // base
        residue %= base
        pos = p
        while True:
            bumped = p + sum(1 for q in taken if q <= pos)
            if bumped == pos:
                break
            pos = bumped
        taken.append(pos)
    return taken


def literal_decode(n, positions):
    """Decoding by explicit per-row decrement and factorial weighting."""
    actual = [positions[0]]
    for r in range(1, n):
        var0 = sum(1 for t in range(r - 1, -1, -1) if positions[r] > positions[t])
        actual.append(positions[r] - var0)
    value, var1 = 0, n - 1
    for r in range(n):
        value += math.factorial(var1) * actual[r]
        var1 -= 1
    return value


def fill_oracle(perm, f):
    n = perm.shape[0]
    out = np.zeros_like(perm)
    for r in range(n):
        c = int(np.flatnonzero(perm[r])[0])
        for j in range(f + 1):
            out[r, (c + j) % n] = 1
    return out


def longest_zero_run(rows):
    """Longest run of zeros along the last axis, vectorised over leading axes."""
    run = np.zeros(rows.shape[:-1], dtype=np.int64)
    best = np.zeros_like(run)
    for j in range(rows.shape[-1]):
        run = np.where(rows[..., j] == 0, run + 1, 0)
        best = np.maximum(best, run)
    return best


def concatenation_run_length(spec):
    c = codebook_matrices(spec)
    pairs = np.concatenate([np.repeat(c, len(c), axis=0), np.tile(c, (len(c), 1, 1))], axis=-1)
    return int(longest_zero_run(pairs).max())


def all_specs(n_values):
    for n in n_values:
        for m in range(1, n):
            yield CodebookSpec(n, m)
        yield CodebookSpec(n, n - 1, Method.COMPLEMENT)


# --- reference codebooks ------------------------------------------------------


@pytest.mark.parametrize("gamma", ["1/4", "2/4", "3/4"])
def test_reference_codebooks_bit_exact(gamma):
    got = list(enumerate_codebook(CodebookSpec.from_gamma(4, gamma)))
    expected = reference_matrices(gamma)
    assert len(got) == 16
    for m in range(16):
        np.testing.assert_array_equal(got[m], expected[m], err_msg=f"message {m}")


def test_reference_fixture_shape():
    assert sum(len(v) for v in REFERENCE_CODEBOOKS.values()) == 48
    for gamma, weight in (("1/4", 1), ("2/4", 2), ("3/4", 3)):
        mats = reference_matrices(gamma)
        assert np.all(mats.sum(axis=1) == weight) and np.all(mats.sum(axis=2) == weight)


def test_gamma_three_quarters_fill_differs_from_complement():
    fill = codebook_matrices(CodebookSpec(4, 3, Method.FILL))
    comp = codebook_matrices(CodebookSpec(4, 3, Method.COMPLEMENT))
    assert not np.array_equal(fill[0], comp[0])
    base = codebook_matrices(CodebookSpec(4, 1))
    np.testing.assert_array_equal(comp, 1 - base)


def test_two_antenna_codebook():
    spec = CodebookSpec.from_gamma(2, 0.5)
    mats = codebook_matrices(spec)
    assert spec.k == 1 and len(mats) == 2
    # message 0 is the anti-diagonal, as for every n_t
    np.testing.assert_array_equal(mats[0], [[0, 1], [1, 0]])
    np.testing.assert_array_equal(mats[1], np.eye(2))


# --- encoder against oracles --------------------------------------------------


@pytest.mark.parametrize("n", range(2, 7))
def test_encode_matches_lexicographic_oracle(n):
    spec = CodebookSpec(n)
    for m in range(spec.size):
        np.testing.assert_array_equal(encode(spec, m), lexicographic_oracle(n, m))


def test_five_antenna_message_37():
    spec = CodebookSpec(5)
    assert lehmer_digits(37, 5) == [1, 2, 0, 1, 0]
    np.testing.assert_array_equal(encode(spec, 37), lexicographic_oracle(5, 37))
    assert increment_oracle_positions(5, 37) == [1, 3, 0, 4, 2]


@pytest.mark.parametrize("n", range(2, 9))
def test_increment_rule_agrees(n):
    spec = CodebookSpec(n)
    step = max(1, spec.size // 300)
    for m in range(0, spec.size, step):
        positions = increment_oracle_positions(n, m)
        x = encode(spec, m)
        assert [n - 1 - int(np.flatnonzero(row)[0]) for row in x] == positions
        assert literal_decode(n, positions) == m


@given(st.integers(3, 7).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n - 2),
                                                     st.integers(0, 2 ** message_length(n) - 1))))
def test_fill_matches_oracle(case):
    n, m_weight, msg = case
    perm = encode(CodebookSpec(n), msg)
    np.testing.assert_array_equal(encode(CodebookSpec(n, m_weight), msg), fill_oracle(perm, m_weight - 1))


# --- round trip and injectivity ------------------------------------------------


@pytest.mark.parametrize("spec", list(all_specs(range(2, 8))), ids=str)
def test_round_trip_and_distinct(spec):
    mats = codebook_matrices(spec)
    assert len({m.tobytes() for m in mats}) == spec.size
    assert all(decode(spec, mats[m]) == m for m in range(spec.size))
    np.testing.assert_array_equal(decode_batch(spec, mats), np.arange(spec.size))


@given(st.integers(2, 64).flatmap(lambda n: st.tuples(
    st.just(n), st.integers(1, n - 1), st.integers(0, 2 ** message_length(n) - 1))))
def test_weights_and_round_trip_any_size(case):
    n, weight, msg = case
    spec = CodebookSpec(n, weight)
    x = encode(spec, msg)
    assert np.all(x.sum(axis=0) == weight) and np.all(x.sum(axis=1) == weight)
    assert decode(spec, x) == msg


@given(st.integers(2, 12).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n - 2), st.permutations(range(n)))))
def test_expand_contract_inverse(case):
    n, f, perm = case
    p = np.zeros((n, n), dtype=np.uint8)
    p[np.arange(n), perm] = 1
    x = dim_expand(p, f)
    assert np.all(x.sum(axis=0) == f + 1) and np.all(x.sum(axis=1) == f + 1)
    np.testing.assert_array_equal(dim_contract(x, f), p)


def test_complement_involution(rng):
    x = rng.integers(0, 2, size=(6, 6))
    np.testing.assert_array_equal(complement(complement(x)), x)


def test_digits_round_trip():
    for n in range(2, 8):
        for positions in itertools.permutations(range(n)):
            digits = digits_from_positions(list(positions))
            assert all(0 <= d < n - i for i, d in enumerate(digits))


@pytest.mark.parametrize("spec", list(all_specs(range(2, 10))), ids=str)
def test_batch_paths_match_scalar(spec, rng):
    msgs = rng.integers(0, spec.size, size=50)
    batch = encode_batch(spec, msgs)
    for i, m in enumerate(msgs):
        np.testing.assert_array_equal(batch[i], encode(spec, int(m)))
    np.testing.assert_array_equal(decode_batch(spec, batch), msgs)


# --- validation and errors ------------------------------------------------------


def test_validate_rejects_weight_correct_non_codeword():
    spec = CodebookSpec(4)
    outside = lexicographic_oracle(4, 16)  # rank 16 >= 2^k
    assert not validate(spec, outside)
    assert all(validate(spec, x) for x in codebook_matrices(spec))
    with pytest.raises(NotACodeword):
        decode(spec, outside)


def test_decode_batch_flags_invalid():
    spec = CodebookSpec(4, 2)
    bad = np.zeros((3, 4, 4), dtype=np.uint8)
    bad[1] = encode(spec, 5)
    bad[2] = lexicographic_oracle(4, 20)
    np.testing.assert_array_equal(decode_batch(spec, bad), [-1, 5, -1])


def test_decode_rejects_broken_runs():
    spec = CodebookSpec(4, 2)
    x = encode(spec, 0).copy()
    x[0] = [1, 0, 1, 0]
    assert not validate(spec, x)
    with pytest.raises(NotACodeword):
        decode(spec, x)
    with pytest.raises(NotACodeword):
        decode(spec, np.full((4, 4), 2))


@pytest.mark.parametrize("n,gamma", [(4, "1/3"), (4, "0"), (4, "1"), (4, 0.3), (3, "abc")])
def test_bad_gamma(n, gamma):
    with pytest.raises(InvalidParameter):
        CodebookSpec.from_gamma(n, gamma)


def test_bad_specs_and_messages():
    with pytest.raises(InvalidParameter):
        CodebookSpec(1)
    with pytest.raises(InvalidParameter):
        CodebookSpec(65)
    with pytest.raises(InvalidParameter):
        CodebookSpec(5, 2, Method.COMPLEMENT)
    spec = CodebookSpec(4)
    for bad in (-1, 16, 2.0, True):
        with pytest.raises(InvalidMessage):
            encode(spec, bad)
    with pytest.raises(CapacityExceeded):
        next(enumerate_codebook(CodebookSpec(12)))


def test_parse_gamma_forms():
    assert parse_gamma("1/4", 4) == Fraction(1, 4)
    assert parse_gamma("0.1667", 6) == Fraction(1, 6)
    assert parse_gamma(0.75, 4) == Fraction(3, 4)
    assert parse_gamma(Fraction(2, 6), 6) == Fraction(1, 3)
    assert CodebookSpec.from_gamma(6, "2/6").weight == 2


# --- closed-form metrics --------------------------------------------------------


def test_rate_and_length():
    assert (message_length(4), code_rate(4)) == (4, 1)
    assert (message_length(5), code_rate(5)) == (6, Fraction(6, 5))
    for n in range(2, 30):
        assert 2 ** message_length(n) <= math.factorial(n) < 2 ** (message_length(n) + 1)


@pytest.mark.parametrize("spec", list(all_specs(range(3, 7))), ids=str)
def test_min_distance_brute_force(spec):
    c = codebook_matrices(spec).reshape(spec.size, -1).astype(int)
    d = (c[:, None, :] != c[None, :, :]).sum(axis=-1)
    d[np.diag_indices(spec.size)] = 10**9
    assert d.min() == 4 == min_hamming_distance(spec)
    assert min_euclidean_distance(spec, e_s=2.25) == pytest.approx(2 * 1.5)


def test_min_distance_two_antennas():
    assert min_hamming_distance(CodebookSpec(2)) == 4


@pytest.mark.parametrize("spec", list(all_specs(range(3, 7))), ids=str)
def test_run_length_brute_force(spec):
    expected = 2 * spec.n_t * (1 - spec.gamma)
    assert max_run_length(spec) == expected
    assert concatenation_run_length(spec) == expected
    assert scan_max_run_length(spec) == expected


def test_run_length_examples():
    assert max_run_length(CodebookSpec.from_gamma(4, 0.25)) == 6
    assert max_run_length(CodebookSpec.from_gamma(4, 0.75)) == 2
    assert max_run_length(CodebookSpec.from_gamma(5, "1/5")) == 8


@pytest.mark.parametrize("t_b,n_max", [(0.2e-3, 13), (0.1e-3, 26), (50e-6, 51), (20e-6, 126), (1e-6, 2501)])
def test_flicker_limit_table(t_b, n_max):
    assert max_nt_for_flicker(t_b, 5e-3) == n_max
    # the worst-case run of that many antennas fits, one more does not
    assert (2 * n_max - 2) * Fraction(str(t_b)) <= Fraction("0.005")
    assert (2 * n_max) * Fraction(str(t_b)) > Fraction("0.005")


# rows as printed: gamma_actual to 4 decimals, gamma_c to 3
WEIGHT_TABLE = [
    (4, 0.2500, 0.750, 4, 12),
    (5, 0.2000, 0.800, 5, 20),
    (6, 0.1667, 0.833, 6, 30),
    (7, 0.1428, 0.857, 7, 42),
    (8, 0.1250, 0.875, 8, 56),
]


@pytest.mark.parametrize("row", WEIGHT_TABLE, ids=lambda r: f"n{r[0]}")
def test_dimming_weight_table(row):
    n, g_act, g_c, wt, wt_c = row
    t = dimming_weight_table(n)
    assert (t["wt_actual"], t["wt_c"]) == (wt, wt_c)
    assert abs(t["gamma_actual"] - g_act) < 1e-4
    assert abs(t["gamma_c"] - g_c) < 5e-4
    # the complemented weight follows from the plain one
    assert t["wt_c"] == t["wt_actual"] * (t["wt_actual"] - 1)
    assert codebook_matrices(CodebookSpec(n, n - 1, Method.COMPLEMENT))[0].sum() == wt_c


# --- dump formats ------------------------------------------------------------------


def test_text_dump_round_trip():
    spec = CodebookSpec(4, 2)
    mats = codebook_matrices(spec)
    text = format_codebook_text(spec, mats)
    assert text.splitlines()[0] == "# n_t=4 gamma=2/4 method=fill k=4"
    header, parsed = parse_codebook_text(text)
    assert header == {"n_t": "4", "gamma": "2/4", "method": "fill", "k": "4"}
    np.testing.assert_array_equal(np.array(parsed), mats)
    assert text.count("\n\n") == 15


def test_json_dump():
    spec = CodebookSpec(4)
    data = json.loads(format_codebook_json(codebook_matrices(spec)))
    assert data[0] == ["0001", "0010", "0100", "1000"]
    assert len(data) == 16


def test_codebook_matrices_read_only():
    mats = codebook_matrices(CodebookSpec(4))
    with pytest.raises(ValueError):
        mats[0, 0, 0] = 1
