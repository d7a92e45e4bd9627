import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from csrlnc.circring import (
    MAX_DET_BLOCKS,
    ShiftParams,
    admissible_values,
    coeff_to_ring,
    dense_conjugate,
    dense_ring,
    expand_block_matrix,
    gf2_matmul,
    is_admissible,
    ring_add,
    ring_det,
    ring_minor,
    ring_mul,
    ring_pow,
    shift_inverse,
    sigma,
    thm3_inverse,
    weight,
)
from csrlnc.errors import InvalidParameter, ShapeMismatch, SingularMatrix
from csrlnc.linalg import field_block_inverse, rank_gf2
from csrlnc.verify import (
    WORKED_EXAMPLE,
    WORKED_INVERSE,
    WORKED_MINORS,
    _masks,
    _permutation_det,
    check_shift_conjugation_identities,
)

P4 = ShiftParams(4)


def m(*exps):
    return sum(1 << e for e in exps)


def test_admissible_lengths():
    assert admissible_values(30) == [2, 4, 10, 12, 18, 28]
    assert not is_admissible(6)  # 7 is prime but 2 has order 3
    assert not is_admissible(8)
    with pytest.raises(InvalidParameter):
        ShiftParams(6)


def test_ring_mul_examples():
    assert ring_mul(P4, m(0), m(3)) == m(3)
    assert ring_mul(P4, m(3), m(4)) == m(2)
    assert ring_mul(P4, m(0, 1), m(0, 1)) == m(0, 2)
    assert ring_add(P4, m(1, 2), m(2)) == m(1)


def cyclic_convolution(a, b, n):
    out = 0
    for i in range(n):
        for j in range(n):
            if a >> i & 1 and b >> j & 1:
                out ^= 1 << ((i + j) % n)
    return out


@settings(max_examples=300, deadline=None)
@given(st.sampled_from([2, 4, 10, 12]), st.data())
def test_ring_mul_matches_convolution_and_dense(L, data):
    p = ShiftParams(L)
    a, b, c = (data.draw(st.integers(0, p.full)) for _ in range(3))
    ab = ring_mul(p, a, b)
    assert ab == cyclic_convolution(a, b, p.n)
    assert ab == ring_mul(p, b, a)
    assert ring_mul(p, a, b ^ c) == ab ^ ring_mul(p, a, c)
    dense = gf2_matmul(dense_ring(L, a), dense_ring(L, b))
    assert np.array_equal(dense, dense_ring(L, ab))
    # conjugation is multiplicative because G 1 = 0
    assert np.array_equal(gf2_matmul(dense_conjugate(L, a), dense_conjugate(L, b)), dense_conjugate(L, ab))


def test_ring_pow_examples():
    a = m(0, 3)
    assert ring_pow(P4, a, 1) == a
    assert ring_pow(P4, a, 0) == 1
    prod = ring_mul(P4, ring_pow(P4, a, 14), a)
    assert sigma(P4, prod) == 1
    assert ring_pow(P4, P4.full, 2) == P4.full


def test_sigma_examples():
    assert sigma(P4, m(0, 1, 2)) == m(3, 4)
    assert sigma(P4, m(1)) == m(1)
    assert sigma(P4, P4.full) == 0


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([2, 4, 10, 12, 18]), st.data())
def test_sigma_properties(L, data):
    p = ShiftParams(L)
    a = data.draw(st.integers(0, p.full))
    s = sigma(p, a)
    assert weight(s) <= L // 2
    assert s in (a, a ^ p.full)
    if L <= 12:
        assert np.array_equal(dense_conjugate(L, s), dense_conjugate(L, a))


def test_coeff_to_ring():
    assert coeff_to_ring(P4, 0) == 0
    assert coeff_to_ring(P4, 3) == 1 << 3
    assert coeff_to_ring(P4, 5) == 1
    with pytest.raises(InvalidParameter):
        coeff_to_ring(P4, 6)
    for c in range(1, 6):
        assert ring_mul(P4, coeff_to_ring(P4, c), coeff_to_ring(P4, shift_inverse(P4, c))) == 1


def test_shift_identities_against_dense_matrices():
    ok, stats = check_shift_conjugation_identities("quick", 0)
    assert ok and stats["cases"] == 3 + 5 + 11 + 13


def test_worked_example_determinant_minors_inverse():
    blocks = _masks(WORKED_EXAMPLE)
    assert ring_det(P4, blocks) == m(0, 3)
    assert ring_minor(P4, blocks, 0, 0) == 0
    assert ring_minor(P4, blocks, 1, 0) == m(0, 4)
    assert ring_minor(P4, blocks, 0, 1) == m(3, 4)
    minors = [[ring_minor(P4, blocks, j, k) for k in range(3)] for j in range(3)]
    assert minors == _masks(WORKED_MINORS)
    inverse = thm3_inverse(P4, blocks)
    assert inverse == _masks(WORKED_INVERSE)
    product = gf2_matmul(expand_block_matrix(4, blocks), expand_block_matrix(4, inverse))
    assert np.array_equal(product, np.eye(12, dtype=np.uint8))


def test_worked_example_expansion_is_full_rank():
    assert rank_gf2(expand_block_matrix(4, _masks(WORKED_EXAMPLE))) == 12


def test_determinant_small_cases():
    assert ring_det(P4, [[m(2)]]) == m(2)
    rows = [[m(1), m(2, 3)], [m(1), m(2, 3)]]
    assert ring_det(P4, rows) == 0
    assert ring_minor(P4, [[m(1), m(2)], [m(3), m(4)]], 0, 0) == m(4)
    with pytest.raises(ShapeMismatch):
        ring_det(P4, [[1, 2]])
    big = [[1] * (MAX_DET_BLOCKS + 1) for _ in range(MAX_DET_BLOCKS + 1)]
    with pytest.raises(ShapeMismatch):
        ring_det(P4, big)


@settings(max_examples=150, deadline=None)
@given(st.sampled_from([2, 4, 10]), st.integers(1, 4), st.data())
def test_determinant_matches_permutation_sum(L, J, data):
    p = ShiftParams(L)
    rows = [[data.draw(st.integers(0, p.full)) for _ in range(J)] for _ in range(J)]
    assert ring_det(p, rows) == _permutation_det(p, rows)


def test_single_block_inverse_is_opposite_shift():
    for L in (2, 4, 10):
        p = ShiftParams(L)
        for l in range(1, L + 2):
            inv = thm3_inverse(p, [[coeff_to_ring(p, l)]])
            assert dense_conjugate(L, inv[0][0]).tolist() == dense_conjugate(L, 1 << ((L - l + 1) % (L + 1))).tolist()


def test_identity_block_matrix_inverse():
    ident = [[1 if i == j else 0 for j in range(4)] for i in range(4)]
    assert thm3_inverse(P4, ident) == ident


def test_singular_block_matrix_raises():
    with pytest.raises(SingularMatrix):
        thm3_inverse(P4, [[m(1), m(2)], [m(1), m(2)]])


def test_random_full_rank_inverses_and_field_route():
    gen = np.random.default_rng(7)
    checked = 0
    while checked < 300:
        L = int(gen.choice([4, 10]))
        J = int(gen.integers(1, 7))
        p = ShiftParams(L)
        rows = gen.integers(0, p.full + 1, size=(J, J)).tolist()
        dense = expand_block_matrix(L, rows)
        if rank_gf2(dense) < J * L:
            with pytest.raises(SingularMatrix):
                thm3_inverse(p, rows)
            continue
        inv = thm3_inverse(p, rows)
        assert np.array_equal(gf2_matmul(dense, expand_block_matrix(L, inv)), np.eye(J * L, dtype=np.uint8))
        assert all(weight(x) <= L // 2 for row in inv for x in row)
        # independent route through GF(2^L) lands on the same representatives
        assert field_block_inverse(p, rows)[0] == inv
        checked += 1


def test_tally_counts_ring_multiplications():
    tally = [0]
    thm3_inverse(P4, _masks(WORKED_EXAMPLE), tally)
    assert tally[0] > 2 * 4
    assert list(itertools.chain.from_iterable(_masks(WORKED_EXAMPLE)))
