import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from csrlnc.bits import (
    OpCounter,
    Packet,
    apply_ring,
    apply_shift,
    expand_G,
    project_H,
    random_packet,
    xor_into,
    zero_packet,
)
from csrlnc.circring import dense_conjugate
from csrlnc.errors import ShapeMismatch
from csrlnc.verify import check_packet_shift_matches_dense_action


def pkt(L, symbols, expanded=False):
    return Packet(L, np.array(symbols, dtype=np.uint32), expanded)


def test_xor_examples_and_cost():
    gen = np.random.default_rng(0)
    p = random_packet(4, 16, gen)
    q = p.copy()
    xor_into(q, zero_packet(4, 16))
    assert q == p
    xor_into(q, p)
    assert q == zero_packet(4, 16)
    a = expand_G(p)
    ctr = OpCounter()
    xor_into(a, expand_G(random_packet(4, 16, gen)), ctr)
    assert ctr.binary_ops == 16 * 5


def test_xor_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        xor_into(zero_packet(4, 16), zero_packet(4, 8))
    with pytest.raises(ShapeMismatch):
        xor_into(zero_packet(4, 16), zero_packet(4, 16, expanded=True))


def test_shift_examples():
    p = pkt(4, [0b00001, 0b10110], expanded=True)
    assert apply_shift(p, 5) == p
    assert apply_shift(pkt(4, [0b00001], True), 1).data.tolist() == [0b00010]
    assert apply_shift(apply_shift(p, 2), 4) == apply_shift(p, 1)
    with pytest.raises(ShapeMismatch):
        apply_shift(pkt(4, [1]), 1)


def test_expand_and_project_examples():
    ctr = OpCounter()
    assert expand_G(pkt(4, [0b0111, 0]), ctr).data.tolist() == [0b10111, 0]
    assert ctr.binary_ops == 2 * 3
    ctr = OpCounter()
    expand_G(zero_packet(4, 16), ctr)
    assert ctr.binary_ops == 48
    assert project_H(pkt(4, [0b10111], True)).data.tolist() == [0b0111]
    assert project_H(zero_packet(4, 3, True)) == zero_packet(4, 3)
    with pytest.raises(ShapeMismatch):
        project_H(pkt(4, [1]))


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([1, 2, 4, 10, 16]), st.integers(0, 2**32 - 1))
def test_project_undoes_expand(L, seed):
    p = random_packet(L, 32, np.random.default_rng(seed))
    assert project_H(expand_G(p)) == p
    e = expand_G(p)
    assert all(bin(int(x)).count("1") % 2 == 0 for x in e.data)


def test_ring_application_examples():
    gen = np.random.default_rng(3)
    p = expand_G(random_packet(4, 16, gen))
    ctr = OpCounter()
    assert apply_ring(1, p, ctr) == p and ctr.binary_ops == 0
    assert apply_ring(0, p, ctr) == zero_packet(4, 16, True) and ctr.binary_ops == 0
    ctr = OpCounter()
    out = apply_ring(0b01010, pkt(4, [0b00001], True), ctr)
    assert out.data.tolist() == [0b01010]
    assert ctr.binary_ops == 5


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 31), st.integers(0, 2**32 - 1))
def test_ring_application_is_linear(e, seed):
    gen = np.random.default_rng(seed)
    p = expand_G(random_packet(4, 8, gen))
    q = expand_G(random_packet(4, 8, gen))
    s = p.copy()
    xor_into(s, q)
    lhs = apply_ring(e, s)
    rhs = apply_ring(e, p)
    xor_into(rhs, apply_ring(e, q))
    assert lhs == rhs


def test_shift_action_matches_dense_matrices():
    ok, _ = check_packet_shift_matches_dense_action("quick", 0)
    assert ok


def test_ring_action_matches_dense_conjugate_exhaustive():
    L = 4
    symbols = np.arange(16, dtype=np.uint32)
    bits = ((symbols[:, None] >> np.arange(L)) & 1).astype(np.int64)
    for e in range(32):
        got = project_H(apply_ring(e, expand_G(Packet(L, symbols)))).data
        want = ((bits @ dense_conjugate(L, e).astype(np.int64)) % 2) @ (1 << np.arange(L))
        assert got.tolist() == want.tolist()
