from collections import Counter

from csrlnc.rng import MASK64, SplitMix64, derive_seed, mix64, prob_threshold


def test_reference_sequence():
    # published first outputs of SplitMix64 seeded with 0
    gen = SplitMix64(0)
    assert gen.next_u64() == 0xE220A8397B1DCDAF
    assert gen.next_u64() == 0x6E789E6AA1B965F4
    assert gen.next_u64() == 0x06C45D188009454F


def test_derive_seed_is_keyed_and_order_sensitive():
    assert derive_seed(5, 1, 2) == derive_seed(5, 1, 2)
    assert derive_seed(5, 1, 2) != derive_seed(5, 2, 1)
    assert derive_seed(5, 1) != derive_seed(6, 1)
    assert 0 <= derive_seed(2**70, 3) <= MASK64
    assert mix64(0) == 0


def test_below_is_uniform_and_in_range():
    gen = SplitMix64(123)
    counts = Counter(gen.below(6) for _ in range(60_000))
    assert set(counts) == set(range(6))
    for k in range(6):
        assert abs(counts[k] - 10_000) < 5 * 91  # 5 sigma


def test_uniform_and_chance():
    gen = SplitMix64(9)
    xs = [gen.uniform() for _ in range(20_000)]
    assert all(0.0 <= x < 1.0 for x in xs)
    assert abs(sum(xs) / len(xs) - 0.5) < 0.01
    assert prob_threshold(1.0) == 1 << 64 and prob_threshold(0.0) == 0
    gen = SplitMix64(1)
    assert all(gen.chance(prob_threshold(1.0)) for _ in range(100))
    hits = sum(gen.chance(prob_threshold(0.25)) for _ in range(40_000))
    assert abs(hits - 10_000) < 5 * 87
