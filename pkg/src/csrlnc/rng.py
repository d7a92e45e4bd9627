"""SplitMix64 generator and keyed stream derivation.

All randomness in the simulator flows through :class:`SplitMix64` so that a
given ``(base_seed, trial_index, purpose)`` triple reproduces the same draws on
any platform and under any worker schedule.

Constants are the reference ones (Steele, Lea & Flood 2014)::

    state += 0x9E3779B97F4A7C15
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z ^= z >> 31
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

# stream purposes; part of the seeding contract
PURPOSE_CHANNEL = 1
PURPOSE_TRAFFIC = 2
PURPOSE_PAYLOAD = 3


def mix64(z: int) -> int:
    """SplitMix64 output finalizer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def derive_seed(base_seed: int, *keys: int) -> int:
    """Fold integer keys into ``base_seed``; order-sensitive."""
    state = mix64(base_seed)
    for key in keys:
        state = mix64(state ^ mix64((key + GOLDEN_GAMMA) & MASK64))
    return state


class SplitMix64:
    __slots__ = ("state",)

    def __init__(self, seed: int) -> None:
        self.state = seed & MASK64

    @classmethod
    def stream(cls, base_seed: int, *keys: int) -> "SplitMix64":
        return cls(derive_seed(base_seed, *keys))

    def next_u64(self) -> int:
        self.state = s = (self.state + GOLDEN_GAMMA) & MASK64
        s = ((s ^ (s >> 30)) * _M1) & MASK64
        s = ((s ^ (s >> 27)) * _M2) & MASK64
        return s ^ (s >> 31)

    def below(self, n: int) -> int:
        """Exactly uniform integer in ``[0, n)`` (Lemire's multiply-shift with rejection)."""
        if n <= 0:
            raise ValueError("n must be positive")
        m = self.next_u64() * n
        low = m & MASK64
        if low < n:
            threshold = ((1 << 64) - n) % n
            while low < threshold:
                m = self.next_u64() * n
                low = m & MASK64
        return m >> 64

    def bits(self, k: int) -> int:
        """``k`` uniform bits, ``k <= 64``."""
        return self.next_u64() >> (64 - k) if k else 0

    def uniform(self) -> float:
        """Float in ``[0, 1)`` with 53 random bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def chance(self, threshold: int) -> bool:
        """True with probability ``threshold / 2**64``; see :func:`prob_threshold`."""
        return self.next_u64() < threshold


def prob_threshold(p: float) -> int:
    """Integer cut-off so that ``next_u64() < cut`` happens with probability ``p``."""
    if p >= 1.0:
        return 1 << 64
    if p <= 0.0:
        return 0
    return int(p * (1 << 64))
