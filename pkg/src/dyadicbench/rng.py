"""Portable xorshift64* generator.

Seeding: the integer seed is passed once through splitmix64 so that every
seed, including 0, gives a non-zero state::

    z = (seed + 0x9E3779B97F4A7C15) mod 2**64
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2**64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB mod 2**64
    state = z ^ (z >> 31)          (replaced by 1 if zero)

Update and output::

    x ^= x >> 12;  x ^= (x << 25) mod 2**64;  x ^= x >> 27
    output = x * 0x2545F4914F6CDD1D mod 2**64

Derived draws: ``below(k)`` is ``output mod k`` after rejecting the top
``2**64 mod k`` outputs, ``random()`` is ``(output >> 11) * 2**-53``.
"""
from __future__ import annotations

_MASK = (1 << 64) - 1


def splitmix64(seed: int) -> int:
    z = (seed + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class XorShift64Star:
    def __init__(self, seed: int):
        self.state = splitmix64(int(seed) & _MASK) or 1

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & _MASK
        x ^= x >> 27
        self.state = x
        return (x * 0x2545F4914F6CDD1D) & _MASK

    def below(self, k: int) -> int:
        """Uniform integer in [0, k)."""
        if k <= 0:
            raise ValueError("k must be positive")
        limit = (1 << 64) - ((1 << 64) % k)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % k

    def random(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def sample(self, population: list, count: int) -> list:
        """``count`` distinct items by a partial Fisher-Yates shuffle."""
        items = list(population)
        for i in range(count):
            j = i + self.below(len(items) - i)
            items[i], items[j] = items[j], items[i]
        return items[:count]
