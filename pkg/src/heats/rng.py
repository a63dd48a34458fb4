"""64-bit linear congruential generator with a fixed, portable output stream."""

import math

MULTIPLIER = 6364136223846793005
INCREMENT = 1442695040888963407
MASK64 = (1 << 64) - 1


class Rng:
    """LCG over 2**64; each draw returns the top 32 bits of the new state."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u32(self) -> int:
        self.state = (MULTIPLIER * self.state + INCREMENT) & MASK64
        return self.state >> 32

    def uniform(self) -> float:
        """Uniform draw on [0, 1)."""
        return self.next_u32() / 4294967296.0

    def gauss(self) -> float:
        # Box-Muller, one variate per pair of draws; 1 - u keeps log away from 0
        u1 = 1.0 - self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
