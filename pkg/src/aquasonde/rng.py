"""Deterministic noise source for the device simulator.

xorshift64* (Vigna's multiply variant of Marsaglia's xorshift64) with a
Box-Muller transform on top.  Chosen over the stdlib generator because
the algorithm is a dozen lines in any language, so an independent
implementation reproduces simulator byte streams bit-exactly from the
same seed.
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1
_MULTIPLIER = 0x2545F4914F6CDD1D
# xorshift state must never be zero; substitute a fixed odd constant.
_ZERO_SEED_SUBSTITUTE = 0x9E3779B97F4A7C15

_TWO_PI = 2.0 * math.pi


class Xorshift64Star:
    """64-bit xorshift* stream with uniform and Gaussian draws."""

    def __init__(self, seed: int) -> None:
        self._state = (seed & _MASK64) or _ZERO_SEED_SUBSTITUTE
        self._spare_gauss: float | None = None

    def next_u64(self) -> int:
        x = self._state
        x ^= (x >> 12)
        x ^= (x << 25) & _MASK64
        x ^= (x >> 27)
        self._state = x
        return (x * _MULTIPLIER) & _MASK64

    def uniform(self) -> float:
        """Uniform draw in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def gauss(self, sigma: float) -> float:
        """Gaussian draw, mean 0, via Box-Muller (pairs cached)."""
        if self._spare_gauss is not None:
            z = self._spare_gauss
            self._spare_gauss = None
            return z * sigma
        # 1 - uniform() lies in (0, 1], keeping the log finite.
        r = math.sqrt(-2.0 * math.log(1.0 - self.uniform()))
        theta = _TWO_PI * self.uniform()
        self._spare_gauss = r * math.sin(theta)
        return r * math.cos(theta) * sigma
