"""Portable pseudo-random symbol source.

Experiments need symbol sequences that are identical across platforms
and library versions, so the generator is pinned to SplitMix64: a
public-domain 64-bit mix with a one-word state, defined by exact
integer operations.  Each call advances the state by a fixed odd
constant and scrambles it with two xor-shift-multiply rounds.
"""

from __future__ import annotations

__all__ = ["SplitMix64", "random_symbols"]

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """SplitMix64 sequence seeded with a 64-bit integer."""

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK

    def next_uint64(self) -> int:
        """Next raw 64-bit output."""
        self._state = (self._state + _GAMMA) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK
        return z ^ (z >> 31)

    def next_below(self, bound: int) -> int:
        """Uniform integer in ``[0, bound)`` for power-of-two bounds.

        Uses the top bits of the output, which have the best
        equidistribution properties of the mix.
        """
        if bound <= 0 or bound & (bound - 1):
            raise ValueError(f"bound must be a positive power of two, got {bound}")
        return self.next_uint64() >> (64 - bound.bit_length() + 1)


def random_symbols(seed: int, count: int, alphabet_size: int = 4) -> list[int]:
    """Deterministic uniform symbol sequence for a given seed."""
    gen = SplitMix64(seed)
    return [gen.next_below(alphabet_size) for _ in range(count)]
