"""Deterministic randomness for reproducible fingerprints.

The generator is splitmix64: state advances by a fixed odd constant and
each output is a bijective 64-bit mix of the state.  It is trivial to
reimplement in any language, which keeps serialized fingerprints
reproducible across implementations, not just across runs.

Subseed scheme: the n-th derived seed of a master seed s is
``mix64((s + (n + 1) * GAMMA) mod 2**64)``, i.e. the n-th output of the
splitmix64 stream seeded with s.  Block i of a fingerprint uses derived
seed 2*i for its polynomial pair and 2*i + 1 for its bit hash.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """The splitmix64 output mix; a bijection on 64-bit ints."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, index: int) -> int:
    """index-th subseed of master_seed (the counter scheme above)."""
    return mix64((master_seed + (index + 1) * GAMMA) & _MASK64)


def pair_seed_for_block(master_seed: int, block_index: int) -> int:
    return derive_seed(master_seed, 2 * block_index)


def bit_seed_for_block(master_seed: int, block_index: int) -> int:
    return derive_seed(master_seed, 2 * block_index + 1)


class SplitMix64:
    """Stream form of the generator, with unbiased field-element draws."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + GAMMA) & _MASK64
        return mix64(self._state)

    def below(self, bound: int) -> int:
        """Uniform draw in [0, bound) by top-bits rejection.

        Each attempt keeps bound.bit_length() top bits of a 64-bit output
        and rejects values >= bound, so acceptance is at least 1/2 per
        attempt and the result is exactly uniform.
        """
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        shift = 64 - bound.bit_length()
        while True:
            r = self.next_u64() >> shift
            if r < bound:
                return r

    def nonzero_below(self, bound: int) -> int:
        """Uniform draw in [1, bound)."""
        while True:
            r = self.below(bound)
            if r:
                return r
