"""Hash families for min-hash rows.

A block draws one pair of random degree-d polynomials (f, g) over Z_p.
Row i of the block hashes x to f(x) + i*g(x) mod p, so for a fixed x the
k row values form an arithmetic progression with start f(x) and step
g(x).  That structure is what lets a block be updated by scanning the
progression instead of evaluating k separate hashes.

High-degree random polynomials approximate a min-wise independent family:
any fixed element of a set is the row minimum with probability close to
1/|set|, with relative error gamma controlled by the degree.  A separate
pairwise-independent one-bit hash compresses each row's minimizer to the
single stored bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .modular import FieldParams
from .rng import SplitMix64

# Relative error of the approximately min-wise family, as a fraction of
# the sketch accuracy it has to support.
GAMMA_FRACTION = 1 / (1 << 10)


def independence_level(epsilon: float) -> int:
    """Independence level needed so the min-wise error stays below
    epsilon / 2**10.  Grows only with log(1/epsilon)."""
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    return math.ceil(80 + 2 * math.log2(1 / epsilon))


def degree_for_accuracy(epsilon: float) -> int:
    """Polynomial degree used by the family; one above the independence
    level so distinct inputs stay jointly unconstrained."""
    return independence_level(epsilon) + 1


def gamma_for_accuracy(epsilon: float) -> float:
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    return epsilon * GAMMA_FRACTION


@dataclass(frozen=True)
class FamilyConfig:
    """Degree, min-wise error bound, and field for one hash family."""

    d: int
    gamma: float
    params: FieldParams

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"degree must be at least 1, got {self.d}")
        if not 0 < self.gamma < 1:
            raise ValueError(f"gamma must be in (0, 1), got {self.gamma}")

    @classmethod
    def for_accuracy(cls, epsilon: float, params: FieldParams) -> "FamilyConfig":
        return cls(d=degree_for_accuracy(epsilon), gamma=gamma_for_accuracy(epsilon), params=params)


@dataclass(frozen=True)
class PolynomialPair:
    """Coefficients of (f, g) plus the seed they were drawn from.

    Coefficient lists are constant-term first and have d + 1 entries.
    """

    f_coeffs: tuple[int, ...]
    g_coeffs: tuple[int, ...]
    seed: int


@dataclass(frozen=True)
class BitHash:
    """Pairwise-independent one-bit hash: low bit of c0 + c1*x mod p."""

    c0: int
    c1: int
    seed: int


def sample_base_pair(seed: int, config: FamilyConfig) -> PolynomialPair:
    """Draw the 2*(d+1) coefficients of (f, g), f first, from the seeded
    stream.  Deterministic given (seed, config)."""
    rng = SplitMix64(seed)
    p = config.params.p
    n = config.d + 1
    f = tuple(rng.below(p) for _ in range(n))
    g = tuple(rng.below(p) for _ in range(n))
    return PolynomialPair(f_coeffs=f, g_coeffs=g, seed=seed)


def eval_pair(pair: PolynomialPair, x: int, params: FieldParams) -> tuple[int, int]:
    """(f(x), g(x)) for one item; the start and step of its row progression."""
    if not 0 <= x < params.u:
        raise ValueError(f"item {x} outside universe [0, {params.u})")
    p = params.p
    a = 0
    for c in reversed(pair.f_coeffs):
        a = (a * x + c) % p
    b = 0
    for c in reversed(pair.g_coeffs):
        b = (b * x + c) % p
    return a, b


def composed_hash(a: int, b: int, i: int, params: FieldParams) -> int:
    """Row-i hash value from a precomputed pair evaluation."""
    if i < 0:
        raise ValueError(f"row index must be non-negative, got {i}")
    return (a + i * b) % params.p


def sample_bit_hash(seed: int, params: FieldParams) -> BitHash:
    """Draw c0 uniform in [0, p) and c1 uniform in [1, p)."""
    rng = SplitMix64(seed)
    return BitHash(c0=rng.below(params.p), c1=rng.nonzero_below(params.p), seed=seed)


def apply_bit_hash(bit_hash: BitHash, x: int, params: FieldParams) -> int:
    if not 0 <= x < params.u:
        raise ValueError(f"item {x} outside universe [0, {params.u})")
    return ((bit_hash.c0 + bit_hash.c1 * x) % params.p) & 1
