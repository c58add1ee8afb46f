"""Prime-field arithmetic for the fingerprinting pipeline.

Everything here works on plain Python ints.  Values are canonical residues
in [0, p); intermediate products are exact because Python ints are
arbitrary precision, so no reduction tricks are needed even at the default
61-bit prime.
"""

from __future__ import annotations

from dataclasses import dataclass

# Largest prime below 2**61, the default modulus.  Field elements fit in a
# machine word and squares fit in 128 bits on any mainstream platform.
MERSENNE61 = (1 << 61) - 1

# Small primes used throughout the test suite next to the default one.
TEST_PRIMES = (7, 101, 10007, (1 << 31) - 1, MERSENNE61)

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 3.3e24, plenty for 64-bit moduli."""
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for base in _MR_BASES:
        x = pow(base, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class FieldParams:
    """Modulus p and universe bound u.

    Item IDs live in [0, u) and u < p, so every ID is a field element and
    the sentinel value p can never collide with a real hash value.
    """

    p: int = MERSENNE61
    u: int = MERSENNE61 - 1

    def __post_init__(self):
        if self.p < 3:
            raise ValueError(f"modulus must be an odd prime, got {self.p}")
        if not is_prime(self.p):
            raise ValueError(f"modulus {self.p} is not prime")
        if not 0 < self.u < self.p:
            raise ValueError(f"universe bound must satisfy 0 < u < p, got u={self.u} p={self.p}")


def mod_inverse(v: int, p: int) -> int:
    """Multiplicative inverse of v modulo p via the extended Euclid loop.

    Raises ZeroDivisionError for v == 0 (mod p), which has no inverse.
    """
    v %= p
    if v == 0:
        raise ZeroDivisionError("0 has no inverse modulo p")
    old_r, r = v, p
    old_s, s = 1, 0
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
    # old_r == gcd(v, p) == 1 because p is prime and v != 0
    return old_s % p


def poly_eval(coeffs: list[int], x: int, p: int) -> int:
    """Evaluate sum(coeffs[i] * x**i) mod p by Horner's rule.

    coeffs[0] is the constant term.  An empty coefficient list is the zero
    polynomial.
    """
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % p
    return acc
