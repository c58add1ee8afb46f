"""Compiled fast path for block updates at machine-word moduli.

The functions here mirror the run-walk scan in scan.py, fused with the
row-minimum update so no intermediate lists are built.  They are written
in plain int arithmetic and compiled with numba when it is installed;
all intermediates stay below 2**63 provided p <= KERNEL_MAX_P, which the
dispatcher in fingerprint.py enforces.  Larger moduli always take the
pure-Python path.

scan.py stays the canonical implementation; tests pin this replica to it
on randomized streams across the supported test primes.
"""

from __future__ import annotations

import numpy as np

# Largest modulus with overflow-free int64 intermediates: products are
# bounded by (p-1)**2 + (p-1) < 2**63 for p <= 2**31 - 1.
KERNEL_MAX_P = (1 << 31) - 1


def _modinv_i64(v, p):
    # Extended Euclid; Bezout coefficients stay below p so every product
    # here fits comfortably in int64.
    old_r, r = v, p
    old_s, s = 1, 0
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
    return old_s % p


def _update_run_i64(v0, dv, n, a0, b_inv, p0, k0, x, mins, items):
    # Apply one value run to the row minima.  Positions are recovered from
    # values: consecutive run values map to positions stepping by
    # dv * b^-1 mod p0.  Rows repeat every p0 positions when k0 > p0.
    i = ((v0 - a0) % p0) * b_inv % p0
    di = dv * b_inv % p0
    v = v0
    for _ in range(n):
        row = i
        while row < k0:
            mv = mins[row]
            if v < mv or (v == mv and x < items[row]):
                mins[row] = v
                items[row] = x
            row += p0
        v += dv
        i += di
        if i >= p0:
            i -= p0
    return n


def _scan_update_i64(a0, b0, p0, k0, t, x, mins, items):
    # One item's column: find every row value below t and fold it into the
    # minima.  Returns (cells touched, non-output steps).
    cells = 0
    steps = 0
    if t <= 0:
        return 0, 0
    if b0 == 0:
        if a0 < t:
            for row in range(k0):
                mv = mins[row]
                if a0 < mv or (a0 == mv and x < items[row]):
                    mins[row] = a0
                    items[row] = x
            cells = k0
        return cells, steps
    k_eff = k0 if k0 < p0 else p0
    b_inv = _modinv_i64(b0, p0)
    a, b, p, k = a0, b0, p0, k_eff
    while True:
        if k <= 0:
            return cells, steps
        if b == 0:
            if a < t:
                cells += _update_run_i64(a, 0, k, a0, b_inv, p0, k0, x, mins, items)
            return cells, steps
        if b < t:
            break
        if 2 * b > p:
            a = (a + (k - 1) * b) % p
            b = p - b
            steps += 1
            continue
        j0 = (p - a + b - 1) // b
        kn = (a + (k - 1) * b) // p
        if a < b:
            j0 = 0
            kn += 1
        a = (a + j0 * b) % p
        pn = b
        b = (-p) % b
        p = pn
        k = kn
        steps += 1
    # Run walk at the level where the step dropped below the threshold.
    if a < t:
        n = (t - a + b - 1) // b
        if n > k:
            n = k
        cells += _update_run_i64(a, b, n, a0, b_inv, p0, k0, x, mins, items)
        j = n
        if j >= k:
            return cells, steps
        v = a + n * b
        if v >= p:
            v -= p
        else:
            d = (p - v + b - 1) // b
            j += d
            v += d * b - p
    else:
        j = (p - a + b - 1) // b
        v = a + j * b - p
    while j < k:
        steps += 1
        n = (t - v + b - 1) // b
        rem = k - j
        if n > rem:
            n = rem
        cells += _update_run_i64(v, b, n, a0, b_inv, p0, k0, x, mins, items)
        j += n
        if j >= k:
            break
        v += n * b
        if v >= p:
            v -= p
            continue
        d = (p - v + b - 1) // b
        j += d
        v += d * b - p
    return cells, steps


def block_update_i64(xs, f_coeffs, g_coeffs, p, k, t, mins, items):
    # Whole-block update: Horner-evaluate (f, g) per item, then scan its
    # column.  Arrays are int64; mins/items are updated in place.
    cells = 0
    steps = 0
    nf = f_coeffs.shape[0]
    ng = g_coeffs.shape[0]
    for n in range(xs.shape[0]):
        x = xs[n]
        a = 0
        for ci in range(nf - 1, -1, -1):
            a = (a * x + f_coeffs[ci]) % p
        b = 0
        for ci in range(ng - 1, -1, -1):
            b = (b * x + g_coeffs[ci]) % p
        c, s = _scan_update_i64(a, b, p, k, t, x, mins, items)
        cells += c
        steps += s
    return cells, steps


try:
    import numba

    _modinv_i64 = numba.njit(cache=True)(_modinv_i64)
    _update_run_i64 = numba.njit(cache=True)(_update_run_i64)
    _scan_update_i64 = numba.njit(cache=True)(_scan_update_i64)
    block_update_i64 = numba.njit(cache=True)(block_update_i64)
    KERNEL_COMPILED = True
except ImportError:  # pragma: no cover - exercised only without numba
    KERNEL_COMPILED = False


def new_state_arrays(k: int, p: int):
    """Fresh row minima (sentinel p) and minimizer IDs as int64 arrays."""
    return np.full(k, p, dtype=np.int64), np.zeros(k, dtype=np.int64)
