"""Sub-linear threshold scans over arithmetic progressions mod p.

The query: given the series s_i = (a + i*b) mod p for i in [0, k), report
every position whose value is strictly below a threshold t, without
touching all k positions.

Two facts drive the algorithm.  Walking the series, values climb by b
until they wrap past p; a position whose value drops below its
predecessor ("a flip") always lands in [0, b).  First, when b < t every
below-threshold position belongs to a run that starts at a flip (or at
position 0), so it suffices to hop from flip to flip and emit each run.
Second, when b >= t only flips can be below t, and the flip values
themselves form an arithmetic progression with step (-p) mod b taken
modulo b, so the search recurses on a strictly smaller instance.  A
series with step above p/2 is first rewritten as its reversal, which has
step p - b < p/2 and the same value multiset.  Each recursion level at
least halves the series length, giving O(log k) levels plus work
proportional to the output.

Results are produced as value runs (start, step, count) and positions are
recovered at the top level only, multiplying by the single inverse of b
mod p.  The recursion never needs inverses of the intermediate steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .modular import mod_inverse


@dataclass(frozen=True)
class ProgressionQuery:
    """The series (a + i*b) mod p for i in [0, k), thresholded at t."""

    a: int
    b: int
    p: int
    k: int
    t: int

    def __post_init__(self):
        if self.p < 2:
            raise ValueError(f"modulus must be at least 2, got {self.p}")
        if not 0 <= self.a < self.p:
            raise ValueError(f"start {self.a} outside [0, {self.p})")
        if not 0 <= self.b < self.p:
            raise ValueError(f"step {self.b} outside [0, {self.p})")
        if self.k < 1:
            raise ValueError(f"length must be at least 1, got {self.k}")
        if not 0 <= self.t <= self.p:
            raise ValueError(f"threshold {self.t} outside [0, {self.p}]")


@dataclass
class ScanResult:
    """Below-threshold positions in ascending order with their values."""

    indices: list[int]
    values: list[int]


@dataclass(frozen=True)
class FlipProgression:
    """The flip values of a series, as a progression mod the old step.

    Position 0 counts as a flip when a < b (its predecessor would wrap),
    matching how the scan recursion consumes this structure.
    """

    a_prime: int
    b_prime: int
    modulus: int
    k_prime: int


@dataclass
class ScanStats:
    """Instrumentation: recursion depth and non-output walk steps."""

    depth: int = 0
    steps: int = 0
    cells: int = 0


class ScanConsistencyError(AssertionError):
    """A recovered position fell outside [0, k); must never happen."""


def flip_progression(q: ProgressionQuery) -> FlipProgression:
    """Describe the flips of q's series without enumerating it.

    The first flip past position 0 sits at index ceil((p - a) / b).  Flips
    among positions 1..k-1 are wraps of the running sum, so there are
    floor((a + (k-1)*b) / p) of them; position 0 is prepended as a flip
    when a < b.  Consecutive flip values differ by (-p) mod b, modulo b.
    """
    a, b, p, k = q.a, q.b, q.p, q.k
    if b == 0:
        raise ValueError("constant series has no flip structure")
    j = (p - a + b - 1) // b
    k_prime = (a + (k - 1) * b) // p
    if a < b:
        j = 0
        k_prime += 1
    return FlipProgression(
        a_prime=(a + j * b) % p,
        b_prime=(-p) % b,
        modulus=b,
        k_prime=k_prime,
    )


def _walk_runs(a: int, b: int, p: int, k: int, t: int, out: list) -> int:
    """Emit all below-t runs of the series as (start_value, b, count).

    Requires 0 < b < t <= p.  Values inside a run are exact ints (no mod
    needed): a run climbs from below t and stops before reaching p.
    Returns the number of flip hops taken (work not tied to output size).
    """
    steps = 0
    if a < t:
        n = (t - a + b - 1) // b
        if n > k:
            n = k
        out.append((a, b, n))
        j = n
        if j >= k:
            return steps
        v = a + n * b  # in [t, t + b); may have passed p when t is near p
        if v >= p:
            v -= p  # position j wrapped: it is a flip, value < b < t
        else:
            d = (p - v + b - 1) // b
            j += d
            v += d * b - p
    else:
        j = (p - a + b - 1) // b
        v = a + j * b - p
    # Loop invariant: j indexes a flip with true value v in [0, b).
    while j < k:
        steps += 1
        n = (t - v + b - 1) // b
        rem = k - j
        if n > rem:
            n = rem
        out.append((v, b, n))
        j += n
        if j >= k:
            break
        v += n * b
        if v >= p:
            v -= p  # wrap landed exactly on the next flip
            continue
        d = (p - v + b - 1) // b
        j += d
        v += d * b - p
    return steps


def _scan_runs(a: int, b: int, p: int, k: int, t: int, stats: ScanStats | None = None) -> list:
    """Core scan.  Returns value runs (start, step, count) whose expansion
    is exactly the multiset of below-t values of the series.

    Every branch of the recursion is a tail call, so it is written as a
    loop: either the step is below the threshold and the series is walked
    run by run, or the instance is replaced by its reversal / its flip
    progression.  Values pass through levels unchanged; only the top
    level knows original positions.
    """
    runs: list = []
    depth = 0
    steps = 0
    while True:
        if k <= 0 or t <= 0:
            break
        if b == 0:
            if a < t:
                runs.append((a, 0, k))
            break
        if b < t:
            steps += _walk_runs(a, b, p, k, t, runs)
            break
        if 2 * b > p:
            # Reversal: same values, step p - b < p/2.
            a = (a + (k - 1) * b) % p
            b = p - b
            depth += 1
            continue
        # Here 0 < t <= b <= p/2: only flips can be below t, and they form
        # a progression mod b.  Descend onto it.
        j = (p - a + b - 1) // b
        k_new = (a + (k - 1) * b) // p
        if a < b:
            j = 0
            k_new += 1
        a = (a + j * b) % p
        p, b, k = b, (-p) % b, k_new
        depth += 1
    if stats is not None:
        stats.depth += depth
        stats.steps += steps + depth
        stats.cells += sum(r[2] for r in runs)
    return runs


def scan_values_below(q: ProgressionQuery) -> list[int]:
    """The multiset of below-t values over all k positions, in emission
    order.  With k > p the series repeats every p positions and the
    repeats are included."""
    if q.b == 0:
        return [q.a] * q.k if q.a < q.t else []
    out: list[int] = []
    for v0, dv, n in _scan_runs(q.a, q.b, q.p, q.k, q.t):
        if dv:
            out.extend(range(v0, v0 + n * dv, dv))
        else:
            out.extend([v0] * n)
    return out


def scan_below_threshold(q: ProgressionQuery, stats: ScanStats | None = None) -> ScanResult:
    """Positions and values below t, sorted by position.

    Runs from the scan are mapped back to positions with the single
    inverse of b mod p: a value run (v0, dv, n) recovers to positions
    (v0 - a) * b^-1 + r * (dv * b^-1) mod p, r < n.  When k exceeds p the
    series is periodic, so the first min(k, p) positions are scanned and
    each hit is replicated every p positions.
    """
    a, b, p, k, t = q.a, q.b, q.p, q.k, q.t
    if b == 0:
        if a < t:
            return ScanResult(indices=list(range(k)), values=[a] * k)
        return ScanResult(indices=[], values=[])
    k_eff = k if k < p else p
    runs = _scan_runs(a, b, p, k_eff, t, stats)
    if not runs:
        return ScanResult(indices=[], values=[])
    b_inv = mod_inverse(b, p)
    pairs = []
    for v0, dv, n in runs:
        i = (v0 - a) * b_inv % p
        di = dv * b_inv % p
        v = v0
        for _ in range(n):
            if i >= k_eff:
                raise ScanConsistencyError(
                    f"recovered position {i} outside [0, {k_eff}) for query {q}"
                )
            pairs.append((i, v))
            v += dv
            i += di
            if i >= p:
                i -= p
    if k > p:
        pairs = [(i + m * p, v) for i, v in pairs for m in range((k - 1 - i) // p + 1)]
    pairs.sort()
    return ScanResult(indices=[i for i, _ in pairs], values=[v for _, v in pairs])


def brute_scan(q: ProgressionQuery) -> ScanResult:
    """Reference implementation: enumerate all k positions.

    Deliberately direct; the scan functions are tested against it.
    """
    a, b, p, t = q.a, q.b, q.p, q.t
    hits = [(i, v) for i in range(q.k) if (v := (a + i * b) % p) < t]
    return ScanResult(indices=[i for i, _ in hits], values=[v for _, v in hits])
