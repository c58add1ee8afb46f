"""Reference implementations and instrumentation.

Everything in this module favors obviousness over speed: the naive block
builder applies all k row hashes to every item, and exact_jaccard works
on materialized sets.  The fast paths in fingerprint.py are tested
against these, so they must stay independent of the scan machinery.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .hashing import PolynomialPair, eval_pair
from .modular import FieldParams


@dataclass
class EvalCounters:
    """Work accounting shared by the fast and naive paths.

    pair_evals counts (f, g) evaluations, one per item processed (each is
    two polynomial evaluations).  composed_evals counts individual row
    hashes computed by the naive path.  scan_cells counts below-threshold
    cells touched by the fast path; scan_steps counts its non-output work
    (recursion levels plus flip hops).
    """

    pair_evals: int = 0
    composed_evals: int = 0
    scan_cells: int = 0
    scan_steps: int = 0


def hash_eval_counter() -> EvalCounters:
    """Fresh instrumentation object accepted by the block builders."""
    return EvalCounters()


def exact_jaccard(set_a, set_b) -> float:
    """|A n B| / |A u B| on materialized sets."""
    a, b = set(set_a), set(set_b)
    if not a and not b:
        raise ValueError("Jaccard similarity is undefined for two empty sets")
    return len(a & b) / len(a | b)


def naive_minhash_block(stream, pair: PolynomialPair, k: int, params: FieldParams,
                        counters: EvalCounters | None = None):
    """Per-row minima by evaluating every row hash on every item.

    Returns a BlockState with every row updated (no thresholding).  Ties
    on hash value go to the smaller item ID, which makes the result a
    function of the item set rather than the stream order.
    """
    from .fingerprint import BlockState  # late import; fingerprint tests against this

    p = params.p
    mins = [p] * k
    items = [0] * k
    for x in stream:
        a, b = eval_pair(pair, x, params)
        if counters is not None:
            counters.pair_evals += 1
            counters.composed_evals += k
        for i in range(k):
            v = (a + i * b) % p
            if v < mins[i] or (v == mins[i] and x < items[i]):
                mins[i] = v
                items[i] = x
    return BlockState(min_values=mins, min_items=items, updated=[v < p for v in mins])
