"""Jaccard similarity estimation from fingerprint pairs.

Each valid block pair yields one unbiased-up-to-gamma estimate: a row
collides (equal bits) with probability (1 + J) / 2, so y = (2c - k) / k
for c colliding rows estimates J within epsilon with probability 7/8.
The median over block estimates then fails with probability below delta.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass

from .fingerprint import Fingerprint, FingerprintBlock, SketchConfig
from .modular import FieldParams


class IncompatibleFingerprintsError(ValueError):
    """Fingerprints built with different parameters or seeds."""


class NoUsableBlocksError(ValueError):
    """No block index is valid in both fingerprints."""


def params_for(epsilon: float, delta: float,
               params: FieldParams | None = None,
               master_seed: int = 0) -> SketchConfig:
    """Sketch parameters meeting an (epsilon, delta) accuracy target."""
    return SketchConfig.from_accuracy(epsilon, delta, params=params, master_seed=master_seed)


@dataclass(frozen=True)
class BlockEstimate:
    """One block pair's contribution: c colliding rows out of k."""

    collisions: int
    y: float


@dataclass(frozen=True)
class SimilarityEstimate:
    """Median estimate with its per-block inputs.

    j_hat is the raw median and may fall slightly outside [0, 1];
    clamped is the convenience value for presentation.
    """

    j_hat: float
    used_blocks: int
    block_estimates: tuple[float, ...]

    @property
    def clamped(self) -> float:
        return min(1.0, max(0.0, self.j_hat))


def block_estimate(block_a: FingerprintBlock, block_b: FingerprintBlock,
                   k: int) -> BlockEstimate | None:
    """Estimate from one block pair, or None when either block is invalid
    (the skip signal for the median)."""
    if block_a.pair_seed != block_b.pair_seed or block_a.bit_seed != block_b.bit_seed:
        raise IncompatibleFingerprintsError(
            "block seeds differ; fingerprints were not built from the same master seed")
    if not (block_a.valid and block_b.valid):
        return None
    c = k - (block_a.bits ^ block_b.bits).bit_count()
    return BlockEstimate(collisions=c, y=(2 * c - k) / k)


def _check_compatible(fa: Fingerprint, fb: Fingerprint) -> None:
    ca, cb = fa.config, fb.config
    for name in ("epsilon", "delta", "k", "m", "d", "master_seed"):
        va, vb = getattr(ca, name), getattr(cb, name)
        if va != vb:
            raise IncompatibleFingerprintsError(f"{name} differs: {va} vs {vb}")
    if ca.params != cb.params:
        raise IncompatibleFingerprintsError(
            f"field parameters differ: {ca.params} vs {cb.params}")


def median_estimate(fa: Fingerprint, fb: Fingerprint) -> SimilarityEstimate:
    """Median of the per-block estimates over block pairs valid on both
    sides.  Raises NoUsableBlocksError when every pair has an invalid
    side, and IncompatibleFingerprintsError on any parameter mismatch."""
    _check_compatible(fa, fb)
    ys = []
    k = fa.config.k
    for block_a, block_b in zip(fa.blocks, fb.blocks):
        est = block_estimate(block_a, block_b, k)
        if est is not None:
            ys.append(est.y)
    if not ys:
        raise NoUsableBlocksError("no block is valid in both fingerprints")
    return SimilarityEstimate(
        j_hat=float(statistics.median(ys)),
        used_blocks=len(ys),
        block_estimates=tuple(ys),
    )
