import dataclasses

import pytest

from mfp.estimator import (
    BlockEstimate,
    IncompatibleFingerprintsError,
    NoUsableBlocksError,
    SimilarityEstimate,
    block_estimate,
    median_estimate,
    params_for,
)
from mfp.fingerprint import Fingerprint, FingerprintBlock, SketchConfig, build_fingerprint
from mfp.modular import FieldParams


def test_params_for_known_targets():
    cfg = params_for(0.1, 0.05)
    assert (cfg.k, cfg.m) == (802, 12)
    cfg = params_for(0.25, 0.25, master_seed=123)
    assert (cfg.k, cfg.m) == (129, 6)
    assert cfg.master_seed == 123


def blocks_pair(bits_a, bits_b, valid_a=True, valid_b=True):
    a = FingerprintBlock(pair_seed=10, bit_seed=11, valid=valid_a, bits=bits_a)
    b = FingerprintBlock(pair_seed=10, bit_seed=11, valid=valid_b, bits=bits_b)
    return a, b


def test_block_estimate_counts_collisions():
    a, b = blocks_pair(0b1011, 0b0011)
    est = block_estimate(a, b, k=4)
    assert est == BlockEstimate(collisions=3, y=0.5)
    a, b = blocks_pair(0b1111, 0b1111)
    assert block_estimate(a, b, k=4).y == 1.0
    a, b = blocks_pair(0b1111, 0b0000)
    assert block_estimate(a, b, k=4).y == -1.0


def test_block_estimate_skips_invalid():
    a, b = blocks_pair(0b1011, 0b0011, valid_a=False)
    assert block_estimate(a, b, k=4) is None
    a, b = blocks_pair(0b1011, 0, valid_b=False)
    assert block_estimate(a, b, k=4) is None


def test_block_estimate_rejects_seed_mismatch():
    a = FingerprintBlock(pair_seed=10, bit_seed=11, valid=True, bits=1)
    b = FingerprintBlock(pair_seed=12, bit_seed=11, valid=True, bits=1)
    with pytest.raises(IncompatibleFingerprintsError):
        block_estimate(a, b, k=4)


def test_clamped_estimate():
    est = SimilarityEstimate(j_hat=-0.25, used_blocks=3, block_estimates=(-0.25,))
    assert est.clamped == 0.0
    est = SimilarityEstimate(j_hat=1.5, used_blocks=3, block_estimates=(1.5,))
    assert est.clamped == 1.0
    est = SimilarityEstimate(j_hat=0.4, used_blocks=3, block_estimates=(0.4,))
    assert est.clamped == 0.4


def build_pair(seed=1, eps=0.5, delta=0.5):
    cfg = SketchConfig.from_accuracy(eps, delta, master_seed=seed)
    fa = build_fingerprint(range(100), cfg)
    fb = build_fingerprint(range(50, 150), cfg)
    return fa, fb


def test_median_estimate_self_is_one():
    fa, _ = build_pair()
    est = median_estimate(fa, fa)
    assert est.j_hat == 1.0
    assert est.used_blocks == fa.config.m
    assert all(y == 1.0 for y in est.block_estimates)


def test_median_estimate_symmetry():
    fa, fb = build_pair()
    assert median_estimate(fa, fb) == median_estimate(fb, fa)


def test_median_estimate_skips_invalid_blocks():
    fa, fb = build_pair()
    full = median_estimate(fa, fb)
    kill = dataclasses.replace(fa.blocks[0], valid=False, bits=0)
    fa_short = dataclasses.replace(fa, blocks=(kill,) + fa.blocks[1:])
    est = median_estimate(fa_short, fb)
    assert est.used_blocks == full.used_blocks - 1
    assert est.block_estimates == full.block_estimates[1:]


def test_median_estimate_no_usable_blocks():
    fa, fb = build_pair()
    dead = tuple(dataclasses.replace(b, valid=False, bits=0) for b in fa.blocks)
    fa_dead = dataclasses.replace(fa, blocks=dead)
    with pytest.raises(NoUsableBlocksError):
        median_estimate(fa_dead, fb)


def test_incompatibility_names_the_field():
    base = SketchConfig.from_accuracy(0.5, 0.5, master_seed=1)
    fa = build_fingerprint(range(40), base)
    cases = [
        (SketchConfig.from_accuracy(0.25, 0.5, master_seed=1), "epsilon"),
        (SketchConfig.from_accuracy(0.5, 0.25, master_seed=1), "delta"),
        (SketchConfig.from_accuracy(0.5, 0.5, master_seed=2), "master_seed"),
        (
            SketchConfig.from_accuracy(
                0.5, 0.5, params=FieldParams(p=(1 << 31) - 1, u=(1 << 31) - 2),
                master_seed=1),
            "field parameters",
        ),
    ]
    for other_cfg, needle in cases:
        fb = build_fingerprint(range(40), other_cfg)
        with pytest.raises(IncompatibleFingerprintsError, match=needle):
            median_estimate(fa, fb)


def test_median_estimate_even_block_count_averages():
    # statistics.median averages the two central estimates when the number
    # of usable blocks is even
    fa, fb = build_pair(eps=0.5, delta=0.5)  # m == 3
    drop = dataclasses.replace(fa.blocks[2], valid=False, bits=0)
    fa_two = dataclasses.replace(fa, blocks=fa.blocks[:2] + (drop,))
    est = median_estimate(fa_two, fb)
    assert est.used_blocks == 2
    assert est.j_hat == pytest.approx(sum(est.block_estimates) / 2)
