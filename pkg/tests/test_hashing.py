import random

import pytest
from hypothesis import given, strategies as st

from mfp.hashing import (
    GAMMA_FRACTION,
    BitHash,
    FamilyConfig,
    apply_bit_hash,
    composed_hash,
    degree_for_accuracy,
    eval_pair,
    gamma_for_accuracy,
    independence_level,
    sample_base_pair,
    sample_bit_hash,
)
from mfp.modular import FieldParams, poly_eval
from mfp.rng import SplitMix64


def test_independence_level_values():
    # ceil(80 + 2*log2(1/epsilon)), checked by hand
    assert independence_level(0.5) == 82
    assert independence_level(0.25) == 84
    assert independence_level(0.15) == 86
    assert independence_level(0.1) == 87
    assert independence_level(1 / 32) == 90


def test_independence_level_validation():
    for bad in (0.0, 1.0, -0.1, 2.0):
        with pytest.raises(ValueError):
            independence_level(bad)


def test_degree_is_level_plus_one():
    for eps in (0.5, 0.25, 0.1, 0.01):
        assert degree_for_accuracy(eps) == independence_level(eps) + 1


def test_gamma_fraction():
    assert GAMMA_FRACTION == 2**-10
    # exact in binary floating point
    assert gamma_for_accuracy(1 / 32) == 2**-15
    assert gamma_for_accuracy(0.5) == 2**-11


def test_family_config_validation():
    params = FieldParams(p=101, u=100)
    with pytest.raises(ValueError):
        FamilyConfig(d=0, gamma=0.5, params=params)
    with pytest.raises(ValueError):
        FamilyConfig(d=5, gamma=0.0, params=params)
    cfg = FamilyConfig.for_accuracy(0.25, params)
    assert cfg.d == 85
    assert cfg.gamma == gamma_for_accuracy(0.25)


def test_sample_base_pair_shape_and_determinism():
    params = FieldParams(p=10007, u=10006)
    cfg = FamilyConfig(d=6, gamma=0.5, params=params)
    pair = sample_base_pair(12345, cfg)
    assert pair == sample_base_pair(12345, cfg)
    assert len(pair.f_coeffs) == 7
    assert len(pair.g_coeffs) == 7
    assert all(0 <= c < 10007 for c in pair.f_coeffs + pair.g_coeffs)
    assert pair.seed == 12345


def test_sample_base_pair_draw_order():
    # f's coefficients come first in the seeded stream, then g's; the
    # coefficient order inside each is constant term first.
    params = FieldParams(p=101, u=100)
    cfg = FamilyConfig(d=3, gamma=0.5, params=params)
    pair = sample_base_pair(777, cfg)
    rng = SplitMix64(777)
    expected = [rng.below(101) for _ in range(8)]
    assert list(pair.f_coeffs + pair.g_coeffs) == expected


def test_eval_pair_matches_poly_eval():
    params = FieldParams(p=10007, u=10006)
    cfg = FamilyConfig(d=8, gamma=0.5, params=params)
    pair = sample_base_pair(5, cfg)
    for x in (0, 1, 4242, 10005):
        a, b = eval_pair(pair, x, params)
        assert a == poly_eval(list(pair.f_coeffs), x, 10007)
        assert b == poly_eval(list(pair.g_coeffs), x, 10007)


def test_eval_pair_rejects_out_of_universe():
    params = FieldParams(p=101, u=50)
    cfg = FamilyConfig(d=2, gamma=0.5, params=params)
    pair = sample_base_pair(1, cfg)
    with pytest.raises(ValueError):
        eval_pair(pair, 50, params)
    with pytest.raises(ValueError):
        eval_pair(pair, -1, params)


@given(
    st.integers(min_value=0, max_value=10006),
    st.integers(min_value=0, max_value=10006),
    st.integers(min_value=0, max_value=5000),
)
def test_composed_hash_is_progression(a, b, i):
    params = FieldParams(p=10007, u=10006)
    assert composed_hash(a, b, i, params) == (a + i * b) % 10007
    assert composed_hash(a, b, i + 1, params) == (composed_hash(a, b, i, params) + b) % 10007


def test_composed_hash_rejects_negative_row():
    params = FieldParams(p=101, u=100)
    with pytest.raises(ValueError):
        composed_hash(1, 1, -1, params)


def test_sample_bit_hash_ranges():
    params = FieldParams(p=101, u=100)
    for seed in range(200):
        bh = sample_bit_hash(seed, params)
        assert 0 <= bh.c0 < 101
        assert 1 <= bh.c1 < 101
    assert sample_bit_hash(9, params) == sample_bit_hash(9, params)


def test_bit_hash_exact_balance_over_field():
    # x -> c0 + c1*x mod p permutes the residues, so over the whole field
    # the bit is set exactly (p-1)/2 times (p odd: odds are 1, 3, ..., p-2).
    for p in (101, 10007):
        params = FieldParams(p=p, u=p - 1)
        for seed in (0, 1, 2):
            bh = sample_bit_hash(seed, params)
            ones = sum(((bh.c0 + bh.c1 * x) % p) & 1 for x in range(p))
            assert ones == (p - 1) // 2
            # the callable view misses x = p-1 (outside the universe), so it
            # can be off by at most that one element's bit
            ones_u = sum(apply_bit_hash(bh, x, params) for x in range(params.u))
            assert ones - ones_u in (0, 1)


def test_bit_hash_pairwise_joint_counts():
    # Enumerate the whole family at p=101 for one fixed input pair.  The
    # map (c0, c1) -> (h(x), h(y)) is a bijection onto ordered pairs of
    # distinct residues, so joint parity counts follow from how many odd
    # and even residues there are.  No sampling, no tolerance.
    p = 101
    params = FieldParams(p=p, u=p - 1)
    x, y = 5, 77
    counts = {(0, 0): 0, (0, 1): 0, (1, 0): 0, (1, 1): 0}
    for c0 in range(p):
        for c1 in range(1, p):
            bh = BitHash(c0=c0, c1=c1, seed=0)
            counts[(apply_bit_hash(bh, x, params), apply_bit_hash(bh, y, params))] += 1
    odd = (p - 1) // 2
    even = p - odd
    assert counts[(1, 1)] == odd * (odd - 1)
    assert counts[(0, 0)] == even * (even - 1)
    assert counts[(0, 1)] == odd * even
    assert counts[(1, 0)] == odd * even


def test_family_min_is_near_uniform():
    """Statistical check of approximate min-wise behaviour.

    For a fixed 20-element set, each element should minimize a freshly
    drawn hash with probability close to 1/20.  Bounds are 5 sigma of the
    sampling noise; the family's own bias is orders of magnitude smaller.
    """
    p = 10007
    params = FieldParams(p=p, u=p - 1)
    cfg = FamilyConfig(d=12, gamma=0.5, params=params)
    rnd = random.Random(600)
    xs = rnd.sample(range(p - 1), 20)
    trials = 15_000
    wins = {x: 0 for x in xs}
    for seed in range(trials):
        pair = sample_base_pair(seed, cfg)
        best_v, best_x = p, None
        for x in xs:
            v = poly_eval(list(pair.f_coeffs), x, p)
            if v < best_v or (v == best_v and x < best_x):
                best_v, best_x = v, x
        wins[best_x] += 1
    sigma = (0.05 * 0.95 / trials) ** 0.5
    for x in xs:
        assert abs(wins[x] / trials - 0.05) < 5 * sigma
