"""Fingerprint construction and the on-disk format.

A fingerprint is m independent blocks.  Each block hashes every stream
item through k rows built from one polynomial pair, keeps the per-row
minimum (ties to the smaller item ID), and stores one bit per row: a
pairwise-independent bit hash of the row's minimizer.  Rows are only
maintained below a threshold t chosen so that row minima land under t
with overwhelming probability while the number of below-t cells stays
near 12 * l' per row; a block where some row never saw a below-t value
is marked invalid and skipped at estimation time.

Choosing t needs the stream length.  build_fingerprint takes it from the
materialized stream; build_fingerprint_streaming guesses after a small
buffer and doubles the guess as the stream grows.  t only shrinks when b
grows, so values scanned under an earlier, looser threshold are a
superset of what the final threshold requires, and validity is settled
once at the end against the final t.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

from . import _kernel
from .hashing import (
    BitHash,
    FamilyConfig,
    PolynomialPair,
    apply_bit_hash,
    degree_for_accuracy,
    gamma_for_accuracy,
    sample_base_pair,
    sample_bit_hash,
)
from .modular import FieldParams, is_prime, mod_inverse
from .oracle import EvalCounters
from .rng import bit_seed_for_block, pair_seed_for_block
from .scan import ScanStats, _scan_runs

MAGIC = b"MFP1"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<4sHQQddIIIQQ")
_BLOCK_HEAD = struct.Struct("<QQB")

_MAX_SEED = (1 << 64) - 1


class FingerprintFormatError(ValueError):
    """Base class for serialization failures."""


class BadMagicError(FingerprintFormatError):
    pass


class UnsupportedVersionError(FingerprintFormatError):
    pass


class TruncatedError(FingerprintFormatError):
    pass


class InvalidFingerprintError(FingerprintFormatError):
    """Structurally sound bytes that violate a fingerprint invariant."""


def rows_for_accuracy(epsilon: float) -> int:
    """Rows per block so a single block estimates within epsilon with
    probability 7/8."""
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    return math.ceil(8.02 / (epsilon * epsilon))


def blocks_for_confidence(delta: float) -> int:
    """Blocks whose median drives the failure probability below delta.
    ceil(4 * ln(1/delta)) keeps a margin over the Hoeffding minimum and
    absorbs the occasional invalid block."""
    if not 0 < delta < 1:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    return max(1, math.ceil(4 * math.log(1 / delta)))


@dataclass(frozen=True)
class SketchConfig:
    """Everything two fingerprints must share to be comparable."""

    epsilon: float
    delta: float
    k: int
    m: int
    d: int
    l_prime: int
    gamma: float
    params: FieldParams
    master_seed: int

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must be in (0, 1), got {self.delta}")
        if self.k != rows_for_accuracy(self.epsilon):
            raise ValueError(f"k={self.k} inconsistent with epsilon={self.epsilon}")
        if self.m != blocks_for_confidence(self.delta):
            raise ValueError(f"m={self.m} inconsistent with delta={self.delta}")
        if self.d != degree_for_accuracy(self.epsilon):
            raise ValueError(f"d={self.d} inconsistent with epsilon={self.epsilon}")
        if self.l_prime != self.d - 1:
            raise ValueError(f"l_prime={self.l_prime} must be d - 1")
        if self.gamma != gamma_for_accuracy(self.epsilon):
            raise ValueError(f"gamma={self.gamma} inconsistent with epsilon={self.epsilon}")
        if not 0 <= self.master_seed <= _MAX_SEED:
            raise ValueError(f"master_seed must fit in 64 bits, got {self.master_seed}")

    @classmethod
    def from_accuracy(cls, epsilon: float, delta: float,
                      params: FieldParams | None = None,
                      master_seed: int = 0) -> "SketchConfig":
        if params is None:
            params = FieldParams()
        d = degree_for_accuracy(epsilon)
        return cls(
            epsilon=epsilon,
            delta=delta,
            k=rows_for_accuracy(epsilon),
            m=blocks_for_confidence(delta),
            d=d,
            l_prime=d - 1,
            gamma=gamma_for_accuracy(epsilon),
            params=params,
            master_seed=master_seed,
        )

    def family(self) -> FamilyConfig:
        return FamilyConfig(d=self.d, gamma=self.gamma, params=self.params)

    def block_pair(self, index: int) -> PolynomialPair:
        return sample_base_pair(pair_seed_for_block(self.master_seed, index), self.family())

    def block_bit_hash(self, index: int) -> BitHash:
        return sample_bit_hash(bit_seed_for_block(self.master_seed, index), self.params)


def threshold_for(b: int, config: SketchConfig) -> int:
    """Scan threshold for a stream of length b: ceil(12 * p * l' / b),
    clamped to p.  Exact integer arithmetic; at the default modulus the
    numerator does not fit in a double."""
    if b < 1:
        raise ValueError(f"stream length must be positive, got {b}")
    p = config.params.p
    t = (12 * p * config.l_prime + b - 1) // b
    return t if t < p else p


@dataclass
class BlockState:
    """Running per-row minima of one block.

    min_values uses the modulus p as the infinity sentinel, so updated[i]
    is equivalent to min_values[i] < t for the threshold in force.
    """

    min_values: list[int]
    min_items: list[int]
    updated: list[bool]


@dataclass(frozen=True)
class FingerprintBlock:
    """One block's stored summary: k bits plus its derived seeds.

    bits holds row i at bit position i and is all zero when the block is
    invalid, keeping serialized bytes canonical.
    """

    pair_seed: int
    bit_seed: int
    valid: bool
    bits: int


@dataclass(frozen=True)
class Fingerprint:
    config: SketchConfig
    blocks: tuple[FingerprintBlock, ...]
    element_count: int


def _apply_item_pure(x: int, a: int, b: int, p: int, k: int, t: int,
                     mins: list, items: list, stats: ScanStats) -> None:
    """Fold one item's below-t row values into the minima (pure path)."""
    if b == 0:
        if a < t:
            stats.cells += k
            for row in range(k):
                mv = mins[row]
                if a < mv or (a == mv and x < items[row]):
                    mins[row] = a
                    items[row] = x
        return
    k_eff = k if k < p else p
    runs = _scan_runs(a, b, p, k_eff, t, stats)
    if not runs:
        return
    b_inv = mod_inverse(b, p)
    for v0, dv, n in runs:
        i = (v0 - a) * b_inv % p
        di = dv * b_inv % p
        v = v0
        for _ in range(n):
            row = i
            while row < k:
                mv = mins[row]
                if v < mv or (v == mv and x < items[row]):
                    mins[row] = v
                    items[row] = x
                row += p
            v += dv
            i += di
            if i >= p:
                i -= p


class _BlockBuild:
    """Mutable build-time state for one block; snapshots to BlockState."""

    def __init__(self, config: SketchConfig, index: int):
        self.pair_seed = pair_seed_for_block(config.master_seed, index)
        self.bit_seed = bit_seed_for_block(config.master_seed, index)
        self.pair = sample_base_pair(self.pair_seed, config.family())
        p = config.params.p
        if _kernel.KERNEL_COMPILED and p <= _kernel.KERNEL_MAX_P:
            import numpy as np

            self.mins, self.items = _kernel.new_state_arrays(config.k, p)
            self.f_arr = np.asarray(self.pair.f_coeffs, dtype=np.int64)
            self.g_arr = np.asarray(self.pair.g_coeffs, dtype=np.int64)
            self.use_kernel = True
        else:
            self.mins = [p] * config.k
            self.items = [0] * config.k
            self.use_kernel = False

    def consume(self, chunk, chunk_arr, config: SketchConfig, t: int,
                counters: EvalCounters | None) -> None:
        p, k = config.params.p, config.k
        if self.use_kernel:
            cells, steps = _kernel.block_update_i64(
                chunk_arr, self.f_arr, self.g_arr, p, k, t, self.mins, self.items)
            if counters is not None:
                counters.pair_evals += len(chunk)
                counters.scan_cells += int(cells)
                counters.scan_steps += int(steps)
        else:
            stats = ScanStats()
            for x in chunk:
                a = 0
                for c in reversed(self.pair.f_coeffs):
                    a = (a * x + c) % p
                b = 0
                for c in reversed(self.pair.g_coeffs):
                    b = (b * x + c) % p
                _apply_item_pure(x, a, b, p, k, t, self.mins, self.items, stats)
            if counters is not None:
                counters.pair_evals += len(chunk)
                counters.scan_cells += stats.cells
                counters.scan_steps += stats.steps

    def state(self, t: int) -> BlockState:
        if self.use_kernel:
            mins = [int(v) for v in self.mins]
            items = [int(v) for v in self.items]
        else:
            mins = list(self.mins)
            items = list(self.items)
        return BlockState(min_values=mins, min_items=items, updated=[v < t for v in mins])


def block_update(stream, pair: PolynomialPair, k: int, t: int, params: FieldParams,
                 counters: EvalCounters | None = None) -> BlockState:
    """Build one block's row minima over a stream, scanning only the
    below-t cells of each item's row progression."""
    if k < 1:
        raise ValueError(f"row count must be positive, got {k}")
    if not 0 <= t <= params.p:
        raise ValueError(f"threshold {t} outside [0, {params.p}]")
    p = params.p
    stats = ScanStats()
    if _kernel.KERNEL_COMPILED and p <= _kernel.KERNEL_MAX_P:
        import numpy as np

        xs_list = list(stream)
        _check_universe(xs_list, params.u)
        xs = np.asarray(xs_list, dtype=np.int64)
        mins, items = _kernel.new_state_arrays(k, p)
        f_arr = np.asarray(pair.f_coeffs, dtype=np.int64)
        g_arr = np.asarray(pair.g_coeffs, dtype=np.int64)
        cells, steps = _kernel.block_update_i64(xs, f_arr, g_arr, p, k, t, mins, items)
        if counters is not None:
            counters.pair_evals += int(xs.size)
            counters.scan_cells += int(cells)
            counters.scan_steps += int(steps)
        mins_l = [int(v) for v in mins]
        return BlockState(
            min_values=mins_l,
            min_items=[int(v) for v in items],
            updated=[v < t for v in mins_l],
        )
    mins = [p] * k
    items = [0] * k
    count = 0
    for x in stream:
        if not 0 <= x < params.u:
            raise ValueError(f"item {x} outside universe [0, {params.u})")
        a = 0
        for c in reversed(pair.f_coeffs):
            a = (a * x + c) % p
        b = 0
        for c in reversed(pair.g_coeffs):
            b = (b * x + c) % p
        _apply_item_pure(x, a, b, p, k, t, mins, items, stats)
        count += 1
    if counters is not None:
        counters.pair_evals += count
        counters.scan_cells += stats.cells
        counters.scan_steps += stats.steps
    return BlockState(min_values=mins, min_items=items, updated=[v < t for v in mins])


def _finalize(config: SketchConfig, builds: list, t: int, element_count: int) -> Fingerprint:
    blocks = []
    for index, build in enumerate(builds):
        state = build.state(t)
        valid = all(state.updated)
        bits = 0
        if valid:
            bh = sample_bit_hash(build.bit_seed, config.params)
            for i, item in enumerate(state.min_items):
                bits |= apply_bit_hash(bh, item, config.params) << i
        blocks.append(FingerprintBlock(
            pair_seed=build.pair_seed,
            bit_seed=build.bit_seed,
            valid=valid,
            bits=bits,
        ))
    return Fingerprint(config=config, blocks=tuple(blocks), element_count=element_count)


def _check_universe(chunk, u: int) -> None:
    for x in chunk:
        if not 0 <= x < u:
            raise ValueError(f"item {x} outside universe [0, {u})")


def _consume_chunk(chunk, builds, config: SketchConfig, t: int,
                   counters: EvalCounters | None) -> None:
    if not chunk:
        return
    _check_universe(chunk, config.params.u)
    chunk_arr = None
    if builds and builds[0].use_kernel:
        import numpy as np

        chunk_arr = np.asarray(chunk, dtype=np.int64)
    for build in builds:
        build.consume(chunk, chunk_arr, config, t, counters)


def build_fingerprint(stream, config: SketchConfig,
                      counters: EvalCounters | None = None) -> Fingerprint:
    """Fingerprint a stream of known length."""
    items = list(stream)
    if not items:
        raise ValueError("cannot fingerprint an empty stream")
    t = threshold_for(len(items), config)
    builds = [_BlockBuild(config, i) for i in range(config.m)]
    _consume_chunk(items, builds, config, t, counters)
    return _finalize(config, builds, t, len(items))


def streaming_buffer_size(config: SketchConfig) -> int:
    """Items buffered before the first threshold guess:
    ceil(log2(1/delta) / epsilon**2)."""
    return max(1, math.ceil(math.log2(1 / config.delta) / (config.epsilon ** 2)))


def build_fingerprint_streaming(stream, config: SketchConfig,
                                counters: EvalCounters | None = None) -> Fingerprint:
    """Single-pass fingerprint of a stream of unknown length.

    Buffers the first items, assumes the stream is twice the buffer, and
    doubles that assumption (shrinking t) whenever the count passes it.
    Blocks keep running minima across threshold changes; validity is
    decided against the final threshold.
    """
    it = iter(stream)
    target = streaming_buffer_size(config)
    buffered = []
    for x in it:
        buffered.append(x)
        if len(buffered) >= target:
            break
    if len(buffered) < target:
        # Stream ended inside the buffer: length is known after all.
        return build_fingerprint(buffered, config, counters)
    b = 2 * target
    t = threshold_for(b, config)
    builds = [_BlockBuild(config, i) for i in range(config.m)]
    _consume_chunk(buffered, builds, config, t, counters)
    count = len(buffered)
    chunk: list[int] = []
    for x in it:
        chunk.append(x)
        count += 1
        if count > b:
            _consume_chunk(chunk, builds, config, t, counters)
            chunk = []
            b *= 2
            t = threshold_for(b, config)
    _consume_chunk(chunk, builds, config, t, counters)
    return _finalize(config, builds, t, count)


def serialize(fp: Fingerprint) -> bytes:
    """Little-endian binary encoding of a fingerprint; see deserialize."""
    cfg = fp.config
    out = bytearray(_HEADER.pack(
        MAGIC, FORMAT_VERSION, cfg.params.p, cfg.params.u, cfg.epsilon, cfg.delta,
        cfg.k, cfg.m, cfg.d, cfg.master_seed, fp.element_count,
    ))
    nbytes = (cfg.k + 7) // 8
    for block in fp.blocks:
        out += _BLOCK_HEAD.pack(block.pair_seed, block.bit_seed, 1 if block.valid else 0)
        out += block.bits.to_bytes(nbytes, "little")
    return bytes(out)


def deserialize(data: bytes) -> Fingerprint:
    """Parse and fully validate serialized fingerprint bytes.

    Raises BadMagicError, UnsupportedVersionError, TruncatedError, or
    InvalidFingerprintError; anything that parses is a fingerprint that
    could have been produced by this library.
    """
    if len(data) < 6:
        raise TruncatedError(f"{len(data)} bytes is too short for the header")
    if data[:4] != MAGIC:
        raise BadMagicError(f"bad magic {data[:4]!r}")
    (version,) = struct.unpack_from("<H", data, 4)
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(f"unsupported format version {version}")
    if len(data) < _HEADER.size:
        raise TruncatedError(f"header needs {_HEADER.size} bytes, got {len(data)}")
    _, _, p, u, epsilon, delta, k, m, d, master_seed, element_count = _HEADER.unpack_from(data, 0)
    if not (math.isfinite(epsilon) and 0 < epsilon < 1):
        raise InvalidFingerprintError(f"epsilon {epsilon} outside (0, 1)")
    if not (math.isfinite(delta) and 0 < delta < 1):
        raise InvalidFingerprintError(f"delta {delta} outside (0, 1)")
    if not is_prime(p):
        raise InvalidFingerprintError(f"modulus {p} is not prime")
    if not 0 < u < p:
        raise InvalidFingerprintError(f"universe bound {u} outside (0, {p})")
    if element_count < 1:
        raise InvalidFingerprintError("element count must be positive")
    try:
        config = SketchConfig(
            epsilon=epsilon, delta=delta, k=k, m=m, d=d, l_prime=d - 1,
            gamma=gamma_for_accuracy(epsilon), params=FieldParams(p=p, u=u),
            master_seed=master_seed,
        )
    except ValueError as exc:
        raise InvalidFingerprintError(str(exc)) from None
    nbytes = (k + 7) // 8
    block_size = _BLOCK_HEAD.size + nbytes
    expected = _HEADER.size + m * block_size
    if len(data) < expected:
        raise TruncatedError(f"need {expected} bytes for {m} blocks, got {len(data)}")
    if len(data) > expected:
        raise InvalidFingerprintError(f"{len(data) - expected} trailing bytes")
    blocks = []
    offset = _HEADER.size
    for index in range(m):
        pair_seed, bit_seed, valid_byte = _BLOCK_HEAD.unpack_from(data, offset)
        offset += _BLOCK_HEAD.size
        bits = int.from_bytes(data[offset:offset + nbytes], "little")
        offset += nbytes
        if valid_byte not in (0, 1):
            raise InvalidFingerprintError(f"block {index} validity byte {valid_byte}")
        if pair_seed != pair_seed_for_block(master_seed, index):
            raise InvalidFingerprintError(f"block {index} pair seed not derived from master seed")
        if bit_seed != bit_seed_for_block(master_seed, index):
            raise InvalidFingerprintError(f"block {index} bit seed not derived from master seed")
        if bits >> k:
            raise InvalidFingerprintError(f"block {index} has bits beyond row {k - 1}")
        if valid_byte == 0 and bits:
            raise InvalidFingerprintError(f"block {index} is invalid but has nonzero bits")
        blocks.append(FingerprintBlock(
            pair_seed=pair_seed, bit_seed=bit_seed, valid=bool(valid_byte), bits=bits,
        ))
    return Fingerprint(config=config, blocks=tuple(blocks), element_count=element_count)
