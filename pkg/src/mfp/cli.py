"""Command line interface.

Subcommands: sketch (fingerprint a stream of decimal IDs), compare (two
fingerprint files), bench (fast path vs the naive oracle), selftest.
Stdout carries the useful output; every successful run also writes a
one-line JSON manifest to stderr echoing the parameters actually used.
Manifests contain no timings, so runs are byte-reproducible given the
same flags and seed.

Exit codes: 0 success, 1 usage error, 2 data error (unreadable input,
malformed fingerprint bytes, no usable blocks), 3 incompatible
fingerprints, 4 selftest failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import random
import sys
import time

from .estimator import IncompatibleFingerprintsError, NoUsableBlocksError, median_estimate
from .fingerprint import (
    FingerprintFormatError,
    SketchConfig,
    block_update,
    build_fingerprint,
    build_fingerprint_streaming,
    deserialize,
    serialize,
    streaming_buffer_size,
    threshold_for,
)
from .hashing import FamilyConfig, independence_level, sample_base_pair
from .modular import MERSENNE61, TEST_PRIMES, FieldParams, is_prime
from .oracle import exact_jaccard, hash_eval_counter, naive_minhash_block
from .scan import ProgressionQuery, brute_scan, scan_below_threshold

ENV_SEED = "MFP_SEED"
ENV_PRIME = "MFP_PRIME"
ENV_SELFTEST_CORRUPT = "MFP_SELFTEST_CORRUPT"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INCOMPATIBLE = 3
EXIT_SELFTEST = 4


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; this CLI reserves 2 for data
    # errors, so remap.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _prime_arg(text: str) -> int:
    try:
        value = int(text, 10)
    except ValueError:
        raise argparse.ArgumentTypeError(f"prime must be a decimal integer, got {text!r}")
    if value < 3 or not is_prime(value):
        raise argparse.ArgumentTypeError(f"{value} is not an odd prime")
    return value


def _seed_arg(text: str) -> int:
    try:
        value = int(text, 10)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be a decimal integer, got {text!r}")
    if not 0 <= value < (1 << 64):
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return value


def _accuracy_arg(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not (math.isfinite(value) and 0 < value < 1):
        raise argparse.ArgumentTypeError(f"{text} is not in the open interval (0, 1)")
    return value


def _default_prime() -> int:
    env = os.environ.get(ENV_PRIME)
    if env is None:
        return MERSENNE61
    value = int(env, 10)
    if value < 3 or not is_prime(value):
        raise ValueError(f"{ENV_PRIME}={env} is not an odd prime")
    return value


def _default_seed() -> int:
    env = os.environ.get(ENV_SEED)
    if env is None:
        return 0
    value = int(env, 10)
    if not 0 <= value < (1 << 64):
        raise ValueError(f"{ENV_SEED}={env} does not fit in 64 bits")
    return value


def _manifest(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=False), file=sys.stderr)


def _parse_items(lines, u: int, source: str):
    """Decimal item IDs, one per line; blank lines and # comments skipped."""
    for line_no, raw in enumerate(lines, 1):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        try:
            item = int(text, 10)
        except ValueError:
            raise ValueError(f"{source}:{line_no}: not a decimal item ID: {text!r}") from None
        if not 0 <= item < u:
            raise ValueError(f"{source}:{line_no}: item {item} outside universe [0, {u})")
        yield item


def cmd_sketch(args) -> int:
    params = FieldParams(p=args.prime, u=args.prime - 1)
    config = SketchConfig.from_accuracy(args.epsilon, args.delta,
                                        params=params, master_seed=args.seed)
    counters = hash_eval_counter()
    if args.input == "-":
        items = _parse_items(sys.stdin, params.u, "<stdin>")
        fp = build_fingerprint_streaming(items, config, counters)
        streamed = True
    else:
        with open(args.input, "r", encoding="ascii") as fh:
            if fh.seekable():
                items = list(_parse_items(fh, params.u, args.input))
                if not items:
                    raise ValueError(f"{args.input}: no items")
                fp = build_fingerprint(items, config, counters)
                streamed = False
            else:
                fp = build_fingerprint_streaming(
                    _parse_items(fh, params.u, args.input), config, counters)
                streamed = True
    data = serialize(fp)
    if args.out == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        with open(args.out, "wb") as fh:
            fh.write(data)
    _manifest({
        "command": "sketch",
        "input": args.input,
        "out": args.out,
        "epsilon": config.epsilon,
        "delta": config.delta,
        "p": config.params.p,
        "u": config.params.u,
        "master_seed": config.master_seed,
        "k": config.k,
        "m": config.m,
        "d": config.d,
        "l_prime": config.l_prime,
        "element_count": fp.element_count,
        "threshold": _final_threshold(fp.element_count, config, streamed),
        "streamed": streamed,
        "valid_blocks": sum(1 for b in fp.blocks if b.valid),
        "bytes": len(data),
        "pair_evals": counters.pair_evals,
        "scan_cells": counters.scan_cells,
        "scan_steps": counters.scan_steps,
    })
    return EXIT_OK


def _final_threshold(count: int, config: SketchConfig, streamed: bool) -> int:
    if not streamed:
        return threshold_for(count, config)
    target = streaming_buffer_size(config)
    if count < target:
        return threshold_for(count, config)
    b = 2 * target
    while count > b:
        b *= 2
    return threshold_for(b, config)


def cmd_compare(args) -> int:
    fingerprints = []
    for path in (args.fingerprint_a, args.fingerprint_b):
        with open(path, "rb") as fh:
            fingerprints.append(deserialize(fh.read()))
    fa, fb = fingerprints
    est = median_estimate(fa, fb)
    if args.csv:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow([args.fingerprint_a, args.fingerprint_b,
                         f"{est.j_hat:.6f}", est.used_blocks,
                         fa.config.epsilon, fa.config.delta])
    else:
        print(f"estimated similarity: {est.j_hat:.6f} (clamped {est.clamped:.6f})")
        print(f"blocks used: {est.used_blocks} of {fa.config.m}")
        print(f"accuracy target: epsilon={fa.config.epsilon} delta={fa.config.delta}")
    _manifest({
        "command": "compare",
        "file_a": args.fingerprint_a,
        "file_b": args.fingerprint_b,
        "csv": bool(args.csv),
        "epsilon": fa.config.epsilon,
        "delta": fa.config.delta,
        "p": fa.config.params.p,
        "master_seed": fa.config.master_seed,
        "k": fa.config.k,
        "m": fa.config.m,
        "element_count_a": fa.element_count,
        "element_count_b": fb.element_count,
        "j_hat": est.j_hat,
        "j_hat_clamped": est.clamped,
        "used_blocks": est.used_blocks,
    })
    return EXIT_OK


def bench_rows(b: int, k: int, epsilon: float, prime: int, trials: int, seed: int) -> list[dict]:
    """Timed naive-vs-fast comparison on one shared synthetic stream per
    trial; returns one row dict per (trial, mode)."""
    params = FieldParams(p=prime, u=prime - 1)
    l_prime = independence_level(epsilon)
    family = FamilyConfig(d=l_prime + 1, gamma=1e-9, params=params)
    t = threshold(prime, l_prime, b)
    rows = []
    rnd = random.Random(seed)
    for trial in range(trials):
        stream = [rnd.randrange(params.u) for _ in range(b)]
        pair = sample_base_pair(rnd.randrange(1 << 64), family)

        naive_counters = hash_eval_counter()
        start = time.perf_counter()
        naive_state = naive_minhash_block(stream, pair, k, params, naive_counters)
        naive_wall = time.perf_counter() - start

        fast_counters = hash_eval_counter()
        start = time.perf_counter()
        fast_state = block_update(stream, pair, k, t, params, fast_counters)
        fast_wall = time.perf_counter() - start

        # The two paths must agree wherever the fast path saw a value.
        for i in range(k):
            if fast_state.updated[i] and fast_state.min_values[i] != naive_state.min_values[i]:
                raise AssertionError(f"fast/naive disagree on row {i} in trial {trial}")

        rows.append({
            "mode": "naive", "trial": trial, "b": b, "k": k,
            "wall_s": naive_wall,
            "hash_evals": naive_counters.composed_evals,
            "scan_cells": b * k,
            "scan_steps": 0,
        })
        rows.append({
            "mode": "fast", "trial": trial, "b": b, "k": k,
            "wall_s": fast_wall,
            "hash_evals": fast_counters.pair_evals,
            "scan_cells": fast_counters.scan_cells,
            "scan_steps": fast_counters.scan_steps,
        })
    return rows


def threshold(prime: int, l_prime: int, b: int) -> int:
    t = (12 * prime * l_prime + b - 1) // b
    return t if t < prime else prime


def cmd_bench(args) -> int:
    if args.k is not None:
        k = args.k
        epsilon = math.sqrt(8.02 / k)
    else:
        epsilon = args.epsilon
        k = math.ceil(8.02 / (epsilon * epsilon))
    rows = bench_rows(args.b, k, epsilon, args.prime, args.trials, args.seed)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["mode", "b", "k", "wall_s", "hash_evals", "scan_cells"])
    for row in rows:
        writer.writerow([row["mode"], row["b"], row["k"],
                         f"{row['wall_s']:.6f}", row["hash_evals"], row["scan_cells"]])
    _manifest({
        "command": "bench",
        "b": args.b,
        "k": k,
        "epsilon": epsilon,
        "p": args.prime,
        "trials": args.trials,
        "seed": args.seed,
        "rows": len(rows),
    })
    return EXIT_OK


def _selftest_checks(scale: str, corrupt: bool):
    """Yield (name, passed, detail) tuples for each internal check."""
    rnd = random.Random(1_2026)
    primes = list(TEST_PRIMES)

    n_queries = 600 if scale == "quick" else 3000
    mismatches = 0
    detail = ""
    must_corrupt = corrupt
    for trial in range(n_queries):
        p = rnd.choice(primes)
        a, b = rnd.randrange(p), rnd.randrange(p)
        k = rnd.randint(1, 400)
        t = rnd.choice([rnd.randint(0, p), rnd.randint(0, min(p, 64)), p])
        q = ProgressionQuery(a, b, p, k, t)
        got = scan_below_threshold(q)
        ref = brute_scan(q)
        values = list(got.values)
        if must_corrupt and values:
            values[0] += 1  # deliberate fault injection for testing the CLI
            must_corrupt = False
        if got.indices != ref.indices or values != ref.values:
            mismatches += 1
            if not detail:
                detail = f"first mismatch at query {q}"
    yield ("scan-vs-enumeration", mismatches == 0,
           detail or f"{n_queries} queries agree")

    n_blocks = 12 if scale == "quick" else 40
    block_bad = 0
    for trial in range(n_blocks):
        p = rnd.choice([101, 10007, (1 << 31) - 1])
        params = FieldParams(p=p, u=p - 1)
        family = FamilyConfig(d=9, gamma=0.5, params=params)
        pair = sample_base_pair(rnd.randrange(1 << 64), family)
        k = rnd.randint(1, 64)
        b = rnd.randint(1, 300)
        stream = [rnd.randrange(params.u) for _ in range(b)]
        t = p if trial % 3 == 0 else threshold(p, 84, b)
        fast = block_update(stream, pair, k, t, params)
        ref = naive_minhash_block(stream, pair, k, params)
        for i in range(k):
            expect_updated = ref.min_values[i] < t
            if fast.updated[i] != expect_updated:
                block_bad += 1
                break
            if expect_updated and (fast.min_values[i] != ref.min_values[i]
                                   or fast.min_items[i] != ref.min_items[i]):
                block_bad += 1
                break
    yield ("block-vs-naive", block_bad == 0, f"{n_blocks} random blocks agree")

    config = SketchConfig.from_accuracy(0.25, 0.25, master_seed=20260814)
    stream = [3 * j + 1 for j in range(256)]
    fp1 = build_fingerprint(stream, config)
    fp2 = build_fingerprint(list(reversed(stream)), config)
    data = serialize(fp1)
    round_trip = deserialize(data)
    ok = (round_trip == fp1 and serialize(fp2) == data
          and median_estimate(fp1, fp2).j_hat == 1.0)
    yield ("serialize-round-trip", ok, "rebuild, reorder, and reload agree")

    if scale == "full":
        params = FieldParams(p=(1 << 31) - 1, u=(1 << 31) - 2)
        hits = 0
        runs = 12
        for s in range(runs):
            cfg = SketchConfig.from_accuracy(0.25, 0.25, params=params, master_seed=7000 + s)
            shared = list(range(1000, 1300))
            only_a = list(range(5000, 5150))
            only_b = list(range(9000, 9150))
            fa = build_fingerprint(shared + only_a, cfg)
            fb = build_fingerprint(shared + only_b, cfg)
            true_j = exact_jaccard(shared + only_a, shared + only_b)
            if abs(median_estimate(fa, fb).clamped - true_j) <= cfg.epsilon:
                hits += 1
        yield ("estimator-accuracy", hits >= runs - 2, f"{hits}/{runs} runs within epsilon")


def cmd_selftest(args) -> int:
    corrupt = bool(os.environ.get(ENV_SELFTEST_CORRUPT))
    failures = 0
    checks = 0
    for name, passed, detail in _selftest_checks(args.scale, corrupt):
        checks += 1
        status = "ok" if passed else "FAIL"
        print(f"{status:4s} {name}: {detail}")
        if not passed:
            failures += 1
    _manifest({
        "command": "selftest",
        "scale": args.scale,
        "checks": checks,
        "failures": failures,
    })
    if failures:
        print(f"selftest: {failures} of {checks} checks failed", file=sys.stderr)
        return EXIT_SELFTEST
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    try:
        default_prime = _default_prime()
        default_seed = _default_seed()
    except ValueError as exc:
        print(f"mfp: error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE) from None
    parser = _Parser(prog="mfp", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sketch = sub.add_parser("sketch", help="fingerprint a stream of decimal item IDs")
    p_sketch.add_argument("input", nargs="?", default="-",
                          help="file of IDs, one per line; - for stdin (default)")
    p_sketch.add_argument("--epsilon", type=_accuracy_arg, required=True,
                          help="additive similarity error target, in (0, 1)")
    p_sketch.add_argument("--delta", type=_accuracy_arg, required=True,
                          help="failure probability target, in (0, 1)")
    p_sketch.add_argument("--seed", type=_seed_arg, default=default_seed,
                          help=f"master seed (default ${ENV_SEED} or 0)")
    p_sketch.add_argument("--prime", type=_prime_arg, default=default_prime,
                          help=f"field modulus (default ${ENV_PRIME} or 2**61 - 1)")
    p_sketch.add_argument("--out", required=True, help="output path; - for stdout")
    p_sketch.set_defaults(func=cmd_sketch)

    p_compare = sub.add_parser("compare", help="estimate similarity of two fingerprints")
    p_compare.add_argument("fingerprint_a")
    p_compare.add_argument("fingerprint_b")
    p_compare.add_argument("--csv", action="store_true",
                           help="emit one CSV row: fileA,fileB,j_hat,used_blocks,epsilon,delta")
    p_compare.set_defaults(func=cmd_compare)

    p_bench = sub.add_parser("bench", help="time the fast path against the naive oracle")
    p_bench.add_argument("--b", type=int, required=True, help="stream length")
    group = p_bench.add_mutually_exclusive_group(required=True)
    group.add_argument("--k", type=int, help="rows per block")
    group.add_argument("--epsilon", type=_accuracy_arg, help="derive k from an accuracy target")
    p_bench.add_argument("--trials", type=int, default=1)
    p_bench.add_argument("--prime", type=_prime_arg, default=default_prime)
    p_bench.add_argument("--seed", type=_seed_arg, default=default_seed)
    p_bench.set_defaults(func=cmd_bench)

    p_self = sub.add_parser("selftest", help="run built-in consistency checks")
    p_self.add_argument("--scale", choices=("quick", "full"), default="quick")
    p_self.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except IncompatibleFingerprintsError as exc:
        print(f"mfp: incompatible fingerprints: {exc}", file=sys.stderr)
        return EXIT_INCOMPATIBLE
    except NoUsableBlocksError as exc:
        print(f"mfp: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FingerprintFormatError as exc:
        print(f"mfp: bad fingerprint data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (OSError, ValueError) as exc:
        print(f"mfp: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
