"""Cost and size measurements across policy sizes.

The benchmark fixes a single-slot system whose one user holds every
attribute, then sweeps AND policies of increasing width: encryption and
transformation work grows with the policy while the final decryption
stays a single target-group exponentiation.  Sizes come from the
canonical serialization, so the ciphertext column grows affinely with
the policy and the transform column is a backend constant.

Attribute names are zero-padded to one width so serialized sizes depend
only on the policy's shape.
"""

from __future__ import annotations

import csv
import random
import statistics
import time
from dataclasses import dataclass

from . import actors, serial, slotted
from .groups import get_backend


@dataclass(frozen=True)
class BenchRow:
    attrs: int
    encrypt_ms: float
    transform_ms: float
    decrypt_ms: float
    ct_bytes: int
    ct_prime_bytes: int


def attribute_universe(size: int) -> tuple[str, ...]:
    return tuple(f"a{i:04d}" for i in range(size))


def and_policy(universe: tuple[str, ...], size: int) -> str:
    return " and ".join(universe[:size])


def run_bench(
    backend_name: str,
    sizes: list[int],
    reps: int = 3,
    seed: int = 0,
) -> list[BenchRow]:
    backend = get_backend(backend_name)
    rng = random.Random(seed)
    universe = attribute_universe(max(sizes))
    crs = slotted.setup(backend, 1, universe, rng)
    keypair = slotted.keygen(crs, 1, rng)
    mpk, (hsk,) = slotted.register(crs, [(keypair.public, universe)])
    message = b"\x5a" * 64

    rows = []
    for size in sizes:
        policy = and_policy(universe, size)
        enc_t, tr_t, dec_t = [], [], []
        ct_bytes = ct_prime_bytes = 0
        for _ in range(reps):
            t0 = time.perf_counter()
            ct = slotted.encrypt(mpk, policy, message, rng)
            t1 = time.perf_counter()
            ct_prime = slotted.transform(hsk, ct)
            t2 = time.perf_counter()
            out = slotted.decrypt_user(keypair.sk, ct_prime, ct)
            t3 = time.perf_counter()
            if out != message:
                raise RuntimeError(f"benchmark roundtrip failed at {size} attributes")
            enc_t.append((t1 - t0) * 1e3)
            tr_t.append((t2 - t1) * 1e3)
            dec_t.append((t3 - t2) * 1e3)
            ct_bytes = len(serial.pack_ciphertext(ct))
            ct_prime_bytes = len(serial.pack_transform(ct_prime))
        rows.append(
            BenchRow(
                attrs=size,
                encrypt_ms=statistics.mean(enc_t),
                transform_ms=statistics.mean(tr_t),
                decrypt_ms=statistics.mean(dec_t),
                ct_bytes=ct_bytes,
                ct_prime_bytes=ct_prime_bytes,
            )
        )
    return rows


def ledger_op_profile(sizes: list[int], seed: int = 0, window: int = 5) -> list[tuple[int, dict[str, int]]]:
    """Happy-case ledger call counts per policy size; the gas-shape stand-in.

    The per-call work of the simulated contract is input-independent, so
    the profile is expected to be identical across sizes.
    """
    profiles = []
    for size in sizes:
        universe = attribute_universe(size)
        scenario = actors.Scenario(
            seed=seed,
            universe=universe,
            user_attrs=(universe,),
            policy=and_policy(universe, size),
            reward=25,
            window=window,
            backend="mock",
        )
        report = actors.run_happy_case(scenario, check_keys=False)
        profiles.append((size, dict(sorted(report.op_counters.items()))))
    return profiles


def write_bench_csv(rows: list[BenchRow], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["attrs", "encrypt_ms", "transform_ms", "decrypt_ms", "ct_bytes", "ct_prime_bytes"])
        for row in rows:
            writer.writerow([
                row.attrs,
                f"{row.encrypt_ms:.3f}",
                f"{row.transform_ms:.3f}",
                f"{row.decrypt_ms:.3f}",
                row.ct_bytes,
                row.ct_prime_bytes,
            ])


def write_ops_csv(profiles: list[tuple[int, dict[str, int]]], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["attrs", "function", "calls"])
        for size, counters in profiles:
            for function, calls in counters.items():
                writer.writerow([size, function, calls])
