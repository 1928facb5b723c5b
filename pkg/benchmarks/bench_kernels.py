"""Compiled vs NumPy kernel timings.

    python benchmarks/bench_kernels.py [--qubits 6 8 10] [--repeat 5]

Times the raw 1- and 2-qubit superoperator kernels on random density
matrices, then a full noisy GHZ simulation, once per available backend.
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from qdc import kernels
from qdc.circuit import build_ghz_circuit
from qdc.noise import depolarizing_channel, johannesburg_default
from qdc.sim import simulate


def _best(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def random_rho(n: int, rng) -> np.ndarray:
    d = 2**n
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def bench(qubits: list[int], repeat: int) -> list[dict]:
    rng = np.random.default_rng(7)
    s1 = depolarizing_channel(0.01, 1).superoperator
    s2 = depolarizing_channel(0.01, 2).superoperator
    rows = []
    for n in qubits:
        rho = random_rho(n, rng)
        circuit = build_ghz_circuit(n)
        noise = johannesburg_default()
        for backend in kernels.available_backends():
            with kernels.use_backend(backend):
                t1 = _best(lambda: [kernels.apply_superop_1q(rho, s1, q, n) for q in range(n)], repeat) / n
                t2 = _best(lambda: [kernels.apply_superop_2q(rho, s2, q, q + 1, n) for q in range(n - 1)], repeat) / (n - 1)
                ts = _best(lambda: simulate(circuit, noise), repeat)
            rows.append({"n": n, "backend": backend, "kernel_1q": t1, "kernel_2q": t2, "ghz_sim": ts})
    return rows


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--qubits", type=int, nargs="+", default=[4, 6, 8, 10])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    rows = bench(args.qubits, args.repeat)
    print(f"{'n':>3} {'backend':>8} {'1q kernel':>12} {'2q kernel':>12} {'noisy GHZ':>12}")
    for r in rows:
        print(
            f"{r['n']:>3} {r['backend']:>8} {r['kernel_1q'] * 1e6:>10.1f}us"
            f" {r['kernel_2q'] * 1e6:>10.1f}us {r['ghz_sim'] * 1e3:>10.2f}ms"
        )
    by_n = {}
    for r in rows:
        by_n.setdefault(r["n"], {})[r["backend"]] = r["ghz_sim"]
    speedups = [v["numpy"] / v["cython"] for v in by_n.values() if {"numpy", "cython"} <= set(v)]
    if speedups:
        print(f"median noisy-GHZ speedup (numpy / cython): {statistics.median(speedups):.2f}x")


if __name__ == "__main__":
    main()
