"""Time the compiled kernels against the NumPy fallback on the same workloads.

Run: python3 benchmarks/bench_kernels.py [--repeat R]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from mbuarith import _pykernels
from mbuarith._backend import COMPILED
from mbuarith.modular import ArchitectureSpec, Kind
from mbuarith.sim import (
    TALLY_KINDS, Seeded, admissible_inputs, compile_basis, encode_inputs, measurement_count,
    rng_for, run_statevector,
)
import mbuarith.sim as sim

try:
    from mbuarith import _kernels
except ImportError:
    _kernels = None


def _basis_args(c, runs: int, seed: int):
    cases = admissible_inputs(c)
    rng = rng_for(seed)
    picks = rng.integers(0, len(cases), size=runs)
    state = np.stack([encode_inputs(c, cases[int(i)]) for i in picks])
    m = max(measurement_count(c), 1)
    outcomes = rng.integers(0, 2, size=(runs, m), dtype=np.uint8)
    return compile_basis(c), state, outcomes, m


def bench_basis(mod, c, runs: int, repeat: int) -> float:
    prog, state0, outcomes, m = _basis_args(c, runs, 0)
    best = float("inf")
    for _ in range(repeat):
        state = state0.copy()
        cbits = np.zeros((runs, c.num_cbits), dtype=np.uint8)
        n_rand = np.zeros(runs, dtype=np.int32)
        tally = np.zeros((runs, len(TALLY_KINDS)), dtype=np.int64)
        status = np.zeros(runs, dtype=np.int8)
        out_len = np.full(runs, m, dtype=np.int32)
        t0 = time.perf_counter()
        mod.basis_sweep(prog, state, cbits, outcomes, out_len, n_rand, tally, status, False)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_statevector(mod, c, inputs, repeat: int) -> float:
    best = float("inf")
    saved = sim.kernels
    sim.kernels = mod
    try:
        for _ in range(repeat):
            t0 = time.perf_counter()
            run_statevector(c, inputs, Seeded(0))
            best = min(best, time.perf_counter() - t0)
    finally:
        sim.kernels = saved
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--runs", type=int, default=10_000)
    args = ap.parse_args()
    mods = [("numpy", _pykernels)] + ([("compiled", _kernels)] if _kernels else [])
    print(f"compiled kernels available: {COMPILED and _kernels is not None}")
    print(f"{'workload':<40}" + "".join(f"{name:>12}" for name, _ in mods) + f"{'speedup':>10}")
    workloads = []
    for preset in ("CDKPM_ALL", "GIDNEY_ALL", "HYBRID"):
        c = ArchitectureSpec(Kind.MODADD, 4, 11, mbu=True, preset=preset).build()
        workloads.append((f"basis {preset} n=4 x{args.runs}",
                          lambda mod, c=c: bench_basis(mod, c, args.runs, args.repeat)))
    c = ArchitectureSpec(Kind.MODADD, 6, 43, preset="DRAPER_BEAUREGARD").build()
    workloads.append((f"statevector DRAPER n=6 ({c.num_qubits} qubits)",
                      lambda mod, c=c: bench_statevector(mod, c, {"x": 20, "y": 30}, args.repeat)))
    for label, fn in workloads:
        times = [fn(mod) for _, mod in mods]
        speed = f"{times[0] / times[-1]:>9.1f}x" if len(times) > 1 else f"{'-':>10}"
        print(f"{label:<40}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times) + speed)


if __name__ == "__main__":
    main()
