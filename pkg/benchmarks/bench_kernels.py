#!/usr/bin/env python3
"""Benchmark the compiled (numba) kernels against their pure-numpy twins.

The two paths run the same source; this script times representative
workloads from each kernel family and prints the speedup. Run from the
repository root:

    python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from cdgate import _kernels
from cdgate.model import CnotParams, analytic_spectrum, cnot_system


def _time(fn, *args, repeat=5):
    fn(*args)  # warm-up (and JIT compile on the numba path)
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def workloads():
    params = CnotParams()
    psi_sys = cnot_system(params, tau=20.0, use_cd=True)
    psi0 = analytic_spectrum(params, psi_sys.drive_value(psi_sys.t_start)).states[0]
    times2 = np.array([psi_sys.t_start, psi_sys.t_end])
    yield "schrodinger tau=20 (CD on)", "evolve_ramped", (
        psi_sys.h0, psi_sys.hz, psi_sys.hcd, psi_sys.slope, psi_sys.g,
        True, 0.0, False, times2, psi0, 1e-10, 1e-12, np.inf, 0.02)

    rho_sys = cnot_system(params, tau=100.0)
    rho0 = np.outer(psi0, psi0.conj()).ravel()
    times_r = np.array([rho_sys.t_start, rho_sys.t_end])
    yield "lindblad tau=100 alpha=0.1", "evolve_ramped", (
        rho_sys.h0, rho_sys.hz, rho_sys.hcd, rho_sys.slope, rho_sys.g,
        False, 0.1, True, times_r, rho0, 1e-10, 1e-12, np.inf, 0.1)

    rng = np.random.default_rng(0)
    a = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    herm = (a + a.conj().T) / 2
    yield "jacobi eigh 16x16", "jacobi_eigh", (herm, 1e-14, 60)

    noise = rng.standard_normal((100, 2000)) * np.sqrt(0.05 / 0.01)
    yield "noise average 100x2000 steps", "dephasing_average", (
        psi_sys.h0, psi_sys.hz, psi_sys.hcd, psi_sys.slope, psi_sys.g,
        False, psi_sys.t_start, 0.01, noise, psi0)


def main():
    impls = _kernels.IMPLEMENTATIONS
    names = list(impls)
    print(f"backends available: {', '.join(names)}")
    header = f"{'workload':<34}" + "".join(f"{n:>12}" for n in names)
    if len(names) > 1:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for label, kernel, args in workloads():
        row = f"{label:<34}"
        timings = []
        for name in names:
            t = _time(impls[name][kernel], *args)
            timings.append(t)
            row += f"{t * 1e3:>10.2f}ms"
        if len(timings) > 1:
            row += f"{timings[0] / timings[-1]:>9.1f}x" if names[0] == "numpy" \
                else f"{timings[-1] / timings[0]:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
