import os
import subprocess
import sys

import numpy as np

from cdgate import _kernels
from cdgate.model import analytic_spectrum, cnot_system

from conftest import random_hermitian


def _run_args(params, tau, use_cd, alpha, is_density):
    system = cnot_system(params, tau, use_cd=use_cd)
    psi0 = analytic_spectrum(params, system.drive_value(system.t_start)).states[0]
    y0 = np.outer(psi0, psi0.conj()).ravel() if is_density else psi0
    times = np.array([system.t_start, 0.0, system.t_end])
    return (system.h0, system.hz, system.hcd, system.slope, system.g,
            use_cd, alpha, is_density, times, y0, 1e-10, 1e-12, np.inf,
            tau * 1e-3)


class TestBackendEquivalence:
    def test_backends_registered(self):
        assert "numpy" in _kernels.IMPLEMENTATIONS
        if _kernels.USE_NUMBA:
            assert "numba" in _kernels.IMPLEMENTATIONS

    def test_evolution_backends_agree(self, params):
        args = _run_args(params, 8.0, True, 0.0, False)
        results = {
            name: impl["evolve_ramped"](*args)
            for name, impl in _kernels.IMPLEMENTATIONS.items()
        }
        statuses = {name: r[0] for name, r in results.items()}
        assert all(s == _kernels.STATUS_OK for s in statuses.values())
        outs = [r[1] for r in results.values()]
        for other in outs[1:]:
            assert np.abs(outs[0] - other).max() < 1e-12

    def test_lindblad_backends_agree(self, params):
        args = _run_args(params, 8.0, False, 0.1, True)
        outs = [impl["evolve_ramped"](*args)[1]
                for impl in _kernels.IMPLEMENTATIONS.values()]
        for other in outs[1:]:
            assert np.abs(outs[0] - other).max() < 1e-12

    def test_jacobi_backends_agree(self, rng):
        h = random_hermitian(rng, 8)
        outs = [impl["jacobi_eigh"](h, 1e-14, 60)
                for impl in _kernels.IMPLEMENTATIONS.values()]
        for w, v, off, conv in outs:
            assert conv
        for other in outs[1:]:
            assert np.abs(np.sort(outs[0][0]) - np.sort(other[0])).max() < 1e-12

    def test_mc_backends_agree(self, params):
        system = cnot_system(params, 2.0)
        psi0 = analytic_spectrum(params, system.drive_value(system.t_start)).states[0]
        noise = np.random.default_rng(5).standard_normal((50, 200)) * 0.5
        outs = [impl["dephasing_average"](system.h0, system.hz, system.hcd,
                                          system.slope, system.g, False,
                                          system.t_start, 0.01, noise, psi0)
                for impl in _kernels.IMPLEMENTATIONS.values()]
        for other in outs[1:]:
            assert np.abs(outs[0] - other).max() < 1e-12


class TestEnvFlag:
    def test_disable_flag_selects_numpy_backend(self):
        code = (
            "from cdgate import _kernels\n"
            "print(_kernels.backend_name())\n"
        )
        env = dict(os.environ, CDGATE_NUMBA="0")
        out = subprocess.run([sys.executable, "-c", code], env=env,
                             capture_output=True, text=True, check=True)
        assert out.stdout.strip() == "numpy"

    def test_default_backend_reported(self):
        assert _kernels.backend_name() in ("numba", "numpy")
