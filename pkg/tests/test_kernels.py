import os
import subprocess
import sys

import numpy as np
import pytest

from moyalkit import _kernels

rng = np.random.default_rng(0)


def cplx(*shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


@pytest.mark.parametrize("n", [16, 64])
def test_backends_agree(n):
    f, g, K, A, B = cplx(n), cplx(n), cplx(n, n), cplx(n, n), cplx(n, n)
    np_, nb = _kernels.numpy_impl, _kernels.numba_impl
    assert np.abs(np_.pair_to_mixed(f, g) - nb.pair_to_mixed(f, g)).max() < 1e-14
    assert np.abs(np_.kernel_to_mixed(K) - nb.kernel_to_mixed(K)).max() < 1e-14
    assert np.abs(np_.mixed_to_kernel(A, B) - nb.mixed_to_kernel(A, B)).max() < 1e-14
    assert np.abs(np_.twisted_sum(A, B) - nb.twisted_sum(A, B)).max() < 1e-12


def test_pair_to_mixed_layout():
    n = 16
    f, g = cplx(n), cplx(n)
    R = _kernels.pair_to_mixed(f, g)
    j, m = 5, 3
    assert R[j, m + n // 2] == f[j + m] * np.conj(g[j - m])
    assert R[1, 2 + n // 2] == 0  # j - m < 0 falls outside the box


def test_kernel_round_trip_covers_every_entry():
    n = 32
    K = cplx(n, n)
    even = _kernels.kernel_to_mixed(K)
    # odd entries sit at (j + m + 1, j - m); row 0 needs j + m = -1, which the shift cannot supply
    odd = _kernels.kernel_to_mixed(np.roll(K, -1, axis=0))
    back = _kernels.mixed_to_kernel(even, odd)
    assert np.abs(back[1:] - K[1:]).max() == 0
    assert np.abs(back[0, ::2] - K[0, ::2]).max() == 0


@pytest.mark.parametrize("flag, want", [("1", "numpy"), ("0", "numba")])
def test_env_flag_selects_backend(flag, want):
    env = dict(os.environ, MOYALKIT_DISABLE_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", "from moyalkit import _kernels; print(_kernels.backend_name())"],
                         capture_output=True, text=True, env=env, check=True).stdout.strip()
    assert out == want


def test_numpy_fallback_gives_same_star_product(tmp_path):
    code = ("import numpy as np; from moyalkit.phasespace import GridSpec, wigner;"
            "from moyalkit.states import gaussian, cat; from moyalkit.weyltransform import star_numeric;"
            "g = GridSpec(64, 16.0, 1.0); F = star_numeric(wigner(gaussian(g, 0.5)), wigner(cat(g, 1.0, sigma=0.8)));"
            f"np.save(r'{tmp_path}/' + __import__('moyalkit._kernels').__dict__['_kernels'].backend_name(), F.values)")
    for flag in ("0", "1"):
        subprocess.run([sys.executable, "-c", code], check=True, env=dict(os.environ, MOYALKIT_DISABLE_NUMBA=flag))
    a, b = np.load(tmp_path / "numba.npy"), np.load(tmp_path / "numpy.npy")
    assert np.abs(a - b).max() < 1e-14


def test_benchmark_script_runs():
    from pathlib import Path
    script = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"
    out = subprocess.run([sys.executable, str(script), "--n", "32", "--repeat", "1"],
                         capture_output=True, text=True, check=True).stdout
    assert "twisted_sum" in out and "speedup" in out
