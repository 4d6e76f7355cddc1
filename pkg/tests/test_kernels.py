import hashlib
import os
import subprocess
import sys

import numpy as np
import pytest

from lfe_lab import _pykernels, kernels

BACKENDS = ["python"] + (["compiled"] if kernels.BACKEND == "compiled" else [])
needs_compiled = pytest.mark.skipif(kernels.BACKEND != "compiled", reason="compiled extension not built")


def test_splitmix_reference_value():
    # first output of the reference SplitMix64 generator seeded with 0
    out = _pykernels._mix(np.array([0x9E3779B97F4A7C15], dtype=np.uint64))
    assert int(out[0]) == 0xE220A8397B1DCDAF


def test_normals_deterministic():
    a = kernels.counter_normals(42, [0, 1, 2], 3, 5)
    b = kernels.counter_normals(42, [0, 1, 2], 3, 5)
    assert a.shape == (3, 5) and np.array_equal(a, b)


def test_normals_are_addressable():
    # a path's draws do not depend on which other paths are requested
    full = kernels.counter_normals(7, np.arange(10), 4, 3)
    part = kernels.counter_normals(7, [3, 8], 4, 3)
    assert np.array_equal(full[[3, 8]], part)


def test_normals_differ_by_seed_step_and_path():
    base = kernels.counter_normals(1, [0], 0, 4)
    assert not np.array_equal(base, kernels.counter_normals(2, [0], 0, 4))
    assert not np.array_equal(base, kernels.counter_normals(1, [1], 0, 4))
    assert not np.array_equal(base, kernels.counter_normals(1, [0], 1, 4))


def test_normals_moments():
    z = kernels.counter_normals(2024, np.arange(200_000), 0, 2)
    n = z.shape[0]
    assert abs(z.mean()) < 5 / np.sqrt(2 * n)
    assert abs(z.var() - 1) < 5 * np.sqrt(2 / (2 * n))
    assert abs(np.mean(z[:, 0] * z[:, 1])) < 5 / np.sqrt(n)
    # fourth moment of a standard normal is 3
    assert abs(np.mean(z**4) - 3) < 5 * np.sqrt(96 / (2 * n))
    assert np.all(np.isfinite(z))


def test_odd_dim_uses_prefix_of_pairs():
    odd = kernels.counter_normals(5, [0, 1], 2, 3)
    even = kernels.counter_normals(5, [0, 1], 2, 4)
    # same step layout only when ceil(dim/2) matches
    assert np.array_equal(odd, even[:, :3])


@pytest.mark.parametrize("backend", BACKENDS)
def test_dense_initial_state(backend):
    snaps = np.array([0, 3])
    out = kernels.propagate_dense(np.eye(3)[None], np.zeros((1, 3, 3)), 2 * np.eye(3), 9, 4, 0, 3, snaps, backend=backend)
    ref = 2 * kernels.counter_normals(9, np.arange(4), 0, 3)
    assert np.allclose(out[0], ref, atol=0) and np.allclose(out[1], ref, atol=0)


@pytest.mark.parametrize("backend", BACKENDS)
def test_dense_matches_manual_loop(backend):
    rng = np.random.default_rng(0)
    K, dim, paths = 5, 3, 6
    M = np.eye(dim) + 0.1 * rng.standard_normal((K, dim, dim))
    S = 0.3 * rng.standard_normal((1, dim, dim))
    C0 = np.linalg.cholesky(np.array([[2.0, 0.5, 0.1], [0.5, 1.0, 0.2], [0.1, 0.2, 1.5]]))
    out = kernels.propagate_dense(M, S, C0, 11, paths, 0, K, [K], backend=backend)[0]
    x = kernels.counter_normals(11, np.arange(paths), 0, dim) @ C0.T
    for k in range(1, K + 1):
        x = x @ M[k - 1].T + kernels.counter_normals(11, np.arange(paths), k, dim) @ S[0].T
    assert np.allclose(out, x, rtol=1e-13, atol=1e-13)


@pytest.mark.parametrize("backend", BACKENDS)
def test_cycle_matches_manual_loop(backend):
    n, K, paths = 6, 4, 5
    out = kernels.propagate_cycle(0.9, -0.05, 0.2, 1.5, n, 3, paths, 0, K, [2, K], backend=backend)
    x = 1.5 * kernels.counter_normals(3, np.arange(paths), 0, n)
    snaps = {}
    for k in range(1, K + 1):
        x = 0.9 * x - 0.05 * (np.roll(x, 1, axis=1) + np.roll(x, -1, axis=1)) + 0.2 * kernels.counter_normals(3, np.arange(paths), k, n)
        snaps[k] = x
    assert np.allclose(out[0], snaps[2], rtol=1e-13, atol=1e-13)
    assert np.allclose(out[1], snaps[K], rtol=1e-13, atol=1e-13)


@pytest.mark.parametrize("backend", BACKENDS)
def test_path_offset_splits_runs(backend):
    whole = kernels.propagate_cycle(0.95, 0.01, 0.1, 1.0, 8, 77, 10, 0, 20, [20], backend=backend)
    tail = kernels.propagate_cycle(0.95, 0.01, 0.1, 1.0, 8, 77, 6, 4, 20, [20], backend=backend)
    assert np.array_equal(whole[:, 4:], tail)


@needs_compiled
def test_backends_agree():
    args = (0.97, -0.01, 0.05, 1.0, 8, 5, 300, 0, 50, [0, 25, 50])
    py = kernels.propagate_cycle(*args, backend="python")
    cc = kernels.propagate_cycle(*args, backend="compiled")
    assert np.max(np.abs(py - cc)) <= 1e-13
    M = np.eye(3)[None] * 0.9
    S = np.eye(3)[None] * 0.2
    py = kernels.propagate_dense(M, S, np.eye(3), 1, 300, 5, 40, [40], backend="python")
    cc = kernels.propagate_dense(M, S, np.eye(3), 1, 300, 5, 40, [40], backend="compiled")
    assert np.max(np.abs(py - cc)) <= 1e-13
    py_n = _pykernels.counter_normals(3, np.arange(50, dtype=np.int64), 7, 5)
    cc_n = kernels.backend_module("compiled").counter_normals(3, np.arange(50, dtype=np.int64), 7, 5)
    assert np.max(np.abs(py_n - cc_n)) <= 1e-15


@needs_compiled
@pytest.mark.parametrize("y", [0.0, 0.5, 7.0, 15.0, 22.0, 60.0])
def test_bessel_backends_agree(y):
    py_s = kernels.backend_module("python").bessel_ie012_series(y)
    cc_s = kernels.backend_module("compiled").bessel_ie012_series(y)
    assert np.allclose(py_s, cc_s, rtol=1e-14, atol=0)
    py_q = kernels.backend_module("python").bessel_ie012_quad(y, 1e-14)
    cc_q = kernels.backend_module("compiled").bessel_ie012_quad(y, 1e-14)
    assert np.allclose(py_q, cc_q, rtol=1e-13, atol=1e-15)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.backend_module("fortran")


_SNIPPET = (
    "import hashlib, numpy as np; from lfe_lab import kernels;"
    "x = kernels.propagate_cycle(0.97, -0.01, 0.05, 1.0, 8, 5, 2000, 0, 30, [30]);"
    "print(kernels.BACKEND, hashlib.sha256(np.round(x, 12).tobytes()).hexdigest())"
)


def _run(env_extra):
    env = dict(os.environ, **env_extra)
    out = subprocess.run([sys.executable, "-c", _SNIPPET], env=env, capture_output=True, text=True, check=True)
    return out.stdout.split()


def test_env_forces_python_backend():
    backend, _ = _run({"LFE_LAB_PURE_PYTHON": "1"})
    assert backend == "python"


@needs_compiled
def test_thread_count_does_not_change_results():
    _, one = _run({"OMP_NUM_THREADS": "1"})
    _, many = _run({"OMP_NUM_THREADS": "4"})
    _, pure = _run({"LFE_LAB_PURE_PYTHON": "1"})
    assert one == many == pure
    assert len(one) == len(hashlib.sha256().hexdigest())
