"""Backend selection for the hot loops.

The compiled extension is used when it imported cleanly; otherwise the numpy
implementation takes over.  Set ``LFE_LAB_PURE_PYTHON=1`` to force the
fallback.  Both backends produce the same random streams.
"""

from __future__ import annotations

import os

import numpy as np

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("LFE_LAB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # pragma: no cover - depends on the build
        pass
    else:
        _impl = _compiled
        BACKEND = "compiled"

__all__ = [
    "BACKEND",
    "counter_normals",
    "stream_keys",
    "propagate_dense",
    "propagate_cycle",
    "bessel_ie012_series",
    "bessel_ie012_quad",
    "backend_module",
]


def backend_module(name: str | None = None):
    """Return the implementation module for ``name`` (default: active one)."""
    if name is None:
        return _impl
    if name == "python":
        return _pykernels
    if name == "compiled":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {name!r}")


def _u64(seed: int) -> int:
    return int(seed) & 0xFFFFFFFFFFFFFFFF


def stream_keys(seed: int, paths) -> np.ndarray:
    return _impl.stream_keys(_u64(seed), np.ascontiguousarray(paths, dtype=np.int64))


def counter_normals(seed: int, paths, step: int, dim: int) -> np.ndarray:
    """Standard normals for ``paths`` at time step ``step`` (shape ``(len(paths), dim)``)."""
    return _impl.counter_normals(_u64(seed), np.ascontiguousarray(paths, dtype=np.int64), int(step), int(dim))


def propagate_dense(M, S, C0, seed, paths, path_offset, n_steps, snaps, backend=None) -> np.ndarray:
    """Iterate ``x <- M_k x + S_k xi_k`` from ``x_0 = C0 xi_0`` for every path.

    ``M`` and ``S`` have a leading axis of length 1 (time-homogeneous) or
    ``n_steps``.  Returns states at the sorted step indices ``snaps`` as an
    array of shape ``(len(snaps), paths, dim)``.
    """
    mod = backend_module(backend)
    return mod.propagate_dense(
        np.ascontiguousarray(M, dtype=float),
        np.ascontiguousarray(S, dtype=float),
        np.ascontiguousarray(C0, dtype=float),
        _u64(seed),
        int(paths),
        int(path_offset),
        int(n_steps),
        np.ascontiguousarray(snaps, dtype=np.int64),
    )


def propagate_cycle(c_self, c_nb, noise, init_scale, n, seed, paths, path_offset, n_steps, snaps, backend=None):
    """Nearest-neighbour circulant update ``x_v <- c_self x_v + c_nb (x_{v-1} + x_{v+1}) + noise xi_v``."""
    mod = backend_module(backend)
    return mod.propagate_cycle(
        float(c_self),
        float(c_nb),
        float(noise),
        float(init_scale),
        int(n),
        _u64(seed),
        int(paths),
        int(path_offset),
        int(n_steps),
        np.ascontiguousarray(snaps, dtype=np.int64),
    )


def bessel_ie012_series(y: float):
    return _impl.bessel_ie012_series(float(y))


def bessel_ie012_quad(y: float, tol: float = 1e-14):
    return _impl.bessel_ie012_quad(float(y), float(tol))
