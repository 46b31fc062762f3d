"""Multi-restart seesaw kernel for CHSH optimization over Bloch vectors.

Given the 3x3 spin correlation matrix T of a two-qubit state, the CHSH value
for measurement directions a0, a1 (first party) and b0, b1 (second party) is

    S = a0 . T (b0 + b1) + a1 . T (b0 - b1)

and each party's optimum given the other is the normalized image vector, so
alternating closed-form updates are monotone in S. This module provides two
interchangeable implementations of the restart loop:

- a pure-numpy path vectorized over restarts, and
- a numba ``@njit`` twin compiled on first use.

The active path is chosen by the ``ICOLAB_BACKEND`` environment variable:
``"numpy"``, ``"numba"``, or ``"auto"`` (default; numba when importable).
Both paths implement identical update and stopping rules, so results agree
to floating-point noise. ``benchmarks/bench_seesaw.py`` compares them.
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    numba = None
    HAS_NUMBA = False

_EPS = 1e-300


def backend_name() -> str:
    """Resolve the active backend from ``ICOLAB_BACKEND``."""
    choice = os.environ.get("ICOLAB_BACKEND", "auto").strip().lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(
            f"ICOLAB_BACKEND must be 'auto', 'numba' or 'numpy', got {choice!r}"
        )
    if choice == "auto":
        return "numba" if HAS_NUMBA else "numpy"
    if choice == "numba" and not HAS_NUMBA:
        raise RuntimeError("ICOLAB_BACKEND=numba but numba is not installed")
    return choice


def seesaw_numpy(
    t: np.ndarray, b0: np.ndarray, b1: np.ndarray, max_iter: int, tol: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Run the seesaw from ``R`` restart seeds, vectorized over restarts.

    Returns (s, a0, a1, b0, b1) with s of shape (R,) and vectors (R, 3).
    """
    t = np.ascontiguousarray(t, dtype=np.float64)
    b0 = np.array(b0, dtype=np.float64)
    b1 = np.array(b1, dtype=np.float64)
    r = b0.shape[0]
    a0 = np.zeros_like(b0)
    a1 = np.zeros_like(b1)
    a0[:, 0] = 1.0
    a1[:, 0] = 1.0
    s = np.full(r, -np.inf)
    active = np.ones(r, dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        c0 = (b0[idx] + b1[idx]) @ t.T
        c1 = (b0[idx] - b1[idx]) @ t.T
        n0 = np.linalg.norm(c0, axis=1)
        n1 = np.linalg.norm(c1, axis=1)
        ok0 = n0 > _EPS
        ok1 = n1 > _EPS
        a0[idx[ok0]] = c0[ok0] / n0[ok0, None]
        a1[idx[ok1]] = c1[ok1] / n1[ok1, None]
        d0 = (a0[idx] + a1[idx]) @ t
        d1 = (a0[idx] - a1[idx]) @ t
        m0 = np.linalg.norm(d0, axis=1)
        m1 = np.linalg.norm(d1, axis=1)
        ok0 = m0 > _EPS
        ok1 = m1 > _EPS
        b0[idx[ok0]] = d0[ok0] / m0[ok0, None]
        b1[idx[ok1]] = d1[ok1] / m1[ok1, None]
        s_new = np.einsum("ri,ri->r", b0[idx], d0) + np.einsum("ri,ri->r", b1[idx], d1)
        converged = np.abs(s_new - s[idx]) < tol
        s[idx] = s_new
        active[idx[converged]] = False
    return s, a0, a1, b0, b1


def _seesaw_scalar_py(t, b0, b1, max_iter, tol):
    r = b0.shape[0]
    a0 = np.zeros((r, 3))
    a1 = np.zeros((r, 3))
    s = np.empty(r)
    for k in range(r):
        a0k = np.zeros(3)
        a0k[0] = 1.0
        a1k = np.zeros(3)
        a1k[0] = 1.0
        b0k = b0[k].copy()
        b1k = b1[k].copy()
        sk = -np.inf
        for _ in range(max_iter):
            c0 = t @ (b0k + b1k)
            c1 = t @ (b0k - b1k)
            n0 = np.sqrt(c0[0] ** 2 + c0[1] ** 2 + c0[2] ** 2)
            n1 = np.sqrt(c1[0] ** 2 + c1[1] ** 2 + c1[2] ** 2)
            if n0 > _EPS:
                a0k = c0 / n0
            if n1 > _EPS:
                a1k = c1 / n1
            d0 = t.T @ (a0k + a1k)
            d1 = t.T @ (a0k - a1k)
            m0 = np.sqrt(d0[0] ** 2 + d0[1] ** 2 + d0[2] ** 2)
            m1 = np.sqrt(d1[0] ** 2 + d1[1] ** 2 + d1[2] ** 2)
            if m0 > _EPS:
                b0k = d0 / m0
            if m1 > _EPS:
                b1k = d1 / m1
            s_new = b0k @ d0 + b1k @ d1
            if abs(s_new - sk) < tol:
                sk = s_new
                break
            sk = s_new
        s[k] = sk
        a0[k] = a0k
        a1[k] = a1k
        b0[k] = b0k
        b1[k] = b1k
    return s, a0, a1, b0, b1


_seesaw_numba = None


def seesaw_numba(
    t: np.ndarray, b0: np.ndarray, b1: np.ndarray, max_iter: int, tol: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """JIT-compiled twin of :func:`seesaw_numpy` (compiled on first call)."""
    global _seesaw_numba
    if _seesaw_numba is None:
        _seesaw_numba = numba.njit(cache=True)(_seesaw_scalar_py)
    t = np.ascontiguousarray(t, dtype=np.float64)
    b0 = np.array(b0, dtype=np.float64)
    b1 = np.array(b1, dtype=np.float64)
    return _seesaw_numba(t, b0, b1, max_iter, tol)


def run_seesaw(
    t: np.ndarray, b0: np.ndarray, b1: np.ndarray, max_iter: int, tol: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Dispatch to the backend selected by ``ICOLAB_BACKEND``."""
    if backend_name() == "numba":
        return seesaw_numba(t, b0, b1, max_iter, tol)
    return seesaw_numpy(t, b0, b1, max_iter, tol)
