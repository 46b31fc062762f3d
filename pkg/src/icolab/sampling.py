"""Seeded random quantum objects for property tests and scenario sweeps.

Everything takes a ``numpy.random.Generator`` so callers control
reproducibility end to end; nothing in this module touches global RNG state.
"""
from __future__ import annotations

import numpy as np

from .linalg import dagger, tensor


def haar_unitary(rng: np.random.Generator, dim: int = 2) -> np.ndarray:
    """Haar-distributed unitary via QR of a Ginibre matrix with phase fix."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    phases = np.diag(r).copy()
    phases /= np.abs(phases)
    return q * phases


def random_pure_state(rng: np.random.Generator, dim: int = 2) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_density(rng: np.random.Generator, dim: int, rank: int | None = None) -> np.ndarray:
    """Ginibre-induced random density matrix (full rank by default)."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def random_two_qubit_state(rng: np.random.Generator) -> np.ndarray:
    return random_density(rng, 4)


def random_separable_two_qubit(rng: np.random.Generator, terms: int = 4) -> np.ndarray:
    """Convex mixture of random product states (separable by construction)."""
    weights = rng.dirichlet(np.ones(terms))
    rho = np.zeros((4, 4), dtype=np.complex128)
    for w in weights:
        a = random_density(rng, 2, rank=1)
        b = random_density(rng, 2, rank=1)
        rho += w * tensor(a, b)
    return rho


def random_povm(rng: np.random.Generator, dim: int, outcomes: int) -> list[np.ndarray]:
    """Random full-rank POVM via Ginibre elements normalized by S^(-1/2)."""
    gs = [random_density(rng, dim) for _ in range(outcomes)]
    s = sum(gs)
    vals, vecs = np.linalg.eigh(s)
    s_inv_sqrt = vecs @ np.diag(1.0 / np.sqrt(vals)) @ dagger(vecs)
    return [s_inv_sqrt @ g @ s_inv_sqrt for g in gs]


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (g + dagger(g)) / 2.0


def random_valid_process(rng: np.random.Generator, d: int = 2, strength: float = 0.8):
    """Random full-rank valid process on uniform party dimension d.

    Starts from the maximally mixed process and adds a traceless direction
    inside the valid subspace, scaled so the smallest eigenvalue keeps a
    (1 - strength) margin of the mixed process's level.
    """
    from .process import ProcessMatrix, standard_layout, validity_projection

    if not 0.0 <= strength < 1.0:
        raise ValueError("strength must be in [0, 1)")
    layout = standard_layout(d)
    n = layout.dim
    base = (layout.dim_of("A_O") * layout.dim_of("B_O")) / n
    direction = validity_projection(random_hermitian(rng, n), layout)
    direction -= np.trace(direction) / n * np.eye(n)
    low = float(np.linalg.eigvalsh(direction)[0])
    w = base * np.eye(n)
    if low < -1e-12:
        w = w + (strength * base / abs(low)) * direction
    return ProcessMatrix(w, layout)


def random_instrument(
    rng: np.random.Generator,
    d_in: int = 2,
    d_out: int = 2,
    inputs: int = 1,
    outcomes: int = 2,
):
    """Random measure-and-reprepare instrument (full-rank POVM per input)."""
    from .process import Instrument

    povms = [random_povm(rng, d_in, outcomes) for _ in range(inputs)]
    states = [
        [random_density(rng, d_out) for _ in range(outcomes)] for _ in range(inputs)
    ]
    return Instrument.measure_reprepare(povms, states)


def random_behavior(rng: np.random.Generator, shape: tuple[int, int, int, int] = (2, 2, 2, 2)):
    """Unconstrained random behavior table (Dirichlet cell distributions)."""
    from .bell import BehaviorTable

    nx, ny, no1, no2 = shape
    cells = rng.dirichlet(np.ones(no1 * no2), size=(nx, ny))
    return BehaviorTable(cells.reshape(shape))


def _one_way_random(rng: np.random.Generator, shape: tuple[int, int, int, int], direction: str) -> np.ndarray:
    """Random behavior signaling one way at most, via the chain rule: the
    early party's outcome law ignores the late party's input."""
    nx, ny, no1, no2 = shape
    if direction == "AB":
        first = rng.dirichlet(np.ones(no1), size=nx)  # p(o1|x)
        second = rng.dirichlet(np.ones(no2), size=(nx, ny, no1))  # p(o2|x,y,o1)
        return np.einsum("xi,xyij->xyij", first, second)
    first = rng.dirichlet(np.ones(no2), size=ny)  # p(o2|y)
    second = rng.dirichlet(np.ones(no1), size=(nx, ny, no2))  # p(o1|x,y,o2)
    return np.einsum("yj,xyji->xyij", first, second)


def random_causal_behavior(
    rng: np.random.Generator, shape: tuple[int, int, int, int] = (2, 2, 2, 2)
):
    """Random member of the causal polytope: a mixture of a random A-first
    and a random B-first behavior."""
    from .bell import BehaviorTable

    q = float(rng.uniform())
    table = q * _one_way_random(rng, shape, "AB") + (1 - q) * _one_way_random(
        rng, shape, "BA"
    )
    return BehaviorTable(table)
