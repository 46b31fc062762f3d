"""Behavior tables, CHSH evaluation, the classical bound, and seesaw
optimization of measurement settings.

Outcomes are labeled 0 and 1 and carry eigenvalues +1 and -1, so the
correlator for one input pair is E = p00 - p01 - p10 + p11. The CHSH
functional used throughout is S = E(0,0) + E(0,1) + E(1,0) - E(1,1), with
classical bound 2 and quantum bound 2*sqrt(2).
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from . import _seesaw
from .linalg import SpaceLayout, X, Y, Z, as_matrix, is_psd, projector, tensor
from .switch import ControlMeasurement, condition_on_control

PAULI = np.stack([X, Y, Z])

TSIRELSON = 2.0 * np.sqrt(2.0)

DEFAULT_RESTARTS = 32
DEFAULT_SEESAW_TOL = 1e-10
DEFAULT_SEESAW_SEED = 7041776
MAX_SEESAW_ITER = 500


def bloch_observable(theta: float, phi: float) -> np.ndarray:
    """+-1-outcome qubit observable along the (theta, phi) Bloch direction."""
    n = np.array(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)]
    )
    return np.einsum("i,ijk->jk", n, PAULI)


@dataclass(frozen=True)
class MeasurementSetting:
    """One party's dichotomic qubit observables, one per input value,
    parameterized by Bloch angles (theta, phi)."""

    angles: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "angles", tuple((float(t), float(p)) for t, p in self.angles)
        )

    @property
    def inputs(self) -> int:
        return len(self.angles)

    def observable(self, x: int) -> np.ndarray:
        return bloch_observable(*self.angles[x])

    def projectors(self, x: int) -> tuple[np.ndarray, np.ndarray]:
        """(P_+, P_-) for input x; outcome 0 is the +1 eigenspace."""
        o = self.observable(x)
        eye = np.eye(2)
        return (eye + o) / 2.0, (eye - o) / 2.0

    @classmethod
    def from_bloch_vectors(cls, vectors: np.ndarray) -> "MeasurementSetting":
        angles = []
        for v in np.atleast_2d(vectors):
            v = v / np.linalg.norm(v)
            angles.append((np.arccos(np.clip(v[2], -1.0, 1.0)), np.arctan2(v[1], v[0])))
        return cls(tuple(angles))

    @classmethod
    def z_x(cls) -> "MeasurementSetting":
        """Inputs 0/1 measure Z and X."""
        return cls(((0.0, 0.0), (np.pi / 2, 0.0)))

    @classmethod
    def diagonal(cls) -> "MeasurementSetting":
        """Inputs 0/1 measure (Z+X)/sqrt2 and (Z-X)/sqrt2."""
        return cls(((np.pi / 4, 0.0), (np.pi / 4, np.pi)))


@dataclass(frozen=True)
class BehaviorTable:
    """Conditional probability table p(o1, o2 | i1, i2), indexed
    [i1, i2, o1, o2]."""

    probs: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim != 4:
            raise ValueError(f"expected a 4-index table, got shape {p.shape}")
        if p.min() < -1e-10 or p.max() > 1.0 + 1e-10:
            raise ValueError("probabilities must lie in [0, 1]")
        sums = p.sum(axis=(2, 3))
        if np.max(np.abs(sums - 1.0)) > 1e-10:
            raise ValueError("each conditional distribution must sum to 1")
        object.__setattr__(self, "probs", p)

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.probs.shape

    def first_marginals(self) -> np.ndarray:
        """p(o1 | i1, i2) as an [i1, i2, o1] array."""
        return self.probs.sum(axis=3)

    def second_marginals(self) -> np.ndarray:
        """p(o2 | i1, i2) as an [i1, i2, o2] array."""
        return self.probs.sum(axis=2)

    @classmethod
    def uniform(cls, nx: int = 2, ny: int = 2, no1: int = 2, no2: int = 2) -> "BehaviorTable":
        return cls(np.full((nx, ny, no1, no2), 1.0 / (no1 * no2)))

    def to_json_dict(self) -> dict:
        return {
            "schema": "icolab/behavior-table/v1",
            "inputs": [self.shape[0], self.shape[1]],
            "outputs": [self.shape[2], self.shape[3]],
            "probabilities": self.probs.tolist(),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "BehaviorTable":
        if data.get("schema") != "icolab/behavior-table/v1":
            raise ValueError(f"unsupported behavior-table schema: {data.get('schema')!r}")
        p = np.asarray(data["probabilities"], dtype=np.float64)
        expected = tuple(data["inputs"]) + tuple(data["outputs"])
        if p.shape != expected:
            raise ValueError(f"probability array shape {p.shape} != declared {expected}")
        return cls(p)


@dataclass(frozen=True)
class CHSHResult:
    """CHSH value with the correlators and settings that produced it."""

    value: float
    correlators: np.ndarray
    settings: tuple[MeasurementSetting, MeasurementSetting] | None = None
    seed: int | None = None
    backend: str | None = None

    def __post_init__(self) -> None:
        e = np.asarray(self.correlators, dtype=np.float64)
        if e.shape != (2, 2):
            raise ValueError(f"correlators must be 2x2, got {e.shape}")
        object.__setattr__(self, "correlators", e)
        combo = e[0, 0] + e[0, 1] + e[1, 0] - e[1, 1]
        if abs(self.value - combo) > 1e-12:
            raise ValueError(
                f"reported S={self.value} differs from correlator combination {combo}"
            )


def behavior(
    rho: np.ndarray, c1: MeasurementSetting, c2: MeasurementSetting
) -> BehaviorTable:
    """Born-rule behavior table of a two-qubit state under the settings."""
    rho = as_matrix(rho)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a two-qubit density operator, got shape {rho.shape}")
    probs = np.empty((c1.inputs, c2.inputs, 2, 2))
    for x in range(c1.inputs):
        pa = c1.projectors(x)
        for y in range(c2.inputs):
            pb = c2.projectors(y)
            for o1, o2 in product(range(2), range(2)):
                probs[x, y, o1, o2] = np.real(np.trace(rho @ tensor(pa[o1], pb[o2])))
    return BehaviorTable(np.clip(probs, 0.0, 1.0))


def chsh(
    table: BehaviorTable,
    settings: tuple[MeasurementSetting, MeasurementSetting] | None = None,
) -> CHSHResult:
    """Evaluate the CHSH functional on a binary-alphabet behavior table."""
    if table.shape != (2, 2, 2, 2):
        raise ValueError(f"CHSH needs binary inputs and outputs, got shape {table.shape}")
    p = table.probs
    e = p[:, :, 0, 0] - p[:, :, 0, 1] - p[:, :, 1, 0] + p[:, :, 1, 1]
    s = e[0, 0] + e[0, 1] + e[1, 0] - e[1, 1]
    return CHSHResult(value=float(s), correlators=e, settings=settings)


def classical_chsh_bound() -> float:
    """Maximum of S over the 16 deterministic local strategies (exactly 2)."""
    best = -np.inf
    for a0, a1, b0, b1 in product((1, -1), repeat=4):
        best = max(best, a0 * b0 + a0 * b1 + a1 * b0 - a1 * b1)
    return float(best)


def correlation_matrix(rho: np.ndarray) -> np.ndarray:
    """3x3 spin correlation matrix T_ij = tr[rho (sigma_i x sigma_j)]."""
    rho = as_matrix(rho)
    return np.array(
        [
            [np.real(np.trace(rho @ tensor(PAULI[i], PAULI[j]))) for j in range(3)]
            for i in range(3)
        ]
    )


def optimize_chsh(
    rho: np.ndarray,
    restarts: int = DEFAULT_RESTARTS,
    tol: float = DEFAULT_SEESAW_TOL,
    conditioning: tuple[ControlMeasurement, str] | None = None,
    seed: int = DEFAULT_SEESAW_SEED,
) -> CHSHResult:
    """Best CHSH value over measurement settings, by multi-start seesaw.

    Each restart alternates closed-form per-party updates (the optimal
    observable given the other party is the unit Bloch direction of its
    conditional correlation vector), which is monotone in S; restarts are
    seeded from ``seed``. With ``conditioning=(m, outcome)`` the input must
    be a control (x) two-qubit-targets state, which is first conditioned on
    the control outcome.

    The returned value is recomputed from the Born-rule behavior at the
    optimal settings, so it can never exceed the quantum bound.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    arr = np.asarray(rho, dtype=np.complex128)
    if arr.ndim == 1:
        arr = projector(arr)
    if conditioning is not None:
        m, outcome = conditioning
        d = arr.shape[0]
        if d % (4 * m.dim) != 0:
            raise ValueError(
                f"conditioned input of dimension {d} is not control x two qubits"
            )
        layout = SpaceLayout(("control", "target1", "target2"), (m.dim, 2, d // (2 * m.dim)))
        _, arr = condition_on_control(arr, m, outcome, layout)
    arr = as_matrix(arr)
    if arr.shape != (4, 4):
        raise ValueError(f"expected a two-qubit density operator, got shape {arr.shape}")
    if not is_psd(arr, 1e-8):
        raise ValueError("input must be positive semidefinite")

    t = correlation_matrix(arr)
    rng = np.random.default_rng(seed)
    b0 = rng.normal(size=(restarts, 3))
    b0 /= np.linalg.norm(b0, axis=1, keepdims=True)
    b1 = rng.normal(size=(restarts, 3))
    b1 /= np.linalg.norm(b1, axis=1, keepdims=True)
    backend = _seesaw.backend_name()
    s, a0, a1, b0, b1 = _seesaw.run_seesaw(t, b0, b1, MAX_SEESAW_ITER, tol)
    best = int(np.argmax(s))
    c1 = MeasurementSetting.from_bloch_vectors(np.stack([a0[best], a1[best]]))
    c2 = MeasurementSetting.from_bloch_vectors(np.stack([b0[best], b1[best]]))
    result = chsh(behavior(arr, c1, c2), settings=(c1, c2))
    return CHSHResult(
        value=result.value,
        correlators=result.correlators,
        settings=(c1, c2),
        seed=seed,
        backend=backend,
    )
