"""Quantum-switch state construction: single switch, entangled double switch,
event-input reduced states, classical-order counterparts, and the control
measurement performed by the final party.

A switch runs a target system through two operations ``u_a`` and ``u_b`` in
an order selected by a control qubit: control |0> gives u_a-then-u_b with
free evolution ``v0`` in between, control |1> gives u_b-then-u_a with ``v1``
in between. States live on control (x) target with the control first
(most significant), so a switch output for target dimension d is a vector of
length 2*d.

The double switch drives two independent targets with one shared control.
Its ``order_mode`` selects the regime:

- ``"coherent"``: the superposed-control state vector (optionally decohered
  by ``visibility`` < 1, which damps the control off-diagonal block and then
  returns a density operator);
- ``"classical-mixture"``: the weight-``mixture_q`` probabilistic mixture of
  the two definite-order branch densities;
- ``"definite-AB"`` / ``"definite-BA"``: a single branch.

``env_flag=True`` (definite modes only) models a different physical story
with the same algebra: the order is definite, but a retained two-valued
environment coherently selects which free evolution (v0 vs v1) acts, with
the shared control amplitudes reused as the environment amplitudes. The
first factor of the output is then the environment instead of the order
control; either way it is the system the final party measures.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    HERMITICITY_ATOL,
    I2,
    MINUS,
    PLUS,
    SpaceLayout,
    as_matrix,
    dagger,
    eig_hermitian,
    is_psd,
    is_unitary,
    ket,
    partial_trace,
    projector,
    tensor,
)

INV_SQRT2 = 1.0 / np.sqrt(2.0)

ORDER_MODES = ("coherent", "classical-mixture", "definite-AB", "definite-BA")


def _check_unitary(name: str, u: np.ndarray, dim: int) -> np.ndarray:
    u = as_matrix(u)
    if u.shape != (dim, dim):
        raise ValueError(f"{name} must be {dim}x{dim}, got {u.shape}")
    if not is_unitary(u):
        raise ValueError(f"{name} is not unitary within {HERMITICITY_ATOL}")
    return u


@dataclass(frozen=True)
class SwitchSpec:
    """Full parameterization of a single quantum switch.

    ``control_amplitudes`` are the (alpha, beta) coefficients of the control
    state alpha|0> + beta|1>; the default is the balanced superposition.
    """

    u_a: np.ndarray
    u_b: np.ndarray
    v0: np.ndarray = field(default_factory=lambda: I2.copy())
    v1: np.ndarray = field(default_factory=lambda: I2.copy())
    psi_t0: np.ndarray = field(default_factory=lambda: ket(0))
    control_amplitudes: tuple[complex, complex] = (INV_SQRT2, INV_SQRT2)

    def __post_init__(self) -> None:
        psi = np.asarray(self.psi_t0, dtype=np.complex128).reshape(-1)
        object.__setattr__(self, "psi_t0", psi)
        d = psi.size
        for name in ("u_a", "u_b", "v0", "v1"):
            object.__setattr__(self, name, _check_unitary(name, getattr(self, name), d))
        if abs(np.linalg.norm(psi) - 1.0) > 1e-9:
            raise ValueError("psi_t0 must be a unit vector")
        a, b = self.control_amplitudes
        if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > 1e-9:
            raise ValueError("control amplitudes must satisfy |alpha|^2 + |beta|^2 = 1")

    @property
    def target_dim(self) -> int:
        return self.psi_t0.size

    @property
    def layout(self) -> SpaceLayout:
        return SpaceLayout(("control", "target"), (2, self.target_dim))

    def branch_unitary(self, order: str) -> np.ndarray:
        """Composed target evolution for one definite order ("AB" or "BA")."""
        if order == "AB":
            return self.u_b @ self.v0 @ self.u_a
        if order == "BA":
            return self.u_a @ self.v1 @ self.u_b
        raise ValueError(f"order must be 'AB' or 'BA', got {order!r}")


def switch_output(spec: SwitchSpec) -> np.ndarray:
    """Final control (x) target state vector of the switch."""
    alpha, beta = spec.control_amplitudes
    branch0 = spec.branch_unitary("AB") @ spec.psi_t0
    branch1 = spec.branch_unitary("BA") @ spec.psi_t0
    return alpha * tensor(ket(0), branch0) + beta * tensor(ket(1), branch1)


def event_input_state(spec: SwitchSpec, event: str) -> np.ndarray:
    """Target state immediately before the first ("E1") or second ("E2")
    operation, as a branch-weighted density operator.

    Both branches feed the initial target into whichever operation occurs
    first, so E1 is the initial state itself; E2 mixes the two half-evolved
    branch states with the control weights.
    """
    alpha, beta = spec.control_amplitudes
    if event == "E1":
        return projector(spec.psi_t0)
    if event == "E2":
        mid0 = spec.v0 @ spec.u_a @ spec.psi_t0
        mid1 = spec.v1 @ spec.u_b @ spec.psi_t0
        return abs(alpha) ** 2 * projector(mid0) + abs(beta) ** 2 * projector(mid1)
    raise ValueError(f"event must be 'E1' or 'E2', got {event!r}")


@dataclass(frozen=True)
class ControlMeasurement:
    """Projective measurement on the control factor: an orthonormal basis
    with one outcome label per basis vector."""

    basis: tuple[np.ndarray, ...]
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        vecs = tuple(np.asarray(v, dtype=np.complex128).reshape(-1) for v in self.basis)
        object.__setattr__(self, "basis", vecs)
        if len(vecs) != len(self.labels):
            raise ValueError("one label per basis vector required")
        d = vecs[0].size
        completeness = sum(projector(v) for v in vecs)
        if np.max(np.abs(completeness - np.eye(d))) > 1e-10:
            raise ValueError("basis vectors must form a complete orthonormal set")

    @property
    def dim(self) -> int:
        return self.basis[0].size

    @classmethod
    def computational(cls) -> "ControlMeasurement":
        return cls((ket(0), ket(1)), ("0", "1"))

    @classmethod
    def plus_minus(cls) -> "ControlMeasurement":
        return cls((PLUS.copy(), MINUS.copy()), ("+", "-"))

    @classmethod
    def from_bloch(cls, theta: float, phi: float) -> "ControlMeasurement":
        """Basis of the +1/-1 eigenvectors of the (theta, phi) Bloch direction."""
        up = np.array(
            [np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)],
            dtype=np.complex128,
        )
        down = np.array(
            [-np.exp(-1j * phi) * np.sin(theta / 2), np.cos(theta / 2)],
            dtype=np.complex128,
        )
        return cls((up, down), ("+", "-"))


def measure_control(
    state: np.ndarray, m: ControlMeasurement
) -> list[tuple[str, float, np.ndarray]]:
    """Projective control measurement on a control (x) target pure state.

    Returns one (outcome label, probability, post-measurement target state)
    triple per basis vector. Post states are unit norm whenever the outcome
    probability is above 1e-12 (below that the unnormalized residual is
    returned).
    """
    psi = np.asarray(state, dtype=np.complex128).reshape(-1)
    d_c = m.dim
    if psi.size % d_c != 0:
        raise ValueError(
            f"state of size {psi.size} is not divisible by control dimension {d_c}"
        )
    blocks = psi.reshape(d_c, -1)
    results = []
    for label, v in zip(m.labels, m.basis):
        amp = np.conj(v) @ blocks
        p = float(np.real(np.vdot(amp, amp)))
        post = amp / np.sqrt(p) if p > 1e-12 else amp
        results.append((label, p, post))
    total = sum(p for _, p, _ in results)
    if abs(total - 1.0) > 1e-10:
        raise ValueError(f"outcome probabilities sum to {total}, expected 1")
    return results


def condition_on_control(
    rho: np.ndarray, m: ControlMeasurement, outcome: str, layout: SpaceLayout
) -> tuple[float, np.ndarray]:
    """Condition a control (x) rest density operator on one control outcome.

    Returns (probability, normalized post-measurement state of the rest).
    """
    rho = as_matrix(rho)
    if layout.labels[0] != "control" and layout.labels[0] != "env":
        raise ValueError(f"first factor must be the measured one, got {layout.labels}")
    v = m.basis[m.labels.index(outcome)]
    d_c = m.dim
    d_rest = layout.dim // d_c
    blocks = rho.reshape(d_c, d_rest, d_c, d_rest)
    reduced = np.einsum("i,iajk,j->ak", np.conj(v), blocks, v)
    p = float(np.real(np.trace(reduced)))
    if p <= 1e-12:
        return p, reduced
    return p, reduced / p


@dataclass(frozen=True)
class DoubleSwitchSpec:
    """Two switches driven by one shared control (or environment) qubit.

    The per-switch control amplitudes are ignored; ``control_amplitudes``
    here drives both. ``switch1.v0``/``switch1.v1`` are the free evolutions
    of target 1 in the two branches (likewise for switch 2). When
    ``a5_satisfied`` is set, the free evolution must not depend on the
    branch, so v0 == v1 is enforced in both switches.
    """

    switch1: SwitchSpec
    switch2: SwitchSpec
    control_amplitudes: tuple[complex, complex] = (INV_SQRT2, INV_SQRT2)
    order_mode: str = "coherent"
    mixture_q: float = 0.5
    a5_satisfied: bool = False
    env_flag: bool = False
    visibility: float = 1.0

    def __post_init__(self) -> None:
        if self.order_mode not in ORDER_MODES:
            raise ValueError(f"order_mode must be one of {ORDER_MODES}, got {self.order_mode!r}")
        a, b = self.control_amplitudes
        if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > 1e-9:
            raise ValueError("control amplitudes must satisfy |alpha|^2 + |beta|^2 = 1")
        if not 0.0 <= self.mixture_q <= 1.0:
            raise ValueError(f"mixture_q must lie in [0, 1], got {self.mixture_q}")
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError(f"visibility must lie in [0, 1], got {self.visibility}")
        if self.a5_satisfied:
            for i, sw in ((1, self.switch1), (2, self.switch2)):
                if np.max(np.abs(sw.v0 - sw.v1)) > 0:
                    raise ValueError(
                        f"a5_satisfied requires v0 == v1 entrywise in switch {i}"
                    )
        if self.env_flag and self.order_mode not in ("definite-AB", "definite-BA"):
            raise ValueError("env_flag requires a definite order_mode")

    @property
    def layout(self) -> SpaceLayout:
        first = "env" if self.env_flag else "control"
        return SpaceLayout(
            (first, "target1", "target2"),
            (2, self.switch1.target_dim, self.switch2.target_dim),
        )

    def branch_vector(self, order: str) -> np.ndarray:
        """Joint target1 (x) target2 state for one definite order."""
        t1 = self.switch1.branch_unitary(order) @ self.switch1.psi_t0
        t2 = self.switch2.branch_unitary(order) @ self.switch2.psi_t0
        return tensor(t1, t2)

    def env_branch_vector(self, env_value: int) -> np.ndarray:
        """Joint target state when the environment selects v0 (0) or v1 (1)
        under this spec's definite order."""
        order = "AB" if self.order_mode == "definite-AB" else "BA"
        vs = []
        for sw in (self.switch1, self.switch2):
            v = sw.v0 if env_value == 0 else sw.v1
            if order == "AB":
                vs.append(sw.u_b @ v @ sw.u_a @ sw.psi_t0)
            else:
                vs.append(sw.u_a @ v @ sw.u_b @ sw.psi_t0)
        return tensor(vs[0], vs[1])


def _damp_control_coherence(state: np.ndarray, visibility: float, d_t: int) -> np.ndarray:
    rho = np.outer(state, state.conj())
    blocks = rho.reshape(2, d_t, 2, d_t)
    blocks[0, :, 1, :] *= visibility
    blocks[1, :, 0, :] *= visibility
    return blocks.reshape(2 * d_t, 2 * d_t)


def double_switch_output(spec: DoubleSwitchSpec) -> np.ndarray:
    """Joint control (x) target1 (x) target2 state of the double switch.

    Returns a state vector in coherent mode (and in definite/env-flag modes),
    a density operator in classical-mixture mode or when visibility < 1.
    """
    alpha, beta = spec.control_amplitudes
    mode = spec.order_mode

    if spec.env_flag:
        out = alpha * tensor(ket(0), spec.env_branch_vector(0)) + beta * tensor(
            ket(1), spec.env_branch_vector(1)
        )
        if spec.visibility < 1.0:
            return _damp_control_coherence(out, spec.visibility, out.size // 2)
        return out

    if mode == "coherent":
        out = alpha * tensor(ket(0), spec.branch_vector("AB")) + beta * tensor(
            ket(1), spec.branch_vector("BA")
        )
        if spec.visibility < 1.0:
            return _damp_control_coherence(out, spec.visibility, out.size // 2)
        return out

    if mode == "classical-mixture":
        q = spec.mixture_q
        rho_ab = projector(tensor(ket(0), spec.branch_vector("AB")))
        rho_ba = projector(tensor(ket(1), spec.branch_vector("BA")))
        return q * rho_ab + (1.0 - q) * rho_ba

    if mode == "definite-AB":
        return tensor(ket(0), spec.branch_vector("AB"))
    return tensor(ket(1), spec.branch_vector("BA"))


def target_entanglement(rho: np.ndarray, dims: tuple[int, int] | None = None) -> float:
    """Negativity (||rho^T1||_1 - 1) / 2 across the target1 : target2 cut.

    Accepts a density operator (validated PSD and unit trace) or a state
    vector. ``dims`` defaults to an equal split.
    """
    arr = np.asarray(rho, dtype=np.complex128)
    if arr.ndim == 1:
        arr = projector(arr)
    arr = as_matrix(arr)
    n = arr.shape[0]
    if dims is None:
        d1 = int(round(np.sqrt(n)))
        if d1 * d1 != n:
            raise ValueError(f"cannot infer an equal factor split for dimension {n}")
        dims = (d1, d1)
    d1, d2 = dims
    if d1 * d2 != n:
        raise ValueError(f"dims {dims} do not match operator dimension {n}")
    if abs(np.trace(arr).real - 1.0) > 1e-8 or abs(np.trace(arr).imag) > 1e-8:
        raise ValueError("input must have unit trace")
    if not is_psd(arr, 1e-8):
        raise ValueError("input must be positive semidefinite")
    t = arr.reshape(d1, d2, d1, d2)
    pt = t.transpose(2, 1, 0, 3).reshape(n, n)
    vals, _ = eig_hermitian(pt)
    trace_norm = float(np.sum(np.abs(vals)))
    return max(0.0, (trace_norm - 1.0) / 2.0)


def conditioned_target_state(
    spec: DoubleSwitchSpec, m: ControlMeasurement, outcome: str
) -> tuple[float, np.ndarray]:
    """Probability of the control outcome and the resulting joint target
    density operator, for any order mode."""
    out = double_switch_output(spec)
    if out.ndim == 1:
        out = projector(out)
    return condition_on_control(out, m, outcome, spec.layout)


def reduced_target_state(spec: DoubleSwitchSpec) -> np.ndarray:
    """Joint target density operator with the control traced out."""
    out = double_switch_output(spec)
    if out.ndim == 1:
        out = projector(out)
    return partial_trace(out, spec.layout, ("target1", "target2"))
