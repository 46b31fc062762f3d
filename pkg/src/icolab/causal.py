"""Correlation-level causal analysis: signaling detection, LP membership in
the definite-order (causal) polytope, and the temporal-locality audit.

The audit checks the factorization conditions

    p(i | a, b, lambda_a, lambda_b, j) = p(i | a, lambda_a)
    p(j | a, b, lambda_a, lambda_b, i) = p(j | b, lambda_b)

on a finite, fully declared model. The lambda values are conditioning
contexts (descriptions of the world prior to each measurement), not jointly
sampled random variables: a model declares, for every cell
(a, b, lambda_a, lambda_b), the joint outcome law it assigns to that
context, plus the local laws p(i|a,lambda_a) and p(j|b,lambda_b) it claims
to factor through. A cell whose joint sums to 0 is declared impossible
(e.g. lambda_b records a different earlier setting) and is skipped, as are
conditionals below the 1e-12 probability floor.
"""
from __future__ import annotations

import io
from dataclasses import dataclass
from math import prod

import numpy as np
from scipy.optimize import linprog

from .bell import BehaviorTable, MeasurementSetting, behavior, optimize_chsh
from .linalg import SpaceLayout, as_matrix, projector, tensor
from .switch import (
    ControlMeasurement,
    DoubleSwitchSpec,
    conditioned_target_state,
    reduced_target_state,
)

LAMBDA_SCHEMA = "icolab/lambda-model/v1"

CELL_FLOOR = 1e-12

GAMMA_VALUES = ("A<B", "B<A", "A||B")

MAX_ALPHABET = 4


# --- signaling ------------------------------------------------------------

@dataclass(frozen=True)
class SignalingDirections:
    a_to_b: bool
    b_to_a: bool


def signaling_directions(t: BehaviorTable, tol: float = 1e-9) -> SignalingDirections:
    """Which way the table signals: a_to_b iff B's marginal depends on A's
    input by more than tol (and symmetrically)."""
    pb = t.second_marginals()  # [i1, i2, o2]
    pa = t.first_marginals()  # [i1, i2, o1]
    a_to_b = float(np.max(pb.max(axis=0) - pb.min(axis=0))) > tol
    b_to_a = float(np.max(pa.max(axis=1) - pa.min(axis=1))) > tol
    return SignalingDirections(a_to_b=a_to_b, b_to_a=b_to_a)


# --- causal polytope membership -------------------------------------------

@dataclass(frozen=True)
class CausalDecomposition:
    """Convex split of a behavior into one-way-signaling components:
    table = q * component_ab + (1-q) * component_ba."""

    q: float
    component_ab: BehaviorTable
    component_ba: BehaviorTable

    def __post_init__(self) -> None:
        if not 0.0 <= self.q <= 1.0:
            raise ValueError(f"weight must be in [0, 1], got {self.q}")

    def reconstruction(self) -> np.ndarray:
        return self.q * self.component_ab.probs + (1.0 - self.q) * self.component_ba.probs


@dataclass(frozen=True)
class NotCausal:
    """Evidence of non-membership: the minimal elementwise slack by which
    any ordered decomposition misses the table."""

    violation_margin: float


def _one_way_rows(shape: tuple[int, int, int, int], block: int, direction: str) -> list[np.ndarray]:
    """Equality rows forcing one subnormalized component to signal one way
    at most: the early party's marginal and the cell weight must not depend
    on the late party's input."""
    nx, ny, no1, no2 = shape
    n = prod(shape)
    rows = []

    def coef() -> np.ndarray:
        return np.zeros(2 * n + 1)

    def idx(x: int, y: int, o1: int, o2: int) -> int:
        return block * n + ((x * ny + y) * no1 + o1) * no2 + o2

    if direction == "AB":  # no signaling B -> A: A-marginal independent of y
        for x in range(nx):
            for y in range(1, ny):
                for o1 in range(no1):
                    row = coef()
                    for o2 in range(no2):
                        row[idx(x, y, o1, o2)] += 1.0
                        row[idx(x, 0, o1, o2)] -= 1.0
                    rows.append(row)
    elif direction == "BA":  # no signaling A -> B: B-marginal independent of x
        for y in range(ny):
            for x in range(1, nx):
                for o2 in range(no2):
                    row = coef()
                    for o1 in range(no1):
                        row[idx(x, y, o1, o2)] += 1.0
                        row[idx(0, y, o1, o2)] -= 1.0
                    rows.append(row)
    else:
        raise ValueError(direction)
    # equal total weight in every cell (the component's subnormalization)
    for x in range(nx):
        for y in range(ny):
            if x == 0 and y == 0:
                continue
            row = coef()
            for o1 in range(no1):
                for o2 in range(no2):
                    row[idx(x, y, o1, o2)] += 1.0
                    row[idx(0, 0, o1, o2)] -= 1.0
            rows.append(row)
    return rows


def _component_table(r: np.ndarray, shape: tuple[int, int, int, int]) -> BehaviorTable:
    """Normalize a subnormalized component cell by cell into a behavior."""
    arr = np.clip(r.reshape(shape), 0.0, None)
    sums = arr.sum(axis=(2, 3), keepdims=True)
    nx, ny, no1, no2 = shape
    uniform = np.full((no1, no2), 1.0 / (no1 * no2))
    out = np.where(sums > CELL_FLOOR, arr / np.where(sums > CELL_FLOOR, sums, 1.0), uniform)
    return BehaviorTable(out)


def causal_membership(t: BehaviorTable, tol: float = 1e-9) -> CausalDecomposition | NotCausal:
    """LP test of membership in the causal polytope (mixtures of one-way
    signaling behaviors).

    Solves min epsilon over subnormalized components r1 (A-first) and r2
    (B-first) with r1 + r2 matching the table within epsilon elementwise;
    feasibility at epsilon <= tol yields a decomposition, which is
    re-validated arithmetically before being returned.
    """
    shape = t.shape
    if max(shape) > MAX_ALPHABET:
        raise ValueError(
            f"alphabets up to {MAX_ALPHABET} supported, got table shape {shape}"
        )
    p = t.probs.reshape(-1)
    n = p.size
    rows = _one_way_rows(shape, 0, "AB") + _one_way_rows(shape, 1, "BA")
    a_eq = np.array(rows)
    b_eq = np.zeros(len(rows))
    # |r1 + r2 - p| <= eps, elementwise
    ident = np.hstack([np.eye(n), np.eye(n)])
    a_ub = np.vstack(
        [
            np.hstack([ident, -np.ones((n, 1))]),
            np.hstack([-ident, -np.ones((n, 1))]),
        ]
    )
    b_ub = np.concatenate([p, -p])
    cost = np.zeros(2 * n + 1)
    cost[-1] = 1.0
    res = linprog(
        cost,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=[(0, None)] * (2 * n) + [(0, None)],
        method="highs",
    )
    if not res.success:
        raise RuntimeError(f"LP solver failed: {res.message}")
    margin = float(res.x[-1])
    if margin > tol:
        return NotCausal(violation_margin=margin)
    r1 = res.x[:n].reshape(shape)
    r2 = res.x[n : 2 * n].reshape(shape)
    q = float(np.clip(r1.sum() / (shape[0] * shape[1]), 0.0, 1.0))
    comp_ab = _component_table(res.x[:n], shape)
    comp_ba = _component_table(res.x[n : 2 * n], shape)
    decomp = CausalDecomposition(q=q, component_ab=comp_ab, component_ba=comp_ba)
    check = 10.0 * max(tol, 1e-9)
    if np.max(np.abs(decomp.reconstruction() - t.probs)) > check:
        raise RuntimeError("solver returned a decomposition that fails re-validation")
    if q > check and signaling_directions(comp_ab, check).b_to_a:
        raise RuntimeError("A-first component signals backwards")
    if (1.0 - q) > check and signaling_directions(comp_ba, check).a_to_b:
        raise RuntimeError("B-first component signals backwards")
    return decomp


# --- lambda models and the temporal-locality audit -------------------------

@dataclass(frozen=True)
class LambdaModel:
    """Finite declared model of two timed measurements.

    Arrays:
      prior[la, lb]                weights of the lambda contexts (sum 1)
      joint[a, b, la, lb, i, j]    declared outcome law per context;
                                   an all-zero cell marks an impossible
                                   setting/context combination
      marginal_i[a, la, i]         declared local law of the first outcome
      marginal_j[b, lb, j]         declared local law of the second outcome
      gamma[la][lb]                optional classical order tag per context
    """

    lambda_a: tuple[str, ...]
    lambda_b: tuple[str, ...]
    prior: np.ndarray
    joint: np.ndarray
    marginal_i: np.ndarray
    marginal_j: np.ndarray
    gamma: tuple[tuple[str, ...], ...] | None = None

    def __post_init__(self) -> None:
        prior = np.asarray(self.prior, dtype=np.float64)
        joint = np.asarray(self.joint, dtype=np.float64)
        mi = np.asarray(self.marginal_i, dtype=np.float64)
        mj = np.asarray(self.marginal_j, dtype=np.float64)
        n_la, n_lb = len(self.lambda_a), len(self.lambda_b)
        if prior.shape != (n_la, n_lb):
            raise ValueError(f"prior shape {prior.shape} != {(n_la, n_lb)}")
        if joint.ndim != 6 or joint.shape[2:4] != (n_la, n_lb):
            raise ValueError(f"joint must be [a,b,la,lb,i,j], got shape {joint.shape}")
        n_a, n_b, _, _, n_i, n_j = joint.shape
        if mi.shape != (n_a, n_la, n_i) or mj.shape != (n_b, n_lb, n_j):
            raise ValueError("declared marginals do not match the joint's shape")
        if prior.min() < -1e-12 or abs(prior.sum() - 1.0) > 1e-10:
            raise ValueError("prior weights must be nonnegative and sum to 1")
        if joint.min() < -1e-12:
            raise ValueError("joint entries must be nonnegative")
        sums = joint.sum(axis=(4, 5))
        good = (np.abs(sums - 1.0) <= 1e-10) | (np.abs(sums) <= 1e-10)
        if not good.all():
            raise ValueError("each cell's joint must sum to 1 (or 0 if impossible)")
        for name, m in (("marginal_i", mi), ("marginal_j", mj)):
            if m.min() < -1e-12 or np.max(np.abs(m.sum(axis=-1) - 1.0)) > 1e-10:
                raise ValueError(f"{name} rows must be normalized distributions")
        if self.gamma is not None:
            g = tuple(tuple(row) for row in self.gamma)
            if len(g) != n_la or any(len(row) != n_lb for row in g):
                raise ValueError("gamma must be declared per (lambda_a, lambda_b) pair")
            bad = {v for row in g for v in row} - set(GAMMA_VALUES)
            if bad:
                raise ValueError(f"gamma values must be among {GAMMA_VALUES}, got {bad}")
            object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "prior", prior)
        object.__setattr__(self, "joint", joint)
        object.__setattr__(self, "marginal_i", mi)
        object.__setattr__(self, "marginal_j", mj)

    @property
    def n_settings(self) -> tuple[int, int]:
        return self.joint.shape[0], self.joint.shape[1]

    @classmethod
    def factorized(
        cls,
        marginal_i: np.ndarray,
        marginal_j: np.ndarray,
        prior: np.ndarray,
        lambda_a: tuple[str, ...] | None = None,
        lambda_b: tuple[str, ...] | None = None,
        gamma: tuple[tuple[str, ...], ...] | None = None,
    ) -> "LambdaModel":
        """Model whose every cell is the product of the declared local laws."""
        mi = np.asarray(marginal_i, dtype=np.float64)
        mj = np.asarray(marginal_j, dtype=np.float64)
        joint = np.einsum("axi,byj->abxyij", mi, mj)
        la = lambda_a or tuple(f"la{k}" for k in range(mi.shape[1]))
        lb = lambda_b or tuple(f"lb{k}" for k in range(mj.shape[1]))
        return cls(la, lb, prior, joint, mi, mj, gamma)

    def to_json_dict(self) -> dict:
        out = {
            "schema": LAMBDA_SCHEMA,
            "lambda_a": list(self.lambda_a),
            "lambda_b": list(self.lambda_b),
            "prior": self.prior.tolist(),
            "joint": self.joint.tolist(),
            "marginal_i": self.marginal_i.tolist(),
            "marginal_j": self.marginal_j.tolist(),
            "gamma": [list(r) for r in self.gamma] if self.gamma else None,
        }
        return out

    @classmethod
    def from_json_dict(cls, data: dict) -> "LambdaModel":
        if data.get("schema") != LAMBDA_SCHEMA:
            raise ValueError(f"unsupported lambda-model schema: {data.get('schema')!r}")
        gamma = data.get("gamma")
        return cls(
            tuple(data["lambda_a"]),
            tuple(data["lambda_b"]),
            np.asarray(data["prior"], dtype=np.float64),
            np.asarray(data["joint"], dtype=np.float64),
            np.asarray(data["marginal_i"], dtype=np.float64),
            np.asarray(data["marginal_j"], dtype=np.float64),
            tuple(tuple(r) for r in gamma) if gamma else None,
        )


@dataclass(frozen=True)
class AuditReport:
    """Result of the temporal-locality audit."""

    passed: bool
    max_deviation: float
    worst_case: tuple | None
    product_residual: float
    mode: str
    cells_checked: int
    cells_skipped: int
    cell_floor: float = CELL_FLOOR

    def to_json_dict(self) -> dict:
        return {
            "passed": self.passed,
            "max_deviation": self.max_deviation,
            "worst_case": list(self.worst_case) if self.worst_case else None,
            "product_residual": self.product_residual,
            "mode": self.mode,
            "cells_checked": self.cells_checked,
            "cells_skipped": self.cells_skipped,
            "cell_floor": self.cell_floor,
        }


def _audit_rows(m: LambdaModel):
    """Yield (a, b, la, lb, equation, conditioned_value, deviation, argmax)
    for every checkable conditional in the model."""
    n_a, n_b, n_la, n_lb, n_i, n_j = m.joint.shape
    for a in range(n_a):
        for b in range(n_b):
            for la in range(n_la):
                for lb in range(n_lb):
                    if m.prior[la, lb] <= CELL_FLOOR:
                        continue
                    cell = m.joint[a, b, la, lb]
                    if cell.sum() <= CELL_FLOOR:
                        continue
                    for j in range(n_j):
                        pj = cell[:, j].sum()
                        if pj <= CELL_FLOOR:
                            continue
                        diff = np.abs(cell[:, j] / pj - m.marginal_i[a, la])
                        k = int(np.argmax(diff))
                        yield a, b, la, lb, "i|a,lambda_a", j, float(diff[k]), k
                    for i in range(n_i):
                        pi = cell[i, :].sum()
                        if pi <= CELL_FLOOR:
                            continue
                        diff = np.abs(cell[i, :] / pi - m.marginal_j[b, lb])
                        k = int(np.argmax(diff))
                        yield a, b, la, lb, "j|b,lambda_b", i, float(diff[k]), k


def temporal_locality_audit(
    m: LambdaModel, tol: float = 1e-10, mode: str = "strict"
) -> AuditReport:
    """Check the two screening equalities on every admissible cell, plus the
    combined product form p(i,j|...) = p(i|a,la) * p(j|b,lb).

    ``mode`` records which reading of lambda the caller supplied ("strict"
    for the state immediately prior to each measurement, "relaxed" for an
    earlier-time description); the arithmetic is identical, reports must
    name the mode.
    """
    if mode not in ("strict", "relaxed"):
        raise ValueError(f"mode must be 'strict' or 'relaxed', got {mode!r}")
    n_a, n_b, n_la, n_lb, _, _ = m.joint.shape
    max_dev = 0.0
    worst: tuple | None = None
    checked = 0
    for a, b, la, lb, eq, cond, dev, arg in _audit_rows(m):
        checked += 1
        if dev > max_dev:
            max_dev = dev
            if eq == "i|a,lambda_a":
                worst = (a, b, m.lambda_a[la], m.lambda_b[lb], arg, cond)
            else:
                worst = (a, b, m.lambda_a[la], m.lambda_b[lb], cond, arg)
    product_residual = 0.0
    skipped = 0
    for a in range(n_a):
        for b in range(n_b):
            for la in range(n_la):
                for lb in range(n_lb):
                    if m.prior[la, lb] <= CELL_FLOOR or m.joint[a, b, la, lb].sum() <= CELL_FLOOR:
                        skipped += 1
                        continue
                    prod_form = np.outer(m.marginal_i[a, la], m.marginal_j[b, lb])
                    product_residual = max(
                        product_residual,
                        float(np.max(np.abs(m.joint[a, b, la, lb] - prod_form))),
                    )
    return AuditReport(
        passed=max_dev <= tol,
        max_deviation=max_dev,
        worst_case=worst,
        product_residual=product_residual,
        mode=mode,
        cells_checked=checked,
        cells_skipped=skipped,
    )


def audit_deviations_csv(m: LambdaModel) -> str:
    """All per-conditional audit deviations as CSV."""
    out = io.StringIO()
    out.write("a,b,lambda_a,lambda_b,equation,conditioned_value,deviation\n")
    for a, b, la, lb, eq, cond, dev, _ in _audit_rows(m):
        out.write(
            f"{a},{b},{m.lambda_a[la]},{m.lambda_b[lb]},{eq},{cond},{dev:.12g}\n"
        )
    return out.getvalue()


# --- model generation from definite-order dynamics -------------------------

def _factor_projector(layout: SpaceLayout, label: str, v: np.ndarray) -> np.ndarray:
    """Projector |v><v| on one factor, identity elsewhere."""
    parts = []
    for lab, d in zip(layout.labels, layout.dims):
        parts.append(projector(v) if lab == label else np.eye(d))
    return tensor(*parts)


def lambda_model_from_definite_order(
    initial_state: np.ndarray,
    layout: SpaceLayout,
    measured: str,
    probes_a: list[np.ndarray],
    probes_b: list[np.ndarray],
    evolutions: list[tuple[float, np.ndarray]] | None = None,
    *,
    orders: list[str] | None = None,
    atol: float = 1e-12,
) -> LambdaModel:
    """Build the lambda model of a definite-order two-measurement circuit
    with lambda set to the full pre-measurement state description.

    The circuit: the world starts in ``initial_state``; the first
    measurement probes the ``measured`` factor in basis probes_a[a]
    (columns) giving outcome i; the world then evolves by one unitary from
    ``evolutions`` (classical weights; use a single controlled unitary for
    a coherent environment); the second measurement probes the same factor
    in basis probes_b[b] giving j.

    lambda_a enumerates the possible worlds before the first measurement
    (one per evolution branch, since that configuration already exists);
    lambda_b enumerates full post-collapse evolved states, indexed by
    (branch, a, i) — it therefore contains the first party's setting and
    outcome, which is exactly what screens them off from j. Declared cell
    joints are the products of the declared local laws; cells whose
    lambda_b context contradicts the actual setting or branch are marked
    impossible. Before returning, the model's forward statistics are
    checked against a direct state-vector simulation and a mismatch raises.

    ``orders`` optionally tags each evolution branch with its classical
    order (gamma); default tags every branch "A<B".
    """
    psi = np.asarray(initial_state, dtype=np.complex128).reshape(-1)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-9:
        raise ValueError("initial_state must be a unit vector")
    if psi.size != layout.dim:
        raise ValueError(f"state size {psi.size} does not match layout dim {layout.dim}")
    d_m = layout.dim_of(measured)
    if evolutions is None:
        evolutions = [(1.0, np.eye(layout.dim))]
    weights = np.array([w for w, _ in evolutions], dtype=np.float64)
    if weights.min() < 0 or abs(weights.sum() - 1.0) > 1e-10:
        raise ValueError("evolution weights must be a distribution")
    bases_a = [as_matrix(p) for p in probes_a]
    bases_b = [as_matrix(p) for p in probes_b]
    for basis in bases_a + bases_b:
        if basis.shape != (d_m, d_m):
            raise ValueError("each probe basis must be square on the measured factor")
        if np.max(np.abs(np.conj(basis).T @ basis - np.eye(d_m))) > 1e-9:
            raise ValueError("probe basis columns must be orthonormal")
    n_a, n_b, n_e = len(bases_a), len(bases_b), len(evolutions)
    n_i = n_j = d_m

    proj_a = [
        [_factor_projector(layout, measured, bases_a[a][:, i]) for i in range(d_m)]
        for a in range(n_a)
    ]
    proj_b = [
        [_factor_projector(layout, measured, bases_b[b][:, j]) for j in range(d_m)]
        for b in range(n_b)
    ]

    # first-measurement law and collapsed, evolved context states
    marginal_i = np.zeros((n_a, n_e, n_i))
    post_states: dict[tuple[int, int, int], np.ndarray | None] = {}
    for a in range(n_a):
        for i in range(n_i):
            branch = proj_a[a][i] @ psi
            p_i = float(np.real(np.vdot(branch, branch)))
            for e, (_, u) in enumerate(evolutions):
                marginal_i[a, e, i] = p_i
                if p_i <= atol:
                    post_states[(e, a, i)] = None
                else:
                    post_states[(e, a, i)] = as_matrix(u) @ (branch / np.sqrt(p_i))

    lambda_a = tuple(f"branch{e}:pre-measurement state" for e in range(n_e))
    lb_keys = [
        (e, a, i) for e in range(n_e) for a in range(n_a) for i in range(n_i)
    ]
    lambda_b = tuple(
        f"branch{e}:post a={a},i={i} evolved state" for e, a, i in lb_keys
    )
    n_lb = len(lb_keys)

    marginal_j = np.zeros((n_b, n_lb, n_j))
    for k, (e, a, i) in enumerate(lb_keys):
        phi = post_states[(e, a, i)]
        for b in range(n_b):
            if phi is None:
                marginal_j[b, k] = 1.0 / n_j  # unreachable context, any law works
                continue
            for j in range(n_j):
                amp = proj_b[b][j] @ phi
                marginal_j[b, k, j] = float(np.real(np.vdot(amp, amp)))

    prior = np.zeros((n_e, n_lb))
    for k, (e, a, i) in enumerate(lb_keys):
        prior[e, k] = weights[e] * marginal_i[a, e, i] / n_a
    prior /= prior.sum()

    joint = np.zeros((n_a, n_b, n_e, n_lb, n_i, n_j))
    for a in range(n_a):
        for k, (e_k, a_k, i_k) in enumerate(lb_keys):
            if a_k != a or post_states[(e_k, a_k, i_k)] is None:
                continue  # impossible cell: context contradicts the setting
            for b in range(n_b):
                joint[a, b, e_k, k] = np.outer(marginal_i[a, e_k], marginal_j[b, k])

    # forward consistency: the model must reproduce the circuit exactly
    for a in range(n_a):
        for b in range(n_b):
            direct = np.zeros((n_i, n_j))
            for e, (w, u) in enumerate(evolutions):
                for i in range(n_i):
                    mid = as_matrix(u) @ (proj_a[a][i] @ psi)
                    for j in range(n_j):
                        amp = proj_b[b][j] @ mid
                        direct[i, j] += w * float(np.real(np.vdot(amp, amp)))
            forward = np.zeros((n_i, n_j))
            for k, (e, a_k, i_k) in enumerate(lb_keys):
                if a_k != a:
                    continue
                forward[i_k] += prior[e, k] * n_a * marginal_j[b, k]
            if np.max(np.abs(forward - direct)) > max(atol, 1e-12):
                raise RuntimeError(
                    "generated model fails forward consistency against the circuit"
                )

    if orders is None:
        orders = ["A<B"] * n_e
    if len(orders) != n_e:
        raise ValueError("need one order tag per evolution branch")
    gamma = tuple(tuple(orders[e] for _ in range(n_lb)) for e in range(n_e))
    return LambdaModel(lambda_a, lambda_b, prior, joint, marginal_i, marginal_j, gamma)


# --- glue from the switch simulator ----------------------------------------

def behavior_from_switch_scenario(
    spec: DoubleSwitchSpec,
    settings: tuple[MeasurementSetting, MeasurementSetting] | str,
    conditioning: tuple[ControlMeasurement, str] | None = None,
) -> BehaviorTable:
    """Behavior table of the two target qubits of a double switch, after
    optionally conditioning on a control/environment outcome.

    ``settings`` is a pair of measurement settings or the string
    "optimize", which runs the CHSH seesaw on the conditioned state and
    uses the settings it finds.
    """
    if conditioning is None:
        rho = reduced_target_state(spec)
    else:
        m, outcome = conditioning
        _, rho = conditioned_target_state(spec, m, outcome)
    if isinstance(settings, str):
        if settings != "optimize":
            raise ValueError(f"settings must be a pair or 'optimize', got {settings!r}")
        result = optimize_chsh(rho)
        settings = result.settings
    c1, c2 = settings
    return behavior(rho, c1, c2)
