"""Named, config-driven experiment scenarios with deterministic reports.

A scenario builds a double switch (two target lines sharing one control or
environment qubit), conditions on a control outcome, and runs the full
analysis chain: CHSH optimization, negativity, causal-polytope membership
of the conditioned behavior, the temporal-locality audit (when a definite-
order model exists), and a process-matrix view with validity and
separability evidence. Reports are canonical JSON: identical config + seed
gives byte-identical bytes (wall-clock duration is kept out of the report
and sent to stderr by the CLI).
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass

import numpy as np

from .bell import (
    CHSHResult,
    MeasurementSetting,
    TSIRELSON,
    behavior,
    chsh,
    classical_chsh_bound,
    optimize_chsh,
)
from .causal import (
    CausalDecomposition,
    causal_membership,
    lambda_model_from_definite_order,
    temporal_locality_audit,
)
from .linalg import NAMED_UNITARIES, SpaceLayout, as_matrix, ket, projector, tensor
from .process import (
    ProcessMatrix,
    mix,
    quantum_switch_process,
    separability_heuristic,
    validate_process,
)
from .switch import (
    ControlMeasurement,
    DoubleSwitchSpec,
    SwitchSpec,
    conditioned_target_state,
    double_switch_output,
    reduced_target_state,
    target_entanglement,
)

REPORT_SCHEMA = "icolab/run-report/v1"

NAMED_STATES = {
    "0": np.array([1.0, 0.0]),
    "1": np.array([0.0, 1.0]),
    "+": np.array([1.0, 1.0]) / np.sqrt(2.0),
    "-": np.array([1.0, -1.0]) / np.sqrt(2.0),
}

_INV_SQRT2 = 1.0 / np.sqrt(2.0)


class ConfigError(ValueError):
    """Configuration could not be parsed or validated."""


BUILTIN_SCENARIOS: dict[str, dict] = {
    "double-switch-coherent": {
        "scenario": "double-switch-coherent",
        "description": "Coherent-order double switch (H/Z), conditioned on control +",
        "u_a": "H",
        "u_b": "Z",
        "v0": "I",
        "v1": "I",
        "psi_t0": "0",
        "control_amplitudes": [_INV_SQRT2, _INV_SQRT2],
        "order_mode": "coherent",
        "mixture_q": 0.5,
        "a5_satisfied": True,
        "env_flag": False,
        "visibility": 1.0,
        "settings": "optimize",
        "conditioning": {"basis": "plus_minus", "outcome": "+"},
        "audit_mode": "strict",
        "seed": 20260815,
        "restarts": 32,
        "separability_iters": 2000,
        "tolerances": {"causal": 1e-9, "audit": 1e-10},
        "out": None,
    },
    "classical-order-baseline": {
        "scenario": "classical-order-baseline",
        "description": "Classical mixture of the two orders with trivial free evolution",
        "u_a": "H",
        "u_b": "Z",
        "v0": "I",
        "v1": "I",
        "psi_t0": "0",
        "control_amplitudes": [_INV_SQRT2, _INV_SQRT2],
        "order_mode": "classical-mixture",
        "mixture_q": 0.5,
        "a5_satisfied": True,
        "env_flag": False,
        "visibility": 1.0,
        "settings": "optimize",
        "conditioning": None,
        "audit_mode": "strict",
        "seed": 20260815,
        "restarts": 32,
        "separability_iters": 2000,
        "tolerances": {"causal": 1e-9, "audit": 1e-10},
        "out": None,
    },
    "a5-violated-definite-order": {
        "scenario": "a5-violated-definite-order",
        "description": "Definite order with an environment flag selecting the free evolution",
        "u_a": "H",
        "u_b": "Z",
        "v0": "I",
        "v1": "Z",
        "psi_t0": "0",
        "control_amplitudes": [_INV_SQRT2, _INV_SQRT2],
        "order_mode": "definite-AB",
        "mixture_q": 0.5,
        "a5_satisfied": False,
        "env_flag": True,
        "visibility": 1.0,
        "settings": "optimize",
        "conditioning": {"basis": "plus_minus", "outcome": "+"},
        "audit_mode": "strict",
        "seed": 20260815,
        "restarts": 32,
        "separability_iters": 2000,
        "tolerances": {"causal": 1e-9, "audit": 1e-10},
        "out": None,
    },
}

_CONFIG_KEYS = set(BUILTIN_SCENARIOS["double-switch-coherent"])


def _resolve_matrix(value, what: str) -> np.ndarray:
    if isinstance(value, str):
        if value not in NAMED_UNITARIES:
            raise ConfigError(
                f"{what}: unknown unitary name {value!r}; have {sorted(NAMED_UNITARIES)}"
            )
        return NAMED_UNITARIES[value].copy()
    try:
        arr = np.asarray(value, dtype=np.float64)
        if arr.shape != (2, 2, 2):
            raise ValueError
        return arr[..., 0] + 1j * arr[..., 1]
    except ValueError:
        raise ConfigError(
            f"{what}: expected a unitary name or a 2x2 matrix of [re, im] pairs"
        ) from None


def _resolve_state(value, what: str) -> np.ndarray:
    if isinstance(value, str):
        if value not in NAMED_STATES:
            raise ConfigError(f"{what}: unknown state name {value!r}")
        return NAMED_STATES[value].copy()
    try:
        arr = np.asarray(value, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError
        return arr[:, 0] + 1j * arr[:, 1]
    except ValueError:
        raise ConfigError(f"{what}: expected a state name or [re, im] amplitude pairs") from None


def _resolve_amplitude(value) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ConfigError(f"control amplitude must be a number or [re, im], got {value!r}")


def _resolve_settings(value):
    if value == "optimize":
        return "optimize"
    try:
        pair = tuple(MeasurementSetting(tuple(map(tuple, party))) for party in value)
    except (TypeError, ValueError):
        raise ConfigError(
            "settings must be 'optimize' or two lists of [theta, phi] pairs"
        ) from None
    if len(pair) != 2:
        raise ConfigError("settings needs exactly two parties")
    return pair


def _resolve_conditioning(value):
    if value is None:
        return None
    try:
        basis, outcome = value["basis"], value["outcome"]
    except (TypeError, KeyError):
        raise ConfigError("conditioning needs 'basis' and 'outcome'") from None
    if basis == "plus_minus":
        m = ControlMeasurement.plus_minus()
    elif basis == "computational":
        m = ControlMeasurement.computational()
    elif isinstance(basis, (list, tuple)) and len(basis) == 2:
        m = ControlMeasurement.from_bloch(float(basis[0]), float(basis[1]))
    else:
        raise ConfigError(f"unknown conditioning basis {basis!r}")
    if outcome not in m.labels:
        raise ConfigError(f"outcome {outcome!r} not among {m.labels}")
    return m, str(outcome)


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully resolved scenario parameters plus the merged raw config dict
    (the echo), which is reproduced verbatim in every report."""

    name: str
    u_a: np.ndarray
    u_b: np.ndarray
    v0: np.ndarray
    v1: np.ndarray
    psi_t0: np.ndarray
    control_amplitudes: tuple[complex, complex]
    order_mode: str
    mixture_q: float
    a5_satisfied: bool
    env_flag: bool
    visibility: float
    settings: object
    conditioning: tuple[ControlMeasurement, str] | None
    audit_mode: str
    seed: int
    restarts: int
    separability_iters: int
    tol_causal: float
    tol_audit: float
    out: str | None
    echo: dict

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        name = data.get("scenario")
        if name in BUILTIN_SCENARIOS:
            merged = {**BUILTIN_SCENARIOS[name], **data}
        elif name == "custom":
            merged = {**BUILTIN_SCENARIOS["double-switch-coherent"], **data}
            merged["description"] = data.get("description", "custom scenario")
        else:
            raise ConfigError(
                f"unknown scenario {name!r}; choose from {sorted(BUILTIN_SCENARIOS)} or 'custom'"
            )
        unknown = set(merged) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        tols = merged.get("tolerances") or {}
        if not isinstance(tols, dict) or set(tols) - {"causal", "audit"}:
            raise ConfigError("tolerances must be a dict with keys 'causal'/'audit'")
        tol_causal = float(tols.get("causal", 1e-9))
        tol_audit = float(tols.get("audit", 1e-10))
        if tol_causal <= 0 or tol_audit <= 0:
            raise ConfigError("tolerances must be positive")
        try:
            seed = int(merged["seed"])
            restarts = int(merged["restarts"])
            iters = int(merged["separability_iters"])
            visibility = float(merged["visibility"])
            mixture_q = float(merged["mixture_q"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad numeric field: {exc}") from None
        if restarts < 1 or iters < 1:
            raise ConfigError("restarts and separability_iters must be >= 1")
        amps = merged["control_amplitudes"]
        if not isinstance(amps, (list, tuple)) or len(amps) != 2:
            raise ConfigError("control_amplitudes must be a pair")
        try:
            cfg = cls(
                name=merged["scenario"],
                u_a=_resolve_matrix(merged["u_a"], "u_a"),
                u_b=_resolve_matrix(merged["u_b"], "u_b"),
                v0=_resolve_matrix(merged["v0"], "v0"),
                v1=_resolve_matrix(merged["v1"], "v1"),
                psi_t0=_resolve_state(merged["psi_t0"], "psi_t0"),
                control_amplitudes=(
                    _resolve_amplitude(amps[0]),
                    _resolve_amplitude(amps[1]),
                ),
                order_mode=str(merged["order_mode"]),
                mixture_q=mixture_q,
                a5_satisfied=bool(merged["a5_satisfied"]),
                env_flag=bool(merged["env_flag"]),
                visibility=visibility,
                settings=_resolve_settings(merged["settings"]),
                conditioning=_resolve_conditioning(merged["conditioning"]),
                audit_mode=str(merged["audit_mode"]),
                seed=seed,
                restarts=restarts,
                separability_iters=iters,
                tol_causal=tol_causal,
                tol_audit=tol_audit,
                out=merged.get("out"),
                echo=merged,
            )
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        try:
            cfg.build_spec()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return cfg

    def build_spec(self) -> DoubleSwitchSpec:
        """Both switch lines share the configured unitaries and input state."""
        sw = SwitchSpec(
            u_a=self.u_a, u_b=self.u_b, v0=self.v0, v1=self.v1, psi_t0=self.psi_t0
        )
        return DoubleSwitchSpec(
            switch1=sw,
            switch2=sw,
            control_amplitudes=self.control_amplitudes,
            order_mode=self.order_mode,
            mixture_q=self.mixture_q,
            a5_satisfied=self.a5_satisfied,
            env_flag=self.env_flag,
            visibility=self.visibility,
        )


def load_config(path: str) -> ScenarioConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return ScenarioConfig.from_dict(data)


@dataclass(frozen=True)
class RunReport:
    """In-memory run result. ``report`` is the canonical (byte-stable)
    content; the wall-clock duration rides alongside and never enters the
    serialized bytes."""

    report: dict
    duration_s: float

    def to_json_bytes(self) -> bytes:
        return (json.dumps(self.report, sort_keys=True, separators=(",", ":")) + "\n").encode()


def _chsh_section(result: CHSHResult) -> dict:
    c1, c2 = result.settings
    return {
        "value": result.value,
        "correlators": result.correlators.tolist(),
        "settings": {
            "party1": [list(a) for a in c1.angles],
            "party2": [list(a) for a in c2.angles],
        },
        "seed": result.seed,
        "backend": result.backend,
        "classical_bound": classical_chsh_bound(),
        "tsirelson_bound": float(TSIRELSON),
    }


def _causal_section(table, tol: float) -> dict:
    outcome = causal_membership(table, tol)
    if isinstance(outcome, CausalDecomposition):
        recon = float(np.max(np.abs(outcome.reconstruction() - table.probs)))
        return {"verdict": "causal", "q": outcome.q, "reconstruction_error": recon}
    return {"verdict": "not-causal", "violation_margin": outcome.violation_margin}


_AUDIT_PROBES = ("Z", "X")


def _audit_section(cfg: ScenarioConfig, spec: DoubleSwitchSpec) -> dict:
    if spec.order_mode == "coherent":
        return {
            "applicable": False,
            "mode": cfg.audit_mode,
            "reason": (
                "order is coherently indefinite, so no definite-order lambda model"
                " exists; a CHSH value above 2 already rules out any temporally"
                " local account of the conditioned statistics"
            ),
        }
    sw = spec.switch1
    d = sw.target_dim
    if d != 2:
        return {
            "applicable": False,
            "mode": cfg.audit_mode,
            "reason": "audit probes are defined for qubit targets only",
        }
    probes = [NAMED_UNITARIES["I"], NAMED_UNITARIES["H"]]
    order = "BA" if spec.order_mode == "definite-BA" else "AB"
    first_u = sw.u_a if order == "AB" else sw.u_b
    if spec.env_flag:
        alpha, beta = spec.control_amplitudes
        layout = SpaceLayout(("env", "target"), (2, d))
        initial = alpha * tensor(ket(0), sw.psi_t0) + beta * tensor(ket(1), sw.psi_t0)
        controlled = tensor(projector(ket(0)), sw.v0 @ first_u) + tensor(
            projector(ket(1)), sw.v1 @ first_u
        )
        evolutions = [(1.0, controlled)]
        orders = ["A<B" if order == "AB" else "B<A"]
        probes_full = probes
        model = lambda_model_from_definite_order(
            initial, layout, "target", probes_full, probes_full, evolutions, orders=orders
        )
    elif spec.order_mode == "classical-mixture":
        layout = SpaceLayout(("target",), (d,))
        evolutions = [
            (spec.mixture_q, sw.v0 @ sw.u_a),
            (1.0 - spec.mixture_q, sw.v1 @ sw.u_b),
        ]
        model = lambda_model_from_definite_order(
            sw.psi_t0, layout, "target", probes, probes, evolutions, orders=["A<B", "B<A"]
        )
    else:
        layout = SpaceLayout(("target",), (d,))
        v = sw.v0 if order == "AB" else sw.v1
        evolutions = [(1.0, v @ first_u)]
        model = lambda_model_from_definite_order(
            sw.psi_t0,
            layout,
            "target",
            probes,
            probes,
            evolutions,
            orders=["A<B" if order == "AB" else "B<A"],
        )
    audit = temporal_locality_audit(model, cfg.tol_audit, cfg.audit_mode)
    return {
        "applicable": True,
        "probe_settings": list(_AUDIT_PROBES),
        "lambda": "full pre-measurement state description per branch",
        **audit.to_json_dict(),
    }


def _scenario_process(cfg: ScenarioConfig, spec: DoubleSwitchSpec) -> tuple[ProcessMatrix, str]:
    sw = spec.switch1
    d = sw.target_dim
    common = {"target_dim": d, "psi_t0": sw.psi_t0}
    if spec.order_mode == "coherent":
        w = quantum_switch_process(
            spec.control_amplitudes, v0=sw.v0, v1=sw.v1, **common
        )
        return w, "coherent switch process (one target line)"
    if spec.order_mode == "classical-mixture":
        w_ab = quantum_switch_process((1.0, 0.0), v0=sw.v0, v1=sw.v1, **common)
        w_ba = quantum_switch_process((0.0, 1.0), v0=sw.v0, v1=sw.v1, **common)
        return (
            mix(w_ab, w_ba, spec.mixture_q),
            "classical mixture of the two ordered processes",
        )
    order = "BA" if spec.order_mode == "definite-BA" else "AB"
    amps = (1.0, 0.0) if order == "AB" else (0.0, 1.0)
    if spec.env_flag:
        w0 = quantum_switch_process(amps, v0=sw.v0, v1=sw.v0, **common)
        w1 = quantum_switch_process(amps, v0=sw.v1, v1=sw.v1, **common)
        alpha, _ = spec.control_amplitudes
        return (
            mix(w0, w1, abs(alpha) ** 2),
            "environment-weighted mixture of same-order processes",
        )
    w = quantum_switch_process(amps, v0=sw.v0, v1=sw.v1, **common)
    return w, f"definite-order process ({order})"


def run_scenario(config: ScenarioConfig) -> RunReport:
    """Execute one scenario end to end; deterministic given config + seed."""
    t0 = time.perf_counter()
    spec = config.build_spec()
    out = double_switch_output(spec)
    if out.ndim == 1:
        norm = float(np.linalg.norm(out))
    else:
        norm = float(np.real(np.trace(out)))

    if config.conditioning is None:
        rho = reduced_target_state(spec)
        conditioning_info = None
        p_cond = 1.0
    else:
        m, outcome = config.conditioning
        p_cond, rho = conditioned_target_state(spec, m, outcome)
        conditioning_info = {
            "measured": spec.layout.labels[0],
            "outcome": outcome,
            "probability": p_cond,
        }
    d1, d2 = spec.switch1.target_dim, spec.switch2.target_dim
    negativity = target_entanglement(rho, (d1, d2))

    if config.settings == "optimize":
        result = optimize_chsh(rho, restarts=config.restarts, seed=config.seed)
    else:
        c1, c2 = config.settings
        result = chsh(behavior(rho, c1, c2), settings=(c1, c2))
    table = behavior(rho, *result.settings)
    causal_sec = _causal_section(table, config.tol_causal)
    audit_sec = _audit_section(config, spec)
    w, construction = _scenario_process(config, spec)
    validity = validate_process(w)
    sep = separability_heuristic(w, iters=config.separability_iters)

    notes = [
        (
            "CHSH exceeds the classical bound 2: conditioned target statistics"
            " admit no temporally local model"
            if result.value > classical_chsh_bound() + 1e-9
            else "CHSH within the classical bound"
        ),
        (
            "process-level order is "
            + ("indefinite (no separable decomposition found)" if not sep.separable else "definite or mixed (separable decomposition certified)")
        ),
        (
            "within-switch events admit a definite-order lambda model; see"
            " temporal_locality section"
            if audit_sec.get("applicable")
            else "no definite-order lambda model applies to this scenario"
        ),
    ]

    report = {
        "schema": REPORT_SCHEMA,
        "scenario": config.echo,
        "assumptions": {
            "a5_satisfied": config.a5_satisfied,
            "order_mode": config.order_mode,
            "env_flag": config.env_flag,
            "classical_order_variable": config.order_mode != "coherent",
        },
        "states": {
            "output_norm": norm,
            "conditioning": conditioning_info,
            "negativity": negativity,
        },
        "chsh": _chsh_section(result),
        "causal": causal_sec,
        "temporal_locality": audit_sec,
        "process": {
            "construction": construction,
            "validity": validity.to_json_dict(),
            "separability": sep.to_json_dict(),
        },
        "notes": notes,
        "seed": config.seed,
    }
    return RunReport(report=report, duration_s=time.perf_counter() - t0)


def sweep(config: ScenarioConfig, parameter: str, grid: list[float]) -> str:
    """One CSV row per grid point: param,S_opt,negativity,causal_verdict."""
    if parameter not in ("eta", "q"):
        raise ConfigError(f"sweep parameter must be 'eta' or 'q', got {parameter!r}")
    if not grid:
        raise ConfigError("sweep grid must not be empty")
    if parameter == "q" and config.order_mode != "classical-mixture":
        raise ConfigError("parameter 'q' applies to classical-mixture scenarios only")
    lines = [
        f"# scenario={config.name} seed={config.seed} parameter={parameter}",
        "param,S_opt,negativity,causal_verdict",
    ]
    for value in grid:
        merged = dict(config.echo)
        if parameter == "eta":
            merged["visibility"] = value
        else:
            merged["mixture_q"] = value
        point = ScenarioConfig.from_dict(merged)
        run = run_scenario(point)
        s_opt = run.report["chsh"]["value"]
        neg = run.report["states"]["negativity"]
        verdict = run.report["causal"]["verdict"]
        lines.append(f"{value!r},{s_opt!r},{neg!r},{verdict}")
    return "\n".join(lines) + "\n"


def list_scenarios() -> list[tuple[str, str]]:
    """Built-in scenario names and one-line descriptions, stable order."""
    return [(name, cfg["description"]) for name, cfg in BUILTIN_SCENARIOS.items()]
