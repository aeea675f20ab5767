"""Scenario configuration: YAML parsing, defaults and schema validation."""
from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from ..diagnostics import Diagnostic
from ..spectral.kernels import KINDS as PHENOMENOLOGICAL_KINDS
from ..spectral.models import MODEL_KINDS

SCENARIOS = {
    "two-qubit-rates": "dephasing rates gamma-, gamma+, gamma0 of two sigma_z-coupled qubits",
    "ising-rates": "two-qubit rates for the Glauber Ising bath (closed forms and spectral function)",
    "bosonic-rates": "two-qubit rates for the tight-binding oscillator bath",
    "scaling": "n-qubit coherence decay versus the n_f*gamma and n_e^2*gamma predictions",
    "positivity-audit": "Toeplitz positivity and Fourier-bound audit of a homogeneous kernel",
    "propagate": "propagate an n-qubit state and export coherence trajectories",
}

KERNEL_DEFAULTS = {
    "exponential": {"a": 1.0, "strength": 1.0, "lamb_strength": 0.0, "spacing": 1.0},
    "gaussian": {"a": 1.0, "strength": 1.0, "lamb_strength": 0.0, "spacing": 1.0},
    "step": {"a": None, "strength": 1.0, "lamb_strength": 0.0, "spacing": 1.0},
    "ising": {"J": 1.0, "beta": 1.0, "alpha": 1.0, "spacing": 1.0, "coupling": 1.0},
    "bosonic-chain": {"omega0": 0.0, "g": 1.0, "beta": 1.0, "N": 4096, "spacing": 1.0,
                      "dispersion": "cosine", "occupation": "boltzmann", "mode": "BdagB",
                      "coupling": 1.0},
    "tabulated": {"path": None, "spacing": 1.0},
}

SYSTEM_DEFAULTS = {"n_qubits": 2, "splittings": 0.0, "positions": None, "couplings": "z",
                   "coupling_strength": 1.0}

RUN_DEFAULTS = {
    "times": {"start": 0.0, "stop": 10.0, "num": 201},
    "distances": [1.0],
    "simulate": True,
    "coherences": [["0011", "1100"], ["0000", "1111"]],
    "a_values": None,
    "regime": None,
    "sizes": [3],
    "grid_size": 4096,
    "generator": "redfield",
    "initial": "plus",
    "pairs": None,
    "outputs": ["csv", "json"],
    "tolerances": {"psd_tol": None, "eps_tol": None},
    "seed": 0,
}


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {e}" for e in self.errors))


@dataclass
class ScenarioConfig:
    scenario: str
    system: dict
    kernel: dict
    run: dict
    source: str = ""
    warnings: list[Diagnostic] = field(default_factory=list)

    def canonical(self) -> dict:
        return {"scenario": self.scenario, "system": self.system, "kernel": self.kernel, "run": self.run}

    @property
    def digest(self) -> str:
        text = json.dumps(self.canonical(), sort_keys=True, default=str)
        return hashlib.sha256(text.encode()).hexdigest()[:12]


def _merge(defaults: dict, given: dict) -> dict:
    out = copy.deepcopy(defaults)
    for k, v in given.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


class _Checker:
    def __init__(self):
        self.errors: list[str] = []

    def number(self, block: dict, key: str, prefix: str, *, positive=False, nonneg=False,
               integer=False, allow_none=False):
        v = block.get(key)
        name = f"{prefix}.{key}"
        if v is None:
            if not allow_none:
                self.errors.append(f"{name}: required")
            return
        if not _is_number(v):
            self.errors.append(f"{name}: expected a number, got {v!r}")
            return
        if not math.isfinite(v):
            self.errors.append(f"{name}: must be finite, got {v}")
        elif integer and int(v) != v:
            self.errors.append(f"{name}: must be an integer, got {v}")
        elif positive and v <= 0:
            self.errors.append(f"{name}: must be positive, got {v}")
        elif nonneg and v < 0:
            self.errors.append(f"{name}: must be non-negative, got {v}")

    def unknown(self, block: dict, allowed, prefix: str):
        for k in block:
            if k not in allowed:
                self.errors.append(f"{prefix}.{k}: unknown field")


def _check_kernel(kernel: dict, ck: _Checker, base: Path | None):
    kind = kernel.get("kind")
    if kind not in MODEL_KINDS:
        ck.errors.append(f"kernel.kind: unknown kind {kind!r}; expected one of {', '.join(MODEL_KINDS)}")
        return
    ck.unknown(kernel, set(KERNEL_DEFAULTS[kind]) | {"kind"}, "kernel")
    ck.number(kernel, "spacing", "kernel", positive=True)
    if kind in PHENOMENOLOGICAL_KINDS:
        ck.number(kernel, "a", "kernel", positive=True, allow_none=kind == "step")
        ck.number(kernel, "strength", "kernel", nonneg=True)
        ck.number(kernel, "lamb_strength", "kernel")
    elif kind == "ising":
        ck.number(kernel, "J", "kernel")
        ck.number(kernel, "beta", "kernel", nonneg=True)
        ck.number(kernel, "alpha", "kernel", positive=True)
        ck.number(kernel, "coupling", "kernel")
    elif kind == "bosonic-chain":
        ck.number(kernel, "omega0", "kernel")
        ck.number(kernel, "g", "kernel")
        if _is_number(kernel.get("g")) and kernel["g"] == 0:
            ck.errors.append("kernel.g: must be non-zero")
        ck.number(kernel, "beta", "kernel", nonneg=True)
        ck.number(kernel, "N", "kernel", positive=True, integer=True)
        if _is_number(kernel.get("N")) and int(kernel["N"]) % 2:
            ck.errors.append("kernel.N: must be even")
        ck.number(kernel, "coupling", "kernel")
        for key, options in (("dispersion", ("cosine", "linear")),
                             ("occupation", ("boltzmann", "bose-einstein")),
                             ("mode", ("BdagB", "BBdag", "pairs"))):
            if kernel.get(key) not in options:
                ck.errors.append(f"kernel.{key}: expected one of {options}, got {kernel.get(key)!r}")
    elif kind == "tabulated":
        p = kernel.get("path")
        if not isinstance(p, str):
            ck.errors.append("kernel.path: required for tabulated kernels")
        else:
            full = Path(p) if base is None or Path(p).is_absolute() else base / p
            if not full.is_file():
                ck.errors.append(f"kernel.path: file not found: {full}")
            else:
                kernel["path"] = str(full)


def _check_system(system: dict, ck: _Checker):
    ck.unknown(system, SYSTEM_DEFAULTS, "system")
    ck.number(system, "n_qubits", "system", positive=True, integer=True)
    n = system.get("n_qubits")
    if _is_number(n) and n > 6:
        ck.errors.append(f"system.n_qubits: at most 6 qubits are supported, got {n}")
    ck.number(system, "coupling_strength", "system")
    sp = system.get("splittings")
    vals = sp if isinstance(sp, list) else [sp]
    if not all(_is_number(v) and math.isfinite(v) for v in vals):
        ck.errors.append(f"system.splittings: expected finite number(s), got {sp!r}")
    elif isinstance(sp, list) and _is_number(n) and len(sp) != n:
        ck.errors.append(f"system.splittings: {len(sp)} values for {n} qubits")
    pos = system.get("positions")
    if pos is not None:
        if not isinstance(pos, list) or not all(_is_number(v) and math.isfinite(v) for v in pos):
            ck.errors.append(f"system.positions: expected a list of finite numbers, got {pos!r}")
        elif _is_number(n) and len(pos) != n:
            ck.errors.append(f"system.positions: {len(pos)} positions for {n} qubits")
    c = system.get("couplings")
    if not isinstance(c, str) or not c or set(c) - set("xyz"):
        ck.errors.append(f"system.couplings: expected Pauli letters from 'xyz', got {c!r}")


def _check_run(scenario: str, run: dict, system: dict, ck: _Checker):
    ck.unknown(run, RUN_DEFAULTS, "run")
    t = run.get("times")
    if not isinstance(t, dict):
        ck.errors.append("run.times: expected a mapping with start, stop, num")
    else:
        ck.number(t, "start", "run.times")
        ck.number(t, "stop", "run.times")
        ck.number(t, "num", "run.times", positive=True, integer=True)
        if _is_number(t.get("start")) and _is_number(t.get("stop")) and t["stop"] <= t["start"]:
            ck.errors.append("run.times.stop: must exceed run.times.start")
    for key in ("distances", "sizes"):
        v = run.get(key)
        if not isinstance(v, list) or not v or not all(_is_number(x) and math.isfinite(x) and x >= 0 for x in v):
            ck.errors.append(f"run.{key}: expected a non-empty list of non-negative numbers, got {v!r}")
    if scenario == "positivity-audit" and isinstance(run.get("sizes"), list):
        for n in run["sizes"]:
            if not _is_number(n) or int(n) != n or n < 1:
                ck.errors.append(f"run.sizes: sizes must be positive integers, got {n!r}")
    av = run.get("a_values")
    if av is not None and (not isinstance(av, list) or not all(_is_number(x) and math.isfinite(x) and x > 0 for x in av)):
        ck.errors.append(f"run.a_values: expected a list of positive numbers, got {av!r}")
    if run.get("regime") not in (None, "uncorrelated", "fully-correlated"):
        ck.errors.append(f"run.regime: expected uncorrelated or fully-correlated, got {run.get('regime')!r}")
    if run.get("generator") not in ("redfield", "secular"):
        ck.errors.append(f"run.generator: expected redfield or secular, got {run.get('generator')!r}")
    if not isinstance(run.get("outputs"), list) or set(run["outputs"]) - {"csv", "json"}:
        ck.errors.append(f"run.outputs: expected a subset of [csv, json], got {run.get('outputs')!r}")
    ck.number(run, "grid_size", "run", positive=True, integer=True)
    ck.number(run, "seed", "run", nonneg=True, integer=True)
    tol = run.get("tolerances")
    if not isinstance(tol, dict):
        ck.errors.append("run.tolerances: expected a mapping")
    else:
        ck.unknown(tol, RUN_DEFAULTS["tolerances"], "run.tolerances")
        ck.number(tol, "psd_tol", "run.tolerances", nonneg=True, allow_none=True)
        ck.number(tol, "eps_tol", "run.tolerances", positive=True, allow_none=True)
    n = system.get("n_qubits") if _is_number(system.get("n_qubits")) else None
    if scenario == "scaling":
        coh = run.get("coherences")
        if not isinstance(coh, list) or not coh:
            ck.errors.append("run.coherences: expected a non-empty list of [bra, ket] bit strings")
        else:
            for pair in coh:
                ok = (isinstance(pair, list) and len(pair) == 2
                      and all(isinstance(b, str) and set(b) <= {"0", "1"} and (n is None or len(b) == n) for b in pair))
                if not ok:
                    ck.errors.append(f"run.coherences: {pair!r} is not a pair of {n}-bit strings")
    if scenario == "propagate":
        init = run.get("initial")
        if not (init == "plus" or (isinstance(init, list) and init
                                   and all(isinstance(b, str) and set(b) <= {"0", "1"} and (n is None or len(b) == n) for b in init))):
            ck.errors.append(f"run.initial: expected 'plus' or a list of {n}-bit strings, got {init!r}")
        pairs = run.get("pairs")
        if pairs is not None:
            dim = 2 ** n if n else None
            if not isinstance(pairs, list) or not all(
                    isinstance(p, list) and len(p) == 2 and all(isinstance(i, int) and (dim is None or 0 <= i < dim) for i in p)
                    for p in pairs):
                ck.errors.append(f"run.pairs: expected [i, j] index pairs inside the {dim}-dimensional space")


def validate(raw: dict, base: Path | None = None, source: str = "") -> ScenarioConfig:
    """Apply defaults and check a raw mapping; raises `ConfigError` listing every violation."""
    if not isinstance(raw, dict):
        raise ConfigError(["top level: expected a mapping"])
    ck = _Checker()
    ck.unknown(raw, {"scenario", "system", "kernel", "run"}, "config")
    scenario = raw.get("scenario")
    if scenario not in SCENARIOS:
        ck.errors.append(f"scenario: unknown scenario {scenario!r}; expected one of {', '.join(SCENARIOS)}")
    for key in ("system", "kernel", "run"):
        if raw.get(key) is not None and not isinstance(raw[key], dict):
            ck.errors.append(f"{key}: expected a mapping")
    if any(e.split(":")[0] in ("system", "kernel", "run") for e in ck.errors):
        raise ConfigError(ck.errors)

    kernel_raw = dict(raw.get("kernel") or {})
    kind = kernel_raw.get("kind", "exponential")
    kernel_raw["kind"] = kind
    kernel = _merge(KERNEL_DEFAULTS.get(kind, {}), kernel_raw)
    system = _merge(SYSTEM_DEFAULTS, raw.get("system") or {})
    run = _merge(RUN_DEFAULTS, raw.get("run") or {})

    _check_kernel(kernel, ck, base)
    _check_system(system, ck)
    _check_run(scenario, run, system, ck)
    if scenario == "ising-rates" and kind != "ising":
        ck.errors.append(f"kernel.kind: ising-rates needs an ising kernel, got {kind!r}")
    if scenario == "bosonic-rates" and kind != "bosonic-chain":
        ck.errors.append(f"kernel.kind: bosonic-rates needs a bosonic-chain kernel, got {kind!r}")
    if scenario == "positivity-audit" and kind not in PHENOMENOLOGICAL_KINDS:
        ck.errors.append(f"kernel.kind: positivity-audit needs one of {PHENOMENOLOGICAL_KINDS}, got {kind!r}")
    if scenario in ("ising-rates", "bosonic-rates") and isinstance(run.get("distances"), list):
        for d in run["distances"]:
            if _is_number(d) and int(d) != d:
                ck.errors.append(f"run.distances: lattice baths need integer distances, got {d}")
    if ck.errors:
        raise ConfigError(ck.errors)

    cfg = ScenarioConfig(scenario, system, kernel, run, source)
    if scenario == "propagate" and kind in PHENOMENOLOGICAL_KINDS:
        cfg.warnings.extend(_cp_warnings(cfg))
    return cfg


def _cp_warnings(cfg: ScenarioConfig) -> list[Diagnostic]:
    from ..lindblad import psd_check
    from ..spectral.kernels import phenomenological_kernel

    n = int(cfg.system["n_qubits"])
    pos = cfg.system["positions"] or list(range(n))
    sp = cfg.kernel["spacing"]
    mat = np.array([[phenomenological_kernel(cfg.kernel["kind"], cfg.kernel["a"], (pj - pk) / sp)
                     for pk in pos] for pj in pos], dtype=float)
    verdict = psd_check(mat, cfg.run["tolerances"]["psd_tol"])
    if verdict.mappable:
        return []
    return [Diagnostic("W003", f"{cfg.kernel['kind']} kernel on the configured positions is not positive "
                               f"semi-definite (min eigenvalue {min(verdict.negative_eigenvalues):.6g}); "
                               "the propagated dynamics are not completely positive")]


def parse_config(path) -> ScenarioConfig:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError([f"YAML syntax: {exc}"]) from exc
    return validate(raw, base=path.parent, source=str(path))
