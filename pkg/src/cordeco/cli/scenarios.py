"""Scenario runners producing a `RunReport` and its CSV/JSON artifacts."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .. import __version__
from .. import quantum as qc
from ..diagnostics import Diagnostic
from ..dynamics import (extract_decay_rate, ising_two_qubit_rates, propagate, scaling_experiment,
                        simulated_two_qubit_rates, two_qubit_rates)
from ..io import write_csv, write_json
from ..lindblad import audit_kernel
from ..redfield import build_br_generator, build_secular_generator, qubit_chain
from ..spectral.models import Site
from ..spectral import (BosonicChainModel, BosonicChainParams, IsingModel, IsingParams,
                        PhenomenologicalModel, TabulatedModel)
from .config import ScenarioConfig

OUTPUT_DIR_ENV = "CORDECO_OUTPUT_DIR"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NON_CP = 2


@dataclass
class RunReport:
    scenario: str
    inputs: dict
    version: str
    digest: str
    results: dict
    header: list[str]
    rows: list[list]
    warnings: list[Diagnostic] = field(default_factory=list)
    exit_status: int = EXIT_OK
    files: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "version": self.version,
            "config_hash": self.digest,
            "inputs": self.inputs,
            "results": self.results,
            "warnings": [w.to_dict() for w in self.warnings],
            "exit_status": self.exit_status,
        }


def build_model(kernel: dict):
    kind = kernel["kind"]
    if kind in ("exponential", "gaussian", "step"):
        return PhenomenologicalModel(kind=kind, a=kernel["a"], strength=kernel["strength"],
                                     lamb_strength=kernel["lamb_strength"], spacing=kernel["spacing"])
    if kind == "ising":
        p = IsingParams(J=kernel["J"], beta=kernel["beta"], alpha=kernel["alpha"], spacing=kernel["spacing"])
        return IsingModel(params=p, coupling=kernel["coupling"])
    if kind == "bosonic-chain":
        p = BosonicChainParams(omega0=kernel["omega0"], g=kernel["g"], beta=kernel["beta"], N=int(kernel["N"]),
                               spacing=kernel["spacing"], dispersion=kernel["dispersion"],
                               occupation=kernel["occupation"])
        return BosonicChainModel(params=p, mode=kernel["mode"], coupling=kernel["coupling"])
    if kind == "tabulated":
        return TabulatedModel.from_csv(kernel["path"], spacing=kernel["spacing"])
    raise ValueError(f"unknown kernel kind {kind!r}")


def _pmap(fn, items, workers: int):
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def _rates_table(cfg: ScenarioConfig, model, analytic_fn, extra=None):
    strength = cfg.system["coupling_strength"]
    simulate = bool(cfg.run["simulate"])
    header = ["d", "gamma_minus", "gamma_plus", "gamma_zero"]
    if simulate:
        header += ["sim_gamma_minus", "sim_gamma_plus", "sim_gamma_zero"]
    if extra:
        header += [name for name, _ in extra]
    rows, entries = [], []
    for d in cfg.run["distances"]:
        an = analytic_fn(d)
        row = [float(d), an.gamma_minus, an.gamma_plus, an.gamma_zero]
        entry = {"d": float(d), "analytic": an.to_dict(), "identity_error": an.identity_error()}
        if simulate:
            sim, _ = simulated_two_qubit_rates(model, d, strength)
            row += [sim.gamma_minus, sim.gamma_plus, sim.gamma_zero]
            entry["simulated"] = sim.to_dict()
        for name, fn in extra or ():
            value = fn(d)
            row.append(value)
            entry[name] = value
        rows.append(row)
        entries.append(entry)
    return header, rows, {"rates": entries}


def run_two_qubit_rates(cfg, model, workers):
    strength = cfg.system["coupling_strength"]
    return _rates_table(cfg, model, lambda d: two_qubit_rates(model, d, strength))


def run_ising_rates(cfg, model, workers):
    p, strength = model.params, cfg.system["coupling_strength"] * model.coupling

    def spectral_gamma_minus(d):
        return two_qubit_rates(model, d, cfg.system["coupling_strength"]).gamma_minus
    return _rates_table(cfg, model, lambda d: ising_two_qubit_rates(p, int(d), strength),
                        [("spectral_gamma_minus", spectral_gamma_minus)])


def run_bosonic_rates(cfg, model, workers):
    strength = cfg.system["coupling_strength"]

    def corr_ratio(d):
        c00 = model.evaluate(0.0, Site(0.0), Site(0.0)).real
        return model.evaluate(0.0, Site(0.0), Site(float(d))).real / c00 if c00 else float("nan")
    return _rates_table(cfg, model, lambda d: two_qubit_rates(model, d, strength),
                        [("correlation_ratio", corr_ratio)])


def run_scaling(cfg, model, workers):
    n = int(cfg.system["n_qubits"])
    a_values = cfg.run["a_values"] or [cfg.kernel.get("a")]
    jobs = []
    for a in a_values:
        m = replace(model, a=a) if isinstance(model, PhenomenologicalModel) and a is not None else model
        for bra, ket in cfg.run["coherences"]:
            jobs.append((a, m, bra, ket))

    def one(job):
        a, m, bra, ket = job
        rate, pred = scaling_experiment(n, m, bra, ket, regime=cfg.run["regime"],
                                        coupling_strength=cfg.system["coupling_strength"])
        return a, bra, ket, rate, pred

    out = _pmap(one, jobs, workers)
    header = ["a", "bra", "ket", "n_f", "n_e", "gamma", "regime", "predicted_rate", "simulated_rate"]
    rows, entries = [], []
    for a, bra, ket, rate, pred in out:
        a_val = float("nan") if a is None else float(a)
        rows.append([a_val, bra, ket, float(pred.n_f), float(pred.n_e), pred.gamma, pred.regime, pred.rate, rate])
        entries.append({"a": a, "bra": bra, "ket": ket, "prediction": pred.to_dict(), "simulated_rate": rate})
    return header, rows, {"scaling": entries}


def run_positivity_audit(cfg, model, workers):
    sizes = [int(n) for n in cfg.run["sizes"]]
    tol = cfg.run["tolerances"]["psd_tol"]
    audits = _pmap(lambda n: audit_kernel(cfg.kernel["kind"], cfg.kernel["a"], n, tol, int(cfg.run["grid_size"])),
                   sizes, workers)
    header = ["n", "eigenvalue_min", "eigenvalue_max", "f_min", "f_max", "within_bounds", "mappable"]
    rows = [[float(r["n"]), r["eigenvalue_min"], r["eigenvalue_max"], r["f_min"], r["f_max"],
             float(r["within_bounds"]), float(r["decision"] == "mappable")] for r in audits]
    status = EXIT_OK if all(r["decision"] == "mappable" for r in audits) else EXIT_NON_CP
    warnings = []
    for r in audits:
        if r["decision"] != "mappable":
            warnings.append(Diagnostic("W003", f"n={r['n']}: min eigenvalue {r['eigenvalue_min']:.17g}"))
            minor = (r["witness"] or {}).get("minor")
            if minor:
                warnings.append(Diagnostic("W007", f"n={r['n']}: leading {minor['size']}x{minor['size']} "
                                                   f"minor det = {minor['det']:.17g}"))
    return header, rows, {"audits": audits}, warnings, status


def run_propagate(cfg, model, workers):
    n = int(cfg.system["n_qubits"])
    system = qubit_chain(n, splitting=cfg.system["splittings"], positions=cfg.system["positions"],
                         coupling=cfg.system["couplings"], strength=cfg.system["coupling_strength"])
    if cfg.run["generator"] == "secular":
        gen = build_secular_generator(system, model, eps_tol=cfg.run["tolerances"]["eps_tol"])
    else:
        gen = build_br_generator(system, model)
    dim = 2 ** n
    psi = np.zeros(dim, dtype=complex)
    if cfg.run["initial"] == "plus":
        psi[:] = 1.0
    else:
        for bits in cfg.run["initial"]:
            psi[int(bits, 2)] = 1.0
    psi /= np.linalg.norm(psi)
    t = cfg.run["times"]
    times = np.linspace(t["start"], t["stop"], int(t["num"]))
    traj = propagate(gen, qc.pure_state(psi), times, {"scenario": "propagate"})
    pairs = cfg.run["pairs"]
    if pairs is None:
        nz = np.nonzero(psi)[0]
        pairs = [[int(nz[0]), int(nz[-1])]] if len(nz) > 1 else [[0, 0]]
    pairs = [tuple(p) for p in pairs]
    header = ["t"]
    for i, j in pairs:
        header += [f"re(rho_{i}_{j})", f"im(rho_{i}_{j})"]
    rows = []
    for k, tk in enumerate(traj.times):
        row = [tk]
        for i, j in pairs:
            z = traj.states[k, i, j]
            row += [z.real, z.imag]
        rows.append(row)
    min_eigs = traj.min_eigenvalues()
    rates = {}
    for i, j in pairs:
        if i != j and abs(traj.states[0, i, j]) > 1e-8:
            fit = extract_decay_rate(traj, i, j)
            rates[f"{i},{j}"] = {"rate": fit.rate, "residual": fit.residual}
    warnings = list(gen.diagnostics)
    k_min = int(np.argmin(min_eigs))
    if min_eigs[k_min] < -1e-8:
        warnings.append(Diagnostic("W003", f"state at t={traj.times[k_min]:.17g} has eigenvalue {min_eigs[k_min]:.17g}"))
    results = {"generator_hash": traj.metadata["generator_hash"], "min_eigenvalue": float(min_eigs[k_min]),
               "min_eigenvalue_time": float(traj.times[k_min]), "rates": rates}
    return header, rows, results, warnings, EXIT_OK


RUNNERS = {
    "two-qubit-rates": run_two_qubit_rates,
    "ising-rates": run_ising_rates,
    "bosonic-rates": run_bosonic_rates,
    "scaling": run_scaling,
    "positivity-audit": run_positivity_audit,
    "propagate": run_propagate,
}


def output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV, "."))


def run_scenario(cfg: ScenarioConfig, workers: int = 1, out_dir=None, write: bool = True) -> RunReport:
    """Execute a validated scenario and write ``<scenario>-<hash>.{csv,json}``.

    Files go to ``out_dir``, else ``$CORDECO_OUTPUT_DIR``, else the current
    directory. The report's ``exit_status`` is 2 when a positivity audit
    finds a non-mappable kernel.
    """
    np.random.seed(int(cfg.run["seed"]))
    model = build_model(cfg.kernel)
    out = RUNNERS[cfg.scenario](cfg, model, workers)
    header, rows, results = out[:3]
    warnings = list(cfg.warnings) + (list(out[3]) if len(out) > 3 else [])
    status = out[4] if len(out) > 4 else EXIT_OK
    report = RunReport(scenario=cfg.scenario, inputs=cfg.canonical(), version=__version__, digest=cfg.digest,
                       results=results, header=header, rows=rows, warnings=warnings, exit_status=status)
    if write:
        target = Path(out_dir) if out_dir is not None else output_dir()
        target.mkdir(parents=True, exist_ok=True)
        stem = f"{cfg.scenario}-{cfg.digest}"
        stamp = [f"cordeco {__version__}", f"scenario {cfg.scenario} config {cfg.digest}"]
        if "csv" in cfg.run["outputs"]:
            report.files.append(str(write_csv(target / f"{stem}.csv", header, rows, stamp)))
        if "json" in cfg.run["outputs"]:
            path = target / f"{stem}.json"
            report.files.append(str(path))
            write_json(path, report.to_dict())
    return report
