"""Command-line front end: `sim <protocol> --config file [--out dir] [--set k=v]`.

Exit codes: 0 success, 2 config error, 3 integration failure.  Errors are
reported as one JSON object on stdout so callers can parse them.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import analysis, protocols
from ._engine import IntegrationError
from ._spaces import SymmetricSpace
from .config import PROTOCOLS, ConfigError, ScenarioConfig, parse_config
from .dynamics import DecayRates, EvolutionTrace
from .statespace import FIVE_LEVEL, THREE_LEVEL, TWO_LEVEL, build_basis

TWO_PI = 2.0 * math.pi


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _trace_rows(trace: EvolutionTrace, space) -> tuple[list[str], list[list[float]]]:
    scheme = space.scheme
    tracked = [lev for lev in scheme.levels if lev != scheme.ground_levels[0]]
    header = ["t_us", "ground_pop", "ground_phase_rad"]
    header += [f"pop_sym_{lev}" for lev in tracked]
    if trace.is_density:
        header.append("leaked")
    phase = analysis.lenient_phase_series(trace.times, trace.ground_amplitude)
    cols = [trace.times, trace.ground_population, phase]
    for lev in tracked:
        if isinstance(space, SymmetricSpace):
            cols.append(trace.population_series(space.singly_excited_index(lev)))
        else:
            from .statespace import symmetric_singly_excited
            v = symmetric_singly_excited(space.basis, lev).amplitudes
            if trace.is_density:
                cols.append(np.real(np.einsum("i,tij,j->t",
                                              v.conj(), trace.states, v)))
            else:
                cols.append(np.abs(trace.states @ v.conj()) ** 2)
    if trace.is_density:
        cols.append(trace.leaked)
    rows = [[col[k] for col in cols] for k in range(trace.times.size)]
    return header, rows


def _summary(cfg: ScenarioConfig, metrics: dict, started: float,
             drift: float) -> dict:
    return {
        "protocol": cfg.protocol,
        "label": cfg.label,
        "atoms": list(cfg.atoms),
        "metrics": metrics,
        "wall_time_s": round(time.time() - started, 3),
        "max_norm_drift": drift,
    }


def _complex_matrix(m: np.ndarray) -> list[list[list[float]]]:
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def _sweep_values(cfg: ScenarioConfig) -> list[float]:
    sw = cfg.sweep
    if "values" in sw:
        return list(sw["values"])
    return list(np.linspace(sw["start"], sw["stop"], int(sw["points"])))


# -- protocol runners ----------------------------------------------------------

def _decay_rates(cfg: ScenarioConfig) -> DecayRates | None:
    if not cfg.decay:
        return None
    return DecayRates(gamma_e=TWO_PI * cfg.decay.get("gamma_e_mhz", 0.0),
                      gamma_r=TWO_PI * cfg.decay.get("gamma_r_mhz", 0.0))


def _run_single_transfer(cfg: ScenarioConfig, out: Path) -> dict:
    """sequence = single: error of one forward transfer, decay optional."""
    rates = _decay_rates(cfg)
    divisor = cfg.step_divisor or (48 if rates else protocols.SEQUENCE_DIVISOR)

    def one(n_atoms: int) -> float:
        if cfg.protocol == "double-stirap":
            return protocols.single_stirap_error(
                n_atoms, cfg.stirap_params(), rates, step_divisor=divisor)
        if rates is not None:
            raise ConfigError("decay is only modeled for the stirap scheme")
        return protocols.single_arp_error(n_atoms, cfg.arp_params(),
                                          step_divisor=divisor)

    if cfg.sweep:
        if cfg.sweep["axis"] != "N":
            raise ConfigError("single-transfer runs sweep over axis N only")
        rows = [[int(v), one(int(v))] for v in _sweep_values(cfg)]
        _write_csv(out / cfg.output.get("sweep", "sweep.csv"),
                   ["N", "transfer_error"], rows)
        return {"metrics": {"points": len(rows)}, "drift": 0.0}
    return {"metrics": {"transfer_error": one(cfg.atoms[0])}, "drift": 0.0}


def _run_double_sequence(cfg: ScenarioConfig, out: Path) -> dict:
    kind = cfg.protocol
    if cfg.pulses.get("sequence", "double") == "single":
        return _run_single_transfer(cfg, out)
    divisor = cfg.step_divisor or (protocols.SEQUENCE_DIVISOR
                                   if kind == "double-stirap"
                                   else protocols.ARP_DIVISOR)

    def one(n_atoms: int):
        if kind == "double-stirap":
            return protocols.run_double_stirap(
                n_atoms, cfg.stirap_params(),
                switch_detuning=cfg.pulses.get("switch_detuning", True),
                snapshots=cfg.snapshots, step_divisor=divisor)
        return protocols.run_double_arp(
            n_atoms, cfg.arp_params(),
            invert_phase=cfg.pulses.get("invert_phase", True),
            snapshots=cfg.snapshots, step_divisor=divisor)

    if cfg.sweep:
        if cfg.sweep["axis"] != "N":
            raise ConfigError(f"{kind} sweeps over axis N only")
        rows = []
        drift = 0.0
        for value in _sweep_values(cfg):
            n = int(value)
            res = one(n)
            rows.append([n, res.ground_population,
                         protocols.wrap_phase(res.ground_phase),
                         1.0 - res.ground_population])
            drift = max(drift, res.trace.norm_drift)
            header, trows = _trace_rows(res.trace, res.trace.space)
            _write_csv(out / cfg.output.get("trace", "trace.csv").replace(
                ".csv", f"_N{n}.csv"), header, trows)
        _write_csv(out / cfg.output.get("sweep", "sweep.csv"),
                   ["N", "ground_pop", "ground_phase_rad", "pop_error"], rows)
        return {"metrics": {"points": len(rows)}, "drift": drift}

    res = one(cfg.atoms[0])
    header, trows = _trace_rows(res.trace, res.trace.space)
    _write_csv(out / cfg.output.get("trace", "trace.csv"), header, trows)
    return {"metrics": {
        "ground_pop": res.ground_population,
        "ground_phase_rad": protocols.wrap_phase(res.ground_phase)},
        "drift": res.trace.norm_drift}


def _run_pi_baseline(cfg: ScenarioConfig, out: Path) -> dict:
    omega = TWO_PI * cfg.pulses.get("omega_mhz", 1.0)
    n_opt = int(cfg.pulses.get("n_opt", 5))
    if cfg.sweep:
        if cfg.sweep["axis"] != "N":
            raise ConfigError("pi-baseline sweeps over axis N only")
        rows = []
        for value in _sweep_values(cfg):
            n = int(value)
            rows.append([n, protocols.pi_pulse_baseline(n, n_opt, omega),
                        protocols.pi_pulse_baseline_exact(n, n_opt)])
        _write_csv(out / cfg.output.get("sweep", "sweep.csv"),
                   ["N", "error", "error_exact"], rows)
        return {"metrics": {"points": len(rows)}, "drift": 0.0}
    n = cfg.atoms[0]
    err = protocols.pi_pulse_baseline(n, n_opt, omega)
    return {"metrics": {"error": err,
                        "error_exact": protocols.pi_pulse_baseline_exact(n, n_opt)},
            "drift": 0.0}


def _run_single_qubit(cfg: ScenarioConfig, out: Path) -> dict:
    a = complex(cfg.pulses.get("amp_a_re", 1.0), cfg.pulses.get("amp_a_im", 0.0))
    b = complex(cfg.pulses.get("amp_b_re", 0.0), cfg.pulses.get("amp_b_im", 0.0))
    norm = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
    report = protocols.single_qubit_gate(
        cfg.atoms[0], (a / norm, b / norm),
        cfg.pulses.get("theta", math.pi / 2.0), cfg.pulses.get("phi", 0.0),
        cfg.gate_params(),
        switch_detuning=cfg.pulses.get("switch_detuning", True),
        step_divisor=cfg.step_divisor or protocols.GATE_DIVISOR)
    return {"metrics": {
        "fidelity": report.fidelity,
        "population_error": report.population_error,
        "logical_matrix": _complex_matrix(report.logical_matrix)},
        "drift": 0.0}


def _run_ramsey(cfg: ScenarioConfig, out: Path) -> dict:
    switch = cfg.pulses.get("switch_detuning", True)
    divisor = cfg.step_divisor or protocols.GATE_DIVISOR
    if cfg.sweep:
        if cfg.sweep["axis"] != "phi":
            raise ConfigError("ramsey sweeps over axis phi only")
        rows = []
        for phi in _sweep_values(cfg):
            p1 = protocols.ramsey(cfg.atoms[0], phi, cfg.gate_params(),
                                  switch_detuning=switch, step_divisor=divisor)
            rows.append([phi, p1, protocols.ramsey_reference(phi)])
        _write_csv(out / cfg.output.get("sweep", "sweep.csv"),
                   ["phi_rad", "p1", "p1_reference"], rows)
        return {"metrics": {"points": len(rows)}, "drift": 0.0}
    phi = cfg.pulses.get("phi", 0.0)
    p1 = protocols.ramsey(cfg.atoms[0], phi, cfg.gate_params(),
                          switch_detuning=switch, step_divisor=divisor)
    return {"metrics": {"p1": p1,
                        "p1_reference": protocols.ramsey_reference(phi)},
            "drift": 0.0}


def _run_cnot(cfg: ScenarioConfig, out: Path) -> dict:
    if len(cfg.atoms) != 2:
        raise ConfigError("cnot needs atoms_control and atoms_target")
    report = protocols.cnot(cfg.atoms[0], cfg.atoms[1], cfg.gate_params(),
                            step_divisor=cfg.step_divisor or protocols.GATE_DIVISOR)
    return {"metrics": {
        "fidelity": report.fidelity,
        "population_error": report.population_error,
        "logical_matrix": _complex_matrix(report.logical_matrix)},
        "drift": 0.0}


def _run_phase_sweep(cfg: ScenarioConfig, out: Path) -> dict:
    mode = cfg.pulses.get("mode", "stirap")
    if cfg.sweep:
        if cfg.sweep["axis"] != "ratio":
            raise ConfigError("phase-sweep sweeps over axis ratio only")
        rows = []
        for ratio in _sweep_values(cfg):
            err = protocols.phase_error_sweep(
                cfg.atoms[0], ratio, mode, stirap=cfg.stirap_params(),
                arp=cfg.arp_params(), step_divisor=cfg.step_divisor)
            rows.append([ratio, err])
        _write_csv(out / cfg.output.get("sweep", "sweep.csv"),
                   ["ratio", "phase_error_rad"], rows)
        return {"metrics": {"points": len(rows)}, "drift": 0.0}
    ratio = cfg.pulses.get("ratio", 1.0)
    err = protocols.phase_error_sweep(cfg.atoms[0], ratio, mode,
                                      stirap=cfg.stirap_params(),
                                      arp=cfg.arp_params(),
                                      step_divisor=cfg.step_divisor)
    return {"metrics": {"phase_error_rad": err}, "drift": 0.0}


_POISSON_METRICS = {
    "pi-baseline": lambda cfg: (lambda n: protocols.pi_pulse_baseline(
        n, int(cfg.pulses.get("n_opt", 5)),
        TWO_PI * cfg.pulses.get("omega_mhz", 1.0))),
    "double-stirap": lambda cfg: (lambda n: 1.0 - protocols.run_double_stirap(
        n, cfg.stirap_params(), snapshots=2).ground_population),
    "double-arp": lambda cfg: (lambda n: 1.0 - protocols.run_double_arp(
        n, cfg.arp_params(), snapshots=2).ground_population),
}


def _run_poisson(cfg: ScenarioConfig, out: Path) -> dict:
    if not cfg.poisson:
        raise ConfigError("poisson-average needs a [poisson] section")
    mean = cfg.poisson.get("mean")
    n_max = int(cfg.poisson.get("n_max", 15))
    metric_name = cfg.poisson.get("metric", "pi-baseline")
    if mean is None:
        raise ConfigError("missing required key 'mean' in [poisson]")
    if metric_name not in _POISSON_METRICS:
        raise ConfigError(f"unknown poisson metric {metric_name!r}")
    metric = _POISSON_METRICS[metric_name](cfg)
    values = {n: metric(n) for n in range(1, n_max + 1)}
    avg = analysis.poisson_average(values, mean, n_max)
    rows = [[n, analysis.poisson_loading(mean, n), values[n]]
            for n in range(1, n_max + 1)]
    _write_csv(out / cfg.output.get("sweep", "sweep.csv"),
               ["N", "probability", metric_name.replace("-", "_") + "_error"],
               rows)
    return {"metrics": {
        "average_error": avg,
        "defect_probability": analysis.poisson_loading(mean, 0),
        "metric": metric_name}, "drift": 0.0}


def _run_blockade(cfg: ScenarioConfig, out: Path) -> dict:
    if not cfg.blockade:
        raise ConfigError("blockade-estimate needs a [blockade] section")
    try:
        est = analysis.blockade_estimate(
            cfg.blockade["c6_mhz_um6"], cfg.blockade["separation_um"],
            cfg.blockade["rabi_mhz"], cfg.atoms[0])
    except KeyError as exc:
        raise ConfigError(f"missing required key {exc.args[0]!r} in "
                          f"[blockade]") from None
    return {"metrics": {
        "interaction_mhz": est.interaction,
        "collective_rabi_mhz": est.collective_rabi,
        "ratio": est.ratio,
        "blockaded": est.blockaded}, "drift": 0.0}


_SCHEMES = {"two-level": TWO_LEVEL, "three-level": THREE_LEVEL,
            "five-level": FIVE_LEVEL}


def _run_basis(cfg: ScenarioConfig, out: Path) -> dict:
    default = "five-level" if len(cfg.atoms) == 2 else "three-level"
    scheme = _SCHEMES[cfg.scheme or default]
    basis = build_basis(scheme, cfg.atoms)
    sym = SymmetricSpace(scheme, cfg.atoms)
    dump = {
        "scheme": {"ground": list(scheme.ground_levels),
                   "rydberg": list(scheme.rydberg_levels)},
        "atoms": list(cfg.atoms),
        "dimension": basis.dimension,
        "symmetric_dimension": sym.dimension,
        "configurations": ["".join(c) for c in basis.configurations],
    }
    with open(out / cfg.output.get("summary", "basis.json"), "w") as fh:
        json.dump(dump, fh, indent=1)
    return {"metrics": {"dimension": basis.dimension,
                        "symmetric_dimension": sym.dimension}, "drift": 0.0}


_RUNNERS = {
    "double-stirap": _run_double_sequence,
    "double-arp": _run_double_sequence,
    "pi-baseline": _run_pi_baseline,
    "single-qubit-gate": _run_single_qubit,
    "ramsey": _run_ramsey,
    "cnot": _run_cnot,
    "phase-sweep": _run_phase_sweep,
    "poisson-average": _run_poisson,
    "blockade-estimate": _run_blockade,
    "basis": _run_basis,
}


def run(cfg: ScenarioConfig, out_dir: str | Path) -> dict:
    """Execute a parsed scenario; returns the summary dict it also writes."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.time()
    result = _RUNNERS[cfg.protocol](cfg, out)
    summary = _summary(cfg, result["metrics"], started, result["drift"])
    with open(out / cfg.output.get("summary", "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=1)
    return summary


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="sim",
        description="Simulate compensated adiabatic-passage sequences and "
                    "ensemble gates.")
    sub = parser.add_subparsers(dest="protocol", required=True)
    for name in PROTOCOLS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="scenario config file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--set", action="append", default=[], dest="overrides",
                       metavar="SECTION.KEY=VALUE",
                       help="override a config value")
    args = parser.parse_args(argv)

    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(json.dumps({"error": "config", "message": str(exc)}))
        return 2
    try:
        cfg = parse_config(text, args.overrides)
        if cfg.protocol != args.protocol:
            raise ConfigError(
                f"config names protocol {cfg.protocol!r} but the "
                f"{args.protocol!r} subcommand was invoked")
        summary = run(cfg, args.out)
    except ConfigError as exc:
        print(json.dumps({"error": "config", "message": str(exc),
                          "line": exc.line}))
        return 2
    except IntegrationError as exc:
        print(json.dumps({"error": "integration", "message": str(exc)}))
        return 3
    print(json.dumps(summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
