"""Sectioned key=value scenario configs.

Format: INI-like sections ([scenario], [ensemble], [pulses], [integrator],
[decay], [sweep], [blockade], [poisson], [output]) holding key = value lines;
'#' starts a comment.  Frequencies are plain nu = omega/2pi in MHz, times in
us; conversion to angular units happens here, once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .protocols import ArpParams, GateParams, StirapParams

TWO_PI = 2.0 * math.pi

PROTOCOLS = (
    "double-stirap", "double-arp", "pi-baseline", "single-qubit-gate",
    "ramsey", "cnot", "phase-sweep", "poisson-average", "blockade-estimate",
    "basis",
)


class ConfigError(ValueError):
    """Config problem, carrying the offending line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


# Pulse presets named after the figure panels they reproduce.
PULSE_PRESETS = {
    "fig2-stirap": {
        "omega1_mhz": 30.0, "omega2_mhz": 40.0, "t1_us": 3.5, "t2_us": 5.5,
        "tau_us": 1.0, "delta_mhz": 200.0,
    },
    "fig2-arp": {
        "omega0_mhz": 2.0, "tau_us": 1.0, "chirp_mhz_per_us": 1.0,
        "separation_us": 8.0,
    },
    "fig3b-high-detuning": {
        "omega1_mhz": 250.0, "omega2_mhz": 250.0, "t1_us": 0.7, "t2_us": 1.1,
        "tau_us": 0.2, "delta_mhz": 2000.0,
    },
}

_KNOWN_KEYS = {
    "scenario": {"protocol", "label"},
    "ensemble": {"atoms", "atoms_control", "atoms_target", "scheme"},
    "pulses": {
        "preset", "omega1_mhz", "omega2_mhz", "t1_us", "t2_us", "tau_us",
        "delta_mhz", "switch_detuning", "omega0_mhz", "chirp_mhz_per_us",
        "separation_us", "invert_phase", "omega_mhz", "n_opt", "theta",
        "phi", "amp_a_re", "amp_a_im", "amp_b_re", "amp_b_im",
        "omega_pi_mhz", "omega_mw_mhz", "gap_us", "mode", "ratio",
        "sequence",
    },
    "integrator": {"step_divisor", "snapshots"},
    "decay": {"gamma_e_mhz", "gamma_r_mhz"},
    "sweep": {"axis", "start", "stop", "points", "values"},
    "blockade": {"c6_mhz_um6", "separation_um", "rabi_mhz"},
    "poisson": {"mean", "n_max", "metric"},
    "output": {"trace", "summary", "sweep"},
}

_BOOL_KEYS = {"switch_detuning", "invert_phase"}
_INT_KEYS = {"n_opt", "step_divisor", "snapshots", "points", "n_max",
             "atoms", "atoms_control", "atoms_target"}
_STR_KEYS = {"protocol", "label", "preset", "axis", "values", "mode",
             "metric", "trace", "summary", "sweep", "scheme", "sequence"}


@dataclass
class ScenarioConfig:
    protocol: str
    atoms: tuple[int, ...] = (1,)
    scheme: str = ""
    pulses: dict = field(default_factory=dict)
    step_divisor: int | None = None
    snapshots: int = 2000
    decay: dict | None = None
    sweep: dict | None = None
    blockade: dict | None = None
    poisson: dict | None = None
    output: dict = field(default_factory=dict)
    label: str = ""

    def stirap_params(self) -> StirapParams:
        p = {**PULSE_PRESETS["fig2-stirap"], **self.pulses}
        return StirapParams(
            omega1=TWO_PI * p["omega1_mhz"], omega2=TWO_PI * p["omega2_mhz"],
            t1=p["t1_us"], t2=p["t2_us"], tau=p["tau_us"],
            delta=TWO_PI * p["delta_mhz"])

    def arp_params(self) -> ArpParams:
        p = {**PULSE_PRESETS["fig2-arp"], **self.pulses}
        return ArpParams(
            omega0=TWO_PI * p["omega0_mhz"], tau=p["tau_us"],
            alpha=TWO_PI * p["chirp_mhz_per_us"],
            separation=p["separation_us"])

    def gate_params(self) -> GateParams:
        return GateParams(
            stirap=self.stirap_params(),
            omega_pi=TWO_PI * self.pulses.get("omega_pi_mhz", 10.0),
            omega_mw=TWO_PI * self.pulses.get("omega_mw_mhz", 10.0),
            gap=self.pulses.get("gap_us", 0.5))


def _parse_sections(text: str) -> dict[str, dict[str, tuple[str, int]]]:
    sections: dict[str, dict[str, tuple[str, int]]] = {}
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in _KNOWN_KEYS:
                raise ConfigError(f"unknown section [{current}]", lineno)
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigError(f"expected key = value, got {line!r}", lineno)
        if current is None:
            raise ConfigError("key outside any [section]", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KNOWN_KEYS[current]:
            raise ConfigError(f"unknown key {key!r} in section [{current}]",
                              lineno)
        if key in sections[current]:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        sections[current][key] = (value, lineno)
    return sections


def _coerce(key: str, value: str, lineno: int):
    if key in _STR_KEYS:
        return value
    if key in _BOOL_KEYS:
        low = value.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise ConfigError(f"{key} expects a boolean, got {value!r}", lineno)
    try:
        if key in _INT_KEYS:
            return int(value)
        return float(value)
    except ValueError:
        raise ConfigError(f"non-numeric value {value!r} for {key}",
                          lineno) from None


def parse_config(text: str, overrides: list[str] | None = None) -> ScenarioConfig:
    """Parse and validate a scenario config; errors carry line numbers.

    `overrides` holds section.key=value strings (the CLI's --set) applied
    after the file's own keys.
    """
    sections = _parse_sections(text)
    for item in overrides or []:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        path, value = item.split("=", 1)
        section, key = (s.strip() for s in path.split(".", 1))
        if section not in _KNOWN_KEYS:
            raise ConfigError(f"--set names unknown section [{section}]")
        if key not in _KNOWN_KEYS[section]:
            raise ConfigError(f"--set names unknown key {key!r} in "
                              f"section [{section}]")
        sections.setdefault(section, {})[key] = (value.strip(), 0)

    scen = sections.get("scenario", {})
    if "protocol" not in scen:
        raise ConfigError("missing required key 'protocol' in [scenario]")
    protocol, proto_line = scen["protocol"]
    if not protocol:
        raise ConfigError("empty protocol field", proto_line)
    if protocol not in PROTOCOLS:
        raise ConfigError(
            f"unknown protocol {protocol!r} (expected one of "
            f"{', '.join(PROTOCOLS)})", proto_line)

    def coerced(section):
        return {k: _coerce(k, v, ln)
                for k, (v, ln) in sections.get(section, {}).items()}

    ens = coerced("ensemble")
    if "atoms_control" in ens or "atoms_target" in ens:
        if not ("atoms_control" in ens and "atoms_target" in ens):
            raise ConfigError(
                "atoms_control and atoms_target must be given together")
        atoms = (ens["atoms_control"], ens["atoms_target"])
    else:
        atoms = (ens.get("atoms", 1),)
    if any(n < 1 for n in atoms):
        raise ConfigError(f"atom counts must be >= 1, got {atoms}")

    pulses = coerced("pulses")
    preset = pulses.pop("preset", None)
    if preset is not None:
        if preset not in PULSE_PRESETS:
            _, ln = sections["pulses"]["preset"]
            raise ConfigError(
                f"unknown pulse preset {preset!r} (expected one of "
                f"{', '.join(sorted(PULSE_PRESETS))})", ln)
        pulses = {**PULSE_PRESETS[preset], **pulses}
    for key in ("omega1_mhz", "omega2_mhz", "omega0_mhz", "delta_mhz",
                "omega_mhz", "omega_pi_mhz", "omega_mw_mhz"):
        if key in pulses and pulses[key] < 0:
            raise ConfigError(f"{key} must be >= 0")

    integ = coerced("integrator")
    decay = coerced("decay") or None
    if decay is not None and any(v < 0 for v in decay.values()):
        raise ConfigError("decay rates must be >= 0")

    sweep = coerced("sweep") or None
    if sweep is not None:
        if "axis" not in sweep:
            raise ConfigError("sweep section requires an 'axis' key")
        if "values" in sweep:
            try:
                sweep["values"] = [float(v) for v in
                                   str(sweep["values"]).split(",") if v.strip()]
            except ValueError:
                raise ConfigError("sweep values must be comma-separated "
                                  "numbers") from None
        elif not {"start", "stop", "points"} <= sweep.keys():
            raise ConfigError("sweep needs either 'values' or "
                              "'start'/'stop'/'points'")

    scheme = ens.get("scheme", "")
    if scheme and scheme not in ("two-level", "three-level", "five-level"):
        raise ConfigError(f"unknown scheme {scheme!r}")

    return ScenarioConfig(
        protocol=protocol,
        atoms=atoms,
        scheme=scheme,
        pulses=pulses,
        step_divisor=integ.get("step_divisor"),
        snapshots=integ.get("snapshots", 2000),
        decay=decay,
        sweep=sweep,
        blockade=coerced("blockade") or None,
        poisson=coerced("poisson") or None,
        output=coerced("output"),
        label=scen.get("label", ("", 0))[0] if "label" in scen else "",
    )


