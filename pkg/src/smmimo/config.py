"""Experiment configuration files.

A configuration is an INI file::

    [scenario]
    name = fig4
    sweep = snr                 ; snr | alpha | complexity
    K = 16
    N = 128                     ; a comma list runs each N
    snr_db = 0, 1, 2, 3         ; 'inf' means noiseless
    seed = 1

    [system:sm]
    n_t = 4
    qam = 4
    detectors = mpd, lsd
    snr_db = 0, 1, 2            ; optional per-system grid

    [detector:mpd]
    damping = 0.4

Detector sections are keyed by a label; ``kind`` selects the algorithm
and defaults to the label, so ``[detector:mpd-0.2]`` with ``kind = mpd``
adds a second message-passing variant.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .signal import ConfigError
from .sim import DETECTORS, DetectorSpec, SystemSpec, TrialPlan

__all__ = [
    "ConfigValidationError",
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "bundled_scenarios",
    "resolve_config_path",
]

SWEEPS = ("snr", "alpha", "complexity")

_SCENARIO_KEYS = {
    "name", "description", "sweep", "k", "n", "snr_db", "alpha", "seed",
    "min_errors", "max_trials", "batch", "power_profile", "complexity_trials",
}
_SYSTEM_KEYS = {"n_t", "qam", "streams", "detectors", "snr_db", "label"}
_DETECTOR_KEYS = {"kind", "iterations", "damping", "tol", "restarts"}


class ConfigValidationError(ConfigError):
    """Collects every problem found in a configuration file."""

    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("\n".join(problems))


@dataclass
class ExperimentConfig:
    name: str
    sweep: str
    plans: list[TrialPlan]
    description: str = ""
    complexity_trials: int = 32
    source: str = ""
    warnings: list[str] = field(default_factory=list)


def bundled_scenarios() -> dict[str, Path]:
    root = resources.files("smmimo") / "scenarios"
    return {Path(p.name).stem: Path(str(p)) for p in root.iterdir() if p.name.endswith(".ini")}


def resolve_config_path(arg: str) -> Path:
    """A path, or the name of a bundled scenario."""
    p = Path(arg)
    if p.exists():
        return p
    scen = bundled_scenarios()
    if arg in scen:
        return scen[arg]
    raise FileNotFoundError(f"no such config file or bundled scenario: {arg}")


def _line_index(text: str) -> dict[tuple[str, str | None], int]:
    """Map (section, key) -> 1-based line number, keys lower-cased."""
    out = {}
    section = None
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        m = re.match(r"\[(.+)\]$", line)
        if m:
            section = m.group(1).strip()
            out[(section, None)] = n
            continue
        m = re.match(r"([^=:]+)[=:]", line)
        if m and section is not None:
            out.setdefault((section, m.group(1).strip().lower()), n)
    return out


class _Reader:
    def __init__(self, text: str, source: str):
        self.source = source
        self.lines = _line_index(text)
        self.problems: list[str] = []
        self.cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        try:
            self.cp.read_string(text, source=source)
        except configparser.Error as exc:
            self.problems.append(f"{source}: {exc}".replace("\n", " "))
            self.cp = None

    def where(self, section, key=None):
        n = self.lines.get((section, key)) or self.lines.get((section, None))
        return f"{self.source}:{n}" if n else self.source

    def error(self, section, key, msg):
        self.problems.append(f"{self.where(section, key)}: [{section}] {msg}")

    def check_keys(self, section, allowed):
        for key in self.cp[section]:
            if key not in allowed:
                self.error(section, key, f"unknown key {key!r}")

    def get(self, section, key, conv, default=None, required=False):
        if key not in self.cp[section]:
            if required:
                self.error(section, None, f"missing required key {key!r}")
            return default
        raw = self.cp[section][key]
        try:
            return conv(raw)
        except (ValueError, ConfigError) as exc:
            self.error(section, key, f"bad value for {key!r}: {raw!r} ({exc})")
            return default


def _float(s: str) -> float:
    v = float(s)
    if math.isnan(v):
        raise ValueError("nan not allowed")
    return v


def _list(conv):
    def parse(s):
        items = [p.strip() for p in s.split(",") if p.strip()]
        return tuple(conv(p) for p in items)
    return parse


def _names(s):
    return tuple(p.strip() for p in s.split(",") if p.strip())


def _detector_value(key, raw):
    if key in ("iterations", "restarts"):
        v = int(raw)
        if v < 1:
            raise ValueError(f"{key} must be >= 1")
        return v
    if key == "damping":
        v = float(raw)
        if not 0 < v <= 1:
            raise ValueError("damping must lie in (0, 1]")
        return v
    if key == "tol":
        return None if raw.strip().lower() == "none" else float(raw)
    return raw


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse and validate; raises :class:`ConfigValidationError` listing all problems."""
    rd = _Reader(text, source)
    if rd.cp is None:
        raise ConfigValidationError(rd.problems)
    cp = rd.cp
    if "scenario" not in cp:
        raise ConfigValidationError([f"{source}: missing [scenario] section"])
    for sec in cp.sections():
        if sec != "scenario" and not re.match(r"(system|detector):\S+$", sec):
            rd.error(sec, None, "unknown section")

    sc = "scenario"
    rd.check_keys(sc, _SCENARIO_KEYS)
    name = rd.get(sc, "name", str, default=Path(source).stem)
    sweep = rd.get(sc, "sweep", str.strip, default="snr")
    if sweep not in SWEEPS:
        rd.error(sc, "sweep", f"sweep must be one of {SWEEPS}, got {sweep!r}")
    K = rd.get(sc, "k", int, default=0)
    Ns = rd.get(sc, "n", _list(int), default=(), required=True)
    snrs = rd.get(sc, "snr_db", _list(_float), default=())
    alphas = rd.get(sc, "alpha", _list(_float), default=())
    seed = rd.get(sc, "seed", int, default=0)
    min_errors = rd.get(sc, "min_errors", int, default=100)
    max_trials = rd.get(sc, "max_trials", int, default=10**7)
    batch = rd.get(sc, "batch", int, default=32)
    profile = rd.get(sc, "power_profile", _list(_float), default=None)
    ctrials = rd.get(sc, "complexity_trials", int, default=32)

    if not Ns:
        rd.error(sc, "n", "N grid is empty")
    if any(n < 1 for n in Ns):
        rd.error(sc, "n", "N must be >= 1")
    if sweep == "snr":
        if K < 1:
            rd.error(sc, "k", f"K must be >= 1, got {K}")
    else:
        if not alphas:
            rd.error(sc, "alpha", "alpha grid is empty")
        if len(snrs) != 1 and "snr_db" in cp[sc]:
            rd.error(sc, "snr_db", "loading-factor sweeps take a single snr_db")
        for n in Ns:
            for a in alphas:
                k = a * n
                if abs(k - round(k)) > 1e-9 or round(k) < 1:
                    rd.error(sc, "alpha", f"alpha={a} gives K={k:g} for N={n}; need a positive integer")
    if profile is not None:
        if sweep != "snr":
            rd.error(sc, "power_profile", "power_profile only applies to snr sweeps")
        elif len(profile) != K:
            rd.error(sc, "power_profile", f"power_profile needs K={K} entries, got {len(profile)}")
        elif abs(sum(profile) - K) > 1e-12 * max(K, 1) + 1e-12:
            rd.error(sc, "power_profile",
                     f"power_profile must satisfy sum sigma_k^2 = K = {K}, got {sum(profile):.12g}")
        elif any(v <= 0 for v in profile):
            rd.error(sc, "power_profile", "power_profile entries must be positive")

    # detectors
    dets: dict[str, DetectorSpec] = {}
    for sec in cp.sections():
        if not sec.startswith("detector:"):
            continue
        label = sec.split(":", 1)[1]
        rd.check_keys(sec, _DETECTOR_KEYS)
        kind = cp[sec].get("kind", label).strip()
        if kind not in DETECTORS:
            rd.error(sec, "kind", f"unknown detector kind {kind!r}; known: {sorted(DETECTORS)}")
            continue
        params = {}
        for key in cp[sec]:
            if key == "kind" or key not in _DETECTOR_KEYS:
                continue
            if key not in DETECTORS[kind][1]:
                rd.error(sec, key, f"detector {kind!r} takes no parameter {key!r}")
                continue
            v = rd.get(sec, key, lambda raw, key=key: _detector_value(key, raw))
            if v is not None or key == "tol":
                params[key] = v
        dets[label] = DetectorSpec(kind, tuple(sorted(params.items())), label)

    # systems
    systems = []
    for sec in cp.sections():
        if not sec.startswith("system:"):
            continue
        rd.check_keys(sec, _SYSTEM_KEYS)
        label = cp[sec].get("label", sec.split(":", 1)[1]).strip()
        n_t = rd.get(sec, "n_t", int, default=1)
        qam = rd.get(sec, "qam", int, required=True)
        streams = rd.get(sec, "streams", int, default=1)
        det_names = rd.get(sec, "detectors", _names, default=(), required=True)
        sys_snr = rd.get(sec, "snr_db", _list(_float), default=None)
        specs = []
        for dn in det_names:
            if dn in dets:
                specs.append(dets[dn])
            elif dn in DETECTORS:
                specs.append(DetectorSpec(dn, (), dn))
            else:
                rd.error(sec, "detectors", f"unknown detector {dn!r}")
        if qam is None or not specs:
            if not det_names:
                rd.error(sec, "detectors", "no detectors listed")
            continue
        try:
            spec = SystemSpec(label, n_t, qam, tuple(specs), streams)
        except ConfigError as exc:
            rd.error(sec, None, str(exc))
            continue
        grid = sys_snr if sys_snr is not None else snrs
        if not grid:
            rd.error(sec, "snr_db", "empty SNR grid")
        if sweep != "snr" and sys_snr is not None and len(sys_snr) != 1:
            rd.error(sec, "snr_db", "loading-factor sweeps take a single snr_db")
        systems.append((spec, tuple(grid)))
    if not systems and not any("system" in p for p in rd.problems):
        rd.problems.append(f"{rd.where(sc)}: no [system:...] sections")

    if rd.problems:
        raise ConfigValidationError(rd.problems)

    warnings = []
    rates = {s.name: s.bits_per_user for s, _ in systems}
    if len(set(rates.values())) > 1:
        warnings.append(
            "systems have unequal spectral efficiency (bits per user per channel use: "
            + ", ".join(f"{k}={v}" for k, v in rates.items()) + ")"
        )

    plans = []
    for spec, grid in systems:
        for n in Ns:
            plans.append(
                TrialPlan(
                    system=spec,
                    K=K,
                    N=n,
                    snr_db=grid,
                    seed=seed,
                    alpha=tuple(alphas) if sweep != "snr" else (),
                    min_errors=min_errors,
                    max_trials=max_trials,
                    batch=batch,
                    power_profile=profile,
                    scenario=name,
                )
            )
    return ExperimentConfig(
        name=name,
        sweep=sweep,
        plans=plans,
        description=cp[sc].get("description", ""),
        complexity_trials=ctrials,
        source=source,
        warnings=warnings,
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), str(path))
