"""Scenario configuration: INI files -> validated ScenarioConfig.

The format is flat ``key = value`` text under five section headers:
[system] physical parameters, [scenario] model/initial state/cutoffs,
[integrator] stepping, [schedule] pulse windows (only for the pulsed
model), [output] CSV columns and path.  Parsing is strict: unknown
keys, missing requirements, and inconsistent selections fail with
ConfigurationError at load time, not at run time.
"""

import configparser
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import METHOD_ADAPTIVE, METHOD_FIXED, IntegratorConfig
from .effective import PulseSchedule
from .errors import ConfigurationError
from .model import SystemParams

CSV_COLUMNS = ("time", "r", "var_x_min", "theta_min", "squeezing_degree",
               "n_a", "n_b", "pop_e", "purity", "trace_error", "tail_weight")

MODELS = ("full-interaction-picture", "sss", "ajc", "pulsed-jc-ajc")
EFFECTIVE_KINDS = ("pdc", "puc", "squeeze")

_SYSTEM_KEYS = {
    "omega0": 1.0e5, "delta_a": 0.0, "delta_b": None, "delta1": 0.0,
    "delta2": 0.0, "lambda_a": 1.0, "lambda_b": 0.0, "Omega1": 0.0,
    "Omega2": 0.0, "phi1": 0.0, "phi2": 0.0, "Gamma_f": 0.0, "Gamma_a": 0.0,
}


@dataclass(frozen=True)
class ScenarioConfig:
    """A fully validated run description."""

    name: str
    description: str
    params: SystemParams
    model: str
    initial_state: dict
    cutoff_a: int
    cutoff_b: int
    integrator: IntegratorConfig
    columns: tuple
    output_path: str
    schedule: PulseSchedule
    chi: float

    def with_(self, **changes):
        return replace(self, **changes)

    def effective_selector(self):
        """(kind, branch, regime-or-None) for an effective:* model."""
        if not self.model.startswith("effective:"):
            raise ConfigurationError(f"model {self.model!r} is not effective:*")
        parts = [p.strip() for p in self.model[len("effective:"):].split(",")]
        if len(parts) == 2:
            kind, branch = parts
            regime = None
        elif len(parts) == 3:
            kind, branch, regime = parts
        else:
            raise ConfigurationError(
                f"model {self.model!r} needs effective:<kind>,<branch>[,<regime>]")
        if kind not in EFFECTIVE_KINDS:
            raise ConfigurationError(f"unknown effective kind {kind!r}")
        return kind, branch, regime


def _parse_float(section, key, default=None):
    raw = section.get(key, None)
    if raw is None or raw.strip() == "":
        return default
    try:
        return float(raw)
    except ValueError:
        raise ConfigurationError(f"bad float for {key!r}: {raw!r}") from None


def _parse_int(section, key, default=None):
    raw = section.get(key, None)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigurationError(f"bad int for {key!r}: {raw!r}") from None


def _parse_bool(section, key, default=False):
    raw = section.get(key, None)
    if raw is None or raw.strip() == "":
        return default
    val = raw.strip().lower()
    if val in ("1", "true", "yes", "on"):
        return True
    if val in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"bad bool for {key!r}: {raw!r}")


def parse_initial_state(text):
    """Initial-state grammar -> parts dict for product_state.

    ``vacuum`` means everything in its ground level.  Otherwise a
    whitespace-separated list of ``label=spec`` tokens with spec one of
    ``g``/``e``/``plus``/``minus`` (atom), an integer (Fock level),
    ``fock:<n>``, or ``coherent:<amplitude>``.
    """
    text = (text or "vacuum").strip()
    if text == "vacuum":
        return {}
    parts = {}
    for token in text.split():
        if "=" not in token:
            raise ConfigurationError(f"bad initial-state token {token!r}")
        label, spec = token.split("=", 1)
        label, spec = label.strip(), spec.strip()
        if not label or not spec:
            raise ConfigurationError(f"bad initial-state token {token!r}")
        if label in parts:
            raise ConfigurationError(f"duplicate initial-state label {label!r}")
        if spec in ("g", "e"):
            parts[label] = spec
        elif spec == "plus":
            parts[label] = np.array([1.0, 1.0]) / np.sqrt(2.0)
        elif spec == "minus":
            parts[label] = np.array([-1.0, 1.0]) / np.sqrt(2.0)
        elif spec.startswith("fock:"):
            try:
                parts[label] = int(spec[5:])
            except ValueError:
                raise ConfigurationError(f"bad Fock level in {token!r}") from None
        elif spec.startswith("coherent:"):
            try:
                parts[label] = ("coherent", complex(spec[9:]))
            except ValueError:
                raise ConfigurationError(f"bad coherent amplitude in {token!r}") from None
        else:
            try:
                parts[label] = int(spec)
            except ValueError:
                raise ConfigurationError(
                    f"bad initial-state spec {spec!r} for {label!r}") from None
    return parts


def _check_keys(name, section, allowed):
    for key in section:
        if key not in allowed:
            raise ConfigurationError(f"unknown [{name}] key {key!r}")


def _parse_system(section):
    _check_keys("system", section, set(_SYSTEM_KEYS))
    vals = {k: _parse_float(section, k, d) for k, d in _SYSTEM_KEYS.items()}
    return SystemParams.from_detunings(
        omega0=vals["omega0"], delta_a=vals["delta_a"], delta_b=vals["delta_b"],
        delta1=vals["delta1"], delta2=vals["delta2"],
        lambda_a=vals["lambda_a"], lambda_b=vals["lambda_b"] or 0.0,
        Omega1_mag=vals["Omega1"] or 0.0, Omega2_mag=vals["Omega2"] or 0.0,
        phi1=vals["phi1"], phi2=vals["phi2"],
        Gamma_f=vals["Gamma_f"] or 0.0, Gamma_a=vals["Gamma_a"] or 0.0)


def _parse_integrator(section):
    _check_keys("integrator", section,
                {"method", "dt", "rel_tol", "abs_tol", "dt_max", "t_final",
                 "samples", "renormalize", "backend"})
    method = (section.get("method", METHOD_FIXED) or METHOD_FIXED).strip()
    t_final = _parse_float(section, "t_final")
    if t_final is None or t_final <= 0:
        raise ConfigurationError("[integrator] t_final must be > 0")
    samples = _parse_int(section, "samples", 201)
    if samples < 2:
        raise ConfigurationError("[integrator] samples must be >= 2")
    grid = np.linspace(0.0, t_final, samples)
    return IntegratorConfig(
        method=method,
        dt=_parse_float(section, "dt"),
        rel_tol=_parse_float(section, "rel_tol", 1e-10),
        abs_tol=_parse_float(section, "abs_tol", 1e-12),
        dt_max=_parse_float(section, "dt_max"),
        t_grid=grid,
        renormalize=_parse_bool(section, "renormalize", False),
        backend=(section.get("backend", None) or None))


def load_scenario_text(text, name_hint="<inline>"):
    """Parse INI text into a validated ScenarioConfig."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"config parse error: {exc}") from None
    for sec in cp.sections():
        if sec not in ("system", "scenario", "integrator", "schedule", "output"):
            raise ConfigurationError(f"unknown section [{sec}]")
    if not cp.has_section("scenario"):
        raise ConfigurationError("missing [scenario] section")
    if not cp.has_section("integrator"):
        raise ConfigurationError("missing [integrator] section")

    params = _parse_system(cp["system"] if cp.has_section("system") else {})
    scen = cp["scenario"]
    _check_keys("scenario", scen,
                {"name", "description", "model", "initial_state", "cutoff_a",
                 "cutoff_b", "chi"})
    name = (scen.get("name", "") or name_hint).strip()
    model = (scen.get("model", "") or "").strip()
    if not model:
        raise ConfigurationError("[scenario] model is required")
    if model not in MODELS and not model.startswith("effective:"):
        raise ConfigurationError(f"unknown model {model!r}")

    cutoff_a = _parse_int(scen, "cutoff_a")
    if cutoff_a is None or cutoff_a < 2:
        raise ConfigurationError("[scenario] cutoff_a must be an int >= 2")
    cutoff_b = _parse_int(scen, "cutoff_b")
    if cutoff_b is not None and cutoff_b < 2:
        raise ConfigurationError("[scenario] cutoff_b must be >= 2")

    integrator = _parse_integrator(cp["integrator"])

    schedule = None
    if cp.has_section("schedule"):
        _check_keys("schedule", cp["schedule"], {"tau", "n_cycles"})
        tau = _parse_float(cp["schedule"], "tau")
        n_cycles = _parse_int(cp["schedule"], "n_cycles")
        if tau is None or n_cycles is None:
            raise ConfigurationError("[schedule] needs tau and n_cycles")
        schedule = PulseSchedule(tau=tau, n_cycles=n_cycles)
    if model == "pulsed-jc-ajc" and schedule is None:
        raise ConfigurationError("pulsed-jc-ajc requires a [schedule] section")
    if model != "pulsed-jc-ajc" and schedule is not None:
        raise ConfigurationError("[schedule] only applies to pulsed-jc-ajc")

    columns = CSV_COLUMNS
    output_path = None
    if cp.has_section("output"):
        _check_keys("output", cp["output"], {"columns", "path"})
        raw_cols = cp["output"].get("columns", None)
        if raw_cols and raw_cols.strip():
            columns = tuple(c.strip() for c in raw_cols.split(",") if c.strip())
            bad = [c for c in columns if c not in CSV_COLUMNS]
            if bad:
                raise ConfigurationError(f"unknown output columns {bad}")
            if "time" not in columns:
                raise ConfigurationError("output columns must include 'time'")
        output_path = cp["output"].get("path", None) or None

    cfg = ScenarioConfig(
        name=name, description=(scen.get("description", "") or "").strip(),
        params=params, model=model,
        initial_state=parse_initial_state(scen.get("initial_state", "vacuum")),
        cutoff_a=cutoff_a, cutoff_b=cutoff_b, integrator=integrator,
        columns=columns, output_path=output_path, schedule=schedule,
        chi=_parse_float(scen, "chi"))
    validate_scenario(cfg)
    return cfg


def load_scenario_file(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path!r}: {exc}") from None
    import os
    hint = os.path.splitext(os.path.basename(path))[0]
    return load_scenario_text(text, name_hint=hint)


def scenario_has_atom(model):
    """Whether the model's simulation space carries the atom factor.

    Effective field Hamiltonians act after the atomic branch is chosen,
    so their spaces are field-only; everything else keeps the atom.
    """
    return not model.startswith("effective:")


def validate_scenario(cfg):
    """Cross-field checks beyond per-key parsing."""
    needs_b = (cfg.model.startswith("effective:pdc")
               or cfg.model.startswith("effective:puc")
               or cfg.params.lambda_b > 0)
    if needs_b and cfg.cutoff_b is None:
        raise ConfigurationError(
            f"model {cfg.model!r} involves mode 'b'; set cutoff_b")
    if cfg.model.startswith("effective:"):
        cfg.effective_selector()
    labels = {"a"}
    if cfg.cutoff_b is not None:
        labels.add("b")
    if scenario_has_atom(cfg.model):
        labels.add("atom")
    for label in cfg.initial_state:
        if label not in labels:
            raise ConfigurationError(
                f"initial state references unknown factor {label!r}")
    if cfg.model in ("sss", "ajc", "pulsed-jc-ajc") and cfg.params.Omega2_mag == 0:
        raise ConfigurationError(f"model {cfg.model!r} requires a second drive")
