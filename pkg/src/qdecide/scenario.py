"""Scenario files (TOML) and the bundled example scenarios."""

from __future__ import annotations

import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .circuit_lang import parse_circuit
from .decision import CRITERIA, ActionSpec, DecisionProblem
from .errors import ParseDiagnostic, ValidationError
from .noise import NoiseModel
from .reward_lang import evaluate_parameters, parse_reward

BUNDLED = ("umbrella-simple", "umbrella-wait", "jacket-entangled")

_SCENARIO_KEYS = {"name", "qubits", "shots", "seed", "noise_p", "criterion", "nature_bits"}


@dataclass(frozen=True, eq=False)
class Scenario:
    problem: DecisionProblem
    criterion: str = "bayes"
    source: str = "<string>"

    @property
    def name(self) -> str:
        return self.problem.name


def bundled_path(name: str):
    if name not in BUNDLED:
        raise ValidationError(f"no bundled scenario {name!r}; choose from {', '.join(BUNDLED)}")
    return resources.files("qdecide").joinpath("scenarios", f"{name}.toml")


def bundled_text(name: str) -> str:
    return bundled_path(name).read_text(encoding="utf-8")


def _require(table: Mapping, key: str, section: str, kind):
    if key not in table:
        raise ValidationError(f"[{section}]: missing key {key!r}")
    value = table[key]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ValidationError(f"[{section}]: {key!r} has the wrong type ({type(value).__name__})")
    return value


def parse_scenario(text: str, *, source: str = "<string>", overrides: Mapping[str, float | str] | None = None) -> Scenario:
    """Build a scenario from TOML text.

    ``overrides`` replace parameter definitions before anything is evaluated.
    """
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"{source}: invalid TOML: {exc}") from None

    unknown = set(data) - {"scenario", "params", "action"}
    if unknown:
        raise ValidationError(f"unknown section(s): {', '.join(sorted(unknown))}")
    head = data.get("scenario")
    if not isinstance(head, dict):
        raise ValidationError("missing [scenario] section")
    extra = set(head) - _SCENARIO_KEYS
    if extra:
        raise ValidationError(f"[scenario]: unknown key(s) {', '.join(sorted(extra))}")

    n_qubits = _require(head, "qubits", "scenario", int)
    criterion = head.get("criterion", "bayes")
    if criterion not in CRITERIA:
        raise ValidationError(f"[scenario]: criterion must be one of {', '.join(CRITERIA)}")
    nature_bits = head.get("nature_bits", [])
    if not isinstance(nature_bits, list) or not all(isinstance(b, int) for b in nature_bits):
        raise ValidationError("[scenario]: nature_bits must be a list of qubit indices")

    params = dict(data.get("params", {}))
    if overrides:
        unknown = set(overrides) - set(params)
        if unknown:
            raise ValidationError(f"unknown parameter(s): {', '.join(sorted(unknown))}")
        params.update(overrides)
    try:
        bindings = evaluate_parameters(params)
    except ParseDiagnostic as diag:
        raise ValidationError(f"[params]: {diag}") from None

    actions_table = data.get("action")
    if not isinstance(actions_table, dict) or not actions_table:
        raise ValidationError("at least one [action.<name>] section is required")
    actions = []
    for name, table in actions_table.items():
        section = f"action.{name}"
        if not isinstance(table, dict):
            raise ValidationError(f"[{section}] must be a table")
        extra = set(table) - {"circuit", "reward"}
        if extra:
            raise ValidationError(f"[{section}]: unknown key(s) {', '.join(sorted(extra))}")
        circuit_text = _require(table, "circuit", section, str)
        reward_text = _require(table, "reward", section, str)
        try:
            parse_circuit(circuit_text, bindings, n_qubits=n_qubits)
        except ParseDiagnostic as diag:
            raise ParseDiagnostic(diag.kind, f"[{section}] circuit: {diag.message}", diag.line, diag.column) from None
        try:
            reward = parse_reward(reward_text)
        except ParseDiagnostic as diag:
            raise ParseDiagnostic(diag.kind, f"[{section}] reward: {diag.message}", diag.line, diag.column) from None
        missing = reward.parameters - set(bindings) - {"pi"}
        if missing:
            raise ValidationError(f"[{section}] reward: unbound parameter(s) {', '.join(sorted(missing))}")
        # Keep the text so parameter overrides re-derive circuit angles.
        actions.append(ActionSpec(name, circuit_text, reward))

    try:
        problem = DecisionProblem(
            n_qubits=n_qubits,
            actions=actions,
            params=params,
            shots=head.get("shots", 1024),
            seed=head.get("seed", 0),
            noise=NoiseModel(head.get("noise_p", 0.0)),
            nature_bits=tuple(nature_bits),
            name=head.get("name", Path(source).stem),
        )
        problem.resolved
    except ValidationError as exc:
        raise ValidationError(f"[scenario]: {exc}") from None
    return Scenario(problem, criterion, source)


def load_scenario(path_or_name: str | Path, *, overrides: Mapping[str, float | str] | None = None) -> Scenario:
    """Load a scenario file, or a bundled scenario by name."""
    path = Path(path_or_name)
    if not path.exists() and str(path_or_name) in BUNDLED:
        return parse_scenario(bundled_text(str(path_or_name)), source=str(path_or_name), overrides=overrides)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read scenario {str(path)!r}: {exc.strerror}") from None
    return parse_scenario(text, source=str(path), overrides=overrides)
