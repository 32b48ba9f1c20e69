"""Decision problems: per-action reward estimates and the three choice criteria."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import cached_property, lru_cache
from typing import Mapping, Sequence

import numpy as np

from .circuit_lang import check_circuit, parse_circuit
from .errors import ValidationError
from .noise import NoiseModel, exact_noisy_distribution, noisy_empirical_distribution
from .reward_lang import RewardExpr, evaluate_parameters, parse_reward, reward_moments, support_rewards
from .statevector import (
    MAX_QUBITS,
    Circuit,
    OutcomeDistribution,
    check_shots,
    circuit_distribution,
    derive_seed,
    run_circuit,
    sample_outcomes,
)

MODES = ("exact", "sampled", "noisy-sampled", "noisy-exact")
CRITERIA = ("bayes", "maximin", "max-likelihood")

EXACT_TIE_TOL = 1e-12
SUPPORT_THRESHOLD = 1e-12


def pr_to_tau(p_r: float) -> float:
    """Rotation angle whose ``sin^2(tau/2)`` equals the rain probability."""
    if not 0.0 <= p_r <= 1.0:
        raise ValidationError(f"probability must lie in [0, 1], got {p_r!r}")
    return 2.0 * math.asin(math.sqrt(p_r))


@dataclass(frozen=True)
class ActionSpec:
    """An alternative: a circuit (or circuit text) and its reward expression."""

    name: str
    circuit: Circuit | str
    reward: RewardExpr | str


@dataclass(frozen=True)
class ResolvedAction:
    name: str
    circuit: Circuit
    reward: RewardExpr


@dataclass(frozen=True, eq=False)
class DecisionProblem:
    """Actions sharing one qubit register, parameter definitions and run settings.

    ``params`` maps names to numbers or expression text over earlier names;
    circuit text in actions is parsed against the resolved values, so
    overriding a parameter re-derives everything downstream of it.
    """

    n_qubits: int
    actions: Sequence[ActionSpec]
    params: Mapping[str, float | str] = field(default_factory=dict)
    shots: int = 1024
    seed: int = 0
    noise: NoiseModel = NoiseModel()
    nature_bits: tuple[int, ...] = ()
    name: str = "problem"

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))
        object.__setattr__(self, "params", dict(self.params))
        object.__setattr__(self, "nature_bits", tuple(int(b) for b in self.nature_bits))
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ValidationError(f"qubit count must be between 1 and {MAX_QUBITS}")
        if not self.actions:
            raise ValidationError("a decision problem needs at least one action")
        names = [a.name for a in self.actions]
        if len(set(names)) != len(names):
            raise ValidationError(f"action names must be unique, got {names}")
        bad = [b for b in self.nature_bits if not 0 <= b < self.n_qubits]
        if bad or len(set(self.nature_bits)) != len(self.nature_bits):
            raise ValidationError(f"nature bits {list(self.nature_bits)} invalid for {self.n_qubits} qubit(s)")
        check_shots(self.shots)
        if not isinstance(self.seed, (int, np.integer)) or isinstance(self.seed, bool) or self.seed < 0:
            raise ValidationError(f"seed must be a non-negative integer, got {self.seed!r}")

    @cached_property
    def bindings(self) -> dict[str, float]:
        return evaluate_parameters(self.params)

    @cached_property
    def resolved(self) -> tuple[ResolvedAction, ...]:
        out = []
        for spec in self.actions:
            circuit = spec.circuit
            if isinstance(circuit, str):
                circuit = parse_circuit(circuit, self.bindings, n_qubits=self.n_qubits)
            check_circuit(circuit)
            if circuit.n_qubits != self.n_qubits:
                raise ValidationError(
                    f"action {spec.name!r} has {circuit.n_qubits} qubits, problem has {self.n_qubits}"
                )
            reward = parse_reward(spec.reward) if isinstance(spec.reward, str) else spec.reward
            if reward.bit_indices and max(reward.bit_indices) >= self.n_qubits:
                raise ValidationError(f"action {spec.name!r} reward uses s{max(reward.bit_indices)}")
            out.append(ResolvedAction(spec.name, circuit, reward))
        return tuple(out)

    def action_index(self, name: str) -> int:
        for k, spec in enumerate(self.actions):
            if spec.name == name:
                return k
        raise ValidationError(f"no action named {name!r}")

    def with_params(self, overrides: Mapping[str, float | str]) -> DecisionProblem:
        unknown = set(overrides) - set(self.params)
        if unknown:
            raise ValidationError(f"unknown parameter(s): {', '.join(sorted(unknown))}")
        params = dict(self.params)
        params.update(overrides)
        return replace(self, params=params)


@dataclass(frozen=True, eq=False)
class ActionEstimate:
    action: str
    mode: str
    mean: float
    variance: float
    std_error: float
    shots: int
    distribution: OutcomeDistribution = field(repr=False)

    @property
    def std_dev(self) -> float:
        return math.sqrt(self.variance)


@dataclass(frozen=True, eq=False)
class DecisionReport:
    criterion: str
    mode: str
    estimates: tuple[ActionEstimate, ...]
    scores: dict[str, float]
    chosen: str
    tie: bool
    nature: tuple[int, ...] | None = None
    warnings: tuple[str, ...] = ()

    def estimate(self, action: str) -> ActionEstimate:
        for est in self.estimates:
            if est.action == action:
                return est
        raise KeyError(action)


@lru_cache(maxsize=1024)
def _noisy_exact(circuit: Circuit, noise: NoiseModel) -> OutcomeDistribution:
    return exact_noisy_distribution(circuit, noise)


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ValidationError(f"mode must be one of {', '.join(MODES)}, got {mode!r}")


def action_distribution(problem: DecisionProblem, index: int, mode: str, seed_path: tuple[int, ...] = ()):
    action = problem.resolved[index]
    seed = derive_seed(problem.seed, *seed_path, index)
    if mode == "exact":
        return circuit_distribution(action.circuit)
    if mode == "sampled":
        return sample_outcomes(run_circuit(action.circuit), problem.shots, seed)
    if mode == "noisy-exact":
        return _noisy_exact(action.circuit, problem.noise)
    return noisy_empirical_distribution(action.circuit, problem.noise, problem.shots, seed)


def evaluate_action(
    problem: DecisionProblem, action: ActionSpec | str, mode: str = "exact", *, seed_path: tuple[int, ...] = ()
) -> ActionEstimate:
    """Estimate one action's reward.

    The standard error is ``sqrt(variance / shots)`` in every mode; for the
    exact modes this is the spread a run of ``shots`` samples would show.
    """
    _check_mode(mode)
    index = problem.action_index(action if isinstance(action, str) else action.name)
    resolved = problem.resolved[index]
    dist = action_distribution(problem, index, mode, seed_path)
    mean, var = reward_moments(dist, resolved.reward, problem.bindings)
    return ActionEstimate(resolved.name, mode, mean, var, math.sqrt(var / problem.shots), problem.shots, dist)


def evaluate_actions(
    problem: DecisionProblem, mode: str = "exact", *, seed_path: tuple[int, ...] = (), workers: int = 1
) -> tuple[ActionEstimate, ...]:
    def one(spec):
        return evaluate_action(problem, spec.name, mode, seed_path=seed_path)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return tuple(pool.map(one, problem.actions))
    return tuple(one(spec) for spec in problem.actions)


def _argmax(names: Sequence[str], scores: Sequence[float], tol: float) -> tuple[str, bool]:
    best = max(scores)
    tied = [n for n, s in zip(names, scores) if s >= best - tol]
    return tied[0], len(tied) > 1


def bayes_decide(
    problem: DecisionProblem, mode: str = "exact", *, seed_path: tuple[int, ...] = (), workers: int = 1
) -> DecisionReport:
    """Choose the action with the highest expected reward."""
    estimates = evaluate_actions(problem, mode, seed_path=seed_path, workers=workers)
    scores = {e.action: e.mean for e in estimates}
    tol = EXACT_TIE_TOL if mode in ("exact", "noisy-exact") else 0.0
    chosen, tie = _argmax(list(scores), list(scores.values()), tol)
    return DecisionReport("bayes", mode, estimates, scores, chosen, tie)


def maximin_decide(problem: DecisionProblem) -> DecisionReport:
    """Choose the action whose worst reward over possible outcomes is largest."""
    estimates = evaluate_actions(problem, "exact")
    scores = {}
    for action, est in zip(problem.resolved, estimates):
        _, probs, rewards = support_rewards(est.distribution, action.reward, problem.bindings)
        scores[action.name] = float(rewards[probs > SUPPORT_THRESHOLD].min())
    chosen, tie = _argmax(list(scores), list(scores.values()), EXACT_TIE_TOL)
    return DecisionReport("maximin", "exact", estimates, scores, chosen, tie)


def _nature_codes(n_qubits: int, nature_bits: Sequence[int]) -> np.ndarray:
    idx = np.arange(2**n_qubits)
    codes = np.zeros_like(idx)
    for j, bit in enumerate(nature_bits):
        codes |= ((idx >> bit) & 1) << j
    return codes


def nature_marginal(dist: OutcomeDistribution, nature_bits: Sequence[int]) -> np.ndarray:
    """Probabilities of nature assignments, indexed by ``sum(bit_j << j)``."""
    codes = _nature_codes(dist.n_qubits, nature_bits)
    return np.bincount(codes, weights=dist.probabilities, minlength=2 ** len(nature_bits))


def max_likelihood_decide(problem: DecisionProblem) -> DecisionReport:
    """Fix the most likely nature assignment, then pick the best action under it.

    The nature marginal comes from the first action, since nature's evolution
    does not depend on the decision. Ties go to the lowest encoding.
    """
    if not problem.nature_bits:
        raise ValidationError("the max-likelihood criterion needs nature_bits")
    estimates = evaluate_actions(problem, "exact")
    marginal = nature_marginal(estimates[0].distribution, problem.nature_bits)
    code = int(np.flatnonzero(marginal >= marginal.max() - EXACT_TIE_TOL)[0])
    nature = tuple((code >> j) & 1 for j in range(len(problem.nature_bits)))
    codes = _nature_codes(problem.n_qubits, problem.nature_bits)
    scores, warnings = {}, []
    for action, est in zip(problem.resolved, estimates):
        idx, probs, rewards = support_rewards(est.distribution, action.reward, problem.bindings)
        mask = codes[idx] == code
        weight = probs[mask].sum()
        if weight <= SUPPORT_THRESHOLD:
            scores[action.name] = -math.inf
            warnings.append(f"action {action.name!r} gives the most likely nature state zero probability")
        else:
            scores[action.name] = float(np.dot(probs[mask], rewards[mask]) / weight)
    chosen, tie = _argmax(list(scores), list(scores.values()), EXACT_TIE_TOL)
    return DecisionReport("max-likelihood", "exact", estimates, scores, chosen, tie, nature, tuple(warnings))


def decide(
    problem: DecisionProblem, criterion: str = "bayes", mode: str = "exact", *, seed_path: tuple[int, ...] = ()
) -> DecisionReport:
    if criterion == "bayes":
        return bayes_decide(problem, mode, seed_path=seed_path)
    if criterion == "maximin":
        return maximin_decide(problem)
    if criterion == "max-likelihood":
        return max_likelihood_decide(problem)
    raise ValidationError(f"criterion must be one of {', '.join(CRITERIA)}, got {criterion!r}")


@dataclass(frozen=True, eq=False)
class SweepPoint:
    value: float
    report: DecisionReport


def sweep(
    problem: DecisionProblem, param_name: str, grid: Sequence[float], mode: str = "exact", criterion: str = "bayes"
) -> list[SweepPoint]:
    """Re-decide at every grid value of one parameter.

    Derived parameters and circuit angles are re-evaluated per point; sampled
    modes use seeds derived from ``(seed, grid index, action index)``.
    """
    if param_name not in problem.params:
        raise ValidationError(f"unknown parameter {param_name!r}")
    _check_mode(mode)
    points = []
    for k, value in enumerate(grid):
        point = problem.with_params({param_name: float(value)})
        points.append(SweepPoint(float(value), decide(point, criterion, mode, seed_path=(k,))))
    return points
