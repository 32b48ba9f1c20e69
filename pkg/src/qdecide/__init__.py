"""Decision making under uncertainty with small simulated quantum circuits."""

from .circuit_lang import format_circuit, parse_circuit, validate_circuit
from .decision import (
    ActionEstimate,
    ActionSpec,
    DecisionProblem,
    DecisionReport,
    bayes_decide,
    decide,
    evaluate_action,
    max_likelihood_decide,
    maximin_decide,
    pr_to_tau,
    sweep,
)
from .errors import CapacityError, ParseDiagnostic, QDecideError, ValidationError
from .noise import NoiseModel, exact_noisy_distribution, noisy_empirical_distribution, sample_noisy_outcome
from .reward_lang import RewardExpr, eval_reward, expected_reward, parse_reward, reward_variance
from .scenario import Scenario, load_scenario, parse_scenario
from .statevector import (
    Circuit,
    Gate,
    OutcomeDistribution,
    QuantumState,
    apply_gate,
    exact_distribution,
    init_state,
    run_circuit,
    sample_outcomes,
)

__version__ = "0.1.0"
