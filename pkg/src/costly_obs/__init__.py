"""Contextual bandits where each context feature has to be bought before acting."""
from .environment import (
    STOP,
    Environment,
    GenerativeModel,
    OracleResult,
    SeqPolicy,
    SimPolicy,
    SyntheticSpec,
    fixed_set_values,
    load_model,
    make_parity_model,
    make_random_model,
    make_switch_model,
    make_synthetic_medical,
    oracle_seq,
    oracle_sim,
    policy_gain_seq,
    policy_gain_sim,
    save_model,
)
from .estimation import ConfidenceParams, CounterStore, LearnerConfig, conf1, conf2_seq, conf2_sim
from .estimators import ContextualUCB, MetaUCB, SeqOOS, SimOOS
from .harness import ConfigError, ExperimentConfig, load_config, parse_config, run_experiment
from .partial_state import MISSING, StateSpace
from .solver import L1BallProblem, l1_linear_max
from .trace import RunTrace, compute_gain, compute_regret

__version__ = "0.1.0"

__all__ = [
    "STOP",
    "Environment",
    "GenerativeModel",
    "OracleResult",
    "SeqPolicy",
    "SimPolicy",
    "SyntheticSpec",
    "fixed_set_values",
    "load_model",
    "make_parity_model",
    "make_random_model",
    "make_switch_model",
    "make_synthetic_medical",
    "oracle_seq",
    "oracle_sim",
    "policy_gain_seq",
    "policy_gain_sim",
    "save_model",
    "ConfidenceParams",
    "CounterStore",
    "LearnerConfig",
    "conf1",
    "conf2_seq",
    "conf2_sim",
    "ContextualUCB",
    "MetaUCB",
    "SeqOOS",
    "SimOOS",
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "run_experiment",
    "MISSING",
    "StateSpace",
    "L1BallProblem",
    "l1_linear_max",
    "RunTrace",
    "compute_gain",
    "compute_regret",
]
