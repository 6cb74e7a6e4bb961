from experiments.config import ConfigError, ExperimentConfig, build_config, read_config_file, validate
from experiments.replicas import ReplicaRecord, log_checkpoints, run_replicas
from experiments.reporting import summary_document, write_summary, write_table
from experiments.runs import (
    RunResult,
    run_coupling,
    run_equilibria,
    run_flow,
    run_nonconvergence,
    run_rate,
    run_recurrence,
    run_simulate,
    run_sweep,
    run_transience,
)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "build_config",
    "read_config_file",
    "validate",
    "ReplicaRecord",
    "log_checkpoints",
    "run_replicas",
    "summary_document",
    "write_summary",
    "write_table",
    "RunResult",
    "run_coupling",
    "run_equilibria",
    "run_flow",
    "run_nonconvergence",
    "run_rate",
    "run_recurrence",
    "run_simulate",
    "run_sweep",
    "run_transience",
]
