import logging
import os
from typing import Callable, Dict, List, NamedTuple

from experiments.config import ExperimentConfig
from experiments.reporting import write_summary, write_table
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

logger = logging.getLogger(__name__)


class Protocol(NamedTuple):
    runner: Callable[[ExperimentConfig], RunResult]
    description: str
    summary_name: str = "summary.json"


PROTOCOLS: Dict[str, Protocol] = {
    "equilibria": Protocol(run_equilibria, "zeros of the mean field, spectra and w*"),
    "simulate": Protocol(run_simulate, "exact simulation of the walk pair with trajectory CSVs"),
    "flow": Protocol(run_flow, "certified RK4 integration of the mean ODE from random starts"),
    "coupling": Protocol(run_coupling, "comparison walk Z_n: drift limit, CLT, excursions, domination"),
    "transience": Protocol(run_transience, "terminal speeds for beta > 2"),
    "recurrence": Protocol(run_recurrence, "returns and scaled excursions for beta in [0, 1]"),
    "rate": Protocol(run_rate, "log-log slope of the distance to the center for beta < 2"),
    "nonconvergence": Protocol(run_nonconvergence, "fraction of replicas near the center for beta > 2"),
    "sweep": Protocol(run_sweep, "equilibria and simulation metrics across a beta grid", "sweep.json"),
}


def run_experiment(config: ExperimentConfig) -> List[str]:
    """Run the configured experiment and write its outputs; returns the written paths."""
    protocol = PROTOCOLS[config.experiment]
    logger.info("running %s (%s)", config.experiment, protocol.description)
    result = protocol.runner(config)

    # outputs land only after the run has finished
    written = [write_table(table, config.out, name) for name, table in sorted(result.tables.items())]
    written.append(write_summary(result.summary, config.out, protocol.summary_name))
    logger.info("%s wrote %d file(s) to %s", config.experiment, len(written), os.path.abspath(config.out))
    return written
