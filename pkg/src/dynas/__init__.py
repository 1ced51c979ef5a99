"""Switch-once dynamic algorithm selection for (mu+lambda) GAs on
pseudo-Boolean benchmark problems."""

from .config import AlgorithmConfig, parse_config_name, portfolio
from .ert import ErtTable, build_ert_table, ert, fixed_target_curve
from .ga import Population, run_ga
from .prediction import (best_dynamic, best_static, generate_targets, predicted_ert,
                         rank_policies)
from .problems import ProblemInstance, evaluate, make_problem
from .runlog import RunLog, parse_run, write_run
from .switching import SwitchPolicy, handoff_population, run_dyn_ga

__all__ = [
    "AlgorithmConfig", "ErtTable", "Population", "ProblemInstance", "RunLog", "SwitchPolicy",
    "best_dynamic", "best_static", "build_ert_table", "ert", "evaluate", "fixed_target_curve",
    "generate_targets", "handoff_population", "make_problem", "parse_config_name",
    "parse_run", "portfolio", "predicted_ert", "rank_policies", "run_dyn_ga", "run_ga",
    "write_run",
]
