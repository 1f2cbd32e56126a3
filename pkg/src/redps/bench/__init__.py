from redps.bench.config import ExperimentConfig, build_config, load_experiment_config
from redps.bench.experiments import ExperimentResult, run_experiment, rows_frame, search_dominating, write_csv
from redps.bench.oracles import OracleValue, oracle_iid_sum, oracle_overshoot, oracle_two_tail
from redps.bench.profile import EfficiencyProfile, report_efficiency_profile, run_efficiency_profile

__all__ = [
    "EfficiencyProfile",
    "ExperimentConfig",
    "ExperimentResult",
    "OracleValue",
    "build_config",
    "load_experiment_config",
    "oracle_iid_sum",
    "oracle_overshoot",
    "oracle_two_tail",
    "report_efficiency_profile",
    "rows_frame",
    "run_efficiency_profile",
    "run_experiment",
    "search_dominating",
    "write_csv",
]
