from .dataset import Dataset, generate_dataset, injection_columns, solve_batch, split_indices, unknown_columns
from .density import KdeCurve, kde, kde_curve, kde_grid, silverman_bandwidth
from .mcs import McsResult, run_mcs, solver_name
from .metrics import armse, awd, mape, wasserstein_1d
from .report import PpfReport, build_report, paired_deltas, quantity_values, validate_report, write_report, write_timing
from .risk import (
    Limit,
    ViolationRecord,
    build_limits,
    limit_matrix,
    records_frame,
    required_samples,
    risk_assess,
    samples_to_converge,
    variance_coefficient,
    variance_coefficient_scan,
)
from .scenario import (
    BetaUnit,
    GaussianGroup,
    OutageUnit,
    ScenarioSpec,
    WeibullUnit,
    correlation_factor,
    correlation_matrix,
    sample_injections,
    uniform_matrix,
)

__all__ = [
    'BetaUnit',
    'Dataset',
    'GaussianGroup',
    'KdeCurve',
    'Limit',
    'McsResult',
    'OutageUnit',
    'PpfReport',
    'ScenarioSpec',
    'ViolationRecord',
    'WeibullUnit',
    'armse',
    'awd',
    'build_limits',
    'build_report',
    'correlation_factor',
    'correlation_matrix',
    'generate_dataset',
    'injection_columns',
    'kde',
    'kde_curve',
    'kde_grid',
    'limit_matrix',
    'mape',
    'paired_deltas',
    'quantity_values',
    'records_frame',
    'required_samples',
    'risk_assess',
    'run_mcs',
    'sample_injections',
    'samples_to_converge',
    'silverman_bandwidth',
    'solve_batch',
    'solver_name',
    'split_indices',
    'uniform_matrix',
    'unknown_columns',
    'validate_report',
    'variance_coefficient',
    'variance_coefficient_scan',
    'wasserstein_1d',
    'write_report',
    'write_timing',
]
