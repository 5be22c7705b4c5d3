from .acpf import (
    BranchFlows,
    PfState,
    base_injections,
    branch_flows,
    branch_flows_batch,
    flat_start,
    injection_vector,
    injections_batch,
    jacobian,
    mismatch,
    newton_raphson,
    power_injections,
    solve_unknowns,
    state_from_unknowns,
    states_from_unknowns,
    unknowns_from_state,
)
from .linmodels import (
    AffineModel,
    DlpfBlocks,
    Provenance,
    dlpf_blocks,
    init_jacobian,
    init_linearized_pf,
    predict,
    ridge_fit,
    ridge_gradients,
    ridge_objective,
)
from .numerics import (
    Bernoulli,
    Beta,
    StdNormal,
    Weibull,
    cholesky,
    lu_solve,
    make_rng,
    nearest_psd,
    pinv,
    sample,
    transform_uniform,
    worker_rng,
)

__all__ = [
    'AffineModel',
    'Bernoulli',
    'Beta',
    'BranchFlows',
    'DlpfBlocks',
    'PfState',
    'Provenance',
    'StdNormal',
    'Weibull',
    'base_injections',
    'branch_flows',
    'branch_flows_batch',
    'cholesky',
    'dlpf_blocks',
    'flat_start',
    'init_jacobian',
    'init_linearized_pf',
    'injection_vector',
    'injections_batch',
    'jacobian',
    'lu_solve',
    'make_rng',
    'mismatch',
    'nearest_psd',
    'newton_raphson',
    'pinv',
    'power_injections',
    'predict',
    'ridge_fit',
    'ridge_gradients',
    'ridge_objective',
    'sample',
    'solve_unknowns',
    'state_from_unknowns',
    'states_from_unknowns',
    'transform_uniform',
    'unknowns_from_state',
    'worker_rng',
]
