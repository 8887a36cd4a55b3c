"""Error-probability bounds and receiver simulation for entanglement-based target ranging."""

from .bounds import (
    AdvantageSearch,
    BoundsReport,
    CNParams,
    ScenarioParams,
    advantage_condition,
    advantage_region_search,
    classical_cpf_lower_bound,
    classical_ctr_lower_bound,
    classical_qtr_lower_bound_per_bin,
    cn_error_probability,
    qtr_cn_asymptotic,
    qtr_quantum_ub_asymptotic,
    quantum_cpf_upper_bound_exact,
)
from .cn_sim import CNSimConfig, CNSimResult, simulate_cn, simulate_cn_trial, simulate_qtr_cn
from .exceptions import DomainError, PrecisionError
from .fock import fock_fidelity_oracle
from .gaussian import (
    GaussianState,
    ThermalLossChannel,
    apply_thermal_loss,
    background_output_state,
    gaussian_fidelity,
    target_output_state,
    tmsv_state,
)
from .scenario import (
    EnergyBudget,
    RangeGrid,
    SweepSpec,
    build_range_bins,
    compare_all,
    energy_accounting,
    sweep,
)

__version__ = "0.1.0"
