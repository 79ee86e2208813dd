"""Quantum Fisher information and single-shot tomography for star-topology spin registers."""

__version__ = "0.1.0"

from .fisher import (
    DivergentFisherError,
    FisherResult,
    Observable,
    biased_qfi_phi,
    biased_qfi_theta,
    cramer_rao_bound,
    dual_qfi,
    fisher_info,
    outcome_distribution,
    qfi_max,
    quadrature_fi,
    sld,
)
from .states import (
    ACETONITRILE_GAMMA_RATIO,
    BlochAngles,
    Family,
    StateFamily,
    StrConfig,
    purity_factors,
    single_qubit_state,
    str_correlated,
    str_target_rotated,
    str_thermal,
    str_uncorrelated,
)
from .tomography import (
    OptimizerConfig,
    TomographyUnitary,
    constraint_matrix,
    optimize_ut,
    single_qubit_qst,
    str_qst,
)
