"""
The five reference states
=========================

For each target direction, this compares the quantum Fisher information
of the uncorrelated and correlated registers in two ways: with optimal
(SLD) observables, and with the quadrature observables that tomography
actually measures. All values are in units of eps_a1^2.
"""

# %%
from starqfi.io import get_or_optimize_ut
from starqfi.states import StrConfig
from starqfi.sweeps import REFERENCE_TABLE, table2_pipeline
from starqfi.tomography import OptimizerConfig

cfg = StrConfig.from_gamma_ratio(4, 1e-3)
rows = table2_pipeline(cfg, ut=get_or_optimize_ut(cfg, OptimizerConfig()))

print(f"{'state':<20}{'SLD unc':>10}{'SLD cor':>10}{'amp':>8}{'QST unc':>10}{'QST cor':>10}{'amp':>8}")
for r in rows:
    amp = lambda x: "-" if x is None else f"{x:.1f}"
    print(
        f"{r.state_label:<20}{r.sld_qfi_uncorrelated:>10.4f}{r.sld_qfi_correlated:>10.3f}{amp(r.sld_amplification):>8}"
        f"{r.qst_qfi_uncorrelated:>10.4f}{r.qst_qfi_correlated:>10.4f}{amp(r.qst_amplification):>8}"
    )

# %%
# The SLD columns and the uncorrelated QST column can be compared directly
# with the reference values. The correlated QST column depends on the
# read-out circuit, and the reference circuit is not available, so only its order of
# magnitude is comparable.
for r in rows[1:]:
    ref = REFERENCE_TABLE[r.state_label]
    print(f"{r.state_label:<20} reference SLD cor {ref['sld_cor']}, QST unc {ref['qst_unc']}, QST cor {ref['qst_cor']}")
