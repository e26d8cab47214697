from risk.montecarlo import (
    DesignPass,
    McConfig,
    McEstimate,
    Target,
    agree_within,
    map_designs,
    mc_expected_bias2,
    mc_expected_variance,
    run_design_pass,
    summarize,
)
from risk.theory import (
    design_trace_factor,
    esd_inverse_moment,
    expected_esd_inverse_moment,
    isotropic_trace_oracle,
    theory_bias2,
    theory_bias2_exact_pred,
    theory_expected_variance,
)
from risk.report import RiskReport, full_report
