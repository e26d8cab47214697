from asymptotics.stieltjes import (
    AsymptoticResult,
    SpectrumMeasure,
    StarBounds,
    isotropic_s_star,
    limit_estimation_risk,
    limit_risk_curve,
    s_star_bounds,
    solve_s_star,
    stieltjes_rhs,
)
