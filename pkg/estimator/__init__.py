from estimator.conditional import (
    ConditionalRisk,
    bias2_conditional,
    conditional_risk,
    expected_bias2_est_given_x,
    expected_bias2_pred_given_x,
    fit,
    var_est_conditional,
    var_pred_conditional,
)
from estimator.alignment import AlignmentMatrix, alignment_from_bases, alignment_matrix
