from models.noise import (
    ClusterGroup,
    NoiseCovariance,
    build_ar1,
    build_ar1_rho2,
    build_clustered,
    build_explicit_noise,
    build_isotropic,
    trace_over_n,
)
from models.features import (
    FeatureModel,
    build_explicit_features,
    build_isotropic_features,
    build_sigma_haar_spectrum,
)
