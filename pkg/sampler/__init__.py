from sampler.streams import RandomStream
from sampler.draws import (
    Dataset,
    DesignSampler,
    draw_dataset,
    gaussian_design,
    haar_orthogonal,
    make_dataset,
    sample_beta,
    sample_beta_weighted,
    sample_noise,
)
