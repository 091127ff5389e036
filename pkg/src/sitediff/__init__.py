"""Discrete denoising diffusion over finite alphabets via single-site conditionals.

Round-robin noising perturbs one coordinate per step; the reverse chain is
parameterized entirely by learned (or exact) single-site conditionals.
Brute-force tables, exact Bayes reversal, and numerical checks of the TV
error bounds are available for enumerable models.
"""

from .core import (
    EmpiricalDistribution,
    ExactDistribution,
    SampleSet,
    StateSpaceTooLargeError,
    decode_config,
    empirical_from_samples,
    encode_config,
    load_samples,
    save_samples,
)
from .forward import NoiseSchedule, coordinate_at, mixing_tv, push_forward_exact
from .metrics import cross_correlation, cross_correlation_error, mmd, tv
from .models import (
    EAParams,
    IsingModel,
    PottsModel,
    ea_ising,
    ea_potts,
    energy,
    exact_conditional,
    exact_distribution,
    load_model,
    sample_exact,
    sample_glauber,
    save_model,
)
from .neurise import (
    ConditionalModel,
    TrainConfig,
    load_checkpoint,
    neurise_loss,
    random_search,
    save_checkpoint,
    train,
)
from .reverse import (
    ConditionalOracle,
    ExactMarginalOracle,
    autoregressive_sample,
    reverse_pushforward_exact,
    reverse_sample,
)
from .theory import (
    BoundReport,
    Perturbation,
    degenerate_reverse_demo,
    verify_error_bound,
    verify_init_error,
)

__version__ = "0.1.0"
