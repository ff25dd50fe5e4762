"""Reference targets: the Gaussian mixture and the Bayesian logistic-regression posterior."""

from .logistic import (
    LipschitzBounds,
    LogisticGenConfig,
    LogisticTarget,
    OptimalRadius,
    log_p_mu_R_squared,
    logistic_certificate,
    logistic_default_lambda,
    logistic_generate,
    logistic_lipschitz_hessian,
    logistic_m_R,
    logistic_model,
    logistic_mu_R,
    logistic_optimal_R,
)
from .mixture import (
    GaussianMixtureTarget,
    mixture_certificate,
    mixture_cstar,
    mixture_direct_sample,
    mixture_projection_cdf,
    mixture_projection_pdf,
    mixture_vector,
)
from .special import (
    log_tail_fourth_moment,
    log_upper_incomplete_gamma,
    tail_fourth_moment,
    upper_incomplete_gamma,
)

__all__ = [
    "GaussianMixtureTarget",
    "LipschitzBounds",
    "LogisticGenConfig",
    "LogisticTarget",
    "OptimalRadius",
    "log_p_mu_R_squared",
    "log_tail_fourth_moment",
    "log_upper_incomplete_gamma",
    "logistic_certificate",
    "logistic_default_lambda",
    "logistic_generate",
    "logistic_lipschitz_hessian",
    "logistic_m_R",
    "logistic_model",
    "logistic_mu_R",
    "logistic_optimal_R",
    "mixture_certificate",
    "mixture_cstar",
    "mixture_direct_sample",
    "mixture_projection_cdf",
    "mixture_projection_pdf",
    "mixture_vector",
    "tail_fourth_moment",
    "upper_incomplete_gamma",
]
