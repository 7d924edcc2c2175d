from .hypothesis import Hypothesis, evaluate_codes
from .learners import (
    EMResult,
    LabelPrivateResult,
    PacReport,
    Sampler,
    dist_specific_learner,
    label_private_learner,
    label_private_unlabeled_size,
    make_agnostic_oracle,
    make_oracle,
    pac_evaluate,
    prdim_learner,
)
from .linelearn import (
    LineLearnerConfig,
    LineReleaseStage,
    bad_log_t_values,
    boost_runs,
    boost_selection_samples,
    freq_and_instability,
    freq_and_instability_codes,
    line_basic_learner,
    line_boosted_learner,
    line_overall_learner,
    release_probability,
    stability_probs,
)
from .mechanisms import em_probabilities, exponential_mechanism, laplace_sample, laplace_sf

__all__ = [
    "Hypothesis", "evaluate_codes", "EMResult", "LabelPrivateResult", "PacReport", "Sampler",
    "dist_specific_learner", "label_private_learner", "label_private_unlabeled_size", "make_agnostic_oracle", "make_oracle",
    "pac_evaluate", "prdim_learner", "LineLearnerConfig", "LineReleaseStage", "bad_log_t_values",
    "boost_runs", "boost_selection_samples", "freq_and_instability", "freq_and_instability_codes",
    "line_basic_learner", "line_boosted_learner", "line_overall_learner", "release_probability",
    "stability_probs", "em_probabilities", "exponential_mechanism", "laplace_sample", "laplace_sf",
]
