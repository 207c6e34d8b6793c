"""weaksynth: synthesize weak-supervision votes into probabilistic labels.

The pipeline: load or generate a sparse vote matrix, decide whether a
generative model beats plain majority vote, optionally learn which
source pairs to model as correlated, fit the model without any gold
labels, emit per-example positive-class probabilities, and train a
noise-aware linear classifier on them.
"""

from .advantage import (
    AdvantageReport,
    GenerativeModel,
    MajorityVote,
    ModelingStrategy,
    OptimizerConfig,
    advantage_bound,
    choose_strategy,
    empirical_advantage,
    high_density_bound,
    low_density_bound,
    majority_vote,
    weighted_vote,
)
from .genmodel import (
    CorrelationSet,
    FitConfig,
    GenerativeParams,
    ProbLabels,
    accuracy_to_weight,
    exact_marginal_loglik,
    factor_values,
    fit_gibbs_sgd,
    fit_independent_exact,
    load_params,
    posterior_gibbs,
    posterior_independent,
    save_params,
    weight_to_accuracy,
)
from .labelmatrix import (
    GoldLabels,
    LabelMatrix,
    MatrixStats,
    class_counts,
    load_gold,
    load_matrix,
    save_gold,
    save_matrix,
    stats,
)
from .noiseaware import DiscModel, noise_aware_loss, predict, train
from .structlearn import (
    SweepPoint,
    SweepResult,
    learn_structure,
    select_elbow,
    sweep,
)
from .synthgen import SynthConfig, advantage_density_grid, generate

__version__ = "0.1.0"
