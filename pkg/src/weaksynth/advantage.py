"""Modeling advantage: when is a learned weighting worth more than
counting votes?

The empirical advantage of a weight vector is the net fraction of data
points where the weighted vote is right and the unweighted majority vote
is wrong or tied, minus the reverse. Two analytic caps bracket its
expectation on synthetic data with known source quality, and a
computable upper bound evaluated on the observed matrix alone drives the
choice between plain majority vote and fitting the generative model.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy.special import expit

from .errors import DimensionError, DomainError
from .genmodel import CorrelationSet, FitConfig
from .labelmatrix import GoldLabels, LabelMatrix

__all__ = [
    "OptimizerConfig",
    "MajorityVote",
    "GenerativeModel",
    "ModelingStrategy",
    "AdvantageReport",
    "majority_vote",
    "weighted_vote",
    "empirical_advantage",
    "advantage_bound",
    "low_density_bound",
    "high_density_bound",
    "prefers_majority_vote",
    "choose_strategy",
    "votes_to_labels",
    "classification_metrics",
]


@dataclass(frozen=True)
class OptimizerConfig:
    """Strategy-optimizer knobs.

    gamma is the advantage tolerance: predicted advantage below it means
    majority vote is good enough. delta is the structure-search grid
    resolution. (w_min, w_bar, w_max) bracket the presumed true source
    weights; the defaults (0.5, 1.0, 1.5) encode sources that are
    somewhat better than chance.
    """

    gamma: float = 0.01
    delta: float = 0.02
    w_min: float = 0.5
    w_bar: float = 1.0
    w_max: float = 1.5

    def __post_init__(self) -> None:
        if not 0.0 <= self.gamma <= 1.0:
            raise DomainError("gamma must lie in [0, 1]")
        if not 0.0 < self.delta <= 0.5:
            raise DomainError("delta must lie in (0, 0.5]")
        if not 0.0 < self.w_min <= self.w_bar <= self.w_max:
            raise DomainError("need 0 < w_min <= w_bar <= w_max")


@dataclass(frozen=True)
class MajorityVote:
    """Strategy tag: skip model fitting, sum the raw votes."""


@dataclass(frozen=True)
class GenerativeModel:
    """Strategy tag: fit the generative model at the selected threshold."""

    epsilon: float
    correlations: CorrelationSet

    def __post_init__(self) -> None:
        if self.epsilon <= 0.0:
            raise DomainError("selected threshold must be positive")


ModelingStrategy = Union[MajorityVote, GenerativeModel]


@dataclass(frozen=True)
class AdvantageReport:
    """Advantage numbers for one matrix, all as fractions in [0, 1].

    optimal_advantage and the two density caps need generator truth and
    stay None on real data.
    """

    empirical_advantage: float
    bound: float
    optimal_advantage: Optional[float] = None
    low_density_bound: Optional[float] = None
    high_density_bound: Optional[float] = None


def majority_vote(row: Sequence[int] | np.ndarray) -> float:
    """Unweighted vote sum; sign is the prediction, 0 signals a tie."""
    return float(np.asarray(row, dtype=np.float64).sum())


def weighted_vote(
    row: Sequence[int] | np.ndarray, acc_weights: Sequence[float] | np.ndarray
) -> float:
    """Accuracy-weighted vote sum over one row."""
    arr = np.asarray(row, dtype=np.float64)
    w = np.asarray(acc_weights, dtype=np.float64)
    if arr.shape != w.shape:
        raise DimensionError(f"row has {arr.size} sources but got {w.size} weights")
    return float(arr @ w)


def _vote_sums(matrix: LabelMatrix) -> np.ndarray:
    return matrix.dense.astype(np.float64).sum(axis=1)


def empirical_advantage(
    matrix: LabelMatrix,
    gold: GoldLabels,
    acc_weights: Sequence[float] | np.ndarray,
) -> float:
    """Net rate at which the weighted vote corrects the majority vote.

    A data point counts +1/n when the weighted vote is strictly correct
    while the majority vote is wrong or tied, and -1/n in the reverse
    case. Ties (vote sum exactly 0) are never "correct".
    """
    if len(gold) != matrix.n:
        raise DimensionError(
            f"matrix has {matrix.n} rows but gold has {len(gold)} labels"
        )
    w = np.asarray(acc_weights, dtype=np.float64)
    if w.size != matrix.m:
        raise DimensionError(f"matrix has {matrix.m} sources but got {w.size} weights")
    y = gold.labels.astype(np.float64)
    f_w = matrix.dense.astype(np.float64) @ w
    f_1 = _vote_sums(matrix)
    weighted_correct = y * f_w > 0
    majority_correct = y * f_1 > 0
    gains = weighted_correct & ~majority_correct
    losses = ~weighted_correct & majority_correct
    return float(gains.mean() - losses.mean())


def advantage_bound(matrix: LabelMatrix, config: OptimizerConfig = OptimizerConfig()) -> float:
    """Computable upper bound on the expected advantage, from votes alone.

    Per row and candidate label y, counts the best case in which a
    weighted vote could flip a wrong-or-tied majority vote: the majority
    must not already pick y, flipping must be possible within the weight
    bracket (c_y * w_max > c_{-y} * w_min), and the term is weighted by
    the mean-weight posterior sigmoid(2 * w_bar * vote_sum * y).
    """
    dense = matrix.dense
    f_1 = dense.astype(np.float64).sum(axis=1)
    c_pos = (dense == 1).sum(axis=1).astype(np.float64)
    c_neg = (dense == -1).sum(axis=1).astype(np.float64)
    flip_pos = c_pos * config.w_max > c_neg * config.w_min
    flip_neg = c_neg * config.w_max > c_pos * config.w_min
    term_pos = (f_1 <= 0) * flip_pos * expit(2.0 * config.w_bar * f_1)
    term_neg = (f_1 >= 0) * flip_neg * expit(-2.0 * config.w_bar * f_1)
    return float((term_pos + term_neg).mean()) if matrix.n else 0.0


def low_density_bound(d_bar: float, alpha_bar: float) -> float:
    """Sparse-regime cap on expected advantage: d_bar^2 * a * (1 - a).

    Valid when sources vote independently with mean accuracy alpha_bar
    above chance; grows quadratically with expected label density.
    """
    if d_bar < 0.0:
        raise DomainError("expected density must be nonnegative")
    if not 0.5 < alpha_bar <= 1.0:
        raise DomainError("mean accuracy must lie in (0.5, 1]")
    return d_bar * d_bar * alpha_bar * (1.0 - alpha_bar)


def high_density_bound(d_bar: float, p_l: float, alpha_bar: float) -> float:
    """Dense-regime cap: exp(-2 p_l (alpha_bar - 1/2)^2 d_bar).

    Majority vote converges exponentially to optimal as density grows,
    provided the mean source accuracy exceeds one half.
    """
    if not 0.0 < p_l <= 1.0:
        raise DomainError("propensity must lie in (0, 1]")
    if alpha_bar <= 0.5:
        raise DomainError("mean accuracy must exceed 0.5")
    if d_bar < 0.0:
        raise DomainError("expected density must be nonnegative")
    return float(np.exp(-2.0 * p_l * (alpha_bar - 0.5) ** 2 * d_bar))


def prefers_majority_vote(bound: float, gamma: float) -> bool:
    """Decision rule: skip model fitting when the bound is below gamma."""
    return bound < gamma


def choose_strategy(
    matrix: LabelMatrix,
    config: OptimizerConfig = OptimizerConfig(),
    fit_config: FitConfig = FitConfig(),
) -> ModelingStrategy:
    """Pick majority vote or a generative model with learned structure.

    Evaluates the advantage bound; below gamma the answer is
    MajorityVote. Otherwise sweeps the structure-selection threshold at
    resolution delta and returns the elbow-selected threshold with its
    correlation set.
    """
    bound = advantage_bound(matrix, config)
    if prefers_majority_vote(bound, config.gamma):
        return MajorityVote()
    from .structlearn import sweep  # deferred: structlearn imports this module

    result = sweep(matrix, config.delta, fit_config)
    chosen = next(p for p in result.points if p.epsilon == result.chosen_epsilon)
    return GenerativeModel(result.chosen_epsilon, chosen.selected)


def votes_to_labels(scores: np.ndarray, tie_value: int = -1) -> np.ndarray:
    """Map signed scores to hard labels; exact zeros take tie_value.

    Classification metrics use tie_value=-1 (no vote means negative),
    which deliberately differs from the advantage accounting where a
    tie is simply "not correct".
    """
    scores = np.asarray(scores, dtype=np.float64)
    out = np.where(scores > 0, 1, np.where(scores < 0, -1, tie_value))
    return out.astype(np.int8)


def classification_metrics(
    predicted: np.ndarray, gold: GoldLabels
) -> dict[str, float]:
    """Accuracy, precision, recall, and F1 for hard +-1 predictions."""
    pred = np.asarray(predicted)
    y = gold.labels
    if pred.shape != y.shape:
        raise DimensionError(
            f"got {pred.size} predictions for {y.size} gold labels"
        )
    tp = float(((pred == 1) & (y == 1)).sum())
    fp = float(((pred == 1) & (y == -1)).sum())
    fn = float(((pred == -1) & (y == 1)).sum())
    accuracy = float((pred == y).mean()) if y.size else 0.0
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return {"accuracy": accuracy, "precision": precision, "recall": recall, "f1": f1}
