"""Seeded synthetic vote generators with known ground truth.

The base generator draws a balanced latent label per row, then lets each
source vote independently: it speaks with a fixed propensity and, when
it speaks, matches the true label with its configured accuracy.
Duplicate groups share a single draw copied to every member, which
plants perfectly correlated columns. All generators are deterministic
given their seed and also return the model weights implied by the
configuration, so estimators can be tested against known truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import ndtri

from .advantage import OptimizerConfig, advantage_bound, empirical_advantage
from .errors import DomainError
from .genmodel import (
    CorrelationSet,
    FitConfig,
    GenerativeParams,
    accuracy_to_weight,
    fit_independent_exact,
    propensity_to_lab_weight,
)
from .labelmatrix import GoldLabels, LabelMatrix

__all__ = [
    "SynthConfig",
    "RegionSynthData",
    "DensityGridPoint",
    "generate",
    "generate_abstain_region",
    "advantage_density_grid",
    "sparse_vote_config",
    "correlated_block_config",
    "trial_seed",
]


@dataclass(frozen=True)
class SynthConfig:
    """Generator settings; accuracies is one value per source."""

    n: int
    m: int
    propensity: float
    accuracies: tuple[float, ...]
    class_balance: float = 0.5
    duplicate_groups: tuple[tuple[int, ...], ...] = ()
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "accuracies", tuple(float(a) for a in self.accuracies))
        object.__setattr__(
            self,
            "duplicate_groups",
            tuple(tuple(int(j) for j in g) for g in self.duplicate_groups),
        )
        if self.n < 1 or self.m < 1:
            raise DomainError("need n >= 1 and m >= 1")
        if not 0.0 < self.propensity <= 1.0:
            raise DomainError("propensity must lie in (0, 1]")
        if len(self.accuracies) != self.m:
            raise DomainError(f"need {self.m} accuracies, got {len(self.accuracies)}")
        if any(not 0.0 < a < 1.0 for a in self.accuracies):
            raise DomainError("accuracies must lie strictly inside (0, 1)")
        if not 0.0 <= self.class_balance <= 1.0:
            raise DomainError("class_balance must lie in [0, 1]")
        seen: set[int] = set()
        for group in self.duplicate_groups:
            if len(group) < 2:
                raise DomainError("duplicate groups need at least two members")
            for j in group:
                if not 0 <= j < self.m:
                    raise DomainError(f"group member {j} outside [0, {self.m})")
                if j in seen:
                    raise DomainError(f"source {j} appears in two duplicate groups")
                seen.add(j)

    def mean_accuracy(self) -> float:
        return float(np.mean(self.accuracies))

    def expected_density(self) -> float:
        return self.m * self.propensity


def sparse_vote_config(
    n: int = 1000,
    m: int = 10,
    seed: int = 0,
    accuracy: float = 0.75,
    accuracy_spread: float = 0.0,
    propensity: float = 0.1,
    duplicate_groups: tuple[tuple[int, ...], ...] = (),
) -> SynthConfig:
    """Balanced sparse-vote regime: low propensity, sources near 75%.

    accuracy_spread > 0 draws per-source accuracies uniformly from
    accuracy +- spread (seeded), keeping the configured mean; the spread
    is what lets an optimally weighted vote beat the unweighted one.
    """
    if accuracy_spread > 0.0:
        rng = np.random.default_rng(np.random.SeedSequence((seed, 0x5EED)))
        accs = rng.uniform(accuracy - accuracy_spread, accuracy + accuracy_spread, m)
    else:
        accs = np.full(m, accuracy)
    return SynthConfig(
        n=n,
        m=m,
        propensity=propensity,
        accuracies=tuple(accs),
        duplicate_groups=duplicate_groups,
        seed=seed,
    )


def correlated_block_config(
    n: int = 10000,
    seed: int = 0,
    block_size: int = 5,
    independent_size: int = 5,
    block_accuracy: float = 0.5,
    independent_accuracy: float = 0.99,
) -> SynthConfig:
    """A block of identical coin-flip sources next to excellent ones.

    Always-voting duplicates at 50% accuracy beside independent sources
    at 99%: the pathological case where an independence-assuming fit
    inverts the quality estimates.
    """
    accs = (block_accuracy,) * block_size + (independent_accuracy,) * independent_size
    return SynthConfig(
        n=n,
        m=block_size + independent_size,
        propensity=1.0,
        accuracies=accs,
        duplicate_groups=(tuple(range(block_size)),),
        seed=seed,
    )


def _true_params(config: SynthConfig) -> GenerativeParams:
    acc_w = np.array([accuracy_to_weight(a) for a in config.accuracies])
    lab_w = np.array([propensity_to_lab_weight(config.propensity, w) for w in acc_w])
    return GenerativeParams(lab_w, acc_w, CorrelationSet.empty(), np.zeros(0))


def generate(config: SynthConfig) -> tuple[LabelMatrix, GoldLabels, GenerativeParams]:
    """Draw (votes, gold labels, implied true weights) for a config."""
    rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    n, m = config.n, config.m
    y = np.where(rng.random(n) < config.class_balance, 1, -1).astype(np.int8)
    leader = {group[0]: group for group in config.duplicate_groups}
    member = {j for g in config.duplicate_groups for j in g}
    dense = np.zeros((n, m), dtype=np.int8)
    for j in range(m):
        if j in member and j not in leader:
            continue  # copied from its group leader below
        speaks = rng.random(n) < config.propensity
        agrees = rng.random(n) < config.accuracies[j]
        column = np.where(speaks, np.where(agrees, y, -y), 0).astype(np.int8)
        if j in leader:
            for k in leader[j]:
                dense[:, k] = column
        else:
            dense[:, j] = column
    matrix = LabelMatrix.from_dense(dense)
    return matrix, GoldLabels(y), _true_params(config)


@dataclass(frozen=True)
class RegionSynthData:
    """Votes plus features where sources go silent on a feature region."""

    matrix: LabelMatrix
    gold: GoldLabels
    features: np.ndarray
    region_mask: np.ndarray
    true_params: GenerativeParams


def generate_abstain_region(
    config: SynthConfig,
    region_quantile: float = 0.85,
    class_separation: float = 4.0,
) -> RegionSynthData:
    """Two-Gaussian features whose upper region gets no votes at all.

    Class means sit at +-class_separation/2 on the first feature axis.
    Rows whose second feature exceeds the region_quantile point of its
    (standard normal) distribution are masked: every source abstains
    there, regardless of propensity. The mask is feature-defined, so a
    downstream classifier can still be evaluated inside it.
    """
    if not 0.0 < region_quantile < 1.0:
        raise DomainError("region_quantile must lie in (0, 1)")
    matrix, gold, truth = generate(config)
    rng = np.random.default_rng(np.random.SeedSequence((config.seed, 0xFEA7)))
    n = config.n
    x0 = rng.normal(0.0, 1.0, n) + gold.labels * (class_separation / 2.0)
    x1 = rng.normal(0.0, 1.0, n)
    features = np.column_stack([x0, x1])
    region = x1 > float(ndtri(region_quantile))
    dense = matrix.dense.copy()
    dense[region, :] = 0
    return RegionSynthData(
        LabelMatrix.from_dense(dense), gold, features, region, truth
    )


def trial_seed(seed: int, m: int, trial: int) -> int:
    """Deterministic, schedule-independent per-trial seed."""
    ss = np.random.SeedSequence((seed, m, trial))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class DensityGridPoint:
    """Monte Carlo advantage summary at one source count."""

    m: int
    expected_density: float
    mean_optimal_advantage: float
    se_optimal_advantage: float
    mean_bound: float
    se_bound: float
    low_density_cap: float
    high_density_cap: float
    mean_learned_advantage: Optional[float] = None
    se_learned_advantage: Optional[float] = None


def _mean_se(values: Sequence[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    if arr.size <= 1:
        return float(arr.mean()) if arr.size else 0.0, 0.0
    return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(arr.size))


def advantage_density_grid(
    m_values: Sequence[int],
    trials: int,
    n: int = 1000,
    propensity: float = 0.1,
    accuracy: float = 0.75,
    accuracy_spread: float = 0.15,
    seed: int = 0,
    optimizer_config: OptimizerConfig = OptimizerConfig(),
    fit_config: Optional[FitConfig] = None,
    include_learned: bool = True,
) -> list[DensityGridPoint]:
    """Advantage of optimal (and optionally learned) weighting vs density.

    For each source count m, runs seeded trials of the sparse-vote
    generator with per-trial accuracies drawn around the configured
    mean, and records Monte Carlo means and standard errors of the
    true-weight advantage and its computable upper bound, next to the
    two analytic density caps. include_learned additionally fits the
    independent model per trial and scores its advantage.
    """
    from .advantage import high_density_bound, low_density_bound

    if trials < 1:
        raise DomainError("need at least one trial")
    fit_config = fit_config or FitConfig(epochs=200)
    points = []
    for m in m_values:
        optimal, bounds, learned = [], [], []
        for trial in range(trials):
            tseed = trial_seed(seed, m, trial)
            rng = np.random.default_rng(np.random.SeedSequence((seed, m, trial, 1)))
            accs = rng.uniform(accuracy - accuracy_spread, accuracy + accuracy_spread, m)
            config = SynthConfig(
                n=n, m=m, propensity=propensity, accuracies=tuple(accs), seed=tseed
            )
            matrix, gold, truth = generate(config)
            optimal.append(empirical_advantage(matrix, gold, truth.acc_weights))
            bounds.append(advantage_bound(matrix, optimizer_config))
            if include_learned:
                fitted = fit_independent_exact(matrix, fit_config)
                learned.append(empirical_advantage(matrix, gold, fitted.acc_weights))
        d_bar = m * propensity
        mean_opt, se_opt = _mean_se(optimal)
        mean_bound, se_bound = _mean_se(bounds)
        mean_learned, se_learned = (None, None)
        if include_learned:
            mean_learned, se_learned = _mean_se(learned)
        points.append(
            DensityGridPoint(
                m=m,
                expected_density=d_bar,
                mean_optimal_advantage=mean_opt,
                se_optimal_advantage=se_opt,
                mean_bound=mean_bound,
                se_bound=se_bound,
                low_density_cap=low_density_bound(d_bar, accuracy),
                high_density_cap=high_density_bound(d_bar, propensity, accuracy),
                mean_learned_advantage=mean_learned,
                se_learned_advantage=se_learned,
            )
        )
    return points
