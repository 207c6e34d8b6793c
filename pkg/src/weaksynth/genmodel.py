"""Generative model over source votes and the latent true label.

Each data point couples an unobserved binary label y to the row of
source votes through three factor families:

* labeling propensity: fires when a source votes at all,
* accuracy: couples a non-abstaining vote to y,
* pairwise agreement: fires when two selected sources emit the same
  value (including shared abstention, by the literal agreement rule).

Weights sit on a log-odds scale. A source with accuracy weight w labels
correctly with probability sigmoid(2w) whenever it votes, and for a model
without agreement pairs the posterior of y given a row has the closed
form sigmoid(2 * sum_j w_j * vote_j). Learning never sees true labels:
the independent model is fit by exact gradients of the marginal
likelihood, models with agreement pairs by stochastic gradients whose
negative phase runs a few Gibbs sweeps from the observed row.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from .errors import (
    DataError,
    DimensionError,
    DivergenceError,
    DomainError,
    EmptyMatrixError,
    InfeasibleError,
    ParseError,
)
from .labelmatrix import LabelMatrix

__all__ = [
    "CorrelationSet",
    "GenerativeParams",
    "ProbLabels",
    "FitConfig",
    "weight_to_accuracy",
    "accuracy_to_weight",
    "propensity_to_lab_weight",
    "factor_values",
    "posterior_independent",
    "posterior_gibbs",
    "exact_marginal_loglik",
    "independent_loglik_and_grad",
    "fit_independent_exact",
    "fit_gibbs_sgd",
    "save_params",
    "load_params",
]

ENUMERATION_LIMIT = 8
CONVENTION_TAG = "acc=sigma(2w)"


def weight_to_accuracy(w: float | np.ndarray) -> float | np.ndarray:
    """Map an accuracy weight to the conditional accuracy sigmoid(2w)."""
    return expit(2.0 * np.asarray(w, dtype=np.float64)) if np.ndim(w) else float(expit(2.0 * w))


def accuracy_to_weight(alpha: float | np.ndarray) -> float | np.ndarray:
    """Inverse of weight_to_accuracy: half the log-odds of the accuracy."""
    a = np.asarray(alpha, dtype=np.float64)
    if np.any(a <= 0.0) or np.any(a >= 1.0):
        raise DomainError("accuracy must lie strictly inside (0, 1)")
    w = 0.5 * np.log(a / (1.0 - a))
    return w if np.ndim(alpha) else float(w)


def _log2cosh(x: np.ndarray) -> np.ndarray:
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax))


def propensity_to_lab_weight(
    propensity: float, acc_weight: float | np.ndarray, cap: float = 15.0
) -> float | np.ndarray:
    """Propensity weight whose model-implied vote rate equals `propensity`.

    Solves P(vote != 0) = sigmoid(lab + log(2 cosh(acc))) for lab. The
    result is clipped to +-cap so a propensity of exactly 1 stays finite.
    """
    if not 0.0 < propensity <= 1.0:
        raise DomainError("propensity must lie in (0, 1]")
    acc = np.asarray(acc_weight, dtype=np.float64)
    if propensity == 1.0:
        logit = np.inf
    else:
        logit = math.log(propensity / (1.0 - propensity))
    lab = np.clip(logit - _log2cosh(acc), -cap, cap)
    return lab if np.ndim(acc_weight) else float(lab)


@dataclass(frozen=True)
class CorrelationSet:
    """Canonical set of unordered source pairs modeled as dependent."""

    pairs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        canon = []
        for j, k in self.pairs:
            j, k = int(j), int(k)
            if j == k:
                raise DomainError(f"a source cannot pair with itself: ({j}, {k})")
            if j < 0 or k < 0:
                raise DomainError(f"negative source index in pair ({j}, {k})")
            canon.append((min(j, k), max(j, k)))
        if len(set(canon)) != len(canon):
            raise DomainError("correlation pair listed more than once")
        object.__setattr__(self, "pairs", tuple(sorted(canon)))

    @classmethod
    def empty(cls) -> "CorrelationSet":
        return cls(())

    @classmethod
    def of(cls, pairs: Iterable[tuple[int, int]]) -> "CorrelationSet":
        """Canonicalize and deduplicate an arbitrary pair iterable."""
        canon = {(min(int(j), int(k)), max(int(j), int(k))) for j, k in pairs}
        for j, k in canon:
            if j == k:
                raise DomainError(f"a source cannot pair with itself: ({j}, {k})")
        return cls(tuple(sorted(canon)))

    def check_within(self, m: int) -> None:
        for j, k in self.pairs:
            if k >= m:
                raise DomainError(f"pair ({j}, {k}) references source >= m={m}")

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.pairs)

    def __contains__(self, pair: tuple[int, int]) -> bool:
        j, k = pair
        return (min(j, k), max(j, k)) in self.pairs


@dataclass(frozen=True, eq=False)
class GenerativeParams:
    """Weights of the generative model: 2m + |C| parameters.

    lab_weights and acc_weights have length m; corr_weights aligns with
    correlations.pairs in canonical order.
    """

    lab_weights: np.ndarray
    acc_weights: np.ndarray
    correlations: CorrelationSet = field(default_factory=CorrelationSet.empty)
    corr_weights: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self) -> None:
        lab = np.array(self.lab_weights, dtype=np.float64)
        acc = np.array(self.acc_weights, dtype=np.float64)
        corr = np.array(self.corr_weights, dtype=np.float64)
        if lab.ndim != 1 or acc.shape != lab.shape:
            raise DimensionError("lab_weights and acc_weights must be equal-length vectors")
        if corr.ndim != 1 or corr.size != len(self.correlations):
            raise DimensionError("corr_weights must align with the correlation set")
        self.correlations.check_within(lab.size)
        for name, arr in (("lab_weights", lab), ("acc_weights", acc), ("corr_weights", corr)):
            if not np.all(np.isfinite(arr)):
                raise DomainError(f"{name} must be finite")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def m(self) -> int:
        return int(self.lab_weights.size)

    @property
    def num_params(self) -> int:
        return 2 * self.m + len(self.correlations)

    @property
    def corr_weight_map(self) -> dict[tuple[int, int], float]:
        return {p: float(w) for p, w in zip(self.correlations.pairs, self.corr_weights)}

    def accuracies(self) -> np.ndarray:
        return expit(2.0 * self.acc_weights)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GenerativeParams):
            return NotImplemented
        return (
            np.array_equal(self.lab_weights, other.lab_weights)
            and np.array_equal(self.acc_weights, other.acc_weights)
            and self.correlations == other.correlations
            and np.array_equal(self.corr_weights, other.corr_weights)
        )



@dataclass(frozen=True, eq=False)
class ProbLabels:
    """Posterior probability of the positive class per data point."""

    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 1:
            raise DomainError("probabilities must form a 1-d vector")
        if probs.size and (probs.min() < 0.0 or probs.max() > 1.0):
            raise DomainError("probabilities must lie in [0, 1]")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    def __len__(self) -> int:
        return int(self.probs.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ProbLabels):
            return NotImplemented
        return np.array_equal(self.probs, other.probs)


_DEFAULT_INIT_ACC = 0.5 * math.log(0.7 / 0.3)  # start sources a bit above chance


@dataclass(frozen=True)
class FitConfig:
    """Optimization knobs shared by the exact and sampled learners.

    epochs bounds the optimizer: exact fits treat it as an iteration
    budget, the sampled learner as passes over the data (0 keeps the
    initialization). step_size and decay only matter for the sampled
    learner; weight_cap bounds every weight to avoid separable-case
    divergence.
    """

    epochs: int = 100
    step_size: float = 0.01
    gibbs_steps: int = 2
    l2_reg: float = 1e-4
    seed: int = 0
    init_acc_weight: float = _DEFAULT_INIT_ACC
    weight_cap: float = 6.0
    grad_tol: float = 1e-6
    batch_size: int = 100
    decay: bool = False
    tail_average: float = 0.5

    def __post_init__(self) -> None:
        if self.epochs < 0:
            raise DomainError("epochs must be >= 0")
        if self.step_size <= 0.0:
            raise DomainError("step_size must be positive")
        if self.gibbs_steps < 1:
            raise DomainError("gibbs_steps must be >= 1")
        if self.l2_reg < 0.0:
            raise DomainError("l2_reg must be nonnegative")
        if self.weight_cap <= 0.0:
            raise DomainError("weight_cap must be positive")
        if self.batch_size < 1:
            raise DomainError("batch_size must be >= 1")
        if not 0.0 <= self.tail_average < 1.0:
            raise DomainError("tail_average must lie in [0, 1)")


# ---------------------------------------------------------------------------
# factors and posteriors
# ---------------------------------------------------------------------------


def factor_values(
    row: Sequence[int] | np.ndarray, y: int, correlations: CorrelationSet
) -> np.ndarray:
    """Indicator vector of all factors on one row for a candidate label y.

    Concatenates, in order: per-source vote indicators 1{vote != 0},
    per-source agreement indicators 1{vote == y}, and per-pair agreement
    indicators 1{vote_j == vote_k}. Note the pair indicator fires when
    both sources abstain. Length is 2m + |C|.
    """
    if y not in (-1, 1):
        raise DomainError(f"candidate label {y} outside {{-1, +1}}")
    arr = np.asarray(row)
    lab = (arr != 0).astype(np.float64)
    acc = (arr == y).astype(np.float64)
    corr = np.array(
        [1.0 if arr[j] == arr[k] else 0.0 for j, k in correlations], dtype=np.float64
    )
    return np.concatenate([lab, acc, corr])


def _acc_scores(matrix: LabelMatrix, acc_weights: np.ndarray) -> np.ndarray:
    return matrix.dense.astype(np.float64) @ acc_weights


def posterior_independent(matrix: LabelMatrix, params: GenerativeParams) -> ProbLabels:
    """Closed-form posterior p(y = +1 | row) for the independent model.

    Propensity factors cancel (they do not involve y), leaving
    sigmoid(2 * sum_j acc_j * vote_j) per row. Requires an empty
    correlation set.
    """
    _check_m(matrix, params)
    if len(params.correlations):
        raise ValueError("posterior_independent requires an empty correlation set")
    return ProbLabels(expit(2.0 * _acc_scores(matrix, params.acc_weights)))


def posterior_gibbs(
    matrix: LabelMatrix,
    params: GenerativeParams,
    samples: int = 2000,
    burn_in: int = 200,
    seed: int = 0,
) -> ProbLabels:
    """Monte Carlo posterior: fraction of post-burn-in sweeps with y = +1.

    Each sweep redraws every latent label from its exact conditional
    given the full observed row (agreement and propensity factors do not
    involve y, so the conditional is sigmoid(2 * acc-weighted vote sum)
    regardless of the correlation set). Deterministic given the seed.
    """
    if samples < 1:
        raise DomainError("samples must be >= 1")
    if burn_in < 0:
        raise DomainError("burn_in must be >= 0")
    _check_m(matrix, params)
    p = expit(2.0 * _acc_scores(matrix, params.acc_weights))
    rng = np.random.default_rng(seed)
    counts = np.zeros(matrix.n, dtype=np.int64)
    remaining_burn, remaining = burn_in, samples
    chunk = max(1, min(512, burn_in + samples))
    while remaining_burn + remaining > 0:
        k = min(chunk, remaining_burn + remaining)
        draws = rng.random((k, matrix.n)) < p
        if remaining_burn >= k:
            remaining_burn -= k
            continue
        start = remaining_burn
        remaining_burn = 0
        take = draws[start:]
        counts += take.sum(axis=0)
        remaining -= take.shape[0]
    return ProbLabels(counts / float(samples))


# ---------------------------------------------------------------------------
# marginal likelihood
# ---------------------------------------------------------------------------


def independent_loglik_and_grad(
    matrix: LabelMatrix, lab_weights: np.ndarray, acc_weights: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """Marginal log-likelihood of the independent model and its gradient.

    The per-row normalizer factorizes across sources, so both the value
    and the gradient are exact:

        loglik = sum_i [lab . voted_i + log 2cosh(f_i)] - n log Z_row
        f_i    = sum_j acc_j * vote_ij

    Returns (loglik, d/d lab, d/d acc), summed over rows.
    """
    lab = np.asarray(lab_weights, dtype=np.float64)
    acc = np.asarray(acc_weights, dtype=np.float64)
    dense = matrix.dense
    n = matrix.n
    votes = dense.astype(np.float64)
    observed = (dense != 0).astype(np.float64)
    f = votes @ acc
    log_z_j = np.logaddexp(0.0, lab + _log2cosh(acc))
    log_z_row = math.log(2.0) + float(log_z_j.sum())
    loglik = float((observed @ lab).sum() + _log2cosh(f).sum() - n * log_z_row)
    p_vote = expit(lab + _log2cosh(acc))
    g_lab = observed.sum(axis=0) - n * p_vote
    g_acc = votes.T @ np.tanh(f) - n * p_vote * np.tanh(acc)
    return loglik, g_lab, g_acc


def _row_energies(
    configs: np.ndarray, params: GenerativeParams
) -> tuple[np.ndarray, np.ndarray]:
    """Energies of vote configurations for y = +1 and y = -1."""
    votes = configs.astype(np.float64)
    base = (configs != 0).astype(np.float64) @ params.lab_weights
    for (j, k), w in zip(params.correlations, params.corr_weights):
        base = base + w * (configs[:, j] == configs[:, k])
    f = votes @ params.acc_weights
    return base + f, base - f


def exact_marginal_loglik(
    matrix: LabelMatrix, params: GenerativeParams, method: str = "auto"
) -> float:
    """Log marginal likelihood sum_i log sum_y p(row_i, y).

    method "factorized" is exact for an empty correlation set;
    "enumerate" sums over every vote configuration and works for any
    correlation set but only up to m = 8 sources. "auto" picks the
    factorized path when possible.
    """
    _check_m(matrix, params)
    if method == "auto":
        method = "factorized" if not len(params.correlations) else "enumerate"
    if method == "factorized":
        if len(params.correlations):
            raise ValueError("factorized marginal likelihood requires an empty correlation set")
        ll, _, _ = independent_loglik_and_grad(matrix, params.lab_weights, params.acc_weights)
        return ll
    if method != "enumerate":
        raise ValueError(f"unknown method {method!r}")
    m = matrix.m
    if m > ENUMERATION_LIMIT:
        raise InfeasibleError(
            f"enumeration over 3^{m} vote configurations exceeds the m <= {ENUMERATION_LIMIT} limit"
        )
    configs = np.array(list(itertools.product((-1, 0, 1), repeat=m)), dtype=np.int8)
    e_plus, e_minus = _row_energies(configs, params)
    log_z = float(np.logaddexp.reduce(np.concatenate([e_plus, e_minus])))
    obs_plus, obs_minus = _row_energies(matrix.dense, params)
    return float(np.logaddexp(obs_plus, obs_minus).sum() - matrix.n * log_z)


# ---------------------------------------------------------------------------
# learning
# ---------------------------------------------------------------------------


def _check_m(matrix: LabelMatrix, params: GenerativeParams) -> None:
    if matrix.m != params.m:
        raise DimensionError(
            f"model expects m={params.m} sources but matrix has m={matrix.m}"
        )


def fit_independent_exact(matrix: LabelMatrix, config: FitConfig) -> GenerativeParams:
    """Fit the independent model by exact-gradient ascent on the marginal
    likelihood.

    Runs box-constrained L-BFGS with analytic gradients; weights are
    bounded by +-config.weight_cap, which absorbs separable inputs whose
    unconstrained optimum diverges. Deterministic.
    """
    if matrix.n < 1:
        raise EmptyMatrixError("cannot fit a model on an empty matrix")
    m = matrix.m
    n = matrix.n
    cap = config.weight_cap
    x0 = np.concatenate([np.zeros(m), np.full(m, config.init_acc_weight)])
    x0 = np.clip(x0, -cap, cap)
    evals = {"count": 0}

    def objective(x: np.ndarray) -> tuple[float, np.ndarray]:
        evals["count"] += 1
        ll, g_lab, g_acc = independent_loglik_and_grad(matrix, x[:m], x[m:])
        value = -ll / n + config.l2_reg * float(x @ x)
        grad = np.concatenate([-g_lab / n, -g_acc / n]) + 2.0 * config.l2_reg * x
        if not (np.isfinite(value) and np.all(np.isfinite(grad))):
            raise DivergenceError(
                f"non-finite marginal-likelihood objective at evaluation {evals['count']}"
            )
        return value, grad

    result = minimize(
        objective,
        x0,
        jac=True,
        method="L-BFGS-B",
        bounds=[(-cap, cap)] * (2 * m),
        options={"maxiter": max(config.epochs, 1), "ftol": 1e-14, "gtol": config.grad_tol},
    )
    x = np.clip(result.x, -cap, cap)
    return GenerativeParams(x[:m], x[m:], CorrelationSet.empty(), np.zeros(0))


def _partner_table(
    m: int, correlations: CorrelationSet
) -> list[list[tuple[int, int]]]:
    partners: list[list[tuple[int, int]]] = [[] for _ in range(m)]
    for idx, (j, k) in enumerate(correlations):
        partners[j].append((idx, k))
        partners[k].append((idx, j))
    return partners


def _gibbs_sweeps(
    lam: np.ndarray,
    y: np.ndarray,
    lab: np.ndarray,
    acc: np.ndarray,
    corr: np.ndarray,
    partners: list[list[tuple[int, int]]],
    sweeps: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Run Gibbs sweeps over (votes, label) in place; returns (lam, y)."""
    b, m = lam.shape
    for _ in range(sweeps):
        for j in range(m):
            c_plus = np.zeros(b)
            c_zero = np.zeros(b)
            c_minus = np.zeros(b)
            for idx, k in partners[j]:
                col = lam[:, k]
                w = corr[idx]
                c_plus += w * (col == 1)
                c_zero += w * (col == 0)
                c_minus += w * (col == -1)
            logit_p = lab[j] + acc[j] * y + c_plus
            logit_z = c_zero
            logit_m = lab[j] - acc[j] * y + c_minus
            top = np.maximum(np.maximum(logit_p, logit_z), logit_m)
            e_m = np.exp(logit_m - top)
            e_z = np.exp(logit_z - top)
            e_p = np.exp(logit_p - top)
            r = rng.random(b) * (e_m + e_z + e_p)
            lam[:, j] = np.where(r < e_m, -1, np.where(r < e_m + e_z, 0, 1)).astype(
                np.int8
            )
        p_pos = expit(2.0 * (lam.astype(np.float64) @ acc))
        y = np.where(rng.random(b) < p_pos, 1.0, -1.0)
    return lam, y


def fit_gibbs_sgd(
    matrix: LabelMatrix, correlations: CorrelationSet, config: FitConfig
) -> GenerativeParams:
    """Fit any correlation structure by stochastic gradient ascent.

    Per minibatch, the positive phase evaluates the factor statistics at
    the observed rows with labels drawn from their exact conditionals;
    the negative phase evaluates them on a model sample produced by
    config.gibbs_steps Gibbs sweeps started from the observed rows.
    Weights stay inside +-weight_cap. The returned weights average the
    final config.tail_average fraction of iterates, which removes the
    stationary noise of the constant-step updates. Deterministic given
    config.seed; epochs = 0 returns the initialization unchanged.
    """
    if matrix.n < 1:
        raise EmptyMatrixError("cannot fit a model on an empty matrix")
    correlations.check_within(matrix.m)
    m = matrix.m
    n = matrix.n
    cap = config.weight_cap
    dense = matrix.dense
    pairs = correlations.pairs
    p1 = np.array([j for j, _ in pairs], dtype=np.int64)
    p2 = np.array([k for _, k in pairs], dtype=np.int64)
    partners = _partner_table(m, correlations)

    lab = np.zeros(m)
    acc = np.full(m, float(np.clip(config.init_acc_weight, -cap, cap)))
    corr = np.zeros(len(pairs))
    rng = np.random.default_rng(config.seed)
    update = 0
    batches_per_epoch = (n + config.batch_size - 1) // config.batch_size
    total_updates = config.epochs * batches_per_epoch
    average_from = int(math.floor(total_updates * (1.0 - config.tail_average)))
    sum_lab = np.zeros(m)
    sum_acc = np.zeros(m)
    sum_corr = np.zeros(len(pairs))
    averaged = 0
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            lb = dense[batch]
            votes = lb.astype(np.float64)
            observed = (lb != 0).astype(np.float64)
            b = lb.shape[0]

            p_pos = expit(2.0 * (votes @ acc))
            y_pos = np.where(rng.random(b) < p_pos, 1.0, -1.0)
            pos_lab = observed.mean(axis=0)
            pos_acc = (votes * y_pos[:, None]).mean(axis=0)
            pos_corr = (
                (lb[:, p1] == lb[:, p2]).mean(axis=0) if len(pairs) else np.zeros(0)
            )

            lam = lb.copy()
            lam, y_neg = _gibbs_sweeps(
                lam, y_pos.copy(), lab, acc, corr, partners, config.gibbs_steps, rng
            )
            neg_votes = lam.astype(np.float64)
            neg_lab = (lam != 0).mean(axis=0)
            neg_acc = (neg_votes * y_neg[:, None]).mean(axis=0)
            neg_corr = (
                (lam[:, p1] == lam[:, p2]).mean(axis=0) if len(pairs) else np.zeros(0)
            )

            update += 1
            step = config.step_size / math.sqrt(update) if config.decay else config.step_size
            lab += step * (pos_lab - neg_lab - 2.0 * config.l2_reg * lab)
            acc += step * (pos_acc - neg_acc - 2.0 * config.l2_reg * acc)
            if len(pairs):
                corr += step * (pos_corr - neg_corr - 2.0 * config.l2_reg * corr)
            np.clip(lab, -cap, cap, out=lab)
            np.clip(acc, -cap, cap, out=acc)
            np.clip(corr, -cap, cap, out=corr)
            if update > average_from:
                sum_lab += lab
                sum_acc += acc
                sum_corr += corr
                averaged += 1
        if not (
            np.all(np.isfinite(lab)) and np.all(np.isfinite(acc)) and np.all(np.isfinite(corr))
        ):
            raise DivergenceError(f"weights became non-finite during epoch {epoch}")
    if averaged:
        lab, acc, corr = sum_lab / averaged, sum_acc / averaged, sum_corr / averaged
    return GenerativeParams(lab, acc, correlations, corr)


# ---------------------------------------------------------------------------
# model files
# ---------------------------------------------------------------------------


def save_params(
    params: GenerativeParams,
    target: str | Path | IO[str],
    seed: int = 0,
    header_lines: Sequence[str] = (),
    extra_fields: Mapping[str, str] | None = None,
) -> None:
    """Write a key=value model file that round-trips bit-exactly."""
    lines = [f"# {line}" for line in header_lines]
    lines.append(f"m={params.m}")
    lines.append(f"convention={CONVENTION_TAG}")
    lines.append(f"seed={seed}")
    lines.append("correlations=" + ",".join(f"{j}:{k}" for j, k in params.correlations))
    lines.append("lab_weights=" + ",".join(repr(float(w)) for w in params.lab_weights))
    lines.append("acc_weights=" + ",".join(repr(float(w)) for w in params.acc_weights))
    lines.append("corr_weights=" + ",".join(repr(float(w)) for w in params.corr_weights))
    for key, value in (extra_fields or {}).items():
        lines.append(f"{key}={value}")
    text = "\n".join(lines) + "\n"
    if hasattr(target, "write"):
        target.write(text)  # type: ignore[union-attr]
    else:
        Path(target).write_text(text, encoding="utf-8")


def _parse_float_list(text: str, what: str) -> np.ndarray:
    if not text:
        return np.zeros(0)
    try:
        return np.array([float(tok) for tok in text.split(",")], dtype=np.float64)
    except ValueError:
        raise ParseError(f"cannot parse {what} list from {text!r}")


def load_params(source: str | Path | IO[str]) -> tuple[GenerativeParams, int]:
    """Read a model file; returns (params, recorded fitting seed)."""
    if hasattr(source, "read"):
        text = source.read()  # type: ignore[union-attr]
    else:
        text = Path(source).read_text(encoding="utf-8")
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"line {lineno}: expected key=value")
        key, _, value = line.partition("=")
        fields[key.strip()] = value.strip()
    for required in ("m", "convention", "lab_weights", "acc_weights"):
        if required not in fields:
            raise ParseError(f"model file is missing the {required!r} field")
    if fields["convention"] != CONVENTION_TAG:
        raise DataError(
            f"unsupported weight convention {fields['convention']!r}; expected {CONVENTION_TAG!r}"
        )
    m = int(fields["m"])
    pair_text = fields.get("correlations", "")
    pairs = []
    if pair_text:
        for tok in pair_text.split(","):
            j, _, k = tok.partition(":")
            pairs.append((int(j), int(k)))
    params = GenerativeParams(
        _parse_float_list(fields["lab_weights"], "lab_weights"),
        _parse_float_list(fields["acc_weights"], "acc_weights"),
        CorrelationSet.of(pairs),
        _parse_float_list(fields.get("corr_weights", ""), "corr_weights"),
    )
    if params.m != m:
        raise DimensionError(f"model file declares m={m} but stores {params.m} weights")
    return params, int(fields.get("seed", "0"))
