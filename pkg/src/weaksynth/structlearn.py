"""Select which source pairs to model as correlated.

For each source j, the marginal pseudolikelihood of its column given all
other columns is maximized over j's accuracy weight and one agreement
weight per candidate partner, under an L1 penalty. The latent label is
marginalized in closed form, so no sampling is involved. A pair enters
the selected set when either endpoint's solve gives it absolute weight
at least epsilon; a sweep over epsilon plus an elbow rule picks the
final threshold.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import minimize
from scipy.special import log_expit

from .errors import DivergenceError, DomainError, InsufficientDataError
from .genmodel import CorrelationSet, FitConfig, GenerativeParams, fit_independent_exact
from .labelmatrix import LabelMatrix

__all__ = [
    "SweepPoint",
    "SweepResult",
    "pseudolikelihood_and_grad",
    "learn_structure",
    "learn_structure_weights",
    "sweep",
    "select_elbow",
    "write_sweep_report",
]


@dataclass(frozen=True)
class SweepPoint:
    """Structure-learning outcome at one threshold value."""

    epsilon: float
    num_correlations: int
    selected: CorrelationSet
    pair_weights: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.epsilon <= 0.0:
            raise DomainError("threshold must be positive")
        if self.num_correlations != len(self.selected):
            raise DomainError("num_correlations must equal |selected|")


@dataclass(frozen=True)
class SweepResult:
    """All sweep points, ordered by descending epsilon, plus the pick."""

    points: tuple[SweepPoint, ...]
    chosen_epsilon: float

    def chosen_point(self) -> SweepPoint:
        for point in self.points:
            if point.epsilon == self.chosen_epsilon:
                return point
        raise DomainError("chosen epsilon does not appear among the sweep points")


class _Workspace:
    """Shared per-matrix precomputations for the per-source solves."""

    def __init__(self, matrix: LabelMatrix, base: GenerativeParams):
        dense = matrix.dense
        self.n, self.m = dense.shape
        self.votes = dense
        self.pos = sp.csr_matrix((dense == 1).astype(np.float64))
        self.neg = sp.csr_matrix((dense == -1).astype(np.float64))
        self.pos_t = self.pos.T.tocsr()
        self.neg_t = self.neg.T.tocsr()
        self.base_lab = np.asarray(base.lab_weights, dtype=np.float64)
        self.base_acc = np.asarray(base.acc_weights, dtype=np.float64)
        self.score_full = dense.astype(np.float64) @ self.base_acc


def _source_terms(ws: _Workspace, j: int):
    """Fixed per-row quantities for source j's solve."""
    vobs = ws.votes[:, j].astype(np.float64)
    score_rest = ws.score_full - ws.base_acc[j] * vobs
    lq = (log_expit(2.0 * score_rest), log_expit(-2.0 * score_rest))
    is_pos = ws.votes[:, j] == 1
    is_neg = ws.votes[:, j] == -1
    return vobs, lq, is_pos, is_neg


def _pl_value_grad(
    ws: _Workspace,
    j: int,
    a: float,
    u: np.ndarray,
    fixed,
) -> tuple[float, float, np.ndarray]:
    """Mean log-pseudolikelihood of column j and its gradient in (a, u).

    u holds one agreement weight per other source (u[j] is pinned to 0).
    The latent label is marginalized against the vote-score posterior of
    the remaining columns; everything is closed form.
    """
    vobs, lq, is_pos, is_neg = fixed
    t_pos = ws.pos @ u
    t_neg = ws.neg @ u
    t_zero = u.sum() - t_pos - t_neg

    log_p = None
    resp = []
    mean_v = []
    s_stack = []
    for y, lq_y in zip((1.0, -1.0), lq):
        eta_pos = ws.base_lab[j] + a * y + t_pos
        eta_zero = t_zero
        eta_neg = ws.base_lab[j] - a * y + t_neg
        log_z = np.logaddexp(np.logaddexp(eta_pos, eta_zero), eta_neg)
        eta_obs = np.where(is_pos, eta_pos, np.where(is_neg, eta_neg, eta_zero))
        term = lq_y + eta_obs - log_z
        log_p = term if log_p is None else np.logaddexp(log_p, term)
        s_pos = np.exp(eta_pos - log_z)
        s_neg = np.exp(eta_neg - log_z)
        s_zero = np.exp(eta_zero - log_z)
        s_stack.append((s_pos, s_zero, s_neg))
        mean_v.append(y * (s_pos - s_neg))
        resp.append(term)

    r = [np.exp(t - log_p) for t in resp]  # responsibilities, sum to 1
    value = float(log_p.mean())

    grad_a = 0.0
    exp_pos = np.zeros(ws.n)
    exp_zero = np.zeros(ws.n)
    exp_neg = np.zeros(ws.n)
    for (s_pos, s_zero, s_neg), y_mean, r_y, y in zip(
        s_stack, mean_v, r, (1.0, -1.0)
    ):
        grad_a += float((r_y * (y * vobs - y_mean)).sum())
        exp_pos += r_y * s_pos
        exp_zero += r_y * s_zero
        exp_neg += r_y * s_neg
    c_pos = is_pos.astype(np.float64) - exp_pos
    c_neg = is_neg.astype(np.float64) - exp_neg
    c_zero = (~(is_pos | is_neg)).astype(np.float64) - exp_zero
    grad_u = (
        ws.pos_t @ (c_pos - c_zero) + ws.neg_t @ (c_neg - c_zero) + c_zero.sum()
    )
    grad_u[j] = 0.0
    return value, grad_a / ws.n, grad_u / ws.n


def pseudolikelihood_and_grad(
    matrix: LabelMatrix,
    source: int,
    acc_weight: float,
    corr_weights: Sequence[float] | np.ndarray,
    base_params: GenerativeParams,
) -> tuple[float, float, np.ndarray]:
    """Mean log-pseudolikelihood of one source column and its gradient.

    corr_weights has length m with entry `source` ignored (pinned to 0).
    Exposed so the analytic gradient can be checked against finite
    differences.
    """
    if not 0 <= source < matrix.m:
        raise DomainError(f"source index {source} outside [0, {matrix.m})")
    u = np.array(corr_weights, dtype=np.float64)
    if u.size != matrix.m:
        raise DomainError(f"corr_weights must have length m={matrix.m}")
    u[source] = 0.0
    ws = _Workspace(matrix, base_params)
    fixed = _source_terms(ws, source)
    return _pl_value_grad(ws, source, float(acc_weight), u, fixed)


def _solve_source(
    ws: _Workspace, j: int, epsilon: float, config: FitConfig
) -> np.ndarray:
    """L1-penalized per-source solve; returns the agreement weight row.

    The penalty is handled by splitting each agreement weight into
    nonnegative parts, turning the objective into a smooth box-bounded
    problem.
    """
    m = ws.m
    cap = config.weight_cap
    fixed = _source_terms(ws, j)

    def objective(x: np.ndarray) -> tuple[float, np.ndarray]:
        a = x[0]
        u = x[1 : 1 + m] - x[1 + m :]
        value, grad_a, grad_u = _pl_value_grad(ws, j, a, u, fixed)
        if not np.isfinite(value):
            raise DivergenceError(
                f"non-finite pseudolikelihood for source {j} at threshold {epsilon}"
            )
        penalty = epsilon * (x[1 : 1 + m].sum() + x[1 + m :].sum())
        grad = np.concatenate([[-grad_a], -grad_u + epsilon, grad_u + epsilon])
        return -value + penalty, grad

    bounds = [(-cap, cap)]
    pin = [(0.0, 0.0)]
    free = [(0.0, cap)]
    bounds += [pin[0] if k == j else free[0] for k in range(m)]
    bounds += [pin[0] if k == j else free[0] for k in range(m)]
    x0 = np.zeros(1 + 2 * m)
    x0[0] = ws.base_acc[j]
    result = minimize(
        objective,
        x0,
        jac=True,
        method="L-BFGS-B",
        bounds=bounds,
        options={"maxiter": max(config.epochs, 1), "ftol": 1e-12, "gtol": 1e-8},
    )
    u = result.x[1 : 1 + m] - result.x[1 + m :]
    u[np.abs(u) < 1e-9] = 0.0
    return u


def _solve_all(
    ws: _Workspace, epsilon: float, config: FitConfig, n_jobs: int = 1
) -> np.ndarray:
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            rows = list(
                pool.map(lambda j: _solve_source(ws, j, epsilon, config), range(ws.m))
            )
    else:
        rows = [_solve_source(ws, j, epsilon, config) for j in range(ws.m)]
    return np.vstack(rows) if rows else np.zeros((0, 0))


def _select(weight_rows: np.ndarray, epsilon: float) -> tuple[CorrelationSet, tuple[float, ...]]:
    m = weight_rows.shape[0]
    pairs = []
    weights = []
    for j in range(m):
        for k in range(j + 1, m):
            w_jk, w_kj = weight_rows[j, k], weight_rows[k, j]
            if abs(w_jk) >= epsilon or abs(w_kj) >= epsilon:
                pairs.append((j, k))
                weights.append(w_jk if abs(w_jk) >= abs(w_kj) else w_kj)
    selected = CorrelationSet.of(pairs)
    by_pair = dict(zip(pairs, weights))
    return selected, tuple(float(by_pair[p]) for p in selected.pairs)


def learn_structure_weights(
    matrix: LabelMatrix,
    epsilon: float,
    config: FitConfig = FitConfig(),
    base_params: Optional[GenerativeParams] = None,
    n_jobs: int = 1,
) -> tuple[CorrelationSet, dict[tuple[int, int], float]]:
    """learn_structure plus the surviving agreement weight per pair."""
    if epsilon <= 0.0:
        raise DomainError("threshold must be positive")
    if matrix.m < 2:
        return CorrelationSet.empty(), {}
    if base_params is None:
        base_params = fit_independent_exact(matrix, config)
    ws = _Workspace(matrix, base_params)
    rows = _solve_all(ws, epsilon, config, n_jobs)
    selected, weights = _select(rows, epsilon)
    return selected, dict(zip(selected.pairs, weights))


def learn_structure(
    matrix: LabelMatrix,
    epsilon: float,
    config: FitConfig = FitConfig(),
    base_params: Optional[GenerativeParams] = None,
    n_jobs: int = 1,
) -> CorrelationSet:
    """Source pairs whose L1-penalized agreement weight clears epsilon.

    Every per-source solve keeps the other sources' accuracy weights
    fixed at the independent fit (computed here when base_params is not
    supplied). A pair is selected when either endpoint's solve assigns
    it absolute weight >= epsilon.
    """
    selected, _ = learn_structure_weights(matrix, epsilon, config, base_params, n_jobs)
    return selected


def sweep(
    matrix: LabelMatrix,
    delta: float,
    config: FitConfig = FitConfig(),
    early_stop: bool = True,
    base_params: Optional[GenerativeParams] = None,
    n_jobs: int = 1,
) -> SweepResult:
    """Run structure learning over the grid delta, 2*delta, ..., <= 0.5.

    Ascends the grid and may stop early once the selected set empties
    (never before three points, which the elbow rule needs). Points are
    stored by descending threshold; chosen_epsilon is the elbow point.
    """
    if not 0.0 < delta <= 0.5:
        raise DomainError("delta must lie in (0, 0.5]")
    if matrix.m < 2:
        raise DomainError("structure search needs at least two sources")
    if base_params is None:
        base_params = fit_independent_exact(matrix, config)
    ws = _Workspace(matrix, base_params)
    steps = int(np.floor(1.0 / (2.0 * delta) + 1e-9))
    points: list[SweepPoint] = []
    for i in range(1, steps + 1):
        epsilon = i * delta
        try:
            rows = _solve_all(ws, epsilon, config, n_jobs)
        except DivergenceError as exc:
            raise DivergenceError(f"threshold {epsilon}: {exc}") from exc
        selected, weights = _select(rows, epsilon)
        points.append(SweepPoint(epsilon, len(selected), selected, weights))
        if early_stop and len(points) >= 3 and len(selected) == 0:
            break
    points.sort(key=lambda p: -p.epsilon)
    chosen = select_elbow(points)
    return SweepResult(tuple(points), chosen)


def select_elbow(points: Sequence[SweepPoint]) -> float:
    """Pick the threshold where the pair count jumps the most.

    With counts c_i listed by descending threshold, scores each interior
    point by c_{i+1} - c_{i-1} and returns the maximizer's threshold;
    ties resolve toward the larger threshold. Needs at least 3 points.
    """
    if len(points) < 3:
        raise InsufficientDataError(
            f"elbow selection needs at least 3 sweep points, got {len(points)}"
        )
    eps = np.array([p.epsilon for p in points], dtype=np.float64)
    if not np.all(np.diff(eps) < 0):
        raise DomainError("sweep points must be strictly ordered by descending threshold")
    counts = np.array([p.num_correlations for p in points], dtype=np.float64)
    scores = counts[2:] - counts[:-2]
    best = int(np.argmax(scores))  # first maximum = largest threshold
    return float(eps[1 + best])


def write_sweep_report(
    result: SweepResult,
    out_dir: str | Path,
    header_lines: Sequence[str] = (),
) -> None:
    """Write sweep.csv plus one pair-list file per threshold."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    head = "".join(f"# {line}\n" for line in header_lines)
    lines = [head + "epsilon,num_correlations"]
    for point in result.points:
        lines.append(f"{point.epsilon:g},{point.num_correlations}")
    lines.append(f"# chosen_epsilon={result.chosen_epsilon:g}")
    (out / "sweep.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    for point in result.points:
        pair_lines = [head + "j,k,weight"] if head else ["j,k,weight"]
        for (j, k), w in zip(point.selected.pairs, point.pair_weights):
            pair_lines.append(f"{j},{k},{w!r}")
        name = f"pairs_eps_{point.epsilon:g}.csv"
        (out / name).write_text("\n".join(pair_lines) + "\n", encoding="utf-8")
