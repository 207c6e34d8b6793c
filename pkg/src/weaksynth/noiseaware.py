"""Noise-aware training of a linear classifier on probabilistic labels.

Instead of hard targets, each example carries a probability of the
positive class; the training objective is the expected logistic loss
under that probability. With targets of exactly 0 or 1 this reduces to
ordinary logistic regression.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import IO, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from .errors import DimensionError, DivergenceError, DomainError, ParseError
from .genmodel import FitConfig, ProbLabels

__all__ = [
    "DiscModel",
    "noise_aware_loss",
    "noise_aware_loss_and_grad",
    "train",
    "predict",
    "load_features",
    "save_features",
    "save_disc_model",
    "load_disc_model",
]


@dataclass(frozen=True, eq=False)
class DiscModel:
    """Linear scorer: score = features @ weights + bias."""

    weights: np.ndarray
    bias: float

    def __post_init__(self) -> None:
        w = np.array(self.weights, dtype=np.float64)
        if w.ndim != 1:
            raise DomainError("weights must be a vector")
        if not (np.all(np.isfinite(w)) and np.isfinite(self.bias)):
            raise DomainError("model parameters must be finite")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", float(self.bias))

    @property
    def d(self) -> int:
        return int(self.weights.size)


def _check_features(features: np.ndarray) -> np.ndarray:
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionError("features must be a 2-d array")
    if not np.all(np.isfinite(x)):
        raise DomainError("features must be finite")
    return x


def _scores(model: DiscModel, x: np.ndarray) -> np.ndarray:
    if x.shape[1] != model.d:
        raise DimensionError(f"model expects d={model.d} features, got {x.shape[1]}")
    return x @ model.weights + model.bias


def noise_aware_loss(model: DiscModel, features: np.ndarray, probs: ProbLabels) -> float:
    """Expected logistic loss under per-example positive-class weights.

    Sums prob * loss(score, +1) + (1 - prob) * loss(score, -1) over
    rows, with loss(s, y) = log(1 + exp(-y s)).
    """
    x = _check_features(features)
    p = probs.probs
    if x.shape[0] != p.size:
        raise DimensionError(f"{x.shape[0]} feature rows vs {p.size} label probabilities")
    s = _scores(model, x)
    value, _, _ = _loss_terms(s, x, p)
    return value


def _loss_terms(
    scores: np.ndarray, x: np.ndarray, p: np.ndarray
) -> tuple[float, np.ndarray, float]:
    loss_pos = np.logaddexp(0.0, -scores)
    loss_neg = np.logaddexp(0.0, scores)
    value = float((p * loss_pos + (1.0 - p) * loss_neg).sum())
    residual = expit(scores) - p
    return value, x.T @ residual, float(residual.sum())


def noise_aware_loss_and_grad(
    weights: np.ndarray, bias: float, features: np.ndarray, probs: ProbLabels
) -> tuple[float, np.ndarray, float]:
    """Loss plus its gradient in (weights, bias); no regularization."""
    model = DiscModel(weights, bias)
    x = _check_features(features)
    p = probs.probs
    if x.shape[0] != p.size:
        raise DimensionError(f"{x.shape[0]} feature rows vs {p.size} label probabilities")
    return _loss_terms(_scores(model, x), x, p)


def train(features: np.ndarray, probs: ProbLabels, config: FitConfig = FitConfig()) -> DiscModel:
    """Minimize the noise-aware loss plus l2_reg * ||weights||^2.

    The bias is unregularized. Deterministic (L-BFGS from zero).
    """
    x = _check_features(features)
    p = probs.probs
    if x.shape[0] != p.size:
        raise DimensionError(f"{x.shape[0]} feature rows vs {p.size} label probabilities")
    if x.shape[0] < 1:
        raise DomainError("need at least one training row")
    d = x.shape[1]
    evals = {"count": 0}

    def objective(theta: np.ndarray) -> tuple[float, np.ndarray]:
        evals["count"] += 1
        w, b = theta[:d], theta[d]
        s = x @ w + b
        value, g_w, g_b = _loss_terms(s, x, p)
        value += config.l2_reg * float(w @ w)
        grad = np.concatenate([g_w + 2.0 * config.l2_reg * w, [g_b]])
        if not (np.isfinite(value) and np.all(np.isfinite(grad))):
            raise DivergenceError(
                f"non-finite noise-aware objective at evaluation {evals['count']}"
            )
        return value, grad

    result = minimize(
        objective,
        np.zeros(d + 1),
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": max(config.epochs * 10, 500), "ftol": 1e-14, "gtol": 1e-10},
    )
    return DiscModel(result.x[:d], float(result.x[d]))


def predict(model: DiscModel, features: np.ndarray) -> np.ndarray:
    """Positive-class probability per row: sigmoid(score)."""
    x = _check_features(features)
    return expit(_scores(model, x))


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------


def load_features(source: str | Path | IO[str]) -> np.ndarray:
    """Read a dense CSV of reals, one row per data point."""
    if hasattr(source, "read"):
        text = source.read()  # type: ignore[union-attr]
    else:
        text = Path(source).read_text(encoding="utf-8")
    rows = []
    width = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split(",")
        if width is None:
            width = len(tokens)
        elif len(tokens) != width:
            raise ParseError(f"line {lineno}: expected {width} columns, found {len(tokens)}")
        try:
            rows.append([float(t) for t in tokens])
        except ValueError:
            raise ParseError(f"line {lineno}: cannot parse feature values")
    if not rows:
        raise ParseError("line 1: features input is empty")
    return np.array(rows, dtype=np.float64)


def save_features(
    features: np.ndarray, target: str | Path, header_lines: Sequence[str] = ()
) -> None:
    x = _check_features(features)
    lines = [f"# {line}" for line in header_lines]
    lines += [",".join(repr(float(v)) for v in row) for row in x]
    Path(target).write_text("\n".join(lines) + "\n", encoding="utf-8")


def save_disc_model(
    model: DiscModel, target: str | Path, header_lines: Sequence[str] = ()
) -> None:
    lines = [f"# {line}" for line in header_lines]
    lines.append(f"d={model.d}")
    lines.append("weights=" + ",".join(repr(float(w)) for w in model.weights))
    lines.append(f"bias={model.bias!r}")
    Path(target).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_disc_model(source: str | Path) -> DiscModel:
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
    for required in ("d", "weights", "bias"):
        if required not in fields:
            raise ParseError(f"classifier file is missing the {required!r} field")
    weights = np.array([float(t) for t in fields["weights"].split(",")]) if fields["weights"] else np.zeros(0)
    model = DiscModel(weights, float(fields["bias"]))
    if model.d != int(fields["d"]):
        raise DimensionError(
            f"classifier file declares d={fields['d']} but stores {model.d} weights"
        )
    return model
