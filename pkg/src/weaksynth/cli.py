"""Command-line surface: reproducible, file-based pipelines.

One binary with subcommands (fit, predict, optimize, structure, sweep,
advantage, synth, eval, train-disc). Every command accepts --seed,
--strict, --threads, and --config FILE (key=value lines, overridden by
explicit flags). Every output artifact starts with '#' comment lines
holding the fully resolved configuration, so runs are auditable and
byte-reproducible.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical
divergence.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import advantage as adv
from . import genmodel, labelmatrix, noiseaware, structlearn, synthgen
from .errors import DataError, DivergenceError, DomainError, ParseError

__all__ = ["main", "PipelineConfig"]


@dataclass(frozen=True)
class PipelineConfig:
    """Resolved file paths and knobs for one command invocation."""

    command: str
    paths: dict[str, str]
    fit: genmodel.FitConfig
    optimizer: adv.OptimizerConfig
    format: str
    seed: int

    def check_inputs(self) -> None:
        for role, path in self.paths.items():
            if path and not Path(path).exists():
                raise DataError(f"{role} path does not exist: {path}")


def _parse_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"line {lineno}: config entries must be key=value")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


class _Opts:
    """Merges CLI flags, config-file values, and defaults; records all."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.command: str = args.command
        self.file_values = (
            _parse_config_file(args.config) if getattr(args, "config", None) else {}
        )
        self.resolved: dict[str, object] = {}

    def get(self, key: str, default=None, cast=str):
        value = getattr(self.args, key, None)
        if value is None and key in self.file_values:
            raw = self.file_values[key]
            if cast is bool:
                low = raw.lower()
                if low not in _TRUE | _FALSE:
                    raise DomainError(f"config value {key}={raw!r} is not a boolean")
                value = low in _TRUE
            else:
                value = cast(raw)
        if value is None:
            value = default
        self.resolved[key] = value
        return value

    def header(self) -> list[str]:
        lines = [f"weaksynth {self.command}"]
        for key in sorted(self.resolved):
            lines.append(f"{key}={self.resolved[key]}")
        return lines


def _fit_config(opts: _Opts) -> genmodel.FitConfig:
    return genmodel.FitConfig(
        epochs=opts.get("epochs", 100, int),
        step_size=opts.get("step_size", 0.01, float),
        gibbs_steps=opts.get("gibbs_steps", 2, int),
        l2_reg=opts.get("l2", 1e-4, float),
        seed=opts.get("seed", 0, int),
        batch_size=opts.get("batch_size", 100, int),
        decay=bool(opts.get("decay", False, bool)),
    )


def _optimizer_config(opts: _Opts) -> adv.OptimizerConfig:
    return adv.OptimizerConfig(
        gamma=opts.get("gamma", 0.01, float),
        delta=opts.get("delta", 0.02, float),
        w_min=opts.get("w_min", 0.5, float),
        w_bar=opts.get("w_bar", 1.0, float),
        w_max=opts.get("w_max", 1.5, float),
    )


def _threads(opts: _Opts) -> int:
    strict = bool(opts.get("strict", False, bool))
    threads = opts.get("threads", 1, int)
    return 1 if strict else max(1, threads)


def _load_matrix(opts: _Opts) -> labelmatrix.LabelMatrix:
    path = opts.get("matrix")
    if not path:
        raise DataError("a --matrix path is required")
    if not Path(path).exists():
        raise DataError(f"matrix path does not exist: {path}")
    return labelmatrix.load_matrix(path, opts.get("format", "dense"))


def _load_gold(opts: _Opts) -> labelmatrix.GoldLabels:
    path = opts.get("gold")
    if not path:
        raise DataError("a --gold path is required")
    if not Path(path).exists():
        raise DataError(f"gold path does not exist: {path}")
    return labelmatrix.load_gold(path)


def _read_pairs_file(path: str) -> genmodel.CorrelationSet:
    if not Path(path).exists():
        raise DataError(f"correlations path does not exist: {path}")
    pairs = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith("j,k"):
            continue
        tokens = line.split(",")
        if len(tokens) < 2:
            raise ParseError(f"line {lineno}: pair lines must be 'j,k[,weight]'")
        pairs.append((int(tokens[0]), int(tokens[1])))
    return genmodel.CorrelationSet.of(pairs)


def _write_predictions(path: str, probs: np.ndarray, header: list[str]) -> None:
    lines = [f"# {line}" for line in header]
    lines.append("index,p_positive")
    lines += [f"{i},{float(p)!r}" for i, p in enumerate(probs)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _read_predictions(path: str) -> np.ndarray:
    if not Path(path).exists():
        raise DataError(f"predictions path does not exist: {path}")
    probs = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#") or line == "index,p_positive":
            continue
        tokens = line.split(",")
        if len(tokens) != 2:
            raise ParseError(f"line {lineno}: prediction lines must be 'index,p'")
        probs.append(float(tokens[1]))
    return np.array(probs, dtype=np.float64)


def _emit(text: str, out: Optional[str]) -> None:
    print(text, end="")
    if out:
        Path(out).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_fit(args: argparse.Namespace) -> None:
    opts = _Opts(args)
    matrix = _load_matrix(opts)
    fit_config = _fit_config(opts)
    out = opts.get("out")
    if not out:
        raise DataError("an --out model path is required")
    extra: dict[str, str] = {}
    if args.exact:
        opts.resolved["mode"] = "exact"
        params = genmodel.fit_independent_exact(matrix, fit_config)
    elif args.auto_structure:
        opts.resolved["mode"] = "auto-structure"
        result = structlearn.sweep(
            matrix, _optimizer_config(opts).delta, fit_config, n_jobs=_threads(opts)
        )
        chosen = result.chosen_point()
        extra["chosen_epsilon"] = repr(result.chosen_epsilon)
        params = genmodel.fit_gibbs_sgd(matrix, chosen.selected, fit_config)
    else:
        opts.resolved["mode"] = "correlations"
        correlations = _read_pairs_file(args.correlations)
        correlations.check_within(matrix.m)
        params = genmodel.fit_gibbs_sgd(matrix, correlations, fit_config)
    genmodel.save_params(
        params, out, seed=fit_config.seed, header_lines=opts.header(), extra_fields=extra
    )


def cmd_predict(args: argparse.Namespace) -> None:
    opts = _Opts(args)
    matrix = _load_matrix(opts)
    out = opts.get("out")
    if not out:
        raise DataError("an --out predictions path is required")
    if bool(opts.get("mv", False, bool)):
        sums = matrix.dense.astype(np.float64).sum(axis=1)
        probs = np.where(sums > 0, 1.0, np.where(sums < 0, 0.0, 0.5))
    else:
        model_path = opts.get("model")
        if not model_path:
            raise DataError("a --model path is required unless --mv is given")
        if not Path(model_path).exists():
            raise DataError(f"model path does not exist: {model_path}")
        params, _ = genmodel.load_params(model_path)
        if params.m != matrix.m:
            raise DataError(
                f"model expects m={params.m} sources but matrix has m={matrix.m}"
            )
        if len(params.correlations):
            probs = genmodel.posterior_gibbs(
                matrix,
                params,
                samples=opts.get("samples", 2000, int),
                burn_in=opts.get("burn_in", 200, int),
                seed=opts.get("seed", 0, int),
            ).probs
        else:
            opts.get("seed", 0, int)  # recorded for the header
            probs = genmodel.posterior_independent(matrix, params).probs
    _write_predictions(out, probs, opts.header())


def cmd_structure(args: argparse.Namespace) -> None:
    opts = _Opts(args)
    matrix = _load_matrix(opts)
    epsilon = opts.get("l1", None, float)
    if epsilon is None:
        raise DataError("an --l1 threshold is required")
    out = opts.get("out")
    if not out:
        raise DataError("an --out pairs path is required")
    selected, weights = structlearn.learn_structure_weights(
        matrix, epsilon, _fit_config(opts), n_jobs=_threads(opts)
    )
    lines = [f"# {line}" for line in opts.header()]
    lines.append("j,k,weight")
    lines += [f"{j},{k},{weights[(j, k)]!r}" for j, k in selected.pairs]
    Path(out).write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_sweep(args: argparse.Namespace) -> None:
    opts = _Opts(args)
    matrix = _load_matrix(opts)
    out_dir = opts.get("out_dir")
    if not out_dir:
        raise DataError("an --out-dir path is required")
    early_stop = not bool(opts.get("no_early_stop", False, bool))
    result = structlearn.sweep(
        matrix,
        _optimizer_config(opts).delta,
        _fit_config(opts),
        early_stop=early_stop,
        n_jobs=_threads(opts),
    )
    structlearn.write_sweep_report(result, out_dir, opts.header())
    print(f"chosen_epsilon\t{result.chosen_epsilon:g}")


def cmd_optimize(args: argparse.Namespace) -> None:
    opts = _Opts(args)
    matrix = _load_matrix(opts)
    optimizer = _optimizer_config(opts)
    bound = adv.advantage_bound(matrix, optimizer)
    body = [f"A_bound(%)\t{100.0 * bound:.1f}"]
    if adv.prefers_majority_vote(bound, optimizer.gamma):
        body.append("strategy\tMV")
    else:
        body.append("strategy\tGM")
        result = structlearn.sweep(
            matrix, optimizer.delta, _fit_config(opts), n_jobs=_threads(opts)
        )
        body.append("epsilon,num_correlations")
        for point in result.points:
            body.append(f"{point.epsilon:g},{point.num_correlations}")
        body.append(f"chosen_epsilon\t{result.chosen_epsilon:g}")
    out = opts.get("out")
    lines = [f"# {line}" for line in opts.header()] + body
    _emit("\n".join(lines) + "\n", out)


def _strategy_label(bound: float, gamma: float) -> str:
    return "MV" if adv.prefers_majority_vote(bound, gamma) else "GM"


def cmd_advantage(args: argparse.Namespace) -> None:
    opts = _Opts(args)
    _emit(_advantage_report(opts) + "\n", opts.get("out"))


def _advantage_report(opts: _Opts, extra_lines: Sequence[str] = ()) -> str:
    matrix = _load_matrix(opts)
    gold = _load_gold(opts)
    optimizer = _optimizer_config(opts)
    model_path = opts.get("model")
    if model_path:
        if not Path(model_path).exists():
            raise DataError(f"model path does not exist: {model_path}")
        params, _ = genmodel.load_params(model_path)
    else:
        params = genmodel.fit_independent_exact(matrix, _fit_config(opts))
    if params.m != matrix.m:
        raise DataError(f"model expects m={params.m} sources but matrix has m={matrix.m}")
    stats = labelmatrix.stats(matrix)
    emp = adv.empirical_advantage(matrix, gold, params.acc_weights)
    bound = adv.advantage_bound(matrix, optimizer)
    lines = [f"# {line}" for line in opts.header()]
    lines.append("A_w(%)\tA_bound(%)\tstrategy\tdensity")
    lines.append(
        f"{100.0 * emp:.1f}\t{100.0 * bound:.1f}"
        f"\t{_strategy_label(bound, optimizer.gamma)}\t{stats.density:.1f}"
    )
    lines.extend(extra_lines)
    return "\n".join(lines)


def cmd_eval(args: argparse.Namespace) -> None:
    opts = _Opts(args)
    matrix = _load_matrix(opts)
    gold = _load_gold(opts)
    extra: list[str] = []
    preds_path = opts.get("predictions")
    abstain_only = bool(opts.get("abstain_only", False, bool))
    if preds_path:
        probs = _read_predictions(preds_path)
        if probs.size != matrix.n:
            raise DataError(
                f"{probs.size} predictions for a matrix with {matrix.n} rows"
            )
        labels = adv.votes_to_labels(probs - 0.5, tie_value=-1)
        mask = np.ones(matrix.n, dtype=bool)
        if abstain_only:
            mask = np.asarray((matrix.dense != 0).sum(axis=1) == 0)
            if not mask.any():
                raise DataError("no fully-abstained rows to evaluate")
        metrics = adv.classification_metrics(
            labels[mask], labelmatrix.GoldLabels(gold.labels[mask])
        )
        extra.append(f"evaluated_rows\t{int(mask.sum())}")
        extra.append(f"abstain_only\t{str(abstain_only).lower()}")
        for name in ("accuracy", "precision", "recall", "f1"):
            extra.append(f"{name}\t{metrics[name]:.4f}")
    _emit(_advantage_report(opts, extra) + "\n", opts.get("out"))


def cmd_synth(args: argparse.Namespace) -> None:
    opts = _Opts(args)
    out_dir = opts.get("out_dir")
    if not out_dir:
        raise DataError("an --out-dir path is required")
    preset = opts.get("preset", "sparse")
    seed = opts.get("seed", 0, int)
    fmt = opts.get("format", "dense")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    features = None
    if preset == "sparse":
        config = synthgen.sparse_vote_config(
            n=opts.get("n", 1000, int),
            m=opts.get("m", 10, int),
            seed=seed,
            accuracy=opts.get("accuracy", 0.75, float),
            accuracy_spread=opts.get("accuracy_spread", 0.0, float),
            propensity=opts.get("propensity", 0.1, float),
        )
        matrix, gold, truth = synthgen.generate(config)
    elif preset == "correlated-block":
        config = synthgen.correlated_block_config(
            n=opts.get("n", 10000, int), seed=seed
        )
        matrix, gold, truth = synthgen.generate(config)
    elif preset == "abstain-region":
        config = synthgen.sparse_vote_config(
            n=opts.get("n", 2000, int),
            m=opts.get("m", 10, int),
            seed=seed,
            accuracy=opts.get("accuracy", 0.8, float),
            accuracy_spread=opts.get("accuracy_spread", 0.0, float),
            propensity=opts.get("propensity", 0.4, float),
        )
        data = synthgen.generate_abstain_region(config)
        matrix, gold, truth = data.matrix, data.gold, data.true_params
        features = data.features
    else:
        raise DataError(f"unknown preset {preset!r}")
    header = opts.header()
    labelmatrix.save_matrix(matrix, out / "matrix.csv", fmt, header_lines=header)
    labelmatrix.save_gold(gold, out / "gold.csv", header_lines=header)
    truth_fields = {
        "n": str(config.n),
        "propensity": repr(config.propensity),
        "accuracies": ",".join(repr(a) for a in config.accuracies),
    }
    genmodel.save_params(
        truth, out / "truth.txt", seed=seed, header_lines=header, extra_fields=truth_fields
    )
    if features is not None:
        noiseaware.save_features(features, out / "features.csv", header_lines=header)


def cmd_train_disc(args: argparse.Namespace) -> None:
    opts = _Opts(args)
    features_path = opts.get("features")
    probs_path = opts.get("probs")
    out = opts.get("out")
    if not (features_path and probs_path and out):
        raise DataError("train-disc needs --features, --probs, and --out")
    if not Path(features_path).exists():
        raise DataError(f"features path does not exist: {features_path}")
    features = noiseaware.load_features(features_path)
    probs = genmodel.ProbLabels(_read_predictions(probs_path))
    model = noiseaware.train(features, probs, _fit_config(opts))
    noiseaware.save_disc_model(model, out, header_lines=opts.header())
    preds_out = opts.get("predictions_out")
    if preds_out:
        _write_predictions(preds_out, noiseaware.predict(model, features), opts.header())


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value file; explicit flags win")
    parser.add_argument("--seed", type=int, help="RNG seed recorded in artifacts")
    parser.add_argument("--strict", action="store_true", default=None,
                        help="force single-threaded deterministic execution")
    parser.add_argument("--threads", type=int, help="worker threads for sweeps")


def _fit_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--step-size", dest="step_size", type=float)
    parser.add_argument("--gibbs-steps", dest="gibbs_steps", type=int)
    parser.add_argument("--l2", type=float)
    parser.add_argument("--batch-size", dest="batch_size", type=int)
    parser.add_argument("--decay", action="store_true", default=None)


def _optimizer_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--gamma", type=float)
    parser.add_argument("--delta", type=float)
    parser.add_argument("--w-min", dest="w_min", type=float)
    parser.add_argument("--w-bar", dest="w_bar", type=float)
    parser.add_argument("--w-max", dest="w_max", type=float)


def _matrix_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--matrix")
    parser.add_argument("--format", choices=("dense", "sparse"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weaksynth",
        description="Synthesize weak-supervision votes into probabilistic labels",
    )
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("fit", help="fit the generative model")
    _matrix_flags(p)
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--exact", action="store_true", default=False,
                      help="independent model, exact gradients")
    mode.add_argument("--correlations", help="pair-list file for the sampled learner")
    mode.add_argument("--auto-structure", dest="auto_structure", action="store_true",
                      default=False, help="learn the pair set before fitting")
    p.add_argument("--out")
    _fit_flags(p)
    _optimizer_flags(p)
    _common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="write probabilistic labels for a matrix")
    _matrix_flags(p)
    p.add_argument("--model")
    p.add_argument("--out")
    p.add_argument("--mv", action="store_true", default=None,
                   help="majority-vote probabilities instead of a model")
    p.add_argument("--samples", type=int)
    p.add_argument("--burn-in", dest="burn_in", type=int)
    _common(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("structure", help="select correlated source pairs at one threshold")
    _matrix_flags(p)
    p.add_argument("--l1", "--epsilon", dest="l1", type=float,
                   help="L1 coefficient and minimum selected weight")
    p.add_argument("--out")
    _fit_flags(p)
    _common(p)
    p.set_defaults(func=cmd_structure)

    p = sub.add_parser("sweep", help="run structure learning over a threshold grid")
    _matrix_flags(p)
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--no-early-stop", dest="no_early_stop", action="store_true",
                   default=None)
    _fit_flags(p)
    _optimizer_flags(p)
    _common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("optimize", help="choose majority vote or generative model")
    _matrix_flags(p)
    p.add_argument("--out")
    _fit_flags(p)
    _optimizer_flags(p)
    _common(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("advantage", help="advantage report against gold labels")
    _matrix_flags(p)
    p.add_argument("--gold")
    p.add_argument("--model")
    p.add_argument("--out")
    _fit_flags(p)
    _optimizer_flags(p)
    _common(p)
    p.set_defaults(func=cmd_advantage)

    p = sub.add_parser("synth", help="generate seeded synthetic data")
    p.add_argument("--preset", choices=("sparse", "correlated-block", "abstain-region"))
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--propensity", type=float)
    p.add_argument("--accuracy", type=float)
    p.add_argument("--accuracy-spread", dest="accuracy_spread", type=float)
    p.add_argument("--format", choices=("dense", "sparse"))
    p.add_argument("--out-dir", dest="out_dir")
    _common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", help="advantage report plus classification metrics")
    _matrix_flags(p)
    p.add_argument("--gold")
    p.add_argument("--model")
    p.add_argument("--predictions")
    p.add_argument("--abstain-only", dest="abstain_only", action="store_true",
                   default=None, help="score only rows with no votes at all")
    p.add_argument("--out")
    _fit_flags(p)
    _optimizer_flags(p)
    _common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("train-disc", help="train the noise-aware linear classifier")
    p.add_argument("--features")
    p.add_argument("--probs")
    p.add_argument("--out")
    p.add_argument("--predictions-out", dest="predictions_out")
    _fit_flags(p)
    _common(p)
    p.set_defaults(func=cmd_train_disc)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return 2
    try:
        args.func(args)
        return 0
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
