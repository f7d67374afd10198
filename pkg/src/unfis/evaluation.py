"""Classification metrics and the repeated random-split experiment harness."""

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .core import active_feature_count, predict_proba
from .data import SplitSpec, normalize, split
from .errors import EmptyEvaluationError, UndefinedMetricError, UnfisError
from .initialization import init_params
from .io import TrainedModel
from .optimizers import TrainConfig, train


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self):
        return self.tp + self.tn + self.fp + self.fn


def confusion(y_true, y_pred, positive):
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    pos_t, pos_p = y_true == positive, y_pred == positive
    return ConfusionCounts(
        tp=int(np.sum(pos_t & pos_p)), tn=int(np.sum(~pos_t & ~pos_p)),
        fp=int(np.sum(~pos_t & pos_p)), fn=int(np.sum(pos_t & ~pos_p)),
    )


def accuracy(counts):
    """Percentage of correct decisions, ``(TP + TN) / N * 100``."""
    if counts.total == 0:
        raise EmptyEvaluationError("accuracy of an empty evaluation set is undefined")
    return (counts.tp + counts.tn) / counts.total * 100.0


def multiclass_accuracy(y_true, y_pred):
    y_true = np.asarray(y_true)
    if y_true.size == 0:
        raise EmptyEvaluationError("accuracy of an empty evaluation set is undefined")
    return float(np.mean(y_true == np.asarray(y_pred)) * 100.0)


def auc(counts):
    """Mean of sensitivity and specificity at the decision threshold.

    This is the balanced-accuracy form used by the benchmark tables, not the
    area under a full ROC curve (see :func:`rank_auc` for that).
    """
    if counts.tp + counts.fn == 0 or counts.tn + counts.fp == 0:
        raise UndefinedMetricError("both classes must occur in the evaluation set")
    return 0.5 * (counts.tp / (counts.tp + counts.fn) + counts.tn / (counts.tn + counts.fp))


def rank_auc(y_true, scores, positive):
    """Mann-Whitney estimate of the ROC area; diagnostics only."""
    y_true = np.asarray(y_true)
    scores = np.asarray(scores, dtype=float)
    pos, neg = scores[y_true == positive], scores[y_true != positive]
    if not len(pos) or not len(neg):
        raise UndefinedMetricError("both classes must occur in the evaluation set")
    greater = (pos[:, None] > neg[None, :]).sum()
    ties = (pos[:, None] == neg[None, :]).sum()
    return float((greater + 0.5 * ties) / (len(pos) * len(neg)))


def mean_std(values):
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return float("nan"), float("nan")
    std = float(values.std(ddof=1)) if values.size > 1 else 0.0
    return float(values.mean()), std


@dataclass
class RepetitionResult:
    repetition: int
    seed: int
    accuracy: float
    auc: float
    active_features: np.ndarray
    model: TrainedModel = field(repr=False, default=None)


@dataclass
class ExperimentSummary:
    label: str
    dataset: str
    config: dict
    base_seed: int
    results: list

    @property
    def accuracies(self):
        return np.array([r.accuracy for r in self.results])

    @property
    def aucs(self):
        return np.array([r.auc for r in self.results])

    @property
    def active_features(self):
        return np.array([r.active_features for r in self.results])

    @property
    def accuracy(self):
        return mean_std(self.accuracies)

    @property
    def auc(self):
        vals = self.aucs
        return mean_std(vals) if not np.all(np.isnan(vals)) else (float("nan"), float("nan"))

    @property
    def mean_active_features(self):
        return self.active_features.mean(axis=0)

    def __len__(self):
        return len(self.results)


def evaluate(params, X, Y, positive=None):
    """Accuracy (percent) and, for binary tasks, the balanced-accuracy AUC."""
    p = predict_proba(params, X)
    pred = np.argmax(p, axis=1)
    truth = np.argmax(Y, axis=1)
    acc = multiclass_accuracy(truth, pred)
    score = float("nan")
    if Y.shape[1] == 2:
        score = auc(confusion(truth, pred, 1 if positive is None else positive))
    return acc, score


def run_repetition(dataset, config, repetition, base_seed=0, train_fraction=0.7, stratified=False):
    seed = base_seed + repetition
    train_view, test_view = split(
        dataset, SplitSpec(train_fraction, seed=seed, repetition=repetition, stratified=stratified)
    )
    train_view, test_view, stats = normalize(train_view, test_view)
    params, _ = init_params(
        train_view.X, train_view.Y, config.rules, seed=seed,
        selection=config.selection, epsilon=config.epsilon, initial_logit=config.init_logit,
    )
    params, _ = train(train_view.X, train_view.Y, replace(config, seed=seed), params)
    acc, score = evaluate(params, test_view.X, test_view.Y, dataset.positive)
    model = TrainedModel(params, stats, dataset.class_names, dataset.feature_names,
                         dataset.positive, dataset.name)
    return RepetitionResult(repetition, seed, acc, score, active_feature_count(params), model)


def run_experiment(dataset, config=None, repetitions=30, base_seed=0, label=None,
                   train_fraction=0.7, stratified=False):
    """Train and test on ``repetitions`` random splits.

    Repetition ``r`` uses seed ``base_seed + r`` for its split, its
    initialization and its mini-batch shuffling, so two calls with the same
    base seed see identical splits (paired comparisons across modes or
    optimizers).
    """
    config = config or TrainConfig()
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    results = []
    for r in range(repetitions):
        try:
            results.append(run_repetition(dataset, config, r, base_seed, train_fraction, stratified))
        except UnfisError as exc:
            exc.repetition = r
            exc.args = (f"repetition {r}: {exc}",)
            raise
    if label is None:
        label = "UNFIS" if config.selection else "FNN"
    return ExperimentSummary(label, dataset.name, config.to_dict(), base_seed, results)


def _pm(pair, digits=2):
    mean, std = pair
    if np.isnan(mean):
        return "-"
    return f"{mean:.{digits}f}+/-{std:.{digits}f}"


def format_tables(summaries):
    """Aligned text mirroring the accuracy, AUC and active-feature tables."""
    width = max(12, *(len(s.label) + 2 for s in summaries))
    head = f"{'dataset':<12}" + "".join(f"{s.label:>{width + 6}}" for s in summaries)
    out = ["Accuracy (%)", head,
           f"{summaries[0].dataset:<12}" + "".join(f"{_pm(s.accuracy):>{width + 6}}" for s in summaries)]
    if not np.isnan(summaries[0].auc[0]):
        out += ["", "AUC (balanced accuracy)", head,
                f"{summaries[0].dataset:<12}" + "".join(f"{_pm(s.auc, 4):>{width + 6}}" for s in summaries)]
    selective = [s for s in summaries if s.config.get("selection", True)]
    if selective:
        out += ["", "Active features per rule"]
        out.append(f"{'rule':<12}" + "".join(f"{s.label:>{width + 6}}" for s in selective))
        for i in range(len(selective[0].mean_active_features)):
            out.append(f"{i + 1:<12}" + "".join(f"{s.mean_active_features[i]:>{width + 6}.2f}" for s in selective))
    return "\n".join(out)


def write_summary_csv(summaries, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dataset", "method", "acc_mean", "acc_std", "auc_mean", "auc_std",
                         "repetitions", "mean_active_features"])
        for s in summaries:
            (am, asd), (um, usd) = s.accuracy, s.auc
            naf = ";".join(repr(float(v)) for v in s.mean_active_features)
            writer.writerow([s.dataset, s.label, repr(am), repr(asd),
                             "" if np.isnan(um) else repr(um), "" if np.isnan(usd) else repr(usd),
                             len(s), naf])


def write_repetitions_csv(summaries, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dataset", "method", "repetition", "seed", "accuracy", "auc", "active_features"])
        for s in summaries:
            for r in s.results:
                writer.writerow([s.dataset, s.label, r.repetition, r.seed, repr(r.accuracy),
                                 "" if np.isnan(r.auc) else repr(r.auc),
                                 ";".join(repr(float(v)) for v in r.active_features)])
