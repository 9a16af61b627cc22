"""Learning auditors' intrinsic rules from feedback, plus sample budgets.

Three from-scratch classifier families (logistic regression, decision
tree, linear SVM) estimate what an auditor's own labeling rule must look
like, given the labels or verdicts they produced. Per-auditor fits feed
an accuracy histogram and a table of which group fairness notion each
well-predicted auditor's responses satisfy.

The sample-budget calculator turns (tolerance, confidence) targets into
training-set sizes via standard realizable PAC bounds, and splits a joint
target across the system model, the auditor model, and the residual term
by grid search.
"""

from __future__ import annotations

import concurrent.futures
import configparser
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Mapping, Sequence

import numpy as np

from .datasets import DataError, DataTable, Value, _level_sort_key, _parse_scalar
from .group_metrics import (
    CALIBRATION,
    EQUAL_OPPORTUNITY,
    STATISTICAL_PARITY,
    all_reports,
)

FAMILY_LOGISTIC = "logistic-regression"
FAMILY_TREE = "decision-tree"
FAMILY_SVM = "linear-svm"
FAMILIES = (FAMILY_LOGISTIC, FAMILY_TREE, FAMILY_SVM)

OTHER_PREFERENCE = "other"


class LearningError(Exception):
    pass


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class TrainConfig:
    logistic_rate: float = 0.1
    logistic_epochs: int = 500
    tree_depth: int = 8
    tree_min_leaf: int = 1
    svm_regularization: float = 0.01
    svm_epochs: int = 500
    svm_rate: float = 0.1
    seed: int = 0


def load_defaults(path: str | None = None) -> TrainConfig:
    """Read pinned hyperparameters from an INI file (package default)."""
    parser = configparser.ConfigParser()
    if path is None:
        text = resources.files("fairaudit").joinpath("defaults.cfg").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    parser.read_string(text)
    base = TrainConfig()
    get = lambda sec, key, cast, dflt: cast(parser[sec][key]) if parser.has_option(sec, key) else dflt
    return TrainConfig(
        logistic_rate=get("logistic", "rate", float, base.logistic_rate),
        logistic_epochs=get("logistic", "epochs", int, base.logistic_epochs),
        tree_depth=get("tree", "max_depth", int, base.tree_depth),
        tree_min_leaf=get("tree", "min_leaf", int, base.tree_min_leaf),
        svm_regularization=get("svm", "regularization", float, base.svm_regularization),
        svm_epochs=get("svm", "epochs", int, base.svm_epochs),
        svm_rate=get("svm", "rate", float, base.svm_rate),
        seed=get("training", "seed", int, base.seed),
    )


# ---------------------------------------------------------------------------
# models


def _as_matrix(X) -> np.ndarray:
    matrix = np.asarray(X, dtype=float)
    if matrix.ndim != 2:
        raise LearningError("expected a 2-d feature matrix")
    return matrix


def _classes(y: Sequence[Value]) -> tuple[Value, ...]:
    return tuple(_level_sort_key(set(y)))


@dataclass(frozen=True)
class LinearModel:
    """Shared shape of the logistic and SVM families."""

    family: str
    weights: np.ndarray
    bias: float
    classes: tuple[Value, ...]
    loss_curve: tuple[float, ...] = ()
    seed: int = 0
    epochs: int = 0
    constant: Value | None = None
    warning: str = ""
    feature_names: tuple[str, ...] = ()

    def decision_function(self, X) -> np.ndarray:
        return _as_matrix(X) @ self.weights + self.bias

    def predict(self, X) -> list[Value]:
        matrix = _as_matrix(X)
        if self.constant is not None:
            return [self.constant] * matrix.shape[0]
        scores = self.decision_function(matrix)
        return [self.classes[1] if s >= 0.0 else self.classes[0] for s in scores]


@dataclass(frozen=True)
class TreeNode:
    label: Value | None = None
    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.label is not None


@dataclass(frozen=True)
class TreeModel:
    family: str
    root: TreeNode
    classes: tuple[Value, ...]
    max_depth: int
    min_leaf: int
    seed: int = 0
    warning: str = ""
    feature_names: tuple[str, ...] = ()

    def predict_one(self, x) -> Value:
        node = self.root
        while not node.is_leaf:
            node = node.left if x[node.feature] <= node.threshold else node.right
        return node.label

    def predict(self, X) -> list[Value]:
        return [self.predict_one(row) for row in _as_matrix(X)]

    def depth(self) -> int:
        def walk(node: TreeNode) -> int:
            if node.is_leaf:
                return 0
            return 1 + max(walk(node.left), walk(node.right))

        return walk(self.root)


def train_logistic(
    X,
    y: Sequence[Value],
    rate: float = 0.1,
    epochs: int = 500,
    seed: int = 0,
    feature_names: Sequence[str] = (),
) -> LinearModel:
    """Full-batch gradient descent on the log-loss, zero-initialized.

    Deterministic for fixed inputs. On the bounded 0/1 features used
    throughout this package, rates up to about 1.0 keep the recorded loss
    non-increasing. Single-class data yields a constant model with a
    warning instead of an error.
    """
    matrix = _as_matrix(X)
    labels = list(y)
    if matrix.shape[0] != len(labels) or not labels:
        raise LearningError("feature matrix and labels disagree or are empty")
    classes = _classes(labels)
    if len(classes) == 1:
        return LinearModel(
            family=FAMILY_LOGISTIC,
            weights=np.zeros(matrix.shape[1]),
            bias=0.0,
            classes=classes,
            seed=seed,
            constant=classes[0],
            warning="single-class training data; constant model",
            feature_names=tuple(feature_names),
        )
    if len(classes) != 2:
        raise LearningError(f"logistic family is binary; got {len(classes)} classes")
    target = np.array([1.0 if label == classes[1] else 0.0 for label in labels])
    w = np.zeros(matrix.shape[1])
    b = 0.0
    n = matrix.shape[0]
    curve = []
    for _ in range(epochs):
        scores = matrix @ w + b
        # piecewise form avoids exp overflow on large raw-valued features
        prob = np.where(
            scores >= 0,
            1.0 / (1.0 + np.exp(-np.clip(scores, 0, None))),
            np.exp(np.clip(scores, None, 0)) / (1.0 + np.exp(np.clip(scores, None, 0))),
        )
        # clip only inside the loss so the gradient stays exact
        safe = np.clip(prob, 1e-12, 1.0 - 1e-12)
        loss = float(-np.mean(target * np.log(safe) + (1.0 - target) * np.log(1.0 - safe)))
        curve.append(loss)
        grad = prob - target
        w = w - rate * (matrix.T @ grad) / n
        b = b - rate * float(grad.mean())
    return LinearModel(
        family=FAMILY_LOGISTIC,
        weights=w,
        bias=b,
        classes=classes,
        loss_curve=tuple(curve),
        seed=seed,
        epochs=epochs,
        feature_names=tuple(feature_names),
    )


def train_linear_svm(
    X,
    y: Sequence[Value],
    regularization: float = 0.01,
    epochs: int = 500,
    rate: float = 0.1,
    seed: int = 0,
    feature_names: Sequence[str] = (),
) -> LinearModel:
    """Full-batch subgradient descent on L2-regularized hinge loss.

    Rows with margin strictly below 1 contribute to the subgradient, so
    swapping the two class labels negates the fitted weights exactly.
    """
    matrix = _as_matrix(X)
    labels = list(y)
    if matrix.shape[0] != len(labels) or not labels:
        raise LearningError("feature matrix and labels disagree or are empty")
    classes = _classes(labels)
    if len(classes) == 1:
        return LinearModel(
            family=FAMILY_SVM,
            weights=np.zeros(matrix.shape[1]),
            bias=0.0,
            classes=classes,
            seed=seed,
            constant=classes[0],
            warning="single-class training data; constant model",
            feature_names=tuple(feature_names),
        )
    if len(classes) != 2:
        raise LearningError(f"svm family is binary; got {len(classes)} classes")
    signs = np.array([1.0 if label == classes[1] else -1.0 for label in labels])
    w = np.zeros(matrix.shape[1])
    b = 0.0
    n = matrix.shape[0]
    curve = []
    for _ in range(epochs):
        margins = signs * (matrix @ w + b)
        hinge = np.clip(1.0 - margins, 0.0, None)
        objective = float(hinge.mean() + regularization * float(w @ w))
        curve.append(objective)
        active = margins < 1.0
        grad_w = 2.0 * regularization * w - (matrix[active].T @ signs[active]) / n
        grad_b = -float(signs[active].sum()) / n
        w = w - rate * grad_w
        b = b - rate * grad_b
    return LinearModel(
        family=FAMILY_SVM,
        weights=w,
        bias=b,
        classes=classes,
        loss_curve=tuple(curve),
        seed=seed,
        epochs=epochs,
        feature_names=tuple(feature_names),
    )


def _gini(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return float(1.0 - (p * p).sum())


def train_tree(
    X,
    y: Sequence[Value],
    max_depth: int = 8,
    min_leaf: int = 1,
    seed: int = 0,
    feature_names: Sequence[str] = (),
) -> TreeModel:
    """Greedy Gini-impurity tree with pinned tie-breaking.

    Candidate thresholds are midpoints between consecutive distinct
    feature values. Ties in impurity go to the lowest feature index, then
    the lowest threshold; leaf majorities tie toward the smaller label.
    """
    matrix = _as_matrix(X)
    labels = list(y)
    if matrix.shape[0] != len(labels) or not labels:
        raise LearningError("feature matrix and labels disagree or are empty")
    classes = _classes(labels)
    class_index = {c: i for i, c in enumerate(classes)}
    encoded = np.array([class_index[label] for label in labels])

    def majority(idx: np.ndarray) -> Value:
        counts = np.bincount(encoded[idx], minlength=len(classes))
        return classes[int(np.argmax(counts))]  # argmax takes the first max: smaller label

    def build(idx: np.ndarray, depth: int) -> TreeNode:
        counts = np.bincount(encoded[idx], minlength=len(classes))
        if depth >= max_depth or len(idx) < 2 * min_leaf or (counts > 0).sum() <= 1:
            return TreeNode(label=majority(idx))
        best = None  # (impurity, feature, threshold, left_idx, right_idx)
        for f in range(matrix.shape[1]):
            column = matrix[idx, f]
            values = np.unique(column)
            if values.size < 2:
                continue
            for lo, hi in zip(values[:-1], values[1:]):
                # plain float keeps the text serialization round-trippable
                t = float((lo + hi) / 2.0)
                mask = column <= t
                left_idx, right_idx = idx[mask], idx[~mask]
                if len(left_idx) < min_leaf or len(right_idx) < min_leaf:
                    continue
                lc = np.bincount(encoded[left_idx], minlength=len(classes))
                rc = np.bincount(encoded[right_idx], minlength=len(classes))
                impurity = (len(left_idx) * _gini(lc) + len(right_idx) * _gini(rc)) / len(idx)
                if best is None or impurity < best[0] - 1e-12:
                    best = (impurity, f, t, left_idx, right_idx)
        if best is None:
            return TreeNode(label=majority(idx))
        _, f, t, left_idx, right_idx = best
        return TreeNode(
            feature=f,
            threshold=t,
            left=build(left_idx, depth + 1),
            right=build(right_idx, depth + 1),
        )

    root = build(np.arange(len(labels)), 0)
    return TreeModel(
        family=FAMILY_TREE,
        root=root,
        classes=classes,
        max_depth=max_depth,
        min_leaf=min_leaf,
        seed=seed,
        feature_names=tuple(feature_names),
    )


def evaluate_accuracy(model, X, y: Sequence[Value]) -> float:
    labels = list(y)
    if not labels:
        raise LearningError("no examples to evaluate")
    predicted = model.predict(X)
    hits = sum(1 for p, t in zip(predicted, labels) if p == t)
    return hits / len(labels)


def train_family(family: str, X, y, config: TrainConfig | None = None,
                 feature_names: Sequence[str] = ()):
    config = config or TrainConfig()
    if family == FAMILY_LOGISTIC:
        return train_logistic(X, y, rate=config.logistic_rate,
                              epochs=config.logistic_epochs, seed=config.seed,
                              feature_names=feature_names)
    if family == FAMILY_TREE:
        return train_tree(X, y, max_depth=config.tree_depth,
                          min_leaf=config.tree_min_leaf, seed=config.seed,
                          feature_names=feature_names)
    if family == FAMILY_SVM:
        return train_linear_svm(X, y, regularization=config.svm_regularization,
                                epochs=config.svm_epochs, rate=config.svm_rate,
                                seed=config.seed, feature_names=feature_names)
    raise LearningError(f"unknown family {family!r}; expected one of {FAMILIES}")


# ---------------------------------------------------------------------------
# model serialization (plain text)


def model_to_text(model) -> str:
    lines = [f"family: {model.family}"]
    lines.append(f"classes: {', '.join(str(c) for c in model.classes)}")
    if model.feature_names:
        lines.append(f"features: {', '.join(model.feature_names)}")
    if model.warning:
        lines.append(f"warning: {model.warning}")
    if isinstance(model, LinearModel):
        if model.constant is not None:
            lines.append(f"constant: {model.constant}")
        lines.append(f"bias: {model.bias!r}")
        lines.append(f"weights: {', '.join(repr(float(w)) for w in model.weights)}")
    elif isinstance(model, TreeModel):
        flat: list[str] = []

        def emit(node: TreeNode) -> int:
            here = len(flat)
            flat.append("")
            if node.is_leaf:
                flat[here] = f"node: {here} leaf {node.label}"
            else:
                left = emit(node.left)
                right = emit(node.right)
                flat[here] = f"node: {here} split {node.feature} {node.threshold!r} {left} {right}"
            return here

        emit(model.root)
        lines.append(f"max_depth: {model.max_depth}")
        lines.append(f"min_leaf: {model.min_leaf}")
        lines.extend(flat)
    else:
        raise LearningError(f"cannot serialize {type(model).__name__}")
    return "\n".join(lines) + "\n"


def model_from_text(text: str):
    fields: dict[str, str] = {}
    nodes: dict[int, str] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition(":")
        key, value = key.strip(), value.strip()
        if key == "node":
            idx, _, rest = value.partition(" ")
            nodes[int(idx)] = rest.strip()
        else:
            fields[key] = value
    family = fields.get("family", "")
    classes = tuple(_parse_scalar(t) for t in fields.get("classes", "").split(","))
    feature_names = tuple(
        t.strip() for t in fields.get("features", "").split(",") if t.strip()
    )
    if family in (FAMILY_LOGISTIC, FAMILY_SVM):
        weights = np.array(
            [float(t) for t in fields.get("weights", "").split(",") if t.strip()]
        )
        constant = _parse_scalar(fields["constant"]) if "constant" in fields else None
        return LinearModel(
            family=family,
            weights=weights,
            bias=float(fields.get("bias", "0")),
            classes=classes,
            constant=constant,
            warning=fields.get("warning", ""),
            feature_names=feature_names,
        )
    if family == FAMILY_TREE:
        def parse(idx: int) -> TreeNode:
            body = nodes[idx]
            kind, _, rest = body.partition(" ")
            if kind == "leaf":
                return TreeNode(label=_parse_scalar(rest))
            f, t, left, right = rest.split()
            return TreeNode(
                feature=int(f),
                threshold=float(t),
                left=parse(int(left)),
                right=parse(int(right)),
            )

        return TreeModel(
            family=family,
            root=parse(0),
            classes=classes,
            max_depth=int(fields.get("max_depth", "0")),
            min_leaf=int(fields.get("min_leaf", "1")),
            warning=fields.get("warning", ""),
            feature_names=feature_names,
        )
    raise LearningError(f"unknown family {family!r} in model text")


# ---------------------------------------------------------------------------
# per-auditor fitting


ACCURACY_BANDS = ("<=0.6", "0.6-0.7", "0.7-0.8", ">0.8")


def accuracy_band(accuracy: float) -> str:
    if accuracy > 0.8:
        return ">0.8"
    if accuracy > 0.7:
        return "0.7-0.8"
    if accuracy > 0.6:
        return "0.6-0.7"
    return "<=0.6"


@dataclass(frozen=True)
class AuditorFit:
    """All-family fit of one auditor's feedback."""

    auditor_id: str
    n_examples: int
    models: dict
    accuracies: dict[str, float]  # held-in (training) accuracy per family

    def best_family(self) -> str:
        return max(FAMILIES, key=lambda fam: self.accuracies.get(fam, -1.0))


@dataclass(frozen=True)
class FitReport:
    fits: tuple[AuditorFit, ...]
    skipped: tuple[tuple[str, int], ...]
    histogram: dict[str, dict[str, int]]  # family -> band -> auditor count

    def band_count(self, family: str, band: str) -> int:
        return self.histogram.get(family, {}).get(band, 0)


Feedback = Mapping[str, Sequence[tuple[int, Value]]]


def load_feedback_csv(path: str) -> dict[str, list[tuple[int, Value]]]:
    """Read feedback rows (auditor_id, row_id, response), header required."""
    import csv

    out: dict[str, list[tuple[int, Value]]] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        needed = {"auditor_id", "row_id", "response"}
        if reader.fieldnames is None or not needed.issubset(reader.fieldnames):
            raise DataError(f"{path}: feedback CSV needs columns {sorted(needed)}")
        for record in reader:
            out.setdefault(record["auditor_id"], []).append(
                (int(record["row_id"]), _parse_scalar(record["response"]))
            )
    if not out:
        raise DataError(f"{path}: no feedback rows")
    return out


def fit_all_auditors(
    table: DataTable,
    feedback: Feedback,
    families: Sequence[str] = FAMILIES,
    min_examples: int = 10,
    config: TrainConfig | None = None,
    workers: int = 4,
) -> FitReport:
    """Fit every family to every auditor with enough feedback.

    Auditors below min_examples are skipped and reported. Fits are
    independent, so they run on a small thread pool; results are ordered
    by auditor id regardless of scheduling.
    """
    if table.encoded is None:
        raise DataError("table has no encoded view; call one_hot_encode first")
    config = config or TrainConfig()
    index_of = {row.id: i for i, row in enumerate(table.rows)}
    names = tuple(f"{f}={lvl}" for f, lvl in table.encoded.columns)

    eligible: list[tuple[str, list[tuple[int, Value]]]] = []
    skipped: list[tuple[str, int]] = []
    for auditor_id in sorted(feedback):
        examples = list(feedback[auditor_id])
        if len(examples) < min_examples:
            skipped.append((auditor_id, len(examples)))
        else:
            eligible.append((auditor_id, examples))

    def fit_one(item: tuple[str, list[tuple[int, Value]]]) -> AuditorFit:
        auditor_id, examples = item
        rows = []
        for rid, _ in examples:
            if rid not in index_of:
                raise DataError(f"auditor {auditor_id}: unknown row id {rid}")
            rows.append(index_of[rid])
        X = table.encoded.matrix[rows]
        y = [resp for _, resp in examples]
        models = {}
        accuracies = {}
        for family in families:
            model = train_family(family, X, y, config, feature_names=names)
            models[family] = model
            accuracies[family] = evaluate_accuracy(model, X, y)
        return AuditorFit(
            auditor_id=auditor_id,
            n_examples=len(examples),
            models=models,
            accuracies=accuracies,
        )

    if workers > 1 and len(eligible) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            fits = list(pool.map(fit_one, eligible))
    else:
        fits = [fit_one(item) for item in eligible]

    histogram: dict[str, dict[str, int]] = {
        family: {band: 0 for band in ACCURACY_BANDS} for family in families
    }
    for fit in fits:
        for family in families:
            histogram[family][accuracy_band(fit.accuracies[family])] += 1
    return FitReport(fits=tuple(fits), skipped=tuple(skipped), histogram=histogram)


# ---------------------------------------------------------------------------
# notion preference


@dataclass(frozen=True)
class NotionPreferenceTable:
    """Share of well-predicted auditors whose responses satisfy each notion."""

    delta: float
    min_accuracy: float
    family: str
    well_predicted: int
    counts: dict[str, dict[str, int]]  # attribute -> column -> count

    def percentages(self) -> dict[str, dict[str, float]]:
        out: dict[str, dict[str, float]] = {}
        for attr, row in self.counts.items():
            total = sum(row.values())
            out[attr] = {
                col: (100.0 * n / total if total else 0.0) for col, n in row.items()
            }
        return out


PREFERENCE_COLUMNS = (STATISTICAL_PARITY, EQUAL_OPPORTUNITY, CALIBRATION, OTHER_PREFERENCE)


def notion_preference(
    fits: Sequence[AuditorFit],
    feedback: Feedback,
    table: DataTable,
    attributes: Sequence[str],
    delta: float = 0.0,
    min_accuracy: float = 0.8,
    family: str = FAMILY_LOGISTIC,
) -> NotionPreferenceTable:
    """Classify well-predicted auditors by the notion their responses satisfy.

    An auditor counts as well-predicted when the chosen family's held-in
    accuracy exceeds min_accuracy. Group rates are computed over the rows
    that auditor actually judged, with their responses as the predictions
    and the outcome column as the truth. The first satisfied notion in
    (statistical parity, equal opportunity, calibration) order wins;
    auditors satisfying none fall in the "other" column.
    """
    row_by_id = {row.id: row for row in table.rows}
    counts = {
        attr: {col: 0 for col in PREFERENCE_COLUMNS} for attr in attributes
    }
    well_predicted = 0
    for fit in fits:
        if fit.accuracies.get(family, 0.0) <= min_accuracy:
            continue
        well_predicted += 1
        examples = list(feedback[fit.auditor_id])
        judged = DataTable(
            schema=table.schema,
            rows=tuple(row_by_id[rid] for rid, _ in examples),
        )
        responses = [resp for _, resp in examples]
        for attr in attributes:
            reports = all_reports(judged, attr, predictions=responses, delta=delta)
            assigned = OTHER_PREFERENCE
            for report in reports:
                if report.satisfied:
                    assigned = report.notion
                    break
            counts[attr][assigned] += 1
    return NotionPreferenceTable(
        delta=delta,
        min_accuracy=min_accuracy,
        family=family,
        well_predicted=well_predicted,
        counts=counts,
    )


# ---------------------------------------------------------------------------
# PAC sample budgets


@dataclass(frozen=True)
class HypothesisComplexity:
    """Either a finite hypothesis-class size or a VC dimension."""

    kind: str  # "finite" or "vc"
    value: int

    def __post_init__(self):
        if self.kind not in ("finite", "vc"):
            raise LearningError(f"complexity kind must be finite or vc, not {self.kind!r}")
        if self.value < 1:
            raise LearningError("complexity must be at least 1")


def finite_class(size: int) -> HypothesisComplexity:
    return HypothesisComplexity(kind="finite", value=size)


def vc_class(dimension: int) -> HypothesisComplexity:
    return HypothesisComplexity(kind="vc", value=dimension)


def pac_component_bound(
    complexity: HypothesisComplexity, epsilon: float, delta: float
) -> int:
    """Realizable-PAC sample count for one learned component.

    Finite classes use ceil((ln|H| + ln(1/delta)) / epsilon); VC classes
    use the classical ceil((4 log2(2/delta) + 8 d log2(13/epsilon)) / epsilon).
    """
    if not (0.0 < epsilon < 1.0 and 0.0 < delta < 1.0):
        raise LearningError("epsilon and delta must lie strictly between 0 and 1")
    if complexity.kind == "finite":
        raw = (math.log(complexity.value) + math.log(1.0 / delta)) / epsilon
    else:
        raw = (
            4.0 * math.log2(2.0 / delta)
            + 8.0 * complexity.value * math.log2(13.0 / epsilon)
        ) / epsilon
    return math.ceil(raw)


Split = tuple[float, float, float, float, float, float]


@dataclass(frozen=True)
class PacBudget:
    """Joint sample budget for auditing with two learned components."""

    epsilon: float
    delta: float
    split: Split  # (eps_sys, eps_rule, eps_residual, delta_sys, delta_rule, delta_residual)
    n_system: int
    n_rule: int
    infeasible: int

    @property
    def budget(self) -> int:
        return max(self.n_system, self.n_rule)


def default_split_grid(epsilon: float, delta: float, steps: int = 10) -> list[Split]:
    """Candidate splits on a simplex grid.

    Each target is cut into tenths; the three shares are positive and sum
    to at most (steps - 1)/steps of the target, which keeps the strict
    budget constraints satisfiable at every grid point.
    """
    shares = []
    for i in range(1, steps):
        for j in range(1, steps - i):
            k_max = steps - 1 - i - j
            for k in range(1, k_max + 1):
                shares.append((i, j, k))
    grid = []
    for ei, ej, ek in shares:
        for di, dj, dk in shares:
            grid.append((
                ei * epsilon / steps,
                ej * epsilon / steps,
                ek * epsilon / steps,
                di * delta / steps,
                dj * delta / steps,
                dk * delta / steps,
            ))
    return grid


def pac_joint_budget(
    epsilon: float,
    delta: float,
    system_complexity: HypothesisComplexity,
    rule_complexity: HypothesisComplexity,
    grid: Iterable[Split] | None = None,
) -> PacBudget:
    """Pick the grid split minimizing the larger component sample bound.

    A split is feasible when all six parts lie in (0, 1), the tolerance
    parts sum to strictly less than the tolerance target, and the
    confidence parts sum to strictly less than 2 plus the confidence
    target (the second constraint as the source theorem states it, looser
    than one might expect; see README). Ties prefer balanced tolerance
    shares, then earlier grid order.
    """
    if grid is None:
        grid = default_split_grid(epsilon, delta)
    best: tuple[int, float, PacBudget] | None = None
    infeasible = 0
    total = 0
    for split in grid:
        total += 1
        eps_sys, eps_rule, eps_res, delta_sys, delta_rule, delta_res = split
        parts_ok = all(0.0 < p < 1.0 for p in split)
        if not parts_ok or not (
            eps_sys + eps_rule + eps_res < epsilon
            and delta_sys + delta_rule + delta_res < 2.0 + delta
        ):
            infeasible += 1
            continue
        n_system = pac_component_bound(system_complexity, eps_sys, delta_sys)
        n_rule = pac_component_bound(rule_complexity, eps_rule, delta_rule)
        key = (max(n_system, n_rule), abs(eps_sys - eps_rule))
        if best is None or key < (best[0], best[1]):
            best = (key[0], key[1], PacBudget(
                epsilon=epsilon,
                delta=delta,
                split=split,
                n_system=n_system,
                n_rule=n_rule,
                infeasible=0,
            ))
    if total == 0:
        raise LearningError("empty split grid")
    if best is None:
        raise LearningError(f"no feasible split among {total} candidates")
    chosen = best[2]
    return PacBudget(
        epsilon=chosen.epsilon,
        delta=chosen.delta,
        split=chosen.split,
        n_system=chosen.n_system,
        n_rule=chosen.n_rule,
        infeasible=infeasible,
    )
