"""Auditor judgments, tolerance thresholds, and guarantee transfer.

An auditor carries an intrinsic labeling rule and a tolerance epsilon.
Shown a system's label for a row, the auditor flags it (verdict 1) exactly
when the output-space distance between the system label and the auditor's
own label reaches epsilon; smaller gaps are accepted (verdict 0).

A tolerance model is only credible for a dataset of judgments when every
accepted gap sits strictly below epsilon, so the admissible thresholds are
exactly those strictly above the largest observed distance. Bounds proved
for the system under such a threshold transfer to the auditor's intrinsic
rule with a widened slack, computed here in closed form.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from importlib import resources
from typing import Callable, Iterable, Sequence

from .datasets import DataError, DataTable, Row, Value, _parse_range, _parse_scalar
from .distances import OutputMetric, discrete_distance
from .group_metrics import (
    CALIBRATION,
    EQUAL_OPPORTUNITY,
    STATISTICAL_PARITY,
    tally_groups,
)


class RuleError(Exception):
    pass


# ---------------------------------------------------------------------------
# intrinsic rules


@dataclass(frozen=True)
class Condition:
    """One atomic test against a row value."""

    feature: str
    op: str  # =, !=, <, <=, >, >=, in-range, in-set
    value: Value | None = None
    low: int | None = None
    high: int | None = None
    choices: tuple[Value, ...] = ()

    def matches(self, row: Row) -> bool:
        actual = row[self.feature]
        if self.op == "=":
            return actual == self.value
        if self.op == "!=":
            return actual != self.value
        if self.op == "in-set":
            return actual in self.choices
        if self.op == "in-range":
            if not isinstance(actual, int):
                return False
            lo_ok = self.low is None or actual >= self.low
            hi_ok = self.high is None or actual <= self.high
            return lo_ok and hi_ok
        if not isinstance(actual, int) or not isinstance(self.value, int):
            return False
        if self.op == "<":
            return actual < self.value
        if self.op == "<=":
            return actual <= self.value
        if self.op == ">":
            return actual > self.value
        if self.op == ">=":
            return actual >= self.value
        raise RuleError(f"unknown operator {self.op!r}")

    def to_text(self) -> str:
        if self.op == "in-set":
            return f"{self.feature} in {{{', '.join(_fmt(v) for v in self.choices)}}}"
        if self.op == "in-range":
            lo = "" if self.low is None else str(self.low)
            hi = "" if self.high is None else str(self.high)
            return f"{self.feature} in {lo}..{hi}"
        return f"{self.feature} {self.op} {_fmt(self.value)}"


def _fmt(value) -> str:
    text = str(value)
    if isinstance(value, str) and (" " in text or not text):
        return f'"{text}"'
    return text


@dataclass(frozen=True)
class Clause:
    conditions: tuple[Condition, ...]
    label: Value

    def matches(self, row: Row) -> bool:
        return all(c.matches(row) for c in self.conditions)


@dataclass(frozen=True)
class AssessmentRule:
    """First-match decision list with a default label."""

    name: str
    outputs: tuple[Value, ...]
    clauses: tuple[Clause, ...]
    default: Value

    def assess(self, row: Row) -> Value:
        for clause in self.clauses:
            if clause.matches(row):
                return clause.label
        return self.default

    def assess_table(self, table: DataTable) -> list[Value]:
        return [self.assess(row) for row in table.rows]

    def to_text(self) -> str:
        lines = [f"name: {self.name}"]
        lines.append(f"outputs: {', '.join(_fmt(v) for v in self.outputs)}")
        for clause in self.clauses:
            conds = " and ".join(c.to_text() for c in clause.conditions)
            lines.append(f"when {conds} -> {_fmt(clause.label)}")
        lines.append(f"default {_fmt(self.default)}")
        return "\n".join(lines) + "\n"


_COMPARE_RE = re.compile(r"^(.*?)\s*(!=|<=|>=|=|<|>)\s*(.+)$")


def _parse_condition(text: str) -> Condition:
    text = text.strip()
    m = re.match(r"^(\S+)\s+in\s+(.+)$", text)
    if m:
        feature, body = m.group(1), m.group(2).strip()
        if body.startswith("{") and body.endswith("}"):
            choices = tuple(_parse_scalar(t) for t in body[1:-1].split(",") if t.strip())
            if not choices:
                raise RuleError(f"empty membership set in {text!r}")
            return Condition(feature=feature, op="in-set", choices=choices)
        try:
            lo, hi = _parse_range(body)
        except ValueError:
            raise RuleError(f"bad range in condition {text!r}") from None
        return Condition(feature=feature, op="in-range", low=lo, high=hi)
    m = _COMPARE_RE.match(text)
    if not m:
        raise RuleError(f"cannot parse condition {text!r}")
    feature, op, value = m.group(1).strip(), m.group(2), _parse_scalar(m.group(3))
    if not feature:
        raise RuleError(f"cannot parse condition {text!r}")
    if op in ("<", "<=", ">", ">=") and not isinstance(value, int):
        raise RuleError(f"ordering comparison against non-integer in {text!r}")
    return Condition(feature=feature, op=op, value=value)


def parse_rule(text: str, name_hint: str = "") -> AssessmentRule:
    """Parse the rule text format.

    Lines: `name: <str>`, `outputs: a, b, ...`,
    `when <cond> and <cond> ... -> <label>`, `default <label>`.
    Conditions: `feat = v`, `feat != v`, `feat < n` (and <=, >, >=),
    `feat in lo..hi` (inclusive, either end open), `feat in {a, b}`.
    `#` starts a comment. Clauses apply first-match-wins.
    """
    name = name_hint
    outputs: tuple[Value, ...] | None = None
    clauses: list[Clause] = []
    default: Value | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip() if not raw.strip().startswith("#") else ""
        if not line:
            continue
        try:
            if line.startswith("name:"):
                name = line[len("name:"):].strip()
            elif line.startswith("outputs:"):
                outputs = tuple(_parse_scalar(t) for t in line[len("outputs:"):].split(","))
            elif line.startswith("when "):
                body, _, label = line[len("when "):].rpartition("->")
                if not _:
                    raise RuleError("missing '->'")
                conditions = tuple(
                    _parse_condition(part) for part in body.split(" and ") if part.strip()
                )
                if not conditions:
                    raise RuleError("clause with no conditions")
                clauses.append(Clause(conditions=conditions, label=_parse_scalar(label)))
            elif line.startswith("default"):
                default = _parse_scalar(line[len("default"):])
            else:
                raise RuleError(f"unrecognized directive {line.split()[0]!r}")
        except RuleError as exc:
            raise RuleError(f"line {lineno}: {exc}") from None
    if outputs is None or len(outputs) < 2:
        raise RuleError("rule needs an outputs: line with at least two labels")
    if default is None:
        raise RuleError("rule needs a default label")
    for clause in clauses:
        if clause.label not in outputs:
            raise RuleError(f"clause label {clause.label!r} not in outputs")
    if default not in outputs:
        raise RuleError(f"default label {default!r} not in outputs")
    return AssessmentRule(
        name=name or "rule", outputs=outputs, clauses=tuple(clauses), default=default
    )


BUILTIN_RULES = (
    "compas-auditor",
    "german-auditor",
    "adult-auditor",
    "compas-decile-auditor",
)


def load_rule(name_or_path: str) -> AssessmentRule:
    """Load a built-in rule by name, or any rule file by path."""
    if name_or_path in BUILTIN_RULES:
        text = resources.files("fairaudit").joinpath(
            f"rules/{name_or_path}.rule"
        ).read_text("utf-8")
        return parse_rule(text, name_hint=name_or_path)
    try:
        with open(name_or_path, encoding="utf-8") as fh:
            return parse_rule(fh.read(), name_hint=name_or_path)
    except FileNotFoundError:
        raise RuleError(
            f"{name_or_path!r} is neither a built-in rule {BUILTIN_RULES} nor a file"
        ) from None


# ---------------------------------------------------------------------------
# judgments


@dataclass(frozen=True)
class Judgment:
    """One auditor verdict on one row."""

    row_id: int
    system_label: Value
    intrinsic_label: Value
    distance: float
    verdict: int  # 1 = flagged, 0 = accepted


def judge(system_label: Value, intrinsic_label: Value, epsilon: float,
          metric: OutputMetric = discrete_distance) -> int:
    """Verdict 1 exactly when the label gap reaches the tolerance."""
    return 1 if metric(system_label, intrinsic_label) >= epsilon else 0


def simulate_judgments(
    table: DataTable,
    system_labels: Sequence[Value],
    rule: AssessmentRule,
    epsilon: float,
    metric: OutputMetric = discrete_distance,
) -> list[Judgment]:
    if len(system_labels) != len(table.rows):
        raise DataError(f"{len(system_labels)} labels for {len(table.rows)} rows")
    out = []
    for row, system_label in zip(table.rows, system_labels):
        intrinsic = rule.assess(row)
        distance = metric(system_label, intrinsic)
        out.append(Judgment(
            row_id=row.id,
            system_label=system_label,
            intrinsic_label=intrinsic,
            distance=distance,
            verdict=1 if distance >= epsilon else 0,
        ))
    return out


# ---------------------------------------------------------------------------
# tolerance admission


@dataclass(frozen=True)
class DistanceProfile:
    """Distribution of observed system-vs-intrinsic label gaps."""

    count: int
    max_distance: float
    histogram: tuple[tuple[float, int], ...]

    def admits(self, epsilon: float) -> bool:
        """A tolerance is admissible only strictly above every observed gap."""
        return epsilon > self.max_distance


def profile_distances(distances: Iterable[float]) -> DistanceProfile:
    values = [float(d) for d in distances]
    if not values:
        raise DataError("no distances to profile")
    buckets: dict[float, int] = {}
    for v in values:
        buckets[v] = buckets.get(v, 0) + 1
    return DistanceProfile(
        count=len(values),
        max_distance=max(values),
        histogram=tuple(sorted(buckets.items())),
    )


def estimate_epsilon(distances: Iterable[float]) -> float:
    """Smallest bound on the tolerance: every epsilon above this is admissible."""
    return profile_distances(distances).max_distance


@dataclass(frozen=True)
class EpsilonFit:
    """Threshold fitted to observed (distance, verdict) pairs."""

    epsilon: float
    mistakes: int
    consistent: bool


def fit_epsilon_threshold(pairs: Iterable[tuple[float, int]]) -> EpsilonFit:
    """Fit the flag-at-or-above threshold that best explains the verdicts.

    Candidates are the observed distances plus infinity (never flag); the
    fit minimizes disagreements and breaks ties toward the smallest
    threshold. A zero-mistake fit means the verdicts are exactly the
    at-or-above indicator of the returned epsilon.
    """
    data = [(float(d), int(s)) for d, s in pairs]
    if not data:
        raise DataError("no judgment pairs to fit")
    candidates = sorted({d for d, _ in data}) + [math.inf]
    best_eps, best_err = None, None
    for eps in candidates:
        err = sum(1 for d, s in data if (d >= eps) != (s == 1))
        if best_err is None or err < best_err:
            best_eps, best_err = eps, err
    return EpsilonFit(epsilon=best_eps, mistakes=best_err, consistent=best_err == 0)


# ---------------------------------------------------------------------------
# guarantee transfer


@dataclass(frozen=True)
class TransferBound:
    """Fairness slack carried from the audited system to the intrinsic rule."""

    kind: str  # individual-fair, individual-unfair, group
    delta: float
    epsilon: float
    bound: float
    kappa: float | None = None
    notion: str | None = None
    lipschitz: float | None = None
    degenerate: bool = False
    note: str = ""


def bound_individual_fair(kappa: float, delta: float, epsilon: float) -> TransferBound:
    """If the system is (kappa, delta) individually fair and the auditor
    accepts it under tolerance epsilon, the intrinsic rule is
    (kappa, 2*epsilon + delta) individually fair."""
    return TransferBound(
        kind="individual-fair",
        kappa=kappa,
        delta=delta,
        epsilon=epsilon,
        bound=2.0 * epsilon + delta,
    )


def bound_individual_unfair(kappa: float, delta: float, epsilon: float) -> TransferBound:
    """If the system violates (kappa, delta) individual fairness, the
    intrinsic rule cannot be (kappa, delta - 2*epsilon) individually fair.
    The statement is vacuous once delta - 2*epsilon drops to zero."""
    slack = delta - 2.0 * epsilon
    degenerate = slack <= 0.0
    return TransferBound(
        kind="individual-unfair",
        kappa=kappa,
        delta=delta,
        epsilon=epsilon,
        bound=slack,
        degenerate=degenerate,
        note="vacuous: slack is not positive" if degenerate else "",
    )


def bound_group(delta: float, epsilon: float, lipschitz: float,
                notion: str = STATISTICAL_PARITY) -> TransferBound:
    """Group-notion slack widens by twice the rate sensitivity times the
    tolerance: each group's rate moves at most lipschitz * epsilon."""
    return TransferBound(
        kind="group",
        notion=notion,
        delta=delta,
        epsilon=epsilon,
        lipschitz=lipschitz,
        bound=2.0 * lipschitz * epsilon + delta,
    )


def estimate_lipschitz(
    table: DataTable,
    attribute: str,
    system_labels: Sequence[Value],
    intrinsic_labels: Sequence[Value],
    notion: str = STATISTICAL_PARITY,
    metric: OutputMetric = discrete_distance,
    truths: Sequence[Value] | None = None,
) -> float:
    """Realized rate sensitivity of one group notion to label changes.

    The ratio between the largest per-group rate shift (system labels vs
    intrinsic labels) and the largest pointwise output distance. Zero when
    the labelings agree everywhere.
    """
    gaps = [metric(g, f) for g, f in zip(system_labels, intrinsic_labels)]
    if len(gaps) != len(table.rows):
        raise DataError(f"{len(gaps)} label pairs for {len(table.rows)} rows")
    worst_gap = max(gaps) if gaps else 0.0
    if worst_gap == 0.0:
        return 0.0

    def rates(labels):
        split = tally_groups(table, attribute, labels, truths)
        if notion == STATISTICAL_PARITY:
            pick = lambda g: g.selection_rate
        elif notion == EQUAL_OPPORTUNITY:
            pick = lambda g: g.true_positive_rate
        elif notion == CALIBRATION:
            pick = lambda g: g.positive_predictive_value
        else:
            raise DataError(f"unknown notion {notion!r}")
        return pick(split.unprivileged), pick(split.privileged)

    system_rates = rates(system_labels)
    intrinsic_rates = rates(intrinsic_labels)
    shift = 0.0
    for before, after in zip(system_rates, intrinsic_rates):
        if before is None or after is None:
            continue
        shift = max(shift, abs(float(after - before)))
    return shift / worst_gap
