"""Group fairness notions over a decision table.

Three standard notions, each reduced to a signed rate difference between
the unprivileged and privileged groups of one protected attribute:

* statistical parity: favorable-prediction rate per group
* equal opportunity: favorable-prediction rate among truly favorable rows
* calibration: truly-favorable rate among favorably-predicted rows

Rates are exact rationals (fractions.Fraction); floats appear only at the
reporting boundary. A rate is undefined when its denominator is empty, and
an undefined notion is never satisfied.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .datasets import DataError, DataTable, Value

STATISTICAL_PARITY = "statistical-parity"
EQUAL_OPPORTUNITY = "equal-opportunity"
CALIBRATION = "calibration"
NOTIONS = (STATISTICAL_PARITY, EQUAL_OPPORTUNITY, CALIBRATION)


@dataclass(frozen=True)
class GroupRates:
    """Favorable-outcome tallies for one group of rows."""

    size: int
    pred_favorable: int
    truth_favorable: int
    true_positive: int  # predicted favorable and truly favorable

    @property
    def selection_rate(self) -> Fraction | None:
        if self.size == 0:
            return None
        return Fraction(self.pred_favorable, self.size)

    @property
    def true_positive_rate(self) -> Fraction | None:
        if self.truth_favorable == 0:
            return None
        return Fraction(self.true_positive, self.truth_favorable)

    @property
    def positive_predictive_value(self) -> Fraction | None:
        if self.pred_favorable == 0:
            return None
        return Fraction(self.true_positive, self.pred_favorable)


@dataclass(frozen=True)
class GroupSplit:
    attribute: str
    privileged_value: Value
    privileged: GroupRates
    unprivileged: GroupRates


@dataclass(frozen=True)
class FairnessReport:
    """One notion evaluated at one threshold for one protected attribute."""

    notion: str
    attribute: str
    privileged_value: Value
    unprivileged_rate: Fraction | None
    privileged_rate: Fraction | None
    delta: float

    @property
    def defined(self) -> bool:
        return self.unprivileged_rate is not None and self.privileged_rate is not None

    @property
    def difference(self) -> Fraction | None:
        """Signed difference, unprivileged minus privileged."""
        if not self.defined:
            return None
        return self.unprivileged_rate - self.privileged_rate

    @property
    def satisfied(self) -> bool:
        diff = self.difference
        return diff is not None and abs(diff) <= self.delta

    def to_csv_row(self) -> list[str]:
        def fmt(rate):
            return "undefined" if rate is None else f"{float(rate):.6f}"

        return [
            self.notion,
            self.attribute,
            str(self.privileged_value),
            fmt(self.unprivileged_rate),
            fmt(self.privileged_rate),
            fmt(self.difference),
            f"{self.delta:.6f}",
            "yes" if self.satisfied else "no",
        ]


CSV_HEADER = [
    "notion",
    "attribute",
    "privileged",
    "unprivileged_rate",
    "privileged_rate",
    "difference",
    "delta",
    "satisfied",
]


def _labels(table: DataTable, labels: Sequence[Value] | None, what: str) -> list[Value]:
    if labels is None:
        if table.schema.outcome is None:
            raise DataError(f"no {what} given and the schema has no outcome column")
        return list(table.column(table.schema.outcome[0]))
    out = list(labels)
    if len(out) != len(table.rows):
        raise DataError(f"{what} has {len(out)} entries for {len(table.rows)} rows")
    return out


def _favorable(table: DataTable) -> Value:
    if table.schema.outcome is None:
        raise DataError("schema has no outcome column, so no favorable label")
    return table.schema.outcome[1]


def tally_groups(
    table: DataTable,
    attribute: str,
    predictions: Sequence[Value] | None = None,
    truths: Sequence[Value] | None = None,
) -> GroupSplit:
    """Split rows on the protected attribute and tally favorable labels.

    The privileged group holds rows whose attribute equals the schema's
    privileged value; every other row is unprivileged.
    """
    privileged_value = table.schema.privileged_value(attribute)
    preds = _labels(table, predictions, "predictions")
    actual = _labels(table, truths, "truths")
    favorable = _favorable(table)

    counts = {True: [0, 0, 0, 0], False: [0, 0, 0, 0]}  # size, pred_fav, truth_fav, tp
    for row, pred, truth in zip(table.rows, preds, actual):
        c = counts[row[attribute] == privileged_value]
        c[0] += 1
        pred_fav = pred == favorable
        truth_fav = truth == favorable
        c[1] += pred_fav
        c[2] += truth_fav
        c[3] += pred_fav and truth_fav
    make = lambda c: GroupRates(size=c[0], pred_favorable=c[1], truth_favorable=c[2], true_positive=c[3])
    return GroupSplit(
        attribute=attribute,
        privileged_value=privileged_value,
        privileged=make(counts[True]),
        unprivileged=make(counts[False]),
    )


def _report(notion: str, split: GroupSplit, rate_of, delta: float) -> FairnessReport:
    return FairnessReport(
        notion=notion,
        attribute=split.attribute,
        privileged_value=split.privileged_value,
        unprivileged_rate=rate_of(split.unprivileged),
        privileged_rate=rate_of(split.privileged),
        delta=delta,
    )


def statistical_parity_diff(
    table: DataTable,
    attribute: str,
    predictions: Sequence[Value] | None = None,
    delta: float = 0.0,
) -> FairnessReport:
    split = tally_groups(table, attribute, predictions)
    return _report(STATISTICAL_PARITY, split, lambda g: g.selection_rate, delta)


def equal_opportunity_diff(
    table: DataTable,
    attribute: str,
    predictions: Sequence[Value] | None = None,
    truths: Sequence[Value] | None = None,
    delta: float = 0.0,
) -> FairnessReport:
    split = tally_groups(table, attribute, predictions, truths)
    return _report(EQUAL_OPPORTUNITY, split, lambda g: g.true_positive_rate, delta)


def calibration_diff(
    table: DataTable,
    attribute: str,
    predictions: Sequence[Value] | None = None,
    truths: Sequence[Value] | None = None,
    delta: float = 0.0,
) -> FairnessReport:
    split = tally_groups(table, attribute, predictions, truths)
    return _report(CALIBRATION, split, lambda g: g.positive_predictive_value, delta)


def all_reports(
    table: DataTable,
    attribute: str,
    predictions: Sequence[Value] | None = None,
    truths: Sequence[Value] | None = None,
    delta: float = 0.0,
) -> list[FairnessReport]:
    return [
        statistical_parity_diff(table, attribute, predictions, delta),
        equal_opportunity_diff(table, attribute, predictions, truths, delta),
        calibration_diff(table, attribute, predictions, truths, delta),
    ]


def sweep_delta(
    reports: Iterable[FairnessReport],
    deltas: Iterable[float],
) -> list[tuple[float, dict[tuple[str, str], bool]]]:
    """Re-evaluate satisfaction of each report across a threshold grid.

    Returns one entry per delta: (delta, {(notion, attribute): satisfied}).
    Undefined reports stay unsatisfied at every threshold.
    """
    fixed = list(reports)
    rows = []
    for delta in deltas:
        verdicts = {}
        for r in fixed:
            diff = r.difference
            verdicts[(r.notion, r.attribute)] = diff is not None and abs(diff) <= delta
        rows.append((float(delta), verdicts))
    return rows
