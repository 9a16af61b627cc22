import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairaudit.assessment import (
    BUILTIN_RULES,
    RuleError,
    bound_group,
    bound_individual_fair,
    bound_individual_unfair,
    estimate_epsilon,
    estimate_lipschitz,
    fit_epsilon_threshold,
    judge,
    load_rule,
    parse_rule,
    profile_distances,
    simulate_judgments,
)
from fairaudit.datasets import DataTable, FeatureKind, Row, Schema, one_hot_encode
from fairaudit.distances import absolute_distance, discrete_distance
from fairaudit.group_metrics import STATISTICAL_PARITY, statistical_parity_diff
from fairaudit.similarity import individual_fairness_check

RULE_TEXT = """\
# toy screening rule
name: toy
outputs: 0, 1
when priors in 1..3 and charge = F -> 1
when priors > 3 -> 1
when name != "no match" and priors <= 0 -> 0
when tier in {A, B} -> 1
default 0
"""


def rule_row(**values):
    return Row(id=0, values=values)


class TestRuleParsing:
    def test_parses_and_evaluates(self):
        rule = parse_rule(RULE_TEXT)
        assert rule.name == "toy"
        assert rule.outputs == (0, 1)
        assert rule.default == 0
        assert rule.assess(rule_row(priors=2, charge="F", name="x", tier="C")) == 1
        assert rule.assess(rule_row(priors=9, charge="M", name="x", tier="C")) == 1
        assert rule.assess(rule_row(priors=0, charge="M", name="x", tier="C")) == 0
        assert rule.assess(rule_row(priors=0, charge="M", name="no match", tier="B")) == 1

    def test_first_match_wins(self):
        rule = parse_rule("outputs: 1, 2\nwhen x > 0 -> 1\nwhen x > 10 -> 2\ndefault 2\n")
        assert rule.assess(rule_row(x=50)) == 1

    def test_open_ended_ranges(self):
        rule = parse_rule("outputs: 0, 1\nwhen x in ..5 -> 1\ndefault 0\n")
        assert rule.assess(rule_row(x=-100)) == 1
        assert rule.assess(rule_row(x=5)) == 1
        assert rule.assess(rule_row(x=6)) == 0
        high = parse_rule("outputs: 0, 1\nwhen x in 5.. -> 1\ndefault 0\n")
        assert high.assess(rule_row(x=5)) == 1
        assert high.assess(rule_row(x=4)) == 0

    def test_ordering_against_non_integer_never_matches(self):
        rule = parse_rule("outputs: 0, 1\nwhen x > 3 -> 1\ndefault 0\n")
        assert rule.assess(rule_row(x="not a number")) == 0

    def test_round_trip_through_text(self):
        rule = parse_rule(RULE_TEXT)
        again = parse_rule(rule.to_text())
        assert again == rule

    def test_builtin_rules_load_and_round_trip(self):
        for name in BUILTIN_RULES:
            rule = load_rule(name)
            assert rule.name == name
            assert len(rule.outputs) >= 2
            assert parse_rule(rule.to_text()) == rule

    def test_quoted_strings_survive_round_trip(self):
        rule = parse_rule('outputs: 0, 1\nwhen s = "two words" -> 1\ndefault 0\n')
        assert rule.assess(rule_row(s="two words")) == 1
        assert parse_rule(rule.to_text()) == rule

    @pytest.mark.parametrize(
        "text",
        [
            "when x = 1 -> 1\ndefault 0\n",  # no outputs
            "outputs: 1\ndefault 1\n",  # single output
            "outputs: 0, 1\nwhen x = 1 -> 1\n",  # no default
            "outputs: 0, 1\nwhen x = 1 -> 7\ndefault 0\n",  # label outside outputs
            "outputs: 0, 1\ndefault 7\n",  # default outside outputs
            "outputs: 0, 1\nwhen x in {} -> 1\ndefault 0\n",  # empty set
            "outputs: 0, 1\nwhen x > foo -> 1\ndefault 0\n",  # order vs string
            "outputs: 0, 1\nwobble x = 1\ndefault 0\n",  # unknown directive
            "outputs: 0, 1\nwhen x = 1 1\ndefault 0\n",  # missing arrow
        ],
    )
    def test_rejects_malformed_rules(self, text):
        with pytest.raises(RuleError):
            parse_rule(text)

    def test_unknown_builtin_name(self):
        with pytest.raises(RuleError, match="neither"):
            load_rule("definitely-not-a-rule")


class TestJudging:
    def test_boundary_gap_is_flagged(self):
        # verdict is 1 exactly when the gap reaches epsilon, including equality
        assert judge(5, 3, 2.0, absolute_distance) == 1
        assert judge(5, 4, 2.0, absolute_distance) == 0
        assert judge("a", "b", 1.0) == 1
        assert judge("a", "a", 1.0) == 0
        assert judge("a", "a", 0.0) == 1  # zero tolerance flags everything

    def test_simulation_covers_every_row_once(self, compas_table):
        rule = load_rule("compas-auditor")
        system = list(compas_table.column("compas_pred"))
        judgments = simulate_judgments(compas_table, system, rule, epsilon=1.0)
        assert [j.row_id for j in judgments] == compas_table.row_ids()
        for j in judgments:
            assert j.verdict == (1 if j.distance >= 1.0 else 0)
            assert j.distance == discrete_distance(j.system_label, j.intrinsic_label)

    def test_length_mismatch_rejected(self, compas_table):
        rule = load_rule("compas-auditor")
        with pytest.raises(Exception, match="labels"):
            simulate_judgments(compas_table, [0, 1], rule, epsilon=1.0)

    @given(
        gaps=st.lists(st.floats(min_value=0.0, max_value=10.0), min_size=1, max_size=50),
        epsilon=st.floats(min_value=0.0, max_value=10.0),
    )
    def test_verdict_is_threshold_indicator(self, gaps, epsilon):
        for gap in gaps:
            verdict = 1 if gap >= epsilon else 0
            assert judge(gap, 0.0, epsilon, absolute_distance) == verdict


class TestToleranceAdmission:
    def test_admits_strictly_above_max(self):
        profile = profile_distances([0.0, 0.4, 1.0, 0.4])
        assert profile.count == 4
        assert profile.max_distance == 1.0
        assert not profile.admits(1.0)
        assert profile.admits(1.0 + 1e-12)
        assert profile.histogram == ((0.0, 1), (0.4, 2), (1.0, 1))

    def test_estimate_epsilon_is_max_gap(self):
        assert estimate_epsilon([0.2, 0.9, 0.4]) == 0.9

    def test_fit_recovers_threshold_on_consistent_data(self):
        distances = [0.1, 0.3, 0.5, 0.7, 0.9]
        verdicts = [1 if d >= 0.5 else 0 for d in distances]
        fit = fit_epsilon_threshold(zip(distances, verdicts))
        assert fit.epsilon == 0.5
        assert fit.mistakes == 0
        assert fit.consistent

    def test_fit_never_flagging_returns_infinity(self):
        fit = fit_epsilon_threshold([(0.2, 0), (0.8, 0)])
        assert fit.epsilon == math.inf
        assert fit.consistent

    def test_fit_breaks_ties_toward_smallest(self):
        # 0.3 and infinity both make one mistake; the smaller wins
        fit = fit_epsilon_threshold([(0.3, 1), (0.7, 0)])
        assert fit.epsilon == 0.3
        assert fit.mistakes == 1
        assert not fit.consistent

    @given(
        data=st.lists(
            st.tuples(st.floats(min_value=0.0, max_value=5.0), st.integers(0, 1)),
            min_size=1,
            max_size=40,
        )
    )
    @settings(max_examples=200)
    def test_fit_is_optimal_over_candidates(self, data):
        fit = fit_epsilon_threshold(data)
        candidates = sorted({d for d, _ in data}) + [math.inf]
        errors = {
            eps: sum(1 for d, s in data if (d >= eps) != (s == 1)) for eps in candidates
        }
        assert fit.mistakes == min(errors.values())
        assert errors[fit.epsilon] == fit.mistakes
        # smallest among the minimizers
        assert fit.epsilon == min(e for e, m in errors.items() if m == fit.mistakes)

    @given(
        distances=st.lists(st.floats(min_value=0.0, max_value=5.0), min_size=1, max_size=40),
        threshold=st.floats(min_value=0.0, max_value=5.0),
    )
    @settings(max_examples=200)
    def test_fit_consistent_when_verdicts_are_thresholded(self, distances, threshold):
        pairs = [(d, 1 if d >= threshold else 0) for d in distances]
        fit = fit_epsilon_threshold(pairs)
        assert fit.consistent
        for d, s in pairs:
            assert (d >= fit.epsilon) == (s == 1)


class TestBoundFormulas:
    def test_individual_fair_widens_by_twice_epsilon(self):
        b = bound_individual_fair(kappa=0.5, delta=0.1, epsilon=0.2)
        assert b.kind == "individual-fair"
        assert b.bound == pytest.approx(0.5)
        assert b.kappa == 0.5
        assert not b.degenerate

    def test_individual_unfair_narrows_by_twice_epsilon(self):
        b = bound_individual_unfair(kappa=0.5, delta=0.5, epsilon=0.1)
        assert b.bound == pytest.approx(0.3)
        assert not b.degenerate
        assert b.note == ""

    def test_individual_unfair_degenerates_at_zero_slack(self):
        assert bound_individual_unfair(0.5, 0.2, 0.1).degenerate
        assert bound_individual_unfair(0.5, 0.1, 0.2).degenerate
        assert "vacuous" in bound_individual_unfair(0.5, 0.1, 0.2).note

    def test_group_bound_formula(self):
        b = bound_group(delta=0.05, epsilon=0.1, lipschitz=2.0)
        assert b.bound == pytest.approx(0.45)
        assert b.notion == STATISTICAL_PARITY
        assert b.lipschitz == 2.0


def labeled_table(values, ys=None):
    """Toy table: one categorical feature drives the zero-distance clusters."""
    ys = ys if ys is not None else [0] * len(values)
    schema = Schema(
        features=(("a", FeatureKind.CATEGORICAL), ("y", FeatureKind.BINARY)),
        protected=(),
        outcome=("y", 1),
        output_space=(0, 1),
        auxiliary=("y",),
    )
    rows = tuple(
        Row(id=i, values={"a": v, "y": y}) for i, (v, y) in enumerate(zip(values, ys))
    )
    return one_hot_encode(DataTable(schema=schema, rows=rows))


def group_table(groups, truths):
    schema = Schema(
        features=(("grp", FeatureKind.BINARY), ("y", FeatureKind.BINARY)),
        protected=(("grp", 1),),
        outcome=("y", 1),
        output_space=(0, 1),
    )
    rows = tuple(
        Row(id=i, values={"grp": g, "y": t}) for i, (g, t) in enumerate(zip(groups, truths))
    )
    return DataTable(schema=schema, rows=rows)


class TestTransferProperties:
    """Randomized checks that the closed-form bounds really transfer."""

    def test_accepted_system_transfers_individual_fairness(self):
        rng = np.random.default_rng(20)
        for _ in range(200):
            n = int(rng.integers(4, 30))
            values = rng.integers(0, 4, size=n).tolist()
            epsilon = float(rng.uniform(0.05, 1.0))
            delta = float(rng.uniform(0.0, 1.0))
            # system labels uniform within each cluster up to delta
            base = {v: float(rng.uniform(0, 5)) for v in set(values)}
            system = [base[v] + float(rng.uniform(0, delta)) / 2 for v in values]
            # auditor accepts every row: gaps strictly below epsilon
            intrinsic = [s + float(rng.uniform(-1, 1)) * epsilon * 0.99 for s in system]
            table = labeled_table(values)

            sys_report = individual_fairness_check(
                table, system, kappa=0.0, delta=delta, metric=absolute_distance
            )
            assert sys_report.satisfied
            widened = bound_individual_fair(0.0, delta, epsilon).bound
            rule_report = individual_fairness_check(
                table, intrinsic, kappa=0.0, delta=widened, metric=absolute_distance
            )
            assert rule_report.satisfied

    def test_violating_system_transfers_individual_unfairness(self):
        rng = np.random.default_rng(21)
        checked = 0
        for _ in range(300):
            epsilon = float(rng.uniform(0.01, 0.2))
            delta = float(rng.uniform(0.5, 1.5))
            bound = bound_individual_unfair(0.0, delta, epsilon)
            if bound.degenerate:
                continue
            # one duplicated pair whose system labels differ by more than delta
            gap = delta + float(rng.uniform(0.05, 1.0))
            system = [0.0, gap, 5.0]
            intrinsic = [s + float(rng.uniform(-1, 1)) * epsilon * 0.99 for s in system]
            table = labeled_table(["p", "p", "q"])

            sys_report = individual_fairness_check(
                table, system, kappa=0.0, delta=delta, metric=absolute_distance
            )
            assert not sys_report.satisfied
            rule_report = individual_fairness_check(
                table, intrinsic, kappa=0.0, delta=bound.bound, metric=absolute_distance
            )
            assert not rule_report.satisfied
            checked += 1
        assert checked > 100  # the degenerate filter must not eat the test

    def test_group_difference_stays_within_transferred_bound(self):
        rng = np.random.default_rng(22)
        checked = 0
        for _ in range(300):
            n = int(rng.integers(10, 80))
            groups = rng.integers(0, 2, size=n).tolist()
            truths = rng.integers(0, 2, size=n).tolist()
            system = rng.integers(0, 2, size=n).tolist()
            flip = rng.random(size=n) < 0.3
            intrinsic = [1 - s if f else s for s, f in zip(system, flip)]
            table = group_table(groups, truths)

            sys_rep = statistical_parity_diff(table, "grp", system)
            rule_rep = statistical_parity_diff(table, "grp", intrinsic)
            if sys_rep.difference is None or rule_rep.difference is None:
                continue
            gaps = [discrete_distance(s, f) for s, f in zip(system, intrinsic)]
            epsilon = max(gaps)
            if epsilon == 0.0:
                continue
            lipschitz = estimate_lipschitz(table, "grp", system, intrinsic)
            delta = abs(float(sys_rep.difference))
            bound = bound_group(delta=delta, epsilon=epsilon, lipschitz=lipschitz)
            assert abs(float(rule_rep.difference)) <= bound.bound + 1e-12
            checked += 1
        assert checked > 200

    def test_lipschitz_zero_when_labelings_agree(self, compas_table):
        labels = list(compas_table.column("compas_pred"))
        assert estimate_lipschitz(compas_table, "sex", labels, labels) == 0.0

    def test_lipschitz_hand_value(self):
        # flipping one of two unprivileged rows moves that selection rate by
        # 1/2 while the worst pointwise gap is 1, so the ratio is 1/2
        table = group_table([0, 0, 1, 1], [1, 1, 1, 1])
        system = [1, 0, 1, 0]
        intrinsic = [0, 0, 1, 0]
        assert estimate_lipschitz(table, "grp", system, intrinsic) == pytest.approx(0.5)
