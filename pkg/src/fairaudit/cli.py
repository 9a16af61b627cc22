"""Command-line entry point for the full auditing pipeline.

Subcommands: ingest, metrics, cluster, simulate, learn, bounds, pac,
sweep, sample, report, serve. Every subcommand except serve writes a
deterministic self-describing report: comment lines (`# key: value`)
echoing the configuration, then one or more CSV tables. Section markers
(`# table: <name>`) separate multiple tables in one file.

Exit codes: 0 success, 2 usage or configuration error, 3 data error,
4 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

from . import assessment, group_metrics, learning, sampledata, similarity
from .datasets import (
    DataError,
    RecipeError,
    load_prepared,
    one_hot_encode,
)
from .distances import metric_names, resolve_metric

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4

REPORT_VERSION = 1


class _Reporter:
    """Accumulates a deterministic text report."""

    def __init__(self, command: str, echo: dict):
        self.lines = [f"# fairaudit-report v{REPORT_VERSION}", f"# command: {command}"]
        for key in echo:
            self.lines.append(f"# {key}: {echo[key]}")

    def comment(self, key: str, value):
        self.lines.append(f"# {key}: {value}")

    def table(self, name: str, header: Sequence[str], rows):
        self.lines.append(f"# table: {name}")
        self.lines.append(",".join(header))
        for row in rows:
            self.lines.append(",".join(str(cell) for cell in row))

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def _resolve_out(path: str | None) -> str | None:
    if path is None:
        return None
    out_dir = os.environ.get("FAIRAUDIT_OUT_DIR")
    if out_dir and not os.path.isabs(path):
        return os.path.join(out_dir, path)
    return path


def _emit(report: _Reporter, out_path: str | None):
    text = report.text()
    resolved = _resolve_out(out_path)
    if resolved is None:
        sys.stdout.write(text)
    else:
        os.makedirs(os.path.dirname(os.path.abspath(resolved)), exist_ok=True)
        with open(resolved, "w", encoding="utf-8") as fh:
            fh.write(text)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("FAIRAUDIT_SEED")
    return int(env) if env else 0


def _load(args, encode: bool = True):
    table, load_report, recipe = load_prepared(args.data, args.recipe)
    if load_report.rejected:
        print(
            f"note: rejected {len(load_report.rejected)} of "
            f"{load_report.accepted + len(load_report.rejected)} rows",
            file=sys.stderr,
        )
    if encode:
        table = one_hot_encode(table)
    return table, load_report, recipe


def _column_labels(table, column: str | None):
    """Labels from a named column, or the outcome column when none given."""
    if column is None:
        if table.schema.outcome is None:
            raise DataError("no column given and the recipe has no outcome")
        column = table.schema.outcome[0]
    if column not in {name for name, _ in table.schema.features}:
        raise DataError(f"column {column!r} not in the prepared table")
    return list(table.column(column)), column


# ---------------------------------------------------------------------------
# subcommands


def cmd_ingest(args) -> int:
    table, load_report, recipe = _load(args, encode=False)
    echo = {"dataset": args.data, "recipe": recipe.name}
    report = _Reporter("ingest", echo)
    report.comment("accepted", load_report.accepted)
    report.comment("rejected", len(load_report.rejected))
    if load_report.rejected:
        report.table(
            "rejected",
            ["line", "reason"],
            [(lineno, reason) for lineno, reason in load_report.rejected],
        )
    columns = [name for name, _ in table.schema.features]
    report.table(
        "rows",
        ["id"] + columns,
        [[row.id] + [row[c] for c in columns] for row in table.rows],
    )
    _emit(report, args.out)
    return EXIT_OK


def cmd_metrics(args) -> int:
    table, _, recipe = _load(args, encode=False)
    predictions, pred_col = _column_labels(table, args.pred_column)
    truths, truth_col = _column_labels(table, args.truth_column)
    echo = {
        "dataset": args.data,
        "recipe": recipe.name,
        "predictions": pred_col,
        "truths": truth_col,
        "delta": args.delta,
    }
    report = _Reporter("metrics", echo)
    rows = []
    for attr, _priv in table.schema.protected:
        for rep in group_metrics.all_reports(
            table, attr, predictions=predictions, truths=truths, delta=args.delta
        ):
            rows.append(rep.to_csv_row())
    report.table("group-metrics", group_metrics.CSV_HEADER, rows)
    _emit(report, args.out)
    return EXIT_OK


def cmd_cluster(args) -> int:
    table, _, recipe = _load(args)
    config = similarity.load_cluster_config(args.cluster_config)
    if recipe.name != config.recipe:
        # the pinned feature list only fits its own recipe; fall back to all features
        config = similarity.ClusterConfig(
            recipe=recipe.name,
            features=tuple(table.schema.encoded_features()),
            tolerance=config.tolerance,
            rcond=config.rcond,
        )
    index, model = similarity.cluster_with_config(table, config)
    echo = {
        "dataset": args.data,
        "recipe": recipe.name,
        "features": " ".join(config.features),
        "tolerance": config.tolerance,
        "rcond": config.rcond,
    }
    report = _Reporter("cluster", echo)
    report.comment("clusters", index.n_clusters)
    report.comment("covariance-rank", f"{model.rank}/{model.dim}")
    if args.labels_column is not None:
        labels, label_col = _column_labels(table, args.labels_column)
        metric = resolve_metric(args.metric)
        check = similarity.individual_fairness_check(
            table,
            labels,
            kappa=args.kappa,
            delta=args.label_delta,
            metric=metric,
            tolerance=config.tolerance,
        )
        verdict = "satisfies" if check.satisfied else "fails to satisfy"
        report.comment(
            "verdict",
            f"{label_col} {verdict} individual fairness "
            f"(kappa={check.kappa}, delta={check.delta})",
        )
        report.comment("consistency", f"{check.consistency:.6f}")
        report.comment("violating-pairs", check.violating_pairs)
    report.table(
        "clusters",
        ["cluster", "size", "row_ids"],
        [
            (k, len(members), " ".join(str(rid) for rid in members))
            for k, members in enumerate(index.clusters)
        ],
    )
    _emit(report, args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    table, _, recipe = _load(args, encode=False)
    rule = assessment.load_rule(args.rule)
    system_labels, system_col = _column_labels(table, args.system_column)
    metric = resolve_metric(args.metric)
    judgments = assessment.simulate_judgments(
        table, system_labels, rule, args.epsilon, metric
    )
    echo = {
        "dataset": args.data,
        "recipe": recipe.name,
        "rule": rule.name,
        "system": system_col,
        "epsilon": args.epsilon,
        "metric": args.metric,
    }
    report = _Reporter("simulate", echo)
    profile = assessment.profile_distances(j.distance for j in judgments)
    report.comment("max-distance", profile.max_distance)
    report.comment("flagged", sum(j.verdict for j in judgments))
    report.comment(
        "admitted",
        "yes" if profile.admits(args.epsilon) else "no",
    )
    report.table(
        "judgments",
        ["row_id", "system_label", "intrinsic_label", "distance", "verdict"],
        [
            (j.row_id, j.system_label, j.intrinsic_label, j.distance, j.verdict)
            for j in judgments
        ],
    )
    _emit(report, args.out)
    return EXIT_OK


def cmd_learn(args) -> int:
    table, _, recipe = _load(args)
    feedback = learning.load_feedback_csv(args.feedback)
    config = learning.load_defaults(args.defaults)
    fit_report = learning.fit_all_auditors(
        table,
        feedback,
        min_examples=args.min_examples,
        config=config,
    )
    attrs = args.attr or [name for name, _ in table.schema.protected]
    preference = learning.notion_preference(
        fit_report.fits,
        feedback,
        table,
        attrs,
        delta=args.delta,
        min_accuracy=args.min_accuracy,
        family=args.family,
    )
    echo = {
        "dataset": args.data,
        "recipe": recipe.name,
        "feedback": args.feedback,
        "min-examples": args.min_examples,
        "delta": args.delta,
        "min-accuracy": args.min_accuracy,
        "family": args.family,
    }
    report = _Reporter("learn", echo)
    report.comment("auditors", len(fit_report.fits))
    report.comment("skipped", len(fit_report.skipped))
    report.comment("well-predicted", preference.well_predicted)
    report.table(
        "fits",
        ["auditor_id", "examples"] + [f"accuracy_{f}" for f in learning.FAMILIES] + ["best"],
        [
            [fit.auditor_id, fit.n_examples]
            + [f"{fit.accuracies[f]:.6f}" for f in learning.FAMILIES]
            + [fit.best_family()]
            for fit in fit_report.fits
        ],
    )
    if fit_report.skipped:
        report.table("skipped", ["auditor_id", "examples"], fit_report.skipped)
    report.table(
        "histogram",
        ["family"] + list(learning.ACCURACY_BANDS),
        [
            [family] + [fit_report.histogram[family][band] for band in learning.ACCURACY_BANDS]
            for family in learning.FAMILIES
        ],
    )
    percentages = preference.percentages()
    report.table(
        "preference",
        ["attribute"] + [c for c in learning.PREFERENCE_COLUMNS],
        [
            [attr] + [f"{percentages[attr][c]:.2f}" for c in learning.PREFERENCE_COLUMNS]
            for attr in attrs
        ],
    )
    _emit(report, args.out)
    return EXIT_OK


def cmd_bounds(args) -> int:
    echo = {
        "kind": args.kind,
        "epsilon": args.epsilon,
        "delta": args.delta,
    }
    if args.kind == "group":
        bound = assessment.bound_group(args.delta, args.epsilon, args.lipschitz, args.notion)
        echo["lipschitz"] = args.lipschitz
        echo["notion"] = args.notion
    elif args.kind == "individual-fair":
        bound = assessment.bound_individual_fair(args.kappa, args.delta, args.epsilon)
        echo["kappa"] = args.kappa
    else:
        bound = assessment.bound_individual_unfair(args.kappa, args.delta, args.epsilon)
        echo["kappa"] = args.kappa
    report = _Reporter("bounds", echo)
    report.table(
        "bound",
        ["kind", "bound", "degenerate", "note"],
        [(bound.kind, bound.bound, "yes" if bound.degenerate else "no", bound.note)],
    )
    _emit(report, args.out)
    return EXIT_OK


def _complexity(count: int | None, vc: int | None, what: str):
    if (count is None) == (vc is None):
        raise ValueError(f"give exactly one of --{what}-hypotheses / --{what}-vc")
    if count is not None:
        return learning.finite_class(count)
    return learning.vc_class(vc)


def cmd_pac(args) -> int:
    system = _complexity(args.system_hypotheses, args.system_vc, "system")
    rule = _complexity(args.rule_hypotheses, args.rule_vc, "rule")
    budget = learning.pac_joint_budget(args.epsilon, args.delta, system, rule)
    echo = {"epsilon": args.epsilon, "delta": args.delta}
    report = _Reporter("pac", echo)
    report.comment("budget", budget.budget)
    report.comment("infeasible-splits", budget.infeasible)
    eps_sys, eps_rule, eps_res, d_sys, d_rule, d_res = budget.split
    report.table(
        "budget",
        [
            "n_system", "n_rule", "budget",
            "eps_system", "eps_rule", "eps_residual",
            "delta_system", "delta_rule", "delta_residual",
        ],
        [(
            budget.n_system, budget.n_rule, budget.budget,
            eps_sys, eps_rule, eps_res, d_sys, d_rule, d_res,
        )],
    )
    _emit(report, args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    table, _, recipe = _load(args, encode=False)
    feedback = learning.load_feedback_csv(args.feedback)
    attrs = args.attr or [name for name, _ in table.schema.protected]
    deltas = [float(d) for d in args.deltas.split(",")]
    if sorted(deltas) != deltas:
        raise ValueError("--deltas must be sorted ascending")
    row_by_id = {row.id: row for row in table.rows}

    from .datasets import DataTable

    per_auditor_reports: dict[str, list] = {}
    for auditor_id in sorted(feedback):
        examples = [e for e in feedback[auditor_id] if e[0] in row_by_id]
        if len(examples) < args.min_examples:
            continue
        judged = DataTable(
            schema=table.schema,
            rows=tuple(row_by_id[rid] for rid, _ in examples),
        )
        responses = [resp for _, resp in examples]
        reports = []
        for attr in attrs:
            reports.extend(
                group_metrics.all_reports(judged, attr, predictions=responses)
            )
        per_auditor_reports[auditor_id] = reports

    echo = {
        "dataset": args.data,
        "recipe": recipe.name,
        "feedback": args.feedback,
        "auditors": len(per_auditor_reports),
        "deltas": args.deltas,
    }
    report = _Reporter("sweep", echo)
    rows = []
    total = len(per_auditor_reports)
    for delta in deltas:
        tally: dict[tuple[str, str], int] = {}
        for reports in per_auditor_reports.values():
            for rep in reports:
                key = (rep.attribute, rep.notion)
                diff = rep.difference
                ok = diff is not None and abs(diff) <= delta
                tally[key] = tally.get(key, 0) + (1 if ok else 0)
        for (attr, notion), count in sorted(tally.items()):
            pct = 100.0 * count / total if total else 0.0
            rows.append((delta, attr, notion, count, total, f"{pct:.2f}"))
    report.table(
        "satisfaction",
        ["delta", "attribute", "notion", "satisfying", "auditors", "percent"],
        rows,
    )
    _emit(report, args.out)
    return EXIT_OK


def cmd_sample(args) -> int:
    path = _resolve_out(args.out)
    if args.dataset != "crowd":
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    seed = args.seed
    if seed is None and os.environ.get("FAIRAUDIT_SEED"):
        seed = int(os.environ["FAIRAUDIT_SEED"])
    result = sampledata.write_sample(args.dataset, path, n=args.rows, seed=seed)
    if args.dataset == "crowd":
        defendants, responses = result
        print(f"wrote {defendants} and {responses}")
    else:
        print(f"wrote {result} rows to {path}")
    return EXIT_OK


def _build_engine(args):
    from .learning import load_defaults
    from .service import AuditEngine

    table, _, recipe = _load(args)
    system_labels, system_col = _column_labels(table, args.system_column)
    config = load_defaults(args.defaults)
    return AuditEngine(
        table=table,
        dataset=recipe.name,
        log_path=args.log,
        system_labels=system_labels,
        n_subsets=args.subsets,
        subset_size=args.subset_size,
        seed=_seed(args),
        delta=args.delta,
        allow_subset_reuse=args.allow_reuse,
        train_config=config,
        epsilon=args.epsilon,
        metric_name=args.metric,
    )


def cmd_serve(args) -> int:
    import uvicorn

    from .service import build_app

    engine = _build_engine(args)
    app = build_app(engine)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def cmd_report(args) -> int:
    engine = _build_engine(args)
    sessions = (
        [args.session]
        if args.session
        else sorted(engine._sessions)
    )
    payload = [engine.report(sid) for sid in sessions]
    text = json.dumps(payload, indent=2, ensure_ascii=False) + "\n"
    resolved = _resolve_out(args.out)
    if resolved is None:
        sys.stdout.write(text)
    else:
        with open(resolved, "w", encoding="utf-8") as fh:
            fh.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument wiring


def _add_data_args(parser):
    parser.add_argument("--data", required=True, help="CSV file to audit")
    parser.add_argument("--recipe", required=True,
                        help="built-in recipe name or recipe file path")


def _add_common(parser):
    parser.add_argument("--out", help="report file (default: stdout)")
    parser.add_argument("--seed", type=int, default=None,
                        help="rng seed (or FAIRAUDIT_SEED)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairaudit",
        description="Fairness auditing over classifier decision tables: "
        "group/individual metrics, auditor judgment simulation, rule "
        "learning, guarantee transfer, sample budgets, and a live audit "
        "service.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load a CSV through a recipe and dump the table")
    _add_data_args(p)
    _add_common(p)
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("metrics", help="group fairness diffs per notion and attribute")
    _add_data_args(p)
    p.add_argument("--pred-column", help="prediction column (default: outcome)")
    p.add_argument("--truth-column", help="ground-truth column (default: outcome)")
    p.add_argument("--delta", type=float, default=0.0, help="satisfaction threshold")
    _add_common(p)
    p.set_defaults(fn=cmd_metrics)

    p = sub.add_parser("cluster", help="zero-distance clusters and individual fairness")
    _add_data_args(p)
    p.add_argument("--cluster-config", help="INI file overriding the pinned settings")
    p.add_argument("--labels-column", help="check these labels for cluster consistency")
    p.add_argument("--kappa", type=float, default=0.0)
    p.add_argument("--label-delta", type=float, default=0.0,
                   help="allowed output gap within kappa")
    p.add_argument("--metric", choices=metric_names(), default="discrete")
    _add_common(p)
    p.set_defaults(fn=cmd_cluster)

    p = sub.add_parser("simulate", help="apply an auditor rule and emit verdicts")
    _add_data_args(p)
    p.add_argument("--rule", required=True, help="built-in rule name or rule file path")
    p.add_argument("--system-column", help="system label column (default: outcome)")
    p.add_argument("--epsilon", type=float, required=True, help="auditor tolerance")
    p.add_argument("--metric", choices=metric_names(), default="discrete")
    _add_common(p)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("learn", help="fit auditor models from feedback")
    _add_data_args(p)
    p.add_argument("--feedback", required=True,
                   help="CSV with auditor_id,row_id,response")
    p.add_argument("--min-examples", type=int, default=10)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--min-accuracy", type=float, default=0.8)
    p.add_argument("--family", choices=learning.FAMILIES,
                   default=learning.FAMILY_LOGISTIC)
    p.add_argument("--attr", action="append",
                   help="protected attribute (repeatable; default: all)")
    p.add_argument("--defaults", help="hyperparameter INI file")
    _add_common(p)
    p.set_defaults(fn=cmd_learn)

    p = sub.add_parser("bounds", help="guarantee-transfer bound calculator")
    p.add_argument("--kind", required=True,
                   choices=["individual-fair", "individual-unfair", "group"])
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--kappa", type=float, default=0.0)
    p.add_argument("--lipschitz", type=float, default=1.0)
    p.add_argument("--notion", choices=list(group_metrics.NOTIONS),
                   default=group_metrics.STATISTICAL_PARITY)
    _add_common(p)
    p.set_defaults(fn=cmd_bounds)

    p = sub.add_parser("pac", help="sample budget calculator")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--system-hypotheses", type=int, help="finite class size for the system")
    p.add_argument("--system-vc", type=int, help="VC dimension for the system")
    p.add_argument("--rule-hypotheses", type=int, help="finite class size for the rule")
    p.add_argument("--rule-vc", type=int, help="VC dimension for the rule")
    _add_common(p)
    p.set_defaults(fn=cmd_pac)

    p = sub.add_parser("sweep", help="satisfaction curves over a delta grid")
    _add_data_args(p)
    p.add_argument("--feedback", required=True)
    p.add_argument("--deltas", default="0.0,0.01,0.02,0.03,0.04,0.05,0.06,0.07,0.08,0.09,0.1",
                   help="comma-separated ascending thresholds")
    p.add_argument("--min-examples", type=int, default=10)
    p.add_argument("--attr", action="append")
    _add_common(p)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("sample", help="write a deterministic synthetic dataset")
    p.add_argument("--dataset", required=True,
                   choices=["compas", "german", "adult", "crowd"])
    p.add_argument("--out", required=True,
                   help="CSV path (or directory for crowd)")
    p.add_argument("--rows", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(fn=cmd_sample)

    def _add_service_args(p):
        _add_data_args(p)
        p.add_argument("--system-column", help="system label column (default: outcome)")
        p.add_argument("--log", required=True, help="append-only judgment log path")
        p.add_argument("--subsets", type=int, default=20)
        p.add_argument("--subset-size", type=int, default=50)
        p.add_argument("--delta", type=float, default=0.0)
        p.add_argument("--epsilon", type=float, default=1.0)
        p.add_argument("--metric", choices=metric_names(), default="discrete")
        p.add_argument("--allow-reuse", action="store_true",
                       help="allow assigning a subset to several sessions")
        p.add_argument("--defaults", help="hyperparameter INI file")

    p = sub.add_parser("serve", help="run the audit service")
    _add_service_args(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("report", help="session reports from a judgment log, offline")
    _add_service_args(p)
    p.add_argument("--session", help="session id (default: all)")
    _add_common(p)
    p.set_defaults(fn=cmd_report)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (RecipeError, assessment.RuleError, learning.LearningError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, similarity.SimilarityError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except BrokenPipeError:
        return EXIT_OK
    except KeyboardInterrupt:
        raise
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
