"""Deterministic synthetic datasets shaped like the three public studies.

Real source files (the recidivism decision table, the credit-risk table,
the census income table, the crowd responses) are not redistributable
with this package, so tests and demos run on generated stand-ins with the
same columns and the same categorical structure. Every generator is a
pure function of its seed.

The recidivism sample is constructed so that, under the compas-binary
recipe, exactly 106 of the 108 possible coarse feature combinations occur
(two pinned combinations are withheld). Zero-distance clustering of the
encoded table must therefore find exactly 106 clusters.
"""

from __future__ import annotations

import csv
import itertools
import os
from typing import Sequence

import numpy as np

from .assessment import load_rule
from .datasets import Row

SEXES = ("Female", "Male")
AGE_BANDS = ("<25", "25-45", ">45")
RACE_GROUPS = ("African-American", "Caucasian", "Other")
PRIORS_BANDS = ("0", "1-3", ">3")
CHARGES = ("F", "M")

# Withheld coarse combinations; everything else is guaranteed to occur.
EXCLUDED_COMBOS = (
    ("Female", ">45", "Other", ">3", "M"),
    ("Male", "<25", "Other", "0", "F"),
)

OTHER_RACES = ("Hispanic", "Asian", "Native American", "Other")

COMPAS_COLUMNS = (
    "sex", "age", "race", "priors_count", "c_charge_degree",
    "decile_score", "two_year_recid",
)


def _sample_age(rng, band: str) -> int:
    lo, hi = {"<25": (18, 25), "25-45": (25, 46), ">45": (46, 71)}[band]
    return int(rng.integers(lo, hi))


def _sample_priors(rng, band: str) -> int:
    if band == "0":
        return 0
    if band == "1-3":
        return int(rng.integers(1, 4))
    return int(rng.integers(4, 31))


def write_compas_sample(path: str, n: int = 1000, seed: int = 7) -> int:
    """Write a recidivism-style CSV covering 106 coarse combinations."""
    if n < 106:
        raise ValueError("need at least 106 rows to cover every kept combination")
    rng = np.random.default_rng(seed)
    score_rule = load_rule("compas-decile-auditor")
    combos = [
        c
        for c in itertools.product(SEXES, AGE_BANDS, RACE_GROUPS, PRIORS_BANDS, CHARGES)
        if c not in EXCLUDED_COMBOS
    ]
    picks = list(range(len(combos)))
    picks += [int(rng.integers(0, len(combos))) for _ in range(n - len(combos))]

    rows = []
    for k in picks:
        sex, age_band, race_group, priors_band, charge = combos[k]
        age = _sample_age(rng, age_band)
        priors = _sample_priors(rng, priors_band)
        if race_group == "Other":
            race = OTHER_RACES[int(rng.integers(0, len(OTHER_RACES)))]
        else:
            race = race_group
        base = score_rule.assess(Row(id=0, values={
            "priors_count": priors, "age": age, "sex": sex,
        }))
        decile = int(np.clip(base + int(rng.integers(-2, 3)), 1, 10))
        p_recid = min(0.15 + 0.05 * min(priors, 12) + (0.1 if age < 25 else 0.0), 0.9)
        recid = int(rng.random() < p_recid)
        rows.append((sex, age, race, priors, charge, decile, recid))

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(COMPAS_COLUMNS)
        writer.writerows(rows)
    return len(rows)


GERMAN_COLUMNS = ("credit_history", "savings", "employment", "sex", "age", "credit_risk")
CREDIT_HISTORIES = ("Paid", "Delayed", "Critical", "None-taken")


def write_german_sample(path: str, n: int = 500, seed: int = 11) -> int:
    """Write a credit-risk style CSV; outcome is a noisy thrift rule."""
    rng = np.random.default_rng(seed)
    rule = load_rule("german-auditor")
    rows = []
    for _ in range(n):
        if rng.random() < 0.3:
            # force decent mass on the rule's accepting branch
            savings = int(rng.integers(501, 5001))
            history = "Paid"
            employment = int(rng.integers(3, 21))
        else:
            savings = int(rng.integers(0, 5001))
            history = CREDIT_HISTORIES[int(rng.integers(0, len(CREDIT_HISTORIES)))]
            employment = int(rng.integers(0, 21))
        sex = "male" if rng.random() < 0.65 else "female"
        age = int(rng.integers(19, 71))
        label = rule.assess(Row(id=0, values={
            "savings": savings, "credit_history": history, "employment": employment,
        }))
        if rng.random() < 0.15:
            label = 1 if label == 2 else 2
        rows.append((history, savings, employment, sex, age, label))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(GERMAN_COLUMNS)
        writer.writerows(rows)
    return len(rows)


ADULT_COLUMNS = ("age", "sex", "race", "education", "income")
EDUCATIONS = (
    "Bachelors", "Masters", "Doctorate", "Prof-school",
    "HS-grad", "Some-college", "Assoc-voc", "11th", "9th", "7th-8th",
)
ADULT_RACES = ("White", "Black", "Asian-Pac-Islander", "Amer-Indian-Eskimo", "Other")


def write_adult_sample(path: str, n: int = 800, seed: int = 13) -> int:
    """Write a census-income style CSV; income tracks a degree rule noisily."""
    rng = np.random.default_rng(seed)
    rule = load_rule("adult-auditor")
    rows = []
    for _ in range(n):
        age = int(rng.integers(17, 91))
        sex = "Male" if rng.random() < 0.55 else "Female"
        race = ADULT_RACES[int(rng.integers(0, len(ADULT_RACES)))]
        education = EDUCATIONS[int(rng.integers(0, len(EDUCATIONS)))]
        label = rule.assess(Row(id=0, values={"education": education}))
        if rng.random() < 0.2:
            label = 1 - label
        income = ">50K" if label == 1 else "<=50K"
        rows.append((age, sex, race, education, income))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(ADULT_COLUMNS)
        writer.writerows(rows)
    return len(rows)


def write_crowd_sample(
    directory: str,
    n_defendants: int = 1000,
    n_subsets: int = 20,
    subset_size: int = 50,
    n_workers: int = 400,
    seed: int = 17,
) -> tuple[str, str]:
    """Write a crowd-audit pair of files into a directory.

    defendants.csv holds the decision table; responses.csv holds one
    recidivism prediction per (worker, judged row). Workers are assigned
    whole subsets round-robin, mirroring the elicitation protocol of the
    source studies: disjoint subsets, each worker judging every row of
    exactly one subset. Most workers follow the repeat-offense heuristic
    with personal noise; a minority answer by priors alone or at random.
    """
    os.makedirs(directory, exist_ok=True)
    defendants_path = os.path.join(directory, "defendants.csv")
    responses_path = os.path.join(directory, "responses.csv")
    write_compas_sample(defendants_path, n=n_defendants, seed=seed)

    rng = np.random.default_rng(seed + 1)
    rule = load_rule("compas-auditor")

    # reread to get the rows exactly as written
    with open(defendants_path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        defendants = list(reader)

    order = rng.permutation(n_defendants)
    subsets = [
        sorted(order[i * subset_size:(i + 1) * subset_size])
        for i in range(n_subsets)
    ]

    with open(responses_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["auditor_id", "row_id", "response"])
        for w in range(n_workers):
            subset = subsets[w % n_subsets]
            style = rng.random()
            noise = float(rng.uniform(0.02, 0.3))
            for rid in subset:
                record = defendants[rid]
                row = Row(id=rid, values={
                    "priors_count": int(record["priors_count"]),
                    "age": int(record["age"]),
                    "sex": record["sex"],
                    "c_charge_degree": record["c_charge_degree"],
                })
                if style < 0.7:
                    response = rule.assess(row)
                    if rng.random() < noise:
                        response = 1 - response
                elif style < 0.9:
                    response = 1 if row["priors_count"] > 2 else 0
                else:
                    response = int(rng.random() < 0.5)
                writer.writerow([f"worker-{w:03d}", rid, response])
    return defendants_path, responses_path


def write_sample(dataset: str, path: str, n: int | None = None, seed: int | None = None):
    """Dispatch by dataset name; used by the command line."""
    table = {
        "compas": (write_compas_sample, 1000, 7),
        "german": (write_german_sample, 500, 11),
        "adult": (write_adult_sample, 800, 13),
    }
    if dataset == "crowd":
        return write_crowd_sample(path, seed=17 if seed is None else seed)
    if dataset not in table:
        raise ValueError(f"unknown sample dataset {dataset!r}")
    fn, default_n, default_seed = table[dataset]
    return fn(path, n=default_n if n is None else n, seed=default_seed if seed is None else seed)
