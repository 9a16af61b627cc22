"""Tabular decision data: schemas, typed tables, preprocessing recipes.

A recipe turns a raw CSV extract into an audit-ready table: continuous
columns are binned into named categories, categorical columns are remapped,
and the outcome column is mapped onto a declared finite output space.
Recipes for the three bundled dataset shapes (compas-binary, compas-decile,
german, adult) ship as package data in the text format documented in
``parse_recipe``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

Value = int | str


class FeatureKind(str, Enum):
    BINARY = "binary"
    CATEGORICAL = "categorical"
    ORDINAL_INTEGER = "ordinal-integer"


class DataError(Exception):
    """Raised for unusable input data (missing file, bad header, empty table)."""


class RecipeError(Exception):
    """Raised for malformed recipes or recipe/table mismatches."""


@dataclass(frozen=True)
class Schema:
    """Feature declarations plus protected-attribute and outcome designations.

    ``auxiliary`` features travel with the rows (rules may read them) but are
    excluded from one-hot encoding and similarity computations.
    """

    features: tuple[tuple[str, FeatureKind], ...]
    protected: tuple[tuple[str, Value], ...] = ()
    outcome: tuple[str, Value] | None = None
    output_space: tuple[Value, ...] = ()
    auxiliary: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        names = [name for name, _ in self.features]
        if len(set(names)) != len(names):
            raise RecipeError(f"duplicate feature names in schema: {names}")
        for name, priv in self.protected:
            if name not in names:
                raise RecipeError(f"protected attribute {name!r} not a schema feature")
        if self.outcome is not None and self.outcome[0] not in names:
            raise RecipeError(f"outcome {self.outcome[0]!r} not a schema feature")
        if self.outcome is not None and not self.output_space:
            raise RecipeError("outcome declared but output space is empty")
        for aux in self.auxiliary:
            if aux not in names:
                raise RecipeError(f"auxiliary column {aux!r} not a schema feature")

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.features)

    def kind_of(self, name: str) -> FeatureKind:
        for fname, kind in self.features:
            if fname == name:
                return kind
        raise KeyError(name)

    def encoded_features(self) -> tuple[str, ...]:
        """Features that participate in one-hot encoding (non-auxiliary)."""
        return tuple(n for n, _ in self.features if n not in self.auxiliary)

    def privileged_value(self, attr: str) -> Value:
        for name, priv in self.protected:
            if name == attr:
                return priv
        raise KeyError(attr)


@dataclass(frozen=True)
class Row:
    id: Value
    values: dict[str, Value]

    def __getitem__(self, name: str) -> Value:
        return self.values[name]


@dataclass(frozen=True)
class EncodedView:
    """One-hot numeric view of a table.

    ``columns`` lists (feature, level) pairs in deterministic order: feature
    declaration order, levels sorted (numeric for integer levels). Binary-kind
    features contribute a single 0/1 column whose level entry is the value
    mapped to 1.
    """

    matrix: np.ndarray
    columns: tuple[tuple[str, Value], ...]

    def feature_columns(self, feature: str) -> list[int]:
        return [i for i, (f, _) in enumerate(self.columns) if f == feature]


@dataclass(frozen=True)
class DataTable:
    schema: Schema
    rows: tuple[Row, ...]
    encoded: EncodedView | None = None

    def __post_init__(self) -> None:
        ids = [r.id for r in self.rows]
        if len(set(ids)) != len(ids):
            raise DataError("row ids are not unique")

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> list[Value]:
        return [r.values[name] for r in self.rows]

    def row_ids(self) -> list[Value]:
        return [r.id for r in self.rows]


@dataclass(frozen=True)
class BinSpec:
    """Ordered inclusive integer intervals; None bound = open end."""

    source: str
    dest: str
    intervals: tuple[tuple[Value, int | None, int | None], ...]
    aux: bool = False

    def assign(self, value: int) -> Value:
        for label, lo, hi in self.intervals:
            if (lo is None or value >= lo) and (hi is None or value <= hi):
                return label
        raise RecipeError(f"value {value!r} of {self.source!r} falls outside every bin")

    def dest_kind(self) -> FeatureKind:
        labels = {label for label, _, _ in self.intervals}
        return FeatureKind.BINARY if labels == {0, 1} else FeatureKind.CATEGORICAL


@dataclass(frozen=True)
class MapSpec:
    source: str
    dest: str
    kind: FeatureKind
    mapping: tuple[tuple[Value, Value], ...]
    default: Value | None = None
    aux: bool = False

    def assign(self, value: Value) -> Value:
        for src, out in self.mapping:
            if src == value:
                return out
        if self.default is not None:
            return self.default
        raise RecipeError(f"unmapped level {value!r} for feature {self.source!r}")


@dataclass(frozen=True)
class RecipeSpec:
    """Declarative preprocessing: bins, maps, passthroughs, outcome mapping."""

    name: str
    keeps: tuple[tuple[str, FeatureKind], ...] = ()
    bins: tuple[BinSpec, ...] = ()
    maps: tuple[MapSpec, ...] = ()
    aux: tuple[tuple[str, FeatureKind], ...] = ()
    outcome: tuple[str, str] | None = None  # (source, dest)
    outcome_map: tuple[tuple[Value, Value], ...] = ()
    favorable: Value | None = None
    output_space: tuple[Value, ...] = ()
    protected: tuple[tuple[str, Value], ...] = ()
    feature_order: tuple[str, ...] = ()  # dest-name order for the output schema

    def __post_init__(self) -> None:
        for spec in self.bins:
            seen: list[tuple[int | None, int | None]] = []
            for label, lo, hi in spec.intervals:
                for plo, phi in seen:
                    lo_v = lo if lo is not None else -(10**9)
                    hi_v = hi if hi is not None else 10**9
                    plo_v = plo if plo is not None else -(10**9)
                    phi_v = phi if phi is not None else 10**9
                    if lo_v <= phi_v and plo_v <= hi_v:
                        raise RecipeError(
                            f"overlapping bins for {spec.source!r} near label {label!r}"
                        )
                seen.append((lo, hi))
        if self.outcome is not None:
            if self.favorable is None:
                raise RecipeError("outcome declared without a favorable value")
            if self.outcome_map:
                targets = [t for _, t in self.outcome_map]
                if sorted(map(str, targets)) != sorted(map(str, self.output_space)):
                    raise RecipeError("outcome map is not a bijection onto the output space")

    def source_columns(self) -> tuple[str, ...]:
        cols = [k for k, _ in self.keeps]
        cols += [b.source for b in self.bins]
        cols += [m.source for m in self.maps]
        cols += [a for a, _ in self.aux]
        if self.outcome is not None:
            cols.append(self.outcome[0])
        # preserve first occurrence order, drop duplicates (a column may be
        # both binned and kept raw as auxiliary)
        out: list[str] = []
        for c in cols:
            if c not in out:
                out.append(c)
        return tuple(out)

    def source_schema(self) -> Schema:
        """Schema for the raw CSV this recipe expects."""
        kinds: dict[str, FeatureKind] = {}
        for name, kind in self.keeps:
            kinds[name] = kind
        for spec in self.bins:
            kinds[spec.source] = FeatureKind.ORDINAL_INTEGER
        for spec in self.maps:
            kinds.setdefault(spec.source, FeatureKind.CATEGORICAL)
        for name, kind in self.aux:
            kinds[name] = kind
        if self.outcome is not None:
            src = self.outcome[0]
            raw_levels = (
                [s for s, _ in self.outcome_map] if self.outcome_map else list(self.output_space)
            )
            kinds.setdefault(
                src,
                FeatureKind.ORDINAL_INTEGER
                if all(isinstance(v, int) for v in raw_levels)
                else FeatureKind.CATEGORICAL,
            )
        features = tuple((c, kinds[c]) for c in self.source_columns())
        return Schema(features=features)

    def output_schema(self) -> Schema:
        feats: dict[str, FeatureKind] = {}
        for name, kind in self.keeps:
            feats[name] = kind
        for spec in self.bins:
            feats[spec.dest] = spec.dest_kind()
        for spec in self.maps:
            feats[spec.dest] = spec.kind
        aux_names = tuple(a for a, _ in self.aux)
        aux_names += tuple(b.dest for b in self.bins if b.aux)
        aux_names += tuple(m.dest for m in self.maps if m.aux)
        for name, kind in self.aux:
            feats[name] = kind
        outcome_field: tuple[str, Value] | None = None
        if self.outcome is not None:
            dest = self.outcome[1]
            out_kind = (
                FeatureKind.ORDINAL_INTEGER
                if all(isinstance(v, int) for v in self.output_space)
                else FeatureKind.CATEGORICAL
            )
            if set(self.output_space) == {0, 1}:
                out_kind = FeatureKind.BINARY
            feats[dest] = out_kind
            outcome_field = (dest, self.favorable)  # type: ignore[arg-type]
        order = self.feature_order or tuple(feats)
        features = tuple((n, feats[n]) for n in order)
        return Schema(
            features=features,
            protected=self.protected,
            outcome=outcome_field,
            output_space=self.output_space,
            auxiliary=aux_names + ((self.outcome[1],) if self.outcome else ()),
        )


@dataclass
class LoadReport:
    """Per-row rejection report from CSV ingestion."""

    path: str
    accepted: int = 0
    rejected: list[tuple[int, str]] = field(default_factory=list)

    def to_lines(self) -> list[str]:
        lines = [f"source: {self.path}", f"accepted: {self.accepted}", f"rejected: {len(self.rejected)}"]
        lines += [f"line {n}: {reason}" for n, reason in self.rejected]
        return lines


def _parse_value(raw: str, kind: FeatureKind) -> Value:
    raw = raw.strip()
    if kind is FeatureKind.ORDINAL_INTEGER:
        try:
            return int(raw)
        except ValueError as exc:
            raise ValueError(f"expected integer, got {raw!r}") from exc
    # binary/categorical: keep integers typed when they look like integers
    try:
        return int(raw)
    except ValueError:
        return raw


def load_csv(path: str | Path, schema: Schema) -> tuple[DataTable, LoadReport]:
    """Read a comma-separated UTF-8 file with a header row into a DataTable.

    Every schema feature must appear in the header; extra columns are
    ignored. Rows with unparseable values are rejected and listed in the
    returned LoadReport instead of aborting ingestion.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as handle:
        return _read_csv(handle, schema, str(path))


def load_csv_text(text: str, schema: Schema, name: str = "<memory>") -> tuple[DataTable, LoadReport]:
    return _read_csv(io.StringIO(text), schema, name)


def _read_csv(handle, schema: Schema, source: str) -> tuple[DataTable, LoadReport]:
    reader = csv.reader(handle)
    try:
        header = next(reader)
    except StopIteration:
        raise DataError(f"{source}: empty file") from None
    header = [h.strip() for h in header]
    missing = [f for f in schema.feature_names if f not in header]
    if missing:
        raise DataError(f"{source}: header is missing required columns {missing}")
    index = {name: header.index(name) for name in schema.feature_names}

    report = LoadReport(path=source)
    rows: list[Row] = []
    for lineno, record in enumerate(reader, start=2):
        if not record or all(not cell.strip() for cell in record):
            continue
        if len(record) < len(header):
            report.rejected.append((lineno, f"expected {len(header)} fields, got {len(record)}"))
            continue
        values: dict[str, Value] = {}
        problem: str | None = None
        for name, kind in schema.features:
            raw = record[index[name]]
            if raw.strip() == "":
                problem = f"missing value for {name!r}"
                break
            try:
                values[name] = _parse_value(raw, kind)
            except ValueError as exc:
                problem = f"{name!r}: {exc}"
                break
        if problem is not None:
            report.rejected.append((lineno, problem))
            continue
        rows.append(Row(id=len(rows), values=values))
    report.accepted = len(rows)
    if not rows:
        raise DataError(f"{source}: zero valid data rows")
    return DataTable(schema=schema, rows=tuple(rows)), report


def apply_recipe(table: DataTable, recipe: RecipeSpec) -> DataTable:
    """Bin, remap and relabel a raw table into the recipe's output schema."""
    available = set(table.schema.feature_names)
    for col in recipe.source_columns():
        if col not in available:
            raise RecipeError(f"recipe {recipe.name!r} references missing feature {col!r}")
    out_schema = recipe.output_schema()
    outcome_map = dict(recipe.outcome_map)
    new_rows: list[Row] = []
    for row in table.rows:
        values: dict[str, Value] = {}
        for name, _ in recipe.keeps:
            values[name] = row[name]
        for spec in recipe.bins:
            raw = row[spec.source]
            if not isinstance(raw, int):
                raise RecipeError(f"bin source {spec.source!r} holds non-integer {raw!r}")
            values[spec.dest] = spec.assign(raw)
        for spec in recipe.maps:
            values[spec.dest] = spec.assign(row[spec.source])
        for name, _ in recipe.aux:
            values[name] = row[name]
        if recipe.outcome is not None:
            src, dest = recipe.outcome
            raw = row[src]
            if outcome_map:
                if raw not in outcome_map:
                    raise RecipeError(f"outcome value {raw!r} not in label mapping")
                values[dest] = outcome_map[raw]
            else:
                if raw not in recipe.output_space:
                    raise RecipeError(f"outcome value {raw!r} outside output space")
                values[dest] = raw
        new_rows.append(Row(id=row.id, values=values))
    return DataTable(schema=out_schema, rows=tuple(new_rows))


def _level_sort_key(levels: Iterable[Value]):
    levels = list(levels)
    if all(isinstance(v, int) for v in levels):
        return sorted(levels)
    return sorted(levels, key=str)


NUMERIC_LEVEL = "<numeric>"


def one_hot_encode(table: DataTable) -> DataTable:
    """Attach a deterministic numeric view.

    Column order: feature declaration order, then level order (numeric for
    integer levels, lexicographic otherwise). Binary-kind features become a
    single 0/1 column, categorical features one column per observed level,
    and ordinal-integer features a single raw-valued column. Auxiliary
    features are excluded.
    """
    schema = table.schema
    columns: list[tuple[str, Value]] = []
    encoders: list[tuple[str, str, dict[Value, int]]] = []  # (feature, mode, level->column)
    for name in schema.encoded_features():
        kind = schema.kind_of(name)
        if kind is FeatureKind.ORDINAL_INTEGER:
            columns.append((name, NUMERIC_LEVEL))
            encoders.append((name, "numeric", {NUMERIC_LEVEL: len(columns) - 1}))
            continue
        levels = _level_sort_key(set(table.column(name)))
        if kind is FeatureKind.BINARY:
            if len(levels) > 2:
                raise DataError(f"binary feature {name!r} has {len(levels)} levels")
            hot = levels[-1]  # larger level maps to 1
            columns.append((name, hot))
            encoders.append((name, "binary", {hot: len(columns) - 1}))
        else:
            offset = len(columns)
            columns.extend((name, lvl) for lvl in levels)
            encoders.append((name, "onehot", {lvl: offset + i for i, lvl in enumerate(levels)}))
    matrix = np.zeros((len(table.rows), len(columns)))
    for i, row in enumerate(table.rows):
        for name, mode, level_map in encoders:
            value = row[name]
            if mode == "numeric":
                matrix[i, level_map[NUMERIC_LEVEL]] = float(value)  # type: ignore[arg-type]
            elif mode == "binary":
                (hot, col), = level_map.items()
                matrix[i, col] = 1.0 if value == hot else 0.0
            else:
                matrix[i, level_map[value]] = 1.0
    view = EncodedView(matrix=matrix, columns=tuple(columns))
    return replace(table, encoded=view)


def decode_one_hot(table: DataTable) -> DataTable:
    """Inverse of one_hot_encode over the encoded features (round-trip check)."""
    if table.encoded is None:
        raise DataError("table has no encoded view")
    view = table.encoded
    rows: list[Row] = []
    binary_levels = {
        name: _level_sort_key(set(table.column(name)))
        for name in table.schema.encoded_features()
        if table.schema.kind_of(name) is FeatureKind.BINARY
    }
    for i, row in enumerate(table.rows):
        values: dict[str, Value] = dict(row.values)
        for name in table.schema.encoded_features():
            cols = view.feature_columns(name)
            kind = table.schema.kind_of(name)
            if kind is FeatureKind.ORDINAL_INTEGER:
                values[name] = int(view.matrix[i, cols[0]])
            elif kind is FeatureKind.BINARY:
                levels = binary_levels[name]
                values[name] = levels[-1] if view.matrix[i, cols[0]] == 1.0 else levels[0]
            else:
                hot = [c for c in cols if view.matrix[i, c] == 1.0]
                if len(hot) != 1:
                    raise DataError(f"row {row.id}: {name!r} one-hot block sums to {len(hot)}")
                values[name] = view.columns[hot[0]][1]
        rows.append(Row(id=row.id, values=values))
    return DataTable(schema=table.schema, rows=tuple(rows))


def split_subsets(
    table: DataTable, n_subsets: int, subset_size: int, seed: int
) -> list[DataTable]:
    """Deterministically split into disjoint subsets of fixed size."""
    if n_subsets <= 0 or subset_size <= 0:
        raise ValueError("n_subsets and subset_size must be positive")
    needed = n_subsets * subset_size
    if needed > len(table.rows):
        raise DataError(
            f"cannot draw {n_subsets} x {subset_size} rows from a table of {len(table.rows)}"
        )
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(table.rows))
    subsets = []
    for k in range(n_subsets):
        picks = sorted(order[k * subset_size : (k + 1) * subset_size])
        rows = tuple(table.rows[i] for i in picks)
        subsets.append(DataTable(schema=table.schema, rows=rows))
    return subsets


# ----------------------------------------------------------------------------
# Recipe file format
# ----------------------------------------------------------------------------

def _parse_scalar(token: str) -> Value:
    token = token.strip()
    if token.startswith('"') and token.endswith('"') and len(token) >= 2:
        return token[1:-1]
    try:
        return int(token)
    except ValueError:
        return token


def _parse_range(token: str) -> tuple[int | None, int | None]:
    if ".." not in token:
        v = int(token)
        return v, v
    lo_s, hi_s = token.split("..", 1)
    lo = int(lo_s) if lo_s.strip() else None
    hi = int(hi_s) if hi_s.strip() else None
    return lo, hi


def parse_recipe(text: str, name_hint: str = "") -> RecipeSpec:
    """Parse the line-oriented recipe format.

    Directives (one per line, ``#`` comments, ``;`` separates parts)::

        name: compas-binary
        keep: sex as binary
        bin: age -> age_category ; <25 = ..24 ; 25-45 = 25..45 ; >45 = 46..
        map: race as categorical ; African-American = African-American ; * = Other
        aux: priors_count as ordinal-integer
        outcome: two_year_recid ; favorable = 0
        outputs: 0, 1
        protected: race ; privileged = Caucasian

    Bin ranges are inclusive integer intervals; an omitted end is open.
    ``map`` may rename with ``src -> dest``; ``*`` is the catch-all level.
    ``outcome`` accepts ``from = to`` pairs to relabel onto the declared
    output space (identity if none are given).
    """
    name = name_hint
    keeps: list[tuple[str, FeatureKind]] = []
    bins: list[BinSpec] = []
    maps: list[MapSpec] = []
    aux: list[tuple[str, FeatureKind]] = []
    outcome: tuple[str, str] | None = None
    outcome_map: list[tuple[Value, Value]] = []
    favorable: Value | None = None
    output_space: tuple[Value, ...] = ()
    protected: list[tuple[str, Value]] = []
    order: list[str] = []

    def head_and_parts(body: str) -> tuple[str, list[str]]:
        parts = [p.strip() for p in body.split(";")]
        return parts[0], parts[1:]

    def src_dest(token: str) -> tuple[str, str]:
        if "->" in token:
            s, d = token.split("->", 1)
            return s.strip(), d.strip()
        return token.strip(), token.strip()

    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise RecipeError(f"line {lineno}: expected 'directive: body'")
        directive, body = line.split(":", 1)
        directive = directive.strip().lower()
        body = body.strip()
        if directive == "name":
            name = body
        elif directive == "keep":
            if " as " not in body:
                raise RecipeError(f"line {lineno}: keep needs '<name> as <kind>'")
            col, kind_s = body.rsplit(" as ", 1)
            keeps.append((col.strip(), FeatureKind(kind_s.strip())))
            order.append(col.strip())
        elif directive == "bin":
            head, parts = head_and_parts(body)
            src, dest = src_dest(head)
            is_aux = "aux" in [p.lower() for p in parts]
            intervals = []
            for part in parts:
                if part.lower() == "aux":
                    continue
                if "=" not in part:
                    raise RecipeError(f"line {lineno}: bin part {part!r} needs 'label = range'")
                # rsplit keeps labels like "<=4" intact; ranges never contain '='
                label, rng = part.rsplit("=", 1)
                lo, hi = _parse_range(rng.strip())
                intervals.append((_parse_scalar(label), lo, hi))
            if not intervals:
                raise RecipeError(f"line {lineno}: bin has no intervals")
            bins.append(BinSpec(source=src, dest=dest, intervals=tuple(intervals), aux=is_aux))
            order.append(dest)
        elif directive == "map":
            head, parts = head_and_parts(body)
            kind = FeatureKind.CATEGORICAL
            if " as " in head:
                head, kind_s = head.rsplit(" as ", 1)
                kind = FeatureKind(kind_s.strip())
            src, dest = src_dest(head)
            is_aux = "aux" in [p.lower() for p in parts]
            mapping: list[tuple[Value, Value]] = []
            default: Value | None = None
            for part in parts:
                if part.lower() == "aux":
                    continue
                if "=" not in part:
                    raise RecipeError(f"line {lineno}: map part {part!r} needs 'from = to'")
                # rsplit: the source level may contain '=' (e.g. "<=50K"), the target may not
                frm, to = (t.strip() for t in part.rsplit("=", 1))
                if frm == "*":
                    default = _parse_scalar(to)
                else:
                    mapping.append((_parse_scalar(frm), _parse_scalar(to)))
            maps.append(
                MapSpec(source=src, dest=dest, kind=kind, mapping=tuple(mapping), default=default, aux=is_aux)
            )
            order.append(dest)
        elif directive == "aux":
            if " as " not in body:
                raise RecipeError(f"line {lineno}: aux needs '<name> as <kind>'")
            col, kind_s = body.rsplit(" as ", 1)
            aux.append((col.strip(), FeatureKind(kind_s.strip())))
            order.append(col.strip())
        elif directive == "outcome":
            head, parts = head_and_parts(body)
            outcome = src_dest(head)
            for part in parts:
                if "=" not in part:
                    raise RecipeError(f"line {lineno}: outcome part {part!r} needs '='")
                key, val = (t.strip() for t in part.rsplit("=", 1))
                if key.lower() == "favorable":
                    favorable = _parse_scalar(val)
                else:
                    outcome_map.append((_parse_scalar(key), _parse_scalar(val)))
            order.append(outcome[1])
        elif directive == "outputs":
            output_space = tuple(_parse_scalar(t) for t in body.split(","))
        elif directive == "protected":
            head, parts = head_and_parts(body)
            priv: Value | None = None
            for part in parts:
                key, val = (t.strip() for t in part.rsplit("=", 1))
                if key.lower() == "privileged":
                    priv = _parse_scalar(val)
            if priv is None:
                raise RecipeError(f"line {lineno}: protected needs 'privileged = <value>'")
            protected.append((head, priv))
        else:
            raise RecipeError(f"line {lineno}: unknown directive {directive!r}")

    if not name:
        raise RecipeError("recipe has no name")
    return RecipeSpec(
        name=name,
        keeps=tuple(keeps),
        bins=tuple(bins),
        maps=tuple(maps),
        aux=tuple(aux),
        outcome=outcome,
        outcome_map=tuple(outcome_map),
        favorable=favorable,
        output_space=output_space,
        protected=tuple(protected),
        feature_order=tuple(order),
    )


BUILTIN_RECIPES = ("compas-binary", "compas-decile", "german", "adult")


def load_recipe(name_or_path: str) -> RecipeSpec:
    """Load a built-in recipe by name, or parse a recipe file by path."""
    if name_or_path in BUILTIN_RECIPES:
        text = (
            resources.files("fairaudit.recipes")
            .joinpath(name_or_path + ".recipe")
            .read_text(encoding="utf-8")
        )
        return parse_recipe(text, name_hint=name_or_path)
    path = Path(name_or_path)
    if not path.exists():
        raise RecipeError(f"unknown recipe {name_or_path!r} (not built-in, not a file)")
    return parse_recipe(path.read_text(encoding="utf-8"), name_hint=path.stem)


def load_prepared(csv_path: str | Path, recipe_name: str) -> tuple[DataTable, LoadReport, RecipeSpec]:
    """Convenience: load CSV under a recipe's source schema and apply it."""
    recipe = load_recipe(recipe_name)
    raw, report = load_csv(csv_path, recipe.source_schema())
    return apply_recipe(raw, recipe), report, recipe
