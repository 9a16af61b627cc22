"""Input-space similarity: Mahalanobis distance and near-duplicate clusters.

The input metric is the Mahalanobis distance induced by the pseudo-inverse
of the sample covariance of the encoded feature matrix. One-hot encoded
tables make that covariance singular by construction (each categorical
block sums to one), so the pseudo-inverse, not the inverse, is the pinned
choice. Rows at distance zero (up to a small tolerance) form equivalence
classes; the clustering verifies transitivity instead of assuming it.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from importlib import resources
from typing import Callable, Sequence

import numpy as np

from .datasets import DataError, DataTable, Value
from .distances import discrete_distance

DEFAULT_TOLERANCE = 1e-9
DEFAULT_RCOND = 1e-10


class SimilarityError(Exception):
    pass


@dataclass(frozen=True)
class CovarianceModel:
    """Pseudo-inverse of a sample covariance, with its effective rank."""

    inverse: np.ndarray
    rank: int
    dim: int

    @property
    def singular(self) -> bool:
        return self.rank < self.dim


def fit_covariance(matrix: np.ndarray, rcond: float = DEFAULT_RCOND) -> CovarianceModel:
    """Fit the sample covariance (ddof=1) and pseudo-invert it.

    Singular values at or below rcond times the largest are treated as
    zero, for both the pseudo-inverse and the reported rank.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2:
        raise SimilarityError("expected a 2-d feature matrix")
    if matrix.shape[0] < 2:
        raise SimilarityError("covariance needs at least 2 rows")
    cov = np.atleast_2d(np.cov(matrix, rowvar=False, ddof=1))
    inverse = np.linalg.pinv(cov, rcond=rcond, hermitian=True)
    spectrum = np.linalg.svd(cov, compute_uv=False)
    cutoff = rcond * spectrum.max() if spectrum.size else 0.0
    rank = int((spectrum > cutoff).sum())
    return CovarianceModel(inverse=inverse, rank=rank, dim=cov.shape[0])


def mahalanobis(u: np.ndarray, v: np.ndarray, model: CovarianceModel) -> float:
    diff = np.asarray(u, dtype=float) - np.asarray(v, dtype=float)
    quad = float(diff @ model.inverse @ diff)
    # tiny negative values come from floating-point noise in the quadratic form
    return float(np.sqrt(max(quad, 0.0)))


def pairwise_mahalanobis(matrix: np.ndarray, model: CovarianceModel) -> np.ndarray:
    """All-pairs distance matrix via the quadratic-form expansion."""
    matrix = np.asarray(matrix, dtype=float)
    gram = matrix @ model.inverse @ matrix.T
    diag = np.diag(gram)
    quad = diag[:, None] + diag[None, :] - 2.0 * gram
    return np.sqrt(np.clip(quad, 0.0, None))


@dataclass(frozen=True)
class ClusterIndex:
    """Partition of row ids into zero-distance equivalence classes."""

    clusters: tuple[tuple[int, ...], ...]
    tolerance: float

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)

    def sizes(self) -> list[int]:
        return [len(c) for c in self.clusters]

    def cluster_of(self) -> dict[int, int]:
        return {rid: k for k, members in enumerate(self.clusters) for rid in members}


def _encoded_matrix(table: DataTable) -> np.ndarray:
    if table.encoded is None:
        raise DataError("table has no encoded view; call one_hot_encode first")
    return table.encoded.matrix


def build_clusters(
    table: DataTable,
    model: CovarianceModel | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
    rcond: float = DEFAULT_RCOND,
    matrix: np.ndarray | None = None,
) -> tuple[ClusterIndex, CovarianceModel]:
    """Group rows whose pairwise Mahalanobis distance is within tolerance.

    Exact-duplicate rows are deduplicated first, so the pairwise work runs
    over distinct encoded vectors only. Connected components of the
    "within tolerance" relation must be cliques; a component that is
    merely chained together is reported as a transitivity violation.
    """
    full = _encoded_matrix(table) if matrix is None else np.asarray(matrix, dtype=float)
    if model is None:
        model = fit_covariance(full, rcond=rcond)

    reps: dict[tuple, int] = {}
    members: list[list[int]] = []
    for i, row in enumerate(full):
        key = tuple(row)
        k = reps.setdefault(key, len(members))
        if k == len(members):
            members.append([])
        members[k].append(i)
    unique = np.array([full[group[0]] for group in members])

    close = pairwise_mahalanobis(unique, model) <= tolerance
    np.fill_diagonal(close, True)

    n = len(members)
    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(n):
        for j in range(i + 1, n):
            if close[i, j]:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj

    components: dict[int, list[int]] = {}
    for i in range(n):
        components.setdefault(find(i), []).append(i)

    ids = [row.id for row in table.rows]
    clusters = []
    for comp in components.values():
        for a in comp:
            for b in comp:
                if a < b and not close[a, b]:
                    witness = next(c for c in comp if close[a, c] and close[c, b])
                    raise SimilarityError(
                        "zero-distance relation is not transitive: rows "
                        f"{ids[members[a][0]]} and {ids[members[b][0]]} chain through "
                        f"{ids[members[witness][0]]} but are {tolerance} apart"
                    )
        row_ids = sorted(ids[i] for k in comp for i in members[k])
        clusters.append(tuple(row_ids))
    clusters.sort(key=lambda c: c[0])
    return ClusterIndex(clusters=tuple(clusters), tolerance=tolerance), model


@dataclass(frozen=True)
class IndividualFairnessReport:
    """Outcome of a (kappa, delta) individual fairness check."""

    kappa: float
    delta: float
    satisfied: bool
    checked_pairs: int
    violating_pairs: int
    consistency: float
    violations: tuple[tuple[int, int, float, float], ...]  # (id_i, id_j, D, d)


def individual_fairness_check(
    table: DataTable,
    labels: Sequence[Value],
    kappa: float,
    delta: float,
    metric: Callable[[object, object], float] = discrete_distance,
    model: CovarianceModel | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
    max_recorded: int = 25,
) -> IndividualFairnessReport:
    """Check that rows within kappa in input space get labels within delta.

    Every row pair with Mahalanobis distance at most kappa is a checked
    pair; the check fails if any such pair has label distance above delta.
    Consistency is the fraction of rows with no violating partner, which
    at kappa = 0 equals the fraction of rows in label-uniform clusters.
    """
    matrix = _encoded_matrix(table)
    labels = list(labels)
    if len(labels) != len(table.rows):
        raise DataError(f"{len(labels)} labels for {len(table.rows)} rows")
    if model is None:
        model = fit_covariance(matrix)
    threshold = max(kappa, tolerance)  # kappa = 0 means identical up to noise

    dist = pairwise_mahalanobis(matrix, model)
    ids = [row.id for row in table.rows]
    n = len(ids)
    checked = 0
    violating = 0
    flagged = np.zeros(n, dtype=bool)
    recorded: list[tuple[int, int, float, float]] = []
    for i in range(n):
        for j in range(i + 1, n):
            if dist[i, j] > threshold:
                continue
            checked += 1
            label_gap = metric(labels[i], labels[j])
            if label_gap > delta:
                violating += 1
                flagged[i] = flagged[j] = True
                if len(recorded) < max_recorded:
                    recorded.append((ids[i], ids[j], float(dist[i, j]), float(label_gap)))
    consistency = 1.0 if n == 0 else float((~flagged).sum()) / n
    return IndividualFairnessReport(
        kappa=kappa,
        delta=delta,
        satisfied=violating == 0,
        checked_pairs=checked,
        violating_pairs=violating,
        consistency=consistency,
        violations=tuple(recorded),
    )


@dataclass(frozen=True)
class ClusterConfig:
    recipe: str
    features: tuple[str, ...]
    tolerance: float
    rcond: float


def load_cluster_config(path: str | None = None) -> ClusterConfig:
    """Read a pinned clustering configuration (INI, [cluster] section)."""
    parser = configparser.ConfigParser()
    if path is None:
        text = resources.files("fairaudit").joinpath("compas_cluster.cfg").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    parser.read_string(text)
    try:
        section = parser["cluster"]
        features = tuple(f.strip() for f in section["features"].split(",") if f.strip())
        return ClusterConfig(
            recipe=section["recipe"],
            features=features,
            tolerance=section.getfloat("tolerance"),
            rcond=section.getfloat("rcond"),
        )
    except (KeyError, ValueError) as exc:
        raise SimilarityError(f"bad cluster config: {exc}") from exc


def cluster_with_config(
    table: DataTable, config: ClusterConfig | None = None
) -> tuple[ClusterIndex, CovarianceModel]:
    """Cluster a prepared table under a pinned feature list and tolerances."""
    if config is None:
        config = load_cluster_config()
    if table.encoded is None:
        raise DataError("table has no encoded view; call one_hot_encode first")
    have = tuple(table.schema.encoded_features())
    if set(config.features) - set(have):
        missing = sorted(set(config.features) - set(have))
        raise DataError(f"table lacks configured features: {missing}")
    cols: list[int] = []
    for feature in config.features:
        cols.extend(table.encoded.feature_columns(feature))
    projected = table.encoded.matrix[:, cols]
    model = fit_covariance(projected, rcond=config.rcond)
    return build_clusters(table, model=model, tolerance=config.tolerance, matrix=projected)
