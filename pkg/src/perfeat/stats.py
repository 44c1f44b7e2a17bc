"""Rater agreement, deviant-rater flagging, and feature cross-correlation.

Ratings live in an items-by-raters matrix with NaN for missing cells.
Pairwise statistics use pairwise deletion; the internal-consistency
coefficient uses complete cases only.  Deviant raters are flagged, never
silently removed: trimming is the caller's explicit decision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .tdist import student_t_two_tailed

MIN_PAIRS = 3
"""A correlation needs at least this many complete pairs."""

OUTLIER_SD_FACTOR = 2.5
"""Raters this many sample SDs below the mean agreement level are flagged."""

STAR_THRESHOLDS = ((0.001, "***"), (0.01, "**"), (0.05, "*"))


class TooFewPairs(ValueError):
    """Fewer complete pairs than a correlation needs."""


class ConstantInput(ValueError):
    """A correlation over a constant series is undefined."""


class TooFewItems(ValueError):
    """Too few complete rows for internal consistency."""


class AllDropped(ValueError):
    """Trimming would leave fewer than two raters."""


def stars_for_p(p: float) -> str:
    """Significance marker: strictly below .05, .01, .001."""
    for threshold, marker in STAR_THRESHOLDS:
        if p < threshold:
            return marker
    return ""


def pearson(x: Sequence[float], y: Sequence[float], min_pairs: int = MIN_PAIRS) -> float:
    """Pearson correlation with pairwise deletion of missing values.

    Parameters
    ----------
    x, y : sequences of equal length; NaN marks a missing value.
    min_pairs : minimum number of jointly present pairs.

    Returns
    -------
    float in [-1, 1].

    Raises
    ------
    TooFewPairs
        Fewer than ``min_pairs`` complete pairs.
    ConstantInput
        Either series is constant over the complete pairs.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("inputs must be one-dimensional and equally long")
    mask = np.isfinite(x) & np.isfinite(y)
    n = int(mask.sum())
    if n < min_pairs:
        raise TooFewPairs(f"{n} complete pairs, need {min_pairs}")
    xs = x[mask]
    ys = y[mask]
    if np.all(xs == xs[0]) or np.all(ys == ys[0]):
        raise ConstantInput("correlation of a constant series is undefined")
    xc = xs - xs.mean()
    yc = ys - ys.mean()
    r = float(xc @ yc / math.sqrt((xc @ xc) * (yc @ yc)))
    return max(-1.0, min(1.0, r))


def pairwise_count(x: Sequence[float], y: Sequence[float]) -> int:
    """Number of jointly present values."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return int((np.isfinite(x) & np.isfinite(y)).sum())


def correlation_p_value(r: float, n: int) -> float:
    """Two-tailed p for a correlation of ``r`` over ``n`` pairs.

    Uses t = r sqrt((n - 2) / (1 - r^2)) with n - 2 degrees of freedom.
    |r| = 1 is an exact fit: p = 0.
    """
    if n < 3:
        raise TooFewPairs("a p-value needs at least three pairs")
    if abs(r) > 1:
        raise ValueError("correlation outside [-1, 1]")
    if abs(r) == 1.0:
        return 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return student_t_two_tailed(t, n - 2)


@dataclass(frozen=True)
class RatingMatrix:
    """Items-by-raters rating matrix with NaN for missing cells."""

    values: np.ndarray
    item_ids: Tuple[str, ...]
    rater_ids: Tuple[str, ...]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 2:
            raise ValueError("ratings must form a two-dimensional matrix")
        if values.shape != (len(self.item_ids), len(self.rater_ids)):
            raise ValueError("rating matrix shape does not match its labels")
        if len(set(self.rater_ids)) != len(self.rater_ids):
            raise ValueError("duplicate rater ids")

    @property
    def n_items(self) -> int:
        return self.values.shape[0]

    @property
    def n_raters(self) -> int:
        return self.values.shape[1]

    def column(self, rater_id: str) -> np.ndarray:
        return self.values[:, self.rater_ids.index(rater_id)]

    def drop_raters(self, rater_ids: Sequence[str]) -> "RatingMatrix":
        """A copy without the named raters."""
        drop = set(rater_ids)
        unknown = drop - set(self.rater_ids)
        if unknown:
            raise ValueError(f"unknown rater ids: {sorted(unknown)}")
        keep = [j for j, rid in enumerate(self.rater_ids) if rid not in drop]
        if len(keep) < 2:
            raise AllDropped("fewer than two raters would remain")
        return RatingMatrix(
            values=self.values[:, keep],
            item_ids=self.item_ids,
            rater_ids=tuple(self.rater_ids[j] for j in keep),
        )


def cronbach_alpha(matrix: RatingMatrix, min_items: int = 3) -> float:
    """Internal consistency of the rater panel over complete cases.

    alpha = k / (k - 1) * (1 - sum of per-rater variances / variance of row
    sums), with sample variances (ddof = 1) over rows where every rater is
    present.  Not clamped: strongly disagreeing panels go negative.
    """
    values = matrix.values
    complete = values[np.isfinite(values).all(axis=1)]
    if complete.shape[0] < min_items:
        raise TooFewItems(
            f"{complete.shape[0]} complete items, need {min_items}"
        )
    k = matrix.n_raters
    if k < 2:
        raise ValueError("internal consistency needs at least two raters")
    rater_variances = complete.var(axis=0, ddof=1)
    total_variance = complete.sum(axis=1).var(ddof=1)
    if total_variance == 0:
        raise ConstantInput("row sums are constant across items")
    return float(k / (k - 1) * (1.0 - rater_variances.sum() / total_variance))


@dataclass(frozen=True)
class AgreementReport:
    """Panel-level agreement summary for one rating matrix."""

    mean_pairwise_r: float
    alpha: float
    n_items: int
    n_complete_items: int
    n_raters: int
    per_rater_mean_r: Dict[str, float]
    skipped_pairs: Tuple[Tuple[str, str], ...]


def _pairwise_r_table(matrix: RatingMatrix):
    """All rater-pair correlations, with undefined pairs recorded separately."""
    computed: Dict[Tuple[str, str], float] = {}
    skipped: List[Tuple[str, str]] = []
    for a, b in combinations(range(matrix.n_raters), 2):
        ids = (matrix.rater_ids[a], matrix.rater_ids[b])
        try:
            computed[ids] = pearson(matrix.values[:, a], matrix.values[:, b])
        except (TooFewPairs, ConstantInput):
            skipped.append(ids)
    return computed, skipped


def inter_rater_agreement(matrix: RatingMatrix) -> AgreementReport:
    """Mean pairwise correlation and internal consistency for a panel.

    Pairwise correlations use pairwise deletion; pairs that are undefined
    (constant rater, too much missingness) are skipped and reported.  The
    consistency coefficient uses complete cases.
    """
    computed, skipped = _pairwise_r_table(matrix)
    if not computed:
        raise ConstantInput("no rater pair has a defined correlation")
    alpha = cronbach_alpha(matrix)
    per_rater: Dict[str, List[float]] = {rid: [] for rid in matrix.rater_ids}
    for (a, b), r in computed.items():
        per_rater[a].append(r)
        per_rater[b].append(r)
    per_rater_mean = {
        rid: (math.fsum(rs) / len(rs) if rs else math.nan)
        for rid, rs in per_rater.items()
    }
    complete_rows = int(np.isfinite(matrix.values).all(axis=1).sum())
    return AgreementReport(
        mean_pairwise_r=math.fsum(computed.values()) / len(computed),
        alpha=alpha,
        n_items=matrix.n_items,
        n_complete_items=complete_rows,
        n_raters=matrix.n_raters,
        per_rater_mean_r=per_rater_mean,
        skipped_pairs=tuple(skipped),
    )


def flag_outlier_raters(
    matrix: RatingMatrix, sd_factor: float = OUTLIER_SD_FACTOR
) -> List[Tuple[str, float]]:
    """Raters whose mean correlation with the others marks them as deviant.

    A rater is flagged when their mean pairwise correlation is negative,
    undefined (no valid pair at all), or more than ``sd_factor`` sample
    standard deviations below the across-rater mean.  Returns (rater id,
    mean r) pairs; callers decide whether to trim.
    """
    if matrix.n_raters < 3:
        raise ValueError("outlier flagging needs at least three raters")
    computed, _ = _pairwise_r_table(matrix)
    per_rater: Dict[str, List[float]] = {rid: [] for rid in matrix.rater_ids}
    for (a, b), r in computed.items():
        per_rater[a].append(r)
        per_rater[b].append(r)
    means = {
        rid: (math.fsum(rs) / len(rs) if rs else math.nan)
        for rid, rs in per_rater.items()
    }
    defined = [m for m in means.values() if not math.isnan(m)]
    if defined:
        grand_mean = math.fsum(defined) / len(defined)
        sd = float(np.std(defined, ddof=1)) if len(defined) > 1 else 0.0
    else:
        grand_mean, sd = math.nan, 0.0
    flagged = []
    for rid in matrix.rater_ids:
        m = means[rid]
        if math.isnan(m) or m < 0 or (sd > 0 and m < grand_mean - sd_factor * sd):
            flagged.append((rid, m))
    return flagged


def item_mean_ratings(
    matrix: RatingMatrix, drop_raters: Sequence[str] = ()
) -> np.ndarray:
    """Per-item mean over the raters present for that item.

    ``drop_raters`` removes flagged raters before averaging; at least two
    must remain.  Items no remaining rater scored come back as NaN.
    """
    sub = matrix.drop_raters(drop_raters) if drop_raters else matrix
    present = np.isfinite(sub.values)
    counts = present.sum(axis=1)
    sums = np.where(present, sub.values, 0.0).sum(axis=1)
    return np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)


@dataclass(frozen=True)
class CorrelationCell:
    """One entry of a correlation grid."""

    r: float
    n: int
    p: float
    stars: str


@dataclass(frozen=True)
class CrossCorrelation:
    """Symmetric correlation grid over named variables."""

    names: Tuple[str, ...]
    cells: Tuple[Tuple[Optional[CorrelationCell], ...], ...]

    def cell(self, row: str, col: str) -> Optional[CorrelationCell]:
        return self.cells[self.names.index(row)][self.names.index(col)]


def cross_correlation_matrix(
    table: np.ndarray, names: Sequence[str]
) -> CrossCorrelation:
    """All pairwise correlations among table columns, with significance.

    Each pair uses its own complete rows (pairwise deletion), so cell sample
    sizes differ when data are missing.  Pairs with too few rows or constant
    columns come back as None.
    """
    table = np.asarray(table, dtype=float)
    if table.ndim != 2 or table.shape[1] != len(names):
        raise ValueError("table shape does not match the variable names")
    k = len(names)
    grid: List[List[Optional[CorrelationCell]]] = [[None] * k for _ in range(k)]
    for i in range(k):
        n_i = int(np.isfinite(table[:, i]).sum())
        grid[i][i] = CorrelationCell(r=1.0, n=n_i, p=0.0, stars="***")
    for i, j in combinations(range(k), 2):
        try:
            r = pearson(table[:, i], table[:, j])
        except (TooFewPairs, ConstantInput):
            continue
        n = pairwise_count(table[:, i], table[:, j])
        p = correlation_p_value(r, n)
        cell = CorrelationCell(r=r, n=n, p=p, stars=stars_for_p(p))
        grid[i][j] = cell
        grid[j][i] = cell
    return CrossCorrelation(
        names=tuple(names), cells=tuple(tuple(row) for row in grid)
    )
