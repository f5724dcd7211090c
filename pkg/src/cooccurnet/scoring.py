"""Block deviance, disciplinarity, interdisciplinarity, and the statistics layer.

Deviance treats each within- or between-community block as an exponential
model for its positive edge weights: the block's expected weight is the
sample mean (the exponential MLE), and the deviance is the sum of squared
deviations from it over ordered node pairs, so each undirected edge
contributes twice. The interdisciplinarity score multiplies small-world
propensity by the per-edge mean deviance under the classification
partition: it is high when the network is strongly small-world but poorly
explained by assigned labels.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.interpolate import CubicSpline

from .community import Partition
from .corpus import TopicVocabulary
from .errors import DataError, NumericError
from .graphbuild import TopicNetwork
from .metrics import small_world_propensity
from .trajectories import MeasureTrajectory

log = logging.getLogger(__name__)

WILCOXON_EXACT_LIMIT = 25
WILCOXON_NOTE = (
    "signed-rank (paired) test; the source analysis names a 'paired Wilcoxon "
    "rank sum test', which describes a paired design"
)


@dataclass(frozen=True)
class BlockFit:
    """Expected edge weight per community block under an exponential fit."""

    partition: Partition
    block_means: np.ndarray  # K x K symmetric, 0 for empty blocks
    deviance_total: float | None = None
    deviance_per_edge: float | None = None


@dataclass(frozen=True)
class InterdisciplinarityScore:
    xi: float
    swp: float
    classification_deviance: float


@dataclass(frozen=True)
class WilcoxonComparison:
    statistic: float
    pvalue: float
    n_pairs: int
    method_note: str = WILCOXON_NOTE


def _positive_edges(net: TopicNetwork) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    iu, ju = np.nonzero(np.triu(net.weights, k=1) > 0)
    return iu, ju, net.weights[iu, ju]


def block_expected_weights(net: TopicNetwork, part: Partition) -> BlockFit:
    """Per-block mean positive edge weight (the exponential MLE of the mean)."""
    if part.labels.shape[0] != net.n_nodes:
        raise DataError("partition does not cover the network's nodes")
    k = part.n_communities
    iu, ju, w = _positive_edges(net)
    b1 = part.labels[iu] - 1
    b2 = part.labels[ju] - 1
    sums = np.zeros((k, k))
    counts = np.zeros((k, k))
    np.add.at(sums, (b1, b2), w)
    np.add.at(counts, (b1, b2), 1.0)
    sums = sums + sums.T - np.diag(np.diagonal(sums))
    counts = counts + counts.T - np.diag(np.diagonal(counts))
    means = np.divide(sums, counts, out=np.zeros_like(sums), where=counts > 0)
    return BlockFit(partition=part, block_means=means)


def partition_deviance(net: TopicNetwork, part: Partition) -> tuple[float, np.ndarray]:
    """Total squared deviation from block means, plus the per-edge deviations.

    The total sums over ordered pairs (each undirected edge twice); the
    returned per-edge array has one entry per undirected positive edge, in
    a fixed row-major order shared across partitions of the same network.
    """
    fit = block_expected_weights(net, part)
    iu, ju, w = _positive_edges(net)
    expected = fit.block_means[part.labels[iu] - 1, part.labels[ju] - 1]
    per_edge = (w - expected) ** 2
    return float(2.0 * per_edge.sum()), per_edge


def compare_partition_deviances(
    net: TopicNetwork, p1: Partition, p2: Partition
) -> WilcoxonComparison:
    """Paired comparison of per-edge deviances under two partitions."""
    _, dev1 = partition_deviance(net, p1)
    _, dev2 = partition_deviance(net, p2)
    diffs = dev1 - dev2
    if not np.any(diffs != 0):
        raise NumericError("identical deviances under both partitions")
    w, p = wilcoxon_signed_rank(dev1, dev2)
    return WilcoxonComparison(statistic=w, pvalue=p, n_pairs=int(np.count_nonzero(diffs)))


def disciplinarity(part: Partition, vocab: TopicVocabulary) -> float:
    """Mean share of each community held by its dominant classification."""
    if any(c is None for c in vocab.classifications):
        raise DataError("vocabulary has unclassified topics")
    if part.labels.shape[0] != vocab.size:
        raise DataError("partition does not cover the vocabulary")
    shares = []
    for c in range(1, part.n_communities + 1):
        members = [vocab.classifications[i] for i in np.flatnonzero(part.labels == c)]
        counts = Counter(members)
        shares.append(max(counts.values()) / len(members))
    return float(np.mean(shares))


def interdisciplinarity(
    net: TopicNetwork, classification_part: Partition, seed: int
) -> InterdisciplinarityScore:
    """Small-world propensity times per-edge mean classification deviance."""
    if classification_part.labels.shape[0] != net.n_nodes:
        raise DataError("classification partition does not cover the network")
    swp = small_world_propensity(net, seed).swp
    _, per_edge = partition_deviance(net, classification_part)
    d_c = float(per_edge.mean())
    return InterdisciplinarityScore(xi=swp * d_c, swp=swp, classification_deviance=d_c)


def _midranks(values: np.ndarray) -> np.ndarray:
    return stats.rankdata(values, method="average")


def wilcoxon_signed_rank(x, y) -> tuple[float, float]:
    """Wilcoxon signed-rank test, two-sided.

    Zero differences are dropped. The null distribution is exact (a
    subset-sum count over midranks, valid under ties) up to 25 pairs, and
    a tie-corrected normal approximation with continuity correction above.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DataError("wilcoxon requires two equal-length series")
    d = x - y
    d = d[d != 0]
    n = d.size
    if n < 5:
        raise NumericError(f"need >= 5 nonzero differences, have {n}")
    ranks = _midranks(np.abs(d))
    w_pos = float(ranks[d > 0].sum())
    if n <= WILCOXON_EXACT_LIMIT:
        p = _exact_signed_rank_p(ranks, w_pos)
    else:
        mean = n * (n + 1) / 4.0
        _, tie_counts = np.unique(ranks, return_counts=True)
        var = n * (n + 1) * (2 * n + 1) / 24.0 - np.sum(tie_counts**3 - tie_counts) / 48.0
        if var <= 0:
            raise NumericError("degenerate rank variance")
        shift = w_pos - mean
        z = (shift - 0.5 * np.sign(shift)) / np.sqrt(var)
        p = float(min(1.0, 2.0 * stats.norm.sf(abs(z))))
    return w_pos, p


def _exact_signed_rank_p(ranks: np.ndarray, w_obs: float) -> float:
    """Two-sided exact p by dynamic programming over doubled midranks."""
    doubled = np.rint(2 * ranks).astype(np.int64)
    total = int(doubled.sum())
    counts = np.zeros(total + 1)
    counts[0] = 1.0
    for r in doubled:
        counts[r:] += counts[:-r].copy()
    n_subsets = counts.sum()
    w2 = int(round(2 * w_obs))
    p_low = counts[: w2 + 1].sum() / n_subsets
    p_high = counts[w2:].sum() / n_subsets
    return float(min(1.0, 2.0 * min(p_low, p_high)))


def _residuals(y: np.ndarray, x: np.ndarray) -> np.ndarray:
    design = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return y - design @ coef


def residualize(y, x) -> np.ndarray:
    """Least-squares residuals of y on (intercept, x); they sum to zero."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if y.shape != x.shape or y.ndim != 1 or y.size < 3:
        raise DataError("residualize requires equal-length series of length >= 3")
    return _residuals(y, x)


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    sa, sb = a.std(), b.std()
    if sa == 0 or sb == 0:
        raise NumericError("zero-variance series in correlation")
    return float(np.mean((a - a.mean()) * (b - b.mean())) / (sa * sb))


def partial_correlation(x, y, z) -> float:
    """Correlation of x and y after removing the linear effect of z from both."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    if not (x.shape == y.shape == z.shape) or x.ndim != 1 or x.size < 4:
        raise DataError("partial correlation requires equal-length series of length >= 4")
    rx = _residuals(x, z)
    ry = _residuals(y, z)
    if rx.std() <= 1e-10 * max(x.std(), 1e-30) or ry.std() <= 1e-10 * max(y.std(), 1e-30):
        raise NumericError("zero residual variance (a series is collinear with the control)")
    return _pearson(rx, ry)


def compare_dependent_correlations(
    r_xy: float, r_xz: float, r_yz: float, n: int
) -> tuple[float, float]:
    """Williams' t for two dependent correlations sharing variable x.

    Tests r_xy against r_xz given the overlap correlation r_yz, with
    n - 3 degrees of freedom; returns (t, two-sided p).
    """
    if n < 10:
        raise DataError(f"need n >= 10 observations, have {n}")
    for r in (r_xy, r_xz, r_yz):
        if abs(r) >= 1.0:
            raise DataError("correlations must lie strictly inside (-1, 1)")
    det = 1.0 - r_xy**2 - r_xz**2 - r_yz**2 + 2.0 * r_xy * r_xz * r_yz
    rbar = 0.5 * (r_xy + r_xz)
    denom = 2.0 * (n - 1) / (n - 3) * det + rbar**2 * (1.0 - r_yz) ** 3
    if denom <= 0:
        raise NumericError("degenerate correlation structure")
    t = (r_xy - r_xz) * np.sqrt((n - 1) * (1.0 + r_yz) / denom)
    p = float(min(1.0, 2.0 * stats.t.sf(abs(t), df=n - 3)))
    return float(t), p


def linear_trend(values: np.ndarray) -> tuple[float, float]:
    """(slope, R^2) of a least-squares line over the index; constant series give 0."""
    values = np.asarray(values, dtype=float)
    idx = np.arange(values.size, dtype=float)
    if values.std() == 0:
        return 0.0, 0.0
    slope = float(np.cov(idx, values, ddof=0)[0, 1] / idx.var())
    r = np.corrcoef(idx, values)[0, 1]
    return slope, float(r * r)


def trend_r2(
    traj: MeasureTrajectory, null_trajs: list[MeasureTrajectory]
) -> tuple[float, float]:
    """R^2 of the linear time trend, with a permutation p against null trajectories.

    p = (1 + #{null R^2 >= observed}) / (1 + #nulls); never exactly zero.
    """
    if len(traj) < 3:
        raise DataError("trend test requires at least 3 windows")
    if len(null_trajs) < 2:
        raise DataError("trend test requires at least 2 null trajectories")
    _, r2_obs = linear_trend(traj.values)
    null_r2 = np.array([linear_trend(t.values)[1] for t in null_trajs])
    k = int(np.count_nonzero(null_r2 >= r2_obs))
    return r2_obs, (1 + k) / (1 + len(null_trajs))


def spline_interpolate_monthly(yearly: dict[int, float]) -> tuple[list[int], np.ndarray]:
    """Natural cubic spline through mid-year knots, evaluated at every month.

    Knots sit at June of each year (month index year*12 + 5); the spline
    reproduces knot values exactly and linear data exactly. Returns
    (month indices, values) covering the first through last knot month.
    """
    years = sorted(yearly)
    if len(years) < 4:
        raise DataError(f"spline needs >= 4 yearly knots, have {len(years)}")
    if any(b - a != 1 for a, b in zip(years, years[1:])):
        raise DataError("spline years must be consecutive")
    knot_months = np.array([y * 12 + 5 for y in years], dtype=float)
    knot_values = np.array([yearly[y] for y in years], dtype=float)
    spline = CubicSpline(knot_months, knot_values, bc_type="natural")
    months = list(range(int(knot_months[0]), int(knot_months[-1]) + 1))
    return months, spline(np.array(months, dtype=float))
