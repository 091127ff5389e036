"""Distribution distances: total variation, cross-correlation error, MMD.

TV is half the L1 distance between probability tables and accepts any mix of
exact and empirical inputs on a matching state space.  Cross-correlation is
the spin-product matrix mean(s_i * s_j) for binary alphabets and the
same-symbol agreement frequency for larger ones; its error metric is the
mean absolute entrywise difference over the strict upper triangle.  MMD is
the unbiased squared-MMD estimator with a Gaussian kernel on the same
encodings the networks use (+/-1 for binary, centered indicator blocks
otherwise), with the median pairwise distance as the default bandwidth.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import EmpiricalDistribution, ExactDistribution, SampleSet, state_count


@dataclass(frozen=True)
class MetricReport:
    """A metric value plus everything needed to reproduce it."""

    name: str
    value: float
    n_a: int
    n_b: int
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value,
                "n_a": self.n_a, "n_b": self.n_b, "params": dict(self.params)}


def _check_space(a, b):
    if (a.q, a.p) != (b.q, b.p):
        raise ValueError(f"state spaces differ: ({a.q},{a.p}) vs ({b.q},{b.p})")


def tv(dist_a, dist_b) -> float:
    """Total variation 0.5 * sum |a - b| over the union support, in [0, 1]."""
    _check_space(dist_a, dist_b)
    exact_a = isinstance(dist_a, ExactDistribution)
    exact_b = isinstance(dist_b, ExactDistribution)
    if exact_a and exact_b:
        value = 0.5 * float(np.abs(dist_a.probs - dist_b.probs).sum())
    elif exact_a != exact_b:
        exact, emp = (dist_a, dist_b) if exact_a else (dist_b, dist_a)
        # mass on states the empirical never saw, plus the seen-state gaps
        seen = np.fromiter(emp.counts.keys(), dtype=np.int64, count=len(emp.counts))
        emp_probs = np.fromiter(emp.counts.values(), dtype=np.float64,
                                count=len(emp.counts)) / emp.total
        exact_seen = exact.probs[seen]
        value = 0.5 * float(np.abs(exact_seen - emp_probs).sum()
                            + (1.0 - exact_seen.sum()))
    else:
        keys = set(dist_a.counts) | set(dist_b.counts)
        value = 0.5 * sum(abs(dist_a.counts.get(k, 0) / dist_a.total
                              - dist_b.counts.get(k, 0) / dist_b.total)
                          for k in keys)
    return min(max(value, 0.0), 1.0)


def cross_correlation(samples: SampleSet) -> np.ndarray:
    """Pairwise statistic matrix with unit diagonal.

    Binary alphabets use C_ij = mean(s_i * s_j) on spins s = 2*sigma - 1;
    larger alphabets use the agreement frequency mean(1{sigma_i == sigma_j}).
    """
    if samples.n == 0:
        raise ValueError("cross_correlation needs at least one sample")
    if samples.p == 2:
        s = 2.0 * samples.rows - 1.0
        return (s.T @ s) / samples.n
    onehot = np.zeros((samples.n, samples.q, samples.p))
    rows_idx = np.arange(samples.n)[:, None]
    cols_idx = np.arange(samples.q)[None, :]
    onehot[rows_idx, cols_idx, samples.rows] = 1.0
    agree = np.einsum("nip,njp->ij", onehot, onehot, optimize=True)
    return agree / samples.n


def cross_correlation_error(samples_a: SampleSet, samples_b: SampleSet) -> float:
    """Mean absolute difference of the two matrices over the strict upper triangle."""
    _check_space(samples_a, samples_b)
    diff = np.abs(cross_correlation(samples_a) - cross_correlation(samples_b))
    iu = np.triu_indices(samples_a.q, k=1)
    if iu[0].size == 0:
        return 0.0
    return float(diff[iu].mean())


def encode_real(samples: SampleSet) -> np.ndarray:
    """Real-vector encoding used by the kernel metrics.

    Binary rows become +/-1 vectors of length q; otherwise each symbol is
    replaced by its centered indicator vector, giving length q*p.
    """
    if samples.p == 2:
        return 2.0 * samples.rows - 1.0
    eye = np.eye(samples.p) - 1.0 / samples.p
    return eye[samples.rows].reshape(samples.n, -1)


def median_bandwidth(pooled: np.ndarray) -> float:
    """Median pairwise Euclidean distance (excluding zero self-distances)."""
    sq = _sq_dists(pooled, pooled)
    iu = np.triu_indices(pooled.shape[0], k=1)
    med = float(np.sqrt(np.median(sq[iu])))
    if med <= 0.0:
        raise ValueError("median pairwise distance is zero; pass a bandwidth explicitly")
    return med


def _sq_dists(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    sq = (x * x).sum(1)[:, None] + (y * y).sum(1)[None, :] - 2.0 * (x @ y.T)
    return np.maximum(sq, 0.0)


def mmd(samples_a: SampleSet, samples_b: SampleSet, bandwidth="median") -> float:
    """Unbiased squared-MMD estimate with the Gaussian kernel exp(-d^2 / (2*bw^2)).

    May be slightly negative when the two laws coincide; that is a property
    of the unbiased estimator, not an error.
    """
    _check_space(samples_a, samples_b)
    if samples_a.n < 2 or samples_b.n < 2:
        raise ValueError("unbiased MMD needs at least two samples per side")
    x = encode_real(samples_a)
    y = encode_real(samples_b)
    if bandwidth == "median":
        bandwidth = median_bandwidth(np.concatenate([x, y], axis=0))
    bandwidth = float(bandwidth)
    if bandwidth <= 0.0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    gamma = 1.0 / (2.0 * bandwidth ** 2)
    k_xx = np.exp(-gamma * _sq_dists(x, x))
    k_yy = np.exp(-gamma * _sq_dists(y, y))
    k_xy = np.exp(-gamma * _sq_dists(x, y))
    m, n = samples_a.n, samples_b.n
    term_x = (k_xx.sum() - np.trace(k_xx)) / (m * (m - 1))
    term_y = (k_yy.sum() - np.trace(k_yy)) / (n * (n - 1))
    return float(term_x + term_y - 2.0 * k_xy.mean())


def evaluate(name: str, a, b, **params) -> MetricReport:
    """Compute a named metric and wrap it in a MetricReport."""
    if name == "tv":
        size = lambda d: d.total if isinstance(d, EmpiricalDistribution) else state_count(d.q, d.p)
        return MetricReport("tv", tv(a, b), size(a), size(b), params)
    if name == "cross_correlation_error":
        return MetricReport(name, cross_correlation_error(a, b), a.n, b.n, params)
    if name == "mmd":
        bandwidth = params.pop("bandwidth", "median")
        max_points = params.pop("max_points", None)
        seed = params.pop("seed", 0)
        a_used, b_used = a, b
        if max_points is not None:
            rng = np.random.default_rng(seed)
            a_used = _subsample(a, max_points, rng)
            b_used = _subsample(b, max_points, rng)
        if bandwidth == "median":
            bandwidth = median_bandwidth(
                np.concatenate([encode_real(a_used), encode_real(b_used)], axis=0))
        value = mmd(a_used, b_used, bandwidth)
        return MetricReport("mmd", value, a_used.n, b_used.n,
                            {"bandwidth": bandwidth, "max_points": max_points,
                             "full_n_a": a.n, "full_n_b": b.n})
    raise ValueError(f"unknown metric {name!r}")


def _subsample(samples: SampleSet, max_points: int, rng) -> SampleSet:
    if samples.n <= max_points:
        return samples
    picks = rng.choice(samples.n, size=max_points, replace=False)
    return SampleSet(samples.q, samples.p, samples.rows[picks],
                     provenance=samples.provenance + f" subsample={max_points}")
