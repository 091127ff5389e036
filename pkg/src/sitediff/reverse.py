"""Reverse-time kernels and samplers.

The reverse kernel for step n redistributes a state over its coordinate-u
fiber, u = (n mod q) + 1, with weights built either from ratios of the exact
time-n table (Bayes reversal) or from a single-site conditional oracle: with
c(r) = mu_n(sigma_u = r | sigma_{-u}), the stay weight is b*c(current) and
each flip-to-r weight is a*c(r).  Both parameterizations agree whenever the
oracle is exact, because mu_n ratios inside a fiber equal conditional
ratios.

With harsh noise (epsilon = 0, T = q) every reverse step collapses to
"resample one coordinate from its conditional", which unrolls into an
autoregressive factorization; both that sampler and its exact output law are
provided for verification.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    GUARD_BITS_DEFAULT,
    ExactDistribution,
    SampleSet,
    as_config,
    check_enumerable,
    decode_configs,
    fiber_indices,
    state_count,
)
from .forward import NoiseSchedule, coordinate_at, forward_marginals
from .models import exact_distribution

_ROW_FLOOR = 1e-30


class ConditionalOracle:
    """Contract for single-site conditional providers.

    Implementations expose integer attributes q, p, T and
    ``conditional(n, u, context) -> (p,) probability vector``, where context
    is the (q-1)-vector of the remaining coordinates in increasing site
    order.  ``conditional_batch`` has a generic row-by-row fallback.
    """

    q: int
    p: int
    T: int

    def conditional(self, n: int, u: int, context) -> np.ndarray:
        raise NotImplementedError

    def conditional_batch(self, n: int, u: int, contexts: np.ndarray) -> np.ndarray:
        contexts = np.asarray(contexts, dtype=np.int64)
        return np.stack([self.conditional(n, u, ctx) for ctx in contexts])


class ExactMarginalOracle(ConditionalOracle):
    """Exact time-dependent conditionals read off the forward marginals."""

    def __init__(self, marginals, schedule: NoiseSchedule):
        if len(marginals) < schedule.T:
            raise ValueError("need the marginal table for every step 0..T-1")
        self.marginals = list(marginals)
        self.schedule = schedule
        self.q, self.p, self.T = schedule.q, schedule.p, schedule.T

    @classmethod
    def from_model(cls, model, schedule: NoiseSchedule,
                   guard_bits: int = GUARD_BITS_DEFAULT) -> "ExactMarginalOracle":
        mu0 = exact_distribution(model, guard_bits)
        return cls(forward_marginals(mu0, schedule), schedule)

    @classmethod
    def from_distribution(cls, mu0: ExactDistribution,
                          schedule: NoiseSchedule) -> "ExactMarginalOracle":
        return cls(forward_marginals(mu0, schedule), schedule)

    def conditional(self, n: int, u: int, context) -> np.ndarray:
        return self.conditional_batch(n, u, np.asarray(context)[None, :])[0]

    def conditional_batch(self, n: int, u: int, contexts: np.ndarray) -> np.ndarray:
        probs = self.marginals[n].probs
        contexts = np.asarray(contexts, dtype=np.int64)
        strides = np.power(np.int64(self.p), np.arange(self.q, dtype=np.int64))
        base = contexts @ np.delete(strides, u - 1)
        idx = base[:, None] + strides[u - 1] * np.arange(self.p, dtype=np.int64)
        fib = probs[idx]
        mass = fib.sum(axis=1, keepdims=True)
        if np.any(mass <= 0.0):
            raise ZeroDivisionError(
                f"marginal at step {n} has an empty coordinate-{u} fiber")
        return fib / mass


class FunctionOracle(ConditionalOracle):
    """Wrap a plain callable (n, u, context) -> (p,) vector as an oracle."""

    def __init__(self, q: int, p: int, T: int, fn):
        self.q, self.p, self.T = q, p, T
        self._fn = fn

    def conditional(self, n: int, u: int, context) -> np.ndarray:
        return np.asarray(self._fn(n, u, np.asarray(context, dtype=np.int64)),
                          dtype=np.float64)


def exact_reverse_kernel_row(mu_n: ExactDistribution, schedule: NoiseSchedule,
                             n: int, from_config) -> np.ndarray:
    """Bayes-reversal row over the p fiber symbols at the step-n coordinate.

    Entry r is the probability of moving coordinate u to symbol r given the
    time-(n+1) state ``from_config``; built from table ratios of mu_n.
    """
    config = as_config(from_config, mu_n.p)
    u = coordinate_at(schedule, n)
    strides = np.power(np.int64(mu_n.p), np.arange(mu_n.q, dtype=np.int64))
    base = int(np.delete(config, u - 1) @ np.delete(strides, u - 1))
    fib = mu_n.probs[base + strides[u - 1] * np.arange(mu_n.p, dtype=np.int64)]
    weights = schedule.a * fib
    weights[config[u - 1]] = schedule.b * fib[config[u - 1]]
    total = weights.sum()
    if total <= 0.0:
        raise ZeroDivisionError(
            f"reverse row denominator underflowed at step {n}: "
            f"mu_{n} has no mass on the coordinate-{u} fiber of {config}")
    return weights / total


def reverse_kernel_row_from_conditionals(oracle: ConditionalOracle,
                                         schedule: NoiseSchedule, n: int,
                                         from_config) -> np.ndarray:
    """Reverse row built from the oracle's single-site conditional.

    Stay weight b*c(current symbol), flip-to-r weight a*c(r); a 1e-30 floor
    inside the normalization keeps rows defined when the oracle underflows.
    """
    config = as_config(from_config, schedule.p)
    u = coordinate_at(schedule, n)
    cond = np.asarray(
        oracle.conditional(n, u, np.delete(config, u - 1)), dtype=np.float64)
    _check_conditional(cond[None, :], schedule.p)
    weights = schedule.a * cond
    weights[config[u - 1]] = schedule.b * cond[config[u - 1]]
    weights = weights + _ROW_FLOOR
    return weights / weights.sum()


def _check_conditional(cond: np.ndarray, p: int) -> None:
    if cond.shape[-1] != p:
        raise ValueError(f"oracle returned vectors of length {cond.shape[-1]}, expected {p}")
    if not np.all(np.isfinite(cond)) or np.any(cond < 0.0):
        raise ValueError("oracle returned a non-distribution (negative or non-finite)")
    sums = cond.sum(axis=-1)
    if np.any(np.abs(sums - 1.0) > 1e-9):
        worst = float(np.abs(sums - 1.0).max())
        raise ValueError(f"oracle rows sum to 1 +/- {worst:.3e} (tolerance 1e-9)")


def _draw_rows(init, schedule: NoiseSchedule, n_samples: int,
               rng: np.random.Generator) -> np.ndarray:
    if isinstance(init, str):
        if init != "uniform":
            raise ValueError(f"unknown init {init!r}")
        return rng.integers(0, schedule.p, size=(n_samples, schedule.q))
    if isinstance(init, SampleSet):
        picks = rng.integers(0, init.n, size=n_samples)
        return init.rows[picks].copy()
    if isinstance(init, ExactDistribution):
        cdf = np.cumsum(init.probs)
        cdf[-1] = 1.0
        idx = np.searchsorted(cdf, rng.random(n_samples), side="right")
        return decode_configs(idx, schedule.q, schedule.p)
    raise TypeError(f"unsupported init type {type(init).__name__}")


def reverse_sample(oracle: ConditionalOracle, schedule: NoiseSchedule,
                   n_samples: int, init="uniform", rng=None) -> SampleSet:
    """Run the reverse chain from step T down to 0 for a batch of samples."""
    if oracle.q != schedule.q or oracle.p != schedule.p:
        raise ValueError("oracle and schedule disagree on (q, p)")
    rng = np.random.default_rng(rng)
    rows = _draw_rows(init, schedule, n_samples, rng)
    for n in reversed(range(schedule.T)):
        u = coordinate_at(schedule, n)
        cond = oracle.conditional_batch(n, u, np.delete(rows, u - 1, axis=1))
        cond = np.asarray(cond, dtype=np.float64)
        _check_conditional(cond, schedule.p)
        weights = schedule.a * cond
        here = np.arange(n_samples)
        cur = rows[:, u - 1]
        weights[here, cur] = schedule.b * cond[here, cur]
        weights += _ROW_FLOOR
        weights /= weights.sum(axis=1, keepdims=True)
        cdf = np.cumsum(weights, axis=1)
        cdf[:, -1] = 1.0
        rows[:, u - 1] = (cdf < rng.random((n_samples, 1))).sum(axis=1)
    return SampleSet(schedule.q, schedule.p, rows,
                     provenance=f"reverse-sampler T={schedule.T} eps={schedule.epsilon}")


def _oracle_kernel_fibers(oracle: ConditionalOracle, schedule: NoiseSchedule,
                          n: int, contexts: np.ndarray) -> np.ndarray:
    """Per-fiber reverse kernel matrices K[f, new, old] for step n."""
    u = coordinate_at(schedule, n)
    cond = np.asarray(oracle.conditional_batch(n, u, contexts), dtype=np.float64)
    _check_conditional(cond, schedule.p)
    p = schedule.p
    kernel = np.broadcast_to(schedule.a * cond[:, :, None],
                             (cond.shape[0], p, p)).copy()
    diag = np.arange(p)
    kernel[:, diag, diag] = schedule.b * cond
    kernel += _ROW_FLOOR
    kernel /= kernel.sum(axis=1, keepdims=True)
    return kernel


def reverse_pushforward_exact(oracle: ConditionalOracle, schedule: NoiseSchedule,
                              init_dist: ExactDistribution,
                              guard_bits: int = GUARD_BITS_DEFAULT) -> ExactDistribution:
    """Exact output law of the reverse chain started from init_dist (no sampling)."""
    check_enumerable(schedule.q, schedule.p, guard_bits)
    probs = init_dist.probs.copy()
    for n in reversed(range(schedule.T)):
        u = coordinate_at(schedule, n)
        idx, contexts = fiber_indices(schedule.q, schedule.p, u, guard_bits)
        kernel = _oracle_kernel_fibers(oracle, schedule, n, contexts)
        probs[idx] = np.einsum("fno,fo->fn", kernel, probs[idx])
    return ExactDistribution.from_weights(schedule.q, schedule.p, probs)


def autoregressive_sample(oracle: ConditionalOracle, order=None,
                          rng=None) -> np.ndarray:
    """Hard-noise sampler: resample each coordinate once from its conditional.

    The default order is reverse round-robin (q down to 1); coordinate u is
    queried at the step where it is denoised, n = u - 1.
    """
    rng = np.random.default_rng(rng)
    order = _check_order(oracle.q, order)
    config = rng.integers(0, oracle.p, size=oracle.q)
    for u in order:
        cond = np.asarray(
            oracle.conditional(u - 1, u, np.delete(config, u - 1)), dtype=np.float64)
        _check_conditional(cond[None, :], oracle.p)
        config[u - 1] = rng.choice(oracle.p, p=cond / cond.sum())
    return config


def autoregressive_law(oracle: ConditionalOracle, order=None,
                       guard_bits: int = GUARD_BITS_DEFAULT) -> ExactDistribution:
    """Exact output law of autoregressive_sample, by full enumeration.

    Starts from the uniform table and applies each "resample coordinate u
    from its conditional" update analytically, so the result averages over
    every initialization and every intermediate draw.
    """
    order = _check_order(oracle.q, order)
    n_states = state_count(oracle.q, oracle.p)
    probs = np.full(n_states, 1.0 / n_states)
    for u in order:
        idx, contexts = fiber_indices(oracle.q, oracle.p, u, guard_bits)
        cond = np.asarray(
            oracle.conditional_batch(u - 1, u, contexts), dtype=np.float64)
        _check_conditional(cond, oracle.p)
        fiber_mass = probs[idx].sum(axis=1, keepdims=True)
        probs[idx] = fiber_mass * (cond / cond.sum(axis=1, keepdims=True))
    return ExactDistribution.from_weights(oracle.q, oracle.p, probs)


def _check_order(q: int, order):
    if order is None:
        return list(range(q, 0, -1))
    order = [int(u) for u in order]
    if sorted(order) != list(range(1, q + 1)):
        raise ValueError(f"order must be a permutation of 1..{q}, got {order}")
    return order


@dataclass(frozen=True)
class ReverseReport:
    """Diagnostics from scanning reverse kernel rows."""

    steps: int
    rows_checked: int
    row_sum_max_error: float
    min_conditional: float
    max_ratio: float


def kernel_diagnostics(oracle: ConditionalOracle, schedule: NoiseSchedule,
                       probe_rows: np.ndarray) -> ReverseReport:
    """Scan reverse rows for the probe states across all steps."""
    probe_rows = np.asarray(probe_rows, dtype=np.int64)
    worst_sum = 0.0
    min_cond = np.inf
    max_ratio = 0.0
    checked = 0
    for n in range(schedule.T):
        u = coordinate_at(schedule, n)
        cond = np.asarray(oracle.conditional_batch(
            n, u, np.delete(probe_rows, u - 1, axis=1)), dtype=np.float64)
        _check_conditional(cond, schedule.p)
        min_cond = min(min_cond, float(cond.min()))
        floor = np.maximum(cond.min(axis=1), _ROW_FLOOR)
        max_ratio = max(max_ratio, float((cond.max(axis=1) / floor).max()))
        for row, c in zip(probe_rows, cond):
            weights = schedule.a * c
            weights[row[u - 1]] = schedule.b * c[row[u - 1]]
            weights += _ROW_FLOOR
            worst_sum = max(worst_sum, abs(float((weights / weights.sum()).sum()) - 1.0))
            checked += 1
    return ReverseReport(schedule.T, checked, worst_sum, min_cond, max_ratio)
