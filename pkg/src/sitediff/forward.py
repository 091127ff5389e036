"""Round-robin forward noising.

One coordinate per step, in cyclic order: kernel k_n (n = 0..T-1) maps the
time-n law to the time-(n+1) law and touches coordinate u = (n mod q) + 1.
The touched coordinate keeps its value with probability b = (1-eps)/p + eps
and moves to each of the other p-1 symbols with probability a = (1-eps)/p,
so a*(p-1) + b = 1 identically.  The stationary reference is uniform over
Sigma^q.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    GUARD_BITS_DEFAULT,
    ExactDistribution,
    as_config,
    state_count,
)

DEFAULT_SWEEPS = 2


@dataclass(frozen=True)
class NoiseSchedule:
    """Forward-process parameters plus the derived per-step probabilities."""

    p: int
    q: int
    T: int
    epsilon: float

    def __post_init__(self):
        if self.p < 2 or self.q < 1:
            raise ValueError("need p >= 2 and q >= 1")
        if self.T < 0:
            raise ValueError("step count must be non-negative")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")

    @classmethod
    def from_sweeps(cls, p: int, q: int, epsilon: float,
                    sweeps: int = DEFAULT_SWEEPS) -> "NoiseSchedule":
        """Schedule with T = sweeps * q full round-robin passes."""
        return cls(p, q, sweeps * q, epsilon)

    @property
    def a(self) -> float:
        """Probability of moving the touched coordinate to one given other symbol."""
        return (1.0 - self.epsilon) / self.p

    @property
    def b(self) -> float:
        """Probability the touched coordinate keeps its value."""
        return (1.0 - self.epsilon) / self.p + self.epsilon


def coordinate_at(schedule: NoiseSchedule, n: int) -> int:
    """Coordinate (1-based) touched by kernel k_n."""
    if not 0 <= n < schedule.T:
        raise ValueError(f"step {n} out of range 0..{schedule.T - 1}")
    return n % schedule.q + 1


def forward_kernel_row(schedule: NoiseSchedule, n: int, config) -> np.ndarray:
    """Kernel row over the p candidate symbols at the step-n coordinate.

    Entry r is the probability of landing on symbol r at coordinate
    u = coordinate_at(n); all other coordinates are untouched.
    """
    config = as_config(config, schedule.p)
    u = coordinate_at(schedule, n)
    row = np.full(schedule.p, schedule.a)
    row[config[u - 1]] = schedule.b
    return row


def noise_step(config, n: int, schedule: NoiseSchedule, rng) -> np.ndarray:
    """One forward step; only coordinate u = coordinate_at(n) can change."""
    config = as_config(config, schedule.p)
    return noise_step_batch(config[None, :], n, schedule, rng)[0]


def noise_step_batch(rows: np.ndarray, n: int, schedule: NoiseSchedule,
                     rng: np.random.Generator) -> np.ndarray:
    """Apply one forward step to every row of an (m, q) array."""
    u = coordinate_at(schedule, n)
    rows = np.array(rows, dtype=np.int64)
    hit = rng.random(rows.shape[0]) >= schedule.epsilon
    fresh = rng.integers(0, schedule.p, size=rows.shape[0])
    rows[hit, u - 1] = fresh[hit]
    return rows


def noise_trajectory(config, steps: int, schedule: NoiseSchedule, rng) -> list:
    """States after 0..steps forward steps (length steps+1)."""
    if steps > schedule.T:
        raise ValueError(f"steps={steps} exceeds schedule horizon T={schedule.T}")
    out = [as_config(config, schedule.p)]
    for n in range(steps):
        out.append(noise_step(out[-1], n, schedule, rng))
    return out


def _fiber_view(probs: np.ndarray, q: int, p: int, u: int) -> np.ndarray:
    """Reshape a dense table so the axis of coordinate u is last: (p**(q-1), p).

    Row f of the result is the fiber N_u for one fixed context; entry r is
    the state with symbol r at u.  May alias the input for u=1; callers
    treat it read-only.
    """
    table = probs.reshape((p,) * q)  # axis k holds coordinate q - k
    return np.moveaxis(table, q - u, -1).reshape(-1, p)


def _from_fiber(fibers: np.ndarray, q: int, p: int, u: int) -> np.ndarray:
    table = fibers.reshape((p,) * (q - 1) + (p,))
    return np.moveaxis(table, -1, q - u).reshape(-1)


def push_forward_exact(mu_n: ExactDistribution, schedule: NoiseSchedule,
                       n: int, guard_bits: int = GUARD_BITS_DEFAULT) -> ExactDistribution:
    """Exact one-step pushforward mu_{n+1}[s] = sum_t k_n(s, t) mu_n[t]."""
    u = coordinate_at(schedule, n)
    fibers = _fiber_view(mu_n.probs, mu_n.q, mu_n.p, u)
    fiber_mass = fibers.sum(axis=1, keepdims=True)
    new = schedule.b * fibers + schedule.a * (fiber_mass - fibers)
    return ExactDistribution.from_weights(
        mu_n.q, mu_n.p, _from_fiber(new, mu_n.q, mu_n.p, u))


def forward_marginals(mu_0: ExactDistribution, schedule: NoiseSchedule) -> list:
    """All exact marginals [mu_0, ..., mu_T] along the forward chain."""
    out = [mu_0]
    for n in range(schedule.T):
        out.append(push_forward_exact(out[-1], schedule, n))
    return out


def mixing_tv(model, schedule: NoiseSchedule,
              guard_bits: int = GUARD_BITS_DEFAULT) -> float:
    """TV distance between the T-step pushforward of the model law and uniform."""
    from .models import exact_distribution  # local import to avoid a cycle

    mu = exact_distribution(model, guard_bits)
    for n in range(schedule.T):
        mu = push_forward_exact(mu, schedule, n)
    uniform = 1.0 / state_count(schedule.q, schedule.p)
    return 0.5 * float(np.abs(mu.probs - uniform).sum())
