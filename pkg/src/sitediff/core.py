"""State indexing and probability containers shared across the package.

Configurations over a finite alphabet {0, ..., p-1} live in Sigma^q and are
stored as small integer vectors.  Every dense table is keyed by a mixed-radix
state index with coordinate 1 as the least-significant digit, so coordinate u
has stride p**(u-1).

Fully enumerated tables are only built while q*log2(p) stays below a
configurable guard (default 24 bits, ~16.8M states), keeping the exact
regime at desk scale.  State indices are plain 64-bit integers, so encoding
is refused outright beyond 62 bits regardless of the guard.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

GUARD_BITS_DEFAULT = 24
INDEX_BITS_MAX = 62


class StateSpaceTooLargeError(RuntimeError):
    """An operation would enumerate more states than the guard allows."""


def state_count(q: int, p: int) -> int:
    """Number of configurations p**q, as an exact Python integer."""
    return p ** q


def index_bits(q: int, p: int) -> float:
    """Bits needed for a state index: q * log2(p)."""
    return q * math.log2(p)


def check_index_width(q: int, p: int) -> None:
    if state_count(q, p) > 2 ** INDEX_BITS_MAX:
        raise OverflowError(
            f"state index for q={q}, p={p} needs {index_bits(q, p):.1f} bits "
            f"(> {INDEX_BITS_MAX})"
        )


def check_enumerable(q: int, p: int, guard_bits: int = GUARD_BITS_DEFAULT) -> None:
    """Refuse brute-force enumeration above the guard.

    Raises:
        StateSpaceTooLargeError: if q*log2(p) exceeds ``guard_bits``.
    """
    check_index_width(q, p)
    if index_bits(q, p) > guard_bits + 1e-9:
        raise StateSpaceTooLargeError(
            f"q={q}, p={p} needs {index_bits(q, p):.1f} bits of state index; "
            f"guard is {guard_bits} bits"
        )


def as_config(values, p: int) -> np.ndarray:
    """Validate and return a configuration as an integer array."""
    config = np.asarray(values, dtype=np.int64)
    if config.ndim != 1 or config.size == 0:
        raise ValueError(f"configuration must be a non-empty vector, got shape {config.shape}")
    if np.any(config < 0) or np.any(config >= p):
        raise ValueError(f"symbols must lie in [0, {p}), got {config}")
    return config


def _strides(q: int, p: int) -> np.ndarray:
    return np.power(np.int64(p), np.arange(q, dtype=np.int64))


def encode_config(config, p: int) -> int:
    """Mixed-radix state index of a configuration (coordinate 1 least significant)."""
    config = as_config(config, p)
    check_index_width(config.size, p)
    return int(np.dot(config, _strides(config.size, p)))


def decode_config(index: int, q: int, p: int) -> np.ndarray:
    """Inverse of :func:`encode_config`."""
    if not 0 <= index < state_count(q, p):
        raise ValueError(f"index {index} out of range for q={q}, p={p}")
    return (index // _strides(q, p)) % p


def encode_configs(rows: np.ndarray, p: int) -> np.ndarray:
    """Vectorized encode of an (n, q) array of configurations."""
    rows = np.asarray(rows, dtype=np.int64)
    check_index_width(rows.shape[1], p)
    return rows @ _strides(rows.shape[1], p)


def decode_configs(indices: np.ndarray, q: int, p: int) -> np.ndarray:
    """Vectorized decode into an (n, q) array."""
    indices = np.asarray(indices, dtype=np.int64)
    return ((indices[:, None] // _strides(q, p)[None, :]) % p).astype(np.int64)


def all_configurations(q: int, p: int, guard_bits: int = GUARD_BITS_DEFAULT) -> np.ndarray:
    """Every configuration as a (p**q, q) array, in state-index order."""
    check_enumerable(q, p, guard_bits)
    return decode_configs(np.arange(state_count(q, p), dtype=np.int64), q, p)


def fiber_indices(q: int, p: int, u: int,
                  guard_bits: int = GUARD_BITS_DEFAULT):
    """State indices and contexts of every coordinate-u fiber.

    Returns (idx, contexts): idx[f, r] is the state index whose coordinate u
    holds symbol r and whose remaining coordinates spell context f;
    contexts[f] is that (q-1)-vector in increasing site order.
    """
    check_enumerable(q, p, guard_bits)
    if not 1 <= u <= q:
        raise ValueError(f"coordinate {u} out of range 1..{q}")
    stride = np.int64(p) ** (u - 1)
    all_idx = np.arange(state_count(q, p), dtype=np.int64)
    reps = all_idx[(all_idx // stride) % p == 0]
    idx = reps[:, None] + stride * np.arange(p, dtype=np.int64)[None, :]
    contexts = np.delete(decode_configs(reps, q, p), u - 1, axis=1)
    return idx, contexts


@dataclass(frozen=True)
class ExactDistribution:
    """Dense probability table over Sigma^q, indexed by state index."""

    q: int
    p: int
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        object.__setattr__(self, "probs", probs)
        n = state_count(self.q, self.p)
        if probs.shape != (n,):
            raise ValueError(f"expected table of length {n}, got shape {probs.shape}")
        if np.any(probs < 0.0):
            raise ValueError("probability table has negative entries")
        total = float(probs.sum())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"probability table sums to {total!r}, not 1")

    @classmethod
    def from_weights(cls, q: int, p: int, weights: np.ndarray) -> "ExactDistribution":
        """Normalize non-negative weights into a distribution."""
        weights = np.asarray(weights, dtype=np.float64)
        total = weights.sum()
        if not np.isfinite(total) or total <= 0.0:
            raise ValueError(f"weights sum to {total!r}; cannot normalize")
        return cls(q, p, weights / total)

    @classmethod
    def uniform(cls, q: int, p: int) -> "ExactDistribution":
        n = state_count(q, p)
        return cls(q, p, np.full(n, 1.0 / n))

    @classmethod
    def point_mass(cls, config, p: int) -> "ExactDistribution":
        config = as_config(config, p)
        probs = np.zeros(state_count(config.size, p))
        probs[encode_config(config, p)] = 1.0
        return cls(config.size, p, probs)


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Sparse counts over state indices; total is the number of samples."""

    q: int
    p: int
    counts: dict
    total: int

    def __post_init__(self):
        if self.total <= 0:
            raise ValueError("empirical distribution needs at least one sample")
        if sum(self.counts.values()) != self.total:
            raise ValueError("counts do not sum to total")

    def prob(self, index: int) -> float:
        return self.counts.get(index, 0) / self.total


@dataclass(frozen=True)
class SampleSet:
    """A batch of configurations sharing (q, p), with free-form provenance."""

    q: int
    p: int
    rows: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        object.__setattr__(self, "rows", rows)
        if rows.ndim != 2 or rows.shape[1] != self.q:
            raise ValueError(f"rows must have shape (n, {self.q}), got {rows.shape}")
        if rows.size and (rows.min() < 0 or rows.max() >= self.p):
            raise ValueError(f"sample symbols must lie in [0, {self.p})")

    @property
    def n(self) -> int:
        return self.rows.shape[0]


def empirical_from_samples(samples: SampleSet) -> EmpiricalDistribution:
    """Exact multiplicity counts of a sample set."""
    if samples.n == 0:
        raise ValueError("cannot build an empirical distribution from zero samples")
    idx = encode_configs(samples.rows, samples.p)
    uniq, cnt = np.unique(idx, return_counts=True)
    counts = {int(k): int(c) for k, c in zip(uniq, cnt)}
    return EmpiricalDistribution(samples.q, samples.p, counts, samples.n)


def save_samples(path, samples: SampleSet) -> None:
    """Write the text sample format: a "q=.. p=.." header, then one row per line.

    Provenance is preserved in '#'-prefixed comment lines after the header.
    """
    path = Path(path)
    with path.open("w") as fh:
        fh.write(f"q={samples.q} p={samples.p}\n")
        for line in samples.provenance.splitlines():
            fh.write(f"# {line}\n")
        np.savetxt(fh, samples.rows, fmt="%d")


def load_samples(path, p: int | None = None) -> SampleSet:
    """Read a sample file.

    Accepts the native header format and, as a fallback, a raw CSV of
    integers with q columns (p inferred as max+1 unless given).
    """
    path = Path(path)
    with path.open() as fh:
        first = fh.readline()
        if first.startswith("q="):
            parts = dict(tok.split("=") for tok in first.split())
            q, file_p = int(parts["q"]), int(parts["p"])
            provenance = []
            rows = []
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    provenance.append(line[1:].strip())
                    continue
                rows.append([int(tok) for tok in line.split()])
            rows = np.asarray(rows, dtype=np.int64).reshape(len(rows), q)
            return SampleSet(q, file_p, rows, provenance="\n".join(provenance))
    # raw CSV fallback
    rows = np.loadtxt(path, delimiter=",", dtype=np.int64, ndmin=2)
    file_p = p if p is not None else int(rows.max()) + 1
    return SampleSet(rows.shape[1], file_p, rows, provenance=f"csv:{path.name}")
