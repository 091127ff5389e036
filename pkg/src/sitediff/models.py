"""Gibbs distributions mu ~ exp(H) for pairwise Ising and Potts Hamiltonians.

The Ising energy is H = sum_{(i,j)} J_ij s_i s_j + sum_i h_i s_i on spins
s = 2*sigma - 1; the Potts energy uses the same-symbol indicator convention
H = -sum_{(i,j)} J_ij 1{sigma_i = sigma_j} - sum_i h[i, sigma_i].  Both give
mu(sigma) = exp(H(sigma)) / Z.

Edwards-Anderson instances put random +/-J couplings on a periodic 2D
lattice (right and bottom neighbors per site).  On a 2x2 lattice wraparound
makes each neighbor pair appear twice; duplicate edges are merged by summing
their couplings, which preserves the Hamiltonian while keeping the edge list
a set.

Coordinates are 1-based in every public interface.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .core import (
    GUARD_BITS_DEFAULT,
    ExactDistribution,
    SampleSet,
    as_config,
    check_enumerable,
    decode_configs,
    state_count,
)

_ENERGY_CHUNK = 1 << 20


def _validate_edges(edges, q: int):
    seen = set()
    out = []
    for i, j, coupling in edges:
        i, j, coupling = int(i), int(j), float(coupling)
        if not (1 <= i < j <= q):
            raise ValueError(f"edge ({i},{j}) must satisfy 1 <= i < j <= q={q}")
        if (i, j) in seen:
            raise ValueError(f"duplicate edge ({i},{j})")
        if not np.isfinite(coupling):
            raise ValueError(f"coupling for edge ({i},{j}) is not finite")
        seen.add((i, j))
        out.append((i, j, coupling))
    return tuple(out)


@dataclass(frozen=True)
class IsingModel:
    """Binary pairwise model; symbols {0,1} map to spins {-1,+1} inside energies."""

    q: int
    edges: tuple
    h: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "edges", _validate_edges(self.edges, self.q))
        h = np.asarray(self.h, dtype=np.float64)
        if h.shape != (self.q,):
            raise ValueError(f"fields must have shape ({self.q},), got {h.shape}")
        object.__setattr__(self, "h", h)

    @property
    def p(self) -> int:
        return 2

    @cached_property
    def _edge_arrays(self):
        if not self.edges:
            return (np.zeros(0, dtype=np.int64),) * 2 + (np.zeros(0),)
        i, j, coupling = zip(*self.edges)
        return (
            np.asarray(i, dtype=np.int64) - 1,
            np.asarray(j, dtype=np.int64) - 1,
            np.asarray(coupling, dtype=np.float64),
        )

    @cached_property
    def _neighbors(self):
        """Per-site list of (other_site_0based, coupling) arrays."""
        nbrs = [[] for _ in range(self.q)]
        for i, j, coupling in self.edges:
            nbrs[i - 1].append((j - 1, coupling))
            nbrs[j - 1].append((i - 1, coupling))
        return [
            (np.asarray([a for a, _ in lst], dtype=np.int64),
             np.asarray([c for _, c in lst], dtype=np.float64))
            for lst in nbrs
        ]


@dataclass(frozen=True)
class PottsModel:
    """Multi-symbol pairwise model with indicator interactions and per-symbol fields."""

    q: int
    p: int
    edges: tuple
    h: np.ndarray

    def __post_init__(self):
        if self.p < 2:
            raise ValueError("alphabet size must be at least 2")
        object.__setattr__(self, "edges", _validate_edges(self.edges, self.q))
        h = np.asarray(self.h, dtype=np.float64)
        if h.shape != (self.q, self.p):
            raise ValueError(f"fields must have shape ({self.q},{self.p}), got {h.shape}")
        object.__setattr__(self, "h", h)

    @cached_property
    def _edge_arrays(self):
        if not self.edges:
            return (np.zeros(0, dtype=np.int64),) * 2 + (np.zeros(0),)
        i, j, coupling = zip(*self.edges)
        return (
            np.asarray(i, dtype=np.int64) - 1,
            np.asarray(j, dtype=np.int64) - 1,
            np.asarray(coupling, dtype=np.float64),
        )

    @cached_property
    def _neighbors(self):
        nbrs = [[] for _ in range(self.q)]
        for i, j, coupling in self.edges:
            nbrs[i - 1].append((j - 1, coupling))
            nbrs[j - 1].append((i - 1, coupling))
        return [
            (np.asarray([a for a, _ in lst], dtype=np.int64),
             np.asarray([c for _, c in lst], dtype=np.float64))
            for lst in nbrs
        ]


@dataclass(frozen=True)
class EAParams:
    """Edwards-Anderson instance parameters on an L x L periodic lattice."""

    L: int
    J_mag: float
    h_mag: float
    seed: int

    def __post_init__(self):
        if self.L < 2:
            raise ValueError("lattice side must be at least 2")
        if self.J_mag < 0 or self.h_mag < 0:
            raise ValueError("coupling/field magnitudes must be non-negative")


def periodic_lattice_slots(L: int):
    """Right+bottom neighbor slots of the periodic L x L lattice, 1-based, i<j.

    Returns 2*L*L slots; on L=2 each unordered pair appears twice via
    wraparound and callers are expected to merge.
    """
    slots = []
    for r in range(L):
        for c in range(L):
            site = r * L + c + 1
            right = r * L + (c + 1) % L + 1
            down = ((r + 1) % L) * L + c + 1
            for other in (right, down):
                slots.append((min(site, other), max(site, other)))
    return slots


def _merge_slots(slots, couplings):
    merged = {}
    for (i, j), coupling in zip(slots, couplings):
        merged[(i, j)] = merged.get((i, j), 0.0) + coupling
    return tuple((i, j, c) for (i, j), c in sorted(merged.items()))


def _signs(rng: np.random.Generator, n: int, magnitude: float) -> np.ndarray:
    return magnitude * rng.choice([-1.0, 1.0], size=n)


def ea_ising(params: EAParams) -> IsingModel:
    """Random-coupling Ising instance on the periodic lattice, deterministic in seed."""
    rng = np.random.default_rng(params.seed)
    slots = periodic_lattice_slots(params.L)
    couplings = _signs(rng, len(slots), params.J_mag)
    fields = _signs(rng, params.L ** 2, params.h_mag)
    return IsingModel(params.L ** 2, _merge_slots(slots, couplings), fields)


def ea_potts(L: int, p: int, J: float, h: float, seed: int) -> PottsModel:
    """Potts analogue of the EA instance: indicator couplings, per-symbol fields."""
    if p < 2:
        raise ValueError("alphabet size must be at least 2")
    rng = np.random.default_rng(seed)
    slots = periodic_lattice_slots(L)
    couplings = _signs(rng, len(slots), J)
    fields = _signs(rng, L * L * p, h).reshape(L * L, p)
    return PottsModel(L * L, p, _merge_slots(slots, couplings), fields)


def alphabet_size(model) -> int:
    return model.p


def energy(model, config) -> float:
    """Hamiltonian value H(config) under the model's sign convention."""
    config = as_config(config, model.p)
    if config.size != model.q:
        raise ValueError(f"configuration has {config.size} sites, model has {model.q}")
    return float(energy_batch(model, config[None, :])[0])


def energy_batch(model, rows: np.ndarray) -> np.ndarray:
    """Vectorized H over an (n, q) array of configurations."""
    rows = np.asarray(rows, dtype=np.int64)
    ei, ej, coupling = model._edge_arrays
    if isinstance(model, IsingModel):
        s = 2.0 * rows - 1.0
        out = s @ model.h
        if ei.size:
            out = out + (s[:, ei] * s[:, ej]) @ coupling
        return out
    if isinstance(model, PottsModel):
        out = -model.h[np.arange(model.q)[None, :], rows].sum(axis=1)
        if ei.size:
            agree = (rows[:, ei] == rows[:, ej]).astype(np.float64)
            out = out - agree @ coupling
        return out
    raise TypeError(f"unsupported model type {type(model).__name__}")


def exact_distribution(model, guard_bits: int = GUARD_BITS_DEFAULT) -> ExactDistribution:
    """Fully enumerated Gibbs table exp(H)/Z, stabilized by max-subtraction."""
    check_enumerable(model.q, model.p, guard_bits)
    n = state_count(model.q, model.p)
    energies = np.empty(n, dtype=np.float64)
    for start in range(0, n, _ENERGY_CHUNK):
        stop = min(start + _ENERGY_CHUNK, n)
        rows = decode_configs(np.arange(start, stop, dtype=np.int64), model.q, model.p)
        energies[start:stop] = energy_batch(model, rows)
    weights = np.exp(energies - energies.max())
    return ExactDistribution.from_weights(model.q, model.p, weights)


def sample_exact(dist: ExactDistribution, n: int, seed) -> SampleSet:
    """I.i.d. draws from a dense table by cumulative inversion."""
    if n <= 0:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(dist.probs)
    cdf[-1] = 1.0
    idx = np.searchsorted(cdf, rng.random(n), side="right")
    rows = decode_configs(idx, dist.q, dist.p)
    return SampleSet(dist.q, dist.p, rows, provenance=f"exact-sampler seed={seed}")


def exact_conditional(model, config, u: int) -> np.ndarray:
    """Single-site conditional mu(sigma_u = r | sigma_{-u}) from local terms only."""
    config = as_config(config, model.p)
    if not 1 <= u <= model.q:
        raise ValueError(f"coordinate {u} out of range 1..{model.q}")
    return conditional_batch(model, config[None, :], u)[0]


def conditional_batch(model, rows: np.ndarray, u: int) -> np.ndarray:
    """Vectorized exact_conditional over (n, q) rows; returns (n, p)."""
    rows = np.asarray(rows, dtype=np.int64)
    site = u - 1
    nbr_idx, nbr_coupling = model._neighbors[site]
    if isinstance(model, IsingModel):
        local = np.full(rows.shape[0], model.h[site])
        if nbr_idx.size:
            local = local + (2.0 * rows[:, nbr_idx] - 1.0) @ nbr_coupling
        # partial energies for r=0 (spin -1) and r=1 (spin +1)
        part = np.stack([-local, local], axis=1)
    elif isinstance(model, PottsModel):
        part = np.broadcast_to(-model.h[site], (rows.shape[0], model.p)).copy()
        for a, coupling in zip(nbr_idx, nbr_coupling):
            part[np.arange(rows.shape[0]), rows[:, a]] -= coupling
    else:
        raise TypeError(f"unsupported model type {type(model).__name__}")
    part -= part.max(axis=1, keepdims=True)
    w = np.exp(part)
    return w / w.sum(axis=1, keepdims=True)


def sample_glauber(model, n: int, burn_in: int, thinning: int, seed,
                   chains: int = 1) -> SampleSet:
    """Heat-bath chain over full sweeps; records every `thinning`-th sweep.

    With chains > 1, independent chains run in lockstep and their records are
    interleaved (recorded in provenance); the default single chain matches
    the textbook sampler.
    """
    if burn_in < 1 or thinning < 1:
        raise ValueError("burn_in and thinning must be >= 1")
    if n <= 0:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    state = rng.integers(0, model.p, size=(chains, model.q))
    records = []
    per_chain = -(-n // chains)
    sweeps = burn_in + per_chain * thinning
    for sweep in range(sweeps):
        for u in range(1, model.q + 1):
            probs = conditional_batch(model, state, u)
            draws = (probs.cumsum(axis=1) < rng.random((chains, 1))).sum(axis=1)
            state[:, u - 1] = draws
        if sweep >= burn_in and (sweep - burn_in) % thinning == 0:
            records.append(state.copy())
    rows = np.concatenate(records, axis=0)[:n]
    return SampleSet(
        model.q, model.p, rows,
        provenance=f"glauber seed={seed} burn_in={burn_in} thinning={thinning} chains={chains}",
    )


_MODEL_TAG = "sitediff-model v1"


def save_model(path, model) -> None:
    """Versioned text serialization: kind, sizes, edges, fields."""
    path = Path(path)
    kind = "ising" if isinstance(model, IsingModel) else "potts"
    lines = [_MODEL_TAG, f"type {kind}", f"q {model.q}", f"p {model.p}",
             f"edges {len(model.edges)}"]
    lines += [f"{i} {j} {float(c)!r}" for i, j, c in model.edges]
    lines.append("fields")
    if kind == "ising":
        lines.append(" ".join(repr(float(v)) for v in model.h))
    else:
        lines += [" ".join(repr(float(v)) for v in row) for row in model.h]
    path.write_text("\n".join(lines) + "\n")


def load_model(path):
    path = Path(path)
    lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
    if lines[0] != _MODEL_TAG:
        raise ValueError(f"unrecognized model file tag: {lines[0]!r}")
    kind = lines[1].split()[1]
    q = int(lines[2].split()[1])
    p = int(lines[3].split()[1])
    n_edges = int(lines[4].split()[1])
    edges = []
    for ln in lines[5:5 + n_edges]:
        i, j, c = ln.split()
        edges.append((int(i), int(j), float(c)))
    body = lines[5 + n_edges:]
    if body[0] != "fields":
        raise ValueError("malformed model file: missing fields section")
    if kind == "ising":
        h = np.array([float(tok) for tok in body[1].split()])
        return IsingModel(q, tuple(edges), h)
    h = np.array([[float(tok) for tok in row.split()] for row in body[1:1 + q]])
    return PottsModel(q, p, tuple(edges), h)
