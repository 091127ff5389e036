"""Screening estimator for time-indexed single-site conditionals.

A single MLP (or one per step) maps (time, coordinate, context) to a length-p
partial-energy vector.  Projecting the output onto the centered indicator
embedding phi gives energies that sum to zero over the alphabet, and the
exponential screening loss mean(exp(-<phi(sigma_u), NN(...)>)) drives them
toward the log-conditionals of the noised data law; a softmax over the
projected energies recovers the conditional itself.

Everything is plain numpy in float64: forward pass, reverse-mode gradients
(checked against central finite differences in the test suite), and Adam
with decoupled weight decay.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .core import SampleSet
from .forward import NoiseSchedule, noise_step_batch
from .reverse import ConditionalOracle

LN_EPS = 1e-5

DEPTH_CHOICES = (1, 2, 3, 4, 5)
WIDTH_CHOICES = (64, 128, 256, 512)
BATCH_CHOICES = (64, 128, 256, 512)
LR_RANGE = (1e-4, 5e-2)
WEIGHT_DECAY_RANGE = (1e-8, 1e-3)
TOPOLOGIES = ("global", "per-step")


def phi(r: int, p: int) -> np.ndarray:
    """Centered indicator embedding: 1 - 1/p at entry r, -1/p elsewhere."""
    if not 0 <= r < p:
        raise ValueError(f"symbol {r} out of range [0, {p})")
    vec = np.full(p, -1.0 / p)
    vec[r] += 1.0
    return vec


def phi_matrix(p: int) -> np.ndarray:
    """All embeddings stacked: row r is phi(r, p)."""
    return np.eye(p) - 1.0 / p


def context_dim(q: int, p: int) -> int:
    return q - 1 if p == 2 else (q - 1) * p


def input_dim(q: int, p: int) -> int:
    """Feature length: scalar time + one-hot coordinate + encoded context."""
    return 1 + q + context_dim(q, p)


def encode_input(n: int, u: int, context, schedule: NoiseSchedule) -> np.ndarray:
    """Feature vector for a single (step, coordinate, context) query."""
    context = np.asarray(context, dtype=np.int64)
    if context.shape != (schedule.q - 1,):
        raise ValueError(f"context must have length {schedule.q - 1}")
    return _features(np.array([n]), np.array([u]), context[None, :], schedule)[0]


def _features(ns: np.ndarray, us: np.ndarray, contexts: np.ndarray,
              schedule: NoiseSchedule) -> np.ndarray:
    """Batch features from already-extracted contexts (B, q-1)."""
    B = contexts.shape[0]
    t = ns / schedule.T if schedule.T > 0 else np.zeros_like(ns, dtype=float)
    onehot = np.zeros((B, schedule.q))
    onehot[np.arange(B), us - 1] = 1.0
    if schedule.p == 2:
        ctx = 2.0 * contexts - 1.0
    else:
        ctx = phi_matrix(schedule.p)[contexts].reshape(B, -1)
    return np.concatenate([np.asarray(t, dtype=float)[:, None], onehot, ctx], axis=1)


def _features_from_rows(ns: np.ndarray, us: np.ndarray, rows: np.ndarray,
                        schedule: NoiseSchedule) -> np.ndarray:
    """Batch features from full rows; drops each row's own coordinate u."""
    B, q = rows.shape
    keep = np.arange(q)[None, :] != (us - 1)[:, None]
    contexts = rows[keep].reshape(B, q - 1)
    return _features(ns, us, contexts, schedule)


@dataclass
class MLPParams:
    """Parameters of one network: D blocks of linear+norm, then a linear head."""

    weights: list
    biases: list
    gains: list
    shifts: list
    out_weight: np.ndarray
    out_bias: np.ndarray

    @property
    def depth(self) -> int:
        return len(self.weights)

    @property
    def d_in(self) -> int:
        return self.weights[0].shape[0]

    @property
    def width(self) -> int:
        return self.weights[0].shape[1]

    @property
    def p_out(self) -> int:
        return self.out_weight.shape[1]

    def named_arrays(self):
        out = []
        for i in range(self.depth):
            out += [(f"block{i}.weight", self.weights[i]),
                    (f"block{i}.bias", self.biases[i]),
                    (f"block{i}.gain", self.gains[i]),
                    (f"block{i}.shift", self.shifts[i])]
        out += [("out.weight", self.out_weight), ("out.bias", self.out_bias)]
        return out

    def arrays(self):
        return [arr for _, arr in self.named_arrays()]

    def zeros_like(self) -> "MLPParams":
        return MLPParams(
            [np.zeros_like(w) for w in self.weights],
            [np.zeros_like(b) for b in self.biases],
            [np.zeros_like(g) for g in self.gains],
            [np.zeros_like(s) for s in self.shifts],
            np.zeros_like(self.out_weight),
            np.zeros_like(self.out_bias),
        )

    def copy(self) -> "MLPParams":
        return MLPParams(
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            [g.copy() for g in self.gains],
            [s.copy() for s in self.shifts],
            self.out_weight.copy(),
            self.out_bias.copy(),
        )


def init_mlp(d_in: int, width: int, depth: int, p_out: int,
             rng: np.random.Generator) -> MLPParams:
    """Uniform fan-in initialization; unit gains, zero shifts."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    weights, biases, gains, shifts = [], [], [], []
    fan = d_in
    for _ in range(depth):
        bound = 1.0 / math.sqrt(fan)
        weights.append(rng.uniform(-bound, bound, size=(fan, width)))
        biases.append(rng.uniform(-bound, bound, size=width))
        gains.append(np.ones(width))
        shifts.append(np.zeros(width))
        fan = width
    bound = 1.0 / math.sqrt(fan)
    out_weight = rng.uniform(-bound, bound, size=(fan, p_out))
    out_bias = rng.uniform(-bound, bound, size=p_out)
    return MLPParams(weights, biases, gains, shifts, out_weight, out_bias)


def _forward_cached(params: MLPParams, x: np.ndarray):
    caches = []
    h = x
    for W, b, g, s in zip(params.weights, params.biases, params.gains, params.shifts):
        z = h @ W + b
        centered = z - z.mean(axis=1, keepdims=True)
        inv = 1.0 / np.sqrt((centered ** 2).mean(axis=1, keepdims=True) + LN_EPS)
        xhat = centered * inv
        ln = xhat * g + s
        sig = 1.0 / (1.0 + np.exp(-ln))
        caches.append((h, xhat, inv, ln, sig))
        h = ln * sig
    y = h @ params.out_weight + params.out_bias
    return y, (caches, h)


def _backward(params: MLPParams, cache, d_y: np.ndarray) -> MLPParams:
    caches, last_act = cache
    grads = params.zeros_like()
    grads.out_weight[...] = last_act.T @ d_y
    grads.out_bias[...] = d_y.sum(axis=0)
    dh = d_y @ params.out_weight.T
    for i in reversed(range(params.depth)):
        h_in, xhat, inv, ln, sig = caches[i]
        d_ln = dh * (sig * (1.0 + ln * (1.0 - sig)))
        grads.gains[i][...] = (d_ln * xhat).sum(axis=0)
        grads.shifts[i][...] = d_ln.sum(axis=0)
        d_xhat = d_ln * params.gains[i]
        m1 = d_xhat.mean(axis=1, keepdims=True)
        m2 = (d_xhat * xhat).mean(axis=1, keepdims=True)
        dz = inv * (d_xhat - m1 - xhat * m2)
        grads.weights[i][...] = h_in.T @ dz
        grads.biases[i][...] = dz.sum(axis=0)
        dh = dz @ params.weights[i].T
    return grads


def mlp_forward(params: MLPParams, x: np.ndarray) -> np.ndarray:
    """Network output; accepts a single feature vector or a (B, d_in) batch."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[1] != params.d_in:
        raise ValueError(f"expected {params.d_in} features, got {x.shape[1]}")
    y, _ = _forward_cached(params, x)
    return y[0] if single else y


@dataclass
class TrainConfig:
    """Optimizer and architecture settings for one training run.

    The tuple constants above are the random-search ranges; direct
    construction allows scaled-down values for tests.
    """

    depth: int = 2
    width: int = 64
    learning_rate: float = 3e-3
    weight_decay: float = 1e-6
    batch_size: int = 256
    epochs: int = 4
    seed: int = 0
    topology: str = "global"
    train_all_coordinates: bool = False

    def __post_init__(self):
        if self.depth not in DEPTH_CHOICES:
            raise ValueError(f"depth must be in {DEPTH_CHOICES}")
        if self.width < 1 or self.batch_size < 1 or self.epochs < 1:
            raise ValueError("width, batch_size and epochs must be positive")
        if self.learning_rate <= 0 or self.weight_decay < 0:
            raise ValueError("learning_rate must be > 0 and weight_decay >= 0")
        if self.topology not in TOPOLOGIES:
            raise ValueError(f"topology must be one of {TOPOLOGIES}")


class ConditionalModel(ConditionalOracle):
    """Learned conditional oracle: one shared network or one per step.

    Batch inference runs the forward pass in float32 for speed (training and
    gradients stay float64); the softmax is renormalized in float64, so rows
    still sum to 1 at full precision.
    """

    def __init__(self, schedule: NoiseSchedule, topology: str, nets: list):
        if topology not in TOPOLOGIES:
            raise ValueError(f"topology must be one of {TOPOLOGIES}")
        expected = 1 if topology == "global" else schedule.T
        if len(nets) != expected:
            raise ValueError(f"{topology} topology needs {expected} nets, got {len(nets)}")
        self.schedule = schedule
        self.topology = topology
        self.nets = nets
        self.q, self.p, self.T = schedule.q, schedule.p, schedule.T
        self._f32_cache = {}

    def net_for(self, n: int) -> MLPParams:
        return self.nets[0] if self.topology == "global" else self.nets[n]

    def _net_f32(self, n: int) -> MLPParams:
        """Float32 copy for inference; invalidated by refresh_inference_cache."""
        key = 0 if self.topology == "global" else n
        if key not in self._f32_cache:
            net = self.nets[key]
            self._f32_cache[key] = MLPParams(
                [w.astype(np.float32) for w in net.weights],
                [b.astype(np.float32) for b in net.biases],
                [g.astype(np.float32) for g in net.gains],
                [s.astype(np.float32) for s in net.shifts],
                net.out_weight.astype(np.float32),
                net.out_bias.astype(np.float32),
            )
        return self._f32_cache[key]

    def refresh_inference_cache(self) -> None:
        """Drop float32 copies after mutating self.nets in place."""
        self._f32_cache.clear()

    def energies(self, n: int, u: int, contexts: np.ndarray) -> np.ndarray:
        """Centered partial energies <phi(r), NN(...)> for every symbol r."""
        contexts = np.asarray(contexts, dtype=np.int64)
        x = _features(np.full(contexts.shape[0], n), np.full(contexts.shape[0], u),
                      contexts, self.schedule)
        y = mlp_forward(self.net_for(n), x)
        return y - y.mean(axis=1, keepdims=True)

    def conditional(self, n: int, u: int, context) -> np.ndarray:
        context = np.asarray(context, dtype=np.int64)[None, :]
        x = _features(np.array([n]), np.array([u]), context, self.schedule)
        y = mlp_forward(self.net_for(n), x)
        return _softmax64(y.astype(np.float64))[0]

    def conditional_batch(self, n: int, u: int, contexts: np.ndarray) -> np.ndarray:
        contexts = np.asarray(contexts, dtype=np.int64)
        x = _features(np.full(contexts.shape[0], n), np.full(contexts.shape[0], u),
                      contexts, self.schedule).astype(np.float32)
        y, _ = _forward_cached(self._net_f32(n), x)
        return _softmax64(y.astype(np.float64))


def _softmax64(y: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(y)):
        raise FloatingPointError("network produced non-finite energies")
    y = y - y.max(axis=1, keepdims=True)
    w = np.exp(y)
    return w / w.sum(axis=1, keepdims=True)


def _split_batch(batch):
    """Normalize a batch of (n, u, config) items into index/row arrays."""
    if isinstance(batch, tuple) and len(batch) == 3 and np.asarray(batch[0]).ndim == 1:
        ns, us, rows = batch
        return (np.asarray(ns, dtype=np.int64), np.asarray(us, dtype=np.int64),
                np.asarray(rows, dtype=np.int64))
    ns, us, rows = [], [], []
    for n, u, config in batch:
        ns.append(n)
        us.append(u)
        rows.append(np.asarray(config, dtype=np.int64))
    if not ns:
        raise ValueError("empty batch")
    return np.asarray(ns, dtype=np.int64), np.asarray(us, dtype=np.int64), np.stack(rows)


def _group_slices(model: ConditionalModel, ns: np.ndarray):
    """Map each batch item to its network; one group for the global topology."""
    if model.topology == "global":
        return {0: np.arange(ns.size)}
    return {int(n): np.flatnonzero(ns == n) for n in np.unique(ns)}


def neurise_loss(model: ConditionalModel, batch) -> float:
    """Mean over the batch of exp(-<phi(target symbol), network output>)."""
    ns, us, rows = _split_batch(batch)
    total = 0.0
    for net_idx, sel in _group_slices(model, ns).items():
        net = model.nets[net_idx]
        x = _features_from_rows(ns[sel], us[sel], rows[sel], model.schedule)
        y, _ = _forward_cached(net, x)
        targets = rows[sel, us[sel] - 1]
        proj = y[np.arange(sel.size), targets] - y.mean(axis=1)
        total += np.exp(-proj).sum()
    return float(total / ns.size)


def loss_gradient(model: ConditionalModel, batch, weight_decay: float = 0.0):
    """Gradient of the screening loss (+ 0.5*wd*||theta||^2) for every net.

    Returns a list of MLPParams-shaped gradients congruent to model.nets;
    nets the batch never touches still receive their weight-decay term.
    """
    ns, us, rows = _split_batch(batch)
    _, touched = _step_loss_and_grads(model, ns, us, rows)
    grads = [net.zeros_like() for net in model.nets]
    for net_idx, part in touched.items():
        for acc, g in zip(grads[net_idx].arrays(), part.arrays()):
            acc += g
    if weight_decay:
        for grad, net in zip(grads, model.nets):
            for g, arr in zip(grad.arrays(), net.arrays()):
                g += weight_decay * arr
    return grads


class _AdamState:
    def __init__(self, params: MLPParams):
        self.m = [np.zeros_like(a) for a in params.arrays()]
        self.v = [np.zeros_like(a) for a in params.arrays()]
        self.t = 0

    def update(self, params: MLPParams, grads: MLPParams, lr: float,
               weight_decay: float, betas=(0.9, 0.999), eps: float = 1e-8):
        self.t += 1
        b1, b2 = betas
        c1 = 1.0 - b1 ** self.t
        c2 = 1.0 - b2 ** self.t
        for arr, g, m, v in zip(params.arrays(), grads.arrays(), self.m, self.v):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            arr -= lr * ((m / c1) / (np.sqrt(v / c2) + eps) + weight_decay * arr)


def _noised_snapshots(samples: SampleSet, schedule: NoiseSchedule,
                      rng: np.random.Generator) -> np.ndarray:
    """(T, N, q) stack: row i of slice n is sample i noised n steps."""
    rows = samples.rows.copy()
    dtype = np.int8 if schedule.p <= 127 else np.int32
    out = np.empty((schedule.T, samples.n, schedule.q), dtype=dtype)
    for n in range(schedule.T):
        out[n] = rows
        rows = noise_step_batch(rows, n, schedule, rng)
    return out


def train(samples: SampleSet, schedule: NoiseSchedule, config: TrainConfig,
          rng=None, history: list | None = None) -> ConditionalModel:
    """Fit the conditional model on round-robin-noised data.

    For each step n the training pairs are (n, u(n), row noised n steps);
    with ``train_all_coordinates`` every coordinate is paired at every step.
    Deterministic in the seed; ``history`` (if given) collects per-epoch mean
    training loss.
    """
    if samples.n == 0:
        raise ValueError("empty dataset")
    if (samples.q, samples.p) != (schedule.q, schedule.p):
        raise ValueError("samples and schedule disagree on (q, p)")
    if schedule.T < 1:
        raise ValueError("schedule has no steps to train on")
    rng = np.random.default_rng(config.seed if rng is None else rng)

    snapshots = _noised_snapshots(samples, schedule, rng)
    d_in = input_dim(schedule.q, schedule.p)
    n_nets = 1 if config.topology == "global" else schedule.T
    nets = [init_mlp(d_in, config.width, config.depth, schedule.p, rng)
            for _ in range(n_nets)]
    model = ConditionalModel(schedule, config.topology, nets)
    states = [_AdamState(net) for net in nets]

    T, N = schedule.T, samples.n
    if config.train_all_coordinates:
        pair_steps = np.repeat(np.arange(T), N * schedule.q)
        pair_rows = np.tile(np.repeat(np.arange(N), schedule.q), T)
        pair_us = np.tile(np.arange(1, schedule.q + 1), T * N)
    else:
        pair_steps = np.repeat(np.arange(T), N)
        pair_rows = np.tile(np.arange(N), T)
        pair_us = pair_steps % schedule.q + 1

    n_pairs = pair_steps.size
    batches_per_epoch = -(-n_pairs // config.batch_size)
    total_updates = max(1, config.epochs * batches_per_epoch)
    update = 0
    for epoch in range(config.epochs):
        perm = rng.permutation(n_pairs)
        epoch_loss = 0.0
        for start in range(0, n_pairs, config.batch_size):
            sel = perm[start:start + config.batch_size]
            ns = pair_steps[sel]
            us = pair_us[sel]
            rows = snapshots[ns, pair_rows[sel]].astype(np.int64)
            loss, grads = _step_loss_and_grads(model, ns, us, rows)
            epoch_loss += loss * sel.size
            # cosine decay to zero keeps the final iterates out of the
            # constant-rate noise ball
            lr = config.learning_rate * 0.5 * (
                1.0 + math.cos(math.pi * update / total_updates))
            update += 1
            for net_idx, grad in grads.items():
                states[net_idx].update(nets[net_idx], grad, lr,
                                       config.weight_decay)
        if history is not None:
            history.append(epoch_loss / n_pairs)
    return model


def _step_loss_and_grads(model: ConditionalModel, ns, us, rows):
    """One minibatch: data-term loss and per-touched-net gradients."""
    grads = {}
    total = 0.0
    B = ns.size
    for net_idx, sel in _group_slices(model, ns).items():
        net = model.nets[net_idx]
        x = _features_from_rows(ns[sel], us[sel], rows[sel], model.schedule)
        y, cache = _forward_cached(net, x)
        targets = rows[sel, us[sel] - 1]
        proj = y[np.arange(sel.size), targets] - y.mean(axis=1)
        coef = np.exp(-proj)
        total += coef.sum()
        coef = coef / B
        d_y = np.full_like(y, 1.0 / net.p_out) * coef[:, None]
        d_y[np.arange(sel.size), targets] -= coef
        grads[net_idx] = _backward(net, cache, d_y)
    return total / B, grads


def conditional(model: ConditionalModel, n: int, u: int, context) -> np.ndarray:
    """Module-level alias for the oracle method (softmax of projected energies)."""
    return model.conditional(n, u, context)


@dataclass
class SearchResult:
    config: TrainConfig
    model: ConditionalModel
    schedule: NoiseSchedule
    trials: list = field(default_factory=list)


def random_search(samples: SampleSet, schedule: NoiseSchedule, budget: int,
                  seed: int, include_schedule: bool = False,
                  epochs: int = 4, val_fraction: float = 0.1,
                  max_val_pairs: int = 50_000) -> SearchResult:
    """Random hyperparameter search over the declared ranges.

    Scores each drawn config by the screening loss on a held-out split
    (noised with a fixed derived seed) and returns the best.  With
    ``include_schedule`` the noise level and sweep count are drawn too, in
    which case scores compare different noising problems and are only a
    model-selection heuristic.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    rng = np.random.default_rng(seed)
    n_val = max(1, int(round(val_fraction * samples.n)))
    if samples.n - n_val < 1:
        raise ValueError("not enough samples to hold out a validation split")
    perm = rng.permutation(samples.n)
    train_rows = samples.rows[perm[n_val:]]
    val_rows = samples.rows[perm[:n_val]]
    train_set = SampleSet(samples.q, samples.p, train_rows,
                          provenance=samples.provenance + " [search-train]")

    best = None
    trials = []
    for trial in range(budget):
        config = TrainConfig(
            depth=int(rng.choice(DEPTH_CHOICES)),
            width=int(rng.choice(WIDTH_CHOICES)),
            learning_rate=float(np.exp(rng.uniform(*np.log(LR_RANGE)))),
            weight_decay=float(np.exp(rng.uniform(*np.log(WEIGHT_DECAY_RANGE)))),
            batch_size=int(rng.choice(BATCH_CHOICES)),
            epochs=epochs,
            seed=int(rng.integers(2 ** 31)),
            topology="global",
        )
        trial_schedule = schedule
        if include_schedule:
            trial_schedule = NoiseSchedule.from_sweeps(
                schedule.p, schedule.q, epsilon=float(rng.uniform(0.0, 1.0)),
                sweeps=int(rng.integers(1, 6)))
        model = train(train_set, trial_schedule, config)
        score = _validation_loss(model, val_rows, trial_schedule,
                                 seed=seed + 1, max_pairs=max_val_pairs)
        trials.append({"trial": trial, "score": score, "config": asdict(config),
                       "epsilon": trial_schedule.epsilon, "T": trial_schedule.T})
        if best is None or score < best[0]:
            best = (score, config, model, trial_schedule)
    return SearchResult(best[1], best[2], best[3], trials)


def _validation_loss(model: ConditionalModel, val_rows: np.ndarray,
                     schedule: NoiseSchedule, seed: int, max_pairs: int) -> float:
    rng = np.random.default_rng(seed)
    val_set = SampleSet(schedule.q, schedule.p, val_rows)
    snapshots = _noised_snapshots(val_set, schedule, rng)
    T, N = schedule.T, val_rows.shape[0]
    ns = np.repeat(np.arange(T), N)
    rows_idx = np.tile(np.arange(N), T)
    if ns.size > max_pairs:
        sel = rng.choice(ns.size, size=max_pairs, replace=False)
        ns, rows_idx = ns[sel], rows_idx[sel]
    us = ns % schedule.q + 1
    rows = snapshots[ns, rows_idx].astype(np.int64)
    return neurise_loss(model, (ns, us, rows))


CHECKPOINT_TAG = "sitediff-checkpoint v1"


def data_fingerprint(samples: SampleSet) -> str:
    digest = hashlib.sha256()
    digest.update(f"q={samples.q} p={samples.p} n={samples.n}".encode())
    digest.update(np.ascontiguousarray(samples.rows, dtype="<i8").tobytes())
    return digest.hexdigest()


def save_checkpoint(path, model: ConditionalModel, train_config: TrainConfig | None = None,
                    extra: dict | None = None) -> None:
    """Single-file checkpoint: JSON metadata + little-endian float64 arrays."""
    meta = {
        "format": CHECKPOINT_TAG,
        "schedule": {"p": model.schedule.p, "q": model.schedule.q,
                     "T": model.schedule.T, "epsilon": model.schedule.epsilon},
        "topology": model.topology,
        "n_nets": len(model.nets),
        "depth": model.nets[0].depth,
        "train_config": asdict(train_config) if train_config else None,
        "extra": extra or {},
    }
    arrays = {}
    for k, net in enumerate(model.nets):
        for name, arr in net.named_arrays():
            arrays[f"net{k}:{name}"] = np.ascontiguousarray(arr, dtype="<f8")
    path = Path(path)
    with path.open("wb") as fh:
        np.savez(fh, __meta__=np.frombuffer(
            json.dumps(meta).encode(), dtype=np.uint8), **arrays)


def load_checkpoint(path):
    """Returns (ConditionalModel, metadata dict)."""
    with np.load(Path(path)) as data:
        meta = json.loads(bytes(data["__meta__"]).decode())
        if meta.get("format") != CHECKPOINT_TAG:
            raise ValueError(f"unrecognized checkpoint format: {meta.get('format')!r}")
        sched = NoiseSchedule(**meta["schedule"])
        nets = []
        for k in range(meta["n_nets"]):
            depth = meta["depth"]
            nets.append(MLPParams(
                [data[f"net{k}:block{i}.weight"].astype(np.float64) for i in range(depth)],
                [data[f"net{k}:block{i}.bias"].astype(np.float64) for i in range(depth)],
                [data[f"net{k}:block{i}.gain"].astype(np.float64) for i in range(depth)],
                [data[f"net{k}:block{i}.shift"].astype(np.float64) for i in range(depth)],
                data[f"net{k}:out.weight"].astype(np.float64),
                data[f"net{k}:out.bias"].astype(np.float64),
            ))
    return ConditionalModel(sched, meta["topology"], nets), meta
