import math

import numpy as np
import pytest

from sitediff.core import SampleSet
from sitediff.forward import NoiseSchedule
from sitediff.models import IsingModel, exact_conditional, exact_distribution, sample_exact
from sitediff.neurise import (
    ConditionalModel,
    TrainConfig,
    _noised_snapshots,
    data_fingerprint,
    encode_input,
    init_mlp,
    input_dim,
    load_checkpoint,
    loss_gradient,
    mlp_forward,
    neurise_loss,
    phi,
    phi_matrix,
    random_search,
    save_checkpoint,
    train,
)


def make_model(q=3, p=2, T=4, eps=0.4, depth=2, width=8, topology="global", seed=0):
    rng = np.random.default_rng(seed)
    sched = NoiseSchedule(p, q, T, eps)
    n_nets = 1 if topology == "global" else T
    nets = [init_mlp(input_dim(q, p), width, depth, p, rng) for _ in range(n_nets)]
    return ConditionalModel(sched, topology, nets)


def random_batch(model, size, seed=0):
    rng = np.random.default_rng(seed)
    ns = rng.integers(0, model.T, size)
    us = ns % model.q + 1
    rows = rng.integers(0, model.p, (size, model.q))
    return ns, us, rows


class TestPhi:
    def test_binary_values(self):
        np.testing.assert_allclose(phi(0, 2), [0.5, -0.5])
        np.testing.assert_allclose(phi(1, 2), [-0.5, 0.5])

    @pytest.mark.parametrize("p", [2, 3, 5, 8])
    def test_centered(self, p):
        for r in range(p):
            assert abs(phi(r, p).sum()) < 1e-15

    def test_indicator_difference(self):
        # <phi(r), e_r> - <phi(r'), e_r> = 1 for r' != r
        for p in (2, 4):
            for r in range(p):
                for rp in range(p):
                    if rp == r:
                        continue
                    assert phi(r, p)[r] - phi(rp, p)[r] == pytest.approx(1.0)

    def test_matrix_rows(self):
        m = phi_matrix(4)
        for r in range(4):
            np.testing.assert_allclose(m[r], phi(r, 4))

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            phi(3, 3)


class TestEncodeInput:
    def test_binary_example(self):
        sched = NoiseSchedule(2, 3, 8, 0.5)
        x = encode_input(2, 2, [0, 1], sched)
        np.testing.assert_allclose(x, [0.25, 0.0, 1.0, 0.0, -1.0, 1.0])

    def test_time_feature_boundaries(self):
        sched = NoiseSchedule(2, 2, 10, 0.5)
        assert encode_input(0, 1, [1], sched)[0] == 0.0
        assert encode_input(10, 1, [1], sched)[0] == 1.0

    def test_multialphabet_uses_phi_blocks(self):
        sched = NoiseSchedule(3, 2, 6, 0.5)
        x = encode_input(0, 1, [2], sched)
        assert x.shape == (1 + 2 + 3,)
        np.testing.assert_allclose(x[3:], phi(2, 3))

    def test_dimension(self):
        assert input_dim(3, 2) == 1 + 3 + 2
        assert input_dim(3, 4) == 1 + 3 + 8
        assert input_dim(1, 2) == 1 + 1 + 0


class TestMLPForward:
    def test_zero_params_zero_output(self):
        params = init_mlp(4, 8, 2, 3, np.random.default_rng(0))
        for arr in params.arrays():
            arr[...] = 0.0
        np.testing.assert_array_equal(mlp_forward(params, np.ones(4)), np.zeros(3))

    def test_output_layer_linearity(self):
        params = init_mlp(4, 8, 2, 3, np.random.default_rng(1))
        x = np.random.default_rng(2).normal(size=4)
        y = mlp_forward(params, x)
        params.out_weight *= 2.0
        params.out_bias *= 2.0
        np.testing.assert_allclose(mlp_forward(params, x), 2.0 * y, atol=1e-12)

    def test_matches_scalar_reference(self):
        # independent re-implementation with explicit loops
        rng = np.random.default_rng(3)
        params = init_mlp(5, 4, 2, 2, rng)
        x = rng.normal(size=5)

        def reference(params, x):
            h = list(x)
            for W, b, g, s in zip(params.weights, params.biases,
                                  params.gains, params.shifts):
                z = [sum(h[i] * W[i, j] for i in range(len(h))) + b[j]
                     for j in range(W.shape[1])]
                mean = sum(z) / len(z)
                var = sum((v - mean) ** 2 for v in z) / len(z)
                ln = [g[j] * (z[j] - mean) / math.sqrt(var + 1e-5) + s[j]
                      for j in range(len(z))]
                h = [v / (1.0 + math.exp(-v)) for v in ln]
            return [sum(h[i] * params.out_weight[i, j] for i in range(len(h)))
                    + params.out_bias[j] for j in range(params.out_weight.shape[1])]

        np.testing.assert_allclose(mlp_forward(params, x), reference(params, x),
                                   atol=1e-12)

    def test_shape_mismatch(self):
        params = init_mlp(4, 8, 1, 2, np.random.default_rng(4))
        with pytest.raises(ValueError):
            mlp_forward(params, np.ones(5))

    def test_batch_matches_single(self):
        rng = np.random.default_rng(5)
        params = init_mlp(6, 8, 3, 4, rng)
        xs = rng.normal(size=(7, 6))
        batch = mlp_forward(params, xs)
        for k in range(7):
            np.testing.assert_allclose(batch[k], mlp_forward(params, xs[k]))


class TestLoss:
    def test_zero_network_gives_unit_loss(self):
        model = make_model()
        for net in model.nets:
            for arr in net.arrays():
                arr[...] = 0.0
        batch = random_batch(model, 16, seed=6)
        assert neurise_loss(model, batch) == pytest.approx(1.0)

    def test_loss_decreases_along_target_direction(self):
        model = make_model(depth=1, width=4)
        batch = random_batch(model, 8, seed=7)
        base = neurise_loss(model, batch)
        # push outputs along +phi(target) via the output bias for each class:
        # raising all energies equally does nothing, so raise one symbol
        model.nets[0].out_bias[...] = 0.0
        loss0 = neurise_loss(model, batch)
        model.nets[0].out_bias[...] = 0.0
        model.nets[0].out_bias[1] += 5.0
        ns, us, rows = batch
        only_ones = rows[np.arange(len(ns)), us - 1] == 1
        if only_ones.all():
            assert neurise_loss(model, batch) < loss0
        del base

    def test_hand_computed_two_sample_batch(self):
        sched = NoiseSchedule(2, 2, 2, 0.5)
        params = init_mlp(input_dim(2, 2), 3, 1, 2, np.random.default_rng(8))
        model = ConditionalModel(sched, "global", [params])
        batch = (np.array([0, 1]), np.array([1, 2]),
                 np.array([[0, 1], [1, 1]]))
        # independent recomputation from mlp_forward outputs
        expect = 0.0
        for n, u, row in zip(*batch):
            x = encode_input(n, u, np.delete(row, u - 1), sched)
            y = mlp_forward(params, x)
            expect += math.exp(-(y[row[u - 1]] - y.mean()))
        expect /= 2.0
        assert neurise_loss(model, batch) == pytest.approx(expect, abs=1e-12)

    def test_empty_batch_rejected(self):
        model = make_model()
        with pytest.raises(ValueError):
            neurise_loss(model, [])

    def test_accepts_tuple_and_list_forms(self):
        model = make_model()
        ns, us, rows = random_batch(model, 5, seed=9)
        as_list = [(int(n), int(u), row) for n, u, row in zip(ns, us, rows)]
        assert neurise_loss(model, (ns, us, rows)) == pytest.approx(
            neurise_loss(model, as_list))


def finite_difference_check(model, batch, weight_decay, step=1e-4):
    """Max relative error per parameter group, via central differences."""

    def objective():
        loss = neurise_loss(model, batch)
        if weight_decay:
            loss += 0.5 * weight_decay * sum(
                float((a * a).sum()) for net in model.nets for a in net.arrays())
        return loss

    grads = loss_gradient(model, batch, weight_decay=weight_decay)
    worst = 0.0
    for net, grad in zip(model.nets, grads):
        for (_, arr), (_, garr) in zip(net.named_arrays(), grad.named_arrays()):
            fd = np.zeros_like(arr)
            it = np.nditer(arr, flags=["multi_index"])
            for _ in it:
                ix = it.multi_index
                orig = arr[ix]
                arr[ix] = orig + step
                up = objective()
                arr[ix] = orig - step
                down = objective()
                arr[ix] = orig
                fd[ix] = (up - down) / (2 * step)
            scale = max(np.abs(fd).max(), 1e-12)
            worst = max(worst, float(np.abs(garr - fd).max() / scale))
    return worst


class TestGradient:
    @pytest.mark.parametrize("topology", ["global", "per-step"])
    def test_matches_finite_differences(self, topology):
        # the 1e-4 limit is the central-difference truncation budget at step 1e-4
        model = make_model(depth=2, width=4, topology=topology, seed=10)
        batch = random_batch(model, 6, seed=11)
        assert finite_difference_check(model, batch, weight_decay=1e-3) < 1e-4

    def test_weight_decay_term_alone(self):
        model = make_model(depth=1, width=4, seed=12)
        batch = random_batch(model, 4, seed=13)
        wd = 0.01
        with_wd = loss_gradient(model, batch, weight_decay=wd)
        without = loss_gradient(model, batch, weight_decay=0.0)
        for net, g1, g0 in zip(model.nets, with_wd, without):
            for arr, a1, a0 in zip(net.arrays(), g1.arrays(), g0.arrays()):
                np.testing.assert_allclose(a1 - a0, wd * arr, atol=1e-12)

    def test_untouched_per_step_net_gets_only_decay(self):
        model = make_model(T=3, topology="per-step", seed=14)
        ns = np.array([0, 0])
        us = ns % model.q + 1
        rows = np.zeros((2, model.q), dtype=int)
        grads = loss_gradient(model, (ns, us, rows), weight_decay=0.5)
        for arr, g in zip(model.nets[2].arrays(), grads[2].arrays()):
            np.testing.assert_allclose(g, 0.5 * arr)


class TestConditionalOutputs:
    def test_zero_network_uniform(self):
        model = make_model(p=2)
        for net in model.nets:
            for arr in net.arrays():
                arr[...] = 0.0
        model.refresh_inference_cache()
        np.testing.assert_allclose(model.conditional(0, 1, [0, 1]), 0.5)

    def test_rows_are_distributions(self):
        model = make_model(q=4, p=3, T=8, depth=3, width=8, seed=15)
        contexts = np.random.default_rng(16).integers(0, 3, (50, 3))
        cond = model.conditional_batch(2, 3, contexts)
        assert np.all(cond >= 0)
        np.testing.assert_allclose(cond.sum(axis=1), 1.0, atol=1e-9)

    def test_softmax_ratio_identity(self):
        model = make_model(q=3, p=4, seed=17)
        context = np.array([1, 3])
        energies = model.energies(1, 2, context[None, :])[0]
        cond = model.conditional(1, 2, context)
        for r in range(4):
            for rp in range(4):
                ratio = math.exp(energies[rp] - energies[r])
                assert cond[rp] / cond[r] == pytest.approx(ratio, rel=1e-6)

    def test_energies_centered(self):
        model = make_model(q=3, p=5, seed=18)
        contexts = np.random.default_rng(19).integers(0, 5, (20, 2))
        energies = model.energies(0, 1, contexts)
        np.testing.assert_allclose(energies.sum(axis=1), 0.0, atol=1e-12)

    def test_topologies_share_contract(self):
        for topology in ("global", "per-step"):
            model = make_model(topology=topology, seed=20)
            cond = model.conditional(1, 2, [0, 1])
            assert cond.shape == (2,)
            assert abs(cond.sum() - 1.0) < 1e-9


class TestTraining:
    def test_eps_one_trains_on_clean_data(self):
        rows = np.array([[0, 1], [1, 0], [1, 1]])
        samples = SampleSet(2, 2, rows)
        sched = NoiseSchedule(2, 2, 4, 1.0)
        snaps = _noised_snapshots(samples, sched, np.random.default_rng(0))
        for n in range(4):
            np.testing.assert_array_equal(snaps[n], rows)

    def test_descent_sanity(self):
        dist = exact_distribution(IsingModel(3, ((1, 2, 0.8),), np.array([0.3, -0.2, 0.1])))
        samples = sample_exact(dist, 2000, seed=23)
        sched = NoiseSchedule(2, 3, 4, 0.4)
        cfg = TrainConfig(depth=2, width=8, epochs=3, batch_size=64,
                          learning_rate=3e-3, seed=24)
        trained = train(samples, sched, cfg)
        # held-out batch from the same pair distribution: fresh rows, noised,
        # paired with the round-robin coordinate of each step
        held_rows = sample_exact(dist, 200, seed=25)
        snaps = _noised_snapshots(held_rows, sched, np.random.default_rng(26))
        ns = np.repeat(np.arange(sched.T), 200)
        us = ns % 3 + 1
        rows = snaps[ns, np.tile(np.arange(200), sched.T)].astype(np.int64)
        held_out = (ns, us, rows)
        fresh = ConditionalModel(sched, "global",
                                 [init_mlp(input_dim(3, 2), 8, 2, 2,
                                           np.random.default_rng(24))])
        assert neurise_loss(trained, held_out) <= neurise_loss(fresh, held_out)

    def test_single_site_closed_form(self):
        h = 0.3
        dist = exact_distribution(IsingModel(1, (), np.array([h])))
        samples = sample_exact(dist, 100_000, seed=26)
        sched = NoiseSchedule.from_sweeps(2, 1, epsilon=0.5, sweeps=2)
        cfg = TrainConfig(depth=1, width=16, learning_rate=5e-3, epochs=2,
                          batch_size=256, seed=27)
        model = train(samples, sched, cfg)
        target = math.exp(h) / (math.exp(h) + math.exp(-h))
        learned = model.conditional(0, 1, np.zeros(0, dtype=int))[1]
        assert abs(learned - target) < 0.01

    def test_independent_sites_conditionals(self):
        fields = np.array([0.5, -0.3, 0.2])
        model_true = IsingModel(3, (), fields)
        dist = exact_distribution(model_true)
        samples = sample_exact(dist, 100_000, seed=28)
        sched = NoiseSchedule.from_sweeps(2, 3, epsilon=0.5, sweeps=2)
        cfg = TrainConfig(depth=2, width=16, learning_rate=4e-3, epochs=1,
                          batch_size=256, seed=29)
        learned = train(samples, sched, cfg)
        rng = np.random.default_rng(30)
        for u in (1, 2, 3):
            context = rng.integers(0, 2, 2)
            truth = exact_conditional(model_true, np.insert(context, u - 1, 0), u)
            got = learned.conditional(u - 1, u, context)
            assert 0.5 * np.abs(got - truth).sum() < 0.02

    def test_deterministic_in_seed(self):
        dist = exact_distribution(IsingModel(2, ((1, 2, 1.0),), np.zeros(2)))
        samples = sample_exact(dist, 500, seed=31)
        sched = NoiseSchedule(2, 2, 4, 0.5)
        cfg = TrainConfig(depth=1, width=8, epochs=2, batch_size=64, seed=32)
        a = train(samples, sched, cfg)
        b = train(samples, sched, cfg)
        for na, nb in zip(a.nets, b.nets):
            for x, y in zip(na.arrays(), nb.arrays()):
                np.testing.assert_array_equal(x, y)

    def test_per_step_topology_trains(self):
        dist = exact_distribution(IsingModel(2, ((1, 2, 0.5),), np.zeros(2)))
        samples = sample_exact(dist, 1000, seed=33)
        sched = NoiseSchedule(2, 2, 4, 0.5)
        cfg = TrainConfig(depth=1, width=8, epochs=2, batch_size=64, seed=34,
                          topology="per-step")
        model = train(samples, sched, cfg)
        assert len(model.nets) == 4
        history = []
        train(samples, sched, cfg, history=history)
        assert len(history) == 2 and history[-1] <= history[0] + 0.1

    def test_empty_dataset_rejected(self):
        samples = SampleSet(2, 2, np.zeros((0, 2), dtype=int))
        sched = NoiseSchedule(2, 2, 4, 0.5)
        with pytest.raises(ValueError):
            train(samples, sched, TrainConfig())


class TestTrainConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            TrainConfig(depth=0)
        with pytest.raises(ValueError):
            TrainConfig(topology="wide")
        with pytest.raises(ValueError):
            TrainConfig(learning_rate=0.0)


class TestRandomSearch:
    def _samples(self):
        dist = exact_distribution(IsingModel(2, ((1, 2, 0.8),), np.zeros(2)))
        return sample_exact(dist, 400, seed=35)

    def test_budget_one_returns_single_config(self):
        sched = NoiseSchedule(2, 2, 4, 0.5)
        result = random_search(self._samples(), sched, budget=1, seed=36, epochs=1)
        assert len(result.trials) == 1
        assert result.trials[0]["score"] == min(t["score"] for t in result.trials)

    def test_deterministic_in_seed(self):
        sched = NoiseSchedule(2, 2, 4, 0.5)
        a = random_search(self._samples(), sched, budget=2, seed=37, epochs=1)
        b = random_search(self._samples(), sched, budget=2, seed=37, epochs=1)
        assert [t["score"] for t in a.trials] == [t["score"] for t in b.trials]
        assert a.config == b.config

    def test_best_no_worse_than_median(self):
        sched = NoiseSchedule(2, 2, 4, 0.5)
        result = random_search(self._samples(), sched, budget=3, seed=38, epochs=1)
        scores = [t["score"] for t in result.trials]
        assert min(scores) <= np.median(scores)

    def test_include_schedule_draws_noise_settings(self):
        sched = NoiseSchedule(2, 2, 4, 0.5)
        result = random_search(self._samples(), sched, budget=2, seed=39,
                               include_schedule=True, epochs=1)
        assert result.schedule.T % 2 == 0


class TestCheckpoint:
    def test_round_trip(self, tmp_path):
        model = make_model(q=3, p=3, T=4, depth=2, width=8, seed=40)
        cfg = TrainConfig(width=8)
        path = tmp_path / "model.npz"
        save_checkpoint(path, model, cfg, extra={"train_seed": 7})
        loaded, meta = load_checkpoint(path)
        assert meta["extra"]["train_seed"] == 7
        assert meta["train_config"]["width"] == 8
        assert loaded.schedule == model.schedule
        ctx = np.array([1, 2])
        np.testing.assert_allclose(loaded.conditional(1, 2, ctx),
                                   model.conditional(1, 2, ctx), atol=1e-12)

    def test_per_step_round_trip(self, tmp_path):
        model = make_model(T=3, topology="per-step", seed=41)
        path = tmp_path / "model.npz"
        save_checkpoint(path, model)
        loaded, _ = load_checkpoint(path)
        assert len(loaded.nets) == 3

    def test_arrays_little_endian(self, tmp_path):
        model = make_model(seed=42)
        path = tmp_path / "model.npz"
        save_checkpoint(path, model)
        with np.load(path) as data:
            key = [k for k in data.files if k.endswith("out.weight")][0]
            assert data[key].dtype.str == "<f8"

    def test_bad_format_rejected(self, tmp_path):
        path = tmp_path / "bad.npz"
        np.savez(path, __meta__=np.frombuffer(b'{"format": "x"}', dtype=np.uint8))
        with pytest.raises(ValueError):
            load_checkpoint(path)

    def test_fingerprint_tracks_data(self):
        a = SampleSet(2, 2, np.array([[0, 1]]))
        b = SampleSet(2, 2, np.array([[1, 1]]))
        assert data_fingerprint(a) != data_fingerprint(b)
        assert data_fingerprint(a) == data_fingerprint(SampleSet(2, 2, np.array([[0, 1]])))
