import numpy as np
import pytest

from sitediff.core import all_configurations, empirical_from_samples, encode_config
from sitediff.models import (
    EAParams,
    IsingModel,
    PottsModel,
    conditional_batch,
    ea_ising,
    ea_potts,
    energy,
    energy_batch,
    exact_conditional,
    exact_distribution,
    load_model,
    periodic_lattice_slots,
    sample_exact,
    sample_glauber,
    save_model,
)


def random_ising(q, rng, scale=1.0):
    edges = [(i, j, scale * rng.normal()) for i in range(1, q + 1)
             for j in range(i + 1, q + 1) if rng.random() < 0.7]
    return IsingModel(q, tuple(edges), scale * rng.normal(size=q))


def random_potts(q, p, rng, scale=1.0):
    edges = [(i, j, scale * rng.normal()) for i in range(1, q + 1)
             for j in range(i + 1, q + 1) if rng.random() < 0.7]
    return PottsModel(q, p, tuple(edges), scale * rng.normal(size=(q, p)))


class TestEAConstruction:
    def test_l5_matches_reported_shape(self):
        model = ea_ising(EAParams(L=5, J_mag=1.2, h_mag=0.05, seed=1))
        assert model.q == 25
        assert len(model.edges) == 50
        assert set(abs(c) for _, _, c in model.edges) == {1.2}
        assert set(abs(v) for v in model.h) == {0.05}

    def test_l2_wraparound_slots_merge(self):
        slots = periodic_lattice_slots(2)
        assert len(slots) == 8
        model = ea_ising(EAParams(L=2, J_mag=1.0, h_mag=0.0, seed=3))
        assert model.q == 4
        # each unordered pair appeared twice, so merged couplings are in {-2, 0, 2}
        assert len(model.edges) == 4
        assert all(c in (-2.0, 0.0, 2.0) for _, _, c in model.edges)

    def test_deterministic_in_seed(self):
        a = ea_ising(EAParams(L=3, J_mag=1.2, h_mag=0.05, seed=42))
        b = ea_ising(EAParams(L=3, J_mag=1.2, h_mag=0.05, seed=42))
        assert a.edges == b.edges
        np.testing.assert_array_equal(a.h, b.h)

    def test_potts_state_space(self):
        model = ea_potts(L=2, p=3, J=1.0, h=0.1, seed=0)
        assert model.q == 4 and model.p == 3
        assert exact_distribution(model).probs.size == 81


class TestEnergy:
    def test_single_field_term(self):
        model = IsingModel(1, (), np.array([0.3]))
        assert energy(model, [1]) == pytest.approx(0.3)
        assert energy(model, [0]) == pytest.approx(-0.3)

    def test_two_aligned_spins(self):
        model = IsingModel(2, ((1, 2, 1.0),), np.zeros(2))
        assert energy(model, [1, 1]) == pytest.approx(1.0)
        assert energy(model, [0, 1]) == pytest.approx(-1.0)

    def test_potts_field_only(self):
        rng = np.random.default_rng(0)
        h = rng.normal(size=(3, 4))
        model = PottsModel(3, 4, (), h)
        config = [2, 0, 3]
        expected = -(h[0, 2] + h[1, 0] + h[2, 3])
        assert energy(model, config) == pytest.approx(expected)

    def test_potts_agreement_lowers_energy_sign(self):
        # ferromagnetic edge with the printed minus sign: agreement gives -J
        model = PottsModel(2, 3, ((1, 2, 2.0),), np.zeros((2, 3)))
        assert energy(model, [1, 1]) == pytest.approx(-2.0)
        assert energy(model, [1, 2]) == pytest.approx(0.0)

    def test_dimension_mismatch(self):
        model = IsingModel(2, (), np.zeros(2))
        with pytest.raises(ValueError):
            energy(model, [0, 1, 1])


class TestExactDistributionOp:
    def test_flat_hamiltonian_uniform(self):
        model = IsingModel(3, (), np.zeros(3))
        np.testing.assert_allclose(exact_distribution(model).probs, 1 / 8)

    def test_single_site_closed_form(self):
        h = 0.7
        model = IsingModel(1, (), np.array([h]))
        dist = exact_distribution(model)
        expected = np.exp(h) / (np.exp(h) + np.exp(-h))
        assert dist.probs[1] == pytest.approx(expected, abs=1e-15)

    def test_normalized(self):
        rng = np.random.default_rng(5)
        dist = exact_distribution(random_ising(4, rng))
        assert abs(dist.probs.sum() - 1.0) < 1e-12

    def test_invariant_under_constant_energy_shift(self):
        rng = np.random.default_rng(8)
        model = random_ising(3, rng)
        rows = all_configurations(3, 2)
        shifted = np.exp(energy_batch(model, rows) + 123.456)
        np.testing.assert_allclose(exact_distribution(model).probs,
                                   shifted / shifted.sum(), atol=1e-12)

    def test_guard_refuses_large_state_spaces(self):
        from sitediff.core import StateSpaceTooLargeError
        model = ea_ising(EAParams(L=6, J_mag=1.0, h_mag=0.0, seed=0))
        with pytest.raises(StateSpaceTooLargeError):
            exact_distribution(model)
        # configurable guard admits it in principle (not evaluated here)
        with pytest.raises(StateSpaceTooLargeError):
            exact_distribution(model, guard_bits=30)


class TestSampleExact:
    def test_point_mass(self):
        probs = np.zeros(4)
        probs[2] = 1.0
        from sitediff.core import ExactDistribution
        dist = ExactDistribution(2, 2, probs)
        samples = sample_exact(dist, 50, seed=0)
        assert (encode_config(row, 2) == 2 for row in samples.rows)
        np.testing.assert_array_equal(samples.rows, np.tile([0, 1], (50, 1)))

    def test_uniform_frequencies_within_5_sigma(self):
        from sitediff.core import ExactDistribution
        dist = ExactDistribution.uniform(4, 2)
        samples = sample_exact(dist, 100_000, seed=1)
        emp = empirical_from_samples(samples)
        sigma = np.sqrt(100_000 * (1 / 16) * (15 / 16))
        for state in range(16):
            assert abs(emp.counts.get(state, 0) - 100_000 / 16) < 5 * sigma

    def test_deterministic(self):
        from sitediff.core import ExactDistribution
        dist = ExactDistribution.uniform(3, 2)
        a = sample_exact(dist, 100, seed=9)
        b = sample_exact(dist, 100, seed=9)
        np.testing.assert_array_equal(a.rows, b.rows)

    def test_zero_samples_rejected(self):
        from sitediff.core import ExactDistribution
        with pytest.raises(ValueError):
            sample_exact(ExactDistribution.uniform(1, 2), 0, seed=0)


class TestExactConditional:
    def test_flat_hamiltonian_uniform(self):
        model = PottsModel(2, 5, (), np.zeros((2, 5)))
        np.testing.assert_allclose(exact_conditional(model, [0, 3], 1), 0.2)

    def test_single_site_closed_form(self):
        model = IsingModel(1, (), np.array([0.3]))
        cond = exact_conditional(model, [0], 1)
        expected = np.exp(0.3) / (np.exp(0.3) + np.exp(-0.3))
        assert cond[1] == pytest.approx(expected, abs=1e-15)

    @pytest.mark.parametrize("builder,p", [(random_ising, 2),
                                           (lambda q, rng: random_potts(q, 3, rng), 3)])
    def test_matches_table_ratios_everywhere(self, builder, p):
        # brute force: conditional equals the normalized fiber of the full table
        rng = np.random.default_rng(21)
        model = builder(3, rng)
        dist = exact_distribution(model)
        for config in all_configurations(3, p):
            for u in (1, 2, 3):
                cond = exact_conditional(model, config, u)
                fiber = np.empty(p)
                for r in range(p):
                    probe = config.copy()
                    probe[u - 1] = r
                    fiber[r] = dist.probs[encode_config(probe, p)]
                np.testing.assert_allclose(cond, fiber / fiber.sum(), atol=1e-12)

    def test_coordinate_range_checked(self):
        model = IsingModel(2, (), np.zeros(2))
        with pytest.raises(ValueError):
            exact_conditional(model, [0, 0], 3)


class TestGlauber:
    def test_flat_hamiltonian_marginals(self):
        model = IsingModel(2, (), np.zeros(2))
        samples = sample_glauber(model, 10_000, burn_in=5, thinning=1, seed=2)
        freq = samples.rows.mean(axis=0)
        sigma = 0.5 / np.sqrt(10_000)
        assert np.all(np.abs(freq - 0.5) < 5 * sigma)

    def test_ferromagnet_agreement(self):
        model = IsingModel(2, ((1, 2, 2.0),), np.zeros(2))
        # exact agreement probability from the enumerated table
        dist = exact_distribution(model)
        p_agree = dist.probs[0] + dist.probs[3]
        assert p_agree > 0.9
        samples = sample_glauber(model, 10_000, burn_in=100, thinning=2, seed=3)
        observed = (samples.rows[:, 0] == samples.rows[:, 1]).mean()
        assert abs(observed - p_agree) < 0.02

    def test_deterministic(self):
        model = IsingModel(3, ((1, 2, 0.5),), np.zeros(3))
        a = sample_glauber(model, 200, burn_in=10, thinning=2, seed=4)
        b = sample_glauber(model, 200, burn_in=10, thinning=2, seed=4)
        np.testing.assert_array_equal(a.rows, b.rows)

    def test_empirical_conditionals_converge(self):
        rng = np.random.default_rng(12)
        model = random_ising(2, rng, scale=0.5)
        samples = sample_glauber(model, 40_000, burn_in=200, thinning=1, seed=5)
        # empirical conditional of site 1 given site 2 = 1
        sel = samples.rows[:, 1] == 1
        observed = samples.rows[sel, 0].mean()
        expected = exact_conditional(model, [0, 1], 1)[1]
        assert abs(observed - expected) < 0.02

    def test_parameter_validation(self):
        model = IsingModel(1, (), np.zeros(1))
        with pytest.raises(ValueError):
            sample_glauber(model, 10, burn_in=0, thinning=1, seed=0)


class TestConditionalBatchAgreesWithScalar:
    def test_batch_matches_loop(self):
        rng = np.random.default_rng(17)
        model = random_potts(3, 4, rng)
        rows = rng.integers(0, 4, size=(20, 3))
        for u in (1, 2, 3):
            batch = conditional_batch(model, rows, u)
            for k, row in enumerate(rows):
                np.testing.assert_allclose(batch[k], exact_conditional(model, row, u))


class TestSerialization:
    def test_ising_round_trip(self, tmp_path):
        rng = np.random.default_rng(31)
        model = random_ising(4, rng)
        path = tmp_path / "model.txt"
        save_model(path, model)
        loaded = load_model(path)
        assert loaded.edges == model.edges
        np.testing.assert_array_equal(loaded.h, model.h)

    def test_potts_round_trip(self, tmp_path):
        model = ea_potts(L=2, p=3, J=1.2, h=0.05, seed=6)
        path = tmp_path / "model.txt"
        save_model(path, model)
        loaded = load_model(path)
        assert (loaded.q, loaded.p) == (4, 3)
        assert loaded.edges == model.edges
        np.testing.assert_array_equal(loaded.h, model.h)

    def test_format_tag_checked(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("something-else v9\n")
        with pytest.raises(ValueError):
            load_model(path)


class TestEdgeValidation:
    def test_duplicate_edges_rejected(self):
        with pytest.raises(ValueError):
            IsingModel(3, ((1, 2, 1.0), (1, 2, 0.5)), np.zeros(3))

    def test_ordering_enforced(self):
        with pytest.raises(ValueError):
            IsingModel(3, ((2, 1, 1.0),), np.zeros(3))

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            IsingModel(2, ((1, 2, np.inf),), np.zeros(2))
