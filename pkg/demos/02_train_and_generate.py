"""Train the conditional network on a 3x3 lattice instance and generate.

The whole loop at desk scale: exact training data, the screening loss on
round-robin-noised samples, reverse sampling from uniform noise, and exact
evaluation against the enumerated target law.
"""

from sitediff import (
    EAParams,
    NoiseSchedule,
    TrainConfig,
    ea_ising,
    empirical_from_samples,
    exact_distribution,
    sample_exact,
    train,
    tv,
)
from sitediff.metrics import cross_correlation_error
from sitediff.reverse import reverse_sample

model = ea_ising(EAParams(L=3, J_mag=1.2, h_mag=0.05, seed=7))
dist = exact_distribution(model)
print(f"EA instance: q={model.q} spins, {len(model.edges)} couplings")

train_set = sample_exact(dist, 10_000, seed=1)
schedule = NoiseSchedule.from_sweeps(p=2, q=model.q, epsilon=0.5, sweeps=2)

history = []
learned = train(train_set, schedule,
                TrainConfig(width=64, depth=2, batch_size=512,
                            learning_rate=4e-3, epochs=20, seed=2),
                history=history)
print(f"screening loss: {history[0]:.4f} (first epoch) -> {history[-1]:.4f} (last)")

generated = reverse_sample(learned, schedule, 100_000, init="uniform", rng=3)
reference = sample_exact(dist, 100_000, seed=4)

print(f"exact TV(generated, target)      = "
      f"{tv(empirical_from_samples(generated), dist):.4f}")
print(f"TV floor at this sample size     = "
      f"{tv(empirical_from_samples(reference), dist):.4f}")
print(f"cross-correlation error          = "
      f"{cross_correlation_error(generated, reference):.5f}")
