"""Walk through the exact machinery on a model small enough to enumerate.

Builds a 3-spin Ising model, pushes its law forward through the round-robin
noising chain, reverses the chain with exact single-site conditionals, and
checks that the data law comes back to machine precision.
"""

import numpy as np

from sitediff import ExactDistribution, IsingModel, NoiseSchedule, exact_distribution, tv
from sitediff.forward import forward_marginals, mixing_tv
from sitediff.reverse import ExactMarginalOracle, reverse_pushforward_exact

model = IsingModel(
    q=3,
    edges=((1, 2, 0.8), (2, 3, -0.5)),
    h=np.array([0.2, -0.1, 0.3]),
)
mu0 = exact_distribution(model)
print("data law over the 8 states:")
print(np.round(mu0.probs, 4))

# two full sweeps of half-strength noise
schedule = NoiseSchedule.from_sweeps(p=2, q=3, epsilon=0.5, sweeps=2)
marginals = forward_marginals(mu0, schedule)
print(f"\nforward chain: T={schedule.T} steps, stay prob b={schedule.b:.3f}")
for n in (0, 3, 6):
    gap = tv(marginals[n], ExactDistribution.uniform(3, 2))
    print(f"  TV(mu_{n}, uniform) = {gap:.4f}")
print(f"mixing gap delta_T = {mixing_tv(model, schedule):.4f}")

# reverse the chain with exact conditionals, starting from the exact mu_T
oracle = ExactMarginalOracle(marginals, schedule)
recovered = reverse_pushforward_exact(oracle, schedule, marginals[schedule.T])
print(f"\nTV(reversed law, data law) = {tv(recovered, mu0):.2e}")

# starting from the uniform noise reference instead costs exactly delta_T at most
from_uniform = reverse_pushforward_exact(oracle, schedule,
                                         ExactDistribution.uniform(3, 2))
print(f"TV(reversed-from-uniform, data law) = {tv(from_uniform, mu0):.4f} "
      f"(bounded by delta_T above)")
