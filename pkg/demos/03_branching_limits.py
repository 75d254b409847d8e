"""Branching-process analytics behind the hopcount law.

Exploring a random digraph from a node looks, early on, like a delayed
branching process: the root reproduces by the plain degree law, everyone
else by the stub-weighted law.  Its extinction probability, the survival
probability, and the martingale limit W of the normalized generation
sizes are all computable, the last one by pool-based population dynamics.
"""

import numpy as np

from dcmlab import (
    GWSpec,
    extinction_probability,
    parse_law,
    population_dynamics,
    simulate_delayed_gw_many,
    survival_probability,
    tilted_laws,
)

law = parse_law("pp-independent:1.5,1")
spec = GWSpec.from_joint_law(law, "+")
print(f"root mean nu = {spec.nu:.4f}, offspring mean mu = {spec.mu:.4f}")

q = extinction_probability(spec.f)
s = survival_probability(spec.g, q)
print(f"extinction fixed point q = {q:.6f}")
print(f"delayed-process survival s = {s:.6f}")

g_tilde, f_tilde = tilted_laws(spec.g, spec.f, q)
print(f"extinction-conditioned offspring mean = {f_tilde.mean:.4f} (subcritical)")

paths = simulate_delayed_gw_many(spec, generations=6, n_paths=50_000, seed=3)
for k in (1, 3, 6):
    w = paths[:, k] / (spec.nu * spec.mu ** (k - 1))
    print(f"E[Z_{k} / (nu mu^{k-1})] = {w.mean():.4f}  (martingale mean 1)")

pool = population_dynamics(spec, pool_size=100_000, generations=30, seed=4)
print(f"\npopulation-dynamics pool: mean {pool.mean:.4f}, "
      f"zero fraction {pool.zero_fraction:.4f} vs 1 - s = {1 - s:.4f}")
print(f"near-zero survivors (truncation-depth sensitivity): "
      f"{pool.near_zero_fraction:.5f}")
