"""Isometry constants: exact enumeration, Monte Carlo screens, and the
inequalities that drive the recovery guarantees.

The one-sided constant beta_s is the smallest number with
(1 - beta_s) ||y||^2 <= ||Phi y||^2 <= ||y||^2 over all s-sparse y. Exact
computation enumerates every s-column submatrix, so it only runs at desk
scale; the Monte Carlo variant samples supports and yields a lower bound.
"""

import numpy as np

import ihtkit as kit

op = kit.build_gaussian(6, 12, seed=11)

exact = kit.exact_beta(op, 2)
print(f"exact beta_2 over {exact.supports_examined} supports: {exact.beta:.4f}")
print(f"  singular-value band: [{exact.min_singular_sq:.4f}, {exact.max_singular_sq:.4f}]")
print(f"  upper bound violated (needs rescale): {exact.upper_bound_violated}")
print(f"  worst support: {exact.worst_support}")

mc = kit.estimate_beta(op, 2, trials=30, seed=0)
print(f"Monte Carlo lower bound from {mc.supports_examined} distinct supports: {mc.beta:.4f}")

# The guarantee threshold beta_{3s} < 1/8 translates to the symmetric-form
# constant via delta = beta / (2 - beta).
print(f"beta 1/8 corresponds to delta = {kit.beta_to_delta(1 / 8):.4f}")

# After rescaling by the exact spread, the one-sided bound holds and the
# gram-matrix inequalities have nonnegative margins on every support.
scaled = kit.rescale_for_rip(op, min(exact.max_singular_sq - 1.0, 1.0 - 1e-12))
scaled_beta = kit.exact_beta(scaled, 2)
print(f"after rescale: beta_2 = {scaled_beta.beta:.4f}, "
      f"upper violated: {scaled_beta.upper_bound_violated}")

margin1 = kit.check_lemma1(scaled, scaled_beta.worst_support, scaled_beta.beta)
print(f"near-identity gram margin on the worst support: {margin1:.2e}")

margin2 = kit.check_lemma2(scaled, [0, 5], [2, 9], kit.exact_beta(scaled, 4).beta)
print(f"disjoint cross-gram margin: {margin2:.2e}")

rng = np.random.default_rng(1)
margin3 = min(kit.check_lemma3(scaled, rng.standard_normal(12), 2) for _ in range(200))
print(f"worst dense-vector norm-split margin over 200 draws: {margin3:.2e}")

# The effective noise a dense signal induces on its own sparse head never
# exceeds the unrecoverable-energy term.
y = kit.gen_compressible(kit.CompressibleSpec(n=12, p=0.6, seed=4))
e = 0.02 * rng.standard_normal(12)
realized = kit.effective_noise_norm(scaled, y, 2, e)
bound = kit.epsilon_tilde(y, 2, float(np.linalg.norm(e)))
print(f"effective noise {realized:.4f} <= epsilon_tilde {bound:.4f}")
