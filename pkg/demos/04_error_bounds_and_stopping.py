"""The accuracy guarantees, evaluated and checked against a real run.

On an operator whose beta_{3s} is certified below 1/8, the error after k
iterations sits under a geometric envelope, and a residual-based stopping
rule converts an observable quantity into a bound on the unobservable error.
"""

import numpy as np

import ihtkit as kit

# A square operator built to have every submatrix gram eigenvalue in
# [0.9, 1.0], so exact_beta certifies beta_6 < 1/8 outright.
rng = np.random.default_rng(8)
n, s = 12, 2
q, _ = np.linalg.qr(rng.standard_normal((n, n)))
p = rng.standard_normal((n, n))
p = p @ p.T
p /= np.linalg.eigvalsh(p)[-1]
w, v = np.linalg.eigh(np.eye(n) - 0.1 * p)
op = kit.DenseOperator(q @ (v * np.sqrt(w)) @ v.T)

beta = kit.exact_beta(op, 3 * s).beta
print(f"certified beta_{3 * s} = {beta:.4f} (< 1/8: {beta < 1 / 8})")

truth = np.zeros(n)
truth[rng.choice(n, s, replace=False)] = rng.uniform(1.0, 2.0, s)
e = 0.01 * rng.standard_normal(n)
x = op.apply(truth) + e
ys_norm = float(np.linalg.norm(truth))
e_norm = float(np.linalg.norm(e))

report = kit.run(
    op, x, kit.IhtConfig(sparsity=s, max_iters=12, trace_enabled=True), truth=truth
)
print("iter   measured error   envelope 2^-k ||y^s|| + 4||e||")
for point in report.trace:
    envelope = kit.error_bound_exact_sparse(ys_norm, e_norm, point.iteration)
    print(f"{point.iteration:4d}   {point.error_norm:.6f}        {envelope:.6f}")

# Iteration budget: enough steps to land within a constant of the noise
# floor, from the signal-to-floor ratio alone.
eps = kit.epsilon_tilde(truth, s, e_norm)
k_star = kit.predicted_iterations(kit.BoundInputs(ys_norm, eps))
print(f"predicted iterations to reach 6x the floor: {k_star}")

# Stopping rule: to certify a final error of c * eps (c > 5), stop once the
# residual drops to (c / 1.07 - 2) * eps.
c = 6.0
tol = kit.residual_tol_for_accuracy(c, eps)
report = kit.run(op, x, kit.IhtConfig(sparsity=s, max_iters=100, residual_tol=tol))
true_error = float(np.linalg.norm(truth - report.estimate))
certified = kit.stopping_error_bound(tol, eps)
print(f"stopped at residual {report.residual_norm_final:.4f} <= {tol:.4f} "
      f"after {report.iterations_used} iterations")
print(f"true error {true_error:.4f} <= certified bound {certified:.4f} "
      f"= {c:.0f} * epsilon_tilde")
