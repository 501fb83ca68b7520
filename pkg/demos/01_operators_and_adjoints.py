"""Tour of the measurement-operator kinds.

Each operator is an M x N linear map exposed only through ``apply`` and
``apply_adjoint``. Dense kinds store coefficients; the subsampled
orthonormal kind runs through a fast transform and never forms a matrix.
"""

import json

import numpy as np

import ihtkit as kit

rng = np.random.default_rng(0)

# Three seeded constructions. Gaussian and Bernoulli entries are normalized
# so every column has (expected) unit norm; the partial orthonormal operator
# keeps M rows of an orthonormal transform, scaled by sqrt(N/M).
gaussian = kit.build_gaussian(32, 128, seed=7)
bernoulli = kit.build_bernoulli(32, 128, seed=7)
partial = kit.build_partial_orthonormal(32, 128, seed=7)

for op in (gaussian, bernoulli, partial):
    v = rng.standard_normal(op.cols)
    x = rng.standard_normal(op.rows)
    lhs = np.dot(op.apply(v), x)
    rhs = np.dot(v, op.apply_adjoint(x))
    print(f"{op.kind:24s} adjoint identity gap: {abs(lhs - rhs):.2e}")

# With M = N the subsampled transform is a full orthonormal matrix, so the
# adjoint inverts the forward map exactly.
full = kit.build_partial_orthonormal(64, 64, seed=1)
v = rng.standard_normal(64)
print("full-transform roundtrip error:",
      f"{np.linalg.norm(full.apply_adjoint(full.apply(v)) - v):.2e}")

# Column restriction keeps a subset of columns; forward application equals
# zero-padding the input back into the ambient space.
gamma = [3, 40, 77, 100]
sub = kit.restrict_columns(gaussian, gamma)
coeffs = rng.standard_normal(4)
padded = np.zeros(128)
padded[gamma] = coeffs
print("restriction vs zero-padding:",
      f"{np.linalg.norm(sub.apply(coeffs) - gaussian.apply(padded)):.2e}")

# Operators serialize to a tiny descriptor; the payload is regenerated from
# the seed, never stored.
descriptor = kit.to_descriptor(gaussian)
print("descriptor:", json.dumps(descriptor))
rebuilt = kit.from_descriptor(descriptor)
v = rng.standard_normal(128)
print("rebuilt operator agrees bitwise:",
      bool(np.all(rebuilt.apply(v) == gaussian.apply(v))))
