"""Box-probability density estimates against the corrected Gaussian density.

The probability of a shrinking box around a point, scaled by the box
volume, estimates the density of the scaled sum; the corrected Gaussian
density at the point is the reference.
"""

from edgeworth import iid_model, standard_normal, uniform_centered
from edgeworth.experiments import density_experiment

print("=== gaussian summands: the estimate matches the normal density ===\n")
res = density_experiment(
    lambda n: iid_model(standard_normal(), n), 0, [0.0], [256],
    samples=200_000, seed=7,
)
r = res.rows[0]
print(f"n=256, box half-width {r['delta']:.4f}: estimate {r['estimate']:.5f} "
      f"+- {r['se']:.5f}, reference {r['reference']:.5f}\n")

print("=== uniform summands, order-2 corrector: error falls with n ===\n")
res = density_experiment(
    lambda n: iid_model(uniform_centered(), n), 2, [0.0], [64, 256, 1024],
    delta_rule=lambda n: 1.5 * float(n) ** -0.25,
    samples=200_000, seed=8,
)
print(f"{'n':>6} {'delta':>8} {'estimate':>10} {'reference':>10} {'error':>10} {'hits':>8}")
for r in res.rows:
    print(f"{r['n']:>6} {r['delta']:>8.4f} {r['estimate']:>10.5f} "
          f"{r['reference']:>10.5f} {r['error']:>10.5f} {r['hits']:>8}")
print(f"\nfitted error slope: {res.fitted_slope:.3f}")
