"""Growth-rate estimation demo: a small diffusion-constant sweep with common
random numbers, plus the annealed-vs-quenched divergence signature of the
one-dimensional independent-walk catalyst.
"""

from pamlab import (
    EnvKind, Params, RngStream, Torus, annealed_lambda, kappa_sweep,
    quenched_lambda,
)

torus = Torus(1, 32)
base = Params(0.0, 1.0, 1.0)
seed = RngStream(2026)

print("quenched growth rate along a small kappa grid (common environments):")
sweep = kappa_sweep(EnvKind.ISRW, base, torus, [0.0, 0.5, 2.0], 60.0, [],
                    8, seed)
for kappa in sweep.kappa_grid:
    est = sweep.estimates[(kappa, 0)]
    print(f"  kappa={kappa:3g}: lambda0 = {est.value:.4f} "
          f"+- {est.std_error:.4f}  ({est.replicas} environments)")
print("  floor rho*gamma = 1.0; the kappa=0 point sits on it, positive "
      "kappa sits above it.")

print("\nannealed first moment vs quenched at kappa=0.5 "
      "(expected to separate in d=1):")
params = Params(0.5, 1.0, 1.0)
q = quenched_lambda(EnvKind.ISRW, params, torus, 20.0, 100, seed)
a = annealed_lambda(EnvKind.ISRW, params, torus, 20.0, 1, 100, seed)
print(f"  quenched:  {q.value:.3f} +- {q.std_error:.3f}")
print(f"  annealed:  {a.value:.3f} +- {a.std_error:.3f}  "
      f"(heavy-tail flag: {a.heavy_tail}, max replica share "
      f"{a.max_share:.0%})")
print("  trace of the annealed estimate, rising with t:")
for t, lam in a.t_grid:
    print(f"    t={t:5g}: {lam:.3f}")
