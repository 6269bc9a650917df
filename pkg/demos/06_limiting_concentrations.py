"""Final concentrations of fully bound clusters.

Run the frozen dynamics to a large time and compare the concentration of
arm-less clusters of each mass with the closed form
c_inf(0, m) = m1 beta^{m-1} nu^{*m}(m-2) / (m (m-1)).
"""

import math

from cmgel import frozen_sim, smoluchowski
from cmgel.measures import poisson

n = 300_000
for label, mu in (("supercritical Poisson(2)", poisson(2.0)),
                  ("subcritical Poisson(0.5)", poisson(0.5))):
    cfg = frozen_sim.FrozenConfig(
        n=n, mu=mu, alpha=math.ceil(n ** 0.85), t_max=15.0, snapshot_times=(), seed=2
    )
    traj = frozen_sim.run_frozen(cfg)
    census = traj.census_dict(len(traj.times) - 1)
    print(f"\n{label}:")
    print(f"  {'m':>2} {'measured':>10} {'closed form':>12}")
    for m in range(2, 7):
        th = smoluchowski.limiting_concentration(mu, m)
        print(f"  {m:>2} {census.get((0, m), 0.0):>10.6f} {th:>12.6f}")
