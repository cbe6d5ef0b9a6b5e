"""
Tracking ten crossing targets without knowing p_D
=================================================

One Monte Carlo run of the ten-target scenario. Both Beta-Gaussian filters see
the same measurements; we print the estimated target count, the trajectory
metric against the truth, and the learned detection probabilities.
"""
import numpy as np

from utphd.harness import load_config, run_filter
from utphd.metric import trajectory_metric
from utphd.sim import generate_measurements, generate_truth, make_scenario, truth_trajectories

# the scenario bundles motion model, birth, clutter and the true targets
sc = make_scenario("scenario1")
truth = generate_truth(sc)
rng = np.random.default_rng(0)
scans = [generate_measurements(sc, truth, k, rng) for k in range(1, sc.n_scans + 1)]
print(f"{sum(len(Z) for Z in scans)} measurements over {len(scans)} scans")

# L = 5: only the last five states of each trajectory are smoothed jointly
cfg = load_config()
runs = {name: run_filter(name, 5, sc, scans, cfg) for name in ("bgu-tphd", "bgu-tcphd")}

# the metric compares whole trajectories up to scan k, so earlier mistakes count too
print("\n   k  true  TPHD  TCPHD   TM(TPHD)  TM(TCPHD)")
for k in range(10, sc.n_scans + 1, 10):
    gt = truth_trajectories(sc, truth, k)
    row = [trajectory_metric(runs[n][0][k - 1], gt, k=k).total / np.sqrt(k) for n in runs]
    print(f"{k:4d} {len(gt):5d} {runs['bgu-tphd'][1][k - 1]:5d} {runs['bgu-tcphd'][1][k - 1]:6d}"
          f" {row[0]:10.2f} {row[1]:10.2f}")

# each estimate carries the mean of its Beta factor; the true value is 0.98
for name, (est, _) in runs.items():
    a = np.array([e.detection_prob for e in est[-1]])
    print(f"\n{name}: p_D estimates at the last scan {np.round(a, 3)}")
