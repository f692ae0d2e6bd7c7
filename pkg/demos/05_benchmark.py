"""End-to-end CFAR benchmark on a desk-scale grid.

Runs the full calibrate -> verify -> sweep pipeline for all five detectors
in the Gaussian family on a reduced grid, prints the report, and (if
matplotlib is available) writes Pd curves next to this script.

The same pipeline is scriptable from the shell:

    cfardetect simulate --config run.cfg --out out/
    cfardetect fit      --config run.cfg --out out/
    cfardetect evaluate --config run.cfg --out out/
"""

import os

import numpy as np

from cfardetect import cfar, dsvdd, svdd
from cfardetect.sim import Scenario, make_splits

scn = Scenario(
    n_train=2000, n_cal=2000, n_test=300,
    snr_grid_db=(5.0, 10.0, 15.0, 20.0), doppler_bins=(0, 4, 8),
)
sp = make_splits(scn)
cells = np.array([s.cell for s in sp.train_h0])

print("fitting one-class detectors ...")
svdd_model = svdd.fit(cells, nu=0.01)
dsvdd_model = dsvdd.train(cells, dsvdd.TrainConfig(epochs=6, milestones=(3, 5)))

handles = cfar.make_handles(scn, svdd_model=svdd_model, dsvdd_model=dsvdd_model)
rows = cfar.run_experiment(scn, handles, splits=sp, n_test=scn.n_test)

print(f"\n{'detector':<12} pfa_hat   " +
      "  ".join(f"snr{int(s):02d}" for s in scn.snr_grid_db) +
      "   (Pd, mean over bins)")
for tag in (h.tag for h in handles):
    sub = [r for r in rows if r.detector == tag]
    mean_pd = [np.mean([r.pd for r in sub if r.snr_db == s])
               for s in scn.snr_grid_db]
    print(f"{tag:<12} {sub[0].empirical_pfa:7.4f}   " +
          "  ".join(f"{v:5.2f}" for v in mean_pd))

out = os.path.join(os.path.dirname(__file__), "benchmark_report.csv")
cfar.write_report(out, rows)
print(f"\nreport written to {out}")

try:
    from cfardetect.plots import plot_pd_curves
except Exception:  # matplotlib missing
    pass
else:
    fig = os.path.join(os.path.dirname(__file__), "benchmark_pd_curves.svg")
    plot_pd_curves(rows, fig)
    print(f"Pd curves written to {fig}")
