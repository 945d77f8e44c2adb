"""Per-stage box area of multi-stage PAMCUR on a sharp Laplacian field (or an elevation file)."""

import argparse
from pathlib import Path

import numpy as np

from peakloc.fields import ProfileSpec, SeparableField
from peakloc.harness import ExperimentTable, emit_table
from peakloc.pamcur import Rect, RunConfig, run_pamcur
from peakloc.sampling import NoiseModel

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--alpha", type=float, default=0.5)
ap.add_argument("--grid-n", type=int, default=50)
ap.add_argument("--stages", type=int, default=5)
ap.add_argument("--trials", type=int, default=100)
ap.add_argument("--noise", type=float, default=0.0)
ap.add_argument("--elevation", default=None, help="optional id,lon,lat,alt file")
ap.add_argument("--out", default="results")
args = ap.parse_args()

if args.elevation:
    from peakloc.elevation import load_elevation
    cloud = load_elevation(args.elevation)
    oracle, roi = cloud.oracle(), Rect(*cloud.bounds)
else:
    prof = ProfileSpec("laplacian", a=20.0)
    oracle, roi = SeparableField(prof, prof, 1.0, (0.1037, -0.0461)), Rect(-0.5, 0.5, -0.5, 0.5)

areas = np.full((args.trials, args.stages), np.nan)
samples = np.full((args.trials, args.stages), np.nan)
for t in range(args.trials):
    cfg = RunConfig(grid_n=args.grid_n, alpha=args.alpha, max_stages=args.stages,
                    stop_tolerance=0.0, seed=t, roi=roi, noise=NoiseModel("gaussian", args.noise))
    res = run_pamcur(oracle, cfg)
    used = 0
    for k, st in enumerate(res.stages):
        used += st.samples
        areas[t, k] = st.roi.area * st.area_ratio / roi.area
        samples[t, k] = used
table = ExperimentTable({"stage": np.arange(1, args.stages + 1),
                         "samples": np.nanmean(samples, axis=0),
                         "area_fraction": np.nanmean(areas, axis=0)})
out = Path(args.out)
out.mkdir(parents=True, exist_ok=True)
emit_table(table, out / "shrinkage.csv")
emit_table(table, out / "shrinkage.svg", "svg", x="samples", log_y=True)
for k in range(args.stages):
    print(f"stage {k + 1}: samples {table['samples'][k]:8.0f}  area fraction {table['area_fraction'][k]:.3g}")
