"""W1(X, X_t) curves for the catalog laws in d = 1, 2, written as CSV files
next to this script (plot-ready: t, estimate, se, fitted_bound).

    python3 demos/smoothing_curves.py [n]
"""
import sys
from pathlib import Path

import numpy as np

from sdstein.catalog import standard_catalog
from sdstein.distances import smoothing_curve

n = int(sys.argv[1]) if len(sys.argv) > 1 else 1024
out = Path(__file__).with_name("curves")
out.mkdir(exist_ok=True)
t = np.arange(1, 25) * 0.25
for name, law in standard_catalog().items():
    c = smoothing_curve(law, t, n, seed=0)
    c.to_csv(out / f"{name}.csv")
    print(f"{name:18s} coupling={c.coupling:18s} slope={c.slope:7.3f} C_hat={c.C_hat:7.3f} "
          f"rate={c.rate:.4f}  first={c.estimate[0]:.3f} last={c.estimate[-1]:.4f}")
