"""Rerun a single-run MPS config at half the bond dimension and compare.

The fitted velocity and the final density should move by much less than the
effect being measured; a large change means chi_max is too small.
"""

import argparse
import os

import numpy as np

from hcboson import config as cfgmod, scenarios


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("config")
    args = ap.parse_args()

    cfg = cfgmod.load(args.config)
    if cfg.resolve_engine() != "mps":
        raise SystemExit("truncation_check needs a config that runs on the mps engine")
    full = scenarios.run_scenario(cfg)
    half = scenarios.run_scenario(
        cfg.replace(chi_max=max(1, cfg.chi_max // 2), output_dir=os.path.join(cfg.output_dir, "half_chi"))
    )
    dn = float(np.max(np.abs(full.series.density[-1] - half.series.density[-1])))
    for name, res in (("chi_max", full), ("chi_half", half)):
        rep = res.report
        print(f"{name} = {res.config.chi_max}")
        print(f"{name}_velocity = {rep['velocity']!r}")
        print(f"{name}_discarded_weight = {rep['discarded_weight']!r}")
    print(f"velocity_change = {abs(full.report['velocity'] - half.report['velocity'])!r}")
    print(f"final_density_change = {dn!r}")


if __name__ == "__main__":
    main()
