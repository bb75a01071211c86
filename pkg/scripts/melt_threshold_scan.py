"""Melt time of the free N = 20, L = 180 expansion as a function of the
central-density threshold, at a fine recording cadence."""

import argparse

import numpy as np

from hcboson import freefermion as ff
from hcboson.model import ModelParams
from hcboson.observables import ObservableSeries, Snapshot, melt_time


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--L", type=int, default=180)
    ap.add_argument("--N", type=int, default=20)
    ap.add_argument("--cadence", type=float, default=0.05)
    ap.add_argument("--t-max", type=float, default=10.0)
    args = ap.parse_args()

    L, N = args.L, args.N
    i1 = (L - N) // 2 + 1
    occ = [1 if i1 <= i < i1 + N else 0 for i in range(1, L + 1)]
    C0 = ff.from_occupations(occ)
    ev = ff.FreeEvolver(ModelParams(L=L))
    series = ObservableSeries(L=L, N=N)
    for k in range(int(round(args.t_max / args.cadence)) + 1):
        C = ev.evolve(C0, k * args.cadence)
        series.record(k * args.cadence, Snapshot(ff.density_from_correlation(C), 0.0))

    print(f"light_cone_estimate = {N / 2 / 2.0!r}")
    print("threshold,melt_time")
    for th in np.round(np.arange(0.5, 0.991, 0.05), 2):
        t = melt_time(series, th)
        print(f"{th:g},{'none' if t is None else f'{t:.2f}'}")


if __name__ == "__main__":
    main()
