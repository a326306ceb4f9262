"""How the sampled Besicovitch man fares against the radius lion as dt shrinks.

For each dt, prints the capture time, the minimum separation, the number of
dashes the man committed and the last dash length.
"""
import argparse

from pursuitlab.engine import GameConfig, play
from pursuitlab.geometry import ClosedDisc
from pursuitlab.strategy import Besicovitch, RadiusLion


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--c", type=float, default=0.5)
    ap.add_argument("--T", type=float, default=50.0)
    ap.add_argument("--tol", type=float, default=1e-6)
    ap.add_argument("--dts", type=float, nargs="+", default=[1e-2, 5e-3, 2e-3, 1e-3, 5e-4])
    args = ap.parse_args()
    print("dt,captured,capture_time,min_sep,dashes,last_dash")
    for dt in args.dts:
        man = Besicovitch(args.c)
        cfg = GameConfig(ClosedDisc(1.0), (0.0, 0.0), (0.5, 0.0), args.T, dt, args.tol)
        rec = play(man, RadiusLion(), "man", cfg, time_budget=60.0)
        last = man.steps[-1][2] if man.steps else float("nan")
        print(f"{dt:g},{rec.captured},{rec.capture_time},{rec.separation.min_distance:.3g},{len(man.steps)},{last:.3g}")


if __name__ == "__main__":
    main()
