"""Racer A against arc-shaped opponents in the half-plane: arrival times and the closest the opponent got."""
import argparse
import itertools
import math

from pursuitlab.engine import race
from pursuitlab.geometry import HalfPlaneWithTwoPoints
from pursuitlab.strategy import RaceA, race_arc_path


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dt", type=float, default=1e-3)
    args = ap.parse_args()
    print("bulge,wait,speed,a_arrival,b_arrival,min_gap")
    for bulge, wait, speed in itertools.product((0.05, 0.2, 0.5, 1.0, 1.5), (0.0, 0.3), (1.0, 0.6)):
        rec = race(RaceA(), race_arc_path(bulge, wait, speed), HalfPlaneWithTwoPoints(), (1.0, 0.0), (0.0, 0.0),
                   4.0, args.dt)
        gaps = [math.hypot(*b) - math.hypot(*a) for t, a, b in
                zip(rec.racer.times, rec.racer.points, rec.opponent.points) if 0 < t <= rec.racer_arrival]
        print(f"{bulge},{wait},{speed},{rec.racer_arrival},{rec.opponent_arrival},{min(gaps):.3g}")


if __name__ == "__main__":
    main()
