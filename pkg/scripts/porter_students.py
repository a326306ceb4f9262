"""Porter against random students: capture time versus the time each student first touches the guarded edge."""
import argparse
import math

from pursuitlab.engine import GameConfig, play
from pursuitlab.geometry import EuclideanBox
from pursuitlab.strategy import Porter, porter_start, student_waypoints, waypoint_path


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--dt", type=float, default=1e-3)
    ap.add_argument("--tol", type=float, default=1e-4)
    args = ap.parse_args()
    box = EuclideanBox(1.0)
    print("seed,touch,captured,capture_time,min_slack")
    for seed in range(args.seeds):
        pts, touch = student_waypoints(seed, exit_left=seed % 2 == 0)
        T = math.ceil((pts[-1][0] + 0.5) / args.dt) * args.dt
        porter = Porter("left")
        cfg = GameConfig(box, porter_start("left"), (0.0, 0.0), T, args.dt, args.tol)
        rec = play(porter, waypoint_path(box, pts), "lion", cfg)
        slack = min(min(a, b) for _, a, b, _, _ in porter.log)
        print(f"{seed},{touch},{rec.captured},{rec.capture_time},{slack:.3g}")


if __name__ == "__main__":
    main()
