"""Fixed-point capture search for the built-in man strategies on the disc."""
import argparse

from pursuitlab.analysis import fixed_point_search
from pursuitlab.strategy import Constant, RunAway


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    for name, make, start in (("run_away", RunAway, (0.5, 0.0)), ("constant", Constant, (0.2, 0.3))):
        rep = fixed_point_search(make, man_start=start, jobs=args.jobs)
        hist = " ".join(f"{r:.3g}" for r in rep.history)
        print(f"{name}: z=({rep.z[0]:.6f}, {rep.z[1]:.6f}) residual={rep.residual:.3g} "
              f"evaluations={rep.evaluations} history=[{hist}]")


if __name__ == "__main__":
    main()
