"""Discrete value delta(eps) on the interval and the circle for a range of eps."""
import argparse

from pursuitlab.geometry import cycle_graph, path_graph
from pursuitlab.solver import delta_sweep, make_spec


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, nargs="+", default=[0.5, 0.25, 0.125, 0.0625])
    ap.add_argument("--T", type=float, default=4.0)
    ap.add_argument("--order", default="lion_first", choices=["lion_first", "man_first"])
    args = ap.parse_args()
    games = {
        "interval": (path_graph(2.0, 2), 0, 1),
        "circle": (cycle_graph(4.0, 4), 0, 2),
    }
    print("space,eps,delta,states,elapsed_ms")
    for name, (G, a, b) in games.items():
        build = lambda eps, G=G, a=a, b=b: make_spec(G, G.node_point(a), G.node_point(b), eps, args.T, args.order)
        for r in delta_sweep(build, args.eps):
            print(f"{name},{r.eps},{r.delta},{r.states},{r.elapsed_ms:.1f}")


if __name__ == "__main__":
    main()
