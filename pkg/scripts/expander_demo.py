"""Derive expander families and report their spectral certificates."""
import argparse

from lingraph import expanders as ex
from lingraph.derivation import derive_layers


def products(depth: int) -> None:
    samples = {
        "replacement": (ex.complete_graph(4), ex.cycle_graph(3, ["1", "2", "3"])),
        "balanced": (ex.complete_graph(5), ex.cycle_graph(4, ["1", "2", "3", "4"])),
        "zigzag": (ex.k5_pair_ported(), ex.looped_path_on_pairs()),
    }
    for kind, (g0, h) in samples.items():
        hs = ex.lambda2(h)
        parent = g0
        for k, g in enumerate(ex.product_layers(kind, g0, h, depth)[1:], 1):
            l1 = ex.lambda2(parent).normalized_abs
            s = ex.lambda2(g)
            bound = ex.lambda_bound(kind, l1, hs.normalized_abs, hs.degree)
            print(f"{kind:11s} depth {k}: {len(g.vertices):4d} vertices, degree {s.degree}, "
                  f"normalized second {s.normalized_abs:.4f} <= bound {bound:.4f}")
            parent = g


def lifts() -> None:
    for name, base, kind in (("K3,3", ex.complete_bipartite(3, 3), "2-lift"),
                             ("K2,2", ex.complete_bipartite(2, 2), "4-lift")):
        kids = ex.lift_children(base, kind)
        good = [c for c in kids if ex.ramanujan_check(ex.undirected_adjacency(c)[1])]
        print(f"{name} {kind}: {len(good)} of {len(kids)} children are Ramanujan")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--depth", type=int, default=2)
    args = ap.parse_args()
    for n in (4, 5, 6):
        print(f"cheeger(K{n}) = {ex.cheeger(ex.complete_graph(n))}")
    products(args.depth)
    lifts()
    print("zigzag grammar layer sizes:",
          [len(layer.graphs[0].vertex_labels) for layer in
           derive_layers(ex.zigzag_grammar(ex.k5_pair_ported(), ex.looped_path_on_pairs()), 3)[1:]])


if __name__ == "__main__":
    main()
