"""Compare the automatic presentation against brute-force derivation for each bundled grammar."""
import argparse
import time
from pathlib import Path

from lingraph.derivation import complete_grammar
from lingraph.formats import load_grammar
from lingraph.model import classify_grammar
from lingraph.presentation import brute_force_structure, build_presentation, presentation_tables

GRAMMARS = Path(__file__).resolve().parents[1] / "grammars"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("names", nargs="*", default=["flip", "flip_mixed", "grid", "hypercube", "extinction", "alternating"])
    ap.add_argument("--length", type=int, default=3, help="longest word compared")
    args = ap.parse_args()
    for name in args.names:
        g = load_grammar(GRAMMARS / f"{name}.0lg")
        if not classify_grammar(g).complete:
            g = complete_grammar(g)
        started = time.perf_counter()
        got = presentation_tables(build_presentation(g), args.length)
        want = brute_force_structure(g, args.length)
        bad = sorted(p for p in set(got) | set(want) if got.get(p) != want.get(p))
        tuples = sum(len(v) for v in want.values())
        print(f"{name:12s} {len(want):3d} relations {tuples:6d} tuples  "
              f"{'agree' if not bad else 'DIFFER on ' + ', '.join(bad)}  ({time.perf_counter() - started:.1f}s)")


if __name__ == "__main__":
    main()
