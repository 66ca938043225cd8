"""Run the sample machines next to their grammars and compare acceptance."""
import argparse

from lingraph import tm
from lingraph.model import classify_grammar


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--depth", type=int, default=8)
    args = ap.parse_args()
    for name, t in tm.sample_machines().items():
        r = tm.acceptance_agreement(t, args.depth)
        cls = classify_grammar(tm.build_tm_grammar(t))
        print(f"{name:8s} machine accepts {str(r.machine_accepts):5s} grammar accepts {str(r.grammar_accepts):5s} "
              f"configurations match {r.fidelity}  unix {tm.unix_up_to(t, args.depth)}  [{cls.summary()}]")


if __name__ == "__main__":
    main()
