#!/usr/bin/env python3
"""Walk one mock-backed debate end to end and print each state.

Usage: python scripts/demo_session.py [--seed N] [--claim TEXT]
"""

import argparse
import json

from argkit import qbaf, semantics
from argkit.builder import GenerationConfig, build_qbaf, expand_argument
from argkit.gateway import BackendConfig


def show(tree, strengths, title):
    print(f"\n== {title}")
    for argument in tree.arguments:
        depth = qbaf.depth_of(tree, argument.id)
        edge = tree.parent_edge(argument.id)
        relation = "claim" if edge is None else f"{edge.polarity}s {edge.target}"
        print(
            f"  {'  ' * depth}{argument.id} [{relation}] tau={argument.base_score:.2f} "
            f"sigma={strengths[argument.id]:.4f}  {argument.text[:60]}"
        )
    print(f"  verdict: root sigma={strengths[tree.root]:.4f}")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--claim", default="The proposal will pass before the end of the year")
    args = parser.parse_args()

    config = GenerationConfig(backend=BackendConfig(kind="mock", mock_seed=args.seed), depth=2, breadth=1)
    result = build_qbaf(args.claim, config)
    tree = result.qbaf

    for semantics_id in semantics.SEMANTICS_IDS:
        show(tree, semantics.evaluate(tree, semantics_id), f"freshly built ({semantics_id})")

    attacker = next(src for src, pol in qbaf.children_of(tree, tree.root) if pol == qbaf.ATTACK)
    tree = qbaf.set_base_score(tree, attacker, 1.0)
    show(tree, semantics.evaluate(tree, "df-quad"), f"after maxing attacker {attacker} (df-quad)")

    expanded = expand_argument(tree, tree.root, qbaf.SUPPORT, config).qbaf
    show(expanded, semantics.evaluate(expanded, "df-quad"), "after generating one more supporter (df-quad)")

    print("\n== canonical JSON")
    print(json.dumps(qbaf.to_json_obj(expanded))[:400] + " ...")


if __name__ == "__main__":
    main()
