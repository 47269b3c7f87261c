#!/usr/bin/env python3
"""Sweep one attacker's base score and report the root strength under all
three semantics, as CSV on stdout.  A quick feel for how the update rules
differ on the same tree.

Usage: python scripts/semantics_sweep.py [--tau ROOT] [--supporter S] [--steps N]
"""

import argparse

from argkit import qbaf, semantics


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--tau", type=float, default=0.5, help="root base score")
    parser.add_argument("--supporter", type=float, default=0.4, help="supporter base score")
    parser.add_argument("--steps", type=int, default=20)
    args = parser.parse_args()

    print("attacker_tau," + ",".join(semantics.SEMANTICS_IDS))
    for i in range(args.steps + 1):
        attacker_tau = i / args.steps
        tree = qbaf.single_claim("claim", args.tau)
        tree = qbaf.add_argument(tree, "a0", qbaf.ATTACK, "against", attacker_tau, "user-added")
        tree = qbaf.add_argument(tree, "a0", qbaf.SUPPORT, "for", args.supporter, "user-added")
        roots = [semantics.evaluate(tree, sid)["a0"] for sid in semantics.SEMANTICS_IDS]
        print(f"{attacker_tau:.2f}," + ",".join(f"{r:.6f}" for r in roots))


if __name__ == "__main__":
    main()
