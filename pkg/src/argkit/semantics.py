"""Gradual semantics: final confidence for every argument in a framework.

Three update rules are supported, keyed by id:

* ``df-quad``      — aggregate attacker and supporter strengths separately
                     with F(v1..vn) = 1 - prod(1 - vi), then move the base
                     score toward 0 or 1 by the imbalance.
* ``euler``        — sigma = 1 - (1 - tau^2) / (1 + tau * e^E) with energy
                     E = sum(supporters) - sum(attackers).
* ``quadratic-energy`` — sigma = tau - tau*h(-E) + (1-tau)*h(E) with
                     h(x) = max(0,x)^2 / (1 + max(0,x)^2).

`evaluate` walks the tree bottom-up and is exact in one pass;
`evaluate_iterative` is the independent fixed-point oracle: synchronous
sweeps from the base scores, which on a tree of depth d settle after
d+1 iterations.

All rules are symmetric in the children.  To make that hold bitwise in
floating point, child strengths are sorted before folding and energies
use math.fsum, so any child ordering produces identical results.
"""

from __future__ import annotations

import json
import math
from typing import Iterable

from . import qbaf
from .qbaf import InvariantError, Qbaf

DF_QUAD = "df-quad"
EULER = "euler"
QUADRATIC_ENERGY = "quadratic-energy"
SEMANTICS_IDS = (DF_QUAD, EULER, QUADRATIC_ENERGY)

# |E| <= 8 at the structural limits; the clamp is defence in depth only.
_ENERGY_CLAMP = 50.0

StrengthMap = dict[str, float]


class SemanticsError(Exception):
    code = "semantics-error"


class UnknownSemanticsError(SemanticsError):
    code = "unknown-semantics"


class OutOfRangeError(SemanticsError):
    code = "out-of-range"


class NonConvergenceError(SemanticsError):
    code = "non-convergence"


def _check_unit(name: str, value: float):
    if not 0.0 <= value <= 1.0:
        raise OutOfRangeError(f"{name} {value!r} outside [0,1]")


def dfquad_aggregate(values: Iterable[float]) -> float:
    """F(v1..vn) = 1 - prod(1 - vi); empty input aggregates to 0."""
    vs = sorted(values)
    for v in vs:
        _check_unit("aggregate input", v)
    remainder = 1.0
    for v in vs:
        remainder *= 1.0 - v
    return 1.0 - remainder


def dfquad_combine(tau: float, va: float, vs: float) -> float:
    """Shift tau toward 0 (attack surplus) or 1 (support surplus)."""
    _check_unit("tau", tau)
    _check_unit("va", va)
    _check_unit("vs", vs)
    if va >= vs:
        return tau - tau * (va - vs)
    return tau + (1.0 - tau) * (vs - va)


def euler_strength(tau: float, energy: float) -> float:
    _check_unit("tau", tau)
    energy = max(-_ENERGY_CLAMP, min(_ENERGY_CLAMP, energy))
    return 1.0 - (1.0 - tau * tau) / (1.0 + tau * math.exp(energy))


def qe_strength(tau: float, energy: float) -> float:
    _check_unit("tau", tau)

    def h(x: float) -> float:
        x = max(0.0, x)
        return x * x / (1.0 + x * x)

    return tau - tau * h(-energy) + (1.0 - tau) * h(energy)


def _update(semantics: str, tau: float, attackers: list[float], supporters: list[float]) -> float:
    # childless nodes keep their base score exactly, for every rule
    if not attackers and not supporters:
        return tau
    if semantics == DF_QUAD:
        return dfquad_combine(tau, dfquad_aggregate(attackers), dfquad_aggregate(supporters))
    energy = math.fsum(sorted(supporters)) - math.fsum(sorted(attackers))
    if semantics == EULER:
        return euler_strength(tau, energy)
    if semantics == QUADRATIC_ENERGY:
        return qe_strength(tau, energy)
    raise UnknownSemanticsError(f"unknown semantics {semantics!r}")


def _check_inputs(qb: Qbaf, semantics: str):
    if semantics not in SEMANTICS_IDS:
        raise UnknownSemanticsError(f"unknown semantics {semantics!r}")
    report = qbaf.validate(qb)
    if not report.ok:
        raise InvariantError(report)


def evaluate(qb: Qbaf, semantics: str) -> StrengthMap:
    """Exact bottom-up (post-order) evaluation of every argument."""
    _check_inputs(qb, semantics)
    base = {a.id: a.base_score for a in qb.arguments}
    children = {a.id: qbaf.children_of(qb, a.id) for a in qb.arguments}
    strengths: StrengthMap = {}

    def visit(node: str) -> float:
        attackers = [visit(c) for c, pol in children[node] if pol == qbaf.ATTACK]
        supporters = [visit(c) for c, pol in children[node] if pol == qbaf.SUPPORT]
        strengths[node] = _update(semantics, base[node], attackers, supporters)
        return strengths[node]

    visit(qb.root)
    return strengths


def evaluate_iterative(
    qb: Qbaf,
    semantics: str,
    epsilon: float = 1e-12,
    max_iters: int = 10,
) -> StrengthMap:
    """Fixed-point oracle: synchronous sweeps from the base scores.

    Stops at the first sweep whose largest componentwise change is below
    `epsilon`; raises NonConvergenceError if `max_iters` sweeps were not
    enough (only possible when max_iters < depth + 1 on a tree).
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    _check_inputs(qb, semantics)

    base = {a.id: a.base_score for a in qb.arguments}
    children = {a.id: qbaf.children_of(qb, a.id) for a in qb.arguments}
    current = dict(base)
    for _ in range(max_iters):
        nxt = {}
        for node in current:
            attackers = [current[c] for c, pol in children[node] if pol == qbaf.ATTACK]
            supporters = [current[c] for c, pol in children[node] if pol == qbaf.SUPPORT]
            nxt[node] = _update(semantics, base[node], attackers, supporters)
        delta = max(abs(nxt[n] - current[n]) for n in current)
        current = nxt
        if delta < epsilon:
            return current
    raise NonConvergenceError(f"no fixed point within {max_iters} iterations (epsilon={epsilon})")


def to_json_obj(semantics: str, strengths: StrengthMap) -> dict:
    return {"semantics": semantics, "strengths": {k: strengths[k] for k in sorted(strengths)}}


def to_json(semantics: str, strengths: StrengthMap) -> bytes:
    """Canonical strength-map bytes: sorted ids, shortest round-trip floats."""
    return json.dumps(to_json_obj(semantics, strengths), ensure_ascii=False, separators=(",", ":")).encode("utf-8")
