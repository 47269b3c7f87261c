"""Tree-shaped quantitative bipolar argumentation frameworks.

A framework is a set of arguments with attack/support edges and a base
score per argument, restricted to a tree rooted at the claim.  Values are
immutable: every mutation returns a new framework and leaves its input
untouched, so frameworks can be shared freely between threads.

Depth is zero-indexed here (the claim sits at depth 0); user-facing text
that counts levels from 1 must add one.  The hard structural cap is
depth 2, i.e. three levels.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from typing import Iterable

ID_PATTERN = re.compile(r"^[A-Za-z0-9_-]{1,64}$")
MAX_TEXT_CHARS = 2000
MAX_DEPTH = 2
SCHEMA_VERSION = 1

ATTACK = "attack"
SUPPORT = "support"
POLARITIES = (ATTACK, SUPPORT)

PROVENANCES = ("llm-generated", "user-added", "chat-derived", "claim")


class QbafError(Exception):
    """Base class for framework errors; `code` is a stable machine tag."""

    code = "qbaf-error"


class UnknownArgumentError(QbafError):
    code = "unknown-argument"


class DepthLimitError(QbafError):
    code = "depth-limit-exceeded"


class InvalidScoreError(QbafError):
    code = "invalid-score"


class MalformedJsonError(QbafError):
    code = "malformed-json"


class SchemaError(QbafError):
    code = "schema-violation"


class InvariantError(QbafError):
    code = "invariant-violation"

    def __init__(self, report: ValidationReport):
        super().__init__("; ".join(v.message for v in report.violations))
        self.report = report


@dataclass(frozen=True)
class Argument:
    """One node: a claim or a piece of evidence, with intrinsic confidence."""

    id: str
    text: str
    base_score: float
    provenance: str

    def __post_init__(self):
        if not ID_PATTERN.match(self.id):
            raise ValueError(f"bad argument id {self.id!r}")
        if not self.text:
            raise ValueError(f"argument {self.id}: empty text")
        if len(self.text) > MAX_TEXT_CHARS:
            raise ValueError(f"argument {self.id}: text longer than {MAX_TEXT_CHARS} chars")
        if not isinstance(self.base_score, (int, float)) or isinstance(self.base_score, bool):
            raise ValueError(f"argument {self.id}: base_score must be a number")
        if not 0.0 <= float(self.base_score) <= 1.0:
            raise ValueError(f"argument {self.id}: base_score {self.base_score} outside [0,1]")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"argument {self.id}: unknown provenance {self.provenance!r}")
        object.__setattr__(self, "base_score", float(self.base_score))


@dataclass(frozen=True)
class Edge:
    """source attacks/supports target (child points at its parent)."""

    source: str
    target: str
    polarity: str

    def __post_init__(self):
        if self.source == self.target:
            raise ValueError(f"self-edge on {self.source!r}")
        if self.polarity not in POLARITIES:
            raise ValueError(f"unknown polarity {self.polarity!r}")


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> set[str]:
        return {v.code for v in self.violations}


@dataclass(frozen=True, eq=False)
class Qbaf:
    """Arguments + edges + designated claim root.

    Construction does not enforce the tree invariants (so that invalid
    inputs can be represented and reported by :func:`validate`); the
    element types still enforce their local ones.  Equality is
    structural and order-insensitive: two frameworks are equal iff they
    have the same root, argument set and edge set.  Iteration order of
    ``arguments`` and ``edges`` is the stored (insertion) order.
    """

    root: str
    arguments: tuple[Argument, ...]
    edges: tuple[Edge, ...]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Qbaf):
            return NotImplemented
        return (
            self.root == other.root
            and set(self.arguments) == set(other.arguments)
            and set(self.edges) == set(other.edges)
        )

    def argument_ids(self) -> list[str]:
        return [a.id for a in self.arguments]

    def has_argument(self, argument_id: str) -> bool:
        return any(a.id == argument_id for a in self.arguments)

    def argument(self, argument_id: str) -> Argument:
        for a in self.arguments:
            if a.id == argument_id:
                return a
        raise UnknownArgumentError(f"no argument {argument_id!r}")

    def parent_edge(self, argument_id: str) -> Edge | None:
        for e in self.edges:
            if e.source == argument_id:
                return e
        return None


def single_claim(text: str, base_score: float) -> Qbaf:
    """Smallest legal framework: just the claim, id ``a0``."""
    return Qbaf(root="a0", arguments=(Argument("a0", text, base_score, "claim"),), edges=())


def validate(qbaf: Qbaf) -> ValidationReport:
    """Check the structural invariants; violations are data, not failures."""
    violations: list[Violation] = []
    ids = [a.id for a in qbaf.arguments]
    id_set = set(ids)

    dupes = sorted({i for i in ids if ids.count(i) > 1})
    if dupes:
        violations.append(Violation("duplicate-id", f"duplicate argument ids: {dupes}", tuple(dupes)))
    if qbaf.root not in id_set:
        violations.append(Violation("unknown-root", f"root {qbaf.root!r} is not an argument", (qbaf.root,)))

    for e in qbaf.edges:
        missing = [x for x in (e.source, e.target) if x not in id_set]
        if missing:
            violations.append(
                Violation("dangling-edge", f"edge {e.source}->{e.target} references missing ids {missing}", tuple(missing))
            )

    pairs = {}
    for e in qbaf.edges:
        pairs.setdefault((e.source, e.target), set()).add(e.polarity)
    for (s, t), pols in sorted(pairs.items()):
        if len(pols) > 1:
            violations.append(
                Violation("polarity-disjointness", f"pair ({s},{t}) is both attack and support", (s, t))
            )

    out_degree = {i: 0 for i in id_set}
    for e in qbaf.edges:
        if e.source in out_degree:
            out_degree[e.source] += 1
    tree_offenders = []
    if qbaf.root in id_set and out_degree[qbaf.root] > 0:
        tree_offenders.append(qbaf.root)
    for i in ids:
        if i != qbaf.root and out_degree[i] != 1:
            tree_offenders.append(i)

    # reachability from the root via child edges; cycles never reach it
    children: dict[str, list[str]] = {}
    for e in qbaf.edges:
        children.setdefault(e.target, []).append(e.source)
    depth: dict[str, int] = {}
    if qbaf.root in id_set:
        frontier = [qbaf.root]
        depth[qbaf.root] = 0
        while frontier:
            nxt = []
            for node in frontier:
                for child in children.get(node, []):
                    if child in depth or child not in id_set:
                        continue
                    depth[child] = depth[node] + 1
                    nxt.append(child)
            frontier = nxt
        unreachable = [i for i in ids if i not in depth]
        tree_offenders.extend(i for i in unreachable if i not in tree_offenders)
    if tree_offenders:
        violations.append(
            Violation(
                "not-a-tree",
                "graph is not a tree rooted at the claim (offenders: " + ", ".join(tree_offenders) + ")",
                tuple(tree_offenders),
            )
        )

    too_deep = sorted(i for i, d in depth.items() if d > MAX_DEPTH)
    if too_deep:
        violations.append(
            Violation("depth-exceeded", f"arguments deeper than {MAX_DEPTH}: {too_deep}", tuple(too_deep))
        )

    return ValidationReport(tuple(violations))


def depth_of(qbaf: Qbaf, argument_id: str) -> int:
    """Distance from the root; the root itself is at depth 0."""
    if not qbaf.has_argument(argument_id):
        raise UnknownArgumentError(f"no argument {argument_id!r}")
    depth = 0
    current = argument_id
    seen = {current}
    while current != qbaf.root:
        edge = qbaf.parent_edge(current)
        if edge is None:
            raise QbafError(f"argument {argument_id!r} is not connected to the root")
        current = edge.target
        if current in seen:
            raise QbafError(f"cycle encountered walking up from {argument_id!r}")
        seen.add(current)
        depth += 1
    return depth


def children_of(qbaf: Qbaf, argument_id: str) -> list[tuple[str, str]]:
    """(child id, polarity) pairs in edge insertion order."""
    if not qbaf.has_argument(argument_id):
        raise UnknownArgumentError(f"no argument {argument_id!r}")
    return [(e.source, e.polarity) for e in qbaf.edges if e.target == argument_id]


def next_argument_id(qbaf: Qbaf) -> str:
    """Fresh ``a{n}`` id, one past the highest existing a-number."""
    highest = -1
    for a in qbaf.arguments:
        m = re.fullmatch(r"a(\d+)", a.id)
        if m:
            highest = max(highest, int(m.group(1)))
    return f"a{highest + 1}"


def add_argument(
    qbaf: Qbaf,
    parent: str,
    polarity: str,
    text: str,
    base_score: float,
    provenance: str,
) -> Qbaf:
    """Attach one fresh argument under `parent` with the given polarity."""
    if not qbaf.has_argument(parent):
        raise UnknownArgumentError(f"unknown parent {parent!r}")
    if depth_of(qbaf, parent) >= MAX_DEPTH:
        raise DepthLimitError(f"parent {parent!r} is already at depth {MAX_DEPTH}")
    if not isinstance(base_score, (int, float)) or isinstance(base_score, bool) or not 0.0 <= base_score <= 1.0:
        raise InvalidScoreError(f"base_score {base_score!r} outside [0,1]")
    new_id = next_argument_id(qbaf)
    new_argument = Argument(new_id, text, base_score, provenance)
    new_edge = Edge(source=new_id, target=parent, polarity=polarity)
    return Qbaf(root=qbaf.root, arguments=qbaf.arguments + (new_argument,), edges=qbaf.edges + (new_edge,))


def set_base_score(qbaf: Qbaf, argument_id: str, value: float) -> Qbaf:
    """Replace one base score; structure and everything else unchanged."""
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not 0.0 <= value <= 1.0:
        raise InvalidScoreError(f"base_score {value!r} outside [0,1]")
    if not qbaf.has_argument(argument_id):
        raise UnknownArgumentError(f"no argument {argument_id!r}")
    updated = tuple(
        replace(a, base_score=float(value)) if a.id == argument_id else a for a in qbaf.arguments
    )
    return Qbaf(root=qbaf.root, arguments=updated, edges=qbaf.edges)


def to_json_obj(qbaf: Qbaf) -> dict:
    """Canonical JSON object: sorted ids, sorted edges, fixed field order."""
    return {
        "version": SCHEMA_VERSION,
        "root": qbaf.root,
        "arguments": [
            {"id": a.id, "text": a.text, "base_score": a.base_score, "provenance": a.provenance}
            for a in sorted(qbaf.arguments, key=lambda a: a.id)
        ],
        "edges": [
            {"source": e.source, "target": e.target, "polarity": e.polarity}
            for e in sorted(qbaf.edges, key=lambda e: (e.source, e.target, e.polarity))
        ],
    }


def to_json(qbaf: Qbaf) -> bytes:
    return json.dumps(to_json_obj(qbaf), ensure_ascii=False, separators=(",", ":")).encode("utf-8")


_ARGUMENT_FIELDS = {"id", "text", "base_score", "provenance"}
_EDGE_FIELDS = {"source", "target", "polarity"}


def _require(condition: bool, message: str):
    if not condition:
        raise SchemaError(message)


def from_json_obj(doc) -> Qbaf:
    _require(isinstance(doc, dict), "top level must be an object")
    extra = set(doc) - {"version", "root", "arguments", "edges"}
    _require(not extra, f"unknown top-level fields: {sorted(extra)}")
    for field in ("version", "root", "arguments", "edges"):
        _require(field in doc, f"missing field {field!r}")
    _require(doc["version"] == SCHEMA_VERSION, f"unsupported version {doc['version']!r}")
    _require(isinstance(doc["root"], str), "root must be a string")
    _require(isinstance(doc["arguments"], list), "arguments must be a list")
    _require(isinstance(doc["edges"], list), "edges must be a list")

    arguments = []
    for entry in doc["arguments"]:
        _require(isinstance(entry, dict), "argument entries must be objects")
        _require(set(entry) == _ARGUMENT_FIELDS, f"argument entry fields must be {sorted(_ARGUMENT_FIELDS)}")
        _require(isinstance(entry["id"], str), "argument id must be a string")
        _require(isinstance(entry["text"], str), "argument text must be a string")
        _require(
            isinstance(entry["base_score"], (int, float)) and not isinstance(entry["base_score"], bool),
            f"argument {entry['id']!r}: base_score must be a number",
        )
        _require(isinstance(entry["provenance"], str), "argument provenance must be a string")
        try:
            arguments.append(Argument(entry["id"], entry["text"], entry["base_score"], entry["provenance"]))
        except ValueError as exc:
            raise SchemaError(str(exc)) from exc

    edges = []
    for entry in doc["edges"]:
        _require(isinstance(entry, dict), "edge entries must be objects")
        _require(set(entry) == _EDGE_FIELDS, f"edge entry fields must be {sorted(_EDGE_FIELDS)}")
        _require(all(isinstance(entry[k], str) for k in _EDGE_FIELDS), "edge fields must be strings")
        try:
            edges.append(Edge(entry["source"], entry["target"], entry["polarity"]))
        except ValueError as exc:
            raise SchemaError(str(exc)) from exc

    qbaf = Qbaf(root=doc["root"], arguments=tuple(arguments), edges=tuple(edges))
    report = validate(qbaf)
    if not report.ok:
        raise InvariantError(report)
    return qbaf


def from_json(data: bytes | str) -> Qbaf:
    """Parse and fully validate; inverse of :func:`to_json`."""
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedJsonError(f"not UTF-8: {exc}") from exc
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise MalformedJsonError(f"not JSON: {exc}") from exc
    return from_json_obj(doc)
