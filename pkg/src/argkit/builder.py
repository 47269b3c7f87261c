"""Generates tree frameworks from a claim through the gateway.

Construction is breadth-first with attackers requested before supporters
at every node, so ids (`a0` for the claim, then `a{n}` in creation
order) are stable and transcripts over the mock backend are
byte-reproducible.  A failed gateway call aborts the whole build — no
half-built tree ever reaches a session — and the raised error carries
the completed prefix for diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import documents as docmod
from . import gateway, qbaf, semantics
from .documents import Document
from .gateway import BackendConfig, GatewayError
from .qbaf import Qbaf

DEPTH_CHOICES = (1, 2)
BREADTH_CHOICES = (1, 2, 3, 4)
DEFAULT_CONTEXT_BUDGET = 24_000


class InvalidConfigError(Exception):
    code = "invalid-config"


class BuildError(Exception):
    """Gateway failure mid-build; carries a partial-build report."""

    code = "build-failed"

    def __init__(self, message: str, partial: Qbaf | None, failed_node: str, stage: str):
        super().__init__(message)
        self.partial = partial
        self.failed_node = failed_node
        self.stage = stage

    def report(self) -> dict:
        return {
            "failed_node": self.failed_node,
            "stage": self.stage,
            "error": str(self),
            "completed_arguments": self.partial.argument_ids() if self.partial else [],
        }


@dataclass(frozen=True)
class GenerationConfig:
    """What to build and over which backend."""

    backend: BackendConfig
    semantics: str = semantics.DF_QUAD
    depth: int = 2
    breadth: int = 1
    document_ids: tuple[str, ...] = ()
    context_budget: int = DEFAULT_CONTEXT_BUDGET

    def __post_init__(self):
        if self.semantics not in semantics.SEMANTICS_IDS:
            raise InvalidConfigError(f"unknown semantics {self.semantics!r}")
        if self.depth not in DEPTH_CHOICES:
            raise InvalidConfigError(f"depth must be 1 or 2, got {self.depth!r}")
        if self.breadth not in BREADTH_CHOICES:
            raise InvalidConfigError(f"breadth must be in 1..4, got {self.breadth!r}")
        if self.context_budget < 1:
            raise InvalidConfigError("context_budget must be >= 1")


@dataclass(frozen=True)
class BuildResult:
    qbaf: Qbaf
    # id -> "elicited" | "defaulted": where each llm-sourced base score came from
    score_flags: dict[str, str] = field(default_factory=dict)
    new_ids: tuple[str, ...] = ()


def resolve_context(config: GenerationConfig, documents: list[Document]) -> str | None:
    by_id = {d.id: d for d in documents}
    missing = [i for i in config.document_ids if i not in by_id]
    if missing:
        raise InvalidConfigError(f"unresolved document ids: {missing}")
    selected = [by_id[i] for i in config.document_ids]
    if not selected:
        return None
    combined = docmod.combine_for_prompt(selected, config.context_budget)
    return combined or None


def _elicit(backend, text: str, context: str | None, parent: str | None,
            partial: Qbaf | None, node: str) -> gateway.ElicitedScore:
    try:
        return gateway.elicit_base_score(backend, text, context=context, parent=parent)
    except GatewayError as exc:
        raise BuildError(str(exc), partial, node, "elicit-score") from exc


def _generate(backend, text: str, polarity: str, count: int, context: str | None,
              partial: Qbaf, node: str) -> list[str]:
    try:
        return gateway.generate_arguments(backend, text, polarity, count, context=context)
    except GatewayError as exc:
        raise BuildError(str(exc), partial, node, f"generate-{polarity}ers") from exc


def build_qbaf(claim: str, config: GenerationConfig, documents: list[Document] | None = None) -> BuildResult:
    """Full tree for `claim` at the configured depth and breadth."""
    if not claim:
        raise InvalidConfigError("claim must be non-empty")
    context = resolve_context(config, documents or [])
    backend = gateway.make_backend(config.backend)
    flags: dict[str, str] = {}

    root_score = _elicit(backend, claim, context, None, None, "a0")
    flags["a0"] = "defaulted" if root_score.defaulted else "elicited"
    tree = qbaf.single_claim(claim, root_score.value)

    frontier = ["a0"]
    for _ in range(config.depth):
        next_frontier: list[str] = []
        for node in frontier:
            node_text = tree.argument(node).text
            for polarity in (qbaf.ATTACK, qbaf.SUPPORT):
                texts = _generate(backend, node_text, polarity, config.breadth, context, tree, node)
                for text in texts:
                    text = text[: qbaf.MAX_TEXT_CHARS]
                    score = _elicit(backend, text, context, node_text, tree, node)
                    tree = qbaf.add_argument(tree, node, polarity, text, score.value, "llm-generated")
                    new_id = tree.arguments[-1].id
                    flags[new_id] = "defaulted" if score.defaulted else "elicited"
                    next_frontier.append(new_id)
        frontier = next_frontier

    return BuildResult(qbaf=tree, score_flags=flags, new_ids=tuple(tree.argument_ids()))


def expand_argument(
    tree: Qbaf,
    target: str,
    polarity: str,
    config: GenerationConfig,
    documents: list[Document] | None = None,
) -> BuildResult:
    """One generated argument of the given polarity attached to `target`."""
    target_text = tree.argument(target).text  # raises UnknownArgumentError
    if qbaf.depth_of(tree, target) >= qbaf.MAX_DEPTH:
        raise qbaf.DepthLimitError(f"target {target!r} is already at depth {qbaf.MAX_DEPTH}")
    context = resolve_context(config, documents or [])
    backend = gateway.make_backend(config.backend)

    text = _generate(backend, target_text, polarity, 1, context, tree, target)[0][: qbaf.MAX_TEXT_CHARS]
    score = _elicit(backend, text, context, target_text, tree, target)
    expanded = qbaf.add_argument(tree, target, polarity, text, score.value, "llm-generated")
    new_id = expanded.arguments[-1].id
    flag = "defaulted" if score.defaulted else "elicited"
    return BuildResult(qbaf=expanded, score_flags={new_id: flag}, new_ids=(new_id,))
