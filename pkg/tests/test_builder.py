import pytest

from argkit import qbaf, semantics
from argkit.builder import BuildError, BuildResult, GenerationConfig, InvalidConfigError, build_qbaf, expand_argument
from argkit.documents import Document
from argkit.gateway import LIST_MARKER, SCORE_MARKER, BackendConfig


def config(depth=2, breadth=1, seed=7, script=(), **kw):
    return GenerationConfig(
        backend=BackendConfig(kind="mock", mock_seed=seed, mock_script=tuple(script)),
        depth=depth,
        breadth=breadth,
        **kw,
    )


def doc(markdown="Reference text.", ident="doc1", stamp="2026-01-01T00:00:00+00:00"):
    return Document(
        id=ident,
        filename=f"{ident}.pdf",
        markdown=markdown,
        page_count=1,
        byte_size=len(markdown),
        uploaded_at=stamp,
        extraction_empty=not markdown,
    )


class TestBuild:
    def test_depth2_breadth1_shape(self):
        result = build_qbaf("The claim under debate", config(depth=2, breadth=1))
        tree = result.qbaf
        assert len(tree.arguments) == 7
        assert sum(1 for e in tree.edges if e.polarity == qbaf.ATTACK) == 3
        assert sum(1 for e in tree.edges if e.polarity == qbaf.SUPPORT) == 3
        assert qbaf.validate(tree).ok

    @pytest.mark.parametrize("depth,breadth", [(d, b) for d in (1, 2) for b in (1, 2, 3, 4)])
    def test_node_count_law(self, depth, breadth):
        tree = build_qbaf("claim", config(depth=depth, breadth=breadth)).qbaf
        expected = 1 + 2 * breadth if depth == 1 else 1 + 2 * breadth + 4 * breadth * breadth
        assert len(tree.arguments) == expected
        assert qbaf.validate(tree).ok

    @pytest.mark.parametrize("depth,breadth", [(1, 2), (2, 3)])
    def test_equal_breadth_law(self, depth, breadth):
        tree = build_qbaf("claim", config(depth=depth, breadth=breadth)).qbaf
        for argument in tree.arguments:
            children = qbaf.children_of(tree, argument.id)
            if children:
                assert sum(1 for _, p in children if p == qbaf.ATTACK) == breadth
                assert sum(1 for _, p in children if p == qbaf.SUPPORT) == breadth

    def test_ids_in_creation_order(self):
        tree = build_qbaf("claim", config(depth=1, breadth=2)).qbaf
        assert tree.argument_ids() == ["a0", "a1", "a2", "a3", "a4"]
        assert tree.root == "a0"
        assert tree.argument("a0").provenance == "claim"

    def test_deterministic_for_fixed_seed(self):
        first = build_qbaf("claim", config(seed=7)).qbaf
        second = build_qbaf("claim", config(seed=7)).qbaf
        assert qbaf.to_json(first) == qbaf.to_json(second)

    def test_seed_changes_output(self):
        first = build_qbaf("claim", config(seed=7)).qbaf
        second = build_qbaf("claim", config(seed=8)).qbaf
        assert qbaf.to_json(first) != qbaf.to_json(second)

    def test_scores_elicited_and_in_range(self):
        result = build_qbaf("claim", config(depth=2, breadth=2))
        assert all(0.0 <= a.base_score <= 1.0 for a in result.qbaf.arguments)
        assert set(result.score_flags) == set(result.qbaf.argument_ids())
        assert set(result.score_flags.values()) == {"elicited"}

    def test_generated_provenance(self):
        tree = build_qbaf("claim", config(depth=1, breadth=1)).qbaf
        assert {a.provenance for a in tree.arguments if a.id != "a0"} == {"llm-generated"}

    def test_defaulted_scores_flagged(self):
        result = build_qbaf("claim", config(depth=1, breadth=1, script=[(SCORE_MARKER, "I cannot answer")]))
        assert all(a.base_score == 0.5 for a in result.qbaf.arguments)
        assert set(result.score_flags.values()) == {"defaulted"}

    def test_empty_claim_rejected(self):
        with pytest.raises(InvalidConfigError):
            build_qbaf("", config())

    def test_config_validation(self):
        with pytest.raises(InvalidConfigError):
            config(depth=3)
        with pytest.raises(InvalidConfigError):
            config(breadth=0)
        with pytest.raises(InvalidConfigError):
            config(breadth=5)
        with pytest.raises(InvalidConfigError):
            GenerationConfig(backend=BackendConfig(kind="mock"), semantics="bogus")

    def test_document_context_changes_generation(self):
        grounded_config = config(document_ids=("doc1",))
        plain = build_qbaf("claim", config()).qbaf
        grounded = build_qbaf("claim", grounded_config, [doc()]).qbaf
        assert qbaf.to_json(plain) != qbaf.to_json(grounded)

    def test_unresolved_document_id(self):
        with pytest.raises(InvalidConfigError):
            build_qbaf("claim", config(document_ids=("ghost",)), [doc()])

    def test_generation_failure_aborts_with_report(self):
        bad = config(script=[(LIST_MARKER, "free-form rambling, not a list")])
        with pytest.raises(BuildError) as exc:
            build_qbaf("claim", bad)
        report = exc.value.report()
        assert report["failed_node"] == "a0"
        assert report["stage"] == "generate-attackers"
        assert report["completed_arguments"] == ["a0"]

    def test_mid_build_failure_names_the_node(self):
        reference = build_qbaf("claim", config(depth=2, breadth=1)).qbaf
        a1_text = reference.argument("a1").text
        bad = config(depth=2, breadth=1, script=[(f"Target statement: {a1_text}", "not a list")])
        with pytest.raises(BuildError) as exc:
            build_qbaf("claim", bad)
        report = exc.value.report()
        assert report["failed_node"] == "a1"
        assert report["completed_arguments"] == ["a0", "a1", "a2"]


class TestExpand:
    def test_expand_adds_one(self):
        base = build_qbaf("claim", config(depth=2, breadth=1)).qbaf
        result = expand_argument(base, "a0", qbaf.SUPPORT, config())
        assert len(result.qbaf.arguments) == 8
        assert sum(1 for e in result.qbaf.edges if e.polarity == qbaf.SUPPORT) == 4
        assert result.new_ids == ("a7",)
        assert result.qbaf.argument("a7").provenance == "llm-generated"
        assert qbaf.validate(result.qbaf).ok
        assert len(base.arguments) == 7  # input untouched

    def test_expand_depth_limit(self):
        base = build_qbaf("claim", config(depth=2, breadth=1)).qbaf
        leaf = next(a.id for a in base.arguments if qbaf.depth_of(base, a.id) == 2)
        with pytest.raises(qbaf.DepthLimitError):
            expand_argument(base, leaf, qbaf.ATTACK, config())

    def test_expand_unknown_target(self):
        base = build_qbaf("claim", config(depth=1, breadth=1)).qbaf
        with pytest.raises(qbaf.UnknownArgumentError):
            expand_argument(base, "zzz", qbaf.ATTACK, config())

    def test_expand_deterministic(self):
        base = build_qbaf("claim", config(depth=2, breadth=1)).qbaf
        first = expand_argument(base, "a0", qbaf.SUPPORT, config())
        second = expand_argument(base, "a0", qbaf.SUPPORT, config())
        assert qbaf.to_json(first.qbaf) == qbaf.to_json(second.qbaf)

    def test_expanded_tree_evaluates(self):
        base = build_qbaf("claim", config(depth=2, breadth=1)).qbaf
        expanded = expand_argument(base, "a0", qbaf.ATTACK, config()).qbaf
        strengths = semantics.evaluate(expanded, "df-quad")
        assert set(strengths) == set(expanded.argument_ids())
