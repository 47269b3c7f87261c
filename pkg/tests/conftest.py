import io
import random

import pytest
from reportlab.lib.pagesizes import letter
from reportlab.pdfgen import canvas

from argkit import qbaf


def simple_pdf(*page_texts, font="Helvetica", size=12) -> bytes:
    buf = io.BytesIO()
    c = canvas.Canvas(buf, pagesize=letter)
    for text in page_texts:
        c.setFont(font, size)
        c.drawString(72, 720, text)
        c.showPage()
    c.save()
    return buf.getvalue()


def make_worked_tree() -> qbaf.Qbaf:
    """root tau=0.5 with one attacker (0.8) and one supporter (0.4)."""
    tree = qbaf.single_claim("the claim", 0.5)
    tree = qbaf.add_argument(tree, "a0", qbaf.ATTACK, "evidence against", 0.8, "user-added")
    tree = qbaf.add_argument(tree, "a0", qbaf.SUPPORT, "evidence for", 0.4, "user-added")
    return tree


def build_full_tree(depth: int, breadth: int, rng: random.Random | None = None) -> qbaf.Qbaf:
    """Builder-shaped tree: every node above the leaf level has exactly
    `breadth` attackers and `breadth` supporters."""
    rng = rng or random.Random(0)
    tree = qbaf.single_claim("claim", rng.random())
    frontier = ["a0"]
    for _ in range(depth):
        nxt = []
        for node in frontier:
            for polarity in (qbaf.ATTACK, qbaf.SUPPORT):
                for _ in range(breadth):
                    tree = qbaf.add_argument(
                        tree, node, polarity, f"evidence {len(tree.arguments)}", rng.random(), "llm-generated"
                    )
                    nxt.append(tree.arguments[-1].id)
        frontier = nxt
    return tree


def random_tree(rng: random.Random, max_depth: int = 2, max_children: int = 4) -> qbaf.Qbaf:
    """Valid tree with random shape and scores (extremes included)."""

    def score() -> float:
        roll = rng.random()
        if roll < 0.05:
            return 0.0
        if roll < 0.1:
            return 1.0
        return rng.random()

    tree = qbaf.single_claim("claim", score())
    frontier = ["a0"]
    for _ in range(max_depth):
        nxt = []
        for node in frontier:
            for polarity in (qbaf.ATTACK, qbaf.SUPPORT):
                for _ in range(rng.randint(0, max_children)):
                    tree = qbaf.add_argument(
                        tree, node, polarity, f"evidence {len(tree.arguments)}", score(), "llm-generated"
                    )
                    nxt.append(tree.arguments[-1].id)
        frontier = nxt
    return tree


@pytest.fixture
def worked_tree() -> qbaf.Qbaf:
    return make_worked_tree()


@pytest.fixture
def seven_node_tree() -> qbaf.Qbaf:
    return build_full_tree(2, 1)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    rows = []
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance" in nodeid and getattr(report, "when", "call") == "call":
                rows.append((nodeid.split("::")[-1], status))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in sorted(rows):
        terminalreporter.write_line(f"{'PASS' if status == 'passed' else 'FAIL'}  {name}")
