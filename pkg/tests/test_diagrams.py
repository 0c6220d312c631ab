"""Perturbation-expansion trees: equations, shapes, multiplicities, diagrams."""

from __future__ import annotations

import pytest

from genseries import (
    Tree,
    expand_consolidated,
    expand_shapes,
    render_dot,
    term_to_diagram,
    vertex_sources,
)
from genseries.diagrams import CUBIC, LEAF, LEAF_TREE, QUAD

# one equation per epsilon grade with total order 1..3; values are the
# coefficient lists of the right-hand-side products and the tree
# multiplicities, both as sorted multisets
EQUATION_COEFFS = {
    (1, 0): [1],
    (0, 1): [1],
    (2, 0): [2],
    (1, 1): [2, 3],
    (0, 2): [3],
    (3, 0): [1, 2],
    (2, 1): [2, 2, 3, 3],
    (1, 2): [1, 2, 3, 6],
    (0, 3): [3, 3],
}
TREE_MULTIPLICITIES = {
    (1, 0): [1],
    (0, 1): [1],
    (2, 0): [2],
    (1, 1): [2, 3],
    (0, 2): [3],
    (3, 0): [1, 4],
    (2, 1): [2, 3, 4, 6, 6],
    (1, 2): [1, 6, 6, 6, 9],
    (0, 3): [3, 9],
}


def quad(*children) -> Tree:
    return Tree(QUAD, children)


def cubic(*children) -> Tree:
    return Tree(CUBIC, children)


O = LEAF_TREE


def test_all_nine_equation_coefficient_lists():
    for order, expected in EQUATION_COEFFS.items():
        got = sorted(s.coefficient for s in vertex_sources(order))
        assert got == expected, order


def test_source_parts_sum_to_lower_orders():
    for order in EQUATION_COEFFS:
        i, j = order
        for s in vertex_sources(order):
            parts_i = sum(p[0] for p in s.parts)
            parts_j = sum(p[1] for p in s.parts)
            if s.kind == QUAD:
                assert len(s.parts) == 2
                assert (parts_i, parts_j) == (i - 1, j)
            else:
                assert len(s.parts) == 3
                assert (parts_i, parts_j) == (i, j - 1)


def test_all_nine_tree_multiplicity_multisets():
    for order, expected in TREE_MULTIPLICITIES.items():
        got = sorted(t.multiplicity for t in expand_shapes(order))
        assert got == expected, order


def test_shapes_are_distinct_and_canonical():
    for order in TREE_MULTIPLICITIES:
        keys = [t.tree.serialize() for t in expand_shapes(order)]
        assert len(keys) == len(set(keys))
        for t in expand_shapes(order):
            assert t.tree.order() == order


def test_known_shape_serializations():
    assert quad(O, quad(O, O)).serialize() == "q(o,q(o,o))"
    shapes = {t.tree.serialize() for t in expand_shapes((2, 1))}
    assert "c(o,o,q(o,q(o,o)))" in shapes
    # children sort canonically regardless of construction order
    assert cubic(quad(O, O), O, O) == cubic(O, O, quad(O, O))


def test_order_zero_is_the_bare_leaf():
    (term,) = expand_shapes((0, 0))
    assert term.tree == O
    assert term.multiplicity == 1
    assert term.tree.vertex_count() == 0


def test_consolidated_listing_covers_grid():
    terms = expand_consolidated(3)
    orders = {t.order for t in terms}
    assert orders == {(0, 0)} | set(TREE_MULTIPLICITIES)
    total = sum(t.multiplicity for t in terms if t.order == (2, 1))
    assert total == 21


def test_tree_construction_rules():
    with pytest.raises(ValueError):
        Tree(LEAF, (O,))
    with pytest.raises(ValueError):
        Tree(QUAD, (O,))
    with pytest.raises(ValueError):
        Tree("pentic", (O, O, O, O, O))


def test_leaf_and_vertex_counting():
    t = cubic(O, O, quad(O, quad(O, O)))
    assert t.vertex_count() == 3
    assert t.leaf_count() == 5
    assert t.order() == (2, 1)


def test_every_generated_diagram_validates():
    for order in TREE_MULTIPLICITIES:
        for term in expand_shapes(order):
            diagram = term_to_diagram(term)
            diagram.validate(order)  # raises on any structural violation


def test_diagram_counts_match_structural_rules():
    order = (2, 1)
    for term in expand_shapes(order):
        d = term_to_diagram(term)
        i, j = order
        assert len(d.vertices) == i + j
        assert len(d.solid_edges) == i + j
        assert len(d.dashed_edges) == i + 2 * j + 1
        kinds = [k for _, k in d.vertices]
        assert kinds.count(QUAD) == i and kinds.count(CUBIC) == j


def test_tampered_diagram_fails_validation():
    from genseries import GenseriesError
    from genseries.diagrams import TreeDiagram

    (term,) = expand_shapes((1, 0))
    d = term_to_diagram(term)
    broken = TreeDiagram(
        d.vertices, d.solid_edges, d.dashed_edges[:-1], d.frequencies
    )
    with pytest.raises(GenseriesError):
        broken.validate((1, 0))


def test_dot_rendering_mentions_every_vertex():
    (term,) = [t for t in expand_shapes((1, 1)) if t.multiplicity == 2]
    text = render_dot(term_to_diagram(term), name="Y11a")
    assert text.startswith("graph Y11a {")
    assert text.rstrip().endswith("}")
    assert "style=dashed" in text
    for vid, _ in term_to_diagram(term).vertices:
        assert vid in text
