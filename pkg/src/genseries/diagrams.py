"""Consolidated frequency-domain perturbation expansion and tree diagrams.

The quadratic-cubic oscillator's frequency response Y(w) expands in the
two nonlinearity parameters as Y = sum eps1^i eps2^j Y_ij.  Substituting
the ansatz into the recursive response equation yields, per (i, j), a
sum of symmetrized convolution products of lower-order Y's.  Each such
product is a rooted tree: internal nodes are quadratic (two children) or
cubic (three children) vertices, leaves are linear-response factors, and
multiplicities come from multinomial counting of the symmetrized slots.

Trees are validated structurally: a term at (i, j) has i trivalent and j
tetravalent vertices, i+j solid propagator lines, i+2j+1 dashed linear
legs, is connected and acyclic, and conserves frequency labels at every
vertex.  Diagrams serialize to standard DOT graph text.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .errors import GenseriesError

LEAF = "leaf"
QUAD = "quad"
CUBIC = "cubic"

_CHILD_COUNT = {QUAD: 2, CUBIC: 3}


@dataclass(frozen=True)
class Tree:
    """Rooted expansion tree; children are kept in canonical sorted order."""

    kind: str
    children: tuple["Tree", ...] = ()

    def __post_init__(self):
        if self.kind == LEAF:
            if self.children:
                raise ValueError("leaves cannot have children")
        elif self.kind in _CHILD_COUNT:
            if len(self.children) != _CHILD_COUNT[self.kind]:
                raise ValueError(f"{self.kind} vertex needs "
                                 f"{_CHILD_COUNT[self.kind]} children")
        else:
            raise ValueError(f"unknown vertex kind {self.kind!r}")
        object.__setattr__(
            self, "children", tuple(sorted(self.children, key=Tree.sort_key))
        )

    def sort_key(self) -> str:
        return self.serialize()

    def serialize(self) -> str:
        if self.kind == LEAF:
            return "o"
        tag = "q" if self.kind == QUAD else "c"
        return tag + "(" + ",".join(c.serialize() for c in self.children) + ")"

    def order(self) -> tuple[int, int]:
        i = 1 if self.kind == QUAD else 0
        j = 1 if self.kind == CUBIC else 0
        for c in self.children:
            ci, cj = c.order()
            i += ci
            j += cj
        return (i, j)

    def vertex_count(self) -> int:
        own = 0 if self.kind == LEAF else 1
        return own + sum(c.vertex_count() for c in self.children)

    def leaf_count(self) -> int:
        if self.kind == LEAF:
            return 1
        return sum(c.leaf_count() for c in self.children)


LEAF_TREE = Tree(LEAF)


@dataclass(frozen=True)
class SourceTerm:
    """One symmetrized convolution product on the right-hand side of Y_ij.

    kind names the vertex the product feeds; parts are the (unordered)
    orders of the lower-order factors; coefficient is the multinomial
    count of equivalent slot orderings.
    """

    kind: str
    parts: tuple[tuple[int, int], ...]
    coefficient: int


@dataclass(frozen=True)
class ExpansionTerm:
    """One tree shape contributing to Y_ij with its multiplicity."""

    order: tuple[int, int]
    multiplicity: int
    tree: Tree

    def __post_init__(self):
        if self.tree.order() != self.order:
            raise GenseriesError(
                "tree epsilon grade does not match the term's order"
            )


def _partitions(total: tuple[int, int], parts: int):
    """Unordered splits of an (i, j) order into the given number of parts."""

    def rec(remaining: tuple[int, int], parts: int, floor: tuple[int, int]):
        if parts == 1:
            if remaining >= floor:
                yield (remaining,)
            return
        ri, rj = remaining
        for i in range(ri + 1):
            for j in range(rj + 1):
                head = (i, j)
                if head < floor:
                    continue
                for tail in rec((ri - i, rj - j), parts - 1, head):
                    yield (head,) + tail

    yield from rec(total, parts, (0, 0))


def _orderings(parts: tuple[tuple[int, int], ...]) -> int:
    """Number of distinct orderings of an unordered slot multiset."""
    from math import factorial

    n = factorial(len(parts))
    seen: dict[tuple[int, int], int] = {}
    for p in parts:
        seen[p] = seen.get(p, 0) + 1
    for count in seen.values():
        n //= factorial(count)
    return n


def vertex_sources(
    order: tuple[int, int], quadratic: bool = True, cubic: bool = True
) -> list[SourceTerm]:
    """Label-level right-hand side of the Y_ij equation.

    Each SourceTerm is one product of lower-order Y's with its
    multinomial coefficient; the nine lowest equations' printed
    coefficients are reproduced exactly.
    """
    i, j = order
    out: list[SourceTerm] = []
    if quadratic and i >= 1:
        for parts in _partitions((i - 1, j), 2):
            out.append(SourceTerm(QUAD, parts, _orderings(parts)))
    if cubic and j >= 1:
        for parts in _partitions((i, j - 1), 3):
            out.append(SourceTerm(CUBIC, parts, _orderings(parts)))
    return out


@lru_cache(maxsize=None)
def _expand(order: tuple[int, int], quadratic: bool, cubic: bool):
    if order == (0, 0):
        return (ExpansionTerm((0, 0), 1, LEAF_TREE),)
    merged: dict[Tree, int] = {}

    def add_products(kind: str, coeff: int, child_terms, tree_children):
        if not child_terms:
            tree = Tree(kind, tuple(tree_children))
            merged[tree] = merged.get(tree, 0) + coeff
            return
        for t in child_terms[0]:
            add_products(
                kind, coeff * t.multiplicity, child_terms[1:],
                tree_children + [t.tree],
            )

    for src in vertex_sources(order, quadratic, cubic):
        child_terms = [_expand(p, quadratic, cubic) for p in src.parts]
        add_products(src.kind, src.coefficient, child_terms, [])
    return tuple(
        ExpansionTerm(order, m, t)
        for t, m in sorted(merged.items(), key=lambda kv: kv[0].sort_key())
    )


def expand_shapes(
    order: tuple[int, int], quadratic: bool = True, cubic: bool = True
) -> list[ExpansionTerm]:
    """Tree shapes of Y_ij with multiplicities, canonically merged."""
    return list(_expand(tuple(order), quadratic, cubic))


def expand_consolidated(
    max_total_order: int, quadratic: bool = True, cubic: bool = True
) -> list[ExpansionTerm]:
    """All expansion terms with i + j up to the given total order."""
    if max_total_order < 0:
        raise ValueError("expansion order must be nonnegative")
    out: list[ExpansionTerm] = []
    for total in range(max_total_order + 1):
        for i in range(total, -1, -1):
            out.extend(expand_shapes((i, total - i), quadratic, cubic))
    return out


# ---------------------------------------------------------------------------
# diagrams


@dataclass(frozen=True)
class TreeDiagram:
    """Graph form of an expansion tree.

    vertices are (id, kind) pairs; solid_edges carry the propagator
    lines (child vertex towards its parent, root towards "out");
    dashed_edges tie linear-response leaves to their vertex.
    frequencies records each vertex's outgoing label as the sorted
    tuple of leaf indices beneath it.
    """

    vertices: tuple[tuple[str, str], ...]
    solid_edges: tuple[tuple[str, str], ...]
    dashed_edges: tuple[tuple[str, str], ...]
    frequencies: tuple[tuple[str, tuple[int, ...]], ...]

    def validate(self, order: tuple[int, int]) -> None:
        """Check the structural rules; raises on any violation."""
        i, j = order
        kinds = dict(self.vertices)
        quad_ids = [v for v, k in self.vertices if k == QUAD]
        cubic_ids = [v for v, k in self.vertices if k == CUBIC]
        degree: dict[str, int] = {v: 0 for v, _ in self.vertices}
        for a, b in self.solid_edges + self.dashed_edges:
            for end in (a, b):
                if end in degree:
                    degree[end] += 1
        problems: list[str] = []
        for v in quad_ids:
            if degree[v] != 3:
                problems.append(f"quadratic vertex {v} has degree {degree[v]}")
        for v in cubic_ids:
            if degree[v] != 4:
                problems.append(f"cubic vertex {v} has degree {degree[v]}")
        if len(quad_ids) != i or len(cubic_ids) != j:
            problems.append("vertex counts do not match the epsilon grade")
        if len(self.vertices) != i + j:
            problems.append("node count differs from i+j")
        if len(self.solid_edges) != i + j:
            problems.append("solid line count differs from i+j")
        if len(self.dashed_edges) != i + 2 * j + 1 and (i or j):
            problems.append("dashed branch count differs from i+2j+1")
        if self.vertices:
            # connectivity and acyclicity over all endpoints
            parent: dict[str, str] = {}

            def find(x: str) -> str:
                while parent.setdefault(x, x) != x:
                    parent[x] = parent[parent[x]]
                    x = parent[x]
                return x

            nodes: set[str] = set()
            for a, b in self.solid_edges + self.dashed_edges:
                nodes.update((a, b))
                ra, rb = find(a), find(b)
                if ra == rb:
                    problems.append(f"cycle through edge {a}--{b}")
                parent[ra] = rb
            roots = {find(n) for n in nodes}
            if len(roots) != 1:
                problems.append("diagram is not connected")
        freq = dict(self.frequencies)
        children: dict[str, list[str]] = {v: [] for v, _ in self.vertices}
        for a, b in self.solid_edges + self.dashed_edges:
            if b in children and a != "out":
                children[b].append(a)
        for v, _ in self.vertices:
            incoming: list[int] = []
            for c in children[v]:
                if c.startswith("u"):
                    incoming.append(int(c[1:]))
                else:
                    incoming.extend(freq[c])
            if tuple(sorted(incoming)) != freq[v]:
                problems.append(f"frequency labels not conserved at {v}")
        if problems:
            raise GenseriesError(
                "diagram fails structural rules: " + "; ".join(problems)
            )


def term_to_diagram(term: ExpansionTerm) -> TreeDiagram:
    """Build and validate the diagram of one expansion term."""
    vertices: list[tuple[str, str]] = []
    solid: list[tuple[str, str]] = []
    dashed: list[tuple[str, str]] = []
    freqs: list[tuple[str, tuple[int, ...]]] = []
    leaf_counter = [0]

    def walk(node: Tree, parent_id: str) -> tuple[int, ...]:
        if node.kind == LEAF:
            k = leaf_counter[0]
            leaf_counter[0] += 1
            dashed.append((f"u{k}", parent_id))
            return (k,)
        vid = f"v{len(vertices)}"
        vertices.append((vid, node.kind))
        solid.append((vid, parent_id))
        label: list[int] = []
        for c in node.children:
            label.extend(walk(c, vid))
        freqs.append((vid, tuple(sorted(label))))
        return tuple(label)

    if term.tree.kind != LEAF:
        walk(term.tree, "out")
    diagram = TreeDiagram(
        tuple(vertices), tuple(solid), tuple(dashed), tuple(freqs)
    )
    diagram.validate(term.order)
    return diagram


def render_dot(diagram: TreeDiagram, name: str = "G") -> str:
    """Serialize to DOT graph text with deterministic ordering."""
    lines = [f"graph {name} {{"]
    for vid, kind in diagram.vertices:
        color = "red" if kind == QUAD else "blue"
        lines.append(f'  {vid} [color={color}, style=filled, shape=circle];')
    for a, b in diagram.solid_edges:
        lines.append(f"  {a} -- {b} [style=solid];")
    for a, b in diagram.dashed_edges:
        lines.append(f"  {a} -- {b} [style=dashed];")
    lines.append("}")
    return "\n".join(lines) + "\n"
