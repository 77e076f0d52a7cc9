"""Plumbing graphs, marked plumbing graphs, and Neumann rewriting moves.

A closed plumbing graph is an integer-framed forest on vertices 0..s-1. A
marked plumbing graph is a tree on vertices 0..s in which vertex 0 carries no
framing; deleting vertex 0 gives the ambient (closed) graph, whose vertices we
index 0..s-1 by shifting down by one.  The ambient graph of a marked tree may
be a forest.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from . import linalg
from .errors import LosesDefiniteness, NotApplicable, NotNegativeDefinite, SchemaError


def _normalize_edges(edges, n_vertices, allow_forest=True):
    seen = set()
    out = []
    for e in edges:
        if len(e) != 2:
            raise SchemaError(f"edge {e!r} must have two endpoints")
        i, j = int(e[0]), int(e[1])
        if i == j:
            raise SchemaError(f"loop edge at vertex {i}")
        if not (0 <= i < n_vertices and 0 <= j < n_vertices):
            raise SchemaError(f"edge {e!r} out of range for {n_vertices} vertices")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise SchemaError(f"duplicate edge {key}")
        seen.add(key)
        out.append(key)
    out.sort()
    # acyclicity via union-find
    parent = list(range(n_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in out:
        ri, rj = find(i), find(j)
        if ri == rj:
            raise SchemaError(f"edge ({i},{j}) closes a cycle")
        parent[ri] = rj
    if not allow_forest:
        roots = {find(v) for v in range(n_vertices)}
        if len(roots) > 1:
            raise SchemaError("marked plumbing graph must be connected")
    return tuple(out)


@dataclass(frozen=True)
class PlumbingGraph:
    """Integer-framed forest; vertex i carries framing ``framings[i]``."""

    framings: tuple[int, ...]
    edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "framings", tuple(int(m) for m in self.framings))
        object.__setattr__(
            self, "edges", _normalize_edges(self.edges, len(self.framings))
        )

    @property
    def s(self) -> int:
        return len(self.framings)

    @cached_property
    def adjacency_matrix(self) -> linalg.IntMatrix:
        """Intersection form: M_ii = framing, M_ij = 1 for an edge, else 0."""
        n = self.s
        m = [[0] * n for _ in range(n)]
        for i in range(n):
            m[i][i] = self.framings[i]
        for i, j in self.edges:
            m[i][j] = m[j][i] = 1
        return linalg.mat(m)

    @cached_property
    def adjacency_list(self) -> tuple[tuple[int, ...], ...]:
        nbrs = [[] for _ in range(self.s)]
        for i, j in self.edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        return tuple(tuple(sorted(x)) for x in nbrs)

    @cached_property
    def degree_vector(self) -> tuple[int, ...]:
        return tuple(len(n) for n in self.adjacency_list)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency_list[v]

    @cached_property
    def is_negative_definite(self) -> bool:
        # vacuously true for the empty graph (one blow-down of a single -1)
        return linalg.is_negative_definite(self.adjacency_matrix)

    @cached_property
    def determinant(self) -> int:
        return linalg.det(self.adjacency_matrix)


@dataclass(frozen=True)
class MarkedPlumbingGraph:
    """Plumbing tree with an unframed vertex 0; framings cover vertices 1..s.

    ``framings[i]`` is the framing of marked vertex i+1 (equivalently of
    ambient vertex i).
    """

    framings: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "framings", tuple(int(m) for m in self.framings))
        object.__setattr__(
            self,
            "edges",
            _normalize_edges(self.edges, len(self.framings) + 1, allow_forest=False),
        )

    @property
    def s(self) -> int:
        return len(self.framings)

    @cached_property
    def adjacency_list(self) -> tuple[tuple[int, ...], ...]:
        nbrs = [[] for _ in range(self.s + 1)]
        for i, j in self.edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        return tuple(tuple(sorted(x)) for x in nbrs)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency_list[v]

    @cached_property
    def marked_degrees(self) -> tuple[int, ...]:
        """Degree vector (delta_0, delta_1, ..., delta_s) in the marked tree."""
        return tuple(len(n) for n in self.adjacency_list)

    @cached_property
    def lambda_vector(self) -> tuple[int, ...]:
        """lambda in {0,1}^s: ambient vertices adjacent to the marked vertex."""
        lam = [0] * self.s
        for j in self.adjacency_list[0]:
            lam[j - 1] = 1
        return tuple(lam)

    @cached_property
    def ambient(self) -> PlumbingGraph:
        """Delete the marked vertex; ambient vertex i = marked vertex i+1."""
        edges = [(i - 1, j - 1) for i, j in self.edges if i != 0]
        return PlumbingGraph(self.framings, tuple(edges))

    def surgered(self, m0: int) -> PlumbingGraph:
        """Give the marked vertex framing m0; indices are kept verbatim."""
        return PlumbingGraph((int(m0),) + self.framings, self.edges)


def require_negative_definite(graph) -> None:
    g = graph.ambient if isinstance(graph, MarkedPlumbingGraph) else graph
    if not g.is_negative_definite:
        raise NotNegativeDefinite(
            "intersection form fails the alternating leading-minor test"
        )


# ---------------------------------------------------------------------------
# Neumann moves


@dataclass(frozen=True)
class NeumannMove:
    """A rewriting move.

    kind: 'A', 'B', 'C' on closed graphs; 'A', 'A0', 'B', 'B0' on marked ones.
    blow: 'up' or 'down'.
    location: blow-ups: A = the edge (i, j) being subdivided (A0: (0, j)),
    B = (i,) the vertex receiving a new leaf (B0: (0,)), C = ().
    Blow-downs: (v,), the -1-framed vertex to delete.
    """

    kind: str
    blow: str
    location: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in ("A", "A0", "B", "B0", "C"):
            raise SchemaError(f"unknown move kind {self.kind!r}")
        if self.blow not in ("up", "down"):
            raise SchemaError(f"blow must be 'up' or 'down', got {self.blow!r}")
        object.__setattr__(self, "location", tuple(int(x) for x in self.location))


@dataclass(frozen=True)
class MoveApplication:
    """Record of one applied move, carrying what spin^c transport needs."""

    before: object
    after: object
    move: NeumannMove
    relevant: tuple[int, ...]  # before-indices the move pattern touched
    new_index: int | None = None  # blow-up: index of the created vertex (after)
    removed_index: int | None = None  # blow-down: deleted vertex (before)

    def map_index(self, i: int) -> int | None:
        """Before-index -> after-index (None for the deleted vertex)."""
        if self.removed_index is None:
            return i
        if i == self.removed_index:
            return None
        return i if i < self.removed_index else i - 1

    @cached_property
    def ambient_application(self) -> "MoveApplication":
        """The closed move induced on ambient graphs by a marked move.

        A -> A, A0 -> B, B -> B, B0 -> C, with marked vertex v >= 1
        corresponding to ambient vertex v - 1.
        """
        if not isinstance(self.before, MarkedPlumbingGraph):
            raise NotApplicable("ambient_application applies to marked moves only")
        kind = {"A": "A", "A0": "B", "B": "B", "B0": "C"}[self.move.kind]
        amb = lambda v: v - 1  # noqa: E731
        if self.move.blow == "up":
            if self.move.kind == "A":
                loc = tuple(sorted(amb(v) for v in self.move.location))
            elif self.move.kind == "A0":
                loc = (amb(max(self.move.location)),)
            elif self.move.kind == "B":
                loc = (amb(self.move.location[0]),)
            else:  # B0
                loc = ()
            mv = NeumannMove(kind, "up", loc)
            return MoveApplication(
                before=self.before.ambient,
                after=self.after.ambient,
                move=mv,
                relevant=tuple(amb(v) for v in self.relevant if v != 0),
                new_index=amb(self.new_index),
            )
        mv = NeumannMove(kind, "down", (amb(self.removed_index),))
        return MoveApplication(
            before=self.before.ambient,
            after=self.after.ambient,
            move=mv,
            relevant=tuple(amb(v) for v in self.relevant if v != 0),
            removed_index=amb(self.removed_index),
        )


def _closed_apply(g: PlumbingGraph, move: NeumannMove) -> MoveApplication:
    s = g.s
    fr = list(g.framings)
    edges = list(g.edges)
    if move.blow == "up":
        if move.kind == "A":
            if len(move.location) != 2:
                raise NotApplicable("A blow-up needs an edge (i, j)")
            i, j = sorted(move.location)
            if (i, j) not in g.edges:
                raise NotApplicable(f"no edge ({i},{j}) to subdivide")
            edges.remove((i, j))
            fr[i] -= 1
            fr[j] -= 1
            fr.append(-1)
            edges += [(i, s), (j, s)]
            rel = (i, j)
        elif move.kind == "B":
            (i,) = move.location
            if not 0 <= i < s:
                raise NotApplicable(f"no vertex {i}")
            fr[i] -= 1
            fr.append(-1)
            edges.append((i, s))
            rel = (i,)
        elif move.kind == "C":
            fr.append(-1)
            rel = ()
        else:
            raise NotApplicable(f"move {move.kind} undefined on closed graphs")
        after = PlumbingGraph(tuple(fr), tuple(edges))
        if g.is_negative_definite and not after.is_negative_definite:
            raise LosesDefiniteness("blow-up left the negative definite cone")
        return MoveApplication(g, after, move, rel, new_index=s)

    # blow-down
    (v,) = move.location
    if not 0 <= v < s:
        raise NotApplicable(f"no vertex {v}")
    if fr[v] != -1:
        raise NotApplicable(f"vertex {v} is framed {fr[v]}, not -1")
    nbrs = g.neighbors(v)
    if move.kind == "A":
        if len(nbrs) != 2:
            raise NotApplicable("A blow-down needs a valence-2 vertex")
        i, j = nbrs
        if (min(i, j), max(i, j)) in g.edges:
            raise NotApplicable("blowing down would create a double edge")
        fr[i] += 1
        fr[j] += 1
        edges.append((min(i, j), max(i, j)))
        rel = (i, j)
    elif move.kind == "B":
        if len(nbrs) != 1:
            raise NotApplicable("B blow-down needs a leaf")
        (i,) = nbrs
        fr[i] += 1
        rel = (i,)
    elif move.kind == "C":
        if len(nbrs) != 0:
            raise NotApplicable("C blow-down needs an isolated vertex")
        rel = ()
    else:
        raise NotApplicable(f"move {move.kind} undefined on closed graphs")
    new_fr = [m for w, m in enumerate(fr) if w != v]

    def shift(x):
        return x if x < v else x - 1

    new_edges = [
        (min(shift(a), shift(b)), max(shift(a), shift(b)))
        for a, b in edges
        if v not in (a, b)
    ]
    after = PlumbingGraph(tuple(new_fr), tuple(new_edges))
    if g.is_negative_definite and not after.is_negative_definite:
        raise LosesDefiniteness("blow-down left the negative definite cone")
    return MoveApplication(g, after, move, rel, removed_index=v)


def _marked_apply(g: MarkedPlumbingGraph, move: NeumannMove) -> MoveApplication:
    s = g.s
    fr = list(g.framings)  # framings[i] <-> marked vertex i+1
    edges = list(g.edges)
    new_vertex = s + 1
    if move.blow == "up":
        if move.kind == "A":
            i, j = sorted(move.location)
            if i == 0:
                raise NotApplicable("use A0 for the marked edge")
            if (i, j) not in g.edges:
                raise NotApplicable(f"no edge ({i},{j}) to subdivide")
            edges.remove((i, j))
            fr[i - 1] -= 1
            fr[j - 1] -= 1
            fr.append(-1)
            edges += [(i, new_vertex), (j, new_vertex)]
            rel = (i, j)
        elif move.kind == "A0":
            i, j = sorted(move.location)
            if i != 0 or (0, j) not in g.edges:
                raise NotApplicable("A0 blow-up needs the marked edge (0, j)")
            edges.remove((0, j))
            fr[j - 1] -= 1
            fr.append(-1)
            edges += [(0, new_vertex), (j, new_vertex)]
            rel = (0, j)
        elif move.kind == "B":
            (i,) = move.location
            if not 1 <= i <= s:
                raise NotApplicable("B blow-up needs a framed vertex")
            fr[i - 1] -= 1
            fr.append(-1)
            edges.append((i, new_vertex))
            rel = (i,)
        elif move.kind == "B0":
            if move.location not in ((), (0,)):
                raise NotApplicable("B0 blow-up attaches at the marked vertex")
            fr.append(-1)
            edges.append((0, new_vertex))
            rel = (0,)
        else:
            raise NotApplicable(f"move {move.kind} undefined on marked graphs")
        after = MarkedPlumbingGraph(tuple(fr), tuple(edges))
        if g.ambient.is_negative_definite and not after.ambient.is_negative_definite:
            raise LosesDefiniteness("blow-up left the negative definite cone")
        return MoveApplication(g, after, move, rel, new_index=new_vertex)

    # blow-down
    (v,) = move.location
    if not 1 <= v <= s:
        raise NotApplicable("only framed vertices can be blown down")
    if fr[v - 1] != -1:
        raise NotApplicable(f"vertex {v} is framed {fr[v - 1]}, not -1")
    nbrs = g.neighbors(v)
    if move.kind == "A":
        if len(nbrs) != 2 or 0 in nbrs:
            raise NotApplicable("A blow-down needs two framed neighbors")
        i, j = nbrs
        if (min(i, j), max(i, j)) in g.edges:
            raise NotApplicable("blowing down would create a double edge")
        fr[i - 1] += 1
        fr[j - 1] += 1
        edges.append((min(i, j), max(i, j)))
        rel = (i, j)
    elif move.kind == "A0":
        if len(nbrs) != 2 or 0 not in nbrs:
            raise NotApplicable("A0 blow-down needs neighbors {0, j}")
        j = max(nbrs)
        if (0, j) in g.edges:
            raise NotApplicable("blowing down would create a double edge")
        fr[j - 1] += 1
        edges.append((0, j))
        rel = (0, j)
    elif move.kind == "B":
        if nbrs == (0,) or len(nbrs) != 1:
            raise NotApplicable("B blow-down needs a leaf on a framed vertex")
        (i,) = nbrs
        fr[i - 1] += 1
        rel = (i,)
    elif move.kind == "B0":
        if nbrs != (0,):
            raise NotApplicable("B0 blow-down needs a leaf on the marked vertex")
        rel = (0,)
    else:
        raise NotApplicable(f"move {move.kind} undefined on marked graphs")
    new_fr = [m for w, m in enumerate(fr, start=1) if w != v]

    def shift(x):
        return x if x < v else x - 1

    new_edges = [
        (min(shift(a), shift(b)), max(shift(a), shift(b)))
        for a, b in edges
        if v not in (a, b)
    ]
    after = MarkedPlumbingGraph(tuple(new_fr), tuple(new_edges))
    if g.ambient.is_negative_definite and not after.ambient.is_negative_definite:
        raise LosesDefiniteness("blow-down left the negative definite cone")
    return MoveApplication(g, after, move, rel, removed_index=v)


def apply_neumann(graph, move: NeumannMove) -> MoveApplication:
    """Apply a Neumann move, re-checking negative definiteness.

    Raises NotApplicable when the pattern does not match at the location and
    LosesDefiniteness when the rewritten graph fails the minor test.
    """
    if isinstance(graph, MarkedPlumbingGraph):
        return _marked_apply(graph, move)
    return _closed_apply(graph, move)


# ---------------------------------------------------------------------------
# Relabeling and automorphisms


def permute_vertices(g: PlumbingGraph, perm) -> PlumbingGraph:
    """Relabel: vertex i of g becomes vertex perm[i] of the result."""
    n = g.s
    if sorted(perm) != list(range(n)):
        raise SchemaError("not a permutation")
    fr = [0] * n
    for i, m in enumerate(g.framings):
        fr[perm[i]] = m
    edges = [(perm[a], perm[b]) for a, b in g.edges]
    return PlumbingGraph(tuple(fr), tuple(edges))


def isomorphisms(g: PlumbingGraph, h: PlumbingGraph):
    """All framing-preserving isomorphisms g -> h as permutation tuples.

    Backtracking over degree/framing-compatible assignments; fine for the
    small trees and forests this package works with.
    """
    n = g.s
    if n != h.s or sorted(g.framings) != sorted(h.framings):
        return []
    gd, hd = g.degree_vector, h.degree_vector
    if sorted(gd) != sorted(hd):
        return []
    hedges = set(h.edges)
    out = []
    assign = [-1] * n
    used = [False] * n

    def ok(v, target):
        if used[target]:
            return False
        if g.framings[v] != h.framings[target] or gd[v] != hd[target]:
            return False
        for w in g.neighbors(v):
            if assign[w] != -1:
                a, b = assign[w], target
                if (min(a, b), max(a, b)) not in hedges:
                    return False
        return True

    def rec(v):
        if v == n:
            out.append(tuple(assign))
            return
        for target in range(n):
            if ok(v, target):
                assign[v] = target
                used[target] = True
                rec(v + 1)
                assign[v] = -1
                used[target] = False

    rec(0)
    out.sort()
    return out


def automorphisms(g: PlumbingGraph):
    """All framing-preserving graph automorphisms, lexicographically sorted."""
    return isomorphisms(g, g)
