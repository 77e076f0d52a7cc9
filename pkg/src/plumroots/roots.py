"""Superlevel sets of h_U and the (bi)graded roots built from their components.

Everything here is a finite window into an infinite object: for a negative
definite graph the grading h_U(K) = (K^T M^{-1} K + s)/4 is bounded above on a
spin^c coset, and the superlevel sets {h_U >= h} grow as h drops in steps of
two.  Nodes of the graded root are connected components (adjacency K ~ K +-
2Me_i), edges are containments between consecutive levels.  Bigraded roots do
the same for pairs (h_U, h_V) on a marked graph.  Points are kept in
x-coordinates, K = rep + 2Mx, so different classes never mix.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import networkx as nx

from . import linalg
from .errors import GradingParity, InsufficientDepth, NonAutomorphism
from .graphs import MarkedPlumbingGraph, PlumbingGraph, permute_vertices
from .spinc import SpincClass, spinc_class


class UnionFind:
    def __init__(self):
        self.parent = {}
        self.rank = {}

    def add(self, item):
        if item not in self.parent:
            self.parent[item] = item
            self.rank[item] = 0

    def find(self, item):
        root = item
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[item] != root:
            self.parent[item], item = root, self.parent[item]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return ra


@lru_cache(maxsize=None)
def _quad_data(graph):
    m = graph.adjacency_matrix
    neg_m = tuple(tuple(-x for x in row) for row in m)
    m_inv = tuple(tuple(row) for row in linalg.invert([list(r) for r in m]))
    return neg_m, m_inv


def h_u(graph, k) -> Fraction:
    """h_U(K) = (K^T M^{-1} K + s)/4."""
    if graph.s == 0:
        return Fraction(0)
    _, m_inv = _quad_data(graph)
    return Fraction(linalg.quadratic_value(m_inv, list(k)) + graph.s, 4)


def h_v(marked, k) -> Fraction:
    """h_V(K) = h_U(K + 2λ) for the meridian class shift."""
    lam = marked.lambda_vector
    shifted = tuple(k[i] + 2 * lam[i] for i in range(len(lam)))
    return h_u(marked.ambient, shifted)


def alexander(marked, k) -> Fraction:
    """A(K) = (h_U(K) − h_V(K)) / 2."""
    return (h_u(marked.ambient, k) - h_v(marked, k)) / 2


def _center(graph, rep):
    """Grading maximum of the coset sits at c = −M^{-1} rep / 2 in x-space."""
    _, m_inv = _quad_data(graph)
    s = graph.s
    return tuple(
        -Fraction(sum(m_inv[i][j] * rep[j] for j in range(s)), 1) / 2
        for i in range(s)
    )


def char_of(graph, rep, x):
    """The characteristic vector rep + 2Mx of the lattice point x."""
    m = graph.adjacency_matrix
    s = graph.s
    return tuple(rep[i] + 2 * sum(m[i][j] * x[j] for j in range(s)) for i in range(s))


def x_of(graph, rep, k):
    """Inverse of char_of; errors if k is not in rep + 2M Z^s."""
    _, m_inv = _quad_data(graph)
    s = graph.s
    out = []
    for i in range(s):
        xi = Fraction(sum(m_inv[i][j] * (k[j] - rep[j]) for j in range(s)), 2)
        if xi.denominator != 1:
            raise ValueError(f"{k} does not lie over the representative {rep}")
        out.append(int(xi))
    return tuple(out)


def _neighbors(x):
    for i in range(len(x)):
        yield x[:i] + (x[i] + 1,) + x[i + 1 :]
        yield x[:i] + (x[i] - 1,) + x[i + 1 :]


def _components(points):
    """Deterministic component decomposition of a set of x-points."""
    uf = UnionFind()
    pts = set(points)
    for x in pts:
        uf.add(x)
        for nb in _neighbors(x):
            if nb in pts:
                uf.add(nb)
                uf.union(x, nb)
    groups = {}
    for x in pts:
        groups.setdefault(uf.find(x), []).append(x)
    comps = tuple(sorted((frozenset(g) for g in groups.values()), key=min))
    index = {x: i for i, comp in enumerate(comps) for x in comp}
    return comps, index


def _rep_of(graph, cls):
    if isinstance(cls, SpincClass):
        return cls.rep
    return tuple(int(v) for v in cls)


class LatticeCloud:
    """One superlevel set: points (in x-coordinates), components, labels."""

    def __init__(self, graph, rep, level, points):
        self.graph = graph
        self.rep = tuple(rep)
        self.level = level
        self.points = frozenset(points)
        self.components, self._index = _components(self.points)

    def char_vectors(self):
        return sorted(char_of(self.graph, self.rep, x) for x in self.points)

    def component_of(self, x):
        return self._index[tuple(x)]

    def __len__(self):
        return len(self.points)


def enumerate_superlevel(graph, cls, h) -> LatticeCloud:
    """All K in the class with h_U(K) >= h, with component labels.

    h must lie in the grading coset 2Z + h_U(rep); above the maximum the
    cloud is empty.
    """
    rep = _rep_of(graph, cls)
    h = Fraction(h)
    base = h_u(graph, rep)
    if ((base - h) / 2).denominator != 1:
        raise GradingParity(
            f"level {h} is not in the grading coset of h_U(rep) = {base}"
        )
    s = graph.s
    if s == 0:
        pts = [()] if h <= 0 else []
        return LatticeCloud(graph, rep, h, pts)
    bound = Fraction(s, 4) - h
    if bound < 0:
        return LatticeCloud(graph, rep, h, [])
    neg_m, _ = _quad_data(graph)
    c = _center(graph, rep)
    pts = [x for x, _ in linalg.fincke_pohst(neg_m, c, bound)]
    return LatticeCloud(graph, rep, h, pts)


class GradedRoot:
    """A window of the graded root: levels r = 0..depth at gradings top−2r.

    levels[r] is an ordered tuple of components (frozensets of x-points);
    parents[r][i] is the index of the containing component at level r+1.
    weights, when present, align with levels.
    """

    def __init__(self, graph, rep, top, levels, parents, weights=None,
                 epsilon=None, family_tag=None):
        self.graph = graph
        self.rep = tuple(rep)
        self.top = Fraction(top)
        self.levels = levels
        self.parents = parents
        self.depth = len(levels) - 1
        self.gradings = tuple(self.top - 2 * r for r in range(self.depth + 1))
        self.weights = weights
        self.epsilon = epsilon
        self.family_tag = family_tag
        self._index = [
            {x: i for i, comp in enumerate(level) for x in comp}
            for level in levels
        ]
        counts = [len(level) for level in levels]
        self.single_stem_below = None
        if self.depth >= 1 and counts[-1] == 1 and counts[-2] == 1:
            r = self.depth - 1
            while r >= 1 and counts[r - 1] == 1:
                r -= 1
            self.single_stem_below = self.gradings[r]

    def component_index(self, r, x):
        return self._index[r][tuple(x)]

    def component(self, r, i):
        return self.levels[r][i]

    def parent(self, r, i):
        return self.parents[r][i]

    def node_ids(self):
        for r in range(self.depth + 1):
            for i in range(len(self.levels[r])):
                yield (r, i)

    def char_vectors(self, r, i):
        return sorted(char_of(self.graph, self.rep, x) for x in self.levels[r][i])

    def with_weights(self, weights, epsilon, family_tag):
        return GradedRoot(self.graph, self.rep, self.top, self.levels,
                          self.parents, weights=weights, epsilon=epsilon,
                          family_tag=family_tag)

    def weight(self, r, i):
        return self.weights[r][i]

    def canonical_form(self, payload=None):
        """Level-aligned canonical form; equal iff the rooted forests agree.

        payload(r, i) must return a consistently orderable key when given.
        """
        counts = [len(level) for level in self.levels]
        return canonical_forest(self.top, counts, self.parents, payload)

    def canonical_weighted_form(self, weight_key=None):
        if self.weights is None:
            return self.canonical_form()
        key = weight_key or default_weight_key
        return self.canonical_form(lambda r, i: key(self.weights[r][i]))


def default_weight_key(w):
    """Orderable, equality-faithful key for a node weight of either kind."""
    if hasattr(w, "canonical"):
        return w.canonical()
    return w.items()


def canonical_forest(top, counts, parents, payload=None):
    """Canonical nested-tuple form of a level-aligned forest.

    counts[r] = node count at level r; parents[r][i] = containing index at
    level r+1.  Two windows get equal forms exactly when there is a
    level/parent/payload-preserving bijection.
    """
    depth = len(counts) - 1
    canon = [((payload(0, i) if payload else None), ())
             for i in range(counts[0])]
    for r in range(1, depth + 1):
        kids = [[] for _ in range(counts[r])]
        for i, p in enumerate(parents[r - 1]):
            kids[p].append(canon[i])
        canon = [((payload(r, j) if payload else None), tuple(sorted(kids[j])))
                 for j in range(counts[r])]
    return (top, depth, tuple(sorted(canon)))


def graded_root(graph, cls, depth) -> GradedRoot:
    """Build the graded root window: components per level, edges by inclusion.

    The top grading is found exactly by minimizing the norm over the shifted
    lattice; one enumeration at the bottom radius feeds every level.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    rep = _rep_of(graph, cls)
    s = graph.s
    if s == 0:
        level = (frozenset({()}),)
        levels = tuple(level for _ in range(depth + 1))
        parents = tuple((0,) for _ in range(depth))
        return GradedRoot(graph, rep, Fraction(0), levels, parents)
    neg_m, _ = _quad_data(graph)
    c = _center(graph, rep)
    min_norm = linalg.minimal_norm(neg_m, c)
    top = Fraction(s, 4) - min_norm
    by_first = {}
    for x, val in linalg.fincke_pohst(neg_m, c, min_norm + 2 * depth):
        first = Fraction(val - min_norm, 2)
        assert first.denominator == 1, "level offsets must be integers"
        by_first.setdefault(int(first), []).append(x)
    uf = UnionFind()
    active = set()
    levels = []
    for r in range(depth + 1):
        for x in sorted(by_first.get(r, ())):
            uf.add(x)
            active.add(x)
            for nb in _neighbors(x):
                if nb in active:
                    uf.union(x, nb)
        groups = {}
        for x in active:
            groups.setdefault(uf.find(x), []).append(x)
        comps = tuple(sorted((frozenset(g) for g in groups.values()), key=min))
        levels.append(comps)
    parents = []
    for r in range(depth):
        nxt = {x: i for i, comp in enumerate(levels[r + 1]) for x in comp}
        parents.append(tuple(nxt[min(comp)] for comp in levels[r]))
    return GradedRoot(graph, rep, top, tuple(levels), tuple(parents))


class BigradedRoot:
    """Window of the bigraded root of a marked graph.

    cells[(ru, rv)] lists the components of S_{i,j} with i = top_u − 2ru and
    j = top_v − 2rv; u_parent/v_parent give containments one step down each
    axis; u_coord/v_coord locate each component inside the two collapsed
    graded roots (which are carried along as u_root and v_root).
    """

    def __init__(self, marked, rep, u_root, v_root, cells, u_parent, v_parent,
                 u_coord, v_coord, weights=None, epsilon=None, family_tag=None):
        self.marked = marked
        self.rep = tuple(rep)
        self.u_root = u_root
        self.v_root = v_root
        self.top_u = u_root.top
        self.top_v = v_root.top
        self.depth_u = u_root.depth
        self.depth_v = v_root.depth
        self.cells = cells
        self.u_parent = u_parent
        self.v_parent = v_parent
        self.u_coord = u_coord
        self.v_coord = v_coord
        self.weights = weights
        self.epsilon = epsilon
        self.family_tag = family_tag

    def bigrading(self, ru, rv):
        return (self.top_u - 2 * ru, self.top_v - 2 * rv)

    def nodes(self):
        for (ru, rv), comps in sorted(self.cells.items()):
            for ci in range(len(comps)):
                yield (ru, rv, ci)

    def node_count(self):
        return sum(len(comps) for comps in self.cells.values())

    def coordinate(self, ru, rv, ci):
        """(node of R^U, node of R^V) containing this component."""
        return ((ru, self.u_coord[(ru, rv)][ci]),
                (rv, self.v_coord[(ru, rv)][ci]))

    def weight(self, ru, rv, ci):
        return self.weights[(ru, rv)][ci]

    def with_weights(self, weights, epsilon, family_tag):
        return BigradedRoot(self.marked, self.rep, self.u_root, self.v_root,
                            self.cells, self.u_parent, self.v_parent,
                            self.u_coord, self.v_coord, weights=weights,
                            epsilon=epsilon, family_tag=family_tag)


def bigraded_root(marked, cls, depth, depth_v=None, _u_root=None,
                  _v_root=None) -> BigradedRoot:
    """Components of S_{i,j} = S^U_i ∩ S^V_j over a rectangular window."""
    ambient = marked.ambient
    rep = _rep_of(ambient, cls)
    lam = marked.lambda_vector
    s = ambient.s
    du = depth
    dv = depth if depth_v is None else depth_v
    u_root = _u_root if _u_root is not None else graded_root(ambient, rep, du)
    v_rep = tuple(rep[i] + 2 * lam[i] for i in range(s))
    v_root = _v_root if _v_root is not None else graded_root(ambient, v_rep, dv)
    assert u_root.rep == tuple(rep) and u_root.depth == du
    assert v_root.rep == v_rep and v_root.depth == dv

    u_points = set().union(*u_root.levels[-1]) if u_root.levels[-1] else set()
    first_u = {}
    first_v = {}
    points = []
    for x in u_points:
        k = char_of(ambient, rep, x)
        fu = (u_root.top - h_u(ambient, k)) / 2
        fv = (v_root.top - h_v(marked, k)) / 2
        assert fu.denominator == 1 and fv.denominator == 1 and fv >= 0
        if fv > dv:
            continue
        first_u[x] = int(fu)
        first_v[x] = int(fv)
        points.append(x)

    cells = {}
    index = {}
    for ru in range(du + 1):
        for rv in range(dv + 1):
            cell_pts = [x for x in points
                        if first_u[x] <= ru and first_v[x] <= rv]
            comps, idx = _components(cell_pts)
            cells[(ru, rv)] = comps
            index[(ru, rv)] = idx

    u_parent = {}
    v_parent = {}
    u_coord = {}
    v_coord = {}
    for (ru, rv), comps in cells.items():
        if ru < du:
            u_parent[(ru, rv)] = tuple(
                index[(ru + 1, rv)][min(comp)] for comp in comps)
        if rv < dv:
            v_parent[(ru, rv)] = tuple(
                index[(ru, rv + 1)][min(comp)] for comp in comps)
        u_coord[(ru, rv)] = tuple(
            u_root.component_index(ru, min(comp)) for comp in comps)
        v_coord[(ru, rv)] = tuple(
            v_root.component_index(rv, min(comp)) for comp in comps)

    return BigradedRoot(marked, rep, u_root, v_root, cells, u_parent,
                        v_parent, u_coord, v_coord)


def _axis_stabilized(bi, axis):
    """Is the far edge of the window equal to the single-axis superlevels?"""
    if axis == "u":
        far, root, depth = bi.depth_v, bi.u_root, bi.depth_u
        cell = lambda r: bi.cells[(r, far)]
    else:
        far, root, depth = bi.depth_u, bi.v_root, bi.depth_v
        cell = lambda r: bi.cells[(far, r)]
    for r in range(depth + 1):
        window = set().union(*cell(r)) if cell(r) else set()
        full = set().union(*root.levels[r]) if root.levels[r] else set()
        if window != full:
            return False
    return True


def collapse_u(bi: BigradedRoot) -> GradedRoot:
    """Collapse V-edges; returns R(Γ,[k]) once the window has stabilized."""
    if not _axis_stabilized(bi, "u"):
        raise InsufficientDepth(
            "V-window too shallow: S_{i,j} has not stabilized to S^U_i")
    if bi.weights is not None:
        per_node = [[None] * len(level) for level in bi.u_root.levels]
        for (ru, rv), comps in bi.cells.items():
            for ci in range(len(comps)):
                per_node[ru][bi.u_coord[(ru, rv)][ci]] = bi.weights[(ru, rv)][ci]
        if any(w is None for level in per_node for w in level):
            raise InsufficientDepth("some U-node is not hit by any bigraded node")
        return bi.u_root.with_weights(
            tuple(tuple(level) for level in per_node), bi.epsilon, bi.family_tag)
    return bi.u_root


def collapse_v(bi: BigradedRoot) -> GradedRoot:
    """Collapse U-edges; returns R(Γ,[k+2λ]) once the window has stabilized."""
    if not _axis_stabilized(bi, "v"):
        raise InsufficientDepth(
            "U-window too shallow: S_{i,j} has not stabilized to S^V_j")
    return bi.v_root


def apply_automorphism(graph, cls, phi):
    """Transport a spin^c class along a framing-preserving graph automorphism."""
    phi = tuple(int(p) for p in phi)
    if sorted(phi) != list(range(graph.s)):
        raise NonAutomorphism(f"{phi} is not a permutation of 0..{graph.s - 1}")
    if permute_vertices(graph, phi) != graph:
        raise NonAutomorphism("permutation does not preserve the graph")
    rep = _rep_of(graph, cls)
    moved = [0] * graph.s
    for i in range(graph.s):
        moved[phi[i]] = rep[i]
    return spinc_class(graph, tuple(moved))


def _bigraded_nx(bi, weight_key=None):
    g = nx.DiGraph()
    for (ru, rv), comps in bi.cells.items():
        i, j = bi.bigrading(ru, rv)
        for ci in range(len(comps)):
            label = (i, j)
            if weight_key is not None:
                label = (i, j, weight_key(bi.weights[(ru, rv)][ci]))
            g.add_node((ru, rv, ci), label=label)
    for (ru, rv), parents in bi.u_parent.items():
        for ci, p in enumerate(parents):
            g.add_edge((ru, rv, ci), (ru + 1, rv, p), kind="u")
    for (ru, rv), parents in bi.v_parent.items():
        for ci, p in enumerate(parents):
            g.add_edge((ru, rv, ci), (ru, rv + 1, p), kind="v")
    return g


def bigraded_isomorphic(b1: BigradedRoot, b2: BigradedRoot,
                        weight_key=None) -> bool:
    """Isomorphism of windows: bigrading-, edge-kind- (and weight-)matching."""
    if (b1.top_u, b1.top_v, b1.depth_u, b1.depth_v) != \
       (b2.top_u, b2.top_v, b2.depth_u, b2.depth_v):
        return False
    if b1.node_count() != b2.node_count():
        return False
    g1 = _bigraded_nx(b1, weight_key)
    g2 = _bigraded_nx(b2, weight_key)
    return nx.is_isomorphic(
        g1, g2,
        node_match=lambda a, b: a["label"] == b["label"],
        edge_match=lambda a, b: a["kind"] == b["kind"],
    )
