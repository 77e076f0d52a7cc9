"""spin^c structures as characteristic-vector cosets, and their transports.

Closed case: classes of m + 2Z^s modulo 2MZ^s.  Knot-complement case: charge
classes of delta-hat + 2Z^{s+1} modulo the rank-s sublattice spanned by
2(lambda^T x, Mx); the quotient keeps one free integer coordinate.

Canonical representatives come from Smith normal form: with P M Q = D fixed
once per graph, a coset is pinned by the residues of P((k - m)/2) modulo the
invariant factors, and the canonical representative is the unique coset
member whose residue vector lies in the box [0, d_i).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from . import linalg
from .errors import GradingParity, NotApplicable, SchemaError
from .graphs import (
    MarkedPlumbingGraph,
    MoveApplication,
    PlumbingGraph,
    require_negative_definite,
)


@dataclass(frozen=True)
class SpincClass:
    """A spin^c structure on a closed negative definite plumbing."""

    graph: PlumbingGraph
    rep: tuple[int, ...]  # canonical characteristic vector
    residues: tuple[int, ...]

    def conjugate(self) -> "SpincClass":
        return spinc_class(self.graph, tuple(-k for k in self.rep))

    def __repr__(self):  # keep test output readable
        return f"SpincClass(rep={list(self.rep)})"


@dataclass(frozen=True)
class RelSpincClass:
    """A relative spin^c structure on a marked plumbing, in charge coordinates."""

    graph: MarkedPlumbingGraph
    rep: tuple[int, ...]  # canonical charge vector, length s + 1
    key: tuple[int, ...]  # residues for the invariant factors + free coordinate

    def conjugate(self) -> "RelSpincClass":
        return rel_spinc_class(self.graph, tuple(-b for b in self.rep))

    def __repr__(self):
        return f"RelSpincClass(rep={list(self.rep)})"


@lru_cache(maxsize=None)
def _closed_data(graph: PlumbingGraph):
    require_negative_definite(graph)
    m = graph.adjacency_matrix
    d, p, q = linalg.smith_normal_form(m)
    p_inv = tuple(
        tuple(int(x) for x in row) for row in linalg.invert(p)
    )  # unimodular, so exact ints
    return m, d, p, q, p_inv


def _characteristic_check(graph, k, diag):
    if len(k) != len(diag):
        raise SchemaError(f"vector length {len(k)} != {len(diag)}")
    for ki, mi in zip(k, diag):
        if (ki - mi) % 2:
            raise SchemaError(f"{tuple(k)} is not characteristic: parity mismatch")


def spinc_class(graph: PlumbingGraph, k) -> SpincClass:
    """Reduce a characteristic vector to its canonical class."""
    m, d, p, q, _ = _closed_data(graph)
    k = tuple(int(x) for x in k)
    _characteristic_check(graph, k, graph.framings)
    y = tuple((ki - mi) // 2 for ki, mi in zip(k, graph.framings))
    z = linalg.mat_vec(p, y)
    s = graph.s
    residues = tuple(z[i] % d[i][i] for i in range(s))
    w = tuple((z[i] - residues[i]) // d[i][i] for i in range(s))
    correction = linalg.mat_vec(m, linalg.mat_vec(q, w))
    y_star = linalg.vec_sub(y, correction)
    rep = tuple(mi + 2 * yi for mi, yi in zip(graph.framings, y_star))
    return SpincClass(graph, rep, residues)


def enumerate_spinc(graph: PlumbingGraph) -> tuple[SpincClass, ...]:
    """All |det M| classes, ordered by residue vector."""
    m, d, p, q, p_inv = _closed_data(graph)
    s = graph.s
    sizes = [d[i][i] for i in range(s)]
    out = []

    def rec(i, residues):
        if i == s:
            y = linalg.mat_vec(p_inv, residues)
            k = tuple(mi + 2 * yi for mi, yi in zip(graph.framings, y))
            out.append(spinc_class(graph, k))
            return
        for r in range(sizes[i]):
            rec(i + 1, residues + (r,))

    rec(0, ())
    return tuple(out)


def h1_action(graph: PlumbingGraph, x, cls: SpincClass) -> SpincClass:
    """[x] . [k] = [k + 2x] for x in Z^s."""
    return spinc_class(graph, linalg.vec_add(cls.rep, linalg.vec_scale(2, x)))


def from_charge(graph: PlumbingGraph, a) -> SpincClass:
    """psi: a charge vector a in delta + 2Z^s maps to the class of a + Mu."""
    a = tuple(int(x) for x in a)
    _characteristic_check(graph, a, graph.degree_vector)
    mu = linalg.mat_vec(graph.adjacency_matrix, (1,) * graph.s)
    return spinc_class(graph, linalg.vec_add(a, mu))


def to_charge(cls: SpincClass) -> tuple[int, ...]:
    mu = linalg.mat_vec(cls.graph.adjacency_matrix, (1,) * cls.graph.s)
    return linalg.vec_sub(cls.rep, mu)


# ---------------------------------------------------------------------------
# Relative (knot-complement) classes


@lru_cache(maxsize=None)
def _marked_data(graph: MarkedPlumbingGraph):
    require_negative_definite(graph)
    m = graph.ambient.adjacency_matrix
    lam = graph.lambda_vector
    n_rows = (lam,) + tuple(m)  # (s+1) x s, row 0 = lambda
    d, p, q = linalg.smith_normal_form(n_rows)
    return m, n_rows, d, p, q


def delta_hat(graph: MarkedPlumbingGraph) -> tuple[int, ...]:
    """Base charge vector: marked degrees plus 1 at the marked slot."""
    deg = graph.marked_degrees
    return (deg[0] + 1,) + deg[1:]


def rel_spinc_class(graph: MarkedPlumbingGraph, b) -> RelSpincClass:
    """Reduce a charge vector b in delta-hat + 2Z^{s+1} to canonical form."""
    m, n_rows, d, p, q = _marked_data(graph)
    b = tuple(int(x) for x in b)
    dh = delta_hat(graph)
    _characteristic_check(graph, b, dh)
    y = tuple((bi - di) // 2 for bi, di in zip(b, dh))
    z = linalg.mat_vec(p, y)
    s = graph.s
    residues = tuple(z[i] % d[i][i] for i in range(s))
    w = tuple((z[i] - residues[i]) // d[i][i] for i in range(s))
    correction = linalg.mat_vec(n_rows, linalg.mat_vec(q, w))
    y_star = linalg.vec_sub(y, correction)
    rep = tuple(di + 2 * yi for di, yi in zip(dh, y_star))
    return RelSpincClass(graph, rep, residues + (z[s],))


def restrict_charge(rel: RelSpincClass) -> tuple[int, ...]:
    """Drop the marked-vertex coordinate of the canonical charge vector."""
    return rel.rep[1:]


def w_map(rel: RelSpincClass, n: int) -> SpincClass:
    """w_n: [b] -> [b|_ambient + n(lambda + Mu)], defined for odd n."""
    if n % 2 == 0:
        raise GradingParity("w_n needs odd n")
    g = rel.graph
    m = g.ambient.adjacency_matrix
    lam = g.lambda_vector
    mu = linalg.mat_vec(m, (1,) * g.s)
    shift = linalg.vec_scale(n, linalg.vec_add(lam, mu))
    return spinc_class(g.ambient, linalg.vec_add(restrict_charge(rel), shift))


def p_map(rel: RelSpincClass, n: int) -> SpincClass:
    """p_n: [b] -> the charge class of b|_ambient + n*lambda (via psi)."""
    if n % 2 == 0:
        raise GradingParity("p_n needs odd n")
    g = rel.graph
    lam = linalg.vec_scale(n, g.lambda_vector)
    return from_charge(g.ambient, linalg.vec_add(restrict_charge(rel), lam))


# ---------------------------------------------------------------------------
# Transport along Neumann moves


def beta_lifts(app: MoveApplication, k):
    """The two characteristic lifts of a vector under a closed blow-up."""
    move = app.move
    if move.blow != "up":
        raise NotApplicable("beta lifts are stated for blow-ups")
    k = tuple(k) + (0,)
    new = app.new_index
    plus = list(k)
    minus = list(k)
    if move.kind == "A":
        i, j = app.relevant
        for vec, sgn in ((plus, 1), (minus, -1)):
            vec[i] -= sgn
            vec[j] -= sgn
            vec[new] += sgn
    elif move.kind == "B":
        (i,) = app.relevant
        for vec, sgn in ((plus, 1), (minus, -1)):
            vec[i] -= sgn
            vec[new] += sgn
    elif move.kind == "C":
        plus[new] = -1
        minus[new] = 1
    else:
        raise NotApplicable(f"no closed lift for move {move.kind}")
    return tuple(plus), tuple(minus)


def beta(app: MoveApplication, cls: SpincClass) -> SpincClass:
    """Transport a closed spin^c class through a move application."""
    if cls.graph != app.before:
        raise NotApplicable("class does not live on the move's source graph")
    if app.move.blow == "up":
        plus, _ = beta_lifts(app, cls.rep)
        return spinc_class(app.after, plus)

    # blow-down: normalize the representative at the deleted vertex, then
    # strip it -- the exact inverse of the blow-up formulas.
    v = app.removed_index
    g = app.before
    col = tuple(row[v] for row in g.adjacency_matrix)
    k = cls.rep
    target = -1 if app.move.kind == "C" else 1
    t = (k[v] - target) // 2  # framing -1 makes the v-entry drop by 2t
    k_norm = linalg.vec_add(k, linalg.vec_scale(2 * t, col))
    assert k_norm[v] == target
    a = [x for i, x in enumerate(k_norm) if i != v]
    if app.move.kind == "A":
        i, j = app.relevant
        a[app.map_index(i)] += 1
        a[app.map_index(j)] += 1
    elif app.move.kind == "B":
        (i,) = app.relevant
        a[app.map_index(i)] += 1
    return spinc_class(app.after, tuple(a))


def beta_marked(app: MoveApplication, cls: SpincClass) -> SpincClass:
    """Ambient spin^c transport induced by a marked move."""
    return beta(app.ambient_application, cls)


def alpha_rel(app: MoveApplication, rel: RelSpincClass) -> RelSpincClass:
    """Transport a relative class through a marked move application."""
    if not isinstance(app.before, MarkedPlumbingGraph):
        raise NotApplicable("relative transport needs a marked move")
    if rel.graph != app.before:
        raise NotApplicable("class does not live on the move's source graph")
    kind = app.move.kind
    if app.move.blow == "up":
        b = list(rel.rep) + [0]
        new = app.new_index
        if kind == "B":
            (i,) = app.relevant
            b[i] += 1
            b[new] -= 1
        elif kind == "B0":
            b[0] += 1
            b[new] -= 1
        elif kind not in ("A", "A0"):
            raise NotApplicable(f"no relative transport for move {kind}")
        return rel_spinc_class(app.after, tuple(b))

    # blow-down
    v = app.removed_index
    g = app.before
    m = g.ambient.adjacency_matrix
    lam = g.lambda_vector
    amb_v = v - 1
    col = (lam[amb_v],) + tuple(row[amb_v] for row in m)
    b = rel.rep
    target = 0 if kind in ("A", "A0") else -1
    t = (b[v] - target) // 2
    b_norm = linalg.vec_add(b, linalg.vec_scale(2 * t, col))
    assert b_norm[v] == target
    a = [x for i, x in enumerate(b_norm) if i != v]
    if kind == "B":
        (i,) = app.relevant
        a[app.map_index(i)] -= 1
    elif kind == "B0":
        a[0] -= 1
    return rel_spinc_class(app.after, tuple(a))


def apply_permutation(graph: PlumbingGraph, perm, cls: SpincClass) -> SpincClass:
    """Push a class forward along a vertex relabeling of its graph."""
    from .graphs import permute_vertices

    h = permute_vertices(graph, perm)
    rep = [0] * graph.s
    for i, x in enumerate(cls.rep):
        rep[perm[i]] = x
    return spinc_class(h, tuple(rep))
