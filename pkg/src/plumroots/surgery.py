"""Dehn filling of the marked vertex: slicing and reassembly.

Giving the unframed vertex a framing m0 closes the marked graph into Γ'.
The lattice of a closed class of Γ' splits into slices along the pairing
with the dual class Σ of the new vertex: slice a is a copy of the
knot-complement lattice whose points sit σ(a) below their ambient grading,
and consecutive slices differ by the meridian shift K ↦ K + 2λ.  Gluing the
slices back together reproduces the closed graded root node-for-node, with
the Laplace transform carrying the three-variable slice weights onto the
closed two-variable ones.
"""

from __future__ import annotations

from fractions import Fraction

from . import linalg
from .errors import LosesDefiniteness, NotZHS
from .families import prefactor_z_coefficient
from .graphs import require_negative_definite
from .laurent import KnotWeight, LaurentQTZ
from .roots import (_center, _quad_data, bigraded_root, canonical_forest,
                    graded_root)
from .spinc import RelSpincClass, SpincClass, spinc_class
from .weights import _knot_node_weights, zhat_knot


class SurgeryContext:
    """Γ' together with the dual-class data of the filled vertex."""

    def __init__(self, marked, m0):
        require_negative_definite(marked)
        self.marked = marked
        self.m0 = int(m0)
        ambient = marked.ambient
        s = ambient.s
        lam = marked.lambda_vector
        if s:
            _, m_inv = _quad_data(ambient)
            m_inv_lam = tuple(
                sum(Fraction(m_inv[i][j]) * lam[j] for j in range(s))
                for i in range(s))
        else:
            m_inv_lam = ()
        self.self_pairing = (sum(m_inv_lam[i] * lam[i] for i in range(s))
                             if s else Fraction(0))
        self.p = Fraction(self.m0) - self.self_pairing
        if self.p >= 0:
            raise LosesDefiniteness(
                f"framing {m0} makes the dual class square {self.p} >= 0")
        self.surgered = marked.surgered(self.m0)
        self.sigma_vec = (Fraction(1),) + tuple(-v for v in m_inv_lam)
        mp = self.surgered.adjacency_matrix
        image = [sum(Fraction(mp[i][j]) * self.sigma_vec[j]
                     for j in range(s + 1)) for i in range(s + 1)]
        assert image[0] == self.p and not any(image[1:])
        assert self.surgered.is_negative_definite

    def alexander(self, char) -> Fraction:
        """a(L) = (⟨L, Σ⟩ + Σ²)/2: steps by p under L ↦ L + 2M'e₀, else fixed."""
        pair = sum(Fraction(char[i]) * self.sigma_vec[i]
                   for i in range(len(self.sigma_vec)))
        return (pair + self.p) / 2

    def sigma_shift(self, a) -> Fraction:
        """σ(a), the grading defect of slice a; symmetric under a ↦ p − a."""
        a = Fraction(a)
        return -(a - self.p / 2) ** 2 / self.p - Fraction(1, 4)

    def closed_class(self, cls) -> SpincClass:
        """Resolve a class selector to a spin^c class of Γ'."""
        if isinstance(cls, RelSpincClass):
            return matched_closed_class(self, cls)
        if isinstance(cls, SpincClass):
            if cls.graph != self.surgered:
                raise ValueError("class belongs to a different plumbing")
            return cls
        return spinc_class(self.surgered, tuple(cls))


def matched_closed_class(ctx: SurgeryContext, rel: RelSpincClass) -> SpincClass:
    """The closed spin^c class of Γ' that a relative class feeds into."""
    if rel.graph != ctx.marked:
        raise ValueError("relative class belongs to a different marked graph")
    gp = ctx.surgered
    mu = linalg.mat_vec(gp.adjacency_matrix, (1,) * gp.s)
    return spinc_class(gp, linalg.vec_add(rel.rep, mu))


def laplace_transform(ctx, a, epsilon, w: KnotWeight, family) -> LaurentQTZ:
    """One slice weight pushed to the closed side.

    Shifts q by (−3−p)/4 − A²/p with A = a − (1+ε)p/2 and reads off the
    z^{−2A}-coefficient of B^{e+1}·core; each core term needs the prefactor
    expansion at a single z-exponent, so the result is exact and finite for
    every e.
    """
    p = ctx.p
    big_a = Fraction(a) - (1 + epsilon) * p / 2
    shift = (-3 - p) / 4 - big_a ** 2 / p
    out = LaurentQTZ.zero()
    for (qe, te, ze), c in w.core.items():
        factor = prefactor_z_coefficient(w.e + 1, -2 * big_a - ze, family)
        if factor:
            out = out + factor * LaurentQTZ.monomial(c, q=qe + shift, t=te)
    return out


class SurgerySlice:
    """One slice of the filled lattice, windowed for assembly."""

    def __init__(self, n, a, rep, offset, root):
        self.n = n                # slice index: a = a0 + n p
        self.a = a                # pairing with the dual class
        self.rep = rep            # ambient representative (base + 2nλ)
        self.offset = offset      # closed level of the slice's top node
        self.root = root          # graded root of the slice's ambient class


class AssembledRoot:
    """Closed graded root rebuilt from knot-complement slices.

    levels[r] holds the merged groups, each a frozenset of node ids
    (slice n, slice level, component index); parents mirror GradedRoot's,
    and so do the canonical forms, so the comparison with the directly
    computed root is a single ==.
    """

    def __init__(self, marked, m0, target, top, levels, parents, slices,
                 weights=None, epsilon=None, family_tag=None):
        self.marked = marked
        self.m0 = m0
        self.target = target      # the closed spin^c class being assembled
        self.top = Fraction(top)
        self.levels = levels
        self.parents = parents
        self.slices = slices      # {n: SurgerySlice}
        self.depth = len(levels) - 1
        self.gradings = tuple(self.top - 2 * r for r in range(self.depth + 1))
        self.weights = weights
        self.epsilon = epsilon
        self.family_tag = family_tag

    def node_ids(self):
        for r in range(self.depth + 1):
            for i in range(len(self.levels[r])):
                yield (r, i)

    def weight(self, r, i):
        return self.weights[r][i]

    def canonical_form(self, payload=None):
        counts = [len(level) for level in self.levels]
        return canonical_forest(self.top, counts, self.parents, payload)

    def canonical_weighted_form(self, weight_key=None):
        if self.weights is None:
            return self.canonical_form()
        key = weight_key or (lambda w: w.items())
        return self.canonical_form(lambda r, i: key(self.weights[r][i]))

    def unmerged_adjacent_pairs(self):
        """(a, grading) spots where consecutive slices coexist but stay apart.

        These are exactly the places a figure of the assembly would show two
        side-by-side nodes with no closed lattice edge between them.
        """
        out = []
        kept = sorted(self.slices)
        for n in kept:
            if n + 1 not in self.slices:
                continue
            for r in range(self.depth + 1):
                has = {n: False, n + 1: False}
                joined = False
                for group in self.levels[r]:
                    members = {m for m in (n, n + 1)
                               if any(g[0] == m for g in group)}
                    for m in members:
                        has[m] = True
                    if len(members) == 2:
                        joined = True
                if has[n] and has[n + 1] and not joined:
                    out.append((self.slices[n].a, self.gradings[r]))
        return sorted(out)


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def add(self, x):
        self.parent.setdefault(x, x)

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def _assemble(marked, m0, cls, depth, epsilon, family):
    ctx = SurgeryContext(marked, m0)
    gp = ctx.surgered
    target = ctx.closed_class(cls)
    rep = target.rep
    ambient = marked.ambient
    s = ambient.s
    lam = marked.lambda_vector
    neg_mp, _ = _quad_data(gp)
    top = Fraction(gp.s, 4) - linalg.minimal_norm(neg_mp, _center(gp, rep))
    h_bot = top - 2 * depth
    a0 = ctx.alexander(rep)
    base = rep[1:]
    p = ctx.p

    def slice_data(n):
        k_n = tuple(base[i] + 2 * n * lam[i] for i in range(s))
        a_n = a0 + n * p
        sig = ctx.sigma_shift(a_n)
        if s:
            neg_m, _ = _quad_data(ambient)
            top_u = Fraction(s, 4) - linalg.minimal_norm(neg_m,
                                                         _center(ambient, k_n))
        else:
            top_u = Fraction(0)
        return k_n, a_n, sig, top_u

    # walk outward from n = 0; σ grows without bound past the parabola's
    # vertex, and top_u ≤ s/4, so the window closes in both directions
    sigma_cap = Fraction(s, 4) - h_bot
    kept = {}
    for step in (1, -1):
        n = 0 if step == 1 else -1
        while True:
            k_n, a_n, sig, top_u = slice_data(n)
            if sig > sigma_cap:
                past_vertex = a_n < p / 2 if step == 1 else a_n > p / 2
                if past_vertex:
                    break
            elif top_u - sig >= h_bot:
                off2 = top - (top_u - sig)
                assert off2 >= 0 and off2 % 2 == 0, \
                    "slice top must sit on the closed grading ladder"
                offset = int(off2) // 2
                root = graded_root(ambient, k_n, depth - offset)
                assert root.top == top_u
                kept[n] = SurgerySlice(n, a_n, k_n, offset, root)
            n += step

    assert any(sl.offset == 0 for sl in kept.values()), \
        "some slice must realize the top of the closed root"

    # cross-slice gluing: a component of the cell S_{i,j} of slice n joins
    # its U-node to slice n+1's node at level j whenever both land on the
    # same closed grading, i - σ(a) = j - σ(a + p)
    uf = _UnionFind()
    for n, sl in kept.items():
        for r in range(sl.root.depth + 1):
            for i in range(len(sl.root.levels[r])):
                uf.add((n, r, i))
    for n in sorted(kept):
        if n + 1 not in kept:
            continue
        sl, nxt = kept[n], kept[n + 1]
        sig, sig_next = ctx.sigma_shift(sl.a), ctx.sigma_shift(nxt.a)
        bi = bigraded_root(marked, sl.rep, sl.root.depth,
                           depth_v=nxt.root.depth,
                           _u_root=sl.root, _v_root=nxt.root)
        for (ru, rv), comps in bi.cells.items():
            i = sl.root.top - 2 * ru
            j = nxt.root.top - 2 * rv
            if i - sig != j - sig_next:
                continue
            assert i - sig >= h_bot
            for ci in range(len(comps)):
                uf.union((n, ru, bi.u_coord[(ru, rv)][ci]),
                         (n + 1, rv, bi.v_coord[(ru, rv)][ci]))

    levels = []
    index = []
    for r in range(depth + 1):
        groups = {}
        for n in sorted(kept):
            sl = kept[n]
            rr = r - sl.offset
            if 0 <= rr <= sl.root.depth:
                for i in range(len(sl.root.levels[rr])):
                    groups.setdefault(uf.find((n, rr, i)), []).append((n, rr, i))
        ordered = sorted(groups.values(), key=min)
        levels.append(tuple(frozenset(g) for g in ordered))
        index.append({nid: gi for gi, g in enumerate(ordered) for nid in g})

    parents = []
    for r in range(depth):
        row = []
        for group in levels[r]:
            targets = set()
            for (n, rr, i) in group:
                sl = kept[n]
                assert rr < sl.root.depth, \
                    "slice windows bottom out only at the closed window bottom"
                targets.add(index[r + 1][(n, rr + 1, sl.root.parents[rr][i])])
            assert len(targets) == 1, "merged nodes must agree on their parent"
            row.append(targets.pop())
        parents.append(tuple(row))
    parents.append(tuple())

    weights = None
    if family is not None:
        pushed = {}
        for n, sl in kept.items():
            raw = _knot_node_weights(marked, sl.root, epsilon, family)
            pushed[n] = [
                tuple(laplace_transform(ctx, sl.a, epsilon, w, family)
                      for w in row)
                for row in raw
            ]
        weights = []
        for r in range(depth + 1):
            row = []
            for group in levels[r]:
                total = LaurentQTZ.zero()
                for (n, rr, i) in sorted(group):
                    total = total + pushed[n][rr][i]
                row.append(total)
            weights.append(tuple(row))
        weights = tuple(weights)

    return AssembledRoot(marked, m0, target, top, tuple(levels),
                         tuple(parents), kept, weights=weights,
                         epsilon=epsilon,
                         family_tag=family.name if family else None)


def surgery_graded_root(marked, m0, cls, depth) -> AssembledRoot:
    """Unweighted assembly of the graded root of (Γ', class) from slices."""
    return _assemble(marked, m0, cls, depth, None, None)


def surgery_weighted_graded_root(marked, m0, cls, depth, epsilon,
                                 family) -> AssembledRoot:
    """Weighted assembly; node weights are Laplace transforms of slice weights."""
    return _assemble(marked, m0, cls, depth, epsilon, family)


def gm_limit_series(marked, m0, cls, epsilon, q_max, family) -> LaurentQTZ:
    """Truncated closed series of Γ' out of the knot-complement series.

    Needs the ambient graph to be a homology sphere, so that one ambient
    class carries every slice and one series feeds every Laplace extraction.
    """
    ctx = SurgeryContext(marked, m0)
    ambient = marked.ambient
    if abs(ambient.determinant) != 1:
        raise NotZHS("series limit needs |det| = 1 for the ambient graph")
    target = ctx.closed_class(cls)
    rep = target.rep
    p = ctx.p
    q_max = Fraction(q_max)
    pre = (-3 - p) / 4
    series = zhat_knot(marked, rep[1:], epsilon, q_max - pre, family)
    if not series.core:
        return LaurentQTZ.zero()
    min_q = min(key[0] for key, _ in series.core.items())
    a0 = ctx.alexander(rep)
    total = LaurentQTZ.zero()
    for step in (1, -1):
        n = 0 if step == 1 else -1
        while True:
            a_n = a0 + n * p
            big_a = a_n - (1 + epsilon) * p / 2
            base = pre - big_a ** 2 / p
            if base + min_q > q_max:
                if (big_a < 0) if step == 1 else (big_a > 0):
                    break
            else:
                total = total + laplace_transform(ctx, a_n, epsilon,
                                                  series, family)
            n += step
    return total.truncate_q(q_max)
