"""Vertex weights, weighted roots, and the truncated BPS q-series.

Closed case: a characteristic vector K contributes W_Γ(K) q^(qe) t^(te) with
W_Γ(K) = ∏ᵢ W_{δᵢ}(ℓᵢ), ℓ = K − εMu.  A node of the graded root is weighted
by the sum over its whole component, so weights grow down the stem and
stabilize to the series Ẑ̂(q,t).

Knot case: charges restrict to the ambient graph; each K yields the term
W(K) q^ξ t^θ z^ζ and node weights carry the formal prefactor exponent
e = 1 − δ₀ via KnotWeight.  Bigraded nodes take the weight of the containing
U-superlevel component, so every node in one U-coordinate shares one weight.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from functools import lru_cache

from . import linalg
from .errors import FamilyDomainError, InsufficientDepth
from .laurent import KnotWeight, LaurentQTZ
from .roots import (BigradedRoot, GradedRoot, _center, _quad_data,
                    bigraded_root, char_of, graded_root)
from .spinc import SpincClass

ONE = Fraction(1)


def q_denominator_bound(graph) -> int:
    """Every q-exponent produced from this graph has denominator dividing this."""
    return 4 * abs(graph.determinant)


@lru_cache(maxsize=None)
def _closed_weight_data(graph, epsilon):
    m = graph.adjacency_matrix
    s = graph.s
    _, m_inv = _quad_data(graph) if s else ((), ())
    mu = tuple(sum(m[i][j] for j in range(s)) for i in range(s))
    umu = sum(mu)
    q0 = -Fraction(3 * s + sum(graph.framings), 4)
    t0 = Fraction(epsilon * umu, 2)
    return m_inv, mu, q0, t0


def closed_vertex_term(graph, k, epsilon, family) -> LaurentQTZ:
    """The single-vector contribution W_Γ(K) q^(qe) t^(te)."""
    m_inv, mu, q0, t0 = _closed_weight_data(graph, epsilon)
    s = graph.s
    deg = graph.degree_vector
    ell = tuple(k[i] - epsilon * mu[i] for i in range(s))
    w = ONE
    for i in range(s):
        w *= family(deg[i], ell[i])
        if not w:
            return LaurentQTZ.zero()
    qe = q0 - Fraction(linalg.quadratic_value(m_inv, list(ell)), 4) if s else q0
    te = t0 - Fraction(sum(k), 2)
    return LaurentQTZ.monomial(w, q=qe, t=te)


def closed_weight(graph, chars, epsilon, family) -> LaurentQTZ:
    """Weight of a cloud of characteristic vectors: the sum of its terms."""
    total = LaurentQTZ.zero()
    for k in chars:
        total = total + closed_vertex_term(graph, tuple(k), epsilon, family)
    return total


def _closed_term_table(graph, rep, points, epsilon, family):
    table = {}
    for x in points:
        table[x] = closed_vertex_term(graph, char_of(graph, rep, x),
                                      epsilon, family)
    return table


def weighted_graded_root_closed(graph, cls, epsilon, family, depth) -> GradedRoot:
    """Graded root with the cumulative closed weight attached to each node."""
    root = graded_root(graph, cls, depth)
    points = set().union(*root.levels[-1]) if root.levels[-1] else set()
    table = _closed_term_table(graph, root.rep, points, epsilon, family)
    weights = []
    for level in root.levels:
        row = []
        for comp in level:
            total = LaurentQTZ.zero()
            for x in sorted(comp):
                total = total + table[x]
            row.append(total)
        weights.append(tuple(row))
    return root.with_weights(tuple(weights), epsilon, family.name)


def zhat_closed(graph, cls, q_max, epsilon=1, family=None, threads=1) -> LaurentQTZ:
    """Truncated two-variable series Ẑ̂(q,t): all terms with q-exponent ≤ q_max.

    The enumeration is complete by construction — the q-exponent is
    q0 + |x − center|² in the −M norm, so the ball radius q_max − q0 is an
    exact truncation certificate.  ε = ±1 give equal output.
    """
    if family is None:
        raise FamilyDomainError("zhat needs a weight family")
    rep = cls.rep if isinstance(cls, SpincClass) else tuple(cls)
    s = graph.s
    q_max = Fraction(q_max)
    m_inv, mu, q0, t0 = _closed_weight_data(graph, epsilon)
    if s == 0:
        return closed_vertex_term(graph, (), epsilon, family).truncate_q(q_max)
    if q_max < q0:
        return LaurentQTZ.zero()
    neg_m, _ = _quad_data(graph)
    c = _center(graph, rep)
    center = tuple(c[i] + Fraction(epsilon, 2) for i in range(s))
    pts = [x for x, _ in linalg.fincke_pohst(neg_m, center, q_max - q0)]
    if threads > 1 and len(pts) > 64:
        chunks = [pts[i::threads] for i in range(threads)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(
                lambda ch: closed_weight(
                    graph, (char_of(graph, rep, x) for x in ch),
                    epsilon, family),
                chunks))
        total = LaurentQTZ.zero()
        for part in parts:
            total = total + part
        return total.truncate_q(q_max)
    total = closed_weight(graph, (char_of(graph, rep, x) for x in pts),
                          epsilon, family)
    return total.truncate_q(q_max)


# --- knot complement ---------------------------------------------------------


@lru_cache(maxsize=None)
def _knot_weight_data(marked, epsilon):
    ambient = marked.ambient
    s = ambient.s
    lam = marked.lambda_vector
    deg = marked.marked_degrees          # valences inside the marked tree
    framings = ambient.framings
    m_inv, mu, _, _ = _closed_weight_data(ambient, epsilon)
    lam_minv = tuple(
        sum(Fraction(m_inv[i][j]) * lam[j] for j in range(s)) for i in range(s)
    ) if s else ()
    lam_sq = sum(lam_minv[i] * lam[i] for i in range(s)) if s else Fraction(0)
    shift = tuple(mu[i] + lam[i] for i in range(s))
    xi0 = -Fraction(3 * s + sum(deg) + 2 * sum(framings), 4) - lam_sq / 2
    theta0 = Fraction(epsilon * sum(deg[i + 1] + framings[i] for i in range(s)), 2)
    zeta0 = -epsilon * lam_sq - epsilon * deg[0]
    return m_inv, mu, lam_minv, lam_sq, shift, xi0, theta0, zeta0


def knot_xi(marked, k, epsilon) -> Fraction:
    """Just the q-exponent ξ(K), independent of the weight family."""
    s = marked.ambient.s
    (m_inv, mu, lam_minv, lam_sq, shift, xi0, theta0,
     zeta0) = _knot_weight_data(marked, epsilon)
    ksq = Fraction(linalg.quadratic_value(m_inv, list(k))) if s else Fraction(0)
    k_lam = sum(lam_minv[i] * k[i] for i in range(s)) if s else Fraction(0)
    return xi0 - ksq / 4 + Fraction(epsilon) * k_lam / 2 + Fraction(epsilon * sum(k), 2)


def knot_vertex_term(marked, k, epsilon, family):
    """(W(K), ξ(K), ζ(K), θ(K)) for one charge restricted to the ambient graph."""
    ambient = marked.ambient
    s = ambient.s
    deg = marked.marked_degrees
    (m_inv, mu, lam_minv, lam_sq, shift, xi0, theta0,
     zeta0) = _knot_weight_data(marked, epsilon)
    w = ONE
    for i in range(s):
        w *= family(deg[i + 1], k[i] - epsilon * shift[i])
        if not w:
            w = Fraction(0)
            break
    xi = knot_xi(marked, k, epsilon)
    k_lam = sum(lam_minv[i] * k[i] for i in range(s)) if s else Fraction(0)
    zeta = k_lam + zeta0
    theta = theta0 - Fraction(sum(k), 2)
    return w, xi, zeta, theta


def knot_weight(marked, chars, epsilon, family) -> KnotWeight:
    """Weight of a cloud of charges: B^(1−δ₀) times the summed core terms."""
    e = 1 - marked.marked_degrees[0]
    core = LaurentQTZ.zero()
    for k in chars:
        w, xi, zeta, theta = knot_vertex_term(marked, tuple(k), epsilon, family)
        if w:
            core = core + LaurentQTZ.monomial(w, q=xi, t=theta, z=zeta)
    return KnotWeight(e, core)


def _knot_node_weights(marked, root, epsilon, family):
    """KnotWeight per node of a graded root of the ambient class."""
    ambient = marked.ambient
    e = 1 - marked.marked_degrees[0]
    points = set().union(*root.levels[-1]) if root.levels[-1] else set()
    table = {}
    for x in points:
        k = char_of(ambient, root.rep, x)
        w, xi, zeta, theta = knot_vertex_term(marked, k, epsilon, family)
        table[x] = (LaurentQTZ.monomial(w, q=xi, t=theta, z=zeta)
                    if w else LaurentQTZ.zero())
    weights = []
    for level in root.levels:
        row = []
        for comp in level:
            core = LaurentQTZ.zero()
            for x in sorted(comp):
                core = core + table[x]
            row.append(KnotWeight(e, core))
        weights.append(tuple(row))
    return tuple(weights)


def weighted_graded_root_knot(marked, cls, epsilon, family, depth) -> GradedRoot:
    """The weighted graded root for the knot complement (U-direction)."""
    root = graded_root(marked.ambient, cls, depth)
    weights = _knot_node_weights(marked, root, epsilon, family)
    return root.with_weights(weights, epsilon, family.name)


def weighted_bigraded_root(marked, cls, epsilon, family, depth,
                           depth_v=None) -> BigradedRoot:
    """Bigraded root whose nodes carry their U-component's KnotWeight."""
    bi = bigraded_root(marked, cls, depth, depth_v=depth_v)
    u_weights = _knot_node_weights(marked, bi.u_root, epsilon, family)
    weights = {}
    for key, comps in bi.cells.items():
        ru = key[0]
        weights[key] = tuple(
            u_weights[ru][bi.u_coord[key][ci]] for ci in range(len(comps)))
    return bi.with_weights(weights, epsilon, family.name)


def zhat_knot(marked, cls, epsilon, q_max, family, z_window=None) -> KnotWeight:
    """Truncated Ẑ(z,q,t) of the knot complement, as a KnotWeight.

    Sums every charge with ξ(K) ≤ q_max (complete: ξ is ξ_c + a positive
    definite norm in x).  A z_window, when given, clips the core's
    z-exponents; the formal prefactor stays symbolic either way.
    """
    ambient = marked.ambient
    rep = cls.rep if isinstance(cls, SpincClass) else tuple(cls)
    s = ambient.s
    q_max = Fraction(q_max)
    e = 1 - marked.marked_degrees[0]
    if s == 0:
        w = knot_weight(marked, [()], epsilon, family).truncate_q(q_max)
        return w
    (m_inv, mu, lam_minv, lam_sq, shift, xi0, theta0,
     zeta0) = _knot_weight_data(marked, epsilon)
    neg_m, _ = _quad_data(ambient)
    # xi(x) = xi_c + |x - center|^2 in the -M norm, from completing the square
    rho = tuple(rep[i] - epsilon * shift[i] for i in range(s))
    half = Fraction(1, 2)
    w_vec = tuple(
        half * sum(Fraction(m_inv[i][j]) * rho[j] for j in range(s))
        for i in range(s))
    center = tuple(-w_vec[i] for i in range(s))
    xi_c = knot_xi(marked, rep, epsilon) - \
        linalg.quadratic_value(neg_m, list(w_vec))
    if q_max < xi_c:
        return KnotWeight(e, LaurentQTZ.zero())
    core = LaurentQTZ.zero()
    for x, _ in linalg.fincke_pohst(neg_m, center, q_max - xi_c):
        k = char_of(ambient, rep, x)
        w, xi, zeta, theta = knot_vertex_term(marked, k, epsilon, family)
        assert xi <= q_max
        if w:
            core = core + LaurentQTZ.monomial(w, q=xi, t=theta, z=zeta)
    if z_window is not None:
        lo, hi = Fraction(z_window[0]), Fraction(z_window[1])
        core = LaurentQTZ(
            {key: c for key, c in core.items() if lo <= key[2] <= hi})
    return KnotWeight(e, core)


# --- stabilization and conjugation ------------------------------------------


def stabilization_check(root: GradedRoot, series, q_max, marked=None) -> bool:
    """Lowest node weight == truncated series, with a completeness certificate.

    Certifies that every lattice point with q-exponent ≤ q_max lies in the
    bottom component of the materialized window; InsufficientDepth otherwise.
    """
    if root.weights is None:
        raise ValueError("stabilization check needs a weighted root")
    if len(root.levels[-1]) != 1:
        raise InsufficientDepth("bottom level is not a single component")
    q_max = Fraction(q_max)
    bottom = root.levels[-1][0]
    graph = root.graph
    epsilon = root.epsilon
    s = graph.s
    if s > 0:
        neg_m, _ = _quad_data(graph)
        if marked is None:
            _, mu, q0, _ = _closed_weight_data(graph, epsilon)
            c = _center(graph, root.rep)
            center = tuple(ci + Fraction(epsilon, 2) for ci in c)
            base = q0
        else:
            (m_inv, mu, lam_minv, lam_sq, shift, xi0, theta0,
             zeta0) = _knot_weight_data(marked, epsilon)
            rho = tuple(root.rep[i] - epsilon * shift[i] for i in range(s))
            w_vec = tuple(
                Fraction(sum(Fraction(m_inv[i][j]) * rho[j] for j in range(s)), 2)
                for i in range(s))
            center = tuple(-w for w in w_vec)
            base = knot_xi(marked, root.rep, epsilon) - \
                linalg.quadratic_value(neg_m, list(w_vec))
        if q_max >= base:
            for x, _ in linalg.fincke_pohst(neg_m, center, q_max - base):
                if x not in bottom:
                    raise InsufficientDepth(
                        f"lattice point {x} with q-exponent ≤ {q_max} is "
                        "below the materialized window")
    bottom_weight = root.weights[-1][0]
    if isinstance(bottom_weight, KnotWeight):
        if not isinstance(series, KnotWeight) or series.e != bottom_weight.e:
            return False
        return bottom_weight.truncate_q(q_max).core == \
            series.truncate_q(q_max).core
    return bottom_weight.truncate_q(q_max) == series.truncate_q(q_max)


def knot_conjugate_weight(w: KnotWeight) -> KnotWeight:
    """The weight of the conjugate node: negate, t ↦ t^{-1}, z ↦ z^{-1}.

    The global negation combines with B ↦ −B under the substitution, leaving
    (−1)^{e+1} on the core.
    """
    sign = 1 if w.e % 2 else -1
    return KnotWeight(w.e, w.core.invert_t().invert_z() * Fraction(sign))


def closed_conjugation_check(graph, cls, epsilon, family, depth) -> bool:
    """R_{−ε}(Γ,[−k]) equals R_ε(Γ,[k]) after t ↦ t^{-1}."""
    if not family.symmetric:
        raise FamilyDomainError("conjugation symmetry needs an AD3 family")
    r1 = weighted_graded_root_closed(graph, cls, epsilon, family, depth)
    conj = cls.conjugate() if isinstance(cls, SpincClass) else tuple(-v for v in cls)
    r2 = weighted_graded_root_closed(graph, conj, -epsilon, family, depth)
    c1 = r1.canonical_weighted_form(lambda w: w.items())
    c2 = r2.canonical_weighted_form(lambda w: w.invert_t().items())
    return c1 == c2


def knot_conjugation_check(marked, cls, epsilon, family, depth) -> bool:
    """Knot version: t ↦ t^{-1}, z ↦ z^{-1}, and negation of each weight."""
    if not family.symmetric:
        raise FamilyDomainError("conjugation symmetry needs an AD3 family")
    r1 = weighted_graded_root_knot(marked, cls, epsilon, family, depth)
    if isinstance(cls, SpincClass):
        conj = cls.conjugate()
    else:
        conj = tuple(-v for v in cls)
    r2 = weighted_graded_root_knot(marked, conj, -epsilon, family, depth)
    c1 = r1.canonical_weighted_form(lambda w: w.canonical())
    c2 = r2.canonical_weighted_form(lambda w: knot_conjugate_weight(w).canonical())
    return c1 == c2
