"""JSON and DOT input/output for graphs, classes, roots, and series.

Everything round-trips: export followed by parse reproduces the object.
Rationals travel as exact "p/q" strings (plain JSON integers when the
denominator is 1); nothing is ever floated.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .errors import NotNegativeDefinite, SchemaError
from .graphs import MarkedPlumbingGraph, PlumbingGraph
from .laurent import KnotWeight, LaurentQTZ
from .roots import BigradedRoot, GradedRoot
from .surgery import AssembledRoot, SurgerySlice

SCHEMA = "plumb-roots/1"


def frac_str(x):
    """A Fraction as a JSON value: int when integral, "p/q" string otherwise."""
    x = Fraction(x)
    if x.denominator == 1:
        return int(x)
    return f"{x.numerator}/{x.denominator}"


def parse_frac(value) -> Fraction:
    if isinstance(value, bool):
        raise SchemaError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise SchemaError(f"bad rational string {value!r}") from exc
    raise SchemaError(f"not a rational: {value!r}")


def _expect(condition, message):
    if not condition:
        raise SchemaError(message)


# --- graphs -------------------------------------------------------------


def graph_to_json(graph) -> dict:
    vertices = []
    if isinstance(graph, MarkedPlumbingGraph):
        vertices.append({"id": 0, "framing": None, "marked": True})
        for i, m in enumerate(graph.framings):
            vertices.append({"id": i + 1, "framing": int(m)})
        edges = [list(e) for e in sorted(graph.edges)]
    else:
        for i, m in enumerate(graph.framings):
            vertices.append({"id": i, "framing": int(m)})
        edges = [list(e) for e in sorted(graph.edges)]
    return {"schema": SCHEMA, "vertices": vertices, "edges": edges}


def parse_graph_data(data):
    """Graph from the JSON dict form; marked vertex, if any, becomes index 0."""
    _expect(isinstance(data, dict), "graph document must be an object")
    if "schema" in data:
        _expect(data["schema"] == SCHEMA, f"unknown schema {data['schema']!r}")
    _expect("vertices" in data and "edges" in data,
            "graph document needs 'vertices' and 'edges'")
    vertices = data["vertices"]
    _expect(isinstance(vertices, list), "'vertices' must be a list")
    seen = {}
    marked_ids = []
    for entry in vertices:
        _expect(isinstance(entry, dict) and "id" in entry,
                "each vertex needs an 'id'")
        vid = entry["id"]
        _expect(isinstance(vid, int) and not isinstance(vid, bool) and vid >= 0,
                f"vertex id {vid!r} must be a nonnegative integer")
        _expect(vid not in seen, f"duplicate vertex id {vid}")
        framing = entry.get("framing", None)
        marked = bool(entry.get("marked", False))
        if framing is None:
            _expect(marked, f"vertex {vid}: null framing is only legal "
                    "with \"marked\":true")
        else:
            _expect(isinstance(framing, int) and not isinstance(framing, bool),
                    f"vertex {vid}: framing must be an integer")
            _expect(not marked, f"vertex {vid}: a marked vertex is unframed")
        if marked:
            marked_ids.append(vid)
        seen[vid] = framing
    _expect(sorted(seen) == list(range(len(seen))),
            "vertex ids must be 0..n-1")
    _expect(len(marked_ids) <= 1, "at most one marked vertex")
    edges = data["edges"]
    _expect(isinstance(edges, list), "'edges' must be a list")
    norm_edges = []
    for e in edges:
        _expect(isinstance(e, list) and len(e) == 2, f"bad edge {e!r}")
        a, b = e
        _expect(all(isinstance(v, int) and not isinstance(v, bool) for v in e),
                f"bad edge {e!r}")
        _expect(a in seen and b in seen, f"edge {e!r} uses an unknown vertex")
        _expect(a != b, f"edge {e!r} is a loop")
        key = (min(a, b), max(a, b))
        _expect(key not in norm_edges, f"duplicate edge {list(key)!r}")
        norm_edges.append(key)
    if not marked_ids:
        return PlumbingGraph(tuple(seen[i] for i in range(len(seen))),
                             tuple(sorted(norm_edges)))
    v0 = marked_ids[0]
    order = [v0] + [i for i in range(len(seen)) if i != v0]
    relabel = {old: new for new, old in enumerate(order)}
    framings = tuple(seen[i] for i in range(len(seen)) if i != v0)
    edges2 = tuple(sorted(
        (min(relabel[a], relabel[b]), max(relabel[a], relabel[b]))
        for a, b in norm_edges))
    return MarkedPlumbingGraph(framings, edges2)


def parse_graph(path, require_nd=False):
    """Load and validate a graph file; see parse_graph_data for the rules."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError as exc:
        raise SchemaError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON in {path}: {exc}") from exc
    graph = parse_graph_data(data)
    if require_nd:
        g = graph.ambient if isinstance(graph, MarkedPlumbingGraph) else graph
        if not g.is_negative_definite:
            raise NotNegativeDefinite(
                "graph is not negative definite (--require-nd)")
    return graph


# --- series and weights --------------------------------------------------


def series_to_json(poly: LaurentQTZ) -> list:
    return [
        {"q": frac_str(q), "t": frac_str(t), "z": frac_str(z),
         "c": frac_str(c)}
        for (q, t, z), c in poly.items()
    ]


def parse_series(data) -> LaurentQTZ:
    _expect(isinstance(data, list), "series must be a list of terms")
    terms = {}
    for entry in data:
        _expect(isinstance(entry, dict) and "c" in entry,
                f"bad series term {entry!r}")
        key = (parse_frac(entry.get("q", 0)), parse_frac(entry.get("t", 0)),
               parse_frac(entry.get("z", 0)))
        _expect(key not in terms, f"duplicate exponents {entry!r}")
        terms[key] = parse_frac(entry["c"])
    return LaurentQTZ(terms)


def knot_weight_to_json(w: KnotWeight) -> dict:
    return {"kind": "knot_weight", "prefactor_exponent": w.e,
            "core": series_to_json(w.core)}


def parse_knot_weight(data) -> KnotWeight:
    _expect(isinstance(data, dict) and data.get("kind") == "knot_weight",
            "not a knot weight document")
    e = data.get("prefactor_exponent")
    _expect(isinstance(e, int) and not isinstance(e, bool),
            "prefactor_exponent must be an integer")
    return KnotWeight(e, parse_series(data.get("core", [])))


def _weight_to_json(w):
    if isinstance(w, KnotWeight):
        return knot_weight_to_json(w)
    return series_to_json(w)


def _parse_weight(data):
    if isinstance(data, dict):
        return parse_knot_weight(data)
    return parse_series(data)


# --- graded roots ---------------------------------------------------------


def graded_root_to_json(root: GradedRoot) -> dict:
    doc = {
        "schema": SCHEMA,
        "kind": "graded_root",
        "graph": graph_to_json(root.graph),
        "rep": list(root.rep),
        "top": frac_str(root.top),
        "levels": [],
    }
    if root.epsilon is not None:
        doc["epsilon"] = root.epsilon
    if root.family_tag is not None:
        doc["family"] = root.family_tag
    for r, level in enumerate(root.levels):
        nodes = []
        for i, comp in enumerate(level):
            node = {"points": sorted(list(x) for x in comp)}
            if r < root.depth:
                node["parent"] = root.parents[r][i]
            if root.weights is not None:
                node["weight"] = _weight_to_json(root.weights[r][i])
            nodes.append(node)
        doc["levels"].append({"grading": frac_str(root.gradings[r]),
                              "nodes": nodes})
    return doc


def parse_graded_root(data) -> GradedRoot:
    _expect(isinstance(data, dict) and data.get("kind") == "graded_root",
            "not a graded root document")
    graph = parse_graph_data(data["graph"])
    _expect(not isinstance(graph, MarkedPlumbingGraph),
            "graded root document must carry a closed graph")
    rep = tuple(data["rep"])
    top = parse_frac(data["top"])
    levels = []
    parents = []
    weights = []
    weighted = False
    for r, entry in enumerate(data.get("levels", [])):
        _expect(parse_frac(entry["grading"]) == top - 2 * r,
                "gradings must descend by 2")
        comps, prow, wrow = [], [], []
        for node in entry["nodes"]:
            comps.append(frozenset(tuple(x) for x in node["points"]))
            if "parent" in node:
                prow.append(node["parent"])
            if "weight" in node:
                weighted = True
                wrow.append(_parse_weight(node["weight"]))
        levels.append(tuple(comps))
        parents.append(tuple(prow))
        weights.append(tuple(wrow))
    _expect(levels != [], "graded root needs at least one level")
    root = GradedRoot(graph, rep, top, tuple(levels), tuple(parents),
                      weights=tuple(weights) if weighted else None,
                      epsilon=data.get("epsilon"),
                      family_tag=data.get("family"))
    return root


# --- bigraded roots ---------------------------------------------------------


def bigraded_root_to_json(bi: BigradedRoot) -> dict:
    doc = {
        "schema": SCHEMA,
        "kind": "bigraded_root",
        "graph": graph_to_json(bi.marked),
        "rep": list(bi.rep),
        "u_root": graded_root_to_json(bi.u_root),
        "v_root": graded_root_to_json(bi.v_root),
        "cells": [],
    }
    if bi.epsilon is not None:
        doc["epsilon"] = bi.epsilon
    if bi.family_tag is not None:
        doc["family"] = bi.family_tag
    for (ru, rv) in sorted(bi.cells):
        comps = bi.cells[(ru, rv)]
        i, j = bi.bigrading(ru, rv)
        up = bi.u_parent.get((ru, rv))
        vp = bi.v_parent.get((ru, rv))
        nodes = []
        for ci in range(len(comps)):
            node = {
                "points": sorted(list(x) for x in comps[ci]),
                "u_coord": bi.u_coord[(ru, rv)][ci],
                "v_coord": bi.v_coord[(ru, rv)][ci],
            }
            if up is not None:
                node["u_parent"] = up[ci]
            if vp is not None:
                node["v_parent"] = vp[ci]
            if bi.weights is not None:
                node["weight"] = _weight_to_json(bi.weights[(ru, rv)][ci])
            nodes.append(node)
        doc["cells"].append({"ru": ru, "rv": rv,
                             "bigrading": [frac_str(i), frac_str(j)],
                             "nodes": nodes})
    return doc


def parse_bigraded_root(data) -> BigradedRoot:
    _expect(isinstance(data, dict) and data.get("kind") == "bigraded_root",
            "not a bigraded root document")
    marked = parse_graph_data(data["graph"])
    _expect(isinstance(marked, MarkedPlumbingGraph),
            "bigraded root document must carry a marked graph")
    u_root = parse_graded_root(data["u_root"])
    v_root = parse_graded_root(data["v_root"])
    cells, u_parent, v_parent, u_coord, v_coord, weights = {}, {}, {}, {}, {}, {}
    weighted = False
    for entry in data.get("cells", []):
        key = (entry["ru"], entry["rv"])
        comps, up, vp, uc, vc, wrow = [], [], [], [], [], []
        for node in entry["nodes"]:
            comps.append(frozenset(tuple(x) for x in node["points"]))
            uc.append(node["u_coord"])
            vc.append(node["v_coord"])
            up.append(node.get("u_parent"))
            vp.append(node.get("v_parent"))
            if "weight" in node:
                weighted = True
                wrow.append(_parse_weight(node["weight"]))
        cells[key] = tuple(comps)
        u_coord[key] = tuple(uc)
        v_coord[key] = tuple(vc)
        if any(x is not None for x in up):
            u_parent[key] = tuple(up)
        if any(x is not None for x in vp):
            v_parent[key] = tuple(vp)
        if wrow:
            weights[key] = tuple(wrow)
    return BigradedRoot(marked, tuple(data["rep"]), u_root, v_root, cells,
                        u_parent, v_parent, u_coord, v_coord,
                        weights=weights if weighted else None,
                        epsilon=data.get("epsilon"),
                        family_tag=data.get("family"))


# --- assembled surgery roots -------------------------------------------------


def assembled_root_to_json(ar: AssembledRoot) -> dict:
    doc = {
        "schema": SCHEMA,
        "kind": "assembled_root",
        "graph": graph_to_json(ar.marked),
        "m0": ar.m0,
        "target_rep": list(ar.target.rep),
        "top": frac_str(ar.top),
        "slices": [
            {"n": n, "a": frac_str(sl.a), "rep": list(sl.rep),
             "offset": sl.offset}
            for n, sl in sorted(ar.slices.items())
        ],
        "levels": [],
        "unmerged": [[frac_str(a), frac_str(h)]
                     for a, h in ar.unmerged_adjacent_pairs()],
    }
    if ar.epsilon is not None:
        doc["epsilon"] = ar.epsilon
    if ar.family_tag is not None:
        doc["family"] = ar.family_tag
    for r in range(ar.depth + 1):
        nodes = []
        for i, group in enumerate(ar.levels[r]):
            node = {"members": sorted(list(m) for m in group)}
            if r < ar.depth:
                node["parent"] = ar.parents[r][i]
            if ar.weights is not None:
                node["weight"] = series_to_json(ar.weights[r][i])
            nodes.append(node)
        doc["levels"].append({"grading": frac_str(ar.gradings[r]),
                              "nodes": nodes})
    return doc


def parse_assembled_root(data) -> AssembledRoot:
    """Rebuild the assembled root record (slice windows stay summarized)."""
    _expect(isinstance(data, dict) and data.get("kind") == "assembled_root",
            "not an assembled root document")
    marked = parse_graph_data(data["graph"])
    _expect(isinstance(marked, MarkedPlumbingGraph),
            "assembled root document must carry a marked graph")
    from .spinc import spinc_class
    m0 = data["m0"]
    target = spinc_class(marked.surgered(m0), tuple(data["target_rep"]))
    slices = {}
    for entry in data.get("slices", []):
        n = entry["n"]
        slices[n] = SurgerySlice(n, parse_frac(entry["a"]),
                                 tuple(entry["rep"]), entry["offset"], None)
    top = parse_frac(data["top"])
    levels, parents, weights = [], [], []
    weighted = False
    for r, entry in enumerate(data.get("levels", [])):
        _expect(parse_frac(entry["grading"]) == top - 2 * r,
                "gradings must descend by 2")
        comps, prow, wrow = [], [], []
        for node in entry["nodes"]:
            comps.append(frozenset(tuple(m) for m in node["members"]))
            if "parent" in node:
                prow.append(node["parent"])
            if "weight" in node:
                weighted = True
                wrow.append(parse_series(node["weight"]))
        levels.append(tuple(comps))
        parents.append(tuple(prow))
        weights.append(tuple(wrow))
    return AssembledRoot(marked, m0, target, top, tuple(levels),
                         tuple(parents), slices,
                         weights=tuple(weights) if weighted else None,
                         epsilon=data.get("epsilon"),
                         family_tag=data.get("family"))


def parse_document(data):
    """Dispatch on the 'kind' field of an exported document."""
    _expect(isinstance(data, dict), "document must be an object")
    kind = data.get("kind")
    if kind == "graded_root":
        return parse_graded_root(data)
    if kind == "bigraded_root":
        return parse_bigraded_root(data)
    if kind == "assembled_root":
        return parse_assembled_root(data)
    if kind == "knot_weight":
        return parse_knot_weight(data)
    if kind is None and "vertices" in data:
        return parse_graph_data(data)
    raise SchemaError(f"unknown document kind {kind!r}")


# --- DOT -----------------------------------------------------------------


def _dot_weight_label(w, specialize_t=False):
    if isinstance(w, KnotWeight):
        w = KnotWeight(w.e, w.core.specialize_t()) if specialize_t else w
        return w.render()
    if specialize_t:
        w = w.specialize_t()
    return w.render()


def _escape(text):
    return text.replace("\\", "\\\\").replace('"', '\\"')


def graded_root_dot(root, specialize_t=False) -> str:
    """DOT with one rank per grading and a plaintext grading scale."""
    lines = ["digraph graded_root {",
             '  rankdir=BT;',
             '  node [shape=circle, width=0.18, fixedsize=true, label=""];']
    for r in range(root.depth + 1):
        lines.append(f'  g{r} [shape=plaintext, fixedsize=false, '
                     f'label="{frac_str(root.gradings[r])}"];')
        names = []
        for i in range(len(root.levels[r])):
            name = f"n{r}_{i}"
            names.append(name)
            if root.weights is not None:
                label = _escape(_dot_weight_label(root.weights[r][i],
                                                  specialize_t))
                lines.append(f'  {name} [xlabel="{label}"];')
        members = " ".join([f"g{r}"] + names)
        lines.append(f"  {{ rank=same; {members} }}")
    for r in range(root.depth):
        lines.append(f"  g{r + 1} -> g{r} [style=invis];")
        for i in range(len(root.levels[r])):
            lines.append(f"  n{r + 1}_{root.parents[r][i]} -> n{r}_{i} "
                         "[dir=none];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def bigraded_root_dot(bi, specialize_t=False) -> str:
    """Two-axis grid: U-grading on x, V-grading on y, pinned positions.

    U-edges are solid, V-edges dashed; render with a position-respecting
    engine (neato -n or fdp).
    """
    lines = ["graph bigraded_root {",
             "  layout=neato;",
             '  node [shape=circle, width=0.15, fixedsize=true, label=""];']
    order = {}
    for (ru, rv) in sorted(bi.cells):
        for ci in range(len(bi.cells[(ru, rv)])):
            order.setdefault((ru, rv), []).append(ci)
    for (ru, rv) in sorted(bi.cells):
        comps = bi.cells[(ru, rv)]
        k = len(comps)
        for ci in range(k):
            name = f"c{ru}_{rv}_{ci}"
            x = -1.2 * ru + (0.3 * ci - 0.15 * (k - 1))
            y = -1.2 * rv
            i, j = bi.bigrading(ru, rv)
            label = f"({frac_str(i)},{frac_str(j)})"
            if bi.weights is not None:
                w = _dot_weight_label(bi.weights[(ru, rv)][ci], specialize_t)
                label += f"\\n{_escape(w)}"
            lines.append(f'  {name} [pos="{x:.2f},{y:.2f}!", '
                         f'xlabel="{label}"];')
    for (ru, rv) in sorted(bi.cells):
        for ci in range(len(bi.cells[(ru, rv)])):
            up = bi.u_parent.get((ru, rv))
            if up is not None and (ru + 1, rv) in bi.cells:
                lines.append(f"  c{ru}_{rv}_{ci} -- c{ru + 1}_{rv}_{up[ci]} "
                             "[style=solid];")
            vp = bi.v_parent.get((ru, rv))
            if vp is not None and (ru, rv + 1) in bi.cells:
                lines.append(f"  c{ru}_{rv}_{ci} -- c{ru}_{rv + 1}_{vp[ci]} "
                             "[style=dashed];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def assembled_root_dot(ar, specialize_t=False) -> str:
    """Assembled surgery root with the grading rank axis of graded_root_dot."""
    lines = ["digraph assembled_root {",
             "  rankdir=BT;",
             '  node [shape=circle, width=0.18, fixedsize=true, label=""];']
    for r in range(ar.depth + 1):
        lines.append(f'  g{r} [shape=plaintext, fixedsize=false, '
                     f'label="{frac_str(ar.gradings[r])}"];')
        names = []
        for i, group in enumerate(ar.levels[r]):
            name = f"n{r}_{i}"
            names.append(name)
            slice_tags = ",".join(
                frac_str(ar.slices[n].a)
                for n in sorted({m[0] for m in group}))
            label = f"a={slice_tags}"
            if ar.weights is not None:
                label += "\\n" + _escape(
                    _dot_weight_label(ar.weights[r][i], specialize_t))
            lines.append(f'  {name} [xlabel="{label}"];')
        members = " ".join([f"g{r}"] + names)
        lines.append(f"  {{ rank=same; {members} }}")
    for r in range(ar.depth):
        lines.append(f"  g{r + 1} -> g{r} [style=invis];")
        for i in range(len(ar.levels[r])):
            lines.append(f"  n{r + 1}_{ar.parents[r][i]} -> n{r}_{i} "
                         "[dir=none];")
    lines.append("}")
    return "\n".join(lines) + "\n"
