"""Export of a Euclidean binet as a Wavefront OBJ text mesh.

The vertex net and the face net become two groups (or two objects with
``split_nets``) of quads.  Cross edges can be added as line elements.
Quads or lines touching undefined points are left out.
"""
from __future__ import annotations

import numpy as np

from ..binet import cross_labels


def _point_block(arr, offset):
    """OBJ vertex lines for the defined points of an array and their 1-based indices."""
    lines, index = [], np.zeros(arr.shape[:2], dtype=int)
    k = offset
    for i in range(arr.shape[0]):
        for j in range(arr.shape[1]):
            x = arr[i, j]
            if np.all(np.isfinite(x)):
                k += 1
                index[i, j] = k
                lines.append("v %.17g %.17g %.17g" % tuple(x[:3]))
    return lines, index, k


def _quads(index):
    out = []
    for i in range(index.shape[0] - 1):
        for j in range(index.shape[1] - 1):
            q = (index[i, j], index[i + 1, j], index[i + 1, j + 1], index[i, j + 1])
            if all(q):
                out.append("f %d %d %d %d" % q)
    return out


def obj_text(b, show_edges=False, show_dual_edges=False, split_nets=False):
    if b.homogeneous:
        raise ValueError("only Euclidean binets can be exported")
    vlines, vidx, k = _point_block(b.vertex, 0)
    flines, fidx, _ = _point_block(b.face, k)
    out = ["# binet mesh", f"# window {b.window.shape[0]} x {b.window.shape[1]}"]
    out += ["o vertex_net" if split_nets else "o binet", "g vertex_net"] + vlines + _quads(vidx)
    if split_nets:
        out.append("o face_net")
    out += ["g face_net"] + flines + _quads(fidx)
    if show_edges or show_dual_edges:
        i0, j0 = b.window.origin
        edges, duals = [], []
        horizontal, vertical = cross_labels(b.window)
        for cr in horizontal + vertical:
            (vi, vj), (wi, wj) = cr.v.coords, cr.v_next.coords
            (fi, fj), (gi, gj) = cr.f.coords, cr.f_next.coords
            a, c = vidx[vi - i0, vj - j0], vidx[wi - i0, wj - j0]
            f, g = fidx[fi - i0, fj - j0], fidx[gi - i0, gj - j0]
            if a and c:
                edges.append("l %d %d" % (a, c))
            if f and g:
                duals.append("l %d %d" % (f, g))
        if show_edges:
            out += ["g cross_edges"] + edges
        if show_dual_edges:
            out += ["g cross_dual_edges"] + duals
    return "\n".join(out) + "\n"


def export_obj(b, path, show_edges=False, show_dual_edges=False, split_nets=False):
    text = obj_text(b, show_edges, show_dual_edges, split_nets)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return text
