"""Self-describing JSON documents for binets, lifts and cube data.

Numbers are written with 17 significant digits so that reading and writing
again reproduces the same bytes.  Undefined values are ``null``; NaN and
infinities are rejected with the path of the offending field.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..binet import Binet, BiStarNet
from ..consistency import BOTTOM_FACES, TOP_FACES, VERTEX_LABELS, CubeData
from ..lattice import Window

SCHEMA_VERSION = "1.0"
KINDS = ("binet", "cube")


class SchemaError(ValueError):
    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass
class BinetDocument:
    """Arrays on a Z^2 window plus optional potentials, planes and metadata.

    ``vertex`` and ``face`` are (m, n, k) and (m-1, n-1, k) with NaN for
    undefined entries; ``rho`` and ``sigma`` are pairs (vertex, face) of
    scalar arrays, ``planes`` a pair of (..., 4) arrays.
    """

    origin: tuple
    vertex: np.ndarray
    face: np.ndarray
    rho: tuple | None = None
    sigma: tuple | None = None
    planes: tuple | None = None
    ambient: str = "E3"
    metadata: dict = field(default_factory=dict)
    kind: str = "binet"
    schema_version: str = SCHEMA_VERSION

    @property
    def shape(self):
        return tuple(self.vertex.shape[:2])

    @property
    def window(self):
        return Window.grid(*self.shape, origin=tuple(self.origin))

    def binet(self):
        return Binet(self.window, self.vertex, self.face, self.ambient)

    def bistar(self):
        if self.planes is None:
            raise ValueError("document carries no planes")
        return BiStarNet(self.window, *self.planes)

    @classmethod
    def from_binet(cls, b, metadata=None, **extra):
        return cls(tuple(b.window.origin), np.array(b.vertex), np.array(b.face), ambient=b.ambient, metadata=dict(metadata or {}), **extra)


@dataclass
class CubeDocument:
    cube: CubeData
    metadata: dict = field(default_factory=dict)
    kind: str = "cube"
    schema_version: str = SCHEMA_VERSION


# ---------------------------------------------------------------------------
# encoding


def _fmt(x):
    if x is None:
        return "null"
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        if not np.isfinite(x):
            return "null"
        return "%.17g" % float(x)
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, np.ndarray):
        return _fmt(x.tolist())
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_fmt(v)}" for k, v in x.items()) + "}"
    raise TypeError(f"cannot serialise {type(x).__name__}")


def _pair(arrs):
    return None if arrs is None else {"vertex": arrs[0], "face": arrs[1]}


def _cube_key(label, prefix):
    return prefix + label


def document_to_dict(doc):
    if isinstance(doc, CubeDocument):
        c = doc.cube
        out = {
            "schema_version": doc.schema_version,
            "kind": "cube",
            "vertices": {_cube_key(k, "v"): c.vertices[k] for k in VERTEX_LABELS if k in c.vertices},
            "faces": {_cube_key(k, "f"): c.faces[k] for k in BOTTOM_FACES + TOP_FACES if k in c.faces},
            "vertex_planes": {_cube_key(k, "v"): c.vertex_planes[k] for k in VERTEX_LABELS if k in c.vertex_planes},
        }
        if c.residuals:
            out["residuals"] = _residuals_to_dict(c.residuals)
        out["metadata"] = doc.metadata
        return out
    out = {
        "schema_version": doc.schema_version,
        "kind": doc.kind,
        "ambient": doc.ambient,
        "window": {"origin": list(doc.origin), "shape": list(doc.shape)},
        "vertex": doc.vertex,
        "face": doc.face,
    }
    for name in ("rho", "sigma", "planes"):
        val = getattr(doc, name)
        if val is not None:
            out[name] = _pair(val)
    out["metadata"] = doc.metadata
    return out


def _residuals_to_dict(res):
    return {
        "meet": dict(res["meet"]),
        "polarity": {f"{f}|v{c}": r for (f, c), r in res["polarity"].items()},
        "max_polarity": res["max_polarity"],
    }


def dumps(doc):
    return _fmt(document_to_dict(doc)) + "\n"


def write_document(doc, path):
    text = dumps(doc)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return text


# ---------------------------------------------------------------------------
# decoding


class _BadConstant:
    def __init__(self, token):
        self.token = token


def _reject_constants(obj, path):
    if isinstance(obj, _BadConstant):
        raise SchemaError(path, f"non-finite number {obj.token} is not allowed")
    if isinstance(obj, dict):
        for k, v in obj.items():
            _reject_constants(v, f"{path}.{k}")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            _reject_constants(v, f"{path}[{i}]")


def _array(obj, path, shape_prefix, width=None):
    if obj is None:
        raise SchemaError(path, "missing")
    try:
        arr = np.array(obj, dtype=float)
    except (TypeError, ValueError):
        raise SchemaError(path, "not a rectangular numeric array") from None
    if arr.shape[: len(shape_prefix)] != tuple(shape_prefix):
        raise SchemaError(path, f"expected leading shape {tuple(shape_prefix)}, got {arr.shape}")
    if width is not None and arr.shape[len(shape_prefix) :] != ((width,) if width else ()):
        raise SchemaError(path, f"expected entries of width {width}, got shape {arr.shape}")
    return arr


def _require(d, key, path):
    if not isinstance(d, dict) or key not in d:
        raise SchemaError(f"{path}.{key}", "missing")
    return d[key]


def document_from_dict(d):
    _reject_constants(d, "$")
    if not isinstance(d, dict):
        raise SchemaError("$", "document must be an object")
    version = _require(d, "schema_version", "$")
    if version != SCHEMA_VERSION:
        raise SchemaError("$.schema_version", f"unsupported version {version!r} (expected {SCHEMA_VERSION})")
    kind = _require(d, "kind", "$")
    if kind == "cube":
        return _cube_from_dict(d)
    if kind != "binet":
        raise SchemaError("$.kind", f"unknown kind {kind!r}")
    win = _require(d, "window", "$")
    origin = _require(win, "origin", "$.window")
    shape = _require(win, "shape", "$.window")
    if not (isinstance(shape, list) and len(shape) == 2 and all(isinstance(s, int) and s >= 2 for s in shape)):
        raise SchemaError("$.window.shape", "expected two integers >= 2")
    if not (isinstance(origin, list) and len(origin) == 2 and all(isinstance(s, int) for s in origin)):
        raise SchemaError("$.window.origin", "expected two integers")
    m, n = shape
    vertex = _array(_require(d, "vertex", "$"), "$.vertex", (m, n))
    face = _array(_require(d, "face", "$"), "$.face", (m - 1, n - 1))
    if vertex.ndim != 3 or face.ndim != 3 or vertex.shape[2] != face.shape[2]:
        raise SchemaError("$.face", "vertex and face entries must be vectors of one length")
    extra = {}
    for name, width in (("rho", 0), ("sigma", 0), ("planes", 4)):
        if name in d and d[name] is not None:
            sub = d[name]
            extra[name] = (
                _array(_require(sub, "vertex", f"$.{name}"), f"$.{name}.vertex", (m, n), width),
                _array(_require(sub, "face", f"$.{name}"), f"$.{name}.face", (m - 1, n - 1), width),
            )
    ambient = d.get("ambient", "E3")
    meta = d.get("metadata", {})
    if not isinstance(meta, dict):
        raise SchemaError("$.metadata", "must be an object")
    return BinetDocument(tuple(origin), vertex, face, ambient=ambient, metadata=meta, **extra)


def _cube_from_dict(d):
    vertices, faces, planes = {}, {}, {}
    for k, v in _require(d, "vertices", "$").items():
        label = k[1:]
        if not k.startswith("v") or label not in VERTEX_LABELS:
            raise SchemaError(f"$.vertices.{k}", "unknown vertex label")
        vertices[label] = _array(v, f"$.vertices.{k}", (5,))
    for k, v in _require(d, "faces", "$").items():
        label = k[1:]
        if not k.startswith("f") or label not in BOTTOM_FACES + TOP_FACES:
            raise SchemaError(f"$.faces.{k}", "unknown face label")
        faces[label] = _array(v, f"$.faces.{k}", (5,))
    for k, v in d.get("vertex_planes", {}).items():
        label = k[1:]
        if not k.startswith("v") or label not in VERTEX_LABELS:
            raise SchemaError(f"$.vertex_planes.{k}", "unknown vertex label")
        planes[label] = _array(v, f"$.vertex_planes.{k}", (3, 5))
    for arrs, where in ((vertices, "vertices"), (faces, "faces"), (planes, "vertex_planes")):
        for k, a in arrs.items():
            if not np.all(np.isfinite(a)):
                raise SchemaError(f"$.{where}", f"entry {k or 'v'} has undefined values")
    return CubeDocument(CubeData(vertices, faces, planes), d.get("metadata", {}))


def loads(text):
    try:
        data = json.loads(text, parse_constant=_BadConstant)
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"invalid JSON: {exc}") from None
    return document_from_dict(data)


def read_document(path):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())
