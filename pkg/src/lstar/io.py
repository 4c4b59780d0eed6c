"""JSON/CSV formats.  Floats are written with 17 significant digits so doubles round-trip."""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from lstar.core import LStarAlgebra
from lstar.errors import StructuralError


def _fmt(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        return json.dumps(None)
    if x == int(x) and abs(x) < 1e15:
        return str(int(x)) + ".0" if x != 0 else "0.0"
    return "%.17g" % x


def dumps(obj, indent: int = 1, _level: int = 0) -> str:
    """Deterministic JSON: sorted keys, 17-digit floats, short lists kept on one line."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}"
                 for k, v in sorted(obj.items())]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (list, tuple, dict, np.ndarray)) for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(obj)
    return json.dumps(str(obj))


def _dense(mat: np.ndarray) -> list:
    return [[float(v) for v in row] for row in np.asarray(mat)]


def _sparse(t: np.ndarray) -> list:
    idx = np.argwhere(t != 0)
    return [[*map(int, ix), float(t[tuple(ix)])] for ix in idx]


def _from_sparse(entries, shape) -> np.ndarray:
    t = np.zeros(shape)
    for e in entries:
        if len(e) != len(shape) + 1:
            raise StructuralError(f"sparse entry {e} has the wrong length")
        t[tuple(int(i) for i in e[:-1])] = float(e[-1])
    return t


def algebra_to_dict(L: LStarAlgebra) -> dict:
    return dict(dim=L.dim, labels=list(L.labels), structure=_sparse(L.structure),
                gram=_dense(L.gram), star=_dense(L.star))


def algebra_from_dict(d: dict) -> LStarAlgebra:
    try:
        n = int(d["dim"])
        c = _from_sparse(d["structure"], (n, n, n))
        return LStarAlgebra(c, np.array(d["gram"], dtype=float).reshape(n, n),
                            np.array(d["star"], dtype=float).reshape(n, n),
                            tuple(d.get("labels") or ()))
    except (KeyError, TypeError, ValueError, IndexError) as e:
        raise StructuralError(f"malformed algebra JSON: {e}") from e


def pair_to_dict(pair) -> dict:
    out = algebra_to_dict(pair.algebra)
    out["s"] = _dense(pair.s)
    return out


def pair_from_dict(d: dict):
    from lstar.pairs import SymmetricPair

    L = algebra_from_dict(d)
    if "s" not in d:
        raise StructuralError("pair JSON needs an involution 's'")
    s = np.array(d["s"], dtype=float)
    if s.shape != (L.dim, L.dim):
        raise StructuralError("involution has the wrong shape")
    return SymmetricPair.from_involution(L, s)


def curvature_to_dict(data) -> dict:
    return dict(p_dim=data.p_dim, p_gram=_dense(data.p_gram), R=_sparse(data.R))


def curvature_from_dict(d: dict):
    from lstar.curvature import CurvatureData

    try:
        m = int(d["p_dim"])
        g = np.array(d["p_gram"], dtype=float).reshape(m, m)
        return CurvatureData(g, _from_sparse(d["R"], (m,) * 4))
    except (KeyError, TypeError, ValueError, IndexError) as e:
        raise StructuralError(f"malformed curvature JSON: {e}") from e


def l2point_to_dict(x) -> dict:
    return dict(atoms=[dict(w=w, h=[float(v) for v in h.coords]) for w, h in x.atoms])


def l2point_from_dict(d: dict):
    from lstar.cat0 import HypPoint, L2HypPoint

    return L2HypPoint(tuple((a["w"], HypPoint.from_coords(a["h"])) for a in d["atoms"]))


def read_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        import sys

        sys.stdout.write(text)
        return
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def sweep_csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()
