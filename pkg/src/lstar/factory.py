"""Matrix realisations of the classical families at finite size.

Every algebra is a real subalgebra of gl(N, C) closed under the matrix
adjoint, with inner product ``scale * Re tr(X^dagger Y)`` (Hilbert-Schmidt)
and involution ``X* = X^dagger``.  Complex and quaternionic matrices are
handled as complex N x N matrices and the algebra is treated as a real
vector space (realification); quaternionic families use the 2n x 2n complex
form ``A + Bj -> [[A, -conj(B)], [B, conj(A)]]``, which commutes with
``J = [[0, -I], [I, 0]]``-conjugation.

Basis elements are built from matrix units (``E(i,j) +- E(j,i)``, their
multiples by ``i``, and differences of diagonal units for trace-free
algebras), each split into its skew-Hermitian part (in k) and Hermitian
part (in p), so brackets have small integer structure constants before the
scale is applied.

Noncompact pairs use ``s = -*``.  Compact pairs of types AI..CII are the
duals ``k + i p`` realised inside u(N); compact A, BD, C are group-manifold
pairs over su(n), so(n), sp(n).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from lstar.core import LStarAlgebra
from lstar.errors import SpecError, TypeMismatchError

FAMILIES = ("ai", "aii", "aiii", "bdi", "bdiii", "ci", "cii", "a", "bd", "c")
_TWO_PARAM = {"aiii", "bdi", "cii"}
_MIN_N = {"ai": 2, "aii": 2, "bdiii": 3, "ci": 1, "a": 2, "bd": 3, "c": 1}
_CENTER_OK = {"ai", "aii", "aiii", "a"}


@dataclass(frozen=True)
class FamilySpec:
    """One algebra of the classification tables at finite size.

    ``with_center`` keeps the scalar matrices for the A-type families, giving
    gl / u / u(p, q) as in the tables.  It defaults to True for those
    families; pass False for the simple sl / su truncation.
    """

    family: str
    type_sign: str = "noncompact"
    p: int | None = None
    q: int | None = None
    n: int | None = None
    scale: float = 1.0
    with_center: bool | None = None

    def __post_init__(self):
        fam = str(self.family).lower()
        object.__setattr__(self, "family", fam)
        if fam not in FAMILIES:
            raise SpecError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.type_sign not in ("compact", "noncompact"):
            raise SpecError("type_sign must be 'compact' or 'noncompact'")
        if not self.scale > 0:
            raise SpecError("scale must be positive")
        if fam in _TWO_PARAM:
            if self.p is None or self.q is None or self.p < 1 or self.q < 1:
                raise SpecError(f"{fam} needs integers p >= 1 and q >= 1")
        else:
            if self.n is None or self.n < _MIN_N[fam]:
                raise SpecError(f"{fam} needs n >= {_MIN_N[fam]}")
        if self.with_center is None:
            object.__setattr__(self, "with_center", fam in _CENTER_OK)
        if self.with_center and fam not in _CENTER_OK:
            raise SpecError("with_center only applies to A-type families")

    @property
    def compact(self) -> bool:
        return self.type_sign == "compact"

    @property
    def params(self) -> tuple:
        return (self.p, self.q) if self.family in _TWO_PARAM else (self.n,)


def expected_dim(spec: FamilySpec) -> int:
    """Real dimension of the algebra (the same for a pair and its dual)."""
    f, p, q, n = spec.family, spec.p, spec.q, spec.n
    z = 1 if spec.with_center else 0
    if f == "ai":
        return n * n - 1 + z
    if f == "aii":
        return 4 * n * n - 1 + z
    if f == "aiii":
        return (p + q) ** 2 - 1 + z
    if f == "bdi":
        return (p + q) * (p + q - 1) // 2
    if f == "bdiii":
        return n * (2 * n - 1)
    if f == "ci":
        return n * (2 * n + 1)
    if f == "cii":
        return (p + q) * (2 * (p + q) + 1)
    if f == "a":
        return 2 * (n * n - 1 + z)
    if f == "bd":
        return n * (n - 1)
    return 2 * n * (2 * n + 1)


# -- matrix helpers ------------------------------------------------------------

def _J(n: int) -> np.ndarray:
    j = np.zeros((2 * n, 2 * n), dtype=complex)
    j[:n, n:] = -np.eye(n)
    j[n:, :n] = np.eye(n)
    return j


def _ipq(p: int, q: int) -> np.ndarray:
    return np.diag([1.0] * p + [-1.0] * q).astype(complex)


def _constraints(spec: FamilySpec, compact_form: bool = False):
    """(N, involutions T with L = Fix(T), trace_free) for the noncompact form.

    With ``compact_form`` the compact real form of a complex family is returned.
    """
    f, p, q, n = spec.family, spec.p, spec.q, spec.n
    conj = np.conj
    if f == "ai":
        return n, [conj], not spec.with_center
    if f == "aii":
        J = _J(n)
        return 2 * n, [lambda X: J @ conj(X) @ -J], not spec.with_center
    if f == "aiii":
        K = _ipq(p, q)
        return p + q, [lambda X: -K @ X.conj().T @ K], not spec.with_center
    if f == "bdi":
        K = _ipq(p, q)
        return p + q, [conj, lambda X: -K @ X.T @ K], False
    if f == "bdiii":
        J = _J(n)
        return 2 * n, [lambda X: -X.T, lambda X: J @ conj(X) @ -J], False
    if f == "ci":
        J = _J(n)
        return 2 * n, [conj, lambda X: J @ X.T @ J], False
    if f == "cii":
        J = _J(p + q)
        K = np.diag([1.0] * p + [-1.0] * q + [1.0] * p + [-1.0] * q).astype(complex)
        return 2 * (p + q), [lambda X: J @ conj(X) @ -J,
                             lambda X: -K @ X.conj().T @ K], False
    herm = lambda X: -X.conj().T  # noqa: E731
    if f == "a":
        ts = [herm] if compact_form else []
        return n, ts, not spec.with_center
    if f == "bd":
        ts = [lambda X: -X.T] + ([herm] if compact_form else [])
        return n, ts, False
    J = _J(n)
    ts = [lambda X: J @ X.T @ J] + ([herm] if compact_form else [])
    return 2 * n, ts, False


def _average(X: np.ndarray, invs) -> np.ndarray:
    out = np.zeros_like(X)
    count = 0
    for r in range(len(invs) + 1):
        for sub in combinations(invs, r):
            Y = X
            for t in sub:
                Y = t(Y)
            out = out + Y
            count += 1
    return out / count


def _normalise(X: np.ndarray) -> np.ndarray | None:
    m = np.max(np.abs(X))
    if m < 1e-12:
        return None
    X = X / m
    # fix the overall sign so the first significant entry is +1 or +i
    flat = X.ravel()
    k = int(np.argmax(np.abs(flat) > 0.5))
    z = flat[k]
    phase = 1.0 if abs(z.imag) < 1e-12 else 1j
    if (z / phase).real < 0:
        X = -X
    X = np.round(X * 2) / 2 if np.allclose(X * 2, np.round(X * 2), atol=1e-12) else X
    return X


def _realify(mats) -> np.ndarray:
    mats = np.asarray(mats)
    return np.concatenate([mats.real.reshape(len(mats), -1),
                           mats.imag.reshape(len(mats), -1)], axis=1)


def _label(X: np.ndarray) -> str:
    terms = []
    N = X.shape[0]
    for i in range(N):
        for j in range(N):
            z = X[i, j]
            for val, unit in ((z.real, ""), (z.imag, "i")):
                if abs(val) < 1e-12:
                    continue
                sign = "-" if val < 0 else "+"
                mag = abs(val)
                coef = "" if abs(mag - 1) < 1e-12 else f"{mag:g}*"
                terms.append(f"{sign}{coef}{unit}E({i + 1},{j + 1})")
    s = "".join(terms)
    return s[1:] if s.startswith("+") else s


class _Selector:
    """Greedy selection of linearly independent real matrices."""

    def __init__(self):
        self.mats = []
        self._q = None

    def add(self, X) -> bool:
        v = _realify([X])[0]
        if self._q is not None:
            v_res = v - self._q @ (self._q.T @ v)
        else:
            v_res = v
        if np.linalg.norm(v_res) <= 1e-9 * max(1.0, np.linalg.norm(v)):
            return False
        u = v_res / np.linalg.norm(v_res)
        self._q = u[:, None] if self._q is None else np.hstack([self._q, u[:, None]])
        self.mats.append(X)
        return True


def _matrix_basis(N: int, invs, trace_free: bool):
    """Adapted basis [(matrix, 'k'|'p')] of the fixed algebra of ``invs``."""
    raw = []
    for i in range(N):
        for j in range(N):
            for unit in (1.0, 1j):
                E = np.zeros((N, N), dtype=complex)
                E[i, j] = unit
                X = _average(E, invs)
                for part, Y in (("k", 0.5 * (X - X.conj().T)), ("p", 0.5 * (X + X.conj().T))):
                    Y = _normalise(Y)
                    if Y is not None:
                        raw.append((part, Y))
    chosen = {"k": _Selector(), "p": _Selector()}
    traceful = {}
    for part, Y in raw:
        t = np.trace(Y)
        if trace_free and abs(t) > 1e-12:
            # group by the phase of the trace, modulo sign
            ph = np.angle(t) % np.pi
            key = (part, round(float(ph), 9))
            traceful.setdefault(key, _Selector())
            tr = traceful[key]
            if abs((t / abs(t)) - np.exp(1j * ph)) > 1e-9:
                Y = -Y
            tr.add(Y)
        else:
            chosen[part].add(Y)
    for (part, _), sel in sorted(traceful.items()):
        for A, B in zip(sel.mats[:-1], sel.mats[1:]):
            ta, tb = abs(np.trace(A)), abs(np.trace(B))
            D = A - (ta / tb) * B
            D = _normalise(D)
            if D is not None:
                chosen[part].add(D)
    return [(X, "k") for X in chosen["k"].mats] + [(X, "p") for X in chosen["p"].mats]


def _algebra_from_matrices(mats, star_signs, scale: float, labels) -> LStarAlgebra:
    """Structure constants, HS Gram and star for a closed list of matrices."""
    mats = np.asarray(mats)
    d = len(mats)
    V = _realify(mats)
    hs = V @ V.T
    prod = np.matmul(mats[:, None], mats[None, :])
    comm = prod - np.transpose(prod, (1, 0, 2, 3))
    rhs = _realify(comm.reshape(d * d, *mats.shape[1:]))    # (d*d, 2N^2)
    coef = np.linalg.solve(hs, V @ rhs.T).T                  # (d*d, d)
    if np.max(np.abs(coef @ V - rhs)) > 1e-9 * max(1.0, np.max(np.abs(rhs))):
        raise SpecError("matrix basis is not closed under the commutator")
    rounded = np.round(coef * 2) / 2
    coef = np.where(np.abs(coef - rounded) < 1e-10, rounded, coef)
    c = coef.reshape(d, d, d)
    hs = np.round(hs * 4) / 4 if np.allclose(hs * 4, np.round(hs * 4), atol=1e-10) else hs
    return LStarAlgebra(c, scale * hs, np.diag(np.asarray(star_signs, dtype=float)),
                        tuple(labels))


def _star_signs(mats) -> list:
    out = []
    for X in mats:
        if np.allclose(X.conj().T, X, atol=1e-12):
            out.append(1.0)
        elif np.allclose(X.conj().T, -X, atol=1e-12):
            out.append(-1.0)
        else:
            raise SpecError("basis element is neither Hermitian nor skew-Hermitian")
    return out


@lru_cache(maxsize=None)
def _noncompact_matrices(spec_key: tuple):
    spec = FamilySpec(*spec_key)
    N, invs, trace_free = _constraints(spec)
    basis = _matrix_basis(N, invs, trace_free)
    if len(basis) != expected_dim(spec):
        raise SpecError(f"{spec.family}{spec.params}: built {len(basis)} elements, "
                        f"expected {expected_dim(spec)}")
    return basis


def _key(spec: FamilySpec, **over) -> tuple:
    vals = dict(family=spec.family, type_sign="noncompact", p=spec.p, q=spec.q,
                n=spec.n, scale=1.0, with_center=spec.with_center)
    vals.update(over)
    return tuple(vals[k] for k in ("family", "type_sign", "p", "q", "n", "scale",
                                   "with_center"))


def matrix_basis(spec: FamilySpec) -> list:
    """[(label, complex matrix, 'k' | 'p')] realising ``make_pair(spec)``.

    Not defined for the compact complex families (A, BD, C), which are
    group-manifold pairs.
    """
    if spec.compact and spec.family in ("a", "bd", "c"):
        raise SpecError("compact A/BD/C pairs are group-manifold pairs, not matrix algebras")
    basis = _noncompact_matrices(_key(spec))
    out = []
    for X, part in basis:
        Y = 1j * X if (spec.compact and part == "p") else X
        out.append((_label(Y), Y, part))
    return out


def compact_real_form(spec: FamilySpec) -> LStarAlgebra:
    """The compact simple algebra su(n), so(n) or sp(n) behind A, BD, C."""
    N, invs, trace_free = _constraints(spec, compact_form=True)
    basis = [X for X, _ in _matrix_basis(N, invs, trace_free)]
    want = expected_dim(spec) // 2
    if len(basis) != want:
        raise SpecError(f"compact form of {spec.family}: {len(basis)} != {want}")
    return _algebra_from_matrices(basis, _star_signs(basis), spec.scale,
                                  [_label(X) for X in basis])


def make_algebra(spec: FamilySpec) -> LStarAlgebra:
    """The L*-algebra of ``spec`` (see :func:`make_pair` for the involution)."""
    return make_pair(spec).algebra


def make_pair(spec: FamilySpec):
    """Symmetric pair of ``spec``; basis ordered k first, then p."""
    from lstar.pairs import SymmetricPair, make_group_manifold_pair

    if spec.compact and spec.family in ("a", "bd", "c"):
        return make_group_manifold_pair(compact_real_form(spec))
    basis = matrix_basis(spec)
    mats = [X for _, X, _ in basis]
    parts = [part for _, _, part in basis]
    algebra = _algebra_from_matrices(mats, _star_signs(mats), spec.scale,
                                     [lab for lab, _, _ in basis])
    s = np.diag([1.0 if part == "k" else -1.0 for part in parts])
    return SymmetricPair.from_involution(algebra, s)


def all_specs(max_param: int = 4, scales=(1.0,), signs=("noncompact", "compact")):
    """Every valid spec with p, q, n <= max_param."""
    out = []
    for fam in FAMILIES:
        for sign in signs:
            for scale in scales:
                if fam in _TWO_PARAM:
                    for p in range(1, max_param + 1):
                        for q in range(1, max_param + 1):
                            out.append(FamilySpec(fam, sign, p=p, q=q, scale=scale))
                else:
                    for n in range(_MIN_N[fam], max_param + 1):
                        out.append(FamilySpec(fam, sign, n=n, scale=scale))
    return out


def require_compact(L: LStarAlgebra, tol: float = 1e-9) -> None:
    if L.dim == 0 or np.max(np.abs(L.star + np.eye(L.dim))) > tol:
        raise TypeMismatchError("algebra is not of compact type (x* != -x)")
