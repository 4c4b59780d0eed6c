"""Finite-dimensional L*-algebras.

An algebra is stored by its structure constants ``c[i, j, k]`` with
``[e_i, e_j] = sum_k c[i, j, k] e_k``, a Gram matrix ``G`` for the inner
product and a matrix ``S`` for the involution ``x -> x*`` acting on
coefficient column vectors.  The defining identity checked throughout is

    <[x, y], z> = <y, [x*, z]>.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy import linalg
from scipy.sparse.csgraph import connected_components

from lstar.errors import (
    BoundViolationError,
    DegeneracyError,
    InvalidCartanError,
    InvalidMetricError,
    NotSemisimpleError,
    StructuralError,
)

DEFAULT_TOL = 1e-9
RANK_RTOL = 1e-7


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class LStarAlgebra:
    structure: np.ndarray
    gram: np.ndarray
    star: np.ndarray
    labels: tuple = ()
    certified_constant: float | None = None

    def __post_init__(self):
        c = _frozen(self.structure)
        if c.ndim != 3 or not (c.shape[0] == c.shape[1] == c.shape[2]):
            raise StructuralError(f"structure must have shape (d, d, d), got {c.shape}")
        d = c.shape[0]
        g = _frozen(self.gram)
        s = _frozen(self.star)
        if g.shape != (d, d) or s.shape != (d, d):
            raise StructuralError(
                f"gram {g.shape} and star {s.shape} must both be ({d}, {d})")
        labels = tuple(self.labels) if self.labels else tuple(f"e{i}" for i in range(d))
        if len(labels) != d:
            raise StructuralError(f"{len(labels)} labels for dimension {d}")
        object.__setattr__(self, "structure", c)
        object.__setattr__(self, "gram", g)
        object.__setattr__(self, "star", s)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.structure.shape[0]

    def with_labels(self, labels) -> "LStarAlgebra":
        return LStarAlgebra(self.structure, self.gram, self.star, tuple(labels),
                            self.certified_constant)


@dataclass(frozen=True)
class ResidualReport:
    """Max absolute violation of each axiom over basis elements."""

    antisymmetry: float
    jacobi: float
    lstar: float
    involution: float
    isometry: float
    tol: float = DEFAULT_TOL

    @property
    def max_residual(self) -> float:
        return max(self.antisymmetry, self.jacobi, self.lstar, self.involution,
                   self.isometry)

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol

    def to_dict(self) -> dict:
        return {
            "antisymmetry": self.antisymmetry,
            "jacobi": self.jacobi,
            "lstar": self.lstar,
            "involution": self.involution,
            "isometry": self.isometry,
            "tol": self.tol,
            "passed": self.passed,
        }


# -- basic linear algebra on the Gram form ---------------------------------

def gram_factor(gram: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor ``F`` with ``G = F F^T``."""
    g = np.asarray(gram, dtype=float)
    if g.size and np.max(np.abs(g - g.T)) > 1e-12 * max(1.0, np.max(np.abs(g))):
        raise InvalidMetricError("Gram matrix is not symmetric")
    try:
        return np.linalg.cholesky(0.5 * (g + g.T))
    except np.linalg.LinAlgError as exc:
        raise InvalidMetricError("Gram matrix is not positive definite") from exc


def orthonormal_frame(gram: np.ndarray) -> np.ndarray:
    """Columns form a G-orthonormal basis: ``B^T G B = I``."""
    f = gram_factor(gram)
    return linalg.solve_triangular(f, np.eye(len(f)), lower=True).T


def lowdin(vectors: np.ndarray, gram: np.ndarray) -> np.ndarray:
    """Symmetric (Loewdin) G-orthonormalisation of independent columns."""
    m = vectors.T @ gram @ vectors
    w, u = np.linalg.eigh(0.5 * (m + m.T))
    if w.size and w.min() <= 0:
        raise DegeneracyError("columns are not linearly independent")
    return vectors @ (u / np.sqrt(w)) @ u.T


def null_space(mat: np.ndarray, rtol: float = RANK_RTOL) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal kernel basis (columns) and the singular values of ``mat``."""
    n = mat.shape[1]
    if mat.size == 0:
        return np.eye(n), np.zeros(0)
    # right singular vectors only; full_matrices is needed just for wide input
    _, sv, vt = np.linalg.svd(mat, full_matrices=mat.shape[0] < n)
    smax = sv[0] if sv.size else 0.0
    rank = int(np.sum(sv > rtol * smax)) if smax > 0 else 0
    return vt[rank:].T.copy(), sv


def range_basis(mat: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis (columns) of the column space of ``mat``."""
    if mat.size == 0:
        return np.zeros((mat.shape[0], 0))
    u, sv, _ = np.linalg.svd(mat, full_matrices=False)
    if sv.size == 0 or sv[0] == 0:
        return np.zeros((mat.shape[0], 0))
    return u[:, sv > rtol * sv[0]].copy()


# -- brackets ---------------------------------------------------------------

def bracket(L: LStarAlgebra, x, y) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (L.dim,) or y.shape != (L.dim,):
        raise StructuralError("coefficient vectors must have length dim")
    return np.einsum("i,j,ijk->k", x, y, L.structure)


def bracket_many(c: np.ndarray, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """All brackets between columns: result[a, b] = [X_a, Y_b]."""
    t = np.tensordot(X, c, axes=([0], [0]))        # (a, j, k)
    return np.transpose(np.tensordot(t, Y, axes=([1], [0])), (0, 2, 1))


def ad_matrix(L: LStarAlgebra, x) -> np.ndarray:
    """Matrix of ``y -> [x, y]`` acting on coefficient vectors."""
    x = np.asarray(x, dtype=float)
    if x.shape != (L.dim,):
        raise StructuralError("coefficient vector must have length dim")
    return np.einsum("i,ijk->kj", x, L.structure)


def ad_matrices(c: np.ndarray) -> np.ndarray:
    """Stack of ``ad(e_i)``: ``A[i] @ y = [e_i, y]``."""
    return np.transpose(c, (0, 2, 1))


def ad_norm(L: LStarAlgebra, x) -> float:
    """Operator norm of ``ad(x)`` with respect to the G-inner product."""
    f = gram_factor(L.gram)
    a = ad_matrix(L, x)
    # in coordinates u = F^T x the form is Euclidean
    m = f.T @ a @ linalg.solve_triangular(f, np.eye(L.dim), lower=True).T
    return float(np.linalg.norm(m, 2)) if L.dim else 0.0


def norm(L: LStarAlgebra, x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.sqrt(max(x @ L.gram @ x, 0.0)))


def change_basis(L: LStarAlgebra, B: np.ndarray, labels=None) -> LStarAlgebra:
    """Express ``L`` in the basis given by the (invertible) columns of ``B``."""
    B = np.asarray(B, dtype=float)
    binv = np.linalg.inv(B)
    br = bracket_many(L.structure, B, B)          # (a, b, k) in old coordinates
    c = br @ binv.T
    return LStarAlgebra(c, B.T @ L.gram @ B, binv @ L.star @ B,
                        labels or tuple(f"f{i}" for i in range(B.shape[1])),
                        L.certified_constant)


def subalgebra(L: LStarAlgebra, B: np.ndarray, labels=None, tol: float = 1e-8) -> LStarAlgebra:
    """Restrict ``L`` to the span of the G-orthonormal columns of ``B``.

    The span must be closed under the bracket and the involution.
    """
    B = np.asarray(B, dtype=float)
    r = B.shape[1]
    if r == 0:
        return LStarAlgebra(np.zeros((0, 0, 0)), np.zeros((0, 0)), np.zeros((0, 0)))
    br = bracket_many(L.structure, B, B)
    coef = br @ (L.gram @ B)
    back = coef @ B.T
    scale = max(1.0, float(np.max(np.abs(br))))
    if np.max(np.abs(back - br)) > tol * scale:
        raise DegeneracyError("span is not closed under the bracket")
    star = B.T @ L.gram @ L.star @ B
    if np.max(np.abs(B @ star - L.star @ B)) > tol * max(1.0, np.max(np.abs(L.star))):
        raise DegeneracyError("span is not invariant under the involution")
    return LStarAlgebra(coef, B.T @ L.gram @ B, star,
                        labels or tuple(f"f{i}" for i in range(r)))


# -- axiom checks -----------------------------------------------------------

def _jacobi_dense(c: np.ndarray) -> float:
    d = c.shape[0]
    flat = c.reshape(d * d, d)                     # ((j,k), m)
    ct = np.ascontiguousarray(np.transpose(c, (2, 1, 0)))   # ct[n, m, i]; contiguous keeps BLAS
    worst = 0.0
    for n in range(d):
        # t[j, k, i] = sum_m c[j,k,m] c[i,m,n]  ==  component n of [e_i, [e_j, e_k]]
        t = (flat @ ct[n]).reshape(d, d, d)
        t = np.transpose(t, (2, 0, 1))             # t[i, j, k]
        cyc = t + np.transpose(t, (1, 2, 0)) + np.transpose(t, (2, 0, 1))
        worst = max(worst, float(np.max(np.abs(cyc))))
    return worst


def _jacobi_sparse(c: np.ndarray) -> float:
    d = c.shape[0]
    inner = sparse.csr_matrix(c.reshape(d * d, d))                       # ((j,k), m)
    outer = sparse.csr_matrix(np.transpose(c, (1, 0, 2)).reshape(d, d * d))  # (m, (i,n))
    t = (inner @ outer).tocoo()
    if t.nnz == 0:
        return 0.0
    j, k = np.divmod(t.row, d)
    i, n = np.divmod(t.col, d)
    # t(i,j,k) + t(j,k,i) + t(k,i,j): re-key each entry under the three rotations
    keys = np.concatenate([((i * d + j) * d + k) * d + n,
                           ((k * d + i) * d + j) * d + n,
                           ((j * d + k) * d + i) * d + n])
    vals = np.tile(t.data, 3)
    uniq, inv = np.unique(keys, return_inverse=True)
    return float(np.max(np.abs(np.bincount(inv, weights=vals, minlength=uniq.size))))


def automorphism_residual(c: np.ndarray, s: np.ndarray) -> float:
    """Max |s[e_a,e_b] - [s e_a, s e_b]|."""
    d = c.shape[0]
    lhs = (c.reshape(d * d, d) @ s.T).reshape(d, d, d)
    t = np.tensordot(s, c, axes=([0], [0]))                 # [a, j, k]
    rhs = np.tensordot(t, s, axes=([1], [0]))               # [a, k, b]
    return float(np.max(np.abs(lhs - np.transpose(rhs, (0, 2, 1)))))


def jacobi_residual(c: np.ndarray) -> float:
    """Max |[e_i,[e_j,e_k]] + cyclic| over basis triples.

    Sparse structure tensors (the usual case for matrix bases) go through a
    sparse product; dense ones loop over the output index at O(d^3) memory.
    """
    d = c.shape[0]
    if d == 0:
        return 0.0
    if d >= 16 and np.count_nonzero(c) < 0.05 * c.size:
        return _jacobi_sparse(c)
    return _jacobi_dense(c)


def lstar_residual(c: np.ndarray, gram: np.ndarray, star: np.ndarray) -> float:
    """Max |<[e_i,e_j],e_k> - <e_j,[e_i*,e_k]>|."""
    d = c.shape[0]
    if d == 0:
        return 0.0
    lhs = (c.reshape(d * d, d) @ gram).reshape(d, d, d)             # [i,j,k]
    t = np.tensordot(c, gram, axes=([2], [1]))                      # [a,k,j]
    rhs = np.tensordot(star, t, axes=([0], [0]))                    # [i,k,j]
    return float(np.max(np.abs(lhs - np.transpose(rhs, (0, 2, 1)))))


def verify_lstar_axiom(L: LStarAlgebra, tol: float = DEFAULT_TOL) -> ResidualReport:
    """Check antisymmetry, Jacobi, the L* identity and the involution."""
    gram_factor(L.gram)
    c = L.structure
    d = L.dim
    if d == 0:
        return ResidualReport(0.0, 0.0, 0.0, 0.0, 0.0, tol)
    anti = float(np.max(np.abs(c + np.transpose(c, (1, 0, 2)))))
    S = L.star
    inv = float(np.max(np.abs(S @ S - np.eye(d))))
    iso = float(np.max(np.abs(S.T @ L.gram @ S - L.gram)))
    return ResidualReport(anti, jacobi_residual(c), lstar_residual(c, L.gram, S),
                          inv, iso, tol)


def bracket_span_rank(L: LStarAlgebra, rtol: float = RANK_RTOL) -> int:
    d = L.dim
    if d == 0:
        return 0
    sv = np.linalg.svd(L.structure.reshape(d * d, d), compute_uv=False)
    return int(np.sum(sv > rtol * sv[0])) if sv[0] > 0 else 0


def is_semisimple(L: LStarAlgebra, rtol: float = RANK_RTOL) -> bool:
    """True iff the brackets [e_i, e_j] span the whole algebra."""
    return L.dim > 0 and bracket_span_rank(L, rtol) == L.dim


def killing_form(c: np.ndarray) -> np.ndarray:
    a = ad_matrices(c)
    d = a.shape[0]
    return a.reshape(d, -1) @ np.transpose(a, (0, 2, 1)).reshape(d, -1).T


def killing_signature(L: LStarAlgebra, rtol: float = RANK_RTOL) -> tuple[int, int, int]:
    """(positive, negative, zero) counts of the Killing form; diagnostic only."""
    b = killing_form(L.structure)
    w = np.linalg.eigvalsh(0.5 * (b + b.T))
    cut = rtol * max(1.0, np.max(np.abs(w))) if w.size else 0.0
    return int(np.sum(w > cut)), int(np.sum(w < -cut)), int(np.sum(np.abs(w) <= cut))


# -- ad constants and Hilbertian sums ----------------------------------------

def ad_constant(L: LStarAlgebra) -> float:
    """A certified C with ``||ad(x)|| <= C ||x||`` for all x.

    In a G-orthonormal basis the map ``x -> ad(x)`` is a d^2 x d matrix; its
    largest singular value bounds the Frobenius, hence operator, norm.
    """
    if L.certified_constant is not None:
        return float(L.certified_constant)
    if L.dim == 0:
        return 0.0
    on = change_basis(L, orthonormal_frame(L.gram))
    d = L.dim
    unfold = np.transpose(on.structure, (1, 2, 0)).reshape(d * d, d)
    return float(np.linalg.norm(unfold, 2))


def direct_sum(summands) -> LStarAlgebra:
    """Block direct sum, no bound bookkeeping."""
    dims = [A.dim for A in summands]
    d = sum(dims)
    c = np.zeros((d, d, d))
    g = np.zeros((d, d))
    s = np.zeros((d, d))
    labels = []
    off = 0
    for idx, A in enumerate(summands):
        sl = slice(off, off + A.dim)
        c[sl, sl, sl] = A.structure
        g[sl, sl] = A.gram
        s[sl, sl] = A.star
        labels.extend(f"{idx}:{lab}" for lab in A.labels)
        off += A.dim
    return LStarAlgebra(c, g, s, tuple(labels))


def hilbertian_sum(summands, C_bound: float) -> LStarAlgebra:
    """Orthogonal sum of L*-algebras with a uniform bound on ad.

    Raises BoundViolationError naming the first factor whose ad constant
    exceeds ``C_bound``; the returned algebra records the certified constant
    (the supremum over factors).
    """
    summands = list(summands)
    if not summands:
        raise StructuralError("empty Hilbertian sum")
    consts = [ad_constant(A) for A in summands]
    for idx, k in enumerate(consts):
        if k > C_bound * (1 + 1e-12):
            raise BoundViolationError(
                f"factor {idx} has ad constant {k:.6g} > bound {C_bound:.6g}")
    out = direct_sum(summands)
    return LStarAlgebra(out.structure, out.gram, out.star, out.labels, max(consts))


# -- ideals ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class IdealDecomposition:
    """Ideals in an adapted G-orthonormal basis.

    ``basis`` holds the adapted basis as coefficient columns (``B^T G B = I``);
    ``blocks[i]`` lists the columns of ``basis`` spanning ideal ``i``.
    """

    blocks: list
    types: list
    basis: np.ndarray
    cross_residual: float = 0.0
    gram_factor: np.ndarray = field(default=None, repr=False)

    @property
    def change_of_basis(self) -> np.ndarray:
        """Orthogonal matrix from Euclidean (G-orthonormal) coordinates to the adapted basis."""
        return self.gram_factor.T @ self.basis

    def block_basis(self, i: int) -> np.ndarray:
        return self.basis[:, self.blocks[i]]

    @property
    def sizes(self) -> list:
        return [len(b) for b in self.blocks]


def _split_once(Lon: LStarAlgebra, W: np.ndarray, rng, rtol: float):
    """Connected components of a random symmetric element of the envelope."""
    d = Lon.dim
    A = ad_matrices(Lon.structure)
    env = np.zeros((d, d))
    for _ in range(3):
        x = rng.standard_normal(d)
        ax = np.tensordot(x, A, axes=([0], [0]))
        env += rng.uniform(0.5, 1.5) * ax @ ax.T
    env_w = W.T @ env @ W
    w, v = np.linalg.eigh(0.5 * (env_w + env_w.T))
    vecs = W @ v
    n = vecs.shape[1]
    adj = np.zeros((n, n), dtype=bool)
    scale = max(float(np.max(np.abs(w))), 1e-300)
    order = np.argsort(w)
    for a, b in zip(order[:-1], order[1:]):
        if abs(w[b] - w[a]) <= 1e-8 * scale:
            adj[a, b] = adj[b, a] = True
    av = np.tensordot(A, vecs, axes=([2], [0]))                # (i, a, v)
    couple = np.max(np.abs(np.tensordot(vecs, av, axes=([0], [1]))), axis=1)  # (u, i, v)
    cscale = max(float(np.max(couple)), 1e-300)
    adj |= couple > rtol * cscale
    ncomp, lab = connected_components(adj, directed=False)
    return [vecs[:, lab == k] for k in range(ncomp)]


def decompose_ideals(L: LStarAlgebra, tol: float = DEFAULT_TOL,
                     rank_rtol: float = RANK_RTOL, seeds=(0, 1)) -> IdealDecomposition:
    """Split ``L`` into its center and minimal ideals.

    The center is the kernel of ``x -> ([x, e_i])_i``.  On its orthogonal
    complement the eigenvectors of a random positive element of the
    associative envelope of ``ad(L)`` are grouped into connected components
    of the relation "coupled by some ad(e_i) or numerically degenerate";
    each component spans one minimal ideal.  Two seeds must agree on the
    block sizes.
    """
    d = L.dim
    F = gram_factor(L.gram)
    on_frame = linalg.solve_triangular(F, np.eye(d), lower=True).T
    Lon = change_basis(L, on_frame)
    c = Lon.structure
    # rows (i, k), columns j: ([e_j, e_i])_k
    M = np.transpose(c, (1, 2, 0)).reshape(d * d, d)
    Z, _ = null_space(M, rank_rtol)
    W = null_space(Z.T)[0] if Z.shape[1] else np.eye(d)
    results = []
    for seed in seeds:
        rng = np.random.default_rng(seed)
        comps = _split_once(Lon, W, rng, rank_rtol) if W.shape[1] else []
        results.append(comps)
    sizes = [sorted(x.shape[1] for x in comps) for comps in results]
    if any(s != sizes[0] for s in sizes):
        raise DegeneracyError(
            f"ideal block sizes disagree across seeds: {sizes}; adjust rank_rtol")
    comps = results[0]

    def first_index(m):
        p = np.sum(m * m, axis=1)
        return int(np.argmax(p > 1e-6 * p.max()))

    comps = sorted(comps, key=first_index)
    blocks_vecs = ([Z] if Z.shape[1] else []) + comps
    types = (["abelian"] if Z.shape[1] else [])
    Son = Lon.star
    for m in comps:
        sm = Son @ m
        if np.max(np.abs(sm - m @ (m.T @ sm))) > max(tol, 1e-8):
            raise DegeneracyError("an ideal is not invariant under the involution")
        types.append("simple-compact" if np.max(np.abs(sm + m)) <= max(tol, 1e-8)
                     else "simple-noncompact")
    U = np.hstack(blocks_vecs) if blocks_vecs else np.zeros((d, 0))
    blocks = []
    off = 0
    for m in blocks_vecs:
        blocks.append(list(range(off, off + m.shape[1])))
        off += m.shape[1]
    # cross brackets in the adapted orthonormal basis
    cross = 0.0
    for a in range(len(blocks_vecs)):
        for b in range(a + 1, len(blocks_vecs)):
            br = bracket_many(c, blocks_vecs[a], blocks_vecs[b])
            cross = max(cross, float(np.max(np.abs(br))) if br.size else 0.0)
    scale = max(1.0, float(np.max(np.abs(c)))) if d else 1.0
    if cross > max(tol, 1e-8) * scale:
        raise DegeneracyError(f"cross-ideal brackets {cross:.3e} exceed tolerance")
    return IdealDecomposition(blocks, types, on_frame @ U, cross, F)


def block_algebras(L: LStarAlgebra, dec: IdealDecomposition) -> list:
    return [subalgebra(L, dec.block_basis(i)) for i in range(len(dec.blocks))]


def reassemble(L: LStarAlgebra, dec: IdealDecomposition) -> tuple[LStarAlgebra, LStarAlgebra]:
    """(Hilbertian sum of the blocks, L expressed in the adapted basis)."""
    parts = block_algebras(L, dec)
    summed = hilbertian_sum(parts, max(ad_constant(p) for p in parts))
    return summed, change_basis(L, dec.basis)


# -- Killing-form construction ------------------------------------------------

def lstar_from_killing(structure, cartan_involution, labels=None,
                       tol: float = DEFAULT_TOL) -> LStarAlgebra:
    """L*-structure on a real semisimple Lie algebra from a Cartan involution.

    ``x* = -theta(x)`` and ``<x, y> = B(x, y*)`` with ``B`` the Killing form.
    """
    c = np.asarray(structure, dtype=float)
    theta = np.asarray(cartan_involution, dtype=float)
    d = c.shape[0]
    B = killing_form(c)
    wb = np.linalg.eigvalsh(B)
    if d == 0 or np.min(np.abs(wb)) <= RANK_RTOL * max(1.0, np.max(np.abs(wb))):
        raise NotSemisimpleError("Killing form is degenerate")
    if np.max(np.abs(theta @ theta - np.eye(d))) > tol:
        raise InvalidCartanError("theta is not an involution")
    auto = automorphism_residual(c, theta)
    if auto > tol * max(1.0, np.max(np.abs(c))):
        raise InvalidCartanError("theta is not a Lie algebra automorphism")
    S = -theta
    G = B @ S
    if np.max(np.abs(G - G.T)) > tol * max(1.0, np.max(np.abs(G))):
        raise InvalidCartanError("B(x, theta y) is not symmetric")
    G = 0.5 * (G + G.T)
    if np.linalg.eigvalsh(G).min() <= 0:
        raise InvalidCartanError(
            "Killing form is not negative definite on the fixed space of theta")
    return LStarAlgebra(c, G, S, labels or ())


def so3() -> LStarAlgebra:
    """so(3) with [e1, e2] = e3 (cyclic), x* = -x, Gram = -Killing = 2 Id."""
    c = np.zeros((3, 3, 3))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        c[i, j, k] = 1.0
        c[j, i, k] = -1.0
    return LStarAlgebra(c, 2.0 * np.eye(3), -np.eye(3), ("e1", "e2", "e3"))


def abelian(dim: int, star_sign: float = -1.0) -> LStarAlgebra:
    return LStarAlgebra(np.zeros((dim, dim, dim)), np.eye(dim), star_sign * np.eye(dim))
