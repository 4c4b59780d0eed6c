"""Riemann tensor, curvature operator and the inverse construction from curvature data.

Sign convention: ``R(X, Y, Z, T) = g([Z, [X, Y]], T)`` and
``Sec(X, Y) = -R(X, Y, X, Y) / |X ^ Y|^2``.  Noncompact pairs therefore have
``R(X, Y, X, Y) = |[X, Y]|^2 >= 0`` and nonpositive sectional curvature.

Bivectors use the lexicographic basis ``e_a ^ e_b`` (a < b) with the
determinant inner product.  Identifying ``X ^ Y`` with the skew operator
``Z -> g(X, Z) Y - g(Y, Z) X`` and pairing operators by ``trace(A^T B)``
doubles every inner product, i.e. the identification is an isometry up to
a factor ``sqrt(2)``.  All certificates are computed on the determinant
side, where this factor never appears.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import linalg
from scipy.sparse.linalg import eigsh

from lstar.core import (
    LStarAlgebra,
    bracket_many,
    gram_factor,
    killing_form,
    orthonormal_frame,
    verify_lstar_axiom,
)
from lstar.errors import (
    ConditioningError,
    DegeneratePlaneError,
    SignMismatchError,
    StructuralError,
)
from lstar.pairs import SymmetricPair

COND_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class CurvatureData:
    p_gram: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        g = np.array(self.p_gram, dtype=float)
        R = np.array(self.R, dtype=float)
        m = g.shape[0]
        if g.shape != (m, m) or R.shape != (m,) * 4:
            raise StructuralError(f"shapes {g.shape} and {R.shape} do not match")
        if m:
            gram_factor(g)
        g.setflags(write=False)
        R.setflags(write=False)
        object.__setattr__(self, "p_gram", g)
        object.__setattr__(self, "R", R)

    @property
    def p_dim(self) -> int:
        return self.p_gram.shape[0]

    def orthonormal(self) -> "CurvatureData":
        """The same tensor written in a g-orthonormal basis."""
        if self.p_dim == 0:
            return self
        return transport(self, orthonormal_frame(self.p_gram))

    @cached_property
    def kappa(self) -> float:
        """Bound on |R(X, Y, Z, T)| over g-unit vectors.

        Operator norm of R seen as a symmetric map on p (x) p in
        orthonormal coordinates, which dominates every unit 4-tuple.
        """
        m = self.p_dim
        if m == 0:
            return 0.0
        Rm = self.orthonormal().R.reshape(m * m, m * m)
        Rm = 0.5 * (Rm + Rm.T)
        if m * m <= 400:
            return float(np.max(np.abs(np.linalg.eigvalsh(Rm))))
        return float(abs(eigsh(Rm, k=1, which="LM", return_eigenvectors=False)[0]))


def transport(data: CurvatureData, phi: np.ndarray) -> CurvatureData:
    """Pull back along ``phi`` (columns = images of new basis vectors)."""
    R = data.R
    for _ in range(4):
        # contract the leading index and rotate it to the back
        R = np.tensordot(R, phi, axes=([0], [0]))
    return CurvatureData(phi.T @ data.p_gram @ phi, R)


@dataclass(frozen=True)
class SymmetryReport:
    antisym_12: float
    antisym_34: float
    pair_symmetry: float
    bianchi: float
    kappa: float
    tol: float = 1e-12

    @property
    def max_residual(self) -> float:
        return max(self.antisym_12, self.antisym_34, self.pair_symmetry, self.bianchi)

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol

    def to_dict(self) -> dict:
        out = dict(self.__dict__)
        out["passed"] = self.passed
        return out


def symmetry_report(data: CurvatureData, tol: float = 1e-12, with_kappa: bool = True) -> SymmetryReport:
    R = data.R
    if data.p_dim == 0:
        return SymmetryReport(0.0, 0.0, 0.0, 0.0, 0.0, tol)

    def mx(a):
        return float(np.max(np.abs(a)))

    return SymmetryReport(
        mx(R + np.transpose(R, (1, 0, 2, 3))),
        mx(R + np.transpose(R, (0, 1, 3, 2))),
        mx(R - np.transpose(R, (2, 3, 0, 1))),
        mx(R + np.transpose(R, (1, 2, 0, 3)) + np.transpose(R, (2, 0, 1, 3))),
        data.kappa if with_kappa else float("nan"),
        tol,
    )


def riemann_tensor(pair: SymmetricPair, basis: np.ndarray | None = None) -> CurvatureData:
    """R[a,b,c,d] = g([P_c, [P_a, P_b]], P_d) for the columns P of ``basis``.

    ``basis`` defaults to the G-orthonormal p-basis of the pair.
    """
    L = pair.algebra
    P = pair.p_basis if basis is None else np.asarray(basis, dtype=float)
    m = P.shape[1]
    g = P.T @ L.gram @ P
    if m == 0:
        return CurvatureData(g, np.zeros((0, 0, 0, 0)))
    c = L.structure
    W = bracket_many(c, P, P)                               # (a, b, j): [P_a, P_b]
    T = np.tensordot(P, c, axes=([0], [0]))                 # (c, j, k): [P_c, e_j]
    Z = T @ (L.gram @ P)                                    # (c, j, d)
    R = np.tensordot(W, Z, axes=([2], [1]))                 # (a, b, c, d)
    return CurvatureData(g, R)


def wedge_indices(m: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(m, k=1)


def wedge_gram(p_gram: np.ndarray, p_dim: int | None = None) -> np.ndarray:
    """Gram of e_a ^ e_b (a < b): entries g_ac g_bd - g_ad g_bc."""
    g = np.asarray(p_gram, dtype=float)
    m = g.shape[0] if p_dim is None else p_dim
    if g.shape != (m, m):
        raise StructuralError("p_gram does not match p_dim")
    a, b = wedge_indices(m)
    return g[np.ix_(a, a)] * g[np.ix_(b, b)] - g[np.ix_(a, b)] * g[np.ix_(b, a)]


def wedge_form(data: CurvatureData) -> np.ndarray:
    """The form (e_a ^ e_b, e_c ^ e_d) = R(a, b, c, d) on the wedge basis."""
    a, b = wedge_indices(data.p_dim)
    if a.size == 0:
        return np.zeros((0, 0))
    Rw = data.R[a[:, None], b[:, None], a[None, :], b[None, :]]
    return 0.5 * (Rw + Rw.T)


@dataclass(frozen=True, eq=False)
class SignCertificate:
    eigenvalues: np.ndarray
    label: str
    tol: float

    def to_dict(self) -> dict:
        return dict(label=self.label, tol=self.tol,
                    eigenvalues=[float(x) for x in self.eigenvalues])


def sign_label(eigenvalues, tol: float) -> str:
    ev = np.asarray(eigenvalues)
    if ev.size == 0:
        return "flat"
    npco = ev.max() <= tol
    nnco = ev.min() >= -tol
    if npco and nnco:
        return "flat"
    if npco:
        return "NPCO"
    if nnco:
        return "NNCO"
    return "indefinite"


def curvature_operator(data: CurvatureData, tol: float = 1e-9):
    """Operator C on the wedge basis with (U, V) = -<C U, V>_g, and its sign certificate.

    Returns ``(C, certificate)`` where ``C = -Wg^{-1} Rw``.  The eigenvalues
    are those of the pencil (-Rw, Wg), i.e. of C symmetrised in a
    Wg-orthonormal wedge basis.
    """
    m = data.p_dim
    if m < 2:
        return np.zeros((0, 0)), SignCertificate(np.zeros(0), "flat", tol)
    Wg = wedge_gram(data.p_gram)
    # the wedge Gram has eigenvalues mu_i mu_j (i < j) for the eigenvalues mu of g
    mu = np.linalg.eigvalsh(data.p_gram)
    cond = (mu[-1] * mu[-2]) / (mu[0] * mu[1]) if mu[0] > 0 else np.inf
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise ConditioningError(f"wedge Gram condition number {cond:.3e} exceeds {COND_LIMIT:.0e}")
    Rw = wedge_form(data)
    C = -np.linalg.solve(Wg, Rw)
    ev = linalg.eigh(-Rw, Wg, eigvals_only=True)
    return C, SignCertificate(np.sort(ev), sign_label(ev, tol), tol)


def bivector(X, Y) -> np.ndarray:
    """Coordinates of X ^ Y in the wedge basis."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    a, b = wedge_indices(X.shape[0])
    return X[a] * Y[b] - X[b] * Y[a]


def half_double_bracket(data: CurvatureData, X, Y) -> np.ndarray:
    """Matrix of Z -> 1/2 [Z, [X, Y]] on p, read off from R.

    g(1/2 [Z, [X, Y]], T) = 1/2 R(X, Y, Z, T).  Pairing this operator with
    the operator of Z ^ T under trace(A^T B) returns +R(X, Y, Z, T); the
    factor 1/2 cancels the sqrt(2)^2 of the operator identification, and the
    sign is the opposite of the one carried by C, which is why certificates
    are defined through the quadratic form instead.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    RXY = np.tensordot(np.tensordot(data.R, X, axes=([0], [0])), Y, axes=([0], [0]))  # (c, d)
    # g(M Z, T) = 1/2 R(X,Y,Z,T)  =>  M = 1/2 g^{-1} RXY^T
    return 0.5 * np.linalg.solve(data.p_gram, RXY.T)


def sectional_curvature(data: CurvatureData, X, Y, tol: float = 1e-12) -> float:
    return float(sectional_curvatures(data, np.atleast_2d(X), np.atleast_2d(Y), tol)[0])


def sectional_curvatures(data: CurvatureData, X: np.ndarray, Y: np.ndarray,
                         tol: float = 1e-12) -> np.ndarray:
    """Sec on each plane span{X[i], Y[i]} (rows)."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    m = data.p_dim
    g = data.p_gram
    xx = np.einsum("ia,ab,ib->i", X, g, X)
    yy = np.einsum("ia,ab,ib->i", Y, g, Y)
    xy = np.einsum("ia,ab,ib->i", X, g, Y)
    area = xx * yy - xy * xy
    if np.any(area <= tol * np.maximum(xx * yy, 1e-300)):
        raise DegeneratePlaneError("X and Y are (numerically) parallel")
    XY = (X[:, :, None] * Y[:, None, :]).reshape(len(X), m * m)
    Rm = data.R.reshape(m * m, m * m)
    num = np.sum((XY @ Rm) * XY, axis=1)
    return -num / area


# -- reconstruction --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Reconstruction:
    pair: SymmetricPair
    k_dim: int
    dropped: int
    closure_residual: float
    lstar_residual: float
    roundtrip_residual: float
    k_coefficients: np.ndarray     # (wedge index, r): f_r = sum V[ab, r] / sqrt(lam_r) [e_a, e_b]

    @property
    def p_slice(self) -> slice:
        return slice(self.k_dim, self.pair.algebra.dim)

    def to_dict(self) -> dict:
        return dict(k_dim=self.k_dim, p_dim=self.pair.algebra.dim - self.k_dim,
                    dropped=self.dropped, closure_residual=self.closure_residual,
                    lstar_residual=self.lstar_residual,
                    roundtrip_residual=self.roundtrip_residual)


def reconstruct_lstar(data: CurvatureData, sign: str, tol: float = 1e-9,
                      null_rtol: float = 1e-9) -> Reconstruction:
    """Build the orthogonal symmetric L*-algebra k + p whose curvature is ``data``.

    ``k`` is spanned by the operators ``[e_a, e_b]`` acting on p, with inner
    product ``<[e_a,e_b], [e_c,e_d]> = eps R(c,d,a,b)``, where ``eps = +1``
    for NPCO and ``-1`` for NNCO.  Null directions of that form are
    quotiented out.  The involution is ``-1`` on k and ``eps`` on p.
    """
    sign = sign.upper()
    if sign not in ("NPCO", "NNCO"):
        raise ValueError("sign must be NPCO or NNCO")
    eps = 1.0 if sign == "NPCO" else -1.0
    m = data.p_dim
    g = data.p_gram
    sym = symmetry_report(data, with_kappa=False)
    worst = max(sym.antisym_12, sym.antisym_34, sym.pair_symmetry, sym.bianchi)
    rscale = max(1.0, float(np.max(np.abs(data.R)))) if m else 1.0
    if worst > 1e-10 * rscale:
        raise StructuralError(f"R fails its algebraic symmetries (residual {worst:.2e})")
    _, cert = curvature_operator(data, tol)
    if cert.label not in (sign, "flat"):
        raise SignMismatchError(f"curvature certificate is {cert.label}, requested {sign}")
    wa, wb = wedge_indices(m)
    H = eps * wedge_form(data)
    lam, V = np.linalg.eigh(H) if H.size else (np.zeros(0), np.zeros((0, 0)))
    top = float(lam.max()) if lam.size else 0.0
    keep = lam > null_rtol * top if top > 0 else np.zeros(lam.shape, dtype=bool)
    lam, V = lam[keep], V[:, keep]
    r = lam.size
    dropped = int(keep.size - r)
    d = r + m
    # operators of [e_a, e_b] on p:  g(M_ab e_c, e_d) = -R[a,b,c,d]
    if r:
        Rab = data.R[wa, wb]                                 # (w, c, d)
        M = -np.matmul(np.linalg.inv(g), np.transpose(Rab, (0, 2, 1)))   # (w, d, c)
        coef = V / np.sqrt(lam)                              # (w, r)
        F = np.tensordot(coef, M, axes=([0], [0]))           # (r, d, c): f_r on p
    else:
        coef = np.zeros((wa.size, 0))
        F = np.zeros((0, m, m))
    c = np.zeros((d, d, d))
    # [f_r, f_s] from operator commutators, coordinates via <K, [e_a,e_b]> = -eps g(K e_a, e_b)
    closure = 0.0
    if r:
        comm = np.matmul(F[:, None], F[None, :]) - np.matmul(F[None, :], F[:, None])  # (r, s, d, c)
        pair_ab = -eps * np.tensordot(comm, g, axes=([2], [0]))   # (r, s, a, b): -eps g(K e_a, e_b)
        inner = pair_ab[:, :, wa, wb]                         # (r, s, w)
        cks = inner @ coef                                    # (r, s, t)
        c[:r, :r, :r] = cks
        back = np.tensordot(cks, F, axes=([2], [0]))          # (r, s, d, c)
        scale = max(1.0, float(np.max(np.abs(comm))))
        closure = float(np.max(np.abs(back - comm))) / scale
    # [f_r, e_c] = F_r e_c
    for rr in range(r):
        c[rr, r:, r:] = F[rr].T                               # c[r, r+c, r+d] = F_r[d, c]
        c[r:, rr, r:] = -F[rr].T
    # [e_a, e_b] = sum_t sqrt(lam_t) V[ab, t] f_t
    if r:
        pp = V * np.sqrt(lam)                                 # (w, t)
        c[r + wa, r + wb, :r] = pp
        c[r + wb, r + wa, :r] = -pp
    G = np.zeros((d, d))
    G[:r, :r] = np.eye(r)
    G[r:, r:] = g
    star = np.diag(np.concatenate([-np.ones(r), eps * np.ones(m)]))
    labels = tuple([f"k{i}" for i in range(r)] + [f"p{i}" for i in range(m)])
    alg = LStarAlgebra(c, G, star, labels)
    s = np.diag(np.concatenate([np.ones(r), -np.ones(m)]))
    pair = SymmetricPair.from_involution(alg, s)
    lres = verify_lstar_axiom(alg).max_residual
    P = np.zeros((d, m))
    P[r:, :] = np.eye(m)
    out = riemann_tensor(pair, P)
    rt = float(np.max(np.abs(out.R - data.R))) if m else 0.0
    if closure > 1e-8:
        raise StructuralError(
            f"[p,p] is not closed as an algebra of operators (residual {closure:.2e}); "
            "R is not the curvature of an orthogonal symmetric pair")
    if lres > 1e-8 * max(1.0, float(np.max(np.abs(c)))):
        raise StructuralError(
            f"reconstructed bracket violates the L* identity (residual {lres:.2e}); "
            "R is not invariant under the operators it generates")
    return Reconstruction(pair, r, dropped, closure, lres, rt, coef)


def reconstruction_embedding(source: SymmetricPair, rec: Reconstruction) -> tuple[np.ndarray, float]:
    """Map from the reconstructed algebra back into ``source`` and its homomorphism residual.

    p-coordinates go to the p-basis of ``source`` and ``f_r`` goes to the
    matching combination of brackets ``[P_a, P_b]``.
    """
    L = source.algebra
    P = source.p_basis
    m = P.shape[1]
    wa, wb = wedge_indices(m)
    W = bracket_many(L.structure, P, P)[wa, wb]             # (w, k)
    K = W.T @ rec.k_coefficients                             # (dimL, r)
    Phi = np.hstack([K, P])
    c2 = rec.pair.algebra.structure
    lhs = c2 @ Phi.T                                         # Phi [x, y]  as (i, j, :)
    rhs = bracket_many(L.structure, Phi, Phi)
    return Phi, float(np.max(np.abs(lhs - rhs))) if lhs.size else 0.0


# -- comparison ---------------------------------------------------------------------

@dataclass(frozen=True)
class IntertwineReport:
    isometry: float
    curvature: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.isometry <= self.tol and self.curvature <= self.tol

    def to_dict(self) -> dict:
        return dict(isometry=self.isometry, curvature=self.curvature,
                    tol=self.tol, passed=self.passed)


def intertwine_check(data: CurvatureData, data2: CurvatureData, phi,
                     tol: float = 1e-10) -> IntertwineReport:
    """Is ``phi: p -> p'`` an isometry carrying R' back to R?"""
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (data2.p_dim, data.p_dim) or data.p_dim != data2.p_dim:
        raise StructuralError(
            f"phi has shape {phi.shape}, expected ({data2.p_dim}, {data.p_dim}) with equal dims")
    iso = float(np.max(np.abs(phi.T @ data2.p_gram @ phi - data.p_gram))) if phi.size else 0.0
    if iso > tol:
        return IntertwineReport(iso, float("inf"), tol)
    pulled = transport(data2, phi)
    curv = float(np.max(np.abs(pulled.R - data.R))) if phi.size else 0.0
    return IntertwineReport(iso, curv, tol)


def killing_fit(pair: SymmetricPair) -> dict:
    """Least-squares lambda in R(X,Y,Z,T) = lambda B([X,Y],[Z,T]) (diagnostic only)."""
    L = pair.algebra
    data = riemann_tensor(pair)
    m = data.p_dim
    if m < 2:
        return dict(lam=float("nan"), residual=0.0)
    B = killing_form(L.structure)
    W = bracket_many(L.structure, pair.p_basis, pair.p_basis).reshape(m * m, L.dim)
    model = (W @ B @ W.T).reshape(m, m, m, m)
    denom = float(np.sum(model * model))
    if denom == 0:
        return dict(lam=float("nan"), residual=float(np.max(np.abs(data.R))))
    lam = float(np.sum(model * data.R) / denom)
    return dict(lam=lam, residual=float(np.max(np.abs(data.R - lam * model))))

