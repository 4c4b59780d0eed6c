"""Orthogonal symmetric L*-algebras: splitting, duality, types, sign split, rank."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from lstar.core import (
    DEFAULT_TOL,
    RANK_RTOL,
    LStarAlgebra,
    automorphism_residual,
    bracket_many,
    decompose_ideals,
    direct_sum,
    gram_factor,
    lowdin,
    null_space,
    orthonormal_frame,
    range_basis,
    subalgebra,
    verify_lstar_axiom,
)
from lstar.errors import DegeneracyError, InvalidInvolutionError, TypeMismatchError


def _eigenspaces(algebra: LStarAlgebra, s: np.ndarray):
    d = algebra.dim
    if np.array_equal(s, np.diag(np.diag(s))) and np.all(np.abs(np.diag(s)) == 1):
        diag = np.diag(s)
        eye = np.eye(d)
        kb, pb = eye[:, diag > 0], eye[:, diag < 0]
        kb = lowdin(kb, algebra.gram) if kb.shape[1] else kb
        pb = lowdin(pb, algebra.gram) if pb.shape[1] else pb
        return kb, pb
    frame = orthonormal_frame(algebra.gram)
    F = gram_factor(algebra.gram)
    s_on = F.T @ s @ frame
    w, v = np.linalg.eigh(0.5 * (s_on + s_on.T))
    return frame @ v[:, w > 0], frame @ v[:, w < 0]


@dataclass(frozen=True, eq=False)
class SymmetricPair:
    """An L*-algebra with an involutive automorphism ``s``.

    ``k_basis`` / ``p_basis`` are G-orthonormal coefficient columns spanning
    the +1 / -1 eigenspaces of ``s``.
    """

    algebra: LStarAlgebra
    s: np.ndarray
    k_basis: np.ndarray
    p_basis: np.ndarray

    @classmethod
    def from_involution(cls, algebra: LStarAlgebra, s) -> "SymmetricPair":
        s = np.array(s, dtype=float)
        s.setflags(write=False)
        kb, pb = _eigenspaces(algebra, s)
        kb.setflags(write=False)
        pb.setflags(write=False)
        return cls(algebra, s, kb, pb)

    @property
    def dim_k(self) -> int:
        return self.k_basis.shape[1]

    @property
    def dim_p(self) -> int:
        return self.p_basis.shape[1]

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.algebra.dim, self.dim_k, self.dim_p


@dataclass(frozen=True)
class PairReport:
    involution: float
    automorphism: float
    isometry: float
    star_commutes: float
    fixed_star: float
    kk_in_k: float
    pp_in_k: float
    kp_in_p: float
    k_perp_p: float
    lstar: float
    tol: float = DEFAULT_TOL

    @property
    def max_residual(self) -> float:
        return max(v for k, v in self.__dict__.items() if k != "tol")

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol

    def to_dict(self) -> dict:
        out = dict(self.__dict__)
        out["passed"] = self.passed
        return out


def pair_invariants(pair: SymmetricPair, tol: float = DEFAULT_TOL) -> PairReport:
    L = pair.algebra
    d = L.dim
    s = pair.s
    c = L.structure
    G = L.gram
    if d == 0:
        return PairReport(*([0.0] * 10), tol=tol)
    inv = float(np.max(np.abs(s @ s - np.eye(d))))
    auto = automorphism_residual(c, s)
    iso = float(np.max(np.abs(s.T @ G @ s - G)))
    comm = float(np.max(np.abs(s @ L.star - L.star @ s)))
    kb, pb = pair.k_basis, pair.p_basis
    fixed = float(np.max(np.abs(L.star @ kb + kb))) if kb.size else 0.0
    Pk = kb @ kb.T @ G
    Pp = pb @ pb.T @ G

    def leak(X, Y, proj):
        if X.shape[1] == 0 or Y.shape[1] == 0:
            return 0.0
        br = bracket_many(c, X, Y)
        return float(np.max(np.abs(br @ proj.T)))

    kk = leak(kb, kb, Pp)
    pp = leak(pb, pb, Pp)
    kp = leak(kb, pb, Pk)
    perp = float(np.max(np.abs(kb.T @ G @ pb))) if kb.size and pb.size else 0.0
    lres = verify_lstar_axiom(L).lstar
    return PairReport(inv, auto, iso, comm, fixed, kk, pp, kp, perp, lres, tol)


def cartan_split(pair: SymmetricPair, tol: float = DEFAULT_TOL):
    """(k_basis, p_basis, report) after checking every pair invariant."""
    rep = pair_invariants(pair, tol)
    if rep.involution > tol or rep.automorphism > tol * max(1.0, np.max(np.abs(pair.algebra.structure))):
        raise InvalidInvolutionError(
            f"s is not an involutive automorphism (involution {rep.involution:.2e}, "
            f"automorphism {rep.automorphism:.2e})")
    if pair.dim_k + pair.dim_p != pair.algebra.dim:
        raise InvalidInvolutionError("eigenspaces of s do not span the algebra")
    return pair.k_basis, pair.p_basis, rep


# -- constructions ---------------------------------------------------------------

def make_group_manifold_pair(compact_simple: LStarAlgebra) -> SymmetricPair:
    """(L + L, swap) written in the basis (X, X) for k, then (X, -X) for p."""
    from lstar.factory import require_compact

    require_compact(compact_simple)
    c = compact_simple.structure
    n = compact_simple.dim
    d = 2 * n
    C = np.zeros((d, d, d))
    k, p = slice(0, n), slice(n, d)
    C[k, k, k] = c
    C[k, p, p] = c
    C[p, k, p] = c
    C[p, p, k] = c
    G = np.zeros((d, d))
    G[k, k] = 2 * compact_simple.gram
    G[p, p] = 2 * compact_simple.gram
    labels = ([f"({a},{a})" for a in compact_simple.labels]
              + [f"({a},-{a})" for a in compact_simple.labels])
    alg = LStarAlgebra(C, G, -np.eye(d), tuple(labels))
    return SymmetricPair.from_involution(alg, np.diag([1.0] * n + [-1.0] * n))


def direct_sum_pairs(pairs) -> SymmetricPair:
    pairs = list(pairs)
    alg = direct_sum([pr.algebra for pr in pairs])
    d = alg.dim
    s = np.zeros((d, d))
    off = 0
    for pr in pairs:
        m = pr.algebra.dim
        s[off:off + m, off:off + m] = pr.s
        off += m
    return SymmetricPair.from_involution(alg, s)


def flat_pair(dim_p: int, star_sign: float = 1.0) -> SymmetricPair:
    """Euclidean factor: abelian algebra, k = 0."""
    alg = LStarAlgebra(np.zeros((dim_p,) * 3), np.eye(dim_p), star_sign * np.eye(dim_p),
                       tuple(f"x{i}" for i in range(dim_p)))
    return SymmetricPair.from_involution(alg, -np.eye(dim_p))


# -- duality -----------------------------------------------------------------------

def dualize(pair: SymmetricPair) -> SymmetricPair:
    """The dual pair k + i p on the same vector space and Gram.

    Brackets of two p-elements change sign, k-k and k-p brackets are kept,
    and the involution is negated on p.  With ``s`` diagonal (+-1) the sign
    flip is applied entrywise and is exact.
    """
    L = pair.algebra
    s = pair.s
    c = L.structure.copy()
    if np.array_equal(s, np.diag(np.diag(s))) and np.all(np.abs(np.diag(s)) == 1):
        pmask = np.diag(s) < 0
        c[np.ix_(pmask, pmask)] *= -1.0
        star = L.star * np.diag(s)[None, :]
    else:
        Pp = 0.5 * (np.eye(L.dim) - s)
        t = np.tensordot(Pp, L.structure, axes=([0], [0]))          # (a, j, k)
        t = np.transpose(np.tensordot(t, Pp, axes=([1], [0])), (0, 2, 1))
        c = c - 2.0 * t
        star = L.star @ s
    dual = LStarAlgebra(c, L.gram, star, L.labels)
    return SymmetricPair(dual, pair.s, pair.k_basis, pair.p_basis)


# -- types ---------------------------------------------------------------------------

def _pp_brackets(pair: SymmetricPair) -> np.ndarray:
    pb = pair.p_basis
    return bracket_many(pair.algebra.structure, pb, pb)     # (a, b, k)


def effective_algebra(pair: SymmetricPair, rank_rtol: float = RANK_RTOL):
    """Subalgebra [p, p] + p as (algebra, G-orthonormal basis columns, dim of [p,p])."""
    L = pair.algebra
    pb = pair.p_basis
    m = pb.shape[1]
    if m == 0:
        return LStarAlgebra(np.zeros((0, 0, 0)), np.zeros((0, 0)), np.zeros((0, 0))), \
            np.zeros((L.dim, 0)), 0
    br = _pp_brackets(pair).reshape(m * m, L.dim).T       # columns in L-coordinates
    F = gram_factor(L.gram)
    frame = orthonormal_frame(L.gram)
    Ron = range_basis(F.T @ br, rank_rtol)
    kk = frame @ Ron
    B = np.hstack([kk, pb])
    return subalgebra(L, B), B, kk.shape[1]


@dataclass(frozen=True)
class TypeReport:
    label: str
    ideal_types: list
    ideal_dims: list
    lemma_residual: float | None = None

    def to_dict(self) -> dict:
        return dict(label=self.label, ideal_types=list(self.ideal_types),
                    ideal_dims=list(self.ideal_dims), lemma_residual=self.lemma_residual)


def classify_type(pair: SymmetricPair, tol: float = DEFAULT_TOL,
                  rank_rtol: float = RANK_RTOL) -> TypeReport:
    """compact / noncompact / mixed / flat, with per-ideal labels.

    Types are read off the algebra [p, p] + p generated by p, one label per
    s-invariant ideal (simple ideals swapped by s count once).  Any abelian
    ideal (a flat factor in p) makes the overall label ``mixed`` unless it is
    the whole thing.  For ``noncompact`` the identity ``s = -*`` is checked
    and its residual reported.
    """
    eff, B, npp = effective_algebra(pair, rank_rtol)
    if npp == 0:
        return TypeReport("flat", ["abelian"] if pair.dim_p else [], [pair.dim_p] if pair.dim_p else [])
    dec = decompose_ideals(eff, tol, rank_rtol)
    types, sizes = _pair_ideals(pair, eff, B, dec)
    simple = [t for t in types if t != "abelian"]
    if "abelian" in types:
        label = "mixed"
    elif all(t == "simple-compact" for t in simple):
        label = "compact"
    elif all(t == "simple-noncompact" for t in simple):
        label = "noncompact"
    else:
        label = "mixed"
    lemma = None
    if label == "noncompact":
        lemma = float(np.max(np.abs(pair.s + pair.algebra.star)))
    return TypeReport(label, list(types), sizes, lemma)


def _pair_ideals(pair: SymmetricPair, eff: LStarAlgebra, B: np.ndarray, dec) -> tuple[list, list]:
    """Merge simple ideals that s permutes into the s-invariant ideals of the pair.

    A group-manifold factor such as so(4) = so(3) + so(3) with the swap is
    one irreducible ideal of the pair although it is two simple ideals.
    """
    n = len(dec.blocks)
    G = pair.algebra.gram
    s_eff = B.T @ G @ pair.s @ B                # B is G-orthonormal
    adj = np.eye(n, dtype=bool)
    for i in range(n):
        Ui = dec.block_basis(i)
        for j in range(n):
            Uj = dec.block_basis(j)
            if Ui.size and Uj.size and np.max(np.abs(Uj.T @ eff.gram @ s_eff @ Ui)) > 1e-6:
                adj[i, j] = adj[j, i] = True
    ncomp, lab = connected_components(adj, directed=False)
    types, sizes = [], []
    for k in range(ncomp):
        members = [i for i in range(n) if lab[i] == k]
        kinds = {dec.types[i] for i in members}
        types.append(kinds.pop() if len(kinds) == 1 else "mixed")
        sizes.append(sum(dec.sizes[i] for i in members))
    return types, sizes


# -- sign decomposition --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SignSplit:
    p_minus: np.ndarray
    p_zero: np.ndarray
    p_plus: np.ndarray

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.p_minus.shape[1], self.p_zero.shape[1], self.p_plus.shape[1]


def _orth_in(L: LStarAlgebra, vecs: np.ndarray, rank_rtol: float) -> np.ndarray:
    if vecs.shape[1] == 0:
        return vecs
    F = gram_factor(L.gram)
    frame = orthonormal_frame(L.gram)
    return frame @ range_basis(F.T @ vecs, rank_rtol)


def p_centralizer(pair: SymmetricPair, X: np.ndarray, rank_rtol: float = RANK_RTOL):
    """G-orthonormal basis of {Y in p : [Y, X_j] = 0 for every column X_j}.

    Also returns the singular values of the defining linear map.
    """
    L = pair.algebra
    pb = pair.p_basis
    m = pb.shape[1]
    if X.shape[1] == 0:
        return pb.copy(), np.zeros(0)
    br = bracket_many(L.structure, pb, X)                # (a, j, k)
    M = np.transpose(br, (1, 2, 0)).reshape(-1, m)
    ns, sv = null_space(M, rank_rtol)
    return pb @ ns, sv


def sign_decompose(pair: SymmetricPair, tol: float = DEFAULT_TOL,
                   rank_rtol: float = RANK_RTOL) -> SignSplit:
    """Split p into nonnegative, flat and nonpositive commuting parts."""
    L = pair.algebra
    pb = pair.p_basis
    zero, sv = p_centralizer(pair, pb, rank_rtol)
    if sv.size and sv[0] > 0:
        rel = sv / sv[0]
        grey = rel[(rel > 1e-2 * rank_rtol) & (rel < 1e2 * rank_rtol)]
        if grey.size:
            dz = zero.shape[1]
            warnings.warn(
                f"p_zero nullspace ambiguous: candidate dims {dz} and {dz + grey.size}",
                RuntimeWarning, stacklevel=2)
    eff, B, npp = effective_algebra(pair, rank_rtol)
    empty = np.zeros((L.dim, 0))
    if npp == 0:
        return SignSplit(empty, pb.copy(), empty)
    dec = decompose_ideals(eff, tol, rank_rtol)
    G = L.gram
    parts = {}
    for kind in ("simple-compact", "simple-noncompact"):
        cols = [B @ dec.block_basis(i) for i, t in enumerate(dec.types) if t == kind]
        if not cols:
            parts[kind] = empty
            continue
        U = np.hstack(cols)                       # G-orthonormal in L
        proj = U @ (U.T @ G @ pb)                 # projection of p onto the ideals
        parts[kind] = _orth_in(L, proj, rank_rtol)
    split = SignSplit(parts["simple-compact"], zero, parts["simple-noncompact"])
    if sum(split.dims) != pair.dim_p:
        raise DegeneracyError(f"sign split dims {split.dims} do not add up to {pair.dim_p}")
    return split


def sign_split_report(pair: SymmetricPair, split: SignSplit) -> dict:
    """Residuals of the SignSplit invariants plus curvature eigenvalue extremes."""
    from lstar.curvature import curvature_operator, riemann_tensor

    L = pair.algebra
    G = L.gram
    c = L.structure
    blocks = [split.p_minus, split.p_zero, split.p_plus]
    ortho = 0.0
    for a in range(3):
        for b in range(a + 1, 3):
            if blocks[a].size and blocks[b].size:
                ortho = max(ortho, float(np.max(np.abs(blocks[a].T @ G @ blocks[b]))))
    commute = 0.0
    for a in range(3):
        for b in range(a + 1, 3):
            if blocks[a].shape[1] and blocks[b].shape[1]:
                commute = max(commute, float(np.max(np.abs(bracket_many(c, blocks[a], blocks[b])))))
    closure = 0.0
    for X in blocks:
        if X.shape[1] == 0:
            continue
        inner = bracket_many(c, X, X).reshape(-1, L.dim).T
        trip = bracket_many(c, X, inner).reshape(-1, L.dim).T
        proj = X @ (X.T @ G @ trip)
        closure = max(closure, float(np.max(np.abs(trip - proj))) if trip.size else 0.0)
    eig = {}
    for name, X in zip(("minus", "zero", "plus"), blocks):
        if X.shape[1] >= 2:
            _, cert = curvature_operator(riemann_tensor(pair, X))
            eig[name] = (float(min(cert.eigenvalues)), float(max(cert.eigenvalues)))
        else:
            eig[name] = (0.0, 0.0)
    return dict(orthogonality=ortho, commuting=commute, triple_closure=closure,
                eigen_ranges=eig)


# -- rank --------------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RankResult:
    rank: int
    flat: np.ndarray
    exact: bool
    restarts: int

    @property
    def lower_bound_only(self) -> bool:
        return not self.exact

    def to_dict(self) -> dict:
        return dict(rank=self.rank, exact=self.exact, restarts=self.restarts,
                    flat=self.flat.T.tolist())


def _grow_abelian(pair: SymmetricPair, start: np.ndarray, rng, rank_rtol: float):
    """Greedy extension of span{start} to a maximal abelian subspace of p."""
    L = pair.algebra
    G = L.gram
    a = start[:, None] / np.sqrt(start @ G @ start)
    while True:
        cent, _ = p_centralizer(pair, a, rank_rtol)
        # remove the part already in a
        rest = cent - a @ (a.T @ G @ cent)
        # columns of cent are G-orthonormal, so an absolute cutoff is meaningful
        F = gram_factor(G)
        u, sv, _ = np.linalg.svd(F.T @ rest, full_matrices=False)
        keep = sv > 1e-6
        if not np.any(keep):
            return a
        rest = orthonormal_frame(G) @ u[:, keep]
        y = rest @ rng.standard_normal(rest.shape[1])
        y = y - a @ (a.T @ G @ y)
        a = np.hstack([a, (y / np.sqrt(y @ G @ y))[:, None]])


def _is_abelian(pair: SymmetricPair, a: np.ndarray, tol: float) -> bool:
    if a.shape[1] < 2:
        return True
    return float(np.max(np.abs(bracket_many(pair.algebra.structure, a, a)))) <= tol


def rank(pair: SymmetricPair, search_budget: int = 64, seed: int = 0,
         exhaustive: bool | None = None, rank_rtol: float = RANK_RTOL,
         tol: float = 1e-8) -> RankResult:
    """Maximal dimension of an abelian subspace of p.

    Each candidate is grown greedily until its centralizer in p equals
    itself, a linear-algebra certificate of maximality.  Maximal abelian
    subspaces of a finite-dimensional orthogonal symmetric pair are all
    conjugate, so a certified maximal one realises the rank.  Exhaustive
    mode (default for dim p <= 6) starts from every basis vector and every
    sum/difference of two basis vectors in addition to random restarts.
    """
    m = pair.dim_p
    L = pair.algebra
    if m == 0:
        return RankResult(0, np.zeros((L.dim, 0)), True, 0)
    if exhaustive is None:
        exhaustive = m <= 6
    pb = pair.p_basis
    starts = []
    if exhaustive:
        for i in range(m):
            starts.append(pb[:, i])
        for i in range(m):
            for j in range(i + 1, m):
                starts.append(pb[:, i] + pb[:, j])
                starts.append(pb[:, i] - pb[:, j])
    best = None
    certified = True
    dims = set()
    for r in range(search_budget):
        rng = np.random.default_rng([seed, r])
        starts.append(pb @ rng.standard_normal(m))
    for idx, x in enumerate(starts):
        rng = np.random.default_rng([seed, 10_000 + idx])
        a = _grow_abelian(pair, x, rng, rank_rtol)
        if not _is_abelian(pair, a, tol):
            certified = False
            continue
        dims.add(a.shape[1])
        if best is None or a.shape[1] > best.shape[1]:
            best = a
    if best is None:
        raise DegeneracyError("no abelian subspace certified; loosen tolerances")
    # conjugacy: every maximal abelian subspace has the same dimension
    exact = certified and len(dims) == 1
    return RankResult(best.shape[1], best, exact, len(starts))


def require_pair_compact(pair: SymmetricPair) -> None:
    if classify_type(pair).label != "compact":
        raise TypeMismatchError("pair is not of compact type")
