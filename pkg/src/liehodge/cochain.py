"""Chevalley-Eilenberg cochains C^q(g; V) = V (x) Lambda^q g* in an orthonormal frame.

Layout: the coefficient vector of eta = sum_J eta_J omega^J stacks the
V-vectors eta_J in lexicographic order of the increasing tuples J, so an
operator acting as ``L`` on forms and ``T`` on V is ``kron(L, T)``.

The inner product on C^q is sum_J <eta_J, mu_J>_V, with Gram matrix
``kron(I, G_V)``.  Operators named ``*_oracle`` or built in :func:`d_parts` are
entry-by-entry assemblies from the defining sums; everything else is a closed
form in terms of exterior and interior multiplication.
"""

from __future__ import annotations

import dataclasses
import itertools
import warnings
from functools import lru_cache
from math import comb

import numpy as np

from .errors import InputError, PrecisionWarning
from .lie_core import ModuleRep, cadj_matrix, cadj_star_matrix

__all__ = [
    "CochainBasis",
    "LinOp",
    "sort_sign",
    "exterior_ops",
    "derivation",
    "d_full",
    "d_parts",
    "delta_parts",
    "delta_oracle",
    "laplacian",
    "laplacian_components",
    "component_assemblies",
    "box_circ",
    "square_circ",
    "derivation_check",
    "kuga_blocks",
    "KugaBlocks",
    "betti",
    "BettiResult",
    "cochain_gram",
]


def sort_sign(seq):
    """Sorted tuple and the sign of the sorting permutation; sign 0 on repeats."""
    seq = list(seq)
    if len(set(seq)) < len(seq):
        return None, 0
    sign = 1
    for i in range(len(seq)):
        for j in range(len(seq) - 1 - i):
            if seq[j] > seq[j + 1]:
                seq[j], seq[j + 1] = seq[j + 1], seq[j]
                sign = -sign
    return tuple(seq), sign


@lru_cache(maxsize=None)
def _tuples(n, q):
    return tuple(itertools.combinations(range(n), q))


@lru_cache(maxsize=None)
def _index(n, q):
    return {J: r for r, J in enumerate(_tuples(n, q))}


@dataclasses.dataclass(frozen=True)
class CochainBasis:
    degree: int
    n: int
    module_dim: int
    k_indices: tuple = ()

    def __post_init__(self):
        if not 0 <= self.degree <= self.n:
            raise InputError(f"degree {self.degree} outside [0, {self.n}]")

    @property
    def multi_indices(self):
        return _tuples(self.n, self.degree)

    @property
    def size(self):
        return comb(self.n, self.degree)

    @property
    def dim(self):
        return self.module_dim * self.size

    @property
    def bigrade(self):
        k = set(self.k_indices)
        return tuple((sum(j in k for j in J), sum(j not in k for j in J))
                     for J in self.multi_indices)

    def index(self, J):
        return _index(self.n, self.degree)[tuple(J)]


@dataclasses.dataclass(frozen=True, eq=False)
class LinOp:
    """Dense complex matrix between cochain degrees."""

    matrix: np.ndarray
    from_degree: int
    to_degree: int

    def __post_init__(self):
        a = np.array(self.matrix, dtype=complex)
        a.setflags(write=False)
        object.__setattr__(self, "matrix", a)

    @property
    def shape(self):
        return self.matrix.shape

    def __matmul__(self, other):
        if isinstance(other, LinOp):
            if other.to_degree != self.from_degree:
                raise InputError("degree mismatch in composition")
            return LinOp(self.matrix @ other.matrix, other.from_degree, self.to_degree)
        return self.matrix @ other

    def __add__(self, other):
        if (self.from_degree, self.to_degree) != (other.from_degree, other.to_degree):
            raise InputError("degree mismatch in sum")
        return LinOp(self.matrix + other.matrix, self.from_degree, self.to_degree)

    def __sub__(self, other):
        return self + LinOp(-other.matrix, other.from_degree, other.to_degree)

    def to_json(self):
        a = self.matrix
        data = [[float(z.real), float(z.imag)] for z in a.ravel()]
        return {"from": self.from_degree, "to": self.to_degree,
                "rows": a.shape[0], "cols": a.shape[1], "data": data}

    @classmethod
    def from_json(cls, d):
        data = np.asarray(d["data"], dtype=float).reshape(-1, 2)
        a = (data[:, 0] + 1j * data[:, 1]).reshape(d["rows"], d["cols"])
        return cls(a, d["from"], d["to"])


def _check(frame, rep, q, top=None):
    n = frame.dim
    top = n if top is None else top
    if not isinstance(q, (int, np.integer)) or not 0 <= q <= top:
        raise InputError(f"degree {q} outside [0, {top}]")
    if rep.n != n:
        raise InputError(f"module has {rep.n} generators, frame has dim {n}")


def _dims(n, m, q):
    return m * comb(n, q) if 0 <= q <= n else 0


# -- exterior algebra -----------------------------------------------------------

@lru_cache(maxsize=None)
def _exterior(n, q):
    E = np.zeros((n, comb(n, q), comb(n, q - 1)))
    ix = _index(n, q)
    for c, J in enumerate(_tuples(n, q - 1)):
        for i in range(n):
            st, s = sort_sign((i,) + J)
            if s:
                E[i, ix[st], c] = s
    E.setflags(write=False)
    return E


def exterior_ops(n, q):
    """(eps, iota): eps[i] maps Lambda^{q-1} -> Lambda^q, iota[i] = eps[i]^T back."""
    if not 1 <= q <= n:
        raise InputError(f"exterior operators need 1 <= q <= n, got q={q}")
    E = _exterior(n, q)
    return E, E.transpose(0, 2, 1)


def derivation(M, q):
    """Extension of an n x n matrix M (acting on 1-forms) to Lambda^q as a derivation."""
    M = np.asarray(M)
    n = M.shape[0]
    if q == 0:
        return np.zeros((1, 1), dtype=M.dtype)
    E, I = exterior_ops(n, q)
    return np.einsum("ij,iab,jbc->ac", M, E, I)


def cochain_gram(rep: ModuleRep, n, q):
    return np.kron(np.eye(comb(n, q)), rep.gram)


# -- differentials by assembly ---------------------------------------------------

def d_parts(frame, rep, q):
    """(d_circ, d_wedge): the module-action and bracket sums of the differential."""
    _check(frame, rep, q)
    n, m = frame.dim, rep.dim_v
    rows, cols = _dims(n, m, q + 1), _dims(n, m, q)
    d_o = np.zeros((rows, cols), dtype=complex)
    d_w = np.zeros((rows, cols), dtype=complex)
    if rows == 0:
        return LinOp(d_o, q, q + 1), LinOp(d_w, q, q + 1)
    C = frame.structure
    tau = rep.generators
    eye = np.eye(m)
    ix = _index(n, q)
    for r, J in enumerate(_tuples(n, q + 1)):
        rs = slice(r * m, (r + 1) * m)
        for u in range(q + 1):
            c = ix[J[:u] + J[u + 1:]]
            d_o[rs, c * m:(c + 1) * m] += (-1) ** u * tau[J[u]]
        for u, v in itertools.combinations(range(q + 1), 2):
            rest = tuple(x for k, x in enumerate(J) if k not in (u, v))
            for cc in np.nonzero(C[J[u], J[v]])[0]:
                st, s = sort_sign((int(cc),) + rest)
                if s:
                    c = ix[st]
                    d_w[rs, c * m:(c + 1) * m] += (-1) ** (u + v) * s * C[J[u], J[v], cc] * eye
    return LinOp(d_o, q, q + 1), LinOp(d_w, q, q + 1)


def d_full(frame, rep, q) -> LinOp:
    """The differential C^q -> C^{q+1}."""
    d_o, d_w = d_parts(frame, rep, q)
    return d_o + d_w


def _adjoint(matrix, rep, n, q_from, q_to):
    """Adjoint of a map C^{q_from} -> C^{q_to} for the cochain inner products."""
    Gf = cochain_gram(rep, n, q_from)
    Gt = cochain_gram(rep, n, q_to)
    return np.linalg.solve(Gf, matrix.conj().T @ Gt)


def delta_oracle(frame, rep, q) -> LinOp:
    """Adjoint of d_{q-1}: C^q -> C^{q-1} through the Gram matrices."""
    _check(frame, rep, q)
    n, m = frame.dim, rep.dim_v
    if q == 0:
        return LinOp(np.zeros((0, m)), 0, -1)
    d = d_full(frame, rep, q - 1).matrix
    try:
        return LinOp(_adjoint(d, rep, n, q - 1, q), q, q - 1)
    except np.linalg.LinAlgError as exc:
        raise InputError("module Gram matrix is singular") from exc


def _tau_star(rep):
    try:
        return rep.adjoint_generators()
    except np.linalg.LinAlgError as exc:
        raise InputError("module Gram matrix is singular") from exc


def delta_parts(frame, rep, q):
    """(delta_circ, delta_wedge) from their index formulas.

    (delta_circ eta)_J = sum_j tau(X_j)^* eta_{jJ}
    (delta_wedge eta)_J = sum_{a<b} sum_u (-1)^u C^{J_u}_{ab} eta_{ab J(u)}, u counted from 1
    """
    _check(frame, rep, q)
    n, m = frame.dim, rep.dim_v
    rows, cols = _dims(n, m, q - 1), _dims(n, m, q)
    dl_o = np.zeros((rows, cols), dtype=complex)
    dl_w = np.zeros((rows, cols), dtype=complex)
    if q == 0:
        return LinOp(dl_o, 0, -1), LinOp(dl_w, 0, -1)
    tstar = _tau_star(rep)
    C = frame.structure
    eye = np.eye(m)
    ix = _index(n, q)
    for r, J in enumerate(_tuples(n, q - 1)):
        rs = slice(r * m, (r + 1) * m)
        for j in range(n):
            st, s = sort_sign((j,) + J)
            if s:
                c = ix[st]
                dl_o[rs, c * m:(c + 1) * m] += s * tstar[j]
        for a, b in itertools.combinations(range(n), 2):
            for u in range(q - 1):
                coef = C[a, b, J[u]]
                if coef == 0:
                    continue
                st, s = sort_sign((a, b) + J[:u] + J[u + 1:])
                if s:
                    c = ix[st]
                    dl_w[rs, c * m:(c + 1) * m] += (-1) ** (u + 1) * s * coef * eye
    return LinOp(dl_o, q, q - 1), LinOp(dl_w, q, q - 1)


def laplacian(frame, rep, q) -> LinOp:
    """Assembled delta d + d delta on C^q."""
    _check(frame, rep, q)
    n = frame.dim
    L = np.zeros((_dims(n, rep.dim_v, q),) * 2, dtype=complex)
    if q < n:
        L += delta_oracle(frame, rep, q + 1).matrix @ d_full(frame, rep, q).matrix
    if q > 0:
        L += d_full(frame, rep, q - 1).matrix @ delta_oracle(frame, rep, q).matrix
    return LinOp(L, q, q)


def _zero(n, m, q):
    return np.zeros((_dims(n, m, q),) * 2, dtype=complex)


def component_assemblies(frame, rep, q):
    """Delta_circ, Delta_wedge, Delta_circ_wedge, Delta_wedge_circ from the split
    differentials and their oracle adjoints.

    Delta_circ_wedge = d_circ delta_wedge + delta_wedge d_circ and symmetrically.
    """
    _check(frame, rep, q)
    n, m = frame.dim, rep.dim_v
    out = [_zero(n, m, q) for _ in range(4)]
    if q < n:
        do, dw = (x.matrix for x in d_parts(frame, rep, q))
        so = _adjoint(do, rep, n, q, q + 1)
        sw = _adjoint(dw, rep, n, q, q + 1)
        out[0] += so @ do
        out[1] += sw @ dw
        out[2] += sw @ do
        out[3] += so @ dw
    if q > 0:
        do, dw = (x.matrix for x in d_parts(frame, rep, q - 1))
        so = _adjoint(do, rep, n, q - 1, q)
        sw = _adjoint(dw, rep, n, q - 1, q)
        out[0] += do @ so
        out[1] += dw @ sw
        out[2] += do @ sw
        out[3] += dw @ so
    return tuple(LinOp(x, q, q) for x in out)


# -- closed forms ----------------------------------------------------------------

def _cadj_all(frame):
    n = frame.dim
    return (np.array([cadj_matrix(frame, k) for k in range(n)]),
            np.array([cadj_star_matrix(frame, k) for k in range(n)]))


def _d_wedge_exterior(frame, q):
    """Bracket part of d on Lambda^q -> Lambda^{q+1}: 1/2 sum_k eps_k Der(cadj_k)."""
    n = frame.dim
    cadj, _ = _cadj_all(frame)
    E, _ = exterior_ops(n, q + 1)
    return 0.5 * sum(E[k] @ derivation(cadj[k], q) for k in range(n))


def _delta_wedge_exterior(frame, q):
    """Adjoint of the above, Lambda^q -> Lambda^{q-1}: 1/2 sum_k Der(cadj*_k) iota_k."""
    n = frame.dim
    _, cstar = _cadj_all(frame)
    _, I = exterior_ops(n, q)
    return 0.5 * sum(derivation(cstar[k], q - 1) @ I[k] for k in range(n))


def laplacian_components(frame, rep, q):
    """Closed forms of the four parts of the Laplacian on C^q.

    Delta_circ       = I (x) sum_j tau_j^* tau_j + sum_ij Der(E_ij) (x) [tau_i, tau_j^*]
    Delta_wedge      = (d_wedge delta_wedge + delta_wedge d_wedge) (x) I, via eps / iota
    Delta_circ_wedge = sum_k Der(cadj*_k) (x) tau_k
    Delta_wedge_circ = sum_k Der(cadj_k) (x) tau_k^*
    """
    _check(frame, rep, q)
    n, m = frame.dim, rep.dim_v
    N = comb(n, q)
    tau = rep.generators
    tstar = _tau_star(rep)
    cadj, cstar = _cadj_all(frame)
    lap_o = np.kron(np.eye(N), np.einsum("jab,jbc->ac", tstar, tau))
    if q > 0:
        unit = np.eye(n)
        for i in range(n):
            for j in range(n):
                comm = tau[i] @ tstar[j] - tstar[j] @ tau[i]
                if np.any(comm):
                    lap_o += np.kron(derivation(np.outer(unit[i], unit[j]), q), comm)
    lw = np.zeros((N, N))
    if q < n:
        dw = _d_wedge_exterior(frame, q)
        lw += dw.T @ dw
    if q > 0:
        dw = _d_wedge_exterior(frame, q - 1)
        lw += dw @ dw.T
    lap_w = np.kron(lw, np.eye(m))
    lap_ow = sum((np.kron(derivation(cstar[k], q), tau[k]) for k in range(n)), _zero(n, m, q))
    lap_wo = sum((np.kron(derivation(cadj[k], q), tstar[k]) for k in range(n)), _zero(n, m, q))
    return tuple(LinOp(x, q, q) for x in (lap_o, lap_w, lap_ow, lap_wo))


def box_circ(frame, rep, q) -> LinOp:
    """Closed form of Delta_circ minus its degree-zero part: sum_ij Der(E_ij) (x) [tau_i, tau_j^*]."""
    _check(frame, rep, q)
    n, m = frame.dim, rep.dim_v
    lap_o = laplacian_components(frame, rep, q)[0].matrix
    lap_0 = laplacian_components(frame, rep, 0)[0].matrix
    return LinOp(lap_o - np.kron(np.eye(comb(n, q)), lap_0), q, q)


def square_circ(frame, rep, q) -> LinOp:
    """Assembled Delta_circ minus Delta_0 (x) identity on Lambda^q."""
    _check(frame, rep, q)
    n = frame.dim
    lap_o = component_assemblies(frame, rep, q)[0].matrix
    lap_0 = component_assemblies(frame, rep, 0)[0].matrix
    return LinOp(lap_o - np.kron(np.eye(comb(n, q)), lap_0), q, q)


def _wedge_map(n, J, left, p):
    """Matrix of eta -> omega^J ^ eta (left) or eta ^ omega^J on Lambda^p."""
    q = p + len(J)
    ix = _index(n, q)
    W = np.zeros((comb(n, q), comb(n, p)))
    for c, I in enumerate(_tuples(n, p)):
        st, s = sort_sign(J + I if left else I + J)
        if s:
            W[ix[st], c] = s
    return W


def derivation_check(frame, rep, q, split=None):
    """Largest violation of the derivation rule for square_circ at degree q.

    For every basis tuple J, every split J = J1 J2 (or only ``split`` when
    given) and every basis vector v of V compares
    box(v omega^J) with box(v omega^J1) ^ omega^J2 + omega^J1 ^ box(v omega^J2).
    """
    _check(frame, rep, q)
    n, m = frame.dim, rep.dim_v
    boxes = [square_circ(frame, rep, p).matrix for p in range(q + 1)]
    splits = range(q + 1) if split is None else [split]
    eye_m = np.eye(m)
    worst = 0.0
    for r, J in enumerate(_tuples(n, q)):
        lhs = boxes[q][:, r * m:(r + 1) * m]
        for s in splits:
            J1, J2 = J[:s], J[s:]
            i1 = _index(n, s)[J1]
            i2 = _index(n, q - s)[J2]
            right = np.kron(_wedge_map(n, J2, False, s), eye_m) @ boxes[s][:, i1 * m:(i1 + 1) * m]
            left = np.kron(_wedge_map(n, J1, True, q - s), eye_m) @ boxes[q - s][:, i2 * m:(i2 + 1) * m]
            worst = max(worst, float(np.abs(lhs - right - left).max()))
    return worst


# -- Kuga blocks on 1-forms -----------------------------------------------------

@dataclasses.dataclass(frozen=True, eq=False)
class KugaBlocks:
    """Blocks of Delta_1 on C^1 = V(x)k* + V(x)p*.

    ``kind`` is "unitary" (every tau(X) skew) or "cartan" (tau skew on k,
    self-adjoint on p).  ``block`` is the assembled block operator in the
    k-first ordering of C^1.
    """

    A: LinOp
    B: LinOp
    C: LinOp
    D: LinOp
    block: LinOp
    kind: str
    permutation: np.ndarray


def _module_kind(frame, rep, tol=1e-12):
    tau = rep.generators
    tstar = _tau_star(rep)
    k = list(frame.k_indices)
    p = list(frame.p_indices)
    skew = np.abs(tstar + tau).max(axis=(1, 2)) if len(tau) else np.zeros(0)
    herm = np.abs(tstar - tau).max(axis=(1, 2)) if len(tau) else np.zeros(0)
    if np.all(skew <= tol):
        return "unitary"
    if np.all(skew[k] <= tol) and np.all(herm[p] <= tol):
        return "cartan"
    return None


def kuga_blocks(frame, rep) -> KugaBlocks:
    """Kuga decomposition of the first Laplacian.

    With B_k = sum_{k in k} tau_k (x) cadj*_k, C_p = sum_{a in p} tau_a (x) cadj*_a and
    D = 1/2 cadj*(Omega_G) acting on the form factor:
      unitary modules:  [[A + B_k, C_p], [-C_p, A + 3 B_k]] + D,   A = sum tau_j^* tau_j
      Cartan modules:   A + B_k + C_p + D,                         A = tau(Omega_G)
    Blocks are written in the k-first ordering of C^1.
    """
    if not frame.has_involution:
        raise InputError("Kuga blocks need a frame with a Cartan involution")
    n, m = frame.dim, rep.dim_v
    _check(frame, rep, 1)
    G = rep.gram
    if np.abs(G - G.conj().T).max() > 1e-12:
        raise InputError("module Gram matrix is not hermitian")
    kind = _module_kind(frame, rep)
    if kind is None:
        raise InputError("Kuga blocks need a module that is skew on k and either skew "
                         "or self-adjoint on p")
    tau = rep.generators
    tstar = _tau_star(rep)
    _, cstar = _cadj_all(frame)
    sig = frame.signature
    k_idx, p_idx = list(frame.k_indices), list(frame.p_indices)
    Bk = sum((np.kron(cstar[k], tau[k]) for k in k_idx), np.zeros((n * m,) * 2, complex))
    Cp = sum((np.kron(cstar[a], tau[a]) for a in p_idx), np.zeros((n * m,) * 2, complex))
    D = np.kron(0.5 * sum(sig[a] * cstar[a] @ cstar[a] for a in range(n)), np.eye(m))
    if kind == "unitary":
        A = np.kron(np.eye(n), np.einsum("jab,jbc->ac", tstar, tau))
    else:
        A = np.kron(np.eye(n), sum(sig[a] * tau[a] @ tau[a] for a in range(n)))
    # rows/cols of C^1 for the k block and the p block
    kk = np.concatenate([np.arange(i * m, (i + 1) * m) for i in k_idx]) if k_idx else np.zeros(0, int)
    pp = np.concatenate([np.arange(a * m, (a + 1) * m) for a in p_idx]) if p_idx else np.zeros(0, int)
    if kind == "unitary":
        total = A + D
        total[np.ix_(kk, kk)] += Bk[np.ix_(kk, kk)]
        total[np.ix_(pp, pp)] += 3 * Bk[np.ix_(pp, pp)]
        total[np.ix_(kk, pp)] += Cp[np.ix_(kk, pp)]
        total[np.ix_(pp, kk)] -= Cp[np.ix_(pp, kk)]
    else:
        total = A + Bk + Cp + D
    perm = np.concatenate([kk, pp]).astype(int)
    ops = [LinOp(x, 1, 1) for x in (A, Bk, Cp, D, total)]
    return KugaBlocks(*ops, kind, perm)


# -- cohomology ----------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class BettiResult:
    value: int
    rank_check: int
    threshold: float
    near_threshold: bool
    singular_values: tuple

    @property
    def consistent(self):
        return self.value == self.rank_check


def _rank(M, rtol):
    if M.size == 0:
        return 0, 0.0, False
    s = np.linalg.svd(M, compute_uv=False)
    thr = rtol * max(M.shape) * s[0] if s[0] > 0 else 0.0
    near = bool(np.any((s > thr / 10) & (s < 10 * thr))) if thr > 0 else False
    return int(np.sum(s > thr)), thr, near


def betti(frame, rep, q, rtol=None, warn=True) -> BettiResult:
    """dim ker Delta_q, cross-checked against dim ker d_q - rank d_{q-1}."""
    _check(frame, rep, q)
    rtol = np.finfo(float).eps if rtol is None else float(rtol)
    n, m = frame.dim, rep.dim_v
    L = laplacian(frame, rep, q).matrix
    dim = L.shape[0]
    s = np.linalg.svd(L, compute_uv=False)
    thr = rtol * dim * s[0] if s.size and s[0] > 0 else 0.0
    near = bool(np.any((s > thr / 10) & (s < 10 * thr))) if thr > 0 else False
    value = int(np.sum(s <= thr))
    r_up, _, near_up = _rank(d_full(frame, rep, q).matrix, rtol) if q < n else (0, 0.0, False)
    r_dn, _, near_dn = _rank(d_full(frame, rep, q - 1).matrix, rtol) if q > 0 else (0, 0.0, False)
    check = _dims(n, m, q) - r_up - r_dn
    near = near or near_up or near_dn
    if near and warn:
        warnings.warn(f"singular value within 10x of the rank threshold at degree {q}",
                      PrecisionWarning, stacklevel=2)
    return BettiResult(value, check, thr, near, tuple(float(x) for x in s))
