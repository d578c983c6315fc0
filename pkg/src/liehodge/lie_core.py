"""Lie algebras given by structure constants.

The structure tensor is stored densely as ``C[i, j, k] = C^k_{ij}``, i.e.
``[X_i, X_j] = sum_k C[i, j, k] X_k`` with zero-based indices.  JSON files use
one-based indices, as do the labels printed in reports.

A :class:`CartanFrame` is the coordinate system used by every operator
downstream: an orthonormal basis for the inner product

    B_theta(X, Y) = -B(X, theta Y)

with the +1 eigenspace of ``theta`` first.  For algebras without an involution
:func:`metric_frame` produces an orthonormal frame for a plain inner product.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np

from .errors import FrameError, InputError

__all__ = [
    "AlgebraSpec",
    "CartanFrame",
    "ModuleRep",
    "ValidationReport",
    "validate_algebra",
    "validate_module",
    "killing_form",
    "cartan_frame",
    "metric_frame",
    "build_frame",
    "ad_matrix",
    "cadj_matrix",
    "cadj_star_matrix",
    "musical_residual",
    "load_algebra",
    "load_module",
    "algebra_to_json",
    "module_to_json",
]


def _frozen(a, dtype=float):
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclasses.dataclass(frozen=True, eq=False)
class AlgebraSpec:
    """A finite-dimensional real Lie algebra.

    Attributes:
      dim: dimension n.
      structure: dense (n, n, n) tensor, ``structure[i, j, k] = C^k_{ij}``.
      labels: basis names.
      involution: optional (n, n) matrix of theta acting on column coordinates.
      form: optional (n, n) symmetric invariant bilinear form B.
      tolerance: relative threshold for the structural residuals.
    """

    dim: int
    structure: np.ndarray
    labels: tuple
    involution: np.ndarray | None = None
    form: np.ndarray | None = None
    tolerance: float = 1e-9

    def __post_init__(self):
        n = self.dim
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise InputError(f"dim must be a positive integer, got {n!r}")
        C = np.asarray(self.structure, dtype=float)
        if C.shape != (n, n, n):
            raise InputError(f"structure tensor must have shape {(n, n, n)}, got {C.shape}")
        if not np.all(np.isfinite(C)):
            raise InputError("structure constants contain NaN or inf")
        object.__setattr__(self, "structure", _frozen(C))
        labels = tuple(self.labels) if self.labels is not None else ()
        if not labels:
            labels = tuple(f"X{i + 1}" for i in range(n))
        if len(labels) != n:
            raise InputError(f"expected {n} labels, got {len(labels)}")
        object.__setattr__(self, "labels", labels)
        for name in ("involution", "form"):
            m = getattr(self, name)
            if m is None:
                continue
            m = np.asarray(m, dtype=float)
            if m.shape != (n, n):
                raise InputError(f"{name} must be {n}x{n}, got {m.shape}")
            if not np.all(np.isfinite(m)):
                raise InputError(f"{name} contains NaN or inf")
            object.__setattr__(self, name, _frozen(m))
        if not self.tolerance >= 0:
            raise InputError("tolerance must be nonnegative")

    @classmethod
    def from_entries(cls, dim, entries, labels=None, involution=None, form=None,
                     tolerance=1e-9, one_based=True):
        """Build from a sparse list of ``(i, j, k, value)`` entries.

        Entries are taken verbatim; the antisymmetric partner of an entry is
        not filled in automatically, so validation can detect its absence.
        """
        if not isinstance(dim, (int, np.integer)) or dim < 1:
            raise InputError(f"dim must be a positive integer, got {dim!r}")
        C = np.zeros((dim, dim, dim))
        seen = {}
        off = 1 if one_based else 0
        for entry in entries:
            if len(entry) != 4:
                raise InputError(f"structure entry must be (i, j, k, value), got {entry!r}")
            *idx, value = entry
            try:
                value = float(value)
            except (TypeError, ValueError) as exc:
                raise InputError(f"non-numeric structure constant {value!r}") from exc
            if not np.isfinite(value):
                raise InputError(f"structure entry {entry!r} is not finite")
            ijk = []
            for v in idx:
                if isinstance(v, float) and v.is_integer():
                    v = int(v)
                if not isinstance(v, (int, np.integer)):
                    raise InputError(f"structure index {v!r} is not an integer")
                if not off <= v < dim + off:
                    raise InputError(f"structure index {v} out of range for dim {dim}")
                ijk.append(int(v) - off)
            key = tuple(ijk)
            if key in seen and seen[key] != value:
                raise InputError(f"conflicting values for structure entry {key}")
            seen[key] = value
            C[key] = value
        return cls(dim, C, labels, involution, form, tolerance)

    def entries(self, one_based=True):
        off = 1 if one_based else 0
        nz = np.argwhere(self.structure != 0)
        return [(int(i) + off, int(j) + off, int(k) + off, float(self.structure[i, j, k]))
                for i, j, k in nz]

    def bracket(self, x, y):
        """Bracket of two coordinate vectors."""
        return np.einsum("i,j,ijk->k", x, y, self.structure)

    @property
    def scale(self):
        return max(1.0, float(np.abs(self.structure).max()))


@dataclasses.dataclass(frozen=True)
class ValidationReport:
    residuals: dict
    tolerance: float

    @property
    def passed(self):
        return all(r <= self.tolerance for r in self.residuals.values())

    def failures(self):
        return [k for k, r in self.residuals.items() if r > self.tolerance]

    def to_dict(self):
        return {"passed": self.passed, "tolerance": self.tolerance,
                "residuals": {k: float(v) for k, v in self.residuals.items()}}


def _jacobi_residual(C):
    # sum_m C^m_{ij} C^l_{mk} + cyclic(i, j, k)
    t = np.einsum("ijm,mkl->ijkl", C, C)
    jac = t + t.transpose(1, 2, 0, 3) + t.transpose(2, 0, 1, 3)
    return float(np.abs(jac).max()) if jac.size else 0.0


def validate_algebra(spec: AlgebraSpec) -> ValidationReport:
    """Residuals of every structural invariant, scaled by the largest constant."""
    C = spec.structure
    s = spec.scale
    res = {
        "antisymmetry": float(np.abs(C + C.transpose(1, 0, 2)).max()) / s,
        "jacobi": _jacobi_residual(C) / s**2,
    }
    if spec.involution is not None:
        th = spec.involution
        res["involution_square"] = float(np.abs(th @ th - np.eye(spec.dim)).max())
        # theta [X_i, X_j] = [theta X_i, theta X_j]
        lhs = np.einsum("ijk,lk->ijl", C, th)
        rhs = np.einsum("ai,bj,abl->ijl", th, th, C)
        res["involution_automorphism"] = float(np.abs(lhs - rhs).max()) / s
    if spec.form is not None:
        B = spec.form
        bs = max(1.0, float(np.abs(B).max()))
        res["form_symmetry"] = float(np.abs(B - B.T).max()) / bs
        # B([X_i, X_j], X_l) + B(X_j, [X_i, X_l]) = 0
        t = np.einsum("ijk,kl->ijl", C, B)
        res["form_invariance"] = float(np.abs(t + t.transpose(0, 2, 1)).max()) / (s * bs)
    return ValidationReport(res, spec.tolerance)


def killing_form(spec) -> np.ndarray:
    """Gram matrix of B(X, Y) = trace(ad X ad Y) in the basis of ``spec``."""
    C = spec.structure
    # (ad X_a)_{kj} = C[a, j, k]
    return np.einsum("ajk,bkj->ab", C, C)


@dataclasses.dataclass(frozen=True, eq=False)
class CartanFrame:
    """Orthonormal adapted basis; columns of ``change_of_basis`` are the new
    basis vectors written in input coordinates.
    """

    change_of_basis: np.ndarray
    k_indices: tuple
    p_indices: tuple
    structure: np.ndarray
    form: np.ndarray | None
    metric: np.ndarray
    labels: tuple
    has_involution: bool
    tolerance: float
    residuals: dict = dataclasses.field(default_factory=dict)

    @property
    def dim(self):
        return self.structure.shape[0]

    @property
    def structure_adapted(self):
        return self.structure

    @property
    def form_adapted(self):
        return self.form

    @property
    def signature(self):
        """+1 on p, -1 on k: the form in the adapted basis when B_theta = -B(., theta .)."""
        s = np.ones(self.dim)
        s[list(self.k_indices)] = -1.0
        return s

    def to_adapted(self, x):
        """Input coordinates -> adapted coordinates."""
        return np.linalg.solve(self.change_of_basis, x)


def _gram_schmidt(vectors, gram, tol):
    basis = []
    for v in vectors:
        w = np.array(v, dtype=float)
        for b in basis:
            w = w - (b @ gram @ w) * b
        nrm2 = float(w @ gram @ w)
        if nrm2 < -tol:
            raise FrameError("inner product is not positive definite")
        if nrm2 <= tol:
            continue
        basis.append(w / np.sqrt(nrm2))
    return basis


def _restate(C, P):
    Pinv = np.linalg.inv(P)
    return np.einsum("ia,jb,ijk,ck->abc", P, P, C, Pinv)


def _bracket_block_residual(C, k_idx, p_idx):
    k, p = list(k_idx), list(p_idx)
    r = 0.0
    if k and p:
        r = max(r, float(np.abs(C[np.ix_(k, k, p)]).max()))   # [k,k] in k
        r = max(r, float(np.abs(C[np.ix_(k, p, k)]).max()))   # [k,p] in p
    if p and k:
        r = max(r, float(np.abs(C[np.ix_(p, p, p)]).max()))   # [p,p] in k
    return r


def _structural_symmetry_residual(C, k_idx, p_idx):
    """Max violation of C^b_{a i} = C^a_{i b} = -C^i_{b a}, C^k_{ij} = C^i_{jk}, C^i_{a j} = 0."""
    k, p = list(k_idx), list(p_idx)
    r = 0.0
    if k and p:
        a_i_b = C[np.ix_(p, k, p)].transpose(0, 1, 2)            # C[a, i, b] = C^b_{a i}
        i_b_a = C[np.ix_(k, p, p)].transpose(2, 0, 1)            # C[i, b, a] -> [a, i, b]
        b_a_i = C[np.ix_(p, p, k)].transpose(1, 2, 0)            # C[b, a, i] -> [a, i, b]
        r = max(r, float(np.abs(a_i_b - i_b_a).max()), float(np.abs(a_i_b + b_a_i).max()))
        r = max(r, float(np.abs(C[np.ix_(p, k, k)]).max()))
    if k:
        ijk = C[np.ix_(k, k, k)]
        r = max(r, float(np.abs(ijk - ijk.transpose(2, 0, 1)).max()))
    return r


def cartan_frame(spec: AlgebraSpec, theta=None, form=None) -> CartanFrame:
    """Orthonormal frame for B_theta(X, Y) = -B(X, theta Y), k block first.

    Raises FrameError when B_theta is not positive definite.
    """
    theta = spec.involution if theta is None else np.asarray(theta, dtype=float)
    form = spec.form if form is None else np.asarray(form, dtype=float)
    if theta is None or form is None:
        raise InputError("cartan_frame needs both an involution and an invariant form")
    n = spec.dim
    tol = spec.tolerance
    if np.abs(theta @ theta - np.eye(n)).max() > tol:
        raise InputError("involution does not square to the identity")
    gram = -form @ theta
    if np.abs(gram - gram.T).max() > tol * max(1.0, np.abs(gram).max()):
        raise FrameError("B(., theta .) is not symmetric; theta is not B-orthogonal")
    gram = 0.5 * (gram + gram.T)
    scale = max(1.0, float(np.abs(gram).max()))
    if np.linalg.eigvalsh(gram).min() <= tol * scale:
        raise FrameError("B_theta is not positive definite; theta is not a Cartan "
                         "involution for this form")
    eye = np.eye(n)
    k_vecs = _gram_schmidt(((eye + theta) / 2).T, gram, tol * scale)
    p_vecs = _gram_schmidt(((eye - theta) / 2).T, gram, tol * scale)
    if len(k_vecs) + len(p_vecs) != n:
        raise InputError("eigenspaces of the involution do not span the algebra")
    P = np.array(k_vecs + p_vecs).T
    nk = len(k_vecs)
    k_idx, p_idx = tuple(range(nk)), tuple(range(nk, n))
    Ca = _restate(spec.structure, P)
    metric = P.T @ gram @ P
    form_a = P.T @ form @ P
    s = spec.scale
    residuals = {
        "orthonormality": float(np.abs(metric - eye).max()),
        "bracket_blocks": _bracket_block_residual(Ca, k_idx, p_idx) / s,
        "structural_symmetries": _structural_symmetry_residual(Ca, k_idx, p_idx) / s,
    }
    bad = [k for k, v in residuals.items() if v > max(tol, 1e-9)]
    if bad:
        raise FrameError(f"adapted frame violates {', '.join(bad)}: {residuals}")
    labels = tuple(f"K{i + 1}" for i in range(nk)) + tuple(f"P{i + 1}" for i in range(n - nk))
    return CartanFrame(_frozen(P), k_idx, p_idx, _frozen(Ca), _frozen(form_a),
                       _frozen(metric), labels, True, tol, residuals)


def metric_frame(spec: AlgebraSpec, metric=None) -> CartanFrame:
    """Orthonormal frame for a plain inner product (identity by default).

    There is no k/p splitting: every index is listed in ``p_indices`` and
    ``has_involution`` is False, so Kuga-type operations refuse the frame.
    """
    n = spec.dim
    gram = np.eye(n) if metric is None else np.asarray(metric, dtype=float)
    if np.linalg.eigvalsh(0.5 * (gram + gram.T)).min() <= 0:
        raise FrameError("metric is not positive definite")
    vecs = _gram_schmidt(np.eye(n), gram, spec.tolerance)
    P = np.array(vecs).T
    Ca = _restate(spec.structure, P)
    form_a = None if spec.form is None else P.T @ spec.form @ P
    return CartanFrame(_frozen(P), (), tuple(range(n)), _frozen(Ca),
                       None if form_a is None else _frozen(form_a),
                       _frozen(P.T @ gram @ P), spec.labels, False, spec.tolerance,
                       {"orthonormality": float(np.abs(P.T @ gram @ P - np.eye(n)).max())})


def build_frame(spec: AlgebraSpec) -> CartanFrame:
    """Cartan frame when the spec carries theta and B, metric frame otherwise."""
    if spec.involution is not None and spec.form is not None:
        return cartan_frame(spec)
    return metric_frame(spec)


def ad_matrix(frame, i) -> np.ndarray:
    """Matrix of ad(X_i); column j holds [X_i, X_j]."""
    return np.array(frame.structure[i].T)


def cadj_matrix(frame, i) -> np.ndarray:
    """Coadjoint action on dual coordinates: entry (g, b) is C^b_{g i}."""
    return np.array(frame.structure[:, i, :])


def cadj_star_matrix(frame, i) -> np.ndarray:
    """Metric adjoint of :func:`cadj_matrix`; equals -ad(X_i) in an orthonormal frame."""
    return cadj_matrix(frame, i).T


def musical_residual(frame) -> float:
    """max_i |flat ad(X_i) + cadj*(X_i) flat| with flat given by the frame metric."""
    flat = frame.metric
    return max(float(np.abs(flat @ ad_matrix(frame, i) + cadj_star_matrix(frame, i) @ flat).max())
               for i in range(frame.dim))


@dataclasses.dataclass(frozen=True, eq=False)
class ModuleRep:
    """A finite-dimensional module: ``generators[i]`` is tau(X_i) as an m x m matrix.

    The hermitian form is <u, v> = u^H gram v.  ``unitary`` declares that every
    tau(X) is skew for that form.
    """

    dim_v: int
    generators: np.ndarray
    gram: np.ndarray
    unitary: bool = False
    name: str = ""

    def __post_init__(self):
        g = np.asarray(self.generators, dtype=complex)
        m = self.dim_v
        if g.ndim != 3 or g.shape[1:] != (m, m):
            raise InputError(f"generators must have shape (n, {m}, {m}), got {g.shape}")
        G = np.asarray(self.gram, dtype=complex)
        if G.shape != (m, m):
            raise InputError(f"gram must be {m}x{m}, got {G.shape}")
        if not (np.all(np.isfinite(g)) and np.all(np.isfinite(G))):
            raise InputError("module data contains NaN or inf")
        if np.abs(G - G.conj().T).max() > 1e-12 * max(1.0, np.abs(G).max()):
            raise InputError("gram matrix is not hermitian")
        object.__setattr__(self, "generators", _frozen(g, complex))
        object.__setattr__(self, "gram", _frozen(G, complex))

    @property
    def n(self):
        return self.generators.shape[0]

    def adjoint_generators(self):
        """tau(X_i)^* = G^{-1} tau(X_i)^H G for every generator."""
        try:
            Ginv = np.linalg.inv(self.gram)
        except np.linalg.LinAlgError as exc:
            raise InputError("gram matrix is singular") from exc
        return np.einsum("ab,ibc,cd->iad", Ginv, self.generators.conj().transpose(0, 2, 1),
                         self.gram)

    def in_frame(self, frame: CartanFrame) -> "ModuleRep":
        """Re-express the generators along the adapted basis vectors of ``frame``."""
        P = frame.change_of_basis
        if P.shape[0] != self.n:
            raise InputError(f"module has {self.n} generators, frame has dim {P.shape[0]}")
        g = np.einsum("ia,iuv->auv", P, self.generators)
        return ModuleRep(self.dim_v, g, self.gram, self.unitary, self.name)


def validate_module(rep: ModuleRep, algebra) -> ValidationReport:
    """Homomorphism residual, plus skewness when the module claims to be unitary."""
    C = algebra.structure
    if rep.n != C.shape[0]:
        raise InputError(f"module has {rep.n} generators, algebra has dim {C.shape[0]}")
    t = rep.generators
    comm = np.einsum("iab,jbc->ijac", t, t)
    comm = comm - comm.transpose(1, 0, 2, 3)
    rhs = np.einsum("ijk,kac->ijac", C, t)
    scale = max(1.0, float(np.abs(t).max())) ** 2
    res = {"homomorphism": float(np.abs(comm - rhs).max()) / scale if t.size else 0.0}
    if rep.unitary:
        G = rep.gram
        skew = t.conj().transpose(0, 2, 1) @ G + G @ t
        res["skewness"] = float(np.abs(skew).max()) if t.size else 0.0
    tol = getattr(algebra, "tolerance", 1e-9)
    return ValidationReport(res, tol)


# -- JSON ---------------------------------------------------------------------

def _read_json(path):
    text = Path(path).read_text()
    return json.loads(text)


def _complex_array(data):
    a = np.asarray(data, dtype=float)
    if a.ndim >= 1 and a.shape[-1] == 2:
        return a[..., 0] + 1j * a[..., 1]
    raise InputError("complex arrays must be given as [re, im] pairs")


def algebra_from_dict(d) -> AlgebraSpec:
    try:
        dim = d["dim"]
        structure = d.get("structure", [])
    except (KeyError, TypeError, AttributeError) as exc:
        raise InputError(f"algebra JSON is missing a required key: {exc}") from exc
    return AlgebraSpec.from_entries(dim, structure, labels=d.get("labels"),
                                    involution=d.get("involution"), form=d.get("form"),
                                    tolerance=d.get("tolerance", 1e-9))


def load_algebra(path) -> AlgebraSpec:
    return algebra_from_dict(_read_json(path))


def algebra_to_json(spec: AlgebraSpec) -> dict:
    d = {"dim": spec.dim, "labels": list(spec.labels),
         "structure": [list(e) for e in spec.entries()], "tolerance": spec.tolerance}
    if spec.involution is not None:
        d["involution"] = spec.involution.tolist()
    if spec.form is not None:
        d["form"] = spec.form.tolist()
    return d


def module_from_dict(d) -> ModuleRep:
    try:
        m = d["dim_v"]
        gens = _complex_array(d["generators"])
    except (KeyError, TypeError) as exc:
        raise InputError(f"module JSON is missing a required key: {exc}") from exc
    gram = d.get("gram")
    if gram is None:
        gram = np.eye(m)
    else:
        gram = np.asarray(gram, dtype=float)
        gram = _complex_array(gram) if gram.ndim == 3 else gram
    return ModuleRep(m, gens, gram, bool(d.get("unitary", False)), d.get("name", ""))


def load_module(path) -> ModuleRep:
    return module_from_dict(_read_json(path))


def module_to_json(rep: ModuleRep) -> dict:
    g = np.stack([rep.generators.real, rep.generators.imag], axis=-1)
    G = rep.gram
    gram = G.real.tolist() if not np.any(G.imag) else np.stack([G.real, G.imag], -1).tolist()
    return {"dim_v": rep.dim_v, "generators": g.tolist(), "gram": gram,
            "unitary": rep.unitary, "name": rep.name}
