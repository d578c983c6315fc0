"""Desk-scale algebras and modules used throughout the tests and demos."""

from __future__ import annotations

import itertools

import numpy as np

from .lie_core import AlgebraSpec, CartanFrame, ModuleRep, ad_matrix, killing_form

__all__ = [
    "su2", "sl2r", "sl2r_iwasawa", "heisenberg", "abelian", "abelian_split", "oscillator",
    "trivial_module", "adjoint_module", "input_adjoint_module", "spin_half_module",
    "sl2r_standard_module", "SL2_MATRICES", "PAULI",
]

PAULI = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex)

_H = np.array([[1.0, 0.0], [0.0, -1.0]])
_E = np.array([[0.0, 1.0], [0.0, 0.0]])
_F = _E.T.copy()
SL2_MATRICES = np.array([_H, _E, _F])


def _spec_from_matrices(mats, labels, involution=None, form=None):
    """Structure constants of the span of ``mats`` under the commutator."""
    basis = np.array([m.ravel() for m in mats]).T
    n = len(mats)
    C = np.zeros((n, n, n))
    for i, j in itertools.product(range(n), repeat=2):
        br = mats[i] @ mats[j] - mats[j] @ mats[i]
        coef, *_ = np.linalg.lstsq(basis, br.ravel(), rcond=None)
        C[i, j] = np.round(coef, 14)
    spec = AlgebraSpec(n, C, labels)
    if form == "killing":
        form = killing_form(spec)
    return AlgebraSpec(n, C, labels, involution, form)


def su2() -> AlgebraSpec:
    """[X_i, X_j] = eps_ijk X_k, theta = identity, B = Killing form (-2 I)."""
    C = np.zeros((3, 3, 3))
    for p in itertools.permutations(range(3)):
        C[p] = np.linalg.det(np.eye(3)[list(p)])
    spec = AlgebraSpec(3, C, ("X1", "X2", "X3"))
    return AlgebraSpec(3, C, spec.labels, np.eye(3), killing_form(spec))


def sl2r() -> AlgebraSpec:
    """Basis (H, E, F) with theta(X) = -X^T and the Killing form."""
    theta = np.array([[-1.0, 0, 0], [0, 0, -1], [0, -1, 0]])
    return _spec_from_matrices(SL2_MATRICES, ("H", "E", "F"), theta, "killing")


def sl2r_iwasawa() -> AlgebraSpec:
    """sl(2, R) in the ordered basis (E - F, H, E): k, a, n."""
    mats = np.array([_E - _F, _H, _E])
    # theta(E) = -F = (E - F) - E
    theta = np.array([[1.0, 0, 1], [0, -1, 0], [0, 0, -1]])
    return _spec_from_matrices(mats, ("K", "H", "E"), theta, "killing")


def heisenberg() -> AlgebraSpec:
    """[X, Y] = Z; nilpotent, no invariant inner product."""
    return AlgebraSpec.from_entries(3, [(1, 2, 3, 1.0), (2, 1, 3, -1.0)], labels=("X", "Y", "Z"))


def abelian(n: int = 2) -> AlgebraSpec:
    return AlgebraSpec(n, np.zeros((n, n, n)), tuple(f"X{i + 1}" for i in range(n)))


def abelian_split(n: int = 2) -> AlgebraSpec:
    """Abelian algebra with theta = diag(1, -1, ...) and B = -theta, so B_theta = identity."""
    d = np.array([1.0 if i % 2 == 0 else -1.0 for i in range(n)])
    return AlgebraSpec(n, np.zeros((n, n, n)), tuple(f"X{i + 1}" for i in range(n)),
                       np.diag(d), -np.diag(d))


def oscillator() -> AlgebraSpec:
    """Central extension of the plane motions: [J,P1]=P2, [J,P2]=-P1, [P1,P2]=T.

    A solvable algebra containing the Heisenberg algebra as an ideal and
    carrying a nondegenerate invariant form B(P_i, P_j) = delta_ij, B(J, T) = 1.
    """
    entries = [(1, 2, 3, 1.0), (2, 1, 3, -1.0), (1, 3, 2, -1.0), (3, 1, 2, 1.0),
               (2, 3, 4, 1.0), (3, 2, 4, -1.0)]
    B = np.zeros((4, 4))
    B[1, 1] = B[2, 2] = 1.0
    B[0, 3] = B[3, 0] = 1.0
    return AlgebraSpec.from_entries(4, entries, labels=("J", "P1", "P2", "T"), form=B)


def trivial_module(n: int) -> ModuleRep:
    return ModuleRep(1, np.zeros((n, 1, 1)), np.eye(1), True, "trivial")


def adjoint_module(frame: CartanFrame) -> ModuleRep:
    """Complexified adjoint module in adapted coordinates with the frame metric."""
    gens = np.array([ad_matrix(frame, i) for i in range(frame.dim)], dtype=complex)
    skew = all(np.allclose(g, -g.T, atol=1e-13) for g in gens)
    return ModuleRep(frame.dim, gens, np.eye(frame.dim), skew, "adjoint")


def input_adjoint_module(spec: AlgebraSpec, gram=None) -> ModuleRep:
    """Adjoint module in the input basis; ``gram`` defaults to B_theta when available."""
    gens = np.array([spec.structure[i].T for i in range(spec.dim)], dtype=complex)
    if gram is None:
        if spec.involution is not None and spec.form is not None:
            gram = -spec.form @ spec.involution
        else:
            gram = np.eye(spec.dim)
    gram = 0.5 * (gram + gram.T)
    skew = all(np.allclose(g.conj().T @ gram + gram @ g, 0, atol=1e-12) for g in gens)
    return ModuleRep(spec.dim, gens, gram, skew, "adjoint")


def spin_half_module() -> ModuleRep:
    """su(2) on C^2 via tau(X_j) = -(i/2) sigma_j; unitary for the standard form."""
    return ModuleRep(2, -0.5j * PAULI, np.eye(2), True, "spin-half")


def sl2r_standard_module() -> ModuleRep:
    """Defining representation of sl(2, R) on C^2 in the (H, E, F) basis."""
    return ModuleRep(2, SL2_MATRICES.astype(complex), np.eye(2), False, "standard")
