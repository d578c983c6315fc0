"""Matrix models of SL(2, R) and SU(2): Iwasawa and KAK factorizations, the
p-seminorm, the zonal spherical function and Schwartz seminorm weights.

Conventions for SL(2, R):
  * H0 = diag(1, -1), the restricted root has alpha(H0) = 2 and rho = alpha / 2;
  * Killing form B(X, Y) = 4 tr(XY), so B(H0, H0) = 8;
  * G = NAK with x = n(x) exp(H(x)) kappa(x);
  * phi0(x) = mean over k in SO(2) of exp(rho(H(k x))), which is the
    Harish-Chandra Xi function: phi0(e) = 1 and phi0 decays like t e^{-t}.

These are matrix groups with finite center, so the seminorm |x|_pz reduces
to |x|_p here.
"""

from __future__ import annotations

import dataclasses
import warnings

import numpy as np
import scipy.linalg

from .errors import InputError, ModelError, PrecisionWarning

__all__ = [
    "GroupElement",
    "SphericalConfig",
    "IwasawaFactors",
    "iwasawa_nak",
    "iwasawa_gram_schmidt",
    "cartan_kak",
    "norm_p",
    "spherical_phi0",
    "spherical_phi0_adaptive",
    "richardson_orders",
    "GrowthFit",
    "growth_fit",
    "seminorm_weight",
    "rotation",
    "random_sl2r",
    "CONVENTIONS",
]

CONVENTIONS = {
    "model": "sl2r",
    "H0": "diag(1,-1)",
    "alpha(H0)": 2.0,
    "rho_p": "alpha/2, rho_p(H0) = 1",
    "killing_form": "B(X,Y) = 4 tr(XY)",
    "decomposition": "G = NAK, x = n(x) exp(H(x)) kappa(x)",
    "spherical_integrand": "exp(+rho_p(H(k x))) averaged over k in SO(2)",
    "seminorm": "|x|_pz = |x|_p for matrix models (trivial V_G)",
}

DET_TOL = 1e-12


def rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclasses.dataclass(frozen=True, eq=False)
class GroupElement:
    model: str
    matrix: np.ndarray

    def __post_init__(self):
        if self.model not in ("sl2r", "su2"):
            raise InputError(f"unknown model {self.model!r}")
        dtype = float if self.model == "sl2r" else complex
        M = np.array(self.matrix, dtype=dtype)
        if M.shape != (2, 2):
            raise InputError(f"group elements are 2x2, got {M.shape}")
        if not np.all(np.isfinite(M)):
            raise InputError("group element contains NaN or inf")
        if abs(np.linalg.det(M) - 1) > DET_TOL * max(1.0, np.abs(M).max() ** 2):
            raise InputError(f"determinant {np.linalg.det(M)} differs from 1")
        if self.model == "su2" and np.abs(M.conj().T @ M - np.eye(2)).max() > DET_TOL:
            raise InputError("su2 element is not unitary")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @classmethod
    def sl2r(cls, m):
        return cls("sl2r", m)

    def inverse(self):
        a, b, c, d = self.matrix.ravel()
        return GroupElement(self.model, np.array([[d, -b], [-c, a]]))

    def __matmul__(self, other):
        m = other.matrix if isinstance(other, GroupElement) else np.asarray(other)
        return GroupElement(self.model, self.matrix @ m)

    def __rmatmul__(self, other):
        return GroupElement(self.model, np.asarray(other) @ self.matrix)


def _as_sl2r(x):
    if isinstance(x, GroupElement):
        if x.model != "sl2r":
            raise ModelError(f"operation is implemented for sl2r, not {x.model}")
        return x.matrix
    return GroupElement("sl2r", x).matrix


def random_sl2r(rng, t_max=1.0):
    """k1 diag(e^t, e^-t) k2 with uniform angles and t uniform in [0, t_max].

    The spherical integrand depends on 2 theta and has complex singularities
    at distance arccosh(coth 2t) from the real axis, so N trapezoid nodes
    give an error near exp(-N/2 arccosh(coth 2t)).  With t <= 1 and 256 nodes
    that is below 1e-14.
    """
    t = rng.uniform(0, t_max)
    a = np.diag([np.exp(t), np.exp(-t)])
    return rotation(rng.uniform(0, 2 * np.pi)) @ a @ rotation(rng.uniform(0, 2 * np.pi))


@dataclasses.dataclass(frozen=True)
class IwasawaFactors:
    n: np.ndarray
    a: np.ndarray
    k: np.ndarray
    H: np.ndarray

    def product(self):
        return self.n @ self.a @ self.k


def iwasawa_nak(x) -> IwasawaFactors:
    """x = n a k via an RQ factorization, with signs fixed so that a > 0 and det k = 1."""
    M = _as_sl2r(x)
    R, Q = scipy.linalg.rq(M)
    D = np.diag(np.sign(np.diag(R)))
    R, Q = R @ D, D @ Q
    a = np.diag(np.diag(R))
    n = np.array([[1.0, R[0, 1] / R[1, 1]], [0.0, 1.0]])
    H = np.diag(np.log(np.diag(R)))
    return IwasawaFactors(n, a, Q, H)


def iwasawa_gram_schmidt(x) -> IwasawaFactors:
    """Same factorization by orthonormalizing the rows of x from the bottom up."""
    M = _as_sl2r(x)
    r2 = M[1]
    a22 = np.hypot(r2[0], r2[1])
    s, c = r2 / a22
    k = np.array([[c, -s], [s, c]])
    a11 = M[0] @ k[0]
    n12 = (M[0] @ k[1]) / a22
    n = np.array([[1.0, n12], [0.0, 1.0]])
    a = np.diag([a11, a22])
    return IwasawaFactors(n, a, k, np.diag(np.log([a11, a22])))


def cartan_kak(x):
    """x = k1 a+ k2 with k1, k2 rotations and a+ = diag(s1, s2), s1 >= 1 >= s2."""
    M = _as_sl2r(x)
    U, s, Vt = np.linalg.svd(M)
    if np.linalg.det(U) < 0:
        U = U @ np.diag([1.0, -1.0])
        Vt = np.diag([1.0, -1.0]) @ Vt
    return U, np.diag(s), Vt


def norm_p(x) -> float:
    """B(X, X)^{1/2} for x = k exp(X), X symmetric; equals sqrt(8) |log s1|."""
    M = _as_sl2r(x)
    w, V = np.linalg.eigh(M.T @ M)
    if np.any(w <= 0):
        raise ModelError("polar part is not positive definite")
    X = V @ np.diag(0.5 * np.log(w)) @ V.T
    return float(np.sqrt(max(0.0, 4 * np.trace(X @ X))))


@dataclasses.dataclass(frozen=True)
class SphericalConfig:
    quad_nodes: int = 256
    model: str = "sl2r"
    tolerance: float = 1e-8

    def __post_init__(self):
        if self.quad_nodes < 8 or self.quad_nodes % 2:
            raise InputError("quad_nodes must be an even integer >= 8")
        if self.model != "sl2r":
            raise ModelError("the spherical function is implemented for sl2r only")


def _phi0_trapezoid(M, nodes):
    # With k = rotation(theta), the Iwasawa A-factor of k M has
    # a22^2 = |row 2 of k M|^2 = (k M M^T k^T)_{22}, and exp(rho H) = 1 / a22.
    S = M @ M.T
    theta = 2 * np.pi * np.arange(nodes) / nodes
    a22_sq = 0.5 * ((S[0, 0] + S[1, 1]) + (S[1, 1] - S[0, 0]) * np.cos(2 * theta)
                    + 2 * S[0, 1] * np.sin(2 * theta))
    return float(np.mean(a22_sq ** -0.5))


def spherical_phi0(x, cfg: SphericalConfig = None, warn=True) -> float:
    """Periodic trapezoid rule over SO(2); warns when halving the nodes moves
    the value by more than the tolerance."""
    cfg = cfg or SphericalConfig()
    M = _as_sl2r(x)
    val = _phi0_trapezoid(M, cfg.quad_nodes)
    if warn:
        coarse = _phi0_trapezoid(M, cfg.quad_nodes // 2)
        if abs(val - coarse) > cfg.tolerance:
            warnings.warn(f"spherical quadrature not resolved at {cfg.quad_nodes} nodes "
                          f"(halving changes the value by {abs(val - coarse):.2e})",
                          PrecisionWarning, stacklevel=2)
    return val


def spherical_phi0_adaptive(x, tol=1e-12, start=256, max_nodes=2**24):
    """Double the node count until two successive values agree to ``tol``."""
    M = _as_sl2r(x)
    n = start
    prev = _phi0_trapezoid(M, n)
    while n < max_nodes:
        n *= 2
        val = _phi0_trapezoid(M, n)
        if abs(val - prev) <= tol * max(1.0, abs(val)):
            return val
        prev = val
    warnings.warn(f"spherical quadrature unresolved at {max_nodes} nodes", PrecisionWarning,
                  stacklevel=2)
    return prev


def richardson_orders(x, nodes=(8, 16, 32, 64), reference=None):
    """Observed convergence orders log2(e_N / e_2N) under node doubling."""
    M = _as_sl2r(x)
    ref = spherical_phi0_adaptive(M) if reference is None else reference
    errs = np.array([abs(_phi0_trapezoid(M, n) - ref) for n in nodes])
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log2(errs[:-1] / errs[1:]), errs


@dataclasses.dataclass(frozen=True)
class GrowthFit:
    C: float
    d: float
    C_lsq: float
    inflation: float
    passed: bool
    t: np.ndarray
    values: np.ndarray

    def bound(self, t):
        t = np.asarray(t, float)
        return self.C * np.exp(-t) * (1 + t) ** self.d


def growth_fit(t_grid, values=None, max_inflation=1.25) -> GrowthFit:
    """Fit phi0(a_t) <= C a_t^{-rho} (1 + rho log a_t)^d along a_t = exp(t H0).

    rho(log a_t) = t.  (log C, d) come from least squares; C is then raised
    to the smallest value for which the bound holds on every grid point.
    The fit passes when d >= 0 and that envelope needed at most
    ``max_inflation`` times the least-squares constant.
    """
    t = np.asarray(t_grid, float)
    if t.ndim != 1 or t.size < 3:
        raise InputError("growth_fit needs at least 3 grid points")
    if np.any(t <= 0):
        raise InputError("grid must lie in the open positive chamber")
    if values is None:
        values = np.array([spherical_phi0_adaptive(np.diag([np.exp(s), np.exp(-s)]))
                           for s in t])
    values = np.asarray(values, float)
    y = np.log(values) + t
    X = np.column_stack([np.ones_like(t), np.log1p(t)])
    (logC, d), *_ = np.linalg.lstsq(X, y, rcond=None)
    C_env = float(np.exp(np.max(y - d * np.log1p(t))))
    inflation = C_env / float(np.exp(logC))
    passed = bool(d >= 0 and inflation <= max_inflation and np.all(np.isfinite(values)))
    return GrowthFit(C_env, float(d), float(np.exp(logC)), inflation, passed, t, values)


def seminorm_weight(x, r, p, cfg: SphericalConfig = None) -> float:
    """(1 + |x|_p)^r phi0(x)^{-2/p}; p = inf drops the spherical factor."""
    if not p > 0:
        raise InputError("p must be positive")
    base = (1 + norm_p(x)) ** r
    if np.isinf(p):
        return float(base)
    return float(base * spherical_phi0(x, cfg) ** (-2.0 / p))
