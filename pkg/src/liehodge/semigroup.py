"""Heat semigroups, the Dyson-Phillips series and its convolution majorants.

Conventions.  The perturbed semigroup is exp(-t(A + B)) and

    Per^0(t) = exp(-tA),
    Per^k(t) = -int_0^t exp(-(t - s)A) B Per^{k-1}(s) ds,

so that sum_k Per^k(t) = exp(-t(A + B)).  Majorants use
phi(t) = ||exp(-tA)|| and psi(t) = ||B exp(-tA)||, and
||Per^k(t)|| <= (phi * psi^{*k})(t).

Nested integrals are evaluated on a Chebyshev collocation grid over [0, t]:
each level integrates the previous level's grid values, interpolated
barycentrically, with fixed Gauss-Legendre quadrature on [0, s_j].
"""

from __future__ import annotations

import dataclasses
import warnings

import numpy as np
import scipy.interpolate
import scipy.linalg
import scipy.special

from .errors import ConvergenceWarning, InputError, MajorantError, ScalingError

__all__ = [
    "expm",
    "PerturbationSplit",
    "MajorantData",
    "DysonResult",
    "dyson_phillips",
    "majorant_series",
    "sample_majorants",
    "laplace_integral",
    "find_omega1",
    "majorant_theta",
    "ThetaReport",
    "convolution_powers",
    "heat_apply",
    "heat_split",
    "semigroup_report",
]

_TAIL_EXTRA = 200


def expm(M) -> np.ndarray:
    """Matrix exponential (scaling and squaring with Pade, from scipy)."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InputError(f"expm needs a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InputError("expm input contains NaN or inf")
    with np.errstate(over="ignore", invalid="ignore"):
        out = scipy.linalg.expm(M)
    if not np.all(np.isfinite(out)):
        nrm = np.linalg.norm(M, 1)
        raise ScalingError(f"matrix exponential overflowed (1-norm of input {nrm:.3e})")
    return out


def _as_matrix(x):
    return np.asarray(getattr(x, "matrix", x), dtype=complex)


@dataclasses.dataclass(frozen=True, eq=False)
class PerturbationSplit:
    """Generator A + B with A the unperturbed part."""

    A: np.ndarray
    B: np.ndarray
    t_grid: np.ndarray = None
    order: int = 12
    quad_nodes: int = 32

    def __post_init__(self):
        A, B = _as_matrix(self.A), _as_matrix(self.B)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape != B.shape:
            raise InputError(f"A and B must be square of equal size, got {A.shape}, {B.shape}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
            raise InputError("split contains NaN or inf")
        if self.order < 0:
            raise InputError("order must be nonnegative")
        if self.quad_nodes < 2:
            raise InputError("quad_nodes must be at least 2")
        grid = np.logspace(-3, 1, 64) if self.t_grid is None else np.asarray(self.t_grid, float)
        if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
            raise InputError("t_grid must be positive and strictly increasing")
        for name, val in (("A", A), ("B", B), ("t_grid", grid)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def dim(self):
        return self.A.shape[0]


@dataclasses.dataclass(frozen=True, eq=False)
class MajorantData:
    t: np.ndarray
    phi_samples: np.ndarray
    psi_samples: np.ndarray
    omega1: float = float("nan")

    def __post_init__(self):
        t = np.asarray(self.t, float)
        phi = np.asarray(self.phi_samples, float)
        psi = np.asarray(self.psi_samples, float)
        if t.ndim != 1 or phi.shape != t.shape or psi.shape != t.shape:
            raise InputError("samples must be 1-d arrays matching the grid")
        if t.size < 2 or np.any(t <= 0) or np.any(np.diff(t) <= 0):
            raise InputError("sample grid must be positive and strictly increasing")
        if np.any(phi < 0) or np.any(psi < 0) or not np.all(np.isfinite(phi + psi)):
            raise MajorantError("majorant samples must be finite and nonnegative")
        for name, val in (("t", t), ("phi_samples", phi), ("psi_samples", psi)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)


# -- collocation machinery ------------------------------------------------------

def _cheb_nodes(p):
    """Chebyshev points of the second kind on [0, 1], ascending."""
    j = np.arange(p)
    return 0.5 * (1 - np.cos(np.pi * j / (p - 1)))


def _bary_weights(p):
    w = (-1.0) ** np.arange(p)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def _bary_matrix(nodes, weights, x):
    """Rows interpolate from values at ``nodes`` to the points ``x``."""
    diff = x[:, None] - nodes[None, :]
    exact = np.isclose(diff, 0.0, atol=1e-15 * max(1.0, nodes[-1]))
    diff = np.where(exact, 1.0, diff)
    W = weights[None, :] / diff
    W = W / W.sum(axis=1, keepdims=True)
    hit = exact.any(axis=1)
    W[hit] = exact[hit].astype(float)
    return W


class _Collocation:
    """Grid s_j on [0, t] with quadrature points r_jl on [0, s_j]."""

    def __init__(self, t, p, nodes):
        self.t = float(t)
        self.s = self.t * _cheb_nodes(p)
        x, w = np.polynomial.legendre.leggauss(nodes)
        u = 0.5 * (x + 1)
        self.r = self.s[:, None] * u[None, :]               # (p, nodes)
        self.w = 0.5 * self.s[:, None] * w[None, :]           # (p, nodes)
        bw = _bary_weights(p)
        flat = self.r.ravel()
        self.interp_r = _bary_matrix(self.s, bw, flat).reshape(p, nodes, p)
        lag = (self.s[:, None] - self.r).ravel()
        self.interp_lag = _bary_matrix(self.s, bw, lag).reshape(p, nodes, p)
        self.lag = self.s[:, None] - self.r


class _Exponential:
    """exp(-tau A) for many tau, by eigendecomposition when that is safe."""

    def __init__(self, A):
        self.A = A
        self.mode = "expm"
        if np.allclose(A, A.conj().T, atol=1e-14 * max(1.0, np.abs(A).max())):
            lam, V = np.linalg.eigh(0.5 * (A + A.conj().T))
            self.mode, self.lam, self.V, self.Vinv = "eig", lam, V, V.conj().T
        else:
            lam, V = np.linalg.eig(A)
            if np.linalg.cond(V) < 1e6:
                self.mode, self.lam, self.V, self.Vinv = "eig", lam, V, np.linalg.inv(V)

    def __call__(self, taus):
        taus = np.asarray(taus, float)
        if self.mode == "eig":
            ex = np.exp(-np.multiply.outer(taus, self.lam))
            return np.einsum("ab,...b,bc->...ac", self.V, ex, self.Vinv)
        flat = taus.ravel()
        out = np.array([expm(-tau * self.A) for tau in flat])
        return out.reshape(taus.shape + self.A.shape)


@dataclasses.dataclass(frozen=True)
class DysonResult:
    S: np.ndarray
    error_estimate: float
    per_term_norms: tuple
    majorant_terms: tuple
    t: float
    order: int


def _norm2(M):
    return np.linalg.norm(M, 2, axis=(-2, -1)) if M.ndim > 2 else np.linalg.norm(M, 2)


def majorant_series(split: PerturbationSplit, t, k_max, grid_points=None):
    """(phi * psi^{*k})(t) for k = 0..k_max by collocation on [0, t]."""
    p = max(split.quad_nodes, 32) if grid_points is None else grid_points
    col = _Collocation(t, p, split.quad_nodes)
    expo = _Exponential(split.A)
    phi_grid = _norm2(expo(col.s))
    psi_r = _norm2(split.B @ expo(col.r))                    # (p, nodes)
    terms = [phi_grid]
    for _ in range(k_max):
        prev = terms[-1]
        lagged = np.einsum("jli,i->jl", col.interp_lag, prev)
        terms.append(np.einsum("jl,jl,jl->j", col.w, lagged, psi_r))
    return np.array([c[-1] for c in terms])


def dyson_phillips(split: PerturbationSplit, t, order=None, tail_tol=1e-8) -> DysonResult:
    """Partial sum S_K = sum_{k<=K} Per^k(t) and the majorant tail beyond K."""
    if not t > 0:
        raise InputError("t must be positive")
    K = split.order if order is None else int(order)
    p = max(split.quad_nodes, 32)
    col = _Collocation(t, p, split.quad_nodes)
    expo = _Exponential(split.A)
    E_lag = expo(col.lag)                                      # (p, nodes, d, d)
    B = split.B
    per = expo(col.s)                                          # Per^0 on the grid
    S = per[-1].copy()
    norms = [float(_norm2(per[-1]))]
    for _ in range(K):
        at_r = np.tensordot(col.interp_r, per, axes=(2, 0))     # (p, nodes, d, d)
        integrand = E_lag @ (B @ at_r)
        per = -np.einsum("jl,jlad->jad", col.w, integrand)
        S += per[-1]
        norms.append(float(_norm2(per[-1])))
    maj = majorant_series(split, t, K + _TAIL_EXTRA if np.any(B) else K)
    tail_terms = maj[K + 1:]
    tail = float(tail_terms.sum())
    last = float(tail_terms[-1]) if tail_terms.size else 0.0
    if last > 1e-16 * max(1.0, tail) or not np.isfinite(tail):
        warnings.warn(f"majorant series not converged at t={t}: tail {tail:.3e}",
                      ConvergenceWarning, stacklevel=2)
    elif tail > tail_tol:
        warnings.warn(f"majorant tail {tail:.3e} above {tail_tol:.1e} at order {K}",
                      ConvergenceWarning, stacklevel=2)
    return DysonResult(S, tail, tuple(norms), tuple(float(x) for x in maj[:K + 1]), float(t), K)


# -- majorant lemma ------------------------------------------------------------

def sample_majorants(split: PerturbationSplit, t_grid=None) -> MajorantData:
    """phi(t) = ||exp(-tA)||, psi(t) = ||B exp(-tA)|| in spectral norm."""
    grid = split.t_grid if t_grid is None else np.asarray(t_grid, float)
    E = _Exponential(split.A)(grid)
    return MajorantData(grid, _norm2(E), _norm2(split.B @ E))


def _slope(t0, t1, f0, f1):
    if f0 <= 0 or f1 <= 0:
        return 0.0
    return float(np.log(f1 / f0) / np.log(t1 / t0))


def _one_minus_exp_poly(x):
    """1 - exp(-x)(1 + x), accurate for small x."""
    return np.where(x < 1e-3, x**2 / 2 - x**3 / 3 + x**4 / 8, -np.expm1(-x) - x * np.exp(-x))


def laplace_integral(t, f, omega, growth=None):
    """int_0^inf exp(-omega s) f(s) ds from samples.

    Power law below the first sample, exact integration of the exponential
    against a piecewise-linear f on the grid, and an exponential tail bound
    past the last sample with rate ``growth`` (log-slope of the last two
    samples when not given).  Returns inf when the tail does not converge.
    """
    t = np.asarray(t, float)
    f = np.asarray(f, float)
    if omega <= 0:
        return float("inf")
    total = 0.0
    beta = _slope(t[0], t[1], f[0], f[1])
    if f[0] > 0:
        if beta <= -1:
            return float("inf")
        a = beta + 1
        total += f[0] * t[0] ** (-beta) * scipy.special.gammainc(a, omega * t[0]) \
            * scipy.special.gamma(a) / omega**a
    s0, s1 = t[:-1], t[1:]
    h = s1 - s0
    f0, f1 = f[:-1], f[1:]
    x = omega * h
    E0 = np.exp(-omega * s0)
    flat = E0 * -np.expm1(-x) / omega
    ramp = E0 * _one_minus_exp_poly(x) / omega**2
    total += float(np.sum(f0 * flat + (f1 - f0) / h * ramp))
    if growth is None:
        growth = float(np.log(f[-1] / f[-2]) / (t[-1] - t[-2])) if f[-1] > 0 and f[-2] > 0 else 0.0
    if f[-1] > 0:
        if omega <= growth:
            return float("inf")
        total += f[-1] * np.exp(-omega * t[-1]) / (omega - growth)
    return float(total)


def find_omega1(data: MajorantData, cap=1e6, rtol=1e-9):
    """Smallest omega1 (to ``rtol``) with int e^{-omega1 s}(phi + psi0) <= 1 and
    int e^{-omega1 s}(phi + psi1) <= 1/16, for psi0 = phi and psi1 = psi.
    """
    t, phi, psi = data.t, data.phi_samples, data.psi_samples
    growth = max(0.0, float(np.log(phi[-1] / phi[-2]) / (t[-1] - t[-2]))) if phi[-1] > 0 and phi[-2] > 0 else 0.0

    def ok(w):
        return (laplace_integral(t, 2 * phi, w, growth) <= 1.0
                and laplace_integral(t, phi + psi, w, growth) <= 1 / 16)

    hi = max(1.0, 2 * growth)
    while not ok(hi):
        hi *= 2
        if hi > cap:
            raise MajorantError(f"no admissible omega1 below {cap:.1e}")
    lo = 0.0
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if mid > growth and ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


class _Sampled:
    """Cubic spline in log-log coordinates with power-law ends.

    Samples containing zeros fall back to a monotone spline in the values.
    """

    def __init__(self, t, f):
        self.t, self.f = np.asarray(t, float), np.asarray(f, float)
        self.positive = bool(np.all(self.f > 0))
        if self.positive:
            self.lt, self.lf = np.log(self.t), np.log(self.f)
            self.spline = scipy.interpolate.CubicSpline(self.lt, self.lf)
            self.b0 = (self.lf[1] - self.lf[0]) / (self.lt[1] - self.lt[0])
            self.b1 = (self.lf[-1] - self.lf[-2]) / (self.lt[-1] - self.lt[-2])
        else:
            self.spline = scipy.interpolate.PchipInterpolator(self.t, self.f, extrapolate=True)

    def __call__(self, x):
        x = np.asarray(x, float)
        if not self.positive:
            return np.maximum(self.spline(np.clip(x, self.t[0], self.t[-1])), 0.0)
        lx = np.log(np.maximum(x, 1e-300))
        out = self.spline(np.clip(lx, self.lt[0], self.lt[-1]))
        lo, hi = lx < self.lt[0], lx > self.lt[-1]
        out = np.where(lo, self.lf[0] + self.b0 * (lx - self.lt[0]), out)
        out = np.where(hi, self.lf[-1] + self.b1 * (lx - self.lt[-1]), out)
        return np.exp(out)


def convolution_powers(t, psi0, psi1, n_max, nodes=64):
    """(psi0 * psi1^{*n}) on the grid ``t`` for n = 0..n_max, from samples.

    Each convolution is split at the midpoint and both halves use the
    substitution s = h u^2 about their singular end, which absorbs
    integrable power singularities at the origin.
    """
    t = np.asarray(t, float)
    x, w = np.polynomial.legendre.leggauss(nodes)
    u = 0.5 * (x + 1) * np.sqrt(0.5)       # u in [0, 1/sqrt 2] so u^2 in [0, 1/2]
    wu = 0.5 * w * np.sqrt(0.5)
    g1 = _Sampled(t, psi1)
    out = [np.asarray(psi0, float)]
    for _ in range(n_max):
        prev = _Sampled(t, out[-1])
        vals = np.empty_like(t)
        for j, tj in enumerate(t):
            near = tj * u**2            # small argument of psi1 / prev
            jac = 2 * tj * u * wu
            a = np.sum(jac * prev(tj - near) * g1(near))
            b = np.sum(jac * prev(near) * g1(tj - near))
            vals[j] = a + b
        out.append(vals)
    return np.array(out)


@dataclasses.dataclass(frozen=True)
class ThetaReport:
    t: np.ndarray
    omega1: float
    convolutions: np.ndarray          # (n_max + 1, len(t))
    log_bounds: np.ndarray            # log(2^{-n} t^{-2} e^{t omega1})
    flags: np.ndarray                 # convolution <= bound
    partial_sums: np.ndarray

    @property
    def passed(self):
        return bool(np.all(self.flags))

    def monotone(self):
        return bool(np.all(np.diff(self.partial_sums, axis=0) >= 0))

    def bound(self, n):
        return np.exp(self.log_bounds[n])


def majorant_theta(data: MajorantData, t_grid=None, n_max=8, omega1=None, cap=1e6):
    """Sampled (psi0 * psi1^{*n})(t) against 2^{-n} t^{-2} e^{t omega1}.

    psi0 is phi and psi1 is psi from ``data``; comparisons happen in log
    space since omega1 can be large.  Values on ``t_grid`` are interpolated
    from the sample grid.
    """
    w1 = data.omega1 if omega1 is None else float(omega1)
    if not np.isfinite(w1):
        w1 = find_omega1(data, cap=cap)
    conv = convolution_powers(data.t, data.phi_samples, data.psi_samples, n_max)
    tg = data.t if t_grid is None else np.asarray(t_grid, float)
    vals = np.array([_Sampled(data.t, c)(tg) for c in conv])
    n = np.arange(n_max + 1)[:, None]
    log_bound = -n * np.log(2) - 2 * np.log(tg)[None, :] + tg[None, :] * w1
    with np.errstate(divide="ignore"):
        flags = np.log(vals) <= log_bound
    return ThetaReport(tg, w1, vals, log_bound, flags, np.cumsum(vals, axis=0))


# -- heat flow on cochains -------------------------------------------------------

def heat_apply(frame, rep, q, t, vector):
    """exp(-t Delta_q) applied to a cochain vector."""
    from .cochain import laplacian
    if not t > 0:
        raise InputError("t must be positive")
    L = laplacian(frame, rep, q).matrix
    v = np.asarray(vector, dtype=complex)
    if v.shape[0] != L.shape[0]:
        raise InputError(f"vector has length {v.shape[0]}, C^{q} has dimension {L.shape[0]}")
    return expm(-t * L) @ v


def heat_split(frame, rep, q, order=12, quad_nodes=32, t_grid=None) -> PerturbationSplit:
    """A = Delta_0 (x) identity on Lambda^q, B = Delta_q - A."""
    from math import comb

    from .cochain import laplacian
    L = laplacian(frame, rep, q).matrix
    L0 = laplacian(frame, rep, 0).matrix
    A = np.kron(np.eye(comb(frame.dim, q)), L0)
    return PerturbationSplit(A, L - A, t_grid, order, quad_nodes)


def semigroup_report(split: PerturbationSplit, t, order=None) -> dict:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = dyson_phillips(split, t, order)
    exact = expm(-t * (split.A + split.B))
    measured = float(np.linalg.norm(res.S - exact, 2))
    return {
        "t": float(t),
        "K": res.order,
        "measured_error": measured,
        "majorant_tail": res.error_estimate,
        "per_term_norms": list(res.per_term_norms),
        "majorant_terms": list(res.majorant_terms),
        "warnings": [str(w.message) for w in caught],
    }
