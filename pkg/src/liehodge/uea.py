"""Poincare-Birkhoff-Witt normal forms in the universal enveloping algebra.

Elements are finite sums of ordered monomials.  Internally a monomial is a
nondecreasing tuple of *positions* in the chosen order; position ``p`` stands
for generator ``order[p]``.  Products are formed by concatenating words and
straightening them with X_a X_b -> X_b X_a + [X_a, X_b].
"""

from __future__ import annotations

import dataclasses
import random
from collections import defaultdict

import numpy as np
import scipy.linalg

from .errors import CapError, FormError, InputError, ModelError

__all__ = [
    "Enveloping",
    "PbwElement",
    "nf",
    "casimir",
    "casimir_k",
    "omega_bar",
    "centrality_residual",
    "evaluate",
    "ad_scaling_check",
    "element_from_json",
]

PRUNE = 1e-15


def _prune(terms):
    return {w: c for w, c in terms.items() if abs(c) > PRUNE}


class Enveloping:
    """Rewriting engine for U(g) over a fixed generator order.

    ``structure`` is any object with a ``structure`` tensor, or the tensor
    itself.  Straightened words are cached, so one engine should be shared by
    all elements that are multiplied together.
    """

    def __init__(self, structure, order=None, degree_cap=6):
        C = np.asarray(getattr(structure, "structure", structure), dtype=float)
        n = C.shape[0]
        order = tuple(range(n)) if order is None else tuple(int(i) for i in order)
        if sorted(order) != list(range(n)):
            raise InputError(f"order must be a permutation of 0..{n - 1}, got {order}")
        if degree_cap < 1:
            raise InputError("degree_cap must be at least 1")
        self.n = n
        self.order = order
        self.degree_cap = int(degree_cap)
        pos = np.argsort(order)
        # bracket table in position coordinates: [P_a, P_b] = sum_c T[a, b, c] P_c
        T = C[np.ix_(order, order, order)]
        self._brackets = {}
        for a in range(n):
            for b in range(n):
                nz = np.nonzero(T[a, b])[0]
                self._brackets[a, b] = tuple((int(c), float(T[a, b, c])) for c in nz)
        self._pos = pos
        self._cache = {}

    # -- construction ---------------------------------------------------------

    def element(self, terms):
        return PbwElement(self, _prune(dict(terms)))

    def unit(self, coeff=1.0):
        return self.element({(): complex(coeff)})

    def zero(self):
        return self.element({})

    def generator(self, i, coeff=1.0):
        """The element coeff * X_i for generator index ``i``."""
        return self.element({(int(self._pos[i]),): complex(coeff)})

    def vector(self, x):
        """Degree-one element sum_i x_i X_i."""
        return self.element({(int(self._pos[i]),): complex(c) for i, c in enumerate(x) if c != 0})

    def word(self, word, coeff=1.0, rng=None):
        """Normal form of coeff * X_{w1} X_{w2} ... (generator indices)."""
        word = tuple(int(i) for i in word)
        if len(word) > self.degree_cap:
            raise CapError(f"word of length {len(word)} exceeds degree cap {self.degree_cap}")
        if any(not 0 <= i < self.n for i in word):
            raise InputError(f"generator index out of range in {word}")
        pw = tuple(int(self._pos[i]) for i in word)
        return self.element({w: coeff * c for w, c in self._straighten(pw, rng).items()})

    # -- rewriting ------------------------------------------------------------

    def _straighten(self, w, rng=None):
        if len(w) > self.degree_cap:
            raise CapError(f"rewriting produced degree {len(w)} above cap {self.degree_cap}")
        descents = [k for k in range(len(w) - 1) if w[k] > w[k + 1]]
        if not descents:
            return {w: 1.0}
        if rng is None:
            hit = self._cache.get(w)
            if hit is not None:
                return hit
            k = descents[0]
        else:
            k = rng.choice(descents)
        a, b = w[k], w[k + 1]
        out = defaultdict(complex)
        swapped = w[:k] + (b, a) + w[k + 2:]
        for m, c in self._straighten(swapped, rng).items():
            out[m] += c
        for cidx, cval in self._brackets[a, b]:
            shorter = w[:k] + (cidx,) + w[k + 2:]
            for m, c in self._straighten(shorter, rng).items():
                out[m] += cval * c
        res = _prune(out)
        if rng is None:
            self._cache[w] = res
        return res

    def multiply(self, x, y):
        out = defaultdict(complex)
        for w1, c1 in x.terms.items():
            for w2, c2 in y.terms.items():
                for m, c in self._straighten(w1 + w2).items():
                    out[m] += c1 * c2 * c
        return self.element(out)

    def renormalize(self, elem, seed=None):
        """Re-straighten every term with a random choice of descent at each step."""
        rng = random.Random(seed)
        out = defaultdict(complex)
        for w, c in elem.terms.items():
            for m, cc in self._straighten(w, rng).items():
                out[m] += c * cc
        return self.element(out)


@dataclasses.dataclass(frozen=True, eq=False)
class PbwElement:
    engine: Enveloping
    terms: dict

    @property
    def order(self):
        return self.engine.order

    @property
    def degree_cap(self):
        return self.engine.degree_cap

    @property
    def degree(self):
        return max((len(w) for w in self.terms), default=-1)

    def exponents(self, word):
        e = [0] * self.engine.n
        for p in word:
            e[p] += 1
        return tuple(e)

    def items(self):
        """(exponent vector, coefficient) pairs in sorted order."""
        return sorted((self.exponents(w), c) for w, c in self.terms.items())

    def _check(self, other):
        if not isinstance(other, PbwElement) or other.engine is not self.engine:
            raise InputError("elements belong to different enveloping-algebra engines")

    def __add__(self, other):
        self._check(other)
        out = defaultdict(complex, self.terms)
        for w, c in other.terms.items():
            out[w] += c
        return self.engine.element(out)

    def __neg__(self):
        return self.engine.element({w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, PbwElement):
            self._check(other)
            return self.engine.multiply(self, other)
        return self.engine.element({w: c * other for w, c in self.terms.items()})

    def __rmul__(self, scalar):
        return self * scalar

    def max_abs(self):
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def coefficient(self, word):
        """Coefficient of the ordered monomial with the given generator indices."""
        pw = tuple(sorted(int(self.engine._pos[i]) for i in word))
        return self.terms.get(pw, 0.0)

    def to_json(self):
        terms = [{"exps": list(e), "re": float(c.real), "im": float(c.imag)}
                 for e, c in self.items()]
        return {"order": list(self.order), "terms": terms}

    def __repr__(self):
        names = [f"X{g + 1}" for g in self.order]
        parts = []
        for e, c in self.items():
            mono = "".join(f"{names[p]}^{k}" if k > 1 else names[p]
                           for p, k in enumerate(e) if k) or "1"
            parts.append(f"({c:.6g}){mono}")
        return " + ".join(parts) or "0"


def element_from_json(d, engine: Enveloping) -> PbwElement:
    if list(d["order"]) != list(engine.order):
        raise InputError("element order differs from engine order")
    terms = {}
    for t in d["terms"]:
        e = t["exps"]
        w = tuple(p for p, k in enumerate(e) for _ in range(int(k)))
        terms[w] = complex(t["re"], t["im"])
    return engine.element(terms)


def nf(word, coeff=1.0, frame=None, order=None, degree_cap=6, engine=None, seed=None):
    """Normal form of ``coeff * X_{w1} ... X_{wk}``.

    With ``seed`` the descent to rewrite is picked at random at every step;
    the result must not depend on it.
    """
    if engine is None:
        if frame is None:
            raise InputError("nf needs a frame or an engine")
        engine = Enveloping(frame, order, degree_cap)
    rng = None if seed is None else random.Random(seed)
    return engine.word(word, coeff, rng)


def _form_of(frame, B):
    if B is None:
        B = getattr(frame, "form", None)
    if B is None:
        raise FormError("no invariant form supplied")
    return np.asarray(B, dtype=float)


def _quadratic(engine, Binv, idx):
    out = engine.zero()
    for a, i in enumerate(idx):
        for b, j in enumerate(idx):
            if Binv[a, b] != 0:
                out = out + engine.word((i, j), Binv[a, b])
    return out


def _inverse_block(B, idx):
    blk = B[np.ix_(idx, idx)]
    if not idx:
        return blk
    if np.linalg.matrix_rank(blk) < len(idx):
        raise FormError("invariant form is singular on the requested block")
    return np.linalg.inv(blk)


def casimir(frame, B=None, engine=None) -> PbwElement:
    """Omega = sum_i X_i X^i for the B-dual basis X^i."""
    engine = engine or Enveloping(frame)
    B = _form_of(frame, B)
    idx = list(range(engine.n))
    return _quadratic(engine, _inverse_block(B, idx), idx)


def casimir_k(frame, B=None, engine=None) -> PbwElement:
    """Casimir of the k block, using B restricted to k."""
    engine = engine or Enveloping(frame)
    B = _form_of(frame, B)
    idx = list(frame.k_indices)
    return _quadratic(engine, _inverse_block(B, idx), idx)


def omega_bar(frame, engine=None) -> PbwElement:
    """Sum of squares over the orthonormal frame."""
    engine = engine or Enveloping(frame)
    idx = list(range(engine.n))
    return _quadratic(engine, np.eye(len(idx)), idx)


def centrality_residual(elem: PbwElement, frame=None) -> float:
    """max_i of the largest coefficient of elem X_i - X_i elem."""
    eng = elem.engine
    if elem.degree >= eng.degree_cap:
        raise CapError("element degree leaves no room for the commutator products")
    res = 0.0
    for i in range(eng.n):
        x = eng.generator(i)
        res = max(res, (elem * x - x * elem).max_abs())
    return res


def evaluate(elem: PbwElement, rep) -> np.ndarray:
    """Substitute tau(X_i) for X_i in every ordered monomial."""
    eng = elem.engine
    if rep.n != eng.n:
        raise InputError(f"module has {rep.n} generators, element lives over {eng.n}")
    gens = [rep.generators[g] for g in eng.order]
    m = rep.dim_v
    out = np.zeros((m, m), dtype=complex)
    for w, c in elem.terms.items():
        M = np.eye(m, dtype=complex)
        for p in w:
            M = M @ gens[p]
        out += c * M
    return out


def ad_scaling_check(frame, H, word, t, engine=None, tol=1e-10):
    """Conjugate a monomial over root vectors by exp(t ad H).

    Returns ``(predicted, computed, residual)`` where ``predicted`` is
    exp(t * sum of the roots), ``computed`` is the conjugated element and
    ``residual`` the largest coefficient of computed - predicted * original.
    """
    engine = engine or Enveloping(frame)
    C = np.asarray(getattr(frame, "structure", frame), dtype=float)
    H = np.asarray(H, dtype=float)
    adH = np.einsum("i,ijk->kj", H, C)
    roots = []
    for g in word:
        v = adH[:, g]
        alpha = v[g]
        off = np.delete(v, g)
        if off.size and np.abs(off).max() > tol:
            raise ModelError(f"generator {g} is not a root vector for H")
        roots.append(float(alpha))
    M = scipy.linalg.expm(t * adH)
    computed = engine.unit()
    for g in word:
        computed = computed * engine.vector(M[:, g])
    original = engine.word(word)
    predicted = float(np.exp(t * sum(roots)))
    residual = (computed - original * predicted).max_abs()
    return predicted, computed, residual
