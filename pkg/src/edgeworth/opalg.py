"""Constant-coefficient differential operators and sparse polynomials.

The expansion machinery is driven by four operator families built from a
moment table:

* ``psi_op(table, t)``      -- the basic operators, one per total order t,
* ``a_op(table, i, t)``     -- their i-fold products (two constructions:
  the convolution recursion and the direct coefficient form, which must
  produce identical operators),
* ``psi_k_op(table, k, t)`` -- the summand-indexed operators obtained by
  repeated convolution,
* ``t_op(table, n, t)``     -- their partial sums over k = 1..n, which
  collapse to polynomial-in-n combinations of the ``a_op`` family.

Multiindex keys are canonicalized by sorting: all operators here have
constant coefficients, so mixed partials commute and operator equality
becomes a dictionary comparison.  When the moment table is rational the
whole algebra stays in ``Fraction`` and the identities are exact.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product as iproduct

import numpy as np

from .exactmath import (
    MultiIndex,
    ZERO,
    p_value,
    prefix_splits,
    psi_scale,
    theta,
)
from .moments import MomentTable

__all__ = [
    "MultiPoly",
    "DiffOperator",
    "psi_op",
    "c_coeff",
    "a_op",
    "psi_k_op",
    "t_op",
]


def _strip(terms: dict) -> dict:
    return {k: v for k, v in terms.items() if v != 0}


class MultiPoly:
    """Sparse multivariate polynomial, keyed by exponent vector.

    Coefficients may be ``Fraction`` (exact mode) or floats; differentiation
    is exact either way.  Evaluation broadcasts over numpy arrays.
    """

    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms: dict | None = None):
        self.dim = dim
        self.terms = _strip(terms or {})

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls, dim: int) -> "MultiPoly":
        return cls(dim)

    @classmethod
    def constant(cls, dim: int, c) -> "MultiPoly":
        return cls(dim, {(0,) * dim: c})

    @classmethod
    def variable(cls, dim: int, i: int) -> "MultiPoly":
        """The coordinate monomial x_i, with i in 1..dim."""
        e = [0] * dim
        e[i - 1] = 1
        return cls(dim, {tuple(e): Fraction(1)})

    # -- ring operations ---------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(self.dim, other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return MultiPoly(self.dim, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.dim, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(self.dim, other)
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            return MultiPoly(self.dim, {e: c * other for e, c in self.terms.items()})
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return MultiPoly(self.dim, out)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __eq__(self, other):
        return (
            isinstance(other, MultiPoly)
            and self.dim == other.dim
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.dim, frozenset(self.terms.items())))

    # -- calculus ----------------------------------------------------------
    def diff(self, gamma: MultiIndex) -> "MultiPoly":
        """Exact partial derivative for a multiindex of coordinates."""
        out = self
        for i in gamma:
            nxt: dict = {}
            for e, c in out.terms.items():
                if e[i - 1] == 0:
                    continue
                ne = list(e)
                ne[i - 1] -= 1
                key = tuple(ne)
                nxt[key] = nxt.get(key, 0) + c * e[i - 1]
            out = MultiPoly(self.dim, nxt)
        return out

    def __call__(self, x):
        """Evaluate at points: raw values for dim 1, else last axis = dim."""
        x = np.asarray(x, dtype=float)
        if self.dim == 1:
            pts = x[..., None]
        else:
            pts = x
        out = np.zeros(pts.shape[:-1])
        for e, c in self.terms.items():
            term = float(c) * np.ones_like(out)
            for i, p in enumerate(e):
                if p:
                    term = term * pts[..., i] ** p
            out = out + term
        return out if out.shape else float(out)

    # -- misc ----------------------------------------------------------------
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def as_float(self) -> "MultiPoly":
        return MultiPoly(self.dim, {e: float(c) for e, c in self.terms.items()})

    def max_coeff_diff(self, other: "MultiPoly") -> float:
        keys = set(self.terms) | set(other.terms)
        return max(
            (abs(float(self.terms.get(k, 0)) - float(other.terms.get(k, 0))) for k in keys),
            default=0.0,
        )

    def coeff(self, exponents) -> object:
        return self.terms.get(tuple(exponents), 0)

    def __repr__(self):
        if not self.terms:
            return "MultiPoly<0>"
        bits = []
        for e, c in sorted(self.terms.items()):
            mono = "*".join(f"x{i+1}^{p}" for i, p in enumerate(e) if p) or "1"
            bits.append(f"{c}*{mono}")
        return "MultiPoly<" + " + ".join(bits) + ">"


class DiffOperator:
    """Formal finite sum ``sum_gamma c_gamma d_gamma`` with constant coefficients.

    Keys are sorted multiindices; composition concatenates keys and
    multiplies coefficients, so it is commutative here (the paper-side
    left-to-right product order is immaterial after canonicalization).
    """

    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms: dict | None = None):
        self.dim = dim
        self.terms = _strip(
            {tuple(sorted(k)): v for k, v in (terms or {}).items()}
        )

    @classmethod
    def zero(cls, dim: int) -> "DiffOperator":
        return cls(dim)

    @classmethod
    def partial(cls, dim: int, gamma: MultiIndex, coeff=Fraction(1)) -> "DiffOperator":
        return cls(dim, {tuple(gamma): coeff})

    def __add__(self, other: "DiffOperator") -> "DiffOperator":
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return DiffOperator(self.dim, out)

    def __sub__(self, other):
        return self + (-1) * other

    def __rmul__(self, scalar) -> "DiffOperator":
        if scalar == 0:
            return DiffOperator.zero(self.dim)
        return DiffOperator(self.dim, {k: scalar * v for k, v in self.terms.items()})

    def compose(self, other: "DiffOperator") -> "DiffOperator":
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        out: dict = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                key = tuple(sorted(k1 + k2))
                out[key] = out.get(key, 0) + v1 * v2
        return DiffOperator(self.dim, out)

    def apply(self, f: MultiPoly) -> MultiPoly:
        if self.dim != f.dim:
            raise ValueError("dimension mismatch")
        out = MultiPoly.zero(f.dim)
        for gamma, c in self.terms.items():
            out = out + c * f.diff(gamma)
        return out

    def __eq__(self, other):
        return (
            isinstance(other, DiffOperator)
            and self.dim == other.dim
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.dim, frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def order(self) -> int:
        return max((len(k) for k in self.terms), default=0)

    def items(self):
        return sorted(self.terms.items())

    def max_coeff_diff(self, other: "DiffOperator") -> float:
        keys = set(self.terms) | set(other.terms)
        return max(
            (abs(float(self.terms.get(k, 0)) - float(other.terms.get(k, 0))) for k in keys),
            default=0.0,
        )

    def __repr__(self):
        if not self.terms:
            return "DiffOperator<0>"
        bits = [f"{v}*d{list(k)}" for k, v in self.items()]
        return "DiffOperator<" + " + ".join(bits) + ">"


def _all_indices(dim: int, length: int):
    return iproduct(range(1, dim + 1), repeat=length)


def psi_op(table: MomentTable, t: int) -> DiffOperator:
    """Basic operator of total order ``t``.

    ``sum_{p=3}^{t} (-1)^q / (2^q p! q!) sum_{|alpha|=p, |beta|=t-p}
    theta_beta Delta_alpha d_beta d_alpha`` with ``q = (t-p)/2``; the zero
    operator for ``t <= 2``, and zero whenever every ``Delta`` vanishes.
    """

    def build():
        N = table.dim
        terms: dict = {}
        for p in range(3, t + 1):
            if (t - p) % 2:
                continue
            q = (t - p) // 2
            scale = psi_scale(p, q)
            for alpha in _all_indices(N, p):
                da = table.delta(alpha)
                if da == 0:
                    continue
                coeff = scale * da
                for pair_coords in _all_indices(N, q):
                    beta = tuple(c for c in pair_coords for _ in (0, 1))
                    key = tuple(sorted(beta + alpha))
                    terms[key] = terms.get(key, 0) + coeff
        return DiffOperator(table.dim, terms)

    return table.cache_get_or_build(("psi", t), build)


def c_coeff(table: MomentTable, i: int, gamma: MultiIndex):
    """Coefficient ``c^i_gamma`` of the direct operator construction.

    ``c^1`` sums ``Delta_alpha theta_beta`` over the prefix/suffix splits of
    ``gamma`` with the same scalar weights as ``psi_op``; higher orders
    convolve: ``c^{i+1}_gamma = sum c^1_alpha c^i_beta``.  Vanishes whenever
    ``|gamma| < 3i``.
    """
    gamma = tuple(gamma)
    if len(gamma) < 3 * i:
        return ZERO

    def build():
        acc = ZERO
        if i == 1:
            for alpha, beta in prefix_splits(gamma):
                if len(alpha) < 3 or len(beta) % 2 or not theta(beta):
                    continue
                da = table.delta(alpha)
                if da == 0:
                    continue
                acc += psi_scale(len(alpha), len(beta) // 2) * da
        else:
            for alpha, beta in prefix_splits(gamma):
                if len(alpha) < 3 or len(beta) < 3 * (i - 1):
                    continue
                c1 = c_coeff(table, 1, alpha)
                if c1 == 0:
                    continue
                ci = c_coeff(table, i - 1, beta)
                if ci == 0:
                    continue
                acc += c1 * ci
        return acc

    return table.cache_get_or_build(("c", i, gamma), build)


def a_op(table: MomentTable, i: int, t: int, mode: str = "direct") -> DiffOperator:
    """i-fold product operator of total order ``t``; zero when ``t < 3i``.

    ``mode="recursive"`` builds it through the convolution recursion on the
    basic operators; ``mode="direct"`` assembles ``sum_{|gamma|=t}
    c^i_gamma d_gamma``.  The two must coincide exactly.
    """
    if mode not in ("direct", "recursive"):
        raise ValueError("mode must be 'direct' or 'recursive'")
    if t < 3 * i:
        return DiffOperator.zero(table.dim)

    def build():
        if i == 1 and mode == "recursive":
            return psi_op(table, t)
        if mode == "recursive":
            acc = DiffOperator.zero(table.dim)
            for p in range(3, t - 3 * (i - 1) + 1):
                acc = acc + psi_op(table, p).compose(a_op(table, i - 1, t - p, mode))
            return acc
        terms: dict = {}
        for gamma in _all_indices(table.dim, t):
            c = c_coeff(table, i, gamma)
            if c == 0:
                continue
            key = tuple(sorted(gamma))
            terms[key] = terms.get(key, 0) + c
        return DiffOperator(table.dim, terms)

    return table.cache_get_or_build(("a", mode, i, t), build)


def psi_k_op(table: MomentTable, k: int, t: int) -> DiffOperator:
    """Summand-indexed operator: the (k-1)-fold convolution update.

    ``psi^(1) = psi`` and ``psi^(k)_t = psi^(k-1)_t + sum_p psi_p
    psi^(k-1)_{t-p}``; only ``3 <= p <= t-3`` contributes since the basic
    operators vanish below order 3.
    """
    if k < 1:
        raise ValueError("k must be >= 1")

    def build():
        if k == 1:
            return psi_op(table, t)
        acc = psi_k_op(table, k - 1, t)
        for p in range(3, t - 2):
            acc = acc + psi_op(table, p).compose(psi_k_op(table, k - 1, t - p))
        return acc

    return table.cache_get_or_build(("psik", k, t), build)


def t_op(table: MomentTable, n: int, t: int, mode: str = "direct") -> DiffOperator:
    """Partial-sum operator over summands ``1..n``.

    ``mode="sum"`` adds up ``psi_k_op(k, t)``; ``mode="direct"`` uses the
    polynomial collapse ``sum_i P_i(n) a_op(i, t)``.  Both agree exactly.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if mode not in ("direct", "sum"):
        raise ValueError("mode must be 'direct' or 'sum'")

    def build():
        if mode == "sum":
            acc = DiffOperator.zero(table.dim)
            for k in range(1, n + 1):
                acc = acc + psi_k_op(table, k, t)
            return acc
        acc = DiffOperator.zero(table.dim)
        for i in range(1, t // 3 + 1):
            acc = acc + p_value(i, n) * a_op(table, i, t, "direct")
        return acc

    return table.cache_get_or_build(("t", mode, n, t), build)
