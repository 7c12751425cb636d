"""Distribution registry and moment machinery.

Ships a small family of 1-D laws (uniform, centered exponential, Laplace,
shifted Gamma, a skewed two-component Gaussian mixture, and a partially
singular Gaussian+atom mixture), products of those for higher dimensions,
standardization to zero mean / identity covariance, and the moment tables
consumed by the operator algebra:

* ``delta(alpha) = E(F^alpha) - E(G^alpha)`` with G standard Gaussian,
* the normalized 1-D ratios ``ell_t = E(F^t) / Var(F)^{t/2}``.

Moments are closed-form and exact (``Fraction``) wherever the parameters
allow it, so the corrector polynomials built downstream stay exact for the
shipped skewed laws.
"""

from __future__ import annotations

import math
import re
import threading
from fractions import Fraction
from itertools import combinations_with_replacement

import numpy as np
from scipy import integrate

from .exactmath import MultiIndex, ZERO

__all__ = [
    "OrderExceeded",
    "NonInvertibleCovariance",
    "gaussian_moment",
    "delta",
    "standardize",
    "Distribution",
    "Uniform",
    "Normal",
    "Exponential",
    "Laplace",
    "Gamma",
    "GaussianMixture",
    "AtomMixture",
    "UserDensity",
    "ProductDistribution",
    "MomentTable",
    "make_distribution",
    "shipped_labels",
    "fixture_deltas",
    "fixture_table",
    "moments_to_cumulants",
    "cumulants_to_moments",
]


class OrderExceeded(Exception):
    """A moment beyond the declared maximum order was requested."""


class NonInvertibleCovariance(Exception):
    """Covariance matrix is numerically singular; the law cannot be standardized."""


def double_factorial(n: int) -> int:
    """``n!!`` with the convention ``(-1)!! = 0!! = 1``."""
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def subfactorial(n: int) -> int:
    """Derangement number ``!n`` (equals the n-th central moment of Exp(1))."""
    out = 1
    for j in range(1, n + 1):
        out = j * out + (-1) ** j
    return out


def _coordinate_counts(alpha: MultiIndex, dim: int) -> tuple[int, ...]:
    counts = [0] * dim
    for a in alpha:
        if not 1 <= a <= dim:
            raise ValueError(f"coordinate {a} outside 1..{dim}")
        counts[a - 1] += 1
    return tuple(counts)


def gaussian_moment(alpha: MultiIndex, dim: int | None = None) -> Fraction:
    """``E(G^alpha)`` for a standard Gaussian in R^N.

    Nonzero only when every coordinate appears an even number of times, in
    which case it is the product of the 1-D double factorials (Isserlis
    evaluated coordinatewise, valid because the coordinates are
    independent).
    """
    if dim is None:
        dim = max(alpha, default=1)
    counts = _coordinate_counts(alpha, dim)
    out = 1
    for c in counts:
        if c % 2:
            return ZERO
        out *= double_factorial(c - 1)
    return Fraction(out)


def _sqrt_exact(x: Fraction) -> Fraction | None:
    """Exact square root of a nonnegative Fraction, or None."""
    if x < 0:
        return None
    n, d = x.numerator, x.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def moments_to_cumulants(ms):
    """Cumulants ``k_1..k_R`` from raw moments ``m_1..m_R`` (index 0 = m_1)."""
    ms = [1] + list(ms)
    ks = [None]
    for n in range(1, len(ms)):
        acc = ms[n]
        for j in range(1, n):
            acc -= math.comb(n - 1, j - 1) * ks[j] * ms[n - j]
        ks.append(acc)
    return ks[1:]


def cumulants_to_moments(ks):
    """Raw moments ``m_1..m_R`` from cumulants ``k_1..k_R``."""
    ks = [None] + list(ks)
    ms = [1]
    for n in range(1, len(ks)):
        acc = 0
        for j in range(1, n + 1):
            acc += math.comb(n - 1, j - 1) * ks[j] * ms[n - j]
        ms.append(acc)
    return ms[1:]


class Distribution:
    """Base class for the laws handled by the package.

    Subclasses provide a density evaluator for the absolutely continuous
    component (vectorized over numpy arrays), the characteristic function,
    exact raw moments up to ``max_order``, and a direct sampler.
    """

    dim = 1
    label = "distribution"
    max_order = 16
    singular_mass = 0.0
    #: ((location, mass), ...) of the atoms of the singular part, if any.
    atoms: tuple = ()
    is_standardized = False

    # -- mandatory surface -------------------------------------------------
    def pdf(self, x):
        raise NotImplementedError

    def char_fn(self, t):
        raise NotImplementedError

    def raw_moment(self, k: int):
        """1-D raw moment E(F^k); exact where closed forms allow."""
        raise NotImplementedError

    def sample(self, rng, size):
        raise NotImplementedError

    # -- generic helpers ---------------------------------------------------
    def sample_parts(self, rng, size):
        """Draws plus a mask flagging which draws landed on an atom."""
        return self.sample(rng, size), np.zeros(size, dtype=bool)

    def moment(self, alpha: MultiIndex):
        """E(F^alpha) for a multiindex over coordinates {1..dim}."""
        if len(alpha) > self.max_order:
            raise OrderExceeded(f"|alpha|={len(alpha)} > max_order={self.max_order}")
        if self.dim == 1:
            _coordinate_counts(alpha, 1)
            return self.raw_moment(len(alpha))
        raise NotImplementedError

    def mean(self):
        return np.array([float(self.moment((i,))) for i in range(1, self.dim + 1)])

    def cov(self):
        m = self.mean()
        c = np.empty((self.dim, self.dim))
        for i in range(1, self.dim + 1):
            for j in range(1, self.dim + 1):
                c[i - 1, j - 1] = float(self.moment((i, j))) - m[i - 1] * m[j - 1]
        return c

    def central_moment(self, k: int):
        """1-D central moment, exact when raw moments and mean are exact."""
        mu = self.raw_moment(1)
        acc = 0
        for j in range(k + 1):
            acc += math.comb(k, j) * self.raw_moment(j) * (-mu) ** (k - j)
        return acc

    def standardize(self):
        """The law of ``A(F)(F - E F)`` with ``A(F) = C(F)^{-1/2}``."""
        return standardize(self)

    # -- convenience -------------------------------------------------------
    def support(self):
        """(lo, hi) bounds for density scans; subclasses may tighten."""
        return (-12.0, 12.0)

    def __repr__(self):
        return f"<{type(self).__name__} {self.label!r}>"


def standardize(dist: Distribution) -> Distribution:
    """Standardize a distribution to zero mean and identity covariance.

    Raises :class:`NonInvertibleCovariance` when the covariance is
    numerically singular (smallest eigenvalue below ``1e-8`` times the
    largest, or not positive).
    """
    cov = dist.cov()
    eig = np.linalg.eigvalsh(cov)
    if eig[0] <= 0 or eig[0] < 1e-8 * eig[-1]:
        raise NonInvertibleCovariance(
            f"covariance eigenvalues {eig} are degenerate for {dist.label}"
        )
    if dist.dim == 1:
        return _Standardized1D(dist)
    if isinstance(dist, ProductDistribution):
        return ProductDistribution([standardize(c) for c in dist.children])
    raise NotImplementedError("standardization beyond 1-D supports product laws only")


class _Standardized1D(Distribution):
    """Affine image ``(F - mean) / std`` of a 1-D law."""

    def __init__(self, base: Distribution):
        self.base = base
        self.label = base.label
        self.max_order = base.max_order
        self.singular_mass = base.singular_mass
        self._mu = base.raw_moment(1)
        self._var = base.central_moment(2)
        self._mu_f = float(self._mu)
        self._sd_f = math.sqrt(float(self._var))
        sd_exact = _sqrt_exact(self._var) if isinstance(self._var, Fraction) else None
        self._sd_exact = sd_exact
        self.atoms = tuple(
            ((float(a) - self._mu_f) / self._sd_f, m) for a, m in base.atoms
        )
        self.is_standardized = True

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return self._sd_f * self.base.pdf(self._sd_f * x + self._mu_f)

    def char_fn(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(-1j * self._mu_f / self._sd_f * t) * self.base.char_fn(
            t / self._sd_f
        )

    def raw_moment(self, k: int):
        if k == 0:
            return Fraction(1)
        c = self.base.central_moment(k)
        if c == 0:
            return ZERO
        exact = isinstance(c, Fraction) and isinstance(self._var, Fraction)
        if exact and k % 2 == 0:
            return c / self._var ** (k // 2)
        if exact and self._sd_exact is not None:
            return c / self._var ** ((k - 1) // 2) / self._sd_exact
        return float(c) / self._sd_f**k

    def sample(self, rng, size):
        return (self.base.sample(rng, size) - self._mu_f) / self._sd_f

    def sample_parts(self, rng, size):
        vals, mask = self.base.sample_parts(rng, size)
        return (vals - self._mu_f) / self._sd_f, mask

    def support(self):
        lo, hi = self.base.support()
        return ((lo - self._mu_f) / self._sd_f, (hi - self._mu_f) / self._sd_f)


class Uniform(Distribution):
    def __init__(self, a=0, b=1):
        self.a, self.b = Fraction(a), Fraction(b)
        self.label = f"uniform({a},{b})"
        self._af, self._bf = float(a), float(b)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self._af) & (x <= self._bf)
        return np.where(inside, 1.0 / (self._bf - self._af), 0.0)

    def char_fn(self, t):
        t = np.asarray(t, dtype=float)
        out = np.ones_like(t, dtype=complex)
        nz = t != 0
        tz = t[nz]
        out[nz] = (np.exp(1j * tz * self._bf) - np.exp(1j * tz * self._af)) / (
            1j * tz * (self._bf - self._af)
        )
        return out

    def raw_moment(self, k):
        return (self.b ** (k + 1) - self.a ** (k + 1)) / ((k + 1) * (self.b - self.a))

    def sample(self, rng, size):
        return rng.uniform(self._af, self._bf, size)

    def support(self):
        return (self._af, self._bf)


class Normal(Distribution):
    def __init__(self, mu=0.0, sigma=1.0):
        self.mu, self.sigma = float(mu), float(sigma)
        self.label = f"normal({mu},{sigma})"
        self.is_standardized = mu == 0 and sigma == 1

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        z = (x - self.mu) / self.sigma
        return np.exp(-0.5 * z * z) / (self.sigma * math.sqrt(2 * math.pi))

    def char_fn(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(1j * self.mu * t - 0.5 * (self.sigma * t) ** 2)

    def raw_moment(self, k):
        # exact when the parameters are integer-valued
        mu = Fraction(int(self.mu)) if self.mu == int(self.mu) else self.mu
        sd = Fraction(int(self.sigma)) if self.sigma == int(self.sigma) else self.sigma
        acc = 0
        for j in range(0, k + 1, 2):
            acc += math.comb(k, j) * double_factorial(j - 1) * sd**j * mu ** (k - j)
        return acc

    def sample(self, rng, size):
        return rng.normal(self.mu, self.sigma, size)


class Exponential(Distribution):
    """Exp(rate); the standardized version is the centered exponential."""

    def __init__(self, rate=1):
        self.rate = Fraction(rate)
        self._rf = float(rate)
        self.label = f"exponential({rate})"

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, self._rf * np.exp(-self._rf * np.clip(x, 0, None)), 0.0)

    def char_fn(self, t):
        t = np.asarray(t, dtype=float)
        return 1.0 / (1.0 - 1j * t / self._rf)

    def raw_moment(self, k):
        return Fraction(math.factorial(k)) / self.rate**k

    def central_moment(self, k):
        # central moments of Exp are the derangement numbers, scaled
        return Fraction(subfactorial(k)) / self.rate**k

    def sample(self, rng, size):
        return rng.exponential(1.0 / self._rf, size)

    def support(self):
        return (0.0, 40.0 / self._rf)


class Laplace(Distribution):
    def __init__(self, mu=0, b=1):
        self.mu, self.b = Fraction(mu), Fraction(b)
        self._muf, self._bf = float(mu), float(b)
        self.label = f"laplace({mu},{b})"

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(-np.abs(x - self._muf) / self._bf) / (2 * self._bf)

    def char_fn(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(1j * self._muf * t) / (1.0 + (self._bf * t) ** 2)

    def raw_moment(self, k):
        acc = ZERO
        for j in range(0, k + 1, 2):
            acc += math.comb(k, j) * math.factorial(j) * self.b**j * self.mu ** (k - j)
        return acc

    def sample(self, rng, size):
        return rng.laplace(self._muf, self._bf, size)


class Gamma(Distribution):
    def __init__(self, shape=4, scale=1):
        self.shape, self.scale = Fraction(shape), Fraction(scale)
        self._kf, self._sf = float(shape), float(scale)
        self.label = f"gamma({shape},{scale})"

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        pos = x > 0
        out = np.zeros_like(x)
        xp = x[pos]
        out[pos] = (
            xp ** (self._kf - 1)
            * np.exp(-xp / self._sf)
            / (math.gamma(self._kf) * self._sf**self._kf)
        )
        return out

    def char_fn(self, t):
        t = np.asarray(t, dtype=float)
        return np.power(1.0 - 1j * self._sf * t, -self._kf)

    def raw_moment(self, k):
        acc = Fraction(1)
        for j in range(k):
            acc *= self.shape + j
        return acc * self.scale**k

    def sample(self, rng, size):
        return rng.gamma(self._kf, self._sf, size)

    def support(self):
        return (0.0, self._sf * (self._kf + 40.0 * math.sqrt(self._kf)))


class GaussianMixture(Distribution):
    """Two-component (or more) Gaussian mixture; skewed by default."""

    def __init__(self, weights=(Fraction(3, 10), Fraction(7, 10)),
                 means=(-1, Fraction(3, 7)), sigmas=(Fraction(1, 2), 1)):
        total = sum(Fraction(w) for w in weights)
        self.weights = tuple(Fraction(w) / total for w in weights)
        self.means = tuple(Fraction(m) for m in means)
        self.sigmas = tuple(Fraction(s) for s in sigmas)
        self._wf = np.array([float(w) for w in self.weights])
        self._mf = np.array([float(m) for m in self.means])
        self._sf = np.array([float(s) for s in self.sigmas])
        self.label = "gauss_mixture"

    def pdf(self, x):
        x = np.asarray(x, dtype=float)[..., None]
        z = (x - self._mf) / self._sf
        comp = np.exp(-0.5 * z * z) / (self._sf * math.sqrt(2 * math.pi))
        return comp @ self._wf

    def char_fn(self, t):
        t = np.asarray(t, dtype=float)[..., None]
        comp = np.exp(1j * self._mf * t - 0.5 * (self._sf * t) ** 2)
        return comp @ self._wf.astype(complex)

    def raw_moment(self, k):
        acc = ZERO
        for w, m, s in zip(self.weights, self.means, self.sigmas):
            comp = ZERO
            for j in range(0, k + 1, 2):
                comp += (
                    math.comb(k, j)
                    * double_factorial(j - 1)
                    * s**j
                    * m ** (k - j)
                )
            acc += w * comp
        return acc

    def sample(self, rng, size):
        idx = rng.choice(len(self._wf), size=size, p=self._wf)
        return rng.normal(self._mf[idx], self._sf[idx])


class AtomMixture(Distribution):
    """``p * N(0,1) + (1-p) * delta_c``: a law with an a.c. component only.

    Exercises the "absolutely continuous component" hypothesis: the
    singular part is a point mass that the splitting construction must
    route entirely into the residual law.
    """

    def __init__(self, p=Fraction(7, 10), atom=2):
        self.p = Fraction(p)
        self.atom = Fraction(atom)
        self._pf, self._af = float(self.p), float(self.atom)
        self.singular_mass = 1.0 - self._pf
        self.atoms = ((self._af, 1.0 - self._pf),)
        self.label = f"atom_mixture({p},{atom})"

    def pdf(self, x):
        # density of the a.c. component only
        x = np.asarray(x, dtype=float)
        return self._pf * np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)

    def char_fn(self, t):
        t = np.asarray(t, dtype=float)
        return self._pf * np.exp(-0.5 * t * t) + (1 - self._pf) * np.exp(
            1j * self._af * t
        )

    def raw_moment(self, k):
        gauss = Fraction(double_factorial(k - 1)) if k % 2 == 0 else ZERO
        return self.p * gauss + (1 - self.p) * self.atom**k

    def sample(self, rng, size):
        vals, _ = self.sample_parts(rng, size)
        return vals

    def sample_parts(self, rng, size):
        atomic = rng.random(size) >= self._pf
        vals = rng.normal(0.0, 1.0, size)
        vals[atomic] = self._af
        return vals, atomic


class UserDensity(Distribution):
    """User-supplied 1-D density; moments by adaptive quadrature (1e-12)."""

    def __init__(self, pdf, support, label="user", max_order=10):
        self._pdf = pdf
        self._support = (float(support[0]), float(support[1]))
        self.label = label
        self.max_order = max_order
        self._moment_cache: dict[int, float] = {}

    def pdf(self, x):
        return np.asarray(self._pdf(np.asarray(x, dtype=float)), dtype=float)

    def raw_moment(self, k):
        if k not in self._moment_cache:
            lo, hi = self._support
            val, _ = integrate.quad(
                lambda x: x**k * float(self._pdf(x)), lo, hi,
                epsabs=1e-12, epsrel=1e-12, limit=400,
            )
            self._moment_cache[k] = val
        return self._moment_cache[k]

    def char_fn(self, t):
        lo, hi = self._support
        xs = np.linspace(lo, hi, 8193)
        fx = self.pdf(xs)
        t = np.atleast_1d(np.asarray(t, dtype=float))
        ker = np.exp(1j * np.outer(t, xs))
        out = np.trapezoid(ker * fx, xs, axis=-1)
        return out

    def sample(self, rng, size):
        # rejection from a uniform envelope over the support
        lo, hi = self._support
        xs = np.linspace(lo, hi, 4097)
        cap = float(np.max(self.pdf(xs))) * 1.05
        out = np.empty(size)
        got = 0
        while got < size:
            m = 2 * (size - got) + 16
            prop = rng.uniform(lo, hi, m)
            keep = rng.uniform(0, cap, m) < self.pdf(prop)
            acc = prop[keep][: size - got]
            out[got : got + len(acc)] = acc
            got += len(acc)
        return out

    def support(self):
        return self._support


class ProductDistribution(Distribution):
    """Independent product of 1-D laws; the multi-D registry entries."""

    def __init__(self, children):
        self.children = list(children)
        self.dim = len(self.children)
        if self.dim < 1 or self.dim > 3:
            raise ValueError("product laws supported for 1 <= N <= 3")
        self.label = "*".join(c.label for c in self.children)
        self.max_order = min(c.max_order for c in self.children)
        self.is_standardized = all(c.is_standardized for c in self.children)
        if any(c.atoms for c in self.children):
            raise ValueError("product laws require absolutely continuous factors")

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        out = 1.0
        for i, c in enumerate(self.children):
            out = out * c.pdf(x[..., i])
        return out

    def char_fn(self, t):
        t = np.asarray(t, dtype=float)
        out = 1.0 + 0j
        for i, c in enumerate(self.children):
            out = out * c.char_fn(t[..., i])
        return out

    def moment(self, alpha: MultiIndex):
        if len(alpha) > self.max_order:
            raise OrderExceeded(f"|alpha|={len(alpha)} > max_order={self.max_order}")
        counts = _coordinate_counts(alpha, self.dim)
        out = Fraction(1)
        for c, k in zip(self.children, counts):
            out = out * c.raw_moment(k)
        return out

    def raw_moment(self, k):
        raise NotImplementedError("use moment(alpha) on product laws")

    def sample(self, rng, size):
        return np.stack([c.sample(rng, size) for c in self.children], axis=-1)


def delta(dist: Distribution, alpha: MultiIndex):
    """Moment difference ``E(F^alpha) - E(G^alpha)`` for a standardized law.

    Exactly zero for ``|alpha| <= 2`` (that is what standardization means);
    raises :class:`OrderExceeded` past the law's declared order.
    """
    if len(alpha) <= 2:
        return ZERO
    return dist.moment(alpha) - gaussian_moment(alpha, dist.dim)


class MomentTable:
    """Precomputed ``delta`` values (and 1-D ``ell`` ratios) up to an order.

    The table is what the operator algebra consumes; it can be built from a
    standardized distribution or directly from a dictionary of rational
    values (the fixture mode used by the exact identity tests).  Multiindex
    keys are canonicalized by sorting, which is sound because moments are
    symmetric under permutation of the index.
    """

    def __init__(self, dim, max_order, deltas, ell=None):
        self.dim = dim
        self.max_order = max_order
        self._deltas = {tuple(sorted(k)): v for k, v in deltas.items() if v != 0}
        self._ell = dict(ell or {})
        self._cache: dict = {}
        self._lock = threading.RLock()

    @classmethod
    def from_distribution(cls, dist: Distribution, max_order: int) -> "MomentTable":
        if not dist.is_standardized:
            raise ValueError("moment tables require a standardized distribution")
        if max_order > dist.max_order:
            raise OrderExceeded(
                f"requested order {max_order} > declared {dist.max_order}"
            )
        deltas = {}
        for t in range(3, max_order + 1):
            for alpha in combinations_with_replacement(range(1, dist.dim + 1), t):
                deltas[alpha] = delta(dist, alpha)
        ell = {}
        if dist.dim == 1:
            for t in range(3, max_order + 1):
                ell[t] = dist.moment(tuple([1] * t))
        return cls(dist.dim, max_order, deltas, ell)

    @classmethod
    def from_deltas(cls, dim, max_order, deltas) -> "MomentTable":
        """Fixture constructor for exact rational moment differences."""
        for k in deltas:
            if len(k) <= 2:
                raise ValueError("delta values for |alpha| <= 2 must be zero")
        return cls(dim, max_order, deltas)

    def delta(self, alpha: MultiIndex):
        if len(alpha) <= 2:
            return ZERO
        if len(alpha) > self.max_order:
            raise OrderExceeded(f"|alpha|={len(alpha)} > max_order={self.max_order}")
        return self._deltas.get(tuple(sorted(alpha)), ZERO)

    def ell(self, t: int):
        """Normalized moment ratio ``ell_t`` (1-D tables only)."""
        if self.dim != 1:
            raise ValueError("ell ratios are 1-D only")
        if t not in self._ell:
            raise OrderExceeded(f"ell_{t} beyond table order {self.max_order}")
        return self._ell[t]

    def sup_delta(self, r: int) -> float:
        """``sup_{|alpha| <= r} |delta_alpha|``."""
        vals = [abs(float(v)) for k, v in self._deltas.items() if len(k) <= r]
        return max(vals, default=0.0)

    def cache_get_or_build(self, key, builder):
        with self._lock:
            if key not in self._cache:
                self._cache[key] = builder()
            return self._cache[key]


_REGISTRY = {
    "uniform": lambda **kw: Uniform(**kw).standardize(),
    "exponential": lambda **kw: Exponential(**kw).standardize(),
    "laplace": lambda **kw: Laplace(**kw).standardize(),
    "gamma": lambda **kw: Gamma(**kw).standardize(),
    "gauss_mixture": lambda **kw: GaussianMixture(**kw).standardize(),
    "atom_mixture": lambda **kw: AtomMixture(**kw).standardize(),
    "normal": lambda **kw: Normal(**kw),
}


def _parse_one(spec: str) -> Distribution:
    spec = spec.strip()
    m = re.fullmatch(r"([a-z_0-9]+)(?:\((.*)\))?", spec)
    if not m:
        raise ValueError(f"cannot parse distribution spec {spec!r}")
    name, argstr = m.group(1), m.group(2)
    if name not in _REGISTRY:
        raise ValueError(f"unknown distribution {name!r}; known: {sorted(_REGISTRY)}")
    kwargs = {}
    if argstr:
        for part in argstr.split(","):
            key, _, val = part.partition("=")
            if not _:
                raise ValueError(f"expected key=value in {part!r}")
            kwargs[key.strip()] = Fraction(val.strip())
    return _REGISTRY[name](**kwargs)


def make_distribution(spec: str) -> Distribution:
    """Build a standardized distribution from a name like ``exponential``.

    Optional parameters use ``name(key=value,...)`` with rational values;
    ``*`` joins factors into an independent product (dimension <= 3), e.g.
    ``exponential*uniform``.
    """
    parts = spec.split("*")
    if len(parts) == 1:
        return _parse_one(parts[0])
    return ProductDistribution([_parse_one(p) for p in parts])


def shipped_labels(ac_only: bool = False):
    """Names of the registry laws (optionally only absolutely continuous)."""
    names = ["uniform", "exponential", "laplace", "gamma", "gauss_mixture"]
    if not ac_only:
        names.append("atom_mixture")
    return names


def fixture_deltas(dim: int, max_order: int = 9) -> dict:
    """Deterministic rational moment-difference fixture for exact tests.

    Arbitrary nonzero Fractions keyed by sorted multiindex; permutation
    symmetry and the vanishing below order 3 hold by construction.
    """
    deltas = {}
    for t in range(3, max_order + 1):
        for alpha in combinations_with_replacement(range(1, dim + 1), t):
            num = (-1) ** t * (1 + sum(alpha) + t)
            den = 2 + (t + sum(alpha)) % 5
            deltas[alpha] = Fraction(num, den)
    return deltas


def fixture_table(dim: int, max_order: int = 9) -> "MomentTable":
    """Rational fixture table driving the exact operator-identity tests."""
    return MomentTable.from_deltas(dim, max_order, fixture_deltas(dim, max_order))
