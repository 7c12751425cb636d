"""Constructive splitting of a law lower-bounded by Lebesgue measure.

Given a law whose density is bounded below by ``eps0`` on a ball
``B_{r0}(v0)``, the law decomposes as

    F  =  chi V + (1 - chi) W,

with ``chi ~ Bernoulli(m0)``, ``V`` distributed like the normalized smooth
bump ``(eps0/m0) psi_{r0/2}(|v - v0|)`` and ``W`` the residual law
``(mu_F - eps0 psi_{r0/2}) / (1 - m0)``; ``m0 = eps0 * int psi``.  The bump
uses the plateau localizer

    psi_a(x) = 1                                   for |x| <= a,
             = exp(1 - a^2 / (a^2 - (|x|-a)^2))    for a < |x| < 2a,
             = 0                                   for |x| >= 2a,

which is smooth with compact support, so its log-derivative (needed by the
Ornstein-Uhlenbeck images downstream) has an analytic closed form.

Ball-selection policy (the existence statement leaves it free): ``v0`` is
the density argmax on a 4096-point scan (middle of the argmax plateau of a
locally min-filtered density, so flat tops center correctly), ``r0`` the
largest radius keeping the ball infimum above half the peak, and
``eps0 = 0.9 x`` that infimum, halved until ``m0 <= 1/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .moments import Distribution

__all__ = [
    "NoLowerBoundFound",
    "RejectionStall",
    "psi_loc",
    "log_psi_radial_derivative",
    "psi_integral",
    "find_lower_bound",
    "split",
    "sample_split",
    "SplitRep",
]


class NoLowerBoundFound(Exception):
    """No ball with a positive density infimum was found on the scan grid."""


class RejectionStall(Exception):
    """Rejection sampling acceptance collapsed; the representation is broken."""


def psi_loc(a: float, x):
    """Plateau localizer ``psi_a`` evaluated at (arrays of) real ``x``."""
    if a <= 0:
        raise ValueError("a must be > 0")
    u = np.abs(np.asarray(x, dtype=float))
    out = np.zeros_like(u)
    out[u <= a] = 1.0
    band = (u > a) & (u < 2 * a)
    ub = u[band] - a
    out[band] = np.exp(1.0 - a * a / (a * a - ub * ub))
    return out if out.shape else float(out)


def log_psi_radial_derivative(a: float, u):
    """``(d/du) ln psi_a(u)`` for radii ``u``; zero on the plateau.

    On the decay band ``a < u < 2a`` the closed form is
    ``-2 a^2 (u - a) / (a^2 - (u - a)^2)^2``; it blows up toward the
    support edge, which is why it is evaluated analytically rather than by
    finite differences.  Outside the support the localizer vanishes and the
    value is never used; zero is returned for safety.
    """
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    band = (u > a) & (u < 2 * a)
    ub = u[band] - a
    g = a * a - ub * ub
    out[band] = -2.0 * a * a * ub / (g * g)
    return out if out.shape else float(out)


@lru_cache(maxsize=None)
def _psi_unit_integral(dim: int) -> float:
    if dim == 1:
        val, _ = integrate.quad(lambda x: psi_loc(1.0, x), -2, 2,
                                epsabs=1e-13, epsrel=1e-13, limit=200)
        return val
    if dim == 2:
        val, _ = integrate.quad(lambda r: psi_loc(1.0, r) * r, 0, 2,
                                epsabs=1e-13, epsrel=1e-13, limit=200)
        return 2 * math.pi * val
    raise NotImplementedError("splitting supports N <= 2")


def psi_integral(a: float, dim: int = 1) -> float:
    """``int_{R^N} psi_a(|v|) dv``, exact scaling of the unit integral."""
    return a**dim * _psi_unit_integral(dim)


def _scan_axis(dist: Distribution, points: int):
    lo, hi = dist.support()
    return np.linspace(lo, hi, points)


def _ball_infimum(dist: Distribution, v0, r: float, probes: int = 513) -> float:
    if dist.dim == 1:
        xs = np.linspace(v0 - r, v0 + r, probes)
        return float(np.min(dist.pdf(xs)))
    # 2-D: polar probe of the disc
    rr = np.linspace(0, r, 33)
    th = np.linspace(0, 2 * math.pi, 65)
    pts = np.stack(
        [v0[0] + np.outer(rr, np.cos(th)), v0[1] + np.outer(rr, np.sin(th))],
        axis=-1,
    ).reshape(-1, 2)
    return float(np.min(dist.pdf(pts)))


def find_lower_bound(dist: Distribution, scan_points: int = 4096):
    """Locate ``(v0, r0, eps0)`` with ``inf_{B_{r0}(v0)} density >= eps0 > 0``.

    Raises :class:`NoLowerBoundFound` when the scanned density never
    exceeds ``1e-12`` (the law violates the lower-bound hypothesis, e.g. a
    purely atomic input).
    """
    if dist.dim == 1:
        xs = _scan_axis(dist, scan_points)
        dens = dist.pdf(xs)
        if float(np.max(dens)) < 1e-12:
            raise NoLowerBoundFound(f"density of {dist.label} vanishes on the scan grid")
        # min-filter over +-2 cells so a one-point spike cannot win,
        # then center v0 on the argmax plateau (flat densities)
        w = 2
        padded = np.pad(dens, w, mode="constant")
        filt = np.min(
            np.stack([padded[j : j + len(dens)] for j in range(2 * w + 1)]), axis=0
        )
        peak = float(np.max(filt))
        if peak < 1e-12:
            raise NoLowerBoundFound(f"no stable ball for {dist.label}")
        on_peak = np.flatnonzero(filt >= peak * (1 - 1e-9))
        i0 = on_peak[0]
        run_end = i0
        while run_end + 1 in set(on_peak):
            run_end += 1
        v0 = float(xs[(i0 + run_end) // 2])
        peak_val = float(dist.pdf(np.array([v0]))[0])
    else:
        g = int(math.sqrt(scan_points))
        lo, hi = dist.support()
        ax = np.linspace(lo, hi, g)
        pts = np.stack(np.meshgrid(ax, ax, indexing="ij"), axis=-1)
        dens = dist.pdf(pts)
        if float(np.max(dens)) < 1e-12:
            raise NoLowerBoundFound(f"density of {dist.label} vanishes on the scan grid")
        # 3x3 min filter, then the plateau point nearest the plateau centroid
        # (flat tops center; a multi-modal plateau still yields a true argmax)
        padded = np.pad(dens, 1, mode="constant")
        filt = np.min(
            np.stack([
                padded[1 + di : 1 + di + g, 1 + dj : 1 + dj + g]
                for di in (-1, 0, 1)
                for dj in (-1, 0, 1)
            ]),
            axis=0,
        )
        peak = float(np.max(filt))
        if peak < 1e-12:
            raise NoLowerBoundFound(f"no stable ball for {dist.label}")
        on_peak = np.argwhere(filt >= peak * (1 - 1e-9))
        centroid = on_peak.mean(axis=0)
        best = on_peak[np.argmin(np.sum((on_peak - centroid) ** 2, axis=1))]
        v0 = np.array([ax[best[0]], ax[best[1]]])
        peak_val = float(dist.pdf(v0[None, :])[0])

    # largest radius whose ball infimum keeps half the peak
    target = 0.5 * peak_val
    lo_r, hi_r = 0.0, 1e-3
    span = _scan_axis(dist, 4)[-1] - _scan_axis(dist, 4)[0]
    while hi_r < span and _ball_infimum(dist, v0, hi_r) >= target:
        lo_r, hi_r = hi_r, 2 * hi_r
    for _ in range(60):
        mid = 0.5 * (lo_r + hi_r)
        if _ball_infimum(dist, v0, mid) >= target:
            lo_r = mid
        else:
            hi_r = mid
    r0 = lo_r
    if r0 <= 0:
        raise NoLowerBoundFound(f"no ball with positive infimum for {dist.label}")
    inf_val = _ball_infimum(dist, v0, r0, probes=2049)
    eps0 = 0.9 * inf_val
    # keep the carved mass at or below one half
    while eps0 * psi_integral(r0 / 2, dist.dim) > 0.5:
        eps0 *= 0.5
    if eps0 <= 0:
        raise NoLowerBoundFound(f"degenerate infimum for {dist.label}")
    return v0, r0, eps0


@dataclass
class SplitRep:
    """Realized splitting ``F = chi V + (1 - chi) W`` of a base law."""

    base: Distribution
    v0: object
    r0: float
    eps0: float
    m0: float

    @property
    def dim(self) -> int:
        return self.base.dim

    # -- densities ---------------------------------------------------------
    def _radius(self, x):
        if self.dim == 1:
            return np.abs(np.asarray(x, dtype=float) - self.v0)
        d = np.asarray(x, dtype=float) - np.asarray(self.v0)
        return np.sqrt(np.sum(d * d, axis=-1))

    def psi_bump(self, x):
        """``psi_{r0/2}(|x - v0|)``, the un-normalized bump."""
        return psi_loc(self.r0 / 2, self._radius(x))

    def v_pdf(self, x):
        return (self.eps0 / self.m0) * self.psi_bump(x)

    def w_pdf(self, x):
        """Density of the a.c. part of the residual law W."""
        return (self.base.pdf(x) - self.eps0 * self.psi_bump(x)) / (1.0 - self.m0)

    def log_psi_gradient(self, x):
        """``grad ln psi_{r0/2}(|x - v0|)``; exactly zero on the plateau."""
        a = self.r0 / 2
        if self.dim == 1:
            d = np.asarray(x, dtype=float) - self.v0
            return log_psi_radial_derivative(a, np.abs(d)) * np.sign(d)
        d = np.asarray(x, dtype=float) - np.asarray(self.v0)
        u = np.sqrt(np.sum(d * d, axis=-1))
        rad = log_psi_radial_derivative(a, u)
        with np.errstate(invalid="ignore", divide="ignore"):
            unit = np.where(u[..., None] > 0, d / np.maximum(u, 1e-300)[..., None], 0.0)
        return rad[..., None] * unit

    # -- samplers ------------------------------------------------------------
    def sample_v(self, rng, size: int) -> np.ndarray:
        """Draws from the bump law by rejection from a uniform proposal."""
        out = np.empty(size if self.dim == 1 else (size, self.dim))
        got, proposed, accepted = 0, 0, 0
        while got < size:
            m = max(2 * (size - got), 64)
            if self.dim == 1:
                prop = rng.uniform(self.v0 - self.r0, self.v0 + self.r0, m)
            else:
                prop = rng.uniform(-self.r0, self.r0, (m, self.dim)) + np.asarray(self.v0)
            keep = rng.random(m) < self.psi_bump(prop)
            acc = prop[keep][: size - got]
            out[got : got + len(acc)] = acc
            got += len(acc)
            proposed += m
            accepted += int(keep.sum())
            if proposed > 1_000_000 and accepted / proposed < 1e-4:
                raise RejectionStall("bump sampler acceptance below 1e-4")
        return out

    def sample_w(self, rng, size: int) -> np.ndarray:
        """Draws from W by thinning draws of the base law.

        A base draw at ``v`` is kept with probability
        ``1 - eps0 psi(v) / pdf(v)``; atomic draws are always kept (the
        bump is carved from the absolutely continuous component only).
        """
        out = np.empty(size if self.dim == 1 else (size, self.dim))
        got, proposed, accepted = 0, 0, 0
        while got < size:
            m = max(2 * (size - got), 64)
            prop, atomic = self.base.sample_parts(rng, m)
            dens = self.base.pdf(prop)
            bump = self.eps0 * self.psi_bump(prop)
            with np.errstate(divide="ignore", invalid="ignore"):
                p_acc = 1.0 - np.where(dens > 0, bump / np.maximum(dens, 1e-300), 0.0)
            p_acc = np.where(atomic, 1.0, np.clip(p_acc, 0.0, 1.0))
            keep = rng.random(m) < p_acc
            acc = prop[keep][: size - got]
            out[got : got + len(acc)] = acc
            got += len(acc)
            proposed += m
            accepted += int(keep.sum())
            if proposed > 1_000_000 and accepted / proposed < 1e-4:
                raise RejectionStall("residual sampler acceptance below 1e-4")
        return out

    def sample(self, rng, size: int) -> np.ndarray:
        """Draws of ``chi V + (1 - chi) W``; distributed as the base law."""
        chi = rng.random(size) < self.m0
        out = np.empty(size if self.dim == 1 else (size, self.dim))
        nv = int(chi.sum())
        if nv:
            out[chi] = self.sample_v(rng, nv)
        if size - nv:
            out[~chi] = self.sample_w(rng, size - nv)
        return out

    def reconstruction_error(self, xs) -> float:
        """Sup over the grid of ``|m0 p_V + (1-m0) p_W - p_F|`` (a.c. parts)."""
        lhs = self.m0 * self.v_pdf(xs) + (1.0 - self.m0) * self.w_pdf(xs)
        return float(np.max(np.abs(lhs - self.base.pdf(xs))))


def split(dist: Distribution) -> SplitRep:
    """Build the splitting representation of a (standardized or raw) law."""
    v0, r0, eps0 = find_lower_bound(dist)
    m0 = eps0 * psi_integral(r0 / 2, dist.dim)
    if not 0.0 < m0 < 1.0:
        raise NoLowerBoundFound(f"carved mass m0={m0} out of range for {dist.label}")
    return SplitRep(dist, v0, r0, eps0, m0)


def sample_split(rep: SplitRep, rng, size: int = 1):
    """Functional wrapper over :meth:`SplitRep.sample`."""
    return rep.sample(rng, size)
