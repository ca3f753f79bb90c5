"""Laplace transforms of compactly supported densities, the Gaussian
convolution identity, a growth diagnostic for cosh-weighted integrability,
the closed-form smoothed symbol for exp(l|x|^2) P(xi), and the regularized
oscillatory-integral kernel pairing.

Densities are represented by Gauss-Legendre nodes and weights on their
support box; every integrand below is analytic (or endpoint-flat) there, so
quadrature error sits far below the identity tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import OverflowDomainError, UwqError
from .expansion import PolySymbol, heat_quarter
from .grid import FunctionGrid

__all__ = [
    "CompactDensity",
    "LaplacePoint",
    "laplace",
    "conv_gauss_via_laplace",
    "conv_gauss_direct",
    "bstar_diagnostic",
    "smoothed_gaussian_poly",
    "smooth_cutoff",
    "SeparableSymbol",
    "oscillatory_kernel",
    "OscillatoryReport",
]

_EXP_LIMIT = 700.0  # ln(double max) with margin


def _gl_nodes(lo: np.ndarray, hi: np.ndarray, order: int):
    """Tensor-product Gauss-Legendre nodes/weights on the box [lo, hi]^d."""
    xs, ws = np.polynomial.legendre.leggauss(order)
    nodes_1d = []
    weights_1d = []
    for a, b in zip(lo, hi):
        nodes_1d.append(0.5 * (b - a) * xs + 0.5 * (a + b))
        weights_1d.append(0.5 * (b - a) * ws)
    mesh = np.meshgrid(*nodes_1d, indexing="ij")
    wmesh = np.meshgrid(*weights_1d, indexing="ij")
    nodes = np.stack([m.ravel() for m in mesh], axis=-1)
    weights = np.ones(nodes.shape[0])
    for w in wmesh:
        weights *= w.ravel()
    return nodes, weights


@dataclass(frozen=True)
class CompactDensity:
    """An integrable density supported on the box [lo, hi]^d, held as values
    on positive-weight quadrature nodes (zero outside the box by fiat)."""

    lo: np.ndarray
    hi: np.ndarray
    nodes: np.ndarray    # (m, d)
    weights: np.ndarray  # (m,)
    values: np.ndarray   # (m,) complex
    tag: Optional[str] = None

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if np.any(hi <= lo):
            raise UwqError("support box must have positive volume")
        if np.any(np.asarray(self.weights) <= 0):
            raise UwqError("quadrature weights must be positive")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))

    @property
    def d(self) -> int:
        return self.lo.size

    @classmethod
    def from_callable(cls, f: Callable, lo, hi, order: int = 200, tag=None) -> "CompactDensity":
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        nodes, weights = _gl_nodes(lo, hi, order)
        vals = np.asarray(f(nodes), dtype=complex)
        return cls(lo=lo, hi=hi, nodes=nodes, weights=weights, values=vals, tag=tag)

    @classmethod
    def indicator(cls, lo, hi, order: int = 200) -> "CompactDensity":
        return cls.from_callable(lambda y: np.ones(y.shape[0]), lo, hi, order, tag="Indicator")

    @classmethod
    def gaussian_bump(cls, lo, hi, order: int = 200) -> "CompactDensity":
        """exp(1 - 1/(1 - t^2)) in centred box coordinates; all derivatives
        vanish at the boundary."""
        lo_a = np.atleast_1d(np.asarray(lo, dtype=float))
        hi_a = np.atleast_1d(np.asarray(hi, dtype=float))
        mid, half = 0.5 * (lo_a + hi_a), 0.5 * (hi_a - lo_a)

        def f(y):
            t2 = np.sum(((y - mid) / half) ** 2, axis=-1)
            out = np.zeros(y.shape[0])
            ok = t2 < 1.0
            out[ok] = np.exp(1.0 - 1.0 / (1.0 - t2[ok]))
            return out

        return cls.from_callable(f, lo, hi, order, tag="GaussianBump")

    @classmethod
    def poly_times_bump(cls, coeffs: Sequence[float], lo, hi, order: int = 200) -> "CompactDensity":
        """(sum_k c_k y^k) times the bump, dimension 1."""
        bump = cls.gaussian_bump(lo, hi, order)
        if bump.d != 1:
            raise UwqError("poly_times_bump is one-dimensional")
        poly = np.polynomial.polynomial.polyval(bump.nodes[:, 0], np.asarray(coeffs))
        return cls(lo=bump.lo, hi=bump.hi, nodes=bump.nodes, weights=bump.weights,
                   values=bump.values * poly, tag="PolyTimesBump")

    def integral(self) -> complex:
        return complex(np.sum(self.weights * self.values))


@dataclass(frozen=True)
class LaplacePoint:
    """A point zeta = xi + i eta in C^d."""

    zeta: np.ndarray

    def __post_init__(self):
        z = np.atleast_1d(np.asarray(self.zeta, dtype=complex))
        if not np.all(np.isfinite(z)):
            raise UwqError("Laplace point must be finite")
        object.__setattr__(self, "zeta", z)


def _as_zeta(zeta) -> np.ndarray:
    if isinstance(zeta, LaplacePoint):
        return zeta.zeta
    return np.atleast_1d(np.asarray(zeta, dtype=complex))


def laplace(S: CompactDensity, zeta) -> complex:
    """L(S)(zeta) = integral e^{-zeta . y} S(y) dy over the support box;
    entire in zeta because the support is compact.  Overflowing exponents
    raise instead of clamping."""
    z = _as_zeta(zeta)
    if z.size != S.d:
        raise UwqError("zeta dimension mismatch")
    expo = -S.nodes @ z
    if np.max(expo.real) > _EXP_LIMIT:
        raise OverflowDomainError("e^{-zeta.y} overflows on the support box")
    return complex(np.sum(S.weights * S.values * np.exp(expo)))


def _check_s_x(S: CompactDensity, s: float, x) -> np.ndarray:
    if s == 0.0:
        raise UwqError("s must be nonzero")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.size != S.d:
        raise UwqError("x dimension mismatch")
    return x


def conv_gauss_via_laplace(S: CompactDensity, s: float, x) -> complex:
    """(S * e^{s|.|^2})(x) through the Laplace route:
    e^{s|x|^2} L(e^{s|.|^2} S)(2 s x)."""
    x = _check_s_x(S, s, x)
    xsq = float(x @ x)
    gauss_weight = s * np.sum(S.nodes**2, axis=1)
    expo_bound = s * xsq + np.max(gauss_weight + np.abs(2.0 * s * (S.nodes @ x)))
    if expo_bound > _EXP_LIMIT or s * xsq > _EXP_LIMIT:
        raise OverflowDomainError("Gaussian factor overflows at this (s, x)")
    weighted = CompactDensity(
        lo=S.lo, hi=S.hi, nodes=S.nodes, weights=S.weights,
        values=S.values * np.exp(gauss_weight), tag=S.tag,
    )
    return complex(math.exp(s * xsq) * laplace(weighted, (2.0 * s * x).astype(complex)))


def conv_gauss_direct(S: CompactDensity, s: float, x) -> complex:
    """Brute-force quadrature of integral S(y) e^{s|x-y|^2} dy, the
    independent oracle for the Laplace route."""
    x = _check_s_x(S, s, x)
    expo = s * np.sum((x[None, :] - S.nodes) ** 2, axis=1)
    if np.max(expo) > _EXP_LIMIT:
        raise OverflowDomainError("Gaussian factor overflows at this (s, x)")
    return complex(np.sum(S.weights * S.values * np.exp(expo)))


def bstar_diagnostic(envelope, s: float, k_list: Sequence[float], box: float,
                     segments: int = 15, order: int = 40) -> dict:
    """For each k, check integral cosh(k r) e^{s r^2} g(r) dr < infinity by
    tail-ratio extrapolation on [0, box], where g >= |S| is an analytic
    envelope (or a CompactDensity, whose tail vanishes).

    A sufficient-condition diagnostic, not a membership proof: pass means
    the per-segment increments decay at the sampled tail.
    """
    if envelope is None:
        raise UwqError("an envelope g(r) >= |S(r)| is required")
    if isinstance(envelope, CompactDensity):
        sup = float(np.max(np.abs(envelope.values)))
        hi = float(np.max(np.abs(np.concatenate([envelope.lo, envelope.hi]))))

        def g(r):
            return np.where(r <= hi, sup, 0.0)
    else:
        g = envelope
    edges = np.linspace(0.0, box, segments + 1)
    xs, ws = np.polynomial.legendre.leggauss(order)
    report = {}
    for k in k_list:
        incs = []
        for a, b in zip(edges[:-1], edges[1:]):
            r = 0.5 * (b - a) * xs + 0.5 * (a + b)
            w = 0.5 * (b - a) * ws
            with np.errstate(over="ignore", invalid="ignore"):
                vals = np.cosh(np.minimum(k * r, _EXP_LIMIT)) * np.exp(np.minimum(s * r**2, _EXP_LIMIT)) * g(r)
            vals = np.nan_to_num(vals, nan=1e300, posinf=1e300)
            incs.append(float(np.sum(w * vals)))
        tail = incs[-3:]
        total = sum(abs(v) for v in incs)
        vanished = all(abs(v) <= 1e-13 * max(1.0, total) for v in tail)
        decaying = tail[0] > tail[1] > tail[2]
        report[float(k)] = bool(vanished or decaying)
    return report


def smoothed_gaussian_poly(l: float, P: PolySymbol, x, xi) -> complex:
    """Closed-form Gaussian smoothing of the symbol exp(l|x|^2) P(xi):

        (1-l)^{-d/2} exp(l|x|^2/(1-l)) * (heat-flow of P in xi)(xi),

    the eta-integral done exactly through Gaussian moments."""
    if l >= 1.0:
        raise UwqError("need l < 1 for the Gaussian smoothing to exist")
    if P.x_degree() > 0:
        raise UwqError("P must be a polynomial in xi only")
    d = P.d
    x = np.atleast_1d(np.asarray(x, dtype=float))
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if x.size != d or xi.size != d:
        raise UwqError("coordinate dimension mismatch")
    smoothed = heat_quarter(P, +1)  # x-part of P is constant, so this is the xi heat flow
    val = smoothed.evaluate(tuple(np.zeros(1) for _ in range(d)), tuple(xi[i:i + 1] for i in range(d)))
    pref = (1.0 - l) ** (-d / 2.0) * math.exp(l * float(x @ x) / (1.0 - l))
    return complex(pref * np.asarray(val).ravel()[0])


def _bump_step(t: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    out = np.zeros_like(t)
    pos = t > 0
    one = t >= 1
    mid = pos & ~one
    e1 = np.exp(-1.0 / t[mid])
    e2 = np.exp(-1.0 / (1.0 - t[mid]))
    out[mid] = e1 / (e1 + e2)
    out[one] = 1.0
    return out


def smooth_cutoff(xi: np.ndarray, inner: float = 1.0, outer: float = 2.0) -> np.ndarray:
    """Smooth compactly supported plateau: 1 for |xi| <= inner, 0 for
    |xi| >= outer, C-infinity splice in between."""
    r = np.abs(np.asarray(xi, dtype=float))
    return _bump_step((outer - r) / (outer - inner))


@dataclass(frozen=True)
class SeparableSymbol:
    """b(x, xi) = fx(x) * fxi(xi), the separable fast path for the
    oscillatory pairing."""

    fx: Callable
    fxi: Callable


@dataclass(frozen=True)
class OscillatoryReport:
    deltas: tuple
    values: tuple
    diffs: tuple
    extrapolated: complex
    measured_order: Optional[float]


def _symbol_terms(b):
    """Represent the symbol as a list of separable (fx, fxi) pairs."""
    if isinstance(b, SeparableSymbol):
        return [(b.fx, b.fxi)]
    if isinstance(b, PolySymbol):
        if b.d != 1:
            raise UwqError("oscillatory pairing is one-dimensional")
        terms = []
        for (xe, ke), c in b.sorted_terms():
            px, pk = xe[0], ke[0]
            terms.append((lambda m, p=px: m**p,
                          lambda k, p=pk, cc=c: cc * k**p))
        return terms
    if callable(b):
        return None  # dense path
    raise UwqError("symbol must be a PolySymbol, SeparableSymbol, or callable")


def oscillatory_kernel(b, chi: FunctionGrid, delta_list: Sequence[float],
                       psi: Callable = None, xi_spacing: float = 0.05) -> OscillatoryReport:
    """Pairing of the regularized quantization kernel with a test function:

        (2 pi)^{-1} intg e^{i(x-y)xi} psi(delta xi) b((x+y)/2, xi)
                        chi(x, y) dx dy dxi

    for each delta of a strictly decreasing ladder, plus an extrapolation to
    delta -> 0 at the measured convergence order (Aitken step).  ``psi`` is
    a smooth compactly supported plateau equal to 1 near 0; its support
    bounds the xi quadrature exactly, which is what makes fixed boxes sound.

    chi is sampled on a two-dimensional grid (the (x, y) box); b may be a
    PolySymbol in (x, xi), a SeparableSymbol, or a callable b(m, xi).
    """
    if chi.axis.d != 2:
        raise UwqError("chi must be sampled on a 2-d (x, y) grid")
    deltas = [float(v) for v in delta_list]
    if any(b2 >= b1 for b1, b2 in zip(deltas, deltas[1:])) or not deltas:
        raise UwqError("delta ladder must be strictly decreasing")
    if psi is None:
        psi = smooth_cutoff
    pts = chi.axis.points()
    dxy = chi.axis.dx
    ximax = 2.0 / deltas[-1]
    K = int(math.ceil(ximax / xi_spacing))
    xi = np.arange(-K, K + 1) * xi_spacing
    mid = 0.5 * (pts[:, None] + pts[None, :])

    terms = _symbol_terms(b)
    T = np.zeros(xi.size, dtype=complex)
    E = np.exp(1j * np.outer(pts, xi))  # (n, K)
    if terms is not None:
        for fx, fxi in terms:
            Wt = chi.values * fx(mid)
            P = Wt @ np.conj(E)           # (n, K)
            T += fxi(xi) * np.einsum("nk,nk->k", E, P)
    else:
        # dense path: evaluate b on the midpoint mesh per frequency
        for k in range(xi.size):
            Wt = chi.values * b(mid, xi[k])
            T[k] = np.einsum("n,m,nm->", E[:, k], np.conj(E[:, k]), Wt)
    T *= dxy * dxy

    if not np.all(np.isfinite(T)):
        raise OverflowDomainError("oscillatory integrand overflowed")

    values = []
    for dl in deltas:
        w = psi(dl * xi)
        values.append(complex(xi_spacing / (2.0 * math.pi) * np.sum(w * T)))
    diffs = [abs(v2 - v1) for v1, v2 in zip(values, values[1:])]
    order = None
    extrap = values[-1]
    if len(diffs) >= 2 and diffs[-2] > 0 and diffs[-1] > 0:
        ratio = deltas[-2] / deltas[-1]
        order = math.log(diffs[-2] / diffs[-1]) / math.log(ratio)
        denom = diffs[-2] - diffs[-1]
        if abs(denom) > 1e-300:
            step = (values[-1] - values[-2]) * diffs[-1] / denom
            extrap = values[-1] + step
    return OscillatoryReport(
        deltas=tuple(deltas),
        values=tuple(values),
        diffs=tuple(diffs),
        extrapolated=extrap,
        measured_order=order,
    )
