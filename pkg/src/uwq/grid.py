"""Uniform periodic grids, the Fourier convention, Gaussian windows, and
sampled-function containers.

Convention: F(xi) = integral e^{-i x xi} f(x) dx, approximated by the
Riemann sum dx^d * sum_j e^{-i x_j xi_k} u(x_j) on the half-open box
[-L, L)^d.  With the dual spacing pi/L this is an exact (shifted) DFT, so
forward/inverse transforms round-trip to rounding error.  Frequencies are
kept in monotone physical order; fftshift bookkeeping stays internal.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import UwqError

__all__ = [
    "AxisGrid",
    "FunctionGrid",
    "PhaseFunctionGrid",
    "fourier",
    "inverse_fourier",
    "gaussian_window",
    "quadrature",
    "inner",
    "l2_norm",
    "phase_inner",
    "phase_l2_norm",
    "save_function",
    "load_function",
    "save_phase",
    "load_phase",
]


@dataclass(frozen=True)
class AxisGrid:
    """n equispaced points per axis on [-L, L), n a power of two, d <= 2."""

    n: int
    L: float
    d: int = 1

    def __post_init__(self):
        if self.n < 2 or (self.n & (self.n - 1)) != 0:
            raise UwqError("n must be a power of two >= 2")
        if not (self.L > 0):
            raise UwqError("L must be positive")
        if self.d not in (1, 2):
            raise UwqError("only dimensions 1 and 2 are supported")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def dxi(self) -> float:
        return math.pi / self.L

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.d

    @property
    def size(self) -> int:
        return self.n**self.d

    def points(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(self.n)

    def meshes(self) -> tuple:
        """Open (broadcastable) coordinate arrays, one per axis."""
        return tuple(np.ix_(*([self.points()] * self.d)))

    def dual(self) -> "AxisGrid":
        return AxisGrid(n=self.n, L=math.pi * self.n / (2.0 * self.L), d=self.d)


@dataclass(frozen=True)
class FunctionGrid:
    """Complex samples of a function on an AxisGrid, shaped (n,)*d."""

    axis: AxisGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != self.axis.shape:
            raise UwqError(f"values shape {v.shape} != grid shape {self.axis.shape}")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, axis: AxisGrid, f) -> "FunctionGrid":
        return cls(axis, np.asarray(f(*axis.meshes()), dtype=complex) + np.zeros(axis.shape))

    @classmethod
    def zero(cls, axis: AxisGrid) -> "FunctionGrid":
        return cls(axis, np.zeros(axis.shape, dtype=complex))


@dataclass(frozen=True)
class PhaseFunctionGrid:
    """Samples a(x, xi) on the product of an axis and its dual, x-major."""

    xaxis: AxisGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != self.xaxis.shape * 2:
            raise UwqError(
                f"values shape {v.shape} != phase shape {self.xaxis.shape * 2}"
            )
        object.__setattr__(self, "values", v)

    @property
    def kaxis(self) -> AxisGrid:
        return self.xaxis.dual()

    @classmethod
    def from_callable(cls, xaxis: AxisGrid, f) -> "PhaseFunctionGrid":
        xm = xaxis.meshes()
        km = xaxis.dual().meshes()
        d = xaxis.d
        xs = tuple(m.reshape(m.shape + (1,) * d) for m in xm)
        ks = tuple(m.reshape((1,) * d + m.shape) for m in km)
        vals = np.asarray(f(*xs, *ks), dtype=complex) + np.zeros(xaxis.shape * 2)
        return cls(xaxis, vals)


def _shifted_fft(values: np.ndarray, axes) -> np.ndarray:
    return np.fft.fftshift(
        np.fft.fftn(np.fft.ifftshift(values, axes=axes), axes=axes), axes=axes
    )


def _shifted_ifft(values: np.ndarray, axes) -> np.ndarray:
    return np.fft.fftshift(
        np.fft.ifftn(np.fft.ifftshift(values, axes=axes), axes=axes), axes=axes
    )


def fourier(u: FunctionGrid) -> FunctionGrid:
    """dx^d * sum_j e^{-i x_j xi_k} u(x_j) on the dual grid, both in
    physical order; an exact shifted DFT."""
    axes = tuple(range(u.axis.d))
    vals = u.axis.dx**u.axis.d * _shifted_fft(u.values, axes)
    return FunctionGrid(u.axis.dual(), vals)


def inverse_fourier(F: FunctionGrid) -> FunctionGrid:
    """(2 pi)^{-d} dxi^d * sum_k e^{+i x xi_k} F(xi_k); exact inverse of
    ``fourier`` on the primal grid."""
    axes = tuple(range(F.axis.d))
    primal = F.axis.dual()
    vals = _shifted_ifft(F.values, axes) / primal.dx**primal.d
    return FunctionGrid(primal, vals)


def gaussian_window(axis: AxisGrid, y=0.0, eta=0.0) -> FunctionGrid:
    """pi^{-d/4} e^{i x.eta} e^{-|x - y|^2 / 2} sampled on the grid."""
    y = np.broadcast_to(np.asarray(y, dtype=float), (axis.d,))
    eta = np.broadcast_to(np.asarray(eta, dtype=float), (axis.d,))
    if np.any(np.abs(y) > axis.L / 2.0):
        warnings.warn(
            "window center lies outside [-L/2, L/2]; mass leaves the box",
            stacklevel=2,
        )
    meshes = axis.meshes()
    expo = np.zeros(axis.shape, dtype=complex)
    for i, x in enumerate(meshes):
        expo = expo + 1j * x * eta[i] - 0.5 * (x - y[i]) ** 2
    return FunctionGrid(axis, math.pi ** (-axis.d / 4.0) * np.exp(expo))


def quadrature(u: FunctionGrid) -> complex:
    """Plain Riemann sum dx^d * sum u; spectrally accurate for smooth
    periodic-decaying integrands."""
    return complex(u.axis.dx**u.axis.d * u.values.sum())


def inner(u: FunctionGrid, v: FunctionGrid) -> complex:
    """<u, v> = dx^d * sum u conj(v)."""
    return complex(u.axis.dx**u.axis.d * np.vdot(v.values, u.values))


def l2_norm(u: FunctionGrid) -> float:
    return math.sqrt(max(0.0, inner(u, u).real))


def _phase_weight(g: PhaseFunctionGrid) -> float:
    return (g.xaxis.dx * g.xaxis.dxi) ** g.xaxis.d


def phase_inner(F: PhaseFunctionGrid, G: PhaseFunctionGrid) -> complex:
    return complex(_phase_weight(F) * np.vdot(G.values, F.values))


def phase_l2_norm(F: PhaseFunctionGrid) -> float:
    return math.sqrt(max(0.0, phase_inner(F, F).real))


def save_function(u: FunctionGrid, path) -> None:
    """CSV with header ``# n=<n> L=<L> d=<d>`` and rows ``index,re,im``."""
    flat = u.values.ravel()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# n={u.axis.n} L={u.axis.L:.17g} d={u.axis.d}\n")
        for i, v in enumerate(flat):
            fh.write(f"{i},{v.real:.17g},{v.imag:.17g}\n")


def _parse_grid_header(line: str) -> dict:
    if not line.startswith("#"):
        raise UwqError("grid CSV must start with a '# n=... L=... d=...' header")
    fields = {}
    for tok in line[1:].split():
        if "=" not in tok:
            raise UwqError(f"malformed header token {tok!r}")
        k, v = tok.split("=", 1)
        fields[k] = v
    return fields


def _load_csv(path):
    with open(path, "r", encoding="utf-8") as fh:
        header = _parse_grid_header(fh.readline())
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    idx = data[:, 0].astype(int)
    vals = np.empty(data.shape[0], dtype=complex)
    vals[idx] = data[:, 1] + 1j * data[:, 2]
    return header, vals


def load_function(path) -> FunctionGrid:
    header, vals = _load_csv(path)
    axis = AxisGrid(n=int(header["n"]), L=float(header["L"]), d=int(header["d"]))
    if vals.size != axis.size:
        raise UwqError("row count does not match n^d")
    return FunctionGrid(axis, vals.reshape(axis.shape))


def save_phase(a: PhaseFunctionGrid, path) -> None:
    """Same CSV layout with both axes implied by the header (dual spacing
    pi/L); marked kind=phase."""
    flat = a.values.ravel()
    ax = a.xaxis
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# n={ax.n} L={ax.L:.17g} d={ax.d} kind=phase\n")
        for i, v in enumerate(flat):
            fh.write(f"{i},{v.real:.17g},{v.imag:.17g}\n")


def load_phase(path) -> PhaseFunctionGrid:
    header, vals = _load_csv(path)
    if header.get("kind") != "phase":
        raise UwqError("not a phase-grid CSV (missing kind=phase)")
    axis = AxisGrid(n=int(header["n"]), L=float(header["L"]), d=int(header["d"]))
    if vals.size != axis.size**2:
        raise UwqError("row count does not match n^(2d)")
    return PhaseFunctionGrid(axis, vals.reshape(axis.shape * 2))
