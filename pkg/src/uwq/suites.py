"""Named verification suites: every identity the toolkit promises, run at
its pinned tolerance with a deterministic corpus, one report per criterion.

Suite map (each criterion is reachable through exactly one suite):
  stft      - inversion, isometry
  quant245  - Anti-Wick vs smoothed-Weyl identity, positivity, norm bound,
              oscillator spectrum
  expansion - smoothing expansion exactness, inverse recursion
  tau       - ordering change, transpose
  compose   - operator composition
  gaussconv - Laplace convolution identity, oscillatory kernel limit
  weights   - structural conditions, quotient growth bound,
              ultrapolynomial lower bound
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from . import constants
from .errors import UwqError
from .expansion import (
    PolySymbol,
    aw_to_weyl_terms,
    compose_terms,
    expansion_partial_sum,
    heat_quarter,
    inverse_aw_recursion,
    poly_allclose,
    tau_change_terms,
    transpose_terms,
)
from .gaussconv import (
    CompactDensity,
    SeparableSymbol,
    conv_gauss_direct,
    conv_gauss_via_laplace,
    oscillatory_kernel,
    smooth_cutoff,
)
from .grid import AxisGrid, FunctionGrid, PhaseFunctionGrid, gaussian_window, l2_norm
from .quant import (
    anti_wick_matrix,
    apply_operator,
    hermite_function,
    kernel_from_symbol,
    operator_matrix,
    sample_symbol,
    verify_smoothing_identity,
    weyl,
)
from .stft import stft, stft_adjoint, stft_norm_check
from .weights import (
    Ultrapolynomial,
    WeightSequence,
    check_assoc_bound,
    check_conditions,
    fit_bound_scale,
    verify_ultrapoly_bound,
)

__all__ = ["Report", "SuiteParams", "SUITES", "run_suite", "run_all", "report_header"]


@dataclass(frozen=True)
class Report:
    """One criterion outcome; passes iff measured <= tolerance."""

    name: str
    status: str
    measured: float
    tolerance: float
    runtime_ms: float
    detail: str = ""

    @classmethod
    def from_measurement(cls, name, measured, tolerance, t0, detail=""):
        status = "pass" if measured <= tolerance else "fail"
        return cls(name=name, status=status, measured=float(measured),
                   tolerance=float(tolerance),
                   runtime_ms=1000.0 * (time.perf_counter() - t0), detail=detail)


@dataclass(frozen=True)
class SuiteParams:
    n: int = constants.DEFAULT_N_1D
    L: float = constants.DEFAULT_L_1D
    quant_L: float = constants.QUANT_L
    d: int = 1
    seed: int = 12345


def report_header(params: SuiteParams) -> dict:
    return {
        "constants_version": constants.CONSTANTS_VERSION,
        "n": params.n,
        "L": params.L,
        "quant_L": params.quant_L,
        "d": params.d,
        "seed": params.seed,
    }


def _x() -> PolySymbol:
    return PolySymbol.x()


def _xi() -> PolySymbol:
    return PolySymbol.xi()


def _band_limited(axis: AxisGrid, rng, half_width: int = 20) -> FunctionGrid:
    n = axis.n
    spec = np.zeros(n, dtype=complex)
    lo, hi = n // 2 - half_width, n // 2 + half_width
    spec[lo:hi] = rng.standard_normal(hi - lo) + 1j * rng.standard_normal(hi - lo)
    vals = np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(spec))) * n
    return FunctionGrid(axis, vals / np.max(np.abs(vals)))


def _stft_corpus(axis: AxisGrid, rng) -> List[FunctionGrid]:
    pts = axis.points()
    corpus = [gaussian_window(axis), gaussian_window(axis, y=1.5, eta=2.0)]
    corpus += [FunctionGrid(axis, hermite_function(k, pts).astype(complex)) for k in range(5)]
    corpus += [_band_limited(axis, rng) for _ in range(3)]
    return corpus


def _decaying_corpus(axis: AxisGrid) -> List[FunctionGrid]:
    """Band-limited inputs that also decay at the box edge, the class the
    quantization identities act on."""
    pts = axis.points()
    out = [FunctionGrid(axis, hermite_function(k, pts).astype(complex)) for k in range(4)]
    out.append(FunctionGrid(axis, np.exp(1j * 2.0 * pts - 0.5 * (pts - 1.0) ** 2)))
    return out


def _band_limited_symbol(axis: AxisGrid, rng, half_width: int = 12) -> PhaseFunctionGrid:
    n = axis.n
    spec = np.zeros((n, n), dtype=complex)
    lo, hi = n // 2 - half_width, n // 2 + half_width
    spec[lo:hi, lo:hi] = rng.standard_normal((hi - lo,) * 2) + 1j * rng.standard_normal((hi - lo,) * 2)
    vals = np.fft.fftshift(np.fft.ifft2(np.fft.ifftshift(spec))).real * n * n
    vals = vals / np.max(np.abs(vals))
    return PhaseFunctionGrid(axis, vals.astype(complex))


# ---------------------------------------------------------------------------
# stft suite
# ---------------------------------------------------------------------------

def criterion_stft_inversion(params: SuiteParams) -> Report:
    t0 = time.perf_counter()
    rng = np.random.default_rng(params.seed)
    axis = AxisGrid(params.n, params.L, 1)
    worst = 0.0
    for u in _stft_corpus(axis, rng):
        rec = stft_adjoint(stft(u))
        err = np.max(np.abs(rec.values / (2.0 * math.pi) ** axis.d - u.values))
        worst = max(worst, err / max(1e-300, float(np.max(np.abs(u.values)))))
    # two-dimensional spot check
    ax2 = AxisGrid(constants.DEFAULT_N_2D, constants.DEFAULT_L_2D, 2)
    g2 = gaussian_window(ax2, y=(0.5, -0.25), eta=(1.0, 0.5))
    rec2 = stft_adjoint(stft(g2))
    worst = max(worst, float(np.max(np.abs(rec2.values / (2.0 * math.pi) ** 2 - g2.values))))
    return Report.from_measurement("stft_inversion", worst, 1e-10, t0,
                                   "relative inversion defect over the corpus")


def criterion_stft_isometry(params: SuiteParams) -> Report:
    t0 = time.perf_counter()
    rng = np.random.default_rng(params.seed)
    axis = AxisGrid(params.n, params.L, 1)
    worst = 0.0
    for u in _stft_corpus(axis, rng):
        res = stft_norm_check(u)
        worst = max(worst, abs(res["lhs"] - res["rhs"]) / res["rhs"])
    return Report.from_measurement("stft_isometry", worst, 1e-10, t0,
                                   "relative norm defect over the corpus")


# ---------------------------------------------------------------------------
# quant245 suite
# ---------------------------------------------------------------------------

def _quant_axis(params: SuiteParams) -> AxisGrid:
    return AxisGrid(params.n, params.quant_L, 1)


def criterion_smoothing_identity(params: SuiteParams) -> Report:
    t0 = time.perf_counter()
    axis = _quant_axis(params)
    x, xi = _x(), _xi()
    symbols = [PolySymbol.one(), x, xi * xi, x * x + xi * xi, x * x * x * x, x * xi]
    worst = 0.0
    for sym in symbols:
        worst = max(worst, verify_smoothing_identity(sym, axis)["max_err"])
    rng = np.random.default_rng(params.seed + 1)
    worst = max(worst, verify_smoothing_identity(_band_limited_symbol(axis, rng))["max_err"])
    return Report.from_measurement("antiwick_weyl_smoothing", worst, 1e-5, t0,
                                   "max entrywise discrepancy on the half-box block")


def criterion_positivity(params: SuiteParams) -> Report:
    t0 = time.perf_counter()
    axis = _quant_axis(params)
    x, xi = _x(), _xi()
    worst = 0.0
    for sym in [PolySymbol.one(), x * x, xi * xi, x * x + xi * xi, x * x * x * x + 1]:
        grid = sample_symbol(sym, axis)
        amax = float(np.max(grid.values.real))
        A = anti_wick_matrix(grid).entries
        mineig = float(np.linalg.eigvalsh((A + A.conj().T) / 2.0)[0])
        worst = max(worst, -mineig / (1e-7 * (1.0 + amax)))
    return Report.from_measurement("antiwick_positivity", worst, 1.0, t0,
                                   "most negative eigenvalue over its allowance")


def criterion_norm_bound(params: SuiteParams) -> Report:
    t0 = time.perf_counter()
    axis = _quant_axis(params)
    rng = np.random.default_rng(params.seed + 2)
    worst = 0.0
    for _ in range(5):
        a = _band_limited_symbol(axis, rng)
        sup = float(np.max(np.abs(a.values)))
        nrm = float(np.linalg.norm(anti_wick_matrix(a).entries, 2))
        worst = max(worst, nrm / (sup * (1.0 + 1e-6)))
    return Report.from_measurement("antiwick_norm_bound", worst, 1.0, t0,
                                   "operator norm over its sup-norm allowance")


def criterion_oscillator(params: SuiteParams) -> Report:
    t0 = time.perf_counter()
    axis = _quant_axis(params)
    x, xi = _x(), _xi()
    H = weyl(x * x + xi * xi, axis).entries
    evals = np.linalg.eigvalsh((H + H.conj().T) / 2.0)
    worst = float(np.max(np.abs(evals[:8] - np.arange(1, 16, 2))))
    return Report.from_measurement("oscillator_spectrum", worst, 1e-6, t0,
                                   "lowest eight eigenvalues vs odd integers")


# ---------------------------------------------------------------------------
# expansion suite
# ---------------------------------------------------------------------------

def _poly_corpus_1d(max_degree: int = 8) -> List[PolySymbol]:
    out = []
    for i in range(max_degree + 1):
        for j in range(max_degree + 1 - i):
            out.append(PolySymbol.monomial(1, (i,), (j,)))
    return out


def _poly_corpus_2d(rng, count: int = 6, max_degree: int = 5) -> List[PolySymbol]:
    out = []
    for _ in range(count):
        terms = {}
        for _ in range(4):
            xe = tuple(int(v) for v in rng.integers(0, 3, size=2))
            ke = tuple(int(v) for v in rng.integers(0, 3, size=2))
            if sum(xe) + sum(ke) <= max_degree:
                terms[(xe, ke)] = complex(rng.standard_normal(), rng.standard_normal())
        if terms:
            out.append(PolySymbol(2, terms))
    return out


def criterion_smoothing_expansion(params: SuiteParams) -> Report:
    t0 = time.perf_counter()
    rng = np.random.default_rng(params.seed + 3)
    bad = 0
    total = 0
    for a in _poly_corpus_1d() + _poly_corpus_2d(rng):
        e = aw_to_weyl_terms(a)
        total += 1
        if not poly_allclose(expansion_partial_sum(e, len(e)), heat_quarter(a, +1), rtol=1e-12):
            bad += 1
    return Report.from_measurement("smoothing_expansion_exact", float(bad), 0.0, t0,
                                   f"coefficientwise mismatches out of {total} polynomials")


def criterion_inverse_expansion(params: SuiteParams) -> Report:
    t0 = time.perf_counter()
    rng = np.random.default_rng(params.seed + 4)
    bad = 0
    total = 0
    for b in _poly_corpus_1d() + _poly_corpus_2d(rng):
        res = inverse_aw_recursion(b)
        total += 1
        ok = poly_allclose(heat_quarter(res.a, +1), b, rtol=1e-12)
        ok = ok and poly_allclose(res.a, heat_quarter(b, -1), rtol=1e-12)
        if not ok:
            bad += 1
    # matrix form on the corpus the operators act on
    axis = _quant_axis(params)
    corpus = _decaying_corpus(axis)
    x, xi = _x(), _xi()
    worst = 0.0
    for b in [xi * xi, x * x, x * xi, x * x + xi * xi]:
        a = inverse_aw_recursion(b).a
        MA = anti_wick_matrix(a, axis)
        MW = weyl(b, axis)
        for u in corpus:
            va, vw = apply_operator(MA, u), apply_operator(MW, u)
            worst = max(worst, float(np.max(np.abs(va.values - vw.values)))
                        / max(1.0, float(np.max(np.abs(vw.values)))))
    measured = float(bad) + (0.0 if worst < 1e-5 else worst)
    return Report.from_measurement("inverse_expansion", measured, 0.0, t0,
                                   f"{bad} symbolic mismatches; worst matrix action {worst:.2e}")


# ---------------------------------------------------------------------------
# tau suite
# ---------------------------------------------------------------------------

def _tau_polys() -> List[PolySymbol]:
    x, xi = _x(), _xi()
    return [x * xi, x * x + xi * xi, x * x * xi * xi, x * x * x * xi, xi * xi * xi * xi]


def criterion_tau_change(params: SuiteParams) -> Report:
    t0 = time.perf_counter()
    axis = AxisGrid(params.n, params.L, 1)
    corpus = _decaying_corpus(axis)
    worst = 0.0
    for a in _tau_polys():
        for t1, t in itertools.product([0.0, 0.5, 1.0], repeat=2):
            b = tau_change_terms(a, t1, t)
            M1 = operator_matrix(kernel_from_symbol(a, t1, axis))
            M2 = operator_matrix(kernel_from_symbol(b, t, axis))
            for u in corpus:
                v1, v2 = apply_operator(M1, u), apply_operator(M2, u)
                worst = max(worst, float(np.max(np.abs(v1.values - v2.values)))
                            / max(1.0, float(np.max(np.abs(v1.values)))))
    return Report.from_measurement("tau_change", worst, 1e-8, t0,
                                   "worst relative action defect on band-limited inputs")


def criterion_transpose(params: SuiteParams) -> Report:
    t0 = time.perf_counter()
    axis = AxisGrid(params.n, params.L, 1)
    worst = 0.0
    for a in _tau_polys():
        refl = a.reflect_xi()
        for tau in [0.0, 0.25, 0.5, 1.0]:
            M = operator_matrix(kernel_from_symbol(a, tau, axis))
            M2 = operator_matrix(kernel_from_symbol(refl, 1.0 - tau, axis))
            worst = max(worst, float(np.max(np.abs(M.entries.T - M2.entries))))
    return Report.from_measurement("transpose", worst, 1e-9, t0,
                                   "plain matrix transpose identity, entrywise")


# ---------------------------------------------------------------------------
# compose suite
# ---------------------------------------------------------------------------

def criterion_composition(params: SuiteParams) -> Report:
    t0 = time.perf_counter()
    axis = AxisGrid(params.n, params.L, 1)
    corpus = _decaying_corpus(axis)[:3]
    monos = [PolySymbol.monomial(1, (i,), (j,))
             for i in range(4) for j in range(4) if 1 <= i + j <= 3]
    worst = 0.0
    for a, b in itertools.product(monos, monos):
        f = compose_terms(a, b)
        M = operator_matrix(kernel_from_symbol(a, 0.0, axis)).entries \
            @ operator_matrix(kernel_from_symbol(b, 0.0, axis)).entries
        Mf = operator_matrix(kernel_from_symbol(f, 0.0, axis)).entries
        for u in corpus:
            v1, v2 = M @ u.values, Mf @ u.values
            worst = max(worst, float(np.max(np.abs(v1 - v2))) / max(1.0, float(np.max(np.abs(v1)))))
    return Report.from_measurement("composition", worst, 1e-8, t0,
                                   "worst relative action defect, monomial pairs")


# ---------------------------------------------------------------------------
# gaussconv suite
# ---------------------------------------------------------------------------

def criterion_laplace_convolution(params: SuiteParams) -> Report:
    t0 = time.perf_counter()
    densities = [
        CompactDensity.indicator(-1.0, 1.0),
        CompactDensity.gaussian_bump(-1.0, 1.0),
        CompactDensity.poly_times_bump([1.0, 1.0, 1.0], -1.0, 1.0),
    ]
    worst = 0.0
    for S in densities:
        for s in (-2.0, -1.0, -0.25):
            for xv in np.linspace(-5.0, 5.0, 21):
                via = conv_gauss_via_laplace(S, s, xv)
                direct = conv_gauss_direct(S, s, xv)
                worst = max(worst, abs(via - direct) / (1.0 + abs(direct)))
    return Report.from_measurement("laplace_convolution", worst, 1e-8, t0,
                                   "via-Laplace vs direct quadrature, relative")


def criterion_oscillatory(params: SuiteParams) -> Report:
    t0 = time.perf_counter()
    axc = AxisGrid(256, 2.5, 2)
    sigma, x0, y0 = 0.22, 0.35, -0.15
    chi = FunctionGrid.from_callable(
        axc, lambda X, Y: np.exp(-((X - x0) ** 2 + (Y - y0) ** 2) / (2.0 * sigma**2))
    )
    psi2 = lambda u: smooth_cutoff(u, inner=1.2, outer=2.5)
    symbols = [
        PolySymbol.one(),
        PolySymbol.xi(),
        SeparableSymbol(fx=lambda m: math.sqrt(2.0) * np.exp(m**2),
                        fxi=lambda k: k**2 + 0.5),
    ]
    worst = 0.0
    for b in symbols:
        rep = oscillatory_kernel(b, chi, constants.OSC_DELTA_LADDER)
        rep2 = oscillatory_kernel(b, chi, constants.OSC_DELTA_LADDER, psi=psi2)
        monotone = all(d1 > d2 for d1, d2 in zip(rep.diffs, rep.diffs[1:]))
        if not monotone:
            worst = max(worst, 1.0)
        worst = max(worst, rep.diffs[-1] / 1e-5)
        worst = max(worst, abs(rep.extrapolated - rep2.extrapolated) / 1e-5)
    return Report.from_measurement("oscillatory_kernel", worst, 1.0, t0,
                                   "max of final Cauchy diff and cutoff dependence, "
                                   "scaled to their 1e-5 allowances")


# ---------------------------------------------------------------------------
# weights suite
# ---------------------------------------------------------------------------

def criterion_weights(params: SuiteParams) -> Report:
    t0 = time.perf_counter()
    failures = []
    for s in (1.5, 2.0, 3.0):
        w = WeightSequence.gevrey(s)
        rep = check_conditions(w)
        if not (rep.m1_ok and rep.m2_ok and rep.m3_ok):
            failures.append(f"conditions s={s}")
        if not check_assoc_bound(w, 1.0, 20):
            failures.append(f"growth bound s={s}")
        wide = WeightSequence.gevrey(s, truncation=192)
        P = Ultrapolynomial(weight=wide, scale=1.0, q=1, truncation=20000)
        grid = np.linspace(0.0, 50.0, 200)
        k = fit_bound_scale(P, grid)
        if k is None:
            failures.append(f"lower bound s={s}")
        else:
            if not verify_ultrapoly_bound(P, k, grid).ok:
                failures.append(f"lower bound recheck s={s}")
    return Report.from_measurement("weights_conditions", float(len(failures)), 0.0, t0,
                                   "; ".join(failures) if failures else
                                   "conditions, growth bound, and lower bound all hold")


SUITES = {
    "stft": [criterion_stft_inversion, criterion_stft_isometry],
    "quant245": [criterion_smoothing_identity, criterion_positivity,
                 criterion_norm_bound, criterion_oscillator],
    "expansion": [criterion_smoothing_expansion, criterion_inverse_expansion],
    "tau": [criterion_tau_change, criterion_transpose],
    "compose": [criterion_composition],
    "gaussconv": [criterion_laplace_convolution, criterion_oscillatory],
    "weights": [criterion_weights],
}

SUITE_ORDER = ["stft", "quant245", "expansion", "tau", "compose", "gaussconv", "weights"]


def run_suite(name: str, params: Optional[SuiteParams] = None,
              parallel: bool = False) -> List[Report]:
    params = params or SuiteParams()
    if name == "all":
        fns = [fn for key in SUITE_ORDER for fn in SUITES[key]]
    elif name in SUITES:
        fns = SUITES[name]
    else:
        raise UwqError(f"unknown suite {name!r}; choose from "
                       f"{['all'] + SUITE_ORDER}")
    if parallel:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor() as pool:
            reports = list(pool.map(lambda f: f(params), fns))
    else:
        reports = [fn(params) for fn in fns]
    return sorted(reports, key=lambda r: r.name)


def run_all(params: Optional[SuiteParams] = None, parallel: bool = False) -> List[Report]:
    return run_suite("all", params, parallel)
