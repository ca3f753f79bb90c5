"""Weight sequences M_p, their structural conditions, associated functions,
and truncated ultrapolynomial products.

Everything is computed in the log domain: Gevrey sequences (p!)^s overflow
doubles near p = 85, and the associated function is defined through logs
anyway.  All types are immutable; operations are pure functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .constants import (
    CONDITION_C0_CAP,
    M2_H_LATTICE_MAX,
    M2_H_LATTICE_STEP,
    WEIGHTS_TRUNCATION,
)
from .errors import SaturationError, TailBoundError, UwqError

__all__ = [
    "WeightSequence",
    "SubordinateSequence",
    "Ultrapolynomial",
    "AssocResult",
    "ConditionsReport",
    "BoundReport",
    "assoc_fn",
    "assoc_fn_subordinate",
    "check_conditions",
    "check_assoc_bound",
    "ultrapoly_eval",
    "ultrapoly_min_factors",
    "verify_ultrapoly_bound",
    "fit_bound_scale",
    "load_weights",
    "save_weights",
]


@dataclass(frozen=True)
class WeightSequence:
    """A normalized sequence M_0 = 1, M_1, ..., M_P of positive reals.

    ``log_values[p]`` holds ln M_p.  ``generator`` is ``("gevrey", s)`` or
    ``("explicit",)``; the Gevrey generator knows its quotients m_p = p^s in
    closed form for every p, which lets dependent code reach past the stored
    truncation.
    """

    log_values: np.ndarray
    generator: tuple = ("explicit",)

    def __post_init__(self):
        lv = np.asarray(self.log_values, dtype=float)
        if lv.ndim != 1 or lv.size < 2:
            raise UwqError("weight sequence needs at least M_0 and M_1")
        if not np.all(np.isfinite(lv)):
            raise UwqError("weight values must be strictly positive and finite")
        if abs(lv[0]) > 1e-12:
            raise UwqError("M_0 must equal 1")
        object.__setattr__(self, "log_values", lv)

    @classmethod
    def gevrey(cls, s: float, truncation: int = WEIGHTS_TRUNCATION) -> "WeightSequence":
        """M_p = (p!)^s, filled exactly in the log domain via sums of ln k."""
        if s <= 1.0:
            raise UwqError("Gevrey index must satisfy s > 1")
        lp = np.concatenate([[0.0], np.log(np.arange(1, truncation + 1, dtype=float))])
        return cls(log_values=s * np.cumsum(lp), generator=("gevrey", float(s)))

    @classmethod
    def explicit(cls, values=None, log_values=None) -> "WeightSequence":
        if (values is None) == (log_values is None):
            raise UwqError("give exactly one of values / log_values")
        if values is not None:
            values = np.asarray(values, dtype=float)
            if np.any(values <= 0):
                raise UwqError("weight values must be strictly positive")
            log_values = np.log(values)
        return cls(log_values=np.asarray(log_values, dtype=float), generator=("explicit",))

    @property
    def truncation(self) -> int:
        return self.log_values.size - 1

    @property
    def values(self) -> np.ndarray:
        return np.exp(self.log_values)

    @property
    def log_quotients(self) -> np.ndarray:
        """ln m_p for p = 1..P (index 0 holds ln m_1)."""
        return np.diff(self.log_values)

    def log_quotient(self, p: int) -> float:
        """ln m_p, reaching past the stored prefix for generated sequences."""
        if p < 1:
            raise UwqError("quotients are indexed from p = 1")
        if p <= self.truncation:
            return float(self.log_values[p] - self.log_values[p - 1])
        if self.generator[0] == "gevrey":
            return self.generator[1] * math.log(p)
        raise UwqError(f"m_{p} lies beyond the stored truncation of an explicit sequence")

    def quotient(self, p: int) -> float:
        return math.exp(self.log_quotient(p))


@dataclass(frozen=True)
class SubordinateSequence:
    """A positive non-decreasing sequence r_1..r_P, declared to diverge."""

    r: np.ndarray
    diverging: bool = True

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        if r.ndim != 1 or r.size == 0:
            raise UwqError("subordinate sequence must be a non-empty 1-d array")
        if np.any(r <= 0):
            raise UwqError("subordinate sequence must be strictly positive")
        if np.any(np.diff(r) < -1e-15):
            raise UwqError("subordinate sequence must be non-decreasing")
        object.__setattr__(self, "r", r)

    @property
    def log_cumulative(self) -> np.ndarray:
        """ln prod_{j<=p} r_j for p = 1..P (index 0 is ln r_1)."""
        return np.cumsum(np.log(self.r))


@dataclass(frozen=True)
class AssocResult:
    """Value of an associated function together with its maximizer.

    ``saturated`` flags that the maximizing index sits at (or the input lies
    beyond) the stored truncation, so the true supremum may be larger; the
    value is then only a lower bound and is never silently clamped.
    """

    value: float
    argmax: int
    saturated: bool

    def __float__(self) -> float:
        return self.value


def _assoc_scan(log_denominators: np.ndarray, rho: float, log_m_last: float) -> AssocResult:
    if not (rho > 0.0) or not math.isfinite(rho):
        raise UwqError("associated function needs rho > 0")
    P = log_denominators.size - 1
    terms = np.arange(P + 1) * math.log(rho) - log_denominators
    k = int(np.argmax(terms))
    value = max(0.0, float(terms[k]))
    saturated = (k == P and value > 0.0) or math.log(rho) >= log_m_last
    return AssocResult(value=value, argmax=k, saturated=saturated)


def assoc_fn(w: WeightSequence, rho: float) -> AssocResult:
    """M(rho) = sup_p log_+ rho^p / M_p, scanned over the stored prefix.

    Because the quotients m_p are non-decreasing for log-convex sequences,
    the scan is exact whenever rho < m_P; otherwise the result is flagged
    saturated.
    """
    return _assoc_scan(w.log_values, rho, w.log_values[-1] - w.log_values[-2])


def assoc_fn_subordinate(w: WeightSequence, r: SubordinateSequence, rho: float) -> AssocResult:
    """N(rho) = sup_p log_+ rho^p / (M_p prod_{j<=p} r_j)."""
    P = min(w.truncation, r.r.size)
    denom = w.log_values[: P + 1].copy()
    denom[1:] += r.log_cumulative[:P]
    return _assoc_scan(denom, rho, denom[-1] - denom[-2])


@dataclass(frozen=True)
class ConditionsReport:
    """Outcome of structural condition checks on a stored prefix.

    m2 / m3 report fitted witnesses: the smallest lattice H whose exactly
    minimized c0 stays under ``c0_cap``, and the minimal c0 making the
    truncated strong non-quasianalyticity sum hold for q <= P/2.  ``c0``
    consolidates both (the shared constant used by downstream inequalities).
    """

    m1_ok: bool
    m2_ok: bool
    m2_H: Optional[float]
    m2_c0: Optional[float]
    m3_ok: bool
    m3_c0: Optional[float]

    @property
    def c0(self) -> float:
        vals = [v for v in (self.m2_c0, self.m3_c0) if v is not None]
        return max([1.0] + vals)

    @property
    def H(self) -> Optional[float]:
        return self.m2_H


def check_conditions(
    w: WeightSequence,
    h_lattice: Optional[Sequence[float]] = None,
    c0_cap: float = CONDITION_C0_CAP,
) -> ConditionsReport:
    """Check log-convexity exactly and fit witnesses for the product and
    tail-sum conditions on the stored prefix.

    The H lattice is 1.0, 1.1, ..., 8.0 by default; for each H the optimal
    c0 is computed exactly and the smallest H with c0 <= c0_cap wins.  A
    finite prefix can never refute existential constants, so the cap is what
    gives "violation" operational meaning; it is deliberately coarse.
    """
    P = w.truncation
    if P < 4:
        raise UwqError("condition checks need truncation P >= 4")
    lv = w.log_values

    # (M.1) exactly, up to float rounding of the stored logs.
    m1_ok = bool(np.all(2.0 * lv[1:-1] <= lv[:-2] + lv[2:] + 1e-9))

    # (M.2): ln c0(H) = max_p [ ln M_p - p ln H - min_q (ln M_q + ln M_{p-q}) ]
    min_split = np.empty(P + 1)
    for p in range(P + 1):
        q = np.arange(p + 1)
        min_split[p] = np.min(lv[q] + lv[p - q])
    if h_lattice is None:
        h_lattice = np.arange(1.0, M2_H_LATTICE_MAX + 1e-9, M2_H_LATTICE_STEP)
    ps = np.arange(P + 1)
    m2_H = m2_c0 = None
    for H in h_lattice:
        log_c0 = float(np.max(lv - ps * math.log(H) - min_split))
        if math.exp(log_c0) <= c0_cap:
            m2_H, m2_c0 = float(H), max(1.0, math.exp(log_c0))
            break
    m2_ok = m2_H is not None

    # (M.3) truncated: sum_{p=q+1}^{P} 1/m_p <= c0 * q * M_q / M_{q+1}.
    inv_m = np.exp(-w.log_quotients)          # 1/m_p for p = 1..P
    tail = np.cumsum(inv_m[::-1])[::-1]       # tail[p-1] = sum_{j>=p} 1/m_j
    m3_c0 = 0.0
    for q in range(1, P // 2 + 1):
        lhs = tail[q]                          # sum over p = q+1 .. P
        m3_c0 = max(m3_c0, lhs * math.exp(w.log_quotients[q]) / q)
    m3_ok = m3_c0 <= c0_cap
    return ConditionsReport(
        m1_ok=m1_ok,
        m2_ok=m2_ok,
        m2_H=m2_H,
        m2_c0=m2_c0,
        m3_ok=m3_ok,
        m3_c0=m3_c0 if m3_c0 > 0 else None,
    )


def check_assoc_bound(
    w: WeightSequence,
    m: float,
    n_max: int,
    constants: Optional[tuple] = None,
) -> bool:
    """Check M(m * m_n) <= 2 (c0 m + 2) n ln H + ln c0 for n = 1..n_max.

    ``constants`` overrides the fitted (c0, H) pair, which is how the
    adversarial c0 = H = 1 case is exercised.
    """
    if m <= 0:
        raise UwqError("m must be positive")
    if constants is None:
        rep = check_conditions(w)
        if not (rep.m1_ok and rep.m2_ok):
            raise UwqError("cannot fit (c0, H): conditions fail on the prefix")
        c0, H = rep.c0, rep.H
    else:
        c0, H = constants
    for n in range(1, n_max + 1):
        res = assoc_fn(w, m * w.quotient(n))
        if res.saturated:
            raise SaturationError(
                f"M(m*m_{n}) saturated the truncation; enlarge the stored prefix"
            )
        rhs = 2.0 * (c0 * m + 2.0) * n * math.log(H) + math.log(c0)
        if res.value > rhs + 1e-12:
            return False
    return True


@dataclass(frozen=True)
class Ultrapolynomial:
    """Truncated product prod_{j=q}^{q+J-1} (1 + z^2 / (l_j^2 m_j^2)).

    ``scale`` is the constant l; for the variant with a diverging scale
    sequence, pass ``scale_seq`` (entry j-q scales factor j) instead.
    """

    weight: WeightSequence
    scale: Optional[float] = 1.0
    scale_seq: Optional[SubordinateSequence] = None
    q: int = 1
    truncation: int = 50

    def __post_init__(self):
        if self.q < 1:
            raise UwqError("start index q must be a positive integer")
        if self.truncation < 1:
            raise UwqError("need at least one factor")
        if self.scale_seq is None and (self.scale is None or self.scale <= 0):
            raise UwqError("scale l must be positive")
        if self.scale_seq is not None and self.scale_seq.r.size < self.truncation:
            raise UwqError("scale sequence shorter than the factor count")

    def log_m(self) -> np.ndarray:
        js = np.arange(self.q, self.q + self.truncation)
        if self.weight.generator[0] == "gevrey":
            return self.weight.generator[1] * np.log(js)
        if js[-1] > self.weight.truncation:
            raise UwqError("factor range exceeds stored truncation of explicit weights")
        return self.weight.log_quotients[js - 1]

    def log_scales(self) -> np.ndarray:
        if self.scale_seq is not None:
            return np.log(self.scale_seq.r[: self.truncation])
        return np.full(self.truncation, math.log(self.scale))


def _tail_log_bound(P: Ultrapolynomial, abs_z: float) -> float:
    """Upper bound on sum_{j > q+J-1} |z|^2 / (l^2 m_j^2) for the dropped tail."""
    if abs_z == 0.0:
        return 0.0
    j_end = P.q + P.truncation - 1
    if P.weight.generator[0] == "gevrey":
        s = P.weight.generator[1]
        l = P.scale if P.scale_seq is None else float(P.scale_seq.r[-1])
        # sum_{j>J} j^(-2s) <= integral_J^inf t^(-2s) dt = J^(1-2s)/(2s-1)
        return abs_z**2 / (l * l) * j_end ** (1.0 - 2.0 * s) / (2.0 * s - 1.0)
    raise TailBoundError(
        "cannot certify the dropped tail beyond the truncation of explicit weights"
    )


def ultrapoly_min_factors(w: WeightSequence, l: float, q: int, zmax: float,
                          tol: float = 1e-12) -> int:
    """Smallest factor count J so the dropped-tail sum stays below tol."""
    if w.generator[0] != "gevrey":
        raise TailBoundError("adaptive truncation needs a generated sequence")
    s = w.generator[1]
    if zmax == 0:
        return 1
    # solve zmax^2/l^2 * J^(1-2s)/(2s-1) <= tol for J
    j_end = (zmax**2 / (l * l * tol * (2.0 * s - 1.0))) ** (1.0 / (2.0 * s - 1.0))
    return max(1, int(math.ceil(j_end)) - q + 2)


def ultrapoly_eval(P: Ultrapolynomial, z: complex, strict: bool = True,
                   tail_correction: bool = False) -> complex:
    """Product of the first J factors at the point z.

    With ``strict`` the dropped tail must satisfy the 1e-12 bound, otherwise
    TailBoundError.  ``tail_correction`` (real z only) adds the analytic
    integral estimate of the dropped log-tail, turning the truncated product
    into an estimate of the full one; its own second-order error is checked
    against 1e-12.
    """
    z = complex(z)
    abs_z = abs(z)
    if strict and not tail_correction:
        if _tail_log_bound(P, abs_z) >= 1e-12:
            raise TailBoundError(
                "dropped tail exceeds 1e-12 for this z; increase the factor count"
            )
    log_m = P.log_m()
    log_l = P.log_scales()
    if z.imag == 0.0:
        # real z: every factor >= 1; sum logs for stability at large J
        t = np.exp(2.0 * (math.log(abs_z) - log_l - log_m)) if abs_z > 0 else np.zeros(1)
        total = float(np.sum(np.log1p(t)))
        if tail_correction:
            total += _tail_log_correction(P, abs_z)
        return complex(math.exp(total))
    if tail_correction:
        raise UwqError("tail correction is only defined for real arguments")
    factors = 1.0 + (z * z) * np.exp(-2.0 * (log_l + log_m))
    return complex(np.prod(factors))


def _tail_log_correction(P: Ultrapolynomial, abs_z: float) -> float:
    """Integral estimate of sum_{j>q+J-1} log1p(|z|^2/(l^2 j^(2s))).

    Valid for generated sequences; the ignored second-order term is bounded
    by sum (z^2/(l^2 j^(2s)))^2 / 2 and must stay under 1e-12.
    """
    if abs_z == 0.0:
        return 0.0
    if P.weight.generator[0] != "gevrey" or P.scale_seq is not None:
        raise TailBoundError("tail correction needs a generated sequence and scalar l")
    s = P.weight.generator[1]
    l = P.scale
    j0 = P.q + P.truncation - 0.5  # midpoint rule start
    c = abs_z**2 / (l * l)
    first = c * j0 ** (1.0 - 2.0 * s) / (2.0 * s - 1.0)
    second = 0.5 * c * c * j0 ** (1.0 - 4.0 * s) / (4.0 * s - 1.0)
    if second >= 1e-12:
        raise TailBoundError("tail correction not accurate enough; increase factors")
    return first


@dataclass(frozen=True)
class BoundReport:
    C_tilde: float
    ok: bool
    argmin: int


def verify_ultrapoly_bound(
    P: Ultrapolynomial,
    k: float,
    grid: Sequence[float],
    floor: float = 1e-8,
) -> BoundReport:
    """Empirical check of the lower bound |P(x)| >= C e^{M(|x|/k)} on a grid.

    Returns the minimum of |P(x)| e^{-M(|x|/k)} as the empirical constant.
    In floats that minimum is always positive, so "bounded away from zero"
    is operationalized as C >= floor.  Saturated associated-function values
    raise; callers must store a prefix long enough for the grid.
    """
    if k <= 0:
        raise UwqError("k must be positive")
    grid = np.asarray(grid, dtype=float)
    best = math.inf
    arg = 0
    for i, x in enumerate(grid):
        ax = abs(float(x))
        if ax == 0.0:
            m_val = 0.0  # associated function vanishes as rho -> 0+
        else:
            res = assoc_fn(P.weight, ax / k)
            if res.saturated:
                raise SaturationError(
                    "associated function saturated on the bound-check grid"
                )
            m_val = res.value
        val = ultrapoly_eval(P, complex(ax), strict=False, tail_correction=True)
        log_ratio = math.log(abs(val)) - m_val
        ratio = math.exp(log_ratio) if log_ratio > -700 else 0.0
        if ratio < best:
            best, arg = ratio, i
    return BoundReport(C_tilde=best, ok=bool(best >= floor), argmin=arg)


def fit_bound_scale(
    P: Ultrapolynomial,
    grid: Sequence[float],
    k_ladder: Sequence[float] = (0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0),
    floor: float = 1e-8,
) -> Optional[float]:
    """Smallest k on the ladder for which the lower bound check passes."""
    for k in k_ladder:
        if verify_ultrapoly_bound(P, k, grid, floor=floor).ok:
            return float(k)
    return None


def load_weights(path) -> WeightSequence:
    """Plain-text format: header ``gevrey s=<real>`` or ``explicit``; for
    explicit sequences one ln M_p per following line, starting with p = 0."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise UwqError(f"empty weight file: {path}")
    head = lines[0].split()
    if head[0] == "gevrey":
        if len(head) != 2 or not head[1].startswith("s="):
            raise UwqError("gevrey header must read: gevrey s=<real>")
        return WeightSequence.gevrey(float(head[1][2:]))
    if head[0] == "explicit":
        logs = np.array([float(v) for v in lines[1:]])
        return WeightSequence.explicit(log_values=logs)
    raise UwqError(f"unknown weight header {lines[0]!r}")


def save_weights(w: WeightSequence, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if w.generator[0] == "gevrey":
            fh.write(f"gevrey s={w.generator[1]:.17g}\n")
        else:
            fh.write("explicit\n")
            for v in w.log_values:
                fh.write(f"{v:.17g}\n")
