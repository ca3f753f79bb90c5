"""Command-line interface: one subcommand per module plus a ``verify``
driver for the full identity suite.

Symbol and density specs are tiny config files in a minimal key/value
syntax (a strict TOML subset, grammar in the README) or JSON; parsing is
deliberately hand-rolled and auditable, with schema violations enumerated
rather than defaulted.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from . import constants
from .errors import SchemaError, UwqError
from .expansion import (
    PolySymbol,
    aw_to_weyl_terms,
    compose_terms,
    inverse_aw_recursion,
    tau_change_terms,
    transpose_terms,
)
from .gaussconv import (
    CompactDensity,
    SeparableSymbol,
    conv_gauss_direct,
    conv_gauss_via_laplace,
    laplace,
    oscillatory_kernel,
    smoothed_gaussian_poly,
)
from .grid import (
    AxisGrid,
    FunctionGrid,
    load_function,
    load_phase,
    save_function,
    save_phase,
)
from .quant import (
    anti_wick_matrix,
    kernel_from_symbol,
    operator_matrix,
    sample_symbol,
    verify_smoothing_identity,
)
from .stft import stft, stft_adjoint
from .suites import Report, SuiteParams, run_suite, report_header
from .weights import WeightSequence, assoc_fn, check_conditions, load_weights

__all__ = ["SymbolSpec", "parse_config", "load_symbol", "emit_symbol",
           "emit_report", "run_verify", "main"]


# ---------------------------------------------------------------------------
# minimal config parsing
# ---------------------------------------------------------------------------

def _parse_scalar(tok: str, lineno: int):
    tok = tok.strip()
    if tok.startswith('"') and tok.endswith('"') and len(tok) >= 2:
        return tok[1:-1]
    if tok in ("true", "false"):
        return tok == "true"
    try:
        if any(c in tok for c in ".eE") and not tok.startswith("0x"):
            return float(tok)
        return int(tok)
    except ValueError:
        raise SchemaError(f"line {lineno}: cannot parse value {tok!r}")


def _parse_array(text: str, lineno: int):
    # nested arrays of scalars; text includes the surrounding brackets
    pos = 0

    def parse(p):
        if text[p] != "[":
            raise SchemaError(f"line {lineno}: expected '['")
        p += 1
        out = []
        buf = ""
        while p < len(text):
            c = text[p]
            if c == "[":
                sub, p = parse(p)
                out.append(sub)
            elif c in ",]":
                if buf.strip():
                    out.append(_parse_scalar(buf, lineno))
                buf = ""
                if c == "]":
                    return out, p + 1
                p += 1
            else:
                buf += c
                p += 1
        raise SchemaError(f"line {lineno}: unterminated array")

    out, p = parse(pos)
    if text[p:].strip():
        raise SchemaError(f"line {lineno}: trailing characters after array")
    return out


def parse_config(text: str) -> dict:
    """Parse the documented key/value subset: ``key = value`` per line,
    values are strings, numbers, booleans, or (nested) arrays; ``#`` starts
    a comment; arrays may span lines until brackets balance."""
    out = {}
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        lineno = i + 1
        raw = lines[i]
        line = raw.split("#", 1)[0].strip()
        i += 1
        if not line:
            continue
        if "=" not in line:
            raise SchemaError(f"line {lineno}: expected 'key = value'")
        key, val = line.split("=", 1)
        key = key.strip()
        val = val.strip()
        if not key.isidentifier():
            raise SchemaError(f"line {lineno}: bad key {key!r}")
        if key in out:
            raise SchemaError(f"line {lineno}: duplicate key {key!r}")
        if val.startswith("["):
            while val.count("[") != val.count("]"):
                if i >= len(lines):
                    raise SchemaError(f"line {lineno}: unterminated array")
                val += lines[i].split("#", 1)[0]
                i += 1
            out[key] = _parse_array(val, lineno)
        else:
            out[key] = _parse_scalar(val, lineno)
    return out


@dataclass(frozen=True)
class SymbolSpec:
    """Phase-space symbol description: exactly one payload is populated.

    kind="poly":     d, terms (rows of 2d exponents then re, im)
    kind="grid":     path to a phase-grid CSV
    kind="example5": l < 1 and terms for a polynomial in xi only
                     (rows of d exponents then re, im)
    """

    kind: str
    d: int = 1
    terms: Optional[tuple] = None
    path: Optional[str] = None
    l: Optional[float] = None

    def poly(self) -> PolySymbol:
        if self.kind == "poly":
            out = {}
            for row in self.terms:
                ke = tuple(int(v) for v in row[: self.d])
                xe = tuple(int(v) for v in row[self.d : 2 * self.d])
                out[(xe, ke)] = out.get((xe, ke), 0.0) + complex(row[-2], row[-1])
            return PolySymbol(self.d, out)
        if self.kind == "example5":
            out = {}
            for row in self.terms:
                ke = tuple(int(v) for v in row[: self.d])
                out[(((0,) * self.d), ke)] = out.get((((0,) * self.d), ke), 0.0) + complex(row[-2], row[-1])
            return PolySymbol(self.d, out)
        raise SchemaError(f"spec of kind {self.kind!r} has no polynomial payload")


_ALLOWED_KEYS = {
    "poly": {"kind", "d", "terms"},
    "grid": {"kind", "path"},
    "example5": {"kind", "d", "terms", "l"},
}


def _spec_from_dict(data: dict) -> SymbolSpec:
    if "kind" not in data:
        raise SchemaError("missing required field 'kind'")
    kind = data["kind"]
    if kind not in _ALLOWED_KEYS:
        raise SchemaError(f"unknown kind {kind!r}; expected poly, grid, or example5")
    extra = set(data) - _ALLOWED_KEYS[kind]
    if extra:
        raise SchemaError(f"unexpected fields for kind={kind}: {sorted(extra)}")
    missing = _ALLOWED_KEYS[kind] - set(data)
    if missing:
        raise SchemaError(f"missing fields for kind={kind}: {sorted(missing)}")
    if kind == "grid":
        return SymbolSpec(kind="grid", path=str(data["path"]))
    d = int(data["d"])
    if d < 1:
        raise SchemaError("d must be a positive integer")
    terms = data["terms"]
    if not isinstance(terms, list) or not terms:
        raise SchemaError("terms must be a non-empty array of rows")
    width = (2 * d if kind == "poly" else d) + 2
    rows = []
    for row in terms:
        if not isinstance(row, list) or len(row) != width:
            raise SchemaError(f"each term row needs {width} entries "
                              f"({'2d' if kind == 'poly' else 'd'} exponents, re, im)")
        if any(int(v) < 0 or int(v) != v for v in row[:-2]):
            raise SchemaError("exponents must be non-negative integers")
        rows.append(tuple(float(v) for v in row))
    if kind == "example5":
        l = float(data["l"])
        if l >= 1.0:
            raise SchemaError("example5 requires l < 1")
        return SymbolSpec(kind="example5", d=d, terms=tuple(rows), l=l)
    return SymbolSpec(kind="poly", d=d, terms=tuple(rows))


def load_symbol(path) -> SymbolSpec:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"JSON parse error: {exc}") from exc
    else:
        data = parse_config(text)
    return _spec_from_dict(data)


def emit_symbol(spec: SymbolSpec) -> bytes:
    """Canonical key/value encoding; load(emit(spec)) round-trips."""
    lines = [f'kind = "{spec.kind}"']
    if spec.kind == "grid":
        lines.append(f'path = "{spec.path}"')
    else:
        lines.append(f"d = {spec.d}")
        if spec.kind == "example5":
            lines.append(f"l = {spec.l:.17g}")
        rows = []
        for row in spec.terms:
            cells = [f"{int(v)}" for v in row[:-2]] + [f"{v:.17g}" for v in row[-2:]]
            rows.append("[" + ", ".join(cells) + "]")
        lines.append("terms = [" + ", ".join(rows) + "]")
    return ("\n".join(lines) + "\n").encode()


def emit_report(reports: List[Report], fmt: str = "json", header: Optional[dict] = None) -> bytes:
    if fmt == "json":
        doc = {
            "header": header or {},
            "reports": [
                {"name": r.name, "status": r.status, "measured": r.measured,
                 "tolerance": r.tolerance, "runtime_ms": r.runtime_ms,
                 "detail": r.detail}
                for r in reports
            ],
        }
        return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode()
    if fmt == "csv":
        lines = ["name,status,measured,tolerance,runtime_ms"]
        for r in reports:
            lines.append(f"{r.name},{r.status},{r.measured:.6e},{r.tolerance:.6e},{r.runtime_ms:.1f}")
        return ("\n".join(lines) + "\n").encode()
    raise UwqError(f"unknown report format {fmt!r}")


def run_verify(suite: str, params: Optional[SuiteParams] = None,
               parallel: bool = False) -> List[Report]:
    return run_suite(suite, params, parallel=parallel)


# ---------------------------------------------------------------------------
# command implementations
# ---------------------------------------------------------------------------

def _axis_from_args(args, d=None) -> AxisGrid:
    d = d if d is not None else args.d
    n = args.n if args.n else (constants.DEFAULT_N_1D if d == 1 else constants.DEFAULT_N_2D)
    L = args.L if args.L else (constants.DEFAULT_L_1D if d == 1 else constants.DEFAULT_L_2D)
    return AxisGrid(n, L, d)


def _symbol_grid(spec: SymbolSpec, axis: AxisGrid):
    if spec.kind == "grid":
        return load_phase(spec.path)
    return sample_symbol(spec.poly(), axis)


def _write_out(data: bytes, out: Optional[str]):
    if out:
        with open(out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.write(data.decode())


def _cmd_weights(args) -> int:
    if args.weights_file:
        w = load_weights(args.weights_file)
    elif args.gevrey is not None:
        w = WeightSequence.gevrey(args.gevrey, truncation=args.truncation)
    else:
        raise UwqError("give --gevrey S or --weights-file PATH")
    lines = []
    if args.check:
        rep = check_conditions(w)
        lines.append(f"# m1_ok={rep.m1_ok} m2_H={rep.m2_H} m2_c0={rep.m2_c0} "
                     f"m3_ok={rep.m3_ok} m3_c0={rep.m3_c0}")
    lines.append("rho,M,saturated")
    for tok in (args.rho or "").split(","):
        if not tok:
            continue
        rho = float(tok)
        res = assoc_fn(w, rho)
        lines.append(f"{rho:.17g},{res.value:.17g},{int(res.saturated)}")
    _write_out(("\n".join(lines) + "\n").encode(), args.out)
    return 0


def _cmd_stft(args) -> int:
    if args.inverse:
        F = load_phase(getattr(args, "in"))
        u = stft_adjoint(F)
        d = F.xaxis.d
        out = FunctionGrid(F.xaxis, u.values / (2.0 * math.pi) ** d)
        save_function(out, args.out)
    else:
        u = load_function(getattr(args, "in"))
        save_phase(stft(u), args.out)
    return 0


def _save_operator(M, path):
    ax = M.axis
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# n={ax.n} L={ax.L:.17g} d={ax.d} kind=operator\n")
        N = ax.size
        for r in range(N):
            for c in range(N):
                v = M.entries[r, c]
                fh.write(f"{r},{c},{v.real:.17g},{v.imag:.17g}\n")


def _cmd_quantize(args) -> int:
    spec = load_symbol(args.symbol)
    axis = _axis_from_args(args, d=spec.d if spec.kind != "grid" else None)
    if spec.kind == "grid":
        a = load_phase(spec.path)
        M = operator_matrix(kernel_from_symbol(a, args.tau))
    else:
        M = operator_matrix(kernel_from_symbol(spec.poly(), args.tau, axis))
    if not args.out:
        raise UwqError("--out is required for operator output")
    _save_operator(M, args.out)
    return 0


def _cmd_antiwick(args) -> int:
    spec = load_symbol(args.symbol)
    axis = _axis_from_args(args, d=spec.d if spec.kind != "grid" else None)
    a = _symbol_grid(spec, axis)
    if args.verify_smoothing:
        rep = verify_smoothing_identity(a)
        sys.stdout.write(f"max_err {rep['max_err']:.6e} (full matrix {rep['max_err_full']:.6e})\n")
        return 0
    if not args.out:
        raise UwqError("--out is required for operator output")
    _save_operator(anti_wick_matrix(a), args.out)
    return 0


def _print_poly_table(polys, out):
    lines = ["order,monomial,re,im"]
    for order, p in enumerate(polys):
        if p.is_zero():
            continue
        for (xe, ke), c in p.sorted_terms():
            mono = "".join([f"x{i}^{e}" for i, e in enumerate(xe) if e]
                           + [f"xi{i}^{e}" for i, e in enumerate(ke) if e]) or "1"
            lines.append(f"{order},{mono},{c.real:.17g},{c.imag:.17g}")
    _write_out(("\n".join(lines) + "\n").encode(), out)


def _cmd_expand(args) -> int:
    spec = load_symbol(args.symbol)
    a = spec.poly()
    theorem = args.theorem
    if theorem == "aw":
        e = aw_to_weyl_terms(a, args.max_order)
        _print_poly_table(e.terms, args.out)
    elif theorem == "inverse":
        res = inverse_aw_recursion(a, args.max_order)
        _print_poly_table([res.a], args.out)
    elif theorem.startswith("tau:"):
        _, t1, t = theorem.split(":")
        _print_poly_table([tau_change_terms(a, float(t1), float(t))], args.out)
    elif theorem.startswith("transpose:"):
        _, t = theorem.split(":")
        _print_poly_table([transpose_terms(a, float(t))], args.out)
    elif theorem.startswith("compose:"):
        other = load_symbol(theorem.split(":", 1)[1]).poly()
        _print_poly_table([compose_terms(a, other)], args.out)
    else:
        raise UwqError("theorem must be aw, inverse, tau:T1:T, transpose:T, or compose:PATH")
    return 0


def _parse_density(spec: str) -> CompactDensity:
    parts = spec.split(":")
    if parts[0] == "indicator" and len(parts) == 3:
        return CompactDensity.indicator(float(parts[1]), float(parts[2]))
    if parts[0] == "bump" and len(parts) == 3:
        return CompactDensity.gaussian_bump(float(parts[1]), float(parts[2]))
    if parts[0] == "polybump" and len(parts) == 4:
        coeffs = [float(v) for v in parts[1].split(",")]
        return CompactDensity.poly_times_bump(coeffs, float(parts[2]), float(parts[3]))
    raise UwqError("density must be indicator:lo:hi, bump:lo:hi, or polybump:c0,c1,..:lo:hi")


def _cmd_gaussconv(args) -> int:
    S = _parse_density(args.density)
    a, b, step = (float(v) for v in args.x.split(":"))
    xs = np.arange(a, b + 0.5 * step, step)
    lines = ["x,via_laplace,direct,relerr"]
    for xv in xs:
        via = conv_gauss_via_laplace(S, args.s, xv)
        if args.compare:
            direct = conv_gauss_direct(S, args.s, xv)
            rel = abs(via - direct) / (1.0 + abs(direct))
            lines.append(f"{xv:.17g},{via.real:.17g},{direct.real:.17g},{rel:.6e}")
        else:
            lines.append(f"{xv:.17g},{via.real:.17g},,")
    _write_out(("\n".join(lines) + "\n").encode(), args.out)
    return 0


def _cmd_laplace(args) -> int:
    S = _parse_density(args.density)
    re, im = (float(v) for v in args.zeta.split(":"))
    val = laplace(S, complex(re, im))
    sys.stdout.write(f"{val.real:.17g}{val.imag:+.17g}j\n")
    return 0


def _cmd_osc_kernel(args) -> int:
    spec = load_symbol(args.symbol)
    chi = load_function(args.chi)
    deltas = [float(v) for v in args.deltas.split(",")]
    if spec.kind == "example5":
        P = spec.poly()
        l = spec.l
        d = spec.d
        pref = (1.0 - l) ** (-d / 2.0)
        from .expansion import heat_quarter

        smoothed = heat_quarter(P, +1)

        def fxi(k):
            return smoothed.evaluate((np.zeros(1),), (k,))

        sym = SeparableSymbol(fx=lambda m: pref * np.exp(l * m**2 / (1.0 - l)),
                              fxi=fxi)
    else:
        sym = spec.poly()
    rep = oscillatory_kernel(sym, chi, deltas)
    lines = ["delta,re,im,cauchy_diff"]
    for i, (dl, v) in enumerate(zip(rep.deltas, rep.values)):
        dstr = f"{rep.diffs[i-1]:.6e}" if i > 0 else ""
        lines.append(f"{dl:.17g},{v.real:.17g},{v.imag:.17g},{dstr}")
    lines.append(f"extrapolated,{rep.extrapolated.real:.17g},{rep.extrapolated.imag:.17g},")
    _write_out(("\n".join(lines) + "\n").encode(), args.out)
    return 0


def _cmd_verify(args) -> int:
    params = SuiteParams(
        n=args.n or constants.DEFAULT_N_1D,
        L=args.L or constants.DEFAULT_L_1D,
        d=args.d,
    )
    reports = run_verify(args.suite, params, parallel=args.parallel)
    header = report_header(params)
    if args.json:
        _write_out(emit_report(reports, "json", header), args.out)
    else:
        lines = [f"# {k}={v}" for k, v in header.items()]
        lines.append(f"{'criterion':34s} {'status':6s} {'measured':>12s} {'tolerance':>12s} {'ms':>8s}")
        for r in reports:
            lines.append(f"{r.name:34s} {r.status:6s} {r.measured:12.4e} "
                         f"{r.tolerance:12.4e} {r.runtime_ms:8.1f}")
        _write_out(("\n".join(lines) + "\n").encode(), args.out)
    return 0 if all(r.status == "pass" for r in reports) else 1


def main(argv=None) -> int:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=None, help="grid points per axis")
    common.add_argument("--L", type=float, default=None, help="box half-width")
    common.add_argument("--d", type=int, default=1, help="dimension (1 or 2)")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--out", default=None, help="output file (default stdout)")

    ap = argparse.ArgumentParser(prog="uwq",
                                 description="quantization toolkit on discretized phase space")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("weights", parents=[common], help="weight-sequence table and checks")
    p.add_argument("--gevrey", type=float, default=None)
    p.add_argument("--weights-file", default=None)
    p.add_argument("--truncation", type=int, default=constants.WEIGHTS_TRUNCATION)
    p.add_argument("--check", action="store_true")
    p.add_argument("--rho", default="")
    p.set_defaults(fn=_cmd_weights)

    p = sub.add_parser("stft", parents=[common], help="short-time Fourier transform")
    p.add_argument("--in", required=True)
    p.add_argument("--inverse", action="store_true")
    p.set_defaults(fn=_cmd_stft)

    p = sub.add_parser("quantize", parents=[common], help="tau-quantization operator matrix")
    p.add_argument("--symbol", required=True)
    p.add_argument("--tau", type=float, required=True)
    p.set_defaults(fn=_cmd_quantize)

    p = sub.add_parser("antiwick", parents=[common], help="Anti-Wick operator matrix")
    p.add_argument("--symbol", required=True)
    p.add_argument("--verify-smoothing", action="store_true",
                   help="report the discrepancy against the smoothed Weyl matrix")
    p.set_defaults(fn=_cmd_antiwick)

    p = sub.add_parser("expand", parents=[common], help="symbol expansion tables")
    p.add_argument("--symbol", required=True)
    p.add_argument("--theorem", required=True,
                   help="aw | inverse | tau:T1:T | transpose:T | compose:PATH")
    p.add_argument("--max-order", type=int, default=None)
    p.set_defaults(fn=_cmd_expand)

    p = sub.add_parser("gaussconv", parents=[common], help="Gaussian convolution identity")
    p.add_argument("--density", required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--x", required=True, help="a:b:step evaluation grid")
    p.add_argument("--compare", action="store_true")
    p.set_defaults(fn=_cmd_gaussconv)

    p = sub.add_parser("laplace", parents=[common], help="Laplace transform of a density")
    p.add_argument("--density", required=True)
    p.add_argument("--zeta", required=True, help="re:im")
    p.set_defaults(fn=_cmd_laplace)

    p = sub.add_parser("osc-kernel", parents=[common], help="regularized kernel pairing")
    p.add_argument("--symbol", required=True)
    p.add_argument("--chi", required=True)
    p.add_argument("--deltas", required=True)
    p.set_defaults(fn=_cmd_osc_kernel)

    p = sub.add_parser("verify", parents=[common], help="run identity suites")
    p.add_argument("--suite", default="all")
    p.add_argument("--parallel", action="store_true")
    p.set_defaults(fn=_cmd_verify)

    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except UwqError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
