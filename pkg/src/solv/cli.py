"""Command-line front end: ``solv verify | expand | curvature | mesh``.

Exit codes: 0 success (for ``verify``, the report passed), 1 a verification
report failed, 2 singular or out-of-domain evaluation, 3 invalid input or
I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from solv import curvature as CV
from solv import families as FAM
from solv import oracle as OR
from solv import verify as V
from solv.errors import BindingError, DomainError, FormError, ParseError, SingularityError, SolvError
from solv.numdiff import FDConfig
from solv.symtrig import expr as E

EXIT_OK, EXIT_FAIL, EXIT_SINGULAR, EXIT_INPUT = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


# -- helpers -------------------------------------------------------------------------


def _load_spec(path: str) -> FAM.FamilySpec:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read spec {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"spec {path} is not valid JSON: {exc}") from None
    try:
        return FAM.FamilySpec.from_dict(data)
    except DomainError as exc:
        raise CliError(str(exc), EXIT_SINGULAR) from None
    except (ValueError, TypeError) as exc:
        raise CliError(f"invalid family spec: {exc}") from None


def _chart(spec: FAM.FamilySpec, normal: str | None) -> CV.SurfaceChart:
    try:
        chart = spec.chart()
    except ParseError as exc:
        raise CliError(f"bad expression in spec: {exc}") from None
    except DomainError as exc:
        raise CliError(str(exc), EXIT_SINGULAR) from None
    except (ValueError, TypeError) as exc:
        raise CliError(f"invalid family spec: {exc}") from None
    if normal == "cross" or (normal == "preset" and chart.normal is None):
        chart = chart.with_normal(None)
    return chart


def _normal_mode(chart: CV.SurfaceChart, requested: str | None) -> str:
    if requested is None:
        return "preset" if chart.normal is not None else "cross"
    return "preset" if requested == "preset" and chart.normal is not None else "cross"


def _emit(payload: dict, fmt: str, pretty) -> None:
    if fmt == "json":
        print(json.dumps(payload, indent=2, sort_keys=False))
    else:
        print(pretty(payload))


def _parse_point(text: str) -> tuple[float, float]:
    try:
        s, t = (float(v) for v in text.split(","))
    except ValueError:
        raise CliError(f"--at expects 's,t', got {text!r}") from None
    return s, t


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        nu, nv = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise CliError(f"--grid expects NUxNV, got {text!r}") from None
    return nu, nv


def _tol(args) -> float:
    if args.tol is not None:
        return args.tol
    try:
        tol = V.default_tol()
    except ValueError:
        raise CliError("SOLV_TOL must be a positive number") from None
    if not tol > 0:
        raise CliError("SOLV_TOL must be a positive number")
    return tol


# -- verify --------------------------------------------------------------------------


def _pretty_report(d: dict) -> str:
    lines = [f"{d['theorem']}: {'PASS' if d['pass'] else 'FAIL'} ({d['wall_time_ms']:.0f} ms)"]
    for c in d["checks"]:
        mark = "ok  " if c["pass"] else "FAIL"
        lines.append(f"  [{mark}] {c['name']} ({c['kind']}): expected {c['expected']}; got {c['got']}")
    for n in d["notes"]:
        mark = "match" if n["match"] else "differs"
        lines.append(f"  note {n['name']}: reference {n['expected']}, computed {n['got']} ({mark})")
    return "\n".join(lines)


def cmd_verify(args) -> int:
    report = V.run(args.theorem, _tol(args), args.seed)
    _emit(report.as_dict(), args.format, _pretty_report)
    return EXIT_OK if report.passed else EXIT_FAIL


# -- expand --------------------------------------------------------------------------


def _pretty_form(d: dict) -> str:
    lines = [f"{d['family']} {d['target']}-numerator, normal {d['normal']}"]
    if d["form"] == "fourier":
        f = d["fourier"]
        lines.append(f"cleared by ({f['denominator']})^{f['denominator_power']}, degree k = {f['k']}")
        for i, a in enumerate(f["A"]):
            if a != "0":
                lines.append(f"  A{i} = {a}")
        for i, b in enumerate(f["B"], start=1):
            if b != "0":
                lines.append(f"  B{i} = {b}")
        for name, c in f["content"].items():
            lines.append(f"  content {name}: {c['factor']} * {c['monomial']} * ({c['rest']})")
    else:
        q = d["quasipoly"]
        lines.append(f"cleared by ({q['denominator']})^{q['denominator_power']}")
        for term in q["terms"]:
            lines.append(f"  t^{term['n']} e^({term['w']}t): {term['coefficient']}")
    return "\n".join(lines)


def cmd_expand(args) -> int:
    spec = _load_spec(args.spec)
    chart = _chart(spec, args.normal)
    mode = _normal_mode(chart, args.normal)
    payload = {"family": spec.family, "target": args.target, "normal": mode}
    try:
        try:
            form = CV.fourier(chart, args.target, mode)
            payload["form"] = "fourier"
            payload["fourier"] = form.to_dict()
        except FormError:
            qform = CV.quasipoly(chart, args.target, mode)
            payload["form"] = "quasipoly"
            payload["quasipoly"] = qform.to_dict()
    except FormError as exc:
        raise CliError(f"numerator has neither a trigonometric nor a quasi-polynomial form in t: {exc}") from None
    _emit(payload, args.format, _pretty_form)
    return EXIT_OK


# -- curvature -----------------------------------------------------------------------


def _symbolic_curvatures(chart: CV.SurfaceChart, s: float, t: float, mode: str) -> tuple[float, float]:
    """H and K from the printed numerator expressions and the symbolic E, F, G, normal."""
    data = CV.fundamental_data(chart, mode)
    env = chart.env()

    def val(e):
        return E.evaluate(e, s, t, env)

    h = val(CV.h_numerator(chart, mode))
    k = val(CV.k_numerator(chart, mode))
    det = val(data.E) * val(data.G) - val(data.F) ** 2
    if det <= CV.DEGENERACY_TOL:
        raise SingularityError(f"degenerate metric at s={s}, t={t}: EG-F^2={det:.3e}")
    norm = math.sqrt(sum(val(c) ** 2 for c in data.Ntilde))
    if norm <= CV.DEGENERACY_TOL:
        raise SingularityError(f"vanishing normal at s={s}, t={t}")
    return h / (2 * det * norm), k / (det * norm * norm)


def cmd_curvature(args) -> int:
    spec = _load_spec(args.spec)
    chart = _chart(spec, args.normal)
    mode = _normal_mode(chart, args.normal)
    s, t = _parse_point(args.at)
    payload = {"family": spec.family, "s": s, "t": t, "method": args.method}
    try:
        chart.point(s, t)
        if args.method == "symbolic":
            H, K = _symbolic_curvatures(chart, s, t, mode)
            payload["normal"] = mode
        elif args.method == "numeric":
            H, K = CV.curvatures_numeric(chart, s, t, normal_choice=mode)
            payload["normal"] = mode
        else:
            cfg = FDConfig()
            oc = OR.curvatures_fd(chart, s, t, cfg=cfg)
            H, K = oc.H, oc.K_paper
            payload["K_intrinsic"] = OR.intrinsic_gauss_fd(chart, s, t, cfg=cfg)
    except BindingError as exc:
        raise CliError(f"spec leaves a symbol unbound: {exc}") from None
    except (SingularityError, DomainError, ArithmeticError) as exc:
        raise CliError(f"singular point: {exc}", EXIT_SINGULAR) from None
    payload["H"] = H
    payload["K_paper"] = K
    if "K_intrinsic" in payload:
        payload["K_intrinsic"] = payload.pop("K_intrinsic")

    def pretty(d):
        parts = [f"H = {d['H']:.12g}", f"K_paper = {d['K_paper']:.12g}"]
        if "K_intrinsic" in d:
            parts.append(f"K_intrinsic = {d['K_intrinsic']:.12g}")
        return f"{d['family']} at (s, t) = ({s:g}, {t:g}) [{d['method']}]: " + ", ".join(parts)

    _emit(payload, args.format, pretty)
    return EXIT_OK


# -- mesh ----------------------------------------------------------------------------


def _samples(lo: float, hi: float, n: int) -> list[float]:
    if n == 1:
        return [(lo + hi) / 2]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def _fmt(v: float) -> str:
    text = repr(float(v))
    return "0.0" if text == "-0.0" else text


def mesh_obj(chart: CV.SurfaceChart, nu: int, nv: int, curve: bool = False) -> str:
    """OBJ text for an nu x nv sample grid, rows running over s.

    Faces are the grid quads split along the diagonal from (i, j) to
    (i+1, j+1). With ``curve`` each s-row becomes an ``l`` polyline instead.
    """
    env = chart.env()
    lines = []
    for s in _samples(*chart.s_domain, nu):
        for t in _samples(*chart.t_domain, nv):
            try:
                x, y, z = (E.evaluate(c, s, t, env) for c in chart.X)
            except BindingError:
                raise
            except (ArithmeticError, ValueError) as exc:
                raise DomainError(f"chart undefined at s={s:.6g}, t={t:.6g}: {exc}") from None
            if not all(math.isfinite(v) for v in (x, y, z)):
                raise DomainError(f"chart not finite at s={s:.6g}, t={t:.6g}")
            lines.append(f"v {_fmt(x)} {_fmt(y)} {_fmt(z)}")
    if curve:
        for i in range(nu):
            lines.append("l " + " ".join(str(i * nv + j + 1) for j in range(nv)))
    else:
        for i in range(nu - 1):
            for j in range(nv - 1):
                a = i * nv + j + 1
                b, c, d = a + 1, a + nv, a + nv + 1
                lines.append(f"f {a} {c} {d}")
                lines.append(f"f {a} {d} {b}")
    return "\n".join(lines) + "\n"


def cmd_mesh(args) -> int:
    spec = _load_spec(args.spec)
    chart = _chart(spec, None)
    nu, nv = _parse_grid(args.grid)
    if args.curve:
        if nu < 1 or nv < 2:
            raise CliError("a curve export needs at least 1x2 samples")
    elif nu < 2 or nv < 2:
        raise CliError("a surface mesh needs a grid of at least 2x2")
    try:
        text = mesh_obj(chart, nu, nv, args.curve)
    except BindingError as exc:
        raise CliError(f"spec leaves a symbol unbound: {exc}") from None
    except DomainError as exc:
        raise CliError(str(exc), EXIT_SINGULAR) from None
    try:
        with open(args.output, "w", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(f"cannot write {args.output}: {exc}") from None
    return EXIT_OK


# -- entry point -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    def common_options(suppress: bool) -> argparse.ArgumentParser:
        # Subcommands repeat the options with suppressed defaults so that a
        # flag given before the subcommand is not reset by the subparser.
        def default(value):
            return argparse.SUPPRESS if suppress else value

        common = argparse.ArgumentParser(add_help=False)
        common.add_argument("--tol", type=float, default=default(None), help="numeric tolerance (default: $SOLV_TOL or 1e-8)")
        common.add_argument(
            "--normal", choices=("preset", "cross"), default=default(None), help="normal used for the second fundamental form"
        )
        common.add_argument("--seed", type=int, default=default(0), help="seed for randomized sampling")
        common.add_argument("--format", choices=("json", "pretty"), default=default("json"))
        return common

    common = common_options(True)
    parser = argparse.ArgumentParser(
        prog="solv", description="Curvature workbench for surfaces in Sol3.", parents=[common_options(False)]
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="run a theorem verification and print its report")
    p.add_argument("theorem", choices=V.THEOREMS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("expand", parents=[common], help="coefficient form of the H or K numerator")
    p.add_argument("--spec", required=True, help="family spec JSON file ('-' for stdin)")
    p.add_argument("--target", choices=("H", "K"), default="H")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("curvature", parents=[common], help="H and K at a point")
    p.add_argument("--spec", required=True)
    p.add_argument("--at", required=True, help="s,t")
    p.add_argument("--method", choices=("symbolic", "numeric", "oracle"), default="numeric")
    p.set_defaults(func=cmd_curvature)

    p = sub.add_parser("mesh", parents=[common], help="export a sampled chart as OBJ")
    p.add_argument("--spec", required=True)
    p.add_argument("--grid", required=True, help="NUxNV, e.g. 20x20")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--curve", action="store_true", help="write each s-row as a polyline")
    p.set_defaults(func=cmd_mesh)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.tol is not None and not args.tol > 0:
        parser.error("--tol must be positive")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"solv: error: {exc}", file=sys.stderr)
        return exc.code
    except SolvError as exc:
        print(f"solv: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
