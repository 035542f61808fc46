"""Command-line front end.

Exit codes: 0 success, 1 check failure, 2 configuration error, 3 numerical
non-convergence.  Floats are written with 17 significant digits.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import verify as verify_mod
from .defect import Cutoff, DefectG, Deformation, cutoff_radial, g_deriv, g_eval, zeta_eval
from .expr import ExprParseError
from .extensions import ExtensionU, RatioExtractionError, classify, extension_spectrum
from .fields import FieldSpecError, FluxParams, RadialPerp, Zero, field_from_spec, load_field_spec
from .forms import (
    ChargeExtractionError,
    DivergentForm,
    FormDecomposition,
    FormParams,
    NearZeroDenominator,
    NoRootError,
    QuadSpec,
    VariantMismatch,
    expr_function,
    lower_bound_point,
    q_beta,
    q_beta_bounded,
)
from .harmonic import RadialOperatorSpec, decompose, log_grid, write_modes_csv
from .quadrature import ToleranceNotMet
from .radial import InconclusiveError, OriginCondition, StiffnessError, shoot_eigenvalues
from .specfun import NonConvergenceError

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

_NUMERIC_ERRORS = (
    ToleranceNotMet,
    StiffnessError,
    NoRootError,
    NonConvergenceError,
    InconclusiveError,
    RatioExtractionError,
    ChargeExtractionError,
    NearZeroDenominator,
    DivergentForm,
)


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def fmt_float(v: float) -> str:
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.17g}"


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return fmt_float(v) if math.isfinite(v) else json.dumps(fmt_float(v))
    if isinstance(obj, (complex, np.complexfloating)):
        return _encode([obj.real, obj.imag], indent, level)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(obj[k], indent, level + 1)}" for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [f"{pad}{_encode(v, indent, level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dump_json(obj) -> str:
    """JSON with sorted keys, 17-digit floats, non-finite floats as strings, complex as [re, im]."""
    return _encode(obj, 2, 0) + "\n"


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return fmt_float(float(v))
    return str(v)


def dump_csv(header: list[str], rows: list) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_cell(v) for v in row) + "\n")
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _table(args, header: list[str], rows: list) -> None:
    if args.format == "json":
        _emit(dump_json([dict(zip(header, r)) for r in rows]), args.out)
    else:
        _emit(dump_csv(header, rows), args.out)


# ---------------------------------------------------------------------------
# Argument helpers
# ---------------------------------------------------------------------------


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as err:
        raise ConfigError(f"{what}: cannot parse {text!r} as comma-separated numbers") from err


def _ints(text: str, what: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as err:
        raise ConfigError(f"{what}: cannot parse {text!r} as comma-separated integers") from err


def _complex(text: str, what: str) -> complex:
    vals = _floats(text, what)
    if len(vals) == 1:
        return complex(vals[0])
    if len(vals) != 2:
        raise ConfigError(f"{what}: expected 're' or 're,im'")
    return complex(vals[0], vals[1])


def _alpha(value: float) -> float:
    if not 0.0 < value < 1.0:
        raise ConfigError(f"--alpha must lie in (0, 1), got {value}")
    return value


def _read_json(path: str):
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"{path}: no such file")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}: line {err.lineno} column {err.colno}: {err.msg}") from err


def _u_from_dict(d: dict, where: str) -> ExtensionU:
    try:
        a = complex(*d["a"]) if isinstance(d["a"], list) else complex(d["a"])
        b = d.get("b", [0.0, 0.0])
        b = complex(*b) if isinstance(b, list) else complex(b)
        return ExtensionU(float(d["eta"]), a, b)
    except (KeyError, TypeError) as err:
        raise ConfigError(f"{where}: U needs 'eta', 'a' = [re, im] and optional 'b' = [re, im]") from err
    except ValueError as err:
        raise ConfigError(f"{where}: {err}") from err


def _u_from_args(args) -> ExtensionU | None:
    if getattr(args, "u", None):
        return _u_from_dict(_read_json(args.u), args.u)
    if args.u_eta is None and args.u_a is None:
        return None
    if args.u_eta is None or args.u_a is None:
        raise ConfigError("--u-eta and --u-a must be given together")
    try:
        return ExtensionU(args.u_eta, _complex(args.u_a, "--u-a"), _complex(args.u_b or "0", "--u-b"))
    except ValueError as err:
        raise ConfigError(str(err)) from err


def _field(path: str | None):
    if path is None:
        return Zero()
    if not Path(path).is_file():
        raise ConfigError(f"{path}: no such file")
    return load_field_spec(path)


def _u_label(U: ExtensionU) -> str:
    a, b = complex(U.a), complex(U.b)
    return "U:" + ";".join(fmt_float(v) for v in (U.eta, a.real, a.imag, b.real, b.imag))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_verify(args) -> int:
    only = args.only.split(",") if args.only else None
    report = verify_mod.run_suite(seed=args.seed, jobs=args.jobs, only=only)
    _emit(dump_json(report), args.out)
    return verify_mod.exit_status(report)


def _spectrum_task(task) -> list:
    kind, alpha, k, label, payload, field_path, window, tol = task
    # fields hold closures, so workers rebuild them from the file
    field = _field(field_path)
    if kind == "U":
        U, s0 = payload
        res = extension_spectrum(U, alpha, s0, window, tol=tol)
        rows = []
        for p in res.eigenpairs:
            sector = "mixed" if p.nodes == 2 else p.nodes
            rows.append([alpha, sector, label, p.energy, math.sqrt(s0 * s0 - p.energy), p.residual, ""])
        return rows
    S = field
    spec = RadialOperatorSpec.from_perturbation(k, alpha, S if isinstance(S, RadialPerp) else None)
    bc = OriginCondition.friedrichs() if k != 0 else OriginCondition.from_beta(payload, spec.s0)
    res = shoot_eigenvalues(spec, bc, window, tol=tol)
    return [[alpha, k, label, p.energy, p.lam, p.residual, p.nodes] for p in res.eigenpairs]


def _check_field_for_radial(S) -> None:
    if not isinstance(S, (Zero, RadialPerp)):
        raise ConfigError("spectrum needs a 'zero' or 'radial_perp' field")


def _constant_s0(S) -> float:
    if isinstance(S, Zero):
        return 0.0
    r = np.geomspace(1e-3, 50.0, 64)
    vals = np.asarray(S.S(r), dtype=float)
    if np.max(np.abs(vals - S.s0)) > 1e-12 * max(1.0, abs(S.s0)):
        raise ConfigError("extension spectra are available for constant S only")
    return S.s0


def cmd_spectrum(args) -> int:
    alphas = [_alpha(a) for a in _floats(args.alpha, "--alpha")]
    ks = _ints(args.k, "--k")
    window = tuple(_floats(args.window, "--window"))
    if len(window) != 2:
        raise ConfigError("--window needs Emin,Emax")
    S = _field(args.field)
    _check_field_for_radial(S)
    U = _u_from_args(args)
    if args.beta_inf:
        betas = [math.inf]
    elif args.beta is not None:
        betas = _floats(args.beta, "--beta")
    else:
        betas = []
    if U is None and not betas:
        raise ConfigError("spectrum needs --beta, --beta-inf or a U (--u-eta/--u-a/--u-b)")
    if U is not None and betas:
        raise ConfigError("give either beta or U, not both")
    tasks = []
    for a in alphas:
        if U is not None:
            tasks.append(("U", a, None, _u_label(U), (U, _constant_s0(S)), args.field, window, args.tol))
            continue
        for k in ks:
            for beta in betas if k == 0 else [math.inf]:
                tasks.append(("beta", a, k, beta, beta, args.field, window, args.tol))
    rows = [row for chunk in _map(_spectrum_task, tasks, args.jobs) for row in chunk]
    rows.sort(key=lambda r: (r[0], r[1] if isinstance(r[1], int) else 99, r[2], r[3]))
    _table(args, ["alpha", "k", "beta_or_U", "E", "lambda", "residual", "nodes"], rows)
    return EXIT_OK


def _map(fn, tasks: list, jobs: int) -> list:
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


def cmd_defect(args) -> int:
    alpha = _alpha(args.alpha)
    if not args.lam > 0:
        raise ConfigError("--lam must be positive")
    if args.cutoff:
        r1r2 = _floats(args.cutoff, "--cutoff")
        if len(r1r2) != 2 or not 0 < r1r2[0] < r1r2[1]:
            raise ConfigError("--cutoff needs r1,r2 with 0 < r1 < r2")
        cut = Cutoff(*r1r2)
    else:
        cut = Cutoff.default(args.lam)
    r_min, r_max = _floats(args.range, "--range")
    r = log_grid(r_min, r_max, args.n)
    d = DefectG(alpha, args.lam)
    chi = cutoff_radial(cut, r)[0]
    zeta = zeta_eval(Deformation(alpha, args.s_perp0), r)[0]
    rows = list(zip(r, g_eval(d, r), g_deriv(d, r), chi, zeta))
    _table(args, ["r", "G", "dG", "chi", "zeta"], rows)
    return EXIT_OK


def _form_config(doc: dict, where: str):
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: expected a JSON object")
    try:
        alpha = _alpha(float(doc["alpha"]))
        beta = doc["beta"]
        beta = math.inf if beta == "inf" else float(beta)
        psi = doc["psi"]
        regular = psi["regular"]
        charge = psi.get("charge", [0.0, 0.0])
        charge = complex(*charge) if isinstance(charge, list) else complex(charge)
        lam = float(psi.get("lambda", 1.0))
        deformed = bool(psi.get("deformed", False))
    except KeyError as err:
        raise ConfigError(f"{where}: missing key {err.args[0]!r}") from err
    except (TypeError, ValueError) as err:
        raise ConfigError(f"{where}: {err}") from err
    pert = doc.get("perturbation")
    S = Zero() if pert is None else field_from_spec(pert)
    q = doc.get("quad", {})
    quad = QuadSpec(float(q.get("rel_tol", 1e-10)), int(q.get("angular_nodes", 48)))
    cut = doc.get("cutoff")
    if cut == "identity":
        cut = Cutoff.identity()
    elif cut is not None:
        try:
            cut = Cutoff(float(cut[0]), float(cut[1]))
        except (TypeError, ValueError, IndexError) as err:
            raise ConfigError(f"{where}: cutoff must be 'identity' or [r1, r2]") from err
    decay = float(psi.get("decay", 1.0))
    phi = expr_function(regular, psi.get("origin_exponent"), decay)
    if phi.origin_exponent <= 0.0:
        # A psi / r is not square integrable unless the regular part vanishes at 0
        raise ConfigError(f"{where}: psi.regular must vanish at the origin (origin exponent > 0)")
    return alpha, beta, S, quad, cut, FormDecomposition(phi, charge, lam, deformed), regular


def cmd_form(args) -> int:
    doc = _read_json(args.config)
    alpha, beta, S, quad, cut, dec, regular = _form_config(doc, args.config)
    params = FormParams(beta, FluxParams(alpha), S, cut)
    try:
        if cut is not None and cut.is_identity:
            val = q_beta_bounded(params, dec, quad)
        else:
            val = q_beta(params, dec, quad)
    except VariantMismatch as err:
        raise ConfigError(str(err)) from err
    if args.modes:
        grid = log_grid(*_floats(args.mode_range, "--mode-range")[:2], args.mode_points)
        f = expr_function(regular)
        modes = decompose(lambda x, y: f(x, y)[0], args.k_max, grid)
        write_modes_csv(modes, args.modes)
    out = {"value": val.value, "terms": val.terms, "diagnostics": val.diagnostics}
    _emit(dump_json(out), args.out)
    return EXIT_OK


def cmd_bound(args) -> int:
    alpha = _alpha(args.alpha)
    if not alpha < 0.5:
        raise ConfigError("the lower bound needs alpha < 1/2")
    betas = _floats(args.beta, "--beta")
    if args.field:
        S = _field(args.field)
        sup = getattr(S, "sup_bound", 0.0)
        if not math.isfinite(sup):
            raise ConfigError("the field file must carry a finite 'sup'")
    else:
        sup = args.sup
    rows = []
    for beta, p in zip(betas, _map(_bound_task, [(alpha, b, sup) for b in betas], args.jobs)):
        rows.append([alpha, beta, sup, p.lambda_star, p.bound, p.eps, p.eta])
    rows.sort(key=lambda r: r[1])
    _table(args, ["alpha", "beta", "sup_s", "lambda_star", "bound", "eps", "eta"], rows)
    return EXIT_OK


def _bound_task(t):
    return lower_bound_point(*t)


def cmd_classify(args) -> int:
    U = _u_from_args(args)
    if U is None:
        raise ConfigError("classify needs --u <file> or --u-eta/--u-a/--u-b")
    alpha = None if args.alpha is None else _alpha(args.alpha)
    out = classify(U, alpha, args.s0)
    out["U"] = {"eta": U.eta, "a": complex(U.a), "b": complex(U.b)}
    _emit(dump_json(out), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="anyonext", description="Aharonov-Bohm operators with point interactions")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt: bool = True):
        sp.add_argument("--out", help="output path (default: stdout)")
        if fmt:
            sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes")

    def u_flags(sp):
        sp.add_argument("--u", help="JSON file {eta, a: [re, im], b: [re, im]}")
        sp.add_argument("--u-eta", type=float)
        sp.add_argument("--u-a", help="re,im")
        sp.add_argument("--u-b", help="re,im")

    v = sub.add_parser("verify", help="run the invariant suite")
    v.add_argument("--seed", type=int, default=1)
    v.add_argument("--only", help="comma-separated check-name prefixes")
    common(v, fmt=False)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("spectrum", help="bound states below the essential spectrum")
    s.add_argument("--alpha", required=True, help="comma-separated flux values")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--beta", help="comma-separated beta values")
    g.add_argument("--beta-inf", action="store_true", help="Friedrichs condition")
    u_flags(s)
    s.add_argument("--k", default="0", help="comma-separated angular momenta")
    s.add_argument("--field", help="field-spec JSON file")
    s.add_argument("--window", default="-100,-1e-6", help="Emin,Emax")
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--seed", type=int, default=1)
    common(s)
    s.set_defaults(func=cmd_spectrum)

    d = sub.add_parser("defect", help="sample G, G', chi and zeta")
    d.add_argument("--alpha", type=float, required=True)
    d.add_argument("--lam", type=float, default=1.0)
    d.add_argument("--s-perp0", type=float, default=0.0)
    d.add_argument("--cutoff", help="r1,r2 (default 0.5/lam,2/lam)")
    d.add_argument("--range", default="1e-3,10", help="rmin,rmax")
    d.add_argument("--n", type=int, default=200)
    common(d)
    d.set_defaults(func=cmd_defect)

    f = sub.add_parser("form", help="evaluate the quadratic form on a state")
    f.add_argument("config", help="form JSON file")
    f.add_argument("--modes", help="also write the harmonic modes of the regular part to this CSV")
    f.add_argument("--k-max", type=int, default=4)
    f.add_argument("--mode-range", default="1e-2,10")
    f.add_argument("--mode-points", type=int, default=200)
    common(f, fmt=False)
    f.set_defaults(func=cmd_form)

    b = sub.add_parser("bound", help="lower bound and lambda* over a beta grid")
    b.add_argument("--alpha", type=float, required=True)
    b.add_argument("--beta", required=True, help="comma-separated beta values")
    b.add_argument("--sup", type=float, default=0.0, help="sup norm of S")
    b.add_argument("--field", help="field-spec JSON file; its 'sup' replaces --sup")
    common(b)
    b.set_defaults(func=cmd_bound)

    c = sub.add_parser("classify", help="classify an extension unitary")
    u_flags(c)
    c.add_argument("--alpha", type=float)
    c.add_argument("--s0", type=float, default=0.0)
    c.add_argument("--out")
    c.set_defaults(func=cmd_classify)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        parser.error("--jobs must be at least 1")
    try:
        return args.func(args)
    except (ConfigError, FieldSpecError, ExprParseError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except _NUMERIC_ERRORS as err:
        print(f"numerical error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
