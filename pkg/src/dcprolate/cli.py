"""Batch front end: solve, verify, emit-kernel, families.

Exit codes: 0 success, 1 invalid configuration, 2 solver failure, 3 I/O
error, 4 a verification defect above its tolerance.  Errors are written to
stderr as one JSON object.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .errors import ConstructionError, ContractError, DomainError, SolverError
from .kernels import (
    christoffel_darboux_defect, commutation_defect_continuous, commutation_defect_discrete, family_interval,
    family_quadrature, kernel_J, kernel_K, orthonormality_defect,
)
from .expr import MatrixExpr, var
from .operators import DifferentialOperator, FourierPair

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO, EXIT_VERIFY = 0, 1, 2, 3, 4

FAMILIES = {
    "hermite": {"support": "(-inf, inf)", "parameters": {}, "constraints": "none"},
    "laguerre": {"support": "(0, inf)", "parameters": {"a": "real"}, "constraints": "a > -1"},
    "jacobi": {"support": "(-1, 1)", "parameters": {"a": "real", "b": "real"},
               "constraints": "a > -1, b > -1"},
    "laguerre-darboux": {
        "support": "(0, inf)", "parameters": {"a": "real", "lambda": "real"},
        "constraints": "a > -1, lambda < 0, lambda + a < 0",
    },
    "hermite-matrix": {
        "support": "(-inf, inf)", "parameters": {"r": "integer", "A": "r*r reals, row-major"},
        "constraints": "A symmetric; A singular only for r = 1 (A = 0)",
    },
    "soliton": {
        "support": "(-inf, inf)", "parameters": {"nsol": "integer", "p": "integer"},
        "constraints": "nsol >= 1, 1 <= p <= nsol; band edge t, window p..nsol on (t, inf)",
    },
}

DEFAULTS = {
    "family": "hermite", "n": 6, "t": 0.5, "a": None, "b": None, "lambda": None,
    "nsol": 3, "p": 1, "r": None, "A": None, "N": 1, "seed": 0, "tol": None,
    "quad_panels": 80, "quad_points": 12, "trials": 8, "out": None, "perturb": 0.0,
    "grid": 21, "tolerances": None,
}

TOLERANCES = {"continuous": 1e-6, "discrete": 1e-8, "edges": 1e-8, "identity": 1e-7,
              "orthonormality": 1e-6, "closed_form": 1e-8}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# serialisation

def _fmt(v):
    v = float(v)
    if math.isnan(v) or math.isinf(v):
        return "null"
    return "%.17g" % v


def dumps(obj, indent=0, step=2):
    """JSON text with floats written to 17 significant digits."""
    pad, inner = " " * indent, " " * (indent + step)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(v, indent + step, step)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + dumps(v, indent + step, step) for v in obj) + "\n" + pad + "]"
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist(), indent, step)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(obj)
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def _matrix(M):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    return {"shape": list(M.shape), "values": M.ravel().tolist()}


# ---------------------------------------------------------------------------
# configuration

def _parser():
    p = argparse.ArgumentParser(prog="dcprolate", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("solve", "verify", "emit-kernel", "families"):
        s = sub.add_parser(name)
        if name == "families":
            continue
        s.add_argument("--config", help="JSON file; its keys override the flags")
        s.add_argument("--family", choices=sorted(FAMILIES))
        s.add_argument("--n", type=int)
        s.add_argument("--t", type=float)
        s.add_argument("--a", type=float)
        s.add_argument("--b", type=float)
        s.add_argument("--lambda", dest="lambda", type=float)
        s.add_argument("--nsol", type=int)
        s.add_argument("--p", type=int)
        s.add_argument("--r", type=int)
        s.add_argument("--A", help="comma separated entries of A, row-major")
        s.add_argument("--N", type=int, help="matrix size for the classical families")
        s.add_argument("--seed", type=int)
        s.add_argument("--tol", type=float, help="tolerance for both commutation defects")
        s.add_argument("--quad-panels", dest="quad_panels", type=int)
        s.add_argument("--quad-points", dest="quad_points", type=int)
        s.add_argument("--trials", type=int)
        s.add_argument("--perturb", type=float, help="relative perturbation (negative control)")
        s.add_argument("--grid", type=int, help="grid size for emitted kernel samples")
        s.add_argument("--out", help="output path (stdout when omitted)")
    return p


def load_config(args) -> dict:
    cfg = dict(DEFAULTS)
    for k, v in vars(args).items():
        if k in cfg and v is not None:
            cfg[k] = v
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                extra = json.load(fh)
        except OSError:
            raise
        except ValueError as e:
            raise ConfigError(f"config file is not valid JSON: {e}") from e
        if not isinstance(extra, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = sorted(set(extra) - set(cfg) - {"command"})
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        cfg.update({k: v for k, v in extra.items() if k != "command"})
    return validate(cfg)


def _need(cfg, key):
    if cfg.get(key) is None:
        raise ConfigError(f"family {cfg['family']} requires --{key}")
    return cfg[key]


def validate(cfg) -> dict:
    fam = cfg["family"]
    if fam not in FAMILIES:
        raise ConfigError(f"unknown family {fam!r}; choose from {', '.join(sorted(FAMILIES))}")
    for key in ("n", "nsol", "p", "seed", "quad_panels", "quad_points", "trials", "grid", "N"):
        v = cfg.get(key)
        if v is not None and (not isinstance(v, (int, np.integer)) or isinstance(v, bool)):
            raise ConfigError(f"{key} must be an integer, got {v!r}")
    if cfg["n"] < 0:
        raise ConfigError(f"n must be >= 0, got {cfg['n']}")
    if cfg["quad_panels"] < 1 or cfg["quad_points"] < 1 or cfg["trials"] < 1 or cfg["grid"] < 2:
        raise ConfigError("quad_panels, quad_points and trials must be >= 1 and grid >= 2")
    if not math.isfinite(float(cfg["t"])):
        raise ConfigError("t must be finite")
    if cfg["perturb"] is None or not math.isfinite(float(cfg["perturb"])):
        raise ConfigError("perturb must be a finite number")
    tol = dict(TOLERANCES)
    if cfg.get("tol") is not None:
        if not cfg["tol"] > 0:
            raise ConfigError(f"tol must be positive, got {cfg['tol']}")
        tol["continuous"] = tol["discrete"] = float(cfg["tol"])
    if cfg.get("tolerances"):
        bad = sorted(set(cfg["tolerances"]) - set(TOLERANCES))
        if bad:
            raise ConfigError(f"unknown tolerance names: {', '.join(bad)}")
        tol.update({k: float(v) for k, v in cfg["tolerances"].items()})
    cfg["tolerances"] = tol
    if fam in ("laguerre", "laguerre-darboux"):
        a = float(_need(cfg, "a"))
        if not a > -1:
            raise ConfigError(f"Laguerre parameter must satisfy a > -1, got a={a}")
    if fam == "jacobi":
        a, b = float(_need(cfg, "a")), float(_need(cfg, "b"))
        if not (a > -1 and b > -1):
            raise ConfigError(f"Jacobi parameters must satisfy a > -1 and b > -1, got a={a}, b={b}")
    if fam == "laguerre-darboux":
        lam = float(_need(cfg, "lambda"))
        if not (lam < 0 and lam + cfg["a"] < 0):
            raise ConfigError(f"laguerre-darboux requires lambda < 0 and lambda + a < 0, got lambda={lam}")
    if fam == "hermite-matrix":
        A = cfg["A"]
        if A is None:
            A = [1.0]
        if isinstance(A, str):
            try:
                A = [float(v) for v in A.split(",") if v.strip()]
            except ValueError as e:
                raise ConfigError(f"A entries must be numbers: {e}") from e
        A = np.asarray(A, dtype=float)
        if A.ndim == 1:
            r = cfg["r"] if cfg["r"] is not None else int(round(math.sqrt(A.size)))
            if r < 1 or A.size != r * r:
                raise ConfigError(f"A needs r*r entries, got {A.size} for r={r}")
            A = A.reshape(r, r)
        if cfg["r"] is not None and A.shape != (cfg["r"], cfg["r"]):
            raise ConfigError(f"A has shape {A.shape}, expected ({cfg['r']}, {cfg['r']})")
        if not np.allclose(A, A.T, rtol=0, atol=1e-14):
            raise ConfigError("A must be symmetric")
        cfg["A"] = A.tolist()
        cfg["r"] = A.shape[0]
    if fam == "soliton":
        if cfg["nsol"] < 1 or not (1 <= cfg["p"] <= cfg["nsol"]):
            raise ConfigError(f"soliton requires nsol >= 1 and 1 <= p <= nsol, got nsol={cfg['nsol']}, p={cfg['p']}")
    return cfg


def build_family(cfg):
    from . import darboux
    from .families import classical_triple

    fam = cfg["family"]
    if fam in ("hermite", "laguerre", "jacobi"):
        return classical_triple(fam, cfg["a"], cfg["b"], cfg["N"])
    if fam == "laguerre-darboux":
        return darboux.laguerre_darboux(cfg["a"], cfg["lambda"])
    if fam == "hermite-matrix":
        return darboux.hermite_matrix_darboux(cfg["A"])
    return darboux.soliton_family(cfg["nsol"], cfg["p"])


def family_params(cfg) -> dict:
    keys = {"hermite": ["N"], "laguerre": ["a", "N"], "jacobi": ["a", "b", "N"],
            "laguerre-darboux": ["a", "lambda"], "hermite-matrix": ["r", "A"],
            "soliton": ["nsol", "p"]}[cfg["family"]]
    return {k: cfg[k] for k in keys}


# ---------------------------------------------------------------------------
# solving and checking

def run_solver(fam, cfg):
    from . import solver

    n, t = cfg["n"], float(cfg["t"])
    if cfg["family"] == "laguerre-darboux":
        return solver.darboux_commuting_order4(fam, n, t)
    if cfg["family"] == "hermite-matrix":
        return solver.matrix_commuting_order2(fam, n, t)
    return solver.solve_commuting(fam, n, t)


def perturbation_pair(fam, rep, cfg):
    """Pair ``(L_x, R_x)`` of order zero and its weight in the solved operator.

    Classical and soliton families use ``(L, x)`` resp. ``(L, 2 sinh x)``
    weighted by their solved coefficient, the Laguerre Darboux family ``R_2``
    (the conjugated ``x``) weighted by the largest solved coefficient, and
    the matrix family ``x I_N``.
    """
    from .darboux import HermiteMatrixDarboux

    if isinstance(fam, HermiteMatrixDarboux):
        X = DifferentialOperator(fam.n, [MatrixExpr(fam.n, [(var(), np.eye(fam.n))])], fam.support)
        return FourierPair(fam.fourier_x(), X, "x"), float(2 * cfg["n"] + 2)
    from .solver import build_symmetric_basis

    darb = cfg["family"] == "laguerre-darboux"
    tag = "R2" if darb else "L"
    basis = build_symmetric_basis(fam, 8, 8)
    e = basis.elements[basis.tags.index(tag)]
    c = rep.coefficient_dict()
    w = max(abs(v) for v in c.values()) if darb else c.get(tag, 0.0)
    return e.pair, (w if abs(w) > 1e-12 else 1.0)


def edge_residual(L, ks):
    from .concomitants import discrete_edge_conditions

    scale = max(float(np.max(np.abs(L.matrix(ks[0], ks[-1])))), 1e-300)
    vals = [np.max(np.abs(v)) for upper, e in ((True, ks[-1]), (False, ks[0]))
            for _, v in discrete_edge_conditions(L, e, upper)]
    return float(max(vals, default=0.0)) / scale


def check_rows(fam, rep, R, L, cfg, with_identities=True):
    """Defect rows ``(name, value, tolerance)`` for a solved or perturbed pair."""
    from .darboux import LaguerreDarboux, HermiteMatrixDarboux, SolitonFamily, verify_darboux_identities

    tol = cfg["tolerances"]
    ks = list(rep.problem.ks)
    prob = rep.problem
    x0 = prob.x0 if math.isfinite(prob.x0) else None
    x1 = prob.x1 if math.isfinite(prob.x1) else None
    rows = []
    dc = commutation_defect_continuous(fam, R, ks, x0, x1, trials=cfg["trials"], panels=cfg["quad_panels"],
                                       points=cfg["quad_points"], seed=cfg["seed"], full=True)
    rows.append(("commutation continuous", dc.relative, tol["continuous"]))
    quad = family_quadrature(fam, x0, x1, cfg["quad_panels"], cfg["quad_points"], ks)
    dd = commutation_defect_discrete(fam, L, ks, quad=quad, enforce_edges=False)
    rows.append(("commutation discrete", dd, tol["discrete"]))
    rows.append(("discrete edge coefficients", edge_residual(L, ks), tol["edges"]))
    if with_identities:
        full_ks = ks if isinstance(fam, SolitonFamily) else list(range(ks[0], ks[-1] + 3))
        rows.append(("orthonormality", orthonormality_defect(fam, full_ks), tol["orthonormality"]))
        Lx = fam.fourier_x() if isinstance(fam, HermiteMatrixDarboux) else (
            fam.L if not isinstance(fam, (LaguerreDarboux, SolitonFamily)) else None)
        if Lx is not None:
            a, b = family_interval(fam, x0, x1, ks)
            rng = np.random.default_rng(cfg["seed"])
            xs, ys = rng.uniform(a, b, 64), rng.uniform(a, b, 64)
            rows.append(("Christoffel-Darboux", christoffel_darboux_defect(fam, Lx, ks[-1], xs, ys),
                         tol["identity"]))
        if isinstance(fam, (LaguerreDarboux, HermiteMatrixDarboux, SolitonFamily)):
            rep_id = verify_darboux_identities(fam, tol=tol["identity"])
            for name, v in rep_id.defects.items():
                rows.append((f"identity {name}", float(v), tol["identity"]))
    return rows


def closed_form_rows(fam, rep, cfg):
    from .solver import classical_closed_form, compare_up_to_scale, _reference_points

    tol = cfg["tolerances"]["closed_form"]
    xs = _reference_points(rep.problem)
    name = cfg["family"]
    if name in ("hermite", "laguerre", "jacobi"):
        C = classical_closed_form(name, cfg["n"], cfg["t"], cfg["a"], cfg["b"], fam.n)
        return [("closed form (up to scale)", compare_up_to_scale(rep.R, C, xs)[1], tol)]
    if name == "soliton":
        c = rep.coefficient_dict()
        p, t = cfg["p"], float(cfg["t"])
        beta = c["L"] / c["{k^2,L}"]
        gamma = c["k^2"] / c["{k^2,L}"]
        bref = -2 * (p - 1) ** 2 - 2 * (p - 1) - 1
        gref = -4 * math.sinh(t)
        return [("soliton beta", abs(beta - bref) / max(abs(bref), 1.0), tol),
                ("soliton gamma", abs(gamma - gref) / max(abs(gref), 1.0), tol)]
    if name == "hermite-matrix":
        return [("closed form in solution span", rep.defects["closed_form_in_span"], tol)]
    return [("closed form at window n+1 (1 - cosine)", 1.0 - rep.defects["cosine_closed_form_next"], tol),
            # informational: the closed form at n fits the window 0..n-1
            ("closed form at window n (1 - cosine)", 1.0 - rep.defects["cosine_closed_form"], None)]


def perturbed(rep, fam, cfg):
    eps = float(cfg["perturb"])
    pair, w = perturbation_pair(fam, rep, cfg)
    R = rep.R + pair.D * float(eps * w)
    L = rep.L + pair.L * float(eps * w)
    return R, L


def _all_pass(rows):
    """Rows without a tolerance are informational."""
    return all(v < t for _, v, t in rows if t is not None)


def report_dict(fam, rep, cfg, rows):
    from .solver import _reference_points

    xs = _reference_points(rep.problem)[::5]
    R, L = rep.R, rep.L
    vals = R.coefficient_values(xs)
    coeff_table = [{"order": j, "x": xs.tolist(), "values": [_matrix(v) for v in vals[j]]}
                   for j in range(vals.shape[0])]
    ks = list(rep.problem.ks)
    shift_table = [{"shift": j, "k": ks, "values": [_matrix(L.coef(j, k)) for k in ks]}
                   for j in sorted(L.coeffs)]
    return {
        "family": cfg["family"], "params": family_params(cfg), "n": cfg["n"], "t": float(cfg["t"]),
        "window": ks, "interval": [rep.problem.x0, rep.problem.x1],
        "order": int(R.order), "nullity": int(rep.nullity),
        "positive_order_nullity": int(rep.positive_order_nullity),
        "coefficients": rep.coefficient_dict(), "residuals": rep.residuals,
        "solver_defects": rep.defects,
        "checks": [{"name": n, "value": v, "tolerance": t, "pass": None if t is None else bool(v < t)}
                   for n, v, t in rows],
        "differential_operator": coeff_table, "shift_operator": shift_table,
        "perturb": float(cfg["perturb"]),
        "status": "pass" if _all_pass(rows) else "fail",
    }


# ---------------------------------------------------------------------------
# commands

def _write(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)


def cmd_solve(cfg) -> int:
    fam = build_family(cfg)
    rep = run_solver(fam, cfg)
    R, L = (rep.R, rep.L) if not cfg["perturb"] else perturbed(rep, fam, cfg)
    rows = check_rows(fam, rep, R, L, cfg, with_identities=False) + closed_form_rows(fam, rep, cfg)
    d = report_dict(fam, rep, cfg, rows)
    _write(dumps(d) + "\n", cfg["out"])
    return EXIT_OK if d["status"] == "pass" else EXIT_VERIFY


def cmd_verify(cfg) -> int:
    fam = build_family(cfg)
    rep = run_solver(fam, cfg)
    R, L = (rep.R, rep.L) if not cfg["perturb"] else perturbed(rep, fam, cfg)
    rows = check_rows(fam, rep, R, L, cfg) + closed_form_rows(fam, rep, cfg)
    lines = ["check,value,tolerance,pass"]
    lines += [f"{n},{_fmt(v)},{'' if t is None else _fmt(t)},"
              f"{'info' if t is None else ('true' if v < t else 'false')}" for n, v, t in rows]
    ok = _all_pass(rows)
    summary = {"family": cfg["family"], "params": family_params(cfg), "n": cfg["n"], "t": float(cfg["t"]),
               "perturb": float(cfg["perturb"]), "failed": [n for n, v, t in rows if t is not None and not v < t],
               "status": "pass" if ok else "fail"}
    _write("\n".join(lines) + "\n" + "# " + json.dumps(summary, sort_keys=True) + "\n", cfg["out"])
    return EXIT_OK if ok else EXIT_VERIFY


def emit_kernel_text(cfg) -> str:
    """CSV of ``K(x, y)`` on a tensor grid followed by the block matrix ``J``."""
    fam = build_family(cfg)
    from .darboux import SolitonFamily
    from .solver import problem_for

    t = float(cfg["t"])
    if not isinstance(fam, SolitonFamily) and t >= fam.support[1]:
        # t at or past the upper end: J over the full support
        ks = list(range(fam.kmin, fam.kmin + cfg["n"] + 1))
        x0 = x1 = None
    else:
        prob = problem_for(fam, cfg["n"], t)
        ks = list(prob.ks)
        x0 = prob.x0 if math.isfinite(prob.x0) else None
        x1 = prob.x1 if math.isfinite(prob.x1) else None
    a, b = family_interval(fam, x0, x1, ks)
    g = cfg["grid"]
    grid = np.linspace(a, b, g + 2)[1:-1]
    X, Y = np.meshgrid(grid, grid, indexing="ij")
    K = kernel_K(fam, ks, X, Y)
    quad = family_quadrature(fam, x0, x1, cfg["quad_panels"], cfg["quad_points"], ks)
    J = kernel_J(fam, ks, quad)
    N = fam.n
    head = [
        f"# family={cfg['family']} params={json.dumps(family_params(cfg), sort_keys=True)}",
        f"# n={cfg['n']} t={_fmt(cfg['t'])} window={ks[0]}..{ks[-1]} seed={cfg['seed']}",
        f"# grid: {g} interior points of linspace({_fmt(a)}, {_fmt(b)}, {g + 2}) in x and y",
        f"# quadrature: {json.dumps(quad.describe(), sort_keys=True)}",
        "# section K",
        "x,y," + ",".join(f"K[{i}][{j}]" for i in range(N) for j in range(N)),
    ]
    body = [",".join([_fmt(X[i, j]), _fmt(Y[i, j])] + [_fmt(v) for v in K[i, j].ravel()])
            for i in range(g) for j in range(g)]
    jhead = [f"# section J: ({len(ks)}*{N}) x ({len(ks)}*{N}) block matrix, row-major"]
    jbody = [",".join(_fmt(v) for v in row) for row in J]
    return "\n".join(head + body + jhead + jbody) + "\n"


def cmd_emit_kernel(cfg) -> int:
    _write(emit_kernel_text(cfg), cfg["out"])
    return EXIT_OK


def cmd_families() -> int:
    sys.stdout.write(dumps(FAMILIES) + "\n")
    return EXIT_OK


def _fail(code, kind, msg):
    sys.stderr.write(json.dumps({"error": kind, "message": str(msg), "exit_code": code}) + "\n")
    return code


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "families":
        return cmd_families()
    try:
        cfg = load_config(args)
    except OSError as e:
        return _fail(EXIT_IO, "io", e)
    except (ConfigError, ConstructionError, DomainError, ContractError) as e:
        return _fail(EXIT_CONFIG, "config", e)
    cmd = {"solve": cmd_solve, "verify": cmd_verify, "emit-kernel": cmd_emit_kernel}[args.command]
    try:
        return cmd(cfg)
    except (ConfigError, ConstructionError) as e:
        return _fail(EXIT_CONFIG, "config", e)
    except SolverError as e:
        return _fail(EXIT_SOLVER, "solver", e)
    except OSError as e:
        return _fail(EXIT_IO, "io", e)
    except (DomainError, ContractError) as e:
        return _fail(EXIT_SOLVER, "solver", e)


if __name__ == "__main__":
    sys.exit(main())
