"""Command-line entry point ``kmsentropy``.

Each subcommand composes library operations, writes a CSV table and a JSON
report into the output directory, and exits with 0 (success), 2 (invalid
input or config) or 3 (a numerical tolerance was exceeded). Tables are
written only when the computation finishes; a tolerance failure keeps them
as evidence and names the offending quantity on stderr.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys

import numpy as np

from . import adiabatic, engine, findim
from .config import load_config
from .errors import ConvergenceError, KMSEntropyError, ResolutionError, ToleranceError, ValidationError
from .io import OutputSet, metadata
from .thermal import detailed_balance_residual

EXIT_OK, EXIT_INVALID, EXIT_TOLERANCE = 0, 2, 3


def _order_cols(cfg):
    return [f"order_{l}" for l in range(1, cfg.K1.order + 1)]


def cmd_relent(cfg, out):
    reps = engine.rel_entropy_series(cfg.K1, cfg.K2, cfg.K3, cfg.times, cfg.thermal, cfg.grid)
    out.csv("relent.csv", ["t", "static", "dynamic", "total", *_order_cols(cfg)], [r.as_row() for r in reps])
    worst = min(r.total for r in reps)
    out.json("relent.json", {"meta": metadata(cfg, "relent"), "rows": [dataclasses.asdict(r) for r in reps],
                             "min_total": worst})
    return [("relative entropy total (negativity)", max(0.0, -worst), cfg.tolerance.positivity)]


def cmd_entprod(cfg, out):
    t = np.asarray(cfg.times)
    e = engine.entropy_production(cfg.K1, cfg.K3, t, cfg.thermal, cfg.grid)
    out.csv("entprod.csv", ["t", "entropy_production"], zip(t, e))
    out.json("entprod.json", {"meta": metadata(cfg, "entprod", {"mode": "K2 = 0"}),
                              "t": t, "entropy_production": e})
    return []


def cmd_balance(cfg, out):
    zero = cfg.K1.zero(cfg.K1.order, cfg.K1.profile)
    rows = []
    for t in cfg.times:
        s_t = engine.rel_entropy_total(cfg.K1, zero, cfg.K3, t, cfg.thermal, cfg.grid).total
        s_0 = engine.rel_entropy_total(cfg.K1, zero, cfg.K3, 0.0, cfg.thermal, cfg.grid).total
        res = engine.entropy_balance_residual(cfg.K1, cfg.K3, t, cfg.thermal, cfg.grid)
        rows.append((t, s_t, s_0, res))
    out.csv("balance.csv", ["t", "S_t", "S_0", "residual"], rows)
    worst = max(r[3] for r in rows)
    out.json("balance.json", {"meta": metadata(cfg, "balance"), "max_residual": worst,
                              "tolerance": cfg.tolerance.balance})
    return [("entropy balance residual", worst, cfg.tolerance.balance)]


def cmd_density(cfg, out):
    rows = []
    for t in cfg.times:
        d = adiabatic.rel_entropy_density_parts(cfg.K1, cfg.K2, cfg.K3, t, cfg.thermal)
        rows.append((t, d.static, d.dynamic, d.total))
    out.csv("density.csv", ["t", "static", "dynamic", "total"], rows)
    worst = min(r[3] for r in rows)
    out.json("density.json", {"meta": metadata(cfg, "density"), "min_total": worst})
    return [("relative entropy density (negativity)", max(0.0, -worst), cfg.tolerance.positivity)]


def cmd_vanhove(cfg, out):
    t = cfg.times[0]
    rep = adiabatic.vanhove_density_series(cfg.K1, cfg.K2, cfg.K3, t, cfg.n_max, cfg.thermal, cfg.ramp)
    out.csv("vanhove.csv", ["n", "I_h", "density"], zip(rep.n_values, rep.I_values, rep.densities))
    target = rep.density_mode_value
    scale = abs(target) if target else 1.0
    out.json("vanhove.json", {
        "meta": metadata(cfg, "vanhove", {"t": t}),
        "density_mode_value": target,
        "limit_estimate": rep.limit_estimate,
        "limit_estimate_gap": abs(rep.limit_estimate - target) / scale,
        "gaps": rep.gaps,
    })
    return [("van Hove density gap at n_max", rep.gaps[-1], cfg.tolerance.density)]


def cmd_ness(cfg, out):
    t = np.asarray(cfg.ness_times)
    e = adiabatic.ness_entropy_production_density(cfg.K1, cfg.K3, t, cfg.thermal)
    bound = adiabatic.dynamic_density_bound(cfg.K1, cfg.K3, cfg.thermal)
    out.csv("ness.csv", ["t", "e_t", "e_t_times_t"], zip(t, e, e * t))
    nz = e != 0
    slope = icpt = resid = float("nan")
    if np.count_nonzero(nz) >= 2:
        slope, icpt, resid = adiabatic.loglog_slope(t[nz], e[nz])
    sup = float(np.max(np.abs(e * t)))
    out.json("ness.json", {"meta": metadata(cfg, "ness"),
                           "fit": {"slope": slope, "intercept": icpt, "residual": resid},
                           "sup_abs_e_t_times_t": sup, "bound": bound})
    return [("sup |e(t) t| above bound", max(0.0, sup - bound), cfg.tolerance.positivity)]


def run_oracle(settings, tol):
    """Random finite systems checked three ways; one row per trial."""
    rows = []
    for i in range(settings.trials):
        rng = np.random.default_rng([settings.seed, i])
        d = int(rng.choice(settings.dims))
        beta = float(rng.uniform(settings.beta_min, settings.beta_max))
        t = float(rng.uniform(settings.t_min, settings.t_max))
        sys_ = findim.random_system(d, rng, beta, settings.scale)
        formula = findim.generalized_formula_findim(sys_, t)
        exact = findim.relative_entropy_trace(sys_, t)
        mod = abs(findim.relative_entropy_modular(sys_, t) - exact) if d <= 6 else float("nan")
        bal = findim.balance_residual_exact(sys_, t)
        res = abs(formula - exact)
        ok = res <= tol and bal <= tol and (d > 6 or mod <= tol)
        rows.append((i, d, beta, t, formula, exact, res, mod, bal, "pass" if ok else "fail"))
    return rows


def cmd_oracle(cfg, out):
    tol = cfg.tolerance.oracle
    rows = run_oracle(cfg.oracle, tol)
    out.csv("oracle.csv", ["trial", "dim", "beta", "t", "formula", "exact", "residual",
                           "modular_residual", "balance_residual", "status"], rows)
    worst = max(max(r[6], r[8], 0.0 if np.isnan(r[7]) else r[7]) for r in rows)
    out.json("oracle.json", {"meta": metadata(cfg, "oracle"), "trials": len(rows),
                             "passed": sum(r[-1] == "pass" for r in rows), "worst_residual": worst})
    return [("oracle worst residual", worst, tol)]


def cmd_kmscheck(cfg, out):
    rng = np.random.default_rng(cfg.oracle.seed)
    p = cfg.thermal
    rows = []
    p0 = rng.uniform(-10.0, 10.0, 1000)
    p0[p0 == 0] = 1.0
    res = detailed_balance_residual(p0, np.abs(rng.normal(size=p0.size)), p)
    rows += [("fourier_weight", i, x, r) for i, (x, r) in enumerate(zip(p0, res))]
    H = findim.random_hermitian(4, rng)
    for i in range(50):
        A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        B = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        rows.append(("matrix_kms", i, p.beta, findim.kms_residual(H, p.beta, A, B)))
    out.csv("kmscheck.csv", ["kind", "sample", "argument", "residual"], rows)
    worst = max(r[3] for r in rows)
    out.json("kmscheck.json", {"meta": metadata(cfg, "kmscheck"), "worst_residual": worst})
    return [("KMS residual", worst, cfg.tolerance.kms)]


COMMANDS = {
    "relent": (cmd_relent, "relative entropy at each configured time"),
    "entprod": (cmd_entprod, "entropy production with K2 = 0"),
    "balance": (cmd_balance, "entropy balance residual |S(t) - S(0) - int E|"),
    "density": (cmd_density, "relative entropy per unit volume (density mode)"),
    "vanhove": (cmd_vanhove, "finite-volume densities along a van Hove sequence (order 1)"),
    "ness": (cmd_ness, "ergodic-mean entropy production per unit volume"),
    "oracle": (cmd_oracle, "finite-dimensional oracle trials"),
    "kmscheck": (cmd_kmscheck, "detailed-balance and matrix KMS residuals"),
}


def build_parser():
    ap = argparse.ArgumentParser(prog="kmsentropy", description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="TOML run configuration")
    ap.add_argument("--out", help="output directory (overrides [output] dir)")
    ap.add_argument("--seed", type=int, help="oracle seed (overrides [oracle] seed)")
    ap.add_argument("--quiet", action="store_true", help="suppress the summary on stdout")
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, (_, help_) in COMMANDS.items():
        sub.add_parser(name, help=help_)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ValidationError("--seed must be nonnegative")
            cfg = dataclasses.replace(cfg, oracle=dataclasses.replace(cfg.oracle, seed=args.seed))
        if args.out:
            cfg = dataclasses.replace(cfg, out_dir=args.out)
        fn = COMMANDS[args.command][0]
        with OutputSet(cfg.out_dir) as out:
            checks = fn(cfg, out)
        for quantity, value, tol in checks:
            if not value <= tol:
                raise ToleranceError(quantity, value, tol)
    except ValidationError as exc:
        print(f"kmsentropy: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ToleranceError, ResolutionError, ConvergenceError) as exc:
        print(f"kmsentropy: tolerance failure: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    except KMSEntropyError as exc:  # pragma: no cover
        print(f"kmsentropy: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    if not args.quiet:
        for p in out.written:
            print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
