"""Command-line front end.

Exit codes: 0 success, 1 a verdict failed, 2 invalid input or configuration.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import angles, hs, measures, models, spectral
from .errors import ConfigError, DomainError, HslabError
from .io import Report, Table, load_json, load_matrix, save_matrix
from .kernel import Subspace, op_norm, tr2_norm
from .regions import Annulus, PointSet, parse_region
from .tolerances import DEFAULT_TOLS, ToleranceConfig


class UsageError(ConfigError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _global_options(parser, suppress):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=default, help="master seed (u64)")
    parser.add_argument("--tol", default=default, help="JSON file of tolerance overrides")
    parser.add_argument("--out", default=default, help="output directory (stdout if omitted)")
    parser.add_argument(
        "--format",
        choices=["json", "csv", "both"],
        default=argparse.SUPPRESS if suppress else "json",
    )


def _sub(subparsers, name, **kw):
    p = subparsers.add_parser(name, **kw)
    _global_options(p, suppress=True)
    return p


def build_parser():
    parser = _Parser(prog="hslab", description="Haagerup-Schultz projection laboratory")
    _global_options(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = _sub(sub, "analyze", help="Brown measure, spectral radius, decomposability")
    p.add_argument("matrix")
    p.add_argument("--region", action="append", default=[], help="extra region expression")

    p = _sub(sub, "hs", help="Haagerup-Schultz subspace for a region")
    p.add_argument("matrix")
    p.add_argument("region")
    p.add_argument("--method", choices=["algebraic", "power", "both"], default="algebraic")
    p.add_argument("--n", type=int, default=None, help="power used by the power-limit route")
    p.add_argument("--dump-basis", action="store_true")

    p = _sub(sub, "angle", help="angle between the HS subspaces of two regions")
    p.add_argument("matrix")
    p.add_argument("f1")
    p.add_argument("f2")

    p = _sub(sub, "unza-scan", help="angles between P(T,B) and P(T,B^c) over a family")
    p.add_argument("matrix")
    p.add_argument("--region", action="append", default=[], help="region (repeatable)")
    p.add_argument("--max-exhaustive", type=int, default=12)
    p.add_argument("--n-random", type=int, default=64)

    p = _sub(sub, "decompose", help="scalar + nilpotent split and normal form")
    p.add_argument("matrix")
    p.add_argument("--dump", action="store_true", help="also write S, Q, A, N, Q' matrix files")

    p = _sub(sub, "example", help="deterministic examples")
    ex = p.add_subparsers(dest="which", required=True, parser_class=_Parser)
    q = ex.add_parser("tk")
    _global_options(q, suppress=True)
    q.add_argument("--k", type=int, required=True)
    q = ex.add_parser("diag2")
    _global_options(q, suppress=True)
    q.add_argument("--n-blocks", type=int, required=True)

    p = _sub(sub, "rand", help="seeded random-matrix models")
    rd = p.add_subparsers(dest="which", required=True, parser_class=_Parser)
    for name in ("ginibre", "dt", "cfp"):
        q = rd.add_parser(name)
        _global_options(q, suppress=True)
        q.add_argument("--config", help="JSON experiment config")
        q.add_argument("--n", type=int, default=None)
        q.add_argument("--trials", type=int, default=None)
        q.add_argument("--save-matrices", action="store_true")
        if name == "dt":
            q.add_argument("--c", type=float, default=None, help="scale of the Gaussian part")
            q.add_argument("--law", default=None, help="diagonal law: uniform_annulus, uniform_disk, point")
            q.add_argument("--r", type=float, default=None)
            q.add_argument("--s", type=float, default=None)
        if name == "cfp":
            q.add_argument("--c", type=float, default=None, help="free Poisson rate (>= 1)")

    p = _sub(sub, "thm52", help="two-block ζ experiment")
    p.add_argument("--config", help="JSON experiment config")
    for flag, typ in (
        ("--c", float),
        ("--N", int),
        ("--delta1", float),
        ("--delta2", float),
        ("--matrix-dim", int),
        ("--series-len", int),
        ("--trials", int),
    ):
        p.add_argument(flag, type=typ, default=None)

    p = _sub(sub, "plan-deltas", help="δ-sequence planner")
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=3)
    return parser


# ----------------------------------------------------------------- helpers


def _tols(args):
    return ToleranceConfig.from_json(args.tol) if args.tol else DEFAULT_TOLS


def _resolved(args, drop=("tol", "out", "format", "func")):
    return {k: v for k, v in sorted(vars(args).items()) if k not in drop}


def _region(text, tols):
    return parse_region(text, match_tol=tols.match_tol)


def _atom_table(mu):
    tab = Table(["location", "weight", "count"])
    for z, c in zip(mu.locations, mu.counts):
        tab.add(complex(z), float(c) / mu.n, int(c))
    return tab


def _seed(args):
    return 0 if args.seed is None else int(args.seed)


def _load_config(path, allowed):
    if not path:
        return {}
    data = load_json(path)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"{path}: unknown config keys {unknown}")
    for k, v in data.items():
        kind = allowed[k]
        if kind is str:
            ok = isinstance(v, str)
        elif kind is int:
            ok = isinstance(v, int) and not isinstance(v, bool)
        else:
            ok = isinstance(v, (int, float)) and not isinstance(v, bool)
        if not ok:
            raise ConfigError(f"{path}: key {k!r} has the wrong type")
    return data


def _merge(cfg, args, names):
    out = dict(cfg)
    for dest, key in names.items():
        v = getattr(args, dest, None)
        if v is not None:
            out[key] = v
    return out


# ---------------------------------------------------------------- commands


def cmd_analyze(args):
    tols = _tols(args)
    t = load_matrix(args.matrix)
    data = spectral.spectral_data(t, tols=tols)
    rep = Report("analyze", args.seed, _resolved(args))
    rep.tables["atoms"] = _atom_table(data.measure)
    spec = Table(["eigenvalue"])
    for z in np.diag(data.schur.r):
        spec.add(complex(z))
    rep.tables["spectrum"] = spec
    rho = float(np.max(np.abs(np.diag(data.schur.r))))
    rep.values.update({"n": t.shape[0], "spectral_radius": rho, "op_norm": data.norm})
    ok, res = data.schur.check(t)
    rep.verdict("schur_residual", ok, res["residual"], data.schur.tol_residual * max(data.norm, 1e-300))
    regions = [PointSet((complex(z),), tols.match_tol) for z in data.measure.locations]
    regions += [_region(r, tols) for r in args.region]
    dec = Table(["region", "passed", "max_violation"])
    worst = 0.0
    all_ok = True
    for b in regions:
        d = spectral.decomposability_check(t, b, tols=tols, data=data)
        dec.add(b.expr(), d.passed, d.max_violation)
        worst = max(worst, d.max_violation)
        all_ok &= d.passed
    rep.tables["decomposability"] = dec
    rep.verdict("decomposability", all_ok, worst, data.cluster_tol)
    return rep


def cmd_hs(args):
    tols = _tols(args)
    t = load_matrix(args.matrix)
    b = _region(args.region, tols)
    rep = Report("hs", args.seed, _resolved(args))
    tab = Table(["method", "dim", "trace", "invariance"])
    results = {}
    norm = op_norm(t)
    if args.method in ("algebraic", "both"):
        results["algebraic"] = hs.hs_algebraic(t, b, tols=tols)
    if args.method in ("power", "both"):
        if not (isinstance(b, Annulus) and b.r == 0 and b.closed and math.isfinite(b.s)):
            raise ConfigError("the power-limit route needs a region annulus(0,r)")
        results["power_limit"] = hs.hs_power_limit(t, b.s, args.n, tols=tols)
    for name, p in results.items():
        tab.add(name, p.dim, p.trace, p.invariance)
        rep.verdict(
            f"invariance_{name}", p.invariance <= tols.invariance * max(norm, 1e-300),
            p.invariance, tols.invariance * norm,
        )
        for w in p.warnings:
            rep.values.setdefault("warnings", []).append(w)
        if args.dump_basis:
            basis = Table([f"col{j}" for j in range(p.dim)])
            for row in p.space.basis:
                basis.add(*[complex(z) for z in row])
            rep.tables[f"basis_{name}"] = basis
    rep.tables["projection"] = tab
    rep.values["region"] = b.expr()
    if len(results) == 2:
        d = hs.subspace_distance(results["algebraic"].space, results["power_limit"].space)
        rep.values["cross_method_angle"] = d
        rep.verdict("cross_method", d < 1e-4, d, 1e-4)
    return rep


def cmd_angle(args):
    tols = _tols(args)
    t = load_matrix(args.matrix)
    f1, f2 = _region(args.f1, tols), _region(args.f2, tols)
    a = angles.disjoint_closed_angle(t, f1, f2, tols=tols)
    rep = Report("angle", args.seed, _resolved(args))
    rep.values.update({"alpha": a.alpha, "cos_alpha": a.cos_alpha})
    tab = Table(["quantity", "value"])
    tab.add("alpha", a.alpha)
    tab.add("cos_alpha", a.cos_alpha)
    if a.alpha > 0:
        tab.add("wermer_bound", angles.wermer_bound(a.alpha))
    p1 = hs.hs_algebraic(t, f1, tols=tols).space
    p2 = hs.hs_algebraic(t, f2, tols=tols).space
    if p1.dim + p2.dim == t.shape[0]:
        e = angles.oblique_idempotent(p1, p2, tols=tols)
        tab.add("idempotent_norm", e.norm_e)
        bound = angles.wermer_bound(a.alpha)
        rep.verdict("wermer", e.norm_e <= bound * (1 + 1e-8), e.norm_e, bound)
    rep.tables["angle"] = tab
    rep.verdict("positive_angle", a.alpha > 0, a.alpha, 0.0)
    return rep


def cmd_unza_scan(args):
    tols = _tols(args)
    t = load_matrix(args.matrix)
    data = spectral.spectral_data(t, tols=tols)
    if args.region:
        family = [_region(r, tols) for r in args.region]
    else:
        family = angles.atom_subset_family(
            data.measure, args.max_exhaustive, args.n_random, seed=_seed(args)
        )
    scan = angles.unza_scan(t, family, tols=tols, data=data)
    rep = Report("unza-scan", args.seed, _resolved(args))
    tab = Table(["region", "alpha"])
    for b, a in scan.per_region:
        tab.add(b.expr(), a)
    rep.tables["regions"] = tab
    rep.values.update(
        {
            "kappa_hat": scan.kappa_hat,
            "nza": scan.nza_flag,
            "skipped": [b.expr() for b in scan.skipped],
            "argmin": scan.argmin.expr() if scan.argmin is not None else None,
        }
    )
    return rep


def cmd_decompose(args):
    tols = _tols(args)
    t = load_matrix(args.matrix)
    nf = measures.normal_form(t, tols=tols)
    rep = Report("decompose", args.seed, _resolved(args))
    tab = Table(["residual", "value", "threshold", "passed"])
    thr = nf.thresholds(tols.decomposition)
    for k, v in nf.residuals.items():
        th = thr.get(k, float("nan"))
        tab.add(k, v, th, bool(v <= th) if k in thr else True)
        if k in thr:
            rep.verdict(k, v <= th, v, th)
    rep.tables["residuals"] = tab
    rep.tables["atoms"] = _atom_table(spectral.brown_measure(t, tols=tols))
    rep.values.update({"cond_a": nf.cond_a, "bound_M": nf.table.bound_M})
    a_eigs = np.linalg.eigvalsh(nf.a)
    m = nf.table.bound_M
    lo, hi = 1 / (2 * m), 2 * m
    viol = max(0.0, lo - a_eigs.min(), a_eigs.max() - hi)
    rep.verdict("wermer_sandwich", viol == 0.0, viol, 0.0)
    if args.dump and args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for name, mat in (("S", nf.s), ("Q", nf.q), ("A", nf.a), ("N", nf.n_normal), ("Qprime", nf.q_prime)):
            save_matrix(out / f"decompose_{name}.json", mat)
    return rep


def cmd_example(args):
    tols = _tols(args)
    rep = Report(f"example_{args.which}", args.seed, _resolved(args))
    if args.which == "tk":
        k = args.k
        if k < 2:
            raise ConfigError("--k must be at least 2")
        t = models.example_tk(k)
        p_m1 = hs.hs_algebraic(t, PointSet((-1.0,), tols.match_tol), tols=tols).space
        p_0 = hs.hs_algebraic(t, PointSet((0.0,), tols.match_tol), tols=tols).space
        a = angles.principal_angle(p_m1, p_0, tols=tols).alpha
        formula = math.acos(math.sqrt(1 - 1 / k))
        tab = Table(["k", "alpha", "formula", "abs_error"])
        tab.add(k, a, formula, abs(a - formula))
        rep.tables["angles"] = tab
        rep.verdict("angle_formula", abs(a - formula) <= 1e-10, abs(a - formula), 1e-10)
    else:
        nb = args.n_blocks
        if nb < 1:
            raise ConfigError("--n-blocks must be positive")
        t = models.example_diag2(nb)
        tab = Table(["n", "alpha", "formula", "abs_error"])
        worst = 0.0
        for n in range(1, nb + 1):
            v = Subspace(np.array([[1.0], [0.0]], dtype=complex))
            w = Subspace.span(np.array([1.0, 1.0 / n]))
            a = angles.principal_angle(v, w, tols=tols).alpha
            f = math.acos(1 / math.sqrt(1 + 1 / n**2))
            tab.add(n, a, f, abs(a - f))
            worst = max(worst, abs(a - f))
        scan = angles.unza_scan(t, [PointSet((0.0,), tols.match_tol)], tols=tols)
        f = math.acos(1 / math.sqrt(1 + 1 / nb**2))
        rep.values["kappa_hat"] = scan.kappa_hat
        rep.tables["angles"] = tab
        rep.verdict("kappa_formula", abs(scan.kappa_hat - f) <= 1e-9, abs(scan.kappa_hat - f), 1e-9)
    rep.tables["matrix"] = _matrix_table(t)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        save_matrix(Path(args.out) / f"example_{args.which}.matrix.json", t)
    return rep


def _matrix_table(t):
    tab = Table(["row", "col", "value"])
    for i, j in zip(*np.nonzero(t)):
        tab.add(int(i), int(j), complex(t[i, j]))
    return tab


_RAND_KEYS = {"n": int, "trials": int, "c": float, "law": str, "r": float, "s": float, "seed": int}


def cmd_rand(args):
    cfg = _load_config(getattr(args, "config", None), _RAND_KEYS)
    cfg = _merge(cfg, args, {"n": "n", "trials": "trials", "c": "c", "law": "law", "r": "r", "s": "s", "seed": "seed"})
    n = int(cfg.get("n", 128))
    trials = int(cfg.get("trials", 1))
    seed = int(cfg.get("seed", 0))
    if n < 1 or trials < 1:
        raise ConfigError("n and trials must be positive")
    which = args.which
    if which == "cfp":
        c = float(cfg.get("c", 2.0))
        if c < 1:
            raise ConfigError("cfp needs c >= 1")
        spec = models.ModelConfig("circular_free_poisson", n, c, {}, seed, trials)
    elif which == "dt":
        law = cfg.get("law", "point")
        mu = {"law": law}
        if law == "uniform_annulus":
            mu.update(r=float(cfg.get("r", 0.0)), s=float(cfg.get("s", 1.0)))
        elif law == "uniform_disk":
            mu.update(radius=float(cfg.get("r", 1.0)))
        elif law == "point":
            mu.update(z=float(cfg.get("r", 0.0)))
        else:
            raise ConfigError(f"unknown law {law!r}")
        spec = models.ModelConfig("dt", n, float(cfg.get("c", 1.0)), mu, seed, trials)
    else:
        spec = models.ModelConfig("ginibre", n, 1.0, {}, seed, trials)
    resolved = {"model": which, **{k: cfg.get(k) for k in sorted(cfg)}, "n": n, "trials": trials, "seed": seed}
    rep = Report(f"rand_{which}", seed, resolved)
    tab = Table(["trial", "tr2_norm", "tr2_norm_inverse", "spectral_radius", "op_norm"])
    for i in range(trials):
        z = spec.sample(i)
        try:
            inv = tr2_norm(np.linalg.inv(z))
        except np.linalg.LinAlgError:
            inv = float("inf")
        rho = float(np.max(np.abs(np.linalg.eigvals(z))))
        tab.add(i, tr2_norm(z), inv, rho, op_norm(z))
        if args.save_matrices and args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            save_matrix(Path(args.out) / f"rand_{which}_{i}.matrix.json", z)
    rep.tables["trials"] = tab
    cols = list(zip(*tab.rows))
    rep.values.update(
        {
            "mean_tr2_norm": float(np.mean(cols[1])),
            "mean_tr2_norm_inverse": float(np.mean(cols[2])),
            "mean_spectral_radius": float(np.mean(cols[3])),
        }
    )
    return rep


_THM52_KEYS = {
    "c": float,
    "N": int,
    "delta1": float,
    "delta2": float,
    "matrix_dim": int,
    "series_len": int,
    "trials": int,
    "seed": int,
}


def cmd_thm52(args):
    cfg = _load_config(args.config, _THM52_KEYS)
    cfg = _merge(
        cfg,
        args,
        {
            "c": "c",
            "N": "N",
            "delta1": "delta1",
            "delta2": "delta2",
            "matrix_dim": "matrix_dim",
            "series_len": "series_len",
            "trials": "trials",
            "seed": "seed",
        },
    )
    conf = models.Thm52Config(
        c=float(cfg.get("c", 2.0)),
        n_partition=int(cfg.get("N", 10)),
        delta1=float(cfg.get("delta1", 0.5)),
        delta2=float(cfg.get("delta2", 0.4)),
        matrix_dim=int(cfg.get("matrix_dim", 256)),
        series_len=cfg.get("series_len"),
        seed=int(cfg.get("seed", 0)),
        trials=int(cfg.get("trials", 20)),
    )
    r = models.thm52_experiment(conf)
    rep = Report("thm52", conf.seed, conf.to_dict())
    tab = Table(["trial", "a1_sq", "a2inv_sq", "zeta_sq", "cos_theta", "series_len", "tail_bound"])
    for row in r.rows():
        tab.add(row["trial"], row["a1_sq"], row["a2inv_sq"], row["zeta_sq"], row["cos_theta"], row["series_len"], row["tail_bound"])
    rep.tables["trials"] = tab
    pr = r.predictions
    summ = Table(["quantity", "prediction", "estimate", "rel_error"])
    est = {
        "a1_sq": r.est_a1_sq,
        "a2inv_sq": r.est_a2inv_sq,
        "zeta_sq": r.est_zeta_sq,
        "cos_theta": r.est_cos_theta,
    }
    for k in ("a1_sq", "a2inv_sq", "zeta_sq", "cos_theta"):
        summ.add(k, pr[k], est[k], abs(est[k] - pr[k]) / pr[k])
    rep.tables["summary"] = summ
    rep.values.update({"predictions": pr, "estimates": est, "discarded": r.discarded})
    for k, tol in (("a1_sq", 0.10), ("a2inv_sq", 0.10), ("zeta_sq", 0.20)):
        rel = abs(est[k] - pr[k]) / pr[k]
        rep.verdict(k, rel <= tol, rel, tol)
    d = abs(est["cos_theta"] - pr["cos_theta"])
    rep.verdict("cos_theta", d <= 0.1, d, 0.1)
    worst_tail = max(r.per_trial["tail_bound"])
    rep.verdict("tail_certified", worst_tail <= 0.05, worst_tail, 0.05)
    return rep


def cmd_plan_deltas(args):
    plan = models.delta_sequence_planner(args.c, args.steps)
    rep = Report("plan-deltas", args.seed, _resolved(args))
    tab = Table(["step", "N", "delta1", "delta2", "delta1_float", "delta2_float", "N_gap"])
    for k, (n, d1, d2) in enumerate(plan, start=1):
        tab.add(k, n, d1, d2, float(d1), float(d2), n * (d1 - d2))
    rep.tables["plan"] = tab
    bad = models.verify_plan(plan, args.c)
    rep.verdict("inequalities", not bad, len(bad), 0)
    return rep


COMMANDS = {
    "analyze": cmd_analyze,
    "hs": cmd_hs,
    "angle": cmd_angle,
    "unza-scan": cmd_unza_scan,
    "decompose": cmd_decompose,
    "example": cmd_example,
    "rand": cmd_rand,
    "thm52": cmd_thm52,
    "plan-deltas": cmd_plan_deltas,
}


def _emit(rep, args, stdout):
    fmt = args.format or "json"
    if args.out:
        rep.write(args.out, fmt)
        return
    if fmt in ("json", "both"):
        stdout.write(rep.to_json())
    if fmt in ("csv", "both"):
        for name, text in rep.csv_files().items():
            stdout.write(f"# {name}\n{text}")


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        rep = COMMANDS[args.command](args)
        _emit(rep, args, stdout)
    except (ConfigError, DomainError) as exc:
        stderr.write(f"error: {exc}\n")
        return 2
    except HslabError as exc:
        stderr.write(f"error: {exc}\n")
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    for name, v in rep.verdicts.items():
        if not v.passed:
            stderr.write(f"verdict failed: {name} (residual {v.residual}, threshold {v.threshold})\n")
    return 0 if rep.passed else 1


if __name__ == "__main__":
    sys.exit(main())
