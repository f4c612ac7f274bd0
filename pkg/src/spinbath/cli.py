"""Command-line front end: spectrum | scaling | evolve | verify.

Configuration comes from an optional key=value file plus flags; flags win.
Sweep points run on a bounded thread pool (LAPACK releases the GIL) and are
merged in configuration order, so identical configurations give byte-identical
CSV regardless of --jobs.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import dynamics as dyn
from . import spectra as sp
from .liouvillian import build_sector
from .model import ModelParams
from .output import (
    fmt,
    parse_float_list,
    parse_initial,
    parse_int_list,
    parse_time_grid,
    read_config,
    svg_lines,
    svg_scatter,
    write_csv,
)
from .verification import run_all_checks

__all__ = ["main", "cmd_spectrum", "cmd_scaling", "cmd_evolve", "cmd_verify"]

DEFAULTS = {
    "h": "1",
    "gamma": "1",
    "gamma0": "0",
    "doublet_threshold": "1e-6",
    "lambda_c_per_j": "-0.133975",
}


def _config_from(args) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        cfg.update(read_config(args.config))
    for key in ("two_j", "p", "m", "gamma_bound", "times", "initial", "out", "jobs"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _params(cfg: dict, two_j: int, p: float) -> ModelParams:
    return ModelParams(
        two_j=int(two_j),
        h=float(cfg["h"]),
        gamma=float(cfg["gamma"]),
        gamma0=float(cfg["gamma0"]),
        p=float(p),
    )


def _pool_map(jobs: int, fn, items):
    if jobs <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _provenance(params: ModelParams, M) -> list:
    return [params.two_j, params.p, params.gamma, params.gamma0, params.h, M]


def cmd_spectrum(args) -> int:
    cfg = _config_from(args)
    if "two_j" not in cfg or "p" not in cfg:
        print("error: spectrum needs --two-j and --p sweep lists", file=sys.stderr)
        return 2
    two_js = parse_int_list(cfg["two_j"])
    ps = parse_float_list(cfg["p"])
    if not two_js or not ps:
        print("error: empty sweep list", file=sys.stderr)
        return 2
    out = cfg.get("out", "out")
    jobs = int(cfg.get("jobs", 1))
    thr = float(cfg["doublet_threshold"])

    tasks = []
    for two_j in two_js:
        ms = parse_int_list(cfg["m"]) if "m" in cfg else list(range(-two_j, two_j + 1))
        for p in ps:
            for M in ms:
                if abs(M) <= two_j:
                    tasks.append((two_j, p, M))

    def work(task):
        two_j, p, M = task
        params = _params(cfg, two_j, p)
        dec = sp.diagonalize(build_sector(params, M))
        d = sp.pair_distances(dec)
        rows, members = [], []
        for N, lam in enumerate(dec.eigenvalues):
            dN = d[N] if N < len(d) else math.nan
            rows.append(_provenance(params, M) + [N, lam.real, lam.imag, dN])
            # doublet register: odd N pairs with N+1
            if N % 2 == 1:
                members.append(N < len(d) and d[N] < thr)
            else:
                members.append(N > 0 and d[N - 1] < thr)
        return rows, members

    results = _pool_map(jobs, work, tasks)
    rows = [r for chunk, _ in results for r in chunk]
    csv_path = write_csv(
        os.path.join(out, "spectra.csv"),
        ["two_j", "p", "gamma", "gamma0", "h", "M", "N", "re_lambda", "im_lambda", "d_N"],
        rows,
    )
    # scatter of (Re/j, Im) colored by doublet membership at the threshold
    doublet_x, doublet_y, other_x, other_y = [], [], [], []
    for chunk, members in results:
        for row, member in zip(chunk, members):
            two_j, re, im = row[0], row[7], row[8]
            if member:
                doublet_x.append(re / (two_j / 2))
                doublet_y.append(im)
            else:
                other_x.append(re / (two_j / 2))
                other_y.append(im)
    svg_scatter(
        os.path.join(out, "spectrum.svg"),
        [("coalesced pairs", doublet_x, doublet_y), ("isolated", other_x, other_y)],
        xlabel="Re(lambda)/j",
        ylabel="Im(lambda)",
        title="Liouvillian spectrum",
    )
    print(f"wrote {csv_path} and spectrum.svg ({len(rows)} rows)")
    return 0


def cmd_scaling(args) -> int:
    cfg = _config_from(args)
    if "two_j" not in cfg or "p" not in cfg:
        print("error: scaling needs --two-j and --p lists", file=sys.stderr)
        return 2
    two_js = sorted(parse_int_list(cfg["two_j"]))
    ps = parse_float_list(cfg["p"])
    gammas = parse_float_list(cfg["gamma_bound"]) if "gamma_bound" in cfg else [1e-4]
    out = cfg.get("out", "out")
    jobs = int(cfg.get("jobs", 1))
    lam_c_per_j = float(cfg["lambda_c_per_j"])

    def decompose(task):
        two_j, p = task
        return sp.diagonalize(build_sector(_params(cfg, two_j, p), 0))

    tasks = [(two_j, p) for p in ps for two_j in two_js]
    decs = dict(zip(tasks, _pool_map(jobs, decompose, tasks)))

    doublet_rows, d1_rows, prec_rows, fit_rows = [], [], [], []
    for p in ps:
        xs_d1, ys_d1 = [], []
        floored = False
        for two_j in two_js:
            dec = decs[(two_j, p)]
            params = _params(cfg, two_j, p)
            lam1 = dec.eigenvalues[1] if dec.dim > 1 else math.nan
            lam2 = dec.eigenvalues[2] if dec.dim > 2 else math.nan
            doublet_rows.append(_provenance(params, 0) + [lam1.real, lam2.real])
            if dec.dim > 2:
                d1 = sp.eigenvector_distance(dec, 1)
                d1_rows.append(_provenance(params, 0) + [d1])
                # stop the decay fit at the double-precision floor
                if d1 < sp.DISTANCE_FLOOR:
                    floored = True
                elif not floored:
                    xs_d1.append(two_j / 2)
                    ys_d1.append(d1)
        if len(xs_d1) >= 3:
            fit = sp.fit_exponential(xs_d1, ys_d1)
            fit_rows.append(["d1_decay", p, math.nan, fit.exponent, fit.prefactor, fit.r_squared, fit.n_points])
        for gamma in gammas:
            xs, ys = [], []
            for two_j in two_js:
                dec = decs[(two_j, p)]
                params = _params(cfg, two_j, p)
                res = sp.ep_scan(dec, gamma)
                lam_star = res.precursor.real if res.precursor is not None else math.nan
                diff_per_j = lam_star / (two_j / 2) - lam_c_per_j if not math.isnan(lam_star) else math.nan
                prec_rows.append(_provenance(params, 0) + [gamma, lam_star, diff_per_j])
                if not math.isnan(diff_per_j) and abs(diff_per_j) > 0:
                    xs.append(two_j / 2)
                    ys.append(abs(diff_per_j))
            if len(xs) >= 3:
                try:
                    fit = sp.fit_power_law(xs, ys)
                    fit_rows.append(["precursor_scaling", p, gamma, fit.exponent, fit.prefactor, fit.r_squared, fit.n_points])
                except ValueError as exc:
                    fit_rows.append(["precursor_scaling", p, gamma, math.nan, math.nan, math.nan, len(xs)])
                    print(f"fit failed for p={p}, gamma={gamma}: {exc}", file=sys.stderr)

    write_csv(os.path.join(out, "doublet_eigenvalues.csv"),
              ["two_j", "p", "gamma", "gamma0", "h", "M", "re_lambda1", "re_lambda2"], doublet_rows)
    write_csv(os.path.join(out, "d1_decay.csv"),
              ["two_j", "p", "gamma", "gamma0", "h", "M", "d1"], d1_rows)
    write_csv(os.path.join(out, "precursor.csv"),
              ["two_j", "p", "gamma", "gamma0", "h", "M", "gamma_bound", "re_lambda_star", "diff_per_j"], prec_rows)
    write_csv(os.path.join(out, "fits.csv"),
              ["series", "p", "gamma_bound", "exponent", "prefactor", "r_squared", "n_points"], fit_rows)
    if d1_rows:
        groups = []
        for p in ps:
            xs = [r[0] / 2 for r in d1_rows if r[1] == p and r[6] >= sp.DISTANCE_FLOOR]
            ys = [r[6] for r in d1_rows if r[1] == p and r[6] >= sp.DISTANCE_FLOOR]
            if xs:
                groups.append((f"p={p}", xs, np.log10(ys)))
        if groups:
            svg_lines(os.path.join(out, "d1_decay.svg"), groups,
                      xlabel="j", ylabel="log10 d1", title="doublet coalescence")
    print(f"wrote scaling CSVs to {out} ({len(prec_rows)} precursor rows)")
    return 0


def cmd_evolve(args) -> int:
    cfg = _config_from(args)
    if "two_j" not in cfg or "initial" not in cfg:
        print("error: evolve needs --two-j and --initial", file=sys.stderr)
        return 2
    two_js = parse_int_list(cfg["two_j"])
    p = parse_float_list(cfg.get("p", "0"))[0]
    times = parse_time_grid(cfg.get("times", "lin:0:3:61"))
    out = cfg.get("out", "out")
    name, kw = parse_initial(cfg["initial"])
    trace_rows, extra_rows = [], []
    groups = []

    if name == "hp-doublet":
        for two_j in two_js:
            params = _params(cfg, two_j, p)
            try:
                res = dyn.slowdown_experiment(params, kw["a"], kw["b"], times)
            except ValueError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return 1
            for t, v in zip(res.numeric.times, res.numeric.values):
                trace_rows.append([t, v, two_j, p, "delta_jz_numeric"])
            for t, v in zip(res.theory.times, res.theory.values):
                trace_rows.append([t, v, two_j, p, "delta_jz_theory"])
            dev = (res.numeric.values - res.theory.values) / res.theory.values
            for t, v in zip(times, dev):
                extra_rows.append([t, v, two_j, p, "relative_deviation"])
            groups.append((f"numeric j={two_j/2:g}", times, res.numeric.values))
            groups.append((f"theory j={two_j/2:g}", times, res.theory.values))
        if len(two_js) >= 3:
            mid = times[len(times) // 2]
            devs = []
            for two_j in two_js:
                dv = [abs(r[1]) for r in extra_rows if r[2] == two_j and abs(r[0] - mid) < 1e-12]
                if dv:
                    devs.append((two_j / 2, dv[0]))
            if len(devs) >= 3:
                fit = sp.fit_power_law([d[0] for d in devs], [d[1] for d in devs])
                extra_rows.append([mid, fit.exponent, 0, p, "deviation_powerlaw_exponent"])
        svg_lines(os.path.join(out, "slowdown.svg"), groups, xlabel="t", ylabel="delta Jz",
                  title="relaxation slow-down")
    elif name == "coherent":
        if p != 0:
            print("error: coherent-state oscillation run requires p=0", file=sys.stderr)
            return 1
        params0 = _params(cfg, two_js[0], 0.0)
        curves = dyn.btc_experiment(params0, two_js, times,
                                    cross_check_max_two_j=int(cfg.get("cross_check_max_two_j", 0)))
        for two_j, tr in curves.items():
            for t, v in zip(tr.times, tr.values):
                trace_rows.append([t, v, two_j, 0.0, "jx_over_j"])
            groups.append((f"j={two_j/2:g}", tr.times, tr.values))
        svg_lines(os.path.join(out, "oscillations.svg"), groups, xlabel="t", ylabel="<Jx>/j",
                  title="undamped oscillations toward the large-j limit")
    elif name == "fock":
        for two_j in two_js:
            params = _params(cfg, two_j, p)
            m0 = min(kw["m"], two_j / 2)  # m=top selects the highest-weight state
            rho0 = dyn.fock_state(two_j, m0)
            states = dyn.propagate(params, rho0, times)
            svals = [dyn.entropy(s) for s in states]
            jzvals = [dyn.expectation(s, "jz") for s in states]
            for t, v in zip(times, svals):
                trace_rows.append([t, v, two_j, p, "entropy"])
            for t, v in zip(times, jzvals):
                trace_rows.append([t, v, two_j, p, "jz"])
            groups.append((f"S(t) j={two_j/2:g}", times, np.asarray(svals)))
            extra_rows.append([times[-1], math.log(two_j + 1), two_j, p, "entropy_upper_bound"])
        svg_lines(os.path.join(out, "entropy.svg"), groups, xlabel="t", ylabel="S", title="entropy growth")
    else:
        print(f"error: unhandled selector {name}", file=sys.stderr)
        return 2

    write_csv(os.path.join(out, "traces.csv"),
              ["t", "value", "two_j", "p", "observable_label"], trace_rows)
    if extra_rows:
        write_csv(os.path.join(out, "derived.csv"),
                  ["t", "value", "two_j", "p", "observable_label"], extra_rows)
    print(f"wrote evolve CSVs to {out} ({len(trace_rows)} trace rows)")
    return 0


def cmd_verify(args) -> int:
    results = run_all_checks()
    worst_fail = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        detail = f"  # {r.detail}" if r.detail else ""
        print(f"{status} {r.name} measured={fmt(r.measured)} tol={fmt(r.tolerance)}{detail}")
        if not r.passed:
            worst_fail = 1
    print(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    return worst_fail


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="spinbath",
        description="Spectra and dynamics of a dissipative collective spin in a polarized bath",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn, help_ in (
        ("spectrum", cmd_spectrum, "emit sector spectra and a scatter plot"),
        ("scaling", cmd_scaling, "doublet/precursor finite-size scaling data and fits"),
        ("evolve", cmd_evolve, "time evolution experiments (slow-down, oscillations, entropy)"),
        ("verify", cmd_verify, "run the invariant suite and report pass/fail"),
    ):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=fn)
        if name != "verify":
            p.add_argument("--config", help="key=value configuration file")
            p.add_argument("--out", help="output directory (default ./out)")
            p.add_argument("--jobs", type=int, help="worker threads for sweeps")
            p.add_argument("--two-j", dest="two_j", help="list of 2j values, e.g. '40 80 160'")
            p.add_argument("--p", help="list of polarizations, e.g. '0 0.5 0.99'")
            p.add_argument("--m", help="list of sectors M (default: all)")
            p.add_argument("--gamma-bound", dest="gamma_bound", help="list of coalescence bounds")
            p.add_argument("--times", help="time grid lin:START:STOP:NUM or log:START:STOP:NUM")
            p.add_argument("--initial", help="initial state: hp-doublet:a=..:b=.. | fock:m=.. | coherent:theta=..:phi=..")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
