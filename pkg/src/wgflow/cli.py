"""Command-line experiments. Each subcommand writes one CSV (plus sibling files for
secondary tables) whose first line is '# ' + JSON metadata; everything below it is
deterministic for a fixed configuration. Exit status 1 means a built-in check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .counterexamples import (
    Example1Geometry,
    example1_density,
    example1_jump_probe,
    example1_mass,
    example2_D0,
    example2_density,
    example2_kl_floor,
    example2_initial,
    example2_recursion,
    example2_target,
    fe_map_example1,
    pinsker_floor_closed_form,
)
from .fokker_planck import FpConfig, fe_vs_fp_gap, fp_solve, gaussian_control_gap, grid_restriction, write_snapshots
from .kl_flow import KlState, run_fe_particles, write_run_log
from .measures import ParticleEnsemble
from .metrics import kl_piecewise
from .pgd import SolverConfig, default_problem, run_pgd

KL_FLOOR = 0.019
FP_KL_MAX = 0.005

# ---------------------------------------------------------------------------
# config files and CSV output
# ---------------------------------------------------------------------------


def _bool(s) -> bool:
    if isinstance(s, bool):
        return s
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _floats(s):
    if isinstance(s, (list, tuple)):
        return [float(v) for v in s]
    return [float(v) for v in str(s).replace(";", ",").split(",") if v.strip()]


def _opt_float(s):
    if s is None or str(s).strip().lower() in ("", "none", "null"):
        return None
    return float(s)


SCHEMAS = {
    "example1": {"h": float, "grid": int, "y_max": float, "delta0": float, "halvings": int, "out": str},
    "example2": {"h": float, "n": int, "particles": int, "seed": int, "out": str},
    "pgd": {
        "epsilon": _opt_float,
        "N": int,
        "d": int,
        "R0": float,
        "domain": str,
        "h_policy": str,
        "h": _opt_float,
        "max_iters": int,
        "tol": float,
        "seed": int,
        "m": _opt_float,
        "convex_check": _bool,
        "out": str,
    },
    "fe-vs-fp": {"h": _floats, "T_end": float, "grid": int, "tau": float, "s0": float, "snapshots": str, "out": str},
}
SCHEMAS["rates"] = dict(SCHEMAS["pgd"], runs=int)

DEFAULTS = {
    "example1": {"h": 1.0 / 27.0, "grid": 2001, "y_max": None, "delta0": 0.05, "halvings": 10},
    "example2": {"h": 0.3, "n": 50, "particles": 0, "seed": 0},
    "pgd": {
        "epsilon": None,
        "N": 200,
        "d": 1,
        "R0": 1.0,
        "domain": None,
        "h_policy": "theoretical",
        "h": None,
        "max_iters": 500,
        "tol": 0.0,
        "seed": 0,
        "m": None,
        "convex_check": False,
    },
    "fe-vs-fp": {"h": [0.2, 0.1, 0.05, 0.025], "T_end": 2.0, "grid": 2001, "tau": 1e-4, "s0": 2.0, "snapshots": None},
}
DEFAULTS["rates"] = dict(DEFAULTS["pgd"], runs=5)


def parse_config_text(text: str, command: str) -> dict:
    """Flat ``key = value`` lines; '#' starts a comment. Unknown keys are an error."""
    schema = SCHEMAS[command]
    keys = {k.lower(): k for k in schema}
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        k = k.replace("-", "_")
        canon = keys.get(k.lower())
        if canon is None:
            raise ValueError(f"line {lineno}: unknown key {k!r} for {command}")
        out[canon] = schema[canon](v)
    return out


def load_config(path, command: str) -> dict:
    return parse_config_text(Path(path).read_text(), command)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float) or isinstance(v, np.floating):
        return "%.17g" % float(v)
    return str(v)


def _jsonable(d: dict) -> dict:
    out = {}
    for k, v in d.items():
        if isinstance(v, float) and not math.isfinite(v):
            v = str(v)
        out[k] = v
    return out


def write_csv(path, meta: dict, header, rows, footer: dict | None = None) -> str:
    """Write (or return, when path is None) a CSV with a metadata comment line."""
    buf = io.StringIO(newline="")
    stamp = dict(_jsonable(meta), generated=datetime.now(timezone.utc).isoformat(timespec="seconds"))
    buf.write("# " + json.dumps(stamp, sort_keys=True) + "\r\n")
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    if footer is not None:
        buf.write("# " + json.dumps(_jsonable(footer), sort_keys=True) + "\r\n")
    text = buf.getvalue()
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def read_csv_body(path) -> tuple[dict, list[dict]]:
    """Metadata dict and data rows of a file written by :func:`write_csv` (footer lines dropped)."""
    lines = Path(path).read_text().splitlines()
    meta = json.loads(lines[0][2:])
    body = [ln for ln in lines[1:] if not ln.startswith("#")]
    return meta, list(csv.DictReader(body))


def _sibling(out, suffix: str):
    if out is None:
        return None
    p = Path(out)
    return p.with_name(p.stem + suffix + (p.suffix or ".csv"))


def _settings(args, command: str) -> dict:
    s = dict(DEFAULTS[command])
    if getattr(args, "config", None):
        s.update(load_config(args.config, command))
    schema = SCHEMAS[command]
    for k in schema:
        v = getattr(args, k, None)
        if v is not None:
            s[k] = schema[k](v) if not isinstance(v, (list, bool)) else v
    s["out"] = args.out if args.out is not None else s.get("out")
    return s


def _report(ok: bool, label: str) -> bool:
    print(f"[{'PASS' if ok else 'FAIL'}] {label}", file=sys.stderr)
    return ok


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_example1(args) -> int:
    s = _settings(args, "example1")
    h = s["h"]
    g = Example1Geometry(h)
    tmap = fe_map_example1(h)
    y_max = s["y_max"] or 2.0 * g.r
    m = s["grid"]
    y = np.linspace(-y_max, y_max, m)
    # shift by an irrational fraction of the spacing so no node lands on the singular set
    y = y + (y[1] - y[0]) / math.pi
    y = y[~tmap.is_singular(y)]
    rho1 = example1_density(h, y)
    counts = tmap.branch_count(y)
    mass = example1_mass(h)
    deltas = s["delta0"] * 0.5 ** np.arange(s["halvings"] + 1)
    probe = example1_jump_probe(h, deltas)

    meta = {"command": "example1", "h": h, "r": g.r, "split_points": list(g.split_points), "grid": m, "version": __version__}
    write_csv(s["out"], meta, ["y", "branch_count", "rho1"], zip(y, counts, rho1), footer={"mass": mass})
    jump_path = _sibling(s["out"], "_jump")
    if jump_path is not None:
        write_csv(
            jump_path,
            dict(meta, right_limit=probe.right_limit),
            ["delta", "rho1_left", "rho1_right"],
            zip(probe.deltas, probe.left, probe.right),
        )
    ok = _report(set(np.unique(counts)) <= {1, 3}, "branch counts in {1, 3}")
    ok &= _report(abs(mass - 1.0) <= 1e-6, f"mass {mass:.12f} = 1 +- 1e-6")
    ok &= _report(probe.left_increasing() and probe.left_ratio() > 10, f"left probe increasing, ratio {probe.left_ratio():.3f} > 10")
    ok &= _report(probe.right_converges(), f"right probe converges to {probe.right_limit:.6g}")
    return 0 if ok else 1


def cmd_example2(args) -> int:
    s = _settings(args, "example2")
    h, n = s["h"], s["n"]
    co = example2_recursion(h, n)
    target = example2_target()
    rows = []
    for k in range(n + 1):
        d = example2_density(co, k)
        rows.append((k, co.a[k], co.b[k], co.c[k], kl_piecewise(d, target), example2_kl_floor(d)))
    meta = {"command": "example2", "h": h, "n": n, "D0": example2_D0(), "pinsker_floor": pinsker_floor_closed_form(), "version": __version__}
    write_csv(s["out"], meta, ["n", "a_n", "b_n", "c_n", "kl_grid", "kl_floor"], rows)

    if s["particles"]:
        rho0 = example2_density(co, 0)
        u = np.random.default_rng(s["seed"]).random(s["particles"])
        init = ParticleEnsemble(rho0.quantile(u)[:, None])
        state = run_fe_particles(KlState(target, rho0, 0, init), h, n, lambda k: example2_density(co, k))
        path = _sibling(s["out"], "_particles")
        if path is not None:
            write_run_log(state, path)
    kl = np.array([r[4] for r in rows])
    floors = np.array([r[5] for r in rows])
    ok = _report(bool(np.all(kl > KL_FLOOR)), f"kl_grid > {KL_FLOOR} for all n (min {kl.min():.6f})")
    ok &= _report(float(np.ptp(floors)) <= 1e-12, "kl_floor constant across n")
    return 0 if ok else 1


def _pgd_problem(s):
    cfg = default_problem(s["d"], s["R0"], s["epsilon"], s["domain"])
    solver = SolverConfig(
        policy=s["h_policy"] if s["h"] is None else "fixed",
        h=s["h"],
        max_iters=s["max_iters"],
        tol=s["tol"],
        seed=s["seed"],
        n_particles=s["N"],
        m=s["m"],
        convex_check=s["convex_check"],
    )
    return cfg, solver


def _pgd_meta(command, s, cfg, cert):
    meta = {k: v for k, v in s.items() if k != "out"}
    meta.update(command=command, epsilon=cfg.epsilon, R0=cfg.R0, h_used=cert.h, F_lb=cert.F_lb, version=__version__)
    if cert.notes:
        meta["notes"] = list(cert.notes)
    return meta


def cmd_pgd(args) -> int:
    s = _settings(args, "pgd")
    cfg, solver = _pgd_problem(s)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        cert, final, traj = run_pgd(cfg, solver)
    header = ["n", "F_eps", "step_rms", "w2_to_final_1d_if_d1", "cert_decay_ok", "cert_rate_ok"]
    if cert.strong is not None:
        header += ["w2sq_to_final", "strong_rhs", "cert_strong_ok"]
    rows = []
    for k in range(cert.F.size):
        row = [
            k,
            cert.F[k],
            cert.step_rms[k - 1] if k else None,
            cert.w2_to_final[k] if cert.w2_to_final is not None else None,
            bool(cert.decay_ok[k - 1]) if k else True,
            bool(cert.rate_ok[k - 1]) if k else True,
        ]
        if cert.strong is not None:
            row += [cert.strong["lhs"][k], cert.strong["rhs"][k], bool(cert.strong["ok"][k])]
        rows.append(row)
    write_csv(s["out"], _pgd_meta("pgd", s, cfg, cert), header, rows)
    return _certificate_exit(solver, [cert])


def cmd_rates(args) -> int:
    s = _settings(args, "rates")
    cfg, solver = _pgd_problem(s)
    header = ["seed", "n", "F_eps", "F_gap_to_lb", "min_step_rms", "rate_bound", "cert_decay_ok", "cert_rate_ok"]
    if solver.m is not None:
        header += ["w2sq_to_final", "strong_rhs", "cert_strong_ok"]
    if solver.convex_check:
        header += ["convex_lhs", "convex_rhs", "cert_convex_ok"]
    rows, certs = [], []
    for r in range(s["runs"]):
        sv = SolverConfig(**{**solver.__dict__, "seed": solver.seed + r})
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            cert, _, _ = run_pgd(cfg, sv)
        certs.append(cert)
        pmin = np.minimum.accumulate(cert.step_rms)
        for k in range(1, cert.F.size):
            row = [sv.seed, k, cert.F[k], cert.F[k] - cert.F_lb, pmin[k - 1], cert.rate_bound[k - 1],
                   bool(cert.decay_ok[k - 1]), bool(cert.rate_ok[k - 1])]
            if cert.strong is not None:
                row += [cert.strong["lhs"][k], cert.strong["rhs"][k], bool(cert.strong["ok"][k])]
            if cert.convex is not None:
                row += [cert.convex["lhs"][k - 1], cert.convex["rhs"][k - 1], bool(cert.convex["ok"][k - 1])]
            rows.append(row)
    write_csv(s["out"], _pgd_meta("rates", s, cfg, certs[0]), header, rows)
    return _certificate_exit(solver, certs)


def _certificate_exit(solver, certs) -> int:
    decay = all(c.all_decay_ok() for c in certs)
    rate = all(c.all_rate_ok() for c in certs)
    if solver.policy == "theoretical":
        ok = _report(decay, "energy nonincreasing at every step")
        ok &= _report(rate, "minimal-step rate bound on every prefix")
        return 0 if ok else 1
    print(f"[INFO] {solver.policy} step size: decay={decay} rate={rate} (not guaranteed, not enforced)", file=sys.stderr)
    return 0


def cmd_fe_vs_fp(args) -> int:
    s = _settings(args, "fe-vs-fp")
    hs = sorted(s["h"], reverse=True)
    target = example2_target()
    fpc = FpConfig(target, M=s["grid"], tau=s["tau"], T_end=s["T_end"])
    rows, fp_final = fe_vs_fp_gap(hs, s["T_end"], fpc)
    control = gaussian_control_gap(hs, s["T_end"], s["s0"], fpc)
    meta = {k: v for k, v in s.items() if k != "out"}
    meta.update(command="fe-vs-fp", version=__version__)
    header = ["h", "n_steps", "w2_gap", "kl_fe", "kl_fp"]
    write_csv(s["out"], meta, header, [(r.h, r.n_steps, r.w2_gap, r.kl_fe, r.kl_fp) for r in rows])
    cpath = _sibling(s["out"], "_control")
    if cpath is not None:
        write_csv(cpath, dict(meta, control="gaussian", s0=s["s0"]), header,
                  [(r.h, r.n_steps, r.w2_gap, r.kl_fe, r.kl_fp) for r in control])
    if s["snapshots"]:
        write_snapshots(fp_solve(fpc, grid_restriction(fpc, example2_initial())), s["snapshots"])

    gap = {r.h: r.w2_gap for r in rows}
    ok = _report(all(r.kl_fe > KL_FLOOR for r in rows), f"KL(FE) > {KL_FLOOR} for every h")
    ok &= _report(rows[0].kl_fp < FP_KL_MAX, f"KL(FP) = {rows[0].kl_fp:.3e} < {FP_KL_MAX}")
    pairs = [(h, h / 4) for h in hs if any(abs(h / 4 - g) < 1e-12 for g in hs)]
    ratios = [gap[min(hs, key=lambda g: abs(g - q))] / gap[h] for h, q in pairs]
    if not ratios:
        ratios = [rows[-1].w2_gap / rows[0].w2_gap]
    ok &= _report(all(r >= 0.5 for r in ratios), f"gap(h/4)/gap(h) >= 0.5 (ratios {', '.join(f'{r:.3f}' for r in ratios)})")
    cg = [r.w2_gap for r in control]
    ok &= _report(all(b < a for a, b in zip(cg, cg[1:])), "Gaussian control gap decreases with h")
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wgflow", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="flat key=value file; command-line flags override it")
        sp.add_argument("--out", help="output CSV (stdout if omitted; sibling tables are skipped then)")

    e1 = sub.add_parser(
        "example1",
        help="quartic target, Gaussian start: one FE step and the jump at the critical value",
        description="Pushforward of N(0,1) under x - h x^3. Rows (y, branch_count, rho1); a "
        "sibling *_jump.csv holds rho1(r -+ delta). Checks: branch counts in {1,3}, unit mass, "
        "blow-up from the left of r, finite limit from the right.",
    )
    common(e1)
    e1.add_argument("--h", type=float)
    e1.add_argument("--grid", type=int, help="number of y rows")
    e1.add_argument("--y-max", dest="y_max", type=float, help="table covers [-y_max, y_max] (default 2r)")
    e1.add_argument("--delta0", type=float, help="first probe offset (default 0.05)")
    e1.add_argument("--halvings", type=int, help="number of halvings of the probe offset (default 10)")
    e1.set_defaults(func=cmd_example1)

    e2 = sub.add_parser(
        "example2",
        help="Gaussian target, Laplace-tailed start: closed-form FE iterates and the KL floor",
        description="Tail coefficients of every FE iterate with KL to the target and the Pinsker "
        "floor. Exit 1 if any KL is <= 0.019. --particles N also runs N sampled particles through "
        "the same steps and writes *_particles.csv.",
    )
    common(e2)
    e2.add_argument("--h", type=float)
    e2.add_argument("--n", type=int, help="last step index")
    e2.add_argument("--particles", type=int)
    e2.add_argument("--seed", type=int)
    e2.set_defaults(func=cmd_example2)

    def pgd_flags(sp):
        common(sp)
        sp.add_argument("--epsilon", type=float, help="kernel bandwidth (default R0^2/2)")
        sp.add_argument("--N", "--n", dest="N", type=int, help="particles")
        sp.add_argument("--d", type=int, help="dimension")
        sp.add_argument("--R0", type=float, help="domain radius")
        sp.add_argument("--domain", choices=["interval", "ball", "box"])
        sp.add_argument("--h-policy", dest="h_policy", choices=["theoretical", "empirical"])
        sp.add_argument("--h", type=float, help="fixed step size (overrides the policy; warns above 1/L)")
        sp.add_argument("--max-iters", dest="max_iters", type=int)
        sp.add_argument("--tol", type=float, help="stop when the RMS step falls below this")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--m", type=float, help="strong-convexity constant; enables that certificate")
        sp.add_argument("--convex-check", dest="convex_check", action="store_const", const=True)

    pg = sub.add_parser(
        "pgd",
        help="projected gradient descent on the regularized KL with rate certificates",
        description="Runs PGD for U=|x|^2/2 on a centred domain and logs the energy, RMS step, and "
        "the descent and minimal-step certificates. With the default (theoretical) step size "
        "h = 1/L a failed certificate gives exit 1; the empirical policy only reports.",
    )
    pgd_flags(pg)
    pg.set_defaults(func=cmd_pgd)

    rt = sub.add_parser(
        "rates",
        help="certificate table over several seeded PGD runs",
        description="Per-iteration certificate table for `runs` seeded PGD runs. The strong "
        "convexity block appears only when m is given, the convex block only with --convex-check; "
        "both measure distance to the final iterate and are diagnostics.",
    )
    pgd_flags(rt)
    rt.add_argument("--runs", type=int)
    rt.set_defaults(func=cmd_rates)

    fv = sub.add_parser(
        "fe-vs-fp",
        help="FE iterates against a Fokker-Planck reference solution: the gap does not close",
        description="Example-2 start: closed-form FE after ceil(T/h) steps vs an implicit "
        "finite-volume solution of the PDE at T. Rows (h, n_steps, w2_gap, kl_fe, kl_fp); "
        "*_control.csv repeats the comparison from a smooth Gaussian start.",
    )
    common(fv)
    fv.add_argument("--h", type=_floats, help="comma-separated step sizes")
    fv.add_argument("--T-end", dest="T_end", type=float)
    fv.add_argument("--grid", type=int, help="PDE grid nodes")
    fv.add_argument("--tau", type=float, help="PDE time step")
    fv.add_argument("--s0", type=float, help="std of the Gaussian control start")
    fv.add_argument("--snapshots", help="also write PDE snapshots (t, node, value) here")
    fv.set_defaults(func=cmd_fe_vs_fp)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
