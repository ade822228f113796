"""Command-line interface: verification tables, sweeps, and figure data.

Commands
--------
verify      closed-form coefficients against quadrature oracles (exit 0
            iff every row passes)
speeds      pushed-front speeds over a d1 range at fixed delta^2
transition  pushed-to-pulled transition locus over a delta^2 range, with
            the quadratic fit of d1*(delta^2)
front       one front profile (pushed or pulled)
spectrum    point-spectrum scan about one front
sweep       generic parameter sweep driven by config keys

Configuration is a flat key-value text file (``key = value`` per line,
``#`` comments); command-line flags override file values.  All CSV output
uses 17 significant digits so identical configurations produce
byte-identical files.  Exit codes: 0 success, 1 numerical failure,
2 usage error.
"""

import argparse
import sys
from dataclasses import dataclass, field
from math import sqrt
from pathlib import Path

import numpy as np

from . import pme
from .continuation import Grid, SweepPlan, find_transition, quadratic_fit, solve_pulled, solve_pushed, sweep
from .errors import FrontlabError
from .model import ModelParams, essential_spectrum, linear_spreading_speed

FMT = "%.17g"


def _fmt(value):
    if isinstance(value, str):
        return value
    return FMT % value


@dataclass
class ExpansionReport:
    """Closed-form coefficients with oracle cross-checks."""

    rows: list = field(default_factory=list)

    def add(self, quantity, closed_form, oracle, tol, relative=False):
        dev = abs(closed_form - oracle)
        scale = abs(closed_form) if relative else 1.0
        ok = dev <= tol * max(scale, 1e-300)
        self.rows.append({
            "quantity": quantity, "closed_form": closed_form, "oracle": oracle,
            "abs_dev": dev, "tol": tol * max(scale, 1e-300), "pass": ok,
        })
        return ok

    @property
    def all_pass(self):
        return all(r["pass"] for r in self.rows)

    def table(self):
        lines = [f"{'quantity':<38} {'closed_form':>24} {'oracle':>24} {'abs_dev':>12} {'pass':>5}"]
        for r in self.rows:
            lines.append(
                f"{r['quantity']:<38} {r['closed_form']:>24.16g} {r['oracle']:>24.16g} "
                f"{r['abs_dev']:>12.3e} {'ok' if r['pass'] else 'FAIL':>5}"
            )
        return "\n".join(lines)


def build_report():
    """Every closed-form/oracle pair behind the expansion coefficients."""
    rep = ExpansionReport()
    rep.add("d12 vs paper value", pme.d12(), 0.0648259, 1e-6)
    rep.add("d12 from ingredients", pme.d12(), pme.d12(from_ingredients=True), 1e-10)
    rep.add("transition flux <d_x(u u'''), phi>", pme.transition_flux_value(),
            pme.transition_flux_value(oracle=True), 1e-8, relative=True)
    rep.add("transition marginal inner product", pme.transition_marginal_value(),
            pme.transition_marginal_value(oracle=True), 1e-8, relative=True)
    rep.add("far-field cokernel limit", -1.0 / sqrt(2.0), pme.farfield_cokernel_limit(), 1e-6)
    rep.add("c_ps2(0.5) bracket cancellation", 0.0, pme.c_ps2(0.5), 1e-10)
    for d1 in (0.1, 0.2, 0.3, 0.4, 0.45):
        rep.add(f"<d_x u, phi> at d1={d1}", pme.inner_product_dxu_phi(d1),
                pme.inner_product_dxu_phi(d1, oracle=True), 1e-8, relative=True)
        rep.add(f"<d_x(u u'''), phi> at d1={d1}", pme.inner_product_flux_phi(d1),
                pme.inner_product_flux_phi(d1, oracle=True), 1e-8, relative=True)
        ratio = -pme.inner_product_flux_phi(d1, oracle=True) / pme.inner_product_dxu_phi(d1, oracle=True)
        rep.add(f"c_ps2 ratio oracle at d1={d1}", pme.c_ps2(d1), ratio, 1e-8, relative=True)
    return rep


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

_DEFAULTS = {
    "d1": 0.45, "delta2": 0.0, "L": 20.0, "dx": 0.1, "out": "frontlab_out",
    "plots": False, "kind": "auto",
    "d1_min": 0.40, "d1_max": 0.49, "d1_step": 0.01,
    "delta2_min": 0.0, "delta2_max": 0.3, "delta2_step": 0.02,
    "fit_window": 0.1, "vary": "delta2", "solve": "transition",
}


def read_config(path):
    cfg = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        cfg[key] = val
    return cfg


def _coerce(key, val):
    if isinstance(val, (int, float, bool)):
        return val
    if key in ("plots",):
        return str(val).lower() in ("1", "true", "yes", "on")
    if key in ("out", "kind", "vary", "solve"):
        return str(val)
    return float(val)


def resolve_config(args):
    cfg = dict(_DEFAULTS)
    if args.config:
        try:
            file_cfg = read_config(args.config)
        except (OSError, ValueError) as exc:
            raise UsageError(str(exc))
        for k, v in file_cfg.items():
            if k not in cfg:
                raise UsageError(f"unknown config key {k!r}")
            cfg[k] = _coerce(k, v)
    for k in cfg:
        flag = getattr(args, k, None)
        if flag is not None:
            cfg[k] = _coerce(k, flag)
    if cfg["dx"] <= 0 or cfg["L"] <= 0:
        raise UsageError("L and dx must be positive")
    return cfg


class UsageError(Exception):
    pass


def _grid(cfg):
    return Grid(L=cfg["L"], dx=cfg["dx"])


def _write_csv(path, header_comment, columns, rows):
    lines = [f"# {header_comment}", ",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in columns))
    Path(path).write_text("\n".join(lines) + "\n")
    return path


def _plot(path, curves, xlabel, ylabel, title):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    for crv in curves:
        ax.plot(crv["x"], crv["y"], crv.get("style", "-"),
                color=crv.get("color"), label=crv.get("label"))
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_verify(cfg):
    rep = build_report()
    print(rep.table())
    print(f"\n{'all checks passed' if rep.all_pass else 'FAILURES present'}")
    return 0 if rep.all_pass else 1


def cmd_speeds(cfg):
    grid = _grid(cfg)
    plan = SweepPlan(vary="d1", start=cfg["d1_min"], stop=cfg["d1_max"],
                     step=cfg["d1_step"], solve="pushed", fixed=cfg["delta2"])
    rows = sweep(plan, grid)
    out_rows = []
    ok = True
    for r in rows:
        if r["error"]:
            ok = False
            out_rows.append({"d1": r["d1"], "delta2": r["delta2"], "c_numeric": "nan",
                             "c_pm": _fmt(pme.c_pm(r["d1"])), "c_expansion": "nan",
                             "dev": "nan", "error": r["error"]})
            continue
        d1 = r["d1"]
        cpm = pme.c_pm(d1)
        cexp = (pme.pushed_speed_expansion(d1, sqrt(r["delta2"]))
                if 0 < d1 < 0.5 else cpm)
        out_rows.append({"d1": d1, "delta2": r["delta2"], "c_numeric": r["c_numeric"],
                         "c_pm": cpm, "c_expansion": cexp,
                         "dev": r["c_numeric"] - cpm, "error": ""})
    path = _write_csv(
        f"{cfg['out']}_speeds.csv",
        "pushed-front speeds; x in rescaled units; c_numeric from continuation, "
        "c_pm/c_expansion closed-form; dev = c_numeric - c_pm",
        ["d1", "delta2", "c_numeric", "c_pm", "c_expansion", "dev", "error"],
        out_rows)
    print(f"wrote {path}")
    if cfg["plots"]:
        good = [r for r in out_rows if not r["error"]]
        p = _plot(f"{cfg['out']}_speeds.svg",
                  [{"x": [r["d1"] for r in good], "y": [r["dev"] for r in good],
                    "style": "o-", "label": "continuation"},
                   {"x": [r["d1"] for r in good],
                    "y": [r["c_expansion"] - r["c_pm"] for r in good],
                    "style": "--", "color": "black", "label": "second-order expansion"}],
                  "d1", "c - c_pm(d1)", f"pushed speed deviation, delta^2 = {cfg['delta2']}")
        print(f"wrote {p}")
    return 0 if ok else 1


def cmd_transition(cfg):
    grid = _grid(cfg)
    plan = SweepPlan(vary="delta2", start=cfg["delta2_min"], stop=cfg["delta2_max"],
                     step=cfg["delta2_step"], solve="transition")
    rows = sweep(plan, grid)
    out_rows = []
    for r in rows:
        pred = pme.transition_expansion(sqrt(r["delta2"]))
        if r["error"]:
            out_rows.append({"delta2": r["delta2"], "d1_star": "nan", "a_slope": "nan",
                             "linear_pred": pred, "resid": "nan", "error": r["error"]})
        else:
            out_rows.append({"delta2": r["delta2"], "d1_star": r["d1_star"],
                             "a_slope": r["a_slope"], "linear_pred": pred,
                             "resid": r["d1_star"] - pred, "error": ""})
    path = _write_csv(
        f"{cfg['out']}_transition.csv",
        "pushed-to-pulled transition locus; d1_star from continuation (computed), "
        "linear_pred = 1/2 + d12 delta^2 (closed-form); resid = d1_star - linear_pred",
        ["delta2", "d1_star", "a_slope", "linear_pred", "resid", "error"],
        out_rows)
    print(f"wrote {path}")
    good = [(r["delta2"], r["d1_star"]) for r in out_rows if not r["error"]]
    for label, window in (("fit window delta2 <= %g" % cfg["fit_window"], cfg["fit_window"]),
                          ("fit over all converged rows", np.inf)):
        pts = [(t, d) for t, d in good if t <= window]
        if len(pts) >= 5:
            (c0, c1, c2), diag = quadratic_fit(pts)
            print(f"{label}: d1* ~ {FMT % c0} + {FMT % c1} delta^2 + {FMT % c2} delta^4 "
                  f"(rms {diag['rms_residual']:.2e}, n={diag['n']})")
    if cfg["plots"] and good:
        t = [p[0] for p in good]
        p = _plot(f"{cfg['out']}_transition.svg",
                  [{"x": t, "y": [p[1] for p in good], "style": "o", "label": "continuation"},
                   {"x": t, "y": [pme.transition_expansion(sqrt(tt)) for tt in t],
                    "style": "-", "color": "black", "label": "linear prediction"}],
                  "delta^2", "d1*", "pushed-to-pulled transition")
        print(f"wrote {p}")
    return 0 if any(not r["error"] for r in out_rows) else 1


def cmd_front(cfg):
    grid = _grid(cfg)
    delta = sqrt(cfg["delta2"])
    kind = cfg["kind"]
    if kind == "auto":
        kind = "pushed" if cfg["d1"] < pme.transition_expansion(delta) else "pulled"
    sol = (solve_pushed if kind == "pushed" else solve_pulled)(cfg["d1"], delta, grid)
    u, du, _d2u, v, _dv, _d2v = sol.profiles()
    rows = [{"x": x, "u": uu, "v": vv, "w_u": wu,
             "w_v": (sol.w_v[i] if sol.w_v is not None else 0.0)}
            for i, (x, uu, vv, wu) in enumerate(zip(grid.x, u, v, sol.w_u))]
    path = _write_csv(
        f"{cfg['out']}_front.csv",
        f"{sol.kind} front at d1={_fmt(cfg['d1'])}, delta2={_fmt(cfg['delta2'])}; "
        f"c={_fmt(sol.c)} (computed); a={_fmt(sol.a if sol.a is not None else 0.0)}, "
        f"b={_fmt(sol.b)}, decay={_fmt(-sol.nu_farfield)}; u,v computed profiles, "
        "w_u,w_v core corrections",
        ["x", "u", "v", "w_u", "w_v"], rows)
    print(f"wrote {path}")
    print(f"kind={sol.kind} c={FMT % sol.c} a={sol.a} b={FMT % sol.b} "
          f"residual={sol.residual_norm:.3e}")
    if cfg["plots"]:
        p = _plot(f"{cfg['out']}_front.svg",
                  [{"x": grid.x, "y": u, "label": "u"},
                   {"x": grid.x, "y": v, "style": "--", "label": "v"}],
                  "x", "profile", f"{sol.kind} front, d1={cfg['d1']}, delta^2={cfg['delta2']}")
        print(f"wrote {p}")
    return 0


def cmd_spectrum(cfg):
    from . import spectra

    grid = _grid(cfg)
    delta = sqrt(cfg["delta2"])
    kind = cfg["kind"]
    if kind == "auto":
        kind = "pushed" if cfg["d1"] < pme.transition_expansion(delta) else "pulled"
    _front, _lin, cands = spectra.scan_point_spectrum(cfg["d1"], delta, kind, grid=grid)
    rows = [{"d1": cfg["d1"], "delta2": cfg["delta2"], "re_lambda": c["lam"].real,
             "im_lambda": c["lam"].imag, "class": c["classification"]}
            for c in cands]
    path = _write_csv(
        f"{cfg['out']}_spectrum.csv",
        f"point-spectrum scan ({kind} front); lambda in temporal units; "
        "class in {translation, point, essential}",
        ["d1", "delta2", "re_lambda", "im_lambda", "class"], rows)
    print(f"wrote {path} ({len(rows)} candidates)")
    return 0


def cmd_sweep(cfg):
    grid = _grid(cfg)
    vary = cfg["vary"]
    if vary == "d1":
        start, stop, step = cfg["d1_min"], cfg["d1_max"], cfg["d1_step"]
        fixed = cfg["delta2"]
    else:
        start, stop, step = cfg["delta2_min"], cfg["delta2_max"], cfg["delta2_step"]
        fixed = cfg["d1"]
    plan = SweepPlan(vary=vary, start=start, stop=stop, step=step,
                     solve=cfg["solve"], fixed=fixed)
    rows = sweep(plan, grid)
    cols = sorted({k for r in rows for k in r if k != "detail"})
    out_rows = [{c: r.get(c, "") for c in cols} for r in rows]
    path = _write_csv(f"{cfg['out']}_sweep.csv",
                      f"sweep of {cfg['solve']} over {vary}; errors recorded per row",
                      cols, out_rows)
    print(f"wrote {path}")
    return 0 if any(not r["error"] for r in rows) else 1


COMMANDS = {
    "verify": cmd_verify,
    "speeds": cmd_speeds,
    "transition": cmd_transition,
    "front": cmd_front,
    "spectrum": cmd_spectrum,
    "sweep": cmd_sweep,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="frontlab",
        description="Invasion-front speeds, profiles, and the pushed-to-pulled "
                    "transition for the logistic Keller-Segel model with chemorepulsion.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="flat key-value config file")
    parser.add_argument("--d1", type=float)
    parser.add_argument("--delta2", type=float)
    parser.add_argument("--L", type=float)
    parser.add_argument("--dx", type=float)
    parser.add_argument("--out", help="output path prefix")
    parser.add_argument("--plots", action="store_const", const=True, default=None,
                        help="emit SVG plots")
    parser.add_argument("--kind", choices=["auto", "pushed", "pulled"])
    parser.add_argument("--d1-min", dest="d1_min", type=float)
    parser.add_argument("--d1-max", dest="d1_max", type=float)
    parser.add_argument("--d1-step", dest="d1_step", type=float)
    parser.add_argument("--delta2-min", dest="delta2_min", type=float)
    parser.add_argument("--delta2-max", dest="delta2_max", type=float)
    parser.add_argument("--delta2-step", dest="delta2_step", type=float)
    parser.add_argument("--fit-window", dest="fit_window", type=float)
    parser.add_argument("--vary", choices=["d1", "delta2"])
    parser.add_argument("--solve", choices=["pushed", "pulled", "transition"])
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](cfg)
    except FrontlabError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
