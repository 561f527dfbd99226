"""``trscat`` command-line front end.

Exit codes: 0 success, 1 domain error (a mathematical precondition failed),
2 usage error (bad arguments, malformed config, missing input file).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import __version__
from .boundstate import EtaData, bound_state
from .errors import DomainError, UsageError
from .fdoracle import oracle_scan
from .io import Manifest, load_json, write_json, write_scan_csv
from .locator import FIXED_POINT, NEWTON, comparison_report, locate_state
from .plotting import plot_scan
from .potential import potential_from_config
from .propagate import integrate_fundamentals, dump_trajectory
from .recipes import FIGURES
from .scattering import RESONANCE, ZERO_REFLECTION, scan_rt
from .sho import sho_bound_state, sho_locate, sho_potential

log = logging.getLogger("trscat")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _pair(text):
    try:
        lo, hi = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'lo,hi', got {text!r}") from None
    return lo, hi


def _floats(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=1, help="worker threads for energy scans")
    common.add_argument("--verbose", action="store_true")
    common.add_argument("--manifest", help="write a run manifest to this path")

    ap = _Parser(prog="trscat", description=__doc__.splitlines()[0], parents=[common])
    ap.add_argument("--version", action="version", version=f"trscat {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("bound-state", parents=[common], help="defect bound state and its normalization data")
    b.add_argument("--config", required=True)
    b.add_argument("--domain", type=float, required=True, help="half-width L of the Dirichlet box")
    b.add_argument("--grid-step", type=float, default=0.005)
    b.add_argument("--window", type=_pair, required=True, help="energy window lo,hi")
    b.add_argument("--no-refine", action="store_true", help="keep the finite-difference eigenpair")
    b.add_argument("--out", required=True)

    for name, helptext in (("scan", "R and T on an energy grid"), ("oracle-scan", "finite-difference R and T")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--config", required=True)
        s.add_argument("--emin", type=float, required=True)
        s.add_argument("--emax", type=float, required=True)
        s.add_argument("--n", type=int, default=200)
        s.add_argument("--out", required=True)
        s.add_argument("--plot", help="also render a PNG here")
        if name == "scan":
            s.add_argument("--refine-peaks", action="store_true")
        else:
            s.add_argument("--grid-step", type=float, default=1e-3)
            s.add_argument("--domain", type=float, default=None)

    for name in (ZERO_REFLECTION, RESONANCE):
        s = sub.add_parser(name, parents=[common], help=f"locate the {name} state near the bound state")
        s.add_argument("--config", required=True)
        s.add_argument("--eta", required=True)
        s.add_argument("--method", choices=(NEWTON, FIXED_POINT), default=NEWTON)
        s.add_argument("--out", required=True)
        s.add_argument("--dump-trajectory", help="CSV of the fundamental system at the located point")

    c = sub.add_parser("compare", parents=[common], help="comparison report over a truncation sweep")
    c.add_argument("--config", required=True)
    c.add_argument("--eta", required=True)
    c.add_argument("--msweep", type=_floats, default=[6.0, 8.0, 10.0])
    c.add_argument("--method", choices=(NEWTON, FIXED_POINT), default=NEWTON)
    c.add_argument("--no-bounds", action="store_true", help="skip the disk sampling of R")
    c.add_argument("--out", required=True)

    h = sub.add_parser("sho", parents=[common], help="truncated harmonic oscillator V = x^2")
    h.add_argument("--n", type=int, required=True)
    h.add_argument("--M", type=float, required=True)
    h.add_argument("--mode", choices=(ZERO_REFLECTION, RESONANCE, "scan"), default=ZERO_REFLECTION)
    h.add_argument("--method", choices=(NEWTON, FIXED_POINT), default=NEWTON)
    h.add_argument("--emin", type=float)
    h.add_argument("--emax", type=float)
    h.add_argument("--points", type=int, default=400)
    h.add_argument("--out", required=True)

    f = sub.add_parser("reproduce-figure", parents=[common], help="run a figure pipeline, write CSV and PNG")
    f.add_argument("figure", type=int, choices=sorted(FIGURES))
    f.add_argument("--out-dir", default=".")
    return ap


def _potential(path):
    return potential_from_config(load_json(path, "potential config"))


def _eta(path, p):
    d = load_json(path, "bound-state file")
    try:
        eta = EtaData.from_dict(d)
    except (KeyError, TypeError, ValueError) as e:
        raise UsageError(f"malformed bound-state file {path}: {e}") from None
    return eta if eta.M == p.M else eta.with_M(p.M)


def _check_range(a):
    if not a.emin < a.emax:
        raise UsageError(f"--emin ({a.emin}) must be smaller than --emax ({a.emax})")
    if a.n < 2:
        raise UsageError("--n must be at least 2")


def cmd_bound_state(a, man):
    p = _potential(a.config)
    eta = bound_state(p, a.window, a.domain, a.grid_step, refine=not a.no_refine)
    write_json(a.out, eta.to_dict())
    man.output(a.out, "eta")
    man.fitted(k_minus=eta.k_minus, k_plus=eta.k_plus, E=eta.E, w0=eta.w0)
    log.info("E = %.12g (%s), k = %.6g", eta.E, eta.case, eta.k)


def cmd_scan(a, man):
    _check_range(a)
    p = _potential(a.config)
    if a.command == "scan":
        table = scan_rt(p, a.emin, a.emax, a.n, threads=a.threads, refine=a.refine_peaks)
    else:
        table = oracle_scan(p, a.emin, a.emax, a.n, h=a.grid_step, L=a.domain, threads=a.threads)
    write_scan_csv(a.out, table)
    man.output(a.out, "scan-csv")
    if a.plot:
        plot_scan(table, a.plot, potential=p)
        man.output(a.plot, "png")


def cmd_locate(a, man):
    p = _potential(a.config)
    eta = _eta(a.eta, p)
    st = locate_state(eta, p, a.command, a.method, check_ball=a.command == ZERO_REFLECTION)
    write_json(a.out, st.to_dict())
    man.output(a.out, "state")
    man.fitted(k=eta.k, ball_radius=st.ball_radius)
    if a.dump_trajectory:
        bd = integrate_fundamentals(p, st.zeta, eta.case, keep=True)
        dump_trajectory(bd, a.dump_trajectory)
        man.output(a.dump_trajectory, "trajectory-csv")
    log.info("z = %r, residual %.3g after %d iterations", st.z, st.residual_norm, st.iterations)


def cmd_compare(a, man):
    p0 = _potential(a.config)
    eta0 = _eta(a.eta, p0)
    reports = []
    for M in a.msweep:
        p = p0.with_M(M)
        eta = eta0.with_M(M)
        rep = comparison_report(eta, p, method=a.method, with_bounds=not a.no_bounds)
        reports.append(rep.to_dict())
        log.info("M = %g: z_Y = %r, z_X = %r", M, rep.z_Y, rep.z_X)
    write_json(a.out, {"E": eta0.E, "msweep": a.msweep, "reports": reports})
    man.output(a.out, "comparison")
    man.fitted(k_by_M={str(r["M"]): r["k"] for r in reports})


def cmd_sho(a, man):
    if a.n < 0:
        raise UsageError("--n must be non-negative")
    state = sho_bound_state(a.n)
    if a.mode == "scan":
        lo = a.emin if a.emin is not None else max(0.05, state.E - 1.0)
        hi = a.emax if a.emax is not None else state.E + 1.0
        if not lo < hi:
            raise UsageError("--emin must be smaller than --emax")
        table = scan_rt(sho_potential(a.M), lo, hi, a.points, threads=a.threads, refine=True)
        write_scan_csv(a.out, table)
        man.output(a.out, "scan-csv")
        return
    st = sho_locate(a.n, a.M, a.mode, a.method)
    out = st.to_dict()
    out.update({"n": a.n, "E_n": state.E, "M": a.M})
    write_json(a.out, out)
    man.output(a.out, "state")


def cmd_figure(a, man):
    res = FIGURES[a.figure](out_dir=a.out_dir, threads=a.threads)
    man.output(res.csv, "scan-csv")
    man.output(res.png, "png")
    man.set("summary", res.summary)
    print(res.csv)


COMMANDS = {
    "bound-state": cmd_bound_state,
    "scan": cmd_scan,
    "oracle-scan": cmd_scan,
    ZERO_REFLECTION: cmd_locate,
    RESONANCE: cmd_locate,
    "compare": cmd_compare,
    "sho": cmd_sho,
    "reproduce-figure": cmd_figure,
}


def run(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        a = build_parser().parse_args(argv)
    except UsageError as e:
        print(f"trscat: usage error: {e}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, format="%(name)s: %(message)s")
    config = None
    if getattr(a, "config", None) and os.path.exists(a.config):
        try:
            config = load_json(a.config)
        except UsageError:
            config = None
    man = Manifest(a.command, argv, config)
    try:
        COMMANDS[a.command](a, man)
    except UsageError as e:
        print(f"trscat: usage error: {e}", file=sys.stderr)
        return 2
    except DomainError as e:
        print(f"trscat: {e}", file=sys.stderr)
        return 1
    if a.manifest:
        man.write(a.manifest)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
