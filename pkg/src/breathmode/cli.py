"""Command-line driver: one subcommand per engine plus the scan harness.

Exit codes: 0 success, 2 usage error, 3 numerical failure, 4 partial scan
failure.  Every run writes its effective config, a manifest and a
matplotlib plot script next to the data files.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import logging
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .errors import BreathingModeError, DomainError
from .model import SystemSpec, lambda_tilde
from .sumrules import estimate_frequencies

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_PARTIAL = 0, 2, 3, 4
BUNDLED = ("fig4", "fig7", "fig8")
log = logging.getLogger("breathmode")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- grids


def parse_float_grid(text: str) -> list[float]:
    """``a:b:n`` (linear), ``a:b:n:log`` (geometric), ``x,y,...`` or ``x``."""
    text = str(text).strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] != "log"):
                raise ValueError
            a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
            if n < 1:
                raise ValueError
            if n == 1:
                return [a]
            if len(parts) == 4:
                if a <= 0 or b <= 0:
                    raise ValueError
                return [float(v) for v in np.geomspace(a, b, n)]
            return [float(v) for v in np.linspace(a, b, n)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad grid {text!r}; use a:b:n, a:b:n:log or a comma list") from None


def parse_int_grid(text: str) -> list[int]:
    """``a:b`` (inclusive), ``a:b:step``, ``a:b:n:log`` or ``x,y,...``."""
    text = str(text).strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) == 4 and parts[3] == "log":
                a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
                return sorted({int(round(v)) for v in np.geomspace(a, b, n)})
            if len(parts) not in (2, 3):
                raise ValueError
            a, b = int(parts[0]), int(parts[1])
            step = int(parts[2]) if len(parts) == 3 else 1
            if step < 1:
                raise ValueError
            return list(range(a, b + 1, step))
        return [int(float(v)) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad integer grid {text!r}; use a:b, a:b:step, a:b:n:log "
                         "or a comma list") from None


# ---------------------------------------------------------------- outputs


def write_csv(path: Path, header: list, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# breathmode {__version__}\n")
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, float) else v)
                        for v in row])


def config_to_text(command: str, params: dict) -> str:
    cp = configparser.ConfigParser()
    cp[command] = {k: str(v) for k, v in params.items() if v is not None}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def write_run_files(out: Path, command: str, params: dict, started: float,
                    plot_script: str, extra: dict | None = None) -> None:
    (out / "config.cfg").write_text(config_to_text(command, params))
    manifest = {"software": "breathmode", "version": __version__, "command": command,
                "wall_clock_seconds": round(time.time() - started, 3),
                "finished": time.strftime("%Y-%m-%dT%H:%M:%S"), **(extra or {})}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    (out / "plot.py").write_text(plot_script)


PLOT_HEADER = '''"""Plot the CSV files in this directory (generated by breathmode)."""
import csv
from pathlib import Path

import matplotlib.pyplot as plt

HERE = Path(__file__).parent


def read(name):
    with open(HERE / name) as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
    head, body = rows[0], rows[1:]
    return {{h: [float(r[i]) if r[i] not in ("", "nan") else float("nan") for r in body]
            for i, h in enumerate(head) if h not in ("engine", "message")}}

'''

PLOT_XY = PLOT_HEADER + '''
data = read("{csv}")
fig, ax = plt.subplots()
for col in {ycols!r}:
    if col in data:
        ax.plot(data["{x}"], data[col], marker=".", label=col)
ax.set_xlabel("{x}")
ax.set_ylabel("{ylabel}")
{extra}
ax.legend()
fig.savefig(HERE / "{png}", dpi=150)
'''

PLOT_SCAN = PLOT_HEADER + '''
import numpy as np

for name in {tables!r}:
    data = read(f"table_{{name}}.csv")
    lams = np.unique(data["lambda"])
    ns = np.unique(data["N"])
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for ax, field in zip(axes, ("omega", "chi")):
        z = np.full((len(ns), len(lams)), np.nan)
        for lam, n, v in zip(data["lambda"], data["N"], data[field]):
            z[np.searchsorted(ns, n), np.searchsorted(lams, lam)] = v
        mesh = ax.pcolormesh(lams, ns, z, shading="nearest")
        ax.contour(lams, ns, z, colors="k", linestyles="dotted")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("lambda")
        ax.set_ylabel("N")
        ax.set_title(field)
        fig.colorbar(mesh, ax=ax)
    tilde = HERE / f"overlay_{{name}}.csv"
    if tilde.exists():
        ov = read(tilde.name)
        for ax in axes:
            ax.plot(ov["lambda_tilde"], ov["N"], "w--")
    fig.savefig(HERE / f"scan_{{name}}.png", dpi=150)

if (HERE / "lambda_tilde.csv").exists():
    lt = read("lambda_tilde.csv")
    fig, ax = plt.subplots()
    for d in sorted(set(lt["d"])):
        sel = [i for i, v in enumerate(lt["d"]) if v == d]
        ax.loglog([lt["N"][i] for i in sel], [lt["lambda_tilde"][i] for i in sel], label=f"d={{int(d)}}")
    ax.set_xlabel("N")
    ax.set_ylabel("lambda_tilde")
    ax.legend()
    fig.savefig(HERE / "lambda_tilde.png", dpi=150)
'''


# ---------------------------------------------------------------- commands


def _spec(d, n, alpha, lam, kappa):
    return SystemSpec(d, n, alpha=alpha, lam=lam, kappa=kappa if d == 1 else None)


def cmd_twobody(args, out: Path) -> int:
    from .twobody import exact_breathing_frequency, ground_state, relative_spectrum

    rows = []
    for lam in parse_float_grid(args.lambda_grid):
        spec = _spec(args.d, 2, args.alpha, lam, args.kappa)
        rs = relative_spectrum(spec)
        gs = ground_state(spec, rs)
        conv = estimate_frequencies(gs, spec, improved=False)
        star = estimate_frequencies(gs, spec)
        rows.append([lam, exact_breathing_frequency(rs), conv.sr31, conv.sr1m1,
                     star.sr31, star.sr1m1])
        log.info("lambda=%g done", lam)
    cols = ["lambda", "omega_exact", "sr31", "sr1m1", "sr31_star", "sr1m1_star"]
    write_csv(out / "twobody.csv", cols, rows)
    return EXIT_OK


def cmd_hf(args, out: Path) -> int:
    from .hf import hf_ground_state

    rows = []
    for lam in parse_float_grid(args.lambda_grid):
        for n in parse_int_grid(args.n):
            spec = _spec(args.d, n, 1, lam, args.kappa)
            gs = hf_ground_state(spec, shell_cutoff=args.shell_cutoff,
                                 check_cutoff=args.check_cutoff, derivative=not args.no_derivative)
            conv = estimate_frequencies(gs, spec, improved=False)
            star = estimate_frequencies(gs, spec)
            e = gs.energies
            rows.append([n, lam, e.kinetic, e.trap, e.interaction, e.total, conv.sr31, conv.sr1m1,
                         star.sr31, star.sr1m1, gs.meta["iterations"]])
            log.info("N=%d lambda=%g E=%.10g", n, lam, e.total)
    cols = ["N", "lambda", "T", "V", "W", "E", "sr31", "sr1m1", "sr31_star", "sr1m1_star",
            "iterations"]
    write_csv(out / "hf.csv", cols, rows)
    return EXIT_OK


def cmd_tf(args, out: Path) -> int:
    from .tf import default_tf_grid, tf1d_continuation, tf2d_minimize
    from .scan import continuation_schedule

    lams = parse_float_grid(args.lambda_grid)
    rows = []
    for n in parse_int_grid(args.n):
        if args.d == 2:
            sols = [tf2d_minimize(n, lam).to_ground_state() for lam in lams]
        else:
            schedule = continuation_schedule(lams)
            grid = default_tf_grid(n, schedule[-1], points=args.points)
            chain = {s.lam: s for s in tf1d_continuation(n, schedule, args.kappa, grid)}
            if args.density:
                for lam in lams:
                    chain[lam].dump_csv(out / f"density_N{n}_lambda{lam:g}.csv")
            sols = [chain[lam].to_ground_state() for lam in lams]
        for lam, gs in zip(lams, sols):
            spec = _spec(args.d, n, 1, lam, args.kappa)
            e = gs.energies
            rows.append([n, lam, e.kinetic, e.trap, e.interaction, e.total,
                         estimate_frequencies(gs, spec, improved=False).sr31,
                         estimate_frequencies(gs, spec).sr31])
    write_csv(out / "tf.csv", ["N", "lambda", "T", "V", "W", "E", "sr31", "sr31_star"], rows)
    return EXIT_OK


def cmd_classical(args, out: Path) -> int:
    from .classical import classical_breathing_check, minimize_classical
    from .model import classical_energy_estimate

    rows = []
    for lam in parse_float_grid(args.lambda_grid):
        for n in parse_int_grid(args.n):
            cfg = minimize_classical(args.d, n, lam, n_restarts=args.restarts, seed=args.seed,
                                     workers=args.workers)
            cfg.dump_csv(out / f"config_N{n}_lambda{lam:g}.csv")
            rows.append([n, lam, cfg.energy, cfg.trap, cfg.interaction, cfg.gradient_norm,
                         cfg.virial_residual(), classical_breathing_check(cfg),
                         classical_energy_estimate(args.d, n, lam), int(cfg.metastable)])
    cols = ["N", "lambda", "E", "V", "W", "gradient_norm", "virial_residual", "sr31",
            "E_estimate", "metastable"]
    write_csv(out / "classical.csv", cols, rows)
    return EXIT_OK


def load_scan_config(name_or_path: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser()
    if name_or_path in BUNDLED:
        cp.read_string(resources.files("breathmode").joinpath(
            f"configs/{name_or_path}.cfg").read_text())
    else:
        path = Path(name_or_path)
        if not path.is_file():
            raise UsageError(f"config {name_or_path!r} not found")
        cp.read(path)
    return cp


def _plan_from_section(sec) -> "ScanPlan":
    from .scan import ScanPlan

    return ScanPlan(dimension=sec.getint("dimension"),
                    lambdas=parse_float_grid(sec["lambda"]),
                    particles=parse_int_grid(sec["n"]),
                    stitch=sec.getint("stitch", 100),
                    engine=sec.get("engine", "stitched"),
                    hf_sr1m1=sec.getboolean("hf_sr1m1", True),
                    shell_cutoff=sec.getint("shell_cutoff", 12),
                    kappa=sec.getfloat("kappa", 0.1),
                    tf_points=sec.getint("tf_points", 2000),
                    seed=sec.getint("seed", 0))


def cmd_scan(args, out: Path, cp: configparser.ConfigParser) -> int:
    from .scan import ScanError, contour_through, fit_power_law, iso_contour, lambda_tilde_overlay, run_scan

    status = EXIT_OK
    tables = []
    contours = {}
    for section in cp.sections():
        if not (section == "scan" or section.startswith("scan.")):
            continue
        name = section.split(".", 1)[1] if "." in section else "main"
        sec = cp[section]
        try:
            plan = _plan_from_section(sec)
        except (KeyError, ValueError) as exc:
            raise UsageError(f"[{section}]: {exc}") from None
        try:
            table = run_scan(plan, workers=args.workers)
        except ScanError as exc:
            table = exc.table
            log.error("scan %s: %s", name, exc)
            status = EXIT_PARTIAL
        if table.failed:
            status = EXIT_PARTIAL
            for c in table.failed:
                log.warning("failed cell lambda=%g N=%d: %s", c.lam, c.n, c.message)
        table.to_csv(out / f"table_{name}.csv")
        table.to_json(out / f"table_{name}.json")
        tables.append(name)
        overlay = lambda_tilde_overlay(table, plan.dimension)
        write_csv(out / f"overlay_{name}.csv", ["N", "lambda_tilde", "lambda_midpoint"], overlay)
        found = {}
        for field in ("omega", "chi"):
            for value in [float(v) for v in sec.get(f"contours_{field}", "").split(",") if v.strip()]:
                c = iso_contour(table, field, value)
                found[f"{field}={value:g}"] = _contour_record(c, fit_power_law)
        if "anchor" in sec:
            lam, n = (float(v) for v in sec["anchor"].split(","))
            c = contour_through(table, "omega", lam, int(n))
            found[f"omega through ({lam:g}, {int(n)})"] = _contour_record(c, fit_power_law)
        contours[name] = found
    if "lambda_tilde" in cp:
        sec = cp["lambda_tilde"]
        rows = []
        for d in (int(v) for v in sec.get("dimensions", "1,2").split(",")):
            for n in parse_int_grid(sec.get("n", "2:100")):
                rows.append([d, n, float(lambda_tilde(d, n))])
        write_csv(out / "lambda_tilde.csv", ["d", "N", "lambda_tilde"], rows)
    if not tables and "lambda_tilde" not in cp:
        raise UsageError("config has no [scan*] or [lambda_tilde] section")
    (out / "contours.json").write_text(json.dumps(contours, indent=1, sort_keys=True) + "\n")
    args._plot = PLOT_SCAN.format(tables=tables)
    return status


def _contour_record(c, fit_power_law) -> dict:
    rec = {"field": c.field, "value": c.value, "points": c.points,
           "out_of_range": c.out_of_range}
    if len(c) >= 5:
        try:
            f = fit_power_law(c.points)
            rec["fit"] = {"exponent": f.exponent, "exponent_stderr": f.exponent_stderr,
                          "prefactor": f.prefactor, "residual": f.residual}
        except DomainError as exc:
            rec["fit_error"] = str(exc)
    return rec


# ---------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="output directory (default out/<command>)")
    common.add_argument("--config", default=None,
                        help="config file; keys of its [<command>] section act as defaults")
    common.add_argument("--workers", type=int, default=None,
                        help="worker processes (default: BREATHMODE_WORKERS or all cores)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-v", "--verbose", action="count", default=0)

    p = _Parser(prog="breathmode", description="Breathing-mode frequencies from sum rules.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    tb = sub.add_parser("twobody", parents=[common], help="exact two-body spectrum vs estimators")
    tb.add_argument("--d", type=int, choices=(1, 2), default=1)
    tb.add_argument("--alpha", type=int, choices=(1, 3), default=1)
    tb.add_argument("--lambda", dest="lambda_grid", default="0:10:50")
    tb.add_argument("--kappa", type=float, default=None)

    hf = sub.add_parser("hf", parents=[common], help="Hartree-Fock ground states")
    hf.add_argument("--d", type=int, choices=(1, 2), default=1)
    hf.add_argument("--n", default="2:10")
    hf.add_argument("--lambda", dest="lambda_grid", default="1")
    hf.add_argument("--kappa", type=float, default=0.1)
    hf.add_argument("--shell-cutoff", type=int, default=12)
    hf.add_argument("--check-cutoff", action="store_true")
    hf.add_argument("--no-derivative", action="store_true",
                    help="skip the trap-derivative solves (no sr(1,-1))")

    tf = sub.add_parser("tf", parents=[common], help="Thomas-Fermi ground states")
    tf.add_argument("--d", type=int, choices=(1, 2), default=1)
    tf.add_argument("--n", default="100,300,1000")
    tf.add_argument("--lambda", dest="lambda_grid", default="1")
    tf.add_argument("--kappa", type=float, default=0.1)
    tf.add_argument("--points", type=int, default=2000)
    tf.add_argument("--density", action="store_true", help="also write 1D density profiles")

    cl = sub.add_parser("classical", parents=[common], help="classical cluster minima")
    cl.add_argument("--d", type=int, choices=(1, 2), default=2)
    cl.add_argument("--n", default="20")
    cl.add_argument("--lambda", dest="lambda_grid", default="1000")
    cl.add_argument("--restarts", type=int, default=None)

    sc = sub.add_parser("scan", parents=[common], help="(lambda, N) plane sweeps")
    sc.add_argument("recipe", nargs="?", default=None,
                    help=f"bundled recipe ({', '.join(BUNDLED)}) or config path; "
                         "same as --config")
    return p


def _apply_config_defaults(parser: argparse.ArgumentParser, argv: list) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if args.command == "scan" or args.config is None:
        return args
    cp = configparser.ConfigParser()
    if not cp.read(args.config):
        raise UsageError(f"config {args.config!r} not found")
    if args.command in cp:
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sub._actions}
        defaults = {}
        for key, value in cp[args.command].items():
            dest = key.replace("-", "_")
            dest = "lambda_grid" if dest == "lambda" else dest
            if dest not in known:
                raise UsageError(f"unknown key {key!r} in [{args.command}]")
            action = known[dest]
            if isinstance(action, argparse._StoreTrueAction):
                defaults[dest] = cp[args.command].getboolean(key)
            else:
                defaults[dest] = (action.type or str)(value)
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def _effective_params(args) -> dict:
    skip = {"command", "out", "config", "verbose", "_plot", "recipe"}
    out = {}
    for k, v in vars(args).items():
        if k in skip or v is None:
            continue
        out["lambda" if k == "lambda_grid" else k] = v
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    started = time.time()
    try:
        args = _apply_config_defaults(parser, argv)
    except UsageError as exc:
        print(f"breathmode: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(message)s")
    if args.workers is None:
        from .scan import default_workers
        args.workers = default_workers()
    out = Path(args.out or Path("out") / args.command)
    out.mkdir(parents=True, exist_ok=True)
    plots = {
        "twobody": PLOT_XY.format(csv="twobody.csv", x="lambda", png="twobody.png",
                                  ycols=["omega_exact", "sr31", "sr1m1", "sr31_star", "sr1m1_star"],
                                  ylabel="frequency", extra=""),
        "hf": PLOT_XY.format(csv="hf.csv", x="N", png="hf.png", ycols=["sr1m1", "sr1m1_star"],
                             ylabel="frequency", extra=""),
        "tf": PLOT_XY.format(csv="tf.csv", x="N", png="tf.png", ycols=["sr31", "sr31_star"],
                             ylabel="frequency", extra='ax.set_xscale("log")'),
        "classical": PLOT_XY.format(csv="classical.csv", x="N", png="classical.png",
                                    ycols=["E", "E_estimate"], ylabel="energy",
                                    extra='ax.set_yscale("log")'),
    }
    try:
        if args.command == "scan":
            source = args.recipe or args.config
            if source is None:
                raise UsageError("scan needs a recipe name or --config")
            cp = load_scan_config(source)
            status = cmd_scan(args, out, cp)
            buf = io.StringIO()
            cp.write(buf)
            (out / "config.cfg").write_text(buf.getvalue())
            manifest = {"software": "breathmode", "version": __version__, "command": "scan",
                        "recipe": source, "wall_clock_seconds": round(time.time() - started, 3),
                        "finished": time.strftime("%Y-%m-%dT%H:%M:%S")}
            (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
            (out / "plot.py").write_text(args._plot)
            return status
        handler = {"twobody": cmd_twobody, "hf": cmd_hf, "tf": cmd_tf,
                   "classical": cmd_classical}[args.command]
        status = handler(args, out)
        write_run_files(out, args.command, _effective_params(args), started, plots[args.command])
        return status
    except UsageError as exc:
        print(f"breathmode: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"breathmode: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BreathingModeError as exc:
        print(f"breathmode: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
