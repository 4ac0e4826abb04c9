"""Command-line front end.

Exit codes: 0 ok, 1 usage, 2 model error, 3 numerical abort, 4 frame
mismatch, 5 verification failed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import analytic, codes, serialization
from .dynamics import METHODS, TIME_MAPS, sweep_levels
from .errors import HolonomyError, InvalidSpec
from .loops import LoopSpec, materialize, plaquette_phase, spherical_flux, spherical_phase
from .mpod import CouplingPoint, DegeneracyTable, dark_dimension_discrepancy, spectrum
from .transport import SubspaceSelector, express_in_frame, holonomy_numeric, rotation_angle

EXIT_USAGE = 1
EXIT_VERIFY_FAILED = 5


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    p = _Parser(prog="mpod-holonomy", description="M-pod Fock-layer spectra, holonomies and gates.",
                formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--config", help="JSON file of option values for the command; flags override it")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized inputs")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    s = sub.add_parser("spectrum", help="eigenvalue ladder and multiplicities", formatter_class=fmt)
    s.add_argument("-N", "--photons", type=int, dest="photons", help="photon number")
    s.add_argument("-M", "--arms", type=int, dest="arms", help="number of outer waveguides")
    s.add_argument("--kappa", nargs="+", help="couplings, Python complex syntax (default: all 1)")
    s.add_argument("--random", action="store_true", help="draw random couplings from --seed")
    s.add_argument("--out", help="directory for spectrum.csv / spectrum.json")
    s.add_argument("--plot", action="store_true", help="also write spectrum.png (needs --out)")

    d = sub.add_parser("dims", help="subspace dimensions from the combinatorial count", formatter_class=fmt)
    d.add_argument("-N", "--photons", type=int, dest="photons")
    d.add_argument("-M", "--arms", type=int, dest="arms")
    d.add_argument("--format", choices=("csv", "json"), default="csv")

    h = sub.add_parser("holonomy", help="numerical holonomy around a loop spec", formatter_class=fmt)
    h.add_argument("loop", help="loop spec JSON file, or - for stdin")
    h.add_argument("--order", type=int, default=0, help="energy level n (energy n * eps)")
    h.add_argument("-N", "--photons", type=int, dest="photons", default=2)
    h.add_argument("--steps", type=int, help="override the loop file's sample count")
    h.add_argument("--compare", action="store_true", help="deviation from the matching closed form")
    h.add_argument("--out", help="directory for holonomy.json / convergence.csv")
    h.add_argument("--plot", action="store_true", help="also write convergence.png (needs --out)")

    g = sub.add_parser("gate", help="two-qubit gate report", formatter_class=fmt)
    g.add_argument("--kind", choices=("u1", "u2"), default="u1")
    g.add_argument("--phi1", type=float, default=0.0)
    g.add_argument("--phi2", type=float, default=0.0)
    g.add_argument("--phi2-tilde", type=float, default=0.0, dest="phi2_tilde")
    g.add_argument("--omega", type=float, default=0.0)
    g.add_argument("--loop", help="build W+/W- by transport around this loop spec instead")
    g.add_argument("--out", help="directory for gate.json")

    a = sub.add_parser("adiabatic", help="propagation sweep against the transport holonomy", formatter_class=fmt)
    a.add_argument("loop", help="loop spec JSON file, or - for stdin")
    a.add_argument("--orders", type=_ints, default=[0, 1, -1])
    a.add_argument("-N", "--photons", type=int, dest="photons", default=2)
    a.add_argument("--times", type=_floats, default=[50.0, 100.0, 200.0, 400.0], help="T in units of 1/eps")
    a.add_argument("--time-map", choices=TIME_MAPS, default="smooth", dest="time_map")
    a.add_argument("--method", choices=METHODS, default="magnus4")
    a.add_argument("--steps", type=int, help="time steps per run (default scales with T)")
    a.add_argument("--out", help="directory for sweep.csv")
    a.add_argument("--plot", action="store_true", help="also write sweep_<order>.png (needs --out)")

    v = sub.add_parser("verify", help="run the acceptance checks", formatter_class=fmt)
    v.add_argument("--filter", action="append", help="comma-separated check groups")
    v.add_argument("--inject-fault", choices=("zeta-order",), dest="inject_fault",
                   help="deliberately break a closed form (mutation test)")
    v.add_argument("--json", action="store_true", help="print the JSON report instead of lines")
    v.add_argument("--out", help="directory for verify.json")
    return p, dict(sub.choices)


# --------------------------------------------------------------------------- #

def _out_dir(args) -> Optional[Path]:
    if getattr(args, "plot", False) and not args.out:
        raise UsageError("--plot needs --out")
    if not args.out:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _need(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError(f"missing required option(s): {', '.join(missing)}")


def _write(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _read_loop(src: str) -> LoopSpec:
    text = sys.stdin.read() if src == "-" else Path(src).read_text(encoding="utf-8")
    return LoopSpec.from_json(text)


def cmd_spectrum(args) -> int:
    _need(args, "photons", "arms")
    out = _out_dir(args)
    if args.random:
        rng = np.random.default_rng(args.seed)
        kappa = rng.uniform(0.5, 2.0, args.arms) * np.exp(2j * np.pi * rng.random(args.arms))
    elif args.kappa:
        kappa = [complex(k) for k in args.kappa]
        if len(kappa) != args.arms:
            raise UsageError(f"--kappa has {len(kappa)} values, -M is {args.arms}")
    else:
        kappa = [1.0] * args.arms
    point = CouplingPoint(kappa)
    dec = spectrum(args.photons, point)
    rows = [(lv.order, lv.energy, lv.multiplicity) for lv in dec.levels]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["order", "energy", "multiplicity"])
    w.writerows([(n, repr(e), m) for n, e, m in rows])
    sys.stdout.write(buf.getvalue())
    if out:
        _write(out / "spectrum.csv", buf.getvalue())
        _write(out / "spectrum.json", serialization.dumps({
            "photon_number": args.photons, "arms": args.arms, "energy_scale": dec.energy_scale,
            "couplings": [[z.real, z.imag] for z in point.couplings], "residual": dec.residual,
            "levels": [{"order": n, "energy": e, "multiplicity": m} for n, e, m in rows]}))
        if args.plot:
            from .plotting import spectrum_figure
            spectrum_figure([(n, m) for n, _, m in rows], f"N={args.photons}, M={args.arms}",
                            out / "spectrum.png")
    return 0


def cmd_dims(args) -> int:
    _need(args, "photons", "arms")
    table = DegeneracyTable.from_oracle(args.photons, args.arms)
    if args.format == "csv":
        sys.stdout.write(table.to_csv())
    else:
        sys.stdout.write(serialization.dumps({
            "table": [{"n": n, "dimension": d} for _, _, n, d in table.rows()],
            "total": table.total, "closed_form_check": dark_dimension_discrepancy(args.photons, args.arms)}))
    return 0


def closed_form_for(spec: LoopSpec, path, selector: SubspaceSelector):
    """(closed-form holonomy, frame at the start it is written in) for a loop."""
    if selector.photon_number != 2 or path.arms != 3:
        raise InvalidSpec("closed forms exist only for the two-photon tripod")
    n, p = selector.order, spec.params
    start = path.start.couplings
    if spec.variant == "theta_winding":
        radii, arm = p["radii"], p["arm"]
        if n == 0 and arm == 2 and radii[0] == 0 and "sector" not in p:
            winding = p.get("windings", 1) * spec.orientation
            return (analytic.holonomy_w1_dark(winding, radii[1], radii[2]),
                    analytic.dark_states_theta2(radii[1], 0.0, radii[2]).vectors)
        if n in (1, -1) and arm == 1 and radii[1] == 0:
            phi2, phi2t = analytic.phi2_line_integrals(path)
            return (analytic.gate_w2_bright(phi2, phi2t),
                    analytic.bright_states_theta1(abs(start[0]), float(np.angle(start[0])),
                                                  start[2].real, n).vectors)
    if spec.variant in ("plaquette", "spherical_arc", "piecewise_linear"):
        r = [z.real for z in start]
        if n in (1, -1):
            return (analytic.gate_w1_bright(analytic.phi1_line_integral(path)),
                    analytic.bright_states_real(*r, n).vectors)
        if n == 0 and spec.variant == "piecewise_linear":
            return (analytic.holonomy_w2_dark(analytic.phi0_line_integral(path)),
                    analytic.dark_states_real(*r).vectors)
    raise InvalidSpec(f"no closed form for a {spec.variant} loop on level {n}")


def _compare(spec, path, selector, result) -> dict:
    cf, frame = closed_form_for(spec, path, selector)
    w = express_in_frame(result, frame)
    d = {"closed_form": cf.kind, "phases": dict(cf.phases),
         "deviation": float(np.linalg.norm(w - cf.transport)),
         "in_frame": serialization.matrix_to_dict(w)}
    if w.shape == (2, 2) and cf.kind == "W1-bright":
        d["phase"] = rotation_angle(w)
        if spec.variant == "plaquette":
            sq = spec.plaquette_spec()
            d["predicted_phase"] = plaquette_phase(sq.alpha, sq.beta, sq.kappa, spec.orientation)
        if spec.variant == "spherical_arc":
            sp = spec.spherical_spec()
            d["literal_formula"] = spherical_phase(sp) * spec.orientation
            d["curvature_flux"] = spherical_flux(sp) * spec.orientation
    return d


def cmd_holonomy(args) -> int:
    out = _out_dir(args)
    spec = _read_loop(args.loop)
    if args.steps is not None:
        spec = LoopSpec(spec.variant, spec.params, spec.orientation, args.steps)
    path = materialize(spec)
    sel = SubspaceSelector(args.order, args.photons)
    res = holonomy_numeric(path, sel)
    compare = _compare(spec, path, sel, res) if args.compare else None
    sys.stdout.write(serialization.dumps(serialization.holonomy_to_dict(res, compare)))
    if out:
        _write(out / "holonomy.json", serialization.dumps(serialization.holonomy_to_dict(res, compare)))
        steps, errs = [], []
        for div in (16, 8, 4, 2):
            if spec.steps // div < 16:
                continue
            coarse = holonomy_numeric(path.resample(spec.steps // div), sel, estimate_error=False)
            steps.append(coarse.steps)
            errs.append(float(np.linalg.norm(express_in_frame(coarse, res.frame_start) - res.unitary)))
        lines = ["steps,deviation_from_finest"] + [f"{s},{e!r}" for s, e in zip(steps, errs)]
        _write(out / "convergence.csv", "\n".join(lines) + "\n")
        if args.plot and steps:
            from .plotting import convergence_figure
            convergence_figure(steps, errs, out / "convergence.png", "deviation from finest")
    return 0


def cmd_gate(args) -> int:
    out = _out_dir(args)
    if args.loop:
        spec = _read_loop(args.loop)
        path = materialize(spec)
        kappa = path.start.couplings[2].real
        ws = [express_in_frame(holonomy_numeric(path, SubspaceSelector(s, 2)),
                               analytic.bright_states_theta1(0.0, 0.0, kappa, s).vectors) for s in (1, -1)]
        u = codes.composite_gate(ws[0], ws[1], args.omega)
        report = codes.gate_report("loop", u, parameters={"omega": args.omega})
    elif args.kind == "u1":
        report = codes.truth_table_u1(args.phi1, args.omega)
    else:
        report = codes.truth_table_u2(args.phi2, args.phi2_tilde, args.omega)
    payload = report.to_dict()
    labels = ["00", "01", "10", "11"]
    payload["truth_table"] = {k: {o: [z.real, z.imag] for o, z in v.items()}
                              for k, v in report.table(labels).items()}
    text = serialization.dumps(payload)
    sys.stdout.write(text)
    if out:
        _write(out / "gate.json", text)
    return 0


def cmd_adiabatic(args) -> int:
    out = _out_dir(args)
    spec = _read_loop(args.loop)
    path = materialize(spec)
    rows = sweep_levels(path, args.photons, args.orders, args.times, args.time_map, args.steps, args.method)
    lines = ["order,T,leakage,block_error,phase_free_error"]
    for n, rs in rows.items():
        lines += [f"{n},{r.total_time!r},{r.leakage!r},{r.block_error!r},{r.phase_free_error!r}" for r in rs]
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if out:
        _write(out / "sweep.csv", text)
        if args.plot:
            from .plotting import sweep_figure
            for n, rs in rows.items():
                sweep_figure(rs, out / f"sweep_{n:+d}.png")
    return 0


def cmd_verify(args) -> int:
    from .verification import report, run_checks, select_groups
    out = _out_dir(args)
    try:
        select_groups(args.filter)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    checks = run_checks(args.filter, args.inject_fault)
    rep = report(checks)
    if args.json:
        sys.stdout.write(serialization.dumps(rep))
    else:
        for c in checks:
            print(c.line())
        print(f"{sum(c.passed for c in checks)}/{len(checks)} checks passed")
    if out:
        _write(out / "verify.json", serialization.dumps(rep))
    return 0 if rep["passed"] else EXIT_VERIFY_FAILED


COMMANDS = {"spectrum": cmd_spectrum, "dims": cmd_dims, "holonomy": cmd_holonomy,
            "gate": cmd_gate, "adiabatic": cmd_adiabatic, "verify": cmd_verify}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        if args.config:
            cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
            if not isinstance(cfg, dict):
                raise UsageError("config file must hold a JSON object")
            known = {a.dest for a in subs[args.command]._actions}
            unknown = set(cfg) - known
            if unknown:
                raise UsageError(f"unknown config keys for {args.command}: {sorted(unknown)}")
            subs[args.command].set_defaults(**cfg)
            args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"mpod-holonomy: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError) as exc:
        print(f"mpod-holonomy: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HolonomyError as exc:
        print(f"mpod-holonomy: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
