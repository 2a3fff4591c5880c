"""``qprobe`` command line.

    qprobe <twoslit|esw|evolve|pathint|check> [--config FILE] [--out DIR]
           [--format csv|json] [--seed N] [--plot] [command options]

Exit codes: 0 success, 1 property failure (a failing check suite or a
stability abort), 2 usage, parse or validation error.

Outputs go to ``--out`` (default ``qprobe-<command>``). Nothing is
overwritten: if any target file exists the run stops before writing.
Output bytes depend only on the config; the first line of each CSV
(``# qprobe ...``) and the ``_header`` key of each JSON document name the
program version, command and seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, checks, composite, dynamics, pathint, probability, rules
from .config import SCHEMA_VERSION, ConfigError, load_config
from .errors import QProbeError, StabilityError
from .serialize import complex_from_json, complex_to_json, dumps, rows_to_csv, schedule_from_json

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class Outputs:
    """Collects output files and writes them all at once, refusing to overwrite."""

    def __init__(self, out: Path, header: str, plot: bool):
        self.out = Path(out)
        self.header = header
        self.plot = plot
        self.files: dict[str, str] = {}
        self.figures: list = []

    def csv(self, name: str, header: list[str], rows) -> None:
        self.files[name] = rows_to_csv(header, rows, comment=self.header)

    def json(self, name: str, data: dict) -> None:
        self.files[name] = dumps({"_header": self.header, **data})

    def figure(self, name: str, draw) -> None:
        """``draw(path)`` renders a PNG; only called when ``--plot`` is set."""
        if self.plot:
            self.figures.append((name, draw))

    def write(self) -> list[Path]:
        names = list(self.files) + [n for n, _ in self.figures]
        clash = [n for n in names if (self.out / n).exists()]
        if clash:
            raise ConfigError(f"output file(s) already exist in {self.out}: {', '.join(clash)}")
        self.out.mkdir(parents=True, exist_ok=True)
        written = []
        for name, text in self.files.items():
            path = self.out / name
            path.write_text(text)
            written.append(path)
        for name, draw in self.figures:
            written.append(draw(self.out / name))
        return written


# -- commands ----------------------------------------------------------------


def _geometry(cfg) -> rules.SlitGeometry:
    return rules.SlitGeometry.from_config(cfg.G, cfg.L, cfg.R, cfg.screen_from, cfg.screen_to,
                                          cfg.samples, cfg.b)


def _curve_summary(curve: rules.ScreenCurve, half_width: float) -> dict:
    try:
        spacing = rules.fringe_spacing(curve.x, curve.intensity, 0.0, half_width)
    except ValueError:
        spacing = None
    return {
        "visibility": rules.fringe_visibility(curve.x, curve.intensity, 0.0, half_width),
        "envelope_residual": rules.envelope_residual(curve.x, curve.intensity, 0.0, half_width),
        "peak_spacing": spacing,
        "center_intensity": float(curve.intensity[curve.center_index()]),
    }


def cmd_twoslit(cfg, args, out: Outputs) -> int:
    geom = _geometry(cfg)
    hw = cfg.window or 1.5 * geom.predicted_fringe_spacing()
    wanted = ("A", "B") if cfg.rule == "both" else (cfg.rule,)
    curves = {r: rules.two_slit(geom, r) for r in wanted}
    summary = {
        "predicted_fringe_spacing": geom.predicted_fringe_spacing(),
        "window_half_width": hw,
        "rules": {r: _curve_summary(c, hw) for r, c in curves.items()},
    }
    if len(curves) == 2:
        summary["center_ratio_B_over_A"] = (summary["rules"]["B"]["center_intensity"]
                                            / summary["rules"]["A"]["center_intensity"])
    if args.format == "json":
        out.json("twoslit.json", {"summary": summary, "curves": {
            r: {"x": c.x, "intensity": c.intensity, "probability": c.probability}
            for r, c in curves.items()}})
    else:
        for r, c in curves.items():
            out.csv(f"twoslit_rule_{r}.csv", ["x", "intensity", "probability"],
                    zip(c.x.tolist(), c.intensity.tolist(), c.probability.tolist()))
        out.json("twoslit_summary.json", summary)

    def draw(path):
        from .plotting import plot_curves
        x = next(iter(curves.values())).x
        return plot_curves(path, x, {f"Rule {r}": c.intensity for r, c in curves.items()},
                           "screen position", "intensity", "two-slit screen curve")

    out.figure("twoslit.png", draw)
    return EXIT_OK


def cmd_esw(cfg, args, out: Outputs) -> int:
    rep = composite.esw_experiment(_geometry(cfg), cfg.window)
    summary = {
        "joint": rep.joint,
        "schmidt_coefficients": rep.schmidt_coefficients,
        "atom_state": complex_to_json(rep.atom_state),
        "agreement": rep.agreement,
        "visibility_esw": rep.visibility_esw,
        "visibility_rule_b": rep.visibility_rule_b,
        "visibility_gap": rep.visibility_gap,
    }
    x = rep.esw_curve.x
    cols = {"esw": rep.esw_curve.probability, "rule_a": rep.rule_a_curve.probability,
            "rule_b": rep.rule_b_curve.probability}
    if args.format == "json":
        out.json("esw.json", {"summary": summary, "curves": {"x": x, **cols}})
    else:
        out.csv("esw_curves.csv", ["x", *cols], zip(x.tolist(), *(c.tolist() for c in cols.values())))
        out.json("esw_summary.json", summary)

    def draw(path):
        from .plotting import plot_curves
        return plot_curves(path, x, {"which-way (reduced state)": cols["esw"],
                                     "Rule A": cols["rule_a"], "Rule B": cols["rule_b"]},
                           "screen position", "probability", "which-way screen curve")

    out.figure("esw.png", draw)
    return EXIT_OK


def cmd_evolve(cfg, args, out: Outputs) -> int:
    hbar = args.hbar if args.hbar is not None else cfg.hbar
    v0 = complex_from_json([list(x) if isinstance(x, tuple) else x for x in cfg.initial], 1)
    raw = [e.model_dump() for e in cfg.schedule]
    segments = [dynamics.Segment(s.duration, s.hamiltonian / hbar) for s in schedule_from_json(raw)]
    dim = v0.size
    basis = np.eye(dim, dtype=complex) if cfg.basis is None else complex_from_json(cfg.basis, 2)
    test = probability.MaximalTest(basis)
    labels = [str(x) for x in test.labels]

    traj = list(dynamics.schedule_trajectory(v0, segments, cfg.samples_per_segment))
    times = [t for t, _ in traj]
    probs = np.array([[probability.born(e, v) for e in test.basis.T] for _, v in traj])
    u = dynamics.schedule_propagator(segments)
    final = traj[-1][1]
    summary = {
        "hbar": hbar,
        "dim": dim,
        "total_time": u.delta_t,
        "final_state": complex_to_json(final),
        "final_probabilities": dict(zip(labels, probs[-1])),
        "propagator": complex_to_json(u.matrix),
    }
    if args.format == "json":
        out.json("evolve.json", {"summary": summary, "t": times, "labels": labels,
                                 "probabilities": probs,
                                 "states": [complex_to_json(v) for _, v in traj]})
    else:
        out.csv("evolve_probabilities.csv", ["t", *(f"p_{l}" for l in labels)],
                ([t, *p] for t, p in zip(times, probs.tolist())))
        state_cols = [f"{part}_{i}" for i in range(dim) for part in ("re", "im")]
        out.csv("evolve_trajectory.csv", ["t", *state_cols],
                ([t, *np.column_stack([v.real, v.imag]).ravel().tolist()] for t, v in traj))
        out.json("evolve_summary.json", summary)

    def draw(path):
        from .plotting import plot_curves
        return plot_curves(path, times, {f"outcome {l}": probs[:, i] for i, l in enumerate(labels)},
                           "t", "probability", "outcome probabilities")

    out.figure("evolve.png", draw)
    return EXIT_OK


def cmd_pathint(cfg, args, out: Outputs) -> int:
    g = pathint.Grid1D(cfg.grid.x_min, cfg.grid.x_max, cfg.grid.n)
    pot = pathint.make_potential(g, cfg.potential.type, **cfg.potential.params)
    params = pathint.ActionParams(cfg.mass, pot)
    psi = pathint.gaussian_packet(g, cfg.packet.x0, cfg.packet.sigma0, cfg.packet.k0)
    every = min(cfg.snapshot_every, cfg.steps)
    kern = pathint.propagate(psi, params, cfg.dt, cfg.steps, every)
    ref = pathint.schrodinger_reference(psi, params, cfg.dt, cfg.steps, every)
    summary = {
        "l2_distance": pathint.l2_distance(kern.final, ref.final),
        "dt": cfg.dt,
        "dx": g.dx,
        "dt_guidance": pathint.dt_guidance(g, cfg.mass),
        "t_final": kern.final.time,
        "kernel": {"norm_drift": kern.norm_drift, "centroid": kern.final.centroid(),
                   "width": kern.final.width()},
        "reference": {"norm_drift": ref.norm_drift, "centroid": ref.final.centroid(),
                      "width": ref.final.width()},
    }
    if cfg.potential.type == "free":
        s0, m, t = cfg.packet.sigma0, cfg.mass, kern.final.time
        summary["free_width"] = s0 * float(np.sqrt(1 + (t / (2 * m * s0**2)) ** 2))

    stab_pair = args.stability if args.stability is not None else cfg.stability
    scan = None
    if stab_pair is not None:
        a, b = stab_pair
        scan = pathint.stability_scan(a, psi, pathint.ActionParams(cfg.mass, pot, rest_rate=b),
                                      cfg.dt, cfg.steps)
        summary["stability"] = {"a": a, "b": b, "max_relative_error": scan.max_relative_error(),
                                "final_norm": float(scan.norms[-1]),
                                "expected_final_norm": float(scan.expected_norms()[-1])}

    def density_rows(tr):
        for t, d in zip(tr.snapshot_times, tr.snapshots):
            for x, p in zip(g.x.tolist(), d.tolist()):
                yield t, x, p

    if args.format == "json":
        doc = {"summary": summary, "x": g.x}
        for name, tr in (("kernel", kern), ("reference", ref)):
            doc[name] = {"t": tr.times, "norm": np.sqrt(tr.norms),
                         "snapshot_t": tr.snapshot_times, "density": tr.snapshots}
        if scan is not None:
            doc["stability"] = {"t": scan.times, "norm": scan.norms, "expected": scan.expected_norms()}
        out.json("pathint.json", doc)
    else:
        for name, tr in (("kernel", kern), ("reference", ref)):
            out.csv(f"pathint_{name}_density.csv", ["t", "x", "|psi|^2"], density_rows(tr))
            out.csv(f"pathint_{name}_norm.csv", ["t", "norm"],
                    zip(tr.times.tolist(), np.sqrt(tr.norms).tolist()))
        if scan is not None:
            out.csv("pathint_stability.csv", ["t", "norm", "expected"],
                    zip(scan.times.tolist(), scan.norms.tolist(), scan.expected_norms().tolist()))
        out.json("pathint_summary.json", summary)

    def draw_density(path):
        from .plotting import plot_density_snapshots
        return plot_density_snapshots(path, g.x, kern.snapshot_times, kern.snapshots, ref.snapshots)

    def draw_norms(path):
        from .plotting import plot_curves
        curves = {"kernel": np.sqrt(kern.norms), "Crank-Nicolson": np.sqrt(ref.norms)}
        return plot_curves(path, kern.times, curves, "t", "norm", "norm history")

    out.figure("pathint_density.png", draw_density)
    out.figure("pathint_norm.png", draw_norms)
    if scan is not None:
        def draw_scan(path):
            from .plotting import plot_curves
            return plot_curves(path, scan.times, {"scan": scan.norms, "exp(a t)": scan.expected_norms()},
                               "t", "norm", f"stability scan, z = {scan.z}")
        out.figure("pathint_stability.png", draw_scan)
    return EXIT_OK


def cmd_check(cfg, args, out: Outputs) -> int:
    if args.replay is not None:
        return _replay(args.replay)
    unknown = set(cfg.suites or ()) - set(checks.SUITES)
    if unknown:
        raise ConfigError(f"unknown suite(s): {', '.join(sorted(unknown))}")
    run = checks.CheckConfig(seed=cfg.seed, frame_trials=args.trials or cfg.trials,
                             inject_fault=args.inject_fault or cfg.inject_fault)
    results = checks.run_all(run, cfg.suites)
    passed = all(r.passed for r in results)
    report = {"passed": passed, "seed": cfg.seed, "suites": [r.to_json() for r in results]}
    if args.format == "json":
        out.json("check_report.json", report)
    else:
        out.csv("check_report.csv", ["suite", "cases", "tolerance", "max_deviation", "passed"],
                ([r.name, r.cases, r.tolerance, r.max_deviation, r.passed] for r in results))
    failing = [r.failing for r in results if not r.passed]
    if failing:
        out.json("check_failing_case.json", failing[0])

    def draw(path):
        from .plotting import plot_curves
        devs = [max(r.max_deviation, 1e-18) / (r.tolerance or 1.0) for r in results]
        return plot_curves(path, np.arange(len(results)), {"max deviation / tolerance": devs},
                           "suite index", "ratio", " ".join(r.name for r in results)[:60], logy=True)

    out.figure("check.png", draw)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name}: {r.cases} cases, max deviation {r.max_deviation:.3g} "
              f"(tolerance {r.tolerance:g})")
    return EXIT_OK if passed else EXIT_FAIL


def _replay(path: str) -> int:
    try:
        case = json.loads(Path(path).read_text())
        if case.get("suite") not in checks.SUITES:
            raise ValueError(f"unknown suite {case.get('suite')!r}")
        res, ok = checks.replay(case)
    except (OSError, ValueError, KeyError, TypeError, AttributeError) as exc:
        raise ConfigError(f"cannot replay case {path}: {exc}") from None
    print(dumps({"suite": case["suite"], "seed": case["seed"], "index": case["index"],
                 "deviation": res.deviation, "tolerance": checks.SUITES[case["suite"]][2],
                 "passed": ok}), end="")
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {
    "twoslit": cmd_twoslit,
    "esw": cmd_esw,
    "evolve": cmd_evolve,
    "pathint": cmd_pathint,
    "check": cmd_check,
}


def _pair(text: str) -> tuple[float, float]:
    try:
        a, b = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected two numbers 'a,b'") from None
    return a, b


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="JSON config (schema_version 1)")
    common.add_argument("--out", metavar="DIR", help="output directory (default qprobe-<command>)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int, help="overrides the config seed")
    common.add_argument("--plot", action="store_true", help="also render PNG figures")

    parser = argparse.ArgumentParser(prog="qprobe", description="Finite-dimensional quantum probability experiments.")
    parser.add_argument("--version", action="version", version=f"qprobe {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("twoslit", parents=[common], help="two-slit screen curves under Rule A and Rule B")
    p.add_argument("--rule", choices=("A", "B", "both"))
    sub.add_parser("esw", parents=[common], help="which-way experiment with a cavity detector")
    p = sub.add_parser("evolve", parents=[common], help="piecewise-constant Hamiltonian evolution")
    p.add_argument("--hbar", type=float, help="unit scale: the schedule holds H in units where hbar has this value")
    p = sub.add_parser("pathint", parents=[common], help="sliced path-integral propagation vs Crank-Nicolson")
    p.add_argument("--stability", type=_pair, metavar="a,b", help="stability scan with slice factor exp((a+ib)dt)")
    p = sub.add_parser("check", parents=[common], help="seeded property suites")
    p.add_argument("--trials", type=int, help="random bases per dimension in the frame-function suite")
    p.add_argument("--inject-fault", action="store_true", help="test hook: perturb one Rule-B case")
    p.add_argument("--replay", metavar="FILE", help="rerun a serialized failing case")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = {"seed": args.seed}
        if args.command == "twoslit":
            overrides["rule"] = args.rule
        cfg = load_config(args.command, args.config, overrides)
        header = (f"qprobe {__version__} {args.command} schema_version={SCHEMA_VERSION} "
                  f"seed={cfg.seed}")
        out = Outputs(Path(args.out or f"qprobe-{args.command}"), header, args.plot)
        code = COMMANDS[args.command](cfg, args, out)
        if args.command == "check" and args.replay is not None:
            return code
        for path in out.write():
            print(f"wrote {path}")
        if code == EXIT_FAIL and "check_failing_case.json" in out.files:
            print(f"failing case saved for replay: {out.out / 'check_failing_case.json'}", file=sys.stderr)
        return code
    except StabilityError as exc:
        print(f"qprobe {args.command}: stability abort: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (QProbeError, ValueError) as exc:
        print(f"qprobe {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
