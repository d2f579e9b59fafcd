"""Command line entry point: ``layered-gas <verb> ...``.

Exit codes: 0 success, 2 invalid input, 3 solver abort, 4 failed acceptance checks.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np
import yaml

from .diagnostics import StabilityParams, dispersion_table, stability_delta4, stability_ly
from .eos import GasEOS
from .errors import ConstructionFailure, ConvergenceFailure, InvalidArgument, LayeredGasError, SolverAbort
from .medium import MediumProfile, homog_coeffs
from .records import read_record, write_table_csv

EXIT_OK, EXIT_INVALID, EXIT_ABORT, EXIT_ACCEPTANCE = 0, 2, 3, 4

MEDIA = {
    "two-phase": lambda: MediumProfile.piecewise_constant(0.25, 1.75, 0.5, 1.0, "lagrangian",
                                                          "layers 1/4 and 7/4 on the mass coordinate"),
    "paper-layers": lambda: MediumProfile.piecewise_constant(0.25, 1.75, 0.5, 1.0, "eulerian",
                                                             "layers 1/4 and 7/4 on the position"),
    "cosine": lambda: MediumProfile.sinusoidal(1.0, 1.0, 1.0, "eulerian", "1 + cos(2 pi chi)"),
    "uniform": lambda: MediumProfile.uniform(1.0),
}


def _medium(args) -> MediumProfile:
    if getattr(args, "medium_file", None):
        return MediumProfile.from_dict(_load_mapping(args.medium_file))
    return MEDIA[args.medium]()


def _eos(args) -> GasEOS:
    return GasEOS(args.gamma, args.p_star, args.v_star)


def _load_mapping(path):
    text = Path(path).read_text()
    data = yaml.safe_load(text)
    if not isinstance(data, dict):
        raise InvalidArgument(f"{path} does not hold a mapping")
    return data


def _parse_set(items):
    out = []
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise InvalidArgument(f"override {item!r} is not of the form key=value")
        out.append((key.strip(), yaml.safe_load(val)))
    return out


def _configs_from_args(args):
    """(label, config) pairs from a scenario name or a configuration file."""
    from .scenarios import ScenarioConfig, scenario, with_parameter

    if args.config:
        pairs = [("run", ScenarioConfig.from_dict(_load_mapping(args.config)))]
        sc = None
    else:
        sc = scenario(args.scenario, paper_scale=args.paper_scale)
        labels = [args.member] if args.member else list(sc.members)
        for lab in labels:
            if lab not in sc.members:
                raise InvalidArgument(f"scenario {sc.name!r} has no member {lab!r}")
        pairs = [(lab, sc.members[lab]) for lab in labels]
    overrides = _parse_set(args.set)
    pairs = [(lab, _apply(cfg, overrides, with_parameter)) for lab, cfg in pairs]
    return sc, pairs


def _apply(cfg, overrides, with_parameter):
    for key, val in overrides:
        cfg = with_parameter(cfg, key, val)
    return cfg


# --------------------------------------------------------------------------
# verbs


def cmd_list(args):
    from .scenarios import SCENARIOS, scenario

    for name in SCENARIOS:
        sc = scenario(name)
        sweep = f"  sweep {sc.sweep[0]} over {list(sc.sweep[1])}" if sc.sweep else ""
        print(f"{name:24s} {sc.description} [{', '.join(sc.members)}]{sweep}")
    return EXIT_OK


def cmd_run(args):
    from .runner import compare, run

    sc, pairs = _configs_from_args(args)
    out = Path(args.out)
    records = {}
    for label, cfg in pairs:
        target = out / label if len(pairs) > 1 else out
        res = run(cfg, target)
        records[label] = res.record
        print(f"{cfg.name}: {len(res.record.snapshots)} snapshots, {res.wall_time:.1f} s -> {target}")
        if args.plot:
            from .plotting import plot_snapshots

            plot_snapshots(res.record, target / "pressure.svg", title=cfg.name)
    if sc is not None and sc.reference in records and len(records) > 1:
        diffs = compare(records, sc.reference, outdir=out / "comparison")
        for d in diffs:
            print(f"  {d.label} t={d.t:g}: rel L2 {d.rel_l2:.3e}, Linf {d.linf:.3e}")
    return EXIT_OK


def cmd_sweep(args):
    from .runner import sweep

    sc, pairs = _configs_from_args(args)
    if args.param:
        param = args.param
        values = [yaml.safe_load(v) for v in args.values.split(",")]
    elif sc is not None and sc.sweep:
        param, values = sc.sweep
    else:
        raise InvalidArgument("sweep needs --param and --values")
    out = Path(args.out)
    for label, cfg in pairs:
        _, rows = sweep(cfg, param, values, out / label, workers=args.workers)
        for row in rows:
            print(label, json.dumps(row, default=float))
    return EXIT_OK


def cmd_compare(args):
    from .runner import compare

    records = {Path(d).name: read_record(d) for d in args.records}
    ref = Path(args.reference).name
    records.setdefault(ref, read_record(args.reference))
    for d in compare(records, ref, frame=args.frame, outdir=args.out):
        print(f"{d.label} t={d.t:g}: L1 {d.l1:.3e} L2 {d.l2:.3e} Linf {d.linf:.3e} rel L2 {d.rel_l2:.3e}")
    return EXIT_OK


def cmd_coeffs(args):
    eos = _eos(args)
    c = homog_coeffs(_medium(args), eos, n_quad=args.n_quad)
    out = dict(c.as_dict(), sound_speed=float(np.sqrt(c.c_sq(eos))))
    print(json.dumps(out, indent=2))
    return EXIT_OK


def cmd_traveling_wave(args):
    from .traveling_wave import traveling_wave

    eos = _eos(args)
    coeffs = homog_coeffs(_medium(args), eos)
    sol = traveling_wave(args.V, coeffs, eos, order=args.order, n=args.n, tol=args.tol)
    print(f"V={sol.V} order={sol.model_order} amplitude={sol.amplitude:.6g} "
          f"residual={sol.residual_norm:.3e} iterations={sol.iterations}")
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        sol.write(args.out)
    return EXIT_OK


def cmd_stability(args):
    eos = _eos(args)
    coeffs = homog_coeffs(_medium(args), eos)
    params = StabilityParams.from_coeffs(coeffs, eos)
    ks = [float(k) for k in args.k.split(",")]
    rows = []
    for k in ks:
        r = stability_delta4(k, params)
        ly = stability_ly(k, params)
        rows.append({"k": k, "delta4_unstable": r.unstable, "delta4_growth": r.growth,
                     "ly_omega_real": float(ly.omega[0].real), "ly_omega_imag": float(abs(ly.omega[0].imag)),
                     "ly_cutoff": ly.cutoff})
    for row in rows:
        print(json.dumps(row))
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        write_table_csv(Path(args.out) / "stability.csv", rows, eos.as_dict())
        write_table_csv(Path(args.out) / "dispersion.csv", dispersion_table(np.array(ks), coeffs, eos),
                        eos.as_dict())
    return EXIT_OK


def cmd_verify(args):
    import pytest

    suite = Path(__file__).resolve().parents[2] / "tests" / "test_acceptance.py"
    if not suite.exists():
        raise InvalidArgument(f"acceptance suite not found at {suite}")
    extra = ["-m", "not slow"] if args.quick else []
    rc = pytest.main([str(suite), "-q", "-s", *extra])
    return EXIT_OK if rc == 0 else EXIT_ACCEPTANCE


# --------------------------------------------------------------------------


def _add_eos(p):
    p.add_argument("--gamma", type=float, default=1.4)
    p.add_argument("--p-star", type=float, default=1.0)
    p.add_argument("--v-star", type=float, default=1.0)


def _add_medium(p, default="two-phase"):
    p.add_argument("--medium", choices=sorted(MEDIA), default=default)
    p.add_argument("--medium-file", help="YAML/JSON medium description")


def _add_source(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", help="registered scenario name")
    src.add_argument("--config", help="YAML/JSON run configuration")
    p.add_argument("--member", help="run only this member of the scenario")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a parameter")
    p.add_argument("--paper-scale", action="store_true", help="full domain and final time")
    p.add_argument("--out", default="runs")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="layered-gas", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("list-scenarios", help="show the scenario registry")
    p.set_defaults(func=cmd_list)

    p = sub.add_parser("run", help="run a scenario or configuration file")
    _add_source(p)
    p.add_argument("--plot", action="store_true", help="write SVG pressure panels")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a parameter sweep")
    _add_source(p)
    p.add_argument("--param")
    p.add_argument("--values", help="comma-separated values")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="difference metrics between written records")
    p.add_argument("records", nargs="+", help="run directories")
    p.add_argument("--reference", required=True)
    p.add_argument("--frame", choices=("lagrangian", "eulerian"), default="lagrangian")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("coeffs", help="homogenized coefficients of a medium")
    _add_medium(p)
    _add_eos(p)
    p.add_argument("--n-quad", type=int, default=2**14)
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("traveling-wave", help="construct a solitary traveling wave")
    _add_medium(p)
    _add_eos(p)
    p.add_argument("--V", type=float, required=True)
    p.add_argument("--order", choices=("second", "fourth"), default="second")
    p.add_argument("--n", type=int, default=4096)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out", help="CSV path (a JSON sidecar is written next to it)")
    p.set_defaults(func=cmd_traveling_wave)

    p = sub.add_parser("stability", help="linear stability of the high-order and stabilized forms")
    _add_medium(p)
    _add_eos(p)
    p.add_argument("--k", default="0.1,1,10,1000", help="comma-separated wavenumbers")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("verify", help="run the acceptance suite")
    p.add_argument("--quick", action="store_true", help="skip the long-running checks")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except SolverAbort as exc:
        print(f"solver abort: {exc}", file=sys.stderr)
        return EXIT_ABORT
    except (ConstructionFailure, ConvergenceFailure) as exc:
        print(f"construction failed: {exc}", file=sys.stderr)
        return EXIT_ABORT
    except (LayeredGasError, ValueError, OSError, yaml.YAMLError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
