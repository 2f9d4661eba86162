"""Command-line entry point: ``gbsm <verb> --scenario FILE --out DIR``.

Exit codes: 0 success, 1 invalid input, 2 quadrature did not converge,
3 cross-validation found an entry outside its error bar.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import experiments as ex
from .config import ScenarioConfig, ScenarioError, builtin_scenario, load_scenario
from .stcf import QuadratureError

EXIT_OK, EXIT_INVALID, EXIT_QUADRATURE, EXIT_XVAL = 0, 1, 2, 3


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _names(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def _resolution(text: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split("x")
        return int(a), int(b)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected NELxNAZ, got {text!r}") from exc


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad arguments; 2 is reserved for quadrature failures here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gbsm", description=__doc__.splitlines()[0])
    common = _Parser(add_help=False)
    common.add_argument("--scenario", default="builtin:default",
                        help="YAML scenario file, or builtin:NAME (default builtin:default)")
    common.add_argument("--seed", type=int, help="override the scenario seed")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--workers", type=int, default=1)
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    sub.add_parser("validate", parents=[common], help="parse and check a scenario")

    s = sub.add_parser("stcf", parents=[common], help="correlation sweep over time and spacing")
    s.add_argument("--times", type=_floats, default=[0.0, 1.0, 2.0])
    s.add_argument("--spacings", type=_floats, help="receive spacings in wavelengths")
    s.add_argument("--tx-spacings", type=_floats, help="transmit spacings in wavelengths")
    s.add_argument("--polarizations", type=_names)
    s.add_argument("--trajectory-draws", type=int)

    c = sub.add_parser("capacity", parents=[common], help="ergodic capacity sweep")
    c.add_argument("--times", type=_floats, default=[0.0, 1.0, 2.0])
    c.add_argument("--snrs", type=_floats, help="SNRs in dB (default: scenario SNR)")
    c.add_argument("--polarizations", type=_names)
    c.add_argument("--draws", type=int, help="channel draws per point")
    c.add_argument("--trajectory-draws", type=int)

    a = sub.add_parser("aoa-map", parents=[common], help="receive direction density maps")
    a.add_argument("--times", type=_floats, default=[0.0, 1.0, 2.0, 3.0, 4.0, 5.0])
    a.add_argument("--resolution", type=_resolution, default=(181, 360), help="grid as NELxNAZ")
    a.add_argument("--trajectory-draws", type=int)

    m = sub.add_parser("motion-demo", parents=[common], help="sample cluster trajectories")
    m.add_argument("--n-paths", type=int, default=10)

    x = sub.add_parser("cross-validate", parents=[common], help="quadrature vs scatterer Monte Carlo")
    x.add_argument("--n-scatterers", type=int, default=1_000_000)
    x.add_argument("--time", type=float, default=0.0)
    x.add_argument("--polarization")
    return p


def _load(args) -> ScenarioConfig:
    src = args.scenario
    cfg = builtin_scenario(src.split(":", 1)[1]) if src.startswith("builtin:") else load_scenario(src)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def _write(args, name: str, header, rows) -> Path:
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / name
    ex.write_csv(path, header, rows)
    print(f"wrote {len(rows)} rows to {path}")
    return path


def run(args) -> int:
    if args.workers < 1:
        raise ValueError("--workers must be >= 1")
    cfg = _load(args)
    if args.verb == "validate":
        print(f"scenario {cfg.name!r} is valid: {cfg.tx_array.num_elements}x{cfg.rx_array.num_elements} "
              f"array, {len(cfg.rx_mixture.components)} receive clusters, "
              f"wavelength {cfg.wavelength:.6g} m, seed {cfg.seed}")
        return EXIT_OK
    if args.verb == "stcf":
        h, rows = ex.run_stcf_sweep(cfg, args.times, args.spacings, args.tx_spacings, args.polarizations,
                                    args.trajectory_draws, args.workers)
        _write(args, "stcf.csv", h, rows)
    elif args.verb == "capacity":
        snrs = args.snrs or [cfg.snr_db]
        h, rows = ex.run_capacity_sweep(cfg, args.times, snrs, args.polarizations, args.draws,
                                        args.trajectory_draws, args.workers)
        _write(args, "capacity.csv", h, rows)
    elif args.verb == "aoa-map":
        h, rows = ex.run_aoa_map(cfg, args.times, args.resolution, args.trajectory_draws)
        _write(args, "aoa_map.csv", h, rows)
    elif args.verb == "motion-demo":
        h, rows = ex.run_motion_demo(cfg, args.n_paths)
        _write(args, "motion_demo.csv", h, rows)
    elif args.verb == "cross-validate":
        rep = ex.cross_validate(cfg, args.n_scatterers, args.time, args.polarization)
        _write(args, "cross_validation.csv", rep.header, rep.rows)
        bad = sum(r[-1] != "pass" for r in rep.rows)
        print(f"cross-validation: {len(rep.rows) - bad}/{len(rep.rows)} entries within 3 standard errors")
        return EXIT_OK if rep.passed else EXIT_XVAL
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except QuadratureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_QUADRATURE
    except (ScenarioError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
