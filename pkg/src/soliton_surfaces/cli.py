"""
Command line front end.

Usage:
    soliton-surfaces surface --formula st --k 0 --t 0.5 --format obj -o a.obj
    soliton-surfaces verify --seed 7 -o report.json
    soliton-surfaces curvature --formula st --t 1 -o curvature.csv
    soliton-surfaces gauge --at 1+1i --t 1 -o -
    soliton-surfaces euler --k 0 --radius 50

Exit codes: 0 success, 1 verification failed, 2 configuration error,
3 computation error, 4 I/O error.
"""

import argparse
import math
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from soliton_surfaces import __version__, config
from soliton_surfaces.cpn_model import ProjectorChain, euler_characteristic, veronese_chain
from soliton_surfaces.errors import EXIT_OK, EXIT_VERIFY_FAILED, ConfigError
from soliton_surfaces.gauges import (
    Family,
    MappingDirection,
    action_for,
    gauge_c,
    gauge_fg,
    gauge_g,
    gauge_invariants,
    gauge_st,
    mapping_consistency,
    mapping_m,
    prop1_residual,
    prop2_residual,
)
from soliton_surfaces.immersion import (
    ImmersionField,
    curvature_summary,
    curvature_sweep,
    immersion_c,
    immersion_cd,
    immersion_fg,
    immersion_g,
    immersion_gwfi,
    immersion_st,
)
from soliton_surfaces.linear_spectral import potentials, wavefunction
from soliton_surfaces.surface_io import (
    GridSpec,
    dataframe_csv,
    export_csv,
    export_json,
    export_obj,
    sample_surface,
    write_export,
)
from soliton_surfaces.utils.app_logger import get_logger, set_level
from soliton_surfaces.utils.error_handler import cli_errors, safe_call
from soliton_surfaces.utils.validation import (
    is_finite_number,
    is_integer,
    is_number,
    parse_coefficients,
    parse_complex,
)
from soliton_surfaces.verification import VerificationConfig, run_verification_suite

logger = get_logger("cli")

FORMULAS = ("st", "cd", "g", "c", "fg", "gwfi")
GAUGES = ("st", "g", "c", "fg")
FORMATS = ("obj", "csv", "json")
MODELS = ("cp1", "cpn")


@dataclass(frozen=True)
class CliConfig:
    command: str
    N: int = 2
    seed_vector: Optional[Tuple[Tuple[complex, ...], ...]] = None
    k: Optional[int] = 0
    formula: str = "st"
    gauge: str = "st"
    g: complex = 1 + 1j
    t: float = config.DEFAULT_T
    grid: GridSpec = field(default_factory=GridSpec)
    fmt: str = "obj"
    tol: float = 1e-8
    seed: int = 0
    samples: int = 100
    output: str = "-"
    radius: float = 50.0
    n: int = 2000
    at: Tuple[complex, ...] = (1 + 1j,)
    curvature: bool = True
    euler: bool = True


# -- parsing --------------------------------------------------------------------


def _int_arg(text: str) -> int:
    if not is_integer(text):
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    return int(text)


def _number_arg(text: str) -> float:
    if not is_number(text):
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    return float(text)


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=MODELS, default="cp1", help="cp1 (default) or cpn with --N and --f0")
    p.add_argument("--N", type=_int_arg, default=None, help="dimension of CP^(N-1) for --model cpn")
    p.add_argument(
        "--f0", action="append", default=None, metavar="COEFFS",
        help="seed component as comma separated complex coefficients in ascending powers of z; repeat N times",
    )
    p.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING (default) or ERROR")


def _add_grid_flags(p: argparse.ArgumentParser) -> None:
    lo, hi, ylo, yhi = config.DEFAULT_GRID_BOUNDS
    p.add_argument("--x-min", type=_number_arg, default=lo)
    p.add_argument("--x-max", type=_number_arg, default=hi)
    p.add_argument("--y-min", type=_number_arg, default=ylo)
    p.add_argument("--y-max", type=_number_arg, default=yhi)
    p.add_argument("--nx", type=_int_arg, default=config.DEFAULT_GRID_POINTS)
    p.add_argument("--ny", type=_int_arg, default=config.DEFAULT_GRID_POINTS)
    p.add_argument("--exclude", type=_number_arg, default=0.0, help="radius of the disk around z=0 left out")


def _add_field_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=_int_arg, default=0, help="chain index")
    p.add_argument("--formula", choices=FORMULAS, default="st")
    p.add_argument("--gauge", choices=GAUGES, default="st", help="gauge used by --formula cd")
    p.add_argument("--g", default="1+1i", help="conformal constant (complex literal)")
    p.add_argument("--t", type=_number_arg, default=config.DEFAULT_T, help="spectral parameter, lambda = i t")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="soliton-surfaces",
        description="Soliton surfaces of the CP^(N-1) sigma model in su(N)",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("surface", help="sample an immersion on a grid and write a mesh")
    _add_model_flags(p)
    _add_field_flags(p)
    _add_grid_flags(p)
    p.add_argument("--format", dest="fmt", choices=FORMATS, default="obj")
    p.add_argument("-o", "--output", default=None, help="output file, '-' for standard output")

    p = sub.add_parser("verify", help="run the residual battery and write a JSON report")
    _add_model_flags(p)
    _add_grid_flags(p)
    p.add_argument("--k", type=_int_arg, default=None, help="restrict to one chain index")
    p.add_argument("--tol", type=_number_arg, default=1e-8, help="residual tolerance")
    p.add_argument("--seed", type=_int_arg, default=0)
    p.add_argument("--samples", type=_int_arg, default=100, help="number of residual sample points")
    p.add_argument("--n", type=_int_arg, default=2000, help="quadrature nodes of the Euler characteristic checks")
    p.add_argument("--skip-curvature", action="store_true", help="leave out the grid curvature and sphere checks")
    p.add_argument("--skip-euler", action="store_true", help="leave out the Euler characteristic checks")
    p.add_argument("-o", "--output", default="verification_report.json")

    p = sub.add_parser("curvature", help="K and H over a grid, as CSV")
    _add_model_flags(p)
    _add_field_flags(p)
    _add_grid_flags(p)
    p.add_argument("-o", "--output", default="curvature.csv")

    p = sub.add_parser("gauge", help="S matrices, M and Prop 1-3 residuals at points")
    _add_model_flags(p)
    p.add_argument("--k", type=_int_arg, default=0)
    p.add_argument("--t", type=_number_arg, default=1.0)
    p.add_argument("--g", default="1+1i")
    p.add_argument("--at", action="append", default=None, metavar="Z", help="point as complex literal, e.g. 1+1i")
    p.add_argument("-o", "--output", default="gauge.json")

    p = sub.add_parser("euler", help="Euler characteristic of a chain member")
    _add_model_flags(p)
    p.add_argument("--k", type=_int_arg, default=0)
    p.add_argument("--radius", type=_number_arg, default=50.0)
    p.add_argument("--n", type=_int_arg, default=2000)
    p.add_argument("-o", "--output", default="euler.json")
    return parser


def _model(args) -> Tuple[int, Optional[Tuple[Tuple[complex, ...], ...]]]:
    if args.model == "cp1":
        if args.N not in (None, 2):
            raise ConfigError("--model cp1 has N = 2; use --model cpn for other N", "--N")
        if args.f0:
            raise ConfigError("--f0 needs --model cpn", "--f0")
        return 2, None
    if args.N is None or args.N < 2:
        raise ConfigError("--model cpn needs --N >= 2", "--N")
    if not args.f0:
        raise ConfigError("--model cpn needs the seed components (--f0, repeated N times)", "--f0")
    if len(args.f0) != args.N:
        raise ConfigError(f"--f0 given {len(args.f0)} times, expected N = {args.N}", "--f0")
    try:
        seed = tuple(tuple(parse_coefficients(text)) for text in args.f0)
    except ValueError as e:
        raise ConfigError(str(e), "--f0") from e
    return args.N, seed


def _grid(args) -> GridSpec:
    return GridSpec(args.x_min, args.x_max, args.y_min, args.y_max, args.nx, args.ny, args.exclude)


def _complex_flag(text: str, flag: str) -> complex:
    try:
        return parse_complex(text)
    except ValueError as e:
        raise ConfigError(str(e), flag) from e


def config_from_args(args) -> CliConfig:
    """
    Validate parsed flags.

    Raises:
        ConfigError: inconsistent or out-of-range flags
    """
    N, seed_vector = _model(args)
    values = {"command": args.command, "N": N, "seed_vector": seed_vector, "output": args.output}
    k = getattr(args, "k", None)
    if k is not None and not 0 <= k < N:
        raise ConfigError(f"--k {k} is out of range for N = {N} (0..{N - 1})", "--k")
    values["k"] = k
    t = getattr(args, "t", None)
    if t is not None:
        if not is_finite_number(t):
            raise ConfigError("--t must be a finite number", "--t")
        values["t"] = float(t)
    if hasattr(args, "x_min"):
        values["grid"] = _grid(args)
    if hasattr(args, "formula"):
        values["formula"] = args.formula
        values["gauge"] = args.gauge
    if hasattr(args, "g"):
        values["g"] = _complex_flag(args.g, "--g")
        if values["g"] == 0:
            raise ConfigError("--g must be non-zero", "--g")

    if args.command == "surface":
        values["fmt"] = args.fmt
        if args.fmt == "obj" and N != 2:
            raise ConfigError("OBJ export needs three components (N = 2)", "--format")
        if args.output is None:
            values["output"] = f"surface_{args.formula}_{k}.{args.fmt}"
    elif args.command == "verify":
        if not (is_finite_number(args.tol) and args.tol > 0):
            raise ConfigError("--tol must be a positive number", "--tol")
        if args.samples < 1:
            raise ConfigError("--samples must be at least 1", "--samples")
        if args.n < 4:
            raise ConfigError("--n must be at least 4", "--n")
        values.update(
            tol=float(args.tol), seed=args.seed, samples=args.samples, n=args.n,
            curvature=not args.skip_curvature, euler=not args.skip_euler,
        )
    elif args.command == "gauge":
        if N != 2:
            raise ConfigError("gauge reports are defined for cp1", "--model")
        values["at"] = tuple(_complex_flag(z, "--at") for z in (args.at or ["1+1i"]))
    elif args.command == "euler":
        if not (is_finite_number(args.radius) and args.radius > 0):
            raise ConfigError("--radius must be positive", "--radius")
        if args.n < 8:
            raise ConfigError("--n must be at least 8", "--n")
        values.update(radius=float(args.radius), n=args.n)
    return CliConfig(**values)


# -- commands --------------------------------------------------------------------


def _chain(cfg: CliConfig) -> ProjectorChain:
    return veronese_chain(cfg.N, cfg.seed_vector)


def build_field(cfg: CliConfig, chain: ProjectorChain) -> ImmersionField:
    """Immersion selected by --formula (and --gauge, --g)."""
    k = cfg.k
    if cfg.formula == "st":
        return immersion_st(chain, k)
    if cfg.formula == "g":
        return immersion_g(chain, k)
    if cfg.formula == "c":
        return immersion_c(chain, k, cfg.g)
    if cfg.formula == "fg":
        return immersion_fg(chain, k)
    if cfg.formula == "gwfi":
        return immersion_gwfi(chain, k)
    gauges = {
        "st": lambda: gauge_st(chain, k),
        "g": lambda: gauge_g(chain, k),
        "c": lambda: gauge_c(chain, k, cfg.g),
        "fg": lambda: gauge_fg(chain, k),
    }
    # tangents A_α = D_αS + [S,U_α] are induced by the gauge
    return immersion_cd(wavefunction(chain, k, "su"), gauges[cfg.gauge](), potentials(chain, k), k=k)


@cli_errors("surface export failed")
def cmd_surface(cfg: CliConfig) -> int:
    field_ = build_field(cfg, _chain(cfg))
    mesh = sample_surface(field_, cfg.grid, cfg.t)
    exporters = {"obj": export_obj, "csv": export_csv, "json": export_json}
    write_export(cfg.output, exporters[cfg.fmt](mesh))
    return EXIT_OK


@cli_errors("verification failed to run")
def cmd_verify(cfg: CliConfig) -> int:
    vcfg = VerificationConfig(
        N=cfg.N,
        seed_vector=cfg.seed_vector,
        k_values=None if cfg.k is None else (cfg.k,),
        grid=cfg.grid,
        tolerances=config.Tolerances().with_residual(cfg.tol),
        seed=cfg.seed,
        samples=cfg.samples,
        euler_n=cfg.n,
        curvature=cfg.curvature,
        euler=cfg.euler,
    )
    report = run_verification_suite(vcfg)
    write_export(cfg.output, export_json(report))
    failed = report.failures()
    for check in failed:
        print(f"FAIL {check.name}: {check.max_residual:.3e} >= {check.tolerance:.1e}", file=sys.stderr)
    return EXIT_OK if not failed else EXIT_VERIFY_FAILED


@cli_errors("curvature sweep failed")
def cmd_curvature(cfg: CliConfig) -> int:
    field_ = build_field(cfg, _chain(cfg))
    df = curvature_sweep(field_, cfg.grid, cfg.t)
    write_export(cfg.output, dataframe_csv(df[["x", "y", "K", "H"]]))
    # the export is already written; a failing summary only loses the stderr digest
    summary = safe_call(curvature_summary, df, user_msg="curvature summary unavailable")
    if summary is not None:
        print(summary.to_string(float_format=lambda v: f"{v:.12g}"), file=sys.stderr)
    print(f"orientation {df.attrs['orientation']:+d}, excluded {df.attrs['excluded']}", file=sys.stderr)
    return EXIT_OK


def _matrix(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"re": m.real.tolist(), "im": m.imag.tolist()}


def gauge_point_report(chain: ProjectorChain, k: int, z: complex, t: float, g: complex) -> dict:
    """S^ST, S^FG, M, M⁻¹ and the residuals of Prop 1-3 at one point."""
    x, y = z.real, z.imag
    U = potentials(chain, k)
    psi = wavefunction(chain, k, "su")
    st = action_for(Family.ST, chain, k)
    fg = action_for(Family.FG_GENERALIZED, chain, k)
    entry = {
        "z": {"re": x, "im": y},
        "t": t,
        "S_st": _matrix(st.gauge(x, y, t)),
        "S_fg": _matrix(fg.gauge(x, y, t)),
        "prop1_st": float(prop1_residual(st.gauge, U, x, y, t)),
    }
    for family in (Family.G_SCALING, Family.C_CONFORMAL, Family.FG_GENERALIZED):
        options = {"g": g} if family is Family.C_CONFORMAL else {}
        action = action_for(family, chain, k, **options)
        entry[f"prop2_{family.value}"] = float(prop2_residual(action.gauge, U, action.characteristics, x, y, t))
    tr, det = gauge_invariants(fg.gauge, x, y, t)
    entry["S_fg_det"] = float(det)
    entry["S_fg_trace"] = float(tr)
    M = mapping_m(st.gauge, fg.gauge, x, y, t)
    M_inv = mapping_m(st.gauge, fg.gauge, x, y, t, MappingDirection.ST_TO_FG)
    gauge_res, wave_res = mapping_consistency(st, fg, psi, x, y, t)
    entry.update(
        M=_matrix(M.M),
        M_inverse=_matrix(M_inv.M),
        mapping_gauge_residual=gauge_res,
        mapping_wavefunction_residual=wave_res,
    )
    return entry


@cli_errors("gauge report failed")
def cmd_gauge(cfg: CliConfig) -> int:
    chain = _chain(cfg)
    points = [gauge_point_report(chain, cfg.k, z, cfg.t, cfg.g) for z in cfg.at]
    write_export(cfg.output, export_json({"k": cfg.k, "points": points}))
    return EXIT_OK


@cli_errors("euler characteristic failed")
def cmd_euler(cfg: CliConfig) -> int:
    """χ with an error bound from halving the quadrature and the radius."""
    P = _chain(cfg)[cfg.k]
    chi = euler_characteristic(P, cfg.radius, cfg.n)
    coarse = euler_characteristic(P, cfg.radius, cfg.n // 2)
    half = euler_characteristic(P, cfg.radius / 2, cfg.n)
    # tail beyond the disk decays like 1/R², so halving R quadruples it
    bound = abs(chi - coarse) + abs(chi - half) / 3
    payload = {"k": cfg.k, "chi": chi, "error_bound": bound, "radius": cfg.radius, "n": cfg.n}
    write_export(cfg.output, export_json(payload))
    if not math.isfinite(chi):
        return EXIT_VERIFY_FAILED
    return EXIT_OK


COMMANDS = {
    "surface": cmd_surface,
    "verify": cmd_verify,
    "curvature": cmd_curvature,
    "gauge": cmd_gauge,
    "euler": cmd_euler,
}


@cli_errors("invalid arguments")
def _configure(args) -> CliConfig:
    return config_from_args(args)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.log_level:
        set_level(args.log_level)
    cfg = _configure(args)
    if isinstance(cfg, int):
        return cfg
    logger.info("running %s", cfg.command)
    return COMMANDS[cfg.command](cfg)


if __name__ == "__main__":
    sys.exit(main())
