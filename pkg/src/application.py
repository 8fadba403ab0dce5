"""Command-line application: one sub-command per study"""

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from src import __version__
from src.config.config_manager import ENGINES, QUADRATURES, SAMPLERS, ConfigManager, RunConfig
from src.config.system_file import parse_system_file
from src.errors import ConfigurationError, NumericalError
from src.export.csv_exporter import emit_csv
from src.observables.coherence import CoherenceScope, make_observer
from src.observables.integrals import total_coherence, yields
from src.propagation.propagator import propagate
from src.rp_model.master_equation import build_reaction_model
from src.spin_core.hamiltonian import FIELD_CONVENTIONS, SpinSystemSpec
from src.sweep.sweep_engine import records_to_rows
from src.sweep.studies import (
    DEFAULT_CHI_GRID,
    chi_curves,
    correlation_study,
    decoherence_table,
    gap_curves,
    nuclei_table,
    orientation_grid,
    rate_table,
)


# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIGURATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

DEFAULT_RATE_LIST = "1e4,1e5,1e6,1e7,1e8"
DEFAULT_KDEC_LIST = "0,1e4,1e5,1e6,1e7"
DEFAULT_SYSTEMS = "toy-1n1n,toy-2n2n,toy-3n3n"


def _float_list(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Expected comma-separated numbers, got '{text}'")


def _degrees_list(text: str) -> List[float]:
    return [math.radians(v) for v in _float_list(text)]


def _common_arguments() -> argparse.ArgumentParser:
    """Flags shared by every sub-command; unset flags keep the configured value"""
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group("run parameters")
    group.add_argument("--config", help="JSON run configuration to start from")
    group.add_argument("--system", help="Bundled system name or path to a system JSON file")
    group.add_argument("--chi-deg", type=float, help="CISS angle chi in degrees, 0 to 90")
    group.add_argument("--theta-deg", type=float, help="Field polar angle in degrees")
    group.add_argument("--phi-deg", type=float, help="Field azimuth in degrees")
    group.add_argument("--b0-ut", type=float, help="Field strength in uT")
    group.add_argument("--field-convention", choices=FIELD_CONVENTIONS)
    group.add_argument("--kf", type=float, help="Forward (signaling) rate k_F in 1/s")
    group.add_argument("--kr", type=float, help="Recombination rate k_R in 1/s")
    group.add_argument("--kdec", type=float, help="Electron decoherence rate in 1/s")
    group.add_argument("--j-mt", type=float, help="Exchange coupling J in mT")
    distance = group.add_mutually_exclusive_group()
    distance.add_argument("--d-mt", type=float, help="Dipolar coupling D in mT")
    distance.add_argument("--r-nm", type=float, help="Radical distance in nm; sets D by the point-dipole formula")
    group.add_argument("--paper-bracket", action="store_true", default=None,
                       help="Use the commutator recombination bracket instead of the anticommutator")
    group.add_argument("--engine", choices=ENGINES)
    group.add_argument("--dt", type=float, help="RK4 step in s")
    group.add_argument("--trace-eps", type=float, help="Trace remaining at the integration horizon")
    group.add_argument("--sample-count", type=int)
    group.add_argument("--sampler", choices=SAMPLERS)
    group.add_argument("--quadrature", choices=QUADRATURES)
    group.add_argument("--renormalize", action="store_true", default=None,
                       help="Normalize the state before entropies are evaluated")
    group.add_argument("--workers", type=int)
    group.add_argument("--deterministic", action=argparse.BooleanOptionalAction, default=None,
                       help="Omit wall times and timestamps from outputs")
    group.add_argument("--out", help="Output directory")

    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    verbosity.add_argument("--quiet", "-q", action="store_true", help="Warnings and errors only")
    return common


def _sweep_arguments() -> argparse.ArgumentParser:
    sweep = argparse.ArgumentParser(add_help=False)
    sweep.add_argument("--checkpoint", action="store_true",
                       help="Keep JSON-lines checkpoints in OUT/checkpoints and resume from them")
    return sweep


def _coupling_lists(parser: argparse.ArgumentParser) -> None:
    couplings = parser.add_mutually_exclusive_group()
    couplings.add_argument("--dipolar-list", type=_float_list, help="D values in mT")
    couplings.add_argument("--exchange-list", type=_float_list, help="J values in mT")


def build_parser() -> argparse.ArgumentParser:
    common = _common_arguments()
    sweeping = [common, _sweep_arguments()]
    parser = argparse.ArgumentParser(
        prog="cissrp",
        description="Coherence and yields of CISS-polarized radical pairs",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("trajectory", parents=[common], help="C_G(t) and C_L(t) series")
    p.set_defaults(handler=run_trajectory)

    p = commands.add_parser("chi-sweep", parents=sweeping, help="M_G and M_L versus chi")
    p.add_argument("--chi-list-deg", type=_degrees_list, default=list(DEFAULT_CHI_GRID))
    _coupling_lists(p)
    p.set_defaults(handler=run_chi_sweep)

    p = commands.add_parser("gap", parents=sweeping, help="Coupling-induced change of M_G and M_L versus chi")
    p.add_argument("--chi-list-deg", type=_degrees_list, default=list(DEFAULT_CHI_GRID))
    _coupling_lists(p)
    p.set_defaults(handler=run_gap)

    p = commands.add_parser("rate-table", parents=sweeping, help="Delta M over a k_R x k_F grid")
    p.add_argument("--kf-list", type=_float_list, default=_float_list(DEFAULT_RATE_LIST))
    p.add_argument("--kr-list", type=_float_list, default=_float_list(DEFAULT_RATE_LIST))
    p.set_defaults(handler=run_rate_table)

    p = commands.add_parser("decoherence-table", parents=sweeping, help="Delta M versus decoherence rate")
    p.add_argument("--kdec-list", type=_float_list, default=_float_list(DEFAULT_KDEC_LIST))
    p.set_defaults(handler=run_decoherence_table)

    p = commands.add_parser("correlate", parents=sweeping, help="M_i versus phi_F over field orientations")
    p.add_argument("--n-theta", type=int, default=50)
    p.add_argument("--n-phi", type=int, default=50)
    p.set_defaults(handler=run_correlate)

    p = commands.add_parser("nuclei-table", parents=sweeping, help="Delta M per spin system")
    p.add_argument("--systems", default=DEFAULT_SYSTEMS, help="Comma-separated system names or paths")
    p.set_defaults(handler=run_nuclei_table)

    return parser


def _configure_logging(args: argparse.Namespace) -> None:
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.getLogger().setLevel(level)


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """
    Load --config (or defaults) and apply command-line overrides.

    Raises:
        ConfigurationError: If the result is invalid
    """
    config = ConfigManager(args.config).load() if args.config else RunConfig()

    def override(target, attribute: str, value, convert: Callable = lambda v: v) -> None:
        if value is not None:
            setattr(target, attribute, convert(value))

    override(config, "system", args.system)
    override(config, "chi", args.chi_deg, math.radians)
    override(config.magnetic_field, "theta", args.theta_deg, math.radians)
    override(config.magnetic_field, "phi", args.phi_deg, math.radians)
    override(config.magnetic_field, "b0_ut", args.b0_ut)
    override(config.magnetic_field, "convention", args.field_convention)
    override(config.rates, "k_f", args.kf)
    override(config.rates, "k_r", args.kr)
    override(config.rates, "k_dec", args.kdec)
    override(config.coupling, "j_mt", args.j_mt)
    if args.d_mt is not None:
        config.coupling.d_mt = args.d_mt
        config.coupling.r_nm = None
    override(config.coupling, "r_nm", args.r_nm)
    override(config.model, "paper_literal_bracket", args.paper_bracket)
    override(config.integrator, "engine", args.engine)
    override(config.integrator, "dt", args.dt)
    override(config.integrator, "trace_eps", args.trace_eps)
    override(config.integrator, "sample_count", args.sample_count)
    override(config.integrator, "sampler", args.sampler)
    override(config.observables, "quadrature", args.quadrature)
    override(config.observables, "renormalize_before_entropy", args.renormalize)
    override(config.sweep, "workers", args.workers)
    override(config.sweep, "deterministic", args.deterministic)
    override(config, "output_dir", args.out)
    return config.validate()


def _arguments(args: argparse.Namespace) -> Dict:
    """Parsed sub-command arguments as recorded in the manifest (angle lists in radians)"""
    return {key: value for key, value in sorted(vars(args).items()) if key != "handler"}


def _manifest(args: argparse.Namespace, config: RunConfig, system: SpinSystemSpec, **extra) -> Dict:
    return {
        "arguments": _arguments(args),
        "run": config.to_dict(),
        "system": {"label": system.label, "dimension": system.dimension, "nuclei": system.nucleus_count},
        **extra,
    }


def _emit(args: argparse.Namespace, config: RunConfig, system: SpinSystemSpec, name: str,
          rows: Sequence[Dict], columns: Optional[Sequence[str]] = None, **extra) -> Path:
    path = Path(config.output_dir) / name
    return emit_csv(
        rows, path, columns=columns, manifest=_manifest(args, config, system, **extra),
        command=args.command, deterministic=config.sweep.deterministic,
    )


def _checkpoint_dir(args: argparse.Namespace, config: RunConfig) -> Optional[Path]:
    return Path(config.output_dir) / "checkpoints" if args.checkpoint else None


def run_trajectory(args: argparse.Namespace, config: RunConfig, system: SpinSystemSpec) -> int:
    """Write C_G(t), C_L(t) series and a one-row summary of the trajectory"""
    rates = config.rates.to_spec()
    model = build_reaction_model(
        system, config.chi, config.magnetic_field.to_spec(), config.coupling.to_spec(), rates,
        paper_literal_bracket=config.model.paper_literal_bracket,
        max_dimension=config.model.max_dimension,
    )
    observer = make_observer(model.psi_r, system, config.observables.renormalize_before_entropy)
    trajectory = propagate(model, config.integrator, observer)

    times = trajectory.times
    for scope, key in ((CoherenceScope.GLOBAL, "C_G"), (CoherenceScope.LOCAL, "C_L")):
        column = f"{key}_nats"
        rows = [{"t_s": float(t), column: float(c)} for t, c in zip(times, trajectory.scalars[key])]
        _emit(args, config, system, f"trajectory_{key}.csv", rows, columns=["t_s", column])

    quadrature = config.observables.quadrature
    m_g = total_coherence(trajectory, CoherenceScope.GLOBAL, rates, quadrature=quadrature)
    m_l = total_coherence(trajectory, CoherenceScope.LOCAL, rates, quadrature=quadrature)
    pair = yields(trajectory, model.projector, rates, quadrature=quadrature,
                  tolerance=config.observables.conservation_tolerance)
    summary = {
        "M_G": m_g.value, "M_L": m_l.value, "phi_F": pair.phi_f, "phi_R": pair.phi_r,
        "M_G_tail": m_g.tail_error, "M_L_tail": m_l.tail_error, "yield_tail": pair.tail_error,
        "horizon_reached": trajectory.horizon_reached, "yield_conserved": pair.conserved,
        "engine": trajectory.engine, "fell_back": trajectory.fell_back,
    }
    _emit(args, config, system, "trajectory_summary.csv", [summary],
          warnings=trajectory.warnings + pair.warnings)
    return EXIT_OK


def run_chi_sweep(args: argparse.Namespace, config: RunConfig, system: SpinSystemSpec) -> int:
    study = chi_curves(
        args.chi_list_deg, config, system,
        dipolar_values=args.dipolar_list, exchange_values=args.exchange_list,
        checkpoint_dir=_checkpoint_dir(args, config),
    )
    rows = records_to_rows(study.records, deterministic=config.sweep.deterministic)
    _emit(args, config, system, "chi_sweep.csv", rows)
    _emit(args, config, system, "chi_sweep_delta.csv", study.summary_rows())
    return EXIT_OK


def run_gap(args: argparse.Namespace, config: RunConfig, system: SpinSystemSpec) -> int:
    study = gap_curves(
        args.chi_list_deg, config, system,
        dipolar_values=args.dipolar_list, exchange_values=args.exchange_list,
        checkpoint_dir=_checkpoint_dir(args, config),
    )
    _emit(args, config, system, "gap.csv", study.rows())
    return EXIT_OK


def run_rate_table(args: argparse.Namespace, config: RunConfig, system: SpinSystemSpec) -> int:
    table = rate_table(args.kf_list, args.kr_list, config, system,
                       checkpoint_dir=_checkpoint_dir(args, config))
    for scope in (CoherenceScope.GLOBAL, CoherenceScope.LOCAL):
        for ratio in ("ciss", "maxmin"):
            _emit(args, config, system, f"rate_table_{scope.value}_{ratio}.csv",
                  table.table_rows(scope, ratio))
    rows = records_to_rows(table.records, deterministic=config.sweep.deterministic)
    _emit(args, config, system, "rate_table_points.csv", rows)
    return EXIT_OK


def run_decoherence_table(args: argparse.Namespace, config: RunConfig, system: SpinSystemSpec) -> int:
    rows = decoherence_table(args.kdec_list, config, system, checkpoint_dir=_checkpoint_dir(args, config))
    _emit(args, config, system, "decoherence_table.csv", [row.to_row("k_dec") for row in rows])
    return EXIT_OK


def run_correlate(args: argparse.Namespace, config: RunConfig, system: SpinSystemSpec) -> int:
    grid = orientation_grid(args.n_theta, args.n_phi)
    study = correlation_study(grid, config.chi, config, system, checkpoint_dir=_checkpoint_dir(args, config))
    rows = records_to_rows(study.records, outputs=("M_G", "M_L", "phi_F"),
                           deterministic=config.sweep.deterministic)
    _emit(args, config, system, "correlate_scatter.csv", rows)
    _emit(args, config, system, "correlate_fit.csv", study.fit_rows())
    return EXIT_OK


def run_nuclei_table(args: argparse.Namespace, config: RunConfig, system: SpinSystemSpec) -> int:
    systems = [parse_system_file(name.strip()) for name in args.systems.split(",") if name.strip()]
    rows = []
    table = nuclei_table(systems, config, checkpoint_dir=_checkpoint_dir(args, config))
    for spec, row in zip(systems, table):
        rows.append({"system": spec.label, "dimension": spec.dimension, **row.to_row("nuclei")})
    _emit(args, config, system, "nuclei_table.csv", rows,
          systems=[spec.label for spec in systems])
    return EXIT_OK


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments and run one sub-command.

    Returns:
        Exit code: 0 success, 2 configuration error, 3 numerical failure,
        4 I/O failure
    """
    args = build_parser().parse_args(argv)
    _configure_logging(args)

    try:
        config = resolve_config(args)
        system = parse_system_file(config.system)
        logger.info(f"{args.command}: system {system.label} (dimension {system.dimension})")
        return args.handler(args, config, system)
    except ConfigurationError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIGURATION
    except (NumericalError, np.linalg.LinAlgError) as e:
        logger.error(f"Numerical failure: {e}")
        return EXIT_NUMERICAL
    except OSError as e:
        logger.error(f"I/O failure: {e}")
        return EXIT_IO
    except ValueError as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_CONFIGURATION


def main():
    """Main entry point for the application"""
    sys.exit(run())


if __name__ == "__main__":
    main()
