from .core import Experiment, supported_weyl_modes
from .bmo import supported_evaluators
from .logging import set_verbosity
from .output import supported_formats
from .utils import PreconditionError, default_jobs, parse_grid, parse_int_list

import argparse, logging, sys
from pathlib import Path

logger = logging.getLogger(__name__)

# Commands whose natural output is a table.
csv_commands: list[str] = ["fsum", "surrogate", "jn-tail", "fefferman", "gap"]


def _common_arguments() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "-v",
        "--verbose",
        default=0,
        type=int,
        metavar="VERBOSE_LEVEL",
        help="Level of verbosity. Valid verbose levels are: 0, 1, 2",
    )
    common.add_argument(
        "--jobs",
        default=None,
        type=int,
        metavar="N",
        help="Worker processes for parallel commands. Defaults to $RSL_JOBS, else 1",
    )
    common.add_argument(
        "--out",
        default="",
        type=str,
        metavar="PATH",
        help="Output directory or .json/.csv file. A manifest sidecar is written next to the data file. "
        + "Defaults to stdout",
    )
    common.add_argument(
        "--format",
        default=None,
        type=str,
        metavar="FORMAT",
        help="Output format. Supported formats: " + " ".join(supported_formats),
    )
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_arguments()
    parser = argparse.ArgumentParser(
        "rslab",
        description="Numerical experiments on Riemann type series sum e(n^k x)/n",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    gauss = subparsers.add_parser("gauss", parents=[common], help="Complete Gauss sum xi^k_{a/q}")
    gauss.add_argument("--a", required=True, type=int, help="Numerator a")
    gauss.add_argument("--q", required=True, type=int, help="Modulus q >= 1")
    gauss.add_argument("--k", required=True, type=int, help="Power k >= 2")

    ascan = subparsers.add_parser("ascan", parents=[common], help="Lower bound A_<=Q(k) for the constant A(k)")
    ascan.add_argument("--k", required=True, type=int, help="Power k >= 2")
    ascan.add_argument("--qmax", required=True, type=int, help="Largest modulus scanned")

    cf = subparsers.add_parser("cf", parents=[common], help="Convergents and approximation bounds of a point")
    cf.add_argument("--x", required=True, type=str, help='Point as a CF literal "a0;a1,a2,..." or a rational "p/q"')

    interval = subparsers.add_parser("interval", parents=[common], help="Interval I_{p/q} or its refinement I_b")
    interval.add_argument("--p", required=True, type=int, help="Numerator p")
    interval.add_argument("--q", required=True, type=int, help="Denominator q")
    interval.add_argument("--sub", default=None, type=parse_int_list, metavar="B1,B2,...", help="Refining tail b")
    interval.add_argument("--one-sided", action="store_true", help="Keep only the canonical expansion branch")

    fsum = subparsers.add_parser("fsum", parents=[common], help="Partial sums of F_k at checkpoints")
    fsum.add_argument("--x", required=True, type=str, help='Point as "a0;a1,..." or "p/q"')
    fsum.add_argument("--k", required=True, type=int, help="Power k >= 2")
    fsum.add_argument("--N", required=True, type=int, help="Truncation N")
    fsum.add_argument("--checkpoints", default=None, type=parse_int_list, metavar="N1,N2,...", help="Checkpoints")

    surrogate = subparsers.add_parser("surrogate", parents=[common], help="Convergent-driven surrogate series")
    surrogate.add_argument("--x", required=True, type=str, help='Point as "a0;a1,..." or "p/q"')
    surrogate.add_argument("--k", required=True, type=int, help="Power k >= 2")
    surrogate.add_argument("--j-start", default=1, type=int, help="First convergent index")
    surrogate.add_argument(
        "--max-q", default=None, type=int, help="Stop before the first convergent denominator above this value"
    )

    prop2 = subparsers.add_parser("prop2", parents=[common], help="Cesaro window sum against its main term")
    prop2.add_argument("--x", required=True, type=str, help='Point as "a0;a1,..." or "p/q"')
    prop2.add_argument("--k", required=True, type=int, help="Power k >= 2")
    prop2.add_argument("--i", required=True, type=int, help="Convergent index i")
    prop2.add_argument("--m", required=True, type=int, help="Window start m")
    prop2.add_argument("--tau", default=2.0, type=float, help="Window exponent tau >= 2")

    verdict = subparsers.add_parser("verdict", parents=[common], help="Convergence verdict for F_k at a point")
    verdict.add_argument("--x", required=True, type=str, help='Point as "a0;a1,..." or "p/q"')
    verdict.add_argument("--k", required=True, type=int, help="Power k >= 2")
    verdict.add_argument("--budget", default=20_000_000, type=int, help="Largest convergent denominator used")

    weyl = subparsers.add_parser("weyl", parents=[common], help="Weyl sum case classification and bound shapes")
    weyl.add_argument("mode", type=str, help="Mode. Supported modes: " + " ".join(supported_weyl_modes))
    weyl.add_argument("--x", required=True, type=str, help='Point as "a0;a1,..." or "p/q"')
    weyl.add_argument("--k", required=True, type=int, help="Power k >= 2")
    weyl.add_argument("--P", required=True, type=parse_int_list, metavar="P1,P2,...", help="Lengths P")
    weyl.add_argument("--eps", default="0.25", type=str, help="Exponent epsilon in (0, 1)")

    jn_tail = subparsers.add_parser("jn-tail", parents=[common], help="John-Nirenberg tail experiment on I_{p/q}")
    jn_tail.add_argument("--p", required=True, type=int, help="Numerator p")
    jn_tail.add_argument("--q", required=True, type=int, help="Denominator q")
    jn_tail.add_argument("--k", required=True, type=int, help="Power k >= 2")
    jn_tail.add_argument("--lambdas", required=True, type=parse_grid, metavar="START:STOP:STEP", help="Lambda grid")
    jn_tail.add_argument("--samples", required=True, type=int, help="Number of sample points")
    jn_tail.add_argument("--N", required=True, type=int, help="Truncation N >= q^2")
    jn_tail.add_argument("--seed", required=True, type=int, help="Random seed")
    jn_tail.add_argument("--sub", default=None, type=parse_int_list, metavar="B1,B2,...", help="Sub-interval I_b")
    jn_tail.add_argument("--aref", default=4.709236, type=float, help="Reference value of A(k)")
    jn_tail.add_argument("--depth", default=10, type=int, help="Random quotients appended per sample")
    jn_tail.add_argument("--max-quotient", default=100, type=int, help="Largest random quotient")
    jn_tail.add_argument(
        "--evaluator",
        default="truncation",
        type=str,
        help="Evaluator of F_k. Supported evaluators: " + " ".join(supported_evaluators),
    )
    jn_tail.add_argument("--correction-c", default=None, type=float, help="Constant of the correction term")
    jn_tail.add_argument("--one-sided", action="store_true", help="Sample only the canonical branch of I_{p/q}")

    fefferman = subparsers.add_parser("fefferman", parents=[common], help="Block functional of a_l = 1/n at n^k - m")
    fefferman.add_argument("--k", required=True, type=int, help="Power k >= 2")
    fefferman.add_argument("--m", default=0, type=int, help="Shift m >= 0")
    fefferman.add_argument("--N", required=True, type=parse_int_list, metavar="N1,N2,...", help="Block lengths")
    fefferman.add_argument("--n-max", required=True, type=int, help="Largest n")
    fefferman.add_argument("--j-cut", default=None, type=int, help="Largest block index summed")

    bmo_est = subparsers.add_parser("bmo-est", parents=[common], help="Dyadic lower estimate of the BMO norm")
    bmo_est.add_argument("--k", required=True, type=int, help="Power k >= 2")
    bmo_est.add_argument("--N", required=True, type=int, help="Truncation N")
    bmo_est.add_argument("--depth", required=True, type=int, help="Dyadic depth >= 1")
    bmo_est.add_argument("--samples", required=True, type=int, help="Samples per dyadic interval")
    bmo_est.add_argument("--seed", required=True, type=int, help="Random seed")

    gap = subparsers.add_parser("gap", parents=[common], help="Gap between F_N and the surrogate partial sum")
    gap.add_argument("--x", required=True, type=str, help='Point as "a0;a1,..." or "p/q"')
    gap.add_argument("--k", required=True, type=int, help="Power k >= 2")
    gap.add_argument("--N", required=True, type=parse_int_list, metavar="N1,N2,...", help="Truncations")
    gap.add_argument("--tau", default=2.0, type=float, help="Window exponent tau >= 2")

    integral = subparsers.add_parser("integral", parents=[common], help="Oscillatory integral against (1/k) ln+")
    integral.add_argument("--m", required=True, type=int, help="Lower limit m >= 1")
    integral.add_argument("--N", required=True, type=int, help="Upper limit N >= m")
    integral.add_argument("--beta", required=True, type=str, help='Frequency beta as "p/q" or a decimal')
    integral.add_argument("--k", required=True, type=int, help="Power k >= 2")
    return parser


def _parameters(args: argparse.Namespace) -> dict:
    ignored = {"command", "verbose", "jobs", "out", "format"}
    parameters = {key: value for key, value in vars(args).items() if key not in ignored and value is not None}
    return {("J_cut" if key == "j_cut" else key): value for key, value in parameters.items()}


def dispatch(argv=None) -> int:
    """Runs one command and returns its exit code.

    0 on success, 1 when a computation fails (quadrature), 2 on usage errors,
    3 on precondition errors and 4 when the output cannot be written.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit:
        return int(exit.code or 0)

    try:
        set_verbosity(args.verbose)
        jobs = args.jobs if args.jobs is not None else default_jobs()
        format = args.format
        if format is None:
            tabular = args.command in csv_commands or (args.command == "weyl" and args.mode == "table")
            format = "csv" if tabular else "json"
        experiment = Experiment(
            command=args.command,
            parameters=_parameters(args),
            path_to_working_directory=str(Path.cwd()),
            out=args.out,
            format=format,
            jobs=jobs,
        )
        experiment.run()
    except PreconditionError as error:
        logger.error(f"Precondition violated: {error}")
        return 3
    except (ValueError, TypeError) as error:
        logger.error(str(error))
        parser.print_usage(sys.stderr)
        return 2
    except OSError as error:
        logger.error(f"Cannot write output: {error}")
        return 4
    except RuntimeError as error:
        logger.error(str(error))
        return 1
    return 0


def main(argv=None):
    sys.exit(dispatch(argv))
