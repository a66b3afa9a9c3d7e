import logging, math
from fractions import Fraction
from pathlib import Path

from .bmo import (
    bmo_norm_estimate,
    fefferman_S,
    fefferman_blocks,
    jn_tail_experiment,
    oscillation_limsup_reference,
)
from .contfrac import (
    approximation_bounds,
    cf_expand_rational,
    interval_of_convergent,
    parse_cf,
    refine_interval,
)
from .gauss import A_BOUND, DIRECT_LIMIT, a_constant_scan, gauss_sum
from .output import Payload, RunManifest, Table, collect_versions, emit, supported_formats, timestamp
from .series import (
    DEFAULT_TAU,
    TRUNCATION_NOTE,
    convergence_verdict,
    oscillatory_integral_check,
    prop2_decomposition,
    riemann_partial_sum,
    surrogate_sum,
    theorem1_gap,
)
from .utils import fit_slope, relative_to_absolute_path
from .weyl import classify_point, empirical_vs_bound

logger = logging.getLogger(__name__)
supported_commands: list[str] = [
    "gauss",
    "ascan",
    "cf",
    "interval",
    "fsum",
    "surrogate",
    "prop2",
    "verdict",
    "weyl",
    "jn-tail",
    "fefferman",
    "bmo-est",
    "gap",
    "integral",
]
supported_weyl_modes: list[str] = ["classify", "table"]
stochastic_commands: list[str] = ["jn-tail", "bmo-est"]


class Experiment:
    def __init__(
        self,
        command: str,
        parameters: dict,
        path_to_working_directory: str | Path,
        out: str | Path | None = None,
        format: str = "json",
        jobs: int = 1,
    ):
        """
        Runs one rslab command and emits its result.

        Results go to stdout unless ``out`` names a directory or a .json/.csv file, in
        which case a manifest sidecar is written next to the data file.

        :param command: One of ``supported_commands``
        :type command: str
        :param parameters: Keyword parameters of the command, as parsed from the command line
        :type parameters: dict
        :param path_to_working_directory: Relative ``out`` paths are resolved against this directory
        :type path_to_working_directory: str | Path
        :param out: Output directory or data file, defaults to None (stdout)
        :type out: str | Path | None, optional
        :param format: "json" or "csv", defaults to "json"
        :type format: str, optional
        :param jobs: Worker processes for parallel commands, defaults to 1
        :type jobs: int, optional
        """
        self.command = command.lower()
        self.parameters = dict(parameters)
        self.path_to_working_directory = Path(path_to_working_directory)
        self.format = format.lower()
        self.jobs = jobs

        if self.command not in supported_commands:
            raise ValueError(f"Unsupported command: {command}. Expecting: " + " ".join(supported_commands))
        if self.format not in supported_formats:
            raise ValueError(f"Unsupported format: {format}. Expecting: " + " ".join(supported_formats))
        if self.jobs < 1:
            raise ValueError(f"Expecting jobs >= 1. Got: {jobs}")
        if self.command in stochastic_commands and self.parameters.get("seed") is None:
            raise ValueError(f"Command {self.command} needs an explicit --seed")

        self.out = None
        if out:
            self.out = relative_to_absolute_path(out, self.path_to_working_directory)

    def run(self) -> Payload:
        started = timestamp()
        logger.info(f"Running {self.command}...")
        if self.command == "gauss":
            payload = self._gauss()
        elif self.command == "ascan":
            payload = self._ascan()
        elif self.command == "cf":
            payload = self._cf()
        elif self.command == "interval":
            payload = self._interval()
        elif self.command == "fsum":
            payload = self._fsum()
        elif self.command == "surrogate":
            payload = self._surrogate()
        elif self.command == "prop2":
            payload = self._prop2()
        elif self.command == "verdict":
            payload = self._verdict()
        elif self.command == "weyl":
            payload = self._weyl()
        elif self.command == "jn-tail":
            payload = self._jn_tail()
        elif self.command == "fefferman":
            payload = self._fefferman()
        elif self.command == "bmo-est":
            payload = self._bmo_est()
        elif self.command == "gap":
            payload = self._gap()
        else:
            payload = self._integral()

        manifest = RunManifest(
            command=self.command,
            parameters=self.parameters,
            seed=self.parameters.get("seed"),
            versions=collect_versions(),
            started=started,
            summary=payload.record if self.format == "csv" else {},
        )
        emit(payload, self.format, self.out, manifest)
        return payload

    def _x(self):
        return parse_cf(self.parameters["x"])

    def _gauss(self) -> Payload:
        p = self.parameters
        record = gauss_sum(p["a"], p["q"], p["k"])
        return Payload(
            self.command,
            {
                "a": record.a,
                "q": record.q,
                "k": record.k,
                "value": record.value,
                "re": record.value.real,
                "im": record.value.imag,
                "modulus": record.modulus,
                "normalized": record.normalized,
            },
        )

    def _ascan(self) -> Payload:
        p = self.parameters
        result = a_constant_scan(p["k"], p["qmax"], self.jobs)
        return Payload(
            self.command,
            {
                "k": result.k,
                "Q_max": result.Q_max,
                "value": result.value,
                "argmax_a": result.argmax_a,
                "argmax_q": result.argmax_q,
                "bound": A_BOUND,
                "note": "lower bound for A(k)",
            },
            Table(["q", "max_normalized"], [[q, value] for q, value in sorted(result.per_q_max.items())]),
        )

    def _cf(self) -> Payload:
        x = self._x()
        quotients = (x.a0,) + x.quotients
        bounds = {j: (lower, error, upper) for j, lower, error, upper in approximation_bounds(x)}
        rows = []
        for j, (p_j, q_j) in enumerate(x.convergents):
            lower, error, upper = bounds.get(j, (None, None, None))
            floats = [float(v) if v is not None else None for v in (lower, error, upper)]
            rows.append([j, quotients[j], p_j, q_j, *floats])
        return Payload(
            self.command,
            {"x": str(x), "is_prefix": x.is_prefix, "value": x.value, "depth": x.depth},
            Table(["j", "a", "p", "q", "lower", "error", "upper"], rows),
        )

    def _interval(self) -> Payload:
        p = self.parameters
        two_sided = not p.get("one_sided", False)
        if p.get("sub"):
            interval = refine_interval(cf_expand_rational(p["p"], p["q"]), p["sub"], two_sided)
        else:
            interval = interval_of_convergent(p["p"], p["q"], two_sided)
        return Payload(
            self.command,
            {
                "p": p["p"],
                "q": p["q"],
                "sub": p.get("sub"),
                "two_sided": two_sided,
                "lo": interval.lo,
                "hi": interval.hi,
                "center": interval.center,
                "length": interval.length,
                "branch_lengths": interval.branch_lengths,
                "lo_float": float(interval.lo),
                "hi_float": float(interval.hi),
            },
        )

    def _fsum(self) -> Payload:
        p = self.parameters
        trace = riemann_partial_sum(self._x(), p["k"], p["N"], p.get("checkpoints"))
        return Payload(
            self.command,
            {"x": p["x"], "k": p["k"], "N": p["N"]},
            Table(["n", "re", "im"], [[n, v.real, v.imag] for n, v in zip(trace.checkpoints, trace.values)]),
        )

    def _surrogate(self) -> Payload:
        p = self.parameters
        trace = surrogate_sum(self._x(), p["k"], p.get("j_start", 1), p.get("max_q"))
        rows = [
            [t.j, s.real, s.imag, t.p, t.q, t.value.real, t.value.imag, t.bound]
            for t, s in zip(trace.terms, trace.partial_sums)
        ]
        return Payload(
            self.command,
            {
                "x": p["x"],
                "k": p["k"],
                "total": trace.total,
                "terms": len(trace.terms),
                "truncated_at_q": trace.truncated_at_q,
            },
            Table(["n", "re", "im", "p", "q", "term_re", "term_im", "bound"], rows),
        )

    def _prop2(self) -> Payload:
        p = self.parameters
        result = prop2_decomposition(self._x(), p["k"], p["i"], p["m"], p.get("tau", DEFAULT_TAU))
        return Payload(
            self.command,
            {
                "x": p["x"],
                "k": p["k"],
                "i": p["i"],
                "m": p["m"],
                "tau": p.get("tau", DEFAULT_TAU),
                "cesaro": result.cesaro,
                "main": result.main,
                "residual": result.residual,
                "residual_modulus": abs(result.residual),
                "window": result.window,
            },
        )

    def _verdict(self) -> Payload:
        p = self.parameters
        result = convergence_verdict(self._x(), p["k"], p.get("budget", DIRECT_LIMIT))
        return Payload(self.command, {"x": p["x"], "k": p["k"], "verdict": result.verdict, "evidence": result.evidence})

    def _weyl(self) -> Payload:
        p = self.parameters
        mode = p.get("mode", "classify")
        if mode not in supported_weyl_modes:
            raise ValueError(f"Unsupported weyl mode: {mode}. Expecting: " + " ".join(supported_weyl_modes))
        x = self._x()
        P_list = p["P"] if isinstance(p["P"], list) else [p["P"]]
        if mode == "classify":
            if len(P_list) != 1:
                raise ValueError(f"weyl classify takes a single P. Got: {P_list}")
            c = classify_point(x, p["k"], P_list[0], p["eps"])
            return Payload(
                "weyl classify",
                {
                    "x": p["x"],
                    "k": c.k,
                    "P": c.P,
                    "epsilon": c.epsilon,
                    "case": c.case,
                    "C": c.approx.C if c.approx else None,
                    "M": c.approx.M if c.approx else None,
                    "beta": c.approx.beta if c.approx else None,
                    "delta": c.delta,
                    "bound_shape": c.bound_shape,
                },
            )
        rows = empirical_vs_bound(x, p["k"], P_list, p["eps"])
        return Payload(
            "weyl table",
            {"x": p["x"], "k": p["k"], "epsilon": p["eps"], "note": "bound shapes with constants set to 1"},
            Table(
                ["P", "case", "modulus", "bound_shape", "ratio", "normalized"],
                [[r.P, r.case.value, r.modulus, r.bound_shape, r.ratio, r.normalized] for r in rows],
            ),
        )

    def _jn_tail(self) -> Payload:
        p = self.parameters
        histogram = jn_tail_experiment(
            p["p"],
            p["q"],
            p["k"],
            p["lambdas"],
            p["samples"],
            p["N"],
            p["seed"],
            sub_interval=p.get("sub"),
            A_ref=p.get("aref", A_BOUND),
            depth=p.get("depth", 10),
            max_quotient=p.get("max_quotient", 100),
            jobs=self.jobs,
            evaluator=p.get("evaluator", "truncation"),
            correction_C=p.get("correction_c"),
            two_sided=not p.get("one_sided", False),
        )
        rows = [
            [lam, emp, t2, jn]
            for lam, emp, t2, jn in zip(
                histogram.lambdas, histogram.empirical, histogram.theorem2_curve, histogram.classic_jn_curve
            )
        ]
        return Payload(
            self.command,
            {
                "p": p["p"],
                "q": histogram.q,
                "k": histogram.k,
                "interval": [histogram.interval.lo, histogram.interval.hi],
                "sub": histogram.J_sub,
                "samples": histogram.samples,
                "truncation_N": histogram.truncation_N,
                "seed": histogram.seed,
                "A_ref": histogram.A_ref,
                "theorem2_rate": histogram.theorem2_rate,
                "mean": histogram.mean,
                "oscillation": histogram.oscillation,
                "fitted_slope": histogram.fitted_slope,
                "sampling": histogram.metadata,
            },
            Table(["lambda", "empirical", "theorem2_curve", "classic_jn_curve"], rows),
        )

    def _fefferman(self) -> Payload:
        p = self.parameters
        N_list = p["N"] if isinstance(p["N"], list) else [p["N"]]
        results = [fefferman_blocks(p["k"], p["m"], N, p["n_max"], p.get("J_cut")) for N in N_list]
        S = fefferman_S(p["k"], p["m"], N_list, p["n_max"], p.get("J_cut"))
        return Payload(
            self.command,
            {"k": p["k"], "m": p["m"], "n_max": p["n_max"], "S_lower_estimate": S, "reference": 1 / (8 * p["k"] ** 2)},
            Table(
                ["N", "J_cut", "block_sum", "lower_bound"],
                [[r.N, r.J_cut, r.block_sum, r.lower_bound] for r in results],
            ),
        )

    def _bmo_est(self) -> Payload:
        p = self.parameters
        estimate = bmo_norm_estimate(p["k"], p["N"], p["depth"], p["samples"], p["seed"], jobs=self.jobs)
        return Payload(
            self.command,
            {
                "k": p["k"],
                "truncation_N": p["N"],
                "dyadic_depth": p["depth"],
                "samples_per_interval": p["samples"],
                "seed": p["seed"],
                "estimate": estimate,
                "limsup_reference": oscillation_limsup_reference(p["k"]),
                "note": "lower estimate of the BMO norm of truncated F_k",
            },
        )

    def _gap(self) -> Payload:
        p = self.parameters
        rows = theorem1_gap(self._x(), p["k"], p["N"], p.get("tau", DEFAULT_TAU))
        slope = fit_slope([math.log(N) for N, *_ in rows], [gap for *_, gap in rows])
        return Payload(
            self.command,
            {
                "x": p["x"],
                "k": p["k"],
                "tau": p.get("tau", DEFAULT_TAU),
                "slope_vs_ln_N": slope,
                "note": TRUNCATION_NOTE,
            },
            Table(
                ["N", "F_re", "F_im", "surrogate_re", "surrogate_im", "gap"],
                [[N, F.real, F.imag, s.real, s.imag, gap] for N, F, s, gap in rows],
            ),
        )

    def _integral(self) -> Payload:
        p = self.parameters
        beta = Fraction(p["beta"])
        integral, main, discrepancy = oscillatory_integral_check(p["m"], p["N"], beta, p["k"])
        return Payload(
            self.command,
            {
                "m": p["m"],
                "N": p["N"],
                "beta": beta,
                "k": p["k"],
                "integral": integral,
                "main": main,
                "discrepancy": discrepancy,
            },
        )
