"""Command-line front end: config parsing, experiment orchestration and
deterministic CSV/JSON emission.

Exit codes: 0 success, 1 usage or malformed config, 2 contract violation,
3 precision ceiling reached (scientifically meaningful, not a failure),
4 output IO failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import basis, control as ct, estimates as est, gram, quadratic as qd
from . import regions as rg, reporting, verify
from .basis import ContractViolation

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONTRACT = 2
EXIT_PRECISION = 3
EXIT_IO = 4

ENV_PRECISION = "HERMITE_OBS_PRECISION_BITS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_region(text, n, N, safety=1.5, margin=1.0):
    """Region shorthand -> Region, truncated generously for cutoff N.

    Shorthands: 'periodic:L=1,gamma=0.5', 'halfline', 'full',
    'ball:r=1' (interval in 1-D), 'interval:a=-1,b=1',
    'halfspace:axis=0,c=0', 'ballcomp:r0=1'.
    """
    head, _, args = text.partition(":")
    opts = {}
    if args:
        for item in args.split(","):
            key, _, val = item.partition("=")
            opts[key.strip()] = float(val)
    radius = rg.truncate_radius(N, n, safety=safety) + margin
    if head == "periodic":
        return rg.make_periodic_thick(n, opts.get("L", 1.0), opts.get("gamma", 0.5), radius)
    if head == "halfline":
        if n != 1:
            raise ContractViolation("halfline is one-dimensional")
        return rg.half_line(radius)
    if head == "halfspace":
        return rg.half_space(n, int(opts.get("axis", 0)), opts.get("c", 0.0), radius)
    if head == "full":
        return rg.full_space(n, radius)
    if head == "ball":
        if n != 1:
            raise ContractViolation("ball shorthand is one-dimensional")
        r = opts.get("r", 1.0)
        return rg.interval_region(-r, r, trunc_radius=radius)
    if head == "interval":
        if n != 1:
            raise ContractViolation("interval shorthand is one-dimensional")
        return rg.interval_region(opts["a"], opts["b"], trunc_radius=radius)
    if head == "ballcomp":
        if n != 1:
            raise ContractViolation("ballcomp shorthand is one-dimensional")
        return rg.ball_complement(opts.get("r0", 1.0), radius)
    raise ContractViolation("unknown region shorthand %r" % text)


def parse_int_range(text):
    """'4:64:4' -> [4, 8, ..., 64]; '8' -> [8]; '4,9,16' -> [4, 9, 16]."""
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        if len(parts) == 2:
            parts.append(1)
        lo, hi, step = parts
        return list(range(lo, hi + 1, step))
    if "," in text:
        return [int(p) for p in text.split(",")]
    return [int(text)]


def parse_float_list(text):
    return [float(p) for p in str(text).split(",")]


CONFIG_KEYS = {
    "region": str,
    "symbol": str,
    "n": int,
    "N": str,
    "T": str,
    "seed": int,
    "precision_bits": int,
    "out": str,
    "trials": int,
    "suite": str,
    "gamma": float,
    "variant": str,
}


def load_config(path):
    """Read a JSON config file and validate field types and ranges."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise UsageError("cannot read config file: %s" % exc)
    except json.JSONDecodeError as exc:
        raise UsageError("malformed config %s: line %d: %s" % (path, exc.lineno, exc.msg))
    if not isinstance(doc, dict):
        raise UsageError("config root must be an object")
    out = {}
    for key, value in doc.items():
        if key not in CONFIG_KEYS:
            raise UsageError("unknown config field %r" % key)
        try:
            out[key] = CONFIG_KEYS[key](value)
        except (TypeError, ValueError):
            raise UsageError("config field %r has invalid value %r" % (key, value))
    if "gamma" in out and not 0.0 < out["gamma"] <= 1.0:
        raise UsageError("config field 'gamma' out of range (0, 1]")
    if "region" in out and "gamma=" in out["region"]:
        g = float(out["region"].split("gamma=")[1].split(",")[0])
        if not 0.0 < g <= 1.0:
            raise UsageError("config region gamma out of range (0, 1]")
    if "n" in out and out["n"] < 1:
        raise UsageError("config field 'n' must be >= 1")
    return out


def build_parser():
    parser = _Parser(prog="hermite-obs", description=__doc__)
    parser.add_argument("--config", help="JSON config file merged under CLI flags")
    sub = parser.add_subparsers(dest="command")

    def add(name, **kw):
        p = sub.add_parser(name, **kw)
        p.add_argument("--out", help="output stem; writes <out>.json / <out>.csv")
        p.add_argument("--mkdirs", action="store_true")
        p.add_argument("--plot-data", action="store_true")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--precision-bits", type=int, default=None)
        p.add_argument("--quiet", action="store_true")
        return p

    p = add("basis", help="dimension and self-check of E_N")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--N", default=None)

    p = add("gram", help="restriction Gram matrix on E_N")
    p.add_argument("--region", default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--N", default=None)

    p = add("constant", help="sharp spectral constant C_N")
    p.add_argument("--region", default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--N", default=None)

    p = add("scaling", help="C_N over a range of cutoffs, with growth fits")
    p.add_argument("--region", default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--N", default=None, help="range a:b:c")
    p.add_argument("--variant", default=None, choices=["open", "density", "thick"])

    p = add("bounds", help="explicit theoretical bounds")
    p.add_argument("--variant", default=None, choices=["open", "density", "thick"])
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--N", default=None, help="range a:b:c")
    p.add_argument("--x0", type=float, default=0.0)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--R0", type=float, default=0.0)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=0.5)

    p = add("remez", help="Remez/Chebyshev growth factors")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--complex-poly", action="store_true")

    p = add("bernstein", help="randomized derivative/weighted estimate suites")
    p.add_argument("--trials", type=int, default=None)

    p = add("tails", help="Hermite tail bounds and the radius constant c_n")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--a", type=float, default=None)

    p = add("symbol", help="Hamilton map and singular space of a symbol")
    p.add_argument("--symbol", default=None)

    p = add("quantize", help="Galerkin matrix of the Weyl quantization")
    p.add_argument("--symbol", default=None)
    p.add_argument("--N", default=None)

    p = add("evolve", help="semigroup propagation of an initial expansion")
    p.add_argument("--symbol", default=None)
    p.add_argument("--N", default=None)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--f0", default="ground", help="'ground', 'random' or a JSON file")

    p = add("observability", help="observability constant C_T")
    p.add_argument("--symbol", default=None)
    p.add_argument("--region", default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--N", default=None)
    p.add_argument("--T", default=None, help="single horizon or comma list (blowup study)")
    p.add_argument("--k0", type=int, default=None)

    p = add("control", help="minimal-norm or staircase control synthesis")
    p.add_argument("--symbol", default=None)
    p.add_argument("--region", default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--N", default=None)
    p.add_argument("--T", default=None)
    p.add_argument("--f0", default="random")
    p.add_argument("--staircase", action="store_true")
    p.add_argument("--target", type=float, default=1e-6)

    p = add("verify", help="run every invariant suite")
    p.add_argument("--suite", default="all", help="'all' or comma list of suite names")
    p.add_argument("--trials", type=int, default=None)
    return parser


def _fill_from_config(args, config):
    merged_warnings = []
    for key, value in config.items():
        attr = key.replace("-", "_")
        if hasattr(args, attr):
            current = getattr(args, attr)
            if current is None:
                setattr(args, attr, value)
            elif str(current) != str(value):
                merged_warnings.append(
                    "config %s=%r overridden by flag value %r" % (key, value, current)
                )
    return merged_warnings


def _default(args, attr, value):
    if getattr(args, attr, None) is None:
        setattr(args, attr, value)


def _single_N(args):
    values = parse_int_range(str(args.N))
    if len(values) != 1:
        raise UsageError("this command takes a single cutoff N")
    return values[0]


def _aux_defaults():
    return {
        "C_sobolev": gram.DEFAULT_C_SOBOLEV,
        "C_kov": gram.DEFAULT_C_KOV,
        "c_1": est.tail_constant_cn(1).c,
    }


def _load_f0(spec, n, N, seed):
    if spec == "ground":
        return basis.unit_expansion(n, N, (0,) * n)
    if spec == "random":
        return basis.random_expansion(n, N, np.random.default_rng(seed))
    with open(spec) as fh:
        return basis.HermiteExpansion.from_json(fh.read())


def _run_command(args):
    """Dispatch; returns (bundle, csv_payload, exit_code)."""
    command = args.command
    seed = args.seed if args.seed is not None else 0
    explicit_bits = args.precision_bits is not None
    bits = args.precision_bits
    if bits is None:
        bits = int(os.environ.get(ENV_PRECISION, "256"))
    # explicit --precision-bits forces the software-float pipeline; the
    # environment default only seeds the escalation start
    pipeline_bits = bits if explicit_bits else 53
    code = EXIT_OK
    csv_payload = None
    plot_series = {}

    if command == "basis":
        _default(args, "n", 1)
        _default(args, "N", "8")
        N = _single_N(args)
        idx = basis.multi_indices(args.n, N)
        result = {"n": args.n, "N": N, "dim": len(idx), "order": "grlex"}

    elif command == "gram":
        _default(args, "n", 1); _default(args, "N", "4"); _default(args, "region", "halfline")
        N = _single_N(args)
        region = parse_region(args.region, args.n, N)
        G = gram.gram_matrix(region, args.n, N)
        result = {
            "n": args.n, "N": N, "dim": G.size, "entry_error": G.entry_error,
            "region": region.to_json_dict(),
        }
        if G.size <= 32:
            result["matrix"] = [[float(v) for v in row] for row in G.matrix]
        header = ["row", "col", "value"]
        rows = [
            [i, j, float(G.matrix[i, j])]
            for i in range(G.size) for j in range(G.size)
        ]
        csv_payload = (header, rows)

    elif command == "constant":
        _default(args, "n", 1); _default(args, "N", "8"); _default(args, "region", "halfline")
        N = _single_N(args)
        region = parse_region(args.region, args.n, N)
        G = gram.gram_matrix(region, args.n, N)
        res = gram.spectral_constant(G, start_bits=max(bits, 128))
        result = {
            "n": args.n, "N": N, "C_N": res.c_value, "log_C_N": res.c_log,
            "lambda_min": res.lam_min, "lambda_min_log": res.lam_min_log,
            "precision_bits": res.precision_bits, "flag": res.flag,
            "region": region.to_json_dict(),
        }
        if res.flag != "ok":
            code = EXIT_PRECISION

    elif command == "scaling":
        _default(args, "n", 1); _default(args, "N", "4:16:4")
        _default(args, "region", "periodic:L=1,gamma=0.5")
        N_list = parse_int_range(str(args.N))
        region = parse_region(args.region, args.n, max(N_list))
        bound = None
        if args.variant == "open":
            gen = region.generator
            r = 1.0
            if gen.get("kind") == "explicit" and region.box_count == 1:
                r = float(region.highs[0, 0] - region.lows[0, 0]) / 2
            bound = gram.open_params(args.n, (0.0,) * args.n, r)
        elif args.variant == "density":
            bound = gram.density_params(args.n, rg.density_ratio(region, region.trunc_radius))
        elif args.variant == "thick":
            gen = region.generator
            bound = gram.thick_params(args.n, gen.get("L", 1.0), gen.get("gamma", 0.5))
        rep = gram.scaling_study(region, args.n, N_list, bound=bound,
                                 start_bits=max(bits, 128))
        header, rows = rep.csv_rows()
        csv_payload = (header, rows)
        result = {
            "rows": rep.rows, "fits": rep.fits, "best_model": rep.best_model,
            "exponent_p": rep.exponent_p, "dominance_ok": rep.dominance_ok,
            "bound_variant": rep.bound_variant, "aux_constants": rep.aux_constants,
            "region": region.to_json_dict(),
        }
        plot_series["logC_vs_sqrtN"] = (
            [math.sqrt(r["N"]) for r in rep.rows],
            [r["C_log"] for r in rep.rows],
        )
        if any(r["flag"] != "ok" for r in rep.rows):
            code = EXIT_PRECISION

    elif command == "bounds":
        _default(args, "n", 1); _default(args, "N", "4:16:4"); _default(args, "variant", "thick")
        N_list = parse_int_range(str(args.N))
        if args.variant == "open":
            params = gram.open_params(args.n, (args.x0,) * args.n, args.r)
        elif args.variant == "density":
            params = gram.density_params(args.n, args.delta, args.R0)
        else:
            params = gram.thick_params(args.n, args.L, args.gamma)
        rows = []
        for N in N_list:
            blog = gram.theoretical_bound_log(params, N)
            rows.append([
                N, args.variant,
                math.nan if blog is None else (math.exp(blog) if blog < 709 else math.inf),
                math.nan if blog is None else blog,
            ])
        csv_payload = (["N", "variant", "bound", "log_bound"], rows)
        result = {
            "variant": args.variant,
            "rows": [
                {"N": r[0], "bound": r[2], "log_bound": r[3]} for r in rows
            ],
        }

    elif command == "remez":
        _default(args, "n", 1)
        result = {"n": args.n, "d": args.d}
        if args.t is not None:
            result["interval_bound"] = est.remez_bound(
                args.n, args.d, args.t, complex_poly=args.complex_poly
            )
            result["t"] = args.t
        if args.rho is not None:
            result["ball_bound"] = est.remez_ball_bound(args.n, args.d, args.rho)
            result["rho"] = args.rho

    elif command == "bernstein":
        trials = args.trials or 100
        verdicts = [
            verify.suite_est_bernstein(seed=seed, trials=trials),
            verify.suite_est_weighted(seed=seed, trials=trials),
        ]
        result = {"verdicts": verdicts}
        if any(v["failures"] for v in verdicts):
            code = EXIT_CONTRACT

    elif command == "tails":
        if args.k is not None:
            if args.a is None:
                raise UsageError("tails with --k also needs --a")
            exact, bound = est.hermite_tail_bound(args.k, args.a)
            result = {"k": args.k, "a": args.a, "exact": exact, "bound": bound}
        else:
            _default(args, "n", 1)
            tc = est.tail_constant_cn(args.n)
            result = {
                "n": tc.n, "c_n": tc.c, "worst_case": tc.worst_case,
                "certificate": [[N, v] for N, v in tc.certificate],
            }

    elif command == "symbol":
        _default(args, "symbol", "harmonic")
        sym = qd.parse_symbol(args.symbol)
        F = qd.hamilton_map(sym)
        S = qd.singular_space(F)
        result = {
            "symbol": sym.to_json_dict(),
            "hamilton_re": F.re.tolist(),
            "hamilton_im": F.im.tolist(),
            "singular_dims": list(S.dims),
            "k0": S.k0,
            "singular_space_trivial": S.basis.shape[1] == 0,
            "tolerance_sensitive": S.tolerance_sensitive,
            "accretive": sym.real_part_psd,
        }

    elif command == "quantize":
        _default(args, "symbol", "harmonic"); _default(args, "N", "6")
        N = _single_N(args)
        sym = qd.parse_symbol(args.symbol)
        A = qd.weyl_quantize(sym, N)
        result = {
            "n": A.n, "N": N, "dim": A.size, "accretive": A.accretive,
            "norm_2": float(np.linalg.norm(A.matrix, 2)),
        }
        if A.size <= 16:
            result["matrix_re"] = A.matrix.real.tolist()
            result["matrix_im"] = A.matrix.imag.tolist()

    elif command == "evolve":
        _default(args, "symbol", "harmonic"); _default(args, "N", "8")
        N = _single_N(args)
        sym = qd.parse_symbol(args.symbol)
        A = qd.weyl_quantize(sym, N)
        f0 = _load_f0(args.f0, A.n, N, seed)
        ft = qd.evolve(A, f0, args.t)
        result = {
            "t": args.t, "initial_norm": f0.norm(), "final_norm": ft.norm(),
            "state": json.loads(ft.to_json()),
        }

    elif command == "observability":
        _default(args, "symbol", "harmonic"); _default(args, "N", "8")
        _default(args, "region", "full"); _default(args, "T", "1.0")
        N = _single_N(args)
        sym = qd.parse_symbol(args.symbol)
        A = qd.weyl_quantize(sym, N)
        region = parse_region(args.region, A.n, N)
        P = gram.gram_matrix(region, A.n, N).matrix
        T_list = parse_float_list(args.T)
        if len(T_list) == 1:
            rep = ct.observability_constant(
                ct.ControlProblem(A, P, T_list[0]), precision_bits=pipeline_bits
            )
            result = {
                "T": rep.T, "C_T": rep.c_value, "log_C_T": rep.c_log,
                "method": rep.method, "precision_bits": rep.precision_bits,
                "flag": rep.flag, "region": region.to_json_dict(),
            }
            csv_payload = (
                ["T", "C_T", "precision_bits", "method"],
                [[rep.T, rep.c_value, rep.precision_bits, rep.method]],
            )
            if rep.flag != "ok":
                code = EXIT_PRECISION
        else:
            k0 = args.k0
            if k0 is None:
                k0 = qd.singular_space(qd.hamilton_map(sym)).k0 or 0
            study = ct.cost_blowup_study(A, P, T_list, k0=k0)
            csv_payload = (
                ["T", "C_T", "precision_bits", "method"],
                [[r["T"], r["C_T"], r["precision_bits"], r["method"]] for r in study.rows],
            )
            result = {
                "rows": study.rows, "fits": {str(k): v for k, v in study.fits.items()},
                "k0": study.k0, "excluded": study.excluded,
                "region": region.to_json_dict(),
            }
            if study.excluded:
                code = EXIT_PRECISION

    elif command == "control":
        _default(args, "symbol", "harmonic"); _default(args, "N", "8")
        _default(args, "region", "full"); _default(args, "T", "1.0")
        N = _single_N(args)
        sym = qd.parse_symbol(args.symbol)
        A = qd.weyl_quantize(sym, N)
        region = parse_region(args.region, A.n, N)
        P = gram.gram_matrix(region, A.n, N).matrix
        T = parse_float_list(args.T)[0]
        problem = ct.ControlProblem(A, P, T)
        f0 = _load_f0(args.f0, A.n, N, seed)
        if args.staircase:
            res = ct.lr_staircase(problem, f0, target=args.target)
            csv_payload = (
                ["stage", "k_j", "stage_cost", "energy_after"],
                [[s["stage"], s["k_j"], s["stage_cost"], s["energy_after"]]
                 for s in res.stages],
            )
            result = {
                "method": "staircase", "residual": res.residual,
                "total_cost": res.total_cost, "stages": res.stages,
                "flag": res.flag, "region": region.to_json_dict(),
            }
            if res.flag != "ok":
                code = EXIT_CONTRACT
        else:
            res = ct.hum_control(problem, f0, precision_bits=pipeline_bits)
            result = {
                "method": "hum", "residual": res.residual, "cost": res.cost,
                "gramian_cond": res.gramian_cond,
                "precision_bits": res.precision_bits, "flag": res.flag,
                "region": region.to_json_dict(),
            }
            csv_payload = (
                ["T", "cost", "residual", "precision_bits"],
                [[T, res.cost, res.residual, res.precision_bits]],
            )

    elif command == "verify":
        names = None if args.suite in (None, "all") else args.suite.split(",")
        verdicts, ok = verify.run_suites(names, seed=seed, trials=args.trials)
        result = {"verdicts": verdicts, "all_passed": ok}
        csv_payload = (
            ["suite", "trials", "failures", "worst_margin", "seed"],
            [[v["suite"], v["trials"], v["failures"], v["worst_margin"], v["seed"]]
             for v in verdicts],
        )
        if not ok:
            code = EXIT_CONTRACT

    else:
        raise UsageError("missing or unknown subcommand")

    return result, csv_payload, plot_series, code, seed


def run(argv):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write("error: %s\n" % exc)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    warnings = []
    try:
        if args.config:
            config = load_config(args.config)
            warnings = _fill_from_config(args, config)
        if args.command is None:
            sys.stderr.write("error: no subcommand given\n")
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        result, csv_payload, plot_series, code, seed = _run_command(args)
    except UsageError as exc:
        sys.stderr.write("error: %s\n" % exc)
        return EXIT_USAGE
    except ContractViolation as exc:
        sys.stderr.write("contract violation: %s\n" % exc)
        return EXIT_CONTRACT
    except reporting.EmitError as exc:
        sys.stderr.write("io error: %s\n" % exc)
        return EXIT_IO

    for w in warnings:
        sys.stderr.write("warning: %s\n" % w)

    presentation = ("config", "out", "mkdirs", "plot_data", "quiet")
    config_view = {
        k: v for k, v in sorted(vars(args).items())
        if k not in presentation and v is not None
    }
    bundle = {
        "command": args.command,
        "result": result,
        "provenance": reporting.provenance(config_view, seed, _aux_defaults()),
    }
    text = json.dumps(reporting.sanitize(bundle), sort_keys=True, indent=2)
    if not getattr(args, "quiet", False):
        sys.stdout.write(text + "\n")
    try:
        if getattr(args, "out", None):
            reporting.write_json(args.out + ".json", bundle, mkdirs=args.mkdirs)
            if csv_payload is not None:
                reporting.write_csv(args.out + ".csv", csv_payload[0], csv_payload[1],
                                    mkdirs=args.mkdirs)
            if getattr(args, "plot_data", False):
                for name, (xs, ys) in plot_series.items():
                    reporting.write_xy_series(
                        "%s_%s.dat" % (args.out, name), xs, ys, mkdirs=args.mkdirs
                    )
    except reporting.EmitError as exc:
        sys.stderr.write("io error: %s\n" % exc)
        return EXIT_IO
    return code


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
