"""Command-line front end.

Results go to stdout as JSON (default), ``key,value`` CSV or plain text;
diagnostics go to stderr. Exit status is 0 on success, 2 for bad input and
3 when the SDP solver does not certify its answer (the best iterate is still
printed).
"""

import argparse
import contextlib
import csv
import json
import math
import sys

import numpy as np

from . import __version__
from .bloch import (
    conjugate_pair_dmax,
    conjugate_pair_states,
    monte_carlo_sample,
    region_volume_fraction,
)
from .errors import MaxFdivError, NoConvergence
from .fdiv import as_prob, f_divergence, lemma1_check, parse_function
from .matcore import matrix_from_json, matrix_to_json
from .qdiv import dmax_operator_convex, measurement_gap_scan, trace_distance
from .tvmax import (
    dmax_tv_pure,
    dmax_tv_sdp,
    reversibility_check,
    sufficient_anticommutator,
    sufficient_close,
)

EXIT_OK, EXIT_INPUT, EXIT_SOLVER = 0, 2, 3
DIGITS = 12
PURE_AGREEMENT = 1e-7
PAIR_AGREEMENT = 1e-6


class InputError(Exception):
    """Bad command-line input (unreadable file, malformed vector, ...)."""


def fmt(x):
    """Round a scalar to 12 significant digits; non-finite values become strings."""
    x = float(x)
    if not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return float(f"{x:.{DIGITS}g}")


def parse_vector(text):
    """Comma-separated numbers; ``re:im`` marks a complex entry."""
    out = []
    for item in text.split(","):
        item = item.strip()
        try:
            if ":" in item:
                re, im = item.split(":", 1)
                out.append(complex(float(re), float(im)))
            else:
                out.append(float(item))
        except ValueError:
            raise InputError(f"cannot parse vector entry {item!r}") from None
    if not out:
        raise InputError("empty vector")
    return np.array(out)


def read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from None


def read_matrix(path):
    return matrix_from_json(read_json(path))


def _real_vector(text):
    v = parse_vector(text)
    if np.iscomplexobj(v):
        raise InputError("probability vectors must be real")
    return v


def _sdp_json(res):
    return {
        "value": fmt(res.value),
        "gap": fmt(res.gap),
        "iterations": res.iterations,
        "reduced_dim": res.reduced_dim,
        "converged": res.converged,
        "A": matrix_to_json(res.A_opt),
        "Y": matrix_to_json(res.dual_Y),
        "Z": matrix_to_json(res.dual_Z),
    }


def cmd_fdiv(args):
    f = parse_function(args.f)
    p, q = as_prob(_real_vector(args.p)), as_prob(_real_vector(args.q))
    return {"f": f.name, "divergence": fmt(f_divergence(p, q, f))}


def cmd_qmax(args):
    f = parse_function(args.f)
    value = dmax_operator_convex(read_matrix(args.rho), read_matrix(args.sigma), f)
    return {"f": f.name, "dmax": fmt(value)}


def cmd_tv_sdp(args):
    return _sdp_json(dmax_tv_sdp(read_matrix(args.rho), read_matrix(args.sigma), tol=args.tol))


def cmd_reversibility(args):
    rho, sigma = read_matrix(args.rho), read_matrix(args.sigma)
    rep = reversibility_check(rho, sigma)
    return {
        "reversible": rep.reversible,
        "boundary": rep.boundary,
        "min_eig_A": fmt(rep.min_eig_A),
        "trace_distance": fmt(rep.tv),
        "sufficient_close": sufficient_close(rho, sigma),
        "sufficient_anticommutator": sufficient_anticommutator(rho, sigma),
        "A": matrix_to_json(rep.A),
        "delta1": matrix_to_json(rep.delta1),
        "delta2": matrix_to_json(rep.delta2),
    }


def cmd_pure(args):
    rho = read_matrix(args.rho)
    psi = parse_vector(args.psi).astype(np.complex128)
    closed = dmax_tv_pure(rho, psi)
    psi = psi / np.linalg.norm(psi)
    res = dmax_tv_sdp(rho, np.outer(psi, psi.conj()), tol=args.tol)
    return {
        "dmax": fmt(closed),
        "sdp": fmt(res.value),
        "sdp_gap": fmt(res.gap),
        "agreement": abs(closed - res.value) <= PURE_AGREEMENT,
        "agreement_tol": PURE_AGREEMENT,
    }


def cmd_conjugate_pair(args):
    c = complex(args.c_re, args.c_im)
    closed = conjugate_pair_dmax(args.a, args.b, c)
    rho, sigma = conjugate_pair_states(args.a, args.b, c)
    res = dmax_tv_sdp(rho, sigma, tol=args.tol)
    return {
        "dmax": fmt(closed.dmax),
        "case": closed.case,
        "A_opt": matrix_to_json(closed.A_opt),
        "trace_distance": fmt(trace_distance(rho, sigma)),
        "sdp": fmt(res.value),
        "sdp_gap": fmt(res.gap),
        "agreement": abs(closed.dmax - res.value) <= PAIR_AGREEMENT,
        "agreement_tol": PAIR_AGREEMENT,
    }


def cmd_qubit_region(args):
    v = _real_vector(args.bloch)
    if v.size != 3:
        raise InputError("--bloch needs three components x,y,z")
    out = {"bloch": [fmt(x) for x in v], "fraction": fmt(region_volume_fraction(v))}
    if args.samples is not None:
        mc = monte_carlo_sample(v, args.samples, args.seed)
        frac = mc.fraction
        out.update(
            monte_carlo=fmt(frac),
            samples=args.samples,
            seed=args.seed,
            binomial_sigma=fmt(math.sqrt(frac * (1.0 - frac) / args.samples)),
        )
        if args.csv:
            try:
                with open(args.csv, "w", newline="", encoding="utf-8") as fh:
                    w = csv.writer(fh, lineterminator="\n")
                    w.writerow(["sample_index", "x", "y", "z", "s_value", "member"])
                    for i, x, y, z, s, m in mc.csv_rows():
                        w.writerow([i, repr(x), repr(y), repr(z), repr(s), m])
            except OSError as exc:
                raise InputError(f"{args.csv}: {exc}") from None
            out["csv"] = args.csv
    elif args.csv:
        raise InputError("--csv requires --samples")
    return out


def cmd_gap_scan(args):
    f = parse_function(args.f)
    rep = measurement_gap_scan(read_matrix(args.rho), read_matrix(args.sigma), f, args.grid)
    return {
        "f": f.name,
        "dmax": fmt(rep.dmax),
        "best_measured": fmt(rep.best_measured),
        "gap": fmt(rep.gap),
        "grid_size": rep.grid_size,
        "commuting": rep.commuting,
        "best_measurement": {"elements": [matrix_to_json(m) for m in rep.best_measurement.elements]},
    }


def cmd_lemma1(args):
    f = parse_function(args.f)
    channel = np.asarray(read_json(args.channel), dtype=np.float64)
    rep = lemma1_check(_real_vector(args.p), _real_vector(args.q), channel, f)
    return {
        "f": f.name,
        "divergence_in": fmt(rep.divergence_in),
        "divergence_out": fmt(rep.divergence_out),
        "divergence_preserved": rep.divergence_preserved,
        "block_condition_holds": rep.block_condition_holds,
        "implication_holds": rep.implication_holds,
        "violations": [list(v) for v in rep.violations],
    }


def _positive(text):
    value = float(text)
    if not value > 0.0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _seed(text):
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=_positive, default=1e-8, help="SDP duality-gap target")
    common.add_argument("--seed", type=_seed, default=0)
    common.add_argument("--output", choices=("json", "csv", "plain"), default="json")

    parser = argparse.ArgumentParser(prog="maxfdiv", description="Maximal f-divergence toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=func)
        return p

    p = add("fdiv", cmd_fdiv, "classical f-divergence")
    p.add_argument("--f", required=True)
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)

    p = add("qmax", cmd_qmax, "closed-form maximal f-divergence (operator-convex f)")
    p.add_argument("--f", required=True)
    p.add_argument("--rho", required=True)
    p.add_argument("--sigma", required=True)

    p = add("tv-sdp", cmd_tv_sdp, "maximal total variation by SDP")
    p.add_argument("--rho", required=True)
    p.add_argument("--sigma", required=True)

    p = add("reversibility", cmd_reversibility, "reversibility of the trace distance")
    p.add_argument("--rho", required=True)
    p.add_argument("--sigma", required=True)

    p = add("pure", cmd_pure, "closed form against a pure state, with SDP cross-check")
    p.add_argument("--rho", required=True)
    p.add_argument("--psi", required=True)

    p = add("conjugate-pair", cmd_conjugate_pair, "closed form for the conjugate qubit pair")
    p.add_argument("-a", type=float, required=True)
    p.add_argument("-b", type=float, required=True)
    p.add_argument("--c-re", type=float, required=True)
    p.add_argument("--c-im", type=float, default=0.0)

    p = add("qubit-region", cmd_qubit_region, "volume of the qubit reversibility region")
    p.add_argument("--bloch", required=True)
    p.add_argument("--samples", type=_positive_int)
    p.add_argument("--csv")

    p = add("gap-scan", cmd_gap_scan, "best qubit measurement versus the maximal divergence")
    p.add_argument("--rho", required=True)
    p.add_argument("--sigma", required=True)
    p.add_argument("--f", default="kl")
    p.add_argument("--grid", type=_positive_int, default=100)

    p = add("lemma1", cmd_lemma1, "ratio-block structure of divergence-preserving channels")
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--channel", required=True)
    p.add_argument("--f", default="kl")
    return parser


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}{k}.")
    elif isinstance(obj, list):
        yield prefix[:-1], json.dumps(obj)
    else:
        yield prefix[:-1], obj


def emit(result, output, stream):
    if output == "json":
        stream.write(json.dumps(result, sort_keys=False) + "\n")
        return
    rows = list(_flatten(result))
    if output == "csv":
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["key", "value"])
        w.writerows(rows)
    else:
        for k, v in rows:
            stream.write(f"{k}: {v}\n")


def main(argv=None, stdout=None, stderr=None):
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    header = {"command": args.command, "tol": args.tol, "seed": args.seed}
    try:
        result = args.func(args)
    except NoConvergence as exc:
        stderr.write(f"maxfdiv: {exc}\n")
        if exc.result is not None:
            emit({**header, **_sdp_json(exc.result)}, args.output, stdout)
        return EXIT_SOLVER
    except (InputError, MaxFdivError, ValueError) as exc:
        stderr.write(f"maxfdiv: {type(exc).__name__}: {exc}\n")
        return EXIT_INPUT
    emit({**header, **result}, args.output, stdout)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
