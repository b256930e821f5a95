"""Command-line front end.

Exit codes: 0 success, 1 a ``fail`` verdict (PSD witness found, vector not a
member, diagnostics out of tolerance), 2 malformed input or usage.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
import warnings

import numpy as np

from . import __version__
from .errors import RkhsError
from .kernels import KernelSpec, check_positive_type, gram
from .measure import DiscreteMeasure
from .mercer import (MercerDecomposition, decompose, membership_test, reconstruct_kernel,
                     rkhs_norm_spectral, spectral_projector)
from .operator import (CarrierMap, carleman_report, factorization_tolerance, hs_diagnostic,
                       opnorm_estimate, verify_factorization)
from .serialization import decode_array, dumps, encode_array, read_json, write_atomic

COMMANDS = ("gram", "check-psd", "mercer", "diagnose", "norm", "member", "reconstruct", "projector")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise RkhsError("usage", message.replace("\n", " "))


def _rank_tol(text):
    val = float(text)
    if not 0 < val < 1:
        raise argparse.ArgumentTypeError("rank-tol must lie in (0, 1)")
    return val


def _seed(text):
    val = int(text)
    if not 0 <= val < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return val


def _p_value(text):
    return text if text.strip().lower() in ("inf", "infinity") else str(float(text))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rkhsmercer", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_, kernel=True, measure=True, dec=False, vector=False):
        p = sub.add_parser(name, help=help_)
        if dec:
            p.add_argument("--decomposition", help="decomposition JSON written by 'mercer'")
        p.add_argument("--kernel", required=kernel and not dec, help="kernel JSON")
        if measure:
            p.add_argument("--measure", required=not dec, help="measure JSON or CSV")
        if vector:
            p.add_argument("--vector", required=True, help="node values: JSON list or {'values': [...]}")
        p.add_argument("--rank-tol", type=_rank_tol, default=1e-12)
        p.add_argument("-o", "--output", help="write the machine artifact here")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--seed", type=_seed, default=0)
        return p

    add("gram", "Gram matrix of the kernel at the measure nodes")
    p = add("check-psd", "randomized positive-type check", measure=False)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--size", type=int, default=8)
    p.add_argument("--tol", type=float, default=1e-10)
    add("mercer", "Mercer decomposition of the integral operator")
    p = add("diagnose", "trace, factorization, operator-norm and Carleman diagnostics")
    p.add_argument("--p", type=_p_value, default="2")
    p.add_argument("--q", type=_p_value, default="2")
    p.add_argument("--trials", type=int, default=1000)
    add("norm", "spectral RKHS norm of a node-value vector", kernel=False, dec=True, vector=True)
    p = add("member", "RKHS membership test", kernel=False, dec=True, vector=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p = add("reconstruct", "truncated Mercer reconstruction of the kernel", kernel=False, dec=True)
    p.add_argument("--rank", type=int, default=None, help="number of modes (default: full rank)")
    p = add("projector", "spectral projector for eigenvalues in (a, b]", kernel=False, dec=True)
    p.add_argument("--interval", type=float, nargs=2, metavar=("A", "B"), required=True)
    return parser


# -- loading

def load_kernel(path) -> KernelSpec:
    return KernelSpec.from_dict(read_json(path))


def load_measure(path) -> DiscreteMeasure:
    if str(path).lower().endswith(".csv"):
        try:
            with open(path, encoding="utf-8") as fh:
                return DiscreteMeasure.from_csv(fh.read())
        except OSError as exc:
            raise RkhsError("io", f"{path}: {exc.strerror}") from None
    return DiscreteMeasure.from_dict(read_json(path))


def load_vector(path) -> np.ndarray:
    data = read_json(path)
    if isinstance(data, dict):
        if "values" not in data:
            raise RkhsError("invalid-vector", "vector JSON needs a 'values' field")
        data = data["values"]
    return decode_array(data, 1)


def _decomposition(args) -> tuple[MercerDecomposition, KernelSpec | None]:
    kernel = load_kernel(args.kernel) if args.kernel else None
    if args.decomposition:
        return MercerDecomposition.from_dict(read_json(args.decomposition)), kernel
    if kernel is None or not args.measure:
        raise RkhsError("usage", "need --decomposition or both --kernel and --measure")
    return decompose(kernel, load_measure(args.measure), args.rank_tol), kernel


# -- output

def _matrix_csv(matrix) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in np.asarray(matrix):
        writer.writerow([repr(complex(v)) if np.iscomplexobj(v) else repr(float(v)) for v in row])
    return buf.getvalue()


def eigenfunctions_csv(dec: MercerDecomposition) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    d = dec.measure.dim
    writer.writerow(["node_index"] + [f"x{k}" for k in range(d)]
                    + [f"phi_{n + 1}" for n in range(dec.rank)])
    fmt = (lambda v: repr(complex(v))) if np.iscomplexobj(dec.eigenfunctions) else (lambda v: repr(float(v)))
    for i, node in enumerate(dec.measure.nodes):
        writer.writerow([i] + [repr(float(c)) for c in node]
                        + [fmt(dec.eigenfunctions[n, i]) for n in range(dec.rank)])
    return buf.getvalue()


def _emit(args, payload: dict, summary: str, csv_text=None):
    if args.format == "csv" and csv_text is None:
        raise RkhsError("usage", f"--format csv is not available for '{args.command}'")
    text = csv_text if args.format == "csv" else dumps(payload)
    if args.output:
        write_atomic(args.output, text)
        print(summary)
    else:
        sys.stdout.write(text)


# -- commands

def cmd_gram(args):
    kernel, mu = load_kernel(args.kernel), load_measure(args.measure)
    G = gram(kernel, mu.nodes)
    _emit(args, G.to_dict(), f"gram: {len(mu)} x {len(mu)}", _matrix_csv(G.entries))
    return 0


def cmd_check_psd(args):
    kernel = load_kernel(args.kernel)
    report = check_positive_type(kernel, subset_size=args.size, trials=args.trials,
                                 tol=args.tol, seed=args.seed)
    lines = [f"check-psd: {report.verdict} ({report.reason}); {report.trials} trials of size "
             f"{report.subset_size}, worst relative eigenvalue {report.worst_relative_eigenvalue:.6g}"]
    if report.witness_coefficients is not None:
        lines.append(f"witness points: {report.witness_points.tolist()}")
        lines.append(f"witness coefficients: {encode_array(report.witness_coefficients)}")
        lines.append(f"witness quadratic form: {report.witness_quadratic_form!r}")
    summary = "\n".join(lines)
    if args.output:
        write_atomic(args.output, dumps(report.to_dict()))
        print(summary)
    else:
        print(summary)
        sys.stdout.write(dumps(report.to_dict()))
    return 0 if report.passed else 1


def cmd_mercer(args):
    kernel, mu = load_kernel(args.kernel), load_measure(args.measure)
    dec = decompose(kernel, mu, args.rank_tol)
    summary = (f"mercer: {len(mu)} nodes, rank {dec.rank}, top eigenvalues "
               f"{[float(v) for v in dec.eigenvalues[:5]]}")
    _emit(args, dec.to_dict(), summary, eigenfunctions_csv(dec))
    return 0


def cmd_diagnose(args):
    kernel, mu = load_kernel(args.kernel), load_measure(args.measure)
    cm = CarrierMap.build(kernel, mu)
    hs = hs_diagnostic(cm)
    fact = verify_factorization(cm)
    fact_tol = factorization_tolerance(cm)
    opn = opnorm_estimate(cm.operator(), args.p, trials=args.trials, seed=args.seed)
    carl = carleman_report(cm, args.q)
    ok = fact <= fact_tol and hs.rel_defect <= 1e-10 and opn.lower <= opn.upper * (1 + 1e-12)
    payload = hs.to_dict()
    payload.update({
        "factorization_defect": fact,
        "factorization_tol": fact_tol,
        "opnorm": opn.to_dict(),
        "carleman": {"q": carl.to_dict()["q"], "max_row_norm": carl.max_row_norm},
        "verdict": "pass" if ok else "fail",
    })
    summary = (f"diagnose: {payload['verdict']}; trace_diag {hs.trace_diag!r}, eigen_sum "
               f"{hs.eigen_sum!r}, factorization defect {fact:.3g}, opnorm(p={args.p}) "
               f"[{opn.lower!r}, {opn.upper!r}]")
    _emit(args, payload, summary)
    return 0 if ok else 1


def cmd_norm(args):
    dec, _ = _decomposition(args)
    res = rkhs_norm_spectral(dec, load_vector(args.vector))
    _emit(args, res.to_dict(), f"norm: norm_sq {res.norm_sq!r}, residual {res.residual!r}")
    return 0


def cmd_member(args):
    dec, _ = _decomposition(args)
    res = membership_test(dec, load_vector(args.vector), tol=args.tol)
    _emit(args, res.to_dict(), f"member: {res.member}; residual {res.residual!r}, "
                               f"norm_sq {res.norm_sq!r}")
    return 0 if res.member else 1


def cmd_reconstruct(args):
    dec, kernel = _decomposition(args)
    r = dec.rank if args.rank is None else args.rank
    K = reconstruct_kernel(dec, r)
    payload = {"rank": r, "kernel": encode_array(K)}
    summary = f"reconstruct: {r} modes"
    if kernel is not None:
        defect = float(np.max(np.abs(K - gram(kernel, dec.measure.nodes).entries)))
        payload["max_abs_defect"] = defect
        summary += f", max-abs defect vs Gram {defect:.3g}"
    _emit(args, payload, summary, _matrix_csv(K))
    return 0


def cmd_projector(args):
    dec, _ = _decomposition(args)
    proj = spectral_projector(dec, args.interval)
    payload = proj.to_dict()
    payload["interval"] = list(args.interval)
    _emit(args, payload, f"projector: {proj.basis_size} modes in ({args.interval[0]}, "
                         f"{args.interval[1]}]", _matrix_csv(proj.projector))
    return 0


HANDLERS = {
    "gram": cmd_gram, "check-psd": cmd_check_psd, "mercer": cmd_mercer,
    "diagnose": cmd_diagnose, "norm": cmd_norm, "member": cmd_member,
    "reconstruct": cmd_reconstruct, "projector": cmd_projector,
}


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return HANDLERS[args.command](args)
    except RkhsError as exc:
        detail = exc.detail.replace("\n", " ")
        print(f"error: {exc.code}: {detail}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: invalid-input: {str(exc).splitlines()[0] if str(exc) else type(exc).__name__}",
              file=sys.stderr)
        return 2


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
