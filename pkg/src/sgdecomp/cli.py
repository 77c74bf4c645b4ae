"""``decomp`` command line: svd, lu, verify and bench subcommands."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .bench import SpectrumSpec, dft_sandwich_operator, emit_report, load_config, run_experiment, synth_matrix
from .conservation import ConservationConfig, TailReport, max_singval_tail
from .io import load_matrix
from .rlu import RluParams, lu_frobenius_residual, randomized_lu
from .rsvd import RsvdParams, frobenius_residual, randomized_svd
from .sketch import RNG_ID


def _number(text: str):
    try:
        return int(text)
    except ValueError:
        return float(text)


def parse_spectrum(text: str, length: int) -> SpectrumSpec:
    """``kind[:key=value,...]``, e.g. ``step:plateau_rank=30``."""
    kind, _, rest = text.partition(":")
    options = {}
    for item in filter(None, rest.split(",")):
        key, _, value = item.partition("=")
        options[key.strip()] = _number(value.strip())
    return SpectrumSpec.create(kind.strip(), length, **options)


def _shape(text: str) -> tuple[int, int]:
    m, _, n = text.lower().partition("x")
    return int(m), int(n or m)


def _load_input(args):
    if args.input:
        A = load_matrix(args.input)
        return A, {"input": str(args.input), "shape": list(A.shape)}
    m, n = _shape(args.shape)
    spectrum = parse_spectrum(args.synth, min(m, n))
    desc = {"synth": spectrum.to_dict(), "shape": [m, n], "matrix_free": args.matrix_free}
    if args.matrix_free:
        if m != n:
            raise SystemExit("--matrix-free needs a square --shape")
        return dft_sandwich_operator(n, spectrum), desc
    A, _ = synth_matrix(m, n, spectrum, args.seed)
    return A, desc


def _emit(args, payload: dict, rows: list[list] | None, name: str):
    text = json.dumps(payload, indent=2, default=str)
    if args.out is None:
        if args.format == "csv" and rows is not None:
            csv.writer(sys.stdout).writerows(rows)
        else:
            print(text)
        return
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.format == "csv" and rows is not None:
        path = out / f"{name}.csv"
        with open(path, "w", newline="") as fh:
            csv.writer(fh).writerows(rows)
    else:
        path = out / f"{name}.json"
        path.write_text(text)
    print(path)


def cmd_svd(args):
    A, desc = _load_input(args)
    params = RsvdParams(r=args.rank, k1=args.k1, k2=args.k2, l=args.l, p1=args.p, p2=args.p,
                        seed=args.seed, sketch=args.sketch)
    f = randomized_svd(A, params, residual_iters=args.power_iters)
    payload = {"matrix": desc, "rng": RNG_ID, **f.to_dict(),
               "residual_frobenius": frobenius_residual(A, f.U, f.s, f.V)}
    rows = [["index", "singular_value"]] + [[i, repr(float(v))] for i, v in enumerate(f.s)]
    _emit(args, payload, rows, "svd")


def cmd_lu(args):
    A, desc = _load_input(args)
    params = RluParams(k=args.k1, p=args.p, seed=args.seed, sketch=args.sketch)
    f = randomized_lu(A, args.rank, params, residual_iters=args.power_iters)
    payload = {"matrix": desc, "rng": RNG_ID, **f.to_dict(),
               "residual_frobenius": lu_frobenius_residual(A, f)}
    rows = [["key", "value"], ["residual_spectral", f.residual]] + [[k, v] for k, v in f.diagnostics().items()]
    _emit(args, payload, rows, "lu")


def cmd_verify(args):
    cfg = ConservationConfig(n=args.n, r=args.r, k=args.k, p=args.p, trials=args.trials, seed=args.seed)
    high = max_singval_tail(cfg, args.t)
    low = TailReport(cfg, args.threshold, "min", high.smin, high.smax)
    payload = {"rng": RNG_ID, "min_tail": low.to_dict(), "max_tail": high.to_dict()}
    if args.out is not None and args.format == "csv":
        Path(args.out).mkdir(parents=True, exist_ok=True)
        path = Path(args.out) / "verify_trials.csv"
        high.to_csv(path)
        print(path)
        return
    _emit(args, payload, None, "verify")


def cmd_bench(args):
    config = load_config(args.config)
    failures = []
    records = list(run_experiment(config, failures))
    out = args.out or config.get("output", "bench-out")
    if not records:
        print(json.dumps({"failures": failures}, indent=2))
        raise SystemExit(1)
    for path in emit_report(records, out, config, failures):
        print(path)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="decomp", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def shared(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None, help="output directory (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="json")

    for name, fn in (("svd", cmd_svd), ("lu", cmd_lu)):
        p = sub.add_parser(name, help=f"randomized {name.upper()} of a matrix")
        shared(p)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--input", help="matrix file (.mtx, .bin, or dense text)")
        src.add_argument("--synth", help="spectrum spec, e.g. exp-decay or step:plateau_rank=30")
        p.add_argument("--shape", default="500x500", help="MxN for --synth")
        p.add_argument("--matrix-free", action="store_true", help="use the DFT sandwich operator for --synth")
        p.add_argument("--rank", type=int, required=True)
        p.add_argument("--k1", type=int, help="first sketch size (sketch size k for lu)")
        p.add_argument("--k2", type=int)
        p.add_argument("--l", type=int)
        p.add_argument("--p", type=float, help="sketch density")
        p.add_argument("--sketch", default="sparse-subgaussian",
                       choices=("sparse-subgaussian", "gaussian", "countsketch", "srft"))
        p.add_argument("--power-iters", type=int, default=100)
        p.set_defaults(func=fn)

    p = sub.add_parser("verify", help="Monte-Carlo subspace conservation tails")
    shared(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--threshold", type=float, default=0.1, help="lower tail: sigma_min <= threshold*sqrt(k)")
    p.add_argument("--t", type=float, default=3.0, help="upper tail: sigma_max > t*sqrt(k)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="run an experiment grid from a JSON config")
    shared(p)
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    args.func(args)


if __name__ == "__main__":
    main()
