"""Command line entry point: ``loopy-spectra``.

Exit codes: 0 success, 1 threshold or convergence failure, 2 usage or
input error. Errors go to stderr as one JSON object per line.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import closed_form, generators, oracle
from .compare import compare, fmt, write_density_csv
from .errors import SpectraError
from .graph import load_network, loads_network, save_network
from .messages import SolveConfig, density_scan, make_grid


class UsageError(Exception):
    pass


def _fail(kind, message, code):
    print(json.dumps({"error": kind, "message": str(message)}), file=sys.stderr)
    return code


def _read_degrees(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        return generators.degrees_of(loads_network(text))
    try:
        return [int(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"{path}: degrees file must hold integers or a network JSON") from None


def cmd_generate(args):
    if args.model in (generators.REGULAR_ET, generators.POISSON_ET) and args.n is None:
        raise UsageError(f"--n is required for {args.model}")
    if args.model == generators.CONFIG_MODEL and args.degrees_file is None:
        raise UsageError("--degrees-file is required for config-model")
    if args.model == generators.REGULAR_ET:
        fg = generators.gen_regular_edge_triangle(args.n, args.seed)
    elif args.model == generators.POISSON_ET:
        fg = generators.gen_poisson_edge_triangle(args.n, args.mean_edges, args.mean_triangles,
                                                  args.seed)
    else:
        fg = generators.gen_configuration_model(_read_degrees(args.degrees_file), args.seed)
    save_network(fg, args.out)
    return 0


def cmd_mp(args):
    fg = load_network(args.net)
    cfg = SolveConfig(tol=args.tol, max_iter=args.max_iter, damping=args.damping,
                      warm_start=not args.no_warm_start)
    make_grid(args.xmin, args.xmax, args.dx)
    if not args.eta > 0:
        raise UsageError("--eta must be positive")
    res = density_scan(fg, args.xmin, args.xmax, args.dx, args.eta, cfg, backend=args.backend)
    write_density_csv(args.out, res.grid, res.rho, res.converged, res.iterations)
    bad = int((~res.converged).sum())
    if bad:
        return _fail("NotConverged", f"{bad} of {len(res.grid)} grid points did not converge", 1)
    return 0


def cmd_exact_regular(args):
    grid = make_grid(args.xmin, args.xmax, args.dx)
    if args.eta is None:
        rho = closed_form.rho_regular_real(grid)
    else:
        if not args.eta > 0:
            raise UsageError("--eta must be positive")
        rho = closed_form.rho_regular_complex(grid + 1j * args.eta).imag
    write_density_csv(args.out, grid, rho)
    if args.peaks_out:
        peaks = closed_form.peak_weights()
        with open(args.peaks_out, "w", encoding="utf-8") as fh:
            json.dump(peaks.to_dict(), fh, indent=2)
            fh.write("\n")
    return 0


def cmd_diag(args):
    fg = load_network(args.net)
    if not args.bins > 0:
        raise UsageError("--bins must be positive")
    report = oracle.diagonalize(fg, method=args.method, cap=args.cap, bin_width=args.bins)
    lam = report.eigenvalues
    if args.eta is not None:
        if not args.eta > 0:
            raise UsageError("--eta must be positive")
        xmin = args.xmin if args.xmin is not None else np.floor(lam[0] - 1.0)
        xmax = args.xmax if args.xmax is not None else np.ceil(lam[-1] + 1.0)
        grid = make_grid(xmin, xmax, args.dx)
        rho = oracle.smoothed_density(lam, grid, args.eta)
    else:
        edges = report.bin_edges
        grid = 0.5 * (edges[:-1] + edges[1:])
        rho = report.hist_density
    if args.out:
        write_density_csv(args.out, grid, rho)
    if args.eigs_out:
        with open(args.eigs_out, "w", encoding="utf-8", newline="\n") as fh:
            fh.writelines(fmt(v) + "\n" for v in lam)
    return 0


def cmd_compare(args):
    report = compare(args.a, args.b, args.metric)
    out = report.to_dict()
    out["value"] = float(fmt(report.value))
    print(json.dumps(out))
    if args.threshold is not None and not report.value < args.threshold:
        return 1
    return 0


def cmd_moments(args):
    if not 0 <= args.max_order <= oracle.MAX_WALK_ORDER:
        raise UsageError(f"--max-order must be in 0..{oracle.MAX_WALK_ORDER}")
    fg = load_network(args.net)
    for r, m in enumerate(oracle.trace_moments(fg, args.max_order)):
        print(f"{r} {fmt(m)}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="loopy-spectra",
                                description="Spectra of motif networks by message passing.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a random motif network")
    g.add_argument("--model", required=True, choices=generators.MODELS)
    g.add_argument("--n", type=int)
    g.add_argument("--mean-edges", type=float, default=2.0)
    g.add_argument("--mean-triangles", type=float, default=2.0)
    g.add_argument("--degrees-file")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("spectrum", help="compute a spectral density")
    ssub = s.add_subparsers(dest="method", required=True)

    mp = ssub.add_parser("mp", help="message passing on a network file")
    mp.add_argument("--net", required=True)
    mp.add_argument("--xmin", type=float, default=-4.0)
    mp.add_argument("--xmax", type=float, default=4.0)
    mp.add_argument("--dx", type=float, default=0.01)
    mp.add_argument("--eta", type=float, default=0.01)
    mp.add_argument("--tol", type=float, default=1e-10)
    mp.add_argument("--max-iter", type=int, default=100_000)
    mp.add_argument("--damping", type=float, default=0.0)
    mp.add_argument("--no-warm-start", action="store_true")
    mp.add_argument("--backend", choices=("numba", "numpy"))
    mp.add_argument("--out", required=True)
    mp.set_defaults(func=cmd_mp)

    ex = ssub.add_parser("exact-regular", help="closed form for the regular edge-triangle network")
    ex.add_argument("--xmin", type=float, default=-4.0)
    ex.add_argument("--xmax", type=float, default=4.0)
    ex.add_argument("--dx", type=float, default=0.01)
    ex.add_argument("--eta", type=float, help="broaden with Im rho(x + i eta) instead of the bare density")
    ex.add_argument("--out", required=True)
    ex.add_argument("--peaks-out")
    ex.set_defaults(func=cmd_exact_regular)

    dg = ssub.add_parser("diag", help="dense diagonalization")
    dg.add_argument("--net", required=True)
    dg.add_argument("--bins", type=float, default=0.1, help="histogram bin width")
    dg.add_argument("--eta", type=float, help="write a Lorentzian-smoothed density instead of the histogram")
    dg.add_argument("--xmin", type=float)
    dg.add_argument("--xmax", type=float)
    dg.add_argument("--dx", type=float, default=0.01)
    dg.add_argument("--method", choices=("lapack", "jacobi"), default="lapack")
    dg.add_argument("--cap", type=int, default=oracle.DEFAULT_CAP)
    dg.add_argument("--out")
    dg.add_argument("--eigs-out")
    dg.set_defaults(func=cmd_diag)

    c = sub.add_parser("compare", help="distance between two density CSV files")
    c.add_argument("a")
    c.add_argument("b")
    c.add_argument("--metric", choices=("L1", "Linf"), default="L1")
    c.add_argument("--threshold", type=float)
    c.set_defaults(func=cmd_compare)

    m = sub.add_parser("moments", help="trace moments Tr A^r / n")
    m.add_argument("--net", required=True)
    m.add_argument("--max-order", type=int, required=True)
    m.set_defaults(func=cmd_moments)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        return _fail("UsageError", exc, 2)
    except (SpectraError, ValueError, TypeError, OSError) as exc:
        return _fail(type(exc).__name__, exc, 2)


if __name__ == "__main__":
    sys.exit(main())
