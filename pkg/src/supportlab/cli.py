"""Command-line harness: ``supportlab {solve,ordering-compare,joshi-sweep,vaidya-sweep,mm-convert}``.

Every table is CSV with a header row and LF line endings. Random solution
vectors come from numpy's PCG64 generator seeded with ``--seed`` and are drawn
uniformly from [0, 1); the right-hand side is ``b = A x``.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import io as tio
from .cholesky import sparse_cholesky
from .estimators import make_ordering
from .graph import graph_to_laplacian, laplacian_to_graph
from .krylov import ChebyParams, chebyshev_solve, minres, minres_precond_split
from .ordering import NotAForestError
from .precond import build_precond, parse_precond_spec, support_graph
from .sparse import (
    InvalidSpecError,
    MeshSpec,
    mesh_laplacian,
    matvec,
    permute_sym,
    read_matrix_market,
    write_matrix_market,
)

SOLVERS = ("direct", "minres", "minres+precond", "chebyshev")
ORDERINGS = ("natural", "nd", "md", "tree")


class ConfigError(ValueError):
    pass


def parse_mesh(text: str) -> MeshSpec:
    """``NX[,NY[,NZ]]``; a single extent means a square 2D mesh."""
    parts = [p for p in text.replace("x", ",").split(",") if p]
    try:
        dims = tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad mesh {text!r}; expected NX[,NY[,NZ]]") from None
    if len(dims) == 1:
        dims = dims * 2
    try:
        return MeshSpec(dims)
    except InvalidSpecError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _mesh_label(spec: MeshSpec) -> str:
    return "x".join(str(d) for d in spec.dims)


def _rhs(A, seed: int) -> np.ndarray:
    x = np.random.default_rng(seed).random(A.n)
    return matvec(A, x)


def _relres(A, x, b) -> float:
    return float(np.linalg.norm(b - matvec(A, x)) / np.linalg.norm(b))


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# subcommands -------------------------------------------------------------------------


def cmd_solve(args) -> str:
    spec = args.mesh
    A = mesh_laplacian(spec)
    b = _rhs(A, args.seed)
    kind, param = parse_precond_spec(args.precond)
    max_iter = args.max_iter if args.max_iter is not None else 10 * A.n
    if args.solver != "minres+precond" and kind != "none":
        raise ConfigError(f"--precond {args.precond} requires --solver minres+precond")
    if args.solver == "minres+precond" and kind == "none":
        raise ConfigError("--solver minres+precond needs --precond joshi:K, msf or vaidya:T")
    if args.solver in ("minres", "chebyshev") and args.ordering not in (None, "natural"):
        raise ConfigError(f"--ordering has no effect on --solver {args.solver}")

    start = time.perf_counter()
    nnz_l = flops = iterations = 0
    history = None
    if args.solver == "direct":
        try:
            P = make_ordering(args.ordering or "natural", A, spec)
        except NotAForestError:
            raise ConfigError("tree ordering requires a forest; the mesh has cycles") from None
        F = sparse_cholesky(permute_sym(A, P))
        x = P.unapply(F.solve(P.apply(b)))
        nnz_l, flops = F.fill, F.flops
    elif args.solver == "minres":
        x, rep = minres(A, b, args.tol, max_iter)
        iterations, history = rep.iterations, rep
    elif args.solver == "chebyshev":
        ev = np.linalg.eigvalsh(A.to_dense()) if A.n <= 4000 else None
        if ev is None:
            raise ConfigError("chebyshev needs the eigenvalue interval; mesh too large for the dense estimate")
        x, rep = chebyshev_solve(A, b, ChebyParams(float(ev[0]), float(ev[-1])), max_iter, args.tol)
        iterations, history = rep.iterations, rep
    else:
        G_B = support_graph(kind, param, A, spec)
        order = None
        if args.ordering is not None:
            try:
                order = make_ordering(args.ordering, graph_to_laplacian(G_B), spec)
            except NotAForestError:
                raise ConfigError("tree ordering requires a forest preconditioner") from None
        pc = build_precond(G_B, A, order)
        x, rep = minres_precond_split(A, pc.factor, b, args.tol, max_iter, order=pc.order)
        iterations, history = rep.iterations, rep
        nnz_l, flops = pc.factor.fill, pc.factor.flops
    seconds = time.perf_counter() - start

    if args.history and history is not None:
        _emit(tio.residual_csv(history), args.history)
    header = ["mesh", "n", "nnzA", "nnzL", "flops", "solver", "ordering", "precond", "iterations", "relres"]
    row = [_mesh_label(spec), A.n, A.nnz_lower, nnz_l, flops, args.solver, args.ordering or "natural",
           args.precond, iterations, _relres(A, x, b)]
    if args.timing:
        header.append("seconds")
        row.append(round(seconds, 6))
    return tio.write_csv(header, [row])


def cmd_ordering_compare(args) -> str:
    meshes = args.mesh or [MeshSpec((15, 15)), MeshSpec((31, 31)), MeshSpec((63, 63))]
    header = ["mesh", "n", "ordering", "nnzL", "flops"]
    if args.timing:
        header.append("seconds")
    rows = []
    for spec in meshes:
        A = mesh_laplacian(spec)
        for name in args.orderings:
            start = time.perf_counter()
            P = make_ordering(name, A, spec)
            F = sparse_cholesky(permute_sym(A, P))
            row = [_mesh_label(spec), A.n, name, F.fill, F.flops]
            if args.timing:
                row.append(round(time.perf_counter() - start, 6))
            rows.append(row)
    return tio.write_csv(header, rows)


def _sweep(args, label: str, values, make_graph) -> str:
    spec = args.mesh
    A = mesh_laplacian(spec)
    b = _rhs(A, args.seed)
    max_iter = args.max_iter if args.max_iter is not None else 10 * A.n
    nnz_full = A.nnz
    header = [label, "edges", "nnzL", "iterations", "relres", "factor_flops", "iter_flops"]
    if args.timing:
        header.append("build_seconds")
    rows = []
    for v in values:
        start = time.perf_counter()
        pc = build_precond(make_graph(A, spec, v), A)
        built = time.perf_counter() - start
        x, rep = minres_precond_split(A, pc.factor, b, args.tol, max_iter, order=pc.order)
        # one product with A and two triangular solves per iteration
        iter_flops = rep.iterations * (2 * nnz_full + 4 * pc.factor.fill)
        row = [v, pc.graph.m, pc.factor.fill, rep.iterations, _relres(A, x, b), pc.factor.flops, iter_flops]
        if args.timing:
            row.append(round(built, 6))
        rows.append(row)
    return tio.write_csv(header, rows)


def cmd_joshi_sweep(args) -> str:
    return _sweep(args, "k", args.ks, lambda A, spec, k: support_graph("joshi", k, A, spec))


def cmd_vaidya_sweep(args) -> str:
    return _sweep(args, "t", args.ts, lambda A, spec, t: support_graph("vaidya", t, A, spec))


def cmd_mm_convert(args) -> str:
    if (args.mesh is None) == (args.input is None):
        raise ConfigError("give exactly one of --mesh or --in")
    if args.mesh is not None:
        A = mesh_laplacian(args.mesh)
    else:
        with open(args.input, encoding="utf-8") as fh:
            A = read_matrix_market(fh.read())
    if args.format == "mm":
        return write_matrix_market(A)
    return tio.write_edge_list(laplacian_to_graph(A))


# argument parsing --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="supportlab", description="Sparse direct and support-preconditioned iterative solvers on mesh Laplacians.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, mesh_required=True):
        p.add_argument("--mesh", type=parse_mesh, required=mesh_required, metavar="NX[,NY[,NZ]]")
        p.add_argument("--tol", type=float, default=1e-6)
        p.add_argument("--max-iter", type=int, default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", metavar="FILE")
        p.add_argument("--timing", action="store_true", help="append wall-clock columns (not reproducible)")

    p = sub.add_parser("solve", help="solve one mesh system")
    common(p)
    p.add_argument("--solver", choices=SOLVERS, default="minres")
    p.add_argument("--ordering", choices=ORDERINGS, default=None)
    p.add_argument("--precond", default="none", metavar="none|msf|joshi:K|vaidya:T")
    p.add_argument("--history", metavar="FILE", help="write the residual history CSV here")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("ordering-compare", help="fill and flops of orderings on meshes")
    p.add_argument("--mesh", type=parse_mesh, action="append", metavar="NX[,NY[,NZ]]")
    p.add_argument("--orderings", type=lambda s: s.split(","), default=["natural", "md", "nd"])
    p.add_argument("--out", metavar="FILE")
    p.add_argument("--timing", action="store_true")
    p.set_defaults(func=cmd_ordering_compare)

    p = sub.add_parser("joshi-sweep", help="Joshi preconditioners over k")
    common(p)
    p.add_argument("--ks", type=_int_list, default=list(range(1, 9)))
    p.set_defaults(func=cmd_joshi_sweep)

    p = sub.add_parser("vaidya-sweep", help="Vaidya preconditioners over t")
    common(p)
    p.add_argument("--ts", type=_int_list, default=[1, 4, 16])
    p.set_defaults(func=cmd_vaidya_sweep)

    p = sub.add_parser("mm-convert", help="write a mesh or canonicalize a Matrix Market file")
    p.add_argument("--mesh", type=parse_mesh)
    p.add_argument("--in", dest="input", metavar="FILE")
    p.add_argument("--format", choices=("mm", "edgelist"), default="mm")
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=cmd_mm_convert)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "orderings", None):
        bad = [o for o in args.orderings if o not in ORDERINGS]
        if bad:
            parser.error(f"unknown ordering(s): {', '.join(bad)}")
    try:
        text = args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"supportlab: error: {exc}", file=sys.stderr)
        return 2
    _emit(text, args.out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
