"""Text formats: edge lists, permutations, factors, and CSV tables.

All indices written to or read from text are 1-based.
"""

from __future__ import annotations

import csv
import io as _io
from typing import Iterable, Sequence

from .analysis import EmbeddingMetrics
from .cholesky import CholFactor
from .graph import WeightedGraph
from .krylov import SolveReport
from .sparse import Permutation, SymSparseMatrix, _fmt


def write_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return v


def write_edge_list(G: WeightedGraph) -> str:
    """``i j c`` per edge, then ``v i d`` per nonzero vertex weight."""
    lines = [f"{i + 1} {j + 1} {_fmt(c)}" for i, j, c in G.edges]
    lines += [f"v {i + 1} {_fmt(d)}" for i, d in enumerate(G.d) if d != 0]
    return "\n".join(lines) + ("\n" if lines else "")


def read_edge_list(text: str, n: int | None = None) -> WeightedGraph:
    """Parse :func:`write_edge_list` output; ``n`` defaults to the largest index seen."""
    edges, weights = [], {}
    top = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "v" and len(parts) == 3:
                i = int(parts[1])
                weights[i - 1] = float(parts[2])
                top = max(top, i)
            elif len(parts) == 3:
                i, j = int(parts[0]), int(parts[1])
                edges.append((i - 1, j - 1, float(parts[2])))
                top = max(top, i, j)
            else:
                raise ValueError
        except ValueError:
            raise ValueError(f"line {lineno}: cannot parse {raw!r}") from None
    n = top if n is None else n
    d = [0.0] * n
    for i, w in weights.items():
        d[i] = w
    return WeightedGraph(n, edges, d)


def write_permutation(P: Permutation) -> str:
    return "".join(f"{int(v) + 1}\n" for v in P.perm)


def read_permutation(text: str) -> Permutation:
    vals = [int(t) - 1 for t in text.split()]
    return Permutation(vals)


def write_factor_mm(F: CholFactor) -> str:
    """The factor as a general (lower-triangular) coordinate Matrix Market file."""
    out = ["%%MatrixMarket matrix coordinate real general", f"{F.n} {F.n} {F.fill}"]
    for j in range(F.n):
        rows, vals = F.column(j)
        out.extend(f"{int(i) + 1} {j + 1} {float(v)!r}" for i, v in zip(rows, vals))
    return "\n".join(out) + "\n"


def stats_csv(A: SymSparseMatrix, F: CholFactor) -> str:
    """``n,nnzA,nnzL,flops`` with lower-triangle counts (diagonal included)."""
    return write_csv(["n", "nnzA", "nnzL", "flops"], [[A.n, A.nnz_lower, F.fill, F.flops]])


def residual_csv(report: SolveReport) -> str:
    rows = zip(range(len(report.residual_history)), report.residual_history, report.true_residual_history)
    return write_csv(["t", "relres", "true_relres"], rows)


def metrics_csv(m: EmbeddingMetrics) -> tuple[str, str]:
    """Per-A-edge and per-forest-edge tables."""
    edges = write_csv(
        ["edge_i", "edge_j", "dilation", "stretch"],
        ([i + 1, j + 1, m.dilation[(i, j)], m.stretch[(i, j)]] for i, j in sorted(m.dilation)),
    )
    bedges = write_csv(
        ["bedge_i", "bedge_j", "congestion"],
        ([i + 1, j + 1, c] for (i, j), c in sorted(m.congestion.items())),
    )
    return edges, bedges
