"""Matrix Market coordinate I/O for symmetric sparse matrices.

Reads real coordinate files with `symmetric` or `general` symmetry
(general content must actually be symmetric; construction validates).
Writes the lower triangle as `coordinate real symmetric` with 17 significant
digits so a write/read round trip preserves every value exactly.
"""

import numpy as np

from .linalg import SparseSpdMatrix

__all__ = ["read_matrix_market", "write_matrix_market"]


def read_matrix_market(source):
    """Parse a Matrix Market coordinate file into a SparseSpdMatrix."""
    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("%%MatrixMarket"):
        raise ValueError("missing MatrixMarket header line")
    header = lines[0].split()
    if len(header) != 5:
        raise ValueError(f"malformed header: {lines[0]!r}")
    _, obj, fmt, field, symmetry = (tok.lower() for tok in header)
    if obj != "matrix" or fmt != "coordinate":
        raise ValueError(f"unsupported object/format: {obj} {fmt}")
    if field != "real":
        raise ValueError(f"unsupported field {field!r}: only real matrices are handled")
    if symmetry not in ("symmetric", "general"):
        raise ValueError(f"unsupported symmetry {symmetry!r}")

    body = [ln for ln in lines[1:] if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise ValueError("missing size line")
    sizes = body[0].split()
    if len(sizes) != 3:
        raise ValueError(f"malformed size line: {body[0]!r}")
    nrows, ncols, nnz = (int(s) for s in sizes)
    if nrows != ncols:
        raise ValueError(f"matrix must be square, got {nrows}x{ncols}")
    entries = body[1:]
    if len(entries) != nnz:
        raise ValueError(f"expected {nnz} entries, found {len(entries)}")

    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz)
    for k, ln in enumerate(entries):
        parts = ln.split()
        if len(parts) != 3:
            raise ValueError(f"malformed entry line: {ln!r}")
        rows[k] = int(parts[0]) - 1
        cols[k] = int(parts[1]) - 1
        vals[k] = float(parts[2])
    if symmetry == "symmetric":
        off = rows != cols
        mirrored_rows = np.concatenate([rows, cols[off]])
        mirrored_cols = np.concatenate([cols, rows[off]])
        vals = np.concatenate([vals, vals[off]])
        rows, cols = mirrored_rows, mirrored_cols
    return SparseSpdMatrix.from_coo(nrows, rows, cols, vals)


def write_matrix_market(A, sink):
    """Write the lower triangle of A in coordinate real symmetric format."""
    row_of = np.repeat(np.arange(A.n), np.diff(A.row_ptr))
    keep = row_of >= A.col_idx
    rows, cols, vals = row_of[keep], A.col_idx[keep], A.values[keep]
    out = ["%%MatrixMarket matrix coordinate real symmetric"]
    out.append(f"{A.n} {A.n} {rows.size}")
    out.extend(
        f"{r + 1} {c + 1} {v:.17g}" for r, c, v in zip(rows, cols, vals)
    )
    text = "\n".join(out) + "\n"
    if hasattr(sink, "write"):
        sink.write(text)
    else:
        with open(sink, "w", encoding="utf-8") as fh:
            fh.write(text)
