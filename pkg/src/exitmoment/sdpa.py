"""Sparse SDPA (.dat-s) export and a matching reader for cross-checks.

The file encodes ``min c^T x  s.t.  X = sum_i x_i F_i - F_0,  X >= 0``
(the standard reading of the format).  Every PSD block of the program
becomes one block of X; the equality system A x = b is appended as one
diagonal block holding the paired inequalities A x - b >= 0 and
b - A x >= 0.  Maximization problems are written with the negated
objective and flagged in a comment line.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .momentproblem import ConicProgram


@dataclass
class SdpaData:
    num_vars: int
    block_sizes: list            # negative entries are diagonal blocks
    c: list
    entries: dict                # (matno, blkno) -> sorted [(i, j, value)]


def _svec_coords(dim: int):
    coords = []
    for i in range(dim):
        for j in range(i, dim):
            coords.append((i + 1, j + 1))
    return coords


def program_sdpa_image(program: ConicProgram) -> SdpaData:
    """The exact structure export_sdpa writes, kept in memory."""
    m_eq = program.a_eq.shape[0]
    sizes = [b.dim for b in program.blocks]
    if m_eq:
        sizes.append(-2 * m_eq)
    sign = -1.0 if program.sense == "max" else 1.0
    c = [sign * v for v in program.objective.tolist()]

    entries: dict = {}

    def put(matno, blkno, i, j, value):
        if value == 0.0:
            return
        entries.setdefault((matno, blkno), []).append((i, j, float(value)))

    for blkno, block in enumerate(program.blocks, start=1):
        coords = _svec_coords(block.dim)
        coo = block.mat.tocoo()
        for pos, var, val in zip(coo.row, coo.col, coo.data):
            i, j = coords[pos]
            put(var + 1, blkno, i, j, val)

    if m_eq:
        blkno = len(program.blocks) + 1
        coo = program.a_eq.tocoo()
        for row, var, val in zip(coo.row, coo.col, coo.data):
            put(var + 1, blkno, row + 1, row + 1, val)
            put(var + 1, blkno, m_eq + row + 1, m_eq + row + 1, -val)
        for row, val in enumerate(program.rhs.tolist()):
            put(0, blkno, row + 1, row + 1, val)
            put(0, blkno, m_eq + row + 1, m_eq + row + 1, -val)

    for key in entries:
        entries[key].sort()
    return SdpaData(program.num_vars, sizes, c, entries)


def export_sdpa(program: ConicProgram, path) -> None:
    """Write the program in sparse SDPA format (see module docstring for
    the block layout; equalities are the trailing diagonal block)."""
    data = program_sdpa_image(program)
    lines = [
        "*exitmoment conic program export",
        f"*sense: {program.sense}"
        + (" (objective negated in c below)" if program.sense == "max" else ""),
        "*blocks: "
        + ", ".join(b.label for b in program.blocks)
        + (", equality pairs (diagonal)" if program.a_eq.shape[0] else ""),
        str(data.num_vars),
        str(len(data.block_sizes)),
        " ".join(str(s) for s in data.block_sizes),
        " ".join(repr(v) for v in data.c),
    ]
    for (matno, blkno), items in sorted(data.entries.items()):
        for i, j, val in items:
            lines.append(f"{matno} {blkno} {i} {j} {val!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_sdpa(path) -> SdpaData:
    """Parse a sparse SDPA file back into the exported structure."""
    with open(path) as fh:
        raw = [line.strip() for line in fh]
    body = [line for line in raw if line and line[0] not in "*\""]
    if len(body) < 4:
        raise ValueError("truncated SDPA file")
    num_vars = int(body[0])
    nblocks = int(body[1])
    sizes_line = body[2]
    for ch in "{}(),":
        sizes_line = sizes_line.replace(ch, " ")
    block_sizes = [int(tok) for tok in sizes_line.split()]
    if len(block_sizes) != nblocks:
        raise ValueError("block count does not match the size list")
    c = [float(tok) for tok in body[3].split()]
    entries: dict = {}
    for line in body[4:]:
        toks = line.split()
        if len(toks) != 5:
            raise ValueError(f"malformed entry line: {line!r}")
        matno, blkno, i, j = (int(t) for t in toks[:4])
        value = float(toks[4])
        if value != 0.0:
            entries.setdefault((matno, blkno), []).append((i, j, value))
    for key in entries:
        entries[key].sort()
    return SdpaData(num_vars, block_sizes, c, entries)
