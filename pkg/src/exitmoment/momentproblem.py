"""Moment and localizing matrix maps; assembly of the two conic programs.

The assembled program has one variable per occupation moment (degree up
to K plus the overshoot needed by full-basis localizing blocks) followed
by one per exit moment.  PSD blocks all share the moment-matrix basis of
degree floor(K/2), so the block-diagonal cone has total side
(2 + 3 N_q) d_K with original boundary constraints and (2 + N_q) d_K with
the reduced scalar equalities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .augment import AugmentedModel
from .expr import (
    MultiIndex,
    Polynomial,
    count_upto,
    enumerate_multi_indices,
    graded_lex_rank,
)
from .generator import MartingaleRow, emit_all_rows


@dataclass
class MomentIndexMap:
    """Symmetric map (i, j) -> rank of basis[i] + basis[j]."""

    nvars: int
    max_degree: int                 # K of the ambient moment sequence
    basis: list                     # multi-indices of degree <= K // 2

    @property
    def dim(self) -> int:
        return len(self.basis)

    def entry(self, i: int, j: int) -> int:
        alpha = self.basis[i]
        beta = self.basis[j]
        return graded_lex_rank(tuple(a + b for a, b in zip(alpha, beta)))

    def entry_index(self, i: int, j: int) -> MultiIndex:
        return tuple(a + b for a, b in zip(self.basis[i], self.basis[j]))


def build_moment_map(nvars: int, K: int) -> MomentIndexMap:
    if K < 0:
        raise ValueError("K must be non-negative")
    return MomentIndexMap(nvars, K, enumerate_multi_indices(nvars, K // 2))


@dataclass
class LocalizingMap:
    """Entries (i, j) -> sum_alpha q_alpha * moment[beta(i,j) + alpha]."""

    poly: Polynomial
    base: MomentIndexMap

    @property
    def dim(self) -> int:
        return self.base.dim

    def entries(self, i: int, j: int) -> list:
        beta = self.base.entry_index(i, j)
        out = []
        for alpha, coef in self.poly.items():
            target = tuple(a + b for a, b in zip(beta, alpha))
            out.append((coef, graded_lex_rank(target)))
        return out

    def entry_indices(self, i: int, j: int) -> list:
        beta = self.base.entry_index(i, j)
        return [
            (coef, tuple(a + b for a, b in zip(beta, alpha)))
            for alpha, coef in self.poly.items()
        ]

    def max_referenced_degree(self) -> int:
        return 2 * max(sum(b) for b in self.base.basis) + self.poly.degree()


def build_localizing_map(q: Polynomial, nvars: int, K: int,
                         basis_degree: int | None = None) -> LocalizingMap:
    """Localizing structure for q.

    By default the basis degree is floor((K - deg q) / 2) so every
    referenced moment stays within degree K.  The assembler passes the
    full moment-matrix basis degree instead, which sizes every block at
    d_K and lets referenced moments overshoot K (the variable space is
    widened accordingly).
    """
    degq = q.degree()
    if degq < 0:
        raise ValueError("localizing polynomial must be nonzero")
    if degq > K:
        raise ValueError(f"deg(q) = {degq} exceeds the moment degree K = {K}")
    if basis_degree is None:
        basis_degree = (K - degq) // 2
    basis = enumerate_multi_indices(nvars, basis_degree)
    return LocalizingMap(q, MomentIndexMap(nvars, K, basis))


def boundary_product(safe_polys) -> Polynomial:
    """Product of the safe-set polynomials; vanishes exactly on the boundary."""
    polys = list(safe_polys)
    if not polys:
        raise ValueError("safe set described by no polynomials")
    out = polys[0]
    for q in polys[1:]:
        out = out * q
    if out.is_zero():
        raise ValueError("degenerate zero boundary polynomial")
    return out


def reduced_boundary_equalities(qprime: Polynomial, nvars: int, K: int,
                                basis_degree: int | None = None) -> list:
    """Scalar equalities 'sum_alpha q'_alpha b_{beta(i,j)+alpha} = 0'.

    One row per upper-triangle entry of the q'-localizing structure on the
    moment-matrix basis, deduplicated by sparse pattern; rows come back as
    dicts mapping exit-moment multi-indices to rational coefficients.
    """
    degq = qprime.degree()
    if degq < 0:
        raise ValueError("degenerate zero boundary polynomial")
    if degq > K:
        raise ValueError(
            f"deg(q') = {degq} exceeds K = {K}: moment sequence too short "
            "for the reduced boundary formulation")
    if basis_degree is None:
        basis_degree = K // 2
    basis = enumerate_multi_indices(nvars, basis_degree)
    seen = set()
    rows = []
    items = qprime.items()
    for i in range(len(basis)):
        for j in range(i, len(basis)):
            beta = tuple(a + b for a, b in zip(basis[i], basis[j]))
            row: dict = {}
            for alpha, coef in items:
                target = tuple(a + b for a, b in zip(beta, alpha))
                row[target] = row.get(target, Fraction(0)) + coef
            row = {k: v for k, v in row.items() if v}
            if not row:
                continue
            lead = min(row, key=graded_lex_rank)
            scale = row[lead]
            pattern = tuple(sorted(
                ((k, v / scale) for k, v in row.items()),
                key=lambda kv: graded_lex_rank(kv[0])))
            if pattern in seen:
                continue
            seen.add(pattern)
            rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# Conic assembly
# ---------------------------------------------------------------------------


@dataclass
class PsdBlock:
    """dim x dim PSD constraint; ``mat @ z`` fills the upper triangle row
    by row (i <= j)."""

    label: str
    dim: int
    mat: sp.csr_matrix

    def svec_len(self) -> int:
        return self.dim * (self.dim + 1) // 2

    def materialize(self, z: np.ndarray) -> np.ndarray:
        vals = self.mat @ z
        out = np.zeros((self.dim, self.dim))
        pos = 0
        for i in range(self.dim):
            for j in range(i, self.dim):
                out[i, j] = out[j, i] = vals[pos]
                pos += 1
        return out


def svec_diag_mask(dim: int) -> np.ndarray:
    mask = np.zeros(dim * (dim + 1) // 2, dtype=bool)
    pos = 0
    for i in range(dim):
        mask[pos] = True
        pos += dim - i
    return mask


@dataclass
class ConicProgram:
    """Standard-form container: equalities plus PSD blocks over one
    variable vector (occupation moments first, exit moments after)."""

    num_vars: int
    objective: np.ndarray
    sense: str
    a_eq: sp.csr_matrix
    rhs: np.ndarray
    blocks: list
    meta: dict = field(default_factory=dict)

    @property
    def psd_total_dim(self) -> int:
        return sum(b.dim for b in self.blocks)


@dataclass
class MomentProblem:
    """Assembled description prior to lowering into sparse matrices."""

    model: AugmentedModel
    variant: str
    K: int
    moment_order: int
    sense: str
    rows: list                     # MartingaleRow
    dropped_rows: list
    m_indices: list
    b_indices: list
    moment_basis: list             # degree <= K // 2
    interior_polys: list
    qprime: Polynomial
    boundary_equalities: list      # reduced variant only
    num_boundary_blocks: int       # original variant only

    @property
    def n_q(self) -> int:
        return len(self.interior_polys)

    @property
    def d_k(self) -> int:
        return len(self.moment_basis)


def build_moment_problem(model: AugmentedModel, variant: str, K: int,
                         moment_order: int, sense: str) -> MomentProblem:
    from .augment import check_closure

    if variant not in ("original", "reduced"):
        raise ValueError(f"unknown variant {variant!r}")
    if sense not in ("max", "min"):
        raise ValueError(f"unknown sense {sense!r}")
    ok, witness = check_closure(model)
    if not ok:
        raise ValueError(f"model is not closed under generation: {witness}")
    if moment_order < 1:
        raise ValueError("moment order must be >= 1")
    if moment_order - 1 > K:
        raise ValueError("objective moment exceeds the moment sequence")
    n = model.total_dim

    dropped: list = []
    rows = emit_all_rows(model, K, dropped=dropped)

    interior = list(model.support_polys) + list(model.trig_polys)
    # exit_polys excludes the t = 0 facet: no exit mass lives there, and
    # keeping it would let the start-state point mass satisfy every
    # boundary constraint (collapsing the minimization to zero)
    qprime = boundary_product(model.exit_polys)

    half = K // 2
    basis = enumerate_multi_indices(n, half)

    max_int_deg = max((q.degree() for q in interior), default=0)
    K_m = max(K, 2 * half + max_int_deg)
    K_b = max(K, 2 * half + qprime.degree())
    m_indices = enumerate_multi_indices(n, K_m)
    b_indices = enumerate_multi_indices(n, K_b)

    boundary_eqs = []
    n_boundary_blocks = 0
    if variant == "reduced":
        boundary_eqs = reduced_boundary_equalities(qprime, n, K,
                                                   basis_degree=half)
    else:
        # one (q', -q') pair of boundary localizing blocks per safe-set
        # polynomial, mirroring the 2 N_q boundary accounting
        n_boundary_blocks = 2 * len(interior)

    return MomentProblem(
        model=model, variant=variant, K=K, moment_order=moment_order,
        sense=sense, rows=rows, dropped_rows=dropped,
        m_indices=m_indices, b_indices=b_indices, moment_basis=basis,
        interior_polys=interior, qprime=qprime,
        boundary_equalities=boundary_eqs,
        num_boundary_blocks=n_boundary_blocks,
    )


def _psd_block(label: str, loc: LocalizingMap, var_of, num_vars: int) -> PsdBlock:
    dim = loc.dim
    rows_ix: list = []
    cols_ix: list = []
    vals: list = []
    pos = 0
    for i in range(dim):
        for j in range(i, dim):
            for coef, target in loc.entry_indices(i, j):
                rows_ix.append(pos)
                cols_ix.append(var_of[target])
                vals.append(float(coef))
            pos += 1
    mat = sp.csr_matrix(
        (vals, (rows_ix, cols_ix)),
        shape=(dim * (dim + 1) // 2, num_vars),
    )
    mat.sum_duplicates()
    return PsdBlock(label, dim, mat)


def lower_to_conic(mp: MomentProblem) -> ConicProgram:
    n = mp.model.total_dim
    m_of = {alpha: i for i, alpha in enumerate(mp.m_indices)}
    b_of = {alpha: len(mp.m_indices) + i for i, alpha in enumerate(mp.b_indices)}
    num_vars = len(mp.m_indices) + len(mp.b_indices)

    # -- equality rows, deduplicated on exact rational patterns ----------
    patterns = set()
    eq_rows = []
    eq_rhs = []

    def push(coeffs: dict, rhs):
        if not coeffs:
            return
        items = sorted(coeffs.items())
        lead = items[0][1]
        pattern = tuple((v, c / lead) for v, c in items) + (float(rhs) / float(lead),)
        if pattern in patterns:
            return
        patterns.add(pattern)
        eq_rows.append(items)
        eq_rhs.append(float(rhs))

    for row in mp.rows:
        coeffs = {m_of[j]: c for j, c in row.interior_coeffs.items()}
        coeffs[b_of[row.test_index]] = Fraction(-1)
        push(coeffs, -Fraction(row.constant).limit_denominator(10**15))
    for eq in mp.boundary_equalities:
        push({b_of[j]: c for j, c in eq.items()}, Fraction(0))

    rows_ix, cols_ix, vals = [], [], []
    for r, items in enumerate(eq_rows):
        for v, c in items:
            rows_ix.append(r)
            cols_ix.append(v)
            vals.append(float(c))
    a_eq = sp.csr_matrix((vals, (rows_ix, cols_ix)),
                         shape=(len(eq_rows), num_vars))
    rhs = np.array(eq_rhs)

    # -- PSD blocks -------------------------------------------------------
    one = Polynomial.constant(n, 1)
    basis_map = MomentIndexMap(n, mp.K, mp.moment_basis)
    blocks = [
        _psd_block("M(m)", LocalizingMap(one, basis_map), m_of, num_vars),
        _psd_block("M(b)", LocalizingMap(one, basis_map), b_of, num_vars),
    ]
    for idx, q in enumerate(mp.interior_polys):
        blocks.append(_psd_block(f"M(q{idx} m)", LocalizingMap(q, basis_map),
                                 m_of, num_vars))
    if mp.variant == "original":
        for idx in range(len(mp.interior_polys)):
            blocks.append(_psd_block(f"M(+q' b)#{idx}",
                                     LocalizingMap(mp.qprime, basis_map),
                                     b_of, num_vars))
            blocks.append(_psd_block(f"M(-q' b)#{idx}",
                                     LocalizingMap(-mp.qprime, basis_map),
                                     b_of, num_vars))

    # -- objective --------------------------------------------------------
    obj_index = tuple(
        mp.moment_order - 1 if i == mp.model.time_index else 0
        for i in range(n))
    c = np.zeros(num_vars)
    c[m_of[obj_index]] = float(mp.moment_order)

    meta = {
        "variant": mp.variant,
        "K": mp.K,
        "moment_order": mp.moment_order,
        "n_q": mp.n_q,
        "d_k": mp.d_k,
        "num_m": len(mp.m_indices),
        "num_b": len(mp.b_indices),
        "m_indices": mp.m_indices,
        "b_indices": mp.b_indices,
        "objective_index": obj_index,
        "dropped_rows": list(mp.dropped_rows),
    }
    return ConicProgram(num_vars, c, mp.sense, a_eq, rhs, blocks, meta)


def assemble(model: AugmentedModel, variant: str, K: int,
             moment_order: int, sense: str) -> ConicProgram:
    """Build the full conic program for one bound computation."""
    return lower_to_conic(
        build_moment_problem(model, variant, K, moment_order, sense))


def split_moments(program: ConicProgram, z: np.ndarray):
    """Recover the (m, b) moment vectors from a solver iterate."""
    num_m = program.meta["num_m"]
    return z[:num_m], z[num_m:]
