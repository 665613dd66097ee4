"""SDE models and state augmentation.

Transforms a user SDE (drift/diffusion possibly containing sinusoids of
monomials) into a time-augmented polynomial SDE over an extended state
that is closed under infinitesimal generation: every sin/cos appearing in
the dynamics becomes an extra state whose drift and diffusion follow from
Ito's formula, so all augmented entries are plain polynomials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

from .expr import (
    Expression,
    Polynomial,
    TrigAtom,
    parse_expression,
    parse_polynomial,
)

TIME_NAME = "t"


class UnsupportedDynamicsError(ValueError):
    """Dynamics outside the supported sinusoidal-polynomial family."""


@dataclass
class SdeModel:
    """User-level SDE: drift/diffusion expressions, safe set, start state.

    Expressions live over ``n + 1`` base slots; the last slot is reserved
    for time so models may depend polynomially on ``t`` even before time
    augmentation activates it as a dynamic state.
    """

    names: list          # n state names plus the trailing time name
    d: int               # Brownian dimension
    drift: list          # Expressions; n entries, n+1 once time-augmented
    diffusion: list      # list of rows of Expressions, same count as drift
    x0: list             # floats; n entries, n+1 once time-augmented
    horizon: float
    safe_polys: list     # Polynomials over the n+1 slots
    time_augmented: bool = False

    @property
    def n(self) -> int:
        return len(self.names) - 1

    @property
    def nslots(self) -> int:
        return len(self.names)

    @staticmethod
    def from_strings(
        names: Sequence[str],
        drift: Sequence[str],
        diffusion: Sequence[Sequence[str]],
        x0: Sequence[float],
        horizon: float,
        safe_polys: Sequence[str] = (),
        check_interior: bool = True,
    ) -> "SdeModel":
        if TIME_NAME in names:
            raise ValueError(f"{TIME_NAME!r} is reserved for the time variable")
        full = list(names) + [TIME_NAME]
        if len(drift) != len(names) or len(diffusion) != len(names):
            raise ValueError("need one drift entry and one diffusion row per state")
        d = len(diffusion[0]) if diffusion else 0
        if any(len(row) != d for row in diffusion):
            raise ValueError("diffusion rows must all have the same width")
        drift_e = [parse_expression(s, full) for s in drift]
        diff_e = [[parse_expression(s, full) for s in row] for row in diffusion]
        safe = [parse_polynomial(s, full) for s in safe_polys]
        if len(x0) != len(names):
            raise ValueError("x0 dimension must match the state dimension")
        model = SdeModel(full, d, drift_e, diff_e, list(map(float, x0)),
                         float(horizon), safe)
        if check_interior:
            point = list(model.x0) + [0.0]
            for i, q in enumerate(safe):
                if q.evaluate(point) <= 0:
                    raise ValueError(
                        f"x0 is not strictly inside the safe set: polynomial {i} "
                        f"evaluates to {q.evaluate(point)}"
                    )
        return model

    def starts_on_boundary(self) -> bool:
        point = list(self.x0) + [0.0] * (self.nslots - len(self.x0))
        return any(q.evaluate(point) <= 0 for q in self.safe_polys)


@dataclass
class AugmentedModel:
    """Time- and trig-augmented SDE with purely polynomial dynamics.

    Variable order is [x_1..x_n, t, atoms...] with atoms listed sines
    first then cosines (frequency collection order), matching the moment
    indexing used downstream.
    """

    names: list
    n_base: int
    time_index: int
    atoms: list                 # TrigAtom per appended state
    d: int
    drift: list                 # Polynomials over total_dim vars
    diffusion: list             # rows of Polynomials
    x0: list                    # floats, length total_dim
    horizon: float
    user_polys: list            # the original safe-set description
    time_polys: list            # [t, T - t]
    trig_polys: list            # unit-circle box polynomials for atom states
    scales: list = field(default_factory=list)  # per-var scale already applied

    @property
    def total_dim(self) -> int:
        return len(self.names)

    @property
    def support_polys(self) -> list:
        return list(self.user_polys) + list(self.time_polys)

    @property
    def exit_polys(self) -> list:
        """Polynomials whose product vanishes on the exit-reachable part
        of the boundary: user facets and the horizon facet T - t.  The
        facet t = 0 carries no exit mass (the start state is interior)
        and must stay out of the product, otherwise the point mass at the
        start state satisfies every boundary constraint."""
        return list(self.user_polys) + [self.time_polys[1]]

    @property
    def safe_polys(self) -> list:
        return self.support_polys + list(self.trig_polys)

    def sigma_sigma_t(self) -> list:
        """Upper-triangular (i <= j) cache of (sigma sigma^T)_{ij}."""
        if not hasattr(self, "_sst"):
            nd = self.total_dim
            sst = {}
            for i in range(nd):
                for j in range(i, nd):
                    acc = Polynomial.zero(nd)
                    for k in range(self.d):
                        acc = acc + self.diffusion[i][k] * self.diffusion[j][k]
                    sst[(i, j)] = acc
            self._sst = sst
        return self._sst

    def describe(self) -> str:
        lines = [f"state ({self.total_dim}): " + ", ".join(self.names)]
        lines.append("drift:")
        for name, h in zip(self.names, self.drift):
            lines.append(f"  d{name} <- {h.format(self.names)}")
        lines.append("diffusion:")
        for name, row in zip(self.names, self.diffusion):
            cols = ", ".join(s.format(self.names) for s in row)
            lines.append(f"  d{name} <- [{cols}]")
        lines.append("x0: " + ", ".join(f"{v:.12g}" for v in self.x0))
        lines.append("support polynomials:")
        for q in self.support_polys:
            lines.append(f"  {q.format(self.names)} >= 0")
        for q in self.trig_polys:
            lines.append(f"  {q.format(self.names)} >= 0")
        return "\n".join(lines)


def augment_time(model: SdeModel) -> SdeModel:
    """Append time as a state with drift 1 and zero diffusion row.

    Adds the box polynomials ``t >= 0`` and ``T - t >= 0`` and extends x0
    with the component 0.
    """
    if model.time_augmented:
        raise ValueError("model is already time-augmented")
    nslots = model.nslots
    t = model.n  # slot index of time
    one = Expression.constant(nslots, 1)
    zero = Expression.zero(nslots)
    drift = list(model.drift) + [one]
    diffusion = list(model.diffusion) + [[zero] * model.d]
    t_poly = Polynomial.variable(nslots, t)
    horizon_poly = Polynomial.constant(nslots, model.horizon) - t_poly
    return SdeModel(
        names=list(model.names),
        d=model.d,
        drift=drift,
        diffusion=diffusion,
        x0=list(model.x0) + [0.0],
        horizon=model.horizon,
        safe_polys=list(model.safe_polys) + [t_poly, horizon_poly],
        time_augmented=True,
    )


def collect_trig_atoms(model: SdeModel) -> list:
    """All atoms needed to close the dynamics, sines first then cosines.

    Every (frequency, argument) pair appearing in drift or diffusion
    contributes BOTH its sine and cosine atom: differentiation swaps the
    two, so the partner is required for closure.
    """
    sin_pairs: list = []
    cos_pairs: list = []

    def visit(expr: Expression):
        for atom in expr.used_atoms():
            pair = (atom.freq, atom.arg)
            bucket = sin_pairs if atom.kind == "sin" else cos_pairs
            if pair not in bucket:
                bucket.append(pair)

    for entry in model.drift:
        visit(entry)
    for row in model.diffusion:
        for entry in row:
            visit(entry)

    ordered = list(sin_pairs) + [p for p in cos_pairs if p not in sin_pairs]
    sines = [TrigAtom("sin", f, a) for f, a in ordered]
    cosines = [TrigAtom("cos", f, a) for f, a in ordered]
    return sines + cosines


def check_closure(model) -> tuple:
    """(True, None) if drift and sigma*sigma^T entries are pure polynomials.

    Works on both SdeModel (entries may still hold atoms) and
    AugmentedModel (entries are plain polynomials by construction).
    Returns the first offending entry name as witness otherwise.
    """
    drift = model.drift
    diffusion = model.diffusion
    for i, entry in enumerate(drift):
        if isinstance(entry, Expression) and not entry.is_polynomial():
            return False, f"drift[{i}]"
    nrows = len(diffusion)
    for i in range(nrows):
        for j in range(i, nrows):
            entries = [(diffusion[i][k], diffusion[j][k]) for k in range(model.d)]
            if not all(isinstance(a, Expression) and isinstance(b, Expression)
                       for a, b in entries):
                continue  # plain polynomials are closed by construction
            acc = None
            for a, b in entries:
                prod = a * b
                acc = prod if acc is None else acc + prod
            if acc is not None and not acc.is_polynomial():
                return False, f"(sigma*sigma^T)[{i},{j}]"
    return True, None


def augment_sinusoids(model: SdeModel) -> AugmentedModel:
    """Append sin/cos states so the dynamics close under the generator.

    Each atom state a(x) gets drift sum_i da/dx_i h_i + (1/2) sum_ij
    d2a/dx_i dx_j (sigma sigma^T)_ij and diffusion row sum_i da/dx_i
    sigma_ik; afterwards every atom occurrence is renamed to its state
    variable, leaving pure polynomials.
    """
    if not model.time_augmented:
        raise ValueError("time-augment the model before sinusoidal augmentation")
    nslots = model.nslots
    atoms = collect_trig_atoms(model)

    # First partial derivatives of each atom as expressions over the base.
    datoms = {
        (a, i): Expression.atom(nslots, a).differentiate(i)
        for a in atoms
        for i in range(nslots)
        if a.arg[i] != 0
    }

    sst = {}
    for i in range(nslots):
        for j in range(i, nslots):
            acc = Expression.zero(nslots)
            for k in range(model.d):
                acc = acc + model.diffusion[i][k] * model.diffusion[j][k]
            sst[(i, j)] = acc

    atom_drift = []
    atom_diffusion = []
    for a in atoms:
        e = Expression.atom(nslots, a)
        h = Expression.zero(nslots)
        for i in range(nslots):
            if a.arg[i] == 0:
                continue
            h = h + datoms[(a, i)] * model.drift[i]
            for j in range(nslots):
                lo, hi = min(i, j), max(i, j)
                entry = sst[(lo, hi)]
                if entry.poly.is_zero():
                    continue
                second = datoms[(a, i)].differentiate(j)
                if second.poly.is_zero():
                    continue
                h = h + second * entry * Fraction(1, 2)
        row = []
        for k in range(model.d):
            s = Expression.zero(nslots)
            for i in range(nslots):
                if a.arg[i] == 0:
                    continue
                s = s + datoms[(a, i)] * model.diffusion[i][k]
            row.append(s)
        atom_drift.append(h)
        atom_diffusion.append(row)

    drift_all = list(model.drift) + atom_drift
    diff_all = [list(row) for row in model.diffusion] + atom_diffusion

    def to_poly(expr: Expression) -> Polynomial:
        unified = expr.with_atoms(atoms)
        for used in unified.used_atoms():
            if used not in atoms:
                raise UnsupportedDynamicsError(
                    f"atom {used} escaped the collected frequency set"
                )
        return unified.poly

    total = nslots + len(atoms)
    drift_p = [to_poly(e) for e in drift_all]
    diff_p = [[to_poly(e) for e in row] for row in diff_all]

    base_point = list(model.x0)
    x0 = list(model.x0) + [a.value(base_point) for a in atoms]

    names = list(model.names) + [a.format(model.names) for a in atoms]
    remapped = [q.remap_vars(total, list(range(nslots))) for q in model.safe_polys]
    user, time_box = remapped[:-2], remapped[-2:]

    trig_polys = []
    pairs = []
    for idx, a in enumerate(atoms):
        v = Polynomial.variable(total, nslots + idx)
        trig_polys.append(Polynomial.constant(total, 1) - v * v)
        if a.kind == "sin":
            pairs.append((a.freq, a.arg))
    for freq, arg in pairs:
        s_i = atoms.index(TrigAtom("sin", freq, arg))
        c_i = atoms.index(TrigAtom("cos", freq, arg))
        s = Polynomial.variable(total, nslots + s_i)
        c = Polynomial.variable(total, nslots + c_i)
        circle = s * s + c * c - 1
        trig_polys.append(circle)
        trig_polys.append(-circle)

    am = AugmentedModel(
        names=names,
        n_base=model.n,
        time_index=model.n,
        atoms=atoms,
        d=model.d,
        drift=drift_p,
        diffusion=diff_p,
        x0=x0,
        horizon=model.horizon,
        user_polys=user,
        time_polys=time_box,
        trig_polys=trig_polys,
        scales=[Fraction(1)] * total,
    )
    ok, witness = check_closure(am)
    if not ok:
        raise UnsupportedDynamicsError(f"augmentation failed to close {witness}")
    return am


def augment(model: SdeModel) -> AugmentedModel:
    """Full pipeline: time augmentation (once) then sinusoidal closure."""
    if not model.time_augmented:
        model = augment_time(model)
    return augment_sinusoids(model)


# ---------------------------------------------------------------------------
# Unit-box scaling
# ---------------------------------------------------------------------------


def infer_box(support_polys, total_dim) -> dict:
    """Per-variable bounds found among degree-1 single-variable polynomials."""
    bounds: dict = {}
    for q in support_polys:
        if q.degree() != 1:
            continue
        vars_used = {i for alpha in q.terms for i, e in enumerate(alpha) if e > 0}
        if len(vars_used) != 1:
            continue
        (var,) = vars_used
        a = q.coefficient(tuple(1 if i == var else 0 for i in range(total_dim)))
        b = q.coefficient((0,) * total_dim)
        if a == 0:
            continue
        # a*x + b >= 0 pins x at -b/a on the facet
        bounds.setdefault(var, []).append(float(-b / a))
    return bounds


# Scaled time box: t~ ranges over [0, TIME_BOX].  Mapping the horizon all
# the way to 1 crushes high-order time moments below solver resolution
# (the order-6 objective lands near 1e-7 for a horizon of 10), while
# leaving time unscaled makes the box moments span many decades; a box of
# a few units keeps both ends resolvable.
TIME_BOX = 5.0


def unit_scales(model: AugmentedModel) -> list:
    """Scale factor per variable mapping known boxes into [-1, 1].

    Time is scaled so its box becomes [0, TIME_BOX]; atom states already
    live in [-1, 1]; unboxed variables are left alone.
    """
    total = model.total_dim
    scales = [Fraction(1)] * total
    bounds = infer_box(model.support_polys, total)
    for var, vals in bounds.items():
        s = max(abs(v) for v in vals)
        if s > 0 and var != model.time_index:
            scales[var] = Fraction(s).limit_denominator(10**9)
    scales[model.time_index] = Fraction(
        model.horizon / TIME_BOX).limit_denominator(10**9)
    return scales


def scale_model(model: AugmentedModel, scales=None) -> AugmentedModel:
    """Substitute x_i -> scales[i] * x_i so boxes land in the unit cube.

    Works directly on the polynomial model (real time is untouched, only
    the time *variable* is rescaled), so drift entry i picks up 1/s_i and
    the substituted arguments s_j x_j.  Safe polynomials are renormalized
    to unit max coefficient.  Moments transform as m_alpha ->
    prod(s^alpha) m_alpha; order-n exit moments unscale by s_t^(n-1).
    """
    if scales is None:
        scales = unit_scales(model)
    scales = [Fraction(s) if not isinstance(s, Fraction)
              else s for s in scales]
    if any(s <= 0 for s in scales):
        raise ValueError("scale factors must be positive")

    def normalized(q: Polynomial) -> Polynomial:
        m = q.scale_vars(scales)
        top = m.max_coefficient()
        return m * (1 / top) if top not in (0, 1) else m

    drift = [h.scale_vars(scales) * (1 / s)
             for h, s in zip(model.drift, scales)]
    diffusion = [[g.scale_vars(scales) * (1 / s) for g in row]
                 for row, s in zip(model.diffusion, scales)]
    x0 = [v / float(s) for v, s in zip(model.x0, scales)]
    scaled = AugmentedModel(
        names=list(model.names),
        n_base=model.n_base,
        time_index=model.time_index,
        atoms=list(model.atoms),
        d=model.d,
        drift=drift,
        diffusion=diffusion,
        x0=x0,
        horizon=model.horizon / float(scales[model.time_index]),
        user_polys=[normalized(q) for q in model.user_polys],
        time_polys=[normalized(q) for q in model.time_polys],
        trig_polys=[normalized(q) for q in model.trig_polys],
        scales=[a * b for a, b in zip(model.scales, scales)],
    )
    return scaled


def moment_unscale_factor(model: AugmentedModel, order: int) -> float:
    """Multiplier restoring order-n exit-time moments to original units."""
    return float(model.scales[model.time_index]) ** (order - 1)
