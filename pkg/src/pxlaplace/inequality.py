"""Property checkers for convexity, the operator-difference gap, and
weak comparison on discrete instances.

The central quantity is the gap Phi'(1) - Phi'(0) along the segment
between the r-th powers of two positive zero-trace fields: convexity of
the cone energy makes it nonnegative, with equality only for proportional
pairs (and, when p is not identically r, only for identical pairs).  The
gap is computed through the line derivative, which is well defined on the
mesh; the divergence form it represents in the continuum is not.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .energy import (EnergyModel, gateaux_gradient, phi_line, phi_prime,
                     power_reaction, source_reaction)
from .grid import NodeField, constant_field

__all__ = [
    "RayConvexityReport",
    "GapReport",
    "RatioBounds",
    "ComparisonVerdict",
    "check_ray_convexity",
    "diaz_saa_gap",
    "ratio_bound",
    "comparison_check",
    "weak_comparison_experiment",
    "RATIO_CAP",
]

RATIO_CAP = 1e6  # finite surrogate for an essentially bounded ratio


@dataclass(frozen=True)
class RayConvexityReport:
    slacks: np.ndarray
    min_slack: float
    scale: float
    equality_on_grid: bool   # all slacks below the equality tolerance
    proportional_pair: bool  # v2/v1 constant on the nodes
    p_equals_r: bool
    passed: bool             # no slack below -1e-10 * scale


@dataclass(frozen=True)
class GapReport:
    gap: float
    i1: float
    i2: float
    equality_class: str      # "distinct" | "proportional" | "identical"
    ratio_sup: float         # sup of w1/w2 over interior nodes
    inv_ratio_sup: float     # sup of w2/w1
    scale: float


class RatioBounds(tuple):
    """(sup12, sup21) with an admissibility flag against the cap."""

    def __new__(cls, sup12, sup21, admissible):
        self = super().__new__(cls, (float(sup12), float(sup21)))
        self.admissible = bool(admissible)
        return self

    @property
    def sup12(self):
        return self[0]

    @property
    def sup21(self):
        return self[1]


@dataclass(frozen=True)
class ComparisonVerdict:
    max_excess: float
    hypothesis_ok: bool
    conclusion_ok: bool
    notes: tuple = ()


def _scale(*values) -> float:
    return max(1.0, *[abs(v) for v in values])


def check_ray_convexity(v1: NodeField, v2: NodeField, model: EnergyModel,
                        theta_grid, kind: str = "W") -> RayConvexityReport:
    """Convexity slack of the line restriction on a theta grid.

    slack(theta) = (1-theta) Phi(0) + theta Phi(1) - Phi(theta) must be
    nonnegative up to rounding; it vanishes identically exactly when the
    pair is proportional and p is identically r.
    """
    thetas = np.asarray(list(theta_grid), dtype=float)
    if thetas.size == 0:
        raise ValueError("theta_grid must be nonempty")
    phi0 = phi_line(v1, v2, 0.0, model, kind)
    phi1 = phi_line(v1, v2, 1.0, model, kind)
    slacks = np.array([
        (1.0 - t) * phi0 + t * phi1 - phi_line(v1, v2, t, model, kind)
        for t in thetas
    ])
    scale = _scale(phi0, phi1)
    min_slack = float(slacks.min())

    a, b = v1.values, v2.values
    pos = a > 0
    ratios = b[pos] / a[pos]
    proportional = (ratios.size > 0
                    and np.ptp(ratios) <= 1e-10 * max(1.0, np.abs(ratios).max())
                    and np.array_equal(b[~pos] == 0, a[~pos] == 0))
    p_cells = model.exponent.cellwise()
    p_eq_r = bool(np.max(np.abs(p_cells - model.exponent.r)) <= 1e-12)

    return RayConvexityReport(
        slacks=slacks,
        min_slack=min_slack,
        scale=scale,
        equality_on_grid=bool(np.all(np.abs(slacks) <= 1e-10 * scale)),
        proportional_pair=bool(proportional),
        p_equals_r=p_eq_r,
        passed=bool(min_slack >= -1e-10 * scale),
    )


def ratio_bound(u1: NodeField, u2: NodeField, cap: float = RATIO_CAP) -> RatioBounds:
    """Grid maxima of u1/u2 and u2/u1 over interior nodes.

    Boundary nodes are excluded: for zero-trace fields the ratio there is
    0/0 and its continuum value is the quotient of normal derivatives,
    which the interior nodes approximate.
    """
    interior = u1.mesh.interior
    a = u1.values[interior]
    b = u2.values[interior]
    if np.any(b <= 0) or np.any(a <= 0):
        raise ValueError("ratio_bound needs positive interior values")
    sup12 = float(np.max(a / b))
    sup21 = float(np.max(b / a))
    return RatioBounds(sup12, sup21, sup12 <= cap and sup21 <= cap)


def _classify_equality(w1: NodeField, w2: NodeField) -> str:
    a, b = w1.values, w2.values
    scale = max(np.abs(a).max(), np.abs(b).max(), 1e-300)
    if np.max(np.abs(a - b)) <= 1e-10 * scale:
        return "identical"
    interior = w1.mesh.interior
    ratios = b[interior] / a[interior]
    if np.ptp(ratios) <= 1e-8 * max(1.0, np.abs(ratios).max()):
        return "proportional"
    return "distinct"


def diaz_saa_gap(w1: NodeField, w2: NodeField, model: EnergyModel,
                 cap: float = RATIO_CAP) -> GapReport:
    """Operator-difference gap for a pair of positive zero-trace fields.

    Computes Phi'(1) - Phi'(0) along theta -> W_A((1-theta) w1^r + theta w2^r)
    (nonnegative by discrete convexity) together with the two flux
    integrals i1, i2 it equals the difference of:

        i1 = integral a(x, grad w1) . grad(w1 - w2^r / w1^(r-1))
        i2 = integral a(x, grad w2) . grad(w1^r / w2^(r-1) - w2)

    Raises for pairs whose interior ratio exceeds the admissibility cap.
    """
    mesh = model.mesh
    for w in (w1, w2):
        if np.any(w.values[mesh.boundary_mask] != 0):
            raise ValueError("gap inputs must vanish on the boundary")
        if np.any(w.values[mesh.interior] <= 0):
            raise ValueError("gap inputs must be positive at interior nodes")
    ratios = ratio_bound(w1, w2, cap)
    if not ratios.admissible:
        raise ValueError(
            f"inadmissible pair: interior ratio exceeds cap {cap:g}")

    r = model.exponent.r
    v1 = NodeField(mesh, w1.values ** r)
    v2 = NodeField(mesh, w2.values ** r)
    d1 = phi_prime(v1, v2, 1.0, model, "W_A")
    d0 = phi_prime(v1, v2, 0.0, model, "W_A")
    gap = d1 - d0

    i1 = _flux_pairing(w1, _transport(w1, w2, r, sign=+1), model)
    i2 = _flux_pairing(w2, _transport(w2, w1, r, sign=-1), model)
    scale = _scale(abs(i1) + abs(i2))
    return GapReport(gap=float(gap), i1=float(i1), i2=float(i2),
                     equality_class=_classify_equality(w1, w2),
                     ratio_sup=ratios.sup12, inv_ratio_sup=ratios.sup21,
                     scale=scale)


def _transport(wa: NodeField, wb: NodeField, r: float, sign: int) -> NodeField:
    """Nodewise wa - wb^r / wa^(r-1) (sign=+1) or wb^r / wa^(r-1) - wa."""
    a, b = wa.values, wb.values
    out = np.zeros_like(a)
    pos = a > 0
    out[pos] = a[pos] - b[pos] ** r / a[pos] ** (r - 1.0)
    return NodeField(wa.mesh, out if sign > 0 else -out)


def _flux_pairing(w: NodeField, t: NodeField, model: EnergyModel) -> float:
    from .anisotropy import _flux_rows
    from .energy import _grad_rows
    mesh = model.mesh
    p = model.exponent.cellwise()
    flux = _flux_rows(p, model.cell_weights(), _grad_rows(mesh, w.values))
    gt = _grad_rows(mesh, t.values)
    return float(np.sum(np.einsum("cd,cd->c", flux, gt) * mesh.cell_measures))


def _fraction_p_above_r(model: EnergyModel) -> float:
    p = model.exponent.cellwise()
    return float(np.mean(p - model.exponent.r > 1e-12))


def comparison_check(u1: NodeField, u2: NodeField, f1: NodeField,
                     f2: NodeField, model: EnergyModel, tol: float,
                     mode: str = "solutions",
                     residual_tol: float = 1e-7) -> ComparisonVerdict:
    """Weak-comparison verdict for two positive fields.

    Hypotheses: 0 <= f1 <= f2 nodewise, positive interior values with
    admissible ratios, and p not identically r.  In ``mode="subsuper"``
    the fields need not solve anything exactly: the discrete residual of
    u1 must be a subsolution pairing (<= residual_tol against every
    nonnegative nodal test function) and u2 a supersolution pairing.
    Hypothesis violations are reported in the verdict, not raised.
    """
    notes = []
    hypothesis_ok = True
    if np.any(f1.values < 0):
        hypothesis_ok = False
        notes.append("f1 has negative values")
    if np.any(f1.values > f2.values):
        hypothesis_ok = False
        notes.append("f1 <= f2 fails at some node")
    interior = model.mesh.interior
    if np.any(u1.values[interior] <= 0) or np.any(u2.values[interior] <= 0):
        hypothesis_ok = False
        notes.append("fields are not positive at interior nodes")
    else:
        ratios = ratio_bound(u1, u2)
        if not ratios.admissible:
            hypothesis_ok = False
            notes.append("interior ratio exceeds the admissibility cap")
    frac = _fraction_p_above_r(model)
    if frac == 0.0:
        hypothesis_ok = False
        notes.append("p is identically r (comparison needs p > r somewhere)")

    if mode == "subsuper" and hypothesis_ok:
        r1 = _bvp_residual(u1, f1, model)
        r2 = _bvp_residual(u2, f2, model)
        if np.max(r1.values[interior]) > residual_tol:
            hypothesis_ok = False
            notes.append("u1 is not a discrete subsolution")
        if np.min(r2.values[interior]) < -residual_tol:
            hypothesis_ok = False
            notes.append("u2 is not a discrete supersolution")
    elif mode not in ("solutions", "subsuper"):
        raise ValueError(f"unknown mode {mode!r}")

    max_excess = float(np.max(u1.values - u2.values))
    return ComparisonVerdict(
        max_excess=max_excess,
        hypothesis_ok=bool(hypothesis_ok),
        conclusion_ok=bool(max_excess <= tol),
        notes=tuple(notes),
    )


def _comparison_reaction(f: NodeField, r: float):
    """Reaction f(x) u^(r-1): a plain source for r = 1, else a power term."""
    if r == 1.0:
        return source_reaction(f)
    return power_reaction(f, constant_field(f.mesh, r))


def _bvp_residual(u: NodeField, f: NodeField, model: EnergyModel) -> NodeField:
    bvp = replace(model, reaction=_comparison_reaction(f, model.exponent.r),
                  absorption=None, kirchhoff=None)
    return gateaux_gradient(bvp, u, eps=0.0)


def weak_comparison_experiment(model: EnergyModel, f1: NodeField,
                               f2: NodeField, solver_opts, tol: float) -> ComparisonVerdict:
    """Solve the comparison problem for f1 and f2 and compare solutions.

    The right-hand side f(x) u^(r-1) deliberately sits at the equality
    edge of the subhomogeneity condition, so the problem validators are
    bypassed; nonconvergence of either solve propagates.
    """
    from .solver import minimize_energy

    results = []
    for f in (f1, f2):
        bvp = replace(model, reaction=_comparison_reaction(f, model.exponent.r),
                      absorption=None, kirchhoff=None)
        rep = minimize_energy(bvp, solver_opts)
        if not rep.converged:
            raise RuntimeError("comparison solve did not converge")
        results.append(rep.solution)
    return comparison_check(results[0], results[1], f1, f2, model, tol)
