"""Discrete energies on the positive cone and their exact derivatives.

Everything is a finite sum over cells.  For a positive nodal field v and
constant r, the root field w = v^(1/r) is formed nodewise BEFORE the
difference quotient; with that ordering every 1D cell term
(a, b) -> |b^(1/r) - a^(1/r)|^p is convex on (0, inf)^2, so the discrete
cone energies are convex exactly, not just in the mesh limit.  Line
restrictions along segments in the cone and their derivatives are computed
in closed form, and the derivative formulas are the exact derivatives of
the discrete line values (the consistency tests rely on this).

Reaction, absorption and saturating Kirchhoff terms extend the gradient
energies to the three Dirichlet problems; the Gateaux gradient assembles
the nodal derivative of each discrete energy for the descent solver.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .anisotropy import AnisotropyModel, _flux_rows, _quad_form
from .exponents import ExponentField
from .grid import Mesh, NodeField, cell_average

__all__ = [
    "ReactionTerm",
    "AbsorptionTerm",
    "KirchhoffTerm",
    "EnergyModel",
    "power_reaction",
    "source_reaction",
    "power_absorption",
    "saturating_kirchhoff",
    "potential_F",
    "potential_G",
    "M_hat",
    "kirchhoff_M",
    "W_functional",
    "W_A_functional",
    "dirichlet_part",
    "energy_E",
    "energy_E_hat",
    "energy_J",
    "energy_value",
    "phi_line",
    "phi_prime",
    "gateaux_gradient",
    "cone_delta",
]


# -- model terms ------------------------------------------------------------

@dataclass(frozen=True)
class ReactionTerm:
    """f(x, s) = h(x) s^(q(x)-1) for s >= 0 (kind "power"), or the
    s-independent source f(x, s) = h(x) (kind "source"); zero for s < 0."""

    kind: str  # "power" | "source"
    h: NodeField
    q: NodeField | None = None


@dataclass(frozen=True)
class AbsorptionTerm:
    """g(x, s) = ell(x) s^(Q(x)-1) for s >= 0, zero for s < 0."""

    ell: NodeField
    Q: NodeField


@dataclass(frozen=True)
class KirchhoffTerm:
    """Saturating diffusion scale M(s) = m_inf - (m_inf - m0)/(1 + s).

    Continuous, M(0) = m0, monotone increasing to the finite limit m_inf.
    """

    m0: float
    m_inf: float


def power_reaction(h: NodeField, q: NodeField) -> ReactionTerm:
    if h.values.min() <= 0:
        raise ValueError("reaction coefficient h must be positive")
    if q.values.min() < 1:
        raise ValueError("reaction exponent q must be >= 1")
    return ReactionTerm("power", h, q)


def source_reaction(h: NodeField) -> ReactionTerm:
    if h.values.min() <= 0:
        raise ValueError("source h must be positive")
    return ReactionTerm("source", h)


def power_absorption(ell: NodeField, Q: NodeField) -> AbsorptionTerm:
    if ell.values.min() <= 0:
        raise ValueError("absorption coefficient must be positive")
    if Q.values.min() < 1:
        raise ValueError("absorption exponent must be >= 1")
    return AbsorptionTerm(ell, Q)


def saturating_kirchhoff(m0: float, m_inf: float) -> KirchhoffTerm:
    if not m0 > 0:
        raise ValueError("need M(0) = m0 > 0")
    if m_inf < m0:
        raise ValueError("need m_inf >= m0 (monotone increasing M)")
    return KirchhoffTerm(float(m0), float(m_inf))


@dataclass(frozen=True)
class EnergyModel:
    """Mesh + exponent data + optional terms selecting the functional.

    With no terms the model realizes the cone energies W / W_A; a reaction
    adds the problem-1 energy E, absorption the problem-2 energy E_hat,
    and a Kirchhoff term the nonlocal energy J.  ``eps`` is the solver's
    flux regularization; the public functionals default to eps = 0.
    """

    mesh: Mesh
    exponent: ExponentField
    anisotropy: AnisotropyModel | None = None
    reaction: ReactionTerm | None = None
    absorption: AbsorptionTerm | None = None
    kirchhoff: KirchhoffTerm | None = None
    eps: float = 0.0

    def __post_init__(self):
        if self.exponent.mesh is not self.mesh:
            raise ValueError("exponent sampled on a different mesh")
        if self.anisotropy is not None and self.anisotropy.mesh is not self.mesh:
            raise ValueError("anisotropy sampled on a different mesh")

    def with_eps(self, eps: float) -> "EnergyModel":
        return replace(self, eps=float(eps))

    def cell_weights(self) -> np.ndarray | None:
        if self.anisotropy is None or self.anisotropy.kind == "isotropic":
            return None
        return self.anisotropy.weights_at_cells()


# -- potentials -------------------------------------------------------------

def _F_cells(term: ReactionTerm, u: np.ndarray, h: np.ndarray,
             q: np.ndarray | None) -> np.ndarray:
    pos = u > 0
    out = np.zeros_like(u)
    if term.kind == "source":
        out[pos] = h[pos] * u[pos]
    else:
        out[pos] = h[pos] * u[pos] ** q[pos] / q[pos]
    return out


def _f_cells(term: ReactionTerm, u: np.ndarray, h: np.ndarray,
             q: np.ndarray | None) -> np.ndarray:
    if term.kind == "source":
        return np.where(u >= 0, h, 0.0)
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = h[pos] * u[pos] ** (q[pos] - 1.0)
    # s = 0 with q = 1 gives h * 0^0 = h, matching the power rule literally
    zero = u == 0
    if zero.any():
        out[zero] = np.where(q[zero] == 1.0, h[zero], 0.0)
    return out


def _G_cells(term: AbsorptionTerm, u: np.ndarray, ell: np.ndarray,
             Q: np.ndarray) -> np.ndarray:
    pos = u > 0
    out = np.zeros_like(u)
    out[pos] = ell[pos] * u[pos] ** Q[pos] / Q[pos]
    return out


def _g_cells(term: AbsorptionTerm, u: np.ndarray, ell: np.ndarray,
             Q: np.ndarray) -> np.ndarray:
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = ell[pos] * u[pos] ** (Q[pos] - 1.0)
    zero = u == 0
    if zero.any():
        out[zero] = np.where(Q[zero] == 1.0, ell[zero], 0.0)
    return out


def potential_F(term: ReactionTerm, x, u: float) -> float:
    """F(x, u) = integral of f(x, s) over s in [0, u]; zero for u < 0."""
    h = np.atleast_1d(term.h.at(x))
    q = np.atleast_1d(term.q.at(x)) if term.q is not None else None
    return float(_F_cells(term, np.atleast_1d(float(u)), h, q)[0])


def potential_G(term: AbsorptionTerm, x, u: float) -> float:
    """G(x, u) = integral of g(x, s) over s in [0, u]; zero for u < 0."""
    ell = np.atleast_1d(term.ell.at(x))
    Q = np.atleast_1d(term.Q.at(x))
    return float(_G_cells(term, np.atleast_1d(float(u)), ell, Q)[0])


def M_hat(term: KirchhoffTerm, t: float) -> float:
    """Antiderivative of M; satisfies m0*t <= M_hat(t) <= m_inf*t."""
    if t < 0:
        raise ValueError("M_hat is defined for t >= 0")
    return term.m_inf * t - (term.m_inf - term.m0) * np.log1p(t)


def kirchhoff_M(term: KirchhoffTerm, s: float) -> float:
    return term.m_inf - (term.m_inf - term.m0) / (1.0 + s)


# -- cone energies ----------------------------------------------------------

def _require_cone(v: NodeField):
    """Positive at interior nodes; zero trace allowed at the boundary."""
    mesh = v.mesh
    vals = v.values
    if np.any(vals[mesh.interior] <= 0) or np.any(vals[mesh.boundary_mask] < 0):
        raise ValueError("field is outside the positive cone")


def _root_field(v: NodeField, r: float) -> np.ndarray:
    return v.values if r == 1.0 else v.values ** (1.0 / r)


def _grad_rows(mesh: Mesh, nodal: np.ndarray) -> np.ndarray:
    return np.einsum("cvd,cv->cd", mesh.shape_grads, nodal[mesh.cells])


def W_functional(v: NodeField, model: EnergyModel) -> float:
    """Cone energy: integral of (r/p) |grad(v^(1/r))|^p, isotropic."""
    _require_cone(v)
    mesh = model.mesh
    r = model.exponent.r
    gw = _grad_rows(mesh, _root_field(v, r))
    p = model.exponent.cellwise()
    dens = (r / p) * _quad_form(None, gw) ** (p / 2.0)
    return float(np.sum(dens * mesh.cell_measures))


def W_A_functional(v: NodeField, model: EnergyModel) -> float:
    """Anisotropic cone energy: integral of (r/p) A(x, grad(v^(1/r))).

    Coincides with ``W_functional`` (same arithmetic) for the isotropic
    family.
    """
    w = model.cell_weights()
    if w is None:
        return W_functional(v, model)
    _require_cone(v)
    mesh = model.mesh
    r = model.exponent.r
    gw = _grad_rows(mesh, _root_field(v, r))
    p = model.exponent.cellwise()
    dens = (r / p) * _quad_form(w, gw) ** (p / 2.0)
    return float(np.sum(dens * mesh.cell_measures))


def dirichlet_part(u: NodeField, model: EnergyModel, eps: float | None = None) -> float:
    """Integral of (1/p) A(x, grad u), with optional flux regularization.

    For eps > 0 the density is ((eps^2 + |grad u|_A^2)^(p/2) - eps^p)/p,
    whose xi-gradient is the regularized flux; the subtraction keeps the
    zero field at zero energy.
    """
    if eps is None:
        eps = model.eps
    mesh = model.mesh
    gu = _grad_rows(mesh, u.values)
    p = model.exponent.cellwise()
    q = _quad_form(model.cell_weights(), gu)
    if eps > 0.0:
        dens = ((eps * eps + q) ** (p / 2.0) - eps ** p) / p
    else:
        dens = q ** (p / 2.0) / p
    return float(np.sum(dens * mesh.cell_measures))


def _reaction_integral(u: NodeField, model: EnergyModel) -> float:
    term = model.reaction
    uc = cell_average(u)
    h = cell_average(term.h)
    q = cell_average(term.q) if term.q is not None else None
    return float(np.sum(_F_cells(term, uc, h, q) * model.mesh.cell_measures))


def _absorption_integral(u: NodeField, model: EnergyModel) -> float:
    term = model.absorption
    uc = cell_average(u)
    ell = cell_average(term.ell)
    Q = cell_average(term.Q)
    return float(np.sum(_G_cells(term, uc, ell, Q) * model.mesh.cell_measures))


def energy_E(u: NodeField, model: EnergyModel, eps: float | None = None) -> float:
    """Problem-1 energy: gradient part minus the reaction potential."""
    if model.reaction is None:
        raise ValueError("energy_E needs a reaction term")
    return dirichlet_part(u, model, eps) - _reaction_integral(u, model)


def energy_E_hat(u: NodeField, model: EnergyModel, eps: float | None = None) -> float:
    """Problem-2 energy: energy_E plus the absorption potential."""
    if model.absorption is None:
        raise ValueError("energy_E_hat needs an absorption term")
    return energy_E(u, model, eps) + _absorption_integral(u, model)


def energy_J(u: NodeField, model: EnergyModel, eps: float | None = None) -> float:
    """Nonlocal energy: M_hat of the gradient part, minus the potential."""
    if model.kirchhoff is None or model.reaction is None:
        raise ValueError("energy_J needs reaction and Kirchhoff terms")
    return (M_hat(model.kirchhoff, dirichlet_part(u, model, eps))
            - _reaction_integral(u, model))


def energy_value(u: NodeField, model: EnergyModel, eps: float | None = None) -> float:
    """The energy the model realizes (J, E_hat, E, or the gradient part)."""
    if model.kirchhoff is not None:
        return energy_J(u, model, eps)
    if model.absorption is not None:
        return energy_E_hat(u, model, eps)
    if model.reaction is not None:
        return energy_E(u, model, eps)
    return dirichlet_part(u, model, eps)


# -- line restrictions on the cone ------------------------------------------

def cone_delta(v1: NodeField, v2: NodeField) -> float:
    """Half-width delta of the admissible parameter interval (-delta, 1+delta).

    Computed from nodal values as half the smallest ratio
    min(v1, v2)/|v2 - v1|, capped at 0.25; the convex combination stays in
    the cone for all theta in (-delta, 1 + delta).
    """
    a, b = v1.values, v2.values
    diff = np.abs(b - a)
    lo = np.minimum(a, b)
    mask = diff > 0
    if not mask.any():
        return 0.25
    return float(min(0.25, 0.5 * np.min(lo[mask] / diff[mask])))


def _combination(v1: NodeField, v2: NodeField, theta: float) -> NodeField:
    if v1.mesh is not v2.mesh:
        raise ValueError("fields live on different meshes")
    v = (1.0 - theta) * v1.values + theta * v2.values
    out = NodeField(v1.mesh, v)
    try:
        _require_cone(out)
    except ValueError:
        raise ValueError(
            f"combination leaves the cone at theta={theta}") from None
    return out


def phi_line(v1: NodeField, v2: NodeField, theta: float, model: EnergyModel,
             kind: str = "W") -> float:
    """Selected functional at (1-theta) v1 + theta v2.

    kind "W" / "W_A": the cone energies; kind "J_hat": the nonlocal energy
    evaluated at the r-th root of the combination.
    """
    v = _combination(v1, v2, theta)
    if kind == "W":
        return W_functional(v, model)
    if kind == "W_A":
        return W_A_functional(v, model)
    if kind == "J_hat":
        u = NodeField(model.mesh, _root_field(v, model.exponent.r))
        return energy_J(u, model, eps=0.0)
    raise ValueError(f"unknown line functional {kind!r}")


def _quotient(v1: NodeField, v2: NodeField, v: NodeField, r: float) -> np.ndarray:
    """Nodewise (v2 - v1) / v^(1 - 1/r), zero where v = v1 = v2 = 0."""
    diff = v2.values - v1.values
    if r == 1.0:
        return diff.copy()
    vv = v.values
    out = np.zeros_like(diff)
    pos = vv > 0
    out[pos] = diff[pos] / vv[pos] ** (1.0 - 1.0 / r)
    bad = ~pos & (diff != 0)
    if bad.any():
        raise ValueError("quotient undefined: v vanishes where v1 != v2")
    return out


def phi_prime(v1: NodeField, v2: NodeField, theta: float, model: EnergyModel,
              kind: str = "W") -> float:
    """Exact derivative in theta of ``phi_line`` at the same arguments.

    Flux form: sum over cells of a(x, grad w) . grad s times measure,
    where w is the root field of the combination and s the nodewise
    quotient (v2 - v1)/v^(1-1/r).  For kind "J_hat" the flux part is
    scaled by M(dirichlet part)/r and the reaction contributes
    -(1/r) sum f(x, w) s.
    """
    v = _combination(v1, v2, theta)
    mesh = model.mesh
    r = model.exponent.r
    p = model.exponent.cellwise()
    w_nodal = _root_field(v, r)
    gw = _grad_rows(mesh, w_nodal)
    s = _quotient(v1, v2, v, r)
    gs = _grad_rows(mesh, s)
    weights = None if kind == "W" else model.cell_weights()
    flux = _flux_rows(p, weights, gw)
    base = float(np.sum(np.einsum("cd,cd->c", flux, gs) * mesh.cell_measures))
    if kind in ("W", "W_A"):
        return base
    if kind != "J_hat":
        raise ValueError(f"unknown line functional {kind!r}")
    if model.kirchhoff is None or model.reaction is None:
        raise ValueError("J_hat needs reaction and Kirchhoff terms")
    q = _quad_form(weights, gw)
    D = float(np.sum(q ** (p / 2.0) / p * mesh.cell_measures))
    pref = kirchhoff_M(model.kirchhoff, D)
    term = model.reaction
    wc = cell_average(NodeField(mesh, w_nodal))
    h = cell_average(term.h)
    qq = cell_average(term.q) if term.q is not None else None
    f = _f_cells(term, wc, h, qq)
    sc = cell_average(NodeField(mesh, s))
    reaction = float(np.sum(f * sc * mesh.cell_measures))
    return pref * base / r - reaction / r


# -- Gateaux gradient for the solver ----------------------------------------

def gateaux_gradient(model: EnergyModel, u: NodeField,
                     eps: float | None = None) -> NodeField:
    """Nodal derivative of the discrete energy; boundary entries are zero.

    The pairing of the returned field with any nodal test field equals the
    directional derivative of the discrete energy at u.  Assembled from
    per-cell flux contributions plus reaction/absorption terms; a present
    Kirchhoff term scales the flux part by M(dirichlet part).
    """
    if eps is None:
        eps = model.eps
    mesh = model.mesh
    p = model.exponent.cellwise()
    w = model.cell_weights()
    gu = _grad_rows(mesh, u.values)
    flux = _flux_rows(p, w, gu, eps)
    if model.kirchhoff is not None:
        flux = flux * kirchhoff_M(model.kirchhoff, dirichlet_part(u, model, eps))

    m = mesh.cell_measures
    contrib = np.einsum("cd,cvd->cv", flux * m[:, None], mesh.shape_grads)

    n_loc = mesh.dimension + 1
    uc = cell_average(u)
    if model.reaction is not None:
        term = model.reaction
        h = cell_average(term.h)
        q = cell_average(term.q) if term.q is not None else None
        contrib -= (_f_cells(term, uc, h, q) * m / n_loc)[:, None]
    if model.absorption is not None:
        term = model.absorption
        ell = cell_average(term.ell)
        Q = cell_average(term.Q)
        contrib += (_g_cells(term, uc, ell, Q) * m / n_loc)[:, None]

    g = np.zeros(mesh.n_nodes)
    np.add.at(g, mesh.cells, contrib)
    g[mesh.boundary_mask] = 0.0
    return NodeField(mesh, g)
