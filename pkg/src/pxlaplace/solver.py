"""Energy-minimization solver, eigenpair computation and diagnostics.

The solver runs damped descent on the regularized energy with a geometric
continuation in the flux regularization eps: the degenerate/singular
|grad u|^(p-2) factor is replaced by (eps^2 + |grad u|^2)^((p-2)/2) and
eps is driven from ``eps0`` down to ``eps_min``.  Descent directions are
preconditioned by the lagged-diffusivity metric (the SPD weighted
stiffness assembled from the current flux weights); a plain backtracking
line search on the regularized energy guarantees monotone decrease, and
every accepted iterate is polished to its absolute value (positive part
when an absorption term is present), which never increases the discrete
energy.  Reported residuals use the unregularized flux.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .energy import (EnergyModel, dirichlet_part, energy_value,
                     gateaux_gradient, kirchhoff_M)
from .grid import Mesh, NodeField
from .inequality import diaz_saa_gap
from .problems import ProblemSpec, build_energy_model, sharpness_regime, \
    validate_f, validate_g, validate_M

__all__ = [
    "SolverOptions",
    "SolveReport",
    "UniquenessReport",
    "minimize_energy",
    "initial_guess",
    "weak_residual",
    "solve_problem1",
    "solve_problem2",
    "solve_kirchhoff",
    "first_eigenpair",
    "uniqueness_experiment",
    "hopf_diagnostic",
]


@dataclass(frozen=True)
class SolverOptions:
    eps0: float = 1e-2
    eps_min: float = 1e-8
    continuation_factor: float = 0.1
    grad_tol: float = 1e-9
    max_iters: int = 5000
    armijo: float = 1e-4
    shrink: float = 0.5
    init: object = "bump"  # "bump" | "random" | NodeField
    abs_polish: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.eps_min > self.eps0:
            raise ValueError("need eps_min <= eps0")
        if self.grad_tol <= 0:
            raise ValueError("grad_tol must be positive")


@dataclass(frozen=True)
class SolveReport:
    solution: NodeField
    energy: float
    residual_max: float
    iterations: tuple
    converged: bool
    positivity_ok: bool
    hopf_margin: float
    negative_energy: bool
    kirchhoff_M0: float | None = None
    init_negative_energy: bool | None = None
    regime: str | None = None

    def as_dict(self) -> dict:
        return {
            "energy": self.energy,
            "residual_max": self.residual_max,
            "iterations": list(self.iterations),
            "converged": self.converged,
            "positivity_ok": self.positivity_ok,
            "hopf_margin": self.hopf_margin,
            "negative_energy": self.negative_energy,
            "kirchhoff_M0": self.kirchhoff_M0,
            "init_negative_energy": self.init_negative_energy,
            "regime": self.regime,
            "sup_u": float(np.abs(self.solution.values).max()),
        }


def _bump_profile(mesh: Mesh) -> np.ndarray:
    """Nonnegative profile vanishing on the boundary, scaled to max 1."""
    if mesh.dimension == 1:
        a, b = mesh.bounds
        x = mesh.nodes[:, 0]
        prof = (x - a) * (b - x)
    else:
        ax, bx, ay, by = mesh.bounds
        x, y = mesh.nodes[:, 0], mesh.nodes[:, 1]
        prof = (x - ax) * (bx - x) * (y - ay) * (by - y)
    return prof / prof.max()


def initial_guess(model: EnergyModel, opts: SolverOptions,
                  rng: np.random.Generator | None = None):
    """Starting field for the descent, scaled to negative energy when possible.

    A bump (or seeded random positive field, zeroed on the boundary) is
    scanned over a logarithmic amplitude grid; the amplitude minimizing
    the model energy is kept.  Returns (field, found_negative) where the
    flag records whether some amplitude achieved negative energy; a
    user-provided field passes through unchanged with flag None.
    """
    if isinstance(opts.init, NodeField):
        return opts.init, None
    mesh = model.mesh
    if opts.init == "bump":
        prof = _bump_profile(mesh)
    elif opts.init == "random":
        rng = np.random.default_rng(opts.seed) if rng is None else rng
        prof = np.exp(rng.uniform(-1.0, 1.0, mesh.n_nodes))
        prof[mesh.boundary_mask] = 0.0
    else:
        raise ValueError(f"unknown init {opts.init!r}")
    base = NodeField(mesh, prof)
    if model.reaction is None:
        return base, None
    ts = np.geomspace(1e-4, 10.0, 60)
    energies = [energy_value(NodeField(mesh, t * prof), model, eps=0.0)
                for t in ts]
    k = int(np.argmin(energies))
    return NodeField(mesh, ts[k] * prof), bool(energies[k] < 0.0)


def _interior_matrix(model: EnergyModel, u: np.ndarray, eps: float,
                     pref: float) -> sp.csr_array:
    """Lagged-diffusivity metric: weighted stiffness on interior nodes."""
    mesh = model.mesh
    p = model.exponent.cellwise()
    G = mesh.shape_grads
    gu = np.einsum("cvd,cv->cd", G, u[mesh.cells])
    w = model.cell_weights()
    if w is None:
        q = np.einsum("cd,cd->c", gu, gu)
    else:
        q = np.einsum("cd,cd->c", w * gu, gu)
    omega = pref * (eps * eps + q) ** ((p - 2.0) / 2.0) * mesh.cell_measures
    if w is None:
        loc = np.einsum("c,cid,cjd->cij", omega, G, G)
    else:
        loc = np.einsum("c,cd,cid,cjd->cij", omega, w, G, G)

    nloc = mesh.dimension + 1
    idx = np.full(mesh.n_nodes, -1, dtype=int)
    interior = mesh.interior
    idx[interior] = np.arange(interior.size)
    rows = np.repeat(idx[mesh.cells], nloc, axis=1).ravel()
    cols = np.tile(idx[mesh.cells], (1, nloc)).ravel()
    vals = loc.ravel()
    keep = (rows >= 0) & (cols >= 0)
    K = sp.coo_array((vals[keep], (rows[keep], cols[keep])),
                     shape=(interior.size, interior.size))
    return K.tocsr()


def _polish(u: np.ndarray, model: EnergyModel) -> np.ndarray:
    # with an absorption term, |u| could increase the energy; the positive
    # part never does
    if model.absorption is not None:
        return np.maximum(u, 0.0)
    return np.abs(u)


def minimize_energy(model: EnergyModel, opts: SolverOptions) -> SolveReport:
    """Minimize the model energy over fields vanishing on the boundary.

    Runs the eps-continuation described in the module docstring; each
    stage ends when the max-norm of the regularized nodal gradient drops
    below ``grad_tol``.  The report carries the unregularized residual,
    positivity and boundary-slope diagnostics, and the negative-energy
    certificate of nontriviality.
    """
    mesh = model.mesh
    interior = mesh.interior
    u0, init_flag = initial_guess(model, opts)
    u = u0.values.copy()
    u[mesh.boundary_mask] = 0.0

    ladder = []
    eps = opts.eps0
    while eps > opts.eps_min:
        ladder.append(eps)
        eps *= opts.continuation_factor
    ladder.append(opts.eps_min)

    iterations = []
    converged = False
    for eps in ladder:
        stage_model = model.with_eps(eps)
        pref = 1.0
        n_it = 0
        for n_it in range(opts.max_iters):
            g = gateaux_gradient(stage_model, NodeField(mesh, u)).values
            if np.abs(g[interior]).max() <= opts.grad_tol:
                converged = True
                break
            converged = False
            if model.kirchhoff is not None:
                pref = kirchhoff_M(model.kirchhoff,
                                   dirichlet_part(NodeField(mesh, u), model, eps))
            K = _interior_matrix(stage_model, u, eps, pref)
            d = np.zeros_like(u)
            d[interior] = spla.spsolve(K, -g[interior])
            gd = float(g @ d)
            if not np.isfinite(gd) or gd >= 0.0:
                d = -g
                gd = float(g @ d)
                if gd >= 0.0:
                    break
            e0 = energy_value(NodeField(mesh, u), stage_model)
            if not np.isfinite(e0):
                raise ValueError("non-finite energy: bad model inputs")
            t = 1.0
            accepted = False
            while t > 1e-18:
                trial = u + t * d
                e1 = energy_value(NodeField(mesh, trial), stage_model)
                if e1 <= e0 + opts.armijo * t * gd:
                    accepted = True
                    break
                t *= opts.shrink
            if not accepted:
                break  # at the floating-point floor of this stage
            u = trial
            if opts.abs_polish:
                polished = _polish(u, model)
                e_pol = energy_value(NodeField(mesh, polished), stage_model)
                if e_pol > e1 + 1e-12 * (1.0 + abs(e1)):
                    raise AssertionError("polish increased the energy")
                u, e1 = polished, e_pol
            if e1 > e0 + 1e-12 * (1.0 + abs(e0)):
                raise AssertionError("energy increased within a stage")
        iterations.append(n_it)

    sol = NodeField(mesh, u)
    residual = float(np.abs(
        gateaux_gradient(model, sol, eps=0.0).values[interior]).max())
    e_final = energy_value(sol, model, eps=0.0)
    m0 = None
    if model.kirchhoff is not None:
        m0 = kirchhoff_M(model.kirchhoff, dirichlet_part(sol, model, eps=0.0))
    return SolveReport(
        solution=sol,
        energy=float(e_final),
        residual_max=residual,
        iterations=tuple(iterations),
        converged=bool(converged),
        positivity_ok=bool(np.all(u[interior] > 0.0)),
        hopf_margin=hopf_diagnostic(sol),
        negative_energy=bool(e_final < 0.0),
        kirchhoff_M0=m0,
        init_negative_energy=init_flag,
    )


def weak_residual(u: NodeField, spec: ProblemSpec) -> float:
    """Max-norm of the discrete weak-form residual over nodal test functions.

    Equals the max-norm of the unregularized nodal energy gradient; each
    entry is the pairing of the equation with one interior nodal basis
    function and inherits that node's cell-patch measure.
    """
    if np.any(u.values[u.mesh.boundary_mask] != 0):
        raise ValueError("weak_residual needs a zero-trace field")
    model = build_energy_model(spec)
    g = gateaux_gradient(model, u, eps=0.0)
    return float(np.abs(g.values[u.mesh.interior]).max())


def _attach(report: SolveReport, spec: ProblemSpec) -> SolveReport:
    try:
        regime = sharpness_regime(spec).name
    except ValueError:
        regime = None
    return replace(report, regime=regime)


def solve_problem1(spec: ProblemSpec, opts: SolverOptions,
                   override: bool = False) -> SolveReport:
    """Solve the subhomogeneous reaction problem by energy minimization."""
    val = validate_f(spec.reaction, spec.exponent.r)
    if not val.passed and not override:
        raise ValueError(
            "reaction hypotheses fail: "
            + "; ".join(f"{e.name}: {e.witness}" for e in val.failures()))
    return _attach(minimize_energy(build_energy_model(spec), opts), spec)


def solve_problem2(spec: ProblemSpec, opts: SolverOptions,
                   override: bool = False) -> SolveReport:
    """Solve the absorption variant by minimizing the extended energy."""
    val_f = validate_f(spec.reaction, spec.exponent.r)
    val_g = validate_g(spec.absorption, spec.exponent.r, spec.exponent,
                       spec.mesh.dimension)
    if not (val_f.passed and val_g.passed) and not override:
        bad = val_f.failures() + val_g.failures()
        raise ValueError("hypotheses fail: "
                         + "; ".join(f"{e.name}: {e.witness}" for e in bad))
    return _attach(minimize_energy(build_energy_model(spec), opts), spec)


def solve_kirchhoff(spec: ProblemSpec, opts: SolverOptions,
                    override: bool = False) -> SolveReport:
    """Solve the nonlocal problem; the flux carries the M(.) prefactor."""
    val_f = validate_f(spec.reaction, spec.exponent.r)
    val_m = validate_M(spec.kirchhoff)
    if not (val_f.passed and val_m.passed) and not override:
        bad = val_f.failures() + val_m.failures()
        raise ValueError("hypotheses fail: "
                         + "; ".join(f"{e.name}: {e.witness}" for e in bad))
    return _attach(minimize_energy(build_energy_model(spec), opts), spec)


# -- first eigenpair ---------------------------------------------------------

def _rayleigh(mesh: Mesh, r: float, u: np.ndarray):
    G = mesh.shape_grads
    gu = np.einsum("cvd,cv->cd", G, u[mesh.cells])
    q = np.einsum("cd,cd->c", gu, gu)
    num = float(np.sum(q ** (r / 2.0) * mesh.cell_measures))
    uc = u[mesh.cells].mean(axis=1)
    den = float(np.sum(np.abs(uc) ** r * mesh.cell_measures))
    return num, den


def first_eigenpair(mesh: Mesh, r: float, tol: float = 1e-12,
                    max_iters: int = 400):
    """Smallest Rayleigh quotient of the r-homogeneous gradient energy.

    Minimizes (integral |grad u|^r) / (integral |u|^r) over zero-trace
    fields by normalized preconditioned descent from the bump profile.
    Returns (lam, phi) with phi nonnegative and its r-modular normalized
    to one; lam is the Rayleigh value of phi itself.
    """
    if not r > 1:
        raise ValueError("need r > 1")
    interior = mesh.interior
    G = mesh.shape_grads
    m = mesh.cell_measures
    nloc = mesh.dimension + 1

    u = _bump_profile(mesh)
    num, den = _rayleigh(mesh, r, u)
    u = u / den ** (1.0 / r)

    idx = np.full(mesh.n_nodes, -1, dtype=int)
    idx[interior] = np.arange(interior.size)
    rows_t = np.repeat(idx[mesh.cells], nloc, axis=1).ravel()
    cols_t = np.tile(idx[mesh.cells], (1, nloc)).ravel()
    keep = (rows_t >= 0) & (cols_t >= 0)

    lam = np.inf
    for _ in range(max_iters):
        gu = np.einsum("cvd,cv->cd", G, u[mesh.cells])
        q = np.einsum("cd,cd->c", gu, gu)
        uc = u[mesh.cells].mean(axis=1)
        num = float(np.sum(q ** (r / 2.0) * m))
        den = float(np.sum(np.abs(uc) ** r * m))
        lam = num / den

        flux = np.zeros_like(gu)
        nz = q > 0
        flux[nz] = (r * q[nz] ** ((r - 2.0) / 2.0))[:, None] * gu[nz]
        gN = np.zeros(mesh.n_nodes)
        np.add.at(gN, mesh.cells,
                  np.einsum("cd,cvd->cv", flux * m[:, None], G))
        gden_c = r * np.sign(uc) * np.abs(uc) ** (r - 1.0) * m / nloc
        gM = np.zeros(mesh.n_nodes)
        np.add.at(gM, mesh.cells, np.broadcast_to(gden_c[:, None],
                                                  (mesh.n_cells, nloc)))
        g = (gN - lam * gM) / den
        g[mesh.boundary_mask] = 0.0
        if np.abs(g[interior]).max() <= tol * max(1.0, lam):
            break

        omega = (1e-30 + q) ** ((r - 2.0) / 2.0) * m
        loc = np.einsum("c,cid,cjd->cij", omega, G, G)
        K = sp.coo_array((loc.ravel()[keep], (rows_t[keep], cols_t[keep])),
                         shape=(interior.size, interior.size)).tocsr()
        d = np.zeros_like(u)
        d[interior] = spla.spsolve(K, -g[interior])

        t = 1.0
        improved = False
        while t > 1e-16:
            trial = np.abs(u + t * d)
            n2, d2 = _rayleigh(mesh, r, trial)
            if d2 > 0 and n2 / d2 < lam:
                u = trial / d2 ** (1.0 / r)
                improved = True
                break
            t *= 0.5
        if not improved:
            break

    num, den = _rayleigh(mesh, r, u)
    phi = NodeField(mesh, np.abs(u) / den ** (1.0 / r))
    num, den = _rayleigh(mesh, r, phi.values)
    return num / den, phi


# -- uniqueness and boundary diagnostics -------------------------------------

@dataclass(frozen=True)
class UniquenessReport:
    max_pairwise_distance: float
    solution_scale: float  # largest sup-norm among the converged solutions
    gaps: tuple
    n_runs: int
    all_converged: bool
    all_positive: bool
    regime: str
    expected_multiplicity: bool
    passed: bool | None  # None when inconclusive or multiplicity expected


def uniqueness_experiment(spec: ProblemSpec, opts: SolverOptions,
                          n_inits: int, seed: int, tol: float) -> UniquenessReport:
    """Multi-start uniqueness probe.

    Solves from the bump plus ``n_inits`` seeded random positive inits and
    reports the largest pairwise max-norm distance among converged
    positive solutions, together with the operator-difference gap of each
    pair (near zero at a common solution).  In the eigenvalue-degenerate
    regime multiplicity is expected and no verdict is issued.
    """
    regime = sharpness_regime(spec).name
    model = build_energy_model(spec)
    runs = [minimize_energy(model, replace(opts, init="bump"))]
    for k in range(n_inits):
        runs.append(minimize_energy(
            model, replace(opts, init="random", seed=seed + k)))

    all_converged = all(r.converged for r in runs)
    usable = [r.solution for r in runs if r.converged and r.positivity_ok]
    dist = 0.0
    scale = max((float(np.abs(s.values).max()) for s in usable), default=0.0)
    gaps = []
    for i in range(len(usable)):
        for j in range(i + 1, len(usable)):
            dist = max(dist, float(np.abs(
                usable[i].values - usable[j].values).max()))
            gaps.append(diaz_saa_gap(usable[i], usable[j], model).gap)

    expected_multiplicity = regime == "degenerate-eigen"
    if not all_converged or len(usable) < 2:
        passed = None
    elif expected_multiplicity:
        passed = None
    else:
        passed = dist <= tol
    return UniquenessReport(
        max_pairwise_distance=dist,
        solution_scale=scale,
        gaps=tuple(gaps),
        n_runs=len(runs),
        all_converged=all_converged,
        all_positive=all(r.positivity_ok for r in runs),
        regime=regime,
        expected_multiplicity=expected_multiplicity,
        passed=passed,
    )


def hopf_diagnostic(u: NodeField) -> float:
    """Smallest inward difference quotient over boundary nodes.

    For each boundary node, (value at the nearest interior node) / distance;
    a positive minimum certifies the discrete boundary-slope sign of the
    maximum principle.  The field must vanish on the boundary.
    """
    mesh = u.mesh
    if np.any(u.values[mesh.boundary_mask] != 0):
        raise ValueError("hopf_diagnostic needs a zero-trace field")
    bidx = np.flatnonzero(mesh.boundary_mask)
    iidx = mesh.interior
    inodes = mesh.nodes[iidx]
    worst = np.inf
    for start in range(0, bidx.size, 256):
        chunk = bidx[start:start + 256]
        d = np.linalg.norm(mesh.nodes[chunk][:, None, :] - inodes[None, :, :],
                           axis=-1)
        nearest = np.argmin(d, axis=1)
        quot = u.values[iidx[nearest]] / d[np.arange(chunk.size), nearest]
        worst = min(worst, float(quot.min()))
    return worst
