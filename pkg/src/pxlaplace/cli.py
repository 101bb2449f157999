"""Command-line front end.

Subcommands: solve, check-convexity, check-diaz-saa, check-comparison,
eig, validate, sweep.  Configuration is a JSON document; coefficient
fields are textual scalar expressions over x (and y in 2D), sampled at
the mesh nodes.  Runs are deterministic for a fixed config and seed, and
all floats are printed in shortest round-trip form, so repeated runs are
byte-identical.  Messages go to stderr, data to files and stdout.

Exit codes: 0 success/pass, 1 check failure, 2 usage/config error,
3 solver nonconvergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from . import energy, grid, inequality, problems, solver
from .exponents import exponent_field
from .expressions import ExprError

__all__ = ["main", "run_command", "load_config", "ConfigError"]

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_NONCONVERGED = 3


class ConfigError(ValueError):
    pass


# -- config ------------------------------------------------------------------

def load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed config {path}: {e}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be an object")
    return cfg


def _need(cfg: dict, key: str, where: str = "config"):
    if key not in cfg:
        raise ConfigError(f"{where} is missing required key {key!r}")
    return cfg[key]


def _build_mesh(cfg: dict, args) -> grid.Mesh:
    dom = _need(cfg, "domain")
    kind = _need(dom, "kind", "domain")
    if kind == "interval":
        n = args.n or dom.get("n", 64)
        return grid.build_interval(dom.get("a", 0.0), dom.get("b", 1.0), n)
    if kind == "rectangle":
        nx = args.nx or dom.get("nx", 16)
        ny = args.ny or dom.get("ny", 16)
        return grid.build_rectangle(dom.get("ax", 0.0), dom.get("bx", 1.0),
                                    dom.get("ay", 0.0), dom.get("by", 1.0),
                                    nx, ny)
    raise ConfigError(f"unknown domain kind {kind!r}")


def _field(mesh, source, what: str) -> grid.NodeField:
    try:
        return grid.interpolate(mesh, source)
    except (ExprError, ValueError) as e:
        raise ConfigError(f"bad expression for {what}: {e}") from None


def _build_cone_model(cfg: dict, mesh) -> energy.EnergyModel:
    """Exponent + optional anisotropy block, for the check suites."""
    from . import anisotropy as aniso_mod

    exp_cfg = _need(cfg, "exponent")
    try:
        exponent = exponent_field(mesh, _need(exp_cfg, "p", "exponent"),
                                  float(_need(exp_cfg, "r", "exponent")))
    except (ExprError, ValueError) as e:
        raise ConfigError(f"bad exponent block: {e}") from None
    aniso = None
    acfg = cfg.get("anisotropy")
    if acfg:
        kind = acfg.get("kind", "isotropic")
        if kind == "weighted-quadratic":
            weights = [_field(mesh, w, f"anisotropy weight {i}")
                       for i, w in enumerate(_need(acfg, "weights",
                                                   "anisotropy"))]
            try:
                aniso = aniso_mod.weighted_quadratic(exponent, weights)
            except ValueError as e:
                raise ConfigError(f"bad anisotropy block: {e}") from None
        elif kind != "isotropic":
            raise ConfigError(f"unknown anisotropy kind {kind!r}")
    return energy.EnergyModel(mesh, exponent, anisotropy=aniso)


def _build_problem(cfg: dict, mesh) -> problems.ProblemSpec:
    exp_cfg = _need(cfg, "exponent")
    try:
        exponent = exponent_field(mesh, _need(exp_cfg, "p", "exponent"),
                                  float(_need(exp_cfg, "r", "exponent")))
    except (ExprError, ValueError) as e:
        raise ConfigError(f"bad exponent block: {e}") from None

    prob = _need(cfg, "problem")
    kind = _need(prob, "kind", "problem")
    scale = float(prob.get("h_scale", 1.0))
    h = _field(mesh, prob.get("h", "1"), "h")
    if scale != 1.0:
        h = grid.NodeField(mesh, scale * h.values)
    try:
        if "q" in prob:
            reaction = energy.power_reaction(h, _field(mesh, prob["q"], "q"))
        else:
            reaction = energy.source_reaction(h)
        absorption = None
        if kind == "problem2":
            absorption = energy.power_absorption(
                _field(mesh, _need(prob, "ell", "problem"), "ell"),
                _field(mesh, _need(prob, "Q", "problem"), "Q"))
        kirchhoff = None
        if kind == "kirchhoff":
            kirchhoff = energy.saturating_kirchhoff(
                float(_need(prob, "m0", "problem")),
                float(_need(prob, "m_inf", "problem")))
        return problems.ProblemSpec(kind, mesh, exponent, reaction,
                                    absorption, kirchhoff)
    except ValueError as e:
        raise ConfigError(f"bad problem block: {e}") from None


def _solver_options(cfg: dict) -> solver.SolverOptions:
    s = cfg.get("solver", {})
    known = {"eps0", "eps_min", "continuation_factor", "grad_tol",
             "max_iters", "armijo", "shrink", "init", "abs_polish", "seed"}
    unknown = set(s) - known
    if unknown:
        raise ConfigError(f"unknown solver option(s): {sorted(unknown)}")
    try:
        return solver.SolverOptions(**s)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad solver block: {e}") from None


# -- deterministic output ----------------------------------------------------

def _fmt(x) -> str:
    """Shortest round-trip decimal form of a float."""
    return repr(float(x))


def _json_ready(obj):
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _write_atomic(path: str, data: str):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump_report(report: dict, path: str | None, quiet: bool):
    text = json.dumps(_json_ready(report), sort_keys=True, indent=2) + "\n"
    if path is not None:
        _write_atomic(path, text)
    if not quiet:
        sys.stdout.write(text)


def _solution_table(u: grid.NodeField) -> str:
    mesh = u.mesh
    lines = ["x,u" if mesh.dimension == 1 else "x,y,u"]
    for coords, val in zip(mesh.nodes, u.values):
        lines.append(",".join(_fmt(c) for c in coords) + "," + _fmt(val))
    return "\n".join(lines) + "\n"


def _out_path(args, cfg: dict, name: str) -> str | None:
    out = args.out or cfg.get("output", {}).get("dir")
    if out is None:
        return None
    return os.path.join(out, name)


# -- sampled instances for the check suites ----------------------------------

def _random_cone_field(rng, mesh, zero_boundary: bool) -> grid.NodeField:
    vals = rng.uniform(0.1, 10.0, mesh.n_nodes)
    if zero_boundary:
        vals[mesh.boundary_mask] = 0.0
    return grid.NodeField(mesh, vals)


def _cmd_check_convexity(cfg, args) -> int:
    mesh = _build_mesh(cfg, args)
    model = _build_cone_model(cfg, mesh)
    rng = np.random.default_rng(args.seed)
    thetas = np.linspace(0.05, 0.95, 7)
    worst = np.inf
    failures = 0
    for _ in range(args.samples):
        v1 = _random_cone_field(rng, mesh, zero_boundary=False)
        v2 = _random_cone_field(rng, mesh, zero_boundary=False)
        rep = inequality.check_ray_convexity(v1, v2, model, thetas,
                                             kind="W_A")
        worst = min(worst, rep.min_slack / rep.scale)
        failures += 0 if rep.passed else 1
    report = {
        "check": "convexity",
        "samples": args.samples,
        "seed": args.seed,
        "worst_relative_slack": worst,
        "failures": failures,
        "passed": failures == 0,
    }
    _dump_report(report, _out_path(args, cfg, "check_convexity.json"), args.quiet)
    return EXIT_OK if failures == 0 else EXIT_CHECK_FAILED


def _cmd_check_diaz_saa(cfg, args) -> int:
    mesh = _build_mesh(cfg, args)
    model = _build_cone_model(cfg, mesh)
    rng = np.random.default_rng(args.seed)
    min_gap = np.inf
    failures = 0
    for _ in range(args.samples):
        w1 = _random_cone_field(rng, mesh, zero_boundary=True)
        w2 = _random_cone_field(rng, mesh, zero_boundary=True)
        rep = inequality.diaz_saa_gap(w1, w2, model)
        rel = rep.gap / (abs(rep.i1) + abs(rep.i2) + 1.0)
        min_gap = min(min_gap, rel)
        tol = 1e-10 if mesh.dimension == 1 else 1e-8
        failures += 0 if rel >= -tol else 1
    report = {
        "check": "diaz-saa",
        "samples": args.samples,
        "seed": args.seed,
        "min_relative_gap": min_gap,
        "failures": failures,
        "passed": failures == 0,
    }
    _dump_report(report, _out_path(args, cfg, "check_diaz_saa.json"), args.quiet)
    return EXIT_OK if failures == 0 else EXIT_CHECK_FAILED


def _cmd_check_comparison(cfg, args) -> int:
    mesh = _build_mesh(cfg, args)
    model = _build_cone_model(cfg, mesh)
    opts = _solver_options(cfg)
    rng = np.random.default_rng(args.seed)
    worst = -np.inf
    failures = 0
    for _ in range(args.samples):
        base = rng.uniform(0.5, 1.5)
        extra = rng.uniform(0.0, 1.0, mesh.n_nodes)
        f1 = grid.constant_field(mesh, base)
        f2 = grid.NodeField(mesh, base + extra)
        verdict = inequality.weak_comparison_experiment(model, f1, f2, opts,
                                                        tol=1e-6)
        worst = max(worst, verdict.max_excess)
        failures += 0 if (verdict.hypothesis_ok and verdict.conclusion_ok) else 1
    report = {
        "check": "comparison",
        "samples": args.samples,
        "seed": args.seed,
        "worst_excess": worst,
        "failures": failures,
        "passed": failures == 0,
    }
    _dump_report(report, _out_path(args, cfg, "check_comparison.json"), args.quiet)
    return EXIT_OK if failures == 0 else EXIT_CHECK_FAILED


def _cmd_solve(cfg, args) -> int:
    from dataclasses import replace as _replace

    mesh = _build_mesh(cfg, args)
    spec = _build_problem(cfg, mesh)
    opts = _solver_options(cfg)
    seed = args.seed if args.seed is not None else cfg.get("seed")
    if seed is not None and "seed" not in cfg.get("solver", {}):
        opts = _replace(opts, seed=int(seed))
    dispatch = {"problem1": solver.solve_problem1,
                "problem2": solver.solve_problem2,
                "kirchhoff": solver.solve_kirchhoff}
    try:
        rep = dispatch[spec.kind](spec, opts,
                                  override=bool(cfg.get("override", False)))
    except ValueError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE
    table = _solution_table(rep.solution)
    path = _out_path(args, cfg, "solution.csv")
    if path is not None:
        _write_atomic(path, table)
    _dump_report(rep.as_dict(), _out_path(args, cfg, "report.json"), args.quiet)
    return EXIT_OK if rep.converged else EXIT_NONCONVERGED


def _cmd_eig(cfg, args) -> int:
    base_cfg = dict(cfg)
    levels = args.levels
    lambdas = []
    sizes = []
    mesh0 = _build_mesh(base_cfg, args)
    if mesh0.dimension != 1:
        raise ConfigError("eig refinement ladder is 1D only")
    a, b = mesh0.bounds
    n = mesh0.resolution[0]
    for k in range(levels):
        mesh = grid.build_interval(a, b, n * 2 ** k)
        lam, _ = solver.first_eigenpair(mesh, args.r)
        sizes.append(n * 2 ** k)
        lambdas.append(lam)
    extrapolated = lambdas[-1]
    if len(lambdas) >= 2:
        # eliminate the h^2 error term pairwise
        seq = list(lambdas)
        while len(seq) > 1:
            seq = [(4.0 * seq[i + 1] - seq[i]) / 3.0 for i in range(len(seq) - 1)]
        extrapolated = seq[0]
    report = {
        "command": "eig",
        "r": args.r,
        "sizes": sizes,
        "lambdas": lambdas,
        "extrapolated": extrapolated,
    }
    _dump_report(report, _out_path(args, cfg, "eig_report.json"), args.quiet)
    return EXIT_OK


def _cmd_validate(cfg, args) -> int:
    mesh = _build_mesh(cfg, args)
    spec = _build_problem(cfg, mesh)
    r = spec.exponent.r
    out = {"f": problems.validate_f(spec.reaction, r).as_dict()}
    ok = out["f"]["passed"]
    if spec.absorption is not None:
        rep = problems.validate_g(spec.absorption, r, spec.exponent,
                                  mesh.dimension)
        out["g"] = rep.as_dict()
        ok = ok and rep.passed
        if spec.reaction.kind == "power":
            chain = problems.validate_corollary_chain(
                spec.reaction.q, spec.absorption.Q, r, spec.exponent)
            out["corollary_chain"] = chain.as_dict()
            ok = ok and chain.passed
    if spec.kirchhoff is not None:
        rep = problems.validate_M(spec.kirchhoff)
        out["M"] = rep.as_dict()
        ok = ok and rep.passed
    if spec.reaction.kind == "power":
        tag = problems.sharpness_regime(spec)
        out["regime"] = {"name": tag.name,
                         "frac_p_above_r": tag.frac_p_above_r,
                         "frac_q_below_r": tag.frac_q_below_r}
    out["passed"] = ok
    _dump_report(out, _out_path(args, cfg, "validation.json"), args.quiet)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _set_by_path(cfg: dict, dotted: str, value):
    parts = dotted.split(".")
    node = cfg
    for key in parts[:-1]:
        if not isinstance(node.get(key), dict):
            raise ConfigError(f"sweep parameter path {dotted!r} not in config")
        node = node[key]
    if parts[-1] not in node:
        raise ConfigError(f"sweep parameter path {dotted!r} not in config")
    node[parts[-1]] = value


def _cmd_sweep(cfg, args) -> int:
    sweep = _need(cfg, "sweep")
    param = _need(sweep, "parameter", "sweep")
    values = _need(sweep, "values", "sweep")
    if not isinstance(values, list) or not values:
        raise ConfigError("sweep.values must be a nonempty list")
    rows = []
    any_nonconv = False
    for val in values:
        run_cfg = json.loads(json.dumps(cfg))  # deep copy
        _set_by_path(run_cfg, param, val)
        mesh = _build_mesh(run_cfg, args)
        spec = _build_problem(run_cfg, mesh)
        opts = _solver_options(run_cfg)
        dispatch = {"problem1": solver.solve_problem1,
                    "problem2": solver.solve_problem2,
                    "kirchhoff": solver.solve_kirchhoff}
        rep = dispatch[spec.kind](spec, opts,
                                  override=bool(run_cfg.get("override", False)))
        any_nonconv = any_nonconv or not rep.converged
        rows.append((val, rep))
    lines = ["value,energy,sup_u,residual_max,converged"]
    for val, rep in rows:
        lines.append(",".join([
            _fmt(val), _fmt(rep.energy),
            _fmt(np.abs(rep.solution.values).max()),
            _fmt(rep.residual_max), str(int(rep.converged)),
        ]))
    table = "\n".join(lines) + "\n"
    path = _out_path(args, cfg, "sweep.csv")
    if path is not None:
        _write_atomic(path, table)
    if not args.quiet:
        sys.stdout.write(table)
    return EXIT_NONCONVERGED if any_nonconv else EXIT_OK


# -- entry point ---------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pxlaplace",
        description="variable-exponent energies: solvers and property checks")
    sub = ap.add_subparsers(dest="command", required=True)
    names = ["solve", "check-convexity", "check-diaz-saa", "check-comparison",
             "eig", "validate", "sweep"]
    for name in names:
        p = sub.add_parser(name)
        p.add_argument("--config", required=name != "eig")
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--n", type=int)
        p.add_argument("--nx", type=int)
        p.add_argument("--ny", type=int)
        p.add_argument("--samples", type=int, default=50)
        p.add_argument("--levels", type=int, default=3)
        p.add_argument("--quiet", action="store_true")
        if name == "eig":
            p.add_argument("--r", type=float, default=2.0)
    return ap


_RANDOMIZED = {"solve", "check-convexity", "check-diaz-saa",
               "check-comparison", "sweep"}


def run_command(argv) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    try:
        if args.command in _RANDOMIZED and args.seed is None:
            raise ConfigError(f"{args.command} requires --seed")
        if args.command == "eig" and args.config is None:
            cfg = {"domain": {"kind": "interval", "a": 0.0, "b": 1.0,
                              "n": args.n or 64}}
        else:
            cfg = load_config(args.config)
        handler = {
            "solve": _cmd_solve,
            "check-convexity": _cmd_check_convexity,
            "check-diaz-saa": _cmd_check_diaz_saa,
            "check-comparison": _cmd_check_comparison,
            "eig": _cmd_eig,
            "validate": _cmd_validate,
            "sweep": _cmd_sweep,
        }[args.command]
        return handler(cfg, args)
    except ConfigError as e:
        sys.stderr.write(f"config error: {e}\n")
        return EXIT_USAGE
    except ValueError as e:
        sys.stderr.write(f"invalid input: {e}\n")
        return EXIT_USAGE
    except RuntimeError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_NONCONVERGED


def main():
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
