import numpy as np
import pytest

from pxlaplace.anisotropy import weighted_quadratic
from pxlaplace.energy import (EnergyModel, M_hat, W_A_functional, W_functional,
                              dirichlet_part, energy_E, energy_E_hat, energy_J,
                              gateaux_gradient, phi_line, phi_prime,
                              potential_F, potential_G, power_absorption,
                              power_reaction, saturating_kirchhoff,
                              source_reaction)
from pxlaplace.exponents import exponent_field
from pxlaplace.grid import (NodeField, build_interval, build_rectangle,
                            constant_field, interpolate)


def make_model(n=64, p="2", r=1.0, h=None, q=None, ell=None, Q=None,
               kirchhoff=None, mesh=None):
    mesh = mesh or build_interval(0, 1, n)
    exponent = exponent_field(mesh, p, r=r)
    reaction = None
    if h is not None:
        hf = interpolate(mesh, h)
        reaction = (power_reaction(hf, interpolate(mesh, q)) if q is not None
                    else source_reaction(hf))
    absorption = None
    if ell is not None:
        absorption = power_absorption(interpolate(mesh, ell),
                                      interpolate(mesh, Q))
    return EnergyModel(mesh, exponent, reaction=reaction,
                       absorption=absorption, kirchhoff=kirchhoff)


class TestPotentials:
    def test_F_power(self):
        model = make_model(h="1", q="2", r=2.0)
        assert potential_F(model.reaction, [0.5], 3.0) == pytest.approx(4.5)

    def test_F_negative_argument(self):
        model = make_model(h="1", q="2", r=2.0)
        assert potential_F(model.reaction, [0.5], -1.0) == 0.0

    def test_F_fractional_exponent(self):
        # 2 * 1^1.5 / 1.5 = 4/3
        model = make_model(h="2", q="1.5", r=2.0)
        assert potential_F(model.reaction, [0.5], 1.0) == pytest.approx(4 / 3)

    def test_G_values(self):
        model = make_model(h="1", q="1.5", r=2.0, ell="1", Q="2")
        assert potential_G(model.absorption, [0.5], 2.0) == pytest.approx(2.0)
        assert potential_G(model.absorption, [0.5], -3.0) == 0.0

    def test_G_cubic(self):
        model = make_model(h="1", q="1.5", r=2.0, ell="3", Q="3")
        assert potential_G(model.absorption, [0.5], 1.0) == pytest.approx(1.0)

    def test_M_hat_identity_scale(self):
        term = saturating_kirchhoff(1.0, 1.0)
        assert M_hat(term, 5.0) == 5.0

    def test_M_hat_zero(self):
        assert M_hat(saturating_kirchhoff(1.0, 2.0), 0.0) == 0.0

    def test_M_hat_closed_form(self):
        # 2*1 - (2-1)*ln 2
        term = saturating_kirchhoff(1.0, 2.0)
        assert M_hat(term, 1.0) == pytest.approx(2 - np.log(2), rel=1e-14)

    def test_M_hat_negative_argument(self):
        with pytest.raises(ValueError):
            M_hat(saturating_kirchhoff(1.0, 2.0), -0.1)

    def test_M_hat_sandwich_on_grid(self):
        term = saturating_kirchhoff(0.5, 3.0)
        for t in np.linspace(0.0, 100.0, 201):
            val = M_hat(term, float(t))
            assert 0.5 * t - 1e-12 <= val <= 3.0 * t + 1e-12


class TestWFunctional:
    def test_parabola_limit(self):
        # closed form: (1/2) integral of (1-2x)^2 = 1/6
        errs = []
        for n in (32, 64, 128):
            model = make_model(n=n)
            v = interpolate(model.mesh, "x*(1-x)")
            errs.append(abs(W_functional(v, model) - 1 / 6))
        rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(rates > 1.9)

    def test_constant_field_zero(self):
        model = make_model(r=2.0, p="2")
        assert W_functional(constant_field(model.mesh, 3.0), model) == 0.0

    def test_scaling_when_p_equals_r(self):
        model = make_model(p="2", r=2.0)
        v = NodeField(model.mesh, interpolate(model.mesh, "x*(1-x)").values + 0.2)
        c = 3.7
        assert W_functional(NodeField(model.mesh, c * v.values), model) == \
            pytest.approx(c * W_functional(v, model), rel=1e-13)

    def test_cone_violation(self):
        model = make_model()
        bad = interpolate(model.mesh, "x-0.5")
        with pytest.raises(ValueError, match="cone"):
            W_functional(bad, model)


class TestWAFunctional:
    def test_isotropic_bitwise_equal(self):
        model = make_model(p="2+x", r=1.5)
        rng = np.random.default_rng(31)
        v = NodeField(model.mesh, rng.uniform(0.1, 10, model.mesh.n_nodes))
        assert W_A_functional(v, model) == W_functional(v, model)

    def test_constant_weight_factors_out(self):
        # 1D, w = 4, p = r = 2: A = 4 |xi|^2, so W_A = 4 W
        mesh = build_interval(0, 1, 64)
        exponent = exponent_field(mesh, 2.0, r=2.0)
        aniso = weighted_quadratic(exponent, [constant_field(mesh, 4.0)])
        model = EnergyModel(mesh, exponent, anisotropy=aniso)
        v = NodeField(mesh, interpolate(mesh, "(x*(1-x))^2").values + 1e-9)
        assert W_A_functional(v, model) == pytest.approx(
            4.0 * W_functional(v, model), rel=1e-13)

    def test_constant_zero(self):
        mesh = build_rectangle(0, 1, 0, 1, 3, 3)
        exponent = exponent_field(mesh, 2.0, r=2.0)
        aniso = weighted_quadratic(exponent, [constant_field(mesh, 4.0),
                                              constant_field(mesh, 1.0)])
        model = EnergyModel(mesh, exponent, anisotropy=aniso)
        assert W_A_functional(constant_field(mesh, 2.0), model) == 0.0

    def test_sandwich_between_W_multiples(self):
        # c1 W <= W_A <= c2 W with c1, c2 the extremes of A on the sphere
        mesh = build_rectangle(0, 1, 0, 1, 4, 4)
        exponent = exponent_field(mesh, 2.0, r=2.0)
        aniso = weighted_quadratic(exponent, [constant_field(mesh, 4.0),
                                              constant_field(mesh, 1.0)])
        model = EnergyModel(mesh, exponent, anisotropy=aniso)
        c1, c2 = 1.0, 4.0  # eigenvalues of diag(4, 1) on the unit sphere
        rng = np.random.default_rng(37)
        for _ in range(20):
            v = NodeField(mesh, rng.uniform(0.1, 10, mesh.n_nodes))
            wa = W_A_functional(v, model)
            w = W_functional(v, model)
            assert c1 * w - 1e-12 <= wa <= c2 * w + 1e-12


class TestProblemEnergies:
    def test_E_zero_field(self):
        model = make_model(h="1", q="2", r=1.0)
        assert energy_E(constant_field(model.mesh, 0.0), model) == 0.0

    def test_E_source_parabola(self):
        # (1/2)int(u')^2 - int(u) -> 1/6 - 1/6 = 0; the midpoint errors of
        # the two parts cancel identically on the parabola
        for n in (32, 64, 128):
            model = make_model(n=n, h="1", r=1.0)
            u = interpolate(model.mesh, "x*(1-x)")
            assert abs(energy_E(u, model)) <= 1e-12

    def test_E_power_parabola(self):
        # 1/6 - (1/2) int x^2 (1-x)^2 = 1/6 - 1/60
        model = make_model(n=512, h="1", q="2", r=1.0)
        u = interpolate(model.mesh, "x*(1-x)")
        assert energy_E(u, model) == pytest.approx(1 / 6 - 1 / 60, abs=2e-5)

    def test_E_requires_reaction(self):
        model = make_model()
        with pytest.raises(ValueError, match="reaction"):
            energy_E(constant_field(model.mesh, 0.0), model)

    def test_E_hat_zero_field(self):
        model = make_model(h="1", q="1.5", r=2.0, p="2", ell="1", Q="2")
        assert energy_E_hat(constant_field(model.mesh, 0.0), model) == 0.0

    def test_E_hat_negative_field_keeps_gradient_only(self):
        # both potentials vanish on the negative branch
        model = make_model(h="1", q="1.5", r=2.0, p="2", ell="1", Q="2")
        u = NodeField(model.mesh, -interpolate(model.mesh, "x*(1-x)").values)
        assert energy_E_hat(u, model) == pytest.approx(
            dirichlet_part(u, model, eps=0.0), rel=1e-14)

    def test_E_hat_adds_absorption(self):
        # + int u^2/2 = 1/60 for u = x(1-x)
        model = make_model(n=512, h="1", q="1.5", r=1.8, ell="1", Q="2")
        u = interpolate(model.mesh, "x*(1-x)")
        assert energy_E_hat(u, model) - energy_E(u, model) == pytest.approx(
            1 / 60, abs=2e-6)

    def test_J_reduces_to_E_bitwise_for_unit_M(self):
        model = make_model(h="1", q="1.5", r=2.0,
                           kirchhoff=saturating_kirchhoff(1.0, 1.0))
        u = interpolate(model.mesh, "x*(1-x)")
        assert energy_J(u, model) == energy_E(u, model)

    def test_J_zero_field(self):
        model = make_model(h="1", q="1.5", r=2.0,
                           kirchhoff=saturating_kirchhoff(1.0, 2.0))
        assert energy_J(constant_field(model.mesh, 0.0), model) == 0.0

    def test_J_composition_value(self):
        # negligible reaction: J ~ M_hat(D(u)) with D = 1/6 for u = x(1-x)
        model = make_model(n=512, h="1e-9", q="2", r=1.0,
                           kirchhoff=saturating_kirchhoff(1.0, 2.0))
        u = interpolate(model.mesh, "x*(1-x)")
        expected = M_hat(model.kirchhoff, dirichlet_part(u, model, eps=0.0))
        assert energy_J(u, model) == pytest.approx(expected, rel=1e-6)


class TestPhiLine:
    def test_endpoints(self):
        model = make_model(p="2+x", r=1.5)
        rng = np.random.default_rng(41)
        v1 = NodeField(model.mesh, rng.uniform(0.1, 10, model.mesh.n_nodes))
        v2 = NodeField(model.mesh, rng.uniform(0.1, 10, model.mesh.n_nodes))
        assert phi_line(v1, v2, 0.0, model) == W_functional(v1, model)
        assert phi_line(v1, v2, 1.0, model) == W_functional(v2, model)

    def test_identical_pair_constant(self):
        model = make_model(p="2+x", r=2.0)
        v = NodeField(model.mesh, interpolate(model.mesh, "1+x").values)
        vals = [phi_line(v, v, t, model) for t in (0.0, 0.3, 0.75, 1.0)]
        assert np.ptp(vals) <= 1e-14 * max(vals)

    def test_proportional_pair_quadratic_in_theta(self):
        # p=2, r=1, v2 = 2 v1: Phi(t) = (1+t)^2 W(v1) exactly
        model = make_model(n=128)
        v1 = interpolate(model.mesh, "x*(1-x)")
        v2 = NodeField(model.mesh, 2 * v1.values)
        w1 = W_functional(v1, model)
        for t in (0.2, 0.5, 0.9):
            assert phi_line(v1, v2, t, model) == pytest.approx(
                (1 + t) ** 2 * w1, rel=1e-12)
        assert w1 == pytest.approx(1 / 6, abs=1e-4)

    def test_cone_exit_rejected(self):
        model = make_model()
        v1 = NodeField(model.mesh, np.full(model.mesh.n_nodes, 1.0))
        v2 = NodeField(model.mesh, np.full(model.mesh.n_nodes, 3.0))
        with pytest.raises(ValueError, match="cone"):
            phi_line(v1, v2, -0.8, model)  # 1.0 - 0.8*2 < 0

    def test_delta_interval_evaluates(self):
        from pxlaplace.energy import cone_delta
        model = make_model(p="2+x", r=1.5)
        v1 = NodeField(model.mesh, np.full(model.mesh.n_nodes, 2.0))
        v2 = NodeField(model.mesh, np.full(model.mesh.n_nodes, 3.0))
        delta = cone_delta(v1, v2)
        assert delta > 0
        phi_line(v1, v2, -delta / 2, model)
        phi_line(v1, v2, 1 + delta / 2, model)


class TestPhiPrime:
    def test_proportional_pair_derivative(self):
        # Phi(t) = (1+t)^2 W(v1) so Phi'(0) = 2 W(v1) -> 1/3
        model = make_model(n=256)
        v1 = interpolate(model.mesh, "x*(1-x)")
        v2 = NodeField(model.mesh, 2 * v1.values)
        d0 = phi_prime(v1, v2, 0.0, model)
        assert d0 == pytest.approx(2 * W_functional(v1, model), rel=1e-12)
        assert d0 == pytest.approx(1 / 3, abs=1e-4)

    def test_identical_pair_zero(self):
        model = make_model(p="2+x", r=1.5)
        v = NodeField(model.mesh, interpolate(model.mesh, "1+x").values)
        for t in (0.0, 0.4, 1.0):
            assert phi_prime(v, v, t, model) == 0.0

    def test_antisymmetry(self):
        model = make_model(p="2+x", r=1.5)
        rng = np.random.default_rng(43)
        v1 = NodeField(model.mesh, rng.uniform(0.5, 5, model.mesh.n_nodes))
        v2 = NodeField(model.mesh, rng.uniform(0.5, 5, model.mesh.n_nodes))
        for t in (0.0, 0.3, 1.0):
            assert phi_prime(v1, v2, t, model) == pytest.approx(
                -phi_prime(v2, v1, 1.0 - t, model), rel=1e-10)

    def test_monotone_in_theta(self):
        # derivative of a convex line restriction is nondecreasing
        model = make_model(p="2+x", r=2.0)
        rng = np.random.default_rng(47)
        for _ in range(10):
            v1 = NodeField(model.mesh, rng.uniform(0.1, 10, model.mesh.n_nodes))
            v2 = NodeField(model.mesh, rng.uniform(0.1, 10, model.mesh.n_nodes))
            ds = [phi_prime(v1, v2, t, model) for t in np.linspace(0, 1, 9)]
            assert np.all(np.diff(ds) >= -1e-10 * (1 + np.abs(ds).max()))

    @pytest.mark.parametrize("kind,kwargs", [
        ("W", dict(p="2+x", r=1.5)),
        ("W", dict(p="2", r=1.0)),
        ("J_hat", dict(p="2+x", r=2.0, h="1", q="1.5",
                       kirchhoff=saturating_kirchhoff(1.0, 2.0))),
    ])
    def test_matches_central_difference(self, kind, kwargs):
        model = make_model(n=48, **kwargs)
        rng = np.random.default_rng(53)
        mesh = model.mesh
        for _ in range(8):
            a = rng.uniform(0.5, 5, mesh.n_nodes)
            b = rng.uniform(0.5, 5, mesh.n_nodes)
            if kind == "J_hat":
                a[mesh.boundary_mask] = 0.0
                b[mesh.boundary_mask] = 0.0
            v1, v2 = NodeField(mesh, a), NodeField(mesh, b)
            theta, step = 0.37, 1e-6
            exact = phi_prime(v1, v2, theta, model, kind)
            fd = (phi_line(v1, v2, theta + step, model, kind)
                  - phi_line(v1, v2, theta - step, model, kind)) / (2 * step)
            assert exact == pytest.approx(fd, rel=1e-6)

    def test_weighted_anisotropy_central_difference(self):
        mesh = build_rectangle(0, 1, 0, 1, 6, 6)
        exponent = exponent_field(mesh, 2.0, r=1.5)
        aniso = weighted_quadratic(
            exponent, [interpolate(mesh, "1+3*x"), constant_field(mesh, 1.0)])
        model = EnergyModel(mesh, exponent, anisotropy=aniso)
        rng = np.random.default_rng(59)
        v1 = NodeField(mesh, rng.uniform(0.5, 5, mesh.n_nodes))
        v2 = NodeField(mesh, rng.uniform(0.5, 5, mesh.n_nodes))
        theta, step = 0.5, 1e-6
        exact = phi_prime(v1, v2, theta, model, "W_A")
        fd = (phi_line(v1, v2, theta + step, model, "W_A")
              - phi_line(v1, v2, theta - step, model, "W_A")) / (2 * step)
        assert exact == pytest.approx(fd, rel=1e-6)


class TestHiddenConvexity:
    def test_1d_midpoint_slack(self):
        # the discrete cone energy is convex exactly in 1D
        rng = np.random.default_rng(61)
        model = make_model(n=64, p="2+x", r=2.0)
        mesh = model.mesh
        for _ in range(50):
            v1 = NodeField(mesh, rng.uniform(0.1, 10, mesh.n_nodes))
            v2 = NodeField(mesh, rng.uniform(0.1, 10, mesh.n_nodes))
            lhs = phi_line(v1, v2, 0.5, model)
            rhs = 0.5 * (phi_line(v1, v2, 0.0, model)
                         + phi_line(v1, v2, 1.0, model))
            assert lhs <= rhs + 1e-10 * max(1.0, rhs)

    def test_affine_on_rays_when_p_equals_r(self):
        model = make_model(p="2", r=2.0)
        v1 = NodeField(model.mesh,
                       interpolate(model.mesh, "x*(1-x)").values + 0.1)
        v2 = NodeField(model.mesh, 4 * v1.values)
        phi0 = phi_line(v1, v2, 0.0, model)
        phi1 = phi_line(v1, v2, 1.0, model)
        for t in np.linspace(0.1, 0.9, 5):
            affine = (1 - t) * phi0 + t * phi1
            assert phi_line(v1, v2, t, model) == pytest.approx(
                affine, rel=1e-12)

    def test_strict_gap_when_p_varies(self):
        model = make_model(p="2+x", r=2.0)
        v1 = NodeField(model.mesh,
                       interpolate(model.mesh, "x*(1-x)").values + 0.1)
        v2 = NodeField(model.mesh, 4 * v1.values)
        phi0 = phi_line(v1, v2, 0.0, model)
        phi1 = phi_line(v1, v2, 1.0, model)
        mid = phi_line(v1, v2, 0.5, model)
        assert 0.5 * (phi0 + phi1) - mid > 1e-6 * max(phi0, phi1)


class TestGateauxGradient:
    def test_zero_at_trivial_critical_point(self):
        model = make_model(h="1", q="1.5", r=2.0)
        g = gateaux_gradient(model, constant_field(model.mesh, 0.0), eps=0.0)
        assert np.all(g.values == 0.0)

    def test_linear_solution_residual(self):
        # independent tridiagonal solve of the p=2, f=1 discretization
        n = 64
        model = make_model(n=n, h="1", r=1.0)
        mesh = model.mesh
        h = 1.0 / n
        K = (np.diag(np.full(n - 1, 2.0)) + np.diag(np.full(n - 2, -1.0), 1)
             + np.diag(np.full(n - 2, -1.0), -1)) / h
        b = np.full(n - 1, h)
        u = np.zeros(mesh.n_nodes)
        u[1:-1] = np.linalg.solve(K, b)
        g = gateaux_gradient(model, NodeField(mesh, u), eps=0.0)
        assert np.abs(g.values[mesh.interior]).max() <= 1e-12

    def test_pairing_matches_directional_derivative(self):
        rng = np.random.default_rng(67)
        cases = [
            make_model(n=32, p="2+x", r=1.5, h="1", q="1.2"),
            make_model(n=32, p="2", r=1.8, h="2", q="1.5", ell="1", Q="2"),
            make_model(n=32, p="1.7+0.2*x", r=1.5, h="1", q="1.2",
                       kirchhoff=saturating_kirchhoff(1.0, 2.0)),
        ]
        from pxlaplace.energy import energy_value
        for model in cases:
            mesh = model.mesh
            for _ in range(5):
                u = np.clip(rng.uniform(0.5, 2.0, mesh.n_nodes), 0.5, None)
                u[mesh.boundary_mask] = 0.0
                phi = rng.normal(size=mesh.n_nodes)
                phi[mesh.boundary_mask] = 0.0
                uf = NodeField(mesh, u)
                g = gateaux_gradient(model, uf, eps=0.0)
                pairing = float(g.values @ phi)
                t = 1e-6
                fd = (energy_value(NodeField(mesh, u + t * phi), model, eps=0.0)
                      - energy_value(NodeField(mesh, u - t * phi), model,
                                     eps=0.0)) / (2 * t)
                assert pairing == pytest.approx(fd, rel=1e-6, abs=1e-12)
