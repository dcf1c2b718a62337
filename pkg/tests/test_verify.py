import json
from dataclasses import replace

import numpy as np
import pytest

import treepoisson.kernels as kernels_mod
import treepoisson.polyharmonic as poly_mod
import treepoisson.spectral as spectral_mod
from treepoisson.errors import UnknownSuiteError
from treepoisson.kernels import kernel_derivative, poisson_kernel
from treepoisson.polyharmonic import evaluate_ball, heat_apply
from treepoisson.spectral import EigenParam
from treepoisson.tree import ROOT, BoundaryRay, Vertex
from treepoisson.verify import (
    SuiteConfig,
    ball_rel_err,
    default_fd_step,
    fd_kernel_derivative,
    kernel_ball,
    random_polyfunction,
    random_z,
    resolve_sign_constant,
    run_suite,
    stencil_exponential,
    stencil_power,
)

P = EigenParam.from_z(1.5 + 0.3j, 2)
XI = BoundaryRay(Vertex([0, 1]), 0)


def forbid(*_, **__):
    raise AssertionError("oracle reached the primary path")


@pytest.fixture
def no_jets(monkeypatch):
    monkeypatch.setattr(spectral_mod, "_z_jet_coeffs", forbid)
    monkeypatch.setattr(kernels_mod, "_derivatives_at_hor", forbid)


@pytest.fixture
def no_coordinate_ops(monkeypatch):
    for name in ("apply_shifted_laplacian", "shifted_laplacian_power", "heat_apply", "right_inverse"):
        monkeypatch.setattr(poly_mod, name, forbid)


class TestFiniteDifferences:
    def test_order_zero_exact(self):
        x = Vertex([0, 1, 1])
        assert fd_kernel_derivative(x, XI, P, 0) == poisson_kernel(x, XI, P)

    def test_root_is_zero(self):
        assert abs(fd_kernel_derivative(ROOT, XI, P, 1, 1e-5)) < 1e-9

    @pytest.mark.parametrize("z", [0.6, 1.0, 1.5 + 0.3j])
    def test_first_derivative_vs_jet(self, z):
        p = EigenParam.from_z(z, 2)
        for x in (Vertex([0]), Vertex([0, 1, 0]), Vertex([2, 1])):
            ref = kernel_derivative(x, XI, p, 1)
            fd = fd_kernel_derivative(x, XI, p, 1, default_fd_step(p.lam, 2, 1))
            assert abs(fd - ref) <= 1e-6 * abs(ref)

    def test_step_clamped_near_spectrum(self):
        p = EigenParam.from_z(0.6, 2)
        assert default_fd_step(p.lam, 2, 3) < 4e-3

    def test_independent_of_jets(self, no_jets):
        fd_kernel_derivative(Vertex([0, 1]), XI, P, 2)
        with pytest.raises(AssertionError):
            kernel_derivative(Vertex([0, 1]), XI, EigenParam.from_z(1.2, 2), 2)

    def test_step_range(self):
        with pytest.raises(ValueError):
            fd_kernel_derivative(Vertex([0]), XI, P, 1, 0.5)
        with pytest.raises(ValueError):
            fd_kernel_derivative(Vertex([0]), XI, P, 6, 1e-3)


class TestStencilOracles:
    def test_power_zero_identity(self):
        v = kernel_ball(XI, P, 2, 4)
        assert stencil_power(v, P, 0) == v or np.array_equal(stencil_power(v, P, 0).values, v.values)

    def test_power_linear(self):
        v = kernel_ball(XI, P, 2, 5)
        a = stencil_power(v.scaled(2 - 1j), P, 2)
        b = stencil_power(v, P, 2).scaled(2 - 1j)
        assert np.allclose(a.values, b.values, rtol=1e-14, atol=0)

    def test_nilpotent_on_kernel_derivative(self):
        v = kernel_ball(XI, P, 2, 6)
        assert stencil_power(v, P, 3).max_abs() < 1e-9 * v.max_abs()

    def test_exponential_order_one_and_t_zero(self):
        f = random_polyfunction(P, 1, np.random.default_rng(0))
        v = evaluate_ball(f, 6)
        assert ball_rel_err(stencil_exponential(v, P, 0.8, 1), v.restrict(5), P)[1] < 1e-10
        g = random_polyfunction(P, 3, np.random.default_rng(1))
        w = evaluate_ball(g, 6)
        assert np.array_equal(stencil_exponential(w, P, 0.0, 3).values, w.restrict(3).values)

    def test_exponential_matches_heat(self):
        rng = np.random.default_rng(2)
        for n in range(1, 5):
            f = random_polyfunction(P, n, rng)
            v = evaluate_ball(f, 8)
            w = stencil_exponential(v, P, -0.6, 4)
            assert ball_rel_err(w, evaluate_ball(heat_apply(f, -0.6), w.radius), P, reference=v)[1] < 1e-9

    def test_independent_of_coordinates(self, no_coordinate_ops):
        v = kernel_ball(XI, P, 3, 5)
        stencil_power(v, P, 2)
        stencil_exponential(v, P, 0.5, 4)


class TestSignResolution:
    @pytest.mark.parametrize("q, z", [(2, 1.0), (3, 1.5 + 0.3j), (2, 0.7 - 0.5j)])
    def test_plus_wins(self, q, z):
        res = resolve_sign_constant(EigenParam.from_z(z, q), trials=10, seed=1)
        assert res.convention == "plus"
        for r in range(1, 4):
            assert res.residual_plus[r] < 1e-8
            if r % 2:
                assert res.residual_alternating[r] > 1e-1
            else:
                assert res.residual_alternating[r] == res.residual_plus[r]

    def test_needs_trials(self):
        with pytest.raises(ValueError):
            resolve_sign_constant(P, trials=3)


class TestSuites:
    def test_unknown_suite(self):
        with pytest.raises(UnknownSuiteError):
            run_suite("bogus")

    def test_radius_zero_rejected(self):
        with pytest.raises(ValueError):
            SuiteConfig(radius=0)

    def test_identities_pass_q2(self):
        report = run_suite("identities", SuiteConfig(qs=(2,)))
        assert report.passed, report.to_table()

    def test_random_params_appended(self):
        cfg = SuiteConfig(qs=(2,), zs=(1.0,), n_random_z=3, seed=4)
        params = cfg.params()
        assert len(params) == 4 and params == cfg.params()
        assert all(0.55 <= p.z.real <= 1.8 for p in params)

    def test_deterministic(self):
        cfg = SuiteConfig(qs=(3,), zs=(1.0,), n_functions=5, n_contraction=10, radius=4)
        a = run_suite("norms", cfg).to_json()
        b = run_suite("norms", cfg).to_json()
        assert a == b
        assert json.loads(a)["suite"] == "norms"
        c = run_suite("norms", replace(cfg, seed=1)).to_json()
        assert c != a

    def test_random_z_region(self):
        z = random_z(np.random.default_rng(0), 500)
        assert np.all((z.real >= 0.55) & (z.real <= 1.8) & (np.abs(z.imag) <= 1))
        assert np.all(np.abs(z - 0.5) > 1e-3)
