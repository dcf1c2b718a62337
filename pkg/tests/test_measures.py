from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from treepoisson.errors import ParseError
from treepoisson.kernels import kernel_derivative, poisson_kernel
from treepoisson.measures import (
    BoundaryMeasure,
    integrate_kernel,
    linear_combination,
    nu_o,
    parse_complex,
    refine,
    tv_norm,
)
from treepoisson.spectral import EigenParam
from treepoisson.tree import ROOT, BoundaryRay, HomogeneousTree, Vertex
from treepoisson.verify import random_measure, ray_through

P2 = EigenParam.from_z(1.5 + 0.3j, 2)
P3 = EigenParam.from_z(0.9 - 0.4j, 3)


def brute_integral(sigma, x, param, r):
    """Sum over atoms and over sectors at depth >= |x|, one representative ray each."""
    total = sum(w * kernel_derivative(x, ray, param, r) for ray, w in sigma.atom_weights)
    if sigma.cylinder_values is not None:
        depth = max(sigma.depth, len(x))
        fine = refine(BoundaryMeasure.cylinder(sigma.q, sigma.depth, sigma.cylinder_values), depth)
        tree = HomogeneousTree(sigma.q)
        for u, mass in zip(tree.sphere(depth), fine.cylinder_values):
            total += mass * kernel_derivative(x, BoundaryRay(u, 0), param, r)
    return total


measure_seeds = st.integers(0, 2**32 - 1)


class TestNorms:
    def test_examples(self):
        xi, eta = BoundaryRay(Vertex([0]), 0), BoundaryRay(Vertex([1]), 1)
        assert tv_norm(BoundaryMeasure.point_mass(xi, 2)) == 1
        assert tv_norm(nu_o(3, 2)) == pytest.approx(1, rel=1e-15)
        assert tv_norm(BoundaryMeasure.atomic(2, [(xi, 2), (eta, -1)])) == 3

    def test_duplicate_atoms_merge(self):
        xi = BoundaryRay(Vertex([0, 1, 1]), 1)
        same = BoundaryRay(Vertex([0]), 1)
        m = BoundaryMeasure.atomic(2, [(xi, 2), (same, -2)])
        assert m.is_zero() and tv_norm(m) == 0

    @settings(max_examples=60, deadline=None)
    @given(seed=measure_seeds, q=st.integers(2, 3))
    def test_tv_dominates_mass(self, seed, q):
        m = random_measure(q, np.random.default_rng(seed))
        assert tv_norm(m) >= abs(m.total_mass()) - 1e-15


class TestNuO:
    def test_depth_one(self):
        m = nu_o(1, 2)
        assert np.allclose(m.cylinder_values, [1 / 3] * 3)

    def test_depth_two(self):
        assert np.allclose(nu_o(2, 2).cylinder_values, [1 / 6] * 6)

    @pytest.mark.parametrize("q", [2, 3, 4])
    def test_refinement_consistent(self, q):
        for d in range(1, 4):
            assert np.allclose(refine(nu_o(d, q), d + 1).cylinder_values, nu_o(d + 1, q).cylinder_values, rtol=1e-15)


class TestRefine:
    def test_equal_split(self):
        m = BoundaryMeasure.cylinder(2, 1, np.array([0.6, 0.0, -0.3]))
        assert np.allclose(refine(m, 2).cylinder_values, [0.3, 0.3, 0, 0, -0.15, -0.15])

    def test_same_depth_identity(self):
        m = nu_o(2, 3)
        assert refine(m, 2) == m

    @settings(max_examples=60, deadline=None)
    @given(seed=measure_seeds, extra=st.integers(0, 2))
    def test_tv_invariant(self, seed, extra):
        m = random_measure(2, np.random.default_rng(seed))
        if m.depth:
            assert tv_norm(refine(m, m.depth + extra)) == pytest.approx(tv_norm(m), rel=1e-13, abs=1e-15)

    def test_cannot_coarsen(self):
        with pytest.raises(ValueError):
            refine(nu_o(3, 2), 2)


class TestIntegration:
    def test_point_mass(self):
        xi = BoundaryRay(Vertex([1, 0]), 1)
        x = Vertex([1, 0, 0])
        assert integrate_kernel(BoundaryMeasure.point_mass(xi, 2), x, P2, 0) == pytest.approx(poisson_kernel(x, xi, P2))

    def test_nu_o_at_root(self):
        for r in range(4):
            assert integrate_kernel(nu_o(2, 2), ROOT, P2, r) == pytest.approx(1 if r == 0 else 0, abs=1e-15)

    def test_hand_computation(self):
        p = EigenParam.from_z(1.0, 2)
        assert integrate_kernel(nu_o(1, 2), Vertex([0]), p, 0) == pytest.approx(1, rel=1e-15)

    @pytest.mark.parametrize("param", [P2, P3], ids=["q2", "q3"])
    def test_against_brute_force(self, param):
        rng = np.random.default_rng(4)
        tree = HomogeneousTree(param.q)
        ball = tree.ball(4)
        for _ in range(10):
            m = random_measure(param.q, rng)
            for x in ball[:: max(1, len(ball) // 12)]:
                for r in range(4):
                    ref = brute_integral(m, x, param, r)
                    assert abs(integrate_kernel(m, x, param, r) - ref) <= 1e-12 * (1 + abs(ref))

    def test_linearity(self):
        rng = np.random.default_rng(9)
        x = Vertex([2, 1, 0])
        for _ in range(10):
            s, t = random_measure(3, rng), random_measure(3, rng)
            a, b = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
            lhs = integrate_kernel(linear_combination([(a, s), (b, t)]), x, P3, 2)
            rhs = a * integrate_kernel(s, x, P3, 2) + b * integrate_kernel(t, x, P3, 2)
            assert abs(lhs - rhs) <= 1e-12 * (1 + abs(rhs))

    def test_refinement_invariance(self):
        rng = np.random.default_rng(10)
        for _ in range(10):
            m = random_measure(2, rng)
            if not m.depth:
                continue
            for x in (ROOT, Vertex([0, 1]), Vertex([2, 0, 1, 1, 0])):
                a = integrate_kernel(m, x, P2, 1)
                b = integrate_kernel(refine(m, m.depth + 2), x, P2, 1)
                assert abs(a - b) <= 1e-12 * (1 + abs(a))

    def test_sector_constancy(self):
        rng = np.random.default_rng(12)
        x = Vertex([0, 1, 0])
        u = Vertex([0, 1, 0, 1])
        for r in range(5):
            vals = [kernel_derivative(x, ray_through(u, 2, rng), P2, r) for _ in range(50)]
            assert max(abs(v - vals[0]) for v in vals) <= 1e-12 * abs(vals[0]) + 1e-15

    def test_spherical_function(self):
        tree = HomogeneousTree(2)
        sigma = nu_o(1, 2)
        f = {x: integrate_kernel(sigma, x, P2, 0) for x in tree.ball(6)}
        for n in range(6):
            vals = [f[x] for x in tree.sphere(n)]
            assert max(abs(v - vals[0]) for v in vals) <= 1e-12 * abs(vals[0])
        for x in tree.ball(5):
            avg = sum(f[y] for y in tree.neighbors(x)) / 3
            assert abs(avg - P2.lam * f[x]) <= 1e-10 * abs(P2.lam * f[x])


class TestAlgebraAndJson:
    def test_exact_rational_scaling(self):
        rng = np.random.default_rng(13)
        for n in (3, 6, 7, 11):
            m = random_measure(2, rng)
            assert m.scaled(Fraction(1, n)).scaled(n) == m

    def test_arithmetic(self):
        m = nu_o(1, 2)
        assert (m - m).is_zero()
        assert tv_norm(m + m) == pytest.approx(2)
        assert tv_norm(-m) == pytest.approx(1)

    @settings(max_examples=40, deadline=None)
    @given(seed=measure_seeds, q=st.integers(2, 3))
    def test_round_trip(self, seed, q):
        m = random_measure(q, np.random.default_rng(seed))
        assert BoundaryMeasure.from_json(m.to_json(), q) == m

    def test_missing_keys_read_as_zero(self):
        m = BoundaryMeasure.from_json({"cylinder": {"depth": 1, "values": {"1": 0.5}}}, 2)
        assert np.allclose(m.cylinder_values, [0, 0.5, 0])

    @pytest.mark.parametrize(
        "obj, where",
        [
            ({"atoms": [{"ray": {"prefix": "0.2", "repeat": 0}, "w": 1}]}, "atoms[0].ray"),
            ({"atoms": [{"ray": {"prefix": "0", "repeat": 0}, "w": "x"}]}, "atoms[0].w"),
            ({"cylinder": {"depth": 1, "values": {"0.1": 1}}}, "cylinder.values"),
            ({"cylinder": {"values": {}}}, "cylinder.depth"),
            ({"mass": 1}, "unknown field"),
        ],
    )
    def test_parse_errors_name_the_field(self, obj, where):
        with pytest.raises(ParseError, match=where.replace("[", r"\[").replace("]", r"\]")):
            BoundaryMeasure.from_json(obj, 2)

    def test_parse_complex_forms(self):
        assert parse_complex({"re": 1, "im": -2}) == 1 - 2j
        assert parse_complex(0.5) == 0.5
        assert parse_complex("1.5+0.3i") == 1.5 + 0.3j
        with pytest.raises(ParseError):
            parse_complex(True)
