import math

import numpy as np
import pytest
from scipy.integrate import quad

from hhlab.errors import (ExtrapolationError, GridError,
                          NonIntegrableSourceError)
from hhlab.radial import (HardyHenonParams, RadialField, RadialGrid,
                          hardy_bound_factor, iterated_green, jensen_gap,
                          poisson_solve_ball, polyharmonic_apply,
                          radial_laplacian, recenter_average, rescale,
                          singular_solution, weighted_source_average)


class TestParams:
    def test_classification(self):
        assert HardyHenonParams(4, 2).order_class == "critical"
        assert HardyHenonParams(4, 3).order_class == "super-critical"
        assert HardyHenonParams(4, 1).order_class == "sub-critical"

    def test_sigma(self):
        assert HardyHenonParams(4, 2, 2.0, 2.0).sigma == pytest.approx(2.0)
        assert HardyHenonParams(4, 2, 0.0, 2.0).sigma == pytest.approx(4.0)

    @pytest.mark.parametrize("kwargs", [
        dict(n=1, m=1), dict(n=4, m=0), dict(n=4, m=2, p=1.0),
        dict(n=4, m=2, a=4.0), dict(n=4, m=2, t=-1.0),
    ])
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            HardyHenonParams(**kwargs)


class TestGridAndField:
    def test_factories(self):
        g = RadialGrid.uniform(0.0, 1.0, 64)
        assert g.grading == "uniform" and len(g) == 64
        g2 = RadialGrid.graded(0.0, 1.0, 129)
        assert g2.grading == "geometric"
        # refinement toward both ends
        d = np.diff(g2.nodes)
        assert d[0] < d[len(d) // 2] and d[-1] < d[len(d) // 2]

    def test_invariants(self):
        with pytest.raises(GridError):
            RadialGrid(np.linspace(0, 1, 16))  # too few nodes
        bad = np.linspace(0, 1, 64)
        bad[10] = bad[9]
        with pytest.raises(GridError):
            RadialGrid(bad)
        with pytest.raises(GridError):
            RadialGrid(np.linspace(-0.5, 1, 64))

    def test_field_finite_and_shape(self):
        g = RadialGrid.uniform(0.0, 1.0, 64)
        with pytest.raises(GridError):
            RadialField(g, np.full(64, np.nan))
        with pytest.raises(GridError):
            RadialField(g, np.ones(63))

    def test_field_values_frozen(self):
        g = RadialGrid.uniform(0.0, 1.0, 64)
        f = RadialField(g, np.ones(64))
        with pytest.raises(ValueError):
            f.values[0] = 2.0

    def test_csv_round_trip(self, tmp_path):
        g = RadialGrid.graded(0.0, 2.0, 65)
        f = RadialField.from_function(g, lambda r: np.exp(-r))
        path = tmp_path / "field.csv"
        f.to_csv(str(path), "u(n=4,m=2,p=2,a=0,t=0,R=2)")
        text = path.read_text().splitlines()
        assert text[0] == "r,u(n=4,m=2,p=2,a=0,t=0,R=2)"
        back = RadialField.from_csv(str(path))
        np.testing.assert_allclose(back.grid.nodes, g.nodes, rtol=0)
        np.testing.assert_allclose(back.values, f.values, rtol=0)

    def test_evaluation_and_extrapolation(self):
        g = RadialGrid.uniform(0.5, 2.0, 64)
        f = RadialField.from_function(g, lambda r: r ** 2)
        assert f(1.0) == pytest.approx(1.0, abs=1e-6)
        with pytest.raises(ExtrapolationError):
            f(0.1)


class TestRadialLaplacian:
    @pytest.mark.parametrize("n", [2, 3, 4, 6])
    def test_quadratic(self, n):
        g = RadialGrid.uniform(0.0, 2.0, 501)
        f = RadialField.from_function(g, lambda r: r ** 2)
        lap = radial_laplacian(f, n)
        np.testing.assert_allclose(lap.values, -2.0 * n, atol=1e-7)

    def test_power_law(self):
        g = RadialGrid.uniform(0.5, 2.0, 1501)
        f = RadialField.from_function(g, lambda r: r ** -4.0)
        lap = radial_laplacian(f, 4)
        expected = -8.0 * g.nodes ** -6.0
        rel = np.abs(lap.values - expected) / np.abs(expected)
        assert rel.max() < 1e-5

    def test_constant(self):
        g = RadialGrid.graded(0.0, 1.0, 65)
        lap = radial_laplacian(RadialField.constant(g, 3.5), 5)
        np.testing.assert_allclose(lap.values, 0.0, atol=1e-20)


class TestPoissonSolve:
    def test_constant_source(self):
        g = RadialGrid.graded(0.0, 2.0, 513)
        u = poisson_solve_ball(RadialField.constant(g, 1.0), 2.0, 4)
        np.testing.assert_allclose(u.values, (4.0 - g.nodes ** 2) / 8.0,
                                   atol=1e-13)

    @pytest.mark.parametrize("beta,n", [(0.0, 4), (1.0, 4), (2.5, 6),
                                        (8.0, 6)])
    def test_monomial_closed_form(self, beta, n):
        grid = RadialGrid.graded(0.0, 1.0, 1025)
        f = RadialField.from_function(grid, lambda r: r ** beta)
        u = poisson_solve_ball(f, 1.0, n)
        coeff = 1.0 / ((beta + 2.0) * (beta + n))
        expected = coeff * (1.0 - grid.nodes ** (beta + 2.0))
        np.testing.assert_allclose(u.values, expected, atol=1e-7)

    def test_singular_origin_head_correction(self):
        # grids bounded away from 0 extend the inner integral by a local
        # power fit; leading-order accuracy only
        grid = RadialGrid.graded(1e-4, 1.0, 2049)
        beta, n = -1.5, 4
        f = RadialField.from_function(grid, lambda r: r ** beta)
        u = poisson_solve_ball(f, 1.0, n)
        coeff = 1.0 / ((beta + 2.0) * (beta + n))
        expected = coeff * (1.0 - grid.nodes ** (beta + 2.0))
        np.testing.assert_allclose(u.values, expected, atol=5e-3)

    def test_linearity(self, rng):
        g = RadialGrid.graded(0.0, 1.0, 257)
        f1 = RadialField(g, rng.uniform(0.0, 1.0, len(g)))
        f2 = RadialField(g, rng.uniform(0.0, 1.0, len(g)))
        u1 = poisson_solve_ball(f1, 1.0, 4)
        u2 = poisson_solve_ball(f2, 1.0, 4)
        u12 = poisson_solve_ball(f1.with_values(f1.values + f2.values),
                                 1.0, 4)
        np.testing.assert_allclose(u12.values, u1.values + u2.values,
                                   atol=1e-10)

    def test_non_integrable_source(self):
        g = RadialGrid.uniform(1e-3, 1.0, 512)
        f = RadialField.from_function(g, lambda r: r ** -5.0)
        with pytest.raises(NonIntegrableSourceError):
            poisson_solve_ball(f, 1.0, 4)

    def test_grid_must_end_at_radius(self):
        g = RadialGrid.uniform(0.0, 1.0, 64)
        with pytest.raises(GridError):
            poisson_solve_ball(RadialField.constant(g, 1.0), 2.0, 4)

    def test_solve_then_laplacian_recovers_source(self):
        g = RadialGrid.uniform(0.0, 1.0, 801)
        f = RadialField.from_function(g, lambda r: np.cos(2.0 * r) + 1.5)
        u = poisson_solve_ball(f, 1.0, 4)
        lap = radial_laplacian(u, 4)
        inner = slice(4, -4)
        rel = np.abs(lap.values - f.values)[inner] / np.max(f.values)
        assert rel.max() < 1e-6

    def test_maximum_principle_surrogate(self, rng):
        # nonnegative sources give nonnegative output; nonincreasing sources
        # give radially nonincreasing output
        g = RadialGrid.graded(0.0, 1.0, 257)
        r = g.nodes
        nonincreasing = [
            np.ones(len(g)),
            np.exp(-3.0 * r ** 2),
            (1.0 - r ** 2) ** 2,
            1.0 / (1.0 + np.exp((r - 0.5) / 0.05)),
        ]
        for vals in nonincreasing:
            u = poisson_solve_ball(RadialField(g, vals), 1.0, 4)
            scale = u.values.max()
            assert u.values.min() >= -1e-12 * scale
            assert np.all(np.diff(u.values) <= 1e-10 * scale)
        rough = RadialField(g, rng.uniform(0.0, 1.0, len(g)))
        u = poisson_solve_ball(rough, 1.0, 4)
        assert u.values.min() >= -1e-10 * u.values.max()


class TestIteratedGreen:
    def test_m1_reduces_to_single_solve(self):
        g = RadialGrid.graded(0.0, 1.0, 257)
        f = RadialField.from_function(g, lambda r: 1.0 + r)
        state = iterated_green(f, 1.0, 4, 1)
        u = poisson_solve_ball(f, 1.0, 4)
        assert state.m == 1
        np.testing.assert_allclose(state.layers[0].values, u.values, rtol=0)

    def test_biharmonic_closed_form(self):
        # symbolic composition of the monomial rule for f = 1, m = 2, n = 4:
        # layer1 = (1-r^2)/8, layer0 = (1-r^2)(2-r^2)/192 (checked by
        # applying -Lap: layer0'' + (3/r) layer0' = (r^2-1)/8)
        g = RadialGrid.graded(0.0, 1.0, 513)
        state = iterated_green(RadialField.constant(g, 1.0), 1.0, 4, 2)
        r = g.nodes
        np.testing.assert_allclose(state.layers[1].values,
                                   (1.0 - r ** 2) / 8.0, atol=1e-14)
        np.testing.assert_allclose(
            state.layers[0].values,
            (1.0 - r ** 2) * (2.0 - r ** 2) / 192.0, atol=1e-9)

    def test_navier_boundary_data(self):
        g = RadialGrid.graded(0.0, 1.5, 257)
        f = RadialField.from_function(g, lambda r: np.exp(-r))
        state = iterated_green(f, 1.5, 6, 3)
        for layer in state.layers:
            assert abs(layer.values[-1]) < 1e-10

    def test_consecutive_layers_satisfy_the_chain(self):
        # -Lap layer_i = layer_{i+1} within discretization residual
        g = RadialGrid.uniform(0.0, 1.0, 801)
        f = RadialField.from_function(g, lambda r: 1.0 + np.cos(r))
        state = iterated_green(f, 1.0, 4, 3)
        inner = slice(4, -4)
        for i in range(state.m - 1):
            lap = radial_laplacian(state.layers[i], 4)
            err = np.abs(lap.values - state.layers[i + 1].values)[inner]
            scale = np.max(np.abs(state.layers[i + 1].values))
            assert err.max() < 1e-6 * max(scale, 1e-30)


class TestRecenterAverage:
    def test_constant(self):
        g = RadialGrid.uniform(0.0, 5.0, 301)
        f = RadialField.constant(g, 3.0)
        for d, r, n in ((0.0, 1.0, 4), (1.0, 2.0, 5), (0.7, 1.3, 3)):
            assert recenter_average(f, d, r, n) == pytest.approx(3.0,
                                                                 abs=1e-12)

    def test_concentric_reduces_to_value(self):
        g = RadialGrid.uniform(0.0, 5.0, 1001)
        f = RadialField.from_function(g, lambda r: np.exp(-r))
        assert recenter_average(f, 0.0, 2.0, 4) == pytest.approx(
            math.exp(-2.0), rel=1e-8)

    def test_square_profile(self):
        g = RadialGrid.uniform(0.0, 6.0, 2401)
        f = RadialField.from_function(g, lambda r: r ** 2)
        for n in (3, 4, 6):
            for d, r in ((1.0, 1.0), (0.5, 2.0), (2.0, 0.7)):
                assert recenter_average(f, d, r, n) == pytest.approx(
                    d * d + r * r, rel=1e-7)

    def test_extrapolation_error(self):
        g = RadialGrid.uniform(0.0, 2.0, 64)
        f = RadialField.constant(g, 1.0)
        with pytest.raises(ExtrapolationError):
            recenter_average(f, 1.5, 1.0, 4)


class TestJensen:
    def test_constant_is_equality_case(self):
        g = RadialGrid.uniform(0.0, 4.0, 301)
        f = RadialField.constant(g, 2.0)
        assert abs(jensen_gap(f, 2.0, 1.0, 1.0, 4)) < 1e-12

    def test_square_profile_oracle(self):
        # independent theta-quadrature oracle for avg(|x|^4) at d = r = 1,
        # n = 4: the gap equals avg(|x|^4) - (d^2+r^2)^2
        g = RadialGrid.uniform(0.0, 6.0, 4801)
        f = RadialField.from_function(g, lambda r: r ** 2)
        num, _ = quad(lambda t: (2.0 + 2.0 * math.cos(t)) ** 2
                      * math.sin(t) ** 2, 0.0, math.pi)
        den, _ = quad(lambda t: math.sin(t) ** 2, 0.0, math.pi)
        expected = num / den - 4.0
        gap = jensen_gap(f, 2.0, 1.0, 1.0, 4)
        assert gap == pytest.approx(expected, rel=1e-6)
        assert gap > 0.0

    def test_gap_nonnegative_battery(self, rng):
        g = RadialGrid.uniform(0.0, 8.0, 801)
        profiles = [
            RadialField.from_function(g, lambda r: np.exp(-r)),
            RadialField.from_function(g, lambda r: 1.0 / (1.0 + r ** 2)),
            RadialField(g, rng.uniform(0.5, 2.0, len(g))),
        ]
        for f in profiles:
            for _ in range(10):
                d = float(rng.uniform(0.0, 2.0))
                r = float(rng.uniform(0.1, 2.0))
                p = float(rng.uniform(1.1, 3.0))
                assert jensen_gap(f, p, d, r, 4) >= -1e-10

    def test_strict_for_nonconstant(self):
        g = RadialGrid.uniform(0.0, 5.0, 801)
        f = RadialField.from_function(g, lambda r: 1.0 + r)
        assert jensen_gap(f, 2.0, 1.0, 1.0, 4) > 1e-6


def test_weighted_source_lower_bound(rng):
    # avg(f^p |x|^(-a)) >= min_sphere(|x|^(-a)) * avg(f)^p, both weight signs
    g = RadialGrid.uniform(0.0, 8.0, 801)
    f = RadialField.from_function(g, lambda r: 1.0 / (1.0 + r))
    for a in (-1.5, -0.5, 0.5, 1.5):
        for _ in range(8):
            d = float(rng.uniform(0.5, 2.0))
            r = float(rng.uniform(0.1, 2.0))
            if abs(d - r) < 1e-2:
                continue
            avg = recenter_average(f, d, r, 4)
            lhs = weighted_source_average(f, 2.0, a, d, r, 4)
            bound = hardy_bound_factor(d, r, a) * avg ** 2
            assert lhs >= bound * (1.0 - 1e-9)


class TestSingularSolution:
    def test_reference_case(self):
        found = singular_solution(HardyHenonParams(4, 2, 0.0, 2.0))
        assert found is not None
        sigma, amplitude = found
        assert sigma == pytest.approx(4.0)
        assert amplitude == pytest.approx(192.0)

    def test_degenerate_factor_returns_none(self):
        assert singular_solution(HardyHenonParams(4, 2, 0.0, 3.0)) is None

    def test_sigma_formula(self):
        assert HardyHenonParams(4, 2, 2.0, 2.0).sigma == pytest.approx(2.0)

    def test_pde_residual(self):
        sigma, amplitude = singular_solution(HardyHenonParams(4, 2, 0.0, 2.0))
        grid = RadialGrid.uniform(0.45, 2.05, 401)
        u = RadialField.from_function(grid, lambda r: amplitude * r ** -sigma)
        op = polyharmonic_apply(u, 4, 2, width=7)
        rhs = amplitude ** 2 * grid.nodes ** -8.0
        window = (grid.nodes >= 0.5) & (grid.nodes <= 2.0)
        residual = np.max(np.abs(op.values - rhs)[window])
        assert residual < 1e-5 * amplitude ** 2


class TestRescale:
    def test_identity(self):
        g = RadialGrid.uniform(0.5, 2.0, 64)
        u = RadialField.from_function(g, lambda r: np.exp(-r))
        params = HardyHenonParams(4, 2, 0.0, 2.0)
        v = rescale(u, 1.0, params)
        np.testing.assert_allclose(v.values, u.values, rtol=0)
        np.testing.assert_allclose(v.grid.nodes, g.nodes, rtol=0)

    def test_fixes_singular_solution_exactly(self):
        params = HardyHenonParams(4, 2, 0.0, 2.0)
        sigma, amplitude = singular_solution(params)
        g = RadialGrid.uniform(0.5, 2.0, 64)
        u = RadialField.from_function(g, lambda r: amplitude * r ** -sigma)
        for lam in (0.5, 1.7, 3.0):
            v = rescale(u, lam, params)
            expected = amplitude * v.grid.nodes ** -sigma
            np.testing.assert_allclose(v.values, expected, rtol=1e-13)

    def test_pde_invariance_critical_order(self):
        # residual(u_lam)(r) = lam^(sigma + 2m) residual(u)(lam r): exact at
        # the discrete level because the stencils scale covariantly
        params = HardyHenonParams(4, 2, 0.0, 2.0)
        g = RadialGrid.uniform(0.5, 2.0, 301)
        u = RadialField.from_function(g, lambda r: 5.0 * r ** -3.0)
        lam = 1.3

        def residual(field, a_weight=0.0):
            op = polyharmonic_apply(field, params.n, params.m)
            src = np.maximum(field.values, 0.0) ** params.p \
                * field.grid.nodes ** (-a_weight)
            return op.values - src

        res_u = residual(u)
        res_ul = residual(rescale(u, lam, params))
        scale = lam ** (params.sigma + 2 * params.m)
        atol = 1e-8 * np.max(np.abs(res_u)) * scale
        np.testing.assert_allclose(res_ul, scale * res_u, atol=atol, rtol=0)
