import math

import numpy as np
import pytest

from hhlab.errors import KernelDomainError, QuadratureError
from hhlab.kernels import (BallGreen, RieszKernel, green_ball,
                           riesz_compose_check, riesz_constant)
from hhlab.liouville import representation_check
from hhlab.radial import RadialField, RadialGrid


class TestRieszConstant:
    def test_order_two_dim_four(self):
        assert riesz_constant(2, 4) == pytest.approx(
            1.0 / (4 * math.pi ** 2), abs=1e-15)

    @pytest.mark.parametrize("n", [4, 6, 8])
    def test_order_two_family(self, n):
        expected = math.gamma((n - 2) / 2) / (4 * math.pi ** (n / 2))
        assert riesz_constant(2, n) == pytest.approx(expected, rel=1e-14)

    def test_order_four_dim_five(self):
        assert riesz_constant(4, 5) == pytest.approx(
            1.0 / (16 * math.pi ** 2), abs=1e-14)

    def test_positive_and_finite_on_order_sweep(self):
        for n in (2, 3, 4, 5, 8):
            for alpha in np.linspace(0.05, n - 0.05, 37):
                c = riesz_constant(float(alpha), n)
                assert math.isfinite(c) and c > 0.0

    @pytest.mark.parametrize("alpha", [0.0, -1.0, 4.0, 5.5])
    def test_domain_errors(self, alpha):
        with pytest.raises(KernelDomainError):
            riesz_constant(alpha, 4)

    def test_kernel_object(self):
        k = RieszKernel(2.0, 4)
        assert k.constant == pytest.approx(riesz_constant(2, 4))
        assert k(2.0) == pytest.approx(k.constant * 2.0 ** -2)
        with pytest.raises(KernelDomainError):
            k(0.0)


class TestGreenBall:
    def test_boundary_vanishing(self, rng):
        x = np.array([0.2, -0.1, 0.05, 0.3])
        for _ in range(5):
            y = rng.normal(size=4)
            y *= 1.0 / np.linalg.norm(y)
            # on the sphere both terms coincide (zero up to round-off); the
            # outside branch returns an exact zero
            assert abs(green_ball(x, y, 1.0, 4)) < 1e-14
            assert green_ball(x, 1.000001 * y, 1.0, 4) == 0.0
            assert abs(green_ball(x, 0.999999 * y, 1.0, 4)) < 1e-4

    def test_symmetry(self, rng):
        for _ in range(20):
            x = rng.uniform(-0.5, 0.5, 5)
            y = rng.uniform(-0.5, 0.5, 5)
            if np.linalg.norm(x - y) < 1e-3:
                continue
            g1 = green_ball(x, y, 1.0, 5)
            g2 = green_ball(y, x, 1.0, 5)
            assert abs(g1 - g2) <= 1e-12 * max(1.0, abs(g1))

    def test_positive_interior(self, rng):
        for _ in range(20):
            x = rng.uniform(-0.4, 0.4, 4)
            y = rng.uniform(-0.4, 0.4, 4)
            if np.linalg.norm(x - y) < 1e-6:
                continue
            assert green_ball(x, y, 1.0, 4) > 0.0

    def test_origin_reduction(self):
        y = np.array([0.3, -0.2, 0.1, 0.4])
        R, n = 1.5, 4
        expected = riesz_constant(2, n) * (
            np.linalg.norm(y) ** (2 - n) - R ** (2 - n))
        assert green_ball(np.zeros(n), y, R, n) == pytest.approx(
            expected, rel=1e-13)

    def test_outside_zero_and_diagonal_error(self):
        x = np.array([2.0, 0.0, 0.0, 0.0])
        y = np.array([0.1, 0.0, 0.0, 0.0])
        assert green_ball(x, y, 1.0, 4) == 0.0
        with pytest.raises(KernelDomainError):
            green_ball(y, y, 1.0, 4)

    def test_harmonic_off_diagonal(self):
        # -Lap_x G(. , y) = 0 away from y, by centered second differences
        R, n = 1.0, 4
        y = np.array([0.45, 0.0, 0.0, 0.0])
        x = np.array([-0.2, 0.15, 0.1, -0.05])
        h = 1e-3
        lap = 0.0
        g0 = green_ball(x, y, R, n)
        for i in range(n):
            e = np.zeros(n)
            e[i] = h
            lap += (green_ball(x + e, y, R, n)
                    + green_ball(x - e, y, R, n) - 2.0 * g0) / h ** 2
        assert abs(lap) < 1e-4 * abs(g0) / h ** 0  # O(h^2) floor

    def test_wrapper_validation(self):
        with pytest.raises(KernelDomainError):
            BallGreen(1.0, 2)
        with pytest.raises(KernelDomainError):
            BallGreen(-1.0, 4)
        g = BallGreen(2.0, 5)
        x = np.zeros(5)
        y = np.array([0.5, 0, 0, 0, 0.0])
        assert g(x, y) == green_ball(x, y, 2.0, 5)


class TestComposition:
    def test_matches_closed_form_n5(self):
        lhs, rhs = riesz_compose_check(
            2.0, 2.0, np.zeros(5), np.array([1.0, 0, 0, 0, 0]), 5)
        assert rhs == pytest.approx(riesz_constant(4, 5), rel=1e-14)
        assert abs(lhs / rhs - 1.0) < 1e-2

    def test_closed_form_value_n4(self):
        _, rhs = riesz_compose_check(
            1.0, 1.0, np.zeros(4), np.array([2.0, 0, 0, 0]), 4)
        assert rhs == pytest.approx(riesz_constant(2, 4) / 4.0, rel=1e-14)
        assert rhs == pytest.approx(1.0 / (16 * math.pi ** 2), rel=1e-13)

    def test_scaling_homogeneity(self):
        a1, a2, n = 1.3, 2.1, 4
        lhs1, _ = riesz_compose_check(a1, a2, np.zeros(n),
                                      np.array([1.0, 0, 0, 0]), n)
        lam = 3.0
        lhs2, _ = riesz_compose_check(a1, a2, np.zeros(n),
                                      np.array([lam, 0, 0, 0]), n)
        assert lhs2 == pytest.approx(lhs1 * lam ** (a1 + a2 - n), rel=1e-12)

    def test_order_domain_errors(self):
        x, z = np.zeros(4), np.array([1.0, 0, 0, 0])
        with pytest.raises(KernelDomainError):
            riesz_compose_check(0.0, 1.0, x, z, 4)
        with pytest.raises(KernelDomainError):
            riesz_compose_check(2.5, 2.0, x, z, 4)  # sum exceeds n
        with pytest.raises(KernelDomainError):
            riesz_compose_check(1.0, 1.0, x, x, 4)

    def test_budget_too_small(self):
        with pytest.raises(QuadratureError):
            riesz_compose_check(2.0, 1.5, np.zeros(4),
                                np.array([1.0, 0, 0, 0]), 4,
                                quadrature_budget=100)


def test_representation_consistency_cross_module():
    # compactly supported smooth radial source: the kernel integral at the
    # origin equals the radial double-integral route to 1e-6
    grid = RadialGrid.uniform(0.0, 2.0, 4001)
    r = grid.nodes
    vals = np.where(r <= 1.0, (1.0 - r ** 2) ** 3, 0.0)
    f = RadialField(grid, vals)
    for n in (4, 5):
        check = representation_check(f, n)
        # independent oracle: R_{2,n} |S^{n-1}| int_0^1 r (1-r^2)^3 dr,
        # the moment integral is exactly 1/8
        expected = riesz_constant(2, n) * (
            2 * math.pi ** (n / 2) / math.gamma(n / 2)) / 8.0
        assert check.potential_at_0 == pytest.approx(expected, abs=1e-8)
        assert check.direct == pytest.approx(check.potential_at_0, abs=1e-6)
        assert not check.truncated
