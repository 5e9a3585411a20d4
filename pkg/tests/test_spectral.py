# tests/test_spectral.py
import numpy as np
import pytest
from django.test import SimpleTestCase

from susy.exceptions import DiscretizationError, SpecError
from susy.expressions import Expression
from susy.kernels import kernel_basis
from susy.models import FamilySpec, GridProblem
from susy.operators import DifferentialOperator
from susy.presets import PresetId, make
from susy.spectral import (
    default_problem,
    discretize,
    eigen_low,
    mother_spectral_check,
    normalizability_probe,
    pairing_check,
    run_spectrum,
)
from susy.typea import build_hamiltonians
from utils.grids import apply_factor_chain, central_difference, tridiagonal


def custom(N, W, E="0"):
    return FamilySpec(N=N, W=Expression.parse(W), E=Expression.parse(E))


HARMONIC = Expression.parse("q^2/2")


@pytest.mark.unit
class GridHelpersTest(SimpleTestCase):
    def test_free_particle_on_three_points(self):
        diagonal, off_diagonal = tridiagonal(np.zeros(3), 1.0)
        np.testing.assert_allclose(diagonal, [1.0, 1.0, 1.0])
        np.testing.assert_allclose(off_diagonal, [-0.5, -0.5])

    def test_grid_spacing_excludes_walls(self):
        problem = GridProblem(0.0, 17.0, 16)
        self.assertAlmostEqual(problem.spacing, 1.0)
        self.assertAlmostEqual(problem.points[0], 1.0)
        self.assertAlmostEqual(problem.points[-1], 16.0)

    def test_too_few_points(self):
        with self.assertRaises(SpecError):
            GridProblem(-1.0, 1.0, 8)

    def test_central_difference_is_exact_for_quartics(self):
        grid = np.linspace(-1, 1, 41)
        derivative = central_difference(grid ** 4, grid[1] - grid[0])
        np.testing.assert_allclose(derivative[2:-2], 4 * grid[2:-2] ** 3, atol=1e-10)

    def test_factor_chain_annihilates_gaussian(self):
        grid = np.linspace(-5, 5, 2001)
        image = apply_factor_chain(np.exp(-grid ** 2 / 2), grid[1] - grid[0], [grid])
        self.assertLess(np.max(np.abs(image[2:-2])), 1e-9)


@pytest.mark.unit
class EigenTest(SimpleTestCase):
    def test_diagonal_matrix(self):
        energies, vectors = eigen_low((np.array([1.0, 2.0, 3.0]), np.zeros(2)), 2)
        np.testing.assert_allclose(energies, [1.0, 2.0])
        self.assertEqual(vectors.shape, (3, 2))

    def test_too_many_levels(self):
        with self.assertRaises(DiscretizationError):
            eigen_low((np.array([1.0, 2.0, 3.0]), np.zeros(2)), 4)

    def test_harmonic_oscillator(self):
        discretization = discretize(None, GridProblem(-10.0, 10.0, 2000, potential=HARMONIC))
        energies, _ = eigen_low(discretization, 4)
        np.testing.assert_allclose(energies, [0.5, 1.5, 2.5, 3.5], atol=1e-3)
        self.assertLess(abs(energies[0] - 0.5), 1e-4)

    def test_second_order_convergence(self):
        errors = []
        for n in (500, 1000):
            discretization = discretize(None, GridProblem(-10.0, 10.0, n, potential=HARMONIC))
            energies, _ = eigen_low(discretization, 1)
            errors.append(abs(energies[0] - 0.5))
        self.assertTrue(3.5 < errors[0] / errors[1] < 4.5, errors)


@pytest.mark.unit
class DiscretizeTest(SimpleTestCase):
    def test_pole_inside_box(self):
        spec = make(PresetId.cubic(nu=2), 2)
        _, H_minus = build_hamiltonians(spec)
        with self.assertRaises(DiscretizationError):
            discretize(H_minus, GridProblem(-1.0, 1.0, 100), spec.poles, spec.bindings)

    def test_first_order_term(self):
        with self.assertRaises(DiscretizationError):
            discretize(DifferentialOperator((0, 1, Expression.parse("-1/2"))), GridProblem(-1.0, 1.0, 32))

    def test_wrong_leading_coefficient(self):
        with self.assertRaises(DiscretizationError):
            discretize(DifferentialOperator((0, 0, 1)), GridProblem(-1.0, 1.0, 32))

    def test_complex_potential(self):
        H = DifferentialOperator((Expression.parse("1i*q"), 0, Expression.parse("-1/2")))
        with self.assertRaises(DiscretizationError):
            discretize(H, GridProblem(-1.0, 1.0, 32))

    def test_default_problem_uses_family_window(self):
        problem = default_problem(make(PresetId.cubic(), 2), n=500)
        self.assertEqual((problem.a, problem.b, problem.n), (0.2, 12.0, 500))
        problem = default_problem(custom(1, "q"), n=500)
        self.assertEqual((problem.a, problem.b), (-10.0, 10.0))


@pytest.mark.slow
class SpectralPairingTest(SimpleTestCase):
    def test_harmonic_ladder(self):
        report = run_spectrum(custom(1, "q"), GridProblem(-10.0, 10.0, 2000), levels=5)
        np.testing.assert_allclose(report.eigenvalues_minus[:4], [0, 1, 2, 3], atol=1e-3)
        np.testing.assert_allclose(report.eigenvalues_plus[:4], [1, 2, 3, 4], atol=1e-3)
        self.assertEqual(report.kernel_levels, [0])
        for row in report.pairing[1:]:
            self.assertLess(row.residual, 1e-3)
        self.assertTrue(report.passed)
        self.assertTrue(all(flag.normalizable for flag in report.kernels))

    def test_second_fold_kernel_levels(self):
        spec = custom(2, "q")
        problem = GridProblem(-10.0, 10.0, 2000)
        rows = pairing_check(spec, problem, 4)
        self.assertEqual([row.kernel for row in rows], [True, True, False, False])
        self.assertTrue(all(row.passed for row in rows))

    def test_quartic_breaking_partners(self):
        spec = make(PresetId.quartic_breaking(g=0.1), 2)
        rows = pairing_check(spec, GridProblem(-8.0, 12.0, 3000), 8)
        partnered = [row for row in rows if not row.kernel][:5]
        self.assertEqual(len(partnered), 5)
        for row in partnered:
            self.assertLess(row.residual, 5e-3)

    def test_mother_polynomial_on_eigenvectors(self):
        spec = custom(2, "q")
        rows = mother_spectral_check(spec, GridProblem(-10.0, 10.0, 2000), 4)
        np.testing.assert_allclose([row.energy for row in rows], [-0.5, 0.5, 1.5, 2.5], atol=1e-3)
        for row in rows:
            self.assertLess(row.difference, 5e-3 * (1 + abs(row.polynomial)))
            self.assertTrue(row.passed)

    def test_pairing_fails_without_n_fold_structure(self):
        spec = custom(2, "q^3 + q^4/100")
        rows = pairing_check(spec, default_problem(spec), 5)
        partnered = [row for row in rows if not row.kernel]
        self.assertTrue(partnered)
        self.assertFalse(any(row.passed for row in partnered))
        self.assertGreater(min(row.residual for row in partnered), 0.1)

    def test_periodic_family_pairs_on_one_period(self):
        spec = make(PresetId.periodic(g=1.0), 2)
        rows = pairing_check(spec, default_problem(spec, n=2000), 4)
        partnered = [row for row in rows if not row.kernel]
        self.assertTrue(partnered)
        self.assertTrue(all(row.passed for row in partnered))

    def test_pairing_residual_shrinks_with_grid(self):
        spec = custom(2, "q")
        worst = []
        for n in (500, 1000):
            rows = pairing_check(spec, GridProblem(-10.0, 10.0, n), 4)
            worst.append(max(row.residual for row in rows if not row.kernel))
        self.assertLess(worst[1], worst[0] / 2, worst)


@pytest.mark.unit
class NormalizabilityTest(SimpleTestCase):
    def test_gaussian_is_normalizable(self):
        spec = custom(1, "q")
        state = kernel_basis(spec)[0]
        flag = normalizability_probe(state, default_problem(spec, n=400), spec)
        self.assertTrue(flag.normalizable)
        self.assertEqual(len(flag.windows), 4)
        self.assertAlmostEqual(flag.norm_squared, np.sqrt(np.pi), places=4)

    def test_quartic_breaking_kernel_escapes(self):
        spec = make(PresetId.quartic_breaking(g=0.1), 1)
        state = kernel_basis(spec)[0]
        flag = normalizability_probe(state, default_problem(spec, n=400), spec)
        self.assertFalse(flag.normalizable)

    def test_periodic_kernel_on_one_period(self):
        spec = make(PresetId.periodic(g=1.0), 1)
        state = kernel_basis(spec)[0]
        flag = normalizability_probe(state, default_problem(spec, n=400), spec, grow=False)
        self.assertTrue(flag.normalizable)
        self.assertEqual(len(flag.windows), 1)
