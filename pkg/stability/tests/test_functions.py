import math

import numpy as np
from django.test import SimpleTestCase

from stability.choices import CoreKind, DirectionMode, NormKind
from stability.exceptions import DimensionMismatch, SingularPoint
from stability.functions import (
    AdditiveCore,
    Perturbation,
    TestFunction,
    additivity_defect,
    bounded_perturbed,
    constant_offset,
    evaluate,
    power_perturbed,
)
from stability.space import NormedSpace, SamplePlan, draw_samples


class EvaluateTests(SimpleTestCase):

    def setUp(self):
        self.plane = NormedSpace(2)
        self.line = NormedSpace(1)

    def test_identity_without_perturbation(self):
        f = TestFunction(self.plane, AdditiveCore.identity(2))
        value = evaluate(f, np.array([1, 2j]))

        np.testing.assert_array_equal(value, np.array([1, 2j]))

    def test_constant_offset(self):
        f = constant_offset(self.line, 0.5)

        for x in (0.0, 1.0, -3.25 + 2j):
            np.testing.assert_allclose(f(x), np.array([x + 0.5]), atol=1e-15)

    def test_power_perturbation_norm(self):
        f = power_perturbed(self.line, theta=1.0, r=0.5)

        self.assertAlmostEqual(self.line.norm(f(4.0) - 4.0), 2.0, places=12)

    def test_power_perturbation_vanishes_at_origin(self):
        f = power_perturbed(self.plane, theta=1.0, r=0.5)

        np.testing.assert_array_equal(f(self.plane.zero()), self.plane.zero())

    def test_negative_power_at_origin_is_singular(self):
        f = power_perturbed(self.plane, theta=1.0, r=-1.0)

        with self.assertRaises(SingularPoint):
            f(self.plane.zero())

    def test_force_zero_at_origin(self):
        f = TestFunction(
            self.line,
            AdditiveCore.identity(1),
            Perturbation.tabulated((), default=[0.5]),
            force_zero_at_origin=True,
        )

        np.testing.assert_array_equal(f(0.0), np.zeros(1))
        np.testing.assert_allclose(f(1.0), np.array([1.5]))

    def test_dimension_mismatch(self):
        f = TestFunction(self.plane, AdditiveCore.identity(2))

        with self.assertRaises(DimensionMismatch):
            f(np.ones(3))

        with self.assertRaises(DimensionMismatch):
            TestFunction(self.plane, AdditiveCore.identity(3))

    def test_evaluation_is_deterministic(self):
        f = power_perturbed(self.plane, theta=0.3, r=0.5, direction_seed=9)
        g = power_perturbed(self.plane, theta=0.3, r=0.5, direction_seed=9)
        x = np.array([0.3 - 1j, 2.0])

        self.assertEqual(f(x).tobytes(), g(x).tobytes())

    def test_hashed_directions_depend_on_point(self):
        f = power_perturbed(self.plane, theta=1.0, r=0.0)
        first = f(np.array([1.0, 0.0])) - np.array([1.0, 0.0])
        second = f(np.array([0.0, 1.0])) - np.array([0.0, 1.0])

        self.assertGreater(self.plane.norm(first - second), 1e-6)

    def test_tabulated_lookup_and_default(self):
        perturbation = Perturbation.tabulated(
            [([1.0, 0.0], [0.0, 2.0])], default=[5.0, 5.0]
        )
        f = TestFunction(self.plane, AdditiveCore.identity(2), perturbation)

        np.testing.assert_allclose(f(np.array([1.0, 0.0])), np.array([1.0, 2.0]))
        np.testing.assert_allclose(f(np.array([0.0, 1.0])), np.array([5.0, 6.0]))

    def test_real_linear_core_acts_on_real_coordinates(self):
        # complex conjugation on C^1 is additive but not complex-linear
        core = AdditiveCore(CoreKind.REAL_LINEAR, np.diag([1.0, -1.0]))
        f = TestFunction(self.line, core)

        np.testing.assert_allclose(f(2 + 3j), np.array([2 - 3j]))


class AdditivityDefectTests(SimpleTestCase):

    def setUp(self):
        self.plane = NormedSpace(2, NormKind.L2)
        self.line = NormedSpace(1)

    def test_exact_additive_has_zero_defect(self):
        f = TestFunction(self.plane, AdditiveCore.random(2, seed=4))
        points = draw_samples(self.plane, SamplePlan(seed=3, count=40))

        for x, y in zip(points[::2], points[1::2]):
            self.assertLessEqual(additivity_defect(f, x, y), 1e-12)

    def test_constant_offset_defect(self):
        f = constant_offset(self.line, 0.5)

        self.assertAlmostEqual(additivity_defect(f, 1.5, -0.25j), 0.5, places=14)

    def test_power_defect_with_fixed_direction(self):
        f = power_perturbed(
            self.line, theta=1.0, r=0.5, direction_mode=DirectionMode.FIXED
        )

        self.assertAlmostEqual(
            additivity_defect(f, 1.0, 1.0), abs(math.sqrt(2) - 2), places=6
        )

    def test_bounded_defect_at_most_three_epsilon(self):
        f = bounded_perturbed(self.plane, epsilon=0.2, direction_seed=1)
        points = draw_samples(self.plane, SamplePlan(seed=8, count=200, radius=10.0))

        for x, y in zip(points[::2], points[1::2]):
            self.assertLessEqual(additivity_defect(f, x, y), 0.6 + 1e-12)
            self.assertLessEqual(self.plane.norm(f(x) - x), 0.2 + 1e-12)
