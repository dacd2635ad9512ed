import cmath
import math

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st

from stability.bounds import (
    SeriesSpec,
    audit,
    convergence_predicate,
    corollary_constant,
    phi_tilde,
    series_constant,
)
from stability.choices import (
    Corollary,
    Direction,
    DirectionMode,
    Family,
    PerturbationKind,
    TailMode,
)
from stability.controls import ControlFunction
from stability.direct_method import Scheme
from stability.exceptions import (
    ControlKindError,
    DivergentSeries,
    OutOfRegime,
    SingularPoint,
)
from stability.functions import AdditiveCore, Perturbation, TestFunction
from stability.inequality import RhoParams
from stability.space import NormedSpace, SamplePlan, draw_samples


class CorollaryConstantTests(SimpleTestCase):

    def test_spot_values(self):
        self.assertAlmostEqual(
            corollary_constant(Corollary.C24, 1, 0.5, 0), 1.707107, delta=1e-6
        )
        self.assertAlmostEqual(
            corollary_constant(Corollary.C24, 1, 0.5, 0.5), 4.552285, delta=1e-6
        )
        self.assertAlmostEqual(
            corollary_constant(Corollary.C34, 1, 0.5, 0, beta=1), 3.414214, delta=1e-6
        )
        self.assertAlmostEqual(
            corollary_constant(Corollary.C26, 1, 2, 0), 4 / 3, places=12
        )

    def test_out_of_regime(self):
        with self.assertRaises(OutOfRegime):
            corollary_constant(Corollary.C24, 1, 1, 0)

        with self.assertRaises(OutOfRegime):
            corollary_constant(Corollary.C26, 1, 0, 0)

        with self.assertRaises(OutOfRegime) as ctx:
            corollary_constant(Corollary.C36, 1, 0.5, 0, beta=1)

        self.assertIn("|1+beta|**r - |1+beta|", ctx.exception.detail)

    def test_beta_required(self):
        with self.assertRaises(ValueError):
            corollary_constant(Corollary.C34, 1, 0.5, 0)


class PhiTildeTests(SimpleTestCase):

    def setUp(self):
        self.line = NormedSpace(1)

    def test_forward_dyadic_matches_c24(self):
        for r in (0.25, 0.5, 0.75):
            for rho2 in (0.0, 0.3, 0.6):
                for theta in (0.5, 1.0):
                    spec = SeriesSpec(Scheme.dyadic(), rho2_abs=rho2)
                    series = phi_tilde(
                        ControlFunction.power(theta, r), self.line, 3.0, spec
                    )
                    expected = corollary_constant(Corollary.C24, theta, r, rho2) * 3.0 ** r

                    self.assertLessEqual(abs(series.total - expected), 1e-9 * expected)

    def test_forward_beta_matches_c34(self):
        for beta in (1.0, 2.0):
            for r in (0.25, 0.5):
                spec = SeriesSpec(Scheme.beta(beta), rho2_abs=0.3)
                series = phi_tilde(ControlFunction.power(1.0, r), self.line, 0.5, spec)
                expected = (
                    corollary_constant(Corollary.C34, 1.0, r, 0.3, beta=beta) * 0.5 ** r
                )

                self.assertLessEqual(abs(series.total - expected), 1e-9 * expected)

    def test_series_constant_matches_series(self):
        spec = SeriesSpec(Scheme.dyadic(), rho2_abs=0.3, alpha=2.0)
        series = phi_tilde(ControlFunction.power(1.0, 0.5), self.line, 1.0, spec)
        constant = series_constant(Scheme.dyadic(), 1.0, 0.5, 0.3, alpha=2.0)

        self.assertAlmostEqual(series.total, constant, places=9)

    def test_backward_dyadic_telescoping_sum(self):
        constant = series_constant(Scheme.dyadic(Direction.BACKWARD), 1.0, 2.0, 0.0)
        brute_force = sum(
            2 ** i * 0.5 * (2 * (1 / 2 ** (i + 1)) ** 2) for i in range(200)
        )

        self.assertAlmostEqual(constant, 0.5, places=12)
        self.assertAlmostEqual(brute_force, 0.5, places=12)

    def test_zero_control_and_origin(self):
        spec = SeriesSpec(Scheme.dyadic())

        zero = phi_tilde(ControlFunction.zero(), self.line, 1.0, spec)
        origin = phi_tilde(ControlFunction.power(1, 0.5), self.line, 0.0, spec)

        self.assertEqual((zero.value, zero.tail), (0.0, 0.0))
        self.assertEqual((origin.value, origin.tail), (0.0, 0.0))

    def test_negative_exponent_at_origin(self):
        spec = SeriesSpec(Scheme.dyadic())

        with self.assertRaises(SingularPoint) as ctx:
            phi_tilde(ControlFunction.power(1.0, -0.5), self.line, 0.0, spec)

        self.assertEqual(ctx.exception.code, "singular-point")

    def test_divergent_power_series(self):
        with self.assertRaises(DivergentSeries) as ctx:
            phi_tilde(
                ControlFunction.power(1, 1.0), self.line, 1.0, SeriesSpec(Scheme.dyadic())
            )

        self.assertEqual(ctx.exception.exit_code, 2)

        with self.assertRaises(DivergentSeries):
            series_constant(Scheme.dyadic(Direction.BACKWARD), 1.0, 0.5, 0.0)

    def test_tabulated_control_stops_at_coverage(self):
        control = ControlFunction.tabulated([0.5, 1.0, 2.0], [1.0, 1.0])
        series = phi_tilde(control, self.line, 1.0, SeriesSpec(Scheme.dyadic()))

        self.assertIsNone(series.tail)
        self.assertAlmostEqual(series.value, 0.375, places=15)

    def test_measured_control_extrapolated_tail(self):
        control = ControlFunction.measured([0.5, 1.0], [1.0], theta=1.0, r=0.5)
        spec = SeriesSpec(Scheme.dyadic(), trunc_terms=4)
        series = phi_tilde(control, self.line, 1.0, spec)

        self.assertIsNotNone(series.tail)
        self.assertAlmostEqual(series.total, 0.25 / (1 - 2 ** -0.5), places=12)

    def test_measured_control_inside_table_has_no_tail(self):
        control = ControlFunction.measured([0.5, 1e6], [1.0], theta=1.0, r=0.5)
        series = phi_tilde(control, self.line, 1.0, SeriesSpec(Scheme.dyadic(), trunc_terms=4))

        self.assertIsNone(series.tail)

    def test_measured_linear_envelope_diverges(self):
        control = ControlFunction.measured([0.5, 1.0], [1.0], theta=1.0, r=1.0)

        with self.assertRaises(DivergentSeries):
            phi_tilde(control, self.line, 1.0, SeriesSpec(Scheme.dyadic(), trunc_terms=4))

    def test_tail_mode_none(self):
        spec = SeriesSpec(Scheme.dyadic(), tail_mode=TailMode.NONE)
        series = phi_tilde(ControlFunction.power(1, 0.5), self.line, 1.0, spec)

        self.assertIsNone(series.tail)

    @settings(max_examples=40, deadline=None)
    @given(
        st.floats(min_value=0.1, max_value=10.0),
        st.floats(min_value=0.0, max_value=2 * math.pi),
    )
    def test_homogeneity(self, magnitude, phase):
        control = ControlFunction.power(0.7, 0.5)
        spec = SeriesSpec(Scheme.dyadic(), rho2_abs=0.2)
        x = 0.3 + 0.4j
        scaled = phi_tilde(control, self.line, magnitude * cmath.exp(1j * phase) * x, spec)
        plain = phi_tilde(control, self.line, x, spec)

        self.assertLessEqual(
            abs(scaled.total - magnitude ** 0.5 * plain.total),
            1e-9 * scaled.total,
        )


class ConvergencePredicateTests(SimpleTestCase):

    def test_forward_dyadic(self):
        verdict = convergence_predicate(Scheme.dyadic(), 0.5)

        self.assertTrue(verdict)
        self.assertEqual(verdict.condition, "2**(r-1) < 1")
        self.assertIsNone(verdict.note)

        self.assertFalse(convergence_predicate(Scheme.dyadic(), 1.0))

    def test_backward_dyadic(self):
        self.assertTrue(convergence_predicate(Scheme.dyadic(Direction.BACKWARD), 2.0))
        self.assertFalse(convergence_predicate(Scheme.dyadic(Direction.BACKWARD), 0.5))

    def test_printed_range_disagreement_is_noted(self):
        verdict = convergence_predicate(Scheme.beta(1.0), 2.0)

        self.assertFalse(verdict)
        self.assertEqual(verdict.condition, "|1+beta|**(r-1) < 1")
        self.assertAlmostEqual(verdict.ratio, 2.0)
        self.assertIn("diverges", verdict.note)
        self.assertIn("r > 1", verdict.note)


class AuditTests(SimpleTestCase):

    def setUp(self):
        self.line = NormedSpace(1)
        self.points = draw_samples(self.line, SamplePlan(seed=3, count=20))

    def _fixed_power(self, theta, r):
        return TestFunction(
            self.line,
            AdditiveCore.identity(1),
            Perturbation(
                kind=PerturbationKind.POWER,
                theta=theta,
                r=r,
                direction_mode=DirectionMode.FIXED,
            ),
        )

    def test_backward_dyadic_constant_mismatch(self):
        result = audit(
            self._fixed_power(0.5, 2.0),
            RhoParams(Family.A),
            Scheme.dyadic(Direction.BACKWARD),
            ControlFunction.power(1.0, 2.0),
            self.points,
        )

        self.assertEqual(result.which, Corollary.C26)
        self.assertAlmostEqual(result.paper_constant, 4 / 3, places=12)
        self.assertAlmostEqual(result.derived_constant, 0.5, places=12)
        self.assertLessEqual(result.empirical_sup, 0.5 + 1e-9)
        self.assertGreater(result.empirical_sup, 0.49)
        self.assertEqual(
            result.verdicts,
            {
                "empirical_le_derived": "pass",
                "empirical_le_paper": "pass",
                "derived_vs_paper": "mismatched",
            },
        )

    def test_forward_dyadic_constants_agree(self):
        result = audit(
            self._fixed_power(0.1, 0.5),
            RhoParams(Family.A, rho2=0.5),
            Scheme.dyadic(),
            ControlFunction.power(1.0, 0.5),
            self.points,
        )

        self.assertAlmostEqual(result.derived_constant, result.paper_constant, places=9)
        self.assertEqual(result.verdicts["derived_vs_paper"], "consistent")
        self.assertEqual(result.verdicts["empirical_le_derived"], "pass")

    def test_unavailable_printed_constant(self):
        result = audit(
            TestFunction(self.line, AdditiveCore.identity(1)),
            RhoParams(Family.A),
            Scheme.dyadic(Direction.BACKWARD),
            ControlFunction.power(1.0, 0.0),
            self.points,
        )

        self.assertIsNone(result.paper_constant)
        self.assertIsNone(result.derived_constant)
        self.assertEqual(result.empirical_sup, 0.0)
        self.assertEqual(set(result.verdicts.values()), {"unavailable"})

    def test_needs_power_control(self):
        with self.assertRaises(ControlKindError):
            audit(
                self._fixed_power(0.1, 0.5),
                RhoParams(Family.A),
                Scheme.dyadic(),
                ControlFunction.tabulated([0.5, 1.0], [1.0]),
                self.points,
            )

    def test_empirical_sup_scales_with_theta(self):
        small = audit(
            self._fixed_power(0.1, 0.5),
            RhoParams(Family.A),
            Scheme.dyadic(),
            ControlFunction.power(1.0, 0.5),
            self.points,
        )

        self.assertLessEqual(abs(small.empirical_sup - 0.1), 1e-8)
        self.assertTrue(np.isfinite(small.derived_constant))
