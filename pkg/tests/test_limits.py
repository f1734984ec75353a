"""Limit classification and evaluated forward/backward limit sets."""

import math

import numpy as np
import pytest

from hyperflow import oracle
from hyperflow.ball import ball_projection
from hyperflow.catalog import CATALOG
from hyperflow.descriptors import (
    Ambient,
    FullProduct,
    ProductOfSpheres,
    Umbilic,
    derive_umbilic,
    dimensions,
    immerse,
)
from hyperflow.errors import StationaryNoLimitError
from hyperflow.flow import hyperbolic_flow
from hyperflow.limits import (
    BACKWARD_IDEAL,
    BACKWARD_STATIONARY,
    FORWARD_FOCAL,
    FORWARD_GEODESIC,
    FORWARD_IDEAL_POINT,
    FORWARD_STATIONARY,
    backward_chart_map,
    backward_limit,
    classify_limits,
    forward_limit,
    hausdorff_distance,
    verify_flat_normal_bundle,
)
from hyperflow.lorentz import OrthonormalFrame, minkowski_inner
from hyperflow.scenario import chart_samples

LN2 = math.log(2.0)

EXPECTED_VARIANTS = {
    "ambient_h3": (FORWARD_STATIONARY, BACKWARD_STATIONARY),
    "circle_h2": (FORWARD_FOCAL, BACKWARD_IDEAL),
    "horocycle_h2": (FORWARD_IDEAL_POINT, BACKWARD_IDEAL),
    "equidistant_h2": (FORWARD_GEODESIC, BACKWARD_IDEAL),
    "geodesic_sphere_h3": (FORWARD_FOCAL, BACKWARD_IDEAL),
    "tube_h3": (FORWARD_FOCAL, BACKWARD_IDEAL),
    "clifford_tube_h5": (FORWARD_FOCAL, BACKWARD_IDEAL),
    "circle_in_h4_nested": (FORWARD_FOCAL, BACKWARD_IDEAL),
}


class TestClassifyLimits:
    def test_catalog_variants(self, catalog_entry):
        name, d = catalog_entry
        rep = classify_limits(d)
        assert (rep.forward.variant, rep.backward.variant) == EXPECTED_VARIANTS[name]

    def test_hyperbola_type_relaxes_onto_a_geodesic(self):
        # H^1(-2) translated by a point: eternal, flat, yet not an ideal point
        d = FullProduct(1, 2.0, ProductOfSpheres(point_position=(1.0,)))
        rep = classify_limits(d)
        assert rep.forward.variant == FORWARD_GEODESIC
        assert rep.backward.variant == BACKWARD_IDEAL

    def test_totally_geodesic_is_stationary_both_ways(self):
        d = Umbilic(derive_umbilic([1.0, 0.0, 0.0, 0.0], 0.0), Ambient(2))
        rep = classify_limits(d)
        assert rep.forward.variant == FORWARD_STATIONARY
        assert rep.backward.variant == BACKWARD_STATIONARY


class TestForwardLimit:
    def test_circle_focal_point(self):
        d = CATALOG["circle_h2"]
        fwd = forward_limit(d, chart_samples(d, 3, 5))
        assert fwd.collapse_time == pytest.approx(LN2, abs=1e-12)
        assert np.max(np.abs(fwd.samples - np.array([0.0, 0.0, 1.0]))) < 1e-6

    def test_circle_flow_approaches_the_focal_point(self):
        d = CATALOG["circle_h2"]
        x = immerse(d, [0.4])
        focal = np.array([0.0, 0.0, 1.0])
        d_coarse = np.linalg.norm(hyperbolic_flow(d, x, LN2 - 1e-6) - focal)
        d_fine = np.linalg.norm(hyperbolic_flow(d, x, LN2 - 1e-9) - focal)
        assert d_coarse < 1e-2
        assert d_fine < d_coarse

    def test_geodesic_sphere_collapses_to_its_center_point(self):
        d = CATALOG["geodesic_sphere_h3"]
        fwd = forward_limit(d, chart_samples(d, 3, 5))
        spread = np.max(np.std(fwd.samples, axis=0))
        assert spread < 1e-12  # a single focal point
        assert minkowski_inner(fwd.samples[0], fwd.samples[0]) == pytest.approx(-1.0, abs=1e-12)

    def test_tube_collapses_to_the_core_curve(self):
        d = CATALOG["tube_h3"]
        fwd = forward_limit(d, chart_samples(d, 3, 5))
        # the sphere factor dies; survivors fill a curve on the hyperboloid
        assert np.max(np.abs(fwd.samples[:, 1:3])) < 1e-12
        for row in fwd.samples:
            assert minkowski_inner(row, row) == pytest.approx(-1.0, abs=1e-9)

    def test_equidistant_limit_is_the_geodesic(self):
        d = CATALOG["equidistant_h2"]
        fwd = forward_limit(d, chart_samples(d, 4, 5))
        assert np.max(np.abs(fwd.samples[:, 0])) < 1e-12  # on {x_1 = 0}
        picked = fwd.immersion(np.zeros(1))
        assert np.allclose(picked, [0.0, 0.0, 1.0], atol=1e-12)

    def test_equidistant_limit_is_numerically_minimal(self):
        d = CATALOG["equidistant_h2"]
        fwd = forward_limit(d, [])
        imm = oracle.ImmersionEvaluator(1, oracle.HYPERBOLOID, fwd.immersion)
        for u in ([0.0], [0.6], [-0.9]):
            assert np.max(np.abs(oracle.numeric_mean_curvature(imm, u))) < 1e-6

    def test_horocycle_ideal_point(self):
        d = CATALOG["horocycle_h2"]
        fwd = forward_limit(d, [])
        assert np.allclose(fwd.ideal_point, [-1.0, 0.0], atol=1e-14)

    def test_horocycle_flow_reaches_the_ideal_point(self):
        d = CATALOG["horocycle_h2"]
        frame = OrthonormalFrame.standard(2)
        x = immerse(d, [0.7])
        y = ball_projection(frame, 1.0, hyperbolic_flow(d, x, 15.0)).coords
        assert np.linalg.norm(y - np.array([-1.0, 0.0])) < 1e-5

    def test_geodesic_limit_of_the_translated_hyperbola(self):
        d = FullProduct(1, 2.0, ProductOfSpheres(point_position=(1.0,)))
        fwd = forward_limit(d, chart_samples(d, 3, 5))
        for row in fwd.samples:
            assert row[1] == pytest.approx(0.0, abs=1e-15)
            assert minkowski_inner(row, row) == pytest.approx(-1.0, abs=1e-12)
        x = immerse(d, [0.5])
        far = hyperbolic_flow(d, x, 12.0)
        assert np.linalg.norm(far - fwd.immersion(np.array([0.5]))) < 1e-5


class TestBackwardLimit:
    def test_circle_fills_the_boundary_circle(self):
        d = CATALOG["circle_h2"]
        us = chart_samples(d, 4, 5)
        bwd = backward_limit(d, us)
        for u, p in zip(us, bwd.samples):
            x = immerse(d, u)
            assert np.allclose(p, x[:2] / math.sqrt(3.0), atol=1e-12)
        assert bwd.dim == 1

    def test_tube_limit_uses_the_leaf_at_q_star(self):
        d = CATALOG["tube_h3"]
        n, l, r = 2, 1, 2.0
        q_star = -((r - 1) / (2 * (n - l))) * math.log(1 + (n - l) / (n * (r - 1)))
        assert q_star == pytest.approx(-0.5 * math.log(1.5), abs=1e-15)
        us = chart_samples(d, 3, 5)
        bwd = backward_limit(d, us)
        assert bwd.dim == 2
        # the leaf is stationary (codimension 0 in its circle): the limit is
        # Phi(x, sqrt(2) y), unit norm
        for u, p in zip(us, bwd.samples):
            x = immerse(d, u)
            xv = np.array([x[0], x[3]])
            z = math.sqrt(2.0) * x[1:3]
            assert np.allclose(p, np.concatenate([[xv[0]], z]) / xv[1], atol=1e-12)

    def test_dimension_estimates_match(self, catalog_entry):
        name, d = catalog_entry
        if name == "ambient_h3":
            pytest.skip("stationary")
        bwd = backward_limit(d, chart_samples(d, 3, 9)[:6])
        assert bwd.dim == dimensions(d).n

    def test_flow_projections_converge_to_the_limit(self, catalog_entry):
        name, d = catalog_entry
        if name == "ambient_h3":
            pytest.skip("stationary")
        us = chart_samples(d, 3, 7)
        bwd = backward_limit(d, us, estimate_dim=False)
        frame = OrthonormalFrame.standard(dimensions(d).m)
        flowed = np.array(
            [ball_projection(frame, 1.0, hyperbolic_flow(d, immerse(d, u), -15.0)).coords for u in us]
        )
        assert hausdorff_distance(flowed, bwd.samples) < 1e-5

    def test_stationary_input_raises(self):
        with pytest.raises(StationaryNoLimitError):
            backward_chart_map(CATALOG["ambient_h3"])

    def test_horocycle_limit_parametrizes_the_punctured_circle(self):
        d = CATALOG["horocycle_h2"]
        chart = backward_chart_map(d)
        for s in (-2.0, 0.0, 1.5):
            p = chart(np.array([s]))
            expected = np.array([(1 - s**2), 2 * s]) / (1 + s**2)
            assert np.allclose(p, expected, atol=1e-12)


class TestFlatNormalBundle:
    def test_nested_circle_limit(self):
        d = CATALOG["circle_in_h4_nested"]
        bwd = backward_limit(d, chart_samples(d, 3, 5))
        assert verify_flat_normal_bundle(d, bwd) < 1e-4

    def test_codimension_one_is_trivially_flat(self):
        d = CATALOG["tube_h3"]
        bwd = backward_limit(d, chart_samples(d, 3, 5))
        assert verify_flat_normal_bundle(d, bwd) == 0.0

    def test_clifford_limit_codimension_one(self):
        d = CATALOG["clifford_tube_h5"]
        bwd = backward_limit(d, chart_samples(d, 3, 5))
        assert verify_flat_normal_bundle(d, bwd) == 0.0


class TestCompositeRecursion:
    def test_equidistant_tube_over_a_full_product(self):
        # an umbilical wrapper whose inner structure is itself a full product
        # exercises the deepest recursion of windows, flows and both limits
        from hyperflow.flow import existence_window
        from hyperflow.scenario import run_invariant_battery

        d = Umbilic(derive_umbilic((1.0, 0.0, 0.0, 0.0, 0.0), 1.0), CATALOG["tube_h3"])
        assert dimensions(d) == (2, 4, 2)
        w = existence_window(d)
        assert w.t_prime == pytest.approx(math.log(3.0) / 2.0, abs=1e-12)
        assert w.t_dprime == pytest.approx(1.0, abs=1e-12)
        assert w.t_max == pytest.approx(math.log(5.0) / 4.0, abs=1e-12)
        assert run_invariant_battery(d).overall_pass
        us = chart_samples(d, 3, 5)[:4]
        fwd = forward_limit(d, us)
        assert fwd.variant == FORWARD_FOCAL
        for s in fwd.samples:
            assert minkowski_inner(s, s) == pytest.approx(-1.0, abs=1e-9)
        bwd = backward_limit(d, us)
        assert bwd.dim == 2
        assert np.allclose(np.linalg.norm(bwd.samples, axis=1), 1.0, atol=1e-10)


class TestHausdorff:
    def test_identical_sets(self, rng):
        A = rng.normal(size=(5, 3))
        assert hausdorff_distance(A, A) == 0.0

    def test_known_offset(self):
        A = np.array([[0.0, 0.0]])
        B = np.array([[3.0, 4.0], [0.0, 1.0]])
        assert hausdorff_distance(A, B) == pytest.approx(5.0)
