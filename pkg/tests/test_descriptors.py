"""Descriptor grammar: umbilical data, immersions, mean curvature, shapes."""

import math

import numpy as np
import pytest

from hyperflow import oracle
from hyperflow.catalog import CATALOG
from hyperflow.descriptors import (
    Ambient,
    EuclideanIso,
    FullProduct,
    ProductOfSpheres,
    Umbilic,
    chart_dim,
    classify_shape,
    derive_umbilic,
    descriptor_from_json,
    descriptor_to_json,
    dimensions,
    immerse,
    mean_curvature,
)
from hyperflow.errors import DomainError, EmptyHypersurfaceError, InvalidArgumentError
from hyperflow.lorentz import Membership, ambient_membership, minkowski_inner
from hyperflow.scenario import chart_samples


class TestDeriveUmbilic:
    def test_circle_data(self):
        umb = derive_umbilic([0.0, 0.0, -1.0], 2.0)
        assert umb.beta == pytest.approx(1.0 / math.sqrt(3.0))
        assert umb.alpha == pytest.approx(2.0 / math.sqrt(3.0))
        assert np.allclose(umb.eta, [0.0, 0.0, 2.0])
        assert umb.c == pytest.approx(2.0 - math.sqrt(3.0))
        assert umb.kind == "spherical" and not umb.totally_geodesic

    def test_null_normal_forces_euclidean(self):
        umb = derive_umbilic([1.0, 0.0, -1.0], 1.0)
        assert umb.beta == pytest.approx(1.0)
        assert umb.alpha == 1.0
        assert umb.kind == "euclidean"
        assert umb.eta is None

    def test_geodesic_case(self):
        umb = derive_umbilic([1.0, 0.0, 0.0], 0.0)
        assert umb.alpha == 0.0 and umb.beta == 1.0
        assert umb.totally_geodesic
        assert np.allclose(umb.eta, np.zeros(3))

    def test_negative_level_is_normalized(self):
        umb = derive_umbilic([0.0, 0.0, 1.0], -2.0)
        assert umb.a == 2.0
        assert np.allclose(umb.xi, [0.0, 0.0, -1.0])

    @pytest.mark.parametrize(
        "xi,a",
        [((0.0, 0.0, -1.0), 1.0), ((0.0, 0.0, -1.0), 0.5), ((1.0, 0.0, -1.0), 0.0)],
    )
    def test_rejects_exactly_the_empty_inputs(self, xi, a):
        with pytest.raises(EmptyHypersurfaceError):
            derive_umbilic(xi, a)

    def test_accepts_the_boundary_of_emptiness(self):
        derive_umbilic((0.0, 0.0, -1.0), 1.0 + 1e-6)  # <xi,xi> + a^2 barely positive

    def test_unnormalized_xi_rejected(self):
        with pytest.raises(InvalidArgumentError):
            derive_umbilic([2.0, 0.0, 0.0], 1.0)

    def test_center_radius_identity(self):
        # <x - eta, x - eta> = 1/(alpha^2 - 1) at points of the hypersurface
        umb = derive_umbilic([0.0, 0.0, -1.0], 2.0)
        x = np.array([math.sqrt(3.0), 0.0, 2.0])
        rel = x - np.asarray(umb.eta)
        assert minkowski_inner(rel, rel) == pytest.approx(1.0 / (umb.alpha**2 - 1.0))


class TestDimensions:
    def test_ambient(self):
        assert dimensions(Ambient(3)) == (3, 3, 0)

    def test_full_product_tube(self):
        assert dimensions(CATALOG["tube_h3"]) == (2, 3, 1)

    def test_circle(self):
        assert dimensions(CATALOG["circle_h2"]) == (1, 2, 1)

    def test_clifford(self):
        assert dimensions(CATALOG["clifford_tube_h5"]) == (3, 5, 2)

    def test_nested(self):
        assert dimensions(CATALOG["circle_in_h4_nested"]) == (1, 4, 3)


class TestImmerse:
    def test_circle_chart(self):
        d = CATALOG["circle_h2"]
        theta = 0.7
        x = immerse(d, [theta])
        expected = [math.sqrt(3) * math.cos(theta), math.sqrt(3) * math.sin(theta), 2.0]
        assert np.allclose(x, expected, atol=1e-12)

    def test_horocycle_chart(self):
        d = CATALOG["horocycle_h2"]
        assert np.allclose(immerse(d, [0.0]), [0, 0, 1], atol=1e-15)
        s = 0.8
        x = immerse(d, [s])
        # solve the two constraints directly: <x,xi> = 1 and <x,x> = -1
        assert minkowski_inner(x, [1.0, 0.0, -1.0]) == pytest.approx(1.0, abs=1e-12)
        assert minkowski_inner(x, x) == pytest.approx(-1.0, abs=1e-12)

    def test_tube_chart(self):
        d = CATALOG["tube_h3"]
        s, theta = 0.5, 1.2
        x = immerse(d, [s, theta])
        expected = [
            math.sqrt(2) * math.sinh(s),
            math.cos(theta),
            math.sin(theta),
            math.sqrt(2) * math.cosh(s),
        ]
        assert np.allclose(x, expected, atol=1e-12)

    def test_every_sample_is_on_the_hyperboloid(self, catalog_entry):
        name, d = catalog_entry
        for u in chart_samples(d, 4, 11):
            x = immerse(d, u)
            assert ambient_membership(x, 1.0) is Membership.ON_HYPERBOLOID

    def test_umbilic_constraints_along_the_chain(self):
        d = CATALOG["circle_in_h4_nested"]
        for u in chart_samples(d, 4, 2):
            x = immerse(d, u)
            assert abs(minkowski_inner(x, np.asarray(d.umb.xi)) - d.umb.a) < 1e-10

    def test_wrong_chart_length_rejected(self):
        with pytest.raises(InvalidArgumentError):
            immerse(CATALOG["tube_h3"], [0.1])


class TestMeanCurvature:
    def test_ambient_is_minimal(self):
        d = Ambient(3, 1.0)
        x = immerse(d, [0.2, -0.1, 0.4])
        mc = mean_curvature(d, x)
        assert np.allclose(mc.hyperbolic, 0.0)
        assert np.allclose(mc.lorentzian, 3.0 * x)

    def test_circle_closed_form(self):
        d = CATALOG["circle_h2"]
        x = np.array([math.sqrt(3), 0.0, 2.0])
        mc = mean_curvature(d, x)
        assert np.allclose(mc.hyperbolic, [-4 / math.sqrt(3), 0.0, -2.0], atol=1e-12)
        norm = math.sqrt(minkowski_inner(mc.hyperbolic, mc.hyperbolic))
        assert norm == pytest.approx(2.0 / math.sqrt(3.0))
        # |H| equals coth of the geodesic radius, cosh(rho) = 2
        rho = math.acosh(2.0)
        assert norm == pytest.approx(1.0 / math.tanh(rho))

    def test_horocycle_closed_form(self):
        d = CATALOG["horocycle_h2"]
        mc = mean_curvature(d, [0.0, 0.0, 1.0])
        assert np.allclose(mc.hyperbolic, [-1.0, 0.0, 0.0], atol=1e-14)
        assert math.sqrt(minkowski_inner(mc.hyperbolic, mc.hyperbolic)) == pytest.approx(1.0)

    def test_tangency_to_the_hyperboloid(self, catalog_entry):
        name, d = catalog_entry
        for u in chart_samples(d, 3, 5)[:6]:
            x = immerse(d, u)
            mc = mean_curvature(d, x)
            assert abs(minkowski_inner(mc.hyperbolic, x)) < 1e-10

    def test_off_manifold_rejected(self):
        with pytest.raises(DomainError):
            mean_curvature(CATALOG["circle_h2"], [0.0, 0.0, 1.0])

    def test_agrees_with_numeric_oracle(self, catalog_entry):
        name, d = catalog_entry
        imm = oracle.descriptor_immersion(d)
        imm_l = oracle.ImmersionEvaluator(chart_dim(d), oracle.LORENTZIAN, imm.func)
        worst_h = worst_l = 0.0
        for u in chart_samples(d, 100, 23, cap=100):
            x = immerse(d, u)
            mc = mean_curvature(d, x)
            worst_h = max(worst_h, float(np.max(np.abs(mc.hyperbolic - oracle.numeric_mean_curvature(imm, u, 1e-3)))))
            worst_l = max(worst_l, float(np.max(np.abs(mc.lorentzian - oracle.numeric_mean_curvature(imm_l, u, 1e-3)))))
        assert worst_h < 5e-4
        assert worst_l < 5e-4


class TestClassifyShape:
    def test_ambient(self):
        flags = classify_shape(Ambient(3))
        assert flags.minimal and flags.totally_geodesic and not flags.intrinsically_flat

    def test_circle_is_flat_not_minimal(self):
        flags = classify_shape(CATALOG["circle_h2"])
        assert not flags.minimal and flags.intrinsically_flat

    def test_tube_is_flat_product(self):
        flags = classify_shape(CATALOG["tube_h3"])
        assert not flags.minimal and flags.intrinsically_flat

    def test_geodesic_sphere_is_curved(self):
        assert not classify_shape(CATALOG["geodesic_sphere_h3"]).intrinsically_flat

    def test_minimal_equals_totally_geodesic_everywhere(self, catalog_entry):
        name, d = catalog_entry
        flags = classify_shape(d)
        assert flags.minimal == flags.totally_geodesic

    def test_totally_geodesic_wrapper(self):
        geodesic_h2 = Umbilic(derive_umbilic([1.0, 0.0, 0.0, 0.0], 0.0), Ambient(2))
        flags = classify_shape(geodesic_h2)
        assert flags.minimal and flags.totally_geodesic and not flags.intrinsically_flat


class TestTotallyGeodesicNumerically:
    def test_second_fundamental_form_vanishes(self):
        # a geodesic H^2 inside H^3, wrapped through a = 0
        d = Umbilic(derive_umbilic([1.0, 0.0, 0.0, 0.0], 0.0), Ambient(2))
        imm = oracle.descriptor_immersion(d)
        worst = 0.0
        for u in chart_samples(d, 3, 3)[:5]:
            _, _, _, II = oracle.second_fundamental_form(imm, u, 1e-3)
            for row in II:
                for w in row:
                    worst = max(worst, float(np.max(np.abs(w))))
        assert worst < 1e-8


class TestIsoparametricityOfTheConstruction:
    def test_principal_curvature_spread(self, catalog_entry):
        name, d = catalog_entry
        if dimensions(d).codim == 0:
            pytest.skip("codimension zero has no principal curvatures")
        spread = oracle.isoparametric_residual(d, 0.0, chart_samples(d, 3, 31)[:4])
        assert spread < 1e-6


class TestJsonRoundTrip:
    def test_catalog_round_trips(self, catalog_entry):
        name, d = catalog_entry
        assert descriptor_from_json(descriptor_to_json(d)) == d

    def test_euclidean_config_round_trips(self):
        e = EuclideanIso(1, ProductOfSpheres(((1, 2.0),)), offset=(0.0, 1.0, 0.5), ambient_dim=3)
        d = Umbilic(derive_umbilic([1.0, 0.0, 0.0, 0.0, -1.0], 1.0), e)
        assert descriptor_from_json(descriptor_to_json(d)) == d

    def test_point_leaf_round_trips(self):
        d = FullProduct(1, 3.0, ProductOfSpheres(point_position=(0.0, 1.0)))
        assert descriptor_from_json(descriptor_to_json(d)) == d

    def test_malformed_json_rejected(self):
        with pytest.raises(InvalidArgumentError):
            descriptor_from_json({"type": "mystery"})


class TestValidation:
    def test_full_product_needs_matching_radius(self):
        with pytest.raises(InvalidArgumentError):
            FullProduct(1, 2.0, ProductOfSpheres(((1, 2.5),)))

    def test_umbilic_kind_must_match_inner(self):
        with pytest.raises(InvalidArgumentError):
            Umbilic(derive_umbilic([0.0, 0.0, -1.0], 2.0), EuclideanIso(1))

    def test_spherical_leaf_radius_must_match(self):
        with pytest.raises(InvalidArgumentError):
            Umbilic(derive_umbilic([0.0, 0.0, -1.0], 2.0), ProductOfSpheres(((1, 2.0),)))
