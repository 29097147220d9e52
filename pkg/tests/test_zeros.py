import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jacobi_lt.detfun import DetContext, h_of_z
from jacobi_lt.operator import PerturbationSpec
from jacobi_lt.resolvent import dist_to_band, dist_to_band_z
from jacobi_lt.zeros import (
    BlaschkeParams,
    Circle,
    ContourZeroError,
    Provenance,
    Rectangle,
    SpectralPoint,
    SubdivisionError,
    blaschke_sum,
    count_zeros_in_disk,
    discrete_spectrum,
    find_zeros,
    jensen_check,
    match_spectra,
    newton_refine,
    search_radius,
    truncated_spectrum,
    winding_number,
)

SQRT5 = math.sqrt(5)


def poly(roots):
    roots = [complex(r) for r in roots]

    def f(z):
        z = np.asarray(z, dtype=complex)
        out = np.ones_like(z)
        for r in roots:
            out = out * (1 - z / r)
        return out

    return f


def rank_one_h(b):
    ctx = DetContext(PerturbationSpec.from_sites(b={0: b}))
    return lambda z: h_of_z(ctx, z)


class TestWinding:
    def test_examples(self):
        unit = Circle(0j, 1.0)
        assert winding_number(lambda z: z**2, unit) == 2
        assert winding_number(lambda z: np.ones_like(z), unit) == 0
        assert winding_number(lambda z: np.ones_like(z), Rectangle(-1, 2, -3, 0.5)) == 0
        assert winding_number(lambda z: z - 0.5, unit) == 1

    def test_rectangle(self):
        f = poly([0.5, -0.5, 0.2j])
        assert winding_number(f, Rectangle(0, 1, -0.1, 0.1)) == 1
        assert winding_number(f, Rectangle(-1, 1, -0.1, 0.3)) == 3

    def test_pole_gives_negative(self):
        assert winding_number(lambda z: 1 / (z - 0.1), Circle(0j, 0.5)) == -1

    def test_zero_on_contour(self):
        with pytest.raises(ContourZeroError):
            winding_number(lambda z: z - 0.5, Circle(0j, 0.5))

    def test_high_degree_needs_refinement(self):
        assert winding_number(lambda z: z**200 - 0.5**200, Circle(0j, 0.9)) == 200

    def test_rectangle_nodes_on_boundary(self):
        box = Rectangle(-1, 2, -0.5, 1.5)
        pts = box.nodes(37)
        on_edge = np.isclose(pts.real, -1) | np.isclose(pts.real, 2) | np.isclose(pts.imag, -0.5) | np.isclose(pts.imag, 1.5)
        assert np.all(on_edge) and pts[0] == complex(-1, -0.5)


class TestFindZeros:
    def test_simple_pair(self):
        found = find_zeros(poly([0.5, -0.5]), 0.01, 0.9)
        assert [m for _, m in found] == [1, 1]
        assert sorted(z.real for z, _ in found) == pytest.approx([-0.5, 0.5], abs=1e-12)

    def test_double(self):
        found = find_zeros(poly([0.3, 0.3]), 0.01, 0.9)
        assert len(found) == 1 and found[0][1] == 2
        assert abs(found[0][0] - 0.3) <= 1e-12

    def test_triple_and_simple(self):
        found = find_zeros(poly([0.3, 0.3, 0.3, -0.6]), 0.01, 0.9)
        assert sorted(m for _, m in found) == [1, 3]
        triple = next(z for z, m in found if m == 3)
        assert abs(triple - 0.3) <= 1e-10

    def test_rank_one_imaginary(self):
        found = find_zeros(rank_one_h(3j), 0.01, 0.9, singularities=(1.0, -1.0))
        assert len(found) == 1 and found[0][1] == 1
        z = found[0][0]
        assert z == pytest.approx(-1j * (3 - SQRT5) / 2, abs=1e-12)
        assert abs(z - (-0.3819660j)) <= 5e-8

    def test_annulus_excludes(self):
        f = poly([0.05, 0.5, 0.95])
        found = find_zeros(f, 0.1, 0.9)
        assert [round(abs(z), 9) for z, _ in found] == [0.5]

    def test_ordering(self):
        found = find_zeros(poly([0.5j, -0.5, 0.2, 0.5]), 0.01, 0.9)
        keys = [(abs(z), cmath.phase(z)) for z, _ in found]
        assert keys == sorted(keys)

    def test_rejects_singularity_inside(self):
        with pytest.raises(ValueError):
            find_zeros(lambda z: (z - 0.5) / (z - 0.7), 0.01, 0.9, singularities=(0.7,))

    def test_bad_region(self):
        with pytest.raises(ValueError):
            find_zeros(poly([0.5]), 0.5, 0.4)

    def test_depth_cap_reports(self):
        with pytest.raises(SubdivisionError) as info:
            find_zeros(poly([0.3, 0.3 + 1e-9]), 0.01, 0.9, tol=1e-14, max_depth=3)
        assert info.value.unresolved

    def test_near_pair_resolved_as_cluster(self):
        found = find_zeros(poly([0.45 + 0.2j, 0.4501 + 0.2j]), 0.01, 0.9)
        assert sum(m for _, m in found) == 2

    @given(st.lists(st.builds(lambda r, t: r * cmath.exp(1j * t), st.floats(0.05, 0.85), st.floats(0, 2 * math.pi)), min_size=1, max_size=5))
    def test_counting_consistency(self, roots):
        f = poly(roots)
        r = 0.9
        n = count_zeros_in_disk(f, r)
        assert n == len(roots)
        found = find_zeros(f, 0.0, r)
        assert sum(m for _, m in found) == n

    def test_newton(self):
        f = poly([0.5, -0.5])
        z = newton_refine(f, 0.45 + 0.02j, 0.1)
        assert abs(z - 0.5) <= 1e-14
        assert newton_refine(lambda z: np.exp(z), 0.1, 0.1) is None


class TestCounting:
    def test_examples(self):
        f = poly([0.5, -0.5])
        assert count_zeros_in_disk(f, 0.6) == 2
        assert count_zeros_in_disk(f, 0.4) == 0
        assert count_zeros_in_disk(rank_one_h(1.0), 0.7) == 1

    def test_monotone_in_radius(self):
        f = poly([0.1, 0.3j, -0.5, 0.7 + 0.1j, 0.2 - 0.6j])
        radii = np.linspace(0.05, 0.95, 37) + 0.0013  # avoid |roots| exactly
        counts = [count_zeros_in_disk(f, r) for r in radii]
        assert counts == sorted(counts) and counts[-1] == 5


class TestJensen:
    def test_examples(self):
        f = poly([0.5, -0.5])
        s, m = jensen_check(f, 0.75)
        assert s == pytest.approx(2 * math.log(1.5), rel=1e-12)
        assert abs(m - 0.8109302) <= 5e-8 and abs(s - m) <= 1e-8
        s, m = jensen_check(f, 0.25)
        assert s == 0.0 and abs(m) <= 1e-12
        s, m = jensen_check(lambda z: np.exp(np.asarray(z)), 0.6)
        assert s == 0.0 and abs(m) <= 1e-12

    @pytest.mark.parametrize("r", [0.35, 0.55, 0.8])
    def test_polynomials(self, r):
        for roots in ([0.3, 0.3], [0.3, 0.3, 0.3, -0.6], [0.5, 0.2 + 0.3j, -0.4 - 0.1j, 0.1j, -0.7 + 0.5j]):
            s, m = jensen_check(poly(roots), r)
            assert abs(s - m) <= 1e-8

    def test_needs_unit_value_at_origin(self):
        with pytest.raises(ValueError):
            jensen_check(lambda z: 2 + 0 * np.asarray(z), 0.5)

    def test_zero_on_circle(self):
        with pytest.raises(ContourZeroError):
            jensen_check(poly([0.5]), 0.5)


class TestBlaschke:
    def test_examples(self):
        base = blaschke_sum([(0.5, 1)], BlaschkeParams(alpha=0, tau=0.5))
        assert base == pytest.approx(0.5**1.5, rel=1e-15) and abs(base - 0.3535534) <= 5e-8
        assert blaschke_sum([(0.5, 1)], BlaschkeParams(alpha=0, tau=0.5, gamma=2)) == pytest.approx(1.0, rel=1e-15)
        with_xi = blaschke_sum([(0.5, 1)], BlaschkeParams(alpha=0, tau=0.5, betas=(2,), xis=(1,)))
        assert with_xi == pytest.approx(0.125, rel=1e-15)

    def test_multiplicity_and_infinite_term(self):
        p = BlaschkeParams(alpha=1, tau=0.25)
        assert blaschke_sum([(0.5j, 3)], p) == pytest.approx(3 * 0.5**2.25, rel=1e-15)
        assert blaschke_sum([(0, 1)], BlaschkeParams(alpha=0, tau=0.5, gamma=1)) == math.inf
        assert blaschke_sum([(0, 1)], BlaschkeParams(alpha=0, tau=0.5, gamma=0)) == 1.0

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(alpha=-1, tau=0.5),
            dict(alpha=0, tau=0.0),
            dict(alpha=0, tau=1.0),
            dict(alpha=0, tau=0.5, betas=(1,), xis=()),
            dict(alpha=0, tau=0.5, betas=(1,), xis=(1.1,)),
        ],
    )
    def test_param_validation(self, kwargs):
        with pytest.raises(ValueError):
            BlaschkeParams(**kwargs)

    def test_rejects_outside_disk(self):
        with pytest.raises(ValueError):
            blaschke_sum([(1.0, 1)], BlaschkeParams(alpha=0, tau=0.5))


class TestSpectralPoint:
    def test_validation(self):
        z = 0.5
        SpectralPoint(2.5, z, 1)
        with pytest.raises(ValueError):
            SpectralPoint(2.5, z, 0)
        with pytest.raises(ValueError):
            SpectralPoint(2.5, 2.0, 1)
        with pytest.raises(ValueError):
            SpectralPoint(2.6, z, 1)

    def test_from_lambda(self):
        sp = SpectralPoint.from_lambda(1.5j)
        assert sp.z == pytest.approx(-0.5j) and sp.provenance is Provenance.TRUNCATION
        assert sp.dist == 1.5 and sp.disc == pytest.approx(6.25)


class TestSearchRadius:
    @pytest.mark.parametrize("gap", [1e-6, 1e-3, 0.05, 0.5, 3.0])
    def test_covers_level_set(self, gap):
        r = search_radius(gap)
        assert 0 < r < 1
        # points just outside the radius are all closer than gap to the band
        ring = (r * 1.0001 + 1e-9) * np.exp(2j * np.pi * np.arange(2000) / 2000)
        ring = ring[np.abs(ring) < 1]
        assert np.all(dist_to_band_z(ring) < gap)

    def test_rejects(self):
        with pytest.raises(ValueError):
            search_radius(0.0)


class TestDiscreteSpectrum:
    def test_zero_perturbation(self):
        assert discrete_spectrum(PerturbationSpec.zero()) == []

    def test_rank_one_real(self):
        (sp,) = discrete_spectrum(PerturbationSpec.from_sites(b={0: 1.0}))
        assert sp.lam == pytest.approx(SQRT5, abs=1e-12) and sp.multiplicity == 1
        assert abs(sp.lam - 2.2360680) <= 5e-8
        assert sp.provenance is Provenance.DETERMINANT
        (tr,) = truncated_spectrum(PerturbationSpec.from_sites(b={0: 1.0}))
        assert abs(tr.lam - sp.lam) <= 1e-10

    def test_rank_one_imaginary(self):
        (sp,) = discrete_spectrum(PerturbationSpec.from_sites(b={0: 3j}))
        assert sp.lam == pytest.approx(1j * SQRT5, abs=1e-12)
        # -i sqrt 5 solves lam^2 = 4 + b^2 too, but its preimage lies outside the disk
        assert abs(sp.z) < 1

    def test_band_gap_filter(self):
        pert = PerturbationSpec.from_sites(b={0: 0.3})  # lam = sqrt(4.09), dist ~ 0.0224
        assert discrete_spectrum(pert, band_gap=0.05) == []
        (sp,) = discrete_spectrum(pert, band_gap=0.01)
        assert sp.lam == pytest.approx(math.sqrt(4.09), abs=1e-10)
        assert dist_to_band(sp.lam) >= 0.01

    def test_nearly_degenerate_pair(self):
        # two rank-one bumps 12 sites apart: sqrt 13 twice, split by tunnelling of order z^12
        pert = PerturbationSpec.from_sites(b={0: 3.0, 12: 3.0})
        spec = discrete_spectrum(pert)
        assert sum(sp.multiplicity for sp in spec) == 2
        for sp in spec:
            assert sp.lam == pytest.approx(math.sqrt(13), abs=1e-5)
        trunc = [sp.lam for sp in truncated_spectrum(pert, cluster_tol=0.0)]
        assert match_spectra(spec, trunc, 1e-8, 0.05).ok

    def test_parameter_errors(self):
        with pytest.raises(ValueError):
            discrete_spectrum(PerturbationSpec.zero(), band_gap=0)
        with pytest.raises(ValueError):
            discrete_spectrum(PerturbationSpec.zero(), p=0.5)

    def test_duality_sample(self, rng):
        for _ in range(5):
            w = int(rng.integers(1, 5))
            vals = [2 * np.sqrt(rng.random(w)) * np.exp(2j * np.pi * rng.random(w)) for _ in range(3)]
            pert = PerturbationSpec(0, *vals)
            det = discrete_spectrum(pert)
            margin = discrete_spectrum(pert, band_gap=0.04)
            trunc = [sp.lam for sp in truncated_spectrum(pert, band_gap=0.0, cluster_tol=0.0)]
            assert match_spectra(det, trunc, 1e-4, 0.05, margin).ok


class TestMatchSpectra:
    def test_detects_missing_and_extra(self):
        det = [SpectralPoint.from_lambda(3.0, provenance=Provenance.DETERMINANT)]
        assert match_spectra(det, [3.0 + 1e-6], 1e-4, 0.05).ok
        res = match_spectra(det, [], 1e-4, 0.05)
        assert res.unmatched_determinant and not res.ok
        res = match_spectra(det, [3.0, 4.0, 1.0 + 0.01j], 1e-4, 0.05)
        assert res.unmatched_truncation == [4.0]

    def test_multiplicity_mismatch(self):
        det = [SpectralPoint.from_lambda(3.0, 2, Provenance.DETERMINANT)]
        assert not match_spectra(det, [3.0], 1e-4, 0.05).ok
        assert match_spectra(det, [3.0, 3.0 + 1e-7], 1e-4, 0.05).ok
