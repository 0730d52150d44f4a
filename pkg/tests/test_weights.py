"""Weight families: sampling determinism, variance scaling, exact moments."""

import math

import numpy as np
import pytest

from widegauss.weights import (
    FAMILIES,
    InfiniteMomentError,
    WeightSpec,
    moment_constant,
    sample_matrix,
)


def _spec(family, c_w=1.0):
    if family == "student_t":
        return WeightSpec(family=family, c_w=c_w, nu=9.0)
    return WeightSpec(family=family, c_w=c_w)


class TestWeightSpec:
    def test_unknown_family_rejected(self):
        with pytest.raises(ValueError, match="unknown weight family"):
            WeightSpec(family="laplace")

    def test_nonpositive_scale_rejected(self):
        with pytest.raises(ValueError, match="c_w"):
            WeightSpec(family="gaussian", c_w=0.0)

    def test_student_t_requires_nu(self):
        with pytest.raises(ValueError, match="nu"):
            WeightSpec(family="student_t")
        with pytest.raises(ValueError, match="nu"):
            WeightSpec(family="student_t", nu=2.0)

    def test_nu_rejected_elsewhere(self):
        with pytest.raises(ValueError, match="nu"):
            WeightSpec(family="gaussian", nu=5.0)

    @pytest.mark.parametrize("family", FAMILIES)
    def test_dict_round_trip(self, family):
        spec = _spec(family, c_w=2.5)
        assert WeightSpec.from_dict(spec.to_dict()) == spec

    def test_from_dict_rejects_unknown_keys(self):
        with pytest.raises(ValueError, match="unknown weight spec keys"):
            WeightSpec.from_dict({"family": "gaussian", "mean": 0.0})


class TestSampleMatrix:
    @pytest.mark.parametrize("family", FAMILIES)
    def test_deterministic_per_address(self, family):
        spec = _spec(family)
        a = sample_matrix(spec, 16, 8, 32, seed=3, layer=1, replicate=2)
        b = sample_matrix(spec, 16, 8, 32, seed=3, layer=1, replicate=2)
        assert np.array_equal(a, b)

    @pytest.mark.parametrize("family", FAMILIES)
    def test_addresses_are_independent(self, family):
        spec = _spec(family)
        base = sample_matrix(spec, 16, 8, 32, seed=3)
        for other in (
            sample_matrix(spec, 16, 8, 32, seed=4),
            sample_matrix(spec, 16, 8, 32, seed=3, layer=1),
            sample_matrix(spec, 16, 8, 32, seed=3, replicate=1),
        ):
            assert not np.array_equal(base, other)

    @pytest.mark.parametrize("family", FAMILIES)
    @pytest.mark.parametrize("c_w", [0.5, 1.0, 2.0])
    def test_variance_matches_c_w_over_fan_in(self, family, c_w):
        spec = _spec(family, c_w=c_w)
        fan_in = 64
        draws = sample_matrix(spec, 500, 400, fan_in, seed=0)
        target = c_w / fan_in
        # 200k samples: relative MC error on the variance is below ~2%
        assert np.mean(draws**2) == pytest.approx(target, rel=0.05)
        assert np.mean(draws) == pytest.approx(0.0, abs=4 * math.sqrt(target / draws.size) * 4)

    def test_rademacher_support(self):
        spec = WeightSpec(family="rademacher", c_w=4.0)
        draws = sample_matrix(spec, 50, 50, 25, seed=1)
        assert set(np.unique(draws)) == {-0.4, 0.4}

    def test_uniform_support(self):
        spec = WeightSpec(family="uniform", c_w=1.0)
        fan_in = 12
        half_width = math.sqrt(3.0 / fan_in)
        draws = sample_matrix(spec, 200, 200, fan_in, seed=1)
        assert np.all(np.abs(draws) < half_width)
        assert np.max(np.abs(draws)) > 0.95 * half_width

    def test_invalid_shape_rejected(self):
        with pytest.raises(ValueError):
            sample_matrix(_spec("gaussian"), 0, 4, 4, seed=0)


class TestMomentConstant:
    """c_k is defined by E|W|^k = c_k * fan_in^{-k/2}; oracle is Monte Carlo."""

    @pytest.mark.parametrize("family", FAMILIES)
    @pytest.mark.parametrize("k", [1, 2, 3, 4, 6])
    def test_against_monte_carlo(self, family, k):
        spec = _spec(family, c_w=1.3)
        fan_in = 16
        draws = sample_matrix(spec, 1000, 1000, fan_in, seed=7)
        mc = np.mean(np.abs(draws) ** k) * fan_in ** (k / 2.0)
        # heavier tails need looser MC tolerance at higher order
        rel = 0.02 if k <= 2 else (0.3 if family == "student_t" else 0.1)
        assert moment_constant(spec, k) == pytest.approx(mc, rel=rel)

    def test_second_moment_is_c_w(self):
        for family in FAMILIES:
            spec = _spec(family, c_w=1.7)
            assert moment_constant(spec, 2) == pytest.approx(1.7, rel=1e-12)

    def test_gaussian_even_moments_exact(self):
        spec = WeightSpec(family="gaussian", c_w=1.0)
        assert moment_constant(spec, 4) == pytest.approx(3.0, rel=1e-14)
        assert moment_constant(spec, 6) == pytest.approx(15.0, rel=1e-14)

    def test_rademacher_all_one(self):
        spec = WeightSpec(family="rademacher", c_w=1.0)
        for k in range(1, 9):
            assert moment_constant(spec, k) == 1.0

    def test_uniform_closed_form(self):
        spec = WeightSpec(family="uniform", c_w=1.0)
        # E|U|^k over [-a, a] is a^k/(k+1) with a = sqrt(3)
        assert moment_constant(spec, 4) == pytest.approx(9.0 / 5.0, rel=1e-14)

    def test_student_t_moment_blowup(self):
        spec = WeightSpec(family="student_t", c_w=1.0, nu=5.0)
        assert moment_constant(spec, 4) > 0
        with pytest.raises(InfiniteMomentError):
            moment_constant(spec, 5)
        with pytest.raises(InfiniteMomentError):
            moment_constant(spec, 6)

    def test_invalid_order_rejected(self):
        with pytest.raises(ValueError, match="moment order"):
            moment_constant(_spec("gaussian"), 0)
