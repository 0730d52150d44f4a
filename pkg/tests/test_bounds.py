"""Tests for the explicit error-bound constants and the composed chain."""

import math

import numpy as np
import pytest

from widegauss.activations import activation
from widegauss.bounds import (
    CertificatePair,
    LedgerError,
    MeasuredPair,
    MomentLedger,
    PARTITION_CAP,
    SmoothingDomainError,
    bound_chain,
    combinatorial_constant,
    gaussianization_term,
    ledger_from_config,
    mixture_to_limit_term,
    moment_bound,
    moment_difference_bound,
    pair_cross_constant,
    pair_mismatch_constant,
    rate_bound,
    rate_exponent,
    smooth_to_wasserstein,
)
from widegauss.network import InputSet, NetworkConfig
from widegauss.weights import WeightSpec, moment_constant


def _net(widths, family="gaussian", act="relu", c_w=1.0):
    spec = WeightSpec(family=family, c_w=c_w)
    return NetworkConfig(
        widths=tuple(widths),
        weight_specs=(spec,) * (len(widths) - 1),
        activation=activation(act),
    )


def _ledger(p=3, depth=2, c2p_val=15.0, x_l1=(0.5, 1.0), n0=4):
    return MomentLedger(
        p=p,
        c2=(1.0,) * depth,
        c2p=(c2p_val,) * (depth - 1),
        c3_last=1.6,
        lip=1.0,
        sigma0=0.0,
        x_l1=x_l1,
        n0=n0,
    )


class TestCombinatorialConstant:
    def test_frozen_small_values(self):
        # Set partitions of {1..2p} with no singleton blocks.
        assert combinatorial_constant(1) == 1
        assert combinatorial_constant(2) == 4
        assert combinatorial_constant(3) == 41
        assert combinatorial_constant(4) == 715

    def test_cap_and_validation(self):
        combinatorial_constant(PARTITION_CAP)
        with pytest.raises(ValueError):
            combinatorial_constant(PARTITION_CAP + 1)
        with pytest.raises(ValueError):
            combinatorial_constant(0)
        with pytest.raises(ValueError):
            combinatorial_constant(2.5)


class TestMomentLedger:
    def test_depth_and_s(self):
        led = _ledger(depth=3)
        assert led.depth == 3
        assert led.s == 2

    def test_p_must_exceed_two(self):
        with pytest.raises(LedgerError):
            _ledger(p=2)

    def test_layer_count_consistency(self):
        with pytest.raises(LedgerError, match="one c2 entry"):
            MomentLedger(
                p=3, c2=(1.0,), c2p=(15.0,), c3_last=1.6,
                lip=1.0, sigma0=0.0, x_l1=(1.0,), n0=4,
            )

    def test_normalized_high_moment_floor(self):
        # c2p < 1 contradicts Jensen against the unit second moment.
        with pytest.raises(LedgerError, match="c2p >= 1"):
            _ledger(c2p_val=0.9)

    def test_negative_inputs_rejected(self):
        with pytest.raises(LedgerError):
            _ledger(x_l1=(-1.0, 1.0))
        with pytest.raises(LedgerError):
            MomentLedger(
                p=3, c2=(0.0, 1.0), c2p=(15.0,), c3_last=1.6,
                lip=1.0, sigma0=0.0, x_l1=(1.0,), n0=4,
            )


class TestLedgerFromConfig:
    def test_exact_constants_for_gaussian(self):
        config = _net([4, 16, 1])
        chi = InputSet(np.array([[1.0, -1.0, 0.0, 2.0]]))
        led = ledger_from_config(config, chi, p=3)
        spec = config.weight_specs[0]
        assert led.c2 == (1.0, 1.0)
        assert led.c2p == (moment_constant(spec, 6),)
        assert led.c3_last == moment_constant(spec, 3)
        assert led.lip == 1.0 and led.sigma0 == 0.0
        assert led.x_l1 == (4.0,)
        assert led.n0 == 4

    def test_small_cw_fails_moment_floor(self):
        config = _net([4, 16, 1], c_w=0.1)
        chi = InputSet(np.ones((1, 4)))
        with pytest.raises(LedgerError, match="c2p >= 1"):
            ledger_from_config(config, chi, p=3)

    def test_overrides(self):
        config = _net([4, 16, 1])
        chi = InputSet(np.ones((1, 4)))
        led = ledger_from_config(config, chi, p=3, overrides={"c2p": (99.0,)})
        assert led.c2p == (99.0,)
        with pytest.raises(LedgerError, match="unknown"):
            ledger_from_config(config, chi, p=3, overrides={"c_42": 1.0})


class TestMomentBound:
    def test_product_form_layer_one(self):
        led = _ledger()
        x = 1.5
        expected = 41.0 * max(15.0 * x**6 / 4.0**3, 1.0)
        assert moment_bound(1, x, led) == pytest.approx(expected, rel=1e-14)

    def test_product_form_layer_two(self):
        led = _ledger(depth=3)
        x = 2.0
        per_layer = 41.0
        input_clause = max(15.0 * x**6 / 4.0**3, 1.0)
        expected = per_layer**2 * input_clause * 15.0
        assert moment_bound(2, x, led) == pytest.approx(expected, rel=1e-14)

    def test_growth_clause_uses_lip_plus_offset(self):
        led = MomentLedger(
            p=3, c2=(1.0, 1.0), c2p=(15.0,), c3_last=1.6,
            lip=2.0, sigma0=1.0, x_l1=(0.0,), n0=4,
        )
        assert moment_bound(1, 0.0, led) == pytest.approx(41.0 * 3.0**6, rel=1e-14)

    def test_second_moment_variant(self):
        led = _ledger()
        small = moment_bound(1, 0.5, led, order=1)
        assert small == pytest.approx(1.0 * max(0.5**2 / 4.0, 1.0), rel=1e-14)
        with pytest.raises(ValueError):
            moment_bound(1, 0.5, led, order=2)

    def test_layer_range(self):
        led = _ledger(depth=2)
        with pytest.raises(ValueError):
            moment_bound(0, 1.0, led)
        with pytest.raises(ValueError):
            moment_bound(2, 1.0, led)


class TestPairConstants:
    def test_mismatch_formula(self):
        led = _ledger()
        b_max = max(moment_bound(1, 0.5, led), moment_bound(1, 1.0, led))
        p = 3
        expected = (
            2.0 * math.sqrt(2.0)
            * (4.0 * math.sqrt(2.0) * b_max) ** (1.0 / (2 * p - 1))
            * 1.0 ** ((2 * p - 2) / (2 * p - 1))
        )
        assert pair_mismatch_constant(1, 0.5, 1.0, led) == pytest.approx(
            expected, rel=1e-14
        )

    def test_cross_formula(self):
        led = _ledger()
        b_max = moment_bound(1, 1.0, led)
        expected = 4.0 * (8.0 * b_max) ** (3.0 / 5.0)
        assert pair_cross_constant(1, 1.0, 1.0, led) == pytest.approx(
            expected, rel=1e-14
        )

    def test_symmetric_in_points(self):
        led = _ledger()
        assert pair_mismatch_constant(1, 0.5, 1.0, led) == pair_mismatch_constant(
            1, 1.0, 0.5, led
        )


class TestGaussianization:
    def test_formula(self):
        val = gaussianization_term(d=3, fan_in=100, c2=2.0, c3=1.5, third_moment_sum=4.0)
        expected = (2.0 * 2.0**1.5 + 1.5) / 6.0 * 3.0 / 10.0 * 4.0
        assert val == pytest.approx(expected, rel=1e-14)

    def test_validation(self):
        with pytest.raises(ValueError):
            gaussianization_term(0, 10, 1.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            gaussianization_term(1, 10, -1.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            gaussianization_term(1, 10, 1.0, 1.0, -1.0)


class TestMixtureTerm:
    def test_certificate_single_pair(self):
        p = 3
        pair = CertificatePair(
            mismatch_const=2.0, cross_const=3.0, b2_geomean=1.5,
            w1_one=0.1, w1_two=0.2,
        )
        val = mixture_to_limit_term(1, 64, 1.0, [pair], "certificate", p=p)
        body = (
            2.0 * 0.1 ** (4.0 / 5.0)
            + 2.0 * 2.0 * 1.5 * 0.1 ** (2.0 / 5.0)
            + 3.0 * 0.2 ** (1.0 / 5.0)
        )
        assert val == pytest.approx(1.0 * 1 / 2.0 * body, rel=1e-14)

    def test_certificate_zero_w1_vanishes(self):
        pair = CertificatePair(
            mismatch_const=2.0, cross_const=3.0, b2_geomean=1.5,
            w1_one=0.0, w1_two=0.0,
        )
        assert mixture_to_limit_term(2, 64, 1.0, [pair], "certificate", p=3) == 0.0

    def test_measurement_single_pair(self):
        pair = MeasuredPair(mismatch=-0.3, variance=4.0, cross_covariance=0.25)
        val = mixture_to_limit_term(2, 100, 1.5, [pair], "measurement")
        body = 0.3 + math.sqrt(4.0 / 100.0) + 0.5
        assert val == pytest.approx(1.5 * 2 / 2.0 * body, rel=1e-14)

    def test_negative_cross_clips_to_zero(self):
        pair = MeasuredPair(mismatch=0.0, variance=0.0, cross_covariance=-1.0)
        assert mixture_to_limit_term(1, 4, 1.0, [pair], "measurement") == 0.0

    def test_pair_type_enforced_per_mode(self):
        cert = CertificatePair(1.0, 1.0, 1.0, 0.1, 0.1)
        meas = MeasuredPair(0.0, 1.0, 0.0)
        with pytest.raises(ValueError):
            mixture_to_limit_term(1, 4, 1.0, [meas], "certificate", p=3)
        with pytest.raises(ValueError):
            mixture_to_limit_term(1, 4, 1.0, [cert], "measurement")
        with pytest.raises(ValueError):
            mixture_to_limit_term(1, 4, 1.0, [cert], "exactly")
        with pytest.raises(ValueError):
            mixture_to_limit_term(1, 4, 1.0, [cert], "certificate")


class TestMomentDifferenceBound:
    def test_formula(self):
        d, q, cap, w1 = 3, 2, 5.0, 0.01
        expected = (
            2.0 * math.sqrt(3.0)
            * (4.0 * math.sqrt(3.0) * cap) ** ((d - 1) / (q + d - 1))
            * w1 ** (q / (q + d - 1))
        )
        assert moment_difference_bound(d, q, cap, w1) == pytest.approx(
            expected, rel=1e-14
        )

    def test_one_dimension_is_linear(self):
        assert moment_difference_bound(1, 4, 10.0, 0.25) == pytest.approx(
            2.0 * 0.25, rel=1e-14
        )

    def test_validation(self):
        with pytest.raises(ValueError):
            moment_difference_bound(0, 1, 1.0, 0.1)
        with pytest.raises(ValueError):
            moment_difference_bound(1, 1, -1.0, 0.1)


class TestSmoothing:
    def test_endpoint_value(self):
        for dim in (1, 2, 5, 16):
            threshold = 2.0 * math.sqrt(dim)
            assert smooth_to_wasserstein(threshold, dim) == pytest.approx(
                4.0 * math.sqrt(dim), abs=1e-12
            )

    def test_cube_root_scaling(self):
        val = smooth_to_wasserstein(0.001, 4)
        assert val == pytest.approx(2.0 * 4.0 ** (2.0 / 3.0) * 0.1, rel=1e-12)

    def test_domain_error_past_threshold(self):
        with pytest.raises(SmoothingDomainError):
            smooth_to_wasserstein(2.0 * math.sqrt(3.0) * 1.001, 3)

    def test_zero_maps_to_zero(self):
        assert smooth_to_wasserstein(0.0, 7) == 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            smooth_to_wasserstein(-0.1, 2)
        with pytest.raises(ValueError):
            smooth_to_wasserstein(0.1, 0)


class TestRateExponent:
    def test_last_hidden_layer_is_one_sixth(self):
        for p in (3, 5, 11):
            assert rate_exponent(2, 1, p) == 1.0 / 6.0

    def test_general_form(self):
        p = 5
        ratio = (p - 2.0) / (3.0 * (2.0 * p - 1.0))
        assert rate_exponent(4, 1, p) == pytest.approx((1.0 / 6.0) * ratio**2, rel=1e-15)

    def test_large_p_ladder(self):
        # ratio -> 1/6 as p grows, so the exponent tends to (1/6)^(L-m).
        p = 1e6
        for depth, m in ((3, 1), (4, 1), (4, 2), (5, 1)):
            target = (1.0 / 6.0) ** (depth - m)
            assert rate_exponent(depth, m, p) == pytest.approx(target, rel=1e-4)

    def test_validation(self):
        with pytest.raises(ValueError):
            rate_exponent(1, 1, 3)
        with pytest.raises(ValueError):
            rate_exponent(3, 3, 3)
        with pytest.raises(ValueError):
            rate_exponent(3, 1, 2)


class TestRateBound:
    def test_aggregate_form(self):
        val = rate_bound([64, 256], out_width=8, depth=3, p=3, scale=2.0)
        e1 = rate_exponent(3, 1, 3)
        e2 = rate_exponent(3, 2, 3)
        expected = 2.0 * 8.0 ** (1.0 / 3.0) * (64.0**-e1 + 256.0**-e2)
        assert val == pytest.approx(expected, rel=1e-14)

    def test_validation(self):
        with pytest.raises(ValueError):
            rate_bound([64], out_width=1, depth=3, p=3, scale=1.0)
        with pytest.raises(ValueError):
            rate_bound([64, 64], out_width=1, depth=3, p=3, scale=-1.0)


class TestBoundChain:
    def test_depth_two_composition(self):
        # Hand-compose the single final level from the public pieces.
        config = _net([4, 10000, 1])
        chi = InputSet(np.array([[0.5, -0.25, 0.0, 0.25], [0.1, 0.2, -0.3, 0.4]]))
        report = bound_chain(config, chi, p=3)
        led = ledger_from_config(config, chi, p=3)

        thirds = sum(moment_bound(1, x, led) ** 0.5 for x in led.x_l1)
        roots = sum(moment_bound(1, x, led) ** (1.0 / 6.0) for x in led.x_l1)
        gen = gaussianization_term(1, 10000, led.c2[1], led.c3_last, thirds)
        var = led.c2[1] * 1 / 2.0 * roots**2 / math.sqrt(10000)
        smooth3 = gen + var
        assert report.smooth3_final == pytest.approx(smooth3, rel=1e-13)
        assert report.w1_bound == pytest.approx(
            smooth_to_wasserstein(smooth3, 2), rel=1e-13
        )
        assert report.certified and report.smoothing_ok and report.power_reduction_ok
        assert report.rate_exponents == (1.0 / 6.0,)
        assert len(report.levels) == 1
        assert report.levels[0]["kind"] == "final"

    def test_depth_three_level_structure(self):
        config = _net([4, 4096, 4096, 1])
        chi = InputSet(np.array([[0.3, 0.0, -0.3, 0.1], [0.2, -0.1, 0.0, 0.0]]))
        report = bound_chain(config, chi, p=3)
        assert len(report.levels) == 2
        pair_level, final_level = report.levels
        assert pair_level["kind"] == "pair"
        # s=2: 3 unordered pairs, each evaluated at d=1 and d=2.
        assert len(pair_level["entries"]) == 6
        assert {e["d"] for e in pair_level["entries"]} == {1, 2}
        assert final_level["kind"] == "final"
        # Propagated W1 values make the final mixture term strictly positive.
        assert final_level["entries"][0]["mixture"] > 0
        assert report.w1_bound > 0
        assert report.rate_exponents == (
            rate_exponent(3, 1, 3),
            rate_exponent(3, 2, 3),
        )

    def test_narrow_widths_lose_certification(self):
        config = _net([4, 8, 8, 1])
        chi = InputSet(np.ones((2, 4)))
        report = bound_chain(config, chi, p=3)
        assert not report.certified
        assert not report.smoothing_ok
        assert math.isfinite(report.w1_bound)

    def test_wider_is_tighter(self):
        chi = InputSet(np.array([[0.5, -0.5, 0.25, 0.0]]))
        narrow = bound_chain(_net([4, 4096, 1]), chi, p=3)
        wide = bound_chain(_net([4, 65536, 1]), chi, p=3)
        assert wide.w1_bound < narrow.w1_bound

    def test_measurement_mode_runs_and_never_certifies(self):
        config = _net([4, 256, 256, 1])
        chi = InputSet(np.array([[0.5, -0.25, 0.0, 0.25]]))
        report = bound_chain(
            config, chi, mode="measurement", p=3, mc_replicates=256, seed=3
        )
        assert report.mode == "measurement"
        assert not report.certified
        assert math.isfinite(report.w1_bound) and report.w1_bound > 0
        again = bound_chain(
            config, chi, mode="measurement", p=3, mc_replicates=256, seed=3
        )
        assert again.w1_bound == report.w1_bound

    def test_measurement_is_tighter_than_certificate_here(self):
        config = _net([4, 512, 512, 1])
        chi = InputSet(np.array([[0.5, -0.25, 0.0, 0.25]]))
        cert = bound_chain(config, chi, p=3)
        meas = bound_chain(config, chi, mode="measurement", p=3, mc_replicates=512)
        assert meas.w1_bound < cert.w1_bound

    def test_report_dict_schema(self):
        config = _net([4, 4096, 1])
        chi = InputSet(np.ones((1, 4)) * 0.25)
        payload = bound_chain(config, chi, p=3).to_dict()
        assert payload["schema_version"] == 1
        assert set(payload) == {
            "schema_version", "mode", "p", "widths", "s", "w1_bound",
            "smooth3_final", "certified", "flags", "rate_exponents", "levels",
        }
        assert set(payload["flags"]) == {"smoothing_ok", "power_reduction_ok"}

    def test_input_validation(self):
        config = _net([4, 64, 1])
        chi = InputSet(np.ones((1, 4)))
        with pytest.raises(ValueError):
            bound_chain(config, chi, mode="oracle")
        with pytest.raises(ValueError):
            bound_chain(_net([4, 1]), chi)
        other = ledger_from_config(_net([4, 64, 64, 1]), chi, p=3)
        with pytest.raises(LedgerError, match="depth"):
            bound_chain(config, chi, ledger=other)
        wide_chi = InputSet(np.ones((3, 4)))
        led = ledger_from_config(config, chi, p=3)
        with pytest.raises(LedgerError):
            bound_chain(config, wide_chi, ledger=led)
