import math

import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from locreq.errors import DomainError, MissingRepeatabilityError
from locreq.spatial import IDENTITY, MarginVector, RigidTransform
from locreq.uncertainty import (
    ConfidenceLevel,
    ErrorPercentiles,
    IlsSpec,
    StaticBasis,
    UpdateModel,
    VelocityBound,
    confidence_from_sigma,
    select_percentiles,
    static_uncertainty,
    time_delay_margin,
    time_gap_margin,
    uncertainty_space,
)


class TestSixSigma:
    @pytest.mark.parametrize("s", [2.0, 3.0, 4.0, 4.5, 5.0, 6.0])
    def test_matches_scipy(self, s):
        assert confidence_from_sigma(s) == pytest.approx(stats.norm.cdf(s - 1.5), rel=1e-14)

    def test_four_sigma(self):
        assert abs(confidence_from_sigma(4.0) - 0.9938) <= 1e-4
        assert confidence_from_sigma(4.0) == pytest.approx(0.993790334674, abs=1e-12)

    def test_six_sigma(self):
        assert 1 - confidence_from_sigma(6.0) == pytest.approx(3.40e-6, rel=1e-2)

    @pytest.mark.parametrize("s", [1.5, 1.0, 0.0, -3.0])
    def test_domain(self, s):
        with pytest.raises(DomainError):
            confidence_from_sigma(s)

    @given(st.floats(1.6, 8.0), st.floats(1.6, 8.0))
    def test_monotone(self, a, b):
        lo, hi = sorted((a, b))
        assert confidence_from_sigma(lo) <= confidence_from_sigma(hi)


class TestConfidenceLevel:
    def test_exactly_one(self):
        with pytest.raises(DomainError):
            ConfidenceLevel()
        with pytest.raises(DomainError):
            ConfidenceLevel(percentile=0.9, sigma=4)

    def test_probability(self):
        assert ConfidenceLevel.from_percentile(0.95).probability == 0.95
        assert ConfidenceLevel.from_sigma(4).probability == confidence_from_sigma(4)

    def test_sigma_too_low(self):
        with pytest.raises(DomainError):
            ConfidenceLevel.from_sigma(1.0)

    @pytest.mark.parametrize("p", [0.0, 1.0, 1.5])
    def test_percentile_range(self, p):
        with pytest.raises(DomainError):
            ConfidenceLevel.from_percentile(p)


class TestUpdateModel:
    def test_time_gap(self):
        assert UpdateModel.periodic(2).time_gap_s == 0.5
        assert UpdateModel.on_request().time_gap_s == 0.0
        assert UpdateModel.on_event().time_gap_s == 0.0

    @pytest.mark.parametrize("rate", [0, -1, math.inf, None])
    def test_bad_rate(self, rate):
        with pytest.raises(DomainError):
            UpdateModel("periodic", rate)

    def test_rate_on_request_rejected(self):
        with pytest.raises(DomainError):
            UpdateModel("on_request", 2.0)


class TestStaticUncertainty:
    def test_identity_passthrough(self):
        p = ErrorPercentiles(MarginVector(x=0.1, y=0.2, z=0.05), ConfidenceLevel.from_sigma(4))
        assert static_uncertainty(p, IDENTITY) == p.values

    def test_lever_arm_example(self):
        p = ErrorPercentiles(MarginVector(x=0.1, y=0.1, yaw=0.1), ConfidenceLevel.from_sigma(4))
        u = static_uncertainty(p, RigidTransform((1.0, 0.0, 0.0)))
        assert u["x"] == pytest.approx(0.1 + 2 * math.sin(0.05), abs=1e-15)
        assert u["x"] == pytest.approx(0.19996, abs=1e-5)
        assert u["y"] == u["x"]
        assert u["yaw"] == 0.1

    def test_z_unaffected(self):
        p = ErrorPercentiles(MarginVector(z=0.1, yaw=0.5), ConfidenceLevel.from_sigma(4))
        assert static_uncertainty(p, RigidTransform((3, 4, 0)))["z"] == 0.1

    @given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 10))
    def test_monotone_in_yaw(self, y1, y2, lever):
        lo, hi = sorted((y1, y2))
        t = RigidTransform((lever, 0, 0))
        conf = ConfidenceLevel.from_sigma(4)
        a = static_uncertainty(ErrorPercentiles(MarginVector(x=0.1, yaw=lo), conf), t)
        b = static_uncertainty(ErrorPercentiles(MarginVector(x=0.1, yaw=hi), conf), t)
        assert a["x"] <= b["x"]


class TestPercentileSelection:
    def _ils(self, repeatability=None):
        conf = ConfidenceLevel.from_sigma(4)
        return IlsSpec(
            "u",
            ErrorPercentiles(MarginVector(x=0.3), conf),
            UpdateModel.periodic(1),
            repeatability=None if repeatability is None
            else ErrorPercentiles(MarginVector(x=repeatability), conf),
        )

    def test_ground_truth_uses_accuracy(self):
        assert select_percentiles(self._ils(0.05), StaticBasis.GROUND_TRUTH).values["x"] == 0.3

    def test_same_system_uses_repeatability(self):
        assert select_percentiles(self._ils(0.05), "same_system_map").values["x"] == 0.05

    def test_missing_repeatability(self):
        with pytest.raises(MissingRepeatabilityError):
            select_percentiles(self._ils(), StaticBasis.SAME_SYSTEM_MAP)


class TestTimingMargins:
    def test_time_gap(self):
        tg = time_gap_margin(VelocityBound(x=0.1, y=0.7), UpdateModel.periodic(2))
        assert tg.to_dict() == pytest.approx({"x": 0.05, "y": 0.35})

    def test_delay_only_when_realtime(self):
        v = VelocityBound(x=1.0)
        assert time_delay_margin(v, 0.2, False)["x"] == 0.0
        assert time_delay_margin(v, 0.2, True)["x"] == 0.2

    def test_negative_latency(self):
        with pytest.raises(DomainError):
            time_delay_margin(VelocityBound(x=1.0), -0.1, True)

    def test_velocity_finite(self):
        with pytest.raises(DomainError):
            VelocityBound(x=math.inf)

    def test_uncertainty_space_sum(self):
        u = uncertainty_space(MarginVector(x=0.1), MarginVector(x=0.2), MarginVector(x=0.3))
        assert u["x"] == pytest.approx(0.6)
