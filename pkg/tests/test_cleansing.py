import json
import logging
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from windstoch import ConfigError, TurbineSeries, io
from windstoch.cleansing import RULES, CleansingConfig, cleanse

DATA = Path(__file__).parent / "data"
NA = np.nan


def make(avg, lo=None, hi=None, sd=None, wind=None):
    return TurbineSeries("wt", "2014-03-01T00:00:00Z", avg, power_min=lo, power_max=hi,
                         power_std=sd, wind_speed=wind)


class TestRules:
    def test_consecutive_identical(self):
        s = make([1234.56789, 1234.56789, 1500.0], lo=[1200, 1200, 1450], hi=[1300, 1300, 1550],
                 sd=[5, 5, 5])
        c, rep = cleanse(s)
        assert rep.counts["consecutive_identical"] == 1
        assert np.isnan(c.power_avg[1]) and not np.isnan(c.power_avg[[0, 2]]).any()

    def test_constant_operation_kept(self):
        s = make([3600.0] * 3, lo=[3600.0] * 3, hi=[3600.0] * 3, sd=[0.5] * 3)
        c, rep = cleanse(s)
        assert rep.counts["consecutive_identical"] == 0
        assert c.equals(s)

    def test_precision_digits(self):
        base = dict(lo=[0, 0], hi=[10, 10], sd=[1, 1])
        assert cleanse(make([5.0, 5.000001], **base))[1].counts["consecutive_identical"] == 1
        assert cleanse(make([5.0, 5.0001], **base))[1].counts["consecutive_identical"] == 0
        cfg = CleansingConfig(precision_digits=2)
        assert cleanse(make([5.0, 5.001], **base), cfg)[1].counts["consecutive_identical"] == 1

    def test_zero_std(self):
        s = make([10.0, 20.0, 30.0], sd=[1.0, 0.0, 1e-12])
        c, rep = cleanse(s)
        assert rep.counts["zero_std"] == 1
        assert np.isnan(c.power_avg[1]) and np.isnan(c.power_std[1])
        assert c.power_avg[2] == 30.0

    def test_upward_ramp(self):
        # jump 0.694 of rated power, min(t+1)=2550 > 0.99*124
        s = make([100.0, 2600.0], lo=[80.0, 2550.0], hi=[124.0, 2700.0], sd=[3, 3])
        c, rep = cleanse(s)
        assert rep.counts["unphysical_ramp"] == 1
        assert c.power_avg[0] == 100.0 and np.isnan(c.power_avg[1])
        assert np.isnan(c.power_min[1]) and np.isnan(c.power_max[1])

    def test_downward_ramp(self):
        s = make([3500.0, 300.0], lo=[3450.0, 250.0], hi=[3550.0, 340.0], sd=[3, 3])
        assert cleanse(s)[1].counts["unphysical_ramp"] == 1

    def test_ramp_with_overlap_kept(self):
        s = make([100.0, 2600.0], lo=[50.0, 2500.0], hi=[2600.0, 2700.0], sd=[3, 3])
        assert cleanse(s)[1].counts["unphysical_ramp"] == 0

    def test_small_jump_kept(self):
        s = make([200.0, 200.0 + 0.66 * 3600], lo=[190.0, 2550.0], hi=[210.0, 2600.0], sd=[3, 3])
        assert cleanse(s)[1].counts["unphysical_ramp"] == 0

    def test_wind_speed_kept(self):
        s = make([10.0, 20.0], sd=[0.0, 1.0], wind=[5.0, 6.0])
        c, _ = cleanse(s)
        np.testing.assert_array_equal(c.wind_speed, [5.0, 6.0])

    def test_existing_na_not_counted(self):
        s = make([NA, 20.0], sd=[0.0, 1.0])
        _, rep = cleanse(s)
        assert rep.counts["zero_std"] == 0
        assert rep.na_fraction_before == rep.na_fraction_after == 0.5

    def test_missing_channels_skip(self, caplog):
        with caplog.at_level(logging.WARNING):
            c, rep = cleanse(make([1.0, 1.0, 2.0]))
        assert set(rep.skipped) == {"consecutive_identical", "zero_std", "unphysical_ramp"}
        assert all(v == 0 for v in rep.counts.values())
        assert c.equals(make([1.0, 1.0, 2.0]))
        assert "skipped" in caplog.text

    def test_report_keys(self):
        _, rep = cleanse(make([1.0, 2.0], sd=[1, 1]))
        assert tuple(rep.counts) == RULES
        assert set(rep.to_dict()) == {"counts", "na_fraction_before", "na_fraction_after", "skipped"}

    @pytest.mark.parametrize("kw", [{"xi0": 0}, {"q": 0}, {"q": 1.5}, {"rated_power": -1},
                                    {"precision_digits": -1}])
    def test_config_validation(self, kw):
        with pytest.raises(ConfigError):
            CleansingConfig(**kw)

    def test_input_untouched(self):
        s = make([10.0, 20.0], sd=[0.0, 1.0])
        cleanse(s)
        assert s.power_avg[0] == 10.0


@pytest.fixture(scope="module")
def golden():
    series, _ = io.read_turbines(DATA / "cleansing_input.csv")
    expected, _ = io.read_turbines(DATA / "cleansing_expected.csv")
    meta = json.loads((DATA / "cleansing_expected.json").read_text())
    return series["WT07"], expected["WT07"], meta


class TestGolden:
    def test_counts(self, golden):
        s, _, meta = golden
        _, rep = cleanse(s)
        assert rep.counts == meta["counts"]
        assert rep.na_fraction_before == pytest.approx(meta["na_fraction_before"])
        assert rep.na_fraction_after == pytest.approx(meta["na_fraction_after"])

    def test_output_matches_golden(self, golden):
        s, exp, _ = golden
        c, _ = cleanse(s)
        assert c.equals(exp)
        assert io.turbines_to_csv(c) == (DATA / "cleansing_expected.csv").read_text()

    def test_idempotent(self, golden):
        s, _, _ = golden
        once, _ = cleanse(s)
        twice, rep2 = cleanse(once)
        assert twice.equals(once)
        assert sum(rep2.counts.values()) == 0


def random_series(data, n):
    avg = np.array(data.draw(st.lists(st.floats(0, 3600), min_size=n, max_size=n)))
    spread = np.array(data.draw(st.lists(st.floats(0, 400), min_size=n, max_size=n)))
    sd = np.array(data.draw(st.lists(st.sampled_from([0.0, 1.0, 5.0, 20.0]), min_size=n, max_size=n)))
    repeat = np.array(data.draw(st.lists(st.booleans(), min_size=n, max_size=n)))
    for i in range(1, n):
        if repeat[i]:
            avg[i] = avg[i - 1]
    return make(avg, lo=avg - spread, hi=avg + spread * 0.5, sd=sd)


@settings(max_examples=80, deadline=None)
@given(st.data(), st.integers(2, 60))
def test_idempotence_property(data, n):
    s = random_series(data, n)
    once, _ = cleanse(s)
    twice, rep = cleanse(once)
    assert twice.equals(once)
    assert sum(rep.counts.values()) == 0


@settings(max_examples=80, deadline=None)
@given(st.data(), st.integers(2, 60))
def test_unflagged_values_untouched(data, n):
    s = random_series(data, n)
    c, rep = cleanse(s)
    kept = ~np.isnan(c.power_avg)
    np.testing.assert_array_equal(c.power_avg[kept], s.power_avg[kept])
    assert int((~kept).sum()) == sum(rep.counts.values())
    assert rep.na_fraction_after >= rep.na_fraction_before


@settings(max_examples=80, deadline=None)
@given(st.data(), st.integers(2, 60), st.floats(0.05, 1.0), st.floats(0.0, 1.0),
       st.floats(0.05, 1.0), st.floats(0.0, 1.0))
def test_ramp_rule_monotone(data, n, xi_a, dxi, q_a, dq):
    s = random_series(data, n)
    xi_b, q_b = xi_a + dxi, min(1.0, q_a + dq)
    lax = cleanse(s, CleansingConfig(xi0=xi_a, q=q_a))[1].counts["unphysical_ramp"]
    strict = cleanse(s, CleansingConfig(xi0=xi_b, q=q_b))[1].counts["unphysical_ramp"]
    assert strict <= lax
