import json
import math

import numpy as np
import pytest

from synthlearn.aggregation import WeightScheme
from synthlearn.inference import (
    TestReport,
    TestSpec,
    bootstrap_test,
    circular_block_indices,
    eligible_rows,
    placebo_panels,
    placebo_suite,
    stat_average,
    stat_sharp,
)
from synthlearn.learners import LearnerSpec, fit_pool
from synthlearn.panel import NullSpec, PanelError, PanelSeries
from synthlearn.resample import default_block_size

POOL = [LearnerSpec("ridge", {"lam": 1.0, "intercept": True}), LearnerSpec("knn", {"k": 5})]


def iid_panel(seed, n=120, t_minus=-39, t0=60, J=3, effect=0.0, m=0):
    rng = np.random.default_rng(seed)
    times = np.arange(t_minus, t_minus + n)
    X = rng.normal(size=(n, J))
    y = X @ np.full(J, 1.0 / J) + rng.normal(size=n) + effect * (times > t0)
    return PanelSeries(times, y, X, t0, m)


class TestStatistics:
    def test_sharp(self):
        assert stat_sharp([0, 0], [0, 0]) == 0
        assert stat_sharp([1, -1, 2], [0, 0, 0]) == pytest.approx(6 / math.sqrt(3), abs=1e-9)
        assert stat_sharp([1, -1, 2], [0, 0, 0]) == pytest.approx(3.464102, abs=1e-6)
        r = np.array([0.3, -1.2, 2.0])
        assert stat_sharp(3 * r, 0) == pytest.approx(9 * stat_sharp(r, 0), abs=1e-9)

    def test_average(self):
        assert stat_average([1, -1, 2], [0, 0, 0]) == pytest.approx(4 / 3, abs=1e-9)
        assert stat_average([1, -1], [0, 0]) == 0
        assert stat_average(np.full(5, 0.7), 0) == pytest.approx(5 * 0.49, abs=1e-9)

    def test_empty(self):
        with pytest.raises(ValueError):
            stat_sharp([], [])
        with pytest.raises(ValueError):
            stat_average([], [])


class TestCircularBlocks:
    def test_full_block_rotation(self):
        e = np.array([3, 5, 8, 9, 11])
        for s in range(30):
            out = circular_block_indices(e, 5, 5, np.random.default_rng(s))
            k = int(np.nonzero(e == out[0])[0][0])
            np.testing.assert_array_equal(out, np.roll(e, -k))

    def test_b2_enumeration(self):
        e = np.array([1, 2, 3, 4])
        # every start position of a length-2 run on the circle
        allowed = {tuple(e[(s + np.arange(2)) % 4]) for s in range(4)}
        assert allowed == {(1, 2), (2, 3), (3, 4), (4, 1)}
        seen = set()
        for s in range(400):
            out = circular_block_indices(e, 2, 4, np.random.default_rng(s))
            halves = {tuple(out[:2]), tuple(out[2:])}
            assert halves <= allowed
            seen |= halves
        assert seen == allowed

    def test_truncation(self):
        out = circular_block_indices(np.arange(10), 3, 7, np.random.default_rng(0))
        assert out.size == 7

    def test_block_too_long(self):
        with pytest.raises(ValueError):
            circular_block_indices(np.arange(3), 4, 3, np.random.default_rng(0))

    def test_default_block(self):
        assert default_block_size(8) == 2
        assert default_block_size(300) == 7


class TestSpecAndReport:
    def test_validation(self):
        with pytest.raises(ValueError):
            TestSpec(B=49)
        with pytest.raises(ValueError):
            TestSpec(alpha=1.0)
        with pytest.raises(ValueError):
            TestSpec(block=1)
        with pytest.raises(ValueError):
            TestSpec(statistic="max")

    def test_json_round_trip(self):
        panel = iid_panel(0)
        rep = bootstrap_test(panel, fit_pool(POOL, panel), TestSpec(B=60, seed=2))
        text = rep.to_json(replicates=True)
        again = TestReport.from_dict(json.loads(text)).to_json(replicates=True)
        assert again == text
        keys = list(json.loads(rep.to_json()))
        assert keys == ["statistic", "quantile", "p_value", "reject", "alpha", "B", "block",
                        "kind", "weights"]

    def test_spec_round_trip(self):
        panel = iid_panel(0)
        spec = TestSpec("average", NullSpec.constant(panel, 0.5), 0.1, 80, 4,
                        WeightScheme("polynomial", q=3.0), 7)
        assert TestSpec.from_dict(spec.to_dict(), panel).to_dict() == spec.to_dict()


class TestBootstrap:
    def test_report_invariants(self):
        panel = iid_panel(1)
        rep = bootstrap_test(panel, fit_pool(POOL, panel), TestSpec(B=99, seed=3))
        assert rep.reject == (rep.statistic > rep.quantile)
        assert 0 < rep.p_value <= 1
        assert rep.replicates.size == 99
        assert rep.p_value == pytest.approx((np.sum(rep.replicates >= rep.statistic) + 1) / 100)
        np.testing.assert_allclose(rep.weights.sum(), 1.0, atol=1e-12)

    def test_deterministic(self):
        panel = iid_panel(2)
        L = fit_pool(POOL, panel)
        a = bootstrap_test(panel, L, TestSpec(B=80, seed=5)).to_json(True)
        b = bootstrap_test(panel, L, TestSpec(B=80, seed=5)).to_json(True)
        assert a == b

    @pytest.mark.parametrize("threads", [2, 8])
    def test_thread_invariance(self, threads):
        panel = iid_panel(3)
        L = fit_pool(POOL, panel)
        spec = TestSpec(B=300, seed=1)
        one = bootstrap_test(panel, L, spec, threads=1).to_json(True)
        assert bootstrap_test(panel, L, spec, threads=threads).to_json(True) == one

    def test_replicate_seeding_is_per_index(self):
        panel = iid_panel(4)
        L = fit_pool(POOL, panel)
        short = bootstrap_test(panel, L, TestSpec(B=70, seed=9)).replicates
        long = bootstrap_test(panel, L, TestSpec(B=150, seed=9)).replicates
        np.testing.assert_array_equal(short, long[:70])

    def test_constant_series(self):
        times = np.arange(-9, 31)
        panel = PanelSeries(times, np.full(40, 2.0), np.ones((40, 2)), 20)
        L = fit_pool([LearnerSpec("ridge", {"intercept": True})], panel)
        rep = bootstrap_test(panel, L, TestSpec(B=50))
        assert np.all(rep.replicates == rep.replicates[0])
        assert rep.quantile == pytest.approx(rep.replicates[0])
        assert rep.statistic == pytest.approx(rep.quantile) and not rep.reject

    def test_quantile_monotone_in_alpha(self):
        panel = iid_panel(5)
        L = fit_pool(POOL, panel)
        qs = [bootstrap_test(panel, L, TestSpec(alpha=a, B=200, seed=4)).quantile
              for a in (0.01, 0.05, 0.1, 0.5)]
        assert all(x >= y for x, y in zip(qs, qs[1:]))

    def test_full_length_block(self):
        panel = iid_panel(6, n=60, t_minus=-9, t0=30)
        L = fit_pool(POOL, panel)
        w, e = eligible_rows(panel)
        block = w.size + e.size
        rep = bootstrap_test(panel, L, TestSpec(B=300, block=block, seed=0))
        assert np.unique(rep.replicates).size <= block

    def test_multiple_statistics_share_replicates(self):
        panel = iid_panel(7)
        L = fit_pool(POOL, panel)
        both = bootstrap_test(panel, L, TestSpec(B=60), statistics=["sharp", "average"])
        single = bootstrap_test(panel, L, TestSpec("average", B=60))
        np.testing.assert_array_equal(both["average"].replicates, single.replicates)

    def test_carryover_rows_excluded(self):
        panel = iid_panel(8, m=3)
        w, e = eligible_rows(panel)
        times = panel.times[np.concatenate([w, e])]
        assert not np.any((times > 60) & (times <= 63))
        assert times.min() == 2
        rep = bootstrap_test(panel, fit_pool(POOL, panel), TestSpec(B=60))
        assert np.isfinite(rep.statistic)

    def test_errors(self):
        panel = PanelSeries(np.arange(-5, 10), np.zeros(15), np.ones((15, 1)), 4)
        with pytest.raises(PanelError):
            bootstrap_test(panel, fit_pool([LearnerSpec("ridge")], panel), TestSpec())
        panel = iid_panel(0, n=40, t_minus=-9, t0=20)
        with pytest.raises(PanelError):
            bootstrap_test(panel, fit_pool(POOL, panel), TestSpec(block=100))

    def test_effect_detected(self):
        panel = iid_panel(9, effect=3.0)
        rep = bootstrap_test(panel, fit_pool(POOL, panel), TestSpec(B=200))
        assert rep.reject

    def test_null_shift_restores_size(self):
        panel = iid_panel(10, effect=3.0)
        null = NullSpec.constant(panel, 3.0)
        rep = bootstrap_test(panel, fit_pool(POOL, panel), TestSpec(null=null, B=200))
        assert rep.p_value > 0.05

    def test_size_iid(self):
        rejections = 0
        for s in range(200):
            panel = iid_panel(1000 + s)
            rep = bootstrap_test(panel, fit_pool(POOL, panel), TestSpec(B=100, seed=s))
            rejections += rep.reject
        assert 0.02 <= rejections / 200 <= 0.10


class TestPlacebo:
    def units(self, seed, k=6, n=80, effect_unit=None, effect=0.0, start=70):
        rng = np.random.default_rng(seed)
        common = rng.normal(size=n)
        out = {f"u{i}": common + rng.normal(size=n) for i in range(k)}
        if effect_unit is not None:
            out[effect_unit][start:] += effect
        return out

    def test_single_unit(self):
        rng = np.random.default_rng(0)
        times = np.arange(-29, 51)
        panel = PanelSeries(times, rng.normal(size=80), rng.normal(size=(80, 2)), 30)
        spec = TestSpec(B=60, seed=1)
        out = placebo_suite({"a": panel}, POOL, spec)
        direct = bootstrap_test(panel, fit_pool(POOL, panel, seed=1), spec)
        assert list(out) == ["a"]
        assert out["a"].to_json(True) == direct.to_json(True)

    def test_mismatched_timeline(self):
        p1 = iid_panel(0)
        p2 = iid_panel(1, t0=50)
        with pytest.raises(PanelError):
            placebo_suite({"a": p1, "b": p2}, POOL, TestSpec(B=50))

    def test_panels_layout(self):
        units = self.units(0, k=3)
        panels = placebo_panels(units, np.arange(-39, 41), 20)
        assert panels["u1"].names == ("u0", "u2")
        np.testing.assert_array_equal(panels["u1"].y, units["u1"])

    def test_injected_effect(self):
        units = self.units(1, effect_unit="u2", effect=4.0)
        panels = placebo_panels(units, np.arange(-39, 41), 30)
        out = placebo_suite(panels, POOL, TestSpec(B=100))
        assert out["u2"].reject

    def test_null_rejection_rate(self):
        total = 0
        for s in range(200):
            panels = placebo_panels(self.units(100 + s), np.arange(-39, 41), 30)
            out = placebo_suite(panels, POOL, TestSpec(B=50, seed=s))
            total += sum(r.reject for r in out.values())
        assert 0.02 <= total / 1200 <= 0.10
