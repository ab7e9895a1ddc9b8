import json
import math

import numpy as np
import pytest

from synthlearn.aggregation import WeightScheme
from synthlearn.dgp import DgpSpec, simulate
from synthlearn.effects import (
    CateModel,
    Ensemble,
    cate_mse,
    estimate_ate,
    fit_t_learner,
    fit_x_learner,
    post_split,
    rate_diagnostic,
)
from synthlearn.learners import LearnerSpec, fit_pool, prediction_matrix
from synthlearn.learners.linear import FittedLinear
from synthlearn.panel import PanelError, PanelSeries

EXACT = [LearnerSpec("ridge", {"lam": 0.0, "intercept": True})]


def const_learner(c, J=1):
    return FittedLinear(np.zeros(J), c, clip=1e6)


def step_panel(pre=5.0, post=7.0):
    times = np.arange(-9, 21)
    y = np.where(times > 10, post, pre)
    return PanelSeries(times, y, np.zeros((30, 1)), 10)


def linear_panel(effect=0.0, seed=0, n=120, t_minus=-39, t0=40):
    rng = np.random.default_rng(seed)
    times = np.arange(t_minus, t_minus + n)
    X = rng.normal(size=(n, 3))
    y = X @ [0.5, -1.0, 2.0] + 1.0 + effect * (times > t0)
    return PanelSeries(times, y, X, t0)


class TestAte:
    def test_unbiased_learner(self):
        panel = step_panel()
        rep = estimate_ate(panel, [const_learner(5.0)])
        assert (rep.post_mean_gap, rep.pre_bias, rep.ate) == (2.0, 0.0, 2.0)

    def test_biased_learner(self):
        panel = step_panel()
        rep = estimate_ate(panel, [const_learner(4.0)])
        assert (rep.post_mean_gap, rep.pre_bias, rep.ate) == (3.0, 1.0, 2.0)

    def test_windows(self):
        rep = estimate_ate(step_panel(), [const_learner(5.0)])
        assert rep.eval_window == (11, 20) and rep.correct_window == (6, 10)

    def test_identity_exact(self):
        panel = linear_panel(effect=1.0, seed=3)
        rng = np.random.default_rng(0)
        panel = panel.with_outcome(panel.y + rng.normal(size=panel.n))
        rep = estimate_ate(panel, fit_pool(EXACT + [LearnerSpec("knn")], panel))
        assert rep.ate == rep.post_mean_gap - rep.pre_bias

    def test_constant_shift_invariance(self):
        panel = linear_panel(effect=0.7, seed=1)
        panel = panel.with_outcome(panel.y + np.random.default_rng(2).normal(size=panel.n))
        L = fit_pool([LearnerSpec("knn"), LearnerSpec("ridge", {"lam": 5.0})], panel)
        P = prediction_matrix(L, panel)
        w = np.array([0.3, 0.7])
        a = estimate_ate(panel, L, preds=P, weights=w).ate
        b = estimate_ate(panel, L, preds=P + 4.2, weights=w).ate
        assert a == pytest.approx(b, abs=1e-12)

    def test_json(self):
        rep = estimate_ate(step_panel(), [const_learner(4.0)])
        d = json.loads(rep.to_json())
        assert list(d) == ["ate", "post_mean_gap", "pre_bias", "weights", "eval_window",
                           "correct_window"]
        assert d["ate"] == 2.0

    def test_dgp1_median_error(self):
        # T0 = 5T/8, t_minus = T/10 balances the correction and evaluation windows
        pool = [LearnerSpec("sc-constrained"), LearnerSpec("ridge", {"lam": 1.0}),
                LearnerSpec("knn", {"k": 5})]
        errs = []
        for s in range(200):
            sim = simulate(DgpSpec("dgp1", J=5, effect=1.0, T=600, T0=375, t_minus=60, seed=s))
            errs.append(abs(estimate_ate(sim.panel, fit_pool(pool, sim.panel, seed=s)).ate - 1))
        assert np.median(errs) < 0.15

    def test_absolute_loss(self):
        panel = step_panel()
        rep = estimate_ate(panel, [const_learner(5.0), const_learner(4.0)],
                           WeightScheme(loss="absolute"))
        assert rep.ate == pytest.approx(2.0)


class TestTLearner:
    def test_zero_effect(self):
        panel = linear_panel()
        tau = fit_t_learner(panel, EXACT).predict_panel(panel)
        np.testing.assert_allclose(tau, 0.0, atol=1e-9)

    def test_constant_effect(self):
        panel = linear_panel(effect=1.5)
        tau = fit_t_learner(panel, EXACT).predict_panel(panel)
        np.testing.assert_allclose(tau, 1.5, atol=1e-9)

    def test_post_split(self):
        panel = linear_panel()
        tr, wt = post_split(panel)
        s = (panel.t0 + panel.t_plus) // 2
        assert (tr[0], tr[-1], wt[0], wt[-1]) == (41, s, s + 1, panel.t_plus)

    def test_short_post_period(self):
        times = np.arange(-9, 16)
        panel = PanelSeries(times, np.zeros(25), np.ones((25, 1)), 10)
        with pytest.raises(PanelError):
            fit_t_learner(panel, EXACT)

    def test_rmse_decreases_with_T(self):
        pool = [LearnerSpec("ridge", {"intercept": True}), LearnerSpec("knn", {"k": 5})]
        med = []
        for T in (200, 400, 800):
            errs = []
            for s in range(30):
                sim = simulate(DgpSpec("dgp1", J=5, cate="linear", T=T, T0=T // 2,
                                       t_minus=T // 4, seed=s))
                errs.append(cate_mse(fit_t_learner(sim.panel, pool, seed=s), sim.panel, sim.tau))
            med.append(np.median(errs))
        assert med[0] > med[1] > med[2]


class TestXLearner:
    def test_mixing_half(self):
        sim = simulate(DgpSpec("dgp1", J=3, T=200, T0=100, t_minus=50, seed=0))
        m = fit_x_learner(sim.panel, EXACT)
        assert m.mix == (0.5, 0.5)

    def test_constant_components(self):
        panel = linear_panel()
        c = Ensemble((const_learner(2.5, 3),), np.array([1.0]))
        m = CateModel("X", c, c, c, c, (0.3, 0.7), np.zeros(panel.n))
        np.testing.assert_allclose(m.predict_panel(panel), 2.5)

    def test_between_components(self):
        panel = linear_panel(effect=1.0)
        panel = panel.with_outcome(panel.y + np.random.default_rng(5).normal(size=panel.n))
        m = fit_x_learner(panel, EXACT + [LearnerSpec("knn")])
        t0, t1 = m.components(panel)
        tau = m.predict_panel(panel)
        assert sum(m.mix) == pytest.approx(1.0)
        assert np.all(tau >= np.minimum(t0, t1) - 1e-12)
        assert np.all(tau <= np.maximum(t0, t1) + 1e-12)

    def test_sign_fix(self):
        panel = linear_panel(effect=2.0)
        on = fit_x_learner(panel, EXACT)
        off = fit_x_learner(panel, EXACT, x_learner_sign_fix=False)
        t0_on, _ = on.components(panel)
        t0_off, _ = off.components(panel)
        np.testing.assert_allclose(t0_on, 2.0, atol=1e-8)
        np.testing.assert_allclose(t0_off, -2.0, atol=1e-8)
        np.testing.assert_allclose(on.predict_panel(panel), 2.0, atol=1e-8)


class TestCateMse:
    def setup_method(self):
        self.panel = PanelSeries(np.array([1, 2, 3]), np.zeros(3), np.array([[1.0], [2.0], [3.0]]), 1)
        ident = Ensemble((FittedLinear(np.array([1.0]), 0.0, clip=1e6),), np.array([1.0]))
        zero = Ensemble((const_learner(0.0),), np.array([1.0]))
        self.model = CateModel("T", zero, ident)

    def test_exact(self):
        assert cate_mse(self.model, self.panel, [1.0, 2.0, 3.0]) == 0.0

    def test_offset(self):
        assert cate_mse(self.model, self.panel, [0.0, 1.0, 2.0]) == pytest.approx(1.0)

    def test_hand_value(self):
        assert cate_mse(self.model, self.panel, [1.0, 1.0, 1.0]) == pytest.approx(math.sqrt(5 / 3))

    def test_callable_truth(self):
        assert cate_mse(self.model, self.panel, lambda X: X.sum(axis=1)) == 0.0


class TestRate:
    def test_constant(self):
        out = rate_diagnostic({200: 1.0, 400: 1.0, 600: 1.0})
        assert out == {400: 0.0, 600: 0.0}

    def test_inverse_T(self):
        out = rate_diagnostic({T: 1.0 / T for T in (200, 400, 600)})
        for T, v in out.items():
            assert v == pytest.approx(0.5 * (math.log(T - 200) - math.log(T)))

    def test_inverse_sqrt_T(self):
        out = rate_diagnostic({T: T ** -0.5 for T in (200, 400, 600)})
        for T, v in out.items():
            assert v == pytest.approx(0.25 * (math.log(T - 200) - math.log(T)))

    def test_step_mismatch(self):
        with pytest.raises(ValueError):
            rate_diagnostic({200: 1.0, 500: 1.0})
