import json
import math

import numpy as np
import pytest
from scipy import special, stats

from tukeydp.depth import random_directions, tukey_depth
from tukeydp.geometry import build_family, exact_family_volumes
from tukeydp.mechanisms import (FAIL, MechanismResult, account, approx_privacy_accounting,
                                approximate_distance_to_unsafety, boxem_estimate, clip_to_ball,
                                gaussian_mechanism, gaussian_sigma, level_log_weights, ptr_check,
                                ptr_threshold, quantile_em_univariate, rem_estimate,
                                sensitivity_bound_approx, split_privacy_budget)
from tukeydp.mechanisms.exponential import quantile_log_weights
from tukeydp.randcore import EmptySupportError, ParameterError, RandomSource


# budget split and accounting


def test_exact_split_values():
    p = split_privacy_budget(1.0, 1e-6, "exact")
    assert (p.eps_p, p.eps_e, p.delta_p) == (0.25, 0.5, 1e-6)
    assert p.delta_e == 1e-6 / math.exp(0.5)
    assert 2 * p.eps_p + p.eps_e == 1.0
    assert max(math.exp(2 * p.eps_p) * p.delta_e, p.delta_p) == 1e-6


def test_approx_split_values():
    p = split_privacy_budget(1.0, 1e-6, "approx")
    assert math.isclose(p.eps_p, 1 / 6) and math.isclose(p.eps_e, 0.4)
    assert math.isclose(p.eta, (math.exp(0.05) - 1) / (math.exp(0.05) + 1))
    assert abs(p.eta - 0.0250) < 1e-4
    assert p.beta == p.zeta == 1e-6 / (8 * (2 * math.e + 1))
    assert math.isclose(p.delta_e, 1e-6 / (4 * math.exp(0.55)))
    assert math.isclose(p.tau, 1e-6 / (4 * math.exp(0.55) * (1 + math.exp(0.5))))


@pytest.mark.parametrize("eps,delta", [(0, 1e-6), (-1, 1e-6), (1, 0), (1, 1), (math.inf, 0.1)])
def test_split_rejects_bad_parameters(eps, delta):
    with pytest.raises(ParameterError):
        split_privacy_budget(eps, delta)
    with pytest.raises(ParameterError):
        split_privacy_budget(1.0, 1e-6, "nope")


def test_accounting_reduces_to_exact_composition():
    e, d = approx_privacy_accounting(0.3, 0.7, 2e-6, 1e-6)
    assert e == 2 * 0.3 + 0.7
    assert d == max(2e-6, math.exp(0.6) * 1e-6)


def test_accounting_regression_constants():
    p = split_privacy_budget(1.0, 1e-6, "approx")
    e, d = account(p)
    assert e == pytest.approx(1.0000000000000004, rel=1e-14)
    assert d == pytest.approx(7.888406172773581e-07, rel=1e-12)
    e2, d2 = account(p, form="closed")
    assert e2 == e
    assert d2 == pytest.approx(1.0000000000000002e-06, rel=1e-12)
    assert d2 >= d


def test_accounting_monotone_in_eta():
    base = dict(eps_p=0.2, eps_e=0.5, delta_p=1e-6, delta_e=1e-7, tau=1e-8, beta=1e-8, zeta=1e-8)
    vals = [approx_privacy_accounting(eta=eta, **base)[0] for eta in (0.0, 0.01, 0.02, 0.05)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_accounting_preconditions():
    with pytest.raises(ParameterError):
        approx_privacy_accounting(0.1, 0.1, 1e-6, 1e-6, eta=1.0)
    with pytest.raises(ParameterError):
        approx_privacy_accounting(0.1, 0.1, 1e-6, 1e-6, beta=0.2, zeta=0.1)
    with pytest.raises(ParameterError):
        approx_privacy_accounting(-0.1, 0.1, 1e-6, 1e-6)
    with pytest.raises(ParameterError):
        approx_privacy_accounting(0.1, 0.1, 1e-6, 1e-6, form="other")


def test_sensitivity_bound():
    assert sensitivity_bound_approx(0.4, 0.0) == 2.0
    assert math.isclose(sensitivity_bound_approx(0.4, 0.025),
                        2 * (10 * math.log(1.025 / 0.975) + 1))
    # eta' = (r^2 - 1)/(r^2 + 1) doubles the log term when r = (1 + eta)/(1 - eta)
    eta = 0.03
    r = (1 + eta) / (1 - eta)
    eta2 = (r * r - 1) / (r * r + 1)
    assert math.isclose(sensitivity_bound_approx(1.0, eta2) - 2,
                        2 * (sensitivity_bound_approx(1.0, eta) - 2))


# level weights


def test_two_level_weights():
    w = dict(level_log_weights({1: math.log(2), 2: 0.0}, 1.0, 1))
    p = np.exp([w[1], w[2]])
    p /= p.sum()
    ref = np.array([2 * math.exp(0.5), math.e * (1 - math.exp(-0.5))])
    assert np.allclose(p, ref / ref.sum(), rtol=1e-12)


def test_weights_give_exponential_region_law():
    g = np.random.default_rng(0)
    for _ in range(20):
        m = 6
        v = np.sort(g.uniform(0.1, 5, size=m))[::-1]
        eps, t = g.uniform(0.2, 2), int(g.integers(0, 3))
        levels = range(t, t + m)
        w = dict(level_log_weights(dict(zip(levels, np.log(v))), eps, t))
        pw = np.array([math.exp(w[l]) for l in levels])
        ring = v - np.r_[v[1:], 0.0]
        # mass of the exact-depth-l region: sum over chosen L <= l of p_L * ring_l / V_L
        region = np.array([sum(pw[j] * ring[i] / v[j] for j in range(i + 1)) for i in range(m)])
        target = np.exp(eps * np.array(list(levels)) / 2) * ring
        assert np.allclose(region / region.sum(), target / target.sum(), rtol=1e-10)


def test_box_level_zero_weight():
    w = dict(level_log_weights({0: 0.0, 1: 0.0, 250: 0.0}, 1.0, 0, box_level_zero=(1e10, 2)))
    assert math.isclose(w[0], math.log(4e20))
    assert w[250] > w[0] + 50


def test_weights_all_empty():
    with pytest.raises(EmptySupportError):
        level_log_weights({1: -math.inf, 2: -math.inf}, 1.0, 1)
    with pytest.raises(ParameterError):
        level_log_weights({2: 0.0}, 1.0, 1)


# distance to unsafety and PTR


def test_h_tilde_equal_volumes_closed_form():
    eps_e, delta_e = 0.5, 1e-6
    g_star = math.ceil((2 / eps_e) * math.log(4 * math.exp(eps_e) / delta_e))
    top, t = 100, 20
    vols = {l: 0.0 for l in range(1, top + 1)}
    h = approximate_distance_to_unsafety(vols, t, eps_e, delta_e, top, reference_log_volume=0.0)
    # largest k in [0, t) with t + k + g* + 1 <= top
    assert h == min(t - 1, top - t - g_star - 1)
    small = approximate_distance_to_unsafety(vols, t, eps_e, delta_e, 40, reference_log_volume=0.0)
    assert small == -1


def test_h_tilde_needle_data_is_minus_one():
    vols = {l: -200.0 * l for l in range(1, 51)}
    assert approximate_distance_to_unsafety(vols, 12, 0.5, 1e-6, 50) == -1


def test_h_tilde_zero_inner_volume_unsatisfied():
    vols = {l: (0.0 if l < 30 else -math.inf) for l in range(1, 61)}
    h = approximate_distance_to_unsafety(vols, 15, 0.5, 1e-6, 60, reference_log_volume=0.0)
    # every usable g must keep t + k + g + 1 below level 30
    assert h <= 30 - 15 - 1 - 1
    with pytest.raises(ParameterError):
        approximate_distance_to_unsafety(vols, 0, 0.5, 1e-6, 60)


def test_h_tilde_pac_tightening_never_raises():
    g = np.random.default_rng(1)
    for _ in range(50):
        top = 60
        vols = dict(zip(range(1, top + 1), np.cumsum(-g.exponential(0.05, size=top))))
        t = int(g.integers(5, 25))
        a = approximate_distance_to_unsafety(vols, t, 0.5, 1e-6, top, reference_log_volume=3.0)
        b = approximate_distance_to_unsafety(vols, t, 0.5, 1e-6, top, reference_log_volume=3.0,
                                             log_eta_ratio=0.1)
        assert b <= a


def test_ptr_threshold_and_low_score():
    thr = ptr_threshold(0.25, 1e-6)
    assert math.isclose(thr, math.log(5e5) * 4)
    assert abs(thr - 52.489) < 1e-3
    rng = RandomSource(2)
    passes = sum(ptr_check(-1, 0.25, 1e-6, rng) for _ in range(100_000))
    # Pr[pass] = exp(-53.5 / 4) / 2, below 1e-6
    assert passes <= 2


def test_ptr_at_threshold_is_a_coin_flip():
    rng = RandomSource(3)
    thr = ptr_threshold(0.25, 1e-6)
    p = np.mean([ptr_check(thr, 0.25, 1e-6, rng) for _ in range(100_000)])
    assert abs(p - 0.5) < 0.01


def test_ptr_high_score_rarely_fails():
    rng = RandomSource(4)
    thr = ptr_threshold(0.25, 1e-6)
    fails = sum(not ptr_check(2 * thr, 0.25, 1e-6, rng) for _ in range(20_000))
    assert fails == 0  # Pr[FAIL] = delta_p / 2


# mechanisms


def test_result_json_shape():
    r = MechanismResult(FAIL, h_tilde=-1, params={"x": math.inf}, engine="exact", seed=3)
    d = json.loads(r.to_json())
    assert d["outcome"] == "FAIL" and d["estimate"] == [] and d["params"]["x"] == "inf"
    with pytest.raises(ValueError):
        MechanismResult(FAIL, estimate=[1.0])


def test_rem_fails_on_tiny_degenerate_data():
    x = np.r_[np.zeros((5, 2)), np.full((5, 2), 100.0)] + 1e-3 * np.random.default_rng(5).normal(size=(10, 2))
    fails = sum(rem_estimate(x, 1.0, 1e-6, rng=RandomSource(s)).failed for s in range(20))
    assert fails == 20


def test_rem_parameter_checks():
    x = np.random.default_rng(6).normal(size=(20, 2))
    with pytest.raises(ParameterError):
        rem_estimate(x, 1.0, 1e-6, t=0)
    with pytest.raises(ParameterError):
        rem_estimate(x, 1.0, 1e-6, t=11)
    with pytest.raises(ParameterError):
        rem_estimate(x, 1.0, 1e-6, engine="fast")


def test_rem_accuracy_and_threshold_at_n1000():
    root = RandomSource(7)
    fails, errs, samp = 0, [], []
    for i in range(20):
        g = root.spawn(i, 0)
        mu = np.asarray(g.standard_normal(2))
        mu = 3 * mu / np.linalg.norm(mu)
        x = mu + np.asarray(g.standard_normal((1000, 2)))
        dirs = random_directions(30, 2, root.spawn(i, 2))
        r = rem_estimate(x, 1.0, 1e-6, directions=dirs, rng=root.spawn(i, 1))
        if r.failed:
            fails += 1
            continue
        assert r.level >= 250
        assert tukey_depth(x, r.estimate, dirs) >= 250
        errs.append(np.linalg.norm(r.estimate - x.mean(axis=0)))
        samp.append(np.linalg.norm(x.mean(axis=0) - mu))
    assert fails <= 1
    assert np.mean(errs) <= 2 * np.mean(samp)


def test_boxem_stays_in_box():
    g = np.random.default_rng(8)
    x = g.normal(loc=4.5, size=(30, 2))
    for s in range(30):
        y = boxem_estimate(x, 1.0, 5.0, rng=RandomSource(s)).estimate
        assert np.all(np.abs(y) <= 5.0)


def test_boxem_empty_dataset_is_uniform_on_box():
    ys = np.array([boxem_estimate(np.empty((0, 2)), 1.0, 3.0, rng=RandomSource(s)).estimate
                   for s in range(2000)])
    assert np.all(np.abs(ys) <= 3)
    assert stats.kstest(ys[:, 0], "uniform", args=(-3, 6)).pvalue > 1e-3


def test_boxem_1d_is_quantile_em():
    x = np.random.default_rng(9).normal(size=25)
    for s in range(10):
        a = boxem_estimate(x, 1.0, 5.0, rng=RandomSource(s)).estimate[0]
        b = quantile_em_univariate(x, 1.0, 5.0, RandomSource(s))
        assert a == b


def test_boxem_1d_polytope_path_matches_interval_law():
    x = np.random.default_rng(10).normal(size=9)
    w, _, _ = quantile_log_weights(x, 1.0, 5.0)
    p = np.exp(w - w.max())
    p /= p.sum()
    L = [boxem_estimate(x, 1.0, 5.0, rng=RandomSource(s), univariate_shortcut=False).level
         for s in range(1500)]
    counts = np.bincount(L, minlength=p.size)
    keep = p * 1500 >= 5
    exp_ = p * 1500
    obs = np.r_[counts[keep], counts[~keep].sum()]
    ref = np.r_[exp_[keep], exp_[~keep].sum()]
    if ref[-1] == 0:
        obs, ref = obs[:-1], ref[:-1]
    assert stats.chisquare(obs, ref).pvalue > 1e-3


def test_boxem_affine_equivariance_of_level_law():
    g = np.random.default_rng(11)
    x = g.normal(size=(11, 2))
    A = np.array([[1.3, 0.4], [-0.2, 0.8]])
    R = 20.0
    R2 = R * math.sqrt(abs(np.linalg.det(A)))
    from tukeydp.depth import exact_direction_candidates
    ws = []
    for data, r in ((x, R), (x @ A.T, R2)):
        fam = build_family(data, exact_direction_candidates(data), 0, R=r)
        exact_family_volumes(fam)
        ws.append(np.array([w for _, w in level_log_weights(fam, 1.0, 0)]))
    assert np.allclose(ws[0] - ws[0].max(), ws[1] - ws[1].max(), atol=1e-9)
    # end to end: output depths under the original data
    d0 = [boxem_estimate(x, 1.0, R, rng=RandomSource(s)).estimate for s in range(250)]
    d1 = [np.linalg.solve(A, boxem_estimate(x @ A.T, 1.0, R2, rng=RandomSource(10_000 + s)).estimate)
          for s in range(250)]
    dirs = exact_direction_candidates(x)
    h0 = np.bincount(tukey_depth(x, np.array(d0), dirs), minlength=7)
    h1 = np.bincount(tukey_depth(x, np.array(d1), dirs), minlength=7)
    tab = np.array([h0, h1])
    tab = tab[:, tab.sum(axis=0) > 0]
    assert stats.chi2_contingency(tab).pvalue > 1e-3


def test_clip_to_ball():
    x = np.array([[3.0, 4.0], [0.3, 0.4]])
    c = clip_to_ball(x, 1.0)
    assert np.allclose(c, [[0.6, 0.8], [0.3, 0.4]])
    assert np.array_equal(clip_to_ball(x[1:], 1.0), x[1:])


def test_gaussian_noise_magnitude():
    d, n = 10, 50
    x = np.zeros((n, d))
    sigma = gaussian_sigma(n, 1.0, 1e-6, 5.0)
    rng = RandomSource(12)
    norms = [np.linalg.norm(gaussian_mechanism(x, 1.0, 1e-6, 5.0, rng)) for _ in range(10_000)]
    chi_mean = sigma * math.sqrt(2) * math.exp(special.gammaln((d + 1) / 2) - special.gammaln(d / 2))
    assert abs(np.mean(norms) / chi_mean - 1) < 0.02
    assert abs(np.mean(norms) / (sigma * math.sqrt(d)) - 1) < 0.05


def test_gaussian_error_linear_in_R():
    g = np.random.default_rng(13)
    x = g.normal(size=(200, 2))
    errs = []
    for R in (10.0, 100.0, 1000.0):
        rng = RandomSource(14)
        errs.append(np.mean([np.linalg.norm(gaussian_mechanism(x, 1.0, 1e-6, R, rng) - x.mean(0))
                             for _ in range(3000)]))
    assert 8 < errs[1] / errs[0] < 12 and 8 < errs[2] / errs[1] < 12


def test_gaussian_parameter_checks():
    with pytest.raises(ParameterError):
        gaussian_mechanism(np.zeros((3, 2)), 1.5, 1e-6, 1.0)
    with pytest.raises(ParameterError):
        gaussian_mechanism(np.zeros((3, 2)), 1.0, 1e-6, 0.0)


def test_quantile_em_large_n_approaches_median():
    root = RandomSource(15)
    n, trials = 10_000, 2000
    est = np.array([quantile_em_univariate(root.spawn(i, 0).standard_normal(n), 1.0, 5.0,
                                           root.spawn(i, 1)) for i in range(trials)])
    rmse = math.sqrt(np.mean(est**2))
    assert abs(rmse / math.sqrt(math.pi / (2 * n)) - 1) < 0.1


def test_quantile_em_vectorized_draws_and_checks():
    x = np.arange(9.0)
    ys = quantile_em_univariate(x, 1.0, 20.0, RandomSource(16), size=5000)
    assert ys.shape == (5000,) and np.all(np.abs(ys) <= 20)
    with pytest.raises(ParameterError):
        quantile_em_univariate(np.zeros((4, 2)), 1.0, 1.0)
