import math

import pytest

import cdm


def make_config(n=2000, seed=1):
    c = cdm.DgpConfig()
    c.n_samples = n
    c.n_features = 2
    c.baseline_coefs = [1.0, 0.0]
    c.effect_coefs = [0.0, 1.5]
    c.outcome_noise_sd = 0.5
    c.seed = seed
    return c


def test_gen_rct_invariants():
    d = cdm.gen_rct(make_config())
    assert len(d) == 2000
    assert d.n_features == 2
    assert d.is_synthetic
    assert d.constant_propensity == pytest.approx(0.5)
    for i in range(0, len(d), 97):
        s = d[i]
        y0, y1 = s.potential_outcomes
        assert s.true_cate == pytest.approx(y1 - y0)
        assert s.outcome == s.potential_outcomes[s.treatment]


def test_gen_determinism():
    a = cdm.gen_rct(make_config(seed=7))
    b = cdm.gen_rct(make_config(seed=7))
    assert [a[i].outcome for i in range(50)] == [b[i].outcome for i in range(50)]


def test_causal_tree_and_policy():
    train = cdm.gen_rct(make_config(n=5000))
    test = cdm.gen_rct(make_config(n=5000, seed=2))
    params = cdm.TreeParams()
    params.max_depth = 3
    params.min_leaf = 25
    tree = cdm.fit_causal_tree(train, params)
    policy = cdm.threshold_policy(tree, tau=0.0)

    regret = cdm.oracle_regret(policy, test)
    assert regret.metric == "oracle_regret"
    assert 0.0 <= regret.value < 0.5

    err = cdm.decision_error_rate(policy, test)
    assert 0.0 <= err.value < 0.5

    scores = cdm.predict_effect_batch(tree, test)
    curve = cdm.uplift_curve(scores, test, n_grid=10)
    assert curve.points[0] == (0.0, 0.0)
    assert curve.points[-1][0] == 1.0
    assert cdm.auuc(curve) > 0.0


def test_policy_tree_and_ips():
    train = cdm.gen_rct(make_config(n=4000, seed=3))
    params = cdm.TreeParams()
    params.max_depth = 2
    params.min_leaf = 20
    policy = cdm.fit_policy_tree(train, params)
    assigns = policy.assign_batch(train)
    assert set(assigns) <= {0, 1}
    value = cdm.ips_policy_value(policy, train)
    assert value.std_error is not None and value.std_error > 0.0


def test_transformed_outcome():
    assert cdm.transformed_outcome(1.0, 1, 0.5) == pytest.approx(2.0)
    assert cdm.transformed_outcome(1.0, 0, 0.5) == pytest.approx(-2.0)


def test_scenarios():
    results = [cdm.run_scenario(s) for s in cdm.default_scenarios(20000, 0)]
    assert len(results) == 3
    first = results[0]
    assert first.bm_wrong_analytic == pytest.approx(
        cdm.analytic_wrong_prob(-0.2, 0.35, 0.0, True)
    )
    assert abs(first.bm_wrong_rate - first.bm_wrong_analytic) < 0.02


def test_csv_round_trip(tmp_path):
    d = cdm.gen_rct(make_config(n=100))
    path = str(tmp_path / "d.csv")
    cdm.write_csv(d, path, include_oracle=True)
    back = cdm.load_csv(path)
    assert len(back) == 100
    assert back[0].true_cate == pytest.approx(d[0].true_cate)


def test_error_types():
    bad = make_config()
    bad.propensity = 1.5
    with pytest.raises(cdm.PreconditionError):
        cdm.gen_rct(bad)
    with pytest.raises(cdm.IoError):
        cdm.load_csv("/nonexistent/file.csv")
    with pytest.raises(cdm.PreconditionError):
        cdm.gen_criteo_like(100, 0.5, 0.5, 2.0, 0.0, 1)  # outcome_snr <= effect_snr
