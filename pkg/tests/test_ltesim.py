"""Tests for the simulated serving environment and its policies."""

import dataclasses
import json

import numpy as np
import pytest

from rankfuse.ego import GAMMA_MIN, EgoConfig
from rankfuse.ltesim import (
    ExpertWeightSet,
    SimEnvironment,
    default_environment,
    default_expert_sets,
    env_fingerprint,
    env_from_config,
    env_to_config,
    expected_page_reward,
    read_env_json,
    read_trace_csv,
    report,
    run_bandit,
    run_cold_start,
    run_warm_start,
    sample_context,
    samples_from_records,
    serve_page,
    two_context_environment,
    two_context_expert_sets,
    write_env_json,
    write_trace_csv,
)


def _single_context_env(seed=3, examine=None):
    """One context, five items, one noiseless and two noisy sub-models."""
    return SimEnvironment(
        contexts=((0.0,),),
        probabilities=(1.0,),
        utilities=((0.5, 0.3, 0.2, 0.1, 0.05),),
        noise_levels=(0.0, 1.0, 2.0),
        examine=examine or tuple(0.6**k for k in range(5)),
        seed=seed,
    )


def _two_arm_env():
    """Two items, two sub-models whose pages pay exactly 0.45 vs 0.15."""
    return SimEnvironment(
        contexts=((0.0,),),
        probabilities=(1.0,),
        utilities=((0.45, 0.15),),
        noise_levels=(0.0, 5.0),
        examine=(1.0, 0.0),
        seed=1,
    )


TRIO = ExpertWeightSet(((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)))


# ---------------------------------------------------------------------------
# Environment construction


def test_environment_validation():
    good = dict(
        contexts=((0.0,), (1.0,)),
        probabilities=(0.5, 0.5),
        utilities=((0.5, 0.1), (0.1, 0.5)),
        noise_levels=(0.1,),
        examine=(1.0, 0.5),
        seed=0,
    )
    SimEnvironment(**good)
    with pytest.raises(ValueError, match="sum to 1"):
        SimEnvironment(**{**good, "probabilities": (0.6, 0.5)})
    with pytest.raises(ValueError, match="distinct"):
        SimEnvironment(**{**good, "contexts": ((0.0,), (0.0,))})
    with pytest.raises(ValueError, match=r"\[0, 1\]"):
        SimEnvironment(**{**good, "utilities": ((0.5, 1.2), (0.1, 0.5))})
    with pytest.raises(ValueError, match="non-increasing"):
        SimEnvironment(**{**good, "examine": (0.5, 0.8)})
    with pytest.raises(ValueError, match="noise"):
        SimEnvironment(**{**good, "noise_levels": (-0.1,)})
    with pytest.raises(ValueError, match="two items"):
        SimEnvironment(**{**good, "examine": (1.0,), "utilities": ((0.5,), (0.1,))})


def test_expert_set_validation():
    with pytest.raises(ValueError):
        ExpertWeightSet(())
    with pytest.raises(ValueError):
        ExpertWeightSet(((0.5, 0.6),))
    with pytest.raises(ValueError):
        ExpertWeightSet(((1.0, 0.0), (1.0,)))
    experts = ExpertWeightSet(((0.25, 0.75),))
    assert len(experts) == 1 and experts.n == 2 and experts[0] == (0.25, 0.75)


def test_submodel_orders_are_frozen_per_context():
    env = _single_context_env()
    first = env.submodel_orders((0.0,))
    assert first == env.submodel_orders((0.0,))
    assert first[0].items == (0, 1, 2, 3, 4)  # noiseless view of the utilities
    with pytest.raises(ValueError, match="unknown context"):
        env.submodel_orders((7.0,))


def test_default_environment_shape():
    env = default_environment()
    assert len(env.contexts) == 4 and env.m == 10 and env.n == 5
    assert sum(env.probabilities) == pytest.approx(1.0)
    experts = default_expert_sets()
    assert len(experts) == 8 and experts.n == 5


def test_two_context_environment_has_opposite_specialists():
    env = two_context_environment()
    assert len(env.contexts) == 2 and env.n == 4
    quality = {
        (ci, j): expected_page_reward(env, c, env.submodel_orders(c)[j])
        for ci, c in enumerate(env.contexts)
        for j in range(2)
    }
    assert quality[(0, 0)] > 0.5 and quality[(1, 1)] > 0.5
    assert quality[(0, 1)] < 0.15 and quality[(1, 0)] < 0.15
    assert len(two_context_expert_sets()) == 8


def test_sample_context_matches_distribution():
    env = SimEnvironment(
        contexts=((0.0,), (1.0,)),
        probabilities=(0.9, 0.1),
        utilities=((0.5, 0.1), (0.1, 0.5)),
        noise_levels=(0.1,),
        examine=(1.0, 0.5),
        seed=0,
    )
    rng = np.random.default_rng(0)
    draws = [sample_context(env, rng) for _ in range(2000)]
    share = sum(c == (0.0,) for c in draws) / 2000
    assert abs(share - 0.9) < 5 * np.sqrt(0.9 * 0.1 / 2000)


# ---------------------------------------------------------------------------
# Page serving


def test_zero_examination_never_converts():
    env = _single_context_env(examine=(0.0,) * 5)
    rng = np.random.default_rng(0)
    rewards = {serve_page(env, (0.0,), TRIO[0], None, rng)[0] for _ in range(50)}
    assert rewards == {0}


def test_noiseless_submodel_is_the_best_single_model_policy():
    env = _single_context_env()
    orders = env.submodel_orders((0.0,))
    values = [expected_page_reward(env, (0.0,), o) for o in orders]
    assert values[0] == max(values)
    assert orders[0].items == (0, 1, 2, 3, 4)


def test_serve_page_is_deterministic_given_seed():
    env = _single_context_env()
    a = serve_page(env, (0.0,), (0.2, 0.3, 0.5), None, np.random.default_rng(5))
    b = serve_page(env, (0.0,), (0.2, 0.3, 0.5), None, np.random.default_rng(5))
    assert a == b
    assert a[0] in (0, 1)


def test_serve_page_validates_inputs():
    env = _single_context_env()
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError, match="unknown context"):
        serve_page(env, (9.0,), TRIO[0], None, rng)
    with pytest.raises(ValueError, match="distribution"):
        serve_page(env, (0.0,), (0.7, 0.7, -0.4), None, rng)
    with pytest.raises(ValueError, match="decay"):
        serve_page(env, (0.0,), TRIO[0], (1.5, 1.0, 1.0), rng)
    with pytest.raises(ValueError, match="decay"):
        serve_page(env, (0.0,), TRIO[0], (0.9, 0.9), rng)


def test_all_ones_decay_changes_nothing():
    env = _single_context_env()
    w = (0.2, 0.3, 0.5)
    plain = serve_page(env, (0.0,), w, None, np.random.default_rng(11))
    decayed = serve_page(env, (0.0,), w, (1.0, 1.0, 1.0), np.random.default_rng(11))
    assert plain == decayed


def test_expected_page_reward_hand_case():
    env = SimEnvironment(
        contexts=((0.0,),),
        probabilities=(1.0,),
        utilities=((0.8, 0.4),),
        noise_levels=(0.0,),
        examine=(1.0, 0.5),
        seed=0,
    )
    page = env.submodel_orders((0.0,))[0]
    assert page.items == (0, 1)
    # 1 - (1 - 1.0*0.8) * (1 - 0.5*0.4)
    assert expected_page_reward(env, (0.0,), page) == pytest.approx(0.84)


def test_raising_examination_only_helps_every_single_page():
    low = _single_context_env()
    bumped = list(low.examine)
    bumped[2] = min(bumped[1], bumped[2] + 0.3)
    high = _single_context_env(examine=tuple(bumped))
    w = (0.4, 0.3, 0.3)
    worse = 0
    for t in range(10_000):
        r_low = serve_page(low, (0.0,), w, None, np.random.default_rng([7, t]))[0]
        r_high = serve_page(high, (0.0,), w, None, np.random.default_rng([7, t]))[0]
        worse += r_high < r_low
    assert worse == 0


def test_empirical_conversion_matches_the_analytic_rate():
    env = two_context_environment()
    w = two_context_expert_sets()[0]
    target = 0.0
    for c in env.contexts:
        ranking = serve_page(env, c, w, None, np.random.default_rng(0))[1]
        target += 0.5 * expected_page_reward(env, c, ranking)
    trace = run_cold_start(env, ExpertWeightSet((w,)), 4000, np.random.default_rng(2))
    se = np.sqrt(target * (1 - target) / 4000)
    assert abs(trace.mean_reward - target) < 5 * se


# ---------------------------------------------------------------------------
# Cold start


def test_cold_start_single_expert_uses_it_everywhere():
    env = _single_context_env()
    experts = ExpertWeightSet(((0.2, 0.3, 0.5),))
    trace = run_cold_start(env, experts, 40, np.random.default_rng(0))
    assert {s.weights for s in trace.samples} == {(0.2, 0.3, 0.5)}


def test_cold_start_dataset_size_and_labels():
    env = _single_context_env()
    trace = run_cold_start(env, TRIO, 300, np.random.default_rng(1))
    assert len(trace.samples) == 300 and len(trace.records) == 300
    converted = 0
    for t, (record, sample) in enumerate(zip(trace.records, trace.samples)):
        baseline = converted / t if t else 0.0
        assert sample.label == float(np.clip(record.reward - baseline, -1.0, 1.0))
        assert -1.0 <= sample.label <= 1.0
        converted += record.reward


def test_cold_start_spreads_experts_uniformly():
    env = two_context_environment()
    experts = two_context_expert_sets()
    trace = run_cold_start(env, experts, 10_000, np.random.default_rng(3))
    counts = {v: 0 for v in experts.vectors}
    for s in trace.samples:
        counts[s.weights] += 1
    expected = 10_000 / len(experts)
    bound = 5 * np.sqrt(10_000 * (1 / 8) * (7 / 8))
    for c in counts.values():
        assert abs(c - expected) < bound


def test_cold_start_can_log_explicit_unit_decay():
    env = _single_context_env()
    trace = run_cold_start(env, TRIO, 10, np.random.default_rng(0), log_decay=True)
    assert all(s.decay == (1.0, 1.0, 1.0) for s in trace.samples)


# ---------------------------------------------------------------------------
# Bandit


def test_bandit_with_one_arm_matches_cold_start():
    env = _single_context_env()
    experts = ExpertWeightSet(((0.2, 0.3, 0.5),))
    cold = run_cold_start(env, experts, 200, np.random.default_rng(9))
    bandit = run_bandit(env, experts, 200, np.random.default_rng(9))
    for a, b in zip(cold.records, bandit.records):
        assert (a.context, a.weights, a.reward, a.ranking) == (
            b.context,
            b.weights,
            b.reward,
            b.ranking,
        )


def test_bandit_locks_onto_the_dominant_arm():
    env = _two_arm_env()
    experts = ExpertWeightSet(((1.0, 0.0), (0.0, 1.0)))
    values = [
        expected_page_reward(env, (0.0,), env.submodel_orders((0.0,))[j])
        for j in range(2)
    ]
    assert values[0] == pytest.approx(3.0 * values[1])
    trace = run_bandit(env, experts, 10_000, np.random.default_rng(4))
    last_half = trace.records[5000:]
    share = sum(r.weights == (1.0, 0.0) for r in last_half) / len(last_half)
    assert share >= 0.9


def test_bandit_is_deterministic_given_seed():
    env = _single_context_env()
    a = run_bandit(env, TRIO, 150, np.random.default_rng(12))
    b = run_bandit(env, TRIO, 150, np.random.default_rng(12))
    assert a == b


def test_policies_share_page_randomness_for_paired_seeds():
    env = two_context_environment()
    experts = two_context_expert_sets()
    cold = run_cold_start(env, experts, 50, np.random.default_rng(6))
    bandit = run_bandit(env, experts, 50, np.random.default_rng(6))
    assert [r.context for r in cold.records] == [r.context for r in bandit.records]


# ---------------------------------------------------------------------------
# Warm start


def test_warm_start_learns_a_vertex_optimum():
    # single context, best weights = the noiseless sub-model's vertex
    env = _single_context_env()
    cold = run_cold_start(env, TRIO, 1000, np.random.default_rng(21))
    warm = run_warm_start(
        env,
        cold.samples,
        2000,
        EgoConfig(evaluator_updates=150, generator_steps=150),
        np.random.default_rng(21),
        refresh=500,
    )
    assert warm.mean_reward >= cold.mean_reward
    assert len(warm.samples) == 2000


def test_warm_start_validates_inputs():
    env = _single_context_env()
    cold = run_cold_start(env, TRIO, 10, np.random.default_rng(0))
    with pytest.raises(ValueError, match="dataset"):
        run_warm_start(env, [], 10, rng=np.random.default_rng(0))
    with pytest.raises(ValueError, match="pages"):
        run_warm_start(env, cold.samples, 0, rng=np.random.default_rng(0))
    with pytest.raises(ValueError, match="refresh"):
        run_warm_start(env, cold.samples, 10, rng=np.random.default_rng(0), refresh=0)
    with pytest.raises(ValueError, match="decay"):
        run_warm_start(
            env,
            cold.samples,
            10,
            EgoConfig(with_decay=True, evaluator_updates=1, generator_steps=1),
            np.random.default_rng(0),
        )


def test_warm_start_with_decay_round_trips_the_factors(tmp_path):
    env = _single_context_env()
    cold = run_cold_start(env, TRIO, 200, np.random.default_rng(2), log_decay=True)
    warm = run_warm_start(
        env,
        cold.samples,
        60,
        EgoConfig(with_decay=True, evaluator_updates=40, generator_steps=40),
        np.random.default_rng(2),
        refresh=30,
    )
    for record in warm.records:
        assert record.decay is not None
        assert all(GAMMA_MIN <= g <= 1.0 for g in record.decay)
    path = tmp_path / "warm.csv"
    write_trace_csv(warm, str(path))
    back = read_trace_csv(str(path), env)
    assert [r.decay for r in back.records] == [r.decay for r in warm.records]
    assert [r.ranking for r in back.records] == [r.ranking for r in warm.records]


# ---------------------------------------------------------------------------
# Report


def test_report_self_comparison_is_zero_improvement():
    env = _single_context_env()
    trace = run_cold_start(env, TRIO, 100, np.random.default_rng(0))
    rows = report([trace, trace])
    assert rows[0].improvement_pct == 0.0
    assert rows[1].improvement_pct == 0.0
    assert rows[0].ci_low <= rows[0].mean_reward <= rows[0].ci_high


def test_report_improvement_is_scale_invariant():
    env = _single_context_env()
    a = run_cold_start(env, TRIO, 200, np.random.default_rng(1))
    b = run_bandit(env, TRIO, 200, np.random.default_rng(1))

    def doubled(trace):
        records = tuple(
            dataclasses.replace(r, reward=2.0 * r.reward) for r in trace.records
        )
        return dataclasses.replace(trace, records=records)

    plain = report([a, b])
    scaled = report([doubled(a), doubled(b)])
    for p, s in zip(plain, scaled):
        assert s.mean_reward == pytest.approx(2.0 * p.mean_reward)
        assert s.improvement_pct == pytest.approx(p.improvement_pct)
        assert s.ktd == p.ktd


def test_report_single_submodel_policy_has_zero_self_distance():
    env = _single_context_env()
    dictator = ExpertWeightSet(((1.0, 0.0, 0.0),))
    trace = run_cold_start(env, dictator, 50, np.random.default_rng(2))
    other = run_cold_start(env, TRIO, 50, np.random.default_rng(2))
    rows = report([trace, other])
    assert rows[0].ktd[0] == 0.0
    assert len(rows[0].ktd) == env.n


def test_report_validates_traces():
    env = _single_context_env()
    other_env = _single_context_env(seed=4)
    a = run_cold_start(env, TRIO, 20, np.random.default_rng(0))
    b = run_cold_start(other_env, TRIO, 20, np.random.default_rng(0))
    with pytest.raises(ValueError, match="two traces"):
        report([a])
    with pytest.raises(ValueError, match="mismatched"):
        report([a, b])
    with pytest.raises(ValueError, match="baseline"):
        report([a, a], baseline="ra-ego")


def test_report_named_baseline_and_determinism():
    env = _single_context_env()
    a = run_cold_start(env, TRIO, 150, np.random.default_rng(3))
    b = run_bandit(env, TRIO, 150, np.random.default_rng(3))
    rows = report([b, a], baseline="ra-re")
    base = [r for r in rows if r.policy == "ra-re"][0]
    assert base.improvement_pct == 0.0
    again = report([b, a], baseline="ra-re")
    assert rows == again


# ---------------------------------------------------------------------------
# Config and trace files


def test_env_config_round_trip(tmp_path):
    env = two_context_environment()
    experts = two_context_expert_sets()
    back, back_experts = env_from_config(env_to_config(env, experts))
    assert back == env and back_experts == experts
    path = tmp_path / "env.json"
    write_env_json(str(path), env, experts)
    again, again_experts = read_env_json(str(path))
    assert again == env and again_experts == experts
    assert env_fingerprint(again) == env_fingerprint(env)


def test_env_config_supports_generated_utilities():
    env = default_environment(seed=5)
    config = env_to_config(env)
    del config["utilities"]
    config["utility_seed"] = 5
    config["items"] = 10
    rebuilt, _ = env_from_config(config)
    assert rebuilt == env


def test_env_config_rejects_unknown_format():
    with pytest.raises(ValueError, match="format"):
        env_from_config({"format": 2})


def test_fingerprint_separates_environments():
    assert env_fingerprint(default_environment(0)) != env_fingerprint(
        default_environment(1)
    )


def test_samples_from_records_recover_the_logged_labels():
    env = _single_context_env()
    for trace in (
        run_cold_start(env, TRIO, 120, np.random.default_rng(5)),
        run_bandit(env, TRIO, 120, np.random.default_rng(5)),
    ):
        assert samples_from_records(trace.records) == trace.samples


def test_trace_csv_round_trip(tmp_path):
    env = _single_context_env()
    trace = run_cold_start(env, TRIO, 40, np.random.default_rng(8))
    path = tmp_path / "trace.csv"
    write_trace_csv(trace, str(path))
    back = read_trace_csv(str(path), env)
    assert back.policy == trace.policy
    assert back.samples == ()
    for a, b in zip(back.records, trace.records):
        assert a == b
    header = path.read_text().splitlines()[0]
    assert header == "page,context,policy,weights,reward"


def test_trace_csv_errors(tmp_path):
    env = _single_context_env()
    bad = tmp_path / "bad.csv"
    bad.write_text("page,reward\n")
    with pytest.raises(ValueError, match="header"):
        read_trace_csv(str(bad), env)
    bad.write_text(
        "page,context,policy,weights,reward\n"
        '0,"[0.0]",ra-re,"[1.0, 0.0, 0.0]",1.0\n'
        '1,"[0.0]",ra-re,"oops",0.0\n'
    )
    with pytest.raises(ValueError, match="line 3"):
        read_trace_csv(str(bad), env)
    empty = tmp_path / "empty.csv"
    empty.write_text("page,context,policy,weights,reward\n")
    with pytest.raises(ValueError, match="no trace rows"):
        read_trace_csv(str(empty), env)
    mixed = tmp_path / "mixed.csv"
    mixed.write_text(
        "page,context,policy,weights,reward\n"
        '0,"[0.0]",ra-re,"[1.0, 0.0, 0.0]",1.0\n'
        '1,"[0.0]",ra-be,"[1.0, 0.0, 0.0]",0.0\n'
    )
    with pytest.raises(ValueError, match="single policy"):
        read_trace_csv(str(mixed), env)
