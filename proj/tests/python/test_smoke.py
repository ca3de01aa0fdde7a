import numpy as np
import pytest

import ranslice


def test_default_config_round_trips():
    text = ranslice.default_config()
    assert ranslice._core.canonical_config(text) == text
    assert "[learner]" in text and "[run]" in text


def test_hash_ignores_learner_section():
    text = ranslice.default_config()
    tweaked = text.replace("episodes = 1000", "episodes = 5")
    assert tweaked != text
    assert ranslice.config_hash(tweaked) == ranslice.config_hash(text)


def test_bad_config_raises_with_code():
    with pytest.raises(ranslice.RansliceError) as info:
        ranslice._core.canonical_config("[learner]\ngamma = 3\n")
    code, message = info.value.args
    assert code == "ConfigError"
    assert "learner.gamma" in message


def test_decode_respects_capacity():
    rng = np.random.default_rng(0)
    for _ in range(200):
        f = rng.dirichlet(np.ones(3), size=10).ravel()
        s, c = ranslice.decode_action(f, 5)
        assert s.shape == (5, 2)
        assert s.min() >= 1 and c.min() >= 1
        assert s.sum(axis=1).max() <= 18 and c.sum(axis=1).max() <= 18


def test_mm1():
    assert ranslice.mm1_sojourn(20.0, 10.0) == pytest.approx(0.1)


def test_train_is_deterministic_and_evaluates():
    ck1, curve1 = ranslice.train(algorithm="td3", seed=4, episodes=2)
    ck2, curve2 = ranslice.train(algorithm="td3", seed=4, episodes=2)
    assert curve1 == curve2
    assert ck1 == ck2
    assert [r["episode"] for r in curve1] == [0, 1]
    report = ranslice.evaluate(ck1)
    (policy,) = report["policies"]
    assert policy["policy"] == "td3"
    assert policy["windows"] == 14 * 24
    assert 0.0 <= policy["violation_probability"] <= 1.0


def test_checkpoint_mismatch():
    ck, _ = ranslice.train(algorithm="random", episodes=1)
    other = ranslice.default_config().replace("arrival_rate = 1.0\nmax_delay_s", "arrival_rate = 1.2\nmax_delay_s")
    with pytest.raises(ranslice.RansliceError) as info:
        ranslice.evaluate(ck, config=other)
    assert info.value.args[0] == "CheckpointMismatch"


def test_queueing_cases():
    cases = ranslice.validate_queueing(arrivals=100_000, seed=2)
    assert [c["name"] for c in cases][:2] == ["mm1_utilization_0.5", "mm1_utilization_0.9"]
    assert all(c["analytic_s"] > 0 for c in cases)
