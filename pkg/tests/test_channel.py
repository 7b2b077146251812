"""Channel model: probabilities, sampling, reproducibility."""

import numpy as np
import pytest

from jamgame import (
    ChannelSet,
    ContractViolationError,
    JammerPolicy,
    LinkState,
    passing_probability,
    sample_step,
    sample_steps,
    trial_rng,
)


def make_link(n=2, j_minus=2, c_minus=None):
    return LinkState(j_minus, np.zeros(n, dtype=int) if c_minus is None else c_minus)


def test_passing_probability_degenerate_policy():
    cs = ChannelSet.constant([0.1, 0.9])
    assert passing_probability(cs, make_link(), JammerPolicy.vertex(1, 2)) == pytest.approx(0.1)


def test_passing_probability_symmetric():
    cs = ChannelSet.constant([0.0, 1.0])
    assert passing_probability(cs, make_link(), JammerPolicy([0.5, 0.5])) == pytest.approx(0.5)


def test_passing_probability_dot_product():
    # p here is the S1 saddle mixture rounded to 5 places; the probability
    # is the plain dot product 0.60723*0.1 + 0.39277*0.9.
    cs = ChannelSet.constant([0.1, 0.9])
    p = JammerPolicy([0.60723, 0.39277])
    got = passing_probability(cs, make_link(), p)
    assert got == pytest.approx(0.414216, abs=1e-9)


def test_passing_probability_dimension_mismatch():
    cs = ChannelSet.constant([0.1, 0.9])
    with pytest.raises(ContractViolationError):
        passing_probability(cs, make_link(), JammerPolicy([0.2, 0.3, 0.5]))
    with pytest.raises(ContractViolationError):
        passing_probability(cs, LinkState(1, [0, 0, 0]), JammerPolicy([0.5, 0.5]))


def test_policy_validation():
    with pytest.raises(ContractViolationError):
        JammerPolicy([0.7, 0.2])            # does not sum to 1
    with pytest.raises(ContractViolationError):
        JammerPolicy([1.2, -0.2])           # negative entry
    JammerPolicy([0.25, 0.75])


def test_channel_set_validation():
    with pytest.raises(ContractViolationError):
        ChannelSet.constant([0.5])          # one channel is not a game
    with pytest.raises(ContractViolationError):
        ChannelSet.constant([0.5, 1.4])     # probability outside [0, 1]


def test_link_state_validation():
    with pytest.raises(ContractViolationError):
        LinkState(3, [0, 1])                # index beyond channel count
    with pytest.raises(ContractViolationError):
        LinkState(1, [0, 2])                # states must be bits


def test_sample_step_deterministic_chains():
    cs = ChannelSet.constant([0.0, 1.0])
    link = make_link()
    rng = trial_rng(0, 0)
    for _ in range(20):
        s, c, b = sample_step(cs, link, JammerPolicy.vertex(2, 2), rng)
        assert (s, b) == (2, 1) and c[1] == 1
    for _ in range(20):
        s, c, b = sample_step(cs, link, JammerPolicy.vertex(1, 2), rng)
        assert (s, b) == (1, 0) and c[0] == 0


def test_sample_step_reproducible_bit_for_bit():
    cs = ChannelSet.constant([0.3, 0.8])
    link = make_link()
    pol = JammerPolicy([0.4, 0.6])
    a = sample_step(cs, link, pol, trial_rng(123, 5))
    b = sample_step(cs, link, pol, trial_rng(123, 5))
    assert a.channel == b.channel and a.passing == b.passing
    assert np.array_equal(a.states, b.states)
    c = sample_step(cs, link, pol, trial_rng(123, 6))
    assert (a.channel, tuple(a.states)) != (c.channel, tuple(c.states)) or a.passing != c.passing


def test_batch_matches_sequential_stream():
    cs = ChannelSet.constant([0.1, 0.9])
    link = make_link()
    pol = JammerPolicy([0.3, 0.7])
    batch = sample_steps(cs, link, pol, 50, seed=42)
    rng = np.random.Generator(np.random.Philox(key=42))
    for t in range(50):
        step = sample_step(cs, link, pol, rng)
        assert step.channel == batch.channels[t]
        assert step.passing == batch.passing[t]
        assert np.array_equal(step.states, batch.states[t])


def test_empirical_frequencies_four_sigma():
    cs = ChannelSet.constant([0.1, 0.9])
    link = make_link()
    pol = JammerPolicy([0.3, 0.7])
    m = 10**6
    draws = sample_steps(cs, link, pol, m, seed=11)
    for j, pj in ((1, 0.3), (2, 0.7)):
        freq = float((draws.channels == j).mean())
        assert abs(freq - pj) <= 4.0 * np.sqrt(pj * (1 - pj) / m)
    pq = passing_probability(cs, link, pol)
    freq_b = float(draws.passing.mean())
    assert abs(freq_b - pq) <= 4.0 * np.sqrt(pq * (1 - pq) / m)


def test_half_mass_on_extreme_channels():
    # q = (0, 1) with a fair coin: the link passes exactly when channel 2
    # was selected, so b and S are perfectly dependent.
    cs = ChannelSet.constant([0.0, 1.0])
    draws = sample_steps(cs, make_link(), JammerPolicy([0.5, 0.5]), 10**6, seed=3)
    assert abs(float(draws.passing.mean()) - 0.5) <= 0.0015  # 3 sigma at 1e6
    assert np.array_equal(draws.passing, (draws.channels == 2).astype(int))


def test_bit_comes_from_fresh_states_not_prior():
    # Prior states say "blocked" everywhere, but the post-switch draw is
    # all-passing: the link bit must come from the fresh draw.
    cs = ChannelSet(n=2, base_q=[0.5, 0.5], table={(0, 0): [1.0, 1.0]})
    link = make_link(c_minus=np.array([0, 0]))
    draws = sample_steps(cs, link, JammerPolicy([0.5, 0.5]), 1000, seed=9)
    assert np.all(draws.passing == 1)
    assert np.all(draws.states == 1)


def test_conditioned_q_lookup():
    cs = ChannelSet(n=2, base_q=[0.1, 0.9], table={(1, 1): [0.3, 0.6]})
    assert np.allclose(cs.q_at([0, 0]), [0.1, 0.9])
    assert np.allclose(cs.q_at([1, 1]), [0.3, 0.6])
    assert np.allclose(cs.q_at([1, 0]), [0.1, 0.9])  # falls back to the base


def test_conditioned_q_changes_passing_probability():
    cs = ChannelSet(n=2, base_q=[0.1, 0.9], table={(1, 1): [0.3, 0.6]})
    pol = JammerPolicy([0.5, 0.5])
    assert passing_probability(cs, make_link(c_minus=np.array([0, 0])), pol) == pytest.approx(0.5)
    assert passing_probability(cs, make_link(c_minus=np.array([1, 1])), pol) == pytest.approx(0.45)


def test_trial_streams_are_independent_and_stable():
    a = trial_rng(5, 3).random(8)
    b = trial_rng(5, 3).random(8)
    c = trial_rng(5, 4).random(8)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
