import numpy as np
import pytest

from irsd2d.baselines import (SchemeId, aligned_phases, max_to_max_matching, no_irs_scheme,
                              random_irs_phases, sts_slot)
from irsd2d.channel import ChannelSample, effective_channels
from irsd2d.harness import run_trial
from irsd2d.matching import solve_assignment
from irsd2d.scenario import ScenarioConfig
from irsd2d.shortterm import decide

from conftest import random_instance

B = 2e6


def test_scheme_ids_are_stable_strings():
    assert [s.value for s in SchemeId] == ["proposed-tts", "sts", "max-to-max-tts",
                                           "random-irs", "no-irs"]
    assert SchemeId("sts") is SchemeId.STS and str(SchemeId.NO_IRS) == "no-irs"


def test_max_to_max_examples():
    assert list(max_to_max_matching([5, 1], [2e9, 0.5e9]).assignment) == [0, 1]
    assert list(max_to_max_matching([1, 5], [2e9, 0.5e9]).assignment) == [1, 0]
    assert list(max_to_max_matching([3, 3, 3], [1e9] * 4).assignment) == [0, 1, 2]


def test_max_to_max_never_beats_km(rng):
    for _ in range(300):
        prof, sample = random_instance(rng, 4, 5, 6)
        cost = prof.weight[:, None] * prof.delays(prof.rates(sample.direct, B))
        greedy = max_to_max_matching(prof.task_bits, prof.helper_cpu, cost)
        assert greedy.total >= solve_assignment(cost).total * (1 - 1e-12)


def test_random_phases():
    a = random_irs_phases(40, np.random.default_rng(1))
    b = random_irs_phases(40, np.random.default_rng(2))
    assert not np.array_equal(a, b)
    assert np.allclose(np.abs(np.exp(1j * a)), 1.0)
    big = random_irs_phases(100_000, np.random.default_rng(3))
    assert abs(np.mean(np.exp(1j * big))) < 0.01
    assert big.min() >= 0 and big.max() < 2 * np.pi


def test_no_irs_equals_zeroed_cascade(rng):
    prof, sample = random_instance(rng, 3, 4, 8)
    phi = np.exp(1j * random_irs_phases(8, rng))
    a = no_irs_scheme(prof, sample, B)
    b = decide(effective_channels(sample.without_irs(), phi), prof, B)
    assert np.array_equal(a.assignment, b.assignment)
    assert a.weighted_delay == b.weighted_delay


def test_no_irs_unaffected_by_element_count():
    base = ScenarioConfig(n_users=3, n_helpers=4, n_elements=8, slots_per_frame=3, n_frames=4)
    a = run_trial(base, "no-irs", seed=4).summary.mean_delay
    b = run_trial(base.replace(n_elements=32), "no-irs", seed=4).summary.mean_delay
    assert a == b


def test_sts_without_irs_paths_equals_no_irs(rng):
    prof, sample = random_instance(rng, 3, 4, 6)
    dead = sample.without_irs()
    _, dec, _ = sts_slot(dead, np.zeros(6), prof, B)
    assert dec.weighted_delay == pytest.approx(no_irs_scheme(prof, dead, B).weighted_delay,
                                               rel=1e-14)


def test_sts_single_pair_reaches_coherent_gain(rng):
    for _ in range(20):
        prof, sample = random_instance(rng, 1, 1, 4)
        theta, dec, _ = sts_slot(sample, rng.uniform(0, 2 * np.pi, 4), prof, B)
        g, h = sample.pair(0, 0)
        best = (abs(h) + np.abs(g).sum()) ** 2
        got = abs(effective_channels(sample, np.exp(1j * theta))[0, 0]) ** 2
        assert got >= 0.999 * best


def test_sts_descends_from_its_start(rng):
    for _ in range(30):
        prof, sample = random_instance(rng, 3, 4, 8)
        theta, dec, init = sts_slot(sample, rng.uniform(0, 2 * np.pi, 8), prof, B)
        assert dec.weighted_delay <= init
        # the returned decision belongs to the returned phases
        again = decide(effective_channels(sample, np.exp(1j * theta)), prof, B)
        assert again.weighted_delay == pytest.approx(dec.weighted_delay, rel=1e-13)


def test_sts_finds_better_than_aligned_start_when_pairs_conflict(rng):
    prof, sample = random_instance(rng, 3, 4, 8)
    start = aligned_phases(*sample.pair(0, 0))
    _, dec, init = sts_slot(sample, start, prof, B)
    assert dec.weighted_delay <= init
