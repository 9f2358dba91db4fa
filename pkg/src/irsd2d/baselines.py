"""Comparison schemes: single-timescale, max-to-max matching, random and no IRS."""
from __future__ import annotations

import enum

import numpy as np

from .channel import ChannelSample, effective_channels
from .matching import UNMATCHED, MatchingOutcome, _total
from .shortterm import Profiles, SlotDecision, decide
from .ssca import matched_csi, matched_objective, sample_gradient


class SchemeId(str, enum.Enum):
    PROPOSED_TTS = "proposed-tts"
    STS = "sts"
    MAX_TO_MAX_TTS = "max-to-max-tts"
    RANDOM_IRS = "random-irs"
    NO_IRS = "no-irs"

    def __str__(self) -> str:
        return self.value

    @property
    def uses_ssca(self) -> bool:
        return self in (SchemeId.PROPOSED_TTS, SchemeId.MAX_TO_MAX_TTS)


ALL_SCHEMES = tuple(SchemeId)


def max_to_max_matching(task_bits, helper_cpu, cost=None) -> MatchingOutcome:
    """Greedy pairing: largest remaining task to the fastest remaining helper.

    Ties go to the lower index. ``cost`` only feeds the reported total.
    """
    users = sorted(range(len(task_bits)), key=lambda i: (-task_bits[i], i))
    helpers = sorted(range(len(helper_cpu)), key=lambda j: (-helper_cpu[j], j))
    assignment = np.full(len(task_bits), UNMATCHED, dtype=int)
    for i, j in zip(users, helpers):
        assignment[i] = j
    total = 0.0 if cost is None else _total(np.asarray(cost, dtype=float), assignment)
    return MatchingOutcome(assignment, total, len(helper_cpu))


def max_to_max_matcher(profiles: Profiles):
    return lambda cost: max_to_max_matching(profiles.task_bits, profiles.helper_cpu, cost)


def random_irs_phases(n_elements: int, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(0.0, 2.0 * np.pi, size=n_elements)


def no_irs_scheme(profiles: Profiles, sample: ChannelSample, bandwidth: float) -> SlotDecision:
    return decide(sample.direct, profiles, bandwidth)


def aligned_phases(g: np.ndarray, h: complex) -> np.ndarray:
    """Phases that add every cascaded path in phase with the direct path."""
    return np.angle(h) + np.angle(g)


def _decide_at(theta, sample, profiles, bandwidth):
    return decide(effective_channels(sample, np.exp(1j * theta)), profiles, bandwidth)


def sts_slot(sample: ChannelSample, theta_init, profiles: Profiles, bandwidth: float,
             max_iters: int = 50, tol: float = 1e-6, armijo: float = 1e-4,
             first_step: float = np.pi / 4):
    """Optimize the phases for one slot using the full CSI.

    Gradient steps on the phases with a backtracking line search, each
    followed by a fresh KM matching, until the relative improvement falls
    below ``tol``. The start point is the best of ``theta_init`` and the
    coherent alignment of each matched link.

    Returns ``(theta, decision, initial_objective)``.
    """
    theta = np.asarray(theta_init, dtype=float).copy()
    dec = _decide_at(theta, sample, profiles, bandwidth)
    init_obj = dec.weighted_delay
    best_obj = init_obj
    for i, j in enumerate(dec.assignment):
        if j == UNMATCHED or profiles.helper_cpu[j] == 0:
            continue
        g, h = sample.pair(i, j)
        if not np.any(g):
            continue
        cand = aligned_phases(g, h)
        cdec = _decide_at(cand, sample, profiles, bandwidth)
        if cdec.weighted_delay < best_obj:
            theta, dec, best_obj = cand, cdec, cdec.weighted_delay

    for _ in range(max_iters):
        pairs = profiles.matched(dec.assignment)
        g, h = matched_csi(sample, dec.assignment)
        grad = sample_gradient(theta, g, h, pairs, bandwidth)
        gmax = float(np.max(np.abs(grad))) if grad.size else 0.0
        if gmax == 0.0:
            break
        obj = matched_objective(theta, g, h, pairs, bandwidth)
        step = first_step / gmax
        gg = float(grad @ grad)
        moved = False
        for _ in range(40):
            trial = theta - step * grad
            if matched_objective(trial, g, h, pairs, bandwidth) <= obj - armijo * step * gg:
                moved = True
                break
            step *= 0.5
        if not moved:
            break
        new_dec = _decide_at(trial, sample, profiles, bandwidth)
        new_obj = new_dec.weighted_delay
        if new_obj > best_obj:
            break
        improvement = (best_obj - new_obj) / best_obj if best_obj > 0 else 0.0
        theta, dec, best_obj = trial, new_dec, new_obj
        if improvement < tol:
            break
    return theta, dec, init_obj
