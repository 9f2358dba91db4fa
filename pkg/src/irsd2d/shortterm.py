"""Per-slot decisions: offloading ratios and user matching from effective CSI."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .matching import UNMATCHED, MatchingOutcome, solve_assignment
from .offload import optimal_ratio, rate, reduced_delay


@dataclass(frozen=True)
class MatchedPairs:
    """Per-user parameters under one matching.

    Unmatched users, and users on a blank helper, carry ``helper_cpu = 0``.
    """

    task_bits: np.ndarray
    cycles_per_bit: np.ndarray
    local_cpu: np.ndarray
    helper_cpu: np.ndarray
    weight: np.ndarray
    tx_power: np.ndarray
    noise_power: np.ndarray

    @classmethod
    def from_profiles(cls, users, helpers, assignment) -> "MatchedPairs":
        return Profiles.from_profiles(users, helpers).matched(assignment)


@dataclass(frozen=True)
class Profiles:
    """Column view of the task-user and helper profiles of one trial."""

    task_bits: np.ndarray
    cycles_per_bit: np.ndarray
    local_cpu: np.ndarray
    weight: np.ndarray
    tx_power: np.ndarray
    helper_cpu: np.ndarray
    noise_power: np.ndarray

    @classmethod
    def from_profiles(cls, users, helpers) -> "Profiles":
        def col(items, name):
            return np.array([getattr(x, name) for x in items], dtype=float)

        return cls(col(users, "task_bits"), col(users, "cycles_per_bit"),
                   col(users, "local_cpu"), col(users, "weight"), col(users, "tx_power"),
                   col(helpers, "helper_cpu"), col(helpers, "noise_power"))

    @property
    def n_users(self) -> int:
        return len(self.task_bits)

    @property
    def n_helpers(self) -> int:
        return len(self.helper_cpu)

    def matched(self, assignment) -> MatchedPairs:
        a = np.asarray(assignment, dtype=int)
        ok = a != UNMATCHED
        safe = np.where(ok, a, 0)
        return MatchedPairs(self.task_bits, self.cycles_per_bit, self.local_cpu,
                            np.where(ok, self.helper_cpu[safe], 0.0), self.weight,
                            self.tx_power, np.where(ok, self.noise_power[safe], 1.0))

    def rates(self, h_eff: np.ndarray, bandwidth: float) -> np.ndarray:
        return rate(self.tx_power[:, None], h_eff, self.noise_power[None, :], bandwidth)

    def delays(self, rates: np.ndarray) -> np.ndarray:
        """Reduced delay of every user-helper pair, ``(I, J)``."""
        return reduced_delay(self.task_bits[:, None], self.cycles_per_bit[:, None],
                             self.local_cpu[:, None], self.helper_cpu[None, :], rates)


@dataclass(frozen=True)
class SlotDecision:
    outcome: MatchingOutcome
    weights: np.ndarray
    rates: np.ndarray        # per user, on the matched link
    ratios: np.ndarray       # per user
    pair_delays: np.ndarray  # per user, seconds

    @property
    def assignment(self) -> np.ndarray:
        return self.outcome.assignment

    @property
    def weighted_delay(self) -> float:
        return math.fsum(self.weights * self.pair_delays)


Matcher = Callable[[np.ndarray], MatchingOutcome]


def decide(h_eff: np.ndarray, profiles: Profiles, bandwidth: float,
           matcher: Matcher = solve_assignment) -> SlotDecision:
    """Optimal ratios for every pair, then the matching of the weighted delays."""
    r = profiles.rates(h_eff, bandwidth)
    t = profiles.delays(r)
    outcome = matcher(profiles.weight[:, None] * t)
    a = outcome.assignment
    users = np.arange(profiles.n_users)
    ok = a != UNMATCHED
    safe = np.where(ok, a, 0)
    r_m = np.where(ok, r[users, safe], 0.0)
    fj = np.where(ok, profiles.helper_cpu[safe], 0.0)
    local = profiles.cycles_per_bit * profiles.task_bits / profiles.local_cpu
    ratios = optimal_ratio(profiles.cycles_per_bit, profiles.local_cpu, fj, r_m)
    delays = np.where(ok, t[users, safe], local)
    return SlotDecision(outcome, profiles.weight, r_m, np.asarray(ratios), delays)
