"""Partial-offloading delay model.

All functions broadcast over numpy arrays. Rates use ``log2`` so that a rate
in bits/s and task sizes in bits are consistent.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LN2 = np.log(2.0)


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def rate(tx_power, h_eff, noise_power, bandwidth):
    """Achievable rate ``B log2(1 + p |h|^2 / sigma^2)`` in bits/s."""
    snr = np.asarray(tx_power) * np.abs(h_eff) ** 2 / np.asarray(noise_power)
    return _out(bandwidth * np.log1p(snr) / LN2)


def optimal_ratio(cycles_per_bit, local_cpu, helper_cpu, r):
    """Offloading fraction that equalizes the local and D2D branch delays.

    Zero when the helper has no CPU or the link has no rate.
    """
    C, fi, fj, r = np.broadcast_arrays(*(np.asarray(a, dtype=float)
                                         for a in (cycles_per_bit, local_cpu, helper_cpu, r)))
    num = C * fj * r
    den = C * (fi + fj) * r + fi * fj
    with np.errstate(invalid="ignore", divide="ignore"):
        rho = np.where(num > 0, num / np.where(den > 0, den, 1.0), 0.0)
    return _out(rho)


def reduced_delay(task_bits, cycles_per_bit, local_cpu, helper_cpu, r):
    """Task delay at the optimal offloading ratio, in seconds."""
    L, C, fi, fj, r = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in
                                            (task_bits, cycles_per_bit, local_cpu, helper_cpu, r)))
    s = fi + fj
    den = fi * fj * s + C * r * s * s
    with np.errstate(invalid="ignore", divide="ignore"):
        t = C * L / s + C * L * fj * fj / np.where(den > 0, den, 1.0)
    return _out(np.where(fj > 0, t, C * L / fi))


def delay_rate_derivative(task_bits, cycles_per_bit, local_cpu, helper_cpu, r):
    """d(reduced_delay)/dr; zero for blank helpers."""
    L, C, fi, fj, r = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in
                                            (task_bits, cycles_per_bit, local_cpu, helper_cpu, r)))
    den = fi * fj + C * r * (fi + fj)
    with np.errstate(invalid="ignore", divide="ignore"):
        d = -L * C * C * fj * fj / np.where(den > 0, den, 1.0) ** 2
    return _out(np.where(fj > 0, d, 0.0))


@dataclass(frozen=True)
class PairDelay:
    ratio: float
    local_delay: float
    offload_delay: float
    total: float
    rate: float


def pair_delay(task_bits, cycles_per_bit, local_cpu, helper_cpu, r, ratio) -> PairDelay:
    if not 0.0 <= ratio <= 1.0:
        raise ValueError(f"offloading ratio must lie in [0, 1], got {ratio}")
    if ratio > 0 and (r <= 0 or helper_cpu <= 0):
        raise ValueError("cannot offload over a zero-rate link or to a zero-CPU helper")
    t_local = (1.0 - ratio) * cycles_per_bit * task_bits / local_cpu
    if ratio == 0:
        t_d2d = 0.0
    else:
        t_d2d = ratio * task_bits / r + ratio * cycles_per_bit * task_bits / helper_cpu
    return PairDelay(float(ratio), float(t_local), float(t_d2d), float(max(t_local, t_d2d)),
                     float(r))
