"""Two-timescale simulation loop, Monte Carlo trials and parameter sweeps."""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .baselines import SchemeId, max_to_max_matcher, random_irs_phases, sts_slot
from .channel import ChannelModel, effective_channels
from .matching import solve_assignment
from .rng import substream
from .scenario import ScenarioConfig, materialize, pad_blank_users
from .shortterm import Profiles, decide
from .ssca import BeamformerState, matched_csi, sample_gradient

SWEEP_AXES = {"M": "n_elements", "y_I": "irs_y", "J": "n_helpers", "frames": "n_frames"}


def csi_overhead(scheme, n_users: int, n_helpers: int, n_elements: int,
                 slots_per_frame: int, bits_per_coefficient: int = 8) -> dict:
    """CSI coefficients (and bits) exchanged per frame.

    The two-timescale schemes feed back the effective gains every slot and
    one full sample of the matched links per frame; the single-timescale
    scheme needs the full CSI every slot. Random and no-IRS schemes never
    report IRS channels.
    """
    scheme = SchemeId(scheme)
    I, J, M, T = n_users, n_helpers, n_elements, slots_per_frame
    if scheme is SchemeId.STS:
        coeffs = T * (I * J + I * M)
    elif scheme.uses_ssca:
        coeffs = T * I * J + I * M
    else:
        coeffs = T * I * J
    return {"scheme": scheme.value, "coefficients": coeffs,
            "bits": coeffs * bits_per_coefficient}


@dataclass(frozen=True)
class SlotMetrics:
    trial: int
    frame: int
    slot: int
    scheme: str
    weighted_delay: float
    assignment: tuple
    ratios: tuple
    rates: tuple
    pair_delays: tuple
    csi_coefficients: int


@dataclass
class RunSummary:
    scheme: str
    trial: int
    seed: int
    frame_delays: np.ndarray
    mean_delay: float
    csi_coefficients_per_frame: int
    csi_bits_per_frame: int
    total_csi_bits: int
    wall_clock: float
    final_theta: Optional[np.ndarray] = None
    varpi: Optional[float] = None


@dataclass
class TrialResult:
    summary: RunSummary
    slots: list = field(repr=False)


def _check_finite(value: float, where: str) -> None:
    if not math.isfinite(value):
        raise FloatingPointError(f"non-finite slot delay at {where}")


def run_trial(config: ScenarioConfig, scheme, seed: Optional[int] = None,
              trial: int = 0, keep_slots: bool = True) -> TrialResult:
    """Simulate one trial (one placement) of ``scheme`` over all frames.

    Channels of slot ``k`` in frame ``t`` come from substream
    ``(seed, trial, t, k)`` regardless of scheme.
    """
    scheme = SchemeId(scheme)
    seed = config.rng_seed if seed is None else seed
    c = config
    started = time.perf_counter()
    users, helpers = materialize(c, seed, trial)
    helpers = pad_blank_users(helpers, c.n_users)
    model = ChannelModel(users, helpers, c)
    profiles = Profiles.from_profiles(users, helpers)
    B, I, J, M, T = c.bandwidth, c.n_users, c.n_helpers, c.n_elements, c.slots_per_frame

    state = BeamformerState.initial(M, c) if scheme.uses_ssca else None
    matcher = max_to_max_matcher(profiles) if scheme is SchemeId.MAX_TO_MAX_TTS else solve_assignment
    fixed_phi = None
    if scheme is SchemeId.RANDOM_IRS:
        fixed_phi = np.exp(1j * random_irs_phases(M, substream(seed, trial, "random-irs")))
    sts_theta = np.zeros(M)

    frame_delays = np.zeros(c.n_frames)
    slots = []
    for t in range(c.n_frames):
        acc = 0.0
        for k in range(T):
            sample = model.draw(substream(seed, trial, t, k))
            csi = I * J
            if scheme is SchemeId.NO_IRS:
                dec = decide(sample.direct, profiles, B)
            elif scheme is SchemeId.STS:
                sts_theta, dec, _ = sts_slot(sample, sts_theta, profiles, B,
                                             c.sts_max_iters, c.sts_tol)
                csi += I * M
            else:
                phi = fixed_phi if fixed_phi is not None else state.phi
                dec = decide(effective_channels(sample, phi), profiles, B, matcher)
            if state is not None and k == T - 1:
                # frame-end update from the last slot's sample and matching
                g, h = matched_csi(sample, dec.assignment)
                state.step(sample_gradient(state.theta, g, h, profiles.matched(dec.assignment), B))
                csi += I * M
            wd = dec.weighted_delay
            _check_finite(wd, f"trial {trial}, frame {t}, slot {k}")
            acc += wd
            if keep_slots:
                slots.append(SlotMetrics(trial, t, t * T + k, scheme.value, wd,
                                         tuple(int(j) for j in dec.assignment),
                                         tuple(float(x) for x in dec.ratios),
                                         tuple(float(x) for x in dec.rates),
                                         tuple(float(x) for x in dec.pair_delays), csi))
        frame_delays[t] = acc / T

    oh = csi_overhead(scheme, I, J, M, T, c.bits_per_coefficient)
    summary = RunSummary(scheme.value, trial, seed, frame_delays, float(np.mean(frame_delays)),
                         oh["coefficients"], oh["bits"], oh["bits"] * c.n_frames,
                         time.perf_counter() - started,
                         None if state is None else state.theta.copy(),
                         None if state is None else state.varpi)
    return TrialResult(summary, slots)


def _run_cell(args):
    config, scheme, seed, trial, keep_slots = args
    return run_trial(config, scheme, seed, trial, keep_slots)


def _map(fn, jobs: Sequence, n_jobs: int):
    if n_jobs <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, jobs))


def run_trials(config: ScenarioConfig, schemes: Iterable, trials: Optional[int] = None,
               seed: Optional[int] = None, n_jobs: int = 1,
               keep_slots: bool = False) -> list:
    """Every scheme on trials ``0..trials-1`` with common random numbers."""
    seed = config.rng_seed if seed is None else seed
    trials = config.trials if trials is None else trials
    jobs = [(config, SchemeId(s), seed, tr, keep_slots) for tr in range(trials) for s in schemes]
    return _map(_run_cell, jobs, n_jobs)


@dataclass(frozen=True)
class SweepRow:
    axis: str
    value: float
    scheme: str
    trial: int
    mean_delay: float
    csi_bits_per_frame: int


def sweep(config: ScenarioConfig, axis: str, values: Sequence, schemes: Iterable,
          trials: Optional[int] = None, seed: Optional[int] = None,
          n_jobs: int = 1) -> list:
    """Full factorial over axis value, scheme and trial."""
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; choose from {sorted(SWEEP_AXES)}")
    name = SWEEP_AXES[axis]
    schemes = [SchemeId(s) for s in schemes]
    seed = config.rng_seed if seed is None else seed
    trials = config.trials if trials is None else trials
    jobs = []
    for v in values:
        v = int(v) if name != "irs_y" else float(v)
        cfg = config.replace(**{name: v})
        jobs += [(cfg, s, seed, tr, False) for tr in range(trials) for s in schemes]
    results = _map(_run_cell, jobs, n_jobs)
    rows = []
    for (cfg, s, _, tr, _), res in zip(jobs, results):
        rows.append(SweepRow(axis, getattr(cfg, name), s.value, tr, res.summary.mean_delay,
                             res.summary.csi_bits_per_frame))
    return rows


def aggregate(values) -> dict:
    """Mean, sample std and 95% normal half-width of ``values``."""
    x = np.asarray(values, dtype=float)
    n = len(x)
    std = float(np.std(x, ddof=1)) if n > 1 else 0.0
    return {"n": n, "mean": float(np.mean(x)), "std": std,
            "ci95": 1.96 * std / math.sqrt(n) if n > 1 else 0.0}


def summarize_sweep(rows) -> list:
    """One aggregate row per (value, scheme), in first-seen order."""
    groups: dict = {}
    for r in rows:
        groups.setdefault((r.axis, r.value, r.scheme), []).append(r.mean_delay)
    out = []
    for (axis, value, scheme), delays in groups.items():
        out.append({"axis": axis, "value": value, "scheme": scheme, **aggregate(delays)})
    return out


def convergence_curve(results) -> dict:
    """Per-frame delay averaged over trials, per scheme."""
    by_scheme: dict = {}
    for res in results:
        by_scheme.setdefault(res.summary.scheme, []).append(res.summary.frame_delays)
    return {s: np.mean(np.vstack(v), axis=0) for s, v in by_scheme.items()}
