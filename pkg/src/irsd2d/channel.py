"""Rician fading for the direct user-user links and the IRS-cascaded links."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

UNIT_MODULUS_TOL = 1e-9


def path_loss(distance, exponent: float, pathloss_ref: float, ref_distance: float = 1.0):
    """Large-scale power gain ``C_0 (d / D_0) ** -alpha``."""
    d = np.asarray(distance, dtype=float)
    if np.any(d <= 0):
        raise ValueError("link distance must be > 0")
    out = pathloss_ref * (d / ref_distance) ** (-exponent)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ChannelSample:
    """Full CSI of one slot.

    ``direct`` is ``(I, J)``; ``user_irs`` is ``(I, M)``; ``helper_irs`` is ``(J, M)``.
    The cascaded vector of pair ``(i, j)`` is ``conj(user_irs[i]) * helper_irs[j]``.
    """

    direct: np.ndarray
    user_irs: np.ndarray
    helper_irs: np.ndarray

    @property
    def shape(self) -> tuple:
        return self.direct.shape

    @property
    def cascaded(self) -> np.ndarray:
        return np.conj(self.user_irs)[:, None, :] * self.helper_irs[None, :, :]

    def pair(self, i: int, j: int):
        """``(g_ij, h_ij)`` for one link."""
        return np.conj(self.user_irs[i]) * self.helper_irs[j], self.direct[i, j]

    def without_irs(self) -> "ChannelSample":
        return ChannelSample(self.direct, np.zeros_like(self.user_irs),
                             np.zeros_like(self.helper_irs))


def check_unit_modulus(phi: np.ndarray, tol: float = UNIT_MODULUS_TOL) -> None:
    dev = np.max(np.abs(np.abs(phi) - 1.0)) if phi.size else 0.0
    if dev > tol:
        raise ValueError(f"IRS coefficients must have unit modulus (max deviation {dev:.3g})")


def effective_channels(sample: ChannelSample, phi: np.ndarray) -> np.ndarray:
    """``h_ij + g_ij^H phi`` for every pair, as an ``(I, J)`` complex array."""
    phi = np.asarray(phi, dtype=complex)
    if phi.shape != (sample.user_irs.shape[1],):
        raise ValueError(f"phi has shape {phi.shape}, expected ({sample.user_irs.shape[1]},)")
    check_unit_modulus(phi)
    return sample.direct + (sample.user_irs * phi) @ np.conj(sample.helper_irs).T


def ula_steering(n_elements: int, cos_angle) -> np.ndarray:
    """Half-wavelength ULA response; rows follow ``cos_angle``."""
    m = np.arange(n_elements)
    return np.exp(-1j * np.pi * np.outer(np.atleast_1d(cos_angle), m))


def _cn(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


class ChannelModel:
    """Static link geometry of one placement; draws per-slot fading.

    Path loss and line-of-sight components depend only on positions, so they
    are computed once. ``draw`` adds fresh NLOS scattering each call. Blank
    helpers (``position is None``) get all-zero channels.
    """

    def __init__(self, users, helpers, config):
        c = config
        self.n_users, self.n_helpers, self.n_elements = len(users), len(helpers), c.n_elements
        self.real = np.array([h.position is not None for h in helpers], dtype=bool)
        upos = np.array([u.position for u in users], dtype=float)
        hpos = np.array([h.position for h in helpers if h.position is not None],
                        dtype=float).reshape(-1, 3)
        irs = np.asarray(c.irs_position, dtype=float)
        k = 2.0 * np.pi / c.wavelength

        d_uu = np.linalg.norm(upos[:, None, :] - hpos[None, :, :], axis=-1)
        self.amp_direct = np.sqrt(path_loss(d_uu, c.exponent_uu, c.pathloss_ref, c.ref_distance))
        d_ui = np.linalg.norm(upos - irs, axis=-1)
        d_hi = np.linalg.norm(hpos - irs, axis=-1)
        self.amp_user = np.sqrt(path_loss(d_ui, c.exponent_ui, c.pathloss_ref, c.ref_distance))
        self.amp_helper = np.sqrt(path_loss(d_hi, c.exponent_ui, c.pathloss_ref, c.ref_distance))

        if c.los_mode == "ones":
            self.los_direct = np.ones_like(d_uu, dtype=complex)
            self.los_user = np.ones((len(upos), c.n_elements), dtype=complex)
            self.los_helper = np.ones((len(hpos), c.n_elements), dtype=complex)
        else:
            # array axis along x; the LOS phase also carries the propagation distance
            self.los_direct = np.exp(-1j * k * d_uu)
            self.los_user = (ula_steering(c.n_elements, (upos[:, 0] - irs[0]) / d_ui)
                             * np.exp(-1j * k * d_ui)[:, None])
            self.los_helper = (ula_steering(c.n_elements, (hpos[:, 0] - irs[0]) / d_hi)
                               * np.exp(-1j * k * d_hi)[:, None])

        beta = c.rician_factor
        if np.isinf(beta):
            self.w_los, self.w_nlos = 1.0, 0.0
        else:
            self.w_los, self.w_nlos = np.sqrt(beta / (1 + beta)), np.sqrt(1 / (1 + beta))
        if c.direct_fading == "rayleigh":
            self.w_los_direct, self.w_nlos_direct = 0.0, 1.0
        else:
            self.w_los_direct, self.w_nlos_direct = self.w_los, self.w_nlos

    def mean_sample(self) -> ChannelSample:
        """Channels with the scattering removed (LOS part only)."""
        return self._assemble(self.w_los_direct * self.los_direct,
                              self.w_los * self.los_user, self.w_los * self.los_helper)

    def draw(self, rng: np.random.Generator) -> ChannelSample:
        I, M = self.n_users, self.n_elements
        J = int(self.real.sum())
        direct = self.w_los_direct * self.los_direct + self.w_nlos_direct * _cn(rng, (I, J))
        user = self.w_los * self.los_user + self.w_nlos * _cn(rng, (I, M))
        helper = self.w_los * self.los_helper + self.w_nlos * _cn(rng, (J, M))
        return self._assemble(direct, user, helper)

    def _assemble(self, direct, user, helper) -> ChannelSample:
        full_direct = np.zeros((self.n_users, self.n_helpers), dtype=complex)
        full_helper = np.zeros((self.n_helpers, self.n_elements), dtype=complex)
        full_direct[:, self.real] = self.amp_direct * direct
        full_helper[self.real] = self.amp_helper[:, None] * helper
        return ChannelSample(full_direct, self.amp_user[:, None] * user, full_helper)


def draw_slot_channels(users, helpers, config, rng: np.random.Generator) -> ChannelSample:
    return ChannelModel(users, helpers, config).draw(rng)


def save_channel_sample(path, sample: ChannelSample) -> None:
    np.savez(Path(path), direct=sample.direct, user_irs=sample.user_irs,
             helper_irs=sample.helper_irs)


def load_channel_sample(path) -> ChannelSample:
    with np.load(Path(path)) as z:
        return ChannelSample(z["direct"], z["user_irs"], z["helper_irs"])
