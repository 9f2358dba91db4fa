"""Long-timescale IRS phase design by stochastic successive convex approximation.

Once per frame the controller takes one CSI sample of the matched links,
computes the gradient of the weighted delay with respect to the phases,
folds it into a running gradient estimate and moves the phases towards the
minimizer of a quadratic surrogate.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .offload import LN2, delay_rate_derivative, rate, reduced_delay
from .shortterm import MatchedPairs


def check_exponents(rho_exponent: float, gamma_exponent: float) -> None:
    """Reject step-size decays ``(1+t)^-a`` that break the convergence conditions.

    Both sequences need a divergent sum and a convergent sum of squares,
    so each exponent lies in (0.5, 1]; ``gamma/rho -> 0`` needs the
    phase step to decay strictly faster than the gradient-averaging step.
    """
    for name, a in (("rho_exponent", rho_exponent), ("gamma_exponent", gamma_exponent)):
        if not 0.5 < a <= 1.0:
            raise ValueError(f"{name} must lie in (0.5, 1], got {a}")
    if gamma_exponent <= rho_exponent:
        raise ValueError("gamma_exponent must exceed rho_exponent so that gamma/rho -> 0")


def step_schedules(t: int, rho_exponent: float = 0.7, gamma_exponent: float = 0.9):
    if t < 0:
        raise ValueError("frame index must be ≥ 0")
    check_exponents(rho_exponent, gamma_exponent)
    return (1.0 + t) ** -rho_exponent, (1.0 + t) ** -gamma_exponent


def matched_csi(sample, assignment):
    """Cascaded vectors ``(I, M)`` and direct gains ``(I,)`` of the matched links."""
    I, M = sample.user_irs.shape
    g = np.zeros((I, M), dtype=complex)
    h = np.zeros(I, dtype=complex)
    for i, j in enumerate(assignment):
        if j >= 0:
            g[i], h[i] = sample.pair(i, j)
    return g, h


def _effective(theta, g, h):
    phi = np.exp(1j * np.asarray(theta, dtype=float))
    return phi, h + np.conj(g) @ phi


def matched_objective(theta, g, h, pairs: MatchedPairs, bandwidth: float) -> float:
    """Weighted sum delay of a fixed matching as a function of the phases."""
    _, h_eff = _effective(theta, g, h)
    r = rate(pairs.tx_power, h_eff, pairs.noise_power, bandwidth)
    t = reduced_delay(pairs.task_bits, pairs.cycles_per_bit, pairs.local_cpu, pairs.helper_cpu, r)
    return float(np.sum(pairs.weight * t))


def sample_gradient(theta, g, h, pairs: MatchedPairs, bandwidth: float) -> np.ndarray:
    """Gradient of ``matched_objective`` with respect to the phases (s/rad)."""
    phi, h_eff = _effective(theta, g, h)
    gain = np.abs(h_eff) ** 2
    r = rate(pairs.tx_power, h_eff, pairs.noise_power, bandwidth)
    dT_dr = delay_rate_derivative(pairs.task_bits, pairs.cycles_per_bit, pairs.local_cpu,
                                  pairs.helper_cpu, r)
    dr_dgain = bandwidth * pairs.tx_power / (LN2 * (pairs.noise_power + pairs.tx_power * gain))
    # d|h_eff|^2 / d theta_m = 2 Im(h_eff g_m conj(phi_m))
    dgain = 2.0 * np.imag(h_eff[:, None] * g * np.conj(phi)[None, :])
    grad = (pairs.weight * dT_dr * dr_dgain) @ dgain
    if not np.all(np.isfinite(grad)):
        raise FloatingPointError("non-finite phase gradient")
    return grad


def update_surrogate(f_prev, sample_grad, rho: float) -> np.ndarray:
    return (1.0 - rho) * np.asarray(f_prev, dtype=float) + rho * np.asarray(sample_grad, dtype=float)


def minimize_surrogate(theta, f, varpi: float) -> np.ndarray:
    """Minimizer of ``f.(x - theta) + varpi |x - theta|^2``."""
    if varpi <= 0:
        raise ValueError("varpi must be > 0")
    return np.asarray(theta, dtype=float) - np.asarray(f, dtype=float) / (2.0 * varpi)


def update_theta(theta, theta_bar, gamma: float) -> np.ndarray:
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    return (1.0 - gamma) * np.asarray(theta, dtype=float) + gamma * np.asarray(theta_bar, dtype=float)


@dataclass
class BeamformerState:
    """Phases and running gradient estimate, advanced once per frame.

    ``varpi=None`` fixes the surrogate weight at the first update so that the
    largest phase move of frame 0 equals ``initial_step`` radians; it then
    stays constant.
    """

    theta: np.ndarray
    f: np.ndarray = None
    t: int = 0
    varpi: Optional[float] = None
    rho_exponent: float = 0.7
    gamma_exponent: float = 0.9
    initial_step: float = np.pi

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float).copy()
        self.f = np.zeros_like(self.theta) if self.f is None else np.asarray(self.f, dtype=float)
        check_exponents(self.rho_exponent, self.gamma_exponent)

    @classmethod
    def initial(cls, n_elements: int, config=None) -> "BeamformerState":
        if config is None:
            return cls(np.zeros(n_elements))
        return cls(np.zeros(n_elements), varpi=config.varpi, rho_exponent=config.rho_exponent,
                   gamma_exponent=config.gamma_exponent, initial_step=config.initial_step)

    @property
    def phi(self) -> np.ndarray:
        return np.exp(1j * self.theta)

    def step(self, sample_grad) -> np.ndarray:
        rho, gamma = step_schedules(self.t, self.rho_exponent, self.gamma_exponent)
        self.f = update_surrogate(self.f, sample_grad, rho)
        if self.varpi is None:
            scale = float(np.max(np.abs(self.f))) if self.f.size else 0.0
            if scale > 0:
                self.varpi = scale / (2.0 * self.initial_step)
        if self.varpi is not None:
            theta_bar = minimize_surrogate(self.theta, self.f, self.varpi)
            self.theta = update_theta(self.theta, theta_bar, gamma)
        if not np.all(np.isfinite(self.theta)):
            raise FloatingPointError(f"non-finite phases at frame {self.t}")
        self.t += 1
        return self.theta

    def to_dict(self) -> dict:
        return {"theta": self.theta.tolist(), "f": self.f.tolist(), "t": self.t,
                "varpi": self.varpi, "rho_exponent": self.rho_exponent,
                "gamma_exponent": self.gamma_exponent, "initial_step": self.initial_step}

    @classmethod
    def from_dict(cls, d: dict) -> "BeamformerState":
        return cls(np.array(d["theta"]), np.array(d["f"]), int(d["t"]), d["varpi"],
                   d["rho_exponent"], d["gamma_exponent"], d["initial_step"])

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))

    @classmethod
    def load(cls, path) -> "BeamformerState":
        return cls.from_dict(json.loads(Path(path).read_text()))
