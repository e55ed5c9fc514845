"""Positive-P stochastic evolution in the doubled phase space.

Trajectories carry independent complex vectors (alpha, beta) plus a
gauge weight Omega (identity gauge ships enabled).  Initial conditions
come from the constructive canonical distribution
P ~ exp(-|alpha - beta*|^2 / 4) <mu|rho|mu>, mu = (alpha + beta*)/2,
and normally ordered operator moments are plain weighted averages of
beta...alpha products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .stochastic import (
    EnsembleResult,
    MomentAccumulator,
    SdeScheme,
    gaussian_field_noise,
    noise_block,
    run_ensemble,
)

__all__ = [
    "PlusPEnsemble",
    "sample_canonical",
    "canonical_sampler",
    "KerrPlusP",
    "normally_ordered_moment",
    "quadrature_x",
    "TimeReversalReport",
    "time_reversal_test",
]


@dataclass
class PlusPEnsemble:
    """Phase-space samples: alpha, beta of shape (n_traj, modes)."""

    alpha: np.ndarray
    beta: np.ndarray
    omega: np.ndarray  # gauge weights, identically 1 for the identity gauge

    @property
    def trajectories(self) -> int:
        return self.alpha.shape[0]


def _husimi_samples(state: dict, gen: np.random.Generator, n: int, modes: int) -> np.ndarray:
    """Draw mu from the Husimi function of a supported state family."""
    kind = state["kind"]
    if kind == "coherent":
        alpha0 = np.atleast_1d(np.asarray(state["alpha"], dtype=complex))
        if alpha0.size != modes:
            raise ValueError("coherent amplitude length must equal mode count")
        noise = gen.standard_normal((n, modes, 2))
        return alpha0 + (noise[..., 0] + 1j * noise[..., 1]) / math.sqrt(2.0)
    if kind == "thermal":
        nbar = np.atleast_1d(np.asarray(state["nbar"], dtype=float))
        if nbar.size != modes:
            raise ValueError("one nbar per mode required")
        noise = gen.standard_normal((n, modes, 2))
        width = np.sqrt((1.0 + nbar) / 2.0)
        return width * (noise[..., 0] + 1j * noise[..., 1])
    if kind == "fock":
        numbers = np.atleast_1d(np.asarray(state["n"], dtype=int))
        if numbers.size != modes:
            raise ValueError("one occupation per mode required")
        radius_sq = gen.gamma(shape=numbers + 1.0, size=(n, modes))
        phases = gen.uniform(0.0, 2.0 * math.pi, size=(n, modes))
        return np.sqrt(radius_sq) * np.exp(1j * phases)
    raise ValueError(f"unsupported state family {kind!r}")


def sample_canonical(
    state: dict, seed: int, trajectories: int, width: str = "canonical"
) -> PlusPEnsemble:
    """Sample (alpha, beta) from the canonical positive-P distribution.

    ``width="delta"`` places every trajectory at the classical point
    (only valid for coherent states, where the delta distribution is
    also an exact positive-P representation).
    """
    modes = len(np.atleast_1d(state.get("alpha", state.get("nbar", state.get("n", [0])))))
    if width == "delta":
        if state["kind"] != "coherent":
            raise ValueError("delta width only represents coherent states")
        alpha0 = np.atleast_1d(np.asarray(state["alpha"], dtype=complex))
        alpha = np.tile(alpha0, (trajectories, 1))
        return PlusPEnsemble(alpha, alpha.conj().copy(), np.ones(trajectories, dtype=complex))
    if width != "canonical":
        raise ValueError(f"unknown canonical width {width!r}")
    gen = np.random.Generator(np.random.Philox(key=np.array([seed, 0x9E3779B9], dtype=np.uint64)))
    mu = _husimi_samples(state, gen, trajectories, modes)
    # the Gaussian factor exp(-|gamma|^2/4) has <|gamma|^2> = 4 per mode
    noise = gen.standard_normal((trajectories, modes, 2))
    gamma = math.sqrt(2.0) * (noise[..., 0] + 1j * noise[..., 1])
    alpha = mu + 0.5 * gamma
    beta = np.conj(mu - 0.5 * gamma)
    return PlusPEnsemble(alpha, beta, np.ones(trajectories, dtype=complex))


def canonical_sampler(state: dict, width: str = "canonical"):
    """Sampler producing the packed (n, 2M) array used by the stepper."""

    def sampler(seed, n):
        ens = sample_canonical(state, seed, n, width)
        return np.concatenate([ens.alpha, ens.beta], axis=1)

    return sampler


@dataclass
class KerrPlusP:
    """Drift + noise for the single-component Bose gas +P equations.

    i d(alpha_m)/dt = omega_mn alpha_n + [chi alpha_m beta_m
                        + sqrt(i chi) xi1_m] alpha_m
    -i d(beta_m)/dt = omega_mn beta_n + [chi alpha_m beta_m
                        + sqrt(-i chi) xi2_m] beta_m

    with 2M real noises of variance delta_mm' / (dV dt) per step.  The
    Stratonovich-corrected drift (for the midpoint scheme) subtracts the
    analytic Ito term (i chi / 2) alpha (and conjugate-role for beta).
    """

    chi: float
    modes: int = 1
    omega: np.ndarray = None  # (M, M) single-particle matrix or None
    cell_volume: float = 1.0
    seed: int = 0
    interpretation: str = "stratonovich"
    sign: float = 1.0  # -1 flips the Hamiltonian (time reversal)
    reverse_step: int = None  # flip sign at this step index, if set

    _noise_cache: dict = field(default_factory=dict, repr=False)

    def derivative(self, state: np.ndarray, t: float, step_index: int) -> np.ndarray:
        n_traj = state.shape[0]
        m = self.modes
        alpha = state[:, :m]
        beta = state[:, m:]
        sign = self.sign
        if self.reverse_step is not None and step_index >= self.reverse_step:
            sign = -sign
        chi = sign * self.chi
        key = (step_index, n_traj)
        if key not in self._noise_cache:
            self._noise_cache.clear()
            self._noise_cache[key] = noise_block(self.seed, step_index, n_traj, 2 * m)
        raw = self._noise_cache[key]
        xi1 = raw[:, :m] * self._noise_scale
        xi2 = raw[:, m:] * self._noise_scale
        root_pos = np.sqrt(1j * chi + 0j)
        root_neg = np.sqrt(-1j * chi + 0j)
        cross = chi * alpha * beta
        d_alpha = -1j * (cross + root_pos * xi1) * alpha
        d_beta = +1j * (cross + root_neg * xi2) * beta
        if self.omega is not None:
            omega = sign * np.asarray(self.omega)
            d_alpha += -1j * alpha @ omega.T
            d_beta += +1j * beta @ omega.T
        if self.interpretation == "stratonovich":
            d_alpha += 0.5j * chi * alpha
            d_beta += -0.5j * chi * beta
        return np.concatenate([d_alpha, d_beta], axis=1)

    def set_dt(self, dt: float):
        self._noise_scale = 1.0 / math.sqrt(self.cell_volume * dt)
        return self


def normally_ordered_moment(
    ensemble: PlusPEnsemble, creation_modes, annihilation_modes
) -> tuple[complex, float]:
    """<a_m^dag ... a_n> = weighted mean of beta_m ... alpha_n products."""
    vals = np.ones(ensemble.trajectories, dtype=complex)
    for m in creation_modes:
        vals = vals * ensemble.beta[:, m]
    for m in annihilation_modes:
        vals = vals * ensemble.alpha[:, m]
    acc = MomentAccumulator()
    acc.add(vals, ensemble.omega)
    return acc.mean, acc.error


def quadrature_x(mode: int = 0, modes: int = 1):
    """Per-trajectory estimator of X = <a + a^dag>/2 on packed states."""

    def observable(state):
        return 0.5 * (state[:, mode] + state[:, modes + mode])

    return observable


def run_kerr_plusp(
    state: dict,
    chi: float,
    times,
    trajectory_count: int,
    seed: int,
    dt: float,
    omega=None,
    width: str = "canonical",
    scheme: str = "midpoint",
    interpretation: str = "stratonovich",
    midpoint_iters: int = 4,
    divergence_ceiling: float = 1e6,
    reverse_at: float = None,
    extra_observables: dict = None,
) -> EnsembleResult:
    modes = len(np.atleast_1d(state.get("alpha", state.get("nbar", state.get("n", [0])))))
    sde = SdeScheme(scheme=scheme, dt=dt, midpoint_iters=midpoint_iters,
                    interpretation=interpretation)
    reverse_step = None
    if reverse_at is not None:
        reverse_step = int(round(reverse_at / dt))
        if not math.isclose(reverse_step * dt, reverse_at, rel_tol=1e-9, abs_tol=1e-12):
            raise ValueError("reversal time must lie on the step grid")
    model = KerrPlusP(
        chi=chi,
        modes=modes,
        omega=omega,
        seed=seed,
        interpretation=interpretation,
        reverse_step=reverse_step,
    ).set_dt(dt)
    observables = {"X": quadrature_x(0, modes)}
    if extra_observables:
        observables.update(extra_observables)
    return run_ensemble(
        canonical_sampler(state, width),
        model.derivative,
        observables,
        trajectory_count,
        times,
        sde,
        seed,
        divergence_ceiling=divergence_ceiling,
    )


@dataclass
class TimeReversalReport:
    times: np.ndarray
    x_mean: np.ndarray
    x_error: np.ndarray
    initial_x: float
    recovery_residual: float
    residual_bar: float
    error_growth: bool
    diverged: int
    inconclusive: bool


def time_reversal_test(
    alpha0: complex,
    chi: float,
    reversal_time: float,
    trajectory_count: int,
    seed: int = 1234,
    dt: float = 0.002,
    n_points: int = 51,
    width: str = "canonical",
    error_ceiling: float = 0.5,
) -> TimeReversalReport:
    """Evolve to the reversal time, flip the Hamiltonian sign, return.

    Reports the <X> trace with CLT bars and the recovery residual at
    twice the reversal time.  If the sampling bar at the endpoint
    exceeds ``error_ceiling`` the test is inconclusive, not failed.
    """
    total = 2.0 * reversal_time
    times = np.linspace(0.0, total, n_points)
    # snap measurement times onto the step grid
    times = np.round(times / dt) * dt
    times[0], times[-1] = 0.0, total
    result = run_kerr_plusp(
        {"kind": "coherent", "alpha": [alpha0]},
        chi,
        times,
        trajectory_count,
        seed,
        dt,
        width=width,
        reverse_at=reversal_time,
    )
    x_mean = result.mean("X").real
    x_err = result.error("X")
    initial_x = float(np.real(alpha0))
    residual = abs(x_mean[-1] - initial_x)
    bar_end = float(x_err[-1])
    idx_before = int(np.argmin(np.abs(times - 0.8 * reversal_time)))
    return TimeReversalReport(
        times=times,
        x_mean=x_mean,
        x_error=x_err,
        initial_x=initial_x,
        recovery_residual=residual,
        residual_bar=bar_end,
        error_growth=bool(x_err[-1] > x_err[idx_before]),
        diverged=result.diverged,
        inconclusive=bar_end > error_ceiling,
    )
