"""Shared stochastic machinery: reproducible noise, SDE stepping, moments.

Noise is counter-based (Philox) and addressed by (master_seed, step,
trajectory, slot), so the values a trajectory sees never depend on worker
assignment or evaluation order.  All steppers operate on arrays with a
leading trajectory axis, so a whole ensemble advances in vectorized form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "NoiseStream",
    "noise_block",
    "gaussian_field_noise",
    "complex_field_noise",
    "MomentAccumulator",
    "SdeScheme",
    "step",
    "EnsembleResult",
    "run_ensemble",
]


def _step_generator(master_seed: int, step_index: int) -> np.random.Generator:
    key = np.array([master_seed & 0xFFFFFFFFFFFFFFFF, step_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def noise_block(master_seed: int, step_index: int, n_traj: int, per_traj: int) -> np.ndarray:
    """Standard normals of shape (n_traj, per_traj) for one time step.

    Row i is the noise owned by trajectory i: slot (i * per_traj + j) of
    the flat Philox-keyed stream for (seed, step).  Adding trajectories
    extends the block without changing existing rows.
    """
    gen = _step_generator(master_seed, step_index)
    return gen.standard_normal((n_traj, per_traj))


@dataclass(frozen=True)
class NoiseStream:
    """Single-trajectory view of the counter-based noise source."""

    master_seed: int
    trajectory_index: int

    def normals(self, step_index: int, count: int) -> np.ndarray:
        """The `count` standard normals this trajectory owns at a step."""
        gen = _step_generator(self.master_seed, step_index)
        flat = gen.standard_normal((self.trajectory_index + 1) * count)
        return flat[self.trajectory_index * count :]


def gaussian_field_noise(normals: np.ndarray, cell_volume: float, dt: float) -> np.ndarray:
    """Scale unit normals to discrete delta-correlated real noise.

    Per mode per step the variance is 1 / (cell_volume * dt), the lattice
    discretization of <xi(t) xi(t')> = delta(t - t') / dV.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    return normals / math.sqrt(cell_volume * dt)


def complex_field_noise(normals: np.ndarray, cell_volume: float, dt: float) -> np.ndarray:
    """Pairs of unit normals -> complex noise with <z z*> = 1/(dV dt).

    The last axis of `normals` must have even length; consecutive pairs
    become real and imaginary quadratures.
    """
    if normals.shape[-1] % 2:
        raise ValueError("need an even number of normals for complex noise")
    re = normals[..., 0::2]
    im = normals[..., 1::2]
    return (re + 1j * im) / math.sqrt(2.0 * cell_volume * dt)


@dataclass
class MomentAccumulator:
    """Running weighted mean / CLT error bar with loss-free merging."""

    weight_sum: complex = 0.0
    value_sum: complex = 0.0
    abs2_sum: float = 0.0
    count: int = 0

    def add(self, values: np.ndarray, weights=None) -> None:
        values = np.asarray(values)
        if weights is None:
            self.weight_sum += values.size
            self.value_sum += complex(values.sum())
            self.abs2_sum += float((np.abs(values) ** 2).sum())
        else:
            weights = np.asarray(weights)
            self.weight_sum += complex(weights.sum())
            self.value_sum += complex((weights * values).sum())
            self.abs2_sum += float((np.abs(weights) * np.abs(values) ** 2).sum())
        self.count += values.size

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        return MomentAccumulator(
            self.weight_sum + other.weight_sum,
            self.value_sum + other.value_sum,
            self.abs2_sum + other.abs2_sum,
            self.count + other.count,
        )

    @property
    def mean(self) -> complex:
        if self.count == 0:
            raise ValueError("empty accumulator")
        return self.value_sum / self.weight_sum

    @property
    def error(self) -> float:
        """Sample standard deviation of the mean (CLT bar)."""
        if self.count < 2:
            return math.inf
        w = abs(self.weight_sum)
        var = self.abs2_sum / w - abs(self.value_sum / self.weight_sum) ** 2
        var = max(var, 0.0) * self.count / (self.count - 1)
        return math.sqrt(var / self.count)


@dataclass(frozen=True)
class SdeScheme:
    """Integration scheme selection.

    ``interpretation`` records which stochastic calculus the supplied
    drift corresponds to; engines apply the analytic Ito->Stratonovich
    correction before handing drifts to the midpoint scheme.
    """

    scheme: str = "midpoint"  # "euler" | "midpoint"
    dt: float = 1e-3
    midpoint_iters: int = 4
    interpretation: str = "stratonovich"  # "ito" | "stratonovich"

    def __post_init__(self):
        if self.scheme not in ("euler", "midpoint"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.interpretation not in ("ito", "stratonovich"):
            raise ValueError(f"unknown interpretation {self.interpretation!r}")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.midpoint_iters < 1:
            raise ValueError("midpoint_iters must be >= 1")


def step(state, t, derivative, scheme: SdeScheme):
    """Advance one step of dy/dt = derivative(y, t).

    `derivative` already contains the discretized noise term for this
    step (drift + B(y) xi with xi of variance 1/dt), so the midpoint
    iteration evaluates both parts at the midpoint, which converges to
    the Stratonovich solution for multiplicative noise.
    """
    dt = scheme.dt
    if scheme.scheme == "euler":
        return state + dt * derivative(state, t)
    mid = state
    t_mid = t + 0.5 * dt
    for _ in range(scheme.midpoint_iters):
        mid = state + 0.5 * dt * derivative(mid, t_mid)
    return 2.0 * mid - state


@dataclass
class EnsembleResult:
    times: np.ndarray
    observables: dict  # name -> dict(mean=array, error=array)
    diverged: int = 0
    trajectories: int = 0
    unreliable: bool = False

    def mean(self, name):
        return self.observables[name]["mean"]

    def error(self, name):
        return self.observables[name]["error"]


def run_ensemble(
    sampler,
    derivative,
    observables: dict,
    trajectory_count: int,
    times,
    scheme: SdeScheme,
    seed: int,
    weights_fn=None,
    divergence_ceiling: float = 1e6,
    event_hooks=None,
):
    """Evolve an ensemble and accumulate observable means with CLT bars.

    sampler(seed, n) -> initial state array with leading trajectory axis.
    derivative(state, t, step_index) -> dy/dt including discrete noise.
    observables: name -> fn(state) -> per-trajectory complex values.
    weights_fn: optional fn(state) -> per-trajectory weights (gauge Omega).
    event_hooks: optional {step_index: fn(state) -> state} applied after
    the step (used e.g. for a Hamiltonian sign flip mid-run).

    Trajectories whose state leaves the divergence ceiling (or turns
    non-finite) are excluded from all later statistics and counted.
    """
    if trajectory_count < 2:
        raise ValueError("need at least 2 trajectories")
    times = np.asarray(times, dtype=float)
    if times[0] != 0.0:
        raise ValueError("measurement schedule must start at t=0")
    n_steps = int(round(times[-1] / scheme.dt))
    if not math.isclose(n_steps * scheme.dt, times[-1], rel_tol=1e-9, abs_tol=1e-12):
        raise ValueError("final time must be a multiple of dt")
    meas_steps = np.rint(times / scheme.dt).astype(int)
    if not np.allclose(meas_steps * scheme.dt, times, atol=1e-9):
        raise ValueError("measurement times must lie on the step grid")
    meas_lookup = {}
    for idx, s in enumerate(meas_steps):
        meas_lookup.setdefault(int(s), []).append(idx)

    state = sampler(seed, trajectory_count)
    alive = np.ones(trajectory_count, dtype=bool)
    series = {
        name: {"mean": np.zeros(len(times), dtype=complex), "error": np.zeros(len(times))}
        for name in observables
    }

    def flatten(arr):
        return arr.reshape(trajectory_count, -1)

    def record(step_idx):
        for t_idx in meas_lookup.get(step_idx, []):
            for name, fn in observables.items():
                acc = MomentAccumulator()
                vals = np.asarray(fn(state))[alive]
                w = None if weights_fn is None else np.asarray(weights_fn(state))[alive]
                acc.add(vals, w)
                series[name]["mean"][t_idx] = acc.mean
                series[name]["error"][t_idx] = acc.error

    record(0)
    for step_idx in range(n_steps):
        t = step_idx * scheme.dt
        state = step(state, t, lambda y, tt: derivative(y, tt, step_idx), scheme)
        if event_hooks and (step_idx + 1) in event_hooks:
            state = event_hooks[step_idx + 1](state)
        flat = flatten(state)
        bad = ~np.isfinite(flat).all(axis=1) | (np.abs(flat).max(axis=1) > divergence_ceiling)
        newly_dead = bad & alive
        if newly_dead.any():
            alive &= ~newly_dead
            # freeze dead trajectories so NaNs cannot poison the others
            state = np.where(alive.reshape((-1,) + (1,) * (state.ndim - 1)), state, 0.0)
        record(step_idx + 1)

    diverged = int(trajectory_count - alive.sum())
    result = EnsembleResult(
        times=times,
        observables=series,
        diverged=diverged,
        trajectories=trajectory_count,
        unreliable=diverged > 0.01 * trajectory_count,
    )
    return result
