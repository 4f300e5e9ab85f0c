"""Approximate message passing for the Gaussian-channel rank-one model, and
the scalar state evolution that predicts its overlap.

One AMP step with scalar precision A^t::

    B^t = Y f^t / (sqrt(n) delta) - b^t f^{t-1}
    A^t = |f^t|^2 / (n delta)
    f^{t+1} = eta(A^t, B^t)                      (componentwise)
    b^{t+1} = sum_j d eta / dB (A^t, B^t_j) / (n delta)

Damping mixes f^{t+1} with f^t. Overlaps are reported as |<f, x*>| / n since
the model cannot tell x* from -x*.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bounds import ModelPoint, state_evolution_step
from .channel import GaussianChannel
from .errors import DivergenceError, DomainError
from .oracle import Instance
from .prior import Prior
from .scalar import denoiser, posterior_variance

STOP_DISTANCE = 1e-8
POWER_ITERATIONS = 200


@dataclass
class AmpState:
    estimate: np.ndarray
    prev_estimate: np.ndarray
    iteration: int = 0
    overlap_history: list[float] = field(default_factory=list)
    distance_history: list[float] = field(default_factory=list)
    converged: bool = False

    @property
    def overlap(self) -> float:
        return self.overlap_history[-1] if self.overlap_history else float("nan")


@dataclass(frozen=True)
class SeTrace:
    m_values: list[float]
    converged: bool
    fixed_point: float


def _random_init(p: Prior, x_star: np.ndarray, eps: float, rng: np.random.Generator):
    # posterior mean from a scalar side observation of signal-to-noise a0;
    # to first order its overlap with x* is a0 E[x^2]^2 = eps
    a0 = eps / p.second_moment**2
    b0 = a0 * x_star + math.sqrt(a0) * rng.standard_normal(x_star.shape)
    return np.asarray(denoiser(p, a0, b0), dtype=float)


def _spectral_init(p: Prior, y: np.ndarray, rng: np.random.Generator):
    v = rng.standard_normal(y.shape[0])
    for _ in range(POWER_ITERATIONS):
        v = y @ v
        v /= np.linalg.norm(v)
    return v * math.sqrt(y.shape[0] * p.second_moment)


def initial_estimate(p: Prior, inst: Instance, init="random", eps: float = 0.01, seed=None):
    """Starting vector f^0 for ``amp_run``.

    ``init`` is ``"random"`` (weakly informative, overlap about ``eps``),
    ``"spectral"`` (power iteration on Y) or an explicit array.
    """
    rng = np.random.default_rng(seed)
    if isinstance(init, str):
        if init == "random":
            if not eps > 0:
                raise DomainError("eps must be positive")
            return _random_init(p, inst.x_star, eps, rng)
        if init == "spectral":
            return _spectral_init(p, np.asarray(inst.y, dtype=float), rng)
        raise DomainError(f"unknown init {init!r}")
    f0 = np.asarray(init, dtype=float)
    if f0.shape != (inst.n,):
        raise DomainError(f"init vector must have length {inst.n}")
    return f0.copy()


def amp_run(
    p: Prior,
    inst: Instance,
    max_iter: int = 100,
    damping: float = 0.0,
    init="random",
    eps: float = 0.01,
    seed=None,
) -> AmpState:
    """Run AMP on a Gaussian-channel instance drawn with prior ``p``."""
    if not isinstance(inst.channel, GaussianChannel):
        raise DomainError("AMP is implemented for the Gaussian channel only")
    if not (0.0 <= damping < 1.0):
        raise DomainError("damping must lie in [0, 1)")
    n = inst.n
    delta = inst.channel.delta
    y = np.asarray(inst.y, dtype=float) / (math.sqrt(n) * delta)
    f = initial_estimate(p, inst, init, eps, seed)
    state = AmpState(estimate=f, prev_estimate=np.zeros(n))
    state.overlap_history.append(abs(float(f @ inst.x_star)) / n)
    onsager = 0.0
    for t in range(1, max_iter + 1):
        b = y @ f - onsager * state.prev_estimate
        a = float(f @ f) / (n * delta)
        fresh = np.asarray(denoiser(p, a, b), dtype=float)
        new_f = (1 - damping) * fresh + damping * f
        # the undamped coefficient keeps the fixed points equal to the TAP fixed points
        onsager = float(np.sum(posterior_variance(p, a, b))) / (n * delta)
        if not np.all(np.isfinite(new_f)):
            raise DivergenceError(f"non-finite AMP iterate at iteration {t}", iteration=t)
        distance = float(np.linalg.norm(new_f - f)) / math.sqrt(n)
        state.prev_estimate, f = f, new_f
        state.estimate = f
        state.iteration = t
        state.overlap_history.append(abs(float(f @ inst.x_star)) / n)
        state.distance_history.append(distance)
        if distance < STOP_DISTANCE:
            state.converged = True
            break
    return state


def state_evolution_run(
    mp: ModelPoint,
    m0: float,
    max_iter: int = 10_000,
    tol: float = 1e-10,
    damping: float = 0.5,
) -> SeTrace:
    """Iterate m <- (1 - damping) E[x* eta(m)] + damping m from m0."""
    e2 = mp.second_moment
    if not (0.0 <= m0 <= e2):
        raise DomainError(f"m0 must lie in [0, {e2}]")
    if not (0.0 <= damping < 1.0):
        raise DomainError("damping must lie in [0, 1)")
    m = float(m0)
    values = [m]
    converged = False
    for _ in range(max_iter):
        new = (1 - damping) * state_evolution_step(mp, m) + damping * m
        new = min(max(new, 0.0), e2)
        values.append(new)
        if abs(new - m) < tol:
            converged = True
            m = new
            break
        m = new
    return SeTrace(m_values=values, converged=converged, fixed_point=m)


def write_log(state: AmpState, path, header_lines: Sequence[str] = ()) -> None:
    """CSV log with columns iteration, overlap, iterate_distance."""
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iteration", "overlap", "iterate_distance"])
        for t, overlap in enumerate(state.overlap_history):
            dist = state.distance_history[t - 1] if t > 0 else float("nan")
            writer.writerow([t, repr(overlap), repr(dist)])
