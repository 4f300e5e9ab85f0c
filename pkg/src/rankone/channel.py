"""Output channels P_out(y | w) and their Gaussian equivalent.

Every channel exposes its log-likelihood, a sampler, and the score and its
derivative at w = 0. The effective noise level of a channel is the inverse
Fisher information at w = 0; a rank-one problem observed through the channel
has the same mutual information per variable, to leading order, as the
Gaussian channel with that variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import DegenerateChannelError, DifferentiabilityError, DomainError

FD_STEP = 1e-5
THIRD_DIFF_STEP = 1e-3
THIRD_DIFF_BOUND = 1e6
FISHER_FLOOR = 1e-14


@dataclass(frozen=True)
class ScoreAtZero:
    """First and second w-derivatives of log P_out(y | w) at w = 0."""

    s: Callable[[float], float]
    s_prime: Callable[[float], float]


class Channel:
    """Base class; subclasses implement the likelihood and the sampler."""

    kind: str = "abstract"
    #: discrete output alphabet, or None for a continuous output
    output_support: tuple | None = None
    w_max: float = math.inf

    def log_likelihood(self, y, w):
        raise NotImplementedError

    def sample(self, w, rng: np.random.Generator):
        raise NotImplementedError

    def check_w(self, w) -> None:
        w = np.asarray(w, dtype=float)
        if not np.all(np.isfinite(w)) or np.any(np.abs(w) > self.w_max + 1e-15):
            raise DomainError(f"|w| exceeds the channel validity range w_max={self.w_max}")

    def score_at_zero(self) -> ScoreAtZero:
        return _finite_difference_score(self.log_likelihood)

    def effective_delta(self) -> float:
        score = self.score_at_zero()
        if self.output_support is not None:
            ys = np.asarray(self.output_support, dtype=float)
            probs = np.exp(self.log_likelihood(ys, 0.0))
            s_vals = np.array([score.s(y) for y in ys])
            if not np.all(np.isfinite(s_vals[probs > 0])):
                raise DifferentiabilityError("score is not finite at w = 0")
            fisher = math.fsum(probs[probs > 0] * s_vals[probs > 0] ** 2)
        else:
            def integrand(y):
                return math.exp(self.log_likelihood(y, 0.0)) * score.s(y) ** 2

            fisher, _ = integrate.quad(integrand, -np.inf, np.inf, epsrel=1e-8, limit=200)
            if not math.isfinite(fisher):
                raise DifferentiabilityError("Fisher information integral diverged")
        if fisher <= FISHER_FLOOR:
            raise DegenerateChannelError(f"Fisher information {fisher:.3e} at w = 0")
        return 1.0 / fisher

    def to_config(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class GaussianChannel(Channel):
    """y = w + sqrt(delta) * xi with xi ~ N(0, 1)."""

    delta: float
    kind: str = field(default="gaussian", init=False)

    def __post_init__(self):
        if not (math.isfinite(self.delta) and self.delta > 0):
            raise DomainError(f"Gaussian channel needs delta > 0, got {self.delta}")

    def log_likelihood(self, y, w):
        y = np.asarray(y, dtype=float)
        return -((y - w) ** 2) / (2 * self.delta) - 0.5 * math.log(2 * math.pi * self.delta)

    def sample(self, w, rng):
        w = np.asarray(w, dtype=float)
        return w + math.sqrt(self.delta) * rng.standard_normal(w.shape)

    def score_at_zero(self) -> ScoreAtZero:
        d = self.delta
        return ScoreAtZero(s=lambda y: y / d, s_prime=lambda y: -1.0 / d)

    def effective_delta(self) -> float:
        return self.delta

    def to_config(self) -> dict:
        return {"kind": "gaussian", "delta": self.delta}


@dataclass(frozen=True)
class BernoulliLinearChannel(Channel):
    """y in {0, 1} with P(y = 1 | w) = base + slope * w.

    ``w_max`` defaults to the largest |w| for which the success probability
    stays inside [0, 1].
    """

    base: float
    slope: float
    w_max: float = None  # type: ignore[assignment]
    kind: str = field(default="bernoulli_linear", init=False)
    output_support: tuple = field(default=(0, 1), init=False)

    def __post_init__(self):
        if not (0.0 < self.base < 1.0):
            raise DomainError(f"base must lie in (0, 1), got {self.base}")
        if self.slope == 0 or not math.isfinite(self.slope):
            raise DomainError("slope must be finite and nonzero")
        limit = min(self.base, 1.0 - self.base) / abs(self.slope)
        if self.w_max is None:
            object.__setattr__(self, "w_max", limit)
        elif not (0 <= self.w_max <= limit * (1 + 1e-12)):
            raise DomainError(
                f"w_max={self.w_max} pushes base + slope*w outside [0, 1] (limit {limit})"
            )

    def success_probability(self, w):
        return np.clip(self.base + self.slope * np.asarray(w, dtype=float), 0.0, 1.0)

    def log_likelihood(self, y, w):
        p1 = self.success_probability(w)
        y = np.asarray(y)
        with np.errstate(divide="ignore"):
            return np.where(y == 1, np.log(p1), np.log1p(-p1))

    def sample(self, w, rng):
        self.check_w(w)
        p1 = self.success_probability(w)
        return (rng.random(np.shape(p1)) < p1).astype(np.int64)

    def score_at_zero(self) -> ScoreAtZero:
        a, b = self.slope, self.base

        def s(y):
            return a / b if y == 1 else -a / (1 - b)

        def s_prime(y):
            return -(a / b) ** 2 if y == 1 else -(a / (1 - b)) ** 2

        return ScoreAtZero(s=s, s_prime=s_prime)

    def to_config(self) -> dict:
        return {"kind": "bernoulli_linear", "base": self.base, "slope": self.slope}


class CustomChannel(Channel):
    """Channel given by a user log-likelihood and sampler.

    Derivatives at w = 0 are taken by central finite differences with one
    Richardson extrapolation. Smoothness is spot-checked at construction on
    the output support (discrete channels) or on draws from the sampler at
    w = 0 (continuous channels).
    """

    kind = "custom"

    def __init__(
        self,
        log_likelihood: Callable[[float, float], float],
        output_sampler: Callable[[float, np.random.Generator], float],
        output_support: Sequence | None = None,
        w_max: float = math.inf,
        check_points: int = 16,
    ):
        self._loglik = log_likelihood
        self._sampler = output_sampler
        self.output_support = None if output_support is None else tuple(output_support)
        self.w_max = w_max
        self._check_smoothness(check_points)

    def log_likelihood(self, y, w):
        y_arr, w_arr = np.broadcast_arrays(np.asarray(y, dtype=float), np.asarray(w, dtype=float))
        out = np.array([self._loglik(float(a), float(b)) for a, b in zip(y_arr.ravel(), w_arr.ravel())])
        return out.reshape(y_arr.shape) if y_arr.shape else float(out[0])

    def sample(self, w, rng):
        self.check_w(w)
        w_arr = np.asarray(w, dtype=float)
        draws = [self._sampler(float(v), rng) for v in w_arr.ravel()]
        return np.array(draws).reshape(w_arr.shape)

    def _check_smoothness(self, check_points: int) -> None:
        if self.output_support is not None:
            ys = list(self.output_support)
        else:
            rng = np.random.default_rng(0)
            ys = [self._sampler(0.0, rng) for _ in range(check_points)]
        h = THIRD_DIFF_STEP
        for y in ys:
            vals = [self._loglik(y, k * h) for k in (-2, -1, 0, 1, 2)]
            if not all(math.isfinite(v) for v in vals):
                raise DifferentiabilityError(f"log-likelihood not finite near w = 0 at y={y!r}")
            third = (vals[4] - 2 * vals[3] + 2 * vals[1] - vals[0]) / (2 * h**3)
            if abs(third) > THIRD_DIFF_BOUND:
                raise DifferentiabilityError(
                    f"third w-difference {third:.3e} at y={y!r} exceeds {THIRD_DIFF_BOUND:g}"
                )

    def to_config(self) -> dict:
        raise DomainError("custom channels cannot be serialized to a config")


def _finite_difference_score(loglik) -> ScoreAtZero:
    h = FD_STEP

    def first(y):
        def d(step):
            return (loglik(y, step) - loglik(y, -step)) / (2 * step)

        return float((4 * d(h / 2) - d(h)) / 3)

    def second(y):
        f0 = loglik(y, 0.0)

        def d2(step):
            return (loglik(y, step) - 2 * f0 + loglik(y, -step)) / step**2

        # second differences lose ~eps/h^2 to roundoff; use a wider base step
        big = 1e3 * h
        return float((4 * d2(big / 2) - d2(big)) / 3)

    def guarded(fn):
        def wrapped(y):
            value = fn(y)
            if not math.isfinite(value):
                raise DifferentiabilityError(f"non-finite derivative at y={y!r}")
            return value

        return wrapped

    return ScoreAtZero(s=guarded(first), s_prime=guarded(second))


def effective_delta(c: Channel) -> float:
    """Inverse Fisher information of the channel at w = 0."""
    return c.effective_delta()


def score_at_zero(c: Channel) -> ScoreAtZero:
    return c.score_at_zero()


def sample_observation(c: Channel, w, rng: np.random.Generator):
    """One draw (or an array of draws) from P_out(. | w)."""
    c.check_w(w)
    out = c.sample(w, rng)
    return out.item() if np.ndim(out) == 0 else out


def channel_from_config(cfg: dict) -> Channel:
    kind = cfg.get("kind")
    if kind == "gaussian":
        return GaussianChannel(delta=float(cfg["delta"]))
    if kind == "bernoulli_linear":
        w_max = cfg.get("w_max")
        return BernoulliLinearChannel(
            base=float(cfg["base"]),
            slope=float(cfg["slope"]),
            w_max=None if w_max is None else float(w_max),
        )
    raise DomainError(f"unknown channel kind {kind!r}")
