"""Bethe upper bound i_B(m), interpolation lower bound i_L(m), their global
minimizers, and the scalar state-evolution map.

With E2 = E[x^2] and z ~ N(0, 1)::

    i_B(m) = (m^2 + E2^2) / (4 delta) - E J(m/delta, m x*/delta + sqrt(m/delta) z)
    i_L(m) = (2 m^2 - mh^2 + E2^2) / (4 delta)
             - E J(mh/delta, m x*/delta + sqrt(mh/delta) z)

where mh is the global minimizer of i_B. Stationary points of i_B are the
fixed points of m -> E[x* eta(m)], eta being the posterior-mean denoiser.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, InternalConsistencyError
from .prior import Prior
from .scalar import DEFAULT_ORDER, Quadrature, denoiser, gauss_hermite, j_func

GRID_POINTS = 401
GOLDEN_TOL = 1e-9
TIE_TOL = 1e-9
MATCH_EPSILON = 1e-6
M_EPSILON = 1e-4
STATIONARITY_TOL = 1e-6
PROBE_FRACTION = 1e-9

_INV_PHI = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class ModelPoint:
    """A prior, a Gaussian noise level and the quadrature order used for E_z."""

    prior: Prior
    delta: float
    order: int = DEFAULT_ORDER

    def __post_init__(self):
        if not (math.isfinite(self.delta) and self.delta > 0):
            raise DomainError(f"delta must be positive, got {self.delta}")

    @property
    def quad(self) -> Quadrature:
        return gauss_hermite(self.order)

    @property
    def second_moment(self) -> float:
        return self.prior.second_moment


@dataclass(frozen=True)
class Minimum:
    m_star: float
    value: float
    candidates: list = field(default_factory=list)


@dataclass(frozen=True)
class BoundResult:
    delta: float
    m_hat: float
    i_b_min: float
    m_tilde: float
    i_l_min: float
    bounds_match: bool
    candidates: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _expect(mp: ModelPoint, kernel, A, signal, noise, times_x_star=False):
    """E_{x*, z}[(x*) kernel(A, signal x* + noise z)] vectorized over the m-batch."""
    q = mp.quad
    A, signal, noise = np.broadcast_arrays(
        np.asarray(A, dtype=float), np.asarray(signal, dtype=float), np.asarray(noise, dtype=float)
    )
    total = np.zeros(A.shape)
    for x_star, w in zip(mp.prior.values, mp.prior.weights):
        B = signal[..., None] * x_star + noise[..., None] * q.nodes
        scale = w * x_star if times_x_star else w
        total += scale * (kernel(A[..., None], B) @ q.weights)
    return total


def _expect_j(mp, A, signal, noise):
    return _expect(mp, lambda a, b: j_func(mp.prior, a, b), A, signal, noise)


def _expect_overlap(mp, A, signal, noise):
    return _expect(mp, lambda a, b: denoiser(mp.prior, a, b), A, signal, noise, times_x_star=True)


def _scalarize(out, like):
    return float(out) if np.ndim(like) == 0 else out


def _check_m(m):
    m = np.asarray(m, dtype=float)
    if np.any(m < 0) or not np.all(np.isfinite(m)):
        raise DomainError("overlap parameter m must be finite and nonnegative")
    return m


def i_bethe(mp: ModelPoint, m):
    """Bethe mutual information i_B(m); accepts scalars or arrays."""
    m_arr = _check_m(m)
    d = mp.delta
    e2 = mp.second_moment
    a = m_arr / d
    out = (m_arr**2 + e2**2) / (4 * d) - _expect_j(mp, a, a, np.sqrt(a))
    return _scalarize(out, m)


def i_lower(mp: ModelPoint, m, m_hat: float):
    """Lower-bound functional i_L(m) built around the Bethe minimizer m_hat."""
    m_arr = _check_m(m)
    m_hat = float(_check_m(m_hat))
    d = mp.delta
    e2 = mp.second_moment
    a = m_hat / d
    out = (2 * m_arr**2 - m_hat**2 + e2**2) / (4 * d) - _expect_j(mp, a, m_arr / d, math.sqrt(a))
    return _scalarize(out, m)


def state_evolution_step(mp: ModelPoint, m):
    """One application of m -> E[x* eta(m/delta, m x*/delta + sqrt(m/delta) z)]."""
    m_arr = _check_m(m)
    a = m_arr / mp.delta
    out = np.clip(_expect_overlap(mp, a, a, np.sqrt(a)), 0.0, mp.second_moment)
    return _scalarize(out, m)


def i_bethe_prime(mp: ModelPoint, m):
    """d i_B / dm = (m - E[x* eta(m)]) / (2 delta)."""
    m_arr = _check_m(m)
    a = m_arr / mp.delta
    out = (m_arr - _expect_overlap(mp, a, a, np.sqrt(a))) / (2 * mp.delta)
    return _scalarize(out, m)


def i_lower_prime(mp: ModelPoint, m, m_hat: float):
    """d i_L / dm at fixed m_hat."""
    m_arr = _check_m(m)
    a = float(m_hat) / mp.delta
    out = (m_arr - _expect_overlap(mp, a, m_arr / mp.delta, math.sqrt(a))) / mp.delta
    return _scalarize(out, m)


def mi_from_free_energy(mp: ModelPoint, f: float) -> float:
    """Mutual information per variable from the free energy per variable."""
    if not math.isfinite(f):
        raise DomainError("free energy must be finite")
    return f + mp.second_moment**2 / (4 * mp.delta)


def golden_section(f, a: float, b: float, tol: float = GOLDEN_TOL, max_iter: int = 200):
    """Minimize a unimodal f on [a, b]; returns (x, f(x))."""
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a < tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def _local_minima(vals: np.ndarray) -> list[int]:
    n = len(vals)
    out = []
    for k in range(n):
        left = k == 0 or vals[k] <= vals[k - 1]
        right = k == n - 1 or vals[k] <= vals[k + 1]
        if left and right:
            out.append(k)
    return out


def minimize_bound(
    mp: ModelPoint,
    which: str = "bethe",
    m_hat: float | None = None,
    extra_candidates=(),
) -> Minimum:
    """Global minimum of i_B (``which="bethe"``) or of i_L at fixed ``m_hat``
    (``which="lower"``) over m in [0, E[x^2]].

    A 401-point grid locates every local minimum. A bracket in which i'(m)
    changes sign is solved for the stationary point; otherwise golden-section
    search refines it to 1e-9. The endpoints m = 0 and m = E[x^2] count only
    when they are one-sided local minima. Candidates within 1e-9 of the best
    value are reported and the tie goes to the smallest m.
    """
    if which == "bethe":
        def f(m):
            return i_bethe(mp, m)

        def fprime(m):
            return i_bethe_prime(mp, m)
    elif which == "lower":
        if m_hat is None:
            raise DomainError("the lower bound needs m_hat")

        def f(m):
            return i_lower(mp, m, m_hat)

        def fprime(m):
            return i_lower_prime(mp, m, m_hat)
    else:
        raise DomainError(f"unknown bound {which!r}")

    upper = mp.second_moment
    grid = np.linspace(0.0, upper, GRID_POINTS)
    vals = f(grid)
    # i'(0) vanishes for centred priors; probe just inside the interval instead
    probe = PROBE_FRACTION * upper
    found: list[tuple[float, float]] = []
    for k in _local_minima(vals):
        a = float(grid[max(k - 1, 0)])
        b = float(grid[min(k + 1, GRID_POINTS - 1)])
        ga = fprime(max(a, probe))
        gb = fprime(b)
        # an endpoint only counts when it is a genuine one-sided local minimum
        if k == 0 and ga >= 0:
            found.append((0.0, float(vals[0])))
        if k == GRID_POINTS - 1 and fprime(upper) <= 0:
            found.append((upper, float(vals[-1])))
        if ga < 0 <= gb:
            # the stationary point itself, so that m_hat solves the fixed-point equation
            x = b if gb == 0 else brentq(
                fprime, max(a, probe), b, xtol=1e-15, rtol=4 * np.finfo(float).eps
            )
            found.append((float(x), float(f(x))))
        elif 0 < k < GRID_POINTS - 1 or ga < 0:
            x, fx = golden_section(f, a, b)
            found.append((float(x), float(fx)))
    if not found:
        k = int(np.argmin(vals))
        found.append((float(grid[k]), float(vals[k])))
    for m in extra_candidates:
        m = min(max(float(m), 0.0), upper)
        found.append((m, float(f(m))))

    best = min(v for _, v in found)
    near = sorted((m, v) for m, v in found if v <= best + TIE_TOL)
    candidates: list[tuple[float, float]] = []
    for m, v in near:
        if candidates and abs(m - candidates[-1][0]) < M_EPSILON:
            continue
        candidates.append((m, v))
    m_star, value = candidates[0]
    return Minimum(m_star=m_star, value=value, candidates=candidates)


def evaluate_point(mp: ModelPoint) -> BoundResult:
    """Minimize both bounds at one (prior, delta) point and compare them."""
    upper = minimize_bound(mp, "bethe")
    m_hat = upper.m_star
    lower = minimize_bound(mp, "lower", m_hat=m_hat, extra_candidates=(m_hat,))
    if lower.value > upper.value + 1e-9:
        raise InternalConsistencyError(
            f"lower bound {lower.value!r} exceeds upper bound {upper.value!r}"
        )
    slope = i_lower_prime(mp, m_hat, m_hat)
    if abs(slope) > STATIONARITY_TOL:
        raise InternalConsistencyError(
            f"m_hat={m_hat!r} is not stationary for i_L (slope {slope:.3e})"
        )
    match = abs(lower.value - upper.value) < MATCH_EPSILON and abs(lower.m_star - m_hat) < M_EPSILON
    return BoundResult(
        delta=mp.delta,
        m_hat=m_hat,
        i_b_min=upper.value,
        m_tilde=lower.m_star,
        i_l_min=lower.value,
        bounds_match=bool(match),
        candidates=list(upper.candidates),
    )


def spectral_threshold(p: Prior) -> float:
    """Noise level below which m = 0 stops being a local minimum of i_B.

    For a centred prior the state-evolution map is m -> (E[x^2])^2 m / delta
    to first order, so the trivial fixed point destabilizes at
    delta = (E[x^2])^2.
    """
    return p.second_moment**2
