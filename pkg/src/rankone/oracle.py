"""Small-n ground truth by exhaustive enumeration over x.

Observations are drawn from the model, and for each draw the posterior over
all |support|^n configurations is computed exactly. Averages over draws give
unbiased Monte Carlo estimates of the mutual information per variable, of
posterior identities, and of the gap between a channel and its Gaussian
equivalent.

The Gaussian-channel Hamiltonian sums over i <= j, diagonal included::

    H(x; Y) = sum_{i<=j} ( -x_i^2 x_j^2 / (2 n delta) + x_i x_j Y_ij / (sqrt(n) delta) )

and log Z(Y) = log sum_x p(x) exp H(x; Y). Instances built with
``diagonal=False`` observe only i < j and drop the i = j terms.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import logsumexp

from .bounds import ModelPoint, minimize_bound
from .channel import Channel, GaussianChannel
from .errors import CapacityError, DomainError
from .prior import Prior

MAX_STATES = 10**7
CHUNK = 1 << 15


@dataclass(frozen=True, eq=False)
class Instance:
    n: int
    x_star: np.ndarray
    y: np.ndarray
    channel: Channel
    seed: int | None
    diagonal: bool = True


@dataclass(frozen=True)
class OracleEstimate:
    mi_per_var: float
    stderr: float
    n: int
    num_y_samples: int
    free_energy: float
    mean_energy: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class NishimoriResult:
    lhs: float
    rhs: float
    max_abs_gap: float
    stderr: float
    num_y_samples: int


@dataclass(frozen=True)
class UniversalityResult:
    mi_channel: float
    mi_gaussian: float
    gap: float
    stderr_channel: float
    stderr_gaussian: float
    effective_delta: float

    @property
    def combined_stderr(self) -> float:
        return math.hypot(self.stderr_channel, self.stderr_gaussian)


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def _child_seeds(seed, count: int) -> list[np.random.SeedSequence]:
    seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return seq.spawn(count)


def _pairs(n: int, diagonal: bool):
    return np.triu_indices(n, k=0 if diagonal else 1)


def generate_instance(p: Prior, c: Channel, n: int, seed=None, diagonal: bool = True) -> Instance:
    """Draw x* from the prior and Y_ij ~ P_out(. | x*_i x*_j / sqrt(n)) for i <= j
    (i < j when ``diagonal`` is false; unobserved entries are left at 0)."""
    if n < 1:
        raise DomainError("n must be positive")
    rng = _rng(seed)
    x_star = p.sample(rng, size=n)
    iu, ju = _pairs(n, diagonal)
    w = x_star[iu] * x_star[ju] / math.sqrt(n)
    draws = np.asarray(c.sample(w, rng))
    y = np.zeros((n, n), dtype=draws.dtype if draws.dtype.kind in "iu" else float)
    y[iu, ju] = draws
    y[ju, iu] = draws
    return Instance(n=n, x_star=x_star, y=y, channel=c, seed=seed, diagonal=diagonal)


def _check_capacity(p: Prior, n: int) -> int:
    states = p.size**n
    if states > MAX_STATES:
        raise CapacityError(f"{p.size}^{n} = {states} states exceeds the budget {MAX_STATES}")
    return states


def _configurations(p: Prior, n: int):
    """Yield (indices, values, log_prior) for chunks of all configurations."""
    states = _check_capacity(p, n)
    k = p.size
    powers = k ** np.arange(n)
    log_w = np.log(p.weights)
    for start in range(0, states, CHUNK):
        codes = np.arange(start, min(start + CHUNK, states))
        idx = (codes[:, None] // powers) % k
        yield idx, p.values[idx], log_w[idx].sum(axis=1)


def _gaussian_energy(x: np.ndarray, y: np.ndarray, delta: float, diagonal: bool = True) -> np.ndarray:
    """H(x; Y) for a batch of configurations (rows of x)."""
    n = y.shape[0]
    x2 = x**2
    sign = 1 if diagonal else -1
    # sum_{i<=j} a_ij = (sum_{i,j} a_ij + sum_i a_ii) / 2; for i < j subtract instead
    quadratic = (x2.sum(axis=-1) ** 2 + sign * (x2**2).sum(axis=-1)) / (4 * n * delta)
    coupling = (np.einsum("...i,ij,...j->...", x, y, x) + sign * (x2 @ np.diag(y))) / (
        2 * math.sqrt(n) * delta
    )
    return coupling - quadratic


def _channel_loglik_table(p: Prior, inst: Instance):
    n = inst.n
    iu, ju = _pairs(n, inst.diagonal)
    w = np.multiply.outer(p.values, p.values) / math.sqrt(n)
    yv = inst.y[iu, ju]
    with np.errstate(divide="ignore"):
        table = np.stack(
            [[inst.channel.log_likelihood(yv, w[a, b]) for b in range(p.size)] for a in range(p.size)]
        )
    return table, iu, ju


def _log_likelihoods(p: Prior, inst: Instance, idx: np.ndarray, values: np.ndarray, table=None):
    """log P(Y | x) up to a Y-only constant for a batch of configurations."""
    if isinstance(inst.channel, GaussianChannel):
        return _gaussian_energy(values, inst.y, inst.channel.delta, inst.diagonal)
    tab, iu, ju = table
    pairs = np.arange(len(iu))
    return tab[idx[:, iu], idx[:, ju], pairs].sum(axis=1)


def _x_star_index(p: Prior, x_star: np.ndarray) -> np.ndarray:
    return np.searchsorted(p.values, x_star)


def _log_evidence(p: Prior, inst: Instance):
    """(log sum_x p(x) P(Y|x), log P(Y|x*)) with the same Y-only constant dropped."""
    table = None if isinstance(inst.channel, GaussianChannel) else _channel_loglik_table(p, inst)
    parts = []
    for idx, values, log_prior in _configurations(p, inst.n):
        parts.append(logsumexp(log_prior + _log_likelihoods(p, inst, idx, values, table)))
    star_idx = _x_star_index(p, inst.x_star)[None, :]
    at_truth = _log_likelihoods(p, inst, star_idx, inst.x_star[None, :], table)[0]
    return float(logsumexp(parts)), float(at_truth)


def log_partition(inst: Instance, p: Prior) -> float:
    """Exact log Z(Y) for a Gaussian-channel instance drawn with prior ``p``."""
    if not isinstance(inst.channel, GaussianChannel):
        raise DomainError("log_partition is defined for the Gaussian channel")
    parts = [
        logsumexp(log_prior + _gaussian_energy(values, inst.y, inst.channel.delta, inst.diagonal))
        for _, values, log_prior in _configurations(p, inst.n)
    ]
    return float(logsumexp(parts))


def _estimate(
    p: Prior, channel: Channel, n: int, num_samples: int, seed, diagonal: bool = True
) -> OracleEstimate:
    if num_samples < 2:
        raise DomainError("need at least two samples for a standard error")
    _check_capacity(p, n)
    per_sample = np.empty(num_samples)
    log_z = np.empty(num_samples)
    energy = np.empty(num_samples)
    for s, child in enumerate(_child_seeds(seed, num_samples)):
        inst = generate_instance(p, channel, n, child, diagonal)
        lz, at_truth = _log_evidence(p, inst)
        log_z[s] = lz
        energy[s] = at_truth
        per_sample[s] = (at_truth - lz) / n
    return OracleEstimate(
        mi_per_var=float(per_sample.mean()),
        stderr=float(per_sample.std(ddof=1) / math.sqrt(num_samples)),
        n=n,
        num_y_samples=num_samples,
        free_energy=float(-log_z.mean() / n),
        mean_energy=float(energy.mean() / n),
    )


def mi_monte_carlo(
    p: Prior, delta: float, n: int, num_samples: int, seed=None, diagonal: bool = True
) -> OracleEstimate:
    """Mutual information per variable of the Gaussian channel at finite n.

    Each draw contributes log P(Y|x*) - log P(Y), whose mean is exactly
    I(x; Y); P(Y) is obtained by enumeration.
    """
    return _estimate(p, GaussianChannel(delta), n, num_samples, seed, diagonal)


def mi_monte_carlo_channel(
    p: Prior, c: Channel, n: int, num_samples: int, seed=None, diagonal: bool = True
) -> OracleEstimate:
    """Same estimator with the true channel likelihood in the posterior."""
    if c.output_support is None and not isinstance(c, GaussianChannel):
        raise DomainError("continuous non-Gaussian channels are not supported")
    return _estimate(p, c, n, num_samples, seed, diagonal)


def finite_size_energy(p: Prior, delta: float, n: int, diagonal: bool = True) -> float:
    """E[H(x*; Y)] / n, the exact finite-n counterpart of E[x^2]^2 / (4 delta)."""
    e2 = p.second_moment
    e4 = float(np.dot(p.weights, p.values**4)) if diagonal else 0.0
    return ((n - 1) * e2**2 / 2 + e4) / (2 * n * delta)


def _posterior(p: Prior, inst: Instance):
    """Posterior probabilities and configuration values (small n only)."""
    table = None if isinstance(inst.channel, GaussianChannel) else _channel_loglik_table(p, inst)
    logs, xs = [], []
    for idx, values, log_prior in _configurations(p, inst.n):
        logs.append(log_prior + _log_likelihoods(p, inst, idx, values, table))
        xs.append(values)
    logs = np.concatenate(logs)
    post = np.exp(logs - logsumexp(logs))
    return post, np.concatenate(xs)


def mi_immse(
    p: Prior, delta: float, n: int, num_samples: int, seed=None, nodes: int = 12
) -> OracleEstimate:
    """Mutual information by integrating the matrix MMSE over the signal-to-noise
    ratio, I(snr) = 1/2 int_0^snr sum_{i<=j} mmse_ij(s) ds with snr = 1/delta.

    Uses only posterior means, so it is independent of the log Z route.
    """
    snr = 1.0 / delta
    t, wt = np.polynomial.legendre.leggauss(nodes)
    s_nodes = 0.5 * snr * (t + 1)
    s_weights = 0.5 * snr * wt
    iu, ju = np.triu_indices(n)
    per_sample = np.zeros(num_samples)
    children = _child_seeds(seed, num_samples)
    for s_val, s_w in zip(s_nodes, s_weights):
        channel = GaussianChannel(1.0 / s_val)
        for k, child in enumerate(children):
            inst = generate_instance(p, channel, n, child)
            post, xs = _posterior(p, inst)
            w_post = np.einsum("c,ci,cj->ij", post, xs, xs)[iu, ju] / math.sqrt(n)
            w_true = inst.x_star[iu] * inst.x_star[ju] / math.sqrt(n)
            per_sample[k] += 0.5 * s_w * np.sum((w_true - w_post) ** 2) / n
    return OracleEstimate(
        mi_per_var=float(per_sample.mean()),
        stderr=float(per_sample.std(ddof=1) / math.sqrt(num_samples)),
        n=n,
        num_y_samples=num_samples,
        free_energy=float("nan"),
        mean_energy=float("nan"),
    )


def nishimori_check(
    p: Prior,
    delta: float,
    n: int,
    f_choice: str = "per-site",
    num_y_samples: int = 1000,
    seed=None,
) -> NishimoriResult:
    """Compare E<f(x, x')> over two posterior replicas with E<f(x, x*)>.

    ``f_choice``:

    * ``"per-site"``: for every pair i <= j, <x_i x_j>^2 against
      <x_i x_j> x*_i x*_j. These entries of x x^T are what the observation
      identifies (x itself only up to a global sign).
    * ``"magnetization"``: <x_i>^2 against <x_i> x*_i; identically zero for
      sign-symmetric priors.
    * ``"overlap"``: squared overlap (x . x' / n)^2 against (x . x* / n)^2.
    * ``"constant"``: f = 1 on both sides.

    lhs and rhs are averaged over sites and draws; ``max_abs_gap`` is the
    largest per-site discrepancy and ``stderr`` that of the averaged
    difference.
    """
    if n > 8:
        raise CapacityError("the Nishimori check enumerates the posterior; use n <= 8")
    if f_choice not in ("per-site", "magnetization", "overlap", "constant"):
        raise DomainError(f"unknown f_choice {f_choice!r}")
    channel = GaussianChannel(delta)
    iu, ju = np.triu_indices(n)
    site_lhs = []
    site_rhs = []
    for child in _child_seeds(seed, num_y_samples):
        inst = generate_instance(p, channel, n, child)
        if f_choice == "constant":
            site_lhs.append(np.ones(1))
            site_rhs.append(np.ones(1))
            continue
        post, xs = _posterior(p, inst)
        xt = inst.x_star
        if f_choice == "magnetization":
            mean = post @ xs
            site_lhs.append(mean**2)
            site_rhs.append(mean * xt)
            continue
        corr = np.einsum("c,ci,cj->ij", post, xs, xs)
        if f_choice == "per-site":
            site_lhs.append(corr[iu, ju] ** 2)
            site_rhs.append(corr[iu, ju] * xt[iu] * xt[ju])
        else:
            site_lhs.append(np.array([np.sum(corr**2) / n**2]))
            site_rhs.append(np.array([xt @ corr @ xt / n**2]))
    site_lhs = np.array(site_lhs)
    site_rhs = np.array(site_rhs)
    diff = (site_lhs - site_rhs).mean(axis=1)
    stderr = float(diff.std(ddof=1) / math.sqrt(num_y_samples)) if num_y_samples > 1 else 0.0
    return NishimoriResult(
        lhs=float(site_lhs.mean()),
        rhs=float(site_rhs.mean()),
        max_abs_gap=float(np.max(np.abs(site_lhs.mean(axis=0) - site_rhs.mean(axis=0)))),
        stderr=stderr,
        num_y_samples=num_y_samples,
    )


def universality_gap(
    p: Prior, c: Channel, n: int, num_samples: int, seed=None
) -> UniversalityResult:
    """Per-variable mutual information through ``c`` versus its Gaussian
    equivalent at delta = effective_delta(c)."""
    if n > 12:
        raise CapacityError("universality comparison enumerates the posterior; use n <= 12")
    delta = c.effective_delta()
    seq = np.random.SeedSequence(seed)
    s_channel, s_gauss = seq.spawn(2)
    true_side = mi_monte_carlo_channel(p, c, n, num_samples, s_channel)
    gauss_side = mi_monte_carlo(p, delta, n, num_samples, s_gauss)
    return UniversalityResult(
        mi_channel=true_side.mi_per_var,
        mi_gaussian=gauss_side.mi_per_var,
        gap=true_side.mi_per_var - gauss_side.mi_per_var,
        stderr_channel=true_side.stderr,
        stderr_gaussian=gauss_side.stderr,
        effective_delta=delta,
    )


def bethe_minimum(p: Prior, delta: float) -> float:
    """min_m i_B(m), the value the finite-n mutual information never exceeds."""
    return minimize_bound(ModelPoint(p, delta), "bethe").value
