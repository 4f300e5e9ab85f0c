"""Scalar kernel: the log-partition J(A, B) of the scalar Gaussian denoising
problem, its posterior moments, and Gauss-Hermite expectations over N(0, 1).

For a prior p with atoms s_k and weights w_k::

    J(A, B) = log sum_k w_k exp(B s_k - A s_k^2 / 2)

and dJ/dB is the posterior mean of x given the Gaussian observation with
precision A and natural parameter B. All functions broadcast over A and B.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

from .errors import EvaluationError
from .prior import Prior

DEFAULT_ORDER = 61


@dataclass(frozen=True, eq=False)
class Quadrature:
    """Nodes and weights with sum(weights * f(nodes)) ~ E[f(z)], z ~ N(0, 1)."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int


@lru_cache(maxsize=None)
def gauss_hermite(order: int = DEFAULT_ORDER) -> Quadrature:
    """Probabilists' Gauss-Hermite rule normalized to the standard normal."""
    if order < 1:
        raise ValueError("quadrature order must be positive")
    nodes, weights = np.polynomial.hermite_e.hermegauss(order)
    weights = weights / weights.sum()
    # symmetrize away the last-ulp asymmetry of the eigenvalue solver
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return Quadrature(nodes=nodes, weights=weights, order=order)


def _exponents(p: Prior, A, B):
    A = np.asarray(A, dtype=float)[..., None]
    B = np.asarray(B, dtype=float)[..., None]
    s = p.values
    return B * s - 0.5 * A * s**2


def j_func(p: Prior, A, B):
    """log E_p[exp(B x - A x^2 / 2)], stable for large |B x|."""
    out = logsumexp(_exponents(p, A, B), b=p.weights, axis=-1)
    return out if np.ndim(out) else float(out)


def _posterior_weights(p: Prior, A, B):
    e = _exponents(p, A, B) + np.log(p.weights)
    e -= e.max(axis=-1, keepdims=True)
    w = np.exp(e)
    return w / w.sum(axis=-1, keepdims=True)


def denoiser(p: Prior, A, B):
    """Posterior mean of x; equals dJ/dB."""
    out = _posterior_weights(p, A, B) @ p.values
    return out if np.ndim(out) else float(out)


def posterior_variance(p: Prior, A, B):
    """Posterior variance of x; equals d^2 J / dB^2 and d(denoiser)/dB."""
    post = _posterior_weights(p, A, B)
    mean = post @ p.values
    out = np.maximum(post @ p.values**2 - mean**2, 0.0)
    return out if np.ndim(out) else float(out)


def gauss_expect(f, q: Quadrature | None = None) -> float:
    """E[f(z)] for z ~ N(0, 1) by quadrature.

    ``f`` is called once on the full node array and must return one value per
    node.
    """
    q = gauss_hermite() if q is None else q
    values = np.asarray(f(q.nodes), dtype=float)
    if values.shape != q.nodes.shape:
        values = np.broadcast_to(values, q.nodes.shape)
    bad = ~np.isfinite(values)
    if bad.any():
        node = float(q.nodes[np.argmax(bad)])
        raise EvaluationError(f"integrand is not finite at node z={node!r}")
    return float(np.dot(q.weights, values))


def expect_over_prior_and_noise(p: Prior, fn, q: Quadrature | None = None):
    """E_{x*, z}[fn(x*, z)] with x* ~ p and z ~ N(0, 1).

    ``fn`` receives x* as a scalar and z as the node array and may return an
    array of shape ``batch + (order,)``; the result has shape ``batch``.
    """
    q = gauss_hermite() if q is None else q
    total = 0.0
    for x_star, w in zip(p.values, p.weights):
        total = total + w * (np.asarray(fn(x_star, q.nodes)) @ q.weights)
    return total
