"""Finite-support priors p(x) for the entries of the hidden vector.

A :class:`Prior` is an immutable list of atoms ``(value, weight)``. Duplicate
values are merged and zero-weight atoms are dropped, so two priors describing
the same law compare equal.
"""

from __future__ import annotations

import json
import math
from typing import Iterable

import numpy as np

from .errors import DomainError

WEIGHT_TOL = 1e-12


class Prior:
    """Discrete distribution over a finite set of real atoms.

    Parameters
    ----------
    atoms:
        Iterable of ``(value, weight)`` pairs. Weights must be nonnegative and
        sum to one within ``1e-12``.
    """

    __slots__ = ("_values", "_weights", "_second_moment", "_support_bound")

    def __init__(self, atoms: Iterable[tuple[float, float]]):
        pairs = [(float(v), float(w)) for v, w in atoms]
        if not pairs:
            raise DomainError("a prior needs at least one atom")
        for v, w in pairs:
            if not math.isfinite(v) or not math.isfinite(w):
                raise DomainError(f"non-finite atom ({v}, {w})")
            if w < 0:
                raise DomainError(f"negative weight {w} for atom {v}")
        total = math.fsum(w for _, w in pairs)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise DomainError(f"weights sum to {total!r}, expected 1")

        merged: dict[float, float] = {}
        for v, w in pairs:
            merged[v] = merged.get(v, 0.0) + w
        kept = sorted((v, w) for v, w in merged.items() if w > 0.0)
        if not kept:
            raise DomainError("all atoms have zero weight")

        values = np.array([v for v, _ in kept])
        weights = np.array([w for _, w in kept])
        weights /= weights.sum()
        values.setflags(write=False)
        weights.setflags(write=False)
        self._values = values
        self._weights = weights
        self._second_moment = float(np.dot(weights, values**2))
        self._support_bound = float(np.max(np.abs(values)))

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return [(float(v), float(w)) for v, w in zip(self._values, self._weights)]

    @property
    def second_moment(self) -> float:
        """E[x^2] under the prior."""
        return self._second_moment

    @property
    def support_bound(self) -> float:
        """max |x| over the support."""
        return self._support_bound

    @property
    def size(self) -> int:
        return len(self._values)

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        """True when the law is invariant under x -> -x."""
        flipped = sorted(zip(-self._values, self._weights))
        return all(
            abs(a - c) <= tol and abs(b - d) <= tol
            for (a, b), (c, d) in zip(flipped, zip(self._values, self._weights))
        )

    def sample(self, rng: np.random.Generator, size=None) -> np.ndarray:
        return rng.choice(self._values, p=self._weights, size=size)

    def to_dict(self) -> dict:
        return {"atoms": [[v, w] for v, w in self.atoms]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "Prior":
        try:
            atoms = data["atoms"]
        except (KeyError, TypeError) as exc:
            raise DomainError("prior description needs an 'atoms' list") from exc
        return cls((v, w) for v, w in atoms)

    @classmethod
    def from_json(cls, text: str) -> "Prior":
        return cls.from_dict(json.loads(text))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Prior):
            return NotImplemented
        return np.array_equal(self._values, other._values) and np.array_equal(
            self._weights, other._weights
        )

    def __hash__(self) -> int:
        return hash((self._values.tobytes(), self._weights.tobytes()))

    def __repr__(self) -> str:
        inner = ", ".join(f"({v:g}, {w:g})" for v, w in self.atoms)
        return f"Prior([{inner}])"


def make_sparse_rademacher(rho: float) -> Prior:
    """x = 0, +1, -1 with probabilities 1 - rho, rho/2, rho/2."""
    rho = float(rho)
    if not (0.0 < rho <= 1.0):
        raise DomainError(f"density rho must lie in (0, 1], got {rho}")
    if rho == 1.0:
        return Prior([(1.0, 0.5), (-1.0, 0.5)])
    return Prior([(0.0, 1.0 - rho), (1.0, rho / 2), (-1.0, rho / 2)])


def moment(p: Prior, k: int) -> float:
    """Raw moment E[x^k]."""
    if k < 0 or int(k) != k:
        raise DomainError(f"moment order must be a nonnegative integer, got {k}")
    return float(np.dot(p.weights, p.values ** int(k)))
