"""Phase diagram of the sparse Rademacher family.

Three noise thresholds are located for each density rho:

* ``delta_algo``: below it the trivial fixed point m = 0 of state evolution
  is unstable, so message passing (and spectral methods) reach a nontrivial
  overlap.
* ``delta_detect``: below it the global minimizer of i_B is nonzero.
* ``delta_match``: above it the upper and lower bounds coincide.

``rho_star`` is the density below which delta_detect separates from
delta_algo, opening a computationally hard region.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .bounds import ModelPoint, evaluate_point, minimize_bound, spectral_threshold
from .errors import BracketingError, DomainError
from .prior import make_sparse_rademacher
from .scalar import DEFAULT_ORDER

DELTA_BRACKET = (1e-3, 4.0)
RHO_BRACKET = (0.01, 0.5)
M_THRESHOLD = 1e-6
DEFAULT_RHO_GRID = tuple(round(0.02 * k, 10) for k in range(1, 51))
RHO_STAR_DETECT_TOL = 1e-6
MIN_TOL = 1e-6

EASY, HARD, TRIVIAL = "easy", "hard", "impossible-trivial"


class Threshold(NamedTuple):
    value: float
    bracket_width: float
    match_everywhere: bool = False


@dataclass(frozen=True)
class ThresholdSet:
    rho: float
    delta_algo: float
    delta_detect: float
    delta_match: float
    bracket_width: float
    match_everywhere: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class PhaseDiagram:
    rows: list[ThresholdSet]
    rho_star: float
    delta_grid: list[float] = field(default_factory=list)
    labels: list[list[str]] = field(default_factory=list)

    def check_invariants(self) -> list[str]:
        """Human-readable descriptions of every violated ordering."""
        problems = []
        for row in self.rows:
            bw = row.bracket_width
            if row.rho > self.rho_star and abs(row.delta_detect - row.delta_algo) > 2 * bw:
                problems.append(f"rho={row.rho}: detect {row.delta_detect} != algo {row.delta_algo}")
            if row.rho < self.rho_star and not (
                row.delta_algo < row.delta_detect < row.delta_match
            ):
                problems.append(f"rho={row.rho}: ordering algo < detect < match broken")
        return problems


def _check_rho(rho: float) -> float:
    rho = float(rho)
    if not (0.0 < rho <= 1.0):
        raise DomainError(f"rho must lie in (0, 1], got {rho}")
    return rho


def delta_algo(rho: float) -> float:
    """Algorithmic threshold (E[x^2])^2 = rho^2 of the sparse Rademacher prior."""
    return spectral_threshold(make_sparse_rademacher(_check_rho(rho)))


def _lower_edge(rho: float) -> float:
    # the nontrivial phase always extends below delta_algo, which is tiny at small rho
    return min(DELTA_BRACKET[0], 0.5 * delta_algo(rho))


def bisect_predicate(
    predicate: Callable[[float], bool], lo: float, hi: float, tol: float
) -> Threshold:
    """Shrink [lo, hi] with predicate(lo) true and predicate(hi) false."""
    at_lo, at_hi = predicate(lo), predicate(hi)
    if at_lo == at_hi:
        raise BracketingError(f"predicate is {at_lo} at both ends of [{lo}, {hi}]")
    if not at_lo:
        raise BracketingError(f"predicate must hold at the lower edge {lo}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if predicate(mid):
            lo = mid
        else:
            hi = mid
    return Threshold(value=0.5 * (lo + hi), bracket_width=hi - lo)


def _detects(rho: float, delta: float, order: int) -> bool:
    mp = ModelPoint(make_sparse_rademacher(rho), delta, order)
    return minimize_bound(mp, "bethe").m_star > M_THRESHOLD


def _mismatch(rho: float, delta: float, order: int) -> bool:
    mp = ModelPoint(make_sparse_rademacher(rho), delta, order)
    return not evaluate_point(mp).bounds_match


def find_delta_detect(rho: float, tol: float = 1e-3, order: int = DEFAULT_ORDER) -> Threshold:
    """Largest delta at which the global minimizer of i_B is nonzero."""
    rho = _check_rho(rho)
    if tol < MIN_TOL:
        raise DomainError(f"tol must be at least {MIN_TOL}")
    return bisect_predicate(
        lambda d: _detects(rho, d, order), _lower_edge(rho), DELTA_BRACKET[1], tol
    )


def find_delta_match(rho: float, tol: float = 1e-3, order: int = DEFAULT_ORDER) -> Threshold:
    """Smallest delta above which the two bounds coincide.

    When they coincide over the whole bracket the lower edge is returned with
    ``match_everywhere`` set.
    """
    rho = _check_rho(rho)
    if tol < MIN_TOL:
        raise DomainError(f"tol must be at least {MIN_TOL}")
    lo, hi = _lower_edge(rho), DELTA_BRACKET[1]
    if _mismatch(rho, hi, order):
        raise BracketingError(f"bounds differ at the upper edge delta={hi}")
    if not _mismatch(rho, lo, order):
        return Threshold(value=lo, bracket_width=0.0, match_everywhere=True)
    return bisect_predicate(lambda d: _mismatch(rho, d, order), lo, hi, tol)


def is_hard(rho: float, detect_tol: float = RHO_STAR_DETECT_TOL, order: int = DEFAULT_ORDER) -> bool:
    """True when delta_detect exceeds delta_algo by more than two bracket widths."""
    detect = find_delta_detect(rho, detect_tol, order)
    return detect.value > delta_algo(rho) + 2 * detect.bracket_width


def find_rho_star(
    tol: float = 1e-3,
    order: int = DEFAULT_ORDER,
    detect_tol: float = RHO_STAR_DETECT_TOL,
) -> Threshold:
    """Density below which a hard phase delta_algo < delta < delta_detect opens."""
    if tol < 1e-4:
        raise DomainError("tol must be at least 1e-4")
    lo, hi = RHO_BRACKET
    return bisect_predicate(lambda r: is_hard(r, detect_tol, order), lo, hi, tol)


def threshold_set(rho: float, tol: float = 1e-3, order: int = DEFAULT_ORDER) -> ThresholdSet:
    detect = find_delta_detect(rho, tol, order)
    match = find_delta_match(rho, tol, order)
    return ThresholdSet(
        rho=float(rho),
        delta_algo=delta_algo(rho),
        delta_detect=detect.value,
        delta_match=match.value,
        bracket_width=max(detect.bracket_width, match.bracket_width),
        match_everywhere=match.match_everywhere,
    )


def regime(row: ThresholdSet, delta: float) -> str:
    if delta < row.delta_algo:
        return EASY
    if delta < row.delta_detect:
        return HARD
    return TRIVIAL


def _parallel_map(fn, items: Sequence, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def row_tolerance(rho: float, tol: float = 1e-3, rel_tol: float = 1e-3) -> float:
    """Bisection width for one row: thresholds scale like rho^2, so small
    densities need a proportionally finer bracket."""
    return max(MIN_TOL, min(tol, rel_tol * delta_algo(rho)))


class _ThresholdJob(NamedTuple):
    tol: float
    rel_tol: float
    order: int

    def __call__(self, rho):
        return threshold_set(rho, row_tolerance(rho, self.tol, self.rel_tol), self.order)


def phase_diagram(
    rho_grid: Sequence[float] = DEFAULT_RHO_GRID,
    tol: float = 1e-3,
    order: int = DEFAULT_ORDER,
    delta_grid: Sequence[float] | None = None,
    rel_tol: float = 1e-3,
    rho_star_tol: float = 1e-3,
    threads: int = 1,
) -> PhaseDiagram:
    """Thresholds for every rho of the grid plus rho_star and regime labels.

    Each row is bisected to ``row_tolerance(rho, tol, rel_tol)``.
    """
    rhos = sorted(float(r) for r in rho_grid)
    rows = _parallel_map(_ThresholdJob(tol, rel_tol, order), rhos, threads)
    rho_star = find_rho_star(rho_star_tol, order).value
    deltas = [] if delta_grid is None else [float(d) for d in delta_grid]
    labels = [[regime(row, d) for d in deltas] for row in rows]
    return PhaseDiagram(rows=rows, rho_star=rho_star, delta_grid=deltas, labels=labels)


class _PointJob(NamedTuple):
    rho: float
    order: int

    def __call__(self, delta):
        return evaluate_point(ModelPoint(make_sparse_rademacher(self.rho), delta, self.order))


def figure_curve(
    rho: float,
    delta_grid: Sequence[float],
    order: int = DEFAULT_ORDER,
    threads: int = 1,
) -> dict[str, np.ndarray]:
    """Upper and lower bound curves versus delta, column-wise."""
    rho = _check_rho(rho)
    deltas = [float(d) for d in delta_grid]
    if any(b < a for a, b in zip(deltas, deltas[1:])):
        raise DomainError("delta grid must be sorted ascending")
    results = _parallel_map(_PointJob(rho, order), deltas, threads)
    return {
        "delta": np.array(deltas),
        "i_b_min": np.array([r.i_b_min for r in results]),
        "i_l_min": np.array([r.i_l_min for r in results]),
        "m_hat": np.array([r.m_hat for r in results]),
        "m_tilde": np.array([r.m_tilde for r in results]),
        "bounds_match": np.array([r.bounds_match for r in results]),
    }
