"""Position distributions, moments and gap diagnostics of a walk state."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .walk import CoinParameters, WalkState

__all__ = [
    "ProbabilityDistribution",
    "GapReport",
    "distribution",
    "moment",
    "gap_mass",
    "default_peak_cutoff",
    "windowed_average",
]


@dataclass(frozen=True, eq=False)
class ProbabilityDistribution:
    """P(X_t = x) on a contiguous range of positions starting at ``x0``.

    Zero entries are kept in the array; :meth:`as_dict` drops them.
    """

    time: int
    x0: int
    probs: NDArray[np.float64]

    @property
    def positions(self) -> NDArray[np.int64]:
        return np.arange(self.probs.size, dtype=np.int64) + self.x0

    def __getitem__(self, x: int) -> float:
        i = x - self.x0
        if 0 <= i < self.probs.size:
            return float(self.probs[i])
        return 0.0

    def total(self) -> float:
        return math.fsum(self.probs)

    def as_dict(self) -> dict[int, float]:
        return {int(x): float(p) for x, p in zip(self.positions, self.probs) if p != 0.0}


@dataclass(frozen=True)
class GapReport:
    """Probability found in the rescaled window ``(a, b)`` away from the peak."""

    window: tuple[float, float]
    mass: float
    x_min: int
    edge_margin: float = 0.0


def distribution(state: WalkState) -> ProbabilityDistribution:
    probs = np.sum(state.amplitudes.real**2 + state.amplitudes.imag**2, axis=1)
    nz = np.flatnonzero(probs)
    if nz.size == 0:
        raise ValueError("state has zero norm")
    lo, hi = nz[0], nz[-1] + 1
    probs = np.ascontiguousarray(probs[lo:hi])
    probs.setflags(write=False)
    return ProbabilityDistribution(time=state.time, x0=int(lo - state.offset), probs=probs)


def moment(dist: ProbabilityDistribution, r: int, rescaled: bool = False) -> float:
    """Return ``sum_x x**r p(x)``, or of ``(x/t)**r`` when ``rescaled``.

    At ``t == 0`` the rescaled moment is taken as ``0**r`` (the walker sits at
    the origin), i.e. 1 for ``r == 0`` and 0 otherwise.
    """
    if r < 0:
        raise ValueError(f"moment order must be nonnegative, got {r}")
    if rescaled and dist.time == 0:
        return 1.0 if r == 0 else 0.0
    if r == 0:
        return dist.total()
    x = dist.positions.astype(float)
    if rescaled:
        x = x / dist.time
    # np.sum reduces pairwise
    return float(np.sum(x**r * dist.probs))


def default_peak_cutoff(t: int) -> int:
    """Cutoff ``ceil(t**0.6)`` that keeps the localized peak out of gap sums."""
    return int(math.ceil(t**0.6))


def gap_mass(
    dist: ProbabilityDistribution,
    params: CoinParameters,
    x_min: int | None = None,
    edge_margin: float = 0.0,
) -> GapReport:
    """Probability inside the gap window ``|x|/t < -(1+2c)/3`` with ``|x| >= x_min``.

    For ``c >= -1/2`` the window is empty and the reported mass is 0.

    The limit density blows up at the gap edges, so at finite ``t`` the
    ballistic peak leaks a tail of width ``o(t)`` into the window.
    ``edge_margin`` shrinks the window to ``(1 - edge_margin)`` of its width
    to measure the interior only.
    """
    if not 0.0 <= edge_margin < 1.0:
        raise ValueError(f"edge_margin must lie in [0, 1), got {edge_margin}")
    if dist.time < 1:
        raise ValueError("gap mass needs t >= 1")
    if x_min is None:
        x_min = default_peak_cutoff(dist.time)
    if dist.time < 3 * x_min:
        raise ValueError(f"gap mass needs t >= 3*x_min (t={dist.time}, x_min={x_min})")
    edge = -(1.0 + 2.0 * params.c) / 3.0 * (1.0 - edge_margin)
    if edge <= 0.0:
        return GapReport(window=(0.0, 0.0), mass=0.0, x_min=x_min, edge_margin=edge_margin)
    ax = np.abs(dist.positions)
    sel = (ax >= x_min) & (ax / dist.time < edge)
    return GapReport(window=(-edge, edge), mass=float(np.sum(dist.probs[sel])), x_min=x_min, edge_margin=edge_margin)


def windowed_average(values: NDArray[np.float64], width: int = 11) -> NDArray[np.float64]:
    """Centered moving average; entries closer than ``width//2`` to either end are NaN."""
    if width < 1 or width % 2 == 0:
        raise ValueError(f"window width must be a positive odd integer, got {width}")
    values = np.asarray(values, dtype=float)
    out = np.full(values.shape, np.nan)
    half = width // 2
    if values.size >= width:
        csum = np.concatenate(([0.0], np.cumsum(values)))
        out[half : values.size - half] = (csum[width:] - csum[:-width]) / width
    return out
