"""Composite Gauss-Legendre quadrature with node doubling.

The integrands used in this package are piecewise smooth with known break
points, so a fixed-order panel rule refined by doubling the panel count is
enough. Panels never touch their end points, which keeps the 0/0 points of
the closed-form eigenvectors (and the inverse square-root edges of the limit
density) out of the evaluation set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

PANEL_ORDER = 16

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(PANEL_ORDER)


class NonConvergenceError(RuntimeError):
    """Raised when node doubling cannot reach the requested tolerance."""


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error: float
    nodes: int


def _panel_sum(func: Callable[[np.ndarray], np.ndarray], a: float, b: float, panels: int) -> float:
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = (mid[:, None] + half[:, None] * _NODES[None, :]).ravel()
    w = (half[:, None] * _WEIGHTS[None, :]).ravel()
    y = np.asarray(func(x), dtype=float)
    # fixed summation order: panel by panel, left to right
    return float(np.sum(np.sum((w * y).reshape(panels, PANEL_ORDER), axis=1)))


def gauss_legendre(
    func: Callable[[np.ndarray], np.ndarray],
    breakpoints: Sequence[float],
    nodes: int,
) -> float:
    """Integrate ``func`` over consecutive ``breakpoints`` with ``nodes`` per piece.

    ``func`` must accept and return 1-D arrays. ``nodes`` is rounded up to a
    multiple of the panel order.
    """
    panels = max(1, -(-nodes // PANEL_ORDER))
    total = 0.0
    for a, b in zip(breakpoints[:-1], breakpoints[1:]):
        if b > a:
            total += _panel_sum(func, float(a), float(b), panels)
    return total


def integrate(
    func: Callable[[np.ndarray], np.ndarray],
    breakpoints: Sequence[float],
    nodes: int = 512,
    max_nodes: int = 8192,
    tol: float = 1e-8,
    fail_tol: float | None = 1e-6,
) -> QuadratureResult:
    """Integrate with node doubling until two successive runs agree within ``tol``.

    The error estimate is the difference to the run with half as many nodes.
    If the estimate is still above ``fail_tol`` at ``max_nodes`` a
    :class:`NonConvergenceError` is raised; pass ``fail_tol=None`` to always
    return the last result instead.
    """
    if nodes < 2 * PANEL_ORDER:
        raise ValueError(f"need at least {2 * PANEL_ORDER} nodes, got {nodes}")
    previous = gauss_legendre(func, breakpoints, nodes // 2)
    while True:
        value = gauss_legendre(func, breakpoints, nodes)
        error = abs(value - previous)
        if error < tol or nodes >= max_nodes:
            break
        previous = value
        nodes *= 2
    if fail_tol is not None and error > fail_tol:
        raise NonConvergenceError(
            f"quadrature did not converge: estimate {error:.3e} at {nodes} nodes"
        )
    return QuadratureResult(value=value, error=error, nodes=nodes)
