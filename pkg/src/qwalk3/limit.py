"""Closed-form limit law of ``X_t / t``: an atom at 0 plus a continuous density.

The continuous part is

    nu(a, b, g; x) f(x) 1[x in D1] + nu(g, b, a; -x) f(-x) 1[x in D2]

with ``D1 = (-(1+2c)/3, sqrt(5+4c)/3)`` and ``D2 = -D1``. For ``c < -1/2`` the
two pieces are disjoint and leave a gap around the origin; otherwise they
overlap and both terms contribute on the overlap.

``f`` has integrable inverse square-root singularities at both ends of
``D1``. Integrals over a piece use the substitution
``x = a + (b - a)(1 - cos u)/2`` which removes them, followed by composite
Gauss-Legendre in ``u``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .quadrature import QuadratureResult, integrate
from .spectral import delta_mass
from .walk import CoinParameters, InitialState

__all__ = [
    "EndpointSingularityError",
    "SupportIntervals",
    "LimitDensityModel",
    "support_intervals",
    "density_f",
    "nu_weight",
    "limit_density",
    "approximate_prob",
]

ENDPOINT_EPS = 1e-9
MASS_TOL = 1e-6


class EndpointSingularityError(ValueError):
    """Evaluation requested within ``ENDPOINT_EPS`` of a support end point."""


@dataclass(frozen=True)
class SupportIntervals:
    inner: float  # -(1+2c)/3, the left end of D1
    outer: float  # sqrt(5+4c)/3, the right end of D1

    @property
    def d1(self) -> tuple[float, float]:
        return (self.inner, self.outer)

    @property
    def d2(self) -> tuple[float, float]:
        return (-self.outer, -self.inner)

    @property
    def has_gap(self) -> bool:
        return self.inner > 0.0

    def in_d1(self, x: ArrayLike) -> NDArray[np.bool_]:
        x = np.asarray(x, dtype=float)
        return (self.inner < x) & (x < self.outer)

    def in_d2(self, x: ArrayLike) -> NDArray[np.bool_]:
        return self.in_d1(-np.asarray(x, dtype=float))

    def endpoints(self) -> tuple[float, ...]:
        return (self.inner, self.outer, -self.inner, -self.outer)


def support_intervals(params: CoinParameters) -> SupportIntervals:
    c = params.c
    return SupportIntervals(inner=-(1 + 2 * c) / 3, outer=math.sqrt(5 + 4 * c) / 3)


def _sqrt_disc(x: NDArray[np.float64], c: float) -> NDArray[np.float64]:
    d = (1 - c) * (2 * (5 + 4 * c) - 9 * (1 + c) * x * x)
    # roundoff near the support ends
    return np.sqrt(np.where((d < 0) & (d > -1e-12), 0.0, d))


def _f_raw(x: NDArray[np.float64], params: CoinParameters) -> NDArray[np.float64]:
    c = params.c
    sd = _sqrt_disc(x, c)
    w_plus = 1 + 2 * c - 3 * c * x * x + x * sd
    w_minus = 5 + 4 * c - 3 * (2 + c) * x * x - x * sd
    num = (1 - c) * (5 + 4 * c - (4 + 5 * c) * x * x + x * sd)
    den = math.pi * (5 + 4 * c) ** 2 * (1 - x * x) * np.sqrt(w_plus * w_minus) * sd
    return num / den


def _nu_raw(a: complex, b: complex, g: complex, x: NDArray[np.float64], params: CoinParameters) -> NDArray[np.float64]:
    c, s = params.c, params.s
    sd = _sqrt_disc(x, c)
    xi_p = (2 * (5 + 4 * c) + 9 * (1 + c) * x + sd) / (2 * math.sqrt(2))
    xi_m = (-2 * (5 + 4 * c) + 9 * (1 + c) * x + sd) / (2 * math.sqrt(2))
    chi1 = 3 * (s * s * x - (1 + c) * sd) / (2 * s)
    chi2 = (3 * (1 - c) * (4 + 3 * c) * x - (2 + c) * sd) / s
    return (
        xi_m**2 * abs(a) ** 2
        + chi1**2 * abs(b) ** 2
        + xi_p**2 * abs(g) ** 2
        - xi_m * chi2 * (a * b.conjugate()).real
        - xi_p * chi2 * (b * g.conjugate()).real
        + (chi1**2 - chi2**2 / 2) * (g * a.conjugate()).real
    )


def _check_endpoints(x: NDArray[np.float64], sup: SupportIntervals) -> None:
    near = np.zeros(x.shape, dtype=bool)
    for e in sup.endpoints():
        near |= np.abs(x - e) < ENDPOINT_EPS
    if np.any(near):
        raise EndpointSingularityError("endpoint singularity: x lies within 1e-9 of a support end point")


def density_f(x: ArrayLike, params: CoinParameters) -> NDArray[np.float64] | float:
    """The factor ``f(x)`` on ``D1``; zero outside ``D1``."""
    xx = np.asarray(x, dtype=float)
    sup = support_intervals(params)
    _check_endpoints(xx, sup)
    inside = sup.in_d1(xx)
    out = np.zeros(xx.shape)
    if np.any(inside):
        out[inside] = _f_raw(xx[inside], params)
    return out if out.ndim else float(out)


def nu_weight(a: complex, b: complex, g: complex, x: ArrayLike, params: CoinParameters) -> NDArray[np.float64] | float:
    """Initial-state weight multiplying ``f(x)`` on ``D1``."""
    xx = np.asarray(x, dtype=float)
    out = _nu_raw(complex(a), complex(b), complex(g), xx, params)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class LimitDensityModel:
    """Atom of mass ``delta_mass`` at 0 plus the continuous density.

    Construction computes ``delta_mass`` from the flat band (unless given) and
    checks that the atom and the continuous mass add up to one.
    """

    params: CoinParameters
    init: InitialState
    delta_mass: float | None = None
    continuous_mass: float = field(init=False)
    delta_error: float = field(init=False, default=0.0)

    def __post_init__(self) -> None:
        if self.params.c >= 1.0:
            raise ValueError("support touches |x| = 1 only for c = 1, which is excluded")
        if self.delta_mass is None:
            dq = delta_mass(self.init, self.params)
            object.__setattr__(self, "delta_mass", dq.value)
            object.__setattr__(self, "delta_error", dq.error)
        cont = self.integrate_continuous(lambda x: np.ones_like(x)).value
        object.__setattr__(self, "continuous_mass", cont)
        if not 0.0 < self.delta_mass <= 1.0:
            raise ValueError(f"atom mass {self.delta_mass!r} outside (0, 1]")
        if abs(self.delta_mass + cont - 1.0) > MASS_TOL:
            raise ValueError(f"atom {self.delta_mass:.9f} + continuous {cont:.9f} does not sum to 1")

    @property
    def support(self) -> SupportIntervals:
        return support_intervals(self.params)

    def _d1_term(self, x: NDArray[np.float64]) -> NDArray[np.float64]:
        i = self.init
        return _nu_raw(i.alpha, i.beta, i.gamma, x, self.params) * _f_raw(x, self.params)

    def _d2_term(self, x: NDArray[np.float64]) -> NDArray[np.float64]:
        i = self.init
        return _nu_raw(i.gamma, i.beta, i.alpha, -x, self.params) * _f_raw(-x, self.params)

    def continuous(self, x: ArrayLike) -> NDArray[np.float64]:
        """Continuous density without the end point guard (NaN-free inside the supports)."""
        xx = np.asarray(x, dtype=float)
        sup = self.support
        out = np.zeros(xx.shape)
        m1, m2 = sup.in_d1(xx), sup.in_d2(xx)
        if np.any(m1):
            out[m1] += self._d1_term(xx[m1])
        if np.any(m2):
            out[m2] += self._d2_term(xx[m2])
        return out

    def integrate_continuous(
        self, weight: Callable[[NDArray[np.float64]], NDArray[np.float64]], tol: float = 1e-12
    ) -> QuadratureResult:
        """``int weight(x) * continuous(x) dx`` over both support pieces."""
        sup = self.support
        total = 0.0
        error = 0.0
        nodes = 0
        for (a, b), term in ((sup.d1, self._d1_term), (sup.d2, self._d2_term)):
            half = 0.5 * (b - a)

            def integrand(u: NDArray[np.float64], a=a, half=half, term=term) -> NDArray[np.float64]:
                x = a + half * (1.0 - np.cos(u))
                return term(x) * weight(x) * half * np.sin(u)

            res = integrate(integrand, [0.0, math.pi], nodes=64, max_nodes=8192, tol=tol)
            total += res.value
            error += res.error
            nodes = max(nodes, res.nodes)
        return QuadratureResult(value=total, error=error, nodes=nodes)

    def continuous_moment(self, r: int) -> float:
        return self.integrate_continuous(lambda x: x**r).value


def limit_density(x: ArrayLike, model: LimitDensityModel) -> NDArray[np.float64] | float:
    """Continuous part of the limit density at ``x != 0``."""
    xx = np.asarray(x, dtype=float)
    if np.any(xx == 0.0):
        raise ValueError("x = 0 carries the atom; evaluate the continuous part elsewhere")
    _check_endpoints(xx, model.support)
    out = model.continuous(xx)
    return out if out.ndim else float(out)


def approximate_prob(x: ArrayLike, t: int, model: LimitDensityModel) -> NDArray[np.float64] | float:
    """Large-``t`` approximation of ``P(X_t = x)`` for integer ``x != 0``.

    Positions that land within ``ENDPOINT_EPS`` of a support end (in units of
    ``x/t``) are reported as 0 rather than raising.
    """
    if t < 1:
        raise ValueError(f"t must be positive, got {t}")
    xx = np.asarray(x, dtype=float)
    if np.any(xx == 0.0):
        raise ValueError("x = 0 carries the atom; the approximation holds for x != 0")
    u = xx / t
    near = np.zeros(u.shape, dtype=bool)
    for e in model.support.endpoints():
        near |= np.abs(u - e) < ENDPOINT_EPS
    out = np.where(near, 0.0, model.continuous(np.where(near, 2.0, u))) / t
    return out if out.ndim else float(out)
