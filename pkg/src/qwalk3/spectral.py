"""Momentum-space picture of the walk.

Under the transform ``Psi_hat(k) = sum_x exp(-i k x) psi(x)`` one period of
three steps (coin+shift, coin+shift, shift) becomes multiplication by the
3x3 unitary ``M(k) = S(k) (S(k) C)^2`` with ``S(k) = diag(e^{ik}, 1, e^{-ik})``.
``M(k)`` has the flat eigenvalue 1 for every ``k``; the other two are
``g(k) -/+ i sqrt(1 - g(k)^2)``. The flat band is what localizes the walker,
and the two dispersive bands carry the ballistic part with group velocities
``h_j(k) = i lambda_j'(k) / (3 lambda_j(k))``.

Eigenvectors and velocities are evaluated from their closed forms. Numerical
eigensolvers are only used as an independent check in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .quadrature import QuadratureResult, integrate
from .walk import CoinParameters, InitialState, WalkState, build_coin

__all__ = [
    "DegenerateMomentError",
    "SpectralPoint",
    "DeltaQuadrature",
    "RankReport",
    "shift_symbol",
    "period_operator",
    "period_operator_closed_form",
    "dispersion_g",
    "eigenvalues",
    "eigenvector_v",
    "group_velocity",
    "velocity_breakpoints",
    "velocity_grid",
    "spectral_point",
    "overlaps",
    "delta_mass",
    "moment_limit",
    "delocalization_matrix",
    "delocalization_rank_check",
    "fourier_evolve",
]

SQRT2 = math.sqrt(2.0)

# Sign attached to sqrt(1-g^2) in lambda_j and to the velocity of branch j:
# (-1)**j. Checked against the finite-difference phase derivative of the
# numerically computed eigenvalue at theta=5*pi/6, k=1.
BRANCH_SIGN = {2: -1.0, 3: 1.0}

_NORM_FLOOR = 1e-20
_SIGN_FLOOR = 1e-14


class DegenerateMomentError(ValueError):
    """The closed form is 0/0 or the sign factor vanishes at this momentum."""


def shift_symbol(k: float) -> NDArray[np.complex128]:
    return np.diag([np.exp(1j * k), 1.0, np.exp(-1j * k)])


def period_operator(k: float, params: CoinParameters) -> NDArray[np.complex128]:
    """``S(k) (S(k) C)^2`` by direct multiplication."""
    s_k = shift_symbol(k)
    c_hat = s_k @ build_coin(params)
    return s_k @ c_hat @ c_hat


def period_operator_closed_form(k: float, params: CoinParameters) -> NDArray[np.complex128]:
    """Entry-by-entry expansion of the period operator in powers of ``e^{ik}``."""
    c, s = params.c, params.s
    e1, e2, e3 = np.exp(1j * k), np.exp(2j * k), np.exp(3j * k)
    q = 2.0 * SQRT2
    return np.array(
        [
            [
                (1 + c) ** 2 * e3 / 4 + s * s * e2 / 2 + (1 - c) ** 2 * e1 / 4,
                -(1 + c) * s * e3 / q + c * s * e2 / SQRT2 + (1 - c) * s * e1 / q,
                -s * s * e3 / 4 + s * s * e2 / 2 - s * s * e1 / 4,
            ],
            [
                -(1 + c) * s * e1 / q + c * s / SQRT2 + (1 - c) * s / (q * e1),
                s * s * e1 / 2 + c * c + s * s / (2 * e1),
                (1 - c) * s * e1 / q + c * s / SQRT2 - (1 + c) * s / (q * e1),
            ],
            [
                -s * s / (4 * e3) + s * s / (2 * e2) - s * s / (4 * e1),
                -(1 + c) * s / (q * e3) + c * s / (SQRT2 * e2) + (1 - c) * s / (q * e1),
                (1 + c) ** 2 / (4 * e3) + s * s / (2 * e2) + (1 - c) ** 2 / (4 * e1),
            ],
        ]
    )


def dispersion_g(k: ArrayLike, params: CoinParameters) -> NDArray[np.float64] | float:
    """Real part shared by the two dispersive eigenvalues."""
    c, s = params.c, params.s
    k = np.asarray(k, dtype=float)
    g = (
        (1 + c) ** 2 / 4 * np.cos(3 * k)
        + s * s / 2 * np.cos(2 * k)
        + (1 - c) * (3 + c) / 4 * np.cos(k)
        - s * s / 2
    )
    return g if g.ndim else float(g)


def _lambda(j: int, k: NDArray[np.float64], params: CoinParameters) -> NDArray[np.complex128]:
    if j == 1:
        return np.ones_like(k, dtype=np.complex128)
    g = np.asarray(dispersion_g(k, params))
    return g + BRANCH_SIGN[j] * 1j * np.sqrt(np.clip(1.0 - g * g, 0.0, None))


def eigenvalues(k: float, params: CoinParameters) -> NDArray[np.complex128]:
    """``(lambda_1, lambda_2, lambda_3)`` at momentum ``k``."""
    kk = np.asarray(float(k))
    return np.array([complex(_lambda(j, kk, params)) for j in (1, 2, 3)])


def _eigvec_raw(j: int, k: NDArray[np.float64], params: CoinParameters) -> NDArray[np.complex128]:
    """Unnormalized closed-form eigenvectors, shape ``(3, len(k))``."""
    c, s = params.c, params.s
    lam = _lambda(j, k, params)
    e = np.exp(1j * k)
    eta_p = (1 + c) * e + 1 - c
    eta_m = (1 + c) / e + 1 - c
    a = e * eta_p * lam - eta_m
    b = eta_m * lam / e - eta_p
    return np.array([s * (1 - e) * a * (lam + 1), SQRT2 * a * b, s * (1 - 1 / e) * b * (lam + 1)])


def _eigvecs(j: int, k: NDArray[np.float64], params: CoinParameters) -> tuple[NDArray, NDArray]:
    w = _eigvec_raw(j, k, params)
    norm_sq = np.sum(np.abs(w) ** 2, axis=0)
    return w / np.sqrt(np.where(norm_sq > 0, norm_sq, 1.0)), norm_sq


def eigenvector_v(j: int, k: float, params: CoinParameters) -> NDArray[np.complex128]:
    """Normalized closed-form eigenvector for ``lambda_j(k)``."""
    if j not in (1, 2, 3):
        raise ValueError(f"eigenvector index must be 1, 2 or 3, got {j}")
    kk = np.array([float(k)])
    v, norm_sq = _eigvecs(j, kk, params)
    if k == 0.0 or norm_sq[0] <= _NORM_FLOOR:
        raise DegenerateMomentError(f"eigenvector v_{j} is degenerate at k={k!r} (N={norm_sq[0]:.3e})")
    return v[:, 0]


def _velocity_sign(k: NDArray[np.float64], params: CoinParameters) -> NDArray[np.float64]:
    c = params.c
    return (c - (1 + c) * np.cos(k)) * np.sin(k)


def _velocity(j: int, k: NDArray[np.float64], params: CoinParameters) -> NDArray[np.float64]:
    c = params.c
    ck = np.cos(k)
    speed = (2 + c + 3 * (1 + c) * ck) / (3 * np.sqrt(2 - c * c + 2 * (1 + c) * ck + (1 + c) ** 2 * ck * ck))
    return BRANCH_SIGN[j] * np.sign(_velocity_sign(k, params)) * speed


def group_velocity(j: int, k: ArrayLike, params: CoinParameters) -> NDArray[np.float64] | float:
    """Closed-form ``i lambda_j'(k) / (3 lambda_j(k))`` for ``j`` in {2, 3}."""
    if j not in (2, 3):
        raise ValueError(f"group velocity is defined for j=2,3, got {j}")
    kk = np.asarray(k, dtype=float)
    if np.any(np.abs(_velocity_sign(kk, params)) < _SIGN_FLOOR):
        raise DegenerateMomentError("velocity sign is undefined at the requested momentum")
    h = _velocity(j, kk, params)
    return h if h.ndim else float(h)


def velocity_breakpoints(params: CoinParameters) -> list[float]:
    """Points of ``[-pi, pi]`` where the velocity sign factor vanishes."""
    c = params.c
    pts = [-math.pi, 0.0, math.pi]
    ratio = c / (1 + c)
    if abs(ratio) < 1.0:
        k0 = math.acos(ratio)
        pts += [-k0, k0]
    return sorted(set(pts))


def velocity_grid(k: ArrayLike, params: CoinParameters) -> tuple[NDArray[np.bool_], NDArray, NDArray]:
    """``(valid, h_2, h_3)`` on a grid; ``valid`` is False where the sign is undefined."""
    kk = np.asarray(k, dtype=float)
    valid = np.abs(_velocity_sign(kk, params)) >= _SIGN_FLOOR
    return valid, _velocity(2, kk, params), _velocity(3, kk, params)


@dataclass(frozen=True, eq=False)
class SpectralPoint:
    k: float
    matrix: NDArray[np.complex128]
    eigenvalues: NDArray[np.complex128]
    eigenvectors: NDArray[np.complex128]  # columns v_1, v_2, v_3
    velocities: tuple[float, float] | None  # (h_2, h_3); None where the sign is undefined
    g: float


def spectral_point(k: float, params: CoinParameters) -> SpectralPoint:
    k = float(k)
    vecs = np.column_stack([eigenvector_v(j, k, params) for j in (1, 2, 3)])
    try:
        vel = (group_velocity(2, k, params), group_velocity(3, k, params))
    except DegenerateMomentError:
        vel = None
    return SpectralPoint(
        k=k,
        matrix=period_operator(k, params),
        eigenvalues=eigenvalues(k, params),
        eigenvectors=vecs,
        velocities=vel,
        g=dispersion_g(k, params),
    )


def overlaps(k: ArrayLike, init: InitialState, params: CoinParameters) -> NDArray[np.float64]:
    """``|<v_j(k)|psi_0>|^2`` for j = 1, 2, 3; shape ``(3,) + k.shape``.

    Entries are NaN where the closed-form eigenvector is 0/0 (``k = 0`` for
    the flat band, band touchings for the dispersive ones).
    """
    kk = np.atleast_1d(np.asarray(k, dtype=float))
    psi = init.vector()
    out = np.empty((3, kk.size))
    for idx, j in enumerate((1, 2, 3)):
        v, norm_sq = _eigvecs(j, kk.ravel(), params)
        out[idx] = np.where(norm_sq > _NORM_FLOOR, np.abs(np.conj(v).T @ psi) ** 2, np.nan)
    return out.reshape((3,) + np.shape(k))


@dataclass(frozen=True)
class DeltaQuadrature:
    """Flat-band mass with its quadrature bookkeeping (nodes per half-interval)."""

    value: float
    error: float
    nodes: int

    @classmethod
    def from_result(cls, res: QuadratureResult) -> "DeltaQuadrature":
        return cls(value=res.value, error=res.error, nodes=res.nodes)


def delta_mass(
    init: InitialState,
    params: CoinParameters,
    nodes: int = 512,
    max_nodes: int = 8192,
    tol: float = 1e-8,
) -> DeltaQuadrature:
    """Weight of the atom at the origin: ``int |<v_1(k)|psi_0>|^2 dk / 2pi``.

    The integral is split at ``k = 0`` where the eigenvector formula is 0/0.
    """
    if nodes < 64:
        raise ValueError(f"delta_mass needs at least 64 nodes, got {nodes}")
    psi = init.vector()

    def integrand(k: NDArray[np.float64]) -> NDArray[np.float64]:
        v, _ = _eigvecs(1, k, params)
        return np.abs(np.conj(v).T @ psi) ** 2 / (2 * math.pi)

    res = integrate(integrand, [-math.pi, 0.0, math.pi], nodes=nodes, max_nodes=max_nodes, tol=tol)
    return DeltaQuadrature.from_result(res)


def moment_limit(
    r: int,
    init: InitialState,
    params: CoinParameters,
    nodes: int = 512,
    max_nodes: int = 8192,
    tol: float = 1e-10,
) -> float:
    """Limit of ``E[(X_t/t)^r]`` from the dispersive bands plus ``0**r`` times the atom."""
    if r < 0:
        raise ValueError(f"moment order must be nonnegative, got {r}")
    psi = init.vector()

    def integrand(k: NDArray[np.float64]) -> NDArray[np.float64]:
        total = np.zeros_like(k)
        for j in (2, 3):
            v, _ = _eigvecs(j, k, params)
            total += _velocity(j, k, params) ** r * np.abs(np.conj(v).T @ psi) ** 2
        return total / (2 * math.pi)

    band = integrate(integrand, velocity_breakpoints(params), nodes=nodes, max_nodes=max_nodes, tol=tol)
    value = band.value
    if r == 0:
        value += delta_mass(init, params, nodes=nodes, max_nodes=max_nodes).value
    return value


def delocalization_matrix(params: CoinParameters) -> NDArray[np.float64]:
    """Coefficients (columns alpha, beta, gamma) that must all vanish for a zero atom.

    Row ``n`` is the Fourier coefficient of ``e^{i(n-3)k}`` in
    ``sqrt(N_1(k)) <v_1(k)|psi_0>``, each row rescaled by a factor built from
    ``1 + c`` and ``s`` that is nonzero for every admissible coin. Row scaling
    leaves the solution set, and hence the rank, unchanged.
    """
    c, s = params.c, params.s
    r2 = SQRT2
    return np.array(
        [
            [r2 * s, 1 + c, 0.0],
            [r2 * c, -s, 0.0],
            [2 * r2 * (1 - c) * s, (1 - c) * (1 + 3 * c), -r2 * (1 + c) * s],
            [c * s, r2 * (1 + c * c), c * s],
            [-r2 * (1 + c) * s, (1 - c) * (1 + 3 * c), 2 * r2 * (1 - c) * s],
            [0.0, -s, r2 * c],
            [0.0, 1 + c, r2 * s],
        ]
    )


@dataclass(frozen=True)
class RankReport:
    rank: int
    only_zero_solution: bool
    conclusion: str


def delocalization_rank_check(params: CoinParameters, matrix: NDArray | None = None) -> RankReport:
    """Rank of the linear system an initial state would need to satisfy to have no atom."""
    m = delocalization_matrix(params) if matrix is None else np.asarray(matrix)
    rank = int(np.linalg.matrix_rank(m))
    only_zero = rank == m.shape[1]
    conclusion = (
        "only the zero solution exists; every normalized initial state localizes"
        if only_zero
        else f"nontrivial solutions exist (rank {rank})"
    )
    return RankReport(rank=rank, only_zero_solution=only_zero, conclusion=conclusion)


def fourier_evolve(state: WalkState, params: CoinParameters, t: int, ring_size: int) -> WalkState:
    """Main-schedule evolution of a time-0 ``state`` computed in momentum space.

    The state is placed on the ring Z/NZ. For ``t = 3n + tau`` each momentum
    component is expanded in the closed-form eigenbasis, the eigenvalues are
    raised to the power ``n`` and the remaining ``tau`` coin+shift steps are
    applied. Momenta where the closed form is degenerate fall back to a
    matrix power. ``ring_size`` must exceed the final support width.
    """
    if state.time != 0:
        raise ValueError("fourier_evolve expects a state at time 0")
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    n_ring = int(ring_size)
    lo, hi = state.support()
    if hi - lo + 2 * t + 1 > n_ring:
        raise ValueError(f"ring of size {n_ring} is too small for t={t} and support [{lo}, {hi}]")
    ring = np.zeros((n_ring, 3), dtype=np.complex128)
    for x in range(lo, hi + 1):
        ring[x % n_ring] = state.amplitude(x)
    psi_hat = np.fft.fft(ring, axis=0)
    ks = 2 * math.pi * np.fft.fftfreq(n_ring)

    periods, tau = divmod(t, 3)
    coin = build_coin(params)
    vecs = []
    norms = []
    for j in (1, 2, 3):
        v, nsq = _eigvecs(j, ks, params)
        vecs.append(v)
        norms.append(nsq)
    lams = np.array([_lambda(j, ks, params) for j in (1, 2, 3)])

    out_hat = np.empty_like(psi_hat)
    for m, k in enumerate(ks):
        phi = psi_hat[m]
        basis = np.column_stack([vecs[j][:, m] for j in range(3)])
        ok = abs(k) > 1e-12 and min(n[m] for n in norms) > _NORM_FLOOR
        if ok and np.linalg.norm(basis.conj().T @ basis - np.eye(3)) < 1e-8:
            coeffs = basis.conj().T @ phi
            phi = basis @ (lams[:, m] ** periods * coeffs)
        else:
            phi = np.linalg.matrix_power(period_operator(k, params), periods) @ phi
        c_hat = shift_symbol(k) @ coin
        for _ in range(tau):
            phi = c_hat @ phi
        out_hat[m] = phi

    out = np.fft.ifft(out_hat, axis=0)
    half = n_ring // 2
    rolled = np.roll(out, half, axis=0)  # index i <-> position i - half
    return WalkState(time=t, offset=half, amplitudes=rolled)
