"""Three-state walk on the integer line with a 3-periodic coin schedule.

Coin states are ordered ``(-1, 0, 1)`` everywhere: component ``-1`` moves the
walker one site to the left, ``0`` keeps it in place and ``1`` moves it one
site to the right. At each time step the coin is applied to every site
(unless the schedule skips it at the current residue of ``t mod 3``) and the
shift follows.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "CoinParameters",
    "InitialState",
    "Schedule",
    "WalkState",
    "GROVER_THETA",
    "build_coin",
    "initial_walk_state",
    "step",
    "evolve",
    "evolve_state",
    "delocalized_equivalent_initial_state",
]

GROVER_THETA = math.acos(-1.0 / 3.0)

_NORM_TOL = 1e-12


@dataclass(frozen=True)
class CoinParameters:
    """Coin angle ``theta`` in radians, reduced to ``[0, 2*pi)``.

    ``theta`` equal to 0 or pi gives a diagonal/antidiagonal coin with
    trivial dynamics and is rejected.
    """

    theta: float
    c: float = field(init=False)
    s: float = field(init=False)

    def __post_init__(self) -> None:
        theta = math.fmod(float(self.theta), 2.0 * math.pi)
        if theta < 0.0:
            theta += 2.0 * math.pi
        if not math.isfinite(theta):
            raise ValueError(f"theta must be finite, got {self.theta!r}")
        if min(abs(theta), abs(theta - math.pi), abs(theta - 2.0 * math.pi)) < 1e-12:
            raise ValueError("theta must differ from 0 and pi (trivial coin)")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "c", math.cos(theta))
        object.__setattr__(self, "s", math.sin(theta))

    @classmethod
    def grover(cls) -> "CoinParameters":
        return cls(GROVER_THETA)


@dataclass(frozen=True)
class InitialState:
    """Coin amplitudes ``(alpha, beta, gamma)`` of states -1, 0, 1 at the origin."""

    alpha: complex
    beta: complex
    gamma: complex

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "gamma"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2 + abs(self.gamma) ** 2
        if abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"initial coin state is not normalized (|psi|^2 = {norm!r})")

    @classmethod
    def normalized(cls, alpha: complex, beta: complex, gamma: complex) -> "InitialState":
        v = np.array([alpha, beta, gamma], dtype=complex)
        n = np.linalg.norm(v)
        if n == 0:
            raise ValueError("zero vector cannot be normalized")
        v = v / n
        return cls(*v)

    @classmethod
    def uniform(cls) -> "InitialState":
        r = 1.0 / math.sqrt(3.0)
        return cls(r, r, r)

    def vector(self) -> NDArray[np.complex128]:
        return np.array([self.alpha, self.beta, self.gamma], dtype=np.complex128)

    def with_phase(self, phi: float) -> "InitialState":
        z = complex(math.cos(phi), math.sin(phi))
        return InitialState(z * self.alpha, z * self.beta, z * self.gamma)


class Schedule(enum.Enum):
    """Which residue of ``t mod 3`` omits the coin."""

    SKIP_AT_2 = 2
    SKIP_AT_0 = 0
    SKIP_AT_1 = 1

    @property
    def skipped_residue(self) -> int:
        return self.value

    def applies_coin(self, t: int) -> bool:
        return t % 3 != self.value

    @classmethod
    def from_name(cls, name: str) -> "Schedule":
        table = {"main": cls.SKIP_AT_2, "skip2": cls.SKIP_AT_2, "skip0": cls.SKIP_AT_0, "skip1": cls.SKIP_AT_1}
        try:
            return table[name.lower()]
        except KeyError:
            raise ValueError(f"unknown schedule {name!r}; expected one of main, skip0, skip1") from None

    @property
    def cli_name(self) -> str:
        return {2: "main", 0: "skip0", 1: "skip1"}[self.value]


MAIN = Schedule.SKIP_AT_2


@dataclass(frozen=True, eq=False)
class WalkState:
    """Snapshot of the walker at integer time ``time``.

    ``amplitudes[i]`` is the coin vector at position ``i - offset``. The array
    is read-only; evolution always produces a new state.
    """

    time: int
    offset: int
    amplitudes: NDArray[np.complex128]

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=np.complex128)
        if amps.ndim != 2 or amps.shape[1] != 3:
            raise ValueError(f"amplitudes must have shape (n, 3), got {amps.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def positions(self) -> NDArray[np.int64]:
        return np.arange(self.amplitudes.shape[0], dtype=np.int64) - self.offset

    def amplitude(self, x: int) -> NDArray[np.complex128]:
        i = x + self.offset
        if 0 <= i < self.amplitudes.shape[0]:
            return self.amplitudes[i].copy()
        return np.zeros(3, dtype=np.complex128)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def support(self) -> tuple[int, int]:
        """Smallest and largest positions with a nonzero amplitude."""
        nz = np.flatnonzero(np.any(self.amplitudes != 0, axis=1))
        if nz.size == 0:
            raise ValueError("state has no support")
        return int(nz[0] - self.offset), int(nz[-1] - self.offset)

    def as_dict(self) -> dict[int, NDArray[np.complex128]]:
        lo, hi = self.support()
        return {x: self.amplitude(x) for x in range(lo, hi + 1) if np.any(self.amplitude(x) != 0)}

    @classmethod
    def from_dict(cls, amplitudes: dict[int, "np.ndarray | list[complex]"], time: int = 0) -> "WalkState":
        lo, hi = min(amplitudes), max(amplitudes)
        arr = np.zeros((hi - lo + 1, 3), dtype=np.complex128)
        for x, v in amplitudes.items():
            arr[x - lo] = v
        return cls(time=time, offset=-lo, amplitudes=arr)


def build_coin(params: CoinParameters) -> NDArray[np.float64]:
    """Return the real symmetric 3x3 coin for ``params`` (rows/cols ordered -1, 0, 1)."""
    c, s = params.c, params.s
    r = s / math.sqrt(2.0)
    return np.array(
        [
            [-(1.0 + c) / 2.0, r, (1.0 - c) / 2.0],
            [r, c, r],
            [(1.0 - c) / 2.0, r, -(1.0 + c) / 2.0],
        ]
    )


def initial_walk_state(init: InitialState) -> WalkState:
    return WalkState(time=0, offset=0, amplitudes=init.vector()[None, :])


def _shift_into(src: NDArray[np.complex128], dst: NDArray[np.complex128]) -> None:
    # gather: new[x] takes the -1 component from x+1, 0 from x, +1 from x-1
    dst[:-1, 0] = src[1:, 0]
    dst[-1, 0] = 0.0
    dst[:, 1] = src[:, 1]
    dst[1:, 2] = src[:-1, 2]
    dst[0, 2] = 0.0


def step(state: WalkState, coin: NDArray, schedule: Schedule = MAIN) -> WalkState:
    """Advance ``state`` by one time step; the array grows by one site on each side."""
    n = state.amplitudes.shape[0]
    src = np.zeros((n + 2, 3), dtype=np.complex128)
    src[1:-1] = state.amplitudes
    if schedule.applies_coin(state.time):
        src[1:-1] = src[1:-1] @ np.asarray(coin).T
    dst = np.empty_like(src)
    _shift_into(src, dst)
    return WalkState(time=state.time + 1, offset=state.offset + 1, amplitudes=dst)


def evolve_state(state: WalkState, coin: NDArray, schedule: Schedule, steps: int) -> WalkState:
    """Apply ``steps`` time steps to ``state`` in preallocated buffers."""
    if steps < 0:
        raise ValueError(f"steps must be nonnegative, got {steps}")
    if steps == 0:
        return state
    coin_t = np.ascontiguousarray(np.asarray(coin, dtype=np.complex128).T)
    n0 = state.amplitudes.shape[0]
    size = n0 + 2 * steps
    a = np.zeros((size, 3), dtype=np.complex128)
    b = np.zeros_like(a)
    a[steps : steps + n0] = state.amplitudes
    # occupied window [lo, hi) widens by one site per step on each side
    lo, hi = steps, steps + n0
    t = state.time
    for _ in range(steps):
        lo, hi = lo - 1, hi + 1
        if schedule.applies_coin(t):
            a[lo + 1 : hi - 1] = a[lo + 1 : hi - 1] @ coin_t
        _shift_into(a[lo:hi], b[lo:hi])
        a, b = b, a
        t += 1
    return WalkState(time=t, offset=state.offset + steps, amplitudes=a)


def evolve(init: InitialState, params: CoinParameters, schedule: Schedule, t: int) -> WalkState:
    """Return the state at time ``t`` of the walk started from ``init`` at the origin."""
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    return evolve_state(initial_walk_state(init), build_coin(params), schedule, t)


def delocalized_equivalent_initial_state(
    init: InitialState, params: CoinParameters, schedule: Schedule
) -> WalkState:
    """Time-0 state whose main-schedule walk reproduces a skip-variant walk.

    For ``SKIP_AT_0`` the variant at time ``t`` equals the main walk from the
    returned state at time ``t - 1``; for ``SKIP_AT_1`` at time ``t - 2``.
    The returned state carries ``time == 0`` so that the main schedule is
    applied from its first step.
    """
    a, b, g = init.alpha, init.beta, init.gamma
    if schedule is Schedule.SKIP_AT_0:
        return WalkState.from_dict({-1: [a, 0, 0], 0: [0, b, 0], 1: [0, 0, g]})
    if schedule is Schedule.SKIP_AT_1:
        c, s = params.c, params.s
        r = s / math.sqrt(2.0)
        left = -(1 + c) / 2 * a + r * b + (1 - c) / 2 * g
        mid = r * a + c * b + r * g
        right = (1 - c) / 2 * a + r * b - (1 + c) / 2 * g
        return WalkState.from_dict(
            {-2: [left, 0, 0], -1: [0, 0, 0], 0: [0, mid, 0], 1: [0, 0, 0], 2: [0, 0, right]}
        )
    raise ValueError("the main schedule needs no equivalent initial state")
