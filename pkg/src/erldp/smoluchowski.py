"""Truncated Smoluchowski coagulation equation with kernel ``K(m, m') = m m'``.

    d l_k / dt = 1/2 sum_{m + m' = k} (m l_m)(m' l_m') - k l_k * S

Two closures of the loss term are offered:

* ``"gel"`` (default): ``S = 1``, i.e. clusters also coagulate with mass that
  has left the window ``k <= K_max`` (the gel).  The equations are lower
  triangular, so the truncation is exact for ``k <= K_max`` and the solution
  coincides with ``lam*_k(1; t)`` for every t, continuing past gelation with
  sol mass ``beta_t``.
* ``"sol"``: ``S = sum_{m <= K_max} m l_m``.  Then ``sum_k k dl_k/dt`` equals
  minus the gain flux past ``K_max`` exactly.

The integrator is an adaptive Dormand-Prince 5(4) pair.  Steps that would
push a concentration below ``-NEG_SLACK * tol`` are rejected and retried
with a smaller step; smaller negatives are round-off and clipped to zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import NumericalError

CLOSURES = ("gel", "sol")
NEG_SLACK = 1e-6  # negatives above -NEG_SLACK*tol are clipped, below are rejected


@dataclass(frozen=True)
class SmolState:
    l: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        arr = np.array(self.l, dtype=float).reshape(-1)
        if arr.size < 1:
            raise ValueError("state needs at least one size class")
        arr.setflags(write=False)
        object.__setattr__(self, "l", arr)
        if self.time < 0:
            raise ValueError("time must be nonnegative")

    @classmethod
    def monodisperse(cls, k_max: int) -> "SmolState":
        l = np.zeros(k_max)
        l[0] = 1.0
        return cls(l, 0.0)

    @property
    def k_max(self) -> int:
        return self.l.size


def _sizes(n: int) -> np.ndarray:
    return np.arange(1, n + 1, dtype=float)


def _rhs(l: np.ndarray, k: np.ndarray, closure: str) -> np.ndarray:
    a = k * l
    gain = np.zeros_like(l)
    if l.size > 1:
        # conv[i] collects pairs with m + m' = i + 2
        conv = np.convolve(a, a)
        gain[1:] = 0.5 * conv[: l.size - 1]
    s = 1.0 if closure == "gel" else float(a.sum())
    return gain - a * s


def smol_rhs(state: SmolState | np.ndarray, closure: str = "gel") -> np.ndarray:
    """Time derivative of every ``l_k``, ``k = 1..K_max``."""
    if closure not in CLOSURES:
        raise ValueError(f"closure must be one of {CLOSURES}")
    l = state.l if isinstance(state, SmolState) else np.asarray(state, dtype=float)
    return _rhs(l, _sizes(l.size), closure)


def mass_flux(state: SmolState | np.ndarray) -> float:
    """Rate at which coagulations of two in-window clusters send mass past ``K_max``."""
    l = state.l if isinstance(state, SmolState) else np.asarray(state, dtype=float)
    n = l.size
    a = _sizes(n) * l
    conv = np.convolve(a, a)  # index i <-> total size i + 2
    total = np.arange(2, 2 * n + 1, dtype=float)
    over = total > n
    return float(0.5 * np.sum(conv[over] * total[over]))


def gel_mass(state: SmolState) -> float:
    return float(1.0 - np.dot(_sizes(state.k_max), state.l))


# Dormand-Prince 5(4) tableau (autonomous system, so stage times are not needed)
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


@dataclass(frozen=True)
class SmolConfig:
    k_max: int
    t_end: float
    tol: float = 1e-10
    closure: str = "gel"
    h_min: float = 1e-14
    max_steps: int = 10_000_000

    def __post_init__(self):
        if self.k_max < 2:
            raise ValueError("k_max must be at least 2")
        if self.t_end < 0:
            raise ValueError("t_end must be nonnegative")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.closure not in CLOSURES:
            raise ValueError(f"closure must be one of {CLOSURES}")


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    l: np.ndarray  # shape (len(times), k_max)
    steps_accepted: int
    steps_rejected: int

    def state(self, i: int) -> SmolState:
        return SmolState(self.l[i], float(self.times[i]))

    @property
    def gel(self) -> np.ndarray:
        return 1.0 - self.l @ _sizes(self.l.shape[1])


def integrate(cfg: SmolConfig, times=None) -> Trajectory:
    """Integrate from the monodisperse state and record the solution at ``times``
    (default: 0 and ``t_end``).  Steps are clipped to land on each output time."""
    if times is None:
        times = [0.0, cfg.t_end]
    times = np.asarray(sorted(set(float(x) for x in times)), dtype=float)
    if times.size == 0 or times[0] < 0 or times[-1] > cfg.t_end:
        raise ValueError("output times must lie in [0, t_end]")

    k = _sizes(cfg.k_max)
    y = SmolState.monodisperse(cfg.k_max).l.copy()
    t = 0.0
    out = np.empty((times.size, cfg.k_max))
    idx = 0
    while idx < times.size and times[idx] <= 0.0:
        out[idx] = y
        idx += 1

    def f(v):
        return _rhs(v, k, cfg.closure)

    h = min(cfg.tol ** 0.2 / 10, cfg.t_end) if cfg.t_end > 0 else 0.0
    stages = np.empty((7, cfg.k_max))
    stages[0] = f(y)
    accepted = rejected = 0
    while idx < times.size:
        target = times[idx]
        h = min(h, target - t)
        if h < cfg.h_min * max(1.0, t):
            if target - t <= cfg.h_min * max(1.0, t):
                h = target - t
            else:
                raise NumericalError(f"step size underflow at t={t!r}")
        for s in range(1, 7):
            yi = y + h * np.dot(_A[s], stages[:s])
            stages[s] = f(yi)
        y_new = y + h * np.dot(_B5, stages)
        err_vec = h * np.dot(_E, stages)
        scale = cfg.tol * (1.0 + np.maximum(np.abs(y), np.abs(y_new)))
        err = float(np.max(np.abs(err_vec) / scale))
        if err <= 1.0 and np.all(y_new >= -NEG_SLACK * cfg.tol):
            t = target if h == target - t else t + h
            if np.any(y_new < 0):
                # round-off level negatives in barely populated classes
                y = np.maximum(y_new, 0.0)
                stages[0] = f(y)
            else:
                y = y_new
                stages[0] = stages[6]  # first-same-as-last
            accepted += 1
            if t >= target:
                out[idx] = y
                idx += 1
            factor = 5.0 if err == 0 else min(5.0, 0.9 * err ** -0.2)
        else:
            rejected += 1
            factor = 0.5 if err <= 1.0 else max(0.1, 0.9 * err ** -0.2)
        h *= factor
        if accepted + rejected > cfg.max_steps:
            raise NumericalError("step budget exhausted")
    return Trajectory(times, out, accepted, rejected)


def evolve(cfg: SmolConfig) -> SmolState:
    """State at ``t_end``."""
    tr = integrate(cfg)
    return tr.state(tr.times.size - 1)
