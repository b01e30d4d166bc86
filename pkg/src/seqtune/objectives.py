"""Benchmark objectives and the simulated-annealing tuning scenario.

All engine-facing objectives map an (m, d) matrix to an (m, 1) column of
values, one per row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np


def fun_sphere(x: np.ndarray) -> np.ndarray:
    """Sum of squares, applied row-wise."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return np.sum(x**2, axis=1, keepdims=True)


def fun_cubic(x: np.ndarray) -> np.ndarray:
    """Row-wise sum of (x_i^3 - 1)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return np.sum(x**3 - 1.0, axis=1, keepdims=True)


def branin(x: Sequence[float]) -> float:
    """Branin test function on a 2-vector."""
    x1, x2 = float(x[0]), float(x[1])
    a = x2 - 5.1 / (4.0 * math.pi**2) * x1**2 + 5.0 / math.pi * x1 - 6.0
    return a**2 + 10.0 * (1.0 - 1.0 / (8.0 * math.pi)) * math.cos(x1) + 10.0


def fun_branin(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != 2:
        raise ValueError("branin expects 2 columns")
    x1, x2 = x[:, 0], x[:, 1]
    a = x2 - 5.1 / (4.0 * np.pi**2) * x1**2 + 5.0 / np.pi * x1 - 6.0
    y = a**2 + 10.0 * (1.0 - 1.0 / (8.0 * np.pi)) * np.cos(x1) + 10.0
    return y.reshape(-1, 1)


_FACTOR_SHIFT = {1: 1.0, 2: -1.0, 3: 0.0}


def branin_factor(x: Sequence[float]) -> float:
    """Branin plus a level-dependent shift on the third coordinate.

    Level 1 adds 1, level 2 subtracts 1, level 3 leaves the value unchanged.
    """
    level = int(round(float(x[2])))
    if level not in _FACTOR_SHIFT:
        raise ValueError(f"factor level must be 1, 2 or 3, got {x[2]!r}")
    return branin(x[:2]) + _FACTOR_SHIFT[level]


def fun_branin_factor(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != 3:
        raise ValueError("braninFactor expects 3 columns")
    y = fun_branin(x[:, :2])
    levels = np.rint(x[:, 2]).astype(int)
    if not np.all(np.isin(levels, [1, 2, 3])):
        raise ValueError("factor level must be 1, 2 or 3")
    shift = np.choose(levels - 1, [1.0, -1.0, 0.0])
    return y + shift.reshape(-1, 1)


def metropolis_accept(delta: float, temperature: float, u: float) -> bool:
    """Accept rule for a proposed move with objective change `delta`.

    Improving or equal moves are always accepted; worsening moves with
    probability exp(-delta / temperature), decided by the uniform draw `u`.
    """
    if delta <= 0.0:
        return True
    t = max(float(temperature), 1e-300)
    return u < math.exp(-min(delta / t, 700.0))


@dataclass
class SannParams:
    """Settings for one annealing run."""

    par: Sequence[float]
    maxit: int = 100
    temp: float = 10.0
    tmax: int = 10
    seed: Optional[int] = None


@dataclass
class SannResult:
    par: np.ndarray
    value: float
    counts: int


def sann_minimize(fn: Callable[[np.ndarray], float], params: SannParams) -> SannResult:
    """Simulated annealing with logarithmic cooling.

    The start point is evaluated once for bookkeeping; `counts` reports the
    number of proposal evaluations, which is exactly `maxit`.  Temperature for
    proposal i is temp / ln(j*tmax + e) with j = (i-1) // tmax, so the first
    `tmax` proposals run at the starting temperature.  Proposals are Gaussian
    steps with per-dimension scale equal to the current temperature (clamped
    below at 1e-8), and the best point ever visited is returned.
    """
    if params.temp <= 0.0:
        raise ValueError("temp must be positive")
    if params.tmax < 1:
        raise ValueError("tmax must be at least 1")
    if params.maxit < 1:
        raise ValueError("maxit must be at least 1")
    rng = np.random.default_rng(params.seed)
    cur = np.asarray(params.par, dtype=float).copy()
    cur_y = float(fn(cur))
    best, best_y = cur.copy(), cur_y
    for i in range(1, params.maxit + 1):
        stage = (i - 1) // params.tmax
        t = params.temp / math.log(stage * params.tmax + math.e)
        scale = max(t, 1e-8)
        prop = cur + rng.normal(0.0, scale, size=cur.shape)
        prop_y = float(fn(prop))
        if prop_y < best_y:
            best, best_y = prop.copy(), prop_y
        delta = prop_y - cur_y
        if metropolis_accept(delta, t, rng.uniform()):
            cur, cur_y = prop, prop_y
    return SannResult(par=best, value=best_y, counts=params.maxit)


@dataclass
class TuningProblem:
    """Scenario handed to the annealing wrapper: what to solve and how long.

    The wrapped objective `fn` takes a parameter vector and returns a scalar.
    """

    x0: Sequence[float] = (10.0, 10.0)
    maxit: int = 100
    fn: Callable[[np.ndarray], float] = field(
        default=lambda v: float(np.sum(np.asarray(v, dtype=float) ** 2))
    )


DEFAULT_SANN_SCENARIO = TuningProblem()


def sann2spot(
    algpar: np.ndarray,
    scenario: TuningProblem = DEFAULT_SANN_SCENARIO,
    seed: Optional[int] = None,
) -> np.ndarray:
    """Run one annealing attempt per (temp, tmax) row and report its value.

    When a seed is given, row i runs with seed + i so replicate rows stay
    reproducible but independent.
    """
    algpar = np.atleast_2d(np.asarray(algpar, dtype=float))
    if algpar.shape[1] != 2:
        raise ValueError("expected columns (temp, tmax)")
    out = np.empty((algpar.shape[0], 1))
    for i, (temp, tmax) in enumerate(algpar):
        if temp <= 0.0:
            raise ValueError("temp must be positive")
        params = SannParams(
            par=scenario.x0,
            maxit=scenario.maxit,
            temp=float(temp),
            tmax=max(1, int(round(tmax))),
            seed=None if seed is None else seed + i,
        )
        out[i, 0] = sann_minimize(scenario.fn, params).value
    return out


def make_sann_objective(
    scenario: TuningProblem = DEFAULT_SANN_SCENARIO,
) -> Callable[..., np.ndarray]:
    """Bind a tuning scenario into an engine-facing objective."""

    def objective(x: np.ndarray, seed: Optional[int] = None) -> np.ndarray:
        return sann2spot(x, scenario=scenario, seed=seed)

    return objective


_REGISTRY: dict[str, Callable[..., np.ndarray]] = {
    "sphere": fun_sphere,
    "cubic": fun_cubic,
    "branin": fun_branin,
    "braninFactor": fun_branin_factor,
}


def get_objective(name: str) -> Callable[..., np.ndarray]:
    """Look up an objective by its public name."""
    if name == "sannSphere":
        return make_sann_objective()
    try:
        return _REGISTRY[name]
    except KeyError:
        known = ", ".join(sorted(_REGISTRY) + ["sannSphere"])
        raise ValueError(f"unknown objective {name!r} (known: {known})") from None
