"""Sequential model-based optimization over a typed box.

The run alternates between fitting a surrogate to every archived evaluation,
searching that surrogate for one promising candidate, and spending objective
evaluations on it (optionally replicated, optionally topped up by optimal
computing budget allocation for noisy objectives).  Every evaluation lands
in an archive recording the point, its value, the seed used and the
replicate index, and the run stops exactly at the evaluation budget.
"""

from __future__ import annotations

import inspect
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .design import DesignControl, ParamSpace, make_lhd, make_uniform
from .forest import fit_forest
from .kriging import fit_kriging
from .ocba import ocba_allocate
from .optimizers import optim_lhd, optim_local_bounded
from .rsm import fit_rsm
from .stack import fit_stack


class InfeasibleBudgetError(ValueError):
    """The evaluation budget cannot cover the initial design."""


_MODELS: dict[str, Callable] = {
    "kriging": fit_kriging,
    "forest": fit_forest,
    "stack": fit_stack,
    "rsm": fit_rsm,
}

_OPTIMIZERS: dict[str, Callable] = {
    "lhd": optim_lhd,
    "local": optim_local_bounded,
}

_DESIGNS: dict[str, Callable] = {
    "lhd": make_lhd,
    "uniform": make_uniform,
}


@dataclass
class SpotConfig:
    """Run settings; field names match the run-config file format."""

    funEvals: int = 20
    types: tuple[str, ...] = ()
    design: Union[str, Callable] = "lhd"
    designControl: dict = field(default_factory=dict)
    model: Union[str, Callable] = "kriging"
    modelControl: dict = field(default_factory=dict)
    optimizer: Union[str, Callable] = "lhd"
    optimizerControl: dict = field(default_factory=dict)
    noise: bool = False
    OCBA: bool = False
    OCBAbudget: int = 3
    replicates: int = 1
    seedFun: Optional[int] = None
    seedSPOT: int = 1
    duplicate: str = "EXPLORE"
    plots: bool = False

    def __post_init__(self):
        if self.funEvals < 1:
            raise ValueError("funEvals must be at least 1")
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        if self.OCBAbudget < 0:
            raise ValueError("OCBAbudget must be nonnegative")
        if self.duplicate not in ("EXPLORE", "STOP"):
            raise ValueError("duplicate must be EXPLORE or STOP")
        self.types = tuple(self.types or ())


@dataclass
class NoiseState:
    """Counter handing one seed to each evaluation row, plus bookkeeping."""

    next_value: Optional[int] = None
    replaced: int = 0

    def next(self) -> int:
        if self.next_value is None:
            raise ValueError("seed counter used without seedFun")
        value = self.next_value
        self.next_value += 1
        return value


def next_seed(state: NoiseState) -> int:
    """Advance the per-evaluation seed counter by one."""
    return state.next()


@dataclass
class EvalArchive:
    """Row-per-evaluation history of a run."""

    X: np.ndarray
    y: np.ndarray
    seeds: list
    replicates: np.ndarray

    @classmethod
    def empty(cls, dim: int) -> "EvalArchive":
        return cls(
            X=np.empty((0, dim)),
            y=np.empty((0, 1)),
            seeds=[],
            replicates=np.empty(0, dtype=int),
        )

    @property
    def count(self) -> int:
        return self.y.shape[0]

    def append(self, x_row: np.ndarray, y_val: float, seed: Optional[int]) -> None:
        x_row = np.asarray(x_row, dtype=float).reshape(1, -1)
        prior = int(np.sum(np.all(self.X == x_row, axis=1))) if self.count else 0
        self.X = np.vstack([self.X, x_row])
        self.y = np.vstack([self.y, [[y_val]]])
        self.seeds.append(seed)
        self.replicates = np.append(self.replicates, prior + 1)

    def best(self) -> tuple[np.ndarray, float]:
        idx = int(np.argmin(self.y[:, 0]))
        return self.X[idx].copy(), float(self.y[idx, 0])


@dataclass
class SpotResult:
    xbest: np.ndarray
    ybest: float
    x: np.ndarray
    y: np.ndarray
    count: int
    msg: str
    modelFit: Optional[object]
    seeds: list = field(default_factory=list)
    replicates: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))


def apply_duplicate_policy(
    candidate: np.ndarray,
    archive_x: np.ndarray,
    policy: str,
    space: ParamSpace,
    rng: np.random.Generator,
    max_draws: int = 1000,
) -> Optional[np.ndarray]:
    """Resolve a candidate that duplicates an archived point.

    EXPLORE swaps in a fresh uniform draw (snapped to the space's types),
    retrying at most `max_draws` times; STOP returns None so the caller can
    end the run.  A candidate that is not a duplicate passes through.
    """
    candidate = np.asarray(candidate, dtype=float).reshape(-1)
    if archive_x.shape[0] == 0 or not np.any(np.all(archive_x == candidate, axis=1)):
        return candidate
    if policy == "STOP":
        return None
    if policy != "EXPLORE":
        raise ValueError("duplicate must be EXPLORE or STOP")
    for _ in range(max_draws):
        draw = space.snap(rng.uniform(space.lower, space.upper, size=space.dim))[0]
        if not np.any(np.all(archive_x == draw, axis=1)):
            return draw
    raise RuntimeError("could not find a non-duplicate replacement in 1000 draws")


def _accepts_seed(fun: Callable) -> bool:
    try:
        return "seed" in inspect.signature(fun).parameters
    except (TypeError, ValueError):
        return False


def _evaluate(
    fun: Callable,
    rows: np.ndarray,
    cfg: SpotConfig,
    state: NoiseState,
    archive: EvalArchive,
    pass_seed: bool,
) -> None:
    """Evaluate rows one batch or one seeded row at a time, archiving all."""
    rows = np.atleast_2d(rows)
    seeded = cfg.noise and cfg.seedFun is not None
    if seeded:
        for row in rows:
            s = state.next()
            np.random.seed(s % 2**32)
            if pass_seed:
                val = fun(row.reshape(1, -1), seed=s)
            else:
                val = fun(row.reshape(1, -1))
            val = float(np.asarray(val, dtype=float).reshape(-1)[0])
            archive.append(row, val if np.isfinite(val) else np.inf, s)
    else:
        vals = np.asarray(fun(rows), dtype=float).reshape(-1)
        if vals.shape[0] != rows.shape[0]:
            raise ValueError("objective returned the wrong number of values")
        for row, val in zip(rows, vals):
            archive.append(row, val if np.isfinite(val) else np.inf, None)


def _resolve(table: dict, value, kind: str) -> Callable:
    if callable(value):
        return value
    try:
        return table[value]
    except KeyError:
        known = ", ".join(sorted(table))
        raise ValueError(f"unknown {kind} {value!r} (known: {known})") from None


def _model_control(cfg: SpotConfig, rng: np.random.Generator) -> dict:
    ctl = dict(cfg.modelControl)
    ctl.setdefault("types", cfg.types or None)
    ctl.setdefault("seed", int(rng.integers(2**31 - 1)))
    return ctl


def _optimizer_control(cfg: SpotConfig, rng: np.random.Generator) -> dict:
    ctl = dict(cfg.optimizerControl)
    ctl.setdefault("funEvals", 100)
    ctl.setdefault("types", cfg.types or ())
    ctl.setdefault("seed", int(rng.integers(2**31 - 1)))
    return ctl


def _ocba_step(
    fun: Callable,
    cfg: SpotConfig,
    space: ParamSpace,
    state: NoiseState,
    archive: EvalArchive,
    pass_seed: bool,
) -> None:
    """Spend the OCBA top-up budget on the most informative replications."""
    extra = min(cfg.OCBAbudget, cfg.funEvals - archive.count)
    if extra <= 0:
        return
    configs, inverse = np.unique(archive.X, axis=0, return_inverse=True)
    means = np.empty(configs.shape[0])
    variances = np.empty(configs.shape[0])
    counts = np.empty(configs.shape[0], dtype=int)
    for g in range(configs.shape[0]):
        vals = archive.y[inverse == g, 0]
        counts[g] = vals.size
        means[g] = vals.mean()
        variances[g] = vals.var(ddof=1) if vals.size > 1 else 0.0
    ok = (counts >= 2) & np.isfinite(means) & np.isfinite(variances)
    if ok.sum() < 2 or np.all(variances[ok] == 0.0):
        return
    alloc = ocba_allocate(means[ok], variances[ok], counts[ok], extra)
    for sub_idx, n_extra in enumerate(alloc):
        if n_extra > 0:
            row = configs[np.flatnonzero(ok)[sub_idx]]
            reps = np.repeat(row.reshape(1, -1), n_extra, axis=0)
            _evaluate(fun, reps, cfg, state, archive, pass_seed)


def _run_loop(
    fun: Callable,
    cfg: SpotConfig,
    space: ParamSpace,
    rng: np.random.Generator,
    state: NoiseState,
    archive: EvalArchive,
    pass_seed: bool,
) -> SpotResult:
    fit_model = _resolve(_MODELS, cfg.model, "model")
    run_search = _resolve(_OPTIMIZERS, cfg.optimizer, "optimizer")
    local_style = cfg.optimizer != "lhd"
    model = None
    msg = "budget exhausted"

    while archive.count < cfg.funEvals:
        finite = np.isfinite(archive.y[:, 0])
        if finite.sum() < 2:
            raise ValueError("not enough finite evaluations to fit a model")
        model = fit_model(
            archive.X[finite], archive.y[finite], _model_control(cfg, rng)
        )
        start = archive.best()[0] if local_style else None
        search = run_search(
            start,
            lambda xq: np.asarray(model.predict(xq)).reshape(-1, 1),
            space.lower,
            space.upper,
            _optimizer_control(cfg, rng),
        )
        candidate = space.snap(search.xbest)[0]
        if not cfg.noise:
            candidate = apply_duplicate_policy(
                candidate, archive.X, cfg.duplicate, space, rng
            )
            if candidate is None:
                msg = "stopped on duplicate candidate (duplicate=STOP)"
                break
            if not np.array_equal(candidate, space.snap(search.xbest)[0]):
                state.replaced += 1
        reps = min(cfg.replicates, cfg.funEvals - archive.count)
        rows = np.repeat(candidate.reshape(1, -1), reps, axis=0)
        _evaluate(fun, rows, cfg, state, archive, pass_seed)
        if cfg.OCBA and cfg.noise:
            _ocba_step(fun, cfg, space, state, archive, pass_seed)

    xbest, ybest = archive.best()
    return SpotResult(
        xbest=xbest,
        ybest=ybest,
        x=archive.X,
        y=archive.y,
        count=archive.count,
        msg=msg,
        modelFit=model,
        seeds=list(archive.seeds),
        replicates=archive.replicates.copy(),
    )


def _normalize_config(control) -> SpotConfig:
    if control is None:
        return SpotConfig()
    if isinstance(control, SpotConfig):
        return control
    if isinstance(control, dict):
        return SpotConfig(**control)
    raise ValueError("control must be a SpotConfig, dict or None")


def _design_control(cfg: SpotConfig, rng: np.random.Generator) -> DesignControl:
    ctl = dict(cfg.designControl)
    seed = ctl.get("seed")
    return DesignControl(
        size=int(ctl.get("size", 10)),
        retries=int(ctl.get("retries", 100)),
        replicates=int(ctl.get("replicates", 1)),
        seed=int(rng.integers(2**31 - 1)) if seed is None else int(seed),
        types=cfg.types or (),
    )


def spot(
    x: Optional[np.ndarray],
    fun: Callable,
    lower: Sequence[float],
    upper: Sequence[float],
    control=None,
) -> SpotResult:
    """Run one budgeted sequential optimization from scratch.

    `x` may hold extra starting rows evaluated alongside the initial design.
    The objective takes an (m, d) matrix and returns an (m, 1) column; when
    noise bookkeeping is active it may also accept a per-row seed argument.
    """
    cfg = _normalize_config(control)
    space = ParamSpace(np.asarray(lower, float), np.asarray(upper, float), cfg.types)
    rng = np.random.default_rng(cfg.seedSPOT)
    state = NoiseState(next_value=cfg.seedFun if cfg.noise else None)
    pass_seed = _accepts_seed(fun)

    design_ctl = _design_control(cfg, rng)
    if cfg.noise and cfg.OCBA and design_ctl.replicates < 2 and cfg.replicates < 2:
        warnings.warn(
            "OCBA needs repeated evaluations to estimate variances; "
            "set replicates above one",
            stacklevel=2,
        )
    design_fn = _resolve(_DESIGNS, cfg.design, "design")
    rows = [design_fn(x, space, design_ctl)]
    if x is not None:
        extra = space.snap(np.atleast_2d(np.asarray(x, dtype=float)))
        rows.insert(0, np.repeat(extra, design_ctl.replicates, axis=0))
    initial = np.vstack(rows)
    if initial.shape[0] > cfg.funEvals:
        raise InfeasibleBudgetError(
            f"initial design needs {initial.shape[0]} evaluations, "
            f"budget is {cfg.funEvals}"
        )
    archive = EvalArchive.empty(space.dim)
    _evaluate(fun, initial, cfg, state, archive, pass_seed)
    return _run_loop(fun, cfg, space, rng, state, archive, pass_seed)


def spot_loop(
    x: np.ndarray,
    y: np.ndarray,
    fun: Callable,
    lower: Sequence[float],
    upper: Sequence[float],
    control=None,
) -> SpotResult:
    """Resume a run from an existing archive up to a larger budget.

    Rows already evaluated are kept verbatim as the archive prefix; the seed
    counter restarts at seedFun plus the number of prior rows, one per past
    evaluation.  If the budget is already spent, the archive is returned
    unchanged.
    """
    cfg = _normalize_config(control)
    space = ParamSpace(np.asarray(lower, float), np.asarray(upper, float), cfg.types)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float).reshape(-1, 1)
    if x.shape[0] != y.shape[0]:
        raise ValueError("x and y row counts differ")
    if x.shape[1] != space.dim:
        raise ValueError("x column count does not match the bounds")
    rng = np.random.default_rng(cfg.seedSPOT)
    seed0 = None
    if cfg.noise and cfg.seedFun is not None:
        seed0 = cfg.seedFun + x.shape[0]
    state = NoiseState(next_value=seed0)
    archive = EvalArchive.empty(space.dim)
    for row, val in zip(x, y[:, 0]):
        archive.append(row, val if np.isfinite(val) else np.inf, None)
    if cfg.funEvals <= archive.count:
        xbest, ybest = archive.best()
        return SpotResult(
            xbest=xbest,
            ybest=ybest,
            x=archive.X,
            y=archive.y,
            count=archive.count,
            msg="budget exhausted",
            modelFit=None,
            seeds=list(archive.seeds),
            replicates=archive.replicates.copy(),
        )
    return _run_loop(fun, cfg, space, rng, state, archive, _accepts_seed(fun))
