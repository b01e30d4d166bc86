"""Kriging (Gaussian process) surrogate with a mixed numeric/factor kernel.

Correlation between two points is exp(-sum_i theta_i * d_i(a_i, b_i)) where
d_i is |a_i - b_i|^p for numeric and integer dimensions (p fixed at 2) and
the unequality indicator for factor dimensions.  Hyperparameters are found
by maximum likelihood on log10 scales, with the concentrated form giving the
process mean and variance in closed form.

Inputs are scaled to the unit box internally (factor columns excepted), so
the fitted activity parameters live on that scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import cho_solve, cholesky

from . import optimizers

# concentrated -log-likelihood returned when the correlation matrix cannot
# be factorized; large enough that the search never keeps such a point
_PENALTY = 1e10

DEFAULT_THETA_BOUNDS = (-6.0, 2.0)
DEFAULT_LAMBDA_BOUNDS = (-6.0, 0.0)


def kernel_value(
    a: Sequence[float],
    b: Sequence[float],
    theta: Sequence[float],
    p: float = 2.0,
    types: Optional[Sequence[str]] = None,
) -> float:
    """Correlation between two raw-coordinate points."""
    a = np.asarray(a, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if not (a.shape == b.shape == theta.shape):
        raise ValueError("a, b and theta must have the same length")
    if np.any(theta < 0):
        raise ValueError("theta must be nonnegative")
    types = tuple(types) if types else ("numeric",) * a.size
    acc = 0.0
    for i, t in enumerate(types):
        if t == "factor":
            acc += theta[i] * (a[i] != b[i])
        else:
            acc += theta[i] * abs(a[i] - b[i]) ** p
    return float(np.exp(-acc))


@dataclass
class KrigingFit:
    """Fitted surrogate state; prediction needs only what is stored here."""

    X: np.ndarray
    y: np.ndarray
    theta: np.ndarray
    p: float
    lambda_: float
    mu_hat: float
    sigma2_hat: float
    corr_factorization: np.ndarray
    types: tuple[str, ...]
    likelihood_evals: int
    reinterpolate: bool
    x_offset: np.ndarray
    x_scale: np.ndarray
    alpha: np.ndarray
    sigma2_re: float
    corr_factorization_re: Optional[np.ndarray]
    reinterp_idx: Optional[np.ndarray] = None

    def predict(self, xnew: np.ndarray) -> np.ndarray:
        return predict_kriging(self, xnew)["mean"]


def _dist_tensor(z: np.ndarray, types: tuple[str, ...], p: float) -> np.ndarray:
    """Per-dimension distance matrices, stacked (d, n, n)."""
    n, d = z.shape
    out = np.empty((d, n, n))
    for i in range(d):
        diff = z[:, i][:, None] - z[:, i][None, :]
        if types[i] == "factor":
            out[i] = (diff != 0.0).astype(float)
        else:
            out[i] = np.abs(diff) ** p
    return out


def _cross_dist(
    za: np.ndarray, zb: np.ndarray, types: tuple[str, ...], p: float
) -> np.ndarray:
    """Distance tensor between two point sets, stacked (d, m, n)."""
    m, d = za.shape
    out = np.empty((d, m, zb.shape[0]))
    for i in range(d):
        diff = za[:, i][:, None] - zb[:, i][None, :]
        if types[i] == "factor":
            out[i] = (diff != 0.0).astype(float)
        else:
            out[i] = np.abs(diff) ** p
    return out


def _neg_log_likelihood(
    theta: np.ndarray, lam: float, dists: np.ndarray, y: np.ndarray
):
    """Concentrated -ln-likelihood; returns (value, parts or None)."""
    n = y.shape[0]
    psi = np.exp(-np.tensordot(theta, dists, axes=1))
    k = psi + lam * np.eye(n)
    try:
        lower = cholesky(k, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        return _PENALTY, None
    diag = np.diag(lower)
    if np.any(diag <= 0) or not np.all(np.isfinite(diag)):
        return _PENALTY, None
    # a factorization that succeeds but is effectively singular is useless
    # for prediction, so such hyperparameters are penalized like a failure
    if (diag.max() / diag.min()) ** 2 > 1e12:
        return _PENALTY, None
    one = np.ones((n, 1))
    kinv_y = cho_solve((lower, True), y, check_finite=False)
    kinv_one = cho_solve((lower, True), one, check_finite=False)
    mu = ((one.T @ kinv_y) / (one.T @ kinv_one)).item()
    resid = y - mu
    kinv_resid = kinv_y - mu * kinv_one
    sigma2 = (resid.T @ kinv_resid).item() / n
    if not np.isfinite(sigma2):
        return _PENALTY, None
    # a near-zero nugget promises interpolation: reject hyperparameters whose
    # smoothing deviation at the training data would break that promise
    if 0.0 < lam <= 1e-8:
        spread = float(np.ptp(resid)) or 1.0
        if lam * float(np.max(np.abs(kinv_resid))) > 1e-7 * spread:
            return _PENALTY, None
    value = 0.5 * n * np.log(max(sigma2, 1e-300)) + np.sum(np.log(diag))
    if not np.isfinite(value):
        return _PENALTY, None
    return float(value), (lower, mu, sigma2, kinv_resid)


def fit_kriging(X: np.ndarray, y: np.ndarray, control: Optional[dict] = None) -> KrigingFit:
    """Maximum-likelihood Kriging fit.

    Recognized control keys: types, algTheta ("lhd", "local" or a callable
    with the optimizer signature), budget (likelihood evaluations, default
    200 per hyperparameter), thetaBounds and lambdaBounds (log10 ranges),
    useLambda (fit a nugget, default True), reinterpolate (default True)
    and seed.
    """
    control = dict(control or {})
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).reshape(-1, 1)
    n, d = X.shape
    if y.shape[0] != n:
        raise ValueError("X and y row counts differ")
    if n < 2:
        raise ValueError("need at least 2 training points")
    types = tuple(control.get("types") or ("numeric",) * d)
    if len(types) != d:
        raise ValueError("types length must match X columns")
    p = float(control.get("p", 2.0))
    use_lambda = bool(control.get("useLambda", True))
    reinterpolate = bool(control.get("reinterpolate", True))
    t_lo, t_hi = control.get("thetaBounds", DEFAULT_THETA_BOUNDS)
    l_lo, l_hi = control.get("lambdaBounds", DEFAULT_LAMBDA_BOUNDS)

    if not use_lambda:
        uniq = np.unique(X, axis=0)
        if uniq.shape[0] != n:
            raise ValueError("duplicate rows require a nugget (useLambda)")

    # scale distance-based columns onto the unit box for conditioning
    x_offset = X.min(axis=0)
    span = X.max(axis=0) - x_offset
    x_scale = np.where(span > 0, span, 1.0)
    for i, t in enumerate(types):
        if t == "factor":
            x_offset[i], x_scale[i] = 0.0, 1.0
    z = (X - x_offset) / x_scale
    dists = _dist_tensor(z, types, p)

    n_par = d + (1 if use_lambda else 0)
    budget = int(control.get("budget", 200 * n_par))
    lower = np.full(n_par, t_lo)
    upper = np.full(n_par, t_hi)
    if use_lambda:
        lower[-1], upper[-1] = l_lo, l_hi

    def objective(v: np.ndarray) -> np.ndarray:
        v = np.atleast_2d(v)
        out = np.empty((v.shape[0], 1))
        for i, row in enumerate(v):
            theta = 10.0 ** row[:d]
            lam = 10.0 ** row[d] if use_lambda else 0.0
            out[i, 0] = _neg_log_likelihood(theta, lam, dists, y)[0]
        return out

    alg = control.get("algTheta", "lhd")
    seed = control.get("seed")
    if alg == "lhd":
        res = optimizers.optim_lhd(
            None, objective, lower, upper, {"funEvals": budget, "seed": seed}
        )
        xbest, evals = res.xbest, res.count
    elif alg == "local":
        # global screen picks the basin, bounded local search polishes it
        screen_evals = budget // 2 if budget >= 20 else 0
        start = None
        if screen_evals:
            screen = optimizers.optim_lhd(
                None, objective, lower, upper,
                {"funEvals": screen_evals, "seed": seed},
            )
            start = screen.xbest.ravel()
        res = optimizers.optim_local_bounded(
            start, objective, lower, upper,
            {"funEvals": budget - screen_evals, "seed": seed},
        )
        xbest, evals = res.xbest, res.count + screen_evals
        if screen_evals and float(screen.ybest) < float(res.ybest):
            xbest = screen.xbest
    elif callable(alg):
        res = alg(
            None, objective, lower, upper, {"funEvals": budget, "seed": seed}
        )
        xbest, evals = res.xbest, res.count
    else:
        raise ValueError(f"unknown algTheta {alg!r}")
    xbest = np.asarray(xbest, dtype=float).ravel()

    theta = 10.0 ** xbest[:d]
    lam = 10.0 ** xbest[d] if use_lambda else 0.0
    value, parts = _neg_log_likelihood(theta, lam, dists, y)
    if parts is None:
        raise ValueError(
            "correlation matrix is singular at the selected hyperparameters"
        )
    lower_chol, mu, sigma2, alpha = parts

    # polish the prediction weights by iterative refinement: the plain solve
    # is fine for the likelihood but loses digits when the kernel is nearly
    # flat, and predictions at the training points inherit that error
    psi_pure = np.exp(-np.tensordot(theta, dists, axes=1))
    k_mat = psi_pure + lam * np.eye(n)
    resid = y - mu
    scale_r = max(1.0, float(np.max(np.abs(resid))))
    for _ in range(3):
        gap = resid - k_mat @ alpha
        if np.max(np.abs(gap)) <= 1e-14 * scale_r:
            break
        alpha = alpha + cho_solve((lower_chol, True), gap, check_finite=False)

    sigma2_re = sigma2
    lower_re = None
    uniq_idx = None
    if lam > 0.0 and reinterpolate:
        # nugget-free correlation, for error estimates that vanish at the
        # data; built over the distinct training sites because replicated
        # rows would make it exactly singular
        sigma2_re = (alpha.T @ psi_pure @ alpha).item() / n
        uniq_idx = np.sort(np.unique(z, axis=0, return_index=True)[1])
        psi_u = psi_pure[np.ix_(uniq_idx, uniq_idx)]
        for jitter in (0.0, 1e-12, 1e-10, 1e-8):
            try:
                lower_re = cholesky(
                    psi_u + jitter * np.eye(uniq_idx.size),
                    lower=True,
                    check_finite=False,
                )
                break
            except np.linalg.LinAlgError:
                continue

    return KrigingFit(
        X=X,
        y=y,
        theta=theta,
        p=p,
        lambda_=lam,
        mu_hat=mu,
        sigma2_hat=sigma2,
        corr_factorization=lower_chol,
        types=types,
        likelihood_evals=evals,
        reinterpolate=reinterpolate,
        x_offset=x_offset,
        x_scale=x_scale,
        alpha=alpha,
        sigma2_re=sigma2_re,
        corr_factorization_re=lower_re,
        reinterp_idx=uniq_idx,
    )


def predict_kriging(fit: KrigingFit, xnew: np.ndarray) -> dict:
    """Predict mean and standard deviation at new points.

    With a positive nugget and reinterpolation active, the error estimate
    uses the nugget-free correlation so it collapses to zero at the training
    points; without a nugget the two formulas coincide.
    """
    xnew = np.atleast_2d(np.asarray(xnew, dtype=float))
    if xnew.shape[1] != fit.X.shape[1]:
        raise ValueError("prediction points have the wrong dimension")
    znew = (xnew - fit.x_offset) / fit.x_scale
    ztrain = (fit.X - fit.x_offset) / fit.x_scale
    cross = _cross_dist(znew, ztrain, fit.types, fit.p)
    psi = np.exp(-np.tensordot(fit.theta, cross, axes=1))
    mean = fit.mu_hat + psi @ fit.alpha

    if fit.lambda_ > 0.0 and fit.reinterpolate and fit.corr_factorization_re is not None:
        psi_u = psi[:, fit.reinterp_idx]
        solved = cho_solve(
            (fit.corr_factorization_re, True), psi_u.T, check_finite=False
        )
        s2 = fit.sigma2_re * (1.0 - np.sum(psi_u.T * solved, axis=0))
    else:
        solved = cho_solve((fit.corr_factorization, True), psi.T, check_finite=False)
        s2 = fit.sigma2_hat * (
            1.0 + fit.lambda_ - np.sum(psi.T * solved, axis=0)
        )
    sd = np.sqrt(np.clip(s2, 0.0, None)).reshape(-1, 1)
    return {"mean": mean.reshape(-1, 1), "sd": sd}
