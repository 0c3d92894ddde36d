"""Panel regression engine: fixed-effect absorption, OLS and 2SLS with
cluster-robust (CR1) inference.

Fixed effects are absorbed by alternating group demeaning rather than
dense dummies, so the engine scales linearly in rows. Collinearity is
detected with a pivoted QR and reported by column name. Clustered
covariance uses the CR1 small-sample adjustment
(G/(G-1)) * ((n-1)/(n-k)) around the usual sandwich.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import CollinearityError, InputError, NumericalError, WeakInstrumentError

DEMEAN_TOL = 1e-10
DEMEAN_MAX_SWEEPS = 200
RANK_TOL = 1e-10
Z95 = 1.959963984540054


@dataclass
class EstimateResult:
    """Fitted coefficients with clustered standard errors.

    Fixed effects are absorbed, not enumerated; only the named regressors
    appear here.
    """

    coefficients: dict
    se_clustered: dict
    n_obs: int
    n_clusters: int
    first_stage_F: float | None = None
    dropped_singletons: int = 0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n_clusters < 2:
            raise InputError(f"need at least 2 clusters, got {self.n_clusters}")
        for name, se in self.se_clustered.items():
            if not se > 0:
                raise NumericalError(f"non-positive standard error for {name}")

    def ci(self, name: str, z: float = Z95):
        b, se = self.coefficients[name], self.se_clustered[name]
        return b - z * se, b + z * se

    def tstat(self, name: str) -> float:
        return self.coefficients[name] / self.se_clustered[name]

    def to_json_dict(self) -> dict:
        return {
            "coef": dict(self.coefficients),
            "se": dict(self.se_clustered),
            "n_obs": int(self.n_obs),
            "n_clusters": int(self.n_clusters),
            "first_stage_F": None if self.first_stage_F is None else float(self.first_stage_F),
        }


def encode_groups(ids) -> np.ndarray:
    """Map arbitrary group labels to dense integer codes."""
    _, codes = np.unique(np.asarray(ids), return_inverse=True)
    return codes


def singleton_mask(group_code_arrays) -> np.ndarray:
    """Rows belonging to any singleton group, applied iteratively.

    Dropping a singleton in one dimension can create new singletons in
    another, so the scan repeats until stable.
    """
    n = group_code_arrays[0].shape[0]
    keep = np.ones(n, dtype=bool)
    changed = True
    while changed:
        changed = False
        for codes in group_code_arrays:
            counts = np.bincount(codes[keep], minlength=codes.max() + 1)
            bad = keep & (counts[codes] == 1)
            if bad.any():
                keep &= ~bad
                changed = True
    return keep


def within_transform(X: np.ndarray, group_code_arrays, tol: float = DEMEAN_TOL,
                     max_sweeps: int = DEMEAN_MAX_SWEEPS) -> np.ndarray:
    """Residualize columns on the group structures by alternating demeaning.

    Iterates full sweeps over the fixed-effect dimensions until the
    largest absolute change in any column falls below tol. A single
    dimension converges in one pass; unbalanced two-way panels typically
    need a few dozen.
    """
    if not group_code_arrays:
        raise InputError("within_transform needs at least one fixed-effect dimension")
    X = np.array(X, dtype=float, copy=True)
    one_dim = len(group_code_arrays) == 1
    counts = []
    for codes in group_code_arrays:
        c = np.bincount(codes)
        if (c == 0).any():
            raise InputError("empty fixed-effect group")
        counts.append(c)
    for _ in range(max_sweeps):
        delta = 0.0
        for codes, c in zip(group_code_arrays, counts):
            for j in range(X.shape[1]):
                means = np.bincount(codes, weights=X[:, j]) / c
                adjust = means[codes]
                X[:, j] -= adjust
                delta = max(delta, float(np.abs(adjust).max(initial=0.0)))
        if one_dim or delta < tol:
            return X
    raise NumericalError(
        f"within transform did not converge in {max_sweeps} sweeps (last change {delta:.3e})"
    )


def _pivoted_solve(X: np.ndarray, names):
    """QR with column pivoting; raises CollinearityError naming dropped columns.

    Returns (solve, xtx_inv) where solve(y) gives least-squares coefficients.
    """
    n, k = X.shape
    if n <= k:
        raise InputError(f"need more observations ({n}) than parameters ({k})")
    q, r, piv = scipy.linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    lead = diag[0] if diag.size else 0.0
    if lead == 0.0 or np.any(diag < RANK_TOL * lead):
        rank = int(np.sum(diag >= RANK_TOL * lead)) if lead > 0 else 0
        raise CollinearityError([names[j] for j in piv[rank:]])

    inv_r = scipy.linalg.solve_triangular(r, np.eye(k))
    unpiv = np.argsort(piv)
    xtx_inv = (inv_r @ inv_r.T)[np.ix_(unpiv, unpiv)]

    def solve(y: np.ndarray) -> np.ndarray:
        beta_p = scipy.linalg.solve_triangular(r, q.T @ y)
        return beta_p[unpiv]

    return solve, xtx_inv


def _cr1_vcov(X: np.ndarray, resid: np.ndarray, cluster_codes: np.ndarray,
              xtx_inv: np.ndarray) -> tuple:
    n, k = X.shape
    g = int(cluster_codes.max()) + 1
    if g < 2:
        raise InputError("clustered inference needs at least 2 clusters")
    scores = np.zeros((g, k))
    np.add.at(scores, cluster_codes, X * resid[:, None])
    meat = scores.T @ scores
    c = (g / (g - 1.0)) * ((n - 1.0) / (n - k))
    vcov = c * xtx_inv @ meat @ xtx_inv
    # rounding can push a genuinely-zero diagonal element to -1e-19
    np.fill_diagonal(vcov, np.maximum(np.diag(vcov), 0.0))
    return vcov, g


def ols(y, X, cluster_ids, names) -> EstimateResult:
    """Least squares with CR1 cluster-robust standard errors.

    X must be full column rank after any fixed-effect absorption; rank
    deficiency raises CollinearityError naming the offending columns.
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    names = list(names)
    solve, xtx_inv = _pivoted_solve(X, names)
    beta = solve(y)
    resid = y - X @ beta
    codes = encode_groups(cluster_ids)
    vcov, g = _cr1_vcov(X, resid, codes, xtx_inv)
    se = np.sqrt(np.diag(vcov))
    return EstimateResult(
        coefficients=dict(zip(names, beta.tolist())),
        se_clustered=dict(zip(names, se.tolist())),
        n_obs=y.shape[0],
        n_clusters=g,
    )


def _first_stage_F(W, beta_fs, resid_fs, n_inst, cluster_codes, names):
    """Cluster-robust Wald F on the excluded instruments (first n_inst columns)."""
    solve, xtx_inv = _pivoted_solve(W, names)
    vcov, _ = _cr1_vcov(W, resid_fs, cluster_codes, xtx_inv)
    b = beta_fs[:n_inst]
    v = vcov[:n_inst, :n_inst]
    try:
        stat = float(b @ np.linalg.solve(v, b)) / n_inst
    except np.linalg.LinAlgError as exc:
        raise WeakInstrumentError(f"degenerate first stage: {exc}") from exc
    return stat


def tsls(y, endog, instruments, exog, cluster_ids, endog_names, inst_names, exog_names) -> EstimateResult:
    """Two-stage least squares with CR1 inference on the 2SLS residuals.

    Residuals use the observed endogenous regressors, not the first-stage
    fitted values, which is what makes the sandwich consistent.
    """
    y = np.asarray(y, dtype=float)
    endog = np.atleast_2d(np.asarray(endog, dtype=float).T).T
    instruments = np.atleast_2d(np.asarray(instruments, dtype=float).T).T
    exog = (
        np.empty((y.shape[0], 0))
        if exog is None or np.size(exog) == 0
        else np.atleast_2d(np.asarray(exog, dtype=float).T).T
    )
    m, q = endog.shape[1], instruments.shape[1]
    if q < m:
        raise InputError(f"need at least as many instruments ({q}) as endogenous columns ({m})")

    codes = encode_groups(cluster_ids)
    w = np.hstack([instruments, exog])
    w_names = list(inst_names) + list(exog_names)
    solve_w, _ = _pivoted_solve(w, w_names)
    fitted = np.empty_like(endog)
    f_stats = []
    for j in range(m):
        beta_fs = solve_w(endog[:, j])
        fitted[:, j] = w @ beta_fs
        resid_fs = endog[:, j] - fitted[:, j]
        f_stats.append(_first_stage_F(w, beta_fs, resid_fs, q, codes, w_names))
    first_f = min(f_stats)
    if not first_f >= 1e-6:
        raise WeakInstrumentError(f"first-stage F = {first_f:.3e}")

    names = list(endog_names) + list(exog_names)
    x_hat = np.hstack([fitted, exog])
    solve2, xtx_inv = _pivoted_solve(x_hat, names)
    beta = solve2(y)
    resid = y - np.hstack([endog, exog]) @ beta
    vcov, g = _cr1_vcov(x_hat, resid, codes, xtx_inv)
    se = np.sqrt(np.diag(vcov))
    return EstimateResult(
        coefficients=dict(zip(names, beta.tolist())),
        se_clustered=dict(zip(names, se.tolist())),
        n_obs=y.shape[0],
        n_clusters=g,
        first_stage_F=first_f,
    )


def dense_dummy_ols(y, X, group_code_arrays, cluster_ids, names) -> EstimateResult:
    """Oracle twin of the absorbed estimator: explicit dummy columns.

    Only suitable for small panels; used to validate the within transform.
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    blocks = [X, np.ones((y.shape[0], 1))]
    dummy_names = list(names) + ["const"]
    for d, codes in enumerate(group_code_arrays):
        levels = np.unique(codes)
        for lv in levels[1:]:
            blocks.append((codes == lv).astype(float)[:, None])
            dummy_names.append(f"fe{d}_{lv}")
    full = np.hstack(blocks)
    res = ols(y, full, cluster_ids, dummy_names)
    keep = list(names)
    return EstimateResult(
        coefficients={k: res.coefficients[k] for k in keep},
        se_clustered={k: res.se_clustered[k] for k in keep},
        n_obs=res.n_obs,
        n_clusters=res.n_clusters,
    )
