"""Synthetic bid-level market generator with potential-outcome bookkeeping.

Workers draw a latent productivity and an access flag; jobs draw a period
and a set of applicants; every bid draws a letter shock and (after the
tool launches, for access holders) a usage coin. A general-purpose
writing technology arrives earlier and shifts both groups' letters by
fixed amounts from its launch period onward, so the tool effect must be
disentangled from it exactly the way the estimation module does.

Counterfactual market states are simulated with common random numbers and
kept in a ledger, which makes the effect decomposition

    total = direct + spillover + market_shift

hold exactly per realization: each term is a telescoping difference of
state aggregates (group-mean changes summed over the access and no-access
groups). The spillover term is the no-access group's outcome change when
only its rivals gain the tool, which is weakly negative for exclusive
outcomes like offers.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np
import pandas as pd
from scipy.special import expit

from ._rng import substream
from .errors import ConfigError, InputError
from .model import expected_productivity
from .params import ModelParams

BID_COLUMNS = [
    "bid_id",
    "worker_id",
    "job_id",
    "period",
    "access",
    "used_ai",
    "tailoring",
    "wage_norm",
    "rank_pct",
    "callback",
    "offer",
    "edit_minutes",
    "pre_ability",
]

_UTIL_CLIP = 30.0


@dataclass(frozen=True)
class SimConfig:
    """Data-generating-process knobs.

    Periods are integer weeks. gpt_period is the week the general-purpose
    technology lands (level shifts gpt_shift_treated / _control by access
    group, constant thereafter); tool_period is the week the platform tool
    launches. beliefs controls whether employers re-read letters after the
    tool exists ("switching") or never update ("static"). review_noise, if
    set, gives employers an independent noisy productivity signal (the
    review score) with that variance, and they weight it optimally.
    """

    model: ModelParams = field(default_factory=ModelParams)
    n_workers: int = 1000
    n_jobs: int = 4000
    applicants_per_job: int = 6
    n_periods: int = 16
    gpt_period: int = 4
    tool_period: int = 8
    access_share: float = 0.6
    compliance: float = 0.5
    gpt_shift_treated: float = 0.15
    gpt_shift_control: float = 0.05
    market_shift: float = 0.0
    seed: int = 0
    beliefs: str = "switching"
    review_noise: float | None = None
    ai_mode: str = "additive"
    tool_ceiling: float | None = None
    tool_effect_schedule: tuple | None = None  # per-month multipliers on the tool shift
    rank_attention_post: float = 0.0
    weeks_per_month: int = 4
    edit_alpha: float = 3.0
    edit_beta: float = 0.5
    edit_sd: float = 1.5
    edit_outcome_effect: float = 0.0

    def __post_init__(self):
        if self.n_workers <= 0 or self.n_jobs <= 0:
            raise ConfigError("n_workers and n_jobs must be positive")
        if self.applicants_per_job < 2:
            raise ConfigError("applicants_per_job must be >= 2")
        if self.applicants_per_job > self.n_workers:
            raise ConfigError(
                f"applicants_per_job={self.applicants_per_job} exceeds n_workers={self.n_workers}"
            )
        if self.n_periods < 4:
            raise ConfigError("n_periods must be >= 4")
        if not 0 <= self.gpt_period < self.tool_period < self.n_periods:
            raise ConfigError("need 0 <= gpt_period < tool_period < n_periods")
        if not 0.0 < self.access_share < 1.0:
            raise ConfigError("access_share must lie in (0, 1)")
        if not 0.0 <= self.compliance <= 1.0:
            raise ConfigError("compliance must lie in [0, 1]")
        if self.beliefs not in ("switching", "static"):
            raise ConfigError(f"beliefs must be 'switching' or 'static', got {self.beliefs!r}")
        if self.ai_mode not in ("additive", "ceiling"):
            raise ConfigError(f"ai_mode must be 'additive' or 'ceiling', got {self.ai_mode!r}")
        if self.review_noise is not None and not self.review_noise > 0:
            raise ConfigError("review_noise must be positive when set")
        if self.weeks_per_month < 1:
            raise ConfigError("weeks_per_month must be >= 1")

    @property
    def ceiling(self) -> float:
        if self.tool_ceiling is not None:
            return self.tool_ceiling
        return self.model.mu0 + self.model.A


def employer_params(cfg: SimConfig, regime: str) -> ModelParams:
    """Belief parameters employers apply when reading letters.

    Pre-tool (or under static beliefs) they assume no tool exists. Post,
    they treat a letter as tool-assisted with prior probability equal to
    the realized per-bid usage share, access_share * compliance.
    """
    mp = cfg.model
    if regime == "pre" or cfg.beliefs == "static" or mp.A == 0.0:
        return mp.with_shift(0.0)
    if regime != "post":
        raise InputError(f"regime must be 'pre' or 'post', got {regime!r}")
    p_eff = cfg.access_share * cfg.compliance
    if p_eff <= 0.0:
        return mp.with_shift(0.0)
    p_eff = min(p_eff, 1.0 - 1e-9)
    return replace(mp, p=p_eff)


def employer_expected_q(h, review, mp: ModelParams, omega2: float | None):
    """Expected productivity given a letter and, optionally, a review score.

    Without a review signal this is the model's expected_productivity.
    With one, employers apply the linear screening rule calibrated to the
    letter distribution the regime induces: unable to tell assisted
    letters apart, they treat a letter as carrying noise
    sigma2 + p(1-p)A^2 around a mean shifted by p*A. Relative to the
    pre-tool rule this flattens the letter weight and raises the review
    weight, which is the signal-substitution channel. With A = 0 the rule
    is the exact Gaussian posterior.
    """
    if omega2 is None:
        return expected_productivity(h, mp)
    h = np.asarray(h, dtype=float)
    review = np.asarray(review, dtype=float)
    var_h = mp.total_var + mp.p * (1.0 - mp.p) * mp.A**2
    mean_h = mp.mu0 + mp.p * mp.A
    cov_hr = mp.tau2
    var_r = mp.tau2 + omega2
    det = var_h * var_r - cov_hr**2
    b_h = (mp.tau2 * var_r - mp.tau2 * cov_hr) / det
    b_r = (mp.tau2 * var_h - mp.tau2 * cov_hr) / det
    return mp.mu0 + b_h * (h - mean_h) + b_r * (review - mp.mu0)


@dataclass
class Ledger:
    """Per-bid outcomes under the four simulated market states.

    Keys are 'on_m1' (tool used as realized, post beliefs and market
    shift), 'off_m1' (nobody uses the tool, post beliefs and shift),
    'off_m0' (nobody uses it, pre beliefs, no shift) and 'on_m0'.
    """

    states: dict
    post_mask: np.ndarray
    access: np.ndarray
    job_ids: np.ndarray


@dataclass
class Dataset:
    config: SimConfig
    bids: pd.DataFrame
    workers: pd.DataFrame
    truth: dict
    ledger: Ledger | None = None


def _tool_multiplier(cfg: SimConfig, periods: np.ndarray) -> np.ndarray:
    """Per-bid multiplier on the tool shift (1 unless a taper is configured)."""
    if cfg.tool_effect_schedule is None:
        return np.ones(periods.shape[0])
    sched = np.asarray(cfg.tool_effect_schedule, dtype=float)
    month = np.maximum(periods - cfg.tool_period, 0) // cfg.weeks_per_month
    idx = np.minimum(month, sched.shape[0] - 1)
    return sched[idx]


def _letters(cfg, q_bid, periods, access_bid, used, nu):
    """Letter quality for one usage configuration."""
    gpt = np.where(
        periods >= cfg.gpt_period,
        np.where(access_bid, cfg.gpt_shift_treated, cfg.gpt_shift_control),
        0.0,
    )
    base = q_bid + gpt + nu
    if cfg.ai_mode == "additive":
        shift = cfg.model.A * _tool_multiplier(cfg, periods)
        return np.where(used, base + shift, base)
    lifted = cfg.ceiling + nu
    return np.where(used, lifted, base)


def _draw_outcomes(cfg, util, job_codes, n_jobs, u_callback, u_offer, outside_shift_by_job,
                   util_callback=None):
    """Callbacks (independent logit) and offers (one multinomial per job).

    outside_shift_by_job is added to each job's outside-option utility.
    util_callback, when given, replaces util at the callback stage only
    (the shortlisting rule may weight the displayed rank). Bids must be
    grouped contiguously by job in ascending job order; u_offer holds one
    uniform per job, shared across counterfactual states so offer flips
    are minimal under common random numbers.
    """
    cb_util = util if util_callback is None else util_callback
    callback = (u_callback < expit(cb_util)).astype(np.int8)
    e = np.exp(np.clip(util, -_UTIL_CLIP, _UTIL_CLIP))
    denom = np.bincount(job_codes, weights=e, minlength=n_jobs) + np.exp(outside_shift_by_job)
    probs = e / denom[job_codes]
    cum = np.cumsum(probs)
    counts = np.bincount(job_codes, minlength=n_jobs)
    before_job = np.concatenate([[0.0], cum])[np.cumsum(counts) - counts]
    cum_hi = cum - before_job[job_codes]
    cum_lo = cum_hi - probs
    u = u_offer[job_codes]
    offer = ((u >= cum_lo) & (u < cum_hi)).astype(np.int8)
    return callback, offer


def _state_outcomes(cfg, draws, used, market_on, letters):
    """Outcome vectors for one counterfactual state.

    market_on toggles the whole post-rollout market state: employer
    beliefs in post periods and the outside-option shift. With it off,
    post periods are read exactly like pre periods.
    """
    periods = draws["periods_bid"]
    post = periods >= cfg.tool_period
    pre_mp = employer_params(cfg, "pre")
    post_mp = employer_params(cfg, "post" if market_on else "pre")
    util = np.empty(letters.shape[0])
    for mask, mp in ((~post, pre_mp), (post, post_mp)):
        if mask.any():
            util[mask] = employer_expected_q(
                letters[mask], draws["review_bid"][mask], mp, cfg.review_noise
            )
    if cfg.edit_outcome_effect != 0.0:
        util = util + cfg.edit_outcome_effect * draws["edit_minutes"] * used
    util_cb = None
    if market_on and cfg.rank_attention_post != 0.0 and cfg.beliefs == "switching":
        # once letters are suspect, shortlisting leans on the displayed rank
        util_cb = util + np.where(post, cfg.rank_attention_post * draws["rank_pct"], 0.0)
    outside_by_job = np.where(
        draws["job_periods"] >= cfg.tool_period,
        cfg.market_shift if market_on else 0.0,
        0.0,
    )
    return _draw_outcomes(
        cfg,
        util,
        draws["job_codes"],
        cfg.n_jobs,
        draws["u_callback"],
        draws["u_offer"],
        outside_by_job,
        util_callback=util_cb,
    )


def _draw_primitives(cfg: SimConfig, access_override=None) -> dict:
    """All random primitives, each from its own substream.

    Draw shapes never depend on treatment values, so flipping access or
    usage re-simulates with common random numbers.
    """
    mp = cfg.model
    rng_w = substream(cfg.seed, "workers")
    q = mp.mu0 + math.sqrt(mp.tau2) * rng_w.standard_normal(cfg.n_workers)
    access = rng_w.random(cfg.n_workers) < cfg.access_share
    if access_override is not None:
        access = np.asarray(access_override, dtype=bool)
        if access.shape[0] != cfg.n_workers:
            raise InputError("access_override length must equal n_workers")

    rng_j = substream(cfg.seed, "jobs")
    job_periods = rng_j.integers(0, cfg.n_periods, size=cfg.n_jobs)
    applicants = np.empty((cfg.n_jobs, cfg.applicants_per_job), dtype=np.int64)
    for j in range(cfg.n_jobs):
        applicants[j] = rng_j.choice(cfg.n_workers, size=cfg.applicants_per_job, replace=False)

    n_bids = cfg.n_jobs * cfg.applicants_per_job
    worker_idx = applicants.ravel()
    job_codes = np.repeat(np.arange(cfg.n_jobs), cfg.applicants_per_job)
    periods_bid = job_periods[job_codes]

    nu = math.sqrt(mp.sigma2) * substream(cfg.seed, "nu").standard_normal(n_bids)
    u_usage = substream(cfg.seed, "usage").random(n_bids)
    wage = np.exp(0.4 * substream(cfg.seed, "wage").standard_normal(n_bids))
    u_callback = substream(cfg.seed, "callback").random(n_bids)
    u_offer = substream(cfg.seed, "offer").random(cfg.n_jobs)
    edit_z = substream(cfg.seed, "edit").standard_normal(n_bids)
    # the review signal is read per bid: worker quality plus fresh noise,
    # so it varies within worker (review pages evolve, reads are noisy)
    omega2_rank = cfg.review_noise if cfg.review_noise is not None else 1.0
    review_bid = q[worker_idx] + math.sqrt(omega2_rank) * substream(
        cfg.seed, "review"
    ).standard_normal(n_bids)
    r_mat = review_bid.reshape(cfg.n_jobs, cfg.applicants_per_job)
    order = np.argsort(np.argsort(-r_mat, axis=1), axis=1)  # 0 = best within job
    rank_pct = (1.0 - (order + 1.0) / cfg.applicants_per_job).ravel()

    return {
        "q": q,
        "access": access,
        "job_periods": job_periods,
        "applicants": applicants,
        "worker_idx": worker_idx,
        "job_codes": job_codes,
        "periods_bid": periods_bid,
        "q_bid": q[worker_idx],
        "access_bid": access[worker_idx],
        "review_bid": review_bid,
        "rank_pct": rank_pct,
        "nu": nu,
        "u_usage": u_usage,
        "wage": wage,
        "u_callback": u_callback,
        "u_offer": u_offer,
        "edit_z": edit_z,
    }


def _rank_percentiles(draws, cfg) -> np.ndarray:
    """Within-job percentile of the review score: 1 - rank / applicants."""
    r = draws["review_bid"].reshape(cfg.n_jobs, cfg.applicants_per_job)
    order = np.argsort(np.argsort(-r, axis=1), axis=1)  # 0 = best
    return (1.0 - (order + 1.0) / cfg.applicants_per_job).ravel()


def _pre_ability(cfg, draws, letters_realized) -> tuple:
    """Standardized pre-tool mean letter quality per worker (NaN if no pre bids)."""
    pre = draws["periods_bid"] < cfg.tool_period
    sums = np.bincount(draws["worker_idx"][pre], weights=letters_realized[pre], minlength=cfg.n_workers)
    counts = np.bincount(draws["worker_idx"][pre], minlength=cfg.n_workers)
    mean = np.full(cfg.n_workers, np.nan)
    has = counts > 0
    mean[has] = sums[has] / counts[has]
    mu = mean[has].mean()
    sd = mean[has].std()
    out = np.full(cfg.n_workers, np.nan)
    if sd > 0:
        out[has] = (mean[has] - mu) / sd
    else:
        out[has] = 0.0
    return out, int((~has).sum())


def generate_market(cfg: SimConfig, access_override=None, keep_ledger: bool = True) -> Dataset:
    """Simulate the market and its counterfactual states.

    Deterministic given cfg.seed. The realized data correspond to the
    'on_m1' state; the ledger keeps the other states for decomposition
    and assumption checks.
    """
    draws = _draw_primitives(cfg, access_override)
    periods = draws["periods_bid"]
    post = periods >= cfg.tool_period
    used = draws["access_bid"] & post & (draws["u_usage"] < cfg.compliance)
    no_use = np.zeros_like(used)

    letters_on = _letters(cfg, draws["q_bid"], periods, draws["access_bid"], used, draws["nu"])
    letters_off = _letters(cfg, draws["q_bid"], periods, draws["access_bid"], no_use, draws["nu"])

    pre_ability_w, n_missing = _pre_ability(cfg, draws, letters_on)
    pre_ability_bid = pre_ability_w[draws["worker_idx"]]
    edit_raw = cfg.edit_alpha + cfg.edit_beta * np.nan_to_num(pre_ability_bid) + cfg.edit_sd * draws["edit_z"]
    draws["edit_minutes"] = np.where(used, np.maximum(edit_raw, 0.0), 0.0)

    states = {}
    for name, use_vec, market_on, letters in (
        ("on_m1", used, True, letters_on),
        ("off_m1", no_use, True, letters_off),
        ("off_m0", no_use, False, letters_off),
        ("on_m0", used, False, letters_on),
    ):
        callback, offer = _state_outcomes(cfg, draws, use_vec, market_on, letters)
        states[name] = {"tailoring": letters, "callback": callback, "offer": offer}

    ledger = Ledger(
        states=states,
        post_mask=post,
        access=draws["access_bid"].astype(bool),
        job_ids=draws["job_codes"],
    )

    bids = pd.DataFrame(
        {
            "bid_id": np.arange(periods.shape[0], dtype=np.int64),
            "worker_id": draws["worker_idx"],
            "job_id": draws["job_codes"],
            "period": periods,
            "access": draws["access_bid"].astype(np.int8),
            "used_ai": used.astype(np.int8),
            "tailoring": letters_on,
            "wage_norm": draws["wage"],
            "rank_pct": _rank_percentiles(draws, cfg),
            "callback": states["on_m1"]["callback"],
            "offer": states["on_m1"]["offer"],
            "edit_minutes": draws["edit_minutes"],
            "pre_ability": pre_ability_bid,
        }
    )[BID_COLUMNS]
    # internal column, not part of the serialized schema
    bids["review"] = draws["review_bid"]

    workers = pd.DataFrame(
        {
            "worker_id": np.arange(cfg.n_workers, dtype=np.int64),
            "q": draws["q"],
            "access": draws["access"].astype(np.int8),
            "pre_ability": pre_ability_w,
        }
    )

    truth = _compute_truth(cfg, ledger, used, letters_on, letters_off)
    truth["workers_without_pre_bids"] = n_missing
    return Dataset(config=cfg, bids=bids, workers=workers, truth=truth, ledger=ledger if keep_ledger else None)


def _group_change(values_a, values_b, rows, job_ids):
    """Mean of (a - b) over rows, with a job-clustered standard error."""
    diff = (values_a[rows] - values_b[rows]).astype(float)
    jobs = job_ids[rows]
    n = diff.shape[0]
    if n == 0:
        return 0.0, 0.0
    est = diff.mean()
    resid = diff - est
    s = np.bincount(jobs, weights=resid)
    var = float((s**2).sum()) / n**2
    return float(est), math.sqrt(var)


def _compute_truth(cfg, ledger: Ledger, used, letters_on, letters_off) -> dict:
    post = ledger.post_mask
    acc = ledger.access & post
    ctl = ~ledger.access & post

    itt, itt_se = _group_change(letters_on, letters_off, acc, ledger.job_ids)
    if used.any():
        late = float((letters_on[used] - letters_off[used]).mean())
    else:
        late = 0.0
    used_share = float(used[acc].mean()) if acc.any() else 0.0

    decomposition = {}
    for outcome in ("offer", "callback", "tailoring"):
        on_m1 = np.asarray(ledger.states["on_m1"][outcome], dtype=float)
        off_m1 = np.asarray(ledger.states["off_m1"][outcome], dtype=float)
        off_m0 = np.asarray(ledger.states["off_m0"][outcome], dtype=float)
        direct, direct_se = _group_change(on_m1, off_m1, acc, ledger.job_ids)
        spill, spill_se = _group_change(on_m1, off_m1, ctl, ledger.job_ids)
        mkt_t, mkt_t_se = _group_change(off_m1, off_m0, acc, ledger.job_ids)
        mkt_c, mkt_c_se = _group_change(off_m1, off_m0, ctl, ledger.job_ids)
        tot_t, tot_t_se = _group_change(on_m1, off_m0, acc, ledger.job_ids)
        tot_c, tot_c_se = _group_change(on_m1, off_m0, ctl, ledger.job_ids)
        decomposition[outcome] = {
            "total": tot_t + tot_c,
            "direct": direct,
            "spillover": spill,
            "market_shift": mkt_t + mkt_c,
            "se": {
                "total": math.hypot(tot_t_se, tot_c_se),
                "direct": direct_se,
                "spillover": spill_se,
                "market_shift": math.hypot(mkt_t_se, mkt_c_se),
            },
        }

    return {
        "itt_tailoring": itt,
        "itt_tailoring_se": itt_se,
        "late_tailoring": late,
        "used_share_post_access": used_share,
        "decomposition": decomposition,
    }


def assign_outcomes(dataset: Dataset, regime: str) -> pd.DataFrame:
    """Redraw callbacks and offers for every bid under one belief regime.

    regime is 'pre_beliefs' or 'post_beliefs'. Returns a copy of the bids
    table with the outcome columns refilled; draws come from a dedicated
    substream so the call is deterministic.
    """
    if regime not in ("pre_beliefs", "post_beliefs"):
        raise InputError(f"regime must be 'pre_beliefs' or 'post_beliefs', got {regime!r}")
    cfg = dataset.config
    mp = employer_params(cfg, "post" if regime == "post_beliefs" else "pre")
    bids = dataset.bids.sort_values(["job_id", "bid_id"], kind="stable").reset_index(drop=True)
    if cfg.review_noise is not None and "review" not in bids.columns:
        raise InputError("review-aware outcomes need the in-memory review column")
    review = bids["review"].to_numpy() if "review" in bids.columns else np.zeros(bids.shape[0])
    util = np.asarray(
        employer_expected_q(bids["tailoring"].to_numpy(), review, mp, cfg.review_noise),
        dtype=float,
    )
    if cfg.edit_outcome_effect != 0.0:
        util = util + cfg.edit_outcome_effect * bids["edit_minutes"].to_numpy() * bids[
            "used_ai"
        ].to_numpy()
    job_codes = pd.factorize(bids["job_id"], sort=True)[0]
    n_jobs = int(job_codes.max()) + 1
    rng = substream(cfg.seed, "assign_outcomes", regime)
    u_cb = rng.random(bids.shape[0])
    u_of = rng.random(n_jobs)
    callback, offer = _draw_outcomes(
        cfg, util, job_codes, n_jobs, u_cb, u_of, np.zeros(n_jobs)
    )
    out = bids.copy()
    out["callback"] = callback
    out["offer"] = offer
    return out


def decompose_estimand(cfg: SimConfig, outcome: str = "offer") -> dict:
    """Counterfactual-state decomposition of the rollout's effect.

    Simulates the market states with common random numbers and returns
    {total, direct, spillover, market_shift, se}; the identity
    total = direct + spillover + market_shift holds exactly because each
    term telescopes between the same per-bid state outcomes.
    """
    if outcome not in ("offer", "callback", "tailoring"):
        raise InputError(f"unknown outcome {outcome!r}")
    ds = generate_market(cfg)
    return dict(ds.truth["decomposition"][outcome])


def summarize(dataset: Dataset) -> dict:
    """Adoption and activity summary of a generated dataset."""
    bids = dataset.bids
    cfg = dataset.config
    post = bids["period"] >= cfg.tool_period
    eligible = post & (bids["access"] == 1)
    per_worker = (
        bids.loc[eligible].groupby("worker_id")["used_ai"].mean()
        if eligible.any()
        else pd.Series(dtype=float)
    )
    bins = np.linspace(0.0, 1.0, 11)
    hist, _ = np.histogram(per_worker.to_numpy(), bins=bins)
    weekly = bids.groupby("period").size()
    return {
        "adoption_rate_bins": {
            f"{bins[i]:.1f}-{bins[i + 1]:.1f}": int(hist[i]) for i in range(10)
        },
        "workers_with_access_and_post_bids": int(per_worker.shape[0]),
        "share_tried_at_least_once": float((per_worker > 0).mean()) if per_worker.shape[0] else 0.0,
        "share_ai_bids_among_eligible": float(bids.loc[eligible, "used_ai"].mean())
        if eligible.any()
        else 0.0,
        "share_ai_bids_overall": float(bids["used_ai"].mean()),
        "weekly_bid_counts": {int(k): int(v) for k, v in weekly.items()},
    }


def _format_float(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x:.12g}"


def write_bids_csv(path, bids: pd.DataFrame) -> None:
    """Serialize the bid table with a fixed header and stable formatting."""
    int_cols = {"bid_id", "worker_id", "job_id", "period", "access", "used_ai", "callback", "offer"}
    lines = [",".join(BID_COLUMNS)]
    cols = [bids[c].to_numpy() for c in BID_COLUMNS]
    for row in zip(*cols):
        parts = [
            str(int(v)) if c in int_cols else _format_float(float(v))
            for c, v in zip(BID_COLUMNS, row)
        ]
        lines.append(",".join(parts))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_bids_csv(path) -> pd.DataFrame:
    """Load a bid table, validating the schema by column name."""
    df = pd.read_csv(path)
    missing = [c for c in BID_COLUMNS if c not in df.columns]
    if missing:
        raise InputError(f"bids file missing column(s): {', '.join(missing)}")
    return df[BID_COLUMNS]


def write_truth_json(path, dataset: Dataset) -> None:
    payload = {
        "truth": dataset.truth,
        "config": {
            **{k: v for k, v in asdict(dataset.config).items() if k != "model"},
            "model": asdict(dataset.config.model),
        },
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
