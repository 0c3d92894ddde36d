"""Named panel specifications over the bid table.

Every specification funnels through one declarative carrier
(RegressionSpec) and one fitting path: build product columns, drop
singleton fixed-effect groups, absorb the fixed effects by within
transformation, then run OLS or 2SLS with CR1 cluster-robust errors.

Time works in integer weeks. Week fixed effects are the period dimension;
dynamic specifications group weeks into months relative to the tool
launch, with month -1 (the technology-shift window) as the omitted
reference.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import InputError
from .panel import EstimateResult, Z95, encode_groups, ols, singleton_mask, tsls, within_transform

DEFAULT_CONTROLS = ("wage_norm", "rank_pct")


@dataclass
class RegressionSpec:
    """Declarative description of one panel regression.

    regressors are column names or ':'-joined product expressions over
    columns (after derived indicators are attached). instruments maps an
    endogenous column to its instrument expression; a nonempty map turns
    the fit into 2SLS.
    """

    outcome: str
    regressors: list
    fe_dims: tuple = ("worker_id", "period")
    instruments: dict | None = None
    cluster_dim: str = "worker_id"
    reference_period: int = -1
    tool_period: int | None = None
    gpt_period: int | None = None
    weeks_per_month: int = 4
    extra_meta: dict = field(default_factory=dict)


def prepare_panel(df: pd.DataFrame, tool_period: int, gpt_period: int,
                  weeks_per_month: int = 4) -> pd.DataFrame:
    """Attach derived indicator columns used by the specifications."""
    out = df.copy()
    period = out["period"].to_numpy()
    out["post_ai"] = (period >= tool_period).astype(float)
    out["post_gpt"] = (period >= gpt_period).astype(float)
    out["event_month"] = np.floor((period - tool_period) / weeks_per_month).astype(int)
    return out


def _column(df: pd.DataFrame, expr: str) -> np.ndarray:
    parts = expr.split(":")
    col = np.ones(df.shape[0])
    for p in parts:
        if p not in df.columns:
            raise InputError(f"unknown column {p!r} in expression {expr!r}")
        col = col * df[p].to_numpy(dtype=float)
    return col


def run_spec(df: pd.DataFrame, spec: RegressionSpec) -> EstimateResult:
    """Fit one specification; the single entry point for all estimators."""
    if spec.tool_period is not None:
        df = prepare_panel(df, spec.tool_period, spec.gpt_period, spec.weeks_per_month)
    names = list(spec.regressors)
    endog_names = list(spec.instruments) if spec.instruments else []
    exog_names = [n for n in names if n not in endog_names]

    y = df[spec.outcome].to_numpy(dtype=float)
    cols = {n: _column(df, n) for n in names}
    inst_cols = (
        {k: _column(df, v) for k, v in spec.instruments.items()} if spec.instruments else {}
    )

    stack = [y] + [cols[n] for n in endog_names] + [cols[n] for n in exog_names]
    stack += [inst_cols[k] for k in endog_names]
    M = np.column_stack(stack)

    dropped = 0
    keep = np.ones(df.shape[0], dtype=bool)
    if spec.fe_dims:
        groups = [encode_groups(df[d].to_numpy()) for d in spec.fe_dims]
        keep = singleton_mask(groups)
        dropped = int((~keep).sum())
        M = M[keep]
        groups = [encode_groups(df[d].to_numpy()[keep]) for d in spec.fe_dims]
        M = within_transform(M, groups)
    else:
        M = np.column_stack([M, np.ones(M.shape[0])])
        exog_names = exog_names + ["const"]

    clusters = df[spec.cluster_dim].to_numpy()[keep]
    n_endog = len(endog_names)
    yt = M[:, 0]
    endog = M[:, 1 : 1 + n_endog]
    exog = M[:, 1 + n_endog : 1 + n_endog + len(exog_names)]
    inst = M[:, 1 + n_endog + len(exog_names) :]

    if n_endog:
        res = tsls(
            yt,
            endog,
            inst,
            exog,
            clusters,
            endog_names,
            [spec.instruments[k] for k in endog_names],
            exog_names,
        )
    else:
        res = ols(yt, exog, clusters, exog_names)
    res.dropped_singletons = dropped
    res.extra.update(spec.extra_meta)
    return res


def _require_cells(df: pd.DataFrame, tool_period: int) -> None:
    post = df["period"] >= tool_period
    for a in (0, 1):
        for label, mask in (("pre", ~post), ("post", post)):
            if not ((df["access"] == a) & mask).any():
                raise InputError(f"empty cell: access={a}, {label}-rollout")


def did_itt(df: pd.DataFrame, tool_period: int, gpt_period: int, *,
            outcome: str = "tailoring", include_gpt_control: bool = True,
            controls=DEFAULT_CONTROLS, cluster: str = "worker_id") -> EstimateResult:
    """Two-way fixed-effects access-group contrast around the tool launch.

    The coefficient on post_ai:access is the intention-to-treat effect of
    gaining access; post_gpt:access absorbs the earlier technology's
    differential level shift.
    """
    _require_cells(df, tool_period)
    regs = ["post_ai:access"]
    if include_gpt_control:
        regs.append("post_gpt:access")
    spec = RegressionSpec(
        outcome=outcome,
        regressors=regs + list(controls),
        cluster_dim=cluster,
        tool_period=tool_period,
        gpt_period=gpt_period,
    )
    return run_spec(df, spec)


def late_tsls(df: pd.DataFrame, tool_period: int, gpt_period: int, *,
              outcome: str = "tailoring", include_gpt_control: bool = True,
              controls=DEFAULT_CONTROLS, cluster: str = "worker_id") -> EstimateResult:
    """Per-use effect: instrument tool usage with post_ai:access."""
    _require_cells(df, tool_period)
    regs = ["used_ai"]
    if include_gpt_control:
        regs.append("post_gpt:access")
    spec = RegressionSpec(
        outcome=outcome,
        regressors=regs + list(controls),
        instruments={"used_ai": "post_ai:access"},
        cluster_dim=cluster,
        tool_period=tool_period,
        gpt_period=gpt_period,
    )
    return run_spec(df, spec)


def _month_dummies(df: pd.DataFrame, reference: int, interact_with: str):
    months = np.sort(df["event_month"].unique())
    if reference not in months:
        raise InputError(f"reference month {reference} absent from the panel")
    if (months <= -1).sum() < 2 or (months >= 0).sum() < 2:
        raise InputError("event study needs at least 2 pre months and 2 post months")
    exprs = []
    out = df
    for m in months:
        if m == reference:
            continue
        name = f"month_{m}"
        out = out.assign(**{name: (out["event_month"] == m).astype(float)})
        exprs.append(f"{name}:{interact_with}")
    return out, exprs, [int(m) for m in months]


def event_study(df: pd.DataFrame, tool_period: int, gpt_period: int, *,
                outcome: str = "tailoring", weeks_per_month: int = 4,
                reference_month: int = -1, controls=DEFAULT_CONTROLS,
                cluster: str = "worker_id", interact_with: str = "access") -> EstimateResult:
    """Month-by-month interaction coefficients with the launch-eve month omitted.

    interact_with is 'access' for the dynamic treatment-effect form; pass
    a regressor name (e.g. 'tailoring') for the dynamic signal-power form.
    The result's extra['event'] lists (month, beta, se) including the
    reference month pinned at zero.
    """
    panel = prepare_panel(df, tool_period, gpt_period, weeks_per_month)
    panel, exprs, months = _month_dummies(panel, reference_month, interact_with)
    spec = RegressionSpec(
        outcome=outcome,
        regressors=exprs + [f"post_gpt:{interact_with}"] + list(controls),
        cluster_dim=cluster,
        reference_period=reference_month,
        extra_meta={"reference_month": reference_month},
    )
    res = run_spec(panel, spec)
    rows = []
    for m in months:
        if m == reference_month:
            rows.append({"k": m, "beta": 0.0, "se": 0.0})
        else:
            name = f"month_{m}:{interact_with}"
            rows.append({"k": m, "beta": res.coefficients[name], "se": res.se_clustered[name]})
    res.extra["event"] = rows
    return res


def heterogeneity(df: pd.DataFrame, tool_period: int, gpt_period: int, *,
                  outcome: str = "tailoring", include_gpt_control: bool = True,
                  controls=DEFAULT_CONTROLS, cluster: str = "worker_id") -> EstimateResult:
    """Triple interaction with pre-rollout writing ability.

    pre_ability is re-standardized to mean 0, sd 1 across the workers
    present in the sample; workers with no pre-rollout bids are excluded
    and their count reported in extra['workers_excluded_no_pre_ability'].
    A negative triple coefficient means the tool substitutes for ability.

    post_ai:pre_ability enters as a control: pre_ability is measured from
    pre-rollout letters, so its noise mean-reverts after the launch for
    both groups alike, and without the control that common reversion
    would load onto the access-specific triple term.
    """
    has = df["pre_ability"].notna().to_numpy()
    excluded = int(df.loc[~has, "worker_id"].nunique())
    sub = df.loc[has].copy()
    if sub.empty:
        raise InputError("no workers with pre-rollout bids")
    per_worker = sub.groupby("worker_id")["pre_ability"].first()
    mu, sd = per_worker.mean(), per_worker.std(ddof=0)
    if sd == 0:
        raise InputError("pre_ability has no variation across workers")
    sub["pre_ability"] = (sub["pre_ability"] - mu) / sd
    regs = ["post_ai:access", "post_ai:access:pre_ability", "post_ai:pre_ability"]
    if include_gpt_control:
        regs.append("post_gpt:access")
    spec = RegressionSpec(
        outcome=outcome,
        regressors=regs + list(controls),
        cluster_dim=cluster,
        tool_period=tool_period,
        gpt_period=gpt_period,
        extra_meta={"workers_excluded_no_pre_ability": excluded},
    )
    return run_spec(sub, spec)


def signal_power(df: pd.DataFrame, tool_period: int, gpt_period: int, *,
                 regressor: str = "tailoring", outcome: str = "callback",
                 event: bool = False, weeks_per_month: int = 4,
                 cluster: str = "worker_id") -> EstimateResult:
    """How strongly a screening signal predicts outcomes before vs after launch.

    The coefficient on post_ai:<regressor> measures the change in the
    signal's predictive power. With event=True the month-by-month
    interaction form is fitted instead.
    """
    if regressor not in ("tailoring", "rank_pct"):
        raise InputError(f"regressor must be 'tailoring' or 'rank_pct', got {regressor!r}")
    if outcome not in ("callback", "offer"):
        raise InputError(f"outcome must be 'callback' or 'offer', got {outcome!r}")
    controls = ["wage_norm", "rank_pct"] if regressor == "tailoring" else ["wage_norm"]
    if event:
        return event_study(
            df,
            tool_period,
            gpt_period,
            outcome=outcome,
            weeks_per_month=weeks_per_month,
            controls=controls,
            cluster=cluster,
            interact_with=regressor,
        )
    spec = RegressionSpec(
        outcome=outcome,
        regressors=[regressor, f"post_ai:{regressor}"] + controls,
        cluster_dim=cluster,
        tool_period=tool_period,
        gpt_period=gpt_period,
    )
    return run_spec(df, spec)


def editing_regressions(df: pd.DataFrame, tool_period: int, *,
                        max_minutes: float = 60.0) -> dict:
    """Editing-time regressions on the tool-using sample.

    Restricted to bids that used the tool with edit_minutes below the cap.
    Returns three results: the worker-level regression of average editing
    time on standardized pre-rollout ability, and bid-level regressions of
    offer and callback on editing time with worker fixed effects.
    """
    sample = df[(df["used_ai"] == 1) & (df["edit_minutes"] < max_minutes)].copy()
    if sample.empty:
        raise InputError("no tool-using bids under the editing-time cap")

    per_worker = sample.groupby("worker_id").agg(
        mean_minutes=("edit_minutes", "mean"), pre_ability=("pre_ability", "first")
    )
    per_worker = per_worker.dropna(subset=["pre_ability"])
    if per_worker.shape[0] < 3:
        raise InputError("too few workers with pre-rollout bids for the editing regression")
    worker_df = per_worker.reset_index()
    ability = RegressionSpec(
        outcome="mean_minutes",
        regressors=["pre_ability"],
        fe_dims=(),
        cluster_dim="worker_id",
    )
    results = {"edit_on_ability": run_spec(worker_df, ability)}

    for out_name in ("offer", "callback"):
        spec = RegressionSpec(
            outcome=out_name,
            regressors=["edit_minutes", "wage_norm", "rank_pct"],
            fe_dims=("worker_id",),
            cluster_dim="worker_id",
        )
        results[f"{out_name}_on_edit"] = run_spec(sample, spec)
    return results


def write_event_csv(path, result: EstimateResult) -> None:
    """Event-study rows k,beta,se,ci_lo,ci_hi for plotting."""
    rows = result.extra.get("event")
    if rows is None:
        raise InputError("result carries no event-study coefficients")
    lines = ["k,beta,se,ci_lo,ci_hi"]
    for row in rows:
        lo = row["beta"] - Z95 * row["se"]
        hi = row["beta"] + Z95 * row["se"]
        lines.append(f"{row['k']},{row['beta']:.10g},{row['se']:.10g},{lo:.10g},{hi:.10g}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
