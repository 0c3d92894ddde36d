"""Estimator validation against the simulator's known truth.

Every statistical assertion is a fixed-seed draw from a DGP whose true
effect is known (or recorded in the dataset's truth), checked at the
tolerance the design implies (2 clustered standard errors unless noted).
"""

import numpy as np
import pandas as pd
import pytest

from signalmarket.errors import CollinearityError, InputError
from signalmarket.market import SimConfig, generate_market
from signalmarket.panel import dense_dummy_ols, encode_groups
from signalmarket.params import ModelParams
from signalmarket.regressions import (
    RegressionSpec,
    did_itt,
    editing_regressions,
    event_study,
    heterogeneity,
    late_tsls,
    prepare_panel,
    run_spec,
    signal_power,
    write_event_csv,
)


def make_data(**over):
    base = dict(
        n_workers=800,
        n_jobs=4000,
        applicants_per_job=5,
        n_periods=16,
        # the technology shift lands mid-month (weeks 4..7 form month -1),
        # which is what identifies its coefficient in the event study
        gpt_period=6,
        tool_period=8,
        access_share=0.5,
        compliance=0.5,
        gpt_shift_treated=0.12,
        gpt_shift_control=0.04,
        seed=101,
    )
    base.update(over)
    cfg = SimConfig(**base)
    return cfg, generate_market(cfg, keep_ledger=False).bids


class TestDidItt:
    def test_null_dgp_placebo(self):
        cfg, bids = make_data(
            model=ModelParams(A=0.0), gpt_shift_treated=0.0, gpt_shift_control=0.0, seed=7
        )
        res = did_itt(bids, cfg.tool_period, cfg.gpt_period)
        assert abs(res.tstat("post_ai:access")) < 2

    def test_gpt_correction_removes_confound(self):
        # no tool effect, but a differential technology shift one month earlier
        cfg, bids = make_data(
            model=ModelParams(A=0.0),
            gpt_shift_treated=0.3,
            gpt_shift_control=0.0,
            seed=13,
        )
        res = did_itt(bids, cfg.tool_period, cfg.gpt_period)
        assert abs(res.tstat("post_ai:access")) < 2
        assert res.coefficients["post_gpt:access"] == pytest.approx(
            0.3, abs=2 * res.se_clustered["post_gpt:access"]
        )

    def test_omitting_gpt_control_biases_by_predicted_amount(self):
        cfg, bids = make_data(
            model=ModelParams(A=0.0),
            gpt_shift_treated=0.3,
            gpt_shift_control=0.0,
            seed=13,
        )
        res = did_itt(bids, cfg.tool_period, cfg.gpt_period, include_gpt_control=False)
        # balanced-panel algebra: bias = gap * (pre-technology weeks / pre-tool weeks)
        predicted = 0.3 * cfg.gpt_period / cfg.tool_period
        beta = res.coefficients["post_ai:access"]
        assert beta == pytest.approx(predicted, abs=2 * res.se_clustered["post_ai:access"])

    def test_recovers_itt_and_truth(self):
        cfg, bids = make_data(seed=19)
        res = did_itt(bids, cfg.tool_period, cfg.gpt_period)
        truth = cfg.model.A * cfg.compliance
        assert res.coefficients["post_ai:access"] == pytest.approx(
            truth, abs=2 * res.se_clustered["post_ai:access"]
        )

    def test_empty_cell_detected(self):
        cfg, bids = make_data(seed=23)
        pre_only = bids[bids["period"] < cfg.tool_period]
        with pytest.raises(InputError, match="post"):
            did_itt(pre_only, cfg.tool_period, cfg.gpt_period)


class TestLate:
    def test_perfect_compliance_wald_identity(self):
        cfg, bids = make_data(compliance=1.0, seed=29)
        itt = did_itt(bids, cfg.tool_period, cfg.gpt_period)
        late = late_tsls(bids, cfg.tool_period, cfg.gpt_period)
        assert late.coefficients["used_ai"] == pytest.approx(
            itt.coefficients["post_ai:access"], abs=1e-10
        )
        assert late.first_stage_F > 1e6

    def test_partial_compliance_recovery(self):
        cfg, bids = make_data(compliance=0.2, n_workers=1200, n_jobs=6000, seed=31)
        late = late_tsls(bids, cfg.tool_period, cfg.gpt_period)
        itt = did_itt(bids, cfg.tool_period, cfg.gpt_period)
        assert late.coefficients["used_ai"] == pytest.approx(
            cfg.model.A, abs=2 * late.se_clustered["used_ai"]
        )
        assert itt.coefficients["post_ai:access"] == pytest.approx(
            cfg.compliance * late.coefficients["used_ai"],
            abs=2 * itt.se_clustered["post_ai:access"],
        )
        assert late.first_stage_F > 100


class TestEventStudy:
    def test_null_dgp_flat(self):
        cfg, bids = make_data(
            model=ModelParams(A=0.0), gpt_shift_treated=0.0, gpt_shift_control=0.0, seed=37
        )
        res = event_study(bids, cfg.tool_period, cfg.gpt_period)
        for row in res.extra["event"]:
            if row["k"] != -1:
                assert abs(row["beta"]) < 3.3 * row["se"]

    def test_constant_effect_pattern(self):
        cfg, bids = make_data(seed=41)
        res = event_study(bids, cfg.tool_period, cfg.gpt_period)
        effect = cfg.model.A * cfg.compliance
        for row in res.extra["event"]:
            if row["k"] >= 0:
                assert row["beta"] == pytest.approx(effect, abs=3 * row["se"])
            elif row["k"] != -1:
                assert abs(row["beta"]) < 3 * row["se"]

    def test_taper_reproduced(self):
        cfg, bids = make_data(
            n_periods=24, tool_effect_schedule=(1.0, 1.0, 0.0, 0.0), seed=43
        )
        res = event_study(bids, cfg.tool_period, cfg.gpt_period)
        rows = {r["k"]: r for r in res.extra["event"]}
        effect = cfg.model.A * cfg.compliance
        for k in (0, 1):
            assert rows[k]["beta"] == pytest.approx(effect, abs=3 * rows[k]["se"])
        for k in (2, 3):
            assert abs(rows[k]["beta"]) < 3 * rows[k]["se"]

    def test_reference_pinned_at_zero(self):
        cfg, bids = make_data(seed=47)
        res = event_study(bids, cfg.tool_period, cfg.gpt_period)
        ref = [r for r in res.extra["event"] if r["k"] == -1]
        assert ref == [{"k": -1, "beta": 0.0, "se": 0.0}]

    def test_reference_month_must_exist(self):
        cfg, bids = make_data(seed=53)
        with pytest.raises(InputError, match="reference"):
            event_study(bids, cfg.tool_period, cfg.gpt_period, reference_month=-99)

    def test_csv_output(self, tmp_path):
        cfg, bids = make_data(seed=59)
        res = event_study(bids, cfg.tool_period, cfg.gpt_period)
        path = tmp_path / "event.csv"
        write_event_csv(path, res)
        lines = path.read_text().splitlines()
        assert lines[0] == "k,beta,se,ci_lo,ci_hi"
        assert len(lines) == 1 + len(res.extra["event"])


class TestHeterogeneity:
    def test_ceiling_dgp_negative_triple(self):
        cfg, bids = make_data(ai_mode="ceiling", tool_ceiling=1.0, compliance=0.8, seed=61)
        res = heterogeneity(bids, cfg.tool_period, cfg.gpt_period)
        t = res.tstat("post_ai:access:pre_ability")
        assert t < -2

    def test_uniform_effect_null_triple(self):
        cfg, bids = make_data(seed=67)
        res = heterogeneity(bids, cfg.tool_period, cfg.gpt_period)
        assert abs(res.tstat("post_ai:access:pre_ability")) < 2

    def test_excluded_workers_counted(self):
        cfg, bids = make_data(seed=71)
        n_nan = bids.loc[bids["pre_ability"].isna(), "worker_id"].nunique()
        res = heterogeneity(bids, cfg.tool_period, cfg.gpt_period)
        assert res.extra["workers_excluded_no_pre_ability"] == n_nan


class TestSignalPower:
    def belief_switch_data(self, seed=73):
        return make_data(
            model=ModelParams(mu0=0.0, tau2=1.0, sigma2=1.0, p=0.5, A=2.0, N=5),
            n_workers=1500,
            n_jobs=8000,
            access_share=0.7,
            compliance=0.8,
            review_noise=1.0,
            seed=seed,
        )

    def test_belief_switch_flattens_tailoring(self):
        cfg, bids = self.belief_switch_data()
        res = signal_power(bids, cfg.tool_period, cfg.gpt_period, regressor="tailoring", outcome="callback")
        assert res.tstat("post_ai:tailoring") < -2

    def test_belief_switch_boosts_rank(self):
        cfg, bids = self.belief_switch_data()
        res = signal_power(bids, cfg.tool_period, cfg.gpt_period, regressor="rank_pct", outcome="callback")
        assert res.tstat("post_ai:rank_pct") > 2

    def test_static_beliefs_placebo(self):
        cfg, bids = self.belief_switch_data(seed=79)
        cfg2 = SimConfig(**{**cfg.__dict__, "beliefs": "static", "seed": 79})
        bids2 = generate_market(cfg2, keep_ledger=False).bids
        res = signal_power(bids2, cfg2.tool_period, cfg2.gpt_period, regressor="tailoring", outcome="callback")
        assert abs(res.tstat("post_ai:tailoring")) < 2

    def test_event_form_runs(self):
        cfg, bids = self.belief_switch_data(seed=83)
        res = signal_power(
            bids, cfg.tool_period, cfg.gpt_period, regressor="tailoring", outcome="callback", event=True
        )
        assert any(r["k"] >= 0 for r in res.extra["event"])

    def test_argument_validation(self):
        cfg, bids = make_data(seed=89)
        with pytest.raises(InputError):
            signal_power(bids, cfg.tool_period, cfg.gpt_period, regressor="wage_norm")
        with pytest.raises(InputError):
            signal_power(bids, cfg.tool_period, cfg.gpt_period, outcome="tailoring")


class TestEditing:
    def test_ability_slope_recovered(self):
        cfg, bids = make_data(compliance=0.8, edit_beta=0.6, edit_alpha=3.0, edit_sd=1.0, seed=97)
        res = editing_regressions(bids, cfg.tool_period)["edit_on_ability"]
        assert res.coefficients["pre_ability"] == pytest.approx(
            0.6, abs=2 * res.se_clustered["pre_ability"]
        )

    def test_outcome_placebo_when_editing_is_neutral(self):
        cfg, bids = make_data(compliance=0.8, seed=101)
        out = editing_regressions(bids, cfg.tool_period)
        assert abs(out["offer_on_edit"].tstat("edit_minutes")) < 2
        assert abs(out["callback_on_edit"].tstat("edit_minutes")) < 2

    def test_positive_editing_effect_detected(self):
        cfg, bids = make_data(
            compliance=0.8, edit_outcome_effect=0.08, n_jobs=6000, seed=103
        )
        out = editing_regressions(bids, cfg.tool_period)
        assert out["offer_on_edit"].tstat("edit_minutes") > 2
        assert out["callback_on_edit"].tstat("edit_minutes") > 2

    def test_empty_sample_rejected(self):
        cfg, bids = make_data(compliance=0.0, seed=107)
        with pytest.raises(InputError):
            editing_regressions(bids, cfg.tool_period)


class TestRunSpec:
    def test_matches_dense_dummy_oracle(self):
        cfg, bids = make_data(n_workers=60, n_jobs=250, applicants_per_job=3, seed=109)
        panel = prepare_panel(bids, cfg.tool_period, cfg.gpt_period)
        spec = RegressionSpec(outcome="tailoring", regressors=["post_ai:access", "wage_norm"])
        res = run_spec(panel, spec)
        sub = panel
        X = np.column_stack(
            [
                (sub["post_ai"] * sub["access"]).to_numpy(dtype=float),
                sub["wage_norm"].to_numpy(dtype=float),
            ]
        )
        groups = [encode_groups(sub["worker_id"]), encode_groups(sub["period"])]
        dense = dense_dummy_ols(
            sub["tailoring"].to_numpy(), X, groups, sub["worker_id"].to_numpy(),
            ["post_ai:access", "wage_norm"],
        )
        assert res.coefficients["post_ai:access"] == pytest.approx(
            dense.coefficients["post_ai:access"], abs=1e-8
        )

    def test_unknown_column_reported(self):
        cfg, bids = make_data(seed=113)
        spec = RegressionSpec(outcome="tailoring", regressors=["nope:access"], tool_period=8, gpt_period=4)
        with pytest.raises(InputError, match="nope"):
            run_spec(bids, spec)

    def test_collinear_expression_named(self):
        cfg, bids = make_data(seed=127)
        panel = prepare_panel(bids, cfg.tool_period, cfg.gpt_period)
        spec = RegressionSpec(
            outcome="tailoring", regressors=["post_ai:access", "access:post_ai"]
        )
        with pytest.raises(CollinearityError):
            run_spec(panel, spec)
