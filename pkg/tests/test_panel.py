"""Tests for the fixed-effect absorption and OLS/2SLS engine.

Oracles: hand demeaning, dense dummy regressions via the same QR path but
with explicit columns, difference-in-means identities, and the Wald ratio
for just-identified IV.
"""

import numpy as np
import pytest

from signalmarket.errors import CollinearityError, InputError, NumericalError, WeakInstrumentError
from signalmarket.panel import (
    EstimateResult,
    dense_dummy_ols,
    encode_groups,
    ols,
    singleton_mask,
    tsls,
    within_transform,
)


def random_unbalanced_panel(rng, n_workers=40, n_periods=8, k=3):
    rows = []
    for w in range(n_workers):
        periods = rng.choice(n_periods, size=rng.integers(2, n_periods + 1), replace=False)
        rows.extend((w, t) for t in periods)
    rows = np.array(rows)
    n = rows.shape[0]
    X = rng.standard_normal((n, k))
    worker_fe = rng.standard_normal(n_workers)
    period_fe = rng.standard_normal(n_periods)
    beta = rng.standard_normal(k)
    y = X @ beta + worker_fe[rows[:, 0]] + period_fe[rows[:, 1]] + 0.1 * rng.standard_normal(n)
    return y, X, rows[:, 0], rows[:, 1]


class TestWithinTransform:
    def test_single_dimension_exact_demeaning(self):
        rng = np.random.default_rng(0)
        X = rng.standard_normal((60, 2))
        codes = rng.integers(0, 5, size=60)
        out = within_transform(X, [codes])
        manual = X.copy()
        for g in range(5):
            manual[codes == g] -= manual[codes == g].mean(axis=0)
        np.testing.assert_allclose(out, manual, atol=1e-14)

    def test_balanced_two_way_closed_form(self):
        rng = np.random.default_rng(1)
        n_i, n_t = 12, 7
        X = rng.standard_normal((n_i * n_t, 3))
        workers = np.repeat(np.arange(n_i), n_t)
        periods = np.tile(np.arange(n_t), n_i)
        out = within_transform(X, [workers, periods])
        M = X.reshape(n_i, n_t, 3)
        closed = M - M.mean(axis=1, keepdims=True) - M.mean(axis=0, keepdims=True) + M.mean(axis=(0, 1), keepdims=True)
        np.testing.assert_allclose(out, closed.reshape(-1, 3), atol=1e-10)

    def test_unbalanced_matches_dense_projection(self):
        rng = np.random.default_rng(2)
        y, X, workers, periods = random_unbalanced_panel(rng, n_workers=50, n_periods=8)
        out = within_transform(X, [workers, periods])
        dummies = [np.ones((X.shape[0], 1))]
        for codes in (workers, periods):
            for lv in np.unique(codes)[1:]:
                dummies.append((codes == lv).astype(float)[:, None])
        D = np.hstack(dummies)
        proj = X - D @ np.linalg.lstsq(D, X, rcond=None)[0]
        np.testing.assert_allclose(out, proj, atol=1e-8)

    def test_output_orthogonal_to_groups(self):
        rng = np.random.default_rng(3)
        _, X, workers, periods = random_unbalanced_panel(rng)
        out = within_transform(X, [workers, periods])
        for codes in (workers, periods):
            for j in range(X.shape[1]):
                means = np.bincount(codes, weights=out[:, j]) / np.bincount(codes)
                assert np.abs(means).max() < 1e-9

    def test_requires_dimensions(self):
        with pytest.raises(InputError):
            within_transform(np.ones((4, 1)), [])


class TestSingletons:
    def test_stable_case_kept(self):
        workers = np.array([0, 0, 1, 1, 2])
        periods = np.array([0, 1, 0, 1, 1])
        keep = singleton_mask([workers, periods])
        assert keep.tolist() == [True, True, True, True, False]

    def test_cascading_drop(self):
        # worker 1 and period 2 are singletons; removing them leaves every
        # remaining row alone in some group, so the cascade clears the panel.
        workers = np.array([0, 0, 1, 2, 2])
        periods = np.array([0, 1, 1, 0, 2])
        keep = singleton_mask([workers, periods])
        assert not keep.any()


class TestOls:
    def test_exact_fit_without_noise(self):
        rng = np.random.default_rng(4)
        X = rng.standard_normal((50, 3))
        beta = np.array([1.5, -2.0, 0.25])
        y = X @ beta
        res = ols(y, X, rng.integers(0, 10, size=50), ["a", "b", "c"])
        np.testing.assert_allclose([res.coefficients[k] for k in "abc"], beta, atol=1e-12)

    def test_did_of_means_identity(self):
        rng = np.random.default_rng(5)
        group = np.repeat([0, 1], 40)
        post = np.tile(np.repeat([0, 1], 20), 2)
        y = 0.3 * group + 0.1 * post + 0.7 * group * post + rng.standard_normal(80)
        X = np.column_stack([np.ones(80), group, post, group * post])
        res = ols(y, X, np.arange(80), ["const", "g", "t", "gt"])
        cells = {(gv, tv): y[(group == gv) & (post == tv)].mean() for gv in (0, 1) for tv in (0, 1)}
        did = (cells[1, 1] - cells[1, 0]) - (cells[0, 1] - cells[0, 0])
        assert res.coefficients["gt"] == pytest.approx(did, abs=1e-12)

    def test_cr1_equals_hc1_with_singleton_clusters(self):
        rng = np.random.default_rng(6)
        n, k = 120, 2
        X = rng.standard_normal((n, k))
        y = X @ np.array([1.0, -1.0]) + rng.standard_normal(n)
        res = ols(y, X, np.arange(n), ["a", "b"])
        beta = np.linalg.solve(X.T @ X, X.T @ y)
        e = y - X @ beta
        bread = np.linalg.inv(X.T @ X)
        meat = (X * e[:, None]).T @ (X * e[:, None])
        hc1 = n / (n - k) * bread @ meat @ bread
        np.testing.assert_allclose(
            [res.se_clustered["a"], res.se_clustered["b"]], np.sqrt(np.diag(hc1)), rtol=1e-12
        )

    def test_collinearity_reported_by_name(self):
        rng = np.random.default_rng(7)
        x = rng.standard_normal(30)
        X = np.column_stack([x, 2 * x, rng.standard_normal(30)])
        with pytest.raises(CollinearityError) as exc:
            ols(x + 1.0, X, np.arange(30) % 5, ["x", "x_twice", "z"])
        assert set(exc.value.columns) & {"x", "x_twice"}

    def test_cluster_count_guard(self):
        with pytest.raises(InputError):
            ols(np.arange(4.0), np.ones((4, 1)), np.zeros(4), ["const"])


class TestFwlEquivalence:
    def test_absorbed_equals_dense_dummies(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            y, X, workers, periods = random_unbalanced_panel(rng, n_workers=30, n_periods=6)
            groups = [encode_groups(workers), encode_groups(periods)]
            Z = within_transform(np.column_stack([y, X]), groups)
            res_fe = ols(Z[:, 0], Z[:, 1:], workers, ["a", "b", "c"])
            res_dense = dense_dummy_ols(y, X, groups, workers, ["a", "b", "c"])
            for kname in ("a", "b", "c"):
                assert res_fe.coefficients[kname] == pytest.approx(
                    res_dense.coefficients[kname], abs=1e-8
                )


class TestTsls:
    def test_perfect_compliance_equals_ols(self):
        rng = np.random.default_rng(9)
        n = 400
        z = (rng.random(n) < 0.5).astype(float)
        y = 0.4 + 1.3 * z + rng.standard_normal(n)
        const = np.ones((n, 1))
        res_iv = tsls(y, z, z, const, rng.integers(0, 40, n), ["d"], ["z"], ["const"])
        res_ols = ols(y, np.column_stack([z, const]), rng.integers(0, 40, n), ["d", "const"])
        assert res_iv.coefficients["d"] == pytest.approx(res_ols.coefficients["d"], abs=1e-10)
        assert res_iv.first_stage_F > 1e6

    def test_wald_ratio_identity(self):
        rng = np.random.default_rng(10)
        n = 600
        z = (rng.random(n) < 0.5).astype(float)
        d = ((rng.random(n) < 0.3) | (z == 1) & (rng.random(n) < 0.5)).astype(float)
        y = 0.2 + 0.9 * d + rng.standard_normal(n)
        const = np.ones((n, 1))
        res = tsls(y, d, z, const, np.arange(n) % 50, ["d"], ["z"], ["const"])
        wald = (y[z == 1].mean() - y[z == 0].mean()) / (d[z == 1].mean() - d[z == 0].mean())
        assert res.coefficients["d"] == pytest.approx(wald, abs=1e-10)

    def test_late_times_first_stage_equals_itt(self):
        rng = np.random.default_rng(11)
        n = 500
        z = (rng.random(n) < 0.4).astype(float)
        # two-sided noncompliance keeps every cell's variance positive
        d = np.where(z == 1, rng.random(n) < 0.7, rng.random(n) < 0.2).astype(float)
        y = 0.5 * d + rng.standard_normal(n)
        const = np.ones((n, 1))
        clusters = np.arange(n) % 25
        late = tsls(y, d, z, const, clusters, ["d"], ["z"], ["const"]).coefficients["d"]
        itt = ols(y, np.column_stack([z, const]), clusters, ["z", "const"]).coefficients["z"]
        fs = ols(d, np.column_stack([z, const]), clusters, ["z", "const"]).coefficients["z"]
        assert late * fs == pytest.approx(itt, abs=1e-10)

    def test_degenerate_instrument_rejected(self):
        rng = np.random.default_rng(12)
        n = 200
        d = rng.standard_normal(n)
        z = np.zeros(n)
        z[0] = 1e-9
        y = d + rng.standard_normal(n)
        with pytest.raises((WeakInstrumentError, CollinearityError)):
            tsls(y, d, z, np.ones((n, 1)), np.arange(n) % 10, ["d"], ["z"], ["const"])

    def test_instrument_count_guard(self):
        with pytest.raises(InputError):
            tsls(
                np.arange(8.0),
                np.ones((8, 2)),
                np.ones((8, 1)),
                None,
                np.arange(8) % 4,
                ["d1", "d2"],
                ["z"],
                [],
            )


class TestEstimateResult:
    def test_json_contract(self):
        res = EstimateResult(
            coefficients={"b": 1.0},
            se_clustered={"b": 0.5},
            n_obs=10,
            n_clusters=5,
            first_stage_F=12.0,
        )
        d = res.to_json_dict()
        assert set(d) == {"coef", "se", "n_obs", "n_clusters", "first_stage_F"}
        lo, hi = res.ci("b")
        assert lo < 1.0 < hi

    def test_positive_se_enforced(self):
        with pytest.raises(NumericalError):
            EstimateResult({"b": 1.0}, {"b": 0.0}, 10, 5)

    def test_min_clusters_enforced(self):
        with pytest.raises(InputError):
            EstimateResult({"b": 1.0}, {"b": 0.5}, 10, 1)
