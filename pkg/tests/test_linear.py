import numpy as np
import pytest
from hypothesis import given, strategies as st

from multihop.models import FitConfig, LinearLS, Polynomial, Real, RobustLinear, fit, irls_bisquare_fit, predict, wls_solve
from multihop.models.linear import bisquare_rho, bisquare_weights, mad_scale, vandermonde


class TestWlsSolve:
    def test_identity_design_returns_y(self):
        y = np.array([3.0, -1.0, 2.5])
        np.testing.assert_allclose(wls_solve(np.eye(3), y), y, atol=1e-12)

    def test_uniform_weight_scale_is_irrelevant(self, rng):
        A, y = rng.normal(size=(30, 4)), rng.normal(size=30)
        np.testing.assert_allclose(wls_solve(A, y, np.full(30, 2.0)), wls_solve(A, y), atol=1e-12)

    def test_matches_pseudo_inverse(self, rng):
        A, y = rng.normal(size=(50, 3)), rng.normal(size=50)
        w = rng.uniform(0.1, 3.0, 50)
        W = np.diag(w)
        oracle = np.linalg.inv(A.T @ W @ A) @ A.T @ W @ y
        np.testing.assert_allclose(wls_solve(A, y, w), oracle, rtol=1e-8, atol=1e-10)

    def test_weighted_residuals_orthogonal_to_columns(self, rng):
        A, y, w = rng.normal(size=(40, 5)), rng.normal(size=40), rng.uniform(0, 2, 40)
        r = y - A @ wls_solve(A, y, w)
        ortho = A.T @ (w * r)
        assert np.max(np.abs(ortho)) <= 1e-8 * np.linalg.norm(A.T @ (w * y))

    def test_rank_deficient_uses_ridge(self, rng):
        a = rng.normal(size=20)
        A = np.column_stack([a, a, np.ones(20)])
        beta = wls_solve(A, 2 * a + 1)
        assert np.all(np.isfinite(beta))
        np.testing.assert_allclose(A @ beta, 2 * a + 1, atol=1e-6)

    def test_errors(self):
        with pytest.raises(ValueError, match="coefficients"):
            wls_solve(np.ones((2, 3)), np.ones(2))
        with pytest.raises(ValueError, match="non-finite"):
            wls_solve(np.eye(2), np.array([1.0, np.nan]))
        with pytest.raises(ValueError, match="nonnegative"):
            wls_solve(np.eye(2), np.ones(2), np.array([1.0, -1.0]))


class TestPolynomial:
    def test_exact_line(self):
        x = np.linspace(-3, 3, 11)
        m = fit(Polynomial(1), x[:, None], Real(2 * x + 1))
        np.testing.assert_allclose(m.estimator.coef_, [1.0, 2.0], atol=1e-8)

    def test_cubic_matches_normal_equations(self, rng):
        x = rng.uniform(-2, 2, 80)
        y = 0.5 - x + 0.3 * x ** 3 + rng.normal(scale=0.1, size=80)
        V = np.column_stack([x ** p for p in range(4)])
        oracle = np.linalg.solve(V.T @ V, V.T @ y)
        m = fit(Polynomial(3), x[:, None], Real(y))
        np.testing.assert_allclose(m.estimator.coef_, oracle, rtol=1e-6, atol=1e-9)

    def test_identity_line_prediction(self):
        from multihop.models import PolynomialRegressor
        est = PolynomialRegressor.from_coefficients([0.0, 1.0])
        assert est.predict(np.array([[5.0]]))[0] == 5.0

    def test_needs_one_feature(self):
        with pytest.raises(ValueError, match="one feature"):
            fit(Polynomial(2), np.ones((5, 2)), Real(np.ones(5)))

    def test_nested_projection_identity(self, rng):
        # projecting onto cubics and then onto lines equals projecting onto lines
        x = rng.uniform(-3, 3, 200)
        y = np.sin(x) + 0.1 * x ** 4
        cubic = fit(Polynomial(3), x[:, None], Real(y))
        via = fit(Polynomial(1), x[:, None], Real(predict(cubic, x[:, None])[:, 0]))
        direct = fit(Polynomial(1), x[:, None], Real(y))
        np.testing.assert_allclose(via.estimator.coef_, direct.estimator.coef_, atol=1e-8)


class TestRobust:
    def test_rho_and_weights(self):
        c = 4.685
        assert bisquare_rho(np.array([0.0]), c)[0] == 0.0
        np.testing.assert_allclose(bisquare_rho(np.array([10.0, -c]), c), c ** 2 / 6)
        np.testing.assert_allclose(bisquare_weights(np.array([0.0, 0.5, 1.0, 2.0])),
                                   [1.0, 0.5625, 0.0, 0.0])

    def test_mad_scale(self):
        r = np.array([1.0, 2.0, 3.0, 4.0, 100.0])
        assert mad_scale(r) == pytest.approx(1.0 / 0.6745)

    def test_clean_data_equals_ols(self, rng):
        x = rng.uniform(-1, 1, 100)
        X = np.column_stack([np.ones(100), x])
        y = 1 + 2 * x + rng.normal(scale=1e-3, size=100)
        np.testing.assert_allclose(irls_bisquare_fit(X, y), wls_solve(X, y), atol=1e-3)
        y_exact = 1 + 2 * x
        np.testing.assert_allclose(irls_bisquare_fit(X, y_exact), wls_solve(X, y_exact), atol=1e-6)

    def test_outliers_beaten(self, rng):
        x = rng.uniform(-1, 1, 200)
        X = np.column_stack([np.ones(200), x])
        y = 1 + 2 * x + rng.normal(scale=0.05, size=200)
        bad = rng.choice(200, 20, replace=False)
        y[bad] += rng.uniform(5, 10, 20)
        inlier = np.setdiff1d(np.arange(200), bad)
        med = lambda beta: np.median(np.abs(y[inlier] - X[inlier] @ beta))
        assert med(irls_bisquare_fit(X, y)) < med(wls_solve(X, y))

    def test_zero_scale_returns_immediately(self):
        X = np.column_stack([np.ones(10), np.arange(10.0)])
        beta, hist = irls_bisquare_fit(X, 3 + 0 * np.arange(10.0), return_history=True)
        assert hist == []
        np.testing.assert_allclose(beta, [3.0, 0.0], atol=1e-12)

    @pytest.mark.parametrize("seed", range(100))
    def test_objective_never_increases_per_step(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(20, 120))
        X = np.column_stack([np.ones(n), rng.normal(size=(n, int(rng.integers(1, 4))))])
        y = X @ rng.normal(size=X.shape[1]) + rng.standard_t(2, size=n)
        _, hist = irls_bisquare_fit(X, y, return_history=True)
        assert hist
        for h in hist:
            assert h["objective_after"] <= h["objective_before"] + 1e-9 * max(1.0, h["objective_before"])
            assert np.all((h["robust_weights"] >= 0) & (h["robust_weights"] <= 1))

    def test_robust_with_prior_weights(self, rng):
        x = rng.uniform(-1, 1, 60)
        y = 2 * x + rng.normal(scale=0.1, size=60)
        m1 = fit(RobustLinear(), x[:, None], Real(y))
        m2 = fit(RobustLinear(), x[:, None], Real(y), FitConfig(sample_weights=np.ones(60)))
        np.testing.assert_array_equal(m1.estimator.coef_, m2.estimator.coef_)


@given(st.integers(0, 2 ** 31 - 1), st.sampled_from(["poly", "ls", "robust"]))
def test_weight_one_equivalence_linear_families(seed, family):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-2, 2, 40)
    y = 1 - x + 0.5 * x ** 2 + rng.normal(scale=0.3, size=40)
    spec = {"poly": Polynomial(2), "ls": LinearLS(), "robust": RobustLinear()}[family]
    a = fit(spec, x[:, None], Real(y))
    b = fit(spec, x[:, None], Real(y), FitConfig(sample_weights=np.ones(40)))
    np.testing.assert_array_equal(a.estimator.coef_, b.estimator.coef_)


def test_vandermonde_increasing_powers():
    np.testing.assert_array_equal(vandermonde([2.0], 3), [[1.0, 2.0, 4.0, 8.0]])
