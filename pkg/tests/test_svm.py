import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gasvm import svm
from gasvm.svm import (
    ConfusionMetrics,
    SolverConfig,
    SvmParams,
    confusion_metrics,
    rbf_kernel,
    rbf_kernel_matrix,
    train,
)

from oracles import qp_reference, random_svm_instance, reference_bias

XOR_X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
XOR_Y = np.array([1, 1, 0, 0])
# Optimal XOR dual objective bracketed by a 201-step brute-force grid over
# the alpha box with the equality constraint solved for the fourth alpha.
XOR_GRID_OBJECTIVE = 5.0052949888


class TestRbfKernel:
    def test_zero_distance(self):
        assert rbf_kernel([1.0, 2.0], [1.0, 2.0], gamma=3.7) == 1.0

    def test_direct_value(self):
        assert rbf_kernel([0.0, 0.0], [1.0, 1.0], gamma=0.5) == pytest.approx(
            math.exp(-1.0), abs=1e-12
        )

    def test_small_gamma_limit(self):
        assert rbf_kernel([0.0], [5.0], gamma=1e-12) == pytest.approx(1.0, abs=1e-9)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            rbf_kernel([1.0], [1.0, 2.0], gamma=1.0)

    @settings(max_examples=100, deadline=None)
    @given(
        x=arrays(float, 3, elements=st.floats(-3, 3)),
        z=arrays(float, 3, elements=st.floats(-3, 3)),
        gamma=st.floats(1e-3, 5),
    )
    def test_bounds_and_symmetry(self, x, z, gamma):
        # ranges keep the exponent above float64 underflow, where the
        # mathematical (0, 1] bound is representable
        k = rbf_kernel(x, z, gamma)
        assert 0.0 < k <= 1.0
        assert k == pytest.approx(rbf_kernel(z, x, gamma), abs=1e-15)

    def test_matrix_agrees_with_scalar(self):
        rng = np.random.default_rng(0)
        A = rng.normal(size=(4, 3))
        B = rng.normal(size=(5, 3))
        K = rbf_kernel_matrix(A, B, 0.7)
        for i in range(4):
            for j in range(5):
                assert K[i, j] == pytest.approx(rbf_kernel(A[i], B[j], 0.7), abs=1e-12)


class TestTrain:
    def test_xor_classified_and_matches_grid_oracle(self):
        model = train(XOR_X, XOR_Y, SvmParams(cost=10.0, gamma=1.0))
        assert model.predict(XOR_X).tolist() == XOR_Y.tolist()
        # the grid value under-estimates the optimum by at most its resolution
        assert model.dual_objective >= XOR_GRID_OBJECTIVE - 1e-9
        _, ref = qp_reference(XOR_X, XOR_Y, 10.0, 1.0)
        assert model.dual_objective == pytest.approx(ref, abs=1e-3)

    def test_two_point_symmetry(self):
        model = train(np.array([[0.0], [4.0]]), np.array([1, 0]),
                      SvmParams(cost=10.0, gamma=0.25))
        assert model.decision_function(np.array([[2.0]]))[0] == pytest.approx(0.0, abs=1e-9)

    def test_box_constraint(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(20, 2))
        y = (rng.random(20) < 0.4).astype(int)
        y[:2] = [0, 1]
        model = train(X, y, SvmParams(cost=10.0, gamma=1.0))
        assert np.all(np.abs(model.dual_coefs) <= 10.0 + 1e-9)

    def test_single_class_rejected(self):
        with pytest.raises(ValueError, match="single class"):
            train(np.eye(3), np.ones(3, dtype=int), SvmParams(1.0, 1.0))

    def test_non_finite_rejected(self):
        X = np.array([[0.0], [np.nan]])
        with pytest.raises(ValueError, match="non-finite"):
            train(X, np.array([0, 1]), SvmParams(1.0, 1.0))

    def test_row_permutation_leaves_decision_unchanged(self):
        rng = np.random.default_rng(11)
        X, y, cost, gamma = random_svm_instance(rng)
        params = SvmParams(cost, gamma)
        model_a = train(X, y, params)
        perm = rng.permutation(len(y))
        model_b = train(X[perm], y[perm], params)
        grid = rng.normal(size=(40, 2))
        assert np.allclose(
            model_a.decision_function(grid), model_b.decision_function(grid), atol=1e-3
        )

    def test_invalid_params(self):
        with pytest.raises(ValueError):
            SvmParams(cost=0.0, gamma=1.0)
        with pytest.raises(ValueError):
            SvmParams(cost=1.0, gamma=-2.0)


@pytest.fixture(scope="module")
def separable_model():
    X = np.array([[0.0, 0.0], [0.2, 0.1], [3.0, 3.0], [3.2, 2.9]])
    y = np.array([0, 0, 1, 1])
    return X, y, train(X, y, SvmParams(cost=10.0, gamma=1.0))


class TestPredict:

    def test_training_points_recovered(self, separable_model):
        X, y, model = separable_model
        assert model.predict(X).tolist() == y.tolist()

    def test_empty_query(self, separable_model):
        _, _, model = separable_model
        assert model.predict(np.empty((0, 2))).shape == (0,)

    def test_duplicate_rows_identical_labels(self, separable_model):
        X, _, model = separable_model
        q = np.vstack([X[0], X[0], X[2], X[2]])
        labels = model.predict(q)
        assert labels[0] == labels[1]
        assert labels[2] == labels[3]

    def test_dimension_mismatch(self, separable_model):
        _, _, model = separable_model
        with pytest.raises(ValueError, match="columns"):
            model.predict(np.zeros((3, 5)))


class TestSolverOracle:
    """Dual objective and feasibility against an independent QP solution."""

    @pytest.mark.parametrize("seed", range(25))
    def test_random_instances(self, seed):
        rng = np.random.default_rng(1000 + seed)
        X, y, cost, gamma = random_svm_instance(rng)
        model = train(X, y, SvmParams(cost, gamma))
        _, ref_objective = qp_reference(X, y, cost, gamma)
        assert model.dual_objective == pytest.approx(ref_objective, abs=1e-3)
        assert np.all(np.abs(model.dual_coefs) <= cost + 1e-9)
        assert abs(model.dual_coefs.sum()) <= 1e-3

    def test_decision_signs_agree_with_reference(self):
        rng = np.random.default_rng(77)
        for _ in range(10):
            X, y, cost, gamma = random_svm_instance(rng)
            model = train(X, y, SvmParams(cost, gamma), SolverConfig(tol=1e-6))
            alpha_ref, _ = qp_reference(X, y, cost, gamma)
            ys = np.where(y == 1, 1.0, -1.0)
            grid = rng.normal(size=(50, 2))
            ref_scores = rbf_kernel_matrix(grid, X, gamma) @ (alpha_ref * ys)
            own_scores = rbf_kernel_matrix(X, X, gamma) @ (alpha_ref * ys)
            ref_scores += reference_bias(alpha_ref, ys, own_scores, cost)
            ours = model.decision_function(grid)
            # both solvers sit within 1e-3 of the optimum, so compare signs
            # away from the decision surface
            clear = np.abs(ref_scores) > 1e-2
            assert np.array_equal(ours[clear] > 0, ref_scores[clear] > 0)


class TestConfusionMetrics:
    def test_perfect(self):
        m = confusion_metrics(np.array([1, 1, 0, 0]), np.array([1, 1, 0, 0]))
        assert (m.sensitivity, m.specificity) == (1.0, 1.0)
        assert m.accuracy_product == 1.0

    def test_all_negative_prediction(self):
        m = confusion_metrics(np.zeros(4, dtype=int), np.array([1, 1, 0, 0]))
        assert m.sensitivity == 0.0
        assert m.specificity == 1.0
        assert m.accuracy_product == 0.0

    def test_half_sensitivity(self):
        m = confusion_metrics(np.array([1, 0, 0, 0]), np.array([1, 1, 0, 0]))
        assert m.sensitivity == 0.5
        assert m.specificity == 1.0
        assert (m.tp, m.tn, m.fp, m.fn) == (1, 2, 0, 1)

    def test_degenerate_truth_is_nan(self):
        m = confusion_metrics(np.array([1, 0]), np.array([1, 1]))
        assert math.isnan(m.specificity)
        assert m.degenerate
        assert m.sensitivity == 0.5

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length mismatch"):
            confusion_metrics(np.array([1]), np.array([1, 0]))

    def test_counts_sum_to_size(self):
        rng = np.random.default_rng(5)
        pred = (rng.random(37) < 0.5).astype(int)
        truth = (rng.random(37) < 0.3).astype(int)
        m = confusion_metrics(pred, truth)
        assert m.tp + m.tn + m.fp + m.fn == 37
        assert m.accuracy_product <= min(m.sensitivity, m.specificity) + 1e-15


class TestSolverConfigAndDump:
    def test_iteration_cap_respected(self):
        rng = np.random.default_rng(8)
        X, y, cost, gamma = random_svm_instance(rng)
        model = train(X, y, SvmParams(cost, gamma), SolverConfig(tol=1e-12, max_iter=3))
        assert model.iterations <= 3
        assert not model.converged

    def test_dump_mentions_params(self):
        model = train(XOR_X, XOR_Y, SvmParams(cost=10.0, gamma=1.0))
        text = svm.dump_model(model)
        assert "cost 10.0" in text
        assert text.count("sv ") == len(model.dual_coefs)
