import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gasvm.stats import (
    PairwiseMatrix,
    holm_adjust,
    pairwise_matrix,
    significance_stars,
    t_survival,
    welch_t_test,
)

from oracles import t_sf_by_quadrature, welch_by_formula


class TestWelch:
    def test_identical_samples(self):
        res = welch_t_test([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert res.t_statistic == 0.0
        assert res.p_value == 1.0

    def test_separated_samples(self):
        res = welch_t_test([10, 11, 12, 13], [20, 21, 22, 23])
        # direct hand evaluation: se = sqrt(5/6), t = -10/se, df = 6
        assert res.t_statistic == pytest.approx(-10.954451, abs=1e-6)
        assert res.degrees_of_freedom == pytest.approx(6.0, abs=1e-12)
        assert res.p_value < 0.001

    def test_zero_variance_both(self):
        with pytest.raises(ValueError, match="variance is zero"):
            welch_t_test([5.0, 5.0], [5.0, 5.0])

    def test_undersized_sample(self):
        with pytest.raises(ValueError, match="at least 2"):
            welch_t_test([1.0], [1.0, 2.0])

    def test_one_sided_splits_two_sided(self):
        a, b = [3.0, 4.0, 5.0], [1.0, 2.0, 2.5]
        two = welch_t_test(a, b)
        greater = welch_t_test(a, b, sided="greater")
        less = welch_t_test(a, b, sided="less")
        assert greater.p_value == pytest.approx(two.p_value / 2, abs=1e-12)
        assert greater.p_value + less.p_value == pytest.approx(1.0, abs=1e-12)

    def test_battery_matches_direct_formula_oracle(self):
        rng = np.random.default_rng(2024)
        for _ in range(20):
            n_a = int(rng.integers(3, 40))
            n_b = int(rng.integers(3, 40))
            a = rng.normal(rng.uniform(-2, 2), rng.uniform(0.5, 3), size=n_a)
            b = rng.normal(rng.uniform(-2, 2), rng.uniform(0.5, 3), size=n_b)
            res = welch_t_test(a, b)
            t_ref, df_ref, p_ref = welch_by_formula(a, b)
            assert res.t_statistic == pytest.approx(t_ref, abs=1e-6)
            assert res.degrees_of_freedom == pytest.approx(df_ref, abs=1e-6)
            assert res.p_value == pytest.approx(p_ref, abs=1e-6)

    @settings(max_examples=60, deadline=None)
    @given(
        a=st.lists(st.floats(-50, 50), min_size=3, max_size=12),
        b=st.lists(st.floats(-50, 50), min_size=3, max_size=12),
    )
    def test_symmetry(self, a, b):
        try:
            ab = welch_t_test(a, b)
        except ValueError:
            return  # degenerate combined variance, rejected symmetrically

        ba = welch_t_test(b, a)
        assert ab.t_statistic == pytest.approx(-ba.t_statistic, rel=1e-12, abs=1e-12)
        assert ab.p_value == pytest.approx(ba.p_value, rel=1e-12, abs=1e-12)
        assert ab.degrees_of_freedom == pytest.approx(ba.degrees_of_freedom, rel=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(
        scale=st.floats(1e-3, 1e3),
        seed=st.integers(0, 10_000),
    )
    def test_scale_invariance(self, scale, seed):
        rng = np.random.default_rng(seed)
        a = rng.normal(0.0, 1.0, size=8)
        b = rng.normal(0.5, 2.0, size=6)
        base = welch_t_test(a, b)
        scaled = welch_t_test(a * scale, b * scale)
        assert scaled.t_statistic == pytest.approx(base.t_statistic, rel=1e-9)
        assert scaled.degrees_of_freedom == pytest.approx(base.degrees_of_freedom, rel=1e-9)
        assert scaled.p_value == pytest.approx(base.p_value, rel=1e-9, abs=1e-12)


class TestSurvival:
    def test_midpoint(self):
        assert t_survival(0.0, 5.0) == pytest.approx(0.5, abs=1e-15)

    def test_matches_quadrature(self):
        for t in (-4.0, -1.3, -0.2, 0.0, 0.7, 2.5, 6.0):
            for df in (1.5, 3.0, 6.0, 29.0, 120.0):
                assert t_survival(t, df) == pytest.approx(
                    t_sf_by_quadrature(t, df), abs=1e-6
                )


class TestStars:
    @pytest.mark.parametrize("p,stars", [
        (0.0005, "***"), (0.005, "**"), (0.03, "*"), (0.2, ""),
    ])
    def test_thresholds(self, p, stars):
        assert significance_stars(p) == stars


class TestHolm:
    def test_known_example(self):
        assert holm_adjust([0.01, 0.04, 0.03]) == pytest.approx([0.03, 0.06, 0.06])

    def test_cap_at_one(self):
        assert holm_adjust([0.5, 0.9]) == pytest.approx([1.0, 1.0])


class TestPairwiseMatrix:
    def make_groups(self, rng, n=5, size=12, shift=0.0):
        return [
            (f"G{i}", list(rng.normal(i * shift, 1.0, size=size)))
            for i in range(n)
        ]

    def test_five_groups_ten_cells(self):
        rng = np.random.default_rng(0)
        matrix = pairwise_matrix(self.make_groups(rng))
        filled = np.count_nonzero(~np.isnan(matrix.p))
        assert filled == 10
        assert matrix.p.shape == (4, 4)
        assert np.all(np.isnan(matrix.p[np.triu_indices(4, k=1)]))

    def test_identical_groups_give_p_one(self):
        samples = [1.0, 2.0, 3.0, 4.0]
        matrix = pairwise_matrix([("a", samples), ("b", list(samples))])
        assert matrix.cell("b", "a") == 1.0

    def test_failed_cell_marked_matrix_still_emitted(self):
        # only a pair of zero-variance samples is degenerate for Welch
        groups = [("flat1", [5.0, 5.0, 5.0]), ("flat2", [7.0, 7.0, 7.0]),
                  ("b", [0.5, 1.5, 2.5])]
        matrix = pairwise_matrix(groups)
        assert math.isnan(matrix.cell("flat2", "flat1"))
        assert ("flat2", "flat1") in matrix.errors
        assert not math.isnan(matrix.cell("b", "flat1"))
        rows = matrix.to_rows()
        assert rows[1][1] == "failed"

    def test_rows_layout(self):
        rng = np.random.default_rng(1)
        matrix = pairwise_matrix(self.make_groups(rng, shift=5.0))
        rows = matrix.to_rows()
        assert rows[0] == ["", "G0", "G1", "G2", "G3"]
        assert [r[0] for r in rows[1:]] == ["G1", "G2", "G3", "G4"]
        assert rows[1][2:] == ["-", "-", "-"]
        # widely shifted groups are all significantly different
        assert all("***" in cell for row in rows[2:] for cell in row[1:]
                   if cell not in ("-",))
        holm_rows = matrix.to_rows(holm=True)
        assert len(holm_rows) == len(rows)

    def test_single_group_rejected(self):
        with pytest.raises(ValueError, match="at least 2"):
            pairwise_matrix([("only", [1.0, 2.0])])
