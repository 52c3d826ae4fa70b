import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from driftcause.citest import (ContingencyTable, OracleTest, chi2_sf, contingency_table,
                               g_square, gammaincc, oracle_ci)
from driftcause.errors import DataError, UnknownFeatureError
from driftcause.graph import Dag, d_separated
from driftcause.records import Records

from oracles import chi2_sf_mp, chi2_sf_quad, g_statistic_loops

# every expected count is 20
TABLE = [[30, 10], [10, 30]]
G_TABLE = 2 * (2 * 30 * np.log(30 / 20) + 2 * 10 * np.log(10 / 20))


def records_from_table(table):
    rows = [(i, j) for i, r in enumerate(table) for j, c in enumerate(r) for _ in range(c)]
    return Records(("x", "y"), np.array(rows, dtype=np.int64), (2, 2))


class TestChi2:
    @pytest.mark.parametrize("k", [1, 2, 3, 10, 50])
    def test_zero(self, k):
        assert chi2_sf(0, k) == 1.0

    def test_five_percent_point(self):
        oracle = chi2_sf_quad(3.841, 1)
        assert abs(oracle - 0.05) < 1e-3
        assert chi2_sf(3.841, 1) == pytest.approx(oracle, abs=1e-9)

    @pytest.mark.parametrize("x,k", [(0.5, 1), (3.841, 1), (5.99, 2), (20.93, 1), (30.0, 12),
                                     (1e-3, 4), (120.0, 100), (400.0, 300), (900.0, 500)])
    def test_against_mpmath(self, x, k):
        assert chi2_sf(x, k) == pytest.approx(chi2_sf_mp(x, k), rel=1e-10, abs=1e-15)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0, 1000), st.integers(1, 500))
    def test_property_against_mpmath(self, x, k):
        assert abs(chi2_sf(x, k) - chi2_sf_mp(x, k)) < 1e-12

    @pytest.mark.parametrize("k", [1, 2, 5, 30])
    def test_decreasing_in_x(self, k):
        grid = np.linspace(0, 100, 401)
        values = [chi2_sf(x, k) for x in grid]
        assert all(a >= b for a, b in zip(values, values[1:]))
        assert all(0 <= v <= 1 for v in values)

    def test_increasing_in_k(self):
        values = [chi2_sf(10.0, k) for k in range(1, 40)]
        assert all(a <= b for a, b in zip(values, values[1:]))

    def test_rejects_bad_arguments(self):
        for x, k in [(-1, 1), (1, 0), (1, 1.5), (float("nan"), 1)]:
            with pytest.raises(ValueError):
                chi2_sf(x, k)
        with pytest.raises(ValueError):
            gammaincc(0, 1)

    def test_infinite_statistic(self):
        assert chi2_sf(float("inf"), 3) == 0.0


class TestGSquare:
    def test_statistic_of_textbook_table(self):
        data = records_from_table(TABLE)
        r = g_square(data, "x", "y")
        assert r.statistic == pytest.approx(G_TABLE, abs=1e-12)
        assert r.statistic == pytest.approx(g_statistic_loops(TABLE), abs=1e-12)
        assert r.statistic == pytest.approx(20.929925750581912, abs=1e-9)
        assert r.dof == 1
        assert r.p_value == pytest.approx(chi2_sf_quad(r.statistic, 1), abs=1e-9)
        assert r.p_value == pytest.approx(4.7639e-6, rel=1e-3)
        assert not r.independent

    def test_proportional_table(self):
        r = g_square(records_from_table([[20, 40], [10, 20]]), "x", "y")
        assert r.statistic == pytest.approx(0.0, abs=1e-12)
        assert r.p_value == pytest.approx(1.0)
        assert r.independent

    def test_adequacy_rule(self):
        data = records_from_table([[5, 0], [0, 4]])
        r = g_square(data, "x", "y")
        assert r.dof == 1 and len(data) < 10
        assert not r.reliable
        assert r.independent
        assert r.p_value < 0.05

    def test_symmetry(self):
        rng = np.random.default_rng(0)
        vals = rng.integers(0, 3, size=(500, 4))
        data = Records(tuple("abcd"), vals, (3, 3, 3, 3))
        base = g_square(data, "a", "b", ["c", "d"])
        for x, y in (("a", "b"), ("b", "a")):
            for z in (["c", "d"], ["d", "c"]):
                r = g_square(data, x, y, z)
                assert (r.statistic, r.dof, r.p_value) == (base.statistic, base.dof, base.p_value)

    def test_stratified_statistic_is_sum_of_strata(self):
        rng = np.random.default_rng(1)
        vals = rng.integers(0, 2, size=(400, 3))
        data = Records(("x", "y", "z"), vals, (2, 2, 2))
        r = g_square(data, "x", "y", ["z"])
        total = 0.0
        for s in (0, 1):
            sub = vals[vals[:, 2] == s]
            table = [[int(np.sum((sub[:, 0] == i) & (sub[:, 1] == j))) for j in (0, 1)] for i in (0, 1)]
            total += g_statistic_loops(table)
        assert r.statistic == pytest.approx(total, abs=1e-9)
        assert r.dof == 2

    def test_structural_zero_reduces_dof(self):
        # y never takes state 2 in any stratum
        vals = np.array([[i % 3, (i // 3) % 2] for i in range(300)])
        data = Records(("x", "y"), vals, (3, 3))
        assert g_square(data, "x", "y").dof == 2

    def test_unobserved_strata_are_dropped(self):
        vals = np.array([[0, 0, 0], [1, 1, 0], [0, 1, 3], [1, 0, 3]] * 10)
        data = Records(("x", "y", "z"), vals, (2, 2, 5))
        assert contingency_table(data, "x", "y", ["z"]).counts.shape == (2, 2, 2)

    def test_bad_queries(self):
        data = records_from_table(TABLE)
        with pytest.raises(DataError):
            g_square(data, "x", "x")
        with pytest.raises(DataError):
            g_square(data.take(slice(0, 0)), "x", "y")
        with pytest.raises(UnknownFeatureError):
            g_square(data, "x", "q")

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**31), st.floats(0.001, 0.5))
    def test_decision_follows_p_value(self, seed, alpha):
        rng = np.random.default_rng(seed)
        vals = rng.integers(0, 2, size=(int(rng.integers(5, 300)), 3))
        data = Records(("x", "y", "z"), vals, (2, 2, 2))
        r = g_square(data, "x", "y", ["z"], alpha=alpha)
        assert 0.0 <= r.p_value <= 1.0
        assert r.statistic >= 0
        if r.reliable:
            assert r.independent == (r.p_value > alpha)
        else:
            assert r.independent

    def test_contingency_counts(self):
        ct = contingency_table(records_from_table(TABLE), "x", "y")
        assert isinstance(ct, ContingencyTable)
        assert ct.counts.tolist() == [TABLE]
        assert ct.n == 80

    def test_calibration_under_independence(self):
        rng = np.random.default_rng(2024)
        rejections = 0
        for _ in range(200):
            vals = rng.integers(0, 2, size=(2000, 2))
            rejections += not g_square(Records(("x", "y"), vals, (2, 2)), "x", "y").independent
        assert 0.01 <= rejections / 200 <= 0.10


class TestOracle:
    def test_chain(self):
        test = oracle_ci(Dag("abc", [("a", "b"), ("b", "c")]))
        assert test("a", "c", ["b"]).independent
        assert not test("a", "c").independent

    def test_collider(self):
        test = OracleTest(Dag("abc", [("a", "c"), ("b", "c")]))
        assert test("a", "b").independent
        assert not test("a", "b", ["c"]).independent

    def test_agrees_with_d_separation(self):
        g = Dag("abcde", [("a", "c"), ("b", "c"), ("c", "d"), ("b", "e"), ("e", "d")])
        test = oracle_ci(g)
        for x, y in itertools.combinations(g.nodes, 2):
            rest = [n for n in g.nodes if n not in (x, y)]
            for k in range(len(rest) + 1):
                for z in itertools.combinations(rest, k):
                    r = test(x, y, z)
                    assert r.independent == d_separated(g, x, y, z)
                    assert r.p_value == (1.0 if r.independent else 0.0)
