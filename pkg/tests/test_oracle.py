from itertools import combinations

import pytest

from trimono import (
    OracleBudget,
    VertexSet,
    brute_max_almost_mono,
    brute_max_almost_mono_bitmask,
    gen_constant,
    gen_uniform,
    r2_exact_small,
    r2_upper_bound,
)
from trimono.errors import BudgetExceeded
from trimono.oracle import eps_fraction, qualifies, read_r2_table, write_r2_table


class TestBruteMaxAlmostMono:
    def test_any_coloring_has_a_monochromatic_triple(self):
        result = brute_max_almost_mono(gen_uniform(6, 2, 0), 0)
        assert result.size >= 3

    def test_constant_coloring_takes_everything(self):
        result = brute_max_almost_mono(gen_constant(6, 2, 0), 0)
        assert result.size == 6
        assert result.subset.ids == tuple(range(6))
        assert result.census.counts == (20, 0)

    def test_dual_paths_agree_exactly(self):
        coloring = gen_uniform(9, 2, 1)
        a = brute_max_almost_mono(coloring, 0)
        b = brute_max_almost_mono_bitmask(coloring, 0)
        assert a.size == b.size
        assert a.subset == b.subset
        assert a.census == b.census

    @pytest.mark.parametrize("seed", [0, 3, 9])
    def test_dual_paths_agree_at_other_thresholds(self, seed):
        coloring = gen_uniform(8, 3, seed)
        for eps in (0, 0.25, 0.5, 1):
            a = brute_max_almost_mono(coloring, eps)
            b = brute_max_almost_mono_bitmask(coloring, eps)
            assert (a.size, a.subset, a.census) == (b.size, b.subset, b.census)

    def test_monotone_in_eps(self):
        coloring = gen_uniform(10, 2, 4)
        sizes = [brute_max_almost_mono(coloring, eps).size for eps in (0, 0.2, 0.5, 1)]
        assert sizes == sorted(sizes)

    def test_eps_one_takes_everything(self):
        coloring = gen_uniform(9, 2, 2)
        assert brute_max_almost_mono(coloring, 1).size == 9

    def test_budget_exceeded(self):
        coloring = gen_uniform(12, 2, 0)
        with pytest.raises(BudgetExceeded):
            brute_max_almost_mono(coloring, 0, OracleBudget(max_subsets=100))

    def test_witness_is_lexicographically_least(self):
        coloring = gen_uniform(9, 2, 5)
        result = brute_max_almost_mono(coloring, 0)
        size = result.size
        eps = eps_fraction(0)
        from math import comb
        from trimono.model import color_census

        qualifying = [
            combo
            for combo in combinations(range(9), size)
            if qualifies(
                color_census(coloring, VertexSet(combo)).majority_count,
                comb(size, 3),
                eps,
            )
        ]
        assert result.subset.ids == min(qualifying)


class TestR2Exact:
    def test_r2_3_2_is_6_with_pentagon_witness(self):
        result = r2_exact_small(3, 2)
        assert result.value == 6
        assert result.witness_m == 5
        # the witness 2-coloring of K5 has no monochromatic triangle and each
        # color class is 2-regular (a 5-cycle)
        colors = result.witness_as_dict()
        for tri in combinations(range(5), 3):
            assert len({colors[p] for p in combinations(tri, 2)}) == 2
        for c in (0, 1):
            for v in range(5):
                deg = sum(
                    1
                    for p, col in colors.items()
                    if col == c and v in p
                )
                assert deg == 2

    def test_trivial_values(self):
        assert r2_exact_small(2, 3).value == 2
        assert r2_exact_small(1, 4).value == 1
        assert r2_exact_small(3, 1).value == 3
        assert r2_exact_small(4, 1).value == 4

    def test_budget_exceeded_for_three_colors(self):
        with pytest.raises(BudgetExceeded):
            r2_exact_small(3, 3, OracleBudget(max_subsets=1000, time_limit=5))


class TestR2UpperBound:
    def test_any_edge_is_a_mono_two_clique(self):
        for l in (1, 2, 7, 16):
            assert r2_upper_bound(2, l).value == 2

    def test_table_value_for_3_2(self):
        bound = r2_upper_bound(3, 2)
        assert bound.value == 6
        assert bound.source == "exact"

    def test_formula_fallback(self):
        bound = r2_upper_bound(5, 2)
        assert bound.value == 2**10 == 1024
        assert bound.source == "formula"
        assert not bound.saturated

    def test_saturation_flag(self):
        bound = r2_upper_bound(16, 16)
        assert bound.saturated
        assert bound.value == (1 << 63) - 1

    def test_upper_bound_dominates_exact(self):
        for k, l in [(1, 2), (2, 2), (2, 5), (3, 2)]:
            assert r2_upper_bound(k, l).value >= r2_exact_small(k, l).value

    def test_input_validation(self):
        with pytest.raises(ValueError):
            r2_upper_bound(0, 2)
        with pytest.raises(ValueError):
            r2_exact_small(3, 0)


def test_r2_table_round_trip(tmp_path):
    path = tmp_path / "r2.table"
    entries = {(3, 2): 6, (2, 4): 2}
    write_r2_table(path, entries)
    text = path.read_text()
    assert "r2 k=3 l=2 value=6 proof=exhaustive seed-independent" in text
    assert read_r2_table(path) == entries


def test_r2_table_rejects_garbage(tmp_path):
    path = tmp_path / "bad.table"
    path.write_text("r2 k=3 l=2\n")
    with pytest.raises(ValueError):
        read_r2_table(path)


def test_qualifies_is_exact():
    # (1 - 0.3) * 10 = 7: count 7 qualifies, 6 does not, no float drift.
    eps = eps_fraction(0.3)
    assert qualifies(7, 10, eps)
    assert not qualifies(6, 10, eps)
    assert qualifies(0, 0, eps)
