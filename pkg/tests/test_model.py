import numpy as np
import pytest

from wbary.model import (
    CapacityError,
    Combination,
    ContractError,
    DiscreteMeasure,
    Instance,
    SparseMass,
    column_support,
    combination_cost,
    cost_vector,
    index_of,
    make_strides,
    marginal_residual,
    satisfies_marginals,
    tuple_of,
    weighted_mean,
)


def uniform_measure(points):
    pts = np.asarray(points, dtype=float)
    return DiscreteMeasure(pts, np.full(len(pts), 1.0 / len(pts)))


def random_instance(rng, sizes, dim=2):
    measures = tuple(
        DiscreteMeasure(rng.random((s, dim)), _random_masses(rng, s)) for s in sizes
    )
    lam = _random_masses(rng, len(sizes))
    return Instance(measures, lam)


def _random_masses(rng, size):
    u = rng.uniform(0.2, 1.0, size)
    return u / u.sum()


class TestStrides:
    def test_mixed_radix_example(self):
        st = make_strides([2, 3, 2, 3])
        assert st.suffix_products == (18, 6, 3, 1)
        assert st.total == 36
        assert st.row_offsets == (0, 2, 5, 7, 10)

    def test_single_measure(self):
        st = make_strides([5])
        assert st.suffix_products == (1,)
        assert st.total == 5

    def test_two_measures(self):
        st = make_strides([2, 2])
        assert st.suffix_products == (2, 1)
        assert st.total == 4

    def test_recurrence(self):
        st = make_strides([3, 4, 2, 5])
        for i in range(3):
            assert st.suffix_products[i] == st.suffix_products[i + 1] * st.sizes[i + 1]
        assert st.suffix_products[0] * st.sizes[0] == st.total

    def test_overflow_rejected(self):
        with pytest.raises(CapacityError):
            make_strides([2] * 63)
        make_strides([2] * 62)  # just below the limit

    def test_bad_sizes(self):
        with pytest.raises(ContractError):
            make_strides([3, 0])


class TestIndexing:
    def test_column_support_corners(self):
        st = make_strides([2, 3, 2, 3])
        assert column_support(0, st) == (0, 2, 5, 7)
        assert column_support(35, st) == (1, 4, 6, 9)
        assert column_support(6, st) == (0, 3, 5, 7)

    def test_out_of_range(self):
        st = make_strides([2, 3])
        with pytest.raises(IndexError):
            column_support(6, st)
        with pytest.raises(IndexError):
            tuple_of(-1, st)
        with pytest.raises(IndexError):
            index_of((2, 0), st)

    def test_known_encodings(self):
        st = make_strides([2, 3, 2, 3])
        assert tuple_of(0, st).indices == (0, 0, 0, 0)
        assert index_of((1, 2, 1, 2), st) == 35

    def test_bijection_exhaustive(self):
        for sizes in [(2, 3, 2, 3), (4,), (5, 5, 5), (2, 2, 2, 2, 2, 2)]:
            st = make_strides(sizes)
            for h in range(st.total):
                assert index_of(tuple_of(h, st).indices, st) == h

    def test_one_row_per_block_increasing(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            sizes = rng.integers(1, 6, size=rng.integers(1, 6)).tolist()
            st = make_strides(sizes)
            for h in range(st.total):
                rows = column_support(h, st)
                assert len(rows) == len(sizes)
                for i, r in enumerate(rows):
                    assert st.row_offsets[i] <= r < st.row_offsets[i + 1]
                assert list(rows) == sorted(rows)

    def test_shared_leading_digits_share_leading_rows(self):
        st = make_strides([2, 3, 2, 3])
        for h in range(st.total):
            for h2 in range(st.total):
                d1, d2 = tuple_of(h, st).indices, tuple_of(h2, st).indices
                if d1[:2] == d2[:2]:
                    assert column_support(h, st)[:2] == column_support(h2, st)[:2]


class TestCosts:
    def test_weighted_mean_examples(self):
        inst = Instance(
            (
                uniform_measure([[0.0, 0.0]]),
                uniform_measure([[3.0, 0.0]]),
                uniform_measure([[0.0, 3.0]]),
            ),
            np.array([1 / 3, 1 / 3, 1 / 3]),
        )
        c = Combination((0, 0, 0), 0)
        assert np.allclose(weighted_mean(c, inst), [1.0, 1.0])
        assert combination_cost(c, inst) == pytest.approx(4.0, abs=1e-12)

    def test_degenerate_weight(self):
        inst = Instance(
            (uniform_measure([[2.0, 2.0]]), uniform_measure([[9.0, 9.0]])),
            np.array([1.0, 0.0]),
        )
        c = Combination((0, 0), 0)
        assert np.allclose(weighted_mean(c, inst), [2.0, 2.0])

    def test_convex_combination(self):
        inst = Instance(
            (uniform_measure([[0.0, 0.0]]), uniform_measure([[4.0, 0.0]])),
            np.array([0.25, 0.75]),
        )
        assert np.allclose(weighted_mean(Combination((0, 0), 0), inst), [3.0, 0.0])

    def test_identical_points_zero_cost(self):
        inst = Instance(
            (uniform_measure([[1.0, 2.0]]), uniform_measure([[1.0, 2.0]])),
            np.array([0.5, 0.5]),
        )
        assert combination_cost(Combination((0, 0), 0), inst) == pytest.approx(0.0)

    def test_single_measure_zero_cost(self):
        inst = Instance((uniform_measure([[1.0, 1.0], [2.0, 5.0]]),), np.array([1.0]))
        st = make_strides(inst.sizes)
        for h in range(st.total):
            assert combination_cost(tuple_of(h, st), inst) == pytest.approx(0.0)

    def test_cost_vector_matches_direct_form(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            inst = random_instance(rng, rng.integers(1, 5, size=3).tolist())
            st = make_strides(inst.sizes)
            vec = cost_vector(inst, st)
            for h in range(st.total):
                direct = combination_cost(tuple_of(h, st), inst)
                assert abs(vec[h] - direct) <= 1e-9 * (1.0 + abs(direct))

    def test_cost_vector_blocked_equals_whole(self):
        rng = np.random.default_rng(4)
        inst = random_instance(rng, [3, 4, 2], dim=3)
        st = make_strides(inst.sizes)
        assert np.array_equal(cost_vector(inst, st, block=5), cost_vector(inst, st))


class TestSparseMass:
    def test_prunes_tiny_entries(self):
        w = SparseMass()
        w.add(3, 1e-13)
        w.add(3, 0.5)
        w.add(7, 0.5)
        assert len(w) == 2
        assert w.total() == pytest.approx(1.0)

    def test_marginal_predicate(self):
        m1 = DiscreteMeasure(np.zeros((2, 1)), np.array([0.5, 0.5]))
        m2 = DiscreteMeasure(np.ones((2, 1)), np.array([0.25, 0.75]))
        inst = Instance((m1, m2), np.array([0.5, 0.5]))
        st = make_strides(inst.sizes)
        w = SparseMass({0: 0.25, 1: 0.25, 3: 0.5})
        assert satisfies_marginals(w, inst, st)
        bad = SparseMass({0: 0.5, 3: 0.5})
        assert not satisfies_marginals(bad, inst, st)
        assert marginal_residual(bad, inst, st) == pytest.approx(0.25)


class TestValidation:
    def test_masses_must_sum_to_one(self):
        with pytest.raises(ContractError):
            DiscreteMeasure(np.zeros((2, 2)), np.array([0.5, 0.4]))

    def test_masses_positive(self):
        with pytest.raises(ContractError):
            DiscreteMeasure(np.zeros((2, 2)), np.array([1.0, 0.0]))

    def test_dimension_consistency(self):
        m1 = uniform_measure([[0.0, 0.0]])
        m2 = uniform_measure([[0.0, 0.0, 0.0]])
        with pytest.raises(ContractError):
            Instance((m1, m2), np.array([0.5, 0.5]))

    def test_lambda_sum(self):
        m1 = uniform_measure([[0.0, 0.0]])
        with pytest.raises(ContractError):
            Instance((m1, m1), np.array([0.5, 0.4]))

    def test_measures_immutable(self):
        m = uniform_measure([[0.0, 1.0]])
        with pytest.raises(ValueError):
            m.points[0, 0] = 5.0
