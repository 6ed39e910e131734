import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hawkes_bell.bell_poly import (
    SetPartition,
    bell_number,
    complete_bell,
    cumulants_from_moments,
    enumerate_partitions,
    moments_from_cumulants,
    partial_bell,
)
from hawkes_bell.borel import BorelParams, borel_cumulants

from oracles import brute_partitions, complete_bell_compositions, partial_bell_compositions, partition_sum, stirling2


class TestEnumeratePartitions:
    def test_single_element(self):
        parts = list(enumerate_partitions(1))
        assert parts == [SetPartition(((1,),))]

    @pytest.mark.parametrize("n", range(1, 7))
    def test_matches_brute_force(self, n):
        ours = {tuple(tuple(i - 1 for i in b) for b in p.blocks) for p in enumerate_partitions(n)}
        assert ours == brute_partitions(n)

    @pytest.mark.parametrize("n, count", [(3, 5), (4, 15)])
    def test_counts(self, n, count):
        assert len(list(enumerate_partitions(n))) == count

    @pytest.mark.parametrize("n", range(1, 9))
    def test_blocks_cover_disjointly(self, n):
        seen = set()
        for p in enumerate_partitions(n):
            flat = [i for b in p for i in b]
            assert sorted(flat) == list(range(1, n + 1))
            assert p not in seen
            seen.add(p)

    @pytest.mark.parametrize("n", [0, 13, -1])
    def test_range_guard(self, n):
        with pytest.raises(ValueError):
            list(enumerate_partitions(n))


class TestBellNumber:
    def test_values(self):
        assert [bell_number(n) for n in range(8)] == [1, 1, 2, 5, 15, 52, 203, 877]

    @pytest.mark.parametrize("n", range(1, 9))
    def test_equals_partition_count_and_all_ones(self, n):
        assert bell_number(n) == len(list(enumerate_partitions(n)))
        assert complete_bell(n, [1] * n) == bell_number(n)

    def test_overflow_guard(self):
        assert bell_number(20) == 51724158235372
        with pytest.raises(ValueError):
            bell_number(21)


class TestPartialBell:
    def test_stirling_4_2(self):
        assert partial_bell(4, 2, [1, 1, 1]) == 7

    @pytest.mark.parametrize("n", range(1, 8))
    def test_diagonal_is_power(self, n):
        assert partial_bell(n, n, [Fraction(3, 2)]) == Fraction(3, 2) ** n

    def test_b32_pattern(self):
        # B_{3,2}(x1, x2) = 3 x1 x2: check the coefficient on independent inputs
        for x1, x2 in [(2, 5), (Fraction(1, 3), 7), (-1.5, 0.25)]:
            assert partial_bell(3, 2, [x1, x2]) == pytest.approx(3 * x1 * x2)

    @pytest.mark.parametrize("n", range(1, 8))
    def test_all_ones_is_stirling(self, n):
        for k in range(1, n + 1):
            assert partial_bell(n, k, [1] * (n - k + 1)) == stirling2(n, k)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            partial_bell(4, 2, [1, 1])


class TestCompleteBell:
    def test_low_orders_symbolic(self):
        # distinct primes expose each monomial's coefficient
        x = [2, 3, 5, 7]
        assert complete_bell(2, x[:2]) == x[0] ** 2 + x[1]
        assert complete_bell(3, x[:3]) == x[0] ** 3 + 3 * x[0] * x[1] + x[2]
        assert complete_bell(4, x) == x[0] ** 4 + 6 * x[0] ** 2 * x[1] + 4 * x[0] * x[2] + 3 * x[1] ** 2 + x[3]

    @pytest.mark.parametrize("n", range(1, 9))
    def test_matches_composition_and_partition_sums(self, n):
        rng = np.random.default_rng(n)
        args = list(rng.uniform(-2, 2, size=n))
        ours = complete_bell(n, args)
        assert ours == pytest.approx(complete_bell_compositions(n, args), rel=1e-12, abs=1e-12)
        assert ours == pytest.approx(partition_sum(n, args), rel=1e-12, abs=1e-12)

    @pytest.mark.parametrize("n", range(1, 7))
    def test_partial_matches_composition_form(self, n):
        args = [Fraction(i + 2, i + 1) for i in range(n)]
        for k in range(1, n + 1):
            assert partial_bell(n, k, args[: n - k + 1]) == partial_bell_compositions(n, k, args[: n - k + 1])


class TestMomentCumulant:
    def test_gaussian(self):
        assert moments_from_cumulants([0, 1, 0, 0]) == [0, 1, 0, 3]
        assert cumulants_from_moments([0, 1, 0, 3]) == [0, 1, 0, 0]

    def test_poisson(self):
        lam = 1.7
        m = moments_from_cumulants([lam] * 4)
        assert m[1] == pytest.approx(lam + lam**2)
        assert m[2] == pytest.approx(lam + 3 * lam**2 + lam**3)

    def test_deterministic(self):
        mu = 2.5
        assert moments_from_cumulants([mu, 0, 0, 0]) == pytest.approx([mu, mu**2, mu**3, mu**4])

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(-10, 10), min_size=1, max_size=8))
    def test_round_trip(self, kappas):
        back = cumulants_from_moments(moments_from_cumulants(kappas))
        scale = max(1.0, max(abs(k) for k in kappas)) ** len(kappas)
        for x, y in zip(back, kappas):
            assert abs(x - y) <= 1e-10 * scale

    def test_round_trip_exact(self):
        kappas = [Fraction(1, 3), Fraction(-2, 7), Fraction(5), Fraction(1, 11), Fraction(3, 2)]
        assert cumulants_from_moments(moments_from_cumulants(kappas)) == kappas

    def test_borel_round_trip(self):
        kappas = borel_cumulants(BorelParams(0.5), 6)
        back = cumulants_from_moments(moments_from_cumulants(kappas))
        assert back == pytest.approx(kappas, rel=1e-10)

    def test_size_guard(self):
        with pytest.raises(ValueError):
            moments_from_cumulants([1.0] * 13)


def test_ring_laws_on_fractions():
    a, b, c = Fraction(1, 3), Fraction(-5, 2), Fraction(7, 9)
    for x, y, z in itertools.permutations([a, b, c]):
        assert (x + y) * z == x * z + y * z
        assert x * y == y * x
    assert complete_bell(3, [a, b, c]) == a**3 + 3 * a * b + c
    assert math.isclose(float(complete_bell(3, [a, b, c])), float(a) ** 3 + 3 * float(a) * float(b) + float(c))
