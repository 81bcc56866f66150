import math

import numpy as np
import pytest

from fwerlab.cutoffs import (
    EquicorrProblem,
    bonferroni_cutoff,
    cutoff_ratio_diagnostic,
    kfwer_cutoff,
    lemma1_onset,
    lemma1_threshold,
    sqrt_2logn_bound,
)
from fwerlab.errors import DomainError
from fwerlab.gauss import std_normal_sf


@pytest.mark.parametrize("n,alpha,rho", [(0, 0.05, 0.1), (10, 0.0, 0.1), (10, 1.0, 0.1),
                                         (10, 0.05, -0.1), (10, 0.05, 1.1), (2.5, 0.05, 0.1)])
def test_problem_validation(n, alpha, rho):
    with pytest.raises(DomainError):
        EquicorrProblem(n, alpha, rho)


class TestBonferroni:
    def test_single_test(self):
        c = bonferroni_cutoff(EquicorrProblem(1, 0.05, 0.0))
        assert c.value == pytest.approx(1.6448536269514722, abs=1e-13)
        assert std_normal_sf(c.value) == pytest.approx(0.05, rel=1e-12)

    @pytest.mark.parametrize("n", [10**4, 10**7, 10**8])
    def test_round_trip(self, n):
        c = bonferroni_cutoff(EquicorrProblem(n, 0.05, 0.3))
        assert c.per_test_level == 0.05 / n
        assert std_normal_sf(c.value) == pytest.approx(0.05 / n, rel=1e-10)

    def test_huge_n_finite_and_ordered(self):
        c8 = bonferroni_cutoff(EquicorrProblem(10**8, 0.05, 0.0)).value
        c7 = bonferroni_cutoff(EquicorrProblem(10**7, 0.05, 0.0)).value
        assert math.isfinite(c8) and c8 > c7

    def test_monotone_in_n_and_alpha(self):
        ns = [1, 2, 5, 10, 100, 10**3, 10**5, 10**7, 10**9, 10**12]
        for alpha in [0.01, 0.05, 0.2]:
            cs = [bonferroni_cutoff(EquicorrProblem(n, alpha, 0.0)).value for n in ns]
            assert np.all(np.diff(cs) > 0)
        for n in ns:
            cs = [bonferroni_cutoff(EquicorrProblem(n, a, 0.0)).value for a in [0.01, 0.05, 0.1, 0.5]]
            assert np.all(np.diff(cs) < 0)


class TestKfwer:
    def test_k1_identity(self):
        p = EquicorrProblem(10**4, 0.05, 0.0)
        assert kfwer_cutoff(p, 1) == bonferroni_cutoff(p)

    def test_k5(self):
        p = EquicorrProblem(10**4, 0.05, 0.0)
        c5 = kfwer_cutoff(p, 5)
        assert std_normal_sf(c5.value) == pytest.approx(2.5e-5, rel=1e-10)
        assert c5.value < bonferroni_cutoff(p).value

    def test_domain(self):
        with pytest.raises(DomainError):
            kfwer_cutoff(EquicorrProblem(100, 0.5, 0.0), 2)
        with pytest.raises(DomainError):
            kfwer_cutoff(EquicorrProblem(100, 0.05, 0.0), 0)

    def test_decreasing_in_k(self):
        p = EquicorrProblem(1000, 0.01, 0.0)
        cs = [kfwer_cutoff(p, k).value for k in range(1, 100)]
        assert np.all(np.diff(cs) < 0)


class TestLemma1:
    def test_sqrt_bound_values(self):
        assert sqrt_2logn_bound(8) == pytest.approx(math.sqrt(2 * math.log(8)), rel=1e-15)
        assert sqrt_2logn_bound(8) == pytest.approx(2.0393, abs=1e-4)
        vals = [sqrt_2logn_bound(2**j) for j in range(1, 40)]
        assert np.all(np.diff(vals) > 0)
        with pytest.raises(DomainError):
            sqrt_2logn_bound(1)

    def test_ratio_diagnostic(self):
        rows = cutoff_ratio_diagnostic(0.05, [10**2, 10**4, 10**6, 10**8])
        ratios = [r for _, r in rows]
        assert all(0 < r < 1.2 for r in ratios)
        assert abs(ratios[-1] - 1) < abs(ratios[0] - 1)
        assert np.all(np.diff(ratios) < 0)
        assert cutoff_ratio_diagnostic(0.05, []) == []

    def test_bound_is_not_yet_active_at_1e6_for_alpha_05(self):
        # c_{.05,n} > sqrt(2 ln n) at n = 1e6: the bound only kicks in near 2.5e13
        c = bonferroni_cutoff(EquicorrProblem(10**6, 0.05, 0.0)).value
        assert c > sqrt_2logn_bound(10**6)

    def test_threshold_alpha_05(self):
        n_star, log_n = lemma1_threshold(0.05)
        assert 1e13 < n_star < 1e14
        # holds just above, fails just below
        for factor, holds in [(1.01, True), (0.99, False)]:
            n = n_star * factor
            c = bonferroni_cutoff(EquicorrProblem(int(n), 0.05, 0.0)).value
            assert (c <= math.sqrt(2 * math.log(n))) is holds

    def test_threshold_depends_on_alpha(self):
        # larger alpha -> the bound applies sooner
        assert lemma1_threshold(0.2)[1] < lemma1_threshold(0.05)[1] < lemma1_threshold(0.03)[1]
        assert lemma1_threshold(0.5)[0] < 100
        # for alpha = 0.01 the crossing lies beyond ln n = 700
        with pytest.raises(DomainError):
            lemma1_threshold(0.01)

    def test_onset_on_grid(self):
        grid = [10**e for e in range(2, 17)]
        assert lemma1_onset(0.05, grid) == 10**14
        assert lemma1_onset(0.05, grid[:8]) is None
        assert lemma1_onset(0.5, grid) == 100
