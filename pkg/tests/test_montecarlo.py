import math
from dataclasses import replace

import numpy as np
import pytest
from scipy import special, stats

from fwerlab.cutoffs import EquicorrProblem, bonferroni_cutoff
from fwerlab.equicorr import FwerValue, fwer_independent, fwer_quadrature
from fwerlab.errors import DomainError, SamplerRefusal
from fwerlab.montecarlo import (
    EstimateResult,
    McConfig,
    Sampler,
    batch_rng,
    derive_seed,
    draw_exchangeable,
    estimate_exceedances,
    estimate_fwer,
    estimate_fwer_shared_max,
    estimate_kfwer,
    fwer_given_max,
    implied_shared_max,
    max_cdf,
    open_uniform,
    sample_kth_largest_inverse,
    sample_max_direct,
    sample_max_inverse_cdf,
    standard_normal,
    table_one_run,
    threshold_for_draw,
)


def p(n, rho, alpha=0.05):
    return EquicorrProblem(n, alpha, rho)


def within(a, b, k=4.0):
    se = math.hypot(a.std_error, b.std_error)
    return abs(a.estimate - b.estimate) <= k * se


class TestPrimitives:
    def test_open_uniform_never_hits_endpoints(self):
        u = open_uniform(batch_rng(1, 0), 10**6)
        assert u.min() > 0 and u.max() < 1
        assert open_uniform(batch_rng(1, 0)) == open_uniform(batch_rng(1, 0))

    def test_normals_look_normal(self):
        z = standard_normal(batch_rng(2, 0), 10**5)
        assert stats.kstest(z, "norm").pvalue > 1e-3

    def test_derive_seed_distinct(self):
        seeds = {derive_seed(0, i, j) for i in range(10) for j in range(6)}
        assert len(seeds) == 60
        assert derive_seed(5, 1, 2) == derive_seed(5, 1, 2)

    def test_threshold(self):
        prob = p(10**4, 0.0)
        c = bonferroni_cutoff(prob).value
        assert threshold_for_draw(prob, 3.0) == pytest.approx(c)
        prob = p(10**4, 0.5)
        assert threshold_for_draw(prob, c / math.sqrt(0.5)) == pytest.approx(0.0, abs=1e-14)
        t = threshold_for_draw(prob, np.linspace(-3, 3, 7))
        assert np.all(np.diff(t) < 0)
        with pytest.raises(DomainError):
            threshold_for_draw(p(10, 1.0), 0.0)

    def test_config_validation(self):
        with pytest.raises(DomainError):
            McConfig(replications=0)
        with pytest.raises(DomainError):
            McConfig(seed=-1)
        assert McConfig(sampler="direct").sampler is Sampler.DIRECT


class TestSamplers:
    def test_inverse_n1_is_normal(self):
        x = sample_max_inverse_cdf(1, batch_rng(3, 0), 10**5)
        assert stats.kstest(x, "norm").pvalue > 1e-3

    @pytest.mark.parametrize("n", [1, 10, 1000])
    def test_direct_matches_inverse(self, n):
        a = sample_max_direct(n, batch_rng(10, n), 10**5)
        b = sample_max_inverse_cdf(n, batch_rng(11, n), 10**5)
        assert stats.ks_2samp(a, b).pvalue > 1e-3

    def test_inverse_matches_exact_cdf(self):
        n = 10**8
        x = sample_max_inverse_cdf(n, batch_rng(4, 0), 10**5)
        assert stats.kstest(x, lambda t: max_cdf(t, n)).pvalue > 1e-3

    def test_transform_at_median(self):
        eps = -math.expm1(math.log(0.5) / 10**8)
        assert eps == pytest.approx(6.931471805599453e-9, rel=1e-12)
        x = -special.ndtri(eps)
        assert np.isfinite(x) and x > 5
        # the sampler applies the same transform to whatever uniform it draws
        rng = batch_rng(5, 0)
        u = open_uniform(batch_rng(5, 0))
        assert sample_max_inverse_cdf(10**8, rng) == pytest.approx(
            -special.ndtri(-math.expm1(math.log(u) / 10**8)), rel=1e-12)

    def test_direct_consumes_n_per_draw(self):
        rng = batch_rng(6, 0)
        sample_max_direct(50, rng, 4)
        after = open_uniform(rng)
        ref = batch_rng(6, 0)
        open_uniform(ref, 200)
        assert after == open_uniform(ref)

    def test_direct_refuses_large_n(self):
        with pytest.raises(SamplerRefusal):
            sample_max_direct(10**8, batch_rng(0, 0))
        with pytest.raises(SamplerRefusal):
            estimate_fwer(p(10**8, 0.5), McConfig(replications=10, sampler="direct"))

    def test_direct_mean_location(self):
        n = 10**5
        a = sample_max_direct(n, batch_rng(7, 0), 2000)
        b = sample_max_inverse_cdf(n, batch_rng(8, 0), 2000)
        se = math.hypot(a.std(), b.std()) / math.sqrt(2000)
        assert abs(a.mean() - b.mean()) < 4 * se
        assert a.mean() < math.sqrt(2 * math.log(n))

    def test_kth_largest_top_is_max(self):
        x = sample_kth_largest_inverse(1000, 1, batch_rng(9, 0), 10**5)
        y = sample_max_inverse_cdf(1000, batch_rng(9, 0), 10**5)
        assert np.array_equal(x, y)

    def test_kth_largest_against_sorting(self):
        n, k, m = 200, 4, 20000
        rng = np.random.default_rng(99)
        ref = np.sort(rng.standard_normal((m, n)), axis=1)[:, -k]
        x = sample_kth_largest_inverse(n, k, batch_rng(12, 0), m)
        assert stats.ks_2samp(x, ref).pvalue > 1e-3

    def test_kth_largest_ordered(self):
        cols = [sample_kth_largest_inverse(500, k, batch_rng(13, 0), 1000) for k in (1, 2, 5)]
        assert np.all(cols[0] >= cols[1]) and np.all(cols[1] >= cols[2])

    def test_draws_are_finite(self):
        draws = draw_exchangeable(p(10**6, 0.3), batch_rng(0, 0), 100)
        assert all(math.isfinite(d.beta) and math.isfinite(d.max_w) for d in draws)


class TestEstimateFwer:
    def test_deterministic(self):
        cfg = McConfig(replications=200_000, seed=42)
        assert estimate_fwer(p(10**5, 0.3), cfg) == estimate_fwer(p(10**5, 0.3), cfg)

    def test_worker_count_irrelevant(self):
        base = McConfig(replications=300_000, seed=42, batch_size=10_000)
        one = estimate_fwer(p(10**5, 0.3), base)
        four = estimate_fwer(p(10**5, 0.3), replace(base, workers=4))
        assert one == four

    def test_binomial_invariant(self):
        r = estimate_fwer(p(10**4, 0.2), McConfig(replications=123_457, seed=3))
        assert r.estimate == r.hits / r.replications
        assert r.std_error == math.sqrt(r.estimate * (1 - r.estimate) / r.replications)

    def test_independent_case(self):
        r = estimate_fwer(p(10**4, 0.0), McConfig(seed=8))
        assert abs(r.estimate - fwer_independent(10**4, 0.05).value) < 4 * r.std_error

    @pytest.mark.parametrize("sampler", ["direct", "inverse"])
    def test_against_quadrature(self, sampler):
        prob = p(1000, 0.4)
        r = estimate_fwer(prob, McConfig(replications=200_000, seed=9, sampler=sampler))
        assert abs(r.estimate - fwer_quadrature(prob).value) < 4 * r.std_error

    def test_rho_one_refused(self):
        with pytest.raises(DomainError):
            estimate_fwer(p(10, 1.0))


class TestKfwer:
    def test_k1_matches_fwer(self):
        prob = p(10**4, 0.3)
        a = estimate_kfwer(prob, 1, McConfig(seed=1))
        b = estimate_fwer(prob, McConfig(seed=2))
        assert within(a, b)

    def test_dominated_by_fwer_at_k_alpha(self):
        prob = p(10**4, 0.3, alpha=0.01)
        kf = estimate_kfwer(prob, 3, McConfig(seed=21))
        f = estimate_fwer(p(10**4, 0.3, alpha=0.03), McConfig(seed=22))
        assert kf.estimate <= f.estimate + 4 * math.hypot(kf.std_error, f.std_error)

    def test_k_beyond_n_is_zero(self):
        r = estimate_exceedances(p(5, 0.3), 6, 1.0, McConfig(replications=1000))
        assert r.estimate == 0.0 and r.hits == 0

    def test_k_alpha_too_large(self):
        with pytest.raises(DomainError):
            estimate_kfwer(p(100, 0.3), 25)

    def test_monotone_in_k_at_fixed_cutoff(self):
        cfg = McConfig(replications=100_000, seed=5)
        prob = p(10**4, 0.3)
        vals = [estimate_exceedances(prob, k, 3.5, cfg).hits for k in range(1, 7)]
        assert all(b <= a for a, b in zip(vals, vals[1:]))

    @pytest.mark.parametrize("n", [1000, 10**5])
    def test_order_statistic_path_matches_counting(self, n):
        prob = p(n, 0.3, alpha=0.2)
        reps = 40_000 if n == 1000 else 2_000
        a = estimate_kfwer(prob, 3, McConfig(replications=reps, seed=31, sampler="direct"))
        b = estimate_kfwer(prob, 3, McConfig(replications=200_000, seed=32))
        assert within(a, b)


class TestTableRun:
    def test_grid_shape_and_types(self):
        grid = table_one_run(0.05, [10**3, 10**4], [0.0, 0.5, 1.0], McConfig(replications=1000))
        assert isinstance(grid[0.0, 10**3], FwerValue)
        assert isinstance(grid[0.5, 10**4], EstimateResult)
        assert grid[1.0, 10**4].value == pytest.approx(5e-6)

    def test_cells_reproducible_individually(self):
        cfg = McConfig(replications=5000, seed=11)
        grid = table_one_run(0.05, [10**3, 10**4], [0.2, 0.5], cfg)
        alone = estimate_fwer(p(10**4, 0.5), replace(cfg, seed=derive_seed(11, 1, 1)))
        assert grid[0.5, 10**4] == alone

    def test_high_rho_huge_n_small(self):
        grid = table_one_run(0.05, [10**8], [0.9], McConfig(seed=0))
        assert grid[0.9, 10**8].estimate <= 2e-5


class TestSharedMaxProtocol:
    # printed 10^4 column for rho = 0.1 ... 0.9
    COLUMN = [0.007621, 0.014523, 0.014317, 0.011448, 0.008180,
              0.005227, 0.002909, 0.001325, 0.000390]

    def test_column_implies_one_maximum(self):
        # rows 0.1 ... 0.7; the last rows carry too few printed digits to pin w
        rhos = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7]
        ws = [implied_shared_max(p(10**4, r), v) for r, v in zip(rhos, self.COLUMN)]
        assert max(ws) - min(ws) < 0.01
        # the exact FWER values imply no common w
        exact = [implied_shared_max(p(10**4, r), fwer_quadrature(p(10**4, r)).value) for r in rhos]
        assert max(exact) - min(exact) > 0.1

    def test_conditional_value_round_trip(self):
        prob = p(10**5, 0.4)
        assert fwer_given_max(prob, implied_shared_max(prob, 0.0123)) == pytest.approx(0.0123, rel=1e-10)

    def test_protocol_estimates_conditional_probability(self):
        prob = p(10**4, 0.5)
        r, w = estimate_fwer_shared_max(prob, McConfig(replications=200_000, seed=4))
        assert abs(r.estimate - fwer_given_max(prob, w)) < 4 * max(r.std_error, 1e-6)


@pytest.mark.xfail(strict=True, reason="printed cell is conditional on a single realized maximum")
@pytest.mark.parametrize("n,rho,printed", [(10**4, 0.5, 0.008180), (10**6, 0.1, 0.026960)])
def test_printed_cells_reproduce(n, rho, printed):
    r = estimate_fwer(p(n, rho), McConfig(seed=2024))
    se = math.hypot(r.std_error, math.sqrt(printed * (1 - printed) / 10**6))
    assert abs(r.estimate - printed) < 4 * se
