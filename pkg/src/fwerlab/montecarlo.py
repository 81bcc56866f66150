"""Monte Carlo FWER and k-FWER under the equicorrelated model.

Each replication draws a shared factor beta ~ N(0, 1) and asks whether
the maximum of n iid standard normals exceeds

    C(beta) = (c - sqrt(rho) * beta) / sqrt(1 - rho).

Two samplers produce that maximum:

* ``direct``: draw all n variates (cost O(n) per replication);
* ``inverse``: invert the CDF Phi**n of the maximum at one uniform (O(1)).

Randomness comes from Philox streams keyed by (seed, batch index), so a
batch's draws do not depend on which worker runs it or in what order.
Normal variates are inverse-CDF transforms of uniforms.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .cutoffs import EquicorrProblem, bonferroni_cutoff, kfwer_cutoff
from .equicorr import fwer_independent, fwer_perfectly_correlated
from .errors import DomainError, SamplerRefusal
from .gauss import (
    log_cdf_pow,
    std_normal_quantile,
    std_normal_quantile_complementary,
    std_normal_sf,
)

DIRECT_MAX_CEILING = 10**7
# elements per chunk when materialising n variates per replication
_CHUNK_ELEMENTS = 1 << 22
_UNIFORM_SCALE = 2.0**-52


class Sampler(str, Enum):
    DIRECT = "direct"
    INVERSE = "inverse"


@dataclass(frozen=True)
class McConfig:
    replications: int = 10**6
    seed: int = 0
    sampler: Sampler = Sampler.INVERSE
    batch_size: int = 1 << 16
    direct_ceiling: int = DIRECT_MAX_CEILING
    workers: int = 1

    def __post_init__(self):
        if self.replications < 1:
            raise DomainError("replications must be >= 1")
        if self.batch_size < 1:
            raise DomainError("batch_size must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "sampler", Sampler(self.sampler))


@dataclass(frozen=True)
class EstimateResult:
    estimate: float
    std_error: float
    replications: int
    hits: int
    method: str

    @classmethod
    def from_hits(cls, hits, replications, method):
        p = hits / replications
        return cls(p, math.sqrt(p * (1.0 - p) / replications), replications, int(hits), method)


@dataclass(frozen=True)
class ExchangeableDraw:
    beta: float
    max_w: float


def batch_rng(seed, batch_index):
    """Independent Philox generator for one batch."""
    ss = np.random.SeedSequence([int(seed), int(batch_index)])
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed, *keys):
    """A child seed for a named sub-computation (e.g. one table cell)."""
    ss = np.random.SeedSequence([int(seed), *[int(k) for k in keys]])
    return int(ss.generate_state(1, np.uint64)[0])


def open_uniform(rng, size=None):
    """Uniforms on the open interval (0, 1), on a 2**-52 grid offset by half a step."""
    k = rng.integers(0, 2**52, size=size, dtype=np.int64)
    return (k + 0.5) * _UNIFORM_SCALE


def standard_normal(rng, size=None):
    return std_normal_quantile(open_uniform(rng, size))


def threshold_for_draw(problem, beta, cutoff=None):
    """C(beta) = (c - sqrt(rho) beta) / sqrt(1 - rho); c defaults to Bonferroni."""
    if problem.rho >= 1.0:
        raise DomainError("rho = 1 is degenerate; use the closed form")
    c = bonferroni_cutoff(problem).value if cutoff is None else cutoff
    return (c - math.sqrt(problem.rho) * np.asarray(beta)) / math.sqrt(1.0 - problem.rho)


def _rows_per_chunk(n):
    return max(1, _CHUNK_ELEMENTS // n)


def sample_max_direct(n, rng, size=None, ceiling=DIRECT_MAX_CEILING):
    """Maximum of n iid standard normals, drawing all n of them.

    The max is taken on the uniforms and transformed once, which gives the
    same variate as transforming first (the transform is increasing).
    Consumes exactly n uniforms per returned value.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    if n > ceiling:
        raise SamplerRefusal(f"direct sampler refuses n={n} > {ceiling}; use the inverse sampler")
    m = 1 if size is None else int(size)
    out = np.empty(m)
    step = _rows_per_chunk(n)
    for start in range(0, m, step):
        rows = min(step, m - start)
        k = rng.integers(0, 2**52, size=(rows, n), dtype=np.int64).max(axis=1)
        # 1 - U for the largest U, exact on the grid
        tail = (2**52 - k - 0.5) * _UNIFORM_SCALE
        out[start:start + rows] = std_normal_quantile_complementary(tail)
    return float(out[0]) if size is None else out


def _max_from_log_uniform(log_top):
    # log_top = log of the top uniform order statistic; return its normal quantile
    eps = -np.expm1(log_top)
    return std_normal_quantile_complementary(eps)


def sample_max_inverse_cdf(n, rng, size=None):
    """Maximum of n iid standard normals from a single uniform per draw.

    With U uniform, U**(1/n) has the law of the top uniform order statistic,
    so Phi^{-1}(U**(1/n)) has CDF Phi**n. The tail probability
    1 - U**(1/n) = -expm1(log(U)/n) is formed without cancellation.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    u = open_uniform(rng, size)
    out = _max_from_log_uniform(np.log(u) / n)
    return float(out) if size is None else out


def sample_kth_largest_inverse(n, k, rng, size):
    """k-th largest of n iid standard normals from k uniforms per draw.

    Uses the Renyi representation of the top uniform order statistics:
    U_(n) = V_1**(1/n), U_(n-j) = U_(n-j+1) * V_{j+1}**(1/(n-j)). Columns are
    drawn one at a time so that, for a fixed seed, the draws for k and k+1
    share their first k columns.
    """
    if not 1 <= k <= n:
        raise DomainError("need 1 <= k <= n")
    log_top = np.zeros(size)
    for j in range(k):
        log_top += np.log(open_uniform(rng, size)) / (n - j)
    return _max_from_log_uniform(log_top)


def _reduce_batches(cfg, batch_fn):
    n_batches = -(-cfg.replications // cfg.batch_size)
    sizes = [min(cfg.batch_size, cfg.replications - b * cfg.batch_size) for b in range(n_batches)]

    def run(b):
        return batch_fn(batch_rng(cfg.seed, b), sizes[b])

    if cfg.workers > 1 and n_batches > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            counts = list(pool.map(run, range(n_batches)))
    else:
        counts = [run(b) for b in range(n_batches)]
    return sum(int(c) for c in counts)


def _check_sampler(problem, cfg):
    if cfg.sampler is Sampler.DIRECT and problem.n > cfg.direct_ceiling:
        raise SamplerRefusal(
            f"direct sampler refuses n={problem.n} > {cfg.direct_ceiling}; use the inverse sampler")


def estimate_fwer(problem, cfg=McConfig()):
    """MC estimate of FWER(n, alpha, rho) for 0 <= rho < 1."""
    if problem.rho >= 1.0:
        raise DomainError("rho = 1 never enters Monte Carlo; use fwer_perfectly_correlated")
    _check_sampler(problem, cfg)
    n = problem.n
    c = bonferroni_cutoff(problem).value

    def batch(rng, m):
        beta = standard_normal(rng, m)
        thresh = threshold_for_draw(problem, beta, c)
        if cfg.sampler is Sampler.DIRECT:
            w = sample_max_direct(n, rng, m, cfg.direct_ceiling)
        else:
            w = sample_max_inverse_cdf(n, rng, m)
        return np.count_nonzero(w > thresh)

    hits = _reduce_batches(cfg, batch)
    return EstimateResult.from_hits(hits, cfg.replications, f"mc_{cfg.sampler.value}")


def estimate_exceedances(problem, k, cutoff, cfg=McConfig()):
    """MC estimate of P(at least k of the n statistics exceed ``cutoff``)."""
    if problem.rho >= 1.0:
        raise DomainError("rho = 1 never enters Monte Carlo")
    _check_sampler(problem, cfg)
    n = problem.n
    method = f"mc_{cfg.sampler.value}"
    if k > n:
        return EstimateResult.from_hits(0, cfg.replications, method)

    def batch(rng, m):
        beta = standard_normal(rng, m)
        thresh = threshold_for_draw(problem, beta, cutoff)
        if cfg.sampler is Sampler.INVERSE:
            return np.count_nonzero(sample_kth_largest_inverse(n, k, rng, m) > thresh)
        # direct: count W_i > C as (1 - U_i) < sf(C); 1 - U is exact on the grid
        tail_prob = np.asarray(std_normal_sf(thresh))
        hits = 0
        step = _rows_per_chunk(n)
        for start in range(0, m, step):
            rows = min(step, m - start)
            kk = rng.integers(0, 2**52, size=(rows, n), dtype=np.int64)
            tails = (2**52 - kk - 0.5) * _UNIFORM_SCALE
            counts = np.count_nonzero(tails < tail_prob[start:start + rows, None], axis=1)
            hits += np.count_nonzero(counts >= k)
        return hits

    hits = _reduce_batches(cfg, batch)
    return EstimateResult.from_hits(hits, cfg.replications, method)


def estimate_kfwer(problem, k, cfg=McConfig()):
    """MC estimate of k-FWER at the cutoff Phi^{-1}(1 - k alpha / n)."""
    cutoff = kfwer_cutoff(problem, k).value
    return estimate_exceedances(problem, k, cutoff, cfg)


def draw_exchangeable(problem, rng, size, sampler=Sampler.INVERSE):
    """Raw (beta, max W) pairs, mostly for plotting and debugging."""
    beta = standard_normal(rng, size)
    if Sampler(sampler) is Sampler.DIRECT:
        w = sample_max_direct(problem.n, rng, size)
    else:
        w = sample_max_inverse_cdf(problem.n, rng, size)
    return [ExchangeableDraw(float(b), float(x)) for b, x in zip(beta, w)]


def table_one_run(alpha, ns, rhos, cfg=McConfig()):
    """Grid of FWER estimates keyed by (rho, n).

    Cells with rho = 0 hold the exact closed form (an ``FwerValue``);
    cells with rho = 1 likewise hold alpha/n. Every other cell is an
    ``EstimateResult`` whose seed is derived from ``cfg.seed`` and the cell
    position, so cells are independent and individually reproducible.
    """
    grid = {}
    for i, rho in enumerate(rhos):
        for j, n in enumerate(ns):
            if rho == 0.0:
                grid[rho, n] = fwer_independent(n, alpha)
            elif rho == 1.0:
                grid[rho, n] = fwer_perfectly_correlated(n, alpha)
            else:
                cell_cfg = replace(cfg, seed=derive_seed(cfg.seed, i, j))
                grid[rho, n] = estimate_fwer(EquicorrProblem(n, alpha, rho), cell_cfg)
    return grid


def estimate_fwer_shared_max(problem, cfg=McConfig()):
    """The single-maximum protocol: one max W shared by every beta draw.

    Returns ``(result, max_w)``. The estimate is the fraction of beta draws
    whose threshold falls below that one max, i.e. an estimate of the
    *conditional* probability sf((c - sqrt(1-rho) * max_w) / sqrt(rho)).
    It is not an unbiased FWER estimator; it exists to reproduce and
    diagnose tables computed this way.
    """
    if not 0.0 < problem.rho < 1.0:
        raise DomainError("shared-max protocol needs 0 < rho < 1")
    rng = batch_rng(cfg.seed, 2**32)
    max_w = sample_max_inverse_cdf(problem.n, rng)
    c = bonferroni_cutoff(problem).value

    def batch(rng, m):
        return np.count_nonzero(max_w > threshold_for_draw(problem, standard_normal(rng, m), c))

    hits = _reduce_batches(cfg, batch)
    return EstimateResult.from_hits(hits, cfg.replications, "mc_shared_max"), max_w


def implied_shared_max(problem, value):
    """The max W that makes the shared-max protocol's expectation equal ``value``.

    Inverts value = sf((c - sqrt(1-rho) * w) / sqrt(rho)) for w.
    """
    if not 0.0 < problem.rho < 1.0:
        raise DomainError("needs 0 < rho < 1")
    c = bonferroni_cutoff(problem).value
    s = std_normal_quantile_complementary(value)
    return (c - math.sqrt(problem.rho) * s) / math.sqrt(1.0 - problem.rho)


def fwer_given_max(problem, max_w):
    """Conditional FWER given the realized maximum: P_beta(max_w > C(beta))."""
    c = bonferroni_cutoff(problem).value
    return float(std_normal_sf((c - math.sqrt(1.0 - problem.rho) * max_w) / math.sqrt(problem.rho)))


def max_cdf(x, n):
    """CDF of the maximum of n iid standard normals, Phi(x)**n."""
    return np.exp(log_cdf_pow(x, n))
