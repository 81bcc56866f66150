"""FWER under an arbitrary correlation matrix, plus Slepian comparisons.

Slepian's inequality says that raising correlations entrywise can only
raise the quadrant probability P(X_i <= a_i for all i). With every
off-diagonal entry at least delta > 0, the Bonferroni FWER under Sigma is
therefore bounded by the equicorrelated FWER at rho = delta, which
:func:`slepian_upper_bound` evaluates deterministically.
"""

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cutoffs import EquicorrProblem, bonferroni_cutoff, kfwer_cutoff
from .equicorr import QuadratureSpec, fwer_equicorr
from .errors import DomainError, MatrixValidationError
from .montecarlo import EstimateResult, McConfig, _reduce_batches, standard_normal

log = logging.getLogger(__name__)

GENERAL_MAX_N = 10**4
_CHUNK_ELEMENTS = 1 << 21


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """A validated correlation matrix with a cached factor.

    ``factor`` satisfies factor @ factor.T == entries (to rounding). It is
    the lower Cholesky factor when one exists and an eigen-based square
    root otherwise (singular matrices such as all-ones).
    """

    entries: np.ndarray
    factor: np.ndarray
    min_off_diag: float

    @property
    def n(self):
        return self.entries.shape[0]


def equicorrelated_matrix(n, rho):
    """M_n(rho): unit diagonal, rho everywhere else."""
    m = np.full((n, n), float(rho))
    np.fill_diagonal(m, 1.0)
    return m


def validate_correlation(matrix, sym_tol=1e-12, psd_tol=1e-10):
    """Check and package a raw matrix as a :class:`CorrelationMatrix`.

    Small negative eigenvalues (down to -psd_tol) are clipped to zero with
    a logged warning and the result rescaled to unit diagonal; anything
    more negative is rejected.
    """
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise MatrixValidationError("square", f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        bad = np.argwhere(~np.isfinite(a))
        raise MatrixValidationError("finite", "non-finite entries", map(tuple, bad.tolist()))
    n = a.shape[0]
    if n > GENERAL_MAX_N:
        raise MatrixValidationError("size", f"n={n} exceeds the dense limit {GENERAL_MAX_N}")
    asym = np.abs(a - a.T) > sym_tol
    if asym.any():
        bad = [(i, j) for i, j in np.argwhere(asym).tolist() if i < j]
        raise MatrixValidationError("symmetry", "matrix is not symmetric", bad)
    diag_bad = np.flatnonzero(np.abs(np.diag(a) - 1.0) > sym_tol)
    if diag_bad.size:
        raise MatrixValidationError("diagonal", "diagonal entries must be 1",
                                    [(i, i) for i in diag_bad.tolist()])
    out_of_range = np.abs(a) > 1.0 + sym_tol
    if out_of_range.any():
        bad = [(i, j) for i, j in np.argwhere(out_of_range).tolist() if i <= j]
        raise MatrixValidationError("range", "entries must lie in [-1, 1]", bad)
    a = 0.5 * (a + a.T)
    np.fill_diagonal(a, 1.0)

    try:
        factor = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(a)
        if w[0] < -psd_tol:
            raise MatrixValidationError(
                "psd", f"smallest eigenvalue {w[0]:.3g} below -{psd_tol:g}",
                [(int(i), int(i)) for i in np.flatnonzero(w < -psd_tol)])
        if w[0] < -1e-12:
            log.warning("clipping eigenvalues down to %.3g to zero", w[0])
        elif w[0] < 0:
            log.debug("clipping roundoff-level eigenvalue %.3g", w[0])
        factor = v * np.sqrt(np.clip(w, 0.0, None))
        # restore the unit diagonal after clipping
        scale = np.sqrt(np.einsum("ij,ij->i", factor, factor))
        factor = factor / scale[:, None]
        a = factor @ factor.T
        np.fill_diagonal(a, 1.0)

    off = a[~np.eye(n, dtype=bool)]
    min_off = float(off.min()) if off.size else 0.0
    a.setflags(write=False)
    factor.setflags(write=False)
    return CorrelationMatrix(a, factor, min_off)


def random_correlation_matrix(n, delta, rng, mix=None, rank=None):
    """Random correlation matrix with every off-diagonal entry >= delta.

    Built as mix * M_n(delta') + (1 - mix) * S with S a normalized Gram
    matrix of nonnegative vectors (so S has nonnegative entries) and
    delta' = delta / mix, which keeps the minimum off-diagonal at least
    delta. ``mix`` defaults to a uniform draw on [max(delta, 0.2), 1).
    """
    if not 0.0 <= delta < 1.0:
        raise DomainError("delta must lie in [0, 1)")
    if mix is None:
        mix = rng.uniform(max(delta, 0.2), 1.0)
    if not delta <= mix <= 1.0 or mix == 0:
        raise DomainError("need delta <= mix <= 1")
    d = rng.random((n, rank or n))
    gram = d @ d.T
    s = gram / np.sqrt(np.outer(np.diag(gram), np.diag(gram)))
    return mix * equicorrelated_matrix(n, delta / mix) + (1.0 - mix) * s


def _sample_x(sigma, rng, rows):
    z = standard_normal(rng, (rows, sigma.n))
    return z @ sigma.factor.T


def _chunked_count(sigma, rng, m, indicator):
    step = max(1, _CHUNK_ELEMENTS // sigma.n)
    hits = 0
    for start in range(0, m, step):
        rows = min(step, m - start)
        hits += np.count_nonzero(indicator(_sample_x(sigma, rng, rows)))
    return hits


def estimate_fwer_general(sigma, alpha, cfg=McConfig()):
    """MC estimate of the Bonferroni FWER when X ~ N(0, sigma)."""
    c = bonferroni_cutoff(EquicorrProblem(sigma.n, alpha, 0.0)).value
    hits = _reduce_batches(
        cfg, lambda rng, m: _chunked_count(sigma, rng, m, lambda x: x.max(axis=1) > c))
    return EstimateResult.from_hits(hits, cfg.replications, "mc_general")


def estimate_kfwer_general(sigma, alpha, k, cfg=McConfig()):
    """MC estimate of P(at least k of X_i exceed Phi^{-1}(1 - k alpha / n))."""
    c = kfwer_cutoff(EquicorrProblem(sigma.n, alpha, 0.0), k).value
    if k > sigma.n:
        return EstimateResult.from_hits(0, cfg.replications, "mc_general")
    hits = _reduce_batches(
        cfg,
        lambda rng, m: _chunked_count(
            sigma, rng, m, lambda x: np.count_nonzero(x > c, axis=1) >= k))
    return EstimateResult.from_hits(hits, cfg.replications, "mc_general")


def slepian_upper_bound(sigma, alpha, spec=QuadratureSpec()):
    """Deterministic bound FWER(Sigma) <= FWER(n, alpha, delta), delta = min off-diagonal."""
    delta = sigma.min_off_diag
    if not delta > 0:
        raise DomainError(f"Slepian bound needs a positive minimum correlation, got {delta:.6g}")
    return fwer_equicorr(EquicorrProblem(sigma.n, alpha, min(delta, 1.0)), spec)


def quadrant_probability_mc(sigma, bounds, cfg=McConfig()):
    """MC estimate of P(X_i <= a_i for every i) under N(0, sigma)."""
    a = np.asarray(bounds, dtype=float)
    if a.shape != (sigma.n,) or not np.all(np.isfinite(a)):
        raise DomainError("bounds must be a finite vector of length n")
    hits = _reduce_batches(
        cfg, lambda rng, m: _chunked_count(sigma, rng, m, lambda x: np.all(x <= a, axis=1)))
    return EstimateResult.from_hits(hits, cfg.replications, "mc_quadrant")


def combined_se(*results):
    return math.sqrt(sum(r.std_error ** 2 for r in results))


# -- matrix files -------------------------------------------------------------

def read_matrix(path):
    """Read a raw matrix from CSV (dense, no header) or JSON ({"n", "entries"})."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        with open(path) as fh:
            doc = json.load(fh)
        entries = np.asarray(doc["entries"], dtype=float)
        if "n" in doc and entries.shape != (doc["n"], doc["n"]):
            raise MatrixValidationError(
                "square", f"declared n={doc['n']} does not match shape {entries.shape}")
        return entries
    return np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=float))


def write_matrix(path, matrix):
    path = Path(path)
    matrix = np.asarray(matrix, dtype=float)
    if path.suffix.lower() == ".json":
        with open(path, "w") as fh:
            json.dump({"n": matrix.shape[0], "entries": matrix.tolist()}, fh)
    else:
        np.savetxt(path, matrix, delimiter=",", fmt="%.17g")


def load_correlation(path):
    return validate_correlation(read_matrix(path))
