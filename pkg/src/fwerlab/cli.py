"""Command-line entry point: ``fwerlab {table1,eval,limits,slepian,kfwer}``.

Exit codes: 0 success, 2 usage or validation error, 3 method not
applicable, 4 numeric failure.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field

from . import __version__
from .cutoffs import (
    EquicorrProblem,
    bonferroni_cutoff,
    cutoff_ratio_diagnostic,
    kfwer_cutoff,
)
from .equicorr import (
    fwer_asymptotic_approx,
    fwer_equicorr,
    limit_diagnostic_lemma2,
)
from .errors import ConvergenceError, DomainError, MatrixValidationError, SamplerRefusal
from .general import (
    combined_se,
    estimate_fwer_general,
    estimate_kfwer_general,
    load_correlation,
    slepian_upper_bound,
)
from .montecarlo import McConfig, derive_seed, estimate_fwer, estimate_kfwer

EXIT_OK, EXIT_USAGE, EXIT_INAPPLICABLE, EXIT_NUMERIC = 0, 2, 3, 4

TABLE1_NS = [10**4, 10**5, 10**6, 10**7, 10**8]
TABLE1_RHOS = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]

CSV_FIELDS = ["alpha", "n", "rho", "k", "quantity", "method", "value", "uncertainty", "note"]


@dataclass
class RunConfig:
    command: str
    alpha: float = 0.05
    ns: list = field(default_factory=list)
    rhos: list = field(default_factory=list)
    k: int | None = None
    reps: int = 10**6
    seed: int = 0
    sampler: str = "inverse"
    fmt: str = "table"
    out: str | None = None
    matrix: str | None = None
    timing: bool = False


@dataclass
class ReportRow:
    alpha: float
    n: int | None
    rho: float | None
    k: int | None
    quantity: str
    method: str
    value: float | None
    uncertainty: float | None = None
    note: str = ""
    elapsed_ms: float = 0.0


class CommandFailure(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


# -- argument parsing ---------------------------------------------------------

def _int_value(text):
    v = float(text)
    if not v.is_integer() or v < 1:
        raise argparse.ArgumentTypeError(f"not a positive integer: {text}")
    return int(v)


def _list_of(conv):
    def parse(text):
        try:
            return [conv(t) for t in text.replace(" ", "").split(",") if t]
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise argparse.ArgumentTypeError(str(exc))
    return parse


def _default_seed():
    env = os.environ.get("FWERLAB_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise CommandFailure(EXIT_USAGE, f"FWERLAB_SEED must be an integer, got {env!r}")


def build_parser():
    p = argparse.ArgumentParser(prog="fwerlab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--alpha", type=float, default=0.05)
        sp.add_argument("--n", "--ns", dest="ns", type=_list_of(_int_value), default=None,
                        help="comma-separated list, scientific notation allowed (1e6)")
        sp.add_argument("--rho", "--rhos", dest="rhos", type=_list_of(float), default=None)
        sp.add_argument("--k", type=int, default=None)
        sp.add_argument("--reps", type=_int_value, default=10**6)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--sampler", choices=["direct", "inverse"], default="inverse")
        sp.add_argument("--format", dest="fmt", choices=["csv", "json", "table"], default="table")
        sp.add_argument("--out", default=None)
        sp.add_argument("--matrix", default=None)
        sp.add_argument("--timing", action="store_true",
                        help="add elapsed_ms to CSV output (makes it non-reproducible)")

    for name, help_text in [
        ("table1", "FWER grid over rho and n, every method side by side"),
        ("eval", "one (n, alpha, rho) problem by every method"),
        ("limits", "convergence diagnostics as n grows"),
        ("slepian", "Slepian bound check for a correlation matrix file"),
        ("kfwer", "k-FWER estimate and the FWER(k*alpha) bound"),
    ]:
        common(sub.add_parser(name, help=help_text))
    return p


def config_from_args(args):
    seed = args.seed if args.seed is not None else _default_seed()
    defaults = {
        "table1": (TABLE1_NS, TABLE1_RHOS),
        "eval": ([10**4], [0.5]),
        "limits": ([10**e for e in range(2, 9)], [0.5]),
        "slepian": ([], []),
        "kfwer": ([10**4], [0.3]),
    }[args.command]
    return RunConfig(
        command=args.command, alpha=args.alpha,
        ns=args.ns if args.ns is not None else list(defaults[0]),
        rhos=args.rhos if args.rhos is not None else list(defaults[1]),
        k=args.k, reps=args.reps, seed=seed, sampler=args.sampler, fmt=args.fmt,
        out=args.out, matrix=args.matrix, timing=args.timing)


# -- helpers --------------------------------------------------------------------

def _mc_config(cfg, *keys):
    seed = derive_seed(cfg.seed, *keys) if keys else cfg.seed
    return McConfig(replications=cfg.reps, seed=seed, sampler=cfg.sampler)


class _Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.ms = 1000.0 * (time.perf_counter() - self.start)


def _fwer_row(cfg, problem, fv, quantity="fwer", note=""):
    err = fv.error_estimate if math.isfinite(fv.error_estimate) else None
    if fv.method.value == "asymptotic_approx" and not note:
        note = "accuracy unquantified"
    return ReportRow(cfg.alpha, problem.n, problem.rho, None, quantity, fv.method.value,
                     fv.value, err, note)


def _mc_row(cfg, n, rho, k, quantity, res, note=""):
    return ReportRow(cfg.alpha, n, rho, k, quantity, res.method, res.estimate, res.std_error, note)


def _problem(cfg, n, rho):
    try:
        return EquicorrProblem(n, cfg.alpha, rho)
    except DomainError as exc:
        raise CommandFailure(EXIT_USAGE, str(exc))


# -- commands ---------------------------------------------------------------------

def cmd_table1(cfg):
    """Full (rho, n) grid: MC with SE, quadrature, closed forms and the approximation."""
    if not cfg.ns or not cfg.rhos:
        raise CommandFailure(EXIT_USAGE, "table1 needs nonempty --ns and --rhos")
    for rho in cfg.rhos:
        _problem(cfg, cfg.ns[0], rho)
    rows, code = [], EXIT_OK
    for i, rho in enumerate(cfg.rhos):
        for j, n in enumerate(cfg.ns):
            problem = _problem(cfg, n, rho)
            try:
                with _Timer() as t:
                    fv = fwer_equicorr(problem)
                row = _fwer_row(cfg, problem, fv)
                row.elapsed_ms = t.ms
                rows.append(row)
                if 0.0 < rho < 1.0:
                    with _Timer() as t:
                        # same per-cell seed as montecarlo.table_one_run
                        est = estimate_fwer(problem, _mc_config(cfg, i, j))
                    row = _mc_row(cfg, n, rho, None, "fwer", est)
                    row.elapsed_ms = t.ms
                    rows.append(row)
                if rho < 1.0:
                    rows.append(_fwer_row(cfg, problem, fwer_asymptotic_approx(problem)))
            except SamplerRefusal as exc:
                rows.append(ReportRow(cfg.alpha, n, rho, None, "fwer", f"mc_{cfg.sampler}",
                                      None, None, f"failed: {exc}"))
                code = max(code, EXIT_INAPPLICABLE)
            except ConvergenceError as exc:
                rows.append(ReportRow(cfg.alpha, n, rho, None, "fwer", "quadrature",
                                      exc.estimate, exc.error, f"failed: {exc}"))
                code = EXIT_NUMERIC
    return rows, code


def cmd_eval(cfg):
    if len(cfg.ns) != 1 or len(cfg.rhos) != 1:
        raise CommandFailure(EXIT_USAGE, "eval takes exactly one --n and one --rho")
    problem = _problem(cfg, cfg.ns[0], cfg.rhos[0])
    n, rho = problem.n, problem.rho
    rows = [ReportRow(cfg.alpha, n, rho, None, "cutoff", "closed_form",
                      bonferroni_cutoff(problem).value)]
    fv = fwer_equicorr(problem)
    rows.append(_fwer_row(cfg, problem, fv))
    if fv.method.value == "closed_form":
        rows.append(ReportRow(cfg.alpha, n, rho, None, "fwer", "quadrature", None, None,
                              "closed form used"))
    if rho < 1.0:
        with _Timer() as t:
            est = estimate_fwer(problem, _mc_config(cfg))
        row = _mc_row(cfg, n, rho, None, "fwer", est)
        row.elapsed_ms = t.ms
        rows.append(row)
        rows.append(_fwer_row(cfg, problem, fwer_asymptotic_approx(problem)))
    else:
        rows.append(ReportRow(cfg.alpha, n, rho, None, "fwer", f"mc_{cfg.sampler}", None, None,
                              "skipped (degenerate)"))
        rows.append(ReportRow(cfg.alpha, n, rho, None, "fwer", "asymptotic_approx", None, None,
                              "undefined at rho = 1"))
    rows.append(ReportRow(cfg.alpha, n, rho, None, "fwer_bound", "alpha_times_1_minus_rho",
                          cfg.alpha * (1.0 - rho), None, "asymptotic bound"))
    return rows, EXIT_OK


def cmd_limits(cfg):
    if len(cfg.rhos) != 1:
        raise CommandFailure(EXIT_USAGE, "limits takes exactly one --rho")
    rho = cfg.rhos[0]
    ns = list(cfg.ns)
    if ns != sorted(ns) or not ns:
        raise CommandFailure(EXIT_USAGE, "--ns must be nonempty and ascending")
    for n in ns:
        _problem(cfg, n, rho)
    rows = []
    ratios = dict(cutoff_ratio_diagnostic(cfg.alpha, [n for n in ns if n >= 2]))
    lemma2 = dict(limit_diagnostic_lemma2(cfg.alpha, rho, ns)) if 0.0 < rho < 1.0 else {}
    prev = None
    for n in ns:
        problem = _problem(cfg, n, rho)
        if n in ratios:
            rows.append(ReportRow(cfg.alpha, n, rho, None, "cutoff_ratio", "closed_form", ratios[n]))
        if n in lemma2:
            rows.append(ReportRow(cfg.alpha, n, rho, None, "cdf_power_at_cutoff", "closed_form",
                                  lemma2[n]))
        fv = fwer_equicorr(problem)
        note = ""
        if rho == 0.0:
            note = "no decay (independence)"
        elif prev is not None and len(ns) > 1:
            note = "decreasing" if fv.value < prev else "increasing"
        rows.append(_fwer_row(cfg, problem, fv, note=note))
        prev = fv.value
        if rho < 1.0:
            rows.append(_fwer_row(cfg, problem, fwer_asymptotic_approx(problem)))
    return rows, EXIT_OK


def _load_matrix(cfg):
    if not cfg.matrix:
        raise CommandFailure(EXIT_USAGE, "--matrix PATH is required")
    try:
        return load_correlation(cfg.matrix)
    except (OSError, ValueError, KeyError) as exc:
        check = exc.check if isinstance(exc, MatrixValidationError) else "file"
        raise CommandFailure(EXIT_USAGE, f"matrix {check} error: {exc}")


def _check_row(cfg, n, rho, k, lhs, rhs, tol, label):
    ok = lhs <= rhs + tol
    return ReportRow(cfg.alpha, n, rho, k, "check", label, float(ok), tol,
                     "PASS" if ok else "FAIL")


def cmd_slepian(cfg):
    sigma = _load_matrix(cfg)
    delta = sigma.min_off_diag
    rows = [ReportRow(cfg.alpha, sigma.n, None, None, "min_correlation", "closed_form", delta)]
    if not delta > 0:
        raise CommandFailure(EXIT_INAPPLICABLE,
                             f"Slepian bound inapplicable: minimum correlation {delta:.6g} <= 0")
    bound = slepian_upper_bound(sigma, cfg.alpha)
    rows.append(_fwer_row(cfg, EquicorrProblem(sigma.n, cfg.alpha, delta), bound,
                          quantity="slepian_bound"))
    with _Timer() as t:
        est = estimate_fwer_general(sigma, cfg.alpha, _mc_config(cfg))
    row = _mc_row(cfg, sigma.n, None, None, "fwer", est)
    row.elapsed_ms = t.ms
    rows.append(row)
    rows.append(_check_row(cfg, sigma.n, None, None, est.estimate, bound.value,
                           4 * est.std_error, "mc_le_bound_plus_4se"))
    return rows, EXIT_OK


def cmd_kfwer(cfg):
    k = cfg.k if cfg.k is not None else 1
    if k < 1 or k * cfg.alpha >= 1.0:
        raise CommandFailure(EXIT_USAGE, f"need k >= 1 and k*alpha < 1 (k={k}, alpha={cfg.alpha})")
    if cfg.matrix:
        sigma = _load_matrix(cfg)
        n, rho = sigma.n, None
        kf = estimate_kfwer_general(sigma, cfg.alpha, k, _mc_config(cfg, 0))
        fw = estimate_fwer_general(sigma, k * cfg.alpha, _mc_config(cfg, 1))
        exact = None
    else:
        if len(cfg.ns) != 1 or len(cfg.rhos) != 1:
            raise CommandFailure(EXIT_USAGE, "kfwer takes exactly one --n and one --rho")
        n, rho = cfg.ns[0], cfg.rhos[0]
        problem = _problem(cfg, n, rho)
        if rho >= 1.0:
            raise CommandFailure(EXIT_INAPPLICABLE, "rho = 1 never enters Monte Carlo")
        kf = estimate_kfwer(problem, k, _mc_config(cfg, 0))
        fw = estimate_fwer(EquicorrProblem(n, k * cfg.alpha, rho), _mc_config(cfg, 1))
        exact = fwer_equicorr(EquicorrProblem(n, k * cfg.alpha, rho))
    base = EquicorrProblem(n, cfg.alpha, 0.0)
    rows = [
        ReportRow(cfg.alpha, n, rho, 1, "cutoff", "closed_form", bonferroni_cutoff(base).value),
        ReportRow(cfg.alpha, n, rho, k, "kfwer_cutoff", "closed_form", kfwer_cutoff(base, k).value),
        _mc_row(cfg, n, rho, k, "kfwer", kf),
        _mc_row(cfg, n, rho, None, "fwer_at_k_alpha", fw),
    ]
    if exact is not None:
        rows.append(ReportRow(cfg.alpha, n, rho, None, "fwer_at_k_alpha", exact.method.value,
                              exact.value, exact.error_estimate))
    rows.append(_check_row(cfg, n, rho, k, kf.estimate, fw.estimate, 4 * combined_se(kf, fw),
                           "kfwer_le_fwer_k_alpha_plus_4se"))
    return rows, EXIT_OK


COMMANDS = {
    "table1": cmd_table1,
    "eval": cmd_eval,
    "limits": cmd_limits,
    "slepian": cmd_slepian,
    "kfwer": cmd_kfwer,
}


# -- output -----------------------------------------------------------------------

def _num(v):
    if v is None or (isinstance(v, float) and not math.isfinite(v)):
        return ""
    return repr(float(v)) if isinstance(v, float) else str(v)


def render_csv(rows, timing=False):
    fields = CSV_FIELDS + (["elapsed_ms"] if timing else [])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in rows:
        d = asdict(r)
        w.writerow([_num(d[f]) if f not in ("quantity", "method", "note") else d[f] for f in fields])
    return buf.getvalue()


def parse_csv(text):
    """Inverse of :func:`render_csv` for numeric fields."""
    out = []
    for rec in csv.DictReader(io.StringIO(text)):
        row = {}
        for key, val in rec.items():
            if key in ("quantity", "method", "note"):
                row[key] = val
            elif val == "":
                row[key] = None
            elif key in ("n", "k"):
                row[key] = int(val)
            else:
                row[key] = float(val)
        out.append(row)
    return out


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def render_json(rows, cfg):
    doc = {
        "config": asdict(cfg),
        "rows": [{k: _json_safe(v) for k, v in asdict(r).items()} for r in rows],
        "version": __version__,
    }
    return json.dumps(doc, indent=2) + "\n"


def _fmt_prob(v, method):
    if v is None:
        return "-"
    if method == "closed_form":
        return f"{v:.8f}"
    if method == "asymptotic_approx":
        return f"{v:.4g}"
    return f"{v:.6f}"


def _fmt_se(v):
    return "" if v is None else f" ({v:.2g})"


def render_table(rows, cfg):
    if cfg.command == "table1":
        return _render_grid(rows, cfg)
    lines = [f"fwerlab {cfg.command}  alpha={cfg.alpha}"]
    header = f"{'n':>11} {'rho':>5} {'k':>3}  {'quantity':<20} {'method':<24} {'value':>14}  uncertainty  note"
    lines += [header, "-" * len(header)]
    for r in rows:
        if r.value is None:
            val = "-"
        elif r.quantity in ("fwer", "kfwer", "fwer_at_k_alpha", "slepian_bound"):
            val = _fmt_prob(r.value, r.method)
        else:
            val = f"{r.value:.10g}"
        unc = "" if r.uncertainty is None else f"{r.uncertainty:.2g}"
        lines.append(
            f"{'' if r.n is None else r.n:>11} {'' if r.rho is None else r.rho:>5} "
            f"{'' if r.k is None else r.k:>3}  {r.quantity:<20} {r.method:<24} {val:>14}  "
            f"{unc:<11}  {r.note}")
    return "\n".join(lines) + "\n"


def _render_grid(rows, cfg):
    blocks = [
        ("Monte Carlo estimate (standard error)", lambda m: m.startswith("mc_")),
        ("Exact: closed form / quadrature", lambda m: m in ("closed_form", "quadrature")),
        ("Large-n approximation 1 - exp(-alpha n^(-rho/(1-rho))) [accuracy unquantified]",
         lambda m: m == "asymptotic_approx"),
    ]
    lines = [f"FWER(n, alpha={cfg.alpha}, rho): rows rho, columns n"]
    width = 22
    for title, keep in blocks:
        cells = {(r.rho, r.n): r for r in rows if r.quantity == "fwer" and keep(r.method)}
        if not cells:
            continue
        lines += ["", title, f"{'rho':>5} " + "".join(f"{n:>{width}}" for n in cfg.ns)]
        for rho in cfg.rhos:
            parts = []
            for n in cfg.ns:
                r = cells.get((rho, n))
                if r is None:
                    parts.append(f"{'':>{width}}")
                elif r.method.startswith("mc_"):
                    parts.append(f"{_fmt_prob(r.value, r.method) + _fmt_se(r.uncertainty):>{width}}")
                else:
                    parts.append(f"{_fmt_prob(r.value, r.method):>{width}}")
            lines.append(f"{rho:>5} " + "".join(parts))
    failures = [r for r in rows if r.note.startswith("failed")]
    for r in failures:
        lines.append(f"cell rho={r.rho} n={r.n}: {r.note}")
    return "\n".join(lines) + "\n"


def emit(rows, cfg, stream=None):
    if cfg.fmt == "csv":
        text = render_csv(rows, cfg.timing)
    elif cfg.fmt == "json":
        text = render_json(rows, cfg)
    else:
        text = render_table(rows, cfg)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        (stream or sys.stdout).write(text)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
    except CommandFailure as exc:
        print(f"fwerlab {args.command}: {exc}", file=sys.stderr)
        return exc.code
    try:
        rows, code = COMMANDS[cfg.command](cfg)
    except CommandFailure as exc:
        print(f"fwerlab {cfg.command}: {exc}", file=sys.stderr)
        return exc.code
    except (DomainError, MatrixValidationError) as exc:
        print(f"fwerlab {cfg.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SamplerRefusal as exc:
        print(f"fwerlab {cfg.command}: {exc}", file=sys.stderr)
        return EXIT_INAPPLICABLE
    except ConvergenceError as exc:
        print(f"fwerlab {cfg.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    emit(rows, cfg)
    return code


if __name__ == "__main__":
    sys.exit(main())
