"""Command-line front end.

Subcommands: count (enumerate), predict (closed form), verify (sweep both and
compare), zeta (L-polynomial from counts), period (first minimal degree),
levelsets (fiber sizes of Q).  Exit status is 0 when everything checked
out.  A sweep with disagreements exits 2; an operational error exits 1.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import closed_form as cf
from . import qform_oracle as qo
from . import weil

EXIT_OK, EXIT_ERROR, EXIT_DISAGREE = 0, 1, 2

CACHE_HEADER = ["p", "r", "b", "a", "n", "zeros", "w", "lambda", "points", "source"]
DEFAULT_PAIRS = ((1, 0), (2, 0), (3, 0), (4, 0), (2, 1), (4, 1), (3, 2))
VERIFY_BUDGET = 10**7


class CliError(Exception):
    """Operational failure reported with exit status 1."""


# ------------------------------------------------------------------- cache

class CacheError(ValueError):
    pass


@dataclass(frozen=True)
class CacheRow:
    p: int
    r: int
    b: int
    a: int
    n: int
    zeros: int
    w: int
    lam: int
    points: int
    source: str

    @property
    def key(self) -> tuple[int, int, int, int, int]:
        return (self.p, self.r, self.b, self.a, self.n)

    def cells(self) -> list[str]:
        return [str(v) for v in (self.p, self.r, self.b, self.a, self.n,
                                 self.zeros, self.w, self.lam, self.points)] + [self.source]


def _parse_cache_row(cells: list[str], where: str) -> CacheRow:
    if len(cells) != len(CACHE_HEADER):
        raise CacheError(f"{where}: expected {len(CACHE_HEADER)} fields, got {len(cells)}")
    try:
        p, r, b, a, n, zeros, w, lam, points = (int(c) for c in cells[:9])
    except ValueError as exc:
        raise CacheError(f"{where}: {exc}") from None
    source = cells[9]
    if source not in (weil.ORACLE, weil.PREDICTED):
        raise CacheError(f"{where}: unknown source {source!r}")
    if lam not in (-1, 0, 1):
        raise CacheError(f"{where}: lambda={lam} is not -1, 0 or 1")
    if n < 1 or w < 0 or zeros < 0:
        raise CacheError(f"{where}: negative or zero field")
    if points != p**r * zeros + 1:
        raise CacheError(f"{where}: points={points} is not q*zeros+1")
    return CacheRow(p, r, b, a, n, zeros, w, lam, points, source)


def read_cache(path: str | Path) -> dict[tuple, CacheRow]:
    """Rows keyed by (p, r, b, a, n); an oracle row beats a predicted one."""
    path = Path(path)
    if not path.exists():
        return {}
    rows: dict[tuple, CacheRow] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CACHE_HEADER:
            raise CacheError(f"{path}:1: bad header {header}")
        for lineno, cells in enumerate(reader, 2):
            row = _parse_cache_row(cells, f"{path}:{lineno}")
            old = rows.get(row.key)
            if old is None or (old.source != weil.ORACLE and row.source == weil.ORACLE):
                rows[row.key] = row
    return rows


def append_cache(path: str | Path, new_rows) -> None:
    path = Path(path)
    fresh = not path.exists() or path.stat().st_size == 0
    with path.open("a", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if fresh:
            writer.writerow(CACHE_HEADER)
        for row in new_rows:
            writer.writerow(row.cells())


def _row_from_oracle(params: qo.CurveParams, res: qo.OracleResult) -> CacheRow:
    return CacheRow(*params.key, res.n, res.zeros, res.w, res.lam, res.points, weil.ORACLE)


# --------------------------------------------------------------- settings

def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return int(float(raw))
    except ValueError:
        raise CliError(f"{name}={raw!r} is not a number") from None


def _budget(args) -> int:
    if args.budget is not None:
        return int(float(args.budget))
    return _env_int("TWOTERM_BUDGET", getattr(args, "default_budget", qo.DEFAULT_BUDGET))


def _workers(args) -> int:
    w = args.workers if args.workers is not None else _env_int("TWOTERM_WORKERS", 1)
    if w < 1:
        raise CliError("worker count must be at least 1")
    return w


def _ledger(args) -> cf.Ledger:
    if args.raw_paper_tables:
        return cf.EMPTY_LEDGER
    if args.ledger:
        try:
            return cf.load_ledger(args.ledger)
        except (OSError, ValueError) as exc:
            raise CliError(f"cannot load ledger: {exc}") from None
    return cf.DEFAULT_LEDGER


def _params(args) -> qo.CurveParams:
    try:
        return qo.CurveParams(args.p, args.r, args.b, args.a)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _sign(lam) -> str:
    return "" if lam is None else f"{lam:+d}" if lam else "0"


# -------------------------------------------------------------- commands

def oracle_cached(params, n, budget, workers, cache_path, force=False):
    """Oracle result, read from and written to the cache when one is given."""
    if cache_path and not force:
        row = read_cache(cache_path).get(params.key + (n,))
        if row is not None and row.source == weil.ORACLE:
            return qo.OracleResult(n, row.zeros, row.w, row.lam, row.points)
    res = qo.oracle(params, n, budget, workers)
    if cache_path:
        append_cache(cache_path, [_row_from_oracle(params, res)])
    return res


def cmd_count(args) -> int:
    params = _params(args)
    try:
        res = oracle_cached(params, args.n, _budget(args), _workers(args), args.cache, args.force)
    except qo.BudgetExceeded as exc:
        raise CliError(f"F_{params.q}^{args.n} is over the enumeration budget; "
                       f"run `twoterm predict` for the closed-form count") from None
    record = {"p": params.p, "r": params.r, "b": params.b, "a": params.a, "n": res.n,
              "zeros": res.zeros, "w": res.w, "lambda": res.lam, "points": res.points}
    if args.json:
        _emit(args, json.dumps(record) + "\n")
    else:
        _emit(args, f"{params} n={res.n}: zeros={res.zeros} λ={_sign(res.lam)} "
                    f"w={res.w} points={res.points}\n")
    return EXIT_OK


def _prediction_record(params, pred: cf.Prediction) -> dict:
    return {"p": params.p, "r": params.r, "b": params.b, "a": params.a, "n": pred.n,
            "zeros": pred.zeros, "w": pred.w, "lambda": pred.lam, "points": pred.points,
            "branch": pred.branch, "status": pred.status}


def cmd_predict(args) -> int:
    params = _params(args)
    pred = cf.predict(params, args.n, _ledger(args))
    if args.cache and pred.covered:
        append_cache(args.cache, [CacheRow(*params.key, pred.n, pred.zeros, pred.w, pred.lam,
                                           pred.points, weil.PREDICTED)])
    if args.json:
        _emit(args, json.dumps(_prediction_record(params, pred)) + "\n")
    elif pred.covered:
        _emit(args, f"{params} n={pred.n}: zeros={pred.zeros} λ={_sign(pred.lam)} w={pred.w} "
                    f"points={pred.points} branch={pred.branch} status={pred.status}\n")
    else:
        _emit(args, f"{params} n={pred.n}: w={pred.w} branch={pred.branch} status={pred.status}\n")
    return EXIT_OK


@dataclass
class ReportRow:
    params: qo.CurveParams
    n: int
    oracle: qo.OracleResult | None
    prediction: cf.Prediction
    millis: int

    @property
    def agree(self) -> bool | None:
        if self.oracle is None or self.prediction.status == cf.OUTSIDE:
            return None
        o, pr = self.oracle, self.prediction
        return (o.w, o.lam, o.zeros, o.points) == (pr.w, pr.lam, pr.zeros, pr.points)

    def record(self, timing: bool) -> dict:
        o, pr = self.oracle, self.prediction
        rec = {
            "p": self.params.p, "r": self.params.r, "b": self.params.b, "a": self.params.a,
            "n": self.n,
            "oracle_zeros": o and o.zeros, "oracle_w": o and o.w,
            "oracle_lambda": o and o.lam, "oracle_points": o and o.points,
            "pred_zeros": pr.zeros, "pred_w": pr.w, "pred_lambda": pr.lam,
            "pred_points": pr.points, "branch": pr.branch, "status": pr.status,
            "agree": self.agree,
        }
        if timing:
            rec["millis"] = self.millis
        return rec


def _parse_list(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def _parse_pairs(text: str) -> list[tuple[int, int]]:
    pairs = []
    for part in text.split(","):
        part = part.strip()
        if part:
            b, a = part.split(":")
            pairs.append((int(b), int(a)))
    return pairs


def sweep_jobs(primes, rs, pairs, n_max, budget):
    """Every (params, n) with q^n within the budget, in sorted order."""
    jobs = []
    for p in primes:
        for r in rs:
            for b, a in pairs:
                params = qo.CurveParams(p, r, b, a)
                n = 1
                while params.q**n <= budget and (n_max is None or n <= n_max):
                    jobs.append((params, n))
                    n += 1
    jobs.sort(key=lambda j: (j[0].key, j[1]))
    return jobs


def run_sweep(jobs, budget, workers, ledger, cache_path=None) -> list[ReportRow]:
    rows = []
    for params, n in jobs:
        start = time.perf_counter()
        res = oracle_cached(params, n, budget, workers, cache_path)
        pred = cf.predict(params, n, ledger)
        millis = int((time.perf_counter() - start) * 1000)
        rows.append(ReportRow(params, n, res, pred, millis))
    return rows


def format_report(rows: list[ReportRow], as_json: bool, timing: bool = False) -> str:
    records = [r.record(timing) for r in rows]
    if as_json:
        return "".join(json.dumps(rec) + "\n" for rec in records)
    buf = io.StringIO()
    fields = list(records[0]) if records else []
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for rec in records:
        writer.writerow({k: "" if v is None else v for k, v in rec.items()})
    return buf.getvalue()


def cmd_verify(args) -> int:
    primes = _parse_list(args.primes)
    rs = _parse_list(args.rs)
    pairs = _parse_pairs(args.pairs)
    if not primes or not rs or not pairs:
        raise CliError("empty sweep range")
    budget = _budget(args)
    if budget < max(p**r for p in primes for r in rs):
        raise CliError(f"budget {budget} is smaller than some q")
    jobs = sweep_jobs(primes, rs, pairs, args.n_max, budget)
    if not jobs:
        raise CliError("no (params, n) fits within the budget")
    ledger = _ledger(args)
    rows = run_sweep(jobs, budget, _workers(args), ledger, args.cache)
    _emit(args, format_report(rows, args.json, args.timing))
    bad = [r for r in rows if r.agree is False]
    covered = sum(r.agree is not None for r in rows)
    print(f"checked {covered} covered of {len(rows)} instances; "
          f"{len(bad)} disagreements (ledger {ledger.version})", file=sys.stderr)
    branches = sorted({r.prediction.branch for r in bad})
    for br in branches:
        count = sum(r.prediction.branch == br for r in bad)
        print(f"  disagreeing branch {br}: {count} rows", file=sys.stderr)
    return EXIT_DISAGREE if bad else EXIT_OK


def cmd_zeta(args) -> int:
    params = _params(args)
    g = weil.genus(params)
    if g > args.genus_cap:
        raise CliError(f"genus {g} exceeds the cap {args.genus_cap} (raise --genus-cap)")
    budget = _budget(args)
    if params.q ** (2 * g) > budget:
        raise CliError(f"needs F_q^{2 * g} = {params.q ** (2 * g)} elements, over the budget "
                       f"of {budget} (raise --budget)")
    workers = _workers(args)
    counts = [oracle_cached(params, n, budget, workers, args.cache).points
              for n in range(1, 2 * g + 1)]
    cs = weil.CountSequence(params, tuple(counts), (weil.ORACLE,) * len(counts))
    lp = weil.lpoly_from_counts(cs, g, args.genus_cap)
    fe = weil.check_functional_equation(lp, params.q)
    s = detect_period(lp, params)
    if args.json:
        _emit(args, json.dumps({"p": params.p, "r": params.r, "b": params.b, "a": params.a,
                                "genus": g, "coeffs": list(lp.coeffs),
                                "functional_equation": fe, "period": s}) + "\n")
    else:
        _emit(args, f"{params} genus {g}\nL(T) coefficients: {' '.join(map(str, lp.coeffs))}\n"
                    f"functional equation: {'ok' if fe else 'FAILED'}\n"
                    f"period: {s if s else 'not found'}\n")
    return EXIT_OK if fe else EXIT_DISAGREE


def detect_period(lp: weil.LPoly, params: qo.CurveParams, bound: int | None = None) -> int | None:
    """First s with t_s = -2g q^(s/2), using counts regenerated from L."""
    if bound is None:
        bound = 2 * cf.period_modulus(params)
    counts = weil.counts_from_lpoly(lp, params.q, bound)
    for s, pts in enumerate(counts, 1):
        t_s = pts - (params.q**s + 1)
        if cf.classify_difference(params, s, t_s) == cf.MINIMAL:
            return s
    return None


def cmd_period(args) -> int:
    params = _params(args)
    try:
        info = cf.period(params, args.bound, _ledger(args))
    except cf.PeriodNotFound as exc:
        raise CliError(str(exc)) from None
    if args.json:
        _emit(args, json.dumps({"p": params.p, "r": params.r, "b": params.b, "a": params.a,
                                "period": info.s, "maximal_half": info.maximal_half}) + "\n")
    else:
        half = f", maximal over F_q^{info.s // 2}" if info.maximal_half else ""
        _emit(args, f"{params}: period {info.s} (minimal over F_q^{info.s}{half})\n")
    return EXIT_OK


def cmd_levelsets(args) -> int:
    params = _params(args)
    inst = qo.make_instance(params, args.n)
    try:
        fibers = qo.count_level_sets(inst, _budget(args), _workers(args))
    except qo.BudgetExceeded as exc:
        raise CliError(str(exc)) from None
    if args.json:
        _emit(args, json.dumps({"n": args.n, "fibers": {str(k): v for k, v in fibers.items()}}) + "\n")
    else:
        lines = [f"{params} n={args.n}"]
        lines += [f"  Q = {c}: {fibers[c]}" for c in sorted(fibers)]
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


# ------------------------------------------------------------------ parser

def _curve_flags(sp, need_n: bool) -> None:
    sp.add_argument("-p", type=int, required=True, help="odd prime")
    sp.add_argument("-r", type=int, default=1, help="q = p^r (default 1)")
    sp.add_argument("-b", type=int, required=True)
    sp.add_argument("-a", type=int, required=True)
    if need_n:
        sp.add_argument("-n", type=int, required=True, help="extension degree")


def _common_flags(sp) -> None:
    sp.add_argument("--budget", help="largest field size to enumerate (env TWOTERM_BUDGET)")
    sp.add_argument("--workers", type=int, help="worker processes (env TWOTERM_WORKERS)")
    sp.add_argument("--json", action="store_true", help="JSON lines instead of text/CSV")
    sp.add_argument("--out", help="write the report here instead of stdout")
    sp.add_argument("--cache", help="CSV count cache to read and append")
    sp.add_argument("--raw-paper-tables", action="store_true",
                    help="use hypothesis set v0 alone, ignoring the corrections ledger")
    sp.add_argument("--ledger", help="corrections ledger file replacing the built-in one")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twoterm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("count", help="enumerate F_{q^n} and count zeros")
    _curve_flags(sp, True)
    _common_flags(sp)
    sp.add_argument("--force", action="store_true", help="ignore cached values")
    sp.set_defaults(func=cmd_count)

    sp = sub.add_parser("predict", help="closed-form count")
    _curve_flags(sp, True)
    _common_flags(sp)
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("verify", help="sweep oracle against closed form")
    _common_flags(sp)
    sp.add_argument("--primes", default="3,5,7")
    sp.add_argument("--rs", default="1")
    sp.add_argument("--pairs", default=",".join(f"{b}:{a}" for b, a in DEFAULT_PAIRS),
                    help="comma list of b:a")
    sp.add_argument("--n-max", type=int, help="cap on n besides the budget")
    sp.add_argument("--timing", action="store_true", help="add a millisecond timing column")
    sp.set_defaults(func=cmd_verify, default_budget=VERIFY_BUDGET)

    sp = sub.add_parser("zeta", help="L-polynomial from enumerated counts")
    _curve_flags(sp, False)
    _common_flags(sp)
    sp.add_argument("--genus-cap", type=int, default=weil.DEFAULT_GENUS_CAP)
    sp.set_defaults(func=cmd_zeta)

    sp = sub.add_parser("period", help="first degree over which the curve is minimal")
    _curve_flags(sp, False)
    _common_flags(sp)
    sp.add_argument("--bound", type=int, help="scan limit")
    sp.set_defaults(func=cmd_period)

    sp = sub.add_parser("levelsets", help="number of x with Q(x) = c for each c")
    _curve_flags(sp, True)
    _common_flags(sp)
    sp.set_defaults(func=cmd_levelsets)
    return parser


def main(argv: list[str] | None = None) -> int:
    sys.set_int_max_str_digits(0)
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, CacheError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
