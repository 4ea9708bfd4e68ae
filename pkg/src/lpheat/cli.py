"""Command-line front end: ``lpheat {eval,mass,sweep,ck,report}``.

Single evaluations print one JSON record per line to stdout. ``sweep``
writes CSV and ``report`` writes a JSON document; both are written to a
temporary file and renamed into place, so a failed run leaves nothing
behind.

Exit codes: 0 success, 2 domain error, 3 non-convergence, 4 Chapman-Kolmogorov
residual above ``1e-6``, 5 report disagreeing with the known table.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from importlib import resources
from typing import Dict, List, Optional, Sequence

from .exceptions import DomainError, NonConvergenceError
from .kernels import FamilyId, kernel_log_eval, require_admissible
from .quadrature import QuadratureRule
from .semigroup import (
    DEFAULT_TOL,
    ContractivityReport,
    ck_residual,
    contractivity_sweep,
    row_mass,
    table1_predicate,
    tt_one_closed,
)

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_NONCONVERGENCE = 3
EXIT_CK = 4
EXIT_REPORT = 5
CK_THRESHOLD = 1e-6
QUAD_ORDER_ENV = "LPHEAT_QUAD_ORDER"


# ---------------------------------------------------------------------------
# deterministic serialization

def format_float(v: float) -> str:
    """17 significant digits; non-finite values become JSON strings."""
    v = float(v)
    if math.isnan(v):
        return '"nan"'
    if math.isinf(v):
        return '"inf"' if v > 0 else '"-inf"'
    return format(v, ".17g")


def to_json(obj, sort_keys: bool = False) -> str:
    """Compact JSON with floats at 17 significant digits."""
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        keys = sorted(obj) if sort_keys else list(obj)
        return "{" + ", ".join(f"{json.dumps(str(k), ensure_ascii=False)}: "
                               f"{to_json(obj[k], sort_keys)}" for k in keys) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(to_json(v, sort_keys) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


@dataclass
class OutputRecord:
    command: str
    family: str
    alpha: List[float]
    t: Optional[float]
    inputs: Dict[str, float] = field(default_factory=dict)
    outputs: Dict[str, float] = field(default_factory=dict)
    status: str = "ok"

    def to_json(self) -> str:
        return to_json({
            "command": self.command,
            "family": self.family,
            "alpha": [float(a) for a in self.alpha],
            "t": None if self.t is None else float(self.t),
            "inputs": {k: float(v) for k, v in self.inputs.items()},
            "outputs": {k: float(v) for k, v in self.outputs.items()},
            "status": self.status,
        })


def atomic_write(path: str, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".lpheat-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# argument parsing helpers

def parse_reals(text: str) -> List[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise DomainError(f"not a comma-separated list of reals: {text!r}") from None
    if not vals:
        raise DomainError("empty list")
    return vals


def parse_alpha_grid(text: str) -> List[List[float]]:
    """``start:stop:step`` (inclusive), ``a,b,c`` for one-dimensional grids, or
    ``a1,a2;b1,b2`` for multi-dimensional ones."""
    text = text.strip()
    if ";" in text:
        return [parse_reals(part) for part in text.split(";") if part.strip()]
    if ":" in text:
        try:
            start, stop, step = (float(v) for v in text.split(":"))
        except ValueError:
            raise DomainError(f"bad range {text!r}; expected start:stop:step") from None
        if not step > 0 or stop < start:
            raise DomainError("range needs step > 0 and stop >= start")
        n = int(math.floor((stop - start) / step + 1e-9))
        return [[round(start + k * step, 12)] for k in range(n + 1)]
    return [[v] for v in parse_reals(text)]


def quad_rule(order: Optional[int]) -> QuadratureRule:
    if order is None:
        env = os.environ.get(QUAD_ORDER_ENV)
        if env:
            try:
                order = int(env)
            except ValueError:
                raise DomainError(f"{QUAD_ORDER_ENV} must be an integer, got {env!r}") from None
    return QuadratureRule() if order is None else QuadratureRule(order=order)


def _family(args) -> FamilyId:
    return FamilyId.parse(args.family, getattr(args, "j", None))


def _named(prefix: str, vals: Sequence[float]) -> Dict[str, float]:
    return {f"{prefix}{i + 1}": v for i, v in enumerate(vals)}


def load_canonical_grids() -> dict:
    text = resources.files("lpheat").joinpath("data/canonical_grids.json").read_text("utf-8")
    return json.loads(text)


# ---------------------------------------------------------------------------
# commands

def cmd_eval(args) -> OutputRecord:
    family = _family(args)
    alpha, x, y = parse_reals(args.alpha), parse_reals(args.x), parse_reals(args.y)
    rec = OutputRecord("eval", str(family), alpha, args.t,
                       {**_named("x", x), **_named("y", y)})
    val = kernel_log_eval(family, alpha, args.t, x, y)
    rec.outputs = {"log_kernel": val, "kernel": math.exp(val)}
    return rec


def cmd_mass(args) -> OutputRecord:
    family = _family(args)
    alpha, x = parse_reals(args.alpha), parse_reals(args.x)
    rec = OutputRecord("mass", str(family), alpha, args.t, _named("x", x))
    quad = quad_rule(args.quad_order)
    closed = tt_one_closed(family, alpha, args.t, x)
    quadv = row_mass(family, alpha, args.t, x, quad)
    rec.outputs = {"closed_form": closed, "quadrature": quadv,
                   "rel_gap": abs(quadv - closed) / closed}
    return rec


def cmd_ck(args) -> OutputRecord:
    family = _family(args)
    alpha, x, y = parse_reals(args.alpha), parse_reals(args.x), parse_reals(args.y)
    rec = OutputRecord("ck", str(family), alpha, args.t,
                       {"s": args.s, **_named("x", x), **_named("y", y)})
    rec.outputs = {"residual": ck_residual(family, alpha, args.t, args.s, x, y,
                                           quad_rule(args.quad_order))}
    return rec


SWEEP_COLUMNS = ("family", "alpha", "contractive", "classification", "max_sup",
                 "max_bound_ratio", "witness_t", "witness_x", "excess_constant")


def _fmt_opt(v) -> str:
    return "" if v is None else format(float(v), ".17g")


def sweep_csv(reports: Sequence[ContractivityReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in reports:
        ratio = max(s / b for s, b in zip(r.sup_tt_one_per_t, r.paper_bound_per_t))
        wt, wx = (r.witness if r.witness else (None, None))
        w.writerow([
            str(r.family),
            " ".join(format(a, ".17g") for a in r.alpha),
            int(r.contractive),
            r.classification,
            format(r.max_sup, ".17g"),
            format(ratio, ".17g"),
            _fmt_opt(wt),
            "" if wx is None else " ".join(format(c, ".17g") for c in wx),
            _fmt_opt(r.excess_constant),
        ])
    return buf.getvalue()


def cmd_sweep(args) -> str:
    family = _family(args)
    grid = parse_alpha_grid(args.alpha_grid)
    t_grid = parse_reals(args.t_grid) if args.t_grid else load_canonical_grids()["t_grid"]
    for a in grid:
        require_admissible(family, a)
    reports = contractivity_sweep(family, grid, t_grid, args.tol, n_jobs=args.jobs)
    return sweep_csv(reports)


def _cell(report: ContractivityReport) -> dict:
    expected = table1_predicate(report.family, report.alpha)
    cell = {
        "alpha": list(report.alpha),
        "expected_contractive": expected,
        "observed_contractive": report.contractive,
        "agree": expected == report.contractive,
        "max_sup": report.max_sup,
        "sup_per_t": list(report.sup_tt_one_per_t),
        "bound_per_t": list(report.paper_bound_per_t),
        "within_bound": report.within_bound,
        "excess_constant": report.excess_constant,
        "witness": None,
    }
    if report.witness is not None:
        t_w, pt = report.witness
        cell["witness"] = {"t": t_w, "x": list(pt),
                           "tt_one": tt_one_closed(report.family, report.alpha, t_w, pt)}
    return cell


def build_report(families: Optional[Sequence[str]] = None, n_jobs: int = 1) -> dict:
    """Run the canonical sweeps and collect per-cell evidence."""
    cfg = load_canonical_grids()
    names = list(cfg["families"]) if not families else list(families)
    out = {"version": cfg["version"], "tol": cfg["tol"], "t_grid": cfg["t_grid"],
           "families": {}}
    all_agree = True
    for name in names:
        if name not in cfg["families"]:
            fam = FamilyId.parse(name)
            if str(fam) not in cfg["families"]:
                raise DomainError(f"no canonical grid for family {name!r}")
            name = str(fam)
        spec = cfg["families"][name]
        fam = FamilyId.parse(name)
        cells = [_cell(r) for r in contractivity_sweep(
            fam, spec["alpha_grid"] + spec["spot_check_d2"], cfg["t_grid"], cfg["tol"], n_jobs)]
        agree = all(c["agree"] for c in cells)
        all_agree &= agree
        out["families"][name] = {
            "contractive_range": spec["contractive_range"],
            "observed_contractive": [c["alpha"] for c in cells if c["observed_contractive"]],
            "observed_non_contractive": [c["alpha"] for c in cells if not c["observed_contractive"]],
            "agree": agree,
            "cells": cells,
        }
    out["all_agree"] = all_agree
    return out


def cmd_report(args) -> dict:
    fams = [f for f in args.families.split(",") if f.strip()] if args.families else None
    return build_report(fams, args.jobs)


# ---------------------------------------------------------------------------
# entry point

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lpheat",
                                description="Heat kernels and L^p-contractivity checks "
                                            "for Laguerre and Bessel semigroups.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, with_t=True):
        sp.add_argument("--family", required=True,
                        help="lag, stdL, hermL, convL, besselSmall, besselBig, or mod-<laguerre>")
        sp.add_argument("--j", type=int, default=None,
                        help="coordinate of a modified family (default 1)")
        sp.add_argument("--alpha", required=True, help="comma-separated alpha")
        if with_t:
            sp.add_argument("--t", type=float, required=True)

    sp = sub.add_parser("eval", help="log heat kernel at (x, y)")
    common(sp)
    sp.add_argument("--x", required=True)
    sp.add_argument("--y", required=True)

    sp = sub.add_parser("mass", help="T_t 1(x): closed form against quadrature")
    common(sp)
    sp.add_argument("--x", required=True)
    sp.add_argument("--quad-order", type=int, default=None)

    sp = sub.add_parser("ck", help="Chapman-Kolmogorov residual")
    common(sp)
    sp.add_argument("--s", type=float, required=True)
    sp.add_argument("--x", required=True)
    sp.add_argument("--y", required=True)
    sp.add_argument("--quad-order", type=int, default=None)

    sp = sub.add_parser("sweep", help="contractivity over an alpha grid (CSV)")
    sp.add_argument("--family", required=True)
    sp.add_argument("--j", type=int, default=None)
    sp.add_argument("--alpha-grid", required=True,
                    help="start:stop:step, a,b,c, or a1,a2;b1,b2")
    sp.add_argument("--t-grid", default=None, help="comma list (default: canonical grid)")
    sp.add_argument("--tol", type=float, default=DEFAULT_TOL)
    sp.add_argument("--out", default=None, help="CSV path (default: stdout)")
    sp.add_argument("--jobs", type=int, default=1)

    sp = sub.add_parser("report", help="canonical contractivity table (JSON)")
    sp.add_argument("--out", required=True)
    sp.add_argument("--families", default=None, help="comma-separated subset")
    sp.add_argument("--jobs", type=int, default=1)
    return p


def _error_record(args, status: str) -> Optional[OutputRecord]:
    if args.command not in ("eval", "mass", "ck"):
        return None
    try:
        alpha = parse_reals(args.alpha)
    except DomainError:
        alpha = []
    return OutputRecord(args.command, args.family, alpha, args.t, status=status)


_LIST_FLAGS = ("--alpha", "--alpha-grid", "--x", "--y", "--t-grid")


def _bind_list_values(argv: Sequence[str]) -> List[str]:
    # argparse mistakes "-0.5,1" for an option; glue such values to their flag
    out: List[str] = []
    it = iter(argv)
    for tok in it:
        if tok in _LIST_FLAGS:
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-") and nxt[1:2] in "0123456789.":
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
        else:
            out.append(tok)
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    args = build_parser().parse_args(_bind_list_values(argv))
    try:
        if args.command in ("eval", "mass", "ck"):
            handler = {"eval": cmd_eval, "mass": cmd_mass, "ck": cmd_ck}[args.command]
            rec = handler(args)
            print(rec.to_json())
            if args.command == "ck" and rec.outputs["residual"] > CK_THRESHOLD:
                print(f"residual {rec.outputs['residual']:.3g} exceeds {CK_THRESHOLD:g}",
                      file=sys.stderr)
                return EXIT_CK
            return EXIT_OK
        if args.command == "sweep":
            text = cmd_sweep(args)
            if args.out:
                atomic_write(args.out, text)
            else:
                sys.stdout.write(text)
            return EXIT_OK
        report = cmd_report(args)
        atomic_write(args.out, to_json(report, sort_keys=True) + "\n")
        if not report["all_agree"]:
            bad = [n for n, f in report["families"].items() if not f["agree"]]
            print(f"report disagrees with the known table for: {', '.join(bad)}",
                  file=sys.stderr)
            return EXIT_REPORT
        return EXIT_OK
    except DomainError as exc:
        rec = _error_record(args, "domain_error")
        if rec is not None:
            print(rec.to_json())
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except NonConvergenceError as exc:
        rec = _error_record(args, "nonconvergence")
        if rec is not None:
            print(rec.to_json())
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
