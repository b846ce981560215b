"""Command-line front end.

Every subcommand prints one JSON document (or writes it to ``--out``).
Reports carry a schema version and the run configuration; rationals are
written as "num/den" strings.  Exit status: 0 when everything requested
passes, 2 when an identity or theorem check fails, 1 on usage or input
errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from . import __version__
from .arith import is_prime, legendre, prime_divisors
from .errors import Level2Error, TheoremViolation

SCHEMA_VERSION = 1
THREADS_ENV = "LEVELP2_THREADS"
EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class RunConfig:
    command: str
    p: int | None = None
    d: list[int] = field(default_factory=list)
    D: int | None = None
    prec: int | None = None
    m_max: int | None = None
    tol: float | None = None
    threads: int = 1
    out: str | None = None
    extra: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.p is not None and (not is_prime(self.p) or self.p < 3):
            raise UsageError(f"p = {self.p} must be an odd prime")
        if self.prec is not None and self.prec < 1:
            raise UsageError("prec must be positive")
        if self.m_max is not None and self.m_max < 0:
            raise UsageError("m-max must be non-negative")
        if self.threads < 1:
            raise UsageError("threads must be at least 1")
        for d in self.d:
            if d < 1:
                raise UsageError("d must be positive")

    def to_json(self) -> dict:
        out = asdict(self)
        out.pop("out")
        out.pop("threads")
        return out


def _json_default(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if hasattr(x, "to_json"):
        return x.to_json()
    if hasattr(x, "tolist"):
        return x.tolist()
    if isinstance(x, (set, tuple)):
        return list(x)
    return str(x)


def _emit(cfg: RunConfig, payload: dict, seconds: float) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "config": cfg.to_json(),
        "result": payload,
        "seconds": round(seconds, 3),
    }
    text = json.dumps(doc, default=_json_default, sort_keys=True, indent=1)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return text


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"expected a comma-separated list of integers, got {text!r}") from exc


def _map(fn, items, threads: int):
    """Ordered map, in worker processes when threads > 1."""
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------------
# shared builders


def _classes(p: int):
    from .ideals import enumerate_classes
    from .orders_p2 import build_context

    ctx = build_context(p)
    return ctx, enumerate_classes(ctx.O_tilde, p, seeds=ctx.norm_one)


def _cell_with_char(G, char: int) -> int:
    for s in G.norm_p:
        if G.chi[s] == char:
            return s
    raise UsageError(f"no norm-p ideal with character {char}")


# ---------------------------------------------------------------------------
# subcommands


def cmd_order(cfg: RunConfig) -> tuple[dict, bool]:
    from .orders_p2 import build_context, build_context_from_K

    ctx = build_context(cfg.p) if cfg.D is None else build_context_from_K(cfg.D, cfg.p)
    out = ctx.to_json()
    out["disc"] = {"O_max": ctx.O_max.disc, "O_tilde": ctx.O_tilde.disc}
    out["suborders"] = [
        {"disc": s.order.disc, "chi": s.character_sign} for s in ctx.suborders
    ]
    ok = all(s.order.disc == cfg.p**3 for s in ctx.suborders) and len(ctx.suborders) == cfg.p + 1
    return out, ok


def cmd_classes(cfg: RunConfig) -> tuple[dict, bool]:
    _, cl = _classes(cfg.p)
    return cl.to_json(), True


def cmd_bilateral(cfg: RunConfig) -> tuple[dict, bool]:
    from .hecke_ops import bilateral_group

    ctx, _ = _classes(cfg.p)
    G = bilateral_group(ctx)
    out = G.to_json()
    out["chi_counts"] = {
        "+1": sum(1 for s in G.norm_p if G.chi[s] == 1),
        "-1": sum(1 for s in G.norm_p if G.chi[s] == -1),
    }
    return out, G.order == 2 * (cfg.p + 1)


def cmd_brandt(cfg: RunConfig) -> tuple[dict, bool]:
    from .hecke_ops import HeckeData, check_row_sums, check_self_adjoint

    _, cl = _classes(cfg.p)
    m = cfg.extra["m"]
    B = HeckeData(cl, m).brandt(m)
    out = B.to_json()
    out["weights"] = cl.weights
    out["row_sums"] = B.row_sums()
    ok = check_self_adjoint(B, cl.weights)
    if m % cfg.p:
        ok = ok and check_row_sums(B)
    return out, ok


def cmd_eigen(cfg: RunConfig) -> tuple[dict, bool]:
    from .hecke_ops import bilateral_group
    from .spectra import spectrum

    ctx, cl = _classes(cfg.p)
    G = bilateral_group(ctx)
    return spectrum(ctx, cl, G).to_json(), True


def _nf_series_json(coeffs) -> list:
    from .numfield import NFElem

    return [[str(c) for c in x.coeffs()] if isinstance(x, NFElem) else x for x in coeffs]


def cmd_theta32(cfg: RunConfig) -> tuple[dict, bool]:
    from .hecke_ops import bilateral_group
    from .spectra import select_e_f, spectrum
    from .theta import ThetaTable

    ctx, cl = _classes(cfg.p)
    G = bilateral_group(ctx)
    cell = _cell_with_char(G, cfg.extra["char"])
    P = G.elements[cell]
    table = ThetaTable(cl.reps, cfg.p, cfg.prec)
    out = {"cell": cell, "char": cfg.extra["char"], "level": 4 * cfg.p**2, "weight": "3/2"}
    vec = cfg.extra.get("vector")
    if vec is None:
        out["classes"] = [table.series(i, P).to_json() for i in range(cl.h)]
        return out, True
    spec = spectrum(ctx, cl, G, cell)
    comps = {c.index: c for c in spec.components}
    if vec not in comps:
        raise UsageError(f"no component {vec}; available {sorted(comps)}")
    e = select_e_f(comps[vec])
    out["vector"] = e.to_json()
    out["field"] = e.field.to_json()
    out["coeffs"] = _nf_series_json(table.vec(e.coords, P))
    return out, True


def cmd_quadfield(cfg: RunConfig) -> tuple[dict, bool]:
    from .quadfield import FieldK, class_group_json, sigma_A, sigma_A_closed, sigma_hypothesis

    D = cfg.D
    p = cfg.p if cfg.p is not None else max(prime_divisors(D))
    K = FieldK(D, p)
    out = class_group_json(K)
    samples = []
    ok = True
    N = p * p
    for f in K.classes:
        for n in range(1, 11):
            a = sigma_A(K, f, n, N)
            row = {"class": list(f), "n": n, "sigma": a}
            if sigma_hypothesis(K, f, n, N):
                row["closed"] = sigma_A_closed(K, f, n, N)
                ok &= a == row["closed"]
            samples.append(row)
    out["sigma_samples"] = samples
    return out, ok


def cmd_special(cfg: RunConfig) -> tuple[dict, bool]:
    from .hecke_ops import bilateral_group
    from .specialpoints import expected_count, special_points, split_C_p

    ctx, cl = _classes(cfg.p)
    G = bilateral_group(ctx)
    out = {}
    for d in cfg.d:
        D = -cfg.p * d
        pts = special_points(cl, D, cfg.p, expected_count(D, cfg.p))
        split = split_C_p(cl, G, pts, D)
        per_class = [0] * cl.h
        for pt in pts:
            per_class[pt.class_index] += 1
        out[str(d)] = {
            "D": D,
            "total": len(pts),
            "per_class": per_class,
            "cells": split.to_json(),
            "sizes": {str(k): v for k, v in split.sizes().items()},
        }
    return out, True


def _verify_one(args):
    kind, p, d, m_max, prec = args
    from .verify import KSetting, core_identity, formula_B, g_A_crosscheck

    S = KSetting(-p * d, p)
    if kind == "formulaB":
        rep = formula_B(S, m_max)
    elif kind == "gA":
        rep = g_A_crosscheck(S, prec)
    else:
        rep = core_identity(S)
    return rep.to_json(), rep.passed


def cmd_verify(cfg: RunConfig) -> tuple[dict, bool]:
    from .verify import fundamental_ds

    kind = cfg.extra["identity"]
    if kind == "main":
        reps = _main_reports(cfg, exact_subidentities=True, m_max=cfg.m_max or 10, prec=cfg.prec or 20)
        return {"reports": [r.to_json() for r in reps]}, all(r.passed for r in reps)
    ds = cfg.d or fundamental_ds(cfg.p, cfg.extra.get("dmax") or 60)
    jobs = [(kind, cfg.p, d, cfg.m_max or 30, cfg.prec or 50) for d in ds]
    results = _map(_verify_one, jobs, cfg.threads)
    return {"reports": [r for r, _ in results]}, all(ok for _, ok in results)


def _new_streams(p: int):
    from .hecke_ops import bilateral_group
    from .spectra import select_e_f, spectrum

    ctx, cl = _classes(p)
    G = bilateral_group(ctx)
    spec = spectrum(ctx, cl, G)
    return cl, [select_e_f(c) for c in spec.new_components()]


def cmd_lvalue(cfg: RunConfig) -> tuple[dict, bool]:
    from .lseries import central_value, central_value_untwisted, hecke_coeffs, needed_terms, twist_stream

    p = cfg.p
    tol = cfg.tol if cfg.tol is not None else 1e-6
    cl, forms = _new_streams(p)
    out = []
    ds = cfg.d
    for e in forms:
        top = p * p * (p * max(ds)) ** 2 if ds else p * p
        nmax = needed_terms(top)
        for k in range(e.degree):
            stream = hecke_coeffs(e, cl, nmax, p, k)
            entry = {"w_tilde_sign": e.w_tilde_sign, "embedding": k, "component": e.component}
            if not ds:
                entry["untwisted"] = central_value_untwisted(stream, e.w_tilde_sign).to_json()
            else:
                entry["twists"] = {str(d): central_value(twist_stream(stream, -p * d), tol=tol).to_json() for d in ds}
            out.append(entry)
    return {"forms": out}, True


def _main_reports(cfg: RunConfig, **kw) -> list:
    """One main-theorem report per character sign, using a cell of that sign."""
    from .hecke_ops import bilateral_group
    from .verify import main_ds, main_theorem_report

    p = cfg.p
    ctx, _ = _classes(p)
    G = bilateral_group(ctx)
    dmax = cfg.extra.get("dmax") or 60
    reps = []
    for chi in (1, -1):
        cell = next(s for s in G.norm_p if G.chi[s] == chi)
        if cfg.d:
            ds = [d for d in cfg.d if legendre(d, p) == chi]
        else:
            ds = main_ds(p, chi, dmax)
        if ds:
            reps.append(main_theorem_report(p, cell=cell, ds=ds, **kw))
    return reps


def cmd_report(cfg: RunConfig) -> tuple[dict, bool]:
    reps = _main_reports(cfg)
    return {"reports": [r.to_json() for r in reps]}, all(r.passed for r in reps)


def report_csv(payload: dict) -> str:
    buf = io.StringIO()
    cols = ["component", "embedding", "d", "c_d", "c_d_float", "c_d^2/sqrt(pd)", "L", "level", "sign", "spread", "covanishes"]
    w = csv.writer(buf)
    w.writerow(cols)
    for rep in payload["reports"]:
        for f in rep["detail"]["forms"]:
            for r in f["rows"]:
                c = r["c_d"]
                w.writerow(
                    [f["component"], f["embedding"], r["d"], c if not isinstance(c, list) else ";".join(c)]
                    + [r[k] for k in cols[4:]]
                )
    return buf.getvalue()


COMMANDS = {
    "order": cmd_order,
    "classes": cmd_classes,
    "bilateral": cmd_bilateral,
    "brandt": cmd_brandt,
    "eigen": cmd_eigen,
    "theta32": cmd_theta32,
    "quadfield": cmd_quadfield,
    "special": cmd_special,
    "verify": cmd_verify,
    "lvalue": cmd_lvalue,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="levelp2", description="Level p^2 quaternion orders, theta lifts and identity checks.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp, need_p=True):
        sp.add_argument("--p", type=int, required=need_p)
        sp.add_argument("--out", default=None)
        sp.add_argument("--threads", type=int, default=int(os.environ.get(THREADS_ENV, "1")))

    sp = sub.add_parser("order", help="build O, O_tilde and the p+1 suborders")
    sp.add_argument("action", choices=["build"])
    common(sp)
    sp.add_argument("--D", type=int, default=None)

    common(sub.add_parser("classes", help="left ideal classes of O_tilde"))
    common(sub.add_parser("bilateral", help="the group of two-sided ideals"))

    sp = sub.add_parser("brandt", help="Brandt matrix B(m)")
    common(sp)
    sp.add_argument("--m", type=int, required=True)

    common(sub.add_parser("eigen", help="classified joint eigenvectors"))

    sp = sub.add_parser("theta32", help="weight 3/2 theta series")
    common(sp)
    sp.add_argument("--char", type=int, choices=[1, -1], default=1)
    sp.add_argument("--prec", type=int, default=100)
    sp.add_argument("--vector", default=None, help="eigen:f for the W_p-fixed vector of component f")

    sp = sub.add_parser("quadfield", help="class group and genus data of Q(sqrt D)")
    common(sp, need_p=False)
    sp.add_argument("--D", type=int, required=True)

    sp = sub.add_parser("special", help="special points and the cells C_p")
    common(sp)
    sp.add_argument("--d", required=True)

    sp = sub.add_parser("verify", help="exact identity checks")
    sp.add_argument("identity", choices=["formulaB", "gA", "core", "main"])
    common(sp)
    sp.add_argument("--d", default="")
    sp.add_argument("--dmax", type=int, default=None)
    sp.add_argument("--m-max", type=int, default=None)
    sp.add_argument("--prec", type=int, default=None)

    sp = sub.add_parser("lvalue", help="central L-values")
    common(sp)
    sp.add_argument("--d", default="")
    sp.add_argument("--tol", type=float, default=None)

    sp = sub.add_parser("report", help="c_d against L(f, -p d, 1)")
    common(sp)
    sp.add_argument("--d", default="")
    sp.add_argument("--dmax", type=int, default=None)
    sp.add_argument("--format", choices=["json", "csv"], default="json")
    return ap


def _config(ns: argparse.Namespace) -> RunConfig:
    extra = {}
    for key in ("m", "char", "identity", "dmax", "format", "action"):
        if getattr(ns, key, None) is not None:
            extra[key] = getattr(ns, key)
    vec = getattr(ns, "vector", None)
    if vec is not None:
        if not vec.startswith("eigen:"):
            raise UsageError("--vector must look like eigen:f")
        extra["vector"] = int(vec.split(":", 1)[1])
    cfg = RunConfig(
        command=ns.command,
        p=getattr(ns, "p", None),
        d=_int_list(getattr(ns, "d", "") or ""),
        D=getattr(ns, "D", None),
        prec=getattr(ns, "prec", None),
        m_max=getattr(ns, "m_max", None),
        tol=getattr(ns, "tol", None),
        threads=getattr(ns, "threads", 1),
        out=getattr(ns, "out", None),
        extra=extra,
    )
    cfg.validate()
    return cfg


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
        if ns.command is None:
            ap.print_usage(sys.stderr)
            return EXIT_USAGE
        cfg = _config(ns)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    t0 = time.time()
    try:
        payload, ok = COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except TheoremViolation as exc:
        print(f"theorem check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except Level2Error as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if cfg.command == "report" and cfg.extra.get("format") == "csv":
        text = report_csv(payload)
        if cfg.out:
            with open(cfg.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    else:
        _emit(cfg, payload, time.time() - t0)
    return EXIT_OK if ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
