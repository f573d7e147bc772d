"""Command-line front end.

Exit codes: 0 all checks passed, 1 a verification failed, 2 usage,
configuration or unsupported-path error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .constants import constant_table
from .errors import BPVerifyError
from .functions import Gaussian, MultiPointFunction, parse_function_list, parse_function_spec
from .montecarlo import run_mc
from .sampling import DEFAULT_SCALE, grassmann_batch
from .verify import (
    DEFAULT_REL_TOL,
    verify_affine_bp,
    verify_affine_dual,
    verify_bp,
    verify_bp_dual,
    verify_drury,
    verify_multilinear,
    verify_polar,
    verify_riesz,
)

IDENTITIES = ("polar", "bp", "affine-bp", "bp-dual", "affine-dual", "multilinear", "drury", "riesz")
MIN_SAMPLES = 1000
SUITE_KEYS = {
    "identity", "n", "k", "q", "ell", "alpha", "f", "samples", "seed", "rel_tol", "scale",
    "offset_scale", "path", "constant_scale", "expect",
}


class UsageError(Exception):
    """Bad command-line or suite configuration; maps to exit code 2."""


# ------------------------------------------------------------------ dispatch


def _need(cfg, *names):
    missing = [name for name in names if cfg.get(name) is None]
    if missing:
        flags = ", ".join("--" + m.replace("_", "-") for m in missing)
        raise UsageError(f"{cfg['identity']} needs {flags}")


def run_identity(cfg):
    """Run one verification described by a flat config mapping."""
    identity = cfg["identity"]
    if identity not in IDENTITIES:
        raise UsageError(f"unknown identity {identity!r}; choose from {', '.join(IDENTITIES)}")
    samples = int(cfg.get("samples") or 1_000_000)
    if samples < MIN_SAMPLES:
        raise UsageError(f"--samples must be at least {MIN_SAMPLES}")
    common = {
        "samples": samples,
        "seed": int(cfg.get("seed") or 0),
        "workers": int(cfg.get("workers") or 1),
        "rel_tol": float(cfg.get("rel_tol") or DEFAULT_REL_TOL),
    }
    scale = float(cfg.get("scale") or DEFAULT_SCALE)
    offset_scale = float(cfg.get("offset_scale") or DEFAULT_SCALE)
    cs = float(cfg.get("constant_scale") or 1.0)
    spec = cfg.get("f") or "gaussian:a=1"
    _need(cfg, "n")
    n = int(cfg["n"])

    if identity == "polar":
        _need(cfg, "k")
        k = int(cfg["k"])
        F = MultiPointFunction(parse_function_list(spec, n, k))
        return verify_polar(n, k, F, scale=scale, constant_scale=cs, **common)
    if identity == "riesz":
        _need(cfg, "q", "alpha")
        q = int(cfg["q"])
        G = MultiPointFunction(parse_function_list(spec, n, q))
        return verify_riesz(n, q, float(cfg["alpha"]), G, scale=scale, **common)
    if identity == "drury":
        _need(cfg, "k")
        f = parse_function_spec(spec, n)
        if not isinstance(f, Gaussian):
            raise UsageError("drury needs a centered Gaussian, e.g. --f gaussian:a=1")
        return verify_drury(n, int(cfg["k"]), int(cfg.get("ell") or 0), f.a,
                            path=cfg.get("path") or "auto", scale=scale,
                            offset_scale=offset_scale, constant_scale=cs, **common)

    _need(cfg, "k", "q")
    k, q = int(cfg["k"]), int(cfg["q"])
    if not 1 <= q <= k <= n:
        raise UsageError(f"need 1 <= q <= k <= n, got n={n}, k={k}, q={q}")
    if identity in ("bp", "bp-dual"):
        F = MultiPointFunction(parse_function_list(spec, n, q))
        fn = verify_bp if identity == "bp" else verify_bp_dual
        return fn(n, k, q, F, scale=scale, constant_scale=cs, **common)
    F = MultiPointFunction(parse_function_list(spec, n, q + 1))
    if identity == "affine-bp":
        return verify_affine_bp(n, k, q, F, scale=scale, offset_scale=offset_scale,
                                constant_scale=cs, **common)
    if identity == "affine-dual":
        return verify_affine_dual(n, k, q, F, scale=scale, offset_scale=offset_scale,
                                  constant_scale=cs, **common)
    return verify_multilinear(n, k, q, F.factors, path=cfg.get("path") or "auto",
                              scale=scale, offset_scale=offset_scale, constant_scale=cs,
                              **common)


# -------------------------------------------------------------------- output


def _flatten(d, prefix=""):
    out = {}
    for key, value in d.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(_flatten(value, name + "."))
        elif isinstance(value, list):
            out[name] = json.dumps(value, sort_keys=True)
        else:
            out[name] = value
    return out


def _csv_text(rows):
    flat = [_flatten(r) for r in rows]
    header = []
    for r in flat:
        header.extend(k for k in r if k not in header)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
    writer.writeheader()
    writer.writerows(flat)
    return buf.getvalue()


def _fmt(x):
    if x is None:
        return "-"
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


def _human_report(d):
    lines = [f"identity: {d['identity']}  params: "
             + " ".join(f"{k}={_fmt(v)}" for k, v in d["params"].items())]
    lines.append(f"{'':12}{'LHS':>22}{'RHS':>22}")
    for field in ("mean", "stderr", "samples", "rejected", "method"):
        lines.append(f"{field:12}{_fmt(d['lhs'][field]):>22}{_fmt(d['rhs'][field]):>22}")
    lines.append(f"closed form: {_fmt(d['closed_form'])}   z = {d['z']:.3f}")
    for c in d["checks"]:
        mark = "ok  " if c["pass"] else "FAIL"
        lines.append(f"  [{mark}] {c['name']:<20} z={c['z']:.3f} rel={c['rel']:.2e}")
    for key, est in d.get("extra", {}).items():
        lines.append(f"  {key}: mean={_fmt(est['mean'])} stderr={_fmt(est['stderr'])}")
    for note in d.get("notes", []):
        lines.append(f"  note: {note}")
    lines.append("PASS" if d["pass"] else "FAIL")
    return "\n".join(lines) + "\n"


def _json_text(obj):
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=True) + "\n"


def _emit(text, out):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ------------------------------------------------------------------- commands


def _parse_range(text, name):
    try:
        if ":" in text or "-" in text.strip("-"):
            lo, hi = text.replace(":", "-").split("-", 1)
            values = list(range(int(lo), int(hi) + 1))
        else:
            values = [int(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"--{name} must be an integer, a list a,b,c or a range a-b") from None
    if not values or min(values) < 1:
        raise UsageError(f"--{name} must contain positive integers")
    return values


def cmd_constants(args):
    ns = _parse_range(args.n, "n")
    ks = _parse_range(args.k, "k") if args.k else list(range(1, max(ns) + 1))
    qs = _parse_range(args.q, "q") if args.q else list(range(1, max(ks) + 1))
    rows = constant_table(ns, ks, qs)
    if not rows:
        raise UsageError("no triple with 1 <= q <= k <= n in the given ranges")
    if args.format == "json":
        text = _json_text(rows)
    elif args.format == "csv":
        text = _csv_text(rows)
    else:
        cols = list(rows[0])
        text = "".join(f"{c:>24}" for c in cols) + "\n"
        for r in rows:
            text += "".join(f"{_fmt(r[c]):>24}" for c in cols) + "\n"
    _emit(text, args.out)
    return 0


def _report_text(reports, fmt, timestamp):
    dicts = [r.to_dict(timestamp=timestamp) for r in reports]
    if fmt == "csv":
        return _csv_text(dicts)
    if fmt == "human":
        return "".join(_human_report(d) for d in dicts)
    return _json_text(dicts[0] if len(dicts) == 1 else dicts)


def cmd_verify(args):
    cfg = {key: getattr(args, key) for key in (
        "identity", "n", "k", "q", "ell", "alpha", "f", "samples", "seed", "workers",
        "rel_tol", "scale", "offset_scale", "path", "constant_scale")}
    report = run_identity(cfg)
    _emit(_report_text([report], args.format, not args.no_timestamp), args.out)
    return 0 if report.passed else 1


class SuiteParseError(UsageError):
    pass


def parse_suite(text, source="<suite>"):
    """Parse a suite file into ``[(name, config)]``.

    The grammar is line oriented: ``[name]`` starts an entry, ``key = value``
    sets a field, ``#`` starts a comment. Keys before the first header are
    defaults for every entry.
    """
    defaults, entries, current = {}, [], None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        col = len(line) - len(line.lstrip()) + 1
        stripped = line.strip()
        if stripped.startswith("["):
            if not stripped.endswith("]") or len(stripped) < 3:
                raise SuiteParseError(f"{source}:{lineno}:{col}: malformed section header")
            current = {}
            entries.append((stripped[1:-1].strip(), current, lineno))
            continue
        key, eq, value = stripped.partition("=")
        key = key.strip().replace("-", "_")
        if not eq:
            raise SuiteParseError(f"{source}:{lineno}:{col}: expected 'key = value'")
        if key not in SUITE_KEYS:
            raise SuiteParseError(f"{source}:{lineno}:{col}: unknown key {key!r}")
        target = defaults if current is None else current
        target[key] = value.strip()
    if not entries:
        raise SuiteParseError(f"{source}: suite declares no runs")
    out = []
    for name, cfg, lineno in entries:
        merged = dict(defaults, **cfg)
        if "identity" not in merged:
            raise SuiteParseError(f"{source}:{lineno}:1: entry [{name}] has no identity")
        expect = merged.get("expect", "pass")
        if expect not in ("pass", "fail"):
            raise SuiteParseError(f"{source}:{lineno}:1: expect must be pass or fail")
        out.append((name, merged))
    return out


def _load_suite(path):
    p = Path(path)
    if p.exists():
        return p.read_text(encoding="utf-8"), str(p)
    builtin = resources.files("bpverify").joinpath("suites", f"{path}.suite")
    if builtin.is_file():
        return builtin.read_text(encoding="utf-8"), f"{path}.suite"
    raise UsageError(f"suite file {path!r} not found")


def cmd_suite(args):
    text, source = _load_suite(args.config)
    entries = parse_suite(text, source)
    runs, reports = [], []
    for name, cfg in entries:
        cfg = dict(cfg)
        cfg.setdefault("seed", args.seed)
        cfg["workers"] = args.workers
        try:
            report = run_identity(cfg)
        except (BPVerifyError, UsageError, ValueError) as exc:
            raise UsageError(f"{source} [{name}]: {exc}") from None
        expect = cfg.get("expect", "pass")
        ok = report.passed == (expect == "pass")
        reports.append(report)
        runs.append({"name": name, "expect": expect, "ok": ok,
                     "report": report.to_dict(timestamp=not args.no_timestamp)})
    all_ok = all(r["ok"] for r in runs)
    if args.format == "csv":
        text = _csv_text([dict(r["report"], name=r["name"], expect=r["expect"], ok=r["ok"])
                          for r in runs])
    elif args.format == "human":
        text = ""
        for r in runs:
            text += f"== [{r['name']}] expect={r['expect']} -> {'ok' if r['ok'] else 'NOT OK'}\n"
            text += _human_report(r["report"])
        text += f"suite: {'PASS' if all_ok else 'FAIL'}\n"
    else:
        text = _json_text({"suite": source, "pass": all_ok, "runs": runs})
    _emit(text, args.out)
    return 0 if all_ok else 1


def cmd_diagnose(args):
    """Moment diagnostic for the Grassmann sampler: mean projector against (k/n) I."""
    n, k = args.n, args.k
    if not 1 <= k <= n:
        raise UsageError(f"need 1 <= k <= n, got n={n}, k={k}")
    if args.samples < MIN_SAMPLES:
        raise UsageError(f"--samples must be at least {MIN_SAMPLES}")
    worst = 0.0
    entries = []
    for i in range(n):
        for j in range(i, n):
            def kernel(gen, size, i=i, j=j):
                bases, redraws = grassmann_batch(n, k, gen, size)
                return np.einsum("sk,sk->s", bases[:, i], bases[:, j]), redraws

            est = run_mc(kernel, args.samples, args.seed, 100 + i * n + j, args.workers)
            target = k / n if i == j else 0.0
            z = abs(est.mean - target) / est.stderr if est.stderr > 0 else math.inf
            worst = max(worst, z)
            entries.append({"i": i, "j": j, "mean": est.mean, "stderr": est.stderr,
                            "target": target, "z": z})
    passed = worst <= 4.0
    out = {"sampler": "grassmann", "n": n, "k": k, "samples": args.samples,
           "seed": args.seed, "max_z": worst, "pass": passed, "entries": entries}
    if args.format == "csv":
        text = _csv_text(entries)
    elif args.format == "human":
        text = "".join(f"P[{e['i']},{e['j']}] mean={e['mean']:.6f} target={e['target']:.6f} "
                       f"z={e['z']:.2f}\n" for e in entries)
        text += f"max z = {worst:.2f}: {'PASS' if passed else 'FAIL'}\n"
    else:
        text = _json_text(out)
    _emit(text, args.out)
    return 0 if passed else 1


# --------------------------------------------------------------------- parser


def _default_seed():
    env = os.environ.get("BPVERIFY_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"BPVERIFY_SEED must be an integer, got {env!r}") from None


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _add_output(p):
    p.add_argument("--out", help="write the report to this file instead of stdout")
    p.add_argument("--format", choices=("json", "csv", "human"), default="json")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bpverify",
        description="Blaschke-Petkantschin constants, samplers and identity verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", help="table of Stiefel volumes and BP constants")
    p.add_argument("--n", required=True, help="n value, list a,b or range a-b")
    p.add_argument("--k", help="k values (default 1..max n)")
    p.add_argument("--q", help="q values (default 1..max k)")
    _add_output(p)
    p.set_defaults(func=cmd_constants, format="human")

    p = sub.add_parser("verify", help="verify one identity numerically")
    p.add_argument("identity", choices=IDENTITIES)
    p.add_argument("--n", type=_positive_int)
    p.add_argument("--k", type=_positive_int)
    p.add_argument("--q", type=_positive_int)
    p.add_argument("--ell", type=int, default=0)
    p.add_argument("--alpha", type=float)
    p.add_argument("--f", default="gaussian:a=1", help="function spec, ';'-joined for products")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--rel-tol", type=float, default=DEFAULT_REL_TOL)
    p.add_argument("--scale", type=float, default=DEFAULT_SCALE,
                   help="std of the Gaussian proposal for points")
    p.add_argument("--offset-scale", type=float, default=DEFAULT_SCALE,
                   help="std of the Gaussian proposal for plane offsets")
    p.add_argument("--path", choices=("auto", "quadrature", "regularized"), default="auto")
    p.add_argument("--constant-scale", type=float, default=1.0,
                   help="multiply the identity's constant (sensitivity checks)")
    p.add_argument("--no-timestamp", action="store_true", help="omit runtime from reports")
    _add_output(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("suite", help="run a battery of verifications from a suite file")
    p.add_argument("config", help="suite file path or name of a shipped suite (acceptance)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--no-timestamp", action="store_true")
    _add_output(p)
    p.set_defaults(func=cmd_suite)

    p = sub.add_parser("diagnose", help="moment diagnostics for the Grassmann sampler")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=_positive_int, default=1)
    _add_output(p)
    p.set_defaults(func=cmd_diagnose)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "seed", 0) is None:
            args.seed = _default_seed()
        return args.func(args)
    except (UsageError, BPVerifyError) as exc:
        print(f"bpverify: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
