"""``mzsphere`` command-line interface.

Every invocation is turned into a :class:`RunManifest`, executed by
:func:`run_pipeline`, and the manifest is written next to the outputs so a
run can be replayed with ``mzsphere --manifest <file>``.

Exit codes: 0 success, 1 certificate failure, 2 input error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .harmonics import KernelSpec, kernel_eval
from .mzframe import (
    MZ_THRESHOLD,
    certify_interpolation,
    certify_mz,
    interpolation_threshold,
    mz_constant_p2,
    mz_estimate_p,
    riesz_bounds,
)
from .pickfn import build_pick_function, certified_riesz_lower, verify_lemma
from .specfun import bessel_first_zero
from .sphere import (
    ArrayFamily,
    PointConfiguration,
    analyze,
    gen_fibonacci,
    gen_random_uniform,
    gen_roots_of_unity,
    minimize_riesz_energy,
)

COMMANDS = ("gen", "analyze", "mz", "certify", "pick", "bessel-zero", "thresholds", "kernel")
EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
# separation constant of a hexagonal packing, (8 pi / sqrt 3)^{1/2}
HEX_SEPARATION = math.sqrt(8.0 * math.pi / math.sqrt(3.0))


class InputError(Exception):
    """Malformed or inconsistent user input (exit code 2)."""


@dataclass
class RunManifest:
    command: str
    params: dict
    seed: int = 0
    out: str = "."
    format: str = "both"
    outputs: list[str] = field(default_factory=list)
    version: str = __version__

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> RunManifest:
        data = json.loads(text)
        if data.get("command") not in COMMANDS:
            raise InputError(f"unknown command in manifest: {data.get('command')!r}")
        return cls(command=data["command"], params=dict(data.get("params", {})),
                   seed=int(data.get("seed", 0)), out=data.get("out", "."),
                   format=data.get("format", "both"))


# reporting helpers ------------------------------------------------------------------


def _clean(obj):
    """Replace non-finite floats by None so the JSON stays standard."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


class _Writer:
    def __init__(self, manifest: RunManifest):
        self.manifest = manifest
        self.dir = Path(manifest.out)

    def emit(self, name: str, report: dict | None = None, csv_text: str | None = None):
        fmt = self.manifest.format
        self.dir.mkdir(parents=True, exist_ok=True)
        if report is not None and fmt in ("json", "both"):
            path = self.dir / f"{name}.json"
            path.write_text(json.dumps(_clean(report), indent=2) + "\n")
            self.manifest.outputs.append(str(path))
        if csv_text is not None and fmt in ("csv", "both"):
            path = self.dir / f"{name}.csv"
            path.write_text(csv_text)
            self.manifest.outputs.append(str(path))

    def finish(self):
        self.dir.mkdir(parents=True, exist_ok=True)
        path = self.dir / f"{self.manifest.command}.manifest.json"
        self.manifest.outputs.append(str(path))
        path.write_text(self.manifest.to_json())


def _load_config(path) -> PointConfiguration:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    text = raw.decode("utf-8", errors="replace")
    try:
        return PointConfiguration.from_json(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise InputError(f"malformed JSON in {path} at byte offset {offset}: {exc.msg}") from None
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"invalid configuration in {path}: {exc}") from None


def _load_family(path) -> ArrayFamily:
    try:
        return ArrayFamily.load(path)
    except json.JSONDecodeError as exc:
        offset = len(exc.doc[: exc.pos].encode("utf-8"))
        raise InputError(f"malformed JSON under {path} at byte offset {offset}: {exc.msg}") from None
    except OSError as exc:
        raise InputError(f"cannot read family {path}: {exc}") from None
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"invalid family {path}: {exc}") from None


def _parse_degrees(spec: str) -> list[int]:
    """``"4:25"`` (half-open), ``"4:25:2"`` or ``"4,8,16"``."""
    try:
        if ":" in spec:
            parts = [int(x) for x in spec.split(":")]
            return list(range(*parts))
        return [int(x) for x in spec.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"cannot parse degrees {spec!r}") from None


# commands ---------------------------------------------------------------------------


def run_thresholds(d: int) -> dict:
    """Bessel threshold, MZ threshold and (d = 2) the hexagonal k values."""
    if d < 1:
        raise InputError("d must be >= 1")
    lam = (d - 2) / 2
    j = bessel_first_zero(lam)
    out = {
        "d": d,
        "lambda": lam,
        "j_lambda": j,
        "interpolation_threshold": 2.0 * j,
        "mz_threshold": MZ_THRESHOLD,
    }
    if d == 2:
        # N = (kL)^2 points with separation c / sqrt(N) and covering radius c / sqrt(3 N)
        out["hex_separation_constant"] = HEX_SEPARATION
        out["k_interp"] = HEX_SEPARATION / (2.0 * j)
        out["k_mz"] = 2.0 * HEX_SEPARATION / (math.sqrt(3.0) * math.pi)
    return out


def _make_config(kind: str, p: dict, seed: int, L: int | None = None) -> PointConfiguration:
    d = int(p.get("d") or 2)
    if kind == "roots":
        deg = L if L is not None else p.get("L")
        if deg is None:
            raise InputError("--kind roots needs --L")
        return gen_roots_of_unity(int(deg))
    if L is not None:
        N = math.ceil((float(p["k"]) * L) ** 2)
    elif p.get("N") is not None:
        N = int(p["N"])
    else:
        raise InputError(f"--kind {kind} needs --N (or --degrees with --k)")
    N = max(N, 1)
    if kind == "fibonacci":
        cfg = gen_fibonacci(N)
    elif kind == "random":
        cfg = gen_random_uniform(N, d, seed)
    elif kind == "riesz":
        cfg = minimize_riesz_energy(max(N, 2), float(p.get("s") or 1.0), d,
                                    iters=int(p.get("iters") or 500), seed=seed)
    else:
        raise InputError(f"unknown generator kind {kind!r}")
    deg = L if L is not None else p.get("degree")
    return cfg.with_degree(None if deg is None else int(deg))


def _cmd_gen(m: RunManifest, w: _Writer) -> int:
    p = m.params
    kind = p["kind"]
    out_dir = Path(m.out)
    if p.get("degrees"):
        degrees = _parse_degrees(p["degrees"])
        if kind != "roots" and p.get("k") is None:
            raise InputError("family generation needs --k (N = ceil((kL)^2))")
        fam = ArrayFamily.from_configs(_make_config(kind, p, m.seed + L, L) for L in degrees)
        manifest = fam.save(out_dir / (p.get("name") or f"{kind}_family"))
        m.outputs.append(str(manifest))
        print(manifest)
        return EXIT_OK
    cfg = _make_config(kind, p, m.seed)
    path = out_dir / (p.get("name") or f"{kind}.json")
    path.parent.mkdir(parents=True, exist_ok=True)
    cfg.save(path)
    m.outputs.append(str(path))
    print(path)
    return EXIT_OK


def _cmd_analyze(m: RunManifest, w: _Writer) -> int:
    p = m.params
    cfg = _load_config(p["input"])
    rep = analyze(cfg, p.get("degree"), p.get("grid_size")).to_dict()
    header = list(rep)
    w.emit("analyze", rep, _csv_text(header, [[rep[k] for k in header]]))
    print(json.dumps(_clean(rep), indent=2))
    return EXIT_OK


def _cmd_mz(m: RunManifest, w: _Writer) -> int:
    p = m.params
    cfg = _load_config(p["input"])
    L = p.get("degree") if p.get("degree") is not None else cfg.degree
    if L is None:
        raise InputError("configuration has no degree; pass --degree")
    bounds = mz_constant_p2(cfg, int(L))
    rep = bounds.to_dict()
    pval = str(p.get("p") or "2")
    if p.get("estimate_samples") or pval not in ("2", "2.0"):
        pnum = math.inf if pval in ("inf", "infinity") else float(pval)
        est = mz_estimate_p(cfg, pnum, int(p.get("estimate_samples") or 1000), m.seed, int(L))
        rep["estimate"] = {"p": pval, "value": est, "label": "ESTIMATE (lower bound on C_p)"}
    header = ["L", "m", "lambda_min", "lambda_max", "numeric_rank", "A", "B", "C2"]
    row = [int(L), cfg.m, bounds.lambda_min, bounds.lambda_max, bounds.numeric_rank,
           bounds.lower, bounds.upper, bounds.c2]
    w.emit("mz", rep, _csv_text(header, [row]))
    print(json.dumps(_clean(rep), indent=2))
    return EXIT_OK


def _cmd_certify(m: RunManifest, w: _Writer) -> int:
    p = m.params
    fam = _load_family(p["family"])
    if p["theorem"] == "interp":
        cert = certify_interpolation(fam, p.get("theta"))
    elif p["theorem"] == "mz":
        cert = certify_mz(fam, eps=float(p.get("eps") or 1e-3))
    else:
        raise InputError(f"unknown theorem {p['theorem']!r}")
    w.emit(f"certify_{p['theorem']}", cert.to_dict(), cert.to_csv())
    print(cert.to_json())
    return EXIT_OK if cert.passed else EXIT_FAIL


def _cmd_pick(m: RunManifest, w: _Writer) -> int:
    p = m.params
    if p.get("action") == "certify":
        cfg = _load_config(p["input"])
        L = p.get("L") if p.get("L") is not None else cfg.degree
        if L is None or p.get("theta") is None:
            raise InputError("pick certify needs --theta and a degree (--L or stored)")
        pf = build_pick_function(cfg.dim, int(L), float(p["theta"]), p.get("ellmax"))
        try:
            a_cert = certified_riesz_lower(cfg.with_degree(int(L)), pf)
        except ValueError as exc:
            rep = {"certified": False, "reason": str(exc)}
            w.emit("pick_certify", rep)
            print(json.dumps(rep, indent=2))
            return EXIT_FAIL
        rb = riesz_bounds(cfg, int(L))
        ok = a_cert <= rb.lambda_min + 1e-6 and a_cert > 0
        rep = {"certified": ok, "A_cert": a_cert, "gram_lambda_min": rb.lambda_min,
               "gram_lambda_max": rb.lambda_max, "L": int(L), "theta": pf.theta, "m": cfg.m}
        w.emit("pick_certify", rep, _csv_text(list(rep), [list(rep.values())]))
        print(json.dumps(_clean(rep), indent=2))
        return EXIT_OK if ok else EXIT_FAIL
    d, L, theta = int(p["d"]), int(p["L"]), float(p["theta"])
    pf = build_pick_function(d, L, theta, p.get("ellmax"))
    lemma = verify_lemma(pf)
    rep = pf.to_dict() | {"lemma": asdict(lemma) | {"all_pass": lemma.all_pass}}
    ell = range(pf.ellmax + 1)
    w.emit("pick", rep, _csv_text(["ell", "f0_hat", "FL_hat"],
                                  [[i, float(a), float(b)] for i, a, b in zip(ell, pf.f0_coeffs, pf.FL_coeffs)]))
    print(json.dumps(_clean({k: v for k, v in rep.items() if not k.endswith("coeffs")}), indent=2))
    return EXIT_OK if lemma.all_pass else EXIT_FAIL


def _cmd_bessel_zero(m: RunManifest, w: _Writer) -> int:
    nu = float(m.params["nu"])
    try:
        z = bessel_first_zero(nu)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    w.emit("bessel_zero", {"nu": nu, "zero": z})
    print(f"{z:.12g}")
    return EXIT_OK


def _cmd_thresholds(m: RunManifest, w: _Writer) -> int:
    rep = run_thresholds(int(m.params["d"]))
    w.emit("thresholds", rep, _csv_text(list(rep), [list(rep.values())]))
    print(json.dumps(rep, indent=2))
    return EXIT_OK


def _cmd_kernel(m: RunManifest, w: _Writer) -> int:
    p = m.params
    spec = KernelSpec(int(p["d"]), int(p["L"]))
    ts = [float(t) for t in p["t"]]
    vals = [float(v) for v in np.atleast_1d(kernel_eval(spec, np.array(ts)))]
    w.emit("kernel", {"d": spec.dim, "L": spec.degree, "t": ts, "K": vals},
           _csv_text(["t", "K"], list(zip(ts, vals))))
    for t, v in zip(ts, vals):
        print(f"{t!r}\t{v!r}")
    return EXIT_OK


_DISPATCH = {
    "gen": _cmd_gen,
    "analyze": _cmd_analyze,
    "mz": _cmd_mz,
    "certify": _cmd_certify,
    "pick": _cmd_pick,
    "bessel-zero": _cmd_bessel_zero,
    "thresholds": _cmd_thresholds,
    "kernel": _cmd_kernel,
}


def run_pipeline(manifest: RunManifest) -> int:
    """Execute one manifest; returns the process exit code."""
    if manifest.command not in _DISPATCH:
        print(f"error: unknown command {manifest.command!r}", file=sys.stderr)
        return EXIT_INPUT
    manifest.outputs = []
    w = _Writer(manifest)
    try:
        code = _DISPATCH[manifest.command](manifest, w)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    w.finish()
    return code


# argument parsing -----------------------------------------------------------------------


def _add_globals(p: argparse.ArgumentParser, default):
    p.add_argument("--seed", type=int, default=default(0), help="root seed for all randomness")
    p.add_argument("--out", default=default("."), help="output directory")
    p.add_argument("--format", choices=("json", "csv", "both"), default=default("both"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mzsphere", description=__doc__.splitlines()[0])
    _add_globals(parser, lambda v: v)
    parser.add_argument("--manifest", help="replay a saved run manifest")
    sub = parser.add_subparsers(dest="command")
    common = argparse.ArgumentParser(add_help=False)
    _add_globals(common, lambda v: argparse.SUPPRESS)

    g = sub.add_parser("gen", parents=[common], help="generate a configuration or family")
    g.add_argument("--kind", required=True, choices=("roots", "fibonacci", "random", "riesz"))
    g.add_argument("--L", type=int, help="degree for roots of unity")
    g.add_argument("--N", type=int, help="number of points")
    g.add_argument("--d", type=int, default=2, help="sphere dimension (random, riesz)")
    g.add_argument("--s", type=float, default=1.0, help="Riesz exponent")
    g.add_argument("--iters", type=int, default=500)
    g.add_argument("--degree", type=int, help="degree to attach to the configuration")
    g.add_argument("--degrees", help="family degrees, e.g. 4:25 or 4,8,16")
    g.add_argument("--k", type=float, help="family density: N = ceil((k L)^2)")
    g.add_argument("--name", help="output file (single) or directory (family) name")

    a = sub.add_parser("analyze", parents=[common], help="mesh norm and separation report")
    a.add_argument("--input", required=True)
    a.add_argument("--degree", type=int)
    a.add_argument("--grid-size", type=int)

    z = sub.add_parser("mz", parents=[common], help="L^2 MZ constant (and p estimates)")
    z.add_argument("--input", required=True)
    z.add_argument("--degree", type=int)
    z.add_argument("--p", default="2")
    z.add_argument("--estimate-samples", type=int)

    c = sub.add_parser("certify", parents=[common], help="check theorem hypotheses on a family")
    c.add_argument("--family", required=True, help="family directory or manifest.json")
    c.add_argument("--theorem", required=True, choices=("interp", "mz"))
    c.add_argument("--theta", type=float)
    c.add_argument("--eps", type=float, default=1e-3, help="uniform separation floor")

    k = sub.add_parser("pick", parents=[common], help="pick function and lemma report")
    k.add_argument("action", nargs="?", choices=("certify",))
    k.add_argument("--d", type=int, default=2)
    k.add_argument("--L", type=int)
    k.add_argument("--theta", type=float)
    k.add_argument("--ellmax", type=int)
    k.add_argument("--input")

    b = sub.add_parser("bessel-zero", parents=[common], help="first positive zero of J_nu")
    b.add_argument("--nu", type=float, required=True)

    t = sub.add_parser("thresholds", parents=[common], help="Bessel, MZ and hexagonal thresholds")
    t.add_argument("--d", type=int, default=2)

    r = sub.add_parser("kernel", parents=[common], help="reproducing kernel values")
    r.add_argument("--d", type=int, required=True)
    r.add_argument("--L", type=int, required=True)
    r.add_argument("--t", type=float, nargs="+", required=True)
    return parser


_GLOBAL_KEYS = ("seed", "out", "format", "command", "manifest")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.manifest:
        try:
            manifest = RunManifest.from_json(Path(args.manifest).read_text())
        except (OSError, json.JSONDecodeError, InputError) as exc:
            print(f"error: cannot load manifest {args.manifest}: {exc}", file=sys.stderr)
            return EXIT_INPUT
        return run_pipeline(manifest)
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_INPUT
    params = {k.replace("-", "_"): v for k, v in vars(args).items() if k not in _GLOBAL_KEYS}
    if args.command == "pick" and params.get("action") != "certify":
        if params.get("L") is None or params.get("theta") is None:
            parser.error("pick needs --L and --theta")
    manifest = RunManifest(command=args.command, params=params, seed=args.seed,
                           out=args.out, format=args.format)
    return run_pipeline(manifest)


if __name__ == "__main__":
    sys.exit(main())
