"""Command-line entry point: ``mklab {nc,verify,wg,sim}``.

Exit codes: 0 success, 1 verification failure or rejected parameters,
2 runtime failure (interlacing violation, numerical error, I/O error).

``sim`` also reads a key-value config file (``--config``): one ``key =
value`` per line, ``#`` starts a comment, keys are the long flag names with
dashes or underscores. Flags given on the command line win.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__, _accel
from .errors import ConditioningError, InterlacingError, MKLabError, NumericalError, SizeLimitError
from .mk_transform import (
    FreeCumulantSequence,
    cumulants_to_moments,
    mk_forward,
    thm12_sum,
)
from .nc_lattice import (
    K_MAX,
    NonCrossingPartition,
    catalan,
    enumerate_nc,
    insert_at,
    kreweras,
    kreweras_decompositions,
    leq,
    mobius_nc,
)
from .perm_group import complement_via_group, embed_nc, gamma, integer_partitions
from .rmt_sim import (
    ALLOWANCE_L1,
    ALLOWANCE_L2,
    EnsembleSpec,
    run_concentration_experiment,
)
from .weingarten import build_table, mu_asymptotic

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_RUNTIME = 2

VERIFY_CAPS = {"thm12": 10, "prop_decomp": 11, "mobius": 7, "weingarten_asym": 6, "group_iso": 9}


# ---------------------------------------------------------------------------
# nc

def _parse_partition(text, k):
    p = NonCrossingPartition.parse(text, k)
    if p.k != k:
        raise ValueError(f"partition {p} lives on {p.k} points, expected {k}")
    return p


def cmd_nc(args) -> int:
    k = args.k
    if not 1 <= k <= K_MAX:
        raise SizeLimitError(f"k={k} outside supported range 1..{K_MAX}")
    targets = [_parse_partition(args.partition, k)] if args.partition else list(enumerate_nc(k))
    records = []
    if args.action == "enumerate":
        for p in targets:
            print(p)
            records.append({"partition": str(p), "blocks": len(p)})
    elif args.action == "kreweras":
        for p in targets:
            kp = kreweras(p)
            print(kp if args.partition else f"{p}\t{kp}")
            records.append({"partition": str(p), "kreweras": str(kp)})
    elif args.action == "decompositions":
        for p in targets:
            decs = kreweras_decompositions(p)
            if not args.partition:
                print(f"{p}\t{len(decs)}")
            for d in decs:
                if args.partition:
                    i, j = d.support
                    print(f"outer={d.outer}\tinner={d.inner}\tpoint={d.insertion_point}\tsupport=[{i},{j}]")
            records.append({
                "partition": str(p),
                "decompositions": [
                    {"outer": str(d.outer), "inner": str(d.inner), "insertion_point": d.insertion_point}
                    for d in decs
                ],
            })
    else:
        upper = _parse_partition(args.upper, k) if args.upper else NonCrossingPartition.one(k)
        for p in targets:
            if not leq(p, upper):
                continue
            mu = mobius_nc(p, upper)
            print(f"{p}\t{mu}")
            records.append({"lower": str(p), "upper": str(upper), "mobius": str(mu)})
    if args.output:
        _write_json(args.output, {"config": {"command": "nc", "k": k, "action": args.action,
                                             "partition": args.partition, "upper": args.upper},
                                  "records": records})
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify

def _since(t0) -> str:
    return f"{time.perf_counter() - t0:.2f}s"


def _random_fc(rng: random.Random, K: int) -> FreeCumulantSequence:
    return FreeCumulantSequence(tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(K)))


def _verify_thm12(kmax, samples, seed):
    rng = random.Random(seed)
    seqs = [_random_fc(rng, kmax) for _ in range(samples)]
    taus = [mk_forward(cumulants_to_moments(fc)) for fc in seqs]
    report = []
    for k in range(1, kmax + 1):
        t0 = time.perf_counter()
        for fc, tau in zip(seqs, taus):
            lhs = thm12_sum(fc, k)
            if lhs != tau[k]:
                return report, {"k": k, "fc": [str(v) for v in fc.values], "closed_form": str(lhs),
                                "recursion": str(tau[k])}
        report.append(f"k={k}: {samples} sequences, closed form == recursion ({_since(t0)})")
    return report, None


def _verify_prop_decomp(kmax, samples, seed):
    report = []
    for k in range(2, kmax + 1):
        t0 = time.perf_counter()
        total = 0
        for rho in enumerate_nc(k):
            decs = kreweras_decompositions(rho)
            if len(decs) != len(rho) - 1:
                return report, {"partition": str(rho), "expected": len(rho) - 1, "found": len(decs)}
            for d in decs:
                if insert_at(d.outer, d.insertion_point, d.inner) != rho:
                    return report, {"partition": str(rho), "outer": str(d.outer), "inner": str(d.inner),
                                    "point": d.insertion_point, "reason": "reconstruction failed"}
            total += len(decs)
        report.append(f"k={k}: {catalan(k)} partitions, sum(|rho|-1) = {total} ({_since(t0)})")
    return report, None


def _verify_mobius(kmax, samples, seed):
    report = []
    for k in range(1, kmax + 1):
        t0 = time.perf_counter()
        parts = enumerate_nc(k)
        pairs = 0
        for rho in parts:
            p_rho = embed_nc(rho)
            below = [nu for nu in parts if leq(nu, rho)]
            mus = {nu: mobius_nc(nu, rho) for nu in below}
            for nu in below:
                s = sum(mus[sig] for sig in below if leq(nu, sig))
                if s != (1 if nu == rho else 0):
                    return report, {"lower": str(nu), "upper": str(rho), "sieve_sum": str(s)}
                transported = mu_asymptotic((embed_nc(nu).inverse() * p_rho).cycle_type)
                if transported != mus[nu]:
                    return report, {"lower": str(nu), "upper": str(rho), "lattice": str(mus[nu]),
                                    "group": transported}
                pairs += 1
        corner = mobius_nc(NonCrossingPartition.zero(k), NonCrossingPartition.one(k))
        if corner != (-1) ** (k - 1) * catalan(k - 1):
            return report, {"k": k, "mu(0,1)": str(corner)}
        report.append(f"k={k}: {pairs} comparable pairs, sieve and group transport agree ({_since(t0)})")
    return report, None


def _verify_weingarten_asym(kmax, samples, seed):
    report = []
    for N in (2, 3, 5, 10):
        t = build_table(2, N)
        expect = {(1, 1): Fraction(1, N * N - 1), (2,): Fraction(-1, N * (N * N - 1))}
        for ct, v in t.values.items():
            if v != expect[ct.parts]:
                return report, {"k": 2, "N": N, "cycle_type": list(ct.parts), "value": str(v)}
    for k in range(1, kmax + 1):
        t0 = time.perf_counter()
        worst = 0.0
        for ct in integer_partitions(k):
            errs = [build_table(k, n).scaled(ct) - mu_asymptotic(ct) for n in (2 * k, 4 * k, 8 * k)]
            for a, b in zip(errs, errs[1:]):
                if a == 0:
                    if b != 0:
                        return report, {"k": k, "cycle_type": list(ct.parts), "errors": [str(e) for e in errs]}
                    continue
                ratio = abs(b / a)
                worst = max(worst, float(ratio))
                if ratio > Fraction(1, 3):
                    return report, {"k": k, "cycle_type": list(ct.parts), "errors": [str(e) for e in errs]}
        report.append(f"k={k}: {len(integer_partitions(k))} cycle types, worst error ratio {worst:.4f} ({_since(t0)})")
    return report, None


def _verify_group_iso(kmax, samples, seed):
    report = []
    for k in range(1, kmax + 1):
        t0 = time.perf_counter()
        parts = enumerate_nc(k)
        emb = {p: embed_nc(p) for p in parts}
        g = gamma(k)
        for rho in parts:
            if complement_via_group(rho) != embed_nc(kreweras(rho)):
                return report, {"partition": str(rho), "group": str(complement_via_group(rho)),
                                "lattice": str(embed_nc(kreweras(rho)))}
        checked = 0
        if k <= 7:
            for nu in parts:
                s = emb[nu]
                for rho in parts:
                    p = emb[rho]
                    geo = s.length + (s.inverse() * p).length + (p.inverse() * g).length == k - 1
                    if geo != leq(nu, rho):
                        return report, {"lower": str(nu), "upper": str(rho), "leq": leq(nu, rho), "geodesic": geo}
                    checked += 1
        report.append(f"k={k}: complement identity on {len(parts)} partitions, order on {checked} pairs ({_since(t0)})")
    return report, None


_SUITES = {
    "thm12": _verify_thm12,
    "prop_decomp": _verify_prop_decomp,
    "mobius": _verify_mobius,
    "weingarten_asym": _verify_weingarten_asym,
    "group_iso": _verify_group_iso,
}


def cmd_verify(args) -> int:
    cap = VERIFY_CAPS[args.suite]
    if not 1 <= args.kmax <= cap:
        raise SizeLimitError(f"--kmax {args.kmax} outside 1..{cap} for suite {args.suite}")
    t0 = time.perf_counter()
    report, failure = _SUITES[args.suite](args.kmax, args.samples, args.seed)
    for line in report:
        print(line)
    elapsed = time.perf_counter() - t0
    if failure is not None:
        print(f"FAIL {args.suite} after {elapsed:.2f}s")
        print(json.dumps({"suite": args.suite, "counterexample": failure}))
        return EXIT_FAIL
    print(f"PASS {args.suite} kmax={args.kmax} in {elapsed:.2f}s")
    return EXIT_OK


# ---------------------------------------------------------------------------
# wg

def cmd_wg(args) -> int:
    table = build_table(args.k, args.n)
    text = table.dumps()
    print(text)
    if args.output:
        Path(args.output).write_text(text + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# sim

SIM_DEFAULTS = {
    "ensemble": "gue",
    "n": 300,
    "kmax": 6,
    "trials": 200,
    "seed": 0,
    "c": None,
    "spectrum": None,
    "spectrum_const": None,
    "eigen": "lapack",
    "out_prefix": None,
    "a1": ALLOWANCE_L1,
    "a2": ALLOWANCE_L2,
    "l2_kmax": 2,
    "threads": None,
}

_SIM_TYPES = {"n": int, "kmax": int, "trials": int, "seed": int, "l2_kmax": int, "threads": int,
              "a1": float, "a2": float}


def read_config(path) -> dict:
    """Parse ``key = value`` lines into a dict keyed like the ``sim`` flags."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in SIM_DEFAULTS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _SIM_TYPES.get(key, str)(value)
    return out


def _number(text):
    text = text.strip()
    try:
        return Fraction(text)
    except ValueError:
        return float(text)


def resolve_sim_config(args) -> dict:
    cfg = dict(SIM_DEFAULTS)
    if args.config:
        cfg.update(read_config(args.config))
    for key in SIM_DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _spec_from_config(cfg) -> EnsembleSpec:
    fam = cfg["ensemble"]
    n, seed = int(cfg["n"]), int(cfg["seed"])
    if fam == "gue":
        return EnsembleSpec.gue(n, seed)
    if fam == "wishart":
        if cfg["c"] is None:
            raise ValueError("wishart ensemble needs --c")
        return EnsembleSpec.wishart(n, _number(str(cfg["c"])), seed)
    if fam == "fixed":
        if cfg["spectrum"]:
            spectrum = tuple(_number(x) for x in str(cfg["spectrum"]).split(","))
        elif cfg["spectrum_const"] is not None:
            spectrum = (_number(str(cfg["spectrum_const"])),) * n
        else:
            raise ValueError("fixed ensemble needs --spectrum or --spectrum-const")
        return EnsembleSpec.fixed(spectrum, seed)
    raise ValueError(f"unknown ensemble {fam!r}")


def _json_ready(cfg):
    return {k: (str(v) if isinstance(v, Fraction) else v) for k, v in cfg.items()}


def write_sim_outputs(prefix, cfg, result):
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    header = json.dumps(_json_ready(cfg), sort_keys=True)
    buf = io.StringIO()
    buf.write(f"# config: {header}\n")
    writer = csv.DictWriter(buf, fieldnames=list(result.CSV_COLUMNS), lineterminator="\n")
    writer.writeheader()
    for row in result.rows():
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    csv_path = prefix.with_suffix(".csv")
    json_path = prefix.with_suffix(".json")
    csv_path.write_text(buf.getvalue())
    payload = {"config": _json_ready(cfg), "backend": _accel.backend(), "result": result.to_json()}
    json_path.write_text(json.dumps(payload, indent=2) + "\n")
    return csv_path, json_path


def cmd_sim(args) -> int:
    cfg = resolve_sim_config(args)
    spec = _spec_from_config(cfg)
    result = run_concentration_experiment(spec, int(cfg["kmax"]), int(cfg["trials"]),
                                          eigen_method=cfg["eigen"], threads=cfg["threads"])
    gates = result.gate(float(cfg["a1"]), float(cfg["a2"]))
    print(f"ensemble={spec.family} N={spec.N} trials={result.trials} seed={spec.seed} backend={_accel.backend()}")
    print(f"{'k':>2} {'mean':>12} {'stderr':>10} {'pred_l1':>10} {'z1':>8} {'mean_sq':>12} {'pred_l2':>10} {'z2':>8}  gate")
    ok = True
    for k, (g1, g2) in enumerate(gates, start=1):
        use_l2 = k <= int(cfg["l2_kmax"])
        passed = g1 and (g2 or not use_l2)
        ok &= passed
        print(f"{k:>2} {result.mean[k-1]:>12.5f} {result.stderr[k-1]:>10.5f} {float(result.pred_l1[k-1]):>10.4f} "
              f"{result.z1[k-1]:>8.2f} {result.mean_sq[k-1]:>12.5f} {float(result.pred_l2[k-1]):>10.4f} "
              f"{result.z2[k-1]:>8.2f}  {'ok' if passed else 'FAIL'}")
    if cfg["out_prefix"]:
        csv_path, json_path = write_sim_outputs(cfg["out_prefix"], cfg, result)
        print(f"wrote {csv_path} and {json_path}")
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------

def _write_json(path, payload):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mklab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"mklab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("nc", help="non-crossing partition data")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("action", choices=["enumerate", "kreweras", "decompositions", "mobius"])
    p.add_argument("--partition", help='e.g. "{1,7|2,5,6|3|4|8,9}"')
    p.add_argument("--upper", help="upper partition for mobius (default 1_k)")
    p.add_argument("--output", help="also write JSON here")
    p.set_defaults(func=cmd_nc)

    p = sub.add_parser("verify", help="exhaustive and exact identity checks")
    p.add_argument("suite", choices=sorted(_SUITES))
    p.add_argument("--kmax", type=int, required=True)
    p.add_argument("--samples", type=int, default=100, help="random sequences for thm12")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("wg", help="exact Weingarten table as JSON")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--output")
    p.set_defaults(func=cmd_wg)

    p = sub.add_parser("sim", help="Monte Carlo Rayleigh-measure experiment")
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--ensemble", choices=["gue", "fixed", "wishart"])
    p.add_argument("--n", type=int)
    p.add_argument("--kmax", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--c", help="Wishart ratio N/M")
    p.add_argument("--spectrum", help="comma-separated eigenvalues for the fixed ensemble")
    p.add_argument("--spectrum-const", dest="spectrum_const", help="constant eigenvalue for the fixed ensemble")
    p.add_argument("--eigen", choices=["lapack", "householder"])
    p.add_argument("--out-prefix", dest="out_prefix", help="write PREFIX.csv and PREFIX.json")
    p.add_argument("--a1", type=float, help="first-moment allowance a in a/N")
    p.add_argument("--a2", type=float, help="second-moment allowance a in a/N")
    p.add_argument("--l2-kmax", dest="l2_kmax", type=int, help="gate the second moment for k <= this")
    p.add_argument("--threads", type=int, help="worker threads (default MKLAB_THREADS or 1)")
    p.set_defaults(func=cmd_sim)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InterlacingError, NumericalError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (SizeLimitError, ConditioningError, MKLabError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
