"""Command-line front end.

    fqestimate estimate --preset ethylene_carbonate --algorithm both
    fqestimate sweep --eta 20:200:20 --rs 1,5,10 --log2n 18
    fqestimate reproduce kim-table
    fqestimate presets
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, fields

from . import interaction_picture as ip
from . import qubitization as qb
from .momentum_state import MomentumBox, effective_workers, lambda_nu
from .errors import EstimationError, InvalidInput
from .scenario import (TABULATED_RS, NuclearSpecies, System, derive, from_delta, from_rs,
                       get_preset, presets)

EXIT_TOLERANCE = 5
ALGORITHMS = ("qubitization", "interaction")

CSV_COLUMNS = ["eta", "omega", "n", "n_p", "r_s", "delta", "eps", "algorithm", "status",
               "steps", "toffolis", "qubits", "lambda_effective", "eps_pha",
               "n_M", "n_R", "n_T", "b_r", "amplitude_amplification", "refined",
               "refined_phasing", "K", "n_t", "b_T"]

_CONFIG_TYPES = {
    "qubitization": {f.name: f.type for f in fields(qb.QubitizationConfig)},
    "interaction": {f.name: f.type for f in fields(ip.InteractionConfig)},
}


# number formatting --------------------------------------------------------

def fmt_real(x: float) -> str:
    return f"{x:.6g}"


def _round6(obj):
    """Reals to 6 significant digits, recursively; ints and bools untouched."""
    if isinstance(obj, bool) or isinstance(obj, int) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return str(obj)
        return float(fmt_real(obj))
    if isinstance(obj, dict):
        return {k: _round6(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round6(v) for v in obj]
    return obj


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return fmt_real(v)
    return str(v)


# scenario ingestion -------------------------------------------------------

_SCENARIO_KEYS = {"eta", "species", "omega_bohr3", "num_plane_waves", "target_error_hartree",
                  "options", "name"}
_OPTION_KEYS = {"algorithm", "overrides"}


def load_scenario(path: str) -> tuple[System, dict]:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InvalidInput(f"cannot read scenario {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"scenario {path} is not valid JSON: {exc}") from exc
    return parse_scenario(doc)


def parse_scenario(doc) -> tuple[System, dict]:
    if not isinstance(doc, dict):
        raise InvalidInput("scenario must be a JSON object")
    unknown = set(doc) - _SCENARIO_KEYS
    if unknown:
        raise InvalidInput(f"unknown scenario keys: {sorted(unknown)}")
    for k in ("eta", "omega_bohr3", "num_plane_waves"):
        if k not in doc:
            raise InvalidInput(f"scenario missing {k!r}")
    options = doc.get("options", {}) or {}
    if not isinstance(options, dict) or set(options) - _OPTION_KEYS:
        raise InvalidInput(f"options must be an object with keys from {sorted(_OPTION_KEYS)}")
    try:
        species = tuple(NuclearSpecies(int(s["zeta"]), int(s["count"]))
                        for s in doc.get("species", []))
        system = System(int(doc["eta"]), species, float(doc["omega_bohr3"]),
                        int(doc["num_plane_waves"]),
                        float(doc.get("target_error_hartree", 0.0016)), str(doc.get("name", "")))
    except (KeyError, TypeError) as exc:
        raise InvalidInput(f"malformed scenario: {exc}") from exc
    return system, options


def _parse_value(raw: str):
    low = raw.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        raise InvalidInput(f"override value {raw!r} is not a number or boolean") from None


def parse_overrides(pairs) -> dict:
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise InvalidInput(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = _parse_value(v.strip())
    return out


def split_overrides(overrides: dict, algorithms) -> dict[str, dict]:
    """Route each override to every selected algorithm whose config has that field."""
    routed = {a: {} for a in algorithms}
    for key, val in overrides.items():
        hit = False
        for a in algorithms:
            if key in _CONFIG_TYPES[a]:
                routed[a][key] = val
                hit = True
        if not hit:
            valid = sorted(set().union(*(_CONFIG_TYPES[a] for a in algorithms)))
            raise InvalidInput(f"unknown override {key!r}; valid keys: {', '.join(valid)}")
    return routed


def _algorithms(name: str) -> tuple[str, ...]:
    return ALGORITHMS if name == "both" else (name,)


# estimation ---------------------------------------------------------------

def run_algorithm(system: System, algorithm: str, fixed: dict):
    if algorithm == "qubitization":
        return qb.optimize(system, fixed=fixed)[1]
    return ip.optimize(system, fixed=fixed)[1]


def scenario_dict(system: System) -> dict:
    g = derive(system)
    return {
        "name": system.name,
        "eta": system.eta,
        "species": [{"zeta": s.zeta, "count": s.count} for s in system.species],
        "omega_bohr3": system.omega,
        "num_plane_waves": system.n_requested,
        "target_error_hartree": system.eps,
        "derived": asdict(g) | {"warnings": list(g.warnings)},
    }


def report_row(system: System, algorithm: str, report=None, status: str = "ok") -> dict:
    g = derive(system)
    row = {c: None for c in CSV_COLUMNS}
    row.update(eta=system.eta, omega=system.omega, n=system.n_requested, n_p=g.n_p,
               r_s=g.r_s, delta=g.delta, eps=system.eps, algorithm=algorithm, status=status)
    if report is not None:
        row.update(steps=report.steps, toffolis=report.total_toffolis,
                   qubits=report.logical_qubits,
                   lambda_effective=report.lambdas.lambda_effective,
                   eps_pha=report.budget.eps_pha)
        row.update({k: v for k, v in asdict(report.config).items() if k in row})
    return row


def write_csv(rows, out) -> None:
    w = csv.writer(out, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_cell(r[c]) for c in CSV_COLUMNS])


def write_table(rows, out, columns=None) -> None:
    columns = columns or ["eta", "n", "n_p", "r_s", "algorithm", "status", "steps",
                          "toffolis", "qubits", "lambda_effective"]
    cells = [[_cell(r.get(c)) for c in columns] for r in rows]
    widths = [max(len(c), *(len(x[i]) for x in cells)) if cells else len(c)
              for i, c in enumerate(columns)]
    out.write("  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip() + "\n")
    for x in cells:
        out.write("  ".join(v.ljust(w) for v, w in zip(x, widths)).rstrip() + "\n")


def dump_json(doc, out) -> None:
    out.write(json.dumps(_round6(doc), indent=2, sort_keys=True))
    out.write("\n")


def _system_from_args(args) -> tuple[System, dict]:
    if args.config and args.preset:
        raise InvalidInput("give either --config or --preset, not both")
    if args.config:
        system, options = load_scenario(args.config)
    elif args.preset:
        system, options = get_preset(args.preset), {}
    else:
        raise InvalidInput("need --config PATH or --preset NAME")
    kw = {}
    if getattr(args, "log2n", None) is not None:
        kw["n_requested"] = 2 ** int(args.log2n)
    if getattr(args, "eps", None) is not None:
        kw["eps"] = float(args.eps)
    return (system.replace(**kw) if kw else system), options


def cmd_estimate(args, out) -> int:
    system, options = _system_from_args(args)
    algorithm = args.algorithm or options.get("algorithm", "both")
    if algorithm not in (*ALGORITHMS, "both"):
        raise InvalidInput(f"unknown algorithm {algorithm!r}")
    algos = _algorithms(algorithm)
    overrides = dict(options.get("overrides", {}) or {}) | parse_overrides(args.set)
    routed = split_overrides(overrides, algos)
    # build the lattice tables with the requested workers; later sums reuse them
    lambda_nu(MomentumBox(derive(system).n_p), args.threads)
    reports = [(a, run_algorithm(system, a, routed[a])) for a in algos]
    if args.format == "json":
        dump_json({"scenario": scenario_dict(system),
                   "reports": [r.to_dict() for _, r in reports]}, out)
    elif args.format == "csv":
        write_csv([report_row(system, a, r) for a, r in reports], out)
    else:
        write_table([report_row(system, a, r) for a, r in reports], out)
        for a, r in reports:
            out.write(f"\n[{a}] per-step Toffolis\n")
            for label, v in r.per_step_breakdown:
                out.write(f"  {v:>14d}  {label}\n")
            out.write(f"[{a}] logical qubits\n")
            for label, v in r.qubit_ledger:
                out.write(f"  {v:>14d}  {label}\n")
            for n in r.notes:
                out.write(f"  note: {n}\n")
    return 0


# sweeps -------------------------------------------------------------------

def parse_range(spec: str, kind=int) -> list:
    """'A:B:STEP' (inclusive) or a comma list."""
    try:
        if ":" in spec:
            parts = spec.split(":")
            if len(parts) != 3:
                raise ValueError
            a, b, step = (kind(p) for p in parts)
            if step <= 0:
                raise ValueError
            vals, v = [], a
            while v <= b + (1e-12 if kind is float else 0):
                vals.append(v)
                v = v + step
            return vals
        return [kind(p) for p in spec.split(",") if p.strip()]
    except ValueError:
        raise InvalidInput(f"bad range or list: {spec!r}") from None


def sweep_points(args) -> list[System]:
    base = None
    if args.config or args.preset:
        base, _ = _system_from_args(args)
    etas = parse_range(args.eta) if args.eta else [base.eta if base else 54]
    if args.rs and args.delta:
        raise InvalidInput("give at most one of --rs and --delta")
    log2ns = parse_range(args.log2n_list) if args.log2n_list else [18]
    epss = parse_range(args.eps_list, float) if args.eps_list else [base.eps if base else 0.0016]
    species = base.species if base else ()
    if not etas or not log2ns or not epss:
        raise InvalidInput("sweep axes must be non-empty")
    pts = []
    for eta in etas:
        if args.rs:
            sizes = [("rs", v) for v in parse_range(args.rs, float)]
        elif args.delta:
            sizes = [("delta", v) for v in parse_range(args.delta, float)]
        elif base is not None:
            sizes = [("omega", base.omega)]
        else:
            sizes = [("rs", 10.0)]
        for kind, val in sizes:
            for l in log2ns:
                if l < 3:
                    raise InvalidInput("log2 N must be >= 3")
                for e in epss:
                    n = 2 ** l
                    if kind == "rs":
                        pts.append(from_rs(eta, val, n, e, species))
                    elif kind == "delta":
                        pts.append(from_delta(eta, val, n, e, species))
                    else:
                        pts.append(System(eta, species, val, n, e))
    return pts


def _sweep_one(item):
    system, algorithm, fixed = item
    try:
        rep = run_algorithm(system, algorithm, fixed)
        return report_row(system, algorithm, rep)
    except EstimationError as exc:
        return report_row(system, algorithm, status=f"{type(exc).__name__}: {exc}")


def run_sweep(points, algos, routed, threads: int = 1) -> list[dict]:
    items = [(s, a, routed[a]) for s in points for a in algos]
    threads = effective_workers(threads)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(_sweep_one, items))
    return [_sweep_one(it) for it in items]


def cmd_sweep(args, out) -> int:
    algos = _algorithms(args.algorithm or "both")
    routed = split_overrides(parse_overrides(args.set), algos)
    rows = run_sweep(sweep_points(args), algos, routed, args.threads)
    if args.format == "json":
        dump_json({"rows": rows}, out)
    elif args.format == "table":
        write_table(rows, out)
    else:
        write_csv(rows, out)
    return 0


# reproduction targets -----------------------------------------------------

# (molecule, log2 N) -> (qubits, Toffolis) for the first-quantized rows
MOLECULE_TABLE = {
    ("ethylene_carbonate", 12): (1395, 2.5e10),
    ("ethylene_carbonate", 15): (1701, 6.6e10),
    ("ethylene_carbonate", 18): (2021, 1.7e11),
    ("ethylene_carbonate", 21): (2355, 4.2e11),
    ("lipf6", 12): (1758, 8.0e10),
    ("lipf6", 15): (2150, 2.1e11),
    ("lipf6", 18): (2556, 5.1e11),
    ("lipf6", 21): (2976, 1.3e12),
}
MOLECULE_TOFFOLI_TOL = 0.10
MOLECULE_QUBIT_TOL = 0.02


def table_grid_size(log2n: int) -> int:
    """Grid matching a table entry N = 2^(3 n_p): n_p = log2(N)/3 bits per component."""
    if log2n % 3:
        raise InvalidInput(f"table grid sizes are 2^(3 n_p); got 2^{log2n}")
    return ((1 << (log2n // 3)) - 1) ** 3


def reproduce_molecules(literal_n: bool = False, refined: bool = False) -> list[dict]:
    rows = []
    for (name, l), (pq, pt) in MOLECULE_TABLE.items():
        n = 2 ** l if literal_n else table_grid_size(l)
        system = get_preset(name).replace(n_requested=n)
        cfg, rep = qb.optimize(system, refined=refined)
        dt = rep.total_toffolis / pt - 1
        dq = rep.logical_qubits / pq - 1
        rows.append({
            "system": name, "log2_n_table": l, "n_used": n, "n_p": derive(system).n_p,
            "toffolis": rep.total_toffolis, "published_toffolis": pt, "toffoli_delta": dt,
            "qubits": rep.logical_qubits, "published_qubits": pq, "qubit_delta": dq,
            "n_M": cfg.n_M, "n_R": cfg.n_R, "n_T": cfg.n_T, "b_r": cfg.b_r,
            "pass": abs(dt) <= MOLECULE_TOFFOLI_TOL and abs(dq) <= MOLECULE_QUBIT_TOL,
        })
    return rows


def reproduce_wigner() -> list[dict]:
    rows = []
    for name, system in presets().items():
        if name not in TABULATED_RS:
            continue
        rs = derive(system).r_s
        rows.append({"system": name, "eta": system.eta, "omega": system.omega,
                     "r_s": rs, "published_r_s": TABULATED_RS[name],
                     "pass": round(rs, 2) == TABULATED_RS[name]})
    return rows


# (eta, delta, expected sign of log(interaction / qubitization))
CROSSOVER_PROBES = [(20, 1e-3, -1), (100, 1e-2, +1), (20, 1e-4, -1), (200, 1e-2, +1)]
CROSSOVER_N_LOG2 = (12, 15, 18, 21)
CROSSOVER_SPREAD_TOL = 0.20


def toffoli_ratio(eta: int, delta: float, n: int, eps: float = 0.0016) -> float:
    s = from_delta(eta, delta, n, eps)
    return ip.optimize(s)[1].total_toffolis / qb.optimize(s)[1].total_toffolis


def crossover_delta(eta: int, n: int, lo: float = 1e-5, hi: float = 1e-1,
                    iters: int = 14, eps: float = 0.0016) -> float:
    """Delta at which the two algorithms cost the same, by bisection in log Delta."""
    a, b = math.log(lo), math.log(hi)
    if toffoli_ratio(eta, lo, n, eps) >= 1 or toffoli_ratio(eta, hi, n, eps) <= 1:
        raise InvalidInput(f"no crossover bracketed in [{lo}, {hi}] for eta={eta}")
    for _ in range(iters):
        m = 0.5 * (a + b)
        if toffoli_ratio(eta, math.exp(m), n, eps) < 1:
            a = m
        else:
            b = m
    return math.exp(0.5 * (a + b))


def reproduce_crossover(etas=(20, 50)) -> dict:
    probes = []
    for eta, delta, sign in CROSSOVER_PROBES:
        r = toffoli_ratio(eta, delta, 2 ** 18)
        probes.append({"eta": eta, "delta": delta, "ratio": r, "expected": "<1" if sign < 0 else ">1",
                       "pass": (r < 1) if sign < 0 else (r > 1)})
    bounds = []
    for eta in etas:
        ds = [crossover_delta(eta, 2 ** l) for l in CROSSOVER_N_LOG2]
        spread = max(ds) / min(ds) - 1
        bounds.append({"eta": eta, "log2_n": list(CROSSOVER_N_LOG2), "delta": ds,
                       "spread": spread, "pass": spread < CROSSOVER_SPREAD_TOL})
    return {"probes": probes, "boundary": bounds}


def cmd_reproduce(args, out) -> int:
    if args.target == "kim-table":
        rows = reproduce_molecules(args.literal_n, args.refined)
        cols = ["system", "log2_n_table", "n_p", "toffolis", "published_toffolis", "toffoli_delta",
                "qubits", "published_qubits", "qubit_delta", "n_M", "n_R", "n_T", "pass"]
        ok = all(r["pass"] for r in rows)
        doc = {"rows": rows}
    elif args.target == "wigner-table":
        rows = reproduce_wigner()
        cols = ["system", "eta", "omega", "r_s", "published_r_s", "pass"]
        ok = all(r["pass"] for r in rows)
        doc = {"rows": rows}
    else:
        doc = reproduce_crossover()
        rows = doc["probes"]
        cols = ["eta", "delta", "ratio", "expected", "pass"]
        ok = all(r["pass"] for r in rows) and all(b["pass"] for b in doc["boundary"])
    doc["pass"] = ok
    if args.format == "json":
        dump_json(doc, out)
    else:
        write_table(rows, out, cols)
        for b in doc.get("boundary", []):
            ds = ", ".join(fmt_real(d) for d in b["delta"])
            out.write(f"boundary eta={b['eta']}: delta = [{ds}] spread {fmt_real(b['spread'])}"
                      f" {'pass' if b['pass'] else 'FAIL'}\n")
        out.write(f"overall: {'pass' if ok else 'FAIL'}\n")
    return 0 if ok else EXIT_TOLERANCE


def cmd_presets(args, out) -> int:
    rows = []
    for name, s in presets().items():
        g = derive(s)
        rows.append({"name": name, "eta": s.eta, "omega": s.omega, "lambda_zeta": s.lambda_zeta,
                     "r_s": g.r_s, "n": s.n_requested, "n_p": g.n_p})
    if args.format == "json":
        dump_json({"presets": rows}, out)
    else:
        write_table(rows, out, ["name", "eta", "omega", "lambda_zeta", "r_s", "n", "n_p"])
    return 0


# entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fqestimate",
                                description="Fault-tolerant resource estimates for first-quantized "
                                            "plane-wave chemistry.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, default_format):
        sp.add_argument("--format", choices=("json", "csv", "table"), default=default_format)
        sp.add_argument("--out", help="output file (default standard output)")

    def source(sp):
        sp.add_argument("--config", help="scenario JSON file")
        sp.add_argument("--preset", help="named preset (see 'presets')")
        sp.add_argument("--algorithm", choices=("qubitization", "interaction", "both"))
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="pin a config field; repeatable")

    est = sub.add_parser("estimate", help="optimize and cost one scenario")
    source(est)
    est.add_argument("--log2n", type=int, help="override N = 2^LOG2N")
    est.add_argument("--eps", type=float, help="override the target error (Hartree)")
    est.add_argument("--threads", type=int, default=1, help="worker threads (0 = auto)")
    common(est, "table")

    sw = sub.add_parser("sweep", help="cost a grid of jellium (or preset-species) systems")
    source(sw)
    sw.add_argument("--eta", help="A:B:STEP or list")
    sw.add_argument("--rs", help="Wigner-Seitz radii, A:B:STEP or list")
    sw.add_argument("--delta", help="grid resolutions, list (alternative to --rs)")
    sw.add_argument("--log2n", dest="log2n_list", help="log2 N values, A:B:STEP or list")
    sw.add_argument("--eps", dest="eps_list", help="target errors, list")
    sw.add_argument("--threads", type=int, default=1, help="worker threads (0 = auto)")
    common(sw, "csv")

    rp = sub.add_parser("reproduce", help="recompute a published table and diff it")
    rp.add_argument("target", choices=("kim-table", "wigner-table", "crossover"))
    rp.add_argument("--literal-n", action="store_true",
                    help="kim-table: use N literally instead of the table's 2^(3 n_p) convention")
    rp.add_argument("--refined", action="store_true",
                    help="kim-table: exact eps_M with tuned alpha")
    common(rp, "table")

    pr = sub.add_parser("presets", help="list named systems")
    common(pr, "table")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    buf = io.StringIO()
    handlers = {"estimate": cmd_estimate, "sweep": cmd_sweep,
                "reproduce": cmd_reproduce, "presets": cmd_presets}
    try:
        code = handlers[args.command](args, buf)
    except EstimationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    text = buf.getvalue()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
