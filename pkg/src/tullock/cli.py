"""Command-line front end.

Subcommands: ``solve-opf``, ``optimize-benchmark``, ``compare``, ``verify``
and ``simulate``. Exit codes: 0 success, 1 invalid input, 2 numerical
failure (``verify`` also exits 2 when a check fails).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import fixed_prize, opf, simulate
from .core import PrizeSchedule
from .errors import NumericalError, TullockError, ValidationError
from .kernels import BACKEND
from .scenario import load_scenario

log = logging.getLogger("tullock")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2
DEFAULT_TRIALS = 10 ** 6
PROBE_TYPES = 10
DEVIATION_POINTS = 64
GAP_TOL = 3e-3


def fmt(x) -> str:
    """Ten significant digits, the format of every number we emit."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return f"{float(x):.10g}"


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: Path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, int, np.floating, np.integer)) else v for v in row])
    _atomic_write(path, buf.getvalue())


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, str)) or obj is None:
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(fmt(obj))
    return obj


def write_json(path: Path, obj):
    _atomic_write(path, json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def nu_tag(nu: float) -> str:
    return f"nu{nu:g}"


@dataclass
class ComparisonRow:
    nu: float
    profit_benchmark: float
    profit_opf: float
    profit_ratio: float
    welfare_benchmark: float
    welfare_opf: float
    welfare_ratio: float

    FIELDS = ("nu", "profit_benchmark", "profit_opf", "profit_ratio",
              "welfare_benchmark", "welfare_opf", "welfare_ratio")

    @classmethod
    def build(cls, nu, bench: fixed_prize.FixedPrizeSolution, sol: opf.OpfSolution):
        return cls(nu, bench.pi0_star, sol.profit, sol.profit / bench.pi0_star,
                   bench.welfare, sol.welfare, sol.welfare / bench.welfare)

    def values(self):
        return [getattr(self, k) for k in self.FIELDS]


# -- helpers shared by several commands --------------------------------------

def _scenario(args):
    sc = load_scenario(args.scenario)
    over = {}
    if args.seed is not None:
        over["seed"] = args.seed
    if args.m is not None:
        over["m"] = args.m
    if over:
        from dataclasses import replace
        sc = replace(sc, **over)
    return sc


def _opf_rows(sol: opf.OpfSolution, m: int):
    d = sol.config.dist
    s = sol.strategy
    c = d.c_lo + (d.c_hi - d.c_lo) * np.arange(m) / (m - 1)
    beta = s.beta(c)
    xi = np.linspace(s.xi_lo, s.xi_hi, m)
    V = sol.prize(xi)
    p = np.array([opf.win_prob(sol.config, s, x) for x in xi])
    return c, beta, xi, V, p


def _solve_opf_all(sc, out: Path, m: int):
    summary = []
    solutions = {}
    for cfg in sc.configs():
        sol = opf.solve_opf(cfg)
        solutions[cfg.nu] = sol
        c, beta, xi, V, p = _opf_rows(sol, m)
        tag = nu_tag(cfg.nu)
        write_csv(out / f"opf_strategy_{tag}.csv", ["c", "beta_c"], zip(c, beta))
        write_csv(out / f"opf_prize_{tag}.csv", ["xi", "V_star", "p_xi"], zip(xi, V, p))
        write_csv(out / f"opf_samples_{tag}.csv", ["c", "beta_c", "xi", "V_star", "p_xi"],
                  zip(c, beta, xi, V, p))
        summary.append({
            "nu": cfg.nu, "n": cfg.n, "profit": sol.profit, "welfare": sol.welfare,
            "profit_realized": sol.profit_realized,
            "xi_lo": sol.strategy.xi_lo, "xi_hi": sol.strategy.xi_hi,
            "prize_linear_fit": opf.prize_linearity(sol),
        })
    return summary, solutions


def _optimize_all(sc, out: Path):
    rows, traj = [], []
    solutions = {}
    for cfg in sc.configs():
        try:
            sol = fixed_prize.optimize(cfg, sc.V0_lo, sc.V0_hi, sc.V0_step, sc.m)
        except fixed_prize.FixedPrizeError as exc:
            raise NumericalError(f"benchmark failed at nu={cfg.nu}, V0={exc.V0}: {exc}") from exc
        solutions[cfg.nu] = sol
        eq = sol.equilibrium
        rows.append((cfg.nu, sol.V0_star, sol.pi0_star, sol.welfare, fixed_prize.welfare_direct(eq),
                     eq.residual))
        traj.extend((cfg.nu, v, p) for v, p in sol.trajectory)
        write_csv(out / f"benchmark_equilibrium_{nu_tag(cfg.nu)}.csv", ["c_i", "xi_i"], zip(eq.c, eq.xi))
    write_csv(out / "benchmark_trajectory.csv", ["nu", "V0", "profit"], traj)
    write_csv(out / "benchmark_summary.csv",
              ["nu", "V0_star", "pi0_star", "welfare", "welfare_direct", "residual"], rows)
    return solutions


# -- commands ------------------------------------------------------------------

def cmd_solve_opf(args) -> int:
    sc = _scenario(args)
    out = Path(args.out)
    summary, _ = _solve_opf_all(sc, out, sc.m)
    write_json(out / "opf_summary.json", {"scenario": sc.raw, "results": summary})
    for row in summary:
        print(f"nu={fmt(row['nu'])} n={row['n']} profit={fmt(row['profit'])} "
              f"welfare={fmt(row['welfare'])}")
    return EXIT_OK


def cmd_optimize_benchmark(args) -> int:
    sc = _scenario(args)
    out = Path(args.out)
    sols = _optimize_all(sc, out)
    write_json(out / "benchmark_summary.json", {
        "scenario": sc.raw,
        "results": [{"nu": nu, "V0_star": s.V0_star, "pi0_star": s.pi0_star, "welfare": s.welfare,
                     "welfare_direct": fixed_prize.welfare_direct(s.equilibrium)}
                    for nu, s in sols.items()],
    })
    for nu, s in sols.items():
        print(f"nu={fmt(nu)} V0*={fmt(s.V0_star)} pi0*={fmt(s.pi0_star)} welfare={fmt(s.welfare)}")
    return EXIT_OK


def strategy_uplift(sol: opf.OpfSolution, bench: fixed_prize.FixedPrizeSolution) -> dict:
    """Percentage by which OPF contributions exceed the benchmark at the cheapest and dearest grid types."""
    eq = bench.equilibrium
    c = eq.c
    opf_beta = sol.strategy.beta(c)
    ratio = opf_beta / eq.xi - 1.0
    return {"c_lo": float(c[0]), "uplift_pct_c_lo": 100 * float(ratio[0]),
            "c_last": float(c[-1]), "uplift_pct_c_hi": 100 * float(ratio[-1])}


def cmd_compare(args) -> int:
    sc = _scenario(args)
    out = Path(args.out)
    if sc.n != 2:
        raise ValidationError("compare needs a two-player scenario (the benchmark is two-player only)")
    _, opf_sols = _solve_opf_all(sc, out, sc.m)
    bench = _optimize_all(sc, out)
    rows = [ComparisonRow.build(nu, bench[nu], opf_sols[nu]) for nu in sc.nus]
    write_csv(out / "comparison.csv", ComparisonRow.FIELDS, (r.values() for r in rows))
    strat_rows, prize_rows = [], []
    uplift = []
    for nu in sc.nus:
        b, s = bench[nu], opf_sols[nu]
        eq = b.equilibrium
        strat_rows.extend(zip([nu] * len(eq.c), eq.c, s.strategy.beta(eq.c), eq.xi))
        xi = np.linspace(s.strategy.xi_lo, s.strategy.xi_hi, sc.m)
        prize_rows.extend(zip([nu] * sc.m, xi, s.prize(xi), [b.V0_star] * sc.m))
        uplift.append({"nu": nu, **strategy_uplift(s, b)})
    write_csv(out / "strategy_comparison.csv", ["nu", "c", "beta_opf", "beta_benchmark"], strat_rows)
    write_csv(out / "prize_comparison.csv", ["nu", "xi", "V_star", "V0_star"], prize_rows)
    write_csv(out / "profit_comparison.csv", ["nu", "profit_opf", "profit_benchmark"],
              ((r.nu, r.profit_opf, r.profit_benchmark) for r in rows))
    write_csv(out / "welfare_comparison.csv", ["nu", "welfare_opf", "welfare_benchmark"],
              ((r.nu, r.welfare_opf, r.welfare_benchmark) for r in rows))
    write_json(out / "comparison.json", {"rows": [dict(zip(ComparisonRow.FIELDS, r.values())) for r in rows],
                                         "strategy_uplift": uplift})
    print(",".join(ComparisonRow.FIELDS))
    for r in rows:
        print(",".join(fmt(v) for v in r.values()))
    return EXIT_OK


def run_checks(cfg, trials: int, m: int, strategy_scale: float = 1.0) -> list:
    """The verification suite for one configuration; each entry is a dict with ``name`` and ``passed``."""
    if not (np.isfinite(strategy_scale) and strategy_scale > 0):
        raise ValidationError(
            f"strategy scale {strategy_scale} gives a zero or invalid strategy, which is not an equilibrium")
    checks = []
    sol = opf.solve_opf(cfg)
    d = cfg.dist
    base = sol.strategy.vectorized()

    def played(c):
        return strategy_scale * base(c)

    simulate.validate_strategy(cfg, played)
    probes = np.linspace(d.c_lo, d.c_hi, PROBE_TYPES)
    s = sol.strategy

    # best response, OPF
    grid = np.linspace(s.xi_lo, s.xi_hi, DEVIATION_POINTS)
    own = played(probes)
    inside = sol.prize.contains(own)
    if not np.all(inside):
        checks.append({"name": "best_response_opf", "passed": False,
                       "detail": "strategy output leaves the prize support at "
                                 f"{int(np.sum(~inside))} of {PROBE_TYPES} probe types"})
        usable = probes[inside]
    else:
        usable = probes
    if usable.size:
        gaps = simulate.best_response_gaps(cfg, played, sol.prize, usable, grid, trials)
        if np.all(inside):
            checks.append({"name": "best_response_opf", "passed": bool(np.max(gaps) <= GAP_TOL),
                           "max_gap": float(np.max(gaps)), "tol": GAP_TOL})
        else:
            checks[-1]["max_gap_inside"] = float(np.max(gaps))

    # best response, fixed prize (two players only)
    if cfg.n == 2:
        fp = fixed_prize.optimize(cfg, m=m)
        eq = fp.equilibrium
        b0 = eq.strategy()
        fgrid = np.linspace(eq.xi.min(), eq.xi.max(), DEVIATION_POINTS)
        fgaps = simulate.best_response_gaps(cfg, b0, PrizeSchedule.constant(eq.V0), probes, fgrid, trials)
        checks.append({"name": "best_response_benchmark", "passed": bool(np.max(fgaps) <= GAP_TOL),
                       "max_gap": float(np.max(fgaps)), "tol": GAP_TOL, "V0": eq.V0})
        # discretization convergence m -> 2m
        eq2 = fixed_prize.solve_equilibrium(cfg, eq.V0, 2 * m)
        diff = float(np.max(np.abs(eq2.xi[::2] - eq.xi)))
        checks.append({"name": "discretization_convergence", "passed": diff < 1e-3,
                       "max_abs_diff": diff, "m": m})
        checks.append({"name": "monotone_benchmark", "passed": bool(np.all(np.diff(eq.xi) < 0))})

    # SIR from the empirical utility curve
    curve = simulate.empirical_utility_curve(cfg, played, sol.prize, probes[inside] if not np.all(inside) else probes,
                                             trials)
    interior = [(c, u, se) for c, u, se in curve if c < d.c_hi]
    top = [(c, u, se) for c, u, se in curve if c >= d.c_hi]
    sir = all(u > 0 for _, u, _ in interior) and all(abs(u) <= 3 * se for _, u, se in top)
    checks.append({"name": "sir", "passed": bool(sir),
                   "curve": [{"c": c, "utility": u, "std_err": se} for c, u, se in curve]})

    # n-agnosticism of the numeric strategy
    c_probe = np.linspace(d.c_lo, d.c_hi, 50)
    ref = opf.opf_strategy(cfg.replace(n=2), method="rootfind").beta(c_probe)
    dev = max(float(np.max(np.abs(opf.opf_strategy(cfg.replace(n=k), method="rootfind").beta(c_probe) - ref)))
              for k in (5, 10))
    checks.append({"name": "n_agnostic", "passed": dev <= 1e-10, "max_abs_diff": dev})
    checks.append({"name": "monotone_opf", "passed": bool(np.all(np.diff(ref) < 0))})

    # direct utility p V* - h c against the envelope integral
    try:
        for c in probes:
            opf.expected_utility(cfg, s, float(c), rel_tol=1e-3)
        checks.append({"name": "utility_consistency", "passed": True})
    except opf.ConsistencyError as exc:
        checks.append({"name": "utility_consistency", "passed": False, "detail": str(exc)})

    # accounting identity of the simulator
    rep = simulate.run(cfg, played, sol.prize, trials) if np.all(inside) else None
    if rep is not None:
        checks.append({"name": "accounting_identity", "passed": rep.accounting_gap() <= 1e-12,
                       "gap": rep.accounting_gap()})
    return checks


def cmd_verify(args) -> int:
    sc = _scenario(args)
    out = Path(args.out)
    trials = args.trials or DEFAULT_TRIALS
    report = []
    ok = True
    for cfg in sc.configs():
        checks = run_checks(cfg, trials, sc.m, args.strategy_scale)
        for c in checks:
            ok &= bool(c["passed"])
            print(f"nu={fmt(cfg.nu)} {c['name']}: {'PASS' if c['passed'] else 'FAIL'}")
        report.append({"nu": cfg.nu, "checks": checks})
    write_json(out / "verify_report.json", {"passed": ok, "trials": trials, "results": report})
    return EXIT_OK if ok else EXIT_NUMERICAL


def cmd_simulate(args) -> int:
    sc = _scenario(args)
    out = Path(args.out)
    trials = args.trials or DEFAULT_TRIALS
    results = []
    for cfg in sc.configs():
        if args.mechanism == "opf":
            sol = opf.solve_opf(cfg)
            strategy, prize = sol.strategy.vectorized(), sol.prize
            expected = {"profit": sol.profit, "profit_realized": sol.profit_realized,
                        "welfare": sol.welfare}
        else:
            fp = fixed_prize.optimize(cfg, sc.V0_lo, sc.V0_hi, sc.V0_step, sc.m)
            strategy, prize = fp.equilibrium.strategy(), PrizeSchedule.constant(fp.V0_star)
            expected = {"profit": fp.pi0_star, "welfare": fp.welfare,
                        "welfare_direct": fixed_prize.welfare_direct(fp.equilibrium)}
        rep = simulate.run(cfg, strategy, prize, trials)
        d = cfg.dist
        curve = simulate.empirical_utility_curve(cfg, strategy, prize, np.linspace(d.c_lo, d.c_hi, 21), trials)
        write_csv(out / f"utility_curve_{args.mechanism}_{nu_tag(cfg.nu)}.csv",
                  ["c", "utility", "std_err"], curve)
        body = rep.to_dict()
        body.pop("per_type_utility")
        results.append({"nu": cfg.nu, "mechanism": args.mechanism, "report": body, "expected": expected})
        print(f"nu={fmt(cfg.nu)} profit={fmt(rep.mean_profit)}±{fmt(rep.std_err['profit'])} "
              f"welfare={fmt(rep.mean_welfare)}±{fmt(rep.std_err['welfare'])}")
    write_json(out / f"simulation_{args.mechanism}.json", {"trials": trials, "seed": sc.seed, "results": results})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tullock", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", default="reference",
                       help="scenario JSON file, or a built-in name: reference, population2, fey")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        p.add_argument("--m", type=int, default=None, help="quadrature points for the benchmark")
        p.add_argument("--trials", type=int, default=None, help="Monte-Carlo trials")
        return p

    common(sub.add_parser("solve-opf", help="solve the optimal prize-function mechanism")) \
        .set_defaults(func=cmd_solve_opf)
    common(sub.add_parser("optimize-benchmark", help="optimize the fixed-prize benchmark")) \
        .set_defaults(func=cmd_optimize_benchmark)
    common(sub.add_parser("compare", help="compare both mechanisms and write comparison tables")) \
        .set_defaults(func=cmd_compare)
    p = common(sub.add_parser("verify", help="run the equilibrium verification suite"))
    p.add_argument("--strategy-scale", type=float, default=1.0,
                   help="multiply the OPF strategy before testing (negative control)")
    p.set_defaults(func=cmd_verify)
    p = common(sub.add_parser("simulate", help="Monte-Carlo simulation of a mechanism"))
    p.add_argument("--mechanism", choices=("opf", "benchmark"), default="opf")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    log.debug("kernel backend: %s", BACKEND)
    if args.m is not None and args.m < 2:
        print("error: --m must be >= 2", file=sys.stderr)
        return EXIT_VALIDATION
    if args.trials is not None and args.trials < 1:
        print("error: --trials must be >= 1", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except TullockError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
