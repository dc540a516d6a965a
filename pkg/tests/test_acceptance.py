"""Acceptance criteria, one test each, every one at its stated tolerance.

Each test prints (and records for the end-of-run summary) a single
``criterion N: PASS|FAIL`` line with the worst observed deviation. Run
standalone with ``python3 tests/test_acceptance.py``.
"""
import itertools
import sys

import numpy as np
import pytest

import oracles as orc
from conftest import ACCEPTANCE_LINES, benchmark_solution, opf_solution, reference_scenario
from tullock import ContestConfig, PrizeSchedule, fixed_prize as fp, opf, power_technology, simulate, uniform
from tullock.numerics import SolverSettings

TRIALS = 10 ** 6
PROBES = np.linspace(1.0, 2.0, 10)


def report(number, title, failures, detail):
    status = "PASS" if not failures else "FAIL"
    line = f"criterion {number:>2}: {status}  {title}; {detail}"
    if failures:
        line += "; failing: " + "; ".join(failures)
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert not failures, line


def test_criterion_01_opf_profit_row():
    failures, worst = [], 0.0
    for nu, published in zip(orc.NU_GRID, orc.OPF_PROFIT_ROW):
        got = opf_solution(nu).profit
        closed = (orc.LOG3 / 4 + 1 / 36) * nu * nu
        dev = max(abs(got - closed), abs(got - published))
        worst = max(worst, dev)
        if dev > 1e-3:
            failures.append(f"nu={nu:g} profit {got:.6f}")
    report(1, "OPF profit row", failures, f"max abs deviation {worst:.2e} (tol 1e-3)")


def test_criterion_02_opf_welfare_row():
    failures, worst = [], 0.0
    for nu, published in zip(orc.NU_GRID, orc.OPF_WELFARE_ROW):
        got = opf_solution(nu).welfare
        closed = (orc.LOG3 / 8 - 1 / 12) * nu * nu
        dev = max(abs(got - closed), abs(got - published))
        worst = max(worst, dev)
        if dev > 1e-3:
            failures.append(f"nu={nu:g} welfare {got:.6f}")
    report(2, "OPF welfare row", failures, f"max abs deviation {worst:.2e} (tol 1e-3)")


def test_criterion_03_generic_paths_match_closed_forms():
    failures, worst_b, worst_v = [], 0.0, 0.0
    c = np.linspace(1.0, 2.0, 50)
    for nu in orc.NU_GRID:
        cfg = reference_scenario().config(nu)
        s = opf.opf_strategy(cfg, method="rootfind")
        db = float(np.max(np.abs(s.beta(c) - orc.beta_pop1(c, nu))))
        xi = np.linspace(s.xi_lo, s.xi_hi, 20)
        dv = max(abs(opf.opf_prize(cfg, s, x) - orc.prize_pop1(x, nu)) for x in xi)
        worst_b, worst_v = max(worst_b, db), max(worst_v, dv)
        if db > 1e-6:
            failures.append(f"nu={nu:g} beta dev {db:.2e}")
        if dv > 1e-4:
            failures.append(f"nu={nu:g} prize dev {dv:.2e}")
    report(3, "root-found strategy and numeric prize vs closed forms", failures,
           f"beta max dev {worst_b:.2e} (tol 1e-6), prize max dev {worst_v:.2e} (tol 1e-4)")


def test_criterion_04_benchmark_optimizer():
    failures, worst_p, worst_c = [], 0.0, 0.0
    for nu, published in zip(orc.NU_GRID, orc.BENCH_PROFIT_ROW):
        sol = benchmark_solution(nu)
        dp = abs(sol.pi0_star - published)
        dc = abs(sol.V0_star - sol.pi0_star)
        worst_p, worst_c = max(worst_p, dp), max(worst_c, dc)
        if dp > 5e-3:
            failures.append(f"nu={nu:g} pi0*={sol.pi0_star:.4f}")
        if dc > 0.01:
            failures.append(f"nu={nu:g} |V0*-pi0*|={dc:.4f}")
    report(4, "benchmark optimal profit and prize/profit coincidence", failures,
           f"max |pi0*-row| {worst_p:.2e} (tol 5e-3), max |V0*-pi0*| {worst_c:.2e} (tol 1e-2)")


def test_criterion_05_benchmark_welfare():
    failures, worst = [], 0.0
    for nu, published in zip(orc.NU_GRID, orc.BENCH_WELFARE_ROW):
        got = benchmark_solution(nu).welfare
        dev = abs(got - published)
        worst = max(worst, dev)
        if dev > 2e-3:
            failures.append(f"nu={nu:g} welfare {got:.5f}")
    report(5, "benchmark welfare row", failures, f"max abs deviation {worst:.2e} (tol 2e-3)")


def test_criterion_06_ratios():
    failures, worst_p, worst_w = [], 0.0, 0.0
    for nu, pr, wr in zip(orc.NU_GRID, orc.PROFIT_RATIO_ROW, orc.WELFARE_RATIO_ROW):
        bench, sol = benchmark_solution(nu), opf_solution(nu)
        p_ratio = sol.profit / bench.pi0_star
        w_ratio = sol.welfare / bench.welfare
        worst_p, worst_w = max(worst_p, abs(p_ratio - pr)), max(worst_w, abs(w_ratio - wr))
        if not 3.50 <= p_ratio <= 3.56 or abs(p_ratio - pr) > 0.05:
            failures.append(f"nu={nu:g} profit ratio {p_ratio:.4f} vs {pr}")
        if not 6.9 <= w_ratio <= 9.4 or abs(w_ratio - wr) > 0.4:
            failures.append(f"nu={nu:g} welfare ratio {w_ratio:.4f} vs {wr}")
    report(6, "profit and welfare ratios", failures,
           f"max profit-ratio dev {worst_p:.3f} (tol 0.05), max welfare-ratio dev {worst_w:.3f} (tol 0.4)")


def test_criterion_07_equilibrium_properties():
    failures = []
    worst_opf = worst_bench = worst_n = worst_u = -np.inf
    c50 = np.linspace(1.0, 2.0, 50)
    for nu in orc.NU_GRID:
        sol = opf_solution(nu)
        cfg, s = sol.config, sol.strategy
        f = s.vectorized()
        # (a) best response, OPF then benchmark
        gaps = simulate.best_response_gaps(cfg, f, sol.prize, PROBES, np.linspace(s.xi_lo, s.xi_hi, 64), TRIALS)
        worst_opf = max(worst_opf, float(gaps.max()))
        eq = benchmark_solution(nu).equilibrium
        bgaps = simulate.best_response_gaps(cfg, eq.strategy(), PrizeSchedule.constant(eq.V0), PROBES,
                                            np.linspace(eq.xi.min(), eq.xi.max(), 64), TRIALS)
        worst_bench = max(worst_bench, float(bgaps.max()))
        if gaps.max() > 3e-3 or bgaps.max() > 3e-3:
            failures.append(f"nu={nu:g} (a) gaps {gaps.max():.2e}/{bgaps.max():.2e}")
        # (b) strict individual rationality
        curve = simulate.empirical_utility_curve(cfg, f, sol.prize, PROBES, TRIALS)
        inner_ok = all(u > 0 for c, u, _ in curve if c < 2.0)
        _, u_top, se_top = curve[-1]
        if not inner_ok or abs(u_top) > 3 * se_top + 1e-12:
            failures.append(f"nu={nu:g} (b) SIR")
        # (c) n-agnosticism on the numeric path
        ref = opf.opf_strategy(cfg.replace(n=2), method="rootfind").beta(c50)
        for n in (5, 10):
            d = float(np.max(np.abs(opf.opf_strategy(cfg.replace(n=n), method="rootfind").beta(c50) - ref)))
            worst_n = max(worst_n, d)
            if d > 1e-10:
                failures.append(f"nu={nu:g} (c) n={n} dev {d:.1e}")
        # (d) monotone strategies
        if not (np.all(np.diff(ref) < 0) and np.all(np.diff(eq.xi) < 0)):
            failures.append(f"nu={nu:g} (d) monotonicity")
        # (e) direct vs envelope utility
        for c in c50:
            xi = float(s.beta(c))
            direct = opf.win_prob(cfg, s, xi) * opf.opf_prize(cfg, s, xi) - xi * xi * c
            env = opf.envelope_utility(cfg, s, c)
            dev = abs(direct - env) / (1 + abs(env))
            worst_u = max(worst_u, dev)
            if dev > 1e-3:
                failures.append(f"nu={nu:g} (e) c={c:.3f}")
                break
    report(7, "equilibrium property suite", failures,
           f"max OPF gap {worst_opf:.1e}, max benchmark gap {worst_bench:.1e} (tol 3e-3), "
           f"n-dev {worst_n:.1e}, utility consistency {worst_u:.1e} (tol 1e-3)")


def test_criterion_08_discretization_and_fey():
    failures, worst = [], 0.0
    cfg = reference_scenario().config(1.0)
    for V0 in (benchmark_solution(1.0).V0_star, 1.0):
        a = fp.solve_equilibrium(cfg, V0, 100)
        b = fp.solve_equilibrium(cfg, V0, 200)
        d = float(np.max(np.abs(b.xi[::2] - a.xi)))
        worst = max(worst, d)
        if d > 1e-3:
            failures.append(f"V0={V0:g} m-doubling dev {d:.2e}")
    fey = ContestConfig(2, 1.0, uniform(0.01, 1.01), power_technology(1.0))
    eq = fp.solve_equilibrium(fey, 1.0, 100, settings=SolverSettings(residual_tol=1e-10))
    if eq.residual >= 1e-8:
        failures.append(f"Fey residual {eq.residual:.1e}")
    if not (np.all(np.diff(eq.xi) < 0) and np.all(np.diff(eq.xi, 2) > 0)):
        failures.append("Fey strategy not decreasing and convex")
    report(8, "discretization convergence and linear-technology replication", failures,
           f"m=100 vs 200 max dev {worst:.2e} (tol 1e-3), Fey residual {eq.residual:.1e} (tol 1e-8)")


def test_criterion_09_population_diversity():
    failures, worst = [], 0.0
    tech = power_technology(0.5)
    closed = {
        ("profit", "G"): lambda n, nu: (orc.LOG3 / 8 + 2 / 81) * n * nu * nu,
        ("profit", "F"): lambda n, nu: (orc.LOG3 / 8 + 1 / 72) * n * nu * nu,
        ("welfare", "G"): lambda n, nu: (orc.LOG3 / 16 - 1 / 36) * n * nu * nu,
        ("welfare", "F"): lambda n, nu: (orc.LOG3 / 16 - 1 / 24) * n * nu * nu,
    }
    pops = {"F": uniform(1.0, 2.0), "G": uniform(0.5, 2.5)}
    order_fail = set()
    for n, nu in itertools.product(range(2, 11), range(1, 6)):
        vals = {}
        for key, dist in pops.items():
            cfg = ContestConfig(n, float(nu), dist, tech)
            s = opf.opf_strategy(cfg)
            vals[("profit", key)] = opf.opf_profit(cfg, s)
            vals[("welfare", key)] = opf.opf_welfare(cfg, s)
        for k, v in vals.items():
            ref = closed[k](n, nu)
            rel = abs(v - ref) / abs(ref)
            worst = max(worst, rel)
            if rel > 1e-4:
                failures.append(f"{k[0]} {k[1]} n={n} nu={nu} rel dev {rel:.2e}")
        for metric in ("profit", "welfare"):
            if not vals[(metric, "G")] > vals[(metric, "F")]:
                order_fail.add(metric)
    failures = sorted(set(f.split(" n=")[0] for f in failures)) + [f"{m}: G not above F" for m in sorted(order_fail)]
    report(9, "population-diversity closed forms and ordering", failures, f"max rel deviation {worst:.2e} (tol 1e-4)")


def test_criterion_10_nu_scaling():
    p = np.array([opf_solution(nu).profit / nu ** 2 for nu in orc.NU_GRID])
    w = np.array([opf_solution(nu).welfare / nu ** 2 for nu in orc.NU_GRID])
    failures = []
    if np.ptp(p) > 1e-6:
        failures.append(f"profit/nu^2 spread {np.ptp(p):.1e}")
    if np.ptp(w) > 1e-6:
        failures.append(f"welfare/nu^2 spread {np.ptp(w):.1e}")
    report(10, "profit and welfare scale as nu^2", failures,
           f"spreads {np.ptp(p):.1e} and {np.ptp(w):.1e} (tol 1e-6)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
