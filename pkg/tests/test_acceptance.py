"""Acceptance criteria, one test each, printing a single PASS/FAIL line."""
import json
import math
import time

import jsonschema
import numpy as np
import pytest

from binodal.cli import SCHEMA_PATH, main
from binodal.jumpset import jump_expansion, jump_pair, jump_set_curve, material_jump_residuals, w_point_pcx_threshold
from binodal.material import MaterialParams, energy, piola
from binodal.nucleus import (
    eps_inf_asymptotic,
    nondegeneracy,
    qw_gap,
    qw_hydrostatic,
    qw_hydrostatic_asymptotic,
    solve_nucleus,
)
from binodal.pcx import pcx_bound_hydro_asymptotic, pcx_bound_hydro_numeric
from binodal.secondary import asymptotic_gap, material_secondary_residuals, secondary_curve

from conftest import random_admissible

pytestmark = pytest.mark.acceptance


@pytest.fixture
def report(capsys):
    def _report(number, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, detail

    return _report


def test_1_w_point_threshold(report):
    t0 = time.perf_counter()
    t = w_point_pcx_threshold(MaterialParams(0.0))
    dt = time.perf_counter() - t0
    report(1, abs(t - 6.35888) <= 2e-3 and dt < 10.0, f"threshold={t:.6f} (target 6.35888 +- 2e-3) in {dt:.2f}s")


def test_2_nucleus_asymptotics(report):
    p = MaterialParams(3.0)
    t0 = time.perf_counter()
    e = solve_nucleus(p).eps_inf
    dt = time.perf_counter() - t0
    rel = abs(e - eps_inf_asymptotic(p)) / e
    report(2, 5e-4 <= rel <= 3e-3 and dt < 1.0, f"relative gap={rel:.4e} in [5e-4, 3e-3], solve {dt:.3f}s")


def test_3_liquid_limit(report):
    p = MaterialParams(0.0)
    jump = max(max(abs(q.eps0 * q.eps_plus - 3.0), abs(q.eps0 * q.eps_minus - 1.0))
               for q in jump_set_curve(p, (0.3, 4.0), 400))
    sol = solve_nucleus(p)
    e_err = abs(sol.eps_inf - 1.0)
    nd_err = abs(nondegeneracy(p, sol) - 1.0)
    qw = qw_hydrostatic(p, sol)
    inside = (qw.eps > 1.0) & (qw.eps <= math.sqrt(3.0) + 1e-12)
    qw_err = float(np.max(np.abs(qw.qw[inside])))
    ok = jump <= 1e-10 and e_err <= 1e-9 and nd_err <= 1e-6 and qw_err <= 1e-10 and inside.sum() > 400
    report(3, ok, f"hyperbola {jump:.1e}, eps_inf {e_err:.1e}, nondegeneracy {nd_err:.1e}, QW {qw_err:.1e}")


def test_4_bound_ordering(report):
    parts, ok = [], True
    for mu in (0.25, 0.5, 1.0):
        p = MaterialParams(mu)
        b = pcx_bound_hydro_numeric(p)
        e = solve_nucleus(p).eps_inf
        s = secondary_curve(p).hydrostatic_intersection
        ok &= b < e < s
        parts.append(f"mu={mu}: {b:.7f} < {e:.7f} < {s:.7f}")
    pa = pcx_bound_hydro_asymptotic(MaterialParams(1.0))
    ea = eps_inf_asymptotic(MaterialParams(1.0))
    ok &= abs(pa - 1.03349) <= 1e-5 and abs(ea - 1.03433) <= 1e-5 and pa < ea
    parts.append(f"asymptotic {pa:.6f} < {ea:.6f}")
    report(4, ok, "; ".join(parts))


def _jump_error(mu):
    p = MaterialParams(mu)
    worst = 0.0
    for e in np.linspace(1.2, 1.7, 51):
        q = jump_pair(e, p)
        a, b = jump_expansion(e, p)
        worst = max(worst, abs(q.eps_plus - a), abs(q.eps_minus - b))
    return worst


def test_5_asymptotic_orders(report):
    t0 = time.perf_counter()
    errors = {
        "jumpset": lambda mu: _jump_error(mu),
        "secondary": lambda mu: asymptotic_gap(secondary_curve(MaterialParams(mu)).full, MaterialParams(mu)),
        "eps_inf": lambda mu: abs(solve_nucleus(MaterialParams(mu)).eps_inf - eps_inf_asymptotic(MaterialParams(mu))),
        "pcx_bound": lambda mu: abs(pcx_bound_hydro_numeric(MaterialParams(mu)) - pcx_bound_hydro_asymptotic(MaterialParams(mu))),
        "qw": lambda mu: qw_gap(qw_hydrostatic(MaterialParams(mu), solve_nucleus(MaterialParams(mu))),
                                qw_hydrostatic_asymptotic(MaterialParams(mu))),
    }
    ratios = {k: f(0.2) / f(0.1) for k, f in errors.items()}
    dt = time.perf_counter() - t0
    ok = all(3.5 <= r <= 4.5 for r in ratios.values()) and dt < 30.0
    report(5, ok, ", ".join(f"{k} {r:.3f}" for k, r in ratios.items()) + f" in {dt:.1f}s")


def test_6_residual_suite(report):
    worst_pair = worst_sec = 0.0
    n_pairs = n_sec = 0
    for mu in (0.1, 1.0, 5.0):
        p = MaterialParams(mu)
        for q in jump_set_curve(p, (math.sqrt(mu) / 2 * 1.001, 4.0), 400):
            worst_pair = max(worst_pair, *material_jump_residuals(q, p))
            n_pairs += 1
        for q in secondary_curve(p, 400).full:
            worst_sec = max(worst_sec, *material_secondary_residuals(q, p).values())
            n_sec += 1
    ok = worst_pair <= 1e-9 and worst_sec <= 1e-9
    report(6, ok, f"{n_pairs} jump pairs max {worst_pair:.1e}; {n_sec} secondary points max {worst_sec:.1e}")


def test_7_gradient_check(report, rng):
    p = MaterialParams(1.0)
    h = 1e-6
    worst = 0.0
    for F in random_admissible(rng, 100, (0.5, 4.0)):
        fd = np.zeros((2, 2))
        for i in range(2):
            for j in range(2):
                E = np.zeros((2, 2))
                E[i, j] = h
                fd[i, j] = (energy(F + E, p) - energy(F - E, p)) / (2 * h)
        P = piola(F, p)
        worst = max(worst, float(np.max(np.abs(fd - P)) / max(np.max(np.abs(P)), 1.0)))
    report(7, worst <= 1e-6, f"max relative deviation {worst:.1e} over 100 matrices")


FIGURE_RUNS = [
    ["jumpset"],
    ["secondary", "--mu", "1"],
    ["pcx", "--mu-sweep", "0.25:1:0.25"],
    ["nucleus", "--mu-sweep", "0.25:3:0.25"],
    ["binodal", "--mu", "1"],
    ["qw", "--mu", "0.5"],
]


def test_8_figure_data(report, tmp_path):
    schema = json.loads(SCHEMA_PATH.read_text())
    t0 = time.perf_counter()
    codes, identical, valid = [], True, True
    for k, argv in enumerate(FIGURE_RUNS):
        outs = [tmp_path / f"{k}{tag}" for tag in "ab"]
        for out in outs:
            codes.append(main(argv + ["--out", str(out)]))
        trees = [{str(f.relative_to(o)): f.read_bytes() for f in sorted(o.rglob("*")) if f.is_file()} for o in outs]
        identical &= trees[0] == trees[1]
        try:
            jsonschema.validate(json.loads((outs[0] / "summary.json").read_text()), schema)
        except jsonschema.ValidationError:
            valid = False
    dt = time.perf_counter() - t0
    ok = all(c == 0 for c in codes) and identical and valid and dt < 120.0
    report(8, ok, f"exit codes {codes}, deterministic={identical}, schema-valid={valid}, {dt:.1f}s (two passes)")
