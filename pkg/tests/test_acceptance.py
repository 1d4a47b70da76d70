"""Acceptance suite: the eleven certification criteria, one test per line.

Running pytest -v prints one PASS/FAIL row per criterion.  Tolerances and
runtime budgets are pinned here and nowhere else; every expected value is
either a closed-form constant of the model domains or cross-checked inside
the library against an independent route.
"""

import json
import time

import numpy as np
import pytest

from observalab import cli
from observalab.config import TOLERANCES
from observalab.control import control_pipeline, random_problem
from observalab.geometry import (boundary_quadrature, disk, interior_quadrature,
                                 interval, rectangle)
from observalab.gram import assemble_exponential_gram, lower_bound_constant
from observalab.modes import enumerate_modes
from observalab.operators import (antisymmetry_suite, estimate_trace_constant,
                                  quasi_orthogonality_check, rellich_suite)
from observalab.reports import strip_timestamp
from observalab.visco import (build_mode_solutions, closeness_spectrum,
                              exponential_kernel, fit_gamma,
                              memory_riesz_certificate, paley_wiener_q,
                              proof_guided_exclusion, shifted_system_bounds,
                              solve_visco_mode, visco_time_grid, zero_kernel)
from observalab.wave import (boundary_flux, coeffs_to_a, observability_experiment,
                             random_state)


def _geometry(kind, N):
    dom = {"interval": lambda: interval(np.pi),
           "rectangle": lambda: rectangle(np.pi, np.pi),
           "disk": lambda: disk(1.0)}[kind]()
    table = enumerate_modes(dom, N)
    lam_max = float(np.max(table.lambdas))
    brule = boundary_quadrature(dom, lam_max=lam_max)
    irule = interior_quadrature(dom, lam_max=lam_max)
    return dom, table, brule, irule


@pytest.fixture(scope="module")
def geometries():
    return {kind: _geometry(kind, 20)
            for kind in ("interval", "rectangle", "disk")}


def test_criterion_01_rellich_identities_three_geometries(geometries):
    start = time.monotonic()
    for kind, (dom, table, brule, irule) in geometries.items():
        tol = 1e-5 if kind == "disk" else 1e-6
        reports = rellich_suite(table, irule, brule, max_index=20, tol=tol)
        assert len(reports) == (2 * 20) ** 2, kind
        bad = [r for r in reports if not r.passed]
        assert not bad, f"{kind}: {len(bad)} residuals above {tol:g}, " \
                        f"worst {max(r.abs_error for r in bad):.3e}"
        # diagonal rows must sit at +2 / -2 depending on the index signs
        for r in reports:
            j, k = r.label.split("_")[1:]
            if abs(int(j)) == abs(int(k)):
                want = 2.0 if int(j) * int(k) > 0 else -2.0
                assert abs(r.lhs - want) <= tol, r.label
    assert time.monotonic() - start <= 60.0


def test_criterion_02_quasi_orthogonality_and_antisymmetry(geometries):
    for kind, (dom, table, brule, irule) in geometries.items():
        rng = np.random.default_rng(101)
        for i in range(200):
            u = rng.normal(size=2 * table.N) + 1j * rng.normal(size=2 * table.N)
            rep = quasi_orthogonality_check(table, irule, u, slack=1e-8)
            assert rep.passed, f"{kind} draw {i}: {rep.lhs} > {rep.rhs} + 1e-8"
        anti = antisymmetry_suite(table, irule, max_index=15, tol=1e-8)
        bad = [r for r in anti if not r.passed]
        assert not bad, f"{kind}: antisymmetry violated at {bad[0].label}"


def test_criterion_03_lower_riesz_bound_interval_and_rectangle():
    start = time.monotonic()
    dom_i = interval(np.pi)
    T_i = 2.0 * np.pi
    mins = []
    for N in (5, 10, 20, 40):
        table = enumerate_modes(dom_i, N)
        brule = boundary_quadrature(dom_i, lam_max=float(table.lambdas[-1]))
        spec = assemble_exponential_gram(table, brule, T_i).spectrum()
        assert spec["lambda_min"] >= 4.0 - 1e-6, f"interval N={N}"
        mins.append(spec["lambda_min"])
    assert all(a >= b - 1e-12 for a, b in zip(mins, mins[1:])), \
        "interval lambda_min must be non-increasing in N"

    dom_r = rectangle(np.pi, np.pi)
    T_r = 2.5 * np.sqrt(2.0) * np.pi
    c_r = 2.0 * (T_r - np.sqrt(2.0) * np.pi) / (np.pi / 2.0)
    mins = []
    for N in (5, 10, 20):
        table = enumerate_modes(dom_r, N)
        brule = boundary_quadrature(dom_r, lam_max=float(np.max(table.lambdas)))
        spec = assemble_exponential_gram(table, brule, T_r).spectrum()
        assert spec["lambda_min"] >= c_r - 1e-6, f"rectangle N={N}"
        mins.append(spec["lambda_min"])
    assert all(a >= b - 1e-12 for a, b in zip(mins, mins[1:])), \
        "rectangle lambda_min must be non-increasing in N"
    assert time.monotonic() - start <= 300.0


def test_criterion_04_observability_monte_carlo():
    configs = [("interval", interval(np.pi), 10, 2.0 * np.pi),
               ("rectangle", rectangle(np.pi, np.pi), 8,
                2.5 * np.sqrt(2.0) * np.pi),
               ("disk", disk(1.0), 8, 5.0)]
    rng = np.random.default_rng(2024)
    for kind, dom, N, T in configs:
        table = enumerate_modes(dom, N)
        brule = boundary_quadrature(dom, lam_max=float(np.max(table.lambdas)))
        exp = observability_experiment(table, brule, T, 200, rng,
                                       margin_tol=1e-6)
        assert not exp["failures"], f"{kind}: ratio below the certified constant"
        assert exp["min_ratio"] >= exp["c_lower"] - 1e-6, kind
        assert abs(exp["adversarial_ratio"] - exp["lambda_min"]) <= 1e-6, \
            f"{kind}: minimizing eigenvector does not attain lambda_min"


def test_criterion_05_flux_norm_equals_gram_form(geometries):
    for kind, (dom, table, brule, irule) in geometries.items():
        T = 2.5 * 2.0 * dom.R
        gram = assemble_exponential_gram(table, brule, T)
        rng = np.random.default_rng(55)
        for _ in range(5):
            state = random_state(table.N, rng)
            a = coeffs_to_a(state)
            quad = gram.quad_form(a)
            direct = boundary_flux(table, brule, state, T).norm_sq
            assert abs(direct - quad) <= 1e-6 * quad, kind


def test_criterion_06_memory_solver_reduction_and_order():
    T = 3.0
    # memoryless reduction: marched solution against the exact rotation
    for lam in (5.0, 20.0, 80.0):
        sol = solve_visco_mode(lam, zero_kernel(), T, method="march")
        ref = np.exp((0.0 + 1j * lam) * (sol.tgrid - T))
        err = float(np.max(np.abs(sol.samples - ref)))
        assert err <= 10.0 * sol.h ** 2 * T * lam ** 2
        assert sol.terminal_residual <= 1e-8
        assert sol.terminal_slope_residual <= 1e-8 * lam
    # empirical order against the closed form, evaluated on the march grid
    lam, kernel = 10.0, exponential_kernel(0.5, 1.0)
    errs = []
    for h in (T / 512, T / 1024):
        sol = solve_visco_mode(lam, kernel, T, h=h, method="march")
        ref = solve_visco_mode(lam, kernel, T, tgrid=sol.tgrid, method="exact")
        errs.append(float(np.max(np.abs(sol.samples - ref.samples))))
    order = np.log2(errs[0] / errs[1])
    assert 1.8 <= order <= 2.2, f"empirical order {order:.3f}"


def test_criterion_07_memory_distance_decay_law():
    # lam in [5, 80] on the interval; decay of the per-mode distances
    T = 2.5 * np.pi
    lams = np.arange(5.0, 81.0)
    sols = build_mode_solutions(lams, exponential_kernel(0.5, 1.0), T)
    gamma, _ = fit_gamma(sols)
    report = closeness_spectrum(sols, gamma)
    assert report.slope is not None
    assert report.slope <= -1.8, f"slope {report.slope:.3f}"
    assert report.r_squared >= 0.9, f"R^2 {report.r_squared:.3f}"


def test_criterion_08_perturbation_section_below_one():
    dom = interval(np.pi)
    N = 16
    table = enumerate_modes(dom, N)
    brule = boundary_quadrature(dom, lam_max=float(table.lambdas[-1]))
    T = 2.5 * np.pi
    kernel = exponential_kernel(0.5, 1.0)
    tgrid = visco_time_grid(T, float(table.lambdas[-1]))
    sols = build_mode_solutions(table.lambdas, kernel, T, tgrid=tgrid)
    gamma, _ = fit_gamma(sols)
    report = closeness_spectrum(sols, gamma)
    c_alpha = estimate_trace_constant(table, brule, 200,
                                      np.random.default_rng(3))["sup"]
    c_gamma, _ = shifted_system_bounds(table, brule, gamma, tgrid)
    k, excluded = proof_guided_exclusion(c_alpha, report.c1_max, c_gamma,
                                         table.lambdas)
    q_hat = paley_wiener_q(table, brule, sols, gamma, excluded=excluded)
    assert q_hat < 1.0, f"q at the proof-guided cutoff k={k} is {q_hat:.3f}"

    # a memoryless system is its own reference: q must vanish identically
    zero_sols = build_mode_solutions(table.lambdas, zero_kernel(), T,
                                     tgrid=tgrid)
    assert paley_wiener_q(table, brule, zero_sols, 0.0) == 0.0

    # growing the excluded set never increases the section norm
    qs = [paley_wiener_q(table, brule, sols, gamma,
                         excluded=[s * j for j in range(1, width + 1)
                                   for s in (1, -1)])
          for width in (1, 4, 8, 12)]
    assert all(b <= a + 1e-12 for a, b in zip(qs, qs[1:])), qs


def test_criterion_09_memory_certificate_default_kernels():
    dom = interval(np.pi)
    table = enumerate_modes(dom, 20)
    brule = boundary_quadrature(dom, lam_max=float(table.lambdas[-1]))
    T = 2.5 * np.pi
    for m0 in (0.2, 0.5):
        cert = memory_riesz_certificate(table, brule,
                                        exponential_kernel(m0, 1.0), T)
        assert cert["lambda_min"] > 0.0
        assert cert["lambda_min"] >= 1e-3 * cert["lambda_max"], \
            f"margin violated for M0={m0}"
        assert cert["passed"]
    zero_cert = memory_riesz_certificate(table, brule, zero_kernel(), T)
    assert zero_cert["reduction_rel_diff"] <= 1e-6


def test_criterion_10_minimum_norm_steering():
    start = time.monotonic()
    dom = interval(np.pi)
    table = enumerate_modes(dom, 10)
    brule = boundary_quadrature(dom, lam_max=float(table.lambdas[-1]))
    problem = random_problem(10, 2.0 * np.pi, np.random.default_rng(42))
    rep = control_pipeline(table, brule, problem)
    assert rep["simulation"]["rel_error"] <= 1e-3
    assert rep["control"].norm_sq <= rep["rhs_norm_sq"] / rep["c_lower"] + 1e-12
    assert rep["passed"]
    assert time.monotonic() - start <= 60.0


def test_criterion_11_seeded_runs_byte_identical(tmp_path):
    artifacts = ("spectrum.csv", "identities.csv", "riesz.csv",
                 "riesz_summary.json", "observe.csv", "observe_summary.json",
                 "visco_certificate.json", "control_result.json")
    outputs = {}
    for tag in ("a", "b"):
        out = tmp_path / f"run_{tag}"
        cfg = tmp_path / f"config_{tag}.json"
        cfg.write_text(json.dumps({
            "domain": {"kind": "interval", "length": np.pi},
            "N": 6,
            "T_factors": [0.9, 2.0],
            "draws": 10,
            "seed": 7,
            "out_dir": str(out),
            "cache_path": str(tmp_path / f"cache_{tag}.json"),
        }))
        for cmd in ("spectrum", "verify-identities", "riesz", "observe",
                    "visco", "control"):
            assert cli.main([cmd, "--config", str(cfg)]) == 0, (tag, cmd)
        outputs[tag] = {name: strip_timestamp((out / name).read_text())
                        for name in artifacts}
    for name in artifacts:
        assert outputs["a"][name] == outputs["b"][name], name
