"""Gram assembly, spectral bounds, and the sampled-trace path."""

import numpy as np
import pytest

from observalab.config import ConfigurationError, NumericalError
from observalab.geometry import boundary_quadrature, disk, interval, rectangle
from observalab.modes import enumerate_modes
from observalab import gram as gr


def _setup(dom, N, q=32):
    table = enumerate_modes(dom, N)
    return table, boundary_quadrature(dom, q=q, lam_max=table.lambdas[-1])


# ---------------------------------------------------------------- time factor

def test_time_overlap_coincident():
    assert gr.time_overlap(3.7, 3.7, 2.5) == 2.5


def test_time_overlap_full_period():
    assert abs(gr.time_overlap(1.0, -1.0, np.pi)) < 1e-14


def test_time_overlap_against_simpson():
    # independent composite-Simpson oracle for the oscillatory integral
    T, lj, lk = 1.0, 2.0, 1.0
    t = np.linspace(0, T, 20001)
    vals = np.exp(1j * (lj - lk) * t)
    w = gr.simpson_weights(len(t), t[1] - t[0])
    assert abs(np.sum(w * vals) - gr.time_overlap(lj, lk, T)) < 1e-10


def test_time_overlap_matrix_consistent():
    lams = np.array([1.0, 2.0, -1.0, -2.0])
    M = gr.time_overlap_matrix(lams, 1.7)
    for i, lj in enumerate(lams):
        for k, lk in enumerate(lams):
            assert M[i, k] == pytest.approx(gr.time_overlap(lj, lk, 1.7), abs=1e-14)


# ---------------------------------------------------------------- assembly

def test_interval_gram_full_period_is_diagonal():
    """L = pi, T = 2pi: all frequency gaps are integers, so every off-diagonal
    time overlap vanishes and the diagonal is T * 4/L = 8."""
    table, brule = _setup(interval(np.pi), 6, q=8)
    G = gr.assemble_exponential_gram(table, brule, 2 * np.pi)
    assert np.max(np.abs(G.matrix - 8.0 * np.eye(12))) < 1e-12


def test_interval_gram_diagonal_any_T():
    table, brule = _setup(interval(np.pi), 4, q=8)
    T = 1.9
    G = gr.assemble_exponential_gram(table, brule, T)
    assert np.allclose(np.diagonal(G.matrix), T * 4 / np.pi, atol=1e-12)


def test_gram_is_hermitian_and_psd():
    table, brule = _setup(rectangle(np.pi, np.pi / 2), 8)
    G = gr.assemble_exponential_gram(table, brule, 5.0)
    m = G.matrix
    assert np.max(np.abs(m - m.conj().T)) < 1e-10
    spec = G.spectrum()
    assert spec["lambda_min"] > -1e-8 * np.real(np.trace(m))


@pytest.mark.parametrize("dom", [interval(np.pi), rectangle(np.pi, np.pi / 2)],
                         ids=lambda d: d.kind)
def test_boundary_factor_closed_form_vs_quadrature(dom):
    table, brule = _setup(dom, 10)
    quad = gr.boundary_trace_gram(table, brule)
    closed = gr.boundary_trace_gram_closed(table)
    assert np.max(np.abs(quad - closed)) < 1e-10


def test_disk_has_no_closed_form():
    table = enumerate_modes(disk(1.0), 3)
    assert gr.boundary_trace_gram_closed(table) is None


def test_quad_form_homogeneity():
    table, brule = _setup(interval(np.pi), 5, q=8)
    G = gr.assemble_exponential_gram(table, brule, 4.0)
    rng = np.random.default_rng(0)
    a = rng.normal(size=10) + 1j * rng.normal(size=10)
    assert G.quad_form(2.5j * a) == pytest.approx(6.25 * G.quad_form(a), rel=1e-12)


def test_principal_submatrix_ordering():
    table, brule = _setup(interval(np.pi), 6, q=8)
    G = gr.assemble_exponential_gram(table, brule, 4.0)
    sub = G.principal(3)
    small_table, _ = _setup(interval(np.pi), 3)
    G3 = gr.assemble_exponential_gram(small_table, brule, 4.0)
    assert np.allclose(sub.matrix, G3.matrix, atol=1e-12)


# ---------------------------------------------------------------- bounds

def test_riesz_interval_reference_horizon():
    """L = pi: R = C_Omega = pi/2, T = 2pi gives the bound 4."""
    table, brule = _setup(interval(np.pi), 10, q=8)
    rep = gr.riesz_bounds_report(table, brule, 2 * np.pi)
    assert rep.c_lower == pytest.approx(4.0)
    assert rep.lambda_min >= 4.0 - 1e-6
    assert rep.passed


def test_riesz_single_mode_block():
    """N = 1: the 2x2 block has eigenvalues T(4/L) -+ |offdiag|, both above
    the bound for any T > 2R (checked on a small horizon sweep)."""
    table, brule = _setup(interval(np.pi), 1, q=8)
    for T in [np.pi * 1.05, np.pi * 1.4, np.pi * 2.2, np.pi * 3.1]:
        G = gr.assemble_exponential_gram(table, brule, T)
        off = abs(G.matrix[0, 1])
        lo = T * 4 / np.pi - off
        rep = gr.riesz_bounds_report(table, brule, T)
        assert rep.lambda_min == pytest.approx(lo, rel=1e-10)
        assert rep.lambda_min >= rep.c_lower - 1e-6


def test_riesz_outside_hypothesis_reports_only():
    table, brule = _setup(interval(np.pi), 4, q=8)
    rep = gr.riesz_bounds_report(table, brule, 0.8 * np.pi)
    assert not rep.in_hypothesis and rep.passed is None
    assert np.isfinite(rep.lambda_min)


def test_lambda_min_non_increasing_in_N():
    dom = rectangle(np.pi, np.pi)
    table, brule = _setup(dom, 12)
    T = 2.5 * 2 * dom.R
    mins = []
    for n in [3, 6, 12]:
        G = gr.assemble_exponential_gram(enumerate_modes(dom, n), brule, T)
        mins.append(G.spectrum()["lambda_min"])
    assert mins[0] >= mins[1] - 1e-10 >= mins[2] - 2e-10


# ---------------------------------------------------------------- sampled path

def test_sampled_gram_reproduces_analytic():
    dom = rectangle(np.pi, np.pi / 2)
    table, brule = _setup(dom, 6)
    T = 2.5 * 2 * dom.R
    tg = gr.default_time_grid(T, table.lambdas[-1])
    lams = table.lambdas_signed()
    traces = np.exp(1j * np.outer(lams, tg))
    Gs = gr.assemble_sampled_gram(table, brule, traces, tg)
    Ga = gr.assemble_exponential_gram(table, brule, T)
    assert np.max(np.abs(Gs.matrix - Ga.matrix)) < 1e-6
    assert Gs.provenance == "sampled"


def test_sampled_gram_unimodular_shift_keeps_spectrum():
    """Traces e^{i lam (t-T)} differ from e^{i lam t} by a diagonal unitary
    congruence, so the sampled spectrum matches the analytic one."""
    dom = interval(np.pi)
    table, brule = _setup(dom, 5, q=8)
    T = 2.5 * np.pi
    tg = gr.default_time_grid(T, table.lambdas[-1])
    lams = table.lambdas_signed()
    traces = np.exp(1j * np.outer(lams, tg - T))
    Gs = gr.assemble_sampled_gram(table, brule, traces, tg)
    Ga = gr.assemble_exponential_gram(table, brule, T)
    ws = Gs.spectrum()["eigenvalues"]
    wa = Ga.spectrum()["eigenvalues"]
    assert np.max(np.abs(ws - wa)) < 1e-6


def test_sampled_gram_rejects_coarse_grid():
    table, brule = _setup(interval(np.pi), 8, q=8)
    tg = np.linspace(0, 4.0, 41)   # far below 20 samples/period at lam = 8
    traces = np.exp(1j * np.outer(table.lambdas_signed(), tg))
    with pytest.raises(NumericalError):
        gr.assemble_sampled_gram(table, brule, traces, tg)


def test_sampled_gram_rejects_nonuniform_grid():
    table, brule = _setup(interval(np.pi), 2, q=8)
    tg = np.concatenate([np.linspace(0, 1, 200), np.linspace(1.01, 2, 201)])
    traces = np.exp(1j * np.outer(table.lambdas_signed(), tg))
    with pytest.raises(ConfigurationError):
        gr.assemble_sampled_gram(table, brule, traces, tg)


def test_simpson_weights_validation():
    with pytest.raises(ConfigurationError):
        gr.simpson_weights(4, 0.1)
    w = gr.simpson_weights(5, 0.5)
    assert abs(np.sum(w) - 2.0) < 1e-14
