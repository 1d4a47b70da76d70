"""Domains, quadrature rules, and eigenfunction tables.

Reference values come from closed forms (interval/rectangle separable modes)
and from scipy.special for the disk; derivative traces are cross-checked by
finite differences, which is an independent route through the code.
"""

import numpy as np
import pytest
import scipy.special as sp

from observalab.config import ConfigurationError
from observalab.geometry import (
    boundary_quadrature,
    disk,
    interior_quadrature,
    interval,
    rectangle,
)
from observalab.modes import enumerate_modes

DOMAINS = [interval(np.pi), rectangle(1.0, np.pi / 2.0), disk(1.3)]


@pytest.mark.parametrize("dom", DOMAINS, ids=lambda d: d.kind)
def test_interior_weights_sum_to_volume(dom):
    rule = interior_quadrature(dom, q=16, lam_max=10.0)
    assert abs(rule.total_weight - dom.volume) < 1e-12 * max(1.0, dom.volume)


def test_boundary_weights_sum_to_perimeter():
    dom = rectangle(0.8, 2.2)
    rule = boundary_quadrature(dom, q=16, lam_max=10.0)
    assert abs(rule.total_weight - 2 * (0.8 + 2.2)) < 1e-12
    dom = disk(1.3)
    rule = boundary_quadrature(dom, q=16, lam_max=10.0)
    assert abs(rule.total_weight - 2 * np.pi * 1.3) < 1e-12
    # interval boundary is a two-point counting measure
    rule = boundary_quadrature(interval(np.pi), q=16, lam_max=10.0)
    assert rule.total_weight == 2.0


def test_geometry_constants():
    dom = interval(np.pi)
    assert dom.R == pytest.approx(np.pi / 2)
    assert dom.C_Omega == pytest.approx(np.pi / 2)
    dom = rectangle(3.0, 4.0)
    assert dom.R == pytest.approx(2.5)
    assert dom.C_Omega == pytest.approx(2.0)
    dom = disk(1.7)
    assert dom.R == pytest.approx(1.7)
    assert dom.C_Omega == pytest.approx(1.7)


def test_normals_are_unit_and_outward():
    for dom in DOMAINS:
        rule = boundary_quadrature(dom, q=8, lam_max=5.0)
        norms = np.linalg.norm(rule.normals, axis=1)
        assert np.allclose(norms, 1.0, atol=1e-14)
        # outward: moving inward along -normal stays inside the closure
        eps = 1e-6 * dom.R
        inner = rule.nodes - eps * rule.normals
        assert np.all(dom.contains(inner, slack=1e-12))
        outer = rule.nodes + eps * rule.normals
        assert not np.any(dom.contains(outer, slack=-1e-12))


@pytest.mark.parametrize("dom", DOMAINS, ids=lambda d: d.kind)
def test_modes_are_orthonormal(dom):
    table = enumerate_modes(dom, 12)
    rule = interior_quadrature(dom, q=32, lam_max=table.lambdas[-1])
    phi = table.phi_matrix(rule.nodes)
    gram = (phi * rule.weights) @ phi.T
    assert np.max(np.abs(gram - np.eye(12))) < 1e-8


@pytest.mark.parametrize("dom", DOMAINS, ids=lambda d: d.kind)
def test_modes_satisfy_eigen_equation(dom):
    """Five-point Laplacian stencil on interior points: an independent route
    through the closed-form evaluators."""
    table = enumerate_modes(dom, 8)
    rng = np.random.default_rng(3)
    pts = _interior_points(dom, rng, 40)
    h = 1e-4
    for n in [1, 4, 8]:
        lam = table.lam_signed(n)
        base = table.eval_phi(n, pts)
        lap = np.zeros(len(pts))
        for d in range(dom.dim):
            shift = np.zeros(dom.dim)
            shift[d] = h
            lap += (table.eval_phi(n, pts + shift) - 2 * base
                    + table.eval_phi(n, pts - shift)) / h**2
        err = np.max(np.abs(lap + lam**2 * base))
        assert err < 1e-3 * lam**2, f"mode {n}: {err}"


def _interior_points(dom, rng, count):
    pts = []
    while len(pts) < count:
        if dom.kind == "interval":
            cand = rng.uniform(0.02, dom.params[0] - 0.02, (1,))
        elif dom.kind == "rectangle":
            a, b = dom.params
            cand = np.array([rng.uniform(0.02, a - 0.02), rng.uniform(0.02, b - 0.02)])
        else:
            r = rng.uniform(0.02, dom.params[0] * 0.95)
            th = rng.uniform(0, 2 * np.pi)
            cand = dom.x0 + r * np.array([np.cos(th), np.sin(th)])
        pts.append(cand)
    return np.array(pts)


@pytest.mark.parametrize("dom", DOMAINS, ids=lambda d: d.kind)
def test_gradient_matches_finite_differences(dom):
    table = enumerate_modes(dom, 6)
    rng = np.random.default_rng(11)
    pts = _interior_points(dom, rng, 25)
    h = 1e-6
    for n in [2, 5]:
        grad = table.eval_grad_phi(n, pts)
        for d in range(dom.dim):
            shift = np.zeros(dom.dim)
            shift[d] = h
            fd = (table.eval_phi(n, pts + shift) - table.eval_phi(n, pts - shift)) / (2 * h)
            assert np.max(np.abs(grad[:, d] - fd)) < 1e-6 * table.lam_signed(n) ** 2


@pytest.mark.parametrize("dom", DOMAINS, ids=lambda d: d.kind)
def test_trace_mirror_and_scaling(dom):
    """psi_{-n} = -psi_n, and psi_n = (normal derivative)/lambda_n."""
    table = enumerate_modes(dom, 10)
    rule = boundary_quadrature(dom, q=16, lam_max=table.lambdas[-1])
    psi = table.psi_matrix(rule)
    N = table.N
    assert np.array_equal(psi[N:], -psi[:N])
    for n in [1, 3, 10]:
        grad = table.eval_grad_phi(n, rule.nodes)
        dn = np.sum(grad * rule.normals, axis=1)
        assert np.allclose(psi[n - 1], dn / table.lam_signed(n), atol=1e-12)


def test_interval_spectrum_closed_form():
    table = enumerate_modes(interval(np.pi), 6)
    assert np.allclose(table.lambdas, [1, 2, 3, 4, 5, 6], atol=1e-14)
    table = enumerate_modes(interval(2.0), 4)
    assert np.allclose(table.lambdas, np.pi / 2.0 * np.arange(1, 5), atol=1e-13)


def test_square_spectrum_closed_form():
    table = enumerate_modes(rectangle(1.0, 1.0), 4)
    assert np.allclose((table.lambdas / np.pi) ** 2, [2, 5, 5, 8], atol=1e-12)


def test_disk_spectrum_matches_scipy_zeros():
    rho = 1.7
    table = enumerate_modes(disk(rho), 15)
    ref = []
    for m in range(12):
        for z in sp.jn_zeros(m, 12):
            ref.append(z / rho)
            if m >= 1:
                ref.append(z / rho)   # cosine and sine branches
    ref = np.sort(ref)[:15]
    assert np.max(np.abs(np.sort(table.lambdas) - ref)) < 1e-12


def test_normal_at_rejects_off_boundary_points():
    dom = rectangle(1.0, 1.0)
    with pytest.raises(ConfigurationError):
        dom.normal_at(np.array([[0.5, 0.5]]))


def test_domain_validation():
    with pytest.raises(ConfigurationError):
        interval(-1.0)
    with pytest.raises(ConfigurationError):
        rectangle(0.0, 1.0)
    with pytest.raises(ConfigurationError):
        disk(-2.0)
