import numpy as np
import pytest

from conftest import Z
from ldgq import (
    NormalizationError,
    eigensystem,
    eigenvalues_desc,
    make_biaxial,
    order_params,
)
from ldgq.moments import (
    audit_eigen_bounds,
    band_distribution,
    build_quadrature,
    distribution_from_values,
    load_density_csv,
    q_from_psi,
    uniform_distribution,
    watson_distribution,
)
from ldgq.qtensor import rotate_coeffs


def test_quadrature_invariants_low_level():
    quad = build_quadrature(1)
    assert abs(quad.weights.sum() - 4 * np.pi) < 1e-10
    second = np.einsum("n,ni,nj->ij", quad.weights, quad.nodes, quad.nodes)
    assert np.abs(second - (4 * np.pi / 3) * np.eye(3)).max() < 1e-12
    assert (quad.weights > 0).all()
    assert np.abs(np.einsum("ni,ni->n", quad.nodes, quad.nodes) - 1.0).max() < 1e-14


def test_quadrature_antipodal_symmetry_exact():
    for level in (1, 3, 8):
        quad = build_quadrature(level)
        assert np.array_equal(quad.nodes[quad.antipode], -quad.nodes)
        assert np.array_equal(quad.weights[quad.antipode], quad.weights)
        assert (quad.antipode[quad.antipode] == np.arange(quad.antipode.size)).all()


def test_quadrature_higher_moments():
    quad = build_quadrature(8)
    m4 = float(quad.weights @ quad.nodes[:, 2] ** 4)
    assert abs(m4 - 4 * np.pi / 5) < 1e-10
    mixed = float(quad.weights @ (quad.nodes[:, 0] ** 2 * quad.nodes[:, 1] ** 2))
    assert abs(mixed - 4 * np.pi / 15) < 1e-10
    with pytest.raises(ValueError):
        build_quadrature(0)


def test_uniform_density_gives_zero_tensor():
    quad = build_quadrature(6)
    q = q_from_psi(uniform_distribution(quad), quad)
    assert q.norm < 1e-10


def test_distribution_validation():
    quad = build_quadrature(2)
    with pytest.raises(NormalizationError):
        distribution_from_values(quad, -np.ones(quad.weights.size))
    with pytest.raises(NormalizationError):
        distribution_from_values(quad, np.zeros(quad.weights.size))
    with pytest.raises(NormalizationError):
        distribution_from_values(quad, np.ones(7))
    # unnormalized density rejected by the moment map
    psi = uniform_distribution(quad)
    bad = type(psi)(values=2.0 * psi.values)
    with pytest.raises(NormalizationError):
        q_from_psi(bad, quad)


def test_symmetrization_applied_automatically():
    quad = build_quadrature(4)
    rng = np.random.default_rng(0)
    psi = distribution_from_values(quad, rng.random(quad.weights.size))
    assert np.allclose(psi.values, psi.values[quad.antipode], atol=0.0)


def test_watson_concentration_approaches_prolate_limit():
    quad = build_quadrature(48)
    prev = -np.inf
    for kappa in (1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0):
        q = q_from_psi(watson_distribution(quad, Z, kappa), quad)
        es = eigensystem(q)
        lam_max = es.lambdas[0]
        assert lam_max > prev  # monotone approach, never attained
        assert lam_max < 2 / 3 + 1e-12
        prev = lam_max
    assert prev > 0.65
    assert abs(abs(es.vectors[0] @ Z) - 1.0) < 1e-8


def test_equator_band_gives_oblate_pair():
    quad = build_quadrature(48)
    q = q_from_psi(band_distribution(quad, Z, 0.05), quad)
    lam = eigenvalues_desc(q.coeffs)
    assert lam[2] == pytest.approx(-1 / 3, abs=2e-3)
    op = order_params(q)
    assert op.s == pytest.approx(0.5, abs=2e-3)
    assert op.r == pytest.approx(0.5, abs=2e-3)


def test_random_densities_respect_eigenvalue_bounds():
    quad = build_quadrature(8)
    rng = np.random.default_rng(12)
    for _ in range(500):
        psi = distribution_from_values(quad, rng.random(quad.weights.size))
        lam = eigenvalues_desc(q_from_psi(psi, quad).coeffs)
        assert lam[0] <= 2 / 3 + 1e-8
        assert lam[2] >= -1 / 3 - 1e-8


def test_audit_eigen_bounds_delegates():
    quad = build_quadrature(6)
    q = q_from_psi(watson_distribution(quad, Z, 5.0), quad)
    assert audit_eigen_bounds(q, 1e-8)
    bad = make_biaxial(1.2, 0.0, Z, np.array([1.0, 0.0, 0.0]))
    assert not audit_eigen_bounds(bad, 0.0)


def test_moment_map_linearity():
    quad = build_quadrature(8)
    rng = np.random.default_rng(21)
    psi1 = distribution_from_values(quad, rng.random(quad.weights.size))
    psi2 = distribution_from_values(quad, rng.random(quad.weights.size))
    q1 = q_from_psi(psi1, quad).coeffs
    q2 = q_from_psi(psi2, quad).coeffs
    for alpha in (0.0, 0.25, 0.7, 1.0):
        mix = type(psi1)(values=alpha * psi1.values + (1 - alpha) * psi2.values)
        qm = q_from_psi(mix, quad).coeffs
        assert np.abs(qm - (alpha * q1 + (1 - alpha) * q2)).max() < 1e-12


def test_rotation_equivariance():
    # evaluating a rotated smooth density reproduces the conjugated tensor up
    # to quadrature error
    quad = build_quadrature(24)
    axis = np.array([1.0, 1.0, 1.0]) / np.sqrt(3.0)
    angle = 0.9
    k = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    rot = np.eye(3) + np.sin(angle) * k + (1 - np.cos(angle)) * (k @ k)
    psi = watson_distribution(quad, Z, 3.0)
    psi_rot = watson_distribution(quad, rot @ Z, 3.0)
    q = q_from_psi(psi, quad).coeffs
    q_rot = q_from_psi(psi_rot, quad).coeffs
    assert np.abs(q_rot - rotate_coeffs(q, rot)).max() < 1e-8


def test_load_density_csv(tmp_path):
    quad = build_quadrature(16)
    path = tmp_path / "density.csv"
    rows = ["theta,phi,value"]
    rng = np.random.default_rng(33)
    for _ in range(400):
        theta = np.arccos(rng.uniform(-1, 1))
        phi = rng.uniform(0, 2 * np.pi)
        weight = np.exp(3.0 * np.cos(theta) ** 2)
        rows.append(f"{theta},{phi},{weight}")
    path.write_text("\n".join(rows) + "\n")
    psi = load_density_csv(path, quad)
    q = q_from_psi(psi, quad)
    lam = eigenvalues_desc(q.coeffs)
    assert lam[0] > 0.05  # prolate ordering along z
    es_axis = eigensystem(q).vectors[0]
    assert abs(abs(es_axis @ Z) - 1.0) < 0.05

    bad = tmp_path / "bad.csv"
    bad.write_text("theta,phi,value\n0.5,0.1,-2.0\n")
    with pytest.raises(NormalizationError):
        load_density_csv(bad, quad)
