import numpy as np
import pytest

from molring.errors import InvalidParameterError
from molring.geometry import (DisorderSpec, apply_disorder, build_chain, build_dimer,
                              build_ring, build_ring_with_center, ring_radius)


def test_two_point_ring_is_a_dimer():
    g = build_ring(2, 0.025)
    assert g.count == 2
    sep = np.linalg.norm(g.positions[0] - g.positions[1])
    assert abs(sep - 0.025) < 1e-15


def test_ring_nearest_neighbor_gap_matches_input():
    g = build_ring(8, 0.04)
    r_expect = 0.04 / (2 * np.sin(np.pi / 8))
    radii = np.linalg.norm(g.positions - g.positions.mean(axis=0), axis=1)
    assert np.max(np.abs(radii - r_expect)) < 1e-12
    gaps = [np.linalg.norm(g.positions[i] - g.positions[(i + 1) % 8]) for i in range(8)]
    assert np.max(np.abs(np.array(gaps) - 0.04)) < 1e-12
    assert abs(g.nearest_neighbor_separation() - 0.04) < 1e-12


def test_square_ring_side_length():
    # closed-form circle coordinates against direct trigonometric construction
    g = build_ring(4, 0.1)
    r = ring_radius(4, 0.1)
    expected = r * np.array([
        [np.cos(np.pi / 2), np.sin(np.pi / 2), 0],
        [np.cos(np.pi), np.sin(np.pi), 0],
        [np.cos(3 * np.pi / 2), np.sin(3 * np.pi / 2), 0],
        [np.cos(2 * np.pi), np.sin(2 * np.pi), 0],
    ])
    assert np.max(np.abs(g.positions - expected)) < 1e-12
    side = np.linalg.norm(g.positions[0] - g.positions[1])
    assert abs(side - 0.1) < 1e-12


def test_ring_cyclic_label_rotation_maps_position_set_onto_itself():
    g = build_ring(7, 0.05)
    rotated = np.roll(g.positions, 1, axis=0)
    # the set of positions is invariant; compare sorted representations
    a = np.array(sorted(map(tuple, np.round(g.positions, 12))))
    b = np.array(sorted(map(tuple, np.round(rotated, 12))))
    assert np.max(np.abs(a - b)) < 1e-12


def test_dipole_axes_unit_norm_and_perpendicular():
    g = build_ring(5, 0.05)
    assert np.allclose(np.linalg.norm(g.dipole_axes, axis=1), 1.0, atol=1e-12)
    assert np.allclose(g.dipole_axes[:, 2], 1.0)


def test_tangential_and_radial_polarizations():
    g_t = build_ring(6, 0.05, "tangential")
    g_r = build_ring(6, 0.05, "radial")
    for g in (g_t, g_r):
        assert np.allclose(np.linalg.norm(g.dipole_axes, axis=1), 1.0, atol=1e-12)
    radial = g_r.positions / np.linalg.norm(g_r.positions, axis=1, keepdims=True)
    assert np.allclose(np.abs(np.sum(g_t.dipole_axes * radial, axis=1)), 0.0, atol=1e-12)


def test_invalid_separation_rejected():
    with pytest.raises(InvalidParameterError):
        build_ring(4, -0.1)
    with pytest.raises(InvalidParameterError):
        build_ring(4, float("nan"))
    with pytest.raises(InvalidParameterError):
        build_ring(1, 0.1)


def test_ring_with_center_layout():
    g = build_ring_with_center(5, radius=0.05)
    assert g.count == 5
    assert g.total_emitters == 6
    assert g.pump_index == 5
    assert np.allclose(g.positions[5], 0.0)
    dists = np.linalg.norm(g.positions[:5] - g.positions[5], axis=1)
    assert np.max(np.abs(dists - 0.05)) < 1e-12


def test_chain_spacing():
    g = build_chain(4, 0.2)
    assert np.allclose(np.diff(g.positions[:, 0]), 0.2)


def test_disorder_zero_sigma_is_identity():
    g = build_ring(4, 0.05)
    spec = DisorderSpec(0.0, 3, seed=7)
    assert apply_disorder(g, spec, 0) is g


def test_disorder_deterministic_per_seed_and_index():
    g = build_ring(4, 0.05)
    spec = DisorderSpec(0.01, 5, seed=42)
    a = apply_disorder(g, spec, 2)
    b = apply_disorder(g, spec, 2)
    c = apply_disorder(g, spec, 3)
    assert np.array_equal(a.positions, b.positions)
    assert not np.array_equal(a.positions, c.positions)


def test_disorder_sample_standard_deviation():
    g = build_dimer(0.05)
    spec = DisorderSpec(0.01, 2500, seed=1)
    samples = []
    for r in range(spec.realizations):
        samples.append(apply_disorder(g, spec, r).positions - g.positions)
    flat = np.concatenate(samples).ravel()  # 2500*6 = 15000 normal draws
    assert abs(flat.std() - 0.01) / 0.01 < 0.05


def test_disorder_realization_out_of_range():
    g = build_dimer(0.05)
    with pytest.raises(InvalidParameterError):
        apply_disorder(g, DisorderSpec(0.01, 2, seed=0), 2)


def test_geometry_serialization_roundtrip():
    g = build_ring_with_center(3, d=0.04)
    d = g.to_dict()
    assert d["layout_kind"] == "ring_with_center"
    assert len(d["positions"]) == 4
    assert d["count"] == 3
