import numpy as np
import pytest
from scipy import ndimage

from btorrt.workspace import (
    ARCHETYPES,
    building_cloud,
    default_endpoints,
    generate_map,
    partitioned_map,
    switchback_map,
    wall_cloud,
)
from btorrt.workspace.generate import FRACTION_BANDS


def _same_component(occ, a, b):
    labels, _ = ndimage.label(~occ)
    la = labels[int(a[1]), int(a[0])]
    return la != 0 and la == labels[int(b[1]), int(b[0])]


def test_circular_is_deterministic():
    a = generate_map("circular", 1, n_discs=8)
    b = generate_map("circular", 1, n_discs=8)
    assert np.array_equal(a.occupancy, b.occupancy)
    assert not np.array_equal(a.occupancy, generate_map("circular", 2).occupancy)


def test_single_tunnel_fraction():
    assert 0.35 <= generate_map("single_tunnel", 7).obstacle_fraction <= 0.45


def test_circular_scatter_fraction():
    assert 0.04 <= generate_map("circular_scatter", 3).obstacle_fraction <= 0.10


@pytest.mark.parametrize("archetype", ARCHETYPES)
def test_fraction_band_and_connectivity(archetype):
    lo, hi = FRACTION_BANDS[archetype]
    for seed in (1, 2):
        g = generate_map(archetype, seed)
        assert (g.width, g.height) == (500, 500)
        assert lo <= g.obstacle_fraction <= hi
        s, t = default_endpoints(archetype)
        assert g.point_free(s) and g.point_free(t)
        assert _same_component(g.occupancy, s, t)


def test_size_scales_endpoints():
    g = generate_map("circular", 1, size=100)
    assert (g.width, g.height) == (100, 100)
    s, t = default_endpoints("circular", 100)
    assert s.tolist() == [2.0, 2.0] and t.tolist() == [98.0, 98.0]


def test_errors():
    with pytest.raises(ValueError, match="unknown archetype"):
        generate_map("hexagons", 1)
    with pytest.raises(ValueError):
        generate_map("circular", 1, size=10)


def test_partitioned_map_separates_halves():
    g = partitioned_map()
    assert not _same_component(g.occupancy, (10, 10), (490, 490))


def test_switchback_is_one_corridor():
    g, s, t = switchback_map()
    assert g.point_free(s) and g.point_free(t)
    assert _same_component(g.occupancy, s, t)
    assert not g.segment_free(s, t)


def test_building_cloud_spacing():
    for spacing in (0.2, 0.34, 0.49):
        pts = building_cloud(spacing)
        assert pts.shape[1] == 3
        assert len(np.unique(pts, axis=0)) == len(pts)
        from btorrt.workspace import analyze_density

        assert analyze_density(pts).mean_nn_dist == pytest.approx(spacing, rel=0.05)


def test_wall_cloud_is_a_plane():
    pts = wall_cloud(0.5, width=4, height=2, x=3.0)
    assert np.all(pts[:, 0] == 3.0)
    assert len(pts) == 9 * 5
