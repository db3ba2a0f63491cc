import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from btorrt.workspace import (
    CloudFormatError,
    CloudMap,
    analyze_density,
    load_cloud,
    save_cloud,
    wall_cloud,
)
from oracles import brute_nearest


def test_csv_ten_rows_bit_equal(tmp_path):
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(10, 3))
    (tmp_path / "c.csv").write_text("".join(",".join(repr(float(v)) for v in row) + "\n" for row in pts))
    got = load_cloud(tmp_path / "c.csv")
    assert got.shape == (10, 3)
    assert got.tobytes() == pts.tobytes()


def test_ply_with_colour_keeps_positions(tmp_path):
    text = (
        "ply\nformat ascii 1.0\ncomment made by hand\nelement vertex 4\n"
        "property float x\nproperty float y\nproperty float z\n"
        "property uchar red\nproperty uchar green\nproperty uchar blue\n"
        "element face 0\nproperty list uchar int vertex_indices\nend_header\n"
        "0 0 0 255 0 0\n1 0 0 0 255 0\n0 1 0 0 0 255\n0 0 1.5 9 9 9\n"
    )
    (tmp_path / "c.ply").write_text(text)
    got = load_cloud(tmp_path / "c.ply")
    assert got.tolist() == [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1.5]]


def test_pcd_with_extra_fields(tmp_path):
    text = (
        "# .PCD v0.7\nVERSION 0.7\nFIELDS intensity x y z\nSIZE 4 4 4 4\nTYPE F F F F\n"
        "COUNT 1 1 1 1\nWIDTH 4\nHEIGHT 1\nPOINTS 4\nDATA ascii\n"
        "7 1 2 3\n7 4 5 6\n7 7 8 9\n7 0.5 0.25 0.125\n"
    )
    (tmp_path / "c.pcd").write_text(text)
    assert load_cloud(tmp_path / "c.pcd").tolist() == [[1, 2, 3], [4, 5, 6], [7, 8, 9], [0.5, 0.25, 0.125]]


@pytest.mark.parametrize("suffix", [".ply", ".pcd", ".csv", ".xyz"])
def test_round_trip_random_cloud(tmp_path, suffix):
    pts = np.random.default_rng(1).uniform(-1e3, 1e3, (257, 3))
    save_cloud(pts, tmp_path / f"r{suffix}")
    assert load_cloud(tmp_path / f"r{suffix}").tobytes() == pts.tobytes()


def test_two_dimensional_csv(tmp_path):
    pts = np.random.default_rng(2).random((6, 2))
    save_cloud(pts, tmp_path / "p.csv")
    assert np.array_equal(load_cloud(tmp_path / "p.csv"), pts)
    with pytest.raises(ValueError):
        save_cloud(pts, tmp_path / "p.ply")


@pytest.mark.parametrize(
    "name,text,line",
    [
        ("a.csv", "0,0,0\n1,1,1\n2,x,2\n3,3,3\n", ":3:"),
        ("b.csv", "0,0,0\n1,1,1\n2,2\n3,3,3\n", ":3:"),
        ("c.ply", "ply\nformat ascii 1.0\nelement vertex 4\nproperty float x\nbogus\nend_header\n", ":5:"),
        ("d.pcd", "VERSION 0.7\nFIELDS x y z\nPOINTS 4\nDATA binary\n", ":4:"),
        (
            "e.ply",
            "ply\nformat ascii 1.0\nelement vertex 4\nproperty float x\nproperty float y\n"
            "property float z\nend_header\n0 0 0\n1 1 oops\n2 2 2\n3 3 3\n",
            ":9:",
        ),
    ],
)
def test_malformed_files_name_the_line(tmp_path, name, text, line):
    (tmp_path / name).write_text(text)
    with pytest.raises(CloudFormatError, match=line):
        load_cloud(tmp_path / name)


def test_too_few_points_and_missing_file(tmp_path):
    (tmp_path / "s.csv").write_text("0,0,0\n1,1,1\n2,2,2\n")
    with pytest.raises(CloudFormatError, match="at least 4"):
        load_cloud(tmp_path / "s.csv")
    with pytest.raises(FileNotFoundError):
        load_cloud(tmp_path / "none.ply")


def test_density_on_regular_grid_cloud():
    g = np.arange(0, 5.0 + 1e-9, 0.5)
    pts = np.stack(np.meshgrid(g, g, g, indexing="ij"), -1).reshape(-1, 3)
    rep = analyze_density(pts, alpha=0.75, step_coeff=4)
    assert rep.mean_nn_dist == pytest.approx(0.5, rel=0.05)
    assert rep.step_size == 4 * rep.mean_nn_dist
    assert rep.safe_dist == 0.75 * rep.step_size


def test_density_matches_brute_force():
    pts = np.random.default_rng(3).random((300, 3))
    rep = analyze_density(pts, alpha=0.5, step_coeff=5)
    nn = [brute_nearest(pts, p, exclude=i)[1] for i, p in enumerate(pts)]
    assert rep.mean_nn_dist == pytest.approx(np.mean(nn), rel=1e-12)
    assert rep.std_nn_dist == pytest.approx(np.std(nn), rel=1e-12)


def test_density_ignores_duplicates():
    pts = np.array([[0, 0, 0], [0, 0, 0], [1, 0, 0], [3, 0, 0]], dtype=float)
    assert analyze_density(pts).mean_nn_dist == pytest.approx((1 + 1 + 2) / 3)


@pytest.mark.parametrize("stp,alpha,safe", [(2.0, 0.75, 1.5), (0.8, 0.75, 0.6), (1.0, 0.5, 0.5), (1.0, 0.8, 0.8)])
def test_safe_distance_is_alpha_times_step(stp, alpha, safe):
    ws = CloudMap(np.eye(3), stp, alpha=alpha)
    assert ws.safe_dist == alpha * stp
    assert ws.safe_dist == pytest.approx(safe)


def test_density_errors():
    with pytest.raises(ValueError):
        analyze_density(np.zeros((1, 3)))
    with pytest.raises(ValueError):
        analyze_density(np.zeros((5, 3)))
    with pytest.raises(ValueError):
        analyze_density(np.eye(3), alpha=0.0)
    with pytest.raises(ValueError):
        analyze_density(np.eye(3), step_coeff=-1)


def test_report_json_keys():
    import json

    rep = analyze_density(np.eye(3))
    assert list(json.loads(rep.to_json())) == ["mean_nn_dist", "std_nn_dist", "step_size", "safe_dist", "alpha"]


def test_single_point_point_free():
    ws = CloudMap([(0.0, 0.0, 0.0)], step_size=1.0, alpha=1.0)
    assert not ws.point_free((0.5, 0.0, 0.0))
    assert ws.point_free((2.0, 0.0, 0.0))
    # the safe ball is closed: exactly S away is not free
    assert not ws.point_free((1.0, 0.0, 0.0))


def test_point_free_matches_exhaustive_scan():
    rng = np.random.default_rng(4)
    cloud = rng.random((500, 3)) * 10
    ws = CloudMap(cloud, step_size=0.8)
    probes = rng.random((100, 3)) * 10
    expected = [np.sqrt(((cloud - p) ** 2).sum(1)).min() > ws.safe_dist for p in probes]
    assert ws.points_free(probes).tolist() == expected
    assert 0 < sum(expected) < 100


def _dense_free(ws, p, q, spacing):
    n = int(np.ceil(np.linalg.norm(q - p) / spacing)) + 1
    return bool(ws.points_free(p + np.linspace(0, 1, n)[:, None] * (q - p)).all())


def test_segment_free_matches_dense_sampling():
    rng = np.random.default_rng(5)
    cloud = rng.random((400, 3)) * 10
    ws = CloudMap(cloud, step_size=0.6)
    P = rng.random((100, 3)) * 10
    Q = P + rng.normal(0, 1.5, (100, 3))
    fast = ws.segments_free(P, Q)
    dense = np.array([_dense_free(ws, p, q, ws.safe_dist / 20) for p, q in zip(P, Q)])
    # sampling can miss a shallow graze of a ball, never the reverse
    assert not np.any(fast & ~dense)
    assert (fast == dense).mean() >= 0.99
    assert fast.tolist() == [ws.segment_free(p, q) for p, q in zip(P, Q)]


def _segment_clearance(cloud, p, q):
    d = q - p
    den = float(d @ d)
    t = np.zeros(len(cloud)) if den == 0 else np.clip((cloud - p) @ d / den, 0, 1)
    return np.sqrt(((p + t[:, None] * d - cloud) ** 2).sum(1)).min()


def test_segment_free_matches_exact_distance_oracle():
    rng = np.random.default_rng(7)
    cloud = rng.random((300, 3)) * 10
    ws = CloudMap(cloud, step_size=0.5)
    P = rng.random((300, 3)) * 10
    Q = P + rng.normal(0, 3, (300, 3))
    Q[:20] = P[:20]
    expected = [_segment_clearance(cloud, p, q) > ws.safe_dist for p, q in zip(P, Q)]
    assert ws.segments_free(P, Q).tolist() == expected
    assert 10 < sum(expected) < 290


def test_segment_endpoints_are_checked():
    ws = CloudMap([(0.0, 0.0, 0.0), (9, 9, 9), (9, 0, 0), (0, 9, 0)], step_size=1.0)
    assert not ws.segment_free((5.0, 5.0, 5.0), (0.1, 0.0, 0.0))
    assert ws.segment_free((5.0, 5.0, 5.0), (5.0, 5.0, 5.0))


def test_dimension_mismatch():
    ws = CloudMap(np.eye(3), 1.0)
    with pytest.raises(ValueError, match="dimension"):
        ws.point_free((0.0, 0.0))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), s_big=st.floats(0.2, 2.0), shrink=st.floats(0.05, 1.0))
def test_property_monotone_safety(seed, s_big, shrink):
    rng = np.random.default_rng(seed)
    cloud = rng.random((60, 3)) * 5
    big = CloudMap(cloud, step_size=s_big, alpha=1.0)
    small = CloudMap(cloud, step_size=s_big * shrink, alpha=1.0)
    P = rng.random((30, 3)) * 5
    Q = P + rng.normal(0, 1, (30, 3))
    ok_big = big.segments_free(P, Q)
    ok_small = small.segments_free(P, Q)
    assert not np.any(ok_big & ~ok_small)


@pytest.mark.parametrize("spacing", [0.2, 0.5, 1.0])
@pytest.mark.parametrize("ratio", [1.0, 1.5])
def test_wall_cannot_be_crossed(spacing, ratio):
    cloud = wall_cloud(spacing, width=10.0, height=10.0, x=0.0)
    ws = CloudMap(cloud, step_size=spacing * ratio, alpha=1.0)
    assert ws.safe_dist >= spacing
    rng = np.random.default_rng(6)
    n = 500
    yz0 = rng.uniform(0, 10, (n, 2))
    yz1 = rng.uniform(0, 10, (n, 2))
    P = np.column_stack([-rng.uniform(0.1, 5, n), yz0])
    Q = np.column_stack([rng.uniform(0.1, 5, n), yz1])
    # every segment crosses the plane at a point inside the wall's extent
    t = -P[:, 0] / (Q[:, 0] - P[:, 0])
    cross = P[:, 1:] + t[:, None] * (Q[:, 1:] - P[:, 1:])
    assert np.all((cross >= 0) & (cross <= 10))
    assert not ws.segments_free(P, Q).any()
