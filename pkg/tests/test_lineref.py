import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from riverwse import lineref
from riverwse.errors import GeometryError


def line(*pts):
    return lineref.Polyline(np.array(pts, dtype=float))


class TestDensify:
    def test_simple_segment(self):
        pts = lineref.densify(line((0, 0), (1, 0)), step=0.5)
        assert [p.chainage for p in pts] == [0.0, 0.5, 1.0]

    def test_l_shape_hand_traced(self):
        pts = lineref.densify(line((0, 0), (1, 0), (1, 1)), step=0.4)
        chain = [p.chainage for p in pts]
        np.testing.assert_allclose(chain, [0, 0.4, 0.8, 1.2, 1.6, 2.0], atol=1e-12)
        p12 = pts[3]
        assert (p12.x, p12.y) == pytest.approx((1.0, 0.2))

    def test_length_conservation(self):
        # along-line distances between consecutive points sum to the total
        # length (chord distances cut corners by construction: the sampled
        # chainages need not include interior vertices)
        rng = np.random.default_rng(5)
        ln = lineref.Polyline(np.cumsum(rng.uniform(0.1, 2, (8, 2)), axis=0))
        pts = lineref.densify(ln, step=0.173)
        chain = np.array([p.chainage for p in pts])
        assert np.diff(chain).sum() == pytest.approx(ln.length, abs=1e-9)

    def test_length_conservation_chords_on_straight_line(self):
        ln = line((0, 0), (7.3, 0))
        pts = lineref.densify(ln, step=0.217)
        xy = np.array([(p.x, p.y) for p in pts])
        assert np.hypot(*np.diff(xy, axis=0).T).sum() == pytest.approx(7.3, abs=1e-9)

    def test_strictly_increasing_and_ends_at_last_vertex(self):
        ln = line((0, 0), (0.35, 0), (0.35, 0.9))
        pts = lineref.densify(ln, step=0.1)
        chain = np.array([p.chainage for p in pts])
        assert np.all(np.diff(chain) > 0)
        assert (pts[-1].x, pts[-1].y) == pytest.approx((0.35, 0.9))
        assert pts[-1].chainage == pytest.approx(ln.length)

    def test_bad_step(self):
        with pytest.raises(GeometryError):
            lineref.densify(line((0, 0), (1, 0)), step=0)


class TestProjectChainage:
    def test_perpendicular_foot(self):
        assert lineref.project_chainage(line((0, 0), (10, 0)), 3, 0.5) == pytest.approx(3.0)

    def test_vertex_coincident(self):
        ln = line((0, 0), (3, 0), (3, 4))
        assert lineref.project_chainage(ln, 3, 0) == pytest.approx(3.0)
        assert lineref.project_chainage(ln, 3, 4) == pytest.approx(7.0)

    def test_tie_breaks_to_smallest_chainage(self):
        # point equidistant from both arms of a right angle
        ln = line((0, 0), (1, 0), (1, 1))
        c = lineref.project_chainage(ln, 0.5, 0.5)
        assert c == pytest.approx(0.5)

    def test_against_dense_enumeration_oracle(self):
        rng = np.random.default_rng(11)
        ln = lineref.Polyline(np.cumsum(rng.uniform(0.2, 1.5, (6, 2)), axis=0))
        dense = lineref.densify(ln, step=1e-3)
        dxy = np.array([(p.x, p.y) for p in dense])
        dchain = np.array([p.chainage for p in dense])
        for _ in range(50):
            p = ln.vertices[0] + rng.uniform(-2, 6, 2)
            c = lineref.project_chainage(ln, p[0], p[1])
            d2 = np.sum((dxy - p) ** 2, axis=1)
            assert abs(c - dchain[np.argmin(d2)]) < 2e-3


class TestClipChainageRange:
    def test_straight_through_box(self):
        ln = line((0, 0), (20, 0))
        assert lineref.clip_chainage_range(ln, (5, -5, 15, 5)) == pytest.approx((5, 15))

    def test_no_intersection(self):
        with pytest.raises(GeometryError, match="intersect"):
            lineref.clip_chainage_range(line((0, 0), (20, 0)), (5, 2, 15, 5))

    def test_against_dense_membership_oracle(self):
        rng = np.random.default_rng(13)
        ln = lineref.Polyline(np.cumsum(rng.uniform(0.3, 1.5, (5, 2)), axis=0))
        dense = lineref.densify(ln, step=1e-3)
        dxy = np.array([(p.x, p.y) for p in dense])
        dchain = np.array([p.chainage for p in dense])
        hits = 0
        for _ in range(40):
            cx, cy = ln.vertices[0] + rng.uniform(0, 4, 2)
            half = rng.uniform(0.3, 1.5)
            box = (cx - half, cy - half, cx + half, cy + half)
            inside = ((dxy[:, 0] >= box[0]) & (dxy[:, 0] <= box[2])
                      & (dxy[:, 1] >= box[1]) & (dxy[:, 1] <= box[3]))
            if not inside.any():
                with pytest.raises(GeometryError):
                    lineref.clip_chainage_range(ln, box)
                continue
            hits += 1
            lo, hi = lineref.clip_chainage_range(ln, box)
            assert abs(lo - dchain[inside].min()) < 2e-3
            assert abs(hi - dchain[inside].max()) < 2e-3
        assert hits > 5

    def test_box_containing_whole_line(self):
        ln = line((0, 0), (1, 1), (2, 0))
        lo, hi = lineref.clip_chainage_range(ln, (-1, -1, 3, 3))
        assert (lo, hi) == pytest.approx((0.0, ln.length))


class TestPolylineValidation:
    def test_duplicate_vertices_rejected(self):
        with pytest.raises(GeometryError):
            line((0, 0), (0, 0), (1, 0))

    def test_single_vertex_rejected(self):
        with pytest.raises(GeometryError):
            line((0, 0))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(-50, 50), st.floats(-50, 50)),
                min_size=2, max_size=8),
       st.floats(0.05, 2.0))
def test_densify_properties(verts, step):
    arr = np.array(verts)
    if np.any(np.hypot(*np.diff(arr, axis=0).T) < 1e-6):
        return
    ln = lineref.Polyline(arr)
    pts = lineref.densify(ln, step)
    chain = np.array([p.chainage for p in pts])
    assert np.all(np.diff(chain) > 0)
    assert chain[0] == 0.0
    assert chain[-1] == pytest.approx(ln.length, abs=1e-9)
    assert pts[-1].x == pytest.approx(ln.vertices[-1][0], abs=1e-9)


def test_csv_round_trip(tmp_path):
    ln = line((0.5, 1.25), (3.75, -2.5), (10, 10))
    lineref.save_polyline_csv(ln, tmp_path / "l.csv")
    ln2 = lineref.load_polyline_csv(tmp_path / "l.csv")
    np.testing.assert_array_equal(ln.vertices, ln2.vertices)
