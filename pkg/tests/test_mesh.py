import numpy as np
import pytest

from wavedg.mesh import DofLayout, build_mesh_1d, build_mesh_2d


def test_bounded_dual_cells_are_half_width_at_ends():
    m = build_mesh_1d(-1.0, 1.5, 10)
    w = m.dual_widths
    assert m.n_dual == 11
    assert w[0] == pytest.approx(m.h / 2) and w[-1] == pytest.approx(m.h / 2)
    np.testing.assert_allclose(w[1:-1], m.h)
    assert w.sum() == pytest.approx(m.length)


def test_periodic_dual_cells_wrap():
    m = build_mesh_1d(-1.0, 1.0, 6, periodic=True)
    assert m.n_dual == 6
    np.testing.assert_allclose(m.dual_widths, m.h)
    assert m.dual_bounds[0, 0] < m.x_left


@pytest.mark.parametrize("periodic", [False, True])
def test_pieces_tile_the_domain(periodic):
    m = build_mesh_1d(0.0, 3.0, 7, periodic=periodic)
    pcs = m.pieces()
    assert len(pcs) == 2 * m.n
    assert sum(b - a for _, _, a, b in pcs) == pytest.approx(m.length)
    for j, k, a, b in pcs:
        lo, hi = m.dual_bounds[k]
        shift = np.floor((a - lo) / m.length + 1e-12) * m.length if periodic else 0.0
        assert lo - 1e-12 <= a - shift and b - shift <= hi + 1e-12


def test_face_lists():
    m = build_mesh_1d(-1.0, 1.0, 4)
    pf = m.primal_faces()
    assert len(pf) == 5 and pf[0].left == -1 and pf[-1].right == -1
    df = m.dual_faces()
    assert len(df) == 6 and df[0].left == -1 and df[-1].right == -1
    assert [f.owner for f in df[1:-1]] == [0, 1, 2, 3]


def test_mesh_argument_checks():
    with pytest.raises(ValueError):
        build_mesh_1d(0.0, 1.0, 1)
    with pytest.raises(ValueError):
        build_mesh_1d(1.0, 0.0, 4)
    with pytest.raises(ValueError):
        build_mesh_2d(1)


def test_2d_dual_cell_sizes():
    m = build_mesh_2d(5)
    assert m.dual_areas().sum() == pytest.approx(4.0)
    assert m.primal_areas().sum() == pytest.approx(4.0)
    assert m.dual_cell_kinds() == {"interior": 16, "edge": 16, "corner": 4}
    x0, x1, y0, y1 = m.dual_rect(m.dual_index(0, 0))
    assert (x1 - x0, y1 - y0) == pytest.approx((m.h / 2, m.h / 2))
    assert m.primal_rect(m.primal_index(4, 0))[0] == pytest.approx(1.0 - m.h)


def test_layout_partition_and_split():
    lay = DofLayout(3, 4, 4, 3)
    assert lay.total_dofs == 24
    w0, w1 = lay.w0_indices, lay.w1_indices
    assert list(w0) == [0, 4, 8]
    assert sorted(np.concatenate([w0, w1]).tolist()) == list(range(24))
    w = np.arange(24.0)
    u, v = lay.split(w)
    assert u.shape == (3, 4) and v.shape == (4, 3)
    assert v[0, 0] == 12.0
    u[1, 2] = -1.0
    assert w[6] == -1.0
