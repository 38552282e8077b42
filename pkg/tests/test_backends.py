import numpy as np
import pytest
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from ptopp import _kernels, _pykernels
from ptopp.passages import passage_arrays

ck = pytest.importorskip("ptopp._ckernels")


def test_selected_backend():
    assert _kernels.BACKEND in ("cython", "python")
    assert _pykernels.BACKEND == "python" and ck.BACKEND == "cython"


def _polysets(s):
    verts, offs = [], [0]
    for o in s.obstacles:
        verts.extend(o.footprint.vertices)
        offs.append(len(verts))
    v = np.array(verts, dtype=float)
    h = [o.height for o in s.obstacles]
    return [mod.PolySet(v, offs, h, s.eps) for mod in (_pykernels, ck)]


def _edges(s, n, seed):
    rng = np.random.default_rng(seed)
    a = rng.uniform((0, 0), (s.width, s.height), size=(n, 2))
    b = a + rng.normal(0, 60, size=(n, 2))
    return [(*p, *q) for p, q in zip(a.tolist(), b.tolist())]


def test_check_pairs_modes(world40):
    s = world40[0]
    py, cy = _polysets(s)
    n = len(s.obstacles)
    ii, jj = (x.astype(np.int64) for x in np.triu_indices(n, 1))
    rng = np.random.default_rng(0)
    tptr = np.arange(0, 4 * len(ii) + 1, 4, dtype=np.int64)
    tidx = rng.integers(0, n, size=4 * len(ii)).astype(np.int64)
    nptr = np.arange(0, 5 * n + 1, 5, dtype=np.int64)
    nidx = np.sort(rng.integers(0, n, size=(n, 5)), axis=1).ravel().astype(np.int64)
    for mode, (p, x) in ((0, (tptr, tidx)), (1, (tptr, tidx)), (2, (nptr, nidx))):
        a = py.check_pairs(ii, jj, p, x, mode)
        b = cy.check_pairs(ii, jj, p, x, mode)
        assert list(a[0]) == list(b[0])
        for u, v in zip(a[1:], b[1:]):
            np.testing.assert_allclose(u, v, rtol=0, atol=1e-9)


def test_segment_and_clearance(world40):
    s = world40[0]
    py, cy = _polysets(s)
    for e in _edges(s, 3000, 1):
        assert py.segment_free(*e) == cy.segment_free(*e)
        assert py.point_free(*e[:2]) == cy.point_free(*e[:2])
        assert py.clearance(*e[:2]) == pytest.approx(cy.clearance(*e[:2]), abs=1e-9)


def test_geodesic_reach():
    rng = np.random.default_rng(2)
    n = 60
    m = rng.random((n, n)) < 0.05
    m = np.triu(m, 1)
    m = m | m.T
    g = csr_matrix(m.astype(float))
    g.sort_indices()
    ip, ix = g.indptr.astype(np.int64), g.indices.astype(np.int64)
    hops = shortest_path(g, unweighted=True)
    for k in (1, 2, 3):
        pp, px = _pykernels.geodesic_reach(ip, ix, k)
        cp, cx = ck.geodesic_reach(ip, ix, k)
        assert list(pp) == list(cp) and list(px) == list(cx)
        for i in range(n):
            assert list(px[pp[i]:pp[i + 1]]) == list(np.flatnonzero(hops[i] <= k))


def test_passage_crossings(world40):
    s, ps, _ = world40
    arr = passage_arrays(ps)
    a, b = _pykernels.PassageSet(*arr, s.eps), ck.PassageSet(*arr, s.eps)
    for e in _edges(s, 3000, 3):
        assert a.crossings(*e) == b.crossings(*e)


def test_walks(world40):
    s, ps, cx = world40
    wp, wc = cx.walker_for(_pykernels), cx.walker_for(ck)
    done = 0
    for e in _edges(s, 4000, 4):
        if not (s.is_free(e[:2]) and s.segment_free(e[:2], e[2:])):
            continue
        c = cx.locate(e[:2])
        assert wp.walk(c, *e) == wc.walk(c, *e)
        done += 1
    assert done > 1000
