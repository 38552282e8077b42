# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels.

Line-for-line port of ``_pykernels.py``; both backends return identical
results on identical inputs.
"""

import numpy as np

from libc.math cimport sqrt, fabs, INFINITY
from libc.stdlib cimport malloc, free

from .errors import WalkStuck

BACKEND = "cython"
KIND_PASSAGE = 0
KIND_ARC = 1

cdef enum:
    C_KIND_ARC = 1


cdef inline double _psd(double px, double py, double ax, double ay, double bx, double by,
                        double* qx, double* qy) noexcept nogil:
    cdef double dx = bx - ax
    cdef double dy = by - ay
    cdef double den = dx * dx + dy * dy
    cdef double t
    if den == 0.0:
        t = 0.0
    else:
        t = ((px - ax) * dx + (py - ay) * dy) / den
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
    qx[0] = ax + t * dx
    qy[0] = ay + t * dy
    return sqrt((px - qx[0]) * (px - qx[0]) + (py - qy[0]) * (py - qy[0]))


cdef inline double _psd0(double px, double py, double ax, double ay, double bx, double by) noexcept nogil:
    cdef double qx, qy
    return _psd(px, py, ax, ay, bx, by, &qx, &qy)


cdef inline double _orient(double ax, double ay, double bx, double by, double cx, double cy) noexcept nogil:
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


cdef inline bint _seg_intersect(double ax, double ay, double bx, double by,
                                double cx, double cy, double dx, double dy, double eps) noexcept nogil:
    cdef double d1 = _orient(cx, cy, dx, dy, ax, ay)
    cdef double d2 = _orient(cx, cy, dx, dy, bx, by)
    cdef double d3 = _orient(ax, ay, bx, by, cx, cy)
    cdef double d4 = _orient(ax, ay, bx, by, dx, dy)
    if ((d1 > 0.0 and d2 < 0.0) or (d1 < 0.0 and d2 > 0.0)) and (
        (d3 > 0.0 and d4 < 0.0) or (d3 < 0.0 and d4 > 0.0)
    ):
        return True
    if _psd0(ax, ay, cx, cy, dx, dy) <= eps:
        return True
    if _psd0(bx, by, cx, cy, dx, dy) <= eps:
        return True
    if _psd0(cx, cy, ax, ay, bx, by) <= eps:
        return True
    return _psd0(dx, dy, ax, ay, bx, by) <= eps


cdef inline double _seg_param(double ax, double ay, double bx, double by,
                              double cx, double cy, double dx, double dy) noexcept nogil:
    cdef double rx = bx - ax
    cdef double ry = by - ay
    cdef double sx = dx - cx
    cdef double sy = dy - cy
    cdef double den = rx * sy - ry * sx
    cdef double ln2 = rx * rx + ry * ry
    cdef double t, tc, td
    if ln2 == 0.0:
        return 0.0
    if fabs(den) > 1e-12 * sqrt(ln2 * (sx * sx + sy * sy)):
        t = ((cx - ax) * sy - (cy - ay) * sx) / den
    else:
        tc = ((cx - ax) * rx + (cy - ay) * ry) / ln2
        td = ((dx - ax) * rx + (dy - ay) * ry) / ln2
        t = tc if tc < td else td
    if t < 0.0:
        return 0.0
    if t > 1.0:
        return 1.0
    return t


cdef inline double _dmin(double a, double b) noexcept nogil:
    return a if a < b else b


cdef inline double _dmax(double a, double b) noexcept nogil:
    return a if a > b else b


cdef bint _gate_hit(double x1, double y1, double z1, double x2, double y2, double z2,
                    double ax, double ay, double bx, double by, double hlo, double hhi,
                    double eps) noexcept nogil:
    cdef double lo = hlo - eps
    cdef double hi = hhi + eps
    cdef double rx = x2 - x1
    cdef double ry = y2 - y1
    cdef double ln2 = rx * rx + ry * ry
    cdef double sx, sy, den, t, z, ta, tb, t0, t1, za, zb
    if ln2 <= eps * eps:
        if _psd0(x1, y1, ax, ay, bx, by) > eps:
            return False
        return _dmin(z1, z2) <= hi and _dmax(z1, z2) >= lo
    if not _seg_intersect(x1, y1, x2, y2, ax, ay, bx, by, eps):
        return False
    sx = bx - ax
    sy = by - ay
    den = rx * sy - ry * sx
    if fabs(den) > 1e-12 * sqrt(ln2 * (sx * sx + sy * sy)):
        t = ((ax - x1) * sy - (ay - y1) * sx) / den
        t = _dmin(1.0, _dmax(0.0, t))
        z = z1 + t * (z2 - z1)
        return lo <= z <= hi
    ta = ((ax - x1) * rx + (ay - y1) * ry) / ln2
    tb = ((bx - x1) * rx + (by - y1) * ry) / ln2
    t0 = _dmax(0.0, _dmin(ta, tb))
    t1 = _dmin(1.0, _dmax(ta, tb))
    if t1 < t0:
        t0 = _dmin(1.0, _dmax(0.0, t0))
        t1 = t0
    za = z1 + t0 * (z2 - z1)
    zb = z1 + t1 * (z2 - z1)
    return _dmin(za, zb) <= hi and _dmax(za, zb) >= lo


def seg_intersect(double ax, double ay, double bx, double by,
                  double cx, double cy, double dx, double dy, double eps):
    return bool(_seg_intersect(ax, ay, bx, by, cx, cy, dx, dy, eps))


def seg_param(double ax, double ay, double bx, double by,
              double cx, double cy, double dx, double dy):
    return _seg_param(ax, ay, bx, by, cx, cy, dx, dy)


def gate_hit(double x1, double y1, double z1, double x2, double y2, double z2,
             double ax, double ay, double bx, double by, double hlo, double hhi, double eps):
    return bool(_gate_hit(x1, y1, z1, x2, y2, z2, ax, ay, bx, by, hlo, hhi, eps))


def geodesic_reach(indptr, indices, int k):
    """Sorted CSR rows of all nodes within k edges of each node (itself included)."""
    cdef long[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64).astype(np.int_)
    cdef long[::1] ix = np.ascontiguousarray(indices, dtype=np.int64).astype(np.int_)
    cdef Py_ssize_t n = ip.shape[0] - 1
    cdef long[::1] mark = np.full(max(n, 1), -1, dtype=np.int_)
    cdef long[::1] frontier = np.zeros(max(n, 1), dtype=np.int_)
    out_ptr = np.zeros(n + 1, dtype=np.int_)
    cdef long[::1] optr = out_ptr
    cdef Py_ssize_t cap = 64 * max(n, 1)
    out = np.zeros(cap, dtype=np.int_)
    cdef long[::1] ov = out
    cdef Py_ssize_t i, f0, f1, nf, u, q, v, level, a, b, pos
    cdef long key
    for i in range(n):
        frontier[0] = i
        mark[i] = i
        f0 = 0
        f1 = 1
        nf = 1
        for level in range(k):
            for q in range(f0, f1):
                u = frontier[q]
                for v in range(ip[u], ip[u + 1]):
                    if mark[ix[v]] != i:
                        mark[ix[v]] = i
                        frontier[nf] = ix[v]
                        nf += 1
            f0 = f1
            f1 = nf
        pos = optr[i]
        if pos + nf > cap:
            cap = 2 * (pos + nf)
            out = np.concatenate([out, np.zeros(cap - out.shape[0], dtype=np.int_)])
            ov = out
        # insertion sort into the output row
        for a in range(nf):
            key = frontier[a]
            b = a
            while b > 0 and ov[pos + b - 1] > key:
                ov[pos + b] = ov[pos + b - 1]
                b -= 1
            ov[pos + b] = key
        optr[i + 1] = pos + nf
    return out_ptr, out[: optr[n]].copy()


cdef inline void _project(const double* xs, const double* ys, Py_ssize_t n, double ax, double ay,
                          double* lo, double* hi) noexcept nogil:
    cdef Py_ssize_t k
    cdef double s
    lo[0] = INFINITY
    hi[0] = -INFINITY
    for k in range(n):
        s = xs[k] * ax + ys[k] * ay
        if s < lo[0]:
            lo[0] = s
        if s > hi[0]:
            hi[0] = s


cdef inline double _sep_axis(const double* axs, const double* ays, Py_ssize_t na,
                             const double* bxs, const double* bys, Py_ssize_t nb,
                             double ax, double ay) noexcept nogil:
    cdef double alo, ahi, blo, bhi, g1, g2
    _project(axs, ays, na, ax, ay, &alo, &ahi)
    _project(bxs, bys, nb, ax, ay, &blo, &bhi)
    g1 = blo - ahi
    g2 = alo - bhi
    return g1 if g1 > g2 else g2


cdef inline bint _key_less(double a0, double a1, double a2, double a3,
                           double b0, double b1, double b2, double b3) noexcept nogil:
    if a0 != b0:
        return a0 < b0
    if a1 != b1:
        return a1 < b1
    if a2 != b2:
        return a2 < b2
    return a3 < b3


cdef class PolySet:
    """Obstacle footprints (convex, counter-clockwise) with heights."""

    cdef public Py_ssize_t m
    cdef public double eps
    cdef double[::1] vx, vy, nx, ny, h
    cdef long[::1] off
    cdef double[:, ::1] bbox
    cdef object _keep

    def __init__(self, verts, offsets, heights, eps):
        verts = np.ascontiguousarray(verts, dtype=np.float64)
        cdef long[::1] off = np.ascontiguousarray(offsets, dtype=np.int64).astype(np.int_)
        self.off = off
        self.m = off.shape[0] - 1
        self.eps = float(eps)
        vx = np.ascontiguousarray(verts[:, 0])
        vy = np.ascontiguousarray(verts[:, 1])
        self.vx = vx
        self.vy = vy
        self.h = np.ascontiguousarray(heights, dtype=np.float64)
        nx = np.zeros(len(vx))
        ny = np.zeros(len(vx))
        bbox = np.zeros((self.m, 4))
        cdef Py_ssize_t i, k, n, a, b
        cdef double ex, ey, ln
        for i in range(self.m):
            a = off[i]
            b = off[i + 1]
            n = b - a
            for k in range(n):
                ex = vx[a + (k + 1) % n] - vx[a + k]
                ey = vy[a + (k + 1) % n] - vy[a + k]
                ln = sqrt(ex * ex + ey * ey)
                nx[a + k] = ey / ln
                ny[a + k] = -ex / ln
            bbox[i, 0] = vx[a:b].min()
            bbox[i, 1] = vy[a:b].min()
            bbox[i, 2] = vx[a:b].max()
            bbox[i, 3] = vy[a:b].max()
        self.nx = nx
        self.ny = ny
        self.bbox = bbox

    # -- collision -----------------------------------------------------

    cdef bint _clip(self, Py_ssize_t i, double x1, double y1, double x2, double y2,
                    double* t0out, double* t1out) noexcept nogil:
        cdef Py_ssize_t a = self.off[i]
        cdef Py_ssize_t b = self.off[i + 1]
        cdef Py_ssize_t k
        cdef double eps = self.eps
        cdef double dx = x2 - x1
        cdef double dy = y2 - y1
        cdef double t0 = 0.0
        cdef double t1 = 1.0
        cdef double num, den, t
        for k in range(a, b):
            num = self.nx[k] * (x1 - self.vx[k]) + self.ny[k] * (y1 - self.vy[k]) - eps
            den = self.nx[k] * dx + self.ny[k] * dy
            if den == 0.0:
                if num > 0.0:
                    return False
            elif den > 0.0:
                t = -num / den
                if t < t1:
                    t1 = t
            else:
                t = -num / den
                if t > t0:
                    t0 = t
            if t0 > t1:
                return False
        t0out[0] = t0
        t1out[0] = t1
        return True

    cdef Py_ssize_t _segment_hit(self, double x1, double y1, double x2, double y2) noexcept nogil:
        cdef double eps = self.eps
        cdef double lox = _dmin(x1, x2) - eps
        cdef double hix = _dmax(x1, x2) + eps
        cdef double loy = _dmin(y1, y2) - eps
        cdef double hiy = _dmax(y1, y2) + eps
        cdef Py_ssize_t i
        cdef double t0, t1
        for i in range(self.m):
            if self.bbox[i, 0] > hix or self.bbox[i, 2] < lox or self.bbox[i, 1] > hiy or self.bbox[i, 3] < loy:
                continue
            if self._clip(i, x1, y1, x2, y2, &t0, &t1):
                return i
        return -1

    cdef Py_ssize_t _segment_hit3(self, double x1, double y1, double z1,
                                  double x2, double y2, double z2) noexcept nogil:
        cdef double eps = self.eps
        cdef double lox = _dmin(x1, x2) - eps
        cdef double hix = _dmax(x1, x2) + eps
        cdef double loy = _dmin(y1, y2) - eps
        cdef double hiy = _dmax(y1, y2) + eps
        cdef double zlo = _dmin(z1, z2)
        cdef Py_ssize_t i
        cdef double t0, t1, za, zb
        for i in range(self.m):
            if self.bbox[i, 0] > hix or self.bbox[i, 2] < lox or self.bbox[i, 1] > hiy or self.bbox[i, 3] < loy:
                continue
            if zlo > self.h[i] + eps:
                continue
            if not self._clip(i, x1, y1, x2, y2, &t0, &t1):
                continue
            za = z1 + t0 * (z2 - z1)
            zb = z1 + t1 * (z2 - z1)
            if _dmin(za, zb) <= self.h[i] + eps:
                return i
        return -1

    def segment_hit(self, double x1, double y1, double x2, double y2):
        return self._segment_hit(x1, y1, x2, y2)

    def segment_free(self, double x1, double y1, double x2, double y2):
        return self._segment_hit(x1, y1, x2, y2) < 0

    def segment_hit3(self, double x1, double y1, double z1, double x2, double y2, double z2):
        return self._segment_hit3(x1, y1, z1, x2, y2, z2)

    def segment_free3(self, double x1, double y1, double z1, double x2, double y2, double z2):
        return self._segment_hit3(x1, y1, z1, x2, y2, z2) < 0

    def point_free(self, double x, double y):
        return self._segment_hit(x, y, x, y) < 0

    def point_free3(self, double x, double y, double z):
        return self._segment_hit3(x, y, z, x, y, z) < 0

    cdef double _poly_dist(self, Py_ssize_t i, double x, double y) noexcept nogil:
        cdef Py_ssize_t a = self.off[i]
        cdef Py_ssize_t b = self.off[i + 1]
        cdef Py_ssize_t n = b - a
        cdef Py_ssize_t k
        cdef bint inside = True
        cdef double best, d
        for k in range(a, b):
            if self.nx[k] * (x - self.vx[k]) + self.ny[k] * (y - self.vy[k]) > 0.0:
                inside = False
                break
        if inside:
            return 0.0
        best = INFINITY
        for k in range(n):
            d = _psd0(x, y, self.vx[a + k], self.vy[a + k], self.vx[a + (k + 1) % n], self.vy[a + (k + 1) % n])
            if d < best:
                best = d
        return best

    cdef double _clearance(self, double x, double y, double z, bint three) noexcept nogil:
        cdef double best = INFINITY
        cdef Py_ssize_t i
        cdef double ddx, ddy, ddz, d
        for i in range(self.m):
            ddx = _dmax(_dmax(self.bbox[i, 0] - x, 0.0), x - self.bbox[i, 2])
            ddy = _dmax(_dmax(self.bbox[i, 1] - y, 0.0), y - self.bbox[i, 3])
            ddz = _dmax(0.0, z - self.h[i]) if three else 0.0
            if ddx * ddx + ddy * ddy + ddz * ddz >= best * best:
                continue
            d = self._poly_dist(i, x, y)
            if ddz > 0.0:
                d = sqrt(d * d + ddz * ddz)
            if d < best:
                best = d
        return best

    def clearance(self, double x, double y):
        return self._clearance(x, y, 0.0, False)

    def clearance3(self, double x, double y, double z):
        return self._clearance(x, y, z, True)

    # -- obstacle distance and the Gabriel test --------------------------

    cdef double _distance(self, Py_ssize_t i, Py_ssize_t j, double* out) noexcept:
        cdef Py_ssize_t ai = self.off[i]
        cdef Py_ssize_t ni = self.off[i + 1] - ai
        cdef Py_ssize_t aj = self.off[j]
        cdef Py_ssize_t nj = self.off[j + 1] - aj
        cdef Py_ssize_t nc = 2 * ni * nj
        cdef double* c = <double*> malloc(5 * nc * sizeof(double))
        cdef Py_ssize_t a, k, p, q, lo, hi, best
        cdef double d, qx, qy, dmin, scale, s, tol, ex, ey, nx, ny, dx, dy
        cdef bint aligned
        p = 0
        for a in range(ni):
            for k in range(nj):
                d = _psd(self.vx[ai + a], self.vy[ai + a], self.vx[aj + k], self.vy[aj + k],
                         self.vx[aj + (k + 1) % nj], self.vy[aj + (k + 1) % nj], &qx, &qy)
                c[5 * p] = d
                c[5 * p + 1] = self.vx[ai + a]
                c[5 * p + 2] = self.vy[ai + a]
                c[5 * p + 3] = qx
                c[5 * p + 4] = qy
                p += 1
        for a in range(nj):
            for k in range(ni):
                d = _psd(self.vx[aj + a], self.vy[aj + a], self.vx[ai + k], self.vy[ai + k],
                         self.vx[ai + (k + 1) % ni], self.vy[ai + (k + 1) % ni], &qx, &qy)
                c[5 * p] = d
                c[5 * p + 1] = qx
                c[5 * p + 2] = qy
                c[5 * p + 3] = self.vx[aj + a]
                c[5 * p + 4] = self.vy[aj + a]
                p += 1
        dmin = INFINITY
        scale = 0.0
        for p in range(nc):
            if c[5 * p] < dmin:
                dmin = c[5 * p]
            s = fabs(c[5 * p + 1]) + fabs(c[5 * p + 2])
            if s > scale:
                scale = s
        tol = 1e-12 * (1.0 + dmin) + 1e-12 * scale
        # first close candidate and count
        cdef Py_ssize_t first = -1
        cdef Py_ssize_t count = 0
        for p in range(nc):
            if c[5 * p] <= dmin + tol:
                if first < 0:
                    first = p
                count += 1
        if count == 1:
            out[0] = c[5 * first + 1]
            out[1] = c[5 * first + 2]
            out[2] = c[5 * first + 3]
            out[3] = c[5 * first + 4]
            free(c)
            return dmin
        if dmin > 0.0:
            ex = (c[5 * first + 3] - c[5 * first + 1]) / c[5 * first]
            ey = (c[5 * first + 4] - c[5 * first + 2]) / c[5 * first]
            nx = -ey
            ny = ex
            lo = first
            hi = first
            aligned = True
            for p in range(nc):
                if not (c[5 * p] <= dmin + tol):
                    continue
                dx = c[5 * p + 3] - c[5 * p + 1]
                dy = c[5 * p + 4] - c[5 * p + 2]
                if fabs(dx * ey - dy * ex) > 1e-9 * (1.0 + dmin):
                    aligned = False
                    break
                s = c[5 * p + 1] * nx + c[5 * p + 2] * ny
                if s < c[5 * lo + 1] * nx + c[5 * lo + 2] * ny:
                    lo = p
                if s > c[5 * hi + 1] * nx + c[5 * hi + 2] * ny:
                    hi = p
            if aligned:
                out[0] = 0.5 * (c[5 * lo + 1] + c[5 * hi + 1])
                out[1] = 0.5 * (c[5 * lo + 2] + c[5 * hi + 2])
                out[2] = 0.5 * (c[5 * lo + 3] + c[5 * hi + 3])
                out[3] = 0.5 * (c[5 * lo + 4] + c[5 * hi + 4])
                free(c)
                return dmin
        best = -1
        cdef double k0, k1, k2, k3, b0 = 0.0, b1 = 0.0, b2 = 0.0, b3 = 0.0
        for p in range(nc):
            if not (c[5 * p] <= dmin + tol):
                continue
            if _key_less(c[5 * p + 1], c[5 * p + 2], c[5 * p + 3], c[5 * p + 4],
                         c[5 * p + 3], c[5 * p + 4], c[5 * p + 1], c[5 * p + 2]) or (
                    c[5 * p + 1] == c[5 * p + 3] and c[5 * p + 2] == c[5 * p + 4]):
                k0 = c[5 * p + 1]
                k1 = c[5 * p + 2]
                k2 = c[5 * p + 3]
                k3 = c[5 * p + 4]
            else:
                k0 = c[5 * p + 3]
                k1 = c[5 * p + 4]
                k2 = c[5 * p + 1]
                k3 = c[5 * p + 2]
            if best < 0 or _key_less(k0, k1, k2, k3, b0, b1, b2, b3):
                best = p
                b0 = k0
                b1 = k1
                b2 = k2
                b3 = k3
        out[0] = c[5 * best + 1]
        out[1] = c[5 * best + 2]
        out[2] = c[5 * best + 3]
        out[3] = c[5 * best + 4]
        free(c)
        return dmin

    def distance(self, Py_ssize_t i, Py_ssize_t j):
        cdef double out[4]
        cdef double d = self._distance(i, j, out)
        return out[0], out[1], out[2], out[3], d

    cdef bint _setup(self, Py_ssize_t i, Py_ssize_t j, double* st) noexcept:
        """st: pix piy pjx pjy d rx0..3 ry0..3 ex ey cx cy r bb0..3 (22 values)."""
        cdef double d = self._distance(i, j, st)
        st[4] = d
        if d <= self.eps:
            return False
        cdef double pix = st[0], piy = st[1], pjx = st[2], pjy = st[3]
        cdef double ex = (pjx - pix) / d
        cdef double ey = (pjy - piy) / d
        cdef double nx = -ey
        cdef double ny = ex
        cdef double a1, b1, a2, b2, lo, hi, s0, s1
        cdef Py_ssize_t oi = self.off[i]
        cdef Py_ssize_t oj = self.off[j]
        _project(&self.vx[oi], &self.vy[oi], self.off[i + 1] - oi, nx, ny, &a1, &b1)
        _project(&self.vx[oj], &self.vy[oj], self.off[j + 1] - oj, nx, ny, &a2, &b2)
        lo = a1 if a1 > a2 else a2
        hi = b1 if b1 < b2 else b2
        if hi < lo:
            lo = pix * nx + piy * ny
            hi = lo
        s0 = pix * ex + piy * ey
        s1 = pjx * ex + pjy * ey
        st[5] = s0 * ex + lo * nx
        st[6] = s1 * ex + lo * nx
        st[7] = s1 * ex + hi * nx
        st[8] = s0 * ex + hi * nx
        st[9] = s0 * ey + lo * ny
        st[10] = s1 * ey + lo * ny
        st[11] = s1 * ey + hi * ny
        st[12] = s0 * ey + hi * ny
        st[13] = ex
        st[14] = ey
        st[15] = 0.5 * (pix + pjx)
        st[16] = 0.5 * (piy + pjy)
        st[17] = 0.5 * d
        cdef double r = st[17]
        cdef double mnx = _dmin(_dmin(st[5], st[6]), _dmin(st[7], st[8]))
        cdef double mxx = _dmax(_dmax(st[5], st[6]), _dmax(st[7], st[8]))
        cdef double mny = _dmin(_dmin(st[9], st[10]), _dmin(st[11], st[12]))
        cdef double mxy = _dmax(_dmax(st[9], st[10]), _dmax(st[11], st[12]))
        st[18] = _dmin(st[15] - r, mnx)
        st[19] = _dmin(st[16] - r, mny)
        st[20] = _dmax(st[15] + r, mxx)
        st[21] = _dmax(st[16] + r, mxy)
        return True

    cdef bint _hits(self, Py_ssize_t k, double* st) noexcept nogil:
        cdef double eps = self.eps
        if (self.bbox[k, 0] > st[20] + eps or self.bbox[k, 2] < st[18] - eps
                or self.bbox[k, 1] > st[21] + eps or self.bbox[k, 3] < st[19] - eps):
            return False
        if self._poly_dist(k, st[15], st[16]) <= st[17] + eps:
            return True
        cdef Py_ssize_t a = self.off[k]
        cdef Py_ssize_t n = self.off[k + 1] - a
        cdef double ex = st[13]
        cdef double ey = st[14]
        cdef double best = _sep_axis(&st[5], &st[9], 4, &self.vx[a], &self.vy[a], n, ex, ey)
        cdef double g = _sep_axis(&st[5], &st[9], 4, &self.vx[a], &self.vy[a], n, -ey, ex)
        cdef Py_ssize_t q
        if g > best:
            best = g
        if best > eps:
            return False
        for q in range(n):
            g = _sep_axis(&st[5], &st[9], 4, &self.vx[a], &self.vy[a], n, self.nx[a + q], self.ny[a + q])
            if g > eps:
                return False
        return True

    def blocks(self, Py_ssize_t i, Py_ssize_t j, Py_ssize_t k):
        cdef double st[22]
        if not self._setup(i, j, st):
            return False
        return bool(self._hits(k, st))

    cdef inline int _tester(self, Py_ssize_t k, Py_ssize_t i, Py_ssize_t j, double* st, double hbar,
                            double* hl) noexcept nogil:
        """0: keep going, 1: the tester invalidates the pair."""
        if k == i or k == j:
            return 0
        if self.h[k] < hbar and self.h[k] <= hl[0]:
            return 0
        if self._hits(k, st):
            if self.h[k] >= hbar:
                return 1
            hl[0] = self.h[k]
        return 0

    def check_pairs(self, ii, jj, tptr, tidx, int mode):
        cdef long[::1] vi = np.ascontiguousarray(ii, dtype=np.int64).astype(np.int_)
        cdef long[::1] vj = np.ascontiguousarray(jj, dtype=np.int64).astype(np.int_)
        cdef long[::1] tp = np.ascontiguousarray(tptr, dtype=np.int64).astype(np.int_)
        cdef long[::1] ti = np.ascontiguousarray(tidx, dtype=np.int64).astype(np.int_)
        cdef Py_ssize_t n = vi.shape[0]
        status = [0] * n
        dd = [0.0] * n
        pix_ = [0.0] * n
        piy_ = [0.0] * n
        pjx_ = [0.0] * n
        pjy_ = [0.0] * n
        hlow = [0.0] * n
        cdef double st[22]
        cdef Py_ssize_t p, i, j, k, q, qa, qb, r, rb
        cdef int valid
        cdef double hbar, hl
        for p in range(n):
            i = vi[p]
            j = vj[p]
            if not self._setup(i, j, st):
                status[p] = 2
                dd[p] = st[4]
                pix_[p] = st[0]
                piy_[p] = st[1]
                pjx_[p] = st[2]
                pjy_[p] = st[3]
                continue
            dd[p] = st[4]
            pix_[p] = st[0]
            piy_[p] = st[1]
            pjx_[p] = st[2]
            pjy_[p] = st[3]
            hbar = _dmin(self.h[i], self.h[j])
            valid = 1
            hl = 0.0
            if mode == 1:
                for k in range(self.m):
                    if self._tester(k, i, j, st, hbar, &hl):
                        valid = 0
                        break
            elif mode == 0:
                for q in range(tp[p], tp[p + 1]):
                    if self._tester(ti[q], i, j, st, hbar, &hl):
                        valid = 0
                        break
            else:
                # union of the sorted rows i and j
                q = tp[i]
                qb = tp[i + 1]
                r = tp[j]
                rb = tp[j + 1]
                while q < qb or r < rb:
                    if r >= rb or (q < qb and ti[q] < ti[r]):
                        k = ti[q]
                        q += 1
                    elif q >= qb or ti[r] < ti[q]:
                        k = ti[r]
                        r += 1
                    else:
                        k = ti[q]
                        q += 1
                        r += 1
                    if self._tester(k, i, j, st, hbar, &hl):
                        valid = 0
                        break
            status[p] = valid
            hlow[p] = hl if valid else 0.0
        return status, dd, pix_, piy_, pjx_, pjy_, hlow


cdef class PassageSet:
    """All passage segments; the brute-force traversal check."""

    cdef double[::1] ax, ay, bx, by, hlo, hhi
    cdef public Py_ssize_t n
    cdef public double eps

    def __init__(self, ax, ay, bx, by, hlo, hhi, eps):
        self.ax = np.ascontiguousarray(ax, dtype=np.float64)
        self.ay = np.ascontiguousarray(ay, dtype=np.float64)
        self.bx = np.ascontiguousarray(bx, dtype=np.float64)
        self.by = np.ascontiguousarray(by, dtype=np.float64)
        self.hlo = np.ascontiguousarray(hlo, dtype=np.float64)
        self.hhi = np.ascontiguousarray(hhi, dtype=np.float64)
        self.n = self.ax.shape[0]
        self.eps = float(eps)

    def crossings(self, double x1, double y1, double x2, double y2):
        found = []
        cdef Py_ssize_t p
        for p in range(self.n):
            if _seg_intersect(x1, y1, x2, y2, self.ax[p], self.ay[p], self.bx[p], self.by[p], self.eps):
                found.append((_seg_param(x1, y1, x2, y2, self.ax[p], self.ay[p], self.bx[p], self.by[p]), p))
        if not found:
            return ()
        found.sort()
        return tuple([f[1] for f in found])

    def crossings3(self, double x1, double y1, double z1, double x2, double y2, double z2):
        found = []
        cdef Py_ssize_t p
        for p in range(self.n):
            if _gate_hit(x1, y1, z1, x2, y2, z2, self.ax[p], self.ay[p], self.bx[p], self.by[p],
                         self.hlo[p], self.hhi[p], self.eps):
                found.append((_seg_param(x1, y1, x2, y2, self.ax[p], self.ay[p], self.bx[p], self.by[p]), p))
        if not found:
            return ()
        found.sort()
        return tuple([f[1] for f in found])


cdef class CellWalker:
    """Cell adjacency walk along an edge plus point location."""

    cdef long[::1] sptr, snb, spid, skind, vptr, vpid, rptr, rv
    cdef double[::1] sax, say, sbx, sby, gax, gay, gbx, gby, ghlo, ghhi, rx, ry
    cdef double[:, ::1] cbox
    cdef public Py_ssize_t ncell
    cdef public double eps
    cdef public Py_ssize_t max_steps

    def __init__(self, sptr, sax, say, sbx, sby, snb, spid, skind, vptr, vpid,
                 gax, gay, gbx, gby, ghlo, ghhi, rptr, rv, rx, ry, eps, max_steps):
        def I(a):
            return np.ascontiguousarray(a, dtype=np.int64).astype(np.int_)

        def F(a):
            return np.ascontiguousarray(a, dtype=np.float64)

        self.sptr = I(sptr)
        self.sax = F(sax)
        self.say = F(say)
        self.sbx = F(sbx)
        self.sby = F(sby)
        self.snb = I(snb)
        self.spid = I(spid)
        self.skind = I(skind)
        self.vptr = I(vptr)
        self.vpid = I(vpid)
        self.gax = F(gax)
        self.gay = F(gay)
        self.gbx = F(gbx)
        self.gby = F(gby)
        self.ghlo = F(ghlo)
        self.ghhi = F(ghhi)
        self.rptr = I(rptr)
        self.rv = I(rv)
        self.rx = F(rx)
        self.ry = F(ry)
        self.ncell = self.sptr.shape[0] - 1
        self.eps = float(eps)
        self.max_steps = int(max_steps)
        cbox = np.zeros((self.ncell, 4))
        cdef Py_ssize_t c, r
        for c in range(self.ncell):
            lox = loy = np.inf
            hix = hiy = -np.inf
            for r in range(self.rptr[c], self.rptr[c + 1]):
                if self.rv[r + 1] > self.rv[r]:
                    seg_x = np.asarray(self.rx[self.rv[r]:self.rv[r + 1]])
                    seg_y = np.asarray(self.ry[self.rv[r]:self.rv[r + 1]])
                    lox = min(lox, seg_x.min())
                    hix = max(hix, seg_x.max())
                    loy = min(loy, seg_y.min())
                    hiy = max(hiy, seg_y.max())
            cbox[c, 0] = lox
            cbox[c, 1] = loy
            cbox[c, 2] = hix
            cbox[c, 3] = hiy
        self.cbox = cbox

    cdef Py_ssize_t _step(self, Py_ssize_t cell, double x1, double y1, double x2, double y2,
                          double tcur, double tarc, Py_ssize_t last_pid, Py_ssize_t last_side,
                          bint arcs, double* tout) noexcept nogil:
        cdef double best_t = INFINITY
        cdef Py_ssize_t best = -1
        cdef Py_ssize_t s, pid
        cdef double t
        for s in range(self.sptr[cell], self.sptr[cell + 1]):
            if self.skind[s] == C_KIND_ARC and not arcs:
                continue
            pid = self.spid[s]
            if pid >= 0 and pid == last_pid:
                continue
            if s == last_side:
                continue
            if not _seg_intersect(x1, y1, x2, y2, self.sax[s], self.say[s], self.sbx[s], self.sby[s], self.eps):
                continue
            t = _seg_param(x1, y1, x2, y2, self.sax[s], self.say[s], self.sbx[s], self.sby[s])
            if t < tcur or t >= best_t:
                continue
            if pid < 0 and t <= tarc:
                continue
            best_t = t
            best = s
        tout[0] = best_t
        return best

    def walk(self, Py_ssize_t cell, double x1, double y1, double x2, double y2):
        cdef double tcur = 0.0
        cdef double t
        cdef Py_ssize_t last_pid = -1
        cdef Py_ssize_t s, it
        crossed = None
        for it in range(self.max_steps):
            s = self._step(cell, x1, y1, x2, y2, tcur, -1.0, last_pid, -1, False, &t)
            if s < 0:
                if crossed is None:
                    return cell, ()
                return cell, tuple(crossed)
            if crossed is None:
                crossed = []
            crossed.append(self.spid[s])
            last_pid = self.spid[s]
            tcur = t
            cell = self.snb[s]
            if cell < 0:
                return -1, tuple(crossed)
        raise WalkStuck("cell walk exceeded its step budget")

    cdef Py_ssize_t _twin(self, Py_ssize_t cell, Py_ssize_t s) noexcept nogil:
        cdef Py_ssize_t u
        for u in range(self.sptr[cell], self.sptr[cell + 1]):
            if (self.spid[u] < 0 and self.sax[u] == self.sax[s] and self.say[u] == self.say[s]
                    and self.sbx[u] == self.sbx[s] and self.sby[u] == self.sby[s]):
                return u
        return -1

    def _walk_proj(self, Py_ssize_t cell, double x1, double y1, double x2, double y2):
        visited = [cell]
        sides = []
        cdef double tcur = 0.0
        cdef double t
        cdef Py_ssize_t last_pid = -1
        cdef Py_ssize_t last_side = -1
        cdef double tarc = -1.0
        cdef Py_ssize_t s, nb, it
        for it in range(self.max_steps):
            s = self._step(cell, x1, y1, x2, y2, tcur, tarc, last_pid, last_side, True, &t)
            if s < 0:
                return cell, visited, sides
            sides.append(s)
            last_pid = self.spid[s]
            tcur = t
            tarc = t
            nb = self.snb[s]
            if nb < 0:
                return -1, visited, sides
            last_side = self._twin(nb, s) if last_pid < 0 else -1
            cell = nb
            visited.append(cell)
        raise WalkStuck("cell walk exceeded its step budget")

    def cells_along(self, Py_ssize_t cell, double x1, double y1, double x2, double y2):
        return tuple(self._walk_proj(cell, x1, y1, x2, y2)[1])

    def walk3(self, Py_ssize_t cell, double x1, double y1, double z1, double x2, double y2, double z2):
        end, visited, sides = self._walk_proj(cell, x1, y1, x2, y2)
        cdef double eps = self.eps
        cdef Py_ssize_t s, pid, c, v
        found = []
        seen = set()
        for s in sides:
            pid = self.spid[s]
            if pid < 0 or pid in seen:
                continue
            seen.add(pid)
            if _gate_hit(x1, y1, z1, x2, y2, z2, self.gax[pid], self.gay[pid], self.gbx[pid], self.gby[pid],
                         self.ghlo[pid], self.ghhi[pid], eps):
                found.append((_seg_param(x1, y1, x2, y2, self.gax[pid], self.gay[pid], self.gbx[pid],
                                         self.gby[pid]), pid))
        for c in visited:
            for v in range(self.vptr[c], self.vptr[c + 1]):
                pid = self.vpid[v]
                if pid in seen:
                    continue
                seen.add(pid)
                if _gate_hit(x1, y1, z1, x2, y2, z2, self.gax[pid], self.gay[pid], self.gbx[pid],
                             self.gby[pid], self.ghlo[pid], self.ghhi[pid], eps):
                    found.append((_seg_param(x1, y1, x2, y2, self.gax[pid], self.gay[pid], self.gbx[pid],
                                             self.gby[pid]), pid))
        found.sort()
        return end, tuple([f[1] for f in found])

    cdef Py_ssize_t _locate(self, double x, double y) noexcept nogil:
        cdef double eps = self.eps
        cdef Py_ssize_t c, r, v0, v1, n, k
        cdef int wn
        cdef bint on
        cdef double xa, ya, xb, yb
        for c in range(self.ncell):
            if (x < self.cbox[c, 0] - eps or x > self.cbox[c, 2] + eps
                    or y < self.cbox[c, 1] - eps or y > self.cbox[c, 3] + eps):
                continue
            wn = 0
            on = False
            for r in range(self.rptr[c], self.rptr[c + 1]):
                v0 = self.rv[r]
                v1 = self.rv[r + 1]
                n = v1 - v0
                for k in range(n):
                    xa = self.rx[v0 + k]
                    ya = self.ry[v0 + k]
                    xb = self.rx[v0 + (k + 1) % n]
                    yb = self.ry[v0 + (k + 1) % n]
                    if _psd0(x, y, xa, ya, xb, yb) <= eps:
                        on = True
                        break
                    if ya <= y:
                        if yb > y and (xb - xa) * (y - ya) - (x - xa) * (yb - ya) > 0.0:
                            wn += 1
                    elif yb <= y and (xb - xa) * (y - ya) - (x - xa) * (yb - ya) < 0.0:
                        wn -= 1
                if on:
                    break
            if on or wn != 0:
                return c
        return -1

    def locate(self, double x, double y):
        return self._locate(x, y)
