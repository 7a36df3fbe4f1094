# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled mask kernels.

Mirrors vqaedit.masks._pycore exactly; see that module for the contract.
"""

import numpy as np

from libc.math cimport ceil

cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "compiled"


def fill_polygons(list polygons, int width, int height):
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] mask = np.zeros((height, width), dtype=np.uint8)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] verts
    cdef double[64] xbuf
    cdef double* xs
    cdef double x0, y0, x1, y1, yc, xa, xb, tmp
    cdef int n, row, i, j, k, ncross, c0, c1, c, ymin, ymax
    cdef bint heap

    for poly in polygons:
        verts = np.ascontiguousarray(poly, dtype=np.float64)
        n = verts.shape[0]
        heap = n + 1 > 64
        if heap:
            xs_arr = np.empty(n + 1, dtype=np.float64)
            xs = <double*> cnp.PyArray_DATA(xs_arr)
        else:
            xs = xbuf
        ymin = <int> (verts[:, 1].min() - 1.0)
        ymax = <int> (verts[:, 1].max() + 1.0)
        if ymin < 0:
            ymin = 0
        if ymax > height - 1:
            ymax = height - 1
        for row in range(ymin, ymax + 1):
            yc = row + 0.5
            ncross = 0
            for i in range(n):
                x0 = verts[i, 0]
                y0 = verts[i, 1]
                x1 = verts[(i + 1) % n, 0]
                y1 = verts[(i + 1) % n, 1]
                if (y0 <= yc < y1) or (y1 <= yc < y0):
                    xs[ncross] = x0 + (yc - y0) * (x1 - x0) / (y1 - y0)
                    ncross += 1
            # insertion sort; polygons have few edges
            for i in range(1, ncross):
                tmp = xs[i]
                j = i - 1
                while j >= 0 and xs[j] > tmp:
                    xs[j + 1] = xs[j]
                    j -= 1
                xs[j + 1] = tmp
            for k in range(0, ncross - 1, 2):
                xa = xs[k]
                xb = xs[k + 1]
                c0 = <int> ceil(xa - 0.5)
                c1 = <int> ceil(xb - 0.5)
                if c0 < 0:
                    c0 = 0
                if c1 > width:
                    c1 = width
                for c in range(c0, c1):
                    mask[row, c] = 1
    return mask


def dilate_square(cnp.ndarray[cnp.uint8_t, ndim=2] mask, int radius):
    """Separable shift-OR: contiguous byte loops the compiler vectorizes."""
    cdef int h = mask.shape[0]
    cdef int w = mask.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] src = np.ascontiguousarray(mask)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] tmp = src.copy()
    cdef cnp.uint8_t* sp = <cnp.uint8_t*> cnp.PyArray_DATA(src)
    cdef cnp.uint8_t* tp = <cnp.uint8_t*> cnp.PyArray_DATA(tmp)
    cdef cnp.uint8_t* op
    cdef int y, d, i, n, shift

    if radius == 0:
        return src.copy()

    # horizontal: OR each row with itself shifted by 1..radius both ways
    for d in range(1, radius + 1):
        n = w - d
        if n <= 0:
            continue
        for y in range(h):
            for i in range(n):
                tp[y * w + i] |= sp[y * w + i + d]
            for i in range(n):
                tp[y * w + i + d] |= sp[y * w + i]
    # vertical: OR whole shifted row blocks (contiguous memory)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] out = tmp.copy()
    op = <cnp.uint8_t*> cnp.PyArray_DATA(out)
    for d in range(1, radius + 1):
        shift = d * w
        n = (h - d) * w
        if n <= 0:
            continue
        for i in range(n):
            op[i] |= tp[i + shift]
        for i in range(n):
            op[i + shift] |= tp[i]
    return out


def decode_counts(cnp.ndarray[cnp.int64_t, ndim=1] counts, int height, int width):
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] mask = np.zeros((height, width), dtype=np.uint8, order="F")
    cdef cnp.uint8_t[::1, :] view = mask
    cdef Py_ssize_t i, j, pos = 0
    cdef cnp.uint8_t val = 0
    for i in range(counts.shape[0]):
        if val:
            for j in range(counts[i]):
                view[(pos + j) % height, (pos + j) // height] = 1
        pos += counts[i]
        val = 1 - val
    return np.ascontiguousarray(mask)


def encode_counts(cnp.ndarray[cnp.uint8_t, ndim=2] mask):
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] fmask = np.asfortranarray(mask)
    cdef cnp.uint8_t[::1, :] view = fmask
    cdef int h = mask.shape[0]
    cdef int w = mask.shape[1]
    # at most one run per pixel plus the leading zero run
    cdef cnp.ndarray[cnp.int64_t, ndim=1] buf = np.empty(h * w + 1, dtype=np.int64)
    cdef Py_ssize_t n = 0
    cdef cnp.uint8_t cur = 0
    cdef long long run = 0
    cdef int x, y
    for x in range(w):
        for y in range(h):
            if view[y, x] == cur:
                run += 1
            else:
                buf[n] = run
                n += 1
                cur = view[y, x]
                run = 1
    if h * w > 0:
        buf[n] = run
        n += 1
    return buf[:n].copy()
