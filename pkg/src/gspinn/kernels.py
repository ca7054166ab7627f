"""Fused elementwise kernels for the tanh jet layer and its adjoint.

Arrays are stacked jets of shape (channels, N, width); channel 0 is the value
and the integer arguments give the position of the t, x, tt, tx, xx channels
(-1 when absent).  numba is used when importable, otherwise plain numpy.
"""
import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


def _tanh_forward_np(H, A, it, ix, itt, itx, ixx):
    a = np.tanh(H[0])
    s = 1.0 - a * a
    s2 = -2.0 * a * s
    A[0] = a
    for i in (it, ix):
        if i >= 0:
            A[i] = s * H[i]
    for c, i, j in ((itt, it, it), (itx, it, ix), (ixx, ix, ix)):
        if c >= 0:
            A[c] = s * H[c] + s2 * H[i] * H[j]


def _tanh_backward_np(H, A0, GA, GH, it, ix, itt, itx, ixx):
    a = A0
    s = 1.0 - a * a
    s2 = -2.0 * a * s
    s3 = -2.0 * s * (s - 2.0 * a * a)
    gv = s * GA[0]
    for i in (it, ix):
        if i >= 0:
            GH[i] = s * GA[i]
            gv += s2 * H[i] * GA[i]
    for c, i, j in ((itt, it, it), (itx, it, ix), (ixx, ix, ix)):
        if c >= 0:
            ga = GA[c]
            GH[c] = s * ga
            gv += (s2 * H[c] + s3 * H[i] * H[j]) * ga
            if i == j:
                GH[i] += 2.0 * s2 * H[i] * ga
            else:
                GH[i] += s2 * H[j] * ga
                GH[j] += s2 * H[i] * ga
    GH[0] = gv


if numba is not None:

    @numba.njit(cache=True)
    def _tanh_rest_nb(H, A, it, ix, itt, itx, ixx):
        n, w = H.shape[1], H.shape[2]
        for p in range(n):
            for k in range(w):
                a = A[0, p, k]
                s = 1.0 - a * a
                s2 = -2.0 * a * s
                ht = H[it, p, k] if it >= 0 else 0.0
                hx = H[ix, p, k] if ix >= 0 else 0.0
                if it >= 0:
                    A[it, p, k] = s * ht
                if ix >= 0:
                    A[ix, p, k] = s * hx
                if itt >= 0:
                    A[itt, p, k] = s * H[itt, p, k] + s2 * ht * ht
                if itx >= 0:
                    A[itx, p, k] = s * H[itx, p, k] + s2 * ht * hx
                if ixx >= 0:
                    A[ixx, p, k] = s * H[ixx, p, k] + s2 * hx * hx

    @numba.njit(cache=True)
    def _tanh_backward_nb(H, A0, GA, GH, it, ix, itt, itx, ixx):
        n, w = H.shape[1], H.shape[2]
        for p in range(n):
            for k in range(w):
                a = A0[p, k]
                s = 1.0 - a * a
                s2 = -2.0 * a * s
                s3 = -2.0 * s * (s - 2.0 * a * a)
                gv = s * GA[0, p, k]
                ht = H[it, p, k] if it >= 0 else 0.0
                hx = H[ix, p, k] if ix >= 0 else 0.0
                gt = 0.0
                gx = 0.0
                if it >= 0:
                    gt = s * GA[it, p, k]
                    gv += s2 * ht * GA[it, p, k]
                if ix >= 0:
                    gx = s * GA[ix, p, k]
                    gv += s2 * hx * GA[ix, p, k]
                if itt >= 0:
                    ga = GA[itt, p, k]
                    GH[itt, p, k] = s * ga
                    gv += (s2 * H[itt, p, k] + s3 * ht * ht) * ga
                    gt += 2.0 * s2 * ht * ga
                if itx >= 0:
                    ga = GA[itx, p, k]
                    GH[itx, p, k] = s * ga
                    gv += (s2 * H[itx, p, k] + s3 * ht * hx) * ga
                    gt += s2 * hx * ga
                    gx += s2 * ht * ga
                if ixx >= 0:
                    ga = GA[ixx, p, k]
                    GH[ixx, p, k] = s * ga
                    gv += (s2 * H[ixx, p, k] + s3 * hx * hx) * ga
                    gx += 2.0 * s2 * hx * ga
                if it >= 0:
                    GH[it, p, k] = gt
                if ix >= 0:
                    GH[ix, p, k] = gx
                GH[0, p, k] = gv

    def _tanh_forward_nb(H, A, it, ix, itt, itx, ixx):
        # numpy's vectorised tanh beats a scalar libm call per element
        np.tanh(H[0], out=A[0])
        _tanh_rest_nb(H, A, it, ix, itt, itx, ixx)

    tanh_forward = _tanh_forward_nb
    tanh_backward = _tanh_backward_nb
else:  # pragma: no cover
    tanh_forward = _tanh_forward_np
    tanh_backward = _tanh_backward_np
