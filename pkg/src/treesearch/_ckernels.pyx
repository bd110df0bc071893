# cython: language_level=3
"""Compiled twins of the functions in ``_pykernels``; same inputs, same outputs."""

from cpython.bytes cimport PyBytes_FromStringAndSize
from libc.stdlib cimport malloc, free

from ._pykernels import StateCapExceeded

cdef enum:
    OVF = 255


def merge_level(prev, child, int a, Py_ssize_t cap):
    cdef dict out = {}
    cdef const unsigned char* sl
    cdef const unsigned char* sm
    cdef const unsigned char* cl
    cdef bytes slb, smb, clb
    cdef Py_ssize_t L, p
    cdef int x, y
    cdef unsigned char* lbuf
    cdef unsigned char* mbuf
    cdef bint must
    cdef list children = list(child)
    if not children:
        return out
    L = len(children[0][0])
    lbuf = <unsigned char*> malloc(L if L > 0 else 1)
    mbuf = <unsigned char*> malloc(L if L > 0 else 1)
    try:
        for s in prev:
            slb = s[0]
            smb = s[1]
            must = s[2]
            sl = slb
            sm = smb
            for ck in children:
                clb = ck[0]
                cl = clb
                for p in range(L):
                    x = sl[p]
                    y = cl[p]
                    if x == OVF or x + y > a:
                        lbuf[p] = OVF
                    else:
                        lbuf[p] = x + y
                    x = sm[p]
                    mbuf[p] = x if x >= y else y
                key = (
                    PyBytes_FromStringAndSize(<char*> lbuf, L),
                    PyBytes_FromStringAndSize(<char*> mbuf, L),
                    must or ck[1] < 0,
                )
                if key not in out:
                    out[key] = (s, ck)
                    if len(out) > cap:
                        raise StateCapExceeded(len(out))
    finally:
        free(lbuf)
        free(mbuf)
    return out


cdef bint _insert(const unsigned char* loads, const unsigned char* mcl, long t, long w,
                  long a, Py_ssize_t L, unsigned char* out):
    cdef Py_ssize_t p
    cdef long lo, hi, e, ap, x
    if t < 0:
        for p in range(L):
            if loads[p] == OVF:
                return False
            out[p] = loads[p]
        return True
    e = t + w
    if e > L * a:
        return False
    for p in range(L):
        lo = p * a
        hi = lo + a
        ap = (e if e < hi else hi) - (t if t > lo else lo)
        if ap < 0:
            ap = 0
        if mcl[p] + ap > a:
            return False
        if e >= hi:
            x = loads[p]
            if x == OVF or x + ap > a:
                return False
            out[p] = <unsigned char> (x + ap)
        else:
            out[p] = <unsigned char> ap
    return True


def insert_one(bytes loads, bytes mcl, long t, long w, long a, Py_ssize_t L):
    cdef unsigned char* buf = <unsigned char*> malloc(L if L > 0 else 1)
    try:
        if _insert(loads, mcl, t, w, a, L, buf):
            return PyBytes_FromStringAndSize(<char*> buf, L)
        return None
    finally:
        free(buf)


def insert_level(merged, long w, bint heavy, long a, Py_ssize_t L, Py_ssize_t cap):
    cdef dict out = {}
    cdef long horizon = L * a
    cdef long step = a if heavy else 1
    cdef long t
    cdef bytes lb, mb
    cdef unsigned char* buf = <unsigned char*> malloc(L if L > 0 else 1)
    try:
        for m in merged:
            lb = m[0]
            mb = m[1]
            t = 0
            while t < horizon and t + w <= horizon:
                if _insert(lb, mb, t, w, a, L, buf):
                    key = (PyBytes_FromStringAndSize(<char*> buf, L), t)
                    if key not in out:
                        out[key] = (m, t)
                        if len(out) > cap:
                            raise StateCapExceeded(len(out))
                t += step
            if not m[2]:
                if _insert(lb, mb, -1, w, a, L, buf):
                    key = (PyBytes_FromStringAndSize(<char*> buf, L), -1)
                    if key not in out:
                        out[key] = (m, -1)
                        if len(out) > cap:
                            raise StateCapExceeded(len(out))
    finally:
        free(buf)
    return out


ctypedef unsigned long long mask_t


cdef extern from *:
    int __builtin_ctzll(unsigned long long)


cdef inline int _lowbit_index(mask_t m):
    return __builtin_ctzll(m)


cdef class _Oracle:
    cdef mask_t adj[64]
    cdef list weights
    cdef dict value
    cdef dict choice

    def __init__(self, adj, weights):
        cdef int i
        for i in range(len(adj)):
            self.adj[i] = adj[i]
        self.weights = list(weights)
        self.value = {}
        self.choice = {}

    cdef object solve(self, mask_t mask):
        cdef mask_t m, low, rest, nb, comp, frontier, grow, f, lowf
        cdef int v
        got = self.value.get(mask)
        if got is not None:
            return got
        if mask & (mask - 1) == 0:
            self.value[mask] = 0
            return 0
        best = None
        cdef int arg = -1
        m = mask
        while m:
            low = m & (~m + 1)
            v = _lowbit_index(low)
            m ^= low
            rest = mask ^ low
            worst = 0
            nb = self.adj[v] & rest
            while nb:
                comp = nb & (~nb + 1)
                frontier = comp
                while frontier:
                    grow = 0
                    f = frontier
                    while f:
                        lowf = f & (~f + 1)
                        grow |= self.adj[_lowbit_index(lowf)]
                        f ^= lowf
                    grow &= rest & ~comp
                    comp |= grow
                    frontier = grow
                nb &= ~comp
                c = self.solve(comp)
                if c > worst:
                    worst = c
            cand = self.weights[v] + worst
            if best is None or cand < best:
                best = cand
                arg = v
        self.value[mask] = best
        self.choice[mask] = arg
        return best


def opt_masks(adj, weights, full):
    if len(adj) > 64:
        raise ValueError("bitmask oracle supports at most 64 vertices")
    o = _Oracle(adj, weights)
    o.solve(<mask_t> full)
    return o.value, o.choice


def path_dp(weights):
    cdef Py_ssize_t k = len(weights)
    cdef Py_ssize_t i, j, q, span, bq
    cdef list opt = [[0] * k for _ in range(k)]
    cdef list arg = [[-1] * k for _ in range(k)]
    cdef list w = list(weights)
    cdef list row_i, row_q1
    for i in range(k):
        arg[i][i] = i
    for span in range(1, k):
        for i in range(k - span):
            j = i + span
            best = None
            bq = -1
            row_i = opt[i]
            for q in range(i, j + 1):
                left = row_i[q - 1] if q > i else 0
                right = (<list> opt[q + 1])[j] if q < j else 0
                cand = w[q] + (left if left > right else right)
                if best is None or cand < best:
                    best = cand
                    bq = q
            opt[i][j] = best
            arg[i][j] = bq
    return opt, arg
