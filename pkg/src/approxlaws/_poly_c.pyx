# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled twin of the pure-Python normal-form kernel.

Same data representation and contracts as ``_poly_py``; coefficients stay
generic Python numbers (int/Fraction), the win is C-level loop, tuple and
dict machinery in the monomial-merge and derivation inner loops.
"""

BACKEND = "c"


cpdef tuple mono_mul(tuple m1, tuple m2):
    """Merge two monomial keys, summing exponents and dropping zeros."""
    cdef Py_ssize_t n1 = len(m1)
    cdef Py_ssize_t n2 = len(m2)
    if n1 == 0:
        return m2
    if n2 == 0:
        return m1
    cdef list out = []
    cdef Py_ssize_t i = 0
    cdef Py_ssize_t j = 0
    cdef object a, b, e
    while i < n1 and j < n2:
        a = m1[i]
        b = m2[j]
        if a == b:
            e = m1[i + 1] + m2[j + 1]
            if e:
                out.append(a)
                out.append(e)
            i += 2
            j += 2
        elif a < b:
            out.append(a)
            out.append(m1[i + 1])
            i += 2
        else:
            out.append(b)
            out.append(m2[j + 1])
            j += 2
    while i < n1:
        out.append(m1[i])
        i += 1
    while j < n2:
        out.append(m2[j])
        j += 1
    return tuple(out)


def poly_iadd(dict acc, dict p, c=1):
    """In-place ``acc += c * p``; drops cancelled terms."""
    cdef object m, v, w
    if not c:
        return acc
    if c == 1:
        for m, v in p.items():
            w = acc.get(m)
            if w is None:
                acc[m] = v
            else:
                w = w + v
                if w:
                    acc[m] = w
                else:
                    del acc[m]
    else:
        for m, v in p.items():
            w = acc.get(m)
            if w is None:
                acc[m] = c * v
            else:
                w = w + c * v
                if w:
                    acc[m] = w
                else:
                    del acc[m]
    return acc


def poly_add(dict p1, dict p2):
    cdef dict out = dict(p1)
    poly_iadd(out, p2)
    return out


def poly_scale(dict p, c):
    cdef object m, v
    if not c:
        return {}
    if c == 1:
        return dict(p)
    cdef dict out = {}
    for m, v in p.items():
        out[m] = c * v
    return out


def poly_mul_mono(dict p, tuple mono, c):
    """``c * mono * p`` as a new dict."""
    cdef object m, v
    cdef dict out = {}
    if not c:
        return out
    if len(mono) == 0:
        return poly_scale(p, c)
    if c == 1:
        for m, v in p.items():
            out[mono_mul(<tuple> m, mono)] = v
    else:
        for m, v in p.items():
            out[mono_mul(<tuple> m, mono)] = c * v
    return out


def poly_mul(dict p1, dict p2):
    cdef dict out = {}
    cdef object m1, m2, c1, c2, key, v
    if not p1 or not p2:
        return out
    if len(p1) < len(p2):
        p1, p2 = p2, p1
    for m2, c2 in p2.items():
        if len(<tuple> m2):
            for m1, c1 in p1.items():
                key = mono_mul(<tuple> m1, <tuple> m2)
                v = out.get(key)
                if v is None:
                    out[key] = c1 * c2
                else:
                    v = v + c1 * c2
                    if v:
                        out[key] = v
                    else:
                        del out[key]
        else:
            poly_iadd(out, p1, c2)
    return out


def derive(dict p, dict images):
    """Leibniz extension of the atom-image map ``images`` applied to ``p``."""
    cdef dict out = {}
    cdef object mono_o, c, img, e, ce, m2, c2, key, v
    cdef tuple mono, rest
    cdef Py_ssize_t i, n
    for mono_o, c in p.items():
        mono = <tuple> mono_o
        n = len(mono)
        for i in range(0, n, 2):
            img = images.get(mono[i])
            if not img:
                continue
            e = mono[i + 1]
            if e == 1:
                rest = mono[:i] + mono[i + 2:]
            else:
                rest = mono[:i] + (mono[i], e - 1) + mono[i + 2:]
            ce = c * e
            for m2, c2 in (<dict> img).items():
                key = mono_mul(rest, <tuple> m2)
                v = out.get(key)
                if v is None:
                    out[key] = ce * c2
                else:
                    v = v + ce * c2
                    if v:
                        out[key] = v
                    else:
                        del out[key]
    return out
