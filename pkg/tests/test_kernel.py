"""The compiled and pure-Python kernels implement identical contracts."""

import random
from fractions import Fraction

import pytest

from approxlaws import _poly_py

try:
    from approxlaws import _poly_c
except ImportError:
    _poly_c = None

pytestmark = pytest.mark.skipif(_poly_c is None, reason="compiled kernel not built")


def rand_mono(rng):
    ids = sorted(rng.sample(range(12), rng.randint(0, 4)))
    return tuple(v for i in ids for v in (i, rng.choice([-2, -1, 1, 2, 3])))


def rand_poly(rng, terms=6):
    out = {}
    for _ in range(terms):
        c = Fraction(rng.randint(-9, 9), rng.randint(1, 5))
        if c:
            out[rand_mono(rng)] = c
    return out


def test_backends_agree():
    rng = random.Random(99)
    for _ in range(200):
        a = rand_poly(rng)
        b = rand_poly(rng)
        m = rand_mono(rng)
        c = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
        assert _poly_py.poly_add(a, b) == _poly_c.poly_add(a, b)
        assert _poly_py.poly_mul(a, b) == _poly_c.poly_mul(a, b)
        assert _poly_py.poly_scale(a, c) == _poly_c.poly_scale(a, c)
        assert _poly_py.poly_mul_mono(a, m, c) == _poly_c.poly_mul_mono(a, m, c)
        acc1, acc2 = dict(a), dict(a)
        _poly_py.poly_iadd(acc1, b, c)
        _poly_c.poly_iadd(acc2, b, c)
        assert acc1 == acc2
        images = {i: rand_poly(rng, 2) for i in range(0, 12, 3)}
        assert _poly_py.derive(a, images) == _poly_c.derive(a, images)


def test_mono_mul_agree():
    rng = random.Random(5)
    for _ in range(300):
        m1, m2 = rand_mono(rng), rand_mono(rng)
        assert _poly_py.mono_mul(m1, m2) == _poly_c.mono_mul(m1, m2)


def test_backend_selected():
    from approxlaws import kernel

    assert kernel.BACKEND in ("c", "python")
