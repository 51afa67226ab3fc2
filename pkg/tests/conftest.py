import random
from fractions import Fraction

import pytest

from isochain.chain_core import reduce
from isochain.normed_space import NormSpec


def square_loop(space, half=1):
    h = Fraction(half)
    pts = [(-h, -h), (h, -h), (h, h), (-h, h)]
    return reduce([((pts[i], pts[(i + 1) % 4]), 1) for i in range(4)], space)


def octahedron(space):
    raw = []
    for sx in (1, -1):
        for sy in (1, -1):
            for sz in (1, -1):
                raw.append((((sx, 0, 0), (0, sy, 0), (0, 0, sz)), sx * sy * sz))
    return reduce(raw, space)


def signed_volume(T):
    """Σ det(a, b, c)/6 over the weighted triangles: enclosed volume of a 2-cycle."""
    total = Fraction(0)
    for (a, b, c), w in T.terms.items():
        det = (
            a[0] * (b[1] * c[2] - b[2] * c[1])
            - a[1] * (b[0] * c[2] - b[2] * c[0])
            + a[2] * (b[0] * c[1] - b[1] * c[0])
        )
        total += w * det / 6
    return total


def cube_surface(space, side=1):
    """Outward-oriented boundary of [0, side]^3, two triangles per face."""
    s = Fraction(side)
    raw = []
    for axis in range(3):
        for level in (0, s):
            u, v = [i for i in range(3) if i != axis]
            quad = []
            for a, b in ((0, 0), (s, 0), (s, s), (0, s)):
                p = [Fraction(0)] * 3
                p[axis], p[u], p[v] = level, a, b
                quad.append(tuple(p))
            # (u, v, axis) is a positive frame exactly when (u, v) follows axis cyclically
            positive = (u - axis) % 3 == 1
            if positive != (level == s):
                quad = quad[::-1]
            raw += [((quad[0], quad[1], quad[2]), 1), ((quad[0], quad[2], quad[3]), 1)]
    return reduce(raw, space, 2)


def rand_point(rng, n, lo=-4, hi=4, den=4):
    return tuple(Fraction(rng.randint(lo * den, hi * den), den) for _ in range(n))


def random_chain(rng, space, k, terms=3):
    raw = []
    while len(raw) < terms:
        pts = [rand_point(rng, space.dimension) for _ in range(k + 1)]
        raw.append((pts, rng.choice([-2, -1, 1, 1, 2])))
    return reduce(raw, space, k)


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture
def euclid2():
    return NormSpec.euclidean(2)


@pytest.fixture
def linf2():
    return NormSpec.linf(2)


# acceptance criterion number -> (passed, title, detail, seconds)
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, title, detail, secs = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}: {title} ({secs:.1f}s) {detail}")
