from __future__ import annotations

import math
from fractions import Fraction as Q

import pytest

from weyl_mirror.exactalg import RatMatrix
from weyl_mirror.rootsys import (
    build_root_system,
    cartan_matrix,
    dtype_matrices,
    dtype_theta_roots,
    marked_pair,
    weyl_orbit,
)

SYSTEMS = [("A", n) for n in range(1, 7)] + [("D", n) for n in range(4, 9)] + [("E", n) for n in (6, 7, 8)]


def expected_positive(fam, l):
    return {"A": l * (l + 1) // 2, "D": l * (l - 1), "E": {6: 36, 7: 63, 8: 120}.get(l)}[fam]


@pytest.mark.parametrize("fam,l", SYSTEMS)
def test_root_counts_and_norms(fam, l):
    rs = build_root_system(fam, l)
    assert len(rs.positive_roots) == expected_positive(fam, l)
    assert rs.cartan @ rs.inverse_cartan == RatMatrix.identity(l)
    for b in rs.positive_roots:
        assert rs.inner(b, b) == 2
    for i in range(l):
        assert rs.simple_root(i) in rs.positive_roots


def test_small_examples():
    a2 = build_root_system("A", 2)
    assert len(a2.positive_roots) == 3
    assert a2.cartan.tolist() == [[2, -1], [-1, 2]]
    assert len(build_root_system("D", 4).positive_roots) == 12
    e6 = build_root_system("E", 6)
    assert 2 * len(e6.positive_roots) + 6 == 78


def test_unsupported():
    for fam, l in (("D", 3), ("E", 5), ("B", 3), ("A", 0)):
        with pytest.raises(ValueError):
            build_root_system(fam, l)


def test_e_labeling_trivalent():
    C = cartan_matrix("E", 6)
    assert [sum(1 for x in row if x == -1) for row in C] == [1, 2, 3, 2, 1, 1]


@pytest.mark.parametrize(
    "fam,l,d,dhat,order",
    [
        ("E", 6, (2, 4, 6, 4, 2, 3), 6, 24),
        ("E", 7, (4, 8, 12, 9, 6, 3, 6), 12, 48),
        ("E", 8, (10, 20, 30, 24, 18, 12, 6, 15), 30, 120),
        ("D", 4, (1, 2, 1, 1), 2, 8),
    ],
)
def test_marked_pairs(fam, l, d, dhat, order):
    mp = marked_pair(fam, l)
    assert mp.degrees == tuple(Q(x) for x in d)
    assert mp.dhat == dhat
    assert mp.mckay_order == order


def test_a_requires_marked_node():
    with pytest.raises(ValueError):
        marked_pair("A", 3)
    mp = marked_pair("A", 1, 1)
    assert mp.degrees == (Q(1, 2),) and mp.mckay_order == 2 and mp.root_order == 2


@pytest.mark.parametrize("fam,l", [("A", 4), ("D", 5), ("E", 6), ("E", 7), ("E", 8)])
def test_degree_sum_is_weyl_vector_pairing(fam, l):
    mp = marked_pair(fam, l, 2 if fam == "A" else None)
    rs = mp.rootsystem
    w = rs.fundamental_weight(mp.marked_node - 1)
    assert sum(mp.degrees) == sum(rs.inner(b, w) for b in rs.positive_roots) / 2


def test_orbit_sizes():
    assert len(weyl_orbit(build_root_system("A", 2), (1, 0))) == 3
    assert len(weyl_orbit(build_root_system("D", 4), (1, 0, 0, 0))) == 8
    e6 = build_root_system("E", 6)
    assert [len(weyl_orbit(e6, e6.fundamental_weight(i))) for i in range(6)] == [27, 216, 720, 216, 27, 72]


@pytest.mark.parametrize("fam,l", [("A", 3), ("D", 5), ("E", 6)])
def test_orbit_closed(fam, l):
    rs = build_root_system(fam, l)
    for i in range(l):
        orbit = set(weyl_orbit(rs, rs.fundamental_weight(i)))
        assert all(rs.reflect(j, w) in orbit for w in orbit for j in range(l))


@pytest.mark.parametrize("l", range(4, 9))
def test_dtype_matrices(l):
    G, Theta = dtype_matrices(l)
    assert G.transpose() @ G == build_root_system("D", l).cartan
    roots = dtype_theta_roots(l)
    assert sorted(roots) == sorted(build_root_system("D", l).positive_roots)
    assert len(set(roots)) == len(roots)


def test_theta_first_minus_row():
    l = 5
    _, Theta = dtype_matrices(l)
    npairs = l * (l - 1) // 2
    assert list(Theta.entries[npairs]) == [1, -1, 0, 0, 0]


def test_e6_pairing_from_minuscule_orbit():
    e6 = build_root_system("E", 6)
    orbit = weyl_orbit(e6, e6.fundamental_weight(0))
    M = [[sum(w[i] * w[j] for w in orbit) for j in range(6)] for i in range(6)]
    assert M == [[6 * int(e6.cartan[i, j]) for j in range(6)] for i in range(6)]


# Binary polyhedral groups as unit quaternions: the McKay group orders are data,
# checked here by closing a generating set under multiplication.


def _qmul(a, b):
    a0, a1, a2, a3 = a
    b0, b1, b2, b3 = b
    return (
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    )


def _closure(gens):
    key = lambda q: tuple(round(x, 9) + 0.0 for x in q)  # noqa: E731
    seen = {key(g): g for g in gens}
    frontier = list(gens)
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                c = _qmul(a, g)
                k = key(c)
                if k not in seen:
                    seen[k] = c
                    nxt.append(c)
        frontier = nxt
    return len(seen)


def test_mckay_orders_by_quaternion_enumeration():
    i = (0.0, 1.0, 0.0, 0.0)
    w = (0.5, 0.5, 0.5, 0.5)
    s = 1 / math.sqrt(2)
    phi = (1 + math.sqrt(5)) / 2
    assert _closure([i, w]) == marked_pair("E", 6).mckay_order
    assert _closure([i, w, (s, s, 0.0, 0.0)]) == marked_pair("E", 7).mckay_order
    assert _closure([i, w, (phi / 2, 1 / (2 * phi), 0.5, 0.0)]) == marked_pair("E", 8).mckay_order
    # binary dihedral group of order 4(l-2)
    for l in (4, 5, 6):
        n = l - 2
        rot = (math.cos(math.pi / n), math.sin(math.pi / n), 0.0, 0.0)
        assert _closure([rot, (0.0, 0.0, 1.0, 0.0)]) == marked_pair("D", l).mckay_order
