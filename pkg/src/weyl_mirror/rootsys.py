"""Simply-laced root systems in fundamental-weight coordinates.

Node labels for type E follow a chain 1 - 2 - ... - (l-1) with node l attached
to node 3, which is the trivalent node. In Bourbaki numbering this is
    E6: (1, 3, 4, 5, 6, 2), E7: (1, 3, 4, 5, 6, 7, 2), E8: (1, 3, 4, 5, 6, 7, 8, 2)
i.e. internal node a corresponds to Bourbaki node BOURBAKI[E_l][a-1].
Type D uses Bourbaki labels with the trivalent node at l-2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction as Q

from .exactalg import RatMatrix, mat_inverse

BOURBAKI = {
    6: (1, 3, 4, 5, 6, 2),
    7: (1, 3, 4, 5, 6, 7, 2),
    8: (1, 3, 4, 5, 6, 7, 8, 2),
}

MCKAY_E = {6: 24, 7: 48, 8: 120}

Weight = tuple[int, ...]


def _edges(family: str, l: int) -> list[tuple[int, int]]:
    if family == "A":
        return [(a, a + 1) for a in range(1, l)]
    if family == "D":
        return [(a, a + 1) for a in range(1, l - 1)] + [(l - 2, l)]
    if family == "E":
        return [(a, a + 1) for a in range(1, l - 1)] + [(3, l)]
    raise ValueError(f"unsupported family {family!r}")


def cartan_matrix(family: str, l: int) -> list[list[int]]:
    C = [[2 if i == j else 0 for j in range(l)] for i in range(l)]
    for a, b in _edges(family, l):
        C[a - 1][b - 1] = C[b - 1][a - 1] = -1
    return C


@dataclass(frozen=True)
class RootSystem:
    family: str
    rank: int
    cartan: RatMatrix
    inverse_cartan: RatMatrix
    positive_roots: tuple[Weight, ...]
    root_heights: tuple[tuple[int, ...], ...] = field(repr=False)

    @property
    def l(self) -> int:
        return self.rank

    @property
    def name(self) -> str:
        return f"{self.family}{self.rank}"

    def cartan_int(self, i: int, j: int) -> int:
        return int(self.cartan[i, j])

    def simple_root(self, i: int) -> Weight:
        """alpha_i (0-based index) as a row of the Cartan matrix."""
        return tuple(int(x) for x in self.cartan.entries[i])

    def fundamental_weight(self, i: int) -> Weight:
        return tuple(int(a == i) for a in range(self.rank))

    def inner(self, lam, mu) -> Q:
        """<lam, mu> = lam^T C^{-1} mu in fundamental-weight coordinates."""
        Ci = self.inverse_cartan.entries
        return sum(
            (Q(lam[a]) * Ci[a][b] * mu[b] for a in range(self.rank) for b in range(self.rank) if lam[a] and mu[b]),
            Q(0),
        )

    def reflect(self, i: int, lam: Weight) -> Weight:
        """Simple reflection s_i (0-based)."""
        c = lam[i]
        if not c:
            return tuple(lam)
        row = self.cartan.entries[i]
        return tuple(int(x - c * r) for x, r in zip(lam, row))

    def weyl_vector(self) -> Weight:
        return (1,) * self.rank

    def all_roots(self) -> tuple[Weight, ...]:
        return self.positive_roots + tuple(tuple(-x for x in b) for b in self.positive_roots)


def _positive_roots(C: list[list[int]]) -> tuple[list[Weight], list[tuple[int, ...]]]:
    """Closure from the simple roots using alpha-strings; heights in simple-root coordinates."""
    l = len(C)
    simple = [tuple(int(i == a) for a in range(l)) for i in range(l)]
    found = set(simple)
    level = list(simple)
    ordered = list(simple)
    while level:
        nxt = []
        for c in level:
            weight = [sum(c[j] * C[j][i] for j in range(l)) for i in range(l)]
            for i in range(l):
                p = 0
                down = list(c)
                while True:
                    down[i] -= 1
                    if tuple(down) in found:
                        p += 1
                    else:
                        break
                if p - weight[i] > 0:
                    up = list(c)
                    up[i] += 1
                    up = tuple(up)
                    if up not in found:
                        found.add(up)
                        nxt.append(up)
        nxt.sort(key=lambda v: tuple(-x for x in v))
        ordered.extend(nxt)
        level = nxt
    weights = [tuple(sum(c[j] * C[j][i] for j in range(l)) for i in range(l)) for c in ordered]
    return weights, ordered


def build_root_system(family: str, rank: int) -> RootSystem:
    family = family.upper()
    if family == "A" and rank >= 1:
        pass
    elif family == "D" and rank >= 4:
        pass
    elif family == "E" and rank in (6, 7, 8):
        pass
    else:
        raise ValueError(f"unsupported root system {family}{rank}")
    C = cartan_matrix(family, rank)
    weights, heights = _positive_roots(C)
    Cm = RatMatrix(C)
    return RootSystem(family, rank, Cm, mat_inverse(Cm), tuple(weights), tuple(heights))


@dataclass(frozen=True)
class MarkedPair:
    rootsystem: RootSystem
    marked_node: int  # 1-based
    degrees: tuple[Q, ...]
    dhat: Q
    mckay_order: int

    @property
    def family(self) -> str:
        return self.rootsystem.family

    @property
    def rank(self) -> int:
        return self.rootsystem.rank

    @property
    def name(self) -> str:
        rs = self.rootsystem
        if rs.family == "A":
            return f"A{rs.rank}(k={self.marked_node})"
        return rs.name

    @property
    def root_order(self) -> int:
        """Smallest N with N*d_a integral for all a, so e^{x_{l+1}} = u^N keeps y_a rational."""
        n = 1
        for d in self.degrees:
            n = n * d.denominator // _gcd(n, d.denominator)
        return n

    def extended_degrees(self) -> tuple[Q, ...]:
        return self.degrees + (Q(0),)


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def marked_pair(family: str, rank: int, kbar: int | None = None) -> MarkedPair:
    rs = build_root_system(family, rank)
    fam = rs.family
    if fam == "A":
        if kbar is None:
            raise ValueError("type A requires a marked node k")
        if not 1 <= kbar <= rank:
            raise ValueError("marked node out of range")
        k = kbar
        order = rank + 1
    elif fam == "D":
        k = rank - 2
        order = 4 * (rank - 2)
    else:
        k = 3
        order = MCKAY_E[rank]
    Ci = rs.inverse_cartan
    degrees = tuple(Ci[a, k - 1] for a in range(rank))
    return MarkedPair(rs, k, degrees, Ci[k - 1, k - 1], order)


def weyl_orbit(rs: RootSystem, w) -> tuple[Weight, ...]:
    """Breadth-first orbit of w under simple reflections, in discovery order."""
    start = tuple(int(x) for x in w)
    seen = {start}
    out = [start]
    frontier = [start]
    while frontier:
        nxt = []
        for lam in frontier:
            for i in range(rs.rank):
                if lam[i]:
                    mu = rs.reflect(i, lam)
                    if mu not in seen:
                        seen.add(mu)
                        out.append(mu)
                        nxt.append(mu)
        frontier = nxt
    return tuple(out)


def dtype_matrices(l: int) -> tuple[RatMatrix, RatMatrix]:
    """G with G^T G = C for D_l, and Theta = (Theta+ over Theta-) indexed by pairs i<j."""
    if l < 4:
        raise ValueError("D-type requires l >= 4")

    def kd(a, b):
        return int(a == b)

    G = [[kd(i, j) - kd(i, j + 1) + kd(i, l - 1) * kd(j, l) for j in range(1, l + 1)] for i in range(1, l + 1)]
    pairs = [(i, j) for i in range(1, l + 1) for j in range(i + 1, l + 1)]
    plus = [[int(k in (i, j)) for k in range(1, l + 1)] for i, j in pairs]
    minus = [[kd(k, i) - kd(k, j) for k in range(1, l + 1)] for i, j in pairs]
    return RatMatrix(G), RatMatrix(plus + minus)


def dtype_theta_roots(l: int) -> list[Weight]:
    """Positive roots of D_l, in weight coordinates, in the row order of Theta."""
    G, Theta = dtype_matrices(l)
    out = []
    for row in Theta.entries:
        out.append(tuple(int(sum(row[m] * G[m, a] for m in range(l))) for a in range(l)))
    return out
