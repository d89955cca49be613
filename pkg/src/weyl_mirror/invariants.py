"""Weyl-invariant Fourier polynomials, characters, the Weyl denominator, the
extended invariant coordinates y_a and flat-coordinate maps, evaluated
exactly at rational points."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction as Q
from functools import lru_cache
from importlib import resources
from typing import Sequence

from .exactalg import MultiLaurent, RatMatrix, eval_with_gradient
from .rootsys import MarkedPair, RootSystem, build_root_system, weyl_orbit


@dataclass(frozen=True)
class EvalPoint:
    """q_a = e^{x_a} for a <= l, and e^{x_{l+1}} = u**root_order.

    Here x_{l+1} is the coordinate of the extended invariants y_a = e^{d_a x_{l+1}} Y_a,
    in which the intersection form has d-hat in the last slot.
    """

    q: tuple[Q, ...]
    u: Q = Q(1)
    root_order: int = 1

    def __post_init__(self):
        object.__setattr__(self, "q", tuple(Q(v) for v in self.q))
        object.__setattr__(self, "u", Q(self.u))
        if any(v == 0 for v in self.q) or self.u == 0:
            raise ValueError("nonzero evaluation point required")
        if self.root_order < 1:
            raise ValueError("root order must be positive")

    def exp_last(self, a) -> Q:
        """e^{a x_{l+1}} for rational a with a*N integral."""
        n = Q(a) * self.root_order
        if n.denominator != 1:
            raise ValueError(f"exponent {a} is not compatible with root order {self.root_order}")
        return self.u ** int(n)

    def with_u(self, u) -> EvalPoint:
        return EvalPoint(self.q, Q(u), self.root_order)


def _rs_key(rs: RootSystem) -> tuple[str, int]:
    return rs.family, rs.rank


@lru_cache(maxsize=None)
def _orbit_sum(family: str, rank: int, weight: tuple[int, ...]) -> MultiLaurent:
    rs = build_root_system(family, rank)
    return MultiLaurent(rank, {w: 1 for w in weyl_orbit(rs, weight)})


def orbit_sum(rs: RootSystem, weight: Sequence[int]) -> MultiLaurent:
    return _orbit_sum(rs.family, rs.rank, tuple(weight))


def orbit_sums(rs: RootSystem) -> list[MultiLaurent]:
    return [orbit_sum(rs, rs.fundamental_weight(i)) for i in range(rs.rank)]


def basic_invariants(mp: MarkedPair) -> list[MultiLaurent]:
    """Y_i: average of e^{<w,h>} over the Weyl orbit of the i-th fundamental weight."""
    return [s * Q(1, len(s)) for s in orbit_sums(mp.rootsystem)]


def _elementary(weights: Sequence[tuple[int, ...]], top: int, nvars: int) -> list[MultiLaurent]:
    """Exterior-power characters e_0..e_top of a weight multiset."""
    e = [MultiLaurent.constant(nvars, 1)] + [MultiLaurent(nvars)] * top
    for w in weights:
        mono = MultiLaurent.monomial(w)
        for k in range(top, 0, -1):
            e[k] = e[k] + e[k - 1] * mono
    return e


@lru_cache(maxsize=None)
def _characters(family: str, rank: int) -> tuple[MultiLaurent, ...]:
    rs = build_root_system(family, rank)
    l = rank
    adjoint = MultiLaurent(l, {b: 1 for b in rs.all_roots()}) + l
    if family == "A":
        return tuple(orbit_sums(rs))
    if family == "D":
        vector = weyl_orbit(rs, rs.fundamental_weight(0))
        ext = _elementary(vector, l - 2, l)
        spin = [orbit_sum(rs, rs.fundamental_weight(i)) for i in (l - 2, l - 1)]
        return tuple(ext[1 : l - 1]) + tuple(spin)
    if family == "E" and rank == 6:
        w1 = orbit_sum(rs, rs.fundamental_weight(0))
        w1_2 = w1.scale_exponents(2)
        w2 = (w1 * w1 - w1_2) * Q(1, 2)
        w3 = (w2 * w1 - w1 * w1_2 + w1.scale_exponents(3)) * Q(1, 3)
        w4 = w2.scale_exponents(-1)
        w5 = w1.scale_exponents(-1)
        return (w1, w2, w3, w4, w5, adjoint)
    raise ValueError(f"characters are only provided for A, D and E6, not {family}{rank}")


def characters(mp: MarkedPair) -> list[MultiLaurent]:
    """Fundamental characters W_1..W_l (types A, D, E6)."""
    return list(_characters(mp.family, mp.rank))


def weyl_denominator(rs: RootSystem) -> MultiLaurent:
    """Expanded e^{rho} prod_{beta>0} (1 - e^{-beta})."""
    delta = MultiLaurent.monomial(rs.weyl_vector())
    for b in rs.positive_roots:
        delta = delta * (1 - MultiLaurent.monomial(tuple(-x for x in b)))
    return delta


def _mono(q: Sequence[Q], exp: Sequence[int]) -> Q:
    out = Q(1)
    for v, n in zip(q, exp):
        if n:
            out *= v**n
    return out


def root_exponential(q: Sequence, beta: Sequence[int]) -> Q:
    """e^{<beta, h>} = prod_m q_m^{beta_m}."""
    return _mono([Q(v) for v in q], beta)


def weyl_denominator_value(rs: RootSystem, q: Sequence) -> Q:
    """Product form of the Weyl denominator at a point (no expansion)."""
    q = [Q(v) for v in q]
    val = _mono(q, rs.weyl_vector())
    for b in rs.positive_roots:
        val *= 1 - 1 / _mono(q, b)
    return val


def reflect_point(rs: RootSystem, i: int, q: Sequence) -> tuple[Q, ...]:
    """Action of the simple reflection s_i on q = e^{x}: x -> x - x_i * alpha_i in coroot coordinates."""
    # h = sum x_a alpha_a; s_i h = h - <alpha_i, h> alpha_i with <alpha_i, h> = sum_a C_ia x_a
    q = [Q(v) for v in q]
    pairing = _mono(q, rs.simple_root(i))
    out = list(q)
    out[i] = q[i] / pairing
    return tuple(out)


def extended_jacobian(mp: MarkedPair, pt: EvalPoint) -> tuple[list[Q], RatMatrix]:
    """(y_1..y_l, e^{y_{l+1}}) and J[a][i] = dy_a/dx_i, with x_{l+1} in the last column."""
    l = mp.rank
    ys: list[Q] = []
    rows = []
    for a, Y in enumerate(basic_invariants(mp)):
        val, grad = eval_with_gradient(Y, pt.q)
        w = pt.exp_last(mp.degrees[a])
        y = w * val
        ys.append(y)
        rows.append([w * g for g in grad] + [mp.degrees[a] * y])
    rows.append([Q(0)] * l + [Q(1)])
    ys.append(pt.exp_last(1))
    return ys, RatMatrix(rows)


# ---------------------------------------------------------------------------
# Flat-coordinate maps: t_A as polynomials in characters and e^{x_{l+1}}
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FlatTerm:
    coeff: Q
    u_power: Q  # power of e^{x_{l+1}}
    exps: tuple[int, ...]  # powers of the generators W_i (or S_i)


@dataclass(frozen=True)
class FlatMap:
    """t_1..t_l as polynomials; t_{l+1} = log_coeff * x_{l+1}.

    `generators` is "W" for fundamental characters or "S" for orbit sums.
    """

    family: str
    rank: int
    coords: tuple[tuple[FlatTerm, ...], ...]
    log_coeff: Q
    generators: str = "W"

    @property
    def nflat(self) -> int:
        return self.rank + 1

    def generator_polys(self, mp: MarkedPair) -> list[MultiLaurent]:
        if self.generators == "W":
            return characters(mp)
        return orbit_sums(mp.rootsystem)

    def evaluate(self, mp: MarkedPair, pt: EvalPoint) -> tuple[list[Q], Q, RatMatrix]:
        """(t_1..t_l, s = e^{t_{l+1}}, Jt) with Jt[A][i] = dt_A/dx_i."""
        l = mp.rank
        vals, grads = [], []
        for W in self.generator_polys(mp):
            v, g = eval_with_gradient(W, pt.q)
            vals.append(v)
            grads.append(g)
        ts: list[Q] = []
        rows = []
        for terms in self.coords:
            t = Q(0)
            row = [Q(0)] * (l + 1)
            for term in terms:
                pref = term.coeff * pt.exp_last(term.u_power)
                mono = pref
                for v, n in zip(vals, term.exps):
                    if n:
                        mono *= v**n
                t += mono
                row[l] += term.u_power * mono
                for i, n in enumerate(term.exps):
                    if n:
                        # d/dx (W_i^n) = n W_i^{n-1} dW_i
                        rest = pref
                        for j, (v, m) in enumerate(zip(vals, term.exps)):
                            e = m - 1 if j == i else m
                            if e:
                                rest *= v**e
                        scale = n * rest
                        for a in range(l):
                            row[a] += scale * grads[i][a]
            ts.append(t)
            rows.append(row)
        rows.append([Q(0)] * l + [self.log_coeff])
        s = pt.exp_last(self.log_coeff)
        return ts, s, RatMatrix(rows)


@lru_cache(maxsize=None)
def embedded_e6_flat_map() -> FlatMap:
    from .frobdual import parse_flatmap

    text = resources.files("weyl_mirror").joinpath("data/e6_flatmap.txt").read_text(encoding="utf-8")
    return parse_flatmap(text)


def e6_flat_map(pt: EvalPoint) -> tuple[list[Q], Q, RatMatrix]:
    """Flat coordinates of the E6 extended affine Weyl orbit space and their x-Jacobian."""
    from .rootsys import marked_pair

    mp = marked_pair("E", 6)
    return embedded_e6_flat_map().evaluate(mp, pt)
