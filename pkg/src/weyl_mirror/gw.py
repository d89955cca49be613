"""Genus-zero equivariant Gromov-Witten structure constants of ADE resolutions.

Coordinates: x_1..x_l along the exceptional curves (q_a = e^{x_a}) and x_{l+1}
dual to the identity class. Indices are 1-based throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction as Q
from typing import Sequence

from .exactalg import RatMatrix
from .invariants import EvalPoint, root_exponential
from .rootsys import MarkedPair, dtype_matrices


class DiscriminantError(ArithmeticError):
    pass


@dataclass(frozen=True)
class GwContext:
    """Torus weights: one-torus nu, or the A-type two-torus (nu1, nu2)."""

    mp: MarkedPair
    nu: Q = Q(1)
    nu1: Q | None = None
    nu2: Q | None = None

    def __post_init__(self):
        object.__setattr__(self, "nu", Q(self.nu))
        if (self.nu1 is None) != (self.nu2 is None):
            raise ValueError("two-torus needs both weights")
        if self.nu1 is not None:
            if self.mp.family != "A":
                raise ValueError("the two-torus is only available in type A")
            object.__setattr__(self, "nu1", Q(self.nu1))
            object.__setattr__(self, "nu2", Q(self.nu2))

    @property
    def two_torus(self) -> bool:
        return self.nu1 is not None

    @classmethod
    def restricted(cls, mp: MarkedPair, nu=1) -> GwContext:
        """Two-torus weights (nu1, nu2) = ((l+1-k) nu, k nu) for the marked node k."""
        nu = Q(nu)
        k, l = mp.marked_node, mp.rank
        return cls(mp, nu, (l + 1 - k) * nu, k * nu)


def gw_eta(ctx: GwContext, i: int, j: int) -> Q:
    l = ctx.mp.rank
    if i == j == l + 1:
        weight = ctx.nu1 * ctx.nu2 if ctx.two_torus else ctx.nu**2
        return 1 / (weight * ctx.mp.mckay_order)
    if i <= l and j <= l:
        return -ctx.mp.rootsystem.cartan[i - 1, j - 1]
    return Q(0)


def _reduce_unit(ctx: GwContext, idx: Sequence[int]) -> Q | None:
    """Any slot equal to l+1 reduces the correlator to the metric on the other two."""
    l = ctx.mp.rank
    idx = list(idx)
    if l + 1 in idx:
        idx.remove(l + 1)
        return gw_eta(ctx, *idx)
    return None


def _root_exps(ctx: GwContext, pt: EvalPoint | Sequence) -> list[Q]:
    q = pt.q if isinstance(pt, EvalPoint) else pt
    out = []
    for b in ctx.mp.rootsystem.positive_roots:
        E = root_exponential(q, b)
        if E == 1:
            raise DiscriminantError("point on discriminant")
        out.append(E)
    return out


def gw_triple(ctx: GwContext, i: int, j: int, k: int, pt: EvalPoint | Sequence) -> Q:
    """d^3 F_GW / dx_i dx_j dx_k for the one-torus (t, t)."""
    if ctx.two_torus:
        raise ValueError("use gw_triple_a2 for the two-torus")
    red = _reduce_unit(ctx, (i, j, k))
    if red is not None:
        return red
    return gw_quantum_from_exps(ctx, i, j, k, _root_exps(ctx, pt))


def gw_quantum_from_exps(ctx: GwContext, i: int, j: int, k: int, exps: Sequence[Q]) -> Q:
    """-nu sum_beta <a_i,b><a_j,b><a_k,b> coth(<b,h>/2), given E_b = e^{<b,h>} per positive root."""
    total = Q(0)
    for b, E in zip(ctx.mp.rootsystem.positive_roots, exps):
        w = b[i - 1] * b[j - 1] * b[k - 1]
        if w:
            total += w * (E + 1) / (E - 1)
    return -ctx.nu * total


def _frak_c(ctx: GwContext, i: int, j: int, k: int) -> Q:
    """Symmetric coefficient of the classical two-torus cubic."""
    i, j, k = sorted((i, j, k))
    l = ctx.mp.rank
    return (j * ctx.nu1 + (l + 1 - j) * ctx.nu2) * i * (l + 1 - k) / (l + 1)


def gw_classical_a2(ctx: GwContext, i: int, j: int, k: int) -> Q:
    """-sum C_ii' C_jj' C_kk' c_{i'j'k'} for i,j,k <= l."""
    l = ctx.mp.rank
    C = ctx.mp.rootsystem.cartan

    def nbhd(a):
        return [(b, C[a - 1, b - 1]) for b in range(max(1, a - 1), min(l, a + 1) + 1)]

    total = Q(0)
    for a, ca in nbhd(i):
        for b, cb in nbhd(j):
            for c, cc in nbhd(k):
                total += ca * cb * cc * _frak_c(ctx, a, b, c)
    return -total


def gw_triple_a2(ctx: GwContext, i: int, j: int, k: int, pt: EvalPoint | Sequence) -> Q:
    """Third derivatives of the two-torus A-type prepotential."""
    if not ctx.two_torus:
        raise ValueError("gw_triple_a2 needs a two-torus context")
    red = _reduce_unit(ctx, (i, j, k))
    if red is not None:
        return red
    quantum = Q(0)
    for b, E in zip(ctx.mp.rootsystem.positive_roots, _root_exps(ctx, pt)):
        w = b[i - 1] * b[j - 1] * b[k - 1]
        if w:
            quantum += w / (E - 1)  # E^{-1}/(1-E^{-1})
    return gw_classical_a2(ctx, i, j, k) - (ctx.nu1 + ctx.nu2) * quantum


def gw_triple_tensor(ctx: GwContext, pt: EvalPoint | Sequence) -> list[list[list[Q]]]:
    """All c_ijk, i,j,k in 1..l+1, as a nested list indexed from 0."""
    n = ctx.mp.rank + 1
    fn = gw_triple_a2 if ctx.two_torus else gw_triple
    exps = None if ctx.two_torus else _root_exps(ctx, pt)
    out = [[[Q(0)] * n for _ in range(n)] for _ in range(n)]
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            for k in range(j, n + 1):
                if exps is not None and n not in (i, j, k):
                    v = gw_quantum_from_exps(ctx, i, j, k, exps)
                else:
                    v = fn(ctx, i, j, k, pt)
                for a, b, c in {(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)}:
                    out[a - 1][b - 1][c - 1] = v
    return out


# ---------------------------------------------------------------------------
# Type D in the orthonormal coordinates tau_i = log kappa_i
# ---------------------------------------------------------------------------


def theta_cube(l: int, i: int, j: int, k: int) -> int:
    """sum_sigma Theta_{sigma i} Theta_{sigma j} Theta_{sigma k}."""
    _, Theta = dtype_matrices(l)
    return int(sum(r[i - 1] * r[j - 1] * r[k - 1] for r in Theta.entries))


def dtype_tau_triple(l: int, i: int, j: int, k: int, etau: Sequence) -> Q:
    """(1/2nu) d^3 F^+ / dtau_i dtau_j dtau_k = -sum Theta^3 T/(1-T), T = prod e^{-Theta tau}."""
    _, Theta = dtype_matrices(l)
    etau = [Q(v) for v in etau]
    total = Q(0)
    for row in Theta.entries:
        w = row[i - 1] * row[j - 1] * row[k - 1]
        if not w:
            continue
        T = Q(1)
        for m in range(l):
            if row[m]:
                T *= etau[m] ** int(-row[m])
        if T == 1:
            raise DiscriminantError("point on discriminant")
        total += w * T / (1 - T)
    return -total


def dtype_kappa_exps(l: int, kappa: Sequence) -> list[Q]:
    """E_beta = e^{<beta,h>} for the positive roots of D_l, given kappa_i = e^{<eps_i,h>}.

    Ordered like RootSystem.positive_roots.
    """
    from .rootsys import build_root_system, dtype_theta_roots

    rs = build_root_system("D", l)
    _, Theta = dtype_matrices(l)
    by_root = {}
    for root, row in zip(dtype_theta_roots(l), Theta.entries):
        E = Q(1)
        for m in range(l):
            if row[m]:
                E *= Q(kappa[m]) ** int(row[m])
        by_root[root] = E
    return [by_root[b] for b in rs.positive_roots]


def x_to_tau_matrix(l: int) -> RatMatrix:
    """dx/dtau = C^{-1} G^T, so that x = C^{-1} G^T tau."""
    from .rootsys import build_root_system

    rs = build_root_system("D", l)
    G, _ = dtype_matrices(l)
    return rs.inverse_cartan @ G.transpose()
