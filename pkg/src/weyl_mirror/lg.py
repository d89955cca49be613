"""Relativistic Toda superpotentials of types A and D and their dual
Frobenius structure from residues over the divisor of lambda.

Every residue integrand is assembled from logarithmic derivatives of lambda,
so powers of lambda cancel before any residue is taken and all poles sit at
rational points (0, infinity, +-1, the kappa's and their inverses).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction as Q
from functools import cached_property
from typing import Sequence

from .exactalg import (
    RatMatrix,
    UniRational,
    _divide_linear,
    mat_inverse,
    poly_add,
    poly_eval,
    poly_from_roots,
    poly_mul,
    poly_scale,
    residue_at,
    residue_at_infinity,
)
from .invariants import EvalPoint, basic_invariants, orbit_sums
from .rootsys import MarkedPair, dtype_matrices, weyl_orbit

INF = "inf"


class GenericityError(ValueError):
    pass


@dataclass(frozen=True)
class Superpotential:
    """lambda(mu) at a point, with log-derivatives along the deformation directions.

    For type D the directions are log kappa_1..log kappa_l followed by x_{l+1};
    for type A they are x_1..x_l followed by x_{l+1}.
    """

    mp: MarkedPair
    kappa: tuple[Q, ...]
    overall: Q
    lam: UniRational
    logderivs: tuple[UniRational, ...]
    dlog: UniRational  # d log(lambda) / d mu
    weight: Q  # phi^2 = weight * (dmu/mu)^2
    support: tuple[Q, ...] = field(repr=False)
    log_den_roots: tuple[tuple[Q, ...], ...] = field(default=(), repr=False)  # roots of logderivs[m].den
    dlog_roots: tuple[Q, ...] = field(default=(), repr=False)  # roots of dlog.den

    @property
    def family(self) -> str:
        return self.mp.family

    @property
    def l(self) -> int:
        return self.mp.rank

    @cached_property
    def _core(self) -> dict[tuple[int, int, int], Q]:
        return {}

    @cached_property
    def _integrands(self) -> dict[tuple, object]:
        return {}


def _check_generic(kappa: Sequence[Q], family: str) -> None:
    vals = list(kappa)
    if any(k == 0 for k in vals):
        raise GenericityError("non-generic kappa")
    if len(set(vals)) != len(vals):
        raise GenericityError("non-generic kappa")
    if family == "D":
        pts = vals + [1 / k for k in vals]
        if len(set(pts)) != len(pts) or any(p in (1, -1) for p in pts):
            raise GenericityError("non-generic kappa")
    else:
        pts = [1 / k for k in vals]
        if any(p in (0, 1) for p in pts):
            raise GenericityError("non-generic kappa")


def _dlog_linear(roots_with_mult) -> UniRational:
    """sum m/(mu - r) as a reduced rational function (distinct roots, nonzero m)."""
    roots = [r for r, _ in roots_with_mult]
    den = poly_from_roots(roots)
    num: tuple[Q, ...] = ()
    for r, m in roots_with_mult:
        cof, rem = _divide_linear(den, r)
        num = poly_add(num, poly_scale(cof, m))
    return UniRational.trusted(num, den)


def build_superpotential(mp: MarkedPair, kappa: Sequence, overall=1) -> Superpotential:
    """Toda superpotential at kappa (type D: kappa_1..kappa_l; type A: kappa_1..kappa_l)."""
    kappa = tuple(Q(k) for k in kappa)
    l = mp.rank
    if len(kappa) != l:
        raise ValueError("kappa must have l entries")
    _check_generic(kappa, mp.family)
    overall = Q(overall)
    if mp.family == "D":
        return _build_d(mp, kappa, overall)
    if mp.family == "A":
        return _build_a(mp, kappa, overall)
    raise ValueError("superpotentials are implemented for types A and D")


def _build_d(mp: MarkedPair, kappa, overall) -> Superpotential:
    l = mp.rank
    zeros = [k for k in kappa] + [1 / k for k in kappa]
    num = poly_scale(poly_from_roots(zeros), overall)
    den = poly_mul(poly_from_roots([0] * (l - 2)), poly_from_roots([1, 1, -1, -1]))
    lam = UniRational.trusted(num, den)
    dlog = _dlog_linear([(z, 1) for z in zeros] + [(Q(0), -(l - 2)), (Q(1), -2), (Q(-1), -2)])
    logs = []
    for k in kappa:
        # -k/(mu-k) + k^{-1}/(mu-k^{-1}) = (k^{-1} - k) mu / ((mu-k)(mu-k^{-1}))
        logs.append(UniRational.trusted((0, 1 / k - k), poly_from_roots([k, 1 / k])))
    logs.append(UniRational.constant(Q(1, 2)))
    support = tuple([Q(0), Q(1), Q(-1)] + zeros)
    den_roots = tuple((k, 1 / k) for k in kappa) + ((),)
    return Superpotential(mp, kappa, overall, lam, tuple(logs), dlog, Q(1), support, den_roots, tuple(zeros) + (Q(0), Q(1), Q(-1)))


def _a_weights(mp: MarkedPair) -> tuple[Q, Q]:
    l, k = mp.rank, mp.marked_node
    return Q(l + 1 - k), Q(k)


def _a_kappa_gradient(mp: MarkedPair) -> list[list[int]]:
    """g[j][a] = d log kappa_j / dx_a with log kappa_j = -sum_{i>=j} <alpha_i, h>."""
    l = mp.rank
    C = mp.rootsystem.cartan
    return [[-int(sum(C[i, a] for i in range(j, l))) for a in range(l)] for j in range(l)]


def _build_a(mp: MarkedPair, kappa, overall) -> Superpotential:
    l = mp.rank
    nu1, nu2 = _a_weights(mp)
    tot = nu1 + nu2
    e = (l + 1) * nu1 / tot  # pole order at q = 0
    if e.denominator != 1:
        raise ValueError("torus weights give a non-integral pole order")
    e = int(e)
    inv = [1 / k for k in kappa]
    # lambda = overall * (1-q) prod (1 - kappa_k q) / q^e
    lead = overall * (-1) ** (l + 1)
    for k in kappa:
        lead *= k
    lam = UniRational.trusted(poly_scale(poly_from_roots([Q(1)] + inv), lead), poly_from_roots([0] * e))
    dlog = _dlog_linear([(Q(1), 1)] + [(r, 1) for r in inv] + [(Q(0), -e)])
    g = _a_kappa_gradient(mp)
    base = poly_from_roots(inv)  # prod (q - 1/kappa_k)
    logs = []
    for a in range(l):
        c = -nu1 / tot * sum(g[j][a] for j in range(l))
        # -kappa q/(1-kappa q) = q/(q - 1/kappa)
        num = poly_scale(base, c)
        for k in range(l):
            if g[k][a]:
                cof, _ = _divide_linear(base, inv[k])
                num = poly_add(num, poly_scale(poly_mul((0, 1), cof), g[k][a]))
        logs.append(UniRational.trusted(num, base))
    logs.append(UniRational.constant(1 / tot))
    support = tuple([Q(0), Q(1)] + inv)
    den_roots = tuple(tuple(inv) for _ in range(l)) + ((),)
    return Superpotential(mp, kappa, overall, lam, tuple(logs), dlog, tot, support, den_roots, (Q(1), *inv, Q(0)))


def kappa_from_point(mp: MarkedPair, q: Sequence) -> tuple[Q, ...]:
    """kappa values of the superpotential matching the torus point q = e^x."""
    l = mp.rank
    q = [Q(v) for v in q]
    if mp.family == "D":
        G, _ = dtype_matrices(l)
        M = [[int(G[i, j]) for j in range(l)] for i in range(l)]
    elif mp.family == "A":
        M = _a_kappa_gradient(mp)
    else:
        raise ValueError("kappa coordinates exist for types A and D only")
    out = []
    for row in M:
        v = Q(1)
        for a, n in enumerate(row):
            if n:
                v *= q[a] ** n
        out.append(v)
    return tuple(out)


# ---------------------------------------------------------------------------
# Residue integrands
# ---------------------------------------------------------------------------


def _integrand(sp: Superpotential, idx: Sequence[int], factor: Q) -> UniRational:
    """factor * prod_m logderiv_m / (mu^2 dlog), with common divisor factors cancelled."""
    key = (tuple(sorted(idx)), factor)
    cache = sp._integrands
    if key in cache:
        return cache[key]
    # linear factors at support points are tracked as exponents, the rest is expanded
    mult: dict[Q, int] = {r: 1 for r in sp.dlog_roots}
    mult[Q(0)] = mult.get(Q(0), 0) - 2
    num: tuple[Q, ...] = (Q(factor),)
    for m in key[0]:
        if sp.family == "D" and m == sp.l + 1:
            continue  # log kappa_{l+1} enters lambda linearly
        num = poly_mul(num, sp.logderivs[m - 1].num)
        for r in sp.log_den_roots[m - 1]:
            mult[r] = mult.get(r, 0) - 1
    for r, e in mult.items():
        while e < 0 and num:
            qn, rn = _divide_linear(num, r)
            if rn:
                break
            num, e = qn, e + 1
        mult[r] = e
    den = sp.dlog.num  # nonzero on the support: dlog has simple poles there
    for r, e in mult.items():
        if e > 0:
            num = poly_mul(num, poly_from_roots([r] * e))
        elif e < 0:
            den = poly_mul(den, poly_from_roots([r] * -e))
    f = UniRational.trusted(num, den)
    cache[key] = f
    cache[("poles",) + key] = {r: -e for r, e in mult.items() if e < 0}
    return f


def _support_residue(sp: Superpotential, idx: Sequence[int], factor: Q, where, bound: int) -> Q:
    """Residue of the integrand at a support point, skipping points where it is regular."""
    f = _integrand(sp, idx, factor)
    order = sp._integrands[("poles", tuple(sorted(idx)), factor)].get(where, 0)
    if order > bound:
        raise ArithmeticError("pole order exceeded")
    if order == 0:
        return Q(0)
    return residue_at(f, where, bound)


def _expected_orders(sp: Superpotential, idx: Sequence[int]) -> dict[object, int]:
    """Largest pole order allowed at each divisor point for this index pattern."""
    key = ("orders", tuple(sorted(idx)))
    cache = sp._integrands
    if key not in cache:
        cache[key] = _pole_bounds(sp, idx)
    return cache[key]


def _pole_bounds(sp: Superpotential, idx: Sequence[int]) -> dict[object, int]:
    l = sp.l
    orders: dict[object, int] = {Q(0): 1, INF: 0, Q(1): 0}
    if sp.family == "D":
        orders[Q(-1)] = 0
        for m, k in enumerate(sp.kappa, start=1):
            cnt = sum(1 for i in idx if i == m)
            orders[k] = orders[1 / k] = max(cnt - 1, 0)
    else:
        g = _a_kappa_gradient(sp.mp)
        for kk, k in enumerate(sp.kappa):
            cnt = sum(1 for i in idx if i <= l and g[kk][i - 1] != 0)
            orders[1 / k] = max(cnt - 1, 0)
    return orders


def _tag_value(sp: Superpotential, tag) -> object:
    if tag == INF or tag == "∞":
        return INF
    if isinstance(tag, tuple):  # ("kappa", m, +-1)
        _, m, sgn = tag
        k = sp.kappa[m - 1]
        return k if sgn > 0 else 1 / k
    return Q(tag)


def _residue(f: UniRational, where, mult: int) -> Q:
    if where == INF:
        return residue_at_infinity(f)
    return residue_at(f, where, mult)


def pole_tags(sp: Superpotential) -> list[object]:
    tags: list[object] = [Q(0), INF, Q(1)]
    if sp.family == "D":
        tags.append(Q(-1))
        for m in range(1, sp.l + 1):
            tags += [("kappa", m, 1), ("kappa", m, -1)]
    else:
        for m in range(1, sp.l + 1):
            tags.append(("kappa", m, -1))
    return tags


def per_pole_contribution(sp: Superpotential, i: int, j: int, k: int, tag) -> Q:
    """Type D: R^{[tag]}_{ijk} = -Res_tag prod L / (2 mu^2 dlog lambda), log-kappa indices."""
    if sp.family != "D":
        raise ValueError("per-pole contributions are defined for type D")
    where = _tag_value(sp, tag)
    if where == INF:
        return -residue_at_infinity(_integrand(sp, (i, j, k), Q(1, 2)))
    orders = _expected_orders(sp, (i, j, k))
    return -_support_residue(sp, (i, j, k), Q(1, 2), where, orders.get(where, 0))


def _divisor_sum(sp: Superpotential, idx: Sequence[int], factor: Q) -> Q:
    orders = _expected_orders(sp, idx)
    total = residue_at_infinity(_integrand(sp, idx, factor))
    for p in sp.support:
        total += _support_residue(sp, idx, factor, p, orders.get(p, 0))
    return -total


def log_kappa_core(sp: Superpotential, i: int, j: int, k: int) -> Q:
    """Type D: R_ijk = sum over the divisor support and infinity of the per-pole terms."""
    key = tuple(sorted((i, j, k)))
    cache = sp._core
    if key not in cache:
        cache[key] = _divisor_sum(sp, key, Q(1, 2))
    return cache[key]


def _transport_d(sp: Superpotential) -> list[list[Q]]:
    """M[i][a] = d log kappa_a / dx_i (with the x_{l+1} row carrying 1/2)."""
    l = sp.l
    G, _ = dtype_matrices(l)
    M = [[G[a, i] for a in range(l)] + [Q(0)] for i in range(l)]
    M.append([Q(0)] * l + [Q(1, 2)])
    return M


def lg_dual_triple(sp: Superpotential, i: int, j: int, k: int) -> Q:
    """Dual structure constant c(dx_i, dx_j, dx_k) from residues on the divisor of lambda."""
    if sp.family == "A":
        return _divisor_sum(sp, (i, j, k), sp.weight)
    M = _transport_d(sp)
    total = Q(0)
    for a, ma in enumerate(M[i - 1], start=1):
        if not ma:
            continue
        for b, mb in enumerate(M[j - 1], start=1):
            if not mb:
                continue
            for c, mc in enumerate(M[k - 1], start=1):
                if mc:
                    # c = 2 nu R with nu = 1
                    total += ma * mb * mc * 2 * log_kappa_core(sp, a, b, c)
    return total


def lg_dual_eta(sp: Superpotential, i: int, j: int) -> Q:
    return lg_dual_triple(sp, i, j, sp.l + 1)


def integrand_for(sp: Superpotential, i: int, j: int, k: int) -> UniRational:
    """The assembled residue integrand (type D uses log-kappa indices and weight 1/2)."""
    return _integrand(sp, (i, j, k), Q(1, 2) if sp.family == "D" else sp.weight)


# ---------------------------------------------------------------------------
# Closed forms of the per-pole residues in type D
# ---------------------------------------------------------------------------


def lemma_p(kappa: Sequence, i: int, j: int) -> Q:
    ki, kj = Q(kappa[i - 1]), Q(kappa[j - 1])
    return ki * (kj**2 - 1) / ((ki - kj) * (ki * kj - 1))


def lemma_q(kappa: Sequence, k: int) -> Q:
    kk = Q(kappa[k - 1])
    total = Q(0)
    for n, kn in enumerate(kappa, start=1):
        if n != k:
            kn = Q(kn)
            total += kn * (1 - kk**2) / ((kk - kn) * (kk * kn - 1))
    return total


def lemma_closed_form(l: int, kappa: Sequence, i: int, j: int, k: int, tag) -> Q:
    """Closed form for R^{[0]}, R^{[inf]}, R^{[+-1]}, and R^{[kappa_m]} + R^{[1/kappa_m]} (tag ("pair", m))."""

    def d(*xs):
        return int(all(x == xs[0] for x in xs))

    top = l + 1
    if tag in (0, INF, "∞"):
        return Q(d(i, j, k, top), 2 * (l - 2))
    if tag in (1, -1):
        return Q(0)
    _, m = tag
    dijm, djkm, dikm = d(i, j, m), d(j, k, m), d(i, k, m)
    if not (dijm + djkm + dikm):
        return Q(0)
    if d(i, j, k):
        return (dijm + djkm + dikm) * lemma_q(kappa, i) / 3
    unit = dijm * d(k, top) + djkm * d(i, top) + dikm * d(j, top)
    other = 0
    if not unit:
        # exactly one pair equals m; the remaining index n has p_{mn}
        rest = k if dijm else (j if dikm else i)
        other = lemma_p(kappa, m, rest)
    return (dijm + djkm + dikm) * (-unit + (1 - unit) * other)


# ---------------------------------------------------------------------------
# Spectral polynomials of the Weyl-orbit characteristic polynomial
# ---------------------------------------------------------------------------


def _poly_div_linear_exact(a, r):
    out, rem = _divide_linear(a, r)
    if rem != 0:
        raise ArithmeticError("not a root")
    return out


def _hessian(p, q):
    from .exactalg import _power_table

    n = p.nvars
    powers = _power_table(q, p._terms)
    H = [[Q(0)] * n for _ in range(n)]
    for exp, c in p.items():
        term = c
        for a, e in enumerate(exp):
            if e:
                term *= powers[a][e]
        for a in range(n):
            if exp[a]:
                for b in range(n):
                    if exp[b]:
                        H[a][b] += exp[a] * exp[b] * term
    return H


def spectral_poly(mp: MarkedPair, weight: Sequence[int], pt: EvalPoint, normalization: str = "average"):
    """Coefficients in mu of the orbit characteristic polynomial Q and of P = sum_n P_n lambda^n, n <= 2.

    Returns (Qcoeffs, {0: P0, 1: P1, 2: P2}). P is the Taylor expansion of Q under
    Y_k -> Y_k - lambda e^{-x_{l+1}} at the marked node k, computed by the exact
    first- and second-order chain rule through the Jacobian of the basic invariants.
    `normalization` selects the generators: orbit averages ("average") or orbit sums ("sum").
    """
    rs = mp.rootsystem
    l = rs.rank
    orbit = weyl_orbit(rs, weight)
    vals = []
    for w in orbit:
        v = Q(1)
        for a, n in enumerate(w):
            if n:
                v *= pt.q[a] ** n
        vals.append(v)
    if len(set(vals)) != len(vals):
        raise ValueError("orbit values must be distinct at the evaluation point")
    Qpoly = poly_from_roots(vals, lead=(-1) ** len(vals))  # prod (v - mu)
    # first and second x-derivatives of Q
    co1 = [_poly_div_linear_exact(Qpoly, v) for v in vals]  # prod_{k != i} (v_k - mu) times -1
    co1 = [poly_scale(c, -1) for c in co1]
    dQ = [()] * l
    HQ = [[() for _ in range(l)] for _ in range(l)]
    for i, (w, v, c) in enumerate(zip(orbit, vals, co1)):
        for a in range(l):
            if w[a]:
                dQ[a] = poly_add(dQ[a], poly_scale(c, w[a] * v))
                for b in range(l):
                    if w[b]:
                        HQ[a][b] = poly_add(HQ[a][b], poly_scale(c, w[a] * w[b] * v))
        for k2 in range(i + 1, len(vals)):
            w2, v2 = orbit[k2], vals[k2]
            c2 = poly_scale(_poly_div_linear_exact(c, v2), -1)
            for a in range(l):
                for b in range(l):
                    coef = w[a] * w2[b] + w2[a] * w[b]
                    if coef:
                        HQ[a][b] = poly_add(HQ[a][b], poly_scale(c2, coef * v * v2))
    gens = basic_invariants(mp) if normalization == "average" else orbit_sums(rs)
    from .exactalg import eval_with_gradient

    J = RatMatrix([eval_with_gradient(Y, pt.q)[1] for Y in gens])  # J[j][a] = dY_j/dx_a
    Jinv = mat_inverse(J)  # Jinv[a][j]
    # dQ/dY_j = sum_a Jinv[a][j] dQ/dx_a
    dQY = []
    for jj in range(l):
        acc: tuple[Q, ...] = ()
        for a in range(l):
            if Jinv[a, jj]:
                acc = poly_add(acc, poly_scale(dQ[a], Jinv[a, jj]))
        dQY.append(acc)
    k = mp.marked_node - 1
    hess = [_hessian(Y, pt.q) for Y in gens]
    # d^2Q/dY_k^2 = sum_{a,b} Jinv[a][k] Jinv[b][k] (HQ_ab - sum_j dQ/dY_j H^j_ab)
    second: tuple[Q, ...] = ()
    for a in range(l):
        wa = Jinv[a, k]
        if not wa:
            continue
        for b in range(l):
            wb = Jinv[b, k]
            if not wb:
                continue
            entry = HQ[a][b]
            for jj in range(l):
                if hess[jj][a][b]:
                    entry = poly_add(entry, poly_scale(dQY[jj], -hess[jj][a][b]))
            second = poly_add(second, poly_scale(entry, wa * wb))
    e = 1 / pt.exp_last(1)
    P = {0: Qpoly, 1: poly_scale(dQY[k], -e), 2: poly_scale(second, e * e / 2)}
    return Qpoly, P


def e6_pairing_matrix() -> list[list[int]]:
    """sum over the 27 weights of the minuscule E6 orbit of <w,alpha_i><w,alpha_j>."""
    from .rootsys import build_root_system

    rs = build_root_system("E", 6)
    orbit = weyl_orbit(rs, rs.fundamental_weight(0))
    return [[sum(w[i] * w[j] for w in orbit) for j in range(6)] for i in range(6)]


def poly_value(coeffs, x) -> Q:
    return poly_eval(coeffs, Q(x))
