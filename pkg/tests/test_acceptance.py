"""Acceptance criteria 1-11, one PASS/FAIL line each with its runtime.

Run with `pytest tests/test_acceptance.py` (lines appear in the terminal summary)
or `python tests/test_acceptance.py`.  All comparisons are exact.
"""

from __future__ import annotations

import itertools
import random
import time
from fractions import Fraction as Q

import pytest

from weyl_mirror import frobdual
from weyl_mirror.cli import lemma_point_checks, mirror_point_checks, mirror_points, sample_kappas
from weyl_mirror.exactalg import (
    eval_with_gradient,
    residue_at,
    residue_at_infinity,
    residue_sum_over_roots,
)
from weyl_mirror.gw import GwContext, dtype_tau_triple, gw_triple, theta_cube
from weyl_mirror.invariants import basic_invariants, reflect_point, root_exponential, weyl_denominator_value
from weyl_mirror.lg import (
    _expected_orders,
    build_superpotential,
    e6_pairing_matrix,
    integrand_for,
    kappa_from_point,
    lg_dual_eta,
    log_kappa_core,
)
from weyl_mirror.rootsys import dtype_matrices, marked_pair

E6 = marked_pair("E", 6)


def sgn(x):
    return (x > 0) - (x < 0)


def crit_sadm():
    got = [frobdual.admissible_exponents(marked_pair("E", l)) for l in (6, 7, 8)]
    return [(D, len(e)) for D, e in got] == [(12, 151), (24, 254), (60, 434)]


def crit_dual_metric():
    for l in range(4, 9):
        mp = marked_pair("D", l)
        C = mp.rootsystem.cartan
        for kappa in sample_kappas(mp, 20, 100 + l):
            sp = build_superpotential(mp, kappa)
            for i in range(1, l + 1):
                for j in range(i, l + 1):
                    if lg_dual_eta(sp, i, j) != -C[i - 1, j - 1]:
                        return False
            if lg_dual_eta(sp, l + 1, l + 1) != Q(1, 4 * (l - 2)):
                return False
    return True


def crit_lemma():
    for l in range(4, 8):
        mp = marked_pair("D", l)
        for idx, kappa in enumerate(sample_kappas(mp, 20, 200 + l)):
            if not all(c["equal"] for c in lemma_point_checks((mp, kappa, idx))):
                return False
    return True


def crit_d_mirror():
    for l in (4, 5, 6):
        mp = marked_pair("D", l)
        for idx, q in enumerate(mirror_points(mp, 10, 300 + l)):
            if not all(c["equal"] for c in mirror_point_checks((mp, q, idx))):
                return False
    return True


def crit_core_identities():
    for l in range(4, 9):
        for i in range(1, l + 1):
            for j in range(1, l + 1):
                expected = 2 * (l - i) if i == j else sgn(i - j) + 1
                if theta_cube(l, i, i, j) != expected:
                    return False
        mp = marked_pair("D", l)
        for kappa in sample_kappas(mp, 2, 400 + l):
            sp = build_superpotential(mp, kappa)
            for i in range(1, l + 1):
                if log_kappa_core(sp, i, i, i) != dtype_tau_triple(l, i, i, i, kappa) - (l - i):
                    return False
                for j in range(1, l + 1):
                    if j != i and log_kappa_core(sp, i, i, j) != dtype_tau_triple(l, i, i, j, kappa) - Q(sgn(i - j) + 1, 2):
                        return False
            for i, j, k in itertools.combinations(range(1, l + 1), 3):
                if log_kappa_core(sp, i, j, k) != 0 or dtype_tau_triple(l, i, j, k, kappa) != 0:
                    return False
    return True


def crit_a_mirror():
    for l in range(1, 6):
        for k in range(1, l + 1):
            mp = marked_pair("A", l, k)
            for idx, q in enumerate(mirror_points(mp, 10, 500 + 10 * l + k)):
                if not all(c["equal"] for c in mirror_point_checks((mp, q, idx))):
                    return False
    return True


def crit_e6_duality():
    F, fm = frobdual.embedded_e6()
    t0 = time.perf_counter()
    pts = frobdual.certified_points(E6, 0, fm)
    cert_s = time.perf_counter() - t0
    rep = frobdual.verify_duality(E6, F, fm, seed=0, points=pts)
    ok = rep.passed and rep.certificate and len(rep.points) == 151 and len(rep.checks) == 151 * 343
    return ok and cert_s < 60, f"certified points in {cert_s:.1f}s, {len(rep.checks)} entries"


def crit_e6_wdvv():
    F, _ = frobdual.embedded_e6()
    _, eta = frobdual.find_unit_and_eta(F)
    rng = random.Random(8)
    pts = [frobdual.TPoint(tuple(rng.choice(frobdual.POOL) for _ in range(6)), rng.choice(frobdual.POOL)) for _ in range(10)]
    if any(frobdual.wdvv_residual(F, eta, t) for t in pts):
        return False
    G = F.perturbed(((1, 0, 0, 0, 1, 0), 0, 8), Q(1, 7))
    return any(frobdual.wdvv_residual(G, eta, t) for t in pts[:3])


def crit_e6_pairing():
    M = e6_pairing_matrix()
    C = E6.rootsystem.cartan
    if any(M[i][i] != 12 for i in range(6)):
        return False
    for i in range(6):
        for j in range(6):
            if i != j and M[i][j] != (-6 if C[i, j] == -1 else 0):
                return False
            if -Q(M[i][j], 6) != -C[i, j]:
                return False
    return True


def _residue_theorem(sp, idx):
    f = integrand_for(sp, *idx)
    orders = _expected_orders(sp, idx)
    total = residue_at_infinity(f) + residue_sum_over_roots(f, sp.dlog.num)
    for p in sp.support:
        total += residue_at(f, p, orders.get(p, 0))
    return total == 0


def _scaling(mp, fn, pt):
    c = Q(3, 5)
    a, b = fn(pt), fn(pt.with_u(pt.u * c))
    d = list(mp.degrees) + [Q(0)]
    n = mp.rank + 1
    for i, j, k in itertools.product(range(n), repeat=3):
        w = mp.root_order * (d[i] + d[j] - d[k])
        if b[i][j][k] != c ** int(w) * a[i][j][k]:
            return False
    return True


def crit_properties():
    # global residue theorem, critical points included
    for fam, l, k in [("D", 4, None), ("D", 5, None), ("D", 6, None), ("A", 2, 1), ("A", 3, 2), ("A", 4, 3)]:
        mp = marked_pair(fam, l, k)
        sp = build_superpotential(mp, kappa_from_point(mp, mirror_points(mp, 1, 600 + l)[0]))
        if not all(_residue_theorem(sp, idx) for idx in itertools.combinations_with_replacement(range(1, l + 2), 3)):
            return False
    # coth form of the quantum part vs its Li_0 expansion
    for fam, l, k in [("A", 3, 2), ("D", 5, None), ("E", 6, None)]:
        mp = marked_pair(fam, l, k)
        ctx = GwContext(mp, Q(3, 2))
        q = [Q(p, 3) for p in (2, 5, 7, 11, 13, 17)[:l]]
        for i, j, kk in itertools.combinations_with_replacement(range(1, l + 1), 3):
            total = Q(0)
            for b in mp.rootsystem.positive_roots:
                w = b[i - 1] * b[j - 1] * b[kk - 1]
                if w:
                    inv = 1 / root_exponential(q, b)
                    total += w * (1 + 2 * inv / (1 - inv))
            if gw_triple(ctx, i, j, kk, q) != -ctx.nu * total:
                return False
    # grading of both l tensors
    F, fm = frobdual.embedded_e6()
    pt = frobdual.sample_points(E6, 1, 5)[0]
    if not _scaling(E6, lambda p: frobdual.ell_gw(E6, p), pt):
        return False
    if not _scaling(E6, lambda p: frobdual.ell_aw(E6, p, F, fm), pt):
        return False
    # anti-invariance of the Weyl denominator and wall vanishing of basic invariants
    rng = random.Random(10)
    for fam, l, k in [("A", 3, 2), ("D", 5, None), ("E", 6, None)]:
        mp = marked_pair(fam, l, k)
        rs = mp.rootsystem
        q = frobdual.sample_points(mp, 1, 10)[0].q
        d = weyl_denominator_value(rs, q)
        if any(weyl_denominator_value(rs, reflect_point(rs, j, q)) != -d for j in range(l)):
            return False
        Ys = basic_invariants(mp)
        for beta, height in zip(rs.positive_roots, rs.root_heights):
            qq = [rng.choice(frobdual.POOL) for _ in range(l)]
            m = next(a for a, b in enumerate(beta) if abs(b) == 1)
            rest = Q(1)
            for a, b in enumerate(beta):
                if a != m and b:
                    rest *= qq[a] ** b
            qq[m] = (1 / rest) ** beta[m]
            for Y in Ys:
                _, grad = eval_with_gradient(Y, qq)
                if sum(h * g for h, g in zip(height, grad)) != 0:
                    return False
    # G^T G = C
    for l in range(4, 9):
        G, _ = dtype_matrices(l)
        if G.transpose() @ G != marked_pair("D", l).rootsystem.cartan:
            return False
    return True


def crit_conditional_e78(tmp_dir=None):
    for l in (7, 8):
        try:
            frobdual.load_data(marked_pair("E", l))
            return False
        except frobdual.DataError as exc:
            if "prepotential data required" not in str(exc):
                return False
    # the file route runs the same pipeline; exercised here with the E6 data files
    from importlib import resources

    root = resources.files("weyl_mirror").joinpath("data")
    F, fm = frobdual.load_data(E6, root.joinpath("e6_prepotential.txt"), root.joinpath("e6_flatmap.txt"))
    rep = frobdual.verify_duality(E6, F, fm, points=frobdual.sample_points(E6, 2, 3))
    ok = all(c.equal for c in rep.checks)
    return ok, "conditional: no E7/E8 data supplied; file route exercised with E6 data"


CRITERIA = [
    (1, "sadm table for E6, E7, E8", crit_sadm, 1),
    (2, "type D dual metric, l = 4..8", crit_dual_metric, 10),
    (3, "per-pole closed forms vs residue oracle, l = 4..7", crit_lemma, 30),
    (4, "type D mirror triples, l = 4..6", crit_d_mirror, 60),
    (5, "core decomposition and Theta identities, l = 4..8", crit_core_identities, 10),
    (6, "type A mirror triples, l <= 5, all marked nodes", crit_a_mirror, 60),
    (7, "E6 duality on 151 certified points", crit_e6_duality, 600),
    (8, "E6 WDVV and perturbation detection", crit_e6_wdvv, 30),
    (9, "E6 minuscule pairing", crit_e6_pairing, 1),
    (10, "property suites", crit_properties, None),
    (11, "E7/E8 duality with user data", crit_conditional_e78, None),
]


def run_criterion(num):
    _, label, fn, budget = CRITERIA[num - 1]
    start = time.perf_counter()
    res = fn()
    elapsed = time.perf_counter() - start
    ok, note = res if isinstance(res, tuple) else (res, "")
    within = budget is None or elapsed < budget
    status = "PASS" if ok and within else "FAIL"
    limit = f"budget {budget}s" if budget is not None else "no budget"
    line = f"criterion {num}: {status} {label} ({elapsed:.2f}s, {limit})"
    if note:
        line += f" [{note}]"
    if ok and not within:
        line += " [over budget]"
    return status == "PASS", line


@pytest.mark.parametrize("num", [c[0] for c in CRITERIA])
def test_criterion(num, acceptance_log):
    ok, line = run_criterion(num)
    acceptance_log.append(line)
    print(line)
    assert ok, line


if __name__ == "__main__":
    for num, *_ in CRITERIA:
        print(run_criterion(num)[1], flush=True)
