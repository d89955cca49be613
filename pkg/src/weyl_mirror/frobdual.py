"""Prepotentials, WDVV, and the pointwise duality check between the
Gromov-Witten product and the extended affine Weyl product.

The comparison runs in the chart y_a = e^{d_a x_{l+1}} Y_a of extended basic
invariants. Both (2,1)-tensors there are polynomial in y and e^{y_{l+1}} of
bounded degree, so equality on a point set whose generalised Vandermonde
minor is nonsingular proves the identity everywhere.
"""

from __future__ import annotations

import random
import re
import time
from dataclasses import dataclass, field
from fractions import Fraction as Q
from functools import cached_property, lru_cache
from importlib import resources
from itertools import product
from typing import Sequence

from .exactalg import RatMatrix, eval_with_gradient, mat_inverse, nonzero_det_certificate
from .gw import GwContext, gw_triple_tensor
from .invariants import (
    EvalPoint,
    FlatMap,
    FlatTerm,
    basic_invariants,
    extended_jacobian,
    weyl_denominator_value,
)
from .rootsys import MarkedPair, marked_pair

Tensor = list[list[list[Q]]]

# key: (powers of t_1..t_l, polynomial power of t_{l+1}, exponential weight k of e^{k t_{l+1}})
TermKey = tuple[tuple[int, ...], int, int]


class DataError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Prepotentials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TPoint:
    """Flat point: t_1..t_l, s = e^{t_{l+1}}, and optionally t_{l+1} itself."""

    t: tuple[Q, ...]
    s: Q
    t_last: Q | None = None


@dataclass(frozen=True)
class Prepotential:
    nflat: int
    terms: dict[TermKey, Q] = field(hash=False, compare=True)

    @property
    def l(self) -> int:
        return self.nflat - 1

    def perturbed(self, key: TermKey, delta) -> Prepotential:
        new = dict(self.terms)
        new[key] = new.get(key, Q(0)) + Q(delta)
        if not new[key]:
            del new[key]
        return Prepotential(self.nflat, new)

    @cached_property
    def _derivs(self) -> dict[tuple[int, ...], dict[TermKey, Q]]:
        return {(): dict(self.terms)}

    def derivative_terms(self, idx: Sequence[int]) -> dict[TermKey, Q]:
        """Symbolic partial derivative along the 1-based directions idx (sorted for caching)."""
        key = tuple(sorted(idx))
        cache = self._derivs
        if key in cache:
            return cache[key]
        base = self.derivative_terms(key[:-1])
        out = _diff(base, key[-1], self.l)
        cache[key] = out
        return out


def _diff(terms: dict[TermKey, Q], A: int, l: int) -> dict[TermKey, Q]:
    out: dict[TermKey, Q] = {}

    def add(k, v):
        out[k] = out.get(k, Q(0)) + v
        if not out[k]:
            del out[k]

    for (exps, p, k), c in terms.items():
        if A <= l:
            e = exps[A - 1]
            if e:
                new = list(exps)
                new[A - 1] -= 1
                add((tuple(new), p, k), c * e)
        else:
            if p:
                add((exps, p - 1, k), c * p)
            if k:
                add((exps, p, k), c * k)
    return out


def _eval_terms(terms: dict[TermKey, Q], tpt: TPoint) -> Q:
    total = Q(0)
    for (exps, p, k), c in terms.items():
        v = c
        for t, e in zip(tpt.t, exps):
            if e:
                v *= t**e
        if p:
            if tpt.t_last is None:
                raise ValueError("t_{l+1} value required for this derivative")
            v *= tpt.t_last**p
        if k:
            v *= tpt.s**k
        total += v
    return total


def third_derivative(F: Prepotential, A: int, B: int, C: int, tpt: TPoint) -> Q:
    return _eval_terms(F.derivative_terms((A, B, C)), tpt)


def third_derivative_tensor(F: Prepotential, tpt: TPoint) -> Tensor:
    n = F.nflat
    out = [[[Q(0)] * n for _ in range(n)] for _ in range(n)]
    for A in range(1, n + 1):
        for B in range(A, n + 1):
            for C in range(B, n + 1):
                v = third_derivative(F, A, B, C, tpt)
                for a, b, c in {(A, B, C), (A, C, B), (B, A, C), (B, C, A), (C, A, B), (C, B, A)}:
                    out[a - 1][b - 1][c - 1] = v
    return out


def _is_constant(terms: dict[TermKey, Q]) -> bool:
    return all(not any(e) and p == 0 and k == 0 for (e, p, k) in terms)


def find_unit_and_eta(F: Prepotential) -> tuple[int, RatMatrix]:
    """First direction e (1-based) whose third derivatives d_e d_B d_C F are all constant."""
    n = F.nflat
    for e in range(1, n + 1):
        rows = []
        ok = True
        for B in range(1, n + 1):
            row = []
            for C in range(1, n + 1):
                terms = F.derivative_terms((e, B, C))
                if not _is_constant(terms):
                    ok = False
                    break
                row.append(sum(terms.values(), Q(0)))
            if not ok:
                break
            rows.append(row)
        if ok:
            eta = RatMatrix(rows)
            if eta.det() != 0:
                return e, eta
    raise ValueError("no flat unit direction")


def wdvv_residual(F: Prepotential, eta: RatMatrix, tpt: TPoint) -> int:
    """Largest |numerator| among all WDVV brackets at tpt (0 iff associativity holds there)."""
    ginv = mat_inverse(eta).entries
    n = F.nflat
    c = third_derivative_tensor(F, tpt)
    # X[A][B][D] = sum_C c_ABC eta^{CD}
    X = [[[sum((c[A][B][C] * ginv[C][D] for C in range(n)), Q(0)) for D in range(n)] for B in range(n)] for A in range(n)]
    worst = 0
    for A, B, M, N in product(range(n), repeat=4):
        v = sum((X[A][B][D] * c[D][M][N] - X[A][M][D] * c[D][B][N] for D in range(n)), Q(0))
        worst = max(worst, abs(v.numerator))
    return worst


def raise_indices(c: Tensor, ginv: Sequence[Sequence[Q]]) -> Tensor:
    """(c)^{AB}_C = sum eta^{AM} eta^{BN} c_MNC."""
    n = len(c)
    half = [[[sum((ginv[A][M] * c[M][N][C] for M in range(n) if ginv[A][M]), Q(0)) for C in range(n)] for N in range(n)] for A in range(n)]
    return [[[sum((ginv[B][N] * half[A][N][C] for N in range(n) if ginv[B][N]), Q(0)) for C in range(n)] for B in range(n)] for A in range(n)]


def c_tensor_upper(F: Prepotential, eta: RatMatrix, tpt: TPoint) -> Tensor:
    return raise_indices(third_derivative_tensor(F, tpt), mat_inverse(eta).entries)


def _transform(c: Tensor, P: Sequence[Sequence[Q]], R: Sequence[Sequence[Q]]) -> Tensor:
    """out^{ab}_e = sum_{ijk} P[a][i] P[b][j] c^{ij}_k R[k][e]."""
    n = len(c)
    m = len(P)
    s1 = [[[sum((c[i][j][k] * R[k][e] for k in range(n) if R[k][e]), Q(0)) for e in range(m)] for j in range(n)] for i in range(n)]
    s2 = [[[sum((P[b][j] * s1[i][j][e] for j in range(n) if P[b][j]), Q(0)) for e in range(m)] for b in range(m)] for i in range(n)]
    return [[[sum((P[a][i] * s2[i][b][e] for i in range(n) if P[a][i]), Q(0)) for e in range(m)] for b in range(m)] for a in range(m)]


# ---------------------------------------------------------------------------
# Initial conditions
# ---------------------------------------------------------------------------


def degree_bound(mp: MarkedPair) -> Q:
    d = list(mp.extended_degrees())
    return max(a + b - c for a in d for b in d for c in d)


def admissible_exponents(mp: MarkedPair) -> tuple[Q, list[tuple[int, ...]]]:
    """(D, all n >= 0 with sum n_i d_i <= D) in lexicographic order."""
    D = degree_bound(mp)
    d = list(mp.degrees)
    out: list[tuple[int, ...]] = []

    def rec(i, prefix, budget):
        if i == len(d):
            out.append(tuple(prefix))
            return
        n = 0
        while n * d[i] <= budget:
            rec(i + 1, prefix + [n], budget - n * d[i])
            n += 1

    rec(0, [], D)
    return D, out


def vandermonde_matrix(Yvals: Sequence[Sequence[Q]], exps: Sequence[Sequence[int]]) -> RatMatrix:
    rows = []
    for n in exps:
        row = []
        for ys in Yvals:
            v = Q(1)
            for y, e in zip(ys, n):
                if e:
                    v *= y**e
            row.append(v)
        rows.append(row)
    return RatMatrix(rows)


def vandermonde_certificate(mp: MarkedPair, Ys, points: Sequence[EvalPoint]) -> bool:
    _, exps = admissible_exponents(mp)
    if len(points) != len(exps):
        raise ValueError("need exactly |S_adm| points")
    Yvals = [[Y.evaluate(p.q) for Y in Ys] for p in points]
    return nonzero_det_certificate(vandermonde_matrix(Yvals, exps))


# ---------------------------------------------------------------------------
# The two (2,1)-tensors in the y chart
# ---------------------------------------------------------------------------


def intersection_form(mp: MarkedPair) -> RatMatrix:
    """-C on the Cartan torus, d-hat on the extra direction."""
    l = mp.rank
    C = mp.rootsystem.cartan
    return RatMatrix([[-C[i, j] for j in range(l)] + [0] for i in range(l)] + [[0] * l + [mp.dhat]])


def gw_scale(mp: MarkedPair) -> Q:
    """x_{l+1} of the Gromov-Witten chart (one-torus, nu = 1) per unit of the invariant chart."""
    return 2 * mp.dhat


def gw_tensor_invariant_chart(mp: MarkedPair, pt: EvalPoint, nu=Q(1)) -> Tensor:
    """Gromov-Witten third derivatives in the chart (x_1..x_l, x_{l+1}) of the extended invariants.

    The Gromov-Witten coordinate along the identity class is gw_scale * x_{l+1}.
    """
    l = mp.rank
    ctx = GwContext(mp, nu)
    c = gw_triple_tensor(ctx, pt)
    s = gw_scale(mp)
    for i in range(l + 1):
        for j in range(l + 1):
            for k in range(l + 1):
                c[i][j][k] *= s ** [i, j, k].count(l)
    return c


def ell_gw(mp: MarkedPair, pt: EvalPoint) -> Tensor:
    """(l_GW)^{ab}_e = sum c_ijk (eta_flat^-1 J^T)_{i a} (eta_flat^-1 J^T)_{j b} (J^-1)_{k e}."""
    _, J = extended_jacobian(mp, pt)
    try:
        Jinv = mat_inverse(J)
    except ZeroDivisionError:
        raise ArithmeticError("degenerate point") from None
    ginv = mat_inverse(intersection_form(mp))
    c = raise_indices(gw_tensor_invariant_chart(mp, pt), ginv.entries)
    return _transform(c, J.entries, Jinv.entries)


def ell_aw(mp: MarkedPair, pt: EvalPoint, F: Prepotential, fm: FlatMap, eta: RatMatrix | None = None) -> Tensor:
    """sum dy_a/dt_L dy_b/dt_M dt_N/dy_e (c_AW)^{LM}_N at the point."""
    ys, Jy = extended_jacobian(mp, pt)
    ts, s, Jt = fm.evaluate(mp, pt)
    try:
        Jy_inv = mat_inverse(Jy)
        Jt_inv = mat_inverse(Jt)
    except ZeroDivisionError:
        raise ArithmeticError("degenerate point") from None
    if eta is None:
        _, eta = find_unit_and_eta(F)
    tpt = TPoint(tuple(ts), s)
    c = c_tensor_upper(F, eta, tpt)
    dy_dt = (Jy @ Jt_inv).entries
    dt_dy = (Jt @ Jy_inv).entries
    return _transform(c, dy_dt, dt_dy)


# ---------------------------------------------------------------------------
# Sampling and the verification pipeline
# ---------------------------------------------------------------------------

_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97)
POOL = tuple(sorted({Q(a, b) for a in _PRIMES[:8] for b in (1,) + _PRIMES[:8]} - {Q(1)}))


def _off_walls(mp: MarkedPair, q: Sequence[Q]) -> bool:
    return weyl_denominator_value(mp.rootsystem, q) != 0


def sample_points(mp: MarkedPair, count: int, seed: int, max_tries: int = 10000) -> list[EvalPoint]:
    """Deterministic rational points off the discriminant, drawn from a pool of prime ratios."""
    rng = random.Random(seed)
    out: list[EvalPoint] = []
    seen = set()
    tries = 0
    N = mp.root_order
    while len(out) < count:
        tries += 1
        if tries > max_tries:
            raise RuntimeError("retry budget exhausted while sampling points")
        q = tuple(rng.choice(POOL) for _ in range(mp.rank))
        u = rng.choice(POOL)
        if q in seen or not _off_walls(mp, q):
            continue
        seen.add(q)
        out.append(EvalPoint(q, u, N))
    return out


@dataclass
class CheckRecord:
    alpha: int
    beta: int
    eps: int
    point_index: int
    lhs: Q
    rhs: Q

    @property
    def equal(self) -> bool:
        return self.lhs == self.rhs

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "eps": self.eps,
            "point_index": self.point_index,
            "lhs": str(self.lhs),
            "rhs": str(self.rhs),
            "equal": self.equal,
        }


@dataclass
class DualityReport:
    family: str
    rank: int
    seed: int
    D: Q
    s_adm_size: int
    certificate: bool
    points: list[EvalPoint]
    checks: list[CheckRecord]
    elapsed_ms: int = 0
    normalization: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.certificate and all(c.equal for c in self.checks)

    def mismatches(self) -> list[CheckRecord]:
        return [c for c in self.checks if not c.equal]

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "rank": self.rank,
            "seed": self.seed,
            "D": str(self.D),
            "s_adm_size": self.s_adm_size,
            "certificate": self.certificate,
            "normalization": self.normalization,
            "points": [
                {"q": [str(v) for v in p.q], "u": str(p.u), "root_order": p.root_order} for p in self.points
            ],
            "checks": [c.to_json() for c in self.checks],
            "pass": self.passed,
            "elapsed_ms": self.elapsed_ms,
        }


def _compare_at(args) -> list[tuple[int, int, int, Q, Q]]:
    mp, pt, F, fm, eta = args
    lhs = ell_gw(mp, pt)
    rhs = ell_aw(mp, pt, F, fm, eta)
    n = mp.rank + 1
    return [(a, b, e, lhs[a][b][e], rhs[a][b][e]) for a in range(n) for b in range(n) for e in range(n)]


def parallel_map(fn, items, threads: int):
    """Map over items, in a process pool when threads > 1; result order follows items."""
    if threads <= 1:
        return [fn(x) for x in items]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * threads))))


def certified_points(mp: MarkedPair, seed: int, fm: FlatMap | None = None, max_batches: int = 20) -> list[EvalPoint]:
    """|S_adm| sampled points with a nonsingular Vandermonde minor and invertible Jacobians."""
    _, exps = admissible_exponents(mp)
    Ys = basic_invariants(mp)
    for batch in range(max_batches):
        pts = sample_points(mp, len(exps), seed + 7919 * batch)
        good = True
        for p in pts:
            _, J = extended_jacobian(mp, p)
            if J.det() == 0:
                good = False
                break
            if fm is not None and fm.evaluate(mp, p)[2].det() == 0:
                good = False
                break
        if good and vandermonde_certificate(mp, Ys, pts):
            return pts
    raise RuntimeError("no certified point set within the retry budget")


def verify_duality(
    mp: MarkedPair,
    F: Prepotential | None,
    fm: FlatMap | None,
    seed: int = 0,
    threads: int = 1,
    points: Sequence[EvalPoint] | None = None,
) -> DualityReport:
    if mp.family != "E":
        raise DataError("prepotential data required (types A and D are checked through the mirror route)")
    if F is None or fm is None:
        raise DataError("prepotential data required")
    start = time.perf_counter()
    D, exps = admissible_exponents(mp)
    _, eta = find_unit_and_eta(F)
    if points is None:
        points = certified_points(mp, seed, fm)
        cert = True
    else:
        cert = len(points) == len(exps) and vandermonde_certificate(mp, basic_invariants(mp), points)
    results = parallel_map(_compare_at, [(mp, p, F, fm, eta) for p in points], threads)
    checks = [
        CheckRecord(a + 1, b + 1, e + 1, idx, lhs, rhs)
        for idx, res in enumerate(results)
        for a, b, e, lhs, rhs in res
    ]
    elapsed = int((time.perf_counter() - start) * 1000)
    norm = {
        "nu": "1",
        "x_gw_last": f"{gw_scale(mp)} * x_{mp.rank + 1}",
        "raising_metric": "diag(-C, dhat)",
        "flat_last": f"t_{mp.rank + 1} = {fm.log_coeff} * x_{mp.rank + 1}",
    }
    return DualityReport(mp.family, mp.rank, seed, D, len(exps), cert, list(points), checks, elapsed, norm)


# ---------------------------------------------------------------------------
# Text formats
# ---------------------------------------------------------------------------


def _lines(text: str):
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            yield line


def _header(lines, kind: str) -> tuple[str, int]:
    try:
        head = next(lines)
    except StopIteration:
        raise DataError(f"empty {kind} file") from None
    parts = head.split()
    if len(parts) != 3 or parts[0] != kind:
        raise DataError(f"expected header '{kind} <family> <rank>'")
    try:
        return parts[1].upper(), int(parts[2])
    except ValueError:
        raise DataError("bad rank in header") from None


def parse_prepotential(text: str) -> tuple[str, int, Prepotential]:
    lines = _lines(text)
    family, rank = _header(lines, "prepotential")
    terms: dict[TermKey, Q] = {}
    for line in lines:
        m = re.fullmatch(r"([-\d\s]+)\|\s*(-?\d+)\s*:\s*(\S+)", line)
        if not m:
            raise DataError(f"cannot parse prepotential line: {line!r}")
        exps = [int(x) for x in m.group(1).split()]
        if len(exps) == rank:
            exps.append(0)
        if len(exps) != rank + 1 or any(e < 0 for e in exps):
            raise DataError(f"bad exponent vector: {line!r}")
        try:
            coeff = Q(m.group(3))
        except (ValueError, ZeroDivisionError):
            raise DataError(f"bad coefficient: {line!r}") from None
        key = (tuple(exps[:rank]), exps[rank], int(m.group(2)))
        terms[key] = terms.get(key, Q(0)) + coeff
    return family, rank, Prepotential(rank + 1, {k: v for k, v in terms.items() if v})


def parse_flatmap(text: str) -> FlatMap:
    lines = _lines(text)
    family, rank = _header(lines, "flatmap")
    coords: list[list[FlatTerm]] = [[] for _ in range(rank)]
    log_coeff = None
    gens = set()
    for line in lines:
        m = re.fullmatch(r"(\d+)\s*:\s*(\S+)(.*)", line)
        if not m:
            raise DataError(f"cannot parse flat-map line: {line!r}")
        A = int(m.group(1))
        try:
            coeff = Q(m.group(2))
        except (ValueError, ZeroDivisionError):
            raise DataError(f"bad coefficient: {line!r}") from None
        factors = m.group(3).split()
        if factors == ["log"]:
            if A != rank + 1:
                raise DataError("only the last flat coordinate may be logarithmic")
            log_coeff = coeff
            continue
        if not 1 <= A <= rank:
            raise DataError(f"coordinate index out of range: {line!r}")
        upow = Q(0)
        exps = [0] * rank
        for fac in factors:
            fm_ = re.fullmatch(r"(u|[WS]\d+)(?:\^(\d+(?:/\d+)?))?", fac)
            if not fm_:
                raise DataError(f"bad factor {fac!r}")
            power = Q(fm_.group(2) or 1)
            name = fm_.group(1)
            if name == "u":
                upow += power
            else:
                gens.add(name[0])
                i = int(name[1:])
                if not 1 <= i <= rank or power.denominator != 1:
                    raise DataError(f"bad factor {fac!r}")
                exps[i - 1] += int(power)
        coords[A - 1].append(FlatTerm(coeff, upow, tuple(exps)))
    if log_coeff is None:
        raise DataError("missing logarithmic coordinate")
    if len(gens) > 1:
        raise DataError("mixing W and S generators is not supported")
    return FlatMap(family, rank, tuple(tuple(c) for c in coords), log_coeff, gens.pop() if gens else "W")


@lru_cache(maxsize=None)
def embedded_e6() -> tuple[Prepotential, FlatMap]:
    root = resources.files("weyl_mirror").joinpath("data")
    _, _, F = parse_prepotential(root.joinpath("e6_prepotential.txt").read_text(encoding="utf-8"))
    fm = parse_flatmap(root.joinpath("e6_flatmap.txt").read_text(encoding="utf-8"))
    return F, fm


def load_data(mp: MarkedPair, prepotential_path=None, flatmap_path=None) -> tuple[Prepotential, FlatMap]:
    """Embedded data for E6, file data otherwise."""
    if prepotential_path is None and flatmap_path is None:
        if mp.family == "E" and mp.rank == 6:
            return embedded_e6()
        raise DataError("prepotential data required")
    if prepotential_path is None or flatmap_path is None:
        raise DataError("prepotential data required")
    with open(prepotential_path, encoding="utf-8") as fh:
        fam, rank, F = parse_prepotential(fh.read())
    with open(flatmap_path, encoding="utf-8") as fh:
        fm = parse_flatmap(fh.read())
    if (fam, rank) != (mp.family, mp.rank) or (fm.family, fm.rank) != (mp.family, mp.rank):
        raise DataError("data files do not match the requested root system")
    return F, fm
