"""Exact rational substrate: sparse Laurent polynomials, univariate rational
functions with residues, and small dense matrices over the rationals."""

from __future__ import annotations

from fractions import Fraction as Q
from math import lcm
from typing import Iterable, Mapping, Sequence

__all__ = [
    "Q",
    "MultiLaurent",
    "UniRational",
    "RatMatrix",
    "eval_with_gradient",
    "residue_at",
    "residue_at_infinity",
    "residue_sum_over_roots",
    "mat_inverse",
    "nonzero_det_certificate",
]

# Primes just below 2**61; a nonzero residue modulo any one of them proves det != 0.
CERT_PRIMES = (2305843009213693951, 2305843009213693921, 2305843009213693907)


# ---------------------------------------------------------------------------
# Sparse Laurent polynomials in q_a = e^{x_a}
# ---------------------------------------------------------------------------


class MultiLaurent:
    """Sparse Laurent polynomial with rational coefficients.

    Terms map an integer exponent vector to a nonzero coefficient. Instances
    are treated as immutable.
    """

    __slots__ = ("nvars", "_terms")

    def __init__(self, nvars: int, terms: Mapping[tuple[int, ...], object] | None = None):
        self.nvars = nvars
        clean: dict[tuple[int, ...], Q] = {}
        for exp, c in (terms or {}).items():
            exp = tuple(exp)
            if len(exp) != nvars:
                raise ValueError("exponent vector has wrong length")
            c = Q(c)
            if c:
                clean[exp] = clean.get(exp, Q(0)) + c
                if not clean[exp]:
                    del clean[exp]
        self._terms = dict(sorted(clean.items()))

    @classmethod
    def _raw(cls, nvars: int, terms: dict[tuple[int, ...], Q]) -> MultiLaurent:
        obj = cls.__new__(cls)
        obj.nvars = nvars
        obj._terms = dict(sorted((e, c) for e, c in terms.items() if c))
        return obj

    @classmethod
    def constant(cls, nvars: int, c) -> MultiLaurent:
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def monomial(cls, exp: Sequence[int], c=1) -> MultiLaurent:
        return cls(len(exp), {tuple(exp): c})

    @property
    def terms(self) -> dict[tuple[int, ...], Q]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, MultiLaurent):
            return self.nvars == other.nvars and self._terms == other._terms
        if isinstance(other, (int, Q)):
            return self == MultiLaurent.constant(self.nvars, other)
        return NotImplemented

    def __hash__(self):
        return hash((self.nvars, tuple(self._terms.items())))

    def __repr__(self) -> str:
        if not self._terms:
            return "MultiLaurent(0)"
        parts = [f"{c}*q^{list(e)}" for e, c in self._terms.items()]
        return "MultiLaurent(" + " + ".join(parts) + ")"

    def _coerce(self, other) -> MultiLaurent:
        if isinstance(other, MultiLaurent):
            if other.nvars != self.nvars:
                raise ValueError("variable count mismatch")
            return other
        return MultiLaurent.constant(self.nvars, other)

    def __add__(self, other) -> MultiLaurent:
        other = self._coerce(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, 0) + c
        return MultiLaurent._raw(self.nvars, out)

    __radd__ = __add__

    def __neg__(self) -> MultiLaurent:
        return MultiLaurent._raw(self.nvars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other) -> MultiLaurent:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> MultiLaurent:
        return self._coerce(other) - self

    def __mul__(self, other) -> MultiLaurent:
        if not isinstance(other, MultiLaurent):
            c = Q(other)
            return MultiLaurent._raw(self.nvars, {e: c * v for e, v in self._terms.items()})
        other = self._coerce(other)
        out: dict[tuple[int, ...], Q] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return MultiLaurent._raw(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> MultiLaurent:
        if n < 0:
            raise ValueError("negative powers of polynomials are not supported")
        result = MultiLaurent.constant(self.nvars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def scale_exponents(self, k: int) -> MultiLaurent:
        """p(k x): multiply every exponent vector by k."""
        return MultiLaurent._raw(
            self.nvars, {tuple(k * a for a in e): c for e, c in self._terms.items()}
        )

    def transform(self, matrix: Sequence[Sequence[int]]) -> MultiLaurent:
        """Apply an integer linear map to exponent vectors (row vector times matrix)."""
        n = len(matrix[0])
        out: dict[tuple[int, ...], Q] = {}
        for e, c in self._terms.items():
            new = tuple(sum(e[a] * matrix[a][b] for a in range(self.nvars)) for b in range(n))
            out[new] = out.get(new, 0) + c
        return MultiLaurent._raw(n, out)

    def evaluate(self, point: Sequence) -> Q:
        return eval_with_gradient(self, point, gradient=False)[0]


def _power_table(point: Sequence[Q], poly_terms: Iterable[tuple[int, ...]]):
    cache: list[dict[int, Q]] = [dict() for _ in point]
    for exp in poly_terms:
        for a, n in enumerate(exp):
            if n not in cache[a]:
                cache[a][n] = point[a] ** n
    return cache


def eval_with_gradient(p: MultiLaurent, point: Sequence, gradient: bool = True):
    """Value of p at q = point and the x-gradient (d/dx_a multiplies a term by n_a)."""
    if len(point) != p.nvars:
        raise ValueError("point has wrong length")
    pt = [Q(v) for v in point]
    if any(v == 0 for v in pt):
        raise ZeroDivisionError("nonzero evaluation point required")
    powers = _power_table(pt, p._terms)
    value = Q(0)
    grad = [Q(0)] * p.nvars
    for exp, c in p._terms.items():
        term = c
        for a, n in enumerate(exp):
            if n:
                term *= powers[a][n]
        value += term
        if gradient:
            for a, n in enumerate(exp):
                if n:
                    grad[a] += n * term
    return value, grad


# ---------------------------------------------------------------------------
# Dense univariate polynomials (ascending coefficient tuples)
# ---------------------------------------------------------------------------


def _trim(c: Sequence[Q]) -> tuple[Q, ...]:
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def poly_add(a, b):
    n = max(len(a), len(b))
    return _trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def poly_scale(a, c):
    c = Q(c)
    return _trim([c * x for x in a])


def poly_mul(a, b):
    if not a or not b:
        return ()
    out = [Q(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


def poly_from_roots(roots: Iterable, lead=1):
    out: tuple[Q, ...] = (Q(lead),)
    for r in roots:
        out = poly_mul(out, (-Q(r), Q(1)))
    return out


def poly_eval(a, x) -> Q:
    acc = Q(0)
    for c in reversed(a):
        acc = acc * x + c
    return acc


def poly_divmod(a, b):
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    lead = b[-1]
    quot = [Q(0)] * max(len(a) - len(b) + 1, 0)
    for i in range(len(a) - len(b), -1, -1):
        coef = a[i + len(b) - 1] / lead
        quot[i] = coef
        if coef:
            for j, y in enumerate(b):
                a[i + j] -= coef * y
    return _trim(quot), _trim(a[: len(b) - 1])


def _divide_linear(a, r):
    """Synthetic division by (x - r): returns (quotient, remainder)."""
    if not a:
        return (), Q(0)
    out = [Q(0)] * (len(a) - 1)
    acc = Q(0)
    for i in range(len(a) - 1, 0, -1):
        acc = acc * r + a[i]
        out[i - 1] = acc
    rem = acc * r + a[0]
    return tuple(out), rem


def _taylor(a, r, order: int) -> list[Q]:
    """First `order` Taylor coefficients of a at x = r (repeated synthetic division)."""
    coeffs = []
    cur = tuple(a)
    for _ in range(order):
        cur, rem = _divide_linear(cur, r)
        coeffs.append(rem)
    return coeffs


def poly_gcd(a, b):
    a, b = _trim(a), _trim(b)
    while b:
        a, b = b, poly_divmod(a, b)[1]
    if not a:
        return ()
    return poly_scale(a, 1 / a[-1])


def _poly_xgcd(a, b):
    """(g, s, t) with s a + t b = g monic."""
    r0, r1 = _trim(a), _trim(b)
    s0, s1 = (Q(1),), ()
    t0, t1 = (), (Q(1),)
    while r1:
        qt, r = poly_divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, poly_add(s0, poly_scale(poly_mul(qt, s1), -1))
        t0, t1 = t1, poly_add(t0, poly_scale(poly_mul(qt, t1), -1))
    inv = 1 / r0[-1]
    return poly_scale(r0, inv), poly_scale(s0, inv), poly_scale(t0, inv)


# ---------------------------------------------------------------------------
# Univariate rational functions and residues
# ---------------------------------------------------------------------------


class UniRational:
    """num/den in one variable, kept in lowest terms with a monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num: Sequence, den: Sequence = (1,), reduce: bool = True):
        num = _trim([Q(c) for c in num])
        den = _trim([Q(c) for c in den])
        if not den:
            raise ZeroDivisionError("denominator is identically zero")
        if reduce and num:
            g = poly_gcd(num, den)
            if len(g) > 1:
                num = poly_divmod(num, g)[0]
                den = poly_divmod(den, g)[0]
        if not num:
            den = (Q(1),)
        lead = den[-1]
        if lead != 1:
            num = poly_scale(num, 1 / lead)
            den = poly_scale(den, 1 / lead)
        self.num, self.den = num, den

    @classmethod
    def trusted(cls, num, den) -> UniRational:
        """Build without a gcd pass; caller guarantees the fraction is reduced."""
        return cls(num, den, reduce=False)

    @classmethod
    def constant(cls, c) -> UniRational:
        return cls((Q(c),))

    def __repr__(self) -> str:
        return f"UniRational({list(self.num)} / {list(self.den)})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, UniRational):
            other = UniRational.constant(other)
        return poly_mul(self.num, other.den) == poly_mul(other.num, self.den)

    def __hash__(self):
        return hash((self.num, self.den))

    def _coerce(self, other) -> UniRational:
        return other if isinstance(other, UniRational) else UniRational.constant(other)

    def __add__(self, other) -> UniRational:
        o = self._coerce(other)
        return UniRational(
            poly_add(poly_mul(self.num, o.den), poly_mul(o.num, self.den)),
            poly_mul(self.den, o.den),
        )

    __radd__ = __add__

    def __neg__(self) -> UniRational:
        return UniRational.trusted(poly_scale(self.num, -1), self.den)

    def __sub__(self, other) -> UniRational:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> UniRational:
        return self._coerce(other) - self

    def __mul__(self, other) -> UniRational:
        o = self._coerce(other)
        return UniRational(poly_mul(self.num, o.num), poly_mul(self.den, o.den))

    __rmul__ = __mul__

    def __truediv__(self, other) -> UniRational:
        o = self._coerce(other)
        if not o.num:
            raise ZeroDivisionError("division by the zero function")
        return UniRational(poly_mul(self.num, o.den), poly_mul(self.den, o.num))

    def __call__(self, x) -> Q:
        d = poly_eval(self.den, Q(x))
        if d == 0:
            raise ZeroDivisionError("pole")
        return poly_eval(self.num, Q(x)) / d

    def pole_order(self, p) -> int:
        p = Q(p)
        num, den = self.num, self.den
        order = 0
        while True:
            qd, rd = _divide_linear(den, p)
            if rd != 0:
                break
            qn, rn = _divide_linear(num, p)
            if num and rn == 0:
                num = qn
            else:
                order += 1
            den = qd
        return order


def residue_at(f: UniRational, pole, mult: int) -> Q:
    """Coefficient of (mu - pole)^-1 in the expansion of f, given pole order <= mult."""
    p = Q(pole)
    num, den = f.num, f.den
    r = 0
    while True:
        qd, rd = _divide_linear(den, p)
        if rd != 0:
            break
        qn, rn = _divide_linear(num, p)
        if num and rn == 0:
            num = qn  # cancel a common factor left by an unreduced input
        else:
            r += 1
        den = qd
    if r > mult:
        raise ArithmeticError("pole order exceeded")
    if r == 0 or not num:
        return Q(0)
    a = _taylor(num, p, r)
    b = _taylor(den, p, r)
    # series division a/b up to order r-1
    c: list[Q] = []
    for n in range(r):
        acc = a[n] - sum(c[k] * b[n - k] for k in range(n))
        c.append(acc / b[0])
    return c[r - 1]


def residue_at_infinity(f: UniRational) -> Q:
    """Minus the coefficient of mu^-1 at infinity."""
    _, rem = poly_divmod(f.num, f.den)
    n = len(f.den) - 1
    if len(rem) < n or n == 0:
        return Q(0)
    return -rem[n - 1] / f.den[-1]


def residue_sum_over_roots(f: UniRational, factor: Sequence) -> Q:
    """Sum of residues of f over all (possibly irrational) roots of `factor`.

    `factor` must divide f's denominator exactly and be coprime to the cofactor.
    Uses the partial fraction B/factor of f: the total is the mu^-1 coefficient
    of B/factor at infinity.
    """
    P = _trim([Q(c) for c in factor])
    cof, rem = poly_divmod(f.den, P)
    if rem:
        raise ValueError("factor does not divide the denominator")
    g, _, t = _poly_xgcd(P, cof)
    if len(g) != 1:
        raise ValueError("factor is not coprime to the cofactor")
    # f = num/(P cof); B = num * cof^{-1} mod P
    B = poly_divmod(poly_mul(f.num, t), P)[1]
    n = len(P) - 1
    if len(B) < n:
        return Q(0)
    return B[n - 1] / P[-1]


# ---------------------------------------------------------------------------
# Exact matrices
# ---------------------------------------------------------------------------


class RatMatrix:
    """Rectangular matrix of rationals (immutable)."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries: Sequence[Sequence]):
        rows = tuple(tuple(Q(x) for x in row) for row in entries)
        if not rows or any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("matrix must be rectangular and nonempty")
        self.entries = rows
        self.rows = len(rows)
        self.cols = len(rows[0])

    @classmethod
    def identity(cls, n: int) -> RatMatrix:
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    def __getitem__(self, idx):
        i, j = idx
        return self.entries[i][j]

    def __eq__(self, other) -> bool:
        return isinstance(other, RatMatrix) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(x) for x in r) for r in self.entries)
        return f"RatMatrix([{body}])"

    def tolist(self) -> list[list[Q]]:
        return [list(r) for r in self.entries]

    def transpose(self) -> RatMatrix:
        return RatMatrix(list(zip(*self.entries)))

    def __matmul__(self, other: RatMatrix) -> RatMatrix:
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        oc = list(zip(*other.entries))
        return RatMatrix([[sum((a * b for a, b in zip(r, c)), Q(0)) for c in oc] for r in self.entries])

    def __mul__(self, c) -> RatMatrix:
        c = Q(c)
        return RatMatrix([[c * x for x in r] for r in self.entries])

    __rmul__ = __mul__

    def __add__(self, other: RatMatrix) -> RatMatrix:
        return RatMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)])

    def __sub__(self, other: RatMatrix) -> RatMatrix:
        return RatMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)])

    def apply(self, vec: Sequence) -> list[Q]:
        return [sum((a * Q(b) for a, b in zip(r, vec)), Q(0)) for r in self.entries]

    def det(self) -> Q:
        """Exact determinant via fraction-free (Bareiss) elimination on cleared rows."""
        if self.rows != self.cols:
            raise ValueError("determinant of a non-square matrix")
        ints, scale = _clear_denominators(self.entries)
        return Q(_bareiss_det(ints), scale)


def mat_inverse(M: RatMatrix) -> RatMatrix:
    """Gauss-Jordan inverse over the rationals."""
    if M.rows != M.cols:
        raise ValueError("matrix is not square")
    n = M.rows
    aug = [list(r) + [Q(int(i == j)) for j in range(n)] for i, r in enumerate(M.entries)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        prow = [x * inv for x in aug[col]]
        aug[col] = prow
        for r in range(n):
            if r != col:
                f = aug[r][col]
                if f:
                    row = aug[r]
                    aug[r] = [a - f * b for a, b in zip(row, prow)]
    return RatMatrix([r[n:] for r in aug])


def _clear_denominators(rows) -> tuple[list[list[int]], int]:
    """Scale each row to integers; returns (integer rows, 1/prod of scales as denominator)."""
    ints = []
    total = 1
    for r in rows:
        m = lcm(*(Q(x).denominator for x in r)) if r else 1
        ints.append([int(Q(x) * m) for x in r])
        total *= m
    return ints, total


def _bareiss_det(a: list[list[int]]) -> int:
    a = [list(r) for r in a]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if a[r][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1] if n else 1


def _det_mod_p(a: list[list[int]], p: int) -> int:
    m = [[x % p for x in r] for r in a]
    n = len(m)
    det = 1
    for k in range(n):
        piv = next((r for r in range(k, n) if m[r][k]), None)
        if piv is None:
            return 0
        if piv != k:
            m[k], m[piv] = m[piv], m[k]
            det = -det
        det = det * m[k][k] % p
        inv = pow(m[k][k], p - 2, p)
        rowk = m[k]
        for i in range(k + 1, n):
            f = m[i][k] * inv % p
            if f:
                rowi = m[i]
                for j in range(k, n):
                    rowi[j] = (rowi[j] - f * rowk[j]) % p
    return det % p


def nonzero_det_certificate(M: RatMatrix, primes: Sequence[int] = CERT_PRIMES) -> bool:
    """True iff det(M) != 0; modular screening first, exact elimination as fallback."""
    if M.rows != M.cols:
        raise ValueError("matrix is not square")
    ints, _ = _clear_denominators(M.entries)
    for p in primes:
        if _det_mod_p(ints, p):
            return True
    return _bareiss_det(ints) != 0
