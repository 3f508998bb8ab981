"""Exact arithmetic in a real algebraic number field Q(g).

All transverse coordinates in the rectangle models live in the field
generated by the expansion factor of the transition matrix, so every
geometric predicate (does this leaf hit that mark, which of two crossings
sits lower) is decided exactly: elements are polynomials in the generator
reduced modulo its minimal polynomial, and signs are certified with
mpmath interval evaluation at escalating precision.
"""

from __future__ import annotations

from fractions import Fraction
import re

import mpmath

__all__ = ["NumberField", "Elt", "charpoly", "minpoly_of_root", "pf_eigen"]


def _poly_trim(c):
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return c


def _poly_add(a, b):
    n = max(len(a), len(b))
    return _poly_trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)
                       for i in range(n)])


def _poly_scale(a, s):
    return _poly_trim([ai * s for ai in a])


def _poly_mul(a, b):
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return _poly_trim(out)


def _poly_divmod(a, b):
    # b must be nonzero; coefficients are Fractions
    a = list(a)
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    inv_lead = Fraction(1) / b[-1]
    while len(a) >= len(b) and _poly_trim(a):
        a = _poly_trim(a)
        if len(a) < len(b):
            break
        k = len(a) - len(b)
        coef = a[-1] * inv_lead
        q[k] = coef
        for i in range(len(b)):
            a[k + i] -= coef * b[i]
        a = a[:-1]
    return _poly_trim(q), _poly_trim(a)


def _poly_gcd(a, b):
    a, b = _poly_trim(a), _poly_trim(b)
    while b:
        a, b = b, _poly_divmod(a, b)[1]
    if a:
        a = _poly_scale(a, Fraction(1) / a[-1])
    return a


def _poly_eval_mp(c, x):
    acc = mpmath.mpf(0)
    for ci in reversed(c):
        acc = acc * x + mpmath.mpf(ci.numerator) / mpmath.mpf(ci.denominator)
    return acc


def charpoly(mat):
    """Characteristic polynomial of an integer matrix, low-to-high Fractions.

    Faddeev-LeVerrier; exact.
    """
    n = len(mat)
    a = [[Fraction(mat[i][j]) for j in range(n)] for i in range(n)]
    ident = [[Fraction(1) if i == j else Fraction(0) for j in range(n)] for i in range(n)]
    coeffs = [Fraction(1)]  # leading coefficient of x^n
    m = [row[:] for row in ident]
    for k in range(1, n + 1):
        # M_k = A*M_{k-1} + c_{k-1} I ; c_k = -trace(A*M_k)/k
        am = [[sum(a[i][t] * m[t][j] for t in range(n)) for j in range(n)] for i in range(n)]
        c = -sum(am[i][i] for i in range(n)) / k
        coeffs.append(c)
        m = [[am[i][j] + (c if i == j else 0) for j in range(n)] for i in range(n)]
    # coeffs are for x^n, x^{n-1}, ... constant; return low-to-high
    return list(reversed(coeffs))


def _real_roots(poly, dps=60):
    with mpmath.workdps(dps):
        cs = [mpmath.mpf(c.numerator) / mpmath.mpf(c.denominator) for c in reversed(poly)]
        roots = mpmath.polyroots(cs, maxsteps=200, extraprec=200)
        out = []
        for r in roots:
            if abs(mpmath.im(r)) < mpmath.mpf(10) ** (-dps // 2):
                out.append(mpmath.re(r))
        return out


def minpoly_of_root(poly, approx=None, dps=80):
    """Minimal polynomial (monic, Fractions, low-to-high) of a real root of poly.

    The root is the largest real root unless approx picks another one.
    Verified by exact division into poly.
    """
    poly = _poly_trim([Fraction(c) for c in poly])
    with mpmath.workdps(dps):
        reals = _real_roots(poly, dps=dps)
        if not reals:
            raise ValueError("polynomial has no real root")
        if approx is None:
            root = max(reals)
        else:
            root = min(reals, key=lambda r: abs(r - mpmath.mpf(approx)))
        deg = len(poly) - 1
        for k in range(1, deg + 1):
            powers = [root ** i for i in range(k + 1)]
            rel = mpmath.pslq(powers, maxcoeff=10 ** 14, maxsteps=10 ** 6)
            if rel is None:
                continue
            cand = _poly_trim([Fraction(int(c)) for c in rel])
            if len(cand) != k + 1:
                continue
            cand = _poly_scale(cand, Fraction(1) / cand[-1])
            q, rem = _poly_divmod(poly, cand)
            if rem:
                continue
            if abs(_poly_eval_mp(cand, root)) < mpmath.mpf(10) ** (-dps + 10):
                return cand, root
        return poly, root


class NumberField:
    """Q(g) for g a designated real root of a monic rational polynomial."""

    def __init__(self, minpoly, approx=None):
        poly = _poly_trim([Fraction(c) for c in minpoly])
        if len(poly) < 2:
            raise ValueError("minimal polynomial must have positive degree")
        if poly[-1] != 1:
            poly = _poly_scale(poly, Fraction(1) / poly[-1])
        self.minpoly = poly
        self.degree = len(poly) - 1
        self._root_dps = 60
        self._root_cache = {}
        self._approx_hint = approx
        # isolate the generator once at base precision
        self._gen_approx(self._root_dps)
        self.zero = Elt(self, [Fraction(0)])
        self.one = Elt(self, [Fraction(1)])
        self.gen = Elt(self, [Fraction(0), Fraction(1)] if self.degree >= 2 else
                       [-poly[0]])

    def _gen_approx(self, dps):
        if dps in self._root_cache:
            return self._root_cache[dps]
        with mpmath.workdps(dps + 20):
            reals = _real_roots(self.minpoly, dps=dps + 20)
            if not reals:
                raise ValueError("minimal polynomial has no real root")
            if self._approx_hint is None:
                root = max(reals)
            else:
                root = min(reals, key=lambda r: abs(r - mpmath.mpf(self._approx_hint)))
            # demand the chosen root is simple and isolated at this precision
            root = mpmath.mpf(root)
        self._root_cache[dps] = root
        return root

    def __call__(self, value):
        if isinstance(value, Elt):
            if value.field is not self:
                raise ValueError("element from a different field")
            return value
        if isinstance(value, (int, Fraction)):
            return Elt(self, [Fraction(value)])
        if isinstance(value, (list, tuple)):
            return Elt(self, [Fraction(c) for c in value])
        if isinstance(value, str):
            return self.parse(value)
        raise TypeError(f"cannot coerce {value!r} into field element")

    def __eq__(self, other):
        return isinstance(other, NumberField) and self.minpoly == other.minpoly

    def __hash__(self):
        return hash(tuple(self.minpoly))

    def __repr__(self):
        return f"NumberField({poly_str(self.minpoly, 'x')})"

    def sign(self, coeffs):
        """Certified sign of sum coeffs[i] * g**i (canonical, so 0 iff all 0)."""
        if not _poly_trim(coeffs):
            return 0
        dps = self._root_dps
        while True:
            root = self._gen_approx(dps)
            with mpmath.workdps(dps):
                lo = mpmath.mpf(root) - mpmath.mpf(10) ** (-dps + 12)
                hi = mpmath.mpf(root) + mpmath.mpf(10) ** (-dps + 12)
                iv = mpmath.iv.mpf([lo, hi])
                acc = mpmath.iv.mpf(0)
                for c in reversed(_poly_trim(coeffs)):
                    acc = acc * iv + mpmath.iv.mpf(c.numerator) / mpmath.iv.mpf(c.denominator)
                if acc > 0:
                    return 1
                if acc < 0:
                    return -1
            dps *= 2
            if dps > 4000:
                raise ArithmeticError("sign determination did not converge; "
                                      "element may not be canonical")

    def parse(self, text):
        """Parse 'g^2 - 3/2*g + 1' style expressions."""
        s = text.replace(" ", "")
        if not s:
            raise ValueError("empty field element")
        s = s.replace("-", "+-")
        if s.startswith("+"):
            s = s[1:]
        coeffs = [Fraction(0)] * max(2, self.degree)
        for term in s.split("+"):
            if not term:
                continue
            m = re.fullmatch(r"(-?)(?:(\d+(?:/\d+)?)\*?)?(?:g(?:\^(\d+))?)?", term)
            if not m or (m.group(2) is None and "g" not in term):
                m2 = re.fullmatch(r"(-?)(\d+(?:/\d+)?)", term)
                if not m2:
                    raise ValueError(f"bad field element term {term!r} in {text!r}")
                sign, num = m2.groups()
                c = Fraction(num)
                if sign:
                    c = -c
                coeffs[0] += c
                continue
            sign, num, power = m.groups()
            c = Fraction(num) if num else Fraction(1)
            if sign:
                c = -c
            k = 0
            if "g" in term:
                k = int(power) if power else 1
            if k >= len(coeffs):
                coeffs.extend([Fraction(0)] * (k + 1 - len(coeffs)))
            coeffs[k] += c
        return Elt(self, coeffs)


def poly_str(coeffs, var="g"):
    """Render low-to-high rational coefficients as a polynomial string."""
    coeffs = _poly_trim(coeffs)
    if not coeffs:
        return "0"
    parts = []
    for k in range(len(coeffs) - 1, -1, -1):
        c = coeffs[k]
        if c == 0:
            continue
        if k == 0:
            body = str(abs(c))
        else:
            mag = "" if abs(c) == 1 else f"{abs(c)}*"
            body = f"{mag}{var}" + (f"^{k}" if k > 1 else "")
        if not parts:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(f"+ {body}" if c > 0 else f"- {body}")
    return " ".join(parts)


class Elt:
    """An element of a NumberField; immutable, canonical coefficient vector."""

    __slots__ = ("field", "coeffs", "_hash")

    def __init__(self, field, coeffs):
        self.field = field
        cs = [Fraction(c) for c in coeffs]
        if len(cs) >= len(field.minpoly):
            _, cs = _poly_divmod(cs, field.minpoly)
        cs = _poly_trim(cs)
        self.coeffs = tuple(cs)
        self._hash = None

    def _co(self, other):
        if isinstance(other, Elt):
            if other.field is not self.field and other.field != self.field:
                raise ValueError("mixed fields")
            return other
        if isinstance(other, (int, Fraction)):
            return Elt(self.field, [Fraction(other)])
        return NotImplemented

    def __add__(self, other):
        o = self._co(other)
        if o is NotImplemented:
            return o
        return Elt(self.field, _poly_add(list(self.coeffs), list(o.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return Elt(self.field, [-c for c in self.coeffs])

    def __sub__(self, other):
        o = self._co(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._co(other)
        if o is NotImplemented:
            return o
        return Elt(self.field, _poly_mul(list(self.coeffs), list(o.coeffs)))

    __rmul__ = __mul__

    def inverse(self):
        if not self.coeffs:
            raise ZeroDivisionError("field element is zero")
        # extended euclid: a*self + b*minpoly = 1
        a, b = list(self.coeffs), list(self.field.minpoly)
        s0, s1 = [Fraction(1)], []
        while b:
            q, r = _poly_divmod(a, b)
            a, b = b, r
            s0, s1 = s1, _poly_add(s0, _poly_scale(_poly_mul(q, s1), Fraction(-1)))
        if len(a) != 1:
            raise ZeroDivisionError("element not invertible (reducible modulus?)")
        return Elt(self.field, _poly_scale(s0, Fraction(1) / a[0]))

    def __truediv__(self, other):
        o = self._co(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def sign(self):
        return self.field.sign(list(self.coeffs))

    def __eq__(self, other):
        o = self._co(other)
        if o is NotImplemented:
            return NotImplemented
        return self.coeffs == o.coeffs

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __lt__(self, other):
        o = self._co(other)
        return (self - o).sign() < 0

    def __le__(self, other):
        o = self._co(other)
        return (self - o).sign() <= 0

    def __gt__(self, other):
        o = self._co(other)
        return (self - o).sign() > 0

    def __ge__(self, other):
        o = self._co(other)
        return (self - o).sign() >= 0

    def __bool__(self):
        return bool(self.coeffs)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((tuple(self.field.minpoly), self.coeffs))
        return self._hash

    def __float__(self):
        root = self.field._gen_approx(self.field._root_dps)
        with mpmath.workdps(self.field._root_dps):
            return float(_poly_eval_mp(list(self.coeffs), root))

    def __repr__(self):
        return poly_str(list(self.coeffs))

    def __str__(self):
        return poly_str(list(self.coeffs))


def _solve_kernel(field, rows):
    """One nonzero kernel vector of a matrix over the field (list of rows)."""
    n = len(rows[0])
    m = [[field(x) for x in row] for row in rows]
    piv_cols = []
    r = 0
    for c in range(n):
        p = None
        for i in range(r, len(m)):
            if m[i][c] != 0:
                p = i
                break
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = m[r][c].inverse()
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        piv_cols.append(c)
        r += 1
        if r == len(m):
            break
    free = [c for c in range(n) if c not in piv_cols]
    if not free:
        raise ValueError("matrix has trivial kernel")
    v = [field(0)] * n
    v[free[0]] = field(1)
    for i, c in enumerate(piv_cols):
        v[c] = -m[i][free[0]]
    return v


def pf_eigen(mat, approx=None):
    """Perron-Frobenius data of a primitive nonnegative integer matrix.

    Returns (field, lam, right, left): the number field generated by the
    dominant eigenvalue lam, and exact positive right/left eigenvectors
    normalised so the first entry is 1.
    """
    cp = charpoly(mat)
    mp_, _root = minpoly_of_root(cp, approx=approx)
    field = NumberField(mp_)
    lam = field.gen if field.degree >= 2 else field(-mp_[0])
    n = len(mat)
    rows_r = [[(field(mat[i][j]) - (lam if i == j else field(0))) for j in range(n)]
              for i in range(n)]
    right = _solve_kernel(field, rows_r)
    rows_l = [[(field(mat[j][i]) - (lam if i == j else field(0))) for j in range(n)]
              for i in range(n)]
    left = _solve_kernel(field, rows_l)

    def _positivise(v):
        nz = next(x for x in v if x != 0)
        if nz.sign() < 0:
            v = [-x for x in v]
        if any(x.sign() <= 0 for x in v):
            raise ValueError("eigenvector not strictly positive; matrix not primitive?")
        scale = v[0].inverse()
        return [x * scale for x in v]

    return field, lam, _positivise(right), _positivise(left)
