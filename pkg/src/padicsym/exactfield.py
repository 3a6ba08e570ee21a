"""Tiny exact number fields Q[x]/(f) over gmpy2 rationals.

Covers the two cases the symbol layer needs: quadratic fields generated by a
Hecke root, and cyclotomic fields Q(zeta_n) for character-twisted period sums.
Elements are immutable coefficient tuples; nothing here is asymptotically
clever, the degrees stay below ~16.
"""

from __future__ import annotations

from gmpy2 import mpq


def cyclotomic_polynomial(n: int) -> list:
    """Coefficients (ascending, mpq) of the n-th cyclotomic polynomial."""
    # Phi_n = (x^n - 1) / prod_{d | n, d < n} Phi_d, by exact division
    poly = [mpq(-1)] + [mpq(0)] * (n - 1) + [mpq(1)]
    for d in range(1, n):
        if n % d == 0:
            poly = _polydiv_exact(poly, cyclotomic_polynomial(d))
    return poly


def _polydiv_exact(a: list, b: list) -> list:
    a = list(a)
    out = [mpq(0)] * (len(a) - len(b) + 1)
    for i in range(len(a) - len(b), -1, -1):
        c = a[i + len(b) - 1] / b[-1]
        out[i] = c
        if c:
            for j, bj in enumerate(b):
                a[i + j] -= c * bj
    assert all(x == 0 for x in a[: len(b) - 1])
    return out


class NumberField:
    """Q[x]/(f) for monic f with rational coefficients."""

    def __init__(self, modulus, name: str = "a"):
        self.modulus = [mpq(c) for c in modulus]
        assert self.modulus[-1] == 1, "modulus must be monic"
        self.degree = len(self.modulus) - 1
        self.name = name

    @classmethod
    def quadratic(cls, trace, norm, name: str = "a") -> "NumberField":
        """Q[x]/(x^2 - trace*x + norm)."""
        return cls([mpq(norm), -mpq(trace), mpq(1)], name)

    @classmethod
    def cyclotomic(cls, n: int) -> "NumberField":
        fld = cls(cyclotomic_polynomial(n), name=f"z{n}")
        fld._zeta_order = n
        return fld

    def __call__(self, value) -> "NFElem":
        if isinstance(value, NFElem):
            if value.field is self:
                return value
            raise ValueError("wrong field")
        if isinstance(value, (list, tuple)):
            c = [mpq(v) for v in value]
        else:
            c = [mpq(value)]
        c += [mpq(0)] * (self.degree - len(c))
        return NFElem(self, tuple(self._reduce(c)))

    def gen(self) -> "NFElem":
        if self.degree == 1:
            return self(-self.modulus[0])
        return self([0, 1])

    def zeta_power(self, k: int) -> "NFElem":
        n = getattr(self, "_zeta_order", None)
        if n is None:
            raise ValueError("not a cyclotomic field")
        return self.gen() ** (k % n)

    def _reduce(self, c: list) -> list:
        d = self.degree
        c = list(c)
        for i in range(len(c) - 1, d - 1, -1):
            top = c[i]
            if top:
                for j in range(d + 1):
                    c[i - d + j] -= top * self.modulus[j]
            c.pop()
        while len(c) < d:
            c.append(mpq(0))
        return c

    def __repr__(self):
        return f"NumberField(deg {self.degree})"


class NFElem:
    __slots__ = ("field", "coeffs")

    def __init__(self, field: NumberField, coeffs: tuple):
        self.field = field
        self.coeffs = coeffs

    def _coerce(self, other):
        if isinstance(other, NFElem):
            if other.field is not self.field:
                raise ValueError("mixed fields")
            return other
        return self.field(other)

    def __add__(self, other):
        o = self._coerce(other)
        return NFElem(self.field, tuple(a + b for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return NFElem(self.field, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        d = self.field.degree
        out = [mpq(0)] * (2 * d - 1)
        for i, ai in enumerate(self.coeffs):
            if ai:
                for j, bj in enumerate(o.coeffs):
                    if bj:
                        out[i + j] += ai * bj
        return NFElem(self.field, tuple(self.field._reduce(out)))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        out, base = self.field(1), self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def inverse(self) -> "NFElem":
        # extended Euclid in Q[x]
        f = self.field
        r0 = list(f.modulus)
        r1 = list(self.coeffs) + [mpq(0)]
        s0, s1 = [mpq(0)], [mpq(1)]
        while any(c != 0 for c in r1):
            q, r = _polydivmod_q(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, _polysub_q(s0, _polymul_q(q, s1))
        deg = _polydeg_q(r0)
        if deg != 0:
            raise ZeroDivisionError("not invertible")
        c = r0[0]
        inv = [x / c for x in s0]
        return NFElem(f, tuple(f._reduce(inv + [mpq(0)] * f.degree)))

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self.field(other) * self.inverse()

    def __eq__(self, other):
        try:
            o = self._coerce(other)
        except (ValueError, TypeError):
            return NotImplemented
        return self.coeffs == o.coeffs

    def __hash__(self):
        return hash((id(self.field), self.coeffs))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])

    def rational_value(self):
        if not self.is_rational():
            raise ValueError("not rational")
        return self.coeffs[0]

    def conjugates_trace(self):
        """Trace to Q (sum over the companion-matrix action)."""
        d = self.field.degree
        # trace of multiplication-by-self on the power basis
        tr = mpq(0)
        basis = self.field(1)
        for i in range(d):
            col = self * basis
            tr += col.coeffs[i]
            basis = basis * self.field.gen() if i + 1 < d else basis
        return tr

    def __repr__(self):
        return f"NFElem{self.coeffs}"


def _polydeg_q(a):
    for i in range(len(a) - 1, -1, -1):
        if a[i] != 0:
            return i
    return -1


def _polysub_q(a, b):
    n = max(len(a), len(b))
    get = lambda v, i: v[i] if i < len(v) else mpq(0)
    return [get(a, i) - get(b, i) for i in range(n)]


def _polymul_q(a, b):
    out = [mpq(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return out


def _polydivmod_q(a, b):
    a = list(a)
    db = _polydeg_q(b)
    da = _polydeg_q(a)
    q = [mpq(0)] * max(da - db + 1, 1)
    while da >= db and da >= 0:
        c = a[da] / b[db]
        q[da - db] = c
        for j in range(db + 1):
            a[da - db + j] -= c * b[j]
        da = _polydeg_q(a)
    return q, a
