"""Exact arithmetic in Z/p^M and its cyclotomic and quadratic extensions.

Every p-adic quantity in the package is a :class:`PadicScalar`: a coefficient
vector over Z/p^M in a fixed ring, together with the absolute precision it is
actually known to.  Precision only ever goes down; every lossy operation says
by how much.

Three ring flavours cover all needs:

* ``ZpRing``         -- Z/p^M itself,
* ``CyclotomicRing`` -- Z/p^M[x] / Phi_{p^r}(x), totally ramified of degree
  phi(p^r), with uniformiser pi = 1 - zeta,
* ``QuadraticRing``  -- Z/p^M[x] / (x^2 - t x + n), used when a Hecke root
  generates a ramified (or inert) quadratic extension.

Valuations are normalised so v(p) = 1; in an extension of ramification e they
take values in (1/e)Z.
"""

from __future__ import annotations

from fractions import Fraction


class PrecisionError(ArithmeticError):
    """A value was consumed beyond the precision it carries."""


def _inv_mod(a: int, pM: int) -> int:
    return pow(a, -1, pM)


def sub_vp(x: int, p: int, cap: int) -> int:
    """v_p(x), capped at ``cap`` (and for x == 0)."""
    if x == 0:
        return cap
    v = 0
    while x % p == 0 and v < cap:
        x //= p
        v += 1
    return v


def cyclotomic_poly_pr(p: int, r: int) -> list[int]:
    """Coefficients (ascending) of Phi_{p^r}(x) = sum_j x^{j p^(r-1)}, j < p."""
    if r < 1:
        raise ValueError("need r >= 1")
    deg = p ** (r - 1) * (p - 1)
    coeffs = [0] * (deg + 1)
    for j in range(p):
        coeffs[j * p ** (r - 1)] = 1
    return coeffs


class _Ring:
    """Shared machinery for the three ring flavours."""

    #: defining modulus polynomial, ascending coefficients, monic
    modulus: list[int]
    p: int
    M: int
    degree: int
    ramification: int

    def __init__(self, p: int, M: int):
        if p == 2:
            raise ValueError("p = 2 is not supported (sign projectors need 1/2)")
        if M < 1:
            raise ValueError("precision budget must be >= 1")
        self.p = p
        self.M = M
        self.pM = p ** M

    # -- element constructors ------------------------------------------------

    def zero(self, prec: int | None = None) -> "PadicScalar":
        return PadicScalar(self, (0,) * self.degree, self.M if prec is None else prec)

    def one(self) -> "PadicScalar":
        return self.from_int(1)

    def from_int(self, n: int, prec: int | None = None) -> "PadicScalar":
        prec = self.M if prec is None else prec
        c = [n % self.p ** prec] + [0] * (self.degree - 1)
        return PadicScalar(self, tuple(c), prec)

    def from_rational(self, q, prec: int | None = None) -> "PadicScalar":
        """Embed a rational with p-unit denominator."""
        q = Fraction(q) if not isinstance(q, Fraction) else q
        num, den = int(q.numerator), int(q.denominator)
        prec = self.M if prec is None else prec
        if den % self.p == 0:
            v = sub_vp(den, self.p, self.M)
            den //= self.p ** v
            x = self.from_int(num * _inv_mod(den, self.p ** self.M), prec)
            return x.shift_p(-v)
        return self.from_int(num * _inv_mod(den, self.p ** prec), prec)

    def from_coeffs(self, coeffs, prec: int | None = None) -> "PadicScalar":
        prec = self.M if prec is None else prec
        q = self.p ** max(prec, 0)
        c = list(coeffs) + [0] * (self.degree - len(coeffs))
        return PadicScalar(self, tuple(x % q for x in c[: self.degree]), prec)

    # -- polynomial reduction ------------------------------------------------

    def _reduce(self, coeffs: list[int], q: int) -> tuple[int, ...]:
        """Reduce a coefficient list modulo the defining polynomial and q."""
        d = self.degree
        mod = self.modulus
        c = [x % q for x in coeffs]
        for i in range(len(c) - 1, d - 1, -1):
            top = c[i]
            if top:
                for j in range(d + 1):
                    c[i - d + j] = (c[i - d + j] - top * mod[j]) % q
            c.pop()
        while len(c) < d:
            c.append(0)
        return tuple(c)

    def mul_coeffs(self, a, b, q: int) -> tuple[int, ...]:
        out = [0] * (2 * self.degree - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    if bj:
                        out[i + j] += ai * bj
        return self._reduce(out, q)

    # -- valuation support; overridden per flavour ---------------------------

    def valuation_num(self, coeffs) -> int | None:
        """e * v_p, or None for zero-to-precision.  Subclasses override."""
        raise NotImplementedError

    def same_ring(self, other: "_Ring") -> bool:
        return (type(self) is type(other) and self.p == other.p
                and self.M == other.M and self.modulus == other.modulus)

    def promote(self, x: "PadicScalar") -> "PadicScalar":
        """Re-express an element of a subring in this ring."""
        if x.ring is self:
            return x
        if self.same_ring(x.ring):
            return PadicScalar(self, x.coeffs, x.prec)
        if x.ring.degree == 1:
            return self.from_coeffs((x.coeffs[0],), min(x.prec, self.M))
        raise ValueError("no embedding between these rings")


class ZpRing(_Ring):
    """Z/p^M."""

    def __init__(self, p: int, M: int):
        super().__init__(p, M)
        self.degree = 1
        self.ramification = 1
        self.modulus = [0, 1]

    def __repr__(self):
        return f"ZpRing(p={self.p}, M={self.M})"

    def valuation_num(self, coeffs):
        x = coeffs[0]
        return None if x == 0 else sub_vp(x, self.p, self.M)

    def teichmuller(self, a: int) -> "PadicScalar":
        """The unique (p-1)-st root of unity congruent to a mod p."""
        if a % self.p == 0:
            raise ValueError("Teichmuller lift needs a p-unit")
        x = a % self.pM
        for _ in range(self.M):
            x = pow(x, self.p, self.pM)
        return self.from_int(x)


class CyclotomicRing(_Ring):
    """Z/p^M[x]/Phi_{p^r}(x); x is a primitive p^r-th root of unity."""

    def __init__(self, p: int, M: int, r: int):
        super().__init__(p, M)
        self.r = r
        self.modulus = cyclotomic_poly_pr(p, r)
        self.degree = len(self.modulus) - 1
        self.ramification = self.degree
        # pi-power basis transition: columns are (1 - zeta)^i in the power basis.
        # Z[zeta] = Z[pi], so the matrix is unimodular and the inverse is integral.
        e = self.degree
        cols = []
        cur = [1] + [0] * (e - 1)
        for _ in range(e):
            cols.append(tuple(cur))
            cur = list(self.mul_coeffs(cur, self._pi_coeffs(), self.pM))
        self._pi_basis_inv = _invert_int_matrix_mod(cols, self.pM)

    def __repr__(self):
        return f"CyclotomicRing(p={self.p}, M={self.M}, r={self.r})"

    def _pi_coeffs(self):
        c = [1] + [0] * (self.degree - 1)
        c[1] = -1 % self.pM
        return tuple(c)

    def zeta(self) -> "PadicScalar":
        c = [0] * self.degree
        c[1] = 1
        return self.from_coeffs(c)

    def zeta_power(self, k: int) -> "PadicScalar":
        """zeta^k for any integer k (period p^r)."""
        k %= self.p ** self.r
        out = self.one()
        z = self.zeta()
        # p^r is tiny in practice; repeated squaring is still tidy
        base, e = z, k
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def valuation_num(self, coeffs):
        """Valuation in units of 1/e: the pi-adic valuation."""
        e = self.degree
        # coordinates in the pi-power basis
        pi_coords = [
            sum(self._pi_basis_inv[i][j] * coeffs[j] for j in range(e)) % self.pM
            for i in range(e)
        ]
        best = None
        for i, c in enumerate(pi_coords):
            if c == 0:
                continue
            cand = i + e * sub_vp(c, self.p, self.M)
            if best is None or cand < best:
                best = cand
        if best is not None and best >= e * self.M:
            return None
        return best

    def promote(self, x: "PadicScalar") -> "PadicScalar":
        if x.ring is self:
            return x
        if self.same_ring(x.ring):
            return PadicScalar(self, x.coeffs, x.prec)
        if x.ring.degree == 1:
            return self.from_coeffs((x.coeffs[0],), min(x.prec, self.M))
        if isinstance(x.ring, CyclotomicRing) and x.ring.p == self.p and x.ring.r <= self.r:
            # zeta_{p^r'} = zeta_{p^r}^{p^(r-r')}
            step = self.p ** (self.r - x.ring.r)
            out = self.zero(min(x.prec, self.M))
            for i, c in enumerate(x.coeffs):
                if c:
                    out = out + self.zeta_power(i * step) * self.from_int(c, out.prec)
            return out.with_prec(min(x.prec, self.M))
        raise ValueError("no embedding between these rings")


class QuadraticRing(_Ring):
    """Z/p^M[x]/(x^2 - t x + n): the ring generated by a Hecke root.

    Intended for the ramified case v_p(n) = 1, v_p(t) >= 1 (Eisenstein), where
    the class of x is a uniformiser of valuation 1/2.  The inert unramified
    case (unit non-square discriminant) is also accepted, with e = 1.
    """

    def __init__(self, p: int, M: int, trace: int, norm: int):
        super().__init__(p, M)
        self.degree = 2
        self.trace = trace % self.pM
        self.norm = norm % self.pM
        self.modulus = [norm % self.pM, (-trace) % self.pM, 1]
        vt = sub_vp(trace % self.pM, p, M) if trace % self.pM else M
        vn = sub_vp(norm % self.pM, p, M) if norm % self.pM else M
        self.eisenstein = vn == 1 and 2 * vt > vn
        self.ramification = 2 if self.eisenstein else 1
        if not self.eisenstein:
            disc = (trace * trace - 4 * norm) % p
            if disc == 0:
                raise ValueError(
                    "quadratic modulus is neither Eisenstein nor unramified; "
                    "split roots should use ZpRing via Hensel"
                )

    def __repr__(self):
        return (
            f"QuadraticRing(p={self.p}, M={self.M}, "
            f"x^2 - {self.trace} x + {self.norm})"
        )

    def root(self) -> "PadicScalar":
        return self.from_coeffs((0, 1))

    def valuation_num(self, coeffs):
        c0, c1 = coeffs
        if self.eisenstein:
            # v(c0 + c1 x) = min(2 v(c0), 2 v(c1) + 1) in units of 1/2
            cands = []
            if c0:
                cands.append(2 * sub_vp(c0, self.p, self.M))
            if c1:
                cands.append(2 * sub_vp(c1, self.p, self.M) + 1)
            if not cands:
                return None
            best = min(cands)
            return None if best >= 2 * self.M else best
        if c0 == 0 and c1 == 0:
            return None
        v0 = sub_vp(c0, self.p, self.M) if c0 else self.M
        v1 = sub_vp(c1, self.p, self.M) if c1 else self.M
        best = min(v0, v1)
        return None if best >= self.M else best


class PadicScalar:
    """An element of one of the rings above, with tracked absolute precision.

    ``coeffs`` are kept reduced mod p^prec.  Arithmetic takes the minimum of
    the operand precisions; only explicitly lossy operations go below that.
    """

    __slots__ = ("ring", "coeffs", "prec")

    def __init__(self, ring: _Ring, coeffs: tuple, prec: int):
        prec = min(prec, ring.M)
        if prec < 0:
            raise PrecisionError("negative precision: value fully lost")
        q = ring.p ** prec if prec > 0 else 1
        self.ring = ring
        self.coeffs = tuple(c % q for c in coeffs)
        self.prec = prec

    # -- bookkeeping -----------------------------------------------------------

    def with_prec(self, prec: int) -> "PadicScalar":
        if prec > self.prec:
            raise PrecisionError("cannot invent precision")
        return PadicScalar(self.ring, self.coeffs, prec)

    def is_zero(self) -> bool:
        """Indistinguishable from zero at the carried precision."""
        return all(c == 0 for c in self.coeffs)

    def __eq__(self, other) -> bool:
        """Agreement to the smaller of the carried precisions."""
        if not isinstance(other, PadicScalar):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        raise TypeError("PadicScalar compares to precision; not hashable")

    # -- arithmetic --------------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, PadicScalar):
            if other.ring is self.ring:
                return other
            if other.ring.degree <= self.ring.degree:
                return self.ring.promote(other)
            raise ValueError("mixed rings; promote explicitly")
        if isinstance(other, (int, Fraction)):
            return self.ring.from_rational(Fraction(other), self.prec)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        prec = min(self.prec, o.prec)
        return PadicScalar(self.ring, tuple(a + b for a, b in zip(self.coeffs, o.coeffs)), prec)

    __radd__ = __add__

    def __neg__(self):
        return PadicScalar(self.ring, tuple(-c for c in self.coeffs), self.prec)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        # absolute precision of a product: min(px + v(y), py + v(x)); the
        # stored representatives determine it to that level
        vx = self._val_floor()
        vy = o._val_floor()
        prec = min(self.prec + vy, o.prec + vx, self.ring.M)
        q = self.ring.p ** prec if prec > 0 else 1
        return PadicScalar(self.ring, self.ring.mul_coeffs(self.coeffs, o.coeffs, q), prec)

    def _val_floor(self) -> int:
        """Integer floor of the valuation, capped at the carried precision."""
        num = self.ring.valuation_num(self.coeffs)
        e = self.ring.ramification if self.ring.degree > 1 else 1
        scale = e if self.ring.degree > 1 else 1
        if num is None:
            return self.prec
        return min(num // scale, self.prec)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        out = self.ring.from_int(1, self.prec)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def inverse(self) -> "PadicScalar":
        """Inverse of a unit (valuation 0); precision preserved."""
        v = self.valuation()
        if not (isinstance(v, Fraction) and v == 0) and v != 0:
            raise ZeroDivisionError(f"not a unit: valuation {v}")
        q = self.ring.p ** self.prec
        if self.ring.degree == 1:
            return PadicScalar(self.ring, (_inv_mod(self.coeffs[0], q),), self.prec)
        # Newton on x -> x*(2 - a x), starting from the mod-p inverse
        a = self
        x = self._inverse_mod_p()
        for _ in range(self.prec.bit_length() + 1):
            x = x * (self.ring.from_int(2, self.prec) - a * x)
        assert (a * x - 1).is_zero()
        return x

    def _inverse_mod_p(self) -> "PadicScalar":
        p = self.ring.p
        d = self.ring.degree
        # invert in F_p[x]/(modulus mod p) by extended Euclid
        a = [c % p for c in self.coeffs]
        m = [c % p for c in self.ring.modulus]
        r0, r1 = m, a + [0]
        s0, s1 = [0], [1]
        while any(c % p for c in r1):
            q, r = _polydivmod_fp(r0, r1, p)
            r0, r1 = r1, r
            s0, s1 = s1, _polysub_fp(s0, _polymul_fp(q, s1, p), p)
        g = r0
        gd = _polydeg_fp(g, p)
        if gd != 0:
            raise ZeroDivisionError("not invertible mod p")
        ginv = pow(g[0], -1, p)
        inv = [(c * ginv) % p for c in s0]
        inv = self.ring._reduce(inv + [0] * d, p)
        return PadicScalar(self.ring, inv, self.prec)

    def __truediv__(self, other):
        o = self._coerce(other)
        return self * o.inverse()

    def shift_p(self, s: int) -> "PadicScalar":
        """Multiply by p^s.  For s < 0 requires exact divisibility and costs |s|
        digits of absolute precision."""
        if s >= 0:
            return PadicScalar(
                self.ring, tuple(c * self.ring.p ** s for c in self.coeffs),
                min(self.prec + s, self.ring.M),
            )
        k = -s
        ps = self.ring.p ** k
        if any(c % ps for c in self.coeffs):
            raise ValueError("not divisible by p^%d" % k)
        return PadicScalar(self.ring, tuple(c // ps for c in self.coeffs), self.prec - k)

    # -- valuation ------------------------------------------------------------

    def valuation(self):
        """v_p, normalised with v_p(p) = 1, as a Fraction; or the string
        sentinel ``">= prec"`` when indistinguishable from 0."""
        num = self.ring.valuation_num(self.coeffs)
        e = self.ring.ramification if self.ring.degree > 1 else 1
        scale = e if self.ring.degree > 1 else 1
        if num is None or num >= scale * self.prec:
            return f">= {self.prec}"
        return Fraction(num, scale)

    def valuation_lower_bound(self) -> Fraction:
        v = self.valuation()
        return Fraction(self.prec) if isinstance(v, str) else v

    def __repr__(self):
        if self.ring.degree == 1:
            return f"{self.coeffs[0]} + O({self.ring.p}^{self.prec})"
        return f"{list(self.coeffs)} + O({self.ring.p}^{self.prec})"


# ---------------------------------------------------------------------------
# small F_p[x] helpers for the mod-p inversion above


def _polydeg_fp(a, p):
    for i in range(len(a) - 1, -1, -1):
        if a[i] % p:
            return i
    return -1


def _polysub_fp(a, b, p):
    n = max(len(a), len(b))
    return [((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p for i in range(n)]


def _polymul_fp(a, b, p):
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return out


def _polydivmod_fp(a, b, p):
    a = [c % p for c in a]
    db, da = _polydeg_fp(b, p), _polydeg_fp(a, p)
    inv = pow(b[db], -1, p)
    q = [0] * (max(da - db + 1, 1))
    while da >= db:
        c = (a[da] * inv) % p
        q[da - db] = c
        for j in range(db + 1):
            a[da - db + j] = (a[da - db + j] - c * b[j]) % p
        da = _polydeg_fp(a, p)
    return q, a


def _invert_int_matrix_mod(cols, q):
    """Inverse of the (unimodular mod p) matrix with the given columns, mod q."""
    n = len(cols)
    a = [[cols[j][i] % q for j in range(n)] for i in range(n)]
    inv = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    p_of = sub_vp
    for col in range(n):
        piv = None
        for row in range(col, n):
            if a[row][col] % _smallest_prime_factor_hint(q) != 0:
                piv = row
                break
        if piv is None:
            raise ValueError("matrix not invertible mod p")
        a[col], a[piv] = a[piv], a[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        c = pow(a[col][col], -1, q)
        a[col] = [(x * c) % q for x in a[col]]
        inv[col] = [(x * c) % q for x in inv[col]]
        for row in range(n):
            if row != col and a[row][col]:
                f = a[row][col]
                a[row] = [(x - f * y) % q for x, y in zip(a[row], a[col])]
                inv[row] = [(x - f * y) % q for x, y in zip(inv[row], inv[col])]
    del p_of
    return inv


def _smallest_prime_factor_hint(q):
    for p in (3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if q % p == 0:
            return p
    # q is a prime power in all callers; fall back to a crude scan
    d = 3
    while d * d <= q:
        if q % d == 0:
            return d
        d += 2
    return q


# ---------------------------------------------------------------------------
# logarithm / exponential / Teichmuller at scalar level


def teichmuller(a: int, p: int, M: int) -> PadicScalar:
    """omega(a) in Z/p^M: omega(a)^(p-1) = 1 and omega(a) = a mod p."""
    return ZpRing(p, M).teichmuller(a)


def log_unit(x: PadicScalar) -> PadicScalar:
    """log_p of a 1-unit (x = 1 mod the maximal ideal, with v(x-1) > 0).

    Computed by the usual series with working precision padded to absorb the
    divisions by n; the result carries precision prec(x).
    """
    ring = x.ring
    t = x - 1
    vt = t.valuation_lower_bound()
    if vt <= 0:
        raise ValueError("log needs a 1-unit with v(x-1) > 0")
    prec = x.prec
    # series term t^n/n dies once n*vt - log_p(n) >= prec
    nmax = 2
    while nmax * vt - _log_floor(nmax, ring.p) < prec:
        nmax += 1
    pad = _log_floor(nmax, ring.p) + 1
    big = _same_ring_higher_prec(ring, prec + pad)
    tb = big.from_coeffs(x.coeffs, prec + pad) - 1
    acc = big.zero(prec + pad)
    pw = big.one()
    for n in range(1, nmax + 1):
        pw = pw * tb
        vn = sub_vp(n, ring.p, pad)
        term = pw.shift_p(-vn) * big.from_int(
            _inv_mod(n // ring.p ** vn, big.p ** big.M)
        )
        acc = acc + (term if n % 2 == 1 else -term)
    return ring.from_coeffs(acc.coeffs, prec)


def exp_small(x: PadicScalar) -> PadicScalar:
    """exp of x with v(x) >= 1 (p odd); result carries prec(x)."""
    ring = x.ring
    vx = x.valuation_lower_bound()
    if vx < 1:
        raise ValueError("exp needs v(x) >= 1")
    prec = x.prec
    nmax = 2
    while nmax * vx - _factorial_vp(nmax, ring.p) < prec:
        nmax += 1
    pad = _factorial_vp(nmax, ring.p) + 1
    big = _same_ring_higher_prec(ring, prec + pad)
    xb = big.from_coeffs(x.coeffs, prec + pad)
    acc = big.one()
    pw = big.one()
    fact_v = 0
    fact_unit = 1
    for n in range(1, nmax + 1):
        pw = pw * xb
        fact_v += sub_vp(n, ring.p, pad)
        fact_unit = (fact_unit * (n // ring.p ** sub_vp(n, ring.p, pad))) % big.pM
        acc = acc + pw.shift_p(-fact_v) * big.from_int(_inv_mod(fact_unit, big.pM))
    return ring.from_coeffs(acc.coeffs, prec)


def _log_floor(n: int, p: int) -> int:
    out = 0
    while p ** (out + 1) <= n:
        out += 1
    return out


def _factorial_vp(n: int, p: int) -> int:
    out, q = 0, p
    while q <= n:
        out += n // q
        q *= p
    return out


def _same_ring_higher_prec(ring: _Ring, M: int) -> _Ring:
    if isinstance(ring, ZpRing):
        return ZpRing(ring.p, M)
    if isinstance(ring, CyclotomicRing):
        return CyclotomicRing(ring.p, M, ring.r)
    if isinstance(ring, QuadraticRing):
        return QuadraticRing(ring.p, M, ring.trace, ring.norm)
    raise TypeError(ring)


from functools import lru_cache


@lru_cache(maxsize=None)
def Zp(p: int, M: int) -> ZpRing:
    return ZpRing(p, M)


@lru_cache(maxsize=None)
def Zp_cyclotomic(p: int, M: int, r: int) -> CyclotomicRing:
    return CyclotomicRing(p, M, r)


@lru_cache(maxsize=None)
def Zp_quadratic(p: int, M: int, trace: int, norm: int) -> QuadraticRing:
    return QuadraticRing(p, M, trace, norm)


def hensel_quadratic_root(a: int, b: int, p: int, M: int, branch: int = 0) -> int:
    """A root of x^2 - a x + b in Z/p^M when the reduction has simple roots.

    ``branch`` picks the root: 0 for the one with x = a mod p when b = 0 mod p
    (the unit root of a Hecke polynomial), 1 for the other.  Raises if the
    discriminant is not a unit square (no split root).
    """
    pM = p ** M
    # simple roots mod p
    roots = sorted({x for x in range(p) if (x * x - a * x + b) % p == 0})
    simple = [x for x in roots if (2 * x - a) % p != 0]
    if not simple:
        raise ValueError("no simple root mod p; not split")
    simple.sort(key=lambda x: (-((x - a) % p == 0), x))
    x = simple[branch % len(simple)]
    for _ in range(M.bit_length() + 1):
        fx = (x * x - a * x + b) % pM
        dfx = (2 * x - a) % pM
        x = (x - fx * _inv_mod(dfx, pM)) % pM
    assert (x * x - a * x + b) % pM == 0
    return x
