"""Dirichlet characters with p-adically embedded values, and their Gauss sums.

A character mod p^r (p odd) is determined by the image of a generator g of the
cyclic group (Z/p^r)^*.  We parameterise that image as

    chi(g) = omega(g)^s * zeta_{p^(r-1)}^t,

so every value lives in Z_p[zeta_{p^r}] (and already in Z_p when t = 0).
Auxiliary tame characters -- quadratic chi_D via the Kronecker symbol, and
general characters mod D with values zeta_{ord}^j when ord | p - 1 -- are kept
exactly as integer data and embedded on demand, so products like chi * chi_D
of conductor p^r * D still evaluate inside Z_p[zeta_{p^r}].
"""

from __future__ import annotations

from .padic import CyclotomicRing, PadicScalar, ZpRing


def primitive_root_mod_pr(p: int, r: int) -> int:
    """A generator of (Z/p^r)^* for odd p.

    The generator mod p^r always reduces to the one mod p, so character
    values defined through discrete logs are compatible across levels and
    with the Teichmuller embedding of exact roots of unity.
    """
    factors = _prime_factors(p - 1)
    g = 2
    while not all(pow(g, (p - 1) // q, p) != 1 for q in factors):
        g += 1
    if r == 1:
        return g
    # g lifts to a generator mod p^r unless g^(p-1) = 1 mod p^2
    if pow(g, p - 1, p * p) == 1:
        g += p
    return g


def _prime_factors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def kronecker_symbol(a: int, n: int) -> int:
    """The Kronecker symbol (a|n)."""
    if n == 0:
        return 1 if a in (1, -1) else 0
    sign = 1
    if n < 0:
        n = -n
        if a < 0:
            sign = -1
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v % 2 == 1:
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            sign = -sign
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                sign = -sign
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            sign = -sign
        a %= n
    return sign if n == 1 else 0


class DirichletCharacter:
    """A character of conductor p^r * D with D coprime to p.

    The p-part is (s, t) as in the module docstring; the tame part is either
    trivial, a quadratic Kronecker character, or a power-table character whose
    order divides p - 1.  Values are PadicScalar in Z_p[zeta_{p^r}] (r <= 1
    means plain Z_p).
    """

    def __init__(self, p: int, M: int, r: int = 0, s: int = 0, t: int = 0,
                 tame_kind: str = "trivial", tame_modulus: int = 1,
                 tame_data=None):
        if p == 2:
            raise ValueError("p = 2 unsupported")
        self.p, self.M, self.r = p, M, r
        unit_order = p ** max(r - 1, 0) * (p - 1) if r >= 1 else 1
        self.s = s % (p - 1) if r >= 1 else 0
        self.t = t % (p ** max(r - 1, 0)) if r >= 1 else 0
        self.tame_kind = tame_kind
        self.tame_modulus = tame_modulus
        self.tame_data = tame_data
        if tame_kind != "trivial" and tame_modulus % p == 0:
            raise ValueError("tame modulus must be coprime to p")
        self._g = primitive_root_mod_pr(p, r) if r >= 1 else 1
        self._dlog_cache: dict[int, int] = {}
        # minimal cyclotomic level needed to hold the values
        self.zeta_level = r if self.t != 0 else min(r, 1) if r >= 1 else 0
        if self.zeta_level <= 1:
            self.zeta_level = 0
        self.ring = (
            CyclotomicRing(p, M, self.zeta_level)
            if self.zeta_level >= 2
            else ZpRing(p, M)
        )
        del unit_order

    # -- constructors ---------------------------------------------------------

    @classmethod
    def from_p_part(cls, p, M, r, s, t):
        return cls(p, M, r=r, s=s, t=t)

    @classmethod
    def quadratic_tame(cls, p, M, D):
        """The quadratic character a -> (D|a) of an imaginary quadratic field
        of discriminant D < 0 (conductor |D|), as a tame character."""
        if D >= 0:
            raise ValueError("expect a negative fundamental discriminant")
        return cls(p, M, r=0, tame_kind="kronecker", tame_modulus=abs(D), tame_data=D)

    @classmethod
    def trivial(cls, p, M):
        return cls(p, M, r=0)

    # -- structure ------------------------------------------------------------

    @property
    def modulus(self) -> int:
        return self.p ** self.r * self.tame_modulus

    @property
    def conductor(self) -> int:
        pr = self.p ** self.r if (self.s or self.t) else (self.p if self.r >= 1 and self._p_part_nontrivial() else 1)
        # p-part conductor: p^r exactly when t != 0 or r == 1 with s != 0;
        # characters with t = 0 factor through (Z/p)^*.
        if self.r == 0:
            ppart = 1
        elif self.t != 0:
            ppart = self.p ** self.r
        elif self.s != 0:
            ppart = self.p
        else:
            ppart = 1
        del pr
        tame = self.tame_modulus if self.tame_kind != "trivial" else 1
        return ppart * tame

    def _p_part_nontrivial(self):
        return self.s != 0 or self.t != 0

    def is_primitive(self) -> bool:
        return self.conductor == self.modulus

    @property
    def order(self) -> int:
        from math import gcd, lcm
        o = 1
        if self.r >= 1:
            o = lcm((self.p - 1) // gcd(self.s, self.p - 1) if self.s else 1,
                    self.p ** (self.r - 1) // gcd(self.t, self.p ** (self.r - 1)) if self.t else 1)
        if self.tame_kind == "kronecker":
            o = lcm(o, 2)
        elif self.tame_kind == "table":
            o = lcm(o, self.tame_data["order"])
        return o

    def parity(self) -> int:
        """chi(-1) as +1 or -1."""
        val = 1
        if self.r >= 1 and self.s % 2 == 1:
            val = -val
        if self.tame_kind == "kronecker":
            val *= kronecker_symbol(self.tame_data, -1)
        elif self.tame_kind == "table":
            val *= self.tame_data["minus_one"]
        return val

    def _dlog(self, a: int) -> int:
        """Discrete log of a unit a to base g in (Z/p^r)^*; cached, moduli tiny."""
        a %= self.p ** self.r
        if a in self._dlog_cache:
            return self._dlog_cache[a]
        n = self.p ** self.r
        x, g = 1, self._g
        for k in range(self.p ** (self.r - 1) * (self.p - 1)):
            if x == a:
                self._dlog_cache[a] = k
                return k
            x = (x * g) % n
        raise ValueError(f"{a} is not a unit mod {n}")

    # -- evaluation -------------------------------------------------------------

    def __call__(self, a: int) -> PadicScalar:
        from math import gcd
        if gcd(a, self.modulus) != 1:
            return self.ring.zero(self.M)
        out = self.ring.one()
        if self.r >= 1 and (self.s or self.t):
            k = self._dlog(a)
            if self.s:
                zp = ZpRing(self.p, self.M)
                w = zp.teichmuller(self._g % self.p) ** (self.s * k)
                out = out * self.ring.promote(w)
            if self.t:
                # zeta_{p^(r-1)} = zeta_{p^r}^p inside the level-r ring
                out = out * self.ring.zeta_power(self.p * self.t * k)
        if self.tame_kind == "kronecker":
            out = out * self.ring.from_int(kronecker_symbol(self.tame_data, a))
        elif self.tame_kind == "table":
            zp = ZpRing(self.p, self.M)
            j = self.tame_data["logtable"][a % self.tame_modulus]
            root = zp.teichmuller(self.tame_data["zeta_residue"])
            out = out * self.ring.promote(root ** j)
        return out

    def value_exponents(self, a: int):
        """(teich exponent, zeta_{p^r} exponent, tame sign) of chi(a), or None.

        Exact form of the value, used by the exact classical-value pipeline.
        """
        from math import gcd
        if gcd(a, self.modulus) != 1:
            return None
        te, ze, sign = 0, 0, 1
        if self.r >= 1 and (self.s or self.t):
            k = self._dlog(a)
            te = (self.s * k) % (self.p - 1)
            ze = (self.p * self.t * k) % (self.p ** self.r)
        if self.tame_kind == "kronecker":
            sign = kronecker_symbol(self.tame_data, a)
        elif self.tame_kind == "table":
            te_t = self.tame_data["logtable"][a % self.tame_modulus]
            return ("table", te, ze, sign, te_t)
        return (te, ze, sign)

    def inverse(self) -> "DirichletCharacter":
        inv = DirichletCharacter(
            self.p, self.M, r=self.r, s=-self.s, t=-self.t,
            tame_kind=self.tame_kind, tame_modulus=self.tame_modulus,
            tame_data=self.tame_data,
        )
        if self.tame_kind == "table":
            od = self.tame_data["order"]
            inv.tame_data = dict(self.tame_data)
            inv.tame_data["logtable"] = {
                a: (-j) % od for a, j in self.tame_data["logtable"].items()
            }
        return inv

    def __mul__(self, other: "DirichletCharacter") -> "DirichletCharacter":
        if self.p != other.p:
            raise ValueError("characters live at different p")
        if self.tame_kind != "trivial" and other.tame_kind != "trivial":
            raise NotImplementedError("product of two tame parts")
        tame_src = self if self.tame_kind != "trivial" else other
        r = max(self.r, other.r)
        # align p-parts at level r: s adds; t scales by the level gap
        t = (self.t * self.p ** (r - self.r) + other.t * self.p ** (r - other.r))
        return DirichletCharacter(
            self.p, min(self.M, other.M), r=r, s=self.s + other.s, t=t,
            tame_kind=tame_src.tame_kind, tame_modulus=tame_src.tame_modulus,
            tame_data=tame_src.tame_data,
        )

    def __repr__(self):
        bits = [f"p^{self.r} part (s={self.s}, t={self.t})"]
        if self.tame_kind != "trivial":
            bits.append(f"tame {self.tame_kind} mod {self.tame_modulus}")
        return f"DirichletCharacter({', '.join(bits)})"


def all_primitive_p_power(p: int, M: int, r: int) -> list[DirichletCharacter]:
    """All primitive characters of conductor exactly p^r (r >= 1)."""
    out = []
    if r == 1:
        for s in range(1, p - 1):
            out.append(DirichletCharacter(p, M, r=1, s=s, t=0))
    else:
        pr1 = p ** (r - 1)
        for s in range(p - 1):
            for t in range(1, pr1):
                if t % p != 0:
                    out.append(DirichletCharacter(p, M, r=r, s=s, t=t))
    return out


def gauss_sum(chi: DirichletCharacter) -> PadicScalar:
    """tau(chi) = sum_a chi(a) zeta^a over a mod p^r, for primitive p-power chi.

    The value lives in Z_p[zeta_{p^r}].  Raises on non-primitive input or on a
    character with a tame part (use gauss_sum_general for composite conductor).
    """
    if chi.tame_kind != "trivial":
        raise ValueError("p-power Gauss sum needs a pure p-power character")
    r = chi.r
    if r < 1 or not chi._p_part_nontrivial() or chi.conductor != chi.p ** r:
        raise ValueError("character must be primitive of conductor p^r, r >= 1")
    ring = CyclotomicRing(chi.p, chi.M, r)
    acc = ring.zero(chi.M)
    n = chi.p ** r
    for a in range(1, n):
        if a % chi.p == 0:
            continue
        acc = acc + ring.promote(chi(a)) * ring.zeta_power(a)
    return acc


def gauss_sum_general(chi: DirichletCharacter) -> PadicScalar:
    """tau(chi) for primitive chi of conductor p^r * D, evaluated p-adically.

    Needs zeta_D inside Z_p, i.e. D | p - 1 (true for every auxiliary
    conductor this package touches); zeta_{p^r D} then splits by CRT as
    zeta_{p^r}^{inv(D)} * zeta_D^{inv(p^r)}.
    """
    from math import gcd
    if not chi.is_primitive():
        raise ValueError("Gauss sums need a primitive character")
    m = chi.conductor
    p, M = chi.p, chi.M
    r, D = 0, m
    while D % p == 0:
        D //= p
        r += 1
    if D == 1:
        return gauss_sum(chi)
    if (p - 1) % D != 0:
        raise ValueError("auxiliary conductor has no p-adic root of unity")
    ring = CyclotomicRing(p, M, r) if r >= 1 else ZpRing(p, M)
    zD = _teichmuller_root_of_unity(p, M, D)
    c1 = pow(D, -1, p ** r) if r >= 1 else 0
    c2 = pow(p ** r, -1, D)
    acc = ring.zero(M)
    for a in range(1, m):
        if gcd(a, m) != 1:
            continue
        term = ring.promote(chi(a)) * ring.promote(zD ** (a * c2))
        if r >= 1:
            term = term * ring.zeta_power(a * c1)
        acc = acc + term
    return acc


def _teichmuller_root_of_unity(p: int, M: int, D: int) -> PadicScalar:
    """A primitive D-th root of unity in Z_p (requires D | p - 1)."""
    zp = ZpRing(p, M)
    if D == 1:
        return zp.one()
    if (p - 1) % D != 0:
        raise ValueError(f"no primitive {D}-th root of unity in Z_{p}")
    g = primitive_root_mod_pr(p, 1)
    return zp.teichmuller(g) ** ((p - 1) // D)


def gauss_sum_norm_form(chi: DirichletCharacter, disc_abs: int) -> PadicScalar:
    """tau((chi o N)^{-1}) for the norm to an imaginary quadratic field of
    discriminant -disc_abs in which p splits.

    CRT at the two primes above p turns the additive character into two twisted
    copies, giving chi(-1) * chi(-disc_abs)^{-1} * tau(chi^{-1})^2.
    """
    chibar = chi.inverse()
    tau = gauss_sum(chibar)
    ring = tau.ring
    unit = ring.promote(chi((-disc_abs) % chi.modulus)).inverse()
    parity = ring.from_int(chi.parity())
    return parity * unit * tau * tau


def embed_cyclotomic(x, ring) -> PadicScalar:
    """Canonical embedding Q(zeta_n) -> Z_p[zeta_{p^r}] as a PadicScalar.

    Writes n = p^a * n' and sends zeta_{p^a} to the compatible-system power of
    the ring's zeta and zeta_{n'} to the Teichmuller root omega(g)^((p-1)/n')
    for the package's canonical primitive root g.  Requires a <= r and
    n' | p - 1; this is the fixed embedding every exact/p-adic comparison in
    the package goes through.
    """
    from .exactfield import NFElem

    if not isinstance(x, NFElem):
        return ring.from_rational(x)
    n = getattr(x.field, "_zeta_order", None)
    if n is None:
        raise ValueError("embedding defined for cyclotomic elements only")
    p, M = ring.p, ring.M
    a, nprime = 0, n
    while nprime % p == 0:
        nprime //= p
        a += 1
    r = getattr(ring, "r", 0)
    if a > r:
        raise ValueError("target ring has too small a zeta level")
    if nprime > 1 and (p - 1) % nprime != 0:
        raise ValueError("prime-to-p part of the root order must divide p - 1")
    # image of zeta_n
    img = ring.one()
    if a >= 1:
        c1 = pow(nprime, -1, p ** a)
        img = img * ring.zeta_power(p ** (r - a) * c1)
    if nprime > 1:
        c2 = pow(p ** a, -1, nprime)
        w = _teichmuller_root_of_unity(p, M, nprime)
        img = img * ring.promote(w ** c2)
    out = ring.zero(M)
    power = ring.one()
    for c in x.coeffs:
        if c != 0:
            out = out + power * ring.from_rational(c)
        power = power * img
    return out
