"""Coset combinatorics for Gamma0(N): P^1(Z/N), SL2(Z) lifts, path splitting.

Paths between cusps are written as sums of unimodular paths g.{0 -> oo} by the
continued-fraction trick; a negated unimodular path is re-expressed through
g -> g.sigma, so downstream consumers only ever see (+1)-signed pieces.
"""

from __future__ import annotations

from math import gcd


SIGMA = (0, -1, 1, 0)        # order 4; sigma.{0->oo} = -{0->oo}
TAU = (0, -1, 1, -1)         # order 3
IOTA = (-1, 0, 0, 1)         # involution at infinity, det -1


def mat_mul2(a, b):
    return (
        a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3],
    )


def mat_inv2_unimodular(a):
    """Inverse of an integer matrix of determinant +-1."""
    det = a[0] * a[3] - a[1] * a[2]
    if det == 1:
        return (a[3], -a[1], -a[2], a[0])
    if det == -1:
        return (-a[3], a[1], a[2], -a[0])
    raise ValueError("not unimodular")


def apply_to_cusp(m, cusp):
    """Fractional-linear action on a cusp (num, den), normalised coprime."""
    p, q = cusp
    np_, nq = m[0] * p + m[1] * q, m[2] * p + m[3] * q
    if np_ == 0 and nq == 0:
        raise ValueError("matrix kills cusp")
    g = gcd(np_, nq)
    np_, nq = np_ // g, nq // g
    if nq < 0 or (nq == 0 and np_ < 0):
        np_, nq = -np_, -nq
    return (np_, nq)


CUSP_ZERO = (0, 1)
CUSP_INF = (1, 0)


class P1List:
    """Representatives of P^1(Z/NZ); Stein's reduction algorithm."""

    def __init__(self, N: int):
        self.N = N
        seen = {}
        order = []
        for u in range(N):
            for v in range(N):
                try:
                    key = self.reduce((u, v))
                except ValueError:
                    continue
                if key not in seen:
                    seen[key] = len(order)
                    order.append(key)
        self._index = seen
        self._list = order

    def __len__(self):
        return len(self._list)

    def __getitem__(self, i):
        return self._list[i]

    def reduce(self, uv):
        N = self.N
        u, v = uv[0] % N, uv[1] % N
        if N == 1:
            return (0, 0)
        if u == 0:
            if gcd(v, N) == 1:
                return (0, 1)
            raise ValueError("not a P1 point")
        _, s, g = _gcdex(N, u)
        if gcd(g, v) > 1:
            raise ValueError("not a P1 point")
        s = _lift_unit(N, N // g, s % N)
        u, v = g, (s * v) % N
        if g == 1:
            return (1, v)
        v = min((v * t) % N for t in range(1, N, N // g) if gcd(N, t) == 1)
        return (g, v)

    def index(self, uv) -> int:
        return self._index[self.reduce(uv)]


def _gcdex(a, b):
    if b == 0:
        return (1, 0, a) if a >= 0 else (-1, 0, -a)
    q, r = divmod(a, b)
    x, y, g = _gcdex(b, r)
    return y, x - y * q, g


def _lift_unit(n, d, a):
    """Lift a unit a mod d to a unit mod n (d | n)."""
    u, v = 1, n
    g = gcd(v, d)
    while g > 1:
        u *= g
        v //= g
        g = gcd(v, g)
    x, y, _ = _gcdex(u, v)
    return (u * x + a * y * v) % n


def lift_to_sl2z(uv, N: int):
    """An SL2(Z) matrix with bottom row congruent to uv mod N."""
    c, d = uv[0] % N, uv[1] % N
    if N == 1:
        return (1, 0, 0, 1)
    if c == 0:
        if gcd(d, N) != 1:
            raise ValueError("not a P1 point")
        return (1, 0, 0, 1)
    # adjust d by multiples of N until gcd(c, d) == 1
    t = 0
    while gcd(c, d + t * N) != 1:
        t += 1
    d = d + t * N
    g, x, y = _ext_gcd(c, d)
    assert g == 1
    # a*d - b*c = 1 with (a, b) = (y, -x)
    return (y, -x, c, d)


def _ext_gcd(a, b):
    if a == 0:
        return (b, 0, 1)
    g, x, y = _ext_gcd(b % a, a)
    return (g, y - (b // a) * x, x)


def convergent_matrices(cusp):
    """Unimodular matrices g with {oo -> cusp} = sum g.{0 -> oo}.

    Telescoping over continued-fraction convergents of the cusp; an empty list
    for the cusp oo itself.
    """
    if cusp == CUSP_INF:
        return []
    a, b = cusp
    # continued fraction of a/b with floor division, b > 0
    quots = []
    x, y = a, b
    while y:
        q, r = divmod(x, y)
        quots.append(q)
        x, y = y, r
    mats = []
    pk_1, qk_1 = 1, 0     # p_{-1}/q_{-1} = oo
    pk, qk = quots[0], 1  # p_0/q_0
    for k in range(len(quots)):
        if k > 0:
            pk_1, qk_1, pk, qk = pk, qk, quots[k] * pk + pk_1, quots[k] * qk + qk_1
        s = -1 if k % 2 == 0 else 1  # (-1)^{k-1}
        g = (s * pk, pk_1, s * qk, qk_1)
        assert g[0] * g[3] - g[1] * g[2] == 1
        mats.append(g)
    assert apply_to_cusp(mats[-1], CUSP_INF) == cusp
    return mats


def path_pieces(x, y):
    """{x -> y} as a list of SL2(Z) matrices g with the path = sum g.{0->oo}.

    Negative pieces are folded in through right-multiplication by sigma.
    """
    out = list(convergent_matrices(y))
    for g in convergent_matrices(x):
        out.append(mat_mul2(g, SIGMA))
    return out


class CosetTable:
    """Right cosets Gamma0(N)\\SL2(Z) with transport bookkeeping."""

    def __init__(self, N: int):
        self.N = N
        self.p1 = P1List(N)
        self.reps = [lift_to_sl2z(uv, N) for uv in self.p1._list]

    def __len__(self):
        return len(self.reps)

    def coset_index(self, g) -> int:
        return self.p1.index((g[2] % self.N, g[3] % self.N))

    def transport(self, g):
        """(index j, delta) with g = delta * reps[j], delta in Gamma0(N)."""
        j = self.coset_index(g)
        delta = mat_mul2(g, mat_inv2_unimodular(self.reps[j]))
        assert delta[2] % self.N == 0
        return j, delta

    def generator_divisor(self, i):
        """The path underlying generator i: reps[i].{0 -> oo}."""
        g = self.reps[i]
        return (apply_to_cusp(g, CUSP_ZERO), apply_to_cusp(g, CUSP_INF))

    def decompose_divisor(self, x, y):
        """{x -> y} as [(j, gamma)] with value sum F_j | gamma^{-1}-transport.

        Each returned gamma is the Gamma0(N) transport delta for one
        unimodular piece: the piece equals delta * reps[j] . {0->oo}, so a
        symbol value is F_j | delta^{-1}.
        """
        out = []
        for g in path_pieces(x, y):
            j, delta = self.transport(g)
            out.append((j, delta))
        return out
