"""Finite-approximation distributions: moment vectors with a sliding filtration.

A distribution is stored as its moments mu(z^j), j < n_moments, each an element
of Z/p^M (or of a quadratic extension, or of the weight-disc ring
Z/p^M[w]/(w^n) for families).  The canonical filtration gives moment j
absolute precision M - j; the matrix action below preserves that profile
exactly, and every operation propagates an exact per-moment precision vector.

Bulk arithmetic is numpy int64 with explicit reductions; p^M stays below 2^26
so a product of two reduced residues plus the row sums cannot overflow.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np

from .padic import PadicScalar, Zp, Zp_quadratic, sub_vp

INT64_SAFE_CAP = 1 << 26


@dataclass(frozen=True)
class CoeffSpec:
    """Shape of one moment coefficient.

    kind: "zp" (width 1), "quad" (width 2 over x^2 - t x + n), or the family
    ring marker is carried by WeightChar instead (family moments use width =
    truncation order, with multiplication given by w-convolution).
    """
    p: int
    M: int
    kind: str = "zp"
    quad_trace: int = 0
    quad_norm: int = 0

    @property
    def pM(self) -> int:
        return self.p ** self.M

    @property
    def width(self) -> int:
        return 2 if self.kind == "quad" else 1

    def check_cap(self):
        if self.pM >= INT64_SAFE_CAP:
            raise ValueError(
                f"p^M = {self.pM} exceeds the int64-safe cap {INT64_SAFE_CAP}"
            )

    def ring(self):
        if self.kind == "quad":
            return Zp_quadratic(self.p, self.M, self.quad_trace, self.quad_norm)
        return Zp(self.p, self.M)


@dataclass(frozen=True)
class WeightChar:
    """z -> z^k0, or the weight-disc character z -> z^k0 exp(w log<z>).

    Family mode is truncated at order n in w.  The graded blocks carry the
    cone v_p(w^m-part) >= m - v_p(m!), which both preserves the moment
    filtration under the matrix action and bounds the specialisation tail: a
    classical weight k = k0 mod (p-1) corresponds to w = k - k0, and the
    specialised value is exact to n (v_p(w)+1) - v_p(n!) digits, so weights
    with v_p(k-k0) = 0 sit on the disc boundary with the minimum bound and
    deeper-congruent weights gain accuracy.
    """
    k0: int
    n: int = 1

    @property
    def is_family(self) -> bool:
        return self.n > 1

    def w_value_for_weight(self, k: int, spec: "CoeffSpec") -> int:
        p = spec.p
        if (k - self.k0) % (p - 1) != 0:
            raise ValueError(
                f"weight {k} is not congruent to {self.k0} mod {p - 1}; "
                "outside this disc"
            )
        return (k - self.k0) % spec.pM


class FiniteDist:
    """Moment list with per-moment absolute precision.

    moments: int array of shape (n_moments, width); width is the coefficient
    width (1, 2 for quadratic, or the family truncation order n).
    prec: int array (n_moments,), the absolute precision of each moment.
    """

    def __init__(self, spec: CoeffSpec, weight: WeightChar, moments, prec=None,
                 tail_val: int = 0):
        self.spec = spec
        self.weight = weight
        arr = np.asarray(moments, dtype=np.int64)
        if arr.ndim == 1:
            arr = arr[:, None]
        self.moments = arr % spec.pM
        self.n_moments = arr.shape[0]
        if prec is None:
            prec = canonical_filtration(spec.M, self.n_moments)
        self.prec = np.asarray(prec, dtype=np.int64)
        # lower bound on the valuation of the untracked moments >= n_moments;
        # the action mixes them into tracked moments with weight >= n_mom - j
        self.tail_val = tail_val

    @classmethod
    def from_scalars(cls, spec, weight, values):
        """Build from integers (or PadicScalar) for the first moments; the rest 0."""
        width = weight.n if weight.is_family else spec.width
        rows = []
        for v in values:
            if isinstance(v, PadicScalar):
                row = list(v.coeffs) + [0] * (width - len(v.coeffs))
            elif isinstance(v, (list, tuple)):
                row = list(v) + [0] * (width - len(v))
            else:
                row = [int(v) % spec.pM] + [0] * (width - 1)
            rows.append(row)
        return cls(spec, weight, np.array(rows, dtype=np.int64))

    def copy(self):
        return FiniteDist(self.spec, self.weight, self.moments.copy(), self.prec.copy())

    def moment(self, j: int) -> PadicScalar:
        """Moment j as a PadicScalar at its tracked precision (non-family)."""
        if self.weight.is_family:
            raise ValueError("family moments are w-polynomials; use moment_poly")
        ring = self.spec.ring()
        pr = max(int(self.prec[j]), 0)
        return ring.from_coeffs([int(c) for c in self.moments[j]], pr)

    def moment_poly(self, j: int) -> list[int]:
        return [int(c) for c in self.moments[j]]

    def add(self, other: "FiniteDist") -> "FiniteDist":
        return FiniteDist(self.spec, self.weight,
                          (self.moments + other.moments) % self.spec.pM,
                          np.minimum(self.prec, other.prec),
                          tail_val=min(self.tail_val, other.tail_val))

    def is_dirac_zero_profile(self):
        return bool(np.all(self.moments[1:] == 0))

    def filtration_level(self) -> int:
        """min_j (v_p(moment j) + j): position in Fil; >= this value."""
        return filtration_level(self.moments, self.prec, self.spec)


def canonical_filtration(M: int, n_moments: int):
    return np.maximum(M - np.arange(n_moments, dtype=np.int64), 1)


def filtration_level(moments, prec, spec) -> int:
    p = spec.p
    best = None
    n = moments.shape[0]
    for j in range(n):
        pj = max(int(prec[j]), 0)
        row = moments[j] % (p ** pj)
        if np.all(row == 0):
            v = pj
        else:
            v = min(sub_vp(int(c), p, pj) for c in row)
        cand = v + j
        best = cand if best is None else min(best, cand)
    return best if best is not None else 0


# ---------------------------------------------------------------------------
# power series helpers over Z/p^M (exact python ints; build-time only)


def _series_mul(a, b, nmom, q):
    out = [0] * nmom
    for i, ai in enumerate(a):
        if ai and i < nmom:
            for j, bj in enumerate(b):
                if i + j >= nmom:
                    break
                if bj:
                    out[i + j] = (out[i + j] + ai * bj) % q
    return out


def _series_inv_linear(a0, a1, nmom, q):
    """(a0 + a1 z)^{-1} as a truncated geometric series; a0 a unit."""
    u = pow(a0, -1, q)
    out = [0] * nmom
    term = u
    ratio = (-a1 * u) % q
    for i in range(nmom):
        out[i] = term
        term = (term * ratio) % q
    return out


def _series_pow_linear(a0, a1, e, nmom, q):
    """(a0 + a1 z)^e for e >= 0, truncated."""
    out = [1] + [0] * (nmom - 1)
    base = [a0 % q, a1 % q] + [0] * max(nmom - 2, 0)
    while e:
        if e & 1:
            out = _series_mul(out, base, nmom, q)
        base = _series_mul(base, base, nmom, q)
        e >>= 1
    return out


def _series_log1p(s, nmom, p, M):
    """log(1 + s(z)) for s with positive z-order and v_p(coeffs) >= 1.

    Computed with padded working precision to absorb divisions by n.
    """
    pad = 1
    while p ** pad <= nmom:
        pad += 1
    qbig = p ** (M + pad)
    acc = [0] * nmom
    power = [1] + [0] * (nmom - 1)
    sb = [c % qbig for c in s]
    for n in range(1, nmom):
        power = _series_mul(power, sb, nmom, qbig)
        vn = sub_vp(n, p, pad)
        inv_unit = pow(n // p ** vn, -1, qbig)
        sign = 1 if n % 2 == 1 else -1
        for i in range(nmom):
            if power[i]:
                term = power[i] // p ** vn if power[i] % p ** vn == 0 else None
                if term is None:
                    raise ArithmeticError("log series division not exact; raise padding")
                acc[i] = (acc[i] + sign * term * inv_unit) % qbig
    q = p ** M
    return [c % q for c in acc]


def _scalar_log_1unit(u: int, p: int, M: int) -> int:
    """log_p of a 1-unit in Z/p^M (exact padded series)."""
    pad = 1
    while p ** pad <= M + p:
        pad += 1
    qbig = p ** (M + pad)
    t = (u - 1) % qbig
    acc = 0
    power = 1
    n = 1
    while True:
        power = (power * t) % qbig
        vn = sub_vp(n, p, pad)
        if n * 1 - vn >= M + pad:
            break
        if power % p ** vn != 0:
            raise ArithmeticError("scalar log division not exact")
        term = (power // p ** vn) * pow(n // p ** vn, -1, qbig) % qbig
        acc = (acc + (term if n % 2 == 1 else -term)) % qbig
        n += 1
        if n > 4 * (M + pad):
            break
    return acc % p ** M


# ---------------------------------------------------------------------------
# the Sigma0(p) action


def check_sigma0_shape(gamma, p: int):
    a, b, c, d = gamma
    if c % p != 0 or a % p == 0 or a * d - b * c == 0:
        raise ValueError(f"{gamma} is not of Sigma0({p}) shape")


class ActionMatrix:
    """The moment-side matrix of one Sigma0(p) element at one weight.

    blocks: int64 array (n_w, n_moments, n_moments); blocks[w][j][i] is the
    w^w-component of the z^i series coefficient of the weight-action image of
    z^j.  For single weight n_w = 1.  val[j][i] is the exact minimum p-adic
    valuation over w-blocks, used for precision propagation.
    """

    def __init__(self, blocks, val):
        self.blocks = blocks
        self.val = val

    def apply(self, moments, spec: CoeffSpec, weight: WeightChar):
        pM = spec.pM
        if weight.is_family:
            n = weight.n
            out = np.zeros_like(moments)
            for w1 in range(n):
                blk = self.blocks[w1]
                for w2 in range(n - w1):
                    out[:, w1 + w2] += blk @ moments[:, w2] % pM
            return out % pM
        blk = self.blocks[0]
        return (blk @ (moments % pM)) % pM

    def propagate_prec(self, prec, M: int, tail_val: int = 0):
        """prec_out[j] = min(min_i prec_in[i] + val[j][i], tail floor, M).

        The tail floor (n_mom - j) + tail_val is the exact bound on what the
        untracked moments can contribute to tracked moment j: the action
        matrix entry at input i has valuation >= i - j.
        """
        n = self.val.shape[0]
        padded = prec[None, :] + self.val
        tracked = padded.min(axis=1)
        tail = (n - np.arange(n, dtype=np.int64)) + tail_val
        return np.minimum(np.minimum(tracked, tail), M)


def action_matrix(gamma, weight: WeightChar, n_moments: int, spec: CoeffSpec,
                  _cache={}) -> ActionMatrix:
    """Moment matrix of gamma = [[a,b],[c,d]] acting at the given weight.

    Row j is the coefficient list of lambda(a + cz) ((b + dz)/(a + cz))^j as a
    power series in z; successive rows come from one multiplication by the
    ratio series.
    """
    key = (gamma, weight, n_moments, spec)
    hit = _cache.get(key)
    if hit is not None:
        return hit
    p, M, q = spec.p, spec.M, spec.pM
    check_sigma0_shape(gamma, p)
    a, b, c, d = gamma
    n_w = weight.n if weight.is_family else 1
    k0 = weight.k0
    # lambda(a + cz): rows-of-w blocks
    if not weight.is_family:
        base = [_series_pow_linear(a, c, k0, n_moments, q)]
    else:
        base = _family_character_series(a, c, k0, weight.n, n_moments, p, M)
    ratio = _series_mul(
        [b % q, d % q] + [0] * (n_moments - 2),
        _series_inv_linear(a, c, n_moments, q),
        n_moments, q,
    )
    blocks = np.zeros((n_w, n_moments, n_moments), dtype=np.int64)
    rows = [list(bl) for bl in base]
    for j in range(n_moments):
        for w in range(n_w):
            blocks[w, j, :] = rows[w]
        if j + 1 < n_moments:
            rows = [_series_mul(r, ratio, n_moments, q) for r in rows]
    val = np.zeros((n_moments, n_moments), dtype=np.int64)
    for j in range(n_moments):
        for i in range(n_moments):
            entries = [int(blocks[w, j, i]) for w in range(n_w)]
            val[j, i] = min((sub_vp(e, p, M) if e else M) for e in entries)
    mat = ActionMatrix(blocks, val)
    _cache[key] = mat
    return mat


def _family_character_series(a, c, k0, n_w, n_moments, p, M):
    """w-blocks of chi(a + cz) = (a + cz)^k0 exp(w log<a + cz>).

    log<a + cz> has coefficients of valuation >= 1, so the w^m block carries
    p-content >= m - v_p(m!) (the disc cone) and in particular preserves the
    moment filtration.  The scalar part log<a> rides along so specialising
    w = 0 is exactly weight k0.
    """
    q = p ** M
    base0 = _series_pow_linear(a, c, k0, n_moments, q)
    pad = 2
    while p ** pad <= n_w * (M + p):
        pad += 1
    qbig = p ** (M + pad)
    u = pow(a, -1, qbig)
    s = [0, (c * u) % qbig] + [0] * (n_moments - 2)
    logser = _series_log1p(s, n_moments, p, M + pad)    # log(1 + (c/a) z)
    from .padic import Zp as _Zp
    ring = _Zp(p, M + pad)
    om = ring.teichmuller(a % p).coeffs[0]
    aunit = (a * pow(om, -1, qbig)) % qbig
    ell_a = _scalar_log_1unit(aunit, p, M + pad)
    L = list(logser)
    L[0] = (L[0] + ell_a) % qbig
    blocks = [[0] * n_moments for _ in range(n_w)]
    blocks[0][0] = 1
    power = [1] + [0] * (n_moments - 1)
    factv, factu = 0, 1
    for m in range(1, n_w):
        power = _series_mul(power, L, n_moments, qbig)
        factv += sub_vp(m, p, pad)
        factu = (factu * (m // p ** sub_vp(m, p, pad))) % qbig
        inv_u = pow(factu, -1, qbig)
        for i in range(n_moments):
            if power[i]:
                if power[i] % p ** factv != 0:
                    raise ArithmeticError("family exp division not exact")
                blocks[m][i] = ((power[i] // p ** factv) * inv_u) % q
    out = []
    for m in range(n_w):
        out.append(_series_mul(base0, blocks[m], n_moments, q))
    return out


def act(gamma, mu: FiniteDist) -> FiniteDist:
    """mu | gamma: the dual weight action on moments."""
    mat = action_matrix(gamma, mu.weight, mu.n_moments, mu.spec)
    moments = mat.apply(mu.moments, mu.spec, mu.weight)
    prec = mat.propagate_prec(mu.prec, mu.spec.M, mu.tail_val)
    return FiniteDist(mu.spec, mu.weight, moments, prec, tail_val=mu.tail_val)


def specialise_rho(mu: FiniteDist, k: int):
    """First k+1 moments as PadicScalars: the finite-weight specialisation."""
    if mu.n_moments < k + 1:
        raise ValueError("not enough moments to specialise")
    if int(mu.prec[k]) < 1:
        raise ValueError("moment k has no retained precision")
    return [mu.moment(j) for j in range(k + 1)]


def family_specialise_scalar(poly: list[int], w_value: int, spec: CoeffSpec,
                             n: int, prec: int):
    """Evaluate a w-truncated scalar at an integer w-value.

    The underlying disc functions obey the cone v_p(w^m-part) >= m - v_p(m!),
    so the dropped tail has valuation at least n (v_p(w)+1) - v_p(n!); that
    exact floor caps the returned precision.
    """
    q = spec.pM
    acc, pw = 0, 1
    for cm in poly:
        acc = (acc + cm * pw) % q
        pw = (pw * w_value) % q
    vw = sub_vp(w_value % q, spec.p, spec.M) if w_value % q else spec.M
    from .padic import _factorial_vp
    loss_floor = n * (vw + 1) - _factorial_vp(n, spec.p)
    return acc, min(prec, max(loss_floor, 1))


def family_specialise(mu: FiniteDist, k_target: int) -> FiniteDist:
    """Specialise a family distribution at an accessible classical weight."""
    if not mu.weight.is_family:
        if k_target != mu.weight.k0:
            raise ValueError("single-weight distribution; wrong target")
        return mu
    w_val = mu.weight.w_value_for_weight(k_target, mu.spec)
    n = mu.weight.n
    out = np.zeros((mu.n_moments, mu.spec.width), dtype=np.int64)
    prec = mu.prec.copy()
    for j in range(mu.n_moments):
        v, pr = family_specialise_scalar([int(c) for c in mu.moments[j]], w_val,
                                         mu.spec, n, int(mu.prec[j]))
        out[j, 0] = v
        prec[j] = pr
    return FiniteDist(mu.spec, WeightChar(k_target, 1), out, prec)


def family_character_value(t: int, weight: WeightChar, k_target: int,
                           spec: CoeffSpec) -> tuple[int, int]:
    """chi_fam(t) specialised at an accessible weight, for unit t.

    Returns (value, exact precision floor); the value approximates t^k_target
    to that floor.
    """
    mat = action_matrix((t, 0, 0, t), weight, 1, spec)
    poly = [int(mat.blocks[w, 0, 0]) for w in range(weight.n)]
    w_value = weight.w_value_for_weight(k_target, spec)
    return family_specialise_scalar(poly, w_value, spec, weight.n, spec.M)


def dirac_delta(spec: CoeffSpec, weight: WeightChar, at: int, n_moments: int) -> FiniteDist:
    """The Dirac distribution at an integer point: moments at^j."""
    width = weight.n if weight.is_family else spec.width
    rows = np.zeros((n_moments, width), dtype=np.int64)
    for j in range(n_moments):
        rows[j, 0] = pow(at, j, spec.pM)
    return FiniteDist(spec, weight, rows, np.full(n_moments, spec.M, dtype=np.int64))
