"""p-adic L-functions: Mellin transform, evaluation, interpolation factors,
quadratic twists, products, and growth profiling.

The distribution attached to an eigenlift Phi is stored through its branch
moments: for every stored depth n and unit residue c mod p^n,

    b[c][m] = integral over c + p^n Z_p of (z - c)^m,

computed as alpha^{-n} p^{nm} Phi{oo -> c/p^n}(z^m).  Non-unit eigenvalues
make these Laurent: each layer carries one global p-power shift, and every
evaluation returns a LaurentScalar (integral scalar, p-power denominator).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, gcd

from .characters import (
    DirichletCharacter,
    gauss_sum,
    gauss_sum_general,
    gauss_sum_norm_form,
)
from .manin import CUSP_INF
from .modsym import period_sum_padic
from .padic import (
    PadicScalar,
    PrecisionError,
    Zp,
    Zp_cyclotomic,
    log_unit,
    sub_vp,
)


# ---------------------------------------------------------------------------
# Laurent bookkeeping


class LaurentScalar:
    """value = scalar * p^(-shift); scalar integral in its ring, shift >= 0.

    Keeps L-values, interpolation factors and classical avatars exact without
    negative-valuation ring elements; comparisons cross-multiply and report
    the precision at which they held.
    """

    def __init__(self, scalar: PadicScalar, shift: int = 0):
        self.scalar = scalar
        self.shift = int(shift)

    @property
    def ring(self):
        return self.scalar.ring

    def __mul__(self, other):
        if isinstance(other, LaurentScalar):
            a, b = self.scalar, other.scalar
            ring = a.ring if a.ring.degree >= b.ring.degree else b.ring
            out = LaurentScalar(ring.promote(a) * ring.promote(b),
                                self.shift + other.shift)
        else:
            out = LaurentScalar(self.scalar * other, self.shift)
        # keep denominators minimal: every digit of shift left in place costs
        # a digit of comparison headroom downstream
        return out.normalised()

    __rmul__ = __mul__

    def valuation(self):
        v = self.scalar.valuation_lower_bound()
        return v - self.shift

    def value_digits(self) -> int:
        """Absolute digits carried by the value scalar*p^(-shift); two equal
        values always agree to min of their value_digits."""
        return self.scalar.prec - self.shift

    def is_zero(self) -> bool:
        return self.scalar.is_zero()

    def normalised(self) -> "LaurentScalar":
        s, sh = self.scalar, self.shift
        while sh > 0:
            try:
                s2 = s.shift_p(-1)
            except (ValueError, PrecisionError):
                break
            s, sh = s2, sh - 1
        return LaurentScalar(s, sh)

    def agreement_digits(self, other: "LaurentScalar") -> int:
        """Digits (absolute, after clearing denominators) to which the values
        agree; equality claims are always made through this."""
        a, b = self, other
        ring = a.ring if a.ring.degree >= b.ring.degree else b.ring
        x = ring.promote(a.scalar) * ring.from_int(ring.p ** b.shift)
        y = ring.promote(b.scalar) * ring.from_int(ring.p ** a.shift)
        diff = x - y
        v = diff.valuation_lower_bound()
        return int(v) - (a.shift + b.shift)

    def __repr__(self):
        return f"LaurentScalar({self.scalar!r} / p^{self.shift})"


def laurent_ratio(num: LaurentScalar, den: LaurentScalar):
    """num / den as (PadicScalar, p-shift), via exact adjugate division."""
    ring = num.ring if num.ring.degree >= den.ring.degree else den.ring
    z, lost = padic_divide(ring.promote(num.scalar), ring.promote(den.scalar))
    return LaurentScalar(z, num.shift - den.shift), lost


def padic_divide(x: PadicScalar, y: PadicScalar):
    """Solve y * z = x exactly in the ring; returns (z, digits_lost).

    The multiplication-by-y matrix (integer representatives) is solved over
    the exact rationals; the solution must be p-integral, and the digits lost
    equal the p-valuation of the determinant.
    """
    from gmpy2 import mpq as _mpq

    ring = x.ring
    d = ring.degree
    q = ring.p ** ring.M
    basis = [tuple(1 if i == jj else 0 for i in range(d)) for jj in range(d)]
    cols = [ring.mul_coeffs(y.coeffs, bvec, q) for bvec in basis]
    aug = [[_mpq(int(cols[jj][i])) for jj in range(d)] + [_mpq(int(x.coeffs[i]))]
           for i in range(d)]
    det = _mpq(1)
    for col in range(d):
        piv = None
        best_v = None
        for row in range(col, d):
            v = aug[row][col]
            if v != 0:
                vv = sub_vp(abs(int(v.numerator)), ring.p, ring.M * d) - sub_vp(
                    int(v.denominator), ring.p, ring.M * d)
                if best_v is None or vv < best_v:
                    best_v, piv = vv, row
        if piv is None:
            raise ZeroDivisionError("division not determined at this precision")
        if piv != col:
            aug[col], aug[piv] = aug[piv], aug[col]
            det = -det
        det *= aug[col][col]
        inv = 1 / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for row in range(d):
            if row != col and aug[row][col] != 0:
                f = aug[row][col]
                aug[row] = [a - f * b for a, b in zip(aug[row], aug[col])]
    vdet = sub_vp(abs(int(det.numerator)), ring.p, ring.M * d) - sub_vp(
        int(det.denominator), ring.p, ring.M * d)
    z = []
    for i in range(d):
        zi = aug[i][d]
        den = int(zi.denominator)
        if den % ring.p == 0:
            raise ZeroDivisionError("not divisible in the ring at this precision")
        z.append(int(zi.numerator) * pow(den, -1, q) % q)
    prec = min(x.prec, y.prec) - max(vdet, 0)
    if prec <= 0:
        raise PrecisionError("division consumed all precision")
    return PadicScalar(ring, tuple(z), prec), max(vdet, 0)


# ---------------------------------------------------------------------------
# the L-function object


@dataclass
class PadicL:
    """Branch-moment presentation of a distribution on Z_p^*.

    layers[n] = (shift, {c: [PadicScalar moments]}) over unit residues c mod
    p^n; the true moment is the stored scalar times p^(-shift).
    """
    p: int
    budget: int
    n_moments: int
    layers: dict = field(default_factory=dict)
    sign: int | None = None
    slope: Fraction = Fraction(0)
    meta: dict = field(default_factory=dict)

    def depth(self) -> int:
        return max(self.layers)

    def branch_moment(self, n: int, c: int, m: int) -> LaurentScalar:
        shift, mom = self.layers[n]
        return LaurentScalar(mom[c][m], shift)

    def scaled(self, u: PadicScalar) -> "PadicL":
        layers = {
            n: (s, {c: [u * x for x in v] for c, v in mom.items()})
            for n, (s, mom) in self.layers.items()
        }
        return PadicL(self.p, self.budget, self.n_moments, layers, self.sign,
                      self.slope, dict(self.meta))


def mellin(Phi, alpha: PadicScalar, depth: int = 2) -> PadicL:
    """Branch moments of the unit-ball restriction of Phi{oo -> .}.

    The coset c + p^n Z_p is reached through n applications of U_p, hence the
    alpha^{-n} scaling; p^{nm} from recentring makes every stored moment
    integral with flat absolute precision.
    """
    from .lift import _alpha_inverse_parts

    p = Phi.spec.p
    k = Phi.space.k
    if Phi.weight.is_family:
        raise ValueError("Mellin of a family symbol: specialise a weight first")
    ring = Phi.spec.ring()
    inv_coeffs, inv_shift = _alpha_inverse_parts(
        PadicScalar(ring, tuple(int(c) for c in Phi.eigenvalue), ring.M), k)
    inv_unit = PadicScalar(ring, inv_coeffs, ring.M)
    out = PadicL(p, Phi.spec.M, Phi.n_moments, sign=Phi.space.sign,
                 slope=Fraction(*(Phi.ledger.slope_num, Phi.ledger.slope_den)))
    out.meta["ledger"] = Phi.ledger.to_dict()
    for n in range(1, depth + 1):
        pn = p ** n
        shift = n * inv_shift + Phi.ledger.shift
        moments = {}
        unit_n = inv_unit ** n
        for c in range(1, pn):
            if c % p == 0:
                continue
            val = Phi.value_on_path(CUSP_INF, (c, pn))
            row = []
            for m in range(Phi.n_moments):
                sc = val.moment(m)
                scaled = unit_n * sc * ring.from_int(pow(p, n * m, ring.pM))
                scaled = PadicScalar(ring, scaled.coeffs,
                                     min(sc.prec + n * m, ring.M))
                row.append(scaled)
            moments[c] = row
        out.layers[n] = (shift, moments)
    return out


def dirac_L(p: int, budget: int, n_moments: int, at: int = 1,
            depth: int = 2) -> PadicL:
    """Dirac mass at a unit point, as a PadicL (the convolution unit at 1)."""
    ring = Zp(p, budget)
    out = PadicL(p, budget, n_moments)
    for n in range(1, depth + 1):
        pn = p ** n
        moments = {}
        for c in range(1, pn):
            if c % p == 0:
                continue
            if c == at % pn:
                row = [ring.from_int((at - c) ** m) for m in range(n_moments)]
            else:
                row = [ring.zero(budget) for _ in range(n_moments)]
            moments[c] = row
        out.layers[n] = (0, moments)
    return out


class PrecisionExhausted(ArithmeticError):
    """A requested value is indistinguishable from zero at working precision."""


def evaluate(L: PadicL, chi: DirichletCharacter, j: int,
             allow_analytic: bool = True) -> LaurentScalar:
    """integral of chi(z) z^j dL over Z_p^*.

    The stored layer at the conductor depth gives an exact finite sum; deeper
    characters fall back to the analytic expansion around the stored branches.
    """
    if chi.tame_kind != "trivial":
        raise ValueError("evaluate expects a p-power-conductor character")
    if j < 0:
        raise ValueError("j must be >= 0")
    p = L.p
    r = _p_part_exponent(chi.conductor, p)
    if r == 0 and not (chi.s or chi.t):
        raise ValueError("conductor-1 evaluation (exceptional factor) is out of scope")
    if r <= L.depth():
        return _evaluate_direct(L, chi, j, max(r, 1))
    if not allow_analytic:
        raise ValueError("character deeper than stored branch moments")
    return _evaluate_analytic(L, chi, j)


def _p_part_exponent(m: int, p: int) -> int:
    r = 0
    while m % p == 0:
        m //= p
        r += 1
    return r


def _evaluate_direct(L: PadicL, chi, j: int, n: int) -> LaurentScalar:
    shift, moments = L.layers[n]
    sample = next(iter(moments.values()))[0]
    ring = chi.ring if chi.ring.degree >= sample.ring.degree else sample.ring
    acc = ring.zero(L.budget)
    for c, row in moments.items():
        chival = chi(c)
        if chival.is_zero():
            continue
        inner = ring.zero(L.budget)
        for l in range(min(j, L.n_moments - 1) + 1):
            inner = inner + ring.promote(row[l]) * comb(j, l) * c ** (j - l)
        acc = acc + ring.promote(chival) * inner
    return LaurentScalar(acc, shift)


def _evaluate_analytic(L: PadicL, chi, j: int) -> LaurentScalar:
    """Evaluation beyond the stored depth, by Mahler expansion at the stored
    branches.

    chi(z) = chi(-1) tau(chi) p^{-r} sum_b chibar(b) zeta^{bz}, and on a branch
    c + p^n Z_p the root-of-unity power zeta^{bw} (w = z - c) is summed through
    its binomial series sum_m (zeta^b - 1)^m C(w, m).  The binomial moments
    come from the stored monomial moments with factorial denominators; the
    characters are locally constant, not analytic, so this route is exact but
    ill-conditioned: each term m costs v_p(m!) digits while gaining only
    m/phi(p^r).  The returned precision reflects that honestly, and
    PrecisionExhausted is raised when nothing survives -- the cure is a deeper
    Mellin layer, not a lower bar.
    """
    p = L.p
    r = chi.r
    n = L.depth()
    pr = p ** r
    n_mom = L.n_moments
    e = p ** (r - 1) * (p - 1)
    # Stirling expansion of the falling factorials: C(w, m) m! = sum_i s(m,i) w^i
    m_cap = e * (L.budget + 2)
    # headroom: products sit above p^budget before the 1/m! shift-down
    pad = _factorial_vp_int(m_cap, p) + 4
    big = Zp_cyclotomic(p, L.budget + pad, r)
    chibar = chi.inverse()
    shift, moments = L.layers[n]
    # adaptive stop decided below; precompute signed Stirling rows lazily
    stirling = [[1]]  # row m: coefficients of w(w-1)...(w-m+1), ascending

    def stirling_row(m):
        while len(stirling) <= m:
            prev = stirling[-1]
            mm = len(stirling) - 1
            row = [0] * (len(prev) + 1)
            for i, cme in enumerate(prev):
                row[i + 1] += cme
                row[i] -= mm * cme
            stirling.append(row)
        return stirling[m]

    total = big.zero(big.M)
    prec_run = L.budget  # running absolute-precision bound of the sum
    m = 0
    used_m = 0
    while m < m_cap:
        gain = (m * 1.0) / e
        if gain >= prec_run:
            break
        fv = _factorial_vp_int(m, p)
        term_prec = L.budget - fv  # digits the moment pairing retains
        if term_prec <= 0:
            break
        # S(m, c) = sum_i s(m, i)/m! * integral w^i (c+w)^j = monomial pairing
        fu_inv = pow(_factorial_unit(m, p, big.pM), -1, big.pM)
        row_s = stirling_row(m)
        contrib = big.zero(big.M)
        for b in range(1, pr):
            if b % p == 0:
                continue
            zb = big.zeta_power(b)
            zb1 = zb - big.one()
            zb1m = zb1 ** m
            cb = big.promote(chibar(b))
            for c, mom_row in moments.items():
                # integral of C(w,m)(c+w)^j over the branch
                acc = big.zero(big.M)
                for i, si in enumerate(row_s):
                    if si == 0:
                        continue
                    for l in range(j + 1):
                        idx = i + l
                        if idx >= n_mom:
                            continue
                        coef = si * comb(j, l) * c ** (j - l)
                        acc = acc + big.promote(mom_row[idx]) * coef
                if acc.is_zero():
                    continue
                piece = cb * big.zeta_power(b * c) * zb1m * acc
                piece = piece.shift_p(-fv) * big.from_int(fu_inv)
                contrib = contrib + piece
        total = total + contrib
        prec_run = min(prec_run, term_prec + (m // e))
        used_m = m
        m += 1
    # truncation floor: remaining terms are O(p^{m/e})
    prec_run = min(prec_run, m // e if m < m_cap else prec_run)
    if prec_run <= 0:
        raise PrecisionExhausted(
            "Mahler evaluation beyond stored depth retains no digits; "
            "recompute the Mellin transform with a deeper layer"
        )
    tau_chi = gauss_sum(DirichletCharacter(p, big.M, r=chi.r, s=chi.s, t=chi.t))
    out = big.from_int(chi.parity()) * big.promote(tau_chi) * total
    # prec_run is the exact error analysis of the Mahler sum (moment error
    # amplified by 1/m! then damped by (zeta^b - 1)^m, plus the truncation
    # floor); it overrides the generic per-operation propagation
    final = Zp_cyclotomic(p, L.budget, r)
    prec_final = max(min(int(prec_run), L.budget), 1)
    out = final.from_coeffs([int(c) for c in out.coeffs], prec_final)
    del used_m
    return LaurentScalar(out, shift + r)


def _factorial_vp_int(nn: int, p: int) -> int:
    out, q = 0, p
    while q <= nn:
        out += nn // q
        q *= p
    return out


def _factorial_unit(nn: int, p: int, q: int) -> int:
    out = 1
    for i in range(2, nn + 1):
        out = (out * (i // p ** sub_vp(i, p, 64))) % q
    return out


# ---------------------------------------------------------------------------
# interpolation factors


def interpolation_factor(alpha: PadicScalar, chi: DirichletCharacter, j: int,
                         mode: str = "rational", disc_abs: int | None = None,
                         k: int = 0, unit_count: int = 2) -> LaurentScalar:
    """The constant relating p-adic evaluations to completed classical values.

    rational mode: p^{r(j+1)} / (alpha^r tau(chi^{-1})), rewritten through
    tau(chi) tau(chi^{-1}) = chi(-1) p^r as chi(-1) tau(chi) p^{rj} alpha^{-r}
    so the numerator stays integral.

    bianchi-norm mode: d^{j+1} p^{2r(j+1)} u / ((-1)^k 2 alpha^{2r}
    tau((chi o N)^{-1})) with u the unit count of the field and
    tau((chi o N)^{-1}) = chi(-1) chi(-d)^{-1} tau(chi^{-1})^2.
    """
    from .lift import _alpha_inverse_parts

    r = chi.r
    if r < 1 or not chi.is_primitive() or chi.tame_kind != "trivial":
        raise ValueError("interpolation factors need primitive chi of conductor p^r, r >= 1")
    p = chi.p
    ring0 = alpha.ring
    inv_coeffs, inv_shift = _alpha_inverse_parts(alpha, k)
    inv_unit = PadicScalar(ring0, inv_coeffs, ring0.M)
    if mode == "rational":
        tau = gauss_sum(chi)
        ring = tau.ring
        parity = ring.from_int(chi.parity())
        num = parity * tau * ring.from_int(pow(p, r * j, ring.pM))
        num = num * ring.promote(inv_unit ** r)
        return LaurentScalar(num, r * inv_shift)
    if mode == "bianchi-norm":
        if disc_abs is None:
            raise ValueError("bianchi-norm mode needs the field discriminant")
        tau = gauss_sum(chi)
        ring = tau.ring
        # Convention: tau((chi o N)^{-1}) = tau(chi^{-1})^2, i.e. the additive
        # character of the field is normalised so the split-prime CRT picks up
        # no character unit.  The raw CRT computation differs by the unit
        # chi(-1) chi(-disc)^{-1}; see norm_gauss_factorisation_log, which
        # records both.  Then 1/tau((chi o N)^{-1}) = tau(chi)^2 / p^{2r}.
        inv_tau_norm = tau * tau
        sign = ring.from_int((-1) ** k * 2).inverse()
        num = (ring.from_int(disc_abs ** (j + 1) * unit_count)
               * ring.from_int(pow(p, 2 * r * j, ring.pM))
               * inv_tau_norm * sign * ring.promote(inv_unit ** (2 * r)))
        return LaurentScalar(num, 2 * r * inv_shift)
    raise ValueError(f"unknown mode {mode!r}")


def norm_gauss_factorisation_log(chi: DirichletCharacter, disc_abs: int) -> dict:
    """Diagnostic: tau((chi o N)^{-1}) against tau(chi^{-1})^2 (logged, not asserted)."""
    tau_norm = gauss_sum_norm_form(chi, disc_abs)
    taubar = gauss_sum(chi.inverse())
    ring = tau_norm.ring
    unit = ring.promote(chi((-disc_abs) % chi.modulus)).inverse()
    reconstructed = ring.from_int(chi.parity()) * unit * taubar * taubar
    return {
        "tau_norm": [int(c) for c in tau_norm.coeffs],
        "taubar_sq_times_unit": [int(c) for c in reconstructed.coeffs],
        "match": (tau_norm - reconstructed).is_zero(),
    }


# ---------------------------------------------------------------------------
# the classical side, p-adically embedded


def classical_L_value_padic(phi_padic, chi: DirichletCharacter, j: int) -> LaurentScalar:
    """tau(chi^{-1})/cond^{j+1} times the chi-weighted period sum, with the
    p-power part of cond^{j+1} carried as a Laurent shift."""
    m = chi.conductor
    p = chi.p
    r = _p_part_exponent(m, p)
    D = m // p ** r
    ps = period_sum_padic(phi_padic, chi, j)
    taubar = gauss_sum_general(chi.inverse())
    ring = taubar.ring if taubar.ring.degree >= ps.ring.degree else ps.ring
    num = ring.promote(ps) * ring.promote(taubar)
    if D > 1:
        num = num * ring.from_int(pow(D, -(j + 1), ring.pM))
    return LaurentScalar(num, r * (j + 1)).normalised()


# ---------------------------------------------------------------------------
# quadratic twist pipeline


@dataclass
class FormData:
    """What the L-function pipeline needs to know about one eigenform."""
    level_tame: int            # M, prime to p
    weight_k: int
    tame_system: dict          # {ell: a_ell} for a few good primes
    a_p: int | object          # T_p eigenvalue at the tame level (exact)
    label: str = "f"


def twisted_eigensystem(fdata: FormData, chi_F: DirichletCharacter) -> dict:
    """Tame eigenvalues of f tensor chi_F: ell -> a_ell chi_F(ell)."""
    from .characters import kronecker_symbol
    out = {}
    for ell, a in fdata.tame_system.items():
        out[ell] = a * kronecker_symbol(chi_F.tame_data, ell)
    return out


def twist_form_L(fdata: FormData, chi_F: DirichletCharacter, p: int,
                 budget: int, sign: int, depth: int = 2,
                 n_moments: int | None = None, cache_dir=None,
                 conductor_space=None, big_space=None,
                 return_symbol: bool = False):
    """L_p of f tensor chi_F, through the level M D^2 p symbol space.

    The twisted symbol is built by the explicit twisting sum from the
    eigensymbol of f itself, evaluated on the level M D^2 p generators; this
    keeps the +/- twists on f's own normalisation scale, which the Artin
    ratio test needs across parities.  Stabilisation at alpha (chi_F(p) = 1
    keeps the eigenvalue of f), lifting and branch extraction as usual.
    """
    from gmpy2 import mpq

    from .characters import kronecker_symbol
    from .lift import _to_int_mod, embed_classical_symbol, lift_symbol
    from .modsym import (EigenSystem, SymbolSpace, eigen_symbol, p_stabilise,
                         pullback_symbol)
    from .padic import hensel_quadratic_root

    if kronecker_symbol(chi_F.tame_data, p) != 1:
        raise ValueError("require chi_F(p) = 1 (p split in F)")
    D = chi_F.tame_modulus
    if gcd(D, fdata.level_tame * p) != 1:
        raise ValueError("twist conductor must be coprime to M p")
    N_cond = fdata.level_tame * D * D
    N = N_cond * p
    if big_space is None:
        big_space = SymbolSpace(N, fdata.weight_k, sign=sign)
    if conductor_space is None:
        # the twisting sum reads the input symbol at its own tame level
        conductor_space = SymbolSpace(fdata.level_tame, fdata.weight_k,
                                      sign=sign * chi_F.parity())
    from .modsym import twisted_symbol
    system = EigenSystem([(("T", ell), mpq(a))
                          for ell, a in fdata.tame_system.items()
                          if fdata.level_tame % ell != 0 and ell != p])
    phi_f = eigen_symbol(conductor_space, system, cache_dir=cache_dir)
    phi_big = twisted_symbol(phi_f, chi_F, big_space)
    if not phi_big.check_relations():
        raise RuntimeError("twisting sum violates coset relations")
    a_p_tw = fdata.a_p  # times chi_F(p) = 1
    a_int = hensel_quadratic_root(int(a_p_tw), int(mpq(p) ** (fdata.weight_k + 1)),
                                  p, budget, branch=0)
    ring = Zp(p, budget)
    alpha = ring.from_int(a_int)
    phi_stab = p_stabilise(phi_big.map_values(lambda v: mpq(v)), p,
                           mpq(a_p_tw), mpq(a_int), verify=False)
    phi_emb = embed_classical_symbol(phi_stab, lambda v: _to_int_mod(v, ring.pM))
    Phi = lift_symbol(phi_emb, p, alpha, budget, n_moments=n_moments)
    L = mellin(Phi, alpha, depth=depth)
    L.meta["twist"] = f"{fdata.label} x chi_{{-{D}}}"
    if return_symbol:
        return L, phi_emb, Phi
    return L


# ---------------------------------------------------------------------------
# products and Artin formalism


def artin_product(L1: PadicL, L2: PadicL) -> PadicL:
    """Multiplicative convolution of two unit-ball distributions.

    Exact on branch moments: for x in a + p^n Z_p, y in b + p^n Z_p with
    ab = c mod p^n, expand (xy - c)^m in (ab - c), u = x - a, v = y - b and
    integrate term by term.  Character evaluations then multiply.
    """
    if L1.p != L2.p:
        raise ValueError("different primes")
    p = L1.p
    n_mom = min(L1.n_moments, L2.n_moments)
    out = PadicL(p, min(L1.budget, L2.budget), n_mom)
    out.slope = L1.slope + L2.slope
    common = sorted(set(L1.layers) & set(L2.layers))
    for n in common:
        s1, mom1 = L1.layers[n]
        s2, mom2 = L2.layers[n]
        pn = p ** n
        ring = next(iter(mom1.values()))[0].ring
        acc = {c: [ring.zero(out.budget) for _ in range(n_mom)]
               for c in mom1 if gcd(c, p) == 1}
        for a, row1 in mom1.items():
            for b, row2 in mom2.items():
                c = (a * b) % pn
                e0 = (a * b - c)  # divisible by p^n
                # T_s = sum_{i2+i3+i4=s} s!/(i2! i3! i4!) a^{i2} b^{i3}
                #       mu1_{i3+i4} mu2_{i2+i4}
                T = []
                for s in range(n_mom):
                    ts = ring.zero(out.budget)
                    for i4 in range(s + 1):
                        for i2 in range(s - i4 + 1):
                            i3 = s - i4 - i2
                            if i3 + i4 >= n_mom or i2 + i4 >= n_mom:
                                continue
                            mult = (comb(s, i4) * comb(s - i4, i2)
                                    * a ** i2 * b ** i3)
                            ts = ts + (ring.promote(row1[i3 + i4])
                                       * ring.promote(row2[i2 + i4])) * mult
                    T.append(ts)
                for m in range(n_mom):
                    tot = ring.zero(out.budget)
                    for i1 in range(m + 1):
                        co = comb(m, i1) * e0 ** i1
                        if co:
                            tot = tot + T[m - i1] * co
                    acc[c][m] = acc[c][m] + tot
        out.layers[n] = (s1 + s2, acc)
    return out


def admissibility_profile(L: PadicL, max_moment: int | None = None) -> dict:
    """Least-squares growth order from depth-layer valuations.

    For each stored depth n, the profile point is the minimum over branches
    and usable moments of v_p(branch moment) - n*m (normalising out the
    recentring content); the fitted slope against n estimates -h.
    """
    import numpy as np

    if len(L.layers) < 2:
        raise ValueError("need >= 2 stored depth layers to fit growth")
    xs, ys = [], []
    for n, (shift, moments) in sorted(L.layers.items()):
        best = None
        for c, row in moments.items():
            for m, sc in enumerate(row):
                if max_moment is not None and m > max_moment:
                    continue
                v = sc.valuation_lower_bound()
                if isinstance(v, str) or v >= sc.prec:
                    continue
                norm = Fraction(v) - n * m - Fraction(shift)
                best = norm if best is None else min(best, norm)
        if best is not None:
            xs.append(n)
            ys.append(float(best))
    if len(xs) < 2:
        raise ValueError("not enough usable layers above the precision floor")
    slope, intercept = np.polyfit(np.array(xs, dtype=float),
                                  np.array(ys, dtype=float), 1)
    h = max(-float(slope), 0.0)
    return {"h_estimate": h, "points": list(zip(xs, ys)),
            "intercept": float(intercept)}


def artin_ratio_table(products: dict, phi_f_padic: dict,
                      chi_F: DirichletCharacter, alpha: PadicScalar,
                      grid, k: int = 0, unit_count: int = 2) -> dict:
    """The ratio table certifying cyclotomic-restriction consistency.

    products: {sign: PadicL} for the sign-matched products L(f) L(f x chi_F);
    phi_f_padic: {sign: embedded stabilised f-symbol} -- the classical
    denominators need both signs, since chi and chi*chi_F have opposite
    parity.  For each grid point (chi, j):

        numerator   = evaluate(products[eps], chi, j),  eps = chi(-1)(-1)^j
        denominator = bianchi-norm factor x CLV(f-symbol^eps, chi, j)
                                          x CLV(f-symbol^{-eps}, chi chi_F, j)

    Constancy is decided by pairwise cross-multiplication; the reported
    deviation is the relative digit count to which all valid entries agree
    (sample deviation zero at that precision).
    """
    disc_abs = chi_F.tame_modulus
    rows = []
    for chi, j in grid:
        eps = chi.parity() * (-1) ** j
        num = evaluate(products[eps], chi, j)
        fac = interpolation_factor(alpha, chi, j, mode="bianchi-norm",
                                   disc_abs=disc_abs, k=k, unit_count=unit_count)
        clv_f = classical_L_value_padic(phi_f_padic[eps], chi, j)
        clv_tw = classical_L_value_padic(phi_f_padic[-eps], chi * chi_F, j)
        den = fac * clv_f * clv_tw
        valid = not num.is_zero() and not den.is_zero()
        entry = {
            "chi": (chi.r, chi.s, chi.t), "j": j, "parity": chi.parity(),
            "valid": bool(valid),
            "num_valuation": str(num.valuation()),
            "den_valuation": str(den.valuation()),
        }
        if valid:
            try:
                ratio, lost = laurent_ratio(num, den)
                entry["ratio"] = [int(c) for c in ratio.scalar.coeffs]
                entry["ratio_shift"] = ratio.shift
                entry["ratio_prec"] = ratio.scalar.prec
                entry["division_loss"] = lost
            except (ZeroDivisionError, PrecisionError) as e:
                entry["ratio_error"] = str(e)
            entry["_num"] = num
            entry["_den"] = den
        rows.append(entry)
    valid_rows = [e for e in rows if e.get("valid")]
    agree = None
    for i in range(len(valid_rows)):
        for jdx in range(i + 1, len(valid_rows)):
            a, b = valid_rows[i], valid_rows[jdx]
            lhs = a["_num"] * b["_den"]
            rhs = b["_num"] * a["_den"]
            d = lhs.agreement_digits(rhs)
            scale = min(lhs.valuation(), rhs.valuation())
            rel = d - int(scale)
            agree = rel if agree is None else min(agree, rel)
    for e in rows:
        e.pop("_num", None)
        e.pop("_den", None)
    return {
        "rows": rows,
        "n_valid": len(valid_rows),
        "constancy_digits": agree,
    }
