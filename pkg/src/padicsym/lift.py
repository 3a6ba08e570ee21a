"""Overconvergent lifting: distribution-valued symbols and the U_p iteration.

A classical eigensymbol with small slope has a unique eigenlift to
distribution coefficients.  The algorithm here is the standard one: extend the
classical values by zero moments, then iterate alpha^{-1} U_p.  Each sweep
both repairs the coset relations one filtration step at a time and contracts
towards the eigenlift; the ledger records the exact cost.

The bulk operator caches, per (space, operator, weight), the full list of
(source generator, target generator, action matrix) triples as stacked numpy
tensors, so one U_p sweep is a single batched matmul.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from gmpy2 import mpq

from . import linalg
from .dist import (
    ActionMatrix,
    CoeffSpec,
    FiniteDist,
    WeightChar,
    action_matrix,
    canonical_filtration,
    family_specialise,
    filtration_level,
)
from .exactfield import NFElem
from .modsym import ClassicalSymbol, SymbolSpace, weight_action_matrix
from .padic import PadicScalar, sub_vp


# ---------------------------------------------------------------------------
# bulk operators


class BulkOp:
    """A data-level operator on (ngens, n_moments, width) moment tensors."""

    def __init__(self, space: SymbolSpace, label, spec: CoeffSpec,
                 weight: WeightChar, n_moments: int):
        self.space = space
        self.spec = spec
        self.weight = weight
        self.n_moments = n_moments
        table = space.op_table(label)
        mats, src, dst = [], [], []
        for i, entries in enumerate(table):
            for j, gamma in entries:
                mats.append(action_matrix(gamma, weight, n_moments, spec))
                src.append(j)
                dst.append(i)
        self.blocks = np.stack([m.blocks for m in mats])  # (t, n_w, mom, mom)
        self.src = np.array(src, dtype=np.int64)
        self.dst = np.array(dst, dtype=np.int64)
        self.val = np.min(np.stack([m.val for m in mats]), axis=0)
        self._mat_objs = mats

    def apply(self, moments: np.ndarray) -> np.ndarray:
        """moments: (ngens, n_moments, width) -> same shape."""
        pM = self.spec.pM
        out = np.zeros_like(moments)
        n_w = self.weight.n if self.weight.is_family else 1
        gathered = moments[self.src]  # (t, mom, width)
        if n_w == 1:
            contrib = np.matmul(self.blocks[:, 0], gathered) % pM
            np.add.at(out, self.dst, contrib)
        else:
            # width == n_w: w-graded convolution of blocks with moment columns
            contrib = np.zeros_like(gathered)
            for w1 in range(n_w):
                blk = self.blocks[:, w1]
                part = np.matmul(blk, gathered) % pM
                for w2 in range(n_w - w1):
                    contrib[:, :, w1 + w2] += part[:, :, w2]
            contrib %= pM
            np.add.at(out, self.dst, contrib)
        return out % pM

    def propagate_prec(self, prec, tail_val: int = 0):
        n = self.n_moments
        padded = prec[None, :] + self.val
        tracked = padded.min(axis=1)
        tail = (n - np.arange(n, dtype=np.int64)) + tail_val
        return np.minimum(np.minimum(tracked, tail), self.spec.M)


_bulk_cache: dict = {}


def bulk_op(space, label, spec, weight, n_moments) -> BulkOp:
    key = (id(space), repr(label), spec, weight, n_moments)
    if key not in _bulk_cache:
        _bulk_cache[key] = BulkOp(space, label, spec, weight, n_moments)
    return _bulk_cache[key]


# ---------------------------------------------------------------------------
# ledger


@dataclass
class LiftLedger:
    """Exact precision accounting for one lift."""
    p: int
    budget: int
    n_moments: int
    slope_num: int = 0        # valuation of alpha in units of 1/slope_den
    slope_den: int = 1
    shift: int = 0            # global p-power factored out of the moments
    iterations: int = 0
    converged: bool = False
    defect_history: list = field(default_factory=list)
    events: list = field(default_factory=list)

    @property
    def slope(self) -> Fraction:
        return Fraction(self.slope_num, self.slope_den)

    def effective_prec(self, prec) -> int:
        """Uniform absolute precision of the bottom moment block."""
        return int(min(int(prec[0]), self.budget)) - self.shift

    def floor(self, prec) -> int:
        """Filtration floor: min_j prec[j] + j (the detectability limit)."""
        return int(min(int(prec[j]) + j for j in range(len(prec))))

    def note(self, msg: str):
        self.events.append(msg)

    def to_dict(self):
        return {
            "p": self.p, "budget": self.budget, "n_moments": self.n_moments,
            "slope": [self.slope_num, self.slope_den], "shift": self.shift,
            "iterations": self.iterations, "converged": self.converged,
            "defect_history": self.defect_history, "events": self.events,
        }


# ---------------------------------------------------------------------------
# the symbol


class OvcSymbol:
    """Distribution-valued symbol: one moment vector per coset generator."""

    def __init__(self, space: SymbolSpace, spec: CoeffSpec, weight: WeightChar,
                 moments: np.ndarray, prec, ledger: LiftLedger,
                 eigenvalue=None, tail_val: int = 0):
        self.space = space
        self.spec = spec
        self.weight = weight
        self.moments = moments % spec.pM
        self.prec = np.asarray(prec, dtype=np.int64)
        self.ledger = ledger
        self.eigenvalue = eigenvalue  # scalar coeff tuple, or w-poly for families
        self.tail_val = tail_val

    @property
    def n_moments(self):
        return self.moments.shape[1]

    def generator_dist(self, i: int) -> FiniteDist:
        return FiniteDist(self.spec, self.weight, self.moments[i].copy(),
                          self.prec.copy(), tail_val=self.tail_val)

    def value_on_path(self, x, y) -> FiniteDist:
        """Symbol value on {x -> y} as a FiniteDist."""
        from .dist import act
        acc = None
        for j, delta in self.space.cosets.decompose_divisor(x, y):
            from .manin import mat_inv2_unimodular
            piece = act(mat_inv2_unimodular(delta), self.generator_dist(j))
            acc = piece if acc is None else acc.add(piece)
        if acc is None:
            width = self.moments.shape[2]
            acc = FiniteDist(self.spec, self.weight,
                             np.zeros((self.n_moments, width), dtype=np.int64),
                             np.full(self.n_moments, self.spec.M), self.tail_val)
        return acc

    def specialise_weight(self, k_target: int) -> "OvcSymbol":
        """Reduce a family symbol at an accessible classical weight."""
        if not self.weight.is_family:
            raise ValueError("already a single-weight symbol")
        out = np.zeros((self.moments.shape[0], self.n_moments, 1), dtype=np.int64)
        prec = None
        for i in range(self.moments.shape[0]):
            d = family_specialise(self.generator_dist(i), k_target)
            out[i, :, 0] = d.moments[:, 0]
            prec = d.prec if prec is None else np.minimum(prec, d.prec)
        led = LiftLedger(self.spec.p, self.spec.M, self.n_moments)
        led.shift = self.ledger.shift
        led.note(f"specialised from family at weight {k_target}")
        ev = None
        if self.eigenvalue is not None:
            from .dist import family_specialise_scalar
            w_val = self.weight.w_value_for_weight(k_target, self.spec)
            v, _ = family_specialise_scalar(
                list(self.eigenvalue), w_val, self.spec,
                self.weight.n, self.spec.M)
            ev = (v,)
        return OvcSymbol(self.space, self.spec, WeightChar(k_target, 1),
                         out, prec, led, eigenvalue=ev, tail_val=self.tail_val)

    def relation_defect(self) -> int:
        """Filtration level of the worst coset-relation residual."""
        return _relation_defect(self.space, self.spec, self.weight,
                                self.moments, self.prec, self.tail_val)

    def classical_bottom(self) -> list:
        """Moments 0..k on every generator (the rho-image data)."""
        k = self.space.k
        return [[self.generator_dist(i).moment(j) for j in range(k + 1)]
                for i in range(self.moments.shape[0])]


def _relation_defect(space, spec, weight, moments, prec, tail_val) -> int:
    from .dist import act
    worst = None
    for terms in space.relation_terms:
        acc = None
        for j, gamma, scale in terms:
            mu = FiniteDist(spec, weight, moments[j].copy(), prec.copy(),
                            tail_val=tail_val)
            piece = act(gamma, mu)
            if scale != 1:
                piece = FiniteDist(spec, weight,
                                   (piece.moments * scale) % spec.pM,
                                   piece.prec, tail_val=piece.tail_val)
            acc = piece if acc is None else acc.add(piece)
        lev = acc.filtration_level()
        worst = lev if worst is None else min(worst, lev)
    return worst if worst is not None else 0


# ---------------------------------------------------------------------------
# scalar helpers for the iteration


def _coeff_mul_bulk(arr, coeffs, spec: CoeffSpec):
    """Multiply every moment by a ring scalar (width-compatible)."""
    pM = spec.pM
    if spec.kind == "zp":
        return (arr * (coeffs[0] % pM)) % pM
    c0, c1 = coeffs[0] % pM, coeffs[1] % pM
    t, n = spec.quad_trace, spec.quad_norm
    x0, x1 = arr[..., 0], arr[..., 1]
    out = np.empty_like(arr)
    out[..., 0] = (x0 * c0 - n * x1 * c1) % pM
    out[..., 1] = (x0 * c1 + x1 * c0 + t * x1 * c1) % pM
    return out


def _family_scalar_mul_bulk(arr, poly, spec: CoeffSpec):
    """Multiply (..., n_w) moment tensors by a w-truncated scalar."""
    pM = spec.pM
    n = arr.shape[-1]
    out = np.zeros_like(arr)
    for w1, c in enumerate(poly[:n]):
        if c % pM == 0:
            continue
        for w2 in range(n - w1):
            out[..., w1 + w2] += (arr[..., w2] * (c % pM)) % pM
    return out % pM


def _min_valuation(arr, prec, spec) -> int:
    p = spec.p
    best = None
    n = arr.shape[1]
    for j in range(n):
        pj = max(int(prec[j]), 0)
        block = arr[:, j] % (p ** pj)
        nz = block[block != 0]
        if nz.size == 0:
            v = pj
        else:
            v = min(sub_vp(int(c), p, pj) for c in np.unique(nz))
        best = v if best is None else min(best, v)
    return best if best is not None else 0


class SlopeError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


def _alpha_inverse_parts(alpha: PadicScalar, k: int):
    """(coeffs to multiply by, p-shift) with alpha^{-1} = coeffs * p^{-shift}.

    Unit alpha inverts exactly; an Eisenstein quadratic root alpha inverts as
    conj(alpha)/p^(k+1); a split root of positive integer valuation v inverts
    as unit^{-1} * p^{-v}.
    """
    ring = alpha.ring
    v = alpha.valuation_lower_bound()
    if v == 0:
        return alpha.inverse().coeffs, 0
    if ring.degree == 2 and ring.eisenstein:
        c0, c1 = alpha.coeffs
        t = ring.trace
        conj = ring.from_coeffs(((c0 + c1 * t) % ring.pM, (-c1) % ring.pM))
        norm = alpha * conj
        nval = sub_vp(int(norm.coeffs[0]), ring.p, ring.M)
        unit = norm.shift_p(-nval).inverse()
        return (conj * unit).coeffs, nval
    vint = int(v)
    unit = alpha.shift_p(-vint).inverse()
    return unit.coeffs, vint


def lift_symbol(phi: ClassicalSymbol, p: int, alpha: PadicScalar,
                budget: int, n_moments: int | None = None,
                weight: WeightChar | None = None,
                initial_noise: np.ndarray | None = None,
                max_iter: int | None = None) -> OvcSymbol:
    """Eigenlift of a U_p-eigensymbol to distribution coefficients.

    phi must take integer values (content-normalised and, if its eigenvalue
    lives in an extension, already embedded: pass values as plain ints via
    embed_classical_symbol).  alpha is the U_p-eigenvalue as a PadicScalar;
    its ring decides the coefficient spec.  The slope hypothesis
    v_p(alpha) < k + 1 is enforced.
    """
    space = phi.space
    k = space.k
    if space.N % p != 0:
        raise ValueError("lifting needs p | N")
    slope = alpha.valuation_lower_bound()
    if slope >= k + 1:
        raise SlopeError(f"slope {slope} is not small (needs < {k + 1})")
    ring = alpha.ring
    if ring.degree == 2:
        spec = CoeffSpec(p, budget, "quad", ring.trace, ring.norm)
    else:
        spec = CoeffSpec(p, budget)
    spec.check_cap()
    if n_moments is None:
        n_moments = budget
    if weight is None:
        weight = WeightChar(k, 1)
    n_w = weight.n if weight.is_family else 1
    width = n_w if weight.is_family else spec.width

    ledger = LiftLedger(p, budget, n_moments)
    fr = Fraction(slope)
    ledger.slope_num, ledger.slope_den = fr.numerator, fr.denominator

    # naive lift: bottom moments from phi, zeros (or supplied noise) above
    ngens = space.ngens
    moments = np.zeros((ngens, n_moments, width), dtype=np.int64)
    for i in range(ngens):
        for j in range(k + 1):
            moments[i, j, 0] = _to_int_mod(phi.values[i][j], spec.pM)
    if initial_noise is not None:
        noise = np.asarray(initial_noise, dtype=np.int64) % spec.pM
        moments[:, k + 1:, :] = noise[:, k + 1:, :]
        ledger.note("initial lift carries caller-supplied high moments")
    prec = canonical_filtration(budget, n_moments)

    op = bulk_op(space, ("U", p), spec, weight, n_moments)
    inv_coeffs, inv_shift = _alpha_inverse_parts(alpha, k)
    if weight.is_family:
        alpha_poly = [int(alpha.coeffs[0])] + [0] * (n_w - 1)
        inv_poly = _family_poly_inverse(alpha_poly, spec, n_w)
    if max_iter is None:
        max_iter = 2 * budget + 4

    tail_val = 0
    floor_reached = False
    for it in range(max_iter):
        image = op.apply(moments)
        new_prec = op.propagate_prec(prec, tail_val)
        # defect before rescaling: U_p Psi - alpha Psi
        if weight.is_family:
            defect = (image - _family_scalar_mul_bulk(moments, alpha_poly, spec)) % spec.pM
        else:
            defect = (image - _coeff_mul_bulk(moments, alpha.coeffs, spec)) % spec.pM
        dlev = _fil_level_bulk(defect, np.minimum(prec, new_prec), spec)
        ledger.defect_history.append(dlev)
        floor = ledger.floor(np.minimum(prec, new_prec))
        # advance: Psi <- alpha^{-1} (Psi | U_p)
        if weight.is_family:
            moments = _family_scalar_mul_bulk(image, inv_poly, spec)
        else:
            moments = _coeff_mul_bulk(image, inv_coeffs, spec)
        prec = new_prec
        if inv_shift:
            # divide by p^shift: factor the guaranteed divisibility out of the
            # U_p image (its moment j gained >= j); remainder hits precision
            moments, prec, lost = _shift_down(moments, prec, inv_shift, spec)
            tail_val = tail_val - inv_shift
            if lost:
                ledger.note(f"iteration {it}: {lost} digits to alpha^-1")
        ledger.iterations = it + 1
        if dlev >= floor:
            floor_reached = True
            break
    ledger.converged = floor_reached
    if not floor_reached:
        raise ConvergenceError(
            f"U_p iteration did not reach the ledger floor in {max_iter} steps; "
            "alpha is likely not the eigenvalue of this symbol"
        )
    ev = tuple(int(c) for c in alpha.coeffs) if not weight.is_family else tuple(alpha_poly)
    return OvcSymbol(space, spec, weight, moments, prec, ledger,
                     eigenvalue=ev, tail_val=tail_val)


def _family_poly_inverse(poly, spec, n):
    q = spec.pM
    inv0 = pow(poly[0], -1, q)
    out = [inv0] + [0] * (n - 1)
    for m in range(1, n):
        acc = 0
        for i in range(1, m + 1):
            if i < len(poly):
                acc = (acc + poly[i] * out[m - i]) % q
        out[m] = (-inv0 * acc) % q
    return out


def _shift_down(moments, prec, shift, spec):
    p = spec.p
    ps = p ** shift
    lost = 0
    exact = np.all(moments % ps == 0)
    if exact:
        return (moments // ps) % spec.pM, np.maximum(prec - shift, 0), 0
    # not exactly divisible: the inexact part is below working precision
    out = moments // ps
    return out % spec.pM, np.maximum(prec - shift, 0), shift


def _fil_level_bulk(arr, prec, spec) -> int:
    best = None
    n = arr.shape[1]
    p = spec.p
    for j in range(n):
        pj = max(int(prec[j]), 0)
        block = arr[:, j] % (p ** pj)
        nz = block[block != 0]
        v = pj if nz.size == 0 else min(sub_vp(int(c), p, pj) for c in np.unique(nz))
        cand = v + j
        best = cand if best is None else min(best, cand)
    return best if best is not None else 0


def embed_classical_symbol(phi: ClassicalSymbol, embed_fn) -> ClassicalSymbol:
    """Map a symbol's exact values into integers mod p^M via embed_fn."""
    return phi.map_values(embed_fn)


def _to_int_mod(v, pM: int) -> int:
    """Exact reduction of an integer or p-unit-denominator rational mod p^M."""
    if isinstance(v, int):
        return v % pM
    q = mpq(v)
    num, den = int(q.numerator), int(q.denominator)
    if den == 1:
        return num % pM
    return (num * pow(den, -1, pM)) % pM


def up_defect_level(Phi: OvcSymbol) -> int:
    """Filtration level of U_p Phi - alpha Phi (ledger-floor means converged)."""
    space, spec, weight = Phi.space, Phi.spec, Phi.weight
    p = spec.p
    op = bulk_op(space, ("U", p), spec, weight, Phi.n_moments)
    image = op.apply(Phi.moments)
    if weight.is_family:
        scaled = _family_scalar_mul_bulk(Phi.moments, list(Phi.eigenvalue), spec)
    else:
        scaled = _coeff_mul_bulk(Phi.moments, Phi.eigenvalue, spec)
    defect = (image - scaled) % spec.pM
    prec = np.minimum(Phi.prec, op.propagate_prec(Phi.prec, Phi.tail_val))
    return _fil_level_bulk(defect, prec, spec)


def agreement_level(a: OvcSymbol, b: OvcSymbol) -> int:
    """Filtration level at which two symbols agree (uniqueness checks)."""
    prec = np.minimum(a.prec, b.prec)
    diff = (a.moments - b.moments) % a.spec.pM
    return _fil_level_bulk(diff, prec, a.spec)


# ---------------------------------------------------------------------------
# family lifting


def strip_p_content(phi: ClassicalSymbol, p: int):
    """Divide a symbol with exact rational values by its global p-content.

    Pullbacks and stabilisations can pick up a uniform p-power; stripping it
    before embedding keeps unit references available at full precision.
    Must be called on exact values (it divides exactly).
    """
    v0 = None
    for row in phi.values:
        for v in row:
            q = mpq(v)
            if q == 0:
                continue
            vv = (sub_vp(abs(int(q.numerator)), p, 512)
                  - sub_vp(int(q.denominator), p, 512))
            v0 = vv if v0 is None else min(v0, vv)
    if not v0 or v0 <= 0:
        return phi, 0
    scale = mpq(1, p ** v0)
    return phi.map_values(lambda v: mpq(v) * scale), v0


def tame_block_projector(space, label, eigenvalue, p: int, M: int,
                         cache_dir=None):
    """Coefficients of the polynomial in T_label projecting onto the tame
    eigenblock of the given exact eigenvalue.

    Deflates (X - a)^mult out of the exact characteristic polynomial; the
    cofactor, normalised by its (p-unit) value at a, annihilates every other
    tame block while fixing ours.  Needed because the family iteration is
    only a contraction after the non-congruent ordinary directions are
    projected away.
    """
    from . import linalg
    mat = space.hecke_matrix(label, cache_dir=cache_dir)
    cp = linalg.charpoly(mat)
    a = mpq(eigenvalue)
    cof = list(cp)
    while True:
        quo, rem = _poly_divmod_linear(cof, a)
        if rem != 0:
            break
        cof = quo
    # value of the cofactor at a
    val = mpq(0)
    for c in reversed(cof):
        val = val * a + c
    q = p ** M
    den = int(val.denominator)
    num = int(val.numerator)
    v_val = (sub_vp(abs(num), p, M) if num else M) - sub_vp(den, p, M)
    if v_val > 0:
        raise ValueError(
            f"another tame system collides with {eigenvalue} mod p; "
            "projector is not a p-unit")
    inv = pow(num * pow(den, -1, q) % q, -1, q)
    coeffs = []
    for c in cof:
        cd = int(mpq(c).denominator)
        cn = int(mpq(c).numerator)
        coeffs.append(cn * pow(cd, -1, q) * inv % q)
    return coeffs  # ascending in T


def _poly_divmod_linear(poly, a):
    """Divide by (X - a): (quotient, remainder)."""
    quo = [mpq(0)] * (len(poly) - 1)
    acc = mpq(0)
    for i in range(len(poly) - 1, 0, -1):
        acc = poly[i] + (acc * a if i < len(poly) - 1 else mpq(0))
        quo[i - 1] = acc
    rem = poly[0] + acc * a
    return quo, rem


def family_lift(phi: ClassicalSymbol, p: int, alpha: PadicScalar, budget: int,
                order: int, n_moments: int | None = None,
                max_iter: int | None = None,
                tame_projector: tuple | None = None,
                cache_dir=None) -> OvcSymbol:
    """Lift into the weight disc: coefficients in Z/p^M[w]/(w^order).

    Starts from the single-weight eigenlift placed in the w^0 layer and
    iterates the family U_p with a Rayleigh eigenvalue update at a unit
    reference moment.  Other ordinary eigensystems in the space are
    non-contracting directions for the higher w-layers, so a tame projector
    (label, exact eigenvalue on our form) is required whenever the space has
    any: each sweep is composed with the deflated-charpoly projector onto our
    tame block, after which the iteration gains one filtration step per
    sweep as in the single-weight case.
    """
    if alpha.ring.degree != 1:
        raise ValueError("family lifting implemented over Z_p eigenvalues")
    k0 = phi.space.k
    weight = WeightChar(k0, order)
    base = lift_symbol(phi, p, alpha, budget, n_moments=n_moments)
    spec = base.spec
    n_mom = base.n_moments
    ngens = phi.space.ngens
    moments = np.zeros((ngens, n_mom, order), dtype=np.int64)
    moments[:, :, 0] = base.moments[:, :, 0]
    prec = base.prec.copy()
    ledger = LiftLedger(p, budget, n_mom)
    ledger.note(f"family lift at truncation order {order}")

    op = bulk_op(phi.space, ("U", p), spec, weight, n_mom)
    proj = None
    if tame_projector is not None:
        t_label, t_eig = tame_projector
        proj_coeffs = tame_block_projector(phi.space, t_label, t_eig, p, budget,
                                           cache_dir=cache_dir)
        t_op = bulk_op(phi.space, t_label, spec, weight, n_mom)

        def proj(mom):
            out = np.zeros_like(mom)
            cur = mom
            for i, c in enumerate(proj_coeffs):
                if i > 0:
                    cur = t_op.apply(cur)
                if c:
                    out = (out + c * cur) % spec.pM
            return out

        ledger.note(f"tame projector through {t_label} of degree "
                    f"{len(proj_coeffs) - 1}")
    alpha_poly = [int(alpha.coeffs[0])] + [0] * (order - 1)
    ref = None
    for i in range(ngens):
        if moments[i, 0, 0] % p != 0:
            ref = (i, 0)
            break
    if ref is None:
        for i in range(ngens):
            for j in range(n_mom):
                if moments[i, j, 0] % p != 0:
                    ref = (i, j)
                    break
            if ref:
                break
    if ref is None:
        raise ValueError("symbol has no unit moment; strip_p_content first")
    if max_iter is None:
        max_iter = 2 * budget + 6

    q = spec.pM
    for it in range(max_iter):
        image = op.apply(moments)
        if proj is not None:
            image = proj(image)
        new_prec = op.propagate_prec(prec, 0)
        num = [int(c) for c in image[ref[0], ref[1]]]
        den = [int(c) for c in moments[ref[0], ref[1]]]
        alpha_poly = _family_poly_mul(num, _family_poly_inverse(den, spec, order),
                                      q, order)
        inv_poly = _family_poly_inverse(alpha_poly, spec, order)
        defect = (image - _family_scalar_mul_bulk(moments, alpha_poly, spec)) % q
        dlev = _fil_level_bulk(defect, np.minimum(prec, new_prec), spec)
        ledger.defect_history.append(dlev)
        moments = _family_scalar_mul_bulk(image, inv_poly, spec)
        prec = new_prec
        ledger.iterations = it + 1
        floor = ledger.floor(prec)
        if dlev >= floor:
            ledger.converged = True
            break
    if not ledger.converged:
        raise ConvergenceError(
            "family U_p iteration did not converge; if the space has other "
            "ordinary eigensystems, supply tame_projector")
    return OvcSymbol(phi.space, spec, weight, moments, prec, ledger,
                     eigenvalue=tuple(alpha_poly))


def _family_poly_mul(a, b, q, n):
    out = [0] * n
    for i, x in enumerate(a[:n]):
        if x:
            for jj in range(n - i):
                out[i + jj] = (out[i + jj] + x * b[jj]) % q
    return out


# ---------------------------------------------------------------------------
# p-adic eigendata via the ordinary projector


def matrix_mod_q(mat, q: int):
    return [[int(mpq(x).numerator) * pow(int(mpq(x).denominator), -1, q) % q
             for x in row] for row in mat]


def _matmul_q(a, b, q):
    n, m, t = len(a), len(b[0]), len(b)
    out = [[0] * m for _ in range(n)]
    for i in range(n):
        ai = a[i]
        oi = out[i]
        for s in range(t):
            c = ai[s]
            if c:
                bs = b[s]
                for jj in range(m):
                    oi[jj] = (oi[jj] + c * bs[jj]) % q
    return out


def _column_space_mod_q(mat, p, M):
    """Unit-pivot column reduction: basis of the image with unit content."""
    q = p ** M
    cols = [[mat[i][jj] % q for i in range(len(mat))] for jj in range(len(mat[0]))]
    basis = []
    pivots = []
    for col in cols:
        col = list(col)
        for bvec, piv in zip(basis, pivots):
            f = col[piv]
            if f:
                col = [(x - f * y) % q for x, y in zip(col, bvec)]
        unit_rows = [i for i, x in enumerate(col) if x % p != 0]
        if unit_rows:
            piv = unit_rows[0]
            inv = pow(col[piv], -1, q)
            col = [(x * inv) % q for x in col]
            basis.append(col)
            pivots.append(piv)
    return basis, pivots


def _restrict_to_basis_q(mat, basis, pivots, p, M):
    """Coordinates of the operator on the spanned subspace, plus the valuation
    of the worst residual (the subspace need only be preserved mod p^res)."""
    q = p ** M
    n = len(basis)
    out = []
    res_val = M
    for bvec in basis:
        img = [sum(mat[i][jj] * bvec[jj] for jj in range(len(bvec))) % q
               for i in range(len(mat))]
        coords = []
        img = list(img)
        for b2, piv in zip(basis, pivots):
            c = img[piv]
            coords.append(c)
            if c:
                img = [(x - c * y) % q for x, y in zip(img, b2)]
        for x in img:
            if x % q:
                res_val = min(res_val, sub_vp(x % q, p, M))
        out.append(coords)
    return [[out[jj][i] for jj in range(n)] for i in range(n)], res_val


def _charpoly_mod_q(a, q):
    """Division-free characteristic polynomial mod q (Berkowitz)."""
    n = len(a)
    poly = [1]
    for kk in range(1, n + 1):
        akk = a[kk - 1][kk - 1]
        row = [a[kk - 1][jj] for jj in range(kk - 1)]
        col = [a[i][kk - 1] for i in range(kk - 1)]
        sub = [[a[i][jj] for jj in range(kk - 1)] for i in range(kk - 1)]
        c = [1, (-akk) % q]
        v = col
        for _ in range(kk - 1):
            dot = 0
            for x, y in zip(row, v):
                dot = (dot + x * y) % q
            c.append((-dot) % q)
            v = [sum(sub[i][jj] * v[jj] for jj in range(len(v))) % q
                 for i in range(len(sub))]
        newpoly = [0] * (kk + 1)
        for i, pi in enumerate(poly):
            for jj, cj in enumerate(c):
                if i + jj <= kk:
                    newpoly[i + jj] = (newpoly[i + jj] + pi * cj) % q
        poly = newpoly
    return list(reversed(poly))  # ascending


def _hensel_root_near(poly_asc, seed: int, p: int, M: int) -> int:
    """Newton refinement mod p^M of a root congruent to seed mod p.

    Requires the seed to be a simple root mod p, which is what ordinarity
    plus a separating tame eigenvalue provides.
    """
    q = p ** M

    def ev(x, coeffs):
        acc = 0
        for c in reversed(coeffs):
            acc = (acc * x + c) % q
        return acc

    dpoly = [(i * c) % q for i, c in enumerate(poly_asc)][1:]
    if ev(seed % p, [c % p for c in poly_asc]) % p != 0:
        raise ValueError("seed is not a root mod p")
    if ev(seed % p, [c % p for c in dpoly]) % p == 0:
        raise ValueError("seed is a multiple root mod p; separate with another operator")
    x = seed % q
    for _ in range(M.bit_length() + 2):
        x = (x - ev(x, poly_asc) * pow(ev(x, dpoly), -1, q)) % q
    assert ev(x, poly_asc) % q == 0
    return x


def _int_matrix_power(B: np.ndarray, e: int, q: int) -> np.ndarray:
    E = None
    base = B
    while e:
        if e & 1:
            E = base.copy() if E is None else (E @ base) % q
        base = (base @ base) % q
        e >>= 1
    return E


def _factorial_vp(n: int, p: int) -> int:
    out, qq = 0, p
    while qq <= n:
        out += n // qq
        qq *= p
    return out


def data_operator_matrix(space, label, k: int, q: int) -> np.ndarray:
    """The operator on raw per-generator data as one integer matrix mod q.

    Coordinates: generator-major, moment-minor (width k+1).  Integral by
    construction, unlike the free-coordinate quotient matrices.
    """
    width = k + 1
    D = space.ngens * width
    out = np.zeros((D, D), dtype=np.int64)
    for i, entries in enumerate(space.op_table(label)):
        for jj, gamma in entries:
            amat = weight_action_matrix(gamma, k)
            for m in range(width):
                for l in range(width):
                    c = amat[m][l] % q
                    if c:
                        out[i * width + m, jj * width + l] += c
                        out[i * width + m, jj * width + l] %= q
    return out % q


def integral_symbol_basis(space, p: int):
    """p-saturated integer basis of the symbol space inside the data lattice.

    Kernel vectors of the coset relations over Q, cleared to primitive
    integer vectors, then repeatedly saturated at p: any mod-p dependence is
    replaced by its exact combination divided by p.  The result spans the
    symbols over Z_(p), so integral operators stay integral in coordinates.
    """
    from math import gcd as _gcd, lcm as _lcm

    width = space.width
    D = space.ngens * width
    vecs = []
    for v in range(space.dim):
        free_vec = [mpq(0)] * space.dim
        free_vec[v] = mpq(1)
        values = space.embed(free_vec)
        flat = [x for row in values for x in row]
        den = 1
        for x in flat:
            den = _lcm(den, int(mpq(x).denominator))
        ints = [int(mpq(x) * den) for x in flat]
        g = 0
        for x in ints:
            g = _gcd(g, x)
        vecs.append([x // g for x in ints] if g else ints)
    # p-saturation
    while True:
        rows_mod_p = [[x % p for x in v] for v in vecs]
        from .evalpair import _kernel_mod_q
        ker = _kernel_mod_q([[rows_mod_p[jj][i] for jj in range(len(vecs))]
                             for i in range(D)], len(vecs), p, 1)
        if not ker:
            break
        co = ker[0]
        comb = [sum(co[jj] * vecs[jj][i] for jj in range(len(vecs))) for i in range(D)]
        assert all(x % p == 0 for x in comb)
        comb = [x // p for x in comb]
        repl = next(jj for jj, c in enumerate(co) if c % p != 0)
        vecs[repl] = comb
    return vecs


def _hensel_double_root(poly_asc, seed: int, p: int, M: int) -> int:
    """Refine a multiplicity-two root: Newton on the derivative."""
    dpoly = [(i * c) for i, c in enumerate(poly_asc)][1:]
    return _hensel_root_near([c % p ** M for c in dpoly], seed, p, M)


def hensel_sqrt(a: int, p: int, M: int) -> int:
    """Square root of a unit square in Z/p^M (p odd)."""
    q = p ** M
    a %= q
    r = None
    for x in range(1, p):
        if (x * x - a) % p == 0:
            r = x
            break
    if r is None:
        raise ValueError("not a square mod p")
    for _ in range(M.bit_length() + 2):
        r = (r - (r * r - a) * pow(2 * r, -1, q)) % q
    assert (r * r - a) % q == 0
    return r


def ordinary_eigen_branches(space, p: int, M: int, tame_seeds, cache_dir=None):
    """All slope-zero eigenbranches mod p^M in one tame congruence class.

    Cuts the generalised congruence block for the given (label, residue mod p)
    seeds on a p-saturated integral basis of the symbol space, projects onto
    its slope-zero part (the Euler exponent suffices there: the block's U_p
    residues lie in F_p), and splits the resulting small U_p matrix into
    Hensel branches.  Deeply congruent eigensystems are all returned; the
    caller separates them by whatever deeper data it trusts.

    Returns (branches, M_eff), each branch a dict with the symbol (integer
    values mod p^M_eff), its alpha, and its tame eigenvalue readings.
    """
    q = p ** M
    if q * q * (space.ngens * (space.k + 1)) >= (1 << 62):
        raise ValueError("p^M too large for int64 matrices")
    k = space.k
    from .evalpair import _kernel_mod_q

    lat = integral_symbol_basis(space, p)
    n = len(lat)
    D = space.ngens * (k + 1)
    basis_cols, pivots = _column_space_mod_q(
        [[lat[jj][i] % q for jj in range(n)] for i in range(D)], p, M)
    if len(basis_cols) != n:
        raise ValueError("saturated basis is degenerate mod p")

    def restrict_data(label):
        mat = data_operator_matrix(space, label, k, q)
        res, rv = _restrict_to_basis_q(mat.tolist(), basis_cols, pivots, p, M)
        if rv < M:
            raise ValueError("integral operator fails to preserve the symbol lattice")
        return res

    ops = {label: restrict_data(label) for label, _ in tame_seeds}
    U = restrict_data(("U", p))
    # current subspace, as columns in lattice coordinates
    cur_cols = [[1 if i == jj else 0 for i in range(n)] for jj in range(n)]
    cur_piv = list(range(n))
    M_eff = M

    def cut(mat_small, c):
        nonlocal cur_cols, cur_piv, M_eff
        d = len(mat_small)
        sh = [[(mat_small[i][jj] - (c if i == jj else 0)) % q for jj in range(d)]
              for i in range(d)]
        P = sh
        for _ in range(max(M, d).bit_length() + 1):
            P = _matmul_q(P, P, q)
        ker = _kernel_mod_q(P, d, p, M_eff)
        if not ker:
            raise ValueError("empty congruence block; wrong seed")
        new_cols = [[sum(co[jj] * cur_cols[jj][i] for jj in range(d)) % q
                     for i in range(n)] for co in ker]
        cur_cols, cur_piv = _column_space_mod_q(
            [[new_cols[jj][i] for jj in range(len(new_cols))] for i in range(n)],
            p, M_eff)

    for label, residue in tame_seeds:
        small, rv = _restrict_to_basis_q(ops[label], cur_cols, cur_piv, p, M)
        M_eff = min(M_eff, rv)
        cut(small, residue % p)
    Ublock, rv = _restrict_to_basis_q(U, cur_cols, cur_piv, p, M)
    M_eff = min(M_eff, rv)
    # slope-zero projector inside the block: residues are in F_p here
    d = len(Ublock)
    E = _int_matrix_power(np.array(Ublock, dtype=object), (p - 1) * p ** (M - 1), q)
    idem = (np.array(_matmul_q(E.tolist(), E.tolist(), q), dtype=object) - E) % q
    flat = [int(x) for x in idem.ravel() if int(x) % q]
    if flat:
        M_eff = min(M_eff, min(sub_vp(x % q, p, M) for x in flat))
    pl_cols, pl_piv = _column_space_mod_q(E.tolist(), p, M_eff)
    Uord, rv = _restrict_to_basis_q(Ublock, pl_cols, pl_piv, p, M_eff)
    M_eff = min(M_eff, rv)
    q_eff = p ** M_eff
    r = len(Uord)
    # unit roots of the small U matrix
    if r == 1:
        alphas = [Uord[0][0] % q_eff]
    elif r == 2:
        s = (Uord[0][0] + Uord[1][1]) % q_eff
        det = (Uord[0][0] * Uord[1][1] - Uord[0][1] * Uord[1][0]) % q_eff
        disc = (s * s - 4 * det) % q_eff
        vd = sub_vp(disc, p, M_eff) if disc else M_eff
        if vd >= M_eff - 1:
            raise ValueError("ordinary branches indistinguishable at this precision")
        if vd % 2:
            raise ValueError("ordinary quadratic is ramified; no Z_p branches")
        root = hensel_sqrt(disc // p ** vd, p, M_eff - vd) * p ** (vd // 2)
        inv2 = pow(2, -1, q_eff)
        alphas = [((s + root) * inv2) % q_eff, ((s - root) * inv2) % q_eff]
    else:
        cp = _charpoly_mod_q(Uord, q_eff)
        raise ValueError(f"ordinary part has rank {r}; only ranks 1-2 handled "
                         f"(charpoly mod p: {[c % p for c in cp]})")
    from .modsym import ClassicalSymbol
    width = k + 1
    branches = []
    for alpha in alphas:
        rows = [[(Uord[i][jj] - (alpha if i == jj else 0)) % q_eff
                 for jj in range(r)] for i in range(r)]
        ker = _kernel_mod_q(rows, r, p, M_eff)
        if len(ker) != 1:
            continue
        co = ker[0]
        in_block = [sum(co[jj] * pl_cols[jj][i] for jj in range(r)) % q_eff
                    for i in range(len(pl_cols[0]))]
        in_lat = [sum(in_block[jj] * cur_cols[jj][i] for jj in range(len(cur_cols))) % q_eff
                  for i in range(n)]
        vec = [sum(in_lat[jj] * basis_cols[jj][i] for jj in range(n)) % q_eff
               for i in range(D)]
        values = [[vec[i * width + m] for m in range(width)]
                  for i in range(space.ngens)]
        phi = ClassicalSymbol(space, values, check=False)
        tame_vals = {}
        varr = np.array([x % q_eff for x in vec], dtype=object)
        ref = next(i for i, x in enumerate(vec) if x % p != 0)
        for label in ops:
            mat = data_operator_matrix(space, label, k, q)
            img = (np.array(mat, dtype=object) @ varr) % q_eff
            tame_vals[label] = int(img[ref]) * pow(vec[ref], -1, q_eff) % q_eff
        branches.append({"symbol": phi, "alpha": int(alpha) % q_eff,
                         "tame": tame_vals})
    if not branches:
        raise ValueError("no one-dimensional ordinary branch found")
    return branches, M_eff


# ---------------------------------------------------------------------------
# generalised eigenspaces and Hecke-algebra images (exact linear algebra)


def generalised_eigenspace(mats: dict, system, dim_ambient: int):
    """Basis of the intersection of ker (T - a)^dim over the given operators.

    mats maps labels to square matrices over an exact field; system is an
    iterable of (label, eigenvalue).  Returns (basis, nilpotent_parts) where
    nilpotent_parts[label] is the matrix of (T - a) restricted to the space.
    """
    basis = None
    sysl = list(system)
    one = None
    for label, a in sysl:
        m = mats[label]
        one = m[0][0] - m[0][0] + 1 if one is None else one
        shifted = [[m[i][j] - (a if i == j else a - a) for j in range(len(m))]
                   for i in range(len(m))]
        power = shifted
        for _ in range(max(dim_ambient.bit_length(), 1)):
            power = linalg.mat_mul(power, power)
        if basis is None:
            basis = linalg.kernel_basis(power, len(m), one=one)
        else:
            imgs = [linalg.mat_vec(power, v) for v in basis]
            stacked = [[imgs[jj][i] for jj in range(len(basis))]
                       for i in range(len(m))]
            ker = linalg.kernel_basis(stacked, len(basis), one=one)
            basis = [_combine(basis, co) for co in ker]
        if not basis:
            raise ValueError("empty generalised eigenspace")
    nil = {}
    for label, a in sysl:
        m = mats[label]
        rows = []
        for v in basis:
            img = linalg.mat_vec(m, v)
            img = [x - a * y for x, y in zip(img, v)]
            co = linalg.coordinates_in_basis(basis, img)
            if co is None:
                raise ValueError("operator does not preserve the eigenspace")
            rows.append(co)
        nil[label] = [[rows[jj][i] for jj in range(len(basis))]
                      for i in range(len(basis))]
    return basis, nil


def _combine(basis, co):
    zero = basis[0][0] - basis[0][0]
    return [sum((c * vec[i] for c, vec in zip(co, basis)), start=zero)
            for i in range(len(basis[0]))]


def hecke_algebra_image(mats_on_space: dict):
    """Structure constants of the unital algebra generated by the matrices.

    Input: label -> square matrix over an exact field, all acting on the same
    space (typically restrictions to a generalised eigenspace).  Returns
    (basis_mats, mult_table, dim) with mult_table[i][j] the coordinates of
    basis_mats[i] * basis_mats[j] in the basis.
    """
    gens = list(mats_on_space.values())
    n = len(gens[0])
    one = gens[0][0][0] - gens[0][0][0] + 1
    ident = linalg.identity(n, one=one)
    basis = [ident]
    flat = [_flatten(ident)]

    def try_add(m):
        v = _flatten(m)
        if linalg.in_span(flat, v):
            return False
        basis.append(m)
        flat.append(v)
        return True

    frontier = [ident]
    while frontier:
        new = []
        for b in frontier:
            for g in gens:
                cand = linalg.mat_mul(b, g)
                if try_add(cand):
                    new.append(cand)
        frontier = new
    table = []
    for x in basis:
        row = []
        for y in basis:
            co = linalg.coordinates_in_basis(flat, _flatten(linalg.mat_mul(x, y)))
            if co is None:
                raise ValueError("algebra is not closed; span logic broken")
            row.append(co)
        table.append(row)
    return basis, table, len(basis)


def _flatten(m):
    return [x for row in m for x in row]
