"""Classical modular symbols for Gamma0(N) with exact coefficients.

A symbol assigns to each coset generator a functional on polynomials of degree
<= k, stored as the vector of its values on 1, z, ..., z^k.  The space is cut
out of the raw data by the two- and three-term coset relations (plus the sign
condition when a sign is fixed); everything downstream -- Hecke matrices,
eigenvectors, stabilisation, twisted period sums -- runs through the free
coordinates of that kernel.
"""

from __future__ import annotations

from math import gcd

from gmpy2 import mpq

from . import linalg
from .exactfield import NFElem, NumberField
from .padic import PadicScalar
from .manin import (
    CUSP_INF,
    IOTA,
    SIGMA,
    TAU,
    CosetTable,
    apply_to_cusp,
    mat_inv2_unimodular,
    mat_mul2,
)


# ---------------------------------------------------------------------------
# coefficient action


from functools import lru_cache


@lru_cache(maxsize=200000)
def weight_action_matrix(gamma, k: int):
    """Integer matrix A with (mu|gamma)_m = sum_i A[m][i] mu_i on V_k duals.

    A[m][i] is the z^i coefficient of (a + c z)^(k-m) (b + d z)^m.
    """
    a, b, c, d = gamma
    rows = []
    for m in range(k + 1):
        poly = [1]
        for _ in range(k - m):
            poly = _polymul_int(poly, [a, c])
        for _ in range(m):
            poly = _polymul_int(poly, [b, d])
        poly = poly + [0] * (k + 1 - len(poly))
        rows.append(tuple(poly[: k + 1]))
    return tuple(rows)


def _polymul_int(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def apply_action(amat, vec):
    """Apply a weight-action matrix to a coefficient vector (any field)."""
    out = []
    zero = vec[0] - vec[0]
    for row in amat:
        acc = zero
        for coef, v in zip(row, vec):
            if coef:
                acc = acc + v * coef
        out.append(acc)
    return out


# ---------------------------------------------------------------------------
# dimension oracles (genus / cusp / elliptic-point counts)


def _legendre(a, p):
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def index_gamma0(N: int) -> int:
    out = N
    for ell in _prime_divisors(N):
        out = out // ell * (ell + 1)
    return out


def _prime_divisors(n):
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


def nu2(N):
    if N % 4 == 0:
        return 0
    out = 1
    for ell in _prime_divisors(N):
        if ell == 2:
            continue
        out *= 1 + _legendre(-1, ell)
    return out


def nu3(N):
    if N % 9 == 0:
        return 0
    out = 1
    for ell in _prime_divisors(N):
        if ell == 3:
            continue
        out *= 1 + _legendre(-3, ell)
    return out


def num_cusps(N):
    total = 0
    d = 1
    while d <= N:
        if N % d == 0:
            total += _euler_phi(gcd(d, N // d))
        d += 1
    return total


def _euler_phi(n):
    out = n
    for ell in _prime_divisors(n):
        out = out // ell * (ell - 1)
    return out


def genus_x0(N):
    return 1 + index_gamma0(N) // 12 - nu2(N) // 4 - nu3(N) // 3 - num_cusps(N) // 2


def dim_cusp_forms(N: int, weight: int) -> int:
    """dim S_weight(Gamma0(N)) for even weight >= 2."""
    if weight == 2:
        return genus_x0(N)
    g = genus_x0(N)
    return ((weight - 1) * (g - 1)
            + (weight // 2 - 1) * num_cusps(N)
            + nu2(N) * (weight // 4)
            + nu3(N) * (weight // 3))


def eisenstein_rank(N: int, weight: int) -> int:
    c = num_cusps(N)
    return c - 1 if weight == 2 else c


def symbol_dimension_oracle(N: int, k: int) -> int:
    """Expected dimension of the full (sign-free) symbol space."""
    return 2 * dim_cusp_forms(N, k + 2) + eisenstein_rank(N, k + 2)


# ---------------------------------------------------------------------------
# the space


class SymbolSpace:
    """Weight-k dual symbols on Gamma0(N), optionally in a fixed sign part."""

    def __init__(self, N: int, k: int, sign: int | None = None):
        if k % 2 != 0 or k < 0:
            raise ValueError("need even k >= 0 (trivial nebentypus)")
        if sign not in (None, 1, -1):
            raise ValueError("sign must be +1, -1 or None")
        self.N = N
        self.k = k
        self.sign = sign
        self.cosets = CosetTable(N)
        self.ngens = len(self.cosets)
        self.width = k + 1
        self._op_tables: dict = {}
        self._hecke_free: dict = {}
        self._build_relations()

    # -- relations --------------------------------------------------------------

    def _coord(self, gen: int, m: int) -> int:
        return gen * self.width + m

    def _build_relations(self):
        # each relation is a list of (generator, gamma, scale) meaning
        # sum_{terms} scale * F_gen | gamma = 0; kept symbolically so both the
        # exact layer and the distribution layer can evaluate residuals
        terms_list = []
        for i in range(self.ngens):
            terms_list.append(self._torsion_terms(i, SIGMA, 2))
            terms_list.append(self._torsion_terms(i, TAU, 3))
        if self.sign is not None:
            for i in range(self.ngens):
                g = self.cosets.reps[i]
                gp = mat_mul2(mat_mul2(IOTA, g), IOTA)
                j, delta = self.cosets.transport(gp)
                gamma = mat_mul2(mat_inv2_unimodular(delta), IOTA)
                terms_list.append([(j, gamma, 1), (i, (1, 0, 0, 1), -self.sign)])
        self.relation_terms = terms_list
        rows = []
        for terms in terms_list:
            rows.extend(self._terms_to_rows(terms))
        self.relation_rows = rows
        free, pivot_expr = linalg.sparse_kernel_structure(
            rows, self.ngens * self.width
        )
        self.free_coords = free
        self.pivot_expr = pivot_expr
        self.dim = len(free)

    def _torsion_terms(self, i: int, torsion, order: int):
        terms = []
        acc = self.cosets.reps[i]
        for _ in range(order):
            j, delta = self.cosets.transport(acc)
            terms.append((j, mat_inv2_unimodular(delta), 1))
            acc = mat_mul2(acc, torsion)
        return terms

    def _terms_to_rows(self, terms):
        rows = []
        mats = [(j, weight_action_matrix(gamma, self.k), scale)
                for j, gamma, scale in terms]
        for m in range(self.width):
            row: dict[int, mpq] = {}
            for j, amat, scale in mats:
                for idx, coef in enumerate(amat[m]):
                    if coef:
                        key = self._coord(j, idx)
                        row[key] = row.get(key, mpq(0)) + scale * coef
            if any(v != 0 for v in row.values()):
                rows.append(row)
        return rows

    def check_dimension(self) -> bool:
        """Compare against the genus/cusp-count oracle (full space only)."""
        if self.sign is not None:
            return True
        return self.dim == symbol_dimension_oracle(self.N, self.k)

    # -- embedding between free coordinates and raw data --------------------------

    def embed(self, free_vec):
        """Raw data (per-generator coefficient vectors) from free coordinates."""
        zero = free_vec[0] - free_vec[0] if free_vec else mpq(0)
        data = [zero] * (self.ngens * self.width)
        for pos, c in zip(self.free_coords, free_vec):
            data[pos] = c
        for pc, expr in self.pivot_expr.items():
            acc = zero
            for c, coef in expr.items():
                acc = acc + data[c] * coef
            data[pc] = acc
        return [data[i * self.width:(i + 1) * self.width] for i in range(self.ngens)]

    def read_free(self, values):
        flat = []
        for pos in self.free_coords:
            flat.append(values[pos // self.width][pos % self.width])
        return flat

    # -- operators ----------------------------------------------------------------

    def op_matrices(self, label):
        """Defining coset matrices for an operator label.

        Labels: ("T", ell) for ell prime to N, ("U", q) for q | N, "iota".
        """
        if label == "iota":
            return [IOTA]
        kind, q = label
        if kind == "U":
            if self.N % q != 0:
                raise ValueError(f"U_{q} needs {q} | N")
            return [(1, a, 0, q) for a in range(q)]
        if kind == "T":
            if self.N % q == 0:
                raise ValueError(f"T_{q} is not defined at a bad prime; use U_{q}")
            return [(1, a, 0, q) for a in range(q)] + [(q, 0, 0, 1)]
        raise ValueError(f"unknown operator label {label!r}")

    def op_table(self, label):
        """Per-generator decomposition [(j, gamma), ...] of the operator.

        The operator value at generator i is sum of F_j | gamma over the
        table row; gamma = delta^{-1} m with delta the Gamma0(N) transport.
        """
        if label in self._op_tables:
            return self._op_tables[label]
        mats = self.op_matrices(label)
        table = []
        for i in range(self.ngens):
            x, y = self.cosets.generator_divisor(i)
            entries = []
            for m in mats:
                mx, my = apply_to_cusp(m, x), apply_to_cusp(m, y)
                for j, delta in self.cosets.decompose_divisor(mx, my):
                    gamma = mat_mul2(mat_inv2_unimodular(delta), m)
                    entries.append((j, gamma))
            table.append(entries)
        self._op_tables[label] = table
        return table

    def apply_table(self, table, values):
        """Apply a data-level operator to per-generator value vectors."""
        zero = values[0][0] - values[0][0]
        out = []
        for i in range(self.ngens):
            acc = [zero] * self.width
            for j, gamma in table[i]:
                amat = weight_action_matrix(gamma, self.k)
                contrib = apply_action(amat, values[j])
                acc = [x + y for x, y in zip(acc, contrib)]
            out.append(acc)
        return out

    def hecke_matrix(self, label, cache_dir=None):
        """Exact matrix of the operator on the free-coordinate basis.

        Rows/columns follow the free-coordinate ordering; column v is the
        image of the v-th basis symbol.  Matrices are cached in memory and,
        when ``cache_dir`` is given, on disk.
        """
        key = repr(label)
        if key in self._hecke_free:
            return self._hecke_free[key]
        if cache_dir is not None:
            from .cache import load_hecke, store_hecke
            cached = load_hecke(cache_dir, self.N, self.k, self.sign, key)
            if cached is not None:
                self._hecke_free[key] = cached
                return cached
        table = self.op_table(label)
        cols = []
        for v in range(self.dim):
            free_vec = [mpq(0)] * self.dim
            free_vec[v] = mpq(1)
            values = self.embed(free_vec)
            image = self.apply_table(table, values)
            cols.append(self.read_free(image))
        mat = [[cols[j][i] for j in range(self.dim)] for i in range(self.dim)]
        self._hecke_free[key] = mat
        if cache_dir is not None:
            from .cache import store_hecke
            store_hecke(cache_dir, self.N, self.k, self.sign, key, mat)
        return mat

    def __repr__(self):
        s = {1: "+", -1: "-", None: "full"}[self.sign]
        return f"SymbolSpace(N={self.N}, k={self.k}, sign={s}, dim={self.dim})"


# ---------------------------------------------------------------------------
# symbols


class ClassicalSymbol:
    """An element of a SymbolSpace: one coefficient vector per generator."""

    def __init__(self, space: SymbolSpace, values, check: bool = True):
        self.space = space
        self.values = [list(v) for v in values]
        if check and not self.check_relations():
            raise ValueError("values violate the coset relations")

    @classmethod
    def from_free(cls, space, free_vec):
        return cls(space, space.embed(free_vec), check=False)

    def free_vector(self):
        return space_read(self.space, self.values)

    def check_relations(self) -> bool:
        flat = [v for row in self.values for v in row]
        zero = flat[0] - flat[0]
        for row in self.space.relation_rows:
            acc = zero
            for c, coef in row.items():
                acc = acc + flat[c] * coef
            if not linalg.is_zero_elem(acc):
                return False
        return True

    def value_on_path(self, x, y):
        """The coefficient vector of the symbol on the path {x -> y}."""
        zero = self.values[0][0] - self.values[0][0]
        acc = [zero] * self.space.width
        for j, delta in self.space.cosets.decompose_divisor(x, y):
            amat = weight_action_matrix(mat_inv2_unimodular(delta), self.space.k)
            contrib = apply_action(amat, self.values[j])
            acc = [u + v for u, v in zip(acc, contrib)]
        return acc

    def pair_polynomial(self, x, y, poly):
        """Value on {x -> y} paired against a polynomial (ascending coeffs)."""
        vec = self.value_on_path(x, y)
        zero = vec[0] - vec[0]
        acc = zero
        for m, c in enumerate(poly):
            if m < len(vec):
                acc = acc + vec[m] * c
        return acc

    def apply(self, label) -> "ClassicalSymbol":
        table = self.space.op_table(label)
        return ClassicalSymbol(self.space, self.space.apply_table(table, self.values),
                               check=False)

    def scale(self, c) -> "ClassicalSymbol":
        return ClassicalSymbol(self.space, [[v * c for v in row] for row in self.values],
                               check=False)

    def add(self, other) -> "ClassicalSymbol":
        return ClassicalSymbol(
            self.space,
            [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.values, other.values)],
            check=False,
        )

    def is_zero(self) -> bool:
        return all(linalg.is_zero_elem(v) for row in self.values for v in row)

    def content_normalised(self) -> "ClassicalSymbol":
        """Scale a rational symbol to coprime integer coefficients, first
        nonzero positive."""
        flat = [v for row in self.values for v in row]
        nums = [mpq(v) for v in flat if v != 0]
        if not nums:
            return self
        from math import lcm
        den = 1
        for v in nums:
            den = lcm(den, int(v.denominator))
        ints = [int(v * den) for v in nums]
        g = 0
        for n in ints:
            g = gcd(g, n)
        s = mpq(den, g)
        first = next(v for v in flat if v != 0)
        if first * s < 0:
            s = -s
        return self.scale(s)

    def map_values(self, fn) -> "ClassicalSymbol":
        return ClassicalSymbol(self.space, [[fn(v) for v in row] for row in self.values],
                               check=False)


def space_read(space, values):
    return space.read_free(values)


# ---------------------------------------------------------------------------
# Hecke polynomial / U_p structure on the old subspace


def hecke_polynomial(a_p, k: int, p: int):
    """(coefficients of X^2 - a_p X + p^(k+1), is_irregular)."""
    a_p = mpq(a_p)
    coeffs = [mpq(p) ** (k + 1), -a_p, mpq(1)]
    disc = a_p * a_p - 4 * mpq(p) ** (k + 1)
    return coeffs, disc == 0


def old_subspace_up_matrix(a_p, k: int, p: int):
    """U_p on the old subspace in the basis {f at level N, f(pz)}."""
    return [[mpq(a_p), mpq(1)], [-(mpq(p) ** (k + 1)), mpq(0)]]


# ---------------------------------------------------------------------------
# eigen-symbols


class EigenSystem:
    """(label, exact eigenvalue) pairs; eigenvalues mpq or NFElem."""

    def __init__(self, pairs):
        self.pairs = list(pairs)

    def labels(self):
        return [lab for lab, _ in self.pairs]

    def __iter__(self):
        return iter(self.pairs)

    def __repr__(self):
        return f"EigenSystem({self.pairs})"

    def is_eisenstein(self, k: int) -> bool:
        """All listed tame eigenvalues match 1 + ell^(k+1)."""
        tame = [(lab, a) for lab, a in self.pairs if lab != "iota" and lab[0] == "T"]
        if not tame:
            return False
        return all(a == 1 + mpq(lab[1]) ** (k + 1) for lab, a in tame)


class EigenspaceError(ValueError):
    pass


def eigen_symbol(space: SymbolSpace, system: EigenSystem, cache_dir=None,
                 allow_eisenstein: bool = False) -> ClassicalSymbol:
    """The unique (up to scale) symbol with the given eigenvalues.

    Rational eigen-systems yield a content-normalised symbol; eigenvalues in a
    quadratic field yield a symbol normalised to leading coefficient 1.
    """
    if not allow_eisenstein and system.is_eisenstein(space.k):
        raise EigenspaceError("Eisenstein eigensystem rejected in cuspidal mode")
    field = None
    for _, a in system:
        if isinstance(a, NFElem):
            field = a.field
    basis = None
    for label, a in system:
        mat = space.hecke_matrix(label, cache_dir=cache_dir)
        if field is not None:
            mat = [[field(x) for x in row] for row in mat]
            a = field(a) if not isinstance(a, NFElem) else a
        if basis is None:
            rows = [[mat[i][j] - (a if i == j else a - a) for j in range(space.dim)]
                    for i in range(space.dim)]
            one = field(1) if field is not None else mpq(1)
            basis = linalg.kernel_basis(rows, space.dim, one=one)
        else:
            # restrict (T - a) to the current subspace and cut again
            sub = []
            for vec in basis:
                img = linalg.mat_vec(mat, vec)
                sub.append([x - a * y for x, y in zip(img, vec)])
            stacked = [[sub[j][i] for j in range(len(basis))] for i in range(space.dim)]
            one = field(1) if field is not None else mpq(1)
            ker = linalg.kernel_basis(stacked, len(basis), one=one)
            basis = [
                [sum((c * vec[i] for c, vec in zip(co, basis)),
                     start=(one - one)) for i in range(space.dim)]
                for co in ker
            ]
        if len(basis) == 0:
            raise EigenspaceError("empty eigenspace")
    if len(basis) != 1:
        raise EigenspaceError(f"eigenspace has dimension {len(basis)}, expected 1")
    sym = ClassicalSymbol.from_free(space, basis[0])
    if field is None:
        return sym.content_normalised()
    lead = next(v for row in sym.values for v in row if not v.is_zero())
    return sym.map_values(lambda v: v / lead)


def cuspidal_rational_eigensystems(space: SymbolSpace, label, k: int,
                                   cache_dir=None):
    """Rational eigenvalues of one operator with Eisenstein values removed."""
    mat = space.hecke_matrix(label, cache_dir=cache_dir)
    poly = linalg.charpoly(mat)
    roots = linalg.rational_roots(poly)
    ell = label[1]
    eis = mpq(1) + mpq(ell) ** (k + 1)
    return [r for r in roots if r != eis]


# ---------------------------------------------------------------------------
# pullback to level Np and p-stabilisation


def pullback_symbol(phi: ClassicalSymbol, target: SymbolSpace) -> ClassicalSymbol:
    """View a level-M symbol inside a level-N space, M | N (same weight/sign).

    Values on the level-N generators are read off from the level-M symbol;
    this is the pullback along the covering of modular curves.
    """
    if target.N % phi.space.N != 0 or target.k != phi.space.k:
        raise ValueError("target level must be a multiple, same weight")
    values = []
    for i in range(target.ngens):
        x, y = target.cosets.generator_divisor(i)
        values.append(phi.value_on_path(x, y))
    return ClassicalSymbol(target, values, check=False)


def p_stabilise(phi_pullback: ClassicalSymbol, p: int, a_p, alpha,
                verify: bool = True) -> ClassicalSymbol:
    """(U_p - beta) phi with beta = a_p - alpha: the alpha-eigenvector in the
    old subspace spanned by the pullback and its p-dilation.

    ``alpha`` may be rational or an NFElem root of the Hecke polynomial; the
    symbol values are promoted to the field of alpha.  With ``verify`` the
    U_p-eigen property of the output is checked exactly, so a non-root alpha
    is rejected rather than silently producing junk.
    """
    space = phi_pullback.space
    if space.N % p != 0:
        raise ValueError("stabilisation happens at level divisible by p")
    if isinstance(alpha, NFElem):
        fld = alpha.field
        phi = phi_pullback.map_values(lambda v: fld(v))
        beta = fld(a_p) - alpha
    else:
        phi = phi_pullback
        alpha = mpq(alpha)
        beta = mpq(a_p) - alpha
    up = phi.apply(("U", p))
    out = up.add(phi.scale(-beta))
    if verify:
        check = out.apply(("U", p)).add(out.scale(-alpha))
        if not check.is_zero():
            raise ValueError("alpha is not a U_p-eigenvalue on this old subspace")
    return out


def twisted_symbol(phi: ClassicalSymbol, chi_F, target: SymbolSpace) -> ClassicalSymbol:
    """The chi_F-twist of a symbol, by the explicit twisting sum.

    For a quadratic tame character of conductor D, the twist is
    sum_b chi_F(b) phi | [[D, b],[0, D]] evaluated on the target-level
    generators.  Building the twist this way (rather than hunting its
    eigensymbol and content-normalising) keeps the plus and minus twists on
    the same scale as the input symbol, which cross-parity ratio tests need.
    The sign flips by chi_F(-1).
    """
    from .characters import kronecker_symbol
    D = chi_F.tame_modulus
    values = []
    for i in range(target.ngens):
        x, y = target.cosets.generator_divisor(i)
        acc = None
        for b in range(D):
            s = kronecker_symbol(chi_F.tame_data, b)
            if s == 0:
                continue
            u = (D, b, 0, D)
            ux = _apply_rational(u, x)
            uy = _apply_rational(u, y)
            vec = phi.value_on_path(ux, uy)
            amat = weight_action_matrix(u, phi.space.k)
            contrib = apply_action(amat, vec)
            contrib = [v * s for v in contrib]
            acc = contrib if acc is None else [a + c for a, c in zip(acc, contrib)]
        values.append(acc)
    return ClassicalSymbol(target, values, check=False)


def _apply_rational(m, cusp):
    from .manin import apply_to_cusp
    return apply_to_cusp(m, cusp)


# ---------------------------------------------------------------------------
# twisted period sums and classical L-values


def period_sum(phi: ClassicalSymbol, chi, j: int, field: NumberField):
    """sum over a mod cond(chi) of chi(a) * phi{oo -> a/cond}((a + cond z)^j).

    ``chi`` is a DirichletCharacter; its values are taken exactly in the given
    cyclotomic field (whose zeta-order must be divisible by the character
    order).  Returns an NFElem.
    """
    m = chi.conductor
    if m <= 1:
        raise ValueError("period sums need conductor > 1")
    k = phi.space.k
    if not 0 <= j <= k:
        raise ValueError("j outside the critical range")
    acc = field(0)
    for a in range(m):
        if gcd(a, m) != 1:
            continue
        chival = exact_character_value(chi, a, field)
        if chival.is_zero():
            continue
        poly = [mpq(0)] * (j + 1)
        for l in range(j + 1):
            poly[l] = mpq(_binom(j, l)) * mpq(a) ** (j - l) * mpq(m) ** l
        val = phi.pair_polynomial(CUSP_INF, (a, m), poly)
        acc = acc + chival * field(val)
    return acc


def classical_L_value(phi: ClassicalSymbol, chi, j: int, field: NumberField):
    """The completed-L-over-period avatar: tau(chi^{-1})/cond^(j+1) times the
    chi-weighted period sum.  Exact cyclotomic output."""
    m = chi.conductor
    ps = period_sum(phi, chi, j, field)
    tau = exact_gauss_sum(chi.inverse(), field)
    return ps * tau / (field(m) ** (j + 1))


def exact_character_value(chi, a: int, field: NumberField):
    """chi(a) as an exact root of unity in a cyclotomic field.

    The abstract value is zeta_{p-1}^(s k) zeta_{p^(r-1)}^(t k) times the tame
    sign, for k the discrete log; the field order must be divisible by the
    character order.
    """
    n = getattr(field, "_zeta_order", None)
    if n is None:
        raise ValueError("need a cyclotomic field")
    if gcd(a, chi.modulus) != 1:
        return field(0)
    acc = field(1)
    if chi.r >= 1 and (chi.s or chi.t):
        klog = chi._dlog(a)
        if chi.s:
            if n % (chi.p - 1) != 0:
                raise ValueError("field too small for the tame-order part")
            acc = acc * field.zeta_power(klog * chi.s * (n // (chi.p - 1)))
        if chi.t:
            pr1 = chi.p ** (chi.r - 1)
            if n % pr1 != 0:
                raise ValueError("field too small for the p-part")
            acc = acc * field.zeta_power(klog * chi.t * (n // pr1))
    if chi.tame_kind == "kronecker":
        from .characters import kronecker_symbol
        acc = acc * field(kronecker_symbol(chi.tame_data, a))
    elif chi.tame_kind == "table":
        od = chi.tame_data["order"]
        if n % od != 0:
            raise ValueError("field too small for the tame part")
        jlog = chi.tame_data["logtable"][a % chi.tame_modulus]
        acc = acc * field.zeta_power(jlog * (n // od))
    return acc


def exact_gauss_sum(chi, field: NumberField):
    """tau(chi) = sum chi(a) zeta_m^a exactly, for primitive chi of conductor m."""
    n = getattr(field, "_zeta_order", None)
    m = chi.conductor
    if n is None or n % m != 0:
        raise ValueError("field must contain zeta_cond")
    if not chi.is_primitive():
        raise ValueError("Gauss sums need a primitive character")
    acc = field(0)
    for a in range(1, m):
        if gcd(a, m) != 1:
            continue
        acc = acc + exact_character_value(chi, a, field) * field.zeta_power(a * (n // m))
    return acc


def _binom(n, r):
    from math import comb
    return comb(n, r)


def cyclotomic_field_for(chi) -> NumberField:
    """A cyclotomic field containing the character values and zeta_cond.

    Taking lcm(p-1, cond) keeps the exponent arithmetic in
    exact_character_value integral regardless of the character order.
    """
    from math import lcm
    n = lcm(chi.p - 1, max(chi.conductor, 1))
    if n == 1:
        n = 2
    return NumberField.cyclotomic(n)


def period_sum_padic(phi_padic, chi, j: int):
    """The chi-weighted period sum of a symbol with PadicScalar values.

    Used when the symbol only exists p-adically (a stabilised eigenvector with
    a Hensel-lifted eigenvalue); chi-values are the character's own p-adic
    values, so everything lands in Z_p[zeta_{p^r}].
    """
    m = chi.conductor
    if m <= 1:
        raise ValueError("period sums need conductor > 1")
    k = phi_padic.space.k
    if not 0 <= j <= k:
        raise ValueError("j outside the critical range")
    ring = chi.ring
    acc = ring.zero()
    for a in range(m):
        if gcd(a, m) != 1:
            continue
        chival = chi(a)
        if chival.is_zero():
            continue
        poly = [int(_binom(j, l)) * a ** (j - l) * m ** l for l in range(j + 1)]
        val = phi_padic.pair_polynomial(CUSP_INF, (a, m), poly)
        if isinstance(val, PadicScalar):
            val = ring.promote(val)
        else:
            val = ring.from_rational(mpq(val))
        acc = acc + chival * val
    return acc


# The p-adic completed-L avatar (with its p-power denominator) is assembled in
# lfun.classical_L_value_padic, where the Laurent bookkeeping lives.
