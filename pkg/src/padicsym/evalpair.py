"""Evaluation functionals and the pairing between Hecke operators and symbols.

Ev composes: value at {0 -> oo}, (a class-group sum that is a single term
here), and total measure.  Pairing an operator word T with a symbol through
<T, Phi> = Ev(T Phi) gives the duality machinery whose non-degeneracy is
checked on localised pieces, on the synthetic models, and -- through a
specialisation grid -- on the truncated family scenarios.
"""

from __future__ import annotations

from gmpy2 import mpq

from . import linalg
from .irregular_lab import FiniteAlgebra, SyntheticEigenspace, TruncatedFamilyAlgebra
from .manin import CUSP_INF, CUSP_ZERO
from .modsym import ClassicalSymbol


def ev_total(phi, class_list: tuple = (1,)):
    """Ev(phi): total measure of the value at {0 -> oo}.

    ``phi`` is a ClassicalSymbol (any exact or embedded coefficients) or an
    OvcSymbol; the class-group sum collapses to one term over Q but the
    parameter keeps the general shape visible.
    """
    acc = None
    for _ in class_list:
        if isinstance(phi, ClassicalSymbol):
            v = phi.pair_polynomial(CUSP_ZERO, CUSP_INF, [1])
        else:
            v = phi.value_on_path(CUSP_ZERO, CUSP_INF).moment(0)
        acc = v if acc is None else acc + v
    return acc


def apply_word(phi: ClassicalSymbol, word) -> ClassicalSymbol:
    """Apply a product of operator labels, leftmost acting last."""
    out = phi
    for label in reversed(list(word)):
        out = out.apply(label)
    return out


def pairing(word, phi: ClassicalSymbol):
    """<T, phi> = Ev(T phi) for an operator word (tuple of labels)."""
    return ev_total(apply_word(phi, word))


def gram_matrix(words, symbols):
    """Gram matrix of the Ev pairing for operator words x symbols; its exact
    rank decides perfectness."""
    g = [[pairing(w, s) for s in symbols] for w in words]
    rank = linalg.mat_rank([[mpq(x) if isinstance(x, int) else x for x in row]
                            for row in g])
    return g, rank


def synthetic_gram(space: SyntheticEigenspace, A: FiniteAlgebra, ell=None):
    """Ev-style Gram matrix on a synthetic model, with the duality functional
    in the first-Fourier-coefficient role."""
    n = space.dim
    one = space.one
    zero = one - one
    if ell is None:
        ell = [one] * n
    ebasis = [[one if i == jj else zero for i in range(n)] for jj in range(n)]
    g = [[sum((x * y for x, y in zip(ell, linalg.mat_vec(T, v))), start=zero)
          for v in ebasis] for T in A.basis_mats]
    return g, linalg.mat_rank([list(r) for r in g])


# ---------------------------------------------------------------------------
# truncated-family injectivity


def family_gram_blocks(A: TruncatedFamilyAlgebra, module_rank: int | None = None,
                       null_direction: bool = False):
    """The pairing data of the free rank-one module over a truncated family
    algebra, optionally extended by a planted pairing-null direction.

    The module is A itself; the functional is the coefficient-of-1 form (the
    leading-coefficient shape).  Returns a function (T_coords, v_index) ->
    truncated scalar, plus the module dimension.
    """
    rank = A.rank
    mod_dim = rank + (1 if null_direction else 0)

    def pair(t_coords, v_idx):
        if v_idx >= rank:
            return [0] * A.order  # the planted direction pairs to zero
        e = [[0] * A.order for _ in range(rank)]
        e[v_idx][0] = 1
        prod = A.mul(t_coords, e)
        # functional: coefficient of the socle monomial (top of the algebra),
        # so the pairing is perfect on the honest module
        return prod[rank - 1]

    return pair, mod_dim


def injectivity_test(A: TruncatedFamilyAlgebra, w_values,
                     null_direction: bool = False) -> dict:
    """Does an algebra element pair to zero at every grid specialisation only
    if it is zero mod (p^M, w^n)?

    Specialising the truncated pairing at the grid w-values and stacking the
    resulting Gram blocks, the kernel is computed exactly mod p^M.  With a
    planted null direction in the module, the module-side kernel is nonzero
    and must be detected.
    """
    pair, mod_dim = family_gram_blocks(A, null_direction=null_direction)
    p, q, n = A.p, A.q, A.order
    grid_ok = len(w_values) >= n and len({w % p for w in w_values}) == len(w_values)
    # columns: algebra basis; rows: (grid point, module basis vector)
    rows = []
    for w in w_values:
        for v in range(mod_dim):
            row = []
            for t in range(A.rank):
                e = [[0] * n for _ in range(A.rank)]
                e[t][0] = 1
                poly = pair(e, v)
                val = 0
                pw = 1
                for c in poly:
                    val = (val + c * pw) % q
                    pw = (pw * w) % q
                row.append(val)
            rows.append(row)
    alg_kernel = _kernel_mod_q(rows, A.rank, p, A.M)
    # module-side kernel: vectors pairing to zero against every operator
    mrows = []
    for w in w_values:
        for t in range(A.rank):
            e = [[0] * n for _ in range(A.rank)]
            e[t][0] = 1
            row = []
            for v in range(mod_dim):
                poly = pair(e, v)
                val = 0
                pw = 1
                for c in poly:
                    val = (val + c * pw) % q
                    pw = (pw * w) % q
                row.append(val)
            mrows.append(row)
    mod_kernel = _kernel_mod_q(mrows, mod_dim, p, A.M)
    return {
        "grid_sufficient": grid_ok,
        "grid": list(w_values),
        "truncation_order": n,
        "algebra_kernel_dim": len(alg_kernel),
        "module_kernel_dim": len(mod_kernel),
        "algebra_side_injective": len(alg_kernel) == 0,
        "module_side_nondegenerate": len(mod_kernel) == 0,
    }


def _kernel_mod_q(rows, ncols, p, M):
    """Kernel mod p^M by unit-pivot elimination; vectors with unit content.

    Vectors divisible by p are quotient-torsion artefacts, not kernel lines;
    only unit-content solutions are returned (enough for detection purposes).
    """
    q = p ** M
    a = [[x % q for x in row] for row in rows]
    nrows = len(a)
    piv_of_col = {}
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, nrows):
            if a[i][c] % p != 0:
                piv = i
                break
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = pow(a[r][c], -1, q)
        a[r] = [(x * inv) % q for x in a[r]]
        for i in range(nrows):
            if i != r and a[i][c] % q:
                f = a[i][c]
                a[i] = [(x - f * y) % q for x, y in zip(a[i], a[r])]
        piv_of_col[c] = r
        r += 1
    free = [c for c in range(ncols) if c not in piv_of_col]
    basis = []
    for fc in free:
        v = [0] * ncols
        v[fc] = 1
        for c, rr in piv_of_col.items():
            v[c] = (-a[rr][fc]) % q
        basis.append(v)
    return basis
