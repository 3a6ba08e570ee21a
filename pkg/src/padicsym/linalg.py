"""Exact linear algebra over gmpy2 rationals (and any exact field).

Dense routines are field-generic: they only need +, -, *, /, and a zero test,
so they are reused over number fields.  The sparse reduced row echelon form is
specialised to mpq and tuned for the big sparse Manin-relation systems, where
choosing low-fill pivots keeps the arithmetic essentially integral.
"""

from __future__ import annotations

from gmpy2 import mpq


def is_zero_elem(x) -> bool:
    z = getattr(x, "is_zero", None)
    if z is not None:
        return z()
    return x == 0


# ---------------------------------------------------------------------------
# dense, field-generic


def rref(rows: list[list], inplace: bool = False):
    """Reduced row echelon form; returns (rows, pivot_columns)."""
    a = rows if inplace else [list(r) for r in rows]
    nrows = len(a)
    ncols = len(a[0]) if nrows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, nrows):
            if not is_zero_elem(a[i][c]):
                piv = i
                break
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = a[r][c]
        a[r] = [x / inv for x in a[r]]
        for i in range(nrows):
            if i != r and not is_zero_elem(a[i][c]):
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return a, pivots


def kernel_basis(rows: list[list], ncols: int, one=None) -> list[list]:
    """Basis of {x : A x = 0} for A given by ``rows`` (each of length ncols)."""
    if one is None:
        one = mpq(1)
    zero = one - one
    if not rows:
        return [[one if i == j else zero for j in range(ncols)] for i in range(ncols)]
    red, pivots = rref(rows)
    pivset = set(pivots)
    free = [c for c in range(ncols) if c not in pivset]
    basis = []
    for fc in free:
        v = [zero] * ncols
        v[fc] = one
        for r, pc in enumerate(pivots):
            v[pc] = -red[r][fc]
        basis.append(v)
    return basis


def solve_right(a_rows: list[list], b: list):
    """One solution x of A x = b, or None if inconsistent."""
    nrows = len(a_rows)
    ncols = len(a_rows[0])
    aug = [list(r) + [b[i]] for i, r in enumerate(a_rows)]
    red, pivots = rref(aug)
    zero = b[0] - b[0]
    x = [zero] * ncols
    for r, pc in enumerate(pivots):
        if pc == ncols:
            return None
        x[pc] = red[r][ncols]
    # verify (cheap next to the elimination)
    for i in range(nrows):
        acc = zero
        for j in range(ncols):
            acc = acc + a_rows[i][j] * x[j]
        if not is_zero_elem(acc - b[i]):
            return None
    return x


def in_span(basis: list[list], v: list) -> bool:
    cols = [list(b) for b in basis]
    a = [[cols[j][i] for j in range(len(cols))] for i in range(len(v))]
    return solve_right(a, v) is not None


def coordinates_in_basis(basis: list[list], v: list):
    cols = [[basis[j][i] for j in range(len(basis))] for i in range(len(v))]
    return solve_right(cols, v)


def mat_mul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    zero = a[0][0] - a[0][0]
    out = [[zero for _ in range(m)] for _ in range(n)]
    for i in range(n):
        ai = a[i]
        oi = out[i]
        for t in range(k):
            c = ai[t]
            if is_zero_elem(c):
                continue
            bt = b[t]
            for j in range(m):
                oi[j] = oi[j] + c * bt[j]
    return out


def mat_vec(a, v):
    zero = v[0] - v[0]
    out = []
    for row in a:
        acc = zero
        for c, x in zip(row, v):
            if not is_zero_elem(c):
                acc = acc + c * x
        out.append(acc)
    return out


def identity(n, one=None):
    if one is None:
        one = mpq(1)
    zero = one - one
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def mat_rank(rows) -> int:
    if not rows:
        return 0
    _, piv = rref(rows)
    return len(piv)


def charpoly(a: list[list]) -> list:
    """Characteristic polynomial det(xI - A), ascending coefficients.

    Berkowitz's division-free algorithm; fine for the small matrices
    (generalised eigenspaces, old subspaces) it is used on.
    """
    n = len(a)
    one = a[0][0] - a[0][0] + 1 if n else mpq(1)
    zero = one - one
    if n == 0:
        return [one]
    # Berkowitz: iteratively build the char poly of leading principal minors
    poly = [one]  # char poly of the empty matrix
    for k in range(1, n + 1):
        akk = a[k - 1][k - 1]
        row = [a[k - 1][j] for j in range(k - 1)]
        col = [a[i][k - 1] for i in range(k - 1)]
        sub = [[a[i][j] for j in range(k - 1)] for i in range(k - 1)]
        # Toeplitz column: c_0 = 1, c_1 = -akk, c_{i+1} = -(row . sub^{i-1} . col)
        c = [one, -akk]
        v = col
        for _ in range(k - 1):
            dot = zero
            for x, y in zip(row, v):
                dot = dot + x * y
            c.append(-dot)
            v = mat_vec(sub, v)
        newpoly = [zero] * (k + 1)
        # multiply: newpoly(x) = sum_i c_i * x^{k - i} ... convolve with poly
        for i, pi in enumerate(poly):
            for j, cj in enumerate(c):
                if i + j <= k:
                    newpoly[i + j] = newpoly[i + j] + pi * cj
        poly = newpoly
    # poly currently has poly[i] = coefficient of x^{n-i}; flip to ascending
    return list(reversed(poly))


def rational_roots(poly_asc: list) -> list:
    """Rational roots (as mpq) of a polynomial with mpq coefficients."""
    from math import gcd
    coeffs = list(poly_asc)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    if not coeffs:
        return []
    den = 1
    for c in coeffs:
        den = den * int(c.denominator) // gcd(den, int(c.denominator))
    ints = [int(c * den) for c in coeffs]
    shift = 0
    while ints[shift] == 0:
        shift += 1
    ints = ints[shift:]
    roots = [mpq(0)] * (1 if shift else 0)
    a0, an = abs(ints[0]), abs(ints[-1])
    for r in _divisors(a0):
        for s in _divisors(an):
            for sgn in (1, -1):
                cand = mpq(sgn * r, s)
                if sum(c * cand ** i for i, c in enumerate(ints)) == 0 and cand not in roots:
                    roots.append(cand)
    return roots


def _divisors(n: int) -> list[int]:
    out = []
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            if d != n // d:
                out.append(n // d)
        d += 1
    return sorted(out)


# ---------------------------------------------------------------------------
# sparse mpq RREF for relation systems


def sparse_kernel_structure(rows: list[dict], ncols: int):
    """Kernel of a sparse system, as (free_cols, pivot_expr).

    ``rows`` are dicts {col: mpq}.  The kernel is parameterised by the free
    columns: x[pivot] = sum_{f in free} pivot_expr[pivot][f] * x[f].  Pivots
    are chosen Markowitz-style (shortest row, then densest-last column) to
    limit fill-in.
    """
    work = []
    for r in rows:
        rr = {c: mpq(v) for c, v in r.items() if v != 0}
        if rr:
            work.append(rr)
    col_rows: dict[int, set[int]] = {}
    for i, r in enumerate(work):
        for c in r:
            col_rows.setdefault(c, set()).add(i)
    active = set(range(len(work)))
    pivot_of_row: dict[int, int] = {}
    import heapq

    heap = [(len(r), i) for i, r in enumerate(work)]
    heapq.heapify(heap)
    while heap:
        ln, i = heapq.heappop(heap)
        if i not in active or len(work[i]) != ln:
            if i in active and work[i]:
                heapq.heappush(heap, (len(work[i]), i))
            continue
        row = work[i]
        if not row:
            active.discard(i)
            continue
        # pick the entry whose column touches fewest other active rows
        piv_col = min(row, key=lambda c: (len(col_rows.get(c, ())), c))
        inv = 1 / row[piv_col]
        if inv != 1:
            for c in list(row):
                row[c] *= inv
        active.discard(i)
        pivot_of_row[i] = piv_col
        for j in list(col_rows.get(piv_col, ())):
            if j == i or j not in active and j not in pivot_of_row:
                continue
            other = work[j]
            f = other.get(piv_col)
            if f is None or f == 0:
                continue
            for c, v in row.items():
                nv = other.get(c, mpq(0)) - f * v
                if nv == 0:
                    if c in other:
                        del other[c]
                        col_rows[c].discard(j)
                else:
                    if c not in other:
                        col_rows.setdefault(c, set()).add(j)
                    other[c] = nv
            if j in active:
                heapq.heappush(heap, (len(other), j))
        col_rows[piv_col] = {i}
    # the forward pass already eliminated every pivot column from every other
    # row (pivot rows included); verify rather than re-reduce
    piv_cols = set(pivot_of_row.values())
    row_of_pivot = {c: i for i, c in pivot_of_row.items()}
    for i, pc in pivot_of_row.items():
        stray = [c for c in work[i] if c != pc and c in piv_cols]
        for c in stray:  # pragma: no cover - defensive
            f = work[i][c]
            for cc, vv in work[row_of_pivot[c]].items():
                nv = work[i].get(cc, mpq(0)) - f * vv
                if nv == 0:
                    work[i].pop(cc, None)
                else:
                    work[i][cc] = nv
    free = [c for c in range(ncols) if c not in piv_cols]
    pivot_expr = {}
    for i, pc in pivot_of_row.items():
        pivot_expr[pc] = {c: -v for c, v in work[i].items() if c != pc}
    return free, pivot_expr
