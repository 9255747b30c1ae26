"""Orientation and in-sphere predicates with exact fallback.

Signs are first computed in floating point together with a conservative
magnitude bound; whenever the computed value is too small for its sign to be
trusted, the determinant is recomputed exactly over rationals (floats convert
to Fraction without loss).  An optional weight-based symbolic perturbation
resolves exact in-sphere ties by point index so that cospherical inputs
still produce a well-defined triangulation.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import DegeneracyError

# Relative filter threshold: floats are trusted when |det| exceeds
# FILTER_EPS times the accumulated term magnitude.  2**-45 leaves a margin
# of 256 over the worst-case rounding of the expansions used here (< 7x7).
FILTER_EPS = 2.0 ** -45

INSIDE = 1
OUTSIDE = -1
ON = 0


def _det_mag(rows):
    """Determinant by Laplace expansion, returning (value, term magnitude).

    The magnitude is the same expansion with absolute values, an upper bound
    on the sum of |terms|, which bounds the rounding error of the value.
    """
    k = len(rows)
    if k == 1:
        return rows[0][0], abs(rows[0][0])
    if k == 2:
        (a, b), (c, d) = rows
        return a * d - b * c, abs(a * d) + abs(b * c)
    if k == 3:
        (a, b, c), (d, e, f), (g, h, i) = rows
        m1 = e * i - f * h
        m2 = d * i - f * g
        m3 = d * h - e * g
        val = a * m1 - b * m2 + c * m3
        mag = (
            abs(a) * (abs(e * i) + abs(f * h))
            + abs(b) * (abs(d * i) + abs(f * g))
            + abs(c) * (abs(d * h) + abs(e * g))
        )
        return val, mag
    val = 0.0
    mag = 0.0
    first = rows[0]
    rest = rows[1:]
    for j in range(k):
        minor = [[row[m] for m in range(k) if m != j] for row in rest]
        mv, mm = _det_mag(minor)
        term = first[j] * mv
        val = val + term if j % 2 == 0 else val - term
        mag += abs(first[j]) * mm
    return val, mag


def _det_sign_exact(rows):
    """Sign of the determinant over exact rationals (fraction elimination)."""
    m = [[Fraction(x) for x in row] for row in rows]
    k = len(m)
    sign = 1
    for col in range(k):
        pivot = None
        for r in range(col, k):
            if m[r][col] != 0:
                pivot = r
                break
        if pivot is None:
            return 0
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            sign = -sign
        inv = m[col][col]
        if inv < 0:
            sign = -sign
        for r in range(col + 1, k):
            if m[r][col] != 0:
                factor = m[r][col] / inv
                row_r = m[r]
                row_c = m[col]
                for c in range(col, k):
                    row_r[c] -= factor * row_c[c]
    return sign


def det_sign(rows):
    """Exact sign (+1, -1, 0) of a small square determinant."""
    val, mag = _det_mag([[float(x) for x in row] for row in rows])
    if abs(val) > FILTER_EPS * mag:
        return 1 if val > 0.0 else -1
    return _det_sign_exact(rows)


def orient(points):
    """Orientation sign of d+1 points in R^d (0 = affinely dependent)."""
    pts = [list(map(float, p)) for p in points]
    d = len(pts) - 1
    base = pts[0]
    rows = [[pts[i][a] - base[a] for a in range(d)] for i in range(1, d + 1)]
    return det_sign(rows)


def _lifted_rows(simplex_points, query):
    q = list(map(float, query))
    rows = []
    for p in simplex_points:
        rel = [float(p[a]) - q[a] for a in range(len(q))]
        rows.append(rel + [sum(x * x for x in rel)])
    return rows


def in_sphere_sign(simplex_points, query):
    """Raw sign of the lifted in-sphere determinant (orientation dependent)."""
    return det_sign(_lifted_rows(simplex_points, query))


def _in_sphere_parity(d):
    # the lifted determinant equals the orientation of the d+2 lifted points
    # with the query last; moving the query first flips the sign d+1 times
    return 1 if d % 2 == 0 else -1


def in_sphere(simplex_points, query):
    """Locate `query` relative to the circumsphere of a d-simplex in R^d.

    Returns INSIDE, OUTSIDE or ON.  Raises DegeneracyError when the simplex
    points are affinely dependent (no circumsphere).
    """
    o = orient(simplex_points)
    if o == 0:
        raise DegeneracyError(
            "affinely dependent simplex has no circumsphere", simplex_points
        )
    parity = _in_sphere_parity(len(simplex_points) - 1)
    return parity * o * in_sphere_sign(simplex_points, query)


def in_sphere_perturbed(simplex_points, simplex_indices, query, query_index):
    """In-sphere with exact ties broken by point index (weight perturbation).

    Point i conceptually carries an infinitesimal weight eps**(i+1)
    subtracted from its lifted coordinate, turning the test into a power
    test of a regular triangulation.  The determinant becomes a polynomial
    in eps whose constant term is the unperturbed value; on a tie, the sign
    is that of the first nonzero coefficient in increasing powers of eps,
    i.e. in increasing point index.
    """
    o = orient(simplex_points)
    if o == 0:
        raise DegeneracyError(
            "affinely dependent simplex has no circumsphere", simplex_points
        )
    parity = _in_sphere_parity(len(simplex_points) - 1)
    raw = in_sphere_sign(simplex_points, query)
    if raw != 0:
        return parity * o * raw

    rows = [[Fraction(x) for x in row] for row in _lifted_rows(simplex_points, query)]
    k = len(rows)
    # det(eps) = det0 - sum_i w_i * C_i + w_q * sum_i C_i with C_i the
    # cofactor of the lifted entry of row i; sum_i C_i equals the
    # determinant with the lifted column replaced by ones (nonzero, since
    # the simplex is affinely independent).
    coeffs = []
    for i, idx in enumerate(simplex_indices):
        minor = [row[:-1] for j, row in enumerate(rows) if j != i]
        cof = _det_exact(minor)
        if (i + k - 1) % 2 == 1:
            cof = -cof
        coeffs.append((int(idx), -cof))
    ones = [row[:-1] + [Fraction(1)] for row in rows]
    coeffs.append((int(query_index), _det_exact(ones)))
    coeffs.sort()
    for _, coeff in coeffs:
        if coeff:
            return parity * o * (1 if coeff > 0 else -1)
    raise DegeneracyError(
        "perturbation failed to resolve cospherical tie", simplex_points
    )


def _det_exact(rows):
    """Exact rational determinant (small matrices only)."""
    k = len(rows)
    if k == 0:
        return Fraction(1)
    m = [[Fraction(x) for x in row] for row in rows]
    det = Fraction(1)
    sign = 1
    for col in range(k):
        pivot = None
        for r in range(col, k):
            if m[r][col] != 0:
                pivot = r
                break
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            sign = -sign
        det *= m[col][col]
        inv = m[col][col]
        for r in range(col + 1, k):
            if m[r][col] != 0:
                factor = m[r][col] / inv
                for c in range(col, k):
                    m[r][c] -= factor * m[col][c]
    return det * sign
