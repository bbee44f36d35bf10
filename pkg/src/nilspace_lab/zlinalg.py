"""Exact integer linear algebra: Smith normal form diagonal and subgroup orders.

Everything runs on plain Python ints, so there is no overflow and no floating
point anywhere.  Matrices at desk scale are tiny (tens of rows/columns).
"""
from __future__ import annotations

import math


def smith_diagonal(matrix) -> list[int]:
    """Diagonal of the Smith normal form of an integer matrix.

    Returns the full diagonal of length min(rows, cols): nonnegative entries
    d_1, d_2, ... with d_i | d_{i+1}, padded with zeros past the rank.
    """
    a = [[int(x) for x in row] for row in matrix]
    nrows = len(a)
    ncols = len(a[0]) if nrows else 0
    size = min(nrows, ncols)
    diag = []
    t = 0
    while t < size:
        # pick the nonzero pivot of least magnitude in the remaining block
        pivot = None
        for i in range(t, nrows):
            for j in range(t, ncols):
                v = a[i][j]
                if v != 0 and (pivot is None or abs(v) < abs(a[pivot[0]][pivot[1]])):
                    pivot = (i, j)
        if pivot is None:
            break
        pi, pj = pivot
        a[t], a[pi] = a[pi], a[t]
        for row in a:
            row[t], row[pj] = row[pj], row[t]
        # clear row and column t; swapping a nonzero remainder back in shrinks
        # |a[t][t]| every round, so this terminates
        while True:
            dirty = False
            for i in range(t + 1, nrows):
                if a[i][t]:
                    q = a[i][t] // a[t][t]
                    for j in range(t, ncols):
                        a[i][j] -= q * a[t][j]
                    if a[i][t]:
                        a[t], a[i] = a[i], a[t]
                        dirty = True
            for j in range(t + 1, ncols):
                if a[t][j]:
                    q = a[t][j] // a[t][t]
                    for i in range(t, nrows):
                        a[i][j] -= q * a[i][t]
                    if a[t][j]:
                        for i in range(t, nrows):
                            a[i][t], a[i][j] = a[i][j], a[i][t]
                        dirty = True
            if not dirty:
                break
        # pivot must divide the rest of the block
        p = a[t][t]
        offender = None
        for i in range(t + 1, nrows):
            for j in range(t + 1, ncols):
                if a[i][j] % p:
                    offender = i
                    break
            if offender is not None:
                break
        if offender is not None:
            for j in range(t, ncols):
                a[t][j] += a[offender][j]
            continue
        diag.append(abs(p))
        t += 1
    diag.extend([0] * (size - len(diag)))
    return diag


def subgroup_order(generators, moduli) -> int:
    """Order of the subgroup of prod_i Z_{moduli[i]} generated by the given vectors.

    The subgroup corresponds to the lattice spanned by the generators together
    with moduli[i]*e_i; its index in Z^m is the product of the Smith diagonal.
    """
    m = len(moduli)
    if m == 0:
        return 1
    rows = [list(g) for g in generators]
    for i, mod in enumerate(moduli):
        if mod < 1:
            raise ValueError("moduli must be positive")
        row = [0] * m
        row[i] = mod
        rows.append(row)
    diag = smith_diagonal(rows)
    index = math.prod(diag[:m])
    assert index != 0, "lattice contains the moduli lattice, so it is full rank"
    total = math.prod(moduli)
    assert total % index == 0
    return total // index
