"""Pure-Python simplex tableau over :class:`fractions.Fraction`.

Reference backend for :mod:`clinch._simplex_ext`; both expose the same
``Tableau`` interface and must agree bit-for-bit.
"""

from fractions import Fraction

BACKEND = "python"

_ZERO = Fraction(0)


class Tableau:
    def __init__(self, rows):
        self._t = [[Fraction(x) for x in row] for row in rows]
        self.nrows = len(self._t)
        self.ncols = len(self._t[0]) if self._t else 0

    def get(self, r, c):
        return self._t[r][c]

    def row(self, r):
        return list(self._t[r])

    def pivot(self, r, c):
        t = self._t
        prow = t[r]
        piv = prow[c]
        if piv == 0:
            raise ZeroDivisionError("pivot on a zero entry")
        nz = [j for j, x in enumerate(prow) if x]
        for j in nz:
            prow[j] = prow[j] / piv
        for i in range(self.nrows):
            if i == r:
                continue
            row = t[i]
            f = row[c]
            if not f:
                continue
            for j in nz:
                row[j] = row[j] - f * prow[j]

    def first_nonzero(self, r, limit):
        row = self._t[r]
        for j in range(limit):
            if row[j]:
                return j
        return -1

    def entering(self, obj_row, limit):
        row = self._t[obj_row]
        for j in range(limit):
            if row[j] < 0:
                return j
        return -1

    def leaving(self, col, basis, nconstr):
        t = self._t
        rhs = self.ncols - 1
        best = -1
        best_ratio = None
        for r in range(nconstr):
            a = t[r][col]
            if a <= 0:
                continue
            ratio = t[r][rhs] / a
            if (best < 0 or ratio < best_ratio
                    or (ratio == best_ratio and basis[r] < basis[best])):
                best, best_ratio = r, ratio
        return best
