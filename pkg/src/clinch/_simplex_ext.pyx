# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""GMP-backed simplex tableau; drop-in replacement for ``_simplex_py.Tableau``.

Entries live in a flat ``mpq_t`` array so a pivot never touches a Python
object.  Values cross the boundary as decimal ``num/den`` strings.
"""

from fractions import Fraction
from libc.stdlib cimport malloc, free

BACKEND = "gmp"

cdef extern from "gmp.h":
    ctypedef struct __mpz_struct:
        pass
    ctypedef struct __mpq_struct:
        pass
    ctypedef __mpz_struct* mpz_ptr
    ctypedef __mpq_struct* mpq_ptr
    void mpq_init(mpq_ptr)
    void mpq_clear(mpq_ptr)
    int mpq_set_str(mpq_ptr, const char*, int)
    char* mpq_get_str(char*, int, mpq_ptr)
    void mpq_canonicalize(mpq_ptr)
    void mpq_set(mpq_ptr, mpq_ptr)
    void mpq_mul(mpq_ptr, mpq_ptr, mpq_ptr)
    void mpq_sub(mpq_ptr, mpq_ptr, mpq_ptr)
    void mpq_div(mpq_ptr, mpq_ptr, mpq_ptr)
    int mpq_sgn(mpq_ptr)
    int mpq_cmp(mpq_ptr, mpq_ptr)
    mpz_ptr mpq_numref(mpq_ptr)
    mpz_ptr mpq_denref(mpq_ptr)
    size_t mpz_sizeinbase(mpz_ptr, int)


cdef class Tableau:
    cdef __mpq_struct* data
    cdef int* nz
    cdef __mpq_struct tmp[3]
    cdef readonly int nrows
    cdef readonly int ncols

    def __cinit__(self, rows):
        cdef int i, j
        cdef bytes s
        self.data = NULL
        self.nz = NULL
        self.nrows = len(rows)
        self.ncols = len(rows[0]) if self.nrows else 0
        cdef Py_ssize_t size = <Py_ssize_t>self.nrows * self.ncols
        self.data = <__mpq_struct*>malloc(sizeof(__mpq_struct) * (size if size > 0 else 1))
        self.nz = <int*>malloc(sizeof(int) * (self.ncols if self.ncols > 0 else 1))
        if self.data == NULL or self.nz == NULL:
            raise MemoryError()
        for i in range(3):
            mpq_init(&self.tmp[i])
        for i in range(size):
            mpq_init(&self.data[i])
        for i in range(self.nrows):
            row = rows[i]
            if len(row) != self.ncols:
                raise ValueError("ragged tableau")
            for j in range(self.ncols):
                x = row[j]
                if x:
                    s = str(x).encode("ascii")
                    if mpq_set_str(&self.data[i * self.ncols + j], s, 10) != 0:
                        raise ValueError(f"not a rational: {x!r}")
                    mpq_canonicalize(&self.data[i * self.ncols + j])

    def __dealloc__(self):
        cdef Py_ssize_t i
        if self.data != NULL:
            for i in range(<Py_ssize_t>self.nrows * self.ncols):
                mpq_clear(&self.data[i])
            free(self.data)
            for i in range(3):
                mpq_clear(&self.tmp[i])
        if self.nz != NULL:
            free(self.nz)

    cdef inline mpq_ptr at(self, int r, int c):
        return &self.data[r * self.ncols + c]

    cdef object _to_fraction(self, mpq_ptr q):
        cdef size_t n = mpz_sizeinbase(mpq_numref(q), 10) + mpz_sizeinbase(mpq_denref(q), 10) + 3
        cdef char* buf = <char*>malloc(n)
        if buf == NULL:
            raise MemoryError()
        try:
            mpq_get_str(buf, 10, q)
            return Fraction(buf.decode("ascii"))
        finally:
            free(buf)

    def get(self, int r, int c):
        if not (0 <= r < self.nrows and 0 <= c < self.ncols):
            raise IndexError((r, c))
        return self._to_fraction(self.at(r, c))

    def row(self, int r):
        return [self.get(r, c) for c in range(self.ncols)]

    def pivot(self, int r, int c):
        cdef int i, j, k, cnt = 0
        cdef mpq_ptr piv = &self.tmp[0]
        cdef mpq_ptr f = &self.tmp[1]
        cdef mpq_ptr prod = &self.tmp[2]
        if mpq_sgn(self.at(r, c)) == 0:
            raise ZeroDivisionError("pivot on a zero entry")
        mpq_set(piv, self.at(r, c))
        for j in range(self.ncols):
            if mpq_sgn(self.at(r, j)) != 0:
                self.nz[cnt] = j
                cnt += 1
        for k in range(cnt):
            j = self.nz[k]
            mpq_div(self.at(r, j), self.at(r, j), piv)
        for i in range(self.nrows):
            if i == r or mpq_sgn(self.at(i, c)) == 0:
                continue
            mpq_set(f, self.at(i, c))
            for k in range(cnt):
                j = self.nz[k]
                mpq_mul(prod, f, self.at(r, j))
                mpq_sub(self.at(i, j), self.at(i, j), prod)

    def first_nonzero(self, int r, int limit):
        cdef int j
        for j in range(limit):
            if mpq_sgn(self.at(r, j)) != 0:
                return j
        return -1

    def entering(self, int obj_row, int limit):
        cdef int j
        for j in range(limit):
            if mpq_sgn(self.at(obj_row, j)) < 0:
                return j
        return -1

    def leaving(self, int col, basis, int nconstr):
        cdef int r, best = -1
        cdef int rhs = self.ncols - 1
        cdef int cmp
        cdef mpq_ptr ratio = &self.tmp[0]
        cdef mpq_ptr best_ratio = &self.tmp[1]
        for r in range(nconstr):
            if mpq_sgn(self.at(r, col)) <= 0:
                continue
            mpq_div(ratio, self.at(r, rhs), self.at(r, col))
            if best < 0:
                best = r
                mpq_set(best_ratio, ratio)
                continue
            cmp = mpq_cmp(ratio, best_ratio)
            if cmp < 0 or (cmp == 0 and basis[r] < basis[best]):
                best = r
                mpq_set(best_ratio, ratio)
        return best
