#pragma once

#include <cstddef>

// Raw Fortran LAPACK bindings. Trailing size_t arguments are the hidden
// character-length parameters gfortran expects.
extern "C" {

void dgees_(const char* jobvs, const char* sort, int (*select)(const double*, const double*),
            const int* n, double* a, const int* lda, int* sdim, double* wr, double* wi, double* vs,
            const int* ldvs, double* work, const int* lwork, int* bwork, int* info, std::size_t,
            std::size_t);

void dtrsen_(const char* job, const char* compq, const int* select, const int* n, double* t,
             const int* ldt, double* q, const int* ldq, double* wr, double* wi, int* m, double* s,
             double* sep, double* work, const int* lwork, int* iwork, const int* liwork, int* info,
             std::size_t, std::size_t);

void dtrsyl_(const char* trana, const char* tranb, const int* isgn, const int* m, const int* n,
             const double* a, const int* lda, const double* b, const int* ldb, double* c,
             const int* ldc, double* scale, int* info, std::size_t, std::size_t);
}
