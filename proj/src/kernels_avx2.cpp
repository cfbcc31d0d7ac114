#if defined(__x86_64__) || defined(_M_X64)

#include "itinerant/kernels.hpp"

#include <cmath>
#include <immintrin.h>

// Compiled with -mavx2 -mfma; only reachable after the CPUID check in
// kernels_dispatch.cpp.

namespace itinerant::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

void dense_matvec_avx2(const double* a, int rows, int cols, const double* x,
                       double* y) {
    const int tail = cols & 3;
    const int main = cols - tail;
    for (int i = 0; i < rows; ++i) {
        const double* row = a + static_cast<std::size_t>(i) * cols;
        __m256d acc = _mm256_setzero_pd();
        for (int j = 0; j < main; j += 4)
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(row + j),
                                  _mm256_loadu_pd(x + j), acc);
        double s = hsum(acc);
        for (int j = main; j < cols; ++j)
            s += row[j] * x[j];
        y[i] = s;
    }
}

void csr_matvec_avx2(const CsrMatrix& a, const double* x, double* y) {
    for (int i = 0; i < a.rows; ++i) {
        const int begin = a.row_ptr[i];
        const int end = a.row_ptr[i + 1];
        const int len = end - begin;
        const int main = begin + (len & ~3);
        __m256d acc = _mm256_setzero_pd();
        for (int k = begin; k < main; k += 4) {
            __m128i idx =
                _mm_loadu_si128(reinterpret_cast<const __m128i*>(&a.col_idx[k]));
            __m256d xv = _mm256_i32gather_pd(x, idx, 8);
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(&a.values[k]), xv, acc);
        }
        double s = hsum(acc);
        for (int k = main; k < end; ++k)
            s += a.values[k] * x[a.col_idx[k]];
        y[i] = s;
    }
}

double dot_avx2(const double* a, const double* b, int n) {
    const int main = n & ~3;
    __m256d acc = _mm256_setzero_pd();
    for (int i = 0; i < main; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i),
                              acc);
    double s = hsum(acc);
    for (int i = main; i < n; ++i)
        s += a[i] * b[i];
    return s;
}

void axpy_avx2(double alpha, const double* x, double* y, int n) {
    const int main = n & ~3;
    const __m256d av = _mm256_set1_pd(alpha);
    for (int i = 0; i < main; i += 4) {
        __m256d yv = _mm256_loadu_pd(y + i);
        yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv);
        _mm256_storeu_pd(y + i, yv);
    }
    for (int i = main; i < n; ++i)
        y[i] += alpha * x[i];
}

// tanh stays scalar (no exact vector tanh); the surrounding arithmetic is
// vectorized by the compiler for this TU.
void leaky_tanh_update_avx2(double* x, const double* drive, int n,
                            double leak) {
    for (int i = 0; i < n; ++i)
        x[i] += leak * (std::tanh(drive[i]) - x[i]);
}

} // namespace

const Ops avx2_ops = {
    "avx2",    dense_matvec_avx2, csr_matvec_avx2,
    dot_avx2,  axpy_avx2,         leaky_tanh_update_avx2,
};

} // namespace itinerant::kernels

#endif
