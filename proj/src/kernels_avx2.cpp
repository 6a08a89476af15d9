// Compiled with -mavx2 -mfma. Nothing in here may run unless the dispatcher
// has confirmed CPU support, so keep this translation unit free of anything
// that could be inlined into other code.

#include <immintrin.h>

#include <cstddef>

#include "curvcone/kernels.hpp"

namespace curvcone::kernels {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* x, const double* y, std::size_t len) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= len; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    if (i + 4 <= len) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        i += 4;
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < len; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t len) {
    const __m256d a = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= len; i += 4) {
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(a, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (; i < len; ++i) y[i] += alpha * x[i];
}

void gemv_avx2(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y) {
    std::size_t r = 0;
    // four rows at a time share the loads of x
    for (; r + 4 <= rows; r += 4) {
        const double* m0 = m + r * cols;
        const double* m1 = m0 + cols;
        const double* m2 = m1 + cols;
        const double* m3 = m2 + cols;
        __m256d a0 = _mm256_setzero_pd();
        __m256d a1 = _mm256_setzero_pd();
        __m256d a2 = _mm256_setzero_pd();
        __m256d a3 = _mm256_setzero_pd();
        std::size_t c = 0;
        for (; c + 4 <= cols; c += 4) {
            const __m256d xv = _mm256_loadu_pd(x + c);
            a0 = _mm256_fmadd_pd(_mm256_loadu_pd(m0 + c), xv, a0);
            a1 = _mm256_fmadd_pd(_mm256_loadu_pd(m1 + c), xv, a1);
            a2 = _mm256_fmadd_pd(_mm256_loadu_pd(m2 + c), xv, a2);
            a3 = _mm256_fmadd_pd(_mm256_loadu_pd(m3 + c), xv, a3);
        }
        double s0 = hsum(a0), s1 = hsum(a1), s2 = hsum(a2), s3 = hsum(a3);
        for (; c < cols; ++c) {
            s0 += m0[c] * x[c];
            s1 += m1[c] * x[c];
            s2 += m2[c] * x[c];
            s3 += m3[c] * x[c];
        }
        y[r] = s0;
        y[r + 1] = s1;
        y[r + 2] = s2;
        y[r + 3] = s3;
    }
    for (; r < rows; ++r) y[r] = dot_avx2(m + r * cols, x, cols);
}

void gram_avx2(const double* a, std::size_t rows, std::size_t cols, double* out) {
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = r; c < rows; ++c) {
            const double v = dot_avx2(a + r * cols, a + c * cols, cols);
            out[r * rows + c] = v;
            out[c * rows + r] = v;
        }
    }
}

}  // namespace

namespace detail {
const Table& avx2_table_unchecked() {
    static const Table table{"avx2", &dot_avx2, &axpy_avx2, &gemv_avx2, &gram_avx2};
    return table;
}
}  // namespace detail

}  // namespace curvcone::kernels
