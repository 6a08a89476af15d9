#pragma once

// Dense double-precision inner loops used by the tensor algebra and the frame
// search. Every routine has a portable scalar reference version; an AVX2/FMA
// variant is compiled separately and picked at startup when the CPU supports it.
//
// Set CURVCONE_KERNELS=scalar in the environment to force the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace curvcone::kernels {

struct Table {
    const char* name;
    // sum_i x[i] * y[i]
    double (*dot)(const double* x, const double* y, std::size_t len);
    // y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t len);
    // y = M x for a row-major rows x cols matrix
    void (*gemv)(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y);
    // out = A A^T (rows x rows, row-major) for a row-major rows x cols matrix A
    void (*gram)(const double* a, std::size_t rows, std::size_t cols, double* out);
};

const Table& scalar_table();

// nullptr when the variant was not compiled in or the CPU lacks AVX2+FMA.
const Table* avx2_table();

// Table used by the library. Chosen once on first use.
const Table& active();

// Override the active table: "scalar", "avx2" or "auto". Returns false when
// the requested variant is unavailable (the active table is left unchanged).
bool select(std::string_view name);

inline double dot(std::span<const double> x, std::span<const double> y) {
    return active().dot(x.data(), y.data(), x.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace curvcone::kernels
