#include "curvcone/kernels.hpp"

namespace curvcone::kernels {
namespace {

double dot_ref(const double* x, const double* y, std::size_t len) {
    double acc = 0.0;
    for (std::size_t i = 0; i < len; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy_ref(double alpha, const double* x, double* y, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) y[i] += alpha * x[i];
}

void gemv_ref(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y) {
    for (std::size_t r = 0; r < rows; ++r) y[r] = dot_ref(m + r * cols, x, cols);
}

void gram_ref(const double* a, std::size_t rows, std::size_t cols, double* out) {
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = r; c < rows; ++c) {
            const double v = dot_ref(a + r * cols, a + c * cols, cols);
            out[r * rows + c] = v;
            out[c * rows + r] = v;
        }
    }
}

}  // namespace

const Table& scalar_table() {
    static const Table table{"scalar", &dot_ref, &axpy_ref, &gemv_ref, &gram_ref};
    return table;
}

}  // namespace curvcone::kernels
