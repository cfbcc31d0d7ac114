#include "itinerant/kernels.hpp"

#include <cmath>

namespace itinerant::kernels {
namespace {

void dense_matvec_scalar(const double* a, int rows, int cols, const double* x,
                         double* y) {
    for (int i = 0; i < rows; ++i) {
        const double* row = a + static_cast<std::size_t>(i) * cols;
        double acc = 0.0;
        for (int j = 0; j < cols; ++j)
            acc += row[j] * x[j];
        y[i] = acc;
    }
}

void csr_matvec_scalar(const CsrMatrix& a, const double* x, double* y) {
    for (int i = 0; i < a.rows; ++i) {
        double acc = 0.0;
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
            acc += a.values[k] * x[a.col_idx[k]];
        y[i] = acc;
    }
}

double dot_scalar(const double* a, const double* b, int n) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
        acc += a[i] * b[i];
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, int n) {
    for (int i = 0; i < n; ++i)
        y[i] += alpha * x[i];
}

void leaky_tanh_update_scalar(double* x, const double* drive, int n,
                              double leak) {
    for (int i = 0; i < n; ++i)
        x[i] += leak * (std::tanh(drive[i]) - x[i]);
}

} // namespace

const Ops scalar_ops = {
    "scalar",        dense_matvec_scalar, csr_matvec_scalar,
    dot_scalar,      axpy_scalar,         leaky_tanh_update_scalar,
};

} // namespace itinerant::kernels
