#pragma once

// Arithmetic kernels for the simulation inner loop.
//
// Every kernel has a scalar reference implementation and, where the target
// supports it, an AVX2/FMA variant. The active implementation table is chosen
// once at startup from CPUID and can be overridden with select() (used by the
// equivalence tests and the --kernels CLI flag). All variants are individually
// deterministic; scalar and SIMD results may differ in the last few ulps
// because of accumulation order.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace itinerant::kernels {

// Compressed sparse row matrix, indices sorted within each row.
struct CsrMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<int> row_ptr;   // size rows+1
    std::vector<int> col_idx;   // size nnz
    std::vector<double> values; // size nnz

    int nnz() const { return static_cast<int>(values.size()); }
};

struct Ops {
    const char* name;
    // y = A x, A row-major rows x cols
    void (*dense_matvec)(const double* a, int rows, int cols, const double* x,
                         double* y);
    // y = A x
    void (*csr_matvec)(const CsrMatrix& a, const double* x, double* y);
    double (*dot)(const double* a, const double* b, int n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, int n);
    // x += leak * (tanh(drive) - x), the discrete leaky-integrator update
    void (*leaky_tanh_update)(double* x, const double* drive, int n,
                              double leak);
};

extern const Ops scalar_ops;
#if defined(__x86_64__) || defined(_M_X64)
extern const Ops avx2_ops;
#endif

// The implementation table in use. Stable for the lifetime of the process
// unless select() is called.
const Ops& active();

// "auto", "scalar" or "avx2". Throws std::invalid_argument for unknown or
// unsupported names.
void select(const std::string& name);

std::vector<std::string> available();

} // namespace itinerant::kernels
