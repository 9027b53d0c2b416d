#pragma once

#include <cstddef>

// Hot loops of the characteristic solver. Each kernel has a scalar reference
// implementation and, on x86-64, an AVX2/FMA variant picked at run time.
namespace lsw::kernels {

struct Table {
    const char* name;
    // out[i] = cbrt(x[i]); sign preserving.
    void (*cbrt)(const double* x, double* out, std::size_t n);
    // Sum over the cells [x[i], x[i+1]] of the exact integral of x^{-2/3} w(x)
    // for the piecewise-linear w through (x[i], w[i]). Requires 0 <= x[0].
    double (*cells_xm23)(const double* x, const double* w, std::size_t n);
    // Same with the weight x^{-1/3}.
    double (*cells_xm13)(const double* x, const double* w, std::size_t n);
    // Classical RK4 for dx/ds = -1 + kappa(s) * cbrt(x) over `substeps` steps
    // of size h. kappa holds 2*substeps+1 values at the half-step points.
    void (*rk4_drift)(double* x, std::size_t n, const double* kappa,
                      std::size_t substeps, double h);
};

const Table& scalar();
// nullptr when the CPU or the build lacks AVX2+FMA.
const Table* avx2();
// Chosen once: AVX2 when available unless LSW_FORCE_SCALAR is set.
const Table& active();

}  // namespace lsw::kernels
