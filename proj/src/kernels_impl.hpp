#pragma once

#include <cstddef>

namespace lsw::kernels::detail {

void cbrt_avx2(const double* x, double* out, std::size_t n);
double cells_xm23_avx2(const double* x, const double* w, std::size_t n);
double cells_xm13_avx2(const double* x, const double* w, std::size_t n);
void rk4_drift_avx2(double* x, std::size_t n, const double* kappa,
                    std::size_t substeps, double h);

// Per-cell closed forms shared by the scalar path and the SIMD tails.
// u = cbrt(a), v = cbrt(b); both integrals are written without cancellation.
inline double cell_xm23(double a, double b, double u, double v, double wa, double wb) {
    double s = u * u + u * v + v * v;
    if (s == 0.0) return 0.0;
    double d = (b - a) / s;  // v - u
    double theta = (v * v + 2.0 * u * v + 3.0 * u * u) / (4.0 * s);
    return 3.0 * d * (wa + (wb - wa) * theta);
}

inline double cell_xm13(double a, double b, double u, double v, double wa, double wb) {
    double s = u * u + u * v + v * v;
    if (s == 0.0) return 0.0;
    double d = (b - a) / s;
    double p = 2.0 * v * v * v + 4.0 * u * v * v + 6.0 * u * u * v + 3.0 * u * u * u;
    return 1.5 * d * (u + v) * wa + 0.3 * d * (wb - wa) * p / s;
}

}  // namespace lsw::kernels::detail
