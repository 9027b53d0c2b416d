#include "lsw/kernels.hpp"

#include <cmath>
#include <cstdlib>

#include "kernels_impl.hpp"

namespace lsw::kernels {
namespace {

void cbrt_scalar(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::cbrt(x[i]);
}

double cells_xm23_scalar(const double* x, const double* w, std::size_t n) {
    if (n < 2) return 0.0;
    double sum = 0.0;
    double u = std::cbrt(x[0]);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double v = std::cbrt(x[i + 1]);
        sum += detail::cell_xm23(x[i], x[i + 1], u, v, w[i], w[i + 1]);
        u = v;
    }
    return sum;
}

double cells_xm13_scalar(const double* x, const double* w, std::size_t n) {
    if (n < 2) return 0.0;
    double sum = 0.0;
    double u = std::cbrt(x[0]);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double v = std::cbrt(x[i + 1]);
        sum += detail::cell_xm13(x[i], x[i + 1], u, v, w[i], w[i + 1]);
        u = v;
    }
    return sum;
}

void rk4_drift_scalar(double* x, std::size_t n, const double* kappa,
                      std::size_t substeps, double h) {
    const double h2 = 0.5 * h, h6 = h / 6.0;
    for (std::size_t i = 0; i < n; ++i) {
        double xi = x[i];
        for (std::size_t k = 0; k < substeps; ++k) {
            double ka = kappa[2 * k], km = kappa[2 * k + 1], kb = kappa[2 * k + 2];
            double k1 = -1.0 + ka * std::cbrt(xi);
            double k2 = -1.0 + km * std::cbrt(xi + h2 * k1);
            double k3 = -1.0 + km * std::cbrt(xi + h2 * k2);
            double k4 = -1.0 + kb * std::cbrt(xi + h * k3);
            xi += h6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        x[i] = xi;
    }
}

const Table kScalar{"scalar", cbrt_scalar, cells_xm23_scalar, cells_xm13_scalar,
                    rk4_drift_scalar};

#if defined(LSW_HAVE_AVX2_TU)
const Table kAvx2{"avx2", detail::cbrt_avx2, detail::cells_xm23_avx2,
                  detail::cells_xm13_avx2, detail::rk4_drift_avx2};

bool cpu_has_avx2() {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#endif

}  // namespace

const Table& scalar() { return kScalar; }

const Table* avx2() {
#if defined(LSW_HAVE_AVX2_TU)
    static const bool ok = cpu_has_avx2();
    return ok ? &kAvx2 : nullptr;
#else
    return nullptr;
#endif
}

const Table& active() {
    static const Table* chosen = [] {
        const char* force = std::getenv("LSW_FORCE_SCALAR");
        if (force && *force && *force != '0') return &kScalar;
        const Table* t = avx2();
        return t ? t : &kScalar;
    }();
    return *chosen;
}

}  // namespace lsw::kernels
