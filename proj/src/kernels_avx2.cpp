// AVX2/FMA variants of the solver kernels. Compiled with -mavx2 -mfma and only
// reached through the run-time dispatch in kernels.cpp.
#include <immintrin.h>

#include <cmath>
#include <cstdint>

#include "kernels_impl.hpp"

namespace lsw::kernels::detail {
namespace {

// Cube root of 4 doubles. Seed from the exponent bits (divide the high word by
// three, the classic fdlibm trick, done in double arithmetic since AVX2 has no
// 64-bit integer conversions), then three Halley steps.
inline __m256d cbrt4(__m256d x) {
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    const __m256d sign = _mm256_and_pd(x, sign_mask);
    const __m256d ax = _mm256_andnot_pd(sign_mask, x);

    const __m256i magic_i = _mm256_set1_epi64x(0x4330000000000000LL);
    const __m256d magic = _mm256_set1_pd(4503599627370496.0);  // 2^52
    __m256i hi = _mm256_srli_epi64(_mm256_castpd_si256(ax), 32);
    __m256d hd = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(hi, magic_i)), magic);
    __m256d q = _mm256_floor_pd(_mm256_div_pd(hd, _mm256_set1_pd(3.0)));
    q = _mm256_add_pd(q, _mm256_set1_pd(715094163.0));
    __m256i qi = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(q, magic)), magic_i);
    __m256d t = _mm256_castsi256_pd(_mm256_slli_epi64(qi, 32));

    const __m256d two = _mm256_set1_pd(2.0);
    for (int it = 0; it < 3; ++it) {
        __m256d t3 = _mm256_mul_pd(_mm256_mul_pd(t, t), t);
        __m256d num = _mm256_fmadd_pd(two, ax, t3);
        __m256d den = _mm256_fmadd_pd(two, t3, ax);
        t = _mm256_div_pd(_mm256_mul_pd(t, num), den);
    }
    const __m256d zero = _mm256_setzero_pd();
    t = _mm256_blendv_pd(t, zero, _mm256_cmp_pd(ax, zero, _CMP_EQ_OQ));
    return _mm256_or_pd(t, sign);
}

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

}  // namespace

void cbrt_avx2(const double* x, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, cbrt4(_mm256_loadu_pd(x + i)));
    for (; i < n; ++i) out[i] = std::cbrt(x[i]);
}

double cells_xm23_avx2(const double* x, const double* w, std::size_t n) {
    if (n < 2) return 0.0;
    const std::size_t cells = n - 1;
    __m256d acc = _mm256_setzero_pd();
    const __m256d two = _mm256_set1_pd(2.0), three = _mm256_set1_pd(3.0);
    const __m256d quarter = _mm256_set1_pd(0.25), zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= cells; i += 4) {
        __m256d a = _mm256_loadu_pd(x + i), b = _mm256_loadu_pd(x + i + 1);
        __m256d wa = _mm256_loadu_pd(w + i), wb = _mm256_loadu_pd(w + i + 1);
        __m256d u = cbrt4(a), v = cbrt4(b);
        __m256d uu = _mm256_mul_pd(u, u), vv = _mm256_mul_pd(v, v), uv = _mm256_mul_pd(u, v);
        __m256d s = _mm256_add_pd(_mm256_add_pd(uu, uv), vv);
        __m256d live = _mm256_cmp_pd(s, zero, _CMP_NEQ_OQ);
        __m256d ss = _mm256_blendv_pd(_mm256_set1_pd(1.0), s, live);
        __m256d d = _mm256_div_pd(_mm256_sub_pd(b, a), ss);
        __m256d tnum = _mm256_fmadd_pd(three, uu, _mm256_fmadd_pd(two, uv, vv));
        __m256d theta = _mm256_mul_pd(quarter, _mm256_div_pd(tnum, ss));
        __m256d mix = _mm256_fmadd_pd(_mm256_sub_pd(wb, wa), theta, wa);
        __m256d cell = _mm256_mul_pd(_mm256_mul_pd(three, d), mix);
        acc = _mm256_add_pd(acc, _mm256_and_pd(cell, live));
    }
    double sum = hsum(acc);
    for (; i < cells; ++i)
        sum += cell_xm23(x[i], x[i + 1], std::cbrt(x[i]), std::cbrt(x[i + 1]), w[i], w[i + 1]);
    return sum;
}

double cells_xm13_avx2(const double* x, const double* w, std::size_t n) {
    if (n < 2) return 0.0;
    const std::size_t cells = n - 1;
    __m256d acc = _mm256_setzero_pd();
    const __m256d zero = _mm256_setzero_pd();
    const __m256d c15 = _mm256_set1_pd(1.5), c03 = _mm256_set1_pd(0.3);
    const __m256d c2 = _mm256_set1_pd(2.0), c3 = _mm256_set1_pd(3.0);
    const __m256d c4 = _mm256_set1_pd(4.0), c6 = _mm256_set1_pd(6.0);
    std::size_t i = 0;
    for (; i + 4 <= cells; i += 4) {
        __m256d a = _mm256_loadu_pd(x + i), b = _mm256_loadu_pd(x + i + 1);
        __m256d wa = _mm256_loadu_pd(w + i), wb = _mm256_loadu_pd(w + i + 1);
        __m256d u = cbrt4(a), v = cbrt4(b);
        __m256d uu = _mm256_mul_pd(u, u), vv = _mm256_mul_pd(v, v), uv = _mm256_mul_pd(u, v);
        __m256d s = _mm256_add_pd(_mm256_add_pd(uu, uv), vv);
        __m256d live = _mm256_cmp_pd(s, zero, _CMP_NEQ_OQ);
        __m256d ss = _mm256_blendv_pd(_mm256_set1_pd(1.0), s, live);
        __m256d d = _mm256_div_pd(_mm256_sub_pd(b, a), ss);
        // p = 2v^3 + 4uv^2 + 6u^2v + 3u^3
        __m256d p = _mm256_mul_pd(c2, _mm256_mul_pd(vv, v));
        p = _mm256_fmadd_pd(c4, _mm256_mul_pd(u, vv), p);
        p = _mm256_fmadd_pd(c6, _mm256_mul_pd(uu, v), p);
        p = _mm256_fmadd_pd(c3, _mm256_mul_pd(uu, u), p);
        __m256d t0 = _mm256_mul_pd(_mm256_mul_pd(c15, d), _mm256_mul_pd(_mm256_add_pd(u, v), wa));
        __m256d t1 = _mm256_mul_pd(_mm256_mul_pd(c03, d),
                                   _mm256_div_pd(_mm256_mul_pd(_mm256_sub_pd(wb, wa), p), ss));
        acc = _mm256_add_pd(acc, _mm256_and_pd(_mm256_add_pd(t0, t1), live));
    }
    double sum = hsum(acc);
    for (; i < cells; ++i)
        sum += cell_xm13(x[i], x[i + 1], std::cbrt(x[i]), std::cbrt(x[i + 1]), w[i], w[i + 1]);
    return sum;
}

void rk4_drift_avx2(double* x, std::size_t n, const double* kappa,
                    std::size_t substeps, double h) {
    const __m256d one = _mm256_set1_pd(1.0), two = _mm256_set1_pd(2.0);
    const __m256d vh = _mm256_set1_pd(h), vh2 = _mm256_set1_pd(0.5 * h);
    const __m256d vh6 = _mm256_set1_pd(h / 6.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d xi = _mm256_loadu_pd(x + i);
        for (std::size_t k = 0; k < substeps; ++k) {
            __m256d ka = _mm256_set1_pd(kappa[2 * k]);
            __m256d km = _mm256_set1_pd(kappa[2 * k + 1]);
            __m256d kb = _mm256_set1_pd(kappa[2 * k + 2]);
            __m256d k1 = _mm256_fmsub_pd(ka, cbrt4(xi), one);
            __m256d k2 = _mm256_fmsub_pd(km, cbrt4(_mm256_fmadd_pd(vh2, k1, xi)), one);
            __m256d k3 = _mm256_fmsub_pd(km, cbrt4(_mm256_fmadd_pd(vh2, k2, xi)), one);
            __m256d k4 = _mm256_fmsub_pd(kb, cbrt4(_mm256_fmadd_pd(vh, k3, xi)), one);
            __m256d sum = _mm256_add_pd(k1, k4);
            sum = _mm256_fmadd_pd(two, _mm256_add_pd(k2, k3), sum);
            xi = _mm256_fmadd_pd(vh6, sum, xi);
        }
        _mm256_storeu_pd(x + i, xi);
    }
    const double h2 = 0.5 * h, h6 = h / 6.0;
    for (; i < n; ++i) {
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

}  // namespace lsw::kernels::detail
