#include "formulas.hpp"
#include "tables.hpp"

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

#define ADGAME_AVX2 __attribute__((target("avx2")))

namespace adgame::kernels {

namespace {

ADGAME_AVX2 inline __m256d clamp0(__m256d x) { return _mm256_max_pd(x, _mm256_setzero_pd()); }

ADGAME_AVX2 void steady_shares_avx2(const VersusNontargeted& p, std::size_t n, const double* u1,
                                    double* s1, double* s2) {
  const double b_s = p.rho2 * std::sqrt(p.B2 * 0.5);
  const __m256d b = _mm256_set1_pd(b_s), rho1 = _mm256_set1_pd(p.rho1),
                sigma1 = _mm256_set1_pd(p.sigma1), B1 = _mm256_set1_pd(p.B1),
                c1 = _mm256_set1_pd(p.c1), c2 = _mm256_set1_pd(p.c2), m = _mm256_set1_pd(p.m);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d u = _mm256_loadu_pd(u1 + i);
    const __m256d a = _mm256_mul_pd(rho1, u);
    const __m256d w = _mm256_mul_pd(sigma1, _mm256_sqrt_pd(clamp0(_mm256_sub_pd(B1, _mm256_mul_pd(u, u)))));
    const __m256d ab_c2 = _mm256_add_pd(_mm256_add_pd(a, b), c2);
    const __m256d num =
        _mm256_mul_pd(m, _mm256_add_pd(_mm256_mul_pd(w, _mm256_add_pd(a, c2)), _mm256_mul_pd(a, b)));
    const __m256d den = _mm256_mul_pd(ab_c2, _mm256_add_pd(_mm256_add_pd(w, b), c1));
    _mm256_storeu_pd(s1 + i, _mm256_div_pd(num, den));
    _mm256_storeu_pd(s2 + i, _mm256_div_pd(_mm256_mul_pd(m, b), ab_c2));
  }
  for (; i < n; ++i) ref::steady_shares(p, b_s, u1[i], s1[i], s2[i]);
}

ADGAME_AVX2 void dominance_margin_avx2(std::size_t n, const double* c, const double* u1,
                                       double* out) {
  const __m256d one = _mm256_set1_pd(1.0), k = _mm256_set1_pd(ref::inv_sqrt2);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d cv = _mm256_loadu_pd(c + i), u = _mm256_loadu_pd(u1 + i);
    const __m256d root = _mm256_sqrt_pd(clamp0(_mm256_sub_pd(one, _mm256_mul_pd(u, u))));
    const __m256d lhs = _mm256_mul_pd(root, _mm256_sub_pd(_mm256_add_pd(cv, u), k));
    const __m256d rhs = _mm256_mul_pd(k, _mm256_sub_pd(_mm256_sub_pd(u, cv), k));
    _mm256_storeu_pd(out + i, _mm256_add_pd(lhs, rhs));
  }
  for (; i < n; ++i) out[i] = ref::dominance_margin(c[i], u1[i]);
}

ADGAME_AVX2 void tier_potential_avx2(double c1_s, double c2_s, std::size_t n, const double* u1,
                                     double* eps) {
  const double c_sum_s = c1_s + c2_s;
  const __m256d one = _mm256_set1_pd(1.0), c1 = _mm256_set1_pd(c1_s), c2 = _mm256_set1_pd(c2_s),
                c_sum = _mm256_set1_pd(c_sum_s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d u = _mm256_loadu_pd(u1 + i);
    const __m256d num = _mm256_mul_pd(c1, _mm256_add_pd(c2, u));
    const __m256d root = _mm256_sqrt_pd(clamp0(_mm256_sub_pd(one, _mm256_mul_pd(u, u))));
    const __m256d den =
        _mm256_add_pd(_mm256_mul_pd(_mm256_add_pd(c_sum, _mm256_add_pd(u, u)), root), num);
    _mm256_storeu_pd(eps + i, _mm256_div_pd(num, den));
  }
  for (; i < n; ++i) eps[i] = ref::tier_potential(c1_s, c_sum_s, c2_s, u1[i]);
}

ADGAME_AVX2 void allocation_fraction_avx2(std::size_t n, const double* rho, const double* sigma,
                                          const double* X, double* fraction) {
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(X + i);
    const __m256d rx = _mm256_mul_pd(_mm256_loadu_pd(rho + i), x);
    const __m256d sx = _mm256_mul_pd(_mm256_loadu_pd(sigma + i), _mm256_sub_pd(one, x));
    const __m256d rx2 = _mm256_mul_pd(rx, rx);
    _mm256_storeu_pd(fraction + i,
                     _mm256_div_pd(rx2, _mm256_add_pd(_mm256_mul_pd(sx, sx), rx2)));
  }
  for (; i < n; ++i) fraction[i] = ref::allocation_fraction(rho[i], sigma[i], X[i]);
}

ADGAME_AVX2 void rate_scan_avx2(const RateArgs& p, std::size_t n, const double* u, double* rate) {
  const double nme_s = p.N - p.epsilon;
  const __m256d B = _mm256_set1_pd(p.B), sigma = _mm256_set1_pd(p.sigma),
                rho = _mm256_set1_pd(p.rho), eps = _mm256_set1_pd(p.epsilon),
                nme = _mm256_set1_pd(nme_s), loss = _mm256_set1_pd(p.loss);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d uv = _mm256_loadu_pd(u + i);
    const __m256d v = _mm256_sqrt_pd(clamp0(_mm256_sub_pd(B, _mm256_mul_pd(uv, uv))));
    const __m256d gain = _mm256_add_pd(_mm256_mul_pd(_mm256_mul_pd(sigma, v), eps),
                                       _mm256_mul_pd(_mm256_mul_pd(rho, uv), nme));
    _mm256_storeu_pd(rate + i, _mm256_sub_pd(gain, loss));
  }
  for (; i < n; ++i) rate[i] = ref::rate(p, nme_s, u[i]);
}

ADGAME_AVX2 void duopoly_max_real_eig_avx2(std::size_t n, const double* a1, const double* b1,
                                           const double* a2, const double* b2, const double* c1,
                                           const double* c2, double* out) {
  const __m256d half = _mm256_set1_pd(-0.5), zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d A1 = _mm256_loadu_pd(a1 + i), B1 = _mm256_loadu_pd(b1 + i),
                  A2 = _mm256_loadu_pd(a2 + i), B2 = _mm256_loadu_pd(b2 + i),
                  C1 = _mm256_loadu_pd(c1 + i), C2 = _mm256_loadu_pd(c2 + i);
    const __m256d U = _mm256_add_pd(A1, A2);
    const __m256d V = _mm256_add_pd(B1, B2);
    const __m256d S = _mm256_add_pd(_mm256_add_pd(_mm256_add_pd(C1, C2), U), V);
    const __m256d D = _mm256_sub_pd(C1, C2);
    const __m256d w = _mm256_add_pd(_mm256_sub_pd(_mm256_sub_pd(A1, A2), B1), B2);
    const __m256d UmV = _mm256_sub_pd(U, V);
    const __m256d d = _mm256_add_pd(
        _mm256_sub_pd(_mm256_mul_pd(D, D), _mm256_mul_pd(_mm256_add_pd(D, D), w)),
        _mm256_mul_pd(UmV, UmV));
    const __m256d real_root = _mm256_mul_pd(half, _mm256_sub_pd(S, _mm256_sqrt_pd(d)));
    const __m256d complex_pair = _mm256_mul_pd(half, S);
    const __m256d mask = _mm256_cmp_pd(d, zero, _CMP_GE_OQ);
    _mm256_storeu_pd(out + i, _mm256_blendv_pd(complex_pair, real_root, mask));
  }
  for (; i < n; ++i) out[i] = ref::duopoly_max_real_eig(a1[i], b1[i], a2[i], b2[i], c1[i], c2[i]);
}

}  // namespace

const Table avx2_table{steady_shares_avx2,      dominance_margin_avx2,
                       tier_potential_avx2,     allocation_fraction_avx2,
                       rate_scan_avx2,          duopoly_max_real_eig_avx2};

}  // namespace adgame::kernels

#endif
