#include "formulas.hpp"
#include "tables.hpp"

namespace adgame::kernels {

namespace {

void steady_shares_scalar(const VersusNontargeted& p, std::size_t n, const double* u1, double* s1,
                          double* s2) {
  const double b = p.rho2 * std::sqrt(p.B2 * 0.5);
  for (std::size_t i = 0; i < n; ++i) ref::steady_shares(p, b, u1[i], s1[i], s2[i]);
}

void dominance_margin_scalar(std::size_t n, const double* c, const double* u1, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = ref::dominance_margin(c[i], u1[i]);
}

void tier_potential_scalar(double c1, double c2, std::size_t n, const double* u1, double* eps) {
  const double c_sum = c1 + c2;
  for (std::size_t i = 0; i < n; ++i) eps[i] = ref::tier_potential(c1, c_sum, c2, u1[i]);
}

void allocation_fraction_scalar(std::size_t n, const double* rho, const double* sigma,
                                const double* X, double* fraction) {
  for (std::size_t i = 0; i < n; ++i) fraction[i] = ref::allocation_fraction(rho[i], sigma[i], X[i]);
}

void rate_scan_scalar(const RateArgs& p, std::size_t n, const double* u, double* rate) {
  const double n_minus_eps = p.N - p.epsilon;
  for (std::size_t i = 0; i < n; ++i) rate[i] = ref::rate(p, n_minus_eps, u[i]);
}

void duopoly_max_real_eig_scalar(std::size_t n, const double* a1, const double* b1,
                                 const double* a2, const double* b2, const double* c1,
                                 const double* c2, double* out) {
  for (std::size_t i = 0; i < n; ++i)
    out[i] = ref::duopoly_max_real_eig(a1[i], b1[i], a2[i], b2[i], c1[i], c2[i]);
}

}  // namespace

const Table scalar_table{steady_shares_scalar,      dominance_margin_scalar,
                         tier_potential_scalar,     allocation_fraction_scalar,
                         rate_scan_scalar,          duopoly_max_real_eig_scalar};

}  // namespace adgame::kernels
