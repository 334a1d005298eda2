#pragma once

#include <cstddef>

// Batched closed-form evaluations used by grid scans and sweeps. Every
// kernel has a scalar reference and SIMD variants that perform the same
// IEEE operations in the same order, so results agree bitwise.
namespace adgame::kernels {

enum class Backend { scalar, avx2, neon };

const char* to_string(Backend backend);
bool backend_available(Backend backend);
/// Backend used by the dispatching entry points below.
Backend active_backend();
/// Pins the dispatch to `backend`; throws Unsupported if the CPU lacks it.
void force_backend(Backend backend);
/// Returns to automatic selection (best available).
void reset_backend();

/// Steady shares of a targeted firm 1 against a nontargeted firm 2 that
/// spends u2 = v2 = sqrt(B2 / 2), as a function of firm 1's effort u1.
struct VersusNontargeted {
  double c1, c2;
  double rho1, rho2, sigma1;
  double B1, B2;
  double m;
};

/// Parameters of the instantaneous sales-rate objective of one firm with
/// v = sqrt(B - u^2); `loss` is the u-independent outflow s_k (c_k + ...).
struct RateArgs {
  double rho, sigma, B;
  double epsilon;   // market potential
  double N;         // non-firm market m - s_k
  double loss;
};

struct Table {
  void (*steady_shares)(const VersusNontargeted& p, std::size_t n, const double* u1, double* s1,
                        double* s2);
  void (*dominance_margin)(std::size_t n, const double* c, const double* u1, double* out);
  void (*tier_potential)(double c1, double c2, std::size_t n, const double* u1, double* eps);
  void (*allocation_fraction)(std::size_t n, const double* rho, const double* sigma,
                              const double* X, double* fraction);
  void (*rate_scan)(const RateArgs& p, std::size_t n, const double* u, double* rate);
  void (*duopoly_max_real_eig)(std::size_t n, const double* a1, const double* b1,
                               const double* a2, const double* b2, const double* c1,
                               const double* c2, double* out);
};

/// Kernel table of a specific backend; throws Unsupported if unavailable.
const Table& table(Backend backend);

// Dispatching entry points.

/// s1, s2 for each u1 in [0, sqrt(B1)].
void steady_shares(const VersusNontargeted& p, std::size_t n, const double* u1, double* s1,
                   double* s2);
/// Sign of s1 - s2 for equal decay c under the normalized parameters
/// (rho = sigma = m = B = 1): positive means firm 1 leads.
void dominance_margin(std::size_t n, const double* c, const double* u1, double* out);
/// Equilibrium potential of a two-tier line with sigma = rho1 = m = 1 and
/// v = sqrt(1 - u1^2).
void tier_potential(double c1, double c2, std::size_t n, const double* u1, double* eps);
/// Optimal share u^2 / B of the budget aimed at competitors' customers.
void allocation_fraction(std::size_t n, const double* rho, const double* sigma, const double* X,
                         double* fraction);
void rate_scan(const RateArgs& p, std::size_t n, const double* u, double* rate);
/// Largest real part among the two eigenvalues of the targeted duopoly
/// Jacobian with a_k = rho_k u_k, b_k = sigma_k v_k.
void duopoly_max_real_eig(std::size_t n, const double* a1, const double* b1, const double* a2,
                          const double* b2, const double* c1, const double* c2, double* out);

}  // namespace adgame::kernels
