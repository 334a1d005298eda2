#include <atomic>
#include <string>

#include "adgame/error.hpp"
#include "adgame/kernels.hpp"
#include "tables.hpp"

namespace adgame::kernels {

namespace {

// -1: automatic; otherwise a Backend value.
std::atomic<int> forced{-1};

Backend best_available() {
  if (backend_available(Backend::avx2)) return Backend::avx2;
  if (backend_available(Backend::neon)) return Backend::neon;
  return Backend::scalar;
}

const Table& active_table() { return table(active_backend()); }

}  // namespace

const char* to_string(Backend backend) {
  switch (backend) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
    case Backend::neon: return "neon";
  }
  return "?";
}

bool backend_available(Backend backend) {
  switch (backend) {
    case Backend::scalar: return true;
    case Backend::avx2:
#if defined(__x86_64__) || defined(__i386__)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Backend::neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Backend active_backend() {
  const int f = forced.load(std::memory_order_relaxed);
  return f < 0 ? best_available() : static_cast<Backend>(f);
}

void force_backend(Backend backend) {
  if (!backend_available(backend))
    throw Unsupported(std::string("kernel backend not available on this CPU: ") +
                      to_string(backend));
  forced.store(static_cast<int>(backend), std::memory_order_relaxed);
}

void reset_backend() { forced.store(-1, std::memory_order_relaxed); }

const Table& table(Backend backend) {
  if (!backend_available(backend))
    throw Unsupported(std::string("kernel backend not available on this CPU: ") +
                      to_string(backend));
  switch (backend) {
#if defined(__x86_64__) || defined(__i386__)
    case Backend::avx2: return avx2_table;
#endif
#if defined(__aarch64__)
    case Backend::neon: return neon_table;
#endif
    default: return scalar_table;
  }
}

void steady_shares(const VersusNontargeted& p, std::size_t n, const double* u1, double* s1,
                   double* s2) {
  active_table().steady_shares(p, n, u1, s1, s2);
}

void dominance_margin(std::size_t n, const double* c, const double* u1, double* out) {
  active_table().dominance_margin(n, c, u1, out);
}

void tier_potential(double c1, double c2, std::size_t n, const double* u1, double* eps) {
  active_table().tier_potential(c1, c2, n, u1, eps);
}

void allocation_fraction(std::size_t n, const double* rho, const double* sigma, const double* X,
                         double* fraction) {
  active_table().allocation_fraction(n, rho, sigma, X, fraction);
}

void rate_scan(const RateArgs& p, std::size_t n, const double* u, double* rate) {
  active_table().rate_scan(p, n, u, rate);
}

void duopoly_max_real_eig(std::size_t n, const double* a1, const double* b1, const double* a2,
                          const double* b2, const double* c1, const double* c2, double* out) {
  active_table().duopoly_max_real_eig(n, a1, b1, a2, b2, c1, c2, out);
}

}  // namespace adgame::kernels
