#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace structkan {

// Smoothness order: a finite integer k >= 0 or "infinite" (analytic class).
struct Smoothness {
  bool infinite = false;
  std::int64_t order = 0;

  static Smoothness finite(std::int64_t k) {
    if (k < 0) throw std::invalid_argument("Smoothness: order must be >= 0");
    return {false, k};
  }
  static Smoothness inf() { return {true, 0}; }

  bool operator==(const Smoothness&) const = default;
};

// The tuple (k, n, k', n') of the ratio test: target class C^k(R^n),
// node class C^{k'}(R^{n'}).
struct SmoothnessSpec {
  Smoothness k;
  std::int64_t n = 0;
  Smoothness k_prime;
  std::int64_t n_prime = 0;
};

// True iff the node class cannot represent all C^k(R^n) targets, i.e.
// k'/n' > k/n. Compared as cross-multiplied integers; no floating point.
//
// Infinite orders: an infinitely smooth node class violates against any
// finite target class. An infinitely smooth (analytic) target is encoded
// so that any finite-smoothness node class with n' < n violates.
inline bool vitushkin_violates(const SmoothnessSpec& spec) {
  if (spec.n <= 0 || spec.n_prime <= 0)
    throw std::invalid_argument("vitushkin_violates: dimensions must be >= 1");
  if (spec.k_prime.infinite) return !spec.k.infinite;
  if (spec.k.infinite) return spec.n_prime < spec.n;
  using I128 = __int128;
  return static_cast<I128>(spec.k_prime.order) * spec.n >
         static_cast<I128>(spec.k.order) * spec.n_prime;
}

namespace detail {

inline std::int64_t checked_add(std::int64_t a, std::int64_t b, const char* what) {
  std::int64_t out = 0;
  if (__builtin_add_overflow(a, b, &out))
    throw std::overflow_error(std::string(what) + ": integer overflow");
  return out;
}

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b, const char* what) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out))
    throw std::overflow_error(std::string(what) + ": integer overflow");
  return out;
}

// C(a, b) exactly, throwing std::overflow_error if the result (or a partial
// product's exact value) exceeds int64. Partial products r*(a-b+i)/i are
// integers at every step.
inline std::int64_t checked_binomial(std::int64_t a, std::int64_t b, const char* what) {
  if (b < 0 || b > a) return 0;
  b = std::min(b, a - b);
  unsigned __int128 r = 1;
  for (std::int64_t i = 1; i <= b; ++i) {
    r = r * static_cast<unsigned __int128>(a - b + i);
    r /= static_cast<unsigned __int128>(i);
    if (r > static_cast<unsigned __int128>(std::numeric_limits<std::int64_t>::max()))
      throw std::overflow_error(std::string(what) + ": integer overflow");
  }
  return static_cast<std::int64_t>(r);
}

}  // namespace detail

// N_p upper bound: (p+1)*m + m*(n+m) free parameters determine all order-p
// derivatives of a fixed network with m univariate nodes on n inputs.
inline std::int64_t param_bound(std::int64_t m, std::int64_t n, std::int64_t p) {
  if (m < 1 || n < 1 || p < 0)
    throw std::invalid_argument("param_bound: require m >= 1, n >= 1, p >= 0");
  const std::int64_t a = detail::checked_mul(p + 1, m, "param_bound");
  const std::int64_t b =
      detail::checked_mul(m, detail::checked_add(n, m, "param_bound"), "param_bound");
  return detail::checked_add(a, b, "param_bound");
}

// Number of distinct order-p partial derivatives of a C^p function of n
// variables: multisets of size p over n symbols, C(n+p-1, p).
inline std::int64_t deriv_dim_exact(std::int64_t n, std::int64_t p) {
  if (n < 1 || p < 0)
    throw std::invalid_argument("deriv_dim_exact: require n >= 1, p >= 0");
  return detail::checked_binomial(detail::checked_add(n, p - 1, "deriv_dim_exact"), p,
                                  "deriv_dim_exact");
}

// The asymptotic lower bound C(n,2) * p^2 / 2 on the number of derivative
// combinations, stored as the rounded-up integer ceil(C(n,2)*p^2/2). Only
// defined for n >= 3. For small p this bound can exceed deriv_dim_exact;
// counting_report exposes both side by side.
inline std::int64_t claimed_lower_bound(std::int64_t n, std::int64_t p) {
  if (n < 3) throw std::invalid_argument("claimed_lower_bound: require n >= 3");
  if (p < 1) throw std::invalid_argument("claimed_lower_bound: require p >= 1");
  const std::int64_t pairs = detail::checked_binomial(n, 2, "claimed_lower_bound");
  const std::int64_t p2 = detail::checked_mul(p, p, "claimed_lower_bound");
  const std::int64_t q = detail::checked_mul(pairs, p2, "claimed_lower_bound");
  return q / 2 + (q % 2);  // ceil(q / 2)
}

// One row of the counting argument at derivative order p.
struct CountingReport {
  std::int64_t p = 0;
  std::int64_t n_p_bound = 0;          // (p+1)m + m(n+m)
  std::int64_t deriv_dim_exact = 0;    // C(n+p-1, p)
  std::int64_t claimed_lower_bound = 0;  // ceil(C(n,2) p^2 / 2)
  bool representable_all = true;       // false iff the bound chain excludes it
  bool bound_exceeds_exact = false;    // lower bound > exact count at this p
};

namespace detail {

// The verdict needs only the two bound quantities; computed in 128-bit so
// it stays total even where the int64 report fields would overflow.
inline bool representable_verdict(std::int64_t m, std::int64_t n, std::int64_t p) {
  using I128 = __int128;
  const I128 pairs2 = static_cast<I128>(n) * (n - 1);  // 2*C(n,2)
  const I128 lhs4 = pairs2 * p * p;                    // 4 * (C(n,2) p^2 / 2)
  const I128 rhs = static_cast<I128>(p + 1) * m + static_cast<I128>(m) * (n + m);
  return !(lhs4 > 4 * rhs);  // representable unless bound strictly exceeds N_p
}

}  // namespace detail

// Evaluates the counting inequality at order p: not all order-p derivatives
// are representable iff claimed_lower_bound(n,p) > param_bound(m,n,p).
inline CountingReport counting_report(std::int64_t m, std::int64_t n, std::int64_t p) {
  if (m < 1) throw std::invalid_argument("counting_report: require m >= 1");
  if (n < 3) throw std::invalid_argument("counting_report: require n >= 3");
  if (p < 1) throw std::invalid_argument("counting_report: require p >= 1");
  CountingReport r;
  r.p = p;
  r.n_p_bound = param_bound(m, n, p);
  r.deriv_dim_exact = structkan::deriv_dim_exact(n, p);
  r.claimed_lower_bound = structkan::claimed_lower_bound(n, p);
  r.representable_all = detail::representable_verdict(m, n, p);
  r.bound_exceeds_exact = r.claimed_lower_bound > r.deriv_dim_exact;
  return r;
}

// Smallest p at which the topology can no longer represent all order-p
// derivatives. Finite for every (m, n): the left side of the inequality is
// quadratic in p, the right side linear.
inline std::int64_t smoothness_limit(std::int64_t m, std::int64_t n,
                                     std::int64_t max_p = 100'000'000) {
  if (m < 1) throw std::invalid_argument("smoothness_limit: require m >= 1");
  if (n < 3) throw std::invalid_argument("smoothness_limit: require n >= 3");
  for (std::int64_t p = 1; p <= max_p; ++p)
    if (!detail::representable_verdict(m, n, p)) return p;
  throw std::runtime_error("smoothness_limit: sanity cap " + std::to_string(max_p) +
                           " exceeded");
}

}  // namespace structkan
