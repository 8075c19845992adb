#pragma once

// Special functions and combinatorics shared by the analytic and oracle paths.
// Everything here is a pure function of its arguments.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fockwitness/errors.hpp"

namespace fockwitness::specfun {

namespace detail {

inline constexpr std::array<std::uint64_t, 21> kFactorials = [] {
  std::array<std::uint64_t, 21> f{};
  f[0] = 1;
  for (std::size_t i = 1; i < f.size(); ++i) f[i] = f[i - 1] * i;
  return f;
}();

// Neumaier compensated summation.
template <class T>
class CompensatedSum {
 public:
  void add(T v) {
    const T t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  T value() const { return sum_ + comp_; }

 private:
  T sum_{};
  T comp_{};
};

}  // namespace detail

/// Integer power by repeated squaring; `int_pow(z, 0) == 1` for every z, including 0.
template <class T>
T int_pow(T base, int exponent) {
  if (exponent < 0) return T(1) / int_pow(base, -exponent);
  T result(1);
  while (exponent > 0) {
    if (exponent & 1) result *= base;
    base *= base;
    exponent >>= 1;
  }
  return result;
}

/// ln(n!). Exact-integer route for n <= 20, lgamma above.
inline double log_factorial(int n) {
  if (n < 0) throw InvalidArgument("log_factorial: negative argument " + std::to_string(n));
  if (n < static_cast<int>(detail::kFactorials.size()))
    return std::log(static_cast<double>(detail::kFactorials[static_cast<std::size_t>(n)]));
  return std::lgamma(static_cast<double>(n) + 1.0);
}

inline double factorial(int n) {
  if (n < 0) throw InvalidArgument("factorial: negative argument " + std::to_string(n));
  if (n < static_cast<int>(detail::kFactorials.size()))
    return static_cast<double>(detail::kFactorials[static_cast<std::size_t>(n)]);
  return std::tgamma(static_cast<double>(n) + 1.0);
}

/// 1/n!, with 1/(negative integer)! == 0. This convention is what lets the
/// closed-form sums be re-based without case splits.
inline double inverse_factorial(int n) {
  if (n < 0) return 0.0;
  return 1.0 / factorial(n);
}

/// prod(num_i!) / prod(den_j!). Zero when any denominator argument is negative.
/// Small arguments go through exact factorials, anything else through log space.
inline double factorial_ratio(std::initializer_list<int> num, std::initializer_list<int> den) {
  for (int d : den)
    if (d < 0) return 0.0;
  for (int n : num)
    if (n < 0) throw InvalidArgument("factorial_ratio: negative numerator argument");
  const auto small = [](int v) { return v < static_cast<int>(detail::kFactorials.size()); };
  if (std::all_of(num.begin(), num.end(), small) && std::all_of(den.begin(), den.end(), small)) {
    double r = 1.0;
    for (int n : num) r *= factorial(n);
    for (int d : den) r /= factorial(d);
    if (std::isfinite(r) && r > 0.0) return r;
  }
  double log_r = 0.0;
  for (int n : num) log_r += log_factorial(n);
  for (int d : den) log_r -= log_factorial(d);
  return std::exp(log_r);
}

/// C(n, k); zero outside 0 <= k <= n.
inline double binomial(int n, int k) {
  if (n < 0) throw InvalidArgument("binomial: negative n");
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  if (n <= 60) {
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return static_cast<double>(r);
  }
  return std::round(std::exp(log_factorial(n) - log_factorial(k) - log_factorial(n - k)));
}

/// n!! with (-1)!! = 0!! = 1.
inline double double_factorial(int n) {
  if (n < -1) throw InvalidArgument("double_factorial: argument below -1");
  double r = 1.0;
  for (int i = n; i > 1; i -= 2) r *= i;
  return r;
}

/// Stirling number of the second kind S(r, n): partitions of r items into n blocks.
inline double stirling2(int r, int n) {
  if (r < 0 || n < 0) throw InvalidArgument("stirling2: negative argument");
  if (n > r) return 0.0;
  if (r == 0) return 1.0;  // n == 0 here
  if (n == 0) return 0.0;
  // row-by-row S(i, j) = j S(i-1, j) + S(i-1, j-1)
  std::vector<double> row(static_cast<std::size_t>(n) + 1, 0.0);
  row[0] = 1.0;
  for (int i = 1; i <= r; ++i) {
    for (int j = std::min(i, n); j >= 1; --j) row[j] = j * row[j] + row[j - 1];
    row[0] = 0.0;
  }
  return row[static_cast<std::size_t>(n)];
}

struct SeriesOptions {
  double rel_tol = 1e-16;
  int consecutive_small_terms = 3;
  long max_terms = 1'000'000;
};

/// Generalized hypergeometric series pFq(a; b; x) summed by the term-ratio
/// recurrence t_{k+1} = t_k * prod(a_i + k) / prod(b_j + k) * x / (k + 1).
/// Converged once `consecutive_small_terms` successive terms fall below
/// rel_tol * |partial sum|.
inline double hypergeometric_pfq(std::span<const double> a, std::span<const double> b, double x,
                                 const SeriesOptions& opts = {}) {
  for (double bj : b)
    if (bj <= 0.0 && bj == std::floor(bj))
      throw PoleInDenominatorParams("hypergeometric_pfq: denominator parameter " + std::to_string(bj) +
                                    " is a non-positive integer");
  if (!std::isfinite(x)) throw InvalidArgument("hypergeometric_pfq: non-finite argument");

  // extended precision for the recurrence; the result is rounded once
  using wide = long double;
  detail::CompensatedSum<wide> sum;
  sum.add(1.0L);
  wide term = 1.0L;
  int small = 0;
  for (long k = 0; k < opts.max_terms; ++k) {
    wide num = static_cast<wide>(x);
    wide den = static_cast<wide>(k + 1);
    for (double ai : a) num *= static_cast<wide>(ai) + static_cast<wide>(k);
    for (double bj : b) den *= static_cast<wide>(bj) + static_cast<wide>(k);
    term = term * num / den;
    sum.add(term);
    const wide s = sum.value();
    if (!std::isfinite(static_cast<double>(s)) || !std::isfinite(static_cast<double>(term)))
      throw NonConvergent("hypergeometric_pfq: partial sum overflowed after " + std::to_string(k + 1) + " terms");
    if (std::abs(term) <= static_cast<wide>(opts.rel_tol) * std::abs(s)) {
      if (++small >= opts.consecutive_small_terms) return static_cast<double>(s);
    } else {
      small = 0;
    }
  }
  throw NonConvergent("hypergeometric_pfq: no convergence within " + std::to_string(opts.max_terms) + " terms");
}

inline double hypergeometric_pfq(std::initializer_list<double> a, std::initializer_list<double> b, double x,
                                 double rel_tol = 1e-16) {
  SeriesOptions opts;
  opts.rel_tol = rel_tol;
  return hypergeometric_pfq(std::span<const double>(a.begin(), a.size()),
                            std::span<const double>(b.begin(), b.size()), x, opts);
}

/// Two-index Hermite polynomial
///   H_{m,n}(x, y) = sum_k (-1)^k k! C(m,k) C(n,k) x^{m-k} y^{n-k}.
inline std::complex<double> hermite2(int m, int n, std::complex<double> x, std::complex<double> y) {
  if (m < 0 || n < 0) throw InvalidArgument("hermite2: negative index");
  std::complex<double> acc{};
  for (int k = 0; k <= std::min(m, n); ++k) {
    const double c = (k % 2 ? -1.0 : 1.0) * factorial(k) * binomial(m, k) * binomial(n, k);
    acc += c * int_pow(x, m - k) * int_pow(y, n - k);
  }
  return acc;
}

/// Coefficient of a^{dagger_power} a^{plain_power} in a normal-ordered expansion.
struct NormalOrderTerm {
  int dagger_power = 0;
  int plain_power = 0;
  double coefficient = 0.0;

  friend bool operator==(const NormalOrderTerm&, const NormalOrderTerm&) = default;
};

/// a^p a_dag^q = sum_r r! C(p,r) C(q,r) a_dag^{q-r} a^{p-r}, highest r last.
inline std::vector<NormalOrderTerm> normal_order_product(int plain_power, int dagger_power) {
  if (plain_power < 0 || dagger_power < 0) throw InvalidArgument("normal_order_product: negative power");
  std::vector<NormalOrderTerm> terms;
  for (int r = 0; r <= std::min(plain_power, dagger_power); ++r)
    terms.push_back({dagger_power - r, plain_power - r,
                     factorial(r) * binomial(plain_power, r) * binomial(dagger_power, r)});
  return terms;
}

/// Normal-ordered polynomial keyed by (dagger_power, plain_power).
using NormalOrderedPoly = std::map<std::pair<int, int>, double>;

/// Exact coefficients c_{j,k} with (a + a_dag)^l = sum c_{j,k} a_dag^j a^k.
/// Built by left multiplication, using a a_dag^j = a_dag^j a + j a_dag^{j-1}.
inline NormalOrderedPoly quadrature_power_coeffs(int l) {
  if (l < 0) throw InvalidArgument("quadrature_power_coeffs: negative order");
  NormalOrderedPoly poly{{{0, 0}, 1.0}};
  for (int step = 0; step < l; ++step) {
    NormalOrderedPoly next;
    for (const auto& [key, c] : poly) {
      const auto [j, k] = key;
      next[{j + 1, k}] += c;       // a_dag * a_dag^j a^k
      next[{j, k + 1}] += c;       // a a_dag^j a^k, commuted part
      if (j > 0) next[{j - 1, k}] += j * c;
    }
    poly = std::move(next);
  }
  return poly;
}

}  // namespace fockwitness::specfun
