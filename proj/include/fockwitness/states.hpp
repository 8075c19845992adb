#pragma once

// Closed-form normalizations, moments, photon-number probabilities and Husimi
// values of photon-added-then-subtracted (PAS) and photon-subtracted-then-added
// (PSA) thermal and even coherent states.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include "fockwitness/errors.hpp"
#include "fockwitness/moment_table.hpp"
#include "fockwitness/specfun.hpp"
#include "fockwitness/state_spec.hpp"

namespace fockwitness::states {

using cplx = std::complex<double>;

/// Norms below this are treated as an annihilated state.
inline constexpr double kDegenerateNorm = 1e-300;

namespace detail {

// Thermal weights run over x^r with x = rbar / (1 + rbar).
inline double thermal_ratio(double rbar) { return rbar / (1.0 + rbar); }

inline double pow_or_one(double base, int e) { return e == 0 ? 1.0 : std::pow(base, e); }

// The bare state behaves as PAS with p = q = 0.
inline EngineeringOp effective_op(const EngineeringOp& op) {
  return op.order == OpOrder::none ? EngineeringOp::pas(0, 0) : op;
}

inline double f21(double a, double b, double c, double x) {
  return specfun::hypergeometric_pfq({a, b}, {c}, x);
}

inline double f32(double a1, double a2, double a3, double b1, double b2, double x) {
  return specfun::hypergeometric_pfq({a1, a2, a3}, {b1, b2}, x);
}

inline void require_family(const StateSpec& spec, Family f, const char* who) {
  spec.validate();
  if (spec.family != f)
    throw InvalidArgument(std::string(who) + ": wrong state family for " + spec.canonical());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// thermal family

namespace detail {

// <A_dag A> over the bare thermal state for A = a^p a_dag^q:
//   1/(1+rbar) sum_r x^r (r+q)!^2 / (r! (r+q-p)!).
// For q < p the sum starts at r = p - q, which contributes the x^{p-q} factor.
inline double past_norm_inverse(double rbar, int p, int q) {
  if (rbar < 0.0 || p < 0 || q < 0) throw InvalidArgument("normalization_past_thermal: bad arguments");
  const double x = thermal_ratio(rbar);
  double inv = 0.0;
  if (q >= p) {
    inv = specfun::factorial_ratio({q, q}, {q - p}) / (1.0 + rbar) * f21(1 + q, 1 + q, 1 + q - p, x);
  } else {
    inv = specfun::factorial_ratio({p, p}, {p - q}) / (1.0 + rbar) * pow_or_one(x, p - q) *
          f21(1 + p, 1 + p, 1 + p - q, x);
  }
  if (!(inv > kDegenerateNorm))
    throw DegenerateState("PAS thermal state with p > q annihilates the vacuum (rbar = 0)");
  return inv;
}

// Same for B = a_dag^q a^p: p! q!/(1+rbar) x^p 2F1(1+q, 1+p; 1; x).
inline double psat_norm_inverse(double rbar, int p, int q) {
  if (rbar < 0.0 || p < 0 || q < 0) throw InvalidArgument("normalization_psat_thermal: bad arguments");
  if (rbar == 0.0 && p > 0) throw DegenerateState("subtracting photons from the vacuum (rbar = 0, p > 0)");
  const double x = thermal_ratio(rbar);
  const double inv =
      specfun::factorial_ratio({p, q}, {}) / (1.0 + rbar) * pow_or_one(x, p) * f21(1 + q, 1 + p, 1, x);
  if (!(inv > kDegenerateNorm)) throw DegenerateState("PSA thermal state has vanishing norm");
  return inv;
}

}  // namespace detail

/// N_1^2 style normalization of the PAS thermal state, the reciprocal of its
/// unnormalized trace.
inline double normalization_past_thermal(double rbar, int p, int q) {
  return 1.0 / detail::past_norm_inverse(rbar, p, q);
}

inline double normalization_psat_thermal(double rbar, int p, int q) {
  return 1.0 / detail::psat_norm_inverse(rbar, p, q);
}

/// Normalized <a_dag^m a^n> of an engineered thermal state. Zero unless m == n.
inline double moment_thermal(const StateSpec& spec, int m, int n) {
  detail::require_family(spec, Family::thermal, "moment_thermal");
  if (m < 0 || n < 0) throw InvalidArgument("moment_thermal: negative order");
  const EngineeringOp op = detail::effective_op(spec.op);
  const int p = op.p;
  const int q = op.q;
  const double rbar = spec.rbar;
  const double x = detail::thermal_ratio(rbar);

  if (op.order == OpOrder::add_then_subtract) {
    const double inv = detail::past_norm_inverse(rbar, p, q);
    if (m != n) return 0.0;
    if (n == 0) return 1.0;
    if (q - p - n >= 0)
      return specfun::factorial_ratio({q, q}, {q - p - n}) / (1.0 + rbar) *
             detail::f21(1 + q, 1 + q, q - p - n + 1, x) / inv;
    return specfun::factorial_ratio({p + n, p + n}, {p - q + n}) / (1.0 + rbar) * detail::pow_or_one(x, p - q + n) *
           detail::f21(1 + p + n, 1 + p + n, p - q + n + 1, x) / inv;
  }

  const double inv = detail::psat_norm_inverse(rbar, p, q);
  if (m != n) return 0.0;
  if (n == 0) return 1.0;
  if (q >= n)
    return detail::pow_or_one(x, p) * specfun::factorial_ratio({q, q, p}, {q - n}) / (1.0 + rbar) *
           detail::f32(1 + q, 1 + q, 1 + p, 1, q - n + 1, x) / inv;
  return detail::pow_or_one(x, p - q + n) * specfun::factorial_ratio({n, n, p - q + n}, {n - q, n - q}) /
         (1.0 + rbar) * detail::f32(1 + n, 1 + n, 1 + p - q + n, 1 - q + n, 1 - q + n, x) / inv;
}

// ---------------------------------------------------------------------------
// even coherent family
//
// The engineered ket is A(|alpha> + |-alpha>) (or B(...)) without the bare
// normalization; N^{-2} is defined as its unnormalized (0,0) expectation.

/// Unnormalized <a_dag^m a^n> from the explicit double sum over the two
/// normal-ordering indices (r, s), keeping the (1 + (-1)^{m+n}) parity factor.
inline cplx ecs_unnormalized_moment(const StateSpec& spec, int m, int n) {
  detail::require_family(spec, Family::even_coherent, "ecs_unnormalized_moment");
  if (m < 0 || n < 0) throw InvalidArgument("ecs_unnormalized_moment: negative order");
  const EngineeringOp op = detail::effective_op(spec.op);
  const int p = op.p;
  const int q = op.q;
  const cplx a = spec.alpha;
  const cplx ac = std::conj(a);
  const double overlap = std::exp(-2.0 * std::norm(a));
  const double one_minus_overlap = -std::expm1(-2.0 * std::norm(a));
  const double parity = ((m + n) % 2 == 0) ? 2.0 : 0.0;
  using specfun::binomial;
  using specfun::factorial;
  using specfun::int_pow;

  cplx total{};
  if (op.order == OpOrder::add_then_subtract) {
    for (int r = 0; r <= std::min(n + p, q); ++r) {
      const double cr = binomial(n + p, r) * binomial(q, r) * factorial(r);
      const int top = m + p + q - r;
      for (int s = 0; s <= std::min(q, top); ++s) {
        const double cs = binomial(q, s) * binomial(top, s) * factorial(s);
        const int j = top - s;
        const int k = n + p + q - r - s;
        const double cross = (j % 2) ? one_minus_overlap : 1.0 + overlap;
        total += cr * cs * parity * int_pow(ac, j) * int_pow(a, k) * cross;
      }
    }
  } else {
    for (int r = 0; r <= std::min(n, q); ++r) {
      const double cr = binomial(n, r) * binomial(q, r) * factorial(r);
      const int top = m + q - r;
      for (int s = 0; s <= std::min(q, top); ++s) {
        const double cs = binomial(q, s) * binomial(top, s) * factorial(s);
        const int j = top - s + p;
        const int k = n + q + p - r - s;
        const double cross = (j % 2) ? one_minus_overlap : 1.0 + overlap;
        total += cr * cs * parity * int_pow(ac, j) * int_pow(a, k) * cross;
      }
    }
  }
  return total;
}

/// N^2 = 1 / <psi|A_dag A|psi> for the engineered even coherent state.
inline double ecs_normalization_sq(const StateSpec& spec) {
  const double norm0 = ecs_unnormalized_moment(spec, 0, 0).real();
  if (!(norm0 > kDegenerateNorm))
    throw DegenerateState("engineered even coherent state vanishes: " + spec.canonical());
  return 1.0 / norm0;
}

inline cplx moment_ecs(const StateSpec& spec, int m, int n) {
  const double nsq = ecs_normalization_sq(spec);
  if (m == 0 && n == 0) return {1.0, 0.0};
  return nsq * ecs_unnormalized_moment(spec, m, n);
}

/// Single-sum bivariate-Hermite form of the even-coherent moments, normalized
/// by its own (0,0) value. Comparison route only: it has no parity factor and
/// drops the (-1)^p sign on the cross-overlap term of the PSA state, so it
/// agrees with moment_ecs only for even m + n (and, for PSA, even p).
inline cplx moment_ecs_compact(const StateSpec& spec, int m, int n) {
  detail::require_family(spec, Family::even_coherent, "moment_ecs_compact");
  const EngineeringOp op = detail::effective_op(spec.op);
  const int p = op.p;
  const int q = op.q;
  const cplx a = spec.alpha;
  const cplx ac = std::conj(a);
  const double overlap = std::exp(-2.0 * std::norm(a));
  const double sign_q = (q % 2) ? -1.0 : 1.0;
  using specfun::binomial;
  using specfun::factorial;
  using specfun::hermite2;
  using specfun::int_pow;

  auto raw = [&](int mm, int nn) {
    cplx acc{};
    if (op.order == OpOrder::add_then_subtract) {
      for (int r = 0; r <= std::min(nn + p, q); ++r) {
        const int top = mm + p + q - r;
        acc += binomial(nn + p, r) * binomial(q, r) * factorial(r) * int_pow(a, nn + p - r) * sign_q *
               (hermite2(top, q, ac, -a) + overlap * hermite2(top, q, -ac, -a));
      }
    } else {
      for (int r = 0; r <= std::min(nn, q); ++r) {
        const int top = mm + q - r;
        acc += binomial(nn, r) * binomial(q, r) * factorial(r) * int_pow(a, nn - r) * sign_q *
               (hermite2(top, q, ac, -a) + overlap * hermite2(top, q, -ac, -a));
      }
      acc *= int_pow(std::norm(a), q);
    }
    return acc;
  };
  const cplx norm0 = raw(0, 0);
  if (!(std::abs(norm0) > kDegenerateNorm)) throw DegenerateState("compact form vanishes: " + spec.canonical());
  return raw(m, n) / norm0;
}

// ---------------------------------------------------------------------------
// dispatch

inline cplx moment(const StateSpec& spec, int m, int n) {
  if (spec.is_thermal()) return {moment_thermal(spec, m, n), 0.0};
  return moment_ecs(spec, m, n);
}

/// Eagerly populated table of normalized analytic moments up to `max_order`.
inline MomentTable analytic_moments(const StateSpec& spec, int max_order) {
  spec.validate();
  if (spec.is_thermal()) {
    // normalization is shared; a failing spec fails here rather than mid-table
    moment_thermal(spec, 0, 0);
    return MomentTable(max_order, [&](int m, int n) { return cplx{moment_thermal(spec, m, n), 0.0}; },
                       Provenance::analytic);
  }
  const double nsq = ecs_normalization_sq(spec);
  return MomentTable(max_order, [&](int m, int n) { return nsq * ecs_unnormalized_moment(spec, m, n); },
                     Provenance::analytic);
}

// ---------------------------------------------------------------------------
// photon-number distribution

/// Probability of detecting m photons.
inline double photon_prob(const StateSpec& spec, int m) {
  spec.validate();
  if (m < 0) return 0.0;
  const EngineeringOp op = detail::effective_op(spec.op);
  const int p = op.p;
  const int q = op.q;
  using specfun::log_factorial;

  if (spec.is_thermal()) {
    const double rbar = spec.rbar;
    const double x = detail::thermal_ratio(rbar);
    const int r = m + p - q;  // index of the bare Fock level feeding level m
    double inv = 0.0;
    double w = 0.0;
    if (op.order == OpOrder::add_then_subtract) {
      inv = detail::past_norm_inverse(rbar, p, q);
      if (r < 0) return 0.0;
      w = specfun::factorial_ratio({m + p, m + p}, {r, m});
    } else {
      inv = detail::psat_norm_inverse(rbar, p, q);
      if (m < q) return 0.0;
      w = specfun::factorial_ratio({r, m}, {m - q, m - q});
    }
    return w * detail::pow_or_one(x, r) / (1.0 + rbar) / inv;
  }

  const double nsq = ecs_normalization_sq(spec);
  const int e = m - q + p;  // power of alpha in the amplitude
  if (e < 0 || (e % 2) != 0) return 0.0;
  const double abs_a = std::abs(spec.alpha);
  double log_abs_pow = 0.0;
  if (e > 0) {
    if (abs_a == 0.0) return 0.0;
    log_abs_pow = e * std::log(abs_a);
  }
  const double log_env = log_abs_pow - 0.5 * abs_a * abs_a + std::log(2.0);

  if (op.order == OpOrder::add_then_subtract) {
    // amplitude = env * sum_r C(p,r) C(q,r) r! sqrt(m!) / (m-q+r)!, all terms positive
    double max_log = -std::numeric_limits<double>::infinity();
    std::vector<double> logs;
    for (int r = 0; r <= std::min(p, q); ++r) {
      if (m - q + r < 0) continue;
      const double c = specfun::binomial(p, r) * specfun::binomial(q, r) * specfun::factorial(r);
      logs.push_back(std::log(c) + 0.5 * log_factorial(m) - log_factorial(m - q + r));
      max_log = std::max(max_log, logs.back());
    }
    if (logs.empty()) return 0.0;
    double acc = 0.0;
    for (double l : logs) acc += std::exp(l - max_log);
    const double log_amp = log_env + max_log + std::log(acc);
    return nsq * std::exp(2.0 * log_amp);
  }
  if (m < q) return 0.0;
  const double log_amp = log_env + 0.5 * log_factorial(m) - log_factorial(m - q);
  return nsq * std::exp(2.0 * log_amp);
}

/// Photon-number distribution over an adaptive number of levels, far enough
/// into the tail (mean + 40 standard deviations) that the omitted mass is
/// negligible at double precision.
inline std::vector<double> photon_distribution(const StateSpec& spec) {
  const MomentTable t = analytic_moments(spec, 2);
  const double mean = t.diagonal(1);
  const double var = std::max(0.0, t.diagonal(2) + mean - mean * mean);
  const int levels = static_cast<int>(std::ceil(mean + 40.0 * std::sqrt(var) + 60.0 + spec.op.p + spec.op.q));
  std::vector<double> probs(static_cast<std::size_t>(levels));
  for (int m = 0; m < levels; ++m) probs[static_cast<std::size_t>(m)] = photon_prob(spec, m);
  return probs;
}

// ---------------------------------------------------------------------------
// Husimi Q

/// Q(beta) = <beta|rho|beta> / pi.
/// Thermal states use the 2F2 / 1F1 closed forms. The even-coherent PAS state
/// uses the explicit normal-ordering sum with (-1)^{p-r} kept inside the sum.
inline double husimi(const StateSpec& spec, cplx beta) {
  spec.validate();
  const EngineeringOp op = detail::effective_op(spec.op);
  const int p = op.p;
  const int q = op.q;
  const double b2 = std::norm(beta);
  constexpr double pi = std::numbers::pi;

  if (spec.is_thermal()) {
    const double rbar = spec.rbar;
    const double x = detail::thermal_ratio(rbar);
    const double y = x * b2;
    if (op.order == OpOrder::add_then_subtract) {
      const double norm = normalization_past_thermal(rbar, p, q);
      if (q >= p)
        return norm * specfun::factorial_ratio({q, q}, {q - p, q - p}) * std::exp(-b2) *
               detail::pow_or_one(b2, q - p) / (pi * (1.0 + rbar)) *
               specfun::hypergeometric_pfq({1.0 + q, 1.0 + q}, {1.0 + q - p, 1.0 + q - p}, y);
      return norm * specfun::factorial_ratio({p, p}, {p - q}) * std::exp(-b2) * detail::pow_or_one(x, p - q) /
             (pi * (1.0 + rbar)) * specfun::hypergeometric_pfq({1.0 + p, 1.0 + p}, {1.0, 1.0 + p - q}, y);
    }
    const double norm = normalization_psat_thermal(rbar, p, q);
    return norm * std::exp(-b2) * detail::pow_or_one(x, p) * detail::pow_or_one(b2, q) * specfun::factorial(p) /
           (pi * (1.0 + rbar)) * specfun::hypergeometric_pfq({1.0 + p}, {1.0}, y);
  }

  const double nsq = ecs_normalization_sq(spec);
  const cplx a = spec.alpha;
  const cplx bc = std::conj(beta);
  const double half = 0.5 * (std::norm(a) + b2);
  const cplx plus = std::exp(a * bc - half);
  const cplx minus = std::exp(-a * bc - half);
  if (op.order == OpOrder::add_then_subtract) {
    cplx acc{};
    for (int r = 0; r <= std::min(p, q); ++r) {
      const double c = specfun::binomial(p, r) * specfun::binomial(q, r) * specfun::factorial(r);
      const double sign = ((p - r) % 2) ? -1.0 : 1.0;
      acc += c * specfun::int_pow(bc, q - r) * specfun::int_pow(a, p - r) * (plus + sign * minus);
    }
    return nsq * std::norm(acc) / pi;
  }
  const double sign = (p % 2) ? -1.0 : 1.0;
  return nsq * detail::pow_or_one(b2, q) * detail::pow_or_one(std::norm(a), p) * std::norm(plus + sign * minus) / pi;
}

}  // namespace fockwitness::states
