#pragma once

// Nonclassicality witnesses evaluated from a MomentTable (analytic or oracle)
// or, for Klyshko and Husimi zeros, from photon probabilities and Q values.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "fockwitness/errors.hpp"
#include "fockwitness/moment_table.hpp"
#include "fockwitness/specfun.hpp"
#include "fockwitness/state_spec.hpp"
#include "fockwitness/states.hpp"

namespace fockwitness::witnesses {

enum class Witness { mandel, hoa, hosps, hos, husimi_zero, agarwal_tara, klyshko };

inline const char* to_string(Witness w) {
  switch (w) {
    case Witness::mandel: return "mandel";
    case Witness::hoa: return "hoa";
    case Witness::hosps: return "hosps";
    case Witness::hos: return "hos";
    case Witness::husimi_zero: return "husimi_zero";
    case Witness::agarwal_tara: return "agarwal_tara";
    case Witness::klyshko: return "klyshko";
  }
  return "?";
}

/// Accepts the canonical names plus the short aliases used on the command line.
inline Witness parse_witness(const std::string& name) {
  if (name == "mandel" || name == "qm") return Witness::mandel;
  if (name == "hoa" || name == "dh") return Witness::hoa;
  if (name == "hosps") return Witness::hosps;
  if (name == "hos" || name == "squeezing") return Witness::hos;
  if (name == "husimi_zero" || name == "husimi") return Witness::husimi_zero;
  if (name == "agarwal_tara" || name == "a3") return Witness::agarwal_tara;
  if (name == "klyshko" || name == "bm") return Witness::klyshko;
  throw InvalidArgument("unknown witness '" + name + "'");
}

struct WitnessResult {
  Witness witness = Witness::mandel;
  int order = 0;
  double value = 0.0;
  bool nonclassical = false;
  Provenance provenance = Provenance::analytic;
};

inline WitnessResult make_result(Witness w, int order, double value, Provenance prov) {
  return {w, order, value, value < 0.0, prov};
}

// ---------------------------------------------------------------------------
// number-operator algebra on a moment table

/// <(a_dag a)^r> = sum_n S(r, n) <a_dag^n a^n>.
inline double number_moment(const MomentTable& t, int r) {
  t.require(r, "number_moment");
  double acc = 0.0;
  for (int n = 0; n <= r; ++n) acc += specfun::stirling2(r, n) * t.diagonal(n);
  return acc;
}

/// <(N - <N>)^l> = sum_k C(l,k) (-1)^k <N^{l-k}> <N>^k.
inline double central_number_moment(const MomentTable& t, int l) {
  const double mean = t.diagonal(1);
  double acc = 0.0;
  for (int k = 0; k <= l; ++k)
    acc += specfun::binomial(l, k) * ((k % 2) ? -1.0 : 1.0) * number_moment(t, l - k) * std::pow(mean, k);
  return acc;
}

// ---------------------------------------------------------------------------
// moment-based witnesses

/// Q_M^{(l)} = <(dN)^l> / <N> - 1.
inline double mandel_q(const MomentTable& t, int l) {
  if (l < 2) throw InvalidArgument("mandel_q: order must be >= 2");
  t.require(l, "mandel_q");
  const double mean = t.diagonal(1);
  if (!(std::abs(mean) > 0.0)) throw ZeroMeanPhoton("mandel_q: <a_dag a> = 0");
  return central_number_moment(t, l) / mean - 1.0;
}

/// d_h^{(l-1)} = <a_dag^l a^l> - <a_dag a>^l.
inline double hoa(const MomentTable& t, int l) {
  if (l < 1) throw InvalidArgument("hoa: order must be >= 1");
  t.require(l, "hoa");
  return t.diagonal(l) - std::pow(t.diagonal(1), l);
}

namespace detail {

inline double hosps_sum(const MomentTable& t, int l, bool printed_sign) {
  if (l < 2) throw InvalidArgument("hosps: order must be >= 2");
  t.require(l, "hosps");
  const double mean = t.diagonal(1);
  double acc = 0.0;
  for (int e = 0; e <= l; ++e) {
    const int sign_exp = printed_sign ? e : l - e;
    const double sign = (sign_exp % 2) ? -1.0 : 1.0;
    for (int f = 1; f <= e; ++f) {
      const double d = (f == 1) ? 0.0 : hoa(t, f);
      acc += specfun::stirling2(e, f) * specfun::binomial(l, e) * sign * d * std::pow(mean, l - e);
    }
  }
  return acc;
}

}  // namespace detail

/// D_h^{(l-1)} = <(dN)^l> - <(dN)^l>_Poisson(same mean), expanded over the
/// antibunching terms: sum_e sum_{f>=1} S(e,f) C(l,e) (-1)^{l-e} d_h^{(f-1)} <N>^{l-e}.
inline double hosps(const MomentTable& t, int l) { return detail::hosps_sum(t, l, false); }

/// The same double sum with (-1)^e in place of (-1)^{l-e}; equals (-1)^l * hosps.
inline double hosps_printed(const MomentTable& t, int l) { return detail::hosps_sum(t, l, true); }

/// <(dX)^l> for X = (a + a_dag)/sqrt(2), through normal-ordered powers of a + a_dag.
inline double quadrature_central_moment(const MomentTable& t, int l) {
  t.require(l, "quadrature_central_moment");
  std::vector<double> raw(static_cast<std::size_t>(l) + 1);
  for (int k = 0; k <= l; ++k) {
    std::complex<double> acc{};
    for (const auto& [key, c] : specfun::quadrature_power_coeffs(k)) acc += c * t.at(key.first, key.second);
    raw[static_cast<std::size_t>(k)] = acc.real() / std::pow(2.0, 0.5 * k);
  }
  const double mean = raw[1];
  double central = 0.0;
  for (int k = 0; k <= l; ++k) central += specfun::binomial(l, k) * raw[static_cast<std::size_t>(k)] * std::pow(-mean, l - k);
  return central;
}

/// Hong-Mandel S^{(l)} = (<(dX)^l> - (l-1)!!/2^{l/2}) / ((l-1)!!/2^{l/2}), l even.
inline double hos(const MomentTable& t, int l) {
  if (l < 2 || l % 2 != 0) throw OddOrder("hos: order must be even and >= 2, got " + std::to_string(l));
  const double bound = specfun::double_factorial(l - 1) / std::pow(2.0, l / 2);
  return (quadrature_central_moment(t, l) - bound) / bound;
}

enum class AgarwalTaraVariant {
  number_moments,  // mu_k = <(a_dag a)^k>
  power_of_mean,   // mu_k = m_1^k
};

inline AgarwalTaraVariant parse_agarwal_tara_variant(const std::string& s) {
  if (s == "number_moments") return AgarwalTaraVariant::number_moments;
  if (s == "power_of_mean") return AgarwalTaraVariant::power_of_mean;
  throw InvalidArgument("unknown Agarwal-Tara variant '" + s + "'");
}

namespace detail {

using Mat3 = std::array<std::array<double, 3>, 3>;

inline Mat3 hankel(const std::array<double, 5>& v) {
  Mat3 m{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m[i][j] = v[static_cast<std::size_t>(i + j)];
  return m;
}

inline double det3(const Mat3& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

// Sum of |products| in the Leibniz expansion: the scale rounding error in det3 is measured against.
inline double det3_scale(const Mat3& m) {
  double s = 0.0;
  constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (const auto& p : perms) s += std::abs(m[0][p[0]] * m[1][p[1]] * m[2][p[2]]);
  return s;
}

}  // namespace detail

/// A_3 = det m / (det mu - det m), with m_{ij} = <a_dag^{i+j-2} a^{i+j-2}>.
/// Throws SingularDenominator when the ratio is indeterminate: the denominator
/// vanishes, or det m itself is zero to rounding (coherent states), which pins
/// A_3 to the classical boundary with no resolvable sign.
inline double agarwal_tara(const MomentTable& t, AgarwalTaraVariant variant = AgarwalTaraVariant::number_moments,
                           double epsilon = 1e-12) {
  t.require(4, "agarwal_tara");
  std::array<double, 5> m{};
  std::array<double, 5> mu{};
  for (int k = 0; k <= 4; ++k) {
    m[static_cast<std::size_t>(k)] = t.diagonal(k);
    mu[static_cast<std::size_t>(k)] =
        variant == AgarwalTaraVariant::number_moments ? number_moment(t, k) : std::pow(t.diagonal(1), k);
  }
  const auto mm = detail::hankel(m);
  const auto mmu = detail::hankel(mu);
  const double det_m = detail::det3(mm);
  const double det_mu = detail::det3(mmu);
  const double scale_m = detail::det3_scale(mm);
  const double scale_mu = detail::det3_scale(mmu);
  const double denom = det_mu - det_m;
  if (std::abs(denom) <= epsilon * (scale_m + scale_mu))
    throw SingularDenominator("agarwal_tara: det mu - det m vanishes");
  if (std::abs(det_m) <= epsilon * scale_m)
    throw SingularDenominator("agarwal_tara: moment matrix is singular, ratio indeterminate");
  return det_m / denom;
}

// ---------------------------------------------------------------------------
// probability- and phase-space witnesses

/// B(m) = (m+2) p_m p_{m+2} - (m+1) p_{m+1}^2.
inline double klyshko_from_probs(int m, double pm, double pm1, double pm2) {
  return (m + 2) * pm * pm2 - (m + 1) * pm1 * pm1;
}

inline double klyshko(const StateSpec& spec, int m) {
  if (m < 0) throw InvalidArgument("klyshko: m must be >= 0");
  return klyshko_from_probs(m, states::photon_prob(spec, m), states::photon_prob(spec, m + 1),
                            states::photon_prob(spec, m + 2));
}

struct Grid {
  double re_min = -4.0;
  double re_max = 4.0;
  double im_min = -4.0;
  double im_max = 4.0;
  int steps = 121;

  void validate() const {
    if (steps < 2) throw InvalidArgument("grid needs at least 2 steps per axis");
    if (!(re_min < re_max) || !(im_min < im_max)) throw InvalidArgument("grid bounds must be increasing");
  }
  double re(int i) const { return re_min + (re_max - re_min) * i / (steps - 1); }
  double im(int j) const { return im_min + (im_max - im_min) * j / (steps - 1); }
};

/// Row-major grid of Q values: rows follow Im(beta), columns Re(beta).
inline std::vector<double> husimi_grid(const std::function<double(std::complex<double>)>& q, const Grid& grid) {
  grid.validate();
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(grid.steps) * static_cast<std::size_t>(grid.steps));
  for (int j = 0; j < grid.steps; ++j)
    for (int i = 0; i < grid.steps; ++i) values.push_back(q({grid.re(i), grid.im(j)}));
  return values;
}

/// Grid points where Q < zero_threshold * max(Q over the grid), row-major.
inline std::vector<std::complex<double>> zeros_in_grid(const std::vector<double>& values, const Grid& grid,
                                                       double zero_threshold) {
  const double qmax = values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
  std::vector<std::complex<double>> zeros;
  for (int j = 0; j < grid.steps; ++j)
    for (int i = 0; i < grid.steps; ++i)
      if (values[static_cast<std::size_t>(j * grid.steps + i)] < zero_threshold * qmax)
        zeros.emplace_back(grid.re(i), grid.im(j));
  return zeros;
}

inline std::vector<std::complex<double>> husimi_zero_scan(const StateSpec& spec, const Grid& grid,
                                                          double zero_threshold) {
  const auto values = husimi_grid([&](std::complex<double> b) { return states::husimi(spec, b); }, grid);
  return zeros_in_grid(values, grid, zero_threshold);
}

/// Sub-threshold points that are also strict minima over their eight
/// neighbours. Boundary rows and columns are never reported, so a rapidly
/// decaying tail does not register as a zero.
inline std::vector<std::complex<double>> isolated_zeros(const std::vector<double>& values, const Grid& grid,
                                                        double zero_threshold) {
  const double qmax = values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
  const int n = grid.steps;
  auto at = [&](int i, int j) { return values[static_cast<std::size_t>(j * n + i)]; };
  std::vector<std::complex<double>> zeros;
  for (int j = 1; j + 1 < n; ++j)
    for (int i = 1; i + 1 < n; ++i) {
      const double v = at(i, j);
      if (!(v < zero_threshold * qmax)) continue;
      bool strict = true;
      for (int dj = -1; dj <= 1 && strict; ++dj)
        for (int di = -1; di <= 1; ++di)
          if ((di != 0 || dj != 0) && at(i + di, j + dj) <= v) {
            strict = false;
            break;
          }
      if (strict) zeros.emplace_back(grid.re(i), grid.im(j));
    }
  return zeros;
}

/// Husimi-zero witness: value is the number of isolated zeros on the grid.
inline WitnessResult husimi_zero_witness(const std::vector<double>& values, const Grid& grid, double zero_threshold,
                                         Provenance provenance) {
  const auto zeros = isolated_zeros(values, grid, zero_threshold);
  WitnessResult r;
  r.witness = Witness::husimi_zero;
  r.order = 0;
  r.value = static_cast<double>(zeros.size());
  r.nonclassical = !zeros.empty();
  r.provenance = provenance;
  return r;
}

// ---------------------------------------------------------------------------

/// Highest moment order a witness reads from the table.
inline int required_order(Witness w, int order) {
  switch (w) {
    case Witness::agarwal_tara: return 4;
    case Witness::klyshko:
    case Witness::husimi_zero: return 0;
    default: return order;
  }
}

/// Moment-table witness dispatch; Klyshko and Husimi zeros are not table-based.
inline WitnessResult evaluate(Witness w, const MomentTable& t, int order,
                              AgarwalTaraVariant variant = AgarwalTaraVariant::number_moments) {
  switch (w) {
    case Witness::mandel: return make_result(w, order, mandel_q(t, order), t.provenance());
    case Witness::hoa: return make_result(w, order, hoa(t, order), t.provenance());
    case Witness::hosps: return make_result(w, order, hosps(t, order), t.provenance());
    case Witness::hos: return make_result(w, order, hos(t, order), t.provenance());
    case Witness::agarwal_tara: return make_result(w, 0, agarwal_tara(t, variant), t.provenance());
    default: break;
  }
  throw InvalidArgument(std::string("witness ") + to_string(w) + " is not computed from moments");
}

}  // namespace fockwitness::witnesses
