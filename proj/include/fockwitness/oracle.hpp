#pragma once

// Brute-force ground truth: each state is built numerically in a truncated
// Fock basis by applying ladder operators to the bare state, and every
// quantity is read off from first principles. Nothing here touches the
// closed forms in states.hpp.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <regex>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "fockwitness/errors.hpp"
#include "fockwitness/format.hpp"
#include "fockwitness/moment_table.hpp"
#include "fockwitness/state_spec.hpp"

namespace fockwitness::oracle {

using cplx = std::complex<double>;

inline constexpr int kDefaultMaxCutoff = 4096;

/// Hard cutoff limit, overridable through FOCKWITNESS_MAX_CUTOFF.
inline int max_cutoff_from_env() {
  if (const char* env = std::getenv("FOCKWITNESS_MAX_CUTOFF")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return kDefaultMaxCutoff;
}

enum class Representation {
  automatic,       // diagonal weights for thermal states, pure vector for ECS
  density_matrix,  // full D x D matrix, for cross-checks
};

struct BuildOptions {
  double tail_tol = 1e-12;
  /// Tail is measured on (k+1)^moment_weight * p_k, so a state meant for
  /// moments of order n should use moment_weight = 2n.
  int moment_weight = 0;
  int initial_cutoff = 32;
  int min_cutoff = 0;
  int max_cutoff = max_cutoff_from_env();
  Representation representation = Representation::automatic;
};

/// Finite Fock-basis state. Exactly one representation is held.
class TruncatedState {
 public:
  using Diagonal = Eigen::VectorXd;
  using Pure = Eigen::VectorXcd;
  using Density = Eigen::MatrixXcd;

  TruncatedState(std::variant<Diagonal, Pure, Density> rep, double tail_mass)
      : rep_(std::move(rep)), tail_mass_(tail_mass) {}

  int cutoff() const {
    return std::visit([](const auto& r) { return static_cast<int>(r.rows()); }, rep_);
  }
  double tail_mass() const { return tail_mass_; }

  bool is_diagonal() const { return std::holds_alternative<Diagonal>(rep_); }
  bool is_pure() const { return std::holds_alternative<Pure>(rep_); }
  bool is_density() const { return std::holds_alternative<Density>(rep_); }

  const Diagonal& diagonal() const { return std::get<Diagonal>(rep_); }
  const Pure& pure() const { return std::get<Pure>(rep_); }
  const Density& density() const { return std::get<Density>(rep_); }

  /// Trace of rho, or squared norm of the ket.
  double trace() const {
    if (is_diagonal()) return diagonal().sum();
    if (is_pure()) return pure().squaredNorm();
    return density().trace().real();
  }

  /// Full density matrix regardless of the stored representation.
  Density to_density() const {
    if (is_density()) return density();
    if (is_pure()) return pure() * pure().adjoint();
    return diagonal().cast<cplx>().asDiagonal();
  }

 private:
  std::variant<Diagonal, Pure, Density> rep_;
  double tail_mass_ = 0.0;
};

// ---------------------------------------------------------------------------
// ladder operators

/// Dense annihilation matrix on a D-level space: a|k> = sqrt(k)|k-1>.
inline Eigen::MatrixXd ladder_matrix(int dim) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
  for (int k = 1; k < dim; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

namespace detail {

// ket -> a ket
inline Eigen::VectorXcd lower(const Eigen::VectorXcd& v) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(v.size());
  for (Eigen::Index k = 0; k + 1 < v.size(); ++k) out[k] = std::sqrt(static_cast<double>(k + 1)) * v[k + 1];
  return out;
}

// ket -> a_dag ket (top level drops out)
inline Eigen::VectorXcd raise(const Eigen::VectorXcd& v) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(v.size());
  for (Eigen::Index k = 1; k < v.size(); ++k) out[k] = std::sqrt(static_cast<double>(k)) * v[k - 1];
  return out;
}

// diagonal rho -> a rho a_dag
inline Eigen::VectorXd lower(const Eigen::VectorXd& w) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(w.size());
  for (Eigen::Index k = 0; k + 1 < w.size(); ++k) out[k] = static_cast<double>(k + 1) * w[k + 1];
  return out;
}

// diagonal rho -> a_dag rho a
inline Eigen::VectorXd raise(const Eigen::VectorXd& w) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(w.size());
  for (Eigen::Index k = 1; k < w.size(); ++k) out[k] = static_cast<double>(k) * w[k - 1];
  return out;
}

// rho -> a rho a_dag
inline Eigen::MatrixXcd lower(const Eigen::MatrixXcd& rho) {
  const Eigen::MatrixXd a = ladder_matrix(static_cast<int>(rho.rows()));
  return a * rho * a.transpose();
}

// rho -> a_dag rho a
inline Eigen::MatrixXcd raise(const Eigen::MatrixXcd& rho) {
  const Eigen::MatrixXd a = ladder_matrix(static_cast<int>(rho.rows()));
  return a.transpose() * rho * a;
}

template <class Rep>
Rep apply_op(Rep state, const EngineeringOp& op) {
  if (op.order == OpOrder::add_then_subtract) {
    for (int i = 0; i < op.q; ++i) state = raise(state);
    for (int i = 0; i < op.p; ++i) state = lower(state);
  } else if (op.order == OpOrder::subtract_then_add) {
    for (int i = 0; i < op.p; ++i) state = lower(state);
    for (int i = 0; i < op.q; ++i) state = raise(state);
  }
  return state;
}

// bare thermal weights x^k / (1 + rbar)
inline Eigen::VectorXd thermal_weights(double rbar, int dim) {
  const double x = rbar / (1.0 + rbar);
  Eigen::VectorXd w(dim);
  double v = 1.0 / (1.0 + rbar);
  for (int k = 0; k < dim; ++k) {
    w[k] = v;
    v *= x;
  }
  return w;
}

// coherent amplitudes e^{-|a|^2/2} a^k / sqrt(k!)
inline Eigen::VectorXcd coherent_amplitudes(cplx alpha, int dim) {
  Eigen::VectorXcd c(dim);
  cplx v = std::exp(-0.5 * std::norm(alpha));
  for (int k = 0; k < dim; ++k) {
    c[k] = v;
    v *= alpha / std::sqrt(static_cast<double>(k + 1));
  }
  return c;
}

inline Eigen::VectorXcd even_coherent_ket(cplx alpha, int dim) {
  Eigen::VectorXcd c = coherent_amplitudes(alpha, dim);
  for (int k = 1; k < dim; k += 2) c[k] = 0.0;
  return 2.0 * c;
}

inline Eigen::VectorXd populations(const Eigen::VectorXd& w) { return w; }
inline Eigen::VectorXd populations(const Eigen::VectorXcd& v) { return v.cwiseAbs2(); }
inline Eigen::VectorXd populations(const Eigen::MatrixXcd& rho) { return rho.diagonal().real(); }

// Populations-weighted tail mass above `cutoff` relative to the whole vector.
inline double weighted_tail(const Eigen::VectorXd& pops, int cutoff, int weight) {
  double total = 0.0;
  double tail = 0.0;
  for (Eigen::Index k = 0; k < pops.size(); ++k) {
    const double w = pops[k] * std::pow(static_cast<double>(k + 1), weight);
    total += w;
    if (k >= cutoff) tail += w;
  }
  return total > 0.0 ? tail / total : 0.0;
}

template <class Rep>
Rep head(const Rep& r, int dim) {
  if constexpr (std::is_same_v<Rep, Eigen::MatrixXcd>)
    return r.topLeftCorner(dim, dim);
  else
    return r.head(dim);
}

// Engineered state exact on levels < `exact_levels`: the bare state is built
// with p + q levels of headroom so no ladder step reaches the basis edge.
template <class Rep>
Rep engineered(const StateSpec& spec, int exact_levels, Representation repr) {
  const int work = exact_levels + spec.op.p + spec.op.q + 1;
  Rep bare;
  if constexpr (std::is_same_v<Rep, Eigen::VectorXd>) {
    bare = thermal_weights(spec.rbar, work);
  } else if constexpr (std::is_same_v<Rep, Eigen::VectorXcd>) {
    bare = even_coherent_ket(spec.alpha, work);
  } else {
    if (spec.is_thermal()) {
      bare = thermal_weights(spec.rbar, work).cast<cplx>().asDiagonal();
    } else {
      const Eigen::VectorXcd ket = even_coherent_ket(spec.alpha, work);
      bare = ket * ket.adjoint();
    }
  }
  (void)repr;
  return head(apply_op(std::move(bare), spec.op), exact_levels);
}

template <class Rep>
TruncatedState build_with(const StateSpec& spec, const BuildOptions& opts) {
  int dim = std::max({opts.initial_cutoff, opts.min_cutoff, 2});
  while (true) {
    if (dim > opts.max_cutoff)
      throw CutoffExceeded("oracle: cutoff would exceed " + std::to_string(opts.max_cutoff) + " for " +
                           spec.canonical());
    // probe at twice the size to see how much weight sits above `dim`
    const Rep probe = engineered<Rep>(spec, 2 * dim, opts.representation);
    const Eigen::VectorXd pops = populations(probe);
    if (!(pops.sum() >= 1e-300)) throw DegenerateState("oracle: engineered state has zero norm: " + spec.canonical());
    const double tail = weighted_tail(pops, dim, opts.moment_weight);
    if (tail < opts.tail_tol) {
      Rep kept = head(probe, dim);
      const double mass = populations(kept).sum();
      const double raw_tail = 1.0 - mass / pops.sum();
      if constexpr (std::is_same_v<Rep, Eigen::VectorXcd>)
        kept /= std::sqrt(mass);
      else
        kept /= mass;
      return TruncatedState(std::move(kept), std::max(0.0, raw_tail));
    }
    dim *= 2;
  }
}

}  // namespace detail

/// Builds the engineered state in a Fock basis, doubling the cutoff until the
/// (moment-weighted) probability above it is below `opts.tail_tol`, then
/// renormalizes the kept block.
inline TruncatedState build_truncated(const StateSpec& spec, const BuildOptions& opts = {}) {
  spec.validate();
  if (opts.representation == Representation::density_matrix)
    return detail::build_with<Eigen::MatrixXcd>(spec, opts);
  if (spec.is_thermal()) return detail::build_with<Eigen::VectorXd>(spec, opts);
  return detail::build_with<Eigen::VectorXcd>(spec, opts);
}

inline TruncatedState build_truncated(const StateSpec& spec, double tail_tol) {
  BuildOptions opts;
  opts.tail_tol = tail_tol;
  return build_truncated(spec, opts);
}

/// Plain coherent state |alpha>, the classical boundary used for baseline checks.
inline TruncatedState coherent_state(cplx alpha, double tail_tol = 1e-16) {
  int dim = 32;
  while (true) {
    Eigen::VectorXcd c = detail::coherent_amplitudes(alpha, 2 * dim);
    const double tail = c.tail(dim).squaredNorm();
    if (tail < tail_tol || 2 * dim > max_cutoff_from_env()) {
      Eigen::VectorXcd kept = c.head(dim);
      kept /= kept.norm();
      return TruncatedState(std::move(kept), tail);
    }
    dim *= 2;
  }
}

// ---------------------------------------------------------------------------
// queries

/// <a_dag^m a^n> = sum_j sqrt((j+n)!/j!) sqrt((j+m)!/j!) rho_{j+n, j+m}.
inline cplx oracle_moment(const TruncatedState& state, int m, int n) {
  const int dim = state.cutoff();
  if (m < 0 || n < 0) throw InvalidArgument("oracle_moment: negative order");
  if (2 * (m + n) >= dim)
    throw CutoffExceeded("oracle_moment: order " + std::to_string(m + n) + " too close to cutoff " +
                         std::to_string(dim));
  if (state.is_pure()) {
    Eigen::VectorXcd lm = state.pure();
    Eigen::VectorXcd ln = state.pure();
    for (int i = 0; i < m; ++i) lm = detail::lower(lm);
    for (int i = 0; i < n; ++i) ln = detail::lower(ln);
    return lm.dot(ln);  // conjugates the first argument
  }
  auto ladder = [](int j, int k) {  // sqrt((j+k)!/j!)
    double v = 1.0;
    for (int i = 1; i <= k; ++i) v *= std::sqrt(static_cast<double>(j + i));
    return v;
  };
  cplx acc{};
  if (state.is_diagonal()) {
    if (m != n) return {};
    const auto& w = state.diagonal();
    for (int j = 0; j + n < dim; ++j) {
      const double f = ladder(j, n);
      acc += f * f * w[j + n];
    }
    return acc;
  }
  const auto& rho = state.density();
  for (int j = 0; j + std::max(m, n) < dim; ++j) acc += ladder(j, n) * ladder(j, m) * rho(j + n, j + m);
  return acc;
}

/// Eagerly populated oracle moment table.
inline MomentTable oracle_moments(const TruncatedState& state, int max_order) {
  return MomentTable(max_order, [&](int m, int n) { return oracle_moment(state, m, n); }, Provenance::oracle);
}

/// <m|rho|m>; zero beyond the cutoff (with a warning on stderr).
inline double oracle_photon_prob(const TruncatedState& state, int m) {
  if (m < 0) return 0.0;
  if (m >= state.cutoff()) {
    std::clog << "warning: oracle_photon_prob(" << m << ") beyond cutoff " << state.cutoff() << ", returning 0\n";
    return 0.0;
  }
  if (state.is_diagonal()) return state.diagonal()[m];
  if (state.is_pure()) return std::norm(state.pure()[m]);
  return state.density()(m, m).real();
}

/// Q(beta) = <beta|rho|beta> / pi with the coherent vector built to the cutoff.
inline double oracle_husimi(const TruncatedState& state, cplx beta) {
  const int dim = state.cutoff();
  if (4.0 * std::norm(beta) >= dim)
    throw CutoffExceeded("oracle_husimi: |beta|^2 too large for cutoff " + std::to_string(dim));
  const Eigen::VectorXcd b = detail::coherent_amplitudes(beta, dim);
  double v = 0.0;
  if (state.is_diagonal())
    v = (b.cwiseAbs2().array() * state.diagonal().array()).sum();
  else if (state.is_pure())
    v = std::norm(b.dot(state.pure()));
  else
    v = b.dot(state.density() * b).real();
  return v / std::numbers::pi;
}

/// l-th central moment of a Poisson distribution, summed over its support
/// until the remaining tail is below 1e-14.
inline double oracle_poissonian_central_moment(double mean, int l) {
  if (mean < 0.0 || l < 1) throw InvalidArgument("oracle_poissonian_central_moment: bad arguments");
  if (mean == 0.0) return 0.0;
  double acc = 0.0;
  double cumulative = 0.0;
  for (int k = 0;; ++k) {
    const double pk = std::exp(k * std::log(mean) - mean - std::lgamma(k + 1.0));
    acc += pk * std::pow(k - mean, l);
    cumulative += pk;
    if (k > mean && 1.0 - cumulative < 1e-14 && pk * std::pow(k - mean, l) < 1e-16 * std::max(1.0, std::abs(acc)))
      break;
    if (k > 100000) break;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// fixture file: "<spec> <quantity> <cutoff> <value>" per line

struct Fixture {
  std::string spec;
  std::string quantity;
  int cutoff = 0;
  double value = 0.0;

  friend bool operator==(const Fixture&, const Fixture&) = default;
};

/// Quantity ids understood in fixture files: moment(m,n) is the real part of
/// <a_dag^m a^n>, prob(k) is p_k, husimi(re,im) is Q at beta = re + i im.
struct Quantity {
  enum class Kind { moment, prob, husimi };
  Kind kind = Kind::moment;
  int m = 0;
  int n = 0;
  cplx beta{};
};

inline Quantity parse_quantity(const std::string& id) {
  static const std::regex moment_re(R"(^moment\((\d+),(\d+)\)$)");
  static const std::regex prob_re(R"(^prob\((\d+)\)$)");
  static const std::regex husimi_re(R"(^husimi\(([^,]+),([^)]+)\)$)");
  std::smatch mt;
  Quantity q;
  try {
    if (std::regex_match(id, mt, moment_re)) {
      q.kind = Quantity::Kind::moment;
      q.m = std::stoi(mt[1]);
      q.n = std::stoi(mt[2]);
      return q;
    }
    if (std::regex_match(id, mt, prob_re)) {
      q.kind = Quantity::Kind::prob;
      q.m = std::stoi(mt[1]);
      return q;
    }
    if (std::regex_match(id, mt, husimi_re)) {
      q.kind = Quantity::Kind::husimi;
      q.beta = {parse_real(mt[1]), parse_real(mt[2])};
      return q;
    }
  } catch (const std::exception&) {
  }
  throw InvalidArgument("unknown fixture quantity '" + id + "'");
}

/// Build options large enough for `q` to be read off safely.
inline BuildOptions options_for(const Quantity& q, BuildOptions base = {}) {
  switch (q.kind) {
    case Quantity::Kind::moment:
      base.moment_weight = std::max(base.moment_weight, 2 * (q.m + q.n) + 2);
      base.min_cutoff = std::max(base.min_cutoff, 2 * (q.m + q.n) + 1);
      break;
    case Quantity::Kind::prob: base.min_cutoff = std::max(base.min_cutoff, q.m + 1); break;
    case Quantity::Kind::husimi:
      base.min_cutoff = std::max(base.min_cutoff, static_cast<int>(std::ceil(4.0 * std::norm(q.beta))) + 1);
      break;
  }
  return base;
}

inline double evaluate(const TruncatedState& st, const Quantity& q) {
  switch (q.kind) {
    case Quantity::Kind::moment: return oracle_moment(st, q.m, q.n).real();
    case Quantity::Kind::prob: return oracle_photon_prob(st, q.m);
    case Quantity::Kind::husimi: return oracle_husimi(st, q.beta);
  }
  return 0.0;
}

inline std::string format_fixture_value(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << v;
  return os.str();
}

inline void write_fixtures(std::ostream& os, const std::vector<Fixture>& fixtures) {
  for (const auto& f : fixtures)
    os << f.spec << ' ' << f.quantity << ' ' << f.cutoff << ' ' << format_fixture_value(f.value) << '\n';
}

inline std::vector<Fixture> read_fixtures(std::istream& is) {
  std::vector<Fixture> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    ls.imbue(std::locale::classic());
    Fixture f;
    std::string value;
    if (!(ls >> f.spec >> f.quantity >> f.cutoff >> value))
      throw InvalidArgument("fixture line " + std::to_string(lineno) + " malformed");
    f.value = parse_real(value);
    out.push_back(std::move(f));
  }
  return out;
}

inline std::vector<Fixture> read_fixtures(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open fixture file " + path);
  return read_fixtures(in);
}

/// Evaluates `quantity` on the state built for `spec` and again with the
/// cutoff doubled; the value is only frozen if the two agree to `stability`.
template <class Quantity>
Fixture freeze_fixture(const StateSpec& spec, const std::string& quantity_id, Quantity&& quantity,
                       BuildOptions opts = {}, double stability = 1e-10) {
  const TruncatedState base = build_truncated(spec, opts);
  const double v1 = quantity(base);
  BuildOptions doubled = opts;
  doubled.min_cutoff = 2 * base.cutoff();
  const TruncatedState wide = build_truncated(spec, doubled);
  const double v2 = quantity(wide);
  if (std::abs(v1 - v2) > stability * std::max(std::abs(v2), 1e-300))
    throw NonConvergent("fixture " + quantity_id + " for " + spec.canonical() + " unstable under D -> 2D: " +
                        format_fixture_value(v1) + " vs " + format_fixture_value(v2));
  return {spec.canonical(), quantity_id, base.cutoff(), v2};
}

}  // namespace fockwitness::oracle
