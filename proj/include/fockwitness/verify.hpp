#pragma once

// Self-check suites: closed forms against the Fock-space oracle, plus the
// structural identities every state must satisfy.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "fockwitness/errors.hpp"
#include "fockwitness/format.hpp"
#include "fockwitness/oracle.hpp"
#include "fockwitness/state_spec.hpp"
#include "fockwitness/states.hpp"
#include "fockwitness/witnesses.hpp"

namespace fockwitness::verify {

/// Analytic counterpart of oracle::evaluate for fixture quantities.
inline double analytic_quantity(const StateSpec& spec, const oracle::Quantity& q) {
  switch (q.kind) {
    case oracle::Quantity::Kind::moment: return states::moment(spec, q.m, q.n).real();
    case oracle::Quantity::Kind::prob: return states::photon_prob(spec, q.m);
    case oracle::Quantity::Kind::husimi: return states::husimi(spec, q.beta);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// the reference grid

inline const std::vector<double>& grid_rbar() {
  static const std::vector<double> v = {0.1, 0.5, 1.0, 2.0, 5.0};
  return v;
}
inline const std::vector<double>& grid_alpha() {
  static const std::vector<double> v = {0.3, 0.7, 1.2, 2.0};
  return v;
}

/// bare plus PAS and PSA with p, q in 0..3.
inline std::vector<EngineeringOp> grid_ops() {
  std::vector<EngineeringOp> ops = {EngineeringOp::none()};
  for (int p = 0; p <= 3; ++p)
    for (int q = 0; q <= 3; ++q) {
      ops.push_back(EngineeringOp::pas(p, q));
      ops.push_back(EngineeringOp::psa(p, q));
    }
  return ops;
}

inline std::vector<StateSpec> grid_specs() {
  std::vector<StateSpec> specs;
  for (const auto& op : grid_ops()) {
    for (double r : grid_rbar()) specs.push_back(StateSpec::thermal(r, op));
    for (double a : grid_alpha()) specs.push_back(StateSpec::even_coherent(a, op));
  }
  return specs;
}

inline oracle::BuildOptions tight_options(int max_order) {
  oracle::BuildOptions o;
  o.tail_tol = 1e-18;
  o.moment_weight = 2 * max_order;
  return o;
}

// ---------------------------------------------------------------------------

struct SuiteResult {
  explicit SuiteResult(std::string n = {}) : name(std::move(n)) {}

  std::string name;
  bool passed = true;
  int checks = 0;
  double max_deviation = 0.0;
  std::string worst;  // where max_deviation occurred
  std::vector<std::string> failures;

  void record(double dev, double limit, const std::string& where) {
    ++checks;
    if (!(dev <= limit)) {
      passed = false;
      if (failures.size() < 10) failures.push_back(where + " deviation " + format_real(dev));
    }
    if (std::isnan(dev) || dev > max_deviation) {
      max_deviation = dev;
      worst = where;
    }
  }
  void fail(const std::string& what) {
    ++checks;
    passed = false;
    if (failures.size() < 10) failures.push_back(what);
  }
};

inline double rel_dev(double a, double ref) { return std::abs(a - ref) / std::max(std::abs(ref), 1e-30); }
inline double rel_dev(std::complex<double> a, std::complex<double> ref) {
  return std::abs(a - ref) / std::max(std::abs(ref), 1e-30);
}

/// Closed-form moments vs oracle moments over the reference grid; diagonal
/// orders up to 5, and for the even coherent family every (m, n) up to 4.
inline SuiteResult suite_moments(double tol) {
  SuiteResult r{"moments"};
  for (const auto& spec : grid_specs()) {
    const auto st = oracle::build_truncated(spec, tight_options(10));
    auto check = [&](int m, int n) {
      const auto a = states::moment(spec, m, n);
      const auto o = oracle::oracle_moment(st, m, n);
      r.record(rel_dev(a, o), tol, spec.canonical() + " (" + std::to_string(m) + "," + std::to_string(n) + ")");
    };
    for (int k = 0; k <= 5; ++k) check(k, k);
    if (!spec.is_thermal())
      for (int m = 0; m <= 4; ++m)
        for (int n = 0; n <= 4; ++n)
          if (m != n && (m + n) % 2 == 0) check(m, n);
  }
  return r;
}

/// Every moment witness computed from analytic and from oracle tables. The
/// comparison is relative for |value| >= 1 and absolute (tol / 100) below.
inline SuiteResult suite_witnesses(double tol) {
  using witnesses::Witness;
  SuiteResult r{"witnesses"};
  struct Item {
    Witness w;
    int order;
  };
  const std::vector<Item> items = {{Witness::mandel, 2}, {Witness::mandel, 3}, {Witness::mandel, 4},
                                   {Witness::hoa, 2},    {Witness::hoa, 3},    {Witness::hoa, 4},
                                   {Witness::hosps, 2},  {Witness::hosps, 3},  {Witness::hosps, 4},
                                   {Witness::hos, 2},    {Witness::hos, 4},    {Witness::hos, 6},
                                   {Witness::agarwal_tara, 0}};
  for (const auto& spec : grid_specs()) {
    const auto at = states::analytic_moments(spec, 6);
    const auto st = oracle::build_truncated(spec, tight_options(12));
    const auto ot = oracle::oracle_moments(st, 6);
    auto compare = [&](const std::string& what, const std::function<double(const MomentTable&)>& f) {
      const std::string where = spec.canonical() + " " + what;
      bool a_threw = false;
      bool o_threw = false;
      double a = 0.0;
      double o = 0.0;
      try {
        a = f(at);
      } catch (const SingularDenominator&) {
        a_threw = true;
      } catch (const ZeroMeanPhoton&) {
        a_threw = true;
      }
      try {
        o = f(ot);
      } catch (const SingularDenominator&) {
        o_threw = true;
      } catch (const ZeroMeanPhoton&) {
        o_threw = true;
      }
      if (a_threw != o_threw) return r.fail(where + ": only one engine reports an indeterminate value");
      if (a_threw) return;
      const double dev = std::abs(o) >= 1.0 ? std::abs(a - o) / std::abs(o) : std::abs(a - o) * 100.0;
      r.record(dev, tol, where);
    };
    for (const auto& it : items)
      compare(std::string(witnesses::to_string(it.w)) + "(" + std::to_string(it.order) + ")",
              [&](const MomentTable& t) { return witnesses::evaluate(it.w, t, it.order).value; });
    for (int m = 0; m <= 4; ++m) {
      const std::string where = spec.canonical() + " klyshko(" + std::to_string(m) + ")";
      const double a = witnesses::klyshko(spec, m);
      const double o = witnesses::klyshko_from_probs(m, oracle::oracle_photon_prob(st, m),
                                                     oracle::oracle_photon_prob(st, m + 1),
                                                     oracle::oracle_photon_prob(st, m + 2));
      r.record(std::abs(o) >= 1.0 ? std::abs(a - o) / std::abs(o) : std::abs(a - o) * 100.0, tol, where);
    }
  }
  return r;
}

/// Unit trace for every constructed state (both representations), vanishing
/// odd-parity moments of the even coherent family, and a distribution summing to 1.
inline SuiteResult suite_normalization() {
  SuiteResult r{"normalization"};
  for (const auto& spec : grid_specs()) {
    const auto st = oracle::build_truncated(spec, tight_options(4));
    r.record(std::abs(st.trace() - 1.0), 1e-10, spec.canonical() + " trace");

    double sum = 0.0;
    for (double p : states::photon_distribution(spec)) sum += p;
    r.record(std::abs(sum - 1.0), 1e-9, spec.canonical() + " sum p_m");

    if (!spec.is_thermal()) {
      for (int m = 0; m <= 5; ++m)
        for (int n = 0; n <= 5; ++n) {
          if ((m + n) % 2 == 0) continue;
          const std::string where = spec.canonical() + " odd (" + std::to_string(m) + "," + std::to_string(n) + ")";
          r.record(std::abs(states::moment(spec, m, n)), 1e-12, where + " analytic");
          r.record(std::abs(oracle::oracle_moment(st, m, n)), 1e-12, where + " oracle");
        }
    }
  }
  for (const auto& spec : {StateSpec::thermal(1.0, EngineeringOp::pas(2, 1)),
                           StateSpec::even_coherent(1.2, EngineeringOp::psa(1, 2))}) {
    oracle::BuildOptions o = tight_options(4);
    o.representation = oracle::Representation::density_matrix;
    const auto st = oracle::build_truncated(spec, o);
    r.record(std::abs(st.trace() - 1.0), 1e-10, spec.canonical() + " density trace");
  }
  return r;
}

/// S^(l) >= -1e-10 for all four engineered families on the plotted windows.
inline SuiteResult suite_hos() {
  SuiteResult r{"hos"};
  const std::vector<std::pair<int, int>> pq = {{1, 1}, {1, 2}, {2, 1}, {2, 4}, {4, 2}, {3, 3}};
  for (const auto& [p, q] : pq)
    for (const auto& op : {EngineeringOp::pas(p, q), EngineeringOp::psa(p, q)})
      for (int i = 1; i <= 50; ++i)
        for (const StateSpec& spec : {StateSpec::thermal(0.1 * i, op), StateSpec::even_coherent(0.06 * i, op)}) {
          const auto t = states::analytic_moments(spec, 6);
          for (int l : {2, 4, 6}) {
            const double s = witnesses::hos(t, l);
            r.record(std::max(0.0, -s), 1e-10, spec.canonical() + " S(" + std::to_string(l) + ")");
          }
        }
  return r;
}

/// Combinatorial HOSPS against <(dn)^l> minus the Poisson value at the same
/// mean, both read from the oracle distribution.
inline SuiteResult suite_hosps(double tol) {
  SuiteResult r{"hosps"};
  for (const auto& spec : grid_specs()) {
    const auto t = states::analytic_moments(spec, 4);
    const auto st = oracle::build_truncated(spec, tight_options(6));
    double mean = 0.0;
    for (int k = 0; k < st.cutoff(); ++k) mean += k * oracle::oracle_photon_prob(st, k);
    for (int l = 2; l <= 4; ++l) {
      double central = 0.0;
      for (int k = 0; k < st.cutoff(); ++k) central += std::pow(k - mean, l) * oracle::oracle_photon_prob(st, k);
      const double poisson = oracle::oracle_poissonian_central_moment(mean, l);
      const double direct = central - poisson;
      const double combinatorial = witnesses::hosps(t, l);
      // relative to the terms being differenced; the difference itself can be exactly 0
      const double scale = std::max({std::abs(direct), std::abs(central), std::abs(poisson), 1e-30});
      const double dev = std::abs(combinatorial - direct) / scale;
      r.record(dev, tol, spec.canonical() + " l=" + std::to_string(l));
    }
  }
  return r;
}

/// Coherent states sit on the classical boundary of every moment witness.
inline SuiteResult suite_coherent() {
  SuiteResult r{"coherent"};
  for (double mag : {0.5, 1.0, 2.0}) {
    const std::string where = "coherent |alpha|=" + format_real(mag);
    const auto st = oracle::coherent_state(std::polar(mag, 0.3));
    const auto t = oracle::oracle_moments(st, 4);
    for (int l = 2; l <= 4; ++l) {
      r.record(std::abs(witnesses::hoa(t, l)), 1e-9, where + " hoa l=" + std::to_string(l));
      r.record(std::abs(witnesses::hosps(t, l)), 1e-9, where + " hosps l=" + std::to_string(l));
    }
    r.record(std::abs(witnesses::hos(t, 2)), 1e-9, where + " hos l=2");
    for (auto v : {witnesses::AgarwalTaraVariant::number_moments, witnesses::AgarwalTaraVariant::power_of_mean}) {
      try {
        const double a3 = witnesses::agarwal_tara(t, v);
        r.fail(where + " A3 returned " + format_real(a3) + " instead of flagging a singular denominator");
      } catch (const SingularDenominator&) {
        ++r.checks;
      }
    }
  }
  return r;
}

/// Frozen oracle values recomputed with both engines.
inline SuiteResult suite_fixtures(const std::string& path, double tol) {
  SuiteResult r{"fixtures"};
  std::vector<oracle::Fixture> fixtures;
  try {
    fixtures = oracle::read_fixtures(path);
  } catch (const Error& e) {
    r.fail(e.what());
    return r;
  }
  if (fixtures.empty()) r.fail("no fixtures in " + path);
  for (const auto& f : fixtures) {
    const StateSpec spec = StateSpec::parse(f.spec);
    const auto q = oracle::parse_quantity(f.quantity);
    oracle::BuildOptions opts = oracle::options_for(q, tight_options(0));
    opts.min_cutoff = std::max(opts.min_cutoff, f.cutoff);
    const double o = oracle::evaluate(oracle::build_truncated(spec, opts), q);
    const double a = analytic_quantity(spec, q);
    const std::string where = f.spec + " " + f.quantity;
    r.record(rel_dev(o, f.value), tol, where + " oracle");
    r.record(rel_dev(a, f.value), tol, where + " analytic");
  }
  return r;
}

// ---------------------------------------------------------------------------

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"moments", "witnesses", "normalization", "hos",
                                                 "hosps",   "coherent",  "fixtures"};
  return names;
}

struct Options {
  double tol = 1e-8;
  std::vector<std::string> suites;  // empty runs all
  std::string fixture_path;
};

inline SuiteResult run_suite(const std::string& name, const Options& o) {
  if (name == "moments") return suite_moments(o.tol);
  if (name == "witnesses") return suite_witnesses(o.tol);
  if (name == "normalization") return suite_normalization();
  if (name == "hos") return suite_hos();
  if (name == "hosps") return suite_hosps(o.tol);
  if (name == "coherent") return suite_coherent();
  if (name == "fixtures") return suite_fixtures(o.fixture_path, o.tol);
  throw InvalidArgument("unknown verify suite '" + name + "'");
}

/// Runs the selected suites, printing one line per suite. True iff all pass.
inline bool run(const Options& o, std::ostream& out) {
  const auto& names = o.suites.empty() ? suite_names() : o.suites;
  for (const auto& n : names)
    if (std::find(suite_names().begin(), suite_names().end(), n) == suite_names().end())
      throw InvalidArgument("unknown verify suite '" + n + "'");
  bool ok = true;
  for (const auto& n : names) {
    const SuiteResult r = run_suite(n, o);
    ok = ok && r.passed;
    out << r.name << ',' << (r.passed ? "pass" : "FAIL") << ",checks=" << r.checks
        << ",max_deviation=" << format_real(r.max_deviation) << '\n';
    for (const auto& f : r.failures) out << "  " << f << '\n';
  }
  return ok;
}

}  // namespace fockwitness::verify
