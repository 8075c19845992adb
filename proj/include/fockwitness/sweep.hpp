#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "fockwitness/errors.hpp"
#include "fockwitness/format.hpp"
#include "fockwitness/oracle.hpp"
#include "fockwitness/state_spec.hpp"
#include "fockwitness/states.hpp"
#include "fockwitness/witnesses.hpp"

namespace fockwitness::sweep {

enum class Engine { analytic, oracle, both };

inline const char* to_string(Engine e) {
  switch (e) {
    case Engine::analytic: return "analytic";
    case Engine::oracle: return "oracle";
    case Engine::both: return "both";
  }
  return "?";
}

inline Engine parse_engine(const std::string& s) {
  if (s == "analytic") return Engine::analytic;
  if (s == "oracle") return Engine::oracle;
  if (s == "both") return Engine::both;
  throw InvalidArgument("unknown engine '" + s + "'");
}

/// Marker stored where a grid point has no value.
inline constexpr double kGap = std::numeric_limits<double>::quiet_NaN();

/// Relative deviation with an absolute floor of 1, used by engine=both.
inline double deviation(double analytic, double oracle) {
  if (std::isnan(analytic) && std::isnan(oracle)) return 0.0;
  return std::abs(analytic - oracle) / std::max(std::abs(oracle), 1.0);
}

// ---------------------------------------------------------------------------
// parallel map

/// Evaluates fn(i) for i in [0, n) on worker threads. Each result lands in its
/// own slot, so output order never depends on scheduling. If any call throws,
/// the exception of the lowest index is rethrown.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, Fn&& fn, unsigned threads = 0) {
  std::vector<T> out(n);
  if (n == 0) return out;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));

  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

// ---------------------------------------------------------------------------
// pointwise evaluation

struct PointRequest {
  witnesses::Witness witness = witnesses::Witness::mandel;
  int order = 2;  // l, or m for klyshko
  witnesses::AgarwalTaraVariant variant = witnesses::AgarwalTaraVariant::number_moments;
};

/// Oracle build settings for moments up to `max_order`.
inline oracle::BuildOptions oracle_options_for_order(int max_order) {
  oracle::BuildOptions o;
  o.tail_tol = 1e-16;
  o.moment_weight = 2 * max_order + 2;
  return o;
}

inline double evaluate_analytic(const StateSpec& spec, const PointRequest& r) {
  using witnesses::Witness;
  if (r.witness == Witness::klyshko) return witnesses::klyshko(spec, r.order);
  const int need = witnesses::required_order(r.witness, r.order);
  return witnesses::evaluate(r.witness, states::analytic_moments(spec, need), r.order, r.variant).value;
}

inline double evaluate_oracle(const StateSpec& spec, const PointRequest& r) {
  using witnesses::Witness;
  if (r.witness == Witness::klyshko) {
    auto opts = oracle_options_for_order(1);
    opts.min_cutoff = r.order + 3;
    const auto st = oracle::build_truncated(spec, opts);
    return witnesses::klyshko_from_probs(r.order, oracle::oracle_photon_prob(st, r.order),
                                         oracle::oracle_photon_prob(st, r.order + 1),
                                         oracle::oracle_photon_prob(st, r.order + 2));
  }
  const int need = witnesses::required_order(r.witness, r.order);
  const auto st = oracle::build_truncated(spec, oracle_options_for_order(need));
  return witnesses::evaluate(r.witness, oracle::oracle_moments(st, need), r.order, r.variant).value;
}

// ---------------------------------------------------------------------------
// sweeps

struct ParamRange {
  double min = 0.01;
  double max = 5.0;
  int steps = 200;

  void validate() const {
    if (steps < 2) throw InvalidArgument("sweep needs at least 2 steps");
    if (!(std::isfinite(min) && std::isfinite(max)) || !(max > min))
      throw InvalidArgument("sweep range must satisfy min < max");
    if (min < 0.0) throw InvalidArgument("sweep parameter must be >= 0");
  }

  /// Evenly spaced, both ends included.
  std::vector<double> values() const {
    std::vector<double> v(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) v[static_cast<std::size_t>(i)] = min + (max - min) * i / (steps - 1);
    v.back() = max;
    return v;
  }
};

inline ParamRange default_range(Family f) {
  return f == Family::thermal ? ParamRange{0.01, 5.0, 200} : ParamRange{0.01, 3.0, 200};
}

struct Series {
  std::string label;
  std::vector<double> values;
};

struct SweepTable {
  std::string parameter_name;
  std::vector<double> parameter_values;
  std::vector<Series> series;
  witnesses::Witness witness = witnesses::Witness::mandel;
  int order = 0;
  std::vector<EngineeringOp> variants;
  Engine engine = Engine::analytic;
  /// Largest analytic/oracle deviation; only set for Engine::both.
  std::optional<double> max_deviation;

  const Series* find(const std::string& label) const {
    for (const auto& s : series)
      if (s.label == label) return &s;
    return nullptr;
  }
};

struct SweepRequest {
  PointRequest point;
  std::vector<EngineeringOp> variants;
  Family family = Family::thermal;
  ParamRange range = default_range(Family::thermal);
  Engine engine = Engine::analytic;
  bool include_bare = false;
};

inline StateSpec spec_at(Family f, double param, const EngineeringOp& op) {
  return f == Family::thermal ? StateSpec::thermal(param, op) : StateSpec::even_coherent(param, op);
}

/// Runs the witness across the parameter range for every variant. A
/// DegenerateState or SingularDenominator at a point leaves a gap (NaN) in
/// that series.
inline SweepTable sweep(const SweepRequest& req) {
  req.range.validate();
  if (req.point.witness == witnesses::Witness::husimi_zero)
    throw InvalidArgument("husimi zeros are scanned over a grid, not swept");

  std::vector<EngineeringOp> ops = req.variants;
  if (req.include_bare && std::find(ops.begin(), ops.end(), EngineeringOp::none()) == ops.end())
    ops.push_back(EngineeringOp::none());
  for (const auto& op : ops) op.validate();

  SweepTable table;
  table.parameter_name = req.family == Family::thermal ? "rbar" : "alpha";
  table.parameter_values = req.range.values();
  table.witness = req.point.witness;
  table.order = req.point.order;
  table.variants = ops;
  table.engine = req.engine;

  const std::size_t npar = table.parameter_values.size();
  const std::size_t nops = ops.size();
  const bool want_analytic = req.engine != Engine::oracle;
  const bool want_oracle = req.engine != Engine::analytic;

  struct Cell {
    double analytic = kGap;
    double oracle = kGap;
  };
  const auto cells = parallel_map<Cell>(npar * nops, [&](std::size_t k) {
    const auto& op = ops[k / npar];
    const StateSpec spec = spec_at(req.family, table.parameter_values[k % npar], op);
    Cell c;
    try {
      if (want_analytic) c.analytic = evaluate_analytic(spec, req.point);
      if (want_oracle) c.oracle = evaluate_oracle(spec, req.point);
    } catch (const DegenerateState&) {
      c = Cell{};
    } catch (const SingularDenominator&) {
      c = Cell{};
    }
    return c;
  });

  double worst = 0.0;
  for (std::size_t v = 0; v < nops; ++v) {
    Series a{ops[v].label(), std::vector<double>(npar)};
    Series o{ops[v].label() + (req.engine == Engine::both ? "[oracle]" : ""), std::vector<double>(npar)};
    for (std::size_t i = 0; i < npar; ++i) {
      const Cell& c = cells[v * npar + i];
      a.values[i] = c.analytic;
      o.values[i] = c.oracle;
      if (req.engine == Engine::both) worst = std::max(worst, deviation(c.analytic, c.oracle));
    }
    if (want_analytic) table.series.push_back(std::move(a));
    if (want_oracle) table.series.push_back(std::move(o));
  }
  if (req.engine == Engine::both) table.max_deviation = worst;
  return table;
}

// ---------------------------------------------------------------------------
// Husimi grids

struct HusimiGrid {
  StateSpec spec;
  witnesses::Grid grid;
  std::vector<double> values;  // row-major, Im(beta) outer
  Engine engine = Engine::analytic;
  std::optional<double> max_deviation;
};

inline HusimiGrid husimi_grid(const StateSpec& spec, const witnesses::Grid& grid, Engine engine = Engine::analytic) {
  grid.validate();
  HusimiGrid out{spec, grid, {}, engine, std::nullopt};
  const std::size_t n = static_cast<std::size_t>(grid.steps) * static_cast<std::size_t>(grid.steps);
  auto beta_at = [&](std::size_t k) {
    const int i = static_cast<int>(k % static_cast<std::size_t>(grid.steps));
    const int j = static_cast<int>(k / static_cast<std::size_t>(grid.steps));
    return std::complex<double>(grid.re(i), grid.im(j));
  };

  std::optional<oracle::TruncatedState> st;
  if (engine != Engine::analytic) {
    const double reach = std::max({std::norm(std::complex<double>(grid.re_min, grid.im_min)),
                                   std::norm(std::complex<double>(grid.re_min, grid.im_max)),
                                   std::norm(std::complex<double>(grid.re_max, grid.im_min)),
                                   std::norm(std::complex<double>(grid.re_max, grid.im_max))});
    oracle::BuildOptions opts;
    opts.tail_tol = 1e-16;
    opts.min_cutoff = static_cast<int>(std::ceil(4.0 * reach)) + 1;
    st = oracle::build_truncated(spec, opts);
  }

  if (engine == Engine::oracle) {
    out.values = parallel_map<double>(n, [&](std::size_t k) { return oracle::oracle_husimi(*st, beta_at(k)); });
    return out;
  }
  out.values = parallel_map<double>(n, [&](std::size_t k) { return states::husimi(spec, beta_at(k)); });
  if (engine == Engine::both) {
    const auto ref = parallel_map<double>(n, [&](std::size_t k) { return oracle::oracle_husimi(*st, beta_at(k)); });
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k) worst = std::max(worst, deviation(out.values[k], ref[k]));
    out.max_deviation = worst;
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

/// `param,<label1>,...` then one row per parameter value; LF endings.
inline void write_csv(std::ostream& os, const SweepTable& t) {
  os << "param";
  for (const auto& s : t.series) os << ',' << s.label;
  os << '\n';
  for (std::size_t i = 0; i < t.parameter_values.size(); ++i) {
    os << format_real(t.parameter_values[i]);
    for (const auto& s : t.series) os << ',' << format_real(s.values[i]);
    os << '\n';
  }
}

inline void write_csv(std::ostream& os, const HusimiGrid& g) {
  os << "re,im,q_value\n";
  for (int j = 0; j < g.grid.steps; ++j)
    for (int i = 0; i < g.grid.steps; ++i)
      os << format_real(g.grid.re(i)) << ',' << format_real(g.grid.im(j)) << ','
         << format_real(g.values[static_cast<std::size_t>(j * g.grid.steps + i)]) << '\n';
}

// ---------------------------------------------------------------------------
// figure packs

struct FigureOptions {
  Engine engine = Engine::analytic;
  int steps = 200;
  int husimi_steps = 121;
  std::optional<ParamRange> range;  // overrides the family default window
  witnesses::AgarwalTaraVariant variant = witnesses::AgarwalTaraVariant::number_moments;
};

struct FigurePanel {
  std::string name;  // e.g. fig1_a
  std::string caption;
  std::variant<SweepTable, HusimiGrid> data;

  std::optional<double> max_deviation() const {
    return std::visit([](const auto& d) { return d.max_deviation; }, data);
  }
};

struct FigureBundle {
  std::string id;
  std::vector<FigurePanel> panels;
};

inline const std::vector<std::string>& figure_ids() {
  static const std::vector<std::string> ids = {"fig1", "fig2",  "fig3",  "fig4",  "fig5",  "fig6",  "fig7",
                                               "fig8", "fig9",  "fig10", "fig11", "fig12", "fig13", "fig14"};
  return ids;
}

namespace detail {

struct Panel {
  int order;
  int p;
  int q;
};

inline std::string panel_name(const std::string& id, std::size_t k) {
  return id + "_" + static_cast<char>('a' + k);
}

inline FigureBundle sweep_figure(const std::string& id, witnesses::Witness w, Family family,
                                 const std::vector<Panel>& panels, bool bare_panel, const FigureOptions& opt) {
  FigureBundle b{id, {}};
  ParamRange range = opt.range.value_or(default_range(family));
  range.steps = opt.range ? range.steps : opt.steps;
  const std::string param = family == Family::thermal ? "rbar" : "alpha";
  for (const auto& pn : panels) {
    SweepRequest req;
    req.point = {w, pn.order, opt.variant};
    req.variants = {EngineeringOp::pas(pn.p, pn.q), EngineeringOp::psa(pn.p, pn.q)};
    req.family = family;
    req.range = range;
    req.engine = opt.engine;
    req.include_bare = !bare_panel;
    std::string caption = std::string(witnesses::to_string(w)) + " vs " + param;
    if (w != witnesses::Witness::agarwal_tara)
      caption += (w == witnesses::Witness::klyshko ? " m=" : " l=") + std::to_string(pn.order);
    caption += " p=" + std::to_string(pn.p) + " q=" + std::to_string(pn.q);
    b.panels.push_back({panel_name(id, b.panels.size()), caption, sweep(req)});
  }
  if (bare_panel) {
    SweepRequest req;
    req.point = {w, 0, opt.variant};
    req.variants = {EngineeringOp::none()};
    req.family = family;
    req.range = range;
    req.engine = opt.engine;
    b.panels.push_back({panel_name(id, b.panels.size()),
                        std::string(witnesses::to_string(w)) + " vs " + param + " p=0 q=0", sweep(req)});
  }
  return b;
}

inline FigureBundle husimi_figure(const std::string& id, Family family, double small, double large,
                                  const FigureOptions& opt) {
  witnesses::Grid grid;
  grid.steps = opt.husimi_steps;
  FigureBundle b{id, {}};
  const std::string param = family == Family::thermal ? "rbar" : "alpha";
  struct Item {
    EngineeringOp op;
    double value;
  };
  const std::vector<Item> items = {{EngineeringOp::pas(2, 4), small},
                                   {EngineeringOp::psa(2, 4), small},
                                   {EngineeringOp::pas(4, 2), large},
                                   {EngineeringOp::psa(4, 2), large},
                                   {EngineeringOp::none(), small}};
  for (const auto& it : items) {
    const StateSpec spec = spec_at(family, it.value, it.op);
    b.panels.push_back({panel_name(id, b.panels.size()),
                        "husimi " + it.op.label() + " " + param + "=" + format_real(it.value),
                        husimi_grid(spec, grid, opt.engine)});
  }
  return b;
}

}  // namespace detail

/// Data behind one of the fourteen figures. Odd ids are thermal, even ids
/// even coherent.
inline FigureBundle figure_pack(const std::string& id, const FigureOptions& opt = {}) {
  using witnesses::Witness;
  using detail::Panel;
  const std::vector<Panel> standard = {{2, 1, 1}, {3, 1, 2}, {4, 2, 1}};
  const std::vector<Panel> squeezing = {{2, 1, 1}, {4, 1, 2}, {6, 2, 1}};
  const std::vector<Panel> moments = {{0, 1, 1}, {0, 1, 2}, {0, 2, 1}};

  const auto it = std::find(figure_ids().begin(), figure_ids().end(), id);
  if (it == figure_ids().end()) throw InvalidArgument("unknown figure id '" + id + "'");
  const int n = static_cast<int>(it - figure_ids().begin()) + 1;
  const Family family = n % 2 == 1 ? Family::thermal : Family::even_coherent;

  switch ((n + 1) / 2) {
    case 1: return detail::sweep_figure(id, Witness::mandel, family, standard, false, opt);
    case 2: return detail::sweep_figure(id, Witness::hoa, family, standard, false, opt);
    case 3: return detail::sweep_figure(id, Witness::hosps, family, standard, false, opt);
    case 4: return detail::husimi_figure(id, family, 2.0, 4.0, opt);
    case 5: return detail::sweep_figure(id, Witness::hos, family, squeezing, false, opt);
    case 6: return detail::sweep_figure(id, Witness::agarwal_tara, family, moments, true, opt);
    default: return detail::sweep_figure(id, Witness::klyshko, family, standard, false, opt);
  }
}

/// Writes one CSV per panel into `dir` and returns the file names in panel order.
inline std::vector<std::string> write_bundle(const FigureBundle& b, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> names;
  for (const auto& p : b.panels) {
    const std::string file = p.name + ".csv";
    std::ofstream os(dir / file, std::ios::binary);
    if (!os) throw InvalidArgument("cannot write " + (dir / file).string());
    std::visit([&](const auto& d) { write_csv(os, d); }, p.data);
    names.push_back(file);
  }
  return names;
}

}  // namespace fockwitness::sweep
